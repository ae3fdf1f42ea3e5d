//! Weight serialization. The file starts with the magic bytes "KPACW1\n",
//! a little-endian u32 header length, and a UTF-8 header: one `config`
//! line naming the architecture, then one `param` line per buffer giving
//! its name, kind, dimensions, and byte offset into the payload. The
//! payload is every buffer narrowed to little-endian f32, concatenated in
//! header order. Loading widens back to f64, so save - load - save is
//! byte-identical.

use std::path::Path;

use crate::error::{Error, Result};
use crate::net::build::{Network, NetworkConfig};
use crate::net::weights::{NetworkWeights, ParamDef, ParamShape};

const MAGIC: &[u8] = b"KPACW1\n";

pub fn encode_weights(config: &NetworkConfig, weights: &NetworkWeights) -> Vec<u8> {
    let mut header = format!(
        "config levels={} blocks={} k={} n={} c={} shared={}\n",
        config.levels,
        config.blocks,
        config.kernel_size,
        config.branches,
        config.channels,
        config.weight_sharing as u8
    );
    let mut offset = 0usize;
    for (def, buf) in weights.defs.iter().zip(&weights.params) {
        let (kind, dims) = match def.shape {
            ParamShape::Conv { kh, kw, in_c, out_c } => ("conv", vec![kh, kw, in_c, out_c]),
            ParamShape::TConv { kh, kw, out_c, in_c } => ("tconv", vec![kh, kw, out_c, in_c]),
            ParamShape::Vector { len } => ("vec", vec![len]),
        };
        let dims: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
        header.push_str(&format!(
            "param {} {} {} {}\n",
            def.name,
            kind,
            dims.join(" "),
            offset
        ));
        offset += buf.len() * 4;
    }

    let mut out = Vec::with_capacity(MAGIC.len() + 4 + header.len() + offset);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for buf in &weights.params {
        for &v in buf {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

fn parse_usize(token: &str, what: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| Error::WeightsHeader(format!("bad {what}: {token:?}")))
}

fn parse_kv(token: &str, key: &str) -> Result<usize> {
    let value = token
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| Error::WeightsHeader(format!("expected {key}=..., got {token:?}")))?;
    parse_usize(value, key)
}

fn parse_config_line(line: &str) -> Result<NetworkConfig> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != 7 || tokens[0] != "config" {
        return Err(Error::WeightsHeader(format!("bad config line: {line:?}")));
    }
    let shared = parse_kv(tokens[6], "shared")?;
    if shared > 1 {
        return Err(Error::WeightsHeader(format!("shared must be 0 or 1, got {shared}")));
    }
    Ok(NetworkConfig {
        levels: parse_kv(tokens[1], "levels")?,
        blocks: parse_kv(tokens[2], "blocks")?,
        kernel_size: parse_kv(tokens[3], "k")?,
        branches: parse_kv(tokens[4], "n")?,
        channels: parse_kv(tokens[5], "c")?,
        weight_sharing: shared == 1,
    })
}

fn parse_param_line(line: &str) -> Result<(ParamDef, usize)> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() < 5 || tokens[0] != "param" {
        return Err(Error::WeightsHeader(format!("bad param line: {line:?}")));
    }
    let name = tokens[1].to_string();
    let dims: Vec<&str> = tokens[3..tokens.len() - 1].to_vec();
    let shape = match (tokens[2], dims.as_slice()) {
        ("conv", [kh, kw, in_c, out_c]) => ParamShape::Conv {
            kh: parse_usize(kh, "kh")?,
            kw: parse_usize(kw, "kw")?,
            in_c: parse_usize(in_c, "in_c")?,
            out_c: parse_usize(out_c, "out_c")?,
        },
        ("tconv", [kh, kw, out_c, in_c]) => ParamShape::TConv {
            kh: parse_usize(kh, "kh")?,
            kw: parse_usize(kw, "kw")?,
            out_c: parse_usize(out_c, "out_c")?,
            in_c: parse_usize(in_c, "in_c")?,
        },
        ("vec", [len]) => ParamShape::Vector {
            len: parse_usize(len, "len")?,
        },
        _ => {
            return Err(Error::WeightsHeader(format!(
                "bad parameter kind or dimension count: {line:?}"
            )))
        }
    };
    let offset = parse_usize(tokens[tokens.len() - 1], "offset")?;
    Ok((ParamDef { name, shape }, offset))
}

pub fn decode_weights(bytes: &[u8]) -> Result<(NetworkConfig, NetworkWeights)> {
    if bytes.len() < MAGIC.len() + 4 {
        return Err(Error::WeightsBadMagic);
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::WeightsBadMagic);
    }
    let header_len =
        u32::from_le_bytes(bytes[MAGIC.len()..MAGIC.len() + 4].try_into().unwrap()) as usize;
    let header_start = MAGIC.len() + 4;
    if bytes.len() < header_start + header_len {
        return Err(Error::WeightsTruncated {
            expected: header_start + header_len,
            got: bytes.len(),
        });
    }
    let header = std::str::from_utf8(&bytes[header_start..header_start + header_len])
        .map_err(|_| Error::WeightsHeader("header is not UTF-8".into()))?;
    let payload = &bytes[header_start + header_len..];

    let mut lines = header.lines();
    let config = parse_config_line(
        lines
            .next()
            .ok_or_else(|| Error::WeightsHeader("empty header".into()))?,
    )?;

    let mut weights = NetworkWeights::empty();
    let mut expected_offset = 0usize;
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let (def, offset) = parse_param_line(line)?;
        if offset != expected_offset {
            return Err(Error::WeightsHeader(format!(
                "parameter {} declares offset {offset}, expected {expected_offset}",
                def.name
            )));
        }
        let nbytes = def.shape.len() * 4;
        let end = expected_offset + nbytes;
        if payload.len() < end {
            return Err(Error::WeightsTruncated {
                expected: end,
                got: payload.len(),
            });
        }
        let values: Vec<f64> = payload[expected_offset..end]
            .chunks_exact(4)
            .map(|chunk| f32::from_le_bytes(chunk.try_into().unwrap()) as f64)
            .collect();
        let idx = weights.push(def.name, def.shape);
        weights.params[idx] = values;
        expected_offset = end;
    }
    if payload.len() != expected_offset {
        return Err(Error::WeightsHeader(format!(
            "payload holds {} bytes but the header accounts for {expected_offset}",
            payload.len()
        )));
    }
    Ok((config, weights))
}

pub fn save_weights(path: &Path, config: &NetworkConfig, weights: &NetworkWeights) -> Result<()> {
    std::fs::write(path, encode_weights(config, weights))?;
    Ok(())
}

pub fn load_weights(path: &Path) -> Result<(NetworkConfig, NetworkWeights)> {
    decode_weights(&std::fs::read(path)?)
}

/// Loads a weight file and re-derives the architecture around it,
/// verifying every buffer against the declared config.
pub fn load_network(path: &Path) -> Result<Network> {
    let (config, weights) = load_weights(path)?;
    Network::from_weights(config, weights)
}

pub fn save_network(path: &Path, net: &Network) -> Result<()> {
    save_weights(path, &net.config, &net.weights)
}

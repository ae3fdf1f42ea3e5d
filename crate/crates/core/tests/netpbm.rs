//! Netpbm P5/P6 parsing and encoding against hand-assembled byte strings.

use kpac_core::image::Image;
use kpac_core::netpbm::{encode_netpbm, load_netpbm, parse_netpbm, save_netpbm, Depth};
use kpac_core::Error;

#[test]
fn parses_a_frozen_p5_example() {
    let bytes = b"P5\n2 2\n255\n\x00\x80\xff\x40";
    let img = parse_netpbm(bytes).unwrap();
    assert_eq!((img.height(), img.width(), img.channels()), (2, 2, 1));
    let want = [0.0, 128.0 / 255.0, 1.0, 64.0 / 255.0];
    for (i, (a, b)) in img.data().iter().zip(want).enumerate() {
        assert!((a - b).abs() < 1e-15, "sample {i}: {a} vs {b}");
    }
}

#[test]
fn parses_a_frozen_p6_example() {
    let bytes = b"P6\n1 1\n255\n\xff\x00\x00";
    let img = parse_netpbm(bytes).unwrap();
    assert_eq!((img.height(), img.width(), img.channels()), (1, 1, 3));
    assert_eq!(img.at(0, 0, 0), 1.0, "red channel");
    assert_eq!(img.at(0, 0, 1), 0.0, "green channel");
    assert_eq!(img.at(0, 0, 2), 0.0, "blue channel");
}

#[test]
fn sixteen_bit_samples_are_big_endian() {
    let bytes = b"P5\n2 1\n65535\n\x80\x00\x00\x01";
    let img = parse_netpbm(bytes).unwrap();
    assert!(
        (img.at(0, 0, 0) - 32768.0 / 65535.0).abs() < 1e-15,
        "high byte first"
    );
    assert!(
        (img.at(0, 1, 0) - 1.0 / 65535.0).abs() < 1e-15,
        "low byte second"
    );
}

#[test]
fn header_accepts_comments_and_odd_whitespace() {
    let bytes = b"P5 # magic\n# a comment line\n  2\t1 # width and height\n255\n\x01\x02";
    let img = parse_netpbm(bytes).unwrap();
    assert_eq!((img.height(), img.width()), (1, 2));
    assert!((img.at(0, 1, 0) - 2.0 / 255.0).abs() < 1e-15);
}

#[test]
fn encoding_quantizes_with_round_half_away() {
    // 0.5 * 255 + 0.5 = 128.0 exactly, so 0.5 encodes as 128, and values
    // outside [0, 1] clamp.
    let img = Image::new(1, 4, 1, vec![0.0, 0.5, 1.0, 1.7]).unwrap();
    let bytes = encode_netpbm(&img, Depth::Eight);
    assert_eq!(&bytes[..11], b"P5\n4 1\n255\n");
    assert_eq!(&bytes[11..], &[0u8, 128, 255, 255]);
}

#[test]
fn sixteen_bit_encoding_writes_big_endian() {
    let img = Image::new(1, 2, 1, vec![1.0, 1.0 / 65535.0]).unwrap();
    let bytes = encode_netpbm(&img, Depth::Sixteen);
    assert_eq!(&bytes[..13], b"P5\n2 1\n65535\n");
    assert_eq!(&bytes[13..], &[0xff, 0xff, 0x00, 0x01]);
}

#[test]
fn rgb_images_encode_as_p6() {
    let img = Image::new(1, 1, 3, vec![1.0, 0.0, 0.5]).unwrap();
    let bytes = encode_netpbm(&img, Depth::Eight);
    assert_eq!(&bytes[..11], b"P6\n1 1\n255\n");
    assert_eq!(&bytes[11..], &[255u8, 0, 128]);
}

#[test]
fn double_round_trip_is_byte_stable() {
    // Quantization loses precision once; re-encoding the decoded image
    // must reproduce the file exactly.
    let img = Image::new(2, 3, 3, vec![0.123; 18]).unwrap();
    for depth in [Depth::Eight, Depth::Sixteen] {
        let once = encode_netpbm(&img, depth);
        let decoded = parse_netpbm(&once).unwrap();
        let twice = encode_netpbm(&decoded, depth);
        assert_eq!(once, twice, "round trip must be a fixed point");
    }
}

#[test]
fn file_round_trip_preserves_the_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.pgm");
    let img = Image::new(3, 2, 1, vec![0.0, 0.25, 0.5, 0.75, 1.0, 0.33]).unwrap();
    save_netpbm(&path, &img, Depth::Sixteen).unwrap();
    let loaded = load_netpbm(&path).unwrap();
    assert!(img.same_shape(&loaded));
    for (a, b) in img.data().iter().zip(loaded.data()) {
        assert!(
            (a - b).abs() <= 0.5 / 65535.0,
            "16-bit quantization error exceeds half a step: {a} vs {b}"
        );
    }
}

#[test]
fn unsupported_magics_are_named_in_the_error() {
    for magic in ["P1", "P2", "P3", "P4", "P7"] {
        let bytes = format!("{magic}\n1 1\n255\n\x00");
        match parse_netpbm(bytes.as_bytes()) {
            Err(Error::UnsupportedMagic(m)) => assert_eq!(m, magic),
            other => panic!("{magic}: expected UnsupportedMagic, got {other:?}"),
        }
    }
}

#[test]
fn only_the_two_standard_maxvals_are_accepted() {
    let bytes = b"P5\n1 1\n1023\n\x00\x00";
    assert!(
        matches!(parse_netpbm(bytes), Err(Error::UnsupportedMaxval(1023))),
        "nonstandard maxval must be named in the error"
    );
}

#[test]
fn short_payloads_report_expected_and_actual_sizes() {
    let bytes = b"P6\n2 2\n255\n\x01\x02\x03";
    match parse_netpbm(bytes) {
        Err(Error::TruncatedPayload { expected: 12, got: 3 }) => {}
        other => panic!("expected TruncatedPayload {{12, 3}}, got {other:?}"),
    }
}

#[test]
fn malformed_headers_are_rejected() {
    let cases: [&[u8]; 4] = [
        b"P5\n1\n255\n\x00",        // missing height
        b"P5\nx 1\n255\n\x00",      // non-numeric width
        b"P5\n0 1\n255\n\x00",      // zero dimension
        b"P5\n1 1\n255",            // no separator before payload
    ];
    for (i, bytes) in cases.iter().enumerate() {
        assert!(
            matches!(parse_netpbm(bytes), Err(Error::MalformedHeader(_))),
            "case {i} should be a malformed header"
        );
    }
}

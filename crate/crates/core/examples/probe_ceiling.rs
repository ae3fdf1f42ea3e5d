//! Measures how much holdout MAE a perfect pointwise map (conditional
//! median of sharp given the blurred pixel value) could remove on the toy
//! training content. An upper bound for any net that only learns a
//! per-pixel transfer curve.

use kpac_core::train::toy::synthetic_pairs;

fn main() {
    let bins = 256usize;
    let train = synthetic_pairs(200, 32, 32, 1.0, 3.0, 7);
    let hold = synthetic_pairs(64, 32, 32, 1.0, 3.0, 999);

    // Collect sharp samples per blurred-value bin.
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); bins];
    for (s, b) in train.sharp.iter().zip(&train.blurred) {
        for (sv, bv) in s.data().iter().zip(b.data()) {
            let bin = ((bv.clamp(0.0, 1.0)) * (bins as f64 - 1.0)).round() as usize;
            buckets[bin].push(*sv);
        }
    }
    let mut map = vec![0.0; bins];
    let mut last = 0.5;
    for (i, bucket) in buckets.iter_mut().enumerate() {
        if bucket.is_empty() {
            map[i] = last;
            continue;
        }
        bucket.sort_by(|a, b| a.partial_cmp(b).unwrap());
        map[i] = bucket[bucket.len() / 2];
        last = map[i];
    }

    let mut base = 0.0;
    let mut mapped = 0.0;
    let mut count = 0usize;
    for (s, b) in hold.sharp.iter().zip(&hold.blurred) {
        for (sv, bv) in s.data().iter().zip(b.data()) {
            let bin = ((bv.clamp(0.0, 1.0)) * (bins as f64 - 1.0)).round() as usize;
            base += (bv - sv).abs();
            mapped += (map[bin] - sv).abs();
            count += 1;
        }
    }
    base /= count as f64;
    mapped /= count as f64;
    println!("baseline {base:.5} pointwise-median {mapped:.5}");
    println!("pointwise ceiling improvement {:.3}", 1.0 - mapped / base);

    // Best LINEAR pointwise map y -> mid + a*(y - mid) + b, grid-searched.
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for ai in 0..60 {
        let a = 1.0 + ai as f64 * 0.1;
        for bi in -10..=10 {
            let off = bi as f64 * 0.01;
            let mut err = 0.0;
            for (s, b) in hold.sharp.iter().zip(&hold.blurred) {
                for (sv, bv) in s.data().iter().zip(b.data()) {
                    let pred = 0.5 + a * (bv - 0.5) + off;
                    err += (pred - sv).abs();
                }
            }
            err /= count as f64;
            if err < best.0 {
                best = (err, a, off);
            }
        }
    }
    println!(
        "best linear map gain {:.3} (a={:.1} b={:.2}, mae {:.5})",
        1.0 - best.0 / base,
        best.1,
        best.2,
        best.0
    );
}

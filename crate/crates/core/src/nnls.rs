use crate::error::{Error, Result};

/// Result of a nonnegative least-squares solve.
#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// KKT residual at the returned iterate (see [`kkt_residual`]).
    pub kkt: f64,
}

const DUAL_TOL: f64 = 1e-10;

/// Lawson-Hanson active-set NNLS: minimize ||A w - b||^2 subject to
/// w >= 0. `a` is row-major m x n.
pub fn nnls(a: &[f64], m: usize, n: usize, b: &[f64]) -> Result<NnlsSolution> {
    if n == 0 || m == 0 || a.len() != m * n || b.len() != m {
        return Err(Error::BadBlend(format!(
            "nnls shapes: a {}x{} (len {}), b len {}",
            m,
            n,
            a.len(),
            b.len()
        )));
    }
    let mut gram = vec![0.0; n * n];
    let mut proj = vec![0.0; n];
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for row in 0..m {
                acc += a[row * n + i] * a[row * n + j];
            }
            gram[i * n + j] = acc;
            gram[j * n + i] = acc;
        }
        let mut acc = 0.0;
        for row in 0..m {
            acc += a[row * n + i] * b[row];
        }
        proj[i] = acc;
    }
    nnls_gram(&gram, n, &proj)
}

/// Same solve expressed on the normal equations: `gram` = A^T A (n x n),
/// `proj` = A^T b. Useful when m is large and n tiny.
pub fn nnls_gram(gram: &[f64], n: usize, proj: &[f64]) -> Result<NnlsSolution> {
    if n == 0 || gram.len() != n * n || proj.len() != n {
        return Err(Error::BadBlend(format!(
            "nnls gram shapes: gram len {}, n {}, proj len {}",
            gram.len(),
            n,
            proj.len()
        )));
    }
    let mut w = vec![0.0; n];
    let mut in_set = vec![false; n];
    let mut iterations = 0;
    let max_outer = 3 * n;
    let mut converged = false;

    while iterations < max_outer {
        // Dual: d = proj - G w; pick the most positive coordinate outside
        // the passive set.
        let mut best = DUAL_TOL;
        let mut best_j = None;
        for j in 0..n {
            if in_set[j] {
                continue;
            }
            let mut d = proj[j];
            for i in 0..n {
                d -= gram[j * n + i] * w[i];
            }
            if d > best {
                best = d;
                best_j = Some(j);
            }
        }
        let Some(j) = best_j else {
            converged = true;
            break;
        };
        in_set[j] = true;
        iterations += 1;

        // Inner loop: least squares on the passive set, stepping back to
        // the feasible boundary when a coordinate would go nonpositive.
        let mut guard = 0;
        loop {
            guard += 1;
            if guard > 2 * n + 2 {
                break;
            }
            let passive: Vec<usize> = (0..n).filter(|&i| in_set[i]).collect();
            let Some(z) = solve_subsystem(gram, n, proj, &passive) else {
                in_set[j] = false;
                break;
            };
            if z.iter().all(|v| *v > 0.0) {
                for (idx, &i) in passive.iter().enumerate() {
                    w[i] = z[idx];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (idx, &i) in passive.iter().enumerate() {
                if z[idx] <= 0.0 {
                    let denom = w[i] - z[idx];
                    if denom > 0.0 {
                        alpha = alpha.min(w[i] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            if !alpha.is_finite() {
                break;
            }
            for (idx, &i) in passive.iter().enumerate() {
                w[i] += alpha * (z[idx] - w[i]);
                if w[i] <= f64::EPSILON * 16.0 {
                    w[i] = 0.0;
                    in_set[i] = false;
                }
            }
        }
    }

    let kkt = kkt_residual(gram, n, proj, &w);
    Ok(NnlsSolution {
        weights: w,
        iterations,
        converged,
        kkt,
    })
}

/// Solves G[P,P] z = proj[P] by Cholesky; None when the subsystem is not
/// positive definite.
fn solve_subsystem(gram: &[f64], n: usize, proj: &[f64], passive: &[usize]) -> Option<Vec<f64>> {
    let k = passive.len();
    let mut l = vec![0.0; k * k];
    for (r, &i) in passive.iter().enumerate() {
        for (c, &j) in passive.iter().enumerate().take(r + 1) {
            let mut acc = gram[i * n + j];
            for t in 0..c {
                acc -= l[r * k + t] * l[c * k + t];
            }
            if r == c {
                if acc <= 0.0 {
                    return None;
                }
                l[r * k + c] = acc.sqrt();
            } else {
                l[r * k + c] = acc / l[c * k + c];
            }
        }
    }
    let mut y = vec![0.0; k];
    for r in 0..k {
        let mut acc = proj[passive[r]];
        for t in 0..r {
            acc -= l[r * k + t] * y[t];
        }
        y[r] = acc / l[r * k + r];
    }
    let mut z = vec![0.0; k];
    for r in (0..k).rev() {
        let mut acc = y[r];
        for t in r + 1..k {
            acc -= l[t * k + r] * z[t];
        }
        z[r] = acc / l[r * k + r];
    }
    Some(z)
}

/// KKT residual for min ||Aw - b||^2, w >= 0, on the normal equations:
/// with g = G w - proj (the half-gradient), optimality requires w >= 0,
/// g >= 0 where w = 0, and g = 0 where w > 0. Returns the largest
/// violation.
pub fn kkt_residual(gram: &[f64], n: usize, proj: &[f64], w: &[f64]) -> f64 {
    let mut res = 0.0f64;
    for j in 0..n {
        let mut g = -proj[j];
        for i in 0..n {
            g += gram[j * n + i] * w[i];
        }
        res = res.max(-w[j]);
        if w[j] > 0.0 {
            res = res.max(g.abs());
        } else {
            res = res.max(-g);
        }
    }
    res
}

/// Objective ||A w - b||^2 for row-major A.
pub fn objective(a: &[f64], m: usize, n: usize, b: &[f64], w: &[f64]) -> f64 {
    let mut acc = 0.0;
    for row in 0..m {
        let mut r = -b[row];
        for j in 0..n {
            r += a[row * n + j] * w[j];
        }
        acc += r * r;
    }
    acc
}

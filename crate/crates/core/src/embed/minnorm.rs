//! Minimum-norm point of the convex hull of finitely many vectors.
//!
//! One or two generators are handled in closed form; larger sets run Wolfe's
//! active-set method, where each corral step solves the affine min-norm
//! problem via its KKT system.

use crate::scalar::Real;

#[inline]
pub fn dot<S: Real>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm<S: Real>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

fn combine<S: Real>(pts: &[&[S]], weights: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); pts[0].len()];
    for (p, &w) in pts.iter().zip(weights) {
        for (o, &x) in out.iter_mut().zip(p.iter()) {
            *o = *o + w * x;
        }
    }
    out
}

/// Closest point to the origin on the segment `[a, b]`.
pub fn segment_min_norm<S: Real>(a: &[S], b: &[S]) -> Vec<S> {
    let diff: Vec<S> = b.iter().zip(a).map(|(&y, &x)| y - x).collect();
    let dd = dot(&diff, &diff);
    if dd == S::zero() {
        return a.to_vec();
    }
    let t = (-dot(a, &diff) / dd).max(S::zero()).min(S::one());
    a.iter().zip(&diff).map(|(&x, &dx)| x + t * dx).collect()
}

/// Solves `A x = b` in place by Gaussian elimination with partial pivoting.
/// Returns `None` for numerically singular systems.
fn solve<S: Real>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Option<Vec<S>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(S::zero(), |m, &x| m.max(x.abs()));
    let tiny = scale * S::epsilon() * S::lit(64.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() <= tiny {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != S::zero() {
                for k in col..n {
                    let v = a[col][k];
                    a[row][k] = a[row][k] - f * v;
                }
                let v = b[col];
                b[row] = b[row] - f * v;
            }
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Affine weights (summing to one) of the min-norm point of the affine hull.
fn affine_min_norm<S: Real>(pts: &[&[S]]) -> Option<Vec<S>> {
    let m = pts.len();
    let mut a = vec![vec![S::zero(); m + 1]; m + 1];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = dot(pts[i], pts[j]);
        }
        a[i][m] = S::one();
        a[m][i] = S::one();
    }
    let mut b = vec![S::zero(); m + 1];
    b[m] = S::one();
    let mut sol = solve(a, b)?;
    sol.truncate(m);
    Some(sol)
}

/// Minimum-norm element of `conv(generators)`.
///
/// `tol` is the relative optimality gap `‖x‖² − min_j ⟨x, p_j⟩` at which
/// Wolfe's method stops, scaled by the largest squared generator norm.
pub fn min_norm_point<S: Real>(generators: &[Vec<S>], tol: S) -> Vec<S> {
    assert!(!generators.is_empty(), "empty generating set");
    match generators.len() {
        1 => return generators[0].clone(),
        2 => return segment_min_norm(&generators[0], &generators[1]),
        _ => {}
    }
    let scale = generators
        .iter()
        .map(|p| dot(p, p))
        .fold(S::zero(), |m, v| m.max(v))
        .max(S::min_positive_value());
    let start = (0..generators.len())
        .min_by(|&i, &j| dot(&generators[i], &generators[i]).partial_cmp(&dot(&generators[j], &generators[j])).unwrap())
        .unwrap();
    let mut corral: Vec<usize> = vec![start];
    let mut weights: Vec<S> = vec![S::one()];
    let mut x = generators[start].clone();
    let max_outer = 50 * generators.len() + 100;
    for _ in 0..max_outer {
        let (j, best) = generators
            .iter()
            .enumerate()
            .map(|(j, p)| (j, dot(&x, p)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if dot(&x, &x) - best <= tol * scale || corral.contains(&j) {
            return x;
        }
        corral.push(j);
        weights.push(S::zero());
        loop {
            let pts: Vec<&[S]> = corral.iter().map(|&i| generators[i].as_slice()).collect();
            let alpha = match affine_min_norm(&pts) {
                Some(a) => a,
                None => {
                    // Affinely dependent corral: drop the newest point and stop.
                    corral.pop();
                    weights.pop();
                    let pts: Vec<&[S]> = corral.iter().map(|&i| generators[i].as_slice()).collect();
                    return combine(&pts, &weights);
                }
            };
            if alpha.iter().all(|&a| a > S::zero()) {
                weights = alpha;
                break;
            }
            let mut theta = S::one();
            for (&l, &a) in weights.iter().zip(&alpha) {
                if a <= S::zero() {
                    let denom = l - a;
                    if denom > S::zero() {
                        theta = theta.min(l / denom);
                    }
                }
            }
            for (l, &a) in weights.iter_mut().zip(&alpha) {
                *l = *l + theta * (a - *l);
            }
            let floor = S::epsilon() * S::lit(16.0);
            let keep: Vec<bool> = weights.iter().map(|&l| l > floor).collect();
            let mut k = 0;
            corral.retain(|_| {
                k += 1;
                keep[k - 1]
            });
            let mut k = 0;
            weights.retain(|_| {
                k += 1;
                keep[k - 1]
            });
            let total = weights.iter().fold(S::zero(), |a, &b| a + b);
            for l in weights.iter_mut() {
                *l = *l / total;
            }
            if corral.len() == 1 {
                weights = vec![S::one()];
                break;
            }
        }
        let pts: Vec<&[S]> = corral.iter().map(|&i| generators[i].as_slice()).collect();
        x = combine(&pts, &weights);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_cases() {
        assert_eq!(min_norm_point(&[vec![3.0, 4.0]], 1e-10), vec![3.0, 4.0]);
        let m = min_norm_point(&[vec![-2.0], vec![5.0]], 1e-10);
        assert_eq!(m, vec![0.0]);
        let m: Vec<f64> = min_norm_point(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1e-10);
        assert!((m[0] - 0.5).abs() < 1e-15 && (m[1] - 0.5).abs() < 1e-15);
        assert!((norm(&m) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn simplex_grid_confirms_projection() {
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let m = min_norm_point(&pts, 1e-10);
        let mut best = f64::INFINITY;
        for k in 0..=10_000 {
            let t = k as f64 / 10_000.0;
            best = best.min(((1.0 - t).powi(2) + t * t).sqrt());
        }
        assert!((norm(&m) - best).abs() < 1e-9);
    }

    #[test]
    fn origin_inside_gives_zero() {
        let pts = vec![vec![1.0, 0.0], vec![-1.0, 1.0], vec![-1.0, -1.0]];
        let m = min_norm_point(&pts, 1e-12);
        assert!(norm(&m) < 1e-12);
    }

    #[test]
    fn optimality_on_random_hulls() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..200 {
            let d = 2 + trial % 5;
            let n = 3 + trial % 7;
            let shift: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| shift.iter().map(|s| s + rng.random_range(-1.0..1.0)).collect())
                .collect();
            let x = min_norm_point(&pts, 1e-12);
            // Optimality: ⟨x, p − x⟩ ≥ 0 for every generator.
            let xx = dot(&x, &x);
            for p in &pts {
                assert!(dot(&x, p) - xx >= -1e-9, "trial {trial}");
            }
        }
    }
}

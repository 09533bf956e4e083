//! Cyclic Jacobi rotations on a dense symmetric matrix at working precision.

use crate::error::{Error, Parity, Result};
use crate::mp::Real;

const MAX_SWEEPS: usize = 80;

/// Eigen-decomposition `(values, vectors)` where `vectors[j]` is the
/// eigenvector of `values[j]`. Order is unspecified.
pub(crate) fn symmetric_eigen(
    mut a: Vec<Vec<Real>>,
    bits: usize,
    parity: Parity,
) -> Result<(Vec<Real>, Vec<Vec<Real>>)> {
    let m = a.len();
    let one = Real::from_i64(1, bits);
    let zero = Real::zero(bits);
    // v[r][j]: component r of eigenvector j
    let mut v: Vec<Vec<Real>> = (0..m)
        .map(|r| {
            (0..m)
                .map(|j| if r == j { one.clone() } else { zero.clone() })
                .collect()
        })
        .collect();

    let scale = a
        .iter()
        .enumerate()
        .map(|(i, row)| row[i].abs())
        .fold(one.clone(), |acc, x| if x > acc { x } else { acc });
    // 2^-(bits + 8) relative to the largest diagonal entry
    let mut eps = one.clone();
    let half = Real::ratio(1, 2, bits);
    for _ in 0..bits + 8 {
        eps = &eps * &half;
    }
    let threshold = &eps * &scale;

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].is_zero() {
                    continue;
                }
                if a[p][q].abs() <= threshold {
                    a[p][q] = zero.clone();
                    a[q][p] = zero.clone();
                    continue;
                }
                rotated = true;
                rotate(&mut a, &mut v, p, q, &one);
            }
        }
        if !rotated {
            let values = (0..m).map(|i| a[i][i].clone()).collect();
            let vectors = (0..m)
                .map(|j| (0..m).map(|r| v[r][j].clone()).collect())
                .collect();
            return Ok((values, vectors));
        }
    }

    let mut worst = (0, Real::zero(bits));
    for (p, row) in a.iter().enumerate() {
        for (q, x) in row.iter().enumerate() {
            if p != q && x.abs() > worst.1 {
                worst = (p, x.abs());
            }
        }
    }
    Err(Error::NonConvergence {
        parity,
        index: worst.0,
    })
}

#[allow(clippy::needless_range_loop)]
fn rotate(a: &mut [Vec<Real>], v: &mut [Vec<Real>], p: usize, q: usize, one: &Real) {
    let apq = a[p][q].clone();
    let theta = (&a[q][q] - &a[p][p]) / (&apq + &apq);
    let root = (one + theta.square()).sqrt();
    let t = if theta.is_negative() {
        -(one / (theta.abs() + root))
    } else {
        one / (theta.abs() + root)
    };
    let c = one / (one + t.square()).sqrt();
    let s = &t * &c;
    let tau = &s / (one + &c);
    let shift = &t * &apq;

    a[p][p] = &a[p][p] - &shift;
    a[q][q] = &a[q][q] + &shift;
    let z = Real::zero(one.precision());
    a[p][q] = z.clone();
    a[q][p] = z;

    for r in 0..a.len() {
        if r == p || r == q {
            continue;
        }
        let g = &a[r][p];
        let h = &a[r][q];
        if g.is_zero() && h.is_zero() {
            continue;
        }
        let new_p = g - &s * (h + g * &tau);
        let new_q = h + &s * (g - h * &tau);
        a[p][r] = new_p.clone();
        a[r][p] = new_p;
        a[q][r] = new_q.clone();
        a[r][q] = new_q;
    }
    for row in v.iter_mut() {
        let g = &row[p];
        let h = &row[q];
        if g.is_zero() && h.is_zero() {
            continue;
        }
        let new_p = g - &s * (h + g * &tau);
        let new_q = h + &s * (g - h * &tau);
        row[p] = new_p;
        row[q] = new_q;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn to_mp(m: &[&[f64]], bits: usize) -> Vec<Vec<Real>> {
        m.iter()
            .map(|r| r.iter().map(|&x| Real::from_f64(x, bits)).collect())
            .collect()
    }

    #[test]
    fn two_by_two() {
        let a = to_mp(&[&[2.0, 1.0], &[1.0, 2.0]], 128);
        let (vals, vecs) = symmetric_eigen(a, 128, Parity::Even).unwrap();
        let mut vs: Vec<f64> = vals.iter().map(Real::to_f64).collect();
        vs.sort_by(f64::total_cmp);
        assert_eq!(vs, vec![1.0, 3.0]);
        for vec in &vecs {
            let n: f64 = vec.iter().map(|x| x.to_f64().powi(2)).sum();
            assert!((n - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn reconstructs_matrix() {
        let raw: &[&[f64]] = &[
            &[4.0, 1.0, 0.0, 0.5],
            &[1.0, 3.0, 0.25, 0.0],
            &[0.0, 0.25, -1.0, 2.0],
            &[0.5, 0.0, 2.0, 0.0],
        ];
        let bits = 192;
        let (vals, vecs) = symmetric_eigen(to_mp(raw, bits), bits, Parity::Odd).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = Real::zero(bits);
                for k in 0..4 {
                    acc = acc + &vecs[k][i] * &vals[k] * &vecs[k][j];
                }
                let diff = (acc - Real::from_f64(raw[i][j], bits)).abs().to_f64();
                assert!(diff < 1e-50, "({i},{j}) residual {diff}");
            }
        }
    }
}

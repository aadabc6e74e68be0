//! Dense log-determinants.

use serde::{Deserialize, Serialize};

/// Relative pivot size below which a factorization is flagged.
pub const NEAR_SINGULAR_RATIO: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogDet {
    /// `log |det|`; `-inf` for an exactly singular matrix.
    pub log_abs: f64,
    /// Sign of the determinant, 0 when singular.
    pub sign: i8,
    /// Smallest `|pivot| / max |entry|` met during elimination.
    pub min_pivot_ratio: f64,
}

impl LogDet {
    pub fn is_singular(&self) -> bool {
        self.sign == 0
    }

    pub fn near_singular(&self) -> bool {
        self.min_pivot_ratio < NEAR_SINGULAR_RATIO
    }
}

/// `log |det A|` of the row-major `n x n` matrix in `a`, by LU with partial
/// pivoting. The matrix is overwritten with its factors.
pub fn log_abs_det(a: &mut [f64], n: usize) -> LogDet {
    assert_eq!(a.len(), n * n, "matrix storage does not match its order");
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if n == 0 {
        return LogDet {
            log_abs: 0.0,
            sign: 1,
            min_pivot_ratio: f64::INFINITY,
        };
    }
    if scale == 0.0 {
        return singular();
    }
    let mut log_abs = 0.0;
    let mut sign = 1i8;
    let mut min_ratio = f64::INFINITY;
    for k in 0..n {
        let (mut p, mut best) = (k, a[k * n + k].abs());
        for i in k + 1..n {
            let v = a[i * n + k].abs();
            if v > best {
                p = i;
                best = v;
            }
        }
        if best == 0.0 {
            return singular();
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        let pivot = a[k * n + k];
        min_ratio = min_ratio.min(best / scale);
        log_abs += best.ln();
        if pivot < 0.0 {
            sign = -sign;
        }
        let (upper, lower) = a.split_at_mut((k + 1) * n);
        let pivot_row = &upper[k * n + k + 1..k * n + n];
        for row in lower.chunks_exact_mut(n) {
            let l = row[k] / pivot;
            if l != 0.0 {
                for (x, &u) in row[k + 1..].iter_mut().zip(pivot_row) {
                    *x -= l * u;
                }
            }
            row[k] = l;
        }
    }
    LogDet {
        log_abs,
        sign,
        min_pivot_ratio: min_ratio,
    }
}

fn singular() -> LogDet {
    LogDet {
        log_abs: f64::NEG_INFINITY,
        sign: 0,
        min_pivot_ratio: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cofactor_det(m: &[f64], n: usize) -> f64 {
        if n == 1 {
            return m[0];
        }
        let mut det = 0.0;
        for col in 0..n {
            let minor: Vec<f64> = (1..n)
                .flat_map(|r| (0..n).filter(move |&c| c != col).map(move |c| (r, c)))
                .map(|(r, c)| m[r * n + c])
                .collect();
            let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
            det += sign * m[col] * cofactor_det(&minor, n - 1);
        }
        det
    }

    #[test]
    fn small_cases() {
        let d = log_abs_det(&mut [2.0], 1);
        assert_eq!(d.log_abs, 2f64.ln());
        let d = log_abs_det(&mut [2.0, 0.0, 0.0, 2.0], 2);
        assert!((d.log_abs - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(d.sign, 1);
        let d = log_abs_det(&mut [0.0, 1.0, 1.0, 0.0], 2);
        assert_eq!((d.log_abs, d.sign), (0.0, -1));
    }

    #[test]
    fn singular_and_near_singular() {
        let d = log_abs_det(&mut [1.0, 2.0, 2.0, 4.0], 2);
        assert!(d.is_singular());
        assert_eq!(d.log_abs, f64::NEG_INFINITY);
        let d = log_abs_det(&mut [1.0, 2.0, 1.0, 2.0 + 1e-14], 2);
        assert!(!d.is_singular());
        assert!(d.near_singular());
        assert!(log_abs_det(&mut [0.0; 9], 3).is_singular());
    }

    #[test]
    fn column_negation_flips_sign_only() {
        let m = [1.0, 0.3, -0.2, 0.5, 2.0, 0.1, -0.7, 0.4, 1.5];
        let mut neg = m;
        for r in 0..3 {
            neg[r * 3 + 1] = -neg[r * 3 + 1];
        }
        let a = log_abs_det(&mut m.clone(), 3);
        let b = log_abs_det(&mut neg, 3);
        assert!((a.log_abs - b.log_abs).abs() < 1e-15);
        assert_eq!(a.sign, -b.sign);
    }

    proptest! {
        #[test]
        fn matches_cofactor_expansion(
            n in 1usize..=6,
            entries in prop::collection::vec(-2.0f64..2.0, 36),
        ) {
            let m: Vec<f64> = entries[..n * n].to_vec();
            let det = cofactor_det(&m, n);
            prop_assume!(det.abs() > 1e-6);
            let d = log_abs_det(&mut m.clone(), n);
            let rel = (d.log_abs.exp() - det.abs()).abs() / det.abs();
            prop_assert!(rel < 1e-8, "n={} rel={}", n, rel);
            prop_assert_eq!(d.sign as f64, det.signum());
        }
    }
}

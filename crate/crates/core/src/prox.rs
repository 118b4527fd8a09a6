//! Closed-form proximal maps used by the split Bregman sub-problems.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A nonnegative shrinkage threshold.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ShrinkParams {
    gamma: f64,
}

impl ShrinkParams {
    pub fn new(gamma: f64) -> Result<Self> {
        // also rejects NaN
        if gamma >= 0.0 && gamma.is_finite() {
            Ok(ShrinkParams { gamma })
        } else {
            Err(Error::param(alloc::format!(
                "shrink threshold must be finite and nonnegative, got {gamma}"
            )))
        }
    }

    pub fn gamma(self) -> f64 {
        self.gamma
    }
}

#[inline]
pub(crate) fn shrink_scalar(v: f64, gamma: f64) -> f64 {
    let mag = v.abs() - gamma;
    if mag > 0.0 {
        mag.copysign(v)
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn cut_scalar(v: f64, gamma: f64) -> f64 {
    v.clamp(-gamma, gamma)
}

/// Soft shrinkage `sign(v) * max(0, |v| - gamma)`, the minimizer of
/// `gamma |u|_1 + 1/2 |u - v|_2^2`.
pub fn shrink1(v: &[f64], gamma: f64) -> Result<Vec<f64>> {
    let gamma = ShrinkParams::new(gamma)?.gamma();
    Ok(v.iter().map(|&x| shrink_scalar(x, gamma)).collect())
}

/// `v - shrink1(v, gamma)`, i.e. `v` clamped to `[-gamma, gamma]`.
pub fn cut(v: &[f64], gamma: f64) -> Result<Vec<f64>> {
    let gamma = ShrinkParams::new(gamma)?.gamma();
    Ok(v.iter().map(|&x| cut_scalar(x, gamma)).collect())
}

/// Scale factor `max(0, s - gamma) / s` applied to a pair of magnitude `s`;
/// zero at the origin.
#[inline]
pub(crate) fn paired_scale(x: f64, y: f64, gamma: f64) -> f64 {
    let s = libm::hypot(x, y);
    if s > gamma {
        (s - gamma) / s
    } else {
        0.0
    }
}

/// Isotropic shrinkage of the pairs `(x_i, y_i)`: each pair keeps its
/// direction and loses `gamma` of its Euclidean length, stopping at zero.
pub fn shrink2_paired(x: &[f64], y: &[f64], gamma: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let gamma = ShrinkParams::new(gamma)?.gamma();
    Error::check_len(x.len(), y.len())?;
    Ok(x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let t = paired_scale(a, b, gamma);
            (a * t, b * t)
        })
        .unzip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecops::{dist2, norm_inf};
    use alloc::vec;
    use proptest::prelude::*;

    /// argmin of `gamma |u| + (u - v)^2 / 2` by scanning a grid.
    fn scan_1d(v: f64, gamma: f64, step: f64) -> f64 {
        let lo = v.min(0.0) - 1.0;
        let hi = v.max(0.0) + 1.0;
        let count = ((hi - lo) / step).ceil() as usize;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=count {
            let u = lo + k as f64 * step;
            let val = gamma * u.abs() + 0.5 * (u - v) * (u - v);
            if val < best.0 {
                best = (val, u);
            }
        }
        best.1
    }

    #[test]
    fn shrink1_examples() {
        assert_eq!(shrink1(&[3.0, -0.5, 1.0], 1.0).unwrap(), [2.0, 0.0, 0.0]);
        let v = [1.5, -2.0, 0.0, 1e-9];
        assert_eq!(shrink1(&v, 0.0).unwrap(), v);
        let got = shrink1(&[0.7], 0.2).unwrap()[0];
        assert!((got - 0.5).abs() < 1e-12);
        assert!((scan_1d(0.7, 0.2, 1e-4) - got).abs() <= 1e-4);
    }

    #[test]
    fn cut_examples() {
        assert_eq!(cut(&[3.0, -0.5, 1.0], 1.0).unwrap(), [1.0, -0.5, 1.0]);
        assert_eq!(cut(&[3.0, -0.5], 0.0).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn negative_threshold_rejected() {
        assert!(matches!(shrink1(&[1.0], -0.1), Err(Error::Parameter(_))));
        assert!(matches!(cut(&[1.0], -1.0), Err(Error::Parameter(_))));
        assert!(matches!(shrink2_paired(&[1.0], &[1.0], -1.0), Err(Error::Parameter(_))));
        assert!(shrink1(&[1.0], f64::NAN).is_err());
    }

    #[test]
    fn paired_examples() {
        assert_eq!(shrink2_paired(&[3.0], &[4.0], 5.0).unwrap(), (vec![0.0], vec![0.0]));
        let (a, b) = shrink2_paired(&[3.0], &[4.0], 2.5).unwrap();
        assert!((a[0] - 1.5).abs() < 1e-12 && (b[0] - 2.0).abs() < 1e-12);
        assert_eq!(shrink2_paired(&[0.0], &[0.0], 0.0).unwrap(), (vec![0.0], vec![0.0]));
        assert!(matches!(
            shrink2_paired(&[1.0, 2.0], &[1.0], 0.1),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn paired_matches_grid_scan() {
        let step = 1e-3;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=1000 {
            for j in 0..=1000 {
                let (a, b) = (i as f64 * step, j as f64 * step);
                let val = 0.3 * libm::hypot(a, b)
                    + 0.5 * ((a - 0.6) * (a - 0.6) + (b - 0.8) * (b - 0.8));
                if val < best.0 {
                    best = (val, a, b);
                }
            }
        }
        let (a, b) = shrink2_paired(&[0.6], &[0.8], 0.3).unwrap();
        assert!((a[0] - best.1).abs() <= 2.0 * step);
        assert!((b[0] - best.2).abs() <= 2.0 * step);
    }

    proptest! {
        #[test]
        fn shrink_plus_cut_recovers_input(v in prop::collection::vec(-1e4f64..1e4, 1..40), gamma in 0.0f64..100.0) {
            let s = shrink1(&v, gamma).unwrap();
            let c = cut(&v, gamma).unwrap();
            for ((a, b), x) in s.iter().zip(&c).zip(&v) {
                // exact whenever |x| <= 2 gamma, otherwise within one rounding of x
                prop_assert!((a + b - x).abs() <= f64::EPSILON * x.abs());
            }
            prop_assert!(norm_inf(&c) <= gamma);
        }

        #[test]
        fn shrink_is_nonexpansive(
            (a, b) in prop::collection::vec(-50.0f64..50.0, 20)
                .prop_flat_map(|a| (Just(a), prop::collection::vec(-50.0f64..50.0, 20))),
            gamma in 0.0f64..10.0,
        ) {
            let sa = shrink1(&a, gamma).unwrap();
            let sb = shrink1(&b, gamma).unwrap();
            prop_assert!(dist2(&sa, &sb) <= dist2(&a, &b) + 1e-12);
            for (s, x) in sa.iter().zip(&a) {
                prop_assert!(s.abs() <= x.abs());
            }
        }

        #[test]
        fn paired_magnitude_bound(x in prop::collection::vec(-50.0f64..50.0, 10), y in prop::collection::vec(-50.0f64..50.0, 10), gamma in 0.0f64..20.0) {
            let (sx, sy) = shrink2_paired(&x, &y, gamma).unwrap();
            for i in 0..10 {
                let s = libm::hypot(x[i], y[i]);
                prop_assert!(libm::hypot(sx[i], sy[i]) <= (s - gamma).max(0.0) + 1e-12);
            }
        }
    }

    #[test]
    fn shrink_matches_grid_scan_oracle() {
        let mut state = 0x2545f4914f6cdd1du64;
        let step = 1e-4;
        for gamma in [0.1, 1.0, 10.0] {
            for _ in 0..200 {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let v = ((state >> 11) as f64 / (1u64 << 53) as f64) * 40.0 - 20.0;
                let got = shrink1(&[v], gamma).unwrap()[0];
                assert!((got - scan_1d(v, gamma, step)).abs() <= 2.0 * step, "v={v} gamma={gamma}");
            }
        }
    }
}

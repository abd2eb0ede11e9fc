use rustfft::FftPlanner;

use super::{MixedMeasure, TrigPolyDensity, C64};

/// A norm value with an a-posteriori error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub error: f64,
}

impl NormEstimate {
    /// `value + error`, an upper bound whenever the estimate is reliable.
    pub fn upper(&self) -> f64 {
        self.value + self.error
    }
}

/// Mean of `|f|` over `m` equispaced points, using one inverse FFT.
fn sampled_mean_abs(f: &TrigPolyDensity, m: usize) -> f64 {
    let mut buf = vec![C64::new(0.0, 0.0); m];
    for (k, c) in f.coeffs() {
        buf[k.rem_euclid(m as i64) as usize] += *c;
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(m).process(&mut buf);
    buf.iter().map(|z| z.norm()).sum::<f64>() / m as f64
}

/// `(1/2π)∫|f|` by the periodic trapezoid rule on `max(4096, 64·deg)` points,
/// refined once on the doubled grid. The estimate is the refined value and
/// the gap between the two levels plus a round-off floor.
pub fn ac_l1_norm(f: &TrigPolyDensity) -> NormEstimate {
    if f.is_zero() {
        return NormEstimate {
            value: 0.0,
            error: 0.0,
        };
    }
    let m = (64 * f.degree() as usize).max(4096);
    let coarse = sampled_mean_abs(f, m);
    let fine = sampled_mean_abs(f, 2 * m);
    let scale: f64 = f.coeffs().values().map(|c| c.norm()).sum();
    let floor = 64.0 * f64::EPSILON * scale * ((2 * m) as f64).log2();
    NormEstimate {
        value: fine,
        error: (fine - coarse).abs() + floor,
    }
}

/// Total variation norm: atom moduli plus the L¹ norm of the density.
pub fn tv_norm(mu: &MixedMeasure) -> NormEstimate {
    let ac = ac_l1_norm(&mu.ac);
    NormEstimate {
        value: mu.disc.norm() + ac.value,
        error: ac.error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::GeneratorBasis;
    use crate::measure::make_theta0;
    use std::sync::Arc;

    #[test]
    fn theta0_norm_is_one() {
        let t0: MixedMeasure = make_theta0(Arc::new(GeneratorBasis::empty())).into();
        assert_eq!(
            tv_norm(&t0),
            NormEstimate {
                value: 1.0,
                error: 0.0
            }
        );
    }

    #[test]
    fn single_harmonic() {
        let f = TrigPolyDensity::from_coeffs([(1, C64::new(2.0, 0.0))]);
        let n = ac_l1_norm(&f);
        assert!((n.value - 2.0).abs() < 1e-12);
        assert!(n.error < 1e-10);
    }

    #[test]
    fn cosine_has_l1_norm_four_over_pi() {
        // f = 2cos t, (1/2π)∫|2cos t| = 4/π
        let f = TrigPolyDensity::from_coeffs([(1, C64::new(1.0, 0.0)), (-1, C64::new(1.0, 0.0))]);
        let n = ac_l1_norm(&f);
        assert!((n.value - 4.0 / std::f64::consts::PI).abs() <= n.error);
    }

    #[test]
    fn large_degree_grid() {
        let f = TrigPolyDensity::from_coeffs([(100, C64::new(0.0, 1.0))]);
        assert!((ac_l1_norm(&f).value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fine_grid_comparison_against_direct_sum() {
        let f = TrigPolyDensity::from_coeffs([
            (0, C64::new(0.3, 0.0)),
            (2, C64::new(-0.2, 0.5)),
            (-3, C64::new(0.1, 0.1)),
        ]);
        let m = 1000;
        let direct: f64 = (0..m)
            .map(|j| f.eval(std::f64::consts::TAU * j as f64 / m as f64).norm())
            .sum::<f64>()
            / m as f64;
        assert!((sampled_mean_abs(&f, m) - direct).abs() < 1e-12);
    }
}

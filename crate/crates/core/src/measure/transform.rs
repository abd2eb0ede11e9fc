//! Fourier–Stieltjes coefficients `μ̂(n) = Σ w_j e^{−inθ_j} + c_n`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use super::{MixedMeasure, C64};
use crate::angle::{turns_to_f64, Angle, GeneratorBasis};

/// Torsion part of a position, kept as an exact fraction when it fits.
#[derive(Clone, Copy, Debug)]
enum Torsion {
    Exact { num: u64, den: u64 },
    Approx(f64),
}

/// `e^{−2πi·r}` for `r = num/den`, exact at quarter turns.
pub(crate) fn root_of_unity(num: u64, den: u64) -> C64 {
    let r = num % den;
    if (4 * r as u128).is_multiple_of(den as u128) {
        return match (4 * r as u128 / den as u128) % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, -1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, 1.0),
        };
    }
    let (s, c) = (-TAU * (r as f64 / den as f64)).sin_cos();
    C64::new(c, s)
}

/// `e^{−2πi n·r}` for the torsion part `r`.
fn torsion_character(torsion: Torsion, n: i64) -> C64 {
    match torsion {
        Torsion::Exact { num, den } => {
            let nm = (n as i128).rem_euclid(den as i128) as u128;
            let r = (nm * num as u128 % den as u128) as u64;
            root_of_unity(r, den)
        }
        Torsion::Approx(x) => {
            let (s, c) = (-TAU * (n as f64 * x).rem_euclid(1.0)).sin_cos();
            C64::new(c, s)
        }
    }
}

#[derive(Clone, Debug)]
struct CompiledPosition {
    torsion: Torsion,
    free: Option<f64>,
}

impl CompiledPosition {
    fn new(angle: &Angle, basis: &GeneratorBasis) -> Self {
        let torsion = match angle.turns_u64() {
            Some((num, den)) if den < (1 << 62) => Torsion::Exact { num, den },
            _ => Torsion::Approx(turns_to_f64(angle.turns())),
        };
        let free = if angle.is_torsion() {
            None
        } else {
            Some(
                angle
                    .coeffs()
                    .iter()
                    .zip(basis.generators())
                    .map(|(c, g)| *c as f64 * g.value)
                    .sum(),
            )
        };
        Self { torsion, free }
    }

    /// `e^{−inθ}`.
    fn character(&self, n: i64) -> C64 {
        let t = torsion_character(self.torsion, n);
        match self.free {
            None => t,
            Some(f) => {
                let (s, c) = (-(n as f64) * f).sin_cos();
                t * C64::new(c, s)
            }
        }
    }
}

/// `e^{−inθ}` for a single position.
pub fn character(angle: &Angle, basis: &GeneratorBasis, n: i64) -> C64 {
    CompiledPosition::new(angle, basis).character(n)
}

/// Atoms sharing one free part: its frequency, if any, and the torsion terms.
type FreeGroup = (Option<f64>, Vec<(Torsion, C64)>);

/// Precompiled measure for repeated coefficient evaluation.
///
/// Atoms sharing a free part are grouped and their torsion contributions
/// summed before the common free character is applied. Cancellations such
/// as `θ̂₁(2n) = 0` then come out as exact zeros.
#[derive(Clone, Debug)]
pub struct TransformEvaluator {
    groups: Vec<FreeGroup>,
    ac: BTreeMap<i64, C64>,
}

impl TransformEvaluator {
    pub fn new(mu: &MixedMeasure) -> Self {
        let basis = mu.basis();
        let mut by_free: BTreeMap<&[i64], FreeGroup> = BTreeMap::new();
        for (a, w) in mu.disc.atoms() {
            let pos = CompiledPosition::new(a, basis);
            by_free
                .entry(a.coeffs())
                .or_insert_with(|| (pos.free, Vec::new()))
                .1
                .push((pos.torsion, *w));
        }
        Self {
            groups: by_free.into_values().collect(),
            ac: mu.ac.coeffs().clone(),
        }
    }

    pub fn coefficient(&self, n: i64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (free, atoms) in &self.groups {
            let mut t = C64::new(0.0, 0.0);
            for (torsion, w) in atoms {
                t += *w * torsion_character(*torsion, n);
            }
            acc += match free {
                None => t,
                Some(f) => {
                    let (s, c) = (-(n as f64) * f).sin_cos();
                    t * C64::new(c, s)
                }
            };
        }
        if let Some(c) = self.ac.get(&n) {
            acc += *c;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::Generator;
    use crate::measure::{make_theta0, DiscreteMeasure, TrigPolyDensity};
    use std::sync::Arc;

    #[test]
    fn dirac_at_generator() {
        let b = Arc::new(GeneratorBasis::new(vec![Generator::new("alpha", 2f64.sqrt())]).unwrap());
        let mu: MixedMeasure =
            DiscreteMeasure::dirac(b, Angle::generator(0, 1), C64::new(1.0, 0.0))
                .unwrap()
                .into();
        for n in [-7i64, -1, 0, 1, 5, 1000] {
            let want = C64::from_polar(1.0, -(n as f64) * 2f64.sqrt());
            assert!((mu.fourier_coefficient(n) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn theta0_is_exact_parity_indicator() {
        let mu: MixedMeasure = make_theta0(Arc::new(GeneratorBasis::empty())).into();
        for n in -20..=20 {
            let want = if n % 2 == 0 { 1.0 } else { 0.0 };
            assert_eq!(mu.fourier_coefficient(n), C64::new(want, 0.0));
        }
    }

    #[test]
    fn ac_coefficients_pass_through() {
        let ac = TrigPolyDensity::from_coeffs([(3, C64::new(0.2, -0.4)), (-1, C64::new(1.0, 0.0))]);
        let mu = MixedMeasure::absolutely_continuous(Arc::new(GeneratorBasis::empty()), ac);
        assert_eq!(mu.fourier_coefficient(3), C64::new(0.2, -0.4));
        assert_eq!(mu.fourier_coefficient(-1), C64::new(1.0, 0.0));
        assert_eq!(mu.fourier_coefficient(2), C64::new(0.0, 0.0));
    }

    #[test]
    fn torsion_roots_match_float_evaluation() {
        let a = Angle::from_turns(2, 7, 0);
        let basis = GeneratorBasis::empty();
        for n in -30..30 {
            let want = C64::from_polar(1.0, -(n as f64) * TAU * 2.0 / 7.0);
            assert!((character(&a, &basis, n) - want).norm() < 1e-12);
        }
    }
}

//! Seeded random measures for property tests and the verification suite.

use std::sync::Arc;

use rand::Rng;

use crate::angle::{Angle, Generator, GeneratorBasis};
use crate::measure::{DiscreteMeasure, MixedMeasure, TrigPolyDensity, C64};

/// Generators for random measures. None of them is on the fresh list, so a
/// decomposition can always add √2 and √3.
pub const RANDOM_GENERATORS: [(&str, f64); 4] = [
    ("euler", 0.5772156649015329),
    ("apery", 1.2020569031595942),
    ("catalan", 0.915965594177219),
    ("e", std::f64::consts::E),
];

const DENOMINATORS: [i64; 5] = [1, 2, 3, 4, 6];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomMeasureSpec {
    pub generators: usize,
    pub max_atoms: usize,
    /// Largest `|k|` of the density; `None` gives a purely discrete measure.
    pub max_degree: Option<i64>,
    /// Generator coefficients are drawn from `-max_coeff..=max_coeff`.
    pub max_coeff: i64,
}

impl Default for RandomMeasureSpec {
    fn default() -> Self {
        Self {
            generators: 2,
            max_atoms: 5,
            max_degree: Some(4),
            max_coeff: 2,
        }
    }
}

impl RandomMeasureSpec {
    pub fn discrete(generators: usize) -> Self {
        Self {
            generators,
            max_degree: None,
            ..Self::default()
        }
    }
}

pub fn random_basis(generators: usize) -> Arc<GeneratorBasis> {
    assert!(
        generators <= RANDOM_GENERATORS.len(),
        "at most four random generators"
    );
    Arc::new(
        GeneratorBasis::new(
            RANDOM_GENERATORS[..generators]
                .iter()
                .map(|(n, v)| Generator::new(*n, *v))
                .collect(),
        )
        .expect("fixed generator values are valid"),
    )
}

/// Weight with real and imaginary parts uniform in `[-1, 1]`.
pub fn unit_box<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
}

pub fn random_angle<R: Rng>(rng: &mut R, dim: usize, max_coeff: i64) -> Angle {
    let den = DENOMINATORS[rng.random_range(0..DENOMINATORS.len())];
    let num = rng.random_range(0..den);
    let mut a = Angle::from_turns(num, den, dim);
    for i in 0..dim {
        let c = rng.random_range(-max_coeff..=max_coeff);
        a = a
            .add(
                &Angle::generator(i, dim)
                    .scale(c)
                    .expect("small coefficient"),
            )
            .expect("same dimension");
    }
    a
}

/// One to `max_atoms` atoms, positions with turn denominators in
/// {1, 2, 3, 4, 6}, weights in the unit box.
pub fn random_discrete<R: Rng>(rng: &mut R, spec: &RandomMeasureSpec) -> DiscreteMeasure {
    let basis = random_basis(spec.generators);
    let dim = basis.len();
    let count = rng.random_range(1..=spec.max_atoms.max(1));
    let atoms: Vec<(Angle, C64)> = (0..count)
        .map(|_| (random_angle(rng, dim, spec.max_coeff), unit_box(rng)))
        .collect();
    DiscreteMeasure::from_atoms(basis, atoms).expect("angles match the basis")
}

pub fn random_density<R: Rng>(rng: &mut R, max_degree: i64) -> TrigPolyDensity {
    let mut coeffs = Vec::new();
    for k in -max_degree..=max_degree {
        if rng.random_bool(0.5) {
            coeffs.push((k, unit_box(rng)));
        }
    }
    TrigPolyDensity::from_coeffs(coeffs)
}

pub fn random_mixed<R: Rng>(rng: &mut R, spec: &RandomMeasureSpec) -> MixedMeasure {
    let disc = random_discrete(rng, spec);
    let ac = match spec.max_degree {
        Some(d) => random_density(rng, d),
        None => TrigPolyDensity::zero(),
    };
    MixedMeasure::new(disc, ac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeded_generation_is_reproducible() {
        let spec = RandomMeasureSpec::default();
        let a: Vec<_> = {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            (0..5).map(|_| random_mixed(&mut rng, &spec)).collect()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for m in &a {
            assert_eq!(*m, random_mixed(&mut rng, &spec));
        }
    }

    #[test]
    fn respects_the_spec() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let m = random_mixed(&mut rng, &RandomMeasureSpec::default());
            assert!(m.disc.len() <= 5);
            assert!(m.ac.degree() <= 4);
            for w in m.disc.atoms().values() {
                assert!(w.re.abs() <= 1.0 && w.im.abs() <= 1.0);
            }
            let d = random_discrete(&mut rng, &RandomMeasureSpec::discrete(1));
            assert!(d.used_generators().len() <= 1);
        }
    }
}

//! Finite measures on the circle: discrete parts with exact atom positions
//! and absolutely continuous parts given by trigonometric polynomials.

pub(crate) mod convolve;
mod norm;
pub(crate) mod transform;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::angle::{Angle, GeneratorBasis};
use crate::error::{Error, Result};

pub use convolve::{convolve, convolve_power, ConvolveOptions, PowerBudget};
pub use norm::{ac_l1_norm, tv_norm, NormEstimate};
pub use transform::{character, TransformEvaluator};

pub type C64 = Complex64;

pub(crate) fn dropped(w: C64, tol: f64) -> bool {
    w.norm() <= tol
}

pub(crate) fn same_basis(a: &Arc<GeneratorBasis>, b: &Arc<GeneratorBasis>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Finitely supported atomic measure `Σ w_j δ_{θ_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    basis: Arc<GeneratorBasis>,
    atoms: BTreeMap<Angle, C64>,
}

impl DiscreteMeasure {
    pub fn zero(basis: Arc<GeneratorBasis>) -> Self {
        Self {
            basis,
            atoms: BTreeMap::new(),
        }
    }

    /// Builds a measure from (position, weight) pairs; coinciding positions
    /// are merged and exact zeros dropped.
    pub fn from_atoms(
        basis: Arc<GeneratorBasis>,
        atoms: impl IntoIterator<Item = (Angle, C64)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<Angle, C64> = BTreeMap::new();
        for (angle, w) in atoms {
            if angle.dim() != basis.len() {
                return Err(Error::BasisMismatch);
            }
            *map.entry(angle).or_insert(C64::new(0.0, 0.0)) += w;
        }
        map.retain(|_, w| !dropped(*w, 0.0));
        Ok(Self { basis, atoms: map })
    }

    pub fn dirac(basis: Arc<GeneratorBasis>, angle: Angle, weight: C64) -> Result<Self> {
        Self::from_atoms(basis, [(angle, weight)])
    }

    pub(crate) fn from_map_unchecked(
        basis: Arc<GeneratorBasis>,
        atoms: BTreeMap<Angle, C64>,
    ) -> Self {
        Self { basis, atoms }
    }

    pub fn basis(&self) -> &Arc<GeneratorBasis> {
        &self.basis
    }

    pub fn atoms(&self) -> &BTreeMap<Angle, C64> {
        &self.atoms
    }

    pub fn weight(&self, angle: &Angle) -> C64 {
        self.atoms.get(angle).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.atoms.values().map(|w| w.norm()).sum()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !same_basis(&self.basis, &other.basis) {
            return Err(Error::BasisMismatch);
        }
        let mut atoms = self.atoms.clone();
        for (a, w) in &other.atoms {
            *atoms.entry(a.clone()).or_insert(C64::new(0.0, 0.0)) += *w;
        }
        atoms.retain(|_, w| !dropped(*w, 0.0));
        Ok(Self {
            basis: self.basis.clone(),
            atoms,
        })
    }

    pub fn neg(&self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut atoms = BTreeMap::new();
        for (a, w) in &self.atoms {
            let v = *w * c;
            if !dropped(v, 0.0) {
                atoms.insert(a.clone(), v);
            }
        }
        Self {
            basis: self.basis.clone(),
            atoms,
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        let mut atoms = BTreeMap::new();
        for (a, w) in &self.atoms {
            let v = *w * c;
            if !dropped(v, 0.0) {
                atoms.insert(a.clone(), v);
            }
        }
        Self {
            basis: self.basis.clone(),
            atoms,
        }
    }

    /// Re-expresses the measure over `basis`, which must extend the current one.
    pub fn rebase(&self, basis: Arc<GeneratorBasis>) -> Result<Self> {
        if !basis.extends(&self.basis) {
            return Err(Error::BasisMismatch);
        }
        let dim = basis.len();
        let atoms = self
            .atoms
            .iter()
            .map(|(a, w)| (a.extend(dim), *w))
            .collect();
        Ok(Self { basis, atoms })
    }

    /// Indices of generators that appear with a nonzero coefficient in some atom.
    pub fn used_generators(&self) -> Vec<usize> {
        (0..self.basis.len())
            .filter(|&i| self.atoms.keys().any(|a| a.coeffs()[i] != 0))
            .collect()
    }
}

/// Density `f(t) = Σ_k c_k e^{ikt}` with respect to `dt/2π`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrigPolyDensity {
    coeffs: BTreeMap<i64, C64>,
}

impl TrigPolyDensity {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_coeffs(coeffs: impl IntoIterator<Item = (i64, C64)>) -> Self {
        let mut map: BTreeMap<i64, C64> = BTreeMap::new();
        for (k, c) in coeffs {
            *map.entry(k).or_insert(C64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c| !dropped(*c, 0.0));
        Self { coeffs: map }
    }

    pub(crate) fn from_map_unchecked(coeffs: BTreeMap<i64, C64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, C64> {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> C64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> u64 {
        self.coeffs
            .keys()
            .map(|k| k.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.coeffs
            .iter()
            .map(|(k, c)| *c * C64::from_polar(1.0, *k as f64 * t))
            .sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            *coeffs.entry(*k).or_insert(C64::new(0.0, 0.0)) += *c;
        }
        coeffs.retain(|_, c| !dropped(*c, 0.0));
        Self { coeffs }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_map_unchecked(
            self.coeffs
                .iter()
                .map(|(k, c)| (*k, *c * s))
                .filter(|(_, c)| !dropped(*c, 0.0))
                .collect(),
        )
    }
}

/// A discrete part plus an absolutely continuous part over one basis.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedMeasure {
    pub disc: DiscreteMeasure,
    pub ac: TrigPolyDensity,
}

impl From<DiscreteMeasure> for MixedMeasure {
    fn from(disc: DiscreteMeasure) -> Self {
        Self {
            disc,
            ac: TrigPolyDensity::zero(),
        }
    }
}

impl MixedMeasure {
    pub fn new(disc: DiscreteMeasure, ac: TrigPolyDensity) -> Self {
        Self { disc, ac }
    }

    pub fn zero(basis: Arc<GeneratorBasis>) -> Self {
        DiscreteMeasure::zero(basis).into()
    }

    pub fn absolutely_continuous(basis: Arc<GeneratorBasis>, ac: TrigPolyDensity) -> Self {
        Self {
            disc: DiscreteMeasure::zero(basis),
            ac,
        }
    }

    pub fn basis(&self) -> &Arc<GeneratorBasis> {
        self.disc.basis()
    }

    pub fn is_zero(&self) -> bool {
        self.disc.is_zero() && self.ac.is_zero()
    }

    pub fn is_discrete(&self) -> bool {
        self.ac.is_zero()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            disc: self.disc.add(&other.disc)?,
            ac: self.ac.add(&other.ac),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            disc: self.disc.scale(c),
            ac: self.ac.scale(c),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn rebase(&self, basis: Arc<GeneratorBasis>) -> Result<Self> {
        Ok(Self {
            disc: self.disc.rebase(basis)?,
            ac: self.ac.clone(),
        })
    }

    pub fn convolve(&self, other: &Self) -> Result<Self> {
        convolve(self, other, &ConvolveOptions::default())
    }

    pub fn fourier_coefficient(&self, n: i64) -> C64 {
        TransformEvaluator::new(self).coefficient(n)
    }

    pub fn tv_norm(&self) -> NormEstimate {
        tv_norm(self)
    }
}

/// θ₀ = (δ₀ + δ_π)/2.
pub fn make_theta0(basis: Arc<GeneratorBasis>) -> DiscreteMeasure {
    let dim = basis.len();
    DiscreteMeasure::from_atoms(
        basis,
        [
            (Angle::zero(dim), C64::new(0.5, 0.0)),
            (Angle::half_turn(dim), C64::new(0.5, 0.0)),
        ],
    )
    .expect("angles built over the basis dimension")
}

/// θ₁ = (δ₀ − δ_π)/2.
pub fn make_theta1(basis: Arc<GeneratorBasis>) -> DiscreteMeasure {
    let dim = basis.len();
    DiscreteMeasure::from_atoms(
        basis,
        [
            (Angle::zero(dim), C64::new(0.5, 0.0)),
            (Angle::half_turn(dim), C64::new(-0.5, 0.0)),
        ],
    )
    .expect("angles built over the basis dimension")
}

/// ρ = (δ_α + δ_β)/2.
pub fn make_rho(
    basis: Arc<GeneratorBasis>,
    alpha: &Angle,
    beta: &Angle,
) -> Result<DiscreteMeasure> {
    if alpha == beta {
        return Err(Error::InvalidArgument(
            "ρ needs two distinct positions".into(),
        ));
    }
    DiscreteMeasure::from_atoms(
        basis,
        [
            (alpha.clone(), C64::new(0.5, 0.0)),
            (beta.clone(), C64::new(0.5, 0.0)),
        ],
    )
}

/// `(μ∗θ₀, μ∗θ₁)`: the parts of μ carrying its even and odd Fourier–Stieltjes
/// coefficients.
pub fn parity_projections(mu: &MixedMeasure) -> Result<(MixedMeasure, MixedMeasure)> {
    let basis = mu.basis().clone();
    let even = mu.convolve(&make_theta0(basis.clone()).into())?;
    let odd = mu.convolve(&make_theta1(basis).into())?;
    Ok((even, odd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::Generator;

    fn basis() -> Arc<GeneratorBasis> {
        Arc::new(
            GeneratorBasis::new(vec![
                Generator::new("alpha", 2f64.sqrt()),
                Generator::new("beta", 3f64.sqrt()),
                Generator::new("gamma", 0.5772156649015329),
            ])
            .unwrap(),
        )
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn thetas() {
        let b = basis();
        let t0 = make_theta0(b.clone());
        let t1 = make_theta1(b.clone());
        assert_eq!(t0.weight(&Angle::zero(3)), c(0.5));
        assert_eq!(t0.weight(&Angle::half_turn(3)), c(0.5));
        assert_eq!(t1.weight(&Angle::half_turn(3)), c(-0.5));
        assert_eq!(t0.norm(), 1.0);
        assert_eq!(t1.norm(), 1.0);
    }

    #[test]
    fn theta_algebra_is_exact() {
        let b = basis();
        let t0: MixedMeasure = make_theta0(b.clone()).into();
        let t1: MixedMeasure = make_theta1(b.clone()).into();
        assert!(t0.convolve(&t1).unwrap().is_zero());
        assert_eq!(t0.convolve(&t0).unwrap(), t0);
        assert_eq!(t1.convolve(&t1).unwrap(), t1);
        let delta0 = DiscreteMeasure::dirac(b, Angle::zero(3), c(1.0)).unwrap();
        assert_eq!(t0.add(&t1).unwrap(), delta0.into());
    }

    #[test]
    fn rho_basics() {
        let b = basis();
        let rho = make_rho(b.clone(), &Angle::generator(0, 3), &Angle::generator(1, 3)).unwrap();
        assert_eq!(rho.len(), 2);
        assert_eq!(rho.norm(), 1.0);
        let m: MixedMeasure = rho.into();
        assert_eq!(m.fourier_coefficient(0), c(1.0));
        assert!(make_rho(b, &Angle::generator(0, 3), &Angle::generator(0, 3)).is_err());
    }

    #[test]
    fn rho_times_theta1_by_hand() {
        let b = basis();
        let a = Angle::generator(0, 3);
        let be = Angle::generator(1, 3);
        let pi = Angle::half_turn(3);
        let rho: MixedMeasure = make_rho(b.clone(), &a, &be).unwrap().into();
        let got = rho.convolve(&make_theta1(b.clone()).into()).unwrap();
        let want = DiscreteMeasure::from_atoms(
            b,
            [
                (a.clone(), c(0.25)),
                (a.add(&pi).unwrap(), c(-0.25)),
                (be.clone(), c(0.25)),
                (be.add(&pi).unwrap(), c(-0.25)),
            ],
        )
        .unwrap();
        assert_eq!(got, want.into());
        assert_eq!(got.tv_norm().value, 1.0);
    }

    #[test]
    fn dirac_convolution_adds_positions() {
        let b = basis();
        let da: MixedMeasure = DiscreteMeasure::dirac(b.clone(), Angle::generator(0, 3), c(1.0))
            .unwrap()
            .into();
        let db: MixedMeasure = DiscreteMeasure::dirac(b.clone(), Angle::generator(1, 3), c(1.0))
            .unwrap()
            .into();
        let ab = Angle::generator(0, 3).add(&Angle::generator(1, 3)).unwrap();
        assert_eq!(
            da.convolve(&db).unwrap(),
            DiscreteMeasure::dirac(b, ab, c(1.0)).unwrap().into()
        );
    }

    #[test]
    fn parity_of_a_single_atom() {
        let b = basis();
        let g = Angle::generator(2, 3);
        let gp = g.add(&Angle::half_turn(3)).unwrap();
        let mu: MixedMeasure = DiscreteMeasure::dirac(b.clone(), g.clone(), c(1.0))
            .unwrap()
            .into();
        let (even, odd) = parity_projections(&mu).unwrap();
        let want_even =
            DiscreteMeasure::from_atoms(b.clone(), [(g.clone(), c(0.5)), (gp.clone(), c(0.5))])
                .unwrap();
        let want_odd =
            DiscreteMeasure::from_atoms(b.clone(), [(g, c(0.5)), (gp, c(-0.5))]).unwrap();
        assert_eq!(even, want_even.into());
        assert_eq!(odd, want_odd.into());
        assert_eq!(even.add(&odd).unwrap(), mu);

        let t0: MixedMeasure = make_theta0(b.clone()).into();
        let (e, o) = parity_projections(&t0).unwrap();
        assert_eq!(e, t0);
        assert!(o.is_zero());
    }

    #[test]
    fn parity_of_ac_part_is_exact() {
        let b = basis();
        let ac = TrigPolyDensity::from_coeffs([
            (1, C64::new(0.3, 0.1)),
            (2, c(-0.7)),
            (-3, C64::new(0.0, 0.9)),
        ]);
        let mu = MixedMeasure::absolutely_continuous(b, ac.clone());
        let (even, odd) = parity_projections(&mu).unwrap();
        assert_eq!(
            even.ac.coeffs().keys().copied().collect::<Vec<_>>(),
            vec![2]
        );
        assert_eq!(
            odd.ac.coeffs().keys().copied().collect::<Vec<_>>(),
            vec![-3, 1]
        );
        assert_eq!(even.add(&odd).unwrap(), mu);
    }

    #[test]
    fn rebase_requires_extension() {
        let b = basis();
        let small = Arc::new(GeneratorBasis::new(vec![Generator::new("x", 1.0)]).unwrap());
        let m = DiscreteMeasure::dirac(small, Angle::generator(0, 1), c(1.0)).unwrap();
        assert!(m.rebase(b).is_err());
    }

    #[test]
    fn mismatched_bases_are_rejected() {
        let m1 = MixedMeasure::zero(basis());
        let m2 = MixedMeasure::zero(Arc::new(GeneratorBasis::empty()));
        assert!(matches!(m1.add(&m2), Err(Error::BasisMismatch)));
        assert!(matches!(m1.convolve(&m2), Err(Error::BasisMismatch)));
    }
}

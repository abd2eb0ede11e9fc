//! Exact positions on the circle.
//!
//! An [`Angle`] is `2π·turns + Σ coeffs[i]·γ_i` where `turns` is an exact
//! rational reduced into `[0, 1)` and the `γ_i` are the generators of a
//! [`GeneratorBasis`]. The generators, together with π, are *declared*
//! rationally independent: their `f64` values are only representatives used
//! for numerical evaluation, and equality of angles is decided symbolically.

use std::f64::consts::TAU;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Fixed list of generator values handed out by
/// [`GeneratorBasis::with_fresh_generators`], in order.
pub const FRESH_GENERATORS: [(&str, f64); 10] = [
    ("sqrt2", std::f64::consts::SQRT_2),
    ("sqrt3", 1.7320508075688772),
    ("sqrt5", 2.23606797749979),
    ("sqrt7", 2.6457513110645907),
    ("ln2", std::f64::consts::LN_2),
    ("ln3", 1.0986122886681098),
    ("ln5", 1.6094379124341003),
    ("ln7", 1.9459101490553132),
    ("sqrt11", 3.3166247903554),
    ("sqrt13", 3.605551275463989),
];

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub name: String,
    pub value: f64,
}

impl Generator {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
        }
    }
}

/// Ordered list of named generators. π is implicit.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GeneratorBasis {
    generators: Vec<Generator>,
}

impl GeneratorBasis {
    pub fn new(generators: Vec<Generator>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if g.name.is_empty() {
                return Err(Error::InvalidBasis("empty generator name".into()));
            }
            if !(g.value > 0.0 && g.value < TAU) {
                return Err(Error::InvalidBasis(format!(
                    "generator {} = {} is not inside (0, 2π)",
                    g.name, g.value
                )));
            }
            if generators[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::InvalidBasis(format!(
                    "duplicate generator name {}",
                    g.name
                )));
            }
        }
        Ok(Self { generators })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn value(&self, i: usize) -> f64 {
        self.generators[i].value
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    /// True when `prefix` is a leading segment of this basis, so angles over
    /// `prefix` embed by zero-padding.
    pub fn extends(&self, prefix: &GeneratorBasis) -> bool {
        prefix.len() <= self.len() && self.generators[..prefix.len()] == prefix.generators[..]
    }

    /// Appends `count` generators from [`FRESH_GENERATORS`], skipping entries
    /// whose name or value is already present. Returns the extended basis and
    /// the indices of the new generators.
    pub fn with_fresh_generators(&self, count: usize) -> Result<(Self, Vec<usize>)> {
        self.with_fresh_generators_from(0, count)
    }

    /// As [`with_fresh_generators`](Self::with_fresh_generators), starting at
    /// entry `start` of the list.
    pub fn with_fresh_generators_from(
        &self,
        start: usize,
        count: usize,
    ) -> Result<(Self, Vec<usize>)> {
        if count == 0 {
            return Err(Error::InvalidArgument(
                "fresh generator count must be at least 1".into(),
            ));
        }
        let mut generators = self.generators.clone();
        let mut added = Vec::with_capacity(count);
        for (name, value) in FRESH_GENERATORS.into_iter().skip(start) {
            if added.len() == count {
                break;
            }
            if generators
                .iter()
                .any(|g| g.name == name || g.value == value)
            {
                continue;
            }
            added.push(generators.len());
            generators.push(Generator::new(name, value));
        }
        if added.len() < count {
            return Err(Error::GeneratorsExhausted {
                available: FRESH_GENERATORS.len(),
            });
        }
        Ok((Self { generators }, added))
    }
}

/// Exact position on the circle.
///
/// Ordering is lexicographic on `(turns, coeffs)`; it carries no geometric
/// meaning but gives every collection of angles a canonical order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Angle {
    turns: BigRational,
    coeffs: Vec<i64>,
}

fn reduce_turns(r: BigRational) -> BigRational {
    let fl = r.floor();
    r - fl
}

impl Angle {
    pub fn new(turns: BigRational, coeffs: Vec<i64>) -> Self {
        Self {
            turns: reduce_turns(turns),
            coeffs,
        }
    }

    /// `num/den` turns for `0 ≤ num < den`, reduced with machine gcd.
    pub(crate) fn from_fraction_below_one(num: u64, den: u64, coeffs: Vec<i64>) -> Self {
        debug_assert!(num < den);
        let g = num.gcd(&den);
        Self {
            turns: BigRational::new_raw(BigInt::from(num / g), BigInt::from(den / g)),
            coeffs,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            turns: BigRational::zero(),
            coeffs: vec![0; dim],
        }
    }

    /// The angle π.
    pub fn half_turn(dim: usize) -> Self {
        Self::from_turns(1, 2, dim)
    }

    /// `2π·num/den` with no generator part.
    pub fn from_turns(num: i64, den: i64, dim: usize) -> Self {
        Self::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            vec![0; dim],
        )
    }

    /// The `i`-th generator of a basis of size `dim`.
    pub fn generator(i: usize, dim: usize) -> Self {
        let mut coeffs = vec![0; dim];
        coeffs[i] = 1;
        Self {
            turns: BigRational::zero(),
            coeffs,
        }
    }

    pub fn turns(&self) -> &BigRational {
        &self.turns
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.turns.is_zero() && self.coeffs.iter().all(|&c| c == 0)
    }

    /// True when the angle is a rational multiple of 2π.
    pub fn is_torsion(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Angle) -> Result<Angle> {
        if self.dim() != other.dim() {
            return Err(Error::BasisMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.checked_add(*b).ok_or(Error::CoefficientOverflow))
            .collect::<Result<Vec<_>>>()?;
        Ok(Angle::new(&self.turns + &other.turns, coeffs))
    }

    pub fn neg(&self) -> Angle {
        self.scale(-1)
            .expect("negation of i64 coefficients built by checked arithmetic")
    }

    /// `n·a`: turns reduced mod 1, generator coefficients multiplied.
    pub fn scale(&self, n: i64) -> Result<Angle> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.checked_mul(n).ok_or(Error::CoefficientOverflow))
            .collect::<Result<Vec<_>>>()?;
        Ok(Angle::new(&self.turns * BigInt::from(n), coeffs))
    }

    /// Numerical value in `[0, 2π)`.
    pub fn to_radians(&self, basis: &GeneratorBasis) -> f64 {
        let mut x = turns_to_f64(&self.turns) * TAU;
        for (c, g) in self.coeffs.iter().zip(basis.generators()) {
            x += *c as f64 * g.value;
        }
        let r = x.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative x
        if r >= TAU {
            0.0
        } else {
            r
        }
    }

    /// Same angle over a basis with `dim - self.dim()` extra trailing generators.
    pub fn extend(&self, dim: usize) -> Angle {
        assert!(dim >= self.dim(), "cannot shrink an angle's basis");
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(dim, 0);
        Angle {
            turns: self.turns.clone(),
            coeffs,
        }
    }

    /// Turns as a `(numerator, denominator)` pair of machine integers, when
    /// they fit.
    pub fn turns_u64(&self) -> Option<(u64, u64)> {
        Some((self.turns.numer().to_u64()?, self.turns.denom().to_u64()?))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}·2π", self.turns.numer(), self.turns.denom())?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != 0 {
                write!(f, " {:+}·g{}", c, i)?;
            }
        }
        Ok(())
    }
}

pub(crate) fn turns_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_i64(), r.denom().to_i64()) {
        (Some(n), Some(d)) => n as f64 / d as f64,
        _ => r.to_f64().unwrap_or(0.0),
    }
}

/// Parses `"p/q"` or `"p"` into a rational.
pub fn parse_turns(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad turns numerator in {s:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad turns denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

pub fn format_turns(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Least common multiple of the turn denominators of `angles` (1 if empty).
pub fn common_denominator<'a>(angles: impl IntoIterator<Item = &'a Angle>) -> BigInt {
    angles
        .into_iter()
        .fold(BigInt::one(), |acc, a| acc.lcm(a.turns.denom()))
}

/// `turns · den` as an integer; `den` must be a multiple of the denominator.
pub(crate) fn turns_numerator_over(a: &Angle, den: &BigInt) -> BigInt {
    let scaled = &a.turns * BigRational::from_integer(den.clone());
    debug_assert!(scaled.is_integer());
    let n = scaled.to_integer();
    debug_assert!(!n.is_negative());
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis2() -> GeneratorBasis {
        GeneratorBasis::new(vec![
            Generator::new("alpha", 2f64.sqrt()),
            Generator::new("beta", 3f64.sqrt()),
        ])
        .unwrap()
    }

    #[test]
    fn add_examples() {
        let pi = Angle::half_turn(2);
        assert_eq!(pi.add(&pi).unwrap(), Angle::zero(2));
        let a = Angle::generator(0, 2);
        let b = Angle::generator(1, 2);
        let ab = a.add(&b).unwrap();
        assert!(ab.turns().is_zero());
        assert_eq!(ab.coeffs(), &[1, 1]);
        let pa = pi.add(&a).unwrap();
        assert_eq!(pa.turns(), Angle::half_turn(2).turns());
        assert_eq!(pa.coeffs(), &[1, 0]);
    }

    #[test]
    fn add_rejects_mismatched_bases() {
        assert!(matches!(
            Angle::zero(1).add(&Angle::zero(2)),
            Err(Error::BasisMismatch)
        ));
    }

    #[test]
    fn scale_examples() {
        let pi = Angle::half_turn(2);
        assert!(pi.scale(2).unwrap().is_zero());
        assert_eq!(Angle::generator(0, 2).scale(2).unwrap().coeffs(), &[2, 0]);
        assert_eq!(pi.scale(-1).unwrap(), pi);
    }

    #[test]
    fn scale_overflow_is_an_error() {
        let a = Angle::new(BigRational::zero(), vec![i64::MAX / 2 + 1]);
        assert!(matches!(a.scale(2), Err(Error::CoefficientOverflow)));
    }

    #[test]
    fn radians_examples() {
        let basis = basis2();
        assert_eq!(Angle::half_turn(2).to_radians(&basis), std::f64::consts::PI);
        assert_eq!(
            Angle::generator(0, 2).to_radians(&basis),
            std::f64::consts::SQRT_2
        );
        let x = Angle::half_turn(2).add(&Angle::generator(0, 2)).unwrap();
        assert_eq!(x.to_radians(&basis), 4.555806215962888);
    }

    #[test]
    fn negative_turns_are_canonicalized() {
        let a = Angle::from_turns(-1, 2, 0);
        assert_eq!(a, Angle::half_turn(0));
        let b = Angle::from_turns(7, 3, 0);
        assert_eq!(b, Angle::from_turns(1, 3, 0));
    }

    #[test]
    fn fresh_generators() {
        let (b, idx) = GeneratorBasis::empty().with_fresh_generators(2).unwrap();
        assert_eq!(idx, vec![0, 1]);
        assert_eq!(b.value(0), 2f64.sqrt());
        assert_eq!(b.value(1), 3f64.sqrt());

        let has_sqrt2 = GeneratorBasis::new(vec![Generator::new("g", 2f64.sqrt())]).unwrap();
        let (b, idx) = has_sqrt2.with_fresh_generators(2).unwrap();
        assert_eq!(idx, vec![1, 2]);
        assert_eq!(b.value(1), 3f64.sqrt());
        assert_eq!(b.value(2), 5f64.sqrt());

        assert!(GeneratorBasis::empty().with_fresh_generators(0).is_err());
        assert!(matches!(
            GeneratorBasis::empty().with_fresh_generators(11),
            Err(Error::GeneratorsExhausted { .. })
        ));
    }

    #[test]
    fn basis_validation() {
        assert!(GeneratorBasis::new(vec![Generator::new("a", 0.0)]).is_err());
        assert!(GeneratorBasis::new(vec![Generator::new("a", TAU)]).is_err());
        assert!(
            GeneratorBasis::new(vec![Generator::new("a", 1.0), Generator::new("a", 2.0)]).is_err()
        );
    }

    #[test]
    fn turns_parsing() {
        assert_eq!(
            parse_turns("1/2").unwrap(),
            BigRational::new(1.into(), 2.into())
        );
        assert_eq!(
            parse_turns("3").unwrap(),
            BigRational::from_integer(3.into())
        );
        assert!(parse_turns("1/0").is_err());
        assert!(parse_turns("x").is_err());
    }
}

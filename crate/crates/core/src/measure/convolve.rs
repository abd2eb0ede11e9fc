use std::collections::{BTreeMap, HashMap};

use num_traits::ToPrimitive;
use smallvec::SmallVec;

use super::transform::TransformEvaluator;
use super::{dropped, same_basis, DiscreteMeasure, MixedMeasure, TrigPolyDensity, C64};
use crate::angle::{common_denominator, turns_numerator_over, Angle};
use crate::error::{Error, Result};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvolveOptions {
    /// Atoms and coefficients with modulus at or below this are removed.
    /// Zero keeps everything except exact zeros.
    pub drop_tol: f64,
}

impl Default for ConvolveOptions {
    fn default() -> Self {
        Self { drop_tol: 0.0 }
    }
}

/// Limits for repeated squaring.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerBudget {
    pub max_atoms: usize,
    pub max_degree: u64,
    /// Largest number of atom pairs a single squaring may touch.
    pub max_pairs: usize,
    pub drop_tol: f64,
}

impl Default for PowerBudget {
    fn default() -> Self {
        Self {
            max_atoms: 200_000,
            max_degree: 65_536,
            max_pairs: 1 << 24,
            drop_tol: 0.0,
        }
    }
}

/// Rows of the left factor summed by one task in the discrete product.
const ROW_BLOCK: usize = 32;

/// Interns coefficient vectors in first-seen order.
#[derive(Default)]
struct FreeParts {
    ids: HashMap<SmallVec<[i64; 4]>, u32>,
    parts: Vec<SmallVec<[i64; 4]>>,
}

impl FreeParts {
    fn intern(&mut self, coeffs: &[i64]) -> u32 {
        if let Some(&id) = self.ids.get(coeffs) {
            return id;
        }
        let id = self.parts.len() as u32;
        let v = SmallVec::from_slice(coeffs);
        self.ids.insert(v.clone(), id);
        self.parts.push(v);
        id
    }
}

/// Atom products keyed by exact position. Torsion parts are mapped onto a
/// common denominator so that position sums are integer additions, and free
/// parts are interned so that a position packs into one `u128`.
fn convolve_discrete(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    drop_tol: f64,
) -> Result<DiscreteMeasure> {
    let basis = a.basis().clone();
    if a.is_empty() || b.is_empty() {
        return Ok(DiscreteMeasure::zero(basis));
    }
    let den = common_denominator(a.atoms().keys().chain(b.atoms().keys()));
    let den_u = match den.to_u64() {
        Some(d) if d < (1 << 62) => d,
        _ => return convolve_discrete_generic(a, b, drop_tol),
    };
    let mut inputs = FreeParts::default();
    let mut encode = |angle: &Angle| -> (u64, u32) {
        let m = turns_numerator_over(angle, &den)
            .to_u64()
            .expect("numerator below the common denominator");
        (m, inputs.intern(angle.coeffs()))
    };
    let left: Vec<(u64, u32, C64)> = a
        .atoms()
        .iter()
        .map(|(k, w)| {
            let (m, f) = encode(k);
            (m, f, *w)
        })
        .collect();
    let right: Vec<(u64, u32, C64)> = b
        .atoms()
        .iter()
        .map(|(k, w)| {
            let (m, f) = encode(k);
            (m, f, *w)
        })
        .collect();

    // Free-part sums for every pair of interned inputs.
    let width = inputs.parts.len();
    let mut sums = FreeParts::default();
    let mut table = Vec::with_capacity(width * width);
    for x in &inputs.parts {
        for y in &inputs.parts {
            let sum = x
                .iter()
                .zip(y.iter())
                .map(|(p, q)| p.checked_add(*q).ok_or(Error::CoefficientOverflow))
                .collect::<Result<SmallVec<[i64; 4]>>>()?;
            table.push(sums.intern(&sum));
        }
    }

    // Each fixed block of rows sums its pairs in (i, j) order and the block
    // partials are added in block order, so the result does not depend on
    // how the blocks were scheduled.
    let key_of = |(ma, fa, _): (u64, u32, C64), (mb, fb, _): (u64, u32, C64)| -> u128 {
        let m = (ma + mb) % den_u;
        let f = table[fa as usize * width + fb as usize];
        ((f as u128) << 64) | m as u128
    };
    let blocks = left.len().div_ceil(ROW_BLOCK);
    let partials: Vec<HashMap<u128, C64>> = par::map_range(0..blocks, |blk| {
        let mut acc: HashMap<u128, C64> = HashMap::new();
        for &x in &left[blk * ROW_BLOCK..((blk + 1) * ROW_BLOCK).min(left.len())] {
            for &y in &right {
                *acc.entry(key_of(x, y)).or_default() += x.2 * y.2;
            }
        }
        acc
    });
    let mut totals: HashMap<u128, C64> = HashMap::new();
    for part in partials {
        // Each key occurs once per block, so it is summed in block order.
        for (key, w) in part {
            *totals.entry(key).or_default() += w;
        }
    }

    // Over one denominator, numerator order is turn order, so sorting by
    // (numerator, coefficients) hands the map its keys already in order.
    let free = |key: u128| sums.parts[(key >> 64) as usize].as_slice();
    let mut kept: Vec<(u128, C64)> = totals
        .into_iter()
        .filter(|(_, w)| !dropped(*w, drop_tol))
        .collect();
    kept.sort_unstable_by(|x, y| {
        (x.0 as u64)
            .cmp(&(y.0 as u64))
            .then_with(|| free(x.0).cmp(free(y.0)))
    });
    let atoms: BTreeMap<Angle, C64> = kept
        .into_iter()
        .map(|(key, w)| {
            let angle = Angle::from_fraction_below_one(key as u64, den_u, free(key).to_vec());
            (angle, w)
        })
        .collect();
    Ok(DiscreteMeasure::from_map_unchecked(basis, atoms))
}

fn convolve_discrete_generic(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    drop_tol: f64,
) -> Result<DiscreteMeasure> {
    let mut atoms: BTreeMap<Angle, C64> = BTreeMap::new();
    for (pa, wa) in a.atoms() {
        for (pb, wb) in b.atoms() {
            *atoms.entry(pa.add(pb)?).or_insert(C64::new(0.0, 0.0)) += *wa * *wb;
        }
    }
    atoms.retain(|_, w| !dropped(*w, drop_tol));
    Ok(DiscreteMeasure::from_map_unchecked(
        a.basis().clone(),
        atoms,
    ))
}

/// Coefficient `k` of `d ∗ f` is `f_k · d̂(k)`.
fn convolve_disc_ac(d: &DiscreteMeasure, f: &TrigPolyDensity) -> BTreeMap<i64, C64> {
    if d.is_empty() || f.is_zero() {
        return BTreeMap::new();
    }
    let eval = TransformEvaluator::new(&MixedMeasure::from(d.clone()));
    let coeffs: Vec<(i64, C64)> = f.coeffs().iter().map(|(k, c)| (*k, *c)).collect();
    par::map_slice(&coeffs, |(k, c)| (*k, *c * eval.coefficient(*k)))
        .into_iter()
        .collect()
}

/// Convolution in M(𝕋). Positions add exactly; coinciding atoms merge.
pub fn convolve(
    a: &MixedMeasure,
    b: &MixedMeasure,
    opts: &ConvolveOptions,
) -> Result<MixedMeasure> {
    if !same_basis(a.basis(), b.basis()) {
        return Err(Error::BasisMismatch);
    }
    let disc = convolve_discrete(&a.disc, &b.disc, opts.drop_tol)?;

    let da = convolve_disc_ac(&a.disc, &b.ac);
    let db = convolve_disc_ac(&b.disc, &a.ac);
    let mut ac: BTreeMap<i64, C64> = BTreeMap::new();
    for k in da.keys().chain(db.keys()).chain(a.ac.coeffs().keys()) {
        if ac.contains_key(k) {
            continue;
        }
        let mut v = da.get(k).copied().unwrap_or_default() + db.get(k).copied().unwrap_or_default();
        if let (Some(x), Some(y)) = (a.ac.coeffs().get(k), b.ac.coeffs().get(k)) {
            v += *x * *y;
        }
        ac.insert(*k, v);
    }
    ac.retain(|_, c| !dropped(*c, opts.drop_tol));
    Ok(MixedMeasure::new(
        disc,
        TrigPolyDensity::from_map_unchecked(ac),
    ))
}

/// Checks that squaring `mu` stays inside `budget`.
pub(crate) fn check_square(
    mu: &MixedMeasure,
    budget: &PowerBudget,
) -> std::result::Result<(), String> {
    let pairs = mu.disc.len().saturating_mul(mu.disc.len());
    if pairs > budget.max_pairs {
        return Err(format!(
            "{} atoms squared exceeds {} pairs",
            mu.disc.len(),
            budget.max_pairs
        ));
    }
    if mu.ac.degree() > budget.max_degree {
        return Err(format!(
            "degree {} exceeds {}",
            mu.ac.degree(),
            budget.max_degree
        ));
    }
    Ok(())
}

pub(crate) fn square_within(
    mu: &MixedMeasure,
    budget: &PowerBudget,
) -> std::result::Result<MixedMeasure, String> {
    check_square(mu, budget)?;
    let sq = convolve(
        mu,
        mu,
        &ConvolveOptions {
            drop_tol: budget.drop_tol,
        },
    )
    .map_err(|e| e.to_string())?;
    if sq.disc.len() > budget.max_atoms {
        return Err(format!(
            "{} atoms exceeds {}",
            sq.disc.len(),
            budget.max_atoms
        ));
    }
    Ok(sq)
}

/// `μ^{∗2^k}` by repeated squaring.
pub fn convolve_power(mu: &MixedMeasure, k: u32, budget: &PowerBudget) -> Result<MixedMeasure> {
    let mut cur = mu.clone();
    for done in 0..k {
        cur = square_within(&cur, budget).map_err(|reason| Error::BudgetExceeded {
            largest_completed: done,
            reason,
        })?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::{Generator, GeneratorBasis};
    use crate::measure::{make_rho, make_theta0};
    use std::sync::Arc;

    fn basis() -> Arc<GeneratorBasis> {
        Arc::new(
            GeneratorBasis::new(vec![
                Generator::new("alpha", 2f64.sqrt()),
                Generator::new("beta", 3f64.sqrt()),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn rho_squared_is_binomial() {
        let b = basis();
        let a = Angle::generator(0, 2);
        let be = Angle::generator(1, 2);
        let rho: MixedMeasure = make_rho(b.clone(), &a, &be).unwrap().into();
        let sq = convolve_power(&rho, 1, &PowerBudget::default()).unwrap();
        let want = DiscreteMeasure::from_atoms(
            b,
            [
                (a.scale(2).unwrap(), C64::new(0.25, 0.0)),
                (a.add(&be).unwrap(), C64::new(0.5, 0.0)),
                (be.scale(2).unwrap(), C64::new(0.25, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(sq, want.into());
    }

    #[test]
    fn theta0_is_idempotent_under_powers() {
        let t0: MixedMeasure = make_theta0(basis()).into();
        for k in 0..5 {
            assert_eq!(convolve_power(&t0, k, &PowerBudget::default()).unwrap(), t0);
        }
    }

    #[test]
    fn dirac_pi_squares_to_identity() {
        let b = basis();
        let d: MixedMeasure =
            DiscreteMeasure::dirac(b.clone(), Angle::half_turn(2), C64::new(1.0, 0.0))
                .unwrap()
                .into();
        let sq = convolve_power(&d, 1, &PowerBudget::default()).unwrap();
        assert_eq!(
            sq,
            DiscreteMeasure::dirac(b, Angle::zero(2), C64::new(1.0, 0.0))
                .unwrap()
                .into()
        );
    }

    #[test]
    fn budget_reports_largest_completed_power() {
        let b = basis();
        let rho: MixedMeasure = make_rho(b, &Angle::generator(0, 2), &Angle::generator(1, 2))
            .unwrap()
            .into();
        let budget = PowerBudget {
            max_atoms: 10,
            ..PowerBudget::default()
        };
        match convolve_power(&rho, 6, &budget) {
            Err(Error::BudgetExceeded {
                largest_completed, ..
            }) => assert_eq!(largest_completed, 3),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn ac_convolution_is_pointwise() {
        let b = basis();
        let f = MixedMeasure::absolutely_continuous(
            b.clone(),
            TrigPolyDensity::from_coeffs([(1, C64::new(2.0, 0.0)), (2, C64::new(1.0, 1.0))]),
        );
        let g = MixedMeasure::absolutely_continuous(
            b,
            TrigPolyDensity::from_coeffs([(1, C64::new(0.5, 0.0)), (3, C64::new(1.0, 0.0))]),
        );
        let h = f.convolve(&g).unwrap();
        assert_eq!(h.ac.coeffs().len(), 1);
        assert_eq!(h.ac.coeff(1), C64::new(1.0, 0.0));
    }

    #[test]
    fn generic_path_agrees_with_fast_path() {
        let b = basis();
        let a = DiscreteMeasure::from_atoms(
            b.clone(),
            [
                (Angle::from_turns(1, 3, 2), C64::new(0.3, 0.2)),
                (Angle::generator(0, 2), C64::new(-0.1, 0.5)),
                (
                    Angle::from_turns(1, 6, 2)
                        .add(&Angle::generator(1, 2))
                        .unwrap(),
                    C64::new(1.0, 0.0),
                ),
            ],
        )
        .unwrap();
        let fast = convolve_discrete(&a, &a, 0.0).unwrap();
        let slow = convolve_discrete_generic(&a, &a, 0.0).unwrap();
        assert_eq!(
            fast.atoms().keys().collect::<Vec<_>>(),
            slow.atoms().keys().collect::<Vec<_>>()
        );
        for (k, w) in fast.atoms() {
            assert!((*w - slow.weight(k)).norm() < 1e-15);
        }
    }
}

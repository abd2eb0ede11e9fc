//! Covering radius of `{ρ̂(n) : |n| ≤ N}` over the closed unit disk, for
//! `ρ = (δ_α + δ_β)/2` and growing `N`.

use serde::Serialize;

use super::{directed_hausdorff, disk_grid, Subset};
use crate::error::{Error, Result};
use crate::kronecker::rho_hat;
use crate::measure::C64;
use crate::par;

/// Smallest exponent of a scan; rows start at `N = 2^4`.
pub const DENSITY_MIN_EXP: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub all: f64,
    pub even: f64,
    pub odd: f64,
}

/// Largest distance from a point of the unit disk grid to the coefficient
/// sample over `|n| ≤ n_max` in `subset`.
pub fn rho_covering_radius(
    alpha: f64,
    beta: f64,
    n_max: u64,
    subset: Subset,
    tol: f64,
) -> Result<f64> {
    let ns: Vec<i64> = (-(n_max as i64)..=n_max as i64)
        .filter(|&n| subset.admits(n))
        .collect();
    let sample: Vec<C64> = par::map_slice(&ns, |&n| rho_hat(alpha, beta, n));
    directed_hausdorff(&disk_grid(1.0, tol), &sample)
}

/// One row per `N = 2^4, 2^5, …, 2^max_exp`.
pub fn density_scan(alpha: f64, beta: f64, max_exp: u32, tol: f64) -> Result<Vec<DensityRow>> {
    if !(DENSITY_MIN_EXP..=30).contains(&max_exp) {
        return Err(Error::InvalidArgument(format!(
            "max exponent {max_exp} is outside {DENSITY_MIN_EXP}..=30"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    (DENSITY_MIN_EXP..=max_exp)
        .map(|e| {
            let n = 1u64 << e;
            Ok(DensityRow {
                n,
                all: rho_covering_radius(alpha, beta, n, Subset::All, tol)?,
                even: rho_covering_radius(alpha, beta, n, Subset::Even, tol)?,
                odd: rho_covering_radius(alpha, beta, n, Subset::Odd, tol)?,
            })
        })
        .collect()
}

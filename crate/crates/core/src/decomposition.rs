//! `μ = ν₀ + ν₁ + ν₂` with ν₀, ν₁ of natural spectrum and ν₂ discrete.
//!
//! With `ρ = (δ_α + δ_β)/2` for generators independent of μ and
//! `μ₀ = μ∗θ₀`, `μ₁ = μ∗θ₁`:
//!
//! ```text
//! ν₀ = μ₀ + R₀·ρ∗θ₁,   ν₁ = μ₁ + R₁·ρ∗θ₀,   ν₂ = −R₀·ρ∗θ₁ − R₁·ρ∗θ₀.
//! ```
//!
//! The construction only needs `Rᵢ ≥ r(μᵢ)`. Every character φ has
//! `φ(θ₀), φ(θ₁) ∈ {0, 1}` with sum 1. If `φ(θ₁) = 0` then
//! `φ(ν₀) = φ(μ₀)` and `|φ(ν₀)| ≤ r(μ₀) ≤ R₀`. If `φ(θ₁) = 1` then
//! `φ(μ₀) = φ(μ)φ(θ₀) = 0` and `φ(ν₀) = R₀·φ(ρ)`, again of modulus at most
//! `R₀`. So `σ(ν₀) ⊆ R₀·D̄`. The odd coefficients `ν̂₀(2n+1) = R₀·ρ̂(2n+1)`
//! are dense in `R₀·D̄`, and the spectrum contains the closure of the
//! coefficients, so `σ(ν₀) = R₀·D̄ = closure ν̂₀(ℤ)`. The argument for ν₁ swaps
//! the parities.

use std::sync::Arc;

use serde::Serialize;

use crate::angle::{Angle, GeneratorBasis};
use crate::error::{Error, Result};
use crate::measure::{
    make_rho, make_theta0, make_theta1, parity_projections, DiscreteMeasure, MixedMeasure,
    PowerBudget,
};
use crate::measure::{TransformEvaluator, C64};
use crate::par;
use crate::spectrum::{
    char_polynomial, disk_grid, fekete_bound, hausdorff, image_coverage, torus_max,
    transform_closure_sample, FeketeReport, Subset,
};

/// Coefficients `|n| ≤ MANUAL_CHECK_N` bound any admissible manual radius.
pub const MANUAL_CHECK_N: i64 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RadiusMode {
    /// Torus maximum bracketed by the Fekete bound; the upper end is used.
    /// Discrete measures only.
    ExactDiscrete,
    Fekete,
    Manual {
        r0: f64,
        r1: f64,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorStrategy {
    /// √2 and √3, moving down the fresh list on collision.
    #[default]
    DefaultSqrt23,
    /// The fresh list past √2 and √3.
    Fresh,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionOptions {
    pub radius_mode: RadiusMode,
    pub generator_strategy: GeneratorStrategy,
    pub k_max: u32,
    pub rel_tol: f64,
    pub budget: PowerBudget,
    pub grid: usize,
    pub refine_iters: usize,
}

impl Default for DecompositionOptions {
    fn default() -> Self {
        Self {
            radius_mode: RadiusMode::Fekete,
            generator_strategy: GeneratorStrategy::default(),
            k_max: 8,
            rel_tol: 1e-3,
            budget: PowerBudget::default(),
            grid: 256,
            refine_iters: 64,
        }
    }
}

/// How a radius was obtained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusEvidence {
    pub radius: f64,
    /// `sup_{|n|≤256} |μ̂ᵢ(n)|`, a lower bound on the spectral radius.
    pub sampled_sup: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub torus_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fekete: Option<FeketeReport>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionResult {
    pub basis: Arc<GeneratorBasis>,
    pub alpha: Angle,
    pub beta: Angle,
    pub mu0: MixedMeasure,
    pub mu1: MixedMeasure,
    pub nu0: MixedMeasure,
    pub nu1: MixedMeasure,
    pub nu2: DiscreteMeasure,
    pub r0: f64,
    pub r1: f64,
    pub evidence: [RadiusEvidence; 2],
}

fn sampled_sup(mu: &MixedMeasure, n: i64) -> f64 {
    let ev = TransformEvaluator::new(mu);
    par::max_f64(0..(2 * n + 1) as usize, |i| {
        ev.coefficient(i as i64 - n).norm()
    })
}

fn pick_generators(
    basis: &GeneratorBasis,
    strategy: GeneratorStrategy,
) -> Result<(GeneratorBasis, usize, usize)> {
    let start = match strategy {
        GeneratorStrategy::DefaultSqrt23 => 0,
        GeneratorStrategy::Fresh => 2,
    };
    let (b, idx) = basis.with_fresh_generators_from(start, 2)?;
    Ok((b, idx[0], idx[1]))
}

fn radius(
    mu: &MixedMeasure,
    manual: Option<f64>,
    opts: &DecompositionOptions,
) -> Result<RadiusEvidence> {
    let sup = sampled_sup(mu, MANUAL_CHECK_N);
    if let Some(r) = manual {
        if !(r >= 0.0 && r.is_finite()) || r < sup - 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "manual radius {r} is below sup |μ̂(n)| = {sup} over |n| ≤ {MANUAL_CHECK_N}"
            )));
        }
        return Ok(RadiusEvidence {
            radius: if mu.is_zero() { 0.0 } else { r },
            sampled_sup: sup,
            torus_lower: None,
            fekete: None,
        });
    }
    if mu.is_zero() {
        return Ok(RadiusEvidence {
            radius: 0.0,
            sampled_sup: 0.0,
            torus_lower: None,
            fekete: None,
        });
    }
    let report = fekete_bound(mu, opts.k_max, opts.rel_tol, &opts.budget);
    let torus_lower = if opts.radius_mode == RadiusMode::ExactDiscrete {
        let poly = char_polynomial(&mu.disc)?;
        Some(torus_max(&poly, opts.grid, opts.refine_iters)?.value)
    } else {
        None
    };
    // the bound dominates both lower estimates in exact arithmetic; the max
    // only guards against rounding in the last place
    let r = report.final_bound.max(sup).max(torus_lower.unwrap_or(0.0));
    Ok(RadiusEvidence {
        radius: r,
        sampled_sup: sup,
        torus_lower,
        fekete: Some(report),
    })
}

pub fn decompose(mu: &MixedMeasure, opts: &DecompositionOptions) -> Result<DecompositionResult> {
    if opts.radius_mode == RadiusMode::ExactDiscrete && !mu.is_discrete() {
        return Err(Error::Unsupported(
            "exact_discrete needs a purely discrete measure; use the fekete radius mode".into(),
        ));
    }
    let (basis, ia, ib) = pick_generators(mu.basis(), opts.generator_strategy)?;
    let basis = Arc::new(basis);
    let dim = basis.len();
    let alpha = Angle::generator(ia, dim);
    let beta = Angle::generator(ib, dim);

    let mu = mu.rebase(basis.clone())?;
    let (mu0, mu1) = parity_projections(&mu)?;
    let (m0, m1) = match opts.radius_mode {
        RadiusMode::Manual { r0, r1 } => (Some(r0), Some(r1)),
        _ => (None, None),
    };
    let e0 = radius(&mu0, m0, opts)?;
    let e1 = radius(&mu1, m1, opts)?;
    let (r0, r1) = (e0.radius, e1.radius);

    let rho: MixedMeasure = make_rho(basis.clone(), &alpha, &beta)?.into();
    let rho_t1 = rho.convolve(&make_theta1(basis.clone()).into())?.disc;
    let rho_t0 = rho.convolve(&make_theta0(basis.clone()).into())?.disc;

    let nu0 = mu0.add(&rho_t1.scale_real(r0).into())?;
    let nu1 = mu1.add(&rho_t0.scale_real(r1).into())?;
    let nu2 = rho_t1.scale_real(-r0).add(&rho_t0.scale_real(-r1))?;

    Ok(DecompositionResult {
        basis,
        alpha,
        beta,
        mu0,
        mu1,
        nu0,
        nu1,
        nu2,
        r0,
        r1,
        evidence: [e0, e1],
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    /// Coefficients `|n| ≤ n` are sampled.
    pub n: u64,
    pub grid: usize,
    /// Tolerance for the density and spectrum checks, relative to the radius.
    pub tol: f64,
    /// Tolerance for the identity, parity and modulus checks.
    pub residual_tol: f64,
    /// Atom weights of `ν₀+ν₁+ν₂` and μ must agree to this.
    pub structure_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n: 10_000,
            grid: 256,
            tol: 0.05,
            residual_tol: 1e-9,
            structure_tol: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn below(name: &'static str, residual: f64, threshold: f64) -> Self {
        Self {
            name,
            status: if residual <= threshold {
                Status::Pass
            } else {
                Status::Fail
            },
            residual: Some(residual),
            threshold: Some(threshold),
            detail: None,
        }
    }

    fn flag(name: &'static str, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            name,
            status: if ok { Status::Pass } else { Status::Fail },
            residual: None,
            threshold: None,
            detail: Some(detail.into()),
        }
    }

    fn skipped(name: &'static str, why: impl Into<String>) -> Self {
        Self {
            name,
            status: Status::Skipped,
            residual: None,
            threshold: None,
            detail: Some(why.into()),
        }
    }

    fn failed(name: &'static str, err: &Error) -> Self {
        Self::flag(name, false, err.to_string())
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub n: u64,
    pub grid: usize,
    pub tol: f64,
    pub r0: f64,
    pub r1: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// True when no check whose name starts with one of `letters` failed.
    pub fn passed_groups(&self, letters: &[char]) -> bool {
        self.checks
            .iter()
            .filter(|c| c.name.chars().next().is_some_and(|l| letters.contains(&l)))
            .all(|c| c.status != Status::Fail)
    }

    /// Largest residual among checks starting with `letter`.
    pub fn max_residual(&self, letter: char) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.name.starts_with(letter))
            .filter_map(|c| c.residual)
            .fold(0.0, f64::max)
    }
}

/// Largest weight difference over the union of supports and AC coefficients.
fn structural_gap(a: &MixedMeasure, b: &MixedMeasure) -> f64 {
    let mut gap = 0.0f64;
    for (pos, w) in a.disc.atoms() {
        gap = gap.max((*w - b.disc.weight(pos)).norm());
    }
    for (pos, w) in b.disc.atoms() {
        gap = gap.max((*w - a.disc.weight(pos)).norm());
    }
    for k in a.ac.coeffs().keys().chain(b.ac.coeffs().keys()) {
        gap = gap.max((a.ac.coeff(*k) - b.ac.coeff(*k)).norm());
    }
    gap
}

/// Hausdorff distance to the `r`-disk grid, divided by `r` (absolute when
/// `r = 0`).
fn relative_density(points: &[C64], r: f64, tol: f64) -> Result<f64> {
    let d = hausdorff(points, &disk_grid(r, tol))?;
    Ok(if r > 0.0 { d / r } else { d })
}

fn spectrum_checks(
    which: usize,
    nu: &MixedMeasure,
    r: f64,
    opts: &VerifyOptions,
) -> (Check, Check) {
    let (contain, cover) = if which == 0 {
        ("f_contain_nu0", "f_cover_nu0")
    } else {
        ("f_contain_nu1", "f_cover_nu1")
    };
    let run = || -> Result<(Check, Check)> {
        let poly = char_polynomial(&nu.disc)?;
        let reference = disk_grid(r, opts.tol);
        let cov = image_coverage(
            &poly,
            opts.grid,
            &reference,
            2.0 * opts.tol * r.max(f64::MIN_POSITIVE),
        )?;
        let limit = r * (1.0 + opts.tol) + 1e-9;
        let coverage = if r > 0.0 {
            cov.coverage / r
        } else {
            cov.coverage
        };
        let note = format!(
            "resolution {} over {} character values",
            cov.resolution, cov.points
        );
        Ok((
            Check::below(contain, cov.max_modulus, limit).with_detail(note.clone()),
            Check::below(cover, coverage, opts.tol).with_detail(note),
        ))
    };
    run().unwrap_or_else(|e| (Check::failed(contain, &e), Check::failed(cover, &e)))
}

/// Runs checks (a)–(f) on a decomposition of `mu`. Failures are recorded in
/// the report, never returned as errors.
pub fn verify_decomposition(
    mu: &MixedMeasure,
    res: &DecompositionResult,
    opts: &VerifyOptions,
) -> VerificationReport {
    let mut checks = Vec::new();
    let n = opts.n as i64;
    let r = [res.r0, res.r1];

    let mu = match mu.rebase(res.basis.clone()) {
        Ok(m) => m,
        Err(e) => {
            checks.push(Check::failed("a_identity", &e));
            return VerificationReport {
                n: opts.n,
                grid: opts.grid,
                tol: opts.tol,
                r0: res.r0,
                r1: res.r1,
                checks,
                passed: false,
            };
        }
    };

    // (a)
    let nu2: MixedMeasure = res.nu2.clone().into();
    let ev_mu = TransformEvaluator::new(&mu);
    let ev_nu = [
        TransformEvaluator::new(&res.nu0),
        TransformEvaluator::new(&res.nu1),
    ];
    let ev_nu2 = TransformEvaluator::new(&nu2);
    let ev_rho = match make_rho(res.basis.clone(), &res.alpha, &res.beta) {
        Ok(rho) => TransformEvaluator::new(&rho.into()),
        Err(e) => TransformEvaluator::new(&{
            checks.push(Check::failed("a_identity", &e));
            MixedMeasure::zero(res.basis.clone())
        }),
    };
    // per n: identity, parity ν₀, parity ν₁, |ν̂₀|, |ν̂₁|
    let rows = par::map_range(0..(2 * n + 1) as usize, |i| {
        let k = i as i64 - n;
        let m = ev_mu.coefficient(k);
        let v0 = ev_nu[0].coefficient(k);
        let v1 = ev_nu[1].coefficient(k);
        let v2 = ev_nu2.coefficient(k);
        let p = ev_rho.coefficient(k);
        let (want0, want1) = if k % 2 == 0 {
            (m, res.r1 * p)
        } else {
            (res.r0 * p, m)
        };
        [
            (m - (v0 + v1 + v2)).norm(),
            (v0 - want0).norm(),
            (v1 - want1).norm(),
            v0.norm(),
            v1.norm(),
        ]
    });
    let col = |j: usize| rows.iter().map(|r| r[j]).fold(0.0, f64::max);

    checks.push(Check::below("a_identity", col(0), opts.residual_tol));
    let structure = res
        .nu0
        .add(&res.nu1)
        .and_then(|s| s.add(&nu2))
        .map(|s| structural_gap(&s, &mu));
    checks.push(match structure {
        Ok(gap) => Check::below("a_structure", gap, opts.structure_tol),
        Err(e) => Check::failed("a_structure", &e),
    });
    let nu2_ok = res.nu2.len() <= 8
        && res.nu2.atoms().keys().all(|pos| {
            [&res.alpha, &res.beta].iter().any(|g| {
                pos == *g || g.add(&Angle::half_turn(res.basis.len())).ok().as_ref() == Some(pos)
            })
        });
    checks.push(Check::flag(
        "a_nu2_shape",
        nu2_ok,
        format!("{} atoms at α, α+π, β, β+π", res.nu2.len()),
    ));

    // (b)
    let orth = |m: &MixedMeasure, theta: DiscreteMeasure| -> Result<bool> {
        let rho: MixedMeasure = make_rho(res.basis.clone(), &res.alpha, &res.beta)?.into();
        Ok(m.convolve(&rho)?.convolve(&theta.into())?.is_zero())
    };
    for (name, m, theta) in [
        ("b_mu0_rho_theta1", &res.mu0, make_theta1(res.basis.clone())),
        ("b_mu1_rho_theta0", &res.mu1, make_theta0(res.basis.clone())),
    ] {
        checks.push(match orth(m, theta) {
            Ok(zero) => Check::flag(
                name,
                zero,
                if zero {
                    "exactly zero"
                } else {
                    "nonzero atoms or coefficients"
                },
            ),
            Err(e) => Check::failed(name, &e),
        });
    }

    // (c), (d)
    checks.push(Check::below("c_parity_nu0", col(1), opts.residual_tol));
    checks.push(Check::below("c_parity_nu1", col(2), opts.residual_tol));
    checks.push(Check::below(
        "d_bound_nu0",
        col(3),
        res.r0 + opts.residual_tol,
    ));
    checks.push(Check::below(
        "d_bound_nu1",
        col(4),
        res.r1 + opts.residual_tol,
    ));

    // (e)
    for (i, name) in [(0, "e_density_nu0"), (1, "e_density_nu1")] {
        let nu = if i == 0 { &res.nu0 } else { &res.nu1 };
        let sample = transform_closure_sample(nu, opts.n, Subset::All);
        checks.push(match relative_density(&sample.points, r[i], opts.tol) {
            Ok(d) => Check::below(name, d, opts.tol)
                .with_detail("hausdorff distance to the radius disk, relative"),
            Err(e) => Check::failed(name, &e),
        });
    }

    // (f)
    let k = mu.disc.used_generators().len();
    if mu.is_discrete() && k <= 2 {
        for (i, nu) in [&res.nu0, &res.nu1].into_iter().enumerate() {
            let (a, b) = spectrum_checks(i, nu, r[i], opts);
            checks.push(a);
            checks.push(b);
        }
    } else {
        let why = if mu.is_discrete() {
            format!("μ uses {k} generators, more than 2")
        } else {
            "μ has an absolutely continuous part".to_string()
        };
        for name in [
            "f_contain_nu0",
            "f_cover_nu0",
            "f_contain_nu1",
            "f_cover_nu1",
        ] {
            checks.push(Check::skipped(name, why.clone()));
        }
    }

    let passed = checks.iter().all(|c| c.status != Status::Fail);
    VerificationReport {
        n: opts.n,
        grid: opts.grid,
        tol: opts.tol,
        r0: res.r0,
        r1: res.r1,
        checks,
        passed,
    }
}

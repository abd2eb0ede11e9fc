//! Seeded invariant suite behind `natspec verify`.
//!
//! Every check draws its random measures from one ChaCha stream seeded by
//! [`SuiteOptions::seed`] and reports a worst-case metric against a fixed
//! threshold. The report holds no timings, so equal options give equal bytes.

use std::f64::consts::{SQRT_2, TAU};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::angle::{Angle, Generator, GeneratorBasis};
use crate::decomposition::{
    decompose, verify_decomposition, DecompositionOptions, RadiusMode, VerifyOptions,
};
use crate::error::Result;
use crate::io::{measure_from_json, measure_to_json};
use crate::kronecker::{hit_target, rho_hat, Parity, TargetOptions};
use crate::measure::{
    convolve_power, make_rho, make_theta0, make_theta1, parity_projections, DiscreteMeasure,
    MixedMeasure, PowerBudget, TransformEvaluator, C64,
};
use crate::random::{random_discrete, random_mixed, RandomMeasureSpec};
use crate::spectrum::{
    char_polynomial, density_scan, fekete_bound, natural_spectrum_check, torus_max, DensityRow,
};

pub const SQRT_3: f64 = 1.7320508075688772;

/// Terminal covering radii of `{ρ̂(n)}` at `N = 2^14` for α = √2, β = √3,
/// from a brute-force reference scan against the tol-0.05 disk grid.
pub const DENSITY_2_14: [f64; 3] = [
    0.014654135286144909,
    0.017709921010077435,
    0.015498783927049169,
];

/// Terminal covering radii at `N = 2^16`, same reference scan.
pub const DENSITY_2_16: [f64; 3] = [
    0.010485923246571152,
    0.011405565486553786,
    0.012795749627936,
];

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Random measures per randomized check.
    pub cases: usize,
    pub verify: VerifyOptions,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            cases: 10,
            verify: VerifyOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteCheck {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    /// Worst value of the checked quantity over all cases.
    pub metric: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub cases: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub grid: usize,
    pub tol: f64,
    pub checks: Vec<SuiteCheck>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&SuiteCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Worst metric and failure count over a run of cases.
struct Tally {
    name: &'static str,
    threshold: f64,
    cases: usize,
    failures: usize,
    metric: f64,
    first_failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str, threshold: f64) -> Self {
        Self {
            name,
            threshold,
            cases: 0,
            failures: 0,
            metric: 0.0,
            first_failure: None,
        }
    }

    /// Records a case whose metric must not exceed the threshold.
    fn value(&mut self, metric: f64, label: impl FnOnce() -> String) {
        self.cases += 1;
        if metric.is_nan() || metric > self.metric {
            self.metric = metric;
        }
        if !(metric <= self.threshold) {
            self.fail(label());
        }
    }

    /// Records a pass/fail case with metric 0 on success and 1 on failure.
    fn flag(&mut self, ok: bool, label: impl FnOnce() -> String) {
        self.value(if ok { 0.0 } else { 1.0 }, label);
    }

    fn error(&mut self, label: String) {
        self.cases += 1;
        self.metric = f64::INFINITY;
        self.fail(label);
    }

    fn fail(&mut self, label: String) {
        self.failures += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some(label);
        }
    }

    fn finish(self) -> SuiteCheck {
        SuiteCheck {
            name: self.name,
            passed: self.failures == 0 && self.cases > 0,
            cases: self.cases,
            failures: self.failures,
            metric: self.metric,
            threshold: self.threshold,
            detail: self.first_failure.map(|s| format!("first failure: {s}")),
        }
    }
}

fn rho_basis() -> Arc<GeneratorBasis> {
    Arc::new(
        GeneratorBasis::new(vec![
            Generator::new("alpha", SQRT_2),
            Generator::new("beta", SQRT_3),
        ])
        .expect("√2 and √3 are valid generators"),
    )
}

/// `ρ = (δ_√2 + δ_√3)/2`.
pub fn rho_fixture() -> DiscreteMeasure {
    let b = rho_basis();
    make_rho(b, &Angle::generator(0, 2), &Angle::generator(1, 2)).expect("fixed basis")
}

/// `δ_γ` for the Euler–Mascheroni constant γ.
pub fn dirac_fixture() -> MixedMeasure {
    let b = Arc::new(
        GeneratorBasis::new(vec![Generator::new("gamma", 0.5772156649015329)]).expect("valid"),
    );
    DiscreteMeasure::dirac(b, Angle::generator(0, 1), C64::new(1.0, 0.0))
        .expect("angle matches basis")
        .into()
}

fn exact_algebra(rng: &mut ChaCha8Rng, cases: usize) -> SuiteCheck {
    let mut t = Tally::new("exact_algebra", 0.0);
    let b = rho_basis();
    let t0: MixedMeasure = make_theta0(b.clone()).into();
    let t1: MixedMeasure = make_theta1(b.clone()).into();
    let delta0: MixedMeasure =
        DiscreteMeasure::dirac(b.clone(), Angle::zero(2), C64::new(1.0, 0.0))
            .expect("angle matches basis")
            .into();
    t.flag(t0.convolve(&t1).is_ok_and(|m| m.is_zero()), || {
        "θ₀∗θ₁ ≠ 0".into()
    });
    t.flag(t0.convolve(&t0).is_ok_and(|m| m == t0), || {
        "θ₀∗θ₀ ≠ θ₀".into()
    });
    t.flag(t0.add(&t1).is_ok_and(|m| m == delta0), || {
        "θ₀+θ₁ ≠ δ₀".into()
    });
    let spec = RandomMeasureSpec::default();
    for case in 0..cases {
        let mu = random_mixed(rng, &spec);
        let zero = || -> Result<bool> {
            let (basis, idx) = mu.basis().with_fresh_generators(2)?;
            let basis = Arc::new(basis);
            let dim = basis.len();
            let mu = mu.rebase(basis.clone())?;
            let (mu0, mu1) = parity_projections(&mu)?;
            let rho: MixedMeasure = make_rho(
                basis.clone(),
                &Angle::generator(idx[0], dim),
                &Angle::generator(idx[1], dim),
            )?
            .into();
            let a = mu0
                .convolve(&rho)?
                .convolve(&make_theta1(basis.clone()).into())?;
            let b = mu1.convolve(&rho)?.convolve(&make_theta0(basis).into())?;
            Ok(a.is_zero() && b.is_zero())
        };
        match zero() {
            Ok(ok) => t.flag(ok, || format!("case {case}: μᵢ∗ρ∗θ is not zero")),
            Err(e) => t.error(format!("case {case}: {e}")),
        }
    }
    t.finish()
}

fn convolution_theorem(rng: &mut ChaCha8Rng, cases: usize) -> SuiteCheck {
    let mut t = Tally::new("convolution_theorem", 1e-10);
    let spec = RandomMeasureSpec::default();
    for case in 0..cases {
        let a = random_mixed(rng, &spec);
        let b = random_mixed(rng, &spec);
        match a.convolve(&b) {
            Ok(ab) => {
                let (ea, eb, eab) = (
                    TransformEvaluator::new(&a),
                    TransformEvaluator::new(&b),
                    TransformEvaluator::new(&ab),
                );
                let worst = (-64..=64)
                    .map(|n| (eab.coefficient(n) - ea.coefficient(n) * eb.coefficient(n)).norm())
                    .fold(0.0, f64::max);
                t.value(worst, || format!("case {case}: residual {worst:e}"));
            }
            Err(e) => t.error(format!("case {case}: {e}")),
        }
    }
    t.finish()
}

fn json_round_trip(rng: &mut ChaCha8Rng, cases: usize) -> SuiteCheck {
    let mut t = Tally::new("json_round_trip", 0.0);
    let spec = RandomMeasureSpec::default();
    for case in 0..cases {
        let mu = random_mixed(rng, &spec);
        let text = measure_to_json(&mu);
        let ok =
            measure_from_json(&text).is_ok_and(|back| back == mu && measure_to_json(&back) == text);
        t.flag(ok, || {
            format!("case {case}: round trip changed the measure")
        });
    }
    t.finish()
}

/// Decomposes each measure and records the worst residual of the `letters`
/// groups; a failed check of any listed group fails the case. With `manual`
/// the radii are taken from it instead of being computed. Returns the radii
/// used.
fn decomposition_cases(
    name: &'static str,
    measures: &[MixedMeasure],
    manual: Option<&[(f64, f64)]>,
    verify: &VerifyOptions,
    letters: &[char],
) -> (SuiteCheck, Vec<(f64, f64)>) {
    let mut t = Tally::new(name, verify.residual_tol);
    let mut density = 0.0f64;
    let mut radii = Vec::with_capacity(measures.len());
    for (case, mu) in measures.iter().enumerate() {
        let run = || -> Result<(f64, f64, bool, (f64, f64))> {
            let radius_mode = match manual.and_then(|m| m.get(case)) {
                Some(&(r0, r1)) => RadiusMode::Manual { r0, r1 },
                None => RadiusMode::Fekete,
            };
            let opts = DecompositionOptions {
                radius_mode,
                ..DecompositionOptions::default()
            };
            let res = decompose(mu, &opts)?;
            let report = verify_decomposition(mu, &res, verify);
            let residual = ['a', 'c']
                .iter()
                .map(|&l| report.max_residual(l))
                .fold(0.0, f64::max);
            Ok((
                residual,
                report.max_residual('e'),
                report.passed_groups(letters),
                (res.r0, res.r1),
            ))
        };
        match run() {
            Ok((residual, e, ok, r)) => {
                radii.push(r);
                density = density.max(e);
                t.value(residual, || {
                    format!("case {case}: identity/parity residual {residual:e}")
                });
                if !ok {
                    t.fail(format!("case {case}: a check in {letters:?} failed"));
                }
            }
            Err(err) => {
                radii.push((f64::NAN, f64::NAN));
                t.error(format!("case {case}: {err}"));
            }
        }
    }
    let mut check = t.finish();
    check.detail = Some(match check.detail.take() {
        Some(d) => format!("{d}; worst relative density {density:.6}"),
        None => format!("worst relative density {density:.6}"),
    });
    (check, radii)
}

fn decomposition_fixtures(verify: &VerifyOptions) -> SuiteCheck {
    let mut t = Tally::new("decomposition_fixtures", verify.residual_tol);
    let b = rho_basis();
    let fixtures: [(&str, MixedMeasure, &[char]); 3] = [
        ("dirac", dirac_fixture(), &['a', 'b', 'c', 'd', 'e', 'f']),
        // over the empty basis, so the default generators are not displaced
        (
            "theta0",
            make_theta0(Arc::new(GeneratorBasis::empty())).into(),
            &['a', 'b', 'c', 'd', 'e', 'f'],
        ),
        ("zero", MixedMeasure::zero(b), &['a', 'b', 'c', 'd']),
    ];
    for (label, mu, letters) in fixtures {
        match decompose(&mu, &DecompositionOptions::default()) {
            Ok(res) => {
                let report = verify_decomposition(&mu, &res, verify);
                let residual = report.max_residual('a').max(report.max_residual('c'));
                t.value(residual, || format!("{label}: residual {residual:e}"));
                if !report.passed_groups(letters) {
                    t.fail(format!("{label}: a check in {letters:?} failed"));
                }
            }
            Err(e) => t.error(format!("{label}: {e}")),
        }
    }
    t.finish()
}

fn rho_bracket() -> SuiteCheck {
    let mut t = Tally::new("rho_bracket", 1e-3);
    let rho = rho_fixture();
    let report = fekete_bound(&rho.clone().into(), 4, 0.0, &PowerBudget::default());
    for step in &report.sequence {
        t.value((step.r - 1.0).abs(), || {
            format!("r at k = {} is {}", step.k, step.r)
        });
    }
    match char_polynomial(&rho).and_then(|p| torus_max(&p, 512, 64)) {
        Ok(m) => {
            let width = report.final_bound - m.value;
            t.value(width, || {
                format!("bracket [{}, {}]", m.value, report.final_bound)
            });
            t.flag(
                m.value <= 1.0 + 1e-12 && report.final_bound >= 1.0 - 1e-12,
                || "bracket misses 1".into(),
            );
        }
        Err(e) => t.error(e.to_string()),
    }
    t.finish()
}

fn bracketing(rng: &mut ChaCha8Rng, cases: usize) -> SuiteCheck {
    let mut t = Tally::new("bracketing", 1e-6);
    for case in 0..cases {
        let mu = random_discrete(rng, &RandomMeasureSpec::discrete(2));
        let report = fekete_bound(&mu.clone().into(), 4, 0.0, &PowerBudget::default());
        match char_polynomial(&mu).and_then(|p| torus_max(&p, 64, 64)) {
            Ok(m) => {
                let excess = m.value - report.final_bound;
                t.value(excess, || {
                    format!("case {case}: torus max exceeds the bound by {excess:e}")
                });
            }
            Err(e) => t.error(format!("case {case}: {e}")),
        }
        let sup = TransformEvaluator::new(&mu.into());
        let top = (-256..=256)
            .map(|n| sup.coefficient(n).norm())
            .fold(0.0, f64::max);
        let excess = top - report.final_bound;
        t.value(excess, || {
            format!("case {case}: sampled coefficient exceeds the bound by {excess:e}")
        });
    }
    t.finish()
}

fn natural_spectrum(verify: &VerifyOptions) -> SuiteCheck {
    let mut t = Tally::new("natural_spectrum", verify.tol);
    let b = rho_basis();
    let fixtures = [
        ("rho", rho_fixture(), 10 * verify.n, 2 * verify.grid),
        ("theta1", make_theta1(b), verify.n, verify.grid),
        ("dirac", dirac_fixture().disc, verify.n, verify.grid),
    ];
    for (label, mu, n, grid) in fixtures {
        match natural_spectrum_check(&mu, n, grid, verify.tol) {
            Ok(c) => t.value(c.distance, || format!("{label}: distance {}", c.distance)),
            Err(e) => t.error(format!("{label}: {e}")),
        }
    }
    t.finish()
}

fn hit_targets(rng: &mut ChaCha8Rng, cases: usize) -> SuiteCheck {
    const EPS: f64 = 0.05;
    let mut t = Tally::new("hit_target", EPS);
    for parity in [Parity::Any, Parity::Even, Parity::Odd] {
        let opts = TargetOptions {
            parity,
            ..TargetOptions::default()
        };
        for case in 0..cases {
            let w = C64::from_polar(rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
            match hit_target(SQRT_2, SQRT_3, w, EPS, &opts) {
                Ok(hit) => {
                    let d = (rho_hat(SQRT_2, SQRT_3, hit.n) - w).norm();
                    if parity.admits(hit.n) {
                        t.value(d, || {
                            format!("{parity:?} case {case}: n = {} misses by {d}", hit.n)
                        });
                    } else {
                        t.error(format!(
                            "{parity:?} case {case}: n = {} has the wrong parity",
                            hit.n
                        ));
                    }
                }
                Err(e) => t.error(format!("{parity:?} case {case}: {e}")),
            }
        }
    }
    t.finish()
}

/// Nonincreasing covering radii up to `N = 2^14` and terminal values at the
/// reference scan.
fn density(rows: &[DensityRow]) -> SuiteCheck {
    let mut t = Tally::new("density", 1e-9);
    for w in rows.windows(2) {
        for (a, b, label) in [
            (w[0].all, w[1].all, "all"),
            (w[0].even, w[1].even, "even"),
            (w[0].odd, w[1].odd, "odd"),
        ] {
            let rise = (b - a).max(0.0);
            t.value(rise, || {
                format!("{label} rises between N = {} and {}", w[0].n, w[1].n)
            });
        }
    }
    if let Some(last) = rows.last() {
        for (got, pinned, label) in [
            (last.all, DENSITY_2_14[0], "all"),
            (last.even, DENSITY_2_14[1], "even"),
            (last.odd, DENSITY_2_14[2], "odd"),
        ] {
            let over = (got - pinned).max(0.0);
            t.value(over, || format!("{label} terminal {got} above {pinned}"));
        }
    }
    t.finish()
}

fn power_consistency(rng: &mut ChaCha8Rng, cases: usize) -> SuiteCheck {
    let mut t = Tally::new("power_consistency", 1e-9);
    let spec = RandomMeasureSpec::discrete(2);
    for case in 0..cases {
        let mu: MixedMeasure = random_discrete(rng, &spec).into();
        match convolve_power(&mu, 2, &PowerBudget::default()) {
            Ok(p) => {
                let (e, ep) = (TransformEvaluator::new(&mu), TransformEvaluator::new(&p));
                let worst = (-32..=32)
                    .map(|n| {
                        let c = e.coefficient(n);
                        (ep.coefficient(n) - c * c * c * c).norm()
                    })
                    .fold(0.0, f64::max);
                t.value(worst, || format!("case {case}: residual {worst:e}"));
            }
            Err(e) => t.error(format!("case {case}: {e}")),
        }
    }
    t.finish()
}

/// Runs every check of the suite.
pub fn run_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cases = opts.cases;
    let spec = RandomMeasureSpec::default();
    let mut checks = vec![
        exact_algebra(&mut rng, cases),
        convolution_theorem(&mut rng, cases),
        power_consistency(&mut rng, cases),
        json_round_trip(&mut rng, cases),
    ];
    let mixed: Vec<MixedMeasure> = (0..cases).map(|_| random_mixed(&mut rng, &spec)).collect();
    let abcde = ['a', 'b', 'c', 'd', 'e'];
    let (check, radii) =
        decomposition_cases("decomposition_random", &mixed, None, &opts.verify, &abcde);
    checks.push(check);
    let doubled: Vec<(f64, f64)> = radii.iter().map(|&(a, b)| (2.0 * a, 2.0 * b)).collect();
    let discrete: Vec<MixedMeasure> = (0..cases)
        .map(|_| random_discrete(&mut rng, &RandomMeasureSpec::discrete(2)).into())
        .collect();
    checks.push(
        decomposition_cases(
            "decomposition_discrete",
            &discrete,
            None,
            &opts.verify,
            &['a', 'b', 'c', 'd', 'e', 'f'],
        )
        .0,
    );
    checks.push(decomposition_fixtures(&opts.verify));
    checks.push(
        decomposition_cases(
            "radius_substitution",
            &mixed,
            Some(&doubled),
            &opts.verify,
            &abcde,
        )
        .0,
    );
    checks.push(rho_bracket());
    checks.push(bracketing(&mut rng, cases));
    checks.push(natural_spectrum(&opts.verify));
    checks.push(hit_targets(&mut rng, cases));
    checks.push(density(&density_scan(SQRT_2, SQRT_3, 14, 0.05)?));
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport {
        seed: opts.seed,
        cases,
        n: opts.verify.n,
        grid: opts.verify.grid,
        tol: opts.verify.tol,
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_reports_first_failure() {
        let mut t = Tally::new("x", 1.0);
        t.value(0.5, || "a".into());
        t.value(2.0, || "b".into());
        t.value(3.0, || "c".into());
        let c = t.finish();
        assert!(!c.passed);
        assert_eq!((c.cases, c.failures, c.metric), (3, 2, 3.0));
        assert_eq!(c.detail.as_deref(), Some("first failure: b"));
        assert!(!Tally::new("empty", 1.0).finish().passed);
    }

    #[test]
    fn small_suite_passes_and_repeats() {
        let opts = SuiteOptions {
            seed: 7,
            cases: 3,
            verify: VerifyOptions {
                n: 2000,
                grid: 64,
                tol: 0.2,
                ..VerifyOptions::default()
            },
        };
        let a = run_suite(&opts).unwrap();
        for c in &a.checks {
            assert!(c.passed, "{c:?}");
        }
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&run_suite(&opts).unwrap()).unwrap()
        );
    }
}

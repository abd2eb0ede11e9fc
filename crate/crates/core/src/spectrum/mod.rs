//! Spectral radius bounds and finite-resolution samples of spectra.
//!
//! For a finitely supported discrete measure over an independent basis, the
//! closure of `μ̂(ℤ)` equals the image of the generalized characters: the
//! map `n ↦ e^{−2πin/L}` runs through every `L`-th root of unity, and within
//! each residue class `n ↦ (e^{−inγ_i})_i` is equidistributed on the torus.
//! Comparing the two samples is therefore a consistency test of the
//! machinery rather than a discovery, and it is expected to pass.

mod character;
mod density;
mod fekete;
mod hausdorff;

use std::f64::consts::TAU;
use std::io::Write;

use serde::Serialize;

pub use character::{
    char_polynomial, image_coverage, torus_max, CharacterPolynomial, CharacterTerm, ImageCoverage,
    TorusMax, MAX_FREE_DIMS, MAX_GRID_POINTS,
};
pub use density::{density_scan, rho_covering_radius, DensityRow, DENSITY_MIN_EXP};
pub use fekete::{fekete_bound, FeketeReport, FeketeStep, StopReason};
pub use hausdorff::{directed_hausdorff, hausdorff, PointIndex};

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, MixedMeasure, TransformEvaluator, C64};
use crate::par;

/// Cap on the points a materialized spectrum sample holds.
pub const MAX_SAMPLE_POINTS: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    All,
    Even,
    Odd,
}

impl Subset {
    pub fn admits(self, n: i64) -> bool {
        match self {
            Subset::All => true,
            Subset::Even => n % 2 == 0,
            Subset::Odd => n % 2 != 0,
        }
    }
}

/// How a sample was produced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    /// Character image on a torus grid of the given per-dimension resolution.
    Torus {
        resolution: usize,
        refine_iters: usize,
    },
    /// Fourier–Stieltjes coefficients with `|n| ≤ n_max`.
    Transform { n_max: u64, subset: Subset },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSample {
    pub points: Vec<C64>,
    pub grid_spec: GridSpec,
}

impl SpectrumSample {
    /// One `re,im` row per point after a header line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["re", "im"]).map_err(csv_error)?;
        for p in &self.points {
            w.serialize((p.re, p.im)).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Polar grid on the closed disk of radius `radius`: the center and
/// `⌈2/tol⌉ − 1` circles of `⌈2π/tol⌉` points each, evenly spaced in radius
/// up to the boundary. The covering radius is below `radius · tol`.
pub fn disk_grid(radius: f64, tol: f64) -> Vec<C64> {
    assert!(tol > 0.0, "disk grid tolerance must be positive");
    let mut pts = vec![C64::new(0.0, 0.0)];
    if radius <= 0.0 {
        return pts;
    }
    let nr = (2.0 / tol).ceil().max(2.0) as usize;
    let na = (TAU / tol).ceil() as usize;
    for i in 1..nr {
        let r = radius * i as f64 / (nr - 1) as f64;
        for j in 0..na {
            pts.push(C64::from_polar(r, TAU * j as f64 / na as f64));
        }
    }
    pts
}

/// `{μ̂(n) : |n| ≤ n_max, n ∈ subset}` in increasing order of `n`.
pub fn transform_closure_sample(mu: &MixedMeasure, n_max: u64, subset: Subset) -> SpectrumSample {
    let ev = TransformEvaluator::new(mu);
    let ns: Vec<i64> = (-(n_max as i64)..=n_max as i64)
        .filter(|&n| subset.admits(n))
        .collect();
    SpectrumSample {
        points: par::map_slice(&ns, |&n| ev.coefficient(n)),
        grid_spec: GridSpec::Transform { n_max, subset },
    }
}

/// Character values on a torus grid, plus the refined maximizer when
/// `refine > 0`. The resolution is halved as needed to stay within
/// `MAX_SAMPLE_POINTS`.
pub fn spectrum_sample(mu: &DiscreteMeasure, grid: usize, refine: usize) -> Result<SpectrumSample> {
    if grid == 0 {
        return Err(Error::InvalidArgument("grid must be positive".into()));
    }
    let poly = char_polynomial(mu)?;
    let (mut points, resolution) = character::grid_values(&poly, grid, MAX_SAMPLE_POINTS)?;
    if refine > 0 && grid >= 16 {
        points.push(torus_max(&poly, grid, refine)?.point);
    }
    Ok(SpectrumSample {
        points,
        grid_spec: GridSpec::Torus {
            resolution,
            refine_iters: refine,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NaturalSpectrumCheck {
    pub distance: f64,
    pub tol: f64,
    pub passed: bool,
    pub spectrum: GridSpec,
    pub spectrum_points: usize,
    pub transform: GridSpec,
    pub transform_points: usize,
}

/// Hausdorff distance between the character-image sample and the
/// coefficient sample over `|n| ≤ n_max`.
pub fn natural_spectrum_check(
    mu: &DiscreteMeasure,
    n_max: u64,
    grid: usize,
    tol: f64,
) -> Result<NaturalSpectrumCheck> {
    let spec = spectrum_sample(mu, grid, 0)?;
    let coeffs = transform_closure_sample(&mu.clone().into(), n_max, Subset::All);
    let distance = hausdorff(&spec.points, &coeffs.points)?;
    Ok(NaturalSpectrumCheck {
        distance,
        tol,
        passed: distance < tol,
        spectrum: spec.grid_spec,
        spectrum_points: spec.points.len(),
        transform: coeffs.grid_spec,
        transform_points: coeffs.points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::{Angle, Generator, GeneratorBasis};
    use crate::measure::{make_rho, make_theta0, make_theta1};
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

    fn rho() -> DiscreteMeasure {
        make_rho(basis(), &Angle::generator(0, 2), &Angle::generator(1, 2)).unwrap()
    }

    #[test]
    fn disk_grid_shape() {
        let g = disk_grid(1.0, 0.05);
        assert_eq!(g.len(), 4915);
        assert!(g.iter().all(|p| p.norm() <= 1.0 + 1e-15));
        assert_eq!(disk_grid(0.0, 0.05), vec![C64::new(0.0, 0.0)]);
        let big = disk_grid(3.0, 0.05);
        assert!((big.iter().map(|p| p.norm()).fold(0.0, f64::max) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn theta_samples() {
        let t0: MixedMeasure = make_theta0(basis()).into();
        let s = transform_closure_sample(&t0, 10, Subset::All);
        assert_eq!(s.points.len(), 21);
        for (i, p) in s.points.iter().enumerate() {
            let n = i as i64 - 10;
            assert_eq!(
                *p,
                if n % 2 == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            );
        }
        let t1 = spectrum_sample(&make_theta1(basis()), 64, 0).unwrap();
        assert_eq!(t1.points, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let check = natural_spectrum_check(&make_theta1(basis()), 100, 64, 0.05).unwrap();
        assert_eq!(check.distance, 0.0);
        assert!(check.passed);
    }

    #[test]
    fn rho_zero_mode_contains_one() {
        let s = transform_closure_sample(&rho().into(), 0, Subset::All);
        assert_eq!(s.points, vec![C64::new(1.0, 0.0)]);
        assert!(transform_closure_sample(&rho().into(), 0, Subset::Odd)
            .points
            .is_empty());
    }

    #[test]
    fn dirac_lies_on_circle() {
        let d =
            DiscreteMeasure::dirac(basis(), Angle::generator(0, 2), C64::new(1.0, 0.0)).unwrap();
        let s = spectrum_sample(&d, 128, 0).unwrap();
        assert_eq!(s.points.len(), 128);
        assert!(s.points.iter().all(|p| (p.norm() - 1.0).abs() < 1e-15));
        let check = natural_spectrum_check(&d, 2000, 128, 0.05).unwrap();
        assert!(check.distance < TAU / 128.0, "{}", check.distance);
    }

    #[test]
    fn rho_sample_fills_the_disk() {
        // brute-force reference: 0.027667887112307946 at grid 512 against
        // the tol-0.05 disk grid, 0.005555223673918979 against tol 0.01
        let s = spectrum_sample(&rho(), 512, 0).unwrap();
        assert_eq!(s.points.len(), 512 * 512);
        let d = hausdorff(&s.points, &disk_grid(1.0, 0.05)).unwrap();
        assert!((d - 0.027667887112307946).abs() < 1e-12, "{d}");
        let d = hausdorff(&s.points, &disk_grid(1.0, 0.01)).unwrap();
        assert!((d - 0.005555223673918979).abs() < 1e-12, "{d}");
    }

    #[test]
    fn csv_rows() {
        let s = SpectrumSample {
            points: vec![C64::new(0.5, -1.0), C64::new(0.0, 0.1)],
            grid_spec: GridSpec::Torus {
                resolution: 4,
                refine_iters: 0,
            },
        };
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "re,im\n0.5,-1.0\n0.0,0.1\n"
        );
    }
}

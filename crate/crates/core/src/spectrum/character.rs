//! Generalized characters of finitely supported discrete measures.
//!
//! Write every atom position as `2π·m_j/L + Σ e_{ji} γ_i` with one common
//! torsion order `L`. A character of the discrete circle sends `2π/L` to an
//! `L`-th root of unity `ω` and each independent generator `γ_i` to a free
//! unit complex number `z_i`, so
//!
//! ```text
//! φ(μ) = Σ_j c_j ω^{m_j} Π_i z_i^{e_{ji}}.
//! ```
//!
//! The closure of these values is the spectrum of μ, and the largest modulus
//! is its spectral radius.
//!
//! Each torsion choice is handled as a separate slice. Terms sharing an
//! exponent vector are merged after the root of unity is folded in, and
//! generators whose terms cancel are dropped from that slice's grid. For
//! `μ∗θ₀`-type measures half the slices lose a whole block of generators
//! this way, which buys a much finer grid on the rest.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_traits::ToPrimitive;

use crate::angle::{common_denominator, turns_numerator_over};
use crate::error::{Error, Result};
use crate::measure::transform::root_of_unity;
use crate::measure::{DiscreteMeasure, C64};
use crate::par;

/// Largest number of free generators handled by the torus routines.
pub const MAX_FREE_DIMS: usize = 4;

/// Cap on the points one torus-maximization level evaluates.
pub const MAX_GRID_POINTS: usize = 1 << 24;

/// Relative size below which merged slice coefficients count as cancelled.
const CANCEL_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct CharacterTerm {
    /// Torsion exponent in `0..L`.
    pub m: u64,
    /// Exponents of the free generators, indexed like `CharacterPolynomial::free`.
    pub e: Vec<i64>,
    pub c: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharacterPolynomial {
    /// Torsion order `L ≥ 1`.
    pub order: u64,
    /// Basis indices of the generators that actually occur.
    pub free: Vec<usize>,
    pub terms: Vec<CharacterTerm>,
}

pub fn char_polynomial(mu: &DiscreteMeasure) -> Result<CharacterPolynomial> {
    let den = common_denominator(mu.atoms().keys());
    let order = den
        .to_u64()
        .filter(|&l| l <= 1 << 32)
        .ok_or_else(|| Error::Unsupported(format!("torsion order {den} is too large")))?;
    let free = mu.used_generators();
    let terms = mu
        .atoms()
        .iter()
        .map(|(angle, w)| CharacterTerm {
            m: turns_numerator_over(angle, &den)
                .to_u64()
                .expect("below the order"),
            e: free.iter().map(|&i| angle.coeffs()[i]).collect(),
            c: *w,
        })
        .collect();
    Ok(CharacterPolynomial { order, free, terms })
}

impl CharacterPolynomial {
    pub fn dims(&self) -> usize {
        self.free.len()
    }

    pub fn check_dims(&self) -> Result<()> {
        if self.dims() > MAX_FREE_DIMS {
            return Err(Error::UnsupportedDimension {
                free: self.dims(),
                max: MAX_FREE_DIMS,
            });
        }
        Ok(())
    }

    /// `ω^m` for `ω = e^{2πi t/L}`, exact at quarter turns.
    fn root(&self, t: u64, m: u64) -> C64 {
        let r = (t as u128 * m as u128 % self.order as u128) as u64;
        root_of_unity(self.order - r, self.order)
    }

    /// Value at torsion choice `t` (meaning `ω = e^{2πi t/L}`) and free
    /// angles `phi`.
    pub fn eval(&self, t: u64, phi: &[f64]) -> C64 {
        self.terms
            .iter()
            .map(|term| {
                let a: f64 = term.e.iter().zip(phi).map(|(e, p)| *e as f64 * p).sum();
                term.c * self.root(t, term.m) * C64::from_polar(1.0, a)
            })
            .sum()
    }

    pub(crate) fn slice(&self, t: u64) -> Slice {
        let scale: f64 = self.terms.iter().map(|x| x.c.norm()).sum();
        let mut merged: BTreeMap<&[i64], C64> = BTreeMap::new();
        for term in &self.terms {
            *merged.entry(&term.e).or_default() += term.c * self.root(t, term.m);
        }
        merged.retain(|_, c| c.norm() > CANCEL_TOL * scale);
        let active: Vec<usize> = (0..self.dims())
            .filter(|&i| merged.keys().any(|e| e[i] != 0))
            .collect();
        let (exps, coeffs) = merged
            .into_iter()
            .map(|(e, c)| (active.iter().map(|&i| e[i]).collect(), c))
            .unzip();
        Slice {
            full_dims: self.dims(),
            active,
            exps,
            coeffs,
        }
    }
}

/// One torsion choice with merged terms over its active generators.
#[derive(Clone, Debug)]
pub(crate) struct Slice {
    full_dims: usize,
    /// Positions in `CharacterPolynomial::free` that still occur.
    pub active: Vec<usize>,
    exps: Vec<Vec<i64>>,
    coeffs: Vec<C64>,
}

impl Slice {
    fn eval(&self, phi: &[f64]) -> C64 {
        self.coeffs
            .iter()
            .zip(&self.exps)
            .map(|(c, e)| {
                let a: f64 = e.iter().zip(phi).map(|(e, p)| *e as f64 * p).sum();
                *c * C64::from_polar(1.0, a)
            })
            .sum()
    }

    fn lipschitz_scale(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.exps)
            .map(|(c, e)| c.norm() * e.iter().map(|x| x.unsigned_abs() as f64).sum::<f64>())
            .sum()
    }

    /// Active angles scattered back into a full-length angle vector.
    fn full_angles(&self, phi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.full_dims];
        for (&i, &p) in self.active.iter().zip(phi) {
            out[i] = p;
        }
        out
    }

    /// Gradient ascent on `|p|²`, keeping the best iterate.
    fn ascend(&self, start: Vec<f64>, iters: usize) -> (C64, Vec<f64>) {
        let mut phi = start;
        let mut best = (self.eval(&phi), phi.clone());
        let scale = self.lipschitz_scale();
        if scale == 0.0 || phi.is_empty() {
            return best;
        }
        let step = 0.5 / (scale * scale);
        for _ in 0..iters {
            let mut p = C64::new(0.0, 0.0);
            let mut grad = vec![C64::new(0.0, 0.0); phi.len()];
            for (c, e) in self.coeffs.iter().zip(&self.exps) {
                let a: f64 = e.iter().zip(&phi).map(|(e, x)| *e as f64 * x).sum();
                let v = *c * C64::from_polar(1.0, a);
                p += v;
                for (g, e) in grad.iter_mut().zip(e) {
                    *g += C64::new(0.0, *e as f64) * v;
                }
            }
            for (x, g) in phi.iter_mut().zip(&grad) {
                *x = (*x + step * 2.0 * (p.conj() * g).re).rem_euclid(TAU);
            }
            let v = self.eval(&phi);
            if v.norm() > best.0.norm() {
                best = (v, phi.clone());
            }
        }
        best
    }
}

/// Uniform grid over a slice's active torus with a root-of-unity table.
pub(crate) struct SliceGrid<'a> {
    slice: &'a Slice,
    pub resolution: usize,
    table: Vec<C64>,
    exps: Vec<[usize; MAX_FREE_DIMS]>,
}

impl<'a> SliceGrid<'a> {
    pub fn new(slice: &'a Slice, resolution: usize) -> Self {
        let g = resolution.max(1);
        let table = (0..g)
            .map(|j| root_of_unity((g - j) as u64, g as u64))
            .collect();
        let exps = slice
            .exps
            .iter()
            .map(|e| {
                let mut row = [0usize; MAX_FREE_DIMS];
                for (r, x) in row.iter_mut().zip(e) {
                    *r = x.rem_euclid(g as i64) as usize;
                }
                row
            })
            .collect();
        Self {
            slice,
            resolution: g,
            table,
            exps,
        }
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.slice.active.len() as u32)
    }

    fn digits(&self, idx: usize) -> [usize; MAX_FREE_DIMS] {
        let mut rest = idx;
        let mut d = [0usize; MAX_FREE_DIMS];
        for x in d[..self.slice.active.len()].iter_mut().rev() {
            *x = rest % self.resolution;
            rest /= self.resolution;
        }
        d
    }

    pub fn angles(&self, idx: usize) -> Vec<f64> {
        let d = self.digits(idx);
        d[..self.slice.active.len()]
            .iter()
            .map(|&x| TAU * x as f64 / self.resolution as f64)
            .collect()
    }

    pub fn value(&self, idx: usize) -> C64 {
        let d = self.digits(idx);
        let g = self.resolution;
        let k = self.slice.active.len();
        let mut acc = C64::new(0.0, 0.0);
        for (c, e) in self.slice.coeffs.iter().zip(&self.exps) {
            let mut phase = 0usize;
            for i in 0..k {
                phase = (phase + e[i] * d[i]) % g;
            }
            acc += *c * self.table[phase];
        }
        acc
    }
}

/// Largest entry of `grid, grid/2, grid/4, …` (exact halvings) for which
/// `order · g^dims` fits `budget`. Odd grids that do not fit fall back to the
/// plain root. Halving keeps coarser grids nested inside finer ones.
pub(crate) fn effective_resolution(grid: usize, dims: usize, order: u64, budget: usize) -> usize {
    if dims == 0 {
        return 1;
    }
    let fits = |g: usize| (g as f64).powi(dims as i32) * order as f64 <= budget as f64;
    let mut g = grid.max(1);
    while !fits(g) && g.is_multiple_of(2) && g > 1 {
        g /= 2;
    }
    if fits(g) {
        g
    } else {
        ((budget as f64 / order as f64)
            .powf(1.0 / dims as f64)
            .floor() as usize)
            .max(1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusMax {
    pub value: f64,
    pub point: C64,
    /// Torsion choice `t` of the maximizer, `ω = e^{2πi t/L}`.
    pub torsion: u64,
    /// Free angles of the maximizer, indexed like `CharacterPolynomial::free`.
    pub angles: Vec<f64>,
    /// Finest per-dimension resolution evaluated.
    pub resolution: usize,
}

fn slice_max(slice: &Slice, resolution: usize, refine_iters: usize) -> (C64, Vec<f64>) {
    let grid = SliceGrid::new(slice, resolution);
    let (idx, _) =
        par::argmax(0..grid.len(), |i| grid.value(i).norm()).expect("grid is never empty");
    let start = grid.angles(idx);
    let on_grid = grid.value(idx);
    let (v, phi) = slice.ascend(start.clone(), refine_iters);
    if v.norm() > on_grid.norm() {
        (v, phi)
    } else {
        (on_grid, start)
    }
}

/// Largest `|p|` found over all torsion roots and a uniform torus grid,
/// refined by gradient ascent from the best grid point.
///
/// Every halving of the grid down to 16 is evaluated as well and the best
/// result kept, so refining the grid never lowers the answer. The value is
/// attained by a character, hence a lower bound on the spectral radius.
pub fn torus_max(poly: &CharacterPolynomial, grid: usize, refine_iters: usize) -> Result<TorusMax> {
    poly.check_dims()?;
    if grid < 16 {
        return Err(Error::InvalidArgument("grid must be at least 16".into()));
    }
    let mut best = TorusMax {
        value: f64::NEG_INFINITY,
        point: C64::new(0.0, 0.0),
        torsion: 0,
        angles: vec![0.0; poly.dims()],
        resolution: 1,
    };
    for t in 0..poly.order {
        let slice = poly.slice(t);
        let top = effective_resolution(grid, slice.active.len(), poly.order, MAX_GRID_POINTS);
        best.resolution = best.resolution.max(top);
        let mut levels = vec![top];
        let mut g = top;
        while !slice.active.is_empty() && g.is_multiple_of(2) && g / 2 >= 16 {
            g /= 2;
            levels.push(g);
        }
        for &g in levels.iter().rev() {
            let (v, phi) = slice_max(&slice, g, refine_iters);
            if v.norm() > best.value {
                best.value = v.norm();
                best.point = v;
                best.torsion = t;
                best.angles = slice.full_angles(&phi);
            }
        }
    }
    Ok(best)
}

/// Character values over every torsion slice at a grid resolution fitting
/// `budget` points in total. Returns the values in slice order and the
/// finest resolution used.
pub(crate) fn grid_values(
    poly: &CharacterPolynomial,
    grid: usize,
    budget: usize,
) -> Result<(Vec<C64>, usize)> {
    poly.check_dims()?;
    let mut out = Vec::new();
    let mut finest = 1;
    for t in 0..poly.order {
        let slice = poly.slice(t);
        let g = effective_resolution(grid, slice.active.len(), poly.order, budget);
        finest = finest.max(g);
        let sg = SliceGrid::new(&slice, g);
        out.extend(par::map_range(0..sg.len(), |i| sg.value(i)));
    }
    Ok((out, finest))
}

/// Statistics of the character image against reference points.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageCoverage {
    /// Largest modulus over the evaluated character values.
    pub max_modulus: f64,
    /// `sup_{q∈reference} dist(q, image)`, or infinity when some reference
    /// point has no image point within the search radius.
    pub coverage: f64,
    pub resolution: usize,
    pub points: usize,
}

/// Character values indexed per block, so memory stays bounded for fine grids.
const COVERAGE_BLOCK: usize = 1 << 20;

/// Evaluates the character image block by block, indexes each block and
/// lowers the nearest distance of every reference point against it. Only
/// image points within `radius` of a reference point are looked at.
pub fn image_coverage(
    poly: &CharacterPolynomial,
    grid: usize,
    reference: &[C64],
    radius: f64,
) -> Result<ImageCoverage> {
    use super::hausdorff::PointIndex;

    poly.check_dims()?;
    if reference.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut max_modulus = 0.0f64;
    let mut nearest = vec![f64::INFINITY; reference.len()];
    let mut finest = 1;
    let mut points = 0;
    for t in 0..poly.order {
        let slice = poly.slice(t);
        let g = effective_resolution(grid, slice.active.len(), poly.order, MAX_GRID_POINTS);
        finest = finest.max(g);
        let sg = SliceGrid::new(&slice, g);
        points += sg.len();
        for start in (0..sg.len()).step_by(COVERAGE_BLOCK) {
            let end = (start + COVERAGE_BLOCK).min(sg.len());
            let values = par::map_range(start..end, |i| sg.value(i));
            max_modulus = values.iter().fold(max_modulus, |m, v| m.max(v.norm()));
            let index = PointIndex::new(&values)?;
            let near = par::map_slice(reference, |q| index.nearest_within(*q, radius));
            for (x, y) in nearest.iter_mut().zip(near) {
                *x = x.min(y);
            }
        }
    }
    Ok(ImageCoverage {
        max_modulus,
        coverage: nearest.into_iter().fold(0.0, f64::max),
        resolution: finest,
        points,
    })
}

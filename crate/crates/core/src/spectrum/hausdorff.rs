//! Exact nearest-neighbour distances between finite planar point clouds,
//! accelerated by a uniform bucket grid.

use crate::error::{Error, Result};
use crate::measure::C64;
use crate::par;

/// Uniform bucket grid over a point cloud.
#[derive(Clone, Debug)]
pub struct PointIndex {
    points: Vec<C64>,
    origin: C64,
    cell: f64,
    nx: usize,
    ny: usize,
    /// `starts[c]..starts[c + 1]` indexes `order` for cell `c`.
    starts: Vec<usize>,
    order: Vec<usize>,
}

impl PointIndex {
    pub fn new(points: &[C64]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        let (mut lo, mut hi) = (points[0], points[0]);
        for p in points {
            lo.re = lo.re.min(p.re);
            lo.im = lo.im.min(p.im);
            hi.re = hi.re.max(p.re);
            hi.im = hi.im.max(p.im);
        }
        let w = (hi.re - lo.re).max(1e-12);
        let h = (hi.im - lo.im).max(1e-12);
        let target_cells = (points.len() as f64).clamp(1.0, 4.0e6);
        let cell = ((w * h) / target_cells)
            .sqrt()
            .max(w.max(h) / 2048.0)
            .max(1e-12);
        let nx = ((w / cell).floor() as usize + 1).min(4096);
        let ny = ((h / cell).floor() as usize + 1).min(4096);

        let mut index = Self {
            points: points.to_vec(),
            origin: lo,
            cell,
            nx,
            ny,
            starts: Vec::new(),
            order: Vec::new(),
        };
        let cells: Vec<usize> = points.iter().map(|p| index.cell_of(*p)).collect();
        let mut counts = vec![0usize; nx * ny + 1];
        for &c in &cells {
            counts[c + 1] += 1;
        }
        for i in 0..nx * ny {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut order = vec![0usize; points.len()];
        for (i, &c) in cells.iter().enumerate() {
            order[fill[c]] = i;
            fill[c] += 1;
        }
        index.starts = counts;
        index.order = order;
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn coords(&self, p: C64) -> (i64, i64) {
        (
            ((p.re - self.origin.re) / self.cell).floor() as i64,
            ((p.im - self.origin.im) / self.cell).floor() as i64,
        )
    }

    fn cell_of(&self, p: C64) -> usize {
        let (x, y) = self.coords(p);
        let x = x.clamp(0, self.nx as i64 - 1) as usize;
        let y = y.clamp(0, self.ny as i64 - 1) as usize;
        y * self.nx + x
    }

    fn bucket(&self, x: i64, y: i64) -> &[usize] {
        if x < 0 || y < 0 || x >= self.nx as i64 || y >= self.ny as i64 {
            return &[];
        }
        let c = y as usize * self.nx + x as usize;
        &self.order[self.starts[c]..self.starts[c + 1]]
    }

    /// Distance from `q` to the nearest indexed point.
    pub fn nearest_distance(&self, q: C64) -> f64 {
        self.nearest_within(q, f64::INFINITY)
    }

    /// Distance from `q` to the nearest indexed point, or infinity when no
    /// point lies within `cap`. The search never leaves the `cap` box, so far
    /// queries stay cheap.
    pub fn nearest_within(&self, q: C64, cap: f64) -> f64 {
        let (qx, qy) = self.coords(q);
        // clamp the starting cell into the grid; rings then grow outward
        let cx = qx.clamp(0, self.nx as i64 - 1);
        let cy = qy.clamp(0, self.ny as i64 - 1);
        // distance from q to the clamped cell block, lower bound for ring 0
        let outside = {
            let dx = (self.origin.re - q.re)
                .max(q.re - (self.origin.re + self.nx as f64 * self.cell))
                .max(0.0);
            let dy = (self.origin.im - q.im)
                .max(q.im - (self.origin.im + self.ny as f64 * self.cell))
                .max(0.0);
            (dx * dx + dy * dy).sqrt()
        };
        if outside > cap {
            return f64::INFINITY;
        }
        let mut best = f64::INFINITY;
        let mut max_ring = self.nx.max(self.ny) as i64 + 1;
        if cap.is_finite() {
            max_ring = max_ring.min((cap / self.cell).ceil() as i64 + 1);
        }
        for r in 0..=max_ring {
            if r > 0 && best <= outside.max((r - 1) as f64 * self.cell) {
                break;
            }
            for x in (cx - r)..=(cx + r) {
                for y in (cy - r)..=(cy + r) {
                    if (x - cx).abs() != r && (y - cy).abs() != r {
                        continue;
                    }
                    for &i in self.bucket(x, y) {
                        let d = (self.points[i] - q).norm();
                        if d < best {
                            best = d;
                        }
                    }
                }
            }
        }
        if best <= cap {
            best
        } else {
            f64::INFINITY
        }
    }

    /// Indices of indexed points within distance `radius` of `q`.
    pub fn within(&self, q: C64, radius: f64, out: &mut Vec<usize>) {
        out.clear();
        let lo = self.coords(q - C64::new(radius, radius));
        let hi = self.coords(q + C64::new(radius, radius));
        let x0 = lo.0.max(0);
        let y0 = lo.1.max(0);
        let x1 = hi.0.min(self.nx as i64 - 1);
        let y1 = hi.1.min(self.ny as i64 - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                for &i in self.bucket(x, y) {
                    if (self.points[i] - q).norm() <= radius {
                        out.push(i);
                    }
                }
            }
        }
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }
}

/// `sup_{a∈A} dist(a, B)`.
pub fn directed_hausdorff(a: &[C64], b: &[C64]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let index = PointIndex::new(b)?;
    Ok(par::max_f64(0..a.len(), |i| index.nearest_distance(a[i])))
}

/// Symmetric Hausdorff distance between two finite clouds.
pub fn hausdorff(a: &[C64], b: &[C64]) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

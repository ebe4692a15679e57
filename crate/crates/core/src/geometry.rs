//! Box domains, candidate grids (η-nets), fill and separation distances.

use crate::error::{Error, Result};

/// Largest grid `tensor_grid` will build unless told otherwise.
pub const DEFAULT_GRID_CAP: usize = 2_000_000;

pub(crate) fn dist2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    dist2(x, y).sqrt()
}

/// Axis-aligned box `[lower, upper]` in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::arg("domain bounds must be nonempty and of equal length"));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::arg(format!("invalid axis bounds [{l}, {u}]")));
            }
        }
        Ok(Domain { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Domain::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }

    /// Radius of the smallest ball centred at the box centre containing the box.
    pub fn radius(&self) -> f64 {
        0.5 * dist(&self.lower, &self.upper)
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius()
    }

    /// Largest Euclidean norm of any point in the box.
    pub fn max_norm(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| (l * l).max(u * u)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| *l <= *v && *v <= *u)
    }
}

/// Shape of an endpoint-inclusive tensor grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorShape {
    pub domain: Domain,
    pub points_per_axis: usize,
}

impl TensorShape {
    /// Per-axis indices of flat index `idx` (lowest axis fastest).
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let m = self.points_per_axis;
        (0..self.domain.dim())
            .map(|_| {
                let i = idx % m;
                idx /= m;
                i
            })
            .collect()
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().rev().fold(0, |acc, &i| acc * self.points_per_axis + i)
    }

    pub(crate) fn coordinate(&self, axis: usize, i: usize) -> f64 {
        let lo = self.domain.lower[axis];
        let hi = self.domain.upper[axis];
        // Written as a ratio so nested grids (m -> 2m-1) share coordinates bitwise.
        lo + (hi - lo) * (i as f64 / (self.points_per_axis - 1) as f64)
    }

    /// Index of the grid point nearest to `x`, axis by axis.
    pub fn nearest_index(&self, x: &[f64]) -> usize {
        let m = self.points_per_axis;
        let multi: Vec<usize> = (0..self.domain.dim())
            .map(|a| {
                let lo = self.domain.lower[a];
                let hi = self.domain.upper[a];
                let t = ((x[a] - lo) / (hi - lo) * (m - 1) as f64).round();
                t.clamp(0.0, (m - 1) as f64) as usize
            })
            .collect();
        self.flat_index(&multi)
    }
}

/// Finite candidate set `G ⊂ Ω` together with its covering radius η.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid {
    dim: usize,
    coords: Vec<f64>,
    spacing: f64,
    shape: Option<TensorShape>,
}

impl CandidateGrid {
    /// Arbitrary point set; `spacing` is the caller's covering radius for Ω.
    pub fn from_points(points: &[Vec<f64>], spacing: f64) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        if dim == 0 {
            return Err(Error::arg("grid needs at least one point of positive dimension"));
        }
        if !(spacing >= 0.0 && spacing.is_finite()) {
            return Err(Error::arg("grid spacing must be finite and nonnegative"));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::arg("grid points have inconsistent dimension"));
            }
            coords.extend_from_slice(p);
        }
        let grid = CandidateGrid { dim, coords, spacing, shape: None };
        if let Some((i, j)) = grid.find_duplicate() {
            return Err(Error::arg(format!("grid points {i} and {j} coincide")));
        }
        Ok(grid)
    }

    fn find_duplicate(&self) -> Option<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.point(a)
                .iter()
                .zip(self.point(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        order.windows(2).find(|w| self.point(w[0]) == self.point(w[1])).map(|w| (w[0].min(w[1]), w[0].max(w[1])))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Covering radius η of the grid in its domain.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn tensor_shape(&self) -> Option<&TensorShape> {
        self.shape.as_ref()
    }
}

/// Endpoint-inclusive uniform grid with `m` points per axis, capped at [`DEFAULT_GRID_CAP`].
pub fn tensor_grid(domain: &Domain, points_per_axis: usize) -> Result<CandidateGrid> {
    tensor_grid_with_cap(domain, points_per_axis, DEFAULT_GRID_CAP)
}

pub fn tensor_grid_with_cap(domain: &Domain, m: usize, cap: usize) -> Result<CandidateGrid> {
    if m < 2 {
        return Err(Error::arg("tensor grid needs at least 2 points per axis"));
    }
    let dim = domain.dim();
    let total = (0..dim).try_fold(1usize, |acc, _| acc.checked_mul(m));
    let total = match total {
        Some(t) if t <= cap => t,
        _ => {
            return Err(Error::Resource(format!("{m}^{dim} grid points exceed the cap of {cap}")));
        }
    };
    let shape = TensorShape { domain: domain.clone(), points_per_axis: m };
    let axes: Vec<Vec<f64>> = (0..dim).map(|a| (0..m).map(|i| shape.coordinate(a, i)).collect()).collect();
    let mut coords = Vec::with_capacity(total * dim);
    for idx in 0..total {
        let mut rest = idx;
        for axis in &axes {
            coords.push(axis[rest % m]);
            rest /= m;
        }
    }
    let half_diag = 0.5
        * domain
            .lower()
            .iter()
            .zip(domain.upper())
            .map(|(l, u)| {
                let h = (u - l) / (m - 1) as f64;
                h * h
            })
            .sum::<f64>()
            .sqrt();
    Ok(CandidateGrid { dim, coords, spacing: half_diag, shape: Some(shape) })
}

/// Ordered pivot locations `z_1, …, z_n` (selection order).
#[derive(Debug, Clone, PartialEq)]
pub struct PivotSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PivotSet {
    pub fn new(dim: usize) -> Self {
        PivotSet { dim, coords: Vec::new() }
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).ok_or_else(|| Error::arg("empty pivot list"))?;
        let mut set = PivotSet::new(dim);
        for p in points {
            set.push(p)?;
        }
        Ok(set)
    }

    pub fn from_grid(grid: &CandidateGrid, indices: &[usize]) -> Result<Self> {
        let mut set = PivotSet::new(grid.dim());
        for &i in indices {
            if i >= grid.len() {
                return Err(Error::arg(format!("grid index {i} out of range")));
            }
            set.push(grid.point(i))?;
        }
        Ok(set)
    }

    /// Appends a pivot; rejects wrong dimension or duplicates.
    pub fn push(&mut self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(Error::arg(format!("pivot has dimension {}, expected {}", z.len(), self.dim)));
        }
        if self.iter().any(|p| p == z) {
            return Err(Error::arg(format!("duplicate pivot {z:?}")));
        }
        self.coords.extend_from_slice(z);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }
}

/// Max over grid points of the distance to the nearest pivot.
///
/// This is the grid estimate of `h_Z = sup_{x∈Ω} min_i ‖x − z_i‖`; the true
/// fill distance is at most the returned value plus `grid.spacing()`.
pub fn fill_distance(pivots: &PivotSet, grid: &CandidateGrid) -> Result<f64> {
    if pivots.is_empty() {
        return Err(Error::arg("fill distance of an empty pivot set"));
    }
    if pivots.dim() != grid.dim() {
        return Err(Error::arg("pivot and grid dimensions differ"));
    }
    Ok(grid
        .points()
        .map(|x| pivots.iter().map(|z| dist2(x, z)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
        .sqrt())
}

/// `min_{i<j} ‖z_i − z_j‖` by exhaustive scan.
pub fn min_separation(pivots: &PivotSet) -> Result<f64> {
    if pivots.len() < 2 {
        return Err(Error::arg("separation needs at least two pivots"));
    }
    let mut best = f64::INFINITY;
    for i in 0..pivots.len() {
        for j in 0..i {
            best = best.min(dist2(pivots.get(i), pivots.get(j)));
        }
    }
    Ok(best.sqrt())
}

/// `2R / (n^{1/d} − 1)`: the largest possible minimum separation of `n` points
/// in a ball of radius `R`.
pub fn packing_bound(domain: &Domain, n: usize) -> Result<f64> {
    if n <= 1 {
        return Err(Error::arg("packing bound needs n > 1"));
    }
    let d = domain.dim() as f64;
    Ok(2.0 * domain.radius() / ((n as f64).powf(1.0 / d) - 1.0))
}

/// Incrementally maintained distances from every grid point to the nearest pivot.
#[derive(Debug, Clone)]
pub struct NearestPivotTracker {
    nearest2: Vec<f64>,
    pivots: PivotSet,
    min_sep2: f64,
}

impl NearestPivotTracker {
    pub fn new(grid: &CandidateGrid) -> Self {
        NearestPivotTracker {
            nearest2: vec![f64::INFINITY; grid.len()],
            pivots: PivotSet::new(grid.dim()),
            min_sep2: f64::INFINITY,
        }
    }

    pub fn from_indices(grid: &CandidateGrid, indices: &[usize]) -> Result<Self> {
        let mut t = NearestPivotTracker::new(grid);
        for &i in indices {
            t.add(grid, grid.point(i))?;
        }
        Ok(t)
    }

    pub fn add(&mut self, grid: &CandidateGrid, z: &[f64]) -> Result<()> {
        for p in self.pivots.iter() {
            self.min_sep2 = self.min_sep2.min(dist2(p, z));
        }
        self.pivots.push(z)?;
        for (d2, x) in self.nearest2.iter_mut().zip(grid.points()) {
            *d2 = d2.min(dist2(x, z));
        }
        Ok(())
    }

    /// Distance from grid point `i` to the nearest pivot.
    pub fn distance(&self, i: usize) -> f64 {
        self.nearest2[i].sqrt()
    }

    pub fn fill(&self) -> Option<f64> {
        (!self.pivots.is_empty()).then(|| self.nearest2.iter().copied().fold(0.0, f64::max).sqrt())
    }

    pub fn min_separation(&self) -> Option<f64> {
        (self.pivots.len() >= 2).then(|| self.min_sep2.sqrt())
    }

    pub fn pivots(&self) -> &PivotSet {
        &self.pivots
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Domain {
        Domain::cube(1, 0.0, 1.0).unwrap()
    }

    #[test]
    fn tensor_grid_small_cases() {
        let g = tensor_grid(&unit(), 3).unwrap();
        let pts: Vec<f64> = g.points().map(|p| p[0]).collect();
        assert_eq!(pts, vec![0.0, 0.5, 1.0]);
        assert_eq!(g.spacing(), 0.25);

        let g = tensor_grid(&Domain::cube(2, 0.0, 1.0).unwrap(), 2).unwrap();
        assert_eq!(g.len(), 4);
        assert!((g.spacing() - 2f64.sqrt() / 2.0).abs() < 1e-15);
        // lowest axis fastest
        assert_eq!(g.point(1), &[1.0, 0.0]);
        assert_eq!(g.point(2), &[0.0, 1.0]);

        let g = tensor_grid(&Domain::cube(1, -1.0, 1.0).unwrap(), 5).unwrap();
        let pts: Vec<f64> = g.points().map(|p| p[0]).collect();
        assert_eq!(pts, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(g.spacing(), 0.25);
    }

    #[test]
    fn grid_cap_is_enforced() {
        let d = Domain::cube(3, 0.0, 1.0).unwrap();
        assert!(matches!(tensor_grid_with_cap(&d, 11, 1000), Err(Error::Resource(_))));
        assert!(tensor_grid_with_cap(&d, 10, 1000).is_ok());
        assert!(matches!(tensor_grid(&d, 1), Err(Error::Argument(_))));
    }

    #[test]
    fn nested_grids_share_coordinates() {
        let d = Domain::cube(2, -1.0, 1.0).unwrap();
        let coarse = tensor_grid(&d, 21).unwrap();
        let fine = tensor_grid(&d, 41).unwrap();
        let cs = coarse.tensor_shape().unwrap();
        let fs = fine.tensor_shape().unwrap();
        for i in 0..coarse.len() {
            let multi: Vec<usize> = cs.multi_index(i).iter().map(|k| 2 * k).collect();
            assert_eq!(coarse.point(i), fine.point(fs.flat_index(&multi)));
        }
    }

    #[test]
    fn fill_distance_examples() {
        let g = tensor_grid(&unit(), 101).unwrap();
        let p = PivotSet::from_points(&[vec![0.5]]).unwrap();
        assert!((fill_distance(&p, &g).unwrap() - 0.5).abs() < 1e-15);
        let p = PivotSet::from_points(&[vec![0.0], vec![1.0]]).unwrap();
        assert!((fill_distance(&p, &g).unwrap() - 0.5).abs() < 1e-15);
        let all: Vec<usize> = (0..g.len()).collect();
        let p = PivotSet::from_grid(&g, &all).unwrap();
        assert_eq!(fill_distance(&p, &g).unwrap(), 0.0);
        assert!(fill_distance(&PivotSet::new(1), &g).is_err());
    }

    #[test]
    fn separation_examples() {
        let p = PivotSet::from_points(&[vec![0.0], vec![0.3], vec![1.0]]).unwrap();
        assert!((min_separation(&p).unwrap() - 0.3).abs() < 1e-15);
        assert!(PivotSet::from_points(&[vec![0.0], vec![0.0]]).is_err());
        assert!(min_separation(&PivotSet::from_points(&[vec![0.0]]).unwrap()).is_err());
    }

    #[test]
    fn packing_bound_examples() {
        let d1 = Domain::cube(1, -1.0, 1.0).unwrap();
        assert_eq!(packing_bound(&d1, 2).unwrap(), 2.0);
        assert!((packing_bound(&d1, 101).unwrap() - 0.02).abs() < 1e-15);
        let d2 = Domain::new(vec![-1.0 / 2f64.sqrt(); 2], vec![1.0 / 2f64.sqrt(); 2]).unwrap();
        assert!((d2.radius() - 1.0).abs() < 1e-15);
        assert!((packing_bound(&d2, 9).unwrap() - 1.0).abs() < 1e-12);
        assert!(packing_bound(&d1, 1).is_err());
    }

    #[test]
    fn domain_radius_is_half_diagonal() {
        let d = Domain::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        assert!((d.radius() - 2f64.sqrt()).abs() < 1e-15);
        assert!(Domain::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn from_points_rejects_duplicates() {
        let pts = vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![0.0, 1.0]];
        assert!(CandidateGrid::from_points(&pts, 0.1).is_err());
    }

    #[test]
    fn tensor_fill_bound_on_unit_cube() {
        for dim in 1..=3 {
            let d = Domain::cube(dim, 0.0, 1.0).unwrap();
            let grid = tensor_grid(&d, [201, 41, 13][dim - 1]).unwrap();
            for m in [2usize, 3, 5] {
                let pivots = tensor_grid(&d, m).unwrap();
                let set = PivotSet::from_points(&pivots.points().map(<[f64]>::to_vec).collect::<Vec<_>>()).unwrap();
                let h = fill_distance(&set, &grid).unwrap();
                assert!(h <= (dim as f64).sqrt() / (2.0 * (m - 1) as f64) + 1e-12);
            }
        }
    }
}

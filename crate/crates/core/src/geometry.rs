//! Physical parameters, boundary measures, and radial grids.
//!
//! The plate radius is normalized to 1 and every quantity is non-dimensional;
//! gravity enters only through the Bond number `g`. The container radius is
//! either a finite ratio `R > 1` or infinite, in which case computations run
//! on a truncated annulus `[1, R_trunc]` with a Dirichlet far-field closure.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Minimum number of grid nodes accepted by [`make_grid`].
pub const MIN_GRID_NODES: usize = 16;

/// Container-to-plate radius ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ContainerRatio {
    Finite(f64),
    Infinite,
}

impl ContainerRatio {
    pub fn is_finite(&self) -> bool {
        matches!(self, ContainerRatio::Finite(_))
    }
}

/// Physical and geometric constants for one problem instance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Params {
    /// Ambient dimension (2 or 3).
    pub d: u32,
    /// Bond number, strictly positive.
    pub g: f64,
    /// Plate Young cosine, `cos θ_Yp`.
    pub cos_yp: f64,
    /// Container Young cosine, `cos θ_Yc`.
    pub cos_yc: f64,
    /// Advancing friction coefficient `μ₊ ≥ 0`.
    pub mu_plus: f64,
    /// Receding friction coefficient `μ₋ ≥ 0`.
    pub mu_minus: f64,
    /// Container-to-plate ratio.
    pub r: ContainerRatio,
    /// Truncation radius used when `r` is infinite.
    pub r_trunc: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            d: 3,
            g: 1.0,
            cos_yp: 0.0,
            cos_yc: 0.0,
            mu_plus: 0.0,
            mu_minus: 0.0,
            r: ContainerRatio::Finite(8.0),
            r_trunc: 20.0,
        }
    }
}

impl Params {
    /// Outer radius of the computational annulus (`R` or `R_trunc`).
    pub fn outer_radius(&self) -> f64 {
        match self.r {
            ContainerRatio::Finite(r) => r,
            ContainerRatio::Infinite => self.r_trunc,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite()
    }

    /// `ℋ^{d-2}(∂B_1)`, the measure of the plate contact line.
    pub fn sigma(&self) -> f64 {
        sigma_dm2(self.d)
    }

    /// Height ceiling for valid profiles, `50/√g`. Breaches signal divergence.
    pub fn h_max(&self) -> f64 {
        50.0 / self.g.sqrt()
    }

    /// Checks every parameter invariant, returning one message per violation.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.d != 2 && self.d != 3 {
            v.push(format!("d = {} not in {{2, 3}}", self.d));
        }
        if !(self.g > 0.0) {
            v.push(format!("g = {} must be positive", self.g));
        }
        if !(self.cos_yc.abs() < 1.0) {
            v.push(format!("|cos_yc| = {} not < 1", self.cos_yc.abs()));
        }
        if self.mu_plus < 0.0 {
            v.push(format!("mu_plus = {} must be nonnegative", self.mu_plus));
        }
        if self.mu_minus < 0.0 {
            v.push(format!("mu_minus = {} must be nonnegative", self.mu_minus));
        }
        let lo = self.cos_yp - self.mu_plus;
        let hi = self.cos_yp + self.mu_minus;
        if !(lo > -1.0) {
            v.push(format!("cos_yp - mu_plus = {lo} not in (-1, 1)"));
        }
        if !(hi < 1.0) {
            v.push(format!("cos_yp + mu_minus = {hi} not in (-1, 1)"));
        }
        match self.r {
            ContainerRatio::Finite(r) => {
                if !(r > 1.0) {
                    v.push(format!("R = {r} must exceed 1"));
                }
            }
            ContainerRatio::Infinite => {
                if !(self.r_trunc > 1.0) {
                    v.push(format!("R_trunc = {} must exceed 1", self.r_trunc));
                }
            }
        }
        v
    }

    /// Returns `self` if all invariants hold, otherwise the violation list.
    pub fn validated(self) -> Result<Self> {
        let v = self.violations();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidParams(v))
        }
    }
}

/// `ℋ^{d-2}(∂B_1)`: `2π` for d = 3, `2` for d = 2.
pub fn sigma_dm2(d: u32) -> f64 {
    match d {
        2 => 2.0,
        3 => 2.0 * std::f64::consts::PI,
        _ => f64::NAN,
    }
}

/// `ℋ^{d-2}(∂B_r)` in `ℝ^{d-1}`: circle circumference for d = 3, two points for d = 2.
pub fn boundary_measure(r: f64, d: u32) -> Result<f64> {
    match d {
        2 => Ok(2.0),
        3 => Ok(2.0 * std::f64::consts::PI * r),
        _ => Err(Error::UnsupportedDimension(d)),
    }
}

/// `(d-1)`-volume of the annulus `B_R \ B_1`: `π(R²-1)` for d = 3, `2(R-1)` for d = 2.
pub fn annulus_volume(outer: f64, d: u32) -> Result<f64> {
    match d {
        2 => Ok(2.0 * (outer - 1.0)),
        3 => Ok(std::f64::consts::PI * (outer * outer - 1.0)),
        _ => Err(Error::UnsupportedDimension(d)),
    }
}

/// Node distribution of a [`RadialGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grading {
    Uniform,
    /// Clusters nodes near both endpoints, where contact angles are evaluated.
    BoundaryRefined,
}

/// Strictly increasing radial nodes spanning `[1, outer]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    grading: Grading,
}

impl RadialGrid {
    /// Builds a grid from explicit nodes. Endpoints must be exact and the
    /// sequence strictly increasing.
    pub fn from_nodes(nodes: Vec<f64>, grading: Grading) -> Result<Self> {
        if nodes.len() < MIN_GRID_NODES {
            return Err(Error::GridTooSmall {
                got: nodes.len(),
                min: MIN_GRID_NODES,
            });
        }
        let mut v = Vec::new();
        if nodes[0] != 1.0 {
            v.push(format!("first node {} != 1", nodes[0]));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                v.push(format!("nodes not strictly increasing at {} -> {}", w[0], w[1]));
                break;
            }
        }
        if !v.is_empty() {
            return Err(Error::InvalidParams(v));
        }
        Ok(RadialGrid { nodes, grading })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn inner(&self) -> f64 {
        self.nodes[0]
    }

    pub fn outer(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Index of the node closest to `r`.
    pub fn nearest_node(&self, r: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, &x) in self.nodes.iter().enumerate() {
            let d = (x - r).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }
}

/// Builds a grid with `n_nodes` nodes on `[1, outer_radius(p)]`.
pub fn make_grid(p: &Params, n_nodes: usize, grading: Grading) -> Result<RadialGrid> {
    make_grid_on(p.outer_radius(), n_nodes, grading)
}

/// Grid construction on an explicit interval `[1, outer]`.
pub fn make_grid_on(outer: f64, n_nodes: usize, grading: Grading) -> Result<RadialGrid> {
    if n_nodes < MIN_GRID_NODES {
        return Err(Error::GridTooSmall {
            got: n_nodes,
            min: MIN_GRID_NODES,
        });
    }
    let m = (n_nodes - 1) as f64;
    let mut nodes: Vec<f64> = (0..n_nodes)
        .map(|i| {
            let xi = i as f64 / m;
            let t = match grading {
                Grading::Uniform => xi,
                // Chebyshev-extrema map: smallest cells adjacent to both endpoints.
                Grading::BoundaryRefined => 0.5 * (1.0 - (std::f64::consts::PI * xi).cos()),
            };
            1.0 + (outer - 1.0) * t
        })
        .collect();
    nodes[0] = 1.0;
    *nodes.last_mut().unwrap() = outer;
    RadialGrid::from_nodes(nodes, grading)
}

/// Cached quadrature data for one grid: cell widths, exact per-cell integrals
/// of the boundary measure, and trapezoid nodal weights.
///
/// For d in {2, 3} the boundary measure is affine in r, so the trapezoid cell
/// integral equals the exact integral and `weights` sum to the annulus volume
/// exactly.
#[derive(Debug, Clone)]
pub struct GridMeasure {
    pub d: u32,
    /// Cell widths `r_{i+1} - r_i` (len = n-1).
    pub dr: Vec<f64>,
    /// Per-cell integral of the boundary measure (len = n-1).
    pub cell_bm: Vec<f64>,
    /// Trapezoid nodal weights of the boundary measure (len = n).
    pub weights: Vec<f64>,
    /// Boundary measure at each node (len = n).
    pub bm: Vec<f64>,
}

impl GridMeasure {
    pub fn new(grid: &RadialGrid, d: u32) -> Result<Self> {
        if d != 2 && d != 3 {
            return Err(Error::UnsupportedDimension(d));
        }
        let r = grid.nodes();
        let n = r.len();
        let bm: Vec<f64> = r.iter().map(|&x| boundary_measure(x, d).unwrap()).collect();
        let mut dr = Vec::with_capacity(n - 1);
        let mut cell_bm = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let w = r[i + 1] - r[i];
            dr.push(w);
            cell_bm.push(0.5 * (bm[i] + bm[i + 1]) * w);
        }
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            weights[i] += 0.5 * bm[i] * dr[i];
            weights[i + 1] += 0.5 * bm[i + 1] * dr[i];
        }
        Ok(GridMeasure {
            d,
            dr,
            cell_bm,
            weights,
            bm,
        })
    }

    /// Sum of nodal weights; equals the annulus volume exactly for d in {2, 3}.
    pub fn total_volume(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PI: f64 = std::f64::consts::PI;

    fn base_params() -> Params {
        Params {
            d: 3,
            g: 1.0,
            cos_yp: 0.5,
            cos_yc: 0.3,
            mu_plus: 0.2,
            mu_minus: 0.2,
            r: ContainerRatio::Finite(4.0),
            r_trunc: 20.0,
        }
    }

    #[test]
    fn valid_params_pass() {
        assert!(base_params().violations().is_empty());
    }

    #[test]
    fn band_overflow_is_reported() {
        let p = Params {
            mu_minus: 0.6,
            ..base_params()
        };
        let v = p.violations();
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].contains("cos_yp + mu_minus = 1.1"), "{}", v[0]);
    }

    #[test]
    fn cos_yc_boundary_case_excluded() {
        let p = Params {
            cos_yc: -1.0,
            ..base_params()
        };
        let v = p.violations();
        assert!(v.iter().any(|m| m.contains("|cos_yc| = 1")), "{v:?}");
    }

    #[test]
    fn negative_friction_rejected() {
        let p = Params {
            mu_plus: -0.1,
            ..base_params()
        };
        assert!(p
            .violations()
            .iter()
            .any(|m| m.contains("mu_plus") && m.contains("nonnegative")));
    }

    #[test]
    fn boundary_measure_values() {
        assert!((boundary_measure(2.0, 3).unwrap() - 4.0 * PI).abs() < 1e-14);
        assert!((boundary_measure(5.0, 2).unwrap() - 2.0).abs() < 1e-14);
        assert!((boundary_measure(1.0, 3).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!(boundary_measure(1.0, 4).is_err());
    }

    #[test]
    fn annulus_volume_values() {
        assert!((annulus_volume(2.0, 3).unwrap() - 3.0 * PI).abs() < 1e-14);
        assert!((annulus_volume(3.0, 2).unwrap() - 4.0).abs() < 1e-14);
        assert!((annulus_volume(10.0, 3).unwrap() - 99.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn boundary_measure_scaling_is_constant() {
        // bm(r, d) * r^{-(d-2)} == sigma_{d-2} for every r
        for d in [2u32, 3] {
            let sigma = sigma_dm2(d);
            for &r in &[1.0, 1.7, 4.0, 12.5] {
                let scaled = boundary_measure(r, d).unwrap() / r.powi(d as i32 - 2);
                assert!((scaled - sigma).abs() < 1e-12 * sigma);
            }
        }
    }

    #[test]
    fn annulus_volume_matches_quadrature() {
        // Simpson quadrature of the boundary measure over [1, R]
        for d in [2u32, 3] {
            for &outer in &[2.0, 3.5, 10.0] {
                let n = 20_000;
                let h = (outer - 1.0) / n as f64;
                let mut s = 0.0;
                for i in 0..n {
                    let a = 1.0 + i as f64 * h;
                    let m = a + 0.5 * h;
                    let b = a + h;
                    s += h / 6.0
                        * (boundary_measure(a, d).unwrap()
                            + 4.0 * boundary_measure(m, d).unwrap()
                            + boundary_measure(b, d).unwrap());
                }
                let exact = annulus_volume(outer, d).unwrap();
                assert!((s - exact).abs() < 1e-12 * exact.max(1.0), "d={d} R={outer}");
            }
        }
    }

    #[test]
    fn small_grid_rejected() {
        let p = base_params();
        assert!(matches!(
            make_grid(&p, 3, Grading::Uniform),
            Err(Error::GridTooSmall { got: 3, min: 16 })
        ));
    }

    #[test]
    fn uniform_grid_nodes() {
        let p = base_params();
        let grid = make_grid(&p, 16, Grading::Uniform).unwrap();
        assert_eq!(grid.len(), 16);
        assert_eq!(grid.inner(), 1.0);
        assert_eq!(grid.outer(), 4.0);
        // nodes 1, 1.2, ..., 4 equally spaced
        for (i, &r) in grid.nodes().iter().enumerate() {
            assert!((r - (1.0 + 0.2 * i as f64)).abs() < 1e-12, "node {i} = {r}");
        }
    }

    #[test]
    fn boundary_refined_grid_clusters_at_endpoints() {
        let p = Params {
            r: ContainerRatio::Infinite,
            r_trunc: 12.0,
            ..base_params()
        };
        let grid = make_grid(&p, 64, Grading::BoundaryRefined).unwrap();
        assert_eq!(grid.inner(), 1.0);
        assert_eq!(grid.outer(), 12.0);
        let r = grid.nodes();
        let first = r[1] - r[0];
        let last = r[r.len() - 1] - r[r.len() - 2];
        let mid = r[32] - r[31];
        assert!(first < mid && last < mid, "smallest cells must sit at the endpoints");
        assert!(first < 0.05 && last < 0.05);
    }

    #[test]
    fn grid_measure_weights_sum_to_volume() {
        for d in [2u32, 3] {
            let p = Params {
                d,
                r: ContainerRatio::Finite(6.0),
                ..base_params()
            };
            for grading in [Grading::Uniform, Grading::BoundaryRefined] {
                let grid = make_grid(&p, 128, grading).unwrap();
                let gm = GridMeasure::new(&grid, d).unwrap();
                let exact = annulus_volume(6.0, d).unwrap();
                assert!(
                    (gm.total_volume() - exact).abs() < 1e-12 * exact,
                    "d={d} {grading:?}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn make_grid_invariants(
            outer in 1.1f64..50.0,
            n in 16usize..200,
            refined in proptest::bool::ANY,
        ) {
            let grading = if refined { Grading::BoundaryRefined } else { Grading::Uniform };
            let grid = make_grid_on(outer, n, grading).unwrap();
            prop_assert_eq!(grid.len(), n);
            prop_assert_eq!(grid.inner(), 1.0);
            prop_assert_eq!(grid.outer(), outer);
            for w in grid.nodes().windows(2) {
                prop_assert!(w[1] > w[0]);
            }
        }
    }
}

//! Capillary energy, volume constraint, dissipation distance, and contact
//! angles on radial-graph profiles.
//!
//! All integrals use trapezoid quadrature on the grid with per-cell finite
//! differences for the slope. For d in {2, 3} the boundary-measure weight is
//! affine in r, so the trapezoid cell rule integrates it exactly; shift
//! identities (volume under `h -> h + c`) then hold to rounding.

use crate::error::{Error, Result};
use crate::geometry::{boundary_measure, GridMeasure, Params, RadialGrid};
use serde::Serialize;

/// Axisymmetric free surface: one height per grid node.
#[derive(Debug, Clone)]
pub struct Profile {
    pub grid: RadialGrid,
    pub h: Vec<f64>,
}

impl Profile {
    pub fn new(grid: RadialGrid, h: Vec<f64>) -> Result<Self> {
        if h.len() != grid.len() {
            return Err(Error::ProfileGridMismatch {
                heights: h.len(),
                nodes: grid.len(),
            });
        }
        Ok(Profile { grid, h })
    }

    /// Flat profile at height `c`.
    pub fn flat(grid: RadialGrid, c: f64) -> Self {
        let h = vec![c; grid.len()];
        Profile { grid, h }
    }

    /// Plate contact height `ℓ = h(1)`.
    pub fn ell(&self) -> f64 {
        self.h[0]
    }

    /// Container contact height `h(R)`.
    pub fn h_out(&self) -> f64 {
        *self.h.last().unwrap()
    }

    /// Sup distance to another profile on the same grid.
    pub fn sup_distance(&self, other: &Profile) -> f64 {
        self.h
            .iter()
            .zip(&other.h)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Linear interpolation of the height at radius `r` (clamped to the span).
    pub fn interp(&self, r: f64) -> f64 {
        let nodes = self.grid.nodes();
        if r <= nodes[0] {
            return self.h[0];
        }
        if r >= *nodes.last().unwrap() {
            return *self.h.last().unwrap();
        }
        let k = match nodes.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
            Ok(i) => return self.h[i],
            Err(i) => i - 1,
        };
        let t = (r - nodes[k]) / (nodes[k + 1] - nodes[k]);
        self.h[k] * (1.0 - t) + self.h[k + 1] * t
    }
}

/// Energy split by physical origin. `total` is the exact sum of the parts.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyBreakdown {
    /// Free-surface area for finite R; relativized `∫(√(1+h'²)-1)` for infinite R.
    pub free_surface: f64,
    pub plate_term: f64,
    /// Absent for the infinite container.
    pub container_term: Option<f64>,
    pub gravity: f64,
    pub total: f64,
}

/// Evaluates the capillary energy of `prof` at forcing `f`.
///
/// Finite R:
/// `∫ √(1+h'²) bm dr - cos_yp σ ℓ - cos_yc bm(R) (h(R)-F) + ∫ g (h-F)²/2 bm dr`.
/// Infinite R drops the container term and relativizes the surface integrand.
pub fn total_energy(prof: &Profile, f: f64, p: &Params) -> Result<EnergyBreakdown> {
    let gm = GridMeasure::new(&prof.grid, p.d)?;
    check_span(prof, p)?;
    let h = &prof.h;
    let finite = p.is_finite();

    let mut free_surface = 0.0;
    for i in 0..gm.dr.len() {
        let s = (h[i + 1] - h[i]) / gm.dr[i];
        let q = (1.0 + s * s).sqrt();
        free_surface += gm.cell_bm[i] * if finite { q } else { q - 1.0 };
    }

    let mut gravity = 0.0;
    for i in 0..h.len() {
        let dh = h[i] - f;
        gravity += 0.5 * p.g * dh * dh * gm.weights[i];
    }

    let plate_term = -p.cos_yp * p.sigma() * prof.ell();
    let container_term = if finite {
        let bm_r = boundary_measure(prof.grid.outer(), p.d)?;
        Some(-p.cos_yc * bm_r * (prof.h_out() - f))
    } else {
        None
    };

    let total = free_surface + plate_term + container_term.unwrap_or(0.0) + gravity;
    Ok(EnergyBreakdown {
        free_surface,
        plate_term,
        container_term,
        gravity,
        total,
    })
}

/// Signed liquid volume relative to the slab `z ≤ F`: `∫ (h - F) bm dr`.
/// Zero iff the volume constraint is satisfied at quadrature level.
pub fn volume_functional(prof: &Profile, f: f64, p: &Params) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::InfiniteRadius);
    }
    let gm = GridMeasure::new(&prof.grid, p.d)?;
    check_span(prof, p)?;
    Ok(prof
        .h
        .iter()
        .zip(&gm.weights)
        .map(|(&hi, &wi)| (hi - f) * wi)
        .sum())
}

/// Frictional cost of moving the plate contact height from `l_prev` to `l_new`:
/// `σ [μ₊ (l_new - l_prev)₊ + μ₋ (l_prev - l_new)₊]`.
pub fn dissipation(l_prev: f64, l_new: f64, p: &Params) -> f64 {
    let up = (l_new - l_prev).max(0.0);
    let down = (l_prev - l_new).max(0.0);
    p.sigma() * (p.mu_plus * up + p.mu_minus * down)
}

/// One-sided second-order slope at the first node of (r, y).
fn edge_slope(r: &[f64], y: &[f64]) -> f64 {
    let a = r[1] - r[0];
    let b = r[2] - r[1];
    -y[0] * (2.0 * a + b) / (a * (a + b)) + y[1] * (a + b) / (a * b) - y[2] * a / (b * (a + b))
}

/// Contact-angle cosines measured inside the liquid:
/// `cos θ_plate = -h'(1)/√(1+h'(1)²)` and `cos θ_container = h'(R)/√(1+h'(R)²)`,
/// with one-sided second-order boundary stencils.
pub fn contact_angles(prof: &Profile) -> (f64, f64) {
    let r = prof.grid.nodes();
    let h = &prof.h;
    let n = r.len();
    let sp = edge_slope(r, h);
    let rr: Vec<f64> = r[n - 3..].iter().rev().map(|x| -x).collect();
    let hr: Vec<f64> = h[n - 3..].iter().rev().copied().collect();
    // reversing r with a sign flip keeps the stencil one-sided at the outer edge
    let sc = -edge_slope(&rr, &hr);
    let cos_plate = -sp / (1.0 + sp * sp).sqrt();
    let cos_container = sc / (1.0 + sc * sc).sqrt();
    (cos_plate, cos_container)
}

/// Euler-Lagrange residual `-H(h) + g(h-F) - λ` at the interior nodes, with
/// `H = h''/(1+h'²)^{3/2} + ((d-2)/r) h'/√(1+h'²)` from centered differences.
/// Endpoints carry angle conditions instead and are not reported.
pub fn el_residual(prof: &Profile, f: f64, lambda: f64, p: &Params) -> Vec<f64> {
    let r = prof.grid.nodes();
    let h = &prof.h;
    let n = r.len();
    let mut out = Vec::with_capacity(n.saturating_sub(2));
    for i in 1..n - 1 {
        let a = r[i] - r[i - 1];
        let b = r[i + 1] - r[i];
        let d1 = -h[i - 1] * b / (a * (a + b)) + h[i] * (b - a) / (a * b)
            + h[i + 1] * a / (b * (a + b));
        let d2 = 2.0 * (h[i - 1] / (a * (a + b)) - h[i] / (a * b) + h[i + 1] / (b * (a + b)));
        let q = 1.0 + d1 * d1;
        let mean_curv =
            d2 / q.powf(1.5) + (p.d as f64 - 2.0) / r[i] * d1 / q.sqrt();
        out.push(-mean_curv + p.g * (h[i] - f) - lambda);
    }
    out
}

fn check_span(prof: &Profile, p: &Params) -> Result<()> {
    let outer = prof.grid.outer();
    let want = p.outer_radius();
    if (outer - want).abs() > 1e-9 * want {
        return Err(Error::ProfileGridMismatch {
            heights: prof.h.len(),
            nodes: prof.grid.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_grid, ContainerRatio, Grading};
    use proptest::prelude::*;

    const PI: f64 = std::f64::consts::PI;

    fn params(r: f64) -> Params {
        Params {
            d: 3,
            g: 1.0,
            cos_yp: 0.5,
            cos_yc: 0.0,
            mu_plus: 0.1,
            mu_minus: 0.2,
            r: ContainerRatio::Finite(r),
            ..Params::default()
        }
    }

    #[test]
    fn flat_energy_closed_form() {
        // d=3, R=2, h ≡ F = 1, cos_yp = 0.5, cos_yc = 0
        let p = params(2.0);
        let grid = make_grid(&p, 64, Grading::Uniform).unwrap();
        let prof = Profile::flat(grid, 1.0);
        let e = total_energy(&prof, 1.0, &p).unwrap();
        assert!((e.free_surface - 3.0 * PI).abs() < 1e-12);
        assert!((e.plate_term - (-PI)).abs() < 1e-12);
        assert!((e.container_term.unwrap()).abs() < 1e-12);
        assert!(e.gravity.abs() < 1e-12);
        assert!((e.total - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn flat_infinite_energy_is_plate_term_only() {
        let p = Params {
            r: ContainerRatio::Infinite,
            r_trunc: 9.0,
            cos_yp: 0.5,
            ..Params::default()
        };
        for f in [0.0, 0.7, -1.3] {
            let grid = make_grid(&p, 48, Grading::Uniform).unwrap();
            let prof = Profile::flat(grid, f);
            let e = total_energy(&prof, f, &p).unwrap();
            assert!(e.container_term.is_none());
            assert!((e.total - (-p.cos_yp * 2.0 * PI * f)).abs() < 1e-12);
        }
    }

    #[test]
    fn volume_of_uniform_offset() {
        let p = params(2.0);
        let grid = make_grid(&p, 64, Grading::Uniform).unwrap();
        let prof = Profile::flat(grid, 2.0);
        let v = volume_functional(&prof, 1.0, &p).unwrap();
        assert!((v - 3.0 * PI).abs() < 1e-12, "v = {v}");
    }

    #[test]
    fn volume_of_odd_profile_d2() {
        // d=2, R=3, h(r) = F + (r-2): odd about r = 2
        let p = Params {
            d: 2,
            r: ContainerRatio::Finite(3.0),
            ..Params::default()
        };
        let grid = make_grid(&p, 65, Grading::Uniform).unwrap();
        let f = 0.4;
        let h: Vec<f64> = grid.nodes().iter().map(|&r| f + (r - 2.0)).collect();
        let prof = Profile::new(grid, h).unwrap();
        let v = volume_functional(&prof, f, &p).unwrap();
        assert!(v.abs() < 1e-12, "v = {v}");
    }

    #[test]
    fn volume_errors_for_infinite_container() {
        let p = Params {
            r: ContainerRatio::Infinite,
            ..Params::default()
        };
        let grid = make_grid(&p, 32, Grading::Uniform).unwrap();
        let prof = Profile::flat(grid, 0.0);
        assert!(matches!(
            volume_functional(&prof, 0.0, &p),
            Err(Error::InfiniteRadius)
        ));
    }

    #[test]
    fn dissipation_values() {
        let p = params(4.0);
        // d=3, mu+ = 0.1, mu- = 0.2, l: 0 -> 0.5
        let d = dissipation(0.0, 0.5, &p);
        assert!((d - 0.1 * PI).abs() < 1e-14, "d = {d}");
        assert_eq!(dissipation(0.3, 0.3, &p), 0.0);
    }

    #[test]
    fn dissipation_triangle_spot_value() {
        let p = Params {
            mu_plus: 0.1,
            mu_minus: 0.1,
            ..params(4.0)
        };
        let lhs = dissipation(0.0, 1.0, &p) + dissipation(1.0, 0.5, &p);
        let rhs = dissipation(0.0, 0.5, &p);
        assert!((lhs - 0.3 * PI).abs() < 1e-12);
        assert!(lhs >= rhs);
    }

    #[test]
    fn contact_angle_of_unit_slope() {
        // h'(1) = -1 -> cos θ_plate = 1/√2
        let p = params(4.0);
        let grid = make_grid(&p, 128, Grading::Uniform).unwrap();
        let h: Vec<f64> = grid.nodes().iter().map(|&r| -r).collect();
        let prof = Profile::new(grid, h).unwrap();
        let (cp, cc) = contact_angles(&prof);
        assert!((cp - 1.0 / 2f64.sqrt()).abs() < 1e-10, "cp = {cp}");
        assert!((cc - (-1.0 / 2f64.sqrt())).abs() < 1e-10, "cc = {cc}");
    }

    #[test]
    fn contact_angles_of_flat_profile() {
        let p = params(4.0);
        let grid = make_grid(&p, 32, Grading::BoundaryRefined).unwrap();
        let prof = Profile::flat(grid, 2.0);
        let (cp, cc) = contact_angles(&prof);
        assert!(cp.abs() < 1e-10, "cp = {cp}");
        assert!(cc.abs() < 1e-10, "cc = {cc}");
    }

    #[test]
    fn el_residual_flat_is_zero() {
        for n in [16, 33, 100] {
            let p = params(4.0);
            let grid = make_grid(&p, n, Grading::BoundaryRefined).unwrap();
            let prof = Profile::flat(grid, 0.7);
            let res = el_residual(&prof, 0.7, 0.0, &p);
            // stencil coefficients scale like 1/dr^2; allow the rounding floor
            assert!(res.iter().all(|&x| x.abs() < 1e-9));
        }
    }

    #[test]
    fn el_residual_linear_profile_hand_value() {
        // h = F + 0.1 r, d=3, g=1, λ=0 at r=2:
        // H = (1/r)·0.1/√1.01, residual = -H + g(h-F) = 0.2 - 0.1/(2√1.01)
        let p = Params {
            cos_yp: 0.0,
            ..params(3.0)
        };
        let grid = make_grid(&p, 201, Grading::Uniform).unwrap();
        let f = 0.3;
        let h: Vec<f64> = grid.nodes().iter().map(|&r| f + 0.1 * r).collect();
        let idx = grid.nearest_node(2.0);
        assert!((grid.nodes()[idx] - 2.0).abs() < 1e-12);
        let prof = Profile::new(grid, h).unwrap();
        let res = el_residual(&prof, f, 0.0, &p);
        let expect = 0.1 * 2.0 - 0.1 / (2.0 * 1.01f64.sqrt());
        assert!((expect - 0.150_248_140_49).abs() < 1e-9);
        assert!((res[idx - 1] - expect).abs() < 1e-10, "res = {}", res[idx - 1]);
    }

    #[test]
    fn energy_shift_covariance() {
        let p = Params {
            cos_yc: 0.3,
            ..params(5.0)
        };
        let grid = make_grid(&p, 97, Grading::BoundaryRefined).unwrap();
        let f = 0.2;
        let h: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&r| f + 0.3 * (-(r - 1.0)).exp())
            .collect();
        let prof = Profile::new(grid.clone(), h.clone()).unwrap();
        let e0 = total_energy(&prof, f, &p).unwrap();
        let c = 0.8;
        let shifted = Profile::new(grid, h.iter().map(|x| x + c).collect()).unwrap();
        let e1 = total_energy(&shifted, f + c, &p).unwrap();
        let dplate = -p.cos_yp * p.sigma() * c;
        assert!((e1.plate_term - e0.plate_term - dplate).abs() < 1e-12);
        assert!((e1.free_surface - e0.free_surface).abs() < 1e-12);
        assert!((e1.container_term.unwrap() - e0.container_term.unwrap()).abs() < 1e-12);
        assert!((e1.gravity - e0.gravity).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn dissipation_triangle_inequality(
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
            c in -2.0f64..2.0,
            mu_p in 0.0f64..0.45,
            mu_m in 0.0f64..0.45,
        ) {
            let p = Params { mu_plus: mu_p, mu_minus: mu_m, cos_yp: 0.0, ..Params::default() };
            let direct = dissipation(a, c, &p);
            let via_b = dissipation(a, b, &p) + dissipation(b, c, &p);
            prop_assert!(via_b >= direct - 1e-12);
        }

        #[test]
        fn volume_shift_identity(
            c in -3.0f64..3.0,
            n in 16usize..80,
            outer in 1.5f64..12.0,
        ) {
            let p = Params { r: ContainerRatio::Finite(outer), ..Params::default() };
            let grid = make_grid(&p, n, Grading::BoundaryRefined).unwrap();
            let h: Vec<f64> = grid.nodes().iter().map(|&r| 0.3 * (r * 1.7).sin()).collect();
            let prof = Profile::new(grid.clone(), h.clone()).unwrap();
            let v0 = volume_functional(&prof, 0.0, &p).unwrap();
            let shifted = Profile::new(grid, h.iter().map(|x| x + c).collect()).unwrap();
            let v1 = volume_functional(&shifted, 0.0, &p).unwrap();
            let exact = c * crate::geometry::annulus_volume(outer, 3).unwrap();
            prop_assert!((v1 - v0 - exact).abs() < 1e-10 * (1.0 + exact.abs()));
        }
    }
}

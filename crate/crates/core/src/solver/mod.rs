//! Incremental minimization and equilibrium solves.
//!
//! One step of the quasi-static scheme minimizes energy plus dissipation from
//! the previous contact height, under the volume constraint for a finite
//! container. The nonsmooth plate term is handled by a pinned / advancing /
//! receding trichotomy: a pinned solve first, then a re-solve on the violated
//! friction-band edge, each a smooth convex program. The regime certificate is
//! the variational plate cosine of the converged state.

mod newton;
pub mod probe;
pub mod shooting;

pub(crate) use newton::{DiscreteSystem, NewtonConfig, PlateCondition};

use crate::energy::Profile;
use crate::error::{Error, Result};
use crate::geometry::{annulus_volume, Params, RadialGrid};
use serde::Serialize;

/// Contact-line regime of a converged step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Pinned,
    Advancing,
    Receding,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Pinned => "pinned",
            Regime::Advancing => "advancing",
            Regime::Receding => "receding",
        };
        f.write_str(s)
    }
}

/// Solver tolerances and iteration limits.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverOptions {
    /// Stationarity tolerance, scaled by `(1 + |λ|)`.
    pub tol_kkt: f64,
    /// Volume tolerance as a fraction of the annulus volume.
    pub tol_vol_factor: f64,
    /// Band-edge tolerance on contact cosines; ties keep the pinned solution.
    pub tol_angle: f64,
    pub max_iters: usize,
    pub max_backtracks: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_kkt: 1e-8,
            tol_vol_factor: 1e-10,
            tol_angle: 1e-6,
            max_iters: 60,
            max_backtracks: 30,
        }
    }
}

impl SolverOptions {
    fn newton_config(&self, p: &Params) -> NewtonConfig {
        let vol = match p.r {
            crate::geometry::ContainerRatio::Finite(r) => annulus_volume(r, p.d).unwrap_or(1.0),
            crate::geometry::ContainerRatio::Infinite => 1.0,
        };
        NewtonConfig {
            tol_kkt: self.tol_kkt,
            tol_vol: self.tol_vol_factor * vol,
            max_iters: self.max_iters,
            max_backtracks: self.max_backtracks,
            record_iterates: false,
        }
    }
}

/// A converged globally-stable candidate: profile, multiplier, realized
/// contact cosines (variational, i.e. read from the discrete optimality
/// system), regime tag, and solve diagnostics.
#[derive(Debug, Clone)]
pub struct StableState {
    pub profile: Profile,
    pub f: f64,
    /// Volume multiplier; zero for the infinite container.
    pub lambda: f64,
    pub cos_plate: f64,
    pub cos_container: f64,
    pub regime: Regime,
    pub newton_iters: usize,
    pub kkt_residual: f64,
}

impl StableState {
    pub fn ell(&self) -> f64 {
        self.profile.ell()
    }
}

/// One incremental problem: previous state, new forcing, parameters.
#[derive(Debug, Clone)]
pub struct StepProblem<'a> {
    pub prev: &'a StableState,
    pub f_new: f64,
    pub params: &'a Params,
    pub opts: SolverOptions,
}

/// Equilibrium variants exposed alongside the incremental step.
#[derive(Debug, Clone, Copy)]
pub enum EquilibriumMode {
    /// Exact Young cosine on the plate (friction ignored); volume-constrained
    /// for a finite container.
    YoungAngles,
    /// Plate height fixed at the given value.
    Pinned(f64),
    /// Friction-band trichotomy against the given previous contact height.
    Band { l_prev: f64 },
}

fn finish_state(
    sys: &DiscreteSystem,
    out: newton::NewtonOutcome,
    grid: &RadialGrid,
    f: f64,
    regime: Regime,
    p: &Params,
) -> StableState {
    let cos_plate = sys.variational_plate_cos(&out.h, out.lambda);
    let cos_container = if p.is_finite() {
        sys.variational_container_cos(&out.h, out.lambda)
    } else {
        // far field is flat; report the geometric trace angle
        let prof = Profile {
            grid: grid.clone(),
            h: out.h.clone(),
        };
        crate::energy::contact_angles(&prof).1
    };
    StableState {
        profile: Profile {
            grid: grid.clone(),
            h: out.h,
        },
        f,
        lambda: out.lambda,
        cos_plate,
        cos_container,
        regime,
        newton_iters: out.iters,
        kkt_residual: out.residual,
    }
}

/// Solves one incremental minimization with the plate trichotomy.
pub fn minimize_step(sp: &StepProblem) -> Result<StableState> {
    let p = sp.params;
    let grid = &sp.prev.profile.grid;
    let l_prev = sp.prev.ell();
    solve_band(
        grid,
        p,
        sp.f_new,
        l_prev,
        &sp.prev.profile.h,
        sp.prev.lambda,
        &sp.opts,
    )
}

/// Warm start for an angle-mode solve: the multiplier is pinned by the exact
/// contact-line identity, and the previous profile is translated so its bulk
/// sits at the implied height. Starting from a pinned solution instead would
/// leave a near-vertical first cell, across which the free contact height can
/// only creep one cell-slope relaxation per Newton iteration.
fn angle_warm_start(
    grid: &RadialGrid,
    p: &Params,
    f: f64,
    kappa: f64,
    h_prev: &[f64],
) -> (Vec<f64>, f64) {
    let lambda = if p.is_finite() {
        let r = grid.outer();
        let bm_r = crate::geometry::boundary_measure(r, p.d).unwrap_or(0.0);
        let vol = annulus_volume(r, p.d).unwrap_or(1.0);
        -(kappa * p.sigma() + p.cos_yc * bm_r) / vol
    } else {
        0.0
    };
    let idx = grid.nearest_node(0.5 * (1.0 + grid.outer()));
    let shift = f + lambda / p.g - h_prev[idx];
    (h_prev.iter().map(|x| x + shift).collect(), lambda)
}

fn solve_band(
    grid: &RadialGrid,
    p: &Params,
    f: f64,
    l_prev: f64,
    h_init: &[f64],
    lambda_init: f64,
    opts: &SolverOptions,
) -> Result<StableState> {
    let cfg = opts.newton_config(p);
    let pinned_sys = DiscreteSystem::new(grid, p, f, PlateCondition::Pinned(l_prev))?;
    let pinned_out = pinned_sys.solve(h_init, lambda_init, &cfg)?;
    let cos_pin = pinned_sys.variational_plate_cos(&pinned_out.h, pinned_out.lambda);

    let hi_edge = p.cos_yp + p.mu_minus;
    let lo_edge = p.cos_yp - p.mu_plus;
    if cos_pin > hi_edge + opts.tol_angle {
        // the pinned angle is too wet: the contact line recedes on the upper edge
        let sys = DiscreteSystem::new(grid, p, f, PlateCondition::Angle(hi_edge))?;
        let (h0, l0) = angle_warm_start(grid, p, f, hi_edge, h_init);
        let out = sys.solve(&h0, l0, &cfg)?;
        if out.h[0] <= l_prev + opts.tol_angle {
            return Ok(finish_state(&sys, out, grid, f, Regime::Receding, p));
        }
    } else if cos_pin < lo_edge - opts.tol_angle {
        let sys = DiscreteSystem::new(grid, p, f, PlateCondition::Angle(lo_edge))?;
        let (h0, l0) = angle_warm_start(grid, p, f, lo_edge, h_init);
        let out = sys.solve(&h0, l0, &cfg)?;
        if out.h[0] >= l_prev - opts.tol_angle {
            return Ok(finish_state(&sys, out, grid, f, Regime::Advancing, p));
        }
    }
    Ok(finish_state(
        &pinned_sys,
        pinned_out,
        grid,
        f,
        Regime::Pinned,
        p,
    ))
}

/// Solves an equilibrium problem in the requested mode.
pub fn solve_equilibrium(
    f: f64,
    p: &Params,
    grid: &RadialGrid,
    mode: EquilibriumMode,
    opts: &SolverOptions,
) -> Result<StableState> {
    let cfg = opts.newton_config(p);
    let flat = vec![f; grid.len()];
    match mode {
        EquilibriumMode::YoungAngles => {
            let sys = DiscreteSystem::new(grid, p, f, PlateCondition::Angle(p.cos_yp))?;
            let out = sys.solve(&flat, 0.0, &cfg)?;
            Ok(finish_state(&sys, out, grid, f, Regime::Pinned, p))
        }
        EquilibriumMode::Pinned(ell) => {
            let sys = DiscreteSystem::new(grid, p, f, PlateCondition::Pinned(ell))?;
            let mut init = flat;
            init[0] = ell;
            let out = sys.solve(&init, 0.0, &cfg)?;
            Ok(finish_state(&sys, out, grid, f, Regime::Pinned, p))
        }
        EquilibriumMode::Band { l_prev } => {
            let mut init = flat;
            init[0] = l_prev;
            solve_band(grid, p, f, l_prev, &init, 0.0, opts)
        }
    }
}

/// Unconstrained minimizer with exact Young angles on both walls; used for the
/// reference configuration. The multiplier is identically zero.
pub fn solve_unconstrained_young(
    f: f64,
    p: &Params,
    grid: &RadialGrid,
    opts: &SolverOptions,
) -> Result<StableState> {
    if !p.is_finite() {
        return Err(Error::InfiniteRadius);
    }
    let cfg = opts.newton_config(p);
    let sys = DiscreteSystem::new(grid, p, f, PlateCondition::Angle(p.cos_yp))?.unconstrained();
    let flat = vec![f; grid.len()];
    let out = sys.solve(&flat, 0.0, &cfg)?;
    Ok(finish_state(&sys, out, grid, f, Regime::Pinned, p))
}

/// Builds an initial stable state at forcing `f0` from a flat guess,
/// running the band trichotomy against a flat previous contact at `f0`.
pub fn initial_state(
    f0: f64,
    p: &Params,
    grid: &RadialGrid,
    opts: &SolverOptions,
) -> Result<StableState> {
    solve_equilibrium(f0, p, grid, EquilibriumMode::Band { l_prev: f0 }, opts)
}

/// The variational plate cosine of a state recomputed from its profile; used
/// by audits that only have the state.
pub fn variational_plate_cos(s: &StableState, p: &Params) -> Result<f64> {
    let sys = DiscreteSystem::new(&s.profile.grid, p, s.f, PlateCondition::Pinned(s.ell()))?;
    Ok(sys.variational_plate_cos(&s.profile.h, s.lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{contact_angles, dissipation, el_residual, total_energy, volume_functional};
    use crate::geometry::{boundary_measure, make_grid, ContainerRatio, Grading};

    fn base(r: f64) -> Params {
        Params {
            d: 3,
            g: 1.0,
            cos_yp: 0.5,
            cos_yc: 0.3,
            mu_plus: 0.2,
            mu_minus: 0.2,
            r: ContainerRatio::Finite(r),
            ..Params::default()
        }
    }

    #[test]
    fn flat_is_exact_minimizer_for_zero_cosines() {
        for mu in [0.0, 0.3] {
            let p = Params {
                cos_yp: 0.0,
                cos_yc: 0.0,
                mu_plus: mu,
                mu_minus: mu,
                ..base(4.0)
            };
            let grid = make_grid(&p, 64, Grading::Uniform).unwrap();
            let opts = SolverOptions::default();
            let prev = initial_state(0.7, &p, &grid, &opts).unwrap();
            assert!(prev.profile.h.iter().all(|&x| (x - 0.7).abs() < 1e-13));
            let sp = StepProblem {
                prev: &prev,
                f_new: 0.7,
                params: &p,
                opts,
            };
            let s = minimize_step(&sp).unwrap();
            assert_eq!(s.regime, Regime::Pinned);
            assert!(s.lambda.abs() < 1e-12);
            assert!(s.profile.h.iter().all(|&x| (x - 0.7).abs() < 1e-13));
        }
    }

    #[test]
    fn young_equilibrium_satisfies_kkt_and_volume() {
        let p = Params {
            mu_plus: 0.0,
            mu_minus: 0.0,
            ..base(8.0)
        };
        let grid = make_grid(&p, 512, Grading::BoundaryRefined).unwrap();
        let opts = SolverOptions::default();
        let s = solve_equilibrium(0.0, &p, &grid, EquilibriumMode::YoungAngles, &opts).unwrap();
        // volume constraint at quadrature level
        let v = volume_functional(&s.profile, 0.0, &p).unwrap();
        assert!(v.abs() < 1e-9, "volume = {v}");
        // variational angles sit exactly on the Young cosines
        assert!((s.cos_plate - 0.5).abs() < 1e-7);
        assert!((s.cos_container - 0.3).abs() < 1e-7);
        // multiplier bound |λ| <= C0 g with C0 = 10(1 + 1/sqrt(g))
        assert!(s.lambda.abs() <= 10.0 * (1.0 + 1.0) * p.g);
        // interior EL residual of the converged state is grid-limited
        let res = el_residual(&s.profile, 0.0, s.lambda, &p);
        let dr = 7.0 / 511.0;
        let tol = (1e-6 * (1.0 + s.lambda.abs())).max(20.0 * dr * dr);
        let max = res.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(max < tol, "max residual {max} vs tol {tol}");
    }

    #[test]
    fn geometric_angles_grid_converge_to_young() {
        let p = Params {
            mu_plus: 0.0,
            mu_minus: 0.0,
            ..base(8.0)
        };
        let grid = make_grid(&p, 1024, Grading::BoundaryRefined).unwrap();
        let opts = SolverOptions::default();
        let s = solve_equilibrium(0.0, &p, &grid, EquilibriumMode::YoungAngles, &opts).unwrap();
        let (cp, cc) = contact_angles(&s.profile);
        assert!((cc - 0.3).abs() < 1e-4, "cc = {cc}");
        assert!((cp - 0.5).abs() < 1e-4, "cp = {cp}");
    }

    #[test]
    fn small_forcing_change_stays_pinned_inside_band() {
        let p = Params {
            mu_plus: 0.5,
            mu_minus: 0.5,
            ..base(8.0)
        };
        let grid = make_grid(&p, 256, Grading::BoundaryRefined).unwrap();
        let opts = SolverOptions::default();
        let prev = solve_equilibrium(0.0, &p, &grid, EquilibriumMode::YoungAngles, &opts).unwrap();
        let sp = StepProblem {
            prev: &prev,
            f_new: 0.08,
            params: &p,
            opts,
        };
        let s = minimize_step(&sp).unwrap();
        assert_eq!(s.regime, Regime::Pinned);
        assert_eq!(s.ell(), prev.ell());
        assert!(
            s.cos_plate > p.cos_yp - p.mu_plus && s.cos_plate < p.cos_yp + p.mu_minus,
            "cos_plate = {} must sit strictly inside the band",
            s.cos_plate
        );
        assert_eq!(dissipation(prev.ell(), s.ell(), &p), 0.0);
    }

    #[test]
    fn large_forcing_change_advances_on_band_edge() {
        let p = base(8.0);
        let grid = make_grid(&p, 256, Grading::BoundaryRefined).unwrap();
        let opts = SolverOptions::default();
        let prev = solve_equilibrium(0.0, &p, &grid, EquilibriumMode::YoungAngles, &opts).unwrap();
        let sp = StepProblem {
            prev: &prev,
            f_new: 1.0,
            params: &p,
            opts,
        };
        let s = minimize_step(&sp).unwrap();
        assert_eq!(s.regime, Regime::Advancing);
        assert!(s.ell() > prev.ell());
        assert!((s.cos_plate - (p.cos_yp - p.mu_plus)).abs() < 1e-6);
        // and the mirror image recedes
        let sp2 = StepProblem {
            prev: &s,
            f_new: -0.5,
            params: &p,
            opts,
        };
        let s2 = minimize_step(&sp2).unwrap();
        assert_eq!(s2.regime, Regime::Receding);
        assert!(s2.ell() < s.ell());
        assert!((s2.cos_plate - (p.cos_yp + p.mu_minus)).abs() < 1e-6);
    }

    #[test]
    fn multiplier_matches_contact_line_identity() {
        // λ vol = -(σ cos_plate + bm(R) cos_yc) holds exactly for the discrete state
        let p = Params {
            mu_plus: 0.0,
            mu_minus: 0.0,
            ..base(12.0)
        };
        let grid = make_grid(&p, 384, Grading::BoundaryRefined).unwrap();
        let opts = SolverOptions::default();
        let s = solve_equilibrium(0.3, &p, &grid, EquilibriumMode::YoungAngles, &opts).unwrap();
        let vol = crate::geometry::annulus_volume(12.0, 3).unwrap();
        let rhs = -(p.sigma() * s.cos_plate + boundary_measure(12.0, 3).unwrap() * s.cos_container);
        assert!((s.lambda * vol - rhs).abs() < 1e-8 * (1.0 + rhs.abs()));

        // λR tracks the leading term -cos_yc bm(R)/vol · R for a neutral plate
        let p2 = Params {
            cos_yp: 0.0,
            cos_yc: 0.4,
            ..p
        };
        let s2 = solve_equilibrium(0.0, &p2, &grid, EquilibriumMode::YoungAngles, &opts).unwrap();
        let leading = -p2.cos_yc * boundary_measure(12.0, 3).unwrap() / vol;
        assert!(
            (s2.lambda * 12.0 - leading * 12.0).abs() < 0.2 * (leading * 12.0).abs(),
            "lambda R = {} vs leading R = {}",
            s2.lambda * 12.0,
            leading * 12.0
        );
    }

    #[test]
    fn band_step_matches_oracle_on_the_advancing_edge() {
        // hysteretic step from a flat bath: the state advances on the lower
        // band edge; the shooting oracle at that imposed cosine must agree
        let p = base(8.0);
        let grid = make_grid(&p, 512, Grading::BoundaryRefined).unwrap();
        let opts = SolverOptions::default();
        // literal flat previous state, not yet relaxed into the band
        let prev = StableState {
            profile: crate::energy::Profile::flat(grid.clone(), 0.0),
            f: 0.0,
            lambda: 0.0,
            cos_plate: 0.0,
            cos_container: 0.0,
            regime: Regime::Pinned,
            newton_iters: 0,
            kkt_residual: 0.0,
        };
        let sp = StepProblem {
            prev: &prev,
            f_new: 0.0,
            params: &p,
            opts,
        };
        let s = minimize_step(&sp).unwrap();
        assert_eq!(s.regime, Regime::Advancing);
        assert!((s.cos_plate - (p.cos_yp - p.mu_plus)).abs() < 1e-6);
        assert!(s.kkt_residual <= opts.tol_kkt * (1.0 + s.lambda.abs()));
        let oracle = crate::solver::shooting::shoot_oracle(
            0.0,
            crate::solver::shooting::LambdaSpec::SolveVolume,
            crate::solver::shooting::PlateBc::Angle(p.cos_yp - p.mu_plus),
            &p,
            &grid,
        )
        .unwrap();
        assert!((s.lambda - oracle.lambda).abs() < 1e-5);
        let sup = s.profile.sup_distance(&oracle.profile);
        assert!(sup < 1e-5, "sup distance {sup}");
    }

    #[test]
    fn two_dimensional_solve_cross_checks_oracle() {
        let p = Params {
            d: 2,
            mu_plus: 0.0,
            mu_minus: 0.0,
            ..base(8.0)
        };
        let grid = make_grid(&p, 512, Grading::BoundaryRefined).unwrap();
        let opts = SolverOptions::default();
        let s = solve_equilibrium(0.0, &p, &grid, EquilibriumMode::YoungAngles, &opts).unwrap();
        // exact multiplier identity in d = 2: sigma = bm = 2
        let vol = crate::geometry::annulus_volume(8.0, 2).unwrap();
        let expect = -(2.0 * p.cos_yp + 2.0 * p.cos_yc) / vol;
        assert!((s.lambda - expect).abs() < 1e-9, "lambda {}", s.lambda);
        let oracle = crate::solver::shooting::shoot_oracle(
            0.0,
            crate::solver::shooting::LambdaSpec::SolveVolume,
            crate::solver::shooting::PlateBc::Angle(p.cos_yp),
            &p,
            &grid,
        )
        .unwrap();
        let sup = s.profile.sup_distance(&oracle.profile);
        assert!(sup < 1e-4, "sup distance {sup}");
    }

    #[test]
    fn energy_cross_checks_oracle_energy() {
        // same quadrature, profiles from the two independent solution paths
        let p = Params {
            mu_plus: 0.0,
            mu_minus: 0.0,
            ..base(8.0)
        };
        let grid = make_grid(&p, 4096, Grading::BoundaryRefined).unwrap();
        let opts = SolverOptions::default();
        let s = solve_equilibrium(0.0, &p, &grid, EquilibriumMode::YoungAngles, &opts).unwrap();
        let oracle = crate::solver::shooting::shoot_oracle(
            0.0,
            crate::solver::shooting::LambdaSpec::SolveVolume,
            crate::solver::shooting::PlateBc::Angle(p.cos_yp),
            &p,
            &grid,
        )
        .unwrap();
        let e_newton = total_energy(&s.profile, 0.0, &p).unwrap().total;
        let e_oracle = total_energy(&oracle.profile, 0.0, &p).unwrap().total;
        assert!(
            (e_newton - e_oracle).abs() < 1e-6,
            "energy mismatch {:.3e}",
            (e_newton - e_oracle).abs()
        );
    }

    #[test]
    fn volume_correcting_flow_derivative_recovers_lambda() {
        // central finite difference of the energy along a unit-volume vertical
        // flow equals the multiplier up to O(s) + O(dr^2)
        let p = Params {
            mu_plus: 0.0,
            mu_minus: 0.0,
            ..base(8.0)
        };
        let grid = make_grid(&p, 512, Grading::BoundaryRefined).unwrap();
        let opts = SolverOptions::default();
        let s = solve_equilibrium(0.0, &p, &grid, EquilibriumMode::YoungAngles, &opts).unwrap();

        let gm = crate::geometry::GridMeasure::new(&grid, p.d).unwrap();
        let r = grid.nodes();
        let span = grid.outer() - 1.0;
        let raw: Vec<f64> = r
            .iter()
            .map(|&x| {
                let t = (x - (1.0 + 0.5 * span)) / (0.25 * span);
                if t.abs() >= 1.0 {
                    0.0
                } else {
                    let u = 1.0 - t * t;
                    u * u * u
                }
            })
            .collect();
        let mass: f64 = raw.iter().zip(&gm.weights).map(|(v, w)| v * w).sum();
        let v0: Vec<f64> = raw.iter().map(|v| v / mass).collect();

        let step = 1e-4;
        let mut e = [0.0; 2];
        for (k, sgn) in [1.0f64, -1.0].iter().enumerate() {
            let h: Vec<f64> = s
                .profile
                .h
                .iter()
                .zip(&v0)
                .map(|(hi, vi)| hi + sgn * step * vi)
                .collect();
            let prof = crate::energy::Profile::new(grid.clone(), h).unwrap();
            e[k] = total_energy(&prof, 0.0, &p).unwrap().total;
        }
        let fd = (e[0] - e[1]) / (2.0 * step);
        let dr = 7.0 * std::f64::consts::PI / (2.0 * 511.0);
        let tol = 10.0 * (step + dr * dr);
        assert!(
            (fd - s.lambda).abs() < tol,
            "dE/ds = {fd:.6e} vs lambda = {:.6e} (tol {tol:.1e})",
            s.lambda
        );
    }

    #[test]
    fn pinned_equilibrium_fixes_the_contact_height() {
        let p = base(8.0);
        let grid = make_grid(&p, 256, Grading::BoundaryRefined).unwrap();
        let opts = SolverOptions::default();
        let ell = 0.35;
        let s = solve_equilibrium(0.0, &p, &grid, EquilibriumMode::Pinned(ell), &opts).unwrap();
        assert_eq!(s.ell(), ell);
        let v = volume_functional(&s.profile, 0.0, &p).unwrap();
        assert!(v.abs() < 1e-9, "volume = {v}");
        // container condition is still the Young angle
        assert!((s.cos_container - p.cos_yc).abs() < 1e-7);
    }

    #[test]
    fn unconstrained_reference_has_zero_multiplier() {
        let p = Params {
            mu_plus: 0.0,
            mu_minus: 0.0,
            ..base(16.0)
        };
        let grid = make_grid(&p, 384, Grading::BoundaryRefined).unwrap();
        let opts = SolverOptions::default();
        let s = solve_unconstrained_young(0.0, &p, &grid, &opts).unwrap();
        assert_eq!(s.lambda, 0.0);
        assert!((s.cos_plate - p.cos_yp).abs() < 1e-7);
        assert!((s.cos_container - p.cos_yc).abs() < 1e-7);
        // the unconstrained state ignores the volume: bulk sits at z = 0
        let mid = s.profile.interp(8.0);
        assert!(mid.abs() < 1e-3, "mid = {mid}");
    }

    #[test]
    fn energy_coercivity_bound_for_stable_states() {
        // total <= |B_R \ B_1| + C (mu+ v mu-), C = 10 (1 + 1/sqrt(g)) sigma, at F = 0
        for r in [4.0, 8.0] {
            let p = base(r);
            let grid = make_grid(&p, 256, Grading::BoundaryRefined).unwrap();
            let opts = SolverOptions::default();
            let s =
                solve_equilibrium(0.0, &p, &grid, EquilibriumMode::Band { l_prev: 0.0 }, &opts)
                    .unwrap();
            let e = total_energy(&s.profile, 0.0, &p).unwrap();
            let c = 10.0 * (1.0 + 1.0 / p.g.sqrt()) * p.sigma();
            let bound = crate::geometry::annulus_volume(r, 3).unwrap()
                + c * p.mu_plus.max(p.mu_minus);
            assert!(e.total <= bound, "total {} vs bound {bound}", e.total);
        }
    }

    #[test]
    fn truncation_independence_of_infinite_solve() {
        // shared inner nodes on [1, 15], tails to different truncation radii
        let opts = SolverOptions::default();
        let inner = make_grid_shared_inner(15.0, 241);
        let mut profiles = Vec::new();
        for r_trunc in [20.0, 30.0] {
            let p = Params {
                cos_yp: 0.5,
                cos_yc: 0.3,
                r: ContainerRatio::Infinite,
                r_trunc,
                ..base(8.0)
            };
            let mut nodes = inner.clone();
            let tail_cells = 64;
            for k in 1..=tail_cells {
                nodes.push(15.0 + (r_trunc - 15.0) * k as f64 / tail_cells as f64);
            }
            let grid = RadialGrid::from_nodes(nodes, Grading::Uniform).unwrap();
            let s = solve_equilibrium(0.0, &p, &grid, EquilibriumMode::YoungAngles, &opts).unwrap();
            profiles.push(s.profile.h[..inner.len()].to_vec());
        }
        let bound = 10.0 * (-15.0f64).exp();
        for (a, b) in profiles[0].iter().zip(&profiles[1]) {
            assert!((a - b).abs() < bound, "diff {} vs {bound}", (a - b).abs());
        }
    }

    fn make_grid_shared_inner(outer: f64, n: usize) -> Vec<f64> {
        let m = (n - 1) as f64;
        (0..n)
            .map(|i| {
                let xi = i as f64 / m;
                let t = 0.5 * (1.0 - (std::f64::consts::PI * xi).cos());
                1.0 + (outer - 1.0) * t
            })
            .collect()
    }
}

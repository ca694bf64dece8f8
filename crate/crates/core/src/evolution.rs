//! Quasi-static evolution driven by a forcing schedule.
//!
//! Each partition time solves one incremental minimization warm-started from
//! the previous state; the trace records contact data, energies, dissipation
//! increments, and both pressure evaluations. Between partition times the
//! state is piecewise constant.
//!
//! Pressure conventions. The energy response to the forcing is measured along
//! the volume-compatible flow `h -> h + sV`, `F -> F + s` with a cutoff `V`
//! that vanishes near the plate, equals one beyond `r0`, and has unit average
//! over the inner annulus. The weak pressure
//!
//! `P* = ∫ [h'V'/√(1+h'²) + g(h-F)(V-1)] bm dr`
//!
//! is exactly `dE/ds` and is independent of the admissible cutoff; for an
//! exact equilibrium it collapses to the contact-line value `-σ cos θ_plate`
//! (the container line cancels against the forcing relativity), which is what
//! [`pressure_contact_line`] evaluates. `P*` is the quantity used in the
//! energy-dissipation audit; the contact-line form is tracked for comparison.

use crate::energy::{dissipation, total_energy, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::geometry::{annulus_volume, boundary_measure, GridMeasure, Params};
use crate::solver::{minimize_step, SolverOptions, StableState, StepProblem};
use serde::Serialize;

/// Piecewise-linear forcing `F(t)` on strictly increasing knots starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForcingSchedule {
    knots: Vec<(f64, f64)>,
}

impl ForcingSchedule {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        let mut bad = Vec::new();
        if knots.len() < 2 {
            bad.push("schedule needs at least two knots".to_string());
        } else {
            if knots[0].0 != 0.0 {
                bad.push(format!("first knot time {} != 0", knots[0].0));
            }
            for w in knots.windows(2) {
                if !(w[1].0 > w[0].0) {
                    bad.push(format!("knot times not increasing at t = {}", w[1].0));
                    break;
                }
            }
            if knots.iter().any(|(t, f)| !t.is_finite() || !f.is_finite()) {
                bad.push("knot values must be finite".to_string());
            }
        }
        if bad.is_empty() {
            Ok(ForcingSchedule { knots })
        } else {
            Err(Error::InvalidParams(bad))
        }
    }

    /// Linear ramp `f0 -> f1` over `[0, t_end]`.
    pub fn ramp(f0: f64, f1: f64, t_end: f64) -> Self {
        ForcingSchedule {
            knots: vec![(0.0, f0), (t_end, f1)],
        }
    }

    /// Up-down cycle `f0 -> f_max -> f0` over `[0, t_end]`.
    pub fn cycle(f0: f64, f_max: f64, t_end: f64) -> Self {
        ForcingSchedule {
            knots: vec![(0.0, f0), (0.5 * t_end, f_max), (t_end, f0)],
        }
    }

    /// Piecewise-linear staircase with `steps` rises of equal height and dwell.
    pub fn staircase(f0: f64, f_max: f64, t_end: f64, steps: usize) -> Self {
        let steps = steps.max(1);
        let mut knots = vec![(0.0, f0)];
        let dt = t_end / (2 * steps) as f64;
        let df = (f_max - f0) / steps as f64;
        let mut t = 0.0;
        let mut f = f0;
        for _ in 0..steps {
            t += dt;
            f += df;
            knots.push((t, f));
            t += dt;
            knots.push((t, f));
        }
        knots.last_mut().unwrap().0 = t_end;
        ForcingSchedule { knots }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn t_end(&self) -> f64 {
        self.knots.last().unwrap().0
    }

    pub fn value(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        if t >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|(tk, _)| *tk <= t) - 1;
        let (t0, f0) = k[i];
        let (t1, f1) = k[i + 1];
        f0 + (f1 - f0) * (t - t0) / (t1 - t0)
    }

    /// Total variation of `F` over the schedule.
    pub fn f_total_variation(&self) -> f64 {
        self.knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1).abs())
            .sum()
    }

    /// Uniform δ-partition of `[0, T]` refined to include every knot.
    pub fn partition(&self, delta: f64) -> Vec<f64> {
        let t_end = self.t_end();
        let n = (t_end / delta).ceil().max(1.0) as usize;
        let mut times: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
        for &(t, _) in &self.knots {
            times.push(t);
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * t_end.max(1.0));
        times
    }
}

/// One recorded step of an evolution.
#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub t: f64,
    pub f: f64,
    pub ell: f64,
    pub lambda: f64,
    pub cos_plate: f64,
    pub cos_container: f64,
    pub regime: crate::solver::Regime,
    pub energy: EnergyBreakdown,
    pub diss_inc: f64,
    pub diss_cum: f64,
    pub p_contact: f64,
    pub p_weak: f64,
}

/// Full audit trail of one run. States are kept alongside the scalar rows so
/// downstream checks can reuse the profiles.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub steps: Vec<TraceStep>,
    pub states: Vec<StableState>,
    pub r0_cutoff: f64,
}

impl EvolutionTrace {
    pub fn final_state(&self) -> &StableState {
        self.states.last().unwrap()
    }

    /// Bookkeeping flux `Q_i = P_contact(t_i) ΔF_i / Δt_i` per step.
    pub fn flux(&self) -> Vec<f64> {
        let mut q = Vec::with_capacity(self.steps.len().saturating_sub(1));
        for i in 0..self.steps.len() - 1 {
            let dt = self.steps[i + 1].t - self.steps[i].t;
            let df = self.steps[i + 1].f - self.steps[i].f;
            q.push(self.steps[i].p_contact * df / dt);
        }
        q
    }

    /// Shoelace area of the closed (F, ell) loop traced by the run.
    pub fn loop_area_f_ell(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self.steps.iter().map(|s| (s.f, s.ell)).collect();
        let mut area = 0.0;
        for i in 0..pts.len() {
            let (x0, y0) = pts[i];
            let (x1, y1) = pts[(i + 1) % pts.len()];
            area += x0 * y1 - x1 * y0;
        }
        0.5 * area.abs()
    }

    /// Forward-difference flux integral `Σ P*(t_i) ΔF_i` over the whole run.
    pub fn weak_pressure_loop_integral(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.steps.len() - 1 {
            s += self.steps[i].p_weak * (self.steps[i + 1].f - self.steps[i].f);
        }
        s
    }
}

/// Default cutoff radius for the weak pressure on a given annulus.
pub fn default_r0(p: &Params) -> f64 {
    let outer = p.outer_radius();
    (1.0 + 0.75 * (outer - 1.0)).min(4.0)
}

/// Runs the incremental scheme over a δ-fine partition refined by the knots.
pub fn run(
    schedule: &ForcingSchedule,
    delta: f64,
    p: &Params,
    init: &StableState,
    opts: &SolverOptions,
) -> Result<EvolutionTrace> {
    run_with_partition(schedule, &schedule.partition(delta), p, init, opts)
}

/// Runs the incremental scheme over an explicit partition (used directly by
/// the rate-independence check, which must match F-values across runs).
pub fn run_with_partition(
    schedule: &ForcingSchedule,
    times: &[f64],
    p: &Params,
    init: &StableState,
    opts: &SolverOptions,
) -> Result<EvolutionTrace> {
    let f0 = schedule.value(times[0]);
    if (init.f - f0).abs() > 1e-9 * (1.0 + f0.abs()) {
        return Err(Error::InvalidParams(vec![format!(
            "initial state at F = {} but schedule starts at F = {f0}",
            init.f
        )]));
    }
    let r0 = default_r0(p);
    let cutoff = Cutoff::new(r0, p)?;

    let mut states = vec![init.clone()];
    let mut steps = vec![trace_row(times[0], init, p, &cutoff, 0.0, 0.0)?];
    let mut diss_cum = 0.0;

    for (k, &t) in times.iter().enumerate().skip(1) {
        let f_new = schedule.value(t);
        let prev = states.last().unwrap();
        let sp = StepProblem {
            prev,
            f_new,
            params: p,
            opts: *opts,
        };
        let s = minimize_step(&sp).map_err(|e| Error::StepFailed {
            step: k,
            source: Box::new(e),
        })?;
        let inc = dissipation(prev.ell(), s.ell(), p);
        diss_cum += inc;
        steps.push(trace_row(t, &s, p, &cutoff, inc, diss_cum)?);
        states.push(s);
    }
    Ok(EvolutionTrace {
        steps,
        states,
        r0_cutoff: r0,
    })
}

fn trace_row(
    t: f64,
    s: &StableState,
    p: &Params,
    cutoff: &Cutoff,
    diss_inc: f64,
    diss_cum: f64,
) -> Result<TraceStep> {
    let energy = total_energy(&s.profile, s.f, p)?;
    Ok(TraceStep {
        t,
        f: s.f,
        ell: s.ell(),
        lambda: s.lambda,
        cos_plate: s.cos_plate,
        cos_container: s.cos_container,
        regime: s.regime,
        energy,
        diss_inc,
        diss_cum,
        p_contact: pressure_contact_line(s, p),
        p_weak: pressure_weak_with(s, cutoff, p)?,
    })
}

/// Contact-line pressure: the flux carried by the plate contact line,
/// `-σ cos θ_plate`. The container line drops out of the forcing response
/// because its wetted area is measured relative to `z = F`.
pub fn pressure_contact_line(s: &StableState, p: &Params) -> f64 {
    -p.sigma() * s.cos_plate
}

/// Weak (flow) pressure with the default cutoff radius.
pub fn pressure_weak(s: &StableState, r0: f64, p: &Params) -> Result<f64> {
    let cutoff = Cutoff::new(r0, p)?;
    pressure_weak_with(s, &cutoff, p)
}

fn pressure_weak_with(s: &StableState, cutoff: &Cutoff, p: &Params) -> Result<f64> {
    let gm = GridMeasure::new(&s.profile.grid, p.d)?;
    let r = s.profile.grid.nodes();
    let h = &s.profile.h;
    let mut surf = 0.0;
    for i in 0..gm.dr.len() {
        let slope = (h[i + 1] - h[i]) / gm.dr[i];
        let c = slope / (1.0 + slope * slope).sqrt();
        // 4-point Gauss rule integrates V' bm exactly on each polynomial piece
        surf += c * gauss4(r[i], r[i + 1], |x| {
            cutoff.deriv(x) * boundary_measure(x, p.d).unwrap()
        });
    }
    let mut grav = 0.0;
    for i in 0..h.len() {
        grav += p.g * (h[i] - s.f) * (cutoff.eval(r[i]) - 1.0) * gm.weights[i];
    }
    Ok(surf + grav)
}

/// Energy-dissipation balance over `[t0, t1]` of a trace:
/// `residual = E(t0) - E(t1) + Σ P* ΔF - Σ Diss increments`,
/// with the quadratic-remainder budget `C Σ (ΔF)²`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EdbReport {
    pub residual: f64,
    pub budget: f64,
    pub sum_df_sq: f64,
    pub dissipation: f64,
    pub flux_integral: f64,
}

pub fn edb_report(trace: &EvolutionTrace, t0: f64, t1: f64, p: &Params) -> Result<EdbReport> {
    let steps = &trace.steps;
    let (first, last) = (steps[0].t, steps[steps.len() - 1].t);
    for &t in &[t0, t1] {
        if t < first - 1e-12 || t > last + 1e-12 {
            return Err(Error::TimeOutsideTrace {
                t,
                t0: first,
                t1: last,
            });
        }
    }
    let i0 = steps.partition_point(|s| s.t < t0 - 1e-12);
    let i1 = steps.partition_point(|s| s.t <= t1 + 1e-12) - 1;
    if i0 >= i1 {
        return Err(Error::TimeOutsideTrace {
            t: t1,
            t0: first,
            t1: last,
        });
    }

    let mut flux = 0.0;
    let mut diss = 0.0;
    let mut df2 = 0.0;
    for i in i0..i1 {
        let df = steps[i + 1].f - steps[i].f;
        flux += steps[i].p_weak * df;
        diss += steps[i + 1].diss_inc;
        df2 += df * df;
    }
    let residual = steps[i0].energy.total - steps[i1].energy.total + flux - diss;

    // remainder constant from the second-derivative bound of the flow
    let cutoff = Cutoff::new(trace.r0_cutoff, p)?;
    let mut c_rem: f64 = 0.0;
    for s in &trace.states[i0..=i1] {
        let a_surf = surface_area_inside(s, trace.r0_cutoff, p)?;
        let c = 0.5
            * (2.0 * a_surf * cutoff.max_deriv * cutoff.max_deriv
                + p.g
                    * annulus_volume_capped(trace.r0_cutoff, p)
                    * (1.0 + cutoff.max_value * cutoff.max_value));
        c_rem = c_rem.max(c);
    }
    Ok(EdbReport {
        residual,
        budget: c_rem * df2,
        sum_df_sq: df2,
        dissipation: diss,
        flux_integral: flux,
    })
}

fn annulus_volume_capped(r0: f64, p: &Params) -> f64 {
    annulus_volume(r0.min(p.outer_radius()), p.d).unwrap_or(1.0)
}

fn surface_area_inside(s: &StableState, r0: f64, p: &Params) -> Result<f64> {
    let gm = GridMeasure::new(&s.profile.grid, p.d)?;
    let r = s.profile.grid.nodes();
    let h = &s.profile.h;
    let mut a = 0.0;
    for i in 0..gm.dr.len() {
        if r[i] >= r0 {
            break;
        }
        let slope = (h[i + 1] - h[i]) / gm.dr[i];
        a += (1.0 + slope * slope).sqrt() * gm.cell_bm[i];
    }
    Ok(a)
}

/// Report of a rate-independence comparison between a run and its
/// time-reparametrized twin with matched F-values.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateIndependenceReport {
    pub max_ell_deviation: f64,
    pub max_profile_deviation: f64,
    pub pass: bool,
}

/// Runs `schedule` on its δ-partition, then re-runs under the strictly
/// increasing time map `phi` with the mapped partition (identical F-values),
/// and compares states stepwise.
pub fn rate_independence_check(
    schedule: &ForcingSchedule,
    phi: impl Fn(f64) -> f64,
    delta: f64,
    p: &Params,
    init: &StableState,
    opts: &SolverOptions,
) -> Result<RateIndependenceReport> {
    let times = schedule.partition(delta);
    let a = run_with_partition(schedule, &times, p, init, opts)?;
    let mapped: Vec<f64> = times.iter().map(|&t| phi(t)).collect();
    // knot the twin schedule through every sampled (phi(t_i), F(t_i)) pair so
    // both runs see bitwise-identical F-sequences; linear interpolation does
    // not commute with a nonlinear time map between coarser knots
    let knots_b: Vec<(f64, f64)> = times
        .iter()
        .map(|&t| (phi(t), schedule.value(t)))
        .collect();
    let schedule_b = ForcingSchedule::new(knots_b)?;
    let b = run_with_partition(&schedule_b, &mapped, p, init, opts)?;

    let mut d_ell = 0.0f64;
    let mut d_prof = 0.0f64;
    for (sa, sb) in a.states.iter().zip(&b.states) {
        d_ell = d_ell.max((sa.ell() - sb.ell()).abs());
        d_prof = d_prof.max(sa.profile.sup_distance(&sb.profile));
    }
    Ok(RateIndependenceReport {
        max_ell_deviation: d_ell,
        max_profile_deviation: d_prof,
        pass: d_ell <= 1e-9 && d_prof <= 1e-9,
    })
}

/// Writes the trace as CSV: full double precision, LF endings, no timestamps.
pub fn write_trace_csv<W: std::io::Write>(trace: &EvolutionTrace, mut w: W) -> Result<()> {
    w.write_all(
        b"t,F,ell,lambda,cos_plate,cos_container,regime,E_total,diss_inc,diss_cum,P_contact,P_weak\n",
    )?;
    for s in &trace.steps {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.t,
            s.f,
            s.ell,
            s.lambda,
            s.cos_plate,
            s.cos_container,
            s.regime,
            s.energy.total,
            s.diss_inc,
            s.diss_cum,
            s.p_contact,
            s.p_weak
        )?;
    }
    Ok(())
}

/// C¹ cutoff with unit average against the boundary measure on `[1, r0]`:
/// zero near the plate, exactly one beyond `r0 - 0.1`, with a polynomial bump
/// supplying the normalization mass.
pub struct Cutoff {
    a: f64,
    b: f64,
    beta: f64,
    pub max_value: f64,
    pub max_deriv: f64,
}

impl Cutoff {
    pub fn new(r0: f64, p: &Params) -> Result<Self> {
        let outer = p.outer_radius();
        if !(r0 > 1.0) || r0 >= outer {
            return Err(Error::CutoffOutOfRange { r0, outer });
        }
        let a = 1.0 + 0.1 * (r0 - 1.0).min(1.0);
        let b = r0 - 0.1 * (r0 - 1.0).min(1.0);
        let d = p.d;
        // deficit of the plain ramp against unit average
        let lead_in = gauss4(1.0, a, |x| boundary_measure(x, d).unwrap());
        let ramp_deficit = gauss_piecewise(a, b, 16, |x| {
            (1.0 - ramp((x - a) / (b - a))) * boundary_measure(x, d).unwrap()
        });
        let bump_mass = gauss_piecewise(a, b, 16, |x| {
            bump((x - a) / (b - a)) * boundary_measure(x, d).unwrap()
        });
        let beta = (lead_in + ramp_deficit) / bump_mass;
        let mut max_value: f64 = 0.0;
        let mut max_deriv: f64 = 0.0;
        let probe = 2000;
        let mut me = Cutoff {
            a,
            b,
            beta,
            max_value: 0.0,
            max_deriv: 0.0,
        };
        for i in 0..=probe {
            let x = 1.0 + (r0 - 1.0) * i as f64 / probe as f64;
            max_value = max_value.max(me.eval(x).abs());
            max_deriv = max_deriv.max(me.deriv(x).abs());
        }
        me.max_value = max_value.max(1.0);
        me.max_deriv = max_deriv;
        Ok(me)
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= self.a {
            0.0
        } else if r >= self.b {
            1.0
        } else {
            let x = (r - self.a) / (self.b - self.a);
            ramp(x) + self.beta * bump(x)
        }
    }

    pub fn deriv(&self, r: f64) -> f64 {
        if r <= self.a || r >= self.b {
            0.0
        } else {
            let l = self.b - self.a;
            let x = (r - self.a) / l;
            (ramp_d(x) + self.beta * bump_d(x)) / l
        }
    }

    /// `∫_1^{r0} V bm dr`, for the normalization test.
    pub fn average_mass(&self, r0: f64, p: &Params) -> f64 {
        gauss_piecewise(1.0, r0, 64, |x| {
            self.eval(x) * boundary_measure(x, p.d).unwrap()
        })
    }
}

fn ramp(x: f64) -> f64 {
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

fn ramp_d(x: f64) -> f64 {
    30.0 * x * x * (1.0 - x) * (1.0 - x)
}

fn bump(x: f64) -> f64 {
    let u = x * (1.0 - x);
    u * u * u * 64.0
}

fn bump_d(x: f64) -> f64 {
    let u = x * (1.0 - x);
    3.0 * u * u * (1.0 - 2.0 * x) * 64.0
}

const GAUSS4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GAUSS4_W: [f64; 4] = [
    0.347_854_845_137_453_85,
    0.652_145_154_862_546_2,
    0.652_145_154_862_546_2,
    0.347_854_845_137_453_85,
];

fn gauss4(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..4 {
        s += GAUSS4_W[i] * f(mid + half * GAUSS4_X[i]);
    }
    s * half
}

fn gauss_piecewise(a: f64, b: f64, pieces: usize, f: impl Fn(f64) -> f64) -> f64 {
    let mut s = 0.0;
    for k in 0..pieces {
        let x0 = a + (b - a) * k as f64 / pieces as f64;
        let x1 = a + (b - a) * (k + 1) as f64 / pieces as f64;
        s += gauss4(x0, x1, &f);
    }
    s
}

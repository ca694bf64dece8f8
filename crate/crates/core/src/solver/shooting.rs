//! Independent shooting oracle for the radial Euler-Lagrange ODE.
//!
//! Integrates `-H(h) + g(h - F) = λ` written as a first-order system in
//! `(h, h')` from `r = 1` outward with an adaptive Dormand-Prince 5(4) step,
//! shooting on the free initial datum to meet the outer boundary condition by
//! bisection. An optional secant loop over `λ` enforces the volume constraint.
//! This path shares nothing with the Newton/KKT solver.

use crate::energy::Profile;
use crate::error::{Error, Result};
use crate::geometry::{annulus_volume, boundary_measure, Params, RadialGrid};

/// Plate-side boundary condition for the shoot.
#[derive(Debug, Clone, Copy)]
pub enum PlateBc {
    /// Fixed contact height; the slope at the plate is the shooting unknown.
    Height(f64),
    /// Fixed contact cosine; the contact height is the shooting unknown.
    Angle(f64),
}

/// Multiplier handling.
#[derive(Debug, Clone, Copy)]
pub enum LambdaSpec {
    Fixed(f64),
    /// Secant iteration drives the volume functional to zero (finite R only).
    SolveVolume,
}

#[derive(Debug, Clone)]
pub struct ShootResult {
    /// Solution sampled onto the requested grid by cubic Hermite interpolation.
    pub profile: Profile,
    pub lambda: f64,
    pub ell: f64,
    /// Achieved outer cosine (finite) or far-field height error (infinite).
    pub outer_misfit: f64,
    /// Volume functional of the integrated solution (finite R).
    pub volume: f64,
}

const RTOL: f64 = 1e-11;
const ATOL: f64 = 1e-13;
const MAX_STEPS: usize = 200_000;

struct OdeRun {
    /// Accepted nodes (r, h, h').
    path: Vec<(f64, f64, f64)>,
    /// Volume integral accumulated along the run.
    volume: f64,
    /// Some(sign) when the integration blew past the guard rails.
    diverged: Option<f64>,
}

fn cos_slope(v: f64) -> f64 {
    v / (1.0 + v * v).sqrt()
}

fn rhs(r: f64, h: f64, v: f64, f: f64, lambda: f64, p: &Params) -> (f64, f64) {
    let q = 1.0 + v * v;
    let curv_lower = (p.d as f64 - 2.0) / r * v / q.sqrt();
    let dv = q.powf(1.5) * (p.g * (h - f) - lambda - curv_lower);
    (v, dv)
}

/// One adaptive Dormand-Prince sweep from `r = 1` to `r = outer`.
fn integrate(ell: f64, v0: f64, f: f64, lambda: f64, p: &Params, outer: f64) -> OdeRun {
    let guard_h = 3.0 * p.h_max();
    let mut r = 1.0;
    let mut y = [ell, v0, 0.0];
    let mut dr = (outer - 1.0) / 256.0;
    let mut path = vec![(r, y[0], y[1])];
    let mut diverged = None;

    let deriv = |r: f64, y: &[f64; 3]| -> [f64; 3] {
        let (dh, dv) = rhs(r, y[0], y[1], f, lambda, p);
        let bm = boundary_measure(r, p.d).unwrap_or(0.0);
        [dh, dv, (y[0] - f) * bm]
    };

    for _ in 0..MAX_STEPS {
        if r >= outer {
            break;
        }
        if dr > outer - r {
            dr = outer - r;
        }
        let k1 = deriv(r, &y);
        let y2 = add(&y, &[&k1], &[0.2 * dr]);
        let k2 = deriv(r + 0.2 * dr, &y2);
        let y3 = add(&y, &[&k1, &k2], &[3.0 / 40.0 * dr, 9.0 / 40.0 * dr]);
        let k3 = deriv(r + 0.3 * dr, &y3);
        let y4 = add(
            &y,
            &[&k1, &k2, &k3],
            &[44.0 / 45.0 * dr, -56.0 / 15.0 * dr, 32.0 / 9.0 * dr],
        );
        let k4 = deriv(r + 0.8 * dr, &y4);
        let y5 = add(
            &y,
            &[&k1, &k2, &k3, &k4],
            &[
                19372.0 / 6561.0 * dr,
                -25360.0 / 2187.0 * dr,
                64448.0 / 6561.0 * dr,
                -212.0 / 729.0 * dr,
            ],
        );
        let k5 = deriv(r + 8.0 / 9.0 * dr, &y5);
        let y6 = add(
            &y,
            &[&k1, &k2, &k3, &k4, &k5],
            &[
                9017.0 / 3168.0 * dr,
                -355.0 / 33.0 * dr,
                46732.0 / 5247.0 * dr,
                49.0 / 176.0 * dr,
                -5103.0 / 18656.0 * dr,
            ],
        );
        let k6 = deriv(r + dr, &y6);
        let y_new = add(
            &y,
            &[&k1, &k3, &k4, &k5, &k6],
            &[
                35.0 / 384.0 * dr,
                500.0 / 1113.0 * dr,
                125.0 / 192.0 * dr,
                -2187.0 / 6784.0 * dr,
                11.0 / 84.0 * dr,
            ],
        );
        let k7 = deriv(r + dr, &y_new);
        let y_low = add(
            &y,
            &[&k1, &k3, &k4, &k5, &k6, &k7],
            &[
                5179.0 / 57600.0 * dr,
                7571.0 / 16695.0 * dr,
                393.0 / 640.0 * dr,
                -92097.0 / 339200.0 * dr,
                187.0 / 2100.0 * dr,
                1.0 / 40.0 * dr,
            ],
        );

        let mut err: f64 = 0.0;
        for i in 0..3 {
            let scale = ATOL + RTOL * y[i].abs().max(y_new[i].abs());
            err = err.max((y_new[i] - y_low[i]).abs() / scale);
        }
        if err <= 1.0 || dr <= 1e-13 * outer {
            r += dr;
            y = y_new;
            path.push((r, y[0], y[1]));
            if (y[0] - f).abs() > guard_h || y[1].abs() > 1e6 {
                diverged = Some(if y[0] - f != 0.0 {
                    (y[0] - f).signum()
                } else {
                    y[1].signum()
                });
                break;
            }
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        dr *= factor;
    }

    OdeRun {
        volume: y[2],
        path,
        diverged,
    }
}

fn add(y: &[f64; 3], ks: &[&[f64; 3]], cs: &[f64]) -> [f64; 3] {
    let mut out = *y;
    for (k, c) in ks.iter().zip(cs) {
        for i in 0..3 {
            out[i] += c * k[i];
        }
    }
    out
}

/// Shooting misfit: signed distance to the outer target, with divergence
/// mapped to saturated values so bracket scans keep a sign structure.
fn misfit(run: &OdeRun, f: f64, p: &Params, outer: f64) -> f64 {
    if let Some(sign) = run.diverged {
        return sign * 10.0;
    }
    let &(r_end, h_end, v_end) = run.path.last().unwrap();
    if (r_end - outer).abs() > 1e-9 * outer {
        // ran out of steps short of the boundary; treat as divergence
        return (h_end - f).signum() * 10.0;
    }
    if p.is_finite() {
        cos_slope(v_end) - p.cos_yc
    } else {
        h_end - f
    }
}

fn shoot_once(bc: PlateBc, xi: f64, f: f64, lambda: f64, p: &Params, outer: f64) -> OdeRun {
    let (ell, v0) = match bc {
        PlateBc::Height(ell) => (ell, xi),
        PlateBc::Angle(cos_p) => {
            // cos θ_plate = -h'(1)/sqrt(1 + h'(1)^2)
            let v = -cos_p / (1.0 - cos_p * cos_p).sqrt();
            (xi, v)
        }
    };
    integrate(ell, v0, f, lambda, p, outer)
}

fn solve_shoot(bc: PlateBc, f: f64, lambda: f64, p: &Params) -> Result<OdeRun> {
    let outer = p.outer_radius();
    let (center, span) = match bc {
        PlateBc::Angle(_) => (f + lambda / p.g, 2.0 * (1.0 + 1.0 / p.g.sqrt())),
        PlateBc::Height(_) => (0.0, 20.0),
    };
    let scan = 160;
    let mut lo = f64::NAN;
    let mut hi = f64::NAN;
    let mut prev_xi = center - span;
    let mut prev_m = misfit(&shoot_once(bc, prev_xi, f, lambda, p, outer), f, p, outer);
    for k in 1..=scan {
        let xi = center - span + 2.0 * span * k as f64 / scan as f64;
        let m = misfit(&shoot_once(bc, xi, f, lambda, p, outer), f, p, outer);
        if prev_m == 0.0 {
            lo = prev_xi;
            hi = prev_xi;
            break;
        }
        if m == 0.0 || m.signum() != prev_m.signum() {
            lo = prev_xi;
            hi = xi;
            break;
        }
        prev_xi = xi;
        prev_m = m;
    }
    if lo.is_nan() {
        return Err(Error::ShootingBracket {
            lo: center - span,
            hi: center + span,
            target: if p.is_finite() {
                format!("cos θ_container = {}", p.cos_yc)
            } else {
                format!("h({outer}) = {f}")
            },
        });
    }

    let mut m_lo = misfit(&shoot_once(bc, lo, f, lambda, p, outer), f, p, outer);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let m = misfit(&shoot_once(bc, mid, f, lambda, p, outer), f, p, outer);
        if m == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if m.signum() == m_lo.signum() {
            lo = mid;
            m_lo = m;
        } else {
            hi = mid;
        }
    }
    Ok(shoot_once(bc, 0.5 * (lo + hi), f, lambda, p, outer))
}

/// Integrates the Euler-Lagrange ODE with the requested plate condition,
/// sampling onto `sample_grid`. With [`LambdaSpec::SolveVolume`] a secant loop
/// adjusts `λ` until the volume functional vanishes.
pub fn shoot_oracle(
    f: f64,
    lambda: LambdaSpec,
    plate_bc: PlateBc,
    p: &Params,
    sample_grid: &RadialGrid,
) -> Result<ShootResult> {
    let outer = p.outer_radius();
    match lambda {
        LambdaSpec::Fixed(l) => {
            let run = solve_shoot(plate_bc, f, l, p)?;
            finish(run, f, l, p, outer, sample_grid)
        }
        LambdaSpec::SolveVolume => {
            if !p.is_finite() {
                return Err(Error::InfiniteRadius);
            }
            let vol = annulus_volume(outer, p.d)?;
            let tol = 1e-12 * vol;
            let bm_r = boundary_measure(outer, p.d)?;
            // leading-order multiplier guess from the contact-line identity
            let mut l0 = -(bm_r * p.cos_yc) / vol;
            if let PlateBc::Angle(cos_p) = plate_bc {
                l0 -= p.sigma() * cos_p / vol;
            }
            let mut l1 = l0 + (0.1 * l0.abs()).max(1e-3);
            let mut v0 = solve_shoot(plate_bc, f, l0, p)?.volume;
            if v0.abs() <= tol {
                let run = solve_shoot(plate_bc, f, l0, p)?;
                return finish(run, f, l0, p, outer, sample_grid);
            }
            let mut v1 = solve_shoot(plate_bc, f, l1, p)?.volume;
            for _ in 0..80 {
                if v1.abs() <= tol {
                    let run = solve_shoot(plate_bc, f, l1, p)?;
                    return finish(run, f, l1, p, outer, sample_grid);
                }
                let dv = v1 - v0;
                if dv.abs() < f64::MIN_POSITIVE * 1e10 {
                    break;
                }
                let l2 = l1 - v1 * (l1 - l0) / dv;
                l0 = l1;
                v0 = v1;
                l1 = l2;
                v1 = solve_shoot(plate_bc, f, l1, p)?.volume;
            }
            Err(Error::VolumeSecant { volume: v1 })
        }
    }
}

fn finish(
    run: OdeRun,
    f: f64,
    lambda: f64,
    p: &Params,
    outer: f64,
    sample_grid: &RadialGrid,
) -> Result<ShootResult> {
    if run.diverged.is_some() {
        return Err(Error::ShootingBracket {
            lo: f64::NAN,
            hi: f64::NAN,
            target: "integration diverged at the converged parameter".into(),
        });
    }
    let mis = misfit(&run, f, p, outer);
    let h = sample_path(&run.path, sample_grid);
    let ell = run.path[0].1;
    Ok(ShootResult {
        profile: Profile::new(sample_grid.clone(), h)?,
        lambda,
        ell,
        outer_misfit: mis,
        volume: run.volume,
    })
}

/// Cubic Hermite sampling of the integrated path onto grid nodes.
fn sample_path(path: &[(f64, f64, f64)], grid: &RadialGrid) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut k = 0;
    for &r in grid.nodes() {
        while k + 1 < path.len() - 1 && path[k + 1].0 < r {
            k += 1;
        }
        let (r0, h0, v0) = path[k];
        let (r1, h1, v1) = path[k + 1];
        let w = r1 - r0;
        let t = ((r - r0) / w).clamp(0.0, 1.0);
        let t2 = t * t;
        let t3 = t2 * t;
        let h = (2.0 * t3 - 3.0 * t2 + 1.0) * h0
            + (t3 - 2.0 * t2 + t) * w * v0
            + (-2.0 * t3 + 3.0 * t2) * h1
            + (t3 - t2) * w * v1;
        out.push(h);
    }
    out
}

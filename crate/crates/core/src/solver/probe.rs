//! Finite battery of volume-preserving competitors probing global stability.
//!
//! Each competitor L' is scored by `E[L'] + Diss(L, L') - E[L]`; the minimum
//! margin over the battery is reported. A clearly negative margin flags a
//! state the solver should not have returned. The battery is finite by
//! construction: vertical sawtooth pairs on single nodes, smooth bump /
//! anti-bump pairs, and contact-height moves compensated by a surface tilt.

use crate::energy::{dissipation, total_energy, Profile};
use crate::error::Result;
use crate::geometry::{GridMeasure, Params};
use crate::parallel;
use crate::solver::StableState;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub min_margin: f64,
    pub worst_competitor: String,
    pub competitors: usize,
    /// Margins below `-tol` indicate instability.
    pub tol: f64,
}

struct Competitor {
    label: String,
    delta: Vec<f64>,
}

fn smooth_bump(r: &[f64], center: f64, width: f64) -> Vec<f64> {
    r.iter()
        .map(|&x| {
            let t = (x - center) / width;
            if t.abs() >= 1.0 {
                0.0
            } else {
                let u = 1.0 - t * t;
                u * u * u
            }
        })
        .collect()
}

/// Builds the battery of volume-neutral perturbations (finite container) or
/// far-field-preserving perturbations (infinite container).
fn battery(s: &StableState, p: &Params, amplitudes: &[f64]) -> Result<Vec<Competitor>> {
    let grid = &s.profile.grid;
    let gm = GridMeasure::new(grid, p.d)?;
    let r = grid.nodes();
    let n = r.len();
    let finite = p.is_finite();
    let w = &gm.weights;
    let mut out = Vec::new();

    let mut push_pair = |label: String, mut delta: Vec<f64>, eps: f64| {
        if !finite {
            // far-field closure: keep the outer node fixed
            delta[n - 1] = 0.0;
        }
        for d in delta.iter_mut() {
            *d *= eps;
        }
        out.push(Competitor { label, delta });
    };

    // node-level sawtooth pairs: raise node i, lower node j, volume-neutral
    let picks: Vec<usize> = (0..6).map(|k| 1 + k * (n - 2) / 5).collect();
    for (a, &i) in picks.iter().enumerate() {
        for &j in picks.iter().skip(a + 1) {
            if i == j {
                continue;
            }
            for &eps in amplitudes {
                let mut delta = vec![0.0; n];
                if finite {
                    delta[i] = 1.0 / w[i];
                    delta[j] = -1.0 / w[j];
                } else {
                    delta[i] = 1.0;
                    delta[j] = -1.0;
                }
                push_pair(format!("sawtooth[{i},{j}]e{eps}"), delta, eps);
                let mut delta = vec![0.0; n];
                if finite {
                    delta[i] = -1.0 / w[i];
                    delta[j] = 1.0 / w[j];
                } else {
                    delta[i] = -1.0;
                    delta[j] = 1.0;
                }
                push_pair(format!("sawtooth[{j},{i}]e{eps}"), delta, eps);
            }
        }
    }

    // smooth bump / anti-bump pairs at staggered centers
    let span = grid.outer() - 1.0;
    let centers = [0.15, 0.35, 0.55, 0.8];
    for (a, &ca) in centers.iter().enumerate() {
        for &cb in centers.iter().skip(a + 1) {
            let phi_a = smooth_bump(r, 1.0 + ca * span, 0.2 * span);
            let phi_b = smooth_bump(r, 1.0 + cb * span, 0.2 * span);
            let ma: f64 = phi_a.iter().zip(w).map(|(x, wi)| x * wi).sum();
            let mb: f64 = phi_b.iter().zip(w).map(|(x, wi)| x * wi).sum();
            if ma.abs() < 1e-12 || mb.abs() < 1e-12 {
                continue;
            }
            for &eps in amplitudes {
                for sign in [1.0, -1.0] {
                    let delta: Vec<f64> = phi_a
                        .iter()
                        .zip(&phi_b)
                        .map(|(x, y)| sign * (x / ma - y / mb))
                        .collect();
                    push_pair(format!("bump[{ca},{cb}]s{sign}e{eps}"), delta, eps);
                }
            }
        }
    }

    // contact-height moves with a compensating tilt of the surface
    let chi: Vec<f64> = r
        .iter()
        .map(|&x| (-(x - 1.0) * p.g.sqrt()).exp())
        .collect();
    let mchi: f64 = chi.iter().zip(w).map(|(x, wi)| x * wi).sum();
    let total: f64 = w.iter().sum();
    for &eps in amplitudes {
        for sign in [1.0, -1.0] {
            let delta: Vec<f64> = if finite {
                chi.iter().map(|&x| sign * (x - mchi / total)).collect()
            } else {
                chi.iter().map(|&x| sign * x).collect()
            };
            push_pair(format!("contact-move s{sign}e{eps}"), delta, eps);
        }
    }

    Ok(out)
}

/// Evaluates the battery and reports the minimum stability margin.
pub fn stability_probe(s: &StableState, p: &Params) -> Result<ProbeReport> {
    let amplitudes = [1e-3, 1e-2, 5e-2];
    let comps = battery(s, p, &amplitudes)?;
    let base = total_energy(&s.profile, s.f, p)?.total;
    let grid = &s.profile.grid;

    let margins: Vec<(f64, String)> = parallel::map_batch(&comps, |c| {
        let h: Vec<f64> = s
            .profile
            .h
            .iter()
            .zip(&c.delta)
            .map(|(a, b)| a + b)
            .collect();
        let ell_new = h[0];
        let prof = Profile {
            grid: grid.clone(),
            h,
        };
        let e = match total_energy(&prof, s.f, p) {
            Ok(e) => e.total,
            Err(_) => f64::INFINITY,
        };
        let margin = e + dissipation(s.ell(), ell_new, p) - base;
        (margin, c.label.clone())
    });

    let mut min_margin = f64::INFINITY;
    let mut worst = String::new();
    for (m, label) in margins {
        if m < min_margin {
            min_margin = m;
            worst = label;
        }
    }
    Ok(ProbeReport {
        min_margin,
        worst_competitor: worst,
        competitors: comps.len(),
        tol: 1e-8,
    })
}

//! Run configuration: line-oriented `key = value` text with `#` comments and
//! bracketed section headers. Keys before any header belong to `[params]`.
//! Unknown keys are rejected; duplicate keys report both lines.

use crate::energy::Profile;
use crate::error::{Error, Result};
use crate::evolution::ForcingSchedule;
use crate::geometry::{ContainerRatio, Grading, Params, RadialGrid};
use crate::solver::SolverOptions;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Clone, Serialize)]
pub struct GridConfig {
    pub n: usize,
    pub grading: Grading,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleConfig {
    pub preset: Option<String>,
    pub knots: Option<Vec<(f64, f64)>>,
    pub f0: f64,
    pub f_max: f64,
    pub t_end: f64,
    pub steps: usize,
    /// Partition fineness; defaults to `t_end / 200`.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub r_list: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BarrierConfig {
    /// Explicit (a, A, b, B); when absent the recipe picks them.
    pub explicit: Option<(f64, f64, f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub params: Params,
    pub grid: GridConfig,
    pub schedule: ScheduleConfig,
    pub solver: SolverOptions,
    pub sweep: SweepConfig,
    pub barriers: BarrierConfig,
    pub out_dir: String,
}

impl RunConfig {
    pub fn schedule(&self) -> Result<ForcingSchedule> {
        let sc = &self.schedule;
        if let Some(knots) = &sc.knots {
            return ForcingSchedule::new(knots.clone());
        }
        match sc.preset.as_deref() {
            None | Some("ramp") => Ok(ForcingSchedule::ramp(sc.f0, sc.f_max, sc.t_end)),
            Some("cycle") => Ok(ForcingSchedule::cycle(sc.f0, sc.f_max, sc.t_end)),
            Some("staircase") => Ok(ForcingSchedule::staircase(
                sc.f0, sc.f_max, sc.t_end, sc.steps,
            )),
            Some(other) => Err(Error::Config {
                line: 0,
                msg: format!("unknown schedule preset '{other}'"),
            }),
        }
    }

    pub fn delta(&self) -> f64 {
        self.schedule.delta.unwrap_or(self.schedule.t_end / 200.0)
    }

    pub fn make_grid(&self) -> Result<RadialGrid> {
        crate::geometry::make_grid(&self.params, self.grid.n, self.grid.grading)
    }
}

fn defaults() -> RunConfig {
    RunConfig {
        params: Params::default(),
        grid: GridConfig {
            n: 256,
            grading: Grading::Uniform,
        },
        schedule: ScheduleConfig {
            preset: None,
            knots: None,
            f0: 0.0,
            f_max: 1.0,
            t_end: 2.0,
            steps: 4,
            delta: None,
        },
        solver: SolverOptions::default(),
        sweep: SweepConfig {
            r_list: vec![8.0, 16.0, 32.0, 64.0],
        },
        barriers: BarrierConfig { explicit: None },
        out_dir: "out".to_string(),
    }
}

fn parse_f64(v: &str, line: usize) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::Config {
        line,
        msg: format!("expected a number, got '{v}'"),
    })
}

fn parse_usize(v: &str, line: usize) -> Result<usize> {
    v.parse::<usize>().map_err(|_| Error::Config {
        line,
        msg: format!("expected an integer, got '{v}'"),
    })
}

fn parse_knots(v: &str, line: usize) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for item in v.split(',') {
        let item = item.trim();
        let (t, f) = item.split_once(':').ok_or_else(|| Error::Config {
            line,
            msg: format!("knot '{item}' must be t:F"),
        })?;
        out.push((parse_f64(t.trim(), line)?, parse_f64(f.trim(), line)?));
    }
    Ok(out)
}

/// Parses configuration text into a fully-populated [`RunConfig`].
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = defaults();
    let mut section = "params".to_string();
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    let mut barrier_parts: HashMap<String, f64> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(Error::Config {
                    line: lineno,
                    msg: format!("malformed section header '{line}'"),
                });
            }
            section = line[1..line.len() - 1].trim().to_lowercase();
            match section.as_str() {
                "params" | "grid" | "schedule" | "solver" | "sweep" | "barriers" | "outputs" => {}
                other => {
                    return Err(Error::Config {
                        line: lineno,
                        msg: format!("unknown section '[{other}]'"),
                    })
                }
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
            line: lineno,
            msg: format!("expected 'key = value', got '{line}'"),
        })?;
        let key = key.trim().to_lowercase();
        let value = value.trim();
        if let Some(first) = seen.insert((section.clone(), key.clone()), lineno) {
            return Err(Error::Config {
                line: lineno,
                msg: format!("duplicate key '{key}' (first set at line {first})"),
            });
        }

        match (section.as_str(), key.as_str()) {
            ("params", "d") => cfg.params.d = parse_usize(value, lineno)? as u32,
            ("params", "g") => cfg.params.g = parse_f64(value, lineno)?,
            ("params", "cos_yp") => cfg.params.cos_yp = parse_f64(value, lineno)?,
            ("params", "cos_yc") => cfg.params.cos_yc = parse_f64(value, lineno)?,
            ("params", "mu_plus") => cfg.params.mu_plus = parse_f64(value, lineno)?,
            ("params", "mu_minus") => cfg.params.mu_minus = parse_f64(value, lineno)?,
            ("params", "r") => {
                cfg.params.r = if value.eq_ignore_ascii_case("inf")
                    || value.eq_ignore_ascii_case("infinite")
                {
                    ContainerRatio::Infinite
                } else {
                    ContainerRatio::Finite(parse_f64(value, lineno)?)
                }
            }
            ("params", "r_trunc") => cfg.params.r_trunc = parse_f64(value, lineno)?,
            ("grid", "n") => cfg.grid.n = parse_usize(value, lineno)?,
            ("grid", "grading") => {
                cfg.grid.grading = match value {
                    "uniform" => Grading::Uniform,
                    "boundary-refined" => Grading::BoundaryRefined,
                    other => {
                        return Err(Error::Config {
                            line: lineno,
                            msg: format!("grading must be uniform or boundary-refined, got '{other}'"),
                        })
                    }
                }
            }
            ("schedule", "preset") => cfg.schedule.preset = Some(value.to_string()),
            ("schedule", "knots") => cfg.schedule.knots = Some(parse_knots(value, lineno)?),
            ("schedule", "f0") => cfg.schedule.f0 = parse_f64(value, lineno)?,
            ("schedule", "f_max") => cfg.schedule.f_max = parse_f64(value, lineno)?,
            ("schedule", "t_end") => cfg.schedule.t_end = parse_f64(value, lineno)?,
            ("schedule", "steps") => cfg.schedule.steps = parse_usize(value, lineno)?,
            ("schedule", "delta") => cfg.schedule.delta = Some(parse_f64(value, lineno)?),
            ("solver", "tol_kkt") => cfg.solver.tol_kkt = parse_f64(value, lineno)?,
            ("solver", "tol_vol_factor") => cfg.solver.tol_vol_factor = parse_f64(value, lineno)?,
            ("solver", "tol_angle") => cfg.solver.tol_angle = parse_f64(value, lineno)?,
            ("solver", "max_iters") => cfg.solver.max_iters = parse_usize(value, lineno)?,
            ("sweep", "r_list") => {
                let mut list = Vec::new();
                for item in value.split(',') {
                    list.push(parse_f64(item.trim(), lineno)?);
                }
                cfg.sweep.r_list = list;
            }
            ("barriers", "a" | "amp_a" | "b" | "amp_b") => {
                barrier_parts.insert(key.clone(), parse_f64(value, lineno)?);
            }
            ("outputs", "dir") => cfg.out_dir = value.to_string(),
            (sec, k) => {
                return Err(Error::Config {
                    line: lineno,
                    msg: format!("unknown key '{k}' in section '[{sec}]'"),
                })
            }
        }
    }

    if !barrier_parts.is_empty() {
        let need = ["a", "amp_a", "b", "amp_b"];
        if need.iter().all(|k| barrier_parts.contains_key(*k)) {
            cfg.barriers.explicit = Some((
                barrier_parts["a"],
                barrier_parts["amp_a"],
                barrier_parts["b"],
                barrier_parts["amp_b"],
            ));
        } else {
            return Err(Error::Config {
                line: 0,
                msg: "barriers section needs all of a, amp_a, b, amp_b".to_string(),
            });
        }
    }

    cfg.params = cfg.params.validated()?;
    if let Some(knots) = &cfg.schedule.knots {
        // surface schedule errors at parse time
        ForcingSchedule::new(knots.clone())?;
    }
    Ok(cfg)
}

/// Writes a profile as `r,h` CSV with shortest round-trip float formatting.
pub fn write_profile_csv<W: std::io::Write>(prof: &Profile, mut w: W) -> Result<()> {
    w.write_all(b"r,h\n")?;
    for (r, h) in prof.grid.nodes().iter().zip(&prof.h) {
        writeln!(w, "{r},{h}")?;
    }
    Ok(())
}

/// Reads a profile back from `r,h` CSV. Exact round trip with
/// [`write_profile_csv`] output.
pub fn read_profile_csv(text: &str, grading: Grading) -> Result<Profile> {
    let mut nodes = Vec::new();
    let mut heights = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            if line.trim() != "r,h" {
                return Err(Error::Config {
                    line: 1,
                    msg: format!("expected header 'r,h', got '{line}'"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (r, h) = line.split_once(',').ok_or_else(|| Error::Config {
            line: idx + 1,
            msg: format!("expected 'r,h' row, got '{line}'"),
        })?;
        nodes.push(parse_f64(r.trim(), idx + 1)?);
        heights.push(parse_f64(h.trim(), idx + 1)?);
    }
    let grid = RadialGrid::from_nodes(nodes, grading)?;
    Profile::new(grid, heights)
}

//! Curated verification battery behind the `validate` CLI command: fast
//! versions of the oracle cross-checks and structural property tests, each
//! reported as a JSON check document.

use crate::asymptotics::{
    barrier_check, barrier_recipe, lambda_remainder_sweep, sliding_comparison_check,
    width_bound_fit,
};
use crate::config::RunConfig;
use crate::energy::total_energy;
use crate::error::Result;
use crate::evolution::{edb_report, pressure_weak, rate_independence_check, run, ForcingSchedule};
use crate::geometry::{make_grid, ContainerRatio, Grading, Params};
use crate::parallel;
use crate::report::CheckReport;
use crate::solver::probe::stability_probe;
use crate::solver::shooting::{shoot_oracle, LambdaSpec, PlateBc};
use crate::solver::{initial_state, solve_equilibrium, EquilibriumMode};
use rand::{Rng, SeedableRng};
use serde_json::json;

/// Runs every check; `seedless` replaces randomized corpora by deterministic
/// enumerations.
pub fn run_validation(cfg: &RunConfig, seedless: bool, quiet: bool) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();
    let opts = cfg.solver;
    let note = |name: &str, ok: bool| {
        if !quiet {
            println!("check {name}: {}", if ok { "PASS" } else { "FAIL" });
        }
    };

    // 1. flat exact solutions and the closed-form energy value
    {
        let p = Params {
            cos_yp: 0.0,
            cos_yc: 0.0,
            mu_plus: 0.2,
            mu_minus: 0.2,
            r: ContainerRatio::Finite(2.0),
            ..Params::default()
        };
        let grid = make_grid(&p, 64, Grading::Uniform)?;
        let s = initial_state(1.0, &p, &grid, &opts)?;
        let flat_dev = s
            .profile
            .h
            .iter()
            .map(|x| (x - 1.0).abs())
            .fold(0.0, f64::max);
        let p_energy = Params {
            cos_yp: 0.5,
            ..p
        };
        let e = total_energy(&s.profile, 1.0, &p_energy)?;
        let err = (e.total - 2.0 * std::f64::consts::PI).abs();
        let ok = flat_dev < 1e-10 && s.lambda.abs() < 1e-10 && err < 1e-10;
        note("flat-exact", ok);
        reports.push(
            CheckReport::new("flat-exact")
                .params(&p_energy)
                .outputs(&json!({"flat_dev": flat_dev, "lambda": s.lambda, "energy": e.total}))
                .margins(&json!({"energy_error": err}))
                .pass(ok),
        );
    }

    // 2. Newton/KKT vs shooting oracle
    {
        let p = Params {
            cos_yp: 0.5,
            cos_yc: 0.3,
            r: ContainerRatio::Finite(8.0),
            ..Params::default()
        };
        let grid = make_grid(&p, 256, Grading::BoundaryRefined)?;
        let s = solve_equilibrium(0.0, &p, &grid, EquilibriumMode::YoungAngles, &opts)?;
        let oracle = shoot_oracle(0.0, LambdaSpec::SolveVolume, PlateBc::Angle(0.5), &p, &grid)?;
        let sup = s.profile.sup_distance(&oracle.profile);
        let dl = (s.lambda - oracle.lambda).abs();
        let dr = 7.0 / 255.0;
        let tol = (1e-5f64).max(10.0 * dr * dr);
        let ok = sup <= tol && dl <= 1e-5;
        note("oracle-equivalence", ok);
        reports.push(
            CheckReport::new("oracle-equivalence")
                .params(&p)
                .outputs(&json!({"sup_distance": sup, "lambda_newton": s.lambda,
                                 "lambda_oracle": oracle.lambda}))
                .margins(&json!({"sup_tol": tol, "lambda_tol": 1e-5}))
                .pass(ok),
        );
    }

    // 3. multiplier decomposition sweep
    {
        let p = Params {
            cos_yp: 0.5,
            cos_yc: 0.3,
            ..Params::default()
        };
        let rep = lambda_remainder_sweep(&p, &[8.0, 16.0, 32.0], 256, &opts)?;
        let ok = rep.within_bound && rep.slope <= -1.8;
        note("lambda-decomposition", ok);
        reports.push(
            CheckReport::new("lambda-decomposition")
                .params(&p)
                .outputs(&rep)
                .margins(&json!({"slope_required": -1.8}))
                .pass(ok),
        );
    }

    // 4. width bound fit
    {
        let p = Params {
            cos_yp: 0.5,
            cos_yc: 0.3,
            r: ContainerRatio::Finite(32.0),
            ..Params::default()
        };
        let grid = make_grid(&p, 512, Grading::BoundaryRefined)?;
        let s = solve_equilibrium(0.0, &p, &grid, EquilibriumMode::YoungAngles, &opts)?;
        let fit = width_bound_fit(&s, &p)?;
        let rel = (fit.rate - p.g.sqrt()).abs() / p.g.sqrt();
        let ok = !fit.layers_overlap && rel < 0.25;
        note("width-bound", ok);
        reports.push(
            CheckReport::new("width-bound")
                .params(&p)
                .outputs(&fit)
                .margins(&json!({"rate_rel_error": rel, "allowed": 0.25}))
                .pass(ok),
        );
    }

    // 5. barrier recipe
    {
        let p = Params {
            cos_yp: 0.4,
            mu_minus: 0.2,
            cos_yc: 0.6,
            r: ContainerRatio::Finite(20.0),
            ..Params::default()
        };
        let (a, ca, b, cb) = cfg
            .barriers
            .explicit
            .unwrap_or_else(|| barrier_recipe(&p));
        let rep = barrier_check(a, ca, b, cb, &p);
        note("barriers", rep.all_positive);
        reports.push(
            CheckReport::new("barriers")
                .params(&p)
                .inputs(&json!({"a": a, "A": ca, "b": b, "B": cb}))
                .outputs(&rep)
                .pass(rep.all_positive),
        );
    }

    // 6. energy-dissipation balance under refinement
    {
        let p = Params {
            cos_yp: 0.5,
            cos_yc: 0.3,
            mu_plus: 0.2,
            mu_minus: 0.2,
            r: ContainerRatio::Finite(8.0),
            ..Params::default()
        };
        let grid = make_grid(&p, 128, Grading::BoundaryRefined)?;
        let init = initial_state(0.0, &p, &grid, &opts)?;
        let schedule = ForcingSchedule::cycle(0.0, 1.0, 2.0);
        let t = schedule.t_end();
        let coarse = run(&schedule, t / 100.0, &p, &init, &opts)?;
        let fine = run(&schedule, t / 200.0, &p, &init, &opts)?;
        let e0 = edb_report(&coarse, 0.0, t, &p)?;
        let e1 = edb_report(&fine, 0.0, t, &p)?;
        let ok = e0.residual.abs() <= e0.budget
            && e1.residual.abs() <= e1.budget
            && e1.residual.abs() <= e0.residual.abs() / 2.0 * 1.5 + 1e-12;
        note("energy-dissipation-balance", ok);
        reports.push(
            CheckReport::new("energy-dissipation-balance")
                .params(&p)
                .outputs(&json!({"coarse": e0, "fine": e1}))
                .pass(ok),
        );
    }

    // 7. rate independence
    {
        let p = Params {
            cos_yp: 0.5,
            cos_yc: 0.3,
            mu_plus: 0.2,
            mu_minus: 0.2,
            r: ContainerRatio::Finite(8.0),
            ..Params::default()
        };
        let grid = make_grid(&p, 128, Grading::BoundaryRefined)?;
        let init = initial_state(0.0, &p, &grid, &opts)?;
        let schedule = ForcingSchedule::cycle(0.0, 1.0, 2.0);
        let rep = rate_independence_check(&schedule, |t| t * t / 2.0, 0.05, &p, &init, &opts)?;
        note("rate-independence", rep.pass);
        reports.push(
            CheckReport::new("rate-independence")
                .params(&p)
                .outputs(&rep)
                .pass(rep.pass),
        );
    }

    // 8. pressure consistency
    {
        let p = Params {
            cos_yp: 0.5,
            cos_yc: 0.3,
            r: ContainerRatio::Finite(8.0),
            ..Params::default()
        };
        let grid = make_grid(&p, 512, Grading::BoundaryRefined)?;
        let s = solve_equilibrium(0.0, &p, &grid, EquilibriumMode::YoungAngles, &opts)?;
        let pw = pressure_weak(&s, 4.0, &p)?;
        let pc = crate::evolution::pressure_contact_line(&s, &p);
        let ok = (pw - pc).abs() <= 1e-3;
        note("pressure-consistency", ok);
        reports.push(
            CheckReport::new("pressure-consistency")
                .params(&p)
                .outputs(&json!({"p_weak": pw, "p_contact": pc}))
                .margins(&json!({"difference": (pw - pc).abs(), "allowed": 1e-3}))
                .pass(ok),
        );
    }

    // 9. sliding comparison over a pair corpus
    {
        let p = Params {
            cos_yp: 0.5,
            cos_yc: 0.3,
            r: ContainerRatio::Finite(16.0),
            ..Params::default()
        };
        let grid = make_grid(&p, 256, Grading::BoundaryRefined)?;
        let n_pairs = 10usize;
        let fs: Vec<(f64, f64)> = if seedless {
            (0..n_pairs)
                .map(|k| {
                    let t = k as f64 / (n_pairs - 1) as f64;
                    (t, 1.0 - 0.5 * t)
                })
                .collect()
        } else {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
            (0..n_pairs)
                .map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)))
                .collect()
        };
        let margins: Vec<Result<f64>> = parallel::map_batch(&fs, |&(f0, f1)| {
            let s0 = solve_equilibrium(f0, &p, &grid, EquilibriumMode::YoungAngles, &opts)?;
            let s1 = solve_equilibrium(f1, &p, &grid, EquilibriumMode::YoungAngles, &opts)?;
            Ok(sliding_comparison_check(&s0, &s1, 8.0, &p)?.margin)
        });
        let mut worst = f64::INFINITY;
        for m in margins {
            worst = worst.min(m?);
        }
        let ok = worst >= 0.0;
        note("sliding-comparison", ok);
        reports.push(
            CheckReport::new("sliding-comparison")
                .params(&p)
                .inputs(&json!({"pairs": n_pairs, "seedless": seedless}))
                .margins(&json!({"worst_margin": worst}))
                .pass(ok),
        );
    }

    // 10. stability probe on a hysteretic state
    {
        let p = Params {
            cos_yp: 0.5,
            cos_yc: 0.3,
            mu_plus: 0.2,
            mu_minus: 0.2,
            r: ContainerRatio::Finite(8.0),
            ..Params::default()
        };
        let grid = make_grid(&p, 192, Grading::BoundaryRefined)?;
        let s = solve_equilibrium(0.0, &p, &grid, EquilibriumMode::Band { l_prev: 0.0 }, &opts)?;
        let rep = stability_probe(&s, &p)?;
        let ok = rep.min_margin >= -1e-8;
        note("stability-probe", ok);
        reports.push(
            CheckReport::new("stability-probe")
                .params(&p)
                .outputs(&rep)
                .pass(ok),
        );
    }

    // 11. hysteresis loop vs dissipation
    {
        let p = Params {
            cos_yp: 0.5,
            cos_yc: 0.3,
            mu_plus: 0.2,
            mu_minus: 0.2,
            r: ContainerRatio::Finite(8.0),
            ..Params::default()
        };
        let grid = make_grid(&p, 128, Grading::BoundaryRefined)?;
        let init = initial_state(0.0, &p, &grid, &opts)?;
        let schedule = ForcingSchedule::cycle(0.0, 1.0, 2.0);
        let trace = run(&schedule, 0.01, &p, &init, &opts)?;
        let edb = edb_report(&trace, 0.0, 2.0, &p)?;
        let loop_integral = trace.weak_pressure_loop_integral();
        let de = trace.steps[0].energy.total - trace.steps.last().unwrap().energy.total;
        let diss = trace.steps.last().unwrap().diss_cum;
        let defect = (loop_integral + de - diss).abs();
        let geo_area = trace.loop_area_f_ell();
        let ok = defect <= edb.budget && geo_area > 1e-4 && diss > 0.0;
        note("hysteresis-loop", ok);
        reports.push(
            CheckReport::new("hysteresis-loop")
                .params(&p)
                .outputs(&json!({"flux_loop": loop_integral, "dissipation": diss,
                                 "energy_drop": de, "geometric_area": geo_area}))
                .margins(&json!({"defect": defect, "budget": edb.budget}))
                .pass(ok),
        );
    }

    Ok(reports)
}

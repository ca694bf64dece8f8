//! Damped Newton solve of the discretized incremental problem.
//!
//! Unknowns are the nodal heights (with the plate height optionally pinned and
//! the outer height optionally Dirichlet for the truncated infinite container)
//! plus the volume multiplier when the constraint is active. The discretized
//! objective
//!
//! `Φ(h) = Σ_cells √(1+s²)·∫bm + Σ_nodes (g/2)(h-F)²·w - κ_p σ h₀ - cos_yc bm(R)(h_N - F)`
//!
//! is convex (strictly, through gravity), so the KKT system has a unique
//! solution and the Hessian is tridiagonal positive definite. Newton steps are
//! computed by an LDLᵀ Thomas factorization with a bordered Schur complement
//! for the multiplier.

use crate::error::{Error, Result};
use crate::geometry::{GridMeasure, Params, RadialGrid};

/// Plate boundary handling for one solve.
#[derive(Debug, Clone, Copy)]
pub(crate) enum PlateCondition {
    /// `h₀` fixed; the realized plate cosine is read off afterwards.
    Pinned(f64),
    /// `h₀` free with plate energy coefficient `κ` (Young cosine shifted by
    /// the active friction edge).
    Angle(f64),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonConfig {
    pub tol_kkt: f64,
    pub tol_vol: f64,
    pub max_iters: usize,
    pub max_backtracks: usize,
    pub record_iterates: bool,
}

pub(crate) struct DiscreteSystem<'a> {
    pub grid: &'a RadialGrid,
    pub gm: GridMeasure,
    pub p: &'a Params,
    pub f: f64,
    pub plate: PlateCondition,
    /// Volume constraint active (finite container).
    pub constrained: bool,
    /// Outer node pinned to `F` (truncated infinite container).
    pub dirichlet_outer: bool,
    /// Container Young cosine entering the natural boundary condition.
    pub container_cos: f64,
}

pub(crate) struct NewtonOutcome {
    pub h: Vec<f64>,
    pub lambda: f64,
    pub iters: usize,
    /// Max of the scaled stationarity and constraint residuals at exit.
    pub residual: f64,
    /// Iterate history, populated only when requested (spectrum audits).
    #[allow(dead_code)]
    pub iterates: Vec<Vec<f64>>,
}

impl<'a> DiscreteSystem<'a> {
    pub fn new(
        grid: &'a RadialGrid,
        p: &'a Params,
        f: f64,
        plate: PlateCondition,
    ) -> Result<Self> {
        let gm = GridMeasure::new(grid, p.d)?;
        let finite = p.is_finite();
        Ok(DiscreteSystem {
            grid,
            gm,
            p,
            f,
            plate,
            constrained: finite,
            dirichlet_outer: !finite,
            container_cos: if finite { p.cos_yc } else { 0.0 },
        })
    }

    /// Drops the volume constraint (reference-configuration solves).
    pub fn unconstrained(mut self) -> Self {
        self.constrained = false;
        self
    }

    fn n(&self) -> usize {
        self.grid.len()
    }

    fn free_range(&self) -> (usize, usize) {
        let lo = match self.plate {
            PlateCondition::Pinned(_) => 1,
            PlateCondition::Angle(_) => 0,
        };
        let hi = if self.dirichlet_outer {
            self.n() - 1
        } else {
            self.n()
        };
        (lo, hi)
    }

    /// Full stationarity gradient `∂Φ/∂h_i - λ w_i` (all nodes, pinned rows included).
    pub fn gradient(&self, h: &[f64], lambda: f64) -> Vec<f64> {
        let n = self.n();
        let gm = &self.gm;
        let mut g = vec![0.0; n];
        for i in 0..n - 1 {
            let s = (h[i + 1] - h[i]) / gm.dr[i];
            let t = gm.cell_bm[i] * s / (1.0 + s * s).sqrt() / gm.dr[i];
            g[i] -= t;
            g[i + 1] += t;
        }
        for i in 0..n {
            g[i] += self.p.g * gm.weights[i] * (h[i] - self.f);
            if self.constrained {
                g[i] -= lambda * gm.weights[i];
            }
        }
        if let PlateCondition::Angle(kappa) = self.plate {
            g[0] -= kappa * self.p.sigma();
        }
        if !self.dirichlet_outer {
            g[n - 1] -= self.container_cos * gm.bm[n - 1];
        }
        g
    }

    pub fn volume_residual(&self, h: &[f64]) -> f64 {
        h.iter()
            .zip(&self.gm.weights)
            .map(|(&hi, &wi)| (hi - self.f) * wi)
            .sum()
    }

    /// Tridiagonal Hessian of `Φ` restricted to the free nodes.
    fn hessian(&self, h: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let gm = &self.gm;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for i in 0..n - 1 {
            let s = (h[i + 1] - h[i]) / gm.dr[i];
            let k = gm.cell_bm[i] / (1.0 + s * s).powf(1.5) / (gm.dr[i] * gm.dr[i]);
            diag[i] += k;
            diag[i + 1] += k;
            off[i] -= k;
        }
        for i in 0..n {
            diag[i] += self.p.g * gm.weights[i];
        }
        (diag, off)
    }

    /// Dense free-node Hessian, for spectrum audits on small grids.
    #[allow(dead_code)]
    pub fn hessian_dense(&self, h: &[f64]) -> Vec<Vec<f64>> {
        let (diag, off) = self.hessian(h);
        let (lo, hi) = self.free_range();
        let m = hi - lo;
        let mut out = vec![vec![0.0; m]; m];
        for i in 0..m {
            out[i][i] = diag[lo + i];
            if i + 1 < m {
                out[i][i + 1] = off[lo + i];
                out[i + 1][i] = off[lo + i];
            }
        }
        out
    }

    /// Rounding floor of each gradient row: the surface-flux terms amplify
    /// height rounding by `cell_bm / dr²`, which dominates on refined grids.
    fn row_noise(&self, h: &[f64]) -> Vec<f64> {
        let n = self.n();
        let gm = &self.gm;
        let mut cell = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let hs = 1.0 + h[i].abs().max(h[i + 1].abs());
            cell.push(4.0 * f64::EPSILON * gm.cell_bm[i] * hs / (gm.dr[i] * gm.dr[i]));
        }
        let mut row = vec![0.0; n];
        for i in 0..n {
            if i > 0 {
                row[i] += cell[i - 1];
            }
            if i < n - 1 {
                row[i] += cell[i];
            }
        }
        row
    }

    /// Scaled residual components: interior stationarity per unit measure,
    /// boundary rows per contact-line measure, constraint per unit volume
    /// factor. Each row is deflated by its rounding floor, which is the
    /// attainable accuracy of the gradient evaluation.
    fn scaled_residuals(&self, h: &[f64], g: &[f64], vol: f64) -> (f64, f64) {
        let n = self.n();
        let (lo, hi) = self.free_range();
        let noise = self.row_noise(h);
        let mut stat: f64 = 0.0;
        for i in lo..hi {
            let scale = if i == 0 {
                self.p.sigma()
            } else if i == n - 1 {
                self.gm.bm[n - 1]
            } else {
                self.gm.weights[i]
            };
            stat = stat.max((g[i].abs() - noise[i]).max(0.0) / scale);
        }
        let volr = if self.constrained { vol.abs() } else { 0.0 };
        (stat, volr)
    }

    fn merit(&self, g: &[f64], vol: f64) -> f64 {
        let n = self.n();
        let (lo, hi) = self.free_range();
        let mut m = 0.0;
        for i in lo..hi {
            let scale = if i == 0 {
                self.p.sigma()
            } else if i == n - 1 {
                self.gm.bm[n - 1]
            } else {
                self.gm.weights[i]
            };
            let x = g[i] / scale;
            m += x * x;
        }
        if self.constrained {
            let x = self.p.g * vol / self.gm.total_volume();
            m += x * x;
        }
        m.sqrt()
    }

    /// Runs the damped Newton iteration from a warm start.
    pub fn solve(
        &self,
        h_init: &[f64],
        lambda_init: f64,
        cfg: &NewtonConfig,
    ) -> Result<NewtonOutcome> {
        let n = self.n();
        assert_eq!(h_init.len(), n);
        let mut h = h_init.to_vec();
        let mut lambda = if self.constrained { lambda_init } else { 0.0 };
        if let PlateCondition::Pinned(ell) = self.plate {
            h[0] = ell;
        }
        if self.dirichlet_outer {
            h[n - 1] = self.f;
        }

        let (lo, hi) = self.free_range();
        let max_step = 0.5 * (1.0 + 1.0 / self.p.g.sqrt());
        let mut iterates = Vec::new();
        let mut last_residual = f64::INFINITY;

        for iter in 0..cfg.max_iters {
            if cfg.record_iterates {
                iterates.push(h.clone());
            }
            let g = self.gradient(&h, lambda);
            let vol = if self.constrained {
                self.volume_residual(&h)
            } else {
                0.0
            };
            let (stat, volr) = self.scaled_residuals(&h, &g, vol);
            let tol_stat = cfg.tol_kkt * (1.0 + lambda.abs());
            last_residual = stat.max(if self.constrained { volr / self.gm.total_volume() } else { 0.0 });
            if stat <= tol_stat && (!self.constrained || volr <= cfg.tol_vol) {
                self.check_ceiling(&h)?;
                return Ok(NewtonOutcome {
                    h,
                    lambda,
                    iters: iter,
                    residual: last_residual,
                    iterates,
                });
            }

            let (diag, off) = self.hessian(&h);
            let fact = TridiagLdl::factor(&diag[lo..hi], &off[lo..hi - 1]);
            let gr: Vec<f64> = g[lo..hi].to_vec();
            let y = fact.solve(&gr);
            let (dh_free, dlambda) = if self.constrained {
                let w: Vec<f64> = self.gm.weights[lo..hi].to_vec();
                let z = fact.solve(&w);
                let wy: f64 = w.iter().zip(&y).map(|(a, b)| a * b).sum();
                let wz: f64 = w.iter().zip(&z).map(|(a, b)| a * b).sum();
                let dl = (wy - vol) / wz;
                let dh: Vec<f64> = z
                    .iter()
                    .zip(&y)
                    .map(|(zi, yi)| zi * dl - yi)
                    .collect();
                (dh, dl)
            } else {
                (y.iter().map(|v| -v).collect(), 0.0)
            };

            // cap the height step to keep the surface inside its trust region
            let mut alpha: f64 = 1.0;
            let dh_max = dh_free.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if dh_max > max_step {
                alpha = max_step / dh_max;
            }

            let m0 = self.merit(&g, vol);
            let mut accepted = false;
            for _ in 0..=cfg.max_backtracks {
                let mut h_try = h.clone();
                for (k, i) in (lo..hi).enumerate() {
                    h_try[i] += alpha * dh_free[k];
                }
                let l_try = lambda + alpha * dlambda;
                let g_try = self.gradient(&h_try, l_try);
                let vol_try = if self.constrained {
                    self.volume_residual(&h_try)
                } else {
                    0.0
                };
                let m1 = self.merit(&g_try, vol_try);
                if m1 < (1.0 - 1e-4 * alpha) * m0 {
                    h = h_try;
                    lambda = l_try;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                return Err(Error::NewtonDiverged {
                    iters: iter + 1,
                    residual: last_residual,
                });
            }
        }
        Err(Error::NewtonDiverged {
            iters: cfg.max_iters,
            residual: last_residual,
        })
    }

    fn check_ceiling(&self, h: &[f64]) -> Result<()> {
        let ceiling = self.p.h_max();
        let max_dev = h
            .iter()
            .map(|&x| (x - self.f).abs())
            .fold(0.0, f64::max);
        if max_dev > ceiling {
            return Err(Error::HeightCeiling {
                max_dev,
                ceiling,
            });
        }
        Ok(())
    }

    /// Stationarity and volume residuals of an arbitrary candidate, in the
    /// same scaling the solver converges against.
    pub fn residual_norms(&self, h: &[f64], lambda: f64) -> (f64, f64) {
        let g = self.gradient(h, lambda);
        let vol = if self.constrained {
            self.volume_residual(h)
        } else {
            0.0
        };
        self.scaled_residuals(h, &g, vol)
    }

    /// Variational plate cosine: the coefficient against `σ δh₀` that balances
    /// the discrete surface + gravity + constraint forces at the plate node.
    pub fn variational_plate_cos(&self, h: &[f64], lambda: f64) -> f64 {
        let gm = &self.gm;
        let s = (h[1] - h[0]) / gm.dr[0];
        let surf = -gm.cell_bm[0] * s / (1.0 + s * s).sqrt() / gm.dr[0];
        let grav = self.p.g * gm.weights[0] * (h[0] - self.f);
        let cons = if self.constrained {
            lambda * gm.weights[0]
        } else {
            0.0
        };
        (surf + grav - cons) / self.p.sigma()
    }

    /// Variational container cosine (finite container only).
    pub fn variational_container_cos(&self, h: &[f64], lambda: f64) -> f64 {
        let n = self.n();
        let gm = &self.gm;
        let s = (h[n - 1] - h[n - 2]) / gm.dr[n - 2];
        let surf = gm.cell_bm[n - 2] * s / (1.0 + s * s).sqrt() / gm.dr[n - 2];
        let grav = self.p.g * gm.weights[n - 1] * (h[n - 1] - self.f);
        let cons = if self.constrained {
            lambda * gm.weights[n - 1]
        } else {
            0.0
        };
        (surf + grav - cons) / gm.bm[n - 1]
    }
}

/// LDLᵀ factorization of a symmetric positive-definite tridiagonal matrix.
struct TridiagLdl {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl TridiagLdl {
    fn factor(diag: &[f64], off: &[f64]) -> Self {
        let n = diag.len();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        d[0] = diag[0];
        for i in 1..n {
            let e = off[i - 1];
            l[i - 1] = e / d[i - 1];
            d[i] = diag[i] - l[i - 1] * e;
        }
        TridiagLdl { d, l }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = rhs.to_vec();
        for i in 1..n {
            x[i] -= self.l[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n - 1).rev() {
            let t = self.l[i] * x[i + 1];
            x[i] -= t;
        }
        x
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Independent pseudospectral check solver: exponential time differencing
//! with 4th-order Runge-Kutta correction on the mean-free equation, plus
//! closed-form mean tracking. Used to cross-validate the mild iteration.

use serde::{Deserialize, Serialize};

use crate::constants::ConstantLedger;
use crate::domain::{LinearModel, WienerParams};
use crate::error::KsError;
use crate::expphi::{phi1, phi2, phi3};
use crate::field::{multiply_odd, ModeSplit, SpectralField};
use crate::mild::{run_scheme, SchemeConfig};

/// Instantaneous solver state. `psi_bar` carries the spatial mean, which
/// decouples and decays monotonically; `dissipated` is the accumulated
/// gradient energy driving it.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub t: f64,
    pub phi: SpectralField,
    pub psi_bar: f64,
    pub dissipated: f64,
}

impl SolverState {
    pub fn new(phi: SpectralField, psi_bar: f64) -> Self {
        assert_eq!(phi.get(0, 0), 0.0, "phi must be mean-free");
        SolverState { t: 0.0, phi, psi_bar, dissipated: 0.0 }
    }
}

/// Precomputed per-mode exponential tables for one step size.
pub struct Stepper {
    pub lm: LinearModel,
    pub dt: f64,
    /// Nonlinearity switch; `false` gives the pure linear flow (then the
    /// integrator is exact).
    pub nonlinear: bool,
    e: Vec<f64>,
    e2: Vec<f64>,
    q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
}

fn mode_table(lm: &LinearModel, dt: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let side = lm.domain.side();
    let mut out = vec![0.0; side * side];
    for k in 0..side {
        for j in 0..side {
            out[k * side + j] = f(lm.sigma_eff(k as i64, j as i64) * dt);
        }
    }
    out
}

fn apply_table(t: &[f64], f: &SpectralField) -> SpectralField {
    let side = f.domain.side();
    let mut out = SpectralField::zeros(f.domain);
    for (k, j, c) in f.iter_modes() {
        if c != 0.0 {
            out.set(k, j, c * t[k * side + j]);
        }
    }
    out
}

impl Stepper {
    pub fn new(lm: LinearModel, dt: f64, nonlinear: bool) -> Result<Self, KsError> {
        if !(dt > 0.0) {
            return Err(KsError::StepSize { dt, constraint: "dt must be positive".to_string() });
        }
        Ok(Stepper {
            lm,
            dt,
            nonlinear,
            e: mode_table(&lm, dt, f64::exp),
            e2: mode_table(&lm, dt, |z| (0.5 * z).exp()),
            q: mode_table(&lm, dt, |z| 0.5 * dt * phi1(0.5 * z)),
            f1: mode_table(&lm, dt, |z| dt * (phi1(z) - 3.0 * phi2(z) + 4.0 * phi3(z))),
            f2: mode_table(&lm, dt, |z| dt * (2.0 * phi2(z) - 4.0 * phi3(z))),
            f3: mode_table(&lm, dt, |z| dt * (4.0 * phi3(z) - phi2(z))),
        })
    }

    /// `-(mean-free part of |grad phi|^2)`, the nonlinear term of the
    /// mean-free equation; zero when the nonlinearity is switched off.
    pub fn nonlinearity(&self, phi: &SpectralField) -> Result<SpectralField, KsError> {
        if !self.nonlinear {
            return Ok(SpectralField::zeros(phi.domain));
        }
        let gx = multiply_odd(&phi.derivative_x(), &phi.derivative_x())?;
        let gy = multiply_odd(&phi.derivative_y(), &phi.derivative_y())?;
        Ok(gx.field.add(&gy.field)?.project_mean_free().scale(-1.0))
    }

    /// One exponential-integrator step. Rejects steps that do not resolve
    /// the nonlinear timescale and reports blowup on non-finite values.
    pub fn step(&self, s: &SolverState) -> Result<SolverState, KsError> {
        let u = &s.phi;
        let n_u = self.nonlinearity(u)?;
        let n_max = n_u.iter_modes().fold(0.0f64, |m, (_, _, c)| m.max(c.abs()));
        if self.dt * n_max > 1.0 {
            return Err(KsError::StepSize {
                dt: self.dt,
                constraint: format!("dt * max|nonlinearity| = {} > 1", self.dt * n_max),
            });
        }

        let u1 = apply_table(&self.e2, u).add(&apply_table(&self.q, &n_u))?;
        let n1 = self.nonlinearity(&u1)?;
        let u2 = apply_table(&self.e2, u).add(&apply_table(&self.q, &n1))?;
        let n2 = self.nonlinearity(&u2)?;
        let u3 = apply_table(&self.e2, &u1)
            .add(&apply_table(&self.q, &n2.scale(2.0).sub(&n_u)?))?;
        let n3 = self.nonlinearity(&u3)?;

        let next = apply_table(&self.e, u)
            .add(&apply_table(&self.f1, &n_u))?
            .add(&apply_table(&self.f2, &n1.add(&n2)?))?
            .add(&apply_table(&self.f3, &n3))?;

        let t_next = s.t + self.dt;
        if next.iter_modes().any(|(_, _, c)| !c.is_finite()) {
            return Err(KsError::Blowup { t: t_next });
        }

        // mean update: trapezoidal on the closed-form dissipation rate
        let d0 = gradient_energy_density(u);
        let d1 = gradient_energy_density(&next);
        let drop = 0.5 * self.dt * (d0 + d1);
        Ok(SolverState {
            t: t_next,
            phi: next,
            psi_bar: s.psi_bar - drop,
            dissipated: s.dissipated + drop,
        })
    }
}

/// `(1/L1L2) integral of |grad phi|^2` via Parseval on cosine
/// coefficients: each mode contributes `c^2 ((alpha k)^2 + (beta j)^2)`
/// times `1/2` per non-zero index.
pub fn gradient_energy_density(phi: &SpectralField) -> f64 {
    let a = phi.domain.alpha();
    let b = phi.domain.beta();
    let mut acc = 0.0;
    for (k, j, c) in phi.iter_modes() {
        if c == 0.0 {
            continue;
        }
        let mut weight = 1.0;
        if k > 0 {
            weight *= 0.5;
        }
        if j > 0 {
            weight *= 0.5;
        }
        acc += c * c * weight * ((a * k as f64).powi(2) + (b * j as f64).powi(2));
    }
    acc
}

/// One CSV row of the trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleRow {
    pub t: f64,
    pub psi_bar: f64,
    pub a10: f64,
    pub a20: f64,
    pub a01: f64,
    pub a02: f64,
    pub wnorm_rho0: f64,
    pub wnorm_rho1: f64,
    pub energy: f64,
}

fn sample_row(s: &SolverState, rho: f64) -> SampleRow {
    let ms = ModeSplit::split(&s.phi);
    let p0 = WienerParams { rho, m: 0 };
    let p1 = WienerParams { rho, m: 1 };
    SampleRow {
        t: s.t,
        psi_bar: s.psi_bar,
        a10: ms.a10,
        a20: ms.a20,
        a01: ms.a01,
        a02: ms.a02,
        wnorm_rho0: ms.w.wiener_norm(p0),
        wnorm_rho1: ms.w.wiener_norm(p1),
        energy: gradient_energy_density(&s.phi),
    }
}

/// Full trajectory of the check solver.
#[derive(Debug)]
pub struct DirectRun {
    pub rows: Vec<SampleRow>,
    pub snapshots: Vec<SolverState>,
}

/// Advances from `phi0` to time `t_horizon`, recording every
/// `sample_stride`-th step (plus the endpoints).
pub fn run_direct(
    phi0: SpectralField,
    psi_bar0: f64,
    lm: &LinearModel,
    t_horizon: f64,
    dt: f64,
    nonlinear: bool,
    rho: f64,
    sample_stride: usize,
) -> Result<DirectRun, KsError> {
    let steps = (t_horizon / dt).round().max(1.0) as usize;
    let dt = t_horizon / steps as f64;
    let stepper = Stepper::new(*lm, dt, nonlinear)?;
    let stride = sample_stride.max(1);
    let mut s = SolverState::new(phi0, psi_bar0);
    let mut rows = vec![sample_row(&s, rho)];
    let mut snapshots = vec![s.clone()];
    for step in 1..=steps {
        s = stepper.step(&s)?;
        if step % stride == 0 || step == steps {
            rows.push(sample_row(&s, rho));
            snapshots.push(s.clone());
        }
    }
    Ok(DirectRun { rows, snapshots })
}

/// Per-sample distance between the two solvers, plus a bound check of the
/// direct run against the inductive bound set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossValidation {
    pub max_dist_b0: f64,
    pub max_dist_l1: f64,
    pub t_max_dist: f64,
    pub samples: usize,
    pub mild_iterations: usize,
    pub direct_bounds_hold: bool,
    pub direct_bound_margins: Vec<(String, f64)>,
}

/// Runs both solvers from the same data on a shared grid and reports the
/// disagreement; a large distance is a finding, not an error.
pub fn cross_validate(
    init: &ModeSplit,
    ledger: &ConstantLedger,
    lm: &LinearModel,
    cfg: &SchemeConfig,
    direct_dt: f64,
) -> Result<CrossValidation, KsError> {
    let result = run_scheme(init, ledger, lm, cfg)?;
    let dt_w = cfg.dt_w_actual();
    let sub = (dt_w / direct_dt).round().max(1.0) as usize;
    let dt = dt_w / sub as f64;
    let run = run_direct(
        init.assemble(),
        0.0,
        lm,
        cfg.t_horizon,
        dt,
        true,
        cfg.rho,
        sub,
    )?;

    let p0 = WienerParams::new(cfg.rho, 0)?;
    let mut max_b0: f64 = 0.0;
    let mut max_l1: f64 = 0.0;
    let mut t_max = 0.0;
    let n = result.final_iterate.modes.len().min(run.snapshots.len());
    for m in 0..n {
        let mild_phi = result.final_iterate.snapshot(m).assemble();
        let diff = run.snapshots[m].phi.sub(&mild_phi)?;
        let b0 = diff.wiener_norm(p0);
        let l1: f64 = diff.iter_modes().map(|(_, _, c)| c.abs()).sum();
        if b0 > max_b0 {
            max_b0 = b0;
            t_max = run.snapshots[m].t;
        }
        max_l1 = max_l1.max(l1);
    }

    // the direct solution, split the same way, against the inductive
    // bounds
    let eps = lm.eps();
    let p1 = WienerParams::new(cfg.rho, 1)?;
    let mut sup = [0.0f64; 5];
    for s in &run.snapshots {
        let ms = ModeSplit::split(&s.phi);
        sup[0] = sup[0].max(ms.a10.abs());
        sup[1] = sup[1].max(ms.a20.abs());
        sup[2] = sup[2].max(ms.a01.abs());
        sup[3] = sup[3].max(ms.a02.abs());
        sup[4] = sup[4].max(ms.w.wiener_norm(p1));
    }
    let margins = vec![
        ("sup_a10".to_string(), 2.0 * (ledger.m11 * eps).sqrt() - sup[0]),
        ("sup_a20".to_string(), ledger.m21 * eps - sup[1]),
        ("sup_a01".to_string(), 2.0 * (ledger.m12 * eps).sqrt() - sup[2]),
        ("sup_a02".to_string(), ledger.m22 * eps - sup[3]),
        ("w_norm".to_string(), ledger.m3_value() * eps.powf(1.5) - sup[4]),
    ];
    let hold = margins.iter().all(|(_, m)| *m >= 0.0);

    Ok(CrossValidation {
        max_dist_b0: max_b0,
        max_dist_l1: max_l1,
        t_max_dist: t_max,
        samples: n,
        mild_iterations: result.reports.len(),
        direct_bounds_hold: hold,
        direct_bound_margins: margins,
    })
}

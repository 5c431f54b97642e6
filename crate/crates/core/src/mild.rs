// SPDX-License-Identifier: Apache-2.0

//! The iterative mild-solution scheme: four mode amplitudes driven by
//! lagged forcing, and the remainder advanced through the exact Duhamel
//! formula against piecewise-linear nonlinear data.

use serde::{Deserialize, Serialize};

use crate::constants::ConstantLedger;
use crate::domain::{in_special_set, sigma, LinearModel, WienerParams};
use crate::error::KsError;
use crate::expphi::{phi1, phi2};
use crate::field::{multiply_odd, ModeSplit, SpectralField};
use crate::forcing::{build_forcing, ForcingSet};

/// Time-stepping configuration of the scheme.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeConfig {
    /// Horizon `T`.
    pub t_horizon: f64,
    /// Mode-ODE step (refined below `dt_w` as needed).
    pub dt: f64,
    /// Duhamel grid step; the snapshot grid of every iterate.
    pub dt_w: f64,
    pub max_iters: usize,
    /// Convergence threshold on the successive-iterate distance.
    pub cauchy_tol: f64,
    pub rho: f64,
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<(), KsError> {
        if !(self.t_horizon > 0.0) || !(self.dt > 0.0) || !(self.dt_w > 0.0) {
            return Err(KsError::StepSize {
                dt: self.dt,
                constraint: "T, dt, dt_w must be positive".to_string(),
            });
        }
        if self.dt > self.dt_w {
            return Err(KsError::StepSize {
                dt: self.dt,
                constraint: format!("dt must not exceed dt_w = {}", self.dt_w),
            });
        }
        if !(self.cauchy_tol > 0.0) {
            return Err(KsError::Parse(format!(
                "cauchy_tol must be positive, got {}",
                self.cauchy_tol
            )));
        }
        Ok(())
    }

    /// Number of Duhamel intervals; the grid is `steps + 1` samples with
    /// spacing exactly `T / steps`.
    pub fn w_steps(&self) -> usize {
        (self.t_horizon / self.dt_w).round().max(1.0) as usize
    }

    pub fn dt_w_actual(&self) -> f64 {
        self.t_horizon / self.w_steps() as f64
    }
}

/// Applies the linear semigroup: each coefficient is scaled by
/// `e^{sigma_eff(k,j) t}`. Off the special set all retained symbols are
/// negative in the relevant regime, so this contracts modewise.
pub fn semigroup_apply(w0: &SpectralField, lm: &LinearModel, t: f64) -> SpectralField {
    assert!(
        w0.supported_off_special(),
        "semigroup input must be supported off the special set"
    );
    let mut out = SpectralField::zeros(w0.domain);
    for (k, j, c) in w0.iter_modes() {
        if c != 0.0 {
            out.set(k, j, c * (lm.sigma_eff(k as i64, j as i64) * t).exp());
        }
    }
    out
}

/// Duhamel integral `I(t) = int_0^t e^{sigma (t - s)} h(s) ds` per mode off
/// the special set, with `h` piecewise linear between uniform samples and
/// the exponential factor integrated exactly on each subinterval:
/// `I_m = e^z I_{m-1} + dt * (h_{m-1} (phi1(z) - phi2(z)) + h_m phi2(z))`,
/// `z = sigma dt`. No quadrature error beyond the interpolation of `h`.
pub fn iplus(h: &[SpectralField], dt: f64, lm: &LinearModel) -> Vec<SpectralField> {
    assert!(!h.is_empty());
    let d = h[0].domain;
    let side = d.side();
    let mut out: Vec<SpectralField> = vec![SpectralField::zeros(d); h.len()];
    for k in 0..side {
        for j in 0..side {
            if in_special_set(k, j) {
                continue;
            }
            let s = sigma(k as i64, j as i64, &d);
            debug_assert_eq!(s, lm.sigma_eff(k as i64, j as i64));
            let z = s * dt;
            let e = z.exp();
            let c0 = dt * (phi1(z) - phi2(z));
            let c1 = dt * phi2(z);
            let mut acc = 0.0;
            for m in 1..h.len() {
                acc = e * acc + c0 * h[m - 1].get(k, j) + c1 * h[m].get(k, j);
                if acc != 0.0 {
                    out[m].set(k, j, acc);
                }
            }
        }
    }
    out
}

/// Linear coefficients of the four mode equations taken from the linear
/// model: growth rates for `(1,0)`/`(0,1)`, exact symbols for the
/// decaying pair.
fn mode_rates(lm: &LinearModel) -> (f64, f64, f64, f64) {
    let b1 = -sigma(2, 0, &lm.domain);
    let b2 = -sigma(0, 2, &lm.domain);
    (lm.eps1, lm.eps2, b1, b2)
}

fn mode_rhs(lm: &LinearModel, a: &[f64; 4], f: &ForcingSet) -> [f64; 4] {
    let p2 = std::f64::consts::PI * std::f64::consts::PI;
    let (e1, e2, b1, b2) = mode_rates(lm);
    let (l1, l2) = (lm.domain.l1, lm.domain.l2);
    [
        e1 * a[0] - 8.0 * p2 / (l1 * l1) * a[0] * a[1] - f.f10(),
        -b1 * a[1] + 2.0 * p2 / (l1 * l1) * a[0] * a[0] - f.f20(),
        e2 * a[2] - 8.0 * p2 / (l2 * l2) * a[2] * a[3] - f.f01(),
        -b2 * a[3] + 2.0 * p2 / (l2 * l2) * a[2] * a[2] - f.f02(),
    ]
}

/// Integrates the four mode amplitudes over the Duhamel grid with the
/// previous iterate's forcing held by zero-order hold on each interval.
/// Classical 4th-order steps, `ceil(dt_w / dt)` substeps per interval.
/// Given the lagged forcing, the `x` and `y` pairs decouple.
pub fn advance_modes(
    forcing: &[ForcingSet],
    lm: &LinearModel,
    cfg: &SchemeConfig,
    init: [f64; 4],
) -> Result<Vec<[f64; 4]>, KsError> {
    let dt_w = cfg.dt_w_actual();
    let nsub = (dt_w / cfg.dt).ceil().max(1.0) as usize;
    let h = dt_w / nsub as f64;
    let mut out = Vec::with_capacity(forcing.len());
    let mut a = init;
    out.push(a);
    for m in 1..forcing.len() {
        // forcing from the left endpoint of the interval (zero-order hold)
        let f = &forcing[m - 1];
        for _ in 0..nsub {
            let k1 = mode_rhs(lm, &a, f);
            let step = |c: f64, k: &[f64; 4]| {
                [a[0] + c * h * k[0], a[1] + c * h * k[1], a[2] + c * h * k[2], a[3] + c * h * k[3]]
            };
            let k2 = mode_rhs(lm, &step(0.5, &k1), f);
            let k3 = mode_rhs(lm, &step(0.5, &k2), f);
            let k4 = mode_rhs(lm, &step(1.0, &k3), f);
            for i in 0..4 {
                a[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(KsError::Blowup { t: m as f64 * dt_w });
        }
        out.push(a);
    }
    Ok(out)
}

/// Nonlinear Duhamel data of one snapshot: the squared-gradient field
/// projected off the special set (mean included in the projection).
fn nonlinear_off_special(ms: &ModeSplit) -> Result<SpectralField, KsError> {
    let phi = ms.assemble();
    let hx = multiply_odd(&phi.derivative_x(), &phi.derivative_x())?;
    let hy = multiply_odd(&phi.derivative_y(), &phi.derivative_y())?;
    Ok(hx
        .field
        .add(&hy.field)?
        .project_off_special()
        .project_mean_free())
}

/// Advances the remainder through the mild formula:
/// `w(t_m) = semigroup(w0, t_m) - I+( off-special part of |grad phi|^2 )`.
pub fn advance_w(
    prev_phi: &[ModeSplit],
    w0: &SpectralField,
    lm: &LinearModel,
    cfg: &SchemeConfig,
) -> Result<Vec<SpectralField>, KsError> {
    let dt_w = cfg.dt_w_actual();
    let h: Vec<SpectralField> = prev_phi
        .iter()
        .map(nonlinear_off_special)
        .collect::<Result<_, _>>()?;
    let integral = iplus(&h, dt_w, lm);
    let mut out = Vec::with_capacity(prev_phi.len());
    for (m, i_m) in integral.iter().enumerate() {
        let t = m as f64 * dt_w;
        out.push(semigroup_apply(w0, lm, t).sub(i_m)?);
    }
    Ok(out)
}

/// Per-iterate norms, bound margins, and the Cauchy distance to the
/// previous iterate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationReport {
    pub n: usize,
    pub sup_a10: f64,
    pub sup_a20: f64,
    pub sup_a01: f64,
    pub sup_a02: f64,
    pub max_w_norm: f64,
    pub sup_forcing: Vec<(String, f64)>,
    /// `(bound name, margin)`; all margins non-negative when the iterate
    /// passes.
    pub margins: Vec<(String, f64)>,
    pub cauchy_distance: f64,
}

/// One full iterate: mode amplitudes and remainder snapshots on the
/// shared time grid.
#[derive(Debug, Clone)]
pub struct Iterate {
    pub n: usize,
    pub modes: Vec<[f64; 4]>,
    pub w: Vec<SpectralField>,
}

impl Iterate {
    pub fn snapshot(&self, m: usize) -> ModeSplit {
        ModeSplit {
            a10: self.modes[m][0],
            a20: self.modes[m][1],
            a01: self.modes[m][2],
            a02: self.modes[m][3],
            w: self.w[m].clone(),
        }
    }

    pub fn snapshots(&self) -> Vec<ModeSplit> {
        (0..self.modes.len()).map(|m| self.snapshot(m)).collect()
    }
}

/// Result of a converged run.
#[derive(Debug, Clone)]
pub struct SchemeResult {
    pub reports: Vec<IterationReport>,
    pub final_iterate: Iterate,
    pub converged: bool,
}

/// The five initial-data inequalities; returns named margins or the first
/// violation.
pub fn check_hypotheses(
    init: &ModeSplit,
    ledger: &ConstantLedger,
    eps: f64,
    rho: f64,
) -> Result<Vec<(String, f64)>, KsError> {
    let p1 = WienerParams::new(rho, 1)?;
    let m3 = ledger.m3_value();
    let checks = [
        (
            "initial_x_pair".to_string(),
            ledger.m11 * eps / 4.0 - (init.a10 * init.a10 + init.a20 * init.a20),
        ),
        ("initial_a20".to_string(), ledger.m21 * eps / 2.0 - init.a20.abs()),
        (
            "initial_y_pair".to_string(),
            ledger.m12 * eps / 4.0 - (init.a01 * init.a01 + init.a02 * init.a02),
        ),
        ("initial_a02".to_string(), ledger.m22 * eps / 2.0 - init.a02.abs()),
        (
            "initial_w".to_string(),
            m3 * eps.powf(1.5) / 6.0 - init.w.wiener_norm(p1),
        ),
    ];
    for (name, margin) in &checks {
        if *margin < 0.0 {
            return Err(KsError::HypothesisViolation {
                name: name.clone(),
                detail: format!("margin {margin}"),
            });
        }
    }
    Ok(checks.to_vec())
}

struct BoundCheck {
    sups: [f64; 4],
    max_w: f64,
    forcing_sups: Vec<(String, f64)>,
    margins: Vec<(String, f64)>,
    worst: Option<(String, f64, f64)>,
}

fn check_iterate_bounds(
    it: &Iterate,
    forcings: &[ForcingSet],
    ledger: &ConstantLedger,
    eps: f64,
    rho: f64,
    dt_w: f64,
) -> Result<BoundCheck, KsError> {
    let p1 = WienerParams::new(rho, 1)?;
    let mut sups = [0.0f64; 4];
    for a in &it.modes {
        for i in 0..4 {
            sups[i] = sups[i].max(a[i].abs());
        }
    }
    let mut max_w: f64 = 0.0;
    let mut t_max_w = 0.0;
    for (m, w) in it.w.iter().enumerate() {
        let n = w.wiener_norm(p1);
        if n > max_w {
            max_w = n;
            t_max_w = m as f64 * dt_w;
        }
    }
    let mut forcing_sups: Vec<(String, f64)> = vec![
        ("F10x".to_string(), 0.0),
        ("F10y".to_string(), 0.0),
        ("F20x".to_string(), 0.0),
        ("F20y".to_string(), 0.0),
        ("F01x".to_string(), 0.0),
        ("F01y".to_string(), 0.0),
        ("F02x".to_string(), 0.0),
        ("F02y".to_string(), 0.0),
    ];
    for fs in forcings {
        for (slot, (name, value)) in forcing_sups.iter_mut().zip(fs.named()) {
            debug_assert_eq!(slot.0, name);
            slot.1 = slot.1.max(value.abs());
        }
    }

    let k = ledger.k_value();
    let m3 = ledger.m3_value();
    let mut margins = vec![
        ("sup_a10".to_string(), 2.0 * (ledger.m11 * eps).sqrt() - sups[0]),
        ("sup_a20".to_string(), ledger.m21 * eps - sups[1]),
        ("sup_a01".to_string(), 2.0 * (ledger.m12 * eps).sqrt() - sups[2]),
        ("sup_a02".to_string(), ledger.m22 * eps - sups[3]),
        ("w_norm".to_string(), m3 * eps.powf(1.5) - max_w),
    ];
    let f_limit = k * eps * eps;
    for (name, sup) in &forcing_sups {
        margins.push((format!("sup_{name}"), f_limit - sup));
    }

    let worst = margins
        .iter()
        .filter(|(_, m)| *m < 0.0)
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(n, m)| (n.clone(), *m, t_max_w));
    Ok(BoundCheck { sups, max_w, forcing_sups, margins, worst })
}

fn cauchy_distance(a: &Iterate, b: &Iterate, rho: f64) -> f64 {
    let p1 = WienerParams::new(rho, 1).expect("validated earlier");
    let mut dist: f64 = 0.0;
    for m in 0..a.modes.len() {
        let mut d = 0.0;
        for i in 0..4 {
            d += (a.modes[m][i] - b.modes[m][i]).abs();
        }
        d += a.w[m].sub(&b.w[m]).expect("shared grid").wiener_norm(p1);
        dist = dist.max(d);
    }
    dist
}

/// Runs the full scheme: iterate 0 is identically zero; each subsequent
/// iterate takes its forcing and nonlinear data from the previous one,
/// shares the given initial data, and must satisfy the inductive bound
/// set. Stops when the successive-iterate distance falls below
/// `cauchy_tol`.
pub fn run_scheme(
    init: &ModeSplit,
    ledger: &ConstantLedger,
    lm: &LinearModel,
    cfg: &SchemeConfig,
) -> Result<SchemeResult, KsError> {
    cfg.validate()?;
    let eps = lm.eps();
    check_hypotheses(init, ledger, eps, cfg.rho)?;
    assert!(init.w.supported_off_special() && init.w.get(0, 0) == 0.0);

    let steps = cfg.w_steps();
    let dt_w = cfg.dt_w_actual();
    let d = init.w.domain;

    let mut prev = Iterate {
        n: 0,
        modes: vec![[0.0; 4]; steps + 1],
        w: vec![SpectralField::zeros(d); steps + 1],
    };
    let mut reports = Vec::new();
    let init_modes = [init.a10, init.a20, init.a01, init.a02];

    for n in 1..=cfg.max_iters {
        let prev_snapshots = prev.snapshots();
        let forcings: Vec<ForcingSet> = prev_snapshots
            .iter()
            .map(build_forcing)
            .collect::<Result<_, _>>()?;
        let modes = advance_modes(&forcings, lm, cfg, init_modes)?;
        let w = advance_w(&prev_snapshots, &init.w, lm, cfg)?;
        let it = Iterate { n, modes, w };

        let check = check_iterate_bounds(&it, &forcings, ledger, eps, cfg.rho, dt_w)?;
        if let Some((name, margin, t)) = check.worst {
            return Err(KsError::BoundViolation { iterate: n, t, name, margin });
        }
        let distance = cauchy_distance(&it, &prev, cfg.rho);
        reports.push(IterationReport {
            n,
            sup_a10: check.sups[0],
            sup_a20: check.sups[1],
            sup_a01: check.sups[2],
            sup_a02: check.sups[3],
            max_w_norm: check.max_w,
            sup_forcing: check.forcing_sups,
            margins: check.margins,
            cauchy_distance: distance,
        });
        let converged = distance < cfg.cauchy_tol;
        prev = it;
        if converged {
            return Ok(SchemeResult { reports, final_iterate: prev, converged: true });
        }
    }
    let last = reports.last().map(|r| r.cauchy_distance).unwrap_or(f64::NAN);
    Err(KsError::NonConvergence { max_iters: cfg.max_iters, distance: last })
}

/// Self-consistency of a converged iterate: the maximum over the grid of
/// the `(rho, 1)`-norm of `w - semigroup(w0) + I+(h(w))`, where `h` is
/// rebuilt from the iterate itself.
pub fn mild_residual(
    it: &Iterate,
    w0: &SpectralField,
    lm: &LinearModel,
    cfg: &SchemeConfig,
) -> Result<f64, KsError> {
    let reconstructed = advance_w(&it.snapshots(), w0, lm, cfg)?;
    let p1 = WienerParams::new(cfg.rho, 1)?;
    let mut worst: f64 = 0.0;
    for (a, b) in it.w.iter().zip(&reconstructed) {
        worst = worst.max(a.sub(b)?.wiener_norm(p1));
    }
    Ok(worst)
}

// SPDX-License-Identifier: Apache-2.0

//! The forced two-mode system along one axis and its Lyapunov trapping
//! region: one growing amplitude `a`, one fast-decaying amplitude `b`,
//! bounded forcing on both.

use serde::{Deserialize, Serialize};

use crate::error::KsError;

/// Forcing signals `(Q1, Q2)` for the two-mode system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Forcing {
    Zero,
    /// Constant values, typically the admissibility extremes `+-2 K eps^2`.
    Constant { q1: f64, q2: f64 },
    /// `amp * sin(omega t)` on each channel.
    Sinusoidal { amp1: f64, amp2: f64, omega: f64 },
    /// Samples on a uniform grid with zero-order hold; the last sample
    /// extends to all later times.
    Sampled { dt: f64, q1: Vec<f64>, q2: Vec<f64> },
}

impl Forcing {
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            Forcing::Zero => (0.0, 0.0),
            Forcing::Constant { q1, q2 } => (*q1, *q2),
            Forcing::Sinusoidal { amp1, amp2, omega } => {
                let s = (omega * t).sin();
                (amp1 * s, amp2 * s)
            }
            Forcing::Sampled { dt, q1, q2 } => {
                let i = ((t / dt).floor() as usize).min(q1.len().saturating_sub(1));
                (q1.get(i).copied().unwrap_or(0.0), q2.get(i).copied().unwrap_or(0.0))
            }
        }
    }

    /// Supremum of `(|Q1|, |Q2|)` over all times (the presets make this
    /// exact, not sampled).
    pub fn sup_abs(&self) -> (f64, f64) {
        match self {
            Forcing::Zero => (0.0, 0.0),
            Forcing::Constant { q1, q2 } => (q1.abs(), q2.abs()),
            Forcing::Sinusoidal { amp1, amp2, .. } => (amp1.abs(), amp2.abs()),
            Forcing::Sampled { q1, q2, .. } => (
                q1.iter().fold(0.0f64, |m, x| m.max(x.abs())),
                q2.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            ),
        }
    }
}

/// One-axis system parameters. `eps_i` and `b_i` are the linear rates of
/// the two modes, `eps` the global growth scale, `k` the forcing-bound
/// constant, `m1` and `m2` the trapping constants for this axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToySystem {
    pub i: u8,
    pub eps_i: f64,
    pub b_i: f64,
    pub l_i: f64,
    pub eps: f64,
    pub k: f64,
    pub m1: f64,
    pub m2: f64,
    pub forcing: Forcing,
}

impl ToySystem {
    /// Admissibility: `sup |Q1|, sup |Q2| <= 2 K eps^2`.
    pub fn check_admissible(&self) -> Result<(), KsError> {
        let limit = 2.0 * self.k * self.eps * self.eps;
        let (s1, s2) = self.forcing.sup_abs();
        if s1 > limit {
            return Err(KsError::InadmissibleForcing { index: 1, sup: s1, limit });
        }
        if s2 > limit {
            return Err(KsError::InadmissibleForcing { index: 2, sup: s2, limit });
        }
        Ok(())
    }

    /// Coefficient of the linear-in-`b` term of the Lyapunov function,
    /// `c = L_i^2 eps / pi^2`.
    pub fn lyapunov_c(&self) -> f64 {
        self.l_i * self.l_i * self.eps / (std::f64::consts::PI * std::f64::consts::PI)
    }

    /// Equilibrium of the unforced system off the origin:
    /// `b* = -eps_i L_i^2 / 8 pi^2`, `a*^2 = B_i eps_i L_i^4 / 16 pi^4`.
    pub fn equilibrium(&self) -> (f64, f64) {
        let p2 = std::f64::consts::PI * std::f64::consts::PI;
        let b = -self.eps_i * self.l_i * self.l_i / (8.0 * p2);
        let a = (self.b_i * self.eps_i).sqrt() * self.l_i * self.l_i / (4.0 * p2);
        (a, b)
    }
}

/// Instantaneous state; the Lyapunov value is always recomputed from
/// `(a, b)`, never integrated.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ToyState {
    pub t: f64,
    pub a: f64,
    pub b: f64,
}

impl ToyState {
    /// `G = a^2/2 + 2 b^2 + L_i^2 eps b / pi^2`.
    pub fn g(&self, sys: &ToySystem) -> f64 {
        0.5 * self.a * self.a + 2.0 * self.b * self.b + sys.lyapunov_c() * self.b
    }
}

/// Vector field of the system.
pub fn toy_rhs(s: &ToyState, sys: &ToySystem) -> (f64, f64) {
    let p2 = std::f64::consts::PI * std::f64::consts::PI;
    let (q1, q2) = sys.forcing.eval(s.t);
    let da = sys.eps_i * s.a + 8.0 * p2 / (sys.l_i * sys.l_i) * s.a * s.b + q1;
    let db = -sys.b_i * s.b - 2.0 * p2 / (sys.l_i * sys.l_i) * s.a * s.a + q2;
    (da, db)
}

/// Analytic time derivative of the Lyapunov function along the flow; the
/// cubic interaction terms cancel exactly:
/// `Gt = (eps_i - 2 eps) a^2 - 4 B_i b^2 - c B_i b + a Q1 + 4 b Q2 + c Q2`
/// with `c = L_i^2 eps / pi^2`.
pub fn g_dot(s: &ToyState, sys: &ToySystem) -> f64 {
    let c = sys.lyapunov_c();
    let (q1, q2) = sys.forcing.eval(s.t);
    (sys.eps_i - 2.0 * sys.eps) * s.a * s.a - 4.0 * sys.b_i * s.b * s.b - c * sys.b_i * s.b
        + s.a * q1
        + 4.0 * s.b * q2
        + c * q2
}

/// One recorded sample of a trajectory.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ToySample {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub g: f64,
    pub g_dot: f64,
}

/// Quantities tracked at every integration step, not just at recorded
/// samples, so bound checks do not depend on the output stride.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepStats {
    /// Minimum over all steps of `4 M1 eps - (a^2 + b^2)`.
    pub min_margin_a2b2: f64,
    pub t_min_margin_a2b2: f64,
    /// Minimum over all steps of `M2 eps - |b|`.
    pub min_margin_b: f64,
    pub t_min_margin_b: f64,
    /// Maximum Lyapunov value attained.
    pub max_g: f64,
    /// Maximum analytic `Gt` seen among steps with `G >= M1 eps`.
    pub max_gdot_on_high_set: Option<f64>,
    /// Number of steps with `G >= M1 eps`.
    pub high_set_steps: usize,
    /// Sign changes of the numerically differenced `G` (diagnostic).
    pub g_difference_sign_changes: usize,
}

/// Integrated trajectory: strided samples plus every-step statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub horizon: f64,
    pub dt: f64,
    pub samples: Vec<ToySample>,
    pub stats: StepStats,
}

fn rk4_step(s: &ToyState, sys: &ToySystem, dt: f64) -> ToyState {
    let eval = |t: f64, a: f64, b: f64| toy_rhs(&ToyState { t, a, b }, sys);
    let (k1a, k1b) = eval(s.t, s.a, s.b);
    let (k2a, k2b) = eval(s.t + 0.5 * dt, s.a + 0.5 * dt * k1a, s.b + 0.5 * dt * k1b);
    let (k3a, k3b) = eval(s.t + 0.5 * dt, s.a + 0.5 * dt * k2a, s.b + 0.5 * dt * k2b);
    let (k4a, k4b) = eval(s.t + dt, s.a + dt * k3a, s.b + dt * k3b);
    ToyState {
        t: s.t + dt,
        a: s.a + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a),
        b: s.b + dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b),
    }
}

/// Classical fixed-step 4th-order integration to time `horizon`, recording
/// every `stride`-th step. The step must resolve the fast decay scale:
/// `dt <= 0.01 / B_i`.
pub fn integrate(
    s0: ToyState,
    sys: &ToySystem,
    horizon: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory, KsError> {
    if !(dt > 0.0) || dt > 0.01 / sys.b_i {
        return Err(KsError::StepSize {
            dt,
            constraint: format!("dt must satisfy 0 < dt <= 0.01/B_i = {}", 0.01 / sys.b_i),
        });
    }
    sys.check_admissible()?;
    let stride = stride.max(1);
    let steps = (horizon / dt).ceil() as usize;

    let bound_a2b2 = 4.0 * sys.m1 * sys.eps;
    let bound_b = sys.m2 * sys.eps;
    let high_level = sys.m1 * sys.eps;

    let mut stats = StepStats {
        min_margin_a2b2: f64::INFINITY,
        t_min_margin_a2b2: 0.0,
        min_margin_b: f64::INFINITY,
        t_min_margin_b: 0.0,
        max_g: f64::NEG_INFINITY,
        max_gdot_on_high_set: None,
        high_set_steps: 0,
        g_difference_sign_changes: 0,
    };
    let mut samples = Vec::with_capacity(steps / stride + 2);
    let mut s = s0;
    let mut prev_g = s.g(sys);
    let mut prev_diff_sign = 0i8;

    let record = |s: &ToyState, stats: &mut StepStats| -> Result<f64, KsError> {
        let g = s.g(sys);
        if !s.a.is_finite() || !s.b.is_finite() {
            return Err(KsError::Blowup { t: s.t });
        }
        let m_ab = bound_a2b2 - (s.a * s.a + s.b * s.b);
        if m_ab < stats.min_margin_a2b2 {
            stats.min_margin_a2b2 = m_ab;
            stats.t_min_margin_a2b2 = s.t;
        }
        let m_b = bound_b - s.b.abs();
        if m_b < stats.min_margin_b {
            stats.min_margin_b = m_b;
            stats.t_min_margin_b = s.t;
        }
        stats.max_g = stats.max_g.max(g);
        if g >= high_level {
            stats.high_set_steps += 1;
            let gd = g_dot(s, sys);
            stats.max_gdot_on_high_set =
                Some(stats.max_gdot_on_high_set.map_or(gd, |m: f64| m.max(gd)));
        }
        Ok(g)
    };

    let g0 = record(&s, &mut stats)?;
    samples.push(ToySample { t: s.t, a: s.a, b: s.b, g: g0, g_dot: g_dot(&s, sys) });

    for step in 1..=steps {
        s = rk4_step(&s, sys, dt);
        let g = record(&s, &mut stats)?;
        let diff = g - prev_g;
        let sign = if diff > 0.0 {
            1
        } else if diff < 0.0 {
            -1
        } else {
            0
        };
        if sign != 0 && prev_diff_sign != 0 && sign != prev_diff_sign {
            stats.g_difference_sign_changes += 1;
        }
        if sign != 0 {
            prev_diff_sign = sign;
        }
        prev_g = g;
        if step % stride == 0 || step == steps {
            samples.push(ToySample { t: s.t, a: s.a, b: s.b, g, g_dot: g_dot(&s, sys) });
        }
    }

    Ok(Trajectory { horizon, dt, samples, stats })
}

/// Outcome of a bound check over one trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub horizon: f64,
    pub min_margin: f64,
    pub t_min_margin: f64,
    /// For the trapping mechanism: number of states with `G >= M1 eps`
    /// encountered and the largest analytic `Gt` among them.
    pub high_set_steps: usize,
    pub max_gdot_on_high_set: Option<f64>,
}

/// Trapping bound `a^2 + b^2 <= 4 M1 eps` plus the proof mechanism: on
/// the set `G >= M1 eps` the analytic `Gt` must be negative.
pub fn verify_trapping(traj: &Trajectory, sys: &ToySystem) -> Result<BoundReport, KsError> {
    let s0 = &traj.samples[0];
    let initial = s0.a * s0.a + s0.b * s0.b;
    let initial_limit = sys.m1 * sys.eps / 4.0;
    if initial > initial_limit {
        return Err(KsError::HypothesisViolation {
            name: "initial_a2b2".to_string(),
            detail: format!("a(0)^2 + b(0)^2 = {initial} > M1 eps / 4 = {initial_limit}"),
        });
    }
    if traj.stats.min_margin_a2b2 < 0.0 {
        return Err(KsError::BoundViolation {
            iterate: 0,
            t: traj.stats.t_min_margin_a2b2,
            name: "a2_plus_b2".to_string(),
            margin: traj.stats.min_margin_a2b2,
        });
    }
    if let Some(gd) = traj.stats.max_gdot_on_high_set {
        if gd >= 0.0 {
            return Err(KsError::BoundViolation {
                iterate: 0,
                t: traj.horizon,
                name: "lyapunov_decrease_on_high_set".to_string(),
                margin: -gd,
            });
        }
    }
    Ok(BoundReport {
        name: "trapping_a2b2".to_string(),
        horizon: traj.horizon,
        min_margin: traj.stats.min_margin_a2b2,
        t_min_margin: traj.stats.t_min_margin_a2b2,
        high_set_steps: traj.stats.high_set_steps,
        max_gdot_on_high_set: traj.stats.max_gdot_on_high_set,
    })
}

/// Decaying-mode bound `|b| <= M2 eps`, plus the pointwise Duhamel
/// majorant `|b(t)| <= e^{-B_i t} |b(0)| + (M2 eps + 2 K eps^2) / B_i`.
pub fn verify_b_bound(traj: &Trajectory, sys: &ToySystem) -> Result<BoundReport, KsError> {
    let s0 = &traj.samples[0];
    let initial_limit = sys.m2 * sys.eps / 2.0;
    if s0.b.abs() > initial_limit {
        return Err(KsError::HypothesisViolation {
            name: "initial_b".to_string(),
            detail: format!("|b(0)| = {} > M2 eps / 2 = {initial_limit}", s0.b.abs()),
        });
    }
    if traj.stats.min_margin_b < 0.0 {
        return Err(KsError::BoundViolation {
            iterate: 0,
            t: traj.stats.t_min_margin_b,
            name: "abs_b".to_string(),
            margin: traj.stats.min_margin_b,
        });
    }
    let tail = (sys.m2 * sys.eps + 2.0 * sys.k * sys.eps * sys.eps) / sys.b_i;
    let mut min_duhamel = f64::INFINITY;
    let mut t_min = 0.0;
    for s in &traj.samples {
        let majorant = (-sys.b_i * s.t).exp() * s0.b.abs() + tail;
        let m = majorant - s.b.abs();
        if m < min_duhamel {
            min_duhamel = m;
            t_min = s.t;
        }
    }
    if min_duhamel < 0.0 {
        return Err(KsError::BoundViolation {
            iterate: 0,
            t: t_min,
            name: "duhamel_majorant".to_string(),
            margin: min_duhamel,
        });
    }
    Ok(BoundReport {
        name: "decaying_mode_b".to_string(),
        horizon: traj.horizon,
        min_margin: traj.stats.min_margin_b.min(min_duhamel),
        t_min_margin: traj.stats.t_min_margin_b,
        high_set_steps: traj.stats.high_set_steps,
        max_gdot_on_high_set: traj.stats.max_gdot_on_high_set,
    })
}

/// Sweeps the level set `G = M1 eps` with `n` states against all four
/// constant-forcing extremes `(+-2 K eps^2, +-2 K eps^2)` and returns the
/// maximum analytic `Gt` found. Negative return means the trapping
/// mechanism holds on the whole level set.
pub fn level_set_max_gdot(sys: &ToySystem, n: usize) -> f64 {
    // G = a^2/2 + 2 (b + c/4)^2 - c^2/8 with c = L_i^2 eps / pi^2, so the
    // level set G = M1 eps is the ellipse a^2/2 + 2 (b + c/4)^2 = R,
    // R = M1 eps + c^2/8.
    let c = sys.lyapunov_c();
    let r = sys.m1 * sys.eps + c * c / 8.0;
    let q = 2.0 * sys.k * sys.eps * sys.eps;
    let mut max_gdot = f64::NEG_INFINITY;
    for idx in 0..n {
        let theta = 2.0 * std::f64::consts::PI * idx as f64 / n as f64;
        let a = (2.0 * r).sqrt() * theta.cos();
        let b = -c / 4.0 + (r / 2.0).sqrt() * theta.sin();
        for q1 in [-q, q] {
            for q2 in [-q, q] {
                let forced = ToySystem {
                    forcing: Forcing::Constant { q1, q2 },
                    ..sys.clone()
                };
                let s = ToyState { t: 0.0, a, b };
                max_gdot = max_gdot.max(g_dot(&s, &forced));
            }
        }
    }
    max_gdot
}

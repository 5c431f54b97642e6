// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: constants ledger, hypothesis checks, the
//! two-mode system, the mild iteration, the direct solver, and
//! cross-validation. Exit codes: 0 all verified bounds hold, 1 runtime or
//! numerical failure, 2 hypothesis rejection.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use ks2d_core::constants::ConstantLedger;
use ks2d_core::direct::{cross_validate, run_direct};
use ks2d_core::domain::{Domain, LinearModel, WienerParams};
use ks2d_core::error::KsError;
use ks2d_core::field::{ModeSplit, SpectralField};
use ks2d_core::mild::{check_hypotheses, mild_residual, run_scheme, SchemeConfig};
use ks2d_core::toy::{
    g_dot, integrate, level_set_max_gdot, verify_trapping, verify_b_bound, Forcing, ToyState,
    ToySystem,
};

#[derive(Parser)]
#[command(name = "ks2d", about = "Spectral toolkit reports", version)]
struct Cli {
    /// Path to the TOML configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Growth rate as a fraction of the feasibility threshold.
    #[arg(long = "eps-scale", global = true)]
    eps_scale: Option<f64>,

    /// Horizon override.
    #[arg(long = "T", global = true)]
    t_horizon: Option<f64>,

    /// Truncation-order override.
    #[arg(long = "N", global = true)]
    n: Option<usize>,

    /// Analyticity-radius override.
    #[arg(long, global = true)]
    rho: Option<f64>,

    /// Output directory for reports.
    #[arg(long = "out-dir", global = true, default_value = "out")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the constant ledger and feasibility threshold.
    Constants,
    /// Check the initial-data hypotheses.
    Check,
    /// Integrate the two-mode system and verify its trapping bounds.
    Toy,
    /// Run the mild-iteration scheme and verify the inductive bounds.
    Iterate,
    /// Run the direct check solver.
    Solve,
    /// Cross-validate the two solvers.
    Xval,
}

fn default_l() -> f64 {
    2.0 * std::f64::consts::PI * 1.001
}

fn default_n() -> usize {
    32
}

fn default_rho() -> f64 {
    0.1
}

fn default_eps_scale() -> f64 {
    0.25
}

fn default_t() -> f64 {
    1.0
}

fn default_dt() -> f64 {
    1.0 / 1024.0
}

fn default_dt_w() -> f64 {
    1.0 / 256.0
}

fn default_max_iters() -> usize {
    20
}

fn default_cauchy_tol() -> f64 {
    1e-12
}

fn default_search_limit() -> usize {
    24
}

fn default_axis() -> u8 {
    1
}

fn default_forcing() -> String {
    "zero".to_string()
}

fn default_toy_dt() -> f64 {
    5e-4
}

fn default_toy_t() -> f64 {
    100.0
}

fn default_stride() -> usize {
    100
}

fn default_preset() -> String {
    "theorem".to_string()
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainCfg {
    #[serde(default = "default_l")]
    l1: f64,
    #[serde(default = "default_l")]
    l2: f64,
    #[serde(default = "default_n")]
    n: usize,
}

impl Default for DomainCfg {
    fn default() -> Self {
        DomainCfg { l1: default_l(), l2: default_l(), n: default_n() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ToyCfg {
    /// Axis of the two-mode system: 1 or 2.
    #[serde(default = "default_axis")]
    axis: u8,
    /// `zero`, `constant-extreme`, or `sinusoidal`.
    #[serde(default = "default_forcing")]
    forcing: String,
    #[serde(default = "default_toy_t")]
    t_horizon: f64,
    #[serde(default = "default_toy_dt")]
    dt: f64,
    #[serde(default = "default_stride")]
    sample_stride: usize,
}

impl Default for ToyCfg {
    fn default() -> Self {
        ToyCfg {
            axis: default_axis(),
            forcing: default_forcing(),
            t_horizon: default_toy_t(),
            dt: default_toy_dt(),
            sample_stride: default_stride(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitCfg {
    /// `zero`, `theorem`, or `explicit`.
    #[serde(default = "default_preset")]
    preset: String,
    #[serde(default)]
    a10: f64,
    #[serde(default)]
    a20: f64,
    #[serde(default)]
    a01: f64,
    #[serde(default)]
    a02: f64,
    /// Explicit remainder modes as `[k, j, coeff]` rows.
    #[serde(default)]
    w_modes: Vec<(usize, usize, f64)>,
}

impl Default for InitCfg {
    fn default() -> Self {
        InitCfg {
            preset: default_preset(),
            a10: 0.0,
            a20: 0.0,
            a01: 0.0,
            a02: 0.0,
            w_modes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    #[serde(default)]
    domain: DomainCfg,
    #[serde(default = "default_rho")]
    rho: f64,
    /// Growth rate prescribed as `eps_scale * eps_star`.
    #[serde(default = "default_eps_scale")]
    eps_scale: f64,
    #[serde(default = "default_t")]
    t_horizon: f64,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default = "default_dt_w")]
    dt_w: f64,
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    #[serde(default = "default_cauchy_tol")]
    cauchy_tol: f64,
    #[serde(default = "default_search_limit")]
    search_limit: usize,
    /// Direct-solver step; defaults to `dt`.
    #[serde(default)]
    direct_dt: Option<f64>,
    /// Direct-solver nonlinearity switch.
    #[serde(default = "default_true")]
    nonlinear: bool,
    #[serde(default)]
    toy: ToyCfg,
    #[serde(default)]
    init: InitCfg,
}

// serde(default) on the struct fields covers the TOML path; Default for
// whole-struct construction must agree with it.
impl RunConfig {
    fn load(path: Option<&Path>) -> Result<Self, KsError> {
        let cfg: RunConfig = match path {
            Some(p) => {
                let text = fs::read_to_string(p)?;
                toml::from_str(&text).map_err(|e| KsError::Parse(e.to_string()))?
            }
            None => toml::from_str("").map_err(|e| KsError::Parse(e.to_string()))?,
        };
        Ok(cfg)
    }

    fn apply_overrides(&mut self, cli: &Cli) {
        if let Some(e) = cli.eps_scale {
            self.eps_scale = e;
        }
        if let Some(t) = cli.t_horizon {
            self.t_horizon = t;
            self.toy.t_horizon = t;
        }
        if let Some(n) = cli.n {
            self.domain.n = n;
        }
        if let Some(r) = cli.rho {
            self.rho = r;
        }
    }

    fn domain(&self) -> Result<Domain, KsError> {
        Domain::new(self.domain.l1, self.domain.l2, self.domain.n)
    }

    fn scheme(&self) -> SchemeConfig {
        SchemeConfig {
            t_horizon: self.t_horizon,
            dt: self.dt,
            dt_w: self.dt_w,
            max_iters: self.max_iters,
            cauchy_tol: self.cauchy_tol,
            rho: self.rho,
        }
    }
}

struct Context {
    cfg: RunConfig,
    ledger: ConstantLedger,
    lm: LinearModel,
    eps: f64,
    out_dir: PathBuf,
}

impl Context {
    fn build(cfg: RunConfig, out_dir: &Path) -> Result<Self, KsError> {
        let d = cfg.domain()?;
        let ledger = ConstantLedger::compute(d, cfg.rho, cfg.search_limit);
        if !ledger.regime.certified {
            return Err(KsError::HypothesisViolation {
                name: "regime_certification".to_string(),
                detail: ledger.regime.failed_checks.join("; "),
            });
        }
        let eps = cfg.eps_scale * ledger.eps_star_value();
        let lm = LinearModel::with_growth(d, eps, eps);
        fs::create_dir_all(out_dir)?;
        Ok(Context { cfg, ledger, lm, eps, out_dir: out_dir.to_path_buf() })
    }

    /// Initial data per the configured preset, theorem-scaled by default.
    fn initial_data(&self) -> Result<ModeSplit, KsError> {
        let d = self.lm.domain;
        let mut init = ModeSplit::zero(d);
        match self.cfg.init.preset.as_str() {
            "zero" => {}
            "theorem" => {
                let l = &self.ledger;
                init.a10 = 0.4 * (l.m11 * self.eps).sqrt();
                init.a20 = 0.3 * l.m21 * self.eps;
                init.a01 = 0.4 * (l.m12 * self.eps).sqrt();
                init.a02 = 0.3 * l.m22 * self.eps;
                let raw = SpectralField::from_modes(
                    d,
                    &[(1, 1, 1.0), (2, 1, 0.5), (1, 2, 0.5)],
                );
                let p1 = WienerParams::new(self.cfg.rho, 1)?;
                let target = l.m3_value() * self.eps.powf(1.5) / 6.0;
                init.w = raw.scale(target / raw.wiener_norm(p1));
            }
            "explicit" => {
                init.a10 = self.cfg.init.a10;
                init.a20 = self.cfg.init.a20;
                init.a01 = self.cfg.init.a01;
                init.a02 = self.cfg.init.a02;
                init.w = SpectralField::from_modes(d, &self.cfg.init.w_modes);
                if !init.w.supported_off_special() || init.w.get(0, 0) != 0.0 {
                    return Err(KsError::HypothesisViolation {
                        name: "w_support".to_string(),
                        detail: "w modes must avoid the special set and the mean".to_string(),
                    });
                }
            }
            other => return Err(KsError::Parse(format!("unknown init preset: {other}"))),
        }
        Ok(init)
    }

    fn write_json(&self, name: &str, body: serde_json::Value) -> Result<(), KsError> {
        let wrapped = serde_json::json!({
            "config": serde_json::to_value(&self.cfg).map_err(|e| KsError::Parse(e.to_string()))?,
            "eps": self.eps,
            "report": body,
        });
        let path = self.out_dir.join(name);
        fs::write(&path, serde_json::to_string_pretty(&wrapped).unwrap())?;
        println!("{}", path.display());
        Ok(())
    }

    fn write_csv(&self, name: &str, body: &str) -> Result<(), KsError> {
        let path = self.out_dir.join(name);
        fs::write(&path, body)?;
        // reproducibility sidecar with the resolved configuration
        let sidecar = serde_json::json!({
            "config": serde_json::to_value(&self.cfg).map_err(|e| KsError::Parse(e.to_string()))?,
            "eps": self.eps,
        });
        fs::write(
            path.with_extension("config.json"),
            serde_json::to_string_pretty(&sidecar).unwrap(),
        )?;
        println!("{}", path.display());
        Ok(())
    }
}

fn cmd_constants(cli: &Cli, cfg: RunConfig) -> Result<(), KsError> {
    // constants reporting must not refuse outside the certified regime;
    // it reports the refusal instead
    let d = cfg.domain()?;
    let ledger = ConstantLedger::compute(d, cfg.rho, cfg.search_limit);
    fs::create_dir_all(&cli.out_dir)?;
    let body = serde_json::json!({
        "config": serde_json::to_value(&cfg).map_err(|e| KsError::Parse(e.to_string()))?,
        "ledger": serde_json::to_value(&ledger).map_err(|e| KsError::Parse(e.to_string()))?,
    });
    let path = cli.out_dir.join("constants.json");
    fs::write(&path, serde_json::to_string_pretty(&body).unwrap())?;
    println!("{}", serde_json::to_string_pretty(&body).unwrap());
    if ledger.regime.certified && ledger.eps_star.map_or(false, |e| e > 0.0) {
        Ok(())
    } else {
        Err(KsError::HypothesisViolation {
            name: "feasibility".to_string(),
            detail: if ledger.regime.failed_checks.is_empty() {
                "eps* is not positive".to_string()
            } else {
                ledger.regime.failed_checks.join("; ")
            },
        })
    }
}

fn cmd_check(ctx: &Context) -> Result<(), KsError> {
    let init = ctx.initial_data()?;
    let margins = check_hypotheses(&init, &ctx.ledger, ctx.eps, ctx.cfg.rho)?;
    ctx.write_json(
        "check.json",
        serde_json::json!({
            "hypotheses": margins,
            "all_hold": true,
        }),
    )
}

fn toy_system(ctx: &Context) -> Result<ToySystem, KsError> {
    let l = &ctx.ledger;
    let (eps_i, b_i, l_i, m1, m2) = match ctx.cfg.toy.axis {
        1 => (ctx.lm.eps1, l.b1, l.domain.l1, l.m11, l.m21),
        2 => (ctx.lm.eps2, l.b2, l.domain.l2, l.m12, l.m22),
        a => return Err(KsError::Parse(format!("axis must be 1 or 2, got {a}"))),
    };
    let k = l.k_value();
    let q = 2.0 * k * ctx.eps * ctx.eps;
    let forcing = match ctx.cfg.toy.forcing.as_str() {
        "zero" => Forcing::Zero,
        "constant-extreme" => Forcing::Constant { q1: q, q2: q },
        "sinusoidal" => Forcing::Sinusoidal { amp1: q, amp2: q, omega: 1.0 },
        other => return Err(KsError::Parse(format!("unknown forcing preset: {other}"))),
    };
    Ok(ToySystem {
        i: ctx.cfg.toy.axis,
        eps_i,
        b_i,
        l_i,
        eps: ctx.eps,
        k,
        m1,
        m2,
        forcing,
    })
}

fn cmd_toy(ctx: &Context) -> Result<(), KsError> {
    let sys = toy_system(ctx)?;
    // theorem-hypothesis initial data for the axis pair
    let s0 = ToyState {
        t: 0.0,
        a: 0.4 * (sys.m1 * ctx.eps).sqrt(),
        b: -0.3 * sys.m2 * ctx.eps,
    };
    let traj = integrate(s0, &sys, ctx.cfg.toy.t_horizon, ctx.cfg.toy.dt, ctx.cfg.toy.sample_stride)?;
    let trapping = verify_trapping(&traj, &sys)?;
    let decaying = verify_b_bound(&traj, &sys)?;
    let sweep = level_set_max_gdot(&sys, 10_000);

    let mut csv = String::from("t,a,b,G,Gdot,bound_a2b2,bound_b\n");
    let bound_a2b2 = 4.0 * sys.m1 * ctx.eps;
    let bound_b = sys.m2 * ctx.eps;
    for s in &traj.samples {
        let state = ToyState { t: s.t, a: s.a, b: s.b };
        csv.push_str(&format!(
            "{:.10e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            s.t,
            s.a,
            s.b,
            s.g,
            g_dot(&state, &sys),
            bound_a2b2,
            bound_b
        ));
    }
    ctx.write_csv("toy.csv", &csv)?;
    ctx.write_json(
        "toy.json",
        serde_json::json!({
            "system": sys,
            "horizon": traj.horizon,
            "trapping": trapping,
            "decaying_mode": decaying,
            "level_set_max_gdot": sweep,
            "level_set_negative": sweep < 0.0,
        }),
    )
}

fn cmd_iterate(ctx: &Context) -> Result<(), KsError> {
    let init = ctx.initial_data()?;
    let scheme = ctx.cfg.scheme();
    let result = run_scheme(&init, &ctx.ledger, &ctx.lm, &scheme)?;
    let residual = mild_residual(&result.final_iterate, &init.w, &ctx.lm, &scheme)?;

    let p0 = WienerParams::new(ctx.cfg.rho, 0)?;
    let p1 = WienerParams::new(ctx.cfg.rho, 1)?;
    let dt_w = scheme.dt_w_actual();
    let mut csv = String::from("t,a10,a20,a01,a02,wnorm_rho0,wnorm_rho1\n");
    for (m, a) in result.final_iterate.modes.iter().enumerate() {
        let w = &result.final_iterate.w[m];
        csv.push_str(&format!(
            "{:.10e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            m as f64 * dt_w,
            a[0],
            a[1],
            a[2],
            a[3],
            w.wiener_norm(p0),
            w.wiener_norm(p1)
        ));
    }
    ctx.write_csv("iterate_series.csv", &csv)?;
    if let Some(w_final) = result.final_iterate.w.last() {
        w_final.write_csv(&ctx.out_dir.join("w_final.csv"))?;
    }
    ctx.write_json(
        "iterate.json",
        serde_json::json!({
            "iterations": result.reports,
            "converged": result.converged,
            "mild_residual": residual,
        }),
    )
}

fn cmd_solve(ctx: &Context) -> Result<(), KsError> {
    let init = ctx.initial_data()?;
    check_hypotheses(&init, &ctx.ledger, ctx.eps, ctx.cfg.rho)?;
    let dt = ctx.cfg.direct_dt.unwrap_or(ctx.cfg.dt);
    let stride = (ctx.cfg.dt_w / dt).round().max(1.0) as usize;
    let run = run_direct(
        init.assemble(),
        0.0,
        &ctx.lm,
        ctx.cfg.t_horizon,
        dt,
        ctx.cfg.nonlinear,
        ctx.cfg.rho,
        stride,
    )?;
    let mut csv = String::from("t,psi_bar,a10,a20,a01,a02,wnorm_rho0,wnorm_rho1,energy\n");
    for r in &run.rows {
        csv.push_str(&format!(
            "{:.10e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.t, r.psi_bar, r.a10, r.a20, r.a01, r.a02, r.wnorm_rho0, r.wnorm_rho1, r.energy
        ));
    }
    ctx.write_csv("solve.csv", &csv)?;
    let last = run.rows.last().unwrap();
    ctx.write_json(
        "solve.json",
        serde_json::json!({
            "samples": run.rows.len(),
            "final_t": last.t,
            "final_psi_bar": last.psi_bar,
            "mean_monotone": run.rows.windows(2).all(|w| w[1].psi_bar <= w[0].psi_bar + 1e-15),
        }),
    )
}

fn cmd_xval(ctx: &Context) -> Result<(), KsError> {
    let init = ctx.initial_data()?;
    let dt = ctx.cfg.direct_dt.unwrap_or(ctx.cfg.dt);
    let report = cross_validate(&init, &ctx.ledger, &ctx.lm, &ctx.cfg.scheme(), dt)?;
    let ok = report.direct_bounds_hold;
    ctx.write_json(
        "xval.json",
        serde_json::json!(report),
    )?;
    if ok {
        Ok(())
    } else {
        Err(KsError::BoundViolation {
            iterate: 0,
            t: report.t_max_dist,
            name: "direct_solver_bounds".to_string(),
            margin: report
                .direct_bound_margins
                .iter()
                .map(|(_, m)| *m)
                .fold(f64::INFINITY, f64::min),
        })
    }
}

fn exit_code(e: &KsError) -> u8 {
    match e {
        KsError::HypothesisViolation { .. } | KsError::InadmissibleForcing { .. } => 2,
        _ => 1,
    }
}

fn run(cli: &Cli) -> Result<(), KsError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    cfg.apply_overrides(cli);
    match &cli.command {
        Command::Constants => cmd_constants(cli, cfg),
        Command::Check => cmd_check(&Context::build(cfg, &cli.out_dir)?),
        Command::Toy => cmd_toy(&Context::build(cfg, &cli.out_dir)?),
        Command::Iterate => cmd_iterate(&Context::build(cfg, &cli.out_dir)?),
        Command::Solve => cmd_solve(&Context::build(cfg, &cli.out_dir)?),
        Command::Xval => cmd_xval(&Context::build(cfg, &cli.out_dir)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = serde_json::json!({
                "error": e.to_string(),
                "kind": format!("{e:?}").split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Unknown"),
            });
            eprintln!("{payload}");
            ExitCode::from(exit_code(&e))
        }
    }
}

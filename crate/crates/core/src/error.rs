// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KsError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("domain mismatch between operands")]
    DomainMismatch,

    #[error("unknown projector id: {0}")]
    UnknownProjector(String),

    #[error("non-theorem regime: sigma({k},{j}) = {sigma} >= 0 off the special set")]
    NonDissipativeMode { k: i64, j: i64, sigma: f64 },

    #[error("tail bound verification failed for K1 at shell |k|+|j| = {shell}: {detail}")]
    TailBoundFailure { shell: usize, detail: String },

    #[error("step size {dt} violates constraint {constraint}")]
    StepSize { dt: f64, constraint: String },

    #[error("numerical blowup (NaN/Inf) at t = {t}")]
    Blowup { t: f64 },

    #[error("forcing signal violates admissibility: sup |Q{index}| = {sup} > {limit}")]
    InadmissibleForcing { index: u8, sup: f64, limit: f64 },

    #[error("hypothesis violated: {name}: {detail}")]
    HypothesisViolation { name: String, detail: String },

    #[error("bound violated at iterate {iterate}, t = {t}: {name} (margin {margin})")]
    BoundViolation {
        iterate: usize,
        t: f64,
        name: String,
        margin: f64,
    },

    #[error("scheme did not converge within {max_iters} iterates (last Cauchy distance {distance})")]
    NonConvergence { max_iters: usize, distance: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

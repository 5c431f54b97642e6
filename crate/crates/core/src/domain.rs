// SPDX-License-Identifier: Apache-2.0

//! Periodic rectangle, truncation order, linearized symbol, and the
//! Wiener-norm weight parameters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::KsError;

/// Wavenumber pairs treated by explicit mode ODEs. The remainder `w` is
/// supported on the complement of this set.
pub const SPECIAL_SET: [(usize, usize); 5] = [(0, 0), (1, 0), (2, 0), (0, 1), (0, 2)];

/// Returns true if `(k, j)` belongs to the special set `A`.
pub fn in_special_set(k: usize, j: usize) -> bool {
    SPECIAL_SET.contains(&(k, j))
}

/// Rectangle `[0, L1] x [0, L2]` with cosine truncation order `N`
/// (coefficients kept for `0 <= k, j <= N`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub l1: f64,
    pub l2: f64,
    pub n: usize,
}

impl Domain {
    pub fn new(l1: f64, l2: f64, n: usize) -> Result<Self, KsError> {
        if !(l1 > 0.0) || !(l2 > 0.0) {
            return Err(KsError::InvalidDomain(format!(
                "lengths must be positive, got L1 = {l1}, L2 = {l2}"
            )));
        }
        if n < 4 {
            return Err(KsError::InvalidDomain(format!(
                "truncation order must be at least 4 to cover the special set, got {n}"
            )));
        }
        Ok(Domain { l1, l2, n })
    }

    /// Fundamental x-wavenumber `2*pi/L1`.
    pub fn alpha(&self) -> f64 {
        2.0 * PI / self.l1
    }

    /// Fundamental y-wavenumber `2*pi/L2`.
    pub fn beta(&self) -> f64 {
        2.0 * PI / self.l2
    }

    /// True when both lengths lie strictly between `2*pi` and `4*pi`, so
    /// each direction has exactly one linearly growing mode.
    pub fn theorem_regime(&self) -> bool {
        let lo = 2.0 * PI;
        let hi = 4.0 * PI;
        self.l1 > lo && self.l1 < hi && self.l2 > lo && self.l2 < hi
    }

    /// Number of retained coefficients per axis (`N + 1`).
    pub fn side(&self) -> usize {
        self.n + 1
    }

    /// The same rectangle with truncation order `2N`, used as the padded
    /// grid for exact convolution products.
    pub fn padded(&self) -> Domain {
        Domain {
            l1: self.l1,
            l2: self.l2,
            n: 2 * self.n,
        }
    }
}

/// Symbol of the linearized operator `-Laplacian^2 - Laplacian` at the
/// wavenumber pair `(k, j)`.
pub fn sigma(k: i64, j: i64, d: &Domain) -> f64 {
    let x = (d.alpha() * k as f64).powi(2) + (d.beta() * j as f64).powi(2);
    -x * x + x
}

/// Linear model used by the solvers: the symbol of the domain, with the
/// growth rates of the two growing modes `(1,0)` and `(0,1)` overridable.
///
/// Near the feasibility threshold the growth rate implied by the domain
/// length is far below the resolution of `L` in double precision, so
/// theorem-scale runs prescribe `eps1`, `eps2` directly; every other mode
/// keeps the exact symbol.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinearModel {
    pub domain: Domain,
    pub eps1: f64,
    pub eps2: f64,
}

impl LinearModel {
    /// Growth rates taken from the domain lengths themselves.
    pub fn from_domain(domain: Domain) -> Self {
        LinearModel {
            domain,
            eps1: sigma(1, 0, &domain),
            eps2: sigma(0, 1, &domain),
        }
    }

    /// Prescribed growth rates for the two growing modes.
    pub fn with_growth(domain: Domain, eps1: f64, eps2: f64) -> Self {
        LinearModel { domain, eps1, eps2 }
    }

    pub fn eps(&self) -> f64 {
        self.eps1.max(self.eps2)
    }

    /// Effective symbol: `sigma(k, j)` except at the growing modes.
    pub fn sigma_eff(&self, k: i64, j: i64) -> f64 {
        match (k, j) {
            (1, 0) => self.eps1,
            (0, 1) => self.eps2,
            _ => sigma(k, j, &self.domain),
        }
    }
}

/// Parameters of the `B^m_rho` norm: analyticity radius `rho >= 0` and
/// polynomial order `m` in `{0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WienerParams {
    pub rho: f64,
    pub m: u8,
}

impl WienerParams {
    pub fn new(rho: f64, m: u8) -> Result<Self, KsError> {
        if !(rho >= 0.0) {
            return Err(KsError::InvalidDomain(format!(
                "analyticity radius must be non-negative, got {rho}"
            )));
        }
        if m > 1 {
            return Err(KsError::InvalidDomain(format!(
                "norm order must be 0 or 1, got {m}"
            )));
        }
        Ok(WienerParams { rho, m })
    }

    /// Total weight carried by the cosine coefficient at `(k, j)`: the
    /// multiplicities of the complex-exponential coefficients cancel, so
    /// the weight is `e^{rho(k+j)} (1+k+j)^m` for every pair.
    pub fn weight(&self, k: usize, j: usize) -> f64 {
        let s = (k + j) as f64;
        let w = (self.rho * s).exp();
        if self.m == 1 {
            w * (1.0 + s)
        } else {
            w
        }
    }
}

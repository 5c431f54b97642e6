// SPDX-License-Identifier: Apache-2.0

//! Decompositions of the squared gradient: the six-term split used to
//! extract the forcing scalars of the mode equations, and the four-term
//! split used by the remainder estimates.
//!
//! Terms without `w` are finite trig expansions written down exactly;
//! only the `w`-interactions go through the generic convolution, so
//! truncation error is confined to those products and surfaced via the
//! tail fields.

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::KsError;
use crate::field::{multiply_odd, Axis, ModeSplit, OddField, SpectralField};

/// `sin^2(2 pi m u / L)` as an even field along `axis`:
/// `1/2 - cos(4 pi m u / L)/2`, scaled by `c`.
fn sin_sq(domain: Domain, axis: Axis, m: usize, c: f64) -> SpectralField {
    let mut f = SpectralField::zeros(domain);
    f.set(0, 0, 0.5 * c);
    let (k, j) = match axis {
        Axis::X => (2 * m, 0),
        Axis::Y => (0, 2 * m),
    };
    f.set(k, j, -0.5 * c);
    f
}

/// `sin(2 pi u/L) sin(4 pi u/L)` along `axis`, scaled by `c`:
/// `(cos(2 pi u/L) - cos(6 pi u/L))/2`.
fn sin1_sin2(domain: Domain, axis: Axis, c: f64) -> SpectralField {
    let mut f = SpectralField::zeros(domain);
    let ((k1, j1), (k3, j3)) = match axis {
        Axis::X => ((1, 0), (3, 0)),
        Axis::Y => ((0, 1), (0, 3)),
    };
    f.set(k1, j1, 0.5 * c);
    f.set(k3, j3, -0.5 * c);
    f
}

/// `sin(2 pi m u / L)` as an odd field along `axis`.
fn sine_mode(domain: Domain, axis: Axis, m: usize) -> OddField {
    let (k, j) = match axis {
        Axis::X => (m, 0),
        Axis::Y => (0, m),
    };
    OddField::from_modes(domain, axis, &[(k, j, 1.0)])
}

/// The six-term decomposition of one squared derivative. Index `i` holds
/// the term labeled `i + 1`; the tail collects the padded-grid overflow of
/// the `w`-interaction products (terms 3, 5, 6).
#[derive(Debug, Clone)]
pub struct PsiAxis {
    pub terms: [SpectralField; 6],
    pub tail: SpectralField,
}

/// Both directions of the six-term decomposition.
#[derive(Debug, Clone)]
pub struct PsiBundle {
    pub x: PsiAxis,
    pub y: PsiAxis,
}

fn psi_axis(ms: &ModeSplit, axis: Axis) -> Result<PsiAxis, KsError> {
    let d = ms.w.domain;
    let pi = std::f64::consts::PI;
    let (l, a1, a2) = match axis {
        Axis::X => (d.l1, ms.a10, ms.a20),
        Axis::Y => (d.l2, ms.a01, ms.a02),
    };
    let wd = match axis {
        Axis::X => ms.w.derivative_x(),
        Axis::Y => ms.w.derivative_y(),
    };

    let psi1 = sin_sq(d, axis, 1, 4.0 * pi * pi * a1 * a1 / (l * l));
    let psi2 = sin_sq(d, axis, 2, 16.0 * pi * pi * a2 * a2 / (l * l));
    let psi4 = sin1_sin2(d, axis, 16.0 * pi * pi * a1 * a2 / (l * l));

    let p3 = multiply_odd(&wd, &wd)?;
    let p5 = multiply_odd(&sine_mode(d, axis, 1).scale(-4.0 * pi * a1 / l), &wd)?;
    let p6 = multiply_odd(&sine_mode(d, axis, 2).scale(-8.0 * pi * a2 / l), &wd)?;
    let tail = p3.tail.add(&p5.tail)?.add(&p6.tail)?;

    Ok(PsiAxis {
        terms: [psi1, psi2, p3.field, psi4, p5.field, p6.field],
        tail,
    })
}

/// Builds all twelve decomposition terms from a mode split.
pub fn build_psi(ms: &ModeSplit) -> Result<PsiBundle, KsError> {
    assert!(
        ms.w.supported_off_special() && ms.w.get(0, 0) == 0.0,
        "remainder must be mean-free and supported off the special set"
    );
    Ok(PsiBundle {
        x: psi_axis(ms, Axis::X)?,
        y: psi_axis(ms, Axis::Y)?,
    })
}

impl PsiAxis {
    /// Sum of the truncated terms; with the tail added back this equals
    /// the full product of the derivative with itself.
    pub fn sum(&self) -> SpectralField {
        let mut acc = self.terms[0].clone();
        for t in &self.terms[1..] {
            acc = acc.add(t).expect("terms share a domain");
        }
        acc
    }

    /// The part feeding the forcing scalars: terms 3 + 5 + 6 (all the
    /// `w`-interactions).
    pub fn w_interactions(&self) -> SpectralField {
        self.terms[2]
            .add(&self.terms[4])
            .and_then(|s| s.add(&self.terms[5]))
            .expect("terms share a domain")
    }
}

/// The eight forcing scalars: the special-mode coefficients of the
/// `w`-interaction part of each squared derivative.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ForcingSet {
    pub f10x: f64,
    pub f10y: f64,
    pub f20x: f64,
    pub f20y: f64,
    pub f01x: f64,
    pub f01y: f64,
    pub f02x: f64,
    pub f02y: f64,
}

impl ForcingSet {
    pub fn zero() -> Self {
        ForcingSet {
            f10x: 0.0,
            f10y: 0.0,
            f20x: 0.0,
            f20y: 0.0,
            f01x: 0.0,
            f01y: 0.0,
            f02x: 0.0,
            f02y: 0.0,
        }
    }

    pub fn named(&self) -> [(&'static str, f64); 8] {
        [
            ("F10x", self.f10x),
            ("F10y", self.f10y),
            ("F20x", self.f20x),
            ("F20y", self.f20y),
            ("F01x", self.f01x),
            ("F01y", self.f01y),
            ("F02x", self.f02x),
            ("F02y", self.f02y),
        ]
    }

    /// Per-axis sums as they enter the mode equations.
    pub fn f10(&self) -> f64 {
        self.f10x + self.f10y
    }

    pub fn f20(&self) -> f64 {
        self.f20x + self.f20y
    }

    pub fn f01(&self) -> f64 {
        self.f01x + self.f01y
    }

    pub fn f02(&self) -> f64 {
        self.f02x + self.f02y
    }
}

/// Extracts the eight forcing scalars from a mode split. Terms 1, 2, 4
/// never contribute: their special-mode projections are the explicit
/// quadratic terms of the mode equations.
pub fn build_forcing(ms: &ModeSplit) -> Result<ForcingSet, KsError> {
    let bundle = build_psi(ms)?;
    let sx = bundle.x.w_interactions();
    let sy = bundle.y.w_interactions();
    Ok(ForcingSet {
        f10x: sx.get(1, 0),
        f10y: sy.get(1, 0),
        f20x: sx.get(2, 0),
        f20y: sy.get(2, 0),
        f01x: sx.get(0, 1),
        f01y: sy.get(0, 1),
        f02x: sx.get(0, 2),
        f02y: sy.get(0, 2),
    })
}

/// The four-term decomposition of the squared derivatives used by the
/// remainder estimates: `(phi_x)^2 = phi0 + phi1 + phi2 * w_x + (w_x)^2`
/// and the `y` analogue with `phi3, phi4, phi5`.
#[derive(Debug, Clone)]
pub struct PhiBundle {
    pub phi0: SpectralField,
    pub phi1: SpectralField,
    pub phi2: OddField,
    pub phi3: SpectralField,
    pub phi4: SpectralField,
    pub phi5: OddField,
    /// Truncated product `phi2 * w_x` with its tail.
    pub phi2_wx: crate::field::Product,
    /// Truncated product `phi5 * w_y` with its tail.
    pub phi5_wy: crate::field::Product,
}

/// Builds the four-term decomposition for both directions.
pub fn build_phi_bundle(ms: &ModeSplit) -> Result<PhiBundle, KsError> {
    let d = ms.w.domain;
    let pi = std::f64::consts::PI;

    let phi0 = sin_sq(d, Axis::X, 1, 4.0 * pi * pi * ms.a10 * ms.a10 / (d.l1 * d.l1));
    let phi1 = sin1_sin2(d, Axis::X, 16.0 * pi * pi * ms.a10 * ms.a20 / (d.l1 * d.l1)).add(
        &sin_sq(d, Axis::X, 2, 16.0 * pi * pi * ms.a20 * ms.a20 / (d.l1 * d.l1)),
    )?;
    let phi2 = sine_mode(d, Axis::X, 1)
        .scale(-4.0 * pi * ms.a10 / d.l1)
        .add(&sine_mode(d, Axis::X, 2).scale(-8.0 * pi * ms.a20 / d.l1))?;

    let phi3 = sin_sq(d, Axis::Y, 1, 4.0 * pi * pi * ms.a01 * ms.a01 / (d.l2 * d.l2));
    let phi4 = sin1_sin2(d, Axis::Y, 16.0 * pi * pi * ms.a01 * ms.a02 / (d.l2 * d.l2)).add(
        &sin_sq(d, Axis::Y, 2, 16.0 * pi * pi * ms.a02 * ms.a02 / (d.l2 * d.l2)),
    )?;
    let phi5 = sine_mode(d, Axis::Y, 1)
        .scale(-4.0 * pi * ms.a01 / d.l2)
        .add(&sine_mode(d, Axis::Y, 2).scale(-8.0 * pi * ms.a02 / d.l2))?;

    let phi2_wx = multiply_odd(&phi2, &ms.w.derivative_x())?;
    let phi5_wy = multiply_odd(&phi5, &ms.w.derivative_y())?;

    Ok(PhiBundle { phi0, phi1, phi2, phi3, phi4, phi5, phi2_wx, phi5_wy })
}

/// Margins `K eps^2 - |F|` for the eight scalars.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForcingReport {
    pub limit: f64,
    pub margins: Vec<(String, f64)>,
}

/// Asserts `|F| <= K eps^2` for every scalar; on failure names the first
/// offender.
pub fn forcing_bound_check(fs: &ForcingSet, k: f64, eps: f64) -> Result<ForcingReport, KsError> {
    let limit = k * eps * eps;
    let mut margins = Vec::with_capacity(8);
    for (name, value) in fs.named() {
        let margin = limit - value.abs();
        if margin < 0.0 {
            return Err(KsError::BoundViolation {
                iterate: 0,
                t: 0.0,
                name: name.to_string(),
                margin,
            });
        }
        margins.push((name.to_string(), margin));
    }
    Ok(ForcingReport { limit, margins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::WienerParams;
    use std::f64::consts::PI;

    fn dom(n: usize) -> Domain {
        Domain::new(2.0 * PI, 2.0 * PI, n).unwrap()
    }

    fn split_with(domain: Domain, a: [f64; 4], w_modes: &[(usize, usize, f64)]) -> ModeSplit {
        ModeSplit {
            a10: a[0],
            a20: a[1],
            a01: a[2],
            a02: a[3],
            w: SpectralField::from_modes(domain, w_modes),
        }
    }

    #[test]
    fn psi_w_terms_vanish_without_w() {
        let ms = split_with(dom(8), [1.0, 0.5, -0.3, 0.2], &[]);
        let b = build_psi(&ms).unwrap();
        for axis in [&b.x, &b.y] {
            assert!(axis.terms[2].is_zero());
            assert!(axis.terms[4].is_zero());
            assert!(axis.terms[5].is_zero());
        }
    }

    #[test]
    fn psi_x_pure_terms_vanish_without_x_amplitudes() {
        let ms = split_with(dom(8), [0.0, 0.0, 1.0, 1.0], &[(1, 1, 0.7)]);
        let b = build_psi(&ms).unwrap();
        assert!(b.x.terms[0].is_zero());
        assert!(b.x.terms[3].is_zero());
        assert!(b.x.terms[4].is_zero());
        assert!(b.x.terms[5].is_zero());
        // Psi3 does not involve amplitudes and survives.
        assert!(!b.x.terms[2].is_zero());
    }

    #[test]
    fn psi_supports_match_trig_products() {
        let ms = split_with(dom(8), [1.0, 1.0, 0.0, 0.0], &[(1, 1, 0.5)]);
        let b = build_psi(&ms).unwrap();
        let expect_support = |f: &SpectralField, modes: &[(usize, usize)]| {
            for (k, j, c) in f.iter_modes() {
                if c != 0.0 {
                    assert!(modes.contains(&(k, j)), "unexpected mode ({k},{j})");
                }
            }
        };
        expect_support(&b.x.terms[0], &[(0, 0), (2, 0)]);
        expect_support(&b.x.terms[1], &[(0, 0), (4, 0)]);
        expect_support(&b.x.terms[3], &[(1, 0), (3, 0)]);
    }

    #[test]
    fn psi_reconstruction_identity() {
        let d = dom(8);
        let ms = split_with(
            d,
            [0.9, -0.4, 0.6, 0.1],
            &[(1, 1, 0.3), (2, 1, -0.2), (3, 3, 0.05), (1, 2, 0.11)],
        );
        let b = build_psi(&ms).unwrap();
        let phi = ms.assemble();
        let p = WienerParams::new(0.1, 0).unwrap();
        let direct_x = multiply_odd(&phi.derivative_x(), &phi.derivative_x()).unwrap();
        let rx = b.x.sum().sub(&direct_x.field).unwrap().wiener_norm(p);
        assert!(rx < 1e-12 * direct_x.field.wiener_norm(p), "residual {rx}");
        let tail_res = b.x.tail.sub(&direct_x.tail).unwrap().wiener_norm(p);
        assert!(tail_res < 1e-12);
        let direct_y = multiply_odd(&phi.derivative_y(), &phi.derivative_y()).unwrap();
        let ry = b.y.sum().sub(&direct_y.field).unwrap().wiener_norm(p);
        assert!(ry < 1e-12 * direct_y.field.wiener_norm(p).max(1.0), "residual {ry}");
    }

    #[test]
    fn forcing_zero_without_w() {
        let ms = split_with(dom(8), [1.0, 2.0, 3.0, 4.0], &[]);
        let fs = build_forcing(&ms).unwrap();
        for (name, v) in fs.named() {
            assert_eq!(v, 0.0, "{name}");
        }
    }

    #[test]
    fn forcing_single_cross_mode() {
        // w = c cos(x) cos(y), a10 != 0 at L = 2 pi:
        // F01x comes only from term 5 and equals 4 pi^2 a10 c / L1^2
        // (= a10 c / 4 at wavenumber normalization alpha = 1... evaluated
        // directly below from the closed form).
        let d = dom(8);
        let a10 = 0.7;
        let c = 0.4;
        let ms = split_with(d, [a10, 0.0, 0.0, 0.0], &[(1, 1, c)]);
        let fs = build_forcing(&ms).unwrap();
        let expected = 4.0 * PI * PI * a10 * c / (d.l1 * d.l1);
        assert!((fs.f01x - expected).abs() < 1e-14, "{} vs {expected}", fs.f01x);
        assert_eq!(fs.f10x, 0.0);
    }

    #[test]
    fn forcing_matches_quadrature_oracle() {
        // Dense-grid rectangle quadrature is exact for trig polynomials
        // once the grid beats the bandwidth.
        let d = dom(6);
        let ms = split_with(
            d,
            [0.8, -0.5, 0.3, 0.9],
            &[(1, 1, 0.4), (2, 2, -0.15), (3, 1, 0.07)],
        );
        let fs = build_forcing(&ms).unwrap();

        let g = 4 * (d.n + 1); // grid points per axis
        let oracle = |mode: (usize, usize), axis: Axis| -> f64 {
            let b = build_psi(&ms).unwrap();
            let f = match axis {
                Axis::X => b.x.w_interactions(),
                Axis::Y => b.y.w_interactions(),
            };
            let mut acc = 0.0;
            for ix in 0..g {
                for iy in 0..g {
                    let x = d.l1 * ix as f64 / g as f64;
                    let y = d.l2 * iy as f64 / g as f64;
                    let basis = (d.alpha() * mode.0 as f64 * x).cos()
                        * (d.beta() * mode.1 as f64 * y).cos();
                    acc += f.eval(x, y) * basis;
                }
            }
            // cosine-mode normalization: 2 per non-zero index
            let mut norm = 1.0;
            if mode.0 > 0 {
                norm *= 2.0;
            }
            if mode.1 > 0 {
                norm *= 2.0;
            }
            norm * acc / (g * g) as f64
        };

        for (value, mode, axis) in [
            (fs.f10x, (1, 0), Axis::X),
            (fs.f20x, (2, 0), Axis::X),
            (fs.f01x, (0, 1), Axis::X),
            (fs.f02x, (0, 2), Axis::X),
            (fs.f10y, (1, 0), Axis::Y),
            (fs.f01y, (0, 1), Axis::Y),
        ] {
            let o = oracle(mode, axis);
            assert!(
                (value - o).abs() <= 1e-10 * o.abs().max(1.0),
                "mode {mode:?}: {value} vs oracle {o}"
            );
        }
    }

    #[test]
    fn phi_bundle_identity_and_projection() {
        let d = dom(8);
        let ms = split_with(
            d,
            [0.6, 0.2, -0.8, 0.35],
            &[(1, 1, 0.25), (1, 2, -0.1), (4, 0, 0.07)],
        );
        let b = build_phi_bundle(&ms).unwrap();
        let p = WienerParams::new(0.1, 0).unwrap();

        // P5 annihilates phi0 and phi3 exactly.
        assert!(b.phi0.project_off_special().project_mean_free().is_zero());
        assert!(b.phi3.project_off_special().project_mean_free().is_zero());

        // (phi_x)^2 = phi0 + phi1 + phi2*w_x + (w_x)^2 on the truncated grid.
        let phi = ms.assemble();
        let wx = ms.w.derivative_x();
        let direct = multiply_odd(&phi.derivative_x(), &phi.derivative_x()).unwrap();
        let wx2 = multiply_odd(&wx, &wx).unwrap();
        let recon = b
            .phi0
            .add(&b.phi1)
            .unwrap()
            .add(&b.phi2_wx.field)
            .unwrap()
            .add(&wx2.field)
            .unwrap();
        let res = recon.sub(&direct.field).unwrap().wiener_norm(p);
        assert!(res < 1e-12 * direct.field.wiener_norm(p), "residual {res}");

        // y-direction analogue
        let wy = ms.w.derivative_y();
        let direct_y = multiply_odd(&phi.derivative_y(), &phi.derivative_y()).unwrap();
        let wy2 = multiply_odd(&wy, &wy).unwrap();
        let recon_y = b
            .phi3
            .add(&b.phi4)
            .unwrap()
            .add(&b.phi5_wy.field)
            .unwrap()
            .add(&wy2.field)
            .unwrap();
        let res_y = recon_y.sub(&direct_y.field).unwrap().wiener_norm(p);
        assert!(res_y < 1e-12 * direct_y.field.wiener_norm(p), "residual {res_y}");
    }

    #[test]
    fn phi_bundle_zero_amplitude() {
        let ms = split_with(dom(8), [0.0, 0.4, 0.0, 0.0], &[(1, 1, 0.2)]);
        let b = build_phi_bundle(&ms).unwrap();
        assert!(b.phi0.is_zero());
    }

    #[test]
    fn norm_chain_inequality() {
        // || P5 (phi_x)^2 ||_0 <= ||phi1||_0 + ||phi2||_0 ||w||_1 + ||w||_1^2
        let d = dom(8);
        let ms = split_with(d, [0.5, -0.2, 0.0, 0.0], &[(1, 1, 0.3), (2, 1, -0.12)]);
        let b = build_phi_bundle(&ms).unwrap();
        let p0 = WienerParams::new(0.1, 0).unwrap();
        let p1 = WienerParams::new(0.1, 1).unwrap();
        let phi = ms.assemble();
        let sq = multiply_odd(&phi.derivative_x(), &phi.derivative_x()).unwrap();
        let lhs = sq
            .field
            .project_off_special()
            .project_mean_free()
            .wiener_norm(p0)
            + sq.tail.wiener_norm(p0);
        let w1 = ms.w.wiener_norm(p1);
        let rhs = b.phi1.wiener_norm(p0) + b.phi2.wiener_norm(p0) * w1 + w1 * w1;
        assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
    }

    #[test]
    fn bound_check_margins() {
        let fs = ForcingSet::zero();
        let r = forcing_bound_check(&fs, 2.0, 0.5).unwrap();
        for (_, m) in r.margins {
            assert!((m - 0.5).abs() < 1e-15);
        }

        let mut bad = ForcingSet::zero();
        bad.f20y = 1.0;
        let e = forcing_bound_check(&bad, 2.0, 0.5);
        assert!(
            matches!(e, Err(KsError::BoundViolation { ref name, .. }) if name == "F20y"),
            "{e:?}"
        );
    }

    #[test]
    fn oversized_w_violates_bound_at_small_eps() {
        // quadratic scaling in w: inflate w far beyond the inductive
        // scale and the term-3 contribution breaks the K eps^2 budget.
        let d = dom(8);
        let eps = 1e-6;
        let k = 1.0;
        // far above the inductive scale eps^{3/2}; term 3 then dwarfs
        // the k * eps^2 budget
        let w_amp = 0.1;
        let ms = split_with(d, [0.0, 0.0, 0.0, 0.0], &[(1, 1, w_amp)]);
        let fs = build_forcing(&ms).unwrap();
        assert!(forcing_bound_check(&fs, k, eps).is_err());
    }
}

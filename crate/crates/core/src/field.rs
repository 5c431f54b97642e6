// SPDX-License-Identifier: Apache-2.0

//! Truncated cosine-symmetric spectral fields and the odd (sine-basis)
//! intermediates produced by differentiation.
//!
//! The even symmetry of the solutions is structural here: a
//! [`SpectralField`] can only represent sums of `cos * cos` modes, and the
//! public products of odd fields always land back in the even class.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{Domain, WienerParams};
use crate::error::KsError;

/// Compensated (Kahan) accumulator; the Wiener sums mix scales
/// `e^{rho(k+j)}` across wavenumbers.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Real cosine-coefficient field: `coeffs[(k, j)]` multiplies
/// `cos(2*pi*k*x/L1) * cos(2*pi*j*y/L2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    pub domain: Domain,
    coeffs: Vec<f64>,
}

/// Axis of the sine factor in an odd intermediate field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// Sine-basis intermediate: for [`Axis::X`] the basis is
/// `sin(2*pi*k*x/L1) * cos(2*pi*j*y/L2)` (and `cos * sin` for `Y`).
/// Odd fields arise from differentiation; products of two odd fields with
/// the same axis are even and return a [`SpectralField`].
#[derive(Debug, Clone, PartialEq)]
pub struct OddField {
    pub domain: Domain,
    pub axis: Axis,
    coeffs: Vec<f64>,
}

/// Result of a padded convolution product: the truncated field plus the
/// discarded tail (modes beyond the truncation order, kept on the padded
/// grid) so truncation error is observable.
#[derive(Debug, Clone)]
pub struct Product {
    pub field: SpectralField,
    pub tail: SpectralField,
}

impl Product {
    /// Wiener mass of the discarded tail.
    pub fn tail_mass(&self, p: WienerParams) -> f64 {
        self.tail.wiener_norm(p)
    }
}

fn idx(side: usize, k: usize, j: usize) -> usize {
    k * side + j
}

impl SpectralField {
    pub fn zeros(domain: Domain) -> Self {
        let side = domain.side();
        SpectralField {
            domain,
            coeffs: vec![0.0; side * side],
        }
    }

    pub fn from_modes(domain: Domain, modes: &[(usize, usize, f64)]) -> Self {
        let mut f = Self::zeros(domain);
        for &(k, j, c) in modes {
            f.set(k, j, c);
        }
        f
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.coeffs[idx(self.domain.side(), k, j)]
    }

    pub fn set(&mut self, k: usize, j: usize, c: f64) {
        let side = self.domain.side();
        self.coeffs[idx(side, k, j)] = c;
    }

    pub fn iter_modes(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let side = self.domain.side();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i / side, i % side, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        SpectralField {
            domain: self.domain,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField, KsError> {
        if self.domain != other.domain {
            return Err(KsError::DomainMismatch);
        }
        Ok(SpectralField {
            domain: self.domain,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField, KsError> {
        Ok(self.add(&other.scale(-1.0))?)
    }

    /// Weighted l1 norm of the complex-exponential Fourier coefficients.
    /// For cosine fields the per-mode multiplicities cancel, leaving
    /// `sum |c_{k,j}| e^{rho(k+j)} (1+k+j)^m`.
    pub fn wiener_norm(&self, p: WienerParams) -> f64 {
        let mut acc = KahanSum::default();
        for (k, j, c) in self.iter_modes() {
            if c != 0.0 {
                acc.add(c.abs() * p.weight(k, j));
            }
        }
        acc.value()
    }

    /// `d/dx`, an odd (sine-basis) field.
    pub fn derivative_x(&self) -> OddField {
        let side = self.domain.side();
        let a = self.domain.alpha();
        let mut out = OddField::zeros(self.domain, Axis::X);
        for k in 1..side {
            for j in 0..side {
                out.coeffs[idx(side, k, j)] = -a * k as f64 * self.coeffs[idx(side, k, j)];
            }
        }
        out
    }

    /// `d/dy`, an odd (sine-basis) field.
    pub fn derivative_y(&self) -> OddField {
        let side = self.domain.side();
        let b = self.domain.beta();
        let mut out = OddField::zeros(self.domain, Axis::Y);
        for k in 0..side {
            for j in 1..side {
                out.coeffs[idx(side, k, j)] = -b * j as f64 * self.coeffs[idx(side, k, j)];
            }
        }
        out
    }

    /// Zeroes the mean (the `(0,0)` coefficient).
    pub fn project_mean_free(&self) -> SpectralField {
        let mut f = self.clone();
        f.set(0, 0, 0.0);
        f
    }

    /// Zeroes every coefficient on the special set `A`.
    pub fn project_off_special(&self) -> SpectralField {
        let mut f = self.clone();
        for &(k, j) in crate::domain::SPECIAL_SET.iter() {
            if k < f.domain.side() && j < f.domain.side() {
                f.set(k, j, 0.0);
            }
        }
        f
    }

    pub fn supported_off_special(&self) -> bool {
        crate::domain::SPECIAL_SET
            .iter()
            .all(|&(k, j)| k >= self.domain.side() || j >= self.domain.side() || self.get(k, j) == 0.0)
    }

    /// Pointwise evaluation; used by gridded oracles and diagnostics, not
    /// by the solvers.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let a = self.domain.alpha();
        let b = self.domain.beta();
        let mut acc = 0.0;
        for (k, j, c) in self.iter_modes() {
            if c != 0.0 {
                acc += c * (a * k as f64 * x).cos() * (b * j as f64 * y).cos();
            }
        }
        acc
    }

    /// Writes the field as CSV (`k,j,coeff` with 17 significant digits)
    /// plus a JSON sidecar holding `{L1, L2, N}` next to it.
    pub fn write_csv(&self, path: &Path) -> Result<(), KsError> {
        let mut out = String::from("k,j,coeff\n");
        for (k, j, c) in self.iter_modes() {
            out.push_str(&format!("{k},{j},{c:.16e}\n"));
        }
        fs::write(path, out)?;
        let sidecar = serde_json::json!({
            "L1": self.domain.l1,
            "L2": self.domain.l2,
            "N": self.domain.n,
        });
        fs::write(path.with_extension("json"), sidecar.to_string())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, KsError> {
        let sidecar = fs::read_to_string(path.with_extension("json"))?;
        let meta: serde_json::Value =
            serde_json::from_str(&sidecar).map_err(|e| KsError::Parse(e.to_string()))?;
        let get = |key: &str| -> Result<f64, KsError> {
            meta.get(key)
                .and_then(|v| v.as_f64())
                .ok_or_else(|| KsError::Parse(format!("sidecar missing {key}")))
        };
        let domain = Domain::new(get("L1")?, get("L2")?, get("N")? as usize)?;
        let mut f = Self::zeros(domain);
        let body = fs::read_to_string(path)?;
        for (lineno, line) in body.lines().enumerate() {
            if lineno == 0 {
                if line.trim() != "k,j,coeff" {
                    return Err(KsError::Parse(format!("unexpected header: {line}")));
                }
                continue;
            }
            let mut cells = line.split(',');
            let mut next = || -> Result<&str, KsError> {
                cells
                    .next()
                    .ok_or_else(|| KsError::Parse(format!("short row at line {}", lineno + 1)))
            };
            let k: usize = next()?
                .trim()
                .parse()
                .map_err(|e| KsError::Parse(format!("line {}: {e}", lineno + 1)))?;
            let j: usize = next()?
                .trim()
                .parse()
                .map_err(|e| KsError::Parse(format!("line {}: {e}", lineno + 1)))?;
            let c: f64 = next()?
                .trim()
                .parse()
                .map_err(|e| KsError::Parse(format!("line {}: {e}", lineno + 1)))?;
            f.set(k, j, c);
        }
        Ok(f)
    }
}

impl OddField {
    pub fn zeros(domain: Domain, axis: Axis) -> Self {
        let side = domain.side();
        OddField {
            domain,
            axis,
            coeffs: vec![0.0; side * side],
        }
    }

    /// Builds a pure sine mode; for [`Axis::X`] this is
    /// `c * sin(2*pi*k*x/L1) * cos(2*pi*j*y/L2)`.
    pub fn from_modes(domain: Domain, axis: Axis, modes: &[(usize, usize, f64)]) -> Self {
        let mut f = Self::zeros(domain, axis);
        for &(k, j, c) in modes {
            match axis {
                Axis::X => assert!(k >= 1, "sine index along x must be at least 1"),
                Axis::Y => assert!(j >= 1, "sine index along y must be at least 1"),
            }
            f.coeffs[idx(domain.side(), k, j)] = c;
        }
        f
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.coeffs[idx(self.domain.side(), k, j)]
    }

    pub fn iter_modes(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let side = self.domain.side();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i / side, i % side, c))
    }

    pub fn scale(&self, s: f64) -> OddField {
        OddField {
            domain: self.domain,
            axis: self.axis,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &OddField) -> Result<OddField, KsError> {
        if self.domain != other.domain || self.axis != other.axis {
            return Err(KsError::DomainMismatch);
        }
        Ok(OddField {
            domain: self.domain,
            axis: self.axis,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Same weight cancellation as for even fields.
    pub fn wiener_norm(&self, p: WienerParams) -> f64 {
        let mut acc = KahanSum::default();
        for (k, j, c) in self.iter_modes() {
            if c != 0.0 {
                acc.add(c.abs() * p.weight(k, j));
            }
        }
        acc.value()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let a = self.domain.alpha();
        let b = self.domain.beta();
        let mut acc = 0.0;
        for (k, j, c) in self.iter_modes() {
            if c != 0.0 {
                let (fx, fy) = match self.axis {
                    Axis::X => ((a * k as f64 * x).sin(), (b * j as f64 * y).cos()),
                    Axis::Y => ((a * k as f64 * x).cos(), (b * j as f64 * y).sin()),
                };
                acc += c * fx * fy;
            }
        }
        acc
    }
}

/// Splits accumulated padded coefficients into the truncated field and the
/// discarded tail.
fn split_padded(domain: Domain, padded: Vec<f64>) -> Product {
    let pside = domain.padded().side();
    let side = domain.side();
    let mut field = SpectralField::zeros(domain);
    let mut tail = SpectralField::zeros(domain.padded());
    for k in 0..pside {
        for j in 0..pside {
            let c = padded[idx(pside, k, j)];
            if c == 0.0 {
                continue;
            }
            if k < side && j < side {
                field.set(k, j, c);
            } else {
                tail.set(k, j, c);
            }
        }
    }
    Product { field, tail }
}

/// Exact convolution of two cosine fields via product-to-sum identities.
/// All interactions up to wavenumber `2N` are accumulated on the padded
/// grid before truncation.
pub fn multiply(f: &SpectralField, g: &SpectralField) -> Result<Product, KsError> {
    if f.domain != g.domain {
        return Err(KsError::DomainMismatch);
    }
    let side = f.domain.side();
    let pside = f.domain.padded().side();
    let mut acc = vec![0.0; pside * pside];
    for k1 in 0..side {
        for j1 in 0..side {
            let c1 = f.coeffs[idx(side, k1, j1)];
            if c1 == 0.0 {
                continue;
            }
            for k2 in 0..side {
                for j2 in 0..side {
                    let c2 = g.coeffs[idx(side, k2, j2)];
                    if c2 == 0.0 {
                        continue;
                    }
                    let c = 0.25 * c1 * c2;
                    let kp = k1 + k2;
                    let km = k1.abs_diff(k2);
                    let jp = j1 + j2;
                    let jm = j1.abs_diff(j2);
                    acc[idx(pside, kp, jp)] += c;
                    acc[idx(pside, kp, jm)] += c;
                    acc[idx(pside, km, jp)] += c;
                    acc[idx(pside, km, jm)] += c;
                }
            }
        }
    }
    Ok(split_padded(f.domain, acc))
}

/// Product of two odd fields sharing the same sine axis; the sine factors
/// combine to cosines, so the result is an even field.
pub fn multiply_odd(f: &OddField, g: &OddField) -> Result<Product, KsError> {
    if f.domain != g.domain || f.axis != g.axis {
        return Err(KsError::DomainMismatch);
    }
    let side = f.domain.side();
    let pside = f.domain.padded().side();
    let mut acc = vec![0.0; pside * pside];
    // sin(a)sin(b) = (cos(a-b) - cos(a+b)) / 2; the cosine factors on the
    // other axis expand as in `multiply`.
    for k1 in 0..side {
        for j1 in 0..side {
            let c1 = f.coeffs[idx(side, k1, j1)];
            if c1 == 0.0 {
                continue;
            }
            for k2 in 0..side {
                for j2 in 0..side {
                    let c2 = g.coeffs[idx(side, k2, j2)];
                    if c2 == 0.0 {
                        continue;
                    }
                    let c = 0.25 * c1 * c2;
                    let kp = k1 + k2;
                    let km = k1.abs_diff(k2);
                    let jp = j1 + j2;
                    let jm = j1.abs_diff(j2);
                    match f.axis {
                        Axis::X => {
                            acc[idx(pside, km, jp)] += c;
                            acc[idx(pside, km, jm)] += c;
                            acc[idx(pside, kp, jp)] -= c;
                            acc[idx(pside, kp, jm)] -= c;
                        }
                        Axis::Y => {
                            acc[idx(pside, kp, jm)] += c;
                            acc[idx(pside, km, jm)] += c;
                            acc[idx(pside, kp, jp)] -= c;
                            acc[idx(pside, km, jp)] -= c;
                        }
                    }
                }
            }
        }
    }
    Ok(split_padded(f.domain, acc))
}

/// Projector identifiers of the `project` operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorId {
    P0,
    P5,
    P10,
    P20,
    P01,
    P02,
}

impl std::str::FromStr for ProjectorId {
    type Err = KsError;

    fn from_str(s: &str) -> Result<Self, KsError> {
        match s {
            "P0" => Ok(ProjectorId::P0),
            "P5" => Ok(ProjectorId::P5),
            "P10" => Ok(ProjectorId::P10),
            "P20" => Ok(ProjectorId::P20),
            "P01" => Ok(ProjectorId::P01),
            "P02" => Ok(ProjectorId::P02),
            other => Err(KsError::UnknownProjector(other.to_string())),
        }
    }
}

/// Result of applying a projector: a field for `P0`/`P5`, a scalar
/// coefficient for the single-mode projectors.
#[derive(Debug, Clone)]
pub enum Projected {
    Field(SpectralField),
    Coefficient(f64),
}

pub fn project(f: &SpectralField, which: ProjectorId) -> Projected {
    match which {
        ProjectorId::P0 => Projected::Field(f.project_mean_free()),
        ProjectorId::P5 => Projected::Field(f.project_off_special()),
        ProjectorId::P10 => Projected::Coefficient(f.get(1, 0)),
        ProjectorId::P20 => Projected::Coefficient(f.get(2, 0)),
        ProjectorId::P01 => Projected::Coefficient(f.get(0, 1)),
        ProjectorId::P02 => Projected::Coefficient(f.get(0, 2)),
    }
}

/// The 5-way decomposition of a field: four special-mode amplitudes plus
/// the remainder supported off the special set.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSplit {
    pub a10: f64,
    pub a20: f64,
    pub a01: f64,
    pub a02: f64,
    pub w: SpectralField,
}

impl ModeSplit {
    pub fn zero(domain: Domain) -> Self {
        ModeSplit {
            a10: 0.0,
            a20: 0.0,
            a01: 0.0,
            a02: 0.0,
            w: SpectralField::zeros(domain),
        }
    }

    pub fn split(phi: &SpectralField) -> Self {
        ModeSplit {
            a10: phi.get(1, 0),
            a20: phi.get(2, 0),
            a01: phi.get(0, 1),
            a02: phi.get(0, 2),
            w: phi.project_off_special().project_mean_free(),
        }
    }

    /// Exact inverse of [`ModeSplit::split`] for mean-free fields.
    pub fn assemble(&self) -> SpectralField {
        let mut phi = self.w.clone();
        phi.set(1, 0, self.a10);
        phi.set(2, 0, self.a20);
        phi.set(0, 1, self.a01);
        phi.set(0, 2, self.a02);
        phi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn d(n: usize) -> Domain {
        Domain::new(2.0 * PI, 2.0 * PI, n).unwrap()
    }

    #[test]
    fn wiener_norm_examples() {
        let dom = d(4);
        let p0 = WienerParams::new(0.3, 0).unwrap();
        // f = cos(2*pi*x/L1): two exponential coefficients of 1/2 at k = +-1.
        let f = SpectralField::from_modes(dom, &[(1, 0, 1.0)]);
        assert!((f.wiener_norm(p0) - (0.3f64).exp()).abs() < 1e-14);
        // constant field
        let one = SpectralField::from_modes(dom, &[(0, 0, 1.0)]);
        assert_eq!(one.wiener_norm(p0), 1.0);
        let p1 = WienerParams::new(0.3, 1).unwrap();
        assert_eq!(one.wiener_norm(p1), 1.0);
        // cos x cos y with m = 1: weight (1+2) e^{2 rho}
        let fxy = SpectralField::from_modes(dom, &[(1, 1, 1.0)]);
        assert!((fxy.wiener_norm(p1) - 3.0 * (0.6f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn multiply_examples() {
        let dom = d(4);
        let f = SpectralField::from_modes(dom, &[(1, 0, 1.0)]);
        // cos^2 = 1/2 + cos(2x)/2
        let p = multiply(&f, &f).unwrap();
        assert!((p.field.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((p.field.get(2, 0) - 0.5).abs() < 1e-15);
        assert!(p.tail.is_zero());

        let g = SpectralField::zeros(dom);
        assert!(multiply(&f, &g).unwrap().field.is_zero());

        let gy = SpectralField::from_modes(dom, &[(0, 1, 1.0)]);
        let p = multiply(&f, &gy).unwrap();
        assert!((p.field.get(1, 1) - 1.0).abs() < 1e-15);
        // only that one mode
        let mut count = 0;
        for (_, _, c) in p.field.iter_modes() {
            if c != 0.0 {
                count += 1;
            }
        }
        assert_eq!(count, 1);
    }

    #[test]
    fn multiply_tail_is_reported() {
        let dom = d(4);
        let f = SpectralField::from_modes(dom, &[(4, 0, 1.0)]);
        let p = multiply(&f, &f).unwrap();
        // cos(4x)^2 = 1/2 + cos(8x)/2; the (8,0) half lands in the tail.
        assert!((p.field.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((p.tail.get(8, 0) - 0.5).abs() < 1e-15);
        let rho0 = WienerParams::new(0.0, 0).unwrap();
        assert!((p.tail_mass(rho0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let dom = d(4);
        let f = SpectralField::from_modes(dom, &[(1, 0, 1.0)]);
        let fx = f.derivative_x();
        assert!((fx.get(1, 0) - (-1.0)).abs() < 1e-14); // alpha = 1 at L = 2*pi
        let c = SpectralField::from_modes(dom, &[(0, 0, 3.0)]);
        assert!(c.derivative_x().iter_modes().all(|(_, _, v)| v == 0.0));
        let g = SpectralField::from_modes(dom, &[(0, 2, 1.0)]);
        let gy = g.derivative_y();
        assert!((gy.get(0, 2) - (-2.0)).abs() < 1e-14);
    }

    #[test]
    fn odd_square_matches_identity() {
        // sin(x)^2 = 1/2 - cos(2x)/2
        let dom = d(4);
        let s = OddField::from_modes(dom, Axis::X, &[(1, 0, 1.0)]);
        let p = multiply_odd(&s, &s).unwrap();
        assert!((p.field.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((p.field.get(2, 0) - (-0.5)).abs() < 1e-15);
    }

    #[test]
    fn projector_examples() {
        let dom = d(4);
        let f = SpectralField::from_modes(dom, &[(1, 0, 1.0)]);
        match project(&f, ProjectorId::P5) {
            Projected::Field(g) => assert!(g.is_zero()),
            _ => panic!("expected field"),
        }
        let g = SpectralField::from_modes(dom, &[(0, 0, 7.0), (0, 1, 1.0)]);
        match project(&g, ProjectorId::P0) {
            Projected::Field(h) => {
                assert_eq!(h.get(0, 0), 0.0);
                assert_eq!(h.get(0, 1), 1.0);
            }
            _ => panic!("expected field"),
        }
        let h = SpectralField::from_modes(dom, &[(1, 0, 3.0), (2, 0, 5.0)]);
        match project(&h, ProjectorId::P10) {
            Projected::Coefficient(c) => assert_eq!(c, 3.0),
            _ => panic!("expected coefficient"),
        }
        assert!("P7".parse::<ProjectorId>().is_err());
    }

    #[test]
    fn split_assemble_roundtrip() {
        let dom = d(4);
        let phi = SpectralField::from_modes(
            dom,
            &[(1, 0, 2.0), (2, 0, -1.0), (0, 1, 0.5), (1, 1, 3.0), (3, 2, -0.25)],
        );
        let ms = ModeSplit::split(&phi);
        assert_eq!(ms.a10, 2.0);
        assert!(ms.w.supported_off_special());
        assert_eq!(ms.assemble(), phi);

        let single = SpectralField::from_modes(dom, &[(1, 1, 1.0)]);
        let ms = ModeSplit::split(&single);
        assert_eq!(ms.a10, 0.0);
        assert_eq!(ms.w, single);
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        let dom = Domain::new(2.0 * PI * 1.001, 2.0 * PI * 0.999, 6).unwrap();
        let f = SpectralField::from_modes(
            dom,
            &[(1, 1, 1.0 / 3.0), (3, 2, -2.7e-19), (0, 0, 1e17)],
        );
        f.write_csv(&path).unwrap();
        let g = SpectralField::read_csv(&path).unwrap();
        assert_eq!(f, g);
    }
}

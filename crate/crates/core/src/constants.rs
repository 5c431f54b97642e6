// SPDX-License-Identifier: Apache-2.0

//! Derived constants and the feasibility threshold `eps*`.
//!
//! Every smallness condition invoked in the trapping and induction
//! arguments is encoded as an explicit inequality in `eps`; `eps*` is the
//! supremum of the interval on which all of them hold simultaneously.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::{in_special_set, sigma, Domain};
use crate::error::KsError;

/// One power-law term `coef * eps^pow`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub pow: f64,
}

/// Inequality `sum(lhs) <= sum(rhs)` (or `<` when `strict`), monotone in
/// `eps`: every lhs power strictly exceeds the smallest rhs power, so the
/// feasible set is an interval anchored at zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub description: String,
    pub lhs: Vec<Term>,
    pub rhs: Vec<Term>,
    pub strict: bool,
}

impl Condition {
    fn eval_side(terms: &[Term], eps: f64) -> f64 {
        terms.iter().map(|t| t.coef * eps.powf(t.pow)).sum()
    }

    pub fn holds(&self, eps: f64) -> bool {
        // Single-term sides compare in log space to dodge underflow at
        // tiny eps; mixed sums are evaluated directly (f64 range is ample
        // for the powers that occur here).
        if self.lhs.len() == 1 && self.rhs.len() == 1 {
            let l = &self.lhs[0];
            let r = &self.rhs[0];
            if l.coef > 0.0 && r.coef > 0.0 {
                let ll = l.coef.ln() + l.pow * eps.ln();
                let lr = r.coef.ln() + r.pow * eps.ln();
                return if self.strict { ll < lr } else { ll <= lr };
            }
        }
        let l = Self::eval_side(&self.lhs, eps);
        let r = Self::eval_side(&self.rhs, eps);
        if self.strict {
            l < r
        } else {
            l <= r
        }
    }

    /// Relative margin `(rhs - lhs)/rhs` at the given `eps`.
    pub fn margin(&self, eps: f64) -> f64 {
        let l = Self::eval_side(&self.lhs, eps);
        let r = Self::eval_side(&self.rhs, eps);
        (r - l) / r
    }

    /// Largest `eps` in `(0, 1]` satisfying the inequality, by bisection
    /// in log scale to relative tolerance 1e-10.
    pub fn crossing(&self) -> f64 {
        if self.holds(1.0) {
            return 1.0;
        }
        // The nominal bracket floor is 1e-16; with large constants the
        // crossing can sit far below it, so walk down until feasible.
        let mut lo = 1e-16;
        while !self.holds(lo) {
            lo *= 1e-4;
            if lo < 1e-300 {
                return 0.0;
            }
        }
        let mut hi = 1.0;
        while (hi - lo) / lo > 1e-10 {
            let mid = (lo.ln() + hi.ln()).mul_add(0.5, 0.0).exp();
            if self.holds(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Pass/fail and margin bookkeeping for one condition at the computed
/// threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub name: String,
    pub description: String,
    pub crossing: f64,
    pub satisfied_at_eps_star: bool,
    pub margin_at_half_eps_star: f64,
}

/// Regime checks that gate theorem-scale certification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegimeReport {
    pub theorem_regime: bool,
    pub b1_greater_ten: bool,
    pub b2_greater_ten: bool,
    pub dissipative_off_special: bool,
    pub certified: bool,
    pub failed_checks: Vec<String>,
}

/// All named constants for a given `(L1, L2, rho)`, the encoded smallness
/// conditions, and the resulting feasibility threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantLedger {
    pub domain: Domain,
    pub rho: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps: f64,
    pub b1: f64,
    pub b2: f64,
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
    pub k1: Option<f64>,
    pub k2: f64,
    pub m3: Option<f64>,
    pub k: Option<f64>,
    pub eps_star: Option<f64>,
    pub binding_condition: Option<String>,
    pub conditions: Vec<ConditionReport>,
    pub regime: RegimeReport,
}

/// Linear coefficients of the four special modes:
/// `eps_i = -(2pi/L_i)^4 + (2pi/L_i)^2`, `B_i = (4pi/L_i)^4 - (4pi/L_i)^2`.
pub fn linear_coefficients(d: &Domain) -> (f64, f64, f64, f64) {
    let e = |l: f64| {
        let q = (2.0 * PI / l).powi(2);
        -q * q + q
    };
    let b = |l: f64| {
        let q = (4.0 * PI / l).powi(2);
        q * q - q
    };
    (e(d.l1), e(d.l2), b(d.l1), b(d.l2))
}

/// `M_{1,i} = 12 B_i L_i^4 / pi^4` and `M_{2,i} = 8 pi^2 M_{1,i} / L_i^2`.
pub fn m_constants(b1: f64, b2: f64, d: &Domain) -> (f64, f64, f64, f64) {
    let p4 = PI.powi(4);
    let m11 = 12.0 * b1 * d.l1.powi(4) / p4;
    let m12 = 12.0 * b2 * d.l2.powi(4) / p4;
    let m21 = 8.0 * PI * PI * m11 / (d.l1 * d.l1);
    let m22 = 8.0 * PI * PI * m12 / (d.l2 * d.l2);
    (m11, m12, m21, m22)
}

/// `K1 = sup over (k,j) off the special set of (1+k+j)/(-sigma(k,j))`,
/// by enumeration over `k+j <= search_limit` plus an explicit check that
/// the tail beyond the enumerated shells cannot compete: the numerator is
/// linear while `-sigma` grows quartically.
pub fn compute_k1(d: &Domain, search_limit: usize) -> Result<f64, KsError> {
    assert!(search_limit >= 8, "search_limit must be at least 8");
    let mut best = 0.0f64;
    for k in 0..=search_limit {
        for j in 0..=search_limit.saturating_sub(k) {
            if in_special_set(k, j) {
                continue;
            }
            let s = sigma(k as i64, j as i64, d);
            if s >= 0.0 {
                return Err(KsError::NonDissipativeMode {
                    k: k as i64,
                    j: j as i64,
                    sigma: s,
                });
            }
            let ratio = (1.0 + (k + j) as f64) / (-s);
            best = best.max(ratio);
        }
    }

    // Tail domination: for k+j = s > search_limit the argument of the
    // symbol satisfies x >= mu^2 s^2 / 2 with mu the smaller fundamental
    // wavenumber, hence -sigma = x^2 - x >= x(x-1). The resulting bound
    // (1+s)/(x_min(x_min-1)) must already be below the enumerated maximum
    // at the boundary shell and must decrease from there on.
    let mu = d.alpha().min(d.beta());
    let x_min = |s: f64| 0.5 * mu * mu * s * s;
    let shell = (search_limit + 1) as f64;
    if x_min(shell) <= 2.0 {
        return Err(KsError::TailBoundFailure {
            shell: search_limit + 1,
            detail: format!(
                "x_min = {} <= 2 at the boundary shell; enlarge search_limit",
                x_min(shell)
            ),
        });
    }
    let tail_bound = |s: f64| (1.0 + s) / (x_min(s) * (x_min(s) - 1.0));
    if tail_bound(shell) > best {
        return Err(KsError::TailBoundFailure {
            shell: search_limit + 1,
            detail: format!(
                "tail bound {} exceeds enumerated maximum {}; enlarge search_limit",
                tail_bound(shell),
                best
            ),
        });
    }
    // With x_min > 2 the bound is decreasing in s (linear numerator,
    // quartic denominator); verify on the next few shells as a guard.
    for s in (search_limit + 1)..(search_limit + 8) {
        if tail_bound((s + 1) as f64) > tail_bound(s as f64) {
            return Err(KsError::TailBoundFailure {
                shell: s + 1,
                detail: "tail bound is not decreasing".to_string(),
            });
        }
    }
    Ok(best)
}

/// The eight `B^0_rho` norms bounded by `K2`, in closed form via
/// product-to-sum identities. Returns their maximum.
pub fn compute_k2(d: &Domain, rho: f64) -> f64 {
    let e1 = rho.exp();
    let e2 = (2.0 * rho).exp();
    let e3 = (3.0 * rho).exp();
    let e4 = (4.0 * rho).exp();
    let per_axis = |l: f64| {
        [
            // (16 pi^2/L^2) sin(2pi x/L) sin(4pi x/L) -> modes 1 and 3
            16.0 * PI * PI / (l * l) * (0.5 * e1 + 0.5 * e3),
            // (16 pi^2/L^2) sin^2(4pi x/L) = (16 pi^2/L^2)(1 - cos(8pi x/L))/2
            16.0 * PI * PI / (l * l) * (0.5 + 0.5 * e4),
            // (4 pi/L) sin(2pi x/L)
            4.0 * PI / l * e1,
            // (8 pi/L) sin(4pi x/L)
            8.0 * PI / l * e2,
        ]
    };
    per_axis(d.l1)
        .into_iter()
        .chain(per_axis(d.l2))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `M3` (max of the two displayed expressions) and `K` (max of the eight
/// displayed quotients, with exact cosine-norm denominators `e^{rho}` and
/// `e^{2 rho}`).
pub fn compute_m3_and_k(
    k1: f64,
    k2: f64,
    m11: f64,
    m12: f64,
    m21: f64,
    m22: f64,
    rho: f64,
) -> (f64, f64) {
    let m3 = (6.0 * k1 * 2.0 * m11.sqrt() * m21 * k2).max(6.0 * k1 * 2.0 * m12.sqrt() * m22 * k2);
    let d1 = rho.exp();
    let d2 = (2.0 * rho).exp();
    let quotients = [
        3.0 * m11.sqrt() * m3 * k2 / d1,
        3.0 * m11.sqrt() * m3 * k2 / d2,
        3.0 * m12.sqrt() * m3 * k2 / d1,
        3.0 * m12.sqrt() * m3 * k2 / d2,
    ];
    // The display lists each numerator against both single-axis cosine
    // denominators across the two directions; the distinct values reduce
    // to the four above.
    let k = quotients.into_iter().fold(f64::NEG_INFINITY, f64::max);
    (m3, k)
}

struct AxisConstants {
    i: usize,
    l: f64,
    b: f64,
    m1: f64,
    m2: f64,
}

/// Builds the full encoded condition set for the proofs' smallness
/// requirements.
pub fn build_conditions(
    d: &Domain,
    b1: f64,
    b2: f64,
    m11: f64,
    m12: f64,
    m21: f64,
    m22: f64,
    k1: f64,
    k2: f64,
    m3: f64,
    k: f64,
    rho: f64,
) -> Vec<Condition> {
    let mut out = Vec::new();
    let axes = [
        AxisConstants { i: 1, l: d.l1, b: b1, m1: m11, m2: m21 },
        AxisConstants { i: 2, l: d.l2, b: b2, m1: m12, m2: m22 },
    ];
    let t = |coef: f64, pow: f64| Term { coef, pow };
    for ax in &axes {
        let i = ax.i;
        let l4 = ax.l.powi(4);
        let p4 = PI.powi(4);
        out.push(Condition {
            name: format!("lyapunov_young_half_{i}"),
            description: format!("L{i}^4 eps^2 / 4 pi^4 <= M1{i} eps / 2"),
            lhs: vec![t(l4 / (4.0 * p4), 2.0)],
            rhs: vec![t(ax.m1 / 2.0, 1.0)],
            strict: false,
        });
        out.push(Condition {
            name: format!("lyapunov_initial_quarter_{i}"),
            description: format!("L{i}^4 eps^2 / 4 pi^4 < M1{i} eps / 4"),
            lhs: vec![t(l4 / (4.0 * p4), 2.0)],
            rhs: vec![t(ax.m1 / 4.0, 1.0)],
            strict: true,
        });
        out.push(Condition {
            name: format!("lyapunov_final_full_{i}"),
            description: format!("L{i}^4 eps^2 / 4 pi^4 <= M1{i} eps"),
            lhs: vec![t(l4 / (4.0 * p4), 2.0)],
            rhs: vec![t(ax.m1, 1.0)],
            strict: false,
        });
        out.push(Condition {
            name: format!("lyapunov_forcing_remainder_{i}"),
            description: format!(
                "4 K^2 eps^3 + 16 K^2 eps^4 / B{i} + 2 L{i}^2 K eps^3 / pi^2 <= M1{i} eps^2 / 48"
            ),
            lhs: vec![
                t(4.0 * k * k, 3.0),
                t(16.0 * k * k / ax.b, 4.0),
                t(2.0 * ax.l * ax.l * k / (PI * PI), 3.0),
            ],
            rhs: vec![t(ax.m1 / 48.0, 2.0)],
            strict: false,
        });
        out.push(Condition {
            name: format!("duhamel_b_{i}"),
            description: format!(
                "M2{i} eps / 2 + (M2{i} eps + 2 K eps^2) / B{i} <= M2{i} eps"
            ),
            lhs: vec![
                t(ax.m2 / 2.0 + ax.m2 / ax.b, 1.0),
                t(2.0 * k / ax.b, 2.0),
            ],
            rhs: vec![t(ax.m2, 1.0)],
            strict: false,
        });
        out.push(Condition {
            name: format!("phi1_quadratic_{i}"),
            description: format!("M2{i}^2 K2 eps^2 <= M3 eps^(3/2) / 6 K1"),
            lhs: vec![t(ax.m2 * ax.m2 * k2, 2.0)],
            rhs: vec![t(m3 / (6.0 * k1), 1.5)],
            strict: false,
        });
        out.push(Condition {
            name: format!("phi2_w_{i}"),
            description: format!(
                "2 M1{i}^(1/2) M3 K2 eps^2 + M2{i} M3 K2 eps^(5/2) <= M3 eps^(3/2) / 24 K1"
            ),
            lhs: vec![
                t(2.0 * ax.m1.sqrt() * m3 * k2, 2.0),
                t(ax.m2 * m3 * k2, 2.5),
            ],
            rhs: vec![t(m3 / (24.0 * k1), 1.5)],
            strict: false,
        });
        for k0 in [1usize, 2] {
            out.push(Condition {
                name: format!("forcing_axis{i}_mode{k0}"),
                description: format!(
                    "M3^2 eps^3 + 2 M1{i}^(1/2) M3 K2 eps^2 + M2{i} M3 K2 eps^(5/2) <= K e^({k0} rho) eps^2"
                ),
                lhs: vec![
                    t(m3 * m3, 3.0),
                    t(2.0 * ax.m1.sqrt() * m3 * k2, 2.0),
                    t(ax.m2 * m3 * k2, 2.5),
                ],
                rhs: vec![t(k * (k0 as f64 * rho).exp(), 2.0)],
                strict: false,
            });
        }
    }
    out.push(Condition {
        name: "w_squared".to_string(),
        description: "M3^2 eps^3 <= M3 eps^(3/2) / 24 K1".to_string(),
        lhs: vec![t(m3 * m3, 3.0)],
        rhs: vec![t(m3 / (24.0 * k1), 1.5)],
        strict: false,
    });
    out
}

/// Supremum of `eps` satisfying every condition, the binding condition,
/// and per-condition reports. An empty set yields the infinity sentinel.
pub fn feasibility_epsilon_star(
    conditions: &[Condition],
) -> (f64, Option<String>, Vec<ConditionReport>) {
    if conditions.is_empty() {
        return (f64::INFINITY, None, Vec::new());
    }
    let crossings: Vec<f64> = conditions.iter().map(Condition::crossing).collect();
    let (argmin, &eps_star) = crossings
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let reports = conditions
        .iter()
        .zip(&crossings)
        .map(|(c, &x)| ConditionReport {
            name: c.name.clone(),
            description: c.description.clone(),
            crossing: x,
            satisfied_at_eps_star: c.holds(eps_star * (1.0 - 1e-9)),
            margin_at_half_eps_star: c.margin(eps_star / 2.0),
        })
        .collect();
    let binding = Some(conditions[argmin].name.clone());
    (eps_star, binding, reports)
}

impl ConstantLedger {
    /// Computes the full ledger. Regime failures do not abort; they are
    /// reported and certification is withheld.
    pub fn compute(domain: Domain, rho: f64, search_limit: usize) -> ConstantLedger {
        let (eps1, eps2, b1, b2) = linear_coefficients(&domain);
        let eps = eps1.max(eps2);
        let (m11, m12, m21, m22) = m_constants(b1, b2, &domain);
        let k2 = compute_k2(&domain, rho);

        let mut failed = Vec::new();
        let theorem_regime = domain.theorem_regime();
        if !theorem_regime {
            failed.push("theorem_regime: both lengths must lie in (2pi, 4pi)".to_string());
        }
        let b1_gt = b1 > 10.0;
        let b2_gt = b2 > 10.0;
        if !b1_gt {
            failed.push(format!("b1_greater_ten: B1 = {b1} <= 10"));
        }
        if !b2_gt {
            failed.push(format!("b2_greater_ten: B2 = {b2} <= 10"));
        }

        let k1_result = compute_k1(&domain, search_limit);
        let dissipative = k1_result.is_ok();
        if let Err(e) = &k1_result {
            failed.push(format!("dissipative_off_special: {e}"));
        }

        let (k1, m3, k, eps_star, binding, conditions) = match k1_result {
            Ok(k1) => {
                let (m3, k) = compute_m3_and_k(k1, k2, m11, m12, m21, m22, rho);
                let conds = build_conditions(&domain, b1, b2, m11, m12, m21, m22, k1, k2, m3, k, rho);
                let (eps_star, binding, reports) = feasibility_epsilon_star(&conds);
                (Some(k1), Some(m3), Some(k), Some(eps_star), binding, reports)
            }
            Err(_) => (None, None, None, None, None, Vec::new()),
        };

        let certified = failed.is_empty() && eps_star.map_or(false, |e| e > 0.0);
        ConstantLedger {
            domain,
            rho,
            eps1,
            eps2,
            eps,
            b1,
            b2,
            m11,
            m12,
            m21,
            m22,
            k1,
            k2,
            m3,
            k,
            eps_star,
            binding_condition: binding,
            conditions,
            regime: RegimeReport {
                theorem_regime,
                b1_greater_ten: b1_gt,
                b2_greater_ten: b2_gt,
                dissipative_off_special: dissipative,
                certified,
                failed_checks: failed,
            },
        }
    }

    /// Convenience accessors that panic when the regime precluded the
    /// constant; theorem-scale callers check `regime.certified` first.
    pub fn k1_value(&self) -> f64 {
        self.k1.expect("K1 unavailable outside the dissipative regime")
    }

    pub fn m3_value(&self) -> f64 {
        self.m3.expect("M3 unavailable outside the dissipative regime")
    }

    pub fn k_value(&self) -> f64 {
        self.k.expect("K unavailable outside the dissipative regime")
    }

    pub fn eps_star_value(&self) -> f64 {
        self.eps_star
            .expect("eps* unavailable outside the dissipative regime")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(scale: f64) -> Domain {
        Domain::new(2.0 * PI * scale, 2.0 * PI * scale, 16).unwrap()
    }

    #[test]
    fn linear_coefficients_at_2pi() {
        let (e1, e2, b1, b2) = linear_coefficients(&dom(1.0));
        assert!(e1.abs() < 1e-12 && e2.abs() < 1e-12);
        assert!((b1 - 12.0).abs() < 1e-12 && (b2 - 12.0).abs() < 1e-12);
    }

    #[test]
    fn linear_coefficients_at_4pi() {
        let d = Domain::new(4.0 * PI, 2.0 * PI, 8).unwrap();
        let (e1, _, _, _) = linear_coefficients(&d);
        assert!((e1 - 3.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn coefficients_positive_in_theorem_regime() {
        for scale in [1.001, 1.1, 1.5, 1.9, 1.999] {
            let (e1, e2, b1, b2) = linear_coefficients(&dom(scale));
            assert!(e1 > 0.0 && e2 > 0.0 && b1 > 0.0 && b2 > 0.0, "scale {scale}");
        }
    }

    #[test]
    fn m_constants_at_2pi() {
        let d = dom(1.0);
        let (_, _, b1, b2) = linear_coefficients(&d);
        let (m11, _, m21, _) = m_constants(b1, b2, &d);
        assert!((m11 - 2304.0).abs() < 1e-9);
        assert!((m21 - 4608.0).abs() < 1e-9);
    }

    #[test]
    fn m_constants_linear_in_b() {
        let d = dom(1.0);
        let (m11a, _, _, _) = m_constants(12.0, 12.0, &d);
        let (m11b, _, _, _) = m_constants(24.0, 12.0, &d);
        assert!((m11b / m11a - 2.0).abs() < 1e-14);
    }

    #[test]
    fn k1_at_2pi() {
        let k1 = compute_k1(&dom(1.0), 12).unwrap();
        assert!((k1 - 1.5).abs() < 1e-14);
    }

    #[test]
    fn k1_slightly_larger_domain() {
        let d = dom(1.01);
        let k1 = compute_k1(&d, 12).unwrap();
        let q = (1.0f64 / 1.01).powi(2);
        let expected = 3.0 / (4.0 * q * q - 2.0 * q);
        assert!((k1 - expected).abs() < 1e-12);
    }

    #[test]
    fn k1_brute_force_agreement() {
        // The enumeration over a much larger range must not find a better
        // competitor: the sup is attained at small wavenumbers.
        for scale in [1.0, 1.001, 1.05, 1.3] {
            let d = dom(scale);
            let a = compute_k1(&d, 12).unwrap();
            let b = compute_k1(&d, 36).unwrap();
            assert_eq!(a, b, "scale {scale}");
        }
    }

    #[test]
    fn k1_rejects_growing_off_special() {
        let d = Domain::new(5.0 * PI, 5.0 * PI, 8).unwrap();
        assert!(matches!(
            compute_k1(&d, 12),
            Err(KsError::NonDissipativeMode { .. })
        ));
    }

    #[test]
    fn k2_closed_forms() {
        let d = dom(1.0);
        let rho = 0.17;
        let k2 = compute_k2(&d, rho);
        // All eight candidates by hand at L1 = L2 = 2pi (16pi^2/L^2 = 4,
        // 4pi/L = 2, 8pi/L = 4):
        let c = [
            4.0 * (0.5 * rho.exp() + 0.5 * (3.0 * rho).exp()),
            4.0 * (0.5 + 0.5 * (4.0 * rho).exp()),
            2.0 * rho.exp(),
            4.0 * (2.0 * rho).exp(),
        ];
        let expected = c.into_iter().fold(f64::NEG_INFINITY, f64::max);
        assert!((k2 - expected).abs() < 1e-14);
    }

    #[test]
    fn k2_symmetric_at_equal_lengths() {
        let d = dom(1.2);
        // x and y candidate lists coincide, so the max equals the
        // single-axis max.
        let k2 = compute_k2(&d, 0.0);
        let single = [
            16.0 * PI * PI / (d.l1 * d.l1),
            16.0 * PI * PI / (d.l1 * d.l1),
            4.0 * PI / d.l1,
            8.0 * PI / d.l1,
        ]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
        assert!((k2 - single).abs() < 1e-14);
    }

    #[test]
    fn m3_dominates_its_arguments() {
        let d = dom(1.001);
        let (_, _, b1, b2) = linear_coefficients(&d);
        let (m11, m12, m21, m22) = m_constants(b1, b2, &d);
        let k1 = compute_k1(&d, 12).unwrap();
        let k2 = compute_k2(&d, 0.1);
        let (m3, _) = compute_m3_and_k(k1, k2, m11, m12, m21, m22, 0.1);
        assert!(m3 >= 6.0 * k1 * 2.0 * m11.sqrt() * m21 * k2);
        assert!(m3 >= 6.0 * k1 * 2.0 * m12.sqrt() * m22 * k2);
    }

    #[test]
    fn eps_star_positive_in_theorem_regime() {
        let ledger = ConstantLedger::compute(dom(1.001), 0.1, 24);
        assert!(ledger.regime.certified);
        let eps_star = ledger.eps_star_value();
        assert!(eps_star > 0.0 && eps_star.is_finite());
        // tightness of the bisection
        for report in &ledger.conditions {
            assert!(report.satisfied_at_eps_star, "{}", report.name);
        }
        let conds = build_conditions(
            &ledger.domain,
            ledger.b1,
            ledger.b2,
            ledger.m11,
            ledger.m12,
            ledger.m21,
            ledger.m22,
            ledger.k1_value(),
            ledger.k2,
            ledger.m3_value(),
            ledger.k_value(),
            ledger.rho,
        );
        let bumped = eps_star * (1.0 + 1e-6);
        assert!(conds.iter().any(|c| !c.holds(bumped)));
    }

    #[test]
    fn empty_condition_set_is_unbounded() {
        let (eps_star, binding, reports) = feasibility_epsilon_star(&[]);
        assert!(eps_star.is_infinite());
        assert!(binding.is_none() && reports.is_empty());
    }

    #[test]
    fn eps_star_monotone_in_dominating_constants() {
        // Enlarging K (which appears only on dominated, higher-power
        // sides... on the lhs of the remainder conditions and the rhs of
        // the forcing conditions at the same power) must not increase the
        // crossing of any lhs condition it scales.
        let d = dom(1.001);
        let (_, _, b1, b2) = linear_coefficients(&d);
        let (m11, m12, m21, m22) = m_constants(b1, b2, &d);
        let k1 = compute_k1(&d, 12).unwrap();
        let k2 = compute_k2(&d, 0.1);
        let (m3, k) = compute_m3_and_k(k1, k2, m11, m12, m21, m22, 0.1);
        let base = build_conditions(&d, b1, b2, m11, m12, m21, m22, k1, k2, m3, k, 0.1);
        let bigger = build_conditions(&d, b1, b2, m11, m12, m21, m22, k1, k2, m3, 2.0 * k, 0.1);
        for (a, b) in base.iter().zip(&bigger) {
            if a.name.starts_with("lyapunov_forcing_remainder") || a.name.starts_with("duhamel") {
                assert!(b.crossing() <= a.crossing(), "{}", a.name);
            }
        }
    }

    #[test]
    fn margins_positive_at_half() {
        let ledger = ConstantLedger::compute(dom(1.001), 0.1, 24);
        for report in &ledger.conditions {
            assert!(
                report.margin_at_half_eps_star > 0.0,
                "{}: margin {}",
                report.name,
                report.margin_at_half_eps_star
            );
        }
    }

    #[test]
    fn refuses_certification_outside_regime() {
        let d = Domain::new(5.0 * PI, 5.0 * PI, 8).unwrap();
        let ledger = ConstantLedger::compute(d, 0.1, 24);
        assert!(!ledger.regime.certified);
        assert!(!ledger.regime.b1_greater_ten);
        assert!(ledger
            .regime
            .failed_checks
            .iter()
            .any(|f| f.starts_with("b1_greater_ten")));
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transfer principle: `‖Xv/√n‖₂ ≥ a1‖Σ^{1/2}v‖₂ − a2‖v‖₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpConstants {
    pub a1: f64,
    pub a2: f64,
}

/// Incoherence: `|uᵀXv/√n| ≤ b1‖Σ^{1/2}v‖₂‖u‖₂ + b2‖v‖₁‖u‖₂ + b3‖Σ^{1/2}v‖₂‖u‖₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IpConstants {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

/// Augmented transfer principle:
/// `‖Xv/√n + u‖₂ ≥ c1‖[Σ^{1/2}v; u]‖₂ − c2‖v‖₁ − c3‖u‖₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtpConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl TpConstants {
    pub fn new(a1: f64, a2: f64) -> Result<Self> {
        if !(a1.is_finite() && a2 >= 0.0 && a2.is_finite()) {
            return Err(Error::invalid(format!("TP constants need finite a1 and a2 >= 0 (got {a1}, {a2})")));
        }
        Ok(TpConstants { a1, a2 })
    }
}

impl IpConstants {
    pub fn new(b1: f64, b2: f64, b3: f64) -> Result<Self> {
        if [b1, b2, b3].iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
            return Err(Error::invalid(format!("IP constants must be nonnegative (got {b1}, {b2}, {b3})")));
        }
        Ok(IpConstants { b1, b2, b3 })
    }

    /// The weakening `IP(0; b2; b1 + b3)`, valid because `‖u‖₂ ≤ ‖u‖₁`.
    pub fn without_b1(&self) -> IpConstants {
        IpConstants {
            b1: 0.0,
            b2: self.b2,
            b3: self.b1 + self.b3,
        }
    }
}

impl AtpConstants {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        if !(c1 > 0.0 && c1.is_finite()) || [c2, c3].iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(Error::invalid(format!("ATP constants need c1 > 0, c2, c3 >= 0 (got {c1}, {c2}, {c3})")));
        }
        Ok(AtpConstants { c1, c2, c3 })
    }

    /// TP constants implied by restricting to `u = 0`.
    pub fn as_tp(&self) -> TpConstants {
        TpConstants { a1: self.c1, a2: self.c2 }
    }
}

/// Constants that a Gaussian design with unit-bounded diagonal covariance
/// satisfies with probability at least `1 − 2δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianDesignConstants {
    pub tp: TpConstants,
    pub ip: IpConstants,
    pub atp: AtpConstants,
    /// `a1 ≤ 0` or `c1 ≤ 0`: the corresponding inequality carries no information.
    pub vacuous: bool,
}

pub fn theorem2_constants(n: usize, p: usize, delta: f64) -> Result<GaussianDesignConstants> {
    if n < 100 {
        return Err(Error::invalid(format!("Gaussian design constants require n >= 100 (got {n})")));
    }
    if !(delta > 0.0 && delta < 1.0 / 7.0) {
        return Err(Error::invalid(format!("Gaussian design constants require delta in (0, 1/7) (got {delta})")));
    }
    if p == 0 {
        return Err(Error::invalid("p must be at least 1"));
    }
    let nf = n as f64;
    let sqrt_n = nf.sqrt();
    let log_p_term = (2.0 * (p as f64).ln() / nf).sqrt();
    let log_n_term = (2.0 * nf.ln() / nf).sqrt();

    let a1 = 1.0 - (4.3 + (2.0 * (9.0 / delta).ln()).sqrt()) / sqrt_n;
    let a2 = 1.2 * log_p_term;
    let b1 = (4.8 * 2f64.sqrt() + (2.0 * (81.0 / delta).ln()).sqrt()) / sqrt_n;
    let b3 = 1.2 * log_n_term;
    let c1 = 0.75 - (17.5 + 9.6 * (2.0 * (2.0 / delta).ln()).sqrt()) / sqrt_n;
    let c2 = 3.6 * log_p_term;
    let c3 = 2.4 * log_n_term;

    Ok(GaussianDesignConstants {
        tp: TpConstants { a1, a2 },
        ip: IpConstants { b1, b2: a2, b3 },
        atp: AtpConstants { c1, c2, c3 },
        vacuous: a1 <= 0.0 || c1 <= 0.0,
    })
}

/// How the `b2`, `b3` contributions scale with `1/α` when combining TP and IP.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineRule {
    /// `c2 = a2 + b2/α`, `c3 = b3/α`.
    #[default]
    Derived,
    /// `c2 = a2 + 2b2/α`, `c3 = 2b3/α`.
    Doubled,
}

/// ATP constants from TP and IP: `c1 = √(a1² − b1 − α²)` for `0 < α < √(a1² − b1)`.
pub fn combine_atp(tp: &TpConstants, ip: &IpConstants, alpha: f64) -> Result<AtpConstants> {
    combine_atp_with(tp, ip, alpha, CombineRule::Derived)
}

pub fn combine_atp_with(tp: &TpConstants, ip: &IpConstants, alpha: f64, rule: CombineRule) -> Result<AtpConstants> {
    let room = tp.a1 * tp.a1 - ip.b1;
    if room <= 0.0 {
        return Err(Error::invalid(format!(
            "no admissible alpha: a1² − b1 = {room:e} is not positive"
        )));
    }
    let upper = room.sqrt();
    if !(alpha > 0.0 && alpha < upper) {
        return Err(Error::invalid(format!("alpha = {alpha} outside the admissible interval (0, {upper})")));
    }
    let factor = match rule {
        CombineRule::Derived => 1.0,
        CombineRule::Doubled => 2.0,
    };
    Ok(AtpConstants {
        c1: (room - alpha * alpha).sqrt(),
        c2: tp.a2 + factor * ip.b2 / alpha,
        c3: factor * ip.b3 / alpha,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Condition {
    pub holds: bool,
    /// `lhs / rhs`; the condition holds iff this is at most 1.
    pub margin: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Sparsity/contamination condition `s/ϰ² + o ≤ c1² / (400·max(c2, c3, 5b2/c1)²)`.
pub fn theorem1_condition(s: usize, o: usize, kappa: f64, atp: &AtpConstants, b2: f64) -> Result<Theorem1Condition> {
    if !(kappa > 0.0) {
        return Err(Error::invalid(format!("kappa = {kappa} must be positive")));
    }
    if !(atp.c1 > 0.0) {
        return Err(Error::invalid(format!("c1 = {} must be positive", atp.c1)));
    }
    let lhs = s as f64 / (kappa * kappa) + o as f64;
    let worst = atp.c2.max(atp.c3).max(5.0 * b2 / atp.c1);
    let rhs = atp.c1 * atp.c1 / (400.0 * worst * worst);
    let margin = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(Theorem1Condition {
        holds: lhs <= rhs,
        margin,
        lhs,
        rhs,
    })
}

/// Risk bound on `‖Σ^{1/2}(β̂ − β*)‖₂`:
/// `(24λ/c1²)·max(2c2/c1, b3/c1²)·(s/ϰ² + 7o) + 5λ√s/(6c1²ϰ)`.
pub fn theorem1_bound(lambda: f64, s: usize, o: usize, kappa: f64, atp: &AtpConstants, b3: f64) -> Result<f64> {
    if !(kappa > 0.0) || !(atp.c1 > 0.0) || !(lambda >= 0.0) {
        return Err(Error::invalid("theorem1_bound needs lambda >= 0, kappa > 0 and c1 > 0"));
    }
    let c1sq = atp.c1 * atp.c1;
    let sf = s as f64;
    let slope = (2.0 * atp.c2 / atp.c1).max(b3 / c1sq);
    Ok(24.0 * lambda / c1sq * slope * (sf / (kappa * kappa) + 7.0 * o as f64) + 5.0 * lambda * sf.sqrt() / (6.0 * c1sq * kappa))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gaussian_constants_values() {
        let k = theorem2_constants(10_000, 100, 1.0 / 9.0).unwrap();
        assert!(rel(k.tp.a1, 0.927_353_923_852_649_8) < 1e-12);
        assert!(rel(k.tp.a2, 0.036_418_251_105_243_514) < 1e-12);
        assert_eq!(k.tp.a2, k.ip.b2);
        assert!(!k.vacuous);
    }

    #[test]
    fn gaussian_constants_limits() {
        let k = theorem2_constants(1_000_000_000_000, 100, 0.1).unwrap();
        assert!((k.tp.a1 - 1.0).abs() < 1e-5);
        assert!((k.atp.c1 - 0.75).abs() < 1e-4);
        for v in [k.tp.a2, k.ip.b1, k.ip.b2, k.ip.b3, k.atp.c2, k.atp.c3] {
            assert!(v < 1e-4);
        }
    }

    #[test]
    fn gaussian_constants_hypotheses() {
        assert!(theorem2_constants(99, 10, 0.1).is_err());
        assert!(theorem2_constants(500, 10, 1.0 / 7.0).is_err());
        assert!(theorem2_constants(500, 10, 0.0).is_err());
        let small = theorem2_constants(500, 50, 0.1).unwrap();
        assert!(small.vacuous && small.atp.c1 < 0.0);
    }

    #[test]
    fn combine_values() {
        let tp = TpConstants::new(1.0, 0.1).unwrap();
        let ip = IpConstants::new(0.0, 0.05, 0.05).unwrap();
        let atp = combine_atp(&tp, &ip, 0.5).unwrap();
        assert!(rel(atp.c1, 0.75f64.sqrt()) < 1e-15);
        assert!(rel(atp.c2, 0.2) < 1e-15);
        assert!(rel(atp.c3, 0.1) < 1e-15);
        let doubled = combine_atp_with(&tp, &ip, 0.5, CombineRule::Doubled).unwrap();
        assert!(rel(doubled.c2, 0.3) < 1e-15);
        assert!(rel(doubled.c3, 0.2) < 1e-15);
    }

    #[test]
    fn combine_ip_free_limit() {
        let tp = TpConstants::new(0.8, 0.05).unwrap();
        let atp = combine_atp(&tp, &IpConstants::new(0.0, 0.0, 0.0).unwrap(), 1e-6).unwrap();
        assert!((atp.c1 - 0.8).abs() < 1e-9);
        assert_eq!(atp.c2, 0.05);
        assert_eq!(atp.c3, 0.0);
    }

    #[test]
    fn combine_rejects_empty_interval() {
        let tp = TpConstants::new(0.5, 0.0).unwrap();
        let ip = IpConstants::new(0.25, 0.0, 0.0).unwrap();
        assert!(combine_atp(&tp, &ip, 1e-3).is_err());
        let ip = IpConstants::new(0.0, 0.0, 0.0).unwrap();
        assert!(combine_atp(&tp, &ip, 0.5).is_err());
        assert!(combine_atp(&tp, &ip, 0.0).is_err());
    }

    #[test]
    fn combine_monotone_in_alpha() {
        let tp = TpConstants::new(0.9, 0.1).unwrap();
        let ip = IpConstants::new(0.2, 0.05, 0.07).unwrap();
        let upper = (0.81f64 - 0.2).sqrt();
        let mut prev: Option<AtpConstants> = None;
        for k in 1..20 {
            let atp = combine_atp(&tp, &ip, upper * k as f64 / 20.0).unwrap();
            if let Some(p) = prev {
                assert!(atp.c1 < p.c1 && atp.c2 < p.c2 && atp.c3 < p.c3);
            }
            prev = Some(atp);
        }
    }

    #[test]
    fn condition_values() {
        let atp = AtpConstants::new(0.5, 0.01, 0.01).unwrap();
        let c = theorem1_condition(1, 0, 1.0, &atp, 0.01).unwrap();
        assert!(rel(c.rhs, 0.0625) < 1e-12);
        assert!(!c.holds);
        assert!(rel(c.margin, 16.0) < 1e-12);
        assert!(theorem1_condition(0, 0, 1.0, &atp, 0.01).unwrap().holds);
        let loose = AtpConstants { c1: 0.5, c2: 0.0, c3: 0.0 };
        assert!(theorem1_condition(1000, 1000, 1.0, &loose, 0.0).unwrap().holds);
    }

    #[test]
    fn bound_values() {
        let atp = AtpConstants::new(1.0, 0.01, 0.01).unwrap();
        let b = theorem1_bound(0.1, 4, 2, 1.0, &atp, 0.01).unwrap();
        assert!(rel(b, 1.030_666_666_666_666_6) < 1e-12);
        assert_eq!(theorem1_bound(0.1, 0, 0, 1.0, &atp, 0.01).unwrap(), 0.0);
        let b2 = theorem1_bound(0.2, 4, 2, 1.0, &atp, 0.01).unwrap();
        assert!(rel(b2, 2.0 * b) < 1e-15);
    }
}

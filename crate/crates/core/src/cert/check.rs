//! Directed-sampling search for violations of the TP, IP and ATP inequalities.
//!
//! A report with zero violations means only that none was found: the
//! inequalities quantify over all of ℝ^{p+n}. Sampled points are a mixture of
//! basis vectors, k-sparse and dense Gaussian directions; the worst of them are
//! then refined by normalized (sub)gradient steps that push toward violation.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::constants::{AtpConstants, IpConstants, TpConstants};
use crate::error::{Error, Result};
use crate::linalg::{self, l1_norm, sign};

/// Design matrix prepared for certification: `X/√n` and `Σ^{1/2}`.
#[derive(Clone, Debug)]
pub struct CertDesign {
    xn: DMatrix<f64>,
    sigma_half: DMatrix<f64>,
}

impl CertDesign {
    pub fn new(x: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Result<Self> {
        let (n, p) = x.shape();
        if n == 0 || p == 0 {
            return Err(Error::invalid("design must be non-empty"));
        }
        if sigma.shape() != (p, p) {
            return Err(Error::dims("covariance", format!("{p}x{p}"), format!("{}x{}", sigma.nrows(), sigma.ncols())));
        }
        linalg::check_psd(sigma)?;
        Ok(CertDesign {
            xn: x / (n as f64).sqrt(),
            sigma_half: linalg::sym_sqrt(sigma)?,
        })
    }

    pub fn n(&self) -> usize {
        self.xn.nrows()
    }

    pub fn p(&self) -> usize {
        self.xn.ncols()
    }

    /// `X/√n`.
    pub fn scaled_design(&self) -> &DMatrix<f64> {
        &self.xn
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Tp,
    Ip,
    Atp,
    Re,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConstantsUsed {
    Tp(TpConstants),
    Ip(IpConstants),
    Atp(AtpConstants),
    Re { s: usize, c0: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub v: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub property: Property,
    pub constants: ConstantsUsed,
    pub n_samples: usize,
    pub n_violations: usize,
    /// Most negative slack seen (smallest value overall if none is negative).
    pub min_slack: f64,
    pub worst_witness: Option<Witness>,
    /// Always false: sampling can refute an inequality, never certify it.
    pub certified: bool,
}

impl CertReport {
    pub fn violated(&self) -> bool {
        self.n_violations > 0
    }

    /// Merges two reports on the same property and constants.
    pub fn merge(mut self, other: CertReport) -> CertReport {
        self.n_samples += other.n_samples;
        self.n_violations += other.n_violations;
        if other.min_slack < self.min_slack {
            self.min_slack = other.min_slack;
            self.worst_witness = other.worst_witness;
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerSpec {
    /// Supports sizes of the k-sparse Gaussian directions.
    pub sparsity_levels: Vec<usize>,
    pub include_basis: bool,
    /// Number of worst samples refined by local ascent.
    pub refine_starts: usize,
    pub refine_steps: usize,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec {
            sparsity_levels: vec![1, 2, 5],
            include_basis: true,
            refine_starts: 10,
            refine_steps: 50,
        }
    }
}

impl SamplerSpec {
    /// Pure random sampling, no local refinement.
    pub fn without_refinement() -> Self {
        SamplerSpec {
            refine_starts: 0,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    Basis,
    Sparse(usize),
    Dense,
}

fn kinds(spec: &SamplerSpec, dim: usize) -> Vec<Kind> {
    let mut out = Vec::new();
    if spec.include_basis {
        out.push(Kind::Basis);
    }
    out.extend(spec.sparsity_levels.iter().filter(|&&k| k >= 1 && k < dim).map(|&k| Kind::Sparse(k)));
    out.push(Kind::Dense);
    out
}

fn draw<R: Rng + ?Sized>(dim: usize, kind: Kind, rng: &mut R) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    match kind {
        Kind::Basis => {
            let j = rng.random_range(0..dim);
            v[j] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }
        Kind::Sparse(k) => {
            for j in index::sample(rng, dim, k) {
                v[j] = StandardNormal.sample(rng);
            }
        }
        Kind::Dense => {
            for x in v.iter_mut() {
                *x = StandardNormal.sample(rng);
            }
        }
    }
    v
}

fn unit(mut v: DVector<f64>) -> DVector<f64> {
    let norm = v.norm();
    if norm > 0.0 {
        v /= norm;
    }
    v
}

fn sign_vec(v: &DVector<f64>) -> DVector<f64> {
    v.map(sign)
}

fn safe_div(v: DVector<f64>, d: f64) -> DVector<f64> {
    if d > 0.0 {
        v / d
    } else {
        v * 0.0
    }
}

/// `‖Xv/√n‖₂ − a1‖Σ^{1/2}v‖₂ + a2‖v‖₁`.
pub fn tp_slack(design: &CertDesign, consts: &TpConstants, v: &DVector<f64>) -> f64 {
    (&design.xn * v).norm() - consts.a1 * (&design.sigma_half * v).norm() + consts.a2 * l1_norm(v)
}

/// Right-hand side minus `|uᵀXv/√n|`; zero when `v = 0` or `u = 0`.
pub fn ip_slack(design: &CertDesign, consts: &IpConstants, v: &DVector<f64>, u: &DVector<f64>) -> f64 {
    let (lhs, rhs) = ip_sides(design, consts, v, u);
    rhs - lhs
}

fn ip_sides(design: &CertDesign, consts: &IpConstants, v: &DVector<f64>, u: &DVector<f64>) -> (f64, f64) {
    let sv = (&design.sigma_half * v).norm();
    let (u2, u1) = (u.norm(), l1_norm(u));
    let lhs = u.dot(&(&design.xn * v)).abs();
    let rhs = consts.b1 * sv * u2 + consts.b2 * l1_norm(v) * u2 + consts.b3 * sv * u1;
    (lhs, rhs)
}

/// `‖Xv/√n + u‖₂ − c1‖[Σ^{1/2}v; u]‖₂ + c2‖v‖₁ + c3‖u‖₁`.
pub fn atp_slack(design: &CertDesign, consts: &AtpConstants, v: &DVector<f64>, u: &DVector<f64>) -> f64 {
    let w = &design.xn * v + u;
    let joint = ((&design.sigma_half * v).norm_squared() + u.norm_squared()).sqrt();
    w.norm() - consts.c1 * joint + consts.c2 * l1_norm(v) + consts.c3 * l1_norm(u)
}

#[derive(Clone, Debug)]
struct Sample {
    v: DVector<f64>,
    u: Option<DVector<f64>>,
}

impl Sample {
    fn step(&self, dir: &Sample, eta: f64) -> Sample {
        let norm = (dir.v.norm_squared() + dir.u.as_ref().map_or(0.0, |u| u.norm_squared())).sqrt();
        let scale = if norm > 0.0 { eta / norm } else { 0.0 };
        Sample {
            v: &self.v + &dir.v * scale,
            u: self.u.as_ref().zip(dir.u.as_ref()).map(|(u, d)| u + d * scale),
        }
    }

    fn witness(&self) -> Witness {
        Witness {
            v: self.v.as_slice().to_vec(),
            u: self.u.as_ref().map(|u| u.as_slice().to_vec()),
        }
    }
}

trait Inequality {
    fn draw<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Sample;
    fn normalize(&self, s: Sample) -> Sample;
    /// `None` for points excluded from counting (both sides vanish).
    fn slack(&self, s: &Sample) -> Option<f64>;
    /// Direction along which the violation grows.
    fn ascent(&self, s: &Sample) -> Sample;
}

struct Tp<'a> {
    d: &'a CertDesign,
    c: TpConstants,
    kinds: Vec<Kind>,
}

impl Inequality for Tp<'_> {
    fn draw<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Sample {
        Sample {
            v: draw(self.d.p(), self.kinds[i % self.kinds.len()], rng),
            u: None,
        }
    }

    fn normalize(&self, s: Sample) -> Sample {
        Sample { v: unit(s.v), u: None }
    }

    fn slack(&self, s: &Sample) -> Option<f64> {
        (s.v.norm() > 0.0).then(|| tp_slack(self.d, &self.c, &s.v))
    }

    fn ascent(&self, s: &Sample) -> Sample {
        let av = &self.d.xn * &s.v;
        let bv = &self.d.sigma_half * &s.v;
        let grad = safe_div(self.d.xn.tr_mul(&av), av.norm()) - safe_div(self.d.sigma_half.tr_mul(&bv), bv.norm()) * self.c.a1
            + sign_vec(&s.v) * self.c.a2;
        Sample { v: -grad, u: None }
    }
}

struct Ip<'a> {
    d: &'a CertDesign,
    c: IpConstants,
    v_kinds: Vec<Kind>,
    u_kinds: Vec<Kind>,
}

impl Inequality for Ip<'_> {
    fn draw<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Sample {
        let vk = self.v_kinds[i % self.v_kinds.len()];
        let uk = self.u_kinds[(i / self.v_kinds.len()) % self.u_kinds.len()];
        Sample {
            v: draw(self.d.p(), vk, rng),
            u: Some(draw(self.d.n(), uk, rng)),
        }
    }

    fn normalize(&self, s: Sample) -> Sample {
        Sample {
            v: unit(s.v),
            u: s.u.map(unit),
        }
    }

    fn slack(&self, s: &Sample) -> Option<f64> {
        let u = s.u.as_ref()?;
        (s.v.norm() > 0.0 && u.norm() > 0.0).then(|| ip_slack(self.d, &self.c, &s.v, u))
    }

    /// Gradient of the ratio `|uᵀAv| / rhs`.
    fn ascent(&self, s: &Sample) -> Sample {
        let (v, u) = (&s.v, s.u.as_ref().expect("IP samples carry u"));
        let c = &self.c;
        let av = &self.d.xn * v;
        let bv = &self.d.sigma_half * v;
        let sv = bv.norm();
        let (u2, u1, v1) = (u.norm(), l1_norm(u), l1_norm(v));
        let inner = u.dot(&av);
        let lhs = inner.abs();
        let rhs = c.b1 * sv * u2 + c.b2 * v1 * u2 + c.b3 * sv * u1;

        let dl_v = self.d.xn.tr_mul(u) * sign(inner);
        let dl_u = av * sign(inner);
        if rhs <= 0.0 {
            return Sample { v: dl_v, u: Some(dl_u) };
        }
        let dr_v = safe_div(self.d.sigma_half.tr_mul(&bv), sv) * (c.b1 * u2 + c.b3 * u1) + sign_vec(v) * (c.b2 * u2);
        let dr_u = safe_div(u.clone(), u2) * (c.b1 * sv + c.b2 * v1) + sign_vec(u) * (c.b3 * sv);
        let scale = 1.0 / (rhs * rhs);
        Sample {
            v: (dl_v * rhs - dr_v * lhs) * scale,
            u: Some((dl_u * rhs - dr_u * lhs) * scale),
        }
    }
}

struct Atp<'a> {
    d: &'a CertDesign,
    c: AtpConstants,
    v_kinds: Vec<Kind>,
    u_kinds: Vec<Kind>,
}

impl Inequality for Atp<'_> {
    fn draw<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Sample {
        let (p, n) = (self.d.p(), self.d.n());
        let vk = self.v_kinds[(i / 4) % self.v_kinds.len()];
        let uk = self.u_kinds[(i / 4) % self.u_kinds.len()];
        let (v, u) = match i % 4 {
            0 => (draw(p, vk, rng), DVector::zeros(n)),
            1 => (DVector::zeros(p), draw(n, uk, rng)),
            _ => (draw(p, vk, rng), draw(n, uk, rng)),
        };
        Sample { v, u: Some(u) }
    }

    fn normalize(&self, s: Sample) -> Sample {
        let u = s.u.expect("ATP samples carry u");
        let norm = (s.v.norm_squared() + u.norm_squared()).sqrt();
        if norm > 0.0 {
            Sample {
                v: s.v / norm,
                u: Some(u / norm),
            }
        } else {
            Sample { v: s.v, u: Some(u) }
        }
    }

    fn slack(&self, s: &Sample) -> Option<f64> {
        let u = s.u.as_ref()?;
        (s.v.norm() > 0.0 || u.norm() > 0.0).then(|| atp_slack(self.d, &self.c, &s.v, u))
    }

    fn ascent(&self, s: &Sample) -> Sample {
        let (v, u) = (&s.v, s.u.as_ref().expect("ATP samples carry u"));
        let w = &self.d.xn * v + u;
        let wn = w.norm();
        let bv = &self.d.sigma_half * v;
        let joint = (bv.norm_squared() + u.norm_squared()).sqrt();
        let gv = safe_div(self.d.xn.tr_mul(&w), wn) - safe_div(self.d.sigma_half.tr_mul(&bv), joint) * self.c.c1
            + sign_vec(v) * self.c.c2;
        let gu = safe_div(w, wn) - safe_div(u.clone(), joint) * self.c.c1 + sign_vec(u) * self.c.c3;
        Sample { v: -gv, u: Some(-gu) }
    }
}

struct Outcome {
    n_samples: usize,
    n_violations: usize,
    min_slack: f64,
    worst: Option<Sample>,
}

impl Outcome {
    fn record(&mut self, slack: f64, s: &Sample) {
        self.n_samples += 1;
        if slack < 0.0 {
            self.n_violations += 1;
        }
        if slack < self.min_slack {
            self.min_slack = slack;
            self.worst = Some(s.clone());
        }
    }
}

fn search<I: Inequality, R: Rng + ?Sized>(ineq: &I, n_samples: usize, spec: &SamplerSpec, rng: &mut R) -> Outcome {
    let mut out = Outcome {
        n_samples: 0,
        n_violations: 0,
        min_slack: f64::INFINITY,
        worst: None,
    };
    let mut scored: Vec<(f64, Sample)> = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let s = ineq.normalize(ineq.draw(i, rng));
        match ineq.slack(&s) {
            Some(slack) => {
                out.record(slack, &s);
                scored.push((slack, s));
            }
            None => out.n_samples += 1,
        }
    }

    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (start_slack, start) in scored.into_iter().take(spec.refine_starts) {
        let mut best = (start_slack, start.clone());
        let mut cur = start;
        for k in 1..=spec.refine_steps {
            let eta = 0.1 / (k as f64).sqrt();
            cur = ineq.normalize(cur.step(&ineq.ascent(&cur), eta));
            if let Some(slack) = ineq.slack(&cur) {
                if slack < best.0 {
                    best = (slack, cur.clone());
                }
            }
        }
        out.record(best.0, &best.1);
    }
    out
}

fn report(property: Property, constants: ConstantsUsed, out: Outcome) -> CertReport {
    CertReport {
        property,
        constants,
        n_samples: out.n_samples,
        n_violations: out.n_violations,
        min_slack: if out.min_slack.is_finite() { out.min_slack } else { 0.0 },
        worst_witness: out.worst.map(|s| s.witness()),
        certified: false,
    }
}

pub fn check_tp<R: Rng + ?Sized>(
    design: &CertDesign,
    consts: &TpConstants,
    spec: &SamplerSpec,
    n_samples: usize,
    rng: &mut R,
) -> Result<CertReport> {
    require_samples(n_samples)?;
    let ineq = Tp {
        d: design,
        c: *consts,
        kinds: kinds(spec, design.p()),
    };
    Ok(report(Property::Tp, ConstantsUsed::Tp(*consts), search(&ineq, n_samples, spec, rng)))
}

pub fn check_ip<R: Rng + ?Sized>(
    design: &CertDesign,
    consts: &IpConstants,
    spec: &SamplerSpec,
    n_samples: usize,
    rng: &mut R,
) -> Result<CertReport> {
    require_samples(n_samples)?;
    let ineq = Ip {
        d: design,
        c: *consts,
        v_kinds: kinds(spec, design.p()),
        u_kinds: kinds(spec, design.n()),
    };
    Ok(report(Property::Ip, ConstantsUsed::Ip(*consts), search(&ineq, n_samples, spec, rng)))
}

pub fn check_atp<R: Rng + ?Sized>(
    design: &CertDesign,
    consts: &AtpConstants,
    spec: &SamplerSpec,
    n_samples: usize,
    rng: &mut R,
) -> Result<CertReport> {
    require_samples(n_samples)?;
    let ineq = Atp {
        d: design,
        c: *consts,
        v_kinds: kinds(spec, design.p()),
        u_kinds: kinds(spec, design.n()),
    };
    Ok(report(Property::Atp, ConstantsUsed::Atp(*consts), search(&ineq, n_samples, spec, rng)))
}

fn require_samples(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    Ok(())
}

use std::collections::HashMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use auglasso::cert::{
    check_atp, check_ip, check_tp, re_estimate, theorem2_constants, AtpConstants, CertDesign, IpConstants, SamplerSpec,
    TpConstants,
};
use auglasso::{io, make_covariance, rng_from_seed, CovarianceModel, DMatrix};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum PropertyArg {
    Tp,
    Ip,
    Atp,
    Re,
    All,
}

#[derive(clap::Args)]
pub struct Args {
    /// Design matrix CSV (n rows, p columns; an optional header row is skipped).
    #[arg(long)]
    matrix: PathBuf,
    /// identity, ar1:<rho>, equi:<rho> or csv:<path>
    #[arg(long, default_value = "identity")]
    sigma: String,
    #[arg(long, value_enum, default_value_t = PropertyArg::All)]
    property: PropertyArg,
    /// theorem2:<delta> or explicit:a1=..,a2=..,b1=..,b2=..,b3=..,c1=..,c2=..,c3=..
    #[arg(long, default_value = "theorem2:0.1")]
    constants: String,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sparsity for the RE estimate.
    #[arg(long, default_value_t = 1)]
    s: usize,
    /// Cone constant for the RE estimate.
    #[arg(long, default_value_t = 3.0)]
    c0: f64,
    /// Output JSON; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ReReport {
    property: &'static str,
    s: usize,
    c0: f64,
    n_samples: usize,
    /// Smallest ratio seen; an upper bound on the true RE constant.
    kappa_upper: f64,
    heuristic: bool,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Report {
    Cert(auglasso::cert::CertReport),
    Re(ReReport),
}

struct Constants {
    tp: Option<TpConstants>,
    ip: Option<IpConstants>,
    atp: Option<AtpConstants>,
}

fn covariance(spec: &str, p: usize) -> Result<DMatrix<f64>> {
    if let Some(path) = spec.strip_prefix("csv:") {
        return Ok(io::read_matrix_csv(path.as_ref())?);
    }
    let model: CovarianceModel = spec.parse()?;
    Ok(make_covariance(&model, p)?)
}

fn constants(spec: &str, n: usize, p: usize) -> Result<Constants> {
    if let Some(delta) = spec.strip_prefix("theorem2:") {
        let delta: f64 = delta.parse().with_context(|| format!("bad delta in `{spec}`"))?;
        let g = theorem2_constants(n, p, delta)?;
        if g.vacuous {
            log::warn!("constants are vacuous at n = {n}; checks will trivially pass");
        }
        return Ok(Constants {
            tp: Some(g.tp),
            ip: Some(g.ip),
            atp: Some(g.atp),
        });
    }
    let body = spec
        .strip_prefix("explicit:")
        .ok_or_else(|| anyhow!("constants must be theorem2:<delta> or explicit:<key=value,...>, got `{spec}`"))?;
    let mut vals = HashMap::new();
    for kv in body.split(',') {
        let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("expected key=value, got `{kv}`"))?;
        let v: f64 = v.trim().parse().with_context(|| format!("bad value for {k}"))?;
        vals.insert(k.trim().to_owned(), v);
    }
    let get = |k: &str| vals.get(k).copied();
    Ok(Constants {
        tp: match (get("a1"), get("a2")) {
            (Some(a1), Some(a2)) => Some(TpConstants::new(a1, a2)?),
            _ => None,
        },
        ip: match (get("b1"), get("b2"), get("b3")) {
            (Some(b1), Some(b2), Some(b3)) => Some(IpConstants::new(b1, b2, b3)?),
            _ => None,
        },
        atp: match (get("c1"), get("c2"), get("c3")) {
            (Some(c1), Some(c2), Some(c3)) => Some(AtpConstants::new(c1, c2, c3)?),
            _ => None,
        },
    })
}

pub fn run(a: Args) -> Result<()> {
    let x = io::read_matrix_csv(&a.matrix)?;
    let (n, p) = x.shape();
    let sigma = covariance(&a.sigma, p)?;
    let design = CertDesign::new(&x, &sigma)?;
    let consts = constants(&a.constants, n, p)?;
    let spec = SamplerSpec::default();
    let mut rng = rng_from_seed(a.seed);
    let all = a.property == PropertyArg::All;
    let want = |p: PropertyArg| all || a.property == p;
    let missing = |name: &str| anyhow!("no {name} constants given");

    let mut reports = Vec::new();
    if want(PropertyArg::Tp) {
        match &consts.tp {
            Some(c) => reports.push(Report::Cert(check_tp(&design, c, &spec, a.samples, &mut rng)?)),
            None if all => log::warn!("skipping tp: no constants"),
            None => return Err(missing("tp")),
        }
    }
    if want(PropertyArg::Ip) {
        match &consts.ip {
            Some(c) => reports.push(Report::Cert(check_ip(&design, c, &spec, a.samples, &mut rng)?)),
            None if all => log::warn!("skipping ip: no constants"),
            None => return Err(missing("ip")),
        }
    }
    if want(PropertyArg::Atp) {
        match &consts.atp {
            Some(c) => reports.push(Report::Cert(check_atp(&design, c, &spec, a.samples, &mut rng)?)),
            None if all => log::warn!("skipping atp: no constants"),
            None => return Err(missing("atp")),
        }
    }
    if want(PropertyArg::Re) {
        reports.push(Report::Re(ReReport {
            property: "re",
            s: a.s,
            c0: a.c0,
            n_samples: a.samples,
            kappa_upper: re_estimate(&sigma, a.s, a.c0, a.samples, &mut rng)?,
            heuristic: true,
        }));
    }
    if reports.is_empty() {
        bail!("nothing to check");
    }
    if all {
        crate::emit_json(&reports, a.out.as_deref())
    } else {
        crate::emit_json(&reports[0], a.out.as_deref())
    }
}

//! Seeded experiments with uniformly random points.
//!
//! Trial `t` draws its points from stream `t` of the point generator,
//! consuming coordinates point by point. The first `n` points of a trial are
//! therefore the same for every larger `n`, which couples experiments at
//! different sizes: with exact evaluation a trial that succeeds at `n`
//! succeeds at every `n' > n`.

use serde::Serialize;

use crate::bounds::{lemma_k_unb_bound, lemma_unb_bound};
use crate::error::{Error, Result};
use crate::exact;
use crate::geometry::PointSet;
use crate::nets::{build_net_within, net_certifies, ApproximationNet, NetKind, NetParams};
use crate::par;
use crate::rng::{Purpose, Stream};

/// Default memory budget for nets built by experiments: 2 GiB.
pub const DEFAULT_BUDGET_BYTES: u128 = 2 << 30;

/// `n` uniform points of `[0, 1)^d` from stream `stream` of `seed`.
pub fn sample_uniform(n: usize, d: usize, seed: u64, stream: u64) -> Result<PointSet> {
    if d == 0 {
        return Err(Error::InvalidDimension { got: 0, min: 1 });
    }
    let mut s = Stream::new(seed, Purpose::Points, stream);
    let coords = (0..n * d).map(|_| s.unit()).collect();
    PointSet::new(d, coords)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    NetCertify,
    Both,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Method::Exact),
            "net_certify" | "net" => Ok(Method::NetCertify),
            "both" => Ok(Method::Both),
            other => Err(Error::param("method", format!("unknown method '{other}'"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::NetCertify => "net_certify",
            Method::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub n: usize,
    pub success: bool,
    /// Net elements holding at most `k` points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deficient_boxes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub seed: u64,
    pub trials: u64,
    pub n: usize,
    pub k: usize,
    pub method: Method,
    pub successes: u64,
    pub fraction: f64,
    /// `1 - 1/|N|`, reported when `n` reaches the union-bound sample size.
    pub probability_floor: Option<f64>,
    pub net_size: Option<usize>,
    pub records: Vec<TrialRecord>,
}

impl TrialReport {
    fn assemble(
        seed: u64,
        n: usize,
        k: usize,
        method: Method,
        records: Vec<TrialRecord>,
        probability_floor: Option<f64>,
        net_size: Option<usize>,
    ) -> Self {
        let trials = records.len() as u64;
        let successes = records.iter().filter(|r| r.success).count() as u64;
        TrialReport {
            seed,
            trials,
            n,
            k,
            method,
            successes,
            fraction: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            probability_floor,
            net_size,
            records,
        }
    }
}

/// Union-bound sample size for a net of `net_size` elements of volume `delta`
/// (`k = 0` and `k > 0` use different lemmas).
pub fn lemma_sample_size(net_size: usize, delta: f64, k: usize) -> Result<(usize, f64)> {
    let b = if k == 0 {
        lemma_unb_bound(net_size as u64, delta)?
    } else {
        lemma_k_unb_bound(net_size as u64, delta, k)?
    };
    Ok((b.integer_value as usize, b.probability_floor.unwrap_or(0.0)))
}

/// For each trial, draws `n` points and asks whether every element of `net`
/// holds at least `k + 1` of them.
pub fn run_net_experiment_on(net: &ApproximationNet, k: usize, n: usize, trials: u64, seed: u64) -> Result<TrialReport> {
    let d = net.dim();
    let records = par::map_range(trials as usize, |t| -> Result<TrialRecord> {
        let pts = sample_uniform(n, d, seed, t as u64)?;
        let report = net_certifies(net, &pts, k)?;
        Ok(TrialRecord {
            trial: t as u64,
            n,
            success: report.certified,
            deficient_boxes: Some(report.deficient.len()),
            dispersion: None,
            certified: Some(report.certified),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let floor = match lemma_sample_size(net.len(), net.params.delta, k) {
        Ok((needed, floor)) if n >= needed => Some(floor),
        _ => None,
    };
    Ok(TrialReport::assemble(seed, n, k, Method::NetCertify, records, floor, Some(net.len())))
}

/// Builds the cube (or torus) net for `params` within `budget_bytes` and runs
/// [`run_net_experiment_on`].
pub fn run_net_experiment(
    params: &NetParams,
    periodic: bool,
    k: usize,
    n: usize,
    trials: u64,
    seed: u64,
    budget_bytes: u128,
) -> Result<TrialReport> {
    let kind = if periodic { NetKind::Torus } else { NetKind::General };
    let net = build_net_within(params, kind, budget_bytes)?;
    run_net_experiment_on(&net, k, n, trials, seed)
}

/// Configuration of [`run_dispersion_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionExperiment {
    pub d: usize,
    pub eps: f64,
    pub n: usize,
    pub k: usize,
    pub trials: u64,
    pub seed: u64,
    pub method: Method,
    pub periodic: bool,
    pub gamma: Option<f64>,
    pub budget_bytes: u128,
    /// Largest `n` evaluated exactly.
    pub max_exact_n: usize,
    /// Replace the random points by `n` copies of the center of the cube.
    pub midpoint: bool,
}

impl DispersionExperiment {
    pub fn new(d: usize, eps: f64, n: usize) -> Self {
        DispersionExperiment {
            d,
            eps,
            n,
            k: 0,
            trials: 100,
            seed: 0,
            method: Method::Exact,
            periodic: false,
            gamma: None,
            budget_bytes: DEFAULT_BUDGET_BYTES,
            max_exact_n: 400,
            midpoint: false,
        }
    }

    fn points(&self, trial: u64) -> Result<PointSet> {
        if self.midpoint {
            PointSet::new(self.d, vec![0.5; self.n * self.d])
        } else {
            sample_uniform(self.n, self.d, self.seed, trial)
        }
    }
}

/// Per trial, success means the k-dispersion is at most `eps` (exact) or that
/// a net certifies it to be below `eps`. With [`Method::Both`] success is the
/// exact outcome, and a certified trial that fails exactly is an invariant
/// violation.
pub fn run_dispersion_experiment(cfg: &DispersionExperiment) -> Result<TrialReport> {
    if cfg.d == 0 {
        return Err(Error::InvalidDimension { got: 0, min: 1 });
    }
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(Error::param("eps", format!("{} is not in (0, 1)", cfg.eps)));
    }
    let use_exact = cfg.method != Method::NetCertify;
    let use_net = cfg.method != Method::Exact;
    if use_exact && cfg.n > cfg.max_exact_n {
        return Err(Error::InstanceTooLarge {
            reason: format!("exact evaluation of n = {} points (limit {})", cfg.n, cfg.max_exact_n),
        });
    }
    let net = if use_net {
        let params = NetParams::new(cfg.d, cfg.eps, cfg.gamma)?;
        let kind = if cfg.periodic { NetKind::Torus } else { NetKind::General };
        Some(build_net_within(&params, kind, cfg.budget_bytes)?)
    } else {
        None
    };
    let records = par::map_range(cfg.trials as usize, |t| -> Result<TrialRecord> {
        let pts = cfg.points(t as u64)?;
        let dispersion = use_exact.then(|| exact::exact(&pts, cfg.k, cfg.periodic).value);
        let cert = match &net {
            Some(net) => Some(net_certifies(net, &pts, cfg.k)?),
            None => None,
        };
        let certified = cert.as_ref().map(|c| c.certified);
        let exact_ok = dispersion.map(|v| v <= cfg.eps);
        if let (Some(true), Some(false)) = (certified, exact_ok) {
            return Err(Error::Invariant(format!(
                "trial {t}: net certified but exact value {} exceeds {}",
                dispersion.unwrap_or(f64::NAN),
                cfg.eps
            )));
        }
        Ok(TrialRecord {
            trial: t as u64,
            n: cfg.n,
            success: exact_ok.or(certified).unwrap_or(false),
            deficient_boxes: cert.map(|c| c.deficient.len()),
            dispersion,
            certified,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let net_size = net.as_ref().map(|n| n.len());
    let floor = net.as_ref().and_then(|net| match lemma_sample_size(net.len(), net.params.delta, cfg.k) {
        Ok((needed, floor)) if cfg.n >= needed => Some(floor),
        _ => None,
    });
    Ok(TrialReport::assemble(cfg.seed, cfg.n, cfg.k, cfg.method, records, floor, net_size))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseResult {
    /// Smallest `n` whose success fraction reached the target.
    pub n: usize,
    pub target: f64,
    /// Every evaluated `(n, successes, fraction)`, in evaluation order.
    pub trace: Vec<(usize, u64, f64)>,
}

/// Smallest `n` at which the success fraction of [`run_dispersion_experiment`]
/// reaches `target`: doubling until success, then bisection. `base.n` is
/// ignored; the search gives up beyond `cap`.
pub fn empirical_inverse(base: &DispersionExperiment, target: f64, cap: usize) -> Result<InverseResult> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::param("target_fraction", format!("{target} is not in (0, 1)")));
    }
    if cap == 0 {
        return Err(Error::param("cap", "must be at least 1"));
    }
    let mut trace = Vec::new();
    let mut eval = |n: usize| -> Result<bool> {
        let cfg = DispersionExperiment { n, ..base.clone() };
        let r = run_dispersion_experiment(&cfg)?;
        trace.push((n, r.successes, r.fraction));
        Ok(r.fraction >= target)
    };
    let mut lo = 0usize;
    let mut hi = 1usize;
    loop {
        if eval(hi)? {
            break;
        }
        if hi >= cap {
            return Err(Error::SearchCapExceeded {
                cap,
                target,
                trace: trace.iter().map(|&(n, _, f)| (n, f)).collect(),
            });
        }
        lo = hi;
        hi = (hi * 2).min(cap);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if eval(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(InverseResult { n: hi, target, trace })
}

/// `P[X >= x]` for `X ~ Binomial(trials, p)`, summed in log space.
pub fn binomial_tail_ge(trials: u64, p: f64, x: u64) -> f64 {
    if x == 0 {
        return 1.0;
    }
    if x > trials || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    // ln C(trials, j) built incrementally
    let mut ln_choose = 0.0;
    let mut terms = Vec::with_capacity((trials - x + 1) as usize);
    for j in 0..=trials {
        if j > 0 {
            ln_choose += ((trials - j + 1) as f64).ln() - (j as f64).ln();
        }
        if j >= x {
            terms.push(ln_choose + j as f64 * lp + (trials - j) as f64 * lq);
        }
    }
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()).min(0.0).exp()
}

/// Largest failure count still consistent, at level `alpha`, with a per-trial
/// failure probability of at most `p`.
pub fn failure_allowance(trials: u64, p: f64, alpha: f64) -> u64 {
    (0..=trials)
        .find(|&x| binomial_tail_ge(trials, p, x + 1) <= alpha)
        .unwrap_or(trials)
}

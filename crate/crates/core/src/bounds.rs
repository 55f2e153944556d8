//! Closed-form bounds on the inverse of minimal dispersion `N(eps, d)`:
//! the smallest number of points whose dispersion is at most `eps`.
//!
//! Every evaluator returns a [`BoundValue`]. Formulas with an unspecified
//! absolute constant are evaluated with the constant set to 1 and carry
//! `constant_unspecified = true`. Out-of-regime parameters are still
//! evaluated where the formula makes sense, with `valid = false`.

use std::f64::consts::{E, PI};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulaId {
    ThmMain,
    ThmTorus,
    ThmK,
    LemmaUnb,
    LemmaKUnb,
    RzCover,
    ThetaM,
    ThetaCap,
    LowerAhr,
    LowerBc,
    LowerUllrich,
    LowerTrivial,
    LowerHkkrRandom,
    SosnovecLargeEps,
    MackayLargeEps,
    LargeEpsExact,
    BestKnownPiecewise,
}

impl FormulaId {
    pub fn as_str(self) -> &'static str {
        match self {
            FormulaId::ThmMain => "thm_main",
            FormulaId::ThmTorus => "thm_torus",
            FormulaId::ThmK => "thm_k",
            FormulaId::LemmaUnb => "lemma_unb",
            FormulaId::LemmaKUnb => "lemma_k_unb",
            FormulaId::RzCover => "rz_cover",
            FormulaId::ThetaM => "theta_m",
            FormulaId::ThetaCap => "theta_cap",
            FormulaId::LowerAhr => "lower_ahr",
            FormulaId::LowerBc => "lower_bc",
            FormulaId::LowerUllrich => "lower_ullrich",
            FormulaId::LowerTrivial => "lower_trivial",
            FormulaId::LowerHkkrRandom => "lower_hkkr_random",
            FormulaId::SosnovecLargeEps => "sosnovec_large_eps",
            FormulaId::MackayLargeEps => "mackay_large_eps",
            FormulaId::LargeEpsExact => "large_eps_exact",
            FormulaId::BestKnownPiecewise => "best_known_piecewise",
        }
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub formula: FormulaId,
    pub value: f64,
    /// `ceil(value)`: bounds on `N` are point counts.
    pub integer_value: f64,
    /// Parameters lie in the regime where the formula is stated.
    pub valid: bool,
    pub constant_unspecified: bool,
    /// Regime label (1..=4) of the piecewise bound.
    pub regime: Option<u8>,
    /// Success-probability floor of the union-bound lemmas, `1 - 1/|N|`.
    pub probability_floor: Option<f64>,
}

impl BoundValue {
    fn new(formula: FormulaId, value: f64, valid: bool) -> Self {
        BoundValue {
            formula,
            value,
            integer_value: value.ceil(),
            valid,
            constant_unspecified: false,
            regime: None,
            probability_floor: None,
        }
    }

    fn unspecified(mut self) -> Self {
        self.constant_unspecified = true;
        self
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::param("eps", format!("{eps} is not in (0, 1)")))
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d >= 1 {
        Ok(())
    } else {
        Err(Error::InvalidDimension { got: d, min: 1 })
    }
}

fn main_regime(eps: f64, d: usize) -> bool {
    d >= 2 && eps <= 0.5
}

/// `12e (4d lnln(8/eps) + ln(1/eps)) / eps`, for random points in the cube.
pub fn thm_main_bound(eps: f64, d: usize) -> Result<BoundValue> {
    check_eps(eps)?;
    check_dim(d)?;
    let v = 12.0 * E * (4.0 * d as f64 * (8.0 / eps).ln().ln() + (1.0 / eps).ln()) / eps;
    Ok(BoundValue::new(FormulaId::ThmMain, v, main_regime(eps, d)))
}

/// `24e (2d ln(2d) + ln(e/eps)) / eps`, for random points on the torus.
pub fn thm_torus_bound(eps: f64, d: usize) -> Result<BoundValue> {
    check_eps(eps)?;
    check_dim(d)?;
    let df = d as f64;
    let v = 24.0 * E * (2.0 * df * (2.0 * df).ln() + (E / eps).ln()) / eps;
    Ok(BoundValue::new(FormulaId::ThmTorus, v, main_regime(eps, d)))
}

/// `80e (d lnln(8/eps) + k ln(e/eps)) / eps`, for k-dispersion.
pub fn thm_k_bound(eps: f64, d: usize, k: usize) -> Result<BoundValue> {
    check_eps(eps)?;
    check_dim(d)?;
    let v = 80.0 * E * (d as f64 * (8.0 / eps).ln().ln() + k as f64 * (E / eps).ln()) / eps;
    Ok(BoundValue::new(FormulaId::ThmK, v, main_regime(eps, d)))
}

fn check_lemma(net_size: u64, delta: f64) -> Result<()> {
    if net_size < 3 {
        return Err(Error::param("net_size", format!("{net_size} is below 3")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("{delta} is not in (0, 1)")));
    }
    Ok(())
}

/// `3 ln|N| / delta` points hit every member of a delta-approximation `N`
/// with probability at least `1 - 1/|N|`.
pub fn lemma_unb_bound(net_size: u64, delta: f64) -> Result<BoundValue> {
    check_lemma(net_size, delta)?;
    let n = net_size as f64;
    let mut b = BoundValue::new(FormulaId::LemmaUnb, 3.0 * n.ln() / delta, true);
    b.probability_floor = Some(1.0 - 1.0 / n);
    Ok(b)
}

/// `(5/delta)(ln|N| + k ln(e/delta))` points put `k + 1` points in every member.
pub fn lemma_k_unb_bound(net_size: u64, delta: f64, k: usize) -> Result<BoundValue> {
    check_lemma(net_size, delta)?;
    let n = net_size as f64;
    let v = 5.0 / delta * (n.ln() + k as f64 * (E / delta).ln());
    let mut b = BoundValue::new(FormulaId::LemmaKUnb, v, true);
    b.probability_floor = Some(1.0 - 1.0 / n);
    Ok(b)
}

/// `7 m ln m ((1+gamma)/gamma)^m`: translates of `-gamma K` covering a convex body `K`.
pub fn rz_cover_bound(m: usize, gamma: f64) -> Result<BoundValue> {
    if m < 2 {
        return Err(Error::InvalidDimension { got: m, min: 2 });
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", format!("{gamma} is not positive")));
    }
    let mf = m as f64;
    let v = 7.0 * mf * mf.ln() * ((1.0 + gamma) / gamma).powi(m as i32);
    Ok(BoundValue::new(FormulaId::RzCover, v, true))
}

/// Covering density bound: `min over x in (0, 1/m) of (1+x)^m (1 - m ln x)`,
/// with its closed-form cap `m (ln m + lnln m + 5)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaBound {
    pub infimum: BoundValue,
    pub argmin: f64,
    pub cap: BoundValue,
}

fn theta_objective(m: f64, x: f64) -> f64 {
    (1.0 + x).powf(m) * (1.0 - m * x.ln())
}

pub fn theta_m_bound(m: usize) -> Result<ThetaBound> {
    if m < 3 {
        return Err(Error::InvalidDimension { got: m, min: 3 });
    }
    let mf = m as f64;
    let f = |t: f64| theta_objective(mf, t.exp());
    // bracket on a log grid over (1e-12, 1/m), then golden section in ln x
    let (lo, hi) = ((1e-12f64).ln(), (1.0 / mf).ln());
    let steps: usize = 4000;
    let h = (hi - lo) / steps as f64;
    let best = (0..=steps)
        .map(|i| (i, f(lo + i as f64 * h)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut a = lo + best.saturating_sub(1) as f64 * h;
    let mut b = (lo + (best + 1) as f64 * h).min(hi);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    while b - a > 1e-13 {
        if f(c) < f(e) {
            b = e;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        e = a + g * (b - a);
    }
    let t = (0.5 * (a + b)).min(hi);
    let cap = mf * (mf.ln() + mf.ln().ln() + 5.0);
    Ok(ThetaBound {
        infimum: BoundValue::new(FormulaId::ThetaM, f(t), true),
        argmin: t.exp(),
        cap: BoundValue::new(FormulaId::ThetaCap, cap, true),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerVariant {
    /// `log2(d) / (8 eps)` for `eps < 1/4`.
    Ahr,
    /// `d / (e eps)` for `eps <= (4d)^(-d)`.
    Bc,
    /// `d / eps`, torus.
    Ullrich,
    /// `1/eps - 1`.
    Trivial,
    /// `max(c ln(1/eps)/eps, d/(2 eps))` for random points, `c = 1`.
    Hkkr,
}

impl LowerVariant {
    pub const ALL: [LowerVariant; 5] = [
        LowerVariant::Ahr,
        LowerVariant::Bc,
        LowerVariant::Ullrich,
        LowerVariant::Trivial,
        LowerVariant::Hkkr,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ahr" => Ok(LowerVariant::Ahr),
            "bc" => Ok(LowerVariant::Bc),
            "ullrich" => Ok(LowerVariant::Ullrich),
            "trivial" => Ok(LowerVariant::Trivial),
            "hkkr" => Ok(LowerVariant::Hkkr),
            other => Err(Error::param("variant", format!("unknown lower bound '{other}'"))),
        }
    }
}

pub fn lower_bound(eps: f64, d: usize, variant: LowerVariant) -> Result<BoundValue> {
    check_eps(eps)?;
    check_dim(d)?;
    let df = d as f64;
    Ok(match variant {
        LowerVariant::Ahr => BoundValue::new(FormulaId::LowerAhr, df.log2() / (8.0 * eps), eps < 0.25),
        LowerVariant::Bc => {
            let valid = eps.ln() <= -df * (4.0 * df).ln() + 1e-12;
            BoundValue::new(FormulaId::LowerBc, df / (E * eps), valid)
        }
        LowerVariant::Ullrich => BoundValue::new(FormulaId::LowerUllrich, df / eps, true),
        LowerVariant::Trivial => BoundValue::new(FormulaId::LowerTrivial, 1.0 / eps - 1.0, true),
        LowerVariant::Hkkr => {
            let v = ((1.0 / eps).ln() / eps).max(df / (2.0 * eps));
            BoundValue::new(FormulaId::LowerHkkrRandom, v, true).unspecified()
        }
    })
}

/// `1 + 1/(eps - 1/4)` for `eps > 1/4`.
pub fn sosnovec_bound(eps: f64) -> Result<BoundValue> {
    if !(eps > 0.25 && eps < 1.0) {
        return Err(Error::param("eps", format!("{eps} is not in (1/4, 1)")));
    }
    Ok(BoundValue::new(FormulaId::SosnovecLargeEps, 1.0 + 1.0 / (eps - 0.25), true))
}

/// `pi / sqrt(eps - 1/4) - 3` for `eps in (1/4, 1/2)`.
pub fn mackay_bound(eps: f64) -> Result<BoundValue> {
    if !(eps > 0.25 && eps < 1.0) {
        return Err(Error::param("eps", format!("{eps} is not in (1/4, 1)")));
    }
    let v = PI / (eps - 0.25).sqrt() - 3.0;
    Ok(BoundValue::new(FormulaId::MackayLargeEps, v.max(0.0), eps < 0.5))
}

/// Dimension-free bounds for `eps > 1/4`: exactly 1 from `eps >= 1/2` on,
/// otherwise the smaller of the two known bounds.
pub fn large_eps_bounds(eps: f64) -> Result<BoundValue> {
    if !eps.is_finite() || eps <= 0.25 {
        return Err(Error::param("eps", format!("{eps} is not above 1/4")));
    }
    if eps >= 0.5 {
        return Ok(BoundValue::new(FormulaId::LargeEpsExact, 1.0, true));
    }
    let s = sosnovec_bound(eps)?;
    let m = mackay_bound(eps)?;
    Ok(if m.value <= s.value { m } else { s })
}

/// Thresholds of the piecewise bound in log space: `ln t1`, `ln d^(-d)`, `ln d^(-d^2)`.
pub fn regime_thresholds(d: usize) -> Result<(f64, f64, f64)> {
    if d < 2 {
        return Err(Error::InvalidDimension { got: d, min: 2 });
    }
    let df = d as f64;
    let ln_d = df.ln();
    let ln_t1 = 2.0 * ln_d.ln() - ln_d - (2.0 * df).ln().ln().ln();
    Ok((ln_t1, -df * ln_d, -df * df * ln_d))
}

/// Which of the four regimes of the best known upper bound `(eps, d)` falls in.
/// Boundary points belong to the lower-numbered regime.
pub fn best_known_regime(eps: f64, d: usize) -> Result<u8> {
    check_eps(eps)?;
    let (t1, t2, t3) = regime_thresholds(d)?;
    let le = eps.ln();
    Ok(if le >= t1 {
        1
    } else if le >= t2 {
        2
    } else if le >= t3 {
        3
    } else {
        4
    })
}

/// The best known upper bound on `N(eps, d)`, with its regime:
///
/// 1. `C ln d ln(1/eps) / eps^2`
/// 2. `C d lnln(1/eps) / eps`
/// 3. `C ln(1/eps) / eps`
/// 4. `C d^2 ln d / eps`
///
/// Evaluated with `C = 1`. In regime 2 with `eps > 1/e` the formula is
/// negative; the value is clamped to 0 and flagged invalid.
pub fn best_known_upper(eps: f64, d: usize) -> Result<BoundValue> {
    let regime = best_known_regime(eps, d)?;
    let df = d as f64;
    let inv = (1.0 / eps).ln();
    let raw = match regime {
        1 => df.ln() * inv / (eps * eps),
        2 => df * inv.ln() / eps,
        3 => inv / eps,
        _ => df * df * df.ln() / eps,
    };
    let valid = eps <= 0.5 && raw >= 0.0;
    let mut b = BoundValue::new(FormulaId::BestKnownPiecewise, raw.max(0.0), valid).unspecified();
    b.regime = Some(regime);
    Ok(b)
}

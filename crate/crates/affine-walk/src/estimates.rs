//! Closed-form estimate surfaces for `p_n(λ)` and sweeps that measure the
//! ratio `p_n / estimate` against exact or converged oracles.
//!
//! Every estimate is an up-to-constants statement; sweeps report the
//! observed band `[c_min, c_max]` with witnesses.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier_kernel::{density_contour, series_densities, QuadratureConfig};
use crate::phase::LogSumExp;
use crate::radial_dp::RadialChain;
use crate::special_fn::{SphericalF0, WalkParams};

/// Interior/near-boundary split used only for tagging rank-two results.
pub const RANK2_TAG_ETA: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Interior,
    NearBoundary,
    Boundary,
    UpperOnly,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Interior => "interior",
            Regime::NearBoundary => "near-boundary",
            Regime::Boundary => "boundary",
            Regime::UpperOnly => "upper-only",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateValue {
    pub log_value: f64,
    pub regime: Regime,
    /// Log of the polynomial prefactor.
    pub prefactor: f64,
    /// `n log 𝝈` (or `n log σ` for the boundary displays).
    pub spectral: f64,
    /// `-<ρ,λ> log q`.
    pub q_rho: f64,
    /// `n φ(δ)`.
    pub gaussian: f64,
}

impl EstimateValue {
    fn new(regime: Regime, prefactor: f64, spectral: f64, q_rho: f64, gaussian: f64) -> Self {
        EstimateValue {
            log_value: prefactor + spectral + q_rho + gaussian,
            regime,
            prefactor,
            spectral,
            q_rho,
            gaussian,
        }
    }
}

fn len(x: &[i64]) -> i64 {
    x.iter().sum()
}

fn check_dominant(p: &WalkParams, x: &[i64]) -> Result<()> {
    let rs = p.root_system();
    rs.check_len(x)?;
    if !rs.is_dominant(x) {
        return Err(Error::Input(format!("{x:?} is not a dominant weight")));
    }
    Ok(())
}

fn ln_q_rho(p: &WalkParams, x: &[i64]) -> f64 {
    -(p.root_system().two_rho_pairing(x) as f64) / 2.0 * p.qf().ln()
}

/// `φ(δ)` at `δ = (λ+ρ)/(n+r)`.
fn phi(p: &WalkParams, n: u64, x: &[i64]) -> Result<f64> {
    let den = (n + p.rank() as u64) as f64;
    let delta: Vec<f64> = x.iter().map(|&c| (c + 1) as f64 / den).collect();
    Ok(LogSumExp::new(p).solve(&delta)?.phi)
}

/// `x_1 ∨ x_2` and `x_1 ∧ x_2`.
fn order2(x: &[i64]) -> (i64, i64) {
    if x[0] >= x[1] {
        (x[0], x[1])
    } else {
        (x[1], x[0])
    }
}

/// `k log k` with `0 log 0 = 0`.
fn xlogx(k: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * k.ln()
    }
}

/// Rank-two estimate. For `|λ| < n`:
/// `(1+|x|)(1+x_1)(1+x_2) / (n^3 √(n-|x|) √(n-x_1∨x_2)) 𝝈^n q^{-<ρ,λ>} e^{nφ(δ)}`.
/// For `|λ| = n`: `σ^n q^{-n} n^n M^{-M} (m+1)^{-m-1/2}` with `M, m` the
/// larger and smaller coordinate.
pub fn estimate_rank2(p: &WalkParams, n: u64, x: &[i64]) -> Result<EstimateValue> {
    if p.rank() != 2 {
        return Err(Error::Input("estimate_rank2 needs rank two".into()));
    }
    check_dominant(p, x)?;
    let l = len(x);
    let nf = n as f64;
    if l as u64 > n {
        return Err(Error::Domain(format!("|λ| = {l} exceeds n = {n}")));
    }
    if l as u64 == n {
        if n == 0 {
            return Ok(EstimateValue::new(Regime::Boundary, 0.0, 0.0, 0.0, 0.0));
        }
        let (big, small) = order2(x);
        let pre =
            nf * nf.ln() - xlogx(big as f64) - (small as f64 + 0.5) * (small as f64 + 1.0).ln();
        return Ok(EstimateValue::new(
            Regime::Boundary,
            pre,
            nf * p.ln_sigma(),
            -nf * p.qf().ln(),
            0.0,
        ));
    }
    let (big, _) = order2(x);
    let pre = ((1 + l) as f64).ln() + ((1 + x[0]) as f64).ln() + ((1 + x[1]) as f64).ln()
        - 3.0 * nf.ln()
        - 0.5 * (nf - l as f64).ln()
        - 0.5 * (nf - big as f64).ln();
    let regime = if l as f64 <= (1.0 - RANK2_TAG_ETA) * nf {
        Regime::Interior
    } else {
        Regime::NearBoundary
    };
    Ok(EstimateValue::new(
        regime,
        pre,
        nf * p.spectral_radius().ln(),
        ln_q_rho(p, x),
        nf * phi(p, n, x)?,
    ))
}

/// Rank-two variant with `F_0(λ)` in place of its polynomial envelope:
/// `F_0(λ) / (n^3 √(n-|x|) √(n-x_1∨x_2)) 𝝈^n e^{nφ(δ)}`, for `|λ| < n`.
pub fn estimate_rank2_f0(
    p: &WalkParams,
    f0: &SphericalF0,
    n: u64,
    x: &[i64],
) -> Result<EstimateValue> {
    let base = estimate_rank2(p, n, x)?;
    if base.regime == Regime::Boundary {
        return Err(Error::Regime(
            "the F0 variant needs |λ| < n; use the boundary display".into(),
        ));
    }
    let poly = ((1 + len(x)) as f64).ln() + ((1 + x[0]) as f64).ln() + ((1 + x[1]) as f64).ln();
    let ln_f0 = f0.ln_value(x);
    Ok(EstimateValue::new(
        base.regime,
        base.prefactor - poly + ln_f0 - base.q_rho,
        base.spectral,
        base.q_rho,
        base.gaussian,
    ))
}

/// Combinatorial boundary form for `n - m <= |λ| <= n`:
/// `σ^n q^{-n} n^{n+d} x_1^{-x_1} (x_2+1)^{-x_2-d-1/2}` after ordering
/// `x_1 >= x_2`, with `d = n - |x|`.
pub fn estimate_rank2_boundary(p: &WalkParams, n: u64, x: &[i64]) -> Result<EstimateValue> {
    if p.rank() != 2 {
        return Err(Error::Input("boundary form needs rank two".into()));
    }
    check_dominant(p, x)?;
    let (big, small) = order2(x);
    let d = n as i64 - big - small;
    if d < 0 {
        return Err(Error::Domain(format!(
            "|λ| = {} exceeds n = {n}",
            big + small
        )));
    }
    let nf = n as f64;
    let pre = (nf + d as f64) * nf.ln()
        - xlogx(big as f64)
        - (small as f64 + d as f64 + 0.5) * (small as f64 + 1.0).ln();
    Ok(EstimateValue::new(
        Regime::Boundary,
        if n == 0 { 0.0 } else { pre },
        nf * p.ln_sigma(),
        -nf * p.qf().ln(),
        0.0,
    ))
}

/// Rank-one `φ(δ) = -½[(1+δ) log(1+δ) + (1-δ) log(1-δ)]`.
pub fn phi_rank1(delta: f64) -> f64 {
    -0.5 * (xlogx(1.0 + delta) + xlogx(1.0 - delta))
}

/// Tree estimate `(1+k)/(n √(1+n-k)) 𝝈^n q^{-k/2} e^{nφ(δ)}`, `δ = (k+1)/(n+1)`.
/// Zero (log `-∞`) when `k` and `n` have different parities.
pub fn estimate_rank1(p: &WalkParams, n: u64, k: u64) -> Result<EstimateValue> {
    if p.rank() != 1 {
        return Err(Error::Input("estimate_rank1 needs rank one".into()));
    }
    if n == 0 {
        return Err(Error::Input("the tree estimate needs n >= 1".into()));
    }
    if k > n {
        return Err(Error::Domain(format!("|x| = {k} exceeds n = {n}")));
    }
    if !(n - k).is_multiple_of(2) {
        return Ok(EstimateValue {
            log_value: f64::NEG_INFINITY,
            regime: Regime::Interior,
            prefactor: f64::NEG_INFINITY,
            spectral: 0.0,
            q_rho: 0.0,
            gaussian: 0.0,
        });
    }
    let (nf, kf) = (n as f64, k as f64);
    let delta = (kf + 1.0) / (nf + 1.0);
    let pre = (1.0 + kf).ln() - nf.ln() - 0.5 * (1.0 + nf - kf).ln();
    Ok(EstimateValue::new(
        if k == n {
            Regime::Boundary
        } else {
            Regime::Interior
        },
        pre,
        nf * p.spectral_radius().ln(),
        -kf / 2.0 * p.qf().ln(),
        nf * phi_rank1(delta),
    ))
}

/// Rank-`r` two-sided form `n^{-r/2-|R⁺|} 𝝈^n F_0(λ) e^{nφ(δ)}` for `|λ| <= (1-η) n`.
pub fn estimate_rankr(
    p: &WalkParams,
    f0: &SphericalF0,
    n: u64,
    x: &[i64],
    eta: f64,
) -> Result<EstimateValue> {
    check_dominant(p, x)?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Input(format!("η = {eta} must lie in (0,1)")));
    }
    let l = len(x) as f64;
    if l > (1.0 - eta) * n as f64 {
        return Err(Error::Regime(format!(
            "|λ| = {l} exceeds (1-η)n = {}; only upper_bound_rankr applies",
            (1.0 - eta) * n as f64
        )));
    }
    rankr_core(p, f0, n, x, Regime::Interior)
}

fn rankr_core(
    p: &WalkParams,
    f0: &SphericalF0,
    n: u64,
    x: &[i64],
    regime: Regime,
) -> Result<EstimateValue> {
    let rs = p.root_system();
    let nf = n as f64;
    let power = rs.rank() as f64 / 2.0 + rs.num_positive_roots() as f64;
    let q_rho = ln_q_rho(p, x);
    Ok(EstimateValue::new(
        regime,
        -power * nf.ln() + f0.ln_value(x) - q_rho,
        nf * p.spectral_radius().ln(),
        q_rho,
        nf * phi(p, n, x)?,
    ))
}

/// Rank-`r` upper bound: the two-sided form times
/// `e^{n(1-|δ|)} / Π_{α>0} √(1 - <α,δ>)`, for `|λ| < n`.
pub fn upper_bound_rankr(
    p: &WalkParams,
    f0: &SphericalF0,
    n: u64,
    x: &[i64],
) -> Result<EstimateValue> {
    check_dominant(p, x)?;
    let l = len(x);
    if l as u64 >= n {
        return Err(Error::Regime(format!(
            "the upper bound needs |λ| < n, got |λ| = {l}, n = {n}"
        )));
    }
    let mut v = rankr_core(p, f0, n, x, Regime::UpperOnly)?;
    let den = (n + p.rank() as u64) as f64;
    let delta: Vec<f64> = x.iter().map(|&c| (c + 1) as f64 / den).collect();
    let norm: f64 = delta.iter().sum();
    let mut extra = n as f64 * (1.0 - norm);
    for a in p.root_system().positive_roots() {
        let pair: f64 = delta[a.i..a.j].iter().sum();
        extra -= 0.5 * (1.0 - pair).ln();
    }
    v.prefactor += extra;
    v.log_value += extra;
    Ok(v)
}

/// Weighted rank-two walks: `n^{-4} 𝝈^n F_0(λ) e^{nφ(δ)}` for `|λ| <= (1-η)n`,
/// and the upper form `e^{C(n-|x|)} / (n^3 √(n-|x|) √(n-x_1∨x_2)) 𝝈^n F_0 e^{nφ}`
/// beyond it (`|λ| < n`).
pub fn estimate_weighted(
    p: &WalkParams,
    f0: &SphericalF0,
    n: u64,
    x: &[i64],
    eta: f64,
    c: f64,
) -> Result<EstimateValue> {
    if p.rank() != 2 {
        return Err(Error::Input("weighted estimate needs rank two".into()));
    }
    check_dominant(p, x)?;
    let l = len(x);
    let nf = n as f64;
    if l as u64 >= n {
        return Err(Error::Regime(
            "no weighted estimate on the outer shell |λ| = n".into(),
        ));
    }
    if l as f64 <= (1.0 - eta) * nf {
        return rankr_core(p, f0, n, x, Regime::Interior);
    }
    let (big, _) = order2(x);
    let q_rho = ln_q_rho(p, x);
    let pre = c * (nf - l as f64)
        - 3.0 * nf.ln()
        - 0.5 * (nf - l as f64).ln()
        - 0.5 * (nf - big as f64).ln()
        + f0.ln_value(x)
        - q_rho;
    Ok(EstimateValue::new(
        Regime::UpperOnly,
        pre,
        nf * p.spectral_radius().ln(),
        q_rho,
        nf * phi(p, n, x)?,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    /// `2 <= n <= n_max`, all `|λ| <= n`.
    Rank2Full { n_max: u64 },
    /// `2 <= n <= n_max`, `|λ| <= (1-η)n`.
    Rank2Interior { n_max: u64, eta: f64 },
    /// `n - m <= |λ| <= n` against the combinatorial boundary form.
    Rank2Boundary { n_max: u64, m: u64 },
    /// `1 <= n <= n_max`, `k <= n` with matching parity.
    Rank1 { n_max: u64 },
    /// The given `n`, `|λ| <= (1-η)n`, against the two-sided rank-`r` form.
    RankRInterior { ns: Vec<u64>, eta: f64 },
    /// Weighted rank-two walk: interior band and near-boundary slack `C`.
    Weighted { n_max: u64, eta: f64 },
}

impl Region {
    pub fn name(&self) -> &'static str {
        match self {
            Region::Rank2Full { .. } => "rank2-full",
            Region::Rank2Interior { .. } => "rank2-interior",
            Region::Rank2Boundary { .. } => "rank2-boundary",
            Region::Rank1 { .. } => "rank1",
            Region::RankRInterior { .. } => "rankr-interior",
            Region::Weighted { .. } => "weighted",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub x: Vec<i64>,
    pub d: u64,
    pub log_p: f64,
    pub log_estimate: f64,
    pub regime: Regime,
}

impl SweepRow {
    pub fn ratio(&self) -> f64 {
        (self.log_p - self.log_estimate).exp()
    }

    pub fn weight_len(&self) -> i64 {
        len(&self.x)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub n: u64,
    pub x: Vec<i64>,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BandReport {
    pub region: Region,
    pub c_min: f64,
    pub c_max: f64,
    pub witness_min: Option<Witness>,
    pub witness_max: Option<Witness>,
    /// Extra measured constants, such as the weighted slack `C`.
    pub measured: Vec<(String, f64)>,
    #[serde(skip)]
    pub rows: Vec<SweepRow>,
}

impl BandReport {
    fn from_rows(region: Region, rows: Vec<SweepRow>) -> Self {
        let mut r = BandReport {
            region,
            c_min: f64::INFINITY,
            c_max: 0.0,
            witness_min: None,
            witness_max: None,
            measured: Vec::new(),
            rows: Vec::new(),
        };
        for row in &rows {
            if row.regime == Regime::UpperOnly {
                continue;
            }
            let v = row.ratio();
            if v < r.c_min {
                r.c_min = v;
                r.witness_min = Some(Witness {
                    n: row.n,
                    x: row.x.clone(),
                    ratio: v,
                });
            }
            if v > r.c_max {
                r.c_max = v;
                r.witness_max = Some(Witness {
                    n: row.n,
                    x: row.x.clone(),
                    ratio: v,
                });
            }
        }
        r.rows = rows;
        r
    }

    pub fn width(&self) -> f64 {
        self.c_max / self.c_min
    }

    /// Band over the rows with `n <= n_max` only.
    pub fn band_up_to(&self, n_max: u64) -> (f64, f64) {
        self.rows
            .iter()
            .filter(|r| r.n <= n_max && r.regime != Regime::UpperOnly)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
                let v = r.ratio();
                (lo.min(v), hi.max(v))
            })
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Sweeps `region`, comparing oracles (exact DP in ranks one and two,
/// converged Fourier inversion otherwise) with the matching estimate.
pub fn certify_sweep(
    p: &WalkParams,
    region: &Region,
    cfg: &QuadratureConfig,
) -> Result<BandReport> {
    let rows = match region {
        Region::Rank2Full { n_max } => rank2_rows(
            p,
            *n_max,
            |n, l| n >= 2 && l <= n,
            |n, x| estimate_rank2(p, n, x),
        )?,
        Region::Rank2Interior { n_max, eta } => rank2_rows(
            p,
            *n_max,
            |n, l| n >= 2 && (l as f64) <= (1.0 - eta) * n as f64,
            |n, x| estimate_rank2(p, n, x),
        )?,
        Region::Rank2Boundary { n_max, m } => rank2_rows(
            p,
            *n_max,
            |n, l| n >= 2 && l + m >= n && l <= n,
            |n, x| estimate_rank2_boundary(p, n, x),
        )?,
        Region::Rank1 { n_max } => rank1_rows(p, *n_max)?,
        Region::RankRInterior { ns, eta } => rankr_rows(p, ns, *eta, cfg)?,
        Region::Weighted { n_max, eta } => return weighted_sweep(p, *n_max, *eta),
    };
    Ok(BandReport::from_rows(region.clone(), rows))
}

fn rank2_rows<S, E>(p: &WalkParams, n_max: u64, select: S, est: E) -> Result<Vec<SweepRow>>
where
    S: Fn(u64, u64) -> bool,
    E: Fn(u64, &[i64]) -> Result<EstimateValue>,
{
    if p.rank() != 2 {
        return Err(Error::Input(
            "rank-two region on a walk of another rank".into(),
        ));
    }
    let mut chain = RadialChain::new(p, n_max as usize)?;
    let mut rows = Vec::new();
    for n in 1..=n_max {
        chain.step()?;
        for l in 0..=n {
            if !select(n, l) {
                continue;
            }
            for x1 in 0..=l as i64 {
                let x = [x1, l as i64 - x1];
                let e = est(n, &x)?;
                rows.push(SweepRow {
                    n,
                    x: x.to_vec(),
                    d: n - l,
                    log_p: chain.ln_density(&x)?,
                    log_estimate: e.log_value,
                    regime: e.regime,
                });
            }
        }
    }
    Ok(rows)
}

fn rank1_rows(p: &WalkParams, n_max: u64) -> Result<Vec<SweepRow>> {
    if p.rank() != 1 {
        return Err(Error::Input(
            "rank-one region on a walk of another rank".into(),
        ));
    }
    let mut chain = RadialChain::new(p, n_max as usize)?;
    let mut rows = Vec::new();
    for n in 1..=n_max {
        chain.step()?;
        for k in (n % 2..=n).step_by(2) {
            let e = estimate_rank1(p, n, k)?;
            rows.push(SweepRow {
                n,
                x: vec![k as i64],
                d: n - k,
                log_p: chain.ln_density(&[k as i64])?,
                log_estimate: e.log_value,
                regime: e.regime,
            });
        }
    }
    Ok(rows)
}

/// Dominant weights of rank `r` with `|λ| <= max_len`.
pub fn dominant_weights(r: usize, max_len: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; r];
    fn go(j: usize, left: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if j == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[j] = v;
            go(j + 1, left - v, cur, out);
        }
    }
    go(0, max_len, &mut cur, &mut out);
    out
}

fn rankr_rows(
    p: &WalkParams,
    ns: &[u64],
    eta: f64,
    cfg: &QuadratureConfig,
) -> Result<Vec<SweepRow>> {
    let f0 = SphericalF0::new(p.root_system(), p.q());
    let mut rows = Vec::new();
    for &n in ns {
        let max_len = ((1.0 - eta) * n as f64).floor() as i64;
        for x in dominant_weights(p.rank(), max_len) {
            let e = estimate_rankr(p, &f0, n, &x, eta)?;
            let d = density_contour(p, n, &x, cfg)?;
            rows.push(SweepRow {
                n,
                d: n - len(&x) as u64,
                x,
                log_p: d.log_value,
                log_estimate: e.log_value,
                regime: e.regime,
            });
        }
    }
    Ok(rows)
}

/// Largest `p_n / upper_bound_rankr` from the exact series, over `|λ| < n`
/// or over `|λ| <= (1-η)n` when `eta` is given.
pub fn upper_bound_constant(
    p: &WalkParams,
    ns: &[u64],
    eta: Option<f64>,
) -> Result<(f64, Witness)> {
    let f0 = SphericalF0::new(p.root_system(), p.q());
    let mut best = (
        0.0f64,
        Witness {
            n: 0,
            x: Vec::new(),
            ratio: 0.0,
        },
    );
    for &n in ns {
        let table = series_densities(p, n)?;
        let max_len = match eta {
            Some(eta) => ((1.0 - eta) * n as f64).floor() as i64,
            None => n as i64 - 1,
        };
        for x in dominant_weights(p.rank(), max_len) {
            let u = upper_bound_rankr(p, &f0, n, &x)?;
            let v = (table.log_density(&x)?.log_value - u.log_value).exp();
            if v > best.0 {
                best = (v, Witness { n, x, ratio: v });
            }
        }
    }
    Ok(best)
}

/// Weighted walk: band of `p_n / (n^{-4} 𝝈^n F_0 e^{nφ})` over the interior,
/// `K_int` its maximum, and the smallest `C >= 0` with
/// `p_n <= K_int e^{C(n-|x|)} U_0` on the near-boundary cells, where `U_0`
/// is the upper form at `C = 0`.
fn weighted_sweep(p: &WalkParams, n_max: u64, eta: f64) -> Result<BandReport> {
    if p.rank() != 2 {
        return Err(Error::Input("weighted region needs rank two".into()));
    }
    let f0 = SphericalF0::new(p.root_system(), p.q());
    let mut chain = RadialChain::new(p, n_max as usize)?;
    let mut rows = Vec::new();
    for n in 1..=n_max {
        chain.step()?;
        if n < 2 {
            continue;
        }
        for l in 0..n {
            for x1 in 0..=l as i64 {
                let x = [x1, l as i64 - x1];
                let e = estimate_weighted(p, &f0, n, &x, eta, 0.0)?;
                rows.push(SweepRow {
                    n,
                    x: x.to_vec(),
                    d: n - l,
                    log_p: chain.ln_density(&x)?,
                    log_estimate: e.log_value,
                    regime: e.regime,
                });
            }
        }
    }
    let mut report = BandReport::from_rows(Region::Weighted { n_max, eta }, rows);
    let k_int = report.c_max.ln();
    let c = report
        .rows
        .iter()
        .filter(|r| r.regime == Regime::UpperOnly)
        .map(|r| (r.log_p - r.log_estimate - k_int) / r.d as f64)
        .fold(0.0f64, f64::max);
    report.measured.push(("K_int".into(), report.c_max));
    report.measured.push(("C".into(), c));
    Ok(report)
}

/// `n^4 p_n(0) 𝝈^{-n}` in rank two, from the truncated exact chain.
pub fn local_limit_values(p: &WalkParams, ns: &[u64]) -> Result<Vec<(u64, f64)>> {
    if p.rank() != 2 {
        return Err(Error::Input("local limit check is rank two".into()));
    }
    let n_max = ns.iter().copied().max().unwrap_or(0);
    let mut chain = RadialChain::truncated(p, n_max as usize, 0)?;
    let ln_s = p.spectral_radius().ln();
    let mut out = Vec::new();
    for n in 1..=n_max {
        chain.step()?;
        if ns.contains(&n) {
            let v = 4.0 * (n as f64).ln() + chain.ln_density(&[0, 0])? - n as f64 * ln_s;
            out.push((n, v.exp()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigmath::ratio_to_f64;
    use crate::exppoly::rat;
    use crate::radial_dp::density_dp;

    fn a2() -> WalkParams {
        WalkParams::distinguished(2, 2).unwrap()
    }

    #[test]
    fn components_sum() {
        let p = a2();
        for (n, x) in [(10u64, [3, 2]), (10, [6, 4]), (7, [0, 0])] {
            let e = estimate_rank2(&p, n, &x).unwrap();
            let s = e.prefactor + e.spectral + e.q_rho + e.gaussian;
            assert!((s - e.log_value).abs() < 1e-12);
            assert!(e.gaussian <= 0.0);
        }
    }

    #[test]
    fn origin_shape() {
        let p = a2();
        let n = 50u64;
        let e = estimate_rank2(&p, n, &[0, 0]).unwrap();
        assert!((e.prefactor + 4.0 * (n as f64).ln()).abs() < 1e-12);
        assert_eq!(e.q_rho, 0.0);
    }

    #[test]
    fn outer_shell_display() {
        let p = a2();
        let e = estimate_rank2(&p, 3, &[2, 1]).unwrap();
        assert_eq!(e.regime, Regime::Boundary);
        let want = 3.0 * 3f64.ln() - 2.0 * 2f64.ln() - 1.5 * 2f64.ln() + 3.0 * p.ln_sigma()
            - 3.0 * 2f64.ln();
        assert!((e.log_value - want).abs() < 1e-12);
        // the band form at d = 0 is the same display
        let b = estimate_rank2_boundary(&p, 3, &[2, 1]).unwrap();
        assert!((b.log_value - want).abs() < 1e-12);
        assert!(matches!(
            estimate_rank2(&p, 2, &[2, 1]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rank_one() {
        let p = WalkParams::distinguished(1, 2).unwrap();
        assert_eq!(
            estimate_rank1(&p, 3, 2).unwrap().log_value,
            f64::NEG_INFINITY
        );
        assert!((phi_rank1(1.0) + 2f64.ln()).abs() < 1e-15);
        let exact = ratio_to_f64(&density_dp(&p, 3, &[3]).unwrap());
        assert!((exact - 1.0 / 27.0).abs() < 1e-15);
        let est = estimate_rank1(&p, 3, 3).unwrap().log_value.exp();
        assert!(exact / est > 0.5 && exact / est < 2.0);
    }

    #[test]
    fn rank_one_band_stable() {
        let p = WalkParams::distinguished(1, 2).unwrap();
        let cfg = QuadratureConfig::default();
        let r = certify_sweep(&p, &Region::Rank1 { n_max: 400 }, &cfg).unwrap();
        let (lo, hi) = r.band_up_to(200);
        assert!(r.c_min > 0.0 && r.c_max.is_finite());
        assert!(r.width() / (hi / lo) < 1.1);
    }

    #[test]
    fn rankr_regime_and_upper() {
        let p = WalkParams::distinguished(3, 2).unwrap();
        let f0 = SphericalF0::new(p.root_system(), 2);
        assert!(matches!(
            estimate_rankr(&p, &f0, 10, &[4, 3, 1], 0.3),
            Err(Error::Regime(_))
        ));
        let two = estimate_rankr(&p, &f0, 24, &[0, 0, 0], 0.3).unwrap();
        let up = upper_bound_rankr(&p, &f0, 24, &[0, 0, 0]).unwrap();
        assert!(up.log_value > two.log_value);
        let want =
            -(1.5 + 6.0) * 24f64.ln() + 24.0 * p.spectral_radius().ln() + f0.ln_value(&[0, 0, 0]);
        assert!((two.log_value - want - two.gaussian).abs() < 1e-12);
    }

    #[test]
    fn f0_variant_bounded_ratio() {
        let p = a2();
        let f0 = SphericalF0::new(p.root_system(), 2);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for x in dominant_weights(2, 30) {
            let a = estimate_rank2(&p, 40, &x).unwrap().log_value;
            let b = estimate_rank2_f0(&p, &f0, 40, &x).unwrap().log_value;
            lo = lo.min(a - b);
            hi = hi.max(a - b);
        }
        let limit = crate::special_fn::envelope_limit_ratio(p.root_system(), 2);
        assert!(hi - lo < limit.ln(), "{lo} {hi}");
    }

    #[test]
    fn upper_constant_rank_three() {
        let p = WalkParams::distinguished(3, 2).unwrap();
        let (k, w) = upper_bound_constant(&p, &[8, 12], Some(0.3)).unwrap();
        assert!(k > 0.0 && k.is_finite());
        assert!(w.x.iter().sum::<i64>() as f64 <= 0.7 * w.n as f64);
        let (full, _) = upper_bound_constant(&p, &[8, 12], None).unwrap();
        assert!(full >= k);
    }

    #[test]
    fn boundary_band_positive() {
        let p = a2();
        let r = certify_sweep(
            &p,
            &Region::Rank2Boundary { n_max: 60, m: 4 },
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!(r.c_min > 0.0 && r.c_max.is_finite());
    }

    #[test]
    fn weighted_slack_measured() {
        let p = WalkParams::weighted(2, rat(1, 3)).unwrap();
        let r = certify_sweep(
            &p,
            &Region::Weighted {
                n_max: 40,
                eta: 0.3,
            },
            &QuadratureConfig::default(),
        )
        .unwrap();
        let c = r.measured.iter().find(|m| m.0 == "C").unwrap().1;
        assert!(r.c_min > 0.0 && c.is_finite() && c >= 0.0);
        let k = r.c_max;
        for row in r.rows.iter().filter(|row| row.regime == Regime::UpperOnly) {
            let bound = row.log_estimate + c * row.d as f64 + k.ln();
            assert!(row.log_p <= bound + 1e-9);
        }
    }

    #[test]
    fn dominant_weight_enumeration() {
        assert_eq!(dominant_weights(3, 2).len(), 10);
        assert_eq!(dominant_weights(2, 3).len(), 10);
    }
}

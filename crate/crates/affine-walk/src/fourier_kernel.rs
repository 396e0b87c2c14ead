//! Transition densities by Fourier inversion over the torus `𝔞 / 2πQ`.
//!
//! The integration domain is the parallelepiped `θ = 2π Σ_j t_j α_j`,
//! `t ∈ [0,1)^r`, discretized by the periodic trapezoidal rule with
//! successive doubling. Two forms are provided:
//!
//! * the Plancherel form `W_0(q^{-1})/|W_0| · E_t[σ^n h(iθ)^n P_λ(-iθ) |c(iθ)|^{-2}]`;
//! * the contour form `σ^n q^{-<ρ,λ>} E_t[h(z)^n e^{-<λ,z>} / c(z)]` with
//!   `z = s + iθ`, optionally shifted to the stationary point `s(δ)`.
//!
//! [`series_densities`] gives the same quantities exactly, by expanding
//! `h^n / c` as a power series in the `e^{-α}`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bigmath::{ln_ratio, ratio_to_f64};
use crate::error::{Error, Result};
use crate::phase::LogSumExp;
use crate::root_system::RootSystem;
use crate::special_fn::{h_from_exp, w0_at_inv_q, WalkParams};

const CHUNK: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Shift {
    /// Always integrate over `iθ`.
    Off,
    /// Shift when `n >= 20` and `|δ| > 0.2`.
    Auto,
    /// Always shift to `s(δ)`.
    On,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureConfig {
    pub m0: usize,
    pub max_doublings: u32,
    pub tol: f64,
    pub shift: Shift,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            m0: 64,
            max_doublings: 6,
            tol: 1e-8,
            shift: Shift::Auto,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m0 < 16 {
            return Err(Error::Input(format!("m0 = {} is below 16", self.m0)));
        }
        if !(self.tol > 0.0 && self.tol < 1e-2) {
            return Err(Error::Input(format!(
                "tolerance {} is outside (0, 1e-2)",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    Plancherel,
    Contour,
    ShiftedContour,
    Series,
}

#[derive(Clone, Debug, Serialize)]
pub struct LogDensity {
    pub log_value: f64,
    /// Zero when the integral is below the roundoff floor.
    pub sign: i8,
    pub method: Method,
    /// Relative change over the last doubling; the absolute floor when `sign` is zero.
    pub error: f64,
    /// Grid points per dimension at acceptance.
    pub grid: usize,
}

impl LogDensity {
    pub fn value(&self) -> f64 {
        f64::from(self.sign) * self.log_value.exp()
    }
}

/// Pairwise sum; the result depends only on the input order.
fn pairwise<T: Copy + std::ops::Add<Output = T>>(v: &[T], zero: T) -> T {
    match v.len() {
        0 => zero,
        1 => v[0],
        n => pairwise(&v[..n / 2], zero) + pairwise(&v[n / 2..], zero),
    }
}

/// Trapezoidal mean of `f` over `m^r` nodes `t_j = (k_j + off_j)/m`, with
/// the mean of `|f|` alongside.
fn trapezoid<F>(r: usize, m: usize, offsets: &[f64], f: &F) -> (Complex64, f64)
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let total = m.pow(r as u32);
    let chunks = total.div_ceil(CHUNK);
    let parts: Vec<(Complex64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut t = vec![0.0; r];
            let mut acc = Complex64::zero();
            let mut abs = 0.0;
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let mut rem = idx;
                for j in 0..r {
                    t[j] = ((rem % m) as f64 + offsets[j]) / m as f64;
                    rem /= m;
                }
                let v = f(&t);
                acc += v;
                abs += v.norm();
            }
            (acc, abs)
        })
        .collect();
    let sums: Vec<Complex64> = parts.iter().map(|p| p.0).collect();
    let abss: Vec<f64> = parts.iter().map(|p| p.1).collect();
    let n = total as f64;
    (
        pairwise(&sums, Complex64::zero()) / n,
        pairwise(&abss, 0.0) / n,
    )
}

struct Quadrature {
    value: Complex64,
    error: f64,
    /// Roundoff level of the mean, `64 eps` times the mean of `|f|`.
    floor: f64,
    grid: usize,
}

fn integrate<F>(r: usize, cfg: &QuadratureConfig, offsets: &[f64], f: F) -> Result<Quadrature>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    cfg.validate()?;
    let mut m = cfg.m0;
    let (mut prev, _) = trapezoid(r, m, offsets, &f);
    for _ in 0..cfg.max_doublings {
        m *= 2;
        let (cur, l1) = trapezoid(r, m, offsets, &f);
        let diff = (cur - prev).norm();
        let floor = 64.0 * f64::EPSILON * l1;
        if diff <= (cfg.tol * cur.re.abs()).max(floor) {
            return Ok(Quadrature {
                value: cur,
                error: if cur.re != 0.0 {
                    diff / cur.re.abs()
                } else {
                    diff
                },
                floor,
                grid: m,
            });
        }
        prev = cur;
    }
    Err(Error::Numeric(format!(
        "quadrature did not converge at {m} points per axis: last estimates {} and {}",
        prev.re,
        trapezoid(r, m / 2, offsets, &f).0.re
    )))
}

/// Ambient coordinates of `θ = 2π Σ_j t_j α_j`.
pub fn theta_from_t(t: &[f64], out: &mut [f64]) {
    let r = t.len();
    let tau = 2.0 * std::f64::consts::PI;
    for k in 0..=r {
        let cur = if k < r { t[k] } else { 0.0 };
        let prev = if k > 0 { t[k - 1] } else { 0.0 };
        out[k] = tau * (cur - prev);
    }
}

/// `1/c(z) = Π_{α>0} (1 - e^{-<α,z>}) / (1 - q^{-1} e^{-<α,z>})` from `u_k = e^{z_k}`.
fn inv_c(u: &[Complex64], qi: f64) -> Complex64 {
    let mut acc = Complex64::one();
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            let e = u[j] / u[i];
            acc *= (Complex64::one() - e) / (Complex64::one() - e * qi);
        }
    }
    acc
}

fn check_weight(rs: &RootSystem, x: &[i64]) -> Result<()> {
    rs.check_len(x)?;
    if !rs.is_dominant(x) {
        return Err(Error::Input(format!("{x:?} is not a dominant weight")));
    }
    Ok(())
}

fn finish(log_prefix: f64, q: Quadrature, method: Method) -> Result<LogDensity> {
    if q.value.re.abs() <= q.floor {
        return Ok(LogDensity {
            log_value: f64::NEG_INFINITY,
            sign: 0,
            method,
            error: q.floor * log_prefix.exp(),
            grid: q.grid,
        });
    }
    if !(q.value.re > 0.0) {
        return Err(Error::Numeric(format!(
            "converged integral has non-positive real part {:e}; resolution insufficient",
            q.value.re
        )));
    }
    Ok(LogDensity {
        log_value: log_prefix + q.value.re.ln(),
        sign: 1,
        method,
        error: q.error,
        grid: q.grid,
    })
}

/// Generic node offsets `frac(√2 k²)`, away from the walls of the torus.
pub fn generic_offsets(r: usize) -> Vec<f64> {
    (1..=r)
        .map(|k| ((k * k) as f64 * std::f64::consts::SQRT_2).fract())
        .collect()
}

/// `P_λ(-iθ) |c(iθ)|^{-2}` at one node, sharing the pairwise factors
/// `(1 - q^{-1} e^{-(z_a - z_b)}) / (1 - e^{-(z_a - z_b)})` across the Weyl group.
struct PlancherelIntegrand {
    perms: Vec<Vec<usize>>,
    x: Vec<i64>,
    qi: f64,
    scale: f64,
}

impl PlancherelIntegrand {
    fn new(rs: &RootSystem, q: u32, x: &[i64]) -> Self {
        let idx: Vec<usize> = (0..=rs.rank()).collect();
        let perms = rs.weyl_group().iter().map(|w| w.act_slice(&idx)).collect();
        let w0 = ratio_to_f64(&w0_at_inv_q(rs, q));
        let half = rs.two_rho_pairing(x) as f64 / 2.0;
        PlancherelIntegrand {
            perms,
            x: x.to_vec(),
            qi: 1.0 / f64::from(q),
            scale: (-half * f64::from(q).ln()).exp() / w0,
        }
    }

    /// `None` on a wall.
    fn eval(&self, theta: &[f64]) -> Option<Complex64> {
        let d = theta.len();
        let mut f = vec![Complex64::zero(); d * d];
        for a in 0..d {
            for b in 0..d {
                if a != b {
                    // z = -iθ, so e^{-(z_a - z_b)} = e^{i(θ_a - θ_b)}
                    let e = Complex64::from_polar(1.0, theta[a] - theta[b]);
                    let den = Complex64::one() - e;
                    if den.norm() < 1e-300 {
                        return None;
                    }
                    f[a * d + b] = (Complex64::one() - e * self.qi) / den;
                }
            }
        }
        let mut acc = Complex64::zero();
        for w in &self.perms {
            let mut c = Complex64::one();
            for i in 0..d {
                for j in i + 1..d {
                    c *= f[w[i] * d + w[j]];
                }
            }
            // <λ, wz> = Σ_j x_j Σ_{k<=j} (wz)_k
            let mut partial = 0.0;
            let mut pair = 0.0;
            for (j, &xj) in self.x.iter().enumerate() {
                partial -= theta[w[j]];
                pair += xj as f64 * partial;
            }
            acc += c * Complex64::from_polar(1.0, pair);
        }
        let mut c_id = Complex64::one();
        for i in 0..d {
            for j in i + 1..d {
                c_id *= f[i * d + j];
            }
        }
        Some(acc * self.scale / c_id.norm_sqr())
    }
}

/// Plancherel form, evaluated at generic nodes since `P_λ(-iθ)` and
/// `|c(iθ)|^{-2}` have removable singularities on the walls.
pub fn density_plancherel(
    p: &WalkParams,
    n: u64,
    x: &[i64],
    cfg: &QuadratureConfig,
) -> Result<LogDensity> {
    let rs = p.root_system();
    check_weight(rs, x)?;
    let r = rs.rank();
    let weights = p.orbit_weights();
    let sigma = p.sigma();
    let nn = u32::try_from(n).map_err(|_| Error::Input("n too large".into()))?;
    let w0 = ratio_to_f64(&w0_at_inv_q(rs, p.q()));
    let prefactor = w0 / rs.weyl_order() as f64;
    let integrand = PlancherelIntegrand::new(rs, p.q(), x);
    let failures = std::sync::atomic::AtomicUsize::new(0);
    let q = integrate(r, cfg, &generic_offsets(r), |t| {
        let mut th = vec![0.0; r + 1];
        theta_from_t(t, &mut th);
        let u: Vec<Complex64> = th.iter().map(|&a| Complex64::from_polar(1.0, a)).collect();
        let h = h_from_exp(&weights, &u) * sigma;
        match integrand.eval(&th) {
            Some(v) => h.powu(nn) * v,
            None => {
                failures.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                Complex64::zero()
            }
        }
    })?;
    if failures.into_inner() > 0 {
        return Err(Error::Pole(
            "a quadrature node hit a wall of the torus".into(),
        ));
    }
    finish(prefactor.ln(), q, Method::Plancherel)
}

/// `δ = (λ + ρ)/(n + r)` in weight coordinates.
pub fn delta_of(r: usize, n: u64, x: &[i64]) -> Vec<f64> {
    let den = (n + r as u64) as f64;
    x.iter().map(|&c| (c + 1) as f64 / den).collect()
}

/// Whether the contour is shifted for `(n, λ)` under `cfg`.
pub fn uses_shift(r: usize, n: u64, x: &[i64], shift: Shift) -> bool {
    match shift {
        Shift::Off => false,
        Shift::On => true,
        Shift::Auto => n >= 20 && delta_of(r, n, x).iter().sum::<f64>() > 0.2,
    }
}

/// Contour form. On the outer shell `|λ| = n` the point `δ` has norm one
/// and `s(δ)` does not exist; the shift then uses `δ` rescaled to norm
/// `1 - 1/(n+r+1)`. Any real shift gives the same integral.
pub fn density_contour(
    p: &WalkParams,
    n: u64,
    x: &[i64],
    cfg: &QuadratureConfig,
) -> Result<LogDensity> {
    let rs = p.root_system();
    check_weight(rs, x)?;
    let r = rs.rank();
    let nn = u32::try_from(n).map_err(|_| Error::Input("n too large".into()))?;
    let shifted = uses_shift(r, n, x, cfg.shift);
    let lse = LogSumExp::new(p);
    let (y, s, h_s) = if shifted {
        let mut delta = delta_of(r, n, x);
        let norm: f64 = delta.iter().sum();
        let cap = 1.0 - 1.0 / (n + r as u64 + 1) as f64;
        if norm > cap.min(1.0 - 1e-6) {
            let f = cap.min(1.0 - 1e-6) / norm;
            delta.iter_mut().for_each(|d| *d *= f);
        }
        let sol = lse.solve(&delta)?;
        (sol.s_root.clone(), sol.s.clone(), sol.h_s)
    } else {
        (vec![0.0; r], vec![0.0; r + 1], p.h0())
    };
    let weights = p.orbit_weights();
    let qi = 1.0 / p.qf();
    let tau = 2.0 * std::f64::consts::PI;
    let xs: Vec<f64> = x.iter().map(|&c| c as f64).collect();
    let q = integrate(r, cfg, &vec![0.0; r], |t| {
        let mut th = vec![0.0; r + 1];
        theta_from_t(t, &mut th);
        let u: Vec<Complex64> = s
            .iter()
            .zip(&th)
            .map(|(&a, &b)| Complex64::from_polar(a.exp(), b))
            .collect();
        let ratio = h_from_exp(&weights, &u) / h_s;
        let phase: f64 = xs.iter().zip(t).map(|(a, b)| a * b).sum::<f64>() * tau;
        ratio.powu(nn) * Complex64::from_polar(1.0, -phase) * inv_c(&u, qi)
    })?;
    let lam_s: f64 = xs.iter().zip(&y).map(|(a, b)| a * b).sum();
    let log_prefix = n as f64 * (p.ln_sigma() + h_s.ln())
        - rs.two_rho_pairing(x) as f64 / 2.0 * p.qf().ln()
        - lam_s;
    finish(
        log_prefix,
        q,
        if shifted {
            Method::ShiftedContour
        } else {
            Method::Contour
        },
    )
}

/// Exact time-`n` densities from the power series of `h^n / c`.
#[derive(Clone, Debug)]
pub struct SeriesTable {
    p: WalkParams,
    n: u64,
    /// `g(λ)`, with `p_n(λ) = σ^n q^{-<ρ,λ>} g(λ)`.
    g: HashMap<Vec<i64>, BigRational>,
}

impl SeriesTable {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn g(&self, x: &[i64]) -> BigRational {
        self.g.get(x).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Dominant weights with nonzero density.
    pub fn support(&self) -> Vec<Vec<i64>> {
        let mut v: Vec<Vec<i64>> = self
            .g
            .iter()
            .filter(|(_, g)| !g.is_zero())
            .map(|(k, _)| k.clone())
            .collect();
        v.sort();
        v
    }

    pub fn log_density(&self, x: &[i64]) -> Result<LogDensity> {
        let g = self.g(x);
        if !g.is_positive() {
            return Err(Error::Numeric(format!(
                "series coefficient at {x:?} is {g}"
            )));
        }
        let rs = self.p.root_system();
        Ok(LogDensity {
            log_value: self.n as f64 * self.p.ln_sigma()
                - rs.two_rho_pairing(x) as f64 / 2.0 * self.p.qf().ln()
                + ln_ratio(&g),
            sign: 1,
            method: Method::Series,
            error: 0.0,
            grid: 0,
        })
    }

    /// `p_n(λ)` as a rational, when `σ` and `q^{<ρ,λ>}` are rational.
    pub fn exact(&self, x: &[i64]) -> Option<BigRational> {
        let sigma = self.p.sigma_exact()?;
        let two = self.p.root_system().two_rho_pairing(x);
        if two % 2 != 0 {
            return None;
        }
        let qp = BigRational::from_integer(BigInt::from(self.p.q()).pow((two / 2) as u32));
        Some(num_traits::pow(sigma, self.n as usize) * self.g(x) / qp)
    }
}

/// `p_n(λ)` for every dominant `λ` at once.
///
/// With `F = h^n Π_{α>0}(1 - e^{-α})`, `g(λ)` is the coefficient of `e^λ` in
/// `F / Π_{α>0}(1 - q^{-1} e^{-α})`. Each division is the recursion
/// `G(μ) = F(μ) + q^{-1} G(μ+α)`, run on a box in root coordinates; only
/// points above the dominant targets are needed.
pub fn series_densities(p: &WalkParams, n: u64) -> Result<SeriesTable> {
    let rs = p.root_system();
    let r = rs.rank();
    let rp1 = (r + 1) as i64;
    if n > 200 {
        return Err(Error::Resource(format!(
            "series expansion beyond n = 200 (got {n})"
        )));
    }
    // integer h: L h with L the common denominator of the weights
    let w = p.orbit_weights_exact();
    let l = w.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut h_terms: Vec<(Vec<i64>, BigInt)> = Vec::new();
    for (j, c) in w.iter().enumerate() {
        let ci = (c * BigRational::from_integer(l.clone())).to_integer();
        for mu in rs.orbit(&rs.fundamental_weight(j + 1)) {
            h_terms.push((y_coords(rs, &mu), ci.clone()));
        }
    }
    // polynomials keyed by scaled root coordinates Y = (r+1) <λ_j, μ>
    let mut cur: HashMap<Vec<i64>, BigInt> = HashMap::new();
    cur.insert(vec![0; r], BigInt::one());
    for _ in 0..n {
        let mut next: HashMap<Vec<i64>, BigInt> = HashMap::with_capacity(cur.len() * 2);
        for (k, c) in &cur {
            for (d, hc) in &h_terms {
                let key: Vec<i64> = k.iter().zip(d).map(|(a, b)| a + b).collect();
                *next.entry(key).or_insert_with(BigInt::zero) += c * hc;
            }
        }
        cur = next;
    }
    let roots = rs.positive_roots();
    let root_y: Vec<Vec<i64>> = roots
        .iter()
        .map(|a| y_coords(rs, &rs.root_weight_coords(*a)))
        .collect();
    for ay in &root_y {
        let mut next = cur.clone();
        for (k, c) in &cur {
            let key: Vec<i64> = k.iter().zip(ay).map(|(a, b)| a - b).collect();
            *next.entry(key).or_insert_with(BigInt::zero) -= c;
        }
        next.retain(|_, c| !c.is_zero());
        cur = next;
    }

    let top: Vec<i64> = (0..r)
        .map(|j| cur.keys().map(|k| k[j]).max().unwrap_or(0))
        .collect();
    let q = BigInt::from(p.q());
    let mut g = HashMap::new();
    // each coset of Q in P separately; residues of Y mod r+1
    let mut cosets: Vec<Vec<i64>> = cur
        .keys()
        .map(|k| k.iter().map(|v| v.rem_euclid(rp1)).collect())
        .collect();
    cosets.sort();
    cosets.dedup();
    for res in cosets {
        let dims: Vec<usize> = (0..r)
            .map(|j| {
                if top[j] < res[j] {
                    0
                } else {
                    ((top[j] - res[j]) / rp1 + 1) as usize
                }
            })
            .collect();
        if dims.contains(&0) {
            continue;
        }
        let size: usize = dims.iter().product();
        let index = |k: &[usize]| -> usize {
            let mut i = 0;
            for j in (0..r).rev() {
                i = i * dims[j] + k[j];
            }
            i
        };
        let unindex = |mut i: usize| -> Vec<usize> {
            let mut k = vec![0; r];
            for j in 0..r {
                k[j] = i % dims[j];
                i /= dims[j];
            }
            k
        };
        let height = |k: &[usize]| -> i64 { k.iter().sum::<usize>() as i64 };
        let e_top: i64 = dims.iter().map(|d| *d as i64 - 1).sum();
        // T(μ) = q^{E - ht(μ)} G(μ)
        let mut t = vec![BigInt::zero(); size];
        for (key, c) in &cur {
            if key.iter().zip(&res).any(|(a, b)| a.rem_euclid(rp1) != *b)
                || key.iter().any(|&v| v < 0)
            {
                continue;
            }
            let k: Vec<usize> = key
                .iter()
                .zip(&res)
                .map(|(a, b)| ((a - b) / rp1) as usize)
                .collect();
            t[index(&k)] = c * num_traits::pow(q.clone(), (e_top - height(&k)) as usize);
        }
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(height(&unindex(i))));
        for (a, ay) in roots.iter().zip(&root_y) {
            let step: Vec<usize> = ay.iter().map(|v| (*v / rp1) as usize).collect();
            let factor = num_traits::pow(q.clone(), a.height() - 1);
            for &i in &order {
                let k = unindex(i);
                let up: Vec<usize> = k.iter().zip(&step).map(|(a, b)| a + b).collect();
                if up.iter().zip(&dims).any(|(a, d)| a >= d) {
                    continue;
                }
                let add = &t[index(&up)] * &factor;
                t[i] += add;
            }
        }
        for i in 0..size {
            let k = unindex(i);
            let yv: Vec<i64> = k
                .iter()
                .zip(&res)
                .map(|(a, b)| *a as i64 * rp1 + b)
                .collect();
            let x = weight_from_y(&yv, rp1);
            if x.iter().any(|&c| c < 0) || t[i].is_zero() {
                continue;
            }
            let scale = num_traits::pow(q.clone(), (e_top - height(&k)) as usize);
            let ln = num_traits::pow(l.clone(), n as usize);
            g.insert(x, BigRational::new(t[i].clone(), scale * ln));
        }
    }
    Ok(SeriesTable { p: p.clone(), n, g })
}

/// `Y_j = (r+1) <λ_j, μ>`: partial sums of the scaled ambient vector.
fn y_coords(rs: &RootSystem, x: &[i64]) -> Vec<i64> {
    let a = rs.ambient_scaled(x);
    let mut acc = 0;
    (0..rs.rank())
        .map(|j| {
            acc += a[j];
            acc
        })
        .collect()
}

/// Weight coordinates `x_j = <α_j, μ> = (2Y_j - Y_{j-1} - Y_{j+1})/(r+1)`.
fn weight_from_y(y: &[i64], rp1: i64) -> Vec<i64> {
    let r = y.len();
    (0..r)
        .map(|j| {
            let left = if j > 0 { y[j - 1] } else { 0 };
            let right = if j + 1 < r { y[j + 1] } else { 0 };
            let v = 2 * y[j] - left - right;
            debug_assert_eq!(v % rp1, 0);
            v / rp1
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exppoly::rat;
    use crate::radial_dp::density_dp;
    use crate::special_fn::n_lambda;

    fn a2() -> WalkParams {
        WalkParams::distinguished(2, 2).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn normalization() {
        let cfg = QuadratureConfig::default();
        for r in 1..=3 {
            for q in [2, 3] {
                let p = WalkParams::distinguished(r, q).unwrap();
                let zero = vec![0; r];
                let c = density_contour(&p, 0, &zero, &cfg).unwrap();
                assert!(c.log_value.abs() < 1e-10, "r={r} q={q}: {}", c.log_value);
                let pl = density_plancherel(&p, 0, &zero, &cfg).unwrap();
                assert!(pl.log_value.abs() < 1e-7, "r={r} q={q}: {}", pl.log_value);
            }
        }
    }

    #[test]
    fn small_exact_values() {
        let p = a2();
        let cfg = QuadratureConfig::default();
        for (n, x) in [(2u64, [0, 0]), (1, [1, 0])] {
            let want = 1.0 / 14.0;
            assert!((density_plancherel(&p, n, &x, &cfg).unwrap().value() - want).abs() < 1e-8);
            assert!((density_contour(&p, n, &x, &cfg).unwrap().value() - want).abs() < 1e-8);
        }
    }

    #[test]
    fn forms_agree_with_dp() {
        let p = a2();
        let cfg = QuadratureConfig::default();
        for n in [5u64, 10, 20] {
            for x in [[0, 0], [1, 0], [3, 1], [2, 2]] {
                let exact = ratio_to_f64(&density_dp(&p, n as usize, &x).unwrap());
                let c = density_contour(&p, n, &x, &cfg).unwrap().value();
                let pl = density_plancherel(&p, n, &x, &cfg).unwrap().value();
                assert!(rel(c, exact) < 1e-7, "n={n} x={x:?}: {c} vs {exact}");
                assert!(rel(pl, exact) < 1e-7, "n={n} x={x:?}: {pl} vs {exact}");
            }
        }
    }

    #[test]
    fn shifted_contour_far_out() {
        let p = a2();
        let cfg = QuadratureConfig {
            shift: Shift::On,
            ..Default::default()
        };
        for (n, x) in [
            (40u64, [30, 5]),
            (40, [20, 20]),
            (30, [30, 0]),
            (24, [0, 0]),
        ] {
            let exact = ratio_to_f64(&density_dp(&p, n as usize, &x).unwrap());
            let c = density_contour(&p, n, &x, &cfg).unwrap();
            assert_eq!(c.method, Method::ShiftedContour);
            assert!(rel(c.value(), exact) < 1e-7, "n={n} x={x:?}");
        }
    }

    #[test]
    fn diagram_symmetry() {
        let p = WalkParams::distinguished(2, 3).unwrap();
        let cfg = QuadratureConfig::default();
        for (n, x) in [(7u64, [4, 1]), (25, [10, 3])] {
            let a = density_contour(&p, n, &x, &cfg).unwrap().value();
            let b = density_contour(&p, n, &[x[1], x[0]], &cfg).unwrap().value();
            assert!(rel(a, b) < 1e-9);
        }
    }

    #[test]
    fn integrand_is_periodic() {
        let p = WalkParams::distinguished(3, 2).unwrap();
        let rs = p.root_system();
        let w = p.orbit_weights();
        let s: [f64; 4] = [0.4, 0.1, -0.2, -0.3];
        let eval = |t: &[f64]| {
            let mut th = vec![0.0; 4];
            theta_from_t(t, &mut th);
            let u: Vec<Complex64> = s
                .iter()
                .zip(&th)
                .map(|(&a, &b)| Complex64::from_polar(a.exp(), b))
                .collect();
            let phase: f64 = [2.0, 0.0, 1.0]
                .iter()
                .zip(t)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                * std::f64::consts::TAU;
            h_from_exp(&w, &u).powu(5) * Complex64::from_polar(1.0, -phase) * inv_c(&u, 0.5)
        };
        let t = [0.13, 0.71, 0.37];
        let base = eval(&t);
        for j in 0..3 {
            let mut t2 = t;
            t2[j] += 1.0;
            assert!((eval(&t2) - base).norm() < 1e-12 * base.norm().max(1.0));
        }
        assert_eq!(rs.rank(), 3);
    }

    #[test]
    fn series_matches_dp() {
        for p in [
            a2(),
            WalkParams::distinguished(2, 3).unwrap(),
            WalkParams::weighted(2, rat(1, 3)).unwrap(),
        ] {
            for n in [0u64, 1, 2, 5, 9] {
                let s = series_densities(&p, n).unwrap();
                for x1 in 0..=n as i64 {
                    for x2 in 0..=n as i64 - x1 {
                        let x = [x1, x2];
                        assert_eq!(
                            s.exact(&x).unwrap(),
                            density_dp(&p, n as usize, &x).unwrap(),
                            "n={n} x={x:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn series_rank_three_mass() {
        let p = WalkParams::distinguished(3, 2).unwrap();
        let rs = *p.root_system();
        for n in [1u64, 4, 8] {
            let s = series_densities(&p, n).unwrap();
            let total: f64 = s
                .support()
                .iter()
                .map(|x| {
                    let ln_n = crate::bigmath::ln_bigint(&n_lambda(&rs, 2, x));
                    (s.log_density(x).unwrap().log_value + ln_n).exp()
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n}: {total}");
        }
        let s1 = series_densities(&p, 1).unwrap();
        for j in 1..=3 {
            let lj = rs.fundamental_weight(j);
            let want = p.ln_sigma() - rs.two_rho_pairing(&lj) as f64 / 2.0 * 2f64.ln();
            assert!((s1.log_density(&lj).unwrap().log_value - want).abs() < 1e-12);
        }
    }

    #[test]
    fn contour_matches_series_rank_three() {
        let p = WalkParams::distinguished(3, 2).unwrap();
        let cfg = QuadratureConfig {
            m0: 32,
            ..Default::default()
        };
        let s = series_densities(&p, 12).unwrap();
        for x in [[0, 0, 0], [1, 0, 1], [3, 2, 1], [0, 4, 0]] {
            let a = density_contour(&p, 12, &x, &cfg).unwrap().log_value;
            let b = s.log_density(&x).unwrap().log_value;
            assert!((a - b).abs() < 1e-7, "x={x:?}: {a} vs {b}");
        }
    }

    #[test]
    fn node_integrand_matches_macdonald() {
        use crate::special_fn::{macdonald_p, plancherel_density};
        let rs = RootSystem::new(3).unwrap();
        let x = [2, 0, 1];
        let it = PlancherelIntegrand::new(&rs, 3, &x);
        let th = [0.3, -1.1, 2.0, -1.2];
        let z: Vec<Complex64> = th.iter().map(|&a| Complex64::new(0.0, -a)).collect();
        let want = macdonald_p(&rs, 3, &x, &z).unwrap() * plancherel_density(&rs, 3, &th);
        assert!((it.eval(&th).unwrap() - want).norm() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let bad = QuadratureConfig {
            m0: 8,
            ..Default::default()
        };
        assert!(matches!(
            density_contour(&a2(), 1, &[0, 0], &bad),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            density_contour(&a2(), 1, &[0, -1], &QuadratureConfig::default()),
            Err(Error::Input(_))
        ));
    }
}

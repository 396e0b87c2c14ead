//! Special functions of the building: `h`, `Δ`, `b`, `c`, the Plancherel
//! density, Macdonald polynomials, sphere sizes and the spherical function `F_0`.
//!
//! Evaluation points are ambient coordinates (length `r+1`, zero sum).

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bigmath::{ln_bigint, ln_ratio, ratio_to_f64};
use crate::error::{Error, Result};
use crate::exppoly::{rat, ExpPoly};
use crate::root_system::{pair_weight, AmbientVector, RootSystem};

#[derive(Clone, Debug, PartialEq)]
pub enum WalkKind {
    /// `σ Σ_j q^{-<ρ,λ_j>} N_{λ_j} A_{λ_j}`; the simple random walk for `r <= 2`.
    Distinguished,
    /// Rank two, `c_1 A_{λ_1}/N_{λ_1} + c_2 A_{λ_2}/N_{λ_2}` with `c_1 + c_2 = 1`.
    Weighted { c1: BigRational },
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkParams {
    rs: RootSystem,
    q: u32,
    kind: WalkKind,
}

impl WalkParams {
    pub fn distinguished(r: usize, q: u32) -> Result<Self> {
        let rs = RootSystem::new(r)?;
        check_q(q)?;
        Ok(WalkParams {
            rs,
            q,
            kind: WalkKind::Distinguished,
        })
    }

    pub fn weighted(q: u32, c1: BigRational) -> Result<Self> {
        check_q(q)?;
        if !(c1.is_positive() && c1 < BigRational::one()) {
            return Err(Error::Input(format!("c1 must lie in (0,1), got {c1}")));
        }
        Ok(WalkParams {
            rs: RootSystem::new(2)?,
            q,
            kind: WalkKind::Weighted { c1 },
        })
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.rs
    }

    pub fn rank(&self) -> usize {
        self.rs.rank()
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn qf(&self) -> f64 {
        f64::from(self.q)
    }

    pub fn kind(&self) -> &WalkKind {
        &self.kind
    }

    pub fn is_distinguished(&self) -> bool {
        self.kind == WalkKind::Distinguished
    }

    /// Sphere weights `(c_1, c_2)`; the distinguished rank-two walk has `(1/2, 1/2)`.
    pub fn sphere_weights(&self) -> Option<(BigRational, BigRational)> {
        match (&self.kind, self.rank()) {
            (WalkKind::Weighted { c1 }, _) => Some((c1.clone(), BigRational::one() - c1)),
            (WalkKind::Distinguished, 2) => Some((rat(1, 2), rat(1, 2))),
            _ => None,
        }
    }

    /// Weights `w_j` with `h = Σ_j w_j Σ_{μ ∈ W_0.λ_j} e^μ`.
    pub fn orbit_weights_exact(&self) -> Vec<BigRational> {
        match &self.kind {
            WalkKind::Distinguished => vec![BigRational::one(); self.rank()],
            WalkKind::Weighted { c1 } => {
                let two = BigRational::from_integer(2.into());
                vec![&two * c1, &two * (BigRational::one() - c1)]
            }
        }
    }

    pub fn orbit_weights(&self) -> Vec<f64> {
        self.orbit_weights_exact()
            .iter()
            .map(ratio_to_f64)
            .collect()
    }

    /// `h(0)`.
    pub fn h0(&self) -> f64 {
        let r = self.rank();
        self.orbit_weights()
            .iter()
            .enumerate()
            .map(|(j, w)| w * binomial(r + 1, j + 1) as f64)
            .sum()
    }

    /// `log σ`, where `p_n = σ^n (inverse transform of h^n)`.
    pub fn ln_sigma(&self) -> f64 {
        match &self.kind {
            WalkKind::Distinguished => {
                // σ^{-1} = Σ_j N_{λ_j} q^{-<ρ,λ_j>}
                let inv: f64 = (1..=self.rank())
                    .map(|j| {
                        let lj = self.rs.fundamental_weight(j);
                        let n = n_lambda(&self.rs, self.q, &lj);
                        let half = self.rs.two_rho_pairing(&lj) as f64 / 2.0;
                        (ln_bigint(&n) - half * self.qf().ln()).exp()
                    })
                    .sum();
                -inv.ln()
            }
            WalkKind::Weighted { .. } => {
                let q = self.qf();
                (q / (2.0 * (q * q + q + 1.0))).ln()
            }
        }
    }

    pub fn sigma(&self) -> f64 {
        self.ln_sigma().exp()
    }

    /// `σ` as a rational, when it is one (always for even rank).
    pub fn sigma_exact(&self) -> Option<BigRational> {
        let q = BigInt::from(self.q);
        match &self.kind {
            WalkKind::Weighted { .. } => {
                let n = &q * &q + &q + 1;
                Some(BigRational::new(q, 2 * n))
            }
            WalkKind::Distinguished => {
                let mut inv = BigRational::zero();
                for j in 1..=self.rank() {
                    let lj = self.rs.fundamental_weight(j);
                    let two = self.rs.two_rho_pairing(&lj);
                    if two % 2 != 0 {
                        return None;
                    }
                    let n = BigRational::from_integer(n_lambda(&self.rs, self.q, &lj));
                    inv += n / BigRational::from_integer(q.pow((two / 2) as u32));
                }
                Some(inv.recip())
            }
        }
    }

    /// Spectral radius `𝝈 = σ h(0)`.
    pub fn spectral_radius(&self) -> f64 {
        self.sigma() * self.h0()
    }

    pub fn spectral_radius_exact(&self) -> Option<BigRational> {
        let h0: BigRational = self
            .orbit_weights_exact()
            .iter()
            .enumerate()
            .map(|(j, w)| w * BigRational::from_integer(binomial(self.rank() + 1, j + 1).into()))
            .sum();
        self.sigma_exact().map(|s| s * h0)
    }

    /// Probability that one step lands on the sphere of radius `λ_j`.
    pub fn step_sphere_probabilities(&self) -> Vec<f64> {
        match self.sphere_weights() {
            Some((c1, c2)) if self.rank() == 2 => vec![ratio_to_f64(&c1), ratio_to_f64(&c2)],
            _ => {
                let ls = self.ln_sigma();
                (1..=self.rank())
                    .map(|j| {
                        let lj = self.rs.fundamental_weight(j);
                        let n = n_lambda(&self.rs, self.q, &lj);
                        let half = self.rs.two_rho_pairing(&lj) as f64 / 2.0;
                        (ls + ln_bigint(&n) - half * self.qf().ln()).exp()
                    })
                    .collect()
            }
        }
    }
}

fn check_q(q: u32) -> Result<()> {
    if q < 2 {
        return Err(Error::Input(format!("q must be an integer >= 2, got {q}")));
    }
    Ok(())
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

/// Elementary symmetric polynomials `e_0..e_m` of `u`.
pub fn elementary_symmetric(u: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::zero(); u.len() + 1];
    e[0] = Complex64::one();
    for (k, &x) in u.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            let prev = e[j - 1];
            e[j] += prev * x;
        }
    }
    e
}

/// `h(z)` for ambient complex `z`.
///
/// The orbit of `λ_j` pairs with `z` as the `j`-subset sums of ambient
/// coordinates, so `Σ_{W_0.λ_j} e^{<μ,z>} = e_j(e^{z_0}, ..., e^{z_r})`.
pub fn h_eval(p: &WalkParams, z: &[Complex64]) -> Complex64 {
    let u: Vec<Complex64> = z.iter().map(|c| c.exp()).collect();
    h_from_exp(&p.orbit_weights(), &u)
}

/// `h` from the exponentials `u_k = e^{z_k}` of ambient coordinates.
pub fn h_from_exp(weights: &[f64], u: &[Complex64]) -> Complex64 {
    let e = elementary_symmetric(u);
    weights.iter().enumerate().map(|(j, w)| e[j + 1] * *w).sum()
}

pub fn h_real(p: &WalkParams, z: &[f64]) -> f64 {
    let zc: Vec<Complex64> = z.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    h_eval(p, &zc).re
}

/// Weyl denominator `Δ(z) = Π_{α>0} 2 sinh(<α,z>/2)`.
pub fn delta_eval(rs: &RootSystem, z: &[Complex64]) -> Complex64 {
    rs.positive_roots()
        .iter()
        .map(|a| (z[a.i] - z[a.j]) * 0.5)
        .map(|x| x.exp() - (-x).exp())
        .product()
}

/// `b(z) = Π_{α>0} (1 - q^{-1} e^{-<α,z>})`.
pub fn b_eval(rs: &RootSystem, q: u32, z: &[Complex64]) -> Complex64 {
    let qi = 1.0 / f64::from(q);
    rs.positive_roots()
        .iter()
        .map(|a| Complex64::one() - (z[a.j] - z[a.i]).exp() * qi)
        .product()
}

/// Harish-Chandra `c(z) = Π_{α>0} (1 - q^{-1} e^{-<α,z>}) / (1 - e^{-<α,z>})`.
pub fn c_eval(rs: &RootSystem, q: u32, z: &[Complex64]) -> Result<Complex64> {
    let qi = 1.0 / f64::from(q);
    let mut acc = Complex64::one();
    for a in rs.positive_roots() {
        let e = (z[a.j] - z[a.i]).exp();
        let den = Complex64::one() - e;
        if den.norm() < 1e-300 {
            return Err(Error::Pole(format!(
                "c-function on the wall of root e{}-e{}",
                a.i + 1,
                a.j + 1
            )));
        }
        acc *= (Complex64::one() - e * qi) / den;
    }
    Ok(acc)
}

/// Plancherel density `|c(iθ)|^{-2}` for real ambient `θ`, zero on walls.
pub fn plancherel_density(rs: &RootSystem, q: u32, theta: &[f64]) -> f64 {
    let qi = 1.0 / f64::from(q);
    rs.positive_roots()
        .iter()
        .map(|a| {
            let e = Complex64::from_polar(1.0, theta[a.j] - theta[a.i]);
            (Complex64::one() - e).norm_sqr() / (Complex64::one() - e * qi).norm_sqr()
        })
        .product()
}

/// `W_0(q^{-1}) = Σ_w q^{-ℓ(w)}`.
pub fn w0_at_inv_q(rs: &RootSystem, q: u32) -> BigRational {
    rs.poincare(&BigRational::new(BigInt::one(), BigInt::from(q)))
}

/// Sphere cardinality `N_λ = W_0(q^{-1}) / W_λ(q^{-1}) · q^{2<ρ,λ>}`.
pub fn n_lambda(rs: &RootSystem, q: u32, x: &[i64]) -> BigInt {
    let t = BigRational::new(BigInt::one(), BigInt::from(q));
    let ratio = rs.poincare(&t) / rs.stabilizer_poincare(x, &t);
    let v = ratio * BigRational::from_integer(BigInt::from(q).pow(rs.two_rho_pairing(x) as u32));
    debug_assert!(v.is_integer());
    v.to_integer()
}

/// `log N_λ` without forming the integer.
pub fn ln_n_lambda(rs: &RootSystem, q: u32, x: &[i64]) -> f64 {
    let t = 1.0 / f64::from(q);
    let ln_qfact = |m: usize| -> f64 {
        (1..=m)
            .map(|k| ((1.0 - t.powi(k as i32)) / (1.0 - t)).ln())
            .sum()
    };
    let v = rs.ambient_scaled(x);
    let mut stab = 0.0;
    let mut k = 0;
    while k < v.len() {
        let mut m = 1;
        while k + m < v.len() && v[k + m] == v[k] {
            m += 1;
        }
        stab += ln_qfact(m);
        k += m;
    }
    ln_qfact(v.len()) - stab + rs.two_rho_pairing(x) as f64 * f64::from(q).ln()
}

/// Macdonald polynomial `P_λ(z) = W_0(q^{-1})^{-1} q^{-<ρ,λ>} Σ_w c(wz) e^{<λ,wz>}`.
pub fn macdonald_p(rs: &RootSystem, q: u32, x: &[i64], z: &[Complex64]) -> Result<Complex64> {
    rs.check_len(x)?;
    if z.len() != rs.ambient_dim() {
        return Err(Error::Input(
            "evaluation point has the wrong dimension".into(),
        ));
    }
    let mut acc = Complex64::zero();
    for w in rs.weyl_group() {
        let wz = w.act_slice(z);
        acc += c_eval(rs, q, &wz)? * pair_weight(x, &wz).exp();
    }
    let w0 = ratio_to_f64(&w0_at_inv_q(rs, q));
    let half = rs.two_rho_pairing(x) as f64 / 2.0;
    Ok(acc * ((-half * f64::from(q).ln()).exp() / w0))
}

/// Weyl-dimension style evaluation of `F_0(λ) = P_λ(0)`.
///
/// Writing `c = b e^ρ / Δ` turns the `c`-sum into alternating sums. At
/// `z = 0`, `A_μ / A_ρ → π(μ)/π(ρ)`, so with `b = Σ_ν b_ν e^ν`,
/// `F_0(λ) = q^{-<ρ,λ>} W_0(q^{-1})^{-1} Σ_ν b_ν π(λ+ρ+ν)/π(ρ)`.
#[derive(Clone, Debug)]
pub struct SphericalF0 {
    rs: RootSystem,
    q: u32,
    b_terms: Vec<(Vec<i64>, BigRational)>,
    norm: BigRational,
}

impl SphericalF0 {
    pub fn new(rs: &RootSystem, q: u32) -> Self {
        let r = rs.rank();
        let qi = BigRational::new(BigInt::one(), BigInt::from(q));
        let mut b = ExpPoly::one(r);
        for a in rs.positive_roots() {
            let neg: Vec<i64> = rs.root_weight_coords(a).iter().map(|c| -c).collect();
            let f = &ExpPoly::one(r) - &ExpPoly::exp_weight(r, &neg).scale(&qi);
            b = &b * &f;
        }
        let b_terms = b
            .terms()
            .iter()
            .map(|(k, v)| (k.iter().map(|c| c / 2).collect(), v.clone()))
            .collect();
        let pirho = BigRational::from_integer(rs.pi_exact(&rs.rho()));
        let norm = (w0_at_inv_q(rs, q) * pirho).recip();
        SphericalF0 {
            rs: *rs,
            q,
            b_terms,
            norm,
        }
    }

    /// `q^{<ρ,λ>} F_0(λ)`, a rational.
    pub fn polynomial_part(&self, x: &[i64]) -> BigRational {
        let rho = self.rs.rho();
        let mut acc = BigRational::zero();
        let mut mu = vec![0i64; x.len()];
        for (nu, c) in &self.b_terms {
            for k in 0..x.len() {
                mu[k] = x[k] + rho[k] + nu[k];
            }
            let p = self.rs.pi_exact(&mu);
            if !p.is_zero() {
                acc += c * BigRational::from_integer(p);
            }
        }
        acc * &self.norm
    }

    /// `F_0(λ)` as an exact rational when `<ρ,λ>` is an integer.
    pub fn exact(&self, x: &[i64]) -> Option<BigRational> {
        let two = self.rs.two_rho_pairing(x);
        if two % 2 != 0 {
            return None;
        }
        let qpow = BigInt::from(self.q).pow((two / 2) as u32);
        Some(self.polynomial_part(x) / BigRational::from_integer(qpow))
    }

    pub fn ln_value(&self, x: &[i64]) -> f64 {
        let half = self.rs.two_rho_pairing(x) as f64 / 2.0;
        ln_ratio(&self.polynomial_part(x)) - half * f64::from(self.q).ln()
    }

    pub fn value(&self, x: &[i64]) -> f64 {
        self.ln_value(x).exp()
    }
}

/// `F_0(λ)`.
pub fn f0(rs: &RootSystem, q: u32, x: &[i64]) -> f64 {
    SphericalF0::new(rs, q).value(x)
}

/// Envelope `q^{-<ρ,λ>} Π_{α>0} (1 + <α,λ>)` in log form.
pub fn ln_f0_envelope(rs: &RootSystem, q: u32, x: &[i64]) -> f64 {
    let poly: f64 = rs
        .positive_roots()
        .iter()
        .map(|a| (1.0 + a.pair(x) as f64).ln())
        .sum();
    poly - rs.two_rho_pairing(x) as f64 / 2.0 * f64::from(q).ln()
}

pub fn f0_envelope(rs: &RootSystem, q: u32, x: &[i64]) -> f64 {
    ln_f0_envelope(rs, q, x).exp()
}

/// Limit of `envelope / F_0` deep inside the chamber:
/// `W_0(q^{-1}) π(ρ) / Π_{α>0}(1 - q^{-1})`. At `λ = 0` the ratio is one.
pub fn envelope_limit_ratio(rs: &RootSystem, q: u32) -> f64 {
    let qi = 1.0 / f64::from(q);
    let b1 = (1.0 - qi).powi(rs.num_positive_roots() as i32);
    let pi_rho: f64 = rs.pi_f64(&vec![1.0; rs.rank()]);
    ratio_to_f64(&w0_at_inv_q(rs, q)) * pi_rho / b1
}

/// Accept when successive extrapolants agree to this relative tolerance.
pub const RICHARDSON_ACCEPT: f64 = 1e-8;
/// Fail when the best extrapolants still spread more than this.
pub const RICHARDSON_REJECT: f64 = 1e-6;

/// `F_0(λ)` by Richardson extrapolation of `P_λ(εu)` as `ε → 0`,
/// with `u = ρ + 0.318 λ_1` and `ε = 10^{-2} 2^{-k}`.
#[allow(clippy::approx_constant)]
pub fn f0_richardson(rs: &RootSystem, q: u32, x: &[i64]) -> Result<f64> {
    let mut u: Vec<f64> = rs.rho().iter().map(|&c| c as f64).collect();
    u[0] += 0.318;
    let dir = AmbientVector::from_weight_coords(rs, &u);
    let eval = |eps: f64| -> Result<f64> {
        let z: Vec<Complex64> = dir
            .coords
            .iter()
            .map(|c| Complex64::new(c * eps, 0.0))
            .collect();
        Ok(macdonald_p(rs, q, x, &z)?.re)
    };
    const LEVELS: usize = 7;
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(LEVELS);
    let mut best: Option<(f64, f64)> = None;
    for k in 0..LEVELS {
        let eps = 1e-2 / f64::from(1u32 << k);
        let mut row = vec![eval(eps)?];
        for j in 1..=k {
            let f = f64::from(1u32 << j);
            let v = row[j - 1] + (row[j - 1] - table[k - 1][j - 1]) / (f - 1.0);
            row.push(v);
        }
        if k > 0 {
            let prev = table[k - 1][k - 1];
            let cur = row[k];
            let spread = (cur - prev).abs() / cur.abs().max(f64::MIN_POSITIVE);
            if spread <= RICHARDSON_ACCEPT {
                return Ok(cur);
            }
            if best.is_none_or(|(s, _)| spread < s) {
                best = Some((spread, cur));
            }
        }
        table.push(row);
    }
    match best {
        Some((s, v)) if s <= RICHARDSON_REJECT => Ok(v),
        Some((s, _)) => Err(Error::Numeric(format!(
            "F0 extrapolation did not settle, relative spread {s:.3e}"
        ))),
        None => Err(Error::Numeric(
            "F0 extrapolation produced no estimate".into(),
        )),
    }
}

/// `q^{-<ρ,λ>}` in log form.
pub fn ln_q_rho(rs: &RootSystem, q: u32, x: &[i64]) -> f64 {
    -(rs.two_rho_pairing(x) as f64) / 2.0 * f64::from(q).ln()
}

/// `|x|` as `f64`, for prefactors.
pub fn length_f64(x: &[i64]) -> f64 {
    x.iter().map(|&c| c.to_f64().unwrap_or(f64::NAN)).sum()
}

//! Real phase `Φ_δ(z) = log(h(z)/h(0)) - <δ,z>`, its minimiser `s(δ)`, the
//! minimum `φ(δ)`, and the Hessian form `B`.
//!
//! Points of `𝔞` are handled in root coordinates `y_j = <λ_j, z>`, so that
//! `<μ, z> = Σ_j μ_j y_j` for `μ` in weight coordinates. Then `log h` is a
//! log-sum-exp, its gradient is the mean of `μ` under the Gibbs weights and
//! its Hessian is their covariance.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::root_system::AmbientVector;
use crate::special_fn::{h_eval, WalkParams};

/// Largest `|δ|` the solver accepts.
pub const MAX_DELTA_NORM: f64 = 1.0 - 1e-8;
pub const MAX_NEWTON_STEPS: usize = 200;
pub const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct PhaseProblem {
    params: WalkParams,
    /// `δ_j = <α_j, δ>`.
    delta: Vec<f64>,
}

impl PhaseProblem {
    pub fn new(params: &WalkParams, delta: &[f64]) -> Result<Self> {
        let r = params.rank();
        if delta.len() != r {
            return Err(Error::Input(format!("δ needs {r} coordinates")));
        }
        if delta.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::Domain(
                "δ must lie in the closed positive chamber".into(),
            ));
        }
        let norm: f64 = delta.iter().sum();
        if norm >= 1.0 {
            return Err(Error::Domain(format!("|δ| = {norm} must be below 1")));
        }
        if norm > MAX_DELTA_NORM {
            return Err(Error::Domain(format!(
                "|δ| = {norm} is too close to 1 for the stationary point to be resolved"
            )));
        }
        Ok(PhaseProblem {
            params: params.clone(),
            delta: delta.to_vec(),
        })
    }

    /// `δ = (λ + ρ)/(n + r)`.
    pub fn from_lattice(params: &WalkParams, n: u64, x: &[i64]) -> Result<Self> {
        params.root_system().check_len(x)?;
        let den = (n + params.rank() as u64) as f64;
        let delta: Vec<f64> = x.iter().map(|&c| (c + 1) as f64 / den).collect();
        Self::new(params, &delta)
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn delta_norm(&self) -> f64 {
        self.delta.iter().sum()
    }

    pub fn params(&self) -> &WalkParams {
        &self.params
    }

    pub fn solve(&self) -> Result<PhaseSolution> {
        LogSumExp::new(&self.params).solve(&self.delta)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseSolution {
    /// Ambient coordinates of `s`.
    pub s: Vec<f64>,
    /// `s^j = <λ_j, s>`.
    pub s_root: Vec<f64>,
    /// `s_j = <α_j, s>`.
    pub s_weight: Vec<f64>,
    pub phi: f64,
    pub grad_residual: f64,
    /// `h(s)`.
    pub h_s: f64,
    /// `B = -d²Ψ(0)` acting on root coordinates `θ^j`, row-major.
    pub b: Vec<Vec<f64>>,
    pub iterations: usize,
}

impl PhaseSolution {
    pub fn ambient(&self) -> AmbientVector {
        AmbientVector {
            coords: self.s.clone(),
        }
    }

    pub fn b_matrix(&self) -> DMatrix<f64> {
        let r = self.b.len();
        DMatrix::from_fn(r, r, |i, j| self.b[i][j])
    }

    /// `B(θ,θ)` for `θ` in root coordinates.
    pub fn b_form(&self, theta_root: &[f64]) -> f64 {
        quad_form(&self.b, theta_root)
    }
}

fn quad_form(b: &[Vec<f64>], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..v.len() {
        for j in 0..v.len() {
            acc += b[i][j] * v[i] * v[j];
        }
    }
    acc
}

/// `log h(y) = log Σ_t e^{<μ_t, y> + ℓ_t}` over orbit points `μ_t` with log weights `ℓ_t`.
#[derive(Clone, Debug)]
pub struct LogSumExp {
    rank: usize,
    points: Vec<Vec<f64>>,
    log_weights: Vec<f64>,
    ln_h0: f64,
    params: WalkParams,
}

struct Moments {
    ln_h: f64,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

impl LogSumExp {
    pub fn new(params: &WalkParams) -> Self {
        let rs = params.root_system();
        let mut points = Vec::new();
        let mut log_weights = Vec::new();
        for (j, w) in params.orbit_weights().iter().enumerate() {
            for mu in rs.orbit(&rs.fundamental_weight(j + 1)) {
                points.push(mu.iter().map(|&c| c as f64).collect());
                log_weights.push(w.ln());
            }
        }
        LogSumExp {
            rank: rs.rank(),
            points,
            log_weights,
            ln_h0: params.h0().ln(),
            params: params.clone(),
        }
    }

    fn moments(&self, y: &[f64], second: bool) -> Moments {
        let r = self.rank;
        let expo: Vec<f64> = self
            .points
            .iter()
            .zip(&self.log_weights)
            .map(|(mu, lw)| mu.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() + lw)
            .collect();
        let top = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = expo.iter().map(|e| (e - top).exp()).collect();
        let z: f64 = w.iter().sum();
        let mut mean = vec![0.0; r];
        for (mu, wt) in self.points.iter().zip(&w) {
            for k in 0..r {
                mean[k] += wt * mu[k];
            }
        }
        for m in &mut mean {
            *m /= z;
        }
        let mut cov = vec![vec![0.0; r]; r];
        if second {
            for (mu, wt) in self.points.iter().zip(&w) {
                for a in 0..r {
                    let da = mu[a] - mean[a];
                    for b in 0..r {
                        cov[a][b] += wt * da * (mu[b] - mean[b]);
                    }
                }
            }
            for row in &mut cov {
                for c in row.iter_mut() {
                    *c /= z;
                }
            }
        }
        Moments {
            ln_h: top + z.ln(),
            mean,
            cov,
        }
    }

    /// `Φ_δ(y)`.
    pub fn phi_at(&self, delta: &[f64], y: &[f64]) -> f64 {
        let m = self.moments(y, false);
        m.ln_h - self.ln_h0 - dot(delta, y)
    }

    /// Newton's method with Armijo backtracking. `δ` need not be dominant.
    pub fn solve(&self, delta: &[f64]) -> Result<PhaseSolution> {
        let r = self.rank;
        let norm: f64 = delta.iter().sum();
        let warm = if norm > 0.0 && norm < 1.0 {
            ((1.0 + norm) / (1.0 - norm)).ln() / r as f64
        } else {
            0.0
        };
        // ρ in root coordinates: <λ_j, ρ> = j (r+1-j) / 2
        let mut y: Vec<f64> = (1..=r)
            .map(|j| warm * (j * (r + 1 - j)) as f64 / 2.0)
            .collect();
        if delta.iter().any(|d| *d < 0.0) {
            y.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut f = self.phi_at(delta, &y);
        let mut iterations = 0;
        loop {
            let m = self.moments(&y, true);
            let g: Vec<f64> = m.mean.iter().zip(delta).map(|(a, b)| a - b).collect();
            let gnorm = g.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            if gnorm <= 1e-14 || iterations >= MAX_NEWTON_STEPS {
                if gnorm > RESIDUAL_TOL {
                    return Err(Error::Numeric(format!(
                        "Newton stopped after {iterations} steps with residual {gnorm:.3e}"
                    )));
                }
                return Ok(self.finish(delta, &y, iterations));
            }
            iterations += 1;
            let hess = DMatrix::from_fn(r, r, |i, j| m.cov[i][j]);
            let gv = DVector::from_vec(g.clone());
            let step = match hess.cholesky() {
                Some(ch) => -ch.solve(&gv),
                None => -gv.clone(),
            };
            let slope = gv.dot(&step);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = y.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
                let ft = self.phi_at(delta, &trial);
                if ft <= f + 1e-4 * t * slope || (ft - f).abs() <= 1e-15 * f.abs().max(1.0) {
                    y = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                if gnorm <= RESIDUAL_TOL {
                    return Ok(self.finish(delta, &y, iterations));
                }
                return Err(Error::Numeric(format!(
                    "line search stalled with residual {gnorm:.3e}"
                )));
            }
        }
    }

    fn finish(&self, delta: &[f64], y: &[f64], iterations: usize) -> PhaseSolution {
        let rs = self.params.root_system();
        let m = self.moments(y, true);
        let residual = m
            .mean
            .iter()
            .zip(delta)
            .fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
        let amb = AmbientVector::from_root_coords(rs, y);
        PhaseSolution {
            s_weight: amb.weight_coords(),
            s: amb.coords,
            s_root: y.to_vec(),
            phi: m.ln_h - self.ln_h0 - dot(delta, y),
            grad_residual: residual,
            h_s: m.ln_h.exp(),
            b: m.cov,
            iterations,
        }
    }

    /// `B` at an arbitrary point given in root coordinates.
    pub fn hessian(&self, y: &[f64]) -> Vec<Vec<f64>> {
        self.moments(y, true).cov
    }

    /// `∇ log h` at `y`, in weight coordinates.
    pub fn log_gradient(&self, y: &[f64]) -> Vec<f64> {
        self.moments(y, false).mean
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximum deviation of a central finite difference of `φ` from `-s`.
pub fn dphi_check(prob: &PhaseProblem) -> Result<f64> {
    const STEP: f64 = 1e-5;
    let lse = LogSumExp::new(&prob.params);
    let sol = lse.solve(&prob.delta)?;
    let mut worst = 0.0f64;
    for j in 0..prob.delta.len() {
        let mut up = prob.delta.clone();
        let mut dn = prob.delta.clone();
        up[j] += STEP;
        dn[j] -= STEP;
        let fd = (lse.solve(&up)?.phi - lse.solve(&dn)?.phi) / (2.0 * STEP);
        worst = worst.max((fd + sol.s_root[j]).abs());
    }
    Ok(worst)
}

/// `B` at the point `s` (ambient coordinates).
pub fn hessian_b(params: &WalkParams, s: &AmbientVector) -> Vec<Vec<f64>> {
    LogSumExp::new(params).hessian(&s.root_coords())
}

/// Min and max over `θ` on the unit circle (root coordinates) of
/// `B(θ,θ) / [e^{-(a-b)} (θ^1-θ^2)^2 + e^{-b} (θ^1+θ^2)^2]` with
/// `a = s^1 ∨ s^2`, `b = s^1 ∧ s^2`.
pub fn lemma36_band(params: &WalkParams, s: &AmbientVector) -> (f64, f64) {
    let y = s.root_coords();
    let b = LogSumExp::new(params).hessian(&y);
    let (hi, lo) = if y[0] >= y[1] {
        (y[0], y[1])
    } else {
        (y[1], y[0])
    };
    let (mut mn, mut mx) = (f64::INFINITY, 0.0f64);
    for k in 0..360 {
        let t = k as f64 * std::f64::consts::PI / 180.0;
        let th = [t.cos(), t.sin()];
        let model =
            (-(hi - lo)).exp() * (th[0] - th[1]).powi(2) + (-lo).exp() * (th[0] + th[1]).powi(2);
        let v = quad_form(&b, &th) / model;
        mn = mn.min(v);
        mx = mx.max(v);
    }
    (mn, mx)
}

/// One diagnostic: a pass flag, measured constants and an optional witness.
#[derive(Clone, Debug, Serialize)]
pub struct Diagnostic {
    pub name: String,
    pub passed: bool,
    pub measured: Vec<(String, f64)>,
    pub witness: Option<String>,
}

impl Diagnostic {
    fn new(name: &str) -> Self {
        Diagnostic {
            name: name.into(),
            passed: true,
            measured: Vec::new(),
            witness: None,
        }
    }

    fn fail(&mut self, w: String) {
        if self.passed {
            self.witness = Some(w);
        }
        self.passed = false;
    }

    fn measure(&mut self, k: &str, v: f64) {
        self.measured.push((k.into(), v));
    }
}

/// Deterministic `δ` grid of the closed rank-two simplex, walls included.
pub fn delta_grid_rank2(steps: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for a in 0..steps {
        for b in 0..steps - a {
            let d = [a as f64 / steps as f64, b as f64 / steps as f64];
            if d[0] + d[1] < 1.0 {
                out.push(d);
            }
        }
    }
    out
}

/// Random points of the open simplex `{δ_j > 0, |δ| < bound}`.
pub fn random_deltas(r: usize, count: usize, bound: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            // uniform on the simplex via sorted uniforms
            let mut cuts: Vec<f64> = (0..r).map(|_| rng.gen::<f64>()).collect();
            cuts.push(0.0);
            cuts.push(1.0);
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let scale = bound * rng.gen::<f64>().powf(1.0 / r as f64);
            (0..r).map(|k| (cuts[k + 1] - cuts[k]) * scale).collect()
        })
        .collect()
}

/// Checks (d), (e), (f), (g) of the rank-two shift lemma over a `δ` grid and random samples.
pub fn lemma34_diagnostics(params: &WalkParams, seed: u64) -> Result<Vec<Diagnostic>> {
    if params.rank() != 2 {
        return Err(Error::Unsupported(
            "the shift lemma diagnostics are rank two".into(),
        ));
    }
    let lse = LogSumExp::new(params);
    let mut deltas: Vec<Vec<f64>> = delta_grid_rank2(40).iter().map(|d| d.to_vec()).collect();
    deltas.extend(random_deltas(2, 200, 0.999, seed));
    for k in 1..=6 {
        let e = 10f64.powi(-k);
        deltas.push(vec![(1.0 - e) * 0.7, (1.0 - e) * 0.3]);
        deltas.push(vec![(1.0 - e) * 0.5, (1.0 - e) * 0.5]);
        deltas.push(vec![1.0 - e, 0.0]);
    }

    let mut d = Diagnostic::new("vanishing coordinates (d)");
    let mut e = Diagnostic::new("1-|δ| vs exp(-(s^1 ∧ s^2)) band (e)");
    let mut f = Diagnostic::new("1-δ1∨δ2 vs exp(-|s^1-s^2|) band (f)");
    let mut g = Diagnostic::new("sign of δ1-δ2 vs s1-s2 (g)");
    let (mut emin, mut emax, mut fmin, mut fmax) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
    for delta in &deltas {
        let sol = lse.solve(delta)?;
        for j in 0..2 {
            let dz = delta[j] == 0.0;
            let sz = sol.s_weight[j].abs() < 1e-9;
            if dz != sz {
                d.fail(format!("δ={delta:?}, s_j={:?}", sol.s_weight));
            }
        }
        let norm = delta[0] + delta[1];
        let ve = (1.0 - norm) * sol.s_root[0].min(sol.s_root[1]).exp();
        emin = emin.min(ve);
        emax = emax.max(ve);
        let dm = delta[0].max(delta[1]);
        if dm > 0.0 {
            let vf = (-(sol.s_root[0] - sol.s_root[1]).abs()).exp() / (1.0 - dm);
            fmin = fmin.min(vf);
            fmax = fmax.max(vf);
        }
        let sd = delta[0] - delta[1];
        let ss = sol.s_weight[0] - sol.s_weight[1];
        let ok = if sd == 0.0 {
            ss.abs() < 1e-9
        } else {
            sd.signum() == ss.signum()
        };
        if !ok {
            g.fail(format!("δ={delta:?}, s={:?}", sol.s_weight));
        }
    }
    e.measure("min", emin);
    e.measure("max", emax);
    if !(emin > 0.0 && emax.is_finite()) {
        e.fail(format!("band [{emin}, {emax}]"));
    }
    f.measure("min", fmin);
    f.measure("max", fmax);
    if !(fmin > 0.0 && fmax.is_finite()) {
        f.fail(format!("band [{fmin}, {fmax}]"));
    }
    d.measure("samples", deltas.len() as f64);
    g.measure("samples", deltas.len() as f64);
    Ok(vec![d, e, f, g])
}

/// `h(s)(1-|δ|) = ϖ(s) - 2 >= 2`, with `ϖ` from the product formula in
/// ambient coordinates. Distinguished walk, any rank.
pub fn lemma44_check(params: &WalkParams, deltas: &[Vec<f64>]) -> Result<Diagnostic> {
    if !params.is_distinguished() {
        return Err(Error::Unsupported(
            "the product formula needs the distinguished walk".into(),
        ));
    }
    let lse = LogSumExp::new(params);
    let mut diag = Diagnostic::new("h(s)(1-|δ|) >= 2");
    let mut worst_gap = f64::INFINITY;
    let mut worst_identity = 0.0f64;
    for delta in deltas {
        let sol = lse.solve(delta)?;
        let s = &sol.s;
        let last = s.len() - 1;
        let mut varpi = (s[0] + s[last]).exp() + 2.0 * s[last].exp() + 1.0;
        for sj in &s[1..last] {
            varpi *= sj.exp() + 1.0;
        }
        let norm: f64 = delta.iter().sum();
        let lhs = sol.h_s * (1.0 - norm);
        let rhs = varpi - 2.0;
        worst_identity = worst_identity.max((lhs - rhs).abs() / rhs);
        worst_gap = worst_gap.min(rhs);
        if rhs < 2.0 || lhs < 2.0 * (1.0 - 1e-12) {
            diag.fail(format!("δ={delta:?}: h(s)(1-|δ|)={lhs}, ϖ-2={rhs}"));
        }
    }
    if worst_identity > 1e-9 {
        diag.fail(format!(
            "identity h(s)(1-|δ|) = ϖ(s)-2 off by {worst_identity:.3e}"
        ));
    }
    diag.measure("min ϖ(s)-2", worst_gap);
    diag.measure("max relative identity defect", worst_identity);
    Ok(diag)
}

/// Rank-two `s` grid: `s^1, s^2 ∈ {0, step, ..., 8}` inside the closed chamber.
pub fn s_grid_rank2(step: f64) -> Vec<[f64; 2]> {
    let k = (8.0 / step).round() as usize;
    let mut out = Vec::new();
    for a in 0..=k {
        for b in 0..=k {
            let (s1, s2) = (a as f64 * step, b as f64 * step);
            // s_1 = 2 s^1 - s^2 >= 0, s_2 = 2 s^2 - s^1 >= 0
            if 2.0 * s1 - s2 >= -1e-12 && 2.0 * s2 - s1 >= -1e-12 {
                out.push([s1, s2]);
            }
        }
    }
    out
}

/// `min -log(|h(s+iθ)|/h(s)) / B(θ,θ)` over `θ ∈ U` (rank two) on a
/// `points × points` grid in `θ_j = <α_j, θ>`, excluding a small ball around
/// the points of `2πQ`.
pub fn global_psi_min(params: &WalkParams, s_root: &[f64], points: usize) -> (f64, [f64; 2]) {
    let rs = params.root_system();
    let lse = LogSumExp::new(params);
    let b = lse.hessian(s_root);
    let s = AmbientVector::from_root_coords(rs, s_root);
    let hs = lse.moments(s_root, false).ln_h.exp();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for a in 0..points {
        for c in 0..points {
            let t1 = -two_pi + 2.0 * two_pi * a as f64 / (points - 1) as f64;
            let t2 = -two_pi + 2.0 * two_pi * c as f64 / (points - 1) as f64;
            if (t1 + t2).abs() > two_pi + 1e-12 {
                continue;
            }
            let th = AmbientVector::from_weight_coords(rs, &[t1, t2]);
            let root = th.root_coords();
            // root coordinates of 2πQ points are multiples of 2π
            let near = root
                .iter()
                .map(|v| {
                    let k = (v / two_pi).round();
                    (v - k * two_pi).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            if near < 1e-3 {
                continue;
            }
            let z: Vec<Complex64> = s
                .coords
                .iter()
                .zip(&th.coords)
                .map(|(&x, &y)| Complex64::new(x, y))
                .collect();
            let ratio = h_eval(params, &z).norm() / hs;
            let v = -ratio.ln() / quad_form(&b, &root);
            if v < best.0 {
                best = (v, [t1, t2]);
            }
        }
    }
    best
}

/// Global `Ψ` positivity over the rank-two `s` grid.
pub fn global_psi_diagnostic(params: &WalkParams, s_step: f64, points: usize) -> Diagnostic {
    let mut d = Diagnostic::new("global Ψ positivity");
    let mut worst = (f64::INFINITY, [0.0; 2], [0.0; 2]);
    for s in s_grid_rank2(s_step) {
        let (v, th) = global_psi_min(params, &s, points);
        if v < worst.0 {
            worst = (v, s, th);
        }
    }
    d.measure("min ratio", worst.0);
    d.measure("at s^1", worst.1[0]);
    d.measure("at s^2", worst.1[1]);
    if !(worst.0 > 0.0) {
        d.fail(format!(
            "s={:?}, θ={:?}: ratio {}",
            worst.1, worst.2, worst.0
        ));
    }
    d
}

/// Local behaviour of `Ψ(θ) = log(h(s+iθ)/h(s)) - i<δ,θ>` near `θ = 0`
/// (rank two): measured bounds of `-Re Ψ / B(θ,θ)` and `|Im Ψ| / (|θ| B(θ,θ))`
/// over `|θ_j| ≤ radius`.
pub fn local_psi_diagnostic(
    params: &WalkParams,
    s_step: f64,
    radius: f64,
    points: usize,
) -> Diagnostic {
    let mut d = Diagnostic::new("local Ψ behaviour");
    let rs = params.root_system();
    let lse = LogSumExp::new(params);
    let (mut re_lo, mut re_hi, mut im_hi) = (f64::INFINITY, 0.0f64, 0.0f64);
    for s_root in s_grid_rank2(s_step) {
        let b = lse.hessian(&s_root);
        let delta = lse.log_gradient(&s_root);
        let s = AmbientVector::from_root_coords(rs, &s_root);
        let hs = lse.moments(&s_root, false).ln_h.exp();
        for a in 0..points {
            for c in 0..points {
                let t = [
                    -radius + 2.0 * radius * a as f64 / (points - 1) as f64,
                    -radius + 2.0 * radius * c as f64 / (points - 1) as f64,
                ];
                let bq = quad_form(&b, &t);
                if t[0].hypot(t[1]) < 1e-9 || bq <= 0.0 {
                    continue;
                }
                let th = AmbientVector::from_root_coords(rs, &t);
                let z: Vec<Complex64> = s
                    .coords
                    .iter()
                    .zip(&th.coords)
                    .map(|(&x, &y)| Complex64::new(x, y))
                    .collect();
                let psi = (h_eval(params, &z) / hs).ln() - Complex64::new(0.0, dot(&delta, &t));
                let re = -psi.re / bq;
                re_lo = re_lo.min(re);
                re_hi = re_hi.max(re);
                im_hi = im_hi.max(psi.im.abs() / (th.dot(&th).sqrt() * bq));
            }
        }
    }
    d.measure("min -ReΨ/B", re_lo);
    d.measure("max -ReΨ/B", re_hi);
    d.measure("max |ImΨ|/(|θ|B)", im_hi);
    if !(re_lo > 0.0 && im_hi.is_finite()) {
        d.fail(format!("band [{re_lo}, {re_hi}], im constant {im_hi}"));
    }
    d
}

/// `min_θ n |h(s+iθ) + 2(n+1)/(n+3)| / h(s)` over a `θ` grid (rank two).
pub fn nonzero_denominator_min(
    params: &WalkParams,
    n: u64,
    x: &[i64],
    points: usize,
) -> Result<f64> {
    let prob = PhaseProblem::from_lattice(params, n, x)?;
    let sol = prob.solve()?;
    let rs = params.root_system();
    let shift = 2.0 * (n as f64 + 1.0) / (n as f64 + 3.0);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut best = f64::INFINITY;
    for a in 0..points {
        for c in 0..points {
            let t = [
                two_pi * a as f64 / points as f64,
                two_pi * c as f64 / points as f64,
            ];
            // θ = Σ t_j α_j covers a fundamental domain of 2πQ
            let th = AmbientVector::from_root_coords(rs, &t);
            let z: Vec<Complex64> = sol
                .s
                .iter()
                .zip(&th.coords)
                .map(|(&x, &y)| Complex64::new(x, y))
                .collect();
            let v = (h_eval(params, &z) + shift).norm() * n as f64 / sol.h_s;
            best = best.min(v);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> WalkParams {
        WalkParams::distinguished(2, 2).unwrap()
    }

    #[test]
    fn origin() {
        let sol = PhaseProblem::new(&a2(), &[0.0, 0.0])
            .unwrap()
            .solve()
            .unwrap();
        assert!(sol.s.iter().all(|v| v.abs() < 1e-14));
        assert!(sol.phi.abs() < 1e-15);
    }

    #[test]
    fn closed_form_point() {
        let sol = PhaseProblem::new(&a2(), &[3.0 / 14.0, 3.0 / 14.0])
            .unwrap()
            .solve()
            .unwrap();
        let l2 = 2f64.ln();
        for v in &sol.s_weight {
            assert!((v - l2).abs() < 1e-12);
        }
        let want = (7.0f64 / 6.0).ln() - 3.0 / 7.0 * l2;
        assert!((sol.phi - want).abs() < 1e-12);
        assert!((sol.phi + 0.142_912_397_5).abs() < 1e-9);
        assert!((sol.h_s - 7.0).abs() < 1e-12);
        assert!(sol.grad_residual <= RESIDUAL_TOL);
    }

    #[test]
    fn dense_grid_agrees() {
        let p = a2();
        let lse = LogSumExp::new(&p);
        let delta = [0.31, 0.12];
        let sol = lse.solve(&delta).unwrap();
        let mut best = f64::INFINITY;
        for a in 0..=400 {
            for b in 0..=400 {
                let y = [a as f64 * 0.01, b as f64 * 0.01];
                best = best.min(lse.phi_at(&delta, &y));
            }
        }
        assert!(sol.phi <= best + 1e-12);
        assert!(best - sol.phi < 1e-4);
    }

    #[test]
    fn wall_stays_on_wall() {
        let sol = PhaseProblem::new(&a2(), &[0.4, 0.0])
            .unwrap()
            .solve()
            .unwrap();
        assert!(sol.s_weight[1].abs() < 1e-12);
        assert!(sol.s_weight[0] > 0.0);
    }

    #[test]
    fn rank_one_closed_form() {
        let p = WalkParams::distinguished(1, 3).unwrap();
        for k in 1..20 {
            let d = k as f64 / 20.0;
            let sol = PhaseProblem::new(&p, &[d]).unwrap().solve().unwrap();
            let want = -0.5 * ((1.0 + d) * (1.0 + d).ln() + (1.0 - d) * (1.0 - d).ln());
            assert!((sol.phi - want).abs() < 1e-12, "δ={d}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            PhaseProblem::new(&a2(), &[0.6, 0.4]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            PhaseProblem::new(&a2(), &[-0.1, 0.4]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            PhaseProblem::new(&a2(), &[0.5, 0.5 - 1e-10]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn lemma44_closed_form_point() {
        let d = lemma44_check(&a2(), &[vec![3.0 / 14.0, 3.0 / 14.0]]).unwrap();
        assert!(d.passed);
        assert!((d.measured[0].1 - 4.0).abs() < 1e-9);
    }

    #[test]
    fn b_swap_symmetry() {
        let p = a2();
        for u in [0.0, 0.5, 2.0] {
            let s = AmbientVector::from_weight_coords(p.root_system(), &[u, u]);
            let b = hessian_b(&p, &s);
            assert!((b[0][0] - b[1][1]).abs() < 1e-12);
            assert!(DMatrix::from_fn(2, 2, |i, j| b[i][j]).cholesky().is_some());
        }
    }

    #[test]
    fn dphi_at_origin_and_interior() {
        let p = a2();
        assert!(dphi_check(&PhaseProblem::new(&p, &[0.0, 0.0]).unwrap()).unwrap() <= 1e-8);
        let d = 0.3 / 2.0;
        assert!(dphi_check(&PhaseProblem::new(&p, &[d, d]).unwrap()).unwrap() <= 1e-5);
    }

    #[test]
    fn shift_lemma_diagnostics() {
        for d in lemma34_diagnostics(&a2(), 7).unwrap() {
            assert!(d.passed, "{}: {:?}", d.name, d.witness);
        }
    }

    #[test]
    fn lemma44_ranks_two_to_four() {
        for r in 2..=4 {
            let p = WalkParams::distinguished(r, 3).unwrap();
            let deltas = random_deltas(r, 60, 0.99, r as u64);
            let d = lemma44_check(&p, &deltas).unwrap();
            assert!(d.passed, "r={r}: {:?}", d.witness);
        }
    }

    #[test]
    fn global_psi_positive() {
        let d = global_psi_diagnostic(&a2(), 2.0, 51);
        assert!(d.passed, "{:?}", d.witness);
    }

    #[test]
    fn local_psi_band() {
        let d = local_psi_diagnostic(&a2(), 1.0, 0.3, 13);
        assert!(d.passed, "{:?}", d.witness);
    }

    #[test]
    fn denominator_stays_away_from_zero() {
        for n in [20u64, 40] {
            for x1 in 0..n as i64 {
                for x2 in 0..n as i64 - x1 {
                    if (x1 - x2) * 4 >= n as i64 && (x1 + x2) * 4 >= n as i64 {
                        let v = nonzero_denominator_min(&a2(), n, &[x1, x2], 24).unwrap();
                        assert!(v > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn hessian_band_rank_two() {
        let p = a2();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for s in s_grid_rank2(0.5) {
            let amb = AmbientVector::from_root_coords(p.root_system(), &s);
            let (a, b) = lemma36_band(&p, &amb);
            lo = lo.min(a);
            hi = hi.max(b);
        }
        assert!(lo > 0.0 && hi / lo <= 40.0, "band [{lo}, {hi}]");
    }

    #[test]
    fn phi_decreases_along_rays() {
        let lse = LogSumExp::new(&a2());
        for dir in [[1.0, 0.0], [0.5, 0.5], [0.8, 0.2]] {
            let mut prev = 0.0;
            for k in 1..99 {
                let t = k as f64 / 100.0;
                let phi = lse.solve(&[dir[0] * t, dir[1] * t]).unwrap().phi;
                assert!(phi < prev);
                prev = phi;
            }
        }
    }

    #[test]
    fn near_extremal_monotone() {
        let mut prev = -1.0;
        for k in 1..=7 {
            let e = 10f64.powi(-k);
            let d = (1.0 - e) / 2.0;
            let sol = PhaseProblem::new(&a2(), &[d, d]).unwrap().solve().unwrap();
            let m = sol.s_root[0].min(sol.s_root[1]);
            assert!(m > prev);
            prev = m;
        }
    }
}

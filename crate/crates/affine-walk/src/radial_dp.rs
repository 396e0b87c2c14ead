//! Exact law of the radial chain on `P⁺` in ranks one and two.
//!
//! Table entries are stored as integers over a common denominator `D`, so the
//! time-`n` law is a vector of big integers over `D^n`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::bigmath::ln_biguint;
use crate::error::{Error, Result};
use crate::special_fn::{ln_n_lambda, n_lambda, WalkParams};

/// Largest rank-two horizon accepted by [`dp_run`].
pub const MAX_RANK2_STEPS: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Region {
    Origin,
    /// Multiples of `λ_1`.
    WallLambda1,
    /// Multiples of `λ_2`.
    WallLambda2,
    Interior,
}

pub fn region_of(x: &[i64]) -> Region {
    match x {
        [0] | [0, 0] => Region::Origin,
        [_] => Region::Interior,
        [_, 0] => Region::WallLambda1,
        [0, _] => Region::WallLambda2,
        _ => Region::Interior,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Move {
    pub step: Vec<i64>,
    #[serde(serialize_with = "ser_ratio")]
    pub prob: BigRational,
}

fn ser_ratio<S: serde::Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

#[derive(Clone, Debug, Serialize)]
pub struct RadialTable {
    rank: usize,
    rows: BTreeMap<Region, Vec<Move>>,
    /// Common denominator of all entries.
    #[serde(serialize_with = "ser_biguint")]
    denom: BigUint,
}

fn ser_biguint<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

impl RadialTable {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn row(&self, region: Region) -> &[Move] {
        &self.rows[&region]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&Region, &Vec<Move>)> {
        self.rows.iter()
    }

    pub fn denom(&self) -> &BigUint {
        &self.denom
    }

    /// `p⁺(λ, λ + step)`, zero when the step is not in the row.
    pub fn prob(&self, x: &[i64], step: &[i64]) -> BigRational {
        self.row(region_of(x))
            .iter()
            .find(|m| m.step == step)
            .map(|m| m.prob.clone())
            .unwrap_or_else(BigRational::zero)
    }

    fn scaled_rows(&self) -> BTreeMap<Region, Vec<(Vec<i64>, u64)>> {
        let d = BigInt::from(self.denom.clone());
        self.rows
            .iter()
            .map(|(reg, row)| {
                let v = row
                    .iter()
                    .map(|m| {
                        let k = (&m.prob * BigRational::from_integer(d.clone())).to_integer();
                        (
                            m.step.clone(),
                            k.to_u64().expect("table numerator fits u64"),
                        )
                    })
                    .collect();
                (*reg, v)
            })
            .collect()
    }
}

/// Radial transition table, obtained by folding each neighbour direction
/// back into `P⁺`. A direction `μ ∈ W_0.λ_j` carries
/// `c_j q^{<ρ, μ+λ_j>} / N_{λ_j}`.
pub fn build_table(p: &WalkParams) -> Result<RadialTable> {
    let rs = p.root_system();
    let r = rs.rank();
    if r > 2 {
        return Err(Error::Unsupported(format!(
            "no radial table in rank {r}; use the Fourier route"
        )));
    }
    let weights: Vec<BigRational> = match r {
        1 => vec![BigRational::one()],
        _ => {
            let (c1, c2) = p.sphere_weights().expect("rank two has sphere weights");
            vec![c1, c2]
        }
    };
    let q = BigInt::from(p.q());
    let rep_of = |reg: Region| -> Vec<i64> {
        match (r, reg) {
            (1, Region::Origin) => vec![0],
            (1, _) => vec![1],
            (_, Region::Origin) => vec![0, 0],
            (_, Region::WallLambda1) => vec![1, 0],
            (_, Region::WallLambda2) => vec![0, 1],
            _ => vec![1, 1],
        }
    };
    let regions: Vec<Region> = if r == 1 {
        vec![Region::Origin, Region::Interior]
    } else {
        vec![
            Region::Origin,
            Region::WallLambda1,
            Region::WallLambda2,
            Region::Interior,
        ]
    };
    let mut rows = BTreeMap::new();
    let mut denom = BigUint::one();
    for reg in regions {
        let lam = rep_of(reg);
        let mut acc: BTreeMap<Vec<i64>, BigRational> = BTreeMap::new();
        for j in 1..=r {
            let lj = rs.fundamental_weight(j);
            let orbit = rs.orbit(&lj);
            let counts: Vec<BigInt> = orbit
                .iter()
                .map(|mu| {
                    let e: Vec<i64> = mu.iter().zip(&lj).map(|(a, b)| a + b).collect();
                    let ex = rs.rho_pairing(&e);
                    assert!(ex.is_integer());
                    num_traits::pow(q.clone(), *ex.numer() as usize)
                })
                .collect();
            let total: BigInt = counts.iter().sum();
            for (mu, cnt) in orbit.iter().zip(counts) {
                let target: Vec<i64> = lam.iter().zip(mu).map(|(a, b)| a + b).collect();
                let folded = rs.dominant(&target);
                let step: Vec<i64> = folded.iter().zip(&lam).map(|(a, b)| a - b).collect();
                let pr = &weights[j - 1] * BigRational::new(cnt, total.clone());
                *acc.entry(step).or_insert_with(BigRational::zero) += pr;
            }
        }
        let row: Vec<Move> = acc
            .into_iter()
            .filter(|(_, pr)| !pr.is_zero())
            .map(|(step, prob)| Move { step, prob })
            .collect();
        for m in &row {
            denom = denom.lcm(&m.prob.denom().to_biguint().expect("positive denominator"));
        }
        rows.insert(reg, row);
    }
    Ok(RadialTable {
        rank: r,
        rows,
        denom,
    })
}

/// Integer weights on a dense grid, stepped with fixed per-region moves.
#[derive(Clone, Debug)]
struct Grid {
    rank: usize,
    side: usize,
    cells: Vec<BigUint>,
}

impl Grid {
    fn new(rank: usize, side: usize) -> Self {
        let len = if rank == 1 { side } else { side * side };
        let mut cells = vec![BigUint::zero(); len];
        cells[0] = BigUint::one();
        Grid { rank, side, cells }
    }

    fn index(&self, x: &[i64]) -> Option<usize> {
        if x.iter().any(|&c| c < 0 || c as usize >= self.side) {
            return None;
        }
        Some(match x {
            [a] => *a as usize,
            [a, b] => *a as usize * self.side + *b as usize,
            _ => unreachable!(),
        })
    }

    fn point(&self, i: usize) -> Vec<i64> {
        if self.rank == 1 {
            vec![i as i64]
        } else {
            vec![(i / self.side) as i64, (i % self.side) as i64]
        }
    }

    fn get(&self, x: &[i64]) -> BigUint {
        self.index(x)
            .map(|i| self.cells[i].clone())
            .unwrap_or_default()
    }

    /// One step; cells with `|λ|` above `keep` are dropped.
    fn step(&mut self, rows: &BTreeMap<Region, Vec<(Vec<i64>, u64)>>, reach: usize, keep: usize) {
        let mut next = vec![BigUint::zero(); self.cells.len()];
        for i in 0..self.cells.len() {
            if self.cells[i].is_zero() {
                continue;
            }
            let x = self.point(i);
            let len: i64 = x.iter().sum();
            if len as usize > reach {
                continue;
            }
            for (step, k) in &rows[&region_of(&x)] {
                let y: Vec<i64> = x.iter().zip(step).map(|(a, b)| a + b).collect();
                if y.iter().sum::<i64>() as usize > keep {
                    continue;
                }
                if let Some(j) = self.index(&y) {
                    next[j] += &self.cells[i] * *k;
                }
            }
        }
        self.cells = next;
    }
}

/// Exact time-`n` law of the radial chain started at 0, as numerators over `D^n`.
#[derive(Clone, Debug)]
pub struct RadialDistribution {
    pub n: usize,
    grid: Grid,
    denom_pow: BigUint,
    /// Entries with `|λ|` above this are not tracked.
    radius: usize,
}

impl RadialDistribution {
    pub fn numerator(&self, x: &[i64]) -> BigUint {
        self.grid.get(x)
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denom_pow
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    fn check(&self, x: &[i64]) -> Result<()> {
        if x.len() != self.grid.rank || x.iter().any(|&c| c < 0) {
            return Err(Error::Input(format!(
                "{x:?} is not a dominant weight of rank {}",
                self.grid.rank
            )));
        }
        if x.iter().sum::<i64>() as usize > self.radius {
            return Err(Error::Input(format!(
                "{x:?} lies outside the tracked radius {}",
                self.radius
            )));
        }
        Ok(())
    }

    /// `p⁺_n(0, λ)`.
    pub fn mass(&self, x: &[i64]) -> Result<BigRational> {
        self.check(x)?;
        Ok(BigRational::new(
            BigInt::from(self.numerator(x)),
            BigInt::from(self.denom_pow.clone()),
        ))
    }

    pub fn ln_mass(&self, x: &[i64]) -> Result<f64> {
        self.check(x)?;
        let num = self.numerator(x);
        if num.is_zero() {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(ln_biguint(&num) - ln_biguint(&self.denom_pow))
    }

    /// Sum of all tracked numerators.
    pub fn total_numerator(&self) -> BigUint {
        self.grid.cells.iter().sum()
    }

    /// Support points with their masses.
    pub fn support(&self) -> Vec<(Vec<i64>, BigRational)> {
        let d = BigInt::from(self.denom_pow.clone());
        self.grid
            .cells
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                (
                    self.grid.point(i),
                    BigRational::new(BigInt::from(c.clone()), d.clone()),
                )
            })
            .collect()
    }
}

/// Step-by-step driver; [`RadialChain::distribution`] is a snapshot at the current time.
#[derive(Clone, Debug)]
pub struct RadialChain {
    p: WalkParams,
    rows: BTreeMap<Region, Vec<(Vec<i64>, u64)>>,
    denom: BigUint,
    horizon: usize,
    radius: usize,
    t: usize,
    grid: Grid,
    denom_pow: BigUint,
}

impl RadialChain {
    pub fn new(p: &WalkParams, horizon: usize) -> Result<Self> {
        Self::truncated(p, horizon, horizon)
    }

    /// Only `λ` with `|λ| <= radius` are needed at time `horizon`. Since `|λ|`
    /// moves by at most one per step, cells beyond `radius + horizon - t`
    /// at time `t` are dropped.
    pub fn truncated(p: &WalkParams, horizon: usize, radius: usize) -> Result<Self> {
        if p.rank() == 2 && horizon > MAX_RANK2_STEPS {
            return Err(Error::Resource(format!(
                "rank-two horizon {horizon} exceeds {MAX_RANK2_STEPS}"
            )));
        }
        let table = build_table(p)?;
        let radius = radius.min(horizon);
        Ok(RadialChain {
            p: p.clone(),
            rows: table.scaled_rows(),
            denom: table.denom.clone(),
            horizon,
            radius,
            t: 0,
            grid: Grid::new(p.rank(), horizon + 2),
            denom_pow: BigUint::one(),
        })
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn params(&self) -> &WalkParams {
        &self.p
    }

    pub fn step(&mut self) -> Result<()> {
        if self.t >= self.horizon {
            return Err(Error::Input(format!(
                "chain already at its horizon {}",
                self.horizon
            )));
        }
        let keep = self.radius + self.horizon - self.t - 1;
        self.grid.step(&self.rows, self.t, keep);
        self.t += 1;
        self.denom_pow *= &self.denom;
        Ok(())
    }

    /// Tracked radius at the current time.
    fn current_radius(&self) -> usize {
        (self.radius + self.horizon - self.t).min(self.t)
    }

    pub fn distribution(&self) -> RadialDistribution {
        RadialDistribution {
            n: self.t,
            grid: self.grid.clone(),
            denom_pow: self.denom_pow.clone(),
            radius: self.current_radius(),
        }
    }

    /// `p_t(λ) = p⁺_t(0,λ)/N_λ` at the current time.
    pub fn density(&self, x: &[i64]) -> Result<BigRational> {
        let d = self.distribution();
        let m = d.mass(x)?;
        Ok(m / BigRational::from_integer(n_lambda(self.p.root_system(), self.p.q(), x)))
    }

    /// `log p_t(λ)` without forming the rational.
    pub fn ln_density(&self, x: &[i64]) -> Result<f64> {
        if x.iter().sum::<i64>() as usize > self.current_radius() {
            return Err(Error::Input(format!(
                "{x:?} lies outside the tracked radius"
            )));
        }
        let num = self.grid.get(x);
        if num.is_zero() {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(ln_biguint(&num)
            - ln_biguint(&self.denom_pow)
            - ln_n_lambda(self.p.root_system(), self.p.q(), x))
    }
}

pub fn dp_run(p: &WalkParams, n: usize) -> Result<RadialDistribution> {
    let mut c = RadialChain::new(p, n)?;
    for _ in 0..n {
        c.step()?;
    }
    Ok(c.distribution())
}

/// `p_n(λ) = p⁺_n(0,λ) / N_λ`.
pub fn density_dp(p: &WalkParams, n: usize, x: &[i64]) -> Result<BigRational> {
    let rs = p.root_system();
    rs.check_len(x)?;
    if !rs.is_dominant(x) {
        return Err(Error::Input(format!("{x:?} is not dominant")));
    }
    let len = x.iter().sum::<i64>() as usize;
    if len > n {
        return Ok(BigRational::zero());
    }
    let mut c = RadialChain::truncated(p, n, len)?;
    for _ in 0..n {
        c.step()?;
    }
    c.density(x)
}

/// Admissible-path counts: same moves as the table, every move weight one.
#[derive(Clone, Debug)]
pub struct PathCounter {
    rows: BTreeMap<Region, Vec<(Vec<i64>, u64)>>,
    t: usize,
    grid: Grid,
}

impl PathCounter {
    pub fn new(p: &WalkParams, horizon: usize) -> Result<Self> {
        if p.rank() != 2 {
            return Err(Error::Unsupported("path counts are rank two".into()));
        }
        let rows = build_table(p)?
            .scaled_rows()
            .into_iter()
            .map(|(reg, row)| (reg, row.into_iter().map(|(s, _)| (s, 1)).collect()))
            .collect();
        Ok(PathCounter {
            rows,
            t: 0,
            grid: Grid::new(2, horizon + 2),
        })
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn step(&mut self) {
        let keep = self.grid.side;
        self.grid.step(&self.rows, self.t, keep);
        self.t += 1;
    }

    pub fn count(&self, x: &[i64]) -> BigUint {
        self.grid.get(x)
    }
}

/// `M(n, λ)`: number of admissible radial paths from 0 to `λ` in `n` steps.
pub fn path_count(p: &WalkParams, n: usize, x: &[i64]) -> Result<BigUint> {
    let mut c = PathCounter::new(p, n)?;
    for _ in 0..n {
        c.step();
    }
    Ok(c.count(x))
}

/// Closed-form count of the boundary path construction:
/// `n!/((x_1-d)!(x_2+2d)!) · (x_2+d)!/(x_2! d!)` with `d = n - |x|`, after
/// ordering `x_1 >= x_2`; zero when `x_1 < d`.
pub fn choice_count(n: u64, x: &[i64]) -> Result<BigUint> {
    if x.len() != 2 || x.iter().any(|&c| c < 0) {
        return Err(Error::Input(format!(
            "{x:?} is not a rank-two dominant weight"
        )));
    }
    let (a, b) = if x[0] >= x[1] {
        (x[0], x[1])
    } else {
        (x[1], x[0])
    };
    let d = n as i64 - a - b;
    if d < 0 {
        return Err(Error::Domain(format!("|λ| = {} exceeds n = {n}", a + b)));
    }
    if a < d {
        return Ok(BigUint::zero());
    }
    let f = |k: i64| -> BigUint { (1..=k as u64).map(BigUint::from).product() };
    Ok(f(n as i64) / (f(a - d) * f(b + 2 * d)) * f(b + d) / (f(b) * f(d)))
}

/// For each `n` in `2..=n_max`, `min p_{n+1}(λ) / p_n(μ)` over `μ` with
/// `|μ| <= n` and `λ` a radial neighbour of `μ`.
pub fn harnack_minima(p: &WalkParams, n_max: usize) -> Result<Vec<(usize, f64)>> {
    let table = build_table(p)?;
    let mut c = RadialChain::new(p, n_max + 1)?;
    c.step()?;
    c.step()?;
    let mut prev = c.clone();
    let mut out = Vec::new();
    for n in 2..=n_max {
        c.step()?;
        let mut m = f64::INFINITY;
        for mu in crate::estimates::dominant_weights(p.rank(), n as i64) {
            let base = prev.ln_density(&mu)?;
            if base == f64::NEG_INFINITY {
                continue;
            }
            for mv in table.row(region_of(&mu)) {
                let lam: Vec<i64> = mu.iter().zip(&mv.step).map(|(a, b)| a + b).collect();
                m = m.min(c.ln_density(&lam)? - base);
            }
        }
        out.push((n, m.exp()));
        prev = c.clone();
    }
    Ok(out)
}

/// Checks `Σ_μ p⁺(λ,μ) F_0(μ) = 𝝈 F_0(λ)` exactly for `|λ| <= max_len`.
/// Returns the first `λ` where it fails.
pub fn eigenfunction_check(p: &WalkParams, max_len: i64) -> Result<Option<Vec<i64>>> {
    if p.rank() != 2 {
        return Err(Error::Unsupported(
            "exact eigenfunction check needs rank two".into(),
        ));
    }
    let table = build_table(p)?;
    let f0 = crate::special_fn::SphericalF0::new(p.root_system(), p.q());
    let sigma = p
        .spectral_radius_exact()
        .ok_or_else(|| Error::Unsupported("no exact spectral radius".into()))?;
    let exact = |x: &[i64]| {
        f0.exact(x)
            .ok_or_else(|| Error::Numeric(format!("F_0{x:?} is irrational")))
    };
    for x in crate::estimates::dominant_weights(2, max_len) {
        let mut lhs = BigRational::zero();
        for m in table.row(region_of(&x)) {
            let y: Vec<i64> = x.iter().zip(&m.step).map(|(a, b)| a + b).collect();
            lhs += &m.prob * exact(&y)?;
        }
        if lhs != &sigma * exact(&x)? {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exppoly::rat;

    fn a2(q: u32) -> WalkParams {
        WalkParams::distinguished(2, q).unwrap()
    }

    /// All `n`-step paths of the radial chain, weights multiplied.
    fn brute_force(t: &RadialTable, n: usize) -> BTreeMap<Vec<i64>, BigRational> {
        let mut out = BTreeMap::new();
        fn go(
            t: &RadialTable,
            x: Vec<i64>,
            w: BigRational,
            left: usize,
            out: &mut BTreeMap<Vec<i64>, BigRational>,
        ) {
            if left == 0 {
                *out.entry(x).or_insert_with(BigRational::zero) += w;
                return;
            }
            for m in t.row(region_of(&x)) {
                let y = x.iter().zip(&m.step).map(|(a, b)| a + b).collect();
                go(t, y, &w * &m.prob, left - 1, out);
            }
        }
        go(t, vec![0; t.rank()], BigRational::one(), n, &mut out);
        out
    }

    #[test]
    fn rows_sum_to_one() {
        for q in [2, 3, 5] {
            for p in [
                a2(q),
                WalkParams::distinguished(1, q).unwrap(),
                WalkParams::weighted(q, rat(1, 3)).unwrap(),
            ] {
                let t = build_table(&p).unwrap();
                for (_, row) in t.rows() {
                    let s: BigRational = row.iter().map(|m| m.prob.clone()).sum();
                    assert_eq!(s, BigRational::one());
                    assert!(row.iter().all(|m| m.prob > BigRational::zero()));
                }
            }
        }
    }

    #[test]
    fn distinguished_table_entries() {
        for q in [2i64, 3, 4] {
            let t = build_table(&a2(q as u32)).unwrap();
            let sigma = rat(q, 2 * (q * q + q + 1));
            let qq = rat(q, 1);
            let qi = rat(1, q);
            let check = |x: &[i64], step: &[i64], want: BigRational| {
                assert_eq!(t.prob(x, step), want, "q={q} x={x:?} step={step:?}");
            };
            check(&[0, 0], &[1, 0], rat(1, 2));
            check(&[0, 0], &[0, 1], rat(1, 2));
            for (step, f) in [
                ([1, 0], qq.clone()),
                ([-1, 1], BigRational::one()),
                ([0, -1], qi.clone()),
                ([0, 1], qq.clone()),
                ([1, -1], BigRational::one()),
                ([-1, 0], qi.clone()),
            ] {
                check(&[3, 2], &step, &sigma * f);
            }
            check(&[3, 0], &[1, 0], &sigma * &qq);
            check(&[3, 0], &[0, 1], &sigma * (&qq + BigRational::one()));
            check(&[3, 0], &[-1, 1], &sigma * (BigRational::one() + &qi));
            check(&[3, 0], &[-1, 0], &sigma * &qi);
            assert_eq!(t.row(Region::Interior).len(), 6);
            assert_eq!(t.row(Region::WallLambda1).len(), 4);
        }
    }

    #[test]
    fn weighted_half_matches_distinguished() {
        for q in [2, 3] {
            let a = build_table(&a2(q)).unwrap();
            let b = build_table(&WalkParams::weighted(q, rat(1, 2)).unwrap()).unwrap();
            assert_eq!(a.rows, b.rows);
        }
    }

    #[test]
    fn weighted_table() {
        // interior: λ2-λ1 carries c1 q/N, wall kλ1: +λ2 carries c2 (q²+q)/N
        let p = WalkParams::weighted(2, rat(1, 3)).unwrap();
        let t = build_table(&p).unwrap();
        assert_eq!(t.prob(&[2, 2], &[-1, 1]), rat(1, 3) * rat(2, 7));
        assert_eq!(t.prob(&[2, 0], &[0, 1]), rat(2, 3) * rat(6, 7));
        assert_eq!(t.prob(&[0, 0], &[1, 0]), rat(1, 3));
    }

    #[test]
    fn rank_one_table() {
        let t = build_table(&WalkParams::distinguished(1, 2).unwrap()).unwrap();
        assert_eq!(t.prob(&[3], &[1]), rat(2, 3));
        assert_eq!(t.prob(&[3], &[-1]), rat(1, 3));
        assert_eq!(t.prob(&[0], &[1]), BigRational::one());
    }

    #[test]
    fn rank_three_unsupported() {
        let p = WalkParams::distinguished(3, 2).unwrap();
        assert!(matches!(build_table(&p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn hand_values() {
        let p = a2(2);
        assert_eq!(density_dp(&p, 1, &[1, 0]).unwrap(), rat(1, 14));
        assert_eq!(density_dp(&p, 2, &[0, 0]).unwrap(), rat(1, 14));
        assert_eq!(dp_run(&p, 3).unwrap().mass(&[1, 1]).unwrap(), rat(15, 98));
        let d1 = dp_run(&p, 1).unwrap();
        assert_eq!(d1.mass(&[1, 0]).unwrap(), rat(1, 2));
        assert_eq!(d1.mass(&[0, 1]).unwrap(), rat(1, 2));
        let p1 = WalkParams::distinguished(1, 2).unwrap();
        assert_eq!(density_dp(&p1, 2, &[0]).unwrap(), rat(1, 3));
        assert_eq!(density_dp(&p1, 3, &[3]).unwrap(), rat(1, 27));
    }

    #[test]
    fn dp_matches_brute_force() {
        for p in [a2(2), a2(3), WalkParams::weighted(2, rat(1, 3)).unwrap()] {
            let t = build_table(&p).unwrap();
            for n in 0..=6 {
                let bf = brute_force(&t, n);
                let dp = dp_run(&p, n).unwrap();
                let support: BTreeMap<_, _> = dp.support().into_iter().collect();
                assert_eq!(bf, support, "n={n}");
            }
        }
    }

    #[test]
    fn truncation_is_exact() {
        let p = a2(3);
        let full = dp_run(&p, 30).unwrap();
        let mut c = RadialChain::truncated(&p, 30, 3).unwrap();
        for _ in 0..30 {
            c.step().unwrap();
        }
        for x in [[0, 0], [1, 2], [3, 0]] {
            assert_eq!(c.distribution().mass(&x).unwrap(), full.mass(&x).unwrap());
        }
        assert!(c.distribution().mass(&[4, 0]).is_err());
    }

    #[test]
    fn mass_conservation() {
        for q in [2, 3] {
            let p = a2(q);
            let mut c = RadialChain::new(&p, 400).unwrap();
            let d = build_table(&p).unwrap().denom().clone();
            let mut dn = BigUint::one();
            for _ in 0..400 {
                c.step().unwrap();
                dn *= &d;
                assert_eq!(c.distribution().total_numerator(), dn);
            }
        }
    }

    #[test]
    fn aperiodicity() {
        let p = a2(2);
        let mut c = RadialChain::new(&p, 30).unwrap();
        for n in 1..=30usize {
            c.step().unwrap();
            let d = c.distribution();
            for x1 in 0..=n as i64 {
                for x2 in 0..=n as i64 - x1 {
                    let pos = !d.numerator(&[x1, x2]).is_zero();
                    assert_eq!(pos, n >= 2 || x1 + x2 == 1, "n={n} x=({x1},{x2})");
                }
            }
        }
        let p1 = WalkParams::distinguished(1, 3).unwrap();
        let d = dp_run(&p1, 21).unwrap();
        for k in 0..=21i64 {
            assert_eq!(!d.numerator(&[k]).is_zero(), k % 2 == 1);
        }
    }

    #[test]
    fn path_counts_small() {
        let p = a2(2);
        assert_eq!(path_count(&p, 2, &[0, 0]).unwrap(), BigUint::from(2u32));
        assert_eq!(path_count(&p, 3, &[1, 1]).unwrap(), BigUint::from(4u32));
        assert_eq!(choice_count(3, &[1, 1]).unwrap(), BigUint::from(2u32));
        assert!(matches!(choice_count(2, &[2, 1]), Err(Error::Domain(_))));
    }

    #[test]
    fn choice_count_below_paths() {
        let p = a2(2);
        let mut c = PathCounter::new(&p, 60).unwrap();
        for n in 1..=60u64 {
            c.step();
            for len in n.saturating_sub(4)..=n {
                for x1 in 0..=len as i64 {
                    let x = [x1, len as i64 - x1];
                    assert!(choice_count(n, &x).unwrap() <= c.count(&x), "n={n} x={x:?}");
                }
            }
        }
    }

    #[test]
    fn harnack_ratio_stable() {
        let mins = harnack_minima(&a2(2), 200).unwrap();
        let first = mins[98].1;
        let last = mins.last().unwrap().1;
        assert!(
            first > 0.0 && ((last - first) / first).abs() < 0.1,
            "{first} {last}"
        );
    }

    #[test]
    fn spherical_function_eigenvalue() {
        for q in [2, 3] {
            assert_eq!(eigenfunction_check(&a2(q), 12).unwrap(), None);
        }
        let w = WalkParams::weighted(2, rat(1, 3)).unwrap();
        assert_eq!(eigenfunction_check(&w, 12).unwrap(), None);
    }
}

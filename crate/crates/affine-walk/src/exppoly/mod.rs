//! Exact exponential polynomials `Σ c_μ e^μ` over the half weight lattice.
//!
//! Exponents are stored as doubled weight coordinates, so `e^{α/2}` has an
//! integer key. Coefficients are arbitrary-precision rationals.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::root_system::{pair_weight, Root, RootSystem, WeylElement};

pub mod identities;

pub type Key = Vec<i64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpPoly {
    rank: usize,
    terms: BTreeMap<Key, BigRational>,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl ExpPoly {
    pub fn zero(rank: usize) -> Self {
        ExpPoly {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(rank: usize, c: BigRational) -> Self {
        Self::monomial(rank, vec![0; rank], c)
    }

    pub fn one(rank: usize) -> Self {
        Self::constant(rank, BigRational::one())
    }

    /// `c e^{μ/2}` where `key` holds the doubled coordinates of `μ`.
    pub fn monomial(rank: usize, key: Key, c: BigRational) -> Self {
        assert_eq!(key.len(), rank);
        let mut p = Self::zero(rank);
        if !c.is_zero() {
            p.terms.insert(key, c);
        }
        p
    }

    /// `e^μ` for `μ` in (undoubled) weight coordinates.
    pub fn exp_weight(rank: usize, x: &[i64]) -> Self {
        Self::monomial(rank, x.iter().map(|c| 2 * c).collect(), BigRational::one())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> &BTreeMap<Key, BigRational> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: &[i64]) -> BigRational {
        self.terms
            .get(key)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    fn add_term(&mut self, key: Key, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.rank);
        }
        ExpPoly {
            rank: self.rank,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.rank);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Term-wise map `c e^μ ↦ c <dir, μ> e^μ` for an arbitrary lattice direction.
    pub fn directional_derivative(&self, rs: &RootSystem, dir: &[i64]) -> Self {
        let mut out = Self::zero(self.rank);
        for (k, v) in &self.terms {
            let p = rs.pairing(dir, k);
            let f = BigRational::new(BigInt::from(*p.numer()), BigInt::from(*p.denom() * 2));
            out.add_term(k.clone(), v * f);
        }
        out
    }

    /// Derivative along a positive root.
    pub fn root_derivative(&self, a: Root) -> Self {
        let mut out = Self::zero(self.rank);
        for (k, v) in &self.terms {
            let p = a.pair(k);
            out.add_term(k.clone(), v * rat(p, 2));
        }
        out
    }

    /// `π(∂) f`, the product of all positive-root derivatives.
    pub fn pi_partial(&self, rs: &RootSystem) -> Self {
        let roots = rs.positive_roots();
        let nroots = roots.len() as u32;
        let denom = BigInt::from(2).pow(nroots);
        let mut out = Self::zero(self.rank);
        for (k, v) in &self.terms {
            let mut num = BigInt::one();
            for a in &roots {
                num *= a.pair(k);
                if num.is_zero() {
                    break;
                }
            }
            if !num.is_zero() {
                out.add_term(k.clone(), v * BigRational::new(num, denom.clone()));
            }
        }
        out
    }

    /// `π(∂) f` computed by composing root derivatives in the given order.
    pub fn pi_partial_ordered(&self, order: &[Root]) -> Self {
        order
            .iter()
            .fold(self.clone(), |f, a| f.root_derivative(*a))
    }

    pub fn weyl_act(&self, rs: &RootSystem, w: &WeylElement) -> Self {
        let mut out = Self::zero(self.rank);
        for (k, v) in &self.terms {
            // keys are doubled, and the action is linear
            out.add_term(rs.act(w, k), v.clone());
        }
        out
    }

    pub fn eval_complex(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::zero();
        for (k, v) in &self.terms {
            let e = pair_weight(k, z) * 0.5;
            acc += e.exp() * v.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }

    pub fn eval_real(&self, z: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (k, v) in &self.terms {
            let e: f64 = pair_weight(k, z) * 0.5;
            acc += e.exp() * v.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }

    /// Largest key in lexicographic order.
    pub fn leading(&self) -> Option<(&Key, &BigRational)> {
        self.terms.iter().next_back()
    }

    /// Coordinatewise bounding box of the support.
    pub fn support_box(&self) -> Option<(Key, Key)> {
        let mut it = self.terms.keys();
        let first = it.next()?;
        let (mut lo, mut hi) = (first.clone(), first.clone());
        for k in it {
            for i in 0..k.len() {
                lo[i] = lo[i].min(k[i]);
                hi[i] = hi[i].max(k[i]);
            }
        }
        Some((lo, hi))
    }

    /// Exact quotient `self / d` when `d` divides `self`, else `None`.
    ///
    /// Long division by lex-leading terms. Any quotient term must fit in the
    /// box `box(self) - box(d)`, which bounds the loop.
    pub fn div_exact(&self, d: &ExpPoly) -> Option<ExpPoly> {
        let (dlead, dcoef) = d.leading()?;
        let (dlo, dhi) = d.support_box()?;
        let Some((flo, fhi)) = self.support_box() else {
            return Some(Self::zero(self.rank));
        };
        let qlo: Key = flo.iter().zip(&dlo).map(|(a, b)| a - b).collect();
        let qhi: Key = fhi.iter().zip(&dhi).map(|(a, b)| a - b).collect();
        let mut rem = self.clone();
        let mut quot = Self::zero(self.rank);
        while let Some((k, c)) = rem.leading() {
            let qk: Key = k.iter().zip(dlead).map(|(a, b)| a - b).collect();
            if (0..qk.len()).any(|i| qk[i] < qlo[i] || qk[i] > qhi[i]) {
                return None;
            }
            let qc = c / dcoef;
            let term = Self::monomial(self.rank, qk, qc);
            rem = &rem - &(&term * d);
            quot = &quot + &term;
        }
        Some(quot)
    }

    /// First key on which two polynomials differ.
    pub fn first_difference(&self, other: &ExpPoly) -> Option<(Key, BigRational, BigRational)> {
        let diff = self - other;
        diff.terms
            .keys()
            .next()
            .map(|k| (k.clone(), self.coeff(k), other.coeff(k)))
    }

    pub fn max_abs_coefficient(&self) -> BigRational {
        self.terms
            .values()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }
}

impl<'a> Add<&'a ExpPoly> for &'a ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(k.clone(), v.clone());
        }
        out
    }
}

impl<'a> Sub<&'a ExpPoly> for &'a ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(k.clone(), -v.clone());
        }
        out
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        self.scale(&-BigRational::one())
    }
}

impl<'a> Mul<&'a ExpPoly> for &'a ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: &ExpPoly) -> ExpPoly {
        assert_eq!(self.rank, rhs.rank, "rank mismatch");
        let mut out = ExpPoly::zero(self.rank);
        let mut key = vec![0i64; self.rank];
        for (k1, v1) in &self.terms {
            for (k2, v2) in &rhs.terms {
                for (t, (a, b)) in key.iter_mut().zip(k1.iter().zip(k2)) {
                    *t = a + b;
                }
                out.add_term(key.clone(), v1 * v2);
            }
        }
        out
    }
}

/// `Σ_{μ ∈ W_0.x} e^μ`.
pub fn orbit_sum(rs: &RootSystem, x: &[i64]) -> ExpPoly {
    let mut p = ExpPoly::zero(rs.rank());
    for mu in rs.orbit(x) {
        p = &p + &ExpPoly::exp_weight(rs.rank(), &mu);
    }
    p
}

/// `Σ_j w_j Σ_{μ ∈ W_0.λ_j} e^μ`.
pub fn weighted_h(rs: &RootSystem, weights: &[BigRational]) -> ExpPoly {
    let mut p = ExpPoly::zero(rs.rank());
    for (j, w) in weights.iter().enumerate() {
        p = &p + &orbit_sum(rs, &rs.fundamental_weight(j + 1)).scale(w);
    }
    p
}

/// The distinguished `h`, all orbit weights equal to one.
pub fn h_poly(rs: &RootSystem) -> ExpPoly {
    weighted_h(rs, &vec![BigRational::one(); rs.rank()])
}

/// Weyl denominator `Δ = Π_{α>0} (e^{α/2} - e^{-α/2})`.
pub fn weyl_denominator(rs: &RootSystem) -> ExpPoly {
    let r = rs.rank();
    let mut p = ExpPoly::one(r);
    for a in rs.positive_roots() {
        let half = rs.root_weight_coords(a);
        let neg: Key = half.iter().map(|c| -c).collect();
        let mut f = ExpPoly::monomial(r, half, BigRational::one());
        f = &f + &ExpPoly::monomial(r, neg, -BigRational::one());
        p = &p * &f;
    }
    p
}

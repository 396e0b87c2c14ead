//! The root system of type A_r.
//!
//! Lattice vectors are integer coordinates in the basis of fundamental
//! weights `λ_1..λ_r`. The ambient space is the zero-sum hyperplane of
//! `R^{r+1}`, with `α_j = e_j - e_{j+1}` and `λ_j = e_1 + ... + e_j`
//! projected onto it. The Weyl group `S_{r+1}` permutes ambient coordinates.

use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub const MAX_RANK: usize = 6;

/// Rank of the root system, `1 <= r <= MAX_RANK`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootSystem {
    r: usize,
}

/// Positive root `e_i - e_j` with `i < j` (0-based ambient indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Root {
    pub i: usize,
    pub j: usize,
}

impl Root {
    /// `<α, μ>` for `μ` in weight coordinates.
    pub fn pair(&self, x: &[i64]) -> i64 {
        x[self.i..self.j].iter().sum()
    }

    pub fn pair_f64(&self, x: &[f64]) -> f64 {
        x[self.i..self.j].iter().sum()
    }

    /// Height, the number of simple roots in the sum.
    pub fn height(&self) -> usize {
        self.j - self.i
    }
}

impl RootSystem {
    pub fn new(r: usize) -> Result<Self> {
        if r == 0 || r > MAX_RANK {
            return Err(Error::Input(format!(
                "rank must lie in 1..={MAX_RANK}, got {r}"
            )));
        }
        Ok(RootSystem { r })
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn ambient_dim(&self) -> usize {
        self.r + 1
    }

    pub fn num_positive_roots(&self) -> usize {
        self.r * (self.r + 1) / 2
    }

    pub fn weyl_order(&self) -> usize {
        (1..=self.r + 1).product()
    }

    /// Positive roots in lexicographic order of `(i, j)`.
    pub fn positive_roots(&self) -> Vec<Root> {
        let mut out = Vec::with_capacity(self.num_positive_roots());
        for i in 0..=self.r {
            for j in i + 1..=self.r {
                out.push(Root { i, j });
            }
        }
        out
    }

    pub fn check_len(&self, x: &[i64]) -> Result<()> {
        if x.len() != self.r {
            return Err(Error::Input(format!(
                "expected {} coordinates, got {}",
                self.r,
                x.len()
            )));
        }
        Ok(())
    }

    /// `α_j` (1-based `j`) in weight coordinates: row `j` of the Cartan matrix.
    pub fn simple_root(&self, j: usize) -> Vec<i64> {
        self.root_weight_coords(Root { i: j - 1, j })
    }

    pub fn fundamental_weight(&self, j: usize) -> Vec<i64> {
        let mut x = vec![0; self.r];
        x[j - 1] = 1;
        x
    }

    pub fn rho(&self) -> Vec<i64> {
        vec![1; self.r]
    }

    pub fn root_weight_coords(&self, a: Root) -> Vec<i64> {
        let mut amb = vec![0i64; self.r + 1];
        amb[a.i] = 1;
        amb[a.j] = -1;
        weight_from_ambient_diffs(&amb)
    }

    /// Ambient coordinates scaled by `r+1`, so that they are integers.
    pub fn ambient_scaled(&self, x: &[i64]) -> Vec<i64> {
        let n = self.r as i64 + 1;
        let total: i64 = x.iter().enumerate().map(|(j, &c)| (j as i64 + 1) * c).sum();
        let mut out = vec![0i64; self.r + 1];
        let mut tail = 0i64;
        for k in (0..=self.r).rev() {
            if k < self.r {
                tail += x[k];
            }
            out[k] = n * tail - total;
        }
        out
    }

    /// Inverse of [`ambient_scaled`](Self::ambient_scaled).
    pub fn from_ambient_scaled(&self, v: &[i64]) -> Vec<i64> {
        let n = self.r as i64 + 1;
        (0..self.r)
            .map(|k| {
                let d = v[k] - v[k + 1];
                debug_assert_eq!(d % n, 0);
                d / n
            })
            .collect()
    }

    /// Exact Euclidean pairing of two lattice vectors.
    pub fn pairing(&self, a: &[i64], b: &[i64]) -> Ratio<i64> {
        let va = self.ambient_scaled(a);
        let vb = self.ambient_scaled(b);
        let n = self.r as i64 + 1;
        let s: i64 = va.iter().zip(&vb).map(|(p, q)| p * q).sum();
        Ratio::new(s, n * n)
    }

    /// Pairing of real weight-coordinate vectors.
    pub fn pairing_f64(&self, a: &[f64], b: &[f64]) -> f64 {
        let va = AmbientVector::from_weight_coords(self, a);
        let vb = AmbientVector::from_weight_coords(self, b);
        va.dot(&vb)
    }

    /// `2<ρ, λ>`, always an integer.
    pub fn two_rho_pairing(&self, x: &[i64]) -> i64 {
        let n = self.r as i64 + 1;
        x.iter()
            .enumerate()
            .map(|(j, &c)| {
                let k = j as i64 + 1;
                c * k * (n - k)
            })
            .sum()
    }

    pub fn rho_pairing(&self, x: &[i64]) -> Ratio<i64> {
        Ratio::new(self.two_rho_pairing(x), 2)
    }

    /// `|λ| = Σ x_j`, the pairing with the highest coroot.
    pub fn length(&self, x: &[i64]) -> i64 {
        x.iter().sum()
    }

    pub fn is_dominant(&self, x: &[i64]) -> bool {
        x.len() == self.r && x.iter().all(|&c| c >= 0)
    }

    /// `π(λ) = Π_{α>0} <α, λ>` exactly.
    pub fn pi_exact(&self, x: &[i64]) -> BigInt {
        let mut acc = BigInt::one();
        for a in self.positive_roots() {
            acc *= BigInt::from(a.pair(x));
            if acc.is_zero() {
                break;
            }
        }
        acc
    }

    pub fn pi_f64(&self, x: &[f64]) -> f64 {
        self.positive_roots()
            .iter()
            .map(|a| a.pair_f64(x))
            .product()
    }

    /// All elements of `S_{r+1}` in lexicographic order of their one-line notation.
    pub fn weyl_group(&self) -> Vec<WeylElement> {
        let mut perm: Vec<usize> = (0..=self.r).collect();
        let mut out = vec![WeylElement { perm: perm.clone() }];
        while next_permutation(&mut perm) {
            out.push(WeylElement { perm: perm.clone() });
        }
        out
    }

    pub fn act(&self, w: &WeylElement, x: &[i64]) -> Vec<i64> {
        let v = self.ambient_scaled(x);
        self.from_ambient_scaled(&w.act_slice(&v))
    }

    /// The `W_0`-orbit of a lattice vector, sorted and without duplicates.
    pub fn orbit(&self, x: &[i64]) -> Vec<Vec<i64>> {
        let mut v = self.ambient_scaled(x);
        v.sort_unstable();
        let mut out = vec![self.from_ambient_scaled(&v)];
        while next_permutation(&mut v) {
            out.push(self.from_ambient_scaled(&v));
        }
        out.sort();
        out
    }

    /// Dominant representative of the orbit of `x`.
    pub fn dominant(&self, x: &[i64]) -> Vec<i64> {
        let mut v = self.ambient_scaled(x);
        v.sort_unstable_by(|a, b| b.cmp(a));
        self.from_ambient_scaled(&v)
    }

    /// Poincaré polynomial `W_0(t) = Σ_w t^{ℓ(w)}` evaluated at `t`.
    pub fn poincare(&self, t: &BigRational) -> BigRational {
        q_factorial(self.r + 1, t)
    }

    /// Poincaré polynomial of the stabilizer of a dominant weight.
    pub fn stabilizer_poincare(&self, x: &[i64], t: &BigRational) -> BigRational {
        let v = self.ambient_scaled(x);
        let mut acc = BigRational::one();
        let mut k = 0;
        while k < v.len() {
            let mut m = 1;
            while k + m < v.len() && v[k + m] == v[k] {
                m += 1;
            }
            acc *= q_factorial(m, t);
            k += m;
        }
        acc
    }
}

/// `[m]_t! = Π_{k=1}^{m} (1 + t + ... + t^{k-1})`.
fn q_factorial(m: usize, t: &BigRational) -> BigRational {
    let mut acc = BigRational::one();
    for k in 1..=m {
        let mut s = BigRational::zero();
        let mut p = BigRational::one();
        for _ in 0..k {
            s += &p;
            p *= t;
        }
        acc *= s;
    }
    acc
}

/// Weight coordinates `x_k = a_k - a_{k+1}` of an integer ambient vector.
fn weight_from_ambient_diffs(a: &[i64]) -> Vec<i64> {
    a.windows(2).map(|w| w[0] - w[1]).collect()
}

fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// A permutation `w` with `w·e_k = e_{perm[k]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeylElement {
    pub perm: Vec<usize>,
}

impl WeylElement {
    pub fn identity(r: usize) -> Self {
        WeylElement {
            perm: (0..=r).collect(),
        }
    }

    /// Number of inversions.
    pub fn length(&self) -> usize {
        let p = &self.perm;
        let mut n = 0;
        for a in 0..p.len() {
            for b in a + 1..p.len() {
                if p[a] > p[b] {
                    n += 1;
                }
            }
        }
        n
    }

    pub fn sign(&self) -> i64 {
        if self.length().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &WeylElement) -> WeylElement {
        WeylElement {
            perm: other.perm.iter().map(|&k| self.perm[k]).collect(),
        }
    }

    pub fn inverse(&self) -> WeylElement {
        let mut inv = vec![0; self.perm.len()];
        for (k, &p) in self.perm.iter().enumerate() {
            inv[p] = k;
        }
        WeylElement { perm: inv }
    }

    pub fn act_slice<T: Copy + Default>(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); v.len()];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = v[k];
        }
        out
    }
}

/// A real point of the ambient zero-sum hyperplane.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientVector {
    pub coords: Vec<f64>,
}

impl AmbientVector {
    pub fn zero(rs: &RootSystem) -> Self {
        AmbientVector {
            coords: vec![0.0; rs.ambient_dim()],
        }
    }

    pub fn from_weight_coords(rs: &RootSystem, x: &[f64]) -> Self {
        let r = rs.rank();
        let n = r as f64 + 1.0;
        let total: f64 = x
            .iter()
            .enumerate()
            .map(|(j, &c)| (j as f64 + 1.0) * c)
            .sum();
        let mut coords = vec![0.0; r + 1];
        let mut tail = 0.0;
        for k in (0..=r).rev() {
            if k < r {
                tail += x[k];
            }
            coords[k] = tail - total / n;
        }
        AmbientVector { coords }
    }

    /// From coordinates `z^j = <λ_j, z>` in the basis of simple roots.
    pub fn from_root_coords(rs: &RootSystem, y: &[f64]) -> Self {
        let r = rs.rank();
        let coords = (0..=r)
            .map(|k| {
                let hi = if k < r { y[k] } else { 0.0 };
                let lo = if k > 0 { y[k - 1] } else { 0.0 };
                hi - lo
            })
            .collect();
        AmbientVector { coords }
    }

    /// `z_j = <α_j, z>`.
    pub fn weight_coords(&self) -> Vec<f64> {
        self.coords.windows(2).map(|w| w[0] - w[1]).collect()
    }

    /// `z^j = <λ_j, z>`.
    pub fn root_coords(&self) -> Vec<f64> {
        let r = self.coords.len() - 1;
        let mut acc = 0.0;
        (0..r)
            .map(|k| {
                acc += self.coords[k];
                acc
            })
            .collect()
    }

    pub fn dot(&self, other: &AmbientVector) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn coordinate_sum(&self) -> f64 {
        self.coords.iter().sum()
    }

    pub fn scale(&self, s: f64) -> AmbientVector {
        AmbientVector {
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }

    pub fn permuted(&self, w: &WeylElement) -> AmbientVector {
        AmbientVector {
            coords: w.act_slice(&self.coords),
        }
    }
}

/// `<μ, z>` for `μ` in weight coordinates and `z` given by zero-sum ambient
/// coordinates (real or complex).
pub fn pair_weight<T>(x: &[i64], z: &[T]) -> T
where
    T: Copy + Zero + Add<Output = T> + Mul<f64, Output = T>,
{
    let mut tail = 0i64;
    let mut acc = T::zero();
    for k in (0..x.len()).rev() {
        tail += x[k];
        if tail != 0 {
            acc = acc + z[k] * tail as f64;
        }
    }
    acc
}

/// `<α, z>` for the root `e_i - e_j`.
pub fn pair_root<T>(a: Root, z: &[T]) -> T
where
    T: Copy + std::ops::Sub<Output = T>,
{
    z[a.i] - z[a.j]
}

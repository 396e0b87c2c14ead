//! Exact checks of the product and differentiation formulas for `h`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{h_poly, int, orbit_sum, weyl_denominator, ExpPoly};
use crate::root_system::RootSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Identity {
    ProductFormulaA2,
    DifferentiationFormulaA2,
    GeneralDifferentiationRankTwo,
    ProductDiffTilde,
    ProductFormulaAr,
    DifferentiationFormula1Ar,
    DifferentiationFormula2Ar,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub identity: Identity,
    pub params: String,
    pub passed: bool,
    /// First lattice point (doubled weight coordinates) where the sides differ.
    pub witness: Option<String>,
    /// Recovered constants: `c_k` for the first general formula, `d_n` for the second.
    pub values: Vec<String>,
}

fn compare(identity: Identity, params: String, lhs: &ExpPoly, rhs: &ExpPoly) -> IdentityReport {
    let witness = lhs
        .first_difference(rhs)
        .map(|(k, a, b)| format!("{k:?}: lhs {a}, rhs {b}"));
    IdentityReport {
        identity,
        params,
        passed: witness.is_none(),
        witness,
        values: Vec::new(),
    }
}

fn factorial_ratio(hi: u64, lo: u64) -> BigInt {
    // hi! / lo!
    (lo + 1..=hi).fold(BigInt::one(), |acc, k| acc * k)
}

/// `1 + e^μ` for `μ` in weight coordinates.
fn one_plus_exp(rank: usize, x: &[i64]) -> ExpPoly {
    &ExpPoly::one(rank) + &ExpPoly::exp_weight(rank, x)
}

/// `h + 2 = (e^{λ_1} + 1)(e^{-λ_2} + 1)(e^{λ_2 - λ_1} + 1)` in rank two.
pub fn product_formula_a2() -> IdentityReport {
    let rs = RootSystem::new(2).expect("rank 2");
    let lhs = &h_poly(&rs) + &ExpPoly::constant(2, int(2));
    let rhs =
        &(&one_plus_exp(2, &[1, 0]) * &one_plus_exp(2, &[0, -1])) * &one_plus_exp(2, &[-1, 1]);
    compare(Identity::ProductFormulaA2, "r=2".into(), &lhs, &rhs)
}

/// `π(∂) h^{n+3} = (n+3)^2 (n+2) [h + 2(n+1)/(n+3)] h^n Δ`.
pub fn differentiation_formula_a2(n: u32) -> IdentityReport {
    let rs = RootSystem::new(2).expect("rank 2");
    let h = h_poly(&rs);
    let delta = weyl_denominator(&rs);
    let lhs = h.pow(n + 3).pi_partial(&rs);
    let m = i64::from(n);
    let shift = ExpPoly::constant(
        2,
        BigRational::new(BigInt::from(2 * (m + 1)), BigInt::from(m + 3)),
    );
    let bracket = &h + &shift;
    let rhs = (&(&bracket * &h.pow(n)) * &delta).scale(&int((m + 3) * (m + 3) * (m + 2)));
    compare(
        Identity::DifferentiationFormulaA2,
        format!("n={n}"),
        &lhs,
        &rhs,
    )
}

/// The two orbit sums of rank two, `h_1 = Σ_{W_0.λ_1} e^μ` and `h_2 = Σ_{W_0.λ_2} e^μ`.
fn rank_two_orbits() -> (RootSystem, ExpPoly, ExpPoly) {
    let rs = RootSystem::new(2).expect("rank 2");
    let h1 = orbit_sum(&rs, &[1, 0]);
    let h2 = orbit_sum(&rs, &[0, 1]);
    (rs, h1, h2)
}

/// Lemma with general weights: for `h = c_1 h_1 + c_2 h_2`,
/// `π(∂) h^n = c_1 c_2 n^2 (n-1) h^{n-2} Δ + (c_1^3 + c_2^3) n (n-1) (n-2) h^{n-3} Δ`.
pub fn general_differentiation_rank_two(
    c1: &BigRational,
    c2: &BigRational,
    n: u32,
) -> IdentityReport {
    let (rs, h1, h2) = rank_two_orbits();
    let h = &h1.scale(c1) + &h2.scale(c2);
    let delta = weyl_denominator(&rs);
    let lhs = h.pow(n).pi_partial(&rs);
    let m = i64::from(n);
    let mut rhs = ExpPoly::zero(2);
    let a = c1 * c2 * int(m * m * (m - 1));
    if !a.is_zero() {
        rhs = &rhs + &(&h.pow(n - 2) * &delta).scale(&a);
    }
    let b = (c1 * c1 * c1 + c2 * c2 * c2) * int(m * (m - 1) * (m - 2));
    if !b.is_zero() {
        rhs = &rhs + &(&h.pow(n - 3) * &delta).scale(&b);
    }
    compare(
        Identity::GeneralDifferentiationRankTwo,
        format!("c1={c1}, c2={c2}, n={n}"),
        &lhs,
        &rhs,
    )
}

/// `h̃ = c_1 c_2 h + c_1^3 + c_2^3` factors into three binomials, and
/// `π(∂) h̃^n = c_1^3 c_2^3 n^2 (n-1) h̃^{n-2} Δ`.
pub fn product_diff_tilde(c1: &BigRational, c2: &BigRational, n: u32) -> IdentityReport {
    let (rs, h1, h2) = rank_two_orbits();
    let h = &h1.scale(c1) + &h2.scale(c2);
    let ht = &h.scale(&(c1 * c2)) + &ExpPoly::constant(2, c1 * c1 * c1 + c2 * c2 * c2);
    let params = format!("c1={c1}, c2={c2}, n={n}");

    // Binomials c_2 e^{μ/2} + c_1 e^{-μ/2} for μ = λ_1, -λ_2, λ_2 - λ_1.
    let binom = |key: [i64; 2]| {
        &ExpPoly::monomial(2, key.to_vec(), c2.clone())
            + &ExpPoly::monomial(2, key.iter().map(|c| -c).collect(), c1.clone())
    };
    let prod = &(&binom([1, 0]) * &binom([0, -1])) * &binom([-1, 1]);
    let first = compare(Identity::ProductDiffTilde, params.clone(), &ht, &prod);
    if !first.passed {
        return first;
    }

    let delta = weyl_denominator(&rs);
    let lhs = ht.pow(n).pi_partial(&rs);
    let m = i64::from(n);
    let coef = c1 * c1 * c1 * c2 * c2 * c2 * int(m * m * (m - 1));
    let rhs = if coef.is_zero() {
        ExpPoly::zero(2)
    } else {
        (&ht.pow(n - 2) * &delta).scale(&coef)
    };
    compare(Identity::ProductDiffTilde, params, &lhs, &rhs)
}

/// `h + 2 = Π_{j=1}^{r+1} (e^{λ_j - λ_{j-1}} + 1)` with `λ_0 = λ_{r+1} = 0`.
pub fn product_formula_ar(r: usize) -> IdentityReport {
    let rs = match RootSystem::new(r) {
        Ok(rs) => rs,
        Err(e) => {
            return IdentityReport {
                identity: Identity::ProductFormulaAr,
                params: format!("r={r}"),
                passed: false,
                witness: Some(e.to_string()),
                values: Vec::new(),
            }
        }
    };
    let lhs = &h_poly(&rs) + &ExpPoly::constant(r, int(2));
    let fw = |j: usize| {
        if j == 0 || j == r + 1 {
            vec![0; r]
        } else {
            rs.fundamental_weight(j)
        }
    };
    let mut rhs = ExpPoly::one(r);
    for j in 1..=r + 1 {
        let d: Vec<i64> = fw(j).iter().zip(fw(j - 1)).map(|(a, b)| a - b).collect();
        rhs = &rhs * &one_plus_exp(r, &d);
    }
    compare(Identity::ProductFormulaAr, format!("r={r}"), &lhs, &rhs)
}

/// Solves `target = Σ_k x_k columns[k]` exactly; `Err` names the failure.
fn solve_exact(columns: &[ExpPoly], target: &ExpPoly) -> Result<Vec<BigRational>, String> {
    let m = columns.len();
    let mut keys: Vec<&Vec<i64>> = target.terms().keys().collect();
    for c in columns {
        keys.extend(c.terms().keys());
    }
    keys.sort();
    keys.dedup();
    let mut rows: Vec<Vec<BigRational>> = keys
        .iter()
        .map(|k| {
            let mut row: Vec<BigRational> = columns.iter().map(|c| c.coeff(k)).collect();
            row.push(target.coeff(k));
            row
        })
        .collect();

    let mut pivot_rows = Vec::with_capacity(m);
    let mut used = vec![false; rows.len()];
    for col in 0..m {
        let Some(p) = (0..rows.len()).find(|&i| !used[i] && !rows[i][col].is_zero()) else {
            return Err("basis not independent".into());
        };
        used[p] = true;
        let pivot = rows[p].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != p && !row[col].is_zero() {
                let f = &row[col] / &pivot[col];
                for j in col..=m {
                    let t = &f * &pivot[j];
                    row[j] -= t;
                }
            }
        }
        pivot_rows.push(p);
    }
    Ok((0..m)
        .map(|col| &rows[pivot_rows[col]][m] / &rows[pivot_rows[col]][col])
        .collect())
}

/// Solves for the integer coefficients `c_k` in
/// `π(∂) h^{n+N} = ((n+N)!/n!) r_n(h) h^n Δ`, `N = |R^+|`, where
/// `r_n(h) = (h+2)^{N-r} + Σ_{r<=k<N} c_k (n!/(n+N-k)!) (h+2)^{k-r} h^{N-k}`,
/// then re-verifies the solved identity exactly.
pub fn differentiation_formula_1_ar(r: usize, n: u32) -> IdentityReport {
    let params = format!("r={r}, n={n}");
    let fail = |w: String| IdentityReport {
        identity: Identity::DifferentiationFormula1Ar,
        params: params.clone(),
        passed: false,
        witness: Some(w),
        values: Vec::new(),
    };
    let rs = match RootSystem::new(r) {
        Ok(rs) => rs,
        Err(e) => return fail(e.to_string()),
    };
    let big_n = rs.num_positive_roots() as u32;
    let h = h_poly(&rs);
    let hp2 = &h + &ExpPoly::constant(r, int(2));
    let delta = weyl_denominator(&rs);
    let hn_delta = &h.pow(n) * &delta;

    let lhs = h.pow(n + big_n).pi_partial(&rs);
    let n64 = u64::from(n);
    let nn = u64::from(big_n);
    let lead = (&hp2.pow(big_n - r as u32) * &hn_delta)
        .scale(&BigRational::from_integer(factorial_ratio(n64 + nn, n64)));
    let target = &lhs - &lead;

    // column k: ((n+N)!/(n+N-k)!) (h+2)^{k-r} h^{N-k} h^n Δ
    let columns: Vec<ExpPoly> = (r as u32..big_n)
        .map(|k| {
            let f = factorial_ratio(n64 + nn, n64 + nn - u64::from(k));
            (&(&hp2.pow(k - r as u32) * &h.pow(big_n - k)) * &hn_delta)
                .scale(&BigRational::from_integer(f))
        })
        .collect();

    let coeffs = match solve_exact(&columns, &target) {
        Ok(c) => c,
        Err(w) => return fail(w),
    };
    let mut rebuilt = lead.clone();
    for (c, col) in coeffs.iter().zip(&columns) {
        rebuilt = &rebuilt + &col.scale(c);
    }
    let mut report = compare(Identity::DifferentiationFormula1Ar, params, &lhs, &rebuilt);
    if report.passed && !coeffs.iter().all(|c| c.is_integer()) {
        report.passed = false;
        report.witness = Some("non-integral coefficient".into());
    }
    report.values = coeffs.iter().map(|c| c.to_string()).collect();
    report
}

/// Computes `d_n` in `π(∂)(h+2)^{n+r} = d_n (h+2)^n Δ` and checks the equality.
pub fn differentiation_formula_2_ar(r: usize, n: u32) -> IdentityReport {
    let params = format!("r={r}, n={n}");
    let rs = match RootSystem::new(r) {
        Ok(rs) => rs,
        Err(e) => {
            return IdentityReport {
                identity: Identity::DifferentiationFormula2Ar,
                params,
                passed: false,
                witness: Some(e.to_string()),
                values: Vec::new(),
            }
        }
    };
    let hp2 = &h_poly(&rs) + &ExpPoly::constant(r, int(2));
    let lhs = hp2.pow(n + r as u32).pi_partial(&rs);
    let base = &hp2.pow(n) * &weyl_denominator(&rs);
    let (k, b) = base.leading().expect("nonzero");
    let d = lhs.coeff(k) / b;
    let mut report = compare(
        Identity::DifferentiationFormula2Ar,
        params,
        &lhs,
        &base.scale(&d),
    );
    report.values = vec![d.to_string()];
    report
}

/// `d_n = Π_{i=1}^{r} m (m-1) ... (m-i+1)` with `m = n + r`.
///
/// Writing `h + 2 = Π_k (1 + u_k)` in ambient exponentials, `π(∂)` acts on
/// `Π_k f(z_k)` as the Wronskian-type determinant `det[f^{(i)}(z_k)]`. With
/// `f = (1+e^z)^m` each row `i` is `m(m-1)...(m-i+1) u^i (1+u)^{m-i}` plus
/// lower rows, so the determinant is triangular up to a Vandermonde factor.
pub fn dn_closed_form(r: usize, n: u64) -> BigInt {
    let m = n + r as u64;
    let mut acc = BigInt::one();
    for i in 1..=r as u64 {
        for t in 0..i {
            acc *= m - t;
        }
    }
    acc
}

/// Least-squares slope of `log d_n` against `log n` over `n in lo..=hi`.
pub fn dn_growth_exponent(r: usize, lo: u64, hi: u64) -> f64 {
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .map(|n| {
            let d = dn_closed_form(r, n);
            ((n as f64).ln(), crate::bigmath::ln_bigint(&d))
        })
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// A 4x4 grid of positive rationals for `(c_1, c_2)`.
pub fn coefficient_grid() -> Vec<(BigRational, BigRational)> {
    let vals = [(1, 1), (1, 2), (2, 3), (3, 1)];
    let mut out = Vec::new();
    for a in vals {
        for b in vals {
            out.push((
                BigRational::new(a.0.into(), a.1.into()),
                BigRational::new(b.0.into(), b.1.into()),
            ));
        }
    }
    out
}

/// Every identity of the rank-two suite (or the general-rank one when `r != 2`).
pub fn run_suite(r: usize, n_max: u32) -> Vec<IdentityReport> {
    let mut out = Vec::new();
    if r == 2 {
        out.push(product_formula_a2());
        for n in 0..=n_max {
            out.push(differentiation_formula_a2(n));
        }
        for (c1, c2) in coefficient_grid() {
            for n in 0..=n_max {
                out.push(general_differentiation_rank_two(&c1, &c2, n));
                out.push(product_diff_tilde(&c1, &c2, n));
            }
        }
    }
    out.push(product_formula_ar(r));
    if (2..=3).contains(&r) {
        for n in 0..=n_max.min(5) {
            out.push(differentiation_formula_1_ar(r, n));
            out.push(differentiation_formula_2_ar(r, n));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exppoly::rat;

    #[test]
    fn first_derivative_of_weighted_h() {
        let (rs, h1, h2) = rank_two_orbits();
        let (c1, c2) = (rat(2, 3), rat(1, 5));
        let h = &h1.scale(&c1) + &h2.scale(&c2);
        let lhs = h.directional_derivative(&rs, &rs.simple_root(1));
        // α_1/2 = λ_1 - λ_2/2, doubled (2, -1)
        let a = &ExpPoly::monomial(2, vec![2, -1], int(1))
            + &ExpPoly::monomial(2, vec![-2, 1], int(-1));
        let b = &ExpPoly::monomial(2, vec![0, 1], c1) + &ExpPoly::monomial(2, vec![0, -1], c2);
        assert_eq!(lhs, &a * &b);
    }

    #[test]
    fn small_powers() {
        let rs = RootSystem::new(2).unwrap();
        let h = h_poly(&rs);
        let delta = weyl_denominator(&rs);
        assert!(ExpPoly::one(2).pi_partial(&rs).is_zero());
        assert!(h.pi_partial(&rs).is_zero());
        assert_eq!(h.pow(2).pi_partial(&rs), delta.scale(&int(4)));
        let rhs = (&(&h + &ExpPoly::constant(2, rat(2, 3))) * &delta).scale(&int(18));
        assert_eq!(h.pow(3).pi_partial(&rs), rhs);
    }

    #[test]
    fn closed_form_dn_rank_two() {
        for n in 0..6u64 {
            let m = n + 2;
            assert_eq!(dn_closed_form(2, n), BigInt::from(m * m * (m - 1)));
        }
    }

    #[test]
    fn first_general_formula_rank_two() {
        for n in 0..=5 {
            let rep = differentiation_formula_1_ar(2, n);
            assert!(rep.passed, "{rep:?}");
            assert_eq!(rep.values, vec!["2".to_string()]);
        }
    }

    #[test]
    fn first_general_formula_rank_three() {
        for n in 0..=2 {
            let rep = differentiation_formula_1_ar(3, n);
            assert!(rep.passed, "{rep:?}");
            assert_eq!(rep.values, vec!["18", "30", "11"]);
        }
    }

    #[test]
    fn second_general_formula_matches_closed_form() {
        for (r, top) in [(2usize, 5u32), (3, 3)] {
            for n in 0..=top {
                let rep = differentiation_formula_2_ar(r, n);
                assert!(rep.passed, "{rep:?}");
                assert_eq!(
                    rep.values,
                    vec![dn_closed_form(r, u64::from(n)).to_string()]
                );
            }
        }
    }

    #[test]
    fn product_formulas() {
        assert!(product_formula_a2().passed);
        for r in 1..=4 {
            assert!(product_formula_ar(r).passed, "r={r}");
        }
    }

    #[test]
    fn growth_exponent_is_positive_root_count() {
        let e2 = dn_growth_exponent(2, 200, 400);
        let e3 = dn_growth_exponent(3, 200, 400);
        assert!((e2 - 3.0).abs() < 0.05, "{e2}");
        assert!((e3 - 6.0).abs() < 0.1, "{e3}");
    }
}

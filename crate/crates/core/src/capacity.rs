//! Closed-form capacities and recursive outer bounds in exact arithmetic.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn ratio(a: i64, b: i64) -> Rational {
    Rational::new(BigInt::from(a), BigInt::from(b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CapacityKind {
    /// Replicated storage, no collusion.
    Pir,
    /// Replicated storage, `t` colluding servers.
    Tpir,
    /// MDS-coded storage, no collusion.
    MdsPir,
    /// The conjectured coded-colluding expression with ratio `(t + k_c - 1) / n`.
    Fghk,
    /// The exact two-message value for `k_c = n - 1`.
    Theorem3,
}

fn check_params(k: u32, n: u32, t: u32, k_c: u32) -> Result<()> {
    if k == 0 || n == 0 || t == 0 || k_c == 0 || t > n || k_c > n {
        return Err(Error::BadParams(format!("(K,N,T,K_c) = ({k},{n},{t},{k_c})")));
    }
    Ok(())
}

/// `(sum_{i<k} r^i)^{-1}`.
pub fn geometric_inverse(r: &Rational, k: u32) -> Rational {
    let mut sum = Rational::zero();
    let mut term = Rational::one();
    for _ in 0..k {
        sum += &term;
        term *= r;
    }
    sum.recip()
}

/// Capacity for the given regime. Unused parameters are ignored but still validated.
pub fn capacity_formula(kind: CapacityKind, k: u32, n: u32, t: u32, k_c: u32) -> Result<Rational> {
    check_params(k, n, t, k_c)?;
    let n_i = n as i64;
    Ok(match kind {
        CapacityKind::Pir => geometric_inverse(&ratio(1, n_i), k),
        CapacityKind::Tpir => geometric_inverse(&ratio(t as i64, n_i), k),
        CapacityKind::MdsPir => geometric_inverse(&ratio(k_c as i64, n_i), k),
        CapacityKind::Fghk => {
            if t + k_c - 1 > n {
                return Err(Error::BadParams(format!("T + K_c - 1 = {} exceeds N = {n}", t + k_c - 1)));
            }
            geometric_inverse(&ratio((t + k_c - 1) as i64, n_i), k)
        }
        CapacityKind::Theorem3 => theorem3(n, t)?,
    })
}

/// `(n^2 - n) / (2n^2 - 3n + t)` for `2 <= n`, `1 <= t <= n`.
pub fn theorem3(n: u32, t: u32) -> Result<Rational> {
    if n < 2 || t == 0 || t > n {
        return Err(Error::BadParams(format!("theorem3 needs 1 <= T <= N, N >= 2 (N={n}, T={t})")));
    }
    if t == n {
        return Ok(ratio(1, 2));
    }
    let n = n as i64;
    Ok(ratio(n * n - n, 2 * n * n - 3 * n + t as i64))
}

/// Outer bound values `C(1), ..., C(kmax)` for the (K,4,2,2) family.
pub fn outer_bound_2422_series(kmax: u32) -> Vec<Rational> {
    let mut out = Vec::with_capacity(kmax as usize);
    let mut prev = Rational::one();
    let two_thirds = ratio(2, 3);
    let mut power = Rational::one(); // (2/3)^(K-1)
    for kk in 1..=kmax {
        if kk == 1 {
            prev = Rational::one();
        } else {
            power *= &two_thirds;
            let denom = Rational::one()
                + ratio(3, 8) / &prev
                + (Rational::one() - &power) * ratio(3, 4);
            prev = denom.recip();
        }
        out.push(prev.clone());
    }
    out
}

pub fn outer_bound_2422_family(k: u32) -> Result<Rational> {
    if k == 0 {
        return Err(Error::BadParams("K >= 1".into()));
    }
    Ok(outer_bound_2422_series(k).pop().expect("k >= 1"))
}

pub fn bound_2422_limit() -> Rational {
    ratio(5, 14)
}

fn general_terms(n: u32, t: u32, k_c: u32) -> Result<(Rational, Rational)> {
    check_params(1, n, t, k_c)?;
    if n >= t + k_c {
        return Err(Error::BadParams(format!("bound needs N < T + K_c (N={n}, T={t}, K_c={k_c})")));
    }
    let a = ratio((n - t) as i64, n as i64);
    let b = Rational::one() - ratio((n - t) as i64, k_c as i64);
    Ok((a, b))
}

/// Values `C(1), ..., C(kmax)` of the general recursive outer bound.
pub fn outer_bound_general_series(kmax: u32, n: u32, t: u32, k_c: u32) -> Result<Vec<Rational>> {
    let (a, b) = general_terms(n, t, k_c)?;
    let mut out = Vec::with_capacity(kmax as usize);
    let mut prev = Rational::one();
    for kk in 1..=kmax {
        if kk > 1 {
            let denom = Rational::one() + &a / &prev + Rational::from_integer(BigInt::from(kk - 1)) * &b;
            prev = denom.recip();
        }
        out.push(prev.clone());
    }
    Ok(out)
}

pub fn outer_bound_general(k: u32, n: u32, t: u32, k_c: u32) -> Result<Rational> {
    if k == 0 {
        return Err(Error::BadParams("K >= 1".into()));
    }
    Ok(outer_bound_general_series(k, n, t, k_c)?.pop().expect("k >= 1"))
}

/// Floating-point evaluation of the same recursion, for large `k`.
pub fn outer_bound_general_f64(k: u32, n: u32, t: u32, k_c: u32) -> Result<f64> {
    let (a, b) = general_terms(n, t, k_c)?;
    let a = to_f64(&a);
    let b = to_f64(&b);
    let mut c = 1.0f64;
    for kk in 2..=k {
        c = 1.0 / (1.0 + a / c + (kk - 1) as f64 * b);
    }
    Ok(c)
}

/// Limit of `K * C(K)`: `(t/n) * k_c / (k_c - n + t)`.
pub fn general_scaled_limit(n: u32, t: u32, k_c: u32) -> Result<Rational> {
    let (a, b) = general_terms(n, t, k_c)?;
    Ok((Rational::one() - a) / b)
}

/// Smallest `K <= kmax` with `|C(K) - limit| < tol`, with that value.
pub fn first_within(series: &[Rational], limit: &Rational, tol: &Rational) -> Option<(u32, Rational)> {
    series
        .iter()
        .enumerate()
        .find(|(_, v)| (*v - limit).abs() < *tol)
        .map(|(i, v)| (i as u32 + 1, v.clone()))
}

pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// One row of the two-message, four-server comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseRow {
    pub k: u32,
    pub n: u32,
    pub t: u32,
    pub k_c: u32,
    pub kind: CapacityKind,
    pub value: Rational,
}

/// Capacities for (2,4,2,3), (2,4,3,2), (2,4,1,3), (2,4,3,1).
pub fn four_case_table() -> Vec<CaseRow> {
    let cases = [
        (2, 4, 2, 3, CapacityKind::Theorem3),
        (2, 4, 3, 2, CapacityKind::Tpir),
        (2, 4, 1, 3, CapacityKind::MdsPir),
        (2, 4, 3, 1, CapacityKind::Tpir),
    ];
    cases
        .iter()
        .map(|&(k, n, t, k_c, kind)| CaseRow {
            k,
            n,
            t,
            k_c,
            kind,
            value: capacity_formula(kind, k, n, t, k_c).expect("valid case"),
        })
        .collect()
}

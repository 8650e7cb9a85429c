//! Two-sample chi-square homogeneity test on categorical counts.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

/// Cells whose pooled total falls below this are merged into one cell, so
/// every expected count is at least 5 with equal sample sizes.
pub const MIN_CELL_TOTAL: u64 = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Cells after pooling.
    pub cells: usize,
}

/// ln Γ(x) for x > 0.
fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Regularized upper incomplete gamma Q(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..10_000 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if libm::fabs(del) < libm::fabs(sum) * 1e-16 {
            break;
        }
    }
    sum * libm::exp(-x + a * libm::log(x) - ln_gamma(a))
}

fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if libm::fabs(del - 1.0) < 1e-16 {
            break;
        }
    }
    libm::exp(-x + a * libm::log(x) - ln_gamma(a)) * h
}

/// Upper tail of the chi-square distribution.
pub fn chi2_sf(x: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    gamma_q(df as f64 / 2.0, x / 2.0)
}

/// Homogeneity of two samples of categorical outcomes.
pub fn chi_square_two_sample<K: Ord>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> ChiSquare {
    let mut cells: Vec<(u64, u64)> = Vec::new();
    let mut pooled = (0u64, 0u64);
    let mut push = |x: u64, y: u64| {
        if x + y < MIN_CELL_TOTAL {
            pooled.0 += x;
            pooled.1 += y;
        } else {
            cells.push((x, y));
        }
    };
    let mut ia = a.iter().peekable();
    let mut ib = b.iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (None, None) => break,
            (Some((ka, &va)), Some((kb, &vb))) => match ka.cmp(kb) {
                core::cmp::Ordering::Less => {
                    push(va, 0);
                    ia.next();
                }
                core::cmp::Ordering::Greater => {
                    push(0, vb);
                    ib.next();
                }
                core::cmp::Ordering::Equal => {
                    push(va, vb);
                    ia.next();
                    ib.next();
                }
            },
            (Some((_, &va)), None) => {
                push(va, 0);
                ia.next();
            }
            (None, Some((_, &vb))) => {
                push(0, vb);
                ib.next();
            }
        }
    }
    if pooled.0 + pooled.1 > 0 {
        if pooled.0 + pooled.1 >= MIN_CELL_TOTAL || cells.is_empty() {
            cells.push(pooled);
        } else {
            // too small on its own: fold into the smallest cell
            let i = (0..cells.len()).min_by_key(|&i| cells[i].0 + cells[i].1).expect("non-empty");
            cells[i].0 += pooled.0;
            cells[i].1 += pooled.1;
        }
    }
    let na: u64 = cells.iter().map(|c| c.0).sum();
    let nb: u64 = cells.iter().map(|c| c.1).sum();
    let n = (na + nb) as f64;
    let mut stat = 0.0;
    if na > 0 && nb > 0 {
        for &(x, y) in &cells {
            let t = (x + y) as f64;
            let ea = t * na as f64 / n;
            let eb = t * nb as f64 / n;
            stat += (x as f64 - ea) * (x as f64 - ea) / ea + (y as f64 - eb) * (y as f64 - eb) / eb;
        }
    }
    let df = cells.len().saturating_sub(1);
    ChiSquare { statistic: stat, df, p_value: chi2_sf(stat, df), cells: cells.len() }
}

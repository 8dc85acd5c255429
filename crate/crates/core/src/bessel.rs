//! Integer-order Bessel functions of the first kind.
//!
//! Miller's backward recurrence
//! `J_{k-1}(x) = (2k / x) J_k(x) - J_{k+1}(x)`, started from an arbitrary
//! seed well above the wanted order and normalised with
//! `J_0 + 2 sum_{k>=1} J_{2k} = 1`. Small arguments use the power series.

use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 500;
pub const MAX_ARGUMENT: f64 = 1.0e4;

/// Below this argument the power series converges in a handful of terms and
/// the recurrence coefficients `2k / x` get large.
const SERIES_BELOW: f64 = 1.0e-2;

const RESCALE_ABOVE: f64 = 1.0e250;

/// `J_n(x)` for `x >= 0`, `|n| <= 500`.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    let order = n.unsigned_abs();
    if order > MAX_ORDER {
        return Err(Error::BesselRange(format!("order {n} exceeds {MAX_ORDER}")));
    }
    let v = bessel_j_orders(order, x)?[order as usize];
    Ok(if n < 0 && order % 2 == 1 { -v } else { v })
}

/// `[J_0(x), J_1(x), ..., J_{max_order}(x)]` from a single recurrence.
pub fn bessel_j_orders(max_order: u32, x: f64) -> Result<Vec<f64>> {
    if max_order > MAX_ORDER {
        return Err(Error::BesselRange(format!(
            "order {max_order} exceeds {MAX_ORDER}"
        )));
    }
    if !(x >= 0.0) || x > MAX_ARGUMENT {
        return Err(Error::BesselRange(format!(
            "argument {x} outside [0, {MAX_ARGUMENT}]"
        )));
    }
    let len = max_order as usize + 1;
    if x == 0.0 {
        let mut out = vec![0.0; len];
        out[0] = 1.0;
        return Ok(out);
    }
    if x < SERIES_BELOW {
        return Ok((0..=max_order).map(|n| series(n, x)).collect());
    }
    Ok(miller(max_order, x))
}

fn start_order(max_order: u32, x: f64) -> usize {
    let top = f64::from(max_order).max(x);
    let m = (top + 20.0 + (40.0 * top).sqrt()).ceil() as usize;
    m + (m % 2)
}

fn miller(max_order: u32, x: f64) -> Vec<f64> {
    let start = start_order(max_order, x);
    let mut vals = vec![0.0_f64; start + 2];
    vals[start] = 1.0;
    for k in (1..=start).rev() {
        vals[k - 1] = (2.0 * k as f64 / x) * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > RESCALE_ABOVE {
            for v in &mut vals[k - 1..] {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    let even_tail: f64 = vals.iter().skip(2).step_by(2).sum();
    let norm = vals[0] + 2.0 * even_tail;
    vals.truncate(max_order as usize + 1);
    for v in &mut vals {
        *v /= norm;
    }
    vals
}

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= half / f64::from(i);
    }
    let mut sum = term;
    let q = -half * half;
    for k in 1..30 {
        term *= q / (f64::from(k) * f64::from(n + k));
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        for n in [-3, -1, 1, 2, 7] {
            assert_eq!(bessel_j(n, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn reference_values() {
        // 40-digit references
        assert!((bessel_j(1, 1.0).unwrap() - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_j(0, 1.0).unwrap().powi(2) - 0.585_527_499_513_664).abs() < 1e-15);
        assert!((bessel_j(-1, 1.0).unwrap() + 0.440_050_585_744_933_5).abs() < 1e-15);
    }

    #[test]
    fn series_and_recurrence_agree_at_the_switch() {
        let below = bessel_j_orders(6, SERIES_BELOW * 0.999_999).unwrap();
        let above = miller(6, SERIES_BELOW * 0.999_999);
        for (a, b) in below.iter().zip(&above) {
            assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300), "{a} {b}");
        }
    }

    #[test]
    fn completeness() {
        for x in [0.5, 1.0, 2.5, 5.0, 40.0] {
            let j = bessel_j_orders(80, x).unwrap();
            let s = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
            assert!((s - 1.0).abs() < 1e-13, "x={x} s={s}");
        }
    }

    #[test]
    fn large_order_decays() {
        let v = bessel_j(500, 1.0).unwrap();
        assert!((0.0..1e-300).contains(&v));
    }

    #[test]
    fn range_guards() {
        assert!(bessel_j(501, 1.0).is_err());
        assert!(bessel_j(1, -1.0).is_err());
        assert!(bessel_j(1, f64::NAN).is_err());
        assert!(bessel_j(1, 1e5).is_err());
    }
}

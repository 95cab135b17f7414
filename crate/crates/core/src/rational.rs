//! Exact rational scalars.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational used for lengths, constants and quasicharacter values.
pub type Q = Ratio<i64>;

pub fn q(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Parses `p/q`, a plain integer, or a finite decimal such as `2.5`.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::input(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(Error::input(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let whole: i64 = if int.is_empty() || int == "-" || int == "+" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let den = 10i64.pow(frac.len() as u32);
        let num: i64 = frac.parse().map_err(|_| bad())?;
        let mag = whole.abs() * den + num;
        return Ok(Q::new(if negative { -mag } else { mag }, den));
    }
    s.parse::<i64>().map(Q::from_integer).map_err(|_| bad())
}

/// `p` for integers, `p/q` otherwise.
pub fn fmt_q(x: &Q) -> String {
    x.to_string()
}

pub fn abs(x: Q) -> Q {
    x.abs()
}

pub fn max(a: Q, b: Q) -> Q {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn min(a: Q, b: Q) -> Q {
    if a <= b {
        a
    } else {
        b
    }
}

/// Least common multiple of the denominators, the unit in which a set of
/// rationals becomes integral.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Q>) -> i64 {
    values
        .into_iter()
        .fold(1i64, |acc, v| acc.lcm(v.denom()))
}

pub fn is_nonnegative(x: &Q) -> bool {
    !x.is_negative()
}

pub fn is_zero(x: &Q) -> bool {
    x.is_zero()
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[Q], ys: &[Q]) -> Option<Q> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nq = q(n as i64);
    let mx = xs.iter().copied().sum::<Q>() / nq;
    let my = ys.iter().copied().sum::<Q>() / nq;
    let mut sxy = Q::zero();
    let mut sxx = Q::zero();
    for (x, y) in xs.iter().zip(ys) {
        sxy += (*x - mx) * (*y - my);
        sxx += (*x - mx) * (*x - mx);
    }
    if sxx.is_zero() {
        None
    } else {
        Some(sxy / sxx)
    }
}

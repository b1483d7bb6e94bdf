//! Fixed-point approximations of the analytic functions.
//!
//! Values are computed on integers scaled by `2^PREC` and returned as
//! rationals together with `log2` of an absolute error bound. `PREC = 224`
//! bits is a little over 67 decimal digits.

use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub(crate) const PREC: u32 = 224;

/// Bits lost to rounding in a single series evaluation, with margin.
const SERIES_SLACK: f64 = 16.0;

/// Arguments of `exp` above this magnitude overflow any useful probe.
const EXP_LIMIT: f64 = 1.0e5;

/// `sin`/`cos` arguments at or above `2^TRIG_LIMIT_BITS` are rejected.
const TRIG_LIMIT_BITS: u64 = 96;

fn one_fx() -> BigInt {
    BigInt::one() << PREC
}

fn to_fixed(x: &BigRational) -> BigInt {
    (x.numer() << PREC).div_floor(x.denom())
}

fn from_fixed(x: BigInt) -> BigRational {
    BigRational::new(x, one_fx())
}

fn mul_fx(a: &BigInt, b: &BigInt) -> BigInt {
    (a * b) >> PREC
}

/// `log2 |r|` as a float, `-inf` for zero.
pub(crate) fn log2_abs(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    log2_int(r.numer()) - log2_int(r.denom())
}

fn log2_int(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 60 {
        return n.abs().to_f64().unwrap_or(1.0).log2();
    }
    let shift = bits - 60;
    let top = (n.abs() >> shift).to_f64().unwrap_or(1.0);
    top.log2() + shift as f64
}

/// `2 * atanh(1/m)` scaled, for integer `m >= 2`.
fn atanh_inv_fx(m: u64, scale: u32) -> BigInt {
    let m = BigInt::from(m);
    let m2 = &m * &m;
    let mut power = (BigInt::one() << scale) / &m;
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !power.is_zero() {
        sum += &power / BigInt::from(2 * k + 1);
        power /= &m2;
        k += 1;
    }
    sum
}

/// `atan(1/m)` scaled, for integer `m >= 2`.
fn atan_inv_fx(m: u64, scale: u32) -> BigInt {
    let m = BigInt::from(m);
    let m2 = &m * &m;
    let mut power = (BigInt::one() << scale) / &m;
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &m2;
        k += 1;
    }
    sum
}

const GUARD: u32 = 32;

fn ln2_fx() -> &'static BigInt {
    static LN2: OnceLock<BigInt> = OnceLock::new();
    LN2.get_or_init(|| (atanh_inv_fx(3, PREC + GUARD) * 2) >> GUARD)
}

fn pi_fx() -> &'static BigInt {
    static PI: OnceLock<BigInt> = OnceLock::new();
    PI.get_or_init(|| {
        let s = PREC + GUARD;
        (atan_inv_fx(5, s) * 16 - atan_inv_fx(239, s) * 4) >> GUARD
    })
}

/// Taylor series of `exp(r)` for a small fixed-point `r`.
fn exp_series(r: &BigInt) -> BigInt {
    let mut term = one_fx();
    let mut sum = one_fx();
    let mut n: u64 = 1;
    loop {
        term = mul_fx(&term, r) / BigInt::from(n);
        if term.is_zero() {
            return sum;
        }
        sum += &term;
        n += 1;
    }
}

/// Returns `(sin r, cos r)` for fixed-point `|r| <= pi/4`.
fn sin_cos_series(r: &BigInt) -> (BigInt, BigInt) {
    let r2 = mul_fx(r, r);
    let mut s_term = r.clone();
    let mut s_sum = r.clone();
    let mut c_term = one_fx();
    let mut c_sum = one_fx();
    let mut n: u64 = 1;
    loop {
        c_term = -mul_fx(&c_term, &r2) / BigInt::from((2 * n - 1) * (2 * n));
        s_term = -mul_fx(&s_term, &r2) / BigInt::from((2 * n) * (2 * n + 1));
        if c_term.is_zero() && s_term.is_zero() {
            return (s_sum, c_sum);
        }
        c_sum += &c_term;
        s_sum += &s_term;
        n += 1;
    }
}

/// Failure of an analytic evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum NumericError {
    Domain,
}

/// `(value, log2 absolute error)`.
pub(crate) type Approx = (BigRational, f64);

pub(crate) fn exp(x: &BigRational) -> Result<Approx, NumericError> {
    if x.is_zero() {
        return Ok((BigRational::one(), f64::NEG_INFINITY));
    }
    let xf = x.to_f64().unwrap_or(f64::INFINITY);
    if !xf.is_finite() || xf.abs() > EXP_LIMIT {
        return Err(NumericError::Domain);
    }
    let k = (xf / std::f64::consts::LN_2).round() as i64;
    let r = to_fixed(x) - ln2_fx() * BigInt::from(k);
    let mant = exp_series(&r);
    let v = from_fixed(mant);
    let v = if k >= 0 {
        v * BigRational::from_integer(BigInt::one() << k as u64)
    } else {
        v / BigRational::from_integer(BigInt::one() << (-k) as u64)
    };
    let k_bits = ((k.unsigned_abs() + 1) as f64).log2();
    let err = log2_abs(&v) - PREC as f64 + SERIES_SLACK + k_bits;
    Ok((v, err))
}

pub(crate) fn sin_cos(x: &BigRational) -> Result<(Approx, Approx), NumericError> {
    if x.is_zero() {
        return Ok((
            (BigRational::zero(), f64::NEG_INFINITY),
            (BigRational::one(), f64::NEG_INFINITY),
        ));
    }
    if x.numer().bits() > x.denom().bits() + TRIG_LIMIT_BITS {
        return Err(NumericError::Domain);
    }
    let pi = pi_fx();
    let two_x: BigInt = to_fixed(x) * 2;
    // q = round(x / (pi/2)), r = x - q*pi/2
    let half_pi: BigInt = pi >> 1;
    let q: BigInt = (&two_x + half_pi).div_floor(pi);
    let r: BigInt = (two_x - &q * pi) >> 1;
    let (s, c) = sin_cos_series(&r);
    let quadrant = q.mod_floor(&BigInt::from(4)).to_u8().unwrap_or(0);
    let (s, c) = match quadrant {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    };
    let q_bits = (q.abs().bits() as f64) + 1.0;
    let err = -(PREC as f64) + SERIES_SLACK + q_bits;
    Ok(((from_fixed(s), err), (from_fixed(c), err)))
}

pub(crate) fn ln(x: &BigRational) -> Result<Approx, NumericError> {
    if !x.is_positive() {
        return Err(NumericError::Domain);
    }
    if x.is_one() {
        return Ok((BigRational::zero(), f64::NEG_INFINITY));
    }
    // x = m * 2^e with m in [1, 2)
    let mut e = x.numer().bits() as i64 - x.denom().bits() as i64;
    let scale = |e: i64| -> BigRational {
        if e >= 0 {
            x / BigRational::from_integer(BigInt::one() << e as u64)
        } else {
            x * BigRational::from_integer(BigInt::one() << (-e) as u64)
        }
    };
    let mut m = scale(e);
    let two = BigRational::from_integer(BigInt::from(2));
    while m >= two {
        e += 1;
        m = scale(e);
    }
    while m < BigRational::one() {
        e -= 1;
        m = scale(e);
    }
    let z = (&m - BigRational::one()) / (&m + BigRational::one());
    let zf = to_fixed(&z);
    let z2 = mul_fx(&zf, &zf);
    let mut power = zf.clone();
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !power.is_zero() {
        sum += &power / BigInt::from(2 * k + 1);
        power = mul_fx(&power, &z2);
        k += 1;
    }
    let total = sum * 2 + ln2_fx() * BigInt::from(e);
    let e_bits = ((e.unsigned_abs() + 1) as f64).log2();
    let err = -(PREC as f64) + SERIES_SLACK + e_bits;
    Ok((from_fixed(total), err))
}

pub(crate) fn sqrt(x: &BigRational) -> Result<Approx, NumericError> {
    if x.is_negative() {
        return Err(NumericError::Domain);
    }
    if let Some(r) = super::simplify::exact_sqrt(x) {
        return Ok((r, f64::NEG_INFINITY));
    }
    let scaled = (x.numer() << (2 * PREC)) / x.denom();
    let root = match scaled.sign() {
        Sign::Minus => return Err(NumericError::Domain),
        _ => scaled.sqrt(),
    };
    Ok((from_fixed(root), 1.0 - PREC as f64))
}

//! Working-precision ladder.
//!
//! Certifiers evaluate their margins in `f64` first and, when the margin is
//! exposed to cancellation, re-evaluate through [`Ext`], a thin wrapper over
//! `astro_float::BigFloat` with a compile-time mantissa width. Code that
//! must run at several precisions is written against the [`Real`] trait.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use serde::{Deserialize, Serialize};

/// Named precision levels, ordered from cheapest to most expensive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// IEEE-754 binary64.
    Double,
    /// 128-bit mantissa.
    Extended,
    /// 256-bit mantissa.
    High,
}

impl Precision {
    pub fn mantissa_bits(self) -> usize {
        match self {
            Precision::Double => 53,
            Precision::Extended => 128,
            Precision::High => 256,
        }
    }

    /// Unit roundoff of the level.
    pub fn epsilon(self) -> f64 {
        2f64.powi(-(self.mantissa_bits() as i32))
    }

    /// Next rung of the ladder, if any.
    pub fn next(self) -> Option<Precision> {
        match self {
            Precision::Double => Some(Precision::Extended),
            Precision::Extended => Some(Precision::High),
            Precision::High => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Double => "double",
            Precision::Extended => "extended",
            Precision::High => "high",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            "high" => Ok(Precision::High),
            other => Err(format!("unknown precision `{other}` (expected double|extended|high)")),
        }
    }
}

/// Minimal real-number interface shared by `f64` and [`Ext`].
pub trait Real:
    Clone
    + PartialOrd
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const PRECISION: Precision;

    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn sqrt(&self) -> Self;

    /// `ln(1 + self)`, accurate for small arguments.
    fn ln_1p(&self) -> Self {
        (Self::from_f64(1.0) + self.clone()).ln()
    }

    /// `self^e` for `self > 0`.
    fn powf(&self, e: &Self) -> Self {
        (e.clone() * self.ln()).exp()
    }

    fn abs(&self) -> Self {
        if *self < Self::from_f64(0.0) {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Real for f64 {
    const PRECISION: Precision = Precision::Double;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn ln_1p(&self) -> Self {
        f64::ln_1p(*self)
    }
    fn powf(&self, e: &Self) -> Self {
        f64::powf(*self, *e)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

/// Multi-precision real with a `BITS`-bit mantissa.
#[derive(Clone)]
pub struct Ext<const BITS: usize>(BigFloat);

/// 128-bit working precision.
pub type Ext128 = Ext<128>;
/// 256-bit working precision.
pub type Ext256 = Ext<256>;

impl<const BITS: usize> Ext<BITS> {
    pub fn is_nan(&self) -> bool {
        self.0.is_nan()
    }
}

impl<const BITS: usize> fmt::Debug for Ext<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ext<{BITS}>({})", self.0)
    }
}

impl<const BITS: usize> PartialEq for Ext<BITS> {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl<const BITS: usize> PartialOrd for Ext<BITS> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! ext_binop {
    ($tr:ident, $m:ident) => {
        impl<const BITS: usize> $tr for Ext<BITS> {
            type Output = Self;
            fn $m(self, rhs: Self) -> Self {
                Ext(self.0.$m(&rhs.0, BITS, RM))
            }
        }
    };
}

ext_binop!(Add, add);
ext_binop!(Sub, sub);
ext_binop!(Mul, mul);
ext_binop!(Div, div);

impl<const BITS: usize> Neg for Ext<BITS> {
    type Output = Self;
    fn neg(self) -> Self {
        Ext(self.0.neg())
    }
}

impl<const BITS: usize> Real for Ext<BITS> {
    const PRECISION: Precision = if BITS >= 256 {
        Precision::High
    } else {
        Precision::Extended
    };

    fn from_f64(x: f64) -> Self {
        Ext(BigFloat::from_f64(x, BITS))
    }

    fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        if self.0.is_zero() {
            return 0.0;
        }
        let Some((words, _, sign, exponent, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        // value = 0.m * 2^exponent with the mantissa words stored little-endian
        let bits = astro_float::WORD_BIT_SIZE as i32;
        let mut acc = 0.0f64;
        let mut scale = 1.0f64;
        for w in words.iter().rev().take(3) {
            scale *= 2f64.powi(-bits);
            acc += (*w as f64) * scale;
        }
        let v = acc * 2f64.powi(exponent);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    fn ln(&self) -> Self {
        CONSTS.with(|cc| Ext(self.0.ln(BITS, RM, &mut cc.borrow_mut())))
    }

    fn exp(&self) -> Self {
        CONSTS.with(|cc| Ext(self.0.exp(BITS, RM, &mut cc.borrow_mut())))
    }

    fn sqrt(&self) -> Self {
        Ext(self.0.sqrt(BITS, RM))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_round_trips_f64() {
        for x in [1.0, -2.5, 3.0e-300, 1.7e300, 0.1, -123456.789] {
            assert_eq!(Ext128::from_f64(x).to_f64(), x);
        }
        assert_eq!(Ext128::from_f64(0.0).to_f64(), 0.0);
    }

    #[test]
    fn ext_transcendentals_match_f64() {
        let x = 0.96209_f64;
        let e = Ext128::from_f64(x);
        assert!((e.ln().to_f64() - x.ln()).abs() < 1e-16);
        assert!((e.exp().to_f64() - x.exp()).abs() < 1e-15);
        let y = Ext256::from_f64(1.7).powf(&Ext256::from_f64(30.5));
        assert!((y.to_f64() / 1.7f64.powf(30.5) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn extended_resolves_cancellation_double_cannot() {
        // (1 + 1e-20) - 1 vanishes in f64 but not at 128 bits
        let one = Ext128::from_f64(1.0);
        let tiny = Ext128::from_f64(1e-20);
        let d = (one.clone() + tiny) - one;
        assert!((d.to_f64() - 1e-20).abs() < 1e-30);
    }

    #[test]
    fn ladder_order() {
        assert_eq!(Precision::Double.next(), Some(Precision::Extended));
        assert_eq!(Precision::High.next(), None);
        assert!(Precision::Double < Precision::High);
        assert_eq!("extended".parse::<Precision>().unwrap(), Precision::Extended);
        assert_eq!(<Ext256 as Real>::PRECISION, Precision::High);
    }
}

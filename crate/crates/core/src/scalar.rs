//! Exact Gaussian rationals `a + b·i` with `a, b ∈ ℚ`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// An element of ℚ(i). Both parts are kept in lowest terms by `BigRational`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussScalar {
    re: BigRational,
    im: BigRational,
}

impl GaussScalar {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussScalar { re, im }
    }

    pub fn zero() -> Self {
        GaussScalar::default()
    }

    pub fn one() -> Self {
        GaussScalar::from(1i64)
    }

    pub fn i() -> Self {
        GaussScalar::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        GaussScalar::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn complex(re: i64, im: i64) -> Self {
        GaussScalar::new(
            BigRational::from_integer(re.into()),
            BigRational::from_integer(im.into()),
        )
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn real_part(&self) -> GaussScalar {
        GaussScalar::new(self.re.clone(), BigRational::zero())
    }

    pub fn imag_part(&self) -> GaussScalar {
        GaussScalar::new(self.im.clone(), BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// True when both parts are integers.
    pub fn is_integral(&self) -> bool {
        self.re.is_integer() && self.im.is_integer()
    }

    pub fn conj(&self) -> GaussScalar {
        GaussScalar::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<GaussScalar> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(GaussScalar::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn pow(&self, exp: u32) -> GaussScalar {
        let mut acc = GaussScalar::one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }
}

impl From<i64> for GaussScalar {
    fn from(v: i64) -> Self {
        GaussScalar::new(BigRational::from_integer(v.into()), BigRational::zero())
    }
}

impl From<BigRational> for GaussScalar {
    fn from(v: BigRational) -> Self {
        GaussScalar::new(v, BigRational::zero())
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical form: `a/b`, `c/d*i`, or `a/b+c/d*i` (integers drop the `/1`).
impl fmt::Display for GaussScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im_str = |v: &BigRational| {
            if v.is_one() {
                "i".to_string()
            } else {
                format!("{}*i", fmt_rational(v))
            }
        };
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rational(&self.re)),
            (true, false) => {
                if self.im.is_negative() {
                    write!(f, "-{}", im_str(&-self.im.clone()))
                } else {
                    write!(f, "{}", im_str(&self.im))
                }
            }
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(
                    f,
                    "{}{}{}",
                    fmt_rational(&self.re),
                    sign,
                    im_str(&self.im.abs())
                )
            }
        }
    }
}

impl fmt::Debug for GaussScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() || d.is_negative() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Parses the canonical `Display` form back.
impl FromStr for GaussScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::MalformedScalar(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(bad());
        }
        let Some(body) = t.strip_suffix('i') else {
            return parse_rational(&t).map(GaussScalar::from).ok_or_else(bad);
        };
        // split "re±im" at the last sign that is not the leading one
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(k, _)| k)
            .last();
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let im = im.strip_suffix('*').unwrap_or(im);
        let im = match im {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other.strip_prefix('+').unwrap_or(other)).ok_or_else(bad)?,
        };
        let re = if re.is_empty() {
            BigRational::zero()
        } else {
            parse_rational(re).ok_or_else(bad)?
        };
        Ok(GaussScalar::new(re, im))
    }
}

impl<'a> Add<&'a GaussScalar> for &'a GaussScalar {
    type Output = GaussScalar;
    fn add(self, rhs: &GaussScalar) -> GaussScalar {
        GaussScalar::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'a> Sub<&'a GaussScalar> for &'a GaussScalar {
    type Output = GaussScalar;
    fn sub(self, rhs: &GaussScalar) -> GaussScalar {
        GaussScalar::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a> Mul<&'a GaussScalar> for &'a GaussScalar {
    type Output = GaussScalar;
    fn mul(self, rhs: &GaussScalar) -> GaussScalar {
        if self.im.is_zero() && rhs.im.is_zero() {
            return GaussScalar::from(&self.re * &rhs.re);
        }
        GaussScalar::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl<'a> Div<&'a GaussScalar> for &'a GaussScalar {
    type Output = GaussScalar;
    fn div(self, rhs: &GaussScalar) -> GaussScalar {
        self * &rhs.inv().expect("division by zero in GaussScalar")
    }
}

impl Neg for &GaussScalar {
    type Output = GaussScalar;
    fn neg(self) -> GaussScalar {
        GaussScalar::new(-self.re.clone(), -self.im.clone())
    }
}

impl Neg for GaussScalar {
    type Output = GaussScalar;
    fn neg(self) -> GaussScalar {
        GaussScalar::new(-self.re, -self.im)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<GaussScalar> for GaussScalar {
            type Output = GaussScalar;
            fn $m(self, rhs: GaussScalar) -> GaussScalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a GaussScalar> for GaussScalar {
            type Output = GaussScalar;
            fn $m(self, rhs: &GaussScalar) -> GaussScalar {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&GaussScalar> for GaussScalar {
    fn add_assign(&mut self, rhs: &GaussScalar) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&GaussScalar> for GaussScalar {
    fn sub_assign(&mut self, rhs: &GaussScalar) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&GaussScalar> for GaussScalar {
    fn mul_assign(&mut self, rhs: &GaussScalar) {
        *self = &*self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> GaussScalar {
        text.parse().unwrap()
    }

    #[test]
    fn display_forms() {
        assert_eq!(GaussScalar::from_ratio(6, -4).to_string(), "-3/2");
        assert_eq!(GaussScalar::i().to_string(), "i");
        assert_eq!((-GaussScalar::i()).to_string(), "-i");
        assert_eq!(GaussScalar::complex(1, -2).to_string(), "1-2*i");
        let q = &GaussScalar::from_ratio(1, 2) + &(&GaussScalar::from_ratio(3, 4) * &GaussScalar::i());
        assert_eq!(q.to_string(), "1/2+3/4*i");
    }

    #[test]
    fn parse_display_round_trip() {
        for text in ["0", "7", "-3/2", "i", "-i", "5/7*i", "-1/2-3/4*i", "2+i", "1/3+2*i"] {
            assert_eq!(s(text).to_string(), text);
        }
        assert!("1/0".parse::<GaussScalar>().is_err());
        assert!("abc".parse::<GaussScalar>().is_err());
    }

    #[test]
    fn field_operations() {
        let a = GaussScalar::complex(3, 4);
        assert_eq!(&a * &a.inv().unwrap(), GaussScalar::one());
        assert_eq!(&a * &a.conj(), GaussScalar::from(25));
        assert_eq!(GaussScalar::i().pow(2), GaussScalar::from(-1));
        assert_eq!(GaussScalar::i().pow(4), GaussScalar::one());
        assert!(GaussScalar::zero().inv().is_none());
    }
}

//! Exact non-negative rationals for parameters and certified factors.

use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ratio {
    num: u64,
    den: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RatioError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("malformed rational `{0}`")]
    Malformed(alloc::string::String),
    #[error("rational overflow")]
    Overflow,
}

const fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Ratio {
    pub const ZERO: Ratio = Ratio { num: 0, den: 1 };
    pub const ONE: Ratio = Ratio { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Ratio, RatioError> {
        if den == 0 {
            return Err(RatioError::ZeroDenominator);
        }
        Self::from_u128(num as u128, den as u128)
    }

    pub fn integer(v: u64) -> Ratio {
        Ratio { num: v, den: 1 }
    }

    fn from_u128(num: u128, den: u128) -> Result<Ratio, RatioError> {
        let g = gcd(num, den).max(1);
        let (num, den) = (num / g, den / g);
        if num > u64::MAX as u128 || den > u64::MAX as u128 {
            return Err(RatioError::Overflow);
        }
        Ok(Ratio { num: num as u64, den: den as u64 })
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, o: Ratio) -> Result<Ratio, RatioError> {
        let num = (self.num as u128)
            .checked_mul(o.den as u128)
            .and_then(|a| (o.num as u128).checked_mul(self.den as u128).and_then(|b| a.checked_add(b)))
            .ok_or(RatioError::Overflow)?;
        Self::from_u128(num, self.den as u128 * o.den as u128)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, o: Ratio) -> Result<Ratio, RatioError> {
        Self::from_u128(self.num as u128 * o.num as u128, self.den as u128 * o.den as u128)
    }

    pub fn div_int(self, d: u64) -> Result<Ratio, RatioError> {
        if d == 0 {
            return Err(RatioError::ZeroDenominator);
        }
        Self::from_u128(self.num as u128, self.den as u128 * d as u128)
    }

    pub fn recip(self) -> Result<Ratio, RatioError> {
        Ratio::new(self.den, self.num)
    }

    pub fn one_plus(self) -> Result<Ratio, RatioError> {
        self.add(Ratio::ONE)
    }

    /// `value <= self * base`, evaluated exactly.
    pub fn bounds(self, value: u64, base: u64) -> bool {
        (value as u128) * (self.den as u128) <= (self.num as u128) * (base as u128)
    }

    /// Smallest integer not below `self * x`.
    pub fn ceil_mul(self, x: u64) -> u128 {
        let p = self.num as u128 * x as u128;
        p.div_ceil(self.den as u128)
    }

    pub fn ceil(self) -> u64 {
        self.num.div_ceil(self.den)
    }

    pub fn floor(self) -> u64 {
        self.num / self.den
    }

    /// Smallest j >= 0 with 2^j >= self. Requires self >= 1.
    pub fn ceil_log2(self) -> u32 {
        let mut j = 0u32;
        while ((self.den as u128) << j) < self.num as u128 {
            j += 1;
        }
        j
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Ratio {
    type Err = RatioError;

    /// Accepts `a`, `a/b`, or a decimal such as `0.25`.
    fn from_str(s: &str) -> Result<Ratio, RatioError> {
        let s = s.trim();
        let bad = || RatioError::Malformed(s.into());
        if let Some((a, b)) = s.split_once('/') {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            return Ratio::new(a, b);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let frac_v: u64 = frac.parse().map_err(|_| bad())?;
            let den = 10u64.pow(frac.len() as u32);
            let num = int.checked_mul(den).and_then(|x| x.checked_add(frac_v)).ok_or(RatioError::Overflow)?;
            return Ratio::new(num, den);
        }
        Ok(Ratio::integer(s.parse().map_err(|_| bad())?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn parse_forms() {
        assert_eq!("1/2".parse::<Ratio>().unwrap(), Ratio::new(1, 2).unwrap());
        assert_eq!("0.5".parse::<Ratio>().unwrap(), Ratio::new(1, 2).unwrap());
        assert_eq!("3".parse::<Ratio>().unwrap(), Ratio::integer(3));
        assert_eq!("4/8".parse::<Ratio>().unwrap().to_string(), "1/2");
        assert!("1/0".parse::<Ratio>().is_err());
        assert!("x".parse::<Ratio>().is_err());
    }

    #[test]
    fn exact_bound() {
        let f = Ratio::new(9, 2).unwrap();
        assert!(f.bounds(9, 2));
        assert!(!f.bounds(10, 2));
        assert!(f.bounds(u64::MAX, u64::MAX));
    }

    #[test]
    fn log2_and_ceil() {
        assert_eq!(Ratio::ONE.ceil_log2(), 0);
        assert_eq!(Ratio::new(3, 2).unwrap().ceil_log2(), 1);
        assert_eq!(Ratio::integer(4).ceil_log2(), 2);
        assert_eq!(Ratio::new(7, 2).unwrap().ceil(), 4);
        assert_eq!(Ratio::new(1, 2).unwrap().mul(Ratio::integer(3)).unwrap().one_plus().unwrap().to_string(), "5/2");
    }
}

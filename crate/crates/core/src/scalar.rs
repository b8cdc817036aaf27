//! Exact scalars: Gaussian rationals `re + im*i` with arbitrary-precision
//! rational components. No floating point anywhere; every value is kept in
//! reduced canonical form so equality is structural.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
}

/// Error produced while parsing a scalar literal. `pos` is the byte offset
/// into the input at which the problem was detected.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid scalar at offset {pos}: {message}")]
pub struct ScalarParseError {
    pub pos: usize,
    pub message: String,
}

/// A Gaussian rational: `re + im * i`, both parts arbitrary-precision
/// rationals kept reduced (positive denominator, gcd 1). The derived ordering
/// is lexicographic on (re, im); it exists to give terms a canonical order,
/// not to make the field ordered.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct GaussianRational {
    re: BigRational,
    im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        GaussianRational::from_int(1)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        GaussianRational::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        GaussianRational::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    /// `num/den` as a real scalar. Panics on a zero denominator; intended for
    /// literals in code, not for user input (use `parse` for that).
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator in scalar literal");
        GaussianRational::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    /// `(re_num/re_den) + (im_num/im_den)*i`, for test fixtures.
    pub fn from_parts(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        assert!(re_den != 0 && im_den != 0, "zero denominator in scalar literal");
        GaussianRational::new(
            BigRational::new(BigInt::from(re_num), BigInt::from(re_den)),
            BigRational::new(BigInt::from(im_num), BigInt::from(im_den)),
        )
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
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

    /// Some(n) when the value is a (machine-width) real integer.
    pub fn to_i64(&self) -> Option<i64> {
        if self.im.is_zero() && self.re.is_integer() {
            self.re.to_integer().to_i64()
        } else {
            None
        }
    }

    /// Multiplicative inverse; errors on zero.
    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        // (a + bi)^-1 = (a - bi) / (a^2 + b^2)
        let norm = &self.re * &self.re + &self.im * &self.im;
        Ok(GaussianRational::new(&self.re / &norm, -&self.im / &norm))
    }

    pub fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        Ok(self * &other.inv()?)
    }

    /// Parses the scalar grammar `[sign] rat [sign [rat] 'i'] | [sign] [rat] 'i'`
    /// where `rat = int ['/' int]`. The imaginary marker must follow its
    /// coefficient with no intervening space; a bare `i` means coefficient 1.
    /// Whitespace is allowed around signs and at the ends.
    pub fn parse(text: &str) -> Result<Self, ScalarParseError> {
        Parser { bytes: text.as_bytes(), pos: 0 }.parse()
    }
}

impl FromStr for GaussianRational {
    type Err = ScalarParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GaussianRational::parse(s)
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-&self.re, -&self.im)
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for GaussianRational {
            type Output = GaussianRational;
            fn $method(self, rhs: GaussianRational) -> GaussianRational {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $method(self, rhs: &GaussianRational) -> GaussianRational {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        -&self
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &BigRational) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussianRational {
    /// Canonical text form: `0`, `3/2`, `-2i`, `i`, `3/2-2i`, `1+i`, ...
    /// Real part first, then the signed imaginary part with coefficient 1
    /// elided. `parse(render(x)) == x` for every value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if !self.re.is_zero() {
            write_rational(f, &self.re)?;
            if self.im.is_zero() {
                return Ok(());
            }
            write!(f, "{}", if self.im.is_negative() { "-" } else { "+" })?;
            let mag = self.im.abs();
            if !mag.is_one() {
                write_rational(f, &mag)?;
            }
            return write!(f, "i");
        }
        // purely imaginary
        if self.im.is_negative() {
            write!(f, "-")?;
        }
        let mag = self.im.abs();
        if !mag.is_one() {
            write_rational(f, &mag)?;
        }
        write!(f, "i")
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: &str) -> Result<T, ScalarParseError> {
        Err(ScalarParseError { pos: self.pos, message: message.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn sign(&mut self) -> i32 {
        match self.peek() {
            Some(b'+') => {
                self.pos += 1;
                1
            }
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            _ => 1,
        }
    }

    fn digits(&mut self) -> Result<BigInt, ScalarParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected digits");
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        Ok(text.parse::<BigInt>().unwrap())
    }

    /// `int ['/' int]`, no interior whitespace.
    fn rational(&mut self) -> Result<BigRational, ScalarParseError> {
        let numer = self.digits()?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let denom = self.digits()?;
            if denom.is_zero() {
                return self.err("zero denominator");
            }
            Ok(BigRational::new(numer, denom))
        } else {
            Ok(BigRational::from_integer(numer))
        }
    }

    /// One signed part: either a real rational or `[rat]i`. Returns
    /// (value, was_imaginary).
    fn part(&mut self) -> Result<(BigRational, bool), ScalarParseError> {
        let sign = self.sign();
        self.skip_ws();
        if self.peek() == Some(b'i') {
            self.pos += 1;
            let mut v = BigRational::one();
            if sign < 0 {
                v = -v;
            }
            return Ok((v, true));
        }
        let mut v = self.rational()?;
        if sign < 0 {
            v = -v;
        }
        if self.peek() == Some(b'i') {
            self.pos += 1;
            Ok((v, true))
        } else {
            Ok((v, false))
        }
    }

    fn parse(mut self) -> Result<GaussianRational, ScalarParseError> {
        self.skip_ws();
        if self.pos == self.bytes.len() {
            return self.err("empty scalar");
        }
        let (first, first_imag) = self.part()?;
        self.skip_ws();
        if self.pos == self.bytes.len() {
            return Ok(if first_imag {
                GaussianRational::new(BigRational::zero(), first)
            } else {
                GaussianRational::new(first, BigRational::zero())
            });
        }
        if first_imag {
            return self.err("imaginary part must come last");
        }
        match self.peek() {
            Some(b'+') | Some(b'-') => {}
            _ => return self.err("expected '+', '-', or end of input"),
        }
        let (second, second_imag) = self.part()?;
        if !second_imag {
            return self.err("expected imaginary part after sign");
        }
        self.skip_ws();
        if self.pos != self.bytes.len() {
            return self.err("trailing input after scalar");
        }
        Ok(GaussianRational::new(first, second))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> GaussianRational {
        GaussianRational::parse(s).unwrap()
    }

    #[test]
    fn addition_reduces() {
        assert_eq!(&q("1/2+1/3i") + &q("1/6+2/3i"), q("2/3+i"));
        assert_eq!(&q("1/2") + &q("1/2"), q("1"));
    }

    #[test]
    fn multiplication() {
        assert_eq!(&q("i") * &q("i"), q("-1"));
        assert_eq!(&q("1+i") * &q("1-i"), q("2"));
        assert_eq!(&q("3/2-2i") * &q("0"), q("0"));
        assert_eq!(&q("2/3") * &q("3/4"), q("1/2"));
    }

    #[test]
    fn inverse() {
        assert_eq!(q("2").inv().unwrap(), q("1/2"));
        assert_eq!(q("i").inv().unwrap(), q("-i"));
        assert_eq!(q("1+i").inv().unwrap(), q("1/2-1/2i"));
        assert_eq!(q("0").inv(), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn zero_is_unique() {
        let z = &q("1/2") - &q("2/4");
        assert!(z.is_zero());
        assert_eq!(z, GaussianRational::zero());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(q("3/2-2i"), GaussianRational::from_parts(3, 2, -2, 1));
        assert_eq!(q("i"), GaussianRational::i());
        assert_eq!(q("-i"), -GaussianRational::i());
        assert_eq!(q("5"), GaussianRational::from_int(5));
        assert_eq!(q(" -1/3 + 4/5i "), GaussianRational::from_parts(-1, 3, 4, 5));
        assert_eq!(q("1+i"), GaussianRational::from_parts(1, 1, 1, 1));
        assert_eq!(q("2i"), GaussianRational::from_parts(0, 1, 2, 1));
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!(GaussianRational::parse("1//2").is_err());
        assert!(GaussianRational::parse("").is_err());
        assert!(GaussianRational::parse("1/0").is_err());
        assert!(GaussianRational::parse("i+2").is_err());
        assert!(GaussianRational::parse("1+2").is_err());
        assert!(GaussianRational::parse("1+2i junk").is_err());
        let err = GaussianRational::parse("1//2").unwrap_err();
        assert_eq!(err.pos, 2);
    }

    #[test]
    fn render_canonical() {
        for text in ["0", "1", "-1", "3/2", "-2/3", "i", "-i", "2i", "-2/3i", "3/2-2i", "1+i", "-1/3+4/5i"] {
            assert_eq!(q(text).to_string(), text);
        }
    }

    fn small_rational() -> impl Strategy<Value = BigRational> {
        (-20i64..=20, 1i64..=12)
            .prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    fn small_scalar() -> impl Strategy<Value = GaussianRational> {
        (small_rational(), small_rational()).prop_map(|(re, im)| GaussianRational::new(re, im))
    }

    proptest! {
        #[test]
        fn field_axioms(a in small_scalar(), b in small_scalar(), c in small_scalar()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &GaussianRational::zero(), a.clone());
            prop_assert_eq!(&a * &GaussianRational::one(), a.clone());
            if !a.is_zero() {
                prop_assert_eq!(&a * &a.inv().unwrap(), GaussianRational::one());
            }
        }

        #[test]
        fn parse_render_round_trip(a in small_scalar()) {
            prop_assert_eq!(GaussianRational::parse(&a.to_string()).unwrap(), a);
        }
    }
}

//! Exact scalars: the field Q(q) of rational functions in the deformation
//! parameter, kept as canonical integer-polynomial fractions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator vanishes at q = {0}")]
    PoleAtPoint(BigRational),
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
}

/// Integer-coefficient polynomial in q, dense, no trailing zero coefficients.
/// `coeffs[k]` is the coefficient of `q^k`; the zero polynomial is empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        IntPoly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        IntPoly { coeffs: vec![c] }.trimmed()
    }

    /// `c * q^k`.
    pub fn monomial(c: BigInt, k: usize) -> Self {
        if c.is_zero() {
            return IntPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c;
        IntPoly { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<BigInt>) -> Self {
        IntPoly { coeffs }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Degree in q; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn leading_coeff(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    fn term_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k) + other.coeff(k));
        }
        IntPoly { coeffs }.trimmed()
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k) - other.coeff(k));
        }
        IntPoly { coeffs }.trimmed()
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] += a * b;
            }
        }
        IntPoly { coeffs }.trimmed()
    }

    /// Positive gcd of the coefficients (content); 0 for the zero polynomial.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    fn scale_int(&self, c: &BigInt) -> IntPoly {
        IntPoly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
        .trimmed()
    }

    /// Exact division; panics if `d` does not divide `self` in Z[q].
    pub fn div_exact(&self, d: &IntPoly) -> IntPoly {
        assert!(!d.is_zero(), "exact division by zero polynomial");
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut rem = self.coeffs.clone();
        let dd = d.coeffs.len() - 1;
        let nd = rem.len() - 1;
        assert!(nd >= dd, "exact division degree mismatch");
        let lc = d.leading_coeff();
        let mut quot = vec![BigInt::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let top = std::mem::take(&mut rem[k + dd]);
            if top.is_zero() {
                continue;
            }
            let (q, r) = top.div_rem(&lc);
            assert!(r.is_zero(), "inexact polynomial division");
            for (i, c) in d.coeffs.iter().enumerate().take(dd) {
                let delta = &q * c;
                rem[k + i] -= delta;
            }
            quot[k] = q;
        }
        assert!(rem.iter().all(|c| c.is_zero()), "inexact polynomial division");
        IntPoly { coeffs: quot }.trimmed()
    }

    /// Primitive pseudo-remainder sequence gcd over Z[q]; result has positive
    /// leading coefficient. Fraction-free: contents are split off so the
    /// coefficient growth of plain Euclid never happens.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() {
            return other.abs_normalized();
        }
        if other.is_zero() {
            return self.abs_normalized();
        }
        let content = self.content().gcd(&other.content());
        let mut a = self.primitive_part();
        let mut b = other.primitive_part();
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b).primitive_part();
            a = b;
            b = r;
        }
        a.abs_normalized().scale_int(&content)
    }

    /// Pseudo-remainder of `self` by `d` (premultiplies by a power of lc(d)).
    fn pseudo_rem(&self, d: &IntPoly) -> IntPoly {
        let dd = d.coeffs.len() - 1;
        let lc = d.leading_coeff();
        let mut rem = self.clone();
        while let Some(nr) = rem.degree() {
            if nr < dd {
                break;
            }
            let top = rem.leading_coeff();
            rem = rem.scale_int(&lc);
            let shift = IntPoly::monomial(top * &lc, nr - dd);
            // lc cancels in the leading term by construction
            rem = rem.sub(&shift.mul(d).div_exact(&IntPoly::constant(lc.clone())));
        }
        rem
    }

    fn primitive_part(&self) -> IntPoly {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let c = self.content();
        self.div_exact(&IntPoly::constant(c)).abs_normalized()
    }

    /// Sign-normalize so the leading coefficient is positive.
    fn abs_normalized(&self) -> IntPoly {
        if self.leading_coeff().is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn eval(&self, q0: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * q0 + BigRational::from(c.clone());
        }
        acc
    }

    /// Needs parentheses when used as a `*`/`/` operand in printed text.
    fn needs_parens_as_factor(&self) -> bool {
        match self.term_count() {
            0 | 1 => {
                // single monomial: `q^k` and bare constants are fine,
                // `2*q^3` is not (the `*` would re-associate).
                self.degree().unwrap_or(0) > 0 && !self.leading_coeff().abs().is_one()
            }
            _ => true,
        }
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, "-")?;
            } else {
                write!(f, "+")?;
            }
            let coeff_is_one = mag.is_one();
            match (k, coeff_is_one) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "q")?,
                (1, false) => write!(f, "{mag}*q")?,
                (_, true) => write!(f, "q^{k}")?,
                (_, false) => write!(f, "{mag}*q^{k}")?,
            }
        }
        Ok(())
    }
}

/// Canonical fraction of integer polynomials in q: gcd(num, den) = 1 and the
/// denominator has positive leading coefficient. The denominator is never
/// zero, so values form the field Q(q).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: IntPoly,
    den: IntPoly,
}

impl RatFunc {
    pub fn new(num: IntPoly, den: IntPoly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: IntPoly, den: IntPoly) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return RatFunc {
                num: IntPoly::zero(),
                den: IntPoly::one(),
            };
        }
        let g = num.gcd(&den);
        let mut num = num.div_exact(&g);
        let mut den = den.div_exact(&g);
        if den.leading_coeff().is_negative() {
            num = num.neg();
            den = den.neg();
        }
        RatFunc { num, den }
    }

    pub fn zero() -> Self {
        RatFunc {
            num: IntPoly::zero(),
            den: IntPoly::one(),
        }
    }

    pub fn one() -> Self {
        RatFunc {
            num: IntPoly::one(),
            den: IntPoly::one(),
        }
    }

    pub fn int(n: i64) -> Self {
        RatFunc {
            num: IntPoly::constant(BigInt::from(n)),
            den: IntPoly::one(),
        }
    }

    pub fn rational(r: &BigRational) -> Self {
        Self::reduced(
            IntPoly::constant(r.numer().clone()),
            IntPoly::constant(r.denom().clone()),
        )
    }

    /// `q^k`, with negative `k` giving `1/q^|k|`.
    pub fn q_power(k: i64) -> Self {
        if k >= 0 {
            RatFunc {
                num: IntPoly::monomial(BigInt::one(), k as usize),
                den: IntPoly::one(),
            }
        } else {
            RatFunc {
                num: IntPoly::one(),
                den: IntPoly::monomial(BigInt::one(), (-k) as usize),
            }
        }
    }

    pub fn from_poly(p: IntPoly) -> Self {
        RatFunc {
            num: p,
            den: IntPoly::one(),
        }
    }

    /// `1 - q^k` as a convenience for the ubiquitous q-integers.
    pub fn one_minus_q_pow(k: usize) -> Self {
        RatFunc::from_poly(IntPoly::one().sub(&IntPoly::monomial(BigInt::one(), k)))
    }

    pub fn numerator(&self) -> &IntPoly {
        &self.num
    }

    pub fn denominator(&self) -> &IntPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// Constant value if this scalar does not involve q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.num.degree().unwrap_or(0) == 0 && self.den.degree().unwrap_or(0) == 0 {
            Some(BigRational::new(
                self.num.coeff(0),
                self.den.coeff(0),
            ))
        } else {
            None
        }
    }

    /// Pivot-selection complexity: total polynomial degree of the fraction.
    pub fn complexity(&self) -> usize {
        self.num.degree().unwrap_or(0) + self.den.degree().unwrap_or(0)
    }

    pub fn checked_div(&self, other: &RatFunc) -> Result<RatFunc, ScalarError> {
        if other.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(self * &other.inv_unchecked())
    }

    pub fn inv(&self) -> Result<RatFunc, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(self.inv_unchecked())
    }

    fn inv_unchecked(&self) -> RatFunc {
        let mut num = self.den.clone();
        let mut den = self.num.clone();
        if den.leading_coeff().is_negative() {
            num = num.neg();
            den = den.neg();
        }
        RatFunc { num, den }
    }

    pub fn pow(&self, k: i32) -> Result<RatFunc, ScalarError> {
        if k < 0 && self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let mut acc = RatFunc::one();
        for _ in 0..k.unsigned_abs() {
            acc = &acc * self;
        }
        if k < 0 {
            acc = acc.inv_unchecked();
        }
        Ok(acc)
    }

    pub fn eval_at(&self, q0: &BigRational) -> Result<BigRational, ScalarError> {
        let d = self.den.eval(q0);
        if d.is_zero() {
            return Err(ScalarError::PoleAtPoint(q0.clone()));
        }
        Ok(self.num.eval(q0) / d)
    }

    /// True when the numerator's leading coefficient is negative (used by the
    /// printer to decide between `+` and `-` separators).
    pub fn is_display_negative(&self) -> bool {
        self.num.leading_coeff().is_negative()
    }

    /// Text when this scalar multiplies a monomial: omit `1`, keep `-` of `-1`.
    pub(crate) fn factor_text(&self) -> String {
        let num_text = if self.num.needs_parens_as_factor() {
            format!("({})", self.num)
        } else {
            format!("{}", self.num)
        };
        if self.den.is_one() {
            num_text
        } else if self.den.needs_parens_as_factor() {
            format!("{num_text}/({})", self.den)
        } else {
            format!("{num_text}/{}", self.den)
        }
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.factor_text())
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RatFunc::reduced(self.num.add(&rhs.num), self.den.clone());
        }
        let g = self.den.gcd(&rhs.den);
        if g.is_one() {
            // canonical inputs with coprime denominators need no reduction
            let num = self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den));
            let den = self.den.mul(&rhs.den);
            if num.is_zero() {
                return RatFunc::zero();
            }
            return RatFunc { num, den };
        }
        let db = self.den.div_exact(&g);
        let dd = rhs.den.div_exact(&g);
        let num = self.num.mul(&dd).add(&rhs.num.mul(&db));
        let den = self.den.mul(&dd);
        RatFunc::reduced(num, den)
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        // cross-cancel so the result is canonical without a full gcd
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let num = self.num.div_exact(&g1).mul(&rhs.num.div_exact(&g2));
        let den = self.den.div_exact(&g2).mul(&rhs.den.div_exact(&g1));
        RatFunc { num, den }
    }
}

impl Div for &RatFunc {
    type Output = RatFunc;
    /// Panics on a zero divisor; use `checked_div` at trust boundaries.
    fn div(self, rhs: &RatFunc) -> RatFunc {
        self.checked_div(rhs).expect("division by zero scalar")
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for RatFunc {
            type Output = RatFunc;
            fn $method(self, rhs: RatFunc) -> RatFunc {
                $trait::$method(&self, &rhs)
            }
        }
    };
}
forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);
forward_owned_binop!(Div, div);

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

impl Serialize for RatFunc {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RatFunc {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for RatFunc {
    type Err = ScalarError;
    fn from_str(text: &str) -> Result<Self, ScalarError> {
        parse_ratfunc(text)
    }
}

/// Parse scalar text such as `(1-q^4)/(1-q^6)`, `q^2`, `-3/2`.
pub fn parse_ratfunc(text: &str) -> Result<RatFunc, ScalarError> {
    let mut p = ScalarParser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let value = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(value)
}

struct ScalarParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ScalarParser<'a> {
    fn error(&self, message: &str) -> ScalarError {
        ScalarError::Syntax {
            pos: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.bytes.get(self.pos).map_or(false, |b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<RatFunc, ScalarError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -&self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatFunc, ScalarError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.factor()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let d = self.factor()?;
                    acc = acc.checked_div(&d).map_err(|_| self.error("division by zero"))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<RatFunc, ScalarError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.integer()?;
            if k < 0 {
                return Err(self.error("negative exponent; write 1/q^k instead"));
            }
            return base.pow(k as i32).map_err(|_| self.error("zero base"));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatFunc, ScalarError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected closing parenthesis"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'q') => {
                self.pos += 1;
                Ok(RatFunc::q_power(1))
            }
            Some(b) if b.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(RatFunc::int(n))
            }
            _ => Err(self.error("expected scalar atom")),
        }
    }

    fn integer(&mut self) -> Result<i64, ScalarError> {
        self.skip_ws();
        let neg = if self.bytes.get(self.pos) == Some(&b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let start = self.pos;
        while self.bytes.get(self.pos).map_or(false, |b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer"));
        }
        let digits = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        let mut n: i64 = digits
            .parse()
            .map_err(|_| self.error("integer out of range"))?;
        if neg {
            n = -n;
        }
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(text: &str) -> RatFunc {
        parse_ratfunc(text).unwrap()
    }

    fn q0(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn canonical_form_cancels_common_factors() {
        // (1-q^4)/(1-q^2) = 1+q^2
        let x = RatFunc::new(
            rf("1-q^4").numerator().clone(),
            rf("1-q^2").numerator().clone(),
        )
        .unwrap();
        assert_eq!(x, rf("1+q^2"));
        assert!(x.denominator().is_one());
    }

    #[test]
    fn canonical_form_is_idempotent_and_sign_normalized() {
        let x = RatFunc::new(
            rf("q^2-1").numerator().clone(),
            rf("q^6-1").numerator().clone(),
        )
        .unwrap();
        // denominator leading coefficient positive, gcd struck
        assert_eq!(x, rf("(1-q^2)/(1-q^6)"));
        assert!(!x.denominator().leading_coeff().is_negative());
        let again = RatFunc::new(x.numerator().clone(), x.denominator().clone()).unwrap();
        assert_eq!(again, x);
    }

    #[test]
    fn division_of_equal_scalars_is_one() {
        let q = RatFunc::q_power(1);
        assert!(q.checked_div(&q).unwrap().is_one());
    }

    #[test]
    fn division_by_zero_is_reported() {
        assert_eq!(
            RatFunc::one().checked_div(&RatFunc::zero()),
            Err(ScalarError::DivisionByZero)
        );
        assert!(RatFunc::new(IntPoly::one(), IntPoly::zero()).is_err());
    }

    #[test]
    fn add_matches_cross_multiplied_form() {
        // (1-q^4)/(1-q^6) + q^2, checked by clearing the denominator by hand:
        // sum * (1-q^6) must be (1-q^4) + q^2*(1-q^6).
        let sum = &rf("(1-q^4)/(1-q^6)") + &rf("q^2");
        let lhs = &sum * &rf("1-q^6");
        let rhs = &rf("1-q^4") + &(&rf("q^2") * &rf("1-q^6"));
        assert_eq!(lhs, rhs);
        // frozen independent value: evaluation at q = 1/2 gives 20/21 + 1/4
        assert_eq!(sum.eval_at(&q0(1, 2)).unwrap(), q0(101, 84));
    }

    #[test]
    fn eval_at_interior_point() {
        assert_eq!(rf("1+q^2").eval_at(&q0(1, 2)).unwrap(), q0(5, 4));
        assert_eq!(
            rf("(1-q^4)/(1-q^6)").eval_at(&q0(1, 2)).unwrap(),
            q0(20, 21)
        );
    }

    #[test]
    fn eval_at_pole_is_an_error() {
        let x = rf("1/(1-q^2)");
        assert_eq!(
            x.eval_at(&q0(1, 1)),
            Err(ScalarError::PoleAtPoint(q0(1, 1)))
        );
    }

    #[test]
    fn negative_q_powers_are_fractions() {
        let x = RatFunc::q_power(-2);
        assert_eq!(x, rf("1/q^2"));
        assert_eq!(&x * &RatFunc::q_power(2), RatFunc::one());
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "0",
            "1",
            "-1",
            "q",
            "-q^3",
            "1/2",
            "3/2",
            "1+q^2",
            "(1-q^4)/(1-q^6)",
            "1/q^2",
            "(2-3*q)/(5*q^2)",
            "1/(2*q^2)",
            "-5*q^7",
        ] {
            let x = rf(text);
            assert_eq!(rf(&x.to_string()), x, "round trip of {text}");
        }
    }

    #[test]
    fn display_matches_expected_text() {
        // (1-q^4)/(1-q^6) has the common factor 1-q^2; display is canonical
        assert_eq!(rf("(1-q^4)/(1-q^6)").to_string(), "(1+q^2)/(1+q^2+q^4)");
        assert_eq!(rf("(1-q^4)/(1-q^8)").to_string(), "1/(1+q^4)");
        assert_eq!(rf("q^2").to_string(), "q^2");
        assert_eq!(rf("-1/2").to_string(), "-1/2");
        assert_eq!(RatFunc::q_power(-2).to_string(), "1/q^2");
        assert_eq!(rf("2*q^2/2").to_string(), "q^2");
    }

    #[test]
    fn rational_constants_reduce() {
        assert_eq!(&rf("1/2") + &rf("1/2"), RatFunc::one());
        assert_eq!(rf("2/4"), rf("1/2"));
    }

    #[test]
    fn gcd_handles_content_and_primitive_parts() {
        // gcd(2(1-q^2), 4(1-q)) = 2(q-1) with the leading coefficient
        // normalized positive
        let a = rf("2-2*q^2").numerator().clone();
        let b = rf("4-4*q").numerator().clone();
        let g = a.gcd(&b);
        assert_eq!(g, rf("-2+2*q").numerator().clone());
    }

    #[test]
    fn pow_and_inverse() {
        let x = rf("(1-q^2)/q");
        assert_eq!(x.pow(2).unwrap(), &x * &x);
        assert_eq!(&x * &x.inv().unwrap(), RatFunc::one());
        assert_eq!(x.pow(-1).unwrap(), x.inv().unwrap());
    }

    #[test]
    fn serde_uses_textual_form() {
        let x = rf("(1-q^4)/(1-q^6)");
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, "\"(1+q^2)/(1+q^2+q^4)\"");
        let back: RatFunc = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_poly() -> impl Strategy<Value = IntPoly> {
            proptest::collection::vec(-4i64..=4, 0..5)
                .prop_map(|cs| IntPoly::from_coeffs(cs.into_iter().map(BigInt::from).collect()))
        }

        fn arb_ratfunc() -> impl Strategy<Value = RatFunc> {
            (arb_poly(), arb_poly())
                .prop_filter_map("nonzero denominator", |(n, d)| RatFunc::new(n, d).ok())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn field_laws(a in arb_ratfunc(), b in arb_ratfunc(), c in arb_ratfunc()) {
                prop_assert_eq!(&a + &b, &b + &a);
                prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
                prop_assert_eq!(&a * &b, &b * &a);
                prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
                prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
                prop_assert_eq!(&a - &a, RatFunc::zero());
                if !a.is_zero() {
                    prop_assert_eq!(&a * &a.inv().unwrap(), RatFunc::one());
                }
            }

            #[test]
            fn eval_is_a_homomorphism(a in arb_ratfunc(), b in arb_ratfunc()) {
                let p = q0(2, 3);
                let (ea, eb) = (a.eval_at(&p), b.eval_at(&p));
                if let (Ok(ea), Ok(eb)) = (ea, eb) {
                    if let Ok(es) = (&a + &b).eval_at(&p) {
                        prop_assert_eq!(es, ea.clone() + eb.clone());
                    }
                    if let Ok(ep) = (&a * &b).eval_at(&p) {
                        prop_assert_eq!(ep, ea * eb);
                    }
                }
            }

            #[test]
            fn parse_print_round_trip(a in arb_ratfunc()) {
                prop_assert_eq!(parse_ratfunc(&a.to_string()).unwrap(), a);
            }
        }
    }
}

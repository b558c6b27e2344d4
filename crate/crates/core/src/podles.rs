//! PBW normal forms and order-two symmetries of the quantum-sphere algebra.
//!
//! The algebra is generated over the rational functions in `q` by a
//! self-adjoint element `A` and a ladder element `B` (with adjoint `Bs`),
//! subject to
//!
//! ```text
//!   B A  = q^2 A B
//!   Bs B = s^2 + (1 - s^2) A - A^2
//!   B Bs = s^2 + (1 - s^2) q^2 A - q^4 A^2
//! ```
//!
//! where `s` is a fixed rational parameter (only `s^2` enters the
//! relations).  Applying the involution to the first relation gives the
//! derived rule `Bs A = q^{-2} A Bs`.  Every element has a unique normal
//! form as a combination of the basis monomials `A^k B^j` and `A^k Bs^j`;
//! rewriting a word with the four rules above terminates (the pair "number
//! of ladder letters, number of ladder-before-A inversions" drops
//! lexicographically at every step) and is confluent, so the normal form
//! does not depend on the reduction order.

use crate::scalar::{RatFunc, ScalarError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::ser::{Serialize, Serializer};
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::RwLock;
use thiserror::Error;

/// Errors from normal-form computation and expression parsing.
#[derive(Debug, Error)]
pub enum PodlesError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("division is only defined by scalar elements")]
    NonScalarDivisor,
    #[error("division by zero")]
    DivisionByZero,
    #[error("the sign-flip symmetry requires s^2 = 1 (got s = {s})")]
    MuUndefined { s: String },
    #[error("the ladder scaling factor must be invertible")]
    SingularLambda,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Generator tokens for words in the free algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gen {
    A,
    B,
    Bstar,
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::A => write!(f, "A"),
            Gen::B => write!(f, "B"),
            Gen::Bstar => write!(f, "Bs"),
        }
    }
}

/// The two ladder families that can appear in a basis monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ladder {
    B,
    Bstar,
}

/// A basis monomial `A^k B^j` or `A^k Bs^j` (the ladder part, when
/// present, has exponent at least 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PbwMonomial {
    a: u32,
    ladder: Option<(Ladder, u32)>,
}

impl PbwMonomial {
    pub fn new(a: u32, ladder: Option<(Ladder, u32)>) -> Self {
        let ladder = match ladder {
            Some((_, 0)) => None,
            other => other,
        };
        PbwMonomial { a, ladder }
    }

    pub fn unit() -> Self {
        PbwMonomial { a: 0, ladder: None }
    }

    pub fn a_power(k: u32) -> Self {
        PbwMonomial { a: k, ladder: None }
    }

    pub fn ladder_power(l: Ladder, j: u32) -> Self {
        Self::new(0, Some((l, j)))
    }

    pub fn generator(g: Gen) -> Self {
        match g {
            Gen::A => Self::a_power(1),
            Gen::B => Self::ladder_power(Ladder::B, 1),
            Gen::Bstar => Self::ladder_power(Ladder::Bstar, 1),
        }
    }

    pub fn a_pow(&self) -> u32 {
        self.a
    }

    pub fn ladder(&self) -> Option<(Ladder, u32)> {
        self.ladder
    }

    pub fn is_unit(&self) -> bool {
        self.a == 0 && self.ladder.is_none()
    }

    /// Total degree `k + j`.
    pub fn degree(&self) -> u32 {
        self.a + self.ladder.map_or(0, |(_, j)| j)
    }

    /// Ladder charge: `+j` for a `B^j` part, `-j` for `Bs^j`.
    pub fn charge(&self) -> i64 {
        match self.ladder {
            None => 0,
            Some((Ladder::B, j)) => i64::from(j),
            Some((Ladder::Bstar, j)) => -i64::from(j),
        }
    }

    fn sort_key(&self) -> (u32, u32, u8) {
        let (j, rank) = match self.ladder {
            None => (0, 0),
            Some((Ladder::B, j)) => (j, 1),
            Some((Ladder::Bstar, j)) => (j, 2),
        };
        (self.degree(), j, rank)
    }
}

impl Ord for PbwMonomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for PbwMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PbwMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unit() {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        if self.a == 1 {
            parts.push("A".to_string());
        } else if self.a > 1 {
            parts.push(format!("A^{}", self.a));
        }
        if let Some((l, j)) = self.ladder {
            let name = match l {
                Ladder::B => "B",
                Ladder::Bstar => "Bs",
            };
            if j == 1 {
                parts.push(name.to_string());
            } else {
                parts.push(format!("{}^{}", name, j));
            }
        }
        write!(f, "{}", parts.join("*"))
    }
}

/// All basis monomials of total degree at most `max_degree`, in the
/// canonical order (degree, then ladder exponent, then `B` before `Bs`).
pub fn basis_up_to(max_degree: u32) -> Vec<PbwMonomial> {
    let mut v = Vec::new();
    for d in 0..=max_degree {
        v.push(PbwMonomial::a_power(d));
        for j in 1..=d {
            v.push(PbwMonomial::new(d - j, Some((Ladder::B, j))));
            v.push(PbwMonomial::new(d - j, Some((Ladder::Bstar, j))));
        }
    }
    v
}

/// An element in PBW normal form: a finite sum of basis monomials with
/// rational-function coefficients.  The map never stores zero
/// coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AlgebraElement {
    terms: BTreeMap<PbwMonomial, RatFunc>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_monomial(PbwMonomial::unit())
    }

    pub fn from_monomial(m: PbwMonomial) -> Self {
        Self::from_term(m, RatFunc::one())
    }

    pub fn from_term(m: PbwMonomial, c: RatFunc) -> Self {
        let mut e = Self::zero();
        e.add_term(m, c);
        e
    }

    pub fn scalar(c: RatFunc) -> Self {
        Self::from_term(PbwMonomial::unit(), c)
    }

    pub fn generator(g: Gen) -> Self {
        Self::from_monomial(PbwMonomial::generator(g))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &PbwMonomial) -> RatFunc {
        self.terms.get(m).cloned().unwrap_or_else(RatFunc::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PbwMonomial, &RatFunc)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: PbwMonomial, c: RatFunc) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &RatFunc) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, v)| (*m, v * c))
            .collect();
        AlgebraElement { terms }
    }

    /// Left-multiply by `A^k`.  Powers of `A` commute past powers of `A`
    /// without picking up `q`-factors, so this is a pure exponent shift.
    pub fn shift_a(&self, k: u32) -> Self {
        if k == 0 {
            return self.clone();
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, v)| (PbwMonomial::new(m.a_pow() + k, m.ladder()), v.clone()))
            .collect();
        AlgebraElement { terms }
    }

    /// Largest total degree appearing in the support (zero for the zero
    /// element).
    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(PbwMonomial::degree).max().unwrap_or(0)
    }

    /// If the element is a scalar multiple of the unit, return the scalar.
    pub fn as_scalar(&self) -> Option<RatFunc> {
        if self.terms.is_empty() {
            return Some(RatFunc::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.is_unit() {
                return Some(c.clone());
            }
        }
        None
    }

    /// The involution: coefficients are fixed (both `q` and `s` are real
    /// parameters) and on basis monomials
    ///
    /// ```text
    ///   (A^k B^j)*  = Bs^j A^k = q^{-2jk} A^k Bs^j
    ///   (A^k Bs^j)* = B^j A^k  = q^{+2jk} A^k B^j
    /// ```
    pub fn star(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            match m.ladder() {
                None => out.add_term(*m, c.clone()),
                Some((l, j)) => {
                    let k = m.a_pow();
                    let (flipped, exp) = match l {
                        Ladder::B => (Ladder::Bstar, -2 * i64::from(j) * i64::from(k)),
                        Ladder::Bstar => (Ladder::B, 2 * i64::from(j) * i64::from(k)),
                    };
                    let nm = PbwMonomial::new(k, Some((flipped, j)));
                    out.add_term(nm, c * &RatFunc::q_power(exp));
                }
            }
        }
        out
    }
}

impl std::ops::Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        let terms = self.terms.iter().map(|(m, c)| (*m, -c)).collect();
        AlgebraElement { terms }
    }
}

impl std::ops::Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl std::ops::Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

macro_rules! forward_element_binop {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait<AlgebraElement> for AlgebraElement {
            type Output = AlgebraElement;
            fn $method(self, rhs: AlgebraElement) -> AlgebraElement {
                (&self).$method(&rhs)
            }
        }
        impl std::ops::$trait<&AlgebraElement> for AlgebraElement {
            type Output = AlgebraElement;
            fn $method(self, rhs: &AlgebraElement) -> AlgebraElement {
                (&self).$method(rhs)
            }
        }
        impl std::ops::$trait<AlgebraElement> for &AlgebraElement {
            type Output = AlgebraElement;
            fn $method(self, rhs: AlgebraElement) -> AlgebraElement {
                self.$method(&rhs)
            }
        }
    };
}

forward_element_binop!(Add, add);
forward_element_binop!(Sub, sub);

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let (neg, mag) = if c.is_display_negative() {
                (true, -c)
            } else {
                (false, c.clone())
            };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if m.is_unit() {
                out.push_str(&mag.factor_text());
            } else if mag.is_one() {
                out.push_str(&m.to_string());
            } else {
                out.push_str(&format!("{}*{}", mag.factor_text(), m));
            }
        }
        write!(f, "{}", out)
    }
}

impl Serialize for AlgebraElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(serde::Serialize)]
        struct Term {
            monomial: String,
            coeff: String,
        }
        serializer.collect_seq(self.terms.iter().map(|(m, c)| Term {
            monomial: m.to_string(),
            coeff: c.to_string(),
        }))
    }
}

/// The diagonal order-two symmetries used for twisted homology: `Sigma`
/// scales both ladder generators by `-1`, `Mu` additionally flips the
/// sign of `A`.  Both act diagonally on the basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Twist {
    Id,
    Sigma,
    Mu,
}

impl Twist {
    /// The eigenvalue (`+1` or `-1`) of the symmetry on a basis monomial.
    pub fn weight(&self, m: &PbwMonomial) -> i8 {
        let j = m.ladder().map_or(0, |(_, j)| j);
        let exponent = match self {
            Twist::Id => 0,
            Twist::Sigma => j,
            Twist::Mu => m.a_pow() + j,
        };
        if exponent % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn apply(&self, x: &AlgebraElement) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (m, c) in x.terms() {
            if self.weight(m) == 1 {
                out.add_term(*m, c.clone());
            } else {
                out.add_term(*m, -c);
            }
        }
        out
    }

    pub fn label(&self) -> &'static str {
        match self {
            Twist::Id => "id",
            Twist::Sigma => "sigma",
            Twist::Mu => "mu",
        }
    }
}

/// Families of diagonal automorphisms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AutoKind {
    /// `A -> A`, `B -> λB`, `Bs -> λ^{-1}Bs`; an automorphism for every
    /// `s` and every invertible `λ`.
    Sigma,
    /// `A -> -A`, `B -> λB`, `Bs -> λ^{-1}Bs`; compatible with the
    /// defining relations only when `s^2 = 1`.
    Mu,
}

/// A diagonal automorphism given by its family and ladder scaling factor.
#[derive(Clone, Debug)]
pub struct AutoSpec {
    pub kind: AutoKind,
    pub lambda: RatFunc,
}

impl AutoSpec {
    pub fn sigma(lambda: RatFunc) -> Self {
        AutoSpec {
            kind: AutoKind::Sigma,
            lambda,
        }
    }

    pub fn mu(lambda: RatFunc) -> Self {
        AutoSpec {
            kind: AutoKind::Mu,
            lambda,
        }
    }
}

/// Reduction order for the word-rewriting engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewriteStrategy {
    Leftmost,
    Rightmost,
}

/// The quantum-sphere algebra at a fixed rational parameter `s`.
///
/// Holds the normal forms of the products `Bs*B` and `B*Bs` (which depend
/// on `s`) and memoizes mixed ladder powers, the only genuinely recursive
/// part of multiplication.
#[derive(Debug)]
pub struct PodlesAlgebra {
    s: BigRational,
    s2: RatFunc,
    /// Normal form of `Bs B`.
    r3: AlgebraElement,
    /// Normal form of `B Bs`.
    r4: AlgebraElement,
    mixed_cache: RwLock<HashMap<(Ladder, u32, u32), AlgebraElement>>,
}

impl Clone for PodlesAlgebra {
    fn clone(&self) -> Self {
        PodlesAlgebra::new(self.s.clone())
    }
}

impl PodlesAlgebra {
    pub fn new(s: BigRational) -> Self {
        let s2 = RatFunc::rational(&(&s * &s));
        let one_minus_s2 = &RatFunc::one() - &s2;
        let mut r3 = AlgebraElement::zero();
        r3.add_term(PbwMonomial::unit(), s2.clone());
        r3.add_term(PbwMonomial::a_power(1), one_minus_s2.clone());
        r3.add_term(PbwMonomial::a_power(2), -&RatFunc::one());
        let mut r4 = AlgebraElement::zero();
        r4.add_term(PbwMonomial::unit(), s2.clone());
        r4.add_term(
            PbwMonomial::a_power(1),
            &one_minus_s2 * &RatFunc::q_power(2),
        );
        r4.add_term(PbwMonomial::a_power(2), -&RatFunc::q_power(4));
        PodlesAlgebra {
            s,
            s2,
            r3,
            r4,
            mixed_cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn s(&self) -> &BigRational {
        &self.s
    }

    pub fn s_squared(&self) -> &RatFunc {
        &self.s2
    }

    pub fn s_squared_is_one(&self) -> bool {
        self.s2.is_one()
    }

    /// Product of two normal-form elements, again in normal form.
    pub fn mul(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (mx, cx) in x.terms() {
            for (my, cy) in y.terms() {
                let prod = self.mul_monomials(mx, my);
                let c = cx * cy;
                for (m, v) in prod.terms() {
                    out.add_term(*m, v * &c);
                }
            }
        }
        out
    }

    /// Product of basis monomials.  Writing `m1 = A^{k1} X^i` and
    /// `m2 = A^{k2} Y^j`, first commute `X^i` past `A^{k2}`
    /// (`B^i A^k = q^{2ik} A^k B^i`, `Bs^i A^k = q^{-2ik} A^k Bs^i`), then
    /// resolve the ladder product `X^i Y^j`.
    pub fn mul_monomials(&self, m1: &PbwMonomial, m2: &PbwMonomial) -> AlgebraElement {
        let k2 = m2.a_pow();
        let coeff = match m1.ladder() {
            Some((Ladder::B, i)) => RatFunc::q_power(2 * i64::from(i) * i64::from(k2)),
            Some((Ladder::Bstar, i)) => RatFunc::q_power(-2 * i64::from(i) * i64::from(k2)),
            None => RatFunc::one(),
        };
        let a_shift = m1.a_pow() + k2;
        let tail = match (m1.ladder(), m2.ladder()) {
            (None, l) | (l, None) => AlgebraElement::from_monomial(PbwMonomial::new(0, l)),
            (Some((lx, i)), Some((ly, j))) if lx == ly => {
                AlgebraElement::from_monomial(PbwMonomial::new(0, Some((lx, i + j))))
            }
            (Some((lx, i)), Some((_, j))) => self.mixed(lx, i, j),
        };
        tail.shift_a(a_shift).scale(&coeff)
    }

    /// Normal form of `X^i Y^j` where `X` is the `first` ladder family and
    /// `Y` the other one, `i, j >= 1`.  Peeling one `XY` pair off the
    /// middle gives `X^i Y^j = X^{i-1} (XY) Y^{j-1}` with `XY` a quadratic
    /// polynomial `Σ c_p A^p`, and commuting each `A^p` to the front costs
    /// `q^{±2p(i-1)}`.
    fn mixed(&self, first: Ladder, i: u32, j: u32) -> AlgebraElement {
        if let Some(hit) = self
            .mixed_cache
            .read()
            .expect("mixed-product cache poisoned")
            .get(&(first, i, j))
        {
            return hit.clone();
        }
        let (relation, sign) = match first {
            Ladder::B => (&self.r4, 1i64),
            Ladder::Bstar => (&self.r3, -1i64),
        };
        let second = match first {
            Ladder::B => Ladder::Bstar,
            Ladder::Bstar => Ladder::B,
        };
        let sub = if i == 1 && j == 1 {
            AlgebraElement::one()
        } else if i == 1 {
            AlgebraElement::from_monomial(PbwMonomial::ladder_power(second, j - 1))
        } else if j == 1 {
            AlgebraElement::from_monomial(PbwMonomial::ladder_power(first, i - 1))
        } else {
            self.mixed(first, i - 1, j - 1)
        };
        let mut out = AlgebraElement::zero();
        for (m, c) in relation.terms() {
            let p = m.a_pow();
            let twist = RatFunc::q_power(sign * 2 * i64::from(p) * i64::from(i - 1));
            let shifted = sub.shift_a(p).scale(&(c * &twist));
            out = &out + &shifted;
        }
        self.mixed_cache
            .write()
            .expect("mixed-product cache poisoned")
            .insert((first, i, j), out.clone());
        out
    }

    /// `x^n` by repeated multiplication.
    pub fn pow(&self, x: &AlgebraElement, n: u32) -> AlgebraElement {
        let mut out = AlgebraElement::one();
        for _ in 0..n {
            out = self.mul(&out, x);
        }
        out
    }

    /// Normal form of a word in the generators, contracting one redex at a
    /// time in the requested order.  Both orders give the same result; the
    /// `verify` command exercises that equality on random words.
    pub fn normalize_word(&self, word: &[Gen], strategy: RewriteStrategy) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        let mut stack: Vec<(Vec<Gen>, RatFunc)> = vec![(word.to_vec(), RatFunc::one())];
        while let Some((w, c)) = stack.pop() {
            match find_redex(&w, strategy) {
                None => out.add_term(word_to_monomial(&w), c),
                Some(i) => {
                    for (infix, rc) in self.rule(w[i], w[i + 1]) {
                        let mut nw = Vec::with_capacity(w.len() + 1);
                        nw.extend_from_slice(&w[..i]);
                        nw.extend_from_slice(&infix);
                        nw.extend_from_slice(&w[i + 2..]);
                        stack.push((nw, &c * &rc));
                    }
                }
            }
        }
        out
    }

    /// Replacement for the two-letter redex `x y`, as a list of
    /// `(inserted letters, coefficient)` pairs.
    fn rule(&self, x: Gen, y: Gen) -> Vec<(Vec<Gen>, RatFunc)> {
        let one_minus_s2 = &RatFunc::one() - &self.s2;
        match (x, y) {
            (Gen::B, Gen::A) => vec![(vec![Gen::A, Gen::B], RatFunc::q_power(2))],
            (Gen::Bstar, Gen::A) => vec![(vec![Gen::A, Gen::Bstar], RatFunc::q_power(-2))],
            (Gen::Bstar, Gen::B) => vec![
                (vec![], self.s2.clone()),
                (vec![Gen::A], one_minus_s2),
                (vec![Gen::A, Gen::A], -&RatFunc::one()),
            ],
            (Gen::B, Gen::Bstar) => vec![
                (vec![], self.s2.clone()),
                (vec![Gen::A], &one_minus_s2 * &RatFunc::q_power(2)),
                (vec![Gen::A, Gen::A], -&RatFunc::q_power(4)),
            ],
            _ => unreachable!("no rewrite rule for {x}{y}"),
        }
    }

    /// Apply a diagonal automorphism.  `Mu` is only an algebra map when
    /// `s^2 = 1` (the inhomogeneous relations force it), so it is rejected
    /// otherwise.
    pub fn apply_auto(
        &self,
        x: &AlgebraElement,
        auto: &AutoSpec,
    ) -> Result<AlgebraElement, PodlesError> {
        if auto.lambda.is_zero() {
            return Err(PodlesError::SingularLambda);
        }
        if auto.kind == AutoKind::Mu && !self.s_squared_is_one() {
            return Err(PodlesError::MuUndefined {
                s: self.s.to_string(),
            });
        }
        let mut out = AlgebraElement::zero();
        for (m, c) in x.terms() {
            let mut factor = match m.ladder() {
                None => RatFunc::one(),
                Some((Ladder::B, j)) => auto.lambda.pow(j as i32)?,
                Some((Ladder::Bstar, j)) => auto.lambda.pow(-(j as i32))?,
            };
            if auto.kind == AutoKind::Mu && m.a_pow() % 2 == 1 {
                factor = -&factor;
            }
            out.add_term(*m, c * &factor);
        }
        Ok(out)
    }

    /// Parse an expression in the generators (`A`, `B`, `Bs`), the
    /// deformation parameter `q`, and integer literals, with `+ - * / ^`
    /// and parentheses.  Division is only defined by scalar subexpressions.
    pub fn parse(&self, src: &str) -> Result<AlgebraElement, PodlesError> {
        let tokens = tokenize(src)?;
        let mut p = ExprParser {
            alg: self,
            tokens,
            pos: 0,
            src_len: src.len(),
        };
        let e = p.expr()?;
        p.expect_end()?;
        Ok(e)
    }
}

fn is_redex(x: Gen, y: Gen) -> bool {
    matches!(
        (x, y),
        (Gen::B, Gen::A) | (Gen::Bstar, Gen::A) | (Gen::Bstar, Gen::B) | (Gen::B, Gen::Bstar)
    )
}

fn find_redex(w: &[Gen], strategy: RewriteStrategy) -> Option<usize> {
    if w.len() < 2 {
        return None;
    }
    match strategy {
        RewriteStrategy::Leftmost => (0..w.len() - 1).find(|&i| is_redex(w[i], w[i + 1])),
        RewriteStrategy::Rightmost => (0..w.len() - 1).rev().find(|&i| is_redex(w[i], w[i + 1])),
    }
}

/// Convert a redex-free word (all `A`s, then one ladder family) to its
/// basis monomial.
fn word_to_monomial(w: &[Gen]) -> PbwMonomial {
    let a = w.iter().take_while(|&&g| g == Gen::A).count() as u32;
    let rest = &w[a as usize..];
    if rest.is_empty() {
        return PbwMonomial::a_power(a);
    }
    let l = match rest[0] {
        Gen::B => Ladder::B,
        Gen::Bstar => Ladder::Bstar,
        Gen::A => unreachable!("word not in normal form"),
    };
    debug_assert!(rest.iter().all(|&g| g == rest[0]));
    PbwMonomial::new(a, Some((l, rest.len() as u32)))
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Q,
    GenA,
    GenB,
    GenBs,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, PodlesError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
            }
            b'A' => {
                out.push((i, Tok::GenA));
                i += 1;
            }
            b'B' => {
                if bytes.get(i + 1) == Some(&b's') {
                    out.push((i, Tok::GenBs));
                    i += 2;
                } else {
                    out.push((i, Tok::GenB));
                    i += 1;
                }
            }
            b'q' => {
                out.push((i, Tok::Q));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = src[start..i].parse().expect("digit run parses");
                out.push((start, Tok::Int(n)));
            }
            b'+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            b'-' => {
                out.push((i, Tok::Minus));
                i += 1;
            }
            b'*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            b'/' => {
                out.push((i, Tok::Slash));
                i += 1;
            }
            b'^' => {
                out.push((i, Tok::Caret));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            _ => {
                return Err(PodlesError::Syntax {
                    pos: i,
                    message: format!("unexpected character {:?}", src[i..].chars().next().unwrap()),
                });
            }
        }
    }
    Ok(out)
}

struct ExprParser<'a> {
    alg: &'a PodlesAlgebra,
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    src_len: usize,
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map_or(self.src_len, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_end(&self) -> Result<(), PodlesError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            Err(PodlesError::Syntax {
                pos: self.here(),
                message: "expected end of expression".to_string(),
            })
        }
    }

    fn expr(&mut self) -> Result<AlgebraElement, PodlesError> {
        let mut negate = false;
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                negate = true;
            }
            Some(Tok::Plus) => {
                self.pos += 1;
            }
            _ => {}
        }
        let mut acc = self.term()?;
        if negate {
            acc = -&acc;
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = &acc + &t;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = &acc - &t;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<AlgebraElement, PodlesError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let f = self.factor()?;
                    acc = self.alg.mul(&acc, &f);
                }
                Some(Tok::Slash) => {
                    let at = self.here();
                    self.pos += 1;
                    let f = self.factor()?;
                    let d = f.as_scalar().ok_or(PodlesError::NonScalarDivisor)?;
                    if d.is_zero() {
                        return Err(PodlesError::DivisionByZero);
                    }
                    let inv = d.inv().map_err(|_| PodlesError::Syntax {
                        pos: at,
                        message: "cannot invert divisor".to_string(),
                    })?;
                    acc = acc.scale(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<AlgebraElement, PodlesError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let at = self.here();
            match self.bump() {
                Some(Tok::Int(n)) => {
                    if n.is_negative() {
                        return Err(PodlesError::Syntax {
                            pos: at,
                            message: "exponent must be a non-negative integer".to_string(),
                        });
                    }
                    let e = u32::try_from(&n).map_err(|_| PodlesError::Syntax {
                        pos: at,
                        message: "exponent too large".to_string(),
                    })?;
                    return Ok(self.alg.pow(&base, e));
                }
                _ => {
                    return Err(PodlesError::Syntax {
                        pos: at,
                        message: "expected a non-negative integer exponent (write 1/q^2 for \
                                  negative powers of q)"
                            .to_string(),
                    });
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<AlgebraElement, PodlesError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(AlgebraElement::scalar(RatFunc::rational(
                &BigRational::from_integer(n),
            ))),
            Some(Tok::Q) => Ok(AlgebraElement::scalar(RatFunc::q_power(1))),
            Some(Tok::GenA) => Ok(AlgebraElement::generator(Gen::A)),
            Some(Tok::GenB) => Ok(AlgebraElement::generator(Gen::B)),
            Some(Tok::GenBs) => Ok(AlgebraElement::generator(Gen::Bstar)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(PodlesError::Syntax {
                        pos: self.here(),
                        message: "expected ')'".to_string(),
                    }),
                }
            }
            _ => Err(PodlesError::Syntax {
                pos: at,
                message: "expected a generator, number, q, or '('".to_string(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    fn rf(s: &str) -> RatFunc {
        RatFunc::from_str(s).unwrap()
    }

    fn rational(s: &str) -> BigRational {
        BigRational::from_str(s).unwrap()
    }

    fn alg(s: &str) -> PodlesAlgebra {
        PodlesAlgebra::new(rational(s))
    }

    fn m(a: u32, ladder: Option<(Ladder, u32)>) -> PbwMonomial {
        PbwMonomial::new(a, ladder)
    }

    #[test]
    fn basis_order_and_count() {
        let names: Vec<String> = basis_up_to(2).iter().map(|m| m.to_string()).collect();
        assert_eq!(
            names,
            vec!["1", "A", "B", "Bs", "A^2", "A*B", "A*Bs", "B^2", "Bs^2"]
        );
        for n in 0..=6u32 {
            assert_eq!(basis_up_to(n).len(), ((n + 1) * (n + 1)) as usize);
        }
        let mut sorted = basis_up_to(5);
        sorted.sort();
        assert_eq!(sorted, basis_up_to(5));
    }

    #[test]
    fn single_step_rewrites() {
        let a = alg("1");
        for strat in [RewriteStrategy::Leftmost, RewriteStrategy::Rightmost] {
            let ba = a.normalize_word(&[Gen::B, Gen::A], strat);
            assert_eq!(ba.to_string(), "q^2*A*B");
            let bsa = a.normalize_word(&[Gen::Bstar, Gen::A], strat);
            assert_eq!(bsa.to_string(), "1/q^2*A*Bs");
        }
    }

    #[test]
    fn word_abab() {
        let a = alg("1");
        let e = a.normalize_word(&[Gen::A, Gen::B, Gen::A, Gen::B], RewriteStrategy::Leftmost);
        assert_eq!(e.to_string(), "q^2*A^2*B^2");
    }

    #[test]
    fn critical_pair_is_confluent() {
        // B Bs B has the overlapping redexes (B Bs) and (Bs B); both
        // reduction orders must give s^2 B + (1-s^2) q^2 AB - q^4 A^2 B.
        let a = alg("1/2");
        let word = [Gen::B, Gen::Bstar, Gen::B];
        let left = a.normalize_word(&word, RewriteStrategy::Leftmost);
        let right = a.normalize_word(&word, RewriteStrategy::Rightmost);
        let mut expected = AlgebraElement::zero();
        expected.add_term(m(0, Some((Ladder::B, 1))), rf("1/4"));
        expected.add_term(m(1, Some((Ladder::B, 1))), rf("3/4*q^2"));
        expected.add_term(m(2, Some((Ladder::B, 1))), rf("-q^4"));
        assert_eq!(left, expected);
        assert_eq!(right, expected);
        // ... and must agree with monomial multiplication.
        let b = AlgebraElement::generator(Gen::B);
        let bs = AlgebraElement::generator(Gen::Bstar);
        assert_eq!(a.mul(&b, &a.mul(&bs, &b)), expected);
        assert_eq!(a.mul(&a.mul(&b, &bs), &b), expected);
    }

    #[test]
    fn defining_relations_hold() {
        let alg = alg("1/2");
        let a = AlgebraElement::generator(Gen::A);
        let b = AlgebraElement::generator(Gen::B);
        let bs = AlgebraElement::generator(Gen::Bstar);
        let one = AlgebraElement::one();
        let s2 = alg.s_squared().clone();
        let one_minus_s2 = &RatFunc::one() - &s2;

        assert_eq!(alg.mul(&b, &a), alg.mul(&a, &b).scale(&RatFunc::q_power(2)));
        let lhs = &alg.mul(&bs, &b) + &alg.mul(&a, &a);
        let rhs = &one.scale(&s2) + &a.scale(&one_minus_s2);
        assert_eq!(lhs, rhs);
        let lhs = &alg.mul(&b, &bs) + &alg.mul(&a, &a).scale(&RatFunc::q_power(4));
        let rhs = &one.scale(&s2) + &a.scale(&(&one_minus_s2 * &RatFunc::q_power(2)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn mixed_ladder_powers() {
        // At s = 1: B^2 Bs^2 = 1 - q^4 A^2 - q^8 A^2 + q^12 A^4.
        let a = alg("1");
        let b2 = AlgebraElement::from_monomial(m(0, Some((Ladder::B, 2))));
        let bs2 = AlgebraElement::from_monomial(m(0, Some((Ladder::Bstar, 2))));
        let prod = a.mul(&b2, &bs2);
        let mut expected = AlgebraElement::one();
        expected.add_term(m(2, None), rf("-q^4-q^8"));
        expected.add_term(m(4, None), rf("q^12"));
        assert_eq!(prod, expected);
    }

    #[test]
    fn star_is_an_antiinvolution() {
        let a = alg("1/2");
        let ab = AlgebraElement::from_monomial(m(1, Some((Ladder::B, 1))));
        assert_eq!(ab.star().to_string(), "1/q^2*A*Bs");
        assert_eq!(ab.star().star(), ab);
        // (BA)* = A* B* = A Bs
        let ba = a.mul(
            &AlgebraElement::generator(Gen::B),
            &AlgebraElement::generator(Gen::A),
        );
        let expect = a.mul(
            &AlgebraElement::generator(Gen::A),
            &AlgebraElement::generator(Gen::Bstar),
        );
        assert_eq!(ba.star(), expect);
    }

    #[test]
    fn diagonal_automorphisms() {
        let a1 = alg("1");
        let ab = AlgebraElement::from_monomial(m(1, Some((Ladder::B, 1))));
        let sig = AutoSpec::sigma(rf("-1"));
        assert_eq!(a1.apply_auto(&ab, &sig).unwrap(), -&ab);
        let mu = AutoSpec::mu(rf("-1"));
        assert_eq!(a1.apply_auto(&ab, &mu).unwrap(), ab);
        // mu is not defined away from s^2 = 1
        let a_half = alg("1/2");
        assert!(matches!(
            a_half.apply_auto(&ab, &mu),
            Err(PodlesError::MuUndefined { .. })
        ));
        // sigma respects products for a rational-function scaling factor
        let x = a1.parse("A*B + Bs^2").unwrap();
        let y = a1.parse("B - q*A").unwrap();
        let sig_q = AutoSpec::sigma(rf("q"));
        let lhs = a1.apply_auto(&a1.mul(&x, &y), &sig_q).unwrap();
        let rhs = a1.mul(
            &a1.apply_auto(&x, &sig_q).unwrap(),
            &a1.apply_auto(&y, &sig_q).unwrap(),
        );
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn twist_weights() {
        let ab = m(1, Some((Ladder::B, 1)));
        let abs = m(1, Some((Ladder::Bstar, 1)));
        let a2 = m(2, None);
        assert_eq!(Twist::Id.weight(&ab), 1);
        assert_eq!(Twist::Sigma.weight(&ab), -1);
        assert_eq!(Twist::Sigma.weight(&a2), 1);
        assert_eq!(Twist::Mu.weight(&ab), 1);
        assert_eq!(Twist::Mu.weight(&abs), 1);
        assert_eq!(Twist::Mu.weight(&m(1, None)), -1);
        let x = &AlgebraElement::from_monomial(ab) + &AlgebraElement::from_monomial(m(1, None));
        assert_eq!(
            Twist::Mu.apply(&x),
            &AlgebraElement::from_monomial(ab) - &AlgebraElement::from_monomial(m(1, None))
        );
    }

    #[test]
    fn parser_round_trips() {
        let a = alg("1");
        for src in ["q^2*A*B", "1 - A^2", "A + 1/2*B", "-3 + (1+q^2)*A*Bs^2"] {
            let e = a.parse(src).unwrap();
            assert_eq!(e.to_string(), src);
            assert_eq!(a.parse(&e.to_string()).unwrap(), e);
        }
        // products are normalized while parsing
        assert_eq!(a.parse("B*A").unwrap().to_string(), "q^2*A*B");
        assert_eq!(
            a.parse("Bs*B*B").unwrap(),
            a.normalize_word(&[Gen::Bstar, Gen::B, Gen::B], RewriteStrategy::Leftmost)
        );
        assert_eq!(a.parse("1/q^2 * A").unwrap().to_string(), "1/q^2*A");
        assert_eq!(a.parse("-(A + B) + A").unwrap().to_string(), "-B");
        assert_eq!(a.parse("Bs*B").unwrap().to_string(), "1 - A^2");
    }

    #[test]
    fn parser_rejects_bad_input() {
        let a = alg("1");
        assert!(matches!(
            a.parse("A/B"),
            Err(PodlesError::NonScalarDivisor)
        ));
        assert!(matches!(a.parse("B/0"), Err(PodlesError::DivisionByZero)));
        assert!(matches!(a.parse("q^"), Err(PodlesError::Syntax { .. })));
        assert!(matches!(a.parse("C"), Err(PodlesError::Syntax { pos: 0, .. })));
        assert!(matches!(a.parse("A A"), Err(PodlesError::Syntax { .. })));
        assert!(matches!(a.parse(""), Err(PodlesError::Syntax { .. })));
        assert!(matches!(a.parse("(A"), Err(PodlesError::Syntax { .. })));
    }

    #[test]
    fn element_json_lists_terms() {
        let a = alg("1");
        let e = a.parse("q^2*A*B - 1").unwrap();
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(
            json,
            r#"[{"monomial":"1","coeff":"-1"},{"monomial":"A*B","coeff":"q^2"}]"#
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_gen() -> impl Strategy<Value = Gen> {
            prop_oneof![Just(Gen::A), Just(Gen::B), Just(Gen::Bstar)]
        }

        fn arb_word() -> impl Strategy<Value = Vec<Gen>> {
            proptest::collection::vec(arb_gen(), 0..6)
        }

        fn arb_monomial() -> impl Strategy<Value = PbwMonomial> {
            (0u32..3, prop_oneof![
                Just(None),
                (prop_oneof![Just(Ladder::B), Just(Ladder::Bstar)], 1u32..3)
                    .prop_map(Some)
            ])
                .prop_map(|(a, l)| PbwMonomial::new(a, l))
        }

        fn arb_s() -> impl Strategy<Value = BigRational> {
            prop_oneof![
                Just(BigRational::from_integer(1.into())),
                Just(BigRational::new(1.into(), 2.into())),
            ]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn rewriting_is_confluent_and_matches_multiplication(
                w in arb_word(), s in arb_s()
            ) {
                let alg = PodlesAlgebra::new(s);
                let left = alg.normalize_word(&w, RewriteStrategy::Leftmost);
                let right = alg.normalize_word(&w, RewriteStrategy::Rightmost);
                prop_assert_eq!(&left, &right);
                let folded = w.iter().fold(AlgebraElement::one(), |acc, &g| {
                    alg.mul(&acc, &AlgebraElement::generator(g))
                });
                prop_assert_eq!(left, folded);
            }

            #[test]
            fn monomial_multiplication_is_associative(
                x in arb_monomial(), y in arb_monomial(), z in arb_monomial(), s in arb_s()
            ) {
                let alg = PodlesAlgebra::new(s);
                let (x, y, z) = (
                    AlgebraElement::from_monomial(x),
                    AlgebraElement::from_monomial(y),
                    AlgebraElement::from_monomial(z),
                );
                prop_assert_eq!(
                    alg.mul(&alg.mul(&x, &y), &z),
                    alg.mul(&x, &alg.mul(&y, &z))
                );
            }

            #[test]
            fn star_reverses_products(
                x in arb_monomial(), y in arb_monomial(), s in arb_s()
            ) {
                let alg = PodlesAlgebra::new(s);
                let (x, y) = (
                    AlgebraElement::from_monomial(x),
                    AlgebraElement::from_monomial(y),
                );
                prop_assert_eq!(alg.mul(&x, &y).star(), alg.mul(&y.star(), &x.star()));
                prop_assert_eq!(x.star().star(), x);
            }
        }
    }
}

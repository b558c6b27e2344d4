//! The Z/2 crossed product of the quantum sphere by an order-two symmetry.
//!
//! Elements are written `a + b g` with `g^2 = 1` and `g a g = ρ(a)` for the
//! chosen diagonal symmetry `ρ`, so
//!
//! ```text
//!   (a + b g)(c + d g) = (a c + b ρ(d)) + (a d + b ρ(c)) g
//!   (a + b g)^*        = a^* + ρ(b^*) g
//! ```
//!
//! Projections in matrix algebras over the crossed product are the inputs
//! to the index pairings.

use crate::podles::{AlgebraElement, PodlesAlgebra, PodlesError, Twist};
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CrossedError {
    #[error("cannot combine crossed-product elements over different symmetries")]
    MixedAction,
    #[error("matrix sizes do not match ({0}x{0} vs {1}x{1})")]
    SizeMismatch(usize, usize),
    #[error("a matrix needs a positive size")]
    EmptyMatrix,
    #[error("expected {expected} entries for a {size}x{size} matrix, got {got}")]
    WrongEntryCount {
        size: usize,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Element(#[from] PodlesError),
}

/// An element `even + odd·g` of the crossed product for the symmetry
/// `action`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossedElement {
    action: Twist,
    even: AlgebraElement,
    odd: AlgebraElement,
}

impl CrossedElement {
    pub fn new(action: Twist, even: AlgebraElement, odd: AlgebraElement) -> Self {
        CrossedElement { action, even, odd }
    }

    pub fn zero(action: Twist) -> Self {
        Self::new(action, AlgebraElement::zero(), AlgebraElement::zero())
    }

    pub fn one(action: Twist) -> Self {
        Self::new(action, AlgebraElement::one(), AlgebraElement::zero())
    }

    /// The group generator `g` itself.
    pub fn group_generator(action: Twist) -> Self {
        Self::new(action, AlgebraElement::zero(), AlgebraElement::one())
    }

    pub fn embed(action: Twist, a: AlgebraElement) -> Self {
        Self::new(action, a, AlgebraElement::zero())
    }

    pub fn action(&self) -> Twist {
        self.action
    }

    pub fn even(&self) -> &AlgebraElement {
        &self.even
    }

    pub fn odd(&self) -> &AlgebraElement {
        &self.odd
    }

    pub fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.is_zero()
    }

    fn check_action(&self, other: &Self) -> Result<(), CrossedError> {
        if self.action == other.action {
            Ok(())
        } else {
            Err(CrossedError::MixedAction)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, CrossedError> {
        self.check_action(other)?;
        Ok(Self::new(
            self.action,
            &self.even + &other.even,
            &self.odd + &other.odd,
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CrossedError> {
        self.check_action(other)?;
        Ok(Self::new(
            self.action,
            &self.even - &other.even,
            &self.odd - &other.odd,
        ))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.action, -&self.even, -&self.odd)
    }

    pub fn cmul(&self, alg: &PodlesAlgebra, other: &Self) -> Result<Self, CrossedError> {
        self.check_action(other)?;
        let rho_c = self.action.apply(&other.even);
        let rho_d = self.action.apply(&other.odd);
        let even = &alg.mul(&self.even, &other.even) + &alg.mul(&self.odd, &rho_d);
        let odd = &alg.mul(&self.even, &other.odd) + &alg.mul(&self.odd, &rho_c);
        Ok(Self::new(self.action, even, odd))
    }

    pub fn cstar(&self) -> Self {
        Self::new(
            self.action,
            self.even.star(),
            self.action.apply(&self.odd.star()),
        )
    }

    /// Whether the element is a self-adjoint idempotent.
    pub fn is_projection(&self, alg: &PodlesAlgebra) -> Result<bool, CrossedError> {
        let sq = self.cmul(alg, self)?;
        Ok(sq == *self && self.cstar() == *self)
    }

    /// Parse `even | odd` (the `| odd` part optional) with both sides in
    /// the generator expression syntax.
    pub fn parse(alg: &PodlesAlgebra, action: Twist, src: &str) -> Result<Self, CrossedError> {
        let mut parts = src.splitn(2, '|');
        let even_src = parts.next().unwrap_or("");
        let even = alg.parse(even_src.trim())?;
        let odd = match parts.next() {
            Some(odd_src) => alg.parse(odd_src.trim())?,
            None => AlgebraElement::zero(),
        };
        Ok(Self::new(action, even, odd))
    }
}

impl fmt::Display for CrossedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.odd.is_zero() {
            write!(f, "{}", self.even)
        } else {
            write!(f, "{} | {}", self.even, self.odd)
        }
    }
}

/// A square matrix over the crossed product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossedMatrix {
    size: usize,
    action: Twist,
    /// Row-major entries, `size * size` of them.
    entries: Vec<CrossedElement>,
}

impl CrossedMatrix {
    pub fn new(
        size: usize,
        action: Twist,
        entries: Vec<CrossedElement>,
    ) -> Result<Self, CrossedError> {
        if size == 0 {
            return Err(CrossedError::EmptyMatrix);
        }
        if entries.len() != size * size {
            return Err(CrossedError::WrongEntryCount {
                size,
                expected: size * size,
                got: entries.len(),
            });
        }
        if entries.iter().any(|e| e.action() != action) {
            return Err(CrossedError::MixedAction);
        }
        Ok(CrossedMatrix {
            size,
            action,
            entries,
        })
    }

    pub fn identity(size: usize, action: Twist) -> Result<Self, CrossedError> {
        let mut entries = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                entries.push(if i == j {
                    CrossedElement::one(action)
                } else {
                    CrossedElement::zero(action)
                });
            }
        }
        Self::new(size, action, entries)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn action(&self) -> Twist {
        self.action
    }

    pub fn entry(&self, i: usize, j: usize) -> &CrossedElement {
        &self.entries[i * self.size + j]
    }

    pub fn mul(&self, alg: &PodlesAlgebra, other: &Self) -> Result<Self, CrossedError> {
        if self.size != other.size {
            return Err(CrossedError::SizeMismatch(self.size, other.size));
        }
        if self.action != other.action {
            return Err(CrossedError::MixedAction);
        }
        let mut entries = Vec::with_capacity(self.size * self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                let mut acc = CrossedElement::zero(self.action);
                for k in 0..self.size {
                    let prod = self.entry(i, k).cmul(alg, other.entry(k, j))?;
                    acc = acc.add(&prod)?;
                }
                entries.push(acc);
            }
        }
        Self::new(self.size, self.action, entries)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut entries = Vec::with_capacity(self.size * self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                entries.push(self.entry(j, i).cstar());
            }
        }
        CrossedMatrix {
            size: self.size,
            action: self.action,
            entries,
        }
    }

    pub fn is_projection(&self, alg: &PodlesAlgebra) -> Result<bool, CrossedError> {
        Ok(self.mul(alg, self)? == *self && self.adjoint() == *self)
    }

    /// Diagonal entries, the only input the index pairings consume.
    pub fn diagonal(&self) -> impl Iterator<Item = &CrossedElement> {
        (0..self.size).map(move |i| self.entry(i, i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use std::str::FromStr;

    fn alg(s: &str) -> PodlesAlgebra {
        PodlesAlgebra::new(BigRational::from_str(s).unwrap())
    }

    #[test]
    fn group_generator_squares_to_one() {
        let alg = alg("1/2");
        let g = CrossedElement::group_generator(Twist::Sigma);
        assert_eq!(
            g.cmul(&alg, &g).unwrap(),
            CrossedElement::one(Twist::Sigma)
        );
    }

    #[test]
    fn conjugation_by_g_applies_the_symmetry() {
        // g (B g) = ρ(B) = -B under the ladder sign flip.
        let alg = alg("1/2");
        let g = CrossedElement::group_generator(Twist::Sigma);
        let b = alg.parse("B").unwrap();
        let bg = CrossedElement::new(Twist::Sigma, AlgebraElement::zero(), b.clone());
        let prod = g.cmul(&alg, &bg).unwrap();
        assert_eq!(prod.even(), &-&b);
        assert!(prod.odd().is_zero());
    }

    #[test]
    fn star_twists_the_odd_part() {
        let alg = alg("1");
        let b = alg.parse("B").unwrap();
        let bg = CrossedElement::new(Twist::Sigma, AlgebraElement::zero(), b);
        let star = bg.cstar();
        assert_eq!(star.odd(), &alg.parse("-Bs").unwrap());
        assert!(star.even().is_zero());
    }

    #[test]
    fn averaging_idempotent_is_a_projection() {
        // (1 + g)/2 is the basic projection of the group algebra.
        let alg = alg("1/2");
        let p = CrossedElement::parse(&alg, Twist::Sigma, "1/2 | 1/2").unwrap();
        assert!(p.is_projection(&alg).unwrap());
        let not_p = CrossedElement::parse(&alg, Twist::Sigma, "1/2 | B").unwrap();
        assert!(!not_p.is_projection(&alg).unwrap());
    }

    #[test]
    fn mixed_actions_are_rejected() {
        let alg = alg("1");
        let x = CrossedElement::one(Twist::Sigma);
        let y = CrossedElement::one(Twist::Mu);
        assert!(matches!(x.cmul(&alg, &y), Err(CrossedError::MixedAction)));
        assert!(matches!(x.add(&y), Err(CrossedError::MixedAction)));
    }

    #[test]
    fn parse_and_display_round_trip() {
        let alg = alg("1");
        let e = CrossedElement::parse(&alg, Twist::Mu, "1 - A | q*B").unwrap();
        assert_eq!(e.to_string(), "1 - A | q*B");
        let even_only = CrossedElement::parse(&alg, Twist::Mu, "A^2").unwrap();
        assert_eq!(even_only.to_string(), "A^2");
        assert!(even_only.odd().is_zero());
    }

    #[test]
    fn matrix_identity_and_projection() {
        let alg = alg("1/2");
        let id = CrossedMatrix::identity(2, Twist::Sigma).unwrap();
        assert!(id.is_projection(&alg).unwrap());
        let p = CrossedElement::parse(&alg, Twist::Sigma, "1/2 | 1/2").unwrap();
        let z = CrossedElement::zero(Twist::Sigma);
        let diag =
            CrossedMatrix::new(2, Twist::Sigma, vec![p.clone(), z.clone(), z, p]).unwrap();
        assert!(diag.is_projection(&alg).unwrap());
        assert_eq!(diag.mul(&alg, &id).unwrap(), diag);
        let diag_entries: Vec<_> = diag.diagonal().collect();
        assert_eq!(diag_entries.len(), 2);
    }

    #[test]
    fn matrix_shape_errors() {
        let z = CrossedElement::zero(Twist::Sigma);
        assert!(matches!(
            CrossedMatrix::new(2, Twist::Sigma, vec![z.clone(); 3]),
            Err(CrossedError::WrongEntryCount { .. })
        ));
        assert!(matches!(
            CrossedMatrix::new(0, Twist::Sigma, vec![]),
            Err(CrossedError::EmptyMatrix)
        ));
    }
}

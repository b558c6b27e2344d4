//! Trace functionals on the sphere algebra and the degree-zero index
//! pairing of crossed-product projections against them.
//!
//! Two evaluation rules matter: the unit-coefficient trace `τ₀` and the
//! restricted Haar weight `f_A`, which acts on the powers of `A` by
//!
//! ```text
//!   f_A(A^{r+1}) = (1 - q^4) / (1 - q^{2r+4}),    f_A(ladder monomial) = 0,
//! ```
//!
//! with `f_A(1) = 0` by convention (the table entry for the trivial class
//! pins this normalization).  Each functional reads one component of a
//! crossed-product element `a + b·g`: the plain part ("even") or the
//! coefficient of `g` ("odd", the twisted copy of the same rule).

use crate::crossed::{CrossedError, CrossedMatrix};
use crate::homology::Orbifold;
use crate::podles::{AlgebraElement, PbwMonomial, PodlesAlgebra};
use crate::scalar::RatFunc;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChernError {
    #[error("the matrix is not a projection (p·p = p = p* fails)")]
    NotAProjection,
    #[error("projection uses the {got} symmetry, the table needs {expected}")]
    SymmetryMismatch {
        expected: &'static str,
        got: &'static str,
    },
    #[error(transparent)]
    Crossed(#[from] CrossedError),
}

/// Which crossed-product component a functional reads: the plain part of
/// `a + b·g` or the coefficient of the group generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Even,
    Odd,
}

/// The unit-coefficient rule on a basis monomial.
pub fn tau0_monomial(m: &PbwMonomial) -> RatFunc {
    if m.is_unit() {
        RatFunc::one()
    } else {
        RatFunc::zero()
    }
}

/// The Haar-weight rule on a basis monomial: `A^{r+1}` maps to
/// `(1-q^4)/(1-q^{2r+4})`, everything else (including the unit) to zero.
pub fn haar_monomial(m: &PbwMonomial) -> RatFunc {
    if m.ladder().is_some() || m.a_pow() == 0 {
        return RatFunc::zero();
    }
    let num = RatFunc::one_minus_q_pow(4);
    let den = RatFunc::one_minus_q_pow(2 * m.a_pow() as usize + 2);
    num.checked_div(&den)
        .expect("1 - q^{2r+4} is a nonzero polynomial")
}

fn extend_linearly(rule: fn(&PbwMonomial) -> RatFunc, x: &AlgebraElement) -> RatFunc {
    let mut acc = RatFunc::zero();
    for (m, c) in x.terms() {
        let v = rule(m);
        if !v.is_zero() {
            acc = &acc + &(c * &v);
        }
    }
    acc
}

/// Coefficient of the unit monomial in PBW normal form.
pub fn tau0(x: &AlgebraElement) -> RatFunc {
    x.coeff(&PbwMonomial::unit())
}

/// Linear extension of the Haar-weight rule.
pub fn haar_fa(x: &AlgebraElement) -> RatFunc {
    extend_linearly(haar_monomial, x)
}

/// A linear functional given by a total rule on basis monomials, tagged
/// with the crossed-product slot it evaluates.
#[derive(Clone)]
pub struct TraceFunctional {
    name: String,
    slot: Slot,
    rule: fn(&PbwMonomial) -> RatFunc,
}

impl TraceFunctional {
    pub fn new(name: impl Into<String>, slot: Slot, rule: fn(&PbwMonomial) -> RatFunc) -> Self {
        TraceFunctional {
            name: name.into(),
            slot,
            rule,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn slot(&self) -> Slot {
        self.slot
    }

    pub fn evaluate(&self, x: &AlgebraElement) -> RatFunc {
        extend_linearly(self.rule, x)
    }

    /// Evaluate on the slot component of a crossed-product element.
    pub fn evaluate_crossed(&self, e: &crate::crossed::CrossedElement) -> RatFunc {
        let component = match self.slot {
            Slot::Even => e.even(),
            Slot::Odd => e.odd(),
        };
        self.evaluate(component)
    }
}

impl fmt::Debug for TraceFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TraceFunctional")
            .field("name", &self.name)
            .field("slot", &self.slot)
            .finish()
    }
}

/// The even periodic cocycles paired against `K₀` for each orbifold: four
/// for the disc (both rules on both slots), one for the projective plane.
pub fn cocycles(orbifold: Orbifold) -> Vec<TraceFunctional> {
    match orbifold {
        Orbifold::Dq => vec![
            TraceFunctional::new("Sτ₀", Slot::Even, tau0_monomial),
            TraceFunctional::new("Sf_A", Slot::Even, haar_monomial),
            TraceFunctional::new("S_στ₀", Slot::Odd, tau0_monomial),
            TraceFunctional::new("S_σf_A", Slot::Odd, haar_monomial),
        ],
        Orbifold::RP2q => vec![TraceFunctional::new("Sτ₀", Slot::Even, tau0_monomial)],
    }
}

/// The degree-zero Chern pairing: sum of the functional over the diagonal
/// of a projection matrix.
pub fn pair(
    alg: &PodlesAlgebra,
    p: &CrossedMatrix,
    phi: &TraceFunctional,
) -> Result<RatFunc, ChernError> {
    if !p.is_projection(alg)? {
        return Err(ChernError::NotAProjection);
    }
    let mut acc = RatFunc::zero();
    for e in p.diagonal() {
        acc = &acc + &phi.evaluate_crossed(e);
    }
    Ok(acc)
}

/// An exact pairing table: `K₀` class rows against cocycle columns.
#[derive(Clone, Debug, Serialize)]
pub struct IndexTable {
    orbifold: String,
    rows: Vec<String>,
    cols: Vec<String>,
    entries: Vec<Vec<RatFunc>>,
    notes: Vec<String>,
}

impl IndexTable {
    pub fn orbifold(&self) -> &str {
        &self.orbifold
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn entry(&self, row: usize, col: usize) -> &RatFunc {
        &self.entries[row][col]
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("|  |");
        for c in &self.cols {
            out.push_str(&format!(" {c} |"));
        }
        out.push('\n');
        out.push_str("| --- |");
        for _ in &self.cols {
            out.push_str(" --- |");
        }
        out.push('\n');
        for (label, row) in self.rows.iter().zip(&self.entries) {
            out.push_str(&format!("| {label} |"));
            for e in row {
                out.push_str(&format!(" {e} |"));
            }
            out.push('\n');
        }
        for note in &self.notes {
            out.push('\n');
            out.push_str(note);
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("class");
        for c in &self.cols {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (label, row) in self.rows.iter().zip(&self.entries) {
            out.push_str(label);
            for e in row {
                out.push_str(&format!(",{e}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("table serializes")
    }
}

/// Pair the built-in trivial class `[1]`, plus any user-supplied
/// projections, against the orbifold's cocycles.
pub fn index_table(
    alg: &PodlesAlgebra,
    orbifold: Orbifold,
    extras: &[CrossedMatrix],
) -> Result<IndexTable, ChernError> {
    let action = orbifold.action();
    let cols = cocycles(orbifold);
    let mut rows = vec![(
        format!("[1_{}]", orbifold.label()),
        CrossedMatrix::identity(1, action)?,
    )];
    for (i, p) in extras.iter().enumerate() {
        if p.action() != action {
            return Err(ChernError::SymmetryMismatch {
                expected: action.label(),
                got: p.action().label(),
            });
        }
        rows.push((format!("[P{}]", i + 1), p.clone()));
    }
    let mut entries = Vec::with_capacity(rows.len());
    for (_, p) in &rows {
        let mut row = Vec::with_capacity(cols.len());
        for phi in &cols {
            row.push(pair(alg, p, phi)?);
        }
        entries.push(row);
    }
    let notes = if cols.iter().any(|c| c.name().contains("f_A")) {
        vec!["f_A(1) = 0 by convention".to_string()]
    } else {
        Vec::new()
    };
    Ok(IndexTable {
        orbifold: orbifold.label().to_string(),
        rows: rows.into_iter().map(|(label, _)| label).collect(),
        cols: cols.into_iter().map(|c| c.name).collect(),
        entries,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossed::CrossedElement;
    use crate::podles::{basis_up_to, Gen, Twist};
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::str::FromStr;

    fn alg() -> PodlesAlgebra {
        PodlesAlgebra::new(BigRational::from_str("1").unwrap())
    }

    fn half() -> RatFunc {
        RatFunc::rational(&BigRational::from_str("1/2").unwrap())
    }

    /// The projection (1 + g)/2 as a 1x1 matrix.
    fn halved_group_projection(action: Twist) -> CrossedMatrix {
        let e = CrossedElement::new(
            action,
            AlgebraElement::scalar(half()),
            AlgebraElement::scalar(half()),
        );
        CrossedMatrix::new(1, action, vec![e]).unwrap()
    }

    #[test]
    fn unit_trace_reads_the_unit_coefficient() {
        let alg = alg();
        assert_eq!(tau0(&AlgebraElement::one()), RatFunc::one());

        let mut x = AlgebraElement::generator(Gen::A);
        x.add_term(PbwMonomial::ladder_power(crate::podles::Ladder::B, 2), RatFunc::int(3));
        assert!(tau0(&x).is_zero());

        // B·Bs = 1 - q^4 A^2 at s = 1, so the unit coefficient is 1.
        let b = AlgebraElement::generator(Gen::B);
        let bs = AlgebraElement::generator(Gen::Bstar);
        assert_eq!(tau0(&alg.mul(&b, &bs)), RatFunc::one());
        assert_eq!(tau0(&alg.mul(&bs, &b)), RatFunc::one());
    }

    #[test]
    fn haar_functional_matches_its_closed_form() {
        // f_A(A) = (1-q^4)/(1-q^4) = 1, f_A(A^3) = (1-q^4)/(1-q^8) = 1/(1+q^4).
        let a = AlgebraElement::generator(Gen::A);
        assert_eq!(haar_fa(&a), RatFunc::one());

        let a3 = AlgebraElement::from_monomial(PbwMonomial::a_power(3));
        let expected = RatFunc::one()
            .checked_div(&(&RatFunc::one() + &RatFunc::q_power(4)))
            .unwrap();
        assert_eq!(haar_fa(&a3), expected);
        assert_eq!(haar_fa(&a3).to_string(), "1/(1+q^4)");

        assert!(haar_fa(&AlgebraElement::one()).is_zero());
        let mixed = AlgebraElement::from_monomial(PbwMonomial::new(
            2,
            Some((crate::podles::Ladder::B, 3)),
        ));
        assert!(haar_fa(&mixed).is_zero());

        // Closed form on every basis monomial up to degree 10:
        // f_A(A^{r+1})·(1-q^{2r+4}) = 1-q^4 and ladder monomials vanish.
        for m in basis_up_to(10) {
            let value = haar_monomial(&m);
            if m.ladder().is_some() || m.is_unit() {
                assert!(value.is_zero(), "f_A({m}) should vanish");
            } else {
                let r = m.a_pow() as usize - 1;
                let product = &value * &RatFunc::one_minus_q_pow(2 * r + 4);
                assert_eq!(product, RatFunc::one_minus_q_pow(4), "f_A({m})");
            }
        }
    }

    #[test]
    fn unit_trace_vanishes_on_commutators() {
        let alg = alg();
        let basis = basis_up_to(4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..120 {
            let mut x = AlgebraElement::zero();
            let mut y = AlgebraElement::zero();
            for _ in 0..3 {
                let m = basis[rng.gen_range(0..basis.len())];
                x.add_term(m, RatFunc::int(rng.gen_range(-3i64..=3)));
                let m = basis[rng.gen_range(0..basis.len())];
                y.add_term(m, RatFunc::int(rng.gen_range(-3i64..=3)));
            }
            let commutator = &alg.mul(&x, &y) - &alg.mul(&y, &x);
            assert!(tau0(&commutator).is_zero(), "τ₀[{x}, {y}] ≠ 0");
        }
    }

    #[test]
    fn disc_identity_row_pairs_to_one_zero_zero_zero() {
        let alg = alg();
        let one = CrossedMatrix::identity(1, Twist::Sigma).unwrap();
        let values: Vec<RatFunc> = cocycles(Orbifold::Dq)
            .iter()
            .map(|phi| pair(&alg, &one, phi).unwrap())
            .collect();
        assert_eq!(
            values,
            vec![
                RatFunc::one(),
                RatFunc::zero(),
                RatFunc::zero(),
                RatFunc::zero()
            ]
        );
    }

    #[test]
    fn plane_identity_pairs_to_one() {
        let alg = alg();
        let one = CrossedMatrix::identity(1, Twist::Mu).unwrap();
        let phi = &cocycles(Orbifold::RP2q)[0];
        assert_eq!(pair(&alg, &one, phi).unwrap(), RatFunc::one());
    }

    #[test]
    fn halved_group_projection_pairs_to_one_half() {
        let alg = alg();
        let p = halved_group_projection(Twist::Mu);
        assert!(p.is_projection(&alg).unwrap());
        let even = TraceFunctional::new("Sτ₀", Slot::Even, tau0_monomial);
        let odd = TraceFunctional::new("S_στ₀", Slot::Odd, tau0_monomial);
        assert_eq!(pair(&alg, &p, &even).unwrap(), half());
        assert_eq!(pair(&alg, &p, &odd).unwrap(), half());
    }

    #[test]
    fn pairing_rejects_non_projections() {
        let alg = alg();
        // A is self-adjoint but not idempotent.
        let e = CrossedElement::embed(Twist::Sigma, AlgebraElement::generator(Gen::A));
        let m = CrossedMatrix::new(1, Twist::Sigma, vec![e]).unwrap();
        let phi = &cocycles(Orbifold::Dq)[0];
        assert!(matches!(
            pair(&alg, &m, phi),
            Err(ChernError::NotAProjection)
        ));
    }

    #[test]
    fn pairing_adds_over_block_sums_and_ignores_permutation() {
        let alg = alg();
        let action = Twist::Sigma;
        let p = CrossedMatrix::identity(1, action).unwrap();
        let r = halved_group_projection(action);
        let zero = CrossedElement::zero(action);
        let block = CrossedMatrix::new(
            2,
            action,
            vec![
                p.entry(0, 0).clone(),
                zero.clone(),
                zero.clone(),
                r.entry(0, 0).clone(),
            ],
        )
        .unwrap();
        assert!(block.is_projection(&alg).unwrap());

        let swap = CrossedMatrix::new(
            2,
            action,
            vec![
                zero.clone(),
                CrossedElement::one(action),
                CrossedElement::one(action),
                zero,
            ],
        )
        .unwrap();
        let conjugated = swap.mul(&alg, &block).unwrap().mul(&alg, &swap).unwrap();

        for phi in cocycles(Orbifold::Dq) {
            let total = pair(&alg, &block, &phi).unwrap();
            let parts = &pair(&alg, &p, &phi).unwrap() + &pair(&alg, &r, &phi).unwrap();
            assert_eq!(total, parts, "{} not additive", phi.name());
            assert_eq!(
                pair(&alg, &conjugated, &phi).unwrap(),
                total,
                "{} not permutation-invariant",
                phi.name()
            );
        }
    }

    #[test]
    fn index_tables_match_expected_shape() {
        let alg = alg();
        let dq = index_table(&alg, Orbifold::Dq, &[]).unwrap();
        assert_eq!(dq.rows(), ["[1_Dq]"]);
        assert_eq!(dq.cols(), ["Sτ₀", "Sf_A", "S_στ₀", "S_σf_A"]);
        assert_eq!(dq.entry(0, 0), &RatFunc::one());
        for j in 1..4 {
            assert!(dq.entry(0, j).is_zero());
        }
        assert_eq!(dq.notes(), ["f_A(1) = 0 by convention"]);

        let rp = index_table(&alg, Orbifold::RP2q, &[]).unwrap();
        assert_eq!(rp.rows(), ["[1_RP2q]"]);
        assert_eq!(rp.cols(), ["Sτ₀"]);
        assert_eq!(rp.entry(0, 0), &RatFunc::one());
        assert!(rp.notes().is_empty());

        // A user projection with no unit part in its even slot pairs to 0.
        let zero_p = CrossedMatrix::new(1, Twist::Mu, vec![CrossedElement::zero(Twist::Mu)]).unwrap();
        let with_extra = index_table(&alg, Orbifold::RP2q, &[zero_p]).unwrap();
        assert_eq!(with_extra.rows(), ["[1_RP2q]", "[P1]"]);
        assert!(with_extra.entry(1, 0).is_zero());

        // Projections over the wrong symmetry are rejected.
        let wrong = CrossedMatrix::identity(1, Twist::Sigma).unwrap();
        assert!(matches!(
            index_table(&alg, Orbifold::RP2q, &[wrong]),
            Err(ChernError::SymmetryMismatch { .. })
        ));
    }

    #[test]
    fn table_emitters_are_stable() {
        let alg = alg();
        let dq = index_table(&alg, Orbifold::Dq, &[]).unwrap();
        assert_eq!(
            dq.to_markdown(),
            "|  | Sτ₀ | Sf_A | S_στ₀ | S_σf_A |\n\
             | --- | --- | --- | --- | --- |\n\
             | [1_Dq] | 1 | 0 | 0 | 0 |\n\
             \nf_A(1) = 0 by convention\n"
        );
        assert_eq!(
            dq.to_csv(),
            "class,Sτ₀,Sf_A,S_στ₀,S_σf_A\n[1_Dq],1,0,0,0\n"
        );
        let json = dq.to_json();
        assert_eq!(json["orbifold"], "Dq");
        assert_eq!(json["entries"][0][0], "1");
        assert_eq!(json["entries"][0][3], "0");
    }
}

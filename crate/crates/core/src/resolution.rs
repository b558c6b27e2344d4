//! The MNW resolution (d₁, d₂) and the bar resolution (b′) of the
//! quantum-sphere algebra over its enveloping algebra, with the comparison
//! chain maps f (MNW → bar) and h (bar → MNW).
//!
//! The MNW resolution is the small free resolution with ranks 1, 3, 4: in
//! degree 1 the module has basis `e_A, e_B, e_Bs`, in degree 2 it has the
//! two wedge generators and the two ladder generators `theta_S`,
//! `theta_T`.  Degrees above 2 are not modeled.
//!
//! Two published details of d₂ need repair before the defining property
//! d₁∘d₂ = 0 can hold: the two wedge displays carry the same left-hand
//! label (the one whose right side involves `e_B` is taken to define
//! d₂(e_A∧e_B)), and the scalar in front of the `e_A` term of the
//! `theta_S` column is ambiguous up to a misplaced parenthesis.  The
//! constructor searches the candidate scalars {±q, ±q³, ±q⁻¹} and keeps
//! the unique one that makes d₁∘d₂ vanish, reporting the choice.  The
//! `theta` columns close only when s² = 1; for other parameter values the
//! constructor fails with the obstruction.

use crate::podles::{AlgebraElement, Gen, PbwMonomial, PodlesAlgebra};
use crate::scalar::RatFunc;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ResolutionError {
    #[error("operation defined in degree {expected}, chain has degree {got}")]
    Degree { expected: String, got: u8 },
    #[error(
        "the degree-two differential does not close at s = {s}: \
         d1(d2(theta_T)) = {residual}"
    )]
    Obstructed { s: String, residual: String },
    #[error("no candidate scalar closes the theta_S column; best residual {residual}")]
    NoCoefficient { residual: String },
    #[error("several candidate scalars close the theta_S column: {matches:?}")]
    AmbiguousCoefficient { matches: Vec<String> },
}

/// An element of the enveloping algebra 𝒜 ⊗ 𝒜ᵒᵖ, stored as PBW pairs; a
/// pair `(x, y)` denotes `x ⊗ yᵒ` and multiplies by
/// `(x⊗yᵒ)(u⊗vᵒ) = xu ⊗ (vy)ᵒ`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct EnvElement {
    terms: BTreeMap<(PbwMonomial, PbwMonomial), RatFunc>,
}

impl EnvElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_pair(PbwMonomial::unit(), PbwMonomial::unit())
    }

    pub fn from_pair(x: PbwMonomial, y: PbwMonomial) -> Self {
        Self::from_term(x, y, RatFunc::one())
    }

    pub fn from_term(x: PbwMonomial, y: PbwMonomial, c: RatFunc) -> Self {
        let mut e = Self::zero();
        e.add_term(x, y, c);
        e
    }

    /// The tensor product of two normal-form elements.
    pub fn tensor(x: &AlgebraElement, y: &AlgebraElement) -> Self {
        let mut out = Self::zero();
        for (mx, cx) in x.terms() {
            for (my, cy) in y.terms() {
                out.add_term(*mx, *my, cx * cy);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, x: PbwMonomial, y: PbwMonomial, c: RatFunc) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((x, y)) {
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

    pub fn terms(&self) -> impl Iterator<Item = (&(PbwMonomial, PbwMonomial), &RatFunc)> {
        self.terms.iter()
    }

    pub fn scale(&self, c: &RatFunc) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        EnvElement {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn mul(&self, alg: &PodlesAlgebra, other: &Self) -> Self {
        let mut out = Self::zero();
        for ((x, y), c1) in &self.terms {
            for ((u, v), c2) in &other.terms {
                let left = alg.mul_monomials(x, u);
                let right = alg.mul_monomials(v, y);
                let c = c1 * c2;
                for (ml, cl) in left.terms() {
                    for (mr, cr) in right.terms() {
                        out.add_term(*ml, *mr, &(&c * cl) * cr);
                    }
                }
            }
        }
        out
    }

    /// Multiplication map 𝒜 ⊗ 𝒜ᵒᵖ → 𝒜, `x ⊗ yᵒ ↦ xy`.
    pub fn augment(&self, alg: &PodlesAlgebra) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for ((x, y), c) in &self.terms {
            let prod = alg.mul_monomials(x, y);
            for (m, v) in prod.terms() {
                out.add_term(*m, v * c);
            }
        }
        out
    }
}

impl std::ops::Add for &EnvElement {
    type Output = EnvElement;
    fn add(self, rhs: &EnvElement) -> EnvElement {
        let mut out = self.clone();
        for ((x, y), c) in &rhs.terms {
            out.add_term(*x, *y, c.clone());
        }
        out
    }
}

impl std::ops::Sub for &EnvElement {
    type Output = EnvElement;
    fn sub(self, rhs: &EnvElement) -> EnvElement {
        let mut out = self.clone();
        for ((x, y), c) in &rhs.terms {
            out.add_term(*x, *y, -c);
        }
        out
    }
}

impl std::ops::Neg for &EnvElement {
    type Output = EnvElement;
    fn neg(self) -> EnvElement {
        EnvElement {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}

impl fmt::Display for EnvElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (i, ((x, y), c)) in self.terms.iter().enumerate() {
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
            let body = format!("{}⊗{}", x, y);
            if mag.is_one() {
                out.push_str(&body);
            } else {
                out.push_str(&format!("{}*{}", mag.factor_text(), body));
            }
        }
        write!(f, "{}", out)
    }
}

/// Basis labels of the MNW modules, tagged with the degree they live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MnwLabel {
    Unit,
    EA,
    EB,
    EBstar,
    WedgeAB,
    WedgeABstar,
    ThetaS,
    ThetaT,
}

impl MnwLabel {
    pub fn degree(self) -> u8 {
        match self {
            MnwLabel::Unit => 0,
            MnwLabel::EA | MnwLabel::EB | MnwLabel::EBstar => 1,
            _ => 2,
        }
    }

    pub fn of_degree(n: u8) -> &'static [MnwLabel] {
        match n {
            0 => &[MnwLabel::Unit],
            1 => &[MnwLabel::EA, MnwLabel::EB, MnwLabel::EBstar],
            2 => &[
                MnwLabel::WedgeAB,
                MnwLabel::WedgeABstar,
                MnwLabel::ThetaS,
                MnwLabel::ThetaT,
            ],
            _ => &[],
        }
    }

    pub fn text(self) -> &'static str {
        match self {
            MnwLabel::Unit => "1",
            MnwLabel::EA => "e_A",
            MnwLabel::EB => "e_B",
            MnwLabel::EBstar => "e_Bs",
            MnwLabel::WedgeAB => "e_A∧e_B",
            MnwLabel::WedgeABstar => "e_A∧e_Bs",
            MnwLabel::ThetaS => "theta_S",
            MnwLabel::ThetaT => "theta_T",
        }
    }

    /// The degree-1 label for a generator.
    pub fn edge(t: Gen) -> MnwLabel {
        match t {
            Gen::A => MnwLabel::EA,
            Gen::B => MnwLabel::EB,
            Gen::Bstar => MnwLabel::EBstar,
        }
    }

    pub fn edge_generator(self) -> Option<Gen> {
        match self {
            MnwLabel::EA => Some(Gen::A),
            MnwLabel::EB => Some(Gen::B),
            MnwLabel::EBstar => Some(Gen::Bstar),
            _ => None,
        }
    }
}

/// An element of an MNW module: an 𝒜ᵉ-combination of the basis labels of
/// one degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MnwChain {
    degree: u8,
    terms: BTreeMap<(MnwLabel, PbwMonomial, PbwMonomial), RatFunc>,
}

impl MnwChain {
    pub fn zero(degree: u8) -> Self {
        MnwChain {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn generator(label: MnwLabel) -> Self {
        let mut c = Self::zero(label.degree());
        c.add_term(label, PbwMonomial::unit(), PbwMonomial::unit(), RatFunc::one());
        c
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, label: MnwLabel, x: PbwMonomial, y: PbwMonomial, c: RatFunc) {
        assert_eq!(
            label.degree(),
            self.degree,
            "label {} does not live in degree {}",
            label.text(),
            self.degree
        );
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((label, x, y)) {
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

    pub fn add_env(&mut self, label: MnwLabel, env: &EnvElement) {
        for ((x, y), c) in env.terms() {
            self.add_term(label, *x, *y, c.clone());
        }
    }

    pub fn terms(
        &self,
    ) -> impl Iterator<Item = (&(MnwLabel, PbwMonomial, PbwMonomial), &RatFunc)> {
        self.terms.iter()
    }

    /// The 𝒜ᵉ-coefficient of one basis label.
    pub fn coefficient_of(&self, label: MnwLabel) -> EnvElement {
        let mut env = EnvElement::zero();
        for ((l, x, y), c) in &self.terms {
            if *l == label {
                env.add_term(*x, *y, c.clone());
            }
        }
        env
    }

    /// Left action of an enveloping-algebra element on the free module.
    pub fn act(&self, alg: &PodlesAlgebra, env: &EnvElement) -> Self {
        let mut out = Self::zero(self.degree);
        for ((label, x, y), c) in &self.terms {
            let coeff = EnvElement::from_term(*x, *y, c.clone());
            let prod = env.mul(alg, &coeff);
            out.add_env(*label, &prod);
        }
        out
    }

    pub fn scale(&self, c: &RatFunc) -> Self {
        if c.is_zero() {
            return Self::zero(self.degree);
        }
        MnwChain {
            degree: self.degree,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<_> = self
            .terms
            .iter()
            .map(|((l, x, y), c)| {
                serde_json::json!({
                    "label": l.text(),
                    "left": x.to_string(),
                    "right": y.to_string(),
                    "coeff": c.to_string(),
                })
            })
            .collect();
        serde_json::json!({ "degree": self.degree, "terms": terms })
    }
}

impl std::ops::Add for &MnwChain {
    type Output = MnwChain;
    fn add(self, rhs: &MnwChain) -> MnwChain {
        assert_eq!(self.degree, rhs.degree);
        let mut out = self.clone();
        for ((l, x, y), c) in &rhs.terms {
            out.add_term(*l, *x, *y, c.clone());
        }
        out
    }
}

impl std::ops::Sub for &MnwChain {
    type Output = MnwChain;
    fn sub(self, rhs: &MnwChain) -> MnwChain {
        assert_eq!(self.degree, rhs.degree);
        let mut out = self.clone();
        for ((l, x, y), c) in &rhs.terms {
            out.add_term(*l, *x, *y, -c);
        }
        out
    }
}

impl fmt::Display for MnwChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (i, ((label, x, y), c)) in self.terms.iter().enumerate() {
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
            let body = if *label == MnwLabel::Unit {
                format!("{}⊗{}", x, y)
            } else if x.is_unit() && y.is_unit() {
                label.text().to_string()
            } else {
                format!("({}⊗{}){}", x, y, label.text())
            };
            if mag.is_one() {
                out.push_str(&body);
            } else {
                out.push_str(&format!("{}*{}", mag.factor_text(), body));
            }
        }
        write!(f, "{}", out)
    }
}

/// An element of the bar resolution in resolution degree `n`: a
/// combination of `(n+2)`-fold tensors of basis monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarChain {
    degree: u8,
    terms: BTreeMap<Vec<PbwMonomial>, RatFunc>,
}

impl BarChain {
    pub fn zero(degree: u8) -> Self {
        BarChain {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_tuple(tuple: Vec<PbwMonomial>) -> Self {
        assert!(tuple.len() >= 2, "bar chains have at least two factors");
        let degree = (tuple.len() - 2) as u8;
        let mut c = Self::zero(degree);
        c.add_term(tuple, RatFunc::one());
        c
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    pub fn arity(&self) -> usize {
        usize::from(self.degree) + 2
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, tuple: Vec<PbwMonomial>, c: RatFunc) {
        assert_eq!(tuple.len(), self.arity(), "tuple arity mismatch");
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(tuple) {
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

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<PbwMonomial>, &RatFunc)> {
        self.terms.iter()
    }

    /// The bimodule action `(x⊗yᵒ)·(a₀⊗…⊗a_k) = (x a₀)⊗…⊗(a_k y)`.
    pub fn act(&self, alg: &PodlesAlgebra, env: &EnvElement) -> Self {
        let mut out = Self::zero(self.degree);
        for ((x, y), c1) in env.terms() {
            for (tuple, c2) in &self.terms {
                let first = alg.mul_monomials(x, &tuple[0]);
                let last = alg.mul_monomials(&tuple[tuple.len() - 1], y);
                let c = c1 * c2;
                for (mf, cf) in first.terms() {
                    for (ml, cl) in last.terms() {
                        let mut t = tuple.clone();
                        t[0] = *mf;
                        let k = t.len() - 1;
                        t[k] = *ml;
                        out.add_term(t, &(&c * cf) * cl);
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &RatFunc) -> Self {
        if c.is_zero() {
            return Self::zero(self.degree);
        }
        BarChain {
            degree: self.degree,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// Multiplication map 𝒜^{⊗2} → 𝒜 on degree-0 chains.
    pub fn augment(&self, alg: &PodlesAlgebra) -> AlgebraElement {
        assert_eq!(self.degree, 0, "augmentation is defined in degree 0");
        let mut out = AlgebraElement::zero();
        for (tuple, c) in &self.terms {
            let prod = alg.mul_monomials(&tuple[0], &tuple[1]);
            for (m, v) in prod.terms() {
                out.add_term(*m, v * c);
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<_> = self
            .terms
            .iter()
            .map(|(tuple, c)| {
                serde_json::json!({
                    "tuple": tuple.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                    "coeff": c.to_string(),
                })
            })
            .collect();
        serde_json::json!({ "degree": self.degree, "terms": terms })
    }
}

impl std::ops::Add for &BarChain {
    type Output = BarChain;
    fn add(self, rhs: &BarChain) -> BarChain {
        assert_eq!(self.degree, rhs.degree);
        let mut out = self.clone();
        for (t, c) in &rhs.terms {
            out.add_term(t.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &BarChain {
    type Output = BarChain;
    fn sub(self, rhs: &BarChain) -> BarChain {
        assert_eq!(self.degree, rhs.degree);
        let mut out = self.clone();
        for (t, c) in &rhs.terms {
            out.add_term(t.clone(), -c);
        }
        out
    }
}

impl fmt::Display for BarChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (i, (tuple, c)) in self.terms.iter().enumerate() {
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
            let body = tuple
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join("⊗");
            if mag.is_one() {
                out.push_str(&body);
            } else {
                out.push_str(&format!("{}*({})", mag.factor_text(), body));
            }
        }
        write!(f, "{}", out)
    }
}

/// The extra degeneracy `s(a₀⊗…) = 1⊗a₀⊗…`; satisfies b′s + sb′ = id in
/// degrees ≥ 1 and is used to solve the lifting recursion for f₂.
pub fn bar_contracting_homotopy(c: &BarChain) -> BarChain {
    let mut out = BarChain::zero(c.degree() + 1);
    for (tuple, coeff) in c.terms() {
        let mut t = Vec::with_capacity(tuple.len() + 1);
        t.push(PbwMonomial::unit());
        t.extend_from_slice(tuple);
        out.add_term(t, coeff.clone());
    }
    out
}

/// The two resolutions of the algebra with their comparison maps.  Holds
/// the verified d₂ table; construction fails when the defining gate
/// d₁∘d₂ = 0 cannot be met.
#[derive(Clone, Debug)]
pub struct Resolution {
    alg: PodlesAlgebra,
    theta_s_coefficient: RatFunc,
    d2_table: BTreeMap<MnwLabel, MnwChain>,
    f2_table: BTreeMap<MnwLabel, BarChain>,
}

impl Resolution {
    pub fn new(alg: PodlesAlgebra) -> Result<Self, ResolutionError> {
        let q2 = RatFunc::q_power(2);
        let qm1 = RatFunc::q_power(-1);
        let a = PbwMonomial::generator(Gen::A);
        let b = PbwMonomial::generator(Gen::B);
        let bs = PbwMonomial::generator(Gen::Bstar);
        let unit = PbwMonomial::unit();

        // d2(e_A ∧ e_Bs) = (A⊗1 − q²(1⊗A)) e_Bs − (q²(B*⊗1) − 1⊗B*) e_A
        let mut wedge_abs = MnwChain::zero(1);
        wedge_abs.add_term(MnwLabel::EBstar, a, unit, RatFunc::one());
        wedge_abs.add_term(MnwLabel::EBstar, unit, a, -&q2);
        wedge_abs.add_term(MnwLabel::EA, bs, unit, -&q2);
        wedge_abs.add_term(MnwLabel::EA, unit, bs, RatFunc::one());

        // d2(e_A ∧ e_B) = (q²(A⊗1) − 1⊗A) e_B − (B⊗1 − q²(1⊗B)) e_A
        let mut wedge_ab = MnwChain::zero(1);
        wedge_ab.add_term(MnwLabel::EB, a, unit, q2.clone());
        wedge_ab.add_term(MnwLabel::EB, unit, a, -&RatFunc::one());
        wedge_ab.add_term(MnwLabel::EA, b, unit, -&RatFunc::one());
        wedge_ab.add_term(MnwLabel::EA, unit, b, q2.clone());

        // d2(theta_T) = −q⁻¹(1⊗B) e_Bs − q⁻¹(B*⊗1) e_B − q⁻¹(A⊗1 + 1⊗A) e_A
        let mut theta_t = MnwChain::zero(1);
        theta_t.add_term(MnwLabel::EBstar, unit, b, -&qm1);
        theta_t.add_term(MnwLabel::EB, bs, unit, -&qm1);
        theta_t.add_term(MnwLabel::EA, a, unit, -&qm1);
        theta_t.add_term(MnwLabel::EA, unit, a, -&qm1);

        // d2(theta_S) = −q⁻¹(B⊗1) e_Bs − q⁻¹(1⊗B*) e_B + c(A⊗1 + 1⊗A) e_A,
        // with the scalar c recovered from the d₁∘d₂ = 0 gate.
        let mut theta_s_base = MnwChain::zero(1);
        theta_s_base.add_term(MnwLabel::EBstar, b, unit, -&qm1);
        theta_s_base.add_term(MnwLabel::EB, unit, bs, -&qm1);

        let mut partial = Resolution {
            alg,
            theta_s_coefficient: RatFunc::zero(),
            d2_table: BTreeMap::new(),
            f2_table: BTreeMap::new(),
        };

        for (label, column) in [
            (MnwLabel::WedgeAB, &wedge_ab),
            (MnwLabel::WedgeABstar, &wedge_abs),
        ] {
            let residual = partial.d1_of_degree1(column);
            if !residual.is_zero() {
                return Err(ResolutionError::Obstructed {
                    s: partial.alg.s().to_string(),
                    residual: format!("{} column: {}", label.text(), residual),
                });
            }
        }

        let theta_t_residual = partial.d1_of_degree1(&theta_t);
        if !theta_t_residual.is_zero() {
            return Err(ResolutionError::Obstructed {
                s: partial.alg.s().to_string(),
                residual: theta_t_residual.to_string(),
            });
        }

        let candidates: Vec<RatFunc> = [-3i64, -1, 1, 3]
            .iter()
            .flat_map(|&e| [RatFunc::q_power(e), -&RatFunc::q_power(e)])
            .collect();
        let mut matches = Vec::new();
        let mut best_residual = String::new();
        for c in &candidates {
            let mut column = theta_s_base.clone();
            column.add_term(MnwLabel::EA, a, unit, c.clone());
            column.add_term(MnwLabel::EA, unit, a, c.clone());
            let residual = partial.d1_of_degree1(&column);
            if residual.is_zero() {
                matches.push(c.clone());
            } else if best_residual.is_empty() {
                best_residual = residual.to_string();
            }
        }
        let theta_s_coefficient = match matches.len() {
            1 => matches.pop().expect("one match"),
            0 => {
                return Err(ResolutionError::NoCoefficient {
                    residual: best_residual,
                })
            }
            _ => {
                return Err(ResolutionError::AmbiguousCoefficient {
                    matches: matches.iter().map(RatFunc::to_string).collect(),
                })
            }
        };
        let mut theta_s = theta_s_base;
        theta_s.add_term(MnwLabel::EA, a, unit, theta_s_coefficient.clone());
        theta_s.add_term(MnwLabel::EA, unit, a, theta_s_coefficient.clone());

        partial.theta_s_coefficient = theta_s_coefficient;
        partial.d2_table.insert(MnwLabel::WedgeAB, wedge_ab);
        partial.d2_table.insert(MnwLabel::WedgeABstar, wedge_abs);
        partial.d2_table.insert(MnwLabel::ThetaS, theta_s);
        partial.d2_table.insert(MnwLabel::ThetaT, theta_t);

        // f₂ := s ∘ f₁ ∘ d₂ on the degree-2 generators.
        for label in MnwLabel::of_degree(2) {
            let image = partial
                .f_map(&partial.mnw_d2(&MnwChain::generator(*label))?)?;
            partial
                .f2_table
                .insert(*label, bar_contracting_homotopy(&image));
        }
        Ok(partial)
    }

    pub fn algebra(&self) -> &PodlesAlgebra {
        &self.alg
    }

    /// The scalar placed on the `e_A` term of the `theta_S` column by the
    /// d₁∘d₂ = 0 search.
    pub fn theta_s_coefficient(&self) -> &RatFunc {
        &self.theta_s_coefficient
    }

    /// The verified d₂ image of a degree-2 basis label.
    pub fn d2_column(&self, label: MnwLabel) -> &MnwChain {
        &self.d2_table[&label]
    }

    fn d1_generator(&self, t: Gen) -> EnvElement {
        let m = PbwMonomial::generator(t);
        let mut env = EnvElement::from_pair(m, PbwMonomial::unit());
        env.add_term(PbwMonomial::unit(), m, -&RatFunc::one());
        env
    }

    /// d₁ of a degree-1 chain, as an enveloping-algebra element (degree-0
    /// chains are free of rank one).
    fn d1_of_degree1(&self, c: &MnwChain) -> EnvElement {
        let mut out = EnvElement::zero();
        for ((label, x, y), coeff) in c.terms() {
            let t = label.edge_generator().expect("degree-1 label");
            let env = EnvElement::from_term(*x, *y, coeff.clone());
            let image = env.mul(&self.alg, &self.d1_generator(t));
            out = &out + &image;
        }
        out
    }

    pub fn mnw_d1(&self, c: &MnwChain) -> Result<MnwChain, ResolutionError> {
        if c.degree() != 1 {
            return Err(ResolutionError::Degree {
                expected: "1".to_string(),
                got: c.degree(),
            });
        }
        let env = self.d1_of_degree1(c);
        let mut out = MnwChain::zero(0);
        out.add_env(MnwLabel::Unit, &env);
        Ok(out)
    }

    pub fn mnw_d2(&self, c: &MnwChain) -> Result<MnwChain, ResolutionError> {
        if c.degree() != 2 {
            return Err(ResolutionError::Degree {
                expected: "2".to_string(),
                got: c.degree(),
            });
        }
        let mut out = MnwChain::zero(1);
        for ((label, x, y), coeff) in c.terms() {
            let env = EnvElement::from_term(*x, *y, coeff.clone());
            let image = self.d2_table[label].act(&self.alg, &env);
            out = &out + &image;
        }
        Ok(out)
    }

    /// The comparison map into the bar resolution, for degrees 0–2.
    pub fn f_map(&self, c: &MnwChain) -> Result<BarChain, ResolutionError> {
        match c.degree() {
            0 => {
                let mut out = BarChain::zero(0);
                for ((_, x, y), coeff) in c.terms() {
                    out.add_term(vec![*x, *y], coeff.clone());
                }
                Ok(out)
            }
            1 => {
                let mut out = BarChain::zero(1);
                for ((label, x, y), coeff) in c.terms() {
                    let t = label.edge_generator().expect("degree-1 label");
                    out.add_term(vec![*x, PbwMonomial::generator(t), *y], coeff.clone());
                }
                Ok(out)
            }
            2 => {
                let mut out = BarChain::zero(2);
                for ((label, x, y), coeff) in c.terms() {
                    let env = EnvElement::from_term(*x, *y, coeff.clone());
                    let image = self.f2_table[label].act(&self.alg, &env);
                    out = &out + &image;
                }
                Ok(out)
            }
            d => Err(ResolutionError::Degree {
                expected: "0, 1, or 2".to_string(),
                got: d,
            }),
        }
    }

    /// The comparison map from the bar resolution, for degrees 0–1.  The
    /// degree-1 formula telescopes a middle factor `A^n t^m`:
    ///
    /// ```text
    ///   h₁(a ⊗ A^n t^m ⊗ b) = (a⊗bᵒ) { Σ_{i<n} (A^i ⊗ (A^{n−1−i} t^m)ᵒ) e_A
    ///                                 + Σ_{j<m} (A^n t^j ⊗ (t^{m−1−j})ᵒ) e_t }
    /// ```
    pub fn h_map(&self, c: &BarChain) -> Result<MnwChain, ResolutionError> {
        match c.degree() {
            0 => {
                let mut out = MnwChain::zero(0);
                for (tuple, coeff) in c.terms() {
                    out.add_term(MnwLabel::Unit, tuple[0], tuple[1], coeff.clone());
                }
                Ok(out)
            }
            1 => {
                let mut out = MnwChain::zero(1);
                for (tuple, coeff) in c.terms() {
                    let (a, u, b) = (tuple[0], tuple[1], tuple[2]);
                    let outer = EnvElement::from_term(a, b, coeff.clone());
                    let n = u.a_pow();
                    for i in 0..n {
                        let slot = EnvElement::from_pair(
                            PbwMonomial::a_power(i),
                            PbwMonomial::new(n - 1 - i, u.ladder()),
                        );
                        out.add_env(MnwLabel::EA, &outer.mul(&self.alg, &slot));
                    }
                    if let Some((l, m)) = u.ladder() {
                        let label = match l {
                            crate::podles::Ladder::B => MnwLabel::EB,
                            crate::podles::Ladder::Bstar => MnwLabel::EBstar,
                        };
                        for j in 0..m {
                            let slot = EnvElement::from_pair(
                                PbwMonomial::new(n, Some((l, j))),
                                PbwMonomial::new(0, Some((l, m - 1 - j))),
                            );
                            out.add_env(label, &outer.mul(&self.alg, &slot));
                        }
                    }
                }
                Ok(out)
            }
            d => Err(ResolutionError::Degree {
                expected: "0 or 1".to_string(),
                got: d,
            }),
        }
    }

    /// The bar differential b′(a₀⊗…⊗a_{n+1}) = Σ (−1)ⁱ a₀⊗…⊗a_i a_{i+1}⊗…,
    /// lowering resolution degree by one.
    pub fn bar_bprime(&self, c: &BarChain) -> Result<BarChain, ResolutionError> {
        if c.degree() == 0 {
            return Err(ResolutionError::Degree {
                expected: ">= 1".to_string(),
                got: 0,
            });
        }
        let mut out = BarChain::zero(c.degree() - 1);
        for (tuple, coeff) in c.terms() {
            for i in 0..tuple.len() - 1 {
                let sign = if i % 2 == 0 {
                    coeff.clone()
                } else {
                    -coeff
                };
                let merged = self.alg.mul_monomials(&tuple[i], &tuple[i + 1]);
                for (m, cm) in merged.terms() {
                    let mut t = Vec::with_capacity(tuple.len() - 1);
                    t.extend_from_slice(&tuple[..i]);
                    t.push(*m);
                    t.extend_from_slice(&tuple[i + 2..]);
                    out.add_term(t, cm * &sign);
                }
            }
        }
        Ok(out)
    }
}

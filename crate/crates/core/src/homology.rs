//! Twisted Hochschild and cyclic homology of the quantum sphere at a
//! degree truncation.
//!
//! Chains are restricted to total PBW degree ≤ N; multiplication never
//! raises that degree, so the truncated boundary matrices are genuine
//! restrictions of the untruncated ones.  Dimensions are computed as
//! `dim ker ∂_n − rank ∂_{n+1}`.  "Non-boundary" is certified relative to
//! preimages inside the truncation, and every report carries a
//! stabilization flag: the representatives of total degree ≤ N−1 must
//! account exactly for the dimension recomputed at N−1.
//!
//! Degrees 0 and 1 can use the small induced complex `𝒜 ⊗ ℳ_•` with the
//! identification `a ⊗ (x⊗yᵒ)e ↦ (ρ(y)·a·x)e` — the left action carries
//! the coefficient twist ρ.  Degree 2 is only available through the bar
//! complex.  Every differential preserves the total ladder charge, so all
//! rank and kernel questions split into charge blocks, which are solved
//! in parallel.

use crate::linalg::{SparseMatrix, SparseVec, Span};
use crate::podles::{basis_up_to, AlgebraElement, PbwMonomial, PodlesAlgebra, Twist};
use crate::resolution::{EnvElement, MnwLabel, Resolution, ResolutionError};
use crate::scalar::RatFunc;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HomologyError {
    #[error("{context} requires tensor degree {expected}, got {got}")]
    Degree {
        context: &'static str,
        expected: &'static str,
        got: u8,
    },
    #[error("degree {n} is not available from the {complex} complex")]
    UnsupportedDegree { complex: Source, n: u8 },
    #[error("truncation must satisfy N ≥ {need}, got {got}")]
    SmallTruncation { need: u32, got: u32 },
    #[error("diagonal and transported symmetry actions disagree on {class}: {detail}")]
    TransportMismatch { class: String, detail: String },
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
}

/// Which resolution backs a homology computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Bar,
    Mnw,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Bar => "bar",
            Source::Mnw => "mnw",
        })
    }
}

/// The two ℤ₂ orbifolds: the quantum disc (σ_{−1}) and the quantum
/// projective plane (μ_{−1}).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orbifold {
    Dq,
    RP2q,
}

impl Orbifold {
    pub fn action(self) -> Twist {
        match self {
            Orbifold::Dq => Twist::Sigma,
            Orbifold::RP2q => Twist::Mu,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Orbifold::Dq => "Dq",
            Orbifold::RP2q => "RP2q",
        }
    }
}

/// Desk-scale finitization: chains of total PBW degree ≤ `max_degree`,
/// tensor degree ≤ `tensor_cap`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TruncationSpec {
    #[serde(rename = "N")]
    pub max_degree: u32,
    #[serde(rename = "nMax")]
    pub tensor_cap: u8,
}

impl TruncationSpec {
    pub fn new(max_degree: u32) -> Self {
        TruncationSpec {
            max_degree,
            tensor_cap: 3,
        }
    }
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self::new(6)
    }
}

/// An element of `𝒜^{⊗(n+1)}` together with the coefficient twist it is
/// a chain for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HochschildChain {
    n: u8,
    twist: Twist,
    terms: BTreeMap<Vec<PbwMonomial>, RatFunc>,
}

impl HochschildChain {
    pub fn zero(n: u8, twist: Twist) -> Self {
        HochschildChain {
            n,
            twist,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_tuple(twist: Twist, tuple: Vec<PbwMonomial>) -> Self {
        assert!(!tuple.is_empty());
        let mut c = Self::zero((tuple.len() - 1) as u8, twist);
        c.add_term(tuple, RatFunc::one());
        c
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn twist(&self) -> Twist {
        self.twist
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, tuple: Vec<PbwMonomial>, c: RatFunc) {
        assert_eq!(tuple.len(), usize::from(self.n) + 1, "tuple arity mismatch");
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

    pub fn max_pbw_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|t| t.iter().map(|m| m.degree()).sum())
            .max()
            .unwrap_or(0)
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
        serde_json::json!({
            "n": self.n,
            "twist": self.twist.label(),
            "terms": terms,
        })
    }
}

impl std::ops::Add for &HochschildChain {
    type Output = HochschildChain;
    fn add(self, rhs: &HochschildChain) -> HochschildChain {
        assert_eq!(self.n, rhs.n);
        assert_eq!(self.twist, rhs.twist);
        let mut out = self.clone();
        for (t, c) in &rhs.terms {
            out.add_term(t.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &HochschildChain {
    type Output = HochschildChain;
    fn sub(self, rhs: &HochschildChain) -> HochschildChain {
        assert_eq!(self.n, rhs.n);
        assert_eq!(self.twist, rhs.twist);
        let mut out = self.clone();
        for (t, c) in &rhs.terms {
            out.add_term(t.clone(), -c);
        }
        out
    }
}

impl fmt::Display for HochschildChain {
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

fn twisted_last(alg: &PodlesAlgebra, twist: Twist, last: &PbwMonomial, first: &PbwMonomial) -> AlgebraElement {
    let weight = RatFunc::int(i64::from(twist.weight(last)));
    let mut out = AlgebraElement::zero();
    for (m, c) in alg.mul_monomials(last, first).terms() {
        out.add_term(*m, c * &weight);
    }
    out
}

/// The twisted Hochschild boundary: the inner faces of b′ plus the last
/// face `(−1)^n (ρ(a_n)·a₀) ⊗ a₁ ⊗ … ⊗ a_{n−1}`.
pub fn hochschild_b(
    alg: &PodlesAlgebra,
    c: &HochschildChain,
) -> Result<HochschildChain, HomologyError> {
    if c.n() == 0 {
        return Err(HomologyError::Degree {
            context: "hochschild_b",
            expected: ">= 1",
            got: 0,
        });
    }
    let n = usize::from(c.n());
    let mut out = HochschildChain::zero(c.n() - 1, c.twist());
    for (tuple, coeff) in c.terms() {
        for i in 0..n {
            let sign = if i % 2 == 0 { coeff.clone() } else { -coeff };
            let merged = alg.mul_monomials(&tuple[i], &tuple[i + 1]);
            for (m, cm) in merged.terms() {
                let mut t = Vec::with_capacity(n);
                t.extend_from_slice(&tuple[..i]);
                t.push(*m);
                t.extend_from_slice(&tuple[i + 2..]);
                out.add_term(t, cm * &sign);
            }
        }
        let sign = if n % 2 == 0 { coeff.clone() } else { -coeff };
        let wrapped = twisted_last(alg, c.twist(), &tuple[n], &tuple[0]);
        for (m, cm) in wrapped.terms() {
            let mut t = Vec::with_capacity(n);
            t.push(*m);
            t.extend_from_slice(&tuple[1..n]);
            out.add_term(t, cm * &sign);
        }
    }
    Ok(out)
}

/// The twisted cyclic operator `t(a₀⊗…⊗a_n) = (−1)^n ρ(a_n)⊗a₀⊗…⊗a_{n−1}`;
/// satisfies the paracyclic identity `t^{n+1} = ρ^{⊗(n+1)}`.
pub fn cyclic_t(c: &HochschildChain) -> HochschildChain {
    let n = usize::from(c.n());
    let mut out = HochschildChain::zero(c.n(), c.twist());
    for (tuple, coeff) in c.terms() {
        let weight = i64::from(c.twist().weight(&tuple[n]));
        let sign = if n % 2 == 0 { 1 } else { -1 } * weight;
        let mut t = Vec::with_capacity(n + 1);
        t.push(tuple[n]);
        t.extend_from_slice(&tuple[..n]);
        out.add_term(t, coeff * &RatFunc::int(sign));
    }
    out
}

/// The normalized Connes operator `B = (1 − t) ∘ s ∘ N` with
/// `N = Σ_{i≤n} tⁱ` and `s` the extra degeneracy; raises tensor degree by
/// one.  `B² = 0` and `bB + Bb = 0` hold on ρ-invariant chains.
pub fn connes_b(c: &HochschildChain) -> HochschildChain {
    let mut norm = HochschildChain::zero(c.n(), c.twist());
    let mut power = c.clone();
    for _ in 0..=c.n() {
        norm = &norm + &power;
        power = cyclic_t(&power);
    }
    let mut lifted = HochschildChain::zero(c.n() + 1, c.twist());
    for (tuple, coeff) in norm.terms() {
        let mut t = Vec::with_capacity(tuple.len() + 1);
        t.push(PbwMonomial::unit());
        t.extend_from_slice(tuple);
        lifted.add_term(t, coeff.clone());
    }
    &lifted - &cyclic_t(&lifted)
}

/// ρ-weight of a basis tuple (all twists here are diagonal on the PBW
/// basis, so invariance is a per-tuple sign).
pub fn tuple_weight(twist: Twist, tuple: &[PbwMonomial]) -> i8 {
    tuple.iter().map(|m| twist.weight(m)).product()
}

fn tuple_degree(tuple: &[PbwMonomial]) -> u32 {
    tuple.iter().map(|m| m.degree()).sum()
}

fn tuple_charge(tuple: &[PbwMonomial]) -> i64 {
    tuple.iter().map(|m| m.charge()).sum()
}

fn label_charge(label: MnwLabel) -> i64 {
    match label {
        MnwLabel::Unit | MnwLabel::EA | MnwLabel::ThetaS | MnwLabel::ThetaT => 0,
        MnwLabel::EB | MnwLabel::WedgeAB => 1,
        MnwLabel::EBstar | MnwLabel::WedgeABstar => -1,
    }
}

/// The induced complex `𝒜 ⊗_{𝒜ᵉ} ℳ_•` at truncation: degree 0 is spanned
/// by `basis_up_to(N)`, degree 1 by `e_t`-columns over `basis_up_to(N−1)`,
/// degree 2 over `basis_up_to(N−2)`.
pub struct InducedComplex {
    pub twist: Twist,
    pub max_degree: u32,
    pub basis0: Vec<PbwMonomial>,
    pub basis1: Vec<(MnwLabel, PbwMonomial)>,
    pub basis2: Vec<(MnwLabel, PbwMonomial)>,
    pub d1: SparseMatrix,
    pub d2: SparseMatrix,
}

/// `Σ c·ρ(y)·a·x` over the terms `(x, y, c)` of an enveloping-algebra
/// coefficient — the module identification of the induced complex.
fn induce_env(
    alg: &PodlesAlgebra,
    twist: Twist,
    env: &EnvElement,
    a: &PbwMonomial,
) -> AlgebraElement {
    let mut out = AlgebraElement::zero();
    for ((x, y), c) in env.terms() {
        let scale = c * &RatFunc::int(i64::from(twist.weight(y)));
        let left = alg.mul_monomials(y, a);
        for (m, cm) in left.terms() {
            for (m2, c2) in alg.mul_monomials(m, x).terms() {
                out.add_term(*m2, &(&scale * cm) * c2);
            }
        }
    }
    out
}

pub fn mnw_induced_complex(
    res: &Resolution,
    twist: Twist,
    max_degree: u32,
) -> Result<InducedComplex, HomologyError> {
    if max_degree < 2 {
        return Err(HomologyError::SmallTruncation {
            need: 2,
            got: max_degree,
        });
    }
    let alg = res.algebra();
    let basis0 = basis_up_to(max_degree);
    let index0: HashMap<PbwMonomial, usize> =
        basis0.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let basis1: Vec<(MnwLabel, PbwMonomial)> = MnwLabel::of_degree(1)
        .iter()
        .flat_map(|l| basis_up_to(max_degree - 1).into_iter().map(move |m| (*l, m)))
        .collect();
    let index1: HashMap<(MnwLabel, PbwMonomial), usize> =
        basis1.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let basis2: Vec<(MnwLabel, PbwMonomial)> = MnwLabel::of_degree(2)
        .iter()
        .flat_map(|l| basis_up_to(max_degree - 2).into_iter().map(move |m| (*l, m)))
        .collect();

    let mut d1 = SparseMatrix::zero(basis0.len(), basis1.len());
    for (j, (label, m)) in basis1.iter().enumerate() {
        let t = label.edge_generator().expect("degree-1 label");
        let gen = PbwMonomial::generator(t);
        let mut env = EnvElement::from_pair(gen, PbwMonomial::unit());
        env.add_term(PbwMonomial::unit(), gen, -&RatFunc::one());
        for (target, c) in induce_env(alg, twist, &env, m).terms() {
            d1.add(index0[target], j, c.clone());
        }
    }

    let mut d2 = SparseMatrix::zero(basis1.len(), basis2.len());
    for (j, (label, m)) in basis2.iter().enumerate() {
        let column = res.d2_column(*label);
        for target_label in MnwLabel::of_degree(1) {
            let env = column.coefficient_of(*target_label);
            for (target, c) in induce_env(alg, twist, &env, m).terms() {
                d2.add(index1[&(*target_label, *target)], j, c.clone());
            }
        }
    }

    Ok(InducedComplex {
        twist,
        max_degree,
        basis0,
        basis1,
        basis2,
        d1,
        d2,
    })
}

impl InducedComplex {
    pub fn basis0_index(&self, m: &PbwMonomial) -> Option<usize> {
        self.basis0.iter().position(|b| b == m)
    }

    pub fn basis1_index(&self, label: MnwLabel, m: &PbwMonomial) -> Option<usize> {
        self.basis1.iter().position(|b| *b == (label, *m))
    }
}

/// A truncated homology report; `stabilized` means the representatives of
/// total degree ≤ N−1 exactly account for the dimension recomputed at
/// truncation N−1 (the group at N−1 embeds via its representatives).
#[derive(Clone, Debug, Serialize)]
pub struct HomologyReport {
    pub twist: String,
    pub n: u8,
    #[serde(rename = "N")]
    pub max_degree: u32,
    pub dim: usize,
    pub stabilized: bool,
    pub generators: Vec<String>,
}

impl HomologyReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

// ---------------------------------------------------------------------
// Generic block solver

/// A graded level of a chain complex: printable names plus the degree and
/// charge used for stabilization flags and block decomposition.
struct LevelMeta {
    names: Vec<String>,
    degrees: Vec<u32>,
    charges: Vec<i64>,
}

struct BlockSolve {
    /// Echelon span of boundary columns followed by accepted kernel
    /// vectors; coordinates refer to insertion order.
    span: Span,
    /// Insertion index within the span → position in the global rep list.
    rep_tags: BTreeMap<usize, usize>,
}

struct HomologySolve {
    dim: usize,
    reps: Vec<SparseVec>,
    rep_charges: Vec<i64>,
    rep_names: Vec<String>,
    rep_degrees: Vec<u32>,
    blocks: BTreeMap<i64, BlockSolve>,
}

fn partition_by_charge(charges: &[i64]) -> BTreeMap<i64, Vec<usize>> {
    let mut blocks: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, c) in charges.iter().enumerate() {
        blocks.entry(*c).or_default().push(i);
    }
    blocks
}

fn render_combination(v: &SparseVec, names: &[String]) -> String {
    let mut out = String::new();
    for (count, (i, c)) in v.iter().enumerate() {
        let (neg, mag) = if c.is_display_negative() {
            (true, -c)
        } else {
            (false, c.clone())
        };
        if count == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if mag.is_one() {
            out.push_str(&names[i]);
        } else {
            out.push_str(&format!("{}*{}", mag.factor_text(), names[i]));
        }
    }
    out
}

/// Kernel-mod-image representatives, block by charge.  Kernel vectors are
/// offered in basis order, so the accepted set is the lexicographically
/// least completion past the boundary span.
fn solve_homology(
    bn: &SparseMatrix,
    bnp1: &SparseMatrix,
    level_n: &LevelMeta,
    charges_np1: &[i64],
) -> HomologySolve {
    let blocks_n = partition_by_charge(&level_n.charges);
    let blocks_np1 = partition_by_charge(charges_np1);
    let solved: Vec<(i64, Span, Vec<(SparseVec, usize)>)> = blocks_n
        .par_iter()
        .map(|(charge, cols)| {
            let sub = SparseMatrix::from_columns(
                bn.rows(),
                cols.iter().map(|j| bn.column(*j).clone()).collect(),
            );
            let kernel = sub.kernel_basis();
            let mut span = Span::new();
            if let Some(cols_up) = blocks_np1.get(charge) {
                for j in cols_up {
                    span.insert(bnp1.column(*j).clone());
                }
            }
            // Sparsest-first completion: single-basis-element cycles are
            // preferred as representatives over mixed combinations.
            let mut globals: Vec<SparseVec> = kernel
                .iter()
                .map(|k| SparseVec::from_entries(k.iter().map(|(i, c)| (cols[i], c.clone()))))
                .collect();
            globals.sort_by_key(|v| (v.nnz(), v.leading().unwrap_or(usize::MAX)));
            let mut reps = Vec::new();
            for global in globals {
                let tag = span.inserted();
                if span.insert(global.clone()) {
                    reps.push((global, tag));
                }
            }
            (*charge, span, reps)
        })
        .collect();

    let mut solve = HomologySolve {
        dim: 0,
        reps: Vec::new(),
        rep_charges: Vec::new(),
        rep_names: Vec::new(),
        rep_degrees: Vec::new(),
        blocks: BTreeMap::new(),
    };
    // Order representatives by leading basis index so the generator list
    // follows the canonical basis order rather than the block order.
    let mut collected: Vec<(i64, usize, SparseVec)> = Vec::new();
    for (charge, span, reps) in solved {
        solve.blocks.insert(
            charge,
            BlockSolve {
                span,
                rep_tags: BTreeMap::new(),
            },
        );
        for (v, tag) in reps {
            collected.push((charge, tag, v));
        }
    }
    collected.sort_by_key(|(_, _, v)| v.leading().unwrap_or(usize::MAX));
    for (charge, tag, v) in collected {
        let id = solve.reps.len();
        solve
            .blocks
            .get_mut(&charge)
            .expect("block exists")
            .rep_tags
            .insert(tag, id);
        solve.rep_names.push(render_combination(&v, &level_n.names));
        solve.rep_degrees.push(
            v.iter()
                .map(|(i, _)| level_n.degrees[i])
                .max()
                .unwrap_or(0),
        );
        solve.rep_charges.push(charge);
        solve.reps.push(v);
    }
    solve.dim = solve.reps.len();
    solve
}

impl HomologySolve {
    /// Express a cycle as rep coordinates modulo boundaries; `None` when
    /// the vector is not in `span(boundaries, reps)` of its block.
    fn rep_coordinates(&self, charge: i64, v: &SparseVec) -> Option<Vec<(usize, RatFunc)>> {
        let block = self.blocks.get(&charge)?;
        let combo = block.span.coordinates(v)?;
        let mut out = Vec::new();
        for (tag, c) in combo.iter() {
            if let Some(rep) = block.rep_tags.get(&tag) {
                out.push((*rep, c.clone()));
            }
        }
        Some(out)
    }
}

// ---------------------------------------------------------------------
// Bar-side level construction

fn bar_tuples(arity: usize, max_degree: u32) -> Vec<Vec<PbwMonomial>> {
    let basis = basis_up_to(max_degree);
    let mut out = Vec::new();
    let mut current: Vec<PbwMonomial> = Vec::with_capacity(arity);
    fn rec(
        basis: &[PbwMonomial],
        arity: usize,
        remaining: u32,
        current: &mut Vec<PbwMonomial>,
        out: &mut Vec<Vec<PbwMonomial>>,
    ) {
        if current.len() == arity {
            out.push(current.clone());
            return;
        }
        for m in basis {
            if m.degree() > remaining {
                break;
            }
            current.push(*m);
            rec(basis, arity, remaining - m.degree(), current, out);
            current.pop();
        }
    }
    rec(&basis, arity, max_degree, &mut current, &mut out);
    out
}

struct BarLevel {
    tuples: Vec<Vec<PbwMonomial>>,
    index: HashMap<Vec<PbwMonomial>, usize>,
}

impl BarLevel {
    /// Tuples of the given tensor degree, optionally restricted to the
    /// invariant ones for a diagonal symmetry.
    fn build(n: u8, max_degree: u32, invariant_under: Option<Twist>) -> Self {
        let mut tuples = bar_tuples(usize::from(n) + 1, max_degree);
        if let Some(action) = invariant_under {
            tuples.retain(|t| tuple_weight(action, t) == 1);
        }
        let index = tuples
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        BarLevel { tuples, index }
    }

    fn meta(&self, sector: Option<&str>) -> LevelMeta {
        let names = self
            .tuples
            .iter()
            .map(|t| {
                let body = t
                    .iter()
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>()
                    .join("⊗");
                match sector {
                    Some(s) => format!("{}·({})", s, body),
                    None => body,
                }
            })
            .collect();
        LevelMeta {
            names,
            degrees: self.tuples.iter().map(|t| tuple_degree(t)).collect(),
            charges: self.tuples.iter().map(|t| tuple_charge(t)).collect(),
        }
    }
}

/// Matrix of a chain-level operator between two enumerated bar levels.
/// The operator must not leave the target level (degree filtration and
/// invariance are closed under b, t, and B).
fn bar_operator_matrix(
    alg: &PodlesAlgebra,
    twist: Twist,
    from: &BarLevel,
    to: &BarLevel,
    op: impl Fn(&PodlesAlgebra, &HochschildChain) -> HochschildChain + Sync,
) -> SparseMatrix {
    let columns: Vec<SparseVec> = from
        .tuples
        .par_iter()
        .map(|tuple| {
            let image = op(alg, &HochschildChain::from_tuple(twist, tuple.clone()));
            let mut col = SparseVec::zero();
            for (t, c) in image.terms() {
                let row = *to
                    .index
                    .get(t)
                    .expect("operator image escapes the truncated level");
                col.add(row, c.clone());
            }
            col
        })
        .collect();
    SparseMatrix::from_columns(to.tuples.len(), columns)
}

fn bar_boundary(
    alg: &PodlesAlgebra,
    twist: Twist,
    from: &BarLevel,
    to: &BarLevel,
) -> SparseMatrix {
    bar_operator_matrix(alg, twist, from, to, |alg, c| {
        hochschild_b(alg, c).expect("boundary of positive-degree chain")
    })
}

// ---------------------------------------------------------------------
// Hochschild reports

fn mnw_meta(ic: &InducedComplex, n: u8, sector: Option<&str>) -> LevelMeta {
    let mark = sector.unwrap_or("");
    match n {
        0 => LevelMeta {
            names: ic
                .basis0
                .iter()
                .map(|m| match sector {
                    Some(s) => format!("{}·{}", s, m),
                    None => m.to_string(),
                })
                .collect(),
            degrees: ic.basis0.iter().map(|m| m.degree()).collect(),
            charges: ic.basis0.iter().map(|m| m.charge()).collect(),
        },
        1 => LevelMeta {
            names: ic
                .basis1
                .iter()
                .map(|(l, m)| format!("{}⊗{}{}", m, mark, l.text()))
                .collect(),
            degrees: ic.basis1.iter().map(|(_, m)| m.degree()).collect(),
            charges: ic
                .basis1
                .iter()
                .map(|(l, m)| m.charge() + label_charge(*l))
                .collect(),
        },
        _ => unreachable!("induced complex levels are 0 and 1"),
    }
}

fn solve_hh(
    res: &Resolution,
    source: Source,
    twist: Twist,
    n: u8,
    trunc: TruncationSpec,
    sector: Option<&str>,
) -> Result<HomologySolve, HomologyError> {
    match source {
        Source::Mnw => {
            if n >= 2 {
                return Err(HomologyError::UnsupportedDegree { complex: source, n });
            }
            let ic = mnw_induced_complex(res, twist, trunc.max_degree)?;
            let meta = mnw_meta(&ic, n, sector);
            let (bn, bnp1, charges_up) = match n {
                0 => {
                    let charges: Vec<i64> = ic
                        .basis1
                        .iter()
                        .map(|(l, m)| m.charge() + label_charge(*l))
                        .collect();
                    (SparseMatrix::zero(0, ic.basis0.len()), ic.d1.clone(), charges)
                }
                _ => {
                    let charges: Vec<i64> = ic
                        .basis2
                        .iter()
                        .map(|(l, m)| m.charge() + label_charge(*l))
                        .collect();
                    (ic.d1.clone(), ic.d2.clone(), charges)
                }
            };
            Ok(solve_homology(&bn, &bnp1, &meta, &charges_up))
        }
        Source::Bar => {
            if n + 1 > trunc.tensor_cap {
                return Err(HomologyError::UnsupportedDegree { complex: source, n });
            }
            let alg = res.algebra();
            let level_n = BarLevel::build(n, trunc.max_degree, None);
            let level_up = BarLevel::build(n + 1, trunc.max_degree, None);
            let bn = if n == 0 {
                SparseMatrix::zero(0, level_n.tuples.len())
            } else {
                let level_down = BarLevel::build(n - 1, trunc.max_degree, None);
                bar_boundary(alg, twist, &level_n, &level_down)
            };
            let bnp1 = bar_boundary(alg, twist, &level_up, &level_n);
            let meta = level_n.meta(sector);
            let charges_up: Vec<i64> =
                level_up.tuples.iter().map(|t| tuple_charge(t)).collect();
            Ok(solve_homology(&bn, &bnp1, &meta, &charges_up))
        }
    }
}

/// Stabilization: every representative of total degree ≤ N−1 must reappear
/// in the count at N−1; the flag compares that count with `dim_prev`.
fn stabilized_flag(solve: &HomologySolve, dim_prev: Option<usize>, max_degree: u32) -> bool {
    match dim_prev {
        None => false,
        Some(prev) => {
            let within = solve
                .rep_degrees
                .iter()
                .filter(|d| **d < max_degree)
                .count();
            within == prev
        }
    }
}

pub fn hh_report(
    res: &Resolution,
    source: Source,
    twist: Twist,
    n: u8,
    trunc: TruncationSpec,
) -> Result<HomologyReport, HomologyError> {
    let solve = solve_hh(res, source, twist, n, trunc, None)?;
    let dim_prev = if trunc.max_degree >= 3 {
        let prev = TruncationSpec {
            max_degree: trunc.max_degree - 1,
            ..trunc
        };
        solve_hh(res, source, twist, n, prev, None).ok().map(|s| s.dim)
    } else {
        None
    };
    Ok(HomologyReport {
        twist: twist.label().to_string(),
        n,
        max_degree: trunc.max_degree,
        dim: solve.dim,
        stabilized: stabilized_flag(&solve, dim_prev, trunc.max_degree),
        generators: solve.rep_names,
    })
}

// ---------------------------------------------------------------------
// The ℤ₂ action on homology

/// The matrix of a diagonal symmetry on homology representatives, checked
/// two ways where the comparison maps exist.
pub struct ActionOnHomology {
    pub twist: Twist,
    pub action: Twist,
    pub n: u8,
    pub max_degree: u32,
    pub dim: usize,
    /// Column j holds the rep coordinates of the image of representative j.
    pub matrix: Vec<Vec<RatFunc>>,
    pub generators: Vec<String>,
}

impl ActionOnHomology {
    pub fn is_involution(&self) -> bool {
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                let mut acc = RatFunc::zero();
                for k in 0..d {
                    acc = &acc + &(&self.matrix[i][k] * &self.matrix[k][j]);
                }
                let expected = if i == j { RatFunc::one() } else { RatFunc::zero() };
                if acc != expected {
                    return false;
                }
            }
        }
        true
    }

    /// Basis of the +1 eigenspace, as rep-coordinate vectors.
    pub fn invariant_vectors(&self) -> Vec<SparseVec> {
        let mut cols = Vec::new();
        for j in 0..self.dim {
            let mut col = SparseVec::zero();
            for i in 0..self.dim {
                let mut v = self.matrix[i][j].clone();
                if i == j {
                    v = &v - &RatFunc::one();
                }
                if !v.is_zero() {
                    col.add(i, v);
                }
            }
            cols.push(col);
        }
        SparseMatrix::from_columns(self.dim, cols).kernel_basis()
    }

    pub fn invariant_dim(&self) -> usize {
        self.invariant_vectors().len()
    }
}

/// Action weight on a level-n basis element of the given source complex.
fn mnw_action_weights(ic: &InducedComplex, n: u8, action: Twist) -> Vec<i8> {
    match n {
        0 => ic.basis0.iter().map(|m| action.weight(m)).collect(),
        _ => ic
            .basis1
            .iter()
            .map(|(l, m)| {
                let t = l.edge_generator().expect("degree-1 label");
                action.weight(m) * action.weight(&PbwMonomial::generator(t))
            })
            .collect(),
    }
}

fn apply_diag(weights: &[i8], v: &SparseVec) -> SparseVec {
    SparseVec::from_entries(v.iter().map(|(i, c)| {
        (
            i,
            if weights[i] == 1 { c.clone() } else { -c },
        )
    }))
}

/// Transport a degree-≤1 induced cycle through the bar side: induced f,
/// the diagonal action on every tensor leg, then induced h.
fn fh_transport(
    res: &Resolution,
    ic: &InducedComplex,
    twist: Twist,
    action: Twist,
    n: u8,
    v: &SparseVec,
) -> SparseVec {
    let alg = res.algebra();
    let mut out = SparseVec::zero();
    match n {
        0 => {
            // induced f and h are mutually inverse identifications with
            // C₀ = 𝒜; only the action weight survives.
            for (i, c) in v.iter() {
                let w = action.weight(&ic.basis0[i]);
                out.add(i, if w == 1 { c.clone() } else { -c });
            }
        }
        _ => {
            let index1: HashMap<(MnwLabel, PbwMonomial), usize> = ic
                .basis1
                .iter()
                .enumerate()
                .map(|(i, k)| (*k, i))
                .collect();
            for (i, c) in v.iter() {
                let (label, m) = ic.basis1[i];
                let t = label.edge_generator().expect("degree-1 label");
                let gen = PbwMonomial::generator(t);
                // induced f: m·e_t ↦ m ⊗ t; the action is diagonal on both
                // legs of the C₁ tuple.
                let w = action.weight(&m) * action.weight(&gen);
                let coeff = if w == 1 { c.clone() } else { -c };
                // induced h on a₀ ⊗ a₁ with a₁ = A^p t^r: telescoped legs
                // fold through the twisted identification ρ(y)·a₀·x.
                let (a0, a1) = (m, gen);
                let p = a1.a_pow();
                for idx in 0..p {
                    let x = PbwMonomial::a_power(idx);
                    let y = PbwMonomial::new(p - 1 - idx, a1.ladder());
                    let env = EnvElement::from_pair(x, y);
                    for (target, ct) in induce_env(alg, twist, &env, &a0).terms() {
                        out.add(index1[&(MnwLabel::EA, *target)], &coeff * ct);
                    }
                }
                if let Some((l, r)) = a1.ladder() {
                    let target_label = match l {
                        crate::podles::Ladder::B => MnwLabel::EB,
                        crate::podles::Ladder::Bstar => MnwLabel::EBstar,
                    };
                    for idx in 0..r {
                        let x = PbwMonomial::new(p, Some((l, idx)));
                        let y = PbwMonomial::ladder_power(l, r - 1 - idx);
                        let env = EnvElement::from_pair(x, y);
                        for (target, ct) in induce_env(alg, twist, &env, &a0).terms() {
                            out.add(index1[&(target_label, *target)], &coeff * ct);
                        }
                    }
                }
            }
        }
    }
    out
}

/// The induced ℤ₂ action on H_n (MNW side, n ≤ 1), computed both as the
/// diagonal action on the basis and as the f/h transport through the bar
/// complex; the two must agree on every class.
pub fn induced_action_on_homology(
    res: &Resolution,
    twist: Twist,
    action: Twist,
    n: u8,
    trunc: TruncationSpec,
) -> Result<ActionOnHomology, HomologyError> {
    if n >= 2 {
        return Err(HomologyError::UnsupportedDegree {
            complex: Source::Mnw,
            n,
        });
    }
    let ic = mnw_induced_complex(res, twist, trunc.max_degree)?;
    let solve = solve_hh(res, Source::Mnw, twist, n, trunc, None)?;
    let weights = mnw_action_weights(&ic, n, action);
    let mut matrix = vec![vec![RatFunc::zero(); solve.dim]; solve.dim];
    for (j, rep) in solve.reps.iter().enumerate() {
        let charge = solve.rep_charges[j];
        let diag = apply_diag(&weights, rep);
        let coords = solve.rep_coordinates(charge, &diag).ok_or_else(|| {
            HomologyError::TransportMismatch {
                class: solve.rep_names[j].clone(),
                detail: "diagonal image is not a cycle modulo boundaries".to_string(),
            }
        })?;
        for (i, c) in &coords {
            matrix[*i][j] = c.clone();
        }
        let transported = fh_transport(res, &ic, twist, action, n, rep);
        let coords_fh = solve.rep_coordinates(charge, &transported).ok_or_else(|| {
            HomologyError::TransportMismatch {
                class: solve.rep_names[j].clone(),
                detail: "transported image is not a cycle modulo boundaries".to_string(),
            }
        })?;
        let mut dense = vec![RatFunc::zero(); solve.dim];
        for (i, c) in coords_fh {
            dense[i] = c;
        }
        for i in 0..solve.dim {
            if dense[i] != matrix[i][j] {
                return Err(HomologyError::TransportMismatch {
                    class: solve.rep_names[j].clone(),
                    detail: format!(
                        "coordinate {}: diagonal {} vs transported {}",
                        i, matrix[i][j], dense[i]
                    ),
                });
            }
        }
    }
    Ok(ActionOnHomology {
        twist,
        action,
        n,
        max_degree: trunc.max_degree,
        dim: solve.dim,
        matrix,
        generators: solve.rep_names,
    })
}

/// Dimension of the +1 eigenspace of the induced action.
pub fn invariant_dim(
    res: &Resolution,
    twist: Twist,
    action: Twist,
    n: u8,
    trunc: TruncationSpec,
) -> Result<usize, HomologyError> {
    Ok(induced_action_on_homology(res, twist, action, n, trunc)?.invariant_dim())
}

// ---------------------------------------------------------------------
// Orbifold assembly

struct SectorResult {
    dim: usize,
    names: Vec<String>,
    degrees: Vec<u32>,
}

fn invariant_sector_mnw(
    res: &Resolution,
    twist: Twist,
    action: Twist,
    n: u8,
    trunc: TruncationSpec,
    sector: Option<&str>,
) -> Result<SectorResult, HomologyError> {
    let act = induced_action_on_homology(res, twist, action, n, trunc)?;
    // Rebuild names with the sector mark so twisted-copy classes are
    // distinguishable in the combined report.
    let solve = solve_hh(res, Source::Mnw, twist, n, trunc, sector)?;
    let ic = mnw_induced_complex(res, twist, trunc.max_degree)?;
    let level_names = mnw_meta(&ic, n, sector).names;
    let vectors = act.invariant_vectors();
    let names = vectors
        .iter()
        .map(|v| {
            let mut expanded = SparseVec::zero();
            for (i, c) in v.iter() {
                expanded.add_scaled(c, &solve.reps[i]);
            }
            render_combination(&expanded, &level_names)
        })
        .collect::<Vec<_>>();
    let degrees = vectors
        .iter()
        .map(|v| {
            v.iter()
                .map(|(i, _)| solve.rep_degrees[i])
                .max()
                .unwrap_or(0)
        })
        .collect();
    Ok(SectorResult {
        dim: vectors.len(),
        names,
        degrees,
    })
}

fn invariant_sector_bar(
    res: &Resolution,
    twist: Twist,
    action: Twist,
    n: u8,
    trunc: TruncationSpec,
    sector: Option<&str>,
) -> Result<SectorResult, HomologyError> {
    let solve = solve_hh(res, Source::Bar, twist, n, trunc, sector)?;
    let level = BarLevel::build(n, trunc.max_degree, None);
    let weights: Vec<i8> = level
        .tuples
        .iter()
        .map(|t| tuple_weight(action, t))
        .collect();
    let mut cols = Vec::new();
    for (j, rep) in solve.reps.iter().enumerate() {
        let image = apply_diag(&weights, rep);
        let coords = solve
            .rep_coordinates(solve.rep_charges[j], &image)
            .ok_or_else(|| HomologyError::TransportMismatch {
                class: solve.rep_names[j].clone(),
                detail: "diagonal image is not a cycle modulo boundaries".to_string(),
            })?;
        let mut col = SparseVec::zero();
        for (i, c) in coords {
            let v = if i == j { &c - &RatFunc::one() } else { c };
            if !v.is_zero() {
                col.add(i, v);
            }
        }
        cols.push(col);
    }
    let vectors = SparseMatrix::from_columns(solve.dim, cols).kernel_basis();
    let names = vectors
        .iter()
        .map(|v| {
            let mut expanded = SparseVec::zero();
            for (i, c) in v.iter() {
                expanded.add_scaled(c, &solve.reps[i]);
            }
            render_combination(&expanded, &level.meta(sector).names)
        })
        .collect();
    let degrees = vectors
        .iter()
        .map(|v| {
            v.iter()
                .map(|(i, _)| solve.rep_degrees[i])
                .max()
                .unwrap_or(0)
        })
        .collect();
    Ok(SectorResult {
        dim: vectors.len(),
        names,
        degrees,
    })
}

fn orbifold_sectors(
    res: &Resolution,
    orbifold: Orbifold,
    n: u8,
    trunc: TruncationSpec,
) -> Result<(SectorResult, SectorResult), HomologyError> {
    let action = orbifold.action();
    let mark = match action {
        Twist::Sigma => "σ",
        Twist::Mu => "μ",
        Twist::Id => unreachable!("orbifold actions are nontrivial"),
    };
    if n <= 1 {
        Ok((
            invariant_sector_mnw(res, Twist::Id, action, n, trunc, None)?,
            invariant_sector_mnw(res, action, action, n, trunc, Some(mark))?,
        ))
    } else if n == 2 {
        Ok((
            invariant_sector_bar(res, Twist::Id, action, n, trunc, None)?,
            invariant_sector_bar(res, action, action, n, trunc, Some(mark))?,
        ))
    } else {
        Err(HomologyError::UnsupportedDegree {
            complex: Source::Bar,
            n,
        })
    }
}

/// Homology of the crossed product via the invariant decomposition: the
/// ρ-invariant part of the untwisted homology plus the ρ-invariant part
/// of the ρ-twisted homology.
pub fn orbifold_hh(
    res: &Resolution,
    orbifold: Orbifold,
    n: u8,
    trunc: TruncationSpec,
) -> Result<HomologyReport, HomologyError> {
    let (plain, twisted) = orbifold_sectors(res, orbifold, n, trunc)?;
    let dim = plain.dim + twisted.dim;
    let mut generators = plain.names;
    generators.extend(twisted.names);
    let mut degrees = plain.degrees;
    degrees.extend(twisted.degrees);
    let stabilized = if trunc.max_degree >= 3 {
        let prev = TruncationSpec {
            max_degree: trunc.max_degree - 1,
            ..trunc
        };
        match orbifold_sectors(res, orbifold, n, prev) {
            Ok((p, t)) => {
                let within = degrees.iter().filter(|d| **d < trunc.max_degree).count();
                within == p.dim + t.dim
            }
            Err(_) => false,
        }
    } else {
        false
    };
    Ok(HomologyReport {
        twist: orbifold.label().to_string(),
        n,
        max_degree: trunc.max_degree,
        dim,
        stabilized,
        generators,
    })
}

// ---------------------------------------------------------------------
// Cyclic homology

/// The (b, B) total complex on ρ-invariant chains:
/// `Tot_m = ⊕_{k ≤ m, k ≡ m (2)} C_k` with `∂(x_k) = b(x_k) + B(x_{k−2})`.
/// For diagonal ρ the invariant chains are a basis subset, and `t^{n+1} =
/// id` there, so `B² = 0` and `bB + Bb = 0` hold and the total complex is
/// a genuine complex.
struct TotalComplex {
    meta: Vec<LevelMeta>,
    boundaries: Vec<SparseMatrix>,
}

fn total_complex(
    alg: &PodlesAlgebra,
    twist: Twist,
    top: u8,
    max_degree: u32,
) -> TotalComplex {
    let restriction = match twist {
        Twist::Id => None,
        other => Some(other),
    };
    let levels: Vec<BarLevel> = (0..=top)
        .map(|k| BarLevel::build(k, max_degree, restriction))
        .collect();
    let b_mats: Vec<Option<SparseMatrix>> = (0..=usize::from(top))
        .map(|k| {
            if k == 0 {
                None
            } else {
                Some(bar_boundary(alg, twist, &levels[k], &levels[k - 1]))
            }
        })
        .collect();
    let connes_mats: Vec<Option<SparseMatrix>> = (0..=usize::from(top))
        .map(|k| {
            if k + 1 > usize::from(top) {
                None
            } else {
                Some(bar_operator_matrix(
                    alg,
                    twist,
                    &levels[k],
                    &levels[k + 1],
                    |_, c| connes_b(c),
                ))
            }
        })
        .collect();

    let components = |m: usize| -> Vec<usize> {
        let mut ks = Vec::new();
        let mut k = m;
        loop {
            ks.push(k);
            if k < 2 {
                break;
            }
            k -= 2;
        }
        ks
    };

    let mut meta = Vec::new();
    let mut boundaries = Vec::new();
    for m in 0..=usize::from(top) {
        let comps = components(m);
        let mut names = Vec::new();
        let mut degrees = Vec::new();
        let mut charges = Vec::new();
        for k in &comps {
            let lvl_meta = levels[*k].meta(None);
            let prefix = if comps.len() > 1 {
                format!("C{}:", k)
            } else {
                String::new()
            };
            names.extend(lvl_meta.names.into_iter().map(|s| format!("{}{}", prefix, s)));
            degrees.extend(lvl_meta.degrees);
            charges.extend(lvl_meta.charges);
        }
        let dim_m: usize = comps.iter().map(|k| levels[*k].tuples.len()).sum();
        let boundary = if m == 0 {
            SparseMatrix::zero(0, dim_m)
        } else {
            let target_comps = components(m - 1);
            let target_offsets: HashMap<usize, usize> = {
                let mut off = 0;
                let mut map = HashMap::new();
                for k in &target_comps {
                    map.insert(*k, off);
                    off += levels[*k].tuples.len();
                }
                map
            };
            let target_dim: usize = target_comps.iter().map(|k| levels[*k].tuples.len()).sum();
            let mut mat = SparseMatrix::zero(target_dim, dim_m);
            let mut col_off = 0;
            for k in &comps {
                let size = levels[*k].tuples.len();
                if let Some(b) = b_mats[*k].as_ref() {
                    let row_off = target_offsets[&(*k - 1)];
                    for j in 0..size {
                        for (i, c) in b.column(j).iter() {
                            mat.add(row_off + i, col_off + j, c.clone());
                        }
                    }
                }
                if let Some(row_off) = target_offsets.get(&(k + 1)) {
                    let bb = connes_mats[*k]
                        .as_ref()
                        .expect("Connes operator available below the top level");
                    for j in 0..size {
                        for (i, c) in bb.column(j).iter() {
                            mat.add(row_off + i, col_off + j, c.clone());
                        }
                    }
                }
                col_off += size;
            }
            mat
        };
        meta.push(LevelMeta {
            names,
            degrees,
            charges,
        });
        boundaries.push(boundary);
    }
    TotalComplex { meta, boundaries }
}

fn solve_hc(
    res: &Resolution,
    twist: Twist,
    n: u8,
    trunc: TruncationSpec,
) -> Result<HomologySolve, HomologyError> {
    if n > 2 {
        return Err(HomologyError::UnsupportedDegree {
            complex: Source::Bar,
            n,
        });
    }
    if n + 1 > trunc.tensor_cap {
        return Err(HomologyError::UnsupportedDegree {
            complex: Source::Bar,
            n,
        });
    }
    let total = total_complex(res.algebra(), twist, n + 1, trunc.max_degree);
    let un = usize::from(n);
    Ok(solve_homology(
        &total.boundaries[un],
        &total.boundaries[un + 1],
        &total.meta[un],
        &total.meta[un + 1].charges,
    ))
}

/// Cyclic homology of the twisted complex at truncation, through the
/// (b, B) total complex on ρ-invariant chains.
pub fn hc_report(
    res: &Resolution,
    twist: Twist,
    n: u8,
    trunc: TruncationSpec,
) -> Result<HomologyReport, HomologyError> {
    let solve = solve_hc(res, twist, n, trunc)?;
    let dim_prev = if trunc.max_degree >= 3 {
        let prev = TruncationSpec {
            max_degree: trunc.max_degree - 1,
            ..trunc
        };
        solve_hc(res, twist, n, prev).ok().map(|s| s.dim)
    } else {
        None
    };
    Ok(HomologyReport {
        twist: twist.label().to_string(),
        n,
        max_degree: trunc.max_degree,
        dim: solve.dim,
        stabilized: stabilized_flag(&solve, dim_prev, trunc.max_degree),
        generators: solve.rep_names,
    })
}

//! Exact computer algebra for the Podles quantum sphere `A(S^2_{q,s})` and its
//! two Z/2 orbifolds (the quantum disc and the quantum real projective plane).
//!
//! Everything is computed over the exact scalar field Q(q): PBW normal forms,
//! the small free resolution and the bar resolution with comparison maps,
//! twisted Hochschild/cyclic homology at a degree truncation, and the
//! Chern-Connes index pairings.

pub mod chern;
pub mod crossed;
pub mod homology;
pub mod linalg;
pub mod podles;
pub mod resolution;
pub mod scalar;
pub mod verify;

pub use chern::{
    cocycles, haar_fa, haar_monomial, index_table, pair, tau0, tau0_monomial, ChernError,
    IndexTable, Slot, TraceFunctional,
};
pub use crossed::{CrossedElement, CrossedError, CrossedMatrix};
pub use homology::{
    connes_b, cyclic_t, hc_report, hh_report, hochschild_b, induced_action_on_homology,
    invariant_dim, mnw_induced_complex, orbifold_hh, tuple_weight, ActionOnHomology,
    HochschildChain, HomologyError, HomologyReport, InducedComplex, Orbifold, Source,
    TruncationSpec,
};
pub use linalg::{SparseMatrix, SparseVec, Span};
pub use podles::{
    basis_up_to, AlgebraElement, AutoKind, AutoSpec, Gen, Ladder, PbwMonomial, PodlesAlgebra,
    PodlesError, RewriteStrategy, Twist,
};
pub use resolution::{
    bar_contracting_homotopy, BarChain, EnvElement, MnwChain, MnwLabel, Resolution,
    ResolutionError,
};
pub use scalar::{IntPoly, RatFunc, ScalarError};
pub use verify::{run_suite, Check, Suite, SuiteReport};

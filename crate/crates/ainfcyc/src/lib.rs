//! A-infinity algebras, cyclic (co)homology and noncommutative formal
//! geometry over an exact scalar field.
//!
//! The crate is generic over the coefficient field through [`Scalar`];
//! the two instances are exact rationals ([`Rational`]) and truncated
//! Novikov series ([`NovikovScalar`]). Concrete aliases for the common
//! rational-coefficient types live at the crate root.

pub mod barcx;
pub mod error;
pub mod fixtures;
pub mod gen;
pub mod hochcyc;
pub mod linalg;
pub mod ncgeom;
pub mod novikov;
pub mod signcore;
pub mod sparse;
pub mod sympeq;

pub use barcx::{AInftyStructure, Basis, Cohomomorphism, TensorWord};
pub use error::{Error, Result};
pub use hochcyc::{
    BimoduleMapStore, Complex, HochschildChain, HochschildCochainSeq, NegativeCyclicCochain,
};
pub use ncgeom::{CyclicForm, FormalVectorField, Letter, NCPoly};
pub use novikov::{
    FilteredAInfty, FilteredCyclicityReport, GappedMonoid, GappedReport, NovikovScalar,
    WeaklyFilteredReport,
};
pub use signcore::{koszul_sign, shifted_degree_of_word, BasisElement, GradedSymbol, Rational, Scalar};
pub use sympeq::{
    ConstantTwoForm, CyclicityReport, DiagramReport, EquivalenceCertificate, ShipReport,
};

/// Rational-coefficient aliases for the common types.
pub type QPoly = NCPoly<Rational>;
pub type QForm = CyclicForm<Rational>;
pub type QVectorField = FormalVectorField<Rational>;
pub type QAInfty = AInftyStructure<Rational>;
pub type QCohom = Cohomomorphism<Rational>;

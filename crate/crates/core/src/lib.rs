//! Orlicz-Lorentz norms of simple functions on atomic measure spaces and
//! expansivity classification of the composition operators they carry.
//!
//! * [`orlicz`]: Orlicz functions, generalized inverses, Δ2 probing.
//! * [`weights`]: weight functions and their cumulative integrals.
//! * [`measure`]: atomic spaces, atom sets, transformations, composition systems.
//! * [`rearrangement`]: distribution, rearrangement, modular, Luxemburg norm.
//! * [`dynamics`]: orbits, set criteria, the four classifiers and the orbit-norm oracle.

pub mod dynamics;
pub mod error;
pub mod ext_real;
pub mod measure;
pub mod orlicz;
pub mod rearrangement;
pub mod weights;

pub use dynamics::{
    classify, classify_expansive, classify_positively_expansive, classify_uniformly_expansive,
    classify_uniformly_positively_expansive, compose_iterate, criterion_sequence, oracle_classify, orbit_norms,
    trace_rows, Bipartition, CriterionTrace, Notion, OrbitTrace, Status, TestFamily, TraceRow, Verdict, Witness,
};
pub use error::{Error, Result};
pub use ext_real::ExtReal;
pub use measure::{validate_system, AtomSet, AtomicSpace, CompositionSystem, MassRule, SystemReport, Transformation};
pub use orlicz::{delta2_probe, Delta2Report, OrliczFunction};
pub use rearrangement::{
    char_norm_formula, distribution, luxemburg_norm, modular, rearrangement, LuxemburgNorm, SimpleFunction,
    StepFunction,
};
pub use weights::{validate_weight, WeightFamily, WeightFunction};

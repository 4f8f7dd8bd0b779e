//! Unfold/fold transformation of constrained Horn clauses (CHCs) over linear
//! integer arithmetic.
//!
//! * [`chc`]: clause syntax, parser, printer, substitutions.
//! * [`lia`]: Fourier-Motzkin based satisfiability, entailment, projection.
//! * [`kernel`]: the definition, unfolding, folding and constraint
//!   replacement rules as checked state transitions, with a trace.
//! * [`pairing`]: the predicate pairing strategy built on the kernel.
//! * [`model`]: checking and transporting symbolic interpretations.
//! * [`oracle`]: bounded bottom-up ground evaluation.
//! * [`smtlib`] and [`solver`]: SMT-LIB emission, model files, external
//!   Horn solvers.

pub mod chc;
pub mod exec;
pub mod kernel;
pub mod lia;
pub mod model;
pub mod oracle;
pub mod pairing;
pub mod smtlib;
pub mod solver;

pub use exec::Exec;

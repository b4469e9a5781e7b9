//! LegoNE-style compiler and certifier for approximate Nash equilibrium (ANE)
//! algorithms.
//!
//! An algorithm is written as a straight-line composition of game-theoretic
//! building blocks (best response, zero-sum equilibrium, stationary point,
//! mixing). Each block is defined by the logical properties its outputs
//! guarantee, not by how it computes them. The analyzer turns a program into
//! a finite constrained maximization problem whose optimal value is a provable
//! worst-case approximation bound, and solves it.
//!
//! Pipeline, module by module:
//!
//! 1. [`frontend`] — lex/parse/typecheck `.lne` sources into a [`frontend::SourceProgram`].
//! 2. [`logic`] — the restricted term/formula grammar, inherent formulas and
//!    per-statement encodings producing the algorithm formula and proof goal.
//! 3. [`blocks`] — the standard building-block library, including the
//!    closed-form optimal-mixing bound over polytope edges.
//! 4. [`tactics`] — quantifier instantiation over program strategies and
//!    term forgetting, yielding a quantifier-free [`tactics::AbstractSystem`].
//! 5. [`optprob`] — existential elimination, DNF splitting and assembly of
//!    per-disjunct maximization problems.
//! 6. [`solver`] — built-in multistart penalty solver, script export for
//!    external solvers, and feasible-point cross checking.
//! 7. [`bench`] — the literature benchmark corpus with golden bounds, plus
//!    hand-encoded extension systems (polymatrix, vertex cover).
//! 8. [`oracle`] — concrete execution of programs on explicit small games to
//!    validate encodings and certified bounds empirically.
//! 9. [`discovery`] — the LLM-in-the-loop search driver with offline mock
//!    transport.
//!
//! [`pipeline`] wires 1–6 into one call from source text to certificate.

pub mod bench;
pub mod blocks;
pub mod discovery;
pub mod frontend;
pub mod logic;
pub mod oracle;
pub mod optprob;
pub mod pipeline;
pub mod solver;
pub mod tactics;

pub use pipeline::{analyze_program, analyze_source, AnalysisOutput, PipelineError};

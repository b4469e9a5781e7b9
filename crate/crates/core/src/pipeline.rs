//! End-to-end driver: source text → certificate.

use crate::blocks;
use crate::frontend::{self, Diagnostic, SourceProgram};
use crate::logic::{encode_program, ProgramEncoding};
use crate::optprob::{build_problem, BuildOptions, OptimizationProblem};
use crate::solver::{solve_builtin, BoundCertificate, SolverConfig};
use crate::tactics::{abstract_system, payoff_set, AbstractSystem, StrategyUniverse};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("diagnostics:\n{}", frontend::render(.0))]
    Diagnostics(Vec<Diagnostic>),
    #[error(transparent)]
    Encode(#[from] crate::logic::EncodeError),
    #[error(transparent)]
    Block(#[from] blocks::BlockError),
    #[error(transparent)]
    Tactics(#[from] crate::tactics::TacticsError),
    #[error(transparent)]
    Opt(#[from] crate::optprob::OptError),
}

/// Everything the analyzer produces along the way, for dumps and reports.
pub struct AnalysisOutput {
    /// The program after auto-return insertion, the one actually analyzed.
    pub program: SourceProgram,
    pub encoding: ProgramEncoding,
    pub universe: StrategyUniverse,
    pub system: AbstractSystem,
    pub problem: OptimizationProblem,
    pub certificate: BoundCertificate,
    pub warnings: Vec<Diagnostic>,
    pub tactic_warnings: Vec<String>,
}

/// Analyze already-checked source.
pub fn analyze_program(
    prog: &SourceProgram,
    build: BuildOptions,
    cfg: &SolverConfig,
) -> Result<AnalysisOutput, PipelineError> {
    let program = if prog.options.auto_return_optimal_mixing {
        blocks::auto_return(prog)?
    } else {
        prog.clone()
    };
    let encoding = encode_program(&program)?;
    let universe = StrategyUniverse::from_program(&program)?;
    let payoffs = payoff_set(&program);
    let (system, tactic_warnings) =
        abstract_system(&encoding, &universe, &payoffs, program.options.delta_symbolic)?;
    let problem = build_problem(&system, build)?;
    let certificate = solve_builtin(&problem, cfg);
    Ok(AnalysisOutput {
        program,
        encoding,
        universe,
        system,
        problem,
        certificate,
        warnings: Vec::new(),
        tactic_warnings,
    })
}

/// Parse, typecheck and analyze source text.
pub fn analyze_source(
    source: &str,
    build: BuildOptions,
    cfg: &SolverConfig,
) -> Result<AnalysisOutput, PipelineError> {
    let (prog, warnings) = frontend::check(source).map_err(PipelineError::Diagnostics)?;
    let mut out = analyze_program(&prog, build, cfg)?;
    out.warnings = warnings;
    Ok(out)
}

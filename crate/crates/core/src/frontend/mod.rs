//! Frontend: lexing, parsing and type checking of `.lne` sources.
//!
//! All functions here are pure over immutable inputs and safe to call
//! concurrently.

mod ast;
mod diagnostics;
mod lexer;
mod parser;
mod pretty;
mod typecheck;

pub use ast::{
    AlgorithmBody, Arg, Assignment, BasicType, BlockDecl, CompileOptions, Param, SourceProgram,
    Statement,
};
pub use diagnostics::{has_errors, render, Diagnostic, DiagnosticCode, Severity};
pub use parser::{base_payoff_index, loss_index, parse};
pub use pretty::{atomic as pretty_atomic, pretty};
pub use typecheck::{typecheck, TypeEnv};

/// Parse then typecheck; `Err` holds every diagnostic found (errors and
/// warnings) when any error is present.
pub fn check(source: &str) -> Result<(SourceProgram, Vec<Diagnostic>), Vec<Diagnostic>> {
    let prog = parse(source)?;
    let diags = typecheck(&prog);
    if has_errors(&diags) {
        Err(diags)
    } else {
        Ok((prog, diags))
    }
}

/// Canonical JSON rendering of the program IR (stable key order).
pub fn dump_ast_json(prog: &SourceProgram) -> serde_json::Value {
    let mut v = serde_json::to_value(prog).expect("program IR serializes");
    if let serde_json::Value::Object(map) = &mut v {
        map.insert(
            "statement_count".into(),
            serde_json::Value::from(prog.algorithm.statement_count()),
        );
    }
    v
}

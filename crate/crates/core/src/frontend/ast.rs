//! Abstract syntax of `.lne` programs.

use crate::logic::{Comparison, Formula, PayoffCombo, Rational, Term};
use serde::Serialize;

/// Basic types of block inputs and outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BasicType {
    None,
    Real,
    Payoff,
    Comp,
    /// Strategy of the given 0-based player.
    Strategy(usize),
}

impl std::fmt::Display for BasicType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BasicType::None => f.write_str("None"),
            BasicType::Real => f.write_str("Real"),
            BasicType::Payoff => f.write_str("Payoff"),
            BasicType::Comp => f.write_str("Comp"),
            BasicType::Strategy(p) => write!(f, "Strategy{}", p + 1),
        }
    }
}

/// A named, typed formal parameter of a block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Param {
    pub name: String,
    pub ty: BasicType,
}

/// A building-block declaration: signature plus logic encoding over the
/// formal parameter names. Standard blocks are materialized into this same
/// shape by the block library.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockDecl {
    pub name: String,
    pub inputs: Vec<Param>,
    pub outputs: Vec<Param>,
    /// Encoding over formal names; `true` (empty conjunction) for blocks with
    /// no guaranteed properties, like `Random`.
    pub encoding: Formula,
    /// Marks blocks whose guarantee is only achieved up to the symbolic
    /// slack δ by any polynomial-time implementation (stationary points,
    /// black-box sub-algorithms). Using one sets the certificate's δ flag.
    pub delta_approximate: bool,
}

impl BlockDecl {
    pub fn input_types(&self) -> Vec<BasicType> {
        self.inputs.iter().map(|p| p.ty).collect()
    }
    pub fn output_types(&self) -> Vec<BasicType> {
        self.outputs.iter().map(|p| p.ty).collect()
    }
}

/// An actual argument in a block application.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Arg {
    Ident(String),
    /// A payoff literal, e.g. `u1 - u2`.
    Payoff(PayoffCombo),
    /// A rational literal used for `Real` inputs.
    Real(Rational),
}

impl std::fmt::Display for Arg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Arg::Ident(s) => f.write_str(s),
            Arg::Payoff(c) => write!(f, "{}", c),
            Arg::Real(r) => write!(f, "{}", r),
        }
    }
}

/// `out1, out2 = Block(arg1, arg2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    pub outputs: Vec<String>,
    /// Optional surface type annotations, one per output when present.
    pub annotations: Vec<Option<BasicType>>,
    pub block: String,
    pub args: Vec<Arg>,
    pub line: usize,
}

/// One step of an algorithm body.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Statement {
    Assign(Assignment),
    /// A branch gate: the retained branch's condition, asserted as a
    /// constraint. Only the single-branch symmetric form is accepted from
    /// source; full two-branch disjunctions exist at the IR level.
    Branch { condition: Comparison<Term>, line: usize },
}

impl Statement {
    pub fn line(&self) -> usize {
        match self {
            Statement::Assign(a) => a.line,
            Statement::Branch { line, .. } => *line,
        }
    }
}

/// The algorithm body: an SSA sequence of statements and an optional
/// trailing return profile (one strategy per player).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmBody {
    pub name: String,
    pub statements: Vec<Statement>,
    pub return_profile: Option<Vec<String>>,
    pub return_line: Option<usize>,
}

impl AlgorithmBody {
    /// Statement count in the sequence-of-assignments sense, where the
    /// trailing `return` is itself a statement.
    pub fn statement_count(&self) -> usize {
        self.statements.len() + usize::from(self.return_profile.is_some())
    }

    pub fn assignments(&self) -> impl Iterator<Item = &Assignment> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Assign(a) => Some(a),
            _ => None,
        })
    }
}

/// Compilation options settable from source via `option` lines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompileOptions {
    /// Append an optimal mixing over all constructed strategies and return
    /// its output profile when the program has no explicit return.
    pub auto_return_optimal_mixing: bool,
    /// Keep δ symbolic in encodings (substituted to 0 at solve time, with
    /// the certificate reporting "value + δ").
    pub delta_symbolic: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { auto_return_optimal_mixing: false, delta_symbolic: true }
    }
}

/// A parsed and validated compilation unit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceProgram {
    pub player_count: usize,
    /// Custom blocks declared in the source, in order.
    pub blocks: Vec<BlockDecl>,
    pub algorithm: AlgorithmBody,
    pub options: CompileOptions,
}

impl SourceProgram {
    /// The declared custom block with this name, if any.
    pub fn custom_block(&self, name: &str) -> Option<&BlockDecl> {
        self.blocks.iter().find(|b| b.name == name)
    }
}

//! Recursive-descent parser for `.lne` sources.
//!
//! Shape of a source file:
//!
//! ```text
//! game 2 players
//! option auto_return = on
//!
//! block Name(a: Strategy1, u: Payoff) -> (o: Strategy2):
//!     ensures forall y: Strategy2 . u1(a, y) <= u1(a, o)
//! end
//!
//! algorithm Main:
//!     x: Strategy1 = Random1()
//!     y: Strategy2 = BestResponse2(x)
//!     branch f1(x, y) >= f2(x, y)
//!     return x, y
//! end
//! ```

use super::ast::*;
use super::diagnostics::{Diagnostic, DiagnosticCode};
use super::lexer::{lex, Token, TokenKind};
use crate::logic::{
    AtomicProperty, CompareOp, Comparison, ExistsReal, Expr, Formula, PayoffCombo, PayoffFn,
    Rational, StrategyArg, StrategyQuant, Term, TermExpr,
};
use num_traits::{One, Zero};

/// Parse a source file into a [`SourceProgram`], or a list of diagnostics.
///
/// Parsing validates structure only; use [`super::typecheck::typecheck`] for
/// the semantic checks.
pub fn parse(source: &str) -> Result<SourceProgram, Vec<Diagnostic>> {
    let tokens = lex(source)?;
    let mut p = Parser { tokens, pos: 0, diags: Vec::new() };
    let prog = p.parse_program();
    match prog {
        Some(prog) if p.diags.is_empty() => Ok(prog),
        _ => {
            if p.diags.is_empty() {
                p.diags.push(Diagnostic::error(
                    DiagnosticCode::SyntaxError,
                    0,
                    0,
                    "empty source: expected a 'game' header and an 'algorithm' section",
                ));
            }
            Err(p.diags)
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

/// Binder scope while parsing one encoding line.
#[derive(Default)]
struct Scope {
    strategy_binders: Vec<StrategyQuant>,
    payoff_binders: Vec<String>,
    exists: Vec<ExistsReal>,
    /// Names usable as bare real variables (exists-bound plus Real formals).
    real_names: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_kind(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek2_kind(&self) -> &TokenKind {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)].kind
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&mut self, msg: impl Into<String>) {
        let t = self.peek().clone();
        self.diags.push(Diagnostic::error(DiagnosticCode::SyntaxError, t.line, t.col, msg));
    }

    /// Skip to the next newline to continue after a malformed line.
    fn synchronize(&mut self) {
        while !matches!(self.peek_kind(), TokenKind::Newline | TokenKind::Eof) {
            self.advance();
        }
        self.skip_newlines();
    }

    fn skip_newlines(&mut self) {
        while matches!(self.peek_kind(), TokenKind::Newline) {
            self.advance();
        }
    }

    fn expect_newline(&mut self) {
        match self.peek_kind() {
            TokenKind::Newline | TokenKind::Eof => {
                self.skip_newlines();
            }
            _ => {
                self.error_here("expected end of line");
                self.synchronize();
            }
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> bool {
        if self.peek_kind() == &kind {
            self.advance();
            true
        } else {
            self.error_here(format!("expected {}", what));
            false
        }
    }

    fn ident(&mut self, what: &str) -> Option<(String, usize, usize)> {
        match self.peek_kind().clone() {
            TokenKind::Ident(name) => {
                let t = self.advance();
                Some((name, t.line, t.col))
            }
            _ => {
                self.error_here(format!("expected {}", what));
                None
            }
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek_kind(), TokenKind::Ident(s) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn parse_program(&mut self) -> Option<SourceProgram> {
        self.skip_newlines();

        // game header
        if !self.eat_keyword("game") {
            self.error_here("expected 'game <r> players' header");
            return None;
        }
        let player_count = match self.peek_kind().clone() {
            TokenKind::Number(n) if n.is_integer() && *n.numer() >= 2 && *n.numer() <= 9 => {
                self.advance();
                *n.numer() as usize
            }
            _ => {
                self.error_here("player count must be an integer between 2 and 9");
                return None;
            }
        };
        if !self.eat_keyword("players") && !self.eat_keyword("player") {
            self.error_here("expected 'players' after the player count");
        }
        self.expect_newline();

        let mut options = CompileOptions::default();
        let mut blocks: Vec<BlockDecl> = Vec::new();
        let mut algorithm: Option<AlgorithmBody> = None;

        loop {
            self.skip_newlines();
            match self.peek_kind().clone() {
                TokenKind::Eof => break,
                TokenKind::Ident(s) if s == "option" => {
                    self.advance();
                    self.parse_option(&mut options);
                }
                TokenKind::Ident(s) if s == "block" => {
                    self.advance();
                    if let Some(b) = self.parse_block_decl(player_count) {
                        blocks.push(b);
                    }
                }
                TokenKind::Ident(s) if s == "algorithm" => {
                    self.advance();
                    let alg = self.parse_algorithm(player_count);
                    if algorithm.is_some() {
                        self.error_here("a source file holds exactly one algorithm");
                    } else {
                        algorithm = alg;
                    }
                }
                _ => {
                    self.error_here("expected 'option', 'block' or 'algorithm'");
                    self.synchronize();
                }
            }
        }

        let algorithm = match algorithm {
            Some(a) => a,
            None => {
                self.diags.push(Diagnostic::error(
                    DiagnosticCode::SyntaxError,
                    0,
                    0,
                    "missing 'algorithm' section",
                ));
                return None;
            }
        };

        Some(SourceProgram { player_count, blocks, algorithm, options })
    }

    fn parse_option(&mut self, options: &mut CompileOptions) {
        let Some((name, line, col)) = self.ident("option name") else {
            self.synchronize();
            return;
        };
        self.expect(TokenKind::Assign, "'='");
        let value = match self.peek_kind().clone() {
            TokenKind::Ident(v) if v == "on" || v == "true" => {
                self.advance();
                true
            }
            TokenKind::Ident(v) if v == "off" || v == "false" => {
                self.advance();
                false
            }
            _ => {
                self.error_here("option value must be on/off");
                self.synchronize();
                return;
            }
        };
        match name.as_str() {
            "auto_return" | "auto_return_optimal_mixing" => options.auto_return_optimal_mixing = value,
            "delta_symbolic" => options.delta_symbolic = value,
            other => self.diags.push(Diagnostic::error(
                DiagnosticCode::SyntaxError,
                line,
                col,
                format!("unknown option '{}'", other),
            )),
        }
        self.expect_newline();
    }

    fn parse_type(&mut self, player_count: usize) -> Option<BasicType> {
        let (name, line, col) = self.ident("a type")?;
        match name.as_str() {
            "Real" => Some(BasicType::Real),
            "Payoff" => Some(BasicType::Payoff),
            "Comp" => Some(BasicType::Comp),
            "None" => Some(BasicType::None),
            s => {
                if let Some(num) = s.strip_prefix("Strategy").and_then(|n| n.parse::<usize>().ok()) {
                    if num >= 1 && num <= player_count {
                        return Some(BasicType::Strategy(num - 1));
                    }
                    self.diags.push(Diagnostic::error(
                        DiagnosticCode::TypeMismatch,
                        line,
                        col,
                        format!("strategy type {} names a player outside 1..={}", s, player_count),
                    ));
                    return None;
                }
                self.diags.push(Diagnostic::error(
                    DiagnosticCode::SyntaxError,
                    line,
                    col,
                    format!("unknown type '{}'", s),
                ));
                None
            }
        }
    }

    fn parse_params(&mut self, player_count: usize) -> Vec<Param> {
        let mut params = Vec::new();
        if matches!(self.peek_kind(), TokenKind::RParen) {
            return params;
        }
        loop {
            if let Some((name, _, _)) = self.ident("parameter name") {
                self.expect(TokenKind::Colon, "':' before the parameter type");
                if let Some(ty) = self.parse_type(player_count) {
                    params.push(Param { name, ty });
                }
            }
            if matches!(self.peek_kind(), TokenKind::Comma) {
                self.advance();
            } else {
                break;
            }
        }
        params
    }

    fn parse_block_decl(&mut self, player_count: usize) -> Option<BlockDecl> {
        let (name, _, _) = self.ident("block name")?;
        self.expect(TokenKind::LParen, "'('");
        let inputs = self.parse_params(player_count);
        self.expect(TokenKind::RParen, "')'");
        self.expect(TokenKind::Arrow, "'->'");
        self.expect(TokenKind::LParen, "'(' before outputs");
        let outputs = self.parse_params(player_count);
        self.expect(TokenKind::RParen, "')'");
        self.expect(TokenKind::Colon, "':'");
        self.expect_newline();

        let mut atoms = Vec::new();
        loop {
            self.skip_newlines();
            if self.eat_keyword("end") {
                self.expect_newline();
                break;
            }
            if matches!(self.peek_kind(), TokenKind::Eof) {
                self.error_here("unterminated block declaration; expected 'end'");
                break;
            }
            if self.eat_keyword("ensures") {
                if let Some(atom) = self.parse_atomic_line(player_count, &inputs, &outputs) {
                    atoms.push(Formula::Atom(atom));
                }
                self.expect_newline();
            } else {
                self.error_here("expected 'ensures' line or 'end'");
                self.synchronize();
            }
        }

        let encoding = Formula::and(atoms);
        let delta_approximate = encoding.mentions_delta();
        Some(BlockDecl { name, inputs, outputs, encoding, delta_approximate })
    }

    /// One `ensures` line: `[exists ρ in [lo,hi], …] [forall v: T, …] cmp [op cmp]`.
    fn parse_atomic_line(
        &mut self,
        player_count: usize,
        inputs: &[Param],
        outputs: &[Param],
    ) -> Option<AtomicProperty> {
        let mut scope = Scope::default();
        for p in inputs.iter().chain(outputs) {
            if p.ty == BasicType::Real {
                scope.real_names.push(p.name.clone());
            }
        }

        if self.eat_keyword("exists") {
            loop {
                let (name, _, _) = self.ident("real variable name")?;
                self.expect_keyword("in");
                self.expect(TokenKind::LBracket, "'['");
                let lo = self.parse_signed_number()?;
                self.expect(TokenKind::Comma, "','");
                let hi = self.parse_signed_number()?;
                self.expect(TokenKind::RBracket, "']'");
                scope.real_names.push(name.clone());
                scope.exists.push(ExistsReal { name, lo, hi });
                if matches!(self.peek_kind(), TokenKind::Comma) {
                    self.advance();
                } else {
                    break;
                }
            }
            self.expect(TokenKind::Dot, "'.' after the exists prefix");
        }

        if self.eat_keyword("forall") {
            loop {
                let (name, line, col) = self.ident("quantified variable name")?;
                self.expect(TokenKind::Colon, "':'");
                match self.parse_type(player_count)? {
                    BasicType::Strategy(p) => {
                        scope.strategy_binders.push(StrategyQuant { player: p, name })
                    }
                    BasicType::Payoff => scope.payoff_binders.push(name),
                    other => {
                        self.diags.push(Diagnostic::error(
                            DiagnosticCode::TypeMismatch,
                            line,
                            col,
                            format!("quantifiers range over strategies or payoffs, not {}", other),
                        ));
                        return None;
                    }
                }
                if matches!(self.peek_kind(), TokenKind::Comma) {
                    self.advance();
                } else {
                    break;
                }
            }
            self.expect(TokenKind::Dot, "'.' after the forall prefix");
        }

        let body = self.parse_comparison_chain(&scope)?;
        Some(AtomicProperty {
            exists_reals: scope.exists.clone(),
            forall_strategies: scope.strategy_binders.clone(),
            forall_payoffs: scope.payoff_binders.clone(),
            body,
        })
    }

    fn expect_keyword(&mut self, kw: &str) {
        if !self.eat_keyword(kw) {
            self.error_here(format!("expected '{}'", kw));
        }
    }

    fn parse_signed_number(&mut self) -> Option<Rational> {
        let neg = if matches!(self.peek_kind(), TokenKind::Minus) {
            self.advance();
            true
        } else {
            false
        };
        match self.peek_kind().clone() {
            TokenKind::Number(n) => {
                self.advance();
                let mut v = n;
                if matches!(self.peek_kind(), TokenKind::Slash) {
                    self.advance();
                    match self.peek_kind().clone() {
                        TokenKind::Number(d) => {
                            self.advance();
                            v = v / d;
                        }
                        _ => {
                            self.error_here("expected denominator");
                            return None;
                        }
                    }
                }
                Some(if neg { -v } else { v })
            }
            _ => {
                self.error_here("expected a number");
                None
            }
        }
    }

    /// `expr op expr [op expr]` — a chained comparison is a conjunction.
    fn parse_comparison_chain(&mut self, scope: &Scope) -> Option<Vec<Comparison<Term>>> {
        let first = self.parse_expr(scope)?;
        let op = self.parse_compare_op()?;
        let second = self.parse_expr(scope)?;
        let mut out = vec![Comparison { lhs: first, op, rhs: second.clone() }];
        if matches!(self.peek_kind(), TokenKind::Le | TokenKind::Ge | TokenKind::Assign | TokenKind::EqEq) {
            let op2 = self.parse_compare_op()?;
            let third = self.parse_expr(scope)?;
            out.push(Comparison { lhs: second, op: op2, rhs: third });
        }
        Some(out)
    }

    fn parse_compare_op(&mut self) -> Option<CompareOp> {
        match self.peek_kind() {
            TokenKind::Le => {
                self.advance();
                Some(CompareOp::Le)
            }
            TokenKind::Ge => {
                self.advance();
                Some(CompareOp::Ge)
            }
            TokenKind::Assign | TokenKind::EqEq => {
                self.advance();
                Some(CompareOp::Eq)
            }
            _ => {
                self.error_here("expected a comparison operator (<=, >=, =)");
                None
            }
        }
    }

    fn parse_expr(&mut self, scope: &Scope) -> Option<TermExpr> {
        let mut lhs = self.parse_term_level(scope)?;
        loop {
            match self.peek_kind() {
                TokenKind::Plus => {
                    self.advance();
                    let rhs = self.parse_term_level(scope)?;
                    lhs = fold(lhs, rhs, '+');
                }
                TokenKind::Minus => {
                    self.advance();
                    let rhs = self.parse_term_level(scope)?;
                    lhs = fold(lhs, rhs, '-');
                }
                _ => return Some(lhs),
            }
        }
    }

    fn parse_term_level(&mut self, scope: &Scope) -> Option<TermExpr> {
        let mut lhs = self.parse_factor(scope)?;
        loop {
            match self.peek_kind() {
                TokenKind::Star => {
                    self.advance();
                    let rhs = self.parse_factor(scope)?;
                    lhs = fold(lhs, rhs, '*');
                }
                TokenKind::Slash => {
                    self.advance();
                    let rhs = self.parse_factor(scope)?;
                    lhs = fold(lhs, rhs, '/');
                }
                _ => return Some(lhs),
            }
        }
    }

    fn parse_factor(&mut self, scope: &Scope) -> Option<TermExpr> {
        match self.peek_kind().clone() {
            TokenKind::Minus => {
                self.advance();
                let inner = self.parse_factor(scope)?;
                if let Expr::Const(c) = inner {
                    return Some(Expr::Const(-c));
                }
                Some(TermExpr::zero().sub(inner))
            }
            TokenKind::Number(n) => {
                self.advance();
                Some(Expr::Const(n))
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.parse_expr(scope)?;
                self.expect(TokenKind::RParen, "')'");
                // a parenthesized payoff combination applied to a profile
                if matches!(self.peek_kind(), TokenKind::LParen) {
                    if let Some(combo) = expr_as_combo(&inner) {
                        self.advance();
                        let args = self.parse_strategy_args(scope)?;
                        self.expect(TokenKind::RParen, "')'");
                        return Some(TermExpr::payoff_app(PayoffFn::Combo(combo), args));
                    }
                    self.error_here("only a payoff combination can be applied to a profile");
                    return None;
                }
                Some(inner)
            }
            TokenKind::Ident(name) => self.parse_ident_factor(name, scope),
            _ => {
                self.error_here("expected an expression");
                None
            }
        }
    }

    fn parse_ident_factor(&mut self, name: String, scope: &Scope) -> Option<TermExpr> {
        // min/max: either finite set braces or a max-payoff binder
        if name == "min" || name == "max" {
            if matches!(self.peek2_kind(), TokenKind::LBrace) {
                self.advance();
                self.advance();
                let mut parts = vec![self.parse_expr(scope)?];
                while matches!(self.peek_kind(), TokenKind::Comma) {
                    self.advance();
                    parts.push(self.parse_expr(scope)?);
                }
                self.expect(TokenKind::RBrace, "'}'");
                return Some(if name == "min" { Expr::Min(parts) } else { Expr::Max(parts) });
            }
            if name == "max" && matches!(self.peek2_kind(), TokenKind::Ident(_)) {
                return self.parse_max_payoff(scope);
            }
        }

        if name == "delta" {
            self.advance();
            return Some(Expr::Delta);
        }

        let tok = self.advance();
        if matches!(self.peek_kind(), TokenKind::LParen) {
            self.advance();
            let args = self.parse_strategy_args(scope)?;
            self.expect(TokenKind::RParen, "')'");
            if let Some(p) = base_payoff_index(&name) {
                return Some(TermExpr::payoff_app(PayoffFn::base(p), args));
            }
            if let Some(p) = loss_index(&name) {
                return Some(Expr::Atom(Term::Loss { player: p, args }));
            }
            if scope.payoff_binders.iter().any(|b| b == &name) {
                return Some(TermExpr::payoff_app(PayoffFn::Var(name), args));
            }
            self.diags.push(Diagnostic::error(
                DiagnosticCode::SyntaxError,
                tok.line,
                tok.col,
                format!("'{}' is not a payoff (uK), loss (fK) or bound payoff variable", name),
            ));
            return None;
        }

        // bare identifier: a real variable (exists-bound or a Real formal)
        if scope.real_names.iter().any(|r| r == &name) {
            return Some(Expr::Atom(Term::RealVar(name)));
        }
        // a bare payoff symbol inside a parenthesized combination, applied
        // later as `(u1 - u2)(x, y)`; represented with an empty profile until
        // the application supplies one
        if let Some(p) = base_payoff_index(&name) {
            return Some(Expr::Atom(Term::Payoff { payoff: PayoffFn::base(p), args: Vec::new() }));
        }
        self.diags.push(Diagnostic::error(
            DiagnosticCode::SyntaxError,
            tok.line,
            tok.col,
            format!("'{}' is not a real variable in scope; strategies appear only inside payoff/loss applications", name),
        ));
        None
    }

    /// `max z: StrategyK . <payoff application using z>`.
    fn parse_max_payoff(&mut self, scope: &Scope) -> Option<TermExpr> {
        self.advance(); // max
        let (binder, line, col) = self.ident("binder name")?;
        self.expect(TokenKind::Colon, "':'");
        let ty = self.parse_type(usize::MAX)?;
        let player = match ty {
            BasicType::Strategy(p) => p,
            _ => {
                self.diags.push(Diagnostic::error(
                    DiagnosticCode::TypeMismatch,
                    line,
                    col,
                    "a max binder ranges over a strategy type",
                ));
                return None;
            }
        };
        self.expect(TokenKind::Dot, "'.'");

        // the maximized payoff application, with the binder in scope
        let mut inner_scope = Scope {
            strategy_binders: scope.strategy_binders.clone(),
            payoff_binders: scope.payoff_binders.clone(),
            exists: Vec::new(),
            real_names: scope.real_names.clone(),
        };
        inner_scope.strategy_binders.push(StrategyQuant { player, name: binder.clone() });
        let app = self.parse_factor(&inner_scope)?;

        // Accept either a single payoff application or a combination of
        // applications sharing the same profile; fold into a max-payoff term.
        match fold_max_payoff(&app, &binder, player) {
            Some(t) => Some(Expr::Atom(t)),
            None => {
                self.diags.push(Diagnostic::error(
                    DiagnosticCode::SyntaxError,
                    line,
                    col,
                    "the body of a max term must be one payoff application with the binder in its own slot",
                ));
                None
            }
        }
    }

    fn parse_strategy_args(&mut self, scope: &Scope) -> Option<Vec<StrategyArg>> {
        let mut args = Vec::new();
        if matches!(self.peek_kind(), TokenKind::RParen) {
            return Some(args);
        }
        loop {
            let (name, _, _) = self.ident("strategy argument")?;
            if scope.strategy_binders.iter().any(|b| b.name == name) {
                args.push(StrategyArg::Quant(name));
            } else {
                args.push(StrategyArg::Var(name));
            }
            if matches!(self.peek_kind(), TokenKind::Comma) {
                self.advance();
            } else {
                break;
            }
        }
        Some(args)
    }

    fn parse_algorithm(&mut self, player_count: usize) -> Option<AlgorithmBody> {
        let (name, _, _) = self.ident("algorithm name")?;
        self.expect(TokenKind::Colon, "':'");
        self.expect_newline();

        let mut statements = Vec::new();
        let mut return_profile = None;
        let mut return_line = None;

        loop {
            self.skip_newlines();
            if self.eat_keyword("end") {
                self.expect_newline();
                break;
            }
            if matches!(self.peek_kind(), TokenKind::Eof) {
                self.error_here("unterminated algorithm; expected 'end'");
                break;
            }
            let line = self.peek().line;

            if self.eat_keyword("return") {
                let mut profile = Vec::new();
                loop {
                    let Some((n, _, _)) = self.ident("returned strategy name") else {
                        self.synchronize();
                        break;
                    };
                    profile.push(n);
                    if matches!(self.peek_kind(), TokenKind::Comma) {
                        self.advance();
                    } else {
                        break;
                    }
                }
                if return_profile.is_some() {
                    self.diags.push(Diagnostic::error(
                        DiagnosticCode::SyntaxError,
                        line,
                        1,
                        "duplicate return statement",
                    ));
                }
                return_profile = Some(profile);
                return_line = Some(line);
                self.expect_newline();
                continue;
            }

            if self.eat_keyword("branch") {
                let scope = Scope::default();
                match self.parse_comparison_chain(&scope) {
                    Some(mut chain) if chain.len() == 1 => {
                        statements.push(Statement::Branch { condition: chain.pop().unwrap(), line });
                    }
                    Some(_) => self.diags.push(Diagnostic::error(
                        DiagnosticCode::SyntaxError,
                        line,
                        1,
                        "a branch gate takes a single comparison",
                    )),
                    None => self.synchronize(),
                }
                self.expect_newline();
                continue;
            }

            if return_profile.is_some() {
                self.error_here("statements after 'return' are not allowed");
                self.synchronize();
                continue;
            }

            if let Some(stmt) = self.parse_assignment(player_count, line) {
                statements.push(Statement::Assign(stmt));
            }
            self.expect_newline();
        }

        Some(AlgorithmBody { name, statements, return_profile, return_line })
    }

    fn parse_assignment(&mut self, player_count: usize, line: usize) -> Option<Assignment> {
        let mut outputs = Vec::new();
        let mut annotations = Vec::new();
        loop {
            let (name, _, _) = self.ident("output name")?;
            outputs.push(name);
            if matches!(self.peek_kind(), TokenKind::Colon) {
                self.advance();
                annotations.push(self.parse_type(player_count));
            } else {
                annotations.push(None);
            }
            if matches!(self.peek_kind(), TokenKind::Comma) {
                self.advance();
            } else {
                break;
            }
        }
        if !self.expect(TokenKind::Assign, "'=' in assignment") {
            self.synchronize();
            return None;
        }
        let (block, _, _) = self.ident("block name")?;
        self.expect(TokenKind::LParen, "'('");
        let mut args = Vec::new();
        if !matches!(self.peek_kind(), TokenKind::RParen) {
            loop {
                args.push(self.parse_arg()?);
                if matches!(self.peek_kind(), TokenKind::Comma) {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen, "')'");
        Some(Assignment { outputs, annotations, block, args, line })
    }

    /// An actual argument: identifier, payoff combination or rational.
    fn parse_arg(&mut self) -> Option<Arg> {
        if self.arg_is_payoff_combo() {
            return self.parse_payoff_combo_arg().map(Arg::Payoff);
        }
        match self.peek_kind().clone() {
            TokenKind::Ident(name) => {
                self.advance();
                Some(Arg::Ident(name))
            }
            TokenKind::Number(_) | TokenKind::Minus => self.parse_signed_rational_arg().map(Arg::Real),
            _ => {
                self.error_here("expected an argument");
                None
            }
        }
    }

    /// Lookahead: does an argument start a payoff combination (`u1`,
    /// `2*u1 - u2`, `1/2*u1 + 1/2*u2`)?
    fn arg_is_payoff_combo(&self) -> bool {
        let mut i = self.pos;
        // optional sign and coefficient
        if matches!(self.tokens[i].kind, TokenKind::Minus) {
            i += 1;
        }
        if matches!(self.tokens[i].kind, TokenKind::Number(_)) {
            i += 1;
            if matches!(self.tokens[i].kind, TokenKind::Slash)
                && matches!(self.tokens[i + 1].kind, TokenKind::Number(_))
            {
                i += 2;
            }
            if !matches!(self.tokens[i].kind, TokenKind::Star) {
                return false;
            }
            i += 1;
        }
        matches!(&self.tokens[i].kind, TokenKind::Ident(s) if base_payoff_index(s).is_some())
            && !matches!(self.tokens[i + 1].kind, TokenKind::LParen)
    }

    fn parse_signed_rational_arg(&mut self) -> Option<Rational> {
        self.parse_signed_number()
    }

    fn parse_payoff_combo_arg(&mut self) -> Option<PayoffCombo> {
        let mut coeffs: Vec<(usize, Rational)> = Vec::new();
        let mut sign = Rational::one();
        loop {
            if matches!(self.peek_kind(), TokenKind::Minus) {
                self.advance();
                sign = -Rational::one();
            }
            let mut coef = sign;
            if let TokenKind::Number(_) = self.peek_kind() {
                let n = self.parse_signed_number()?;
                coef = sign * n;
                self.expect(TokenKind::Star, "'*' between coefficient and payoff");
            }
            let (name, line, col) = self.ident("payoff name (uK)")?;
            match base_payoff_index(&name) {
                Some(p) => coeffs.push((p, coef)),
                None => {
                    self.diags.push(Diagnostic::error(
                        DiagnosticCode::SyntaxError,
                        line,
                        col,
                        format!("'{}' is not a base payoff", name),
                    ));
                    return None;
                }
            }
            match self.peek_kind() {
                TokenKind::Plus => {
                    self.advance();
                    sign = Rational::one();
                }
                TokenKind::Minus => {
                    self.advance();
                    sign = -Rational::one();
                }
                _ => break,
            }
        }
        Some(PayoffCombo::new(coeffs))
    }
}

/// Build an arithmetic node, folding constant operands so rationals written
/// as `1/2` stay exact single constants.
fn fold(lhs: TermExpr, rhs: TermExpr, op: char) -> TermExpr {
    if let (Expr::Const(a), Expr::Const(b)) = (&lhs, &rhs) {
        match op {
            '+' => return Expr::Const(a + b),
            '-' => return Expr::Const(a - b),
            '*' => return Expr::Const(a * b),
            '/' if !b.numer().is_zero() => return Expr::Const(a / b),
            _ => {}
        }
    }
    match op {
        '+' => lhs.add(rhs),
        '-' => lhs.sub(rhs),
        '*' => lhs.mul(rhs),
        _ => lhs.div(rhs),
    }
}

/// `u3` → player index 2.
pub fn base_payoff_index(name: &str) -> Option<usize> {
    name.strip_prefix('u')
        .and_then(|rest| rest.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .map(|n| n - 1)
}

/// `f2` → player index 1.
pub fn loss_index(name: &str) -> Option<usize> {
    name.strip_prefix('f')
        .and_then(|rest| rest.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .map(|n| n - 1)
}

/// Extract a payoff combination from an expression like `u1 - u2` or
/// `1/2*u1 + 1/2*u2` built from bare payoff symbols (empty profiles).
fn expr_as_combo(e: &TermExpr) -> Option<PayoffCombo> {
    fn walk(e: &TermExpr, scale: Rational, out: &mut Vec<(usize, Rational)>) -> bool {
        match e {
            Expr::Atom(Term::Payoff { payoff: PayoffFn::Combo(c), args }) if args.is_empty() => {
                match c.as_base() {
                    Some(p) => {
                        out.push((p, scale));
                        true
                    }
                    None => {
                        for (p, coef) in c.coeffs() {
                            out.push((p, coef * scale));
                        }
                        true
                    }
                }
            }
            Expr::Add(a, b) => walk(a, scale, out) && walk(b, scale, out),
            Expr::Sub(a, b) => walk(a, scale, out) && walk(b, -scale, out),
            Expr::Mul(a, b) => match (a.as_ref(), b.as_ref()) {
                (Expr::Const(c), inner) => walk(inner, scale * *c, out),
                (inner, Expr::Const(c)) => walk(inner, scale * *c, out),
                _ => false,
            },
            _ => false,
        }
    }
    let mut coeffs = Vec::new();
    if !walk(e, Rational::one(), &mut coeffs) {
        return None;
    }
    let combo = PayoffCombo::new(coeffs);
    if combo.is_empty() {
        None
    } else {
        Some(combo)
    }
}

/// Recognize `Σ c_k · u_k(args)` where every application shares `args` and
/// the binder sits in the maximized player's own slot; fold to one term.
fn fold_max_payoff(e: &TermExpr, binder: &str, player: usize) -> Option<Term> {
    struct Acc {
        coeffs: Vec<(usize, Rational)>,
        others: Option<Vec<StrategyArg>>,
    }
    fn walk(e: &TermExpr, scale: Rational, acc: &mut Acc, binder: &str, player: usize) -> bool {
        match e {
            Expr::Atom(Term::Payoff { payoff: PayoffFn::Combo(c), args }) => {
                let Some(base) = c.as_base() else { return false };
                if args.len() <= player {
                    return false;
                }
                match &args[player] {
                    StrategyArg::Quant(q) if q == binder => {}
                    _ => return false,
                }
                let mut others = args.clone();
                others.remove(player);
                if others.iter().any(|a| a.is_quant() && a.name() == binder) {
                    return false;
                }
                match &acc.others {
                    None => acc.others = Some(others),
                    Some(prev) if *prev == others => {}
                    _ => return false,
                }
                acc.coeffs.push((base, scale));
                true
            }
            Expr::Add(a, b) => {
                walk(a, scale, acc, binder, player) && walk(b, scale, acc, binder, player)
            }
            Expr::Sub(a, b) => {
                walk(a, scale, acc, binder, player) && walk(b, -scale, acc, binder, player)
            }
            Expr::Mul(a, b) => match (a.as_ref(), b.as_ref()) {
                (Expr::Const(c), inner) => walk(inner, scale * *c, acc, binder, player),
                (inner, Expr::Const(c)) => walk(inner, scale * *c, acc, binder, player),
                _ => false,
            },
            _ => false,
        }
    }
    let mut acc = Acc { coeffs: Vec::new(), others: None };
    if !walk(e, Rational::one(), &mut acc, binder, player) {
        return None;
    }
    let others = acc.others?;
    let combo = PayoffCombo::new(acc.coeffs);
    if combo.is_empty() {
        return None;
    }
    Some(Term::MaxPayoff { player, payoff: PayoffFn::Combo(combo), others })
}

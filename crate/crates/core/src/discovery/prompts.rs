//! Prompt templates (version 1). The content mirrors the published loop
//! design: a constrained initial task statement with block documentation
//! and code examples, then per-round feedback built from compiler
//! diagnostics or the current best bound with steering directives.

use super::{AttemptRecord, DiscoveryConfig, Outcome};
use crate::blocks::block_manifest;

pub const PROMPT_VERSION: &str = "v1";

pub fn build_initial_prompt(cfg: &DiscoveryConfig) -> String {
    assert!(!cfg.block_allowlist.is_empty(), "block allowlist must be nonempty");
    let manifest = serde_json::to_string_pretty(&block_manifest(cfg.players, &cfg.block_allowlist))
        .unwrap_or_default();
    let stationary_line = if cfg.require_stationary_point {
        "- Use at least one StationaryPoint building block; it is the strongest known primitive.\n"
    } else {
        ""
    };
    format!(
        r#"You design approximation algorithms for {players}-player normal-form games.
Your goal: write an algorithm in the language below whose provable worst-case
approximation bound epsilon is as SMALL as possible. The analyzer computes and
proves the exact bound of any valid program you write.

Language rules:
- First line: `game {players} players`, then `option auto_return = on`, then one
  `algorithm Name:` section ending with `end`.
- One assignment per line: `out1: Type1, out2: Type2 = Block(args)`.
- Static single assignment: every variable is assigned exactly once and used
  only after assignment. Type annotations are mandatory (Strategy1, Strategy2, ...).
- Do NOT write a return statement: the compiler appends an optimal mixing over
  all constructed strategies and returns its output.
{stationary_line}- At most {line_cap} code lines and at most {strategy_cap} constructed strategies.

Available building blocks (JSON manifest):
{manifest}

Valid example:
```
game {players} players
option auto_return = on

algorithm Example:
    a: Strategy1 = Random1()
    b: Strategy2 = BestResponse2(a)
    c: Strategy1 = BestResponse1(b)
    m: Strategy1 = UniformMixing1(a, c)
end
```

Invalid example (re-assigns `a`, uses `z` before assignment, has a return):
```
game {players} players

algorithm Broken:
    a: Strategy1 = Random1()
    a: Strategy1 = BestResponse1(z)
    return a
end
```

Reply with exactly one program in a fenced code block."#,
        players = cfg.players,
        line_cap = cfg.line_cap,
        strategy_cap = cfg.strategy_cap,
        stationary_line = stationary_line,
        manifest = manifest,
    )
}

pub struct FeedbackContext<'a> {
    pub last: &'a AttemptRecord,
    pub best_bound: Option<f64>,
    pub best_delta: bool,
    pub past: &'a [AttemptRecord],
}

pub fn build_feedback_prompt(cfg: &DiscoveryConfig, ctx: &FeedbackContext) -> String {
    match &ctx.last.outcome {
        Outcome::SyntaxError { diagnostics } => format!(
            "The compiler rejected your program with these messages:\n{}\n\nCarefully review and correct every reported issue, then reply with the fixed program in a fenced code block.",
            diagnostics
        ),
        Outcome::TooComplex { reason } => format!(
            "Your program is too large to analyze in time: {}.\nReply with a simplified program in a fenced code block.",
            reason
        ),
        Outcome::AnalyzerTimeout => "The analyzer timed out on your program. Reply with a simpler program (fewer constructed strategies) in a fenced code block.".to_string(),
        Outcome::TransportError { .. } => "Please resend your latest program in a fenced code block.".to_string(),
        Outcome::Duplicate { of_round } => {
            let mut history = String::new();
            for a in ctx.past {
                let line = match &a.outcome {
                    Outcome::Analyzed { bound, delta, .. } => format!(
                        "- round {}: bound {:.5}{}\n",
                        a.round,
                        bound,
                        if *delta { "+delta" } else { "" }
                    ),
                    Outcome::SyntaxError { .. } => format!("- round {}: rejected\n", a.round),
                    Outcome::Duplicate { .. } => format!("- round {}: duplicate\n", a.round),
                    _ => String::new(),
                };
                history.push_str(&line);
            }
            format!(
                "Your program is identical (up to renaming) to the one from round {}. Record of past attempts:\n{}\nPropose a structurally different algorithm, in a fenced code block.",
                of_round, history
            )
        }
        Outcome::Analyzed { bound, delta, .. } => {
            let bound_text = format!("{:.5}{}", bound, if *delta { "+delta" } else { "" });
            let best_text = match ctx.best_bound {
                Some(b) => format!("{:.5}{}", b, if ctx.best_delta { "+delta" } else { "" }),
                None => bound_text.clone(),
            };
            format!(
                r#"Your algorithm is valid. Its proven approximation bound is epsilon = {bound}.
The best bound so far in this session is epsilon = {best}.
Design a new algorithm with a SMALLER provable bound. Guidance:
- leverage the more complex and novel building blocks;
- break symmetry: apply different blocks to each player;
- explore novel combinations to escape local optima;
- prefer the simplest structure achieving a comparable or better bound.
At most {line_cap} lines and {strategy_cap} strategies. Reply with one program in a fenced code block."#,
                bound = bound_text,
                best = best_text,
                line_cap = cfg.line_cap,
                strategy_cap = cfg.strategy_cap,
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    #[test]
    fn initial_prompt_respects_allowlist_and_flags() {
        let mut cfg = DiscoveryConfig::offline_defaults(2, PathBuf::from("/tmp/x"));
        cfg.block_allowlist = vec!["Random1".into(), "BestResponse1".into(), "UniformMixing1".into()];
        cfg.require_stationary_point = false;
        let p = build_initial_prompt(&cfg);
        assert!(p.contains("BestResponse1"));
        assert!(!p.contains("StationaryPoint12"), "excluded blocks stay out of the manifest");
        assert!(!p.contains("at least one StationaryPoint"));
        cfg.require_stationary_point = true;
        assert!(build_initial_prompt(&cfg).contains("at least one StationaryPoint"));
    }

    #[test]
    fn error_feedback_embeds_diagnostics_verbatim() {
        let cfg = DiscoveryConfig::offline_defaults(2, PathBuf::from("/tmp/x"));
        let rec = AttemptRecord {
            round: 1,
            program: "bad".into(),
            canonical_hash: "h".into(),
            outcome: Outcome::SyntaxError {
                diagnostics: "3:1: error[SSAViolation]: 'k' is assigned more than once; each variable is assigned exactly once".into(),
            },
            unix_time: 0,
        };
        let p = build_feedback_prompt(
            &cfg,
            &FeedbackContext { last: &rec, best_bound: None, best_delta: false, past: &[] },
        );
        assert!(p.contains("3:1: error[SSAViolation]"));
    }

    #[test]
    fn success_feedback_states_both_bounds() {
        let cfg = DiscoveryConfig::offline_defaults(2, PathBuf::from("/tmp/x"));
        let rec = AttemptRecord {
            round: 2,
            program: "p".into(),
            canonical_hash: "h".into(),
            outcome: Outcome::Analyzed { bound: 0.55, delta: false, certificate: "{}".into() },
            unix_time: 0,
        };
        let p = build_feedback_prompt(
            &cfg,
            &FeedbackContext { last: &rec, best_bound: Some(0.5), best_delta: false, past: &[] },
        );
        assert!(p.contains("0.55000"));
        assert!(p.contains("0.50000"));
        assert!(p.contains("break symmetry"));
    }
}

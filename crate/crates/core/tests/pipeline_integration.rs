//! Cross-module integration: surface syntax round trips, diagnostics carry
//! locations, dumps are stable, and disjunctive encodings maximize over
//! branches.

use legone_core::blocks::{self, BlockError};
use legone_core::frontend::{
    self, parse, pretty, typecheck, Arg, Assignment, BasicType, DiagnosticCode, SourceProgram,
    Statement,
};
use legone_core::logic::{encoding_to_json, if_then_else, CompareOp};
use legone_core::optprob::BuildOptions;
use legone_core::pipeline::analyze_source;
use legone_core::solver::SolverConfig;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DMP: &str = include_str!("../../../programs/dmp.lne");

fn strip_locations(prog: &SourceProgram) -> SourceProgram {
    let mut p = prog.clone();
    for stmt in &mut p.algorithm.statements {
        match stmt {
            Statement::Assign(a) => a.line = 0,
            Statement::Branch { line, .. } => *line = 0,
        }
    }
    p.algorithm.return_line = None;
    p
}

/// Build a random well-formed program from a seed; used to drive the
/// round-trip property.
fn generate_program(seed: u64) -> SourceProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let players = 2 + (seed % 2) as usize;
    let mut statements = Vec::new();
    let mut by_player: Vec<Vec<String>> = vec![Vec::new(); players];
    let mut counter = 0;
    let n_stmts = 1 + rng.gen_range(0..5);
    for _ in 0..n_stmts {
        let mut fresh = |p: usize, by_player: &mut Vec<Vec<String>>| {
            counter += 1;
            let name = format!("v{}", counter);
            by_player[p].push(name.clone());
            name
        };
        let choice = rng.gen_range(0..4);
        let (outputs, annotations, block, args): (Vec<String>, _, String, Vec<Arg>) = match choice {
            0 => {
                let p = rng.gen_range(0..players);
                let out = fresh(p, &mut by_player);
                (vec![out], vec![Some(BasicType::Strategy(p))], format!("Random{}", p + 1), vec![])
            }
            1 => {
                // best response when every opponent has a strategy
                let p = rng.gen_range(0..players);
                let opponents: Vec<usize> = (0..players).filter(|&k| k != p).collect();
                if opponents.iter().any(|&k| by_player[k].is_empty()) {
                    let out = fresh(p, &mut by_player);
                    (vec![out], vec![None], format!("Random{}", p + 1), vec![])
                } else {
                    let args = opponents
                        .iter()
                        .map(|&k| Arg::Ident(by_player[k].last().unwrap().clone()))
                        .collect();
                    let out = fresh(p, &mut by_player);
                    (vec![out], vec![Some(BasicType::Strategy(p))], format!("BestResponse{}", p + 1), args)
                }
            }
            2 => {
                let p = rng.gen_range(0..players);
                if by_player[p].len() < 2 {
                    let out = fresh(p, &mut by_player);
                    (vec![out], vec![None], format!("Random{}", p + 1), vec![])
                } else {
                    let a = by_player[p][0].clone();
                    let b = by_player[p][by_player[p].len() - 1].clone();
                    let out = fresh(p, &mut by_player);
                    (
                        vec![out],
                        vec![Some(BasicType::Strategy(p))],
                        format!("UniformMixing{}", p + 1),
                        vec![Arg::Ident(a), Arg::Ident(b)],
                    )
                }
            }
            _ => {
                if players == 2 {
                    let o1 = fresh(0, &mut by_player);
                    let o2 = {
                        counter += 1;
                        let n = format!("v{}", counter);
                        by_player[1].push(n.clone());
                        n
                    };
                    let combo = legone_core::logic::PayoffCombo::new([
                        (0, legone_core::logic::Rational::from_integer(1)),
                        (1, -legone_core::logic::Rational::from_integer(1)),
                    ]);
                    (
                        vec![o1, o2],
                        vec![Some(BasicType::Strategy(0)), Some(BasicType::Strategy(1))],
                        "ZeroSumNE12".to_string(),
                        vec![Arg::Payoff(combo)],
                    )
                } else {
                    let p = rng.gen_range(0..players);
                    let out = fresh(p, &mut by_player);
                    (vec![out], vec![None], format!("Random{}", p + 1), vec![])
                }
            }
        };
        statements.push(Statement::Assign(Assignment { outputs, annotations, block, args, line: 0 }));
    }

    let complete = by_player.iter().all(|v| !v.is_empty());
    let return_profile = if complete && rng.gen_bool(0.7) {
        Some(by_player.iter().map(|v| v.last().unwrap().clone()).collect())
    } else {
        None
    };
    SourceProgram {
        player_count: players,
        blocks: vec![],
        algorithm: frontend::AlgorithmBody {
            name: "Generated".into(),
            statements,
            return_profile,
            return_line: None,
        },
        options: frontend::CompileOptions {
            auto_return_optimal_mixing: rng.gen_bool(0.5),
            delta_symbolic: true,
        },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn parse_pretty_roundtrip(seed in any::<u64>()) {
        let prog = generate_program(seed);
        let printed = pretty(&prog);
        let reparsed = parse(&printed).unwrap_or_else(|d| panic!("roundtrip parse failed:\n{}\n{:?}", printed, d));
        prop_assert_eq!(strip_locations(&reparsed), strip_locations(&prog));
    }
}

#[test]
fn corpus_round_trips_through_pretty() {
    for (id, src) in legone_core::bench::PROGRAM_SOURCES {
        let prog = parse(src).expect(id);
        let reparsed = parse(&pretty(&prog)).expect(id);
        assert_eq!(strip_locations(&reparsed), strip_locations(&prog), "{}", id);
    }
}

#[test]
fn dmp_parses_to_five_statements() {
    let prog = parse(DMP).unwrap();
    assert_eq!(prog.player_count, 2);
    // four assignments plus the return statement
    assert_eq!(prog.algorithm.statement_count(), 5);
}

#[test]
fn empty_algorithm_is_parse_legal() {
    let src = r#"
game 2 players

block Noop(x: Strategy1) -> (y: Strategy1):
end

algorithm Empty:
end
"#;
    let prog = parse(src).unwrap();
    assert_eq!(prog.algorithm.statement_count(), 0);
    assert_eq!(prog.blocks.len(), 1);
}

#[test]
fn ssa_violation_reported_at_second_assignment() {
    let src = "game 2 players\nalgorithm A:\n    k: Strategy1 = Random1()\n    k: Strategy1 = Random1()\nend\n";
    let prog = parse(src).unwrap();
    let diags = typecheck(&prog);
    let ssa: Vec<_> = diags.iter().filter(|d| d.code == DiagnosticCode::SSAViolation).collect();
    assert_eq!(ssa.len(), 1);
    assert_eq!(ssa[0].line, 4, "reported at the reassignment");
}

#[test]
fn cross_player_mixing_is_a_type_error() {
    let src = "game 2 players\nalgorithm A:\n    a: Strategy1 = Random1()\n    b: Strategy2 = Random2()\n    m: Strategy1 = UniformMixing1(a, b)\n    return m, b\nend\n";
    let prog = parse(src).unwrap();
    let diags = typecheck(&prog);
    assert!(diags.iter().any(|d| d.code == DiagnosticCode::TypeMismatch));
}

#[test]
fn best_response_rejects_own_strategy() {
    let src = "game 2 players\nalgorithm A:\n    b: Strategy2 = Random2()\n    c: Strategy2 = BestResponse2(b)\n    return b, c\nend\n";
    let prog = parse(src).unwrap();
    let diags = typecheck(&prog);
    assert!(
        diags.iter().any(|d| d.code == DiagnosticCode::TypeMismatch),
        "BestResponse2 expects the opponents' profile"
    );
}

#[test]
fn zero_sum_payoff_literal_is_well_typed() {
    let src = "game 2 players\nalgorithm A:\n    x: Strategy1, y: Strategy2 = ZeroSumNE12(u1 - u2)\n    return x, y\nend\n";
    let prog = parse(src).unwrap();
    let diags = typecheck(&prog);
    assert!(diags.iter().all(|d| !d.is_error()), "{:?}", diags);
}

#[test]
fn every_error_diagnostic_has_a_location() {
    let bad = "game 2 players\nalgorithm A:\n    x: Strategy1 = Nope1()\n    x: Strategy1 = Random1()\n    y = UniformMixing1(x)\nend\n";
    let prog = parse(bad).unwrap();
    for d in typecheck(&prog) {
        assert!(d.line > 0, "diagnostic without location: {}", d);
    }
}

#[test]
fn branch_gate_warns_for_auto_pipeline() {
    let (_prog, warnings) = {
        let src = "game 2 players\noption auto_return = on\nalgorithm A:\n    x: Strategy1, y: Strategy2 = ZeroSumNE12(u1 - u2)\n    branch f1(x, y) >= f2(x, y)\nend\n";
        frontend::check(src).unwrap()
    };
    assert!(warnings.iter().any(|d| d.code == DiagnosticCode::BranchWarning));
}

#[test]
fn auto_return_passthrough_and_missing_strategy() {
    // already-returning programs pass through unchanged
    let prog = parse(DMP).unwrap();
    let same = blocks::auto_return(&prog).unwrap();
    assert_eq!(same, prog);

    // a player with no constructed strategy is an error
    let src = "game 3 players\noption auto_return = on\nalgorithm A:\n    a: Strategy1 = Random1()\n    b: Strategy2 = Random2()\nend\n";
    let prog = parse(src).unwrap();
    match blocks::auto_return(&prog) {
        Err(BlockError::NoStrategyForPlayer { player }) => assert_eq!(player, 2),
        other => panic!("expected NoStrategyForPlayer, got {:?}", other),
    }
}

#[test]
fn dumps_are_deterministic() {
    let prog = parse(DMP).unwrap();
    let a = serde_json::to_string(&frontend::dump_ast_json(&prog)).unwrap();
    let b = serde_json::to_string(&frontend::dump_ast_json(&prog)).unwrap();
    assert_eq!(a, b);

    let quick = SolverConfig { restarts: 1, max_iterations: 1, ..Default::default() };
    let out1 = analyze_source(DMP, BuildOptions::default(), &quick).unwrap();
    let out2 = analyze_source(DMP, BuildOptions::default(), &quick).unwrap();
    assert_eq!(
        serde_json::to_string(&out1.problem).unwrap(),
        serde_json::to_string(&out2.problem).unwrap()
    );
    assert_eq!(
        serde_json::to_string(&encoding_to_json(&out1.encoding)).unwrap(),
        serde_json::to_string(&encoding_to_json(&out2.encoding)).unwrap()
    );
}

#[test]
fn disjunctive_encoding_takes_the_branch_maximum() {
    use legone_core::logic::{AtomicProperty, Comparison, Expr, Formula, StrategyArg, Term, TermExpr};
    use legone_core::optprob::build_problem;
    use legone_core::solver::solve_builtin;
    use legone_core::tactics::{abstract_system, StrategyUniverse};

    // two branches bounding the returned loss by different constants; the
    // certified bound is the max of the branch optima
    let src = "game 2 players\nalgorithm A:\n    x: Strategy1 = Random1()\n    y: Strategy2 = Random2()\n    return x, y\nend\n";
    let prog = parse(src).unwrap();
    let mut enc = legone_core::logic::encode_program(&prog).unwrap();
    let loss = |p: usize| -> TermExpr {
        Expr::Atom(Term::Loss {
            player: p,
            args: vec![StrategyArg::Var("x".into()), StrategyArg::Var("y".into())],
        })
    };
    let cap = |v: (i64, i64)| -> Formula {
        Formula::Atom(AtomicProperty::bare(vec![
            Comparison { lhs: loss(0), op: CompareOp::Le, rhs: Expr::rational(v.0, v.1) },
            Comparison { lhs: loss(1), op: CompareOp::Le, rhs: Expr::rational(v.0, v.1) },
        ]))
    };
    let branches = if_then_else(Expr::rational(1, 2), Expr::rational(1, 2), cap((1, 4)), cap((2, 5)));
    enc.phi = Formula::and(vec![enc.phi.clone(), branches]);

    let universe = StrategyUniverse::from_program(&prog).unwrap();
    let payoffs = legone_core::tactics::payoff_set(&prog);
    let (sys, _) = abstract_system(&enc, &universe, &payoffs, true).unwrap();
    let problem = build_problem(&sys, BuildOptions::default()).unwrap();
    assert_eq!(problem.disjuncts.len(), 4, "2 branches x 2 objective parts");
    let cert = solve_builtin(&problem, &SolverConfig { restarts: 8, ..Default::default() });
    assert!((cert.bound - 0.4).abs() < 1e-5, "max of branch optima, got {}", cert.bound);
}

#[test]
fn export_json_mirrors_problem_dump() {
    let quick = SolverConfig { restarts: 1, max_iterations: 1, ..Default::default() };
    let out = analyze_source(DMP, BuildOptions::default(), &quick).unwrap();
    let script =
        legone_core::solver::export_script(&out.problem, legone_core::solver::ExportDialect::GenericJson)
            .unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&script).unwrap();
    assert_eq!(parsed, serde_json::to_value(&out.problem).unwrap());
}

#[test]
fn block_manifest_lists_signatures_and_encodings() {
    let manifest = blocks::block_manifest(2, &discovery_allowlist());
    let arr = manifest.as_array().unwrap();
    assert!(arr.iter().any(|e| e["name"] == "StationaryPoint12" && e["delta_approximate"] == true));
    let br = arr.iter().find(|e| e["name"] == "BestResponse1").unwrap();
    assert!(br["signature"].as_str().unwrap().contains("-> (x1: Strategy1)"));
    assert!(br["encoding"][0].as_str().unwrap().contains("u1"));
}

fn discovery_allowlist() -> Vec<String> {
    legone_core::discovery::default_allowlist(2)
}

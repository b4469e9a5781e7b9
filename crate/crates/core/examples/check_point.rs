use legone_core::logic::Expr;
fn main() {
    let path = std::env::args().nth(1).unwrap();
    let src = std::fs::read_to_string(&path).unwrap();
    let cfg = legone_core::solver::SolverConfig::default();
    let out = legone_core::analyze_source(&src, legone_core::optprob::BuildOptions::default(), &cfg).unwrap();
    let (di, d) = out.certificate.per_disjunct.iter().enumerate()
        .max_by(|a, b| a.1.value.partial_cmp(&b.1.value).unwrap()).unwrap();
    let vals: std::collections::HashMap<&String, f64> = out
        .problem.variables.keys().zip(d.point.iter().cloned()).collect();
    let at = |n: &String| vals[n];
    let mut worst = 0.0f64;
    for c in &out.problem.disjuncts[di].constraints {
        let v = c.violation(&at, 0.0);
        if v > worst { worst = v; }
        if v > 1e-6 {
            println!("VIOLATED by {:.6}: {}", v, c);
        }
    }
    println!("max violation at reported point: {:.3e}", worst);
    let obj = out.problem.disjuncts[di].objective.eval(&at, 0.0);
    println!("objective re-eval: {:.6} (reported {:.6})", obj, d.value);
}

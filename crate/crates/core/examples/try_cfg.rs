fn main() {
    let path = std::env::args().nth(1).unwrap();
    let restarts: usize = std::env::args().nth(2).unwrap_or("64".into()).parse().unwrap();
    let seed: u64 = std::env::args().nth(3).unwrap_or("7824".into()).parse().unwrap();
    let src = std::fs::read_to_string(&path).unwrap();
    let t0 = std::time::Instant::now();
    let cfg = legone_core::solver::SolverConfig { restarts, seed, ..Default::default() };
    let out = legone_core::analyze_source(&src, legone_core::optprob::BuildOptions::default(), &cfg).unwrap();
    println!("bound = {}  ({} vars, {} disjuncts, {:?})", out.certificate.bound_text(),
        out.problem.variables.len(), out.problem.disjuncts.len(), t0.elapsed());
    for (i, d) in out.certificate.per_disjunct.iter().enumerate() {
        println!("  disjunct {}: {:.6} ({:?})", i, d.value, d.status);
    }
}

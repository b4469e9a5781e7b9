fn main() {
    let arg = std::env::args().nth(1).unwrap_or_else(|| "programs/dmp.lne".to_string());
    let src = std::fs::read_to_string(&arg)
        .or_else(|_| std::fs::read_to_string(format!("../../{}", arg)))
        .unwrap();
    let t0 = std::time::Instant::now();
    let out = legone_core::analyze_source(
        &src,
        legone_core::optprob::BuildOptions::default(),
        &legone_core::solver::SolverConfig::default(),
    )
    .unwrap();
    println!("bound = {}", out.certificate.bound_text());
    println!("vars = {}", out.problem.variables.len());
    println!("disjuncts = {}", out.problem.disjuncts.len());
    for (i, d) in out.certificate.per_disjunct.iter().enumerate() {
        println!("  disjunct {}: {} ({:?})", i, d.value, d.status);
    }
    println!("elapsed = {:?}", t0.elapsed());
}

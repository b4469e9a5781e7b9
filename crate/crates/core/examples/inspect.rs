fn main() {
    let path = std::env::args().nth(1).unwrap();
    let src = std::fs::read_to_string(&path).unwrap();
    let cfg = legone_core::solver::SolverConfig::default();
    let out = legone_core::analyze_source(&src, legone_core::optprob::BuildOptions::default(), &cfg).unwrap();
    println!("bound = {}", out.certificate.bound_text());
    // worst disjunct's maximizer, annotated with term origins
    let (di, d) = out
        .certificate
        .per_disjunct
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.value.partial_cmp(&b.1.value).unwrap())
        .unwrap();
    println!("disjunct {} value {:.6}", di, d.value);
    for ((name, info), v) in out.system.variables.iter().zip(&d.point) {
        if (v.abs() > 1e-9 && (v - 1.0).abs() > 1e-9) || info.origin.contains("f") {
            println!("  {:>6} = {:.5}   {}", name, v, info.origin);
        }
    }
    println!("-- zeros/ones omitted unless losses");
}

use legone_core::oracle::*;
use rand::SeedableRng;

fn main() {
    let src = std::fs::read_to_string("programs/ts.lne").unwrap();
    let (prog, _) = legone_core::frontend::check(&src).unwrap();
    for gi in 0..10u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xacce + gi);
        let game = ConcreteGame::random(2, &[5, 5], &mut rng);
        let trace = run_concrete(&prog, &game, 0xacce + gi).unwrap();
        let f = &trace.final_profile;
        let xs = trace.strategy("xs").unwrap();
        let ys = trace.strategy("ys").unwrap();
        let prof = vec![xs.clone(), ys.clone()];
        let f1 = game.regret(0, &prof);
        let f2 = game.regret(1, &prof);
        println!(
            "game {}: partial={} f1={:.6} f2={:.6} gap={:.2e} rho={:?} final_regrets={:?}",
            gi,
            trace.partial,
            f1,
            f2,
            (f1 - f2).abs(),
            trace.rho_witnesses,
            trace.regrets.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>()
        );
        let _ = f;
    }
}

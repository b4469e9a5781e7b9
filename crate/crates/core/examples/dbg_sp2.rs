use legone_core::oracle::*;
use rand::SeedableRng;

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xacce + 4);
    let game = ConcreteGame::random(2, &[5, 5], &mut rng);
    // replicate phase 1 manually
    let mut profile = vec![vec![0.2; 5], vec![0.2; 5]];
    let phi = |prof: &[Vec<f64>]| -> f64 { game.regret(0, prof).max(game.regret(1, prof)) };
    let mut value = phi(&profile);
    for it in 0..5000 {
        let bi = game.best_response(0, &profile);
        let bj = game.best_response(1, &profile);
        let mut improved = false;
        'steps: for ei in [1.0, 0.5, 0.25, 0.1, 0.04, 0.01, 3e-3, 1e-3, 3e-4, 1e-4, 2e-5, 0.0f64] {
            for ej in [1.0, 0.5, 0.25, 0.1, 0.04, 0.01, 3e-3, 1e-3, 3e-4, 1e-4, 2e-5, 0.0f64] {
                if ei == 0.0 && ej == 0.0 { continue; }
                let mut cand = profile.clone();
                for (c, b) in cand[0].iter_mut().zip(&bi) { *c = (1.0 - ei) * *c + ei * b; }
                for (c, b) in cand[1].iter_mut().zip(&bj) { *c = (1.0 - ej) * *c + ej * b; }
                let v = phi(&cand);
                if v < value - 1e-10 {
                    profile = cand; value = v; improved = true; break 'steps;
                }
            }
        }
        if !improved { println!("stalled at iter {} phi={:.6} f1={:.6} f2={:.6}", it, value, game.regret(0,&profile), game.regret(1,&profile)); break; }
    }
    println!("end phi={:.6} f1={:.6} f2={:.6}", value, game.regret(0,&profile), game.regret(1,&profile));
}

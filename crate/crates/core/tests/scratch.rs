//! temp experiments (deleted before finalizing)
use excitrans::*;
use rayon::prelude::*;

fn rates(samples: usize, seed: u64, window_of: impl Fn(&Structure) -> f64 + Sync) -> String {
    let mut out = String::new();
    for n in [3usize, 4, 5, 6] {
        let eps: Vec<f64> = (0..samples as u64).into_par_iter().map(|k| {
            let mut rng = stream_rng(seed ^ n as u64, k);
            let s = generate_structure(&mut rng, n, k).unwrap();
            efficiency_with_window(&s, window_of(&s)).unwrap().efficiency
        }).collect();
        let max = eps.iter().copied().fold(0.0f64, f64::max);
        let hits = eps.iter().filter(|&&e| e > 0.9).count();
        out += &format!("  n={n}: max={max:.3} hits={hits} rate={:.2e}\n", hits as f64 / samples as f64);
    }
    out
}

#[test]
#[ignore]
fn window_fingerprint() {
    let s3 = 3.0f64.sqrt();
    println!("W=0.6283 (2pi/10):\n{}", rates(400_000, 10, |_| 0.2*std::f64::consts::PI));
    println!("W=1.0883 (2pi/10*sqrt3):\n{}", rates(400_000, 11, |_| 0.2*std::f64::consts::PI*s3));
}

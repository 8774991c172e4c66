//! Generates the bundled example dataset `data/fish.csv`: a 250-row
//! synthetic fishing survey (count, persons, camper) drawn from a hurdle
//! model, plus two outlier groups with implausibly high counts (65 and 149)
//! that analyses are expected to drop via `--drop-response-above 64`.
//!
//!     cargo run -p zinfer-cli --example make_fish_data > data/fish.csv
//!
//! The draw is deterministic; pass a seed argument to get a different
//! realisation.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zinfer::{BaseCount, ZiModel, ZiType};

const N_ROWS: usize = 250;
const DEFAULT_SEED: u64 = 18;

// location side: log lambda = b0 + b1 * persons + b2 * camper
const B0: f64 = -4.4;
const B1: f64 = 0.85;
const B2: f64 = 0.55;
// zero side: constant P(zero) = expit(gamma)
const GAMMA: f64 = 0.0;
const P_CAMPER: f64 = 0.58;

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn main() {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut rows: Vec<(u64, u64, u64)> = Vec::with_capacity(N_ROWS);
    for _ in 0..N_ROWS - 2 {
        let persons = 1 + (unit(&mut rng) * 4.0).floor().min(3.0) as u64;
        let camper = u64::from(unit(&mut rng) < P_CAMPER);
        let theta = B0 + B1 * persons as f64 + B2 * camper as f64;
        let model =
            ZiModel::new(BaseCount::Poisson, ZiType::hurdle(), theta, GAMMA).expect("valid model");
        let y = model.sample_one(&mut rng).expect("sample");
        rows.push((y, persons, camper));
    }
    // two outlier groups, dropped by --drop-response-above 64
    rows.push((65, 4, 1));
    rows.push((149, 4, 1));

    // deterministic shuffle so the outliers are not the last rows
    for i in (1..rows.len()).rev() {
        let j = (unit(&mut rng) * (i + 1) as f64).floor() as usize;
        rows.swap(i, j.min(i));
    }

    println!("count,persons,camper");
    for (y, p, c) in rows {
        println!("{y},{p},{c}");
    }
}

//! Synthetic labeled questionnaires for desk-scale training and testing.
//!
//! Labels are drawn first; each answer is then drawn with a probability that
//! depends on the label, so several fields carry signal and the rest are
//! noise shared by both classes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::record::{AgeBand, SymptomRecord, TriState};

/// P(answer = yes | positive), P(answer = yes | negative) per boolean field,
/// in record order.
const RATES: [(f64, f64); 12] = [
    (0.65, 0.25), // cough
    (0.30, 0.25), // cold
    (0.70, 0.10), // fever
    (0.15, 0.10), // diarrhoea
    (0.45, 0.15), // muscle_pain
    (0.35, 0.05), // breathing_difficulty
    (0.60, 0.03), // loss_of_smell
    (0.35, 0.20), // sore_throat
    (0.60, 0.20), // fatigue
    (0.10, 0.08), // respiratory_illness
    (0.10, 0.10), // diabetes
    (0.15, 0.15), // hypertension
];

pub const DEFAULT_PREVALENCE: f64 = 0.4;

/// `n` labeled records from a seeded generator.
pub fn generate(n: usize, seed: u64) -> Vec<(SymptomRecord, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let positive = rng.random_bool(DEFAULT_PREVALENCE);
            let draws = RATES.map(|(p_pos, p_neg)| rng.random_bool(if positive { p_pos } else { p_neg }));
            let age_band = AgeBand::ALL[rng.random_range(0..AgeBand::ALL.len())];
            let u: f64 = rng.random();
            let contact_with_positive = match (positive, u) {
                (true, u) if u < 0.5 => TriState::Yes,
                (true, u) if u < 0.8 => TriState::Unknown,
                (false, u) if u < 0.05 => TriState::Yes,
                (false, u) if u < 0.35 => TriState::Unknown,
                _ => TriState::No,
            };
            let mut answers = draws.into_iter();
            let mut take = || answers.next().expect("one draw per boolean field");
            let rec = SymptomRecord {
                cough: take(),
                cold: take(),
                fever: take(),
                diarrhoea: take(),
                muscle_pain: take(),
                breathing_difficulty: take(),
                loss_of_smell: take(),
                sore_throat: take(),
                fatigue: take(),
                respiratory_illness: take(),
                diabetes: take(),
                hypertension: take(),
                age_band,
                contact_with_positive,
            };
            (rec, positive)
        })
        .collect()
}

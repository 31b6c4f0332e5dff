//! Seeded synthetic instances for benchmarking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{FrequencyLadder, PowerModel, ProcessorSpec, Watts};

/// Largest budget, in deciwatts, a generated instance asks for.
pub const MAX_BUDGET_DECIWATTS: u64 = 10_000;

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub spec: ProcessorSpec,
    pub budget_watts: Watts,
}

/// `n_cores` identical cores with `turbo_levels` Turbo steps above a
/// 2.0 GHz guaranteed level. Powers are whole deciwatts and the budget
/// lands between the all-`f_0` floor and the all-top ceiling, never above
/// [`MAX_BUDGET_DECIWATTS`].
pub fn random_instance(n_cores: usize, turbo_levels: usize, seed: u64) -> RandomInstance {
    assert!(n_cores >= 1, "at least one core");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bus = 100_000;
    let n = n_cores as u64;

    let floor_dw = rng.gen_range(1..=(MAX_BUDGET_DECIWATTS / 2 / n).clamp(1, 150));
    let mut freqs = vec![1_200_000, 2_000_000];
    let mut dws = vec![floor_dw as f64 / 2.0, floor_dw as f64];
    let mut f = 2_000_000;
    let mut p = floor_dw;
    for _ in 0..turbo_levels {
        f += bus * rng.gen_range(1..=3);
        p += rng.gen_range(1..=floor_dw.max(4));
        freqs.push(f);
        dws.push(p as f64);
    }

    let floor_total = floor_dw * n;
    let ceiling_total = p * n;
    let frac: f64 = rng.gen_range(0.2..0.8);
    let budget_dw = (floor_total + ((ceiling_total - floor_total) as f64 * frac) as u64)
        .min(MAX_BUDGET_DECIWATTS)
        .max(floor_total);

    let spec = ProcessorSpec {
        n_cores,
        pow_max_watts: budget_dw as f64 / 10.0,
        t_crit_c: 100.0,
        ladder: FrequencyLadder::new(&freqs, 1, bus),
        power: PowerModel {
            per_core_watts: dws.iter().map(|d| d / 10.0).collect(),
            ..Default::default()
        },
    };
    RandomInstance {
        spec,
        budget_watts: budget_dw as f64 / 10.0,
    }
}

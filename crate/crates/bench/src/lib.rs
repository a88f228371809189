//! Benchmark inputs shared by the criterion targets.

use xmtc_core::synth::{synthesize, SynthConfig};
use xmtc_core::Dataset;

/// Eight classes and twelve channels like the default generator, but with
/// fewer series so one fit stays in the tens of milliseconds.
pub fn bench_dataset() -> Dataset {
    synthesize(&SynthConfig {
        id: "bench".into(),
        series_per_class: 6,
        seed: 5,
        ..SynthConfig::default()
    })
    .expect("default synth config is valid")
}

/// A smooth noisy channel of length `n`.
pub fn channel(n: usize) -> Vec<f64> {
    (0..n)
        .map(|t| {
            let x = t as f64;
            (x * 0.07).sin() + 0.3 * (x * 0.31).cos() + 0.05 * ((t * 7919) % 101) as f64 / 101.0
        })
        .collect()
}

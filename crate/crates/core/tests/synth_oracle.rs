use xmtc_core::synth::{is_z_channel, synthesize, SynthConfig};
use xmtc_core::Dataset;

fn mean(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}

fn side_of(label: &str) -> &str {
    &label[..1]
}

fn object_of(cfg: &SynthConfig, label: &str) -> usize {
    cfg.objects.iter().position(|o| *o == label[2..]).unwrap()
}

/// Object rule: mean absolute value of the chosen channels over `[from, to)`,
/// split at the pooled quantiles into one bin per object, bins in the order
/// of the object scale factors.
fn object_rule_accuracy(cfg: &SynthConfig, ds: &Dataset, channels: &[usize], from: usize, to: usize) -> f64 {
    let stat: Vec<f64> = ds
        .series
        .iter()
        .map(|s| {
            mean(
                &channels
                    .iter()
                    .map(|&c| mean(&s.values[c][from..to].iter().map(|v| v.abs()).collect::<Vec<_>>()))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let mut sorted = stat.clone();
    sorted.sort_by(f64::total_cmp);
    let o = cfg.objects.len();
    let cuts: Vec<f64> = (1..o).map(|k| sorted[k * sorted.len() / o]).collect();
    let hits = ds
        .series
        .iter()
        .zip(&stat)
        .filter(|(s, &v)| cuts.iter().filter(|&&c| v >= c).count() == object_of(cfg, &s.label))
        .count();
    hits as f64 / ds.series.len() as f64
}

#[test]
fn side_follows_sign_of_z_channels() {
    for seed in 0..3 {
        let cfg = SynthConfig {
            seed,
            ..SynthConfig::default()
        };
        let ds = synthesize(&cfg).unwrap();
        for s in &ds.series {
            let z: Vec<f64> = (0..s.n_channels())
                .filter(|&c| is_z_channel(c))
                .map(|c| mean(&s.values[c][cfg.t_side..cfg.length_min]))
                .collect();
            let predicted = if mean(&z) < 0.0 { "r" } else { "l" };
            assert_eq!(predicted, side_of(&s.label), "series {}", s.id);
        }
    }
}

#[test]
fn object_hidden_before_divergence_step() {
    let cfg = SynthConfig::default();
    let ds = synthesize(&cfg).unwrap();
    let chance = 1.0 / cfg.objects.len() as f64;
    let xy: Vec<usize> = (0..cfg.n_channels).filter(|&c| !is_z_channel(c)).collect();
    let mut best: f64 = 0.0;
    for prefix in [10, 20, 50, 100, cfg.t_obj - 1] {
        best = best.max(object_rule_accuracy(&cfg, &ds, &xy, 0, prefix));
        for &c in &xy {
            best = best.max(object_rule_accuracy(&cfg, &ds, &[c], 0, prefix));
        }
    }
    assert!(best <= chance + 0.1, "best rule accuracy before divergence {best}");
    // the same rule family does see the object once it diverges
    let after = object_rule_accuracy(&cfg, &ds, &xy, cfg.t_obj, cfg.length_min);
    assert!(after >= 0.9, "rule accuracy after divergence {after}");
}

#[test]
fn noiseless_series_differ_only_by_their_draws() {
    let cfg = SynthConfig {
        noise_std: 0.0,
        length_std: 0.0,
        series_per_class: 2,
        ..SynthConfig::default()
    };
    let ds = synthesize(&cfg).unwrap();
    let a = &ds.series[0];
    let b = &ds.series[1];
    assert_eq!(a.label, b.label);
    assert_eq!(a.len(), b.len());
    assert_ne!(a.values, b.values);
    assert_eq!(synthesize(&cfg).unwrap(), ds);
}

#[test]
fn lengths_bounded_and_classes_balanced() {
    for seed in 0..4 {
        let cfg = SynthConfig {
            seed,
            length_std: 80.0,
            ..SynthConfig::default()
        };
        let ds = synthesize(&cfg).unwrap();
        assert!(ds
            .series
            .iter()
            .all(|s| (cfg.length_min..=cfg.length_max).contains(&s.len())));
        assert_eq!(ds.class_counts(None), vec![cfg.series_per_class; 8]);
        let mut sorted = ds.classes.clone();
        sorted.sort();
        assert_eq!(ds.classes, sorted);
    }
}

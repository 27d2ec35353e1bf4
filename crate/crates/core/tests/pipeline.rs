//! The whole pipeline through the public API on a small two-class prior.

use diffattack_core::attack::{run_attack, AttackConfig, Estimator};
use diffattack_core::chain::{denoise_chain, invert};
use diffattack_core::classifier::{accuracy, train_classifier, ClassifierKind};
use diffattack_core::container::{decode_classifier, decode_stack, encode_classifier, encode_stack};
use diffattack_core::data::{decode_pnm, encode_pnm, synth_dataset, ClassSpec, SynthSpec};
use diffattack_core::denoiser::Condition;
use diffattack_core::metrics::attack_success_rate;
use diffattack_core::schedule::ScheduleConfig;
use diffattack_core::Error;

fn spec() -> SynthSpec {
    let class = |name: &str, t: [&str; 2]| ClassSpec {
        name: name.into(),
        templates: t.iter().map(|s| s.to_string()).collect(),
        std: 0.15,
        prior: 0.5,
    };
    SynthSpec {
        height: 6,
        width: 6,
        channels: 1,
        samples_per_class: 30,
        low: 0.2,
        high: 0.8,
        classes: vec![
            class("h", ["horizontal-stripes", "top-half"]),
            class("v", ["vertical-stripes", "left-half"]),
        ],
    }
}

#[test]
fn invert_store_replay_attack() {
    let schedule = ScheduleConfig::new(8, 1e-3, 0.2).build().unwrap();
    let (train, model) = synth_dataset(&spec(), 1).unwrap();
    let (test, _) = synth_dataset(&spec(), 2).unwrap();
    let clf = train_classifier(&train, ClassifierKind::SoftmaxLinear, 200, 0.5, 3).unwrap();
    assert!(accuracy(&clf, &test).unwrap() > 0.95);

    // The classifier survives its container.
    let clf = decode_classifier(&encode_classifier(&clf)).unwrap();

    let x = &test.samples()[0];
    let y = test.labels()[0];
    let cond = Condition::class(y, 0.3);
    let stack = invert(x, &cond, &model, &schedule, 9).unwrap();
    let stored = decode_stack(&encode_stack(&stack)).unwrap();
    assert_eq!(stored, stack);
    let replay = denoise_chain(&stored, &model, None, &schedule).unwrap();
    assert!(replay.max_abs_diff(x).unwrap() < 1e-10);

    // A stack is tied to the schedule it was extracted with.
    let other = ScheduleConfig::new(8, 1e-3, 0.3).build().unwrap();
    assert!(matches!(denoise_chain(&stored, &model, None, &other), Err(Error::StackMismatch { .. })));

    let mut results = Vec::new();
    let mut clean = Vec::new();
    let mut labels = Vec::new();
    for i in 0..10 {
        let (x, y) = (&test.samples()[i], test.labels()[i]);
        let cfg = AttackConfig {
            iterations: 8,
            step_size: 0.15,
            budget: 0.6,
            rgf_queries: 16,
            estimator: Estimator::Rgf,
            rng_seed: i as u64,
            ..AttackConfig::default()
        };
        let r = run_attack(x, y, &model, &clf, &schedule, &Condition::class(y, 0.3), &cfg).unwrap();
        assert!(r.delta.norm_linf() <= 0.6);
        assert!(r.adversarial.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        // Adversarial images survive 8-bit export within half a grey level.
        let back = decode_pnm(&encode_pnm(&r.adversarial).unwrap()).unwrap();
        assert!(back.max_abs_diff(&r.adversarial).unwrap() <= 0.5 / 255.0 + 1e-12);
        clean.push(r.clean_pred);
        labels.push(y);
        results.push(r);
    }
    let (asr, clean_error) = attack_success_rate(&results, &clean, &labels).unwrap();
    assert_eq!(clean_error, 0.0);
    assert!(asr >= 0.5, "asr {asr}");
}

use pdd::data::gen_synthetic_splits;
use pdd::policy::{
    srd_effective_epochs_closed_form, DecayKind, Difficulty, DropoutPolicy, ScheduleRecord,
    SrdGranularity, Variant,
};
use pdd::trainer::{dry_run_schedule, run_training, RunConfig, RunMetrics};
use proptest::prelude::*;

fn small() -> (pdd::data::Dataset, pdd::data::Dataset) {
    gen_synthetic_splits(4, 75, 20, 8, 0.2, 12).unwrap()
}

fn check_accounting(m: &RunMetrics) {
    let per_sample: u64 = m.per_sample.iter().sum();
    let retained: u64 = m.retained().iter().map(|&r| r as u64).sum();
    let steps: u64 = m.steps.iter().map(|s| s.selected as u64).sum();
    assert_eq!(per_sample, m.backprop_total);
    assert_eq!(retained, m.backprop_total);
    assert_eq!(steps, m.backprop_total);
    assert_eq!(m.effective_epochs, m.backprop_total as f64 / m.n as f64);
    assert_eq!(m.epochs.last().unwrap().backprop_cum, m.backprop_total);
}

#[test]
fn accounting_identities_hold_for_every_variant() {
    let (train, test) = small();
    let n = train.len();
    let variants = vec![
        Variant::Baseline,
        Variant::Dbpd {
            criterion: Difficulty::Confidence { tau: 0.8 },
        },
        Variant::Dbpd {
            criterion: Difficulty::Loss { threshold: 0.5 },
        },
        Variant::SmrdInline {
            criterion: Difficulty::Confidence { tau: 0.8 },
        },
        Variant::Srd {
            gamma: 0.7,
            granularity: SrdGranularity::Epoch,
        },
        Variant::Srd {
            gamma: 0.7,
            granularity: SrdGranularity::Batch,
        },
        Variant::SmrdReplay {
            schedule: ScheduleRecord::new(n, vec![n, 200, 90, 10, n]).unwrap(),
        },
        Variant::Analytic {
            decay: DecayKind::Exponential,
            alpha: 1.0,
        },
    ];
    for variant in variants {
        let revision = if matches!(variant, Variant::Baseline) {
            0
        } else {
            1
        };
        let policy = DropoutPolicy::new(variant, 5, revision).unwrap();
        let mut cfg = RunConfig::new(policy, 3);
        cfg.hidden = vec![16];
        let run = run_training(&train, &test, &cfg).unwrap();
        check_accounting(&run.metrics);
    }
}

#[test]
fn dry_runs_count_what_training_backpropagates() {
    let (train, test) = small();
    let n = train.len();
    let variants = vec![
        Variant::Srd {
            gamma: 0.8,
            granularity: SrdGranularity::Epoch,
        },
        Variant::Srd {
            gamma: 0.8,
            granularity: SrdGranularity::Batch,
        },
        Variant::SmrdReplay {
            schedule: ScheduleRecord::new(n, vec![n, 151, 77, 3, n, n]).unwrap(),
        },
        Variant::Analytic {
            decay: DecayKind::SigmoidComplement,
            alpha: 0.5,
        },
    ];
    for variant in variants {
        let policy = DropoutPolicy::new(variant, 6, 2).unwrap();
        let (record, ee) = dry_run_schedule(&policy, n, 32).unwrap();
        let mut cfg = RunConfig::new(policy, 8);
        cfg.hidden = vec![8];
        let run = run_training(&train, &test, &cfg).unwrap();
        assert_eq!(run.metrics.retained(), record.retained());
        assert_eq!(run.metrics.effective_epochs, ee);
    }
}

#[test]
fn misclassification_mode_drops_most_of_a_separable_set() {
    let (train, test) = gen_synthetic_splits(3, 100, 30, 6, 0.05, 4).unwrap();
    let policy = DropoutPolicy::new(
        Variant::Dbpd {
            criterion: Difficulty::Confidence { tau: 0.0 },
        },
        6,
        1,
    )
    .unwrap();
    let mut cfg = RunConfig::new(policy, 1);
    cfg.optimizer.lr = 1e-2;
    let run = run_training(&train, &test, &cfg).unwrap();
    let retained = run.metrics.retained();
    assert!(retained[4] < train.len() / 10, "{retained:?}");
    assert_eq!(retained[5], train.len());
    assert!(run.metrics.final_accuracy() > 0.95);
}

#[test]
fn epoch_granularity_matches_the_closed_form_within_one_sample_per_epoch() {
    for &(gamma, epochs, revision) in &[(0.95, 30, 1), (0.9, 12, 0), (0.5, 8, 2), (0.98, 200, 1)] {
        let n = 10_000;
        let policy = DropoutPolicy::new(
            Variant::Srd {
                gamma,
                granularity: SrdGranularity::Epoch,
            },
            epochs,
            revision,
        )
        .unwrap();
        let (_, ee) = dry_run_schedule(&policy, n, 32).unwrap();
        let exact = srd_effective_epochs_closed_form(gamma, epochs, revision);
        assert!(ee <= exact + 1e-12);
        assert!(exact - ee < epochs as f64 / n as f64);
    }
}

#[test]
fn batch_granularity_never_exceeds_epoch_granularity() {
    for &gamma in &[0.3, 0.77, 0.95] {
        let counts = |granularity| {
            let policy = DropoutPolicy::new(Variant::Srd { gamma, granularity }, 10, 1).unwrap();
            dry_run_schedule(&policy, 1000, 32).unwrap().0.retained()
        };
        let batch = counts(SrdGranularity::Batch);
        let epoch = counts(SrdGranularity::Epoch);
        assert!(
            batch.iter().zip(&epoch).all(|(b, e)| b <= e),
            "{batch:?} vs {epoch:?}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn analytic_schedules_start_and_end_full_and_never_grow(
        kind in prop::sample::select(DecayKind::ALL.to_vec()),
        alpha in 0.1f64..4.0,
        epochs in 2usize..60,
        revision in 1usize..3,
        n in 1usize..20_000,
    ) {
        prop_assume!(revision < epochs);
        let policy = DropoutPolicy::new(Variant::Analytic { decay: kind, alpha }, epochs, revision).unwrap();
        let retained = dry_run_schedule(&policy, n, 32).unwrap().0.retained();
        prop_assert_eq!(retained[0], n);
        prop_assert_eq!(*retained.last().unwrap(), n);
        let body = &retained[..epochs - revision];
        prop_assert!(body.windows(2).all(|w| w[1] <= w[0]), "{:?}", body);
    }
}

use veritas_core::calibration::{
    build_test_set, success_criterion_check, SelectionCriterion, SelectionMode, Verdict,
};
use veritas_core::forecasters::{forecast_outcomes, run_forecaster, ForecasterSpec};
use veritas_core::processes::{oracle_selection, simulate, ProcessKind, ProcessSpec, Schedule};
use veritas_core::RngState;

fn regime(horizon: usize) -> ProcessSpec {
    ProcessSpec::new(
        ProcessKind::RegimeSwitch {
            alpha: 0.2,
            beta: 0.8,
            schedule: Schedule::Alternating,
        },
        horizon,
    )
    .unwrap()
}

#[test]
fn oracle_learns_what_the_outcome_only_forecaster_cannot() {
    let path = simulate(&regime(20_000), RngState::from_seed(3)).unwrap();
    let oracle = run_forecaster(&ForecasterSpec::TruthOracle, &path).unwrap();
    let empirical = run_forecaster(
        &ForecasterSpec::EmpiricalFrequency {
            prior_forecast: 0.5,
        },
        &path,
    )
    .unwrap();
    let learned = success_criterion_check(&oracle, 0.2, 0.05, 500, 0.05).unwrap();
    let not_learned = success_criterion_check(&empirical, 0.2, 0.05, 500, 0.05).unwrap();
    assert_eq!(learned.verdict, Verdict::Learned);
    assert_eq!(not_learned.verdict, Verdict::NotLearned);
    assert!(not_learned.notes.contains("self-assurance"));
}

#[test]
fn forecasts_depend_only_on_outcomes() {
    // Two processes with different truths but, by construction, the same outcomes.
    let a = simulate(&regime(2_000), RngState::from_seed(5)).unwrap();
    let mut b = a.clone();
    for s in &mut b.steps {
        s.truth = 0.5;
    }
    let spec = ForecasterSpec::EmpiricalFrequency {
        prior_forecast: 0.5,
    };
    let fa: Vec<f64> = run_forecaster(&spec, &a)
        .unwrap()
        .iter()
        .map(|r| r.forecast)
        .collect();
    let fb: Vec<f64> = run_forecaster(&spec, &b)
        .unwrap()
        .iter()
        .map(|r| r.forecast)
        .collect();
    assert_eq!(fa, fb);
    assert_eq!(fa, forecast_outcomes(&spec, &a.outcomes()).unwrap());
}

#[test]
fn oracle_mask_and_truth_matching_select_the_same_steps() {
    let path = simulate(&regime(10_000), RngState::from_seed(9)).unwrap();
    let records = run_forecaster(&ForecasterSpec::Constant { alpha: 0.2 }, &path).unwrap();
    let mask = build_test_set(
        &records,
        &SelectionCriterion {
            target_alpha: 0.2,
            tolerance: 0.0,
            mode: SelectionMode::OracleMask(oracle_selection(&path, 0.2)),
        },
    )
    .unwrap();
    let both = build_test_set(
        &records,
        &SelectionCriterion {
            target_alpha: 0.2,
            tolerance: 0.0,
            mode: SelectionMode::MatchForecastAndTruth,
        },
    )
    .unwrap();
    assert_eq!(mask.indices, both.indices);
    assert!(mask.indices.iter().all(|i| i % 2 == 0));
    assert!((mask.final_p_k() - 0.2).abs() < 0.02);
}

#[test]
fn broken_clock_reader_is_right_only_before_the_switch() {
    for horizon in [1_000, 10_000, 100_000] {
        let spec = ProcessSpec::new(
            ProcessKind::BrokenClock {
                pre: 0.5,
                n: 100,
                post: 0.9,
            },
            horizon,
        )
        .unwrap();
        let path = simulate(&spec, RngState::from_seed(1)).unwrap();
        let records =
            run_forecaster(&ForecasterSpec::BrokenClockReader { alpha: 0.5 }, &path).unwrap();
        let correct = records
            .iter()
            .filter(|r| (r.forecast - r.truth).abs() <= 0.05)
            .count();
        assert_eq!(correct, 100);
        let v = success_criterion_check(&records, 0.5, 0.05, 200, 0.05).unwrap();
        assert_eq!(v.verdict, Verdict::NotLearned, "horizon {horizon}");
    }
}

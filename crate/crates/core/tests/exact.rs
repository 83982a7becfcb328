use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use veritas_core::equivalence::{observational_equivalence_report, radon_nikodym, DiscreteMeasure};
use veritas_core::ngram::{ingest, IngestConfig, Prob, TOY_CORPUS};
use veritas_core::{ExactMeasure, Measure32};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn change_of_measure_in_exact_rationals() {
    let support: Vec<BigRational> = (0..5).map(|i| q(i, 4)).collect();
    let mu: ExactMeasure = DiscreteMeasure::new(
        support.clone(),
        vec![q(1, 1), q(2, 1), q(3, 1), q(2, 1), q(1, 1)],
    )
    .unwrap();
    let nu: ExactMeasure =
        DiscreteMeasure::new(support, vec![q(0, 1), q(1, 1), q(1, 1), q(5, 1), q(1, 1)]).unwrap();
    let h = radon_nikodym(&nu, &mu).unwrap();
    assert_eq!(h.ratio[0], q(0, 1));
    assert_eq!(h.ratio[3], q(5 * 9, 8 * 2));
    let gain = |x: &BigRational, w: &BigRational| {
        let d = x - w;
        -(d.clone() * d)
    };
    let report = observational_equivalence_report(gain, &mu, &nu, &[0, 1, 2, 3, 4]).unwrap();
    assert!(report.objective_gap.is_zero());
    assert!(report.same_argmax);
    assert_eq!(report.argmax_nu.index, 3);
}

#[test]
fn single_precision_measures() {
    let mu: Measure32 = DiscreteMeasure::uniform(vec![0.0f32, 1.0, 2.0]).unwrap();
    let nu: Measure32 = DiscreteMeasure::new(vec![0.0, 1.0, 2.0], vec![0.2, 0.3, 0.5]).unwrap();
    let report = observational_equivalence_report(
        |x: &f32, w: &f32| if x == w { 1.0 } else { 0.0 },
        &mu,
        &nu,
        &[0, 1, 2],
    )
    .unwrap();
    assert!(report.same_argmax);
    assert_eq!(report.argmax_mu.index, 2);
    assert!(report.objective_gap < 1e-6);
}

#[test]
fn every_toy_sentence_telescopes() {
    let longest = TOY_CORPUS
        .lines()
        .map(|l| l.split_whitespace().count())
        .max()
        .unwrap();
    let cfg = IngestConfig {
        n_max: longest,
        ..IngestConfig::default()
    };
    let (corpus, table) = ingest(TOY_CORPUS.as_bytes(), &cfg).unwrap();
    assert_eq!(table.base_count(), corpus.total_token_count);
    for s in &corpus.sentences {
        let p = table.sentence_prob(s).unwrap();
        assert_eq!(p, Prob::new(table.count(s), table.base_count()), "{s:?}");
        assert!(p > Prob::zero());
    }
}

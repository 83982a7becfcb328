//! One runner per experiment. Each writes its data files and returns the
//! verdicts, statistics and performance trace for the report.

use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;

use serde_json::{json, Map, Value};
use veritas_core::calibration::{
    build_test_set, calibration_verdict, success_criterion_check, SelectionCriterion,
    SelectionMode, TestSet,
};
use veritas_core::equivalence::{
    evaluate_distance, grad_check, kl_divergence, likelihood_indistinguishability, mle_fit,
    observational_equivalence_report, DiscreteMeasure, DistanceKind, DistanceOutcome, DistanceSpec,
    FitOptions, ParametricModel, Sample,
};
use veritas_core::forecasters::{run_forecaster, write_records_csv, ForecastRecord};
use veritas_core::ngram::{self, IngestConfig, Prob};
use veritas_core::prob::{empirical_distribution, Population, RngState};
use veritas_core::processes::{oracle_selection, simulate, Path, ProcessKind, ProcessSpec};

use crate::config::{Experiment, ExperimentConfig};
use crate::report::{checkpoints, OutputDir, PerformanceTrace};
use crate::RunError;

pub struct Outcome {
    pub verdicts: Map<String, Value>,
    pub statistics: Map<String, Value>,
    pub performance_trace: PerformanceTrace,
}

fn core<E: Display>(e: E) -> RunError {
    RunError::Model(e.to_string())
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("json! object literal"),
    }
}

fn verdict_str<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("verdicts serialize")
}

/// `config` must already be resolved and validated.
pub fn dispatch(config: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    match config.experiment {
        Experiment::Thm3Calibration => thm3_calibration(config, out),
        Experiment::Thm45BrokenClock => thm4_5_broken_clock(config, out),
        Experiment::Thm6Regime => thm6_regime(config, out),
        Experiment::Thm7Equivalence => thm7_equivalence(config, out),
        Experiment::Thm8Mle => thm8_mle(config, out),
        Experiment::Thm9Ngram => thm9_ngram(config, out),
        Experiment::Thm10Rstar => thm10_rstar(config, out),
    }
}

struct Run {
    path: Path,
    records: Vec<ForecastRecord>,
    target: f64,
    tolerance: f64,
    epsilon: f64,
    window_fraction: f64,
    burn_in: usize,
    delta: f64,
}

fn seed(c: &ExperimentConfig) -> u64 {
    c.seed.expect("validated config has a seed")
}

/// Simulates the configured process, runs the forecaster, and writes
/// `path.csv` and `records.csv`.
fn simulate_and_forecast(c: &ExperimentConfig, out: &mut OutputDir) -> Result<Run, RunError> {
    let kind = c.process.expect("resolved");
    let spec = ProcessSpec::new(kind, c.horizon.expect("resolved")).map_err(core)?;
    let path = simulate(&spec, RngState::from_seed(seed(c))).map_err(core)?;
    let records = run_forecaster(&c.forecaster.expect("resolved"), &path).map_err(core)?;
    out.write("path.csv", |w| Ok(path.write_csv(w)?))?;
    out.write("records.csv", |w| Ok(write_records_csv(&records, w)?))?;
    let k = c.criterion.expect("resolved");
    Ok(Run {
        path,
        records,
        target: k.target_alpha.expect("resolved"),
        tolerance: k.tolerance.expect("resolved"),
        epsilon: k.epsilon.expect("resolved"),
        window_fraction: k.window_fraction.expect("resolved"),
        burn_in: k.burn_in.expect("resolved"),
        delta: k.delta.expect("resolved"),
    })
}

fn write_p_k(ts: &TestSet, out: &mut OutputDir) -> Result<(), RunError> {
    out.write("p_k.csv", |w| Ok(ts.write_csv(w)?))?;
    out.write_trace(
        "trace.dat",
        ("k", "p_k"),
        ts.p_k_trace
            .iter()
            .enumerate()
            .map(|(i, f)| ((i + 1) as f64, f.value())),
    )?;
    Ok(())
}

fn deviation_trace(ts: &TestSet, target: f64) -> PerformanceTrace {
    PerformanceTrace {
        metric: "abs(p_k - target)".into(),
        experience: "selected steps k".into(),
        points: checkpoints(ts.len())
            .into_iter()
            .map(|k| (k as u64, (ts.p_k_trace[k - 1].value() - target).abs()))
            .collect(),
    }
}

fn unconditional(path: &Path) -> Result<f64, RunError> {
    Ok(
        empirical_distribution(&Population::new(path.outcomes(), "y = 1"))
            .map_err(core)?
            .value(),
    )
}

fn thm3_calibration(c: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    let r = simulate_and_forecast(c, out)?;
    let ts = build_test_set(
        &r.records,
        &SelectionCriterion::match_forecast(r.target, r.tolerance),
    )
    .map_err(core)?;
    let verdict = calibration_verdict(&ts, r.target, r.epsilon, r.window_fraction).map_err(core)?;
    write_p_k(&ts, out)?;
    Ok(Outcome {
        verdicts: obj(json!({ "calibration": verdict_str(&verdict) })),
        statistics: obj(json!({
            "test_set_size": ts.len(),
            "p_k_final": ts.final_p_k(),
            "abs_deviation": (ts.final_p_k() - r.target).abs(),
            "target_alpha": r.target,
            "unconditional_frequency": unconditional(&r.path)?,
        })),
        performance_trace: deviation_trace(&ts, r.target),
    })
}

fn thm4_5_broken_clock(c: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    let r = simulate_and_forecast(c, out)?;
    let lv = success_criterion_check(&r.records, r.target, r.epsilon, r.burn_in, r.delta)
        .map_err(core)?;
    let ts = build_test_set(
        &r.records,
        &SelectionCriterion::match_forecast(r.target, r.tolerance),
    )
    .map_err(core)?;
    write_p_k(&ts, out)?;
    let correct: Vec<usize> = r
        .records
        .iter()
        .filter(|x| (x.forecast - x.truth).abs() <= r.epsilon)
        .map(|x| x.t)
        .collect();
    let mut errors = 0usize;
    let cumulative: Vec<f64> = r
        .records
        .iter()
        .enumerate()
        .map(|(i, x)| {
            errors += usize::from((x.forecast - x.truth).abs() > r.epsilon);
            errors as f64 / (i + 1) as f64
        })
        .collect();
    let calibration =
        calibration_verdict(&ts, r.target, r.epsilon, r.window_fraction).map_err(core)?;
    Ok(Outcome {
        verdicts: obj(json!({
            "success_criterion": verdict_str(&lv.verdict),
            "calibration_to_forecast": verdict_str(&calibration),
        })),
        statistics: obj(json!({
            "learnability": lv,
            "p_k_final": ts.final_p_k(),
            "correct_steps": correct.len(),
            "last_correct_step": correct.last(),
            "horizon": r.records.len(),
        })),
        performance_trace: PerformanceTrace {
            metric: "cumulative error rate".into(),
            experience: "steps t".into(),
            points: checkpoints(cumulative.len())
                .into_iter()
                .map(|t| (t as u64, cumulative[t - 1]))
                .collect(),
        },
    })
}

fn thm6_regime(c: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    let r = simulate_and_forecast(c, out)?;
    let (alpha, beta) = match c.process.expect("resolved") {
        ProcessKind::RegimeSwitch { alpha, beta, .. } => (alpha, beta),
        other => {
            return Err(RunError::Model(format!(
                "thm6_regime needs a regime_switch process, got {other:?}"
            )))
        }
    };
    let masked = |target: f64| {
        build_test_set(
            &r.records,
            &SelectionCriterion {
                target_alpha: target,
                tolerance: 0.0,
                mode: SelectionMode::OracleMask(oracle_selection(&r.path, target)),
            },
        )
        .map_err(core)
    };
    let ts_alpha = masked(alpha)?;
    let ts_beta = masked(beta)?;
    write_p_k(&ts_alpha, out)?;
    let lv = success_criterion_check(&r.records, r.target, r.epsilon, r.burn_in, r.delta)
        .map_err(core)?;
    let masked_verdict =
        calibration_verdict(&ts_alpha, alpha, r.epsilon, r.window_fraction).map_err(core)?;
    let mut abs_err = 0.0;
    let running: Vec<f64> = r
        .records
        .iter()
        .enumerate()
        .map(|(i, x)| {
            abs_err += (x.forecast - x.truth).abs();
            abs_err / (i + 1) as f64
        })
        .collect();
    Ok(Outcome {
        verdicts: obj(json!({
            "forecaster_success_criterion": verdict_str(&lv.verdict),
            "oracle_masked_calibration": verdict_str(&masked_verdict),
        })),
        statistics: obj(json!({
            "unconditional_frequency": unconditional(&r.path)?,
            "oracle_masked_alpha_frequency": ts_alpha.final_p_k(),
            "oracle_masked_beta_frequency": ts_beta.final_p_k(),
            "alpha_steps": ts_alpha.len(),
            "beta_steps": ts_beta.len(),
            "final_forecast": r.records.last().map(|x| x.forecast),
            "learnability": lv,
        })),
        performance_trace: PerformanceTrace {
            metric: "mean abs(forecast - truth)".into(),
            experience: "steps t".into(),
            points: checkpoints(running.len())
                .into_iter()
                .map(|t| (t as u64, running[t - 1]))
                .collect(),
        },
    })
}

/// A random gain table, pair of measures with `nu << mu`, and feasible set.
pub struct EquivalenceInstance {
    pub gains: Vec<Vec<f64>>,
    pub mu: DiscreteMeasure<f64>,
    pub nu: DiscreteMeasure<f64>,
    pub feasible: Vec<usize>,
}

pub fn random_equivalence_instance(rng: &mut RngState, max_support: usize) -> EquivalenceInstance {
    let m = 1 + rng.below(max_support as u64) as usize;
    let support: Vec<f64> = (0..m).map(|i| i as f64).collect();
    let mu_w: Vec<f64> = (0..m).map(|_| rng.uniform(0.05, 1.0)).collect();
    let mut nu_w: Vec<f64> = (0..m)
        .map(|_| {
            if rng.below(4) == 0 {
                0.0
            } else {
                rng.uniform(0.0, 1.0)
            }
        })
        .collect();
    if nu_w.iter().all(|&w| w == 0.0) {
        nu_w[rng.below(m as u64) as usize] = 1.0;
    }
    let gains = (0..m)
        .map(|_| (0..m).map(|_| rng.uniform(-1.0, 1.0)).collect())
        .collect();
    let mut feasible: Vec<usize> = (0..m).filter(|_| rng.below(2) == 1).collect();
    if feasible.is_empty() {
        feasible.push(rng.below(m as u64) as usize);
    }
    EquivalenceInstance {
        gains,
        mu: DiscreteMeasure::new(support.clone(), mu_w).expect("positive weights"),
        nu: DiscreteMeasure::new(support, nu_w).expect("non-negative weights, one positive"),
        feasible,
    }
}

fn thm7_equivalence(c: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    let n = c.samples.expect("resolved");
    let max_support = c.equivalence.and_then(|e| e.max_support).expect("resolved");
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let inst =
            random_equivalence_instance(&mut RngState::derive(seed(c), i as u64), max_support);
        let gain = |x: &f64, w: &f64| inst.gains[*x as usize][*w as usize];
        let rep = observational_equivalence_report(gain, &inst.mu, &inst.nu, &inst.feasible)
            .map_err(core)?;
        let kl = kl_divergence(&inst.nu, &inst.mu).map_err(core)?;
        rows.push((inst.mu.len(), kl, rep));
    }
    out.write("instances.csv", |w| {
        writeln!(
            w,
            "instance,support,kl,objective_gap,argmax_nu,argmax_mu,value_nu,value_mu,same_argmax"
        )?;
        for (i, (m, kl, rep)) in rows.iter().enumerate() {
            writeln!(
                w,
                "{i},{m},{kl},{},{},{},{},{},{}",
                rep.objective_gap,
                rep.argmax_nu.index,
                rep.argmax_mu.index,
                rep.argmax_nu.value,
                rep.argmax_mu.value,
                rep.same_argmax
            )?;
        }
        Ok(())
    })?;
    out.write_trace(
        "trace.dat",
        ("instance", "objective_gap"),
        rows.iter()
            .enumerate()
            .map(|(i, (_, _, r))| (i as f64, r.objective_gap)),
    )?;
    let max_gap = rows
        .iter()
        .map(|(_, _, r)| r.objective_gap)
        .fold(0.0, f64::max);
    let mismatches = rows.iter().filter(|(_, _, r)| !r.same_argmax).count();
    let kl_mean = rows.iter().map(|(_, kl, _)| kl).sum::<f64>() / n as f64;
    Ok(Outcome {
        verdicts: obj(json!({
            "same_argmax_everywhere": mismatches == 0,
            "objective_gap_within_1e-12": max_gap <= 1e-12,
        })),
        statistics: obj(json!({
            "instances": n,
            "objective_gap": max_gap,
            "argmax_mismatches": mismatches,
            "kl": kl_mean,
        })),
        performance_trace: PerformanceTrace {
            metric: "abs(best value under (f, nu) - best value under (f h, mu))".into(),
            experience: "instances".into(),
            points: checkpoints(n)
                .into_iter()
                .map(|k| {
                    (
                        k as u64,
                        (rows[k - 1].2.argmax_nu.value - rows[k - 1].2.argmax_mu.value).abs(),
                    )
                })
                .collect(),
        },
    })
}

/// The model shapes shipped with the MLE experiment.
pub fn shipped_shapes() -> Vec<ParametricModel> {
    vec![
        ParametricModel::logistic(1),
        ParametricModel {
            input_dim: 1,
            hidden: vec![4],
        },
        ParametricModel {
            input_dim: 1,
            hidden: vec![4, 3],
        },
    ]
}

/// Draws `x ~ U(range)` then `y ~ Bernoulli(sigmoid(w x + b))`, in that order.
pub fn logistic_samples(theta: [f64; 2], range: [f64; 2], n: usize, seed: u64) -> Vec<Sample<f64>> {
    let truth = ParametricModel::logistic(1);
    let mut rng = RngState::from_seed(seed);
    (0..n)
        .map(|_| {
            let x = rng.uniform(range[0], range[1]);
            let p = truth.predict(&theta, &[x]);
            Sample {
                x: vec![x],
                y: rng.next_f64() < p,
            }
        })
        .collect()
}

fn thm8_mle(c: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    let m = c.mle.clone().expect("resolved");
    let theta = m.theta.expect("resolved");
    let data = logistic_samples(
        theta,
        m.x_range.expect("resolved"),
        c.samples.expect("resolved"),
        seed(c),
    );
    let opts = FitOptions {
        step_size: m.step_size.expect("resolved"),
        iterations: m.iterations.expect("resolved"),
        init_seed: seed(c),
        ..FitOptions::default()
    };
    let fit = mle_fit(&ParametricModel::logistic(1), &data, &opts).map_err(core)?;
    let monotone = fit
        .trace
        .windows(2)
        .all(|w| w[1] >= w[0] - veritas_core::equivalence::ASCENT_TOLERANCE);
    let mut grad = Map::new();
    for (k, shape) in shipped_shapes().into_iter().enumerate() {
        let params: Vec<f64> = shape.init_params(RngState::derive(seed(c), k as u64), 1.0);
        let err = grad_check(&shape, &params, &data, 1e-5).map_err(core)?;
        grad.insert(format!("{:?}", shape.hidden), json!(err));
    }
    let max_grad = grad.values().filter_map(Value::as_f64).fold(0.0, f64::max);
    out.write("data.csv", |w| {
        writeln!(w, "x,y")?;
        for s in &data {
            writeln!(w, "{},{}", s.x[0], u8::from(s.y))?;
        }
        Ok(())
    })?;
    out.write_trace(
        "trace.dat",
        ("iteration", "log_likelihood"),
        fit.trace.iter().enumerate().map(|(i, &ll)| (i as f64, ll)),
    )?;
    let errors = [
        (fit.params[0] - theta[0]).abs(),
        (fit.params[1] - theta[1]).abs(),
    ];
    Ok(Outcome {
        verdicts: obj(json!({
            "log_likelihood_non_decreasing": monotone,
            "grad_check_within_1e-4": max_grad <= 1e-4,
        })),
        statistics: obj(json!({
            "theta_true": theta,
            "theta_hat": fit.params,
            "abs_error": errors,
            "final_log_likelihood": fit.trace.last(),
            "accepted_steps": fit.trace.len() - 1,
            "halvings": fit.halvings,
            "stalled": fit.stalled,
            "clamped": fit.clamped,
            "gradcheck_max_err": grad,
        })),
        performance_trace: PerformanceTrace {
            metric: "log-likelihood".into(),
            experience: "gradient steps".into(),
            points: checkpoints(fit.trace.len())
                .into_iter()
                .map(|k| (k as u64 - 1, fit.trace[k - 1]))
                .collect(),
        },
    })
}

fn ratio_str(r: &Prob) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn ratio_f64(r: &Prob) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn thm9_ngram(c: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    let nc = c.ngram.clone().expect("resolved");
    let raw = match &nc.corpus {
        Some(p) => std::fs::read(p).map_err(|e| RunError::Io(PathBuf::from(p), e))?,
        None => ngram::TOY_CORPUS.as_bytes().to_vec(),
    };
    let cfg = IngestConfig {
        n_max: nc.n_max.expect("resolved"),
        ..IngestConfig::default()
    };
    let (corpus, table) = ngram::ingest(&raw, &cfg).map_err(core)?;
    let text = std::str::from_utf8(&raw).expect("ingest checked the encoding");

    let mut telescoping_failures = 0usize;
    for (seq, count) in table.entries() {
        let chain = table.sentence_prob(seq).map_err(core)?;
        telescoping_failures += usize::from(chain != Prob::new(count, table.base_count()));
    }
    let mut normalization_failures = 0usize;
    let mut contexts = 1usize;
    let empty_mass: Prob = table
        .extensions(&[])
        .map(|(_, n)| Prob::new(n, table.base_count()))
        .sum();
    normalization_failures += usize::from(empty_mass != Prob::from_integer(1));
    for (ctx, count) in table.entries().filter(|(k, _)| k.len() < table.n_max()) {
        contexts += 1;
        let mut mass = Prob::new(corpus.boundary_terminal_count(ctx), count);
        for (w, _) in table.extensions(ctx) {
            mass += table.conditional_prob(w, ctx).map_err(core)?;
        }
        normalization_failures += usize::from(mass != Prob::from_integer(1));
    }

    let mut rng = RngState::from_seed(seed(c));
    let mut queries: Vec<Vec<String>> = Vec::new();
    if let Some(s) = &nc.sentence {
        queries.push(ngram::parse_tokens(s));
    }
    for _ in 0..c.samples.expect("resolved") {
        let s = &corpus.sentences[rng.below(corpus.sentences.len() as u64) as usize];
        let start = rng.below(s.len() as u64) as usize;
        let max_len = (s.len() - start).min(table.n_max());
        let len = 1 + rng.below(max_len as u64) as usize;
        queries.push(s[start..start + len].to_vec());
    }
    let mut checks = Vec::with_capacity(queries.len());
    for q in &queries {
        checks.push(ngram::direct_observation_check(&table, text, &cfg, q).map_err(core)?);
    }
    let all_equal = checks.iter().all(|r| r.equal);

    out.write("ngrams.tsv", |w| table.write_tsv(w))?;
    out.write("checks.csv", |w| {
        writeln!(w, "sentence,chain_value,brute_force_value,equal")?;
        for (q, r) in queries.iter().zip(&checks) {
            writeln!(
                w,
                "\"{}\",{},{},{}",
                q.join(" ").replace('"', "\"\""),
                ratio_str(&r.chain_value),
                ratio_str(&r.brute_force_value),
                r.equal
            )?;
        }
        Ok(())
    })?;
    out.write_trace(
        "trace.dat",
        ("query", "probability"),
        checks
            .iter()
            .enumerate()
            .map(|(i, r)| (i as f64, ratio_f64(&r.chain_value))),
    )?;
    let mut agree = 0usize;
    let agreement: Vec<f64> = checks
        .iter()
        .enumerate()
        .map(|(i, r)| {
            agree += usize::from(r.equal);
            agree as f64 / (i + 1) as f64
        })
        .collect();
    let mut statistics = obj(json!({
        "sentences": corpus.sentences.len(),
        "vocabulary": corpus.vocabulary.len(),
        "base_count": table.base_count(),
        "n_max": table.n_max(),
        "table_entries": table.len(),
        "telescoping_failures": telescoping_failures,
        "contexts_checked": contexts,
        "normalization_failures": normalization_failures,
        "direct_observation_checks": checks.len(),
    }));
    if let (Some(s), Some(r)) = (&nc.sentence, checks.first()) {
        statistics.insert(
            "sentence".into(),
            json!({ "tokens": s, "chain_value": ratio_str(&r.chain_value), "brute_force_value": ratio_str(&r.brute_force_value), "equal": r.equal }),
        );
    }
    Ok(Outcome {
        verdicts: obj(json!({
            "telescoping_exact": telescoping_failures == 0,
            "normalization_exact": normalization_failures == 0,
            "direct_observation_equal": all_equal,
        })),
        statistics,
        performance_trace: PerformanceTrace {
            metric: "fraction of queries where chain value equals the direct count".into(),
            experience: "queries".into(),
            points: checkpoints(agreement.len())
                .into_iter()
                .map(|k| (k as u64, agreement[k - 1]))
                .collect(),
        },
    })
}

fn distance_json(d: &DistanceOutcome<f64>) -> Value {
    serde_json::to_value(d).expect("distance outcome serializes")
}

fn thm10_rstar(c: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, RunError> {
    let r = simulate_and_forecast(c, out)?;
    let kind = c
        .distance
        .and_then(|d| d.kind)
        .unwrap_or(DistanceKind::KullbackLeibler);
    let tail = &r.records[r.burn_in..];
    let candidate: Vec<f64> = tail.iter().map(|x| x.forecast).collect();
    let outcomes: Vec<bool> = tail.iter().map(|x| x.outcome).collect();

    // What the machine can compute: nothing about the truth.
    let hidden = evaluate_distance(
        &DistanceSpec {
            kind,
            truth_available: false,
        },
        &candidate,
        None,
    );
    let flat = vec![0.5; candidate.len()];
    let ll_vs_flat = likelihood_indistinguishability(&outcomes, &candidate, &flat).map_err(core)?;

    // What an oracle holding the true schedule can compute.
    let truth: Vec<f64> = tail.iter().map(|x| x.truth).collect();
    let oracle = evaluate_distance(
        &DistanceSpec {
            kind,
            truth_available: true,
        },
        &candidate,
        Some(&truth),
    );
    let ll_vs_truth =
        likelihood_indistinguishability(&outcomes, &candidate, &truth).map_err(core)?;

    out.write_trace(
        "trace.dat",
        ("t", "forecast"),
        r.records.iter().map(|x| (x.t as f64, x.forecast)),
    )?;
    let n = outcomes.len();
    let mut ll = 0.0;
    let per_step: Vec<f64> = outcomes
        .iter()
        .zip(&candidate)
        .enumerate()
        .map(|(i, (&y, &p))| {
            let q = if y { p } else { 1.0 - p };
            ll += q.max(veritas_core::equivalence::PROBABILITY_FLOOR).ln();
            ll / (i + 1) as f64
        })
        .collect();
    let status = |d: &DistanceOutcome<f64>| match d {
        DistanceOutcome::Value { .. } => "value",
        DistanceOutcome::NotEvaluable { .. } => "not_evaluable",
    };
    Ok(Outcome {
        verdicts: obj(json!({
            "distance_hidden_truth": status(&hidden),
            "distance_oracle_truth": status(&oracle),
        })),
        statistics: obj(json!({
            "distance_kind": kind,
            "evaluated_steps": n,
            "distance_hidden_truth": distance_json(&hidden),
            "distance_oracle_truth": distance_json(&oracle),
            "log_likelihood_ratio_vs_flat": ll_vs_flat,
            "log_likelihood_ratio_vs_truth_oracle": ll_vs_truth,
            "unconditional_frequency": unconditional(&r.path)?,
        })),
        performance_trace: PerformanceTrace {
            metric: "observable mean log-likelihood of the forecasts".into(),
            experience: "steps after burn-in".into(),
            points: checkpoints(n)
                .into_iter()
                .map(|k| (k as u64, per_step[k - 1]))
                .collect(),
        },
    })
}

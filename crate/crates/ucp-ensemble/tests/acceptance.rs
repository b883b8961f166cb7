//! Acceptance criteria, one line of output per criterion.
//!
//! Set `ACCEPTANCE_ONLY=3,7` to run a subset.

use std::fs;
use std::panic;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use ucp_ensemble::cli::run;
use ucp_ensemble::io::write_dataset;
use ucp_ensemble_core::dataset::{describe, generate_synthetic};
use ucp_ensemble_core::ensemble::{
    aggregate_productivity, estimate_local_errors_with, profile_from_errors, replicate_samples, sigmoid_weight,
    train_ensemble_with, ModelSuite, ModelWeightProfile,
};
use ucp_ensemble_core::evaluation::{compare, loocv, wilcoxon_signed_rank, Estimator};
use ucp_ensemble_core::metrics::{mae, mbre, mibre, min_max_normalize};
use ucp_ensemble_core::models::{self, check_gradient, FittedParams, Regressor};
use ucp_ensemble_core::{
    rng, DatasetProfile, EnsembleConfig, EnvFactors, ErrorSummary, ModelConfig, ModelId, PredictionPair, Result,
};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn random_env(r: &mut rng::Rng) -> EnvFactors {
    EnvFactors::new(std::array::from_fn(|_| r.random_range(0.0..=5.0))).unwrap()
}

fn sigmoid_points() -> Verdict {
    let mid = sigmoid_weight(0.37, 0.37, 15.0);
    let low = sigmoid_weight(0.0, 0.5, 15.0);
    let high = sigmoid_weight(1.0, 0.5, 15.0);
    let ok = mid == 0.5 && (low - 0.999447).abs() < 1e-6 && (high - 0.000553).abs() < 1e-6;
    verdict(ok, format!("w(x̄)={mid}, w(0)={low:.6}, w(1)={high:.6}"))
}

struct Constant(f64);

impl Regressor for Constant {
    fn predict(&self, _: &EnvFactors) -> f64 {
        self.0
    }
}

struct ConstantSuite([f64; 7]);

impl ModelSuite for ConstantSuite {
    type Model = Constant;

    fn fit(&self, id: ModelId, _: &[EnvFactors], _: &[f64], _: u64) -> Result<Constant> {
        Ok(Constant(self.0[id.index()]))
    }
}

fn degenerate_weights() -> Verdict {
    let data = generate_synthetic(&DatasetProfile::ds1_like(12), 8).unwrap();
    let trained = train_ensemble_with(&ConstantSuite([23.0; 7]), &data, &EnsembleConfig::default()).unwrap();
    let all_half = trained.weights.combined.iter().all(|w| *w == 0.5);

    let profile = profile_from_errors([ErrorSummary { mae: 3.2, mbre: 0.4, mibre: 0.2 }; 7], 25);
    let weights = ModelWeightProfile::from_profile(&profile, 15.0);
    let mut r = rng::rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let preds: Vec<f64> = (0..7).map(|_| r.random_range(5.0..60.0)).collect();
        let agg = aggregate_productivity(&preds, &weights.combined).unwrap();
        worst = worst.max((agg - preds.iter().sum::<f64>() / 7.0).abs());
    }
    let ok = all_half && weights.combined.iter().all(|w| *w == 0.5) && worst <= 1e-12;
    verdict(ok, format!("weights all 0.5: {all_half}, max |aggregate - mean| = {worst:e}"))
}

fn convexity() -> Verdict {
    let mut r = rng::rng(3);
    let mut violations = 0;
    for _ in 0..1000 {
        let k = r.random_range(1..=7);
        let preds: Vec<f64> = (0..k).map(|_| r.random_range(1.0..100.0)).collect();
        let weights: Vec<f64> = (0..k).map(|_| r.random_range(1e-9..=1.0)).collect();
        let agg = aggregate_productivity(&preds, &weights).unwrap();
        let lo = preds.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = preds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo <= agg && agg <= hi) {
            violations += 1;
        }
    }
    verdict(violations == 0, format!("{violations} of 1000 draws outside [min, max]"))
}

fn step_one_oracle() -> Verdict {
    const OUTPUTS: [f64; 7] = [18.0, 21.5, 24.0, 26.0, 30.0, 22.25, 35.0];
    let data = generate_synthetic(&DatasetProfile::ds1_like(12), 12).unwrap();
    let config = EnsembleConfig { replicates: 3, ..EnsembleConfig::default() };
    let profile = estimate_local_errors_with(&ConstantSuite(OUTPUTS), &data, &config).unwrap();
    let oob: Vec<Vec<usize>> =
        replicate_samples(data.len(), &config).unwrap().into_iter().flatten().map(|s| s.out_of_bag).collect();
    let prods = data.productivities();
    let mut raw = [[0.0; 7]; 3];
    for (m, &c) in OUTPUTS.iter().enumerate() {
        for set in &oob {
            for &i in set {
                let (e, d) = (prods[i], (prods[i] - c).abs());
                let share = 1.0 / set.len() as f64 / oob.len() as f64;
                raw[0][m] += d * share;
                raw[1][m] += d / e.min(c) * share;
                raw[2][m] += d / e.max(c) * share;
            }
        }
    }
    let mut worst: f64 = 0.0;
    for q in 0..3 {
        let lo = raw[q].iter().copied().fold(f64::INFINITY, f64::min);
        let hi = raw[q].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for m in 0..7 {
            let expected = if hi > lo { (raw[q][m] - lo) / (hi - lo) } else { 0.5 };
            worst = worst.max((profile.normalized[q][m] - expected).abs());
        }
    }
    verdict(worst <= 1e-9, format!("{} replicates, max deviation {worst:e}", oob.len()))
}

fn metric_checks() -> Verdict {
    let pairs = |v: &[(f64, f64)]| v.iter().map(|&(a, e)| PredictionPair::new(a, e).unwrap()).collect::<Vec<_>>();
    let hand = [
        mae(&pairs(&[(100.0, 100.0), (50.0, 50.0)])).unwrap() == 0.0,
        mae(&pairs(&[(100.0, 110.0), (200.0, 190.0)])).unwrap() == 10.0,
        mbre(&pairs(&[(100.0, 150.0)])).unwrap() == 0.5,
        mbre(&pairs(&[(150.0, 100.0)])).unwrap() == 0.5,
        mbre(&pairs(&[(100.0, 100.0)])).unwrap() == 0.0,
        (mibre(&pairs(&[(100.0, 150.0)])).unwrap() - 0.333333).abs() < 5e-7,
        mibre(&pairs(&[(100.0, 100.0)])).unwrap() == 0.0,
        min_max_normalize(&[2.0, 4.0, 6.0]).unwrap() == [0.0, 0.5, 1.0],
        min_max_normalize(&[3.0, 3.0, 3.0]).unwrap() == [0.5, 0.5, 0.5],
        min_max_normalize(&[1.0, 2.0]).unwrap() == [0.0, 1.0],
    ];
    let hand_ok = hand.iter().filter(|b| **b).count();
    let mut r = rng::rng(5);
    let mut violations = 0;
    for _ in 0..10_000 {
        let k = r.random_range(1..=20);
        let set: Vec<PredictionPair> = (0..k)
            .map(|_| PredictionPair::new(r.random_range(0.1..5000.0), r.random_range(0.1..5000.0)).unwrap())
            .collect();
        if mibre(&set).unwrap() > mbre(&set).unwrap() {
            violations += 1;
        }
    }
    verdict(
        hand_ok == hand.len() && violations == 0,
        format!("{hand_ok}/{} worked values exact, mibre > mbre in {violations} of 10000 sets", hand.len()),
    )
}

fn gradient_checks() -> Verdict {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut r = rng::rng(1000 + seed);
        let x: Vec<EnvFactors> = (0..10).map(|_| random_env(&mut r)).collect();
        let y: Vec<f64> = x.iter().map(|e| 15.0 + 2.0 * e.get(1) - e.get(4) + r.random_range(-2.0..2.0)).collect();
        let config = ModelConfig::default().with_seed(seed);
        for id in [ModelId::Mlp, ModelId::Rbf] {
            worst = worst.max(check_gradient(id, &x, &y, &config).unwrap());
        }
    }
    verdict(worst < 1e-4, format!("max relative deviation {worst:e} over 20 seeds"))
}

fn model_recovery() -> Verdict {
    let mut r = rng::rng(7);
    let x: Vec<EnvFactors> = (0..30).map(|_| random_env(&mut r)).collect();
    let planted = [1.5, -0.5, 0.25, 2.0, -1.0, 0.0, 0.75, -0.25];
    let y: Vec<f64> = x.iter().map(|e| 12.0 + e.ratings().iter().zip(planted).map(|(v, c)| v * c).sum::<f64>()).collect();
    let config = ModelConfig::default();

    let mlr = models::train(ModelId::Mlr, &x, &y, &config).unwrap();
    let mlr_err = match &mlr.params {
        FittedParams::Mlr(m) => {
            m.coefficients.iter().zip(planted).map(|(a, b)| (a - b).abs()).fold((m.intercept - 12.0).abs(), f64::max)
        }
        _ => f64::INFINITY,
    };

    let step: Vec<f64> = x.iter().map(|e| if e.get(0) <= 2.5 { 20.0 } else if e.get(3) <= 1.0 { 28.0 } else { 36.0 }).collect();
    let rt = models::train(ModelId::Rt, &x, &step, &config).unwrap();
    let rt_err = x.iter().zip(&step).map(|(e, t)| (rt.predict(e) - t).abs()).fold(0.0, f64::max);

    let svr = models::train(ModelId::Svr, &x, &y, &config).unwrap();
    let svr_excess = match &svr.params {
        FittedParams::Svr(m) => {
            x.iter().zip(&y).map(|(e, t)| (svr.raw_output(e) - t).abs() - m.epsilon).fold(f64::NEG_INFINITY, f64::max)
        }
        _ => f64::INFINITY,
    };

    let mut per_point = config.clone();
    per_point.rbf.max_centers = x.len();
    per_point.rbf.ridge = 0.0;
    let rbf = models::train(ModelId::Rbf, &x, &y, &per_point).unwrap();
    let rbf_err = x.iter().zip(&y).map(|(e, t)| (rbf.raw_output(e) - t).abs()).fold(0.0, f64::max);

    let ok = mlr_err <= 1e-6 && rt_err == 0.0 && svr_excess <= 1e-3 && rbf_err <= 1e-6;
    verdict(
        ok,
        format!("MLR coef err {mlr_err:e}, RT train err {rt_err}, SVR max excess over ε {svr_excess:e}, RBF interp err {rbf_err:e}"),
    )
}

fn wilcoxon_exactness() -> Verdict {
    let mut r = rng::rng(8);
    let mut mismatches = 0;
    let mut checked = 0;
    for _ in 0..200 {
        let n = r.random_range(5..=10);
        let a: Vec<f64> = (0..n).map(|_| r.random_range(0..8) as f64).collect();
        let b: Vec<f64> = (0..n).map(|_| r.random_range(0..8) as f64).collect();
        let got = wilcoxon_signed_rank(&a, &b).unwrap();
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
        if d.is_empty() {
            if got.p_value != 1.0 {
                mismatches += 1;
            }
            continue;
        }
        checked += 1;
        let ranks: Vec<f64> = d
            .iter()
            .map(|v| {
                let below = d.iter().filter(|o| o.abs() < v.abs()).count() as f64;
                let ties = d.iter().filter(|o| o.abs() == v.abs()).count() as f64;
                below + (ties + 1.0) / 2.0
            })
            .collect();
        let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
        let w = w_plus.min(ranks.iter().sum::<f64>() - w_plus);
        let k = d.len();
        let hits = (0u32..1 << k)
            .filter(|mask| (0..k).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum::<f64>() <= w + 1e-9)
            .count();
        let p = (2.0 * hits as f64 / (1u64 << k) as f64).min(1.0);
        if (got.p_value - p).abs() > 1e-12 || got.statistic != w {
            mismatches += 1;
        }
    }
    let five = wilcoxon_signed_rank(&[3.0, 5.0, 8.0, 12.0, 17.0], &[2.0, 3.0, 5.0, 8.0, 12.0]).unwrap();
    verdict(
        mismatches == 0 && five.p_value == 0.0625,
        format!("{mismatches} mismatches over 200 samples ({checked} non-degenerate), all-positive n=5 p = {}", five.p_value),
    )
}

fn ensemble_benefit() -> Verdict {
    let runs = 20;
    let mut top3 = 0;
    let mut worst_count = 0;
    let mut ranks = Vec::new();
    for seed in 0..runs {
        let data = generate_synthetic(&DatasetProfile::ds1_like(40), seed).unwrap();
        let report = compare(&loocv(&data, &EnsembleConfig::default()).unwrap()).unwrap();
        let ranking = report.mae_ranking();
        let rank = ranking.iter().position(|e| *e == Estimator::Ensemble).unwrap() + 1;
        ranks.push(rank);
        if rank <= 3 {
            top3 += 1;
        }
        if rank == ranking.len() {
            worst_count += 1;
        }
    }
    let ok = top3 * 10 >= runs as usize * 7 && worst_count == 0;
    verdict(ok, format!("top-3 in {top3}/{runs} runs, worst in {worst_count}; ranks {ranks:?}"))
}

fn calibration() -> Verdict {
    let data = generate_synthetic(&DatasetProfile::ds1_like(500), 10).unwrap();
    let s = describe(&data.productivities()).unwrap();
    let skew = s.skewness.unwrap_or(f64::NAN);
    let ok = (s.mean / 24.1 - 1.0).abs() <= 0.05 && (s.stdev / 5.1 - 1.0).abs() <= 0.15 && skew.abs() <= 0.5;
    verdict(ok, format!("mean {:.3}, stdev {:.3}, skewness {skew:.3}", s.mean, s.stdev))
}

fn reproducibility() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ds.csv");
    let data = generate_synthetic(&DatasetProfile::ds1_like(20), 11).unwrap();
    write_dataset(&data, fs::File::create(&path).unwrap()).unwrap();
    let invoke = || {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let args = ["ucp-ensemble", "evaluate", "--data", path.to_str().unwrap(), "--seed", "42", "--format", "csv"];
        let code = run(args, &mut out, &mut err);
        (code, out)
    };
    let (code_a, a) = invoke();
    let (code_b, b) = invoke();
    let rows = String::from_utf8_lossy(&a).split("\n\n").next().map_or(0, |t| t.lines().count().saturating_sub(1));
    let ok = code_a == 0 && code_b == 0 && a == b && rows >= 8;
    verdict(ok, format!("exit codes {code_a}/{code_b}, {rows} accuracy rows, identical bytes: {}", a == b))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("sigmoid point checks", sigmoid_points),
        ("degenerate weights", degenerate_weights),
        ("convexity of aggregation", convexity),
        ("local-error oracle equivalence", step_one_oracle),
        ("metric hand checks", metric_checks),
        ("gradient checks", gradient_checks),
        ("model recovery", model_recovery),
        ("Wilcoxon exactness", wilcoxon_exactness),
        ("end-to-end ensemble benefit", ensemble_benefit),
        ("synthetic calibration", calibration),
        ("evaluate reproducibility", reproducibility),
    ];
    let only: Option<Vec<usize>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let mut failures = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let number = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&number)) {
            continue;
        }
        let start = Instant::now();
        let v = panic::catch_unwind(check).unwrap_or_else(|_| verdict(false, "panicked"));
        failures += usize::from(!v.passed);
        println!(
            "criterion {number:>2} {}: {name}: {} [{:.1?}]",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}

use ucp_ensemble_core::dataset::{generate_synthetic, DatasetProfile};
use ucp_ensemble_core::ensemble::ModelSuite;
use ucp_ensemble_core::evaluation::{compare, loocv, loocv_with, Estimator};
use ucp_ensemble_core::models::Regressor;
use ucp_ensemble_core::{Dataset, EnsembleConfig, EnvFactors, Error, FoldOutcome, ModelId, ProjectRecord, Result};

struct Constant(f64);

impl Regressor for Constant {
    fn predict(&self, _: &EnvFactors) -> f64 {
        self.0
    }
}

/// Every family predicts the mean of its training targets.
struct MeanSuite;

impl ModelSuite for MeanSuite {
    type Model = Constant;

    fn fit(&self, _: ModelId, _: &[EnvFactors], y: &[f64], _: u64) -> Result<Constant> {
        Ok(Constant(y.iter().sum::<f64>() / y.len() as f64))
    }
}

fn record(rating: f64, ucp: f64, productivity: f64) -> ProjectRecord {
    ProjectRecord::new(EnvFactors::uniform(rating).unwrap(), ucp, ucp * productivity).unwrap()
}

fn two_value_dataset() -> Dataset {
    let prods = [20.0, 30.0, 20.0, 30.0, 20.0, 30.0];
    Dataset::new("two-value", prods.iter().enumerate().map(|(i, p)| record(i as f64 * 0.5, 10.0, *p)).collect())
}

#[test]
fn mean_stub_predicts_mean_of_the_others() {
    let data = two_value_dataset();
    let outcomes = loocv_with(&MeanSuite, &data, &EnsembleConfig { replicates: 3, ..EnsembleConfig::default() }).unwrap();
    assert_eq!(outcomes.len(), 6);
    for (i, o) in outcomes.iter().enumerate() {
        assert_eq!(o.index, i);
        // Leaving out a 20 gives (2·20 + 3·30)/5 = 26; leaving out a 30 gives 24.
        let expected_prod = if i % 2 == 0 { 26.0 } else { 24.0 };
        for id in ModelId::ALL {
            let p = o.prediction(Estimator::Base(id)).unwrap();
            assert!((p - expected_prod * 10.0).abs() < 1e-9, "fold {i}: {p}");
        }
        assert!((o.prediction(Estimator::Ensemble).unwrap() - expected_prod * 10.0).abs() < 1e-9);
        assert_eq!(o.prediction(Estimator::Karner), Some(200.0));
    }
}

#[test]
fn outlier_is_excluded_from_its_own_fold() {
    let mut records: Vec<ProjectRecord> = (0..5).map(|i| record(1.0 + i as f64 * 0.5, 50.0, 20.0 + i as f64)).collect();
    records.insert(2, record(4.5, 50.0, 400.0));
    let data = Dataset::new("outlier", records);
    let outcomes = loocv_with(&MeanSuite, &data, &EnsembleConfig::default()).unwrap();
    let fold = &outcomes[2];
    assert!(!fold.training_records.contains(&fold.test_record));
    let base = fold.prediction(Estimator::Base(ModelId::Mlr)).unwrap() / 50.0;
    assert!((base - 22.0).abs() < 1e-9, "{base}");
    for o in &outcomes {
        assert_eq!(o.training_records.len(), 5);
        assert!(!o.training_records.contains(&o.test_record));
    }
}

#[test]
fn training_failures_carry_the_fold() {
    /// Fails on one particular call; with one replicate each fold makes
    /// fourteen calls, so call 42 is the first of fold 3.
    struct FailsOnCall(std::cell::Cell<usize>);
    impl ModelSuite for FailsOnCall {
        type Model = Constant;
        fn fit(&self, _: ModelId, _: &[EnvFactors], y: &[f64], _: u64) -> Result<Constant> {
            let call = self.0.get();
            self.0.set(call + 1);
            if call == 42 {
                Err(Error::InvalidConfig("boom".into()))
            } else {
                Ok(Constant(y[0]))
            }
        }
    }
    let records: Vec<ProjectRecord> = (0..10).map(|i| record(i as f64 * 0.5, 10.0, 20.0 + i as f64)).collect();
    let config = EnsembleConfig { replicates: 1, ..EnsembleConfig::default() };
    let err = loocv_with(&FailsOnCall(Default::default()), &Dataset::new("x", records), &config).unwrap_err();
    match err {
        Error::Fold { fold, source } => {
            assert_eq!(fold, 3);
            assert!(matches!(*source, Error::Training { model: ModelId::Mlr, .. }));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn too_few_records_are_rejected() {
    let data = Dataset::new("tiny", (0..5).map(|i| record(i as f64, 10.0, 20.0)).collect());
    assert!(matches!(loocv_with(&MeanSuite, &data, &EnsembleConfig::default()), Err(Error::InsufficientData { .. })));
}

fn outcome(index: usize, actual: f64, preds: &[(Estimator, f64)]) -> FoldOutcome {
    FoldOutcome {
        index,
        actual_effort: actual,
        ucp: 10.0,
        predictions: preds.to_vec(),
        weights: [0.5; 7],
        training_records: Vec::new(),
        test_record: index as u64,
    }
}

#[test]
fn comparison_rows() {
    let actual = [100.0, 200.0, 150.0, 120.0, 180.0, 90.0];
    let offsets = [5.0, -10.0, 15.0, -20.0, 25.0, -30.0];
    // The second estimator's absolute errors are a rotation of the first's.
    let outcomes: Vec<FoldOutcome> = (0..6)
        .map(|i| {
            outcome(
                i,
                actual[i],
                &[
                    (Estimator::Ensemble, actual[i]),
                    (Estimator::Base(ModelId::Mlr), actual[i] + offsets[i]),
                    (Estimator::Base(ModelId::Sr), actual[i] + offsets[(i + 1) % 6]),
                ],
            )
        })
        .collect();
    let report = compare(&outcomes).unwrap();
    assert_eq!(report.reference, Estimator::Ensemble);
    assert_eq!(report.rows.len(), 3);
    let perfect = report.row(Estimator::Ensemble).unwrap();
    assert_eq!(perfect.errors.as_array(), [0.0, 0.0, 0.0]);
    let mlr = report.row(Estimator::Base(ModelId::Mlr)).unwrap().errors.mae;
    let sr = report.row(Estimator::Base(ModelId::Sr)).unwrap().errors.mae;
    assert!((mlr - sr).abs() < 1e-12);
    assert_eq!(report.significance.len(), 2);
    for row in &report.rows {
        let ci = row.interval.unwrap();
        assert!(ci.contains(row.errors.mae));
    }
    assert_eq!(compare(&outcomes).unwrap(), report);
    assert!(compare(&[]).is_err());
}

#[test]
fn real_loocv_is_deterministic_and_leak_free() {
    let data = generate_synthetic(&DatasetProfile::ds1_like(8), 3).unwrap();
    let mut config = EnsembleConfig { replicates: 2, ..EnsembleConfig::default() };
    config.models.mlp.epochs = 50;
    let a = loocv(&data, &config).unwrap();
    let b = loocv(&data, &config).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 8);
    for o in &a {
        assert_eq!(o.predictions.len(), Estimator::ALL.len());
        assert!(!o.training_records.contains(&o.test_record));
        assert!(o.predictions.iter().all(|(_, v)| *v > 0.0));
    }
    let report = compare(&a).unwrap();
    assert_eq!(report.rows.len(), 10);
    assert_eq!(report.mae_ranking().len(), 8);
}

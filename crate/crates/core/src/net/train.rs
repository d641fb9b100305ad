use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::data::Dataset;
use super::model::Model;
use crate::error::{Error, Result};

/// Learning rates tried by [`select_learning_rate`].
pub const LR_GRID: [f64; 3] = [1e-1, 1e-2, 1e-3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-2,
            epochs: 30,
            batch: 16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Mean training cross-entropy over the epoch.
    pub loss: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

fn check_dataset(model: &Model, ds: &Dataset) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if ds.n() != model.inputs() {
        return Err(Error::Dimension {
            expected: model.inputs(),
            got: ds.n(),
        });
    }
    if ds.classes() > model.classes() {
        return Err(Error::param(format!(
            "dataset has label {} but the model has {} classes",
            ds.classes() - 1,
            model.classes()
        )));
    }
    Ok(())
}

/// Minibatch SGD on softmax cross-entropy. Deterministic given the seed.
pub fn train(
    mut model: Model,
    train: &Dataset,
    test: &Dataset,
    cfg: &TrainConfig,
) -> Result<(Model, Vec<EpochMetrics>)> {
    check_dataset(&model, train)?;
    check_dataset(&model, test)?;
    if !(cfg.lr.is_finite() && cfg.lr >= 0.0) {
        return Err(Error::param(format!(
            "learning rate {} must be finite and >= 0",
            cfg.lr
        )));
    }
    if cfg.batch == 0 {
        return Err(Error::param("batch size must be positive"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut grad = model.zeroed();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch) {
            grad.param_slices_mut()
                .into_iter()
                .for_each(|s| s.fill(0.0));
            for &i in batch {
                let mask = (model.dropout() > 0.0).then(|| model.dropout_mask(&mut rng));
                total +=
                    model.backprop(train.signal(i), train.label(i), mask.as_deref(), &mut grad);
            }
            let step = cfg.lr / batch.len() as f64;
            for (p, g) in model
                .param_slices_mut()
                .into_iter()
                .zip(grad.param_slices())
            {
                p.iter_mut().zip(g).for_each(|(p, g)| *p -= step * g);
            }
        }
        let loss = total / train.len() as f64;
        if !loss.is_finite() {
            return Err(Error::Divergence(epoch));
        }
        history.push(EpochMetrics {
            epoch,
            loss,
            train_accuracy: model.accuracy(train)?,
            test_accuracy: model.accuracy(test)?,
        });
    }
    Ok((model, history))
}

/// `epoch,loss,train_accuracy,test_accuracy` rows.
pub fn metrics_csv(history: &[EpochMetrics]) -> String {
    let mut out = String::from("epoch,loss,train_accuracy,test_accuracy\n");
    for m in history {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            m.epoch, m.loss, m.train_accuracy, m.test_accuracy
        );
    }
    out
}

/// Picks the learning rate with the best final accuracy on the last fifth
/// of `train`, training on the rest. Diverging rates are skipped; ties keep
/// the earlier candidate.
pub fn select_learning_rate<F>(
    build: F,
    train_set: &Dataset,
    cfg: &TrainConfig,
    candidates: &[f64],
) -> Result<f64>
where
    F: Fn() -> Result<Model>,
{
    if train_set.len() < 5 {
        return Err(Error::param(
            "need at least 5 samples to hold out a validation split",
        ));
    }
    let (fit, val) = train_set.split(train_set.len() - train_set.len() / 5);
    let mut best: Option<(f64, f64)> = None;
    for &lr in candidates {
        let run = train(build()?, &fit, &val, &TrainConfig { lr, ..*cfg });
        let acc = match run {
            Ok((_, h)) => h.last().map_or(0.0, |m| m.test_accuracy),
            Err(Error::Divergence(_)) => continue,
            Err(e) => return Err(e),
        };
        if best.is_none_or(|(_, b)| acc > b) {
            best = Some((lr, acc));
        }
    }
    best.map(|(lr, _)| lr)
        .ok_or_else(|| Error::param("every candidate learning rate diverged"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::ModelConfig;
    use rand::Rng;

    /// Two classes separated by the sign of `x0 - x1`, margin 0.5.
    fn separable(samples: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut signals = Vec::new();
        let mut labels = Vec::new();
        for i in 0..samples {
            let label = i % 2;
            let mut x: Vec<f64> = (0..8).map(|_| rng.random_range(-0.5..0.5)).collect();
            let gap = 0.5 + rng.random_range(0.0..0.5);
            if label == 0 {
                x[0] = x[1] + gap;
            } else {
                x[0] = x[1] - gap;
            }
            signals.push(x);
            labels.push(label);
        }
        Dataset::new(8, signals, labels).unwrap()
    }

    fn model(seed: u64) -> Model {
        let cfg = ModelConfig {
            hidden: 16,
            classes: 2,
            dropout: 0.0,
        };
        Model::dense(8, 16, &cfg, seed).unwrap()
    }

    #[test]
    fn separable_toy_reaches_full_accuracy() {
        let (tr, te) = separable(128, 1).split(64);
        let cfg = TrainConfig {
            lr: 0.1,
            epochs: 50,
            batch: 8,
            seed: 2,
        };
        let (_, h) = train(model(3), &tr, &te, &cfg).unwrap();
        assert_eq!(h.len(), 50);
        assert_eq!(h.last().unwrap().test_accuracy, 1.0, "{h:?}");
    }

    #[test]
    fn zero_lr_changes_nothing() {
        let ds = separable(32, 4);
        let m = model(5);
        let cfg = TrainConfig {
            lr: 0.0,
            epochs: 3,
            batch: 4,
            seed: 0,
        };
        let (trained, h) = train(m.clone(), &ds, &ds, &cfg).unwrap();
        assert_eq!(trained, m);
        assert!(h
            .windows(2)
            .all(|w| w[0].train_accuracy == w[1].train_accuracy));
    }

    #[test]
    fn training_is_deterministic() {
        let (tr, te) = separable(40, 6).split(30);
        let cfg = ModelConfig {
            hidden: 16,
            classes: 2,
            dropout: 0.3,
        };
        let m = Model::dense(8, 16, &cfg, 7).unwrap();
        let tc = TrainConfig {
            lr: 0.05,
            epochs: 5,
            batch: 4,
            seed: 11,
        };
        let a = train(m.clone(), &tr, &te, &tc).unwrap();
        let b = train(m, &tr, &te, &tc).unwrap();
        assert_eq!(a, b);
        assert_eq!(metrics_csv(&a.1), metrics_csv(&b.1));
    }

    #[test]
    fn divergence_names_epoch() {
        let ds = separable(16, 8);
        let cfg = TrainConfig {
            lr: 1e200,
            epochs: 5,
            batch: 4,
            seed: 0,
        };
        let err = train(model(0), &ds, &ds, &cfg).unwrap_err();
        assert!(matches!(err, Error::Divergence(e) if e <= 5), "{err}");
    }

    #[test]
    fn input_checks() {
        let ds = separable(8, 0);
        let (empty, _) = ds.split(0);
        let cfg = TrainConfig::default();
        assert!(matches!(
            train(model(0), &empty, &ds, &cfg),
            Err(Error::EmptyDataset)
        ));
        let three = Dataset::new(8, vec![vec![0.0; 8]], vec![2]).unwrap();
        assert!(train(model(0), &three, &ds, &cfg).is_err());
        let wide = Dataset::new(9, vec![vec![0.0; 9]], vec![0]).unwrap();
        assert!(matches!(
            train(model(0), &wide, &ds, &cfg),
            Err(Error::Dimension {
                expected: 8,
                got: 9
            })
        ));
    }

    #[test]
    fn metrics_csv_format() {
        let h = [EpochMetrics {
            epoch: 1,
            loss: 0.5,
            train_accuracy: 0.75,
            test_accuracy: 1.0,
        }];
        assert_eq!(
            metrics_csv(&h),
            "epoch,loss,train_accuracy,test_accuracy\n1,0.5,0.75,1\n"
        );
    }

    #[test]
    fn lr_selection_skips_divergent_rates() {
        let ds = separable(40, 9);
        let cfg = TrainConfig {
            epochs: 10,
            batch: 4,
            ..TrainConfig::default()
        };
        let lr = select_learning_rate(|| Ok(model(1)), &ds, &cfg, &[1e200, 0.1, 1e-3]).unwrap();
        assert!(lr == 0.1 || lr == 1e-3);
        assert!(select_learning_rate(|| Ok(model(1)), &ds, &cfg, &[1e200]).is_err());
    }
}

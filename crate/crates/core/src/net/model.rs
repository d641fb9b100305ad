use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::data::Dataset;
use super::layers::{ConvLayer, Dense};
use crate::error::{Error, Result};
use crate::layer::WeightSharingScheme;
use crate::par;

/// Sizes of the layers after the front layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub hidden: usize,
    pub classes: usize,
    /// Dropout probability in `[0, 1)`, applied after the hidden layer.
    pub dropout: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden: 32,
            classes: 2,
            dropout: 0.2,
        }
    }
}

impl ModelConfig {
    fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::param("hidden width must be positive"));
        }
        if self.classes < 2 {
            return Err(Error::param("need at least 2 classes"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::param(format!(
                "dropout {} not in [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }
}

/// First layer: graph convolution with one kernel per channel, or a plain
/// dense layer for baselines.
#[derive(Debug, Clone, PartialEq)]
pub enum Front {
    Conv(Vec<ConvLayer>),
    Dense(Dense),
}

/// `front → ReLU → Dense(hidden) → ReLU → Dropout → Dense(classes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    inputs: usize,
    front: Front,
    hidden: Dense,
    output: Dense,
    dropout: f64,
}

fn he_normal(rng: &mut ChaCha8Rng, fan_in: usize, len: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
    (0..len).map(|_| normal.sample(rng)).collect()
}

fn dense_init(rng: &mut ChaCha8Rng, inputs: usize, outputs: usize) -> Dense {
    let w = he_normal(rng, inputs, inputs * outputs);
    Dense::new(inputs, outputs, w, vec![0.0; outputs]).expect("shapes agree")
}

fn relu(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

impl Model {
    pub fn conv(
        scheme: Arc<WeightSharingScheme>,
        channels: usize,
        cfg: &ModelConfig,
        seed: u64,
    ) -> Result<Model> {
        cfg.validate()?;
        if channels == 0 {
            return Err(Error::param("need at least one channel"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, k) = (scheme.n(), scheme.k());
        let front = (0..channels)
            .map(|_| ConvLayer::new(scheme.clone(), he_normal(&mut rng, k, k), 0.0))
            .collect::<Result<Vec<_>>>()?;
        let hidden = dense_init(&mut rng, channels * n, cfg.hidden);
        let output = dense_init(&mut rng, cfg.hidden, cfg.classes);
        Ok(Model {
            inputs: n,
            front: Front::Conv(front),
            hidden,
            output,
            dropout: cfg.dropout,
        })
    }

    pub fn dense(inputs: usize, width: usize, cfg: &ModelConfig, seed: u64) -> Result<Model> {
        cfg.validate()?;
        if inputs == 0 || width == 0 {
            return Err(Error::param("dense front needs positive dimensions"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let front = dense_init(&mut rng, inputs, width);
        let hidden = dense_init(&mut rng, width, cfg.hidden);
        let output = dense_init(&mut rng, cfg.hidden, cfg.classes);
        Ok(Model {
            inputs,
            front: Front::Dense(front),
            hidden,
            output,
            dropout: cfg.dropout,
        })
    }

    /// Front width for a dense model whose parameter count is closest to
    /// `target`.
    pub fn matched_dense_width(inputs: usize, target: usize, cfg: &ModelConfig) -> usize {
        let count = |w: usize| {
            w * (inputs + 1) + w * cfg.hidden + cfg.hidden + cfg.hidden * cfg.classes + cfg.classes
        };
        let per_unit = inputs + 1 + cfg.hidden;
        let guess = target.saturating_sub(count(0)) / per_unit;
        [guess.max(1), guess + 1]
            .into_iter()
            .min_by_key(|&w| count(w).abs_diff(target))
            .expect("non-empty")
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn classes(&self) -> usize {
        self.output.outputs()
    }

    pub fn dropout(&self) -> f64 {
        self.dropout
    }

    pub fn front(&self) -> &Front {
        &self.front
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden.outputs()
    }

    fn front_width(&self) -> usize {
        match &self.front {
            Front::Conv(c) => c.len() * self.inputs,
            Front::Dense(d) => d.outputs(),
        }
    }

    pub(crate) fn param_slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        match &self.front {
            Front::Conv(c) => c.iter().for_each(|l| out.extend(l.params())),
            Front::Dense(d) => out.extend(d.params()),
        }
        out.extend(self.hidden.params());
        out.extend(self.output.params());
        out
    }

    pub(crate) fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        match &mut self.front {
            Front::Conv(c) => c.iter_mut().for_each(|l| out.extend(l.params_mut())),
            Front::Dense(d) => out.extend(d.params_mut()),
        }
        out.extend(self.hidden.params_mut());
        out.extend(self.output.params_mut());
        out
    }

    pub fn param_count(&self) -> usize {
        self.param_slices().iter().map(|s| s.len()).sum()
    }

    /// All parameters in layer order: per-channel weights and bias, then
    /// each dense layer's weights and biases.
    pub fn params(&self) -> Vec<f64> {
        self.param_slices().concat()
    }

    pub fn set_params(&mut self, values: &[f64]) -> Result<()> {
        let expected = self.param_count();
        if values.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: values.len(),
            });
        }
        let mut rest = values;
        for s in self.param_slices_mut() {
            let (head, tail) = rest.split_at(s.len());
            s.copy_from_slice(head);
            rest = tail;
        }
        Ok(())
    }

    pub(crate) fn zeroed(&self) -> Model {
        let mut z = self.clone();
        z.param_slices_mut().into_iter().for_each(|s| s.fill(0.0));
        z
    }

    fn front_forward(&self, x: &[f64]) -> Vec<f64> {
        match &self.front {
            Front::Conv(channels) => {
                let mut z = vec![0.0; channels.len() * self.inputs];
                for (c, layer) in z.chunks_exact_mut(self.inputs).zip(channels) {
                    layer.forward_into(x, c);
                }
                z
            }
            Front::Dense(d) => d.forward_unchecked(x),
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.inputs {
            return Err(Error::Dimension {
                expected: self.inputs,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Inference-mode logits (dropout disabled).
    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut h1 = self.front_forward(x);
        relu(&mut h1);
        let mut h2 = self.hidden.forward_unchecked(&h1);
        relu(&mut h2);
        Ok(self.output.forward_unchecked(&h2))
    }

    /// Most likely class; ties go to the smaller class id.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let logits = self.logits(x)?;
        let mut best = 0;
        for (i, &l) in logits.iter().enumerate() {
            if l > logits[best] {
                best = i;
            }
        }
        Ok(best)
    }

    pub fn accuracy(&self, ds: &Dataset) -> Result<f64> {
        if ds.is_empty() {
            return Err(Error::EmptyDataset);
        }
        self.check_input(ds.signal(0))?;
        let hits = par::map_range(ds.len(), |i| {
            self.predict(ds.signal(i)).map(|p| p == ds.label(i))
        });
        let mut correct = 0;
        for h in hits {
            correct += usize::from(h?);
        }
        Ok(correct as f64 / ds.len() as f64)
    }

    /// Draws an inverted-dropout mask for the hidden layer: each entry is 0
    /// with probability `p`, otherwise `1 / (1 - p)`.
    pub fn dropout_mask<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let keep = 1.0 / (1.0 - self.dropout);
        (0..self.hidden.outputs())
            .map(|_| {
                if rng.random::<f64>() < self.dropout {
                    0.0
                } else {
                    keep
                }
            })
            .collect()
    }

    /// Cross-entropy loss of one sample; gradients are added into `grad`,
    /// which must have this model's shape. `mask` of `None` disables dropout.
    pub(crate) fn backprop(
        &self,
        x: &[f64],
        label: usize,
        mask: Option<&[f64]>,
        grad: &mut Model,
    ) -> f64 {
        let z1 = self.front_forward(x);
        let mut h1 = z1.clone();
        relu(&mut h1);
        let z2 = self.hidden.forward_unchecked(&h1);
        let mut d2 = z2.clone();
        relu(&mut d2);
        if let Some(m) = mask {
            d2.iter_mut().zip(m).for_each(|(v, m)| *v *= m);
        }
        let logits = self.output.forward_unchecked(&d2);

        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        let loss = sum.ln() + max - logits[label];
        let mut dlogits: Vec<f64> = exps.iter().map(|e| e / sum).collect();
        dlogits[label] -= 1.0;

        let [dw, db] = grad.output.params_mut();
        let mut dd2 = vec![0.0; d2.len()];
        self.output
            .accumulate(&d2, &dlogits, dw, db, Some(&mut dd2));

        let mut dz2 = dd2;
        for (i, g) in dz2.iter_mut().enumerate() {
            let m = mask.map_or(1.0, |m| m[i]);
            if z2[i] <= 0.0 {
                *g = 0.0;
            } else {
                *g *= m;
            }
        }
        let [dw, db] = grad.hidden.params_mut();
        let mut dh1 = vec![0.0; h1.len()];
        self.hidden.accumulate(&h1, &dz2, dw, db, Some(&mut dh1));

        let mut dz1 = dh1;
        for (g, &z) in dz1.iter_mut().zip(&z1) {
            if z <= 0.0 {
                *g = 0.0;
            }
        }
        match (&self.front, &mut grad.front) {
            (Front::Conv(channels), Front::Conv(gc)) => {
                for ((layer, gl), g) in channels.iter().zip(gc).zip(dz1.chunks_exact(self.inputs)) {
                    let [dw, db] = gl.params_mut();
                    layer.accumulate(x, g, dw, &mut db[0], None);
                }
            }
            (Front::Dense(d), Front::Dense(gd)) => {
                let [dw, db] = gd.params_mut();
                d.accumulate(x, &dz1, dw, db, None);
            }
            _ => unreachable!("gradient model has a different front"),
        }
        loss
    }

    /// Cross-entropy loss of one sample and its gradient in [`Model::params`]
    /// order.
    pub fn loss_and_gradient(
        &self,
        x: &[f64],
        label: usize,
        mask: Option<&[f64]>,
    ) -> Result<(f64, Vec<f64>)> {
        self.check_input(x)?;
        if label >= self.classes() {
            return Err(Error::param(format!(
                "label {label} >= class count {}",
                self.classes()
            )));
        }
        if let Some(m) = mask {
            if m.len() != self.hidden.outputs() {
                return Err(Error::Dimension {
                    expected: self.hidden.outputs(),
                    got: m.len(),
                });
            }
        }
        let mut grad = self.zeroed();
        let loss = self.backprop(x, label, mask, &mut grad);
        Ok((loss, grad.params()))
    }

    /// Plain-text parameter dump, one section per layer.
    pub fn to_checkpoint(&self) -> String {
        let mut out = String::new();
        let kind = match &self.front {
            Front::Conv(c) => format!("conv channels={} K={}", c.len(), c[0].scheme().k()),
            Front::Dense(d) => format!("dense width={}", d.outputs()),
        };
        let _ = writeln!(
            out,
            "model {kind} n={} hidden={} classes={} dropout={}",
            self.inputs,
            self.hidden.outputs(),
            self.classes(),
            self.dropout
        );
        let line = |out: &mut String, label: &str, values: &[f64]| {
            out.push_str(label);
            for v in values {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        };
        match &self.front {
            Front::Conv(channels) => {
                for (i, l) in channels.iter().enumerate() {
                    let _ = writeln!(out, "[conv {i}]");
                    line(&mut out, "weights", l.weights());
                    line(&mut out, "bias", &[l.bias()]);
                }
            }
            Front::Dense(d) => dense_section(&mut out, "front", d, line),
        }
        dense_section(&mut out, "hidden", &self.hidden, line);
        dense_section(&mut out, "output", &self.output, line);
        debug_assert_eq!(self.front_width(), self.hidden.inputs());
        out
    }
}

fn dense_section(
    out: &mut String,
    name: &str,
    d: &Dense,
    line: impl Fn(&mut String, &str, &[f64]),
) {
    let _ = writeln!(out, "[dense {name} {}x{}]", d.outputs(), d.inputs());
    for row in d.weights().chunks_exact(d.inputs()) {
        line(out, "weights", row);
    }
    line(out, "bias", d.bias());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layer::Triple;

    fn ring_scheme(n: usize) -> Arc<WeightSharingScheme> {
        let mut triples = Vec::new();
        for v in 0..n {
            triples.push(Triple {
                out: v,
                input: v,
                weight: 0,
            });
            triples.push(Triple {
                out: v,
                input: (v + n - 1) % n,
                weight: 1,
            });
            triples.push(Triple {
                out: v,
                input: (v + 1) % n,
                weight: 2,
            });
        }
        Arc::new(WeightSharingScheme::new(n, 3, false, triples).unwrap())
    }

    fn cfg() -> ModelConfig {
        ModelConfig {
            hidden: 6,
            classes: 3,
            dropout: 0.5,
        }
    }

    #[test]
    fn param_counts() {
        let m = Model::conv(ring_scheme(10), 2, &cfg(), 1).unwrap();
        assert_eq!(m.param_count(), 2 * 4 + (20 * 6 + 6) + (6 * 3 + 3));
        let d = Model::dense(10, 5, &cfg(), 1).unwrap();
        assert_eq!(d.param_count(), (10 * 5 + 5) + (5 * 6 + 6) + 21);
    }

    #[test]
    fn matched_width_is_closest() {
        let c = cfg();
        let target = 1000;
        let w = Model::matched_dense_width(10, target, &c);
        let count = |w| Model::dense(10, w, &c, 0).unwrap().param_count();
        for other in 1..200 {
            assert!(count(w).abs_diff(target) <= count(other).abs_diff(target));
        }
    }

    #[test]
    fn params_round_trip() {
        let mut m = Model::conv(ring_scheme(5), 2, &cfg(), 3).unwrap();
        let mut p = m.params();
        p.iter_mut().for_each(|v| *v += 1.0);
        m.set_params(&p).unwrap();
        assert_eq!(m.params(), p);
        assert!(m.set_params(&p[1..]).is_err());
    }

    #[test]
    fn same_seed_same_model() {
        let a = Model::conv(ring_scheme(5), 2, &cfg(), 9).unwrap();
        let b = Model::conv(ring_scheme(5), 2, &cfg(), 9).unwrap();
        let c = Model::conv(ring_scheme(5), 2, &cfg(), 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn bad_config_rejected() {
        let mut c = cfg();
        c.dropout = 1.0;
        assert!(Model::dense(4, 4, &c, 0).is_err());
        c.dropout = 0.0;
        c.classes = 1;
        assert!(Model::dense(4, 4, &c, 0).is_err());
    }

    #[test]
    fn zero_dropout_mask_is_identity() {
        let mut c = cfg();
        c.dropout = 0.0;
        let m = Model::conv(ring_scheme(5), 1, &c, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mask = m.dropout_mask(&mut rng);
        assert!(mask.iter().all(|&v| v == 1.0));
        let x = [0.1, 0.2, -0.3, 0.4, 0.5];
        let (a, ga) = m.loss_and_gradient(&x, 1, Some(&mask)).unwrap();
        let (b, gb) = m.loss_and_gradient(&x, 1, None).unwrap();
        assert_eq!((a, ga), (b, gb));
    }

    #[test]
    fn loss_matches_logits() {
        let m = Model::conv(ring_scheme(5), 2, &cfg(), 4).unwrap();
        let x = [1.0, -0.5, 0.25, 0.0, 2.0];
        let logits = m.logits(&x).unwrap();
        let lse = logits.iter().map(|l| l.exp()).sum::<f64>().ln();
        let (loss, _) = m.loss_and_gradient(&x, 2, None).unwrap();
        assert!((loss - (lse - logits[2])).abs() < 1e-12);
    }

    #[test]
    fn checkpoint_has_layer_headers() {
        let m = Model::conv(ring_scheme(4), 2, &cfg(), 0).unwrap();
        let text = m.to_checkpoint();
        let headers: Vec<&str> = text.lines().filter(|l| l.starts_with('[')).collect();
        assert_eq!(
            headers,
            [
                "[conv 0]",
                "[conv 1]",
                "[dense hidden 6x8]",
                "[dense output 3x6]"
            ]
        );
        assert!(text.starts_with("model conv channels=2 K=3 n=4 hidden=6 classes=3 dropout=0.5\n"));
        let values: usize = text
            .lines()
            .filter(|l| !l.starts_with('[') && !l.starts_with("model"))
            .map(|l| l.split_whitespace().count() - 1)
            .sum();
        assert_eq!(values, m.param_count());
    }
}

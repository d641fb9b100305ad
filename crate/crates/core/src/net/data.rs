use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::propagation::PlacementMap;

/// Labeled signals on the vertices of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    signals: Vec<Vec<f64>>,
    labels: Vec<usize>,
}

impl Dataset {
    pub fn new(n: usize, signals: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if signals.len() != labels.len() {
            return Err(Error::Dimension {
                expected: signals.len(),
                got: labels.len(),
            });
        }
        if let Some(s) = signals.iter().find(|s| s.len() != n) {
            return Err(Error::Dimension {
                expected: n,
                got: s.len(),
            });
        }
        Ok(Dataset { n, signals, labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn signal(&self, i: usize) -> &[f64] {
        &self.signals[i]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// One more than the largest label, 0 when empty.
    pub fn classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    /// First `at` samples and the rest.
    pub fn split(&self, at: usize) -> (Dataset, Dataset) {
        let at = at.min(self.len());
        let part = |r: std::ops::Range<usize>| Dataset {
            n: self.n,
            signals: self.signals[r.clone()].to_vec(),
            labels: self.labels[r].to_vec(),
        };
        (part(0..at), part(at..self.len()))
    }

    /// Header `x0,...,x{n-1},label`, then one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let _ = write!(out, "x{i},");
        }
        out.push_str("label\n");
        for (s, l) in self.signals.iter().zip(&self.labels) {
            for v in s {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{l}");
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Dataset> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::EmptyDataset)?;
        let columns: Vec<&str> = header.split(',').map(str::trim).collect();
        if columns.last() != Some(&"label") {
            return Err(Error::parse(
                hline,
                "missing `label` column (expected as last header field)",
            ));
        }
        let n = columns.len() - 1;
        let mut signals = Vec::new();
        let mut labels = Vec::new();
        for (line, row) in lines {
            let fields: Vec<&str> = row.split(',').map(str::trim).collect();
            if fields.len() != n + 1 {
                return Err(Error::parse(
                    line,
                    format!("expected {} fields, found {}", n + 1, fields.len()),
                ));
            }
            let signal = fields[..n]
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::parse(line, format!("bad value `{f}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            let label = fields[n]
                .parse::<usize>()
                .map_err(|_| Error::parse(line, format!("bad label `{}`", fields[n])))?;
            signals.push(signal);
            labels.push(label);
        }
        Dataset::new(n, signals, labels)
    }
}

/// Where translated patterns are centered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centers {
    Uniform,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternConfig {
    pub samples_per_class: usize,
    /// Standard deviation of additive Gaussian noise.
    pub noise: f64,
    pub centers: Centers,
    pub seed: u64,
}

/// Class templates on kernel slots, written through the placement of a
/// random center. Lost slots drop their value. Samples are shuffled.
pub fn make_translated_dataset(
    pm: &PlacementMap,
    templates: &[Vec<f64>],
    cfg: &PatternConfig,
) -> Result<Dataset> {
    if let Some(v) = (0..pm.n()).find(|&v| pm.get(v).is_none()) {
        return Err(Error::Incomplete(v));
    }
    if templates.is_empty() {
        return Err(Error::param("need at least one template"));
    }
    if let Some(t) = templates.iter().find(|t| t.len() != pm.k()) {
        return Err(Error::Dimension {
            expected: pm.k(),
            got: t.len(),
        });
    }
    if let Centers::Fixed(c) = cfg.centers {
        if c >= pm.n() {
            return Err(Error::param(format!("center {c} >= n = {}", pm.n())));
        }
    }
    if !(cfg.noise.is_finite() && cfg.noise >= 0.0) {
        return Err(Error::param(format!(
            "noise {} must be finite and >= 0",
            cfg.noise
        )));
    }
    let noise = Normal::new(0.0, cfg.noise).expect("validated std");

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = Vec::with_capacity(templates.len() * cfg.samples_per_class);
    for (label, template) in templates.iter().enumerate() {
        for _ in 0..cfg.samples_per_class {
            let center = match cfg.centers {
                Centers::Uniform => rng.random_range(0..pm.n()),
                Centers::Fixed(c) => c,
            };
            let mut signal = vec![0.0; pm.n()];
            for (slot, v) in pm.get(center).expect("complete").support() {
                signal[v] = template[slot];
            }
            if cfg.noise > 0.0 {
                signal.iter_mut().for_each(|x| *x += noise.sample(&mut rng));
            }
            samples.push((signal, label));
        }
    }
    samples.shuffle(&mut rng);
    let (signals, labels) = samples.into_iter().unzip();
    Dataset::new(pm.n(), signals, labels)
}

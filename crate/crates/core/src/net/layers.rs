use std::sync::Arc;

use crate::error::{Error, Result};
use crate::layer::WeightSharingScheme;

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

/// Graph convolution: `K` shared weights applied through a scheme, plus one
/// bias shared by every output.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    scheme: Arc<WeightSharingScheme>,
    weights: Vec<f64>,
    bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGradients {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub input: Vec<f64>,
}

impl ConvLayer {
    pub fn new(scheme: Arc<WeightSharingScheme>, weights: Vec<f64>, bias: f64) -> Result<Self> {
        check_len(scheme.k(), weights.len())?;
        Ok(ConvLayer {
            scheme,
            weights,
            bias,
        })
    }

    pub fn scheme(&self) -> &Arc<WeightSharingScheme> {
        &self.scheme
    }

    pub fn n(&self) -> usize {
        self.scheme.n()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// `K + 1`, independent of the number of vertices.
    pub fn param_count(&self) -> usize {
        self.weights.len() + 1
    }

    pub(crate) fn params(&self) -> [&[f64]; 2] {
        [&self.weights, std::slice::from_ref(&self.bias)]
    }

    pub(crate) fn params_mut(&mut self) -> [&mut [f64]; 2] {
        [&mut self.weights, std::slice::from_mut(&mut self.bias)]
    }

    /// `y[out] = bias + Σ weights[w]·x[in]` over the scheme's triples.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), x.len())?;
        let mut y = vec![0.0; self.n()];
        self.forward_into(x, &mut y);
        Ok(y)
    }

    pub(crate) fn forward_into(&self, x: &[f64], y: &mut [f64]) {
        y.fill(self.bias);
        for t in self.scheme.triples() {
            y[t.out] += self.weights[t.weight] * x[t.input];
        }
    }

    /// Gradients of a loss with upstream gradient `g = ∂loss/∂y`.
    pub fn backward(&self, x: &[f64], g: &[f64]) -> Result<ConvGradients> {
        check_len(self.n(), x.len())?;
        check_len(self.n(), g.len())?;
        let mut out = ConvGradients {
            weights: vec![0.0; self.weights.len()],
            bias: 0.0,
            input: vec![0.0; self.n()],
        };
        self.accumulate(x, g, &mut out.weights, &mut out.bias, Some(&mut out.input));
        Ok(out)
    }

    pub(crate) fn accumulate(
        &self,
        x: &[f64],
        g: &[f64],
        dw: &mut [f64],
        db: &mut f64,
        dx: Option<&mut [f64]>,
    ) {
        *db += g.iter().sum::<f64>();
        for t in self.scheme.triples() {
            dw[t.weight] += g[t.out] * x[t.input];
        }
        if let Some(dx) = dx {
            for t in self.scheme.triples() {
                dx[t.input] += g[t.out] * self.weights[t.weight];
            }
        }
    }
}

/// Fully connected layer, weights stored row-major (`outputs × inputs`).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    inputs: usize,
    outputs: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGradients {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub input: Vec<f64>,
}

impl Dense {
    pub fn new(inputs: usize, outputs: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::param("dense layer dimensions must be positive"));
        }
        check_len(inputs * outputs, weights.len())?;
        check_len(outputs, bias.len())?;
        Ok(Dense {
            inputs,
            outputs,
            weights,
            bias,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub(crate) fn params(&self) -> [&[f64]; 2] {
        [&self.weights, &self.bias]
    }

    pub(crate) fn params_mut(&mut self) -> [&mut [f64]; 2] {
        [&mut self.weights, &mut self.bias]
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.inputs, x.len())?;
        Ok(self.forward_unchecked(x))
    }

    pub(crate) fn forward_unchecked(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }

    pub fn backward(&self, x: &[f64], g: &[f64]) -> Result<DenseGradients> {
        check_len(self.inputs, x.len())?;
        check_len(self.outputs, g.len())?;
        let mut out = DenseGradients {
            weights: vec![0.0; self.weights.len()],
            bias: vec![0.0; self.outputs],
            input: vec![0.0; self.inputs],
        };
        self.accumulate(x, g, &mut out.weights, &mut out.bias, Some(&mut out.input));
        Ok(out)
    }

    pub(crate) fn accumulate(
        &self,
        x: &[f64],
        g: &[f64],
        dw: &mut [f64],
        db: &mut [f64],
        mut dx: Option<&mut [f64]>,
    ) {
        for (o, &go) in g.iter().enumerate() {
            if go == 0.0 {
                continue;
            }
            db[o] += go;
            let row = o * self.inputs..(o + 1) * self.inputs;
            for (d, v) in dw[row.clone()].iter_mut().zip(x) {
                *d += go * v;
            }
            if let Some(dx) = dx.as_deref_mut() {
                for (d, w) in dx.iter_mut().zip(&self.weights[row]) {
                    *d += go * w;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layer::Triple;

    fn path_scheme() -> Arc<WeightSharingScheme> {
        let t = |out, input, weight| Triple { out, input, weight };
        let triples = vec![
            t(0, 0, 0),
            t(0, 1, 2),
            t(1, 1, 0),
            t(1, 0, 1),
            t(1, 2, 2),
            t(2, 2, 0),
            t(2, 1, 1),
        ];
        Arc::new(WeightSharingScheme::new(3, 3, false, triples).unwrap())
    }

    fn identity_scheme(n: usize) -> Arc<WeightSharingScheme> {
        let triples = (0..n)
            .map(|v| Triple {
                out: v,
                input: v,
                weight: 0,
            })
            .collect();
        Arc::new(WeightSharingScheme::new(n, 1, false, triples).unwrap())
    }

    #[test]
    fn identity_conv_copies_input() {
        let layer = ConvLayer::new(identity_scheme(4), vec![1.0], 0.0).unwrap();
        let x = [0.5, -1.0, 2.0, 3.5];
        assert_eq!(layer.forward(&x).unwrap(), x);
    }

    #[test]
    fn path_conv_sums_triples() {
        let layer = ConvLayer::new(path_scheme(), vec![1.0; 3], 0.0).unwrap();
        assert_eq!(layer.forward(&[1.0; 3]).unwrap(), [2.0, 3.0, 2.0]);
    }

    #[test]
    fn zero_weights_give_bias() {
        let layer = ConvLayer::new(path_scheme(), vec![0.0; 3], -0.25).unwrap();
        assert_eq!(layer.forward(&[4.0, 5.0, 6.0]).unwrap(), [-0.25; 3]);
    }

    #[test]
    fn conv_dimension_errors() {
        assert!(matches!(
            ConvLayer::new(path_scheme(), vec![1.0; 2], 0.0),
            Err(Error::Dimension {
                expected: 3,
                got: 2
            })
        ));
        let layer = ConvLayer::new(path_scheme(), vec![1.0; 3], 0.0).unwrap();
        assert!(layer.forward(&[1.0; 4]).is_err());
        assert!(layer.backward(&[1.0; 3], &[1.0; 2]).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let layer = ConvLayer::new(path_scheme(), vec![0.3, -0.2, 0.7], 0.1).unwrap();
        let g = layer.backward(&[1.0, 2.0, 3.0], &[0.0; 3]).unwrap();
        assert_eq!(g.weights, [0.0; 3]);
        assert_eq!(g.bias, 0.0);
        assert_eq!(g.input, [0.0; 3]);
    }

    #[test]
    fn identity_weight_gradient_is_dot_product() {
        let layer = ConvLayer::new(identity_scheme(3), vec![2.0], 0.0).unwrap();
        let g = layer.backward(&[1.0, 2.0, 3.0], &[0.5, -1.0, 2.0]).unwrap();
        assert_eq!(g.weights, [0.5 - 2.0 + 6.0]);
        assert_eq!(g.bias, 1.5);
        assert_eq!(g.input, [1.0, -2.0, 4.0]);
    }

    #[test]
    fn param_count_ignores_n() {
        for n in [3, 50, 400] {
            let layer = ConvLayer::new(identity_scheme(n), vec![1.0], 0.0).unwrap();
            assert_eq!(layer.param_count(), 2);
        }
        let layer = ConvLayer::new(path_scheme(), vec![1.0; 3], 0.0).unwrap();
        assert_eq!(layer.param_count(), 4);
    }

    #[test]
    fn dense_forward_and_backward() {
        let d = Dense::new(2, 2, vec![1.0, 2.0, 3.0, 4.0], vec![0.5, -0.5]).unwrap();
        assert_eq!(d.forward(&[1.0, 1.0]).unwrap(), [3.5, 6.5]);
        let g = d.backward(&[1.0, 2.0], &[1.0, 0.5]).unwrap();
        assert_eq!(g.weights, [1.0, 2.0, 0.5, 1.0]);
        assert_eq!(g.bias, [1.0, 0.5]);
        assert_eq!(g.input, [2.5, 4.0]);
        assert!(Dense::new(2, 2, vec![0.0; 3], vec![0.0; 2]).is_err());
    }
}

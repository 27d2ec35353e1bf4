//! Toy victim models: softmax regression and a one-hidden-layer MLP, with
//! cross-entropy loss, analytic input gradients and a full-batch trainer.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::sample::{Sample, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    #[default]
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Self::Tanh => v.tanh(),
            Self::Relu => v.max(0.0),
        }
    }

    /// Derivative expressed through the pre-activation.
    fn derivative(self, pre: f64) -> f64 {
        match self {
            Self::Tanh => {
                let t = pre.tanh();
                1.0 - t * t
            }
            Self::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ClassifierKind {
    SoftmaxLinear,
    Mlp1Hidden { hidden: usize, activation: Activation },
}

/// Dense layer, weights row-major `outputs x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b)
            .collect()
    }

    /// `W^T g`.
    fn backward_input(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.inputs];
        for (row, gi) in self.weights.chunks_exact(self.inputs).zip(g) {
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * gi;
            }
        }
        out
    }

    fn accumulate(&self, grad: &mut Dense, x: &[f64], g: &[f64]) {
        for ((row, gb), gi) in grad.weights.chunks_exact_mut(self.inputs).zip(&mut grad.bias).zip(g) {
            for (w, xi) in row.iter_mut().zip(x) {
                *w += gi * xi;
            }
            *gb += gi;
        }
    }

    fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    kind: ClassifierKind,
    input_shape: Shape,
    classes: usize,
    layers: Vec<Dense>,
    train_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    pub loss: f64,
    pub logits: Vec<f64>,
    pub predicted: usize,
}

struct Trace {
    /// Input to each layer, then the final logits.
    activations: Vec<Vec<f64>>,
    /// Hidden pre-activations, when present.
    hidden_pre: Option<Vec<f64>>,
}

fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

/// Index of the largest logit; ties resolve to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

impl Classifier {
    /// Builds a classifier from explicit layers, validating that shapes chain.
    pub fn from_layers(
        kind: ClassifierKind,
        input_shape: Shape,
        classes: usize,
        layers: Vec<Dense>,
    ) -> Result<Self> {
        let expected = match kind {
            ClassifierKind::SoftmaxLinear => 1,
            ClassifierKind::Mlp1Hidden { .. } => 2,
        };
        if layers.len() != expected {
            return Err(Error::InvalidClassifier(format!(
                "{kind:?} needs {expected} layers, got {}",
                layers.len()
            )));
        }
        if classes < 2 {
            return Err(Error::InvalidClassifier("at least 2 classes required".into()));
        }
        let mut width = input_shape.len();
        for (i, l) in layers.iter().enumerate() {
            if l.inputs != width || l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::InvalidClassifier(format!("layer {i} does not chain")));
            }
            if !l.is_finite() {
                return Err(Error::InvalidClassifier(format!("layer {i} has non-finite parameters")));
            }
            width = l.outputs;
        }
        if let ClassifierKind::Mlp1Hidden { hidden, .. } = kind {
            if layers[0].outputs != hidden {
                return Err(Error::InvalidClassifier("hidden width mismatch".into()));
            }
        }
        if width != classes {
            return Err(Error::InvalidClassifier(format!(
                "final layer has {width} outputs for {classes} classes"
            )));
        }
        Ok(Self {
            kind,
            input_shape,
            classes,
            layers,
            train_accuracy: None,
        })
    }

    /// Randomly initialized classifier (`N(0, scale^2 / fan_in)` weights, zero
    /// biases).
    pub fn init(kind: ClassifierKind, input_shape: Shape, classes: usize, scale: f64, seed: u64) -> Result<Self> {
        let d = input_shape.len();
        let dims: Vec<(usize, usize)> = match kind {
            ClassifierKind::SoftmaxLinear => vec![(d, classes)],
            ClassifierKind::Mlp1Hidden { hidden, .. } => {
                if hidden == 0 {
                    return Err(Error::InvalidClassifier("hidden width must be >= 1".into()));
                }
                vec![(d, hidden), (hidden, classes)]
            }
        };
        let layers = dims
            .into_iter()
            .enumerate()
            .map(|(i, (inputs, outputs))| {
                let mut layer = Dense::zeros(inputs, outputs);
                let normal = Normal::new(0.0, scale / (inputs as f64).sqrt()).expect("finite std");
                let mut r = rng::substream(seed, &[i as u64]);
                for w in &mut layer.weights {
                    *w = normal.sample(&mut r);
                }
                layer
            })
            .collect();
        Self::from_layers(kind, input_shape, classes, layers)
    }

    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    pub fn input_shape(&self) -> Shape {
        self.input_shape
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn train_accuracy(&self) -> Option<f64> {
        self.train_accuracy
    }

    pub fn set_train_accuracy(&mut self, acc: Option<f64>) {
        self.train_accuracy = acc;
    }

    fn check(&self, x: &Sample, y: usize) -> Result<()> {
        x.ensure_shape(self.input_shape)?;
        if y >= self.classes {
            return Err(Error::LabelOutOfRange {
                label: y,
                classes: self.classes,
            });
        }
        Ok(())
    }

    fn trace(&self, x: &[f64]) -> Trace {
        match self.kind {
            ClassifierKind::SoftmaxLinear => Trace {
                activations: vec![x.to_vec(), self.layers[0].forward(x)],
                hidden_pre: None,
            },
            ClassifierKind::Mlp1Hidden { activation, .. } => {
                let pre = self.layers[0].forward(x);
                let hidden: Vec<f64> = pre.iter().map(|&v| activation.apply(v)).collect();
                let logits = self.layers[1].forward(&hidden);
                Trace {
                    activations: vec![x.to_vec(), hidden, logits],
                    hidden_pre: Some(pre),
                }
            }
        }
    }

    pub fn logits(&self, x: &Sample) -> Result<Vec<f64>> {
        x.ensure_shape(self.input_shape)?;
        Ok(self.trace(x.as_slice()).activations.pop().unwrap())
    }

    pub fn predict(&self, x: &Sample) -> Result<usize> {
        Ok(argmax(&self.logits(x)?))
    }

    /// Gradient of the loss w.r.t. the logits, `softmax - onehot`.
    fn logit_grad(logits: &[f64], y: usize) -> Vec<f64> {
        let logp = log_softmax(logits);
        logp.iter()
            .enumerate()
            .map(|(k, lp)| lp.exp() - if k == y { 1.0 } else { 0.0 })
            .collect()
    }

    /// Backpropagates `g` (gradient at logits); returns input gradient and
    /// accumulates parameter gradients into `grads` when given.
    fn backward(&self, tr: &Trace, g: Vec<f64>, grads: Option<&mut [Dense]>) -> Vec<f64> {
        match self.kind {
            ClassifierKind::SoftmaxLinear => {
                if let Some(gr) = grads {
                    self.layers[0].accumulate(&mut gr[0], &tr.activations[0], &g);
                }
                self.layers[0].backward_input(&g)
            }
            ClassifierKind::Mlp1Hidden { activation, .. } => {
                let pre = tr.hidden_pre.as_ref().unwrap();
                let gh = self.layers[1].backward_input(&g);
                let gpre: Vec<f64> = gh.iter().zip(pre).map(|(a, &p)| a * activation.derivative(p)).collect();
                if let Some(gr) = grads {
                    self.layers[1].accumulate(&mut gr[1], &tr.activations[1], &g);
                    self.layers[0].accumulate(&mut gr[0], &tr.activations[0], &gpre);
                }
                self.layers[0].backward_input(&gpre)
            }
        }
    }
}

/// Stable log-sum-exp cross-entropy and argmax prediction.
pub fn forward_loss(model: &Classifier, x: &Sample, y: usize) -> Result<LossOutput> {
    model.check(x, y)?;
    let logits = model.trace(x.as_slice()).activations.pop().unwrap();
    let loss = -log_softmax(&logits)[y];
    Ok(LossOutput {
        loss,
        predicted: argmax(&logits),
        logits,
    })
}

/// Analytic gradient of the cross-entropy w.r.t. the input.
pub fn input_gradient(model: &Classifier, x: &Sample, y: usize) -> Result<Sample> {
    model.check(x, y)?;
    let tr = model.trace(x.as_slice());
    let g = Classifier::logit_grad(tr.activations.last().unwrap(), y);
    let gx = model.backward(&tr, g, None);
    Ok(Sample::from_parts(x.shape(), gx))
}

#[derive(Debug, Clone)]
pub struct LabeledDataset {
    samples: Vec<Sample>,
    labels: Vec<usize>,
    classes: usize,
}

impl LabeledDataset {
    pub fn new(samples: Vec<Sample>, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(Error::LengthMismatch(format!(
                "{} samples but {} labels",
                samples.len(),
                labels.len()
            )));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::LabelOutOfRange { label, classes });
        }
        if let Some(first) = samples.first() {
            let shape = first.shape();
            for s in &samples {
                s.ensure_shape(shape)?;
            }
        }
        Ok(Self {
            samples,
            labels,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn shape(&self) -> Option<Shape> {
        self.samples.first().map(|s| s.shape())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Sample, usize)> {
        self.samples.iter().zip(self.labels.iter().copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub kind: ClassifierKind,
    pub epochs: usize,
    pub lr: f64,
    /// Std multiplier for the weight initialization.
    pub init_scale: f64,
}

pub fn accuracy(model: &Classifier, data: &LabeledDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyInput("dataset"));
    }
    let mut correct = 0usize;
    for (x, y) in data.iter() {
        if model.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Full-batch gradient descent on the mean cross-entropy.
pub fn train_classifier(
    data: &LabeledDataset,
    kind: ClassifierKind,
    epochs: usize,
    lr: f64,
    rng_seed: u64,
) -> Result<Classifier> {
    train_with(
        data,
        &TrainConfig {
            kind,
            epochs,
            lr,
            init_scale: 0.1,
        },
        rng_seed,
    )
}

pub fn train_with(data: &LabeledDataset, cfg: &TrainConfig, rng_seed: u64) -> Result<Classifier> {
    let shape = data.shape().ok_or(Error::EmptyInput("dataset"))?;
    if data.classes() < 2 {
        return Err(Error::InvalidClassifier("at least 2 classes required".into()));
    }
    if !(cfg.lr >= 0.0 && cfg.lr.is_finite()) {
        return Err(Error::InvalidClassifier(format!("learning rate {} must be >= 0", cfg.lr)));
    }
    let mut model = Classifier::init(cfg.kind, shape, data.classes(), cfg.init_scale, rng_seed)?;
    let n = data.len() as f64;

    for epoch in 0..cfg.epochs {
        let mut grads: Vec<Dense> = model.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect();
        let mut loss = 0.0;
        for (x, y) in data.iter() {
            let tr = model.trace(x.as_slice());
            let logits = tr.activations.last().unwrap();
            loss -= log_softmax(logits)[y];
            let g = Classifier::logit_grad(logits, y);
            model.backward(&tr, g, Some(&mut grads));
        }
        if !(loss / n).is_finite() {
            return Err(Error::Divergence { epoch });
        }
        for (layer, grad) in model.layers.iter_mut().zip(&grads) {
            for (w, g) in layer.weights.iter_mut().zip(&grad.weights) {
                *w -= cfg.lr * g / n;
            }
            for (b, g) in layer.bias.iter_mut().zip(&grad.bias) {
                *b -= cfg.lr * g / n;
            }
        }
        if !model.layers.iter().all(Dense::is_finite) {
            return Err(Error::Divergence { epoch });
        }
    }
    model.train_accuracy = Some(accuracy(&model, data)?);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn v(data: &[f64]) -> Sample {
        Sample::from_vec(data.to_vec()).unwrap()
    }

    fn linear(weights: Vec<f64>, bias: Vec<f64>, d: usize) -> Classifier {
        let k = bias.len();
        Classifier::from_layers(
            ClassifierKind::SoftmaxLinear,
            Shape::flat(d),
            k,
            vec![Dense { inputs: d, outputs: k, weights, bias }],
        )
        .unwrap()
    }

    #[test]
    fn uniform_logits_give_log_k() {
        for k in [2, 3, 10] {
            let m = linear(vec![0.0; 2 * k], vec![0.0; k], 2);
            let out = forward_loss(&m, &v(&[0.3, -0.1]), 1).unwrap();
            assert!((out.loss - (k as f64).ln()).abs() < 1e-15);
            assert_eq!(out.predicted, 0);
        }
    }

    #[test]
    fn growing_margin_decreases_loss() {
        let mut last = f64::INFINITY;
        for margin in [0.0, 1.0, 5.0, 20.0, 200.0] {
            let m = linear(vec![0.0; 6], vec![0.0, margin, 0.0], 2);
            let loss = forward_loss(&m, &v(&[0.0, 0.0]), 1).unwrap().loss;
            assert!(loss < last && loss >= 0.0);
            last = loss;
        }
    }

    #[test]
    fn loss_matches_high_precision_oracle() {
        // Frozen from tests/oracles/classifier_loss.py (mpmath, 50 digits).
        let m = linear(vec![0.5, -1.25, 2.0, 0.75, -0.3, 0.1], vec![0.1, -0.2], 3);
        let out = forward_loss(&m, &v(&[0.2, 0.9, -0.4]), 0).unwrap();
        assert!((out.loss - 1.592_438_854_069_807_7).abs() < 1e-13, "{}", out.loss);

        let mlp = Classifier::from_layers(
            ClassifierKind::Mlp1Hidden { hidden: 2, activation: Activation::Tanh },
            Shape::flat(3),
            3,
            vec![
                Dense { inputs: 3, outputs: 2, weights: vec![0.3, -0.8, 1.1, 0.5, 0.25, -0.6], bias: vec![0.05, -0.1] },
                Dense { inputs: 2, outputs: 3, weights: vec![1.5, -0.7, -0.4, 2.2, 0.9, 0.3], bias: vec![0.0, 0.2, -0.3] },
            ],
        )
        .unwrap();
        let out = forward_loss(&mlp, &v(&[0.2, 0.9, -0.4]), 2).unwrap();
        assert!((out.loss - 2.479_986_062_415_333_5).abs() < 1e-13, "{}", out.loss);
    }

    #[test]
    fn linear_gradient_closed_form() {
        let w = vec![0.5, -1.25, 2.0, 0.75, -0.3, 0.1];
        let m = linear(w.clone(), vec![0.1, -0.2], 3);
        let x = v(&[0.2, 0.9, -0.4]);
        let g = input_gradient(&m, &x, 1).unwrap();
        let logits = m.logits(&x).unwrap();
        let lse = logits.iter().map(|z| z.exp()).sum::<f64>();
        let p: Vec<f64> = logits.iter().map(|z| z.exp() / lse).collect();
        for i in 0..3 {
            let want = w[i] * p[0] + w[3 + i] * (p[1] - 1.0);
            assert!((g.as_slice()[i] - want).abs() < 1e-14);
        }
        assert!(g.norm_l2() > 0.0);
    }

    fn central_difference(m: &Classifier, x: &Sample, y: usize) -> Vec<f64> {
        let h = 1e-5;
        (0..x.len())
            .map(|i| {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp.as_mut_slice()[i] += h;
                xm.as_mut_slice()[i] -= h;
                (forward_loss(m, &xp, y).unwrap().loss - forward_loss(m, &xm, y).unwrap().loss) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut r = rng::seeded(77);
        let kinds = [
            ClassifierKind::SoftmaxLinear,
            ClassifierKind::Mlp1Hidden { hidden: 5, activation: Activation::Tanh },
            ClassifierKind::Mlp1Hidden { hidden: 5, activation: Activation::Relu },
        ];
        for case in 0..30 {
            let kind = kinds[case % 3];
            let m = Classifier::init(kind, Shape::flat(6), 3, 1.5, case as u64).unwrap();
            let x = rng::standard_normal(&mut r, Shape::flat(6));
            let y = r.random_range(0..3);
            let g = input_gradient(&m, &x, y).unwrap();
            let fd = central_difference(&m, &x, y);
            let num: f64 = g.as_slice().iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den = fd.iter().map(|b| b * b).sum::<f64>().sqrt();
            assert!(num / den <= 1e-6, "case {case}: {}", num / den);
        }
    }

    fn blobs(seed: u64, n: usize) -> LabeledDataset {
        let mut r = rng::seeded(seed);
        let mut samples = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let y = i % 2;
            let c = if y == 0 { [-2.0, -1.0] } else { [2.0, 1.5] };
            let z = rng::standard_normal(&mut r, Shape::flat(2));
            samples.push(v(&[c[0] + 0.5 * z.as_slice()[0], c[1] + 0.5 * z.as_slice()[1]]));
            labels.push(y);
        }
        LabeledDataset::new(samples, labels, 2).unwrap()
    }

    /// Perceptron oracle: converges with zero mistakes iff the data is
    /// linearly separable (within the epoch cap).
    fn perceptron_separates(data: &LabeledDataset) -> bool {
        let mut w = [0.0; 3];
        for _ in 0..1000 {
            let mut mistakes = 0;
            for (x, y) in data.iter() {
                let s = if y == 1 { 1.0 } else { -1.0 };
                let xs = x.as_slice();
                let act = w[0] * xs[0] + w[1] * xs[1] + w[2];
                if s * act <= 0.0 {
                    w[0] += s * xs[0];
                    w[1] += s * xs[1];
                    w[2] += s;
                    mistakes += 1;
                }
            }
            if mistakes == 0 {
                return true;
            }
        }
        false
    }

    #[test]
    fn separable_blobs_train_to_high_accuracy() {
        let data = blobs(3, 200);
        assert!(perceptron_separates(&data));
        let m = train_classifier(&data, ClassifierKind::SoftmaxLinear, 300, 0.5, 1).unwrap();
        assert!(m.train_accuracy().unwrap() >= 0.99);
        let mlp = train_classifier(
            &data,
            ClassifierKind::Mlp1Hidden { hidden: 8, activation: Activation::Tanh },
            300,
            0.5,
            1,
        )
        .unwrap();
        assert!(mlp.train_accuracy().unwrap() >= 0.99);
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let data = blobs(4, 20);
        let init = Classifier::init(ClassifierKind::SoftmaxLinear, Shape::flat(2), 2, 0.1, 9).unwrap();
        let trained = train_classifier(&data, ClassifierKind::SoftmaxLinear, 1, 0.0, 9).unwrap();
        assert_eq!(init.layers(), trained.layers());
    }

    #[test]
    fn training_is_deterministic() {
        let data = blobs(5, 40);
        let kind = ClassifierKind::Mlp1Hidden { hidden: 4, activation: Activation::Relu };
        let a = train_classifier(&data, kind, 20, 0.3, 2).unwrap();
        let b = train_classifier(&data, kind, 20, 0.3, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn divergence_reports_epoch() {
        let samples = vec![v(&[1e200, -1e200]), v(&[-1e200, 1e200])];
        let data = LabeledDataset::new(samples, vec![0, 1], 2).unwrap();
        let res = train_classifier(&data, ClassifierKind::SoftmaxLinear, 10, 1e10, 0);
        assert!(matches!(res, Err(Error::Divergence { .. })), "{res:?}");
    }

    #[test]
    fn shape_and_label_errors() {
        let m = linear(vec![0.0; 4], vec![0.0; 2], 2);
        assert!(matches!(forward_loss(&m, &v(&[0.0]), 0), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(input_gradient(&m, &v(&[0.0, 0.0]), 2), Err(Error::LabelOutOfRange { .. })));
        assert!(LabeledDataset::new(vec![v(&[0.0])], vec![0, 1], 2).is_err());
        assert!(LabeledDataset::new(vec![v(&[0.0])], vec![3], 2).is_err());
    }

    #[test]
    fn argmax_ties_break_low() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }
}

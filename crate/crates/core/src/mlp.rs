//! Single-hidden-layer perceptron trained by per-sample backpropagation.
//!
//! Both layers use the sloped sigmoid `1 / (1 + exp(-lambda * z))` and the
//! cost is half the summed squared output error. Weight matrices are stored
//! row-major with the bias as the last column of each row.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper bound (exclusive) on initial weight magnitude.
pub const INIT_RANGE: f64 = 0.2;
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum MlpError {
    #[error("initial weight magnitude {magnitude} = sqrt({eta}/{fan_in}) is not below {INIT_RANGE}")]
    InitMagnitude {
        magnitude: f64,
        eta: f64,
        fan_in: usize,
    },
    #[error("layer sizes must be positive, got {0:?}")]
    LayerSizes([usize; 3]),
    #[error("expected input of length {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("training set is empty")]
    EmptyDataset,
    #[error("loss became non-finite in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("model file: {0}")]
    Format(String),
    #[error("unsupported model file version {0}")]
    Version(u64),
    #[error("model file shape mismatch: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sigmoid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// `[inputs, hidden, outputs]`.
    pub layer_sizes: [usize; 3],
    /// `hidden x (inputs + 1)`.
    pub weights_hidden: Vec<f64>,
    /// `outputs x (hidden + 1)`.
    pub weights_output: Vec<f64>,
    pub activation: Activation,
    /// Sigmoid slope.
    pub lambda: f64,
    /// Subtracted from every hidden pre-activation.
    pub internal_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub internal_threshold: f64,
    pub max_epochs: usize,
    /// Training stops once the mean epoch loss is at or below this.
    pub target_error: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            momentum: 0.05,
            internal_threshold: 0.0,
            max_epochs: 200,
            target_error: 1e-3,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), MlpError> {
        if !(self.learning_rate > 0.0 && self.learning_rate < 1.0) {
            return Err(MlpError::Config(format!(
                "learning rate must lie in (0, 1), got {}",
                self.learning_rate
            )));
        }
        if !(self.momentum >= 0.0 && self.momentum < 1.0) {
            return Err(MlpError::Config(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.max_epochs == 0 {
            return Err(MlpError::Config("max_epochs must be positive".into()));
        }
        Ok(())
    }
}

fn check_sizes(layer_sizes: [usize; 3]) -> Result<(), MlpError> {
    if layer_sizes.contains(&0) {
        return Err(MlpError::LayerSizes(layer_sizes));
    }
    Ok(())
}

fn signed_fill(rng: &mut ChaCha8Rng, len: usize, magnitude: f64) -> Vec<f64> {
    (0..len)
        .map(|_| if rng.gen::<bool>() { magnitude } else { -magnitude })
        .collect()
}

/// Magnitude `sqrt(eta / fan_in)` shared by every weight of a layer.
pub fn init_magnitude(eta: f64, fan_in: usize) -> Result<f64, MlpError> {
    let magnitude = (eta / fan_in as f64).sqrt();
    if !(magnitude < INIT_RANGE) {
        return Err(MlpError::InitMagnitude {
            magnitude,
            eta,
            fan_in,
        });
    }
    Ok(magnitude)
}

/// Every weight (bias included) gets magnitude `sqrt(eta / fan_in)` for its
/// layer's fan-in and a random sign drawn from `seed`.
pub fn init_weights(
    layer_sizes: [usize; 3],
    eta: f64,
    lambda: f64,
    seed: u64,
) -> Result<MlpModel, MlpError> {
    check_sizes(layer_sizes)?;
    let [q, p, c] = layer_sizes;
    let hidden_mag = init_magnitude(eta, q)?;
    let output_mag = init_magnitude(eta, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(MlpModel {
        layer_sizes,
        weights_hidden: signed_fill(&mut rng, p * (q + 1), hidden_mag),
        weights_output: signed_fill(&mut rng, c * (p + 1), output_mag),
        activation: Activation::Sigmoid,
        lambda,
        internal_threshold: 0.0,
    })
}

/// Uniform initialization in `(-bound, bound)`, for small networks where the
/// fan-in rule would exceed the magnitude guard.
pub fn init_uniform(
    layer_sizes: [usize; 3],
    bound: f64,
    lambda: f64,
    seed: u64,
) -> Result<MlpModel, MlpError> {
    check_sizes(layer_sizes)?;
    let [q, p, c] = layer_sizes;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fill = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.gen_range(-bound..bound)).collect() };
    let weights_hidden = fill(p * (q + 1));
    let weights_output = fill(c * (p + 1));
    Ok(MlpModel {
        layer_sizes,
        weights_hidden,
        weights_output,
        activation: Activation::Sigmoid,
        lambda,
        internal_threshold: 0.0,
    })
}

/// Activations of both layers for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

/// Gradient of the loss with respect to every weight, same layout as the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

impl MlpModel {
    pub fn inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn hidden(&self) -> usize {
        self.layer_sizes[1]
    }

    pub fn outputs(&self) -> usize {
        self.layer_sizes[2]
    }

    fn sigmoid(&self, z: f64) -> f64 {
        1.0 / (1.0 + (-self.lambda * z).exp())
    }

    pub fn forward_pass(&self, x: &[f64]) -> Result<ForwardPass, MlpError> {
        let [q, p, c] = self.layer_sizes;
        if x.len() != q {
            return Err(MlpError::Dimension {
                expected: q,
                actual: x.len(),
            });
        }
        let hidden: Vec<f64> = self
            .weights_hidden
            .chunks_exact(q + 1)
            .map(|row| {
                let z = dot(&row[..q], x) + row[q] - self.internal_threshold;
                self.sigmoid(z)
            })
            .collect();
        let output = self
            .weights_output
            .chunks_exact(p + 1)
            .map(|row| self.sigmoid(dot(&row[..p], &hidden) + row[p]))
            .collect::<Vec<_>>();
        debug_assert_eq!(output.len(), c);
        Ok(ForwardPass { hidden, output })
    }

    /// Output activations, each in `(0, 1)`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, MlpError> {
        Ok(self.forward_pass(x)?.output)
    }

    /// Analytic gradient of [`loss`] for one `(input, target)` pair.
    pub fn gradient(&self, x: &[f64], target: &[f64]) -> Result<Gradients, MlpError> {
        let pass = self.forward_pass(x)?;
        Ok(self.backward(x, target, &pass))
    }

    fn backward(&self, x: &[f64], target: &[f64], pass: &ForwardPass) -> Gradients {
        let [q, p, _] = self.layer_sizes;
        let lambda = self.lambda;
        // dPhi/dz at each output unit.
        let out_delta: Vec<f64> = pass
            .output
            .iter()
            .zip(target)
            .map(|(&y, &e)| (y - e) * lambda * y * (1.0 - y))
            .collect();
        let mut output = Vec::with_capacity(self.weights_output.len());
        for &d in &out_delta {
            output.extend(pass.hidden.iter().map(|&h| d * h));
            output.push(d);
        }
        let mut hidden = Vec::with_capacity(self.weights_hidden.len());
        for (j, &h) in pass.hidden.iter().enumerate() {
            let back: f64 = out_delta
                .iter()
                .enumerate()
                .map(|(l, &d)| d * self.weights_output[l * (p + 1) + j])
                .sum();
            let d = back * lambda * h * (1.0 - h);
            hidden.extend(x.iter().map(|&xi| d * xi));
            hidden.push(d);
        }
        debug_assert_eq!(hidden.len(), p * (q + 1));
        Gradients { hidden, output }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Half the sum of squared errors.
pub fn loss(outputs: &[f64], targets: &[f64]) -> f64 {
    assert_eq!(outputs.len(), targets.len(), "output/target length mismatch");
    0.5 * outputs
        .iter()
        .zip(targets)
        .map(|(y, e)| (y - e) * (y - e))
        .sum::<f64>()
}

/// One training example: input vector and target activations.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

/// Trained model plus the mean loss of every epoch run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: MlpModel,
    pub history: Vec<f64>,
}

/// Stochastic gradient descent with momentum, one update per example,
/// example order reshuffled each epoch from `config.seed`.
pub fn train(
    model: MlpModel,
    dataset: &[Example],
    config: &TrainConfig,
) -> Result<TrainOutcome, MlpError> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(MlpError::EmptyDataset);
    }
    let [q, _, c] = model.layer_sizes;
    for ex in dataset {
        if ex.input.len() != q {
            return Err(MlpError::Dimension {
                expected: q,
                actual: ex.input.len(),
            });
        }
        if ex.target.len() != c {
            return Err(MlpError::Dimension {
                expected: c,
                actual: ex.target.len(),
            });
        }
    }

    let mut model = model;
    model.internal_threshold = config.internal_threshold;
    let eta = config.learning_rate;
    let mu = config.momentum;
    let mut vel_hidden = vec![0.0; model.weights_hidden.len()];
    let mut vel_output = vec![0.0; model.weights_output.len()];
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut history = Vec::new();

    for epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let ex = &dataset[i];
            let pass = model.forward_pass(&ex.input)?;
            total += loss(&pass.output, &ex.target);
            let g = model.backward(&ex.input, &ex.target, &pass);
            step(&mut model.weights_hidden, &mut vel_hidden, &g.hidden, eta, mu);
            step(&mut model.weights_output, &mut vel_output, &g.output, eta, mu);
        }
        let mean = total / dataset.len() as f64;
        if !mean.is_finite() {
            return Err(MlpError::Diverged { epoch });
        }
        history.push(mean);
        if mean <= config.target_error {
            break;
        }
    }
    Ok(TrainOutcome { model, history })
}

fn step(weights: &mut [f64], velocity: &mut [f64], grad: &[f64], eta: f64, mu: f64) {
    for ((w, v), g) in weights.iter_mut().zip(velocity.iter_mut()).zip(grad) {
        *v = -eta * g + mu * *v;
        *w += *v;
    }
}

/// Argmax over output activations, lowest index on ties, with confidence
/// `max / sum`.
pub fn argmax_confidence(outputs: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, &y) in outputs.iter().enumerate() {
        if y > outputs[best] {
            best = i;
        }
    }
    let sum: f64 = outputs.iter().sum();
    let confidence = if sum > 0.0 { outputs[best] / sum } else { 0.0 };
    (best, confidence)
}

pub fn predict(model: &MlpModel, x: &[f64]) -> Result<(usize, f64), MlpError> {
    Ok(argmax_confidence(&model.forward(x)?))
}

/// A trained network for one stroke-count cluster together with the class
/// labels of its output units.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub cluster_id: u8,
    pub class_labels: Vec<String>,
    pub model: MlpModel,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u64,
    activation: Activation,
    lambda: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    internal_threshold: f64,
    layer_sizes: [usize; 3],
    weights_hidden: Vec<f64>,
    weights_output: Vec<f64>,
    cluster_id: u8,
    class_labels: Vec<String>,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

pub fn save_model(model: &ClusterModel) -> Vec<u8> {
    let m = &model.model;
    let file = ModelFile {
        version: u64::from(MODEL_FORMAT_VERSION),
        activation: m.activation,
        lambda: m.lambda,
        internal_threshold: m.internal_threshold,
        layer_sizes: m.layer_sizes,
        weights_hidden: m.weights_hidden.clone(),
        weights_output: m.weights_output.clone(),
        cluster_id: model.cluster_id,
        class_labels: model.class_labels.clone(),
    };
    let mut out = serde_json::to_vec(&file).expect("model always serializes");
    out.push(b'\n');
    out
}

pub fn load_model(bytes: &[u8]) -> Result<ClusterModel, MlpError> {
    let probe: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| MlpError::Format(e.to_string()))?;
    match probe.get("version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(MODEL_FORMAT_VERSION) => {}
        Some(v) => return Err(MlpError::Version(v)),
        None => return Err(MlpError::Format("missing version".into())),
    }
    let file: ModelFile =
        serde_json::from_value(probe).map_err(|e| MlpError::Format(e.to_string()))?;
    let [q, p, c] = file.layer_sizes;
    if file.layer_sizes.contains(&0) {
        return Err(MlpError::Shape(format!("layer sizes {:?}", file.layer_sizes)));
    }
    if file.weights_hidden.len() != p * (q + 1) {
        return Err(MlpError::Shape(format!(
            "weights_hidden has {} entries, expected {}",
            file.weights_hidden.len(),
            p * (q + 1)
        )));
    }
    if file.weights_output.len() != c * (p + 1) {
        return Err(MlpError::Shape(format!(
            "weights_output has {} entries, expected {}",
            file.weights_output.len(),
            c * (p + 1)
        )));
    }
    if file.class_labels.len() != c {
        return Err(MlpError::Shape(format!(
            "{} class labels for {c} outputs",
            file.class_labels.len()
        )));
    }
    Ok(ClusterModel {
        cluster_id: file.cluster_id,
        class_labels: file.class_labels,
        model: MlpModel {
            layer_sizes: file.layer_sizes,
            weights_hidden: file.weights_hidden,
            weights_output: file.weights_output,
            activation: file.activation,
            lambda: file.lambda,
            internal_threshold: file.internal_threshold,
        },
    })
}

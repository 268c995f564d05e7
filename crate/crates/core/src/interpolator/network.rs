//! The softmax-kernel network.
//!
//! One hidden neuron per representative contract computes the activation
//! `a_i = w_i . f_i(z) + b_i` from that representative's feature block; the
//! output layer is a softmax over the activations, and the liability estimate
//! is the resulting convex combination of the representatives' known values:
//!
//! ```text
//! y_hat(z) = sum_i exp(a_i) y(z_i) / sum_j exp(a_j)
//! ```
//!
//! Training the weights and biases calibrates, per attribute and direction, a
//! kernel bandwidth around each representative.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::portfolio::VaContract;

use super::features::{extract_features, FeatureMatrix, FeatureRanges, FEATURE_COUNT};

/// Weights and biases: a 14-vector and a scalar per representative.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NetworkParameters<F> {
    n: usize,
    weights: Vec<F>,
    biases: Vec<F>,
}

impl<F: Real> NetworkParameters<F> {
    /// All-zero parameters: the network starts as the uniform average of the
    /// representative values.
    pub fn zeros(n_representatives: usize) -> Self {
        NetworkParameters {
            n: n_representatives,
            weights: vec![F::zero(); n_representatives * FEATURE_COUNT],
            biases: vec![F::zero(); n_representatives],
        }
    }

    pub fn n_representatives(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight_row(&self, i: usize) -> &[F] {
        &self.weights[i * FEATURE_COUNT..(i + 1) * FEATURE_COUNT]
    }

    pub fn weight_row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.weights[i * FEATURE_COUNT..(i + 1) * FEATURE_COUNT]
    }

    pub fn bias(&self, i: usize) -> F {
        self.biases[i]
    }

    pub fn bias_mut(&mut self, i: usize) -> &mut F {
        &mut self.biases[i]
    }

    /// `self += factor * other`, over every weight and bias.
    pub fn scaled_add(&mut self, factor: F, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += factor * *b;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            *a += factor * *b;
        }
    }

    pub fn scale(&mut self, factor: F) {
        for a in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            *a *= factor;
        }
    }

    pub fn all_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .all(|v| v.is_finite())
    }
}

/// Hidden-layer activations `a_i = w_i . f_i + b_i`.
pub fn activations<F: Real>(params: &NetworkParameters<F>, features: &FeatureMatrix<F>) -> Vec<F> {
    debug_assert_eq!(features.len(), params.n);
    features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let mut a = params.biases[i];
            for (w, x) in params.weight_row(i).iter().zip(f.iter()) {
                a += *w * *x;
            }
            a
        })
        .collect()
}

/// Softmax with max-activation subtraction; safe against overflow when
/// weights grow large during training.
pub fn softmax<F: Real>(activations: &[F]) -> Vec<F> {
    let max = activations
        .iter()
        .copied()
        .fold(F::neg_infinity(), F::max);
    let mut out: Vec<F> = activations.iter().map(|&a| (a - max).exp()).collect();
    let total: F = out.iter().copied().sum();
    for o in &mut out {
        *o /= total;
    }
    out
}

/// Network estimate together with the softmax outputs.
pub fn forward_with_outputs<F: Real>(
    params: &NetworkParameters<F>,
    features: &FeatureMatrix<F>,
    rep_values: &[F],
) -> (F, Vec<F>) {
    let outputs = softmax(&activations(params, features));
    let estimate = outputs
        .iter()
        .zip(rep_values)
        .map(|(&o, &y)| o * y)
        .sum();
    (estimate, outputs)
}

/// Network estimate `y_hat(z)` for one feature matrix.
pub fn forward<F: Real>(
    params: &NetworkParameters<F>,
    features: &FeatureMatrix<F>,
    rep_values: &[F],
) -> F {
    forward_with_outputs(params, features, rep_values).0
}

/// Mean squared error over a batch: `1/(2|B|) sum_k (y_hat_k - y_k)^2`.
pub fn mse<F: Real>(
    params: &NetworkParameters<F>,
    features: &[FeatureMatrix<F>],
    targets: &[F],
    rep_values: &[F],
) -> F {
    debug_assert_eq!(features.len(), targets.len());
    let half = F::of(0.5);
    let sum: F = features
        .iter()
        .zip(targets)
        .map(|(f, &y)| {
            let err = forward(params, f, rep_values) - y;
            err * err
        })
        .sum();
    half * sum / F::of(features.len() as f64)
}

/// Analytic gradient of the batch MSE with respect to every weight and bias.
///
/// With `o = softmax(a)` and `y_hat = sum o_i y_i`, the chain rule gives
/// `d y_hat / d a_i = o_i (y_i - y_hat)`, so each sample contributes
/// `(y_hat - y) o_i (y_i - y_hat) / |B|` to the bias slot `i` and the same
/// factor times the feature block to the weight row.
pub fn gradient<F: Real>(
    params: &NetworkParameters<F>,
    features: &[FeatureMatrix<F>],
    targets: &[F],
    rep_values: &[F],
) -> NetworkParameters<F> {
    let mut grad = NetworkParameters::zeros(params.n);
    let batch_scale = F::one() / F::of(features.len() as f64);
    for (f, &y) in features.iter().zip(targets) {
        accumulate_gradient(params, f, y, rep_values, batch_scale, &mut grad);
    }
    grad
}

/// Batch gradient over indices into precomputed feature matrices; same math
/// as [`gradient`] without materializing the batch.
pub(crate) fn gradient_indexed<F: Real>(
    params: &NetworkParameters<F>,
    all_features: &[FeatureMatrix<F>],
    all_targets: &[F],
    batch: &[usize],
    rep_values: &[F],
) -> NetworkParameters<F> {
    let mut grad = NetworkParameters::zeros(params.n);
    let batch_scale = F::one() / F::of(batch.len() as f64);
    for &k in batch {
        accumulate_gradient(
            params,
            &all_features[k],
            all_targets[k],
            rep_values,
            batch_scale,
            &mut grad,
        );
    }
    grad
}

fn accumulate_gradient<F: Real>(
    params: &NetworkParameters<F>,
    features: &FeatureMatrix<F>,
    target: F,
    rep_values: &[F],
    batch_scale: F,
    grad: &mut NetworkParameters<F>,
) {
    let (estimate, outputs) = forward_with_outputs(params, features, rep_values);
    let err = (estimate - target) * batch_scale;
    for i in 0..params.n {
        let g = err * outputs[i] * (rep_values[i] - estimate);
        grad.biases[i] += g;
        let row = &mut grad.weights[i * FEATURE_COUNT..(i + 1) * FEATURE_COUNT];
        for (slot, &x) in row.iter_mut().zip(features[i].iter()) {
            *slot += g * x;
        }
    }
}

/// Portfolio liability estimate: the sum of network estimates over the
/// portfolio, de-normalized by `normalizer`. `rep_values` are the
/// representatives' normalized liabilities.
pub fn estimate_portfolio_liability<F: Real>(
    params: &NetworkParameters<F>,
    portfolio: &[VaContract<F>],
    representatives: &[VaContract<F>],
    rep_values: &[F],
    ranges: &FeatureRanges<F>,
    normalizer: F,
) -> Result<F> {
    use rayon::prelude::*;
    let estimates: Vec<F> = portfolio
        .par_iter()
        .map(|z| {
            extract_features(z, representatives, ranges)
                .map(|f| forward(params, &f, rep_values))
        })
        .collect::<Result<Vec<F>>>()?;
    let total: F = estimates.iter().copied().sum();
    Ok(total * normalizer)
}

const NETWORK_MAGIC: &[u8; 4] = b"VASN";
const NETWORK_VERSION: u32 = 1;

/// Writes the parameter file. Layout (all integers and floats little-endian):
///
/// ```text
/// offset  size  field
/// 0       4     magic "VASN"
/// 4       4     format version (u32) = 1
/// 8       4     representative count n (u32)
/// 12      4     feature count per representative (u32) = 14
/// 16      8     target normalizer (f64)
/// 24      8n*fc weights, row-major per representative (f64)
/// ...     8n    biases (f64)
/// ```
pub fn save_network<F: Real, W: Write>(
    out: &mut W,
    params: &NetworkParameters<F>,
    normalizer: F,
) -> Result<()> {
    out.write_all(NETWORK_MAGIC)?;
    out.write_all(&NETWORK_VERSION.to_le_bytes())?;
    out.write_all(&(params.n as u32).to_le_bytes())?;
    out.write_all(&(FEATURE_COUNT as u32).to_le_bytes())?;
    out.write_all(&normalizer.to_f64_lossy().to_le_bytes())?;
    for w in &params.weights {
        out.write_all(&w.to_f64_lossy().to_le_bytes())?;
    }
    for b in &params.biases {
        out.write_all(&b.to_f64_lossy().to_le_bytes())?;
    }
    Ok(())
}

/// Reads a parameter file written by [`save_network`].
pub fn load_network<F: Real, R: Read>(input: &mut R) -> Result<(NetworkParameters<F>, F)> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != NETWORK_MAGIC {
        return Err(Error::Schema("not a network parameter file".into()));
    }
    let version = read_u32(input)?;
    if version != NETWORK_VERSION {
        return Err(Error::Schema(format!(
            "unsupported network file version {version}"
        )));
    }
    let n = read_u32(input)? as usize;
    let feature_count = read_u32(input)? as usize;
    if feature_count != FEATURE_COUNT {
        return Err(Error::Schema(format!(
            "expected {FEATURE_COUNT} features per representative, file has {feature_count}"
        )));
    }
    let normalizer = F::of(read_f64(input)?);
    let mut weights = Vec::with_capacity(n * FEATURE_COUNT);
    for _ in 0..n * FEATURE_COUNT {
        weights.push(F::of(read_f64(input)?));
    }
    let mut biases = Vec::with_capacity(n);
    for _ in 0..n {
        biases.push(F::of(read_f64(input)?));
    }
    Ok((NetworkParameters { n, weights, biases }, normalizer))
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

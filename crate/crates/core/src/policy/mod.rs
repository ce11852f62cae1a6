//! Policy network for node selection.
//!
//! A shared 4-weight kernel plus bias scores every substrate node from its
//! normalized feature column, a softmax restricted to feasible nodes turns
//! the scores into selection probabilities, and the log-probability
//! gradient of each choice is accumulated REINFORCE-style, weighted by the
//! request's revenue/cost ratio.

mod train;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::embedding::NodeMapper;
use crate::error::{Result, VneError};
use crate::features::{build_feature_matrix, DistanceTable, FeatureMatrix, FEATURES};
use crate::network::{NodeId, SubstrateNetwork, VirtualRequest};
use crate::scalar::Scalar;

pub use train::{evaluate, train, TrainingCurve, WindowStats, TRAINING_CSV_HEADER};

pub const DEFAULT_LEARNING_RATE: f64 = 0.005;
pub const DEFAULT_BATCH_SIZE: usize = 100;
pub const DEFAULT_INIT_STD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams<F> {
    pub kernel: [F; FEATURES],
    pub bias: F,
    pub learning_rate: F,
    pub batch_size: usize,
}

impl<F: Scalar> PolicyParams<F> {
    pub fn new(kernel: [F; FEATURES], bias: F, learning_rate: F, batch_size: usize) -> Result<Self> {
        let params = PolicyParams {
            kernel,
            bias,
            learning_rate,
            batch_size,
        };
        params.validate()?;
        Ok(params)
    }

    /// Kernel and bias drawn from a zero-mean normal with deviation `std`.
    pub fn init_normal<R: Rng + ?Sized>(rng: &mut R, std: f64, learning_rate: F, batch_size: usize) -> Result<Self> {
        let normal = Normal::new(0.0, std).map_err(|e| VneError::config("init_std", e.to_string()))?;
        let mut kernel = [F::zero(); FEATURES];
        for w in &mut kernel {
            *w = F::of(normal.sample(rng));
        }
        let bias = F::of(normal.sample(rng));
        Self::new(kernel, bias, learning_rate, batch_size)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.kernel.iter().all(|w| w.is_finite()) || !self.bias.is_finite() {
            return Err(VneError::contract("policy parameters must be finite"));
        }
        if !(self.learning_rate > F::zero() && self.learning_rate.is_finite()) {
            return Err(VneError::config("learning_rate", "must be positive"));
        }
        if self.batch_size == 0 {
            return Err(VneError::config("batch_size", "must be at least 1"));
        }
        Ok(())
    }
}

/// `kernel · column + bias` for every node.
pub fn score<F: Scalar>(params: &PolicyParams<F>, features: &FeatureMatrix<F>) -> Vec<F> {
    features
        .normalized()
        .iter()
        .map(|col| {
            col.iter()
                .zip(&params.kernel)
                .fold(params.bias, |acc, (&x, &w)| acc + w * x)
        })
        .collect()
}

/// Softmax over the feasible entries only; infeasible entries get exactly
/// zero. Stabilized by subtracting the largest feasible score.
pub fn masked_softmax<F: Scalar>(scores: &[F], feasible: &[bool]) -> Result<Vec<F>> {
    assert_eq!(scores.len(), feasible.len(), "mask length mismatch");
    let max = scores
        .iter()
        .zip(feasible)
        .filter(|(_, &ok)| ok)
        .map(|(&s, _)| s)
        .fold(None, |m: Option<F>, s| Some(m.map_or(s, |m| m.max(s))))
        .ok_or(VneError::NoCandidate)?;
    let mut probs: Vec<F> = scores
        .iter()
        .zip(feasible)
        .map(|(&s, &ok)| if ok { (s - max).exp() } else { F::zero() })
        .collect();
    let total: F = probs.iter().copied().sum();
    for p in &mut probs {
        *p = *p / total;
    }
    Ok(probs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleMode {
    /// Draw from the distribution (training).
    #[default]
    Stochastic,
    /// Highest probability, lowest index on ties (testing).
    Greedy,
}

/// One node choice together with the gradient of its log-probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision<F> {
    pub node: NodeId,
    pub probabilities: Vec<F>,
    pub grad_kernel: [F; FEATURES],
    /// Always zero: a shared bias cancels in the softmax.
    pub grad_bias: F,
}

/// Picks a node from `probabilities` and records
/// `d log p(node) / d kernel = v_node - sum_i p_i v_i`.
pub fn sample_node<F: Scalar, R: Rng + ?Sized>(
    probabilities: &[F],
    features: &FeatureMatrix<F>,
    mode: SampleMode,
    rng: &mut R,
) -> Decision<F> {
    let node = match mode {
        SampleMode::Greedy => argmax(probabilities),
        SampleMode::Stochastic => draw(probabilities, rng),
    };
    let columns = features.normalized();
    let mut expected = [F::zero(); FEATURES];
    for (p, col) in probabilities.iter().zip(columns) {
        if *p > F::zero() {
            for f in 0..FEATURES {
                expected[f] = expected[f] + *p * col[f];
            }
        }
    }
    let mut grad_kernel = [F::zero(); FEATURES];
    for f in 0..FEATURES {
        grad_kernel[f] = columns[node][f] - expected[f];
    }
    Decision {
        node,
        probabilities: probabilities.to_vec(),
        grad_kernel,
        grad_bias: F::zero(),
    }
}

fn argmax<F: Scalar>(probabilities: &[F]) -> NodeId {
    let mut best = 0;
    for (i, &p) in probabilities.iter().enumerate() {
        if p > probabilities[best] {
            best = i;
        }
    }
    best
}

fn draw<F: Scalar, R: Rng + ?Sized>(probabilities: &[F], rng: &mut R) -> NodeId {
    let u = F::of(rng.random::<f64>());
    let mut cumulative = F::zero();
    let mut last_positive = 0;
    for (i, &p) in probabilities.iter().enumerate() {
        if p > F::zero() {
            cumulative = cumulative + p;
            last_positive = i;
            if u < cumulative {
                return i;
            }
        }
    }
    // rounding left u above the final cumulative sum
    last_positive
}

/// Reward-weighted gradient sums since the last batch update.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GradientAccumulator<F> {
    pub kernel: [F; FEATURES],
    pub bias: F,
    /// Requests seen since the last update, embedded or not.
    pub requests: usize,
}

impl<F: Scalar> GradientAccumulator<F> {
    pub fn new() -> Self {
        GradientAccumulator {
            kernel: [F::zero(); FEATURES],
            bias: F::zero(),
            requests: 0,
        }
    }

    pub fn reset(&mut self) {
        *self = Self::new();
    }

    /// Counts a request that failed to embed; its gradient is discarded.
    pub fn skip_request(&mut self) {
        self.requests += 1;
    }
}

/// Adds `learning_rate * reward * g_s` where `g_s` sums the decisions'
/// log-probability gradients, and counts the request.
pub fn accumulate_gradient<F: Scalar>(
    acc: &mut GradientAccumulator<F>,
    decisions: &[Decision<F>],
    reward: F,
    learning_rate: F,
) {
    let scale = learning_rate * reward;
    for d in decisions {
        for f in 0..FEATURES {
            acc.kernel[f] = acc.kernel[f] + scale * d.grad_kernel[f];
        }
        acc.bias = acc.bias + scale * d.grad_bias;
    }
    acc.requests += 1;
}

/// Gradient-ascent step with the accumulated sums; resets the accumulator.
pub fn batch_update<F: Scalar>(params: &mut PolicyParams<F>, acc: &mut GradientAccumulator<F>) -> Result<()> {
    if acc.requests != params.batch_size {
        return Err(VneError::contract(format!(
            "batch update after {} of {} requests",
            acc.requests, params.batch_size
        )));
    }
    for f in 0..FEATURES {
        params.kernel[f] = params.kernel[f] + acc.kernel[f];
    }
    params.bias = params.bias + acc.bias;
    acc.reset();
    Ok(())
}

/// Log-probability of choosing `node`, as a function of the parameters.
pub fn log_probability<F: Scalar>(
    params: &PolicyParams<F>,
    features: &FeatureMatrix<F>,
    feasible: &[bool],
    node: NodeId,
) -> Result<F> {
    let probs = masked_softmax(&score(params, features), feasible)?;
    Ok(probs[node].ln())
}

/// [`NodeMapper`] backed by the policy. Decisions of the request in
/// progress are kept until [`PolicyMapper::take_decisions`].
pub struct PolicyMapper<'a, F, R: ?Sized> {
    params: PolicyParams<F>,
    dist: &'a DistanceTable,
    mode: SampleMode,
    rng: &'a mut R,
    decisions: Vec<Decision<F>>,
}

impl<'a, F: Scalar, R: Rng + ?Sized> PolicyMapper<'a, F, R> {
    pub fn new(params: PolicyParams<F>, dist: &'a DistanceTable, mode: SampleMode, rng: &'a mut R) -> Self {
        PolicyMapper {
            params,
            dist,
            mode,
            rng,
            decisions: Vec::new(),
        }
    }

    pub fn params(&self) -> &PolicyParams<F> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut PolicyParams<F> {
        &mut self.params
    }

    pub fn into_params(self) -> PolicyParams<F> {
        self.params
    }

    pub fn take_decisions(&mut self) -> Vec<Decision<F>> {
        std::mem::take(&mut self.decisions)
    }
}

impl<F: Scalar, R: Rng + ?Sized> NodeMapper for PolicyMapper<'_, F, R> {
    fn select(
        &mut self,
        net: &SubstrateNetwork,
        vnr: &VirtualRequest,
        mapped: &[NodeId],
        vnode: usize,
    ) -> Option<NodeId> {
        let features = build_feature_matrix::<F>(net, mapped, self.dist);
        let vn = &vnr.nodes[vnode];
        let feasible: Vec<bool> = (0..net.node_count())
            .map(|sn| !mapped.contains(&sn) && net.node_feasible(sn, vn))
            .collect();
        let probs = masked_softmax(&score(&self.params, &features), &feasible).ok()?;
        let decision = sample_node(&probs, &features, self.mode, self.rng);
        let node = decision.node;
        self.decisions.push(decision);
        Some(node)
    }
}

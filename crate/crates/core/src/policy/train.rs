use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{accumulate_gradient, batch_update, GradientAccumulator, PolicyMapper, PolicyParams, SampleMode};
use crate::embedding::EmbedOutcome;
use crate::error::Result;
use crate::features::floyd_warshall;
use crate::metrics::MetricsSeries;
use crate::network::{SubstrateNetwork, Units};
use crate::scalar::Scalar;
use crate::scenario::EventStream;
use crate::simulation::{replay, run_metrics};

pub const TRAINING_CSV_HEADER: &str =
    "epoch,window,window_end_time,arrivals,acceptances,acc_ratio,mean_reward,cum_revenue,cum_cost,avg_revenue,rc_ratio,rc_defined";

/// Statistics of one window of `batch_size` consecutive arrivals.
///
/// Per-window counters cover the window alone; `cum_*` fields accumulate
/// from the start of the epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub epoch: usize,
    pub window: usize,
    pub window_end_time: f64,
    pub arrivals: u64,
    pub acceptances: u64,
    pub reward_sum: f64,
    pub cum_revenue: Units,
    pub cum_cost: Units,
    pub elapsed: f64,
}

impl WindowStats {
    pub fn acc_ratio(&self) -> f64 {
        if self.arrivals == 0 {
            0.0
        } else {
            self.acceptances as f64 / self.arrivals as f64
        }
    }

    /// Reward summed over the window divided by its arrivals (rejections
    /// count as zero reward).
    pub fn mean_reward(&self) -> f64 {
        if self.arrivals == 0 {
            0.0
        } else {
            self.reward_sum / self.arrivals as f64
        }
    }

    pub fn avg_revenue(&self) -> f64 {
        if self.elapsed > 0.0 {
            self.cum_revenue as f64 / self.elapsed
        } else {
            0.0
        }
    }

    pub fn rc_ratio(&self) -> Option<f64> {
        (self.cum_cost > 0).then(|| self.cum_revenue as f64 / self.cum_cost as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingCurve {
    pub windows: Vec<WindowStats>,
    pub updates: usize,
}

impl TrainingCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(TRAINING_CSV_HEADER);
        out.push('\n');
        for w in &self.windows {
            let rc = w.rc_ratio();
            let _ = writeln!(
                out,
                "{},{},{:.6},{},{},{:.6},{:.6},{},{},{:.6},{:.6},{}",
                w.epoch,
                w.window,
                w.window_end_time,
                w.arrivals,
                w.acceptances,
                w.acc_ratio(),
                w.mean_reward(),
                w.cum_revenue,
                w.cum_cost,
                w.avg_revenue(),
                rc.unwrap_or(1.0),
                u8::from(rc.is_some())
            );
        }
        out
    }
}

/// Trains `params` by replaying `stream` `epochs` times, each time on a
/// fresh copy of `net`.
///
/// Nodes are sampled from the policy; a request that embeds contributes
/// its decisions' gradients weighted by its revenue/cost ratio, a rejected
/// one only advances the request counter. Parameters move every
/// `batch_size` requests. One curve row is emitted per `batch_size`
/// arrivals of each epoch.
pub fn train<F: Scalar, R: Rng + ?Sized>(
    params: &mut PolicyParams<F>,
    net: &SubstrateNetwork,
    stream: &EventStream,
    epochs: usize,
    rng: &mut R,
) -> Result<TrainingCurve> {
    params.validate()?;
    let dist = floyd_warshall(net);
    let batch = params.batch_size;
    let learning_rate = params.learning_rate;
    let origin = stream.start_time().unwrap_or(0.0);
    let mut curve = TrainingCurve::default();
    let mut acc = GradientAccumulator::<F>::new();
    let mut mapper = PolicyMapper::new(params.clone(), &dist, SampleMode::Stochastic, rng);

    for epoch in 0..epochs {
        let mut working = net.clone();
        let fresh = |window| WindowStats {
            epoch,
            window,
            window_end_time: origin,
            arrivals: 0,
            acceptances: 0,
            reward_sum: 0.0,
            cum_revenue: 0,
            cum_cost: 0,
            elapsed: 0.0,
        };
        let mut current = fresh(0);
        replay(&mut working, stream, &mut mapper, |mapper, vnr, outcome| {
            let decisions = mapper.take_decisions();
            current.arrivals += 1;
            current.window_end_time = vnr.arrival_time;
            current.elapsed = vnr.arrival_time - origin;
            match outcome {
                EmbedOutcome::Accepted(emb) => {
                    let reward = emb.revenue_cost_ratio();
                    accumulate_gradient(&mut acc, &decisions, F::of(reward), learning_rate);
                    current.acceptances += 1;
                    current.reward_sum += reward;
                    current.cum_revenue += emb.revenue;
                    current.cum_cost += emb.cost;
                }
                EmbedOutcome::Rejected(_) => acc.skip_request(),
            }
            if acc.requests == batch {
                batch_update(mapper.params_mut(), &mut acc)?;
                curve.updates += 1;
            }
            if current.arrivals as usize == batch {
                curve.windows.push(current);
                current = WindowStats {
                    cum_revenue: current.cum_revenue,
                    cum_cost: current.cum_cost,
                    ..fresh(current.window + 1)
                };
            }
            Ok(())
        })?;
        if current.arrivals > 0 {
            curve.windows.push(current);
        }
    }
    *params = mapper.into_params();
    Ok(curve)
}

/// Greedy replay of `stream` with frozen parameters.
pub fn evaluate<F: Scalar>(
    params: &PolicyParams<F>,
    net: &SubstrateNetwork,
    stream: &EventStream,
) -> Result<MetricsSeries> {
    let dist = floyd_warshall(net);
    // greedy selection never draws from the generator
    let mut unused = ChaCha8Rng::seed_from_u64(0);
    let mut mapper = PolicyMapper::new(params.clone(), &dist, SampleMode::Greedy, &mut unused);
    run_metrics(net, stream, &mut mapper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::fixtures::*;
    use crate::scenario::{generate_requests, generate_substrate, ScenarioConfig};

    fn small() -> (SubstrateNetwork, EventStream) {
        let cfg = ScenarioConfig {
            substrate_nodes: 20,
            vnr_count: 120,
            seed: 11,
            ..ScenarioConfig::default()
        };
        let net = generate_substrate(&cfg, &mut cfg.substrate_rng()).unwrap();
        let stream = generate_requests(&cfg, &mut cfg.request_rng()).unwrap();
        (net, stream)
    }

    fn init(seed: u64, batch: usize) -> PolicyParams<f64> {
        PolicyParams::init_normal(&mut ChaCha8Rng::seed_from_u64(seed), 0.1, 0.005, batch).unwrap()
    }

    #[test]
    fn zero_epochs_is_identity() {
        let (net, stream) = small();
        let mut params = init(1, 10);
        let start = params.clone();
        let curve = train(&mut params, &net, &stream, 0, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(params, start);
        assert!(curve.windows.is_empty());
    }

    #[test]
    fn training_is_deterministic() {
        let (net, stream) = small();
        let run = || {
            let mut params = init(1, 10);
            let curve = train(&mut params, &net, &stream, 2, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
            (params, curve.to_csv())
        };
        let (p1, c1) = run();
        let (p2, c2) = run();
        assert_eq!(p1, p2);
        assert_eq!(c1, c2);
        assert_ne!(p1, init(1, 10));
    }

    #[test]
    fn curve_has_one_row_per_window_per_epoch() {
        let (net, stream) = small();
        let mut params = init(1, 50);
        let curve = train(&mut params, &net, &stream, 3, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        // 120 arrivals in windows of 50
        assert_eq!(curve.windows.len(), 3 * 3);
        assert_eq!(curve.updates, (3 * 120) / 50);
        assert_eq!(curve.to_csv().lines().count(), 10);
        assert_eq!(curve.windows[2].arrivals, 20);
    }

    #[test]
    fn evaluate_examples() {
        let net = triangle(50, 3, 50);
        let params = init(3, 10);
        let empty = evaluate(&params, &net, &EventStream::default()).unwrap();
        assert!(empty.records().is_empty());

        let vnr = request(0, vec![vnode(5, 5, 0); 2], &[(0, 1, 5)]);
        let series = evaluate(&params, &net, &EventStream::from_requests(vec![vnr])).unwrap();
        assert_eq!(series.records().last().unwrap().acc_ratio, 1.0);
    }

    #[test]
    fn trains_in_f32() {
        let (net, stream) = small();
        let mut params = PolicyParams::<f32>::init_normal(&mut ChaCha8Rng::seed_from_u64(1), 0.1, 0.005, 10).unwrap();
        train(&mut params, &net, &stream, 1, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!(params.kernel.iter().all(|w| w.is_finite()));
        evaluate(&params, &net, &stream).unwrap();
    }
}

//! Random substrate topologies and timed request streams.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Result, VneError};
use crate::network::{
    RequestId, SecurityLevel, SubstrateNetwork, SubstrateNode, VirtualLink, VirtualNode, VirtualRequest,
};

/// Maximum number of topology draws before giving up on connectivity.
pub const MAX_TOPOLOGY_ATTEMPTS: usize = 200;

/// Inclusive integer range sampled uniformly, written as `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[u64; 2]", into = "[u64; 2]")]
pub struct IntRange {
    pub min: u64,
    pub max: u64,
}

impl IntRange {
    pub const fn new(min: u64, max: u64) -> Self {
        IntRange { min, max }
    }

    pub fn contains(&self, value: u64) -> bool {
        self.min <= value && value <= self.max
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.random_range(self.min..=self.max)
    }

    fn check(&self, key: &str) -> Result<()> {
        if self.min > self.max {
            return Err(VneError::config(
                key,
                format!("empty range: min {} > max {}", self.min, self.max),
            ));
        }
        Ok(())
    }
}

impl From<[u64; 2]> for IntRange {
    fn from([min, max]: [u64; 2]) -> Self {
        IntRange { min, max }
    }
}

impl From<IntRange> for [u64; 2] {
    fn from(range: IntRange) -> Self {
        [range.min, range.max]
    }
}

/// Edge model of the substrate topology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum LinkModel {
    /// Nodes uniformly placed in the unit square; a pair at distance `d`
    /// is linked with probability `alpha * exp(-d / (beta * L))`, where `L`
    /// is the square's diagonal.
    Waxman { alpha: f64, beta: f64 },
    /// Every pair is linked independently with probability `p`.
    UniformProbability { p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub substrate_nodes: usize,
    pub link_model: LinkModel,
    pub cpu_range: IntRange,
    pub sto_range: IntRange,
    pub bw_range: IntRange,
    pub sl_range: IntRange,
    pub vnr_count: usize,
    pub vnr_nodes_range: IntRange,
    pub vnr_cpu_range: IntRange,
    pub vnr_sto_range: IntRange,
    pub vnr_bw_range: IntRange,
    pub sr_range: IntRange,
    /// Probability of each non-tree pair of virtual nodes being linked.
    pub vnr_extra_link_probability: f64,
    /// Mean number of arrivals per 100 time units.
    pub arrival_rate: f64,
    pub mean_lifetime: f64,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            substrate_nodes: 100,
            link_model: LinkModel::Waxman { alpha: 0.5, beta: 0.2 },
            cpu_range: IntRange::new(50, 100),
            sto_range: IntRange::new(50, 100),
            bw_range: IntRange::new(50, 100),
            sl_range: IntRange::new(0, 3),
            vnr_count: 2000,
            vnr_nodes_range: IntRange::new(2, 10),
            vnr_cpu_range: IntRange::new(0, 50),
            vnr_sto_range: IntRange::new(0, 50),
            vnr_bw_range: IntRange::new(0, 50),
            sr_range: IntRange::new(0, 3),
            vnr_extra_link_probability: 0.5,
            arrival_rate: 4.0,
            mean_lifetime: 1000.0,
            train_fraction: 0.5,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    /// Checks every key; the error names the first offending one.
    pub fn validate(&self) -> Result<()> {
        if self.substrate_nodes < 2 {
            return Err(VneError::config("substrate_nodes", "need at least 2 nodes"));
        }
        match self.link_model {
            LinkModel::Waxman { alpha, beta } => {
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return Err(VneError::config("link_model.alpha", "must be in (0, 1]"));
                }
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(VneError::config("link_model.beta", "must be positive"));
                }
            }
            LinkModel::UniformProbability { p } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(VneError::config("link_model.p", "must be in (0, 1]"));
                }
            }
        }
        for (key, range) in [
            ("cpu_range", self.cpu_range),
            ("sto_range", self.sto_range),
            ("bw_range", self.bw_range),
            ("sl_range", self.sl_range),
            ("vnr_nodes_range", self.vnr_nodes_range),
            ("vnr_cpu_range", self.vnr_cpu_range),
            ("vnr_sto_range", self.vnr_sto_range),
            ("vnr_bw_range", self.vnr_bw_range),
            ("sr_range", self.sr_range),
        ] {
            range.check(key)?;
        }
        for (key, range) in [("sl_range", self.sl_range), ("sr_range", self.sr_range)] {
            if range.max > SecurityLevel::MAX as u64 {
                return Err(VneError::config(key, "security grades are limited to 0..=3"));
            }
        }
        if self.vnr_nodes_range.min < 2 {
            return Err(VneError::config("vnr_nodes_range", "requests need at least 2 nodes"));
        }
        if self.vnr_count == 0 {
            return Err(VneError::config("vnr_count", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.vnr_extra_link_probability) {
            return Err(VneError::config("vnr_extra_link_probability", "must be in [0, 1]"));
        }
        if !(self.arrival_rate > 0.0 && self.arrival_rate.is_finite()) {
            return Err(VneError::config("arrival_rate", "must be positive"));
        }
        if !(self.mean_lifetime > 0.0 && self.mean_lifetime.is_finite()) {
            return Err(VneError::config("mean_lifetime", "must be positive"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(VneError::config("train_fraction", "must be in (0, 1)"));
        }
        Ok(())
    }

    pub fn max_request_nodes(&self) -> usize {
        self.vnr_nodes_range.max as usize
    }

    /// Generator for the substrate topology.
    pub fn substrate_rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Generator for the request stream, independent of the substrate draws.
    pub fn request_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1);
        rng
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Arrival(VirtualRequest),
    Departure(RequestId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

impl Event {
    fn order_key(&self) -> (u8, RequestId) {
        match &self.kind {
            EventKind::Departure(id) => (0, *id),
            EventKind::Arrival(req) => (1, req.request_id),
        }
    }
}

/// Time-ordered arrivals and departures.
///
/// At equal times departures come first, so released resources are
/// available to a simultaneous arrival.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventStream {
    events: Vec<Event>,
}

impl EventStream {
    /// Builds the stream of arrivals and matching departures.
    pub fn from_requests(requests: impl IntoIterator<Item = VirtualRequest>) -> Self {
        let mut events = Vec::new();
        for req in requests {
            events.push(Event {
                time: req.departure_time(),
                kind: EventKind::Departure(req.request_id),
            });
            events.push(Event {
                time: req.arrival_time,
                kind: EventKind::Arrival(req),
            });
        }
        events.sort_by(|x, y| {
            x.time
                .partial_cmp(&y.time)
                .unwrap_or(Ordering::Equal)
                .then_with(|| x.order_key().cmp(&y.order_key()))
        });
        EventStream { events }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Arrived requests in arrival order.
    pub fn requests(&self) -> impl Iterator<Item = &VirtualRequest> {
        self.events.iter().filter_map(|e| match &e.kind {
            EventKind::Arrival(req) => Some(req),
            EventKind::Departure(_) => None,
        })
    }

    pub fn arrival_count(&self) -> usize {
        self.requests().count()
    }

    /// Time of the first arrival, if any.
    pub fn start_time(&self) -> Option<f64> {
        self.requests().next().map(|r| r.arrival_time)
    }
}

/// Draws a connected substrate per `cfg`, redrawing the topology until it
/// is connected (at most [`MAX_TOPOLOGY_ATTEMPTS`] times).
pub fn generate_substrate<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<SubstrateNetwork> {
    cfg.validate()?;
    let n = cfg.substrate_nodes;
    let nodes: Vec<SubstrateNode> = (0..n)
        .map(|_| {
            let cpu = cfg.cpu_range.sample(rng);
            let sto = cfg.sto_range.sample(rng);
            let sl = SecurityLevel::new(cfg.sl_range.sample(rng) as u8).expect("validated range");
            SubstrateNode::new(cpu, sto, sl)
        })
        .collect();

    for _ in 0..MAX_TOPOLOGY_ATTEMPTS {
        let pairs = draw_topology(cfg.link_model, n, rng);
        let links = pairs
            .into_iter()
            .map(|(a, b)| (a, b, cfg.bw_range.sample(rng)))
            .collect();
        let net = SubstrateNetwork::new(nodes.clone(), links)?;
        if net.is_connected() {
            return Ok(net);
        }
    }
    Err(VneError::Generation(format!(
        "no connected topology after {MAX_TOPOLOGY_ATTEMPTS} attempts"
    )))
}

fn draw_topology<R: Rng + ?Sized>(model: LinkModel, n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    match model {
        LinkModel::Waxman { alpha, beta } => {
            let coords: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
            let diagonal = std::f64::consts::SQRT_2;
            for a in 0..n {
                for b in a + 1..n {
                    let (dx, dy) = (coords[a].0 - coords[b].0, coords[a].1 - coords[b].1);
                    let d = (dx * dx + dy * dy).sqrt();
                    let p = alpha * (-d / (beta * diagonal)).exp();
                    if rng.random::<f64>() < p {
                        pairs.push((a, b));
                    }
                }
            }
        }
        LinkModel::UniformProbability { p } => {
            for a in 0..n {
                for b in a + 1..n {
                    if rng.random::<f64>() < p {
                        pairs.push((a, b));
                    }
                }
            }
        }
    }
    pairs
}

/// Draws `cfg.vnr_count` requests with exponential inter-arrival times
/// (mean `100 / arrival_rate`) and exponential lifetimes.
pub fn generate_requests<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<EventStream> {
    cfg.validate()?;
    let inter_arrival =
        Exp::new(cfg.arrival_rate / 100.0).map_err(|e| VneError::config("arrival_rate", e.to_string()))?;
    let lifetime = Exp::new(1.0 / cfg.mean_lifetime).map_err(|e| VneError::config("mean_lifetime", e.to_string()))?;

    let mut requests = Vec::with_capacity(cfg.vnr_count);
    let mut clock = 0.0;
    for id in 0..cfg.vnr_count {
        clock += inter_arrival.sample(rng);
        let mut life = lifetime.sample(rng);
        while life <= 0.0 {
            life = lifetime.sample(rng);
        }
        let size = cfg.vnr_nodes_range.sample(rng) as usize;
        let nodes = (0..size)
            .map(|_| VirtualNode {
                cpu_demand: cfg.vnr_cpu_range.sample(rng),
                sto_demand: cfg.vnr_sto_range.sample(rng),
                security_requirement: SecurityLevel::new(cfg.sr_range.sample(rng) as u8).expect("validated range"),
            })
            .collect();
        let links = request_topology(size, cfg.vnr_extra_link_probability, rng)
            .into_iter()
            .map(|(a, b)| VirtualLink {
                a,
                b,
                bw_demand: cfg.vnr_bw_range.sample(rng),
            })
            .collect();
        requests.push(VirtualRequest {
            request_id: id as RequestId,
            arrival_time: clock,
            lifetime: life,
            nodes,
            links,
        });
    }
    Ok(EventStream::from_requests(requests))
}

/// Uniform random labelled spanning tree (Prüfer decoding) plus every other
/// pair with probability `extra`. Pairs come out sorted.
fn request_topology<R: Rng + ?Sized>(n: usize, extra: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut adjacent = vec![vec![false; n]; n];
    if n == 2 {
        adjacent[0][1] = true;
    } else {
        let prufer: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
        let mut degree = vec![1usize; n];
        for &v in &prufer {
            degree[v] += 1;
        }
        for &v in &prufer {
            let leaf = (0..n).find(|&u| degree[u] == 1).expect("tree has a leaf");
            adjacent[leaf.min(v)][leaf.max(v)] = true;
            degree[leaf] -= 1;
            degree[v] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
        adjacent[rest[0]][rest[1]] = true;
    }
    let mut pairs = Vec::new();
    for (a, row) in adjacent.iter().enumerate() {
        for (b, &linked) in row.iter().enumerate().skip(a + 1) {
            if linked || rng.random::<f64>() < extra {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// Splits off the first `ceil(train_fraction * arrivals)` requests (with
/// their departures) as the training stream; absolute times are kept.
pub fn split_train_test(stream: &EventStream, cfg: &ScenarioConfig) -> (EventStream, EventStream) {
    let arrivals = stream.arrival_count();
    let train_count = (cfg.train_fraction * arrivals as f64).ceil() as usize;
    let (train, test): (Vec<_>, Vec<_>) = stream
        .requests()
        .cloned()
        .enumerate()
        .partition(|(i, _)| *i < train_count);
    (
        EventStream::from_requests(train.into_iter().map(|(_, r)| r)),
        EventStream::from_requests(test.into_iter().map(|(_, r)| r)),
    )
}

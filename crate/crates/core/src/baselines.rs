//! Reference node mappers: a resource-greedy ranking and a TOPSIS ranking
//! over centrality, resource and security criteria, with k-shortest-path
//! link mapping.

use std::collections::BTreeSet;

use crate::embedding::{bfs_route, LinkOrder, LinkRouting, LinkStrategy, NodeMapper};
use crate::features::{floyd_warshall, DistanceTable};
use crate::network::{LinkId, NodeId, SubstrateNetwork, Units, VirtualNode, VirtualRequest};
use crate::scalar::Scalar;

/// Number of candidate paths the TOPSIS mappers route over.
pub const DEFAULT_K_PATHS: usize = 3;

fn candidates<'a>(
    net: &'a SubstrateNetwork,
    vn: &'a VirtualNode,
    used: &'a [NodeId],
) -> impl Iterator<Item = NodeId> + 'a {
    (0..net.node_count()).filter(move |sn| !used.contains(sn) && net.node_feasible(*sn, vn))
}

/// Rank value of the greedy baseline: residual CPU times the residual
/// bandwidth of the adjacent links.
pub fn greedy_rank_value(net: &SubstrateNetwork, n: NodeId) -> Units {
    net.nodes()[n].residual_cpu() * net.adjacent_residual_bw(n)
}

/// Feasible unused node with the largest [`greedy_rank_value`]; lowest
/// index wins ties.
pub fn greedy_rank(net: &SubstrateNetwork, vn: &VirtualNode, used: &[NodeId]) -> Option<NodeId> {
    argmax_by(candidates(net, vn, used), |n| greedy_rank_value(net, n))
}

fn argmax_by<T: PartialOrd>(items: impl Iterator<Item = NodeId>, value: impl Fn(NodeId) -> T) -> Option<NodeId> {
    let mut best: Option<(NodeId, T)> = None;
    for n in items {
        let v = value(n);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((n, v));
        }
    }
    best.map(|(n, _)| n)
}

/// Weights of the ranking criteria, in the order degree centrality,
/// closeness centrality, resource capability, security level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankingCriteria<F> {
    pub weights: [F; 4],
}

impl<F: Scalar> RankingCriteria<F> {
    /// Trust-aware preset: the security grade is weighted like the others.
    pub fn trust_aware() -> Self {
        RankingCriteria { weights: [F::one(); 4] }
    }

    /// Preset without the security criterion.
    pub fn non_trust_aware() -> Self {
        RankingCriteria {
            weights: [F::one(), F::one(), F::one(), F::zero()],
        }
    }

    pub fn is_valid(&self) -> bool {
        self.weights.iter().all(|w| *w >= F::zero() && w.is_finite()) && self.weights.iter().any(|w| *w > F::zero())
    }
}

/// Raw criteria of substrate node `n`: degree / (N - 1), (N - 1) / sum of
/// hop distances, residual CPU + residual storage + adjacent residual
/// bandwidth, security grade.
pub fn node_criteria<F: Scalar>(net: &SubstrateNetwork, dist: &DistanceTable, n: NodeId) -> [F; 4] {
    let others = F::of_usize(net.node_count().saturating_sub(1).max(1));
    let degree = F::of_usize(net.degree(n)) / others;
    let total_distance: u64 = (0..net.node_count())
        .filter(|&m| m != n && dist.get(n, m) != DistanceTable::UNREACHABLE)
        .map(|m| dist.get(n, m) as u64)
        .sum();
    let closeness = if total_distance == 0 {
        F::zero()
    } else {
        others / F::of_u64(total_distance)
    };
    let node = &net.nodes()[n];
    let resources = node.residual_cpu() + node.residual_sto() + net.adjacent_residual_bw(n);
    [
        degree,
        closeness,
        F::of_u64(resources),
        F::of_u64(node.security_level().get() as u64),
    ]
}

/// Relative closeness to the ideal solution for each row of `matrix`
/// (all criteria are benefits). Criteria are min–max normalized over the
/// rows, weighted, and compared to the per-criterion best and worst by
/// Euclidean distance. A row at distance zero from both gets 1.
pub fn topsis_closeness<F: Scalar>(matrix: &[[F; 4]], weights: &[F; 4]) -> Vec<F> {
    let mut weighted = matrix.to_vec();
    for c in 0..4 {
        let lo = matrix.iter().map(|r| r[c]).fold(F::infinity(), F::min);
        let hi = matrix.iter().map(|r| r[c]).fold(F::neg_infinity(), F::max);
        let span = hi - lo;
        for row in &mut weighted {
            let norm = if span > F::zero() {
                (row[c] - lo) / span
            } else {
                F::of(0.5)
            };
            row[c] = weights[c] * norm;
        }
    }
    let mut best = [F::neg_infinity(); 4];
    let mut worst = [F::infinity(); 4];
    for row in &weighted {
        for c in 0..4 {
            best[c] = best[c].max(row[c]);
            worst[c] = worst[c].min(row[c]);
        }
    }
    weighted
        .iter()
        .map(|row| {
            let d_best = (0..4).map(|c| (row[c] - best[c]).powi(2)).sum::<F>().sqrt();
            let d_worst = (0..4).map(|c| (row[c] - worst[c]).powi(2)).sum::<F>().sqrt();
            let total = d_best + d_worst;
            if total > F::zero() {
                d_worst / total
            } else {
                F::one()
            }
        })
        .collect()
}

/// Feasible unused node with the highest TOPSIS closeness; lowest index
/// wins ties.
pub fn topsis_rank<F: Scalar>(
    net: &SubstrateNetwork,
    dist: &DistanceTable,
    vn: &VirtualNode,
    used: &[NodeId],
    criteria: &RankingCriteria<F>,
) -> Option<NodeId> {
    let nodes: Vec<NodeId> = candidates(net, vn, used).collect();
    if nodes.is_empty() {
        return None;
    }
    let matrix: Vec<[F; 4]> = nodes.iter().map(|&n| node_criteria(net, dist, n)).collect();
    let closeness = topsis_closeness(&matrix, &criteria.weights);
    let best = argmax_by(0..nodes.len(), |i| closeness[i])?;
    Some(nodes[best])
}

/// Up to `k` loop-free paths from `src` to `dst` over links with residual
/// bandwidth of at least `demand`, in non-decreasing hop count (Yen).
pub fn k_shortest_paths(net: &SubstrateNetwork, src: NodeId, dst: NodeId, k: usize, demand: Units) -> Vec<Vec<LinkId>> {
    k_shortest_paths_with(net, src, dst, k, |l| net.links()[l].residual_bw() >= demand)
}

pub(crate) fn k_shortest_paths_with(
    net: &SubstrateNetwork,
    src: NodeId,
    dst: NodeId,
    k: usize,
    admissible: impl Fn(LinkId) -> bool,
) -> Vec<Vec<LinkId>> {
    if k == 0 || src == dst {
        return Vec::new();
    }
    let Some(first) = bfs_route(net, src, dst, &admissible) else {
        return Vec::new();
    };
    let nodes_of = |path: &[LinkId]| net.trace_from(src, path).expect("routed path is simple");
    let mut accepted: Vec<Vec<LinkId>> = vec![first];
    // candidates ordered by (hops, node sequence) for a deterministic pick
    let mut pending: BTreeSet<(usize, Vec<NodeId>, Vec<LinkId>)> = BTreeSet::new();

    while accepted.len() < k {
        let last = accepted.last().expect("non-empty");
        let last_nodes = nodes_of(last);
        for i in 0..last.len() {
            let spur = last_nodes[i];
            let root_links = &last[..i];
            let root_nodes = &last_nodes[..i];
            let banned_links: BTreeSet<LinkId> = accepted
                .iter()
                .filter(|p| p.len() > i && p[..i] == *root_links)
                .map(|p| p[i])
                .collect();
            let spur_path = bfs_route(net, spur, dst, |l| {
                if banned_links.contains(&l) || !admissible(l) {
                    return false;
                }
                let (a, b) = net.links()[l].endpoints();
                !root_nodes.contains(&a) && !root_nodes.contains(&b)
            });
            if let Some(spur_path) = spur_path {
                let mut total = root_links.to_vec();
                total.extend(spur_path);
                if !accepted.contains(&total) {
                    pending.insert((total.len(), nodes_of(&total), total));
                }
            }
        }
        let Some((_, _, next)) = pending.pop_first() else {
            break;
        };
        accepted.push(next);
    }
    accepted
}

/// Resource-greedy node ranking, largest-demand-first BFS link mapping.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyMapper;

impl NodeMapper for GreedyMapper {
    fn select(
        &mut self,
        net: &SubstrateNetwork,
        vnr: &VirtualRequest,
        mapped: &[NodeId],
        vnode: usize,
    ) -> Option<NodeId> {
        greedy_rank(net, &vnr.nodes[vnode], mapped)
    }

    fn link_strategy(&self) -> LinkStrategy {
        LinkStrategy {
            order: LinkOrder::LargestDemandFirst,
            routing: LinkRouting::Bfs,
        }
    }
}

/// TOPSIS node ranking, largest-demand-first k-shortest-path link mapping.
#[derive(Debug, Clone)]
pub struct TopsisMapper<F> {
    criteria: RankingCriteria<F>,
    dist: DistanceTable,
    k: usize,
}

impl<F: Scalar> TopsisMapper<F> {
    pub fn new(net: &SubstrateNetwork, criteria: RankingCriteria<F>, k: usize) -> Self {
        TopsisMapper {
            criteria,
            dist: floyd_warshall(net),
            k,
        }
    }
}

impl<F: Scalar> NodeMapper for TopsisMapper<F> {
    fn select(
        &mut self,
        net: &SubstrateNetwork,
        vnr: &VirtualRequest,
        mapped: &[NodeId],
        vnode: usize,
    ) -> Option<NodeId> {
        topsis_rank(net, &self.dist, &vnr.nodes[vnode], mapped, &self.criteria)
    }

    fn link_strategy(&self) -> LinkStrategy {
        LinkStrategy {
            order: LinkOrder::LargestDemandFirst,
            routing: LinkRouting::KShortest(self.k),
        }
    }
}

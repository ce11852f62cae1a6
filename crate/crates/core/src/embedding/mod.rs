//! Embedding lifecycle: sequential node mapping through a [`NodeMapper`],
//! link routing, atomic commit and exact release.

mod oracle;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::baselines::k_shortest_paths_with;
use crate::error::{Result, VneError};
use crate::metrics;
use crate::network::{LinkId, NodeId, RequestId, SubstrateNetwork, Units, VirtualLink, VirtualNode, VirtualRequest};

pub use oracle::{brute_force_feasible, ORACLE_MAX_REQUEST_NODES, ORACLE_MAX_SUBSTRATE_NODES};

/// A request placed on the substrate, with the amounts needed to release it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub request_id: RequestId,
    /// Substrate node hosting each virtual node.
    pub node_map: Vec<NodeId>,
    pub nodes: Vec<VirtualNode>,
    pub links: Vec<VirtualLink>,
    /// Substrate path of each virtual link, oriented from `a` to `b`.
    pub link_paths: Vec<Vec<LinkId>>,
    pub revenue: Units,
    pub cost: Units,
}

impl Embedding {
    /// Assembles an embedding and fills in revenue and cost.
    pub fn new(vnr: &VirtualRequest, node_map: Vec<NodeId>, link_paths: Vec<Vec<LinkId>>) -> Self {
        let mut emb = Embedding {
            request_id: vnr.request_id,
            node_map,
            nodes: vnr.nodes.clone(),
            links: vnr.links.clone(),
            link_paths,
            revenue: metrics::revenue(vnr),
            cost: 0,
        };
        emb.cost = metrics::cost(&emb, vnr);
        emb
    }

    /// Revenue over cost for this request alone.
    pub fn revenue_cost_ratio(&self) -> f64 {
        if self.cost == 0 {
            1.0
        } else {
            self.revenue as f64 / self.cost as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    NoFeasibleNode { virtual_node: usize },
    NoFeasiblePath { virtual_link: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbedOutcome {
    Accepted(Embedding),
    Rejected(Rejection),
}

impl EmbedOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, EmbedOutcome::Accepted(_))
    }
}

/// Order in which the virtual links of a request are routed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinkOrder {
    #[default]
    Declaration,
    /// Largest bandwidth demand first, declaration order among equals.
    LargestDemandFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinkRouting {
    /// Minimum-hop path over the bandwidth-feasible subgraph.
    #[default]
    Bfs,
    /// Up to `k` loop-free candidate paths tried in hop order.
    KShortest(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LinkStrategy {
    pub order: LinkOrder,
    pub routing: LinkRouting,
}

/// Node-selection strategy plugged into [`embed_request`].
///
/// `mapped` holds the substrate nodes chosen for virtual nodes
/// `0..vnode`. An implementation returns a node that is feasible for
/// `vnr.nodes[vnode]` and not in `mapped`, or `None` to abstain.
pub trait NodeMapper {
    fn select(
        &mut self,
        net: &SubstrateNetwork,
        vnr: &VirtualRequest,
        mapped: &[NodeId],
        vnode: usize,
    ) -> Option<NodeId>;

    fn link_strategy(&self) -> LinkStrategy {
        LinkStrategy::default()
    }
}

/// Maps every virtual node, routes every virtual link and commits.
///
/// On rejection the network is left exactly as it was. A mapper that
/// proposes an infeasible or already used node is a contract error.
pub fn embed_request<M: NodeMapper + ?Sized>(
    net: &mut SubstrateNetwork,
    vnr: &VirtualRequest,
    mapper: &mut M,
) -> Result<EmbedOutcome> {
    if net.active.contains(&vnr.request_id) {
        return Err(VneError::state(format!(
            "request {} is already embedded",
            vnr.request_id
        )));
    }
    let mut node_map = Vec::with_capacity(vnr.nodes.len());
    for (v, vn) in vnr.nodes.iter().enumerate() {
        let Some(choice) = mapper.select(net, vnr, &node_map, v) else {
            return Ok(EmbedOutcome::Rejected(Rejection::NoFeasibleNode { virtual_node: v }));
        };
        if node_map.contains(&choice) || !net.node_feasible(choice, vn) {
            return Err(VneError::contract(format!(
                "mapper chose unusable substrate node {choice} for virtual node {v}"
            )));
        }
        node_map.push(choice);
    }

    match route_links(net, vnr, &node_map, mapper.link_strategy()) {
        Ok(paths) => {
            let emb = Embedding::new(vnr, node_map, paths);
            commit(net, &emb)?;
            Ok(EmbedOutcome::Accepted(emb))
        }
        Err(virtual_link) => Ok(EmbedOutcome::Rejected(Rejection::NoFeasiblePath { virtual_link })),
    }
}

/// Routes the virtual links of `vnr` for a fixed node map, reserving
/// bandwidth tentatively so links of the same request can share substrate
/// links. Yields the failing virtual link index on failure.
fn route_links(
    net: &SubstrateNetwork,
    vnr: &VirtualRequest,
    node_map: &[NodeId],
    strategy: LinkStrategy,
) -> std::result::Result<Vec<Vec<LinkId>>, usize> {
    let mut order: Vec<usize> = (0..vnr.links.len()).collect();
    if strategy.order == LinkOrder::LargestDemandFirst {
        order.sort_by_key(|&i| std::cmp::Reverse(vnr.links[i].bw_demand));
    }
    let mut reserved = vec![0; net.link_count()];
    let mut paths = vec![Vec::new(); vnr.links.len()];
    for i in order {
        let vl = vnr.links[i];
        let (src, dst) = (node_map[vl.a], node_map[vl.b]);
        let admissible = |l: LinkId| net.links[l].residual_bw() - reserved[l] >= vl.bw_demand;
        let path = match strategy.routing {
            LinkRouting::Bfs => bfs_route(net, src, dst, admissible),
            LinkRouting::KShortest(k) => k_shortest_paths_with(net, src, dst, k, admissible).into_iter().next(),
        };
        let Some(path) = path else {
            return Err(i);
        };
        for &l in &path {
            reserved[l] += vl.bw_demand;
        }
        paths[i] = path;
    }
    Ok(paths)
}

/// Minimum-hop path from `src` to `dst` using only links with residual
/// bandwidth of at least `demand`. Neighbors are expanded in ascending index
/// order, so ties resolve towards lower node indices.
pub fn bfs_link_map(net: &SubstrateNetwork, src: NodeId, dst: NodeId, demand: Units) -> Option<Vec<LinkId>> {
    bfs_route(net, src, dst, |l| net.links[l].residual_bw() >= demand)
}

pub(crate) fn bfs_route(
    net: &SubstrateNetwork,
    src: NodeId,
    dst: NodeId,
    admissible: impl Fn(LinkId) -> bool,
) -> Option<Vec<LinkId>> {
    if src == dst {
        return Some(Vec::new());
    }
    let n = net.node_count();
    let mut via: Vec<Option<(NodeId, LinkId)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[src] = true;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for adj in net.neighbors(u) {
            if seen[adj.neighbor] || !admissible(adj.link) {
                continue;
            }
            seen[adj.neighbor] = true;
            via[adj.neighbor] = Some((u, adj.link));
            if adj.neighbor == dst {
                let mut path = Vec::new();
                let mut at = dst;
                while let Some((prev, link)) = via[at] {
                    path.push(link);
                    at = prev;
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(adj.neighbor);
        }
    }
    None
}

/// Reserves every node demand and per-path link demand of `emb`.
///
/// All constraints are re-verified first; nothing is written unless every
/// check passes.
pub fn commit(net: &mut SubstrateNetwork, emb: &Embedding) -> Result<()> {
    if net.active.contains(&emb.request_id) {
        return Err(VneError::state(format!("request {} committed twice", emb.request_id)));
    }
    let link_load = verify(net, emb)?;
    for (&sn, vn) in emb.node_map.iter().zip(&emb.nodes) {
        let node = &mut net.nodes[sn];
        node.cpu_used += vn.cpu_demand;
        node.sto_used += vn.sto_demand;
    }
    for (l, load) in link_load {
        net.links[l].bw_used += load;
    }
    net.active.insert(emb.request_id);
    Ok(())
}

/// Returns exactly the resources reserved by [`commit`].
pub fn release(net: &mut SubstrateNetwork, emb: &Embedding) -> Result<()> {
    if !net.active.contains(&emb.request_id) {
        return Err(VneError::state(format!("request {} is not active", emb.request_id)));
    }
    let link_load = link_load(emb);
    let nodes_ok = emb.node_map.iter().zip(&emb.nodes).all(|(&sn, vn)| {
        net.nodes
            .get(sn)
            .is_some_and(|node| node.cpu_used >= vn.cpu_demand && node.sto_used >= vn.sto_demand)
    });
    let links_ok = link_load
        .iter()
        .all(|(&l, &load)| net.links.get(l).is_some_and(|link| link.bw_used >= load));
    if !nodes_ok || !links_ok {
        return Err(VneError::state(format!(
            "release of request {} exceeds recorded usage",
            emb.request_id
        )));
    }
    for (&sn, vn) in emb.node_map.iter().zip(&emb.nodes) {
        let node = &mut net.nodes[sn];
        node.cpu_used -= vn.cpu_demand;
        node.sto_used -= vn.sto_demand;
    }
    for (l, load) in link_load {
        net.links[l].bw_used -= load;
    }
    net.active.remove(&emb.request_id);
    Ok(())
}

fn link_load(emb: &Embedding) -> BTreeMap<LinkId, Units> {
    let mut load = BTreeMap::new();
    for (path, vl) in emb.link_paths.iter().zip(&emb.links) {
        for &l in path {
            *load.entry(l).or_insert(0) += vl.bw_demand;
        }
    }
    load
}

/// Independent check of injectivity, node constraints and path
/// connectivity/bandwidth. Returns the aggregated per-link load.
fn verify(net: &SubstrateNetwork, emb: &Embedding) -> Result<BTreeMap<LinkId, Units>> {
    if emb.node_map.len() != emb.nodes.len() || emb.link_paths.len() != emb.links.len() {
        return Err(VneError::contract("embedding shape does not match its request"));
    }
    let distinct: BTreeSet<_> = emb.node_map.iter().collect();
    if distinct.len() != emb.node_map.len() {
        return Err(VneError::contract("node map is not injective"));
    }
    for (v, (&sn, vn)) in emb.node_map.iter().zip(&emb.nodes).enumerate() {
        if !net.node_feasible(sn, vn) {
            return Err(VneError::contract(format!(
                "virtual node {v} does not fit on substrate node {sn}"
            )));
        }
    }
    for (i, (path, vl)) in emb.link_paths.iter().zip(&emb.links).enumerate() {
        let (src, dst) = (
            *emb.node_map
                .get(vl.a)
                .ok_or_else(|| VneError::contract("link endpoint out of range"))?,
            *emb.node_map
                .get(vl.b)
                .ok_or_else(|| VneError::contract("link endpoint out of range"))?,
        );
        let walked = net.trace_from(src, path)?;
        if walked.last() != Some(&dst) {
            return Err(VneError::contract(format!(
                "path of virtual link {i} does not reach its endpoint"
            )));
        }
    }
    let load = link_load(emb);
    for (&l, &amount) in &load {
        if net.residual_bw(l)? < amount {
            return Err(VneError::contract(format!(
                "substrate link {l} lacks bandwidth for {amount} units"
            )));
        }
    }
    Ok(load)
}

/// Mapper driven by a fixed node list, used by tests and the oracle witness.
#[derive(Debug, Clone)]
pub struct FixedMapper {
    pub node_map: Vec<NodeId>,
    pub strategy: LinkStrategy,
}

impl NodeMapper for FixedMapper {
    fn select(
        &mut self,
        net: &SubstrateNetwork,
        vnr: &VirtualRequest,
        mapped: &[NodeId],
        vnode: usize,
    ) -> Option<NodeId> {
        let sn = *self.node_map.get(vnode)?;
        (!mapped.contains(&sn) && net.node_feasible(sn, &vnr.nodes[vnode])).then_some(sn)
    }

    fn link_strategy(&self) -> LinkStrategy {
        self.strategy
    }
}

/// Lowest-index feasible unused node.
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstFit;

impl NodeMapper for FirstFit {
    fn select(
        &mut self,
        net: &SubstrateNetwork,
        vnr: &VirtualRequest,
        mapped: &[NodeId],
        vnode: usize,
    ) -> Option<NodeId> {
        (0..net.node_count()).find(|sn| !mapped.contains(sn) && net.node_feasible(*sn, &vnr.nodes[vnode]))
    }
}

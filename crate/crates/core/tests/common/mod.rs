#![allow(dead_code)]

use rand::Rng;

use secvne::network::{
    NodeId, SecurityLevel, SubstrateNetwork, SubstrateNode, Units, VirtualLink, VirtualNode, VirtualRequest,
};

pub fn sl(level: u8) -> SecurityLevel {
    SecurityLevel::new(level).unwrap()
}

pub fn vnode(cpu: Units, sto: Units, sr: u8) -> VirtualNode {
    VirtualNode {
        cpu_demand: cpu,
        sto_demand: sto,
        security_requirement: sl(sr),
    }
}

pub fn uniform(n: usize, edges: &[(NodeId, NodeId)], cpu: Units, sto: Units, level: u8, bw: Units) -> SubstrateNetwork {
    let nodes = (0..n).map(|_| SubstrateNode::new(cpu, sto, sl(level))).collect();
    SubstrateNetwork::new(nodes, edges.iter().map(|&(a, b)| (a, b, bw)).collect()).unwrap()
}

pub fn triangle(cap: Units, level: u8, bw: Units) -> SubstrateNetwork {
    uniform(3, &[(0, 1), (1, 2), (0, 2)], cap, cap, level, bw)
}

pub fn request(id: u64, nodes: Vec<VirtualNode>, links: &[(usize, usize, Units)]) -> VirtualRequest {
    VirtualRequest {
        request_id: id,
        arrival_time: 0.0,
        lifetime: 10.0,
        nodes,
        links: links
            .iter()
            .map(|&(a, b, bw_demand)| VirtualLink { a, b, bw_demand })
            .collect(),
    }
}

/// Random connected edge set: a random spanning tree plus each other pair
/// with probability `extra`.
pub fn random_edges<R: Rng>(n: usize, extra: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !edges.contains(&(a, b)) && rng.random_bool(extra) {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Connected substrate with random capacities and security levels.
pub fn random_substrate<R: Rng>(n: usize, cap: (Units, Units), rng: &mut R) -> SubstrateNetwork {
    let nodes = (0..n)
        .map(|_| {
            SubstrateNode::new(
                rng.random_range(cap.0..=cap.1),
                rng.random_range(cap.0..=cap.1),
                sl(rng.random_range(0..=3)),
            )
        })
        .collect();
    let links = random_edges(n, 0.3, rng)
        .into_iter()
        .map(|(a, b)| (a, b, rng.random_range(cap.0..=cap.1)))
        .collect();
    SubstrateNetwork::new(nodes, links).unwrap()
}

/// Connected request with demands drawn from `0..=max_demand`.
pub fn random_request<R: Rng>(id: u64, n: usize, max_demand: Units, rng: &mut R) -> VirtualRequest {
    let nodes = (0..n)
        .map(|_| {
            vnode(
                rng.random_range(0..=max_demand),
                rng.random_range(0..=max_demand),
                rng.random_range(0..=3),
            )
        })
        .collect();
    let links: Vec<_> = random_edges(n, 0.3, rng)
        .into_iter()
        .map(|(a, b)| (a, b, rng.random_range(0..=max_demand)))
        .collect();
    request(id, nodes, &links)
}

/// Hop distances from `src` by breadth-first search.
pub fn bfs_hops(net: &SubstrateNetwork, src: NodeId) -> Vec<Option<u32>> {
    let mut dist = vec![None; net.node_count()];
    dist[src] = Some(0);
    let mut queue = std::collections::VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for adj in net.neighbors(u) {
            if dist[adj.neighbor].is_none() {
                dist[adj.neighbor] = Some(dist[u].unwrap() + 1);
                queue.push_back(adj.neighbor);
            }
        }
    }
    dist
}

/// Every simple path from `src` to `dst` whose links all have at least
/// `demand` residual bandwidth, as link lists.
pub fn all_simple_paths(net: &SubstrateNetwork, src: NodeId, dst: NodeId, demand: Units) -> Vec<Vec<usize>> {
    fn walk(
        net: &SubstrateNetwork,
        at: NodeId,
        dst: NodeId,
        demand: Units,
        seen: &mut Vec<bool>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if at == dst {
            out.push(path.clone());
            return;
        }
        for adj in net.neighbors(at) {
            if !seen[adj.neighbor] && net.residual_bw(adj.link).unwrap() >= demand {
                seen[adj.neighbor] = true;
                path.push(adj.link);
                walk(net, adj.neighbor, dst, demand, seen, path, out);
                path.pop();
                seen[adj.neighbor] = false;
            }
        }
    }
    let mut seen = vec![false; net.node_count()];
    seen[src] = true;
    let mut out = Vec::new();
    walk(net, src, dst, demand, &mut seen, &mut Vec::new(), &mut out);
    out
}

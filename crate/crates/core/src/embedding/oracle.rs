//! Exhaustive feasibility check for tiny instances.

use super::{bfs_route, Embedding};
use crate::error::{Result, VneError};
use crate::network::{LinkId, NodeId, SubstrateNetwork, VirtualRequest};

pub const ORACLE_MAX_REQUEST_NODES: usize = 4;
pub const ORACLE_MAX_SUBSTRATE_NODES: usize = 8;

/// Searches every injective node mapping that satisfies the node
/// constraints, and for each one every routing order of the virtual links
/// (greedy min-hop routing with tentative reservation). Returns a witness
/// embedding if any combination succeeds.
pub fn brute_force_feasible(net: &SubstrateNetwork, vnr: &VirtualRequest) -> Result<Option<Embedding>> {
    if vnr.nodes.len() > ORACLE_MAX_REQUEST_NODES || net.node_count() > ORACLE_MAX_SUBSTRATE_NODES {
        return Err(VneError::contract(format!(
            "oracle limited to {ORACLE_MAX_REQUEST_NODES} virtual and {ORACLE_MAX_SUBSTRATE_NODES} substrate nodes"
        )));
    }
    if vnr.nodes.len() > net.node_count() {
        return Ok(None);
    }
    let mut search = Search {
        net,
        vnr,
        node_map: Vec::with_capacity(vnr.nodes.len()),
        reserved: vec![0; net.link_count()],
        paths: vec![Vec::new(); vnr.links.len()],
    };
    Ok(search
        .place(0)
        .then(|| Embedding::new(vnr, search.node_map.clone(), search.paths.clone())))
}

struct Search<'a> {
    net: &'a SubstrateNetwork,
    vnr: &'a VirtualRequest,
    node_map: Vec<NodeId>,
    reserved: Vec<u64>,
    paths: Vec<Vec<LinkId>>,
}

impl Search<'_> {
    fn place(&mut self, v: usize) -> bool {
        if v == self.vnr.nodes.len() {
            let all = (1u32 << self.vnr.links.len()) - 1;
            return self.route(all);
        }
        for sn in 0..self.net.node_count() {
            if self.node_map.contains(&sn) || !self.net.node_feasible(sn, &self.vnr.nodes[v]) {
                continue;
            }
            self.node_map.push(sn);
            if self.place(v + 1) {
                return true;
            }
            self.node_map.pop();
        }
        false
    }

    /// Tries every next link among `remaining`, recursing on success.
    fn route(&mut self, remaining: u32) -> bool {
        if remaining == 0 {
            return true;
        }
        for i in 0..self.vnr.links.len() {
            if remaining & (1 << i) == 0 {
                continue;
            }
            let vl = self.vnr.links[i];
            let (src, dst) = (self.node_map[vl.a], self.node_map[vl.b]);
            let reserved = &self.reserved;
            let net = self.net;
            let Some(path) = bfs_route(net, src, dst, |l| {
                net.links()[l].residual_bw() - reserved[l] >= vl.bw_demand
            }) else {
                continue;
            };
            for &l in &path {
                self.reserved[l] += vl.bw_demand;
            }
            if self.route(remaining & !(1 << i)) {
                self.paths[i] = path;
                return true;
            }
            for &l in &path {
                self.reserved[l] -= vl.bw_demand;
            }
        }
        false
    }
}

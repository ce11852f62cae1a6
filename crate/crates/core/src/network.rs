//! Substrate and virtual network types, residual-resource accounting and the
//! node/path feasibility predicates.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VneError};

/// Index of a substrate node.
pub type NodeId = usize;
/// Index of a substrate link.
pub type LinkId = usize;
/// Identifier of a virtual network request.
pub type RequestId = u64;
/// Integer resource quantity (compute, storage or bandwidth units).
pub type Units = u64;

/// Discrete security grade in `0..=3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct SecurityLevel(u8);

impl SecurityLevel {
    pub const MAX: u8 = 3;

    pub fn new(level: u8) -> Result<Self> {
        if level > Self::MAX {
            return Err(VneError::contract(format!(
                "security level {level} outside 0..={}",
                Self::MAX
            )));
        }
        Ok(SecurityLevel(level))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for SecurityLevel {
    type Error = VneError;

    fn try_from(value: u8) -> Result<Self> {
        SecurityLevel::new(value)
    }
}

impl From<SecurityLevel> for u8 {
    fn from(level: SecurityLevel) -> u8 {
        level.0
    }
}

impl fmt::Display for SecurityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstrateNode {
    pub(crate) cpu_capacity: Units,
    pub(crate) sto_capacity: Units,
    pub(crate) security_level: SecurityLevel,
    pub(crate) cpu_used: Units,
    pub(crate) sto_used: Units,
}

impl SubstrateNode {
    pub fn new(cpu_capacity: Units, sto_capacity: Units, security_level: SecurityLevel) -> Self {
        SubstrateNode {
            cpu_capacity,
            sto_capacity,
            security_level,
            cpu_used: 0,
            sto_used: 0,
        }
    }

    pub fn cpu_capacity(&self) -> Units {
        self.cpu_capacity
    }

    pub fn sto_capacity(&self) -> Units {
        self.sto_capacity
    }

    pub fn security_level(&self) -> SecurityLevel {
        self.security_level
    }

    pub fn cpu_used(&self) -> Units {
        self.cpu_used
    }

    pub fn sto_used(&self) -> Units {
        self.sto_used
    }

    pub fn residual_cpu(&self) -> Units {
        self.cpu_capacity - self.cpu_used
    }

    pub fn residual_sto(&self) -> Units {
        self.sto_capacity - self.sto_used
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstrateLink {
    pub(crate) endpoints: (NodeId, NodeId),
    pub(crate) bw_capacity: Units,
    pub(crate) bw_used: Units,
}

impl SubstrateLink {
    pub fn endpoints(&self) -> (NodeId, NodeId) {
        self.endpoints
    }

    pub fn bw_capacity(&self) -> Units {
        self.bw_capacity
    }

    pub fn bw_used(&self) -> Units {
        self.bw_used
    }

    pub fn residual_bw(&self) -> Units {
        self.bw_capacity - self.bw_used
    }

    /// The endpoint opposite to `node`, if `node` is an endpoint.
    pub fn other(&self, node: NodeId) -> Option<NodeId> {
        match self.endpoints {
            (a, b) if a == node => Some(b),
            (a, b) if b == node => Some(a),
            _ => None,
        }
    }
}

/// Neighbor entry in the adjacency index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Adjacent {
    pub neighbor: NodeId,
    pub link: LinkId,
}

/// Undirected capacitated substrate graph with residual ledgers.
///
/// Usage counters are only mutated through
/// [`commit`](crate::embedding::commit) and [`release`](crate::embedding::release).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstrateNetwork {
    pub(crate) nodes: Vec<SubstrateNode>,
    pub(crate) links: Vec<SubstrateLink>,
    adjacency: Vec<Vec<Adjacent>>,
    pub(crate) active: BTreeSet<RequestId>,
}

impl SubstrateNetwork {
    /// Builds a network from fresh nodes and `(a, b, bandwidth)` links.
    ///
    /// Rejects self loops, parallel links and dangling endpoints. Adjacency
    /// lists are sorted by neighbor index.
    pub fn new(nodes: Vec<SubstrateNode>, links: Vec<(NodeId, NodeId, Units)>) -> Result<Self> {
        let n = nodes.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        let mut built = Vec::with_capacity(links.len());
        for (id, (a, b, bw)) in links.into_iter().enumerate() {
            for end in [a, b] {
                if end >= n {
                    return Err(VneError::Index {
                        kind: "node",
                        index: end,
                        len: n,
                    });
                }
            }
            if a == b {
                return Err(VneError::contract(format!("self loop on node {a}")));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(VneError::contract(format!(
                    "parallel link between {} and {}",
                    key.0, key.1
                )));
            }
            adjacency[a].push(Adjacent { neighbor: b, link: id });
            adjacency[b].push(Adjacent { neighbor: a, link: id });
            built.push(SubstrateLink {
                endpoints: (a, b),
                bw_capacity: bw,
                bw_used: 0,
            });
        }
        for list in &mut adjacency {
            list.sort_by_key(|adj| adj.neighbor);
        }
        Ok(SubstrateNetwork {
            nodes,
            links: built,
            adjacency,
            active: BTreeSet::new(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> &[SubstrateNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[SubstrateLink] {
        &self.links
    }

    pub fn node(&self, n: NodeId) -> Result<&SubstrateNode> {
        self.nodes.get(n).ok_or(VneError::Index {
            kind: "node",
            index: n,
            len: self.nodes.len(),
        })
    }

    pub fn link(&self, l: LinkId) -> Result<&SubstrateLink> {
        self.links.get(l).ok_or(VneError::Index {
            kind: "link",
            index: l,
            len: self.links.len(),
        })
    }

    /// Neighbors of `n` in ascending neighbor order.
    pub fn neighbors(&self, n: NodeId) -> &[Adjacent] {
        &self.adjacency[n]
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.adjacency[n].len()
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.adjacency
            .get(a)?
            .iter()
            .find(|adj| adj.neighbor == b)
            .map(|adj| adj.link)
    }

    /// Requests whose resources are currently held by the ledger.
    pub fn active_requests(&self) -> &BTreeSet<RequestId> {
        &self.active
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for adj in &self.adjacency[u] {
                if !seen[adj.neighbor] {
                    seen[adj.neighbor] = true;
                    reached += 1;
                    queue.push_back(adj.neighbor);
                }
            }
        }
        reached == self.nodes.len()
    }

    /// Remaining compute on `n`: capacity minus everything embedded there.
    pub fn residual_cpu(&self, n: NodeId) -> Result<Units> {
        Ok(self.node(n)?.residual_cpu())
    }

    pub fn residual_sto(&self, n: NodeId) -> Result<Units> {
        Ok(self.node(n)?.residual_sto())
    }

    /// Remaining bandwidth on `l`: capacity minus the demands of every
    /// virtual link routed across it.
    pub fn residual_bw(&self, l: LinkId) -> Result<Units> {
        Ok(self.link(l)?.residual_bw())
    }

    /// Sum of residual bandwidth over the links adjacent to `n`.
    pub fn adjacent_residual_bw(&self, n: NodeId) -> Units {
        self.adjacency[n]
            .iter()
            .map(|adj| self.links[adj.link].residual_bw())
            .sum()
    }

    /// Compute, storage and security constraints for placing `vn` on `sn`.
    ///
    /// An out-of-range `sn` is simply infeasible.
    pub fn node_feasible(&self, sn: NodeId, vn: &VirtualNode) -> bool {
        match self.nodes.get(sn) {
            Some(node) => {
                node.residual_cpu() >= vn.cpu_demand
                    && node.residual_sto() >= vn.sto_demand
                    && node.security_level >= vn.security_requirement
            }
            None => false,
        }
    }

    /// Bandwidth constraint along `path`. The empty path is feasible.
    ///
    /// Fails if `path` is not a connected simple path.
    pub fn path_feasible(&self, path: &[LinkId], demand: Units) -> Result<bool> {
        self.path_nodes(path)?;
        Ok(path.iter().all(|&l| self.links[l].residual_bw() >= demand))
    }

    /// Node sequence traversed by `path`, validating that it is a connected
    /// simple path. Returns an empty vector for the empty path.
    pub fn path_nodes(&self, path: &[LinkId]) -> Result<Vec<NodeId>> {
        let Some(&first) = path.first() else {
            return Ok(Vec::new());
        };
        let (a, b) = self.link(first)?.endpoints;
        self.trace_from(a, path).or_else(|_| self.trace_from(b, path))
    }

    /// Walks `path` starting at `src`, validating connectivity and simplicity.
    pub fn trace_from(&self, src: NodeId, path: &[LinkId]) -> Result<Vec<NodeId>> {
        let mut nodes = vec![src];
        let mut visited = BTreeSet::from([src]);
        let mut at = src;
        for &l in path {
            let next = self
                .link(l)?
                .other(at)
                .ok_or_else(|| VneError::contract(format!("link {l} does not continue path at node {at}")))?;
            if !visited.insert(next) {
                return Err(VneError::contract(format!("path revisits node {next}")));
            }
            nodes.push(next);
            at = next;
        }
        Ok(nodes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualNode {
    pub cpu_demand: Units,
    pub sto_demand: Units,
    pub security_requirement: SecurityLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualLink {
    pub a: usize,
    pub b: usize,
    pub bw_demand: Units,
}

/// A virtual network request: a small demand graph with a lifetime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualRequest {
    pub request_id: RequestId,
    pub arrival_time: f64,
    pub lifetime: f64,
    pub nodes: Vec<VirtualNode>,
    pub links: Vec<VirtualLink>,
}

impl VirtualRequest {
    pub fn departure_time(&self) -> f64 {
        self.arrival_time + self.lifetime
    }

    /// Checks the structural invariants: at least two nodes (and at most
    /// `max_nodes`), positive lifetime, valid distinct link endpoints, no
    /// parallel links, connected demand graph.
    pub fn validate(&self, max_nodes: usize) -> Result<()> {
        let n = self.nodes.len();
        if n < 2 || n > max_nodes {
            return Err(VneError::contract(format!(
                "request {} has {n} nodes, expected 2..={max_nodes}",
                self.request_id
            )));
        }
        if self.lifetime.is_nan() || self.lifetime <= 0.0 || !self.arrival_time.is_finite() {
            return Err(VneError::contract(format!(
                "request {} has invalid timing",
                self.request_id
            )));
        }
        let mut seen = BTreeSet::new();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut root = x;
            while parent[root] != root {
                root = parent[root];
            }
            parent[x] = root;
            root
        }
        let mut components = n;
        for link in &self.links {
            if link.a >= n || link.b >= n || link.a == link.b {
                return Err(VneError::contract(format!(
                    "request {} has invalid link {}-{}",
                    self.request_id, link.a, link.b
                )));
            }
            if !seen.insert((link.a.min(link.b), link.a.max(link.b))) {
                return Err(VneError::contract(format!(
                    "request {} has parallel links",
                    self.request_id
                )));
            }
            let (ra, rb) = (find(&mut parent, link.a), find(&mut parent, link.b));
            if ra != rb {
                parent[ra] = rb;
                components -= 1;
            }
        }
        if components != 1 {
            return Err(VneError::contract(format!(
                "request {} is not connected",
                self.request_id
            )));
        }
        Ok(())
    }
}

//! Per-node features fed to the policy: residual CPU, residual storage,
//! security level and average hop distance to the nodes already chosen for
//! the current request.

use crate::network::{NodeId, SubstrateNetwork};
use crate::scalar::Scalar;

/// Number of features per substrate node.
pub const FEATURES: usize = 4;

/// All-pairs hop counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceTable {
    n: usize,
    hops: Vec<u32>,
}

impl DistanceTable {
    /// Marker for unreachable pairs.
    pub const UNREACHABLE: u32 = u32::MAX;

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, a: NodeId, b: NodeId) -> u32 {
        self.hops[a * self.n + b]
    }
}

/// Floyd–Warshall over unit link weights.
pub fn floyd_warshall(net: &SubstrateNetwork) -> DistanceTable {
    let n = net.node_count();
    let inf = DistanceTable::UNREACHABLE;
    let mut hops = vec![inf; n * n];
    for i in 0..n {
        hops[i * n + i] = 0;
    }
    for link in net.links() {
        let (a, b) = link.endpoints();
        hops[a * n + b] = 1;
        hops[b * n + a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            let ik = hops[i * n + k];
            if ik == inf {
                continue;
            }
            for j in 0..n {
                let kj = hops[k * n + j];
                if kj != inf && ik + kj < hops[i * n + j] {
                    hops[i * n + j] = ik + kj;
                }
            }
        }
    }
    DistanceTable { n, hops }
}

/// Sum of distances from `n` to the nodes in `mapped`, divided by
/// `mapped.len() + 1`. Zero when nothing is mapped yet.
pub fn avg_dst<F: Scalar>(n: NodeId, mapped: &[NodeId], dist: &DistanceTable) -> F {
    let total: u64 = mapped.iter().map(|&m| dist.get(n, m) as u64).sum();
    F::of_u64(total) / F::of_usize(mapped.len() + 1)
}

/// One feature vector per substrate node, raw and min–max normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<F> {
    raw: Vec<[F; FEATURES]>,
    normalized: Vec<[F; FEATURES]>,
}

impl<F: Scalar> FeatureMatrix<F> {
    /// Wraps raw columns, normalizing each feature to `[0, 1]` across nodes.
    /// A feature that is constant over all nodes becomes 0.5.
    pub fn from_raw(raw: Vec<[F; FEATURES]>) -> Self {
        let mut normalized = raw.clone();
        for f in 0..FEATURES {
            let (lo, hi) = raw.iter().fold((F::infinity(), F::neg_infinity()), |(lo, hi), col| {
                (lo.min(col[f]), hi.max(col[f]))
            });
            let span = hi - lo;
            for col in &mut normalized {
                col[f] = if span > F::zero() {
                    (col[f] - lo) / span
                } else {
                    F::of(0.5)
                };
            }
        }
        FeatureMatrix { raw, normalized }
    }

    pub fn columns(&self) -> usize {
        self.raw.len()
    }

    pub fn raw(&self) -> &[[F; FEATURES]] {
        &self.raw
    }

    pub fn normalized(&self) -> &[[F; FEATURES]] {
        &self.normalized
    }
}

pub fn build_feature_matrix<F: Scalar>(
    net: &SubstrateNetwork,
    mapped: &[NodeId],
    dist: &DistanceTable,
) -> FeatureMatrix<F> {
    let raw = net
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, node)| {
            [
                F::of_u64(node.residual_cpu()),
                F::of_u64(node.residual_sto()),
                F::of_u64(node.security_level().get() as u64),
                avg_dst(k, mapped, dist),
            ]
        })
        .collect();
    FeatureMatrix::from_raw(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{commit, Embedding};
    use crate::network::fixtures::*;

    fn path_abc() -> SubstrateNetwork {
        uniform(3, &[(0, 1), (1, 2)], 50, 50, 1, 50)
    }

    #[test]
    fn path_graph_distances() {
        let d = floyd_warshall(&path_abc());
        assert_eq!(d.get(0, 2), 2);
        assert_eq!(d.get(2, 0), 2);
        for i in 0..3 {
            assert_eq!(d.get(i, i), 0);
        }
    }

    #[test]
    fn unreachable_pairs_are_marked() {
        let net = uniform(3, &[(0, 1)], 1, 1, 0, 1);
        assert_eq!(floyd_warshall(&net).get(0, 2), DistanceTable::UNREACHABLE);
    }

    #[test]
    fn avg_dst_examples() {
        let d = floyd_warshall(&path_abc());
        assert_eq!(avg_dst::<f64>(2, &[0], &d), 1.0);
        assert_eq!(avg_dst::<f64>(1, &[], &d), 0.0);
        assert!((avg_dst::<f64>(1, &[0, 2], &d) - 2.0 / 3.0).abs() < 1e-12);
        assert!((avg_dst::<f32>(1, &[0, 2], &d) - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn matrix_shape_and_symmetry() {
        let net = triangle(50, 2, 50);
        let d = floyd_warshall(&net);
        let m = build_feature_matrix::<f64>(&net, &[], &d);
        assert_eq!(m.columns(), 3);
        assert!(m.normalized().iter().all(|c| *c == [0.5; 4]));
    }

    #[test]
    fn normalization_is_min_max() {
        let m = FeatureMatrix::from_raw(vec![[0.0, 5.0, 1.0, 2.0], [10.0, 5.0, 3.0, 0.0], [5.0, 5.0, 2.0, 1.0]]);
        assert_eq!(m.normalized()[0], [0.0, 0.5, 0.0, 1.0]);
        assert_eq!(m.normalized()[1], [1.0, 0.5, 1.0, 0.0]);
        assert_eq!(m.normalized()[2], [0.5, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn cpu_entry_drops_after_embedding() {
        let mut net = triangle(50, 3, 50);
        let d = floyd_warshall(&net);
        let before = build_feature_matrix::<f64>(&net, &[], &d);
        let vnr = request(1, vec![vnode(10, 1, 0), vnode(1, 1, 0)], &[(0, 1, 1)]);
        commit(&mut net, &Embedding::new(&vnr, vec![2, 0], vec![vec![2]])).unwrap();
        let after = build_feature_matrix::<f64>(&net, &[], &d);
        assert!(after.raw()[2][0] < before.raw()[2][0]);
        assert_eq!(after, build_feature_matrix::<f64>(&net, &[], &d));
    }
}

//! Event replay shared by training, evaluation and the baselines.

use std::collections::BTreeMap;

use crate::embedding::{embed_request, release, EmbedOutcome, Embedding, NodeMapper};
use crate::error::Result;
use crate::metrics::{MetricsSeries, Outcome, DEFAULT_WINDOW};
use crate::network::{RequestId, SubstrateNetwork, VirtualRequest};
use crate::scenario::{EventKind, EventStream};

/// Plays `stream` against `net`: arrivals go through [`embed_request`],
/// departures release whatever their request holds. `hook` sees every
/// arrival's outcome with the mapper that produced it.
pub fn replay<M, H>(net: &mut SubstrateNetwork, stream: &EventStream, mapper: &mut M, mut hook: H) -> Result<()>
where
    M: NodeMapper + ?Sized,
    H: FnMut(&mut M, &VirtualRequest, &EmbedOutcome) -> Result<()>,
{
    let mut active: BTreeMap<RequestId, Embedding> = BTreeMap::new();
    for event in stream.events() {
        match &event.kind {
            EventKind::Departure(id) => {
                if let Some(emb) = active.remove(id) {
                    release(net, &emb)?;
                }
            }
            EventKind::Arrival(vnr) => {
                let outcome = embed_request(net, vnr, mapper)?;
                hook(mapper, vnr, &outcome)?;
                if let EmbedOutcome::Accepted(emb) = outcome {
                    active.insert(vnr.request_id, emb);
                }
            }
        }
    }
    Ok(())
}

/// Replays `stream` on a copy of `net` and samples the indicators every
/// [`DEFAULT_WINDOW`] time units from the first arrival.
pub fn run_metrics<M: NodeMapper + ?Sized>(
    net: &SubstrateNetwork,
    stream: &EventStream,
    mapper: &mut M,
) -> Result<MetricsSeries> {
    let mut working = net.clone();
    let mut series = MetricsSeries::new(stream.start_time().unwrap_or(0.0), DEFAULT_WINDOW);
    replay(&mut working, stream, mapper, |_, vnr, outcome| {
        let outcome = match outcome {
            EmbedOutcome::Accepted(emb) => Outcome::Accepted {
                revenue: emb.revenue,
                cost: emb.cost,
            },
            EmbedOutcome::Rejected(_) => Outcome::Rejected,
        };
        series.update(vnr.arrival_time, outcome)
    })?;
    series.finish();
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::FirstFit;
    use crate::network::fixtures::*;

    #[test]
    fn departures_free_resources() {
        let net = uniform(2, &[(0, 1)], 50, 50, 3, 50);
        let mut a = request(0, vec![vnode(40, 1, 0); 2], &[(0, 1, 1)]);
        a.arrival_time = 0.0;
        a.lifetime = 5.0;
        let mut b = request(1, vec![vnode(40, 1, 0); 2], &[(0, 1, 1)]);
        b.arrival_time = 5.0;
        b.lifetime = 5.0;
        let stream = EventStream::from_requests(vec![a, b]);
        let series = run_metrics(&net, &stream, &mut FirstFit).unwrap();
        assert_eq!(series.acceptances(), 2);
    }

    #[test]
    fn overlapping_requests_compete() {
        let net = uniform(2, &[(0, 1)], 50, 50, 3, 50);
        let mut a = request(0, vec![vnode(40, 1, 0); 2], &[(0, 1, 1)]);
        a.lifetime = 10.0;
        let mut b = request(1, vec![vnode(40, 1, 0); 2], &[(0, 1, 1)]);
        b.arrival_time = 5.0;
        let stream = EventStream::from_requests(vec![a, b]);
        let series = run_metrics(&net, &stream, &mut FirstFit).unwrap();
        assert_eq!(series.arrivals(), 2);
        assert_eq!(series.acceptances(), 1);
    }

    #[test]
    fn empty_stream_gives_empty_series() {
        let net = triangle(50, 3, 50);
        let series = run_metrics(&net, &EventStream::default(), &mut FirstFit).unwrap();
        assert!(series.records().is_empty());
    }
}

//! Revenue and cost of embedded requests, and the long-run indicators
//! (average revenue, revenue/cost ratio, acceptance ratio) sampled over
//! fixed time windows.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::embedding::Embedding;
use crate::error::{Result, VneError};
use crate::network::{Units, VirtualRequest};

/// Default sampling interval of the indicator series, in time units.
pub const DEFAULT_WINDOW: f64 = 100.0;

pub const CSV_HEADER: &str =
    "window_end_time,arrivals,acceptances,acc_ratio,cum_revenue,cum_cost,avg_revenue,rc_ratio,rc_defined";

/// Requested compute and storage of every node plus the bandwidth of every
/// link.
pub fn revenue(vnr: &VirtualRequest) -> Units {
    let nodes: Units = vnr.nodes.iter().map(|n| n.cpu_demand + n.sto_demand).sum();
    let links: Units = vnr.links.iter().map(|l| l.bw_demand).sum();
    nodes + links
}

/// Node demands plus each link's bandwidth times the hop count of its path.
pub fn cost(emb: &Embedding, vnr: &VirtualRequest) -> Units {
    let nodes: Units = vnr.nodes.iter().map(|n| n.cpu_demand + n.sto_demand).sum();
    let links: Units = vnr
        .links
        .iter()
        .zip(&emb.link_paths)
        .map(|(l, path)| l.bw_demand * path.len() as Units)
        .sum();
    nodes + links
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Accepted { revenue: Units, cost: Units },
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowRecord {
    pub window_end_time: f64,
    pub arrivals: u64,
    pub acceptances: u64,
    pub acc_ratio: f64,
    pub cum_revenue: Units,
    pub cum_cost: Units,
    pub avg_revenue: f64,
    /// 1.0 until the first acceptance; see `rc_defined`.
    pub rc_ratio: f64,
    pub rc_defined: bool,
}

impl WindowRecord {
    fn derive(
        window_end_time: f64,
        elapsed: f64,
        arrivals: u64,
        acceptances: u64,
        cum_revenue: Units,
        cum_cost: Units,
    ) -> Self {
        let acc_ratio = if arrivals == 0 {
            0.0
        } else {
            acceptances as f64 / arrivals as f64
        };
        let avg_revenue = if elapsed > 0.0 {
            cum_revenue as f64 / elapsed
        } else {
            0.0
        };
        let rc_defined = cum_cost > 0;
        let rc_ratio = if rc_defined {
            cum_revenue as f64 / cum_cost as f64
        } else {
            1.0
        };
        WindowRecord {
            window_end_time,
            arrivals,
            acceptances,
            acc_ratio,
            cum_revenue,
            cum_cost,
            avg_revenue,
            rc_ratio,
            rc_defined,
        }
    }
}

/// Running indicators sampled at `origin + k * window`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSeries {
    origin: f64,
    window: f64,
    next_end: f64,
    last_time: f64,
    arrivals: u64,
    acceptances: u64,
    cum_revenue: Units,
    cum_cost: Units,
    pending: bool,
    records: Vec<WindowRecord>,
}

impl MetricsSeries {
    pub fn new(origin: f64, window: f64) -> Self {
        assert!(window > 0.0, "window must be positive");
        MetricsSeries {
            origin,
            window,
            next_end: origin + window,
            last_time: origin,
            arrivals: 0,
            acceptances: 0,
            cum_revenue: 0,
            cum_cost: 0,
            pending: false,
            records: Vec::new(),
        }
    }

    /// Records one arrival at time `t`, closing every window that ended
    /// before it.
    pub fn update(&mut self, t: f64, outcome: Outcome) -> Result<()> {
        if t < self.last_time || t.is_nan() {
            return Err(VneError::contract(format!(
                "metrics time went backwards: {t} < {}",
                self.last_time
            )));
        }
        while t > self.next_end {
            self.close_window();
        }
        self.last_time = t;
        self.arrivals += 1;
        if let Outcome::Accepted { revenue, cost } = outcome {
            self.acceptances += 1;
            self.cum_revenue += revenue;
            self.cum_cost += cost;
        }
        self.pending = true;
        Ok(())
    }

    fn close_window(&mut self) {
        let end = self.next_end;
        self.records.push(WindowRecord::derive(
            end,
            end - self.origin,
            self.arrivals,
            self.acceptances,
            self.cum_revenue,
            self.cum_cost,
        ));
        self.next_end = self.origin + self.window * (self.records.len() + 1) as f64;
        self.pending = false;
    }

    /// Closes the window holding the last arrival, if still open.
    pub fn finish(&mut self) {
        if self.pending {
            self.close_window();
        }
    }

    pub fn records(&self) -> &[WindowRecord] {
        &self.records
    }

    pub fn arrivals(&self) -> u64 {
        self.arrivals
    }

    pub fn acceptances(&self) -> u64 {
        self.acceptances
    }

    pub fn cum_revenue(&self) -> Units {
        self.cum_revenue
    }

    pub fn cum_cost(&self) -> Units {
        self.cum_cost
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            write_record(&mut out, r);
            out.push('\n');
        }
        out
    }
}

/// Comma-separated row in [`CSV_HEADER`] column order, without newline.
pub fn write_record(out: &mut String, r: &WindowRecord) {
    let _ = write!(
        out,
        "{:.6},{},{},{:.6},{},{},{:.6},{:.6},{}",
        r.window_end_time,
        r.arrivals,
        r.acceptances,
        r.acc_ratio,
        r.cum_revenue,
        r.cum_cost,
        r.avg_revenue,
        r.rc_ratio,
        u8::from(r.rc_defined)
    );
}

pub fn update_series(series: &mut MetricsSeries, t: f64, outcome: Outcome) -> Result<()> {
    series.update(t, outcome)
}

pub fn export_csv(series: &MetricsSeries, destination: &Path) -> Result<()> {
    fs::write(destination, series.to_csv()).map_err(|e| VneError::io(destination, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::fixtures::*;

    fn two_node_request() -> VirtualRequest {
        request(1, vec![vnode(10, 5, 0), vnode(20, 10, 0)], &[(0, 1, 15)])
    }

    #[test]
    fn revenue_examples() {
        assert_eq!(revenue(&two_node_request()), 60);
        assert_eq!(revenue(&request(2, vec![vnode(0, 0, 0); 2], &[(0, 1, 0)])), 0);
        let doubled = request(1, vec![vnode(20, 10, 0), vnode(40, 20, 0)], &[(0, 1, 30)]);
        assert_eq!(revenue(&doubled), 2 * revenue(&two_node_request()));
    }

    #[test]
    fn cost_examples() {
        let vnr = two_node_request();
        let two_hops = Embedding::new(&vnr, vec![0, 2], vec![vec![0, 1]]);
        assert_eq!(two_hops.cost, 75);
        let one_hop = Embedding::new(&vnr, vec![0, 1], vec![vec![0]]);
        assert_eq!(one_hop.cost, one_hop.revenue);
        assert_eq!(two_hops.revenue_cost_ratio(), 0.8);
    }

    #[test]
    fn acceptance_ratio() {
        let mut s = MetricsSeries::new(0.0, 100.0);
        for (t, ok) in [(1.0, true), (2.0, false), (3.0, true), (4.0, true)] {
            let outcome = if ok {
                Outcome::Accepted { revenue: 1, cost: 1 }
            } else {
                Outcome::Rejected
            };
            s.update(t, outcome).unwrap();
        }
        s.finish();
        assert_eq!(s.records()[0].acc_ratio, 0.75);
    }

    #[test]
    fn average_revenue() {
        let mut s = MetricsSeries::new(0.0, 100.0);
        s.update(
            50.0,
            Outcome::Accepted {
                revenue: 400,
                cost: 500,
            },
        )
        .unwrap();
        s.update(
            250.0,
            Outcome::Accepted {
                revenue: 200,
                cost: 300,
            },
        )
        .unwrap();
        s.finish();
        let last = s.records().last().unwrap();
        assert_eq!(last.window_end_time, 300.0);
        assert_eq!(last.avg_revenue, 2.0);
        assert_eq!(last.rc_ratio, 0.75);
        assert_eq!(s.records().len(), 3);
    }

    #[test]
    fn rc_sentinel_before_first_acceptance() {
        let mut s = MetricsSeries::new(0.0, 100.0);
        s.update(1.0, Outcome::Rejected).unwrap();
        s.finish();
        let r = s.records()[0];
        assert_eq!(r.rc_ratio, 1.0);
        assert!(!r.rc_defined);
    }

    #[test]
    fn time_regression_is_rejected() {
        let mut s = MetricsSeries::new(0.0, 100.0);
        s.update(10.0, Outcome::Rejected).unwrap();
        assert!(matches!(s.update(9.0, Outcome::Rejected), Err(VneError::Contract(_))));
    }

    #[test]
    fn csv_shape_and_determinism() {
        let empty = MetricsSeries::new(0.0, 100.0);
        assert_eq!(empty.to_csv(), format!("{CSV_HEADER}\n"));

        let mut s = MetricsSeries::new(0.0, 100.0);
        s.update(10.0, Outcome::Accepted { revenue: 60, cost: 75 }).unwrap();
        s.update(120.0, Outcome::Rejected).unwrap();
        s.finish();
        let csv = s.to_csv();
        assert_eq!(csv.lines().count(), s.records().len() + 1);
        assert_eq!(csv, s.clone().to_csv());
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "100.000000,1,1,1.000000,60,75,0.600000,0.800000,1"
        );
        assert_eq!(
            csv.lines().nth(2).unwrap(),
            "200.000000,2,1,0.500000,60,75,0.300000,0.800000,1"
        );
    }

    #[test]
    fn export_reports_path_on_failure() {
        let s = MetricsSeries::new(0.0, 100.0);
        let err = export_csv(&s, Path::new("/nonexistent/dir/out.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
    }
}

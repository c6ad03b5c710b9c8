//! Row/column traffic scenario and its interference-free throughput bound.
//!
//! An `n x n` grid carries `2n` concurrent flows: one down each column from
//! the top node to the bottom node, and one along each row from the leftmost
//! node to the rightmost. With every link running at full capacity and no
//! interference, a flow is limited only by the weakest link on its path, so
//! the aggregate bound is the sum of per-path bottlenecks.
//!
//! Rates are kept as integer kbps so that sums of 9.1 Mbps links are exact.

use std::collections::HashMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::topology::{Link, NodeId, Topology};

/// A data rate held in kbps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rate(u64);

/// Effective 802.11g link capacity once RTS/CTS and TCP ACK overheads are paid.
pub const DEFAULT_LINK_CAPACITY: Rate = Rate(9_100);

impl Rate {
    pub const ZERO: Rate = Rate(0);

    pub fn from_kbps(kbps: u64) -> Self {
        Rate(kbps)
    }

    /// Rounds to the nearest kbps; negative or non-finite input is rejected.
    pub fn from_mbps(mbps: f64) -> Result<Self> {
        if !mbps.is_finite() || mbps < 0.0 {
            return Err(Error::InvalidInput(format!(
                "rate {mbps} Mbps must be non-negative"
            )));
        }
        Ok(Rate((mbps * 1000.0).round() as u64))
    }

    pub fn kbps(self) -> u64 {
        self.0
    }

    pub fn mbps(self) -> f64 {
        self.0 as f64 / 1000.0
    }
}

impl std::ops::Add for Rate {
    type Output = Rate;
    fn add(self, rhs: Rate) -> Rate {
        Rate(self.0 + rhs.0)
    }
}

impl std::iter::Sum for Rate {
    fn sum<I: Iterator<Item = Rate>>(iter: I) -> Rate {
        iter.fold(Rate::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Rate {
    /// Mbps with at least one decimal: `54.6`, `91.0`, `9.125`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / 1000;
        let frac = self.0 % 1000;
        if frac == 0 {
            write!(f, "{whole}.0")
        } else {
            let digits = format!("{frac:03}");
            write!(f, "{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.mbps())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Vertical,
    Horizontal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Flow {
    pub id: usize,
    pub direction: Direction,
    pub src: NodeId,
    pub dst: NodeId,
    pub path: Vec<NodeId>,
}

impl Flow {
    pub fn links(&self) -> impl Iterator<Item = Link> + '_ {
        self.path.windows(2).map(|w| Link::new(w[0], w[1]))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrafficScenario {
    pub rows: usize,
    pub cols: usize,
    pub flows: Vec<Flow>,
    pub link_capacity: Rate,
    /// Set for non-square grids, which the standard pattern does not cover.
    pub rectangular: bool,
}

/// The `2n` column and row flows of an `n x n` grid.
pub fn build_scenario(topology: &Topology) -> Result<TrafficScenario> {
    if !topology.is_square() {
        return Err(Error::NonSquareGrid {
            rows: topology.rows(),
            cols: topology.cols(),
        });
    }
    build_scenario_rect(topology)
}

/// Same rule on a rectangular grid: `cols` column flows and `rows` row flows.
pub fn build_scenario_rect(topology: &Topology) -> Result<TrafficScenario> {
    let (rows, cols) = (topology.rows(), topology.cols());
    if rows < 2 || cols < 2 {
        return Err(Error::DegenerateGrid { rows, cols });
    }
    let at = |r, c| topology.node_at(r, c).expect("inside grid");
    let mut flows = Vec::with_capacity(rows + cols);
    for c in 0..cols {
        let path: Vec<NodeId> = (0..rows).map(|r| at(r, c)).collect();
        flows.push(Flow {
            id: flows.len(),
            direction: Direction::Vertical,
            src: path[0],
            dst: path[rows - 1],
            path,
        });
    }
    for r in 0..rows {
        let path: Vec<NodeId> = (0..cols).map(|c| at(r, c)).collect();
        flows.push(Flow {
            id: flows.len(),
            direction: Direction::Horizontal,
            src: path[0],
            dst: path[cols - 1],
            path,
        });
    }
    Ok(TrafficScenario {
        rows,
        cols,
        flows,
        link_capacity: DEFAULT_LINK_CAPACITY,
        rectangular: rows != cols,
    })
}

impl TrafficScenario {
    pub fn with_link_capacity(mut self, capacity: Rate) -> Self {
        self.link_capacity = capacity;
        self
    }
}

/// Bottleneck capacity of a path given the capacities of its links in order.
pub fn path_capacity(link_capacities: &[Rate]) -> Result<Rate> {
    link_capacities
        .iter()
        .copied()
        .min()
        .ok_or(Error::EmptyPath)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CapacityBound {
    pub per_flow: Vec<Rate>,
    pub aggregate: Rate,
}

/// Interference-free aggregate bound with every link at the scenario's capacity.
pub fn upper_bound(topology: &Topology, scenario: &TrafficScenario) -> Result<CapacityBound> {
    let cap = scenario.link_capacity;
    upper_bound_with(topology, scenario, |_| cap)
}

/// As [`upper_bound`] with per-link capacities.
pub fn upper_bound_with(
    topology: &Topology,
    scenario: &TrafficScenario,
    capacity: impl Fn(Link) -> Rate,
) -> Result<CapacityBound> {
    if topology.channels() < topology.max_radios() {
        return Err(Error::ChannelsConstraint {
            channels: topology.channels(),
            radios: topology.max_radios(),
        });
    }
    let mut per_flow = Vec::with_capacity(scenario.flows.len());
    for flow in &scenario.flows {
        let mut caps = Vec::with_capacity(flow.path.len());
        for link in flow.links() {
            if topology.link_id(link.low(), link.high()).is_none() {
                return Err(Error::InvalidInput(format!(
                    "flow {} uses {link}, which is not a link of the topology",
                    flow.id
                )));
            }
            caps.push(capacity(link));
        }
        per_flow.push(path_capacity(&caps)?);
    }
    let aggregate = per_flow.iter().copied().sum();
    Ok(CapacityBound {
        per_flow,
        aggregate,
    })
}

/// Routes each flow's rate along its path and checks the flow constraints:
/// per-node continuity at intermediate nodes, no directed link above
/// `link_capacity`, and total sent equal to total received.
pub fn verify_flow_conservation(scenario: &TrafficScenario, per_flow: &[Rate]) -> bool {
    if per_flow.len() != scenario.flows.len() {
        return false;
    }
    let mut load: HashMap<(NodeId, NodeId), u64> = HashMap::new();
    // net inflow minus outflow per node, and expected sink-minus-source balance
    let mut net: HashMap<NodeId, i128> = HashMap::new();
    let mut expected: HashMap<NodeId, i128> = HashMap::new();
    let (mut sent, mut received) = (0u128, 0u128);
    for (flow, rate) in scenario.flows.iter().zip(per_flow) {
        let r = rate.kbps();
        for w in flow.path.windows(2) {
            *load.entry((w[0], w[1])).or_default() += r;
            *net.entry(w[1]).or_default() += r as i128;
            *net.entry(w[0]).or_default() -= r as i128;
        }
        *expected.entry(flow.dst).or_default() += r as i128;
        *expected.entry(flow.src).or_default() -= r as i128;
        sent += r as u128;
        received += r as u128;
    }
    let within_capacity = load.values().all(|&l| l <= scenario.link_capacity.kbps());
    let balanced = net
        .keys()
        .chain(expected.keys())
        .all(|n| net.get(n).copied().unwrap_or(0) == expected.get(n).copied().unwrap_or(0));
    within_capacity && balanced && sent >= received
}

/// Columns `grid,flow_id,src,dst,bound_mbps`, then a `total` row.
pub fn bound_csv(scenario: &TrafficScenario, bound: &CapacityBound) -> String {
    let grid = format!("{}x{}", scenario.rows, scenario.cols);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["grid", "flow_id", "src", "dst", "bound_mbps"])
        .expect("in-memory write");
    for (flow, rate) in scenario.flows.iter().zip(&bound.per_flow) {
        w.write_record([
            grid.clone(),
            flow.id.to_string(),
            flow.src.to_string(),
            flow.dst.to_string(),
            rate.to_string(),
        ])
        .expect("in-memory write");
    }
    w.write_record([
        grid,
        "total".into(),
        String::new(),
        String::new(),
        bound.aggregate.to_string(),
    ])
    .expect("in-memory write");
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{make_grid, GridSpec};

    fn mbps(x: f64) -> Rate {
        Rate::from_mbps(x).unwrap()
    }

    #[test]
    fn rate_display() {
        assert_eq!(mbps(54.6).to_string(), "54.6");
        assert_eq!(mbps(91.0).to_string(), "91.0");
        assert_eq!(Rate::from_kbps(9125).to_string(), "9.125");
        assert_eq!(Rate::from_kbps(50).to_string(), "0.05");
        assert!(Rate::from_mbps(-1.0).is_err());
        assert!(Rate::from_mbps(f64::NAN).is_err());
    }

    #[test]
    fn scenario_shapes() {
        let s = build_scenario(&make_grid(&GridSpec::square(3)).unwrap()).unwrap();
        assert_eq!(s.flows.len(), 6);
        assert!(s.flows.iter().all(|f| f.path.len() == 3));
        assert_eq!(s.flows[0].path, vec![0, 3, 6]);
        assert_eq!(s.flows[3].path, vec![0, 1, 2]);
        assert!(!s.rectangular);

        let s = build_scenario(&make_grid(&GridSpec::square(6)).unwrap()).unwrap();
        assert_eq!(s.flows.len(), 12);

        assert!(matches!(
            build_scenario(&make_grid(&GridSpec::square(1)).unwrap()),
            Err(Error::DegenerateGrid { .. })
        ));
        let rect = make_grid(&GridSpec::new(2, 4)).unwrap();
        assert!(matches!(
            build_scenario(&rect),
            Err(Error::NonSquareGrid { .. })
        ));
        let s = build_scenario_rect(&rect).unwrap();
        assert_eq!(s.flows.len(), 6);
        assert!(s.rectangular);
    }

    #[test]
    fn bottlenecks() {
        assert_eq!(path_capacity(&[mbps(9.1), mbps(9.1)]), Ok(mbps(9.1)));
        assert_eq!(
            path_capacity(&[mbps(9.1), mbps(4.0), mbps(9.1)]),
            Ok(mbps(4.0))
        );
        assert_eq!(path_capacity(&[mbps(9.1)]), Ok(mbps(9.1)));
        assert_eq!(path_capacity(&[]), Err(Error::EmptyPath));
    }

    #[test]
    fn bound_and_conservation() {
        let t = make_grid(&GridSpec::square(3)).unwrap();
        let s = build_scenario(&t).unwrap();
        let b = upper_bound(&t, &s).unwrap();
        assert_eq!(b.aggregate, mbps(54.6));
        assert!(verify_flow_conservation(&s, &b.per_flow));
        assert!(verify_flow_conservation(&s, &[Rate::ZERO; 6]));
        let mut over = b.per_flow.clone();
        over[2] = mbps(9.2);
        assert!(!verify_flow_conservation(&s, &over));
        assert!(!verify_flow_conservation(&s, &b.per_flow[..5]));
    }

    #[test]
    fn weak_link_lowers_one_flow() {
        let t = make_grid(&GridSpec::square(3)).unwrap();
        let s = build_scenario(&t).unwrap();
        let b = upper_bound_with(&t, &s, |l| {
            if l == Link::new(3, 6) {
                mbps(4.0)
            } else {
                mbps(9.1)
            }
        })
        .unwrap();
        assert_eq!(b.per_flow[0], mbps(4.0));
        assert_eq!(b.aggregate, mbps(9.1 * 5.0 + 4.0));
    }

    #[test]
    fn csv_has_total_row() {
        let t = make_grid(&GridSpec::square(3)).unwrap();
        let s = build_scenario(&t).unwrap();
        let b = upper_bound(&t, &s).unwrap();
        let text = bound_csv(&s, &b);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "grid,flow_id,src,dst,bound_mbps");
        assert_eq!(lines[1], "3x3,0,0,6,9.1");
        assert_eq!(lines[7], "3x3,total,,,54.6");
    }
}

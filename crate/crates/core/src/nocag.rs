//! Near-optimal channel assignment for grids (NOCAG).
//!
//! Nodes are visited in id order and, for each node `i`, its neighbours `j`
//! in east/south/west/north order. Every visited pair falls into one of five
//! scenarios:
//!
//! 1. the pair already shares a channel: nothing changes;
//! 2. both nodes have a free radio: a fresh channel is placed on both, chosen
//!    to avoid the channels used around either node;
//! 3. only `i` has a free radio: `i` takes one of `j`'s channels, preferring
//!    one its other neighbours do not use;
//! 4. only `j` has a free radio: the mirror of 3;
//! 5. neither has a free radio: one channel of `j` is swapped for one of `i`.
//!
//! Radios still free after the sweep get the channel that adds the fewest
//! active conflicts. Among equally good channels the one carried by fewer
//! radios network-wide wins, then the lowest channel id, so the result is
//! fully deterministic.
//!
//! In scenario 2 a fresh channel is only taken when it does not give some
//! already-connected neighbour a second common channel. Failing that, one
//! node adopts a channel the other already holds, which keeps a radio free.
//! This is what makes node C take channel 3 from D on the 2x2 walkthrough
//! grid instead of a second copy of channel 1.

use serde::Serialize;

use crate::assignment::{Channel, ChannelAssignment, ChannelSet};
use crate::conflict::{build_conflict_graph, ConflictGraph, DEFAULT_RADIUS_HOPS};
use crate::error::{Error, Result};
use crate::topology::{NodeId, Topology};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    SkipCommon,
    BothFree,
    IFree,
    JFree,
    BothFullSwap,
}

/// Candidate pool a channel was drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pool {
    /// Fresh channel unused by either node and by their other neighbours.
    Refined,
    /// Fresh channel that creates no second common channel with a neighbour.
    NoDoubleCommon,
    /// A channel the other node of the pair already holds.
    Reuse,
    /// Any fresh channel.
    Fresh,
    /// Channel minimising resulting conflicts when nothing else applies.
    LeastConflict,
    /// Held by the other node and unused by this node's other neighbours.
    UnusedNearby,
    /// Held by the other node, least used by this node's other neighbours.
    LeastUsedNearby,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Action {
    None,
    AddBoth {
        channel: Channel,
        pool: Pool,
    },
    AddI {
        channel: Channel,
        pool: Pool,
    },
    AddJ {
        channel: Channel,
        pool: Pool,
    },
    /// `added` replaces `removed` on `node`.
    Swap {
        node: NodeId,
        added: Channel,
        removed: Channel,
    },
    SwapSkipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub pair: (NodeId, NodeId),
    pub scenario: Scenario,
    pub action: Action,
    /// `(channel, uses)` for every candidate that was ranked.
    pub usage: Vec<(Channel, usize)>,
}

/// A radio assigned by the post-sweep fill pass.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FillStep {
    pub node: NodeId,
    pub channel: Channel,
    pub added_conflicts: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct NocagTrace {
    pub steps: Vec<TraceStep>,
    pub fills: Vec<FillStep>,
}

impl NocagTrace {
    /// Line-delimited JSON, one record per step followed by one per fill.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            out.push_str(&serde_json::to_string(step).expect("step serializes"));
            out.push('\n');
        }
        for fill in &self.fills {
            out.push_str(&serde_json::to_string(&FillRecord { fill }).expect("fill serializes"));
            out.push('\n');
        }
        out
    }
}

#[derive(Serialize)]
struct FillRecord<'a> {
    fill: &'a FillStep,
}

/// Number of pair visits in the sweep.
pub fn step_count(trace: &NocagTrace) -> usize {
    trace.steps.len()
}

pub fn assign_nocag(topology: &Topology, cs_max: u8) -> Result<(ChannelAssignment, NocagTrace)> {
    let cg = build_conflict_graph(topology, DEFAULT_RADIUS_HOPS)?;
    assign_nocag_with(topology, cs_max, &cg)
}

/// As [`assign_nocag`], scoring the fill pass against a caller-supplied conflict graph.
pub fn assign_nocag_with(
    topology: &Topology,
    cs_max: u8,
    cg: &ConflictGraph,
) -> Result<(ChannelAssignment, NocagTrace)> {
    if cs_max == 0 || cs_max > topology.channels() {
        return Err(Error::InvalidInput(format!(
            "cs_max {cs_max} must be in 1..={}",
            topology.channels()
        )));
    }
    if cs_max < topology.max_radios() {
        return Err(Error::InvalidInput(format!(
            "{cs_max} channels cannot serve {} radios on one node",
            topology.max_radios()
        )));
    }
    let mut run = Run {
        topology,
        cg,
        all: ChannelSet::first(cs_max),
        ca: ChannelAssignment::empty(topology),
        trace: NocagTrace::default(),
    };
    for i in 0..topology.node_count() {
        for j in topology.neighbors_iter(i) {
            run.visit(i, j);
        }
    }
    run.fill();
    Ok((run.ca, run.trace))
}

struct Run<'a> {
    topology: &'a Topology,
    cg: &'a ConflictGraph,
    all: ChannelSet,
    ca: ChannelAssignment,
    trace: NocagTrace,
}

impl Run<'_> {
    fn free(&self, n: NodeId) -> bool {
        self.ca.set(n).len() < self.topology.radios(n) as usize
    }

    /// Neighbours of `n` other than `except`.
    fn others(&self, n: NodeId, except: NodeId) -> Vec<NodeId> {
        self.topology
            .neighbors_iter(n)
            .filter(|&x| x != except)
            .collect()
    }

    fn union_of(&self, nodes: &[NodeId]) -> ChannelSet {
        nodes
            .iter()
            .fold(ChannelSet::EMPTY, |acc, &n| acc.union(self.ca.set(n)))
    }

    /// How many of `nodes` hold `ch`; each node counts once.
    fn uses(&self, nodes: &[NodeId], ch: Channel) -> usize {
        nodes
            .iter()
            .filter(|&&n| self.ca.set(n).contains(ch))
            .count()
    }

    fn global_uses(&self, ch: Channel) -> usize {
        self.ca.sets().iter().filter(|s| s.contains(ch)).count()
    }

    /// Least-used candidate over `nodes`; ties go to global usage, then id.
    fn least_used(
        &self,
        candidates: ChannelSet,
        nodes: &[NodeId],
        usage: &mut Vec<(Channel, usize)>,
    ) -> Option<Channel> {
        let ranked: Vec<(Channel, usize)> = candidates
            .iter()
            .map(|ch| (ch, self.uses(nodes, ch)))
            .collect();
        usage.extend_from_slice(&ranked);
        ranked
            .into_iter()
            .min_by_key(|&(ch, n)| (n, self.global_uses(ch), ch))
            .map(|(ch, _)| ch)
    }

    /// Channels that `n` can add without gaining a second common channel
    /// with a neighbour (other than `except`) it is already connected to.
    fn no_double(&self, n: NodeId, except: NodeId) -> ChannelSet {
        let own = self.ca.set(n);
        let blocked = self
            .topology
            .neighbors_iter(n)
            .filter(|&x| x != except)
            .map(|x| self.ca.set(x))
            .filter(|s| !s.is_disjoint(own))
            .fold(ChannelSet::EMPTY, ChannelSet::union);
        self.all.difference(blocked)
    }

    fn visit(&mut self, i: NodeId, j: NodeId) {
        let (cs_i, cs_j) = (self.ca.set(i), self.ca.set(j));
        let mut usage = Vec::new();
        let (scenario, action) = if !cs_i.is_disjoint(cs_j) {
            (Scenario::SkipCommon, Action::None)
        } else {
            match (self.free(i), self.free(j)) {
                (true, true) => (Scenario::BothFree, self.both_free(i, j, &mut usage)),
                (true, false) => (Scenario::IFree, self.one_free(i, j, &mut usage, true)),
                (false, true) => (Scenario::JFree, self.one_free(j, i, &mut usage, false)),
                (false, false) => (Scenario::BothFullSwap, self.both_full(i, j, &mut usage)),
            }
        };
        self.apply(i, j, &action);
        self.trace.steps.push(TraceStep {
            pair: (i, j),
            scenario,
            action,
            usage,
        });
    }

    fn apply(&mut self, i: NodeId, j: NodeId, action: &Action) {
        match *action {
            Action::None | Action::SwapSkipped => {}
            Action::AddBoth { channel, .. } => {
                self.ca.set_mut(i).insert(channel);
                self.ca.set_mut(j).insert(channel);
            }
            Action::AddI { channel, .. } => {
                self.ca.set_mut(i).insert(channel);
            }
            Action::AddJ { channel, .. } => {
                self.ca.set_mut(j).insert(channel);
            }
            Action::Swap {
                node,
                added,
                removed,
            } => {
                let set = self.ca.set_mut(node);
                set.remove(removed);
                set.insert(added);
            }
        }
    }

    fn both_free(&self, i: NodeId, j: NodeId, usage: &mut Vec<(Channel, usize)>) -> Action {
        let adj_i = self.others(i, j);
        let adj_j = self.others(j, i);
        let mut around = adj_i.clone();
        around.extend(adj_j.iter().copied().filter(|n| !adj_i.contains(n)));

        let (cs_i, cs_j) = (self.ca.set(i), self.ca.set(j));
        let fresh = self.all.difference(cs_i).difference(cs_j);
        let refined = fresh
            .difference(self.union_of(&adj_i))
            .difference(self.union_of(&adj_j));
        if let Some(channel) = self.least_used(refined, &around, usage) {
            return Action::AddBoth {
                channel,
                pool: Pool::Refined,
            };
        }

        let safe_i = self.no_double(i, j);
        let safe_j = self.no_double(j, i);
        let safe = fresh.intersection(safe_i).intersection(safe_j);
        if let Some(channel) = self.least_used(safe, &around, usage) {
            return Action::AddBoth {
                channel,
                pool: Pool::NoDoubleCommon,
            };
        }

        if let Some(channel) = self.least_used(cs_j.intersection(safe_i), &adj_i, usage) {
            return Action::AddI {
                channel,
                pool: Pool::Reuse,
            };
        }
        if let Some(channel) = self.least_used(cs_i.intersection(safe_j), &adj_j, usage) {
            return Action::AddJ {
                channel,
                pool: Pool::Reuse,
            };
        }

        if let Some(channel) = self.least_used(fresh, &around, usage) {
            return Action::AddBoth {
                channel,
                pool: Pool::Fresh,
            };
        }

        // Every channel already sits on i or j: one node adopts a channel of the other.
        let mut best: Option<(usize, u8, Action)> = None;
        for (side, target, pool) in [(0u8, i, cs_j), (1u8, j, cs_i)] {
            for channel in pool.iter() {
                let score = self.cg.count_covered(&self.ops_with(target, channel));
                usage.push((channel, score));
                let action = if side == 0 {
                    Action::AddI {
                        channel,
                        pool: Pool::LeastConflict,
                    }
                } else {
                    Action::AddJ {
                        channel,
                        pool: Pool::LeastConflict,
                    }
                };
                if best
                    .as_ref()
                    .is_none_or(|(s, sd, _)| (score, side) < (*s, *sd))
                {
                    best = Some((score, side, action));
                }
            }
        }
        best.map(|(_, _, a)| a).unwrap_or(Action::None)
    }

    /// `free` has a radio left, `full` does not.
    fn one_free(
        &self,
        free: NodeId,
        full: NodeId,
        usage: &mut Vec<(Channel, usize)>,
        free_is_i: bool,
    ) -> Action {
        let adj = self.others(free, full);
        let offered = self.ca.set(full);
        let unused = offered.difference(self.union_of(&adj));
        let (channel, pool) = match self.least_used(unused, &adj, usage) {
            Some(ch) => (ch, Pool::UnusedNearby),
            None => (
                self.least_used(offered, &adj, usage)
                    .expect("a full node holds at least one channel"),
                Pool::LeastUsedNearby,
            ),
        };
        if free_is_i {
            Action::AddI { channel, pool }
        } else {
            Action::AddJ { channel, pool }
        }
    }

    /// True when removing `ch` from `n` leaves some other link of `n` (not to
    /// `except`) without a common channel.
    fn removal_breaks(&self, n: NodeId, ch: Channel, except: NodeId) -> bool {
        let mut reduced = self.ca.set(n);
        reduced.remove(ch);
        self.topology
            .neighbors_iter(n)
            .filter(|&x| x != except)
            .any(|x| {
                !self.ca.set(n).is_disjoint(self.ca.set(x)) && reduced.is_disjoint(self.ca.set(x))
            })
    }

    /// Both nodes full and disjoint: `j` gives up its channel `l` for `k` from `i`.
    ///
    /// `k` is the channel of `i` least seen around `j`; `l` the channel of
    /// `j` least seen around `i`. Channels whose removal would disconnect
    /// `j` from another neighbour are passed over while alternatives exist,
    /// and if every choice on `j` would, the mirror swap on `i` is tried.
    fn both_full(&self, i: NodeId, j: NodeId, usage: &mut Vec<(Channel, usize)>) -> Action {
        let adj_i = self.others(i, j);
        let adj_j = self.others(j, i);
        let (cs_i, cs_j) = (self.ca.set(i), self.ca.set(j));

        let keep_j: ChannelSet = cs_j
            .iter()
            .filter(|&c| !self.removal_breaks(j, c, i))
            .collect();
        let keep_i: ChannelSet = cs_i
            .iter()
            .filter(|&c| !self.removal_breaks(i, c, j))
            .collect();

        let (node, added, removed) = if !keep_j.is_empty() || keep_i.is_empty() {
            let pool_j = if keep_j.is_empty() { cs_j } else { keep_j };
            let k = self.least_used(cs_i, &adj_j, usage);
            let l = self.least_used(pool_j, &adj_i, usage);
            (j, k, l)
        } else {
            let k = self.least_used(cs_j, &adj_i, usage);
            let l = self.least_used(keep_i, &adj_j, usage);
            (i, k, l)
        };
        match (added, removed) {
            (Some(added), Some(removed)) if !self.ca.set(node).contains(added) => Action::Swap {
                node,
                added,
                removed,
            },
            _ => Action::SwapSkipped,
        }
    }

    /// Operating channels if `node` also held `ch`.
    fn ops_with(&self, node: NodeId, ch: Channel) -> Vec<Option<Channel>> {
        let t = self.topology;
        let mut ops = self.cg.operating_channels(&self.ca);
        let set = self.ca.set(node).with(ch);
        for &l in t.incident_links(node) {
            let link = t.links()[l];
            let other = if link.low() == node {
                link.high()
            } else {
                link.low()
            };
            ops[l] = set.intersection(self.ca.set(other)).min();
        }
        ops
    }

    /// Gives every still-free radio the channel adding the fewest active
    /// conflicts. Channels that reconnect an uncovered link win first.
    fn fill(&mut self) {
        for n in 0..self.topology.node_count() {
            while self.free(n) {
                let ops = self.cg.operating_channels(&self.ca);
                let before = self
                    .cg
                    .count_touching(&ops, self.topology.incident_links(n));
                let best = self
                    .all
                    .difference(self.ca.set(n))
                    .iter()
                    .map(|ch| {
                        let ops = self.ops_with(n, ch);
                        let incident = self.topology.incident_links(n);
                        let uncovered = incident.iter().filter(|&&l| ops[l].is_none()).count();
                        let touching = self.cg.count_touching(&ops, incident);
                        (
                            uncovered,
                            touching.saturating_sub(before),
                            self.global_uses(ch),
                            ch,
                        )
                    })
                    .min();
                let Some((_, added_conflicts, _, channel)) = best else {
                    break;
                };
                self.ca.set_mut(n).insert(channel);
                self.trace.fills.push(FillStep {
                    node: n,
                    channel,
                    added_conflicts,
                });
            }
        }
    }
}

//! Brute-force channel assignment.
//!
//! Each node takes exactly `R_i` distinct channels, so the search space is the
//! product of the per-node `C(cs_max, R_i)` subsets. Nodes are filled in id
//! order and subsets tried in lexicographic order; a placement is dropped as
//! soon as it leaves a link to an earlier node uncovered. A branch is also cut
//! once its partial conflict count exceeds the best complete one, which never
//! changes the optimum because conflicts only accumulate.
//!
//! With symmetry pruning node 0 is fixed to `{1..R_0}`. Every assignment can
//! be relabelled into that form, so only relabelled duplicates are skipped.

use itertools::Itertools;
use serde::Serialize;

use super::check_channels;
use crate::assignment::{Channel, ChannelAssignment, ChannelSet};
use crate::conflict::{build_conflict_graph, ConflictGraph, DEFAULT_RADIUS_HOPS};
use crate::error::{Error, Result};
use crate::metrics::spread_of;
use crate::topology::Topology;

pub const DEFAULT_MAX_STATES: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_states: u64,
    pub symmetry_pruning: bool,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_states: DEFAULT_MAX_STATES,
            symmetry_pruning: true,
        }
    }
}

impl SearchBudget {
    pub fn new(max_states: u64) -> Result<Self> {
        if max_states == 0 {
            return Err(Error::InvalidInput("max_states must be at least 1".into()));
        }
        Ok(SearchBudget {
            max_states,
            symmetry_pruning: true,
        })
    }

    pub fn without_pruning(mut self) -> Self {
        self.symmetry_pruning = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BfcaOutcome {
    #[serde(skip)]
    pub assignment: ChannelAssignment,
    /// Active conflicts (TID) of the returned assignment.
    pub optimal_metric: usize,
    pub spread: usize,
    /// Partial and complete placements accepted during the search.
    pub states_explored: u64,
    /// True when the whole space was searched, so the result is optimal.
    pub exhausted: bool,
}

pub fn assign_bfca(topology: &Topology, cs_max: u8, budget: SearchBudget) -> Result<BfcaOutcome> {
    let cg = build_conflict_graph(topology, DEFAULT_RADIUS_HOPS)?;
    assign_bfca_with(topology, cs_max, budget, &cg)
}

pub fn assign_bfca_with(
    topology: &Topology,
    cs_max: u8,
    budget: SearchBudget,
    cg: &ConflictGraph,
) -> Result<BfcaOutcome> {
    check_channels(topology, cs_max)?;
    if budget.max_states == 0 {
        return Err(Error::InvalidInput("max_states must be at least 1".into()));
    }
    let m = topology.node_count();

    let mut choices: Vec<Vec<ChannelSet>> = topology
        .nodes()
        .iter()
        .map(|n| {
            (1..=cs_max)
                .combinations(n.radios as usize)
                .map(|c| c.into_iter().collect())
                .collect()
        })
        .collect();
    if budget.symmetry_pruning && m > 0 {
        choices[0] = vec![ChannelSet::first(topology.radios(0))];
    }

    // Links whose higher endpoint is `v` become fixed when `v` is placed.
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (id, link) in topology.links().iter().enumerate() {
        closing[link.high()].push(id);
    }

    let mut search = Search {
        topology,
        cg,
        cs_max,
        choices,
        closing,
        sets: vec![ChannelSet::EMPTY; m],
        ops: vec![None; topology.link_count()],
        max_states: budget.max_states,
        states: 0,
        stopped: false,
        best: None,
    };
    search.descend(0, 0);

    let exhausted = !search.stopped;
    match search.best {
        Some(best) => Ok(BfcaOutcome {
            assignment: ChannelAssignment::from_sets(cs_max, best.sets),
            optimal_metric: best.tid,
            spread: best.spread,
            states_explored: search.states,
            exhausted,
        }),
        None if exhausted => Err(Error::Infeasible { channels: cs_max }),
        None => Err(Error::BudgetExhausted {
            states: search.states,
        }),
    }
}

struct Best {
    tid: usize,
    spread: usize,
    sets: Vec<ChannelSet>,
}

struct Search<'a> {
    topology: &'a Topology,
    cg: &'a ConflictGraph,
    cs_max: u8,
    choices: Vec<Vec<ChannelSet>>,
    closing: Vec<Vec<usize>>,
    sets: Vec<ChannelSet>,
    ops: Vec<Option<Channel>>,
    max_states: u64,
    states: u64,
    stopped: bool,
    best: Option<Best>,
}

impl Search<'_> {
    fn descend(&mut self, v: usize, tid: usize) {
        if v == self.sets.len() {
            self.leaf(tid);
            return;
        }
        for c in 0..self.choices[v].len() {
            let set = self.choices[v][c];
            let links = &self.closing[v];
            let links_covered = links.iter().all(|&l| {
                let other = self.topology.links()[l].low();
                !self.sets[other].is_disjoint(set)
            });
            if !links_covered {
                continue;
            }
            if self.states >= self.max_states {
                self.stopped = true;
                return;
            }
            self.states += 1;

            self.sets[v] = set;
            let mut added = 0;
            for (x, &l) in self.closing[v].iter().enumerate() {
                let other = self.topology.links()[l].low();
                let ch = self.sets[other].intersection(set).min();
                self.ops[l] = ch;
                // earlier-closed links and links closed just before this one at `v`
                added += self
                    .cg
                    .conflicting(l)
                    .iter()
                    .filter(|&&b| {
                        self.ops[b] == ch
                            && (self.topology.links()[b].high() < v
                                || self.closing[v][..x].contains(&b))
                    })
                    .count();
            }
            let total = tid + added;
            let promising = self.best.as_ref().is_none_or(|b| total <= b.tid);
            if promising {
                self.descend(v + 1, total);
            }
            for &l in &self.closing[v] {
                self.ops[l] = None;
            }
            self.sets[v] = ChannelSet::EMPTY;
            if self.stopped {
                return;
            }
        }
    }

    fn leaf(&mut self, tid: usize) {
        let spread = spread_of(&self.sets, self.cs_max);
        let better = self
            .best
            .as_ref()
            .is_none_or(|b| (tid, spread) < (b.tid, b.spread));
        if better {
            self.best = Some(Best {
                tid,
                spread,
                sets: self.sets.clone(),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conflict::active_conflicts;
    use crate::topology::{make_grid, GridSpec};

    fn grid(rows: usize, cols: usize, radios: u8, channels: u8) -> Topology {
        make_grid(&GridSpec::new(rows, cols).radios(radios).channels(channels)).unwrap()
    }

    #[test]
    fn single_link() {
        let t = grid(1, 2, 1, 3);
        let out = assign_bfca(&t, 3, SearchBudget::default()).unwrap();
        assert_eq!(out.optimal_metric, 0);
        assert!(out.exhausted);
        let lists: Vec<Vec<Channel>> = out
            .assignment
            .sets()
            .iter()
            .map(|s| s.iter().collect())
            .collect();
        assert_eq!(lists, vec![vec![1], vec![1]]);
    }

    #[test]
    fn single_radio_line_is_forced() {
        let t = grid(1, 3, 1, 2);
        let out = assign_bfca(&t, 2, SearchBudget::default()).unwrap();
        assert_eq!(out.optimal_metric, 1);
    }

    #[test]
    fn reported_metric_matches_recount() {
        let t = grid(2, 3, 2, 3);
        let cg = build_conflict_graph(&t, DEFAULT_RADIUS_HOPS).unwrap();
        let out = assign_bfca(&t, 3, SearchBudget::default()).unwrap();
        assert_eq!(
            active_conflicts(&cg, &out.assignment),
            Ok(out.optimal_metric)
        );
        assert_eq!(spread_of(out.assignment.sets(), 3), out.spread);
    }

    #[test]
    fn budget_cut_is_flagged() {
        let t = grid(3, 3, 2, 3);
        let out = assign_bfca(&t, 3, SearchBudget::new(1000).unwrap()).unwrap();
        assert!(!out.exhausted);
        assert_eq!(out.states_explored, 1000);
        assert!(matches!(
            assign_bfca(&t, 3, SearchBudget::new(3).unwrap()),
            Err(Error::BudgetExhausted { states: 3 })
        ));
        assert!(SearchBudget::new(0).is_err());
    }

    #[test]
    fn pruning_fixes_node_zero() {
        let t = grid(2, 2, 2, 3);
        let pruned = assign_bfca(&t, 3, SearchBudget::default()).unwrap();
        let full = assign_bfca(&t, 3, SearchBudget::default().without_pruning()).unwrap();
        assert_eq!(pruned.assignment.set(0), ChannelSet::first(2));
        assert_eq!(pruned.optimal_metric, full.optimal_metric);
        assert!(pruned.states_explored < full.states_explored);
    }
}

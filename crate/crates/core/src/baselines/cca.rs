//! Link-ordered greedy assignment (CCA baseline).
//!
//! Links are taken in descending order of potential conflicts and each gets
//! the lowest channel its endpoints can accept. There is no attempt to balance
//! channel usage, so low channel ids are heavily favoured.

use super::check_channels;
use crate::assignment::{Channel, ChannelAssignment, ChannelSet};
use crate::conflict::{build_conflict_graph, ConflictGraph, DEFAULT_RADIUS_HOPS};
use crate::error::Result;
use crate::topology::{NodeId, Topology};

pub fn assign_cca(topology: &Topology, cs_max: u8) -> Result<ChannelAssignment> {
    let cg = build_conflict_graph(topology, DEFAULT_RADIUS_HOPS)?;
    assign_cca_with(topology, cs_max, &cg)
}

pub fn assign_cca_with(
    topology: &Topology,
    cs_max: u8,
    cg: &ConflictGraph,
) -> Result<ChannelAssignment> {
    check_channels(topology, cs_max)?;
    let all = ChannelSet::first(cs_max);
    let mut ca = ChannelAssignment::empty(topology);
    let free = |ca: &ChannelAssignment, n: NodeId| ca.set(n).len() < topology.radios(n) as usize;

    let mut order: Vec<usize> = (0..topology.link_count()).collect();
    order.sort_by_key(|&l| (std::cmp::Reverse(cg.degree(l)), l));

    for l in order {
        let link = topology.links()[l];
        let (u, v) = (link.low(), link.high());
        let (cs_u, cs_v) = (ca.set(u), ca.set(v));
        if !cs_u.is_disjoint(cs_v) {
            continue;
        }
        let fresh = all.difference(cs_u).difference(cs_v).min();
        match (free(&ca, u), free(&ca, v), fresh) {
            (true, true, Some(ch)) => {
                ca.set_mut(u).insert(ch);
                ca.set_mut(v).insert(ch);
            }
            (fu, fv, _) if fu || fv => {
                // one endpoint adopts a channel the other already has
                let to_u = if fu { cs_v.min() } else { None };
                let to_v = if fv { cs_u.min() } else { None };
                match (to_u, to_v) {
                    (Some(a), Some(b)) if b < a => ca.set_mut(v).insert(b),
                    (Some(a), _) => ca.set_mut(u).insert(a),
                    (None, Some(b)) => ca.set_mut(v).insert(b),
                    (None, None) => false,
                };
            }
            _ => retune(topology, &mut ca, u, v),
        }
    }

    for n in 0..topology.node_count() {
        while free(&ca, n) {
            let Some(ch) = all.difference(ca.set(n)).min() else {
                break;
            };
            ca.set_mut(n).insert(ch);
        }
    }
    Ok(ca)
}

/// Both endpoints are full: `v` drops the channel it can best spare and
/// takes the lowest channel of `u`.
fn retune(topology: &Topology, ca: &mut ChannelAssignment, u: NodeId, v: NodeId) {
    let Some(take) = ca.set(u).min() else { return };
    let cs_v = ca.set(v);
    let broken = |drop: Channel| {
        let reduced = cs_v.difference(ChannelSet::EMPTY.with(drop)).with(take);
        topology
            .neighbors_iter(v)
            .filter(|&x| x != u)
            .filter(|&x| !ca.set(x).is_disjoint(cs_v) && ca.set(x).is_disjoint(reduced))
            .count()
    };
    if let Some(drop) = cs_v.iter().min_by_key(|&c| (broken(c), c)) {
        let set = ca.set_mut(v);
        set.remove(drop);
        set.insert(take);
    }
}

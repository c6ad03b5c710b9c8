//! Potential-conflict structure over links.
//!
//! Two links conflict when some endpoint of one lies within `radius_hops`
//! grid hops of some endpoint of the other. Links sharing a node are always
//! in conflict (distance 0). A conflict pair is *active* when both links run
//! on the same operating channel; the count of active pairs is the TID.

use crate::assignment::{Channel, ChannelAssignment};
use crate::error::{Error, Result};
use crate::topology::{Link, Topology};

pub const DEFAULT_RADIUS_HOPS: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictGraph {
    radius_hops: usize,
    links: Vec<Link>,
    pairs: Vec<(usize, usize)>,
    adjacent: Vec<Vec<usize>>,
}

pub fn build_conflict_graph(topology: &Topology, radius_hops: usize) -> Result<ConflictGraph> {
    if radius_hops == 0 {
        return Err(Error::InvalidInput(
            "conflict radius must be at least 1 hop".into(),
        ));
    }
    let links = topology.links().to_vec();
    let mut pairs = Vec::new();
    let mut adjacent = vec![Vec::new(); links.len()];
    for (a, la) in links.iter().enumerate() {
        for (b, lb) in links.iter().enumerate().skip(a + 1) {
            let closest = la
                .endpoints()
                .iter()
                .flat_map(|&u| lb.endpoints().map(|v| topology.hops(u, v)))
                .min()
                .expect("links have endpoints");
            if closest <= radius_hops {
                pairs.push((a, b));
                adjacent[a].push(b);
                adjacent[b].push(a);
            }
        }
    }
    Ok(ConflictGraph {
        radius_hops,
        links,
        pairs,
        adjacent,
    })
}

impl ConflictGraph {
    pub fn radius_hops(&self) -> usize {
        self.radius_hops
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// Conflict pairs as link-id pairs `(a, b)` with `a < b`.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Links that conflict with link `id`.
    pub fn conflicting(&self, id: usize) -> &[usize] {
        &self.adjacent[id]
    }

    /// Number of potential conflicts of link `id` (its conflict-graph degree).
    pub fn degree(&self, id: usize) -> usize {
        self.adjacent[id].len()
    }

    pub fn conflicts(&self, a: usize, b: usize) -> bool {
        self.adjacent[a].contains(&b)
    }

    /// Operating channel of each link, `None` where the endpoints share nothing.
    pub fn operating_channels(&self, ca: &ChannelAssignment) -> Vec<Option<Channel>> {
        self.links.iter().map(|&l| ca.common(l).min()).collect()
    }

    /// Co-channel conflict pairs, counting only links that are covered.
    pub(crate) fn count_covered(&self, ops: &[Option<Channel>]) -> usize {
        self.pairs
            .iter()
            .filter(|&&(a, b)| ops[a].is_some() && ops[a] == ops[b])
            .count()
    }

    /// Active pairs that involve at least one link from `touched`.
    pub(crate) fn count_touching(&self, ops: &[Option<Channel>], touched: &[usize]) -> usize {
        let mut count = 0;
        for (i, &a) in touched.iter().enumerate() {
            let Some(ch) = ops[a] else { continue };
            for &b in &self.adjacent[a] {
                if ops[b] != Some(ch) {
                    continue;
                }
                // pairs with both ends in `touched` are counted once, from the earlier entry
                match touched.iter().position(|&t| t == b) {
                    Some(j) if j < i => {}
                    _ => count += 1,
                }
            }
        }
        count
    }
}

/// Total interference degree: co-channel conflict pairs under `ca`.
pub fn active_conflicts(cg: &ConflictGraph, ca: &ChannelAssignment) -> Result<usize> {
    let ops = cg.operating_channels(ca);
    if let Some(i) = ops.iter().position(Option::is_none) {
        return Err(Error::UncoveredLink(cg.links[i]));
    }
    Ok(cg.count_covered(&ops))
}

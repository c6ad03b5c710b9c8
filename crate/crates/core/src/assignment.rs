//! Channel assignments and the structural checks every algorithm shares.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::topology::{Link, NodeId, Topology};

/// Channel ids run from 1 to `cs_max`.
pub type Channel = u8;

/// Largest supported `cs_max`; channel sets are 64-bit masks.
pub const MAX_CHANNELS: u8 = 64;

/// A node's channel set `CS_i`, iterated in ascending order.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ChannelSet(u64);

impl ChannelSet {
    pub const EMPTY: ChannelSet = ChannelSet(0);

    /// The set `{1..=n}`.
    pub fn first(n: u8) -> Self {
        debug_assert!(n <= MAX_CHANNELS);
        if n >= 64 {
            ChannelSet(u64::MAX)
        } else {
            ChannelSet((1u64 << n) - 1)
        }
    }

    pub fn from_bits(bits: u64) -> Self {
        ChannelSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, ch: Channel) -> bool {
        (1..=MAX_CHANNELS).contains(&ch) && self.0 & bit(ch) != 0
    }

    pub fn insert(&mut self, ch: Channel) -> bool {
        let fresh = !self.contains(ch);
        self.0 |= bit(ch);
        fresh
    }

    pub fn remove(&mut self, ch: Channel) -> bool {
        let present = self.contains(ch);
        self.0 &= !bit(ch);
        present
    }

    pub fn with(mut self, ch: Channel) -> Self {
        self.insert(ch);
        self
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersection(self, other: ChannelSet) -> ChannelSet {
        ChannelSet(self.0 & other.0)
    }

    pub fn union(self, other: ChannelSet) -> ChannelSet {
        ChannelSet(self.0 | other.0)
    }

    pub fn difference(self, other: ChannelSet) -> ChannelSet {
        ChannelSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: ChannelSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn min(self) -> Option<Channel> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as Channel + 1)
    }

    pub fn iter(self) -> impl Iterator<Item = Channel> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let ch = bits.trailing_zeros() as Channel + 1;
            bits &= bits - 1;
            Some(ch)
        })
    }

    /// Applies a channel relabelling; `map[c - 1]` is the new id of channel `c`.
    pub fn relabel(self, map: &[Channel]) -> ChannelSet {
        self.iter()
            .fold(ChannelSet::EMPTY, |acc, c| acc.with(map[c as usize - 1]))
    }
}

fn bit(ch: Channel) -> u64 {
    debug_assert!(
        (1..=MAX_CHANNELS).contains(&ch),
        "channel {ch} out of range"
    );
    1u64 << (ch - 1)
}

impl FromIterator<Channel> for ChannelSet {
    fn from_iter<I: IntoIterator<Item = Channel>>(iter: I) -> Self {
        iter.into_iter().fold(ChannelSet::EMPTY, ChannelSet::with)
    }
}

impl fmt::Debug for ChannelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ChannelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, ch) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{ch}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for ChannelSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// Per-node channel sets over channels `1..=channels_available`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChannelAssignment {
    channels_available: u8,
    sets: Vec<ChannelSet>,
}

impl ChannelAssignment {
    /// Every node starts with no channel.
    pub fn empty(topology: &Topology) -> Self {
        ChannelAssignment {
            channels_available: topology.channels(),
            sets: vec![ChannelSet::EMPTY; topology.node_count()],
        }
    }

    /// Builds an assignment from explicit channel lists, rejecting duplicates
    /// within a node and ids outside `1..=channels_available`.
    pub fn from_lists<L: AsRef<[u32]>>(channels_available: u8, lists: &[L]) -> Result<Self> {
        if channels_available == 0 || channels_available > MAX_CHANNELS {
            return Err(Error::InvalidInput(format!(
                "channels_available must be in 1..={MAX_CHANNELS}, got {channels_available}"
            )));
        }
        let mut sets = Vec::with_capacity(lists.len());
        for (node, list) in lists.iter().enumerate() {
            let mut set = ChannelSet::EMPTY;
            for &ch in list.as_ref() {
                if ch == 0 || ch > channels_available as u32 {
                    return Err(Error::ChannelOutOfRange {
                        node,
                        channel: ch,
                        max: channels_available,
                    });
                }
                if !set.insert(ch as Channel) {
                    return Err(Error::InvariantViolation(format!(
                        "node {node} lists channel {ch} twice"
                    )));
                }
            }
            sets.push(set);
        }
        Ok(ChannelAssignment {
            channels_available,
            sets,
        })
    }

    pub(crate) fn from_sets(channels_available: u8, sets: Vec<ChannelSet>) -> Self {
        ChannelAssignment {
            channels_available,
            sets,
        }
    }

    pub fn channels_available(&self) -> u8 {
        self.channels_available
    }

    pub fn node_count(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, node: NodeId) -> ChannelSet {
        self.sets[node]
    }

    pub fn sets(&self) -> &[ChannelSet] {
        &self.sets
    }

    pub(crate) fn set_mut(&mut self, node: NodeId) -> &mut ChannelSet {
        &mut self.sets[node]
    }

    pub fn assigned_radios(&self) -> usize {
        self.sets.iter().map(|s| s.len()).sum()
    }

    /// Operating channel of `link`: the lowest channel both endpoints share.
    pub fn operating_channel(&self, link: Link) -> Result<Channel> {
        self.common(link).min().ok_or(Error::UncoveredLink(link))
    }

    pub fn common(&self, link: Link) -> ChannelSet {
        self.sets[link.low()].intersection(self.sets[link.high()])
    }

    /// Applies a channel relabelling to every node.
    pub fn relabel(&self, map: &[Channel]) -> ChannelAssignment {
        ChannelAssignment {
            channels_available: self.channels_available,
            sets: self.sets.iter().map(|s| s.relabel(map)).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&AssignmentDoc {
            channels_available: self.channels_available,
            assignment: self
                .sets
                .iter()
                .enumerate()
                .map(|(node, s)| NodeChannels {
                    node,
                    channels: s.iter().map(u32::from).collect(),
                })
                .collect(),
        })
        .expect("assignment serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut doc: AssignmentDoc = serde_json::from_str(text)?;
        doc.assignment.sort_by_key(|n| n.node);
        for (expected, entry) in doc.assignment.iter().enumerate() {
            if entry.node != expected {
                return Err(Error::InvariantViolation(format!(
                    "assignment nodes must be 0..{}, found {}",
                    doc.assignment.len(),
                    entry.node
                )));
            }
        }
        let lists: Vec<&[u32]> = doc
            .assignment
            .iter()
            .map(|n| n.channels.as_slice())
            .collect();
        Self::from_lists(doc.channels_available, &lists)
    }

    /// One CSV row per node: `node,channels` with channels joined by `;`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["node", "channels"])
            .expect("in-memory write");
        for (node, set) in self.sets.iter().enumerate() {
            let chans: Vec<String> = set.iter().map(|c| c.to_string()).collect();
            w.write_record([node.to_string(), chans.join(";")])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignmentDoc {
    channels_available: u8,
    assignment: Vec<NodeChannels>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeChannels {
    node: NodeId,
    channels: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidityReport {
    pub topology_preserved: bool,
    pub uncovered_links: Vec<Link>,
    pub multi_common_pairs: Vec<Link>,
    pub unassigned_radios: usize,
}

/// Checks that `ca` fits `topology` and reports coverage statistics.
pub fn validate(topology: &Topology, ca: &ChannelAssignment) -> Result<ValidityReport> {
    check_shape(topology, ca)?;
    let mut uncovered_links = Vec::new();
    let mut multi_common_pairs = Vec::new();
    for &link in topology.links() {
        match ca.common(link).len() {
            0 => uncovered_links.push(link),
            1 => {}
            _ => multi_common_pairs.push(link),
        }
    }
    let unassigned_radios = topology
        .nodes()
        .iter()
        .map(|n| n.radios as usize - ca.set(n.id).len())
        .sum();
    Ok(ValidityReport {
        topology_preserved: uncovered_links.is_empty(),
        uncovered_links,
        multi_common_pairs,
        unassigned_radios,
    })
}

/// Node count, channel range and radio capacity checks.
pub(crate) fn check_shape(topology: &Topology, ca: &ChannelAssignment) -> Result<()> {
    if ca.node_count() != topology.node_count() {
        return Err(Error::NodeCountMismatch {
            expected: topology.node_count(),
            found: ca.node_count(),
        });
    }
    let max = topology.channels();
    for (node, set) in ca.sets().iter().enumerate() {
        if let Some(ch) = set.iter().find(|&c| c > max) {
            return Err(Error::ChannelOutOfRange {
                node,
                channel: ch as u32,
                max,
            });
        }
        let radios = topology.radios(node);
        if set.len() > radios as usize {
            return Err(Error::TooManyChannels {
                node,
                assigned: set.len(),
                radios,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{make_grid, GridSpec};

    fn set(chs: &[Channel]) -> ChannelSet {
        chs.iter().copied().collect()
    }

    #[test]
    fn channel_set_basics() {
        let s = set(&[3, 1]);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(s.min(), Some(1));
        assert_eq!(ChannelSet::first(3), set(&[1, 2, 3]));
        assert_eq!(ChannelSet::first(64).len(), 64);
        assert_eq!(s.to_string(), "{1,3}");
        assert!(!s.contains(0));
        assert!(!s.contains(65));
    }

    #[test]
    fn operating_channel_is_lowest_common() {
        let ca = ChannelAssignment::from_lists(3, &[vec![1, 2], vec![2, 3]]).unwrap();
        assert_eq!(ca.operating_channel(Link::new(0, 1)), Ok(2));
        let ca = ChannelAssignment::from_lists(3, &[vec![1], vec![1]]).unwrap();
        assert_eq!(ca.operating_channel(Link::new(0, 1)), Ok(1));
        let ca = ChannelAssignment::from_lists(3, &[vec![1, 3], vec![1, 3]]).unwrap();
        assert_eq!(ca.operating_channel(Link::new(0, 1)), Ok(1));
        let ca = ChannelAssignment::from_lists(3, &[vec![1], vec![2]]).unwrap();
        assert_eq!(
            ca.operating_channel(Link::new(0, 1)),
            Err(Error::UncoveredLink(Link::new(0, 1)))
        );
    }

    #[test]
    fn validate_single_link() {
        let t = make_grid(&GridSpec::new(1, 2)).unwrap();
        let ca = ChannelAssignment::from_lists(3, &[vec![1], vec![1]]).unwrap();
        let r = validate(&t, &ca).unwrap();
        assert!(r.topology_preserved);
        assert!(r.multi_common_pairs.is_empty());
        assert_eq!(r.unassigned_radios, 2);

        let ca = ChannelAssignment::from_lists(3, &[vec![1, 2], vec![3]]).unwrap();
        let r = validate(&t, &ca).unwrap();
        assert!(!r.topology_preserved);
        assert_eq!(r.uncovered_links, vec![Link::new(0, 1)]);
    }

    #[test]
    fn validate_walkthrough_assignment() {
        let t = make_grid(&GridSpec::new(2, 2)).unwrap();
        let ca =
            ChannelAssignment::from_lists(3, &[vec![1, 2], vec![1, 3], vec![2, 3], vec![3, 1]])
                .unwrap();
        let r = validate(&t, &ca).unwrap();
        assert!(r.topology_preserved);
        assert_eq!(r.unassigned_radios, 0);
        // B and D end up sharing both 1 and 3.
        assert_eq!(r.multi_common_pairs, vec![Link::new(1, 3)]);
    }

    #[test]
    fn validate_rejects_bad_shapes() {
        let t = make_grid(&GridSpec::new(1, 2).channels(3)).unwrap();
        let ca = ChannelAssignment::from_lists(4, &[vec![4], vec![4]]).unwrap();
        assert!(matches!(
            validate(&t, &ca),
            Err(Error::ChannelOutOfRange { channel: 4, .. })
        ));
        let ca = ChannelAssignment::from_lists(3, &[vec![1]]).unwrap();
        assert!(matches!(
            validate(&t, &ca),
            Err(Error::NodeCountMismatch { .. })
        ));
        let ca = ChannelAssignment::from_lists(3, &[vec![1, 2, 3], vec![1]]).unwrap();
        assert!(matches!(
            validate(&t, &ca),
            Err(Error::TooManyChannels { .. })
        ));
    }

    #[test]
    fn from_lists_rejects_duplicates_and_range() {
        assert!(matches!(
            ChannelAssignment::from_lists(3, &[vec![1, 1]]),
            Err(Error::InvariantViolation(_))
        ));
        assert!(matches!(
            ChannelAssignment::from_lists(3, &[vec![0]]),
            Err(Error::ChannelOutOfRange { .. })
        ));
    }

    #[test]
    fn json_and_csv() {
        let ca = ChannelAssignment::from_lists(3, &[vec![2, 1], vec![3]]).unwrap();
        let text = ca.to_json();
        assert!(text.contains("\"channels_available\": 3"));
        assert_eq!(ChannelAssignment::from_json(&text).unwrap(), ca);
        assert_eq!(ca.to_csv(), "node,channels\n0,1;2\n1,3\n");
        assert!(ChannelAssignment::from_json(
            r#"{"channels_available":3,"assignment":[{"node":0,"channels":[1,1]}]}"#
        )
        .is_err());
    }
}

//! Grid mesh topologies.
//!
//! Nodes sit on a `rows x cols` lattice and are numbered row-major from 0.
//! Links join 4-neighbourhood pairs only. Every node carries a radio count,
//! and the topology records how many orthogonal channels are available.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::assignment::MAX_CHANNELS;
use crate::error::{Error, Result};

pub type NodeId = usize;

/// Default node separation in metres.
pub const DEFAULT_SPACING_M: f64 = 250.0;
pub const DEFAULT_RADIOS: u8 = 2;
pub const DEFAULT_CHANNELS: u8 = 3;

/// An undirected link, stored with the lower node id first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Link(NodeId, NodeId);

impl Link {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            Link(a, b)
        } else {
            Link(b, a)
        }
    }

    pub fn low(&self) -> NodeId {
        self.0
    }

    pub fn high(&self) -> NodeId {
        self.1
    }

    pub fn endpoints(&self) -> [NodeId; 2] {
        [self.0, self.1]
    }

    pub fn touches(&self, node: NodeId) -> bool {
        self.0 == node || self.1 == node
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

/// Radio counts, either the same on every node or given per node.
#[derive(Clone, Debug, PartialEq)]
pub enum Radios {
    Uniform(u8),
    PerNode(Vec<u8>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub radios: Radios,
    pub channels: u8,
    pub spacing_m: f64,
}

impl GridSpec {
    /// A grid with the default 2 radios per node, 3 channels and 250 m spacing.
    pub fn new(rows: usize, cols: usize) -> Self {
        GridSpec {
            rows,
            cols,
            radios: Radios::Uniform(DEFAULT_RADIOS),
            channels: DEFAULT_CHANNELS,
            spacing_m: DEFAULT_SPACING_M,
        }
    }

    pub fn square(n: usize) -> Self {
        Self::new(n, n)
    }

    pub fn radios(mut self, radios: u8) -> Self {
        self.radios = Radios::Uniform(radios);
        self
    }

    pub fn radios_per_node(mut self, radios: Vec<u8>) -> Self {
        self.radios = Radios::PerNode(radios);
        self
    }

    pub fn channels(mut self, channels: u8) -> Self {
        self.channels = channels;
        self
    }

    pub fn spacing(mut self, spacing_m: f64) -> Self {
        self.spacing_m = spacing_m;
        self
    }

    fn radio_table(&self) -> Result<Vec<u8>> {
        let n = self.rows * self.cols;
        match &self.radios {
            Radios::Uniform(r) => Ok(vec![*r; n]),
            Radios::PerNode(table) if table.len() == n => Ok(table.clone()),
            Radios::PerNode(table) => Err(Error::InvalidSpec(format!(
                "radio table has {} entries for {} nodes",
                table.len(),
                n
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub row: usize,
    pub col: usize,
    pub radios: u8,
}

/// Immutable grid topology. Construct with [`make_grid`] or [`load_topology`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Topology {
    rows: usize,
    cols: usize,
    spacing_m: f64,
    channels: u8,
    nodes: Vec<Node>,
    links: Vec<Link>,
    #[serde(skip)]
    link_index: HashMap<Link, usize>,
    #[serde(skip)]
    incident: Vec<Vec<usize>>,
}

/// On-disk shape; validated before it becomes a [`Topology`].
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyDoc {
    rows: usize,
    cols: usize,
    spacing_m: f64,
    channels: u8,
    nodes: Vec<Node>,
    links: Vec<[NodeId; 2]>,
}

pub fn make_grid(spec: &GridSpec) -> Result<Topology> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::InvalidSpec(format!(
            "grid dimensions must be positive, got {}x{}",
            spec.rows, spec.cols
        )));
    }
    if spec.channels == 0 || spec.channels > MAX_CHANNELS {
        return Err(Error::InvalidSpec(format!(
            "channel count must be in 1..={MAX_CHANNELS}, got {}",
            spec.channels
        )));
    }
    if !(spec.spacing_m.is_finite() && spec.spacing_m > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "node spacing must be positive, got {}",
            spec.spacing_m
        )));
    }
    let radios = spec.radio_table()?;
    if let Some(id) = radios.iter().position(|&r| r == 0) {
        return Err(Error::InvalidSpec(format!("node {id} has no radios")));
    }
    let max_radios = radios.iter().copied().max().unwrap_or(0);
    if spec.channels < max_radios {
        return Err(Error::InvalidSpec(format!(
            "{} channels cannot serve {} radios on one node",
            spec.channels, max_radios
        )));
    }

    let nodes = radios
        .iter()
        .enumerate()
        .map(|(id, &r)| Node {
            id,
            row: id / spec.cols,
            col: id % spec.cols,
            radios: r,
        })
        .collect();

    let mut links = Vec::with_capacity(spec.rows * (spec.cols - 1) + spec.cols * (spec.rows - 1));
    for id in 0..spec.rows * spec.cols {
        let (row, col) = (id / spec.cols, id % spec.cols);
        if col + 1 < spec.cols {
            links.push(Link(id, id + 1));
        }
        if row + 1 < spec.rows {
            links.push(Link(id, id + spec.cols));
        }
    }

    Ok(Topology::assemble(
        spec.rows,
        spec.cols,
        spec.spacing_m,
        spec.channels,
        nodes,
        links,
    ))
}

impl Topology {
    fn assemble(
        rows: usize,
        cols: usize,
        spacing_m: f64,
        channels: u8,
        nodes: Vec<Node>,
        mut links: Vec<Link>,
    ) -> Self {
        links.sort();
        let link_index = links.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let mut incident = vec![Vec::new(); nodes.len()];
        for (i, l) in links.iter().enumerate() {
            incident[l.0].push(i);
            incident[l.1].push(i);
        }
        Topology {
            rows,
            cols,
            spacing_m,
            channels,
            nodes,
            links,
            link_index,
            incident,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn spacing_m(&self) -> f64 {
        self.spacing_m
    }

    /// Number of available channels (`cs_max`).
    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Links in ascending `(low, high)` order; a link's position is its id.
    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn radios(&self, node: NodeId) -> u8 {
        self.nodes[node].radios
    }

    pub fn max_radios(&self) -> u8 {
        self.nodes.iter().map(|n| n.radios).max().unwrap_or(0)
    }

    pub fn total_radios(&self) -> usize {
        self.nodes.iter().map(|n| n.radios as usize).sum()
    }

    pub fn position(&self, node: NodeId) -> (usize, usize) {
        let n = &self.nodes[node];
        (n.row, n.col)
    }

    pub fn node_at(&self, row: usize, col: usize) -> Option<NodeId> {
        (row < self.rows && col < self.cols).then(|| row * self.cols + col)
    }

    pub fn link_id(&self, a: NodeId, b: NodeId) -> Option<usize> {
        self.link_index.get(&Link::new(a, b)).copied()
    }

    /// Ids of the links incident to `node`.
    pub fn incident_links(&self, node: NodeId) -> &[usize] {
        &self.incident[node]
    }

    /// Grid hop distance between two nodes.
    pub fn hops(&self, a: NodeId, b: NodeId) -> usize {
        let (ra, ca) = self.position(a);
        let (rb, cb) = self.position(b);
        ra.abs_diff(rb) + ca.abs_diff(cb)
    }

    /// Adjacent nodes in east, south, west, north order.
    pub fn neighbors(&self, node: NodeId) -> Result<Vec<NodeId>> {
        if node >= self.nodes.len() {
            return Err(Error::UnknownNode(node));
        }
        Ok(self.neighbors_iter(node).collect())
    }

    pub(crate) fn neighbors_iter(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let (row, col) = self.position(node);
        let east = (col + 1 < self.cols).then(|| node + 1);
        let south = (row + 1 < self.rows).then(|| node + self.cols);
        let west = (col > 0).then(|| node - 1);
        let north = (row > 0).then(|| node - self.cols);
        [east, south, west, north].into_iter().flatten()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

pub fn save_topology(topology: &Topology) -> String {
    serde_json::to_string_pretty(topology).expect("topology serializes")
}

pub fn load_topology(text: &str) -> Result<Topology> {
    let doc: TopologyDoc = serde_json::from_str(text)?;
    from_doc(doc)
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvariantViolation(msg.into())
}

fn from_doc(doc: TopologyDoc) -> Result<Topology> {
    let TopologyDoc {
        rows,
        cols,
        spacing_m,
        channels,
        mut nodes,
        links,
    } = doc;
    if rows == 0 || cols == 0 {
        return Err(invalid(format!("grid dimensions {rows}x{cols}")));
    }
    if channels == 0 || channels > MAX_CHANNELS {
        return Err(invalid(format!("channels must be in 1..={MAX_CHANNELS}")));
    }
    if !(spacing_m.is_finite() && spacing_m > 0.0) {
        return Err(invalid(format!("spacing_m {spacing_m} must be positive")));
    }
    let count = rows * cols;
    if nodes.len() != count {
        return Err(invalid(format!(
            "{} nodes listed for a {rows}x{cols} grid",
            nodes.len()
        )));
    }
    nodes.sort_by_key(|n| n.id);
    for (expected, node) in nodes.iter().enumerate() {
        if node.id != expected {
            return Err(invalid(format!(
                "node ids must be 0..{count}, found {}",
                node.id
            )));
        }
        if node.row != expected / cols || node.col != expected % cols {
            return Err(invalid(format!(
                "node {} at ({},{}) is not row-major",
                node.id, node.row, node.col
            )));
        }
        if node.radios == 0 {
            return Err(invalid(format!("node {} has no radios", node.id)));
        }
        if node.radios > channels {
            return Err(invalid(format!(
                "node {} has {} radios but only {channels} channels exist",
                node.id, node.radios
            )));
        }
    }

    let mut seen = std::collections::HashSet::new();
    let mut parsed = Vec::with_capacity(links.len());
    for [a, b] in links {
        if a >= b {
            return Err(invalid(format!(
                "link [{a},{b}] must list the lower id first"
            )));
        }
        if b >= count {
            return Err(invalid(format!(
                "link [{a},{b}] references an unknown node"
            )));
        }
        let (ra, ca) = (a / cols, a % cols);
        let (rb, cb) = (b / cols, b % cols);
        if ra.abs_diff(rb) + ca.abs_diff(cb) != 1 {
            return Err(invalid(format!(
                "link [{a},{b}] does not join grid neighbours"
            )));
        }
        if !seen.insert((a, b)) {
            return Err(invalid(format!("duplicate link [{a},{b}]")));
        }
        parsed.push(Link(a, b));
    }
    let expected_links = rows * (cols - 1) + cols * (rows - 1);
    if parsed.len() != expected_links {
        return Err(invalid(format!(
            "{} links listed, a {rows}x{cols} grid has {expected_links}",
            parsed.len()
        )));
    }

    Ok(Topology::assemble(
        rows, cols, spacing_m, channels, nodes, parsed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: usize, cols: usize) -> Topology {
        make_grid(&GridSpec::new(rows, cols)).unwrap()
    }

    #[test]
    fn grid_sizes() {
        let t = make_grid(&GridSpec::new(1, 1).radios(2).channels(3)).unwrap();
        assert_eq!((t.node_count(), t.link_count()), (1, 0));
        let t = grid(3, 3);
        assert_eq!((t.node_count(), t.link_count()), (9, 12));
        let t = grid(6, 6);
        assert_eq!((t.node_count(), t.link_count()), (36, 60));
    }

    #[test]
    fn neighbor_order() {
        let t = grid(3, 3);
        assert_eq!(t.neighbors(4).unwrap(), vec![5, 7, 3, 1]);
        assert_eq!(t.neighbors(0).unwrap(), vec![1, 3]);
        assert_eq!(grid(1, 2).neighbors(0).unwrap(), vec![1]);
        assert_eq!(t.neighbors(9), Err(Error::UnknownNode(9)));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(
            make_grid(&GridSpec::new(0, 3)),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            make_grid(&GridSpec::new(2, 2).radios(3).channels(2)),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            make_grid(&GridSpec::new(2, 2).radios(0)),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            make_grid(&GridSpec::new(2, 2).radios_per_node(vec![1, 2])),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn per_node_radios() {
        let t = make_grid(&GridSpec::new(1, 3).radios_per_node(vec![1, 3, 2])).unwrap();
        assert_eq!(t.radios(1), 3);
        assert_eq!(t.max_radios(), 3);
        assert_eq!(t.total_radios(), 6);
    }

    #[test]
    fn save_lists_nodes_and_links() {
        let text = save_topology(&grid(2, 2));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 4);
        assert_eq!(v["links"].as_array().unwrap().len(), 4);
        assert_eq!(v["links"][0], serde_json::json!([0, 1]));
        let keys: Vec<_> = [
            "\"rows\"",
            "\"cols\"",
            "\"spacing_m\"",
            "\"channels\"",
            "\"nodes\"",
            "\"links\"",
        ]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]), "stable key order");
    }

    #[test]
    fn round_trip() {
        let t = grid(7, 7);
        assert_eq!(load_topology(&save_topology(&t)).unwrap(), t);
    }

    #[test]
    fn diagonal_link_rejected() {
        let text = save_topology(&grid(2, 2)).replace("[\n      2,\n      3\n    ]", "[0, 3]");
        assert!(text.contains("[0, 3]"));
        assert!(matches!(
            load_topology(&text),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn parse_errors_carry_position() {
        match load_topology("{\n  \"rows\": 2,\n  \"cols\": }") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            load_topology(
                r#"{"rows": 1, "cols": 1, "spacing_m": 250, "channels": 3, "nodes": [], "links": [], "extra": 1}"#
            ),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn missing_or_duplicate_links_rejected() {
        let doc = r#"{"rows":1,"cols":3,"spacing_m":250.0,"channels":3,
            "nodes":[{"id":0,"row":0,"col":0,"radios":2},{"id":1,"row":0,"col":1,"radios":2},{"id":2,"row":0,"col":2,"radios":2}],
            "links":[[0,1],[0,1]]}"#;
        assert!(matches!(
            load_topology(doc),
            Err(Error::InvariantViolation(_))
        ));
        let doc = doc.replace("[[0,1],[0,1]]", "[[0,1]]");
        assert!(matches!(
            load_topology(&doc),
            Err(Error::InvariantViolation(_))
        ));
        let doc = doc.replace("[[0,1]]", "[[1,0],[1,2]]");
        assert!(matches!(
            load_topology(&doc),
            Err(Error::InvariantViolation(_))
        ));
    }
}

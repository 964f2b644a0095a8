//! Network graphs: symmetric directed graphs with per-arc capacities and an
//! edge/core node split. Loaded from JSON files or generated (fat tree).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index into [`Topology::nodes`].
pub type NodeId = usize;
/// Index into [`Topology::arcs`].
pub type ArcId = usize;

/// Whether a node terminates traffic or only forwards it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Edge,
    Core,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub name: String,
    pub role: Role,
}

/// A directed arc with capacity, in the same units as demand bandwidth.
#[derive(Debug, Clone)]
pub struct Arc {
    pub from: NodeId,
    pub to: NodeId,
    pub capacity: f64,
}

/// A symmetric directed graph. Nodes are sorted by name and arcs by
/// (from, to), so all ids are stable across loads of the same file.
#[derive(Debug, Clone)]
pub struct Topology {
    name: String,
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    out_arcs: Vec<Vec<ArcId>>,
    in_arcs: Vec<Vec<ArcId>>,
    arc_index: HashMap<(NodeId, NodeId), ArcId>,
    reverse: Vec<ArcId>,
}

/// On-disk topology schema. Each link entry denotes both directed arcs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopologyFile {
    pub name: String,
    pub nodes: Vec<NodeEntry>,
    pub links: Vec<LinkEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeEntry {
    pub id: String,
    pub role: Role,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkEntry {
    pub a: String,
    pub b: String,
    pub capacity: f64,
}

impl Topology {
    /// Parse a topology from JSON file content.
    pub fn from_json_str(content: &str) -> Result<Self> {
        let file: TopologyFile =
            serde_json::from_str(content).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn from_file(file: TopologyFile) -> Result<Self> {
        let mut nodes: Vec<Node> = file
            .nodes
            .iter()
            .map(|n| Node {
                name: n.id.clone(),
                role: n.role,
            })
            .collect();
        nodes.sort_by(|a, b| a.name.cmp(&b.name));
        for w in nodes.windows(2) {
            if w[0].name == w[1].name {
                return Err(Error::Parse(format!("duplicate node id {}", w[0].name)));
            }
        }
        let index: HashMap<&str, NodeId> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.name.as_str(), i))
            .collect();

        let mut arcs = Vec::with_capacity(file.links.len() * 2);
        for link in &file.links {
            let a = *index
                .get(link.a.as_str())
                .ok_or_else(|| Error::UnknownNode(link.a.clone()))?;
            let b = *index
                .get(link.b.as_str())
                .ok_or_else(|| Error::UnknownNode(link.b.clone()))?;
            arcs.push((a, b, link.capacity));
            arcs.push((b, a, link.capacity));
        }
        Self::from_parts(file.name, nodes, arcs)
    }

    /// Build a topology from explicit directed arcs. The arc set must already
    /// be closed under reversal; this is the constructor used by generators
    /// and tests, and the place where asymmetric inputs are rejected.
    pub fn from_arcs(
        name: impl Into<String>,
        nodes: Vec<Node>,
        arcs: Vec<(NodeId, NodeId, f64)>,
    ) -> Result<Self> {
        Self::from_parts(name.into(), nodes, arcs)
    }

    fn from_parts(
        name: String,
        nodes: Vec<Node>,
        raw_arcs: Vec<(NodeId, NodeId, f64)>,
    ) -> Result<Self> {
        let mut arcs: Vec<Arc> = raw_arcs
            .into_iter()
            .map(|(from, to, capacity)| Arc { from, to, capacity })
            .collect();
        arcs.sort_by_key(|a| (a.from, a.to));

        let mut arc_index = HashMap::with_capacity(arcs.len());
        for (id, arc) in arcs.iter().enumerate() {
            if arc.from >= nodes.len() || arc.to >= nodes.len() {
                return Err(Error::Parse(format!(
                    "arc ({}, {}) references unknown node index",
                    arc.from, arc.to
                )));
            }
            if arc.from == arc.to {
                return Err(Error::SelfLoop(nodes[arc.from].name.clone()));
            }
            if !(arc.capacity.is_finite() && arc.capacity > 0.0) {
                return Err(Error::BadCapacity(
                    nodes[arc.from].name.clone(),
                    nodes[arc.to].name.clone(),
                    arc.capacity,
                ));
            }
            if arc_index.insert((arc.from, arc.to), id).is_some() {
                return Err(Error::DuplicateArc(
                    nodes[arc.from].name.clone(),
                    nodes[arc.to].name.clone(),
                ));
            }
        }

        let mut reverse = vec![0; arcs.len()];
        for (id, arc) in arcs.iter().enumerate() {
            match arc_index.get(&(arc.to, arc.from)) {
                Some(&rev) => reverse[id] = rev,
                None => {
                    return Err(Error::Asymmetry(
                        nodes[arc.from].name.clone(),
                        nodes[arc.to].name.clone(),
                    ))
                }
            }
        }

        let mut out_arcs = vec![Vec::new(); nodes.len()];
        let mut in_arcs = vec![Vec::new(); nodes.len()];
        for (id, arc) in arcs.iter().enumerate() {
            out_arcs[arc.from].push(id);
            in_arcs[arc.to].push(id);
        }

        Ok(Self {
            name,
            nodes,
            arcs,
            out_arcs,
            in_arcs,
            arc_index,
            reverse,
        })
    }

    /// Generate the k-ary fat-tree switch fabric: (k/2)^2 core switches and k
    /// pods of k/2 aggregation plus k/2 edge switches. Every link carries
    /// `capacity` in both directions.
    pub fn fat_tree(k: usize, capacity: f64) -> Result<Self> {
        if k < 2 || k % 2 != 0 {
            return Err(Error::BadFatTreeK(k));
        }
        let half = k / 2;
        let mut nodes = Vec::new();
        for group in 0..half {
            for i in 0..half {
                nodes.push(NodeEntry {
                    id: format!("core{group}_{i}"),
                    role: Role::Core,
                });
            }
        }
        for pod in 0..k {
            for j in 0..half {
                nodes.push(NodeEntry {
                    id: format!("pod{pod}_agg{j}"),
                    role: Role::Core,
                });
            }
            for e in 0..half {
                nodes.push(NodeEntry {
                    id: format!("pod{pod}_edge{e}"),
                    role: Role::Edge,
                });
            }
        }

        // Aggregation switch j of every pod connects to the k/2 cores of
        // group j and to every edge switch of its pod.
        let mut links = Vec::new();
        for pod in 0..k {
            for j in 0..half {
                for e in 0..half {
                    links.push(LinkEntry {
                        a: format!("pod{pod}_agg{j}"),
                        b: format!("pod{pod}_edge{e}"),
                        capacity,
                    });
                }
                for i in 0..half {
                    links.push(LinkEntry {
                        a: format!("pod{pod}_agg{j}"),
                        b: format!("core{j}_{i}"),
                        capacity,
                    });
                }
            }
        }

        Self::from_file(TopologyFile {
            name: format!("fat-tree-{k}"),
            nodes,
            links,
        })
    }

    /// Bundled instance by name (`polska` or `norway`). Bundled files carry
    /// connectivity with placeholder unit capacities; experiments override
    /// capacity uniformly.
    pub fn builtin(name: &str) -> Option<Result<Self>> {
        match name {
            "polska" => Some(Self::from_json_str(include_str!("../data/polska.json"))),
            "norway" => Some(Self::from_json_str(include_str!("../data/norway.json"))),
            _ => None,
        }
    }

    /// Copy of this topology with every arc capacity replaced by `c`.
    pub fn with_uniform_capacity(&self, c: f64) -> Result<Self> {
        let arcs = self
            .arcs
            .iter()
            .map(|a| (a.from, a.to, c))
            .collect::<Vec<_>>();
        Self::from_parts(self.name.clone(), self.nodes.clone(), arcs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id]
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id].name
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn arc_between(&self, from: NodeId, to: NodeId) -> Option<ArcId> {
        self.arc_index.get(&(from, to)).copied()
    }

    pub fn reverse_arc(&self, id: ArcId) -> ArcId {
        self.reverse[id]
    }

    pub fn out_arcs(&self, node: NodeId) -> &[ArcId] {
        &self.out_arcs[node]
    }

    pub fn in_arcs(&self, node: NodeId) -> &[ArcId] {
        &self.in_arcs[node]
    }

    /// All arcs incident to `node`, in either direction (the L^m set).
    pub fn incident_arcs(&self, node: NodeId) -> Vec<ArcId> {
        let mut v: Vec<ArcId> = self.out_arcs[node]
            .iter()
            .chain(self.in_arcs[node].iter())
            .copied()
            .collect();
        v.sort_unstable();
        v
    }

    pub fn edge_nodes(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&n| self.nodes[n].role == Role::Edge)
            .collect()
    }

    pub fn core_nodes(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&n| self.nodes[n].role == Role::Core)
            .collect()
    }

    pub fn describe_arc(&self, id: ArcId) -> String {
        let a = &self.arcs[id];
        format!("({}, {})", self.node_name(a.from), self.node_name(a.to))
    }

    /// Serializable file form of this topology (links emitted once per
    /// undirected pair).
    pub fn to_file(&self) -> TopologyFile {
        let mut links = Vec::new();
        for arc in &self.arcs {
            if arc.from < arc.to {
                links.push(LinkEntry {
                    a: self.node_name(arc.from).to_string(),
                    b: self.node_name(arc.to).to_string(),
                    capacity: arc.capacity,
                });
            }
        }
        TopologyFile {
            name: self.name.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeEntry {
                    id: n.name.clone(),
                    role: n.role,
                })
                .collect(),
            links,
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} nodes ({} edge, {} core), {} arcs",
            self.name,
            self.node_count(),
            self.edge_nodes().len(),
            self.core_nodes().len(),
            self.arc_count()
        )
    }
}

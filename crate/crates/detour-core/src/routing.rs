//! Demand construction and capacity-constrained shortest primary paths.
//!
//! Primary routing is a fixed input to every protection model: demands are
//! processed greedily in id order, each on a minimum-hop path over arcs with
//! enough residual capacity, with ties broken by the lexicographically
//! smallest node-name sequence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{ArcId, NodeId, Topology};

/// Demand ids are positions in the demand list, which is ordered
/// lexicographically by (source name, destination name).
pub type DemandId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Demand {
    pub id: DemandId,
    pub src: NodeId,
    pub dst: NodeId,
    pub bandwidth: f64,
}

/// One demand per ordered pair of distinct edge nodes, each requesting
/// `bandwidth`.
pub fn build_demands(topo: &Topology, bandwidth: f64) -> Result<Vec<Demand>> {
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(Error::Config(format!(
            "demand bandwidth must be positive, got {bandwidth}"
        )));
    }
    let edges = topo.edge_nodes();
    if edges.len() < 2 {
        return Err(Error::TooFewEdgeNodes(edges.len()));
    }
    // edge_nodes is ordered by node id == name order, so the double loop is
    // already lexicographic by (src, dst)
    let mut demands = Vec::with_capacity(edges.len() * (edges.len() - 1));
    for &s in &edges {
        for &t in &edges {
            if s != t {
                demands.push(Demand {
                    id: demands.len(),
                    src: s,
                    dst: t,
                    bandwidth,
                });
            }
        }
    }
    Ok(demands)
}

#[derive(Debug, Clone)]
pub struct PrimaryPath {
    /// Arcs from source to destination.
    pub arcs: Vec<ArcId>,
    /// Node sequence, one longer than `arcs`.
    pub nodes: Vec<NodeId>,
}

impl PrimaryPath {
    pub fn hops(&self) -> usize {
        self.arcs.len()
    }
}

/// Fixed primary routing for a demand set: one simple path per demand plus
/// the per-arc load it commits.
#[derive(Debug, Clone)]
pub struct PrimaryRouting {
    pub demands: Vec<Demand>,
    pub paths: Vec<PrimaryPath>,
    /// Total primary bandwidth per arc.
    pub arc_load: Vec<f64>,
    /// Fraction of each arc's capacity admissible for allocation.
    pub w_cap: f64,
    /// arc -> demands whose primary path uses it (ascending demand id).
    pub arc_users: Vec<Vec<DemandId>>,
    on_path: Vec<Vec<bool>>,
}

impl PrimaryRouting {
    /// The paper's beta parameter: 0 iff `(i, j)` is on the primary path of
    /// `d`, otherwise 1.
    pub fn beta(&self, d: DemandId, arc: ArcId) -> f64 {
        if self.on_path[d][arc] {
            0.0
        } else {
            1.0
        }
    }

    pub fn uses_arc(&self, d: DemandId, arc: ArcId) -> bool {
        self.on_path[d][arc]
    }

    pub fn path(&self, d: DemandId) -> &PrimaryPath {
        &self.paths[d]
    }

    pub fn demand(&self, d: DemandId) -> &Demand {
        &self.demands[d]
    }

    pub fn demand_count(&self) -> usize {
        self.demands.len()
    }

    pub fn describe_demand(&self, topo: &Topology, d: DemandId) -> String {
        format!(
            "d{d} ({} -> {})",
            topo.node_name(self.demands[d].src),
            topo.node_name(self.demands[d].dst)
        )
    }
}

/// Route every demand on a minimum-hop path among arcs whose residual
/// capacity (`w_cap * c` minus committed load) covers its bandwidth.
pub fn route_primary(
    topo: &Topology,
    demands: &[Demand],
    w_cap: f64,
) -> Result<PrimaryRouting> {
    if !(w_cap > 0.0 && w_cap <= 1.0) {
        return Err(Error::Config(format!(
            "w_cap must be in (0, 1], got {w_cap}"
        )));
    }
    let mut arc_load = vec![0.0f64; topo.arc_count()];
    let mut paths = Vec::with_capacity(demands.len());

    for demand in demands {
        let usable = |arc: ArcId| {
            let a = topo.arc(arc);
            w_cap * a.capacity - arc_load[arc] >= demand.bandwidth - 1e-9
        };
        let path = shortest_path_lex(topo, demand.src, demand.dst, &usable).ok_or(
            Error::RoutingInfeasible {
                demand: demand.id,
                src: topo.node_name(demand.src).to_string(),
                dst: topo.node_name(demand.dst).to_string(),
            },
        )?;
        for &arc in &path.arcs {
            arc_load[arc] += demand.bandwidth;
        }
        paths.push(path);
    }

    let mut on_path = vec![vec![false; topo.arc_count()]; demands.len()];
    let mut arc_users = vec![Vec::new(); topo.arc_count()];
    for (d, path) in paths.iter().enumerate() {
        for &arc in &path.arcs {
            on_path[d][arc] = true;
            arc_users[arc].push(d);
        }
    }

    Ok(PrimaryRouting {
        demands: demands.to_vec(),
        paths,
        arc_load,
        w_cap,
        arc_users,
        on_path,
    })
}

/// Minimum-hop path from `src` to `dst` over arcs accepted by `usable`,
/// breaking ties by the lexicographically smallest node-name sequence.
///
/// Two BFS passes: distances from the destination over reversed usable arcs,
/// then a greedy walk from the source that always picks the smallest-named
/// neighbor still on a shortest path.
pub fn shortest_path_lex(
    topo: &Topology,
    src: NodeId,
    dst: NodeId,
    usable: &dyn Fn(ArcId) -> bool,
) -> Option<PrimaryPath> {
    let dist_to_dst = bfs_distances_reverse(topo, dst, usable);
    dist_to_dst[src]?;

    let mut nodes = vec![src];
    let mut arcs = Vec::new();
    let mut cur = src;
    while cur != dst {
        let remaining = dist_to_dst[cur].unwrap();
        let next = topo
            .out_arcs(cur)
            .iter()
            .copied()
            .filter(|&a| usable(a))
            .filter(|&a| dist_to_dst[topo.arc(a).to] == Some(remaining - 1))
            .min_by(|&a, &b| topo.node_name(topo.arc(a).to).cmp(topo.node_name(topo.arc(b).to)))
            .expect("positive distance implies a usable next hop");
        arcs.push(next);
        cur = topo.arc(next).to;
        nodes.push(cur);
    }
    Some(PrimaryPath { arcs, nodes })
}

/// Hop distance from every node to `target` over usable arcs (BFS on
/// reversed arcs).
pub fn bfs_distances_reverse(
    topo: &Topology,
    target: NodeId,
    usable: &dyn Fn(ArcId) -> bool,
) -> Vec<Option<usize>> {
    let mut dist = vec![None; topo.node_count()];
    dist[target] = Some(0usize);
    let mut queue = std::collections::VecDeque::from([target]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap();
        for &a in topo.in_arcs(v) {
            if !usable(a) {
                continue;
            }
            let from = topo.arc(a).from;
            if dist[from].is_none() {
                dist[from] = Some(d + 1);
                queue.push_back(from);
            }
        }
    }
    dist
}

/// JSON form of a routing so MILP runs can be replayed on a frozen input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoutingDump {
    pub w_cap: f64,
    pub demands: Vec<DemandDump>,
    /// Node-name sequences, parallel to `demands`.
    pub paths: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemandDump {
    pub src: String,
    pub dst: String,
    pub bandwidth: f64,
}

impl PrimaryRouting {
    pub fn to_dump(&self, topo: &Topology) -> RoutingDump {
        RoutingDump {
            w_cap: self.w_cap,
            demands: self
                .demands
                .iter()
                .map(|d| DemandDump {
                    src: topo.node_name(d.src).to_string(),
                    dst: topo.node_name(d.dst).to_string(),
                    bandwidth: d.bandwidth,
                })
                .collect(),
            paths: self
                .paths
                .iter()
                .map(|p| {
                    p.nodes
                        .iter()
                        .map(|&n| topo.node_name(n).to_string())
                        .collect()
                })
                .collect(),
        }
    }

    /// Rebuild a routing from a dump, revalidating every invariant against
    /// the topology.
    pub fn from_dump(topo: &Topology, dump: &RoutingDump) -> Result<Self> {
        let mut demands = Vec::with_capacity(dump.demands.len());
        for (i, d) in dump.demands.iter().enumerate() {
            let src = topo
                .node_by_name(&d.src)
                .ok_or_else(|| Error::UnknownNode(d.src.clone()))?;
            let dst = topo
                .node_by_name(&d.dst)
                .ok_or_else(|| Error::UnknownNode(d.dst.clone()))?;
            if src == dst {
                return Err(Error::BadDemand(
                    d.src.clone(),
                    d.dst.clone(),
                    "source equals destination".into(),
                ));
            }
            demands.push(Demand {
                id: i,
                src,
                dst,
                bandwidth: d.bandwidth,
            });
        }
        if dump.paths.len() != demands.len() {
            return Err(Error::StaleArtifact(format!(
                "{} paths for {} demands",
                dump.paths.len(),
                demands.len()
            )));
        }
        let mut arc_load = vec![0.0f64; topo.arc_count()];
        let mut paths = Vec::with_capacity(demands.len());
        for (d, names) in dump.paths.iter().enumerate() {
            let path = resolve_path(topo, names)?;
            let demand = &demands[d];
            if path.nodes.first() != Some(&demand.src) || path.nodes.last() != Some(&demand.dst) {
                return Err(Error::StaleArtifact(format!(
                    "path of demand {d} does not join its endpoints"
                )));
            }
            for &arc in &path.arcs {
                arc_load[arc] += demand.bandwidth;
            }
            paths.push(path);
        }
        for (arc, &load) in arc_load.iter().enumerate() {
            let cap = dump.w_cap * topo.arc(arc).capacity;
            if load > cap + 1e-9 {
                return Err(Error::StaleArtifact(format!(
                    "primary load {load} exceeds w_cap * c = {cap} on arc {}",
                    topo.describe_arc(arc)
                )));
            }
        }
        let mut on_path = vec![vec![false; topo.arc_count()]; demands.len()];
        let mut arc_users = vec![Vec::new(); topo.arc_count()];
        for (d, path) in paths.iter().enumerate() {
            for &arc in &path.arcs {
                on_path[d][arc] = true;
                arc_users[arc].push(d);
            }
        }
        Ok(PrimaryRouting {
            demands,
            paths,
            arc_load,
            w_cap: dump.w_cap,
            arc_users,
            on_path,
        })
    }
}

fn resolve_path(topo: &Topology, names: &[String]) -> Result<PrimaryPath> {
    if names.len() < 2 {
        return Err(Error::StaleArtifact("path with fewer than 2 nodes".into()));
    }
    let mut nodes = Vec::with_capacity(names.len());
    for name in names {
        nodes.push(
            topo.node_by_name(name)
                .ok_or_else(|| Error::UnknownNode(name.clone()))?,
        );
    }
    let mut seen = std::collections::HashSet::new();
    if !nodes.iter().all(|n| seen.insert(*n)) {
        return Err(Error::StaleArtifact("path revisits a node".into()));
    }
    let mut arcs = Vec::with_capacity(nodes.len() - 1);
    for w in nodes.windows(2) {
        let arc = topo.arc_between(w[0], w[1]).ok_or_else(|| {
            Error::StaleArtifact(format!(
                "path uses missing arc ({}, {})",
                topo.node_name(w[0]),
                topo.node_name(w[1])
            ))
        })?;
        arcs.push(arc);
    }
    Ok(PrimaryPath { arcs, nodes })
}

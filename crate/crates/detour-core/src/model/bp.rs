//! The backup-path MILP.
//!
//! For every failure detection event (n, m) and every affected demand d, a
//! binary flow system y selects a full backup path from the demand's source
//! to its destination. D1 demands (m is not the destination) must avoid
//! every arc incident to m; D2 demands only the failed link itself. Two
//! capacity families keep both interpretations of an event feasible: per
//! failed link, survivors plus rerouted demands of both orientations fit
//! under w_cap * c, and per failed node, survivors plus every demand
//! detecting into that node fit as well. Backward hops h are tied to the
//! primary prefix arcs the backup does not reuse, and z marks arcs used by
//! any backup of a demand.

use crate::model::{
    BpWeights, MilpInstance, ModelSpec, PairLayout, RowTag, Sense, VarId, VarKind, Variant,
};
use crate::routing::PrimaryRouting;
use crate::scenario::{EventId, ScenarioData};
use crate::topology::{ArcId, Topology};

/// Index layout of a BP instance: y block, then h block, then z block.
#[derive(Debug, Clone)]
pub struct BpVarMap {
    pub layout: PairLayout,
    demand_count: usize,
    arc_count: usize,
}

impl BpVarMap {
    pub fn pair_count(&self) -> usize {
        self.layout.pair_count()
    }

    pub fn pair(&self, event: EventId, slot: usize) -> usize {
        self.layout.pair(event, slot)
    }

    pub fn y(&self, pair: usize, arc: ArcId) -> VarId {
        self.layout.y(pair, arc)
    }

    /// h^{nm}_d for the pair.
    pub fn h(&self, pair: usize) -> VarId {
        self.layout.y_var_count() + pair
    }

    /// z_{d,ij}.
    pub fn z(&self, demand: usize, arc: ArcId) -> VarId {
        self.layout.y_var_count() + self.pair_count() + demand * self.arc_count + arc
    }

    pub fn var_count(&self) -> usize {
        self.layout.y_var_count() + self.pair_count() + self.demand_count * self.arc_count
    }
}

/// Build the backup-path MILP for the given scenario and weights.
pub fn build_bp(
    topo: &Topology,
    routing: &PrimaryRouting,
    scen: &ScenarioData,
    spec: &ModelSpec,
) -> (MilpInstance, BpVarMap) {
    let Variant::Bp(weights) = spec.variant else {
        panic!("build_bp called with a non-BP variant");
    };
    let map = BpVarMap {
        layout: PairLayout::new(scen, topo.arc_count()),
        demand_count: routing.demand_count(),
        arc_count: topo.arc_count(),
    };
    let mut inst = MilpInstance::new(format!("{}-{}", topo.name(), spec.variant.name()));

    declare_y_block(&mut inst, &map.layout, topo, scen);
    for &(e, slot) in &map.layout.pairs {
        let ev = &scen.events[e];
        let a = &scen.affected[e][slot];
        inst.add_var(
            format!(
                "h[d{},{},{}]",
                a.demand,
                topo.node_name(ev.detect),
                topo.node_name(ev.downstream)
            ),
            VarKind::Integer {
                ub: a.lambda as f64,
            },
        );
    }
    for d in 0..routing.demand_count() {
        for arc in 0..topo.arc_count() {
            let i = topo.node_name(topo.arc(arc).from);
            let j = topo.node_name(topo.arc(arc).to);
            inst.add_var(format!("z[d{d},{i},{j}]"), VarKind::Binary);
        }
    }
    debug_assert_eq!(inst.var_count(), map.var_count());

    add_objective(&mut inst, &map, topo, routing, weights);
    add_availability_rows(&mut inst, &map.layout, topo, scen);
    add_capacity_rows(&mut inst, &map.layout, topo, routing, scen, spec.w_cap, None);
    add_flow_rows(&mut inst, &map.layout, topo, routing, scen, true);
    add_reverse_path_rows(&mut inst, &map, routing, scen);
    add_capacity_use_rows(&mut inst, &map, topo, scen);
    debug_assert!(inst.validate().is_ok());
    (inst, map)
}

/// Declare the y block, which both BP and CA start with.
pub(crate) fn declare_y_block(
    inst: &mut MilpInstance,
    layout: &PairLayout,
    topo: &Topology,
    scen: &ScenarioData,
) {
    for &(e, slot) in &layout.pairs {
        let ev = &scen.events[e];
        let a = &scen.affected[e][slot];
        let n = topo.node_name(ev.detect);
        let m = topo.node_name(ev.downstream);
        for arc in 0..topo.arc_count() {
            let i = topo.node_name(topo.arc(arc).from);
            let j = topo.node_name(topo.arc(arc).to);
            inst.add_var(
                format!("y[d{},{n},{m},{i},{j}]", a.demand),
                VarKind::Binary,
            );
        }
    }
}

fn add_objective(
    inst: &mut MilpInstance,
    map: &BpVarMap,
    topo: &Topology,
    routing: &PrimaryRouting,
    w: BpWeights,
) {
    let mut obj = Vec::new();
    if w.w_h > 0.0 {
        for pair in 0..map.pair_count() {
            obj.push((map.h(pair), w.w_h));
        }
    }
    if w.w_y > 0.0 {
        for pair in 0..map.pair_count() {
            for arc in 0..topo.arc_count() {
                obj.push((map.y(pair, arc), w.w_y));
            }
        }
    }
    if w.w_z > 0.0 {
        for d in 0..routing.demand_count() {
            for arc in 0..topo.arc_count() {
                if routing.beta(d, arc) > 0.0 {
                    obj.push((map.z(d, arc), w.w_z));
                }
            }
        }
    }
    inst.objective = obj;
}

/// Link availability: quarantine rows for D1 demands, failed-link rows for
/// D2 demands. Written verbatim as `<= 0` over binaries.
pub(crate) fn add_availability_rows(
    inst: &mut MilpInstance,
    layout: &PairLayout,
    topo: &Topology,
    scen: &ScenarioData,
) {
    for (e, aff) in scen.affected.iter().enumerate() {
        let ev = &scen.events[e];
        let incident = topo.incident_arcs(ev.downstream);
        let rev = topo.reverse_arc(ev.arc);
        for (slot, a) in aff.iter().enumerate() {
            let pair = layout.pair(e, slot);
            if a.terminal {
                inst.add_row(
                    vec![(layout.y(pair, ev.arc), 1.0), (layout.y(pair, rev), 1.0)],
                    Sense::Le,
                    0.0,
                    RowTag::AvailFailedLink {
                        event: e as u32,
                        slot: slot as u32,
                    },
                );
            } else {
                let terms = incident
                    .iter()
                    .map(|&arc| (layout.y(pair, arc), 1.0))
                    .collect();
                inst.add_row(
                    terms,
                    Sense::Le,
                    0.0,
                    RowTag::AvailQuarantine {
                        event: e as u32,
                        slot: slot as u32,
                    },
                );
            }
        }
    }
}

/// Both capacity families. With `mu` set (congestion avoidance), the rows
/// bound load by mu instead of w_cap * c.
pub(crate) fn add_capacity_rows(
    inst: &mut MilpInstance,
    layout: &PairLayout,
    topo: &Topology,
    routing: &PrimaryRouting,
    scen: &ScenarioData,
    w_cap: f64,
    mu: Option<&[VarId]>,
) {
    // per failed link: survivors + reroutes of both orientations
    for e in 0..scen.event_count() {
        for arc in 0..topo.arc_count() {
            let mut terms = Vec::new();
            for (slot, a) in scen.affected[e].iter().enumerate() {
                let b = routing.demand(a.demand).bandwidth;
                terms.push((layout.y(layout.pair(e, slot), arc), b));
            }
            if let Some(r) = scen.reverse_event[e] {
                for (slot, a) in scen.affected[r].iter().enumerate() {
                    let b = routing.demand(a.demand).bandwidth;
                    terms.push((layout.y(layout.pair(r, slot), arc), b));
                }
            }
            let tag = if mu.is_some() {
                RowTag::MaxLoadLink {
                    event: e as u32,
                    arc: arc as u32,
                }
            } else {
                RowTag::CapacityLink {
                    event: e as u32,
                    arc: arc as u32,
                }
            };
            let rhs_base = match mu {
                Some(mu_vars) => {
                    terms.push((mu_vars[arc], -1.0));
                    0.0
                }
                None => w_cap * topo.arc(arc).capacity,
            };
            inst.add_row(terms, Sense::Le, rhs_base - scen.u[e][arc], tag);
        }
    }

    // per failed node: survivors + reroutes of every demand detecting into m
    for m in scen.nodes_with_events() {
        let v = scen.v[m].as_ref().expect("v exists for nodes with events");
        for arc in 0..topo.arc_count() {
            let mut terms = Vec::new();
            for &e in &scen.events_into[m] {
                for (slot, a) in scen.affected[e].iter().enumerate() {
                    let b = routing.demand(a.demand).bandwidth;
                    terms.push((layout.y(layout.pair(e, slot), arc), b));
                }
            }
            let tag = if mu.is_some() {
                RowTag::MaxLoadNode {
                    node: m as u32,
                    arc: arc as u32,
                }
            } else {
                RowTag::CapacityNode {
                    node: m as u32,
                    arc: arc as u32,
                }
            };
            let rhs_base = match mu {
                Some(mu_vars) => {
                    terms.push((mu_vars[arc], -1.0));
                    0.0
                }
                None => w_cap * topo.arc(arc).capacity,
            };
            inst.add_row(terms, Sense::Le, rhs_base - v[arc], tag);
        }
    }
}

/// Flow conservation (and optionally out-degree cycle avoidance) for every
/// (event, demand) pair.
pub(crate) fn add_flow_rows(
    inst: &mut MilpInstance,
    layout: &PairLayout,
    topo: &Topology,
    routing: &PrimaryRouting,
    scen: &ScenarioData,
    with_cycle_rows: bool,
) {
    for (e, aff) in scen.affected.iter().enumerate() {
        for (slot, a) in aff.iter().enumerate() {
            let pair = layout.pair(e, slot);
            let demand = routing.demand(a.demand);
            for node in 0..topo.node_count() {
                let mut terms = Vec::new();
                for &arc in topo.out_arcs(node) {
                    terms.push((layout.y(pair, arc), 1.0));
                }
                for &arc in topo.in_arcs(node) {
                    terms.push((layout.y(pair, arc), -1.0));
                }
                let rhs = if node == demand.src {
                    1.0
                } else if node == demand.dst {
                    -1.0
                } else {
                    0.0
                };
                inst.add_row(
                    terms,
                    Sense::Eq,
                    rhs,
                    RowTag::FlowConservation {
                        event: e as u32,
                        slot: slot as u32,
                        node: node as u32,
                    },
                );
                if with_cycle_rows {
                    let out = topo
                        .out_arcs(node)
                        .iter()
                        .map(|&arc| (layout.y(pair, arc), 1.0))
                        .collect();
                    inst.add_row(
                        out,
                        Sense::Le,
                        1.0,
                        RowTag::CycleAvoidance {
                            event: e as u32,
                            slot: slot as u32,
                            node: node as u32,
                        },
                    );
                }
            }
        }
    }
}

/// h is bounded below by the number of primary prefix arcs the backup does
/// not reuse; emitted only when the prefix is non-empty.
fn add_reverse_path_rows(
    inst: &mut MilpInstance,
    map: &BpVarMap,
    routing: &PrimaryRouting,
    scen: &ScenarioData,
) {
    for (e, aff) in scen.affected.iter().enumerate() {
        for (slot, a) in aff.iter().enumerate() {
            if a.lambda == 0 {
                continue;
            }
            let pair = map.pair(e, slot);
            let path = routing.path(a.demand);
            let mut terms: Vec<(VarId, f64)> = path.arcs[..a.lambda]
                .iter()
                .map(|&arc| (map.y(pair, arc), 1.0))
                .collect();
            terms.push((map.h(pair), 1.0));
            inst.add_row(
                terms,
                Sense::Ge,
                a.lambda as f64,
                RowTag::ReversePath {
                    event: e as u32,
                    slot: slot as u32,
                },
            );
        }
    }
}

/// z dominates every backup's arc usage: z >= y.
fn add_capacity_use_rows(
    inst: &mut MilpInstance,
    map: &BpVarMap,
    topo: &Topology,
    scen: &ScenarioData,
) {
    for (e, aff) in scen.affected.iter().enumerate() {
        for (slot, a) in aff.iter().enumerate() {
            let pair = map.pair(e, slot);
            for arc in 0..topo.arc_count() {
                inst.add_row(
                    vec![(map.z(a.demand, arc), 1.0), (map.y(pair, arc), -1.0)],
                    Sense::Ge,
                    0.0,
                    RowTag::CapacityUse {
                        event: e as u32,
                        slot: slot as u32,
                        arc: arc as u32,
                    },
                );
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BpWeights;
    use crate::routing::{route_primary, Demand};
    use crate::scenario::build_scenarios;
    use crate::topology::{Node, Role};

    fn line_abc() -> (Topology, PrimaryRouting, ScenarioData) {
        let nodes = vec![
            Node {
                name: "a".into(),
                role: Role::Edge,
            },
            Node {
                name: "b".into(),
                role: Role::Core,
            },
            Node {
                name: "c".into(),
                role: Role::Edge,
            },
        ];
        let topo = Topology::from_arcs(
            "line",
            nodes,
            vec![(0, 1, 10.0), (1, 0, 10.0), (1, 2, 10.0), (2, 1, 10.0)],
        )
        .unwrap();
        let demands = vec![Demand {
            id: 0,
            src: 0,
            dst: 2,
            bandwidth: 1.0,
        }];
        let routing = route_primary(&topo, &demands, 0.8).unwrap();
        let scen = build_scenarios(&topo, &routing);
        (topo, routing, scen)
    }

    #[test]
    fn toy_objective_term_counts() {
        // single link a-b, one demand: one event, one pair
        let nodes = vec![
            Node {
                name: "a".into(),
                role: Role::Edge,
            },
            Node {
                name: "b".into(),
                role: Role::Edge,
            },
        ];
        let topo =
            Topology::from_arcs("link", nodes, vec![(0, 1, 10.0), (1, 0, 10.0)]).unwrap();
        let demands = vec![Demand {
            id: 0,
            src: 0,
            dst: 1,
            bandwidth: 1.0,
        }];
        let routing = route_primary(&topo, &demands, 0.8).unwrap();
        let scen = build_scenarios(&topo, &routing);
        assert_eq!(scen.event_count(), 1);
        assert_eq!(scen.pair_count(), 1);

        let spec = ModelSpec::new(Variant::Bp(BpWeights::new(1.0, 1.0, 1.0)), 0.8).unwrap();
        let (inst, _) = build_bp(&topo, &routing, &scen, &spec);

        // h terms: pairs; y terms: pairs * arcs; z terms: demand * non-primary arcs
        let h_terms = 1;
        let y_terms = topo.arc_count();
        let z_terms = topo.arc_count() - routing.path(0).hops();
        assert_eq!(inst.objective.len(), h_terms + y_terms + z_terms);
    }

    #[test]
    fn d1_quarantine_row_present() {
        let (topo, routing, scen) = line_abc();
        let spec = ModelSpec::new(Variant::Bp(BpWeights::new(1.0, 1.0, 1.0)), 0.8).unwrap();
        let (inst, map) = build_bp(&topo, &routing, &scen, &spec);

        // event (a,b): b is not the destination -> quarantine over L^b
        let e_ab = scen
            .events
            .iter()
            .position(|ev| topo.node_name(ev.detect) == "a")
            .unwrap();
        let row = inst
            .rows
            .iter()
            .find(|r| {
                matches!(r.tag, RowTag::AvailQuarantine { event, .. } if event == e_ab as u32)
            })
            .expect("quarantine row missing");
        assert_eq!(row.sense, Sense::Le);
        assert_eq!(row.rhs, 0.0);
        // all four arcs touch b on the line topology
        assert_eq!(row.terms.len(), 4);
        let pair = map.pair(e_ab, 0);
        let b = topo.node_by_name("b").unwrap();
        for &(var, coef) in &row.terms {
            assert_eq!(coef, 1.0);
            let arc = var - pair * topo.arc_count();
            let a = topo.arc(arc);
            assert!(a.from == b || a.to == b);
        }

        // event (b,c): c is the destination -> only the failed link pair
        let e_bc = scen
            .events
            .iter()
            .position(|ev| topo.node_name(ev.detect) == "b")
            .unwrap();
        let row = inst
            .rows
            .iter()
            .find(|r| {
                matches!(r.tag, RowTag::AvailFailedLink { event, .. } if event == e_bc as u32)
            })
            .expect("failed-link row missing");
        assert_eq!(row.terms.len(), 2);
    }

    #[test]
    fn capacity_rows_carry_wcap_c() {
        let topo = Topology::builtin("polska")
            .unwrap()
            .unwrap()
            .with_uniform_capacity(14.0)
            .unwrap();
        let demands = crate::routing::build_demands(&topo, 1.0).unwrap();
        let routing = route_primary(&topo, &demands, 0.8).unwrap();
        let scen = build_scenarios(&topo, &routing);
        let spec = ModelSpec::new(Variant::Bp(BpWeights::new(1.0, 1.0, 1.0)), 0.8).unwrap();
        let (inst, _) = build_bp(&topo, &routing, &scen, &spec);

        let mut link_rows = 0usize;
        let mut node_rows = 0usize;
        for row in &inst.rows {
            match row.tag {
                RowTag::CapacityLink { event, arc } => {
                    link_rows += 1;
                    let total = row.rhs + scen.u[event as usize][arc as usize];
                    assert!((total - 11.2).abs() < 1e-9, "w_cap*c must be 11.2");
                }
                RowTag::CapacityNode { node, arc } => {
                    node_rows += 1;
                    let v = scen.v[node as usize].as_ref().unwrap()[arc as usize];
                    assert!((row.rhs + v - 11.2).abs() < 1e-9);
                }
                _ => {}
            }
        }
        assert_eq!(link_rows, scen.event_count() * topo.arc_count());
        assert_eq!(node_rows, scen.nodes_with_events().len() * topo.arc_count());
    }

    /// Row and variable counts recomputed from closed-form formulas.
    #[test]
    fn bookkeeping_matches_closed_form() {
        let topo = Topology::fat_tree(4, 13.0).unwrap();
        let demands = crate::routing::build_demands(&topo, 1.0).unwrap();
        let routing = route_primary(&topo, &demands, 0.8).unwrap();
        let scen = build_scenarios(&topo, &routing);
        let spec = ModelSpec::new(Variant::Bp(BpWeights::new(1.0, 1.0, 1.0)), 0.8).unwrap();
        let (inst, _) = build_bp(&topo, &routing, &scen, &spec);

        let arcs = topo.arc_count();
        let nodes = topo.node_count();
        let pairs = scen.pair_count();
        let d1_pairs: usize = scen
            .affected
            .iter()
            .flatten()
            .filter(|a| !a.terminal)
            .count();
        let d2_pairs = pairs - d1_pairs;
        let lambda_pos: usize = scen
            .affected
            .iter()
            .flatten()
            .filter(|a| a.lambda > 0)
            .count();
        let m_count = scen.nodes_with_events().len();

        assert_eq!(
            inst.var_count(),
            pairs * arcs + pairs + routing.demand_count() * arcs
        );
        let expected_rows = d1_pairs
            + d2_pairs
            + scen.event_count() * arcs
            + m_count * arcs
            + pairs * nodes // flow conservation
            + pairs * nodes // cycle avoidance
            + lambda_pos
            + pairs * arcs; // z >= y
        assert_eq!(inst.row_count(), expected_rows);
        inst.validate().unwrap();
    }
}

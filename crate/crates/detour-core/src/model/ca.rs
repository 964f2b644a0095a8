//! The congestion-avoidance variant.
//!
//! Same y flow systems and availability constraints as the backup-path
//! model, but load is tracked by a per-arc maximum mu over all failure
//! scenarios, and the objective sums a piecewise-linear convex cost phi of
//! the normalized load. No backward-hop or sharing terms.

use crate::model::{
    bp, MilpInstance, ModelSpec, PairLayout, RowTag, Sense, VarId, VarKind,
    COST_CUT_INTERCEPTS, COST_CUT_SLOPES,
};
use crate::routing::PrimaryRouting;
use crate::scenario::{EventId, ScenarioData};
use crate::topology::{ArcId, Topology};

/// Index layout of a CA instance: y block, then mu per arc, then phi per arc.
#[derive(Debug, Clone)]
pub struct CaVarMap {
    pub layout: PairLayout,
    arc_count: usize,
}

impl CaVarMap {
    pub fn pair(&self, event: EventId, slot: usize) -> usize {
        self.layout.pair(event, slot)
    }

    pub fn y(&self, pair: usize, arc: ArcId) -> VarId {
        self.layout.y(pair, arc)
    }

    pub fn mu(&self, arc: ArcId) -> VarId {
        self.layout.y_var_count() + arc
    }

    pub fn phi(&self, arc: ArcId) -> VarId {
        self.layout.y_var_count() + self.arc_count + arc
    }
}

/// Build the congestion-avoidance MILP.
pub fn build_ca(
    topo: &Topology,
    routing: &PrimaryRouting,
    scen: &ScenarioData,
    spec: &ModelSpec,
) -> (MilpInstance, CaVarMap) {
    let map = CaVarMap {
        layout: PairLayout::new(scen, topo.arc_count()),
        arc_count: topo.arc_count(),
    };
    let mut inst = MilpInstance::new(format!("{}-ca", topo.name()));

    bp::declare_y_block(&mut inst, &map.layout, topo, scen);
    for arc in 0..topo.arc_count() {
        let i = topo.node_name(topo.arc(arc).from);
        let j = topo.node_name(topo.arc(arc).to);
        inst.add_var(
            format!("mu[{i},{j}]"),
            VarKind::Continuous {
                lb: 0.0,
                ub: f64::INFINITY,
            },
        );
    }
    for arc in 0..topo.arc_count() {
        let i = topo.node_name(topo.arc(arc).from);
        let j = topo.node_name(topo.arc(arc).to);
        inst.add_var(
            format!("phi[{i},{j}]"),
            VarKind::Continuous {
                lb: 0.0,
                ub: f64::INFINITY,
            },
        );
    }

    inst.objective = (0..topo.arc_count()).map(|arc| (map.phi(arc), 1.0)).collect();

    bp::add_availability_rows(&mut inst, &map.layout, topo, scen);

    // max-load rows replace the capacity rows
    let mu_vars: Vec<VarId> = (0..topo.arc_count()).map(|arc| map.mu(arc)).collect();
    bp::add_capacity_rows(
        &mut inst,
        &map.layout,
        topo,
        routing,
        scen,
        spec.w_cap,
        Some(&mu_vars),
    );

    // even the maximum load must respect the admissible capacity
    for arc in 0..topo.arc_count() {
        inst.add_row(
            vec![(map.mu(arc), 1.0)],
            Sense::Le,
            spec.w_cap * topo.arc(arc).capacity,
            RowTag::MaxLoadBound { arc: arc as u32 },
        );
    }

    // flow conservation only; the published variant carries no cycle rows
    bp::add_flow_rows(&mut inst, &map.layout, topo, routing, scen, false);

    // phi >= slope * mu / (w_cap c) - intercept, five cuts per arc
    for arc in 0..topo.arc_count() {
        let denom = spec.w_cap * topo.arc(arc).capacity;
        for piece in 0..COST_CUT_SLOPES.len() {
            inst.add_row(
                vec![
                    (map.phi(arc), 1.0),
                    (map.mu(arc), -COST_CUT_SLOPES[piece] / denom),
                ],
                Sense::Ge,
                -COST_CUT_INTERCEPTS[piece],
                RowTag::CostCut {
                    arc: arc as u32,
                    piece: piece as u32,
                },
            );
        }
    }

    debug_assert!(inst.validate().is_ok());
    (inst, map)
}

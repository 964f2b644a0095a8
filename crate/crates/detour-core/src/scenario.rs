//! Failure detection events and every routing-derived model parameter.
//!
//! A failure detection event (n, m) means node n perceived a failure while
//! transmitting toward downstream node m; it is deliberately ambiguous
//! between a failure of link (n, m) and a failure of node m. Events exist
//! for exactly the arcs traversed by at least one primary path.

use crate::routing::{DemandId, PrimaryRouting};
use crate::topology::{ArcId, NodeId, Topology};

pub type EventId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FailureEvent {
    /// Detecting node n.
    pub detect: NodeId,
    /// Downstream node m.
    pub downstream: NodeId,
    /// The arc (n, m).
    pub arc: ArcId,
}

/// A demand affected by one event.
#[derive(Debug, Clone, Copy)]
pub struct AffectedDemand {
    pub demand: DemandId,
    /// Nodes traversed before reaching the detecting node (0 = detected at
    /// the source).
    pub lambda: usize,
    /// True iff the downstream node is the demand's destination (the D2
    /// partition); false for D1.
    pub terminal: bool,
}

/// Everything the protection models need besides the topology itself.
#[derive(Debug, Clone)]
pub struct ScenarioData {
    /// Events sorted lexicographically by (detect name, downstream name),
    /// i.e. by arc id.
    pub events: Vec<FailureEvent>,
    /// Per event: affected demands ordered by demand id.
    pub affected: Vec<Vec<AffectedDemand>>,
    /// Per event and arc: survivor load, counting only demands whose primary
    /// uses neither (n, m) nor (m, n).
    pub u: Vec<Vec<f64>>,
    /// Per node and arc: survivor load under a failure of that node,
    /// counting only demands whose primary avoids every arc incident to it.
    /// Present for nodes that are downstream of at least one event.
    pub v: Vec<Option<Vec<f64>>>,
    /// Event id of the opposite orientation (m, n), when that arc is also
    /// traversed by some primary.
    pub reverse_event: Vec<Option<EventId>>,
    /// Events grouped by downstream node m.
    pub events_into: Vec<Vec<EventId>>,
    /// Arc -> event id, for arcs that carry at least one primary.
    pub event_of_arc: Vec<Option<EventId>>,
}

impl ScenarioData {
    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    /// Total (event, affected demand) pairs, the size driver of the MILPs.
    pub fn pair_count(&self) -> usize {
        self.affected.iter().map(|a| a.len()).sum()
    }

    pub fn describe_event(&self, topo: &Topology, e: EventId) -> String {
        let ev = &self.events[e];
        format!(
            "({}, {})",
            topo.node_name(ev.detect),
            topo.node_name(ev.downstream)
        )
    }

    /// Nodes that appear as downstream of at least one event.
    pub fn nodes_with_events(&self) -> Vec<NodeId> {
        self.events_into
            .iter()
            .enumerate()
            .filter(|(_, evs)| !evs.is_empty())
            .map(|(m, _)| m)
            .collect()
    }
}

/// Derive all events and survivor loads from a fixed primary routing.
pub fn build_scenarios(topo: &Topology, routing: &PrimaryRouting) -> ScenarioData {
    let arc_count = topo.arc_count();

    // F: arcs used by at least one primary, in arc-id (lexicographic) order
    let mut event_of_arc: Vec<Option<EventId>> = vec![None; arc_count];
    let mut events = Vec::new();
    for arc in 0..arc_count {
        if !routing.arc_users[arc].is_empty() {
            let a = topo.arc(arc);
            event_of_arc[arc] = Some(events.len());
            events.push(FailureEvent {
                detect: a.from,
                downstream: a.to,
                arc,
            });
        }
    }

    let mut affected = vec![Vec::new(); events.len()];
    for (e, ev) in events.iter().enumerate() {
        for &d in &routing.arc_users[ev.arc] {
            let path = routing.path(d);
            let k = path
                .arcs
                .iter()
                .position(|&a| a == ev.arc)
                .expect("arc_users is consistent with paths");
            affected[e].push(AffectedDemand {
                demand: d,
                lambda: k,
                terminal: routing.demand(d).dst == ev.downstream,
            });
        }
    }

    // u per event: total load minus primaries using the failed link in
    // either orientation
    let mut u = Vec::with_capacity(events.len());
    for ev in &events {
        let rev = topo.reverse_arc(ev.arc);
        let mut row = routing.arc_load.clone();
        for &d in routing.arc_users[ev.arc]
            .iter()
            .chain(routing.arc_users[rev].iter())
        {
            let b = routing.demand(d).bandwidth;
            for &arc in &routing.path(d).arcs {
                row[arc] -= b;
            }
        }
        u.push(row);
    }

    let mut events_into = vec![Vec::new(); topo.node_count()];
    for (e, ev) in events.iter().enumerate() {
        events_into[ev.downstream].push(e);
    }

    // v per downstream node: total load minus primaries touching any arc
    // incident to it
    let mut v = vec![None; topo.node_count()];
    for m in 0..topo.node_count() {
        if events_into[m].is_empty() {
            continue;
        }
        let mut row = routing.arc_load.clone();
        for d in 0..routing.demand_count() {
            let path = routing.path(d);
            let touches = path
                .arcs
                .iter()
                .any(|&a| topo.arc(a).from == m || topo.arc(a).to == m);
            if touches {
                let b = routing.demand(d).bandwidth;
                for &arc in &path.arcs {
                    row[arc] -= b;
                }
            }
        }
        v[m] = Some(row);
    }

    let reverse_event = events
        .iter()
        .map(|ev| event_of_arc[topo.reverse_arc(ev.arc)])
        .collect();

    ScenarioData {
        events,
        affected,
        u,
        v,
        reverse_event,
        events_into,
        event_of_arc,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::{build_demands, route_primary, Demand};
    use crate::topology::{Node, Role, Topology};

    fn line_abc() -> (Topology, PrimaryRouting) {
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
        (topo, routing)
    }

    #[test]
    fn line_events_and_partitions() {
        let (topo, routing) = line_abc();
        let scen = build_scenarios(&topo, &routing);
        // only the two path arcs are events
        assert_eq!(scen.event_count(), 2);
        let names: Vec<String> = (0..2).map(|e| scen.describe_event(&topo, e)).collect();
        assert!(names.contains(&"(a, b)".to_string()));
        assert!(names.contains(&"(b, c)".to_string()));

        let e_bc = scen
            .events
            .iter()
            .position(|ev| topo.node_name(ev.detect) == "b")
            .unwrap();
        let aff = &scen.affected[e_bc];
        assert_eq!(aff.len(), 1);
        assert!(aff[0].terminal, "c is the destination, so d is in D2");
        assert_eq!(aff[0].lambda, 1);

        let e_ab = 1 - e_bc;
        assert!(!scen.affected[e_ab][0].terminal);
        assert_eq!(scen.affected[e_ab][0].lambda, 0);
    }

    #[test]
    fn unused_arcs_are_not_events() {
        let (topo, routing) = line_abc();
        let scen = build_scenarios(&topo, &routing);
        // reverse arcs (b,a), (c,b) carry no primary
        let ba = topo
            .arc_between(topo.node_by_name("b").unwrap(), topo.node_by_name("a").unwrap())
            .unwrap();
        assert!(scen.event_of_arc[ba].is_none());
        assert!(scen.event_count() <= topo.arc_count());
        assert!(scen.affected.iter().all(|a| !a.is_empty()));
    }

    /// Four-node square with two crossing demands; recompute u and v from
    /// scratch, straight from their definitions.
    #[test]
    fn u_v_match_exhaustive_recomputation() {
        let nodes = ["a", "b", "c", "d"]
            .iter()
            .map(|&s| Node {
                name: s.into(),
                role: Role::Edge,
            })
            .collect();
        // square a-b-c-d-a
        let topo = Topology::from_arcs(
            "square",
            nodes,
            vec![
                (0, 1, 10.0),
                (1, 0, 10.0),
                (1, 2, 10.0),
                (2, 1, 10.0),
                (2, 3, 10.0),
                (3, 2, 10.0),
                (3, 0, 10.0),
                (0, 3, 10.0),
            ],
        )
        .unwrap();
        let demands = vec![
            Demand {
                id: 0,
                src: 0,
                dst: 2,
                bandwidth: 2.0,
            },
            Demand {
                id: 1,
                src: 1,
                dst: 3,
                bandwidth: 3.0,
            },
        ];
        let routing = route_primary(&topo, &demands, 0.8).unwrap();
        let scen = build_scenarios(&topo, &routing);

        for (e, ev) in scen.events.iter().enumerate() {
            let rev = topo.reverse_arc(ev.arc);
            for arc in 0..topo.arc_count() {
                let mut expect = 0.0;
                for d in 0..2 {
                    let uses_failed =
                        routing.uses_arc(d, ev.arc) || routing.uses_arc(d, rev);
                    if !uses_failed && routing.uses_arc(d, arc) {
                        expect += routing.demand(d).bandwidth;
                    }
                }
                assert_eq!(scen.u[e][arc], expect, "u mismatch at event {e} arc {arc}");
            }
        }

        for m in 0..topo.node_count() {
            let Some(row) = &scen.v[m] else { continue };
            for arc in 0..topo.arc_count() {
                let mut expect = 0.0;
                for d in 0..2 {
                    let touches = routing.path(d).arcs.iter().any(|&a| {
                        topo.arc(a).from == m || topo.arc(a).to == m
                    });
                    if !touches && routing.uses_arc(d, arc) {
                        expect += routing.demand(d).bandwidth;
                    }
                }
                assert_eq!(row[arc], expect, "v mismatch at node {m} arc {arc}");
            }
        }
    }

    /// For every event and arc, survivors plus the primaries of affected
    /// demands (both orientations) must reassemble the total load.
    #[test]
    fn u_partition_invariant_on_polska() {
        let topo = Topology::builtin("polska")
            .unwrap()
            .unwrap()
            .with_uniform_capacity(14.0)
            .unwrap();
        let demands = build_demands(&topo, 1.0).unwrap();
        let routing = route_primary(&topo, &demands, 0.8).unwrap();
        let scen = build_scenarios(&topo, &routing);

        for (e, ev) in scen.events.iter().enumerate() {
            let rev_users: Vec<DemandId> = match scen.reverse_event[e] {
                Some(r) => scen.affected[r].iter().map(|a| a.demand).collect(),
                None => routing.arc_users[topo.reverse_arc(ev.arc)].clone(),
            };
            for arc in 0..topo.arc_count() {
                let mut total = scen.u[e][arc];
                for a in &scen.affected[e] {
                    if routing.uses_arc(a.demand, arc) {
                        total += routing.demand(a.demand).bandwidth;
                    }
                }
                for &d in &rev_users {
                    if routing.uses_arc(d, arc) {
                        total += routing.demand(d).bandwidth;
                    }
                }
                assert!(
                    (total - routing.arc_load[arc]).abs() < 1e-9,
                    "event {e} arc {arc}: {total} != {}",
                    routing.arc_load[arc]
                );
            }
        }

        // v never exceeds u for events into the same node
        for (e, ev) in scen.events.iter().enumerate() {
            let v = scen.v[ev.downstream].as_ref().unwrap();
            for arc in 0..topo.arc_count() {
                assert!(v[arc] <= scen.u[e][arc] + 1e-9);
            }
        }

        // lambda matches the 1-based position minus one
        for (e, ev) in scen.events.iter().enumerate() {
            for a in &scen.affected[e] {
                let path = routing.path(a.demand);
                let k = path.arcs.iter().position(|&x| x == ev.arc).unwrap();
                assert_eq!(a.lambda, k);
                assert_eq!(path.nodes[a.lambda], ev.detect);
            }
        }
    }
}

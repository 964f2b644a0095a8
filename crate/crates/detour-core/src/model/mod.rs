//! Solver-ready MILP instances for the protection models.
//!
//! [`MilpInstance`] is a plain variables/objective/rows container; the
//! builders in [`bp`], [`ca`] and [`e2e`] translate [`ScenarioData`] into
//! instances, returning alongside a variable map used later for plan
//! extraction. [`lp`] writes any instance in LP text format.

pub mod bp;
pub mod ca;
pub mod e2e;
pub mod lp;

pub use bp::{build_bp, BpVarMap};
pub use ca::{build_ca, CaVarMap};
pub use e2e::{build_e2e, E2eVarMap};

use crate::error::{Error, Result};
use crate::topology::ArcId;

/// Variable id: index into [`MilpInstance::vars`].
pub type VarId = usize;

/// Slopes of the five linear cuts under-approximating the link load cost
/// curve, paired with [`COST_CUT_INTERCEPTS`].
pub const COST_CUT_SLOPES: [f64; 5] = [1.0, 3.0, 10.0, 70.0, 500.0];
/// Intercepts (constants subtracted from slope * normalized load).
pub const COST_CUT_INTERCEPTS: [f64; 5] =
    [0.0, 2.0 / 3.0, 16.0 / 3.0, 178.0 / 3.0, 1468.0 / 3.0];

/// Piecewise cost of a normalized link load: the max of the five cuts,
/// clamped at zero. This is the curve the CA objective sums per arc.
pub fn load_cost(normalized: f64) -> f64 {
    COST_CUT_SLOPES
        .iter()
        .zip(COST_CUT_INTERCEPTS.iter())
        .map(|(s, c)| s * normalized - c)
        .fold(0.0f64, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarKind {
    Binary,
    /// Non-negative integer in [0, ub].
    Integer { ub: f64 },
    /// Continuous in [lb, ub].
    Continuous { lb: f64, ub: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// Which constraint family a row belongs to, for diagnostics and
/// bookkeeping tests. Indices are (event, slot-in-affected-list) pairs where
/// applicable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowTag {
    /// Backup of a D1 demand may not touch any arc incident to m.
    AvailQuarantine { event: u32, slot: u32 },
    /// Backup of a D2 demand may not use (n, m) or (m, n).
    AvailFailedLink { event: u32, slot: u32 },
    /// Link-failure capacity on one arc under one event.
    CapacityLink { event: u32, arc: u32 },
    /// Node-failure capacity on one arc under one downstream node.
    CapacityNode { node: u32, arc: u32 },
    /// Backup flow conservation at a node.
    FlowConservation { event: u32, slot: u32, node: u32 },
    /// Out-degree at most one per node.
    CycleAvoidance { event: u32, slot: u32, node: u32 },
    /// Lower bound tying backward hops to unused primary prefix arcs.
    ReversePath { event: u32, slot: u32 },
    /// z dominates y arc usage.
    CapacityUse { event: u32, slot: u32, arc: u32 },
    /// Load on an arc under one event is at most mu.
    MaxLoadLink { event: u32, arc: u32 },
    /// Load on an arc under one node failure is at most mu.
    MaxLoadNode { node: u32, arc: u32 },
    /// mu respects the admissible capacity.
    MaxLoadBound { arc: u32 },
    /// One linear cut of the load cost curve.
    CostCut { arc: u32, piece: u32 },
    /// E2E backup must not touch an internal primary node.
    DisjointNode { demand: u32, node: u32 },
    /// E2E backup must not reuse a primary arc in either direction.
    DisjointArc { demand: u32, arc: u32 },
    /// Free-form rows built in tests.
    Other,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: RowTag,
}

/// A mixed-integer linear program with stable, human-readable variable
/// names. Minimization is implied.
#[derive(Debug, Clone, Default)]
pub struct MilpInstance {
    pub name: String,
    pub vars: Vec<VarKind>,
    pub var_names: Vec<String>,
    /// Sparse minimize objective; variables not listed have coefficient 0.
    pub objective: Vec<(VarId, f64)>,
    pub rows: Vec<Row>,
}

impl MilpInstance {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn add_var(&mut self, name: String, kind: VarKind) -> VarId {
        self.vars.push(kind);
        self.var_names.push(name);
        self.vars.len() - 1
    }

    pub fn add_row(&mut self, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64, tag: RowTag) {
        self.rows.push(Row {
            terms,
            sense,
            rhs,
            tag,
        });
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn integer_var_count(&self) -> usize {
        self.vars
            .iter()
            .filter(|k| !matches!(k, VarKind::Continuous { .. }))
            .count()
    }

    pub fn bounds(&self, v: VarId) -> (f64, f64) {
        match self.vars[v] {
            VarKind::Binary => (0.0, 1.0),
            VarKind::Integer { ub } => (0.0, ub),
            VarKind::Continuous { lb, ub } => (lb, ub),
        }
    }

    /// Every variable referenced by the objective and rows must be declared.
    pub fn validate(&self) -> Result<()> {
        let n = self.vars.len();
        if self.var_names.len() != n {
            return Err(Error::Config("variable name table out of sync".into()));
        }
        for &(v, _) in &self.objective {
            if v >= n {
                return Err(Error::Config(format!("objective references unknown var {v}")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            for &(v, _) in &row.terms {
                if v >= n {
                    return Err(Error::Config(format!("row {i} references unknown var {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, assignment: &[f64]) -> f64 {
        self.objective
            .iter()
            .map(|&(v, c)| c * assignment[v])
            .sum()
    }

    pub fn row_activity(&self, row: &Row, assignment: &[f64]) -> f64 {
        row.terms.iter().map(|&(v, c)| c * assignment[v]).sum()
    }
}

/// Weight triple of the backup-path objective, in (w_h, w_y, w_z) order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpWeights {
    pub w_h: f64,
    pub w_y: f64,
    pub w_z: f64,
}

impl BpWeights {
    pub fn new(w_h: f64, w_y: f64, w_z: f64) -> Self {
        Self { w_h, w_y, w_z }
    }
}

/// Protection model selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    Bp(BpWeights),
    Ca,
    E2e,
}

impl Variant {
    /// Canonical name used in CLI flags, artifact files and reports.
    pub fn name(&self) -> String {
        match self {
            Variant::Bp(w) => {
                let bit = |x: f64| if x > 0.0 { '1' } else { '0' };
                format!("bp{}{}{}", bit(w.w_h), bit(w.w_y), bit(w.w_z))
            }
            Variant::Ca => "ca".into(),
            Variant::E2e => "e2e".into(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bp111" => Ok(Variant::Bp(BpWeights::new(1.0, 1.0, 1.0))),
            "bp100" => Ok(Variant::Bp(BpWeights::new(1.0, 0.0, 0.0))),
            "bp010" => Ok(Variant::Bp(BpWeights::new(0.0, 1.0, 0.0))),
            "bp001" => Ok(Variant::Bp(BpWeights::new(0.0, 0.0, 1.0))),
            "ca" => Ok(Variant::Ca),
            "e2e" => Ok(Variant::E2e),
            other => Err(Error::Config(format!(
                "unknown model variant `{other}` (expected bp111, bp100, bp010, bp001, ca, e2e)"
            ))),
        }
    }
}

/// Model configuration: variant plus the admissible capacity fraction.
#[derive(Debug, Clone, Copy)]
pub struct ModelSpec {
    pub variant: Variant,
    pub w_cap: f64,
}

impl ModelSpec {
    pub fn new(variant: Variant, w_cap: f64) -> Result<Self> {
        if !(w_cap > 0.0 && w_cap <= 1.0) {
            return Err(Error::Config(format!(
                "w_cap must be in (0, 1], got {w_cap}"
            )));
        }
        if let Variant::Bp(w) = variant {
            if w.w_h < 0.0 || w.w_y < 0.0 || w.w_z < 0.0 {
                return Err(Error::Config("BP weights must be non-negative".into()));
            }
            if w.w_h + w.w_y + w.w_z <= 0.0 {
                return Err(Error::Config(
                    "BP needs at least one positive weight".into(),
                ));
            }
        }
        Ok(Self { variant, w_cap })
    }
}

/// Layout of the y block shared by the BP and CA builders: one binary per
/// (event, affected demand) pair and arc, pairs flattened in event order.
#[derive(Debug, Clone)]
pub struct PairLayout {
    /// Flattened (event, slot) pairs.
    pub pairs: Vec<(crate::scenario::EventId, usize)>,
    pair_offset: Vec<usize>,
    arc_count: usize,
}

impl PairLayout {
    pub fn new(scen: &crate::scenario::ScenarioData, arc_count: usize) -> Self {
        let mut pairs = Vec::with_capacity(scen.pair_count());
        let mut pair_offset = Vec::with_capacity(scen.event_count());
        for (e, aff) in scen.affected.iter().enumerate() {
            pair_offset.push(pairs.len());
            for slot in 0..aff.len() {
                pairs.push((e, slot));
            }
        }
        Self {
            pairs,
            pair_offset,
            arc_count,
        }
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair(&self, event: crate::scenario::EventId, slot: usize) -> usize {
        self.pair_offset[event] + slot
    }

    /// y^{nm}_{d,ij} for a flattened pair and arc; the y block starts at
    /// variable 0.
    pub fn y(&self, pair: usize, arc: ArcId) -> VarId {
        pair * self.arc_count + arc
    }

    pub fn y_var_count(&self) -> usize {
        self.pairs.len() * self.arc_count
    }
}

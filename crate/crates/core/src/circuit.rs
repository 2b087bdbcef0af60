//! Gate-level circuits as sequences of qubit-disjoint moments.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::slice;

use crate::error::{Error, Result};
use crate::tree_layout::{NodeLabel, Qubit, RegisterKind, RegisterMap};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum GateKind {
    PauliX,
    Cnot,
    Toffoli,
    Fredkin,
    ControlledOpaque,
}

impl GateKind {
    pub const ALL: [GateKind; 5] = [
        GateKind::PauliX,
        GateKind::Cnot,
        GateKind::Toffoli,
        GateKind::Fredkin,
        GateKind::ControlledOpaque,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::PauliX => "x",
            GateKind::Cnot => "cx",
            GateKind::Toffoli => "ccx",
            GateKind::Fredkin => "cswap",
            GateKind::ControlledOpaque => "cu",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// `|0⟩⟨0| ⊗ 1 + |1⟩⟨1| ⊗ U^z` (or `U^z†` when `dagger` is set), with the
/// matrix itself supplied at simulation time.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OpaqueCall {
    pub control: Qubit,
    /// `res_z` followed by `mem_z`.
    pub targets: Vec<Qubit>,
    pub leaf: NodeLabel,
    pub dagger: bool,
    /// Declared circuit depth of the controlled unitary (≥ 1).
    pub depth: u32,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Gate {
    X { target: Qubit },
    Cnot { control: Qubit, target: Qubit },
    Toffoli { controls: [Qubit; 2], target: Qubit },
    Fredkin { control: Qubit, targets: [Qubit; 2] },
    ControlledOpaque(OpaqueCall),
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::X { .. } => GateKind::PauliX,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Toffoli { .. } => GateKind::Toffoli,
            Gate::Fredkin { .. } => GateKind::Fredkin,
            Gate::ControlledOpaque(_) => GateKind::ControlledOpaque,
        }
    }

    pub fn controls(&self) -> &[Qubit] {
        match self {
            Gate::X { .. } => &[],
            Gate::Cnot { control, .. } | Gate::Fredkin { control, .. } => slice::from_ref(control),
            Gate::Toffoli { controls, .. } => controls,
            Gate::ControlledOpaque(op) => slice::from_ref(&op.control),
        }
    }

    pub fn targets(&self) -> &[Qubit] {
        match self {
            Gate::X { target } | Gate::Cnot { target, .. } | Gate::Toffoli { target, .. } => {
                slice::from_ref(target)
            }
            Gate::Fredkin { targets, .. } => targets,
            Gate::ControlledOpaque(op) => &op.targets,
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = Qubit> + '_ {
        self.controls().iter().chain(self.targets()).copied()
    }

    /// Declared depth; 1 for elementary gates.
    pub fn depth(&self) -> u64 {
        match self {
            Gate::ControlledOpaque(op) => u64::from(op.depth.max(1)),
            _ => 1,
        }
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::ControlledOpaque(op) => Gate::ControlledOpaque(OpaqueCall {
                dagger: !op.dagger,
                ..op.clone()
            }),
            g => g.clone(),
        }
    }

    fn check_distinct(&self) -> Result<()> {
        let qs: Vec<Qubit> = self.qubits().collect();
        for (i, a) in qs.iter().enumerate() {
            if qs[i + 1..].contains(a) {
                return Err(Error::Structural(format!(
                    "{} gate uses qubit {a} more than once",
                    self.kind().name()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Moment {
    gates: Vec<Gate>,
}

impl Moment {
    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Max of the gates' declared depths, at least 1.
    pub fn depth(&self) -> u64 {
        self.gates.iter().map(Gate::depth).max().unwrap_or(1)
    }

    pub fn is_qubit_disjoint(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.gates
            .iter()
            .flat_map(Gate::qubits)
            .all(|q| seen.insert(q))
    }
}

/// Placement policy for [`Circuit::append`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Policy {
    /// Earliest moment after every moment that touches one of the gate's qubits.
    Asap,
    /// Always open a new moment.
    NewMoment,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct GateCounts {
    pub x: u64,
    pub cnot: u64,
    pub toffoli: u64,
    pub fredkin: u64,
    pub opaque: u64,
}

impl GateCounts {
    pub fn total(&self) -> u64 {
        self.x + self.cnot + self.toffoli + self.fredkin + self.opaque
    }

    pub fn get(&self, kind: GateKind) -> u64 {
        match kind {
            GateKind::PauliX => self.x,
            GateKind::Cnot => self.cnot,
            GateKind::Toffoli => self.toffoli,
            GateKind::Fredkin => self.fredkin,
            GateKind::ControlledOpaque => self.opaque,
        }
    }
}

/// An ordered list of moments over the qubits of a [`RegisterMap`].
#[derive(Clone, Debug)]
pub struct Circuit {
    layout: Arc<RegisterMap>,
    moments: Vec<Moment>,
    /// Per qubit: one past the index of the last moment touching it (0 = none).
    frontier: Vec<u32>,
    preparation: Option<usize>,
}

impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.same_layout(other)
            && self.moments == other.moments
            && self.preparation == other.preparation
    }
}

impl Circuit {
    pub fn new(layout: Arc<RegisterMap>) -> Self {
        let width = layout.num_qubits();
        Self {
            layout,
            moments: Vec::new(),
            frontier: vec![0; width],
            preparation: None,
        }
    }

    pub fn layout(&self) -> &Arc<RegisterMap> {
        &self.layout
    }

    pub fn moments(&self) -> &[Moment] {
        &self.moments
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> + '_ {
        self.moments.iter().flat_map(|m| m.gates.iter())
    }

    /// Index of the moment holding the `life_ε` preparation gate, if any.
    pub fn preparation(&self) -> Option<usize> {
        self.preparation
    }

    pub fn set_preparation(&mut self, moment: Option<usize>) -> Result<()> {
        if let Some(t) = moment {
            if t >= self.moments.len() {
                return Err(Error::Structural(format!(
                    "preparation moment {t} out of range"
                )));
            }
        }
        self.preparation = moment;
        Ok(())
    }

    fn same_layout(&self, other: &Circuit) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout) || self.layout == other.layout
    }

    fn validate(&self, gate: &Gate) -> Result<()> {
        let width = self.layout.num_qubits();
        if let Some(q) = gate.qubits().find(|q| q.index() >= width) {
            return Err(Error::Structural(format!(
                "{} gate references unallocated qubit {q} (layout has {width})",
                gate.kind().name()
            )));
        }
        gate.check_distinct()?;
        if let Gate::ControlledOpaque(op) = gate {
            let l = &self.layout;
            if op.leaf.len() != l.address_width() {
                return Err(Error::Structural(format!(
                    "opaque gate leaf {} is not a leaf",
                    op.leaf
                )));
            }
            let expected: Vec<Qubit> = (0..l.result_width())
                .map(|i| l.res(op.leaf, i))
                .chain((0..l.mem_width(op.leaf)).map(|j| l.mem(op.leaf, j)))
                .collect();
            if op.targets != expected {
                return Err(Error::Structural(format!(
                    "opaque gate for leaf {} must target res_z then mem_z",
                    op.leaf
                )));
            }
            if l.id(op.control).map(|id| id.kind) != Some(RegisterKind::Life) {
                return Err(Error::Structural(format!(
                    "opaque gate for leaf {} must be controlled on a life qubit",
                    op.leaf
                )));
            }
            if op.depth == 0 {
                return Err(Error::Structural("declared depth must be ≥ 1".into()));
            }
        }
        Ok(())
    }

    /// Places `gate` and returns the index of its moment.
    pub fn append(&mut self, gate: Gate, policy: Policy) -> Result<usize> {
        self.validate(&gate)?;
        let t = match policy {
            Policy::Asap => gate
                .qubits()
                .map(|q| self.frontier[q.index()] as usize)
                .max()
                .unwrap_or(0),
            Policy::NewMoment => self.moments.len(),
        };
        if t == self.moments.len() {
            self.moments.push(Moment::default());
        }
        for q in gate.qubits() {
            self.frontier[q.index()] = t as u32 + 1;
        }
        self.moments[t].gates.push(gate);
        Ok(t)
    }

    /// Appends a whole moment verbatim.
    pub fn push_moment(&mut self, gates: Vec<Gate>) -> Result<usize> {
        for g in &gates {
            self.validate(g)?;
        }
        let moment = Moment { gates };
        if !moment.is_qubit_disjoint() {
            return Err(Error::Structural(format!(
                "moment {} is not qubit-disjoint",
                self.moments.len()
            )));
        }
        let t = self.moments.len();
        for q in moment.gates.iter().flat_map(Gate::qubits) {
            self.frontier[q.index()] = t as u32 + 1;
        }
        self.moments.push(moment);
        Ok(t)
    }

    /// Appends `other`'s moments verbatim after this circuit's.
    pub fn concat(&mut self, other: &Circuit) -> Result<()> {
        if !self.same_layout(other) {
            return Err(Error::Structural(
                "cannot concatenate circuits over different layouts".into(),
            ));
        }
        let offset = self.moments.len();
        for m in &other.moments {
            self.push_moment(m.gates.clone())?;
        }
        if self.preparation.is_none() {
            self.preparation = other.preparation.map(|t| t + offset);
        }
        Ok(())
    }

    /// Re-schedules `other`'s gates, in order, onto this circuit with [`Policy::Asap`].
    pub fn extend_asap(&mut self, other: &Circuit) -> Result<()> {
        if !self.same_layout(other) {
            return Err(Error::Structural(
                "cannot concatenate circuits over different layouts".into(),
            ));
        }
        for g in other.gates() {
            self.append(g.clone(), Policy::Asap)?;
        }
        Ok(())
    }

    /// Σ over moments of the moment's declared depth.
    pub fn depth(&self) -> u64 {
        self.moments.iter().map(Moment::depth).sum()
    }

    /// Maximum number of gates in one moment.
    pub fn width(&self) -> usize {
        self.moments.iter().map(Moment::len).max().unwrap_or(0)
    }

    pub fn num_gates(&self) -> usize {
        self.moments.iter().map(Moment::len).sum()
    }

    pub fn gate_counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for g in self.gates() {
            match g.kind() {
                GateKind::PauliX => c.x += 1,
                GateKind::Cnot => c.cnot += 1,
                GateKind::Toffoli => c.toffoli += 1,
                GateKind::Fredkin => c.fredkin += 1,
                GateKind::ControlledOpaque => c.opaque += 1,
            }
        }
        c
    }

    /// Qubits touched by at least one gate.
    pub fn touched_qubits(&self) -> BTreeSet<Qubit> {
        self.gates().flat_map(Gate::qubits).collect()
    }

    /// Moments in reverse order, each gate replaced by its inverse.
    pub fn adjoint(&self) -> Circuit {
        let moments: Vec<Moment> = self
            .moments
            .iter()
            .rev()
            .map(|m| Moment {
                gates: m.gates.iter().rev().map(Gate::inverse).collect(),
            })
            .collect();
        let last = self.moments.len().saturating_sub(1);
        let mut out = Circuit::new(self.layout.clone());
        for (t, m) in moments.iter().enumerate() {
            for q in m.gates.iter().flat_map(Gate::qubits) {
                out.frontier[q.index()] = t as u32 + 1;
            }
        }
        out.moments = moments;
        out.preparation = self.preparation.map(|t| last - t);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_layout::allocate_registers;

    fn layout() -> Arc<RegisterMap> {
        Arc::new(allocate_registers(2, 2, &[1; 4]).unwrap())
    }

    fn q(i: u32) -> Qubit {
        Qubit(i)
    }

    fn cx(c: u32, t: u32) -> Gate {
        Gate::Cnot {
            control: q(c),
            target: q(t),
        }
    }

    #[test]
    fn asap_parallelizes_disjoint() {
        let mut c = Circuit::new(layout());
        c.append(cx(0, 1), Policy::Asap).unwrap();
        c.append(cx(2, 3), Policy::Asap).unwrap();
        assert_eq!(c.moments().len(), 1);
    }

    #[test]
    fn shared_control_blocks() {
        let mut c = Circuit::new(layout());
        c.append(cx(0, 1), Policy::Asap).unwrap();
        c.append(cx(0, 2), Policy::Asap).unwrap();
        assert_eq!(c.moments().len(), 2);
    }

    #[test]
    fn new_moment_serializes() {
        let mut c = Circuit::new(layout());
        c.append(Gate::X { target: q(0) }, Policy::Asap).unwrap();
        c.append(Gate::X { target: q(1) }, Policy::NewMoment)
            .unwrap();
        assert_eq!(c.moments().len(), 2);
    }

    #[test]
    fn asap_fills_earlier_moment() {
        let mut c = Circuit::new(layout());
        c.append(cx(0, 1), Policy::Asap).unwrap();
        c.append(cx(1, 2), Policy::Asap).unwrap();
        assert_eq!(c.append(cx(3, 4), Policy::Asap).unwrap(), 0);
    }

    #[test]
    fn depth_and_width() {
        let mut c = Circuit::new(layout());
        assert_eq!(c.depth(), 0);
        assert_eq!(c.width(), 0);
        for _ in 0..3 {
            c.append(cx(0, 1), Policy::Asap).unwrap();
        }
        assert_eq!(c.depth(), 3);

        let mut c = Circuit::new(layout());
        for i in 0..5 {
            c.append(cx(2 * i, 2 * i + 1), Policy::Asap).unwrap();
        }
        assert_eq!(c.width(), 5);
        assert_eq!(c.depth(), 1);
    }

    #[test]
    fn opaque_depth_passthrough() {
        let l = layout();
        let z = NodeLabel::parse("01").unwrap();
        let mut c = Circuit::new(l.clone());
        let op = OpaqueCall {
            control: l.life(z),
            targets: vec![l.res(z, 0), l.res(z, 1), l.mem(z, 0)],
            leaf: z,
            dagger: false,
            depth: 7,
        };
        c.append(Gate::ControlledOpaque(op), Policy::Asap).unwrap();
        c.append(cx(0, 1), Policy::Asap).unwrap();
        assert_eq!(c.moments().len(), 1);
        assert_eq!(c.depth(), 7);
    }

    #[test]
    fn opaque_targets_checked() {
        let l = layout();
        let z = NodeLabel::parse("01").unwrap();
        let mut c = Circuit::new(l.clone());
        let op = OpaqueCall {
            control: l.life(z),
            targets: vec![l.res(z, 0)],
            leaf: z,
            dagger: false,
            depth: 1,
        };
        assert!(matches!(
            c.append(Gate::ControlledOpaque(op), Policy::Asap),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn unallocated_qubit_rejected() {
        let mut c = Circuit::new(layout());
        let n = c.layout().num_qubits() as u32;
        assert!(matches!(
            c.append(cx(0, n), Policy::Asap),
            Err(Error::Structural(_))
        ));
        assert!(matches!(
            c.append(cx(1, 1), Policy::Asap),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn push_moment_checks_disjointness() {
        let mut c = Circuit::new(layout());
        assert!(c.push_moment(vec![cx(0, 1), cx(1, 2)]).is_err());
        assert!(c.push_moment(vec![cx(0, 1), cx(2, 3)]).is_ok());
    }

    #[test]
    fn adjoint_of_cnot_is_itself() {
        let mut c = Circuit::new(layout());
        c.append(cx(0, 1), Policy::Asap).unwrap();
        assert_eq!(c.adjoint(), c);
    }

    #[test]
    fn adjoint_toggles_dagger_and_reverses() {
        let l = layout();
        let z = NodeLabel::parse("10").unwrap();
        let mut c = Circuit::new(l.clone());
        c.append(cx(0, 1), Policy::Asap).unwrap();
        let op = OpaqueCall {
            control: l.life(z),
            targets: vec![l.res(z, 0), l.res(z, 1), l.mem(z, 0)],
            leaf: z,
            dagger: false,
            depth: 2,
        };
        c.append(Gate::ControlledOpaque(op), Policy::NewMoment)
            .unwrap();
        let adj = c.adjoint();
        match &adj.moments()[0].gates()[0] {
            Gate::ControlledOpaque(op) => assert!(op.dagger),
            g => panic!("unexpected {g:?}"),
        }
        assert_eq!(adj.moments()[1].gates()[0], cx(0, 1));
        assert_eq!(adj.adjoint(), c);
    }

    #[test]
    fn concat_requires_same_layout() {
        let a = Circuit::new(layout());
        let mut b = Circuit::new(layout());
        b.concat(&a).unwrap();
        let other = Arc::new(allocate_registers(1, 1, &[0; 2]).unwrap());
        assert!(b.concat(&Circuit::new(other)).is_err());
    }
}

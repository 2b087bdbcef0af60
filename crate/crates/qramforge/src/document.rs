//! JSON circuit documents.
//!
//! A document carries the parameters needed to rebuild the register
//! allocation, the allocation itself (checked on load), every moment as a
//! list of gate records, a metrics block and, optionally, the dense matrices
//! of the opaque leaf unitaries. Matrices are row-major lists of `[re, im]`.

use std::sync::Arc;

use qramforge_core::circuit::GateCounts;
use qramforge_core::tree_layout::{allocate_registers, AncillaCounts};
use qramforge_core::{
    Circuit, Complex64, Gate, GateKind, NodeLabel, OpaqueCall, Qubit, RegisterKind, RegisterMap,
    UnitarySpec, UnitaryTable,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CIRCUIT_VERSION: &str = "qramforge-circuit/1";

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDocument {
    pub version: String,
    pub parameters: Parameters,
    pub registers: Vec<RegisterRecord>,
    /// Index of the moment holding the `X(life_ε)` preparation gate.
    pub preparation: Option<usize>,
    pub moments: Vec<Vec<GateRecord>>,
    pub metrics: Metrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitaries: Option<Vec<UnitaryRecord>>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    pub n: usize,
    pub m: usize,
    /// Memory width of each leaf, in leaf order.
    pub k: Vec<usize>,
    pub variant: String,
    /// Fan-out block size; present exactly when the layout has copies.
    pub s: Option<usize>,
    pub phase: String,
    pub family: Option<String>,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<u64>>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterRecord {
    pub name: String,
    pub kind: String,
    /// Node label as a bit string, empty for the root.
    pub node: String,
    pub start: u32,
    pub len: u32,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateRecord {
    pub kind: String,
    pub controls: Vec<u32>,
    pub targets: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaf: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dagger: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_depth: Option<u32>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metrics {
    pub depth: u64,
    pub width: usize,
    pub qubits: usize,
    pub gates: GateTally,
    pub ancillas: AncillaTally,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateTally {
    pub x: u64,
    pub cx: u64,
    pub ccx: u64,
    pub cswap: u64,
    pub cu: u64,
    pub total: u64,
}

impl From<GateCounts> for GateTally {
    fn from(c: GateCounts) -> Self {
        Self {
            x: c.x,
            cx: c.cnot,
            ccx: c.toffoli,
            cswap: c.fredkin,
            cu: c.opaque,
            total: c.total(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AncillaTally {
    pub life: u64,
    pub adr: u64,
    pub res: u64,
    pub copies: u64,
    pub total: u64,
    pub mem: u64,
}

impl From<AncillaCounts> for AncillaTally {
    fn from(c: AncillaCounts) -> Self {
        Self {
            life: c.life,
            adr: c.adr,
            res: c.res,
            copies: c.copies,
            total: c.total,
            mem: c.mem,
        }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitaryRecord {
    pub leaf: String,
    pub result_width: usize,
    pub mem_width: usize,
    pub declared_depth: u32,
    pub matrix: Vec<[f64; 2]>,
}

impl Metrics {
    pub fn of(circuit: &Circuit) -> Self {
        Self {
            depth: circuit.depth(),
            width: circuit.width(),
            qubits: circuit.layout().num_qubits(),
            gates: circuit.gate_counts().into(),
            ancillas: circuit.layout().measured_counts().into(),
        }
    }
}

/// Register name as used in documents and QASM: `address`, `result`, or
/// `<kind>_<node>` with `e` standing for the root.
pub fn register_name(kind: RegisterKind, node: NodeLabel) -> String {
    match kind {
        RegisterKind::Address | RegisterKind::Result => kind.name().to_string(),
        _ if node.is_root() => format!("{}_e", kind.name()),
        _ => format!("{}_{}", kind.name(), node.bits()),
    }
}

pub fn register_table(layout: &RegisterMap) -> Vec<RegisterRecord> {
    layout
        .registers()
        .into_iter()
        .map(|r| RegisterRecord {
            name: register_name(r.kind, r.node),
            kind: r.kind.name().to_string(),
            node: r.node.bits(),
            start: r.start,
            len: r.len,
        })
        .collect()
}

fn gate_record(g: &Gate) -> GateRecord {
    let idx = |qs: &[Qubit]| qs.iter().map(|q| q.0).collect();
    let mut rec = GateRecord {
        kind: g.kind().name().to_string(),
        controls: idx(g.controls()),
        targets: idx(g.targets()),
        leaf: None,
        dagger: None,
        declared_depth: None,
    };
    if let Gate::ControlledOpaque(call) = g {
        rec.leaf = Some(call.leaf.bits());
        rec.dagger = Some(call.dagger);
        rec.declared_depth = Some(call.depth);
    }
    rec
}

fn unitary_record(u: &UnitarySpec) -> UnitaryRecord {
    UnitaryRecord {
        leaf: u.leaf().bits(),
        result_width: u.result_width(),
        mem_width: u.mem_width(),
        declared_depth: u.depth(),
        matrix: u.matrix().iter().map(|c| [c.re, c.im]).collect(),
    }
}

impl CircuitDocument {
    /// Describes `circuit`; `parameters.s` is taken from the layout.
    pub fn new(
        circuit: &Circuit,
        mut parameters: Parameters,
        unitaries: Option<&UnitaryTable>,
    ) -> Self {
        let layout = circuit.layout();
        parameters.n = layout.address_width();
        parameters.m = layout.result_width();
        parameters.k = layout.mem_widths().to_vec();
        parameters.s = layout.fanout_block_size();
        Self {
            version: CIRCUIT_VERSION.to_string(),
            parameters,
            registers: register_table(layout),
            preparation: circuit.preparation(),
            moments: circuit
                .moments()
                .iter()
                .map(|m| m.gates().iter().map(gate_record).collect())
                .collect(),
            metrics: Metrics::of(circuit),
            unitaries: unitaries.map(|t| t.iter().map(unitary_record).collect()),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    /// Parses and checks the version; use [`CircuitDocument::to_circuit`] to
    /// validate the contents.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("version").and_then(|v| v.as_str()) {
            Some(CIRCUIT_VERSION) => {}
            Some(other) => {
                return Err(Error::Version {
                    found: other.to_string(),
                    expected: CIRCUIT_VERSION,
                })
            }
            None => return Err(Error::schema("version", "missing or not a string")),
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn layout(&self) -> Result<RegisterMap> {
        let p = &self.parameters;
        let base = allocate_registers(p.n, p.m, &p.k)?;
        let layout = match p.s {
            Some(s) => base.with_fanout(s)?,
            None => base,
        };
        let expected = register_table(&layout);
        if expected.len() != self.registers.len() {
            return Err(Error::schema(
                "registers",
                format!(
                    "expected {} registers, found {}",
                    expected.len(),
                    self.registers.len()
                ),
            ));
        }
        for (i, (want, got)) in expected.iter().zip(&self.registers).enumerate() {
            if want != got {
                return Err(Error::schema(
                    format!("registers[{i}]"),
                    format!("expected {want:?}, found {got:?}"),
                ));
            }
        }
        Ok(layout)
    }

    /// Rebuilds the circuit, checking every gate and the metrics block.
    pub fn to_circuit(&self) -> Result<Circuit> {
        let layout = Arc::new(self.layout()?);
        let mut circuit = Circuit::new(layout.clone());
        for (t, moment) in self.moments.iter().enumerate() {
            let gates = moment
                .iter()
                .enumerate()
                .map(|(g, rec)| parse_gate(&layout, rec, &format!("moments[{t}][{g}]")))
                .collect::<Result<Vec<_>>>()?;
            circuit
                .push_moment(gates)
                .map_err(|e| Error::schema(format!("moments[{t}]"), e.to_string()))?;
        }
        circuit
            .set_preparation(self.preparation)
            .map_err(|e| Error::schema("preparation", e.to_string()))?;
        let actual = Metrics::of(&circuit);
        if actual != self.metrics {
            return Err(Error::schema(
                "metrics",
                format!("document says {:?}, circuit has {:?}", self.metrics, actual),
            ));
        }
        Ok(circuit)
    }

    pub fn unitary_table(&self) -> Result<Option<UnitaryTable>> {
        let Some(records) = &self.unitaries else {
            return Ok(None);
        };
        let mut table = UnitaryTable::new();
        for (i, rec) in records.iter().enumerate() {
            let loc = format!("unitaries[{i}]");
            let leaf =
                NodeLabel::parse(&rec.leaf).map_err(|e| Error::schema(&loc, e.to_string()))?;
            let matrix = rec
                .matrix
                .iter()
                .map(|[re, im]| Complex64::new(*re, *im))
                .collect();
            let spec = UnitarySpec::new(
                leaf,
                rec.result_width,
                rec.mem_width,
                matrix,
                rec.declared_depth,
            )
            .map_err(|e| Error::schema(&loc, e.to_string()))?;
            if table.insert(spec).is_some() {
                return Err(Error::schema(loc, format!("duplicate leaf {:?}", rec.leaf)));
            }
        }
        Ok(Some(table))
    }
}

fn qubits(layout: &RegisterMap, list: &[u32], loc: &str, field: &str) -> Result<Vec<Qubit>> {
    list.iter()
        .map(|&q| {
            if (q as usize) < layout.num_qubits() {
                Ok(Qubit(q))
            } else {
                Err(Error::schema(
                    format!("{loc}.{field}"),
                    format!("qubit {q} not allocated ({} qubits)", layout.num_qubits()),
                ))
            }
        })
        .collect()
}

fn parse_gate(layout: &RegisterMap, rec: &GateRecord, loc: &str) -> Result<Gate> {
    let kind = GateKind::from_name(&rec.kind).ok_or_else(|| {
        Error::schema(
            format!("{loc}.kind"),
            format!("unknown gate kind {:?}", rec.kind),
        )
    })?;
    let controls = qubits(layout, &rec.controls, loc, "controls")?;
    let targets = qubits(layout, &rec.targets, loc, "targets")?;
    let arity = match kind {
        GateKind::PauliX => Some((0, 1)),
        GateKind::Cnot => Some((1, 1)),
        GateKind::Toffoli => Some((2, 1)),
        GateKind::Fredkin => Some((1, 2)),
        GateKind::ControlledOpaque => None,
    };
    if let Some((c, t)) = arity {
        if controls.len() != c || targets.len() != t {
            return Err(Error::schema(
                loc,
                format!(
                    "{} takes {c} controls and {t} targets, found {} and {}",
                    rec.kind,
                    controls.len(),
                    targets.len()
                ),
            ));
        }
        if rec.leaf.is_some() || rec.dagger.is_some() || rec.declared_depth.is_some() {
            return Err(Error::schema(
                loc,
                format!("{} takes no leaf, dagger or declared_depth", rec.kind),
            ));
        }
    }
    Ok(match kind {
        GateKind::PauliX => Gate::X { target: targets[0] },
        GateKind::Cnot => Gate::Cnot {
            control: controls[0],
            target: targets[0],
        },
        GateKind::Toffoli => Gate::Toffoli {
            controls: [controls[0], controls[1]],
            target: targets[0],
        },
        GateKind::Fredkin => Gate::Fredkin {
            control: controls[0],
            targets: [targets[0], targets[1]],
        },
        GateKind::ControlledOpaque => {
            if controls.len() != 1 {
                return Err(Error::schema(
                    format!("{loc}.controls"),
                    "cu takes exactly one control",
                ));
            }
            let field = |name: &str| Error::schema(format!("{loc}.{name}"), "required for cu");
            let leaf = rec.leaf.as_deref().ok_or_else(|| field("leaf"))?;
            let leaf = NodeLabel::parse(leaf)
                .map_err(|e| Error::schema(format!("{loc}.leaf"), e.to_string()))?;
            Gate::ControlledOpaque(OpaqueCall {
                control: controls[0],
                targets,
                leaf,
                dagger: rec.dagger.ok_or_else(|| field("dagger"))?,
                depth: rec.declared_depth.ok_or_else(|| field("declared_depth"))?,
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use qramforge_core::synthesis::synth_down;
    use qramforge_core::SynthesisOptions;

    fn params() -> Parameters {
        Parameters {
            n: 0,
            m: 0,
            k: Vec::new(),
            variant: "sequential".into(),
            s: None,
            phase: "down".into(),
            family: None,
            seed: None,
            table: None,
        }
    }

    fn down_doc() -> CircuitDocument {
        let layout = allocate_registers(1, 1, &[1, 1]).unwrap();
        let c = synth_down(&layout, &SynthesisOptions::sequential()).unwrap();
        CircuitDocument::new(&c, params(), None)
    }

    #[test]
    fn empty_circuit_round_trips() {
        let layout = Arc::new(allocate_registers(1, 1, &[0, 0]).unwrap());
        let c = Circuit::new(layout);
        let doc = CircuitDocument::new(&c, params(), None);
        let text = doc.to_json();
        let back = CircuitDocument::from_json(&text).unwrap();
        assert_eq!(back.to_circuit().unwrap(), c);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn register_names() {
        let n = |s: &str| NodeLabel::parse(s).unwrap();
        assert_eq!(register_name(RegisterKind::Life, NodeLabel::ROOT), "life_e");
        assert_eq!(register_name(RegisterKind::Res, n("01")), "res_01");
        assert_eq!(
            register_name(RegisterKind::Address, NodeLabel::ROOT),
            "address"
        );
    }

    #[test]
    fn unknown_kind_names_moment() {
        let mut doc = down_doc();
        doc.moments[2][0].kind = "h".into();
        let err = CircuitDocument::from_json(&doc.to_json())
            .unwrap()
            .to_circuit()
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("moments[2][0].kind"), "{msg}");
        assert!(msg.contains("unknown gate kind"), "{msg}");
    }

    #[test]
    fn version_mismatch() {
        let text = down_doc()
            .to_json()
            .replace(CIRCUIT_VERSION, "qramforge-circuit/9");
        assert!(matches!(
            CircuitDocument::from_json(&text),
            Err(Error::Version { .. })
        ));
    }

    #[test]
    fn bad_documents_rejected() {
        let mut doc = down_doc();
        doc.metrics.depth += 1;
        assert!(matches!(doc.to_circuit(), Err(Error::Schema { .. })));

        let mut doc = down_doc();
        doc.moments[0][0].targets = vec![9999];
        let msg = doc.to_circuit().unwrap_err().to_string();
        assert!(msg.contains("moments[0][0].targets"), "{msg}");

        let mut doc = down_doc();
        doc.registers[1].len += 1;
        assert!(doc
            .to_circuit()
            .unwrap_err()
            .to_string()
            .contains("registers[1]"));

        let text = down_doc()
            .to_json()
            .replacen("\"phase\"", "\"bogus\": 1, \"phase\"", 1);
        let msg = CircuitDocument::from_json(&text).unwrap_err().to_string();
        assert!(msg.contains("bogus") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn matrices_round_trip() {
        let inst = qramforge_core::verifier::build_random_instance(1, 1, &[1, 0], 5).unwrap();
        let c = qramforge_core::synthesis::synth_access(
            &inst.layout().unwrap(),
            inst.unitaries(),
            &SynthesisOptions::fanout(),
        )
        .unwrap();
        let doc = CircuitDocument::new(&c, params(), Some(inst.unitaries()));
        let back = CircuitDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back.unitary_table().unwrap().unwrap(), *inst.unitaries());
        assert_eq!(back.to_circuit().unwrap(), c);
    }
}

//! OpenQASM 2.0 rendering.
//!
//! Each register becomes a `qreg`, gates map to `x`, `cx`, `ccx` and `cswap`,
//! and a controlled leaf unitary becomes a call of the opaque gate
//! `cu_z<leaf>` (or `cu_z<leaf>_dg` for its adjoint) whose first argument is
//! the control.

use std::collections::BTreeMap;
use std::fmt::Write;

use qramforge_core::{Circuit, Gate, NodeLabel, Qubit};

use crate::document::register_name;

pub fn opaque_name(leaf: NodeLabel, dagger: bool) -> String {
    format!("cu_z{}{}", leaf.bits(), if dagger { "_dg" } else { "" })
}

pub fn emit_qasm(circuit: &Circuit) -> String {
    let layout = circuit.layout();
    let mut names: Vec<String> = vec![String::new(); layout.num_qubits()];
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");

    let mut opaque: BTreeMap<String, usize> = BTreeMap::new();
    for g in circuit.gates() {
        if let Gate::ControlledOpaque(call) = g {
            opaque.insert(opaque_name(call.leaf, call.dagger), call.targets.len());
        }
    }
    for (name, targets) in &opaque {
        let args: Vec<String> = (0..*targets).map(|i| format!("t{i}")).collect();
        let _ = writeln!(out, "opaque {name} c, {};", args.join(", "));
    }

    for r in layout.registers() {
        let name = register_name(r.kind, r.node);
        let _ = writeln!(out, "qreg {name}[{}];", r.len);
        for (i, q) in r.qubits().enumerate() {
            names[q.index()] = format!("{name}[{i}]");
        }
    }

    let q = |q: &Qubit| names[q.index()].as_str();
    for (t, moment) in circuit.moments().iter().enumerate() {
        let _ = writeln!(out, "// moment {t}");
        for g in moment.gates() {
            let _ = match g {
                Gate::X { target } => writeln!(out, "x {};", q(target)),
                Gate::Cnot { control, target } => {
                    writeln!(out, "cx {}, {};", q(control), q(target))
                }
                Gate::Toffoli { controls, target } => {
                    writeln!(
                        out,
                        "ccx {}, {}, {};",
                        q(&controls[0]),
                        q(&controls[1]),
                        q(target)
                    )
                }
                Gate::Fredkin { control, targets } => {
                    writeln!(
                        out,
                        "cswap {}, {}, {};",
                        q(control),
                        q(&targets[0]),
                        q(&targets[1])
                    )
                }
                Gate::ControlledOpaque(call) => {
                    let args: Vec<&str> = std::iter::once(&call.control)
                        .chain(&call.targets)
                        .map(q)
                        .collect();
                    writeln!(
                        out,
                        "{} {};",
                        opaque_name(call.leaf, call.dagger),
                        args.join(", ")
                    )
                }
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use qramforge_core::tree_layout::allocate_registers;
    use qramforge_core::Policy;

    use super::*;

    #[test]
    fn single_cnot() {
        let layout = Arc::new(allocate_registers(1, 1, &[0, 0]).unwrap());
        let mut c = Circuit::new(layout.clone());
        c.append(
            Gate::Cnot {
                control: layout.address(0),
                target: layout.result(0),
            },
            Policy::Asap,
        )
        .unwrap();
        let text = emit_qasm(&c);
        assert!(text.starts_with(
            "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg address[1];\nqreg result[1];\n"
        ));
        assert!(text.ends_with("// moment 0\ncx address[0], result[0];\n"));
        assert_eq!(text.lines().filter(|l| l.starts_with("cx ")).count(), 1);
    }

    #[test]
    fn fredkin_and_opaque() {
        let layout = Arc::new(allocate_registers(1, 1, &[1, 0]).unwrap());
        let mut c = Circuit::new(layout.clone());
        let zero = NodeLabel::parse("0").unwrap();
        c.append(
            Gate::Fredkin {
                control: layout.life(zero),
                targets: [layout.res(NodeLabel::ROOT, 0), layout.res(zero, 0)],
            },
            Policy::Asap,
        )
        .unwrap();
        let run = qramforge_core::synthesis::synth_run_declared(layout.clone(), &[1, 1]).unwrap();
        c.concat(&run).unwrap();
        c.concat(&run.adjoint()).unwrap();
        let text = emit_qasm(&c);
        assert!(
            text.contains("cswap life_0[0], result[0], res_0[0];"),
            "{text}"
        );
        assert!(text.contains("opaque cu_z0 c, t0, t1;"));
        assert!(text.contains("opaque cu_z1 c, t0;"));
        assert!(text.contains("opaque cu_z0_dg c, t0, t1;"));
        assert!(text.contains("cu_z0 life_0[0], res_0[0], mem_0[0];"));
        assert!(text.contains("cu_z1_dg life_1[0], res_1[0];"));
        assert_eq!(emit_qasm(&c), text);
    }
}

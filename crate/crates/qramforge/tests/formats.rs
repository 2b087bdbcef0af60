use qramforge::document::{CircuitDocument, Parameters};
use qramforge::instance::{FamilyKind, InstanceParams};
use qramforge::qasm::emit_qasm;
use qramforge::state::StateDocument;
use qramforge_core::simulator::basis_state;
use qramforge_core::synthesis::{synth_access, synth_down};
use qramforge_core::tree_layout::allocate_registers;
use qramforge_core::{BasisAssignment, SynthesisOptions, Variant};

const GOLDEN_DOWN: &str = include_str!("golden/down_n1_m1.json");

fn params(phase: &str) -> Parameters {
    Parameters {
        n: 0,
        m: 0,
        k: Vec::new(),
        variant: "sequential".into(),
        s: None,
        phase: phase.into(),
        family: Some("qram".into()),
        seed: None,
        table: None,
    }
}

#[test]
fn golden_down_phase_is_byte_identical() {
    let layout = allocate_registers(1, 1, &[1, 1]).unwrap();
    let down = synth_down(&layout, &SynthesisOptions::sequential()).unwrap();
    let text = CircuitDocument::new(&down, params("down"), None).to_json();
    assert_eq!(text, GOLDEN_DOWN);
    let doc = CircuitDocument::from_json(GOLDEN_DOWN).unwrap();
    assert_eq!(doc.to_circuit().unwrap(), down);
    assert_eq!(doc.to_json(), GOLDEN_DOWN);
}

#[test]
fn access_documents_round_trip() {
    for family in [
        FamilyKind::Qram,
        FamilyKind::Lookup,
        FamilyKind::Rotation,
        FamilyKind::Random,
    ] {
        for variant in [Variant::Sequential, Variant::Fanout] {
            let p = InstanceParams {
                n: 2,
                m: 2,
                k: None,
                family,
                seed: 9,
                variant,
                block_size: None,
            };
            let inst = p.build().unwrap();
            let c = synth_access(
                &inst.layout().unwrap(),
                inst.unitaries(),
                &p.options().unwrap(),
            )
            .unwrap();
            let doc = CircuitDocument::new(&c, params("access"), Some(inst.unitaries()));
            let text = doc.to_json();
            let back = CircuitDocument::from_json(&text).unwrap();
            assert_eq!(back, doc);
            assert_eq!(back.to_json(), text, "{family:?} {variant:?}");
            assert_eq!(back.to_circuit().unwrap(), c);
            assert_eq!(&back.unitary_table().unwrap().unwrap(), inst.unitaries());
            // Determinism across independent builds.
            let again = synth_access(
                &inst.layout().unwrap(),
                inst.unitaries(),
                &p.options().unwrap(),
            )
            .unwrap();
            assert_eq!(
                CircuitDocument::new(&again, params("access"), Some(inst.unitaries())).to_json(),
                text
            );
        }
    }
}

#[test]
fn schema_errors_carry_locations() {
    let bad_kind = GOLDEN_DOWN.replacen("\"kind\": \"cswap\"", "\"kind\": \"swap\"", 1);
    let err = CircuitDocument::from_json(&bad_kind)
        .unwrap()
        .to_circuit()
        .unwrap_err();
    assert!(err.to_string().contains("moments[4]"), "{err}");

    let truncated = &GOLDEN_DOWN[..GOLDEN_DOWN.len() / 2];
    let err = CircuitDocument::from_json(truncated).unwrap_err();
    assert!(err.to_string().contains("line"), "{err}");

    let missing = GOLDEN_DOWN.replacen("\"width\": 2,", "", 1);
    let err = CircuitDocument::from_json(&missing).unwrap_err();
    assert!(err.to_string().contains("width"), "{err}");
}

#[test]
fn qasm_is_deterministic_and_complete() {
    let p = InstanceParams {
        n: 2,
        m: 1,
        k: None,
        family: FamilyKind::Qram,
        seed: 0,
        variant: Variant::Sequential,
        block_size: None,
    };
    let inst = p.build().unwrap();
    let c = synth_access(
        &inst.layout().unwrap(),
        inst.unitaries(),
        &p.options().unwrap(),
    )
    .unwrap();
    let text = emit_qasm(&c);
    assert_eq!(emit_qasm(&c), text);
    let gate_lines = text
        .lines()
        .filter(|l| !l.starts_with("//") && !l.starts_with("qreg") && !l.starts_with("opaque"))
        .skip(2)
        .count();
    assert_eq!(gate_lines as u64, c.gate_counts().total());
    assert_eq!(text.matches("// moment ").count(), c.moments().len());
    assert_eq!(text.matches("qreg ").count(), c.layout().registers().len());
}

#[test]
fn state_documents_round_trip() {
    let inst = InstanceParams {
        n: 1,
        m: 1,
        k: None,
        family: FamilyKind::Rotation,
        seed: 0,
        variant: Variant::Sequential,
        block_size: None,
    }
    .build()
    .unwrap();
    let c = synth_access(
        &inst.layout().unwrap(),
        inst.unitaries(),
        &SynthesisOptions::sequential(),
    )
    .unwrap();
    let mut s = basis_state(c.layout(), &BasisAssignment::new(1, 0).with_mem(vec![0, 1])).unwrap();
    s.run(&c, inst.unitaries()).unwrap();
    let doc = StateDocument::new(&s, Some(c.layout()));
    let text = doc.to_json();
    let back = StateDocument::from_json(&text).unwrap();
    assert_eq!(back.to_state().unwrap(), s);
    assert_eq!(back.qubits[0], "address[0]");
}

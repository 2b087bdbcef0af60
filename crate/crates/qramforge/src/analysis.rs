//! Resource tables for `analyze`.

use std::fmt::Write;

use qramforge_core::synthesis::synth_access_declared;
use qramforge_core::tree_layout::{allocate_registers, ancilla_counts};
use qramforge_core::SynthesisOptions;
use serde::Serialize;

use crate::error::{Error, Result};

/// One measured configuration. `asymptote` is `(2m + 3) 2^n`, `ratio` is
/// the tree ancilla total over it, and `width_claim` is `2mn`, reported for
/// comparison with the measured width.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct AnalysisRow {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub variant: String,
    pub s: Option<usize>,
    pub u_depth: u32,
    pub qubits: usize,
    pub depth: u64,
    pub width: usize,
    pub x: u64,
    pub cx: u64,
    pub ccx: u64,
    pub cswap: u64,
    pub cu: u64,
    pub life: u64,
    pub adr: u64,
    pub res: u64,
    pub copies: u64,
    pub total_ancillas: u64,
    pub mem: u64,
    pub asymptote: u64,
    pub ratio: f64,
    pub width_claim: u64,
}

/// Synthesizes the access circuit with declared leaf depths and measures it.
pub fn analyze(
    n: usize,
    m: usize,
    k: usize,
    options: &SynthesisOptions,
    u_depth: u32,
) -> Result<AnalysisRow> {
    let widths = vec![k; 1 << n];
    let layout = allocate_registers(n, m, &widths)?;
    let circuit = synth_access_declared(&layout, &vec![u_depth; 1 << n], options)?;
    let measured = circuit.layout().measured_counts();
    let closed = ancilla_counts(n, m, &widths)?;
    if (measured.life, measured.adr, measured.res, measured.mem)
        != (closed.life, closed.adr, closed.res, closed.mem)
    {
        return Err(Error::Usage(format!(
            "allocation {measured:?} disagrees with closed form {closed:?}"
        )));
    }
    let counts = circuit.gate_counts();
    let asymptote = (2 * m as u64 + 3) << n;
    Ok(AnalysisRow {
        n,
        m,
        k,
        variant: options.variant.name().to_string(),
        s: circuit.layout().fanout_block_size(),
        u_depth,
        qubits: circuit.layout().num_qubits(),
        depth: circuit.depth(),
        width: circuit.width(),
        x: counts.x,
        cx: counts.cnot,
        ccx: counts.toffoli,
        cswap: counts.fredkin,
        cu: counts.opaque,
        life: measured.life,
        adr: measured.adr,
        res: measured.res,
        copies: measured.copies,
        total_ancillas: measured.total,
        mem: measured.mem,
        asymptote,
        ratio: (measured.total - measured.copies) as f64 / asymptote as f64,
        width_claim: 2 * (m * n) as u64,
    })
}

pub fn render_table(rows: &[AnalysisRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3} {:>3} {:>3} {:<10} {:>4} {:>9} {:>7} {:>7} {:>9} {:>9} {:>9} {:>8} {:>10} {:>10} {:>7} {:>7}",
        "n", "m", "k", "variant", "s", "qubits", "depth", "width", "life", "adr", "res", "copies", "ancillas",
        "(2m+3)N", "ratio", "2mn"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>3} {:>3} {:>3} {:<10} {:>4} {:>9} {:>7} {:>7} {:>9} {:>9} {:>9} {:>8} {:>10} {:>10} {:>7.4} {:>7}",
            r.n,
            r.m,
            r.k,
            r.variant,
            r.s.map_or_else(|| "-".to_string(), |s| s.to_string()),
            r.qubits,
            r.depth,
            r.width,
            r.life,
            r.adr,
            r.res,
            r.copies,
            r.total_ancillas,
            r.asymptote,
            r.ratio,
            r.width_claim
        );
    }
    out
}

pub fn render_csv(rows: &[AnalysisRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_closed_form() {
        let row = analyze(3, 2, 1, &SynthesisOptions::sequential(), 1).unwrap();
        assert_eq!((row.life, row.adr, row.res, row.copies), (15, 4, 28, 0));
        assert_eq!(row.total_ancillas, 47);
        assert_eq!(row.asymptote, 56);
        assert_eq!(row.qubits, 3 + 2 + 47 + 8);
        assert_eq!(row.cu, 8);
        let fan = analyze(3, 4, 0, &SynthesisOptions::fanout(), 1).unwrap();
        assert_eq!(fan.s, Some(2));
        assert_eq!(fan.copies, 14);
        assert_eq!(fan.total_ancillas, 15 + 4 + 56 + 14);
    }

    #[test]
    fn csv_has_header_and_row() {
        let row = analyze(2, 1, 0, &SynthesisOptions::sequential(), 1).unwrap();
        let text = render_csv(&[row]).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("n,m,k,variant,s,"));
        assert!(lines.next().unwrap().starts_with("2,1,0,sequential,,"));
        assert!(render_table(&[]).contains("(2m+3)N"));
    }
}

//! Verification reports as JSON and as a plain-text table.

use std::fmt::Write;

use qramforge_core::verifier::{CaseOutcome, VerificationReport};
use serde::{Deserialize, Serialize};

pub const REPORT_VERSION: &str = "qramforge-report/1";

/// Failing cases listed in full by [`render_table`].
const TABLE_FAILURE_LIMIT: usize = 20;

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ReportDocument {
    pub version: String,
    pub family: String,
    pub n: usize,
    pub m: usize,
    pub k: Vec<usize>,
    pub variant: String,
    pub s: Option<usize>,
    pub qubits: usize,
    pub depth: u64,
    pub width: usize,
    pub fidelity_tolerance: f64,
    pub residual_tolerance: f64,
    pub elapsed_seconds: Option<f64>,
    pub passed: bool,
    pub num_cases: usize,
    pub num_passed: usize,
    pub min_fidelity: Option<f64>,
    pub max_residual: f64,
    pub cases: Vec<CaseRecord>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct CaseRecord {
    pub label: String,
    pub fidelity: f64,
    pub ancilla_residual: f64,
    pub address_preserved: bool,
    pub unselected_memory_preserved: bool,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl From<&CaseOutcome> for CaseRecord {
    fn from(c: &CaseOutcome) -> Self {
        Self {
            label: c.label.clone(),
            fidelity: c.fidelity,
            ancilla_residual: c.ancilla_residual,
            address_preserved: c.address_preserved,
            unselected_memory_preserved: c.unselected_memory_preserved,
            passed: c.passed,
            failure: c.failure.clone(),
        }
    }
}

impl ReportDocument {
    pub fn new(report: &VerificationReport) -> Self {
        let s = &report.summary;
        Self {
            version: REPORT_VERSION.to_string(),
            family: s.family.clone(),
            n: s.address_width,
            m: s.result_width,
            k: s.mem_widths.clone(),
            variant: s.variant.clone(),
            s: s.block_size,
            qubits: s.num_qubits,
            depth: s.depth,
            width: s.width,
            fidelity_tolerance: report.tolerances.fidelity,
            residual_tolerance: report.tolerances.residual,
            elapsed_seconds: report.elapsed_seconds,
            passed: report.passed(),
            num_cases: report.cases.len(),
            num_passed: report.num_passed(),
            min_fidelity: (!report.cases.is_empty()).then(|| report.min_fidelity()),
            max_residual: report.max_residual(),
            cases: report.cases.iter().map(CaseRecord::from).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}

pub fn render_table(report: &VerificationReport) -> String {
    let s = &report.summary;
    let mut out = String::new();
    let row = |out: &mut String, key: &str, value: String| {
        let _ = writeln!(out, "{key:<18} {value}");
    };
    row(&mut out, "family", s.family.clone());
    row(
        &mut out,
        "n / m",
        format!("{} / {}", s.address_width, s.result_width),
    );
    row(&mut out, "k", format!("{:?}", s.mem_widths));
    row(
        &mut out,
        "variant",
        match s.block_size {
            Some(b) => format!("{} (s = {b})", s.variant),
            None => s.variant.clone(),
        },
    );
    row(&mut out, "qubits", s.num_qubits.to_string());
    row(
        &mut out,
        "depth / width",
        format!("{} / {}", s.depth, s.width),
    );
    row(
        &mut out,
        "cases passed",
        format!("{} / {}", report.num_passed(), report.cases.len()),
    );
    if !report.cases.is_empty() {
        row(
            &mut out,
            "min fidelity",
            format!("{:.15}", report.min_fidelity()),
        );
    }
    row(
        &mut out,
        "max residual",
        format!("{:.3e}", report.max_residual()),
    );
    row(
        &mut out,
        "tolerances",
        format!(
            "1 - F ≤ {:e}, residual ≤ {:e}",
            report.tolerances.fidelity, report.tolerances.residual
        ),
    );
    if let Some(t) = report.elapsed_seconds {
        row(&mut out, "elapsed", format!("{t:.3} s"));
    }
    let failures: Vec<&CaseOutcome> = report.failures().collect();
    if !failures.is_empty() {
        let _ = writeln!(
            out,
            "\n{:<48} {:>18} {:>10}  failure",
            "case", "fidelity", "residual"
        );
        for f in failures.iter().take(TABLE_FAILURE_LIMIT) {
            let _ = writeln!(
                out,
                "{:<48} {:>18.15} {:>10.3e}  {}",
                f.label,
                f.fidelity,
                f.ancilla_residual,
                f.failure.as_deref().unwrap_or("")
            );
        }
        if failures.len() > TABLE_FAILURE_LIMIT {
            let _ = writeln!(
                out,
                "... {} more failing cases",
                failures.len() - TABLE_FAILURE_LIMIT
            );
        }
    }
    let _ = writeln!(out, "{}", if report.passed() { "PASS" } else { "FAIL" });
    out
}

#[cfg(test)]
mod tests {
    use qramforge_core::verifier::{build_qram_instance, check_proposition, CaseSet};
    use qramforge_core::SynthesisOptions;

    use super::*;

    #[test]
    fn table_and_json() {
        let inst = build_qram_instance(1, 1).unwrap();
        let mut report =
            check_proposition(&inst, &SynthesisOptions::sequential(), &CaseSet::Exhaustive)
                .unwrap();
        report.elapsed_seconds = Some(0.25);
        let table = render_table(&report);
        assert!(table.contains("cases passed       16 / 16"), "{table}");
        assert!(table.trim_end().ends_with("PASS"));
        let doc = ReportDocument::new(&report);
        assert!(doc.passed && doc.num_cases == 16);
        let back: ReportDocument = serde_json::from_str(&doc.to_json()).unwrap();
        assert_eq!(back, doc);

        report.cases[0].passed = false;
        report.cases[0].failure = Some("fidelity too low".into());
        let table = render_table(&report);
        assert!(table.contains("fidelity too low"));
        assert!(table.trim_end().ends_with("FAIL"));
    }
}

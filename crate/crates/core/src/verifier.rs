//! Direct oracle for `Σ_y |y⟩⟨y| ⊗ U^y`, instance families, and equivalence
//! checks of synthesized circuits against it.
//!
//! Comparisons happen on the data registers only (address, result, memory),
//! packed as: address bit `j` at position `j`, result bit `i` at `n + i`,
//! then each leaf's memory in leaf order. Circuit outputs are projected onto
//! that space after checking every ancilla is back in `|0⟩`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::{Float, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bits::BasisKey;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::simulator::{basis_key, BasisAssignment, SparseState, UnitarySpec, UnitaryTable};
use crate::synthesis::{synth_access, SynthesisOptions, Variant};
use crate::tree_layout::{allocate_registers, level_nodes, NodeLabel, Qubit, RegisterMap};
use crate::Complex64;

/// Minimum accepted `1 - fidelity` gap.
pub const FIDELITY_TOLERANCE: f64 = 1e-10;

/// Maximum accepted probability weight on non-zero ancilla strings.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Largest case count [`CaseSet::Exhaustive`] will enumerate.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 16;

#[derive(Clone, PartialEq, Debug)]
pub enum Family {
    /// `U^z = CNOT^{⊗m}` from `mem_z` into the result, `k_z = m`.
    Qram,
    /// `U^z = ⊗_i X^{f(z)_i}` on the result, `k_z = 0`.
    TableLookup {
        table: Vec<u64>,
    },
    /// `e^{-iπμX}` on a single result qubit, `μ` the fixed-point value of `mem_z`.
    Rotation,
    /// Haar-like unitaries from a seeded generator.
    Random {
        seed: u64,
    },
    Custom,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Qram => "qram",
            Family::TableLookup { .. } => "lookup",
            Family::Rotation => "rotation",
            Family::Random { .. } => "random",
            Family::Custom => "custom",
        }
    }
}

/// A full access problem: sizes plus one unitary per leaf.
#[derive(Clone, PartialEq, Debug)]
pub struct InstanceSpec {
    n: usize,
    result_width: usize,
    mem_widths: Vec<usize>,
    family: Family,
    unitaries: UnitaryTable,
}

impl InstanceSpec {
    /// Wraps a caller-supplied table; widths are taken from the table.
    pub fn custom(n: usize, result_width: usize, unitaries: UnitaryTable) -> Result<Self> {
        let mem_widths: Vec<usize> = level_nodes(n)
            .into_iter()
            .map(|z| {
                unitaries.get(z).map(UnitarySpec::mem_width).ok_or_else(|| {
                    Error::Configuration(format!("no unitary supplied for leaf {z}"))
                })
            })
            .collect::<Result<_>>()?;
        Self::assemble(n, result_width, mem_widths, Family::Custom, unitaries)
    }

    fn assemble(
        n: usize,
        result_width: usize,
        mem_widths: Vec<usize>,
        family: Family,
        unitaries: UnitaryTable,
    ) -> Result<Self> {
        let spec = Self {
            n,
            result_width,
            mem_widths,
            family,
            unitaries,
        };
        spec.unitaries.check_layout(&spec.layout()?)?;
        Ok(spec)
    }

    pub fn layout(&self) -> Result<RegisterMap> {
        allocate_registers(self.n, self.result_width, &self.mem_widths)
    }

    pub fn address_width(&self) -> usize {
        self.n
    }

    pub fn result_width(&self) -> usize {
        self.result_width
    }

    pub fn mem_widths(&self) -> &[usize] {
        &self.mem_widths
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn unitaries(&self) -> &UnitaryTable {
        &self.unitaries
    }

    /// Number of data qubits: `n + m + Σ k_z`.
    pub fn data_width(&self) -> usize {
        self.n + self.result_width + self.mem_widths.iter().sum::<usize>()
    }

    fn mem_offset(&self, leaf: usize) -> usize {
        self.n + self.result_width + self.mem_widths[..leaf].iter().sum::<usize>()
    }

    /// Packs a basis assignment into a data-space key.
    pub fn data_key(&self, a: &BasisAssignment) -> Result<BasisKey> {
        a.validate(self.n, self.result_width, &self.mem_widths)?;
        let mut key = BasisKey::zeros(self.data_width());
        key.write(0..self.n, a.address);
        key.write(self.n..self.n + self.result_width, a.result);
        for (z, &k) in self.mem_widths.iter().enumerate() {
            let off = self.mem_offset(z);
            key.write(off..off + k, a.mem_value(z));
        }
        Ok(key)
    }

    fn unpack(&self, key: &BasisKey) -> BasisAssignment {
        let mem = self
            .mem_widths
            .iter()
            .enumerate()
            .map(|(z, &k)| {
                let off = self.mem_offset(z);
                key.read(off..off + k)
            })
            .collect();
        BasisAssignment {
            address: key.read(0..self.n),
            result: key.read(self.n..self.n + self.result_width),
            mem,
        }
    }
}

fn leaf(n: usize, z: u64) -> NodeLabel {
    NodeLabel::new(n, z).expect("leaf index within range")
}

pub fn build_qram_instance(n: usize, m: usize) -> Result<InstanceSpec> {
    let mask = (1usize << m) - 1;
    let unitaries = (0..1u64 << n)
        .map(|z| {
            // (r, μ) ↦ (r ⊕ μ, μ)
            UnitarySpec::from_permutation(leaf(n, z), m, m, |c| {
                let (r, mu) = (c >> m, c & mask);
                ((r ^ mu) << m) | mu
            })
        })
        .collect::<Result<UnitaryTable>>()?;
    InstanceSpec::assemble(n, m, vec![m; 1 << n], Family::Qram, unitaries)
}

/// `table[z] = f(z)`, each an `m`-bit value.
pub fn build_table_lookup(n: usize, m: usize, table: &[u64]) -> Result<InstanceSpec> {
    if table.len() != 1 << n {
        return Err(Error::InvalidParameter(format!(
            "lookup table needs {} entries, got {}",
            1u64 << n,
            table.len()
        )));
    }
    if let Some(v) = table.iter().find(|&&v| m < 64 && v >> m != 0) {
        return Err(Error::InvalidParameter(format!(
            "lookup value {v} does not fit in {m} bits"
        )));
    }
    let unitaries = table
        .iter()
        .enumerate()
        .map(|(z, &f)| UnitarySpec::from_permutation(leaf(n, z as u64), m, 0, |r| r ^ f as usize))
        .collect::<Result<UnitaryTable>>()?;
    InstanceSpec::assemble(
        n,
        m,
        vec![0; 1 << n],
        Family::TableLookup {
            table: table.to_vec(),
        },
        unitaries,
    )
}

/// A random `f`, for lookup instances.
pub fn random_table(n: usize, m: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..1 << n)
        .map(|_| rng.random_range(0..1u64 << m))
        .collect()
}

/// `μ = Σ_i mem[i] 2^{-i-1}`.
pub fn fixed_point_fraction(mem_value: u64, bits: usize) -> f64 {
    (0..bits)
        .filter(|i| (mem_value >> i) & 1 == 1)
        .map(|i| Float::powi(0.5f64, i as i32 + 1))
        .sum()
}

/// `e^{-iπμX} = cos(πμ) 1 - i sin(πμ) X`, row-major.
pub fn rotation_block(mu: f64) -> [Complex64; 4] {
    let (s, c) = Float::sin_cos(PI * mu);
    let diag = Complex64::new(c, 0.0);
    let off = Complex64::new(0.0, -s);
    [diag, off, off, diag]
}

/// Result width 1 (the rotated qubit), memory width `m` per leaf.
pub fn build_rotation_instance(n: usize, m: usize) -> Result<InstanceSpec> {
    let dim = 2usize << m;
    let half = 1usize << m;
    let unitaries = (0..1u64 << n)
        .map(|z| {
            let mut matrix = vec![Complex64::zero(); dim * dim];
            for mu in 0..half {
                let r = rotation_block(fixed_point_fraction(mu as u64, m));
                for b_out in 0..2 {
                    for b_in in 0..2 {
                        let row = (b_out << m) | mu;
                        let col = (b_in << m) | mu;
                        matrix[row * dim + col] = r[b_out * 2 + b_in];
                    }
                }
            }
            UnitarySpec::new(leaf(n, z), 1, m, matrix, 1)
        })
        .collect::<Result<UnitaryTable>>()?;
    InstanceSpec::assemble(n, 1, vec![m; 1 << n], Family::Rotation, unitaries)
}

/// Orthonormalized (modified Gram–Schmidt) complex Gaussian matrix, row-major.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    // Columns stored contiguously while orthonormalizing.
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for _ in 0..2 {
            for u in &cols {
                let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>();
        let norm = Float::sqrt(norm);
        if norm < 1e-6 {
            continue;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        cols.push(v);
    }
    let mut out = vec![Complex64::zero(); dim * dim];
    for (c, col) in cols.iter().enumerate() {
        for (r, a) in col.iter().enumerate() {
            out[r * dim + c] = *a;
        }
    }
    out
}

pub fn build_random_instance(
    n: usize,
    m: usize,
    mem_widths: &[usize],
    seed: u64,
) -> Result<InstanceSpec> {
    if mem_widths.len() != 1 << n {
        return Err(Error::InvalidParameter(format!(
            "expected {} memory widths, got {}",
            1u64 << n,
            mem_widths.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unitaries = mem_widths
        .iter()
        .enumerate()
        .map(|(z, &k)| {
            let matrix = random_unitary(1 << (m + k), &mut rng);
            UnitarySpec::new(leaf(n, z as u64), m, k, matrix, 1)
        })
        .collect::<Result<UnitaryTable>>()?;
    InstanceSpec::assemble(
        n,
        m,
        mem_widths.to_vec(),
        Family::Random { seed },
        unitaries,
    )
}

/// `|y⟩ U^y(|r⟩|mem_y⟩)`, identity on every other `mem_z`, in data space.
pub fn oracle_effect(instance: &InstanceSpec, case: &BasisAssignment) -> Result<SparseState> {
    let input = instance.data_key(case)?;
    let y = case.address as usize;
    let spec = instance
        .unitaries
        .get(leaf(instance.n, case.address))
        .ok_or_else(|| Error::Configuration(format!("no unitary for address {y}")))?;
    let k = instance.mem_widths[y];
    let m = instance.result_width;
    let column = spec.column(
        ((case.result as usize) << k) | case.mem_value(y) as usize,
        false,
    );
    let off = instance.mem_offset(y);
    let r_bits = instance.n..instance.n + m;
    let entries = column.into_iter().enumerate().map(|(row, amp)| {
        let mut key = input.clone();
        key.write(r_bits.clone(), (row >> k) as u64);
        key.write(off..off + k, (row & ((1 << k) - 1)) as u64);
        (key, amp)
    });
    SparseState::from_entries(instance.data_width(), entries)
}

/// One verification input.
#[derive(Clone, PartialEq, Debug)]
pub enum Case {
    Basis(BasisAssignment),
    /// `Σ a_i |case_i⟩` over distinct basis assignments, `Σ |a_i|² = 1`.
    Superposed(Vec<(Complex64, BasisAssignment)>),
}

impl Case {
    fn terms(&self) -> Vec<(Complex64, &BasisAssignment)> {
        match self {
            Case::Basis(a) => vec![(Complex64::new(1.0, 0.0), a)],
            Case::Superposed(t) => t.iter().map(|(c, a)| (*c, a)).collect(),
        }
    }

    pub fn label(&self) -> String {
        fn one(a: &BasisAssignment) -> String {
            format!("y={} r={} mem={:?}", a.address, a.result, a.mem)
        }
        match self {
            Case::Basis(a) => one(a),
            Case::Superposed(t) => {
                let parts: Vec<String> = t.iter().map(|(_, a)| one(a)).collect();
                format!("superposition[{}]", parts.join(" + "))
            }
        }
    }
}

/// Oracle output for a (possibly superposed) case, by linearity.
pub fn oracle_case(instance: &InstanceSpec, case: &Case) -> Result<SparseState> {
    let mut entries = Vec::new();
    for (c, a) in case.terms() {
        for (k, amp) in oracle_effect(instance, a)?.iter() {
            entries.push((k.clone(), c * amp));
        }
    }
    SparseState::from_entries(instance.data_width(), entries)
}

/// Which inputs to check.
#[derive(Clone, PartialEq, Debug)]
pub enum CaseSet {
    /// Every (address, result, memory) basis assignment.
    Exhaustive,
    /// Every address with `assignments` seeded random (result, memory)
    /// values each, or all of them when there are fewer.
    PerAddress {
        assignments: usize,
        seed: u64,
    },
    /// `count` random two-term superpositions of distinct basis inputs.
    Linearity {
        count: usize,
        seed: u64,
    },
    /// `count` uniform address superpositions `2^{-n/2} Σ_y |y⟩|r, mem⟩`.
    UniformAddress {
        count: usize,
        seed: u64,
    },
    Explicit(Vec<Case>),
}

fn random_assignment(
    instance: &InstanceSpec,
    address: u64,
    rng: &mut ChaCha8Rng,
) -> BasisAssignment {
    BasisAssignment {
        address,
        result: rng.random_range(0..1u64 << instance.result_width),
        mem: instance
            .mem_widths
            .iter()
            .map(|&k| rng.random_range(0..1u64 << k))
            .collect(),
    }
}

fn random_phase_pair(rng: &mut ChaCha8Rng) -> (Complex64, Complex64) {
    let theta: f64 = rng.random_range(0.0..PI / 2.0);
    let (p, q): (f64, f64) = (
        rng.random_range(0.0..2.0 * PI),
        rng.random_range(0.0..2.0 * PI),
    );
    (
        Complex64::from_polar(Float::cos(theta), p),
        Complex64::from_polar(Float::sin(theta), q),
    )
}

impl CaseSet {
    pub fn cases(&self, instance: &InstanceSpec) -> Result<Vec<Case>> {
        let n = instance.n;
        let data_bits = instance.data_width() - n;
        match self {
            CaseSet::Exhaustive => {
                let total = 1u64
                    .checked_shl(instance.data_width() as u32)
                    .unwrap_or(u64::MAX);
                if total > EXHAUSTIVE_LIMIT {
                    return Err(Error::InvalidParameter(format!(
                        "exhaustive check would need {total} cases (limit {EXHAUSTIVE_LIMIT})"
                    )));
                }
                (0..total)
                    .map(|v| {
                        let mut key = BasisKey::zeros(instance.data_width());
                        key.write(0..instance.data_width(), v);
                        Ok(Case::Basis(instance.unpack(&key)))
                    })
                    .collect()
            }
            CaseSet::PerAddress { assignments, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let per = 1u64.checked_shl(data_bits as u32).unwrap_or(u64::MAX);
                let mut out = Vec::new();
                for y in 0..1u64 << n {
                    if per <= *assignments as u64 {
                        for v in 0..per {
                            let mut key = BasisKey::zeros(instance.data_width());
                            key.write(0..n, y);
                            key.write(n..instance.data_width(), v);
                            out.push(Case::Basis(instance.unpack(&key)));
                        }
                    } else {
                        let mut seen = Vec::new();
                        while seen.len() < *assignments {
                            let a = random_assignment(instance, y, &mut rng);
                            if !seen.contains(&a) {
                                seen.push(a);
                            }
                        }
                        out.extend(seen.into_iter().map(Case::Basis));
                    }
                }
                Ok(out)
            }
            CaseSet::Linearity { count, seed } => {
                if instance.data_width() == 0 {
                    return Ok(Vec::new());
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut out = Vec::with_capacity(*count);
                while out.len() < *count {
                    let a = random_assignment(instance, rng.random_range(0..1u64 << n), &mut rng);
                    let b = random_assignment(instance, rng.random_range(0..1u64 << n), &mut rng);
                    if a == b {
                        continue;
                    }
                    let (ca, cb) = random_phase_pair(&mut rng);
                    out.push(Case::Superposed(vec![(ca, a), (cb, b)]));
                }
                Ok(out)
            }
            CaseSet::UniformAddress { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let amp = Complex64::new(Float::powf(0.5f64, n as f64 / 2.0), 0.0);
                Ok((0..*count)
                    .map(|_| {
                        let base = random_assignment(instance, 0, &mut rng);
                        let mut addresses: Vec<u64> = (0..1u64 << n).collect();
                        addresses.shuffle(&mut rng);
                        Case::Superposed(
                            addresses
                                .into_iter()
                                .map(|y| {
                                    (
                                        amp,
                                        BasisAssignment {
                                            address: y,
                                            ..base.clone()
                                        },
                                    )
                                })
                                .collect(),
                        )
                    })
                    .collect())
            }
            CaseSet::Explicit(cases) => Ok(cases.clone()),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Tolerances {
    pub fidelity: f64,
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fidelity: FIDELITY_TOLERANCE,
            residual: RESIDUAL_TOLERANCE,
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct CaseOutcome {
    pub label: String,
    pub fidelity: f64,
    pub ancilla_residual: f64,
    pub address_preserved: bool,
    pub unselected_memory_preserved: bool,
    pub passed: bool,
    pub failure: Option<String>,
}

#[derive(Clone, PartialEq, Debug)]
pub struct InstanceSummary {
    pub family: String,
    pub address_width: usize,
    pub result_width: usize,
    pub mem_widths: Vec<usize>,
    pub variant: String,
    pub block_size: Option<usize>,
    pub num_qubits: usize,
    pub depth: u64,
    pub width: usize,
}

#[derive(Clone, PartialEq, Debug)]
pub struct VerificationReport {
    pub summary: InstanceSummary,
    pub tolerances: Tolerances,
    pub cases: Vec<CaseOutcome>,
    /// Wall-clock time; filled in by callers that have a clock.
    pub elapsed_seconds: Option<f64>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn num_passed(&self) -> usize {
        self.cases.iter().filter(|c| c.passed).count()
    }

    pub fn min_fidelity(&self) -> f64 {
        self.cases
            .iter()
            .map(|c| c.fidelity)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_residual(&self) -> f64 {
        self.cases
            .iter()
            .map(|c| c.ancilla_residual)
            .fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseOutcome> + '_ {
        self.cases.iter().filter(|c| !c.passed)
    }
}

/// Data-register qubits of `layout`, in data-space order.
pub fn data_qubits(layout: &RegisterMap) -> Vec<Qubit> {
    let (n, m) = (layout.address_width(), layout.result_width());
    let mut out: Vec<Qubit> = (0..n).map(|j| layout.address(j)).collect();
    out.extend((0..m).map(|i| layout.result(i)));
    for z in layout.leaves() {
        out.extend((0..layout.mem_width(z)).map(|j| layout.mem(z, j)));
    }
    out
}

/// Splits `state` into its all-ancillas-zero part, expressed in data space,
/// and the probability weight on everything else.
pub fn project_to_data(state: &SparseState, layout: &RegisterMap) -> Result<(SparseState, f64)> {
    let mut mask = BasisKey::zeros(layout.num_qubits());
    for (i, id) in layout.ids().iter().enumerate() {
        if id.kind.is_ancilla() {
            mask.set(i, true);
        }
    }
    let data = data_qubits(layout);
    let mut residual = 0.0;
    let mut entries = Vec::with_capacity(state.len());
    for (key, amp) in state.iter() {
        if key.intersects(&mask) {
            residual += amp.norm_sqr();
            continue;
        }
        let mut reduced = BasisKey::zeros(data.len());
        for (p, q) in data.iter().enumerate() {
            if key.get(q.index()) {
                reduced.set(p, true);
            }
        }
        entries.push((reduced, *amp));
    }
    Ok((SparseState::from_entries(data.len(), entries)?, residual))
}

/// The circuit input for `case`: data registers set, ancillas zero.
pub fn prepare_input(layout: &RegisterMap, case: &Case) -> Result<SparseState> {
    let mut entries = Vec::new();
    for (c, a) in case.terms() {
        entries.push((basis_key(layout, a)?, c));
    }
    let state = SparseState::from_entries(layout.num_qubits(), entries)?;
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > crate::simulator::NORM_TOLERANCE {
        return Err(Error::NotNormalized(norm));
    }
    Ok(state)
}

fn simulate(
    circuit: &Circuit,
    unitaries: &UnitaryTable,
    case: &Case,
) -> Result<(SparseState, f64)> {
    let mut state = prepare_input(circuit.layout(), case)?;
    state.run(circuit, unitaries)?;
    project_to_data(&state, circuit.layout())
}

/// Every output string keeps an input address, and its unselected memories
/// match an input term with that address.
fn structural_checks(instance: &InstanceSpec, case: &Case, output: &SparseState) -> (bool, bool) {
    let terms = case.terms();
    let mut address_ok = true;
    let mut memory_ok = true;
    for (key, _) in output.iter() {
        let got = instance.unpack(key);
        let same_address: Vec<&BasisAssignment> = terms
            .iter()
            .map(|(_, a)| *a)
            .filter(|a| a.address == got.address)
            .collect();
        if same_address.is_empty() {
            address_ok = false;
            continue;
        }
        let y = got.address as usize;
        let unselected_match = same_address.iter().any(|a| {
            (0..instance.mem_widths.len()).all(|z| z == y || a.mem_value(z) == got.mem_value(z))
        });
        memory_ok &= unselected_match;
    }
    (address_ok, memory_ok)
}

fn summary(instance: &InstanceSpec, circuit: &Circuit, variant: &str) -> InstanceSummary {
    InstanceSummary {
        family: instance.family.name().to_string(),
        address_width: instance.n,
        result_width: instance.result_width,
        mem_widths: instance.mem_widths.clone(),
        variant: variant.to_string(),
        block_size: circuit.layout().fanout_block_size(),
        num_qubits: circuit.layout().num_qubits(),
        depth: circuit.depth(),
        width: circuit.width(),
    }
}

fn judge(
    label: String,
    fidelity: f64,
    residual: f64,
    structure: (bool, bool),
    tol: &Tolerances,
) -> CaseOutcome {
    let mut problems = Vec::new();
    if fidelity.is_nan() || fidelity < 1.0 - tol.fidelity {
        problems.push(format!(
            "fidelity {fidelity:.15} below 1 - {:e}",
            tol.fidelity
        ));
    }
    if residual.is_nan() || residual > tol.residual {
        problems.push(format!(
            "ancilla residual {residual:e} above {:e}",
            tol.residual
        ));
    }
    if !structure.0 {
        problems.push("address register changed".to_string());
    }
    if !structure.1 {
        problems.push("unselected memory changed".to_string());
    }
    CaseOutcome {
        label,
        fidelity,
        ancilla_residual: residual,
        address_preserved: structure.0,
        unselected_memory_preserved: structure.1,
        passed: problems.is_empty(),
        failure: (!problems.is_empty()).then(|| problems.join("; ")),
    }
}

fn errored(label: String, err: Error) -> CaseOutcome {
    CaseOutcome {
        label,
        fidelity: 0.0,
        ancilla_residual: 1.0,
        address_preserved: false,
        unselected_memory_preserved: false,
        passed: false,
        failure: Some(format!("{err}")),
    }
}

/// Simulates the access circuit on each case and compares with the oracle.
pub fn check_proposition(
    instance: &InstanceSpec,
    options: &SynthesisOptions,
    cases: &CaseSet,
) -> Result<VerificationReport> {
    check_proposition_with(instance, options, cases, Tolerances::default())
}

pub fn check_proposition_with(
    instance: &InstanceSpec,
    options: &SynthesisOptions,
    cases: &CaseSet,
    tolerances: Tolerances,
) -> Result<VerificationReport> {
    let circuit = synth_access(&instance.layout()?, &instance.unitaries, options)?;
    check_circuit(
        instance,
        &circuit,
        options.variant.name(),
        cases,
        tolerances,
    )
}

/// [`check_proposition`] on an already synthesized access circuit.
pub fn check_circuit(
    instance: &InstanceSpec,
    circuit: &Circuit,
    variant: &str,
    cases: &CaseSet,
    tolerances: Tolerances,
) -> Result<VerificationReport> {
    let outcomes = cases
        .cases(instance)?
        .into_iter()
        .map(|case| {
            let label = case.label();
            let run = || -> Result<CaseOutcome> {
                let (actual, residual) = simulate(circuit, &instance.unitaries, &case)?;
                let expected = oracle_case(instance, &case)?;
                let fidelity = expected.fidelity(&actual);
                let structure = structural_checks(instance, &case, &actual);
                Ok(judge(
                    label.clone(),
                    fidelity,
                    residual,
                    structure,
                    &tolerances,
                ))
            };
            run().unwrap_or_else(|e| errored(label.clone(), e))
        })
        .collect();
    Ok(VerificationReport {
        summary: summary(instance, circuit, variant),
        tolerances,
        cases: outcomes,
        elapsed_seconds: None,
    })
}

/// Runs the sequential and fan-out circuits on each case and compares their
/// data-register outputs with each other.
pub fn check_variant_agreement(
    instance: &InstanceSpec,
    block_size: Option<usize>,
    cases: &CaseSet,
) -> Result<VerificationReport> {
    let layout = instance.layout()?;
    let sequential = synth_access(
        &layout,
        &instance.unitaries,
        &SynthesisOptions::sequential(),
    )?;
    let mut fan_opts = SynthesisOptions::fanout();
    fan_opts.block_size = block_size;
    let fanout = synth_access(&layout, &instance.unitaries, &fan_opts)?;
    let tolerances = Tolerances::default();
    let outcomes = cases
        .cases(instance)?
        .into_iter()
        .map(|case| {
            let label = case.label();
            let run = || -> Result<CaseOutcome> {
                let (a, ra) = simulate(&sequential, &instance.unitaries, &case)?;
                let (b, rb) = simulate(&fanout, &instance.unitaries, &case)?;
                let fidelity = a.fidelity(&b);
                let sa = structural_checks(instance, &case, &a);
                let sb = structural_checks(instance, &case, &b);
                Ok(judge(
                    label.clone(),
                    fidelity,
                    ra.max(rb),
                    (sa.0 && sb.0, sa.1 && sb.1),
                    &tolerances,
                ))
            };
            run().unwrap_or_else(|e| errored(label.clone(), e))
        })
        .collect();
    let mut s = summary(instance, &fanout, "sequential-vs-fanout");
    s.variant = format!(
        "{}-vs-{}",
        Variant::Sequential.name(),
        Variant::Fanout.name()
    );
    Ok(VerificationReport {
        summary: s,
        tolerances,
        cases: outcomes,
        elapsed_seconds: None,
    })
}

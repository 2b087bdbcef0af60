//! Exact sparse simulation.
//!
//! Every tree gate is a permutation of basis strings, so a basis input stays
//! a single basis string until a controlled `U^z` fires. States are kept as
//! a map from [`BasisKey`] to amplitude; the support stays bounded by
//! `2^(m + k_z)` per basis input even though the register count grows like
//! `(2m + 3) 2^n`.

use alloc::collections::btree_map::{self, BTreeMap};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::mem;

use num_traits::Zero;

use crate::bits::BasisKey;
use crate::circuit::{Circuit, Gate, OpaqueCall};
use crate::error::{Error, Result};
use crate::tree_layout::{NodeLabel, RegisterMap};
use crate::Complex64;

/// Amplitudes with magnitude at or below this are dropped.
pub const PRUNE_TOLERANCE: f64 = 1e-14;

/// Tolerance for the unitarity check on [`UnitarySpec`] construction.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// Tolerance on state norms.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// The dense unitary `U^z` attached to leaf `z`, acting on `res_z ⊗ mem_z`.
///
/// Matrix index convention: basis index `(r << k) | μ` where `r` is the
/// result value and `μ` the memory value, both read little-endian from
/// their registers. Stored row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct UnitarySpec {
    leaf: NodeLabel,
    result_width: usize,
    mem_width: usize,
    matrix: Vec<Complex64>,
    depth: u32,
}

impl UnitarySpec {
    pub fn new(
        leaf: NodeLabel,
        result_width: usize,
        mem_width: usize,
        matrix: Vec<Complex64>,
        depth: u32,
    ) -> Result<Self> {
        let width = result_width + mem_width;
        if width > 20 {
            return Err(Error::InvalidParameter(format!(
                "dense unitary on {width} qubits is too large"
            )));
        }
        let dim = 1usize << width;
        if matrix.len() != dim * dim {
            return Err(Error::Shape {
                leaf,
                expected: dim * dim,
                found: matrix.len(),
            });
        }
        if depth == 0 {
            return Err(Error::InvalidParameter("declared depth must be ≥ 1".into()));
        }
        let spec = Self {
            leaf,
            result_width,
            mem_width,
            matrix,
            depth,
        };
        let deviation = spec.unitarity_deviation();
        if deviation.is_nan() || deviation > UNITARITY_TOLERANCE {
            return Err(Error::NotUnitary { leaf, deviation });
        }
        Ok(spec)
    }

    pub fn identity(leaf: NodeLabel, result_width: usize, mem_width: usize) -> Result<Self> {
        Self::from_permutation(leaf, result_width, mem_width, |c| c)
    }

    /// `U|c⟩ = |perm(c)⟩`. Fails with [`Error::NotUnitary`] if `perm` is not a bijection.
    pub fn from_permutation(
        leaf: NodeLabel,
        result_width: usize,
        mem_width: usize,
        perm: impl Fn(usize) -> usize,
    ) -> Result<Self> {
        let dim = 1usize << (result_width + mem_width);
        let mut matrix = vec![Complex64::zero(); dim * dim];
        for c in 0..dim {
            let r = perm(c);
            if r >= dim {
                return Err(Error::OutOfRange(format!(
                    "permutation maps {c} to {r} ≥ {dim}"
                )));
            }
            matrix[r * dim + c] = Complex64::new(1.0, 0.0);
        }
        Self::new(leaf, result_width, mem_width, matrix, 1)
    }

    pub fn with_depth(mut self, depth: u32) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidParameter("declared depth must be ≥ 1".into()));
        }
        self.depth = depth;
        Ok(self)
    }

    pub fn leaf(&self) -> NodeLabel {
        self.leaf
    }

    pub fn result_width(&self) -> usize {
        self.result_width
    }

    pub fn mem_width(&self) -> usize {
        self.mem_width
    }

    pub fn dim(&self) -> usize {
        1 << (self.result_width + self.mem_width)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim() + col]
    }

    /// `max |(U†U - 1)_{ij}|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Complex64::zero();
                for r in 0..dim {
                    acc += self.get(r, i).conj() * self.get(r, j);
                }
                if i == j {
                    acc -= Complex64::new(1.0, 0.0);
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// `U|col⟩` (or `U†|col⟩`) as a dense vector.
    pub fn column(&self, col: usize, dagger: bool) -> Vec<Complex64> {
        let dim = self.dim();
        (0..dim)
            .map(|r| {
                if dagger {
                    self.get(col, r).conj()
                } else {
                    self.get(r, col)
                }
            })
            .collect()
    }
}

/// One [`UnitarySpec`] per leaf.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct UnitaryTable {
    specs: BTreeMap<NodeLabel, UnitarySpec>,
}

impl UnitaryTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, spec: UnitarySpec) -> Option<UnitarySpec> {
        self.specs.insert(spec.leaf, spec)
    }

    pub fn get(&self, leaf: NodeLabel) -> Option<&UnitarySpec> {
        self.specs.get(&leaf)
    }

    pub fn iter(&self) -> impl Iterator<Item = &UnitarySpec> + '_ {
        self.specs.values()
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    /// Checks there is exactly one spec per leaf of `layout`, with matching widths.
    pub fn check_layout(&self, layout: &RegisterMap) -> Result<()> {
        let m = layout.result_width();
        for z in layout.leaves() {
            let expected = 1usize << (m + layout.mem_width(z));
            let spec = self
                .get(z)
                .ok_or_else(|| Error::Configuration(format!("no unitary supplied for leaf {z}")))?;
            if spec.result_width != m || spec.mem_width != layout.mem_width(z) {
                return Err(Error::Shape {
                    leaf: z,
                    expected,
                    found: spec.dim(),
                });
            }
        }
        if self.specs.len() != layout.num_leaves() {
            let stray = self
                .specs
                .keys()
                .find(|z| z.len() != layout.address_width())
                .copied()
                .unwrap_or(NodeLabel::ROOT);
            return Err(Error::Configuration(format!(
                "unitary table has an entry for non-leaf {stray}"
            )));
        }
        Ok(())
    }

    /// Largest declared depth, 0 for an empty table.
    pub fn max_depth(&self) -> u32 {
        self.specs.values().map(|s| s.depth).max().unwrap_or(0)
    }
}

impl FromIterator<UnitarySpec> for UnitaryTable {
    fn from_iter<I: IntoIterator<Item = UnitarySpec>>(iter: I) -> Self {
        let mut t = Self::new();
        for s in iter {
            t.insert(s);
        }
        t
    }
}

/// Classical values of the data registers for a basis input.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct BasisAssignment {
    pub address: u64,
    pub result: u64,
    /// One value per leaf; empty means all zero.
    pub mem: Vec<u64>,
}

impl BasisAssignment {
    pub fn new(address: u64, result: u64) -> Self {
        Self {
            address,
            result,
            mem: Vec::new(),
        }
    }

    pub fn with_mem(mut self, mem: Vec<u64>) -> Self {
        self.mem = mem;
        self
    }

    pub fn mem_value(&self, leaf: usize) -> u64 {
        self.mem.get(leaf).copied().unwrap_or(0)
    }

    /// Checks every value fits its register.
    pub fn validate(&self, n: usize, m: usize, mem_widths: &[usize]) -> Result<()> {
        if self.address >> n != 0 {
            return Err(Error::OutOfRange(format!(
                "address {} does not fit in {n} bits",
                self.address
            )));
        }
        if self.result >> m != 0 {
            return Err(Error::OutOfRange(format!(
                "result {} does not fit in {m} bits",
                self.result
            )));
        }
        if !self.mem.is_empty() && self.mem.len() != mem_widths.len() {
            return Err(Error::OutOfRange(format!(
                "expected {} memory values, got {}",
                mem_widths.len(),
                self.mem.len()
            )));
        }
        for (z, (&v, &k)) in self.mem.iter().zip(mem_widths).enumerate() {
            if v >> k != 0 {
                return Err(Error::OutOfRange(format!(
                    "memory value {v} for leaf {z} does not fit in {k} bits"
                )));
            }
        }
        Ok(())
    }
}

/// A sparse map from basis strings to amplitudes.
#[derive(Clone, PartialEq, Debug)]
pub struct SparseState {
    width: usize,
    amps: BTreeMap<BasisKey, Complex64>,
}

impl SparseState {
    /// `|0…0⟩` on `width` qubits.
    pub fn zero(width: usize) -> Self {
        Self::from_basis(BasisKey::zeros(width))
    }

    pub fn from_basis(key: BasisKey) -> Self {
        let width = key.width();
        let mut amps = BTreeMap::new();
        amps.insert(key, Complex64::new(1.0, 0.0));
        Self { width, amps }
    }

    /// Builds a state from entries, summing duplicates and pruning. No
    /// normalization check.
    pub fn from_entries(
        width: usize,
        entries: impl IntoIterator<Item = (BasisKey, Complex64)>,
    ) -> Result<Self> {
        let mut s = Self {
            width,
            amps: BTreeMap::new(),
        };
        for (k, a) in entries {
            if k.width() != width {
                return Err(Error::Structural(format!(
                    "basis string of width {} in a {width}-qubit state",
                    k.width()
                )));
            }
            *s.amps.entry(k).or_insert_with(Complex64::zero) += a;
        }
        s.prune();
        Ok(s)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of stored basis strings.
    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, BasisKey, Complex64> {
        self.amps.iter()
    }

    pub fn amplitude(&self, key: &BasisKey) -> Complex64 {
        self.amps.get(key).copied().unwrap_or_else(Complex64::zero)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &SparseState) -> Complex64 {
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::zero();
        for (k, a) in &small.amps {
            if let Some(b) = large.amps.get(k) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        acc
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &SparseState) -> f64 {
        self.inner(other).norm_sqr()
    }

    fn prune(&mut self) {
        self.amps.retain(|_, a| a.norm() > PRUNE_TOLERANCE);
    }

    fn check_qubit(&self, gate: &Gate) -> Result<()> {
        match gate.qubits().find(|q| q.index() >= self.width) {
            Some(q) => Err(Error::Structural(format!(
                "gate touches {q} but the state has {} qubits",
                self.width
            ))),
            None => Ok(()),
        }
    }

    fn permute(&mut self, f: impl Fn(&mut BasisKey)) {
        let old = mem::take(&mut self.amps);
        for (mut k, a) in old {
            f(&mut k);
            self.amps.insert(k, a);
        }
    }

    /// Applies one gate in place.
    pub fn apply_gate(&mut self, gate: &Gate, unitaries: &UnitaryTable) -> Result<()> {
        self.check_qubit(gate)?;
        match gate {
            Gate::X { target } => {
                let t = target.index();
                self.permute(|k| k.flip(t));
            }
            Gate::Cnot { control, target } => {
                let (c, t) = (control.index(), target.index());
                self.permute(|k| {
                    if k.get(c) {
                        k.flip(t)
                    }
                });
            }
            Gate::Toffoli { controls, target } => {
                let (c0, c1, t) = (controls[0].index(), controls[1].index(), target.index());
                self.permute(|k| {
                    if k.get(c0) && k.get(c1) {
                        k.flip(t)
                    }
                });
            }
            Gate::Fredkin { control, targets } => {
                let (c, a, b) = (control.index(), targets[0].index(), targets[1].index());
                self.permute(|k| {
                    if k.get(c) {
                        k.swap(a, b)
                    }
                });
            }
            Gate::ControlledOpaque(op) => {
                let spec = unitaries.get(op.leaf).ok_or_else(|| {
                    Error::Configuration(format!("no unitary supplied for leaf {}", op.leaf))
                })?;
                self.apply_opaque(op, spec)?;
            }
        }
        Ok(())
    }

    fn apply_opaque(&mut self, op: &OpaqueCall, spec: &UnitarySpec) -> Result<()> {
        let (m, k) = (spec.result_width, spec.mem_width);
        if op.targets.len() != m + k {
            return Err(Error::Shape {
                leaf: op.leaf,
                expected: 1 << op.targets.len(),
                found: spec.dim(),
            });
        }
        let dim = spec.dim();
        // Target p < m is result bit p (local bit k + p); otherwise memory bit p - m.
        let local_bit = |p: usize| if p < m { k + p } else { p - m };
        let control = op.control.index();

        let old = mem::take(&mut self.amps);
        let mut groups: BTreeMap<BasisKey, Vec<Complex64>> = BTreeMap::new();
        for (key, a) in old {
            if !key.get(control) {
                self.amps.insert(key, a);
                continue;
            }
            let mut rest = key;
            let mut local = 0usize;
            for (p, t) in op.targets.iter().enumerate() {
                if rest.get(t.index()) {
                    local |= 1 << local_bit(p);
                    rest.set(t.index(), false);
                }
            }
            groups
                .entry(rest)
                .or_insert_with(|| vec![Complex64::zero(); dim])[local] += a;
        }

        for (rest, input) in groups {
            let support: Vec<(usize, Complex64)> = input
                .iter()
                .enumerate()
                .filter(|(_, a)| !a.is_zero())
                .map(|(c, a)| (c, *a))
                .collect();
            for r in 0..dim {
                let mut acc = Complex64::zero();
                for &(c, a) in &support {
                    let u = if op.dagger {
                        spec.get(c, r).conj()
                    } else {
                        spec.get(r, c)
                    };
                    acc += u * a;
                }
                if acc.norm() > PRUNE_TOLERANCE {
                    let mut key = rest.clone();
                    for (p, t) in op.targets.iter().enumerate() {
                        key.set(t.index(), (r >> local_bit(p)) & 1 == 1);
                    }
                    self.amps.insert(key, acc);
                }
            }
        }
        Ok(())
    }

    /// Applies every gate of `circuit`, moment by moment, gates within a
    /// moment in stored order.
    pub fn run(&mut self, circuit: &Circuit, unitaries: &UnitaryTable) -> Result<()> {
        if circuit.layout().num_qubits() != self.width {
            return Err(Error::Structural(format!(
                "circuit has {} qubits but the state has {}",
                circuit.layout().num_qubits(),
                self.width
            )));
        }
        for gate in circuit.gates() {
            self.apply_gate(gate, unitaries)?;
        }
        Ok(())
    }
}

/// Applies one gate, returning the new state.
pub fn apply_gate(
    mut state: SparseState,
    gate: &Gate,
    unitaries: &UnitaryTable,
) -> Result<SparseState> {
    state.apply_gate(gate, unitaries)?;
    Ok(state)
}

/// Runs a whole circuit, returning the new state.
pub fn run_circuit(
    mut state: SparseState,
    circuit: &Circuit,
    unitaries: &UnitaryTable,
) -> Result<SparseState> {
    state.run(circuit, unitaries)?;
    Ok(state)
}

/// The basis string for `assignment` on `layout`: data registers set, all
/// ancillas (including `life_ε`) zero.
pub fn basis_key(layout: &RegisterMap, assignment: &BasisAssignment) -> Result<BasisKey> {
    let (n, m) = (layout.address_width(), layout.result_width());
    assignment.validate(n, m, layout.mem_widths())?;
    let mut key = BasisKey::zeros(layout.num_qubits());
    key.write(
        (0..n).map(|j| layout.address(j).index()),
        assignment.address,
    );
    key.write((0..m).map(|i| layout.result(i).index()), assignment.result);
    for z in layout.leaves() {
        let k = layout.mem_width(z);
        key.write(
            (0..k).map(|j| layout.mem(z, j).index()),
            assignment.mem_value(z.value() as usize),
        );
    }
    Ok(key)
}

pub fn basis_state(layout: &RegisterMap, assignment: &BasisAssignment) -> Result<SparseState> {
    basis_key(layout, assignment).map(SparseState::from_basis)
}

/// `Σ a_i |s_i⟩`. The amplitude vector must have unit norm and the merged
/// state must be normalized (e.g. the `s_i` are orthonormal).
pub fn superpose(terms: &[(Complex64, SparseState)]) -> Result<SparseState> {
    let Some((_, first)) = terms.first() else {
        return Err(Error::NotNormalized(0.0));
    };
    let coeff_norm: f64 = terms.iter().map(|(a, _)| a.norm_sqr()).sum();
    if (coeff_norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized(coeff_norm));
    }
    let width = first.width;
    let entries = terms
        .iter()
        .flat_map(|(a, s)| s.amps.iter().map(move |(k, b)| (k.clone(), a * b)));
    let out = SparseState::from_entries(width, entries)?;
    let norm = out.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized(norm));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Policy;
    use crate::tree_layout::{allocate_registers, Qubit};
    use alloc::sync::Arc;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn key(s: &str) -> BasisKey {
        BasisKey::from_bitstring(s).unwrap()
    }

    #[test]
    fn x_flips() {
        let s = apply_gate(
            SparseState::zero(1),
            &Gate::X { target: Qubit(0) },
            &UnitaryTable::new(),
        )
        .unwrap();
        assert_eq!(s.amplitude(&key("1")), c(1.0));
    }

    #[test]
    fn fredkin_truth_table() {
        let g = Gate::Fredkin {
            control: Qubit(0),
            targets: [Qubit(1), Qubit(2)],
        };
        let t = UnitaryTable::new();
        let s = apply_gate(SparseState::from_basis(key("101")), &g, &t).unwrap();
        assert_eq!(s.amplitude(&key("110")), c(1.0));
        let s = apply_gate(SparseState::from_basis(key("001")), &g, &t).unwrap();
        assert_eq!(s.amplitude(&key("001")), c(1.0));
    }

    #[test]
    fn toffoli_needs_both_controls() {
        let g = Gate::Toffoli {
            controls: [Qubit(0), Qubit(1)],
            target: Qubit(2),
        };
        let t = UnitaryTable::new();
        for (input, output) in [
            ("000", "000"),
            ("100", "100"),
            ("010", "010"),
            ("110", "111"),
            ("111", "110"),
        ] {
            let s = apply_gate(SparseState::from_basis(key(input)), &g, &t).unwrap();
            assert_eq!(s.amplitude(&key(output)), c(1.0), "{input}");
        }
    }

    fn leaf_setup() -> (Arc<RegisterMap>, NodeLabel, UnitaryTable) {
        let layout = Arc::new(allocate_registers(1, 1, &[0; 2]).unwrap());
        let z = NodeLabel::parse("1").unwrap();
        // Hadamard on the result qubit.
        let h = FRAC_1_SQRT_2;
        let mut table = UnitaryTable::new();
        table.insert(UnitarySpec::new(z, 1, 0, vec![c(h), c(h), c(h), c(-h)], 1).unwrap());
        table.insert(UnitarySpec::identity(NodeLabel::parse("0").unwrap(), 1, 0).unwrap());
        (layout, z, table)
    }

    fn opaque(layout: &RegisterMap, z: NodeLabel, dagger: bool) -> Gate {
        Gate::ControlledOpaque(OpaqueCall {
            control: layout.life(z),
            targets: vec![layout.res(z, 0)],
            leaf: z,
            dagger,
            depth: 1,
        })
    }

    #[test]
    fn opaque_with_control_off_is_identity() {
        let (layout, z, table) = leaf_setup();
        let mut k = BasisKey::zeros(layout.num_qubits());
        k.set(layout.res(z, 0).index(), true);
        let s = apply_gate(
            SparseState::from_basis(k.clone()),
            &opaque(&layout, z, false),
            &table,
        )
        .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.amplitude(&k), c(1.0));
    }

    #[test]
    fn opaque_with_control_on_applies_matrix() {
        let (layout, z, table) = leaf_setup();
        let mut k = BasisKey::zeros(layout.num_qubits());
        k.set(layout.life(z).index(), true);
        let g = opaque(&layout, z, false);
        let s = apply_gate(SparseState::from_basis(k.clone()), &g, &table).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let back = apply_gate(s, &opaque(&layout, z, true), &table).unwrap();
        assert_eq!(back.len(), 1);
        assert!((back.amplitude(&k) - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn missing_unitary_is_configuration_error() {
        let (layout, z, _) = leaf_setup();
        let mut k = BasisKey::zeros(layout.num_qubits());
        k.set(layout.life(z).index(), true);
        let err = apply_gate(
            SparseState::from_basis(k),
            &opaque(&layout, z, false),
            &UnitaryTable::new(),
        );
        assert!(matches!(err, Err(Error::Configuration(_))));
    }

    #[test]
    fn rejects_non_unitary() {
        let z = NodeLabel::ROOT;
        let err = UnitarySpec::new(z, 1, 0, vec![c(1.0), c(1.0), c(0.0), c(1.0)], 1);
        assert!(matches!(err, Err(Error::NotUnitary { .. })));
        let err = UnitarySpec::new(z, 1, 0, vec![c(1.0)], 1);
        assert!(matches!(err, Err(Error::Shape { .. })));
        assert!(UnitarySpec::from_permutation(z, 1, 0, |_| 0).is_err());
    }

    #[test]
    fn table_checks_layout() {
        let (layout, _, table) = leaf_setup();
        table.check_layout(&layout).unwrap();
        let mut partial = UnitaryTable::new();
        partial.insert(table.get(NodeLabel::parse("0").unwrap()).unwrap().clone());
        assert!(matches!(
            partial.check_layout(&layout),
            Err(Error::Configuration(_))
        ));
        let mut wrong = table.clone();
        wrong.insert(UnitarySpec::identity(NodeLabel::parse("1").unwrap(), 1, 1).unwrap());
        assert!(matches!(
            wrong.check_layout(&layout),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn basis_state_sets_registers() {
        let layout = allocate_registers(2, 1, &[1; 4]).unwrap();
        let s = basis_state(&layout, &BasisAssignment::new(0, 0)).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.norm_sqr(), 1.0);
        assert_eq!(s.iter().next().unwrap().0.count_ones(), 0);

        let s = basis_state(&layout, &BasisAssignment::new(0b10, 1)).unwrap();
        let (k, a) = s.iter().next().unwrap();
        assert_eq!(*a, c(1.0));
        assert!(k.get(layout.address(1).index()) && !k.get(layout.address(0).index()));
        assert!(k.get(layout.result(0).index()));
        assert_eq!(k.count_ones(), 2);
    }

    #[test]
    fn basis_state_length_mismatch() {
        let layout = allocate_registers(2, 1, &[1; 4]).unwrap();
        assert!(matches!(
            basis_state(&layout, &BasisAssignment::new(4, 0)),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            basis_state(&layout, &BasisAssignment::new(0, 2)),
            Err(Error::OutOfRange(_))
        ));
        let bad_mem = BasisAssignment::new(0, 0).with_mem(vec![0, 2, 0, 0]);
        assert!(matches!(
            basis_state(&layout, &bad_mem),
            Err(Error::OutOfRange(_))
        ));
        let short_mem = BasisAssignment::new(0, 0).with_mem(vec![0]);
        assert!(basis_state(&layout, &short_mem).is_err());
    }

    #[test]
    fn superpose_two_terms() {
        let a = SparseState::from_basis(key("000"));
        let b = SparseState::from_basis(key("100"));
        let h = c(FRAC_1_SQRT_2);
        let s = superpose(&[(h, a), (h, b)]).unwrap();
        assert_eq!(s.len(), 2);
        for (_, amp) in s.iter() {
            assert!((amp.norm_sqr() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn superpose_sums_and_prunes() {
        let h = c(FRAC_1_SQRT_2);
        let plus = superpose(&[
            (h, SparseState::from_basis(key("0"))),
            (h, SparseState::from_basis(key("1"))),
        ])
        .unwrap();
        let minus = superpose(&[
            (h, SparseState::from_basis(key("0"))),
            (-h, SparseState::from_basis(key("1"))),
        ])
        .unwrap();
        let s = superpose(&[(h, plus), (h, minus)]).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.amplitude(&key("0")) - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn superpose_rejects_unnormalized() {
        let a = SparseState::from_basis(key("0"));
        assert!(matches!(
            superpose(&[(c(0.5), a.clone())]),
            Err(Error::NotNormalized(_))
        ));
        let h = c(FRAC_1_SQRT_2);
        assert!(matches!(
            superpose(&[(h, a.clone()), (h, a)]),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn empty_circuit_is_identity() {
        let layout = Arc::new(allocate_registers(1, 1, &[0; 2]).unwrap());
        let circuit = Circuit::new(layout.clone());
        let s = basis_state(&layout, &BasisAssignment::new(1, 1)).unwrap();
        assert_eq!(
            run_circuit(s.clone(), &circuit, &UnitaryTable::new()).unwrap(),
            s
        );
    }

    #[test]
    fn run_checks_width() {
        let layout = Arc::new(allocate_registers(1, 1, &[0; 2]).unwrap());
        let mut circuit = Circuit::new(layout);
        circuit
            .append(Gate::X { target: Qubit(0) }, Policy::Asap)
            .unwrap();
        assert!(run_circuit(SparseState::zero(3), &circuit, &UnitaryTable::new()).is_err());
    }
}

//! Down, Run and Up phases of the tree access circuit.
//!
//! For each level `k = 0..n` and each node `x` of length `k`, with
//! `top = n - k - 1`:
//!
//! 1. `adr_x[j] → adr_x0[j]` for `j < top`: nothing to emit, `adr_x0`
//!    shares its parent's qubits (see [`crate::tree_layout`]),
//! 2. `adr_x[j] → adr_x1[j]` for `j < top` (CNOT),
//! 3. `life_x1 ^= adr_x[top] ∧ life_x` (Toffoli),
//! 4. the same Toffoli onto `life_x0`, sandwiched between `X(adr_x[top])`,
//! 5. for each result qubit `i`: swap `res_x[i] ↔ res_xb[i]` controlled on
//!    `life_xb`, for `b = 0, 1` (Fredkin).
//!
//! After Down on address `y`, `life_x = 1` exactly on prefixes of `y`, each
//! internal `adr_x` holds the `n - |x|` low bits of `y`, and the result
//! value sits in `res_y`.
//!
//! Steps 1–4 of every level are emitted before step 5 of any level. Step 5
//! only reads `life` flags that are final by then, so the order is
//! equivalent, and it lets the scheduler overlap hand-down at consecutive
//! levels: level `k + 1` starts moving `res[i]` as soon as level `k` has
//! delivered it. Depth is then `O(n + m)` rather than `O(n·m)`.
//!
//! The fan-out variant replaces the sequential `m`-step hand-down per node
//! by `⌈m/s⌉` blocks, each controlled on its own copy of `life_xb`. Copies
//! are made along a CNOT chain (`copy_0 ← life`, `copy_c ← copy_{c-1}`) and
//! uncomputed in reverse. A fragment then has depth `≤ 2⌈m/s⌉ + s + O(1)`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::circuit::{Circuit, Gate, OpaqueCall, Policy};
use crate::error::{Error, Result};
use crate::simulator::UnitaryTable;
use crate::tree_layout::{level_nodes, NodeLabel, Qubit, RegisterMap};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Variant {
    #[default]
    Sequential,
    Fanout,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Sequential => "sequential",
            Variant::Fanout => "fanout",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sequential" => Some(Variant::Sequential),
            "fanout" => Some(Variant::Fanout),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SynthesisOptions {
    pub variant: Variant,
    /// Fan-out block size `s`; `None` means `⌈√m⌉`.
    pub block_size: Option<usize>,
    /// Emit `X(life_ε)` at the start of Down (and hence at the end of Up).
    pub include_preparation: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            variant: Variant::Sequential,
            block_size: None,
            include_preparation: true,
        }
    }
}

/// `⌈√m⌉`.
pub fn default_block_size(m: usize) -> usize {
    let mut s = 1;
    while s * s < m {
        s += 1;
    }
    s
}

impl SynthesisOptions {
    pub fn sequential() -> Self {
        Self::default()
    }

    pub fn fanout() -> Self {
        Self {
            variant: Variant::Fanout,
            ..Self::default()
        }
    }

    pub fn with_block_size(mut self, s: usize) -> Self {
        self.block_size = Some(s);
        self
    }

    pub fn without_preparation(mut self) -> Self {
        self.include_preparation = false;
        self
    }

    /// The block size for result width `m`, validated against `1 ≤ s ≤ m`.
    pub fn resolved_block_size(&self, m: usize) -> Result<usize> {
        let s = self.block_size.unwrap_or_else(|| default_block_size(m));
        if s == 0 || s > m {
            return Err(Error::InvalidParameter(format!(
                "fan-out block size must be in 1..={m}, got {s}"
            )));
        }
        Ok(s)
    }

    /// The layout the synthesized circuit lives on: `base` itself for the
    /// sequential variant, `base` plus a fan-out region otherwise.
    pub fn prepare_layout(&self, base: &RegisterMap) -> Result<Arc<RegisterMap>> {
        match self.variant {
            Variant::Sequential => {
                if let Some(s) = self.block_size {
                    self.resolved_block_size(base.result_width())
                        .map_err(|_| Error::InvalidParameter(format!("invalid block size {s}")))?;
                }
                Ok(Arc::new(base.clone()))
            }
            Variant::Fanout => {
                let s = self.resolved_block_size(base.result_width())?;
                base.with_fanout(s).map(Arc::new)
            }
        }
    }
}

fn check_layout(layout: &RegisterMap, options: &SynthesisOptions) -> Result<()> {
    if options.variant == Variant::Fanout {
        let s = options.resolved_block_size(layout.result_width())?;
        if layout.fanout_block_size() != Some(s) {
            return Err(Error::Structural(format!(
                "layout carries no fan-out region for block size {s}"
            )));
        }
    }
    Ok(())
}

fn cnot(control: Qubit, target: Qubit) -> Gate {
    Gate::Cnot { control, target }
}

/// Steps 1–4 at level `k`: copy the low address bits down and set the
/// children's life flags.
fn emit_routing(c: &mut Circuit, layout: &RegisterMap, level: usize) -> Result<()> {
    let n = layout.address_width();
    let top = n - level - 1;
    for x in level_nodes(level) {
        let (x0, x1) = (x.child(0), x.child(1));
        for j in 0..top {
            c.append(cnot(layout.adr(x, j), layout.adr(x1, j)), Policy::Asap)?;
        }
        let bit = layout.adr(x, top);
        let life = layout.life(x);
        // Plain Toffoli: bit = 1 selects the right child.
        c.append(
            Gate::Toffoli {
                controls: [bit, life],
                target: layout.life(x1),
            },
            Policy::Asap,
        )?;
        c.append(Gate::X { target: bit }, Policy::Asap)?;
        c.append(
            Gate::Toffoli {
                controls: [bit, life],
                target: layout.life(x0),
            },
            Policy::Asap,
        )?;
        c.append(Gate::X { target: bit }, Policy::Asap)?;
    }
    Ok(())
}

fn fredkin(control: Qubit, a: Qubit, b: Qubit) -> Gate {
    Gate::Fredkin {
        control,
        targets: [a, b],
    }
}

fn emit_sequential_handdown(c: &mut Circuit, layout: &RegisterMap, level: usize) -> Result<()> {
    let m = layout.result_width();
    for x in level_nodes(level) {
        let (x0, x1) = (x.child(0), x.child(1));
        let (l0, l1) = (layout.life(x0), layout.life(x1));
        for i in 0..m {
            c.append(
                fredkin(l0, layout.res(x, i), layout.res(x0, i)),
                Policy::Asap,
            )?;
            c.append(
                fredkin(l1, layout.res(x, i), layout.res(x1, i)),
                Policy::Asap,
            )?;
        }
    }
    Ok(())
}

/// Control qubit for block `b` of child `xb`: the life flag itself for block
/// 0, copy `b - 1` otherwise.
fn block_control(layout: &RegisterMap, child: NodeLabel, block: usize) -> Qubit {
    if block == 0 {
        layout.life(child)
    } else {
        layout.copy(child, block - 1)
    }
}

fn emit_fanout_handdown(
    c: &mut Circuit,
    layout: &RegisterMap,
    level: usize,
    s: usize,
) -> Result<()> {
    let m = layout.result_width();
    let blocks = m.div_ceil(s);
    debug_assert_eq!(layout.copies_per_node(), blocks - 1);
    for x in level_nodes(level) {
        let children = [x.child(0), x.child(1)];
        for b in 1..blocks {
            for &xb in &children {
                c.append(
                    cnot(
                        block_control(layout, xb, b - 1),
                        block_control(layout, xb, b),
                    ),
                    Policy::Asap,
                )?;
            }
        }
        for i in 0..m {
            let block = i / s;
            for &xb in &children {
                c.append(
                    fredkin(
                        block_control(layout, xb, block),
                        layout.res(x, i),
                        layout.res(xb, i),
                    ),
                    Policy::Asap,
                )?;
            }
        }
        for b in (1..blocks).rev() {
            for &xb in &children {
                c.append(
                    cnot(
                        block_control(layout, xb, b - 1),
                        block_control(layout, xb, b),
                    ),
                    Policy::Asap,
                )?;
            }
        }
    }
    Ok(())
}

fn emit_handdown(
    c: &mut Circuit,
    layout: &RegisterMap,
    level: usize,
    options: &SynthesisOptions,
) -> Result<()> {
    match options.variant {
        Variant::Sequential => emit_sequential_handdown(c, layout, level),
        Variant::Fanout => {
            let s = options.resolved_block_size(layout.result_width())?;
            emit_fanout_handdown(c, layout, level, s)
        }
    }
}

fn build_down(layout: &Arc<RegisterMap>, options: &SynthesisOptions) -> Result<Circuit> {
    check_layout(layout, options)?;
    let mut c = Circuit::new(layout.clone());
    if options.include_preparation {
        let t = c.append(
            Gate::X {
                target: layout.life(NodeLabel::ROOT),
            },
            Policy::Asap,
        )?;
        c.set_preparation(Some(t))?;
    }
    let n = layout.address_width();
    for level in 0..n {
        emit_routing(&mut c, layout, level)?;
    }
    for level in 0..n {
        emit_handdown(&mut c, layout, level, options)?;
    }
    Ok(c)
}

/// The Down phase. `layout` is extended with a fan-out region when the
/// options ask for the fan-out variant; the returned circuit carries the
/// layout it was built on.
pub fn synth_down(layout: &RegisterMap, options: &SynthesisOptions) -> Result<Circuit> {
    build_down(&options.prepare_layout(layout)?, options)
}

/// The Up phase: the adjoint of Down, ending with `X(life_ε)` when
/// preparation is included.
pub fn synth_up(layout: &RegisterMap, options: &SynthesisOptions) -> Result<Circuit> {
    Ok(synth_down(layout, options)?.adjoint())
}

/// One moment of controlled `U^z` gates, declared depths taken from `unitaries`.
pub fn synth_run(layout: Arc<RegisterMap>, unitaries: &UnitaryTable) -> Result<Circuit> {
    unitaries.check_layout(&layout)?;
    let depths: Vec<u32> = layout
        .leaves()
        .into_iter()
        .map(|z| unitaries.get(z).map_or(1, |u| u.depth()))
        .collect();
    synth_run_declared(layout, &depths)
}

/// Like [`synth_run`] without matrices: one declared depth per leaf.
pub fn synth_run_declared(layout: Arc<RegisterMap>, depths: &[u32]) -> Result<Circuit> {
    if depths.len() != layout.num_leaves() {
        return Err(Error::InvalidParameter(format!(
            "expected {} declared depths, got {}",
            layout.num_leaves(),
            depths.len()
        )));
    }
    let m = layout.result_width();
    let gates = layout
        .leaves()
        .into_iter()
        .zip(depths)
        .map(|(z, &depth)| {
            let targets = (0..m)
                .map(|i| layout.res(z, i))
                .chain((0..layout.mem_width(z)).map(|j| layout.mem(z, j)))
                .collect();
            Gate::ControlledOpaque(OpaqueCall {
                control: layout.life(z),
                targets,
                leaf: z,
                dagger: false,
                depth,
            })
        })
        .collect();
    let mut c = Circuit::new(layout);
    c.push_moment(gates)?;
    Ok(c)
}

fn access_from_run(down: Circuit, run: Circuit) -> Result<Circuit> {
    let up = down.adjoint();
    let mut c = down;
    c.concat(&run)?;
    c.concat(&up)?;
    Ok(c)
}

/// Down ∥ Run ∥ Up.
pub fn synth_access(
    layout: &RegisterMap,
    unitaries: &UnitaryTable,
    options: &SynthesisOptions,
) -> Result<Circuit> {
    let layout = options.prepare_layout(layout)?;
    let down = build_down(&layout, options)?;
    let run = synth_run(layout, unitaries)?;
    access_from_run(down, run)
}

/// [`synth_access`] with declared opaque depths instead of matrices, for
/// resource analysis at sizes where dense unitaries cannot be materialized.
pub fn synth_access_declared(
    layout: &RegisterMap,
    depths: &[u32],
    options: &SynthesisOptions,
) -> Result<Circuit> {
    let layout = options.prepare_layout(layout)?;
    let down = build_down(&layout, options)?;
    let run = synth_run_declared(layout, depths)?;
    access_from_run(down, run)
}

fn check_level(layout: &RegisterMap, level: usize) -> Result<()> {
    if level >= layout.address_width() {
        return Err(Error::InvalidParameter(format!(
            "level {level} has no children (n = {})",
            layout.address_width()
        )));
    }
    Ok(())
}

/// Step 5 at one level with copies of the life flags, as a standalone
/// fragment. `layout` must carry a fan-out region for block size `s`.
pub fn fanout_handdown(layout: &Arc<RegisterMap>, level: usize, s: usize) -> Result<Circuit> {
    check_level(layout, level)?;
    if layout.fanout_block_size() != Some(s) {
        return Err(Error::Structural(format!(
            "layout carries no fan-out region for block size {s}"
        )));
    }
    let mut c = Circuit::new(layout.clone());
    emit_fanout_handdown(&mut c, layout, level, s)?;
    Ok(c)
}

/// Step 5 at one level, sequential over the result qubits.
pub fn sequential_handdown(layout: &Arc<RegisterMap>, level: usize) -> Result<Circuit> {
    check_level(layout, level)?;
    let mut c = Circuit::new(layout.clone());
    emit_sequential_handdown(&mut c, layout, level)?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BasisKey;
    use crate::circuit::GateKind;
    use crate::simulator::{basis_state, BasisAssignment, SparseState};
    use crate::tree_layout::{allocate_registers, enumerate_nodes};

    fn run(c: &Circuit, s: SparseState) -> SparseState {
        crate::simulator::run_circuit(s, c, &UnitaryTable::new()).unwrap()
    }

    fn single(s: &SparseState) -> BasisKey {
        assert_eq!(s.len(), 1);
        s.iter().next().unwrap().0.clone()
    }

    #[test]
    fn smallest_down_by_hand() {
        let layout = allocate_registers(1, 1, &[0; 2]).unwrap();
        let down = synth_down(&layout, &SynthesisOptions::sequential()).unwrap();
        let counts = down.gate_counts();
        assert_eq!(
            (counts.x, counts.cnot, counts.toffoli, counts.fredkin),
            (3, 0, 2, 2)
        );
        assert_eq!(down.touched_qubits().len(), 7);
        assert_eq!(down.preparation(), Some(0));

        let (z0, z1) = (
            NodeLabel::parse("0").unwrap(),
            NodeLabel::parse("1").unwrap(),
        );
        let expected = [
            Gate::X {
                target: layout.life(NodeLabel::ROOT),
            },
            Gate::Toffoli {
                controls: [layout.address(0), layout.life(NodeLabel::ROOT)],
                target: layout.life(z1),
            },
            Gate::X {
                target: layout.address(0),
            },
            Gate::Toffoli {
                controls: [layout.address(0), layout.life(NodeLabel::ROOT)],
                target: layout.life(z0),
            },
            Gate::X {
                target: layout.address(0),
            },
            Gate::Fredkin {
                control: layout.life(z0),
                targets: [layout.result(0), layout.res(z0, 0)],
            },
            Gate::Fredkin {
                control: layout.life(z1),
                targets: [layout.result(0), layout.res(z1, 0)],
            },
        ];
        let got: Vec<&Gate> = down.gates().collect();
        assert_eq!(got.len(), expected.len());
        for (g, e) in got.iter().zip(&expected) {
            assert_eq!(*g, e);
        }
    }

    #[test]
    fn life_path_for_address_10() {
        let layout = allocate_registers(2, 1, &[0; 4]).unwrap();
        let down = synth_down(&layout, &SynthesisOptions::sequential()).unwrap();
        let out = single(&run(
            &down,
            basis_state(&layout, &BasisAssignment::new(0b10, 0)).unwrap(),
        ));
        let live: Vec<String> = enumerate_nodes(2)
            .unwrap()
            .into_iter()
            .flatten()
            .filter(|x| out.get(layout.life(*x).index()))
            .map(|x| alloc::format!("{x}"))
            .collect();
        assert_eq!(live, ["ε", "1", "10"]);
    }

    #[test]
    fn zero_result_leaves_res_zero() {
        for n in 1..=3 {
            let layout = allocate_registers(n, 2, &alloc::vec![0; 1 << n]).unwrap();
            for opts in [
                SynthesisOptions::sequential(),
                SynthesisOptions::fanout().with_block_size(1),
            ] {
                let down = synth_down(&layout, &opts).unwrap();
                let l = down.layout().clone();
                for y in 0..1u64 << n {
                    let out = single(&run(
                        &down,
                        basis_state(&l, &BasisAssignment::new(y, 0)).unwrap(),
                    ));
                    for x in enumerate_nodes(n).unwrap().into_iter().flatten() {
                        for i in 0..2 {
                            assert!(!out.get(l.res(x, i).index()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn up_is_adjoint_of_down() {
        let layout = allocate_registers(3, 2, &[1; 8]).unwrap();
        for opts in [SynthesisOptions::sequential(), SynthesisOptions::fanout()] {
            let down = synth_down(&layout, &opts).unwrap();
            let up = synth_up(&layout, &opts).unwrap();
            assert_eq!(up, down.adjoint());
            assert_eq!(up.gate_counts(), down.gate_counts());
            assert_eq!(up.moments().len(), down.moments().len());
            assert_eq!(up.preparation(), Some(up.moments().len() - 1));
        }
    }

    #[test]
    fn run_phase_single_moment() {
        let layout = Arc::new(allocate_registers(1, 1, &[0; 2]).unwrap());
        let run = synth_run_declared(layout.clone(), &[3, 7]).unwrap();
        assert_eq!(run.moments().len(), 1);
        assert_eq!(run.gate_counts().opaque, 2);
        assert_eq!(run.depth(), 7);
        assert!(synth_run_declared(layout, &[1]).is_err());
    }

    #[test]
    fn run_phase_checks_dimensions() {
        use crate::simulator::UnitarySpec;
        let layout = Arc::new(allocate_registers(1, 1, &[1; 2]).unwrap());
        let table: UnitaryTable = [
            UnitarySpec::identity(NodeLabel::parse("0").unwrap(), 1, 1).unwrap(),
            UnitarySpec::identity(NodeLabel::parse("1").unwrap(), 1, 0).unwrap(),
        ]
        .into_iter()
        .collect();
        match synth_run(layout, &table) {
            Err(Error::Shape { leaf, .. }) => assert_eq!(leaf, NodeLabel::parse("1").unwrap()),
            other => panic!("expected shape error, got {other:?}"),
        }
    }

    #[test]
    fn fanout_degenerates_for_m1() {
        let layout = Arc::new(
            allocate_registers(1, 1, &[0; 2])
                .unwrap()
                .with_fanout(1)
                .unwrap(),
        );
        let frag = fanout_handdown(&layout, 0, 1).unwrap();
        assert_eq!(frag.gate_counts().cnot, 0);
        assert_eq!(frag.gate_counts().fredkin, 2);
        assert_eq!(layout.copies_per_node(), 0);
    }

    #[test]
    fn fanout_fragment_depth_bound() {
        for m in 1..=64usize {
            let s = default_block_size(m);
            let layout = Arc::new(
                allocate_registers(1, m, &[0; 2])
                    .unwrap()
                    .with_fanout(s)
                    .unwrap(),
            );
            let frag = fanout_handdown(&layout, 0, s).unwrap();
            let bound = 2 * m.div_ceil(s) as u64 + s as u64 + 2;
            assert!(
                frag.depth() <= bound,
                "m={m}: depth {} > {bound}",
                frag.depth()
            );
            let seq = sequential_handdown(&layout, 0).unwrap();
            assert_eq!(seq.depth(), m as u64 + 1);
        }
    }

    #[test]
    fn fanout_copies_restored() {
        let m = 5;
        let layout = Arc::new(
            allocate_registers(2, m, &[0; 4])
                .unwrap()
                .with_fanout(2)
                .unwrap(),
        );
        let frag = fanout_handdown(&layout, 1, 2).unwrap();
        assert!(frag.gate_counts().cnot > 0);
        // Any setting of the life flags and result bits: copies end at zero.
        for pattern in 0..64u64 {
            let mut key = BasisKey::zeros(layout.num_qubits());
            for (b, x) in level_nodes(2).into_iter().enumerate() {
                key.set(layout.life(x).index(), (pattern >> b) & 1 == 1);
            }
            key.set(
                layout.res(NodeLabel::parse("1").unwrap(), 3).index(),
                pattern & 16 != 0,
            );
            let out = single(&run(&frag, SparseState::from_basis(key)));
            for x in level_nodes(2) {
                for c in 0..layout.copies_per_node() {
                    assert!(!out.get(layout.copy(x, c).index()));
                }
            }
        }
    }

    #[test]
    fn fanout_requires_region() {
        let layout = Arc::new(allocate_registers(1, 4, &[0; 2]).unwrap());
        assert!(fanout_handdown(&layout, 0, 2).is_err());
        assert!(fanout_handdown(&Arc::new(layout.with_fanout(2).unwrap()), 1, 2).is_err());
        let opts = SynthesisOptions::fanout().with_block_size(5);
        assert!(matches!(
            synth_down(&layout, &opts),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn default_block_sizes() {
        let got: Vec<usize> = [1, 2, 4, 5, 9, 10, 64]
            .iter()
            .map(|&m| default_block_size(m))
            .collect();
        assert_eq!(got, [1, 2, 2, 3, 3, 4, 8]);
    }

    #[test]
    fn without_preparation_has_no_root_x() {
        let layout = allocate_registers(2, 1, &[0; 4]).unwrap();
        let down = synth_down(
            &layout,
            &SynthesisOptions::sequential().without_preparation(),
        )
        .unwrap();
        assert_eq!(down.preparation(), None);
        let root = layout.life(NodeLabel::ROOT);
        assert!(!down
            .gates()
            .any(|g| g.kind() == GateKind::PauliX && g.targets() == [root]));
    }

    #[test]
    fn down_width_regression_anchor() {
        let layout = allocate_registers(3, 2, &[0; 8]).unwrap();
        for options in [SynthesisOptions::sequential(), SynthesisOptions::fanout()] {
            let down = synth_down(&layout, &options).unwrap();
            assert_eq!((down.width(), down.depth(), down.num_gates()), (7, 15, 61));
        }
    }
}

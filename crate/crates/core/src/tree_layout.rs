//! Tree node labels and register allocation.
//!
//! Nodes are bit strings of length `0..=n`; the root is the empty string and
//! the children of `x` are `x0` and `x1`. A leaf label `z_{n-1}…z_0` read as
//! an integer has its most significant bit on the left.
//!
//! Every node owns a `life` flag and every non-root node owns a `res`
//! register of `m` qubits. Each internal node `x` has an `adr_x` register of
//! `n - |x|` qubits, but only right children own fresh qubits: `adr_x0`
//! shares the low `n - |x| - 1` qubits of its parent's register, and the
//! root's `adr` is the address register itself. This gives exactly
//! `Σ_{k<n} (n-k-1) 2^k = 2^n - n - 1` adr ancillas. Leaves own `mem_z`
//! (`k_z` qubits, possibly zero). The root's `res` is the result register.
//!
//! # Qubit numbering
//!
//! Physical indices are assigned in this order:
//!
//! 1. `address[0..n]`, then `result[0..m]`;
//! 2. `life_ε`;
//! 3. for each level `k = 1..=n`, for each node `x` of that level in
//!    ascending order: `life_x`, `adr_x[0..n-k]` (internal right children
//!    only), `res_x[0..m]`;
//! 4. `mem_z[0..k_z]` for each leaf `z` in ascending order;
//! 5. fan-out copies, if requested: `copy_x[0..c]` for each non-root node in
//!    level order.
//!
//! Within any register, index `j` is bit `j` of the register's value
//! (little-endian). In particular `adr_x[j]` holds address bit `z_j`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Largest supported address width.
pub const MAX_ADDRESS_WIDTH: usize = 30;

/// Default cap on the total number of allocated qubits.
pub const DEFAULT_QUBIT_LIMIT: u64 = 1 << 26;

/// A tree node: a bit string of length `0..=n`.
///
/// Ordering is by length first, then by value, which is level order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeLabel {
    len: u8,
    value: u64,
}

impl NodeLabel {
    pub const ROOT: NodeLabel = NodeLabel { len: 0, value: 0 };

    pub fn new(len: usize, value: u64) -> Result<Self> {
        if len > MAX_ADDRESS_WIDTH {
            return Err(Error::InvalidParameter(format!(
                "node label length {len} exceeds {MAX_ADDRESS_WIDTH}"
            )));
        }
        if value >> len != 0 {
            return Err(Error::InvalidParameter(format!(
                "value {value} does not fit in {len} bits"
            )));
        }
        Ok(Self {
            len: len as u8,
            value,
        })
    }

    /// Parses `"0110"`; `""` and `"ε"` give the root.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "ε" {
            return Ok(Self::ROOT);
        }
        let mut label = Self::ROOT;
        for c in s.chars() {
            let bit = match c {
                '0' => 0,
                '1' => 1,
                _ => return Err(Error::InvalidParameter(format!("invalid node label {s:?}"))),
            };
            if label.len() == MAX_ADDRESS_WIDTH {
                return Err(Error::InvalidParameter(format!(
                    "node label {s:?} is too long"
                )));
            }
            label = label.child(bit);
        }
        Ok(label)
    }

    #[inline]
    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_root(self) -> bool {
        self.len == 0
    }

    /// The label read as an integer, leftmost bit most significant.
    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    /// `x0` or `x1`.
    #[inline]
    pub fn child(self, bit: u8) -> Self {
        debug_assert!(bit <= 1);
        Self {
            len: self.len + 1,
            value: (self.value << 1) | u64::from(bit),
        }
    }

    pub fn parent(self) -> Option<Self> {
        (self.len > 0).then(|| Self {
            len: self.len - 1,
            value: self.value >> 1,
        })
    }

    /// True if `self` is a prefix of `other` (every node is a prefix of itself).
    pub fn is_prefix_of(self, other: NodeLabel) -> bool {
        self.len <= other.len && other.value >> (other.len - self.len) == self.value
    }

    /// The bits as a `0`/`1` string; empty for the root.
    pub fn bits(self) -> String {
        (0..self.len())
            .rev()
            .map(|i| if (self.value >> i) & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Position in level order: `2^len - 1 + value`.
    #[inline]
    pub fn heap_index(self) -> usize {
        (1usize << self.len) - 1 + self.value as usize
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            f.write_str("ε")
        } else {
            f.write_str(&self.bits())
        }
    }
}

/// A physical qubit index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Qubit(pub u32);

impl Qubit {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RegisterKind {
    Address,
    Result,
    Life,
    Adr,
    Res,
    Mem,
    /// Fan-out copy of a node's `life` flag.
    Copy,
}

impl RegisterKind {
    pub const ALL: [RegisterKind; 7] = [
        RegisterKind::Address,
        RegisterKind::Result,
        RegisterKind::Life,
        RegisterKind::Adr,
        RegisterKind::Res,
        RegisterKind::Mem,
        RegisterKind::Copy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegisterKind::Address => "address",
            RegisterKind::Result => "result",
            RegisterKind::Life => "life",
            RegisterKind::Adr => "adr",
            RegisterKind::Res => "res",
            RegisterKind::Mem => "mem",
            RegisterKind::Copy => "copy",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Ancillas start in `|0⟩` and must end there.
    pub fn is_ancilla(self) -> bool {
        !matches!(
            self,
            RegisterKind::Address | RegisterKind::Result | RegisterKind::Mem
        )
    }
}

/// Logical name of a qubit.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct QubitId {
    pub kind: RegisterKind,
    /// Owning node; the root for `address` and `result`.
    pub node: NodeLabel,
    pub index: u32,
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RegisterKind::Address | RegisterKind::Result => {
                write!(f, "{}[{}]", self.kind.name(), self.index)
            }
            _ => write!(f, "{}_{}[{}]", self.kind.name(), self.node, self.index),
        }
    }
}

/// A contiguous register in the allocation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Register {
    pub kind: RegisterKind,
    pub node: NodeLabel,
    pub start: u32,
    pub len: u32,
}

impl Register {
    pub fn qubits(&self) -> impl Iterator<Item = Qubit> + '_ {
        (self.start..self.start + self.len).map(Qubit)
    }
}

/// Exact register sizes.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct AncillaCounts {
    pub life: u64,
    pub adr: u64,
    pub res: u64,
    /// Memory qubits; data, not ancillas, and not part of `total`.
    pub mem: u64,
    /// Fan-out copies (zero unless the layout carries a fan-out region).
    pub copies: u64,
    /// `life + adr + res + copies`.
    pub total: u64,
}

impl AncillaCounts {
    /// `total / ((2m + 3) 2^n)`.
    pub fn ratio_to_asymptote(&self, n: usize, m: usize) -> f64 {
        self.total as f64 / ((2 * m + 3) as f64 * (1u64 << n) as f64)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
struct FanoutRegion {
    block_size: usize,
    per_node: usize,
    /// Indexed by heap index; unused for the root.
    start: Vec<u32>,
}

/// Allocation of every qubit of an access circuit.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RegisterMap {
    n: usize,
    m: usize,
    mem_widths: Vec<usize>,
    life: Vec<u32>,
    adr: Vec<u32>,
    res: Vec<u32>,
    mem: Vec<u32>,
    fanout: Option<FanoutRegion>,
    ids: Vec<QubitId>,
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ADDRESS_WIDTH {
        return Err(Error::InvalidParameter(format!(
            "address width must be in 1..={MAX_ADDRESS_WIDTH}, got {n}"
        )));
    }
    Ok(())
}

fn check_params(n: usize, m: usize, mem_widths: &[usize]) -> Result<()> {
    check_width(n)?;
    if m == 0 {
        return Err(Error::InvalidParameter("result width must be ≥ 1".into()));
    }
    if mem_widths.len() != 1 << n {
        return Err(Error::InvalidParameter(format!(
            "expected {} memory widths (one per leaf), got {}",
            1u64 << n,
            mem_widths.len()
        )));
    }
    if let Some(&k) = mem_widths.iter().find(|&&k| k > 63) {
        return Err(Error::InvalidParameter(format!(
            "memory width {k} exceeds 63"
        )));
    }
    Ok(())
}

/// All node labels, one list per level, ascending within a level.
pub fn enumerate_nodes(n: usize) -> Result<Vec<Vec<NodeLabel>>> {
    check_width(n)?;
    Ok((0..=n).map(level_nodes).collect())
}

/// Nodes of length `level`, ascending.
pub fn level_nodes(level: usize) -> Vec<NodeLabel> {
    (0..1u64 << level)
        .map(|v| NodeLabel {
            len: level as u8,
            value: v,
        })
        .collect()
}

/// Closed-form register sizes.
pub fn ancilla_counts(n: usize, m: usize, mem_widths: &[usize]) -> Result<AncillaCounts> {
    check_params(n, m, mem_widths)?;
    let big_n = 1u64 << n;
    let life = 2 * big_n - 1;
    let adr = big_n - n as u64 - 1;
    let res = m as u64 * (2 * big_n - 2);
    let mem = mem_widths.iter().map(|&k| k as u64).sum();
    Ok(AncillaCounts {
        life,
        adr,
        res,
        mem,
        copies: 0,
        total: life + adr + res,
    })
}

/// Allocates with [`DEFAULT_QUBIT_LIMIT`].
pub fn allocate_registers(n: usize, m: usize, mem_widths: &[usize]) -> Result<RegisterMap> {
    allocate_registers_with_limit(n, m, mem_widths, DEFAULT_QUBIT_LIMIT)
}

pub fn allocate_registers_with_limit(
    n: usize,
    m: usize,
    mem_widths: &[usize],
    limit: u64,
) -> Result<RegisterMap> {
    check_params(n, m, mem_widths)?;
    let counts = ancilla_counts(n, m, mem_widths)?;
    let total = n as u64 + m as u64 + counts.total + counts.mem;
    if total > limit || total > u64::from(u32::MAX) {
        return Err(Error::ResourceLimit { total, limit });
    }

    let nodes = (2usize << n) - 1;
    let mut map = RegisterMap {
        n,
        m,
        mem_widths: mem_widths.to_vec(),
        life: Vec::with_capacity(nodes),
        adr: Vec::with_capacity(nodes),
        res: Vec::with_capacity(nodes),
        mem: Vec::with_capacity(1 << n),
        fanout: None,
        ids: Vec::with_capacity(total as usize),
    };

    map.push_register(RegisterKind::Address, NodeLabel::ROOT, n);
    map.push_register(RegisterKind::Result, NodeLabel::ROOT, m);
    // The root's adr and res alias the address and result registers.
    let root_life = map.push_register(RegisterKind::Life, NodeLabel::ROOT, 1);
    map.life.push(root_life);
    map.adr.push(0);
    map.res.push(n as u32);

    for level in 1..=n {
        for x in level_nodes(level) {
            let life = map.push_register(RegisterKind::Life, x, 1);
            let adr = if x.value() & 1 == 0 {
                map.adr[(x.heap_index() - 1) / 2]
            } else {
                map.push_register(RegisterKind::Adr, x, n - level)
            };
            let res = map.push_register(RegisterKind::Res, x, m);
            map.life.push(life);
            map.adr.push(adr);
            map.res.push(res);
        }
    }
    for z in level_nodes(n) {
        let start = map.push_register(RegisterKind::Mem, z, mem_widths[z.value() as usize]);
        map.mem.push(start);
    }
    debug_assert_eq!(map.ids.len() as u64, total);
    Ok(map)
}

impl RegisterMap {
    fn push_register(&mut self, kind: RegisterKind, node: NodeLabel, len: usize) -> u32 {
        let start = self.ids.len() as u32;
        self.ids
            .extend((0..len as u32).map(|index| QubitId { kind, node, index }));
        start
    }

    /// Returns a copy of this layout extended with `⌈m/s⌉ - 1` fan-out copy
    /// qubits per non-root node. A layout that already carries a fan-out
    /// region for the same `s` is returned unchanged.
    pub fn with_fanout(&self, block_size: usize) -> Result<RegisterMap> {
        self.with_fanout_limit(block_size, DEFAULT_QUBIT_LIMIT)
    }

    pub fn with_fanout_limit(&self, block_size: usize, limit: u64) -> Result<RegisterMap> {
        if block_size == 0 || block_size > self.m {
            return Err(Error::InvalidParameter(format!(
                "fan-out block size must be in 1..={}, got {block_size}",
                self.m
            )));
        }
        if let Some(region) = &self.fanout {
            if region.block_size == block_size {
                return Ok(self.clone());
            }
            return Err(Error::InvalidParameter(format!(
                "layout already carries a fan-out region with block size {}",
                region.block_size
            )));
        }
        let per_node = self.m.div_ceil(block_size) - 1;
        let extra = per_node as u64 * ((2u64 << self.n) - 2);
        let total = self.ids.len() as u64 + extra;
        if total > limit || total > u64::from(u32::MAX) {
            return Err(Error::ResourceLimit { total, limit });
        }
        let mut map = self.clone();
        let mut start = Vec::with_capacity((2 << self.n) - 1);
        start.push(0);
        for level in 1..=self.n {
            for x in level_nodes(level) {
                start.push(map.push_register(RegisterKind::Copy, x, per_node));
            }
        }
        map.fanout = Some(FanoutRegion {
            block_size,
            per_node,
            start,
        });
        Ok(map)
    }

    /// Address width `n`.
    pub fn address_width(&self) -> usize {
        self.n
    }

    /// Result width `m`.
    pub fn result_width(&self) -> usize {
        self.m
    }

    pub fn mem_widths(&self) -> &[usize] {
        &self.mem_widths
    }

    pub fn mem_width(&self, leaf: NodeLabel) -> usize {
        debug_assert_eq!(leaf.len(), self.n);
        self.mem_widths[leaf.value() as usize]
    }

    pub fn num_leaves(&self) -> usize {
        1 << self.n
    }

    pub fn leaves(&self) -> Vec<NodeLabel> {
        level_nodes(self.n)
    }

    pub fn num_qubits(&self) -> usize {
        self.ids.len()
    }

    /// Fan-out block size `s`, if the layout carries copy qubits.
    pub fn fanout_block_size(&self) -> Option<usize> {
        self.fanout.as_ref().map(|f| f.block_size)
    }

    /// Copy qubits per non-root node.
    pub fn copies_per_node(&self) -> usize {
        self.fanout.as_ref().map_or(0, |f| f.per_node)
    }

    pub fn address(&self, j: usize) -> Qubit {
        debug_assert!(j < self.n);
        Qubit(j as u32)
    }

    pub fn result(&self, i: usize) -> Qubit {
        debug_assert!(i < self.m);
        Qubit((self.n + i) as u32)
    }

    pub fn life(&self, x: NodeLabel) -> Qubit {
        debug_assert!(x.len() <= self.n);
        Qubit(self.life[x.heap_index()])
    }

    /// `adr_x[j]`; resolves the left-child and root aliases.
    pub fn adr(&self, x: NodeLabel, j: usize) -> Qubit {
        debug_assert!(j < self.n - x.len());
        Qubit(self.adr[x.heap_index()] + j as u32)
    }

    /// `res_x[i]`; the root aliases the result register.
    pub fn res(&self, x: NodeLabel, i: usize) -> Qubit {
        debug_assert!(i < self.m);
        Qubit(self.res[x.heap_index()] + i as u32)
    }

    pub fn mem(&self, z: NodeLabel, j: usize) -> Qubit {
        debug_assert!(z.len() == self.n && j < self.mem_width(z));
        Qubit(self.mem[z.value() as usize] + j as u32)
    }

    /// Fan-out copy `c` of `life_x`. Panics if the layout has no fan-out region.
    pub fn copy(&self, x: NodeLabel, c: usize) -> Qubit {
        let region = self.fanout.as_ref().expect("layout has no fan-out region");
        debug_assert!(!x.is_root() && c < region.per_node);
        Qubit(region.start[x.heap_index()] + c as u32)
    }

    pub fn id(&self, q: Qubit) -> Option<QubitId> {
        self.ids.get(q.index()).copied()
    }

    /// Physical index of a logical qubit, resolving aliases (`adr_ε` →
    /// address, `adr_x0` → `adr_x`, `res_ε` → result).
    pub fn resolve(&self, id: &QubitId) -> Option<Qubit> {
        let i = id.index as usize;
        let node = id.node;
        if node.len() > self.n {
            return None;
        }
        let q = match id.kind {
            RegisterKind::Address if node.is_root() && i < self.n => self.address(i),
            RegisterKind::Result if node.is_root() && i < self.m => self.result(i),
            RegisterKind::Life if i == 0 => self.life(node),
            RegisterKind::Adr if i < self.n - node.len() => self.adr(node, i),
            RegisterKind::Res if i < self.m => self.res(node, i),
            RegisterKind::Mem if node.len() == self.n && i < self.mem_width(node) => {
                self.mem(node, i)
            }
            RegisterKind::Copy if !node.is_root() && i < self.copies_per_node() => {
                self.copy(node, i)
            }
            _ => return None,
        };
        Some(q)
    }

    pub fn ids(&self) -> &[QubitId] {
        &self.ids
    }

    pub fn is_ancilla(&self, q: Qubit) -> bool {
        self.ids[q.index()].kind.is_ancilla()
    }

    /// Address, result and memory qubits, in numbering order.
    pub fn data_qubits(&self) -> Vec<Qubit> {
        (0..self.ids.len() as u32)
            .map(Qubit)
            .filter(|&q| !self.is_ancilla(q))
            .collect()
    }

    /// All registers in numbering order (empty registers omitted).
    pub fn registers(&self) -> Vec<Register> {
        let mut out: Vec<Register> = Vec::new();
        for (i, id) in self.ids.iter().enumerate() {
            match out.last_mut() {
                Some(r) if r.kind == id.kind && r.node == id.node => r.len += 1,
                _ => out.push(Register {
                    kind: id.kind,
                    node: id.node,
                    start: i as u32,
                    len: 1,
                }),
            }
        }
        out
    }

    /// Register sizes measured from the allocation table.
    pub fn measured_counts(&self) -> AncillaCounts {
        let mut c = AncillaCounts::default();
        for id in &self.ids {
            match id.kind {
                RegisterKind::Life => c.life += 1,
                RegisterKind::Adr => c.adr += 1,
                RegisterKind::Res => c.res += 1,
                RegisterKind::Mem => c.mem += 1,
                RegisterKind::Copy => c.copies += 1,
                RegisterKind::Address | RegisterKind::Result => {}
            }
        }
        c.total = c.life + c.adr + c.res + c.copies;
        c
    }
}

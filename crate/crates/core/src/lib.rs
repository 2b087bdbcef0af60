//! Synthesis, analysis and verification of binary-tree ("active") QRAM
//! access circuits.
//!
//! For an `n`-bit address, an `m`-qubit result register and per-address
//! memory registers of `k_z` qubits, the access circuit realizes
//!
//! ```text
//!   Σ_y |y⟩⟨y| ⊗ U^y        (U^y acting on result ⊗ mem_y)
//! ```
//!
//! by routing the address down a binary tree of ancillas (Down), firing the
//! controlled `U^z` at the single live leaf (Run), and undoing the routing
//! (Up). The crate is `no_std` (with `alloc`) and split into:
//!
//! - [`tree_layout`]: node labels and the qubit allocation of every register.
//! - [`circuit`]: gates, moments, ASAP scheduling, depth/width, adjoint.
//! - [`synthesis`]: the Down/Run/Up phases, sequential and fan-out variants.
//! - [`simulator`]: exact sparse simulation over basis strings.
//! - [`verifier`]: instance families, the direct oracle and equivalence checks.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod bits;
pub mod circuit;
pub mod error;
pub mod simulator;
pub mod synthesis;
pub mod tree_layout;
pub mod verifier;

pub use circuit::{Circuit, Gate, GateKind, Moment, OpaqueCall, Policy};
pub use error::{Error, Result};
pub use simulator::{BasisAssignment, SparseState, UnitarySpec, UnitaryTable};
pub use synthesis::{SynthesisOptions, Variant};
pub use tree_layout::{NodeLabel, Qubit, QubitId, RegisterKind, RegisterMap};

/// Complex amplitude type used throughout.
pub type Complex64 = num_complex::Complex<f64>;

//! Runtime-configurable approximate circuits from Boolean matrix
//! factorization.
//!
//! The library turns a combinational gate-level circuit into a netlist with
//! several accuracy levels selectable at runtime through enable inputs, plus
//! a corrector block that restores bit-exact behavior:
//!
//! 1. [`netlist`] parses/emits BENCH circuits, simulates them 64 vectors at
//!    a time, and extracts/stitches subcircuits.
//! 2. [`bmf`] factorizes a truth table into rank-one (column, row) pairs
//!    under AND/OR algebra with a greedy association heuristic, tracking the
//!    per-prefix error curve.
//! 3. [`design`] splits the pair list into accuracy levels against error
//!    thresholds, synthesizes each level (two-level SOP compressor plus OR
//!    decompressor) and the XOR corrector into enable-gated blocks, and
//!    assembles the runtime-configurable netlist ([`design::ruca_direct`]).
//! 4. [`partition`] and [`dse`] scale the flow to bigger circuits:
//!    min-cut partitioning into convex cap-respecting subcircuits, then a
//!    greedy exploration that decides which subcircuit to approximate next
//!    by `loss = QoR * (P_acc + P_app)` ([`dse::dse`]).
//! 5. [`qor`] measures MAE/NHD between circuits or truth tables; [`cost`]
//!    provides technology-independent area and toggle-based power proxies
//!    aware of power gating.
//!
//! The `ruca` binary wraps the flows as `factor`, `synth`, `dse`, and
//! `verify` subcommands; the `examples/` directory shows each capability as
//! a runnable program.

pub mod bmf;
pub mod cost;
pub mod design;
pub mod dse;
pub mod generators;
pub mod matrix;
pub mod netlist;
pub mod partition;
pub mod qor;
pub mod sop;

pub use bmf::{asso_factorize, brute_force_bmf, factor_error, reconstruct, Factorization};
pub use design::{
    assemble, choose_full_mode, corrector_matrix, ruca_direct, split_levels, verify_modes,
    DesignReport, FullModeKind, LevelPlan, RucaDesign, SynthOptions,
};
pub use dse::{dse, DseTrace};
pub use matrix::{Bits, BooleanMatrix};
pub use netlist::{
    emit_bench, extract_subcircuit, parse_bench, simulate, stitch, truth_table, Circuit, Gate,
    GateKind,
};
pub use partition::{cut_size, partition, Partition, PartitionSpec};
pub use qor::{mae, matrix_qor, nhd, Metric, QorConfig};
pub use sop::{synth_compressor, synth_decompressor};

//! Linear sketches, streaming cut sparsifiers, deferred sparsifiers, the
//! sparsifier switch check, and round/space accounting.

pub mod deferred;
pub mod l0;
pub mod ledger;
pub mod sparsifier;
pub mod switch;
pub mod union_find;

pub use deferred::{build_deferred, refine_deferred, DeferredSketch};
pub use l0::{l0_sample, L0Sketch};
pub use ledger::RoundLedger;
pub use sparsifier::{build_streaming_sparsifier, Sparsifier, SparsifierParams};
pub use switch::{verify_switch, SwitchCheck};

//! secmc: a model checker for modal information-flow security properties
//! of small deterministic imperative programs.
//!
//! Programs and per-agent read/write policies are converted into
//! security Kripke frames; confidentiality, integrity, robust
//! declassification, transparent endorsement and their termination- and
//! progress-insensitive variants are decided by sweeping modal formula
//! templates over all temporally sound world sets, and cross-validated
//! against independently implemented trace-based definitions.

pub mod bitset;
pub mod cli;
pub mod corpus;
pub mod frame;
pub mod lang;
pub mod logic;
pub mod oracle;
pub mod par;
pub mod policy;
pub mod props;
pub mod trace;
pub mod value;

pub use frame::{build_frame, SecurityFrame};
pub use lang::Program;
pub use policy::SecurityContext;
pub use props::{check, PropertyId, Verdict};

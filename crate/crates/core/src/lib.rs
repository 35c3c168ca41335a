//! Kernel for the lambda-free logical frameworks TF (Curry-typed) and TFk
//! (Church-typed), with an embedding into the traditional framework LF.
//!
//! The kernel provides:
//!
//! - the arity algebra and the lambda-free term language with hereditary
//!   instantiation and employment ([`arity`], [`syntax`]);
//! - kinds, contexts, judgements, the expansion of defined judgement forms,
//!   and explicit derivation trees with a local checker ([`judgement`],
//!   [`check`]);
//! - kind synthesis and a fuel-bounded equality search driven by oriented
//!   equation declarations ([`synth`]);
//! - specification analysis: declaration orders, orderability, goodness
//!   classification and the small-kind profiles ([`spec`], [`goodness`]);
//! - the Church-typed framework TFk with label erasure and labelling
//!   ([`tfk`]);
//! - the traditional framework LF with beta/eta reduction, checking, arity
//!   assignment, the normal-form readback into TF, the lifting of TFk into
//!   LF, and the simply-typed image used for normalisation probes ([`lf`],
//!   [`stlc`]).

pub mod arity;
pub mod check;
pub mod error;
pub mod fixtures;
pub mod goodness;
pub mod inject;
pub mod judgement;
pub mod lf;
pub mod spec;
pub mod stlc;
pub mod synth;
pub mod syntax;
pub mod tfk;

pub use arity::Arity;
pub use error::TermError;
pub use syntax::{Abstraction, Object, Symbol, SymbolSort, TfAbstraction, TfObject};

//! Test support for the lambda-free framework kernel: an independent
//! lambda-calculus oracle for the instantiation algebra, seeded random
//! generators for raw and well-typed terms, and mechanical derivation
//! transformers for the metatheory suites.

pub mod gen;
pub mod oracle;
pub mod transform;

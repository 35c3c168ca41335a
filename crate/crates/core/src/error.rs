//! Structured errors shared across the kernel.

use thiserror::Error;

use crate::arity::Arity;

/// Errors raised while building or transforming terms.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TermError {
    #[error("head {head} expects {expected} arguments, found {found}")]
    ArgCount { head: String, expected: usize, found: usize },
    #[error("argument {index} of {head} has arity {found}, expected {expected}")]
    ArgArity { head: String, index: usize, expected: Arity, found: Arity },
    #[error("binder {0} is not a variable")]
    BinderNotVariable(String),
    #[error("duplicate binder {0}")]
    DuplicateBinder(String),
    #[error("{0} is not a variable")]
    NotAVariable(String),
    #[error("cannot instantiate {var} of arity {var_arity} with an abstraction of arity {abs_arity}")]
    InstantiationArity { var: String, var_arity: Arity, abs_arity: Arity },
    #[error("cannot employ an abstraction of arity {fun_arity} on one of arity {arg_arity}")]
    EmploymentArity { fun_arity: Arity, arg_arity: Arity },
    #[error("sequence instantiation over {vars} variables given {abs} abstractions")]
    SeqLength { vars: usize, abs: usize },
    #[error("duplicate context variable {0}")]
    DuplicateContextVariable(String),
    #[error("context entry {name} has arity {var_arity} but its kind has arity {kind_arity}")]
    EntryArity { name: String, var_arity: Arity, kind_arity: Arity },
}

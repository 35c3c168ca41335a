//! Injectivity of type constructors: split a derived equality
//! `G |- c Fs = c Gs : Type` into componentwise equality derivations.
//!
//! The split requires that no declared equation targets `Type`; under that
//! hypothesis the root of the input derivation can only be the constant
//! congruence, reflexivity, symmetry or transitivity, and the components can
//! be recovered by structural descent.  Congruence and reflexivity roots are
//! split exactly; symmetry and transitivity roots are recombined by
//! re-deriving the componentwise equalities with the equality search.

use thiserror::Error;

use crate::check::{check_derivation, CheckError, Derivation, Rule};
use crate::judgement::{Base, Context, JudgementBody, Kind};
use crate::spec::{Declaration, Specification};
use crate::synth::{derive_seq_eq_members, SynthError};
use crate::syntax::{Ann, Object};

#[derive(Clone, Debug, Error)]
pub enum InjectError {
    #[error("specification declares a Type-valued equation (declaration {0})")]
    TypeValuedEquation(usize),
    #[error("derivation does not conclude a constant equality at Type: {0}")]
    WrongShape(String),
    #[error("input derivation does not check: {0}")]
    BadDerivation(#[from] CheckError),
    #[error("componentwise equalities not re-derivable: {0}")]
    Synth(#[from] SynthError),
    #[error("componentwise equality not established within fuel")]
    NotEstablished,
}

/// Split a checked derivation of `G |- c Fs = c Gs : Type` into derivations
/// of the members of `G ||- Fs = Gs :: Theta`, where `c : (Theta) Type`.
pub fn injectivity_split<A: Ann>(
    spec: &Specification<A>,
    d: &Derivation<A>,
    fuel: u64,
) -> Result<Vec<Derivation<A>>, InjectError> {
    for (i, decl) in spec.equations() {
        if let Declaration::Equation { target: Base::Type, .. } = decl {
            return Err(InjectError::TypeValuedEquation(i));
        }
    }
    check_derivation(spec, d)?;
    split(spec, d, fuel)
}

fn conclusion_parts<'a, A: Ann>(
    d: &'a Derivation<A>,
) -> Result<(&'a Context<A>, &'a Object<A>, &'a Object<A>), InjectError> {
    let JudgementBody::Equal(m, n, Base::Type) = &d.conclusion.body else {
        return Err(InjectError::WrongShape(d.conclusion.to_string()));
    };
    if m.head() != n.head() || m.head().is_variable() {
        return Err(InjectError::WrongShape(d.conclusion.to_string()));
    }
    Ok((&d.conclusion.context, m, n))
}

fn constructor_telescope<A: Ann>(
    spec: &Specification<A>,
    m: &Object<A>,
) -> Result<Context<A>, InjectError> {
    let kind: &Kind<A> = spec
        .constant_kind(m.head())
        .ok_or_else(|| InjectError::WrongShape(format!("undeclared constant {}", m.head().name)))?;
    if kind.target() != &Base::Type {
        return Err(InjectError::WrongShape(format!(
            "constant {} does not construct types",
            m.head().name
        )));
    }
    Context::new(kind.telescope().to_vec())
        .map_err(|e| InjectError::WrongShape(e.to_string()))
}

fn split<A: Ann>(
    spec: &Specification<A>,
    d: &Derivation<A>,
    fuel: u64,
) -> Result<Vec<Derivation<A>>, InjectError> {
    let (ctx, m, n) = conclusion_parts(d)?;
    let theta = constructor_telescope(spec, m)?;
    match d.rule {
        Rule::ConstEq => {
            // The premises are exactly the member derivations.
            Ok(d.premises.clone())
        }
        Rule::Ref | Rule::Sym | Rule::Trans => {
            // Validate the expected structural shape, then recombine: the
            // recursion guarantees the sides really are componentwise equal.
            match d.rule {
                Rule::Ref => {}
                Rule::Sym => {
                    let _ = split(spec, &d.premises[0], fuel)?;
                }
                Rule::Trans => {
                    let _ = split_side(spec, &d.premises[0], fuel)?;
                    let _ = split_side(spec, &d.premises[1], fuel)?;
                }
                _ => unreachable!(),
            }
            derive_seq_eq_members(spec, ctx, m.args(), n.args(), &theta, fuel)?
                .ok_or(InjectError::NotEstablished)
        }
        // A Type-kinded equality cannot end in conversion, a variable
        // congruence, or an equation instance (no Type-valued equations).
        other => Err(InjectError::WrongShape(format!(
            "unexpected final rule {}",
            other.name()
        ))),
    }
}

/// Validate one transitivity flank, which equates the constructor object
/// with the (necessarily constructor-headed) middle object.
fn split_side<A: Ann>(
    spec: &Specification<A>,
    d: &Derivation<A>,
    fuel: u64,
) -> Result<(), InjectError> {
    let _ = conclusion_parts(d)?;
    let _ = split(spec, d, fuel)?;
    Ok(())
}

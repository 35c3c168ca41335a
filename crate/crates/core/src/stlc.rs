//! The simply-typed lambda calculus image of the traditional framework.
//!
//! Kinds map to simple types by forgetting dependency (`Type` and `El _`
//! both to the base type), objects map to terms homomorphically.  The image
//! simulates framework beta/eta reduction step for step, which is what makes
//! it usable as a normalisation probe.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::lf::{LfKind, LfObject};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum StlcType {
    Base,
    Arrow(Box<StlcType>, Box<StlcType>),
}

#[derive(Clone)]
pub enum StlcTerm {
    Var(String),
    Lam(String, StlcType, Box<StlcTerm>),
    App(Box<StlcTerm>, Box<StlcTerm>),
}

impl fmt::Display for StlcType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StlcType::Base => write!(f, "*"),
            StlcType::Arrow(a, b) => {
                if matches!(**a, StlcType::Arrow(..)) {
                    write!(f, "({a}) -> {b}")
                } else {
                    write!(f, "{a} -> {b}")
                }
            }
        }
    }
}

impl fmt::Debug for StlcType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for StlcTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StlcTerm::Var(x) => write!(f, "{x}"),
            StlcTerm::Lam(x, t, b) => write!(f, "\\{x} : {t}. {b}"),
            StlcTerm::App(g, a) => {
                match **g {
                    StlcTerm::Lam(..) => write!(f, "({g})")?,
                    _ => write!(f, "{g}")?,
                }
                write!(f, " ")?;
                match **a {
                    StlcTerm::Var(_) => write!(f, "{a}"),
                    _ => write!(f, "({a})"),
                }
            }
        }
    }
}

impl fmt::Debug for StlcTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn alpha_eq(a: &StlcTerm, b: &StlcTerm, env: &mut Vec<(String, String)>) -> bool {
    match (a, b) {
        (StlcTerm::Var(x), StlcTerm::Var(y)) => {
            let lx = env.iter().rposition(|(l, _)| l == x);
            let ly = env.iter().rposition(|(_, r)| r == y);
            match (lx, ly) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (StlcTerm::Lam(x, tx, bx), StlcTerm::Lam(y, ty, by)) => {
            if tx != ty {
                return false;
            }
            env.push((x.clone(), y.clone()));
            let r = alpha_eq(bx, by, env);
            env.pop();
            r
        }
        (StlcTerm::App(f1, a1), StlcTerm::App(f2, a2)) => {
            alpha_eq(f1, f2, env) && alpha_eq(a1, a2, env)
        }
        _ => false,
    }
}

impl PartialEq for StlcTerm {
    fn eq(&self, other: &Self) -> bool {
        alpha_eq(self, other, &mut Vec::new())
    }
}

impl Eq for StlcTerm {}

pub fn free_vars(t: &StlcTerm) -> BTreeSet<String> {
    fn go(t: &StlcTerm, bound: &mut Vec<String>, acc: &mut BTreeSet<String>) {
        match t {
            StlcTerm::Var(x) => {
                if !bound.contains(x) {
                    acc.insert(x.clone());
                }
            }
            StlcTerm::Lam(x, _, b) => {
                bound.push(x.clone());
                go(b, bound, acc);
                bound.pop();
            }
            StlcTerm::App(f, a) => {
                go(f, bound, acc);
                go(a, bound, acc);
            }
        }
    }
    let mut acc = BTreeSet::new();
    go(t, &mut Vec::new(), &mut acc);
    acc
}

/// Capture-avoiding substitution.
pub fn subst(t: &StlcTerm, x: &str, v: &StlcTerm) -> StlcTerm {
    match t {
        StlcTerm::Var(y) => {
            if y == x {
                v.clone()
            } else {
                t.clone()
            }
        }
        StlcTerm::Lam(y, ty, b) => {
            if y == x {
                return t.clone();
            }
            let fv = free_vars(v);
            if fv.contains(y) {
                let mut fresh = y.clone();
                let fv_b = free_vars(b);
                while fv.contains(&fresh) || fv_b.contains(&fresh) || fresh == x {
                    fresh.push('\'');
                }
                let renamed = subst(b, y, &StlcTerm::Var(fresh.clone()));
                StlcTerm::Lam(fresh, ty.clone(), Box::new(subst(&renamed, x, v)))
            } else {
                StlcTerm::Lam(y.clone(), ty.clone(), Box::new(subst(b, x, v)))
            }
        }
        StlcTerm::App(f, a) => {
            StlcTerm::App(Box::new(subst(f, x, v)), Box::new(subst(a, x, v)))
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum StlcError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("applied a term of type {fun} to one of type {arg}")]
    BadApplication { fun: String, arg: String },
}

/// Standard simple type checking under a named context.
pub fn type_check(ctx: &[(String, StlcType)], t: &StlcTerm) -> Result<StlcType, StlcError> {
    match t {
        StlcTerm::Var(x) => ctx
            .iter()
            .rev()
            .find(|(n, _)| n == x)
            .map(|(_, ty)| ty.clone())
            .ok_or_else(|| StlcError::Unbound(x.clone())),
        StlcTerm::Lam(x, ty, b) => {
            let mut inner = ctx.to_vec();
            inner.push((x.clone(), ty.clone()));
            let bt = type_check(&inner, b)?;
            Ok(StlcType::Arrow(Box::new(ty.clone()), Box::new(bt)))
        }
        StlcTerm::App(f, a) => {
            let ft = type_check(ctx, f)?;
            let at = type_check(ctx, a)?;
            match ft {
                StlcType::Arrow(dom, cod) if *dom == at => Ok(*cod),
                other => Err(StlcError::BadApplication {
                    fun: other.to_string(),
                    arg: at.to_string(),
                }),
            }
        }
    }
}

/// All one-step beta/eta reducts, used to check that the image simulates
/// framework reduction.
pub fn beta_eta_steps(t: &StlcTerm) -> Vec<StlcTerm> {
    let mut out = Vec::new();
    if let StlcTerm::App(f, a) = t {
        if let StlcTerm::Lam(x, _, b) = &**f {
            out.push(subst(b, x, a));
        }
    }
    if let StlcTerm::Lam(x, _, b) = t {
        if let StlcTerm::App(f, a) = &**b {
            if matches!(&**a, StlcTerm::Var(y) if y == x) && !free_vars(f).contains(x) {
                out.push((**f).clone());
            }
        }
    }
    match t {
        StlcTerm::Lam(x, ty, b) => {
            for b2 in beta_eta_steps(b) {
                out.push(StlcTerm::Lam(x.clone(), ty.clone(), Box::new(b2)));
            }
        }
        StlcTerm::App(f, a) => {
            for f2 in beta_eta_steps(f) {
                out.push(StlcTerm::App(Box::new(f2), a.clone()));
            }
            for a2 in beta_eta_steps(a) {
                out.push(StlcTerm::App(f.clone(), Box::new(a2)));
            }
        }
        StlcTerm::Var(_) => {}
    }
    out
}

/// The simple type of a framework kind: dependency is forgotten, both base
/// kinds collapse to the base type.
pub fn type_of_kind(k: &LfKind) -> StlcType {
    match k {
        LfKind::Type | LfKind::El(_) => StlcType::Base,
        LfKind::Pi(_, dom, cod) => StlcType::Arrow(
            Box::new(type_of_kind(dom)),
            Box::new(type_of_kind(cod)),
        ),
    }
}

/// The term image of a framework object.
pub fn term_of_object(k: &LfObject) -> StlcTerm {
    match k {
        LfObject::Var(x) => StlcTerm::Var(x.clone()),
        LfObject::Const(c) => StlcTerm::Var(c.clone()),
        LfObject::Lam(x, kind, body) => StlcTerm::Lam(
            x.clone(),
            type_of_kind(kind),
            Box::new(term_of_object(body)),
        ),
        LfObject::App(f, a) => StlcTerm::App(
            Box::new(term_of_object(f)),
            Box::new(term_of_object(a)),
        ),
    }
}

/// The context image: each declared name at the image of its kind.
pub fn context_of(entries: &[(String, LfKind)]) -> Vec<(String, StlcType)> {
    entries
        .iter()
        .map(|(n, k)| (n.clone(), type_of_kind(k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_types() {
        let id = StlcTerm::Lam(
            "x".into(),
            StlcType::Base,
            Box::new(StlcTerm::Var("x".into())),
        );
        assert_eq!(
            type_check(&[], &id).unwrap(),
            StlcType::Arrow(Box::new(StlcType::Base), Box::new(StlcType::Base))
        );
    }

    #[test]
    fn self_application_is_ill_typed() {
        let x = StlcTerm::Var("x".into());
        let xx = StlcTerm::App(Box::new(x.clone()), Box::new(x));
        let ctx = vec![("x".to_string(), StlcType::Base)];
        assert!(matches!(
            type_check(&ctx, &xx),
            Err(StlcError::BadApplication { .. })
        ));
    }

    #[test]
    fn type_of_simple_kinds() {
        assert_eq!(type_of_kind(&LfKind::Type), StlcType::Base);
        let pi = LfKind::Pi(
            "x".into(),
            Box::new(LfKind::Type),
            Box::new(LfKind::Type),
        );
        assert_eq!(
            type_of_kind(&pi),
            StlcType::Arrow(Box::new(StlcType::Base), Box::new(StlcType::Base))
        );
    }

    #[test]
    fn image_of_identity_lam() {
        let id = LfObject::Lam(
            "x".into(),
            Box::new(LfKind::Type),
            Box::new(LfObject::Var("x".into())),
        );
        let img = term_of_object(&id);
        assert_eq!(
            type_check(&[], &img).unwrap(),
            StlcType::Arrow(Box::new(StlcType::Base), Box::new(StlcType::Base))
        );
    }

    #[test]
    fn substitution_commutes_with_image() {
        // A spot check mirrored by the larger property suite.
        let body = LfObject::App(
            Box::new(LfObject::Var("f".into())),
            Box::new(LfObject::Var("x".into())),
        );
        let arg = LfObject::Var("a".into());
        let substituted = crate::lf::subst_object(&body, "x", &arg);
        assert_eq!(
            term_of_object(&substituted),
            subst(&term_of_object(&body), "x", &term_of_object(&arg))
        );
    }
}

//! The traditional framework: Church-typed objects with framework-level
//! beta/eta reduction, algorithmic checking, the arity assignment, and the
//! two translations that embed the lambda-free frameworks.
//!
//! `lift` maps Church-typed lambda-free entities into this framework almost
//! literally; `nf_*` reads framework entities back as beta-normal eta-long
//! lambda-free ones, guided by the arity assignment.  Conversion is decided
//! algorithmically: normalise with beta/eta, then search for joinability
//! under the declared computation rules, oriented left to right, within a
//! fuel budget.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::arity::Arity;
use crate::error::TermError;
use crate::judgement::{Base, Context, DefinedBody, DefinedJudgement, Judgement, Kind};
use crate::spec::{Declaration, Specification};
use crate::syntax::{employ, eta_long, Abstraction, Instantiate, Object, Symbol};
use crate::tfk::{KAbstraction, KContext, KJudgement, KKind, KObject, KSpecification};

/// Framework kinds.
#[derive(Clone)]
pub enum LfKind {
    Type,
    El(LfObject),
    Pi(String, Box<LfKind>, Box<LfKind>),
}

/// Framework objects.
#[derive(Clone)]
pub enum LfObject {
    Var(String),
    Const(String),
    Lam(String, Box<LfKind>, Box<LfObject>),
    App(Box<LfObject>, Box<LfObject>),
}

pub type LfTelescope = Vec<(String, LfKind)>;

/// The five judgement forms of the framework.
#[derive(Clone, PartialEq)]
pub enum LfJudgementBody {
    Valid,
    KindWf(LfKind),
    Typing(LfObject, LfKind),
    ObjEq(LfObject, LfObject, LfKind),
    KindEq(LfKind, LfKind),
}

#[derive(Clone, PartialEq)]
pub struct LfJudgement {
    pub context: LfTelescope,
    pub body: LfJudgementBody,
}

/// Declarations of a framework specification: constants and computation
/// rules.
#[derive(Clone, PartialEq)]
pub enum LfDeclaration {
    Constant { name: String, kind: LfKind },
    Equation { telescope: LfTelescope, lhs: LfObject, rhs: LfObject, kind: LfKind },
}

#[derive(Clone, PartialEq, Default)]
pub struct LfSpecification {
    declarations: Vec<LfDeclaration>,
}

impl LfSpecification {
    pub fn empty() -> Self {
        LfSpecification { declarations: Vec::new() }
    }

    pub fn new(declarations: Vec<LfDeclaration>) -> Result<Self, LfError> {
        let mut spec = LfSpecification::empty();
        for d in declarations {
            spec.push(d)?;
        }
        Ok(spec)
    }

    pub fn push(&mut self, d: LfDeclaration) -> Result<(), LfError> {
        if let LfDeclaration::Constant { name, .. } = &d {
            if self.constant_kind(name).is_some() {
                return Err(LfError::DuplicateConstant(name.clone()));
            }
        }
        self.declarations.push(d);
        Ok(())
    }

    pub fn declarations(&self) -> &[LfDeclaration] {
        &self.declarations
    }

    pub fn constant_kind(&self, name: &str) -> Option<&LfKind> {
        self.declarations.iter().find_map(|d| match d {
            LfDeclaration::Constant { name: n, kind } if n == name => Some(kind),
            _ => None,
        })
    }

    pub fn equations(&self) -> impl Iterator<Item = (usize, &LfDeclaration)> {
        self.declarations
            .iter()
            .enumerate()
            .filter(|(_, d)| matches!(d, LfDeclaration::Equation { .. }))
    }
}

/// Fuel for the algorithmic judgements: rewrite steps are the scarce
/// resource; beta/eta normalisation gets a generous allowance of its own so
/// that conversion does not starve on large but typable terms.
pub struct Budget {
    rewrite: u64,
    norm: u64,
}

impl Budget {
    pub fn new(fuel: u64) -> Self {
        Budget { rewrite: fuel, norm: fuel.saturating_mul(64).max(4096) }
    }

    fn use_rewrite(&mut self) -> Result<(), LfError> {
        if self.rewrite == 0 {
            return Err(LfError::FuelExhausted);
        }
        self.rewrite -= 1;
        Ok(())
    }

    fn use_norm(&mut self) -> Result<(), LfError> {
        if self.norm == 0 {
            return Err(LfError::FuelExhausted);
        }
        self.norm -= 1;
        Ok(())
    }
}

#[derive(Clone, Debug, Error)]
pub enum LfError {
    #[error("unknown symbol {0}")]
    Unknown(String),
    #[error("duplicate constant {0}")]
    DuplicateConstant(String),
    #[error("duplicate context variable {0}")]
    DuplicateVariable(String),
    #[error("expected a product kind, found {0}")]
    NotAPi(String),
    #[error("conversion failed: `{left}` and `{right}` are not joinable")]
    Conversion { left: String, right: String },
    #[error("fuel exhausted")]
    FuelExhausted,
    #[error("judgement rejected: {0}")]
    Rejected(String),
}

// --- Alpha equivalence and free variables ---------------------------------

fn alpha_eq_obj(a: &LfObject, b: &LfObject, env: &mut Vec<(String, String)>) -> bool {
    match (a, b) {
        (LfObject::Var(x), LfObject::Var(y)) => {
            let lx = env.iter().rposition(|(l, _)| l == x);
            let ly = env.iter().rposition(|(_, r)| r == y);
            match (lx, ly) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (LfObject::Const(c), LfObject::Const(d)) => c == d,
        (LfObject::Lam(x, kx, bx), LfObject::Lam(y, ky, by)) => {
            if !alpha_eq_kind(kx, ky, env) {
                return false;
            }
            env.push((x.clone(), y.clone()));
            let r = alpha_eq_obj(bx, by, env);
            env.pop();
            r
        }
        (LfObject::App(f1, a1), LfObject::App(f2, a2)) => {
            alpha_eq_obj(f1, f2, env) && alpha_eq_obj(a1, a2, env)
        }
        _ => false,
    }
}

fn alpha_eq_kind(a: &LfKind, b: &LfKind, env: &mut Vec<(String, String)>) -> bool {
    match (a, b) {
        (LfKind::Type, LfKind::Type) => true,
        (LfKind::El(x), LfKind::El(y)) => alpha_eq_obj(x, y, env),
        (LfKind::Pi(x, k1, k2), LfKind::Pi(y, j1, j2)) => {
            if !alpha_eq_kind(k1, j1, env) {
                return false;
            }
            env.push((x.clone(), y.clone()));
            let r = alpha_eq_kind(k2, j2, env);
            env.pop();
            r
        }
        _ => false,
    }
}

impl PartialEq for LfObject {
    fn eq(&self, other: &Self) -> bool {
        alpha_eq_obj(self, other, &mut Vec::new())
    }
}

impl Eq for LfObject {}

impl PartialEq for LfKind {
    fn eq(&self, other: &Self) -> bool {
        alpha_eq_kind(self, other, &mut Vec::new())
    }
}

impl Eq for LfKind {}

pub fn free_vars_obj(k: &LfObject) -> BTreeSet<String> {
    fn go(k: &LfObject, bound: &mut Vec<String>, acc: &mut BTreeSet<String>) {
        match k {
            LfObject::Var(x) => {
                if !bound.contains(x) {
                    acc.insert(x.clone());
                }
            }
            LfObject::Const(_) => {}
            LfObject::Lam(x, kind, body) => {
                go_kind(kind, bound, acc);
                bound.push(x.clone());
                go(body, bound, acc);
                bound.pop();
            }
            LfObject::App(f, a) => {
                go(f, bound, acc);
                go(a, bound, acc);
            }
        }
    }
    fn go_kind(k: &LfKind, bound: &mut Vec<String>, acc: &mut BTreeSet<String>) {
        match k {
            LfKind::Type => {}
            LfKind::El(o) => go(o, bound, acc),
            LfKind::Pi(x, k1, k2) => {
                go_kind(k1, bound, acc);
                bound.push(x.clone());
                go_kind(k2, bound, acc);
                bound.pop();
            }
        }
    }
    let mut acc = BTreeSet::new();
    go(k, &mut Vec::new(), &mut acc);
    acc
}

pub fn free_vars_kind(k: &LfKind) -> BTreeSet<String> {
    match k {
        LfKind::Type => BTreeSet::new(),
        LfKind::El(o) => free_vars_obj(o),
        LfKind::Pi(x, k1, k2) => {
            let mut fv = free_vars_kind(k1);
            let mut inner = free_vars_kind(k2);
            inner.remove(x);
            fv.extend(inner);
            fv
        }
    }
}

// --- Substitution ----------------------------------------------------------

/// Capture-avoiding substitution `[v/x]k`.
pub fn subst_object(k: &LfObject, x: &str, v: &LfObject) -> LfObject {
    match k {
        LfObject::Var(y) => {
            if y == x {
                v.clone()
            } else {
                k.clone()
            }
        }
        LfObject::Const(_) => k.clone(),
        LfObject::Lam(y, kind, body) => {
            let kind = Box::new(subst_kind(kind, x, v));
            if y == x {
                return LfObject::Lam(y.clone(), kind, body.clone());
            }
            let fv = free_vars_obj(v);
            if fv.contains(y) {
                let mut fresh = y.clone();
                let fv_body = free_vars_obj(body);
                while fv.contains(&fresh) || fv_body.contains(&fresh) || fresh == x {
                    fresh.push('\'');
                }
                let renamed = subst_object(body, y, &LfObject::Var(fresh.clone()));
                LfObject::Lam(fresh, kind, Box::new(subst_object(&renamed, x, v)))
            } else {
                LfObject::Lam(y.clone(), kind, Box::new(subst_object(body, x, v)))
            }
        }
        LfObject::App(f, a) => LfObject::App(
            Box::new(subst_object(f, x, v)),
            Box::new(subst_object(a, x, v)),
        ),
    }
}

pub fn subst_kind(k: &LfKind, x: &str, v: &LfObject) -> LfKind {
    match k {
        LfKind::Type => LfKind::Type,
        LfKind::El(o) => LfKind::El(subst_object(o, x, v)),
        LfKind::Pi(y, k1, k2) => {
            let k1 = Box::new(subst_kind(k1, x, v));
            if y == x {
                return LfKind::Pi(y.clone(), k1, k2.clone());
            }
            let fv = free_vars_obj(v);
            if fv.contains(y) {
                let mut fresh = y.clone();
                let fv_k2 = free_vars_kind(k2);
                while fv.contains(&fresh) || fv_k2.contains(&fresh) || fresh == x {
                    fresh.push('\'');
                }
                let renamed = subst_kind(k2, y, &LfObject::Var(fresh.clone()));
                LfKind::Pi(fresh, k1, Box::new(subst_kind(&renamed, x, v)))
            } else {
                LfKind::Pi(y.clone(), k1, Box::new(subst_kind(k2, x, v)))
            }
        }
    }
}

// --- Reduction --------------------------------------------------------------

/// How one step was taken: framework beta, framework eta, or an oriented
/// computation rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepRule {
    Beta,
    Eta,
    Equation(usize),
}

impl fmt::Display for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepRule::Beta => write!(f, "beta"),
            StepRule::Eta => write!(f, "eta"),
            StepRule::Equation(i) => write!(f, "R{i}"),
        }
    }
}

/// Positions descend through the object structure only: `0` enters a lam
/// body or an application's function, `1` an application's argument.  Kind
/// annotations are not reduction positions; their redexes are invisible to
/// the normal-form readback and to the simply-typed image alike.
pub type LfPosition = Vec<usize>;

pub fn subobject_at<'a>(k: &'a LfObject, pos: &[usize]) -> Option<&'a LfObject> {
    match pos.split_first() {
        None => Some(k),
        Some((&i, rest)) => match (k, i) {
            (LfObject::Lam(_, _, b), 0) => subobject_at(b, rest),
            (LfObject::App(f, _), 0) => subobject_at(f, rest),
            (LfObject::App(_, a), 1) => subobject_at(a, rest),
            _ => None,
        },
    }
}

pub fn replace_at(k: &LfObject, pos: &[usize], replacement: LfObject) -> Option<LfObject> {
    match pos.split_first() {
        None => Some(replacement),
        Some((&i, rest)) => match (k, i) {
            (LfObject::Lam(x, kind, b), 0) => Some(LfObject::Lam(
                x.clone(),
                kind.clone(),
                Box::new(replace_at(b, rest, replacement)?),
            )),
            (LfObject::App(f, a), 0) => Some(LfObject::App(
                Box::new(replace_at(f, rest, replacement)?),
                a.clone(),
            )),
            (LfObject::App(f, a), 1) => Some(LfObject::App(
                f.clone(),
                Box::new(replace_at(a, rest, replacement)?),
            )),
            _ => None,
        },
    }
}

pub fn positions(k: &LfObject) -> Vec<LfPosition> {
    fn go(k: &LfObject, path: &mut LfPosition, out: &mut Vec<LfPosition>) {
        out.push(path.clone());
        match k {
            LfObject::Lam(_, _, b) => {
                path.push(0);
                go(b, path, out);
                path.pop();
            }
            LfObject::App(f, a) => {
                path.push(0);
                go(f, path, out);
                path.pop();
                path.push(1);
                go(a, path, out);
                path.pop();
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    go(k, &mut Vec::new(), &mut out);
    out
}

fn local_beta(k: &LfObject) -> Option<LfObject> {
    let LfObject::App(f, a) = k else { return None };
    let LfObject::Lam(x, _, b) = &**f else { return None };
    Some(subst_object(b, x, a))
}

fn local_eta(k: &LfObject) -> Option<LfObject> {
    let LfObject::Lam(x, _, b) = k else { return None };
    let LfObject::App(f, a) = &**b else { return None };
    if !matches!(&**a, LfObject::Var(y) if y == x) {
        return None;
    }
    if free_vars_obj(f).contains(x) {
        return None;
    }
    Some((**f).clone())
}

/// All one-step beta and eta reducts with their positions.
pub fn beta_eta_step(k: &LfObject) -> Vec<(LfObject, StepRule, LfPosition)> {
    let mut out = Vec::new();
    for pos in positions(k) {
        let sub = subobject_at(k, &pos).expect("enumerated position");
        if let Some(r) = local_beta(sub) {
            out.push((replace_at(k, &pos, r).expect("position"), StepRule::Beta, pos.clone()));
        }
        if let Some(r) = local_eta(sub) {
            out.push((replace_at(k, &pos, r).expect("position"), StepRule::Eta, pos.clone()));
        }
    }
    out
}

/// Normalise with beta then eta, leftmost-outermost, within fuel (each
/// contraction counts one unit).
pub fn normalize_beta_eta(k: &LfObject, fuel: u64) -> Result<LfObject, LfError> {
    let mut budget = Budget { rewrite: 0, norm: fuel };
    normalize_in(k, &mut budget)
}

fn normalize_in(k: &LfObject, budget: &mut Budget) -> Result<LfObject, LfError> {
    let mut current = k.clone();
    loop {
        let mut changed = false;
        // Beta to normal form first.
        'beta: loop {
            for pos in positions(&current) {
                let sub = subobject_at(&current, &pos).expect("position");
                if let Some(r) = local_beta(sub) {
                    budget.use_norm()?;
                    current = replace_at(&current, &pos, r).expect("position");
                    changed = true;
                    continue 'beta;
                }
            }
            break;
        }
        // Then eta; contracting cannot create new beta redexes in a
        // beta-normal term.
        'eta: loop {
            for pos in positions(&current) {
                let sub = subobject_at(&current, &pos).expect("position");
                if let Some(r) = local_eta(sub) {
                    budget.use_norm()?;
                    current = replace_at(&current, &pos, r).expect("position");
                    changed = true;
                    continue 'eta;
                }
            }
            break;
        }
        if !changed {
            return Ok(current);
        }
        // Loop again defensively; normally one pass suffices.
        if beta_eta_step(&current).is_empty() {
            return Ok(current);
        }
    }
}

/// Compare after beta/eta normalisation; lam annotations and El carriers are
/// compared the same way, recursively.
pub fn beta_eta_equal_obj(a: &LfObject, b: &LfObject, budget: &mut Budget) -> Result<bool, LfError> {
    let a = normalize_in(a, budget)?;
    let b = normalize_in(b, budget)?;
    nf_compare_obj(&a, &b, &mut Vec::new(), budget)
}

fn nf_compare_obj(
    a: &LfObject,
    b: &LfObject,
    env: &mut Vec<(String, String)>,
    budget: &mut Budget,
) -> Result<bool, LfError> {
    Ok(match (a, b) {
        (LfObject::Var(x), LfObject::Var(y)) => {
            let lx = env.iter().rposition(|(l, _)| l == x);
            let ly = env.iter().rposition(|(_, r)| r == y);
            match (lx, ly) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (LfObject::Const(c), LfObject::Const(d)) => c == d,
        (LfObject::Lam(x, kx, bx), LfObject::Lam(y, ky, by)) => {
            if !nf_compare_kind(kx, ky, env, budget)? {
                return Ok(false);
            }
            env.push((x.clone(), y.clone()));
            let r = nf_compare_obj(bx, by, env, budget)?;
            env.pop();
            r
        }
        (LfObject::App(f1, a1), LfObject::App(f2, a2)) => {
            nf_compare_obj(f1, f2, env, budget)? && nf_compare_obj(a1, a2, env, budget)?
        }
        _ => false,
    })
}

fn nf_compare_kind(
    a: &LfKind,
    b: &LfKind,
    env: &mut Vec<(String, String)>,
    budget: &mut Budget,
) -> Result<bool, LfError> {
    Ok(match (a, b) {
        (LfKind::Type, LfKind::Type) => true,
        (LfKind::El(x), LfKind::El(y)) => {
            let x = normalize_in(x, budget)?;
            let y = normalize_in(y, budget)?;
            nf_compare_obj(&x, &y, env, budget)?
        }
        (LfKind::Pi(x, k1, k2), LfKind::Pi(y, j1, j2)) => {
            if !nf_compare_kind(k1, j1, env, budget)? {
                return Ok(false);
            }
            env.push((x.clone(), y.clone()));
            let r = nf_compare_kind(k2, j2, env, budget)?;
            env.pop();
            r
        }
        _ => false,
    })
}

// --- Computation-rule matching ----------------------------------------------

struct LfMatchEnv {
    // (pattern binder, subject binder, subject binder kind)
    pairs: Vec<(String, String, LfKind)>,
    solution: Vec<Option<LfObject>>,
}

fn spine(k: &LfObject) -> (&LfObject, Vec<&LfObject>) {
    let mut head = k;
    let mut args = Vec::new();
    while let LfObject::App(f, a) = head {
        args.push(&**a);
        head = f;
    }
    args.reverse();
    (head, args)
}

/// Strip eta-expansions down to a bare variable, if the argument is one.
fn as_bound_var(k: &LfObject) -> Option<&str> {
    match k {
        LfObject::Var(x) => Some(x),
        LfObject::Lam(x, _, b) => {
            let LfObject::App(f, a) = &**b else { return None };
            if !matches!(&**a, LfObject::Var(y) if y == x) {
                return None;
            }
            if free_vars_obj(f).contains(x) {
                return None;
            }
            as_bound_var(f)
        }
        _ => None,
    }
}

fn match_lf_obj(
    pvars: &[(String, LfKind)],
    pat: &LfObject,
    subj: &LfObject,
    env: &mut LfMatchEnv,
) -> Option<()> {
    // Lam patterns first: allow a virtual eta-expansion of the subject.
    if let LfObject::Lam(x, kp, pb) = pat {
        return match subj {
            LfObject::Lam(y, ks, sb) => {
                env.pairs.push((x.clone(), y.clone(), (**ks).clone()));
                let r = match_lf_obj(pvars, pb, sb, env);
                env.pairs.pop();
                r
            }
            _ => {
                // Virtual eta: match the body against (subj x'), annotating
                // the virtual binder with the instantiated pattern kind.
                let kp = apply_solution_kind(kp, pvars, env)?;
                let mut fresh = format!("{x}'");
                let fv = free_vars_obj(subj);
                while fv.contains(&fresh) {
                    fresh.push('\'');
                }
                let expanded = LfObject::App(
                    Box::new(subj.clone()),
                    Box::new(LfObject::Var(fresh.clone())),
                );
                env.pairs.push((x.clone(), fresh, kp));
                let r = match_lf_obj(pvars, pb, &expanded, env);
                env.pairs.pop();
                r
            }
        };
    }
    let (phead, pargs) = spine(pat);
    if let LfObject::Var(v) = phead {
        let bound = env.pairs.iter().rposition(|(p, _, _)| p == v);
        if bound.is_none() {
            if let Some(vi) = pvars.iter().position(|(n, _)| n == v) {
                return solve_lf_var(vi, &pargs, subj, env);
            }
        }
    }
    let (shead, sargs) = spine(subj);
    match (phead, shead) {
        (LfObject::Var(p), LfObject::Var(s)) => {
            let pi = env.pairs.iter().rposition(|(pp, _, _)| pp == p);
            let si = env.pairs.iter().rposition(|(_, ss, _)| ss == s);
            match (pi, si) {
                (Some(i), Some(j)) if i == j => {}
                (None, None) if p == s => {}
                _ => return None,
            }
        }
        (LfObject::Const(c), LfObject::Const(d)) if c == d => {}
        _ => return None,
    }
    if pargs.len() != sargs.len() {
        return None;
    }
    for (p, s) in pargs.iter().zip(&sargs) {
        match_lf_obj(pvars, p, s, env)?;
    }
    Some(())
}

fn apply_solution_kind(
    k: &LfKind,
    pvars: &[(String, LfKind)],
    env: &LfMatchEnv,
) -> Option<LfKind> {
    // Substitute solved pattern variables into a pattern kind; bail out if an
    // unsolved one remains free.
    let mut out = k.clone();
    for (i, (name, _)) in pvars.iter().enumerate() {
        if free_vars_kind(&out).contains(name) {
            match &env.solution[i] {
                Some(sol) => out = subst_kind(&out, name, sol),
                None => return None,
            }
        }
    }
    Some(out)
}

fn solve_lf_var(
    vi: usize,
    pargs: &[&LfObject],
    subj: &LfObject,
    env: &mut LfMatchEnv,
) -> Option<()> {
    let mut binders: Vec<(String, LfKind)> = Vec::with_capacity(pargs.len());
    let mut used: BTreeSet<usize> = BTreeSet::new();
    for arg in pargs {
        let b = as_bound_var(arg)?;
        let idx = env.pairs.iter().rposition(|(p, _, _)| p == b)?;
        if !used.insert(idx) {
            return None;
        }
        let (_, s, k) = &env.pairs[idx];
        binders.push((s.clone(), k.clone()));
    }
    // Locally bound subject variables other than the abstracted ones must not
    // escape into the solution.
    let fv = free_vars_obj(subj);
    for (_, s, _) in &env.pairs {
        if fv.contains(s) && !binders.iter().any(|(b, _)| b == s) {
            return None;
        }
    }
    let mut candidate = subj.clone();
    for (s, k) in binders.into_iter().rev() {
        candidate = LfObject::Lam(s, Box::new(k), Box::new(candidate));
    }
    match &env.solution[vi] {
        Some(existing) => {
            if existing != &candidate {
                return None;
            }
        }
        None => env.solution[vi] = Some(candidate),
    }
    Some(())
}

/// All single oriented computation-rule steps on `k`, each verified by
/// normalising the matched instance against the subject.
pub fn rewrite_step_lf(
    spec: &LfSpecification,
    k: &LfObject,
    budget: &mut Budget,
) -> Vec<(LfObject, usize, LfPosition)> {
    let mut out = Vec::new();
    for pos in positions(k) {
        let Some(sub) = subobject_at(k, &pos) else { continue };
        for (idx, decl) in spec.equations() {
            let LfDeclaration::Equation { telescope, lhs, rhs, .. } = decl else {
                continue;
            };
            let mut env = LfMatchEnv {
                pairs: Vec::new(),
                solution: vec![None; telescope.len()],
            };
            if match_lf_obj(telescope, lhs, sub, &mut env).is_none() {
                continue;
            }
            let Some(solution) = env.solution.into_iter().collect::<Option<Vec<_>>>()
            else {
                continue;
            };
            let apply = |side: &LfObject| {
                let mut t = side.clone();
                for ((name, _), sol) in telescope.iter().zip(&solution) {
                    t = subst_object(&t, name, sol);
                }
                t
            };
            let instance = apply(lhs);
            // Soundness gate: the instantiated left side must be beta/eta
            // equal to the subject it claims to match.
            match beta_eta_equal_obj(&instance, sub, budget) {
                Ok(true) => {}
                _ => continue,
            }
            let contractum = apply(rhs);
            if let Some(result) = replace_at(k, &pos, contractum) {
                out.push((result, idx, pos.clone()));
            }
        }
    }
    out
}

/// Structural comparison of normal forms in which binder annotations are
/// themselves compared up to full convertibility: rewriting positions never
/// enter annotations, so plain joinability would miss equal kinds there.
fn conv_compare_obj(
    spec: &LfSpecification,
    a: &LfObject,
    b: &LfObject,
    env: &mut Vec<(String, String)>,
    budget: &mut Budget,
) -> Result<bool, LfError> {
    Ok(match (a, b) {
        (LfObject::Var(x), LfObject::Var(y)) => {
            let lx = env.iter().rposition(|(l, _)| l == x);
            let ly = env.iter().rposition(|(_, r)| r == y);
            match (lx, ly) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (LfObject::Const(c), LfObject::Const(d)) => c == d,
        (LfObject::Lam(x, kx, bx), LfObject::Lam(y, ky, by)) => {
            // Rename apart so the kinds compare under a common name.
            if !convertible_kind_in(spec, kx, ky, env, budget)? {
                return Ok(false);
            }
            env.push((x.clone(), y.clone()));
            let r = conv_compare_obj(spec, bx, by, env, budget)?;
            env.pop();
            r
        }
        (LfObject::App(f1, a1), LfObject::App(f2, a2)) => {
            conv_compare_obj(spec, f1, f2, env, budget)?
                && conv_compare_obj(spec, a1, a2, env, budget)?
        }
        _ => false,
    })
}

fn convertible_kind_in(
    spec: &LfSpecification,
    a: &LfKind,
    b: &LfKind,
    env: &mut Vec<(String, String)>,
    budget: &mut Budget,
) -> Result<bool, LfError> {
    Ok(match (a, b) {
        (LfKind::Type, LfKind::Type) => true,
        (LfKind::El(x), LfKind::El(y)) => convertible_obj_in(spec, x, y, env, budget)?,
        (LfKind::Pi(x, k1, k2), LfKind::Pi(y, j1, j2)) => {
            if !convertible_kind_in(spec, k1, j1, env, budget)? {
                return Ok(false);
            }
            env.push((x.clone(), y.clone()));
            let r = convertible_kind_in(spec, k2, j2, env, budget)?;
            env.pop();
            r
        }
        _ => false,
    })
}

/// Joinability under beta/eta plus the oriented computation rules.
pub fn convertible_obj(
    spec: &LfSpecification,
    a: &LfObject,
    b: &LfObject,
    budget: &mut Budget,
) -> Result<bool, LfError> {
    convertible_obj_in(spec, a, b, &mut Vec::new(), budget)
}

fn convertible_obj_in(
    spec: &LfSpecification,
    a: &LfObject,
    b: &LfObject,
    env: &mut Vec<(String, String)>,
    budget: &mut Budget,
) -> Result<bool, LfError> {
    // Rename the open variables apart via the environment by substituting
    // fresh names on the right: simpler, since rewriting and normalisation
    // work on closed-over names.  The environment is only nonempty when
    // called from the annotation comparison, where both sides' binders have
    // been pushed; resolve them by renaming b's variables to a's.
    let mut b = b.clone();
    for (l, r) in env.iter() {
        if l != r {
            b = subst_object(&b, r, &LfObject::Var(l.clone()));
        }
    }
    let a0 = normalize_in(a, budget)?;
    let b0 = normalize_in(&b, budget)?;
    if conv_compare_obj(spec, &a0, &b0, &mut Vec::new(), budget)? {
        return Ok(true);
    }
    let mut seen: [Vec<LfObject>; 2] = [vec![a0.clone()], vec![b0.clone()]];
    let mut frontier: [Vec<LfObject>; 2] = [vec![a0], vec![b0]];
    loop {
        let mut progressed = false;
        for side in 0..2 {
            let mut next = Vec::new();
            for u in std::mem::take(&mut frontier[side]) {
                for (v, _, _) in rewrite_step_lf(spec, &u, budget) {
                    budget.use_rewrite()?;
                    let v = normalize_in(&v, budget)?;
                    if seen[side].iter().any(|s| s == &v) {
                        continue;
                    }
                    for other in &seen[1 - side] {
                        if conv_compare_obj(spec, other, &v, &mut Vec::new(), budget)? {
                            return Ok(true);
                        }
                    }
                    seen[side].push(v.clone());
                    next.push(v);
                    progressed = true;
                }
            }
            frontier[side] = next;
        }
        if !progressed {
            return Ok(false);
        }
    }
}

pub fn convertible_kind(
    spec: &LfSpecification,
    a: &LfKind,
    b: &LfKind,
    budget: &mut Budget,
) -> Result<bool, LfError> {
    Ok(match (a, b) {
        (LfKind::Type, LfKind::Type) => true,
        (LfKind::El(x), LfKind::El(y)) => convertible_obj(spec, x, y, budget)?,
        (LfKind::Pi(x, k1, k2), LfKind::Pi(y, j1, j2)) => {
            if !convertible_kind(spec, k1, j1, budget)? {
                return Ok(false);
            }
            if x == y {
                convertible_kind(spec, k2, j2, budget)?
            } else {
                let mut fresh = x.clone();
                let fv: BTreeSet<String> =
                    free_vars_kind(k2).union(&free_vars_kind(j2)).cloned().collect();
                while fv.contains(&fresh) {
                    fresh.push('\'');
                }
                let v = LfObject::Var(fresh);
                let k2 = subst_kind(k2, x, &v);
                let j2 = subst_kind(j2, y, &v);
                convertible_kind(spec, &k2, &j2, budget)?
            }
        }
        _ => false,
    })
}

// --- Checking ----------------------------------------------------------------

fn lookup_ctx<'a>(ctx: &'a LfTelescope, x: &str) -> Option<&'a LfKind> {
    ctx.iter().rev().find(|(n, _)| n == x).map(|(_, k)| k)
}

/// Algorithmic kind inference.
pub fn infer(
    spec: &LfSpecification,
    ctx: &LfTelescope,
    k: &LfObject,
    budget: &mut Budget,
) -> Result<LfKind, LfError> {
    match k {
        LfObject::Var(x) => lookup_ctx(ctx, x)
            .cloned()
            .ok_or_else(|| LfError::Unknown(x.clone())),
        LfObject::Const(c) => spec
            .constant_kind(c)
            .cloned()
            .ok_or_else(|| LfError::Unknown(c.clone())),
        LfObject::Lam(x, kind, body) => {
            kind_wf(spec, ctx, kind, budget)?;
            let mut inner = ctx.clone();
            inner.push((x.clone(), (**kind).clone()));
            let body_kind = infer(spec, &inner, body, budget)?;
            Ok(LfKind::Pi(x.clone(), kind.clone(), Box::new(body_kind)))
        }
        LfObject::App(f, a) => {
            let fk = infer(spec, ctx, f, budget)?;
            let LfKind::Pi(x, dom, cod) = fk else {
                return Err(LfError::NotAPi(fk.to_string()));
            };
            check_object(spec, ctx, a, &dom, budget)?;
            Ok(subst_kind(&cod, &x, a))
        }
    }
}

/// Check an object against a kind: infer, then convert.
pub fn check_object(
    spec: &LfSpecification,
    ctx: &LfTelescope,
    k: &LfObject,
    expected: &LfKind,
    budget: &mut Budget,
) -> Result<(), LfError> {
    let found = infer(spec, ctx, k, budget)?;
    if convertible_kind(spec, &found, expected, budget)? {
        Ok(())
    } else {
        Err(LfError::Conversion {
            left: found.to_string(),
            right: expected.to_string(),
        })
    }
}

pub fn kind_wf(
    spec: &LfSpecification,
    ctx: &LfTelescope,
    k: &LfKind,
    budget: &mut Budget,
) -> Result<(), LfError> {
    match k {
        LfKind::Type => Ok(()),
        LfKind::El(o) => check_object(spec, ctx, o, &LfKind::Type, budget),
        LfKind::Pi(x, k1, k2) => {
            kind_wf(spec, ctx, k1, budget)?;
            if lookup_ctx(ctx, x).is_some() {
                // Shadowing inside kinds is fine for checking; extend anyway.
            }
            let mut inner = ctx.clone();
            inner.push((x.clone(), (**k1).clone()));
            kind_wf(spec, &inner, k2, budget)
        }
    }
}

pub fn context_valid(
    spec: &LfSpecification,
    ctx: &LfTelescope,
    budget: &mut Budget,
) -> Result<(), LfError> {
    for i in 0..ctx.len() {
        let (name, kind) = &ctx[i];
        if ctx[..i].iter().any(|(n, _)| n == name) {
            return Err(LfError::DuplicateVariable(name.clone()));
        }
        kind_wf(spec, &ctx[..i].to_vec(), kind, budget)?;
    }
    Ok(())
}

/// Check one of the five judgement forms.
pub fn check_lf(
    spec: &LfSpecification,
    j: &LfJudgement,
    fuel: u64,
) -> Result<(), LfError> {
    let mut budget = Budget::new(fuel);
    context_valid(spec, &j.context, &mut budget)?;
    match &j.body {
        LfJudgementBody::Valid => Ok(()),
        LfJudgementBody::KindWf(k) => kind_wf(spec, &j.context, k, &mut budget),
        LfJudgementBody::Typing(k, kind) => {
            kind_wf(spec, &j.context, kind, &mut budget)?;
            check_object(spec, &j.context, k, kind, &mut budget)
        }
        LfJudgementBody::ObjEq(a, b, kind) => {
            kind_wf(spec, &j.context, kind, &mut budget)?;
            check_object(spec, &j.context, a, kind, &mut budget)?;
            check_object(spec, &j.context, b, kind, &mut budget)?;
            if convertible_obj(spec, a, b, &mut budget)? {
                Ok(())
            } else {
                Err(LfError::Conversion { left: a.to_string(), right: b.to_string() })
            }
        }
        LfJudgementBody::KindEq(k1, k2) => {
            kind_wf(spec, &j.context, k1, &mut budget)?;
            kind_wf(spec, &j.context, k2, &mut budget)?;
            if convertible_kind(spec, k1, k2, &mut budget)? {
                Ok(())
            } else {
                Err(LfError::Conversion {
                    left: k1.to_string(),
                    right: k2.to_string(),
                })
            }
        }
    }
}

/// Check a specification's declarations in order.
pub fn check_lf_specification(spec: &LfSpecification, fuel: u64) -> Result<(), LfError> {
    let mut prefix = LfSpecification::empty();
    for d in spec.declarations() {
        let mut budget = Budget::new(fuel);
        match d {
            LfDeclaration::Constant { kind, .. } => {
                kind_wf(&prefix, &Vec::new(), kind, &mut budget)?;
            }
            LfDeclaration::Equation { telescope, lhs, rhs, kind } => {
                context_valid(&prefix, telescope, &mut budget)?;
                kind_wf(&prefix, telescope, kind, &mut budget)?;
                check_object(&prefix, telescope, lhs, kind, &mut budget)?;
                check_object(&prefix, telescope, rhs, kind, &mut budget)?;
            }
        }
        prefix.push(d.clone())?;
    }
    Ok(())
}

// --- Arity assignment ---------------------------------------------------------

/// The arity of a kind: base kinds are base, products concatenate.
pub fn ar_kind(k: &LfKind) -> Arity {
    match k {
        LfKind::Type | LfKind::El(_) => Arity::base(),
        LfKind::Pi(_, k1, k2) => Arity::new(vec![ar_kind(k1)]).concat(&ar_kind(k2)),
    }
}

/// The arity of an object, when defined.
pub fn ar_object(
    spec: &LfSpecification,
    ctx: &LfTelescope,
    k: &LfObject,
) -> Option<Arity> {
    match k {
        LfObject::Var(x) => lookup_ctx(ctx, x).map(ar_kind),
        LfObject::Const(c) => spec.constant_kind(c).map(ar_kind),
        LfObject::Lam(x, kind, body) => {
            let mut inner = ctx.clone();
            inner.push((x.clone(), (**kind).clone()));
            let body_ar = ar_object(spec, &inner, body)?;
            Some(Arity::new(vec![ar_kind(kind)]).concat(&body_ar))
        }
        LfObject::App(f, a) => {
            let fa = ar_object(spec, ctx, f)?;
            let aa = ar_object(spec, ctx, a)?;
            let children = fa.children();
            if children.first() == Some(&aa) {
                Some(Arity::new(children[1..].to_vec()))
            } else {
                None
            }
        }
    }
}

// --- Normal-form readback -------------------------------------------------------

#[derive(Clone, Debug, Error)]
pub enum NfError {
    #[error("object is not well-aritied: {0}")]
    NotWellAritied(String),
    #[error(transparent)]
    Term(#[from] TermError),
}

fn tf_var(name: &str, arity: Arity) -> Symbol {
    Symbol::var(name, arity)
}

/// Read an object back as a beta-normal eta-long abstraction.
pub fn nf_object(
    spec: &LfSpecification,
    ctx: &LfTelescope,
    k: &LfObject,
) -> Result<Abstraction<()>, NfError> {
    match k {
        LfObject::Var(x) => {
            let kind =
                lookup_ctx(ctx, x).ok_or_else(|| NfError::NotWellAritied(x.clone()))?;
            Ok(eta_long(&tf_var(x, ar_kind(kind))))
        }
        LfObject::Const(c) => {
            let kind = spec
                .constant_kind(c)
                .ok_or_else(|| NfError::NotWellAritied(c.clone()))?;
            Ok(eta_long(&Symbol::constant(c.clone(), ar_kind(kind))))
        }
        LfObject::Lam(x, kind, body) => {
            let mut inner = ctx.clone();
            inner.push((x.clone(), (**kind).clone()));
            let inner_nf = nf_object(spec, &inner, body)?;
            // Prepend the binder.
            let sym = tf_var(x, ar_kind(kind));
            let mut binders = vec![(sym, ())];
            binders.extend(inner_nf.binders().to_vec());
            Ok(Abstraction::new(binders, inner_nf.body().clone())?)
        }
        LfObject::App(f, a) => {
            let fa = nf_object(spec, ctx, f)?;
            let aa = nf_object(spec, ctx, a)?;
            Ok(employ(&fa, &aa)?)
        }
    }
}

/// Read an object of base arity back as an object.
pub fn nf_object_base(
    spec: &LfSpecification,
    ctx: &LfTelescope,
    k: &LfObject,
) -> Result<Object<()>, NfError> {
    let abs = nf_object(spec, ctx, k)?;
    abs.as_object().cloned().ok_or_else(|| {
        NfError::NotWellAritied(format!("expected base arity, found {}", abs.arity()))
    })
}

pub fn nf_kind(
    spec: &LfSpecification,
    ctx: &LfTelescope,
    k: &LfKind,
) -> Result<Kind<()>, NfError> {
    match k {
        LfKind::Type => Ok(Kind::ty()),
        LfKind::El(o) => Ok(Kind::el(nf_object_base(spec, ctx, o)?)),
        LfKind::Pi(x, k1, k2) => {
            let entry_kind = nf_kind(spec, ctx, k1)?;
            let sym = tf_var(x, ar_kind(k1));
            let mut inner = ctx.clone();
            inner.push((x.clone(), (**k1).clone()));
            let rest = nf_kind(spec, &inner, k2)?;
            let mut telescope = vec![(sym, entry_kind)];
            telescope.extend(rest.telescope().to_vec());
            Ok(Kind::new(telescope, rest.target().clone())?)
        }
    }
}

pub fn nf_context(
    spec: &LfSpecification,
    ctx: &LfTelescope,
) -> Result<Context<()>, NfError> {
    let mut out = Context::empty();
    for i in 0..ctx.len() {
        let (name, kind) = &ctx[i];
        let nf = nf_kind(spec, &ctx[..i].to_vec(), kind)?;
        let sym = tf_var(name, ar_kind(kind));
        out = out.extended(sym, nf)?;
    }
    Ok(out)
}

/// The readback of a judgement: validity maps to a primitive judgement, the
/// other forms to defined judgements.
pub enum NfJudgement {
    Primitive(Judgement<()>),
    Defined(DefinedJudgement<()>),
}

pub fn nf_judgement(
    spec: &LfSpecification,
    j: &LfJudgement,
) -> Result<NfJudgement, NfError> {
    let ctx = nf_context(spec, &j.context)?;
    Ok(match &j.body {
        LfJudgementBody::Valid => NfJudgement::Primitive(Judgement::valid(ctx)),
        LfJudgementBody::KindWf(k) => NfJudgement::Defined(DefinedJudgement {
            context: ctx,
            body: DefinedBody::KindWf(nf_kind(spec, &j.context, k)?),
        }),
        LfJudgementBody::KindEq(k1, k2) => NfJudgement::Defined(DefinedJudgement {
            context: ctx,
            body: DefinedBody::KindEq(
                nf_kind(spec, &j.context, k1)?,
                nf_kind(spec, &j.context, k2)?,
            ),
        }),
        LfJudgementBody::Typing(k, kind) => NfJudgement::Defined(DefinedJudgement {
            context: ctx,
            body: DefinedBody::AbsTyping(
                nf_object(spec, &j.context, k)?,
                nf_kind(spec, &j.context, kind)?,
            ),
        }),
        LfJudgementBody::ObjEq(a, b, kind) => NfJudgement::Defined(DefinedJudgement {
            context: ctx,
            body: DefinedBody::AbsEq(
                nf_object(spec, &j.context, a)?,
                nf_object(spec, &j.context, b)?,
                nf_kind(spec, &j.context, kind)?,
            ),
        }),
    })
}

/// Read a specification back into the lambda-free framework.  An equation at
/// a product kind folds its telescope into the declaration telescope.
pub fn nf_specification(spec: &LfSpecification) -> Result<Specification<()>, NfError> {
    let mut out = Specification::empty();
    for d in spec.declarations() {
        match d {
            LfDeclaration::Constant { name, kind } => {
                let k = nf_kind(spec, &Vec::new(), kind)?;
                let sym = Symbol::constant(name.clone(), k.arity());
                out.push(Declaration::Constant { symbol: sym, kind: k })
                    .map_err(NfError::Term)?;
            }
            LfDeclaration::Equation { telescope, lhs, rhs, kind } => {
                let delta = nf_context(spec, telescope)?;
                let k = nf_kind(spec, telescope, kind)?;
                let l = nf_object(spec, telescope, lhs)?;
                let r = nf_object(spec, telescope, rhs)?;
                let (delta, l, r, target) = if k.is_base() {
                    let l = l.as_object().cloned().ok_or_else(|| {
                        NfError::NotWellAritied("equation side is not base".into())
                    })?;
                    let r = r.as_object().cloned().ok_or_else(|| {
                        NfError::NotWellAritied("equation side is not base".into())
                    })?;
                    (delta, l, r, k.target().clone())
                } else {
                    // Fold the kind telescope into the declaration telescope,
                    // aligning both sides on its domain.
                    let mut avoid: BTreeSet<String> =
                        delta.entries().iter().map(|(s, _)| s.name.clone()).collect();
                    for s in Instantiate::<()>::free_vars(&l) {
                        avoid.insert(s.name);
                    }
                    for s in Instantiate::<()>::free_vars(&r) {
                        avoid.insert(s.name);
                    }
                    let (tel, target) = k.open_avoiding(&avoid);
                    let doms: Vec<Symbol> = tel.iter().map(|(s, _)| s.clone()).collect();
                    let (_, l) = crate::judgement::rename_binders_to(&l, &doms)
                        .map_err(|e| NfError::NotWellAritied(e.to_string()))?;
                    let (_, r) = crate::judgement::rename_binders_to(&r, &doms)
                        .map_err(|e| NfError::NotWellAritied(e.to_string()))?;
                    let mut delta2 = delta;
                    for (s, kk) in tel {
                        delta2 = delta2.extended(s, kk).map_err(NfError::Term)?;
                    }
                    (delta2, l, r, target)
                };
                out.push(Declaration::Equation { telescope: delta, lhs: l, rhs: r, target })
                    .map_err(NfError::Term)?;
            }
        }
    }
    Ok(out)
}

// --- Lifting --------------------------------------------------------------------

pub fn lift_object(m: &KObject) -> LfObject {
    let head = if m.head().is_variable() {
        LfObject::Var(m.head().name.clone())
    } else {
        LfObject::Const(m.head().name.clone())
    };
    m.args().iter().fold(head, |acc, arg| {
        LfObject::App(Box::new(acc), Box::new(lift_abstraction(arg)))
    })
}

pub fn lift_abstraction(f: &KAbstraction) -> LfObject {
    let mut out = lift_object(f.body());
    for (s, ann) in f.binders().iter().rev() {
        out = LfObject::Lam(s.name.clone(), Box::new(lift_kind(&ann.0)), Box::new(out));
    }
    out
}

pub fn lift_kind(k: &KKind) -> LfKind {
    let mut out = match k.target() {
        Base::Type => LfKind::Type,
        Base::El(m) => LfKind::El(lift_object(m)),
    };
    for (s, kk) in k.telescope().iter().rev() {
        out = LfKind::Pi(s.name.clone(), Box::new(lift_kind(kk)), Box::new(out));
    }
    out
}

pub fn lift_context(ctx: &KContext) -> LfTelescope {
    ctx.entries()
        .iter()
        .map(|(s, k)| (s.name.clone(), lift_kind(k)))
        .collect()
}

pub fn lift_judgement(j: &KJudgement) -> LfJudgement {
    let context = lift_context(&j.context);
    let body = match &j.body {
        crate::judgement::JudgementBody::Valid => LfJudgementBody::Valid,
        crate::judgement::JudgementBody::Typing(m, t) => LfJudgementBody::Typing(
            lift_object(m),
            lift_kind(&Kind::base(t.clone())),
        ),
        crate::judgement::JudgementBody::Equal(m, n, t) => LfJudgementBody::ObjEq(
            lift_object(m),
            lift_object(n),
            lift_kind(&Kind::base(t.clone())),
        ),
    };
    LfJudgement { context, body }
}

pub fn lift_specification(spec: &KSpecification) -> LfSpecification {
    let mut out = LfSpecification::empty();
    for d in spec.declarations() {
        let lifted = match d {
            Declaration::Constant { symbol, kind } => LfDeclaration::Constant {
                name: symbol.name.clone(),
                kind: lift_kind(kind),
            },
            Declaration::Equation { telescope, lhs, rhs, target } => {
                LfDeclaration::Equation {
                    telescope: lift_context(telescope),
                    lhs: lift_object(lhs),
                    rhs: lift_object(rhs),
                    kind: lift_kind(&Kind::base(target.clone())),
                }
            }
        };
        out.push(lifted).expect("lifting preserves well-formed specifications");
    }
    out
}

// --- Normalisation probe ----------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Terminal {
    Normal,
    FuelExhausted,
}

#[derive(Clone)]
pub struct TraceStep {
    pub term: LfObject,
    pub rule: StepRule,
    pub position: LfPosition,
}

/// A reduction trace under rules, beta and eta, leftmost-outermost.
#[derive(Clone)]
pub struct ReductionTrace {
    pub initial: LfObject,
    pub steps: Vec<TraceStep>,
    pub terminal: Terminal,
}

/// The result of a normalisation probe: the trace together with the
/// lambda-free images of every intermediate term, and whether the images
/// behaved as the embedding predicts (invariant across beta/eta steps,
/// changed across rule steps).
pub struct SnProbe {
    pub trace: ReductionTrace,
    pub nf_images: Vec<Abstraction<()>>,
    pub nf_invariant_on_beta_eta: bool,
    pub nf_changed_on_rules: bool,
}

/// Exhaustively reduce a typable object, recording the trace and the
/// lambda-free image at every step.
pub fn sn_probe(
    spec: &LfSpecification,
    ctx: &LfTelescope,
    k: &LfObject,
    fuel: u64,
) -> Result<SnProbe, LfError> {
    {
        let mut budget = Budget::new(fuel);
        context_valid(spec, ctx, &mut budget)?;
        infer(spec, ctx, k, &mut budget)?;
    }
    let nf_of = |t: &LfObject| {
        nf_object(spec, ctx, t).map_err(|e| LfError::Rejected(e.to_string()))
    };
    let mut steps = Vec::new();
    let mut nf_images = vec![nf_of(k)?];
    let mut current = k.clone();
    let mut invariant = true;
    let mut changed = true;
    let mut remaining = fuel;
    let mut scratch = Budget::new(fuel);
    let terminal = loop {
        if remaining == 0 {
            break Terminal::FuelExhausted;
        }
        scratch.norm = scratch.norm.max(4096);
        let Some((next, rule, position)) = leftmost_step(spec, &current, &mut scratch)
        else {
            break Terminal::Normal;
        };
        remaining = remaining.saturating_sub(1);
        let image = nf_of(&next)?;
        let previous = nf_images.last().expect("nonempty");
        match rule {
            StepRule::Beta | StepRule::Eta => {
                if previous != &image {
                    invariant = false;
                }
            }
            StepRule::Equation(_) => {
                if previous == &image {
                    changed = false;
                }
            }
        }
        nf_images.push(image);
        steps.push(TraceStep { term: next.clone(), rule, position });
        current = next;
    };
    Ok(SnProbe {
        trace: ReductionTrace { initial: k.clone(), steps, terminal },
        nf_images,
        nf_invariant_on_beta_eta: invariant,
        nf_changed_on_rules: changed,
    })
}

/// The leftmost-outermost applicable step: at each position in preorder, the
/// oriented rules are tried in declaration order, then beta, then eta.
fn leftmost_step(
    spec: &LfSpecification,
    k: &LfObject,
    budget: &mut Budget,
) -> Option<(LfObject, StepRule, LfPosition)> {
    for pos in positions(k) {
        let sub = subobject_at(k, &pos).expect("position");
        for (idx, decl) in spec.equations() {
            let LfDeclaration::Equation { telescope, lhs, rhs, .. } = decl else {
                continue;
            };
            let mut env = LfMatchEnv {
                pairs: Vec::new(),
                solution: vec![None; telescope.len()],
            };
            if match_lf_obj(telescope, lhs, sub, &mut env).is_none() {
                continue;
            }
            let Some(solution) = env.solution.into_iter().collect::<Option<Vec<_>>>()
            else {
                continue;
            };
            let apply = |side: &LfObject| {
                let mut t = side.clone();
                for ((name, _), sol) in telescope.iter().zip(&solution) {
                    t = subst_object(&t, name, sol);
                }
                t
            };
            if !matches!(beta_eta_equal_obj(&apply(lhs), sub, budget), Ok(true)) {
                continue;
            }
            let result = replace_at(k, &pos, apply(rhs)).expect("position");
            return Some((result, StepRule::Equation(idx), pos));
        }
        if let Some(r) = local_beta(sub) {
            return Some((
                replace_at(k, &pos, r).expect("position"),
                StepRule::Beta,
                pos,
            ));
        }
        if let Some(r) = local_eta(sub) {
            return Some((
                replace_at(k, &pos, r).expect("position"),
                StepRule::Eta,
                pos,
            ));
        }
    }
    None
}

// --- Display -----------------------------------------------------------------------

impl fmt::Display for LfObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LfObject::Var(x) | LfObject::Const(x) => write!(f, "{x}"),
            LfObject::Lam(x, k, b) => write!(f, "\\{x} : {k}. {b}"),
            LfObject::App(g, a) => {
                match **g {
                    LfObject::Lam(..) => write!(f, "({g})")?,
                    _ => write!(f, "{g}")?,
                }
                write!(f, " ")?;
                match **a {
                    LfObject::Var(_) | LfObject::Const(_) => write!(f, "{a}"),
                    _ => write!(f, "({a})"),
                }
            }
        }
    }
}

impl fmt::Display for LfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LfKind::Type => write!(f, "Type"),
            LfKind::El(o) => match o {
                LfObject::Var(_) | LfObject::Const(_) => write!(f, "El {o}"),
                _ => write!(f, "El ({o})"),
            },
            LfKind::Pi(x, k1, k2) => write!(f, "({x} : {k1}) {k2}"),
        }
    }
}

impl fmt::Debug for LfObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for LfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LfJudgement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, k)) in self.context.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n} : {k}")?;
        }
        if !self.context.is_empty() {
            write!(f, " ")?;
        }
        match &self.body {
            LfJudgementBody::Valid => write!(f, "valid"),
            LfJudgementBody::KindWf(k) => write!(f, "|- {k} kind"),
            LfJudgementBody::Typing(o, k) => write!(f, "|- {o} : {k}"),
            LfJudgementBody::ObjEq(a, b, k) => write!(f, "|- {a} = {b} : {k}"),
            LfJudgementBody::KindEq(a, b) => write!(f, "|- {a} = {b}"),
        }
    }
}

impl fmt::Display for LfDeclaration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LfDeclaration::Constant { name, kind } => write!(f, "const {name} : {kind}."),
            LfDeclaration::Equation { telescope, lhs, rhs, kind } => {
                write!(f, "eq (")?;
                for (i, (n, k)) in telescope.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{n} : {k}")?;
                }
                write!(f, ") ({lhs} = {rhs} : {kind}).")
            }
        }
    }
}

impl fmt::Display for LfSpecification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.declarations {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::tfk::label_specification;

    fn var(x: &str) -> LfObject {
        LfObject::Var(x.into())
    }

    fn lam(x: &str, k: LfKind, b: LfObject) -> LfObject {
        LfObject::Lam(x.into(), Box::new(k), Box::new(b))
    }

    fn app(f: LfObject, a: LfObject) -> LfObject {
        LfObject::App(Box::new(f), Box::new(a))
    }

    fn lifted_sigma_pi() -> LfSpecification {
        lift_specification(&label_specification(&fixtures::sigma_pi()).unwrap())
    }

    #[test]
    fn substitution_basics() {
        let a = LfObject::Const("a".into());
        assert_eq!(subst_object(&var("x"), "x", &a), a);
        let t = lam("y", LfKind::Type, app(var("x"), var("y")));
        let out = subst_object(&t, "x", &a);
        assert_eq!(out, lam("y", LfKind::Type, app(a.clone(), var("y"))));
    }

    #[test]
    fn substitution_avoids_capture() {
        // [y/x](\y : Type. x) must rename the binder.
        let t = lam("y", LfKind::Type, var("x"));
        let out = subst_object(&t, "x", &var("y"));
        let expected = lam("y'", LfKind::Type, var("y"));
        assert_eq!(out, expected);
    }

    #[test]
    fn beta_step_contracts() {
        let t = app(lam("x", LfKind::Type, var("x")), LfObject::Const("A".into()));
        let steps = beta_eta_step(&t);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].0, LfObject::Const("A".into()));
        assert_eq!(steps[0].1, StepRule::Beta);
    }

    #[test]
    fn eta_step_contracts() {
        let t = lam("x", LfKind::Type, app(var("f"), var("x")));
        let steps = beta_eta_step(&t);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].0, var("f"));
        assert_eq!(steps[0].1, StepRule::Eta);
    }

    #[test]
    fn bare_variable_is_normal() {
        assert!(beta_eta_step(&var("x")).is_empty());
    }

    #[test]
    fn untypable_loop_exhausts_fuel() {
        let omega_half = lam("x", LfKind::Type, app(var("x"), var("x")));
        let omega = app(omega_half.clone(), omega_half);
        assert!(matches!(
            normalize_beta_eta(&omega, 100),
            Err(LfError::FuelExhausted)
        ));
    }

    #[test]
    fn checking_a_variable() {
        let spec = LfSpecification::empty();
        let j = LfJudgement {
            context: vec![("A".into(), LfKind::Type)],
            body: LfJudgementBody::Typing(var("A"), LfKind::Type),
        };
        check_lf(&spec, &j, 64).unwrap();
    }

    #[test]
    fn wrong_annotation_is_rejected() {
        let spec = LfSpecification::empty();
        // \x : Type. x against (x : El A) Type under A : Type, a mismatch.
        let j = LfJudgement {
            context: vec![("A".into(), LfKind::Type)],
            body: LfJudgementBody::Typing(
                lam("x", LfKind::Type, var("x")),
                LfKind::Pi(
                    "x".into(),
                    Box::new(LfKind::El(var("A"))),
                    Box::new(LfKind::Type),
                ),
            ),
        };
        assert!(check_lf(&spec, &j, 64).is_err());
    }

    #[test]
    fn arity_of_kinds() {
        assert_eq!(ar_kind(&LfKind::Type), Arity::base());
        let pi = LfKind::Pi("x".into(), Box::new(LfKind::Type), Box::new(LfKind::Type));
        assert_eq!(ar_kind(&pi), Arity::first_order(1));
    }

    #[test]
    fn self_application_has_no_arity() {
        let spec = LfSpecification::empty();
        let ctx = vec![("x".to_string(), LfKind::Type)];
        assert!(ar_object(&spec, &ctx, &app(var("x"), var("x"))).is_none());
    }

    #[test]
    fn nf_of_variable_is_eta_long() {
        let spec = LfSpecification::empty();
        let pi = LfKind::Pi("y".into(), Box::new(LfKind::Type), Box::new(LfKind::Type));
        let ctx = vec![("x".to_string(), pi)];
        let out = nf_object(&spec, &ctx, &var("x")).unwrap();
        assert_eq!(out, eta_long(&Symbol::var("x", Arity::first_order(1))));
    }

    #[test]
    fn nf_contracts_redexes() {
        // NF((\x : Type. x) A) = A for a declared constant A.
        let spec = LfSpecification::new(vec![LfDeclaration::Constant {
            name: "A".into(),
            kind: LfKind::Type,
        }])
        .unwrap();
        let t = app(lam("x", LfKind::Type, var("x")), LfObject::Const("A".into()));
        let out = nf_object_base(&spec, &Vec::new(), &t).unwrap();
        assert_eq!(
            out,
            Object::leaf(Symbol::constant("A", Arity::base())).unwrap()
        );
    }

    #[test]
    fn lifted_sigma_pi_checks() {
        let spec = lifted_sigma_pi();
        check_lf_specification(&spec, 256).unwrap();
    }

    #[test]
    fn lifted_equation_instance_checks_as_equality() {
        let spec = lifted_sigma_pi();
        let LfDeclaration::Equation { telescope, lhs, rhs, kind } =
            spec.equations().next().unwrap().1.clone()
        else {
            panic!("expected an equation");
        };
        let j = LfJudgement {
            context: telescope,
            body: LfJudgementBody::ObjEq(lhs, rhs, kind),
        };
        check_lf(&spec, &j, 256).unwrap();
    }

    #[test]
    fn nf_of_lifted_spec_is_the_original() {
        let original = fixtures::sigma_pi();
        let spec = lifted_sigma_pi();
        let back = nf_specification(&spec).unwrap();
        assert_eq!(back, original);
    }

    #[test]
    fn sn_probe_on_lifted_redex() {
        let spec = lifted_sigma_pi();
        let LfDeclaration::Equation { telescope, lhs, .. } =
            spec.equations().next().unwrap().1.clone()
        else {
            panic!("expected an equation");
        };
        let probe = sn_probe(&spec, &telescope, &lhs, 256).unwrap();
        assert_eq!(probe.trace.terminal, Terminal::Normal);
        assert!(!probe.trace.steps.is_empty());
        assert_eq!(probe.trace.steps[0].rule, StepRule::Equation(3));
        assert!(probe.nf_invariant_on_beta_eta);
        assert!(probe.nf_changed_on_rules);
    }

    #[test]
    fn sn_probe_on_normal_object_is_empty() {
        let spec = lifted_sigma_pi();
        let ctx = vec![("A".to_string(), LfKind::Type)];
        let probe = sn_probe(&spec, &ctx, &var("A"), 64).unwrap();
        assert!(probe.trace.steps.is_empty());
        assert_eq!(probe.trace.terminal, Terminal::Normal);
    }
}

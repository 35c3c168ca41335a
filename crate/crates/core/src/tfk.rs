//! The Church-typed framework TFk: binders carry kind labels.
//!
//! TFk shares the generic syntax and judgement machinery with the
//! Curry-typed framework; the annotation payload is a kind, and the defined
//! judgement forms for abstractions additionally compare the declared
//! telescope against the binder labels.
//!
//! Two translations connect the frameworks: erasing the labels (`erase_*`,
//! exact and total) and filling them in (`label_*`, partial: defined exactly
//! when every head is declared).  Erasure is an exact left inverse of
//! labelling; labelling inverts erasure only up to judgemental equality.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::Hasher;

use thiserror::Error;

use crate::check::{Derivation, EqInstance};
use crate::error::TermError;
use crate::judgement::{Base, Context, Judgement, JudgementBody, Kind};
use crate::spec::{Declaration, Specification};
use crate::syntax::{
    Abstraction, AlphaEnv, Ann, HashEnv, Instantiate, Measure, Object, Symbol,
};

/// The binder label of the Church-typed framework: a kind.
#[derive(Clone, PartialEq, Eq)]
pub struct KindAnn(pub Kind<KindAnn>);

impl fmt::Debug for KindAnn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Ann for KindAnn {
    const KINDED: bool = true;

    fn size(&self) -> usize {
        self.0.size()
    }

    fn free_vars_into(&self, bound: &mut Vec<Symbol>, acc: &mut BTreeSet<Symbol>) {
        Instantiate::<KindAnn>::free_vars_into(&self.0, bound, acc);
    }

    fn alpha_eq(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        self.0.alpha_eq(&other.0, env)
    }

    fn alpha_hash<H: Hasher>(&self, env: &mut HashEnv, state: &mut H) {
        self.0.alpha_hash(env, state);
    }

    fn rename_free(&self, from: &Symbol, to: &Symbol) -> Self {
        KindAnn(self.0.rename_free(from, to))
    }

    fn instantiate_in(
        &self,
        f: &Abstraction<Self>,
        x: &Symbol,
        parent: Option<Measure>,
    ) -> Result<Self, TermError> {
        Ok(KindAnn(self.0.instantiate_in(f, x, parent)?))
    }

    fn constants_into(&self, acc: &mut BTreeSet<Symbol>) {
        crate::spec::collect_kind_constants(&self.0, acc);
    }

    fn kind(&self) -> Option<Kind<Self>> {
        Some(self.0.clone())
    }

    fn fmt_binder(&self, sym: &Symbol, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {}", sym.name, self.0)
    }
}

pub type KObject = Object<KindAnn>;
pub type KAbstraction = Abstraction<KindAnn>;
pub type KKind = Kind<KindAnn>;
pub type KBase = Base<KindAnn>;
pub type KContext = Context<KindAnn>;
pub type KJudgement = Judgement<KindAnn>;
pub type KDerivation = Derivation<KindAnn>;
pub type KSpecification = Specification<KindAnn>;
pub type KDeclaration = Declaration<KindAnn>;

/// The eta-long form `z^K` of a symbol considered at kind `K`.
pub fn eta_long_at(z: &Symbol, k: &KKind) -> Result<KAbstraction, TermError> {
    if z.arity != k.arity() {
        return Err(TermError::EntryArity {
            name: z.name.clone(),
            var_arity: z.arity.clone(),
            kind_arity: k.arity(),
        });
    }
    let mut avoid = BTreeSet::new();
    avoid.insert(z.name.clone());
    eta_long_at_avoiding(z, k, &avoid)
}

fn eta_long_at_avoiding(
    z: &Symbol,
    k: &KKind,
    avoid: &BTreeSet<String>,
) -> Result<KAbstraction, TermError> {
    let (telescope, _) = k.open_avoiding(avoid);
    let mut taken = avoid.clone();
    for (s, _) in &telescope {
        taken.insert(s.name.clone());
    }
    let args = telescope
        .iter()
        .map(|(s, kk)| eta_long_at_avoiding(s, kk, &taken))
        .collect::<Result<Vec<_>, _>>()?;
    let body = Object::new(z.clone(), args)?;
    Abstraction::new(
        telescope.into_iter().map(|(s, kk)| (s, KindAnn(kk))).collect(),
        body,
    )
}

// --- Erasure -------------------------------------------------------------

pub fn erase_object(m: &KObject) -> Object<()> {
    let args = m.args().iter().map(erase_abstraction).collect();
    Object::new(m.head().clone(), args).expect("erasure preserves arities")
}

pub fn erase_abstraction(f: &KAbstraction) -> Abstraction<()> {
    let binders = f.binders().iter().map(|(s, _)| (s.clone(), ())).collect();
    Abstraction::new(binders, erase_object(f.body())).expect("erasure preserves binders")
}

pub fn erase_base(b: &KBase) -> Base<()> {
    match b {
        Base::Type => Base::Type,
        Base::El(a) => Base::El(erase_object(a)),
    }
}

pub fn erase_kind(k: &KKind) -> Kind<()> {
    let telescope = k
        .telescope()
        .iter()
        .map(|(s, kk)| (s.clone(), erase_kind(kk)))
        .collect();
    Kind::new(telescope, erase_base(k.target())).expect("erasure preserves telescopes")
}

pub fn erase_context(ctx: &KContext) -> Context<()> {
    Context::new(
        ctx.entries()
            .iter()
            .map(|(s, k)| (s.clone(), erase_kind(k)))
            .collect(),
    )
    .expect("erasure preserves contexts")
}

pub fn erase_judgement(j: &KJudgement) -> Judgement<()> {
    let context = erase_context(&j.context);
    match &j.body {
        JudgementBody::Valid => Judgement::valid(context),
        JudgementBody::Typing(m, t) => {
            Judgement::typing(context, erase_object(m), erase_base(t))
        }
        JudgementBody::Equal(m, n, t) => {
            Judgement::equal(context, erase_object(m), erase_object(n), erase_base(t))
        }
    }
}

pub fn erase_declaration(d: &KDeclaration) -> Declaration<()> {
    match d {
        Declaration::Constant { symbol, kind } => Declaration::Constant {
            symbol: symbol.clone(),
            kind: erase_kind(kind),
        },
        Declaration::Equation { telescope, lhs, rhs, target } => Declaration::Equation {
            telescope: erase_context(telescope),
            lhs: erase_object(lhs),
            rhs: erase_object(rhs),
            target: erase_base(target),
        },
    }
}

pub fn erase_specification(spec: &KSpecification) -> Specification<()> {
    Specification::new(spec.declarations().iter().map(erase_declaration).collect())
        .expect("erasure preserves declarations")
}

/// Erase a derivation.  The image of every rule is the same rule on erased
/// judgements, except that the premises standing for the label-equality
/// members of the Church-typed expansions have no Curry-typed counterpart
/// and are dropped: the remaining premises are matched, in order, against
/// the erased node's own expansion.
pub fn erase_derivation(
    spec: &Specification<()>,
    d: &KDerivation,
) -> Result<Derivation<()>, crate::judgement::ExpandError> {
    use crate::check::Rule;
    use crate::judgement::{expand, DefinedBody, DefinedJudgement, ExpandError};

    let premises: Vec<Derivation<()>> = d
        .premises
        .iter()
        .map(|p| erase_derivation(spec, p))
        .collect::<Result<_, _>>()?;
    let conclusion = erase_judgement(&d.conclusion);
    let instance = d.instance.as_ref().map(|i| EqInstance {
        equation: i.equation,
        args: i.args.iter().map(erase_abstraction).collect(),
    });
    let expansion: Option<DefinedJudgement<()>> = match d.rule {
        Rule::Ctxt => {
            let (gamma, (_, k)) = conclusion
                .context
                .split_last()
                .ok_or_else(|| ExpandError::Undefined("empty context".into()))?;
            let k = k.clone();
            Some(DefinedJudgement { context: gamma, body: DefinedBody::KindWf(k) })
        }
        Rule::Var | Rule::Const => match &conclusion.body {
            JudgementBody::Typing(m, _) => {
                let kind = head_kind(spec, &conclusion.context, m.head())?;
                let theta = Context::new(kind.telescope().to_vec())
                    .map_err(ExpandError::Term)?;
                Some(DefinedJudgement {
                    context: conclusion.context.clone(),
                    body: DefinedBody::SeqSat(m.args().to_vec(), theta),
                })
            }
            _ => None,
        },
        Rule::VarEq | Rule::ConstEq => match &conclusion.body {
            JudgementBody::Equal(m, n, _) => {
                let kind = head_kind(spec, &conclusion.context, m.head())?;
                let theta = Context::new(kind.telescope().to_vec())
                    .map_err(ExpandError::Term)?;
                Some(DefinedJudgement {
                    context: conclusion.context.clone(),
                    body: DefinedBody::SeqEq(m.args().to_vec(), n.args().to_vec(), theta),
                })
            }
            _ => None,
        },
        Rule::Eq => {
            let inst = instance
                .as_ref()
                .ok_or_else(|| ExpandError::Undefined("missing instance".into()))?;
            match spec.declarations().get(inst.equation) {
                Some(Declaration::Equation { telescope, .. }) => Some(DefinedJudgement {
                    context: conclusion.context.clone(),
                    body: DefinedBody::SeqSat(inst.args.clone(), telescope.clone()),
                }),
                _ => return Err(ExpandError::Undefined("bad equation index".into())),
            }
        }
        _ => None,
    };
    let premises = match expansion {
        None => premises,
        Some(dj) => {
            let members = expand(&dj)?;
            let mut used = vec![false; premises.len()];
            let mut selected = Vec::with_capacity(members.len());
            for member in &members {
                let idx = premises
                    .iter()
                    .enumerate()
                    .position(|(i, p)| !used[i] && member.matches(&p.conclusion))
                    .ok_or_else(|| {
                        ExpandError::Undefined(format!(
                            "no erased premise concludes `{}`",
                            member.judgement
                        ))
                    })?;
                used[idx] = true;
                selected.push(premises[idx].clone());
            }
            selected
        }
    };
    Ok(Derivation { rule: d.rule, premises, conclusion, instance })
}

fn head_kind<'s>(
    spec: &'s Specification<()>,
    ctx: &'s Context<()>,
    head: &Symbol,
) -> Result<&'s Kind<()>, crate::judgement::ExpandError> {
    let found = if head.is_variable() {
        ctx.lookup(head)
    } else {
        spec.constant_kind(head)
    };
    found.ok_or_else(|| {
        crate::judgement::ExpandError::Undefined(format!("no declaration for {}", head.name))
    })
}

// --- Labelling -----------------------------------------------------------

/// Failures of the labelling translation: it is defined only relative to a
/// specification and context that declare every head.
#[derive(Clone, Debug, Error)]
pub enum LabelError {
    #[error("constant {0} is not declared in the specification")]
    UndefinedConstant(String),
    #[error("variable {0} is not declared in the context")]
    UndefinedVariable(String),
    #[error("hint arity {hint} does not match subject arity {subject}")]
    HintArity { hint: String, subject: String },
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Expand(#[from] crate::judgement::ExpandError),
}

/// Fill in the kind labels of an object, looking binder kinds up from the
/// heads' declarations.
pub fn label_object(
    spec: &Specification<()>,
    ctx: &Context<()>,
    m: &Object<()>,
) -> Result<KObject, LabelError> {
    let head = m.head();
    let kind = if head.is_variable() {
        ctx.lookup(head)
            .ok_or_else(|| LabelError::UndefinedVariable(head.name.clone()))?
            .clone()
    } else {
        spec.constant_kind(head)
            .ok_or_else(|| LabelError::UndefinedConstant(head.name.clone()))?
            .clone()
    };
    let theta = Context::new(kind.telescope().to_vec())?;
    let args = label_sequence(spec, ctx, m.args(), &theta)?;
    Ok(Object::new(head.clone(), args)?)
}

/// Label an abstraction against its intended kind.
pub fn label_abstraction(
    spec: &Specification<()>,
    ctx: &Context<()>,
    f: &Abstraction<()>,
    hint: &Kind<()>,
) -> Result<KAbstraction, LabelError> {
    if f.arity() != hint.arity() {
        return Err(LabelError::HintArity {
            hint: hint.arity().to_string(),
            subject: f.arity().to_string(),
        });
    }
    // Open the hint telescope avoiding the context and the abstraction's free
    // variables, and rename the abstraction's binders to match.
    let mut avoid: BTreeSet<String> =
        ctx.entries().iter().map(|(s, _)| s.name.clone()).collect();
    for s in Instantiate::<()>::free_vars(f) {
        avoid.insert(s.name);
    }
    let (telescope, _) = hint.open_avoiding(&avoid);
    let doms: Vec<Symbol> = telescope.iter().map(|(s, _)| s.clone()).collect();
    let (_, body) = crate::judgement::rename_binders_to(f, &doms)?;
    let mut inner_ctx = ctx.clone();
    let mut binders = Vec::with_capacity(telescope.len());
    for (s, k) in &telescope {
        let labelled = label_kind(spec, &inner_ctx, k)?;
        binders.push((s.clone(), KindAnn(labelled)));
        inner_ctx = inner_ctx.extended(s.clone(), k.clone())?;
    }
    let body = label_object(spec, &inner_ctx, &body)?;
    Ok(Abstraction::new(binders, body)?)
}

/// Label an abstraction sequence against an intended telescope.
pub fn label_sequence(
    spec: &Specification<()>,
    ctx: &Context<()>,
    fs: &[Abstraction<()>],
    delta: &Context<()>,
) -> Result<Vec<KAbstraction>, LabelError> {
    if fs.len() != delta.len() {
        return Err(LabelError::HintArity {
            hint: delta.arity().to_string(),
            subject: format!("sequence of length {}", fs.len()),
        });
    }
    let doms = delta.domain();
    let mut out = Vec::with_capacity(fs.len());
    for (i, f) in fs.iter().enumerate() {
        let hint = delta.entries()[i]
            .1
            .instantiate_seq(&fs[..i].to_vec(), &doms[..i])?;
        out.push(label_abstraction(spec, ctx, f, &hint)?);
    }
    Ok(out)
}

pub fn label_base(
    spec: &Specification<()>,
    ctx: &Context<()>,
    b: &Base<()>,
) -> Result<KBase, LabelError> {
    Ok(match b {
        Base::Type => Base::Type,
        Base::El(a) => Base::El(label_object(spec, ctx, a)?),
    })
}

pub fn label_kind(
    spec: &Specification<()>,
    ctx: &Context<()>,
    k: &Kind<()>,
) -> Result<KKind, LabelError> {
    let mut inner_ctx = ctx.clone();
    let mut telescope = Vec::with_capacity(k.telescope().len());
    for (s, kk) in k.telescope() {
        telescope.push((s.clone(), label_kind(spec, &inner_ctx, kk)?));
        inner_ctx = inner_ctx.extended(s.clone(), kk.clone())?;
    }
    let target = label_base(spec, &inner_ctx, k.target())?;
    Ok(Kind::new(telescope, target)?)
}

pub fn label_context(
    spec: &Specification<()>,
    ctx: &Context<()>,
) -> Result<KContext, LabelError> {
    let mut out = Context::empty();
    for i in 0..ctx.len() {
        let prefix = ctx.prefix(i);
        let (s, k) = &ctx.entries()[i];
        out = out.extended(s.clone(), label_kind(spec, &prefix, k)?)?;
    }
    Ok(out)
}

pub fn label_judgement(
    spec: &Specification<()>,
    j: &Judgement<()>,
) -> Result<KJudgement, LabelError> {
    let context = label_context(spec, &j.context)?;
    Ok(match &j.body {
        JudgementBody::Valid => Judgement::valid(context),
        JudgementBody::Typing(m, t) => Judgement::typing(
            context,
            label_object(spec, &j.context, m)?,
            label_base(spec, &j.context, t)?,
        ),
        JudgementBody::Equal(m, n, t) => Judgement::equal(
            context,
            label_object(spec, &j.context, m)?,
            label_object(spec, &j.context, n)?,
            label_base(spec, &j.context, t)?,
        ),
    })
}

/// Label a whole specification declaration by declaration.
pub fn label_specification(spec: &Specification<()>) -> Result<KSpecification, LabelError> {
    let mut out = KSpecification::empty();
    for d in spec.declarations() {
        let labelled = match d {
            Declaration::Constant { symbol, kind } => Declaration::Constant {
                symbol: symbol.clone(),
                kind: label_kind(spec, &Context::empty(), kind)?,
            },
            Declaration::Equation { telescope, lhs, rhs, target } => {
                Declaration::Equation {
                    telescope: label_context(spec, telescope)?,
                    lhs: label_object(spec, telescope, lhs)?,
                    rhs: label_object(spec, telescope, rhs)?,
                    target: label_base(spec, telescope, target)?,
                }
            }
        };
        out.push(labelled).map_err(LabelError::Term)?;
    }
    Ok(out)
}

/// Whether the specification is consistent for labelling: every declaration
/// is defined relative to the declared constants.
pub fn labelling_consistent(spec: &Specification<()>) -> Result<(), LabelError> {
    label_specification(spec).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arity::Arity;
    use crate::fixtures;
    use crate::syntax::{eta_long, TfAbstraction};

    fn leaf(s: &Symbol) -> Object<()> {
        Object::leaf(s.clone()).unwrap()
    }

    #[test]
    fn erasure_drops_labels() {
        // |[x : El B] x| = [x] x
        let b = Symbol::base_var("B");
        let x = Symbol::base_var("x");
        let ann = KindAnn(Kind::el(Object::leaf(b).unwrap()));
        let labelled = Abstraction::new(
            vec![(x.clone(), ann)],
            Object::leaf(x.clone()).unwrap(),
        )
        .unwrap();
        let erased = erase_abstraction(&labelled);
        let expected = TfAbstraction::unann(vec![x.clone()], leaf(&x)).unwrap();
        assert_eq!(erased, expected);
    }

    #[test]
    fn erasing_a_bare_variable_is_identity() {
        let x = Symbol::base_var("x");
        let m: KObject = Object::leaf(x.clone()).unwrap();
        assert_eq!(erase_object(&m), leaf(&x));
    }

    #[test]
    fn eta_long_at_base_kind() {
        let z = Symbol::base_var("z");
        let e = eta_long_at(&z, &Kind::ty()).unwrap();
        assert!(e.binders().is_empty());
        assert_eq!(erase_abstraction(&e), TfAbstraction::constant(leaf(&z)));
    }

    #[test]
    fn eta_long_at_product_kind() {
        // z^{(x : Type) Type} = [x : Type] z[x]
        let z = Symbol::var("z", Arity::first_order(1));
        let x = Symbol::base_var("x");
        let k = Kind::new(vec![(x.clone(), Kind::ty())], Base::Type).unwrap();
        let e = eta_long_at(&z, &k).unwrap();
        assert_eq!(e.binders().len(), 1);
        assert_eq!(e.binders()[0].1 .0, Kind::ty());
        assert_eq!(erase_abstraction(&e), eta_long(&z));
    }

    #[test]
    fn eta_long_at_nested_kind_erases_to_curry_form() {
        // A second-order symbol: erasure of the labelled eta-long form equals
        // the unlabelled eta-long form.
        let g = Symbol::var("g", Arity::new(vec![Arity::first_order(1)]));
        let h = Symbol::var("h", Arity::first_order(1));
        let x = Symbol::base_var("x");
        let inner = Kind::new(vec![(x, Kind::ty())], Base::Type).unwrap();
        let k = Kind::new(vec![(h, inner)], Base::Type).unwrap();
        let e = eta_long_at(&g, &k).unwrap();
        assert_eq!(erase_abstraction(&e), eta_long(&g));
    }

    #[test]
    fn labelling_example_from_hint() {
        // Labelling [x] x at hint (x : El A) El C under A, B, C : Type gives
        // [x : El A] x.
        let a = Symbol::base_var("A");
        let b = Symbol::base_var("B");
        let c = Symbol::base_var("C");
        let x = Symbol::base_var("x");
        let spec = Specification::<()>::empty();
        let ctx = Context::new(vec![
            (a.clone(), Kind::ty()),
            (b.clone(), Kind::ty()),
            (c.clone(), Kind::ty()),
        ])
        .unwrap();
        let f = TfAbstraction::unann(vec![x.clone()], leaf(&x)).unwrap();
        let hint = Kind::new(
            vec![(x.clone(), Kind::el(leaf(&a)))],
            Base::El(leaf(&c)),
        )
        .unwrap();
        let labelled = label_abstraction(&spec, &ctx, &f, &hint).unwrap();
        assert_eq!(labelled.binders().len(), 1);
        assert_eq!(
            labelled.binders()[0].1 .0,
            Kind::el(Object::leaf(a).unwrap())
        );
        // Exact inversion on this input.
        assert_eq!(erase_abstraction(&labelled), f);
    }

    #[test]
    fn labelling_base_variable_is_identity_shaped() {
        let a = Symbol::base_var("A");
        let x = Symbol::base_var("x");
        let spec = Specification::<()>::empty();
        let ctx = Context::new(vec![
            (a.clone(), Kind::ty()),
            (x.clone(), Kind::el(leaf(&a))),
        ])
        .unwrap();
        let labelled = label_object(&spec, &ctx, &leaf(&x)).unwrap();
        assert_eq!(erase_object(&labelled), leaf(&x));
    }

    #[test]
    fn labelling_sigma_pi_inverts_by_erasure() {
        let spec = fixtures::sigma_pi();
        let labelled = label_specification(&spec).unwrap();
        assert_eq!(erase_specification(&labelled), spec);
    }

    #[test]
    fn labelling_undefined_head_fails() {
        let spec = Specification::<()>::empty();
        let ctx = Context::empty();
        let z = Symbol::base_var("z");
        assert!(matches!(
            label_object(&spec, &ctx, &leaf(&z)),
            Err(LabelError::UndefinedVariable(_))
        ));
    }
}

//! Kinds, contexts, and the primitive and defined judgement forms.
//!
//! A defined judgement (written `||-` here) is a macro: it expands to a
//! finite set of primitive judgements.  The expansion is partial; comparing
//! kinds of different shapes (`Type` against `El _`) is undefined rather
//! than false.

use std::collections::BTreeSet;
use std::fmt;

use crate::arity::Arity;
use crate::error::TermError;
use crate::syntax::{
    fresh_name, Abstraction, AlphaEnv, Ann, Instantiate, Measure, Object, Symbol,
};

/// A base kind: `Type`, or `El A` for an object `A`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Base<A: Ann> {
    Type,
    El(Object<A>),
}

impl<A: Ann> Base<A> {
    pub fn alpha_eq(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        match (self, other) {
            (Base::Type, Base::Type) => true,
            (Base::El(a), Base::El(b)) => a.alpha_eq(b, env),
            _ => false,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Base::Type => 1,
            Base::El(a) => 1 + a.size(),
        }
    }

    /// Whether the symbol `Type` occurs in this base kind.  (It cannot occur
    /// inside an object, so only the `Type` tag itself counts.)
    pub fn mentions_type(&self) -> bool {
        matches!(self, Base::Type)
    }
}

/// A product kind `(x1 : K1, ..., xn : Kn) T`.  Base kinds have an empty
/// telescope.  Each telescope variable binds in the later entries and in the
/// target; kinds are identified up to renaming of the telescope.
#[derive(Clone)]
pub struct Kind<A: Ann> {
    telescope: Vec<(Symbol, Kind<A>)>,
    target: Base<A>,
}

impl<A: Ann> PartialEq for Kind<A> {
    fn eq(&self, other: &Self) -> bool {
        self.alpha_eq(other, &mut AlphaEnv::default())
    }
}

impl<A: Ann> Eq for Kind<A> {}

impl<A: Ann> std::hash::Hash for Kind<A> {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.alpha_hash(&mut crate::syntax::HashEnv::default(), state);
    }
}

impl<A: Ann> Kind<A> {
    pub fn new(telescope: Vec<(Symbol, Kind<A>)>, target: Base<A>) -> Result<Self, TermError> {
        for (i, (s, k)) in telescope.iter().enumerate() {
            if !s.is_variable() {
                return Err(TermError::BinderNotVariable(s.name.clone()));
            }
            if telescope[..i].iter().any(|(p, _)| p.name == s.name) {
                return Err(TermError::DuplicateBinder(s.name.clone()));
            }
            if s.arity != k.arity() {
                return Err(TermError::EntryArity {
                    name: s.name.clone(),
                    var_arity: s.arity.clone(),
                    kind_arity: k.arity(),
                });
            }
        }
        Ok(Kind { telescope, target })
    }

    pub fn base(target: Base<A>) -> Self {
        Kind { telescope: Vec::new(), target }
    }

    pub fn ty() -> Self {
        Kind::base(Base::Type)
    }

    pub fn el(carrier: Object<A>) -> Self {
        Kind::base(Base::El(carrier))
    }

    pub fn telescope(&self) -> &[(Symbol, Kind<A>)] {
        &self.telescope
    }

    pub fn target(&self) -> &Base<A> {
        &self.target
    }

    pub fn is_base(&self) -> bool {
        self.telescope.is_empty()
    }

    pub fn arity(&self) -> Arity {
        Arity::new(self.telescope.iter().map(|(s, _)| s.arity.clone()).collect())
    }

    pub fn order(&self) -> usize {
        self.arity().order()
    }

    pub fn size(&self) -> usize {
        1 + self.telescope.iter().map(|(_, k)| k.size()).sum::<usize>() + self.target.size()
    }

    /// Whether the symbol `Type` occurs anywhere in the kind.  Kinds in which
    /// it does not are called small.
    pub fn mentions_type(&self) -> bool {
        self.target.mentions_type() || self.telescope.iter().any(|(_, k)| k.mentions_type())
    }

    pub fn is_small(&self) -> bool {
        !self.mentions_type()
    }

    pub fn alpha_eq(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        if self.telescope.len() != other.telescope.len() {
            return false;
        }
        let mut pushed = 0;
        let mut ok = true;
        for ((ls, lk), (rs, rk)) in self.telescope.iter().zip(&other.telescope) {
            if ls.arity != rs.arity || !lk.alpha_eq(rk, env) {
                ok = false;
                break;
            }
            env.push(ls.clone(), rs.clone());
            pushed += 1;
        }
        let ok = ok && self.target.alpha_eq(&other.target, env);
        env.pop(pushed);
        ok
    }

    pub fn alpha_hash<H: std::hash::Hasher>(
        &self,
        env: &mut crate::syntax::HashEnv,
        state: &mut H,
    ) {
        use std::hash::Hash;
        self.telescope.len().hash(state);
        for (s, k) in &self.telescope {
            s.arity.hash(state);
            k.alpha_hash(env, state);
            env.push(s.clone());
        }
        match &self.target {
            Base::Type => 0u8.hash(state),
            Base::El(a) => {
                1u8.hash(state);
                a.alpha_hash(env, state);
            }
        }
        env.pop(self.telescope.len());
    }

    /// Rename the telescope so that no binder name lands in `avoid`; returns
    /// the renamed telescope and target.
    pub fn open_avoiding(&self, avoid: &BTreeSet<String>) -> (Vec<(Symbol, Kind<A>)>, Base<A>) {
        let mut taken: BTreeSet<String> = avoid.clone();
        for s in Instantiate::<A>::free_vars(self) {
            taken.insert(s.name);
        }
        taken.extend(self.telescope.iter().map(|(s, _)| s.name.clone()));
        let mut current = self.clone();
        for i in 0..current.telescope.len() {
            let (s, _) = &current.telescope[i];
            if avoid.contains(s.name.as_str()) {
                let name = fresh_name(&s.name, |n| taken.contains(n));
                taken.insert(name.clone());
                current = current.rename_entry(i, name);
            }
        }
        (current.telescope, current.target)
    }

    fn rename_entry(&self, i: usize, name: String) -> Self {
        let (old, k) = self.telescope[i].clone();
        let new = Symbol::var(name, old.arity.clone());
        let mut telescope: Vec<(Symbol, Kind<A>)> = self.telescope[..i].to_vec();
        telescope.push((new.clone(), k));
        let tail = Kind {
            telescope: self.telescope[i + 1..].to_vec(),
            target: self.target.clone(),
        };
        let tail = tail.rename_free(&old, &new);
        telescope.extend(tail.telescope);
        Kind { telescope, target: tail.target }
    }

    /// Rename the telescope binders to the given symbols (pointwise equal
    /// arities required; the new names must be fresh for the kind).
    pub fn rename_telescope_to(&self, doms: &[Symbol]) -> Result<Self, TermError> {
        if doms.len() != self.telescope.len() {
            return Err(TermError::SeqLength { vars: doms.len(), abs: self.telescope.len() });
        }
        let mut current = self.clone();
        for (i, d) in doms.iter().enumerate() {
            let (old, _) = &current.telescope[i];
            if old.arity != d.arity {
                return Err(TermError::EntryArity {
                    name: d.name.clone(),
                    var_arity: d.arity.clone(),
                    kind_arity: old.arity.clone(),
                });
            }
            if old != d {
                current = current.rename_entry(i, d.name.clone());
            }
        }
        Ok(current)
    }
}

impl<A: Ann> Instantiate<A> for Base<A> {
    fn free_vars_into(&self, bound: &mut Vec<Symbol>, acc: &mut BTreeSet<Symbol>) {
        if let Base::El(a) = self {
            Instantiate::<A>::free_vars_into(a, bound, acc);
        }
    }

    fn rename_free(&self, from: &Symbol, to: &Symbol) -> Self {
        match self {
            Base::Type => Base::Type,
            Base::El(a) => Base::El(a.rename_free(from, to)),
        }
    }

    fn instantiate_in(
        &self,
        f: &Abstraction<A>,
        x: &Symbol,
        parent: Option<Measure>,
    ) -> Result<Self, TermError> {
        match self {
            Base::Type => Ok(Base::Type),
            Base::El(a) => Ok(Base::El(a.instantiate_in(f, x, parent)?)),
        }
    }
}

impl<A: Ann> Instantiate<A> for Kind<A> {
    fn free_vars_into(&self, bound: &mut Vec<Symbol>, acc: &mut BTreeSet<Symbol>) {
        let mut pushed = 0;
        for (s, k) in &self.telescope {
            Instantiate::<A>::free_vars_into(k, bound, acc);
            bound.push(s.clone());
            pushed += 1;
        }
        Instantiate::<A>::free_vars_into(&self.target, bound, acc);
        for _ in 0..pushed {
            bound.pop();
        }
    }

    fn rename_free(&self, from: &Symbol, to: &Symbol) -> Self {
        if from == to {
            return self.clone();
        }
        let shadow = self.telescope.iter().position(|(b, _)| b == from);
        let capturing: Vec<usize> = self
            .telescope
            .iter()
            .enumerate()
            .filter(|(j, (b, _))| b.name == to.name && shadow.is_none_or(|s| *j < s))
            .map(|(j, _)| j)
            .collect();
        let mut current;
        let target: &Kind<A> = if capturing.is_empty() {
            self
        } else {
            let mut taken: BTreeSet<String> = Instantiate::<A>::free_vars(self)
                .into_iter()
                .map(|s| s.name)
                .collect();
            taken.extend(self.telescope.iter().map(|(b, _)| b.name.clone()));
            taken.insert(from.name.clone());
            taken.insert(to.name.clone());
            current = self.clone();
            for j in capturing {
                let name = fresh_name(&current.telescope[j].0.name, |n| taken.contains(n));
                taken.insert(name.clone());
                current = current.rename_entry(j, name);
            }
            &current
        };
        let mut telescope = Vec::with_capacity(target.telescope.len());
        for (i, (s, k)) in target.telescope.iter().enumerate() {
            telescope.push((s.clone(), k.rename_free(from, to)));
            if s == from {
                telescope.extend(target.telescope[i + 1..].iter().cloned());
                return Kind { telescope, target: target.target.clone() };
            }
        }
        Kind { telescope, target: target.target.rename_free(from, to) }
    }

    fn instantiate_in(
        &self,
        f: &Abstraction<A>,
        x: &Symbol,
        parent: Option<Measure>,
    ) -> Result<Self, TermError> {
        let fv: BTreeSet<Symbol> = Instantiate::<A>::free_vars(self);
        if !fv.contains(x) {
            return Ok(self.clone());
        }
        let fv_f = Instantiate::<A>::free_vars(f);
        let fv_f_names: BTreeSet<&str> = fv_f.iter().map(|s| s.name.as_str()).collect();
        let needs = self
            .telescope
            .iter()
            .any(|(s, _)| fv_f_names.contains(s.name.as_str()));
        let opened;
        let target: &Kind<A> = if needs {
            let avoid: BTreeSet<String> = fv_f.iter().map(|s| s.name.clone()).collect();
            let (telescope, base) = self.open_avoiding(&avoid);
            opened = Kind { telescope, target: base };
            &opened
        } else {
            self
        };
        let mut telescope = Vec::with_capacity(target.telescope.len());
        for (i, (s, k)) in target.telescope.iter().enumerate() {
            telescope.push((s.clone(), k.instantiate_in(f, x, parent)?));
            if s == x {
                telescope.extend(target.telescope[i + 1..].iter().cloned());
                return Ok(Kind { telescope, target: target.target.clone() });
            }
        }
        let base = target.target.instantiate_in(f, x, parent)?;
        Ok(Kind { telescope, target: base })
    }
}

/// A context: an ordered list of variable declarations with pairwise
/// distinct names.  Each variable binds in the kinds of the later entries.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Context<A: Ann> {
    entries: Vec<(Symbol, Kind<A>)>,
}

impl<A: Ann> std::hash::Hash for Context<A> {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for (s, k) in &self.entries {
            s.hash(state);
            k.hash(state);
        }
    }
}

impl<A: Ann> Context<A> {
    pub fn empty() -> Self {
        Context { entries: Vec::new() }
    }

    pub fn new(entries: Vec<(Symbol, Kind<A>)>) -> Result<Self, TermError> {
        let mut ctx = Context::empty();
        for (s, k) in entries {
            ctx = ctx.extended(s, k)?;
        }
        Ok(ctx)
    }

    pub fn extended(&self, s: Symbol, k: Kind<A>) -> Result<Self, TermError> {
        if !s.is_variable() {
            return Err(TermError::BinderNotVariable(s.name.clone()));
        }
        if self.entries.iter().any(|(p, _)| p.name == s.name) {
            return Err(TermError::DuplicateContextVariable(s.name.clone()));
        }
        if s.arity != k.arity() {
            return Err(TermError::EntryArity {
                name: s.name.clone(),
                var_arity: s.arity.clone(),
                kind_arity: k.arity(),
            });
        }
        let mut entries = self.entries.clone();
        entries.push((s, k));
        Ok(Context { entries })
    }

    pub fn entries(&self) -> &[(Symbol, Kind<A>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn domain(&self) -> Vec<Symbol> {
        self.entries.iter().map(|(s, _)| s.clone()).collect()
    }

    pub fn lookup(&self, sym: &Symbol) -> Option<&Kind<A>> {
        self.entries
            .iter()
            .rev()
            .find(|(s, _)| s == sym)
            .map(|(_, k)| k)
    }

    pub fn lookup_name(&self, name: &str) -> Option<(&Symbol, &Kind<A>)> {
        self.entries
            .iter()
            .rev()
            .find(|(s, _)| s.name == name)
            .map(|(s, k)| (s, k))
    }

    pub fn arity(&self) -> Arity {
        Arity::new(self.entries.iter().map(|(s, _)| s.arity.clone()).collect())
    }

    pub fn order(&self) -> usize {
        self.arity().order()
    }

    /// Concatenate; fails on name collisions.
    pub fn concat(&self, other: &Context<A>) -> Result<Self, TermError> {
        let mut ctx = self.clone();
        for (s, k) in &other.entries {
            ctx = ctx.extended(s.clone(), k.clone())?;
        }
        Ok(ctx)
    }

    pub fn prefix(&self, n: usize) -> Self {
        Context { entries: self.entries[..n].to_vec() }
    }

    pub fn split_last(&self) -> Option<(Context<A>, &(Symbol, Kind<A>))> {
        let (last, init) = self.entries.split_last()?;
        Some((Context { entries: init.to_vec() }, last))
    }

    /// Whether `self` is a prefix of `other`, entry for entry.
    pub fn is_prefix_of(&self, other: &Context<A>) -> bool {
        self.entries.len() <= other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|((ls, lk), (rs, rk))| ls == rs && lk == rk)
    }

    pub fn alpha_eq_from(&self, other: &Self, ambient: usize, env: &mut AlphaEnv) -> usize {
        // Pushes matched entries onto `env`; returns usize::MAX on mismatch,
        // otherwise the number pushed.
        if self.entries.len() != other.entries.len() {
            return usize::MAX;
        }
        let mut pushed = 0;
        for (i, ((ls, lk), (rs, rk))) in self.entries.iter().zip(&other.entries).enumerate() {
            let names_must_match = i < ambient;
            if names_must_match && ls != rs {
                env.pop(pushed);
                return usize::MAX;
            }
            if ls.arity != rs.arity || !lk.alpha_eq(rk, env) {
                env.pop(pushed);
                return usize::MAX;
            }
            env.push(ls.clone(), rs.clone());
            pushed += 1;
        }
        pushed
    }
}

/// Body of a primitive judgement.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum JudgementBody<A: Ann> {
    Valid,
    Typing(Object<A>, Base<A>),
    Equal(Object<A>, Object<A>, Base<A>),
}

/// A primitive judgement: `G valid`, `G |- M : T`, or `G |- M = N : T`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Judgement<A: Ann> {
    pub context: Context<A>,
    pub body: JudgementBody<A>,
}

impl<A: Ann> Judgement<A> {
    pub fn valid(context: Context<A>) -> Self {
        Judgement { context, body: JudgementBody::Valid }
    }

    pub fn typing(context: Context<A>, m: Object<A>, t: Base<A>) -> Self {
        Judgement { context, body: JudgementBody::Typing(m, t) }
    }

    pub fn equal(context: Context<A>, m: Object<A>, n: Object<A>, t: Base<A>) -> Self {
        Judgement { context, body: JudgementBody::Equal(m, n, t) }
    }

    /// Compare with another judgement, allowing context entries beyond
    /// `ambient` to differ by a consistent renaming.  Expansions of defined
    /// judgements choose fresh names for the telescopes they open, so
    /// premises are matched up to that choice.
    pub fn matches_from(&self, other: &Self, ambient: usize) -> bool {
        let mut env = AlphaEnv::default();
        let pushed = self.context.alpha_eq_from(&other.context, ambient, &mut env);
        if pushed == usize::MAX {
            return false;
        }
        let ok = match (&self.body, &other.body) {
            (JudgementBody::Valid, JudgementBody::Valid) => true,
            (JudgementBody::Typing(m1, t1), JudgementBody::Typing(m2, t2)) => {
                m1.alpha_eq(m2, &mut env) && t1.alpha_eq(t2, &mut env)
            }
            (JudgementBody::Equal(m1, n1, t1), JudgementBody::Equal(m2, n2, t2)) => {
                m1.alpha_eq(m2, &mut env)
                    && n1.alpha_eq(n2, &mut env)
                    && t1.alpha_eq(t2, &mut env)
            }
            _ => false,
        };
        env.pop(pushed);
        ok
    }
}

/// Body of a defined judgement form.
#[derive(Clone, PartialEq, Eq)]
pub enum DefinedBody<A: Ann> {
    KindWf(Kind<A>),
    KindEq(Kind<A>, Kind<A>),
    AbsTyping(Abstraction<A>, Kind<A>),
    AbsEq(Abstraction<A>, Abstraction<A>, Kind<A>),
    SeqSat(Vec<Abstraction<A>>, Context<A>),
    SeqEq(Vec<Abstraction<A>>, Vec<Abstraction<A>>, Context<A>),
    CtxEq(Context<A>, Context<A>),
}

/// A defined judgement `G ||- ...`, standing for a set of primitive
/// judgements.
#[derive(Clone, PartialEq, Eq)]
pub struct DefinedJudgement<A: Ann> {
    pub context: Context<A>,
    pub body: DefinedBody<A>,
}

/// One primitive judgement of an expansion, remembering how long the ambient
/// context was, so that freshly opened telescope entries compare up to
/// renaming.
#[derive(Clone)]
pub struct Member<A: Ann> {
    pub judgement: Judgement<A>,
    pub ambient: usize,
}

impl<A: Ann> Member<A> {
    pub fn matches(&self, other: &Judgement<A>) -> bool {
        self.judgement.matches_from(other, self.ambient)
    }
}

/// Failure modes of expansion.
#[derive(Clone, Debug, thiserror::Error, PartialEq, Eq)]
pub enum ExpandError {
    /// The paper leaves mismatched kind shapes undefined.
    #[error("expansion undefined: {0}")]
    Undefined(String),
    #[error(transparent)]
    Term(#[from] TermError),
}

fn push_member<A: Ann>(members: &mut Vec<Member<A>>, m: Member<A>) {
    // Expansions are sets: drop duplicates, keeping first occurrences.
    let duplicate = members.iter().any(|existing| {
        existing.ambient == m.ambient
            && existing.judgement.matches_from(&m.judgement, m.ambient)
    });
    if !duplicate {
        members.push(m);
    }
}

/// Expand a defined judgement into its primitive members, in a fixed order.
pub fn expand<A: Ann>(dj: &DefinedJudgement<A>) -> Result<Vec<Member<A>>, ExpandError> {
    let mut members = Vec::new();
    expand_into(dj, dj.context.len(), &mut members)?;
    Ok(members)
}

fn expand_into<A: Ann>(
    dj: &DefinedJudgement<A>,
    ambient: usize,
    members: &mut Vec<Member<A>>,
) -> Result<(), ExpandError> {
    let ctx = &dj.context;
    match &dj.body {
        DefinedBody::KindWf(k) => expand_kind_wf(ctx, ambient, k, members),
        DefinedBody::KindEq(k1, k2) => expand_kind_eq(ctx, ambient, k1, k2, members),
        DefinedBody::AbsTyping(f, k) => expand_abs_typing(ctx, ambient, f, k, members),
        DefinedBody::AbsEq(f, g, k) => expand_abs_eq(ctx, ambient, f, g, k, members),
        DefinedBody::SeqSat(fs, delta) => expand_seq_sat(ctx, ambient, fs, delta, members),
        DefinedBody::SeqEq(fs, gs, delta) => {
            expand_seq_eq(ctx, ambient, fs, gs, delta, members)
        }
        DefinedBody::CtxEq(d1, d2) => expand_ctx_eq(ctx, ambient, d1, d2, members),
    }
}

fn names_of<A: Ann>(ctx: &Context<A>) -> BTreeSet<String> {
    ctx.entries().iter().map(|(s, _)| s.name.clone()).collect()
}

fn extend_context<A: Ann>(
    ctx: &Context<A>,
    telescope: &[(Symbol, Kind<A>)],
) -> Result<Context<A>, ExpandError> {
    let mut out = ctx.clone();
    for (s, k) in telescope {
        out = out.extended(s.clone(), k.clone()).map_err(ExpandError::Term)?;
    }
    Ok(out)
}

fn expand_kind_wf<A: Ann>(
    ctx: &Context<A>,
    ambient: usize,
    k: &Kind<A>,
    members: &mut Vec<Member<A>>,
) -> Result<(), ExpandError> {
    let avoid = names_of(ctx);
    let (telescope, target) = k.open_avoiding(&avoid);
    let inner = extend_context(ctx, &telescope)?;
    match target {
        Base::Type => push_member(
            members,
            Member { judgement: Judgement::valid(inner), ambient },
        ),
        Base::El(a) => push_member(
            members,
            Member {
                judgement: Judgement::typing(inner, a, Base::Type),
                ambient,
            },
        ),
    }
    Ok(())
}

fn expand_kind_eq<A: Ann>(
    ctx: &Context<A>,
    ambient: usize,
    k1: &Kind<A>,
    k2: &Kind<A>,
    members: &mut Vec<Member<A>>,
) -> Result<(), ExpandError> {
    if k1.arity() != k2.arity() {
        return Err(ExpandError::Undefined(format!(
            "kind shapes incomparable: arity {} against {}",
            k1.arity(),
            k2.arity()
        )));
    }
    if k1.is_base() {
        return match (k1.target(), k2.target()) {
            (Base::Type, Base::Type) => {
                push_member(
                    members,
                    Member { judgement: Judgement::valid(ctx.clone()), ambient },
                );
                Ok(())
            }
            (Base::El(a), Base::El(b)) => {
                push_member(
                    members,
                    Member {
                        judgement: Judgement::equal(ctx.clone(), a.clone(), b.clone(), Base::Type),
                        ambient,
                    },
                );
                Ok(())
            }
            _ => Err(ExpandError::Undefined(
                "kind shapes incomparable: Type against El".into(),
            )),
        };
    }
    // Align both telescopes on fresh names, then compare the telescopes and
    // the targets under the left telescope.
    let avoid = names_of(ctx);
    let (tel1, t1) = k1.open_avoiding(&avoid);
    let doms: Vec<Symbol> = tel1.iter().map(|(s, _)| s.clone()).collect();
    let k2 = k2
        .rename_telescope_to(&doms)
        .map_err(|_| ExpandError::Undefined("telescopes cannot be aligned".into()))?;
    let d1 = Context::new(tel1).map_err(ExpandError::Term)?;
    let d2 = Context::new(k2.telescope().to_vec()).map_err(ExpandError::Term)?;
    expand_ctx_eq(ctx, ambient, &d1, &d2, members)?;
    let inner = ctx.concat(&d1).map_err(ExpandError::Term)?;
    let base1 = Kind::base(t1);
    let base2 = Kind::base(k2.target().clone());
    expand_kind_eq(&inner, ambient, &base1, &base2, members)
}

fn expand_ctx_eq<A: Ann>(
    ctx: &Context<A>,
    ambient: usize,
    d1: &Context<A>,
    d2: &Context<A>,
    members: &mut Vec<Member<A>>,
) -> Result<(), ExpandError> {
    if d1.len() != d2.len() {
        return Err(ExpandError::Undefined(
            "context shapes incomparable: different lengths".into(),
        ));
    }
    if d1.is_empty() {
        push_member(
            members,
            Member { judgement: Judgement::valid(ctx.clone()), ambient },
        );
        return Ok(());
    }
    // Align the right domain on the left one.
    let doms = d1.domain();
    let mut aligned = Vec::with_capacity(d2.len());
    {
        let mut current: Vec<(Symbol, Kind<A>)> = d2.entries().to_vec();
        for (i, d) in doms.iter().enumerate() {
            let (old, k) = current[i].clone();
            if old.arity != d.arity {
                return Err(ExpandError::Undefined(
                    "context shapes incomparable: entry arities differ".into(),
                ));
            }
            if &old != d {
                for (s, kk) in current.iter_mut().skip(i + 1) {
                    *kk = kk.rename_free(&old, d);
                    *s = s.clone();
                }
                current[i] = (d.clone(), k);
            }
        }
        aligned.extend(current);
    }
    let (init1, (x, klast1)) = {
        let (init, last) = d1.split_last().expect("nonempty");
        (init, (last.0.clone(), last.1.clone()))
    };
    let (aligned_init, aligned_last) = {
        let (last, init) = aligned.split_last().expect("nonempty");
        (Context::new(init.to_vec()).map_err(ExpandError::Term)?, last.1.clone())
    };
    let _ = x;
    expand_ctx_eq(ctx, ambient, &init1, &aligned_init, members)?;
    let inner = ctx.concat(&init1).map_err(ExpandError::Term)?;
    expand_kind_eq(&inner, ambient, &klast1, &aligned_last, members)
}

fn expand_abs_typing<A: Ann>(
    ctx: &Context<A>,
    ambient: usize,
    f: &Abstraction<A>,
    k: &Kind<A>,
    members: &mut Vec<Member<A>>,
) -> Result<(), ExpandError> {
    if f.arity() != k.arity() {
        return Err(ExpandError::Undefined(format!(
            "abstraction arity {} does not match kind arity {}",
            f.arity(),
            k.arity()
        )));
    }
    let mut avoid = names_of(ctx);
    for s in Instantiate::<A>::free_vars(f) {
        avoid.insert(s.name);
    }
    let (telescope, target) = k.open_avoiding(&avoid);
    let doms: Vec<Symbol> = telescope.iter().map(|(s, _)| s.clone()).collect();
    let inner = extend_context(ctx, &telescope)?;
    // Rename the abstraction binders to the telescope domain.
    let (f_binders, f_body) = rename_binders_to(f, &doms)?;
    if A::KINDED {
        // The Church-typed expansion also compares the declared telescope
        // against the abstraction's own labels.
        let d_kind = Context::new(telescope.clone()).map_err(ExpandError::Term)?;
        let d_abs = binder_context(&f_binders)?;
        expand_ctx_eq(ctx, ambient, &d_kind, &d_abs, members)?;
    }
    match target {
        Base::Type => push_member(
            members,
            Member {
                judgement: Judgement::typing(inner, f_body, Base::Type),
                ambient,
            },
        ),
        t => push_member(
            members,
            Member { judgement: Judgement::typing(inner, f_body, t), ambient },
        ),
    }
    Ok(())
}

fn expand_abs_eq<A: Ann>(
    ctx: &Context<A>,
    ambient: usize,
    f: &Abstraction<A>,
    g: &Abstraction<A>,
    k: &Kind<A>,
    members: &mut Vec<Member<A>>,
) -> Result<(), ExpandError> {
    if f.arity() != k.arity() || g.arity() != k.arity() {
        return Err(ExpandError::Undefined(format!(
            "abstraction arities {} and {} do not match kind arity {}",
            f.arity(),
            g.arity(),
            k.arity()
        )));
    }
    let mut avoid = names_of(ctx);
    for s in Instantiate::<A>::free_vars(f) {
        avoid.insert(s.name);
    }
    for s in Instantiate::<A>::free_vars(g) {
        avoid.insert(s.name);
    }
    let (telescope, target) = k.open_avoiding(&avoid);
    let doms: Vec<Symbol> = telescope.iter().map(|(s, _)| s.clone()).collect();
    let inner = extend_context(ctx, &telescope)?;
    let (f_binders, f_body) = rename_binders_to(f, &doms)?;
    let (g_binders, g_body) = rename_binders_to(g, &doms)?;
    if A::KINDED {
        let d_kind = Context::new(telescope.clone()).map_err(ExpandError::Term)?;
        let d_f = binder_context(&f_binders)?;
        let d_g = binder_context(&g_binders)?;
        expand_ctx_eq(ctx, ambient, &d_kind, &d_f, members)?;
        expand_ctx_eq(ctx, ambient, &d_kind, &d_g, members)?;
    }
    push_member(
        members,
        Member {
            judgement: Judgement::equal(inner, f_body, g_body, target),
            ambient,
        },
    );
    Ok(())
}

/// View a kinded binder list as a context.
fn binder_context<A: Ann>(binders: &[(Symbol, A)]) -> Result<Context<A>, ExpandError> {
    let entries = binders
        .iter()
        .map(|(s, a)| {
            a.kind()
                .map(|k| (s.clone(), k))
                .ok_or_else(|| ExpandError::Undefined("binder lacks a kind label".into()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Context::new(entries).map_err(ExpandError::Term)
}

/// Rename an abstraction's binders to the given symbols, returning the
/// renamed binder list (with its annotations) and the body.
pub fn rename_binders_to<A: Ann>(
    f: &Abstraction<A>,
    doms: &[Symbol],
) -> Result<(Vec<(Symbol, A)>, Object<A>), ExpandError> {
    if f.binders().len() != doms.len() {
        return Err(ExpandError::Undefined(
            "abstraction shape does not match telescope".into(),
        ));
    }
    let mut current = f.clone();
    for (i, d) in doms.iter().enumerate() {
        let (old, _) = &current.binders()[i];
        if old.arity != d.arity {
            return Err(ExpandError::Undefined(
                "abstraction binder arities do not match telescope".into(),
            ));
        }
        if old == d {
            continue;
        }
        let old = old.clone();
        // Split, rename the tail, and reassemble.
        let mut binders: Vec<(Symbol, A)> = current.binders()[..i].to_vec();
        let ann = current.binders()[i].1.clone();
        binders.push((d.clone(), ann));
        let tail = Abstraction::new(
            current.binders()[i + 1..].to_vec(),
            current.body().clone(),
        )
        .map_err(ExpandError::Term)?;
        let tail = tail.rename_free(&old, d);
        binders.extend(tail.binders().to_vec());
        current =
            Abstraction::new(binders, tail.body().clone()).map_err(ExpandError::Term)?;
    }
    Ok((current.binders().to_vec(), current.body().clone()))
}

fn expand_seq_sat<A: Ann>(
    ctx: &Context<A>,
    ambient: usize,
    fs: &[Abstraction<A>],
    delta: &Context<A>,
    members: &mut Vec<Member<A>>,
) -> Result<(), ExpandError> {
    if fs.len() != delta.len() {
        return Err(ExpandError::Undefined(
            "abstraction sequence length does not match context".into(),
        ));
    }
    if fs.is_empty() {
        push_member(
            members,
            Member { judgement: Judgement::valid(ctx.clone()), ambient },
        );
        return Ok(());
    }
    let (init, (x, k)) = {
        let (init, last) = delta.split_last().expect("nonempty");
        (init, (last.0.clone(), last.1.clone()))
    };
    let _ = x;
    let (fs_init, f_last) = fs.split_at(fs.len() - 1);
    expand_seq_sat(ctx, ambient, fs_init, &init, members)?;
    let doms = init.domain();
    let k_inst = k
        .instantiate_seq(&fs_init.to_vec(), &doms)
        .map_err(ExpandError::Term)?;
    expand_abs_typing(ctx, ambient, &f_last[0], &k_inst, members)
}

fn expand_seq_eq<A: Ann>(
    ctx: &Context<A>,
    ambient: usize,
    fs: &[Abstraction<A>],
    gs: &[Abstraction<A>],
    delta: &Context<A>,
    members: &mut Vec<Member<A>>,
) -> Result<(), ExpandError> {
    if fs.len() != delta.len() || gs.len() != delta.len() {
        return Err(ExpandError::Undefined(
            "abstraction sequence lengths do not match context".into(),
        ));
    }
    if fs.is_empty() {
        push_member(
            members,
            Member { judgement: Judgement::valid(ctx.clone()), ambient },
        );
        return Ok(());
    }
    let (init, (_, k)) = {
        let (init, last) = delta.split_last().expect("nonempty");
        (init, (last.0.clone(), last.1.clone()))
    };
    let (fs_init, f_last) = fs.split_at(fs.len() - 1);
    let (gs_init, g_last) = gs.split_at(gs.len() - 1);
    expand_seq_eq(ctx, ambient, fs_init, gs_init, &init, members)?;
    let doms = init.domain();
    let k_inst = k
        .instantiate_seq(&fs_init.to_vec(), &doms)
        .map_err(ExpandError::Term)?;
    expand_abs_eq(ctx, ambient, &f_last[0], &g_last[0], &k_inst, members)
}

impl<A: Ann> Instantiate<A> for Context<A> {
    fn free_vars_into(&self, bound: &mut Vec<Symbol>, acc: &mut BTreeSet<Symbol>) {
        let mut pushed = 0;
        for (s, k) in &self.entries {
            Instantiate::<A>::free_vars_into(k, bound, acc);
            bound.push(s.clone());
            pushed += 1;
        }
        for _ in 0..pushed {
            bound.pop();
        }
    }

    fn rename_free(&self, from: &Symbol, to: &Symbol) -> Self {
        if from == to {
            return self.clone();
        }
        // Entries named like the target would capture it in later kinds;
        // rename them apart (their occurrences in later entries move along).
        let shadow = self.entries.iter().position(|(b, _)| b == from);
        let mut current = self.clone();
        loop {
            let capturing = current.entries.iter().enumerate().find(|(j, (b, _))| {
                b.name == to.name && shadow.is_none_or(|s| *j < s)
            });
            let Some((j, (old, _))) = capturing else { break };
            let old = old.clone();
            let mut taken: BTreeSet<String> = Instantiate::<A>::free_vars(&current)
                .into_iter()
                .map(|s| s.name)
                .collect();
            taken.extend(current.entries.iter().map(|(b, _)| b.name.clone()));
            taken.insert(from.name.clone());
            taken.insert(to.name.clone());
            let name = fresh_name(&old.name, |n| taken.contains(n));
            let fresh = Symbol::var(name, old.arity.clone());
            let mut entries: Vec<(Symbol, Kind<A>)> = current.entries[..j].to_vec();
            entries.push((fresh.clone(), current.entries[j].1.clone()));
            let tail = Context { entries: current.entries[j + 1..].to_vec() };
            let tail = tail.rename_free(&old, &fresh);
            entries.extend(tail.entries);
            current = Context { entries };
        }
        let mut entries = Vec::with_capacity(current.entries.len());
        for (i, (s, k)) in current.entries.iter().enumerate() {
            entries.push((s.clone(), k.rename_free(from, to)));
            if s == from {
                entries.extend(current.entries[i + 1..].iter().cloned());
                return Context { entries };
            }
        }
        Context { entries }
    }

    fn instantiate_in(
        &self,
        f: &Abstraction<A>,
        x: &Symbol,
        parent: Option<Measure>,
    ) -> Result<Self, TermError> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for (i, (s, k)) in self.entries.iter().enumerate() {
            entries.push((s.clone(), k.instantiate_in(f, x, parent)?));
            if s == x {
                entries.extend(self.entries[i + 1..].iter().cloned());
                return Ok(Context { entries });
            }
        }
        Ok(Context { entries })
    }
}

impl<A: Ann> Judgement<A> {
    /// Instantiate the judgement body (not the context).
    pub fn instantiate_body(
        &self,
        f: &Abstraction<A>,
        x: &Symbol,
    ) -> Result<JudgementBody<A>, TermError> {
        Ok(match &self.body {
            JudgementBody::Valid => JudgementBody::Valid,
            JudgementBody::Typing(m, t) => {
                JudgementBody::Typing(m.instantiate(f, x)?, t.instantiate(f, x)?)
            }
            JudgementBody::Equal(m, n, t) => JudgementBody::Equal(
                m.instantiate(f, x)?,
                n.instantiate(f, x)?,
                t.instantiate(f, x)?,
            ),
        })
    }
}

fn fmt_base_carrier<A: Ann>(a: &Object<A>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if a.is_leaf() {
        write!(f, "{a}")
    } else {
        write!(f, "({a})")
    }
}

impl<A: Ann> fmt::Display for Base<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Base::Type => write!(f, "Type"),
            Base::El(a) => {
                write!(f, "El ")?;
                fmt_base_carrier(a, f)
            }
        }
    }
}

impl<A: Ann> fmt::Debug for Base<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<A: Ann> fmt::Debug for Kind<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<A: Ann> fmt::Debug for Context<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<A: Ann> fmt::Display for Kind<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.telescope.is_empty() {
            write!(f, "(")?;
            for (i, (s, k)) in self.telescope.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{} : {}", s.name, k)?;
            }
            write!(f, ") ")?;
        }
        write!(f, "{}", self.target)
    }
}

impl<A: Ann> fmt::Display for Context<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, k)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} : {}", s.name, k)?;
        }
        Ok(())
    }
}

impl<A: Ann> fmt::Display for Judgement<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            JudgementBody::Valid => {
                if self.context.is_empty() {
                    write!(f, "valid")
                } else {
                    write!(f, "{} valid", self.context)
                }
            }
            JudgementBody::Typing(m, t) => {
                if self.context.is_empty() {
                    write!(f, "|- {m} : {t}")
                } else {
                    write!(f, "{} |- {m} : {t}", self.context)
                }
            }
            JudgementBody::Equal(m, n, t) => {
                if self.context.is_empty() {
                    write!(f, "|- {m} = {n} : {t}")
                } else {
                    write!(f, "{} |- {m} = {n} : {t}", self.context)
                }
            }
        }
    }
}

impl<A: Ann> fmt::Debug for Judgement<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<A: Ann> fmt::Display for DefinedJudgement<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.context.is_empty() {
            write!(f, "{} ", self.context)?;
        }
        write!(f, "||- ")?;
        match &self.body {
            DefinedBody::KindWf(k) => write!(f, "{k} kind"),
            DefinedBody::KindEq(k1, k2) => write!(f, "{k1} = {k2}"),
            DefinedBody::AbsTyping(a, k) => write!(f, "{a} : {k}"),
            DefinedBody::AbsEq(a, b, k) => write!(f, "{a} = {b} : {k}"),
            DefinedBody::SeqSat(fs, d) => {
                write!(f, "<")?;
                for (i, a) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "> :: ({d})")
            }
            DefinedBody::SeqEq(fs, gs, d) => {
                write!(f, "<")?;
                for (i, a) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "> = <")?;
                for (i, a) in gs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "> :: ({d})")
            }
            DefinedBody::CtxEq(d1, d2) => write!(f, "({d1}) = ({d2})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::TfAbstraction;

    type K = Kind<()>;

    fn ty_ctx(names: &[&str]) -> Context<()> {
        let mut ctx = Context::empty();
        for n in names {
            ctx = ctx.extended(Symbol::base_var(*n), K::ty()).unwrap();
        }
        ctx
    }

    fn leaf(s: Symbol) -> Object<()> {
        Object::leaf(s).unwrap()
    }

    #[test]
    fn type_kind_expands_to_validity() {
        let ctx = ty_ctx(&["A"]);
        let dj = DefinedJudgement { context: ctx.clone(), body: DefinedBody::KindWf(K::ty()) };
        let members = expand(&dj).unwrap();
        assert_eq!(members.len(), 1);
        assert!(members[0].matches(&Judgement::valid(ctx)));
    }

    #[test]
    fn product_kind_equality_expansion() {
        // G ||- (x : El A) El B = (x : El C) El D expands to
        // { G valid, G |- A = C : Type, G, x : El A |- B = D : Type }.
        let ctx = ty_ctx(&["A", "B", "C", "D"]);
        let a = Symbol::base_var("A");
        let b = Symbol::base_var("B");
        let c = Symbol::base_var("C");
        let d = Symbol::base_var("D");
        let x = Symbol::base_var("x");
        let k1 = Kind::new(
            vec![(x.clone(), K::el(leaf(a.clone())))],
            Base::El(leaf(b.clone())),
        )
        .unwrap();
        let k2 = Kind::new(
            vec![(x.clone(), K::el(leaf(c.clone())))],
            Base::El(leaf(d.clone())),
        )
        .unwrap();
        let dj = DefinedJudgement { context: ctx.clone(), body: DefinedBody::KindEq(k1, k2) };
        let members = expand(&dj).unwrap();
        assert_eq!(members.len(), 3);
        assert!(members[0].matches(&Judgement::valid(ctx.clone())));
        assert!(members[1].matches(&Judgement::equal(
            ctx.clone(),
            leaf(a.clone()),
            leaf(c),
            Base::Type
        )));
        let inner = ctx.extended(x, K::el(leaf(a))).unwrap();
        assert!(members[2].matches(&Judgement::equal(inner, leaf(b), leaf(d), Base::Type)));
    }

    #[test]
    fn mismatched_base_kinds_are_undefined() {
        let ctx = ty_ctx(&["B"]);
        let b = Symbol::base_var("B");
        let dj = DefinedJudgement {
            context: ctx,
            body: DefinedBody::KindEq(K::ty(), K::el(leaf(b))),
        };
        assert!(matches!(expand(&dj), Err(ExpandError::Undefined(_))));
    }

    #[test]
    fn seq_sat_empty_expands_to_validity() {
        let ctx = ty_ctx(&["A"]);
        let dj = DefinedJudgement {
            context: ctx.clone(),
            body: DefinedBody::SeqSat(vec![], Context::empty()),
        };
        let members = expand(&dj).unwrap();
        assert_eq!(members.len(), 1);
        assert!(members[0].matches(&Judgement::valid(ctx)));
    }

    #[test]
    fn abs_typing_renames_to_telescope_domain() {
        // ||- [y] y : (x : Type) Type expands to  x : Type |- x : Type.
        let y = Symbol::base_var("y");
        let x = Symbol::base_var("x");
        let f = TfAbstraction::unann(vec![y.clone()], leaf(y)).unwrap();
        let k = Kind::new(vec![(x.clone(), K::ty())], Base::Type).unwrap();
        let dj = DefinedJudgement {
            context: Context::empty(),
            body: DefinedBody::AbsTyping(f, k),
        };
        let members = expand(&dj).unwrap();
        assert_eq!(members.len(), 1);
        let inner = Context::new(vec![(x.clone(), K::ty())]).unwrap();
        assert!(members[0].matches(&Judgement::typing(inner, leaf(x), Base::Type)));
    }

    #[test]
    fn member_matching_is_relaxed_beyond_ambient() {
        let ctx = ty_ctx(&["A"]);
        let x = Symbol::base_var("x");
        let y = Symbol::base_var("y");
        let a = Symbol::base_var("A");
        let with_x = ctx.extended(x.clone(), K::el(leaf(a.clone()))).unwrap();
        let with_y = ctx.extended(y.clone(), K::el(leaf(a))).unwrap();
        let m = Member {
            judgement: Judgement::typing(with_x, leaf(x), Base::Type),
            ambient: 1,
        };
        assert!(m.matches(&Judgement::typing(with_y, leaf(y), Base::Type)));
    }
}

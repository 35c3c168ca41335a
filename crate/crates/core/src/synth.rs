//! Kind synthesis, rewriting, and the fuel-bounded equality search.
//!
//! Synthesis builds full derivation trees bottom-up: the head's declared kind
//! is looked up, each argument is checked against the instantiated telescope
//! entry, and equality side goals are discharged by `check_equal`.
//!
//! Equality is semi-decided: declared equations are oriented left-to-right
//! and two objects are equal when they are joinable by rewriting within the
//! fuel budget.  `None` means "not established", never "unequal".

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::check::{CheckError, Derivation, EqInstance, Rule};
use crate::judgement::{
    expand, Base, Context, DefinedBody, DefinedJudgement, ExpandError, Judgement,
    JudgementBody, Kind, Member,
};
use crate::spec::{Declaration, Specification};
use crate::syntax::{Abstraction, Ann, Instantiate, Object, Position, Symbol};

/// Failures of synthesis and derivation construction.
#[derive(Clone, Debug, Error)]
pub enum SynthError {
    #[error("no declaration for {0}")]
    UnknownHead(String),
    #[error("kind mismatch: expected `{expected}`, synthesised `{found}`")]
    KindShape { expected: String, found: String },
    #[error("equality not established within fuel: `{left}` = `{right}`")]
    EqualityNotEstablished { left: String, right: String },
    #[error("declaration {0} is not an equation usable for rewriting")]
    NotAnEquation(usize),
    #[error(transparent)]
    Expand(#[from] ExpandError),
    #[error(transparent)]
    Term(#[from] crate::error::TermError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error("internal invariant violation: {0}")]
    Internal(String),
}

/// One rewriting step: the rewritten object, which equation produced it, at
/// which position, and the matched abstraction sequence.
#[derive(Clone)]
pub struct RewriteMatch<A: Ann> {
    pub result: Object<A>,
    pub equation: usize,
    pub position: Position,
    pub args: Vec<Abstraction<A>>,
}

impl<A: Ann> fmt::Debug for RewriteMatch<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "eq {} at {:?} -> {}",
            self.equation, self.position, self.result
        )
    }
}

/// Shared state of one search: the remaining rewrite budget and a memo of
/// context-validity derivations, which the member derivations request over
/// and over.
struct SearchState<A: Ann> {
    budget: u64,
    valid_memo: std::collections::HashMap<Context<A>, Derivation<A>>,
}

impl<A: Ann> SearchState<A> {
    fn new(budget: u64) -> Self {
        SearchState { budget, valid_memo: std::collections::HashMap::new() }
    }
}

/// Derive `ctx valid` from the empty context upwards.
pub fn derive_context_valid<A: Ann>(
    spec: &Specification<A>,
    ctx: &Context<A>,
    fuel: u64,
) -> Result<Derivation<A>, SynthError> {
    let mut st = SearchState::new(fuel);
    derive_valid_in(spec, ctx, &mut st)
}

fn derive_valid_in<A: Ann>(
    spec: &Specification<A>,
    ctx: &Context<A>,
    st: &mut SearchState<A>,
) -> Result<Derivation<A>, SynthError> {
    if let Some(d) = st.valid_memo.get(ctx) {
        return Ok(d.clone());
    }
    let mut d = Derivation::node(Rule::EmpCtxt, vec![], Judgement::valid(Context::empty()));
    for i in 0..ctx.len() {
        let prefix = ctx.prefix(i);
        let (_, k) = &ctx.entries()[i];
        let dj = DefinedJudgement {
            context: prefix.clone(),
            body: DefinedBody::KindWf(k.clone()),
        };
        let members = expand(&dj)?;
        let premises = derive_members(spec, &members, st)?;
        d = Derivation::node(Rule::Ctxt, premises, Judgement::valid(ctx.prefix(i + 1)));
    }
    st.valid_memo.insert(ctx.clone(), d.clone());
    Ok(d)
}

fn derive_members<A: Ann>(
    spec: &Specification<A>,
    members: &[Member<A>],
    st: &mut SearchState<A>,
) -> Result<Vec<Derivation<A>>, SynthError> {
    members
        .iter()
        .map(|m| derive_member(spec, m, st))
        .collect()
}

fn derive_member<A: Ann>(
    spec: &Specification<A>,
    member: &Member<A>,
    st: &mut SearchState<A>,
) -> Result<Derivation<A>, SynthError> {
    let ctx = &member.judgement.context;
    match &member.judgement.body {
        JudgementBody::Valid => derive_valid_in(spec, ctx, st),
        JudgementBody::Typing(m, t) => derive_typing_in(spec, ctx, m, t, st),
        JudgementBody::Equal(m, n, t) => match equal_in(spec, ctx, m, n, t, st)? {
            Some(d) => Ok(d),
            None => Err(SynthError::EqualityNotEstablished {
                left: m.to_string(),
                right: n.to_string(),
            }),
        },
    }
}

/// Synthesise the kind of `m` under `ctx`, returning the kind together with a
/// full derivation of the typing judgement.
pub fn synth_kind<A: Ann>(
    spec: &Specification<A>,
    ctx: &Context<A>,
    m: &Object<A>,
    fuel: u64,
) -> Result<(Base<A>, Derivation<A>), SynthError> {
    let mut st = SearchState::new(fuel);
    // Context validity is a precondition; fail early with a precise error.
    derive_valid_in(spec, ctx, &mut st)?;
    synth_in(spec, ctx, m, &mut st)
}

/// Derive `ctx |- m : t`, inserting a conversion step if the synthesised kind
/// differs from the requested one.
pub fn derive_typing<A: Ann>(
    spec: &Specification<A>,
    ctx: &Context<A>,
    m: &Object<A>,
    t: &Base<A>,
    fuel: u64,
) -> Result<Derivation<A>, SynthError> {
    let mut st = SearchState::new(fuel);
    derive_valid_in(spec, ctx, &mut st)?;
    derive_typing_in(spec, ctx, m, t, &mut st)
}

fn synth_in<A: Ann>(
    spec: &Specification<A>,
    ctx: &Context<A>,
    m: &Object<A>,
    st: &mut SearchState<A>,
) -> Result<(Base<A>, Derivation<A>), SynthError> {
    let head = m.head();
    let (kind, rule) = if head.is_variable() {
        let k = ctx
            .lookup(head)
            .ok_or_else(|| SynthError::UnknownHead(head.name.clone()))?;
        (k.clone(), Rule::Var)
    } else {
        let k = spec
            .constant_kind(head)
            .ok_or_else(|| SynthError::UnknownHead(head.name.clone()))?;
        (k.clone(), Rule::Const)
    };
    let theta = Context::new(kind.telescope().to_vec())?;
    let dj = DefinedJudgement {
        context: ctx.clone(),
        body: DefinedBody::SeqSat(m.args().to_vec(), theta.clone()),
    };
    let members = expand(&dj)?;
    let premises = derive_members(spec, &members, st)?;
    let target = Kind::base(kind.target().clone())
        .instantiate_seq(m.args(), &theta.domain())?
        .target()
        .clone();
    let conclusion = Judgement::typing(ctx.clone(), m.clone(), target.clone());
    Ok((target, Derivation::node(rule, premises, conclusion)))
}

fn derive_typing_in<A: Ann>(
    spec: &Specification<A>,
    ctx: &Context<A>,
    m: &Object<A>,
    t: &Base<A>,
    st: &mut SearchState<A>,
) -> Result<Derivation<A>, SynthError> {
    let (found, d) = synth_in(spec, ctx, m, st)?;
    if &found == t {
        return Ok(d);
    }
    match (&found, t) {
        (Base::El(a), Base::El(b)) => {
            let eq = equal_in(spec, ctx, a, b, &Base::Type, st)?.ok_or_else(|| {
                SynthError::EqualityNotEstablished {
                    left: a.to_string(),
                    right: b.to_string(),
                }
            })?;
            let conclusion = Judgement::typing(ctx.clone(), m.clone(), t.clone());
            Ok(Derivation::node(Rule::Conv, vec![d, eq], conclusion))
        }
        _ => Err(SynthError::KindShape {
            expected: t.to_string(),
            found: found.to_string(),
        }),
    }
}

/// All single steps of the oriented declared equations on `m`: every
/// position, every pattern equation, in a fixed order.
pub fn rewrite_step<A: Ann>(
    spec: &Specification<A>,
    _ctx: &Context<A>,
    m: &Object<A>,
) -> Vec<RewriteMatch<A>> {
    let mut out = Vec::new();
    for pos in m.positions() {
        let Some(sub) = m.subobject_at(&pos) else { continue };
        for (idx, decl) in spec.equations() {
            if !spec.equation_is_pattern(idx) {
                continue;
            }
            let Declaration::Equation { telescope, lhs, rhs, .. } = decl else {
                continue;
            };
            let Some(args) = match_pattern(telescope, lhs, sub) else {
                continue;
            };
            let doms = telescope.domain();
            let Ok(instance) = lhs.instantiate_seq(&args, &doms) else { continue };
            if &instance != sub {
                debug_assert!(false, "pattern match verification failed");
                continue;
            }
            let Ok(contractum) = rhs.instantiate_seq(&args, &doms) else { continue };
            let Some(result) = m.replace_at(&pos, contractum) else { continue };
            out.push(RewriteMatch { result, equation: idx, position: pos.clone(), args });
        }
    }
    out
}

struct MatchEnv<A: Ann> {
    // (pattern binder, subject binder with its annotation)
    pairs: Vec<(Symbol, (Symbol, A))>,
    solution: Vec<Option<Abstraction<A>>>,
}

/// Match `pattern` (with the telescope's variables as pattern variables)
/// against `subject`.  Restricted to the fragment where pattern variables are
/// applied to eta-long forms of distinct bound variables.
fn match_pattern<A: Ann>(
    telescope: &Context<A>,
    pattern: &Object<A>,
    subject: &Object<A>,
) -> Option<Vec<Abstraction<A>>> {
    let vars = telescope.domain();
    let mut env = MatchEnv { pairs: Vec::new(), solution: vec![None; vars.len()] };
    match_obj(&vars, pattern, subject, &mut env)?;
    env.solution.into_iter().collect()
}

fn match_obj<A: Ann>(
    vars: &[Symbol],
    pattern: &Object<A>,
    subject: &Object<A>,
    env: &mut MatchEnv<A>,
) -> Option<()> {
    let head = pattern.head();
    let pattern_bound = env.pairs.iter().rposition(|(p, _)| p == head);
    if pattern_bound.is_none() {
        if let Some(vi) = vars.iter().position(|v| v == head) {
            return solve_var(vi, pattern, subject, env);
        }
    }
    // Rigid head: bound variables must correspond, free symbols must agree.
    let subject_bound = env
        .pairs
        .iter()
        .rposition(|(_, (s, _))| s == subject.head());
    match (pattern_bound, subject_bound) {
        (Some(i), Some(j)) if i == j => {}
        (None, None) if head == subject.head() => {}
        _ => return None,
    }
    if pattern.args().len() != subject.args().len() {
        return None;
    }
    for (p, s) in pattern.args().iter().zip(subject.args()) {
        match_abs(vars, p, s, env)?;
    }
    Some(())
}

fn match_abs<A: Ann>(
    vars: &[Symbol],
    pattern: &Abstraction<A>,
    subject: &Abstraction<A>,
    env: &mut MatchEnv<A>,
) -> Option<()> {
    if pattern.binders().len() != subject.binders().len() {
        return None;
    }
    let mut pushed = 0;
    for ((pb, _), (sb, sa)) in pattern.binders().iter().zip(subject.binders()) {
        if pb.arity != sb.arity {
            env.pairs.truncate(env.pairs.len() - pushed);
            return None;
        }
        env.pairs.push((pb.clone(), (sb.clone(), sa.clone())));
        pushed += 1;
    }
    let r = match_obj(vars, pattern.body(), subject.body(), env);
    env.pairs.truncate(env.pairs.len() - pushed);
    r
}

fn solve_var<A: Ann>(
    vi: usize,
    pattern: &Object<A>,
    subject: &Object<A>,
    env: &mut MatchEnv<A>,
) -> Option<()> {
    // Arguments must be eta-long forms of distinct pattern-bound variables.
    let mut binders: Vec<(Symbol, A)> = Vec::with_capacity(pattern.args().len());
    let mut used: BTreeSet<usize> = BTreeSet::new();
    for arg in pattern.args() {
        let b = eta_target(arg)?;
        let idx = env.pairs.iter().rposition(|(p, _)| p == &b)?;
        if !used.insert(idx) {
            return None;
        }
        binders.push(env.pairs[idx].1.clone());
    }
    // The candidate solution abstracts the matched subject over the subject
    // counterparts; any other locally bound variable must not escape.
    let allowed: BTreeSet<&Symbol> = binders.iter().map(|(s, _)| s).collect();
    let fv = Instantiate::<A>::free_vars(subject);
    for (_, (sb, _)) in &env.pairs {
        if fv.contains(sb) && !allowed.contains(sb) {
            return None;
        }
    }
    let candidate = Abstraction::new(binders, subject.clone()).ok()?;
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

fn eta_target<A: Ann>(arg: &Abstraction<A>) -> Option<Symbol> {
    let head = arg.body().head().clone();
    if !head.is_variable() {
        return None;
    }
    if arg.binders().iter().any(|(s, _)| s == &head) {
        return None;
    }
    crate::spec::is_eta_expansion_of(arg, &head).then_some(head)
}

/// Search for a derivation of `ctx |- m = n : t`.  `Ok(None)` means the
/// search was exhausted or ran out of fuel; it is not a disproof.
pub fn check_equal<A: Ann>(
    spec: &Specification<A>,
    ctx: &Context<A>,
    m: &Object<A>,
    n: &Object<A>,
    t: &Base<A>,
    fuel: u64,
) -> Result<Option<Derivation<A>>, SynthError> {
    let mut st = SearchState::new(fuel);
    equal_in(spec, ctx, m, n, t, &mut st)
}

fn equal_in<A: Ann>(
    spec: &Specification<A>,
    ctx: &Context<A>,
    m: &Object<A>,
    n: &Object<A>,
    t: &Base<A>,
    st: &mut SearchState<A>,
) -> Result<Option<Derivation<A>>, SynthError> {
    if m == n {
        let typing = derive_typing_in(spec, ctx, m, t, st)?;
        let conclusion = Judgement::equal(ctx.clone(), m.clone(), m.clone(), t.clone());
        return Ok(Some(Derivation::node(Rule::Ref, vec![typing], conclusion)));
    }
    let Some((left_steps, right_steps)) = joinability(spec, ctx, m, n, st) else {
        // Rewriting positions do not descend into binder annotations, so two
        // objects can be equal without being joinable (notably in the
        // Church-typed framework, where labels may differ judgementally).
        // Fall back to head congruence and recurse on the components.
        if m.head() == n.head() && m.args().len() == n.args().len() {
            if let Some((d, natural)) = derive_congruence(spec, ctx, m, n, st)? {
                return coerce_equality(spec, ctx, d, &natural, t, st);
            }
        }
        return Ok(None);
    };
    let left = chain(spec, ctx, m, &left_steps, t, st)?;
    let right = chain(spec, ctx, n, &right_steps, t, st)?;
    let mirror = |r: Derivation<A>| {
        let JudgementBody::Equal(a, b, t2) = r.conclusion.body.clone() else {
            unreachable!("chains conclude equalities")
        };
        let conclusion = Judgement::equal(ctx.clone(), b, a, t2);
        Derivation::node(Rule::Sym, vec![r], conclusion)
    };
    match (left, right) {
        (ChainOutcome::Failed, _) | (_, ChainOutcome::Failed) => Ok(None),
        (ChainOutcome::Empty, ChainOutcome::Empty) => Err(SynthError::Internal(
            "joinability met without any step on distinct objects".into(),
        )),
        (ChainOutcome::Derived(l), ChainOutcome::Empty) => Ok(Some(l)),
        (ChainOutcome::Empty, ChainOutcome::Derived(r)) => Ok(Some(mirror(r))),
        (ChainOutcome::Derived(l), ChainOutcome::Derived(r)) => {
            let JudgementBody::Equal(lm, _, tt) = l.conclusion.body.clone() else {
                unreachable!("chains conclude equalities")
            };
            let r = mirror(r);
            let JudgementBody::Equal(_, rn, _) = r.conclusion.body.clone() else {
                unreachable!("chains conclude equalities")
            };
            let conclusion = Judgement::equal(ctx.clone(), lm, rn, tt);
            Ok(Some(Derivation::node(Rule::Trans, vec![l, r], conclusion)))
        }
    }
}

enum ChainOutcome<A: Ann> {
    Empty,
    Failed,
    Derived(Derivation<A>),
}

type Steps<A> = Vec<(Object<A>, RewriteMatch<A>)>;

/// Breadth-first joinability: rewrite both sides until the frontiers meet.
/// Returns the step lists from each origin to the meeting point.
fn joinability<A: Ann>(
    spec: &Specification<A>,
    ctx: &Context<A>,
    m: &Object<A>,
    n: &Object<A>,
    st: &mut SearchState<A>,
) -> Option<(Steps<A>, Steps<A>)> {
    // visited[side]: (object, path of steps from the origin)
    let mut visited: [Vec<(Object<A>, Steps<A>)>; 2] =
        [vec![(m.clone(), Vec::new())], vec![(n.clone(), Vec::new())]];
    let mut frontier: [Vec<usize>; 2] = [vec![0], vec![0]];
    loop {
        let mut progressed = false;
        for side in 0..2 {
            let mut next = Vec::new();
            for &vi in &frontier[side] {
                let (u, path) = visited[side][vi].clone();
                if st.budget == 0 {
                    return None;
                }
                for rm in rewrite_step(spec, ctx, &u) {
                    if st.budget == 0 {
                        return None;
                    }
                    st.budget -= 1;
                    let v = rm.result.clone();
                    if visited[side].iter().any(|(seen, _)| seen == &v) {
                        continue;
                    }
                    let mut new_path = path.clone();
                    new_path.push((u.clone(), rm));
                    // Meet check against the other side.
                    if let Some((_, other_path)) =
                        visited[1 - side].iter().find(|(seen, _)| seen == &v)
                    {
                        let (lp, rp) = if side == 0 {
                            (new_path, other_path.clone())
                        } else {
                            (other_path.clone(), new_path)
                        };
                        return Some((lp, rp));
                    }
                    visited[side].push((v, new_path));
                    next.push(visited[side].len() - 1);
                    progressed = true;
                }
            }
            frontier[side] = next;
        }
        // Also handle the degenerate meet where one origin is reachable
        // without any step from the other: covered above since origins are in
        // `visited` from the start.
        if !progressed {
            return None;
        }
    }
}

/// Derive the chained equality `ctx |- start = end : t` along the steps.
fn chain<A: Ann>(
    spec: &Specification<A>,
    ctx: &Context<A>,
    start: &Object<A>,
    steps: &Steps<A>,
    t: &Base<A>,
    st: &mut SearchState<A>,
) -> Result<ChainOutcome<A>, SynthError> {
    if steps.is_empty() {
        return Ok(ChainOutcome::Empty);
    }
    let mut acc: Option<Derivation<A>> = None;
    let mut from = start.clone();
    for (u, rm) in steps {
        debug_assert!(&from == u, "chain steps out of order");
        let Some((d, natural)) = derive_rewrite(spec, ctx, u, rm, st)? else {
            return Ok(ChainOutcome::Failed);
        };
        let Some(d) = coerce_equality(spec, ctx, d, &natural, t, st)? else {
            return Ok(ChainOutcome::Failed);
        };
        from = rm.result.clone();
        acc = Some(match acc {
            None => d,
            Some(prev) => {
                let JudgementBody::Equal(a, _, _) = prev.conclusion.body.clone() else {
                    unreachable!()
                };
                let JudgementBody::Equal(_, c, _) = d.conclusion.body.clone() else {
                    unreachable!()
                };
                let conclusion = Judgement::equal(ctx.clone(), a, c, t.clone());
                Derivation::node(Rule::Trans, vec![prev, d], conclusion)
            }
        });
    }
    Ok(ChainOutcome::Derived(acc.expect("nonempty steps")))
}

/// Re-kind an equality derivation at `t`, inserting a conversion when the
/// natural kind differs.
fn coerce_equality<A: Ann>(
    spec: &Specification<A>,
    ctx: &Context<A>,
    d: Derivation<A>,
    natural: &Base<A>,
    t: &Base<A>,
    st: &mut SearchState<A>,
) -> Result<Option<Derivation<A>>, SynthError> {
    if natural == t {
        return Ok(Some(d));
    }
    match (natural, t) {
        (Base::El(a), Base::El(b)) => {
            let Some(eq) = equal_in(spec, ctx, a, b, &Base::Type, st)? else {
                return Ok(None);
            };
            let JudgementBody::Equal(m, n, _) = d.conclusion.body.clone() else {
                return Err(SynthError::Internal("coercion of a non-equality".into()));
            };
            let conclusion = Judgement::equal(ctx.clone(), m, n, t.clone());
            Ok(Some(Derivation::node(Rule::ConvEq, vec![d, eq], conclusion)))
        }
        _ => Err(SynthError::KindShape {
            expected: t.to_string(),
            found: natural.to_string(),
        }),
    }
}

/// Derive `ctx |- u = v : natural` for a single rewrite step, where `v` is
/// the rewritten object and `natural` the kind the congruence naturally
/// produces.
fn derive_rewrite<A: Ann>(
    spec: &Specification<A>,
    ctx: &Context<A>,
    u: &Object<A>,
    rm: &RewriteMatch<A>,
    st: &mut SearchState<A>,
) -> Result<Option<(Derivation<A>, Base<A>)>, SynthError> {
    match rm.position.split_first() {
        None => {
            let Some(Declaration::Equation { telescope, lhs, rhs, target }) =
                spec.declarations().get(rm.equation)
            else {
                return Err(SynthError::NotAnEquation(rm.equation));
            };
            let dj = DefinedJudgement {
                context: ctx.clone(),
                body: DefinedBody::SeqSat(rm.args.clone(), telescope.clone()),
            };
            let members = expand(&dj)?;
            let premises = derive_members(spec, &members, st)?;
            let doms = telescope.domain();
            let il = lhs.instantiate_seq(&rm.args, &doms)?;
            let ir = rhs.instantiate_seq(&rm.args, &doms)?;
            let it = target.instantiate_seq(&rm.args, &doms)?;
            debug_assert!(&il == u, "equation instance does not match the redex");
            let conclusion = Judgement::equal(ctx.clone(), il, ir, it.clone());
            let node = Derivation {
                rule: Rule::Eq,
                premises,
                conclusion,
                instance: Some(EqInstance { equation: rm.equation, args: rm.args.clone() }),
            };
            Ok(Some((node, it)))
        }
        Some((&i, rest)) => {
            let head = u.head().clone();
            let kind = if head.is_variable() {
                ctx.lookup(&head)
                    .cloned()
                    .ok_or_else(|| SynthError::UnknownHead(head.name.clone()))?
            } else {
                spec.constant_kind(&head)
                    .cloned()
                    .ok_or_else(|| SynthError::UnknownHead(head.name.clone()))?
            };
            let theta = Context::new(kind.telescope().to_vec())?;
            let doms = theta.domain();
            // Instantiated kind of the i-th argument.
            let k_i = theta.entries()[i]
                .1
                .instantiate_seq(&u.args()[..i].to_vec(), &doms[..i])?;
            // Keep the argument's own binder names unless they would shadow
            // the ambient context; the matched abstractions mention them.
            let mut taken: BTreeSet<String> =
                ctx.entries().iter().map(|(s, _)| s.name.clone()).collect();
            for s in Instantiate::<A>::free_vars(&k_i) {
                taken.insert(s.name);
            }
            for s in Instantiate::<A>::free_vars(&u.args()[i]) {
                taken.insert(s.name);
            }
            for s in Instantiate::<A>::free_vars(&rm.result.args()[i]) {
                taken.insert(s.name);
            }
            let originals: Vec<Symbol> =
                u.args()[i].binder_symbols().cloned().collect();
            let mut tel_doms: Vec<Symbol> = Vec::with_capacity(originals.len());
            let mut renames: Vec<(Symbol, Symbol)> = Vec::new();
            for b in &originals {
                if taken.contains(&b.name) {
                    let name = crate::syntax::fresh_name(&b.name, |n| taken.contains(n));
                    taken.insert(name.clone());
                    let fresh = Symbol::var(name, b.arity.clone());
                    renames.push((b.clone(), fresh.clone()));
                    tel_doms.push(fresh);
                } else {
                    taken.insert(b.name.clone());
                    tel_doms.push(b.clone());
                }
            }
            let opened = k_i
                .rename_telescope_to(&tel_doms)
                .map_err(SynthError::Term)?;
            let tgt = opened.target().clone();
            let mut inner_ctx = ctx.clone();
            for (s, k) in opened.telescope() {
                inner_ctx = inner_ctx.extended(s.clone(), k.clone())?;
            }
            let body_u = open_to(&u.args()[i], &tel_doms)?;
            let body_v = open_to(&rm.result.args()[i], &tel_doms)?;
            let inner_args: Vec<Abstraction<A>> = rm
                .args
                .iter()
                .map(|a| {
                    renames
                        .iter()
                        .fold(a.clone(), |acc, (old, new)| acc.rename_free(old, new))
                })
                .collect();
            let inner_rm = RewriteMatch {
                result: body_v,
                equation: rm.equation,
                position: rest.to_vec(),
                args: inner_args,
            };
            let Some((inner_d, inner_natural)) =
                derive_rewrite(spec, &inner_ctx, &body_u, &inner_rm, st)?
            else {
                return Ok(None);
            };
            let Some(inner_d) =
                coerce_equality(spec, &inner_ctx, inner_d, &inner_natural, &tgt, st)?
            else {
                return Ok(None);
            };
            // Assemble the congruence node.
            let dj = DefinedJudgement {
                context: ctx.clone(),
                body: DefinedBody::SeqEq(
                    u.args().to_vec(),
                    rm.result.args().to_vec(),
                    theta.clone(),
                ),
            };
            let members = expand(&dj)?;
            let mut premises = Vec::with_capacity(members.len());
            let mut used_inner = false;
            for member in &members {
                let d = match &member.judgement.body {
                    JudgementBody::Valid => {
                        derive_valid_in(spec, &member.judgement.context, st)?
                    }
                    JudgementBody::Typing(m, t) => {
                        derive_typing_in(spec, &member.judgement.context, m, t, st)?
                    }
                    JudgementBody::Equal(m1, m2, t) => {
                        if m1 == m2 {
                            let typing = derive_typing_in(
                                spec,
                                &member.judgement.context,
                                m1,
                                t,
                                st,
                            )?;
                            let conclusion = Judgement::equal(
                                member.judgement.context.clone(),
                                m1.clone(),
                                m2.clone(),
                                t.clone(),
                            );
                            Derivation::node(Rule::Ref, vec![typing], conclusion)
                        } else if !used_inner && member.matches(&inner_d.conclusion) {
                            used_inner = true;
                            inner_d.clone()
                        } else {
                            match equal_in(spec, &member.judgement.context, m1, m2, t, st)? {
                                Some(d) => d,
                                None => return Ok(None),
                            }
                        }
                    }
                };
                premises.push(d);
            }
            let natural = Kind::base(kind.target().clone())
                .instantiate_seq(u.args(), &doms)?
                .target()
                .clone();
            let rule = if head.is_variable() { Rule::VarEq } else { Rule::ConstEq };
            let conclusion =
                Judgement::equal(ctx.clone(), u.clone(), rm.result.clone(), natural.clone());
            Ok(Some((Derivation::node(rule, premises, conclusion), natural)))
        }
    }
}

/// Rename an abstraction's binders to the given domain and return the body.
fn open_to<A: Ann>(
    abs: &Abstraction<A>,
    doms: &[Symbol],
) -> Result<Object<A>, SynthError> {
    let (_, body) = crate::judgement::rename_binders_to(abs, doms)
        .map_err(SynthError::Expand)?;
    Ok(body)
}

/// Derive `ctx |- m = n : natural` by the head congruence rule, discharging
/// every expansion member recursively.
fn derive_congruence<A: Ann>(
    spec: &Specification<A>,
    ctx: &Context<A>,
    m: &Object<A>,
    n: &Object<A>,
    st: &mut SearchState<A>,
) -> Result<Option<(Derivation<A>, Base<A>)>, SynthError> {
    let head = m.head().clone();
    let kind = if head.is_variable() {
        match ctx.lookup(&head) {
            Some(k) => k.clone(),
            None => return Ok(None),
        }
    } else {
        match spec.constant_kind(&head) {
            Some(k) => k.clone(),
            None => return Ok(None),
        }
    };
    let theta = Context::new(kind.telescope().to_vec())?;
    let dj = DefinedJudgement {
        context: ctx.clone(),
        body: DefinedBody::SeqEq(m.args().to_vec(), n.args().to_vec(), theta.clone()),
    };
    let members = match expand(&dj) {
        Ok(ms) => ms,
        Err(_) => return Ok(None),
    };
    let mut premises = Vec::with_capacity(members.len());
    for member in &members {
        let mctx = &member.judgement.context;
        let d = match &member.judgement.body {
            JudgementBody::Valid => derive_valid_in(spec, mctx, st)?,
            JudgementBody::Typing(a, t) => derive_typing_in(spec, mctx, a, t, st)?,
            JudgementBody::Equal(a, b, t) => match equal_in(spec, mctx, a, b, t, st)? {
                Some(d) => d,
                None => return Ok(None),
            },
        };
        premises.push(d);
    }
    let natural = Kind::base(kind.target().clone())
        .instantiate_seq(m.args(), &theta.domain())?
        .target()
        .clone();
    let rule = if head.is_variable() { Rule::VarEq } else { Rule::ConstEq };
    let conclusion = Judgement::equal(ctx.clone(), m.clone(), n.clone(), natural.clone());
    Ok(Some((Derivation::node(rule, premises, conclusion), natural)))
}

/// Derive all members of `ctx ||- fs = gs :: theta`, using reflexivity where
/// the sides agree and the equality search otherwise.
pub fn derive_seq_eq_members<A: Ann>(
    spec: &Specification<A>,
    ctx: &Context<A>,
    fs: &[Abstraction<A>],
    gs: &[Abstraction<A>],
    theta: &Context<A>,
    fuel: u64,
) -> Result<Option<Vec<Derivation<A>>>, SynthError> {
    let mut st = SearchState::new(fuel);
    let dj = DefinedJudgement {
        context: ctx.clone(),
        body: DefinedBody::SeqEq(fs.to_vec(), gs.to_vec(), theta.clone()),
    };
    let members = expand(&dj)?;
    let mut out = Vec::with_capacity(members.len());
    for member in &members {
        let mctx = &member.judgement.context;
        let d = match &member.judgement.body {
            JudgementBody::Valid => derive_valid_in(spec, mctx, &mut st)?,
            JudgementBody::Typing(m, t) => derive_typing_in(spec, mctx, m, t, &mut st)?,
            JudgementBody::Equal(m, n, t) => {
                match equal_in(spec, mctx, m, n, t, &mut st)? {
                    Some(d) => d,
                    None => return Ok(None),
                }
            }
        };
        out.push(d);
    }
    Ok(Some(out))
}

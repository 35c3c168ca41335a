//! Seeded random generators: raw well-aritied terms for the instantiation
//! algebra, and well-typed terms under the dependent-product reference
//! theory for the checker and translation suites.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use tf_kernel::arity::Arity;
use tf_kernel::judgement::{Base, Context, Kind};
use tf_kernel::spec::Specification;
use tf_kernel::synth::synth_kind;
use tf_kernel::syntax::{
    employ, Abstraction, Instantiate, Object, Symbol, TfAbstraction, TfObject,
};

/// Generator of raw well-aritied terms over a fixed symbol pool with arity
/// order at most 2.
pub struct RawTermGen {
    rng: StdRng,
    pool: Vec<Symbol>,
    counter: u32,
}

impl RawTermGen {
    pub fn new(seed: u64) -> Self {
        let unary = Arity::first_order(1);
        let binary = Arity::first_order(2);
        let second = Arity::new(vec![unary.clone()]);
        let mixed = Arity::new(vec![unary.clone(), Arity::base()]);
        let mut pool = Vec::new();
        for (i, a) in [Arity::base(), Arity::base(), unary.clone(), binary.clone(), second.clone(), mixed.clone()]
            .iter()
            .enumerate()
        {
            pool.push(Symbol::var(format!("u{i}"), a.clone()));
        }
        for (i, a) in [Arity::base(), unary, binary, second, mixed].iter().enumerate() {
            pool.push(Symbol::constant(format!("k{i}"), a.clone()));
        }
        RawTermGen { rng: StdRng::seed_from_u64(seed), pool, counter: 0 }
    }

    pub fn rng(&mut self) -> &mut StdRng {
        &mut self.rng
    }

    fn fresh_var(&mut self, arity: Arity) -> Symbol {
        self.counter += 1;
        Symbol::var(format!("w{}", self.counter), arity)
    }

    /// A random variable from the pool, of any arity of order <= 2.
    pub fn any_pool_variable(&mut self) -> Symbol {
        let vars: Vec<Symbol> = self
            .pool
            .iter()
            .filter(|s| s.is_variable())
            .cloned()
            .collect();
        vars[self.rng.gen_range(0..vars.len())].clone()
    }

    /// A random well-aritied object of bounded size, over the pool plus the
    /// given extra variables.
    pub fn object(&mut self, extra: &[Symbol], size: usize) -> TfObject {
        let heads: Vec<Symbol> = self
            .pool
            .iter()
            .cloned()
            .chain(extra.iter().cloned())
            .filter(|s| size >= 1 + s.arity.len())
            .collect();
        let base_heads: Vec<Symbol> = heads
            .iter()
            .filter(|s| s.arity.is_base())
            .cloned()
            .collect();
        let head = if size <= 1 || self.rng.gen_bool(0.35) {
            if base_heads.is_empty() {
                heads[self.rng.gen_range(0..heads.len())].clone()
            } else {
                base_heads[self.rng.gen_range(0..base_heads.len())].clone()
            }
        } else {
            heads[self.rng.gen_range(0..heads.len())].clone()
        };
        let n = head.arity.len();
        let child_budget = if n == 0 { 0 } else { (size.saturating_sub(1)) / n };
        let args: Vec<TfAbstraction> = head
            .arity
            .children()
            .to_vec()
            .into_iter()
            .map(|a| self.abstraction_at(extra, &a, child_budget.max(1)))
            .collect();
        Object::new(head, args).expect("generated arities agree")
    }

    /// A random abstraction of the given arity.
    pub fn abstraction_at(
        &mut self,
        extra: &[Symbol],
        arity: &Arity,
        size: usize,
    ) -> TfAbstraction {
        let binders: Vec<Symbol> = arity
            .children()
            .iter()
            .map(|a| self.fresh_var(a.clone()))
            .collect();
        let mut inner: Vec<Symbol> = extra.to_vec();
        inner.extend(binders.iter().cloned());
        let body = self.object(&inner, size);
        Abstraction::new(binders.into_iter().map(|b| (b, ())).collect(), body)
            .expect("generated binders are distinct")
    }
}

/// Generator of well-typed entities under the dependent-product theory.
pub struct TypedGen {
    pub spec: Specification<()>,
    rng: StdRng,
    counter: u32,
}

/// A generated typed term: the object and the carrier of its `El` kind.
#[derive(Clone, Debug)]
pub struct TypedTerm {
    pub term: TfObject,
    pub carrier: TfObject,
}

impl TypedGen {
    pub fn new(seed: u64) -> Self {
        TypedGen {
            spec: tf_kernel::fixtures::sigma_pi(),
            rng: StdRng::seed_from_u64(seed),
            counter: 0,
        }
    }

    pub fn rng(&mut self) -> &mut StdRng {
        &mut self.rng
    }

    fn fresh(&mut self, base: &str) -> String {
        self.counter += 1;
        format!("{base}{}", self.counter)
    }

    fn pi(&self) -> Symbol {
        self.spec.lookup_constant_name("Pi").unwrap().0.clone()
    }

    fn lam_c(&self) -> Symbol {
        self.spec.lookup_constant_name("lam").unwrap().0.clone()
    }

    fn app_c(&self) -> Symbol {
        self.spec.lookup_constant_name("app").unwrap().0.clone()
    }

    /// A context seeded with type variables, a type family, and element
    /// variables; always contains at least one `Type` variable and one
    /// element of it, so terms can be produced at every depth.
    pub fn context(&mut self) -> Context<()> {
        let a = Symbol::base_var(self.fresh("A"));
        let mut ctx = Context::new(vec![(a.clone(), Kind::ty())]).unwrap();
        if self.rng.gen_bool(0.5) {
            let a2 = Symbol::base_var(self.fresh("A"));
            ctx = ctx.extended(a2, Kind::ty()).unwrap();
        }
        let fam = if self.rng.gen_bool(0.7) {
            let b = Symbol::var(self.fresh("B"), Arity::first_order(1));
            let x = Symbol::base_var("x");
            let k = Kind::new(
                vec![(x, Kind::el(Object::leaf(a.clone()).unwrap()))],
                Base::Type,
            )
            .unwrap();
            ctx = ctx.extended(b.clone(), k).unwrap();
            Some(b)
        } else {
            None
        };
        // Two elements of the first type, so a cut point always has an
        // inhabitant available on its left.
        let t1 = Symbol::base_var(self.fresh("t"));
        ctx = ctx
            .extended(t1.clone(), Kind::el(Object::leaf(a.clone()).unwrap()))
            .unwrap();
        if self.rng.gen_bool(0.7) {
            let t2 = Symbol::base_var(self.fresh("t"));
            ctx = ctx
                .extended(t2, Kind::el(Object::leaf(a.clone()).unwrap()))
                .unwrap();
        }
        // An element of a dependent carrier, when a family is in scope.
        if let Some(b) = fam {
            if self.rng.gen_bool(0.7) {
                let u = Symbol::base_var(self.fresh("u"));
                let carrier = Object::new(
                    b,
                    vec![TfAbstraction::constant(Object::leaf(t1.clone()).unwrap())],
                )
                .unwrap();
                ctx = ctx.extended(u, Kind::el(carrier)).unwrap();
            }
        }
        // Occasionally a function element, so applications can draw on the
        // context.
        if self.rng.gen_bool(0.4) {
            let g = Symbol::base_var(self.fresh("g"));
            let x = Symbol::base_var("x");
            let pi_ty = Object::new(
                self.pi(),
                vec![
                    TfAbstraction::constant(Object::leaf(a.clone()).unwrap()),
                    TfAbstraction::unann(vec![x], Object::leaf(a.clone()).unwrap())
                        .unwrap(),
                ],
            )
            .unwrap();
            ctx = ctx.extended(g, Kind::el(pi_ty)).unwrap();
        }
        ctx
    }

    fn type_variables(&self, ctx: &Context<()>) -> Vec<Symbol> {
        ctx.entries()
            .iter()
            .filter(|(_, k)| k.is_base() && k.target() == &Base::Type)
            .map(|(s, _)| s.clone())
            .collect()
    }

    fn element_variables(&self, ctx: &Context<()>) -> Vec<(Symbol, TfObject)> {
        ctx.entries()
            .iter()
            .filter_map(|(s, k)| match (k.is_base(), k.target()) {
                (true, Base::El(c)) => Some((s.clone(), c.clone())),
                _ => None,
            })
            .collect()
    }

    fn family_variables(&self, ctx: &Context<()>) -> Vec<(Symbol, TfObject)> {
        // Variables B : (x : El A) Type, together with A.
        ctx.entries()
            .iter()
            .filter_map(|(s, k)| {
                if k.telescope().len() == 1 && k.target() == &Base::Type {
                    match k.telescope()[0].1.target() {
                        Base::El(a) if k.telescope()[0].1.is_base() => {
                            Some((s.clone(), a.clone()))
                        }
                        _ => None,
                    }
                } else {
                    None
                }
            })
            .collect()
    }

    /// A random object of kind `Type` under `ctx`.
    pub fn ty(&mut self, ctx: &Context<()>, depth: usize) -> TfObject {
        let vars = self.type_variables(ctx);
        if depth == 0 || self.rng.gen_bool(0.4) {
            // A bare type variable, or a family applied to an element.
            let fams = self.family_variables(ctx);
            if !fams.is_empty() && self.rng.gen_bool(0.3) {
                let (b, a) = fams[self.rng.gen_range(0..fams.len())].clone();
                if let Some(arg) = self.term_of(ctx, &a, depth.saturating_sub(1)) {
                    return Object::new(b, vec![TfAbstraction::constant(arg)]).unwrap();
                }
            }
            let v = vars[self.rng.gen_range(0..vars.len())].clone();
            return Object::leaf(v).unwrap();
        }
        // Pi A ([x] B)
        let dom = self.ty(ctx, depth - 1);
        let x = Symbol::base_var(self.fresh("x"));
        let inner = ctx
            .extended(x.clone(), Kind::el(dom.clone()))
            .expect("fresh binder");
        let cod = self.ty(&inner, depth - 1);
        Object::new(
            self.pi(),
            vec![
                TfAbstraction::constant(dom),
                TfAbstraction::unann(vec![x], cod).unwrap(),
            ],
        )
        .unwrap()
    }

    /// A random well-typed term with its carrier.
    pub fn term(&mut self, ctx: &Context<()>, depth: usize) -> Option<TypedTerm> {
        for _ in 0..8 {
            let choice = if depth == 0 { 0 } else { self.rng.gen_range(0..10) };
            match choice {
                // Context element.
                0..=3 => {
                    let elems = self.element_variables(ctx);
                    if elems.is_empty() {
                        continue;
                    }
                    let (v, c) = elems[self.rng.gen_range(0..elems.len())].clone();
                    return Some(TypedTerm {
                        term: Object::leaf(v).unwrap(),
                        carrier: c,
                    });
                }
                // Abstraction.
                4..=6 => {
                    if let Some(t) = self.lam_term(ctx, depth) {
                        return Some(t);
                    }
                }
                // Application of a generated function.
                _ => {
                    if let Some(t) = self.app_term(ctx, depth) {
                        return Some(t);
                    }
                }
            }
        }
        let elems = self.element_variables(ctx);
        if elems.is_empty() {
            return None;
        }
        let (v, c) = elems[self.rng.gen_range(0..elems.len())].clone();
        Some(TypedTerm { term: Object::leaf(v).unwrap(), carrier: c })
    }

    fn lam_term(&mut self, ctx: &Context<()>, depth: usize) -> Option<TypedTerm> {
        let dom = self.ty(ctx, depth.saturating_sub(1).min(1));
        let x = Symbol::base_var(self.fresh("x"));
        let inner = ctx.extended(x.clone(), Kind::el(dom.clone())).ok()?;
        let body = self.term(&inner, depth - 1)?;
        let fam = TfAbstraction::unann(vec![x.clone()], body.carrier.clone()).unwrap();
        let term = Object::new(
            self.lam_c(),
            vec![
                TfAbstraction::constant(dom.clone()),
                fam.clone(),
                TfAbstraction::unann(vec![x], body.term).unwrap(),
            ],
        )
        .unwrap();
        let carrier = Object::new(
            self.pi(),
            vec![TfAbstraction::constant(dom), fam],
        )
        .unwrap();
        Some(TypedTerm { term, carrier })
    }

    fn app_term(&mut self, ctx: &Context<()>, depth: usize) -> Option<TypedTerm> {
        // Build or find a function of a Pi carrier, then apply it.
        let fun = {
            // Prefer context functions when available.
            let pi_elems: Vec<(Symbol, TfObject)> = self
                .element_variables(ctx)
                .into_iter()
                .filter(|(_, c)| !c.is_leaf() && c.head().name == "Pi")
                .collect();
            if !pi_elems.is_empty() && self.rng.gen_bool(0.5) {
                let (v, c) = pi_elems[self.rng.gen_range(0..pi_elems.len())].clone();
                TypedTerm { term: Object::leaf(v).unwrap(), carrier: c }
            } else {
                self.lam_term(ctx, depth)?
            }
        };
        let c = &fun.carrier;
        if c.is_leaf() || c.head().name != "Pi" {
            return None;
        }
        let dom = fun.carrier.args()[0].body().clone();
        let fam = fun.carrier.args()[1].clone();
        let arg = self.term_of(ctx, &dom, depth.saturating_sub(1))?;
        let result_carrier = employ(&fam, &TfAbstraction::constant(arg.clone()))
            .ok()?
            .as_object()?
            .clone();
        let term = Object::new(
            self.app_c(),
            vec![
                TfAbstraction::constant(dom),
                fam,
                TfAbstraction::constant(fun.term),
                TfAbstraction::constant(arg),
            ],
        )
        .unwrap();
        Some(TypedTerm { term, carrier: result_carrier })
    }

    /// A term of a given carrier, when one can be built.
    pub fn term_of(
        &mut self,
        ctx: &Context<()>,
        carrier: &TfObject,
        depth: usize,
    ) -> Option<TfObject> {
        // Direct hits from the context.
        let hits: Vec<Symbol> = self
            .element_variables(ctx)
            .into_iter()
            .filter(|(_, c)| c == carrier)
            .map(|(v, _)| v)
            .collect();
        if !hits.is_empty() && (depth == 0 || self.rng.gen_bool(0.7)) {
            let v = hits[self.rng.gen_range(0..hits.len())].clone();
            return Some(Object::leaf(v).unwrap());
        }
        if !carrier.is_leaf() && carrier.head().name == "Pi" && depth > 0 {
            // Build an abstraction of that exact product carrier.
            let dom = carrier.args()[0].body().clone();
            let fam = carrier.args()[1].clone();
            let x = fam.binders()[0].0.clone();
            let inner = match ctx.extended(x.clone(), Kind::el(dom.clone())) {
                Ok(c) => c,
                Err(_) => {
                    // Rename the family binder apart from the context.
                    let mut avoid: std::collections::BTreeSet<String> = ctx
                        .entries()
                        .iter()
                        .map(|(s, _)| s.name.clone())
                        .collect();
                    for s in Instantiate::<()>::free_vars(&fam) {
                        avoid.insert(s.name);
                    }
                    let (binders, body) = fam.open_avoiding(&avoid);
                    let fresh = binders[0].0.clone();
                    let fam2 = Abstraction::new(binders, body).unwrap();
                    let inner = ctx.extended(fresh.clone(), Kind::el(dom.clone())).ok()?;
                    let body = self.term_of(
                        &inner,
                        fam2.body(),
                        depth - 1,
                    )?;
                    let term = Object::new(
                        self.lam_c(),
                        vec![
                            TfAbstraction::constant(dom),
                            fam2.clone(),
                            TfAbstraction::unann(vec![fresh], body).unwrap(),
                        ],
                    )
                    .unwrap();
                    return Some(term);
                }
            };
            let body = self.term_of(&inner, fam.body(), depth - 1)?;
            let term = Object::new(
                self.lam_c(),
                vec![
                    TfAbstraction::constant(dom),
                    fam.clone(),
                    TfAbstraction::unann(vec![x], body).unwrap(),
                ],
            )
            .unwrap();
            return Some(term);
        }
        if !hits.is_empty() {
            let v = hits[self.rng.gen_range(0..hits.len())].clone();
            return Some(Object::leaf(v).unwrap());
        }
        None
    }

    /// Replace a random base subterm of `m` by a one-step beta expansion that
    /// reduces back to it, preserving the kind exactly.
    pub fn beta_expand(&mut self, ctx: &Context<()>, m: &TfObject) -> Option<TfObject> {
        let positions = m.positions();
        for _ in 0..positions.len().max(1) * 2 {
            let pos = positions[self.rng.gen_range(0..positions.len())].clone();
            let Some(result) = self.beta_expand_at(ctx, m, &pos) else { continue };
            return Some(result);
        }
        None
    }

    fn beta_expand_at(
        &mut self,
        ctx: &Context<()>,
        m: &TfObject,
        pos: &[usize],
    ) -> Option<TfObject> {
        let sub = m.subobject_at(pos)?.clone();
        let inner_ctx = context_at_position(&self.spec, ctx, m, pos)?;
        // The subterm must be element-kinded for the expansion to type.
        let (kind, _) = synth_kind(&self.spec, &inner_ctx, &sub, 64).ok()?;
        let Base::El(c) = kind else { return None };
        // Any element of the inner context can serve as the discarded
        // argument.
        let elems = self.element_variables(&inner_ctx);
        if elems.is_empty() {
            return None;
        }
        let (v, a) = elems[self.rng.gen_range(0..elems.len())].clone();
        let x = Symbol::base_var(self.fresh("x"));
        if Instantiate::<()>::free_vars(&sub).contains(&x) {
            return None;
        }
        let fam = TfAbstraction::unann(vec![x.clone()], c).unwrap();
        let body = TfAbstraction::unann(vec![x], sub).unwrap();
        let redex = Object::new(
            self.app_c(),
            vec![
                TfAbstraction::constant(a.clone()),
                fam.clone(),
                TfAbstraction::constant(
                    Object::new(
                        self.lam_c(),
                        vec![TfAbstraction::constant(a), fam, body],
                    )
                    .unwrap(),
                ),
                TfAbstraction::constant(Object::leaf(v).unwrap()),
            ],
        )
        .unwrap();
        m.replace_at(pos, redex)
    }
}

/// The context in force at a position of a well-typed object: the ambient
/// context extended with the instantiated binder kinds crossed on the way.
pub fn context_at_position(
    spec: &Specification<()>,
    ctx: &Context<()>,
    m: &TfObject,
    pos: &[usize],
) -> Option<Context<()>> {
    let mut ctx = ctx.clone();
    let mut current = m.clone();
    for &i in pos {
        let head = current.head().clone();
        let kind = if head.is_variable() {
            ctx.lookup(&head)?.clone()
        } else {
            spec.constant_kind(&head)?.clone()
        };
        let theta = Context::new(kind.telescope().to_vec()).ok()?;
        let doms = theta.domain();
        let k_i = theta.entries()[i]
            .1
            .instantiate_seq(&current.args()[..i].to_vec(), &doms[..i])
            .ok()?;
        let arg = current.args()[i].clone();
        // Pair the argument's actual binders with the instantiated kinds.
        let opened = k_i
            .rename_telescope_to(
                &arg.binder_symbols().cloned().collect::<Vec<_>>(),
            )
            .ok()?;
        for (s, k) in opened.telescope() {
            ctx = ctx.extended(s.clone(), k.clone()).ok()?;
        }
        current = arg.body().clone();
    }
    Some(ctx)
}

use tf_kernel::lf::{self, LfObject, LfSpecification, LfTelescope};
use tf_kernel::tfk::{self, KindAnn, KObject};

impl TypedGen {
    /// Replace the first replaceable binder label of a labelled object by a
    /// judgementally equal but syntactically different kind: the carrier's
    /// element subterm gets beta-expanded.  Returns a term that is still
    /// typable but no longer carries canonical labels.
    pub fn perturb_label(&mut self, ctx: &Context<()>, m: &KObject) -> Option<KObject> {
        let erased_ctx = ctx.clone();
        for (j, arg) in m.args().iter().enumerate() {
            if arg.binders().is_empty() {
                continue;
            }
            let (sym, KindAnn(kind)) = &arg.binders()[0];
            if !kind.is_base() {
                continue;
            }
            let Base::El(carrier) = kind.target() else { continue };
            let erased_carrier = tfk::erase_object(carrier);
            let Some(expanded) = self.beta_expand(&erased_ctx, &erased_carrier) else {
                continue;
            };
            let relabelled =
                tfk::label_object(&self.spec, &erased_ctx, &expanded).ok()?;
            let new_ann = KindAnn(Kind::el(relabelled));
            let mut binders = arg.binders().to_vec();
            binders[0] = (sym.clone(), new_ann);
            let new_arg =
                Abstraction::new(binders, arg.body().clone()).ok()?;
            let mut args = m.args().to_vec();
            args[j] = new_arg;
            return Object::new(m.head().clone(), args).ok();
        }
        None
    }

    /// Wrap a typable framework object in a beta redex at the root: an
    /// identity abstraction at its inferred kind applied to it.
    pub fn lf_beta_wrap(
        &mut self,
        spec: &LfSpecification,
        ctx: &LfTelescope,
        k: &LfObject,
    ) -> Option<LfObject> {
        let mut budget = lf::Budget::new(256);
        let kind = lf::infer(spec, ctx, k, &mut budget).ok()?;
        let mut name = "w".to_string();
        let fv = lf::free_vars_obj(k);
        while fv.contains(&name) || ctx.iter().any(|(n, _)| n == &name) {
            name.push('\'');
        }
        Some(LfObject::App(
            Box::new(LfObject::Lam(
                name.clone(),
                Box::new(kind),
                Box::new(LfObject::Var(name)),
            )),
            Box::new(k.clone()),
        ))
    }

    /// Eta-expand the first abstraction subterm, introducing reduction work
    /// while preserving typability.
    pub fn lf_eta_wrap(&mut self, k: &LfObject) -> Option<LfObject> {
        for pos in lf::positions(k) {
            let Some(sub) = lf::subobject_at(k, &pos) else { continue };
            if let LfObject::Lam(_, dom, _) = sub {
                let mut name = "e".to_string();
                let fv = lf::free_vars_obj(sub);
                while fv.contains(&name) {
                    name.push('\'');
                }
                let expanded = LfObject::Lam(
                    name.clone(),
                    dom.clone(),
                    Box::new(LfObject::App(
                        Box::new(sub.clone()),
                        Box::new(LfObject::Var(name)),
                    )),
                );
                return lf::replace_at(k, &pos, expanded);
            }
        }
        None
    }
}

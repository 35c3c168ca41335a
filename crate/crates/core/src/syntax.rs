//! The term language shared by the Curry-typed and Church-typed frameworks.
//!
//! Terms are lambda-free: an object is always a symbol applied to a full
//! argument list, and the arguments are abstractions.  There is no framework
//! reduction; substitution is replaced by *instantiation*, which contracts
//! hereditarily as it substitutes, and application by *employment*.
//!
//! The syntax is generic over the binder annotation payload [`Ann`]: the
//! Curry-typed framework stores nothing on binders (`()`), the Church-typed
//! one stores a kind (see `tfk`).

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::arity::Arity;
use crate::error::TermError;

/// Whether a symbol is a variable or a constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolSort {
    Variable,
    Constant,
}

/// A named symbol with its sort and arity.  Two symbols are the same exactly
/// when name, sort and arity all agree.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    pub name: String,
    pub sort: SymbolSort,
    pub arity: Arity,
}

impl Symbol {
    pub fn var(name: impl Into<String>, arity: Arity) -> Self {
        Symbol { name: name.into(), sort: SymbolSort::Variable, arity }
    }

    pub fn constant(name: impl Into<String>, arity: Arity) -> Self {
        Symbol { name: name.into(), sort: SymbolSort::Constant, arity }
    }

    pub fn base_var(name: impl Into<String>) -> Self {
        Symbol::var(name, Arity::base())
    }

    pub fn is_variable(&self) -> bool {
        self.sort == SymbolSort::Variable
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.name, self.arity)
    }
}

/// Environment used while comparing terms up to alpha-conversion: a stack of
/// binder pairs, innermost last.
#[derive(Default)]
pub struct AlphaEnv {
    pairs: Vec<(Symbol, Symbol)>,
}

impl AlphaEnv {
    pub fn push(&mut self, left: Symbol, right: Symbol) {
        self.pairs.push((left, right));
    }

    pub fn pop(&mut self, n: usize) {
        for _ in 0..n {
            self.pairs.pop();
        }
    }

    fn resolve_left(&self, sym: &Symbol) -> Option<usize> {
        self.pairs.iter().rposition(|(l, _)| l == sym)
    }

    fn resolve_right(&self, sym: &Symbol) -> Option<usize> {
        self.pairs.iter().rposition(|(_, r)| r == sym)
    }

    /// Whether two head occurrences denote the same symbol under the binders
    /// crossed so far.
    pub fn heads_match(&self, left: &Symbol, right: &Symbol) -> bool {
        match (self.resolve_left(left), self.resolve_right(right)) {
            (Some(i), Some(j)) => i == j,
            (None, None) => left == right,
            _ => false,
        }
    }
}

/// Stack of binders crossed while hashing a term up to alpha-equivalence.
#[derive(Default)]
pub struct HashEnv {
    binders: Vec<Symbol>,
}

impl HashEnv {
    pub fn push(&mut self, sym: Symbol) {
        self.binders.push(sym);
    }

    pub fn pop(&mut self, n: usize) {
        for _ in 0..n {
            self.binders.pop();
        }
    }

    pub fn hash_head<H: Hasher>(&self, sym: &Symbol, state: &mut H) {
        match self.binders.iter().rposition(|b| b == sym) {
            // de Bruijn index, so the hash is stable under renaming
            Some(i) => (0u8, self.binders.len() - 1 - i).hash(state),
            None => {
                1u8.hash(state);
                sym.name.hash(state);
                sym.sort.hash(state);
            }
        }
        sym.arity.hash(state);
    }
}

/// Recursion measure for instantiation: (order of the instantiated variable's
/// arity, size of the target term).  Strictly decreases lexicographically
/// across recursive calls; asserted in debug builds.
pub type Measure = (usize, usize);

/// Binder annotation payload.  `()` for the Curry-typed framework; a kind for
/// the Church-typed one.
pub trait Ann: Clone + fmt::Debug + PartialEq + Eq + Sized + 'static {
    /// Whether binders carry kinds (drives judgement expansion differences).
    const KINDED: bool;

    fn size(&self) -> usize;
    fn free_vars_into(&self, bound: &mut Vec<Symbol>, acc: &mut BTreeSet<Symbol>);
    fn alpha_eq(&self, other: &Self, env: &mut AlphaEnv) -> bool;
    fn alpha_hash<H: Hasher>(&self, env: &mut HashEnv, state: &mut H);
    fn rename_free(&self, from: &Symbol, to: &Symbol) -> Self;
    fn instantiate_in(
        &self,
        f: &Abstraction<Self>,
        x: &Symbol,
        parent: Option<Measure>,
    ) -> Result<Self, TermError>;
    /// Collect the constants mentioned by the annotation.
    fn constants_into(&self, acc: &mut BTreeSet<Symbol>);
    /// View the annotation as a kind; present exactly when `KINDED`.
    fn kind(&self) -> Option<crate::judgement::Kind<Self>>;
    /// Print a binder, with or without its annotation.
    fn fmt_binder(&self, sym: &Symbol, f: &mut fmt::Formatter<'_>) -> fmt::Result;
}

impl Ann for () {
    const KINDED: bool = false;

    fn size(&self) -> usize {
        0
    }

    fn free_vars_into(&self, _bound: &mut Vec<Symbol>, _acc: &mut BTreeSet<Symbol>) {}

    fn alpha_eq(&self, _other: &Self, _env: &mut AlphaEnv) -> bool {
        true
    }

    fn alpha_hash<H: Hasher>(&self, _env: &mut HashEnv, _state: &mut H) {}

    fn rename_free(&self, _from: &Symbol, _to: &Symbol) -> Self {}

    fn instantiate_in(
        &self,
        _f: &Abstraction<Self>,
        _x: &Symbol,
        _parent: Option<Measure>,
    ) -> Result<Self, TermError> {
        Ok(())
    }

    fn constants_into(&self, _acc: &mut BTreeSet<Symbol>) {}

    fn kind(&self) -> Option<crate::judgement::Kind<Self>> {
        None
    }

    fn fmt_binder(&self, sym: &Symbol, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", sym.name)
    }
}

/// An object: a symbol applied to exactly as many abstractions as its arity
/// demands.  Objects always have base arity.
#[derive(Clone)]
pub struct Object<A: Ann> {
    head: Symbol,
    args: Vec<Abstraction<A>>,
}

/// An abstraction `[x1, ..., xn] M`: the only expressions that may occur in
/// argument position.  Its arity is the sequence of binder arities.
#[derive(Clone)]
pub struct Abstraction<A: Ann> {
    binders: Vec<(Symbol, A)>,
    body: Object<A>,
}

impl<A: Ann> Object<A> {
    pub fn new(head: Symbol, args: Vec<Abstraction<A>>) -> Result<Self, TermError> {
        let expected = head.arity.children();
        if expected.len() != args.len() {
            return Err(TermError::ArgCount {
                head: head.name.clone(),
                expected: expected.len(),
                found: args.len(),
            });
        }
        for (i, (arg, want)) in args.iter().zip(expected).enumerate() {
            let got = arg.arity();
            if &got != want {
                return Err(TermError::ArgArity {
                    head: head.name.clone(),
                    index: i,
                    expected: want.clone(),
                    found: got,
                });
            }
        }
        Ok(Object { head, args })
    }

    /// The object `z[]` for a base-arity symbol.
    pub fn leaf(head: Symbol) -> Result<Self, TermError> {
        Self::new(head, Vec::new())
    }

    pub fn head(&self) -> &Symbol {
        &self.head
    }

    pub fn args(&self) -> &[Abstraction<A>] {
        &self.args
    }

    pub fn into_parts(self) -> (Symbol, Vec<Abstraction<A>>) {
        (self.head, self.args)
    }

    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Abstraction::size).sum::<usize>()
    }

    /// Whether this is a bare symbol `z[]`.
    pub fn is_leaf(&self) -> bool {
        self.args.is_empty()
    }

    pub fn alpha_eq(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        if !env.heads_match(&self.head, &other.head) {
            return false;
        }
        self.args.len() == other.args.len()
            && self
                .args
                .iter()
                .zip(&other.args)
                .all(|(a, b)| a.alpha_eq(b, env))
    }

    pub fn alpha_hash<H: Hasher>(&self, env: &mut HashEnv, state: &mut H) {
        env.hash_head(&self.head, state);
        for arg in &self.args {
            arg.alpha_hash(env, state);
        }
    }
}

impl<A: Ann> Abstraction<A> {
    pub fn new(binders: Vec<(Symbol, A)>, body: Object<A>) -> Result<Self, TermError> {
        for (i, (b, _)) in binders.iter().enumerate() {
            if !b.is_variable() {
                return Err(TermError::BinderNotVariable(b.name.clone()));
            }
            if binders[..i].iter().any(|(prev, _)| prev.name == b.name) {
                return Err(TermError::DuplicateBinder(b.name.clone()));
            }
        }
        Ok(Abstraction { binders, body })
    }

    /// An abstraction with no binders.
    pub fn constant(body: Object<A>) -> Self {
        Abstraction { binders: Vec::new(), body }
    }

    pub fn binders(&self) -> &[(Symbol, A)] {
        &self.binders
    }

    pub fn binder_symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.binders.iter().map(|(s, _)| s)
    }

    pub fn body(&self) -> &Object<A> {
        &self.body
    }

    pub fn arity(&self) -> Arity {
        Arity::new(self.binders.iter().map(|(s, _)| s.arity.clone()).collect())
    }

    pub fn size(&self) -> usize {
        1 + self.binders.iter().map(|(_, a)| a.size()).sum::<usize>() + self.body.size()
    }

    /// View a `0`-arity abstraction as its body.
    pub fn as_object(&self) -> Option<&Object<A>> {
        if self.binders.is_empty() {
            Some(&self.body)
        } else {
            None
        }
    }

    pub fn alpha_eq(&self, other: &Self, env: &mut AlphaEnv) -> bool {
        if self.binders.len() != other.binders.len() {
            return false;
        }
        let mut pushed = 0;
        let mut ok = true;
        for ((ls, la), (rs, ra)) in self.binders.iter().zip(&other.binders) {
            if ls.arity != rs.arity || !la.alpha_eq(ra, env) {
                ok = false;
                break;
            }
            env.push(ls.clone(), rs.clone());
            pushed += 1;
        }
        let ok = ok && self.body.alpha_eq(&other.body, env);
        env.pop(pushed);
        ok
    }

    pub fn alpha_hash<H: Hasher>(&self, env: &mut HashEnv, state: &mut H) {
        self.binders.len().hash(state);
        for (s, a) in &self.binders {
            s.arity.hash(state);
            a.alpha_hash(env, state);
            env.push(s.clone());
        }
        self.body.alpha_hash(env, state);
        env.pop(self.binders.len());
    }
}

impl<A: Ann> PartialEq for Object<A> {
    fn eq(&self, other: &Self) -> bool {
        self.alpha_eq(other, &mut AlphaEnv::default())
    }
}

impl<A: Ann> Eq for Object<A> {}

impl<A: Ann> Hash for Object<A> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.alpha_hash(&mut HashEnv::default(), state);
    }
}

impl<A: Ann> PartialEq for Abstraction<A> {
    fn eq(&self, other: &Self) -> bool {
        self.alpha_eq(other, &mut AlphaEnv::default())
    }
}

impl<A: Ann> Eq for Abstraction<A> {}

impl<A: Ann> Hash for Abstraction<A> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.alpha_hash(&mut HashEnv::default(), state);
    }
}

/// Pick a name based on `base` that makes `taken` return false, by appending
/// primes.  Deterministic, so kernel output is reproducible.
pub fn fresh_name(base: &str, mut taken: impl FnMut(&str) -> bool) -> String {
    let mut candidate = base.to_string();
    while taken(&candidate) {
        candidate.push('\'');
    }
    candidate
}

/// Entities that support instantiation and the related renaming operations.
pub trait Instantiate<A: Ann>: Sized {
    fn free_vars_into(&self, bound: &mut Vec<Symbol>, acc: &mut BTreeSet<Symbol>);

    /// Replace free occurrences of `from` by `to`.  `to` must be fresh for
    /// `self` (the caller guarantees this; renaming never needs to avoid
    /// capture then).
    fn rename_free(&self, from: &Symbol, to: &Symbol) -> Self;

    fn instantiate_in(
        &self,
        f: &Abstraction<A>,
        x: &Symbol,
        parent: Option<Measure>,
    ) -> Result<Self, TermError>;

    fn free_vars(&self) -> BTreeSet<Symbol> {
        let mut acc = BTreeSet::new();
        self.free_vars_into(&mut Vec::new(), &mut acc);
        acc
    }

    /// `{F/x}self`: hereditary instantiation of a single variable.
    fn instantiate(&self, f: &Abstraction<A>, x: &Symbol) -> Result<Self, TermError> {
        if !x.is_variable() {
            return Err(TermError::NotAVariable(x.name.clone()));
        }
        let f_arity = f.arity();
        if f_arity != x.arity {
            return Err(TermError::InstantiationArity {
                var: x.name.clone(),
                var_arity: x.arity.clone(),
                abs_arity: f_arity,
            });
        }
        self.instantiate_in(f, x, None)
    }

    /// `{F1/x1, ..., Fn/xn}self`: iterated left-to-right instantiation.
    ///
    /// The substituted variables must not occur free in any of the
    /// abstractions; when they do, they are first renamed apart so the
    /// iterated reading agrees with the simultaneous one.
    fn instantiate_seq(&self, fs: &[Abstraction<A>], vars: &[Symbol]) -> Result<Self, TermError>
    where
        Self: Clone,
    {
        if fs.len() != vars.len() {
            return Err(TermError::SeqLength { vars: vars.len(), abs: fs.len() });
        }
        let mut fv_fs: BTreeSet<Symbol> = BTreeSet::new();
        for f in fs {
            Instantiate::<A>::free_vars_into(f, &mut Vec::new(), &mut fv_fs);
        }
        // Freshen any substituted variable that is free in some abstraction.
        let mut target = self.clone();
        let mut vars = vars.to_vec();
        if vars.iter().any(|v| fv_fs.contains(v)) {
            let mut taken: BTreeSet<String> =
                fv_fs.iter().map(|s| s.name.clone()).collect();
            taken.extend(vars.iter().map(|v| v.name.clone()));
            for s in target.free_vars() {
                taken.insert(s.name);
            }
            for v in vars.iter_mut() {
                if fv_fs.contains(v) {
                    let name = fresh_name(&v.name, |n| taken.contains(n));
                    taken.insert(name.clone());
                    let renamed = Symbol::var(name, v.arity.clone());
                    target = target.rename_free(v, &renamed);
                    *v = renamed;
                }
            }
        }
        let mut acc = target;
        for (f, x) in fs.iter().zip(&vars) {
            acc = acc.instantiate(f, x)?;
        }
        Ok(acc)
    }
}

impl<A: Ann> Instantiate<A> for Object<A> {
    fn free_vars_into(&self, bound: &mut Vec<Symbol>, acc: &mut BTreeSet<Symbol>) {
        if self.head.is_variable() && !bound.contains(&self.head) {
            acc.insert(self.head.clone());
        }
        for arg in &self.args {
            Instantiate::<A>::free_vars_into(arg, bound, acc);
        }
    }

    fn rename_free(&self, from: &Symbol, to: &Symbol) -> Self {
        let head = if &self.head == from { to.clone() } else { self.head.clone() };
        let args = self.args.iter().map(|a| a.rename_free(from, to)).collect();
        Object { head, args }
    }

    fn instantiate_in(
        &self,
        f: &Abstraction<A>,
        x: &Symbol,
        parent: Option<Measure>,
    ) -> Result<Self, TermError> {
        let measure = (x.arity.order(), self.size());
        debug_assert!(
            parent.is_none_or(|p| measure < p),
            "instantiation measure failed to decrease: {measure:?} under {parent:?}"
        );
        if &self.head == x {
            // {F/x} x[G1, ..., Gn] = {{F/x}G1/t1} ... {{F/x}Gn/tn} P
            let gs: Vec<Abstraction<A>> = self
                .args
                .iter()
                .map(|g| g.instantiate_in(f, x, Some(measure)))
                .collect::<Result<_, _>>()?;
            let mut avoid: BTreeSet<String> = BTreeSet::new();
            for g in &gs {
                for s in Instantiate::<A>::free_vars(g) {
                    avoid.insert(s.name);
                }
            }
            let (ts, p) = open_avoiding(f, &avoid);
            let mut acc = p;
            for ((t, _), g) in ts.iter().zip(&gs).rev() {
                acc = acc.instantiate_in(g, t, Some(measure))?;
            }
            Ok(acc)
        } else {
            let args = self
                .args
                .iter()
                .map(|g| g.instantiate_in(f, x, Some(measure)))
                .collect::<Result<_, _>>()?;
            Ok(Object { head: self.head.clone(), args })
        }
    }
}

impl<A: Ann> Instantiate<A> for Abstraction<A> {
    fn free_vars_into(&self, bound: &mut Vec<Symbol>, acc: &mut BTreeSet<Symbol>) {
        let mut pushed = 0;
        for (s, a) in &self.binders {
            a.free_vars_into(bound, acc);
            bound.push(s.clone());
            pushed += 1;
        }
        Instantiate::<A>::free_vars_into(&self.body, bound, acc);
        for _ in 0..pushed {
            bound.pop();
        }
    }

    fn rename_free(&self, from: &Symbol, to: &Symbol) -> Self {
        if from == to {
            return self.clone();
        }
        // A binder named like the target would capture it: rename such
        // binders apart first.  Binders at or beyond the first occurrence of
        // `from` shadow the renaming and can stay.
        let shadow = self.binders.iter().position(|(b, _)| b == from);
        let capturing: Vec<usize> = self
            .binders
            .iter()
            .enumerate()
            .filter(|(j, (b, _))| {
                b.name == to.name && shadow.is_none_or(|s| *j < s)
            })
            .map(|(j, _)| j)
            .collect();
        let mut current;
        let target: &Abstraction<A> = if capturing.is_empty() {
            self
        } else {
            let mut taken: BTreeSet<String> = Instantiate::<A>::free_vars(self)
                .into_iter()
                .map(|s| s.name)
                .collect();
            taken.extend(self.binders.iter().map(|(b, _)| b.name.clone()));
            taken.insert(from.name.clone());
            taken.insert(to.name.clone());
            current = self.clone();
            for j in capturing {
                let name = fresh_name(&current.binders[j].0.name, |n| taken.contains(n));
                taken.insert(name.clone());
                current = current.rename_binder(j, name);
            }
            &current
        };
        let mut binders = Vec::with_capacity(target.binders.len());
        for (i, (s, a)) in target.binders.iter().enumerate() {
            binders.push((s.clone(), a.rename_free(from, to)));
            if s == from {
                // Shadowed from here on.
                binders.extend(target.binders[i + 1..].iter().cloned());
                return Abstraction { binders, body: target.body.clone() };
            }
        }
        Abstraction { binders, body: target.body.rename_free(from, to) }
    }

    fn instantiate_in(
        &self,
        f: &Abstraction<A>,
        x: &Symbol,
        parent: Option<Measure>,
    ) -> Result<Self, TermError> {
        let fv_self = Instantiate::<A>::free_vars(self);
        if !fv_self.contains(x) {
            return Ok(self.clone());
        }
        // Rename binders that would capture free variables of F.
        let fv_f = Instantiate::<A>::free_vars(f);
        let fv_f_names: BTreeSet<&str> = fv_f.iter().map(|s| s.name.as_str()).collect();
        let needs_renaming = self
            .binders
            .iter()
            .any(|(b, _)| fv_f_names.contains(b.name.as_str()));
        let renamed;
        let target: &Abstraction<A> = if needs_renaming {
            let mut taken: BTreeSet<String> = fv_f.iter().map(|s| s.name.clone()).collect();
            taken.extend(fv_self.iter().map(|s| s.name.clone()));
            taken.extend(self.binders.iter().map(|(b, _)| b.name.clone()));
            taken.insert(x.name.clone());
            let mut current = self.clone();
            for i in 0..current.binders.len() {
                let (b, _) = &current.binders[i];
                if fv_f_names.contains(b.name.as_str()) {
                    let name = fresh_name(&b.name, |n| taken.contains(n));
                    taken.insert(name.clone());
                    current = current.rename_binder(i, name);
                }
            }
            renamed = current;
            &renamed
        } else {
            self
        };
        let measure = parent;
        let mut binders = Vec::with_capacity(target.binders.len());
        for (i, (s, a)) in target.binders.iter().enumerate() {
            binders.push((s.clone(), a.instantiate_in(f, x, measure)?));
            if s == x {
                // x is shadowed in the remaining annotations and the body.
                binders.extend(target.binders[i + 1..].iter().cloned());
                return Ok(Abstraction { binders, body: target.body.clone() });
            }
        }
        let body = target.body.instantiate_in(f, x, measure)?;
        Ok(Abstraction { binders, body })
    }
}

impl<A: Ann> Instantiate<A> for Vec<Abstraction<A>> {
    fn free_vars_into(&self, bound: &mut Vec<Symbol>, acc: &mut BTreeSet<Symbol>) {
        for a in self {
            Instantiate::<A>::free_vars_into(a, bound, acc);
        }
    }

    fn rename_free(&self, from: &Symbol, to: &Symbol) -> Self {
        self.iter().map(|a| a.rename_free(from, to)).collect()
    }

    fn instantiate_in(
        &self,
        f: &Abstraction<A>,
        x: &Symbol,
        parent: Option<Measure>,
    ) -> Result<Self, TermError> {
        self.iter().map(|a| a.instantiate_in(f, x, parent)).collect()
    }
}

impl<A: Ann> Abstraction<A> {
    /// Rename the `i`-th binder to `name` (fresh within the abstraction).
    fn rename_binder(&self, i: usize, name: String) -> Self {
        let (old, ann) = self.binders[i].clone();
        let new = Symbol::var(name, old.arity.clone());
        let mut binders: Vec<(Symbol, A)> = self.binders[..i].to_vec();
        binders.push((new.clone(), ann));
        let tail = Abstraction {
            binders: self.binders[i + 1..].to_vec(),
            body: self.body.clone(),
        };
        let tail = tail.rename_free(&old, &new);
        binders.extend(tail.binders);
        Abstraction { binders, body: tail.body }
    }

    /// Rename each binder so no binder name lands in `avoid`; returns the
    /// binder list and the opened body.
    pub fn open_avoiding(&self, avoid: &BTreeSet<String>) -> (Vec<(Symbol, A)>, Object<A>) {
        open_avoiding(self, avoid)
    }
}

fn open_avoiding<A: Ann>(
    abs: &Abstraction<A>,
    avoid: &BTreeSet<String>,
) -> (Vec<(Symbol, A)>, Object<A>) {
    let mut taken: BTreeSet<String> = avoid.clone();
    for s in Instantiate::<A>::free_vars(abs) {
        taken.insert(s.name);
    }
    taken.extend(abs.binders.iter().map(|(b, _)| b.name.clone()));
    let mut current = abs.clone();
    for i in 0..current.binders.len() {
        let (b, _) = &current.binders[i];
        if avoid.contains(b.name.as_str()) {
            let name = fresh_name(&b.name, |n| taken.contains(n));
            taken.insert(name.clone());
            current = current.rename_binder(i, name);
        }
    }
    (current.binders, current.body)
}

/// `F • G`: employ the abstraction `F` (of arity `(arity G)^beta`) on `G`.
pub fn employ<A: Ann>(
    f: &Abstraction<A>,
    g: &Abstraction<A>,
) -> Result<Abstraction<A>, TermError> {
    let Some(((x, _ann), rest)) = f.binders.split_first() else {
        return Err(TermError::EmploymentArity {
            fun_arity: f.arity(),
            arg_arity: g.arity(),
        });
    };
    if x.arity != g.arity() {
        return Err(TermError::EmploymentArity {
            fun_arity: f.arity(),
            arg_arity: g.arity(),
        });
    }
    let inner = Abstraction { binders: rest.to_vec(), body: f.body.clone() };
    inner.instantiate(g, x)
}

/// `F • G1 • ... • Gn`.
pub fn employ_seq<A: Ann>(
    f: &Abstraction<A>,
    gs: &[Abstraction<A>],
) -> Result<Abstraction<A>, TermError> {
    let mut acc = f.clone();
    for g in gs {
        acc = employ(&acc, g)?;
    }
    Ok(acc)
}

/// The eta-long form `z^eta` of a symbol, for the Curry-typed framework.
///
/// The binder names are positional (`x1`, `x2`, ...), primed as needed; any
/// other choice is alpha-equivalent.
pub fn eta_long(z: &Symbol) -> Abstraction<()> {
    let mut avoid = BTreeSet::new();
    avoid.insert(z.name.clone());
    eta_long_avoiding(z, &avoid)
}

fn eta_long_avoiding(z: &Symbol, avoid: &BTreeSet<String>) -> Abstraction<()> {
    let children = z.arity.children().to_vec();
    let mut taken = avoid.clone();
    let mut binders = Vec::with_capacity(children.len());
    for (i, child) in children.iter().enumerate() {
        let name = fresh_name(&format!("x{}", i + 1), |n| taken.contains(n));
        taken.insert(name.clone());
        binders.push(Symbol::var(name, child.clone()));
    }
    let args: Vec<Abstraction<()>> = binders
        .iter()
        .map(|b| eta_long_avoiding(b, &taken))
        .collect();
    let body = Object::new(z.clone(), args).expect("eta-long arities agree by construction");
    Abstraction::new(binders.into_iter().map(|b| (b, ())).collect(), body)
        .expect("eta-long binders are distinct by construction")
}

/// A path into an object: each step selects an argument whose body is entered.
pub type Position = Vec<usize>;

impl<A: Ann> Object<A> {
    /// All subobject positions, in preorder; the empty path is the object
    /// itself.  Positions cross binders.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        self.collect_positions(&mut Vec::new(), &mut out);
        out
    }

    fn collect_positions(&self, path: &mut Position, out: &mut Vec<Position>) {
        out.push(path.clone());
        for (i, arg) in self.args.iter().enumerate() {
            path.push(i);
            arg.body.collect_positions(path, out);
            path.pop();
        }
    }

    pub fn subobject_at(&self, pos: &[usize]) -> Option<&Object<A>> {
        match pos.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.args.get(i)?.body.subobject_at(rest),
        }
    }

    /// The binders crossed on the way to `pos`, outermost first.
    pub fn binders_to(&self, pos: &[usize]) -> Option<Vec<(Symbol, A)>> {
        let mut out = Vec::new();
        let mut current = self;
        for &i in pos {
            let arg = current.args.get(i)?;
            out.extend(arg.binders.iter().cloned());
            current = &arg.body;
        }
        Some(out)
    }

    pub fn replace_at(&self, pos: &[usize], replacement: Object<A>) -> Option<Object<A>> {
        match pos.split_first() {
            None => Some(replacement),
            Some((&i, rest)) => {
                let mut args = self.args.clone();
                let arg = args.get_mut(i)?;
                arg.body = arg.body.replace_at(rest, replacement)?;
                Some(Object { head: self.head.clone(), args })
            }
        }
    }
}

fn fmt_arg<A: Ann>(arg: &Abstraction<A>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if arg.binders.is_empty() {
        if arg.body.is_leaf() {
            write!(f, "{}", arg.body.head.name)
        } else {
            write!(f, "({})", arg.body)
        }
    } else {
        write!(f, "([")?;
        for (i, (s, a)) in arg.binders.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            a.fmt_binder(s, f)?;
        }
        write!(f, "] {})", arg.body)
    }
}

impl<A: Ann> fmt::Display for Object<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head.name)?;
        for arg in &self.args {
            write!(f, " ")?;
            fmt_arg(arg, f)?;
        }
        Ok(())
    }
}

impl<A: Ann> fmt::Display for Abstraction<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.binders.is_empty() {
            return write!(f, "{}", self.body);
        }
        write!(f, "[")?;
        for (i, (s, a)) in self.binders.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            a.fmt_binder(s, f)?;
        }
        write!(f, "] {}", self.body)
    }
}

impl<A: Ann> fmt::Debug for Object<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<A: Ann> fmt::Debug for Abstraction<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Objects and abstractions of the Curry-typed framework.
pub type TfObject = Object<()>;
pub type TfAbstraction = Abstraction<()>;

impl TfAbstraction {
    /// Convenience constructor for unannotated binders.
    pub fn unann(binders: Vec<Symbol>, body: TfObject) -> Result<Self, TermError> {
        Abstraction::new(binders.into_iter().map(|b| (b, ())).collect(), body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v0(name: &str) -> Symbol {
        Symbol::base_var(name)
    }

    fn obj(head: Symbol, args: Vec<TfAbstraction>) -> TfObject {
        Object::new(head, args).unwrap()
    }

    fn leaf(head: Symbol) -> TfObject {
        Object::leaf(head).unwrap()
    }

    fn arg(body: TfObject) -> TfAbstraction {
        Abstraction::constant(body)
    }

    #[test]
    fn free_vars_without_binders() {
        // f[x] with f of arity (0) and x base, both variables.
        let f = Symbol::var("f", Arity::first_order(1));
        let x = v0("x");
        let t = obj(f.clone(), vec![arg(leaf(x.clone()))]);
        let fv = t.free_vars();
        assert!(fv.contains(&f));
        assert!(fv.contains(&x));
        assert_eq!(fv.len(), 2);
    }

    #[test]
    fn binder_removes_variable() {
        // [x] g[x]  has free variables {g}.
        let g = Symbol::var("g", Arity::first_order(1));
        let x = v0("x");
        let abs =
            TfAbstraction::unann(vec![x.clone()], obj(g.clone(), vec![arg(leaf(x))])).unwrap();
        let fv = Instantiate::<()>::free_vars(&abs);
        assert_eq!(fv.into_iter().collect::<Vec<_>>(), vec![g]);
    }

    #[test]
    fn constants_are_never_free() {
        let c = Symbol::constant("c", Arity::base());
        assert!(leaf(c).free_vars().is_empty());
    }

    #[test]
    fn alpha_renaming_of_binders() {
        let f = Symbol::var("f", Arity::first_order(1));
        let x = v0("x");
        let y = v0("y");
        let lhs =
            TfAbstraction::unann(vec![x.clone()], obj(f.clone(), vec![arg(leaf(x))])).unwrap();
        let rhs =
            TfAbstraction::unann(vec![y.clone()], obj(f.clone(), vec![arg(leaf(y))])).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn distinct_heads_not_alpha_equal() {
        let f = Symbol::var("f", Arity::first_order(1));
        let g = Symbol::var("g", Arity::first_order(1));
        let x = v0("x");
        let lhs =
            TfAbstraction::unann(vec![x.clone()], obj(f, vec![arg(leaf(x.clone()))])).unwrap();
        let rhs = TfAbstraction::unann(vec![x.clone()], obj(g, vec![arg(leaf(x))])).unwrap();
        assert_ne!(lhs, rhs);
    }

    #[test]
    fn nested_binder_swap_is_alpha_equal() {
        // [x][y] h[x, y] versus [y][x] h[y, x]: same up to renaming.
        let h = Symbol::var("h", Arity::first_order(2));
        let x = v0("x");
        let y = v0("y");
        let lhs = TfAbstraction::unann(
            vec![x.clone(), y.clone()],
            obj(h.clone(), vec![arg(leaf(x.clone())), arg(leaf(y.clone()))]),
        )
        .unwrap();
        let rhs = TfAbstraction::unann(
            vec![y.clone(), x.clone()],
            obj(h, vec![arg(leaf(y)), arg(leaf(x))]),
        )
        .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn eta_long_base_symbol() {
        let z = v0("z");
        let e = eta_long(&z);
        assert!(e.binders().is_empty());
        assert_eq!(e.body(), &leaf(z));
    }

    #[test]
    fn eta_long_first_order() {
        // f^eta = [x] f[x]
        let f = Symbol::var("f", Arity::first_order(1));
        let e = eta_long(&f);
        let x = v0("x1");
        let expected =
            TfAbstraction::unann(vec![x.clone()], obj(f, vec![arg(leaf(x))])).unwrap();
        assert_eq!(e, expected);
    }

    #[test]
    fn eta_long_second_order() {
        // g of arity ((0)): g^eta = [h] g[[x] h[x]]
        let g = Symbol::var("g", Arity::new(vec![Arity::first_order(1)]));
        let e = eta_long(&g);
        let h = Symbol::var("h", Arity::first_order(1));
        let x = v0("x");
        let inner =
            TfAbstraction::unann(vec![x.clone()], obj(h.clone(), vec![arg(leaf(x))])).unwrap();
        let expected =
            TfAbstraction::unann(vec![h], obj(g, vec![inner])).unwrap();
        assert_eq!(e, expected);
    }

    #[test]
    fn trivial_instantiation() {
        // {a/x} c[b] = c[b] when x is not free.
        let c = Symbol::constant("c", Arity::first_order(1));
        let b = Symbol::constant("b", Arity::base());
        let a = Symbol::constant("a", Arity::base());
        let x = v0("x");
        let t = obj(c, vec![arg(leaf(b))]);
        let out = t.instantiate(&arg(leaf(a)), &x).unwrap();
        assert_eq!(out, t);
    }

    #[test]
    fn identity_abstraction_contracts() {
        // {([t]t)/f} f[a] = a
        let f = Symbol::var("f", Arity::first_order(1));
        let t = v0("t");
        let a = Symbol::constant("a", Arity::base());
        let id = TfAbstraction::unann(vec![t.clone()], leaf(t)).unwrap();
        let redex = obj(f.clone(), vec![arg(leaf(a.clone()))]);
        let out = redex.instantiate(&id, &f).unwrap();
        assert_eq!(out, leaf(a));
    }

    #[test]
    fn instantiation_into_eta_long_body() {
        // {([t] b[t])/f} applied to [y] f[y] yields [y] b[y].
        let f = Symbol::var("f", Arity::first_order(1));
        let b = Symbol::constant("b", Arity::first_order(1));
        let t = v0("t");
        let y = v0("y");
        let subst =
            TfAbstraction::unann(vec![t.clone()], obj(b.clone(), vec![arg(leaf(t))])).unwrap();
        let target = TfAbstraction::unann(
            vec![y.clone()],
            obj(f.clone(), vec![arg(leaf(y.clone()))]),
        )
        .unwrap();
        let out = target.instantiate(&subst, &f).unwrap();
        let expected =
            TfAbstraction::unann(vec![y.clone()], obj(b, vec![arg(leaf(y))])).unwrap();
        assert_eq!(out, expected);
    }

    #[test]
    fn employment_of_identity() {
        // ([x]x) . a = a (as 0-ary abstractions)
        let x = v0("x");
        let a = Symbol::constant("a", Arity::base());
        let id = TfAbstraction::unann(vec![x.clone()], leaf(x)).unwrap();
        let out = employ(&id, &arg(leaf(a.clone()))).unwrap();
        assert_eq!(out, arg(leaf(a)));
    }

    #[test]
    fn employment_of_eta_long_variable() {
        // ([y] f[y]) . a = f[a]
        let f = Symbol::var("f", Arity::first_order(1));
        let y = v0("y");
        let a = Symbol::constant("a", Arity::base());
        let e = TfAbstraction::unann(
            vec![y.clone()],
            obj(f.clone(), vec![arg(leaf(y))]),
        )
        .unwrap();
        let out = employ(&e, &arg(leaf(a.clone()))).unwrap();
        assert_eq!(out, arg(obj(f, vec![arg(leaf(a))])));
    }

    #[test]
    fn employment_contracts_nested() {
        // ([h] h[a]) . ([t] g[t]) = g[a]
        let h = Symbol::var("h", Arity::first_order(1));
        let g = Symbol::constant("g", Arity::first_order(1));
        let a = Symbol::constant("a", Arity::base());
        let t = v0("t");
        let outer = TfAbstraction::unann(
            vec![h.clone()],
            obj(h.clone(), vec![arg(leaf(a.clone()))]),
        )
        .unwrap();
        let inner =
            TfAbstraction::unann(vec![t.clone()], obj(g.clone(), vec![arg(leaf(t))])).unwrap();
        let out = employ(&outer, &inner).unwrap();
        assert_eq!(out, arg(obj(g, vec![arg(leaf(a))])));
    }

    #[test]
    fn employment_arity_mismatch_rejected() {
        let x = v0("x");
        let id = TfAbstraction::unann(vec![x.clone()], leaf(x)).unwrap();
        let bad = TfAbstraction::unann(
            vec![Symbol::var("y", Arity::first_order(1))],
            leaf(Symbol::constant("a", Arity::base())),
        );
        // bad is [y:(0)] a; employing id (expecting a base argument) must fail
        let bad = bad.unwrap();
        assert!(employ(&id, &bad).is_err());
    }

    #[test]
    fn seq_instantiation_empty_is_identity() {
        let a = Symbol::constant("a", Arity::base());
        let t = leaf(a);
        assert_eq!(t.instantiate_seq(&[], &[]).unwrap(), t);
    }

    #[test]
    fn seq_instantiation_left_to_right() {
        // {a/A, [x]c[x]/B} applied to B[A] gives c[a].
        let cap_a = v0("A");
        let cap_b = Symbol::var("B", Arity::first_order(1));
        let a = Symbol::constant("a", Arity::base());
        let c = Symbol::constant("c", Arity::first_order(1));
        let x = v0("x");
        let target = obj(cap_b.clone(), vec![arg(leaf(cap_a.clone()))]);
        let fs = vec![
            arg(leaf(a.clone())),
            TfAbstraction::unann(vec![x.clone()], obj(c.clone(), vec![arg(leaf(x))])).unwrap(),
        ];
        let out = target.instantiate_seq(&fs, &[cap_a, cap_b]).unwrap();
        assert_eq!(out, obj(c, vec![arg(leaf(a))]));
    }

    #[test]
    fn eta_identity_instantiation() {
        // {x^eta/x} M = M for M = g[x, c].
        let g = Symbol::var("g", Arity::first_order(2));
        let x = v0("x");
        let c = Symbol::constant("c", Arity::base());
        let m = obj(g, vec![arg(leaf(x.clone())), arg(leaf(c))]);
        let out = m.instantiate(&eta_long(&x), &x).unwrap();
        assert_eq!(out, m);
    }

    #[test]
    fn eta_lemma_instantiating_into_eta_long() {
        // {F/x} x^eta = F for a second-order x of arity ((0)).
        let x = Symbol::var("x", Arity::new(vec![Arity::first_order(1)]));
        let g = Symbol::constant("g", Arity::new(vec![Arity::first_order(1)]));
        let h = Symbol::var("h", Arity::first_order(1));
        let t = v0("t");
        // F = [h] g[[t] h[t]]
        let f = TfAbstraction::unann(
            vec![h.clone()],
            obj(
                g,
                vec![TfAbstraction::unann(
                    vec![t.clone()],
                    obj(h.clone(), vec![arg(leaf(t))]),
                )
                .unwrap()],
            ),
        )
        .unwrap();
        let out = eta_long(&x).instantiate(&f, &x).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn capture_is_avoided() {
        // {([t] y[t]) / f} applied to [y] f[y]: the binder y must be renamed,
        // since y occurs free in the substituted abstraction.
        let f = Symbol::var("f", Arity::first_order(1));
        let yfree = Symbol::var("y", Arity::first_order(1));
        let t = v0("t");
        let y0 = v0("y");
        let subst = TfAbstraction::unann(
            vec![t.clone()],
            obj(yfree.clone(), vec![arg(leaf(t))]),
        )
        .unwrap();
        let target = TfAbstraction::unann(
            vec![y0.clone()],
            obj(f.clone(), vec![arg(leaf(y0.clone()))]),
        )
        .unwrap();
        let out = target.instantiate(&subst, &f).unwrap();
        // Expected: [y'] y[y'] with the free y intact.
        let fv = Instantiate::<()>::free_vars(&out);
        assert!(fv.contains(&yfree));
        let yp = v0("y'");
        let expected = TfAbstraction::unann(
            vec![yp.clone()],
            obj(yfree, vec![arg(leaf(yp))]),
        )
        .unwrap();
        assert_eq!(out, expected);
    }

    #[test]
    fn positions_and_replacement() {
        let c = Symbol::constant("c", Arity::first_order(2));
        let a = Symbol::constant("a", Arity::base());
        let b = Symbol::constant("b", Arity::base());
        let t = obj(c, vec![arg(leaf(a.clone())), arg(leaf(b.clone()))]);
        assert_eq!(t.positions(), vec![vec![], vec![0], vec![1]]);
        assert_eq!(t.subobject_at(&[1]).unwrap(), &leaf(b.clone()));
        let replaced = t.replace_at(&[0], leaf(b.clone())).unwrap();
        assert_eq!(replaced.subobject_at(&[0]).unwrap(), &leaf(b));
    }

    #[test]
    fn ill_aritied_object_rejected() {
        let c = Symbol::constant("c", Arity::first_order(1));
        assert!(Object::<()>::new(c.clone(), vec![]).is_err());
        let bad_arg = TfAbstraction::unann(
            vec![Symbol::var("x", Arity::first_order(1))],
            Object::leaf(Symbol::constant("a", Arity::base())).unwrap(),
        )
        .unwrap();
        assert!(Object::<()>::new(c, vec![bad_arg]).is_err());
    }

    #[test]
    fn duplicate_binders_rejected() {
        let x = v0("x");
        let a = Symbol::constant("a", Arity::base());
        assert!(TfAbstraction::unann(vec![x.clone(), x], Object::leaf(a).unwrap()).is_err());
    }
}

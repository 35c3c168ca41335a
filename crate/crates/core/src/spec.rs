//! Type theory specifications: ordered lists of constant and equation
//! declarations.
//!
//! A constant declaration `c : K` induces the typing and congruence rules for
//! `c`; an equation declaration `(D)(M = N : T)` induces an equality rule.
//! Derived metadata (orders, orderability, goodness) is computed on demand by
//! `goodness`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::TermError;
use crate::judgement::{Base, Context, Kind};
use crate::syntax::{Ann, Object, Symbol, SymbolSort};

/// A single declaration.
#[derive(Clone, PartialEq, Eq)]
pub enum Declaration<A: Ann> {
    Constant {
        symbol: Symbol,
        kind: Kind<A>,
    },
    Equation {
        telescope: Context<A>,
        lhs: Object<A>,
        rhs: Object<A>,
        target: Base<A>,
    },
}

impl<A: Ann> Declaration<A> {
    /// The order of a declaration: the order of the declared kind for a
    /// constant, the order of the telescope for an equation.  A base-kind
    /// constant has order 0 (the order of the empty arity).
    pub fn order(&self) -> usize {
        match self {
            Declaration::Constant { kind, .. } => kind.order(),
            Declaration::Equation { telescope, .. } => telescope.order(),
        }
    }

    pub fn is_equation(&self) -> bool {
        matches!(self, Declaration::Equation { .. })
    }

    /// Constants referenced anywhere in the declaration.
    pub fn referenced_constants(&self) -> BTreeSet<Symbol> {
        let mut acc = BTreeSet::new();
        match self {
            Declaration::Constant { kind, .. } => collect_kind_constants(kind, &mut acc),
            Declaration::Equation { telescope, lhs, rhs, target } => {
                for (_, k) in telescope.entries() {
                    collect_kind_constants(k, &mut acc);
                }
                collect_object_constants(lhs, &mut acc);
                collect_object_constants(rhs, &mut acc);
                collect_base_constants(target, &mut acc);
            }
        }
        acc
    }

    pub fn label(&self, index: usize) -> String {
        match self {
            Declaration::Constant { symbol, .. } => format!("const {}", symbol.name),
            Declaration::Equation { .. } => format!("eq {}", index + 1),
        }
    }
}

fn collect_object_constants<A: Ann>(obj: &Object<A>, acc: &mut BTreeSet<Symbol>) {
    if obj.head().sort == SymbolSort::Constant {
        acc.insert(obj.head().clone());
    }
    for arg in obj.args() {
        for (_, ann) in arg.binders() {
            ann.constants_into(acc);
        }
        collect_object_constants(arg.body(), acc);
    }
}

fn collect_base_constants<A: Ann>(base: &Base<A>, acc: &mut BTreeSet<Symbol>) {
    if let Base::El(a) = base {
        collect_object_constants(a, acc);
    }
}

/// Collect the constants mentioned anywhere in a kind.
pub fn collect_kind_constants<A: Ann>(kind: &Kind<A>, acc: &mut BTreeSet<Symbol>) {
    for (_, k) in kind.telescope() {
        collect_kind_constants(k, acc);
    }
    collect_base_constants(kind.target(), acc);
}

/// An ordered list of declarations with no constant declared twice.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Specification<A: Ann> {
    declarations: Vec<Declaration<A>>,
}

/// The order of a specification.  Finite specifications always have a finite
/// order; the unbounded case is kept for interface fidelity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecOrder {
    Finite(usize),
    Unbounded,
}

impl fmt::Display for SpecOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecOrder::Finite(n) => write!(f, "{n}"),
            SpecOrder::Unbounded => write!(f, "omega"),
        }
    }
}

impl<A: Ann> Specification<A> {
    pub fn empty() -> Self {
        Specification { declarations: Vec::new() }
    }

    pub fn new(declarations: Vec<Declaration<A>>) -> Result<Self, TermError> {
        let mut spec = Specification::empty();
        for d in declarations {
            spec.push(d)?;
        }
        Ok(spec)
    }

    pub fn push(&mut self, declaration: Declaration<A>) -> Result<(), TermError> {
        if let Declaration::Constant { symbol, kind } = &declaration {
            if symbol.sort != SymbolSort::Constant {
                return Err(TermError::NotAVariable(symbol.name.clone()));
            }
            if symbol.arity != kind.arity() {
                return Err(TermError::EntryArity {
                    name: symbol.name.clone(),
                    var_arity: symbol.arity.clone(),
                    kind_arity: kind.arity(),
                });
            }
            if self.lookup_constant_name(&symbol.name).is_some() {
                return Err(TermError::DuplicateContextVariable(symbol.name.clone()));
            }
        }
        self.declarations.push(declaration);
        Ok(())
    }

    pub fn declarations(&self) -> &[Declaration<A>] {
        &self.declarations
    }

    pub fn len(&self) -> usize {
        self.declarations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.declarations.is_empty()
    }

    pub fn lookup_constant_name(&self, name: &str) -> Option<(&Symbol, &Kind<A>)> {
        self.declarations.iter().find_map(|d| match d {
            Declaration::Constant { symbol, kind } if symbol.name == name => {
                Some((symbol, kind))
            }
            _ => None,
        })
    }

    /// The kind of a constant, looked up by the full symbol.
    pub fn constant_kind(&self, sym: &Symbol) -> Option<&Kind<A>> {
        match self.lookup_constant_name(&sym.name) {
            Some((declared, kind)) if declared == sym => Some(kind),
            _ => None,
        }
    }

    pub fn equations(&self) -> impl Iterator<Item = (usize, &Declaration<A>)> {
        self.declarations
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_equation())
    }

    pub fn has_equations(&self) -> bool {
        self.declarations.iter().any(Declaration::is_equation)
    }

    pub fn order(&self) -> SpecOrder {
        SpecOrder::Finite(
            self.declarations
                .iter()
                .map(Declaration::order)
                .max()
                .unwrap_or(0),
        )
    }

    /// The sub-specification consisting of the given declaration indices, in
    /// the given order.
    pub fn restricted(&self, indices: &[usize]) -> Specification<A> {
        Specification {
            declarations: indices
                .iter()
                .map(|&i| self.declarations[i].clone())
                .collect(),
        }
    }

    /// Whether the left-hand side of the equation is a higher-order pattern:
    /// every occurrence of a telescope variable is applied to eta-long forms
    /// of distinct locally bound variables, and every telescope variable
    /// occurs.  Only pattern equations take part in automatic rewriting.
    pub fn equation_is_pattern(&self, index: usize) -> bool {
        let Some(Declaration::Equation { telescope, lhs, .. }) =
            self.declarations.get(index)
        else {
            return false;
        };
        let pattern_vars: BTreeSet<Symbol> = telescope.domain().into_iter().collect();
        let mut seen: BTreeSet<Symbol> = BTreeSet::new();
        if !object_is_pattern(lhs, &pattern_vars, &mut Vec::new(), &mut seen) {
            return false;
        }
        pattern_vars.iter().all(|v| seen.contains(v))
    }

    pub fn non_pattern_equations(&self) -> Vec<usize> {
        self.equations()
            .map(|(i, _)| i)
            .filter(|&i| !self.equation_is_pattern(i))
            .collect()
    }
}

/// Whether `g` is the eta-long form of the bound variable `b` (ignoring any
/// binder annotations).
pub fn is_eta_expansion_of<A: Ann>(g: &crate::syntax::Abstraction<A>, b: &Symbol) -> bool {
    if g.arity() != b.arity {
        return false;
    }
    if g.body().head() != b {
        return false;
    }
    if g.body().args().len() != g.binders().len() {
        return false;
    }
    g.binders()
        .iter()
        .zip(g.body().args())
        .all(|((y, _), arg)| is_eta_expansion_of(arg, y))
}

fn object_is_pattern<A: Ann>(
    obj: &Object<A>,
    pattern_vars: &BTreeSet<Symbol>,
    bound: &mut Vec<Symbol>,
    seen: &mut BTreeSet<Symbol>,
) -> bool {
    let head = obj.head();
    if pattern_vars.contains(head) && !bound.contains(head) {
        seen.insert(head.clone());
        // Arguments must be eta-long forms of distinct locally bound
        // variables.
        let mut used: BTreeSet<Symbol> = BTreeSet::new();
        for arg in obj.args() {
            let Some(b) = bound_eta_target(arg, bound) else {
                return false;
            };
            if !used.insert(b) {
                return false;
            }
        }
        return true;
    }
    for arg in obj.args() {
        let mut pushed = 0;
        for (s, _) in arg.binders() {
            bound.push(s.clone());
            pushed += 1;
        }
        let ok = object_is_pattern(arg.body(), pattern_vars, bound, seen);
        for _ in 0..pushed {
            bound.pop();
        }
        if !ok {
            return false;
        }
    }
    true
}

fn bound_eta_target<A: Ann>(
    arg: &crate::syntax::Abstraction<A>,
    bound: &[Symbol],
) -> Option<Symbol> {
    // The head under the binders must be a locally bound variable whose
    // eta-long form the argument is.
    let head = arg.body().head().clone();
    if !bound.contains(&head) {
        return None;
    }
    if arg.binders().iter().any(|(s, _)| s == &head) {
        return None;
    }
    is_eta_expansion_of(arg, &head).then_some(head)
}

impl<A: Ann> fmt::Display for Declaration<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Declaration::Constant { symbol, kind } => {
                write!(f, "const {} : {}.", symbol.name, kind)
            }
            Declaration::Equation { telescope, lhs, rhs, target } => {
                write!(f, "eq ({telescope}) ({lhs} = {rhs} : {target}).")
            }
        }
    }
}

impl<A: Ann> fmt::Display for Specification<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.declarations {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

impl<A: Ann> fmt::Debug for Declaration<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<A: Ann> fmt::Debug for Specification<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn sigma_pi_orders() {
        let spec = fixtures::sigma_pi();
        let orders: Vec<usize> = spec.declarations().iter().map(|d| d.order()).collect();
        assert_eq!(orders, vec![2, 2, 2, 2]);
        assert_eq!(spec.order(), SpecOrder::Finite(2));
    }

    #[test]
    fn base_kind_constant_has_order_zero() {
        let spec = fixtures::combinators();
        // o : Type is a base-kind constant: order 0.
        assert_eq!(spec.declarations()[0].order(), 0);
        // appc : (a : El o, b : El o) El o has a first-order kind.
        assert_eq!(spec.declarations()[1].order(), 1);
    }

    #[test]
    fn sigma_pi_equation_is_pattern() {
        let spec = fixtures::sigma_pi();
        let eqs: Vec<usize> = spec.equations().map(|(i, _)| i).collect();
        assert_eq!(eqs, vec![3]);
        assert!(spec.equation_is_pattern(3));
        assert!(spec.non_pattern_equations().is_empty());
    }

    #[test]
    fn duplicate_constant_rejected() {
        let mut spec = fixtures::sigma_pi();
        let pi = spec.declarations()[0].clone();
        assert!(spec.push(pi).is_err());
    }
}

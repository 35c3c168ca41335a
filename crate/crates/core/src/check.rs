//! Explicit derivation trees and their local checker.
//!
//! A derivation stores, at every node, the rule used, the sub-derivations of
//! its premises, and the concluded judgement.  Where a rule's premise is a
//! defined judgement, the node carries one sub-derivation per member of the
//! expansion, in expansion order, so checking is purely local: each node is
//! validated from its rule, its premises' conclusions, and (for the equality
//! rule) the recorded instantiation.

use std::fmt;

use crate::judgement::{
    expand, Base, Context, DefinedBody, DefinedJudgement, ExpandError, Judgement,
    JudgementBody, Kind, Member,
};
use crate::spec::{Declaration, Specification};
use crate::syntax::{Abstraction, Ann, Instantiate, Symbol};

/// The rules of deduction, including the specification-induced ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    EmpCtxt,
    Ctxt,
    Var,
    VarEq,
    Ref,
    Sym,
    Trans,
    Conv,
    ConvEq,
    Const,
    ConstEq,
    Eq,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::EmpCtxt => "emp_ctxt",
            Rule::Ctxt => "ctxt",
            Rule::Var => "var",
            Rule::VarEq => "var_eq",
            Rule::Ref => "ref",
            Rule::Sym => "sym",
            Rule::Trans => "trans",
            Rule::Conv => "conv",
            Rule::ConvEq => "conv_eq",
            Rule::Const => "const",
            Rule::ConstEq => "const_eq",
            Rule::Eq => "eq",
        }
    }

    pub fn from_name(name: &str) -> Option<Rule> {
        Some(match name {
            "emp_ctxt" => Rule::EmpCtxt,
            "ctxt" => Rule::Ctxt,
            "var" => Rule::Var,
            "var_eq" => Rule::VarEq,
            "ref" => Rule::Ref,
            "sym" => Rule::Sym,
            "trans" => Rule::Trans,
            "conv" => Rule::Conv,
            "conv_eq" => Rule::ConvEq,
            "const" => Rule::Const,
            "const_eq" => Rule::ConstEq,
            "eq" => Rule::Eq,
            _ => return None,
        })
    }
}

/// The instantiation recorded at an equality-rule node: which declared
/// equation was used and with which abstraction sequence.
#[derive(Clone, PartialEq, Eq)]
pub struct EqInstance<A: Ann> {
    pub equation: usize,
    pub args: Vec<Abstraction<A>>,
}

/// A derivation tree.
#[derive(Clone, PartialEq, Eq)]
pub struct Derivation<A: Ann> {
    pub rule: Rule,
    pub premises: Vec<Derivation<A>>,
    pub conclusion: Judgement<A>,
    pub instance: Option<EqInstance<A>>,
}

impl<A: Ann> fmt::Debug for Derivation<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {:?}", self.rule.name(), self.conclusion)?;
        for p in &self.premises {
            write!(f, " {p:?}")?;
        }
        write!(f, ")")
    }
}

impl<A: Ann> Derivation<A> {
    pub fn node(rule: Rule, premises: Vec<Derivation<A>>, conclusion: Judgement<A>) -> Self {
        Derivation { rule, premises, conclusion, instance: None }
    }

    /// Visit every node of the tree, preorder.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Derivation<A>)) {
        f(self);
        for p in &self.premises {
            p.visit(f);
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.premises.iter().map(Derivation::node_count).sum::<usize>()
    }

    /// Whether some node concludes exactly the given judgement.
    pub fn concludes_somewhere(&self, j: &Judgement<A>) -> bool {
        let mut found = false;
        self.visit(&mut |n| {
            if !found && &n.conclusion == j {
                found = true;
            }
        });
        found
    }
}

/// A structured checking failure: which rule at which position failed, and
/// why.
#[derive(Clone, Debug)]
pub struct CheckError {
    pub rule: Rule,
    pub path: Vec<usize>,
    pub reason: String,
}

impl fmt::Display for CheckError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {} at ", self.rule.name())?;
        if self.path.is_empty() {
            write!(f, "root")?;
        } else {
            for (i, p) in self.path.iter().enumerate() {
                if i > 0 {
                    write!(f, ".")?;
                }
                write!(f, "{p}")?;
            }
        }
        write!(f, ": {}", self.reason)
    }
}

impl std::error::Error for CheckError {}

struct Checker<'a, A: Ann> {
    spec: &'a Specification<A>,
}

/// Check a derivation tree against a specification.
pub fn check_derivation<A: Ann>(
    spec: &Specification<A>,
    d: &Derivation<A>,
) -> Result<(), CheckError> {
    Checker { spec }.check(d, &mut Vec::new())
}

impl<'a, A: Ann> Checker<'a, A> {
    fn fail(&self, d: &Derivation<A>, path: &[usize], reason: impl Into<String>) -> CheckError {
        CheckError { rule: d.rule, path: path.to_vec(), reason: reason.into() }
    }

    fn check(&self, d: &Derivation<A>, path: &mut Vec<usize>) -> Result<(), CheckError> {
        self.check_node(d, path)?;
        for (i, p) in d.premises.iter().enumerate() {
            path.push(i);
            self.check(p, path)?;
            path.pop();
        }
        Ok(())
    }

    fn expect_premises(
        &self,
        d: &Derivation<A>,
        path: &[usize],
        members: &[Member<A>],
    ) -> Result<(), CheckError> {
        if members.len() != d.premises.len() {
            return Err(self.fail(
                d,
                path,
                format!(
                    "expected {} premises (one per expansion member), found {}",
                    members.len(),
                    d.premises.len()
                ),
            ));
        }
        for (i, (m, p)) in members.iter().zip(&d.premises).enumerate() {
            if !m.matches(&p.conclusion) {
                return Err(self.fail(
                    d,
                    path,
                    format!(
                        "premise {} concludes `{}`, expected member `{}`",
                        i, p.conclusion, m.judgement
                    ),
                ));
            }
        }
        Ok(())
    }

    fn expansion(
        &self,
        d: &Derivation<A>,
        path: &[usize],
        dj: &DefinedJudgement<A>,
    ) -> Result<Vec<Member<A>>, CheckError> {
        expand(dj).map_err(|e: ExpandError| self.fail(d, path, e.to_string()))
    }

    fn check_node(&self, d: &Derivation<A>, path: &mut Vec<usize>) -> Result<(), CheckError> {
        match d.rule {
            Rule::EmpCtxt => {
                if !d.premises.is_empty() {
                    return Err(self.fail(d, path, "takes no premises"));
                }
                match &d.conclusion.body {
                    JudgementBody::Valid if d.conclusion.context.is_empty() => Ok(()),
                    _ => Err(self.fail(d, path, "conclusion must be `valid` in the empty context")),
                }
            }
            Rule::Ctxt => {
                let JudgementBody::Valid = &d.conclusion.body else {
                    return Err(self.fail(d, path, "conclusion must be a validity judgement"));
                };
                let Some((gamma, (x, k))) = d.conclusion.context.split_last() else {
                    return Err(self.fail(d, path, "conclusion context must be nonempty"));
                };
                if gamma.entries().iter().any(|(s, _)| s.name == x.name) {
                    return Err(self.fail(d, path, format!("{} already declared", x.name)));
                }
                let dj = DefinedJudgement {
                    context: gamma.clone(),
                    body: DefinedBody::KindWf(k.clone()),
                };
                let members = self.expansion(d, path, &dj)?;
                self.expect_premises(d, path, &members)
            }
            Rule::Var | Rule::Const => {
                let JudgementBody::Typing(m, t) = &d.conclusion.body else {
                    return Err(self.fail(d, path, "conclusion must be a typing judgement"));
                };
                let gamma = &d.conclusion.context;
                let kind = self.head_kind(d, path, gamma, m.head())?;
                let theta = Context::new(kind.telescope().to_vec())
                    .map_err(|e| self.fail(d, path, e.to_string()))?;
                let dj = DefinedJudgement {
                    context: gamma.clone(),
                    body: DefinedBody::SeqSat(m.args().to_vec(), theta.clone()),
                };
                let members = self.expansion(d, path, &dj)?;
                self.expect_premises(d, path, &members)?;
                let expected = Kind::base(kind.target().clone())
                    .instantiate_seq(m.args(), &theta.domain())
                    .map_err(|e| self.fail(d, path, e.to_string()))?;
                if expected.target() != t {
                    return Err(self.fail(
                        d,
                        path,
                        format!(
                            "conclusion kind `{}` differs from instantiated kind `{}`",
                            t,
                            expected.target()
                        ),
                    ));
                }
                Ok(())
            }
            Rule::VarEq | Rule::ConstEq => {
                let JudgementBody::Equal(m, n, t) = &d.conclusion.body else {
                    return Err(self.fail(d, path, "conclusion must be an equality judgement"));
                };
                if m.head() != n.head() {
                    return Err(self.fail(d, path, "both sides must share their head symbol"));
                }
                let gamma = &d.conclusion.context;
                let kind = self.head_kind(d, path, gamma, m.head())?;
                let theta = Context::new(kind.telescope().to_vec())
                    .map_err(|e| self.fail(d, path, e.to_string()))?;
                let dj = DefinedJudgement {
                    context: gamma.clone(),
                    body: DefinedBody::SeqEq(m.args().to_vec(), n.args().to_vec(), theta.clone()),
                };
                let members = self.expansion(d, path, &dj)?;
                self.expect_premises(d, path, &members)?;
                let expected = Kind::base(kind.target().clone())
                    .instantiate_seq(m.args(), &theta.domain())
                    .map_err(|e| self.fail(d, path, e.to_string()))?;
                if expected.target() != t {
                    return Err(self.fail(
                        d,
                        path,
                        format!(
                            "conclusion kind `{}` differs from instantiated kind `{}`",
                            t,
                            expected.target()
                        ),
                    ));
                }
                Ok(())
            }
            Rule::Ref => {
                let [p] = d.premises.as_slice() else {
                    return Err(self.fail(d, path, "takes exactly one premise"));
                };
                let JudgementBody::Typing(m, t) = &p.conclusion.body else {
                    return Err(self.fail(d, path, "premise must be a typing judgement"));
                };
                let expected = Judgement::equal(
                    p.conclusion.context.clone(),
                    m.clone(),
                    m.clone(),
                    t.clone(),
                );
                if d.conclusion != expected {
                    return Err(self.fail(d, path, "conclusion must equate the premise object with itself"));
                }
                Ok(())
            }
            Rule::Sym => {
                let [p] = d.premises.as_slice() else {
                    return Err(self.fail(d, path, "takes exactly one premise"));
                };
                let JudgementBody::Equal(m, n, t) = &p.conclusion.body else {
                    return Err(self.fail(d, path, "premise must be an equality judgement"));
                };
                let expected = Judgement::equal(
                    p.conclusion.context.clone(),
                    n.clone(),
                    m.clone(),
                    t.clone(),
                );
                if d.conclusion != expected {
                    return Err(self.fail(d, path, "conclusion must swap the premise sides"));
                }
                Ok(())
            }
            Rule::Trans => {
                let [p1, p2] = d.premises.as_slice() else {
                    return Err(self.fail(d, path, "takes exactly two premises"));
                };
                let (JudgementBody::Equal(m, n1, t1), JudgementBody::Equal(n2, q, t2)) =
                    (&p1.conclusion.body, &p2.conclusion.body)
                else {
                    return Err(self.fail(d, path, "premises must be equality judgements"));
                };
                if p1.conclusion.context != p2.conclusion.context {
                    return Err(self.fail(d, path, "premises must share their context"));
                }
                if n1 != n2 {
                    return Err(self.fail(d, path, "middle objects do not agree"));
                }
                if t1 != t2 {
                    return Err(self.fail(d, path, "premise kinds do not agree"));
                }
                let expected = Judgement::equal(
                    p1.conclusion.context.clone(),
                    m.clone(),
                    q.clone(),
                    t1.clone(),
                );
                if d.conclusion != expected {
                    return Err(self.fail(d, path, "conclusion must chain the premises"));
                }
                Ok(())
            }
            Rule::Conv => {
                let [p1, p2] = d.premises.as_slice() else {
                    return Err(self.fail(d, path, "takes exactly two premises"));
                };
                let JudgementBody::Typing(m, Base::El(a)) = &p1.conclusion.body else {
                    return Err(self.fail(d, path, "first premise must type at an El kind"));
                };
                let JudgementBody::Equal(a2, b, Base::Type) = &p2.conclusion.body else {
                    return Err(self.fail(d, path, "second premise must be a Type equality"));
                };
                if p1.conclusion.context != p2.conclusion.context {
                    return Err(self.fail(d, path, "premises must share their context"));
                }
                if a != a2 {
                    return Err(self.fail(d, path, "carrier of the first premise must be the left side of the second"));
                }
                let expected = Judgement::typing(
                    p1.conclusion.context.clone(),
                    m.clone(),
                    Base::El(b.clone()),
                );
                if d.conclusion != expected {
                    return Err(self.fail(d, path, "conclusion must retype at the converted kind"));
                }
                Ok(())
            }
            Rule::ConvEq => {
                let [p1, p2] = d.premises.as_slice() else {
                    return Err(self.fail(d, path, "takes exactly two premises"));
                };
                let JudgementBody::Equal(m, n, Base::El(a)) = &p1.conclusion.body else {
                    return Err(self.fail(d, path, "first premise must be an equality at an El kind"));
                };
                let JudgementBody::Equal(a2, b, Base::Type) = &p2.conclusion.body else {
                    return Err(self.fail(d, path, "second premise must be a Type equality"));
                };
                if p1.conclusion.context != p2.conclusion.context {
                    return Err(self.fail(d, path, "premises must share their context"));
                }
                if a != a2 {
                    return Err(self.fail(d, path, "carrier of the first premise must be the left side of the second"));
                }
                let expected = Judgement::equal(
                    p1.conclusion.context.clone(),
                    m.clone(),
                    n.clone(),
                    Base::El(b.clone()),
                );
                if d.conclusion != expected {
                    return Err(self.fail(d, path, "conclusion must re-kind at the converted carrier"));
                }
                Ok(())
            }
            Rule::Eq => {
                let Some(instance) = &d.instance else {
                    return Err(self.fail(d, path, "missing equation instance"));
                };
                let Some(Declaration::Equation { telescope, lhs, rhs, target }) =
                    self.spec.declarations().get(instance.equation)
                else {
                    return Err(self.fail(
                        d,
                        path,
                        format!("declaration {} is not an equation", instance.equation),
                    ));
                };
                let gamma = &d.conclusion.context;
                let dj = DefinedJudgement {
                    context: gamma.clone(),
                    body: DefinedBody::SeqSat(instance.args.clone(), telescope.clone()),
                };
                let members = self.expansion(d, path, &dj)?;
                self.expect_premises(d, path, &members)?;
                let doms = telescope.domain();
                let il = lhs
                    .instantiate_seq(&instance.args, &doms)
                    .map_err(|e| self.fail(d, path, e.to_string()))?;
                let ir = rhs
                    .instantiate_seq(&instance.args, &doms)
                    .map_err(|e| self.fail(d, path, e.to_string()))?;
                let it = target
                    .instantiate_seq(&instance.args, &doms)
                    .map_err(|e| self.fail(d, path, e.to_string()))?;
                let expected = Judgement::equal(gamma.clone(), il, ir, it);
                if d.conclusion != expected {
                    return Err(self.fail(
                        d,
                        path,
                        format!("conclusion `{}` is not the recorded instance `{}`", d.conclusion, expected),
                    ));
                }
                Ok(())
            }
        }
    }

    fn head_kind(
        &self,
        d: &Derivation<A>,
        path: &[usize],
        gamma: &Context<A>,
        head: &Symbol,
    ) -> Result<Kind<A>, CheckError> {
        match d.rule {
            Rule::Var | Rule::VarEq => {
                if !head.is_variable() {
                    return Err(self.fail(d, path, format!("head {} is not a variable", head.name)));
                }
                gamma
                    .lookup(head)
                    .cloned()
                    .ok_or_else(|| self.fail(d, path, format!("no declaration for {}", head.name)))
            }
            _ => {
                if head.is_variable() {
                    return Err(self.fail(d, path, format!("head {} is not a constant", head.name)));
                }
                self.spec
                    .constant_kind(head)
                    .cloned()
                    .ok_or_else(|| self.fail(d, path, format!("no declaration for {}", head.name)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::judgement::Judgement;
    use crate::syntax::Object;

    type D = Derivation<()>;

    fn empty_valid() -> D {
        Derivation::node(Rule::EmpCtxt, vec![], Judgement::valid(Context::empty()))
    }

    #[test]
    fn empty_context_is_valid() {
        let spec = Specification::<()>::empty();
        assert!(check_derivation(&spec, &empty_valid()).is_ok());
    }

    #[test]
    fn variable_lookup_in_singleton_context() {
        // A : Type |- A : Type via (ctxt) then (var).
        let spec = Specification::<()>::empty();
        let a = Symbol::base_var("A");
        let ctx = Context::new(vec![(a.clone(), Kind::ty())]).unwrap();
        let ctxt_node = Derivation::node(
            Rule::Ctxt,
            vec![empty_valid()],
            Judgement::valid(ctx.clone()),
        );
        let var_node = Derivation::node(
            Rule::Var,
            vec![ctxt_node],
            Judgement::typing(ctx, Object::leaf(a).unwrap(), Base::Type),
        );
        check_derivation(&spec, &var_node).unwrap();
    }

    #[test]
    fn missing_declaration_is_reported() {
        let spec = Specification::<()>::empty();
        let a = Symbol::base_var("A");
        let bad = Derivation::node(
            Rule::Var,
            vec![empty_valid()],
            Judgement::typing(Context::empty(), Object::leaf(a).unwrap(), Base::Type),
        );
        let err = check_derivation(&spec, &bad).unwrap_err();
        assert!(err.reason.contains("no declaration"));
    }

    #[test]
    fn shadowed_context_entry_rejected() {
        let spec = Specification::<()>::empty();
        let a = Symbol::base_var("A");
        let ctx = Context::new(vec![(a.clone(), Kind::ty())]).unwrap();
        // Forge a conclusion A : Type, A : Type valid; the constructor would
        // refuse, so splice contexts manually through a prefix trick.
        let inner = Derivation::node(
            Rule::Ctxt,
            vec![empty_valid()],
            Judgement::valid(ctx.clone()),
        );
        // Reusing the same judgement with a premise for the same kind is fine;
        // the checker must still reject a duplicate name if one is forged.
        let ok = check_derivation(&spec, &inner);
        assert!(ok.is_ok());
        let _ = fixtures::sigma_pi();
    }
}

//! Specification analysis: orderability, goodness classification, and the
//! small-kind profiles.
//!
//! A specification is *orderable* when its declarations admit a linear order
//! under which every declaration's checking obligations are derivable from
//! the earlier declarations alone.  Orderable specifications of order at most
//! two are 2-good; equation-free specifications are good outright.  Anything
//! else is reported as unknown: unknown never blocks checking, it only
//! withholds the metatheorems that would need it.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::judgement::{expand, DefinedBody, DefinedJudgement, Judgement, Kind};
use crate::spec::{Declaration, SpecOrder, Specification};
use crate::synth::{derive_context_valid, derive_typing, SynthError};
use crate::syntax::{Ann, Symbol};

/// Result of the goodness classifier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GoodnessClass {
    /// No equation declarations: good at every order.
    Good { reason: String },
    /// Orderable with all declarations of order at most 2.
    TwoGood { reason: String },
    /// Neither theorem applies.
    Unknown { reason: String },
}

impl GoodnessClass {
    pub fn describe(&self) -> String {
        match self {
            GoodnessClass::Good { reason } => format!("good ({reason})"),
            GoodnessClass::TwoGood { reason } => format!("2-good ({reason})"),
            GoodnessClass::Unknown { reason } => format!("unknown ({reason})"),
        }
    }
}

/// Why a specification failed to be orderable.
#[derive(Clone, Debug, Error)]
pub enum OrderableError {
    #[error("dependency cycle through {0:?}")]
    Cycle(Vec<String>),
    #[error("obligation for declaration {index} ({label}) failed: {reason}")]
    Obligation { index: usize, label: String, reason: String },
}

/// Compute an ordering witness: a permutation of declaration indices such
/// that each declaration's obligations check using only earlier ones.
/// Dependencies are resolved by topological sort on referenced constants,
/// preserving source order among independent declarations, then each
/// obligation is verified against the restricted specification.
pub fn orderable<A: Ann>(
    spec: &Specification<A>,
    fuel: u64,
) -> Result<Vec<usize>, OrderableError> {
    let n = spec.len();
    // Map constant name -> declaring index.
    let mut decl_of: Vec<(String, usize)> = Vec::new();
    for (i, d) in spec.declarations().iter().enumerate() {
        if let Declaration::Constant { symbol, .. } = d {
            decl_of.push((symbol.name.clone(), i));
        }
    }
    let index_of = |name: &str| decl_of.iter().find(|(n, _)| n == name).map(|(_, i)| *i);
    let mut deps: Vec<BTreeSet<usize>> = Vec::with_capacity(n);
    for d in spec.declarations() {
        let mut set = BTreeSet::new();
        for c in d.referenced_constants() {
            if let Some(j) = index_of(&c.name) {
                set.insert(j);
            }
        }
        deps.push(set);
    }
    // Self-reference counts as a cycle.
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    loop {
        // Lowest-index declaration whose dependencies are all placed; a
        // self-dependency therefore also reads as a cycle.
        let next = (0..n).find(|&i| !placed[i] && deps[i].iter().all(|&j| placed[j]));
        match next {
            Some(i) => {
                placed[i] = true;
                order.push(i);
            }
            None => {
                if order.len() == n {
                    break;
                }
                let cycle: Vec<String> = (0..n)
                    .filter(|&i| !placed[i])
                    .map(|i| spec.declarations()[i].label(i))
                    .collect();
                return Err(OrderableError::Cycle(cycle));
            }
        }
    }
    // Verify obligations in witness order.
    for (pos, &i) in order.iter().enumerate() {
        let restricted = spec.restricted(&order[..pos]);
        verify_obligations(&restricted, spec, i, fuel).map_err(|reason| {
            OrderableError::Obligation {
                index: i,
                label: spec.declarations()[i].label(i),
                reason,
            }
        })?;
    }
    Ok(order)
}

/// Check a single declaration's obligations against an earlier-declarations
/// specification: the declared kind must be well formed, and equation sides
/// must be typable at the declared base kind.
pub fn verify_obligations<A: Ann>(
    earlier: &Specification<A>,
    full: &Specification<A>,
    index: usize,
    fuel: u64,
) -> Result<(), String> {
    match &full.declarations()[index] {
        Declaration::Constant { kind, .. } => {
            derive_kind_wf(earlier, kind, fuel).map_err(|e| e.to_string())
        }
        Declaration::Equation { telescope, lhs, rhs, target } => {
            derive_context_valid(earlier, telescope, fuel).map_err(|e| e.to_string())?;
            derive_typing(earlier, telescope, lhs, target, fuel)
                .map_err(|e| format!("left side: {e}"))?;
            derive_typing(earlier, telescope, rhs, target, fuel)
                .map_err(|e| format!("right side: {e}"))?;
            let as_kind = Kind::base(target.clone());
            derive_kind_wf_under(earlier, telescope, &as_kind, fuel)
                .map_err(|e| format!("target kind: {e}"))
        }
    }
}

fn derive_kind_wf<A: Ann>(
    spec: &Specification<A>,
    kind: &Kind<A>,
    fuel: u64,
) -> Result<(), SynthError> {
    derive_kind_wf_under(spec, &crate::judgement::Context::empty(), kind, fuel)
}

fn derive_kind_wf_under<A: Ann>(
    spec: &Specification<A>,
    ctx: &crate::judgement::Context<A>,
    kind: &Kind<A>,
    fuel: u64,
) -> Result<(), SynthError> {
    let dj = DefinedJudgement { context: ctx.clone(), body: DefinedBody::KindWf(kind.clone()) };
    let members = expand(&dj)?;
    for member in members {
        derive_member_judgement(spec, &member.judgement, fuel)?;
    }
    Ok(())
}

fn derive_member_judgement<A: Ann>(
    spec: &Specification<A>,
    j: &Judgement<A>,
    fuel: u64,
) -> Result<(), SynthError> {
    match &j.body {
        crate::judgement::JudgementBody::Valid => {
            derive_context_valid(spec, &j.context, fuel).map(|_| ())
        }
        crate::judgement::JudgementBody::Typing(m, t) => {
            derive_context_valid(spec, &j.context, fuel)?;
            derive_typing(spec, &j.context, m, t, fuel).map(|_| ())
        }
        crate::judgement::JudgementBody::Equal(m, n, t) => {
            derive_context_valid(spec, &j.context, fuel)?;
            match crate::synth::check_equal(spec, &j.context, m, n, t, fuel)? {
                Some(_) => Ok(()),
                None => Err(SynthError::EqualityNotEstablished {
                    left: m.to_string(),
                    right: n.to_string(),
                }),
            }
        }
    }
}

/// Classify a specification per the two goodness theorems.
pub fn classify_goodness<A: Ann>(spec: &Specification<A>, fuel: u64) -> GoodnessClass {
    if !spec.has_equations() {
        return GoodnessClass::Good { reason: "no equation declarations".into() };
    }
    let order = spec.order();
    match orderable(spec, fuel) {
        Ok(_) => match order {
            SpecOrder::Finite(n) if n <= 2 => GoodnessClass::TwoGood {
                reason: format!("orderable, max order {n}"),
            },
            _ => GoodnessClass::Unknown {
                reason: format!(
                    "equation declarations present and order {order} exceeds 2"
                ),
            },
        },
        Err(e) => GoodnessClass::Unknown { reason: format!("not orderable: {e}") },
    }
}

/// The two implemented profiles: every variable small-kinded with no
/// equations, or every variable small-kinded of order at most 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// No equation declarations; every variable has a small kind.
    SparOmegaMinus,
    /// Every variable has a small kind of order 0 or 1 (equations allowed).
    SparTwo,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::SparOmegaMinus => "spar-omega-minus",
            Profile::SparTwo => "spar2",
        }
    }
}

/// A profile violation with its position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub place: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.place, self.message)
    }
}

fn check_variable_kind<A: Ann>(
    profile: Profile,
    place: &str,
    var: &Symbol,
    kind: &Kind<A>,
    out: &mut Vec<Violation>,
) {
    if !kind.is_small() {
        out.push(Violation {
            place: place.to_string(),
            message: format!("variable {} has kind {}, which is large", var.name, kind),
        });
    } else if profile == Profile::SparTwo && kind.order() > 1 {
        out.push(Violation {
            place: place.to_string(),
            message: format!(
                "variable {} has kind {} of order {}, above 1",
                var.name,
                kind,
                kind.order()
            ),
        });
    }
    // Nested telescope variables count as variables too.
    for (s, k) in kind.telescope() {
        check_variable_kind(profile, place, s, k, out);
    }
}

/// Check a specification against a profile.
pub fn check_profile_spec<A: Ann>(
    spec: &Specification<A>,
    profile: Profile,
) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, d) in spec.declarations().iter().enumerate() {
        let place = d.label(i);
        match d {
            Declaration::Constant { kind, .. } => {
                for (s, k) in kind.telescope() {
                    check_variable_kind(profile, &place, s, k, &mut out);
                }
            }
            Declaration::Equation { telescope, .. } => {
                if profile == Profile::SparOmegaMinus {
                    out.push(Violation {
                        place: place.clone(),
                        message: "equation declarations are not permitted".into(),
                    });
                }
                for (s, k) in telescope.entries() {
                    check_variable_kind(profile, &place, s, k, &mut out);
                }
            }
        }
    }
    out
}

/// Check a judgement's context against a profile.
pub fn check_profile_judgement<A: Ann>(
    j: &Judgement<A>,
    profile: Profile,
) -> Vec<Violation> {
    let mut out = Vec::new();
    for (s, k) in j.context.entries() {
        check_variable_kind(profile, "context", s, k, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn sigma_pi_is_orderable_in_source_order() {
        let spec = fixtures::sigma_pi();
        let order = orderable(&spec, 64).unwrap();
        assert_eq!(order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn empty_specification_is_orderable() {
        let spec = Specification::<()>::empty();
        assert_eq!(orderable(&spec, 64).unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn mutual_constants_cycle() {
        use crate::arity::Arity;
        use crate::judgement::Base;
        use crate::syntax::Object;
        // c : El d, d : El c.
        let c = Symbol::constant("c", Arity::base());
        let d = Symbol::constant("d", Arity::base());
        let spec = Specification::<()>::new(vec![
            Declaration::Constant {
                symbol: c.clone(),
                kind: Kind::base(Base::El(Object::leaf(d.clone()).unwrap())),
            },
            Declaration::Constant {
                symbol: d,
                kind: Kind::base(Base::El(Object::leaf(c).unwrap())),
            },
        ])
        .unwrap();
        assert!(matches!(orderable(&spec, 64), Err(OrderableError::Cycle(_))));
    }

    #[test]
    fn classify_golden_cases() {
        assert_eq!(
            classify_goodness(&fixtures::sigma_pi(), 64).describe(),
            "2-good (orderable, max order 2)"
        );
        assert_eq!(
            classify_goodness(&fixtures::sigma_pi_constants_only(), 64).describe(),
            "good (no equation declarations)"
        );
        let unknown = classify_goodness(&fixtures::sigma_pi_with_order3_equation(), 64);
        assert!(matches!(unknown, GoodnessClass::Unknown { .. }));
    }

    #[test]
    fn constants_only_order3_is_still_good() {
        use crate::arity::Arity;
        // A third-order constant without equations stays good.
        let h = Symbol::constant("h", Arity::new(vec![Arity::new(vec![Arity::first_order(1)])]));
        let x2 = Symbol::var("F", Arity::new(vec![Arity::first_order(1)]));
        let y = Symbol::var("g", Arity::first_order(1));
        let z = Symbol::base_var("z");
        let inner = Kind::<()>::new(
            vec![(z.clone(), Kind::ty())],
            crate::judgement::Base::Type,
        )
        .unwrap();
        let k_f = Kind::new(vec![(y.clone(), inner)], crate::judgement::Base::Type).unwrap();
        let kind = Kind::new(vec![(x2, k_f)], crate::judgement::Base::Type).unwrap();
        assert_eq!(kind.order(), 3);
        let spec = Specification::new(vec![Declaration::Constant { symbol: h, kind }]).unwrap();
        assert!(matches!(
            classify_goodness(&spec, 64),
            GoodnessClass::Good { .. }
        ));
    }

    #[test]
    fn sigma_pi_fails_spar_two() {
        let violations = check_profile_spec(&fixtures::sigma_pi(), Profile::SparTwo);
        assert!(violations
            .iter()
            .any(|v| v.message.contains("variable A has kind Type")));
    }

    #[test]
    fn combinators_pass_spar_two() {
        let violations = check_profile_spec(&fixtures::combinators(), Profile::SparTwo);
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn combinators_equation_blocks_spar_omega_minus() {
        let violations =
            check_profile_spec(&fixtures::combinators(), Profile::SparOmegaMinus);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].message.contains("equation"));
        let none = check_profile_spec(
            &fixtures::combinators_constants_only(),
            Profile::SparOmegaMinus,
        );
        assert!(none.is_empty());
    }

    #[test]
    fn empty_judgement_passes_profiles() {
        let j = Judgement::<()>::valid(crate::judgement::Context::empty());
        assert!(check_profile_judgement(&j, Profile::SparTwo).is_empty());
        assert!(check_profile_judgement(&j, Profile::SparOmegaMinus).is_empty());
    }
}

//! Metatheory suite for the judgement layer under the dependent-product
//! reference theory: soundness of synthesis, context validity, weakening,
//! the admissible transformations, equation validity, and kind preservation
//! under rewriting.

use tf_kernel::check::{check_derivation, Derivation, Rule};
use tf_kernel::fixtures;
use tf_kernel::inject::injectivity_split;
use tf_kernel::judgement::{Base, Context, Judgement, JudgementBody, Kind};
use tf_kernel::spec::Specification;
use tf_kernel::synth::{
    check_equal, derive_context_valid, derive_seq_eq_members, derive_typing, rewrite_step,
    synth_kind,
};
use tf_kernel::syntax::{Instantiate, Object, Symbol, TfAbstraction};
use tf_testkit::gen::TypedGen;
use tf_testkit::transform::weaken_derivation;

use rand::Rng;

const ROUNDS: usize = 120;
const FUEL: u64 = 64;

/// Every context prefix of an accepted conclusion has a validity node
/// somewhere in the tree.
fn assert_context_validity(d: &Derivation<()>) {
    let ctx = &d.conclusion.context;
    for i in 0..=ctx.len() {
        let prefix = ctx.prefix(i);
        let expected = Judgement::valid(prefix);
        assert!(
            d.concludes_somewhere(&expected),
            "missing validity sub-derivation for a prefix of {}",
            d.conclusion
        );
    }
}

#[test]
fn synthesis_is_sound_and_contexts_are_validated() {
    let mut gen = TypedGen::new(31);
    let spec = gen.spec.clone();
    let mut produced = 0;
    while produced < ROUNDS {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 3) else { continue };
        let (kind, d) = synth_kind(&spec, &ctx, &t.term, FUEL)
            .unwrap_or_else(|e| panic!("generated term failed to synthesise: {e}\n  {ctx} |- {}", t.term));
        assert_eq!(kind, Base::El(t.carrier.clone()), "carrier mismatch for {}", t.term);
        check_derivation(&spec, &d).expect("synthesised derivation checks");
        assert_context_validity(&d);
        produced += 1;
    }
}

#[test]
fn equality_search_emits_checkable_derivations() {
    let mut gen = TypedGen::new(32);
    let spec = gen.spec.clone();
    let mut produced = 0;
    while produced < ROUNDS / 2 {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 3) else { continue };
        let Some(expanded) = gen.beta_expand(&ctx, &t.term) else { continue };
        let target = Base::El(t.carrier.clone());
        let d = check_equal(&spec, &ctx, &expanded, &t.term, &target, FUEL)
            .expect("no internal error")
            .expect("beta-expanded terms are joinable");
        check_derivation(&spec, &d).expect("equality derivation checks");
        assert_context_validity(&d);
        produced += 1;
    }
}

#[test]
fn weakening_transformer_preserves_acceptance() {
    let mut gen = TypedGen::new(33);
    let spec = gen.spec.clone();
    let mut produced = 0;
    while produced < ROUNDS / 2 {
        let gamma = gen.context();
        let Some(t) = gen.term(&gamma, 2) else { continue };
        let (_, d) = synth_kind(&spec, &gamma, &t.term, FUEL).expect("synthesis");
        // Extend the context at the end with a fresh declaration.
        let fresh_a = Symbol::base_var(format!("W{produced}"));
        let delta = gamma.extended(fresh_a, Kind::ty()).unwrap();
        let delta_valid = derive_context_valid(&spec, &delta, FUEL).unwrap();
        let weakened = weaken_derivation(&d, &gamma, &delta, &delta_valid);
        check_derivation(&spec, &weakened).expect("weakened derivation checks");
        produced += 1;
    }
}

/// Generate a context split `gamma, x : K, delta`, a judgement over it, and
/// an abstraction inhabiting K under gamma.
struct CutCase {
    full: Context<()>,
    gamma_len: usize,
    x: Symbol,
    judgement_term: Object<()>,
    carrier: Object<()>,
    f: TfAbstraction,
}

fn gen_cut_case(gen: &mut TypedGen) -> Option<CutCase> {
    let spec = gen.spec.clone();
    let full = gen.context();
    // Choose the cut point: an element entry whose kind is inhabitable from
    // the entries on its left.
    let (idx, f) = (0..full.len()).rev().find_map(|i| {
        let (_, k) = &full.entries()[i];
        if !(k.is_base() && matches!(k.target(), Base::El(_))) {
            return None;
        }
        let gamma = full.prefix(i);
        let Base::El(carrier) = k.target().clone() else { return None };
        let f_body = gen.term_of(&gamma, &carrier, 2)?;
        Some((i, TfAbstraction::constant(f_body)))
    })?;
    let (x, k) = full.entries()[idx].clone();
    let Base::El(carrier) = k.target().clone() else { return None };
    let _ = carrier;
    // A typed term over the full context that actually mentions x.
    for _ in 0..6 {
        let t = gen.term(&full, 3)?;
        if t.term.free_vars().contains(&x) {
            let _ = synth_kind(&spec, &full, &t.term, FUEL).ok()?;
            return Some(CutCase {
                full,
                gamma_len: idx,
                x,
                judgement_term: t.term,
                carrier: t.carrier,
                f,
            });
        }
    }
    None
}

#[test]
fn cut_transformed_judgements_rederive() {
    let mut gen = TypedGen::new(34);
    let spec = gen.spec.clone();
    let mut produced = 0;
    let mut attempts = 0;
    while produced < ROUNDS / 3 && attempts < ROUNDS * 20 {
        attempts += 1;
        let Some(case) = gen_cut_case(&mut gen) else { continue };
        // gamma, {F/x}delta
        let gamma = case.full.prefix(case.gamma_len);
        let mut new_ctx = gamma.clone();
        let mut ok = true;
        for (s, k) in &case.full.entries()[case.gamma_len + 1..] {
            let Ok(k2) = k.instantiate(&case.f, &case.x) else { ok = false; break };
            let Ok(extended) = new_ctx.extended(s.clone(), k2) else { ok = false; break };
            new_ctx = extended;
        }
        if !ok {
            continue;
        }
        let new_term = case.judgement_term.instantiate(&case.f, &case.x).unwrap();
        let new_carrier = case.carrier.instantiate(&case.f, &case.x).unwrap();
        // Re-derive the transformed judgement.
        let d = derive_typing(&spec, &new_ctx, &new_term, &Base::El(new_carrier), FUEL)
            .expect("cut-transformed judgement re-derives");
        check_derivation(&spec, &d).expect("checks");
        produced += 1;
    }
    assert!(produced >= 10, "too few cut cases exercised: {produced}");
}

#[test]
fn functionality_transformed_judgements_rederive() {
    let mut gen = TypedGen::new(35);
    let spec = gen.spec.clone();
    let mut produced = 0;
    let mut attempts = 0;
    while produced < ROUNDS / 4 && attempts < ROUNDS * 20 {
        attempts += 1;
        let Some(case) = gen_cut_case(&mut gen) else { continue };
        let gamma = case.full.prefix(case.gamma_len);
        // G: a beta-expansion of F's body, so gamma ||- F = G : K holds.
        let Some(g_body) = gen.beta_expand(&gamma, case.f.body()) else { continue };
        let g = TfAbstraction::constant(g_body);
        let mut new_ctx = gamma.clone();
        let mut ok = true;
        for (s, k) in &case.full.entries()[case.gamma_len + 1..] {
            let Ok(k2) = k.instantiate(&case.f, &case.x) else { ok = false; break };
            let Ok(extended) = new_ctx.extended(s.clone(), k2) else { ok = false; break };
            new_ctx = extended;
        }
        if !ok {
            continue;
        }
        let left = case.judgement_term.instantiate(&case.f, &case.x).unwrap();
        let right = case.judgement_term.instantiate(&g, &case.x).unwrap();
        let carrier = case.carrier.instantiate(&case.f, &case.x).unwrap();
        let d = check_equal(&spec, &new_ctx, &left, &right, &Base::El(carrier), FUEL)
            .expect("no internal error")
            .expect("functionality equality re-derives");
        check_derivation(&spec, &d).expect("checks");
        produced += 1;
    }
    assert!(produced >= 8, "too few functionality cases exercised: {produced}");
}

#[test]
fn context_conversion_transformed_judgements_rederive() {
    let mut gen = TypedGen::new(36);
    let spec = gen.spec.clone();
    let mut produced = 0;
    let mut attempts = 0;
    while produced < ROUNDS / 4 && attempts < ROUNDS * 20 {
        attempts += 1;
        let full = gen.context();
        // Pick an element entry whose carrier can be beta-expanded under the
        // entries to its left.
        let Some((idx, expanded)) = (0..full.len()).rev().find_map(|i| {
            let (_, k) = &full.entries()[i];
            if !(k.is_base() && matches!(k.target(), Base::El(_))) {
                return None;
            }
            let gamma = full.prefix(i);
            let Base::El(carrier) = k.target().clone() else { return None };
            let e = gen.beta_expand(&gamma, &carrier)?;
            Some((i, e))
        }) else {
            continue;
        };
        let gamma = full.prefix(idx);
        let (x, _) = full.entries()[idx].clone();
        let Some(t) = gen.term(&full, 2) else { continue };
        // Swap in the converted kind.
        let mut new_ctx = gamma.clone();
        new_ctx = new_ctx.extended(x.clone(), Kind::el(expanded)).unwrap();
        let mut ok = true;
        for (s, kk) in &full.entries()[idx + 1..] {
            match new_ctx.extended(s.clone(), kk.clone()) {
                Ok(c) => new_ctx = c,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let d = derive_typing(&spec, &new_ctx, &t.term, &Base::El(t.carrier.clone()), FUEL);
        let d = d.expect("context-converted judgement re-derives");
        check_derivation(&spec, &d).expect("checks");
        produced += 1;
    }
    assert!(produced >= 8, "too few conversion cases exercised: {produced}");
}

#[test]
fn equality_implies_typability_of_both_sides() {
    // Equation validity at low context order: whenever the equality search
    // succeeds, both sides synthesise at the same kind.
    let mut gen = TypedGen::new(37);
    let spec = gen.spec.clone();
    let mut produced = 0;
    while produced < ROUNDS / 2 {
        let ctx = gen.context();
        assert!(ctx.order() <= 2);
        let Some(t) = gen.term(&ctx, 3) else { continue };
        let Some(expanded) = gen.beta_expand(&ctx, &t.term) else { continue };
        let target = Base::El(t.carrier.clone());
        if check_equal(&spec, &ctx, &expanded, &t.term, &target, FUEL)
            .unwrap()
            .is_none()
        {
            panic!("expected joinable terms");
        }
        derive_typing(&spec, &ctx, &expanded, &target, FUEL).expect("left side typable");
        derive_typing(&spec, &ctx, &t.term, &target, FUEL).expect("right side typable");
        produced += 1;
    }
}

#[test]
fn rewriting_preserves_the_synthesised_kind() {
    // Subject reduction: the kind synthesised after a rewrite is the same up
    // to judgemental equality (dependent kinds may mention the redex).
    let mut gen = TypedGen::new(38);
    let spec = gen.spec.clone();
    let mut produced = 0;
    while produced < ROUNDS / 2 {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 3) else { continue };
        let Some(expanded) = gen.beta_expand(&ctx, &t.term) else { continue };
        let (before, _) = synth_kind(&spec, &ctx, &expanded, FUEL).expect("synth before");
        for rm in rewrite_step(&spec, &ctx, &expanded) {
            let (after, _) = synth_kind(&spec, &ctx, &rm.result, FUEL).expect("synth after");
            if before == after {
                continue;
            }
            match (&before, &after) {
                (Base::El(a), Base::El(b)) => {
                    let joined = check_equal(&spec, &ctx, a, b, &Base::Type, FUEL)
                        .expect("no internal error");
                    assert!(joined.is_some(), "kinds diverged across a rewrite");
                }
                _ => panic!("kind shape changed across a rewrite"),
            }
        }
        produced += 1;
    }
}

#[test]
fn kind_uniqueness_under_equation_free_specifications() {
    let spec = fixtures::sigma_pi_constants_only();
    let mut gen = TypedGen::new(39);
    // Generation uses the full theory; restrict to terms that never mention
    // the equation (all of them do not: equations are not term formers).
    let mut produced = 0;
    while produced < 40 {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 2) else { continue };
        let (k1, _) = synth_kind(&spec, &ctx, &t.term, FUEL).expect("synth");
        let (k2, _) = synth_kind(&spec, &ctx, &t.term, FUEL).expect("synth twice");
        assert_eq!(k1, k2);
        produced += 1;
    }
}

#[test]
fn injectivity_split_on_searched_equalities() {
    let mut gen = TypedGen::new(40);
    let spec = gen.spec.clone();
    let mut produced = 0;
    let mut attempts = 0;
    while produced < 30 && attempts < 3000 {
        attempts += 1;
        let ctx = gen.context();
        // Build a Pi type and a beta-expanded variant, then derive equality.
        let pi_ty = gen.ty(&ctx, 2);
        if pi_ty.is_leaf() || pi_ty.head().name != "Pi" {
            continue;
        }
        let Some(expanded) = gen.beta_expand(&ctx, &pi_ty) else { continue };
        if expanded == pi_ty {
            continue;
        }
        let Some(d) = check_equal(&spec, &ctx, &expanded, &pi_ty, &Base::Type, FUEL).unwrap()
        else {
            continue;
        };
        let members = injectivity_split(&spec, &d, FUEL).expect("split succeeds");
        assert!(!members.is_empty());
        for m in &members {
            check_derivation(&spec, m).expect("component derivation checks");
        }
        produced += 1;
    }
    assert!(produced >= 10, "too few injectivity cases: {produced}");
}

#[test]
fn injectivity_split_on_congruence_roots() {
    let mut gen = TypedGen::new(41);
    let spec = gen.spec.clone();
    let mut produced = 0;
    while produced < 20 {
        let ctx = gen.context();
        let pi_ty = gen.ty(&ctx, 2);
        if pi_ty.is_leaf() || pi_ty.head().name != "Pi" {
            continue;
        }
        // Build a constant-congruence derivation of Pi args = Pi args.
        let (pi, kind) = spec.lookup_constant_name("Pi").unwrap();
        let theta = Context::new(kind.telescope().to_vec()).unwrap();
        let Some(members) = derive_seq_eq_members(
            &spec,
            &ctx,
            pi_ty.args(),
            pi_ty.args(),
            &theta,
            FUEL,
        )
        .unwrap() else {
            continue;
        };
        let conclusion = Judgement::equal(ctx.clone(), pi_ty.clone(), pi_ty.clone(), Base::Type);
        let d = Derivation::node(Rule::ConstEq, members, conclusion);
        let _ = pi;
        check_derivation(&spec, &d).expect("congruence derivation checks");
        let split = injectivity_split(&spec, &d, FUEL).expect("split succeeds");
        for m in &split {
            check_derivation(&spec, m).expect("component checks");
        }
        produced += 1;
    }
}

#[test]
fn generated_specifications_classify_as_expected() {
    // The reference theory and its variants keep their golden classes; a
    // randomly truncated prefix of the constants also classifies good.
    let spec = fixtures::sigma_pi();
    let mut gen = TypedGen::new(42);
    for n in 0..3 {
        let prefix: Vec<_> = spec.declarations()[..=n].to_vec();
        let truncated = Specification::new(prefix).unwrap();
        assert!(matches!(
            tf_kernel::goodness::classify_goodness(&truncated, FUEL),
            tf_kernel::goodness::GoodnessClass::Good { .. }
        ));
    }
    let _ = gen.rng().gen_range(0..2);
}

#[test]
fn defined_judgement_members_of_equal_kinds_derive() {
    // For a synthesised kind and a hand-converted variant, every member of
    // the kind-equality expansion is derivable.
    let mut gen = TypedGen::new(43);
    let spec = gen.spec.clone();
    let mut produced = 0;
    while produced < 30 {
        let ctx = gen.context();
        let c = gen.ty(&ctx, 1);
        let Some(expanded) = gen.beta_expand(&ctx, &c) else { continue };
        let dj = tf_kernel::judgement::DefinedJudgement {
            context: ctx.clone(),
            body: tf_kernel::judgement::DefinedBody::KindEq(
                Kind::el(c.clone()),
                Kind::el(expanded.clone()),
            ),
        };
        for member in tf_kernel::judgement::expand(&dj).unwrap() {
            match &member.judgement.body {
                JudgementBody::Valid => {
                    derive_context_valid(&spec, &member.judgement.context, FUEL)
                        .expect("validity member");
                }
                JudgementBody::Typing(m, t) => {
                    derive_typing(&spec, &member.judgement.context, m, t, FUEL)
                        .expect("typing member");
                }
                JudgementBody::Equal(m, n, t) => {
                    check_equal(&spec, &member.judgement.context, m, n, t, FUEL)
                        .unwrap()
                        .expect("equality member");
                }
            }
        }
        produced += 1;
    }
}

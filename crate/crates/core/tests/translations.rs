//! Properties of the translations: erasure against labelling, lifting into
//! the traditional framework against the normal-form readback, and the
//! simply-typed image.

use tf_kernel::check::check_derivation;
use tf_kernel::fixtures;
use tf_kernel::judgement::{expand, Base, DefinedBody, DefinedJudgement, Judgement, JudgementBody, Kind};
use tf_kernel::lf::{
    self, beta_eta_step, check_lf, lift_context, lift_judgement, lift_object,
    lift_specification, nf_object, nf_object_base, normalize_beta_eta, sn_probe,
    LfJudgement, LfJudgementBody, StepRule, Terminal,
};
use tf_kernel::stlc;
use tf_kernel::synth::{check_equal, derive_context_valid, derive_typing, synth_kind};
use tf_kernel::syntax::{Instantiate, Symbol, TfAbstraction};
use tf_kernel::tfk::{
    self, erase_derivation, erase_judgement, erase_object, label_context, label_judgement,
    label_object, label_specification, KindAnn,
};
use tf_testkit::gen::TypedGen;

const ROUNDS: usize = 80;
const FUEL: u64 = 64;

#[test]
fn erasure_inverts_labelling_exactly() {
    let mut gen = TypedGen::new(51);
    let spec = gen.spec.clone();
    let mut produced = 0;
    while produced < ROUNDS * 2 {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 3) else { continue };
        let labelled = label_object(&spec, &ctx, &t.term).expect("labelling defined");
        assert_eq!(erase_object(&labelled), t.term, "erasure must invert labelling");
        // Same for the judgement as a whole.
        let j = Judgement::typing(ctx.clone(), t.term.clone(), Base::El(t.carrier.clone()));
        let lj = label_judgement(&spec, &j).expect("judgement labelling defined");
        assert_eq!(erase_judgement(&lj), j);
        produced += 1;
    }
}

#[test]
fn labelling_is_context_irrelevant_on_shared_variables() {
    let mut gen = TypedGen::new(52);
    let spec = gen.spec.clone();
    let mut produced = 0;
    while produced < ROUNDS {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 2) else { continue };
        // Extend the context by an unused declaration: the labelling of the
        // term must not change.
        let extended = ctx
            .extended(Symbol::base_var(format!("Z{produced}")), Kind::ty())
            .unwrap();
        let l1 = label_object(&spec, &ctx, &t.term).unwrap();
        let l2 = label_object(&spec, &extended, &t.term).unwrap();
        assert_eq!(l1, l2);
        produced += 1;
    }
}

#[test]
fn labelling_commutes_with_instantiation() {
    // {L(F)/x} L(X) = L({F/x}X) whenever the left side is defined.
    let mut gen = TypedGen::new(53);
    let spec = gen.spec.clone();
    let mut produced = 0;
    let mut attempts = 0;
    while produced < ROUNDS / 2 && attempts < ROUNDS * 20 {
        attempts += 1;
        let ctx = gen.context();
        // x : El A a context element, F an inhabitant from the left part.
        let Some(idx) = (0..ctx.len()).rev().find(|&i| {
            let (_, k) = &ctx.entries()[i];
            k.is_base() && matches!(k.target(), Base::El(_))
        }) else {
            continue;
        };
        let gamma = ctx.prefix(idx);
        let (x, k) = ctx.entries()[idx].clone();
        let Base::El(carrier) = k.target().clone() else { continue };
        let Some(f_body) = gen.term_of(&gamma, &carrier, 2) else { continue };
        let f = TfAbstraction::constant(f_body);
        let Some(t) = gen.term(&ctx, 2) else { continue };
        if !t.term.free_vars().contains(&x) {
            continue;
        }
        // Left: instantiate the labelled term with the labelled abstraction.
        let labelled_term = label_object(&spec, &ctx, &t.term).unwrap();
        let labelled_f =
            tfk::label_abstraction(&spec, &gamma, &f, &k).expect("abstraction labelling");
        let left = labelled_term.instantiate(&labelled_f, &x).unwrap();
        // Right: instantiate first, then label under the contracted context.
        let contracted_term = t.term.instantiate(&f, &x).unwrap();
        // The context loses x; later entries keep their kinds instantiated.
        let mut contracted = gamma.clone();
        let mut ok = true;
        for (s, kk) in &ctx.entries()[idx + 1..] {
            match kk
                .instantiate(&f, &x)
                .and_then(|k2| contracted.extended(s.clone(), k2))
            {
                Ok(c) => contracted = c,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let right = label_object(&spec, &contracted, &contracted_term).unwrap();
        assert_eq!(left, right, "labelling does not commute with instantiation");
        produced += 1;
    }
    assert!(produced >= 10, "too few commutation cases: {produced}");
}

#[test]
fn labelled_judgements_rederive_in_the_church_typed_framework() {
    let mut gen = TypedGen::new(54);
    let spec = gen.spec.clone();
    let labelled_spec = label_specification(&spec).unwrap();
    let mut produced = 0;
    while produced < ROUNDS {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 3) else { continue };
        let kctx = label_context(&spec, &ctx).unwrap();
        let kterm = label_object(&spec, &ctx, &t.term).unwrap();
        let kcarrier = label_object(&spec, &ctx, &t.carrier).unwrap();
        let (kind, d) = synth_kind(&labelled_spec, &kctx, &kterm, FUEL)
            .expect("labelled judgement re-synthesises");
        assert_eq!(kind, Base::El(kcarrier));
        check_derivation(&labelled_spec, &d).expect("labelled derivation checks");
        // Erasure soundness: the erased derivation checks in the
        // Curry-typed framework.
        let erased = erase_derivation(&spec, &d).expect("erasure defined");
        check_derivation(&spec, &erased).expect("erased derivation checks");
        produced += 1;
    }
}

#[test]
fn roundtrip_through_the_traditional_framework_is_exact() {
    // M = NF(lift(L(M))) on the nose for typable terms.
    let mut gen = TypedGen::new(55);
    let spec = gen.spec.clone();
    let lf_spec = lift_specification(&label_specification(&spec).unwrap());
    let mut produced = 0;
    while produced < ROUNDS * 2 {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 3) else { continue };
        let labelled_ctx = label_context(&spec, &ctx).unwrap();
        let labelled = label_object(&spec, &ctx, &t.term).unwrap();
        let lifted_ctx = lift_context(&labelled_ctx);
        let lifted = lift_object(&labelled);
        let back = nf_object_base(&lf_spec, &lifted_ctx, &lifted)
            .expect("readback defined on lifted terms");
        assert_eq!(back, t.term, "lift/readback roundtrip is not exact");
        produced += 1;
    }
}

#[test]
fn church_typed_roundtrip_up_to_equality() {
    // For labelled terms, including ones with perturbed labels:
    // ctx |- M = L(|M|) : T is derivable in the Church-typed framework.
    let mut gen = TypedGen::new(56);
    let spec = gen.spec.clone();
    let labelled_spec = label_specification(&spec).unwrap();
    let mut produced = 0;
    let mut perturbed_count = 0;
    while produced < ROUNDS {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 3) else { continue };
        let kctx = label_context(&spec, &ctx).unwrap();
        let canonical = label_object(&spec, &ctx, &t.term).unwrap();
        let subject = match gen.perturb_label(&ctx, &canonical) {
            Some(p) => {
                perturbed_count += 1;
                p
            }
            None => canonical.clone(),
        };
        let erased = erase_object(&subject);
        let relabelled = label_object(&spec, &ctx, &erased).unwrap();
        let kcarrier = label_object(&spec, &ctx, &t.carrier).unwrap();
        let d = check_equal(
            &labelled_spec,
            &kctx,
            &subject,
            &relabelled,
            &Base::El(kcarrier),
            FUEL,
        )
        .expect("no internal error")
        .expect("roundtrip equality is derivable");
        check_derivation(&labelled_spec, &d).expect("roundtrip derivation checks");
        produced += 1;
    }
    assert!(perturbed_count >= 5, "too few perturbed-label cases: {perturbed_count}");
}

#[test]
fn lifting_simulates_instantiation_by_reduction() {
    // [lift(F)/x] lift(N) reduces to lift({F/x}N).
    let mut gen = TypedGen::new(57);
    let spec = gen.spec.clone();
    let mut produced = 0;
    let mut attempts = 0;
    while produced < ROUNDS / 2 && attempts < ROUNDS * 20 {
        attempts += 1;
        let ctx = gen.context();
        let Some(idx) = (0..ctx.len()).rev().find(|&i| {
            let (_, k) = &ctx.entries()[i];
            k.is_base() && matches!(k.target(), Base::El(_))
        }) else {
            continue;
        };
        let gamma = ctx.prefix(idx);
        let (x, k) = ctx.entries()[idx].clone();
        let Base::El(carrier) = k.target().clone() else { continue };
        let Some(f_body) = gen.term_of(&gamma, &carrier, 2) else { continue };
        let f = TfAbstraction::constant(f_body);
        let Some(t) = gen.term(&ctx, 2) else { continue };
        let labelled_n = label_object(&spec, &ctx, &t.term).unwrap();
        let labelled_f = tfk::label_abstraction(&spec, &gamma, &f, &k).unwrap();
        let lifted_subst = lf::subst_object(
            &lift_object(&labelled_n),
            &x.name,
            &lf::lift_abstraction(&labelled_f),
        );
        let instantiated = t.term.instantiate(&f, &x).unwrap();
        // The instantiated term labels under the contracted context.
        let mut contracted = gamma.clone();
        let mut ok = true;
        for (s, kk) in &ctx.entries()[idx + 1..] {
            match kk
                .instantiate(&f, &x)
                .and_then(|k2| contracted.extended(s.clone(), k2))
            {
                Ok(c) => contracted = c,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let lifted_inst = lift_object(&label_object(&spec, &contracted, &instantiated).unwrap());
        let left = normalize_beta_eta(&lifted_subst, 512).expect("normalises");
        let right = normalize_beta_eta(&lifted_inst, 512).expect("normalises");
        assert_eq!(left, right, "lifting does not simulate instantiation");
        produced += 1;
    }
    assert!(produced >= 10, "too few simulation cases: {produced}");
}

#[test]
fn lifted_judgements_check_in_the_traditional_framework() {
    let mut gen = TypedGen::new(58);
    let spec = gen.spec.clone();
    let labelled_spec = label_specification(&spec).unwrap();
    let lf_spec = lift_specification(&labelled_spec);
    let mut produced = 0;
    while produced < ROUNDS {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 3) else { continue };
        let j = Judgement::typing(ctx.clone(), t.term.clone(), Base::El(t.carrier.clone()));
        let kj = label_judgement(&spec, &j).unwrap();
        let lj = lift_judgement(&kj);
        check_lf(&lf_spec, &lj, 256).expect("lifted judgement checks");
        produced += 1;
    }
}

#[test]
fn readback_of_checked_judgements_rederives() {
    // Readback soundness on redex-wrapped lifted terms: NF(J) members are
    // derivable in the lambda-free framework.
    let mut gen = TypedGen::new(59);
    let spec = gen.spec.clone();
    let labelled_spec = label_specification(&spec).unwrap();
    let lf_spec = lift_specification(&labelled_spec);
    let mut produced = 0;
    while produced < ROUNDS / 2 {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 2) else { continue };
        let kctx = label_context(&spec, &ctx).unwrap();
        let kterm = label_object(&spec, &ctx, &t.term).unwrap();
        let lifted_ctx = lift_context(&kctx);
        let mut lifted = lift_object(&kterm);
        if let Some(w) = gen.lf_beta_wrap(&lf_spec, &lifted_ctx, &lifted) {
            lifted = w;
        }
        let kind = {
            let mut budget = lf::Budget::new(256);
            lf::infer(&lf_spec, &lifted_ctx, &lifted, &mut budget).expect("typable")
        };
        let lj = LfJudgement {
            context: lifted_ctx.clone(),
            body: LfJudgementBody::Typing(lifted.clone(), kind.clone()),
        };
        check_lf(&lf_spec, &lj, 256).expect("wrapped judgement checks");
        // Read the judgement back and derive every member.
        match lf::nf_judgement(&lf_spec, &lj).expect("readback defined") {
            lf::NfJudgement::Primitive(j) => {
                derive_context_valid(&spec, &j.context, FUEL).expect("valid");
            }
            lf::NfJudgement::Defined(dj) => {
                for member in expand(&dj).expect("expansion defined") {
                    match &member.judgement.body {
                        JudgementBody::Valid => {
                            derive_context_valid(&spec, &member.judgement.context, FUEL)
                                .expect("member valid");
                        }
                        JudgementBody::Typing(m, t) => {
                            derive_typing(&spec, &member.judgement.context, m, t, FUEL)
                                .expect("member typing");
                        }
                        JudgementBody::Equal(m, n, t) => {
                            check_equal(&spec, &member.judgement.context, m, n, t, FUEL)
                                .unwrap()
                                .expect("member equality");
                        }
                    }
                }
            }
        }
        produced += 1;
    }
}

#[test]
fn readback_is_stable_under_weakening_and_substitution() {
    let mut gen = TypedGen::new(60);
    let spec = gen.spec.clone();
    let labelled_spec = label_specification(&spec).unwrap();
    let lf_spec = lift_specification(&labelled_spec);
    let mut produced = 0;
    while produced < ROUNDS {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 2) else { continue };
        let kctx = label_context(&spec, &ctx).unwrap();
        let lifted_ctx = lift_context(&kctx);
        let lifted = lift_object(&label_object(&spec, &ctx, &t.term).unwrap());
        let nf1 = nf_object(&lf_spec, &lifted_ctx, &lifted).unwrap();
        // Weakening stability: an extended context reads back identically.
        let mut extended = lifted_ctx.clone();
        extended.push((format!("fresh{produced}"), lf::LfKind::Type));
        let nf2 = nf_object(&lf_spec, &extended, &lifted).unwrap();
        assert_eq!(nf1, nf2);
        produced += 1;
    }
}

#[test]
fn readback_commutes_with_substitution() {
    // NF([k/x]X) = {NF(k)/x} NF(X) for an element variable x.
    let mut gen = TypedGen::new(61);
    let spec = gen.spec.clone();
    let labelled_spec = label_specification(&spec).unwrap();
    let lf_spec = lift_specification(&labelled_spec);
    let mut produced = 0;
    let mut attempts = 0;
    while produced < ROUNDS / 2 && attempts < ROUNDS * 20 {
        attempts += 1;
        let ctx = gen.context();
        let Some(idx) = (0..ctx.len()).rev().find(|&i| {
            let (_, k) = &ctx.entries()[i];
            k.is_base() && matches!(k.target(), Base::El(_))
        }) else {
            continue;
        };
        let gamma = ctx.prefix(idx);
        let (x, k) = ctx.entries()[idx].clone();
        let Base::El(carrier) = k.target().clone() else { continue };
        let Some(v_body) = gen.term_of(&gamma, &carrier, 2) else { continue };
        let Some(t) = gen.term(&ctx, 2) else { continue };
        if !t.term.free_vars().contains(&x) {
            continue;
        }
        let kctx = label_context(&spec, &ctx).unwrap();
        let k_gamma = label_context(&spec, &gamma).unwrap();
        let lf_ctx = lift_context(&kctx);
        let lf_gamma = lift_context(&k_gamma);
        let lifted_x = lift_object(&label_object(&spec, &ctx, &t.term).unwrap());
        let lifted_v = lift_object(&label_object(&spec, &gamma, &v_body).unwrap());
        // Left: substitute in the framework, then read back.
        let substituted = lf::subst_object(&lifted_x, &x.name, &lifted_v);
        let mut sub_ctx = lf_gamma.clone();
        for (n, kk) in &lf_ctx[idx + 1..] {
            sub_ctx.push((n.clone(), lf::subst_kind(kk, &x.name, &lifted_v)));
        }
        let left = nf_object(&lf_spec, &sub_ctx, &substituted);
        let Ok(left) = left else { continue };
        // Right: read back, then instantiate.
        let nf_x = nf_object(&lf_spec, &lf_ctx, &lifted_x).unwrap();
        let nf_v = nf_object(&lf_spec, &lf_gamma, &lifted_v).unwrap();
        let right = nf_x.instantiate(&nf_v, &x).unwrap();
        assert_eq!(left, right, "readback does not commute with substitution");
        produced += 1;
    }
    assert!(produced >= 10, "too few substitution cases: {produced}");
}

#[test]
fn traditional_framework_roundtrip_up_to_conversion() {
    // k = lift(L(NF(k))) : K holds by conversion for redex-wrapped terms.
    let mut gen = TypedGen::new(62);
    let spec = gen.spec.clone();
    let labelled_spec = label_specification(&spec).unwrap();
    let lf_spec = lift_specification(&labelled_spec);
    let mut produced = 0;
    while produced < ROUNDS / 2 {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 2) else { continue };
        let kctx = label_context(&spec, &ctx).unwrap();
        let lifted_ctx = lift_context(&kctx);
        let mut lifted = lift_object(&label_object(&spec, &ctx, &t.term).unwrap());
        if produced % 2 == 0 {
            if let Some(w) = gen.lf_beta_wrap(&lf_spec, &lifted_ctx, &lifted) {
                lifted = w;
            }
        } else if let Some(w) = gen.lf_eta_wrap(&lifted) {
            lifted = w;
        }
        let kind = {
            let mut budget = lf::Budget::new(512);
            lf::infer(&lf_spec, &lifted_ctx, &lifted, &mut budget).expect("typable")
        };
        // Read back (through the erased context), relabel, and lift again.
        let nf = nf_object_base(&lf_spec, &lifted_ctx, &lifted).expect("readback");
        let erased_ctx = lf::nf_context(&lf_spec, &lifted_ctx).expect("context readback");
        let relabelled = label_object(&spec, &erased_ctx, &nf).expect("relabel");
        let relifted = lift_object(&relabelled);
        let j = LfJudgement {
            context: lifted_ctx,
            body: LfJudgementBody::ObjEq(lifted, relifted, kind),
        };
        check_lf(&lf_spec, &j, 512).expect("roundtrip conversion holds");
        produced += 1;
    }
}

#[test]
fn image_kinds_are_stable_under_kind_equality() {
    // Convertible kinds have identical simple-type images.
    let mut gen = TypedGen::new(63);
    let spec = gen.spec.clone();
    let labelled_spec = label_specification(&spec).unwrap();
    let lf_spec = lift_specification(&labelled_spec);
    let mut produced = 0;
    while produced < ROUNDS / 2 {
        let ctx = gen.context();
        let c = gen.ty(&ctx, 2);
        let Some(expanded) = gen.beta_expand(&ctx, &c) else { continue };
        let k1 = Kind::el(c);
        let k2 = Kind::el(expanded);
        let lk1 = lf::lift_kind(&tfk::label_kind(&spec, &ctx, &k1).unwrap());
        let lk2 = lf::lift_kind(&tfk::label_kind(&spec, &ctx, &k2).unwrap());
        let kctx = lift_context(&label_context(&spec, &ctx).unwrap());
        let j = LfJudgement {
            context: kctx,
            body: LfJudgementBody::KindEq(lk1.clone(), lk2.clone()),
        };
        check_lf(&lf_spec, &j, 256).expect("kinds convert");
        assert_eq!(stlc::type_of_kind(&lk1), stlc::type_of_kind(&lk2));
        produced += 1;
    }
}

#[test]
fn image_simulates_reduction_and_substitution() {
    let mut gen = TypedGen::new(64);
    let spec = gen.spec.clone();
    let labelled_spec = label_specification(&spec).unwrap();
    let lf_spec = lift_specification(&labelled_spec);
    let mut produced = 0;
    while produced < ROUNDS / 2 {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 2) else { continue };
        let kctx = label_context(&spec, &ctx).unwrap();
        let lifted_ctx = lift_context(&kctx);
        let mut lifted = lift_object(&label_object(&spec, &ctx, &t.term).unwrap());
        if let Some(w) = gen.lf_beta_wrap(&lf_spec, &lifted_ctx, &lifted) {
            lifted = w;
        }
        // Typability of the image, under the boxed context and constants.
        let mut stlc_ctx = stlc::context_of(&lifted_ctx);
        for d in lf_spec.declarations() {
            if let lf::LfDeclaration::Constant { name, kind } = d {
                stlc_ctx.push((name.clone(), stlc::type_of_kind(kind)));
            }
        }
        stlc::type_check(&stlc_ctx, &stlc::term_of_object(&lifted))
            .expect("image is simply typable");
        // One framework step maps to one image step.
        for (next, rule, _) in beta_eta_step(&lifted) {
            if !matches!(rule, StepRule::Beta | StepRule::Eta) {
                continue;
            }
            let image_before = stlc::term_of_object(&lifted);
            let image_after = stlc::term_of_object(&next);
            let steps = stlc::beta_eta_steps(&image_before);
            assert!(
                steps.iter().any(|s| s == &image_after),
                "image does not simulate a framework step"
            );
        }
        produced += 1;
    }
}

#[test]
fn probes_terminate_and_track_the_readback() {
    let mut gen = TypedGen::new(65);
    let spec = gen.spec.clone();
    let labelled_spec = label_specification(&spec).unwrap();
    let lf_spec = lift_specification(&labelled_spec);
    let mut produced = 0;
    while produced < ROUNDS / 2 {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 2) else { continue };
        let kctx = label_context(&spec, &ctx).unwrap();
        let lifted_ctx = lift_context(&kctx);
        let mut lifted = lift_object(&label_object(&spec, &ctx, &t.term).unwrap());
        if produced % 2 == 0 {
            if let Some(w) = gen.lf_beta_wrap(&lf_spec, &lifted_ctx, &lifted) {
                lifted = w;
            }
        }
        let probe = sn_probe(&lf_spec, &lifted_ctx, &lifted, 256).expect("probe runs");
        assert_eq!(probe.trace.terminal, Terminal::Normal, "fuel exhausted");
        assert!(probe.nf_invariant_on_beta_eta);
        assert!(probe.nf_changed_on_rules);
        produced += 1;
    }
}

#[test]
fn readback_of_the_reference_specifications() {
    let spec = fixtures::sigma_pi();
    let lf_spec = lift_specification(&label_specification(&spec).unwrap());
    assert_eq!(lf::nf_specification(&lf_spec).unwrap(), spec);
    let combi = fixtures::combinators();
    let lf_combi = lift_specification(&label_specification(&combi).unwrap());
    assert_eq!(lf::nf_specification(&lf_combi).unwrap(), combi);
}

#[test]
fn defined_judgement_expansion_of_readback_equalities() {
    // NF of an object equality is the abstraction-equality defined form; its
    // expansion members must be derivable for checked inputs.
    let mut gen = TypedGen::new(66);
    let spec = gen.spec.clone();
    let labelled_spec = label_specification(&spec).unwrap();
    let lf_spec = lift_specification(&labelled_spec);
    let mut produced = 0;
    while produced < 20 {
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 2) else { continue };
        let kctx = label_context(&spec, &ctx).unwrap();
        let lifted_ctx = lift_context(&kctx);
        let lifted = lift_object(&label_object(&spec, &ctx, &t.term).unwrap());
        let Some(wrapped) = gen.lf_beta_wrap(&lf_spec, &lifted_ctx, &lifted) else {
            continue;
        };
        let kind = {
            let mut budget = lf::Budget::new(256);
            lf::infer(&lf_spec, &lifted_ctx, &lifted, &mut budget).unwrap()
        };
        let dj = DefinedJudgement {
            context: lf::nf_context(&lf_spec, &lifted_ctx).unwrap(),
            body: DefinedBody::AbsEq(
                nf_object(&lf_spec, &lifted_ctx, &wrapped).unwrap(),
                nf_object(&lf_spec, &lifted_ctx, &lifted).unwrap(),
                lf::nf_kind(&lf_spec, &lifted_ctx, &kind).unwrap(),
            ),
        };
        for member in expand(&dj).unwrap() {
            match &member.judgement.body {
                JudgementBody::Valid => {
                    derive_context_valid(&spec, &member.judgement.context, FUEL)
                        .expect("valid member");
                }
                JudgementBody::Typing(m, tt) => {
                    derive_typing(&spec, &member.judgement.context, m, tt, FUEL)
                        .expect("typing member");
                }
                JudgementBody::Equal(m, n, tt) => {
                    check_equal(&spec, &member.judgement.context, m, n, tt, FUEL)
                        .unwrap()
                        .expect("equality member");
                }
            }
        }
        produced += 1;
    }
}

#[test]
fn labels_can_differ_and_still_erase_to_the_same_term() {
    // The counterexample shape for exact right-invertibility of erasure.
    let mut gen = TypedGen::new(67);
    let spec = gen.spec.clone();
    let mut produced = 0;
    let mut attempts = 0;
    while produced < 10 && attempts < 4000 {
        attempts += 1;
        let ctx = gen.context();
        let Some(t) = gen.term(&ctx, 3) else { continue };
        let canonical = label_object(&spec, &ctx, &t.term).unwrap();
        let Some(perturbed) = gen.perturb_label(&ctx, &canonical) else { continue };
        assert_ne!(canonical, perturbed);
        assert_eq!(erase_object(&canonical), erase_object(&perturbed));
        // Relabelling the erased term restores the canonical labels.
        assert_eq!(
            label_object(&spec, &ctx, &erase_object(&perturbed)).unwrap(),
            canonical
        );
        produced += 1;
    }
    assert!(produced >= 5, "too few label perturbations: {produced}");
}

#[test]
fn kinded_eta_long_forms_are_labellings_of_plain_ones() {
    let spec = fixtures::sigma_pi();
    let labelled = label_specification(&spec).unwrap();
    for d in labelled.declarations() {
        if let tf_kernel::spec::Declaration::Constant { symbol, kind } = d {
            let e = tfk::eta_long_at(symbol, kind).unwrap();
            assert_eq!(
                tfk::erase_abstraction(&e),
                tf_kernel::syntax::eta_long(symbol)
            );
            let _: &KindAnn = &e.binders().first().map(|(_, a)| a.clone()).unwrap_or(KindAnn(Kind::ty()));
        }
    }
}

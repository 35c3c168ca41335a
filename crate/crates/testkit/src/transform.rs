//! Mechanical derivation transformers used by the metatheory suites.

use tf_kernel::check::Derivation;
use tf_kernel::judgement::{Context, Judgement, JudgementBody};
use tf_kernel::syntax::Ann;

/// Mechanically weaken a derivation of `gamma, tail |- J` to one over
/// `delta, tail`, where `gamma` is a prefix of `delta`.  Sub-derivations that
/// conclude `gamma valid` are replaced wholesale by the supplied derivation
/// of `delta valid`; every other conclusion has its context prefix rewritten.
pub fn weaken_derivation<A: Ann>(
    d: &Derivation<A>,
    gamma: &Context<A>,
    delta: &Context<A>,
    delta_valid: &Derivation<A>,
) -> Derivation<A> {
    // Replace the exact `gamma valid` conclusion.
    if matches!(d.conclusion.body, JudgementBody::Valid) && &d.conclusion.context == gamma {
        return delta_valid.clone();
    }
    let context = if gamma.is_prefix_of(&d.conclusion.context) {
        let mut out = delta.clone();
        for (s, k) in &d.conclusion.context.entries()[gamma.len()..] {
            out = out
                .extended(s.clone(), k.clone())
                .expect("weakening target context is fresh");
        }
        out
    } else {
        // Conclusions over proper prefixes of gamma only occur inside the
        // validity sub-derivations replaced above.
        d.conclusion.context.clone()
    };
    let conclusion = Judgement { context, body: d.conclusion.body.clone() };
    Derivation {
        rule: d.rule,
        premises: d
            .premises
            .iter()
            .map(|p| weaken_derivation(p, gamma, delta, delta_valid))
            .collect(),
        conclusion,
        instance: d.instance.clone(),
    }
}

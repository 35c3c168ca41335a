//! An independent lambda-calculus reference for the lambda-free operations.
//!
//! Terms are encoded into a de Bruijn lambda calculus, reduced with ordinary
//! normal-order beta reduction, then read back as eta-long lambda-free terms
//! guided by arities.  None of the kernel's instantiation machinery is used
//! on this path, so agreement between the two is meaningful evidence.

use std::collections::BTreeSet;

use tf_kernel::arity::Arity;
use tf_kernel::syntax::{Abstraction, Instantiate, Object, Symbol, TfAbstraction, TfObject};

/// De Bruijn lambda terms over free lambda-free symbols.  Binders remember
/// the arity they stand for, which guides the eta-long readback.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LTerm {
    Bound(usize),
    Free(Symbol),
    Lam(Arity, Box<LTerm>),
    App(Box<LTerm>, Box<LTerm>),
}

fn shift(t: &LTerm, d: usize, cutoff: usize) -> LTerm {
    match t {
        LTerm::Bound(i) => {
            if *i >= cutoff {
                LTerm::Bound(i + d)
            } else {
                t.clone()
            }
        }
        LTerm::Free(_) => t.clone(),
        LTerm::Lam(a, b) => LTerm::Lam(a.clone(), Box::new(shift(b, d, cutoff + 1))),
        LTerm::App(f, a) => {
            LTerm::App(Box::new(shift(f, d, cutoff)), Box::new(shift(a, d, cutoff)))
        }
    }
}

fn subst(t: &LTerm, j: usize, v: &LTerm) -> LTerm {
    match t {
        LTerm::Bound(i) => {
            if *i == j {
                v.clone()
            } else if *i > j {
                LTerm::Bound(i - 1)
            } else {
                t.clone()
            }
        }
        LTerm::Free(_) => t.clone(),
        LTerm::Lam(a, b) => LTerm::Lam(
            a.clone(),
            Box::new(subst(b, j + 1, &shift(v, 1, 0))),
        ),
        LTerm::App(f, a) => {
            LTerm::App(Box::new(subst(f, j, v)), Box::new(subst(a, j, v)))
        }
    }
}

fn beta_once(t: &LTerm) -> Option<LTerm> {
    match t {
        LTerm::App(f, a) => {
            if let LTerm::Lam(_, b) = &**f {
                return Some(subst(b, 0, a));
            }
            if let Some(f2) = beta_once(f) {
                return Some(LTerm::App(Box::new(f2), a.clone()));
            }
            beta_once(a).map(|a2| LTerm::App(f.clone(), Box::new(a2)))
        }
        LTerm::Lam(ar, b) => beta_once(b).map(|b2| LTerm::Lam(ar.clone(), Box::new(b2))),
        _ => None,
    }
}

/// Normal-order beta normalisation.  Panics on fuel exhaustion: encoded
/// well-aritied terms are simply typed, so this should never fire.
pub fn normalize(t: &LTerm) -> LTerm {
    let mut current = t.clone();
    for _ in 0..200_000 {
        match beta_once(&current) {
            Some(next) => current = next,
            None => return current,
        }
    }
    panic!("oracle normalisation did not terminate");
}

/// Encode an object, with `env` mapping enclosing binders (innermost last).
pub fn encode_object(o: &TfObject, env: &mut Vec<Symbol>) -> LTerm {
    let head = match env.iter().rposition(|s| s == o.head()) {
        Some(i) => LTerm::Bound(env.len() - 1 - i),
        None => LTerm::Free(o.head().clone()),
    };
    o.args().iter().fold(head, |acc, arg| {
        LTerm::App(Box::new(acc), Box::new(encode_abstraction(arg, env)))
    })
}

pub fn encode_abstraction(f: &TfAbstraction, env: &mut Vec<Symbol>) -> LTerm {
    for (s, ()) in f.binders() {
        env.push(s.clone());
    }
    let mut body = encode_object(f.body(), env);
    for (s, ()) in f.binders().iter().rev() {
        env.pop();
        body = LTerm::Lam(s.arity.clone(), Box::new(body));
    }
    body
}

fn free_symbol_names(t: &LTerm, acc: &mut BTreeSet<String>) {
    match t {
        LTerm::Bound(_) => {}
        LTerm::Free(s) => {
            acc.insert(s.name.clone());
        }
        LTerm::Lam(_, b) => free_symbol_names(b, acc),
        LTerm::App(f, a) => {
            free_symbol_names(f, acc);
            free_symbol_names(a, acc);
        }
    }
}

/// Read a normal term back as an eta-long abstraction of the given arity.
pub fn readback(t: &LTerm, arity: &Arity) -> TfAbstraction {
    let mut avoid = BTreeSet::new();
    free_symbol_names(t, &mut avoid);
    let mut supply = 0u32;
    readback_in(t, arity, &mut Vec::new(), &mut supply, &avoid)
}

fn fresh_symbol(
    arity: Arity,
    supply: &mut u32,
    avoid: &BTreeSet<String>,
) -> Symbol {
    loop {
        *supply += 1;
        let name = format!("v{supply}");
        if !avoid.contains(&name) {
            return Symbol::var(name, arity);
        }
    }
}

fn readback_in(
    t: &LTerm,
    arity: &Arity,
    env: &mut Vec<Symbol>,
    supply: &mut u32,
    avoid: &BTreeSet<String>,
) -> TfAbstraction {
    let n = arity.len();
    let binders: Vec<Symbol> = arity
        .children()
        .iter()
        .map(|a| fresh_symbol(a.clone(), supply, avoid))
        .collect();
    // Apply the (shifted) term to the new variables and renormalise.
    let mut body = shift(t, n, 0);
    for i in 0..n {
        body = LTerm::App(Box::new(body), Box::new(LTerm::Bound(n - 1 - i)));
    }
    let body = normalize(&body);
    for b in &binders {
        env.push(b.clone());
    }
    let object = readback_spine(&body, env, supply, avoid);
    for _ in 0..n {
        env.pop();
    }
    Abstraction::new(binders.into_iter().map(|b| (b, ())).collect(), object)
        .expect("readback binders are fresh")
}

fn readback_spine(
    t: &LTerm,
    env: &mut Vec<Symbol>,
    supply: &mut u32,
    avoid: &BTreeSet<String>,
) -> TfObject {
    // Decompose the application spine.
    let mut head = t;
    let mut args: Vec<&LTerm> = Vec::new();
    while let LTerm::App(f, a) = head {
        args.push(a);
        head = f;
    }
    args.reverse();
    let head_sym = match head {
        LTerm::Bound(i) => env[env.len() - 1 - i].clone(),
        LTerm::Free(s) => s.clone(),
        LTerm::Lam(..) => panic!("readback of a non-normal term"),
        LTerm::App(..) => unreachable!(),
    };
    let expected = head_sym.arity.children().to_vec();
    assert_eq!(
        expected.len(),
        args.len(),
        "readback spine does not saturate {head_sym:?}"
    );
    let arg_abs: Vec<TfAbstraction> = args
        .iter()
        .zip(&expected)
        .map(|(a, ar)| readback_in(a, ar, env, supply, avoid))
        .collect();
    Object::new(head_sym, arg_abs).expect("readback arities agree")
}

/// Reference instantiation: substitute in the lambda calculus, normalise,
/// read back at base arity.
pub fn instantiate_object(f: &TfAbstraction, x: &Symbol, n: &TfObject) -> TfObject {
    let enc_n = encode_object(n, &mut vec![x.clone()]);
    let lam = LTerm::Lam(x.arity.clone(), Box::new(enc_n));
    let enc_f = encode_abstraction(f, &mut Vec::new());
    let out = normalize(&LTerm::App(Box::new(lam), Box::new(enc_f)));
    readback(&out, &Arity::base())
        .as_object()
        .cloned()
        .expect("object readback has base arity")
}

/// Reference instantiation into an abstraction.
pub fn instantiate_abstraction(
    f: &TfAbstraction,
    x: &Symbol,
    g: &TfAbstraction,
) -> TfAbstraction {
    let enc_g = encode_abstraction(g, &mut vec![x.clone()]);
    // x is the innermost free binder of the encoding environment.
    let lam = LTerm::Lam(x.arity.clone(), Box::new(enc_g));
    let enc_f = encode_abstraction(f, &mut Vec::new());
    let out = normalize(&LTerm::App(Box::new(lam), Box::new(enc_f)));
    readback(&out, &g.arity())
}

/// Reference employment: apply and normalise.
pub fn employ_abstraction(f: &TfAbstraction, g: &TfAbstraction) -> TfAbstraction {
    let enc_f = encode_abstraction(f, &mut Vec::new());
    let enc_g = encode_abstraction(g, &mut Vec::new());
    let out = normalize(&LTerm::App(Box::new(enc_f), Box::new(enc_g)));
    let f_arity = f.arity();
    let result_arity = Arity::new(f_arity.children()[1..].to_vec());
    readback(&out, &result_arity)
}

/// Reference simultaneous instantiation.
pub fn instantiate_seq_object(
    fs: &[TfAbstraction],
    vars: &[Symbol],
    n: &TfObject,
) -> TfObject {
    let mut env: Vec<Symbol> = vars.to_vec();
    let enc_n = encode_object(n, &mut env);
    let mut lam = enc_n;
    for x in vars.iter().rev() {
        lam = LTerm::Lam(x.arity.clone(), Box::new(lam));
    }
    let mut out = lam;
    for f in fs {
        out = LTerm::App(Box::new(out), Box::new(encode_abstraction(f, &mut Vec::new())));
    }
    readback(&normalize(&out), &Arity::base())
        .as_object()
        .cloned()
        .expect("object readback has base arity")
}

/// Reference eta-long form: read the bare symbol back at its arity.
pub fn eta_long(z: &Symbol) -> TfAbstraction {
    readback(&LTerm::Free(z.clone()), &z.arity)
}

/// Free variables via the encoding: the free symbols of the normal form that
/// are variables.
pub fn free_vars(o: &TfObject) -> BTreeSet<Symbol> {
    let enc = encode_object(o, &mut Vec::new());
    let norm = normalize(&enc);
    let mut names = BTreeSet::new();
    collect_free(&norm, &mut names);
    names.into_iter().filter(|s| s.is_variable()).collect()
}

fn collect_free(t: &LTerm, acc: &mut BTreeSet<Symbol>) {
    match t {
        LTerm::Bound(_) => {}
        LTerm::Free(s) => {
            acc.insert(s.clone());
        }
        LTerm::Lam(_, b) => collect_free(b, acc),
        LTerm::App(f, a) => {
            collect_free(f, acc);
            collect_free(a, acc);
        }
    }
}

/// Alpha equivalence via the encoding: structural equality of de Bruijn
/// encodings.
pub fn alpha_eq_abstraction(a: &TfAbstraction, b: &TfAbstraction) -> bool {
    encode_abstraction(a, &mut Vec::new()) == encode_abstraction(b, &mut Vec::new())
}

pub fn alpha_eq_object(a: &TfObject, b: &TfObject) -> bool {
    encode_object(a, &mut Vec::new()) == encode_object(b, &mut Vec::new())
}

/// Check that the kernel and the oracle agree on an instantiation.
pub fn agrees_on_instantiation(f: &TfAbstraction, x: &Symbol, n: &TfObject) -> bool {
    let kernel = n.instantiate(f, x).expect("kernel instantiation");
    let reference = instantiate_object(f, x, n);
    kernel == reference
}

//! Reference specifications used throughout the tests and shipped as surface
//! fixtures by the command-line tool.

use crate::arity::Arity;
use crate::judgement::{Base, Context, Kind};
use crate::spec::{Declaration, Specification};
use crate::syntax::{Object, Symbol, TfAbstraction, TfObject};

type TfKind = Kind<()>;
type TfBase = Base<()>;

fn unary() -> Arity {
    Arity::first_order(1)
}

fn leaf(s: &Symbol) -> TfObject {
    Object::leaf(s.clone()).expect("base symbol")
}

fn carg(body: TfObject) -> TfAbstraction {
    TfAbstraction::constant(body)
}

fn abs1(binder: &Symbol, body: TfObject) -> TfAbstraction {
    TfAbstraction::unann(vec![binder.clone()], body).expect("distinct binders")
}

/// The dependent-product reference theory:
///
/// ```text
/// const Pi  : (A : Type, B : (x : El A) Type) Type.
/// const lam : (A : Type, B : (x : El A) Type, f : (x : El A) El (B x)) El (Pi A ([x] B x)).
/// const app : (A : Type, B : (x : El A) Type, g : El (Pi A ([x] B x)), a : El A) El (B a).
/// eq (A : Type, B : (x : El A) Type, f : (x : El A) El (B x), a : El A)
///    (app A ([x] B x) (lam A ([x] B x) ([x] f x)) a = f a : El (B a)).
/// ```
pub fn sigma_pi() -> Specification<()> {
    let a_var = Symbol::base_var("A");
    let b_var = Symbol::var("B", unary());
    let f_var = Symbol::var("f", unary());
    let g_var = Symbol::base_var("g");
    let a_small = Symbol::base_var("a");
    let x = Symbol::base_var("x");

    let pi = Symbol::constant("Pi", Arity::new(vec![Arity::base(), unary()]));
    let lam = Symbol::constant("lam", Arity::new(vec![Arity::base(), unary(), unary()]));
    let app = Symbol::constant(
        "app",
        Arity::new(vec![Arity::base(), unary(), Arity::base(), Arity::base()]),
    );

    // (x : El A) Type
    let k_b = TfKind::new(
        vec![(x.clone(), TfKind::el(leaf(&a_var)))],
        TfBase::Type,
    )
    .unwrap();
    // (x : El A) El (B x)
    let k_f = TfKind::new(
        vec![(x.clone(), TfKind::el(leaf(&a_var)))],
        TfBase::El(Object::new(b_var.clone(), vec![carg(leaf(&x))]).unwrap()),
    )
    .unwrap();

    // Pi A ([x] B x)
    let pi_a_b = Object::new(
        pi.clone(),
        vec![
            carg(leaf(&a_var)),
            abs1(&x, Object::new(b_var.clone(), vec![carg(leaf(&x))]).unwrap()),
        ],
    )
    .unwrap();

    let k_pi = TfKind::new(
        vec![(a_var.clone(), TfKind::ty()), (b_var.clone(), k_b.clone())],
        TfBase::Type,
    )
    .unwrap();

    let k_lam = TfKind::new(
        vec![
            (a_var.clone(), TfKind::ty()),
            (b_var.clone(), k_b.clone()),
            (f_var.clone(), k_f.clone()),
        ],
        TfBase::El(pi_a_b.clone()),
    )
    .unwrap();

    // B a
    let b_a = Object::new(b_var.clone(), vec![carg(leaf(&a_small))]).unwrap();
    let k_app = TfKind::new(
        vec![
            (a_var.clone(), TfKind::ty()),
            (b_var.clone(), k_b.clone()),
            (g_var.clone(), TfKind::el(pi_a_b.clone())),
            (a_small.clone(), TfKind::el(leaf(&a_var))),
        ],
        TfBase::El(b_a.clone()),
    )
    .unwrap();

    // Equation telescope (A, B, f, a) and the beta rule.
    let telescope = Context::new(vec![
        (a_var.clone(), TfKind::ty()),
        (b_var.clone(), k_b),
        (f_var.clone(), k_f),
        (a_small.clone(), TfKind::el(leaf(&a_var))),
    ])
    .unwrap();

    // lam A ([x] B x) ([x] f x)
    let lam_term = Object::new(
        lam.clone(),
        vec![
            carg(leaf(&a_var)),
            abs1(&x, Object::new(b_var.clone(), vec![carg(leaf(&x))]).unwrap()),
            abs1(&x, Object::new(f_var.clone(), vec![carg(leaf(&x))]).unwrap()),
        ],
    )
    .unwrap();
    // app A ([x] B x) (lam ...) a
    let lhs = Object::new(
        app.clone(),
        vec![
            carg(leaf(&a_var)),
            abs1(&x, Object::new(b_var.clone(), vec![carg(leaf(&x))]).unwrap()),
            carg(lam_term),
            carg(leaf(&a_small)),
        ],
    )
    .unwrap();
    // f a
    let rhs = Object::new(f_var.clone(), vec![carg(leaf(&a_small))]).unwrap();

    Specification::new(vec![
        Declaration::Constant { symbol: pi, kind: k_pi },
        Declaration::Constant { symbol: lam, kind: k_lam },
        Declaration::Constant { symbol: app, kind: k_app },
        Declaration::Equation {
            telescope,
            lhs,
            rhs,
            target: TfBase::El(b_a),
        },
    ])
    .unwrap()
}

/// The dependent-product theory without its computation rule.
pub fn sigma_pi_constants_only() -> Specification<()> {
    let full = sigma_pi();
    let constants: Vec<Declaration<()>> = full
        .declarations()
        .iter()
        .filter(|d| !d.is_equation())
        .cloned()
        .collect();
    Specification::new(constants).unwrap()
}

/// The dependent-product theory plus a synthetic order-3 equation: the
/// telescope declares a second-order variable, so neither goodness theorem
/// applies.
pub fn sigma_pi_with_order3_equation() -> Specification<()> {
    let mut spec = sigma_pi();
    let a_var = Symbol::base_var("A");
    let h = Symbol::var("H", Arity::new(vec![unary()]));
    let x = Symbol::base_var("x");
    // H : (B : (x : El A) Type) Type
    let k_h = TfKind::new(
        vec![(
            Symbol::var("B", unary()),
            TfKind::new(vec![(x.clone(), TfKind::el(leaf(&a_var)))], TfBase::Type).unwrap(),
        )],
        TfBase::Type,
    )
    .unwrap();
    let telescope = Context::new(vec![
        (a_var.clone(), TfKind::ty()),
        (h.clone(), k_h),
    ])
    .unwrap();
    // H ([x] A) = H ([x] A) : Type
    let side = Object::new(h.clone(), vec![abs1(&x, leaf(&a_var))]).unwrap();
    spec.push(Declaration::Equation {
        telescope,
        lhs: side.clone(),
        rhs: side,
        target: TfBase::Type,
    })
    .unwrap();
    spec
}

/// A small-kind combinator theory:
///
/// ```text
/// const o    : Type.
/// const appc : (a : El o, b : El o) El o.
/// const kc   : El o.
/// eq (x : El o, y : El o) (appc (appc kc x) y = x : El o).
/// ```
///
/// Every variable has a small kind of order 0, so the theory sits inside the
/// order-restricted small-kind profile; dropping the equation puts it in the
/// equation-free one.
pub fn combinators() -> Specification<()> {
    let o = Symbol::constant("o", Arity::base());
    let appc = Symbol::constant("appc", Arity::first_order(2));
    let kc = Symbol::constant("kc", Arity::base());
    let a = Symbol::base_var("a");
    let b = Symbol::base_var("b");
    let x = Symbol::base_var("x");
    let y = Symbol::base_var("y");

    let el_o = || TfKind::el(leaf(&o));

    let k_appc = TfKind::new(
        vec![(a.clone(), el_o()), (b.clone(), el_o())],
        TfBase::El(leaf(&o)),
    )
    .unwrap();

    let telescope =
        Context::new(vec![(x.clone(), el_o()), (y.clone(), el_o())]).unwrap();
    // appc (appc kc x) y
    let inner = Object::new(appc.clone(), vec![carg(leaf(&kc)), carg(leaf(&x))]).unwrap();
    let lhs = Object::new(appc.clone(), vec![carg(inner), carg(leaf(&y))]).unwrap();

    Specification::new(vec![
        Declaration::Constant { symbol: o, kind: TfKind::ty() },
        Declaration::Constant { symbol: appc, kind: k_appc },
        Declaration::Constant { symbol: kc, kind: TfKind::el(leaf(&Symbol::constant("o", Arity::base()))) },
        Declaration::Equation {
            telescope,
            lhs,
            rhs: leaf(&x),
            target: TfBase::El(leaf(&Symbol::constant("o", Arity::base()))),
        },
    ])
    .unwrap()
}

/// The combinator theory without its equation.
pub fn combinators_constants_only() -> Specification<()> {
    let full = combinators();
    let constants: Vec<Declaration<()>> = full
        .declarations()
        .iter()
        .filter(|d| !d.is_equation())
        .cloned()
        .collect();
    Specification::new(constants).unwrap()
}

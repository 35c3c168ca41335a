//! Arities: finite trees that classify how many (and what shape of)
//! arguments a symbol takes.
//!
//! The base arity `0` classifies entities of the object theory; the arity
//! `(a1, ..., an)` classifies functions taking an `a1`-ary argument through
//! an `an`-ary argument.  Every recursion measure in the kernel bottoms out
//! on arities.

use std::fmt;

/// A finite arity tree.  The empty child list is the base arity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arity {
    children: Vec<Arity>,
}

impl Arity {
    /// The base arity `0`.
    pub fn base() -> Self {
        Arity { children: Vec::new() }
    }

    pub fn new(children: Vec<Arity>) -> Self {
        Arity { children }
    }

    /// The first-order arity with `n` base children.
    pub fn first_order(n: usize) -> Self {
        Arity { children: vec![Arity::base(); n] }
    }

    pub fn children(&self) -> &[Arity] {
        &self.children
    }

    pub fn is_base(&self) -> bool {
        self.children.is_empty()
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    /// Concatenation: the children of `self` followed by the children of `other`.
    pub fn concat(&self, other: &Arity) -> Arity {
        let mut children = self.children.clone();
        children.extend(other.children.iter().cloned());
        Arity { children }
    }

    /// The order: 0 for the base arity, otherwise one more than the highest
    /// order among the children.
    pub fn order(&self) -> usize {
        match self.children.iter().map(Arity::order).max() {
            None => 0,
            Some(k) => k + 1,
        }
    }

    /// Whether `self` occurs inside `other`, reflexively.
    pub fn is_subarity_of(&self, other: &Arity) -> bool {
        self == other || other.children.iter().any(|c| self.is_subarity_of(c))
    }

    /// Whether `self` occurs inside `other` and differs from it.
    pub fn is_proper_subarity_of(&self, other: &Arity) -> bool {
        self != other && self.is_subarity_of(other)
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_base() {
            return write!(f, "0");
        }
        write!(f, "(")?;
        for (i, c) in self.children.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(children: Vec<Arity>) -> Arity {
        Arity::new(children)
    }

    // Independent oracle for concatenation: flatten both child sequences.
    fn concat_oracle(x: &Arity, y: &Arity) -> Arity {
        let mut v: Vec<Arity> = x.children().to_vec();
        v.extend_from_slice(y.children());
        Arity::new(v)
    }

    #[test]
    fn concat_of_unary_arities() {
        let one = Arity::first_order(1);
        assert_eq!(one.concat(&one), Arity::first_order(2));
    }

    #[test]
    fn concat_base_is_left_identity_on_children() {
        let x = a(vec![a(vec![Arity::base()]), Arity::base()]);
        assert_eq!(Arity::base().concat(&x).children(), x.children());
        assert_eq!(x.concat(&Arity::base()).children(), x.children());
    }

    #[test]
    fn concat_nested() {
        let left = a(vec![a(vec![Arity::base()])]); // ((0))
        let right = Arity::first_order(2); // (0,0)
        let expected = a(vec![a(vec![Arity::base()]), Arity::base(), Arity::base()]);
        assert_eq!(left.concat(&right), expected);
        assert_eq!(left.concat(&right), concat_oracle(&left, &right));
    }

    #[test]
    fn order_of_base_is_zero() {
        assert_eq!(Arity::base().order(), 0);
    }

    #[test]
    fn order_of_first_order() {
        assert_eq!(Arity::first_order(2).order(), 1);
    }

    #[test]
    fn order_of_mixed() {
        // ((0),0): max child order is 1, so order 2.  Oracle: unrolled by hand,
        // order((0)) = 1 + order(0) = 1; order(0) = 0; 1 + max(1,0) = 2.
        let x = a(vec![a(vec![Arity::base()]), Arity::base()]);
        assert_eq!(x.order(), 2);
    }

    #[test]
    fn base_is_subarity_of_everything() {
        let x = a(vec![Arity::base(), a(vec![Arity::base()])]);
        assert!(Arity::base().is_subarity_of(&x));
    }

    #[test]
    fn subarity_is_reflexive() {
        let x = a(vec![a(vec![Arity::base()])]);
        assert!(x.is_subarity_of(&x));
        assert!(!x.is_proper_subarity_of(&x));
    }

    #[test]
    fn two_is_not_subarity_of_one() {
        // Oracle: the subtrees of (0) are exactly (0) and 0.
        let two = Arity::first_order(2);
        let one = Arity::first_order(1);
        assert!(!two.is_subarity_of(&one));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_arity() -> impl Strategy<Value = Arity> {
            let leaf = Just(Arity::base());
            leaf.prop_recursive(3, 12, 4, |inner| {
                prop::collection::vec(inner, 0..4).prop_map(Arity::new)
            })
        }

        proptest! {
            #[test]
            fn concat_order_is_max_for_nonempty(x in arb_arity(), y in arb_arity()) {
                prop_assume!(!x.is_empty() && !y.is_empty());
                prop_assert_eq!(x.concat(&y).order(), x.order().max(y.order()));
            }

            #[test]
            fn concat_with_base(x in arb_arity()) {
                let left = Arity::base().concat(&x);
                let right = x.concat(&Arity::base());
                prop_assert_eq!(left.children(), x.children());
                prop_assert_eq!(right.children(), x.children());
            }

            #[test]
            fn children_have_smaller_order(x in arb_arity()) {
                if x.order() > 0 {
                    for c in x.children() {
                        prop_assert!(c.order() < x.order());
                    }
                }
            }

            #[test]
            fn subarity_transitive(x in arb_arity(), y in arb_arity(), z in arb_arity()) {
                if x.is_subarity_of(&y) && y.is_subarity_of(&z) {
                    prop_assert!(x.is_subarity_of(&z));
                }
            }

            #[test]
            fn subarity_antisymmetric(x in arb_arity(), y in arb_arity()) {
                if x.is_subarity_of(&y) && y.is_subarity_of(&x) {
                    prop_assert_eq!(x, y);
                }
            }
        }
    }
}

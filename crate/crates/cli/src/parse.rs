//! Parser for the three dialects.  Parsing is arity-directed: argument
//! counts are checked against the head's declared arity as the tree is
//! built, so ill-aritied input is a parse-time error with a position.

use std::fmt;

use tf_kernel::arity::Arity;
use tf_kernel::check::{Derivation, EqInstance, Rule};
use tf_kernel::judgement::{Base, Context, Judgement, Kind};
use tf_kernel::lf::{LfDeclaration, LfJudgement, LfJudgementBody, LfKind, LfObject, LfSpecification};
use tf_kernel::spec::{Declaration, Specification};
use tf_kernel::syntax::{Abstraction, Ann, Object, Symbol};
use tf_kernel::tfk::KindAnn;

use crate::lexer::{lex, Spanned, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dialect {
    Tf,
    Tfk,
    Lf,
}

impl Dialect {
    pub fn name(self) -> &'static str {
        match self {
            Dialect::Tf => "tf",
            Dialect::Tfk => "tfk",
            Dialect::Lf => "lf",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "tf" => Some(Dialect::Tf),
            "tfk" => Some(Dialect::Tfk),
            "lf" => Some(Dialect::Lf),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

type PResult<T> = Result<T, ParseError>;

/// Items of the two lambda-free dialects.
pub enum Item<A: Ann> {
    Declaration(Declaration<A>),
    Check(Judgement<A>),
    Derivation(Derivation<A>),
}

/// Items of the traditional-framework dialect.
pub enum LfItem {
    Declaration(LfDeclaration),
    Check(LfJudgement),
}

pub enum FileItems {
    Tf(Vec<Item<()>>),
    Tfk(Vec<Item<KindAnn>>),
    Lf(Vec<LfItem>),
}

pub struct SourceFile {
    pub dialect: Dialect,
    pub items: FileItems,
    /// A short label per item for report lines.
    pub labels: Vec<String>,
}

#[doc(hidden)]
pub struct P<'t> {
    toks: &'t [Spanned],
    pos: usize,
}

impl<'t> P<'t> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos).map(|s| &s.token)
    }

    fn peek_at(&self, offset: usize) -> Option<&Token> {
        self.toks.get(self.pos + offset).map(|s| &s.token)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|s| (s.line, s.column))
            .unwrap_or((1, 1))
    }

    fn fail<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (line, column) = self.here();
        Err(ParseError { line, column, message: message.into() })
    }

    fn next(&mut self) -> PResult<&Token> {
        match self.toks.get(self.pos) {
            Some(s) => {
                self.pos += 1;
                Ok(&s.token)
            }
            None => {
                let (line, column) = self.here();
                Err(ParseError { line, column, message: "unexpected end of input".into() })
            }
        }
    }

    fn expect(&mut self, token: Token) -> PResult<()> {
        match self.peek() {
            Some(t) if t == &token => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let msg = format!("expected `{token}`, found `{t}`");
                self.fail(msg)
            }
            None => self.fail(format!("expected `{token}`, found end of input")),
        }
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.peek() == Some(token) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn name(&mut self) -> PResult<String> {
        match self.peek().cloned() {
            Some(Token::Name(n)) => {
                self.pos += 1;
                Ok(n)
            }
            Some(t) => self.fail(format!("expected a name, found `{t}`")),
            None => self.fail("expected a name, found end of input"),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

/// Lexical scope for name resolution: enclosing binder symbols, innermost
/// last, on top of the declared constants.
#[doc(hidden)]
pub struct Scope<'s, A: Ann> {
    spec: &'s Specification<A>,
    vars: Vec<Symbol>,
}

impl<'s, A: Ann> Scope<'s, A> {
    fn resolve(&self, name: &str) -> Option<Symbol> {
        if let Some(v) = self.vars.iter().rev().find(|v| v.name == name) {
            return Some(v.clone());
        }
        self.spec
            .lookup_constant_name(name)
            .map(|(s, _)| s.clone())
    }
}

/// Dialect-dependent binder parsing.
pub trait BinderAnn: Ann {
    #[doc(hidden)]
    fn parse_binder<'s>(
        p: &mut P,
        scope: &mut Scope<'s, Self>,
        expected: Option<&Arity>,
    ) -> PResult<(Symbol, Self)>;
}

impl BinderAnn for () {
    fn parse_binder<'s>(
        p: &mut P,
        scope: &mut Scope<'s, Self>,
        expected: Option<&Arity>,
    ) -> PResult<(Symbol, ())> {
        let name = p.name()?;
        if p.peek() == Some(&Token::Colon) {
            return p.fail("binder annotations are not written in this dialect");
        }
        let Some(arity) = expected else {
            return p.fail(format!("cannot infer the arity of binder {name}"));
        };
        let _ = scope;
        Ok((Symbol::var(name, arity.clone()), ()))
    }
}

impl BinderAnn for KindAnn {
    fn parse_binder<'s>(
        p: &mut P,
        scope: &mut Scope<'s, Self>,
        expected: Option<&Arity>,
    ) -> PResult<(Symbol, KindAnn)> {
        let name = p.name()?;
        p.expect(Token::Colon)?;
        let kind = parse_kind(p, scope)?;
        let arity = kind.arity();
        if let Some(e) = expected {
            if e != &arity {
                return p.fail(format!(
                    "binder {name} has arity {arity}, expected {e}"
                ));
            }
        }
        Ok((Symbol::var(name, arity), KindAnn(kind)))
    }
}

fn starts_arg(t: Option<&Token>) -> bool {
    matches!(t, Some(Token::Name(_)) | Some(Token::LParen) | Some(Token::LBracket))
}

/// Parse an object: a head applied to exactly its arity's worth of
/// arguments.
fn parse_object<A: BinderAnn>(p: &mut P, scope: &mut Scope<A>) -> PResult<Object<A>> {
    let (line, column) = p.here();
    let head_name = p.name()?;
    let Some(head) = scope.resolve(&head_name) else {
        return Err(ParseError {
            line,
            column,
            message: format!("unknown symbol {head_name}"),
        });
    };
    let expected: Vec<Arity> = head.arity.children().to_vec();
    let mut args: Vec<Abstraction<A>> = Vec::new();
    while starts_arg(p.peek()) {
        if args.len() == expected.len() {
            return p.fail(format!(
                "{head_name} expects {} arguments",
                expected.len()
            ));
        }
        let want = &expected[args.len()];
        let arg = parse_arg(p, scope, want)?;
        args.push(arg);
    }
    if args.len() != expected.len() {
        return p.fail(format!(
            "{head_name} expects {} arguments, found {}",
            expected.len(),
            args.len()
        ));
    }
    match Object::new(head, args) {
        Ok(o) => Ok(o),
        Err(e) => Err(ParseError { line, column, message: e.to_string() }),
    }
}

fn parse_arg<A: BinderAnn>(
    p: &mut P,
    scope: &mut Scope<A>,
    expected: &Arity,
) -> PResult<Abstraction<A>> {
    match p.peek() {
        Some(Token::Name(_)) => {
            let (line, column) = p.here();
            let name = p.name()?;
            let Some(sym) = scope.resolve(&name) else {
                return Err(ParseError {
                    line,
                    column,
                    message: format!("unknown symbol {name}"),
                });
            };
            if !sym.arity.is_base() {
                return Err(ParseError {
                    line,
                    column,
                    message: format!(
                        "{name} has arity {}, write its eta-long form in argument position",
                        sym.arity
                    ),
                });
            }
            if !expected.is_base() {
                return Err(ParseError {
                    line,
                    column,
                    message: format!("expected an abstraction of arity {expected}"),
                });
            }
            let obj = Object::leaf(sym)
                .map_err(|e| ParseError { line, column, message: e.to_string() })?;
            Ok(Abstraction::constant(obj))
        }
        Some(Token::LParen) => {
            p.expect(Token::LParen)?;
            let abs = if p.peek() == Some(&Token::LBracket) {
                parse_abstraction(p, scope, expected)?
            } else {
                if !expected.is_base() {
                    return p.fail(format!("expected an abstraction of arity {expected}"));
                }
                Abstraction::constant(parse_object(p, scope)?)
            };
            p.expect(Token::RParen)?;
            Ok(abs)
        }
        Some(Token::LBracket) => parse_abstraction(p, scope, expected),
        _ => p.fail("expected an argument"),
    }
}

/// Parse `[x, y, ...] body` against an expected arity.
fn parse_abstraction<A: BinderAnn>(
    p: &mut P,
    scope: &mut Scope<A>,
    expected: &Arity,
) -> PResult<Abstraction<A>> {
    p.expect(Token::LBracket)?;
    let children = expected.children().to_vec();
    let mut binders: Vec<(Symbol, A)> = Vec::new();
    if p.peek() != Some(&Token::RBracket) {
        loop {
            let want = children.get(binders.len());
            if want.is_none() {
                return p.fail(format!(
                    "too many binders: expected arity {expected}"
                ));
            }
            let (sym, ann) = A::parse_binder(p, scope, want)?;
            binders.push((sym, ann));
            if !p.eat(&Token::Comma) {
                break;
            }
        }
    }
    p.expect(Token::RBracket)?;
    if binders.len() != children.len() {
        return p.fail(format!(
            "expected {} binders for arity {expected}",
            children.len()
        ));
    }
    let depth = binders.len();
    for (s, _) in &binders {
        scope.vars.push(s.clone());
    }
    let body = parse_object(p, scope);
    for _ in 0..depth {
        scope.vars.pop();
    }
    let body = body?;
    Abstraction::new(binders, body).map_err(|e| {
        let (line, column) = p.here();
        ParseError { line, column, message: e.to_string() }
    })
}

fn parse_base<A: BinderAnn>(p: &mut P, scope: &mut Scope<A>) -> PResult<Base<A>> {
    match p.peek() {
        Some(Token::Type) => {
            p.next()?;
            Ok(Base::Type)
        }
        Some(Token::El) => {
            p.next()?;
            if p.eat(&Token::LParen) {
                let o = parse_object(p, scope)?;
                p.expect(Token::RParen)?;
                Ok(Base::El(o))
            } else {
                Ok(Base::El(parse_object(p, scope)?))
            }
        }
        _ => p.fail("expected a base kind (`Type` or `El ...`)"),
    }
}

fn parse_kind<A: BinderAnn>(p: &mut P, scope: &mut Scope<A>) -> PResult<Kind<A>> {
    if p.peek() == Some(&Token::LParen) {
        p.expect(Token::LParen)?;
        let telescope = parse_telescope(p, scope, Token::RParen)?;
        p.expect(Token::RParen)?;
        let target = parse_base(p, scope);
        for _ in 0..telescope.len() {
            scope.vars.pop();
        }
        let target = target?;
        Kind::new(telescope, target).map_err(|e| {
            let (line, column) = p.here();
            ParseError { line, column, message: e.to_string() }
        })
    } else {
        Ok(Kind::base(parse_base(p, scope)?))
    }
}

/// Parse telescope entries up to (not consuming) the closing token, leaving
/// the entries pushed on the scope.  The caller pops them.
fn parse_telescope<A: BinderAnn>(
    p: &mut P,
    scope: &mut Scope<A>,
    until: Token,
) -> PResult<Vec<(Symbol, Kind<A>)>> {
    let mut entries = Vec::new();
    if p.peek() == Some(&until) {
        return Ok(entries);
    }
    loop {
        let name = p.name()?;
        p.expect(Token::Colon)?;
        let kind = parse_kind(p, scope)?;
        let sym = Symbol::var(name, kind.arity());
        scope.vars.push(sym.clone());
        entries.push((sym, kind));
        if !p.eat(&Token::Comma) {
            break;
        }
    }
    Ok(entries)
}

fn parse_judgement<A: BinderAnn>(
    p: &mut P,
    spec: &Specification<A>,
) -> PResult<Judgement<A>> {
    let mut scope = Scope { spec, vars: Vec::new() };
    // Empty-context forms.
    if p.eat(&Token::Valid) {
        return Ok(Judgement::valid(Context::empty()));
    }
    let context = if p.eat(&Token::Turnstile) {
        Context::empty()
    } else {
        let mut entries = Vec::new();
        loop {
            let name = p.name()?;
            p.expect(Token::Colon)?;
            let kind = parse_kind(p, &mut scope)?;
            let sym = Symbol::var(name, kind.arity());
            scope.vars.push(sym.clone());
            entries.push((sym, kind));
            if p.eat(&Token::Comma) {
                continue;
            }
            break;
        }
        let ctx = Context::new(entries).map_err(|e| {
            let (line, column) = p.here();
            ParseError { line, column, message: e.to_string() }
        })?;
        if p.eat(&Token::Valid) {
            return Ok(Judgement::valid(ctx));
        }
        p.expect(Token::Turnstile)?;
        ctx
    };
    let m = parse_object(p, &mut scope)?;
    match p.peek() {
        Some(Token::Colon) => {
            p.next()?;
            let t = parse_base(p, &mut scope)?;
            Ok(Judgement::typing(context, m, t))
        }
        Some(Token::Equals) => {
            p.next()?;
            let n = parse_object(p, &mut scope)?;
            p.expect(Token::Colon)?;
            let t = parse_base(p, &mut scope)?;
            Ok(Judgement::equal(context, m, n, t))
        }
        _ => p.fail("expected `:` or `=` in a judgement body"),
    }
}

fn rule_name(p: &mut P) -> PResult<Rule> {
    let name = match p.peek().cloned() {
        Some(Token::Name(n)) => {
            p.next()?;
            n
        }
        Some(Token::Const) => {
            p.next()?;
            "const".to_string()
        }
        Some(Token::Eq) => {
            p.next()?;
            "eq".to_string()
        }
        _ => return p.fail("expected a rule name"),
    };
    Rule::from_name(&name).map_or_else(|| p.fail(format!("unknown rule `{name}`")), Ok)
}

/// Parse a derivation node:
/// `( rule {judgement} [@N <args>] premise* )`.
fn parse_derivation_node<A: BinderAnn>(
    p: &mut P,
    spec: &Specification<A>,
) -> PResult<Derivation<A>> {
    p.expect(Token::LParen)?;
    let rule = rule_name(p)?;
    p.expect(Token::LBrace)?;
    let conclusion = parse_judgement(p, spec)?;
    p.expect(Token::RBrace)?;
    let instance = if p.eat(&Token::At) {
        let index = match p.next()? {
            Token::Number(n) => *n,
            t => {
                let msg = format!("expected an equation index, found `{t}`");
                return p.fail(msg);
            }
        };
        let Some(Declaration::Equation { telescope, .. }) =
            spec.declarations().get(index)
        else {
            return p.fail(format!("declaration {index} is not an equation"));
        };
        let arities: Vec<Arity> = telescope
            .entries()
            .iter()
            .map(|(s, _)| s.arity.clone())
            .collect();
        p.expect(Token::LAngle)?;
        let mut scope = Scope { spec, vars: conclusion.context.domain() };
        let mut args = Vec::new();
        if p.peek() != Some(&Token::RAngle) {
            loop {
                let Some(want) = arities.get(args.len()) else {
                    return p.fail("too many instantiation arguments");
                };
                let arg = if p.peek() == Some(&Token::LBracket) {
                    parse_abstraction(p, &mut scope, want)?
                } else {
                    if !want.is_base() {
                        return p.fail(format!(
                            "expected an abstraction of arity {want}"
                        ));
                    }
                    Abstraction::constant(parse_object(p, &mut scope)?)
                };
                args.push(arg);
                if !p.eat(&Token::Comma) {
                    break;
                }
            }
        }
        p.expect(Token::RAngle)?;
        if args.len() != arities.len() {
            return p.fail(format!(
                "expected {} instantiation arguments",
                arities.len()
            ));
        }
        Some(EqInstance { equation: index, args })
    } else {
        None
    };
    let mut premises = Vec::new();
    while p.peek() == Some(&Token::LParen) {
        premises.push(parse_derivation_node(p, spec)?);
    }
    p.expect(Token::RParen)?;
    Ok(Derivation { rule, premises, conclusion, instance })
}

/// Render a derivation in the same format `parse_derivation_node` reads.
pub fn emit_derivation<A: Ann>(d: &Derivation<A>) -> String {
    let mut out = String::new();
    emit_node(d, 0, &mut out);
    out
}

fn emit_node<A: Ann>(d: &Derivation<A>, indent: usize, out: &mut String) {
    use std::fmt::Write;
    let pad = "  ".repeat(indent);
    let _ = write!(out, "{pad}({} {{{}}}", d.rule.name(), d.conclusion);
    if let Some(instance) = &d.instance {
        let _ = write!(out, " @{} <", instance.equation);
        for (i, a) in instance.args.iter().enumerate() {
            if i > 0 {
                let _ = write!(out, ", ");
            }
            let _ = write!(out, "{a}");
        }
        let _ = write!(out, ">");
    }
    if d.premises.is_empty() {
        let _ = write!(out, ")");
        return;
    }
    for premise in &d.premises {
        let _ = writeln!(out);
        emit_node(premise, indent + 1, out);
    }
    let _ = write!(out, ")");
}

/// Parse a derivation from its rendered form, resolving names against the
/// given specification.
pub fn parse_derivation<A: BinderAnn>(
    text: &str,
    spec: &Specification<A>,
) -> PResult<Derivation<A>> {
    let toks = lex(text).map_err(|e| ParseError {
        line: e.line,
        column: e.column,
        message: e.message,
    })?;
    let mut p = P { toks: &toks, pos: 0 };
    let d = parse_derivation_node(&mut p, spec)?;
    if !p.at_end() {
        return p.fail("trailing input after the derivation");
    }
    Ok(d)
}

fn parse_items<A: BinderAnn>(
    p: &mut P,
    spec: &mut Specification<A>,
) -> PResult<(Vec<Item<A>>, Vec<String>)> {
    let mut items = Vec::new();
    let mut labels = Vec::new();
    while !p.at_end() {
        match p.peek() {
            Some(Token::Const) => {
                p.next()?;
                let name = p.name()?;
                p.expect(Token::Colon)?;
                let mut scope = Scope { spec, vars: Vec::new() };
                let kind = parse_kind(p, &mut scope)?;
                p.expect(Token::Dot)?;
                let symbol = Symbol::constant(name.clone(), kind.arity());
                let decl = Declaration::Constant { symbol, kind };
                spec.push(decl.clone()).map_err(|e| {
                    let (line, column) = p.here();
                    ParseError { line, column, message: e.to_string() }
                })?;
                labels.push(format!("const {name}"));
                items.push(Item::Declaration(decl));
            }
            Some(Token::Eq) => {
                p.next()?;
                p.expect(Token::LParen)?;
                let mut scope = Scope { spec, vars: Vec::new() };
                let entries = parse_telescope(p, &mut scope, Token::RParen)?;
                p.expect(Token::RParen)?;
                p.expect(Token::LParen)?;
                let lhs = parse_object(p, &mut scope)?;
                p.expect(Token::Equals)?;
                let rhs = parse_object(p, &mut scope)?;
                p.expect(Token::Colon)?;
                let target = parse_base(p, &mut scope)?;
                p.expect(Token::RParen)?;
                p.expect(Token::Dot)?;
                for _ in 0..entries.len() {
                    scope.vars.pop();
                }
                let telescope = Context::new(entries).map_err(|e| {
                    let (line, column) = p.here();
                    ParseError { line, column, message: e.to_string() }
                })?;
                let decl = Declaration::Equation { telescope, lhs, rhs, target };
                spec.push(decl.clone()).map_err(|e| {
                    let (line, column) = p.here();
                    ParseError { line, column, message: e.to_string() }
                })?;
                labels.push(format!("eq {}", spec.len()));
                items.push(Item::Declaration(decl));
            }
            Some(Token::Check) => {
                p.next()?;
                let j = parse_judgement(p, spec)?;
                p.expect(Token::Dot)?;
                labels.push("check".to_string());
                items.push(Item::Check(j));
            }
            Some(Token::Derivation) => {
                p.next()?;
                let d = parse_derivation_node(p, spec)?;
                p.expect(Token::Dot)?;
                labels.push("derivation".to_string());
                items.push(Item::Derivation(d));
            }
            Some(t) => {
                let msg = format!("expected an item, found `{t}`");
                return p.fail(msg);
            }
            None => break,
        }
    }
    Ok((items, labels))
}

// --- The traditional-framework dialect --------------------------------------

struct LfScope;

fn parse_lf_atom(p: &mut P) -> PResult<LfObject> {
    match p.peek().cloned() {
        Some(Token::Name(n)) => {
            p.next()?;
            // Constants and variables are distinguished by the checker, not
            // the grammar; parse everything as a name and resolve later.
            Ok(LfObject::Var(n))
        }
        Some(Token::LParen) => {
            p.next()?;
            let o = parse_lf_object(p)?;
            p.expect(Token::RParen)?;
            Ok(o)
        }
        Some(Token::Lambda) => {
            p.next()?;
            let name = p.name()?;
            p.expect(Token::Colon)?;
            let kind = parse_lf_kind(p)?;
            p.expect(Token::Dot)?;
            let body = parse_lf_object(p)?;
            Ok(LfObject::Lam(name, Box::new(kind), Box::new(body)))
        }
        _ => p.fail("expected an object"),
    }
}

fn starts_lf_atom(t: Option<&Token>) -> bool {
    matches!(t, Some(Token::Name(_)) | Some(Token::LParen) | Some(Token::Lambda))
}

fn parse_lf_object(p: &mut P) -> PResult<LfObject> {
    let mut head = parse_lf_atom(p)?;
    while starts_lf_atom(p.peek()) {
        // `( name :` opens a product kind, not an argument.
        if p.peek() == Some(&Token::LParen)
            && matches!(p.peek_at(1), Some(Token::Name(_)))
            && p.peek_at(2) == Some(&Token::Colon)
        {
            break;
        }
        let arg = parse_lf_atom(p)?;
        head = LfObject::App(Box::new(head), Box::new(arg));
    }
    Ok(head)
}

fn parse_lf_kind(p: &mut P) -> PResult<LfKind> {
    match p.peek() {
        Some(Token::Type) => {
            p.next()?;
            Ok(LfKind::Type)
        }
        Some(Token::El) => {
            p.next()?;
            Ok(LfKind::El(parse_lf_object(p)?))
        }
        Some(Token::LParen) => {
            p.next()?;
            let name = p.name()?;
            p.expect(Token::Colon)?;
            let dom = parse_lf_kind(p)?;
            p.expect(Token::RParen)?;
            let cod = parse_lf_kind(p)?;
            Ok(LfKind::Pi(name, Box::new(dom), Box::new(cod)))
        }
        _ => p.fail("expected a kind"),
    }
}

fn starts_lf_kind(p: &P) -> bool {
    match p.peek() {
        Some(Token::Type) | Some(Token::El) => true,
        Some(Token::LParen) => {
            matches!(p.peek_at(1), Some(Token::Name(_))) && p.peek_at(2) == Some(&Token::Colon)
        }
        _ => false,
    }
}

fn parse_lf_judgement(p: &mut P) -> PResult<LfJudgement> {
    let _ = LfScope;
    if p.eat(&Token::Valid) {
        return Ok(LfJudgement { context: Vec::new(), body: LfJudgementBody::Valid });
    }
    let context = if p.eat(&Token::Turnstile) {
        Vec::new()
    } else {
        let mut entries = Vec::new();
        loop {
            let name = p.name()?;
            p.expect(Token::Colon)?;
            let kind = parse_lf_kind(p)?;
            entries.push((name, kind));
            if p.eat(&Token::Comma) {
                continue;
            }
            break;
        }
        if p.eat(&Token::Valid) {
            return Ok(LfJudgement { context: entries, body: LfJudgementBody::Valid });
        }
        p.expect(Token::Turnstile)?;
        entries
    };
    if starts_lf_kind(p) {
        let k1 = parse_lf_kind(p)?;
        if p.eat(&Token::Kind) {
            return Ok(LfJudgement { context, body: LfJudgementBody::KindWf(k1) });
        }
        p.expect(Token::Equals)?;
        let k2 = parse_lf_kind(p)?;
        return Ok(LfJudgement { context, body: LfJudgementBody::KindEq(k1, k2) });
    }
    let a = parse_lf_object(p)?;
    match p.peek() {
        Some(Token::Colon) => {
            p.next()?;
            let k = parse_lf_kind(p)?;
            Ok(LfJudgement { context, body: LfJudgementBody::Typing(a, k) })
        }
        Some(Token::Equals) => {
            p.next()?;
            let b = parse_lf_object(p)?;
            p.expect(Token::Colon)?;
            let k = parse_lf_kind(p)?;
            Ok(LfJudgement { context, body: LfJudgementBody::ObjEq(a, b, k) })
        }
        _ => p.fail("expected `:` or `=` in a judgement body"),
    }
}

/// Framework objects are parsed name-blind; heads that are declared
/// constants are rewritten from variables to constants here.
fn resolve_lf_constants(o: &LfObject, spec: &LfSpecification, bound: &mut Vec<String>) -> LfObject {
    match o {
        LfObject::Var(x) => {
            if !bound.contains(x) && spec.constant_kind(x).is_some() {
                LfObject::Const(x.clone())
            } else {
                o.clone()
            }
        }
        LfObject::Const(_) => o.clone(),
        LfObject::Lam(x, k, b) => {
            let k = resolve_lf_constants_kind(k, spec, bound);
            bound.push(x.clone());
            let b = resolve_lf_constants(b, spec, bound);
            bound.pop();
            LfObject::Lam(x.clone(), Box::new(k), Box::new(b))
        }
        LfObject::App(f, a) => LfObject::App(
            Box::new(resolve_lf_constants(f, spec, bound)),
            Box::new(resolve_lf_constants(a, spec, bound)),
        ),
    }
}

fn resolve_lf_constants_kind(
    k: &LfKind,
    spec: &LfSpecification,
    bound: &mut Vec<String>,
) -> LfKind {
    match k {
        LfKind::Type => LfKind::Type,
        LfKind::El(o) => LfKind::El(resolve_lf_constants(o, spec, bound)),
        LfKind::Pi(x, k1, k2) => {
            let k1 = resolve_lf_constants_kind(k1, spec, bound);
            bound.push(x.clone());
            let k2 = resolve_lf_constants_kind(k2, spec, bound);
            bound.pop();
            LfKind::Pi(x.clone(), Box::new(k1), Box::new(k2))
        }
    }
}

fn resolve_lf_judgement(j: &LfJudgement, spec: &LfSpecification) -> LfJudgement {
    let mut bound: Vec<String> = j.context.iter().map(|(n, _)| n.clone()).collect();
    let context = {
        let mut out = Vec::new();
        let mut names: Vec<String> = Vec::new();
        for (n, k) in &j.context {
            out.push((n.clone(), resolve_lf_constants_kind(k, spec, &mut names)));
            names.push(n.clone());
        }
        out
    };
    let body = match &j.body {
        LfJudgementBody::Valid => LfJudgementBody::Valid,
        LfJudgementBody::KindWf(k) => {
            LfJudgementBody::KindWf(resolve_lf_constants_kind(k, spec, &mut bound))
        }
        LfJudgementBody::Typing(a, k) => LfJudgementBody::Typing(
            resolve_lf_constants(a, spec, &mut bound),
            resolve_lf_constants_kind(k, spec, &mut bound),
        ),
        LfJudgementBody::ObjEq(a, b, k) => LfJudgementBody::ObjEq(
            resolve_lf_constants(a, spec, &mut bound),
            resolve_lf_constants(b, spec, &mut bound),
            resolve_lf_constants_kind(k, spec, &mut bound),
        ),
        LfJudgementBody::KindEq(a, b) => LfJudgementBody::KindEq(
            resolve_lf_constants_kind(a, spec, &mut bound),
            resolve_lf_constants_kind(b, spec, &mut bound),
        ),
    };
    LfJudgement { context, body }
}

fn parse_lf_items(
    p: &mut P,
    spec: &mut LfSpecification,
) -> PResult<(Vec<LfItem>, Vec<String>)> {
    let mut items = Vec::new();
    let mut labels = Vec::new();
    while !p.at_end() {
        match p.peek() {
            Some(Token::Const) => {
                p.next()?;
                let name = p.name()?;
                p.expect(Token::Colon)?;
                let kind = parse_lf_kind(p)?;
                p.expect(Token::Dot)?;
                let kind = resolve_lf_constants_kind(&kind, spec, &mut Vec::new());
                let decl = LfDeclaration::Constant { name: name.clone(), kind };
                spec.push(decl.clone()).map_err(|e| {
                    let (line, column) = p.here();
                    ParseError { line, column, message: e.to_string() }
                })?;
                labels.push(format!("const {name}"));
                items.push(LfItem::Declaration(decl));
            }
            Some(Token::Eq) => {
                p.next()?;
                p.expect(Token::LParen)?;
                let mut telescope = Vec::new();
                if p.peek() != Some(&Token::RParen) {
                    loop {
                        let name = p.name()?;
                        p.expect(Token::Colon)?;
                        let kind = parse_lf_kind(p)?;
                        telescope.push((name, kind));
                        if !p.eat(&Token::Comma) {
                            break;
                        }
                    }
                }
                p.expect(Token::RParen)?;
                p.expect(Token::LParen)?;
                let lhs = parse_lf_object(p)?;
                p.expect(Token::Equals)?;
                let rhs = parse_lf_object(p)?;
                p.expect(Token::Colon)?;
                let kind = parse_lf_kind(p)?;
                p.expect(Token::RParen)?;
                p.expect(Token::Dot)?;
                // Resolve constants: telescope names are bound in the sides.
                let telescope: Vec<(String, LfKind)> = {
                    let mut out = Vec::new();
                    let mut names = Vec::new();
                    for (n, k) in telescope {
                        out.push((n.clone(), resolve_lf_constants_kind(&k, spec, &mut names)));
                        names.push(n);
                    }
                    out
                };
                let mut bound: Vec<String> =
                    telescope.iter().map(|(n, _)| n.clone()).collect();
                let decl = LfDeclaration::Equation {
                    lhs: resolve_lf_constants(&lhs, spec, &mut bound),
                    rhs: resolve_lf_constants(&rhs, spec, &mut bound),
                    kind: resolve_lf_constants_kind(&kind, spec, &mut bound),
                    telescope,
                };
                spec.push(decl.clone()).map_err(|e| {
                    let (line, column) = p.here();
                    ParseError { line, column, message: e.to_string() }
                })?;
                labels.push(format!("eq {}", spec.declarations().len()));
                items.push(LfItem::Declaration(decl));
            }
            Some(Token::Check) => {
                p.next()?;
                let j = parse_lf_judgement(p)?;
                p.expect(Token::Dot)?;
                let j = resolve_lf_judgement(&j, spec);
                labels.push("check".to_string());
                items.push(LfItem::Check(j));
            }
            Some(t) => {
                let msg = format!("expected an item, found `{t}`");
                return p.fail(msg);
            }
            None => break,
        }
    }
    Ok((items, labels))
}

/// Parse a source file in the given dialect, resolving against (and
/// extending) the given specifications.
pub fn parse_file(
    text: &str,
    dialect: Dialect,
    tf_spec: &mut Specification<()>,
    tfk_spec: &mut Specification<KindAnn>,
    lf_spec: &mut LfSpecification,
) -> PResult<SourceFile> {
    let toks = lex(text).map_err(|e| ParseError {
        line: e.line,
        column: e.column,
        message: e.message,
    })?;
    let mut p = P { toks: &toks, pos: 0 };
    match dialect {
        Dialect::Tf => {
            let (items, labels) = parse_items(&mut p, tf_spec)?;
            Ok(SourceFile { dialect, items: FileItems::Tf(items), labels })
        }
        Dialect::Tfk => {
            let (items, labels) = parse_items(&mut p, tfk_spec)?;
            Ok(SourceFile { dialect, items: FileItems::Tfk(items), labels })
        }
        Dialect::Lf => {
            let (items, labels) = parse_lf_items(&mut p, lf_spec)?;
            Ok(SourceFile { dialect, items: FileItems::Lf(items), labels })
        }
    }
}

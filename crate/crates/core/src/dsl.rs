//! Text format for algebra definitions.
//!
//! ```text
//! # comments run to end of line
//! algebra w_ab(a = 1, b = -1) {
//!     family L offset 0 grade (0, 1);
//!     family I offset 0 grade (0, 1);
//!     bracket [L(m), L(n)] = (n - m) * L(m + n);
//!     bracket [L(m), I(n)] = (n + b*m + a) * I(m + n);
//!     product [L(m), L(n)] = L(m + n);
//! }
//! ```
//!
//! Group-graded algebras declare `generators` (the nonzero scalar degrees of
//! the grading group) and write basis patterns with a group variable before
//! the index: `L(p; m)`. Scalars are Gaussian rationals: `3/2` is a single
//! rational token, `2i` an imaginary one, and a bare `i` names the imaginary
//! unit only where no variable or parameter called `i` is in scope. There is
//! no division operator — write `1/2*(b - 1)` rather than `(b - 1)/2`.
//!
//! Rule right-hand sides are sums of `coefficient * Target(...)` terms.
//! Coefficients are polynomials in the pattern variables; target positions
//! must be the two pattern variables once each plus an integer constant (for
//! the group position, a constant is only accepted when it is an exact
//! integer multiple of a single declared generator).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::algebra::{
    check_rule_homogeneous, AlgebraDef, FamilyDecl, RuleMap, RuleTerm, Signature,
};
use crate::coeff::{CoeffPoly, Var};
use crate::scalar::GaussianRational;
use crate::tps::CommProduct;

/// 1-based position of a token in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub length: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Malformed token.
    Lex,
    /// Token stream does not match the grammar.
    Syntax,
    /// Reference to an undeclared family, variable, or parameter.
    UnknownName,
    /// Re-declaration of a name that must be unique.
    Duplicate,
    /// Grammatically fine but semantically rejected (gradings, target
    /// positions, orientations, ...).
    Validation,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{kind:?} error at {}:{}: {message}", span.line, span.col)]
pub struct ParseError {
    pub span: Span,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl ParseError {
    fn new(span: Span, kind: ParseErrorKind, message: impl Into<String>) -> Self {
        ParseError { span, kind, message: message.into() }
    }
}

/// A parsed file: the algebra plus its optional commutative product.
#[derive(Debug, Clone)]
pub struct Document {
    pub algebra: AlgebraDef,
    pub product: Option<CommProduct>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(BigRational),
    Imag(BigRational),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Eq,
    Plus,
    Minus,
    Star,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(r) => write!(f, "`{r}`"),
            Tok::Imag(r) => write!(f, "`{r}i`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<u8> {
        self.src.get(self.pos + offset).copied()
    }

    fn digits(&mut self) -> String {
        let mut out = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            out.push(self.bump() as char);
        }
        out
    }

    fn tokenize(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c == b'#' {
                    while matches!(self.peek(), Some(c) if c != b'\n') {
                        self.bump();
                    }
                } else if c.is_ascii_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let span = |length: u32| Span { line, col, length };
            let Some(c) = self.peek() else {
                out.push(Token { tok: Tok::Eof, span: span(0) });
                return Ok(out);
            };
            let tok = match c {
                b'(' | b')' | b'{' | b'}' | b'[' | b']' | b',' | b';' | b'=' | b'+' | b'-'
                | b'*' => {
                    self.bump();
                    match c {
                        b'(' => Tok::LParen,
                        b')' => Tok::RParen,
                        b'{' => Tok::LBrace,
                        b'}' => Tok::RBrace,
                        b'[' => Tok::LBracket,
                        b']' => Tok::RBracket,
                        b',' => Tok::Comma,
                        b';' => Tok::Semi,
                        b'=' => Tok::Eq,
                        b'+' => Tok::Plus,
                        b'-' => Tok::Minus,
                        _ => Tok::Star,
                    }
                }
                b'0'..=b'9' => {
                    let num = self.digits();
                    let den = if self.peek() == Some(b'/')
                        && matches!(self.peek_at(1), Some(d) if d.is_ascii_digit())
                    {
                        self.bump();
                        let d = self.digits();
                        if d.parse::<BigInt>().map_or(true, |v| v == BigInt::from(0)) {
                            return Err(ParseError::new(
                                span((self.col - col) as u32),
                                ParseErrorKind::Lex,
                                "zero denominator in rational literal",
                            ));
                        }
                        Some(d)
                    } else {
                        None
                    };
                    let value = BigRational::new(
                        num.parse::<BigInt>().unwrap(),
                        den.map_or_else(|| BigInt::from(1), |d| d.parse::<BigInt>().unwrap()),
                    );
                    if self.peek() == Some(b'i') {
                        self.bump();
                        Tok::Imag(value)
                    } else {
                        Tok::Number(value)
                    }
                }
                c if c == b'_' || c.is_ascii_alphabetic() => {
                    let mut name = String::new();
                    while matches!(self.peek(), Some(c) if c == b'_' || c.is_ascii_alphanumeric())
                    {
                        name.push(self.bump() as char);
                    }
                    Tok::Ident(name)
                }
                other => {
                    return Err(ParseError::new(
                        span(1),
                        ParseErrorKind::Lex,
                        format!("unexpected character `{}`", other as char),
                    ));
                }
            };
            let length = self.col.saturating_sub(col).max(1);
            out.push(Token { tok, span: Span { line, col, length } });
        }
    }
}

/// One rule pattern side: the family plus the bound variable names.
struct Pattern {
    family: usize,
    alpha_var: Option<String>,
    idx_var: String,
}

/// Name resolution for coefficient expressions. Owns its snapshot so the
/// parser stays free to advance while an expression is being read.
struct Scope {
    vars: Vec<(String, Var)>,
    params: BTreeMap<String, GaussianRational>,
    family_names: Vec<String>,
}

impl Scope {
    fn empty() -> Self {
        Scope { vars: Vec::new(), params: BTreeMap::new(), family_names: Vec::new() }
    }

    fn is_family(&self, name: &str) -> bool {
        self.family_names.iter().any(|f| f == name)
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    // signature under construction
    name: String,
    params: BTreeMap<String, GaussianRational>,
    generators: Vec<GaussianRational>,
    families: Vec<FamilyDecl>,
    bracket_rules: RuleMap,
    product_rules: RuleMap,
    saw_rule: bool,
}

pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    let tokens = Lexer::new(text).tokenize()?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        name: String::new(),
        params: BTreeMap::new(),
        generators: Vec::new(),
        families: Vec::new(),
        bracket_rules: RuleMap::new(),
        product_rules: RuleMap::new(),
        saw_rule: false,
    };
    parser.document()
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek2(&self) -> &Token {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, span: Span, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::new(span, ParseErrorKind::Syntax, message))
    }

    fn expect(&mut self, want: Tok) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            self.syntax(t.span, format!("expected {}, found {}", want, t.tok))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Ident(name) => Ok((name, t.span)),
            other => self.syntax(t.span, format!("expected {what}, found {other}")),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<Span, ParseError> {
        let (name, span) = self.expect_ident(&format!("`{word}`"))?;
        if name == word {
            Ok(span)
        } else {
            self.syntax(span, format!("expected `{word}`, found `{name}`"))
        }
    }

    fn family_id(&self, name: &str) -> Option<usize> {
        self.families.iter().position(|f| f.name == name)
    }

    fn document(&mut self) -> Result<Document, ParseError> {
        let header = self.keyword("algebra")?;
        let (name, _) = self.expect_ident("an algebra name")?;
        self.name = name;
        self.expect(Tok::LParen)?;
        if self.peek().tok != Tok::RParen {
            loop {
                let (pname, pspan) = self.expect_ident("a parameter name")?;
                if self.params.contains_key(&pname) {
                    return Err(ParseError::new(
                        pspan,
                        ParseErrorKind::Duplicate,
                        format!("parameter `{pname}` declared twice"),
                    ));
                }
                self.expect(Tok::Eq)?;
                let value = self.constant_expr()?;
                self.params.insert(pname, value);
                match self.next() {
                    Token { tok: Tok::Comma, .. } => continue,
                    Token { tok: Tok::RParen, .. } => break,
                    Token { tok, span } => {
                        return self.syntax(span, format!("expected `,` or `)`, found {tok}"))
                    }
                }
            }
        } else {
            self.next();
        }
        self.expect(Tok::LBrace)?;
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::RBrace => {
                    self.next();
                    break;
                }
                Tok::Ident(word) => match word.as_str() {
                    "generators" => self.generators_stmt()?,
                    "family" => self.family_stmt()?,
                    "bracket" => self.rule_stmt(true)?,
                    "product" => self.rule_stmt(false)?,
                    other => {
                        return self.syntax(
                            t.span,
                            format!(
                                "expected `generators`, `family`, `bracket`, `product`, or `}}`, found `{other}`"
                            ),
                        )
                    }
                },
                other => {
                    return self.syntax(t.span, format!("expected a statement or `}}`, found {other}"))
                }
            }
        }
        let t = self.peek().clone();
        if t.tok != Tok::Eof {
            return self.syntax(t.span, format!("expected end of input, found {}", t.tok));
        }

        let sig = Signature {
            families: std::mem::take(&mut self.families),
            params: std::mem::take(&mut self.params),
            generators: std::mem::take(&mut self.generators),
        };
        let algebra =
            AlgebraDef::new(self.name.clone(), sig, std::mem::take(&mut self.bracket_rules))
                .map_err(|e| {
                    ParseError::new(header, ParseErrorKind::Validation, e.to_string())
                })?;
        let product_rules = std::mem::take(&mut self.product_rules);
        let product = if product_rules.is_empty() {
            None
        } else {
            Some(CommProduct::new(&algebra, product_rules).map_err(|e| {
                ParseError::new(header, ParseErrorKind::Validation, e.to_string())
            })?)
        };
        Ok(Document { algebra, product })
    }

    fn generators_stmt(&mut self) -> Result<(), ParseError> {
        let span = self.keyword("generators")?;
        if self.saw_rule {
            return Err(ParseError::new(
                span,
                ParseErrorKind::Validation,
                "`generators` must appear before any bracket or product rule",
            ));
        }
        if !self.generators.is_empty() {
            return Err(ParseError::new(
                span,
                ParseErrorKind::Duplicate,
                "`generators` declared twice",
            ));
        }
        loop {
            let at = self.peek().span;
            let value = self.constant_expr()?;
            if value.is_zero() {
                return Err(ParseError::new(
                    at,
                    ParseErrorKind::Validation,
                    "grading group generators must be nonzero",
                ));
            }
            self.generators.push(value);
            match self.next() {
                Token { tok: Tok::Comma, .. } => continue,
                Token { tok: Tok::Semi, .. } => return Ok(()),
                Token { tok, span } => {
                    return self.syntax(span, format!("expected `,` or `;`, found {tok}"))
                }
            }
        }
    }

    fn family_stmt(&mut self) -> Result<(), ParseError> {
        self.keyword("family")?;
        let (name, nspan) = self.expect_ident("a family name")?;
        if self.family_id(&name).is_some() {
            return Err(ParseError::new(
                nspan,
                ParseErrorKind::Duplicate,
                format!("family `{name}` declared twice"),
            ));
        }
        if self.params.contains_key(&name) {
            return Err(ParseError::new(
                nspan,
                ParseErrorKind::Duplicate,
                format!("family `{name}` shadows a parameter of the same name"),
            ));
        }
        self.keyword("offset")?;
        let ospan = self.peek().span;
        let offset = self.constant_expr()?;
        if !offset.is_real() {
            return Err(ParseError::new(
                ospan,
                ParseErrorKind::Validation,
                "family offsets must be real rationals",
            ));
        }
        self.keyword("grade")?;
        self.expect(Tok::LParen)?;
        let grade_u = self.constant_expr()?;
        self.expect(Tok::Comma)?;
        let grade_v = self.constant_expr()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Semi)?;
        self.families.push(FamilyDecl {
            name,
            index_offset: offset.re().clone(),
            grade_u,
            grade_v,
        });
        Ok(())
    }

    fn rule_stmt(&mut self, is_bracket: bool) -> Result<(), ParseError> {
        let kw = if is_bracket { "bracket" } else { "product" };
        let stmt_span = self.keyword(kw)?;
        self.saw_rule = true;
        self.expect(Tok::LBracket)?;
        let x = self.pattern()?;
        self.expect(Tok::Comma)?;
        let y = self.pattern()?;
        self.expect(Tok::RBracket)?;
        self.expect(Tok::Eq)?;

        // bind pattern variables
        let mut vars: Vec<(String, Var)> = Vec::new();
        for (pat, alpha_slot, idx_slot) in
            [(&x, Var::AlphaX, Var::IdxX), (&y, Var::AlphaY, Var::IdxY)]
        {
            let bindings = pat
                .alpha_var
                .iter()
                .map(|v| (v, alpha_slot))
                .chain(std::iter::once((&pat.idx_var, idx_slot)));
            for (name, slot) in bindings {
                self.check_var_name(name, stmt_span)?;
                if vars.iter().any(|(n, _)| n == name) {
                    return Err(ParseError::new(
                        stmt_span,
                        ParseErrorKind::Duplicate,
                        format!("pattern variable `{name}` bound twice"),
                    ));
                }
                vars.push((name.clone(), slot));
            }
        }

        // rhs: 0, or sum of [coefficient *] Target(alpha; idx)
        let mut terms: Vec<RuleTerm> = Vec::new();
        if self.peek().tok == Tok::Number(BigRational::from_integer(0.into()))
            && self.peek2().tok == Tok::Semi
        {
            self.next();
        } else {
            let scope = Scope {
                vars,
                params: self.params.clone(),
                family_names: self.families.iter().map(|f| f.name.clone()).collect(),
            };
            loop {
                let mut sign = GaussianRational::one();
                // leading sign of each summand is handled by expr's unary
                // minus, except for a bare signed target like `- L(m + n)`
                if self.peek().tok == Tok::Minus
                    && matches!(&self.peek2().tok, Tok::Ident(n) if scope.is_family(n))
                {
                    self.next();
                    sign = -&sign;
                }
                let coeff = match &self.peek().tok {
                    Tok::Ident(n) if scope.is_family(n) => CoeffPoly::constant(sign),
                    _ => {
                        let e = self.expr(&scope)?;
                        let t = self.next();
                        if t.tok != Tok::Star {
                            return self.syntax(
                                t.span,
                                format!("expected `*` before a target term, found {}", t.tok),
                            );
                        }
                        e.scale(&sign)
                    }
                };
                let term = self.target(&scope, coeff)?;
                terms.push(term);
                match self.peek().tok.clone() {
                    Tok::Plus => {
                        self.next();
                    }
                    Tok::Minus => {
                        // consumed by the next summand's unary minus
                    }
                    Tok::Semi => break,
                    other => {
                        let span = self.peek().span;
                        return self
                            .syntax(span, format!("expected `+`, `-`, or `;`, found {other}"));
                    }
                }
            }
        }
        self.expect(Tok::Semi)?;

        let key = (x.family, y.family);
        let rules = if is_bracket { &mut self.bracket_rules } else { &mut self.product_rules };
        if x.family != y.family && rules.contains_key(&(y.family, x.family)) {
            return Err(ParseError::new(
                stmt_span,
                ParseErrorKind::Validation,
                format!(
                    "both orientations of the {}/{} pair are declared; keep one and let the \
                     engine derive the other",
                    self.families[x.family].name, self.families[y.family].name
                ),
            ));
        }
        if is_bracket {
            let sig = Signature {
                families: self.families.clone(),
                params: self.params.clone(),
                generators: self.generators.clone(),
            };
            for term in &terms {
                check_rule_homogeneous(&sig, x.family, y.family, term).map_err(|e| {
                    ParseError::new(stmt_span, ParseErrorKind::Validation, e.to_string())
                })?;
            }
        }
        rules.entry(key).or_default().extend(terms);
        Ok(())
    }

    fn check_var_name(&self, name: &str, span: Span) -> Result<(), ParseError> {
        if self.family_id(name).is_some() {
            return Err(ParseError::new(
                span,
                ParseErrorKind::Validation,
                format!("pattern variable `{name}` shadows a family name"),
            ));
        }
        if self.params.contains_key(name) {
            return Err(ParseError::new(
                span,
                ParseErrorKind::Validation,
                format!("pattern variable `{name}` shadows a parameter"),
            ));
        }
        Ok(())
    }

    fn pattern(&mut self) -> Result<Pattern, ParseError> {
        let (fname, fspan) = self.expect_ident("a family name")?;
        let Some(family) = self.family_id(&fname) else {
            return Err(ParseError::new(
                fspan,
                ParseErrorKind::UnknownName,
                format!("unknown family `{fname}` (families must be declared before rules)"),
            ));
        };
        self.expect(Tok::LParen)?;
        let (first, first_span) = self.expect_ident("a pattern variable")?;
        let arity = self.generators.len();
        let pat = if arity > 0 {
            self.expect(Tok::Semi).map_err(|_| {
                ParseError::new(
                    first_span,
                    ParseErrorKind::Validation,
                    format!(
                        "family `{fname}` is group-graded; patterns need a group variable: \
                         `{fname}({first}; m)`"
                    ),
                )
            })?;
            let (idx, _) = self.expect_ident("an index variable")?;
            Pattern { family, alpha_var: Some(first), idx_var: idx }
        } else {
            Pattern { family, alpha_var: None, idx_var: first }
        };
        self.expect(Tok::RParen)?;
        Ok(pat)
    }

    /// `coefficient * Family(alpha_expr; idx_expr)` tail after the
    /// coefficient: parses the target and validates its positions.
    fn target(&mut self, scope: &Scope, coeff: CoeffPoly) -> Result<RuleTerm, ParseError> {
        let (fname, fspan) = self.expect_ident("a target family name")?;
        let Some(target) = self.family_id(&fname) else {
            return Err(ParseError::new(
                fspan,
                ParseErrorKind::UnknownName,
                format!("unknown family `{fname}`"),
            ));
        };
        self.expect(Tok::LParen)?;
        let arity = self.generators.len();
        let alpha_const = if arity > 0 {
            let aspan = self.peek().span;
            let alpha = self.expr(scope)?;
            self.expect(Tok::Semi)?;
            self.alpha_shift(&alpha, aspan)?
        } else {
            Vec::new()
        };
        let ispan = self.peek().span;
        let idx = self.expr(scope)?;
        self.expect(Tok::RParen)?;
        let i_const = self.index_shift(&idx, ispan)?;
        Ok(RuleTerm { target, alpha_const, i_const, coeff })
    }

    /// Target group position: `p + q` plus an optional constant that must be
    /// an integer multiple of the single generator.
    fn alpha_shift(&self, poly: &CoeffPoly, span: Span) -> Result<Vec<i64>, ParseError> {
        let fail = |msg: &str| ParseError::new(span, ParseErrorKind::Validation, msg.to_string());
        let aff = poly.as_affine().ok_or_else(|| {
            fail("target group position must be affine in the pattern variables")
        })?;
        let one = GaussianRational::one();
        if aff.coeffs[Var::AlphaX as usize] != one || aff.coeffs[Var::AlphaY as usize] != one {
            return Err(fail(
                "target group position must use both group variables exactly once",
            ));
        }
        if !aff.coeffs[Var::IdxX as usize].is_zero() || !aff.coeffs[Var::IdxY as usize].is_zero() {
            return Err(fail("target group position must not involve index variables"));
        }
        let arity = self.generators.len();
        if aff.constant.is_zero() {
            return Ok(vec![0; arity]);
        }
        if arity == 1 {
            let ratio = &aff.constant * &self.generators[0].inv().expect("nonzero generator");
            if let Some(k) = ratio.to_i64() {
                return Ok(vec![k]);
            }
            return Err(fail(
                "constant group shift must be an integer multiple of the generator",
            ));
        }
        Err(fail(
            "constant group shifts are only supported with a single declared generator",
        ))
    }

    /// Target index position: `m + n` plus an integer constant.
    fn index_shift(&self, poly: &CoeffPoly, span: Span) -> Result<i64, ParseError> {
        let fail = |msg: &str| ParseError::new(span, ParseErrorKind::Validation, msg.to_string());
        let aff = poly
            .as_affine()
            .ok_or_else(|| fail("target index must be affine in the pattern variables"))?;
        let one = GaussianRational::one();
        if aff.coeffs[Var::IdxX as usize] != one || aff.coeffs[Var::IdxY as usize] != one {
            return Err(fail("target index must use both index variables exactly once"));
        }
        if !aff.coeffs[Var::AlphaX as usize].is_zero()
            || !aff.coeffs[Var::AlphaY as usize].is_zero()
        {
            return Err(fail("target index must not involve group variables"));
        }
        aff.constant
            .to_i64()
            .ok_or_else(|| fail("constant index shift must be an integer"))
    }

    /// Constant scalar expression (headers, generators, offsets, grades):
    /// the full expression grammar with no variables in scope.
    fn constant_expr(&mut self) -> Result<GaussianRational, ParseError> {
        let span = self.peek().span;
        let scope = Scope::empty();
        let poly = self.expr(&scope)?;
        let aff = poly
            .as_affine()
            .filter(|a| a.coeffs.iter().all(|c| c.is_zero()))
            .ok_or_else(|| {
                ParseError::new(
                    span,
                    ParseErrorKind::Validation,
                    "expected a constant scalar expression",
                )
            })?;
        Ok(aff.constant)
    }

    // expression grammar: sum -> prod (('+'|'-') prod)*; prod -> factor
    // ('*' factor)* stopping before a family name; factor -> ('-'|'+')*
    // atom; atom -> number | imaginary | name | '(' sum ')'

    fn expr(&mut self, scope: &Scope) -> Result<CoeffPoly, ParseError> {
        let mut acc = self.expr_prod(scope)?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    acc = acc.add(&self.expr_prod(scope)?);
                }
                Tok::Minus => {
                    self.next();
                    acc = acc.sub(&self.expr_prod(scope)?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn expr_prod(&mut self, scope: &Scope) -> Result<CoeffPoly, ParseError> {
        let mut acc = self.expr_factor(scope)?;
        while self.peek().tok == Tok::Star {
            // a following family name means the `*` belongs to
            // `coefficient * Target`, not to this expression
            if matches!(&self.peek2().tok, Tok::Ident(n) if scope.is_family(n)) {
                return Ok(acc);
            }
            self.next();
            acc = acc.mul(&self.expr_factor(scope)?);
        }
        Ok(acc)
    }

    fn expr_factor(&mut self, scope: &Scope) -> Result<CoeffPoly, ParseError> {
        match self.peek().tok {
            Tok::Minus => {
                self.next();
                Ok(self.expr_factor(scope)?.neg())
            }
            Tok::Plus => {
                self.next();
                self.expr_factor(scope)
            }
            _ => self.expr_atom(scope),
        }
    }

    fn expr_atom(&mut self, scope: &Scope) -> Result<CoeffPoly, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Number(r) => Ok(CoeffPoly::constant(GaussianRational::new(
                r,
                BigRational::from_integer(0.into()),
            ))),
            Tok::Imag(r) => Ok(CoeffPoly::constant(GaussianRational::new(
                BigRational::from_integer(0.into()),
                r,
            ))),
            Tok::LParen => {
                let inner = self.expr(scope)?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some((_, var)) = scope.vars.iter().find(|(n, _)| *n == name) {
                    return Ok(CoeffPoly::var(*var));
                }
                if let Some(value) = scope.params.get(&name) {
                    return Ok(CoeffPoly::constant(value.clone()));
                }
                if name == "i" {
                    return Ok(CoeffPoly::constant(GaussianRational::i()));
                }
                if scope.is_family(&name) {
                    return self.syntax(
                        t.span,
                        format!("family name `{name}` cannot appear inside a coefficient"),
                    );
                }
                Err(ParseError::new(
                    t.span,
                    ParseErrorKind::UnknownName,
                    format!("unknown name `{name}`"),
                ))
            }
            other => self.syntax(t.span, format!("expected a scalar or variable, found {other}")),
        }
    }
}

fn pick(candidates: &[&str], taken: &mut Vec<String>) -> String {
    for c in candidates {
        if !taken.iter().any(|t| t == c) {
            taken.push(c.to_string());
            return c.to_string();
        }
    }
    // exhausted (absurd in practice): number a fallback
    let mut n = 0;
    loop {
        let name = format!("v{n}");
        if !taken.iter().any(|t| t == &name) {
            taken.push(name.clone());
            return name;
        }
        n += 1;
    }
}

fn render_scalar_factor(c: &GaussianRational) -> String {
    let text = c.to_string();
    if text[1..].contains('+') || text[1..].contains('-') {
        format!("({text})")
    } else {
        text
    }
}

fn render_rules(
    out: &mut String,
    keyword: &str,
    alg: &AlgebraDef,
    rules: &RuleMap,
    names: &[String; 4],
) {
    let arity = alg.sig.generators.len();
    let pattern = |fam: usize, alpha: &str, idx: &str| {
        if arity > 0 {
            format!("{}({}; {})", alg.family_name(fam), alpha, idx)
        } else {
            format!("{}({})", alg.family_name(fam), idx)
        }
    };
    let shifted = |base: String, k: i64| match k.cmp(&0) {
        std::cmp::Ordering::Equal => base,
        std::cmp::Ordering::Greater => format!("{base} + {k}"),
        std::cmp::Ordering::Less => format!("{base} - {}", -k),
    };
    for (&(fx, fy), terms) in rules {
        let lhs = format!("[{}, {}]", pattern(fx, &names[0], &names[2]), pattern(fy, &names[1], &names[3]));
        let rhs = if terms.is_empty() {
            "0".to_string()
        } else {
            let rendered: Vec<String> = terms
                .iter()
                .map(|t| {
                    let name_refs: [&str; 4] =
                        [&names[0], &names[1], &names[2], &names[3]];
                    let target = if arity > 0 {
                        // multi-generator shifts cannot occur here: parsing
                        // restricts them and built-ins never emit them
                        let k = *t.alpha_const.first().unwrap_or(&0);
                        let alpha = shifted(format!("{} + {}", names[0], names[1]), k);
                        format!(
                            "{}({}; {})",
                            alg.family_name(t.target),
                            alpha,
                            shifted(format!("{} + {}", names[2], names[3]), t.i_const)
                        )
                    } else {
                        format!(
                            "{}({})",
                            alg.family_name(t.target),
                            shifted(format!("{} + {}", names[2], names[3]), t.i_const)
                        )
                    };
                    match t.coeff.as_affine() {
                        Some(aff) if aff.coeffs.iter().all(|c| c.is_zero()) => {
                            if aff.constant.is_one() {
                                target
                            } else {
                                format!("{} * {}", render_scalar_factor(&aff.constant), target)
                            }
                        }
                        _ => format!("({}) * {}", t.coeff.render(&name_refs), target),
                    }
                })
                .collect();
            rendered.join(" + ")
        };
        out.push_str(&format!("    {keyword} {lhs} = {rhs};\n"));
    }
}

/// Canonical text for an algebra and optional product; `parse_document`
/// accepts the output and reproduces the inputs exactly.
pub fn render_document(alg: &AlgebraDef, product: Option<&CommProduct>) -> String {
    let mut taken: Vec<String> = alg.sig.families.iter().map(|f| f.name.clone()).collect();
    taken.extend(alg.sig.params.keys().cloned());
    taken.push("i".to_string());
    let names: [String; 4] = [
        pick(&["p", "q", "u", "v", "w"], &mut taken),
        pick(&["q", "r", "u", "v", "w"], &mut taken),
        pick(&["m", "n", "k", "l", "s"], &mut taken),
        pick(&["n", "k", "l", "s", "t"], &mut taken),
    ];

    let mut out = String::new();
    let params: Vec<String> =
        alg.sig.params.iter().map(|(k, v)| format!("{k} = {v}")).collect();
    out.push_str(&format!("algebra {}({}) {{\n", alg.name, params.join(", ")));
    if !alg.sig.generators.is_empty() {
        let gens: Vec<String> = alg.sig.generators.iter().map(|g| g.to_string()).collect();
        out.push_str(&format!("    generators {};\n", gens.join(", ")));
    }
    for f in &alg.sig.families {
        out.push_str(&format!(
            "    family {} offset {} grade ({}, {});\n",
            f.name, f.index_offset, f.grade_u, f.grade_v
        ));
    }
    render_rules(&mut out, "bracket", alg, &alg.rules, &names);
    if let Some(p) = product {
        render_rules(&mut out, "product", alg, p.rules(), &names);
    }
    out.push_str("}\n");
    out
}

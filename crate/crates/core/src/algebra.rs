//! Graded Lie algebras presented by structure-constant rules over a basis
//! indexed by an optional group part (an integer combination of fixed
//! generators) and an integer index. Brackets of basis elements are given by
//! one-sided rules; the reversed orientation is derived by antisymmetry.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::coeff::{CoeffPoly, Var};
use crate::scalar::GaussianRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("duplicate family `{0}`")]
    DuplicateFamily(String),
    #[error("family `{family}` expects {expected} group coordinates, got {got}")]
    WrongCoordCount { family: String, expected: usize, got: usize },
    #[error("rules declared for both orientations of ({0}, {1}); declare one and let antisymmetry derive the other")]
    BothOrientations(String, String),
    #[error("rule [{left}, {right}] -> {target} is not homogeneous for the declared grading")]
    GradingInhomogeneous { left: String, right: String, target: String },
    #[error("unknown catalog algebra `{0}`")]
    UnknownAlgebra(String),
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("parameter `{0}` is invalid: {1}")]
    InvalidParameter(String, String),
    #[error("algebra `{0}` takes no parameter `{1}`")]
    UnexpectedParameter(String, String),
    #[error("algebra `{0}` takes no group generators")]
    UnexpectedGenerators(String),
    #[error("algebra `{0}` requires at least one nonzero group generator")]
    MissingGenerators(String),
    #[error("group generators must be nonzero")]
    ZeroGenerator,
    #[error("invalid window: {0}")]
    BadWindow(String),
}

/// Error produced while parsing an element literal.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid element at offset {pos}: {message}")]
pub struct ElementParseError {
    pub pos: usize,
    pub message: String,
}

/// One basis family. `index_offset` is the rational added to the stored
/// integer index when the textbook index is fractional (a family stored as
/// `Y(m)` with offset 1/2 denotes Y_{m+1/2}). `grade_u`/`grade_v` define
/// grade(b) = u * alpha(b) + v * (i + index_offset).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyDecl {
    pub name: String,
    pub index_offset: BigRational,
    pub grade_u: GaussianRational,
    pub grade_v: GaussianRational,
}

/// Shared shape of an algebra and of any commutative product over the same
/// basis: the families, the instantiated parameter values, and the group
/// generators for the alpha part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub families: Vec<FamilyDecl>,
    pub params: BTreeMap<String, GaussianRational>,
    pub generators: Vec<GaussianRational>,
}

impl Signature {
    pub fn family_id(&self, name: &str) -> Option<usize> {
        self.families.iter().position(|f| f.name == name)
    }
}

/// A basis symbol: family id, integer coordinates of the group part over the
/// signature's generators, and the stored integer index. Ordering is family
/// declaration order, then lexicographic coordinates, then index; this is the
/// canonical term order everywhere.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BasisIndex {
    pub(crate) family: usize,
    pub(crate) coords: Vec<i64>,
    pub(crate) i: i64,
}

impl BasisIndex {
    pub(crate) fn raw(family: usize, coords: Vec<i64>, i: i64) -> Self {
        BasisIndex { family, coords, i }
    }

    pub fn family(&self) -> usize {
        self.family
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn index(&self) -> i64 {
        self.i
    }
}

/// Sparse linear combination of basis symbols with Gaussian-rational
/// coefficients. Zero coefficients are dropped on the spot, so two equal
/// elements always have identical term maps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Element {
    terms: BTreeMap<BasisIndex, GaussianRational>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn from_term(b: BasisIndex, c: GaussianRational) -> Self {
        let mut e = Element::zero();
        e.add_term(b, c);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisIndex, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, b: &BasisIndex) -> GaussianRational {
        self.terms.get(b).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn add_term(&mut self, b: BasisIndex, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&b) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&b);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(b, c);
            }
        }
    }

    /// self += c * other
    pub fn add_scaled(&mut self, other: &Element, c: &GaussianRational) {
        for (b, v) in &other.terms {
            self.add_term(b.clone(), v * c);
        }
    }

    pub fn add(&self, other: &Element) -> Element {
        let mut out = self.clone();
        out.add_scaled(other, &GaussianRational::one());
        out
    }

    pub fn sub(&self, other: &Element) -> Element {
        let mut out = self.clone();
        out.add_scaled(other, &-&GaussianRational::one());
        out
    }

    pub fn scale(&self, c: &GaussianRational) -> Element {
        let mut out = Element::zero();
        out.add_scaled(self, c);
        out
    }

    pub fn neg(&self) -> Element {
        self.scale(&-&GaussianRational::one())
    }
}

/// One summand of a rule right-hand side: the target family, constant shifts
/// added to the combined group part and integer index, and the structure
/// constant as a polynomial in the four index variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleTerm {
    pub target: usize,
    pub alpha_const: Vec<i64>,
    pub i_const: i64,
    pub coeff: CoeffPoly,
}

/// Rules are keyed by the ordered family pair they were declared for. For a
/// cross-family pair only one orientation may be declared; evaluation of the
/// other orientation negates (brackets) or mirrors (products) the declared
/// one. Same-family rules are evaluated positionally as declared.
pub type RuleMap = BTreeMap<(usize, usize), Vec<RuleTerm>>;

/// Inclusive index window plus a bound on the absolute value of each group
/// coordinate. Enumeration order: family declaration order, then
/// lexicographic coordinates, then index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub alpha_coeff_bound: i64,
    pub i_min: i64,
    pub i_max: i64,
}

impl Window {
    pub fn new(alpha_coeff_bound: i64, i_min: i64, i_max: i64) -> Result<Self, AlgebraError> {
        if i_min > i_max {
            return Err(AlgebraError::BadWindow(format!("i_min {i_min} > i_max {i_max}")));
        }
        if alpha_coeff_bound < 0 {
            return Err(AlgebraError::BadWindow("negative coordinate bound".to_string()));
        }
        Ok(Window { alpha_coeff_bound, i_min, i_max })
    }

    pub fn contains(&self, b: &BasisIndex) -> bool {
        b.i >= self.i_min
            && b.i <= self.i_max
            && b.coords.iter().all(|c| c.abs() <= self.alpha_coeff_bound)
    }

    /// True when every basis index inside `self` is also inside `outer`.
    pub fn is_inside(&self, outer: &Window) -> bool {
        self.alpha_coeff_bound <= outer.alpha_coeff_bound
            && self.i_min >= outer.i_min
            && self.i_max <= outer.i_max
    }

    fn coord_vectors(&self, arity: usize) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        let mut cur = vec![-self.alpha_coeff_bound; arity];
        loop {
            out.push(cur.clone());
            // odometer increment, last coordinate fastest... lexicographic
            // order requires the first coordinate to vary slowest, so step
            // from the end.
            let mut k = arity;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if cur[k] < self.alpha_coeff_bound {
                    cur[k] += 1;
                    for c in cur.iter_mut().skip(k + 1) {
                        *c = -self.alpha_coeff_bound;
                    }
                    break;
                }
            }
        }
    }
}

/// Violation record from a Jacobi sweep: the offending basis triple and the
/// exact nonzero residual of the cyclic bracket sum.
#[derive(Debug, Clone)]
pub struct JacobiViolation {
    pub x: BasisIndex,
    pub y: BasisIndex,
    pub z: BasisIndex,
    pub residual: Element,
}

#[derive(Debug, Clone)]
pub struct JacobiReport {
    pub triples_checked: usize,
    pub violations: Vec<JacobiViolation>,
}

impl JacobiReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A finished algebra: named, parameter-instantiated, with validated rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraDef {
    pub name: String,
    pub sig: Signature,
    pub rules: RuleMap,
}

impl AlgebraDef {
    /// Validates family references, coordinate arities, orientation
    /// uniqueness, and homogeneity of every rule term with respect to the
    /// declared grading.
    pub fn new(name: String, sig: Signature, rules: RuleMap) -> Result<Self, AlgebraError> {
        let mut seen = Vec::new();
        for f in &sig.families {
            if seen.contains(&&f.name) {
                return Err(AlgebraError::DuplicateFamily(f.name.clone()));
            }
            seen.push(&f.name);
        }
        validate_rule_structure(&sig, &rules)?;
        for (&(fx, fy), terms) in &rules {
            for term in terms {
                check_rule_homogeneous(&sig, fx, fy, term)?;
            }
        }
        Ok(AlgebraDef { name, sig, rules })
    }

    pub fn family_id(&self, name: &str) -> Result<usize, AlgebraError> {
        self.sig.family_id(name).ok_or_else(|| AlgebraError::UnknownFamily(name.to_string()))
    }

    pub fn family_name(&self, id: usize) -> &str {
        &self.sig.families[id].name
    }

    /// Validated basis constructor.
    pub fn basis(&self, family: &str, coords: &[i64], i: i64) -> Result<BasisIndex, AlgebraError> {
        let id = self.family_id(family)?;
        if coords.len() != self.sig.generators.len() {
            return Err(AlgebraError::WrongCoordCount {
                family: family.to_string(),
                expected: self.sig.generators.len(),
                got: coords.len(),
            });
        }
        Ok(BasisIndex::raw(id, coords.to_vec(), i))
    }

    pub(crate) fn coords_value(&self, coords: &[i64]) -> GaussianRational {
        let mut acc = GaussianRational::zero();
        for (c, g) in coords.iter().zip(&self.sig.generators) {
            acc = &acc + &(&GaussianRational::from_int(*c) * g);
        }
        acc
    }

    /// The group part of a basis symbol as an exact scalar.
    pub fn alpha_value(&self, b: &BasisIndex) -> GaussianRational {
        self.coords_value(&b.coords)
    }

    /// grade(b) = u * alpha(b) + v * (i + offset)
    pub fn grade(&self, b: &BasisIndex) -> GaussianRational {
        let fam = &self.sig.families[b.family];
        let idx = GaussianRational::new(
            BigRational::from_integer(BigInt::from(b.i)) + &fam.index_offset,
            BigRational::zero(),
        );
        &(&fam.grade_u * &self.alpha_value(b)) + &(&fam.grade_v * &idx)
    }

    /// All basis symbols inside the window, in canonical order.
    pub fn enumerate_basis(&self, window: &Window) -> Vec<BasisIndex> {
        let arity = self.sig.generators.len();
        let coord_sets = window.coord_vectors(arity);
        let mut out = Vec::new();
        for fam in 0..self.sig.families.len() {
            for coords in &coord_sets {
                for i in window.i_min..=window.i_max {
                    out.push(BasisIndex::raw(fam, coords.clone(), i));
                }
            }
        }
        out
    }

    /// Bracket of two basis symbols. The declared orientation is applied
    /// positionally; the reverse orientation of a cross-family rule is
    /// derived with a sign flip.
    pub fn bracket_basis(&self, x: &BasisIndex, y: &BasisIndex) -> Element {
        combine_basis(&self.sig, &self.rules, Reversal::Negate, x, y)
    }

    /// Bilinear extension of `bracket_basis`.
    pub fn bracket(&self, x: &Element, y: &Element) -> Element {
        let mut acc = Element::zero();
        for (bx, cx) in x.terms() {
            for (by, cy) in y.terms() {
                let prod = self.bracket_basis(bx, by);
                acc.add_scaled(&prod, &(cx * cy));
            }
        }
        acc
    }

    fn bracket_basis_elem(&self, x: &BasisIndex, e: &Element) -> Element {
        let mut acc = Element::zero();
        for (b, c) in e.terms() {
            acc.add_scaled(&self.bracket_basis(x, b), c);
        }
        acc
    }

    /// Evaluates the cyclic Jacobi sum over every ascending basis triple in
    /// the window and reports the exact residual of each violation.
    pub fn check_jacobi(&self, window: &Window) -> JacobiReport {
        let basis = self.enumerate_basis(window);
        let mut violations = Vec::new();
        let mut triples = 0usize;
        for a in 0..basis.len() {
            for b in (a + 1)..basis.len() {
                let xy = self.bracket_basis(&basis[a], &basis[b]);
                for c in (b + 1)..basis.len() {
                    triples += 1;
                    let (x, y, z) = (&basis[a], &basis[b], &basis[c]);
                    let mut residual = self.bracket_basis_elem(x, &self.bracket_basis(y, z));
                    residual = residual.add(&self.bracket_basis_elem(y, &self.bracket_basis(z, x)));
                    residual = residual.add(&self.bracket_basis_elem(z, &xy));
                    if !residual.is_zero() {
                        violations.push(JacobiViolation {
                            x: x.clone(),
                            y: y.clone(),
                            z: z.clone(),
                            residual,
                        });
                    }
                }
            }
        }
        JacobiReport { triples_checked: triples, violations }
    }

    pub fn render_basis(&self, b: &BasisIndex) -> String {
        let name = self.family_name(b.family);
        if b.coords.is_empty() {
            format!("{}({})", name, b.i)
        } else {
            let coords: Vec<String> = b.coords.iter().map(|c| c.to_string()).collect();
            format!("{}({};{})", name, coords.join(","), b.i)
        }
    }

    /// Canonical text for an element; `parse_element` accepts the output.
    pub fn render_element(&self, e: &Element) -> String {
        if e.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (n, (b, c)) in e.terms().enumerate() {
            let mut coeff = c.clone();
            if n == 0 {
                if coeff.is_real() && coeff.re() < &BigRational::zero() {
                    out.push('-');
                    coeff = -&coeff;
                }
            } else if coeff.is_real() && coeff.re() < &BigRational::zero() {
                out.push_str(" - ");
                coeff = -&coeff;
            } else {
                out.push_str(" + ");
            }
            if !coeff.is_one() {
                let text = coeff.to_string();
                if text[1..].contains('+') || text[1..].contains('-') {
                    out.push_str(&format!("({text})"));
                } else {
                    out.push_str(&text);
                }
                out.push('*');
            }
            out.push_str(&self.render_basis(b));
        }
        out
    }

    /// Parses `term (('+'|'-') term)*` where term is `[scalar '*'] basis` and
    /// basis is `NAME '(' [coords ';'] index ')'`. Scalar literals must start
    /// with a digit or be parenthesized.
    pub fn parse_element(&self, text: &str) -> Result<Element, ElementParseError> {
        ElementParser { alg: self, bytes: text.as_bytes(), pos: 0 }.parse()
    }
}

/// grade(target(alpha+beta+ca, i+j+ci)) must equal grade(x) + grade(y)
/// identically in alpha, beta, i, j. Matching coefficients variable by
/// variable gives four equalities of grade coefficients plus one constant
/// equation involving the offsets and the rule's constant shifts.
pub(crate) fn check_rule_homogeneous(
    sig: &Signature,
    fx: usize,
    fy: usize,
    term: &RuleTerm,
) -> Result<(), AlgebraError> {
    let f = &sig.families[fx];
    let g = &sig.families[fy];
    let h = &sig.families[term.target];
    let fail = || AlgebraError::GradingInhomogeneous {
        left: f.name.clone(),
        right: g.name.clone(),
        target: h.name.clone(),
    };
    if h.grade_u != f.grade_u || h.grade_u != g.grade_u || h.grade_v != f.grade_v || h.grade_v != g.grade_v
    {
        return Err(fail());
    }
    let mut ca_value = GaussianRational::zero();
    for (c, gen) in term.alpha_const.iter().zip(&sig.generators) {
        ca_value = &ca_value + &(&GaussianRational::from_int(*c) * gen);
    }
    let off =
        |fam: &FamilyDecl| GaussianRational::new(fam.index_offset.clone(), BigRational::zero());
    let lhs = &(&h.grade_u * &ca_value)
        + &(&h.grade_v * &(&GaussianRational::from_int(term.i_const) + &off(h)));
    let rhs = &(&f.grade_v * &off(f)) + &(&g.grade_v * &off(g));
    if lhs != rhs {
        return Err(fail());
    }
    Ok(())
}

/// Family references, coordinate arities, and orientation uniqueness —
/// everything about a rule table that holds for brackets and commutative
/// products alike (gradings are bracket-specific).
pub(crate) fn validate_rule_structure(sig: &Signature, rules: &RuleMap) -> Result<(), AlgebraError> {
    let nf = sig.families.len();
    for (&(fx, fy), terms) in rules {
        if fx >= nf || fy >= nf {
            return Err(AlgebraError::UnknownFamily(format!("#{}", fx.max(fy))));
        }
        if fx != fy && rules.contains_key(&(fy, fx)) && fx > fy {
            return Err(AlgebraError::BothOrientations(
                sig.families[fy].name.clone(),
                sig.families[fx].name.clone(),
            ));
        }
        for term in terms {
            if term.target >= nf {
                return Err(AlgebraError::UnknownFamily(format!("#{}", term.target)));
            }
            if term.alpha_const.len() != sig.generators.len() {
                return Err(AlgebraError::WrongCoordCount {
                    family: sig.families[term.target].name.clone(),
                    expected: sig.generators.len(),
                    got: term.alpha_const.len(),
                });
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Reversal {
    /// Lie bracket: reversed orientation negates.
    Negate,
    /// Commutative product: reversed orientation keeps the sign.
    Keep,
}

/// Shared rule engine for brackets and commutative products.
pub(crate) fn combine_basis(
    sig: &Signature,
    rules: &RuleMap,
    reversal: Reversal,
    x: &BasisIndex,
    y: &BasisIndex,
) -> Element {
    if let Some(terms) = rules.get(&(x.family, y.family)) {
        eval_rule_terms(sig, terms, x, y, false)
    } else if let Some(terms) = rules.get(&(y.family, x.family)) {
        let mut out = eval_rule_terms(sig, terms, y, x, false);
        if reversal == Reversal::Negate {
            out = out.neg();
        }
        out
    } else {
        Element::zero()
    }
}

fn eval_rule_terms(
    sig: &Signature,
    terms: &[RuleTerm],
    first: &BasisIndex,
    second: &BasisIndex,
    _: bool,
) -> Element {
    let value = |coords: &[i64]| {
        let mut acc = GaussianRational::zero();
        for (c, g) in coords.iter().zip(&sig.generators) {
            acc = &acc + &(&GaussianRational::from_int(*c) * g);
        }
        acc
    };
    let vals = [
        value(&first.coords),
        value(&second.coords),
        GaussianRational::from_int(first.i),
        GaussianRational::from_int(second.i),
    ];
    let mut out = Element::zero();
    for term in terms {
        let c = term.coeff.eval(&vals);
        if c.is_zero() {
            continue;
        }
        let coords: Vec<i64> = first
            .coords
            .iter()
            .zip(&second.coords)
            .zip(&term.alpha_const)
            .map(|((a, b), s)| a + b + s)
            .collect();
        let idx = first.i + second.i + term.i_const;
        out.add_term(BasisIndex::raw(term.target, coords, idx), c);
    }
    out
}

/// Convenience constructors for rule polynomials.
pub mod poly {
    use super::*;

    pub fn alpha_x() -> CoeffPoly {
        CoeffPoly::var(Var::AlphaX)
    }
    pub fn alpha_y() -> CoeffPoly {
        CoeffPoly::var(Var::AlphaY)
    }
    pub fn idx_x() -> CoeffPoly {
        CoeffPoly::var(Var::IdxX)
    }
    pub fn idx_y() -> CoeffPoly {
        CoeffPoly::var(Var::IdxY)
    }
    pub fn constant(c: GaussianRational) -> CoeffPoly {
        CoeffPoly::constant(c)
    }
}

struct ElementParser<'a> {
    alg: &'a AlgebraDef,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ElementParser<'a> {
    fn err<T>(&self, message: &str) -> Result<T, ElementParseError> {
        Err(ElementParseError { pos: self.pos, message: message.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, ch: u8) -> Result<(), ElementParseError> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("expected `{}`", ch as char))
        }
    }

    fn integer(&mut self) -> Result<i64, ElementParseError> {
        let start = self.pos;
        if matches!(self.peek(), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<i64>().map_err(|_| ElementParseError {
            pos: start,
            message: "expected integer".to_string(),
        })
    }

    fn ident(&mut self) -> Result<String, ElementParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected family name");
        }
        Ok(std::str::from_utf8(&self.bytes[start..self.pos]).unwrap().to_string())
    }

    fn basis(&mut self) -> Result<BasisIndex, ElementParseError> {
        let at = self.pos;
        let name = self.ident()?;
        self.skip_ws();
        self.expect(b'(')?;
        self.skip_ws();
        let arity = self.alg.sig.generators.len();
        let mut coords = Vec::new();
        if arity > 0 {
            for k in 0..arity {
                if k > 0 {
                    self.skip_ws();
                    self.expect(b',')?;
                    self.skip_ws();
                }
                coords.push(self.integer()?);
            }
            self.skip_ws();
            self.expect(b';')?;
            self.skip_ws();
        }
        let i = self.integer()?;
        self.skip_ws();
        self.expect(b')')?;
        self.alg.basis(&name, &coords, i).map_err(|e| ElementParseError {
            pos: at,
            message: e.to_string(),
        })
    }

    fn scalar_literal(&mut self) -> Result<GaussianRational, ElementParseError> {
        if self.peek() == Some(b'(') {
            let open = self.pos;
            let mut depth = 0usize;
            let mut end = self.pos;
            while end < self.bytes.len() {
                match self.bytes[end] {
                    b'(' => depth += 1,
                    b')' => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                end += 1;
            }
            if end == self.bytes.len() {
                self.pos = open;
                return self.err("unclosed `(` in coefficient");
            }
            let inner = std::str::from_utf8(&self.bytes[open + 1..end]).unwrap();
            let value = GaussianRational::parse(inner).map_err(|e| ElementParseError {
                pos: open + 1 + e.pos,
                message: e.message,
            })?;
            self.pos = end + 1;
            Ok(value)
        } else {
            // unsigned scalar up to the `*` separator
            let start = self.pos;
            while self.pos < self.bytes.len()
                && (self.bytes[self.pos].is_ascii_digit()
                    || self.bytes[self.pos] == b'/'
                    || self.bytes[self.pos] == b'i')
            {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
            GaussianRational::parse(text).map_err(|e| ElementParseError {
                pos: start + e.pos,
                message: e.message,
            })
        }
    }

    fn parse(mut self) -> Result<Element, ElementParseError> {
        self.skip_ws();
        if self.peek() == Some(b'0') && self.pos + 1 == self.bytes.len() {
            return Ok(Element::zero());
        }
        let mut out = Element::zero();
        let mut first = true;
        loop {
            self.skip_ws();
            let mut sign = GaussianRational::one();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                }
                Some(b'-') => {
                    sign = -&sign;
                    self.pos += 1;
                }
                None if first => return self.err("empty element"),
                None => return self.err("dangling separator"),
                _ if !first => return self.err("expected `+` or `-` between terms"),
                _ => {}
            }
            self.skip_ws();
            let coeff = match self.peek() {
                Some(c) if c.is_ascii_digit() || c == b'(' => {
                    let v = self.scalar_literal()?;
                    self.skip_ws();
                    self.expect(b'*')?;
                    self.skip_ws();
                    v
                }
                _ => GaussianRational::one(),
            };
            let b = self.basis()?;
            out.add_term(b, &sign * &coeff);
            self.skip_ws();
            if self.pos == self.bytes.len() {
                return Ok(out);
            }
            first = false;
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bound {}, i in [{}, {}]", self.alpha_coeff_bound, self.i_min, self.i_max)
    }
}

//! Transposed Poisson structures: commutative associative products that are
//! compatible with the bracket through `2 z*[x,y] = [z*x, y] + [x, z*y]`.
//!
//! Products are rule tables like brackets, but with constant structure
//! coefficients and mirror (not negated) reversed orientation. [`check_tps`]
//! tests commutativity, associativity and compatibility exactly on a window,
//! plus the ordinary Poisson-Leibniz law as an informational extra — for a
//! transposed structure that law is expected to fail. [`solve_tps`] searches
//! for all products whose left-multiplications lie in the span of supplied
//! 1/2-derivation generators, using only linear symmetry constraints, then
//! re-checks each candidate.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::algebra::{
    combine_basis, validate_rule_structure, AlgebraDef, AlgebraError, BasisIndex, Element,
    Reversal, RuleMap, RuleTerm, Signature, Window,
};
use crate::coeff::CoeffPoly;
use crate::halfderiv::{
    check_half_derivation, HalfDerivError, LinearOp, ShiftMap,
};
use crate::linalg::{self, SparseVec};
use crate::scalar::GaussianRational;

#[derive(Debug, Error)]
pub enum TpsError {
    #[error("no built-in product for algebra `{0}`")]
    NoNaturalProduct(String),
    #[error("generator {index} fails the 1/2-derivation check on the solve window")]
    GeneratorFailsCheck { index: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    HalfDeriv(#[from] HalfDerivError),
}

/// Anything that multiplies two elements bilinearly.
pub trait Product {
    fn mul(&self, x: &Element, y: &Element) -> Element;
}

/// A commutative product given by a rule table over the same signature as
/// the algebra it accompanies. Cross-family cells are stored in one
/// orientation and mirrored without a sign; same-family cells are evaluated
/// positionally as declared. Unlike brackets, no grading is imposed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommProduct {
    pub sig: Signature,
    rules: RuleMap,
}

impl CommProduct {
    pub fn new(alg: &AlgebraDef, rules: RuleMap) -> Result<Self, TpsError> {
        validate_rule_structure(&alg.sig, &rules)?;
        Ok(CommProduct { sig: alg.sig.clone(), rules })
    }

    pub fn zero(alg: &AlgebraDef) -> Self {
        CommProduct { sig: alg.sig.clone(), rules: RuleMap::new() }
    }

    pub fn rules(&self) -> &RuleMap {
        &self.rules
    }

    pub fn is_zero(&self) -> bool {
        self.rules.values().all(|terms| terms.is_empty())
    }

    pub fn mul_basis(&self, x: &BasisIndex, y: &BasisIndex) -> Element {
        combine_basis(&self.sig, &self.rules, Reversal::Keep, x, y)
    }
}

impl Product for CommProduct {
    fn mul(&self, x: &Element, y: &Element) -> Element {
        let mut acc = Element::zero();
        for (bx, cx) in x.terms() {
            for (by, cy) in y.terms() {
                acc.add_scaled(&self.mul_basis(bx, by), &(cx * cy));
            }
        }
        acc
    }
}

/// The mutation of a product along a fixed element: `x o y = (x * w) * y`.
/// For a commutative associative base this is again commutative associative,
/// and for well-chosen `w` it stays compatible with the bracket while
/// breaking the ordinary Poisson-Leibniz law.
#[derive(Debug, Clone)]
pub struct MutationProduct {
    pub base: CommProduct,
    pub w: Element,
}

impl Product for MutationProduct {
    fn mul(&self, x: &Element, y: &Element) -> Element {
        self.base.mul(&self.base.mul(x, &self.w), y)
    }
}

fn term(target: usize, i_const: i64, coords: usize) -> RuleTerm {
    RuleTerm {
        target,
        alpha_const: vec![0; coords],
        i_const,
        coeff: CoeffPoly::one(),
    }
}

/// The function-style product each built-in algebra carries: indices add,
/// the "heavier" family wins (L*L = L, L*I = I, L*Y = Y, Y*Y lands in I one
/// step up, L*H = H), and cells between two non-L families vanish unless
/// listed. Unknown algebra names have no built-in product.
pub fn natural_product(alg: &AlgebraDef) -> Result<CommProduct, TpsError> {
    let nc = alg.sig.generators.len();
    let fam = |name: &str| -> Result<usize, TpsError> { Ok(alg.family_id(name)?) };
    let mut rules = RuleMap::new();
    match alg.name.as_str() {
        "witt" => {
            let l = fam("L")?;
            rules.insert((l, l), vec![term(l, 0, nc)]);
        }
        "w_ab" => {
            let (l, i) = (fam("L")?, fam("I")?);
            rules.insert((l, l), vec![term(l, 0, nc)]);
            rules.insert((l, i), vec![term(i, 0, nc)]);
        }
        "w_abs" => {
            let (l, i, y) = (fam("L")?, fam("I")?, fam("Y")?);
            rules.insert((l, l), vec![term(l, 0, nc)]);
            rules.insert((l, i), vec![term(i, 0, nc)]);
            rules.insert((l, y), vec![term(y, 0, nc)]);
            rules.insert((y, y), vec![term(i, 1, nc)]);
        }
        "wn_g" => {
            let l = fam("L")?;
            rules.insert((l, l), vec![term(l, 0, nc)]);
        }
        "hwn_g" => {
            let (l, h) = (fam("L")?, fam("H")?);
            rules.insert((l, l), vec![term(l, 0, nc)]);
            rules.insert((l, h), vec![term(h, 0, nc)]);
        }
        other => return Err(TpsError::NoNaturalProduct(other.to_string())),
    }
    CommProduct::new(alg, rules)
}

/// Left multiplication `x -> w * x` as a linear operator. For a transposed
/// Poisson product every such operator is a 1/2-derivation of the bracket.
pub struct LeftMult<'a, P: Product + ?Sized> {
    product: &'a P,
    w: Element,
}

pub fn left_mult_map<P: Product + ?Sized>(product: &P, w: Element) -> LeftMult<'_, P> {
    LeftMult { product, w }
}

impl<P: Product + ?Sized> LinearOp for LeftMult<'_, P> {
    fn apply_basis(&self, _alg: &AlgebraDef, b: &BasisIndex) -> Result<Element, HalfDerivError> {
        let x = Element::from_term(b.clone(), GaussianRational::one());
        Ok(self.product.mul(&self.w, &x))
    }
}

/// A counterexample to one product law: the inputs and the two sides that
/// should have agreed (restricted to the output window, when one is given).
#[derive(Debug, Clone)]
pub struct TpsWitness {
    pub inputs: Vec<BasisIndex>,
    pub lhs: Element,
    pub rhs: Element,
}

/// Exact law-by-law verdicts over a window; `None` means no counterexample.
#[derive(Debug, Clone)]
pub struct TpsReport {
    pub pairs_checked: usize,
    pub triples_checked: usize,
    pub commutative: Option<TpsWitness>,
    pub associative: Option<TpsWitness>,
    pub compatible: Option<TpsWitness>,
    /// Ordinary Poisson-Leibniz law, informational only: transposed
    /// structures generally break it.
    pub leibniz: Option<TpsWitness>,
}

impl TpsReport {
    /// The three transposed-Poisson laws; Leibniz is deliberately excluded.
    pub fn passed(&self) -> bool {
        self.commutative.is_none() && self.associative.is_none() && self.compatible.is_none()
    }
}

fn restrict(e: &Element, window: Option<&Window>) -> Element {
    match window {
        None => e.clone(),
        Some(w) => {
            let mut out = Element::zero();
            for (b, c) in e.terms() {
                if w.contains(b) {
                    out.add_term(b.clone(), c.clone());
                }
            }
            out
        }
    }
}

fn two() -> GaussianRational {
    GaussianRational::from_int(2)
}

/// Runs all four product laws over every pair/triple of window basis
/// elements, recording the first counterexample of each. With an
/// `output_window`, both sides are compared only on basis elements inside it
/// (for products assembled from truncated data).
pub fn check_tps<P: Product + ?Sized>(
    alg: &AlgebraDef,
    product: &P,
    window: &Window,
    output_window: Option<&Window>,
) -> TpsReport {
    let basis = alg.enumerate_basis(window);
    let n = basis.len();
    let elems: Vec<Element> = basis
        .iter()
        .map(|b| Element::from_term(b.clone(), GaussianRational::one()))
        .collect();
    let mut pairs: Vec<Vec<Element>> = Vec::with_capacity(n);
    for x in &elems {
        pairs.push(elems.iter().map(|y| product.mul(x, y)).collect());
    }

    let mut commutative = None;
    let mut pairs_checked = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            pairs_checked += 1;
            if commutative.is_some() {
                continue;
            }
            let lhs = restrict(&pairs[i][j], output_window);
            let rhs = restrict(&pairs[j][i], output_window);
            if lhs != rhs {
                commutative = Some(TpsWitness {
                    inputs: vec![basis[i].clone(), basis[j].clone()],
                    lhs,
                    rhs,
                });
            }
        }
    }

    let mut associative = None;
    let mut compatible = None;
    let mut leibniz = None;
    let mut triples_checked = 0usize;
    for i in 0..n {
        for j in 0..n {
            let bracket_ij = alg.bracket_basis(&basis[i], &basis[j]);
            for k in 0..n {
                triples_checked += 1;
                let witness = |lhs: Element, rhs: Element| TpsWitness {
                    inputs: vec![basis[i].clone(), basis[j].clone(), basis[k].clone()],
                    lhs,
                    rhs,
                };
                if associative.is_none() {
                    let lhs = restrict(&product.mul(&pairs[i][j], &elems[k]), output_window);
                    let rhs = restrict(&product.mul(&elems[i], &pairs[j][k]), output_window);
                    if lhs != rhs {
                        associative = Some(witness(lhs, rhs));
                    }
                }
                if compatible.is_none() {
                    // 2 x*[y,z] = [x*y, z] + [y, x*z], with x in the product slot
                    let jk = alg.bracket_basis(&basis[j], &basis[k]);
                    let lhs =
                        restrict(&product.mul(&elems[i], &jk).scale(&two()), output_window);
                    let rhs = restrict(
                        &alg.bracket(&pairs[i][j], &elems[k]).add(&alg.bracket(&elems[j], &pairs[i][k])),
                        output_window,
                    );
                    if lhs != rhs {
                        compatible = Some(witness(lhs, rhs));
                    }
                }
                if leibniz.is_none() {
                    // [x, y*z] = [x,y]*z + y*[x,z]
                    let lhs =
                        restrict(&alg.bracket(&elems[i], &pairs[j][k]), output_window);
                    let rhs = restrict(
                        &product
                            .mul(&bracket_ij, &elems[k])
                            .add(&product.mul(&elems[j], &alg.bracket(&elems[i], &elems[k]))),
                        output_window,
                    );
                    if lhs != rhs {
                        leibniz = Some(witness(lhs, rhs));
                    }
                }
            }
        }
    }

    TpsReport { pairs_checked, triples_checked, commutative, associative, compatible, leibniz }
}

#[derive(Debug, Clone)]
pub struct PoissonReport {
    pub triples_checked: usize,
    pub failures: usize,
    pub first_failure: Option<TpsWitness>,
}

impl PoissonReport {
    pub fn is_clean(&self) -> bool {
        self.failures == 0
    }
}

/// Ordinary Poisson-Leibniz law `[x, y*z] = [x,y]*z + y*[x,z]` on its own,
/// counting every failing triple.
pub fn check_poisson<P: Product + ?Sized>(
    alg: &AlgebraDef,
    product: &P,
    window: &Window,
    output_window: Option<&Window>,
) -> PoissonReport {
    let basis = alg.enumerate_basis(window);
    let elems: Vec<Element> = basis
        .iter()
        .map(|b| Element::from_term(b.clone(), GaussianRational::one()))
        .collect();
    let mut triples_checked = 0usize;
    let mut failures = 0usize;
    let mut first_failure = None;
    for (i, x) in elems.iter().enumerate() {
        for (j, y) in elems.iter().enumerate() {
            let xy = alg.bracket(x, y);
            for (k, z) in elems.iter().enumerate() {
                triples_checked += 1;
                let lhs = restrict(&alg.bracket(x, &product.mul(y, z)), output_window);
                let rhs = restrict(
                    &product.mul(&xy, z).add(&product.mul(y, &alg.bracket(x, z))),
                    output_window,
                );
                if lhs != rhs {
                    failures += 1;
                    if first_failure.is_none() {
                        first_failure = Some(TpsWitness {
                            inputs: vec![basis[i].clone(), basis[j].clone(), basis[k].clone()],
                            lhs,
                            rhs,
                        });
                    }
                }
            }
        }
    }
    PoissonReport { triples_checked, failures, first_failure }
}

/// How candidate generators are vetted before the product solve.
#[derive(Debug, Clone, Copy)]
pub enum GeneratorCheck<'a> {
    /// Every generator must satisfy the 1/2-derivation law exactly on the
    /// solve window.
    Exact,
    /// Residuals are compared only inside this window — for generators that
    /// truncate an infinite coefficient family.
    Windowed(&'a Window),
    Skip,
}

/// One candidate product from the solve: the raw coefficients (basis element
/// paired with generator index), whether they are constant along each
/// family, the fitted rule product when they are, and its re-check.
#[derive(Debug, Clone)]
pub struct TpsSolution {
    pub trivial: bool,
    pub constant_fit: bool,
    pub coefficients: Vec<(BasisIndex, usize, GaussianRational)>,
    pub product: Option<CommProduct>,
    pub report: Option<TpsReport>,
}

#[derive(Debug, Clone)]
pub struct TpsSolveOutcome {
    /// Dimension of the symmetry-constraint nullspace (the trivial zero
    /// product is reported separately and not counted).
    pub dimension: usize,
    pub solutions: Vec<TpsSolution>,
}

/// Searches for transposed Poisson products on the window. The ansatz: left
/// multiplication by a basis element X is an unknown combination of the
/// supplied 1/2-derivation generators re-centered at X's index. Compatibility
/// is then automatic, so the only linear constraints are the symmetry
/// equations `X*Y = Y*X`; associativity of each nullspace vector is verified
/// after the fact via [`check_tps`]. The trivial zero product leads the
/// result list, explicitly labeled.
pub fn solve_tps(
    alg: &AlgebraDef,
    generators: &[ShiftMap],
    window: &Window,
    generator_check: GeneratorCheck<'_>,
) -> Result<TpsSolveOutcome, TpsError> {
    let basis = alg.enumerate_basis(window);
    let n = basis.len();
    let ngens = generators.len();

    let check_pairs: Vec<(BasisIndex, BasisIndex)> = {
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                out.push((basis[i].clone(), basis[j].clone()));
            }
        }
        out
    };
    let output_window = match generator_check {
        GeneratorCheck::Exact => {
            for (index, g) in generators.iter().enumerate() {
                if !check_half_derivation(alg, g, &check_pairs, None)?.is_clean() {
                    return Err(TpsError::GeneratorFailsCheck { index });
                }
            }
            None
        }
        GeneratorCheck::Windowed(w) => {
            for (index, g) in generators.iter().enumerate() {
                if !check_half_derivation(alg, g, &check_pairs, Some(w))?.is_clean() {
                    return Err(TpsError::GeneratorFailsCheck { index });
                }
            }
            Some(w)
        }
        GeneratorCheck::Skip => None,
    };

    // recentered generators: row-of-maps per basis element
    let recentered: Vec<Vec<ShiftMap>> = basis
        .iter()
        .map(|b| generators.iter().map(|g| g.recenter(b)).collect())
        .collect();

    // symmetry rows: X*Y - Y*X = 0 coefficient-wise on every output
    let col = |x_idx: usize, kappa: usize| x_idx * ngens + kappa;
    let mut rows: Vec<SparseVec> = Vec::new();
    for xi in 0..n {
        for yi in (xi + 1)..n {
            let mut forms: BTreeMap<BasisIndex, BTreeMap<usize, GaussianRational>> =
                BTreeMap::new();
            for kappa in 0..ngens {
                for (sign, (src, tgt)) in
                    [(GaussianRational::one(), (xi, yi)), (-&GaussianRational::one(), (yi, xi))]
                {
                    let image = recentered[src][kappa].apply_basis(alg, &basis[tgt])?;
                    for (o, c) in image.terms() {
                        let form = forms.entry(o.clone()).or_default();
                        let slot =
                            form.entry(col(src, kappa)).or_insert_with(GaussianRational::zero);
                        *slot = &*slot + &(&sign * c);
                    }
                }
            }
            for (_, form) in forms {
                let row: SparseVec = form.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        }
    }

    let vectors = linalg::nullspace(n * ngens, rows.iter().cloned());
    let dimension = vectors.len();

    let mut solutions = Vec::with_capacity(dimension + 1);
    let zero = CommProduct::zero(alg);
    let zero_report = check_tps(alg, &zero, window, output_window);
    solutions.push(TpsSolution {
        trivial: true,
        constant_fit: true,
        coefficients: Vec::new(),
        product: Some(zero),
        report: Some(zero_report),
    });

    let nf = alg.sig.families.len();
    for v in &vectors {
        let mut dense = vec![GaussianRational::zero(); n * ngens];
        for (c, value) in v {
            dense[*c] = value.clone();
        }
        let coefficients: Vec<(BasisIndex, usize, GaussianRational)> = v
            .iter()
            .map(|(c, value)| (basis[c / ngens].clone(), c % ngens, value.clone()))
            .collect();

        // constant along each family?
        let mut family_coeff = vec![vec![None::<GaussianRational>; ngens]; nf];
        let mut constant_fit = true;
        'fit: for (x_idx, b) in basis.iter().enumerate() {
            for kappa in 0..ngens {
                let value = &dense[col(x_idx, kappa)];
                match &family_coeff[b.family()][kappa] {
                    None => family_coeff[b.family()][kappa] = Some(value.clone()),
                    Some(existing) if existing == value => {}
                    Some(_) => {
                        constant_fit = false;
                        break 'fit;
                    }
                }
            }
        }

        let (product, report) = if constant_fit {
            // cell accumulation keyed by family pair and shift; only the
            // orientation f <= source is emitted, the mirror follows from
            // the symmetry constraints
            let mut cells: BTreeMap<(usize, usize), BTreeMap<(usize, Vec<i64>, i64), GaussianRational>> =
                BTreeMap::new();
            for (f, per_gen) in family_coeff.iter().enumerate() {
                for (kappa, c) in per_gen.iter().enumerate() {
                    let Some(c) = c else { continue };
                    if c.is_zero() {
                        continue;
                    }
                    for t in generators[kappa].terms() {
                        if f > t.source {
                            continue;
                        }
                        let cell = cells.entry((f, t.source)).or_default();
                        let slot = cell
                            .entry((t.target, t.alpha_shift.clone(), t.i_shift))
                            .or_insert_with(GaussianRational::zero);
                        *slot = &*slot + &(c * &t.coeff);
                    }
                }
            }
            let mut rules = RuleMap::new();
            for ((f, g), cell) in cells {
                let terms: Vec<RuleTerm> = cell
                    .into_iter()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|((target, alpha_const, i_const), c)| RuleTerm {
                        target,
                        alpha_const,
                        i_const,
                        coeff: CoeffPoly::constant(c),
                    })
                    .collect();
                if !terms.is_empty() {
                    rules.insert((f, g), terms);
                }
            }
            let product = CommProduct::new(alg, rules)?;
            let report = check_tps(alg, &product, window, output_window);
            (Some(product), Some(report))
        } else {
            (None, None)
        };

        solutions.push(TpsSolution { trivial: false, constant_fit, coefficients, product, report });
    }

    Ok(TpsSolveOutcome { dimension, solutions })
}

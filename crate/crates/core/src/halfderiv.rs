//! 1/2-derivations: linear maps with `f([x,y]) = ([f(x),y] + [x,f(y)]) / 2`.
//!
//! Maps come in two shapes. A [`ShiftMap`] is structured: finitely many
//! terms, each sending a whole source family to a target family with a
//! constant index shift and a constant coefficient. A [`WindowMap`] is a raw
//! assignment of images to the basis of a finite window; the solver produces
//! those. Checking is exact in both cases; for maps that only approximate an
//! infinite sum inside a window, the checker can restrict residual comparison
//! to an output window.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use thiserror::Error;

use crate::algebra::{AlgebraDef, BasisIndex, Element, Window};
use crate::linalg::{self, Echelon, SparseVec};
use crate::scalar::GaussianRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HalfDerivError {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("map term has a zero coefficient")]
    ZeroCoefficient,
    #[error("group shift has wrong arity: expected {expected}, got {got}")]
    WrongShiftArity { expected: usize, got: usize },
    #[error("shift terms do not share a single grade shift")]
    MixedGradeShift,
    #[error("basis index outside the map's domain window")]
    OutsideDomain,
    #[error("nontrivial coefficient families require parameter b = -1")]
    RequiresBMinusOne,
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("index {k} is not congruent to the seed index {seed_m} modulo {n}")]
    IncongruentIndex { k: i64, seed_m: i64, n: i64 },
    #[error("recurrence coefficient vanishes when stepping down from k = {0}")]
    RecurrenceDivisionByZero(i64),
    #[error("class shift d must be nonzero when n != 0")]
    ZeroClassShift,
    #[error("seed at index {0} contradicts the n = 0 constraint (d + k) a = 0")]
    InvalidSeed(i64),
    #[error("inner window is not contained in the outer window")]
    WindowNotNested,
    #[error("interior window must be strictly inside the solve window")]
    CoreNotInterior,
    #[error("closed form requires d != 0")]
    ZeroDenominator,
}

/// One structured term: every source-family basis element maps to the target
/// family with the given constant shifts and coefficient.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ShiftTerm {
    pub source: usize,
    pub target: usize,
    pub alpha_shift: Vec<i64>,
    pub i_shift: i64,
    pub coeff: GaussianRational,
}

/// A finite sum of shift terms, kept in canonical order. All terms of a
/// valid map share one grade shift; `validate` checks that against a given
/// algebra.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ShiftMap {
    terms: Vec<ShiftTerm>,
}

impl ShiftMap {
    pub fn zero() -> Self {
        ShiftMap::default()
    }

    /// `lambda * Id` on every family of the algebra.
    pub fn identity(alg: &AlgebraDef, lambda: GaussianRational) -> Self {
        let arity = alg.sig.generators.len();
        let terms = (0..alg.sig.families.len())
            .map(|f| ShiftTerm {
                source: f,
                target: f,
                alpha_shift: vec![0; arity],
                i_shift: 0,
                coeff: lambda.clone(),
            })
            .collect();
        let mut map = ShiftMap { terms };
        map.normalize();
        map
    }

    pub fn new(alg: &AlgebraDef, terms: Vec<ShiftTerm>) -> Result<Self, HalfDerivError> {
        let mut map = ShiftMap { terms };
        map.normalize();
        map.validate(alg)?;
        Ok(map)
    }

    fn normalize(&mut self) {
        self.terms.retain(|t| !t.coeff.is_zero());
        self.terms.sort_by(|a, b| {
            (a.source, a.target, &a.alpha_shift, a.i_shift).cmp(&(
                b.source,
                b.target,
                &b.alpha_shift,
                b.i_shift,
            ))
        });
    }

    pub fn terms(&self) -> &[ShiftTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest |integer shift| over all terms; 0 for the zero map.
    pub fn max_abs_shift(&self) -> i64 {
        self.terms.iter().map(|t| t.i_shift.abs()).max().unwrap_or(0)
    }

    pub fn max_abs_alpha_shift(&self) -> i64 {
        self.terms
            .iter()
            .flat_map(|t| t.alpha_shift.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }

    fn term_grade_shift(
        alg: &AlgebraDef,
        t: &ShiftTerm,
    ) -> Result<GaussianRational, HalfDerivError> {
        let nf = alg.sig.families.len();
        if t.source >= nf || t.target >= nf {
            return Err(HalfDerivError::UnknownFamily(format!("#{}", t.source.max(t.target))));
        }
        if t.alpha_shift.len() != alg.sig.generators.len() {
            return Err(HalfDerivError::WrongShiftArity {
                expected: alg.sig.generators.len(),
                got: t.alpha_shift.len(),
            });
        }
        let src = &alg.sig.families[t.source];
        let tgt = &alg.sig.families[t.target];
        if src.grade_u != tgt.grade_u || src.grade_v != tgt.grade_v {
            // the shift would depend on the point it acts at
            return Err(HalfDerivError::MixedGradeShift);
        }
        let off =
            |r: &BigRational| GaussianRational::new(r.clone(), BigRational::from_integer(0.into()));
        let d_alpha = alg.coords_value(&t.alpha_shift);
        let idx_part = &GaussianRational::from_int(t.i_shift)
            + &(&off(&tgt.index_offset) - &off(&src.index_offset));
        Ok(&(&tgt.grade_u * &d_alpha) + &(&tgt.grade_v * &idx_part))
    }

    /// The common grade shift of all terms (None for the zero map). A map may
    /// legitimately mix shifts — e.g. a diagonal part plus an off-diagonal
    /// part at a different degree — and then this query reports the mix as an
    /// error while the map itself stays usable.
    pub fn grade_shift(&self, alg: &AlgebraDef) -> Result<Option<GaussianRational>, HalfDerivError> {
        let mut shift: Option<GaussianRational> = None;
        for t in self.terms() {
            let d = Self::term_grade_shift(alg, t)?;
            match &shift {
                None => shift = Some(d),
                Some(existing) if *existing == d => {}
                Some(_) => return Err(HalfDerivError::MixedGradeShift),
            }
        }
        Ok(shift)
    }

    pub fn validate(&self, alg: &AlgebraDef) -> Result<(), HalfDerivError> {
        for t in self.terms() {
            Self::term_grade_shift(alg, t)?;
        }
        Ok(())
    }

    /// Shifts every term by the index of `b`: group shifts gain b's
    /// coordinates, integer shifts gain b's index. Used to re-center a
    /// degree-zero-based family generator at another basis degree.
    pub fn recenter(&self, b: &BasisIndex) -> ShiftMap {
        let mut terms = self.terms.clone();
        for t in &mut terms {
            for (s, c) in t.alpha_shift.iter_mut().zip(b.coords()) {
                *s += c;
            }
            t.i_shift += b.index();
        }
        let mut map = ShiftMap { terms };
        map.normalize();
        map
    }

    pub fn scale(&self, c: &GaussianRational) -> ShiftMap {
        let mut terms = self.terms.clone();
        for t in &mut terms {
            t.coeff = &t.coeff * c;
        }
        let mut map = ShiftMap { terms };
        map.normalize();
        map
    }
}

/// Anything that acts linearly on elements of a fixed algebra.
pub trait LinearOp {
    fn apply_basis(&self, alg: &AlgebraDef, b: &BasisIndex) -> Result<Element, HalfDerivError>;

    fn apply(&self, alg: &AlgebraDef, x: &Element) -> Result<Element, HalfDerivError> {
        let mut acc = Element::zero();
        for (b, c) in x.terms() {
            acc.add_scaled(&self.apply_basis(alg, b)?, c);
        }
        Ok(acc)
    }
}

impl LinearOp for ShiftMap {
    fn apply_basis(&self, alg: &AlgebraDef, b: &BasisIndex) -> Result<Element, HalfDerivError> {
        let arity = alg.sig.generators.len();
        let mut out = Element::zero();
        for t in &self.terms {
            if t.source != b.family() {
                continue;
            }
            if t.alpha_shift.len() != arity {
                return Err(HalfDerivError::WrongShiftArity {
                    expected: arity,
                    got: t.alpha_shift.len(),
                });
            }
            let coords: Vec<i64> =
                b.coords().iter().zip(&t.alpha_shift).map(|(c, s)| c + s).collect();
            out.add_term(
                BasisIndex::raw(t.target, coords, b.index() + t.i_shift),
                t.coeff.clone(),
            );
        }
        Ok(out)
    }
}

/// Raw images for every basis element of a window; absent images are zero.
/// Applying it outside the window is an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowMap {
    pub window: Window,
    pub images: BTreeMap<BasisIndex, Element>,
}

impl WindowMap {
    pub fn new(window: Window) -> Self {
        WindowMap { window, images: BTreeMap::new() }
    }

    pub fn set_image(&mut self, b: BasisIndex, image: Element) {
        if image.is_zero() {
            self.images.remove(&b);
        } else {
            self.images.insert(b, image);
        }
    }

    pub fn image(&self, b: &BasisIndex) -> Result<Element, HalfDerivError> {
        if !self.window.contains(b) {
            return Err(HalfDerivError::OutsideDomain);
        }
        Ok(self.images.get(b).cloned().unwrap_or_else(Element::zero))
    }
}

impl LinearOp for WindowMap {
    fn apply_basis(&self, alg: &AlgebraDef, b: &BasisIndex) -> Result<Element, HalfDerivError> {
        let _ = alg;
        self.image(b)
    }
}

/// The commutator `[map, ad_z]: x -> map([x, z]) - [map(x), z]`. When `map`
/// is a 1/2-derivation this is one again (of grade shifted by z's degrees).
pub struct AdCommutator<M: LinearOp> {
    pub inner: M,
    pub z: Element,
}

pub fn compose_ad<M: LinearOp>(inner: M, z: Element) -> AdCommutator<M> {
    AdCommutator { inner, z }
}

impl<M: LinearOp> LinearOp for AdCommutator<M> {
    fn apply_basis(&self, alg: &AlgebraDef, b: &BasisIndex) -> Result<Element, HalfDerivError> {
        let x = Element::from_term(b.clone(), GaussianRational::one());
        let xz = alg.bracket(&x, &self.z);
        let first = self.inner.apply(alg, &xz)?;
        let fx = self.inner.apply_basis(alg, b)?;
        Ok(first.sub(&alg.bracket(&fx, &self.z)))
    }
}

#[derive(Debug, Clone)]
pub struct HalfDerivFailure {
    pub x: BasisIndex,
    pub y: BasisIndex,
    pub residual: Element,
}

#[derive(Debug, Clone)]
pub struct HalfDerivReport {
    pub pairs_checked: usize,
    pub failures: Vec<HalfDerivFailure>,
}

impl HalfDerivReport {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}

fn half() -> GaussianRational {
    GaussianRational::ratio(1, 2)
}

/// Exact residual `f([x,y]) - ([f(x),y] + [x,f(y)]) / 2` for one basis pair.
pub fn half_derivation_residual(
    alg: &AlgebraDef,
    map: &impl LinearOp,
    x: &BasisIndex,
    y: &BasisIndex,
) -> Result<Element, HalfDerivError> {
    let xy = alg.bracket_basis(x, y);
    let lhs = map.apply(alg, &xy)?;
    let fx = map.apply_basis(alg, x)?;
    let fy = map.apply_basis(alg, y)?;
    let ex = Element::from_term(x.clone(), GaussianRational::one());
    let ey = Element::from_term(y.clone(), GaussianRational::one());
    let rhs = alg.bracket(&fx, &ey).add(&alg.bracket(&ex, &fy)).scale(&half());
    Ok(lhs.sub(&rhs))
}

/// Checks the 1/2-derivation identity on the given pairs. With an
/// `output_window`, residuals are compared coefficient-wise only on basis
/// elements inside that window (for maps that truncate an infinite family).
pub fn check_half_derivation(
    alg: &AlgebraDef,
    map: &impl LinearOp,
    pairs: &[(BasisIndex, BasisIndex)],
    output_window: Option<&Window>,
) -> Result<HalfDerivReport, HalfDerivError> {
    let mut failures = Vec::new();
    for (x, y) in pairs {
        let mut residual = half_derivation_residual(alg, map, x, y)?;
        if let Some(w) = output_window {
            let mut filtered = Element::zero();
            for (b, c) in residual.terms() {
                if w.contains(b) {
                    filtered.add_term(b.clone(), c.clone());
                }
            }
            residual = filtered;
        }
        if !residual.is_zero() {
            failures.push(HalfDerivFailure { x: x.clone(), y: y.clone(), residual });
        }
    }
    Ok(HalfDerivReport { pairs_checked: pairs.len(), failures })
}

fn family_ids(alg: &AlgebraDef, names: &[&str]) -> Result<Vec<usize>, HalfDerivError> {
    names
        .iter()
        .map(|n| {
            alg.sig.family_id(n).ok_or_else(|| HalfDerivError::UnknownFamily(n.to_string()))
        })
        .collect()
}

fn param(alg: &AlgebraDef, name: &str) -> Result<GaussianRational, HalfDerivError> {
    alg.sig
        .params
        .get(name)
        .cloned()
        .ok_or_else(|| HalfDerivError::MissingParameter(name.to_string()))
}

pub type Coeffs = BTreeMap<i64, GaussianRational>;

/// 1/2-derivation family of the two-family algebras W(a,b): diagonal shifts
/// `alpha_t` on L and I plus `beta_t: L -> I`. Nontrivial entries (anything
/// beyond `alpha_0`) require b = -1.
pub fn family_w_ab(
    alg: &AlgebraDef,
    alphas: &Coeffs,
    betas: &Coeffs,
) -> Result<ShiftMap, HalfDerivError> {
    let ids = family_ids(alg, &["L", "I"])?;
    let b = param(alg, "b")?;
    let minus_one = -&GaussianRational::one();
    if b != minus_one {
        let only_identity =
            betas.values().all(|c| c.is_zero())
                && alphas.iter().all(|(t, c)| *t == 0 || c.is_zero());
        if !only_identity {
            return Err(HalfDerivError::RequiresBMinusOne);
        }
    }
    let mut terms = Vec::new();
    for (&t, c) in alphas {
        for &f in &ids {
            terms.push(ShiftTerm {
                source: f,
                target: f,
                alpha_shift: vec![],
                i_shift: t,
                coeff: c.clone(),
            });
        }
    }
    for (&t, c) in betas {
        terms.push(ShiftTerm {
            source: ids[0],
            target: ids[1],
            alpha_shift: vec![],
            i_shift: t,
            coeff: c.clone(),
        });
    }
    ShiftMap::new(alg, terms)
}

/// 1/2-derivation family of the three-family algebras W(a,-1,1/2): diagonal
/// `alpha_t` on L, I, Y; `beta_t: L -> I`; and `gamma_t` pairing
/// `L_m -> Y_{m+t+1/2}` with `Y_{m+1/2} -> I_{m+t+1}`.
pub fn family_w_abs(
    alg: &AlgebraDef,
    alphas: &Coeffs,
    betas: &Coeffs,
    gammas: &Coeffs,
) -> Result<ShiftMap, HalfDerivError> {
    let ids = family_ids(alg, &["L", "I", "Y"])?;
    let b = param(alg, "b")?;
    if b != -&GaussianRational::one() {
        return Err(HalfDerivError::RequiresBMinusOne);
    }
    let (l, i, y) = (ids[0], ids[1], ids[2]);
    let mut terms = Vec::new();
    for (&t, c) in alphas {
        for f in [l, i, y] {
            terms.push(ShiftTerm {
                source: f,
                target: f,
                alpha_shift: vec![],
                i_shift: t,
                coeff: c.clone(),
            });
        }
    }
    for (&t, c) in betas {
        terms.push(ShiftTerm { source: l, target: i, alpha_shift: vec![], i_shift: t, coeff: c.clone() });
    }
    for (&t, c) in gammas {
        terms.push(ShiftTerm { source: l, target: y, alpha_shift: vec![], i_shift: t, coeff: c.clone() });
        terms.push(ShiftTerm {
            source: y,
            target: i,
            alpha_shift: vec![],
            i_shift: t + 1,
            coeff: c.clone(),
        });
    }
    ShiftMap::new(alg, terms)
}

/// Seed table for the group-graded families: (group shift coordinates,
/// integer shift) -> coefficient.
pub type ShiftSeeds = BTreeMap<(Vec<i64>, i64), GaussianRational>;

/// 1/2-derivation family of W_n(G): `L_{alpha,i} -> sum a^{d,m} L_{alpha+d, i+m}`,
/// one independent coefficient per (d, m) cell.
pub fn family_wn(alg: &AlgebraDef, seeds: &ShiftSeeds) -> Result<ShiftMap, HalfDerivError> {
    let ids = family_ids(alg, &["L"])?;
    let arity = alg.sig.generators.len();
    let mut terms = Vec::new();
    for ((d, m), c) in seeds {
        if d.len() != arity {
            return Err(HalfDerivError::WrongShiftArity { expected: arity, got: d.len() });
        }
        terms.push(ShiftTerm {
            source: ids[0],
            target: ids[0],
            alpha_shift: d.clone(),
            i_shift: *m,
            coeff: c.clone(),
        });
    }
    ShiftMap::new(alg, terms)
}

/// One value of the HW_n(G) coefficient recurrence
/// `d * a^{d,k} + (k - n) * a^{d,k-n} = 0`, propagated exactly from the seed
/// `a^{d,seed_m} = seed_value`. For n = 0 the recurrence degenerates to
/// `(d + k) a^{d,k} = 0`, so the value is the seed at `k = -d` and zero
/// elsewhere.
pub fn hwn_coeff(
    n: i64,
    d: &GaussianRational,
    seed_m: i64,
    seed_value: &GaussianRational,
    k: i64,
) -> Result<GaussianRational, HalfDerivError> {
    if n == 0 {
        let at = |k: i64| &GaussianRational::from_int(k) + d;
        if !seed_value.is_zero() && !at(seed_m).is_zero() {
            return Err(HalfDerivError::InvalidSeed(seed_m));
        }
        if at(k).is_zero() && k == seed_m {
            return Ok(seed_value.clone());
        }
        return Ok(GaussianRational::zero());
    }
    if d.is_zero() {
        return Err(HalfDerivError::ZeroClassShift);
    }
    if (k - seed_m) % n != 0 {
        return Err(HalfDerivError::IncongruentIndex { k, seed_m, n });
    }
    let steps = (k - seed_m) / n;
    let mut cur = seed_m;
    let mut val = seed_value.clone();
    if steps >= 0 {
        for _ in 0..steps {
            // d a^{cur+n} + cur * a^{cur} = 0
            val = -&(&(&GaussianRational::from_int(cur) * &val) * &d.inv().unwrap());
            cur += n;
        }
    } else {
        for _ in 0..(-steps) {
            // d a^{cur} + (cur - n) a^{cur-n} = 0
            let denom = GaussianRational::from_int(cur - n);
            if denom.is_zero() {
                return Err(HalfDerivError::RecurrenceDivisionByZero(cur));
            }
            val = -&(&(d * &val) * &denom.inv().unwrap());
            cur -= n;
        }
    }
    Ok(val)
}

/// Closed form of the recurrence at `k = t*n + m` for `t >= 1`:
/// `(-1)^t d^{-t} (prod_{p=0}^{t-1} (p n + m)) a^{d,m}`. Reference formula
/// used to cross-check `hwn_coeff`.
pub fn hwn_coeff_closed_form(
    n: i64,
    d: &GaussianRational,
    m: i64,
    seed_value: &GaussianRational,
    t: u32,
) -> Result<GaussianRational, HalfDerivError> {
    if d.is_zero() {
        return Err(HalfDerivError::ZeroDenominator);
    }
    let mut acc = seed_value.clone();
    for p in 0..t {
        let factor = GaussianRational::from_int(p as i64 * n + m);
        acc = &(&acc * &factor) * &(-&GaussianRational::one());
        acc = &acc * &d.inv().unwrap();
    }
    Ok(acc)
}

/// 1/2-derivation family of HW_n(G): the same `a^{d,k}` coefficients act on
/// `L -> L` and `H -> H`. Coefficients are generated from the seeds through
/// the recurrence for every k in `k_window` (inclusive); a seed with group
/// shift 0 must sit at index 0 (the identity direction).
pub fn family_hwn(
    alg: &AlgebraDef,
    seeds: &ShiftSeeds,
    k_window: (i64, i64),
) -> Result<ShiftMap, HalfDerivError> {
    let ids = family_ids(alg, &["L", "H"])?;
    let n = param(alg, "n")?
        .to_i64()
        .ok_or_else(|| HalfDerivError::MissingParameter("n".to_string()))?;
    let arity = alg.sig.generators.len();
    let mut coeffs: BTreeMap<(Vec<i64>, i64), GaussianRational> = BTreeMap::new();
    for ((d_coords, m), seed) in seeds {
        if d_coords.len() != arity {
            return Err(HalfDerivError::WrongShiftArity { expected: arity, got: d_coords.len() });
        }
        let d = alg.coords_value(d_coords);
        if d.is_zero() {
            // only the identity cell a^{0,0} survives
            if seed.is_zero() {
                continue;
            }
            if *m != 0 {
                return Err(HalfDerivError::InvalidSeed(*m));
            }
            if 0 >= k_window.0 && 0 <= k_window.1 {
                let slot = coeffs.entry((d_coords.clone(), 0)).or_insert_with(GaussianRational::zero);
                *slot = &*slot + seed;
            }
            continue;
        }
        for k in k_window.0..=k_window.1 {
            if n != 0 && (k - m) % n != 0 {
                continue;
            }
            let v = hwn_coeff(n, &d, *m, seed, k)?;
            if !v.is_zero() {
                let slot = coeffs.entry((d_coords.clone(), k)).or_insert_with(GaussianRational::zero);
                *slot = &*slot + &v;
            }
        }
    }
    let mut terms = Vec::new();
    for ((d_coords, k), c) in coeffs {
        if c.is_zero() {
            continue;
        }
        for &f in &ids {
            terms.push(ShiftTerm {
                source: f,
                target: f,
                alpha_shift: d_coords.clone(),
                i_shift: k,
                coeff: c.clone(),
            });
        }
    }
    ShiftMap::new(alg, terms)
}

/// Nullspace of the windowed 1/2-derivation constraints for one grade shift.
#[derive(Debug, Clone)]
pub struct SolutionSpace {
    pub grade_shift: GaussianRational,
    pub window_in: Window,
    pub window_out: Window,
    pub basis: Vec<WindowMap>,
    columns: Vec<(BasisIndex, BasisIndex)>,
    vectors: Vec<SparseVec>,
}

impl SolutionSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Exact membership test for the window restriction of a structured map.
    /// False when the restriction needs a target outside the out-window.
    pub fn contains_shift_map(&self, alg: &AlgebraDef, map: &ShiftMap) -> Result<bool, HalfDerivError> {
        let mut col_of: BTreeMap<(BasisIndex, BasisIndex), usize> = BTreeMap::new();
        for (n, key) in self.columns.iter().enumerate() {
            col_of.insert(key.clone(), n);
        }
        let mut entries: BTreeMap<usize, GaussianRational> = BTreeMap::new();
        for b in alg.enumerate_basis(&self.window_in) {
            let image = map.apply_basis(alg, &b)?;
            for (t, c) in image.terms() {
                match col_of.get(&(b.clone(), t.clone())) {
                    Some(&col) => {
                        entries.insert(col, c.clone());
                    }
                    None => return Ok(false),
                }
            }
        }
        let vector: SparseVec = entries.into_iter().collect();
        let mut ech = Echelon::new();
        for v in &self.vectors {
            ech.insert(v.clone());
        }
        Ok(ech.contains(vector))
    }
}

/// Solves for all window maps of one grade shift that satisfy every
/// 1/2-derivation constraint the windows can express. Unknowns are the
/// coefficients of each image; one linear constraint is generated per output
/// coordinate of each basis pair whose bracket stays inside the in-window,
/// skipping output coordinates that escape the out-window (boundary
/// constraints are dropped, never guessed, so the space can only be too
/// big, never too small).
pub fn solve_half_derivations(
    alg: &AlgebraDef,
    grade_shift: &GaussianRational,
    window_in: &Window,
    window_out: &Window,
) -> Result<SolutionSpace, HalfDerivError> {
    if !window_in.is_inside(window_out) {
        return Err(HalfDerivError::WindowNotNested);
    }
    let domain = alg.enumerate_basis(window_in);
    let out_basis = alg.enumerate_basis(window_out);
    let out_grades: Vec<GaussianRational> = out_basis.iter().map(|b| alg.grade(b)).collect();
    let in_set: BTreeSet<BasisIndex> = domain.iter().cloned().collect();

    let mut columns: Vec<(BasisIndex, BasisIndex)> = Vec::new();
    let mut col_of: BTreeMap<(BasisIndex, BasisIndex), usize> = BTreeMap::new();
    for b in &domain {
        let want = &alg.grade(b) + grade_shift;
        for (t, g) in out_basis.iter().zip(&out_grades) {
            if *g == want {
                col_of.insert((b.clone(), t.clone()), columns.len());
                columns.push((b.clone(), t.clone()));
            }
        }
    }

    let mut rows: Vec<SparseVec> = Vec::new();
    for xi in 0..domain.len() {
        for yi in (xi + 1)..domain.len() {
            let (x, y) = (&domain[xi], &domain[yi]);
            let z = alg.bracket_basis(x, y);
            if z.terms().any(|(b, _)| !in_set.contains(b)) {
                continue;
            }
            // linear form per output basis element
            let mut forms: BTreeMap<BasisIndex, BTreeMap<usize, GaussianRational>> =
                BTreeMap::new();
            let mut add = |o: &BasisIndex, col: usize, c: GaussianRational| {
                if c.is_zero() {
                    return;
                }
                let form = forms.entry(o.clone()).or_default();
                let slot = form.entry(col).or_insert_with(GaussianRational::zero);
                *slot = &*slot + &c;
            };
            // f([x,y])
            for (b, zc) in z.terms() {
                for (t, _) in out_basis.iter().zip(&out_grades) {
                    if let Some(&col) = col_of.get(&(b.clone(), t.clone())) {
                        add(t, col, zc.clone());
                    }
                }
            }
            // -1/2 [f(x), y] and -1/2 [x, f(y)]
            let minus_half = -&half();
            for (src, other) in [(x, y), (y, x)] {
                for t in out_basis.iter() {
                    let Some(&col) = col_of.get(&(src.clone(), t.clone())) else { continue };
                    let prod = if std::ptr::eq(src, x) {
                        alg.bracket_basis(t, other)
                    } else {
                        alg.bracket_basis(other, t)
                    };
                    for (o, c) in prod.terms() {
                        add(o, col, &minus_half * c);
                    }
                }
            }
            for (o, form) in forms {
                if !window_out.contains(&o) {
                    continue;
                }
                let row: SparseVec =
                    form.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        }
    }

    let vectors = linalg::nullspace(columns.len(), rows.iter().cloned());
    // re-verify every solution against every generated constraint
    for v in &vectors {
        for row in &rows {
            assert!(
                linalg::dot(row, v).is_zero(),
                "solver produced a vector violating its own constraints"
            );
        }
    }

    let basis = vectors
        .iter()
        .map(|v| {
            let mut wm = WindowMap::new(window_in.clone());
            let mut images: BTreeMap<BasisIndex, Element> = BTreeMap::new();
            for (col, c) in v {
                let (b, t) = &columns[*col];
                images
                    .entry(b.clone())
                    .or_insert_with(Element::zero)
                    .add_term(t.clone(), c.clone());
            }
            for (b, image) in images {
                wm.set_image(b, image);
            }
            wm
        })
        .collect();

    Ok(SolutionSpace {
        grade_shift: grade_shift.clone(),
        window_in: window_in.clone(),
        window_out: window_out.clone(),
        basis,
        columns,
        vectors,
    })
}

/// One fitted interior map: the constant-coefficient shift structure read
/// off a restricted solution, and whether the restriction matched it
/// exactly.
#[derive(Debug, Clone)]
pub struct FittedMap {
    pub map: ShiftMap,
    pub shift_type: bool,
}

#[derive(Debug, Clone)]
pub struct InteriorReport {
    pub core: Window,
    pub dimension: usize,
    pub fitted: Vec<FittedMap>,
}

impl InteriorReport {
    pub fn all_shift_type(&self) -> bool {
        self.fitted.iter().all(|f| f.shift_type)
    }
}

/// Default interior window: the solve window shrunk on every side by the
/// largest shift observed in the solution basis, plus one.
pub fn default_core(space: &SolutionSpace) -> Result<Window, HalfDerivError> {
    let mut max_i = 0i64;
    let mut max_a = 0i64;
    for wm in &space.basis {
        for (b, image) in &wm.images {
            for (t, _) in image.terms() {
                max_i = max_i.max((t.index() - b.index()).abs());
                for (ca, cb) in t.coords().iter().zip(b.coords()) {
                    max_a = max_a.max((ca - cb).abs());
                }
            }
        }
    }
    let w = &space.window_in;
    Window::new(
        (w.alpha_coeff_bound - (max_a + 1)).max(0),
        w.i_min + max_i + 1,
        w.i_max - (max_i + 1),
    )
    .map_err(|_| HalfDerivError::CoreNotInterior)
}

/// Restricts every solution to the core window, takes the canonical basis of
/// the restricted space, and fits each basis vector with constant-coefficient
/// shift structure. `shift_type` is true exactly when the restriction equals
/// its fit.
pub fn classify_interior(
    alg: &AlgebraDef,
    space: &SolutionSpace,
    core: &Window,
) -> Result<InteriorReport, HalfDerivError> {
    if !core.is_inside(&space.window_in) || core == &space.window_in {
        return Err(HalfDerivError::CoreNotInterior);
    }
    let core_domain = alg.enumerate_basis(core);
    let out_basis = alg.enumerate_basis(&space.window_out);
    let out_grades: Vec<GaussianRational> = out_basis.iter().map(|b| alg.grade(b)).collect();
    let mut columns: Vec<(BasisIndex, BasisIndex)> = Vec::new();
    let mut col_of: BTreeMap<(BasisIndex, BasisIndex), usize> = BTreeMap::new();
    for b in &core_domain {
        let want = &alg.grade(b) + &space.grade_shift;
        for (t, g) in out_basis.iter().zip(&out_grades) {
            if *g == want {
                col_of.insert((b.clone(), t.clone()), columns.len());
                columns.push((b.clone(), t.clone()));
            }
        }
    }

    let mut ech = Echelon::new();
    for wm in &space.basis {
        let mut entries: BTreeMap<usize, GaussianRational> = BTreeMap::new();
        for b in &core_domain {
            if let Some(image) = wm.images.get(b) {
                for (t, c) in image.terms() {
                    let col = col_of[&(b.clone(), t.clone())];
                    entries.insert(col, c.clone());
                }
            }
        }
        ech.insert(entries.into_iter().collect());
    }
    let rref = ech.into_rref();
    let dimension = rref.len();

    let mut fitted = Vec::new();
    for row in &rref {
        // first occurrence per shift key wins; the fit is then re-applied
        // and compared entry by entry
        let mut keys: BTreeMap<(usize, usize, Vec<i64>, i64), GaussianRational> = BTreeMap::new();
        for (col, c) in row {
            let (b, t) = &columns[*col];
            let da: Vec<i64> = t.coords().iter().zip(b.coords()).map(|(x, y)| x - y).collect();
            let key = (b.family(), t.family(), da, t.index() - b.index());
            keys.entry(key).or_insert_with(|| c.clone());
        }
        let terms: Vec<ShiftTerm> = keys
            .into_iter()
            .map(|((source, target, alpha_shift, i_shift), coeff)| ShiftTerm {
                source,
                target,
                alpha_shift,
                i_shift,
                coeff,
            })
            .collect();
        let map = ShiftMap::new(alg, terms)?;
        let mut expected: BTreeMap<usize, GaussianRational> = BTreeMap::new();
        let mut representable = true;
        for b in &core_domain {
            let image = map.apply_basis(alg, b)?;
            for (t, c) in image.terms() {
                match col_of.get(&(b.clone(), t.clone())) {
                    Some(&col) => {
                        expected.insert(col, c.clone());
                    }
                    None => representable = false,
                }
            }
        }
        let expected_vec: SparseVec = expected.into_iter().collect();
        let shift_type = representable && expected_vec == *row;
        fitted.push(FittedMap { map, shift_type });
    }

    Ok(InteriorReport { core: core.clone(), dimension, fitted })
}

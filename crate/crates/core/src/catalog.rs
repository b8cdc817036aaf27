//! Built-in algebra constructors. Every algebra here is produced through the
//! same validated `AlgebraDef::new` path as DSL input.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::algebra::{poly, AlgebraDef, AlgebraError, FamilyDecl, RuleMap, RuleTerm, Signature};
use crate::coeff::CoeffPoly;
use crate::scalar::GaussianRational;

/// Names accepted by `catalog`, sorted.
pub const CATALOG_NAMES: [&str; 5] = ["hwn_g", "w_ab", "w_abs", "witt", "wn_g"];

type Params = BTreeMap<String, GaussianRational>;

fn require(params: &Params, algebra: &str, allowed: &[&str]) -> Result<(), AlgebraError> {
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(AlgebraError::UnexpectedParameter(algebra.to_string(), key.clone()));
        }
    }
    for key in allowed {
        if !params.contains_key(*key) {
            return Err(AlgebraError::MissingParameter(key.to_string()));
        }
    }
    Ok(())
}

fn integer_param(params: &Params, name: &str) -> Result<i64, AlgebraError> {
    let v = params.get(name).ok_or_else(|| AlgebraError::MissingParameter(name.to_string()))?;
    v.to_i64().ok_or_else(|| {
        AlgebraError::InvalidParameter(name.to_string(), "must be an integer".to_string())
    })
}

fn check_generators(
    name: &str,
    generators: &[GaussianRational],
    wanted: bool,
) -> Result<(), AlgebraError> {
    if wanted {
        if generators.is_empty() {
            return Err(AlgebraError::MissingGenerators(name.to_string()));
        }
        if generators.iter().any(|g| g.is_zero()) {
            return Err(AlgebraError::ZeroGenerator);
        }
    } else if !generators.is_empty() {
        return Err(AlgebraError::UnexpectedGenerators(name.to_string()));
    }
    Ok(())
}

fn fam(name: &str, offset: BigRational, u: GaussianRational, v: GaussianRational) -> FamilyDecl {
    FamilyDecl { name: name.to_string(), index_offset: offset, grade_u: u, grade_v: v }
}

fn index_graded(name: &str) -> FamilyDecl {
    fam(name, BigRational::zero(), GaussianRational::zero(), GaussianRational::one())
}

fn group_graded(name: &str, arity: usize) -> FamilyDecl {
    let _ = arity;
    fam(name, BigRational::zero(), GaussianRational::one(), GaussianRational::zero())
}

fn term(target: usize, arity: usize, i_const: i64, coeff: CoeffPoly) -> RuleTerm {
    RuleTerm { target, alpha_const: vec![0; arity], i_const, coeff }
}

/// Builds a catalog algebra by name. `params` carries the instantiated
/// parameter values (`a`, `b` for the centerless W family; integer `n` for
/// the group-graded families); `generators` the group generators where the
/// algebra has a group part.
pub fn catalog(
    name: &str,
    params: &Params,
    generators: &[GaussianRational],
) -> Result<AlgebraDef, AlgebraError> {
    match name {
        "witt" => {
            require(params, name, &[])?;
            check_generators(name, generators, false)?;
            let sig = Signature {
                families: vec![index_graded("L")],
                params: params.clone(),
                generators: vec![],
            };
            let mut rules = RuleMap::new();
            rules.insert((0, 0), vec![term(0, 0, 0, poly::idx_y().sub(&poly::idx_x()))]);
            AlgebraDef::new(name.to_string(), sig, rules)
        }
        "w_ab" => {
            require(params, name, &["a", "b"])?;
            check_generators(name, generators, false)?;
            let (a, b) = (params["a"].clone(), params["b"].clone());
            let sig = Signature {
                families: vec![index_graded("L"), index_graded("I")],
                params: params.clone(),
                generators: vec![],
            };
            let mut rules = RuleMap::new();
            rules.insert((0, 0), vec![term(0, 0, 0, poly::idx_y().sub(&poly::idx_x()))]);
            // [L_m, I_n] = (n + b m + a) I_{m+n}
            let li = poly::idx_y()
                .add(&poly::idx_x().scale(&b))
                .add(&poly::constant(a));
            rules.insert((0, 1), vec![term(1, 0, 0, li)]);
            AlgebraDef::new(name.to_string(), sig, rules)
        }
        "w_abs" => {
            require(params, name, &["a", "b"])?;
            check_generators(name, generators, false)?;
            let (a, b) = (params["a"].clone(), params["b"].clone());
            let half = GaussianRational::ratio(1, 2);
            let sig = Signature {
                families: vec![
                    index_graded("L"),
                    index_graded("I"),
                    fam(
                        "Y",
                        BigRational::new(1.into(), 2.into()),
                        GaussianRational::zero(),
                        GaussianRational::one(),
                    ),
                ],
                params: params.clone(),
                generators: vec![],
            };
            let mut rules = RuleMap::new();
            rules.insert((0, 0), vec![term(0, 0, 0, poly::idx_y().sub(&poly::idx_x()))]);
            let li = poly::idx_y()
                .add(&poly::idx_x().scale(&b))
                .add(&poly::constant(a.clone()));
            rules.insert((0, 1), vec![term(1, 0, 0, li)]);
            // [L_m, Y_{n+1/2}] = (n + 1/2 + ((b-1) m + a)/2) Y_{m+n+1/2}
            let ly = poly::idx_y()
                .add(&poly::idx_x().scale(&(&(&b - &GaussianRational::one()) * &half)))
                .add(&poly::constant(&(&a + &GaussianRational::one()) * &half));
            rules.insert((0, 2), vec![term(2, 0, 0, ly)]);
            // [Y_{m+1/2}, Y_{n+1/2}] = (n - m) I_{m+n+1}
            rules.insert((2, 2), vec![term(1, 0, 1, poly::idx_y().sub(&poly::idx_x()))]);
            AlgebraDef::new(name.to_string(), sig, rules)
        }
        "wn_g" => {
            require(params, name, &["n"])?;
            check_generators(name, generators, true)?;
            let n = integer_param(params, "n")?;
            let arity = generators.len();
            let sig = Signature {
                families: vec![group_graded("L", arity)],
                params: params.clone(),
                generators: generators.to_vec(),
            };
            let mut rules = RuleMap::new();
            rules.insert(
                (0, 0),
                vec![
                    term(0, arity, 0, poly::alpha_y().sub(&poly::alpha_x())),
                    term(0, arity, n, poly::idx_y().sub(&poly::idx_x())),
                ],
            );
            AlgebraDef::new(name.to_string(), sig, rules)
        }
        "hwn_g" => {
            require(params, name, &["n"])?;
            check_generators(name, generators, true)?;
            let n = integer_param(params, "n")?;
            let arity = generators.len();
            let sig = Signature {
                families: vec![group_graded("L", arity), group_graded("H", arity)],
                params: params.clone(),
                generators: generators.to_vec(),
            };
            let mut rules = RuleMap::new();
            rules.insert(
                (0, 0),
                vec![
                    term(0, arity, 0, poly::alpha_y().sub(&poly::alpha_x())),
                    term(0, arity, n, poly::idx_y().sub(&poly::idx_x())),
                ],
            );
            // [L_{alpha,i}, H_{beta,j}] = beta H_{alpha+beta,i+j} + j H_{alpha+beta,i+j+n}
            rules.insert(
                (0, 1),
                vec![term(1, arity, 0, poly::alpha_y()), term(1, arity, n, poly::idx_y())],
            );
            rules.insert((1, 1), vec![]);
            AlgebraDef::new(name.to_string(), sig, rules)
        }
        other => Err(AlgebraError::UnknownAlgebra(other.to_string())),
    }
}

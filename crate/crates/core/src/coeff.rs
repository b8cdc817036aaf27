//! Sparse multivariate polynomials in the four index variables of a binary
//! rule: the group parts and integer parts of the two arguments. Structure
//! constants are stored as these polynomials and evaluated exactly.

use std::collections::BTreeMap;
use std::fmt;

use crate::scalar::GaussianRational;

/// Index variables, in evaluation order: group part of the first argument,
/// group part of the second, integer index of the first, integer index of
/// the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Var {
    AlphaX = 0,
    AlphaY = 1,
    IdxX = 2,
    IdxY = 3,
}

pub const VARS: [Var; 4] = [Var::AlphaX, Var::AlphaY, Var::IdxX, Var::IdxY];

type Exponents = [u8; 4];

/// Polynomial with Gaussian-rational coefficients; zero coefficients are
/// never stored, so equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoeffPoly {
    terms: BTreeMap<Exponents, GaussianRational>,
}

impl CoeffPoly {
    pub fn zero() -> Self {
        CoeffPoly::default()
    }

    pub fn constant(c: GaussianRational) -> Self {
        let mut p = CoeffPoly::zero();
        p.add_term([0; 4], c);
        p
    }

    pub fn one() -> Self {
        CoeffPoly::constant(GaussianRational::one())
    }

    pub fn var(v: Var) -> Self {
        let mut exps = [0u8; 4];
        exps[v as usize] = 1;
        let mut p = CoeffPoly::zero();
        p.add_term(exps, GaussianRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, exps: Exponents, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&exps);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (exps, c) in &other.terms {
            out.add_term(*exps, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = CoeffPoly::zero();
        for (exps, c) in &self.terms {
            out.add_term(*exps, -c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = CoeffPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let mut exps = [0u8; 4];
                for k in 0..4 {
                    exps[k] = ea[k]
                        .checked_add(eb[k])
                        .expect("polynomial degree overflow");
                }
                out.add_term(exps, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        let mut out = CoeffPoly::zero();
        for (exps, v) in &self.terms {
            out.add_term(*exps, v * c);
        }
        out
    }

    pub fn eval(&self, vals: &[GaussianRational; 4]) -> GaussianRational {
        let mut acc = GaussianRational::zero();
        for (exps, c) in &self.terms {
            let mut term = c.clone();
            for k in 0..4 {
                for _ in 0..exps[k] {
                    term = &term * &vals[k];
                }
            }
            acc = &acc + &term;
        }
        acc
    }

    /// Swaps the two arguments: alpha_x <-> alpha_y, idx_x <-> idx_y.
    pub fn swap_args(&self) -> Self {
        let mut out = CoeffPoly::zero();
        for (exps, c) in &self.terms {
            out.add_term([exps[1], exps[0], exps[3], exps[2]], c.clone());
        }
        out
    }

    /// Some((constant, [coefficient per variable])) when the polynomial is
    /// affine; None when any monomial has total degree > 1.
    pub fn as_affine(&self) -> Option<Affine> {
        let mut aff = Affine::default();
        for (exps, c) in &self.terms {
            let degree: u32 = exps.iter().map(|&e| e as u32).sum();
            match degree {
                0 => aff.constant = c.clone(),
                1 => {
                    let k = exps.iter().position(|&e| e == 1).unwrap();
                    aff.coeffs[k] = c.clone();
                }
                _ => return None,
            }
        }
        Some(aff)
    }

    /// Renders the polynomial using the given variable names, with `*` for
    /// products and repeated factors for powers (the rule grammar has no
    /// exponent operator).
    pub fn render(&self, names: &[&str; 4]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (n, (exps, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                out.push_str(" + ");
            }
            let mut factors: Vec<String> = Vec::new();
            let is_const = exps.iter().all(|&e| e == 0);
            if !c.is_one() || is_const {
                let text = c.to_string();
                // parenthesize scalars that would parse as a sum
                if text[1..].contains('+') || text[1..].contains('-') {
                    factors.push(format!("({text})"));
                } else {
                    factors.push(text);
                }
            }
            for k in 0..4 {
                for _ in 0..exps[k] {
                    factors.push(names[k].to_string());
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

/// Affine view of a polynomial: `constant + sum coeffs[k] * var_k`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Affine {
    pub constant: GaussianRational,
    pub coeffs: [GaussianRational; 4],
}

impl fmt::Display for CoeffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&["a", "b", "i", "j"]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> GaussianRational {
        GaussianRational::parse(s).unwrap()
    }

    #[test]
    fn eval_witt_coefficient() {
        // (j - i), the Witt structure constant, at i = 2, j = 5
        let p = CoeffPoly::var(Var::IdxY).sub(&CoeffPoly::var(Var::IdxX));
        let v = p.eval(&[q("0"), q("0"), q("2"), q("5")]);
        assert_eq!(v, q("3"));
    }

    #[test]
    fn arithmetic_cancels() {
        let i = CoeffPoly::var(Var::IdxX);
        let p = i.add(&i.neg());
        assert!(p.is_zero());
        let prod = i.mul(&i);
        assert_eq!(prod.eval(&[q("0"), q("0"), q("3"), q("0")]), q("9"));
    }

    #[test]
    fn affine_extraction() {
        let p = CoeffPoly::var(Var::IdxX)
            .add(&CoeffPoly::var(Var::IdxY))
            .add(&CoeffPoly::constant(q("2")));
        let aff = p.as_affine().unwrap();
        assert_eq!(aff.constant, q("2"));
        assert_eq!(aff.coeffs[Var::IdxX as usize], q("1"));
        assert_eq!(aff.coeffs[Var::AlphaX as usize], q("0"));
        assert!(CoeffPoly::var(Var::IdxX).mul(&CoeffPoly::var(Var::IdxY)).as_affine().is_none());
    }

    #[test]
    fn swap_args_symmetry() {
        let p = CoeffPoly::var(Var::IdxY).sub(&CoeffPoly::var(Var::IdxX));
        assert_eq!(p.swap_args(), p.neg());
    }

    #[test]
    fn render_readable() {
        let p = CoeffPoly::var(Var::IdxY)
            .sub(&CoeffPoly::var(Var::IdxX))
            .add(&CoeffPoly::constant(q("1/2")));
        assert_eq!(p.render(&["a", "b", "m", "n"]), "1/2 + n + -1*m");
    }
}

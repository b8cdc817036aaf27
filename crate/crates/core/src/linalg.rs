//! Exact sparse linear algebra over the Gaussian rationals: incremental row
//! reduction with deterministic first-nonzero pivoting, reduced echelon form,
//! and canonical nullspace bases. No pivot heuristics depend on magnitudes,
//! so identical input always produces identical output.

use std::collections::BTreeMap;

use crate::scalar::GaussianRational;

/// Sorted-by-column sparse row; coefficients are always nonzero.
pub type SparseVec = Vec<(usize, GaussianRational)>;

/// out = a + c * b, merging sorted entries and dropping cancellations.
pub fn add_scaled(a: &SparseVec, b: &SparseVec, c: &GaussianRational) -> SparseVec {
    let mut out = SparseVec::with_capacity(a.len() + b.len());
    let (mut ia, mut ib) = (0, 0);
    while ia < a.len() || ib < b.len() {
        match (a.get(ia), b.get(ib)) {
            (Some((ca, va)), Some((cb, vb))) if ca == cb => {
                let v = va + &(c * vb);
                if !v.is_zero() {
                    out.push((*ca, v));
                }
                ia += 1;
                ib += 1;
            }
            (Some((ca, va)), Some((cb, _))) if ca < cb => {
                out.push((*ca, va.clone()));
                ia += 1;
            }
            (Some(_), Some((cb, vb))) => {
                let v = c * vb;
                if !v.is_zero() {
                    out.push((*cb, v));
                }
                ib += 1;
            }
            (Some((ca, va)), None) => {
                out.push((*ca, va.clone()));
                ia += 1;
            }
            (None, Some((cb, vb))) => {
                let v = c * vb;
                if !v.is_zero() {
                    out.push((*cb, v));
                }
                ib += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Incrementally built row-echelon basis. Pivot rows are monic and keyed by
/// their leading column; rows are inserted in caller order and each new row
/// is fully reduced against the existing pivots first, which keeps the
/// procedure deterministic.
#[derive(Debug, Clone, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_cols(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }

    /// Reduces `row` against the current pivots until its leading column has
    /// no pivot (or the row vanishes).
    pub fn reduce(&self, mut row: SparseVec) -> SparseVec {
        loop {
            let Some((col, v)) = row.first().cloned() else { return row };
            let Some(pivot) = self.pivots.get(&col) else { return row };
            row = add_scaled(&row, pivot, &-&v);
        }
    }

    /// Inserts a row; returns true when it increased the rank.
    pub fn insert(&mut self, row: SparseVec) -> bool {
        let row = self.reduce(row);
        let Some((col, lead)) = row.first().cloned() else { return false };
        let inv = lead.inv().expect("leading coefficient is nonzero");
        let monic: SparseVec = row.iter().map(|(c, v)| (*c, v * &inv)).collect();
        self.pivots.insert(col, monic);
        true
    }

    /// True when `row` is a linear combination of the inserted rows.
    pub fn contains(&self, row: SparseVec) -> bool {
        self.reduce(row).is_empty()
    }

    /// Back-substitutes so every pivot column appears in exactly one row;
    /// rows come out sorted by pivot column. This is the canonical reduced
    /// echelon basis of the row space.
    pub fn into_rref(self) -> Vec<SparseVec> {
        let cols: Vec<usize> = self.pivots.keys().copied().collect();
        let mut reduced: BTreeMap<usize, SparseVec> = BTreeMap::new();
        for &col in cols.iter().rev() {
            let mut row = self.pivots[&col].clone();
            loop {
                // eliminate the first non-leading entry that sits on a later
                // pivot column, using already-reduced rows
                let Some((c, v)) = row
                    .iter()
                    .skip(1)
                    .find(|(c, _)| reduced.contains_key(c))
                    .map(|(c, v)| (*c, v.clone()))
                else {
                    break;
                };
                row = add_scaled(&row, &reduced[&c], &-&v);
            }
            reduced.insert(col, row);
        }
        reduced.into_values().collect()
    }
}

/// Canonical nullspace basis of the system `rows * x = 0` over `ncols`
/// unknowns: one basis vector per free column (in ascending column order),
/// each with coefficient 1 on its free column.
pub fn nullspace(ncols: usize, rows: impl IntoIterator<Item = SparseVec>) -> Vec<SparseVec> {
    let mut ech = Echelon::new();
    for row in rows {
        ech.insert(row);
    }
    nullspace_of(ncols, ech)
}

pub fn nullspace_of(ncols: usize, ech: Echelon) -> Vec<SparseVec> {
    let rref = ech.into_rref();
    let pivot_cols: Vec<usize> = rref.iter().map(|r| r[0].0).collect();
    let mut is_pivot = vec![false; ncols];
    for &c in &pivot_cols {
        is_pivot[c] = true;
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if is_pivot[free] {
            continue;
        }
        let mut v: SparseVec = Vec::new();
        for (row, &pcol) in rref.iter().zip(&pivot_cols) {
            if let Some((_, coeff)) = row.iter().find(|(c, _)| *c == free) {
                v.push((pcol, -coeff));
            }
        }
        v.push((free, GaussianRational::one()));
        v.sort_by_key(|(c, _)| *c);
        basis.push(v);
    }
    basis
}

/// Dot of a sparse row with a dense-indexable sparse vector.
pub fn dot(row: &SparseVec, v: &SparseVec) -> GaussianRational {
    let mut acc = GaussianRational::zero();
    let (mut ia, mut ib) = (0, 0);
    while ia < row.len() && ib < v.len() {
        let (ca, va) = &row[ia];
        let (cb, vb) = &v[ib];
        if ca == cb {
            acc = &acc + &(va * vb);
            ia += 1;
            ib += 1;
        } else if ca < cb {
            ia += 1;
        } else {
            ib += 1;
        }
    }
    acc
}

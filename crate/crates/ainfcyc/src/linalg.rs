//! Sparse exact linear algebra over the scalar field: incremental reduced
//! row echelon form with arbitrary ordered column keys, particular
//! solutions and nullspace bases. Used by the cocycle generator, the
//! contraction-equation solver and the Darboux per-level solves.

use std::collections::BTreeMap;

use crate::signcore::Scalar;

type Row<K, S> = (BTreeMap<K, S>, S);

/// A system of linear equations `sum coeff * x_key = rhs` over keys `K`.
#[derive(Clone, Debug)]
pub struct LinearSystem<K: Ord + Clone, S: Scalar> {
    /// rows kept in reduced row echelon form; each has a pivot column
    pivots: Vec<(K, Row<K, S>)>,
    inconsistent: bool,
}

impl<K: Ord + Clone, S: Scalar> Default for LinearSystem<K, S> {
    fn default() -> Self {
        LinearSystem { pivots: Vec::new(), inconsistent: false }
    }
}

impl<K: Ord + Clone, S: Scalar> LinearSystem<K, S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_consistent(&self) -> bool {
        !self.inconsistent
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Adds one equation, immediately reducing it against the pivots.
    pub fn add_row(&mut self, coeffs: impl IntoIterator<Item = (K, S)>, rhs: S) {
        let mut row: BTreeMap<K, S> = BTreeMap::new();
        for (k, c) in coeffs {
            if c.is_zero() {
                continue;
            }
            let e = row.entry(k).or_insert_with(S::zero);
            *e = e.clone() + c;
            if e.is_zero() {
                let dead: Vec<K> =
                    row.iter().filter(|(_, v)| v.is_zero()).map(|(k, _)| k.clone()).collect();
                for k in dead {
                    row.remove(&k);
                }
            }
        }
        let mut rhs = rhs;
        // eliminate existing pivot columns
        for (p, (prow, prhs)) in &self.pivots {
            if let Some(c) = row.get(p).cloned() {
                for (k, v) in prow {
                    let e = row.entry(k.clone()).or_insert_with(S::zero);
                    *e = e.clone() - c.clone() * v.clone();
                }
                rhs = rhs - c * prhs.clone();
                row.retain(|_, v| !v.is_zero());
            }
        }
        if row.is_empty() {
            if !rhs.is_zero() {
                self.inconsistent = true;
            }
            return;
        }
        // normalize on the least remaining column
        let pivot = row.keys().next().unwrap().clone();
        let lead = row.get(&pivot).unwrap().clone();
        let inv = lead.inv().expect("nonzero leading coefficient in a field");
        for v in row.values_mut() {
            *v = v.clone() * inv.clone();
        }
        let rhs = rhs * inv;
        // eliminate the new pivot from the earlier rows (full RREF)
        for (_, (prow, prhs)) in self.pivots.iter_mut() {
            if let Some(c) = prow.get(&pivot).cloned() {
                for (k, v) in &row {
                    let e = prow.entry(k.clone()).or_insert_with(S::zero);
                    *e = e.clone() - c.clone() * v.clone();
                }
                *prhs = prhs.clone() - c * rhs.clone();
                prow.retain(|_, v| !v.is_zero());
            }
        }
        self.pivots.push((pivot, (row, rhs)));
        self.pivots.sort_by(|a, b| a.0.cmp(&b.0));
    }

    /// A particular solution with all free variables set to zero, or `None`
    /// if the system is inconsistent. Only keys with nonzero values appear.
    pub fn solve(&self) -> Option<BTreeMap<K, S>> {
        if self.inconsistent {
            return None;
        }
        let mut sol = BTreeMap::new();
        for (p, (_, rhs)) in &self.pivots {
            if !rhs.is_zero() {
                sol.insert(p.clone(), rhs.clone());
            }
        }
        Some(sol)
    }

    /// Basis of the homogeneous solution space over the given universe of
    /// columns (columns never mentioned in a row are free).
    pub fn nullspace(&self, universe: impl IntoIterator<Item = K>) -> Vec<BTreeMap<K, S>> {
        let mut cols: std::collections::BTreeSet<K> = universe.into_iter().collect();
        for (_, (row, _)) in &self.pivots {
            for k in row.keys() {
                cols.insert(k.clone());
            }
        }
        let pivot_cols: std::collections::BTreeSet<K> =
            self.pivots.iter().map(|(p, _)| p.clone()).collect();
        let mut basis = Vec::new();
        for f in cols.iter().filter(|c| !pivot_cols.contains(*c)) {
            let mut v = BTreeMap::new();
            v.insert(f.clone(), S::one());
            for (p, (row, _)) in &self.pivots {
                if let Some(c) = row.get(f) {
                    if !c.is_zero() {
                        v.insert(p.clone(), -c.clone());
                    }
                }
            }
            basis.push(v);
        }
        basis
    }
}

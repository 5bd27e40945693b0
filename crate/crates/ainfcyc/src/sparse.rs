//! Sparse linear combinations with canonical (zero-free, ordered) storage.

use std::collections::BTreeMap;
use std::fmt;

use crate::signcore::Scalar;

/// A finite linear combination of keys with scalar coefficients.
///
/// Zero coefficients are never stored, so `==` on the underlying maps is
/// equality of linear combinations.
#[derive(Clone, PartialEq, Eq)]
pub struct LinComb<K: Ord + Clone, S: Scalar> {
    terms: BTreeMap<K, S>,
}

impl<K: Ord + Clone, S: Scalar> Default for LinComb<K, S> {
    fn default() -> Self {
        LinComb { terms: BTreeMap::new() }
    }
}

impl<K: Ord + Clone, S: Scalar> LinComb<K, S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(key: K, coeff: S) -> Self {
        let mut lc = Self::new();
        lc.add_term(key, coeff);
        lc
    }

    pub fn add_term(&mut self, key: K, coeff: S) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.remove(&key) {
            None => {
                self.terms.insert(key, coeff);
            }
            Some(old) => {
                let sum = old + coeff;
                if !sum.is_zero() {
                    self.terms.insert(key, sum);
                }
            }
        }
    }

    pub fn add(&mut self, other: &Self) {
        for (k, c) in &other.terms {
            self.add_term(k.clone(), c.clone());
        }
    }

    pub fn sub(&mut self, other: &Self) {
        for (k, c) in &other.terms {
            self.add_term(k.clone(), -c.clone());
        }
    }

    pub fn scale(&mut self, s: &S) {
        if s.is_zero() {
            self.terms.clear();
            return;
        }
        let old = std::mem::take(&mut self.terms);
        for (k, c) in old {
            let c = c * s.clone();
            if !c.is_zero() {
                self.terms.insert(k, c);
            }
        }
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

    pub fn get(&self, key: &K) -> Option<&S> {
        self.terms.get(key)
    }

    pub fn coeff(&self, key: &K) -> S {
        self.terms.get(key).cloned().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &S)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.terms.keys()
    }

    pub fn into_iter_terms(self) -> impl Iterator<Item = (K, S)> {
        self.terms.into_iter()
    }

    pub fn map_keys<K2: Ord + Clone>(&self, mut f: impl FnMut(&K) -> K2) -> LinComb<K2, S> {
        let mut out = LinComb::new();
        for (k, c) in &self.terms {
            out.add_term(f(k), c.clone());
        }
        out
    }

    /// Keep only the terms satisfying the predicate.
    pub fn filter(&self, mut pred: impl FnMut(&K) -> bool) -> Self {
        let mut out = Self::new();
        for (k, c) in &self.terms {
            if pred(k) {
                out.add_term(k.clone(), c.clone());
            }
        }
        out
    }
}

impl<K: Ord + Clone + fmt::Debug, S: Scalar> fmt::Debug for LinComb<K, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})*{k:?}")?;
        }
        Ok(())
    }
}

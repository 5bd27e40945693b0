//! Bar tensor-coalgebra: A-infinity structures as coderivations and
//! A-infinity morphisms as cohomomorphisms, with their defining identities
//! computed as explicit defect maps.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::signcore::{sign_pow, BasisElement, Scalar};
use crate::sparse::LinComb;

/// A word in the bar coalgebra, as indices into the basis. The empty word
/// is the coalgebra counit part of the augmented bar complex.
pub type TensorWord = Vec<usize>;

/// An ordered basis of the underlying graded space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    pub elements: Vec<BasisElement>,
}

impl Basis {
    pub fn new(elements: Vec<BasisElement>) -> Result<Self> {
        let units = elements.iter().filter(|e| e.is_unit).count();
        if units > 1 {
            return Err(Error::Malformed("more than one unit flagged".into()));
        }
        Ok(Basis { elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn shifted_degree(&self, i: usize) -> i64 {
        self.elements[i].shifted_degree()
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.elements[i].degree
    }

    pub fn unit_index(&self) -> Option<usize> {
        self.elements.iter().position(|e| e.is_unit)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.id == id)
    }

    pub fn word_shifted_degree(&self, w: &[usize]) -> i64 {
        w.iter().map(|&i| self.shifted_degree(i)).sum()
    }

    pub fn id(&self, i: usize) -> &str {
        &self.elements[i].id
    }
}

/// All words of length `1..=max_len` over `n` letters, in length-lex order.
pub fn words_up_to(n: usize, max_len: usize) -> Vec<TensorWord> {
    let mut out = Vec::new();
    let mut current: Vec<TensorWord> = vec![vec![]];
    for _ in 1..=max_len {
        let mut next = Vec::new();
        for w in &current {
            for i in 0..n {
                let mut w2 = w.clone();
                w2.push(i);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        current = next;
    }
    out
}

/// An A-infinity structure: a basis together with sparse structure
/// constants for the operations `m_k`, truncated at word length `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AInftyStructure<S: Scalar> {
    pub basis: Basis,
    /// input word (length = arity) -> output vector
    ops: BTreeMap<TensorWord, LinComb<usize, S>>,
    pub truncation_order: usize,
    /// Set by the filtered layer: arity-0 terms allowed, degree checked mod 2.
    pub filtered_grading: bool,
}

impl<S: Scalar> AInftyStructure<S> {
    pub fn new(basis: Basis, truncation_order: usize) -> Self {
        AInftyStructure { basis, ops: BTreeMap::new(), truncation_order, filtered_grading: false }
    }

    pub fn new_filtered(basis: Basis, truncation_order: usize) -> Self {
        AInftyStructure { basis, ops: BTreeMap::new(), truncation_order, filtered_grading: true }
    }

    /// Records `m(inputs) += outputs`, checking that the operation has
    /// shifted degree +1 (mod 2 in filtered grading, where the suppressed
    /// Maslov component of the energy tag shifts degrees by even amounts).
    pub fn add_op(&mut self, inputs: &[usize], outputs: &[(usize, S)]) -> Result<()> {
        if inputs.is_empty() && !self.filtered_grading {
            return Err(Error::ArityZeroUnfiltered);
        }
        let in_deg = self.basis.word_shifted_degree(inputs);
        for &(out, ref c) in outputs {
            if out >= self.basis.len() {
                return Err(Error::Malformed(format!("output index {out} out of range")));
            }
            if c.is_zero() {
                continue;
            }
            let out_deg = self.basis.shifted_degree(out);
            let ok = if self.filtered_grading {
                (out_deg - in_deg - 1).rem_euclid(2) == 0
            } else {
                out_deg == in_deg + 1
            };
            if !ok {
                return Err(Error::DegreeMismatch(format!(
                    "m({:?}) -> {} has shifted degree {} expected {}",
                    inputs, out, out_deg, in_deg + 1
                )));
            }
        }
        let entry = self.ops.entry(inputs.to_vec()).or_default();
        for (out, c) in outputs {
            entry.add_term(*out, c.clone());
        }
        if entry.is_zero() {
            self.ops.remove(inputs);
        }
        Ok(())
    }

    /// The value `m_k(w)` for `k = w.len()`; zero if not stored.
    pub fn eval_op(&self, w: &[usize]) -> LinComb<usize, S> {
        self.ops.get(w).cloned().unwrap_or_default()
    }

    pub fn ops(&self) -> &BTreeMap<TensorWord, LinComb<usize, S>> {
        &self.ops
    }

    /// Largest arity with a stored operation.
    pub fn max_arity(&self) -> usize {
        self.ops.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    pub fn has_arity_zero(&self) -> bool {
        self.ops.contains_key(&Vec::new())
    }

    /// Whether `m_1 = 0` (minimality; `m_{1,0} = 0` is checked by the
    /// filtered layer separately).
    pub fn is_minimal(&self) -> bool {
        !self.ops.keys().any(|w| w.len() == 1)
    }

    fn check_word(&self, w: &[usize]) -> Result<()> {
        for &i in w {
            if i >= self.basis.len() {
                return Err(Error::Malformed(format!("basis index {i} out of range")));
            }
        }
        Ok(())
    }

    /// Coderivation extension of the arity-`k` part on a word:
    /// `sum_i (-1)^{|x_1|'+...+|x_{i-1}|'} x_1 ... m_k(x_i..x_{i+k-1}) ... x_n`.
    ///
    /// For `k = 0` the operation is inserted at every gap of the word.
    pub fn hat_extend(&self, k: usize, w: &[usize]) -> Result<LinComb<TensorWord, S>> {
        self.check_word(w)?;
        let n = w.len();
        let mut out = LinComb::new();
        if k > n {
            return Ok(out);
        }
        for i in 0..=(n - k) {
            let window = &w[i..i + k];
            let vals = match self.ops.get(window) {
                Some(v) => v,
                None => continue,
            };
            let sign = sign_pow(self.basis.word_shifted_degree(&w[..i]));
            for (&out_idx, c) in vals.iter() {
                let mut nw = Vec::with_capacity(n - k + 1);
                nw.extend_from_slice(&w[..i]);
                nw.push(out_idx);
                nw.extend_from_slice(&w[i + k..]);
                out.add_term(nw, c.clone().signed(sign));
            }
        }
        Ok(out)
    }

    /// The full coderivation `d^ = sum_k m^_k` on a word, truncated at `N`.
    pub fn dhat(&self, w: &[usize]) -> Result<LinComb<TensorWord, S>> {
        let mut out = LinComb::new();
        let arities: Vec<usize> = self.ops.keys().map(|k| k.len()).collect();
        let mut seen = std::collections::BTreeSet::new();
        for k in arities {
            if seen.insert(k) {
                out.add(&self.hat_extend(k, w)?);
            }
        }
        Ok(out.filter(|nw| nw.len() <= self.truncation_order))
    }

    pub fn dhat_lin(&self, lc: &LinComb<TensorWord, S>) -> Result<LinComb<TensorWord, S>> {
        let mut out = LinComb::new();
        for (w, c) in lc.iter() {
            let mut dw = self.dhat(w)?;
            dw.scale(c);
            out.add(&dw);
        }
        Ok(out)
    }

    /// All nonzero coefficients of `(d^ o d^)(w)` over words of length <= N.
    /// Empty iff the structure is A-infinity up to the truncation order.
    pub fn ainfty_defect(&self) -> Result<BTreeMap<TensorWord, LinComb<TensorWord, S>>> {
        let mut defects = BTreeMap::new();
        for w in words_up_to(self.basis.len(), self.truncation_order) {
            let dd = self.dhat_lin(&self.dhat(&w)?)?;
            if !dd.is_zero() {
                defects.insert(w, dd);
            }
        }
        Ok(defects)
    }

    /// Verifies the unit axioms against the stored structure constants.
    /// Returns the list of violated identities (empty = pass).
    pub fn unit_check(&self) -> Result<Vec<String>> {
        let unit = self.basis.unit_index().ok_or(Error::NoUnit)?;
        let mut violations = Vec::new();
        // m_{k+1}(..., I, ...) = 0 for k != 2 slots: any stored op of arity
        // != 2 whose inputs contain the unit is a violation.
        for (w, vals) in &self.ops {
            if w.len() != 2 && w.contains(&unit) && !vals.is_zero() {
                violations.push(format!(
                    "m_{}({:?}) nonzero with unit input",
                    w.len(),
                    w.iter().map(|&i| self.basis.id(i)).collect::<Vec<_>>()
                ));
            }
        }
        // m_2(I,x) = x and m_2(x,I) = (-1)^{deg x} x for every basis x.
        for x in 0..self.basis.len() {
            let left = self.eval_op(&[unit, x]);
            if left != LinComb::singleton(x, S::one()) {
                violations.push(format!("m_2(I, {}) != {}", self.basis.id(x), self.basis.id(x)));
            }
            let right = self.eval_op(&[x, unit]);
            let expect = LinComb::singleton(x, S::one().signed(sign_pow(self.basis.degree(x))));
            if right != expect {
                violations.push(format!(
                    "m_2({}, I) != (-1)^deg {}",
                    self.basis.id(x),
                    self.basis.id(x)
                ));
            }
        }
        Ok(violations)
    }
}

/// A cohomomorphism of bar coalgebras, given by its components
/// `f_k : (C[1])^{tensor k} -> C[1]` of shifted degree 0 (mod 2 in the
/// filtered layer, where the suppressed even Maslov tags shift degrees).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cohomomorphism<S: Scalar> {
    pub dom: Basis,
    pub cod: Basis,
    components: BTreeMap<TensorWord, LinComb<usize, S>>,
    pub truncation_order: usize,
    pub filtered_grading: bool,
}

impl<S: Scalar> Cohomomorphism<S> {
    pub fn new(dom: Basis, cod: Basis, truncation_order: usize) -> Self {
        Cohomomorphism {
            dom,
            cod,
            components: BTreeMap::new(),
            truncation_order,
            filtered_grading: false,
        }
    }

    pub fn new_filtered(dom: Basis, cod: Basis, truncation_order: usize) -> Self {
        let mut f = Cohomomorphism::new(dom, cod, truncation_order);
        f.filtered_grading = true;
        f
    }

    pub fn identity(basis: Basis, truncation_order: usize) -> Self {
        let mut f = Cohomomorphism::new(basis.clone(), basis, truncation_order);
        for i in 0..f.dom.len() {
            f.add_component(&[i], &[(i, S::one())]).expect("identity is degree 0");
        }
        f
    }

    pub fn identity_filtered(basis: Basis, truncation_order: usize) -> Self {
        let mut f = Cohomomorphism::identity(basis, truncation_order);
        f.filtered_grading = true;
        f
    }

    pub fn is_identity(&self) -> bool {
        self.components.iter().all(|(w, v)| {
            w.len() == 1 && *v == LinComb::singleton(w[0], S::one())
        }) && (0..self.dom.len())
            .all(|i| self.components.get(&vec![i]) == Some(&LinComb::singleton(i, S::one())))
    }

    pub fn add_component(&mut self, inputs: &[usize], outputs: &[(usize, S)]) -> Result<()> {
        if inputs.is_empty() {
            return Err(Error::ArityZeroUnfiltered);
        }
        let in_deg = self.dom.word_shifted_degree(inputs);
        for &(out, ref c) in outputs {
            if c.is_zero() {
                continue;
            }
            let diff = self.cod.shifted_degree(out) - in_deg;
            let ok = if self.filtered_grading { diff.rem_euclid(2) == 0 } else { diff == 0 };
            if !ok {
                return Err(Error::DegreeMismatch(format!(
                    "f({inputs:?}) -> {out} is not of shifted degree 0"
                )));
            }
        }
        let entry = self.components.entry(inputs.to_vec()).or_default();
        for (out, c) in outputs {
            entry.add_term(*out, c.clone());
        }
        if entry.is_zero() {
            self.components.remove(inputs);
        }
        Ok(())
    }

    pub fn component(&self, w: &[usize]) -> LinComb<usize, S> {
        self.components.get(w).cloned().unwrap_or_default()
    }

    pub fn components(&self) -> &BTreeMap<TensorWord, LinComb<usize, S>> {
        &self.components
    }

    /// The induced coalgebra map on a word: the sum over ordered partitions
    /// of the word into blocks of tensor products of components. Components
    /// have shifted degree 0, so no Koszul signs arise from moving them.
    pub fn hat(&self, w: &[usize]) -> LinComb<TensorWord, S> {
        let n = w.len();
        if n == 0 {
            return LinComb::singleton(Vec::new(), S::one());
        }
        // dp[i] = f^ of the prefix w[..i]
        let mut dp: Vec<LinComb<TensorWord, S>> = Vec::with_capacity(n + 1);
        dp.push(LinComb::singleton(Vec::new(), S::one()));
        for i in 1..=n {
            let mut acc = LinComb::new();
            for j in 0..i {
                let block = &w[j..i];
                let vals = match self.components.get(block) {
                    Some(v) => v,
                    None => continue,
                };
                for (pw, pc) in dp[j].iter() {
                    for (&out, c) in vals.iter() {
                        let mut nw = pw.clone();
                        nw.push(out);
                        acc.add_term(nw, pc.clone() * c.clone());
                    }
                }
            }
            dp.push(acc);
        }
        dp.pop().unwrap().filter(|nw| nw.len() <= self.truncation_order)
    }

    pub fn hat_lin(&self, lc: &LinComb<TensorWord, S>) -> LinComb<TensorWord, S> {
        let mut out = LinComb::new();
        for (w, c) in lc.iter() {
            let mut fw = self.hat(w);
            fw.scale(c);
            out.add(&fw);
        }
        out
    }

    /// Defect of the homomorphism identity `d^_B o f^ - f^ o d^_A` over all
    /// words of length <= N; empty iff `f` is an A-infinity homomorphism up
    /// to the truncation order.
    pub fn homomorphism_defect(
        &self,
        a: &AInftyStructure<S>,
        b: &AInftyStructure<S>,
    ) -> Result<BTreeMap<TensorWord, LinComb<TensorWord, S>>> {
        if a.basis != self.dom || b.basis != self.cod {
            return Err(Error::Malformed("cohomomorphism basis mismatch".into()));
        }
        let mut defects = BTreeMap::new();
        for w in words_up_to(self.dom.len(), self.truncation_order) {
            let mut lhs = b.dhat_lin(&self.hat(&w))?;
            let rhs = self.hat_lin(&a.dhat(&w)?);
            lhs.sub(&rhs);
            if !lhs.is_zero() {
                defects.insert(w, lhs);
            }
        }
        Ok(defects)
    }

    /// Composite `f o g` as a cohomomorphism (components of `f^ o g^`
    /// re-projected to arity families).
    pub fn compose(&self, g: &Cohomomorphism<S>) -> Result<Cohomomorphism<S>> {
        if g.cod != self.dom {
            return Err(Error::Malformed("compose: codomain/domain mismatch".into()));
        }
        let n = self.truncation_order.min(g.truncation_order);
        let mut out = Cohomomorphism::new(g.dom.clone(), self.cod.clone(), n);
        out.filtered_grading = self.filtered_grading || g.filtered_grading;
        for w in words_up_to(g.dom.len(), n) {
            // (f o g)_k(w) = sum over g^(w) of f applied to the whole word.
            let mut val: LinComb<usize, S> = LinComb::new();
            for (u, c) in g.hat(&w).iter() {
                let mut fu = self.component(u);
                fu.scale(c);
                val.add(&fu);
            }
            if !val.is_zero() {
                let terms: Vec<(usize, S)> =
                    val.iter().map(|(&i, c)| (i, c.clone())).collect();
                out.add_component(&w, &terms)?;
            }
        }
        Ok(out)
    }
}

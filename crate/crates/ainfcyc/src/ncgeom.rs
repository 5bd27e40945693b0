//! The dual picture: noncommutative polynomials in the dual variables
//! `x_i, dx_i`, cyclic differential forms with the Cartan calculus, the
//! vector field `Q` of an A-infinity structure, and the Poincare homotopy.
//!
//! Degrees: `|x_i|' = -|e_i|'`, `|dx_i|' = |x_i|'`, `#(x) = 0`, `#(dx) = 1`.
//! All signs route through [`crate::signcore`].

use crate::barcx::{AInftyStructure, Basis, Cohomomorphism};
use crate::error::{Error, Result};
use crate::signcore::{sign_pow, GradedSymbol, Rational, Scalar};
use crate::sparse::LinComb;

/// Kind of a formal letter. `Dx` sorts before `X`, fixing the total order
/// used by cyclic canonicalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Dx,
    X,
}

/// A formal letter `x_i` or `dx_i` over basis index `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub kind: Kind,
    pub index: usize,
}

impl Letter {
    pub fn x(index: usize) -> Self {
        Letter { kind: Kind::X, index }
    }

    pub fn dx(index: usize) -> Self {
        Letter { kind: Kind::Dx, index }
    }

    pub fn symbol(&self, basis: &Basis) -> GradedSymbol {
        let deg = -basis.shifted_degree(self.index);
        match self.kind {
            Kind::X => GradedSymbol::new(deg, 0),
            Kind::Dx => GradedSymbol::new(deg, 1),
        }
    }
}

/// A word of letters; monomial of `O(T[1]X)`.
pub type LWord = Vec<Letter>;

pub fn word_degrees(basis: &Basis, w: &[Letter]) -> (i64, i64) {
    let mut d = 0;
    let mut s = 0;
    for l in w {
        let g = l.symbol(basis);
        d += g.shifted_degree;
        s += g.sharp;
    }
    (d, s)
}

/// Number of `dx` letters in the word (the form degree).
pub fn form_degree(w: &[Letter]) -> usize {
    w.iter().filter(|l| l.kind == Kind::Dx).count()
}

/// Canonical cyclic representative: the lexicographically least rotation,
/// with the Koszul sign of rotating the original word onto it, so that
/// `[word] = sign * [canonical]`. Returns `None` when some rotation fixes
/// the canonical word with sign -1 (the class is zero over a char-0 field).
pub fn canonicalize_cyclic(basis: &Basis, word: &[Letter]) -> Result<Option<(LWord, i64)>> {
    if word.is_empty() {
        return Err(Error::Precondition("empty word has no cyclic representative".into()));
    }
    let n = word.len();
    // rotation by r: word[r..] ++ word[..r]; sign of moving the length-r
    // prefix block past the rest.
    let (total_d, total_s) = word_degrees(basis, word);
    let mut rotations: Vec<(LWord, i64)> = Vec::with_capacity(n);
    let mut pre_d = 0i64;
    let mut pre_s = 0i64;
    for r in 0..n {
        let sign = if r == 0 {
            1
        } else {
            sign_pow(pre_d * (total_d - pre_d) + pre_s * (total_s - pre_s))
        };
        let mut rot = Vec::with_capacity(n);
        rot.extend_from_slice(&word[r..]);
        rot.extend_from_slice(&word[..r]);
        rotations.push((rot, sign));
        let g = word[r].symbol(basis);
        pre_d += g.shifted_degree;
        pre_s += g.sharp;
    }
    let best = rotations.iter().map(|(w, _)| w).min().unwrap().clone();
    let signs: Vec<i64> =
        rotations.iter().filter(|(w, _)| *w == best).map(|(_, s)| *s).collect();
    // a periodic word fixed by some rotation with sign -1 is the zero class
    if signs.iter().any(|&s| s != signs[0]) {
        return Ok(None);
    }
    Ok(Some((best, signs[0])))
}

/// Noncommutative polynomial in the letters, truncated by letter count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NCPoly<S: Scalar> {
    pub terms: LinComb<LWord, S>,
    pub truncation_order: usize,
}

impl<S: Scalar> NCPoly<S> {
    pub fn zero(truncation_order: usize) -> Self {
        NCPoly { terms: LinComb::new(), truncation_order }
    }

    pub fn constant(c: S, truncation_order: usize) -> Self {
        NCPoly { terms: LinComb::singleton(Vec::new(), c), truncation_order }
    }

    pub fn monomial(word: LWord, c: S, truncation_order: usize) -> Self {
        let mut p = Self::zero(truncation_order);
        p.add_term(word, c);
        p
    }

    pub fn add_term(&mut self, word: LWord, c: S) {
        if word.len() <= self.truncation_order {
            self.terms.add_term(word, c);
        }
    }

    pub fn add(&mut self, other: &Self) {
        for (w, c) in other.terms.iter() {
            self.add_term(w.clone(), c.clone());
        }
    }

    pub fn sub(&mut self, other: &Self) {
        for (w, c) in other.terms.iter() {
            self.add_term(w.clone(), -c.clone());
        }
    }

    pub fn scale(&mut self, s: &S) {
        self.terms.scale(s);
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    /// Concatenation product, truncated. No signs: letters are not moved.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.truncation_order.min(other.truncation_order);
        let mut out = Self::zero(n);
        for (w1, c1) in self.terms.iter() {
            for (w2, c2) in other.terms.iter() {
                if w1.len() + w2.len() > n {
                    continue;
                }
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                out.add_term(w, c1.clone() * c2.clone());
            }
        }
        out
    }

    /// Least word length with a nonzero term, if any.
    pub fn min_order(&self) -> Option<usize> {
        self.terms.keys().map(|w| w.len()).min()
    }
}

/// A cyclic differential form: linear combination of canonical cyclic
/// words. The empty word is the constant part of `Omega^0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicForm<S: Scalar> {
    terms: LinComb<LWord, S>,
    pub truncation_order: usize,
}

impl<S: Scalar> CyclicForm<S> {
    pub fn zero(truncation_order: usize) -> Self {
        CyclicForm { terms: LinComb::new(), truncation_order }
    }

    /// Adds `c * [word]`, canonicalizing the key.
    pub fn add_word(&mut self, basis: &Basis, word: LWord, c: S) -> Result<()> {
        if word.len() > self.truncation_order {
            return Ok(());
        }
        if word.is_empty() {
            self.terms.add_term(word, c);
            return Ok(());
        }
        if let Some((canon, sign)) = canonicalize_cyclic(basis, &word)? {
            self.terms.add_term(canon, c.signed(sign));
        }
        Ok(())
    }

    pub fn add(&mut self, other: &Self) {
        for (w, c) in other.terms.iter() {
            if w.len() <= self.truncation_order {
                self.terms.add_term(w.clone(), c.clone());
            }
        }
    }

    pub fn sub(&mut self, other: &Self) {
        for (w, c) in other.terms.iter() {
            if w.len() <= self.truncation_order {
                self.terms.add_term(w.clone(), -c.clone());
            }
        }
    }

    pub fn scale(&mut self, s: &S) {
        self.terms.scale(s);
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    pub fn terms(&self) -> &LinComb<LWord, S> {
        &self.terms
    }

    pub fn constant_term(&self) -> S {
        self.terms.coeff(&Vec::new())
    }

    pub fn has_constant_term(&self) -> bool {
        !self.constant_term().is_zero()
    }

    /// Least letter count among nonzero terms.
    pub fn min_order(&self) -> Option<usize> {
        self.terms.keys().map(|w| w.len()).min()
    }

    /// The sub-form of terms with exactly `len` letters.
    pub fn length_part(&self, len: usize) -> Self {
        CyclicForm { terms: self.terms.filter(|w| w.len() == len), truncation_order: self.truncation_order }
    }

    pub fn from_poly(basis: &Basis, p: &NCPoly<S>) -> Result<Self> {
        let mut out = Self::zero(p.truncation_order);
        for (w, c) in p.terms.iter() {
            out.add_word(basis, w.clone(), c.clone())?;
        }
        Ok(out)
    }
}

/// A formal vector field `sum_i f_i(x) d/dx_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalVectorField<S: Scalar> {
    pub components: Vec<NCPoly<S>>,
    pub truncation_order: usize,
}

impl<S: Scalar> FormalVectorField<S> {
    pub fn zero(n_vars: usize, truncation_order: usize) -> Self {
        FormalVectorField {
            components: vec![NCPoly::zero(truncation_order); n_vars],
            truncation_order,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn add(&mut self, other: &Self) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.add(b);
        }
    }

    pub fn scale(&mut self, s: &S) {
        for c in self.components.iter_mut() {
            c.scale(s);
        }
    }

    pub fn negate(&self) -> Self {
        let mut v = self.clone();
        v.scale(&(-S::one()));
        v
    }

    /// Least component word length, or `None` for the zero field.
    pub fn min_order(&self) -> Option<usize> {
        self.components.iter().filter_map(|c| c.min_order()).min()
    }

    /// Operator shifted degree of the term `(i, word)`: replacing `x_i` (or
    /// `dx_i`) by the word changes `|.|'` by `|word|' - |x_i|'`.
    fn term_degree(&self, basis: &Basis, i: usize, word: &[Letter]) -> i64 {
        word_degrees(basis, word).0 - Letter::x(i).symbol(basis).shifted_degree
    }
}

/// The vector field `Q` of an A-infinity structure:
/// `Q = sum a_i^{j_1..j_k} x_{j_k} .. x_{j_1} d/dx_i` where
/// `m(e_{j_1},..,e_{j_k}) = sum a_i e_i`. The monomial indices are
/// reversed relative to the operation inputs; see the dual-pairing note in
/// the module tests (the choice is pinned by the `[Q,Q] = 0` equivalence).
pub fn q_from_structure<S: Scalar>(a: &AInftyStructure<S>) -> FormalVectorField<S> {
    let n = a.basis.len();
    let mut q = FormalVectorField::zero(n, a.truncation_order);
    for (inputs, outputs) in a.ops() {
        let word: LWord = inputs.iter().rev().map(|&j| Letter::x(j)).collect();
        for (&i, c) in outputs.iter() {
            q.components[i].add_term(word.clone(), c.clone());
        }
    }
    q
}

/// De Rham differential on `O(T[1]X)`: replaces one `x` letter by `dx` per
/// term with the prefix sign `(-1)^{#(prefix)}`.
pub fn d_poly<S: Scalar>(basis: &Basis, p: &NCPoly<S>) -> NCPoly<S> {
    let mut out = NCPoly::zero(p.truncation_order);
    for (w, c) in p.terms.iter() {
        let mut sharp_prefix = 0i64;
        for (pos, l) in w.iter().enumerate() {
            if l.kind == Kind::X {
                let mut nw = w.clone();
                nw[pos] = Letter::dx(l.index);
                out.add_term(nw, c.clone().signed(sign_pow(sharp_prefix)));
            }
            sharp_prefix += l.symbol(basis).sharp;
        }
    }
    out
}

/// Cyclic de Rham differential; raises form degree by one, `d o d = 0`.
pub fn d_cyc<S: Scalar>(basis: &Basis, omega: &CyclicForm<S>) -> Result<CyclicForm<S>> {
    let mut out = CyclicForm::zero(omega.truncation_order);
    for (w, c) in omega.terms.iter() {
        let mut sharp_prefix = 0i64;
        for (pos, l) in w.iter().enumerate() {
            if l.kind == Kind::X {
                let mut nw = w.clone();
                nw[pos] = Letter::dx(l.index);
                out.add_word(basis, nw, c.clone().signed(sign_pow(sharp_prefix)))?;
            }
            sharp_prefix += l.symbol(basis).sharp;
        }
    }
    Ok(out)
}

/// Interior product `i_xi`: replaces one `dx_j` per term by the `j`-th
/// component of the field, with the Koszul sign of moving the (term of
/// the) operator past the prefix. `i_xi(f) = 0` on 0-forms.
pub fn contract<S: Scalar>(
    basis: &Basis,
    xi: &FormalVectorField<S>,
    omega: &CyclicForm<S>,
) -> Result<CyclicForm<S>> {
    let mut out = CyclicForm::zero(omega.truncation_order);
    for (w, c) in omega.terms.iter() {
        let mut pre_d = 0i64;
        let mut pre_s = 0i64;
        for (pos, l) in w.iter().enumerate() {
            if l.kind == Kind::Dx {
                let comp = &xi.components[l.index];
                for (g, cg) in comp.terms.iter() {
                    let op_deg = xi.term_degree(basis, l.index, g);
                    // operator bidegree (op_deg, -1) moves past the prefix
                    let sign = sign_pow(op_deg * pre_d + -pre_s);
                    let mut nw = Vec::with_capacity(w.len() - 1 + g.len());
                    nw.extend_from_slice(&w[..pos]);
                    nw.extend_from_slice(g);
                    nw.extend_from_slice(&w[pos + 1..]);
                    out.add_word(basis, nw, c.clone() * cg.clone().signed(sign))?;
                }
            }
            let s = l.symbol(basis);
            pre_d += s.shifted_degree;
            pre_s += s.sharp;
        }
    }
    Ok(out)
}

/// Lie derivative `L_xi = d o i_xi + i_xi o d`; preserves form degree.
pub fn lie_derivative<S: Scalar>(
    basis: &Basis,
    xi: &FormalVectorField<S>,
    omega: &CyclicForm<S>,
) -> Result<CyclicForm<S>> {
    let mut a = d_cyc(basis, &contract(basis, xi, omega)?)?;
    let b = contract(basis, xi, &d_cyc(basis, omega)?)?;
    a.add(&b);
    Ok(a)
}

/// Applies the single derivation `x_i -> g` to a polynomial (used for
/// vector-field composition; all letters here are plain `x`).
fn single_derivation_poly<S: Scalar>(
    basis: &Basis,
    i: usize,
    g: &[Letter],
    op_deg: i64,
    p: &NCPoly<S>,
) -> NCPoly<S> {
    let mut out = NCPoly::zero(p.truncation_order);
    for (w, c) in p.terms.iter() {
        let mut pre_d = 0i64;
        for (pos, l) in w.iter().enumerate() {
            if l.kind == Kind::X && l.index == i {
                let sign = sign_pow(op_deg * pre_d);
                let mut nw = Vec::with_capacity(w.len() - 1 + g.len());
                nw.extend_from_slice(&w[..pos]);
                nw.extend_from_slice(g);
                nw.extend_from_slice(&w[pos + 1..]);
                out.add_term(nw, c.clone().signed(sign));
            }
            pre_d += l.symbol(basis).shifted_degree;
        }
    }
    out
}

/// Graded bracket of vector fields, defined term by term:
/// `[xi, eta]_j = xi(eta_j) - (-1)^{|xi|'|eta|'} eta(xi_j)`.
pub fn vf_bracket<S: Scalar>(
    basis: &Basis,
    xi: &FormalVectorField<S>,
    eta: &FormalVectorField<S>,
) -> FormalVectorField<S> {
    let n = basis.len();
    let order = xi.truncation_order.min(eta.truncation_order);
    let mut out = FormalVectorField::zero(n, order);
    for i in 0..n {
        for (ga, ca) in xi.components[i].terms.iter() {
            let deg_a = xi.term_degree(basis, i, ga);
            for j in 0..n {
                // xi-term applied to eta_j, contributing to component j
                let mut t = single_derivation_poly(
                    basis,
                    i,
                    ga,
                    deg_a,
                    &eta.components[j],
                );
                t.scale(ca);
                out.components[j].add(&t);
            }
        }
    }
    for j in 0..n {
        for (gb, cb) in eta.components[j].terms.iter() {
            let deg_b = eta.term_degree(basis, j, gb);
            for i in 0..n {
                for (ga, ca) in xi.components[i].terms.iter() {
                    let deg_a = xi.term_degree(basis, i, ga);
                    let sign = sign_pow(deg_a * deg_b);
                    // minus (-1)^{deg_a deg_b} times the eta-term applied to
                    // the xi-term, contributing to component i
                    let xi_term = NCPoly::monomial(ga.clone(), ca.clone(), order);
                    let mut t = single_derivation_poly(basis, j, gb, deg_b, &xi_term);
                    t.scale(&cb.clone().signed(-sign));
                    out.components[i].add(&t);
                }
            }
        }
    }
    out
}

/// Poincare contracting homotopy: `H(x) = 0`, `H(dx) = x`, averaged over
/// positions with the prefix sign and the `1/k` factor; `dH + Hd = Id` on
/// constant-free forms.
pub fn poincare_h<S: Scalar>(basis: &Basis, omega: &CyclicForm<S>) -> Result<CyclicForm<S>> {
    if omega.has_constant_term() {
        return Err(Error::Precondition("Poincare homotopy needs a constant-free form".into()));
    }
    let mut out = CyclicForm::zero(omega.truncation_order);
    for (w, c) in omega.terms.iter() {
        let k = w.len() as i64;
        let inv_k = S::from_rational(Rational::new(1, k));
        let mut sharp_prefix = 0i64;
        for (pos, l) in w.iter().enumerate() {
            if l.kind == Kind::Dx {
                let mut nw = w.clone();
                nw[pos] = Letter::x(l.index);
                let coeff =
                    c.clone() * inv_k.clone().signed(sign_pow(sharp_prefix));
                out.add_word(basis, nw, coeff)?;
            }
            sharp_prefix += l.symbol(basis).sharp;
        }
    }
    Ok(out)
}

/// Coordinate-substitution pullback of a polynomial along a cohomomorphism:
/// `x_i` goes to the component series of `F`, `dx_i` to its letterwise
/// differential; multiplicative by construction.
pub fn pullback_poly<S: Scalar>(
    basis: &Basis,
    f: &Cohomomorphism<S>,
    p: &NCPoly<S>,
) -> NCPoly<S> {
    let (images, dimages) = substitution_series(basis, f, p.truncation_order);
    let mut out = NCPoly::zero(p.truncation_order);
    for (w, c) in p.terms.iter() {
        let mut acc = NCPoly::constant(S::one(), p.truncation_order);
        for l in w {
            let img = match l.kind {
                Kind::X => &images[l.index],
                Kind::Dx => &dimages[l.index],
            };
            acc = acc.mul(img);
            if acc.is_zero() {
                break;
            }
        }
        acc.scale(c);
        out.add(&acc);
    }
    out
}

/// Pullback of a cyclic form (substitute, then re-canonicalize).
pub fn pullback_form<S: Scalar>(
    basis: &Basis,
    f: &Cohomomorphism<S>,
    omega: &CyclicForm<S>,
) -> Result<CyclicForm<S>> {
    let mut p = NCPoly::zero(omega.truncation_order);
    for (w, c) in omega.terms.iter() {
        p.add_term(w.clone(), c.clone());
    }
    CyclicForm::from_poly(basis, &pullback_poly(basis, f, &p))
}

/// The substitution series of each variable under `F`, and its
/// differential: `x_i -> sum_w F_w^i x_{w_k} .. x_{w_1}` (indices reversed,
/// matching [`q_from_structure`]).
fn substitution_series<S: Scalar>(
    basis: &Basis,
    f: &Cohomomorphism<S>,
    order: usize,
) -> (Vec<NCPoly<S>>, Vec<NCPoly<S>>) {
    let n = basis.len();
    let mut images = vec![NCPoly::zero(order); n];
    for (w, outs) in f.components() {
        let word: LWord = w.iter().rev().map(|&j| Letter::x(j)).collect();
        for (&i, c) in outs.iter() {
            images[i].add_term(word.clone(), c.clone());
        }
    }
    let dimages = images.iter().map(|p| d_poly(basis, p)).collect();
    (images, dimages)
}

/// `e^{L_v}` on a cyclic form; requires `v` of order >= 2 so that the sum
/// terminates at the truncation order.
pub fn exp_lie<S: Scalar>(
    basis: &Basis,
    v: &FormalVectorField<S>,
    omega: &CyclicForm<S>,
) -> Result<CyclicForm<S>> {
    if let Some(o) = v.min_order() {
        if o < 2 {
            return Err(Error::Precondition(
                "exp_lie requires a vector field of order >= 2".into(),
            ));
        }
    }
    let mut out = omega.clone();
    let mut term = omega.clone();
    let mut factorial = Rational::from_int(1);
    for k in 1..=omega.truncation_order as i64 {
        term = lie_derivative(basis, v, &term)?;
        if term.is_zero() {
            break;
        }
        factorial = factorial * Rational::from_int(k);
        let mut t = term.clone();
        t.scale(&S::from_rational(Rational::from_int(1) / factorial.clone()));
        out.add(&t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barcx::Basis;
    use crate::fixtures;
    use crate::signcore::BasisElement;
    use crate::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn s2_basis() -> Basis {
        fixtures::sphere::<Rational>(8).basis
    }

    #[test]
    fn canonicalize_single_letter() {
        let b = s2_basis();
        let (w, s) = canonicalize_cyclic(&b, &[Letter::dx(0)]).unwrap().unwrap();
        assert_eq!(w, vec![Letter::dx(0)]);
        assert_eq!(s, 1);
    }

    #[test]
    fn canonicalize_transposition_sign() {
        // [x_1, dx_0] rotates to [dx_0, x_1]; the sign is the Koszul sign
        // of moving [x_1] past [dx_0].
        let b = s2_basis();
        let w = vec![Letter::x(1), Letter::dx(0)];
        let (canon, s) = canonicalize_cyclic(&b, &w).unwrap().unwrap();
        assert_eq!(canon, vec![Letter::dx(0), Letter::x(1)]);
        let ls = Letter::x(1).symbol(&b);
        let rs = Letter::dx(0).symbol(&b);
        assert_eq!(s, crate::signcore::koszul_sign_blocks(
            (ls.shifted_degree, ls.sharp),
            (rs.shifted_degree, rs.sharp),
        ));
    }

    #[test]
    fn canonicalize_idempotent_rotation_invariant() {
        let b = fixtures::proj_plane::<Rational>(8).basis;
        let words = vec![
            vec![Letter::x(0), Letter::dx(1), Letter::x(2)],
            vec![Letter::dx(2), Letter::dx(1)],
            vec![Letter::x(1), Letter::x(1), Letter::dx(0), Letter::x(2)],
        ];
        for w in words {
            if let Some((c0, _)) = canonicalize_cyclic(&b, &w).unwrap() {
                for r in 0..w.len() {
                    let mut rot = w[r..].to_vec();
                    rot.extend_from_slice(&w[..r]);
                    if let Some((c1, _)) = canonicalize_cyclic(&b, &rot).unwrap() {
                        assert_eq!(c0, c1);
                    }
                }
                // idempotent
                let (c2, s2) = canonicalize_cyclic(&b, &c0).unwrap().unwrap();
                assert_eq!(c2, c0);
                assert_eq!(s2, 1);
            }
        }
    }

    #[test]
    fn self_rotation_minus_one_is_zero() {
        // [dx_0, dx_0] on S^2: |dx_0|' = 1, # = 1. Rotating by one costs
        // (-1)^{1*1+1*1} = +1, so this class is NOT zero; but for a basis
        // element of odd degree, |dx|' is even and the rotation sign is
        // (-1)^{0*0+1*1} = -1, killing the class.
        let b = Basis::new(vec![BasisElement::new("a", 1)]).unwrap();
        assert!(canonicalize_cyclic(&b, &[Letter::dx(0), Letter::dx(0)]).unwrap().is_none());
        let b2 = s2_basis();
        assert!(canonicalize_cyclic(&b2, &[Letter::dx(0), Letter::dx(0)]).unwrap().is_some());
    }

    #[test]
    fn d_constant_is_zero() {
        let b = s2_basis();
        let mut f = CyclicForm::zero(6);
        f.add_word(&b, vec![], q(3)).unwrap();
        assert!(d_cyc(&b, &f).unwrap().is_zero());
    }

    #[test]
    fn d_two_term_leibniz() {
        let b = s2_basis();
        let mut f = CyclicForm::zero(6);
        f.add_word(&b, vec![Letter::x(0), Letter::x(1)], q(1)).unwrap();
        let df = d_cyc(&b, &f).unwrap();
        // two Leibniz terms, then cyclic canonicalization
        let mut expect = CyclicForm::zero(6);
        expect.add_word(&b, vec![Letter::dx(0), Letter::x(1)], q(1)).unwrap();
        expect
            .add_word(&b, vec![Letter::x(0), Letter::dx(1)], q(1))
            .unwrap();
        assert_eq!(df, expect);
    }

    #[test]
    fn d_squared_zero_randomish() {
        let b = fixtures::proj_plane::<Rational>(8).basis;
        let mut f = CyclicForm::zero(6);
        f.add_word(&b, vec![Letter::x(0), Letter::x(1), Letter::x(2)], q(2)).unwrap();
        f.add_word(&b, vec![Letter::x(1), Letter::dx(2)], q(5)).unwrap();
        f.add_word(&b, vec![Letter::x(0), Letter::x(0), Letter::dx(1), Letter::x(2)], q(-3))
            .unwrap();
        let dd = d_cyc(&b, &d_cyc(&b, &f).unwrap()).unwrap();
        assert!(dd.is_zero(), "{dd:?}");
    }

    #[test]
    fn contract_kills_functions() {
        let b = s2_basis();
        let mut f = CyclicForm::zero(6);
        f.add_word(&b, vec![Letter::x(0), Letter::x(1)], q(1)).unwrap();
        let mut v = FormalVectorField::zero(2, 6);
        v.components[0].add_term(vec![Letter::x(1)], q(1));
        assert!(contract(&b, &v, &f).unwrap().is_zero());
    }

    #[test]
    fn contract_replaces_dx() {
        // field with component c*x_0 at index 1 contracts dx_1 to c*x_0
        let b = s2_basis();
        let mut f = CyclicForm::zero(6);
        f.add_word(&b, vec![Letter::dx(1)], q(1)).unwrap();
        let mut v = FormalVectorField::zero(2, 6);
        v.components[1].add_term(vec![Letter::x(0)], q(7));
        let r = contract(&b, &v, &f).unwrap();
        let mut expect = CyclicForm::zero(6);
        expect.add_word(&b, vec![Letter::x(0)], q(7)).unwrap();
        assert_eq!(r, expect);
    }

    #[test]
    fn lie_derivative_of_constant_is_zero() {
        let b = s2_basis();
        let mut f = CyclicForm::zero(6);
        f.add_word(&b, vec![], q(4)).unwrap();
        let mut v = FormalVectorField::zero(2, 6);
        v.components[0].add_term(vec![Letter::x(1), Letter::x(1)], q(1));
        assert!(lie_derivative(&b, &v, &f).unwrap().is_zero());
    }

    #[test]
    fn bracket_with_zero() {
        let b = s2_basis();
        let z = FormalVectorField::<Rational>::zero(2, 6);
        let mut v = FormalVectorField::zero(2, 6);
        v.components[0].add_term(vec![Letter::x(1), Letter::x(0)], q(2));
        assert!(vf_bracket(&b, &v, &z).is_zero());
        assert!(vf_bracket(&b, &z, &v).is_zero());
    }

    #[test]
    fn q_bracket_is_twice_square_on_s2() {
        // [Q,Q](f) = 2 Q(Q(f)); as coefficients, [Q,Q] = 0 iff A-infinity
        let s = fixtures::sphere::<Rational>(6);
        let qf = q_from_structure(&s);
        let br = vf_bracket(&s.basis, &qf, &qf);
        assert!(br.is_zero(), "{br:?}");
    }

    #[test]
    fn q_bracket_nonzero_on_broken_structure() {
        let mut s = fixtures::sphere::<Rational>(6);
        let u = s.basis.index_of("u").unwrap();
        let t = s.basis.index_of("t").unwrap();
        s.add_op(&[u, t], &[(t, q(1))]).unwrap(); // doubles m_2(u,t)
        assert!(!s.ainfty_defect().unwrap().is_empty());
        let qf = q_from_structure(&s);
        assert!(!vf_bracket(&s.basis, &qf, &qf).is_zero());
    }

    #[test]
    fn poincare_basics() {
        let b = s2_basis();
        let mut f = CyclicForm::zero(6);
        f.add_word(&b, vec![Letter::x(0), Letter::x(1)], q(1)).unwrap();
        assert!(poincare_h(&b, &f).unwrap().is_zero());
        let mut g = CyclicForm::zero(6);
        g.add_word(&b, vec![Letter::dx(0)], q(1)).unwrap();
        let hg = poincare_h(&b, &g).unwrap();
        let mut expect = CyclicForm::zero(6);
        expect.add_word(&b, vec![Letter::x(0)], q(1)).unwrap();
        assert_eq!(hg, expect);
        // constant term is rejected
        let mut c = CyclicForm::zero(6);
        c.add_word(&b, vec![], q(1)).unwrap();
        assert!(poincare_h(&b, &c).is_err());
    }

    #[test]
    fn poincare_homotopy_identity_samples() {
        let b = fixtures::proj_plane::<Rational>(8).basis;
        let mut f = CyclicForm::zero(6);
        f.add_word(&b, vec![Letter::x(0), Letter::dx(1), Letter::x(2)], q(2)).unwrap();
        f.add_word(&b, vec![Letter::x(1), Letter::x(1)], q(3)).unwrap();
        f.add_word(&b, vec![Letter::dx(2), Letter::dx(1), Letter::x(0)], q(-5)).unwrap();
        let mut lhs = d_cyc(&b, &poincare_h(&b, &f).unwrap()).unwrap();
        lhs.add(&poincare_h(&b, &d_cyc(&b, &f).unwrap()).unwrap());
        assert_eq!(lhs, f);
    }

    #[test]
    fn exp_lie_identity_for_zero_field() {
        let b = s2_basis();
        let mut f = CyclicForm::zero(6);
        f.add_word(&b, vec![Letter::dx(0), Letter::dx(1)], q(1)).unwrap();
        let v = FormalVectorField::zero(2, 6);
        assert_eq!(exp_lie(&b, &v, &f).unwrap(), f);
    }

    #[test]
    fn exp_lie_rejects_low_order() {
        let b = s2_basis();
        let f = CyclicForm::zero(6);
        let mut v = FormalVectorField::zero(2, 6);
        v.components[0].add_term(vec![Letter::x(0)], q(1));
        assert!(exp_lie(&b, &v, &f).is_err());
    }

    #[test]
    fn pullback_identity_substitution() {
        let s = fixtures::sphere::<Rational>(6);
        let id = Cohomomorphism::identity(s.basis.clone(), 6);
        let mut f = CyclicForm::zero(6);
        f.add_word(&s.basis, vec![Letter::x(0), Letter::dx(1)], q(3)).unwrap();
        assert_eq!(pullback_form(&s.basis, &id, &f).unwrap(), f);
    }
}

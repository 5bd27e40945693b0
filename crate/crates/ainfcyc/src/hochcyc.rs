//! Hochschild chains and cochains of an A-infinity algebra, the dual
//! (b*, B*) bicomplex, negative cyclic cocycles, the tilde construction
//! into bimodule maps, the trace comparison, and the dictionary into
//! cyclic one- and two-forms.
//!
//! Cochains `f_n : (C[1])^{tensor n} -> C*` pair with chains by
//! `<f, v (x) x_1 .. x_n> = f(x_1,..,x_n)(v)`; the dual differential `b*`
//! is the adjoint of `b` under this pairing (computed sparsely, so the
//! adjunction is a genuine cross-check, not a tautology). The dual basis
//! element `e_j^*` carries shifted degree `-|e_j|'`.

use std::collections::BTreeMap;

use crate::barcx::{AInftyStructure, Basis, TensorWord};
use crate::error::{Error, Result};
use crate::ncgeom::{CyclicForm, Kind, LWord, Letter};
use crate::signcore::{sign_pow, Scalar};
use crate::sparse::LinComb;

/// Which Hochschild complex an operator acts on: the full one, or the
/// reduced one where the unit is excluded from every input slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Complex {
    Full,
    Reduced,
}

impl Complex {
    pub fn is_reduced(self) -> bool {
        matches!(self, Complex::Reduced)
    }
}

fn word_has(w: &[usize], i: Option<usize>) -> bool {
    match i {
        Some(u) => w.contains(&u),
        None => false,
    }
}

/// A single Hochschild chain generator: the module element and the bar
/// tail, `v (x) x_1 (x) .. (x) x_k`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct HochschildChain {
    pub module_slot: usize,
    pub tail: TensorWord,
}

impl HochschildChain {
    pub fn new(module_slot: usize, tail: TensorWord) -> Self {
        HochschildChain { module_slot, tail }
    }
}

pub type ChainSum<S> = LinComb<HochschildChain, S>;

/// The Hochschild boundary on a chain sum: interior insertions of `m_k`
/// into the tail with sign `e_1 = |v|' + |x_1|' + .. + |x_{i-1}|'`, and
/// wrap-around terms absorbing the module element,
/// `m_{i+j+1}(x_{k-i+1},..,x_k,v,x_1,..,x_j)`, with sign
/// `e_2 = (sum of suffix |.|')(|v|' + sum of prefix |.|')`.
pub fn b_chain<S: Scalar>(
    a: &AInftyStructure<S>,
    mode: Complex,
    chain: &ChainSum<S>,
) -> ChainSum<S> {
    let basis = &a.basis;
    let unit = basis.unit_index();
    let mut out = ChainSum::new();
    for (term, c) in chain.iter() {
        let v = term.module_slot;
        let tail = &term.tail;
        let k = tail.len();
        let vd = basis.shifted_degree(v);
        // interior insertions (window length 0 inserts an arity-0 value)
        for (win, vals) in a.ops() {
            let wl = win.len();
            let positions = if wl == 0 { k + 1 } else { k.saturating_sub(wl - 1) };
            for p in 0..positions {
                if wl > 0 && &tail[p..p + wl] != win.as_slice() {
                    continue;
                }
                let sign = sign_pow(vd + basis.word_shifted_degree(&tail[..p]));
                for (&o, oc) in vals.iter() {
                    let mut nt = Vec::with_capacity(k + 1 - wl);
                    nt.extend_from_slice(&tail[..p]);
                    nt.push(o);
                    nt.extend_from_slice(&tail[p + wl..]);
                    if mode.is_reduced() && word_has(&nt, unit) {
                        continue;
                    }
                    out.add_term(
                        HochschildChain::new(v, nt),
                        c.clone() * oc.clone().signed(sign),
                    );
                }
            }
        }
        // wrap-around terms: suffix length i, prefix length j
        for i in 0..=k {
            for j in 0..=(k - i) {
                let suffix = &tail[k - i..];
                let prefix = &tail[..j];
                let mut word = Vec::with_capacity(i + j + 1);
                word.extend_from_slice(suffix);
                word.push(v);
                word.extend_from_slice(prefix);
                let vals = a.eval_op(&word);
                if vals.is_zero() {
                    continue;
                }
                let sign = sign_pow(
                    basis.word_shifted_degree(suffix)
                        * (vd + basis.word_shifted_degree(&tail[..k - i])),
                );
                let nt = tail[j..k - i].to_vec();
                if mode.is_reduced() && word_has(&nt, unit) {
                    continue;
                }
                for (&o, oc) in vals.iter() {
                    out.add_term(
                        HochschildChain::new(o, nt.clone()),
                        c.clone() * oc.clone().signed(sign),
                    );
                }
            }
        }
    }
    out
}

/// A Hochschild cochain sequence `{f_n : (C[1])^{tensor n} -> C*}`, stored
/// as sparse components `(input word, dual output index) -> coefficient`.
/// Arities are capped at `N - 1` (one slot is reserved for the probe).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HochschildCochainSeq<S: Scalar> {
    terms: LinComb<(TensorWord, usize), S>,
    pub truncation_order: usize,
}

impl<S: Scalar> HochschildCochainSeq<S> {
    pub fn zero(truncation_order: usize) -> Self {
        HochschildCochainSeq { terms: LinComb::new(), truncation_order }
    }

    pub fn add_term(&mut self, inputs: &[usize], out: usize, c: S) {
        if inputs.len() < self.truncation_order {
            self.terms.add_term((inputs.to_vec(), out), c);
        }
    }

    pub fn coeff(&self, inputs: &[usize], out: usize) -> S {
        self.terms.coeff(&(inputs.to_vec(), out))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    pub fn add(&mut self, other: &Self) {
        for ((w, o), c) in other.terms.iter() {
            self.add_term(w, *o, c.clone());
        }
    }

    pub fn sub(&mut self, other: &Self) {
        for ((w, o), c) in other.terms.iter() {
            self.add_term(w, *o, -c.clone());
        }
    }

    pub fn scale(&mut self, s: &S) {
        self.terms.scale(s);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(TensorWord, usize), &S)> {
        self.terms.iter()
    }

    pub fn max_arity(&self) -> usize {
        self.terms.keys().map(|(w, _)| w.len()).max().unwrap_or(0)
    }

    /// The reduced-complex part: drops components with the unit in an
    /// input slot (probes are unrestricted).
    pub fn restrict(&self, basis: &Basis, mode: Complex) -> Self {
        if !mode.is_reduced() {
            return self.clone();
        }
        let unit = basis.unit_index();
        HochschildCochainSeq {
            terms: self.terms.filter(|(w, _)| !word_has(w, unit)),
            truncation_order: self.truncation_order,
        }
    }
}

/// The pairing `<f, v (x) x_1..x_n> = f(x_1,..,x_n)(v)` extended linearly.
pub fn pair<S: Scalar>(f: &HochschildCochainSeq<S>, chain: &ChainSum<S>) -> S {
    let mut acc = S::zero();
    for (term, c) in chain.iter() {
        let fc = f.coeff(&term.tail, term.module_slot);
        if !fc.is_zero() {
            acc = acc + fc * c.clone();
        }
    }
    acc
}

/// The dual Hochschild differential `b*`, the adjoint of [`b_chain`]:
/// `(b*f)(a_1,..,a_n)(w) = <f, b(w (x) a_1..a_n)>`, generated sparsely
/// from the components of `f`. In reduced mode output components with a
/// unit input are dropped.
pub fn bstar<S: Scalar>(
    a: &AInftyStructure<S>,
    mode: Complex,
    f: &HochschildCochainSeq<S>,
) -> HochschildCochainSeq<S> {
    let basis = &a.basis;
    let unit = basis.unit_index();
    let mut out = HochschildCochainSeq::zero(f.truncation_order);
    for ((u, q), fc) in f.iter() {
        let qd = basis.shifted_degree(*q);
        // insertion terms: the probe stays the module element e_q
        for (win, vals) in a.ops() {
            let wl = win.len();
            for p in 0..u.len() {
                let co = vals.coeff(&u[p]);
                if co.is_zero() {
                    continue;
                }
                let mut inputs = Vec::with_capacity(u.len() - 1 + wl);
                inputs.extend_from_slice(&u[..p]);
                inputs.extend_from_slice(win);
                inputs.extend_from_slice(&u[p + 1..]);
                if mode.is_reduced() && word_has(&inputs, unit) {
                    continue;
                }
                let sign = sign_pow(qd + basis.word_shifted_degree(&u[..p]));
                out.add_term(&inputs, *q, fc.clone() * co.signed(sign));
            }
        }
        // wrap terms: f's probe e_q is the output of m(suffix, w, prefix)
        for (word, vals) in a.ops() {
            let co = vals.coeff(q);
            if co.is_zero() {
                continue;
            }
            for pos in 0..word.len() {
                let w = word[pos];
                let suffix = &word[..pos];
                let prefix = &word[pos + 1..];
                let mut inputs =
                    Vec::with_capacity(u.len() + word.len() - 1);
                inputs.extend_from_slice(prefix);
                inputs.extend_from_slice(u);
                inputs.extend_from_slice(suffix);
                if mode.is_reduced() && word_has(&inputs, unit) {
                    continue;
                }
                let sign = sign_pow(
                    basis.word_shifted_degree(suffix)
                        * (basis.shifted_degree(w)
                            + basis.word_shifted_degree(prefix)
                            + basis.word_shifted_degree(u)),
                );
                out.add_term(&inputs, w, fc.clone() * co.clone().signed(sign));
            }
        }
    }
    out
}

/// The dual Connes-Tsygan operator: for `f` of arity `n`,
/// `(B*f)(a_1,..,a_{n-1})(w) = sum over cyclic rotations t of
/// (a_1,..,a_{n-1},w) of (rotation Koszul sign) f(t)(I)`.
pub fn connes_bstar<S: Scalar>(
    a: &AInftyStructure<S>,
    mode: Complex,
    f: &HochschildCochainSeq<S>,
) -> Result<HochschildCochainSeq<S>> {
    let basis = &a.basis;
    let unit = basis.unit_index().ok_or(Error::NoUnit)?;
    let mut out = HochschildCochainSeq::zero(f.truncation_order);
    for ((u, q), fc) in f.iter() {
        if *q != unit || u.is_empty() {
            continue;
        }
        let n = u.len();
        let total = basis.word_shifted_degree(u);
        // the chain-order tuple (w, a_1..a_{n-1}) whose left rotation by
        // r equals u is the right rotation of u by r; the Koszul sign is
        // that of moving its length-r prefix past the rest
        for r in 0..n {
            let mut t = Vec::with_capacity(n);
            t.extend_from_slice(&u[n - r..]);
            t.extend_from_slice(&u[..n - r]);
            let pre = basis.word_shifted_degree(&t[..r]);
            let sign = sign_pow(pre * (total - pre));
            let inputs = &t[1..];
            if mode.is_reduced() && inputs.contains(&unit) {
                continue;
            }
            out.add_term(inputs, t[0], fc.clone().signed(sign));
        }
    }
    Ok(out)
}

/// The bimodule action of `A` on `A*`:
/// `d*_{k,l}(x_1..x_k, v*, x_{k+1}..x_{k+l})(w)
///   = (-1)^e v*(m_{k+l+1}(x_{k+1},..,x_{k+l}, w, x_1,..,x_k))` with
/// `e = (|x_1|'+..+|x_k|')(|v*|' + |x_{k+1}|'+..+|x_{k+l}|' + |w|')` and
/// `|v*|' = -|e_dual|'` (the left block commutes past everything it
/// jumps over; a standalone |v*|' summand would break the square-zero
/// property of the induced bar coderivation).
pub fn dual_action<S: Scalar>(
    a: &AInftyStructure<S>,
    left: &[usize],
    dual: usize,
    right: &[usize],
    probe: usize,
) -> S {
    let basis = &a.basis;
    let mut word = Vec::with_capacity(left.len() + right.len() + 1);
    word.extend_from_slice(right);
    word.push(probe);
    word.extend_from_slice(left);
    let c = a.eval_op(&word).coeff(&dual);
    if c.is_zero() {
        return c;
    }
    let vd = -basis.shifted_degree(dual);
    let eps = basis.word_shifted_degree(left)
        * (vd + basis.word_shifted_degree(right) + basis.shifted_degree(probe));
    c.signed(sign_pow(eps))
}

/// A slot triple `A^{tensor k} (x) center (x) A^{tensor l}`; the center is
/// an algebra index for the source bimodule and a dual index for `A*`.
pub type BimodSlot = (TensorWord, usize, TensorWord);

fn slot_len(s: &BimodSlot) -> usize {
    s.0.len() + 1 + s.2.len()
}

/// Bar coderivation of the `A`-bimodule `A` itself (`d_{k,l} = m_{k+l+1}`)
/// on one slot triple: every window of the concatenated word, with the
/// standard prefix sign; windows covering the center produce the new
/// center.
pub fn bimodule_dhat_alg<S: Scalar>(
    a: &AInftyStructure<S>,
    slot: &BimodSlot,
) -> LinComb<BimodSlot, S> {
    let basis = &a.basis;
    let (l, c, r) = slot;
    let m = l.len();
    let mut word = Vec::with_capacity(slot_len(slot));
    word.extend_from_slice(l);
    word.push(*c);
    word.extend_from_slice(r);
    let n = word.len();
    let mut out = LinComb::new();
    for (win, vals) in a.ops() {
        let wl = win.len();
        if wl == 0 || wl > n {
            continue;
        }
        for p in 0..=(n - wl) {
            if &word[p..p + wl] != win.as_slice() {
                continue;
            }
            let sign = sign_pow(basis.word_shifted_degree(&word[..p]));
            let covers = p <= m && m < p + wl;
            for (&o, oc) in vals.iter() {
                let mut nw = Vec::with_capacity(n + 1 - wl);
                nw.extend_from_slice(&word[..p]);
                nw.push(o);
                nw.extend_from_slice(&word[p + wl..]);
                let nm = if covers {
                    p
                } else if p + wl <= m {
                    m + 1 - wl
                } else {
                    m
                };
                let key = (nw[..nm].to_vec(), nw[nm], nw[nm + 1..].to_vec());
                out.add_term(key, oc.clone().signed(sign));
            }
        }
    }
    out
}

/// Bar coderivation of the `A`-bimodule `A*`: flank insertions of `m_k`
/// (with the center contributing `-|e_c|'` to prefix degrees) plus the
/// `d*` family absorbing a block around the center.
pub fn bimodule_dhat_dual<S: Scalar>(
    a: &AInftyStructure<S>,
    slot: &BimodSlot,
) -> LinComb<BimodSlot, S> {
    let basis = &a.basis;
    let (l, cq, r) = slot;
    let cd = -basis.shifted_degree(*cq);
    let mut out = LinComb::new();
    // flank insertions left of the center
    for (win, vals) in a.ops() {
        let wl = win.len();
        if wl == 0 {
            continue;
        }
        if wl <= l.len() {
            for p in 0..=(l.len() - wl) {
                if &l[p..p + wl] != win.as_slice() {
                    continue;
                }
                let sign = sign_pow(basis.word_shifted_degree(&l[..p]));
                for (&o, oc) in vals.iter() {
                    let mut nl = Vec::with_capacity(l.len() + 1 - wl);
                    nl.extend_from_slice(&l[..p]);
                    nl.push(o);
                    nl.extend_from_slice(&l[p + wl..]);
                    out.add_term((nl, *cq, r.clone()), oc.clone().signed(sign));
                }
            }
        }
        if wl <= r.len() {
            for p in 0..=(r.len() - wl) {
                if &r[p..p + wl] != win.as_slice() {
                    continue;
                }
                let sign = sign_pow(
                    basis.word_shifted_degree(l)
                        + cd
                        + basis.word_shifted_degree(&r[..p]),
                );
                for (&o, oc) in vals.iter() {
                    let mut nr = Vec::with_capacity(r.len() + 1 - wl);
                    nr.extend_from_slice(&r[..p]);
                    nr.push(o);
                    nr.extend_from_slice(&r[p + wl..]);
                    out.add_term((l.clone(), *cq, nr), oc.clone().signed(sign));
                }
            }
        }
    }
    // d* terms absorbing l[i..], the center, and r[..j]
    for i in 0..=l.len() {
        for j in 0..=r.len() {
            let pre_sign = sign_pow(basis.word_shifted_degree(&l[..i]));
            for w in 0..basis.len() {
                let v = dual_action(a, &l[i..], *cq, &r[..j], w);
                if v.is_zero() {
                    continue;
                }
                out.add_term(
                    (l[..i].to_vec(), w, r[j..].to_vec()),
                    v.signed(pre_sign),
                );
            }
        }
    }
    out
}

/// A bimodule map `A -> A*` as sparse entries
/// `(left word, center index, right word, dual output) -> coefficient`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BimodKey {
    pub left: TensorWord,
    pub center: usize,
    pub right: TensorWord,
    pub out: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BimoduleMapStore<S: Scalar> {
    terms: LinComb<BimodKey, S>,
    pub truncation_order: usize,
}

impl<S: Scalar> BimoduleMapStore<S> {
    pub fn zero(truncation_order: usize) -> Self {
        BimoduleMapStore { terms: LinComb::new(), truncation_order }
    }

    pub fn add_entry(&mut self, key: BimodKey, c: S) {
        if key.left.len() + key.right.len() + 2 <= self.truncation_order {
            self.terms.add_term(key, c);
        }
    }

    pub fn coeff(&self, left: &[usize], center: usize, right: &[usize], out: usize) -> S {
        self.terms.coeff(&BimodKey {
            left: left.to_vec(),
            center,
            right: right.to_vec(),
            out,
        })
    }

    /// The `A*`-value of the map on one slot triple.
    pub fn eval(&self, left: &[usize], center: usize, right: &[usize], dim: usize) -> LinComb<usize, S> {
        let mut out = LinComb::new();
        for o in 0..dim {
            let c = self.coeff(left, center, right, o);
            out.add_term(o, c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    pub fn add(&mut self, other: &Self) {
        for (k, c) in other.terms.iter() {
            self.add_entry(k.clone(), c.clone());
        }
    }

    pub fn sub(&mut self, other: &Self) {
        for (k, c) in other.terms.iter() {
            self.add_entry(k.clone(), -c.clone());
        }
    }

    pub fn scale(&mut self, s: &S) {
        self.terms.scale(s);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BimodKey, &S)> {
        self.terms.iter()
    }

    /// Defect of skew symmetry (the first strong-homotopy-inner-product
    /// condition): `psi(a,v,b)(w) + (-1)^s psi(b,w,a)(v)` with
    /// `s = (|a|'+|v|')(|b|'+|w|')`; empty iff skew.
    pub fn skew_defect(&self, basis: &Basis) -> Self {
        let mut out = Self::zero(self.truncation_order);
        for (k, c) in self.terms.iter() {
            out.add_entry(k.clone(), c.clone());
            let s = (basis.word_shifted_degree(&k.right) + basis.shifted_degree(k.out))
                * (basis.word_shifted_degree(&k.left) + basis.shifted_degree(k.center));
            // entry read through the swapped slots contributes to the
            // defect at the swapped key
            out.add_entry(
                BimodKey {
                    left: k.right.clone(),
                    center: k.out,
                    right: k.left.clone(),
                    out: k.center,
                },
                c.clone().signed(sign_pow(s)),
            );
        }
        out
    }

    /// Gram matrix `[psi_{0,0}(e_i)(e_j)]_{ij}`.
    pub fn gram_matrix(&self, basis: &Basis) -> Vec<Vec<S>> {
        let n = basis.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.coeff(&[], i, &[], j)).collect())
            .collect()
    }
}

/// Defect of the A-infinity bimodule-map equation for `psi : A -> A*` on
/// all slot triples up to the truncation order; empty iff `psi` is a
/// bimodule map. Computed as the pairing of `psi` with the two-marked
/// Hochschild boundary of `(w; l, c, r)`: interior windows over the
/// triple (the `psi o m^` side) and wrap windows through the probe `w`
/// (the `m* o psi^` side), with exactly the [`b_chain`] signs, so the
/// convention is pinned by the same oracles.
pub fn bimodule_defect<S: Scalar>(
    a: &AInftyStructure<S>,
    psi: &BimoduleMapStore<S>,
) -> BTreeMap<BimodSlot, LinComb<usize, S>> {
    let basis = &a.basis;
    let dim = basis.len();
    let mut defects = BTreeMap::new();
    for slot in all_slots(dim, psi.truncation_order) {
        let (l, c, r) = &slot;
        let m = l.len();
        let mut tail = l.clone();
        tail.push(*c);
        tail.extend_from_slice(r);
        let k = tail.len();
        let mut entry: LinComb<usize, S> = LinComb::new();
        for w in 0..dim {
            let wd = basis.shifted_degree(w);
            let mut acc = S::zero();
            // interior windows, possibly covering the center slot
            for (win, vals) in a.ops() {
                let wl = win.len();
                let positions = if wl == 0 {
                    k + 1
                } else if wl > k {
                    0
                } else {
                    k - wl + 1
                };
                for p in 0..positions {
                    if wl > 0 && &tail[p..p + wl] != win.as_slice() {
                        continue;
                    }
                    let sign =
                        sign_pow(wd + basis.word_shifted_degree(&tail[..p]));
                    let covers = wl > 0 && p <= m && m < p + wl;
                    for (&o, oc) in vals.iter() {
                        let mut nt = tail[..p].to_vec();
                        nt.push(o);
                        nt.extend_from_slice(&tail[p + wl..]);
                        let nm = if covers {
                            p
                        } else if p + wl <= m {
                            m + 1 - wl
                        } else {
                            m
                        };
                        let pc = psi.coeff(&nt[..nm], nt[nm], &nt[nm + 1..], w);
                        if !pc.is_zero() {
                            acc = acc + pc * oc.clone().signed(sign);
                        }
                    }
                }
            }
            // wrap windows absorbing the probe: m(r-suffix, w, l-prefix)
            for i in 0..=r.len() {
                for j in 0..=l.len() {
                    let suffix = &r[r.len() - i..];
                    let prefix = &l[..j];
                    let mut word = Vec::with_capacity(i + j + 1);
                    word.extend_from_slice(suffix);
                    word.push(w);
                    word.extend_from_slice(prefix);
                    let vals = a.eval_op(&word);
                    if vals.is_zero() {
                        continue;
                    }
                    let sign = sign_pow(
                        basis.word_shifted_degree(suffix)
                            * (wd + basis.word_shifted_degree(&tail[..k - i])),
                    );
                    for (&o, oc) in vals.iter() {
                        let pc = psi.coeff(&l[j..], *c, &r[..r.len() - i], o);
                        if !pc.is_zero() {
                            acc = acc + pc * oc.clone().signed(sign);
                        }
                    }
                }
            }
            entry.add_term(w, acc);
        }
        if !entry.is_zero() {
            defects.insert(slot, entry);
        }
    }
    defects
}

/// All slot triples with `k + 1 + l <= max_len`.
fn all_slots(dim: usize, max_order: usize) -> Vec<BimodSlot> {
    let max_len = max_order.saturating_sub(1);
    let mut words: Vec<TensorWord> = vec![vec![]];
    let mut by_len: Vec<Vec<TensorWord>> = vec![vec![vec![]]];
    for _ in 1..max_len {
        let mut next = Vec::new();
        for w in by_len.last().unwrap() {
            for i in 0..dim {
                let mut w2 = w.clone();
                w2.push(i);
                next.push(w2);
            }
        }
        words.extend(next.iter().cloned());
        by_len.push(next);
    }
    let mut out = Vec::new();
    for l in &words {
        for r in &words {
            if l.len() + 1 + r.len() > max_len {
                continue;
            }
            for c in 0..dim {
                out.push((l.clone(), c, r.clone()));
            }
        }
    }
    out
}

/// A negative cyclic cochain `phi = sum_i phi_i v^i` as a finite column
/// sequence (`v` the degree -2 parameter).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegativeCyclicCochain<S: Scalar> {
    pub columns: Vec<HochschildCochainSeq<S>>,
}

impl<S: Scalar> NegativeCyclicCochain<S> {
    pub fn zero(columns: usize, truncation_order: usize) -> Self {
        NegativeCyclicCochain {
            columns: (0..columns).map(|_| HochschildCochainSeq::zero(truncation_order)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_zero())
    }

    pub fn phi0(&self) -> &HochschildCochainSeq<S> {
        &self.columns[0]
    }
}

#[derive(Clone, Debug)]
pub struct CocycleReport {
    pub ok: bool,
    pub witnesses: Vec<String>,
}

/// Checks `b* phi_i = B* phi_{i+1}` for every column and `b* phi_M = 0`
/// at the truncation; returns witnesses for the failing components.
pub fn validate_negative_cocycle<S: Scalar>(
    a: &AInftyStructure<S>,
    mode: Complex,
    phi: &NegativeCyclicCochain<S>,
) -> Result<CocycleReport> {
    let mut witnesses = Vec::new();
    let m = phi.columns.len();
    for i in 0..m {
        let mut d = bstar(a, mode, &phi.columns[i]);
        if i + 1 < m {
            d.sub(&connes_bstar(a, mode, &phi.columns[i + 1])?);
        }
        for ((w, o), c) in d.iter() {
            witnesses.push(format!(
                "column {i}: (b* phi_{i}{}) at {:?} -> {} is {c}",
                if i + 1 < m { format!(" - B* phi_{}", i + 1) } else { String::new() },
                w.iter().map(|&x| a.basis.id(x)).collect::<Vec<_>>(),
                a.basis.id(*o),
            ));
        }
    }
    Ok(CocycleReport { ok: witnesses.is_empty(), witnesses })
}

/// The tilde construction on the zeroth column:
/// `phi~(a,v,b)(w) = phi_0(a,v,b)(w) - (-1)^s phi_0(b,w,a)(v)` with
/// `s = (|a|'+|v|')(|b|'+|w|')`; skew symmetric by construction.
pub fn tilde<S: Scalar>(
    basis: &Basis,
    phi0: &HochschildCochainSeq<S>,
) -> BimoduleMapStore<S> {
    let mut out = BimoduleMapStore::zero(phi0.truncation_order);
    for ((u, j), c) in phi0.iter() {
        for p in 0..u.len() {
            // first term: u = (a, v at p, b), probe e_j
            out.add_entry(
                BimodKey {
                    left: u[..p].to_vec(),
                    center: u[p],
                    right: u[p + 1..].to_vec(),
                    out: *j,
                },
                c.clone(),
            );
            // second term: u = (b, w at p, a), center e_j, probe w
            let aa = &u[p + 1..];
            let bb = &u[..p];
            let s = (basis.word_shifted_degree(aa) + basis.shifted_degree(*j))
                * (basis.word_shifted_degree(bb) + basis.shifted_degree(u[p]));
            out.add_entry(
                BimodKey {
                    left: aa.to_vec(),
                    center: *j,
                    right: bb.to_vec(),
                    out: u[p],
                },
                -c.clone().signed(sign_pow(s)),
            );
        }
    }
    out
}

/// Homological nondegeneracy of a bimodule map on a minimal structure:
/// invertibility of the Gram matrix `[psi_{0,0}(e_i)(e_j)]` over the
/// scalar field.
pub fn is_homologically_nondegenerate<S: Scalar>(
    a: &AInftyStructure<S>,
    psi: &BimoduleMapStore<S>,
) -> Result<bool> {
    if !a.is_minimal() {
        return Err(Error::Precondition(
            "homological nondegeneracy is only checked on minimal structures \
             (minimal-model transfer is out of scope)"
                .into(),
        ));
    }
    let g = psi.gram_matrix(&a.basis);
    let n = a.basis.len();
    let mut sys = crate::linalg::LinearSystem::new();
    for row in &g {
        sys.add_row(
            row.iter().enumerate().map(|(j, c)| (j, c.clone())),
            S::zero(),
        );
    }
    let _ = n;
    Ok(sys.rank() == n)
}

/// The trace of a cyclic cohomology class on an algebra element:
/// `Tr(c) = phi_0(I)(c)`.
pub fn trace<S: Scalar>(
    a: &AInftyStructure<S>,
    phi0: &HochschildCochainSeq<S>,
    elem: usize,
) -> Result<S> {
    let unit = a.basis.unit_index().ok_or(Error::NoUnit)?;
    Ok(phi0.coeff(&[unit], elem))
}

/// Compares the trace route with the tilde route on all basis pairs:
/// `Tr(m_2(a,b)) = phi~_{0,0}(a)(b)`; returns the failing pairs.
pub fn trace_compare<S: Scalar>(
    a: &AInftyStructure<S>,
    phi: &NegativeCyclicCochain<S>,
) -> Result<Vec<String>> {
    let report = validate_negative_cocycle(a, Complex::Full, phi)?;
    if !report.ok {
        return Err(Error::Precondition(format!(
            "trace comparison needs a valid negative cyclic cocycle; first witness: {}",
            report.witnesses[0]
        )));
    }
    let basis = &a.basis;
    let td = tilde(basis, phi.phi0());
    let mut failures = Vec::new();
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            let mut lhs = S::zero();
            for (&z, c) in a.eval_op(&[i, j]).iter() {
                lhs = lhs + c.clone() * trace(a, phi.phi0(), z)?;
            }
            let rhs = td.coeff(&[], i, &[], j);
            if lhs != rhs {
                failures.push(format!(
                    "Tr(m_2({}, {})) = {lhs} but phi~({})({}) = {rhs}",
                    basis.id(i),
                    basis.id(j),
                    basis.id(i),
                    basis.id(j),
                ));
            }
        }
    }
    Ok(failures)
}

/// Koszul sign of reversing the x-letter word `x_{i_1} .. x_{i_n}`
/// (every transposed pair contributes the product of the dual shifted
/// degrees `|x_i|' = -|e_i|'`).
fn reversal_sign(basis: &Basis, u: &[usize]) -> i64 {
    let mut acc = 0;
    for s in 0..u.len() {
        for t in s + 1..u.len() {
            acc += basis.shifted_degree(u[s]) * basis.shifted_degree(u[t]);
        }
    }
    sign_pow(acc)
}

/// The cyclic one-form of a cochain: the component `eta(e_{i_1..i_n})(e_j)`
/// contributes `c * (x_{i_n} .. x_{i_1} dx_j)_c` with the Koszul sign of
/// the letter reversal (indices reversed, matching the dual-variable
/// convention of `q_from_structure`).
pub fn oneform_from_cochain<S: Scalar>(
    basis: &Basis,
    f: &HochschildCochainSeq<S>,
) -> Result<CyclicForm<S>> {
    let mut out = CyclicForm::zero(f.truncation_order);
    for ((u, j), c) in f.iter() {
        let sign = reversal_sign(basis, u);
        let mut word: LWord = u.iter().rev().map(|&i| Letter::x(i)).collect();
        word.push(Letter::dx(*j));
        out.add_word(basis, word, c.clone().signed(sign))?;
    }
    Ok(out)
}

/// Koszul sign of rotating `word` left by `r` (moving the length-`r`
/// prefix block past the rest).
pub(crate) fn rotation_sign(basis: &Basis, word: &[Letter], r: usize) -> i64 {
    let mut pre_d = 0;
    let mut pre_s = 0;
    let mut tot_d = 0;
    let mut tot_s = 0;
    for (p, l) in word.iter().enumerate() {
        let g = l.symbol(basis);
        if p < r {
            pre_d += g.shifted_degree;
            pre_s += g.sharp;
        }
        tot_d += g.shifted_degree;
        tot_s += g.sharp;
    }
    sign_pow(pre_d * (tot_d - pre_d) + pre_s * (tot_s - pre_s))
}

/// Inverse of [`oneform_from_cochain`] on cyclic one-forms: each stored
/// word is rotated so its single `dx` is last, then read back.
pub fn cochain_from_oneform<S: Scalar>(
    basis: &Basis,
    alpha: &CyclicForm<S>,
) -> Result<HochschildCochainSeq<S>> {
    let mut out = HochschildCochainSeq::zero(alpha.truncation_order);
    for (w, c) in alpha.terms().iter() {
        let dx_positions: Vec<usize> =
            w.iter().enumerate().filter(|(_, l)| l.kind == Kind::Dx).map(|(p, _)| p).collect();
        if dx_positions.len() != 1 {
            return Err(Error::Precondition(
                "cochain_from_oneform needs a one-form (exactly one dx per word)".into(),
            ));
        }
        let p = dx_positions[0];
        let sign = rotation_sign(basis, w, p + 1);
        let mut rot = w[p + 1..].to_vec();
        rot.extend_from_slice(&w[..=p]);
        // rot = x-part ++ [dx_j]; inputs are the reversed x indices
        let inputs: Vec<usize> =
            rot[..rot.len() - 1].iter().rev().map(|l| l.index).collect();
        let sign = sign * reversal_sign(basis, &inputs);
        out.add_term(&inputs, rot[rot.len() - 1].index, c.clone().signed(sign));
    }
    Ok(out)
}

/// Koszul sign of reversing an arbitrary letter word (degree products
/// plus sharp products over all transposed pairs).
pub(crate) fn letter_reversal_sign(basis: &Basis, w: &[Letter]) -> i64 {
    let syms: Vec<_> = w.iter().map(|l| l.symbol(basis)).collect();
    let mut acc = 0;
    for s in 0..syms.len() {
        for t in s + 1..syms.len() {
            acc += syms[s].shifted_degree * syms[t].shifted_degree
                + syms[s].sharp * syms[t].sharp;
        }
    }
    sign_pow(acc)
}

/// The cyclic two-form of a bimodule map: the entry
/// `psi(e_{l_1..l_k}, e_c, e_{r_1..r_m})(e_o)` contributes the full
/// reversal of the slot-letter sequence
/// `x_{l_1}..x_{l_k} dx_c x_{r_1}..x_{r_m} dx_o`, i.e.
/// `c * (dx_o x_{r_m}..x_{r_1} dx_c x_{l_k}..x_{l_1})_c` with the Koszul
/// sign of that reversal, halved: the cyclic class already identifies
/// each entry with its skew partner, which contributes the same word.
pub fn twoform_from_bimodmap<S: Scalar>(
    basis: &Basis,
    psi: &BimoduleMapStore<S>,
) -> Result<CyclicForm<S>> {
    let mut out = CyclicForm::zero(psi.truncation_order);
    for (k, c) in psi.iter() {
        let mut fwd: LWord = k.left.iter().map(|&i| Letter::x(i)).collect();
        fwd.push(Letter::dx(k.center));
        fwd.extend(k.right.iter().map(|&i| Letter::x(i)));
        fwd.push(Letter::dx(k.out));
        let sign = letter_reversal_sign(basis, &fwd);
        let word: LWord = fwd.into_iter().rev().collect();
        let half = S::from_rational(crate::Rational::new(1, 2));
        out.add_word(basis, word, (c.clone() * half).signed(sign))?;
    }
    Ok(out)
}

/// Unknown key of the truncated bicomplex: (column, input word, output).
pub type CocycleKey = (usize, TensorWord, usize);

/// Nullspace basis of the truncated negative-cyclic cocycle conditions
/// `b* phi_i = B* phi_{i+1}` (0 <= i < M), `b* phi_M = 0`, solved by
/// exact sparse elimination; every returned cochain validates.
pub fn cocycle_nullspace<S: Scalar>(
    a: &AInftyStructure<S>,
    mode: Complex,
    columns: usize,
) -> Result<Vec<NegativeCyclicCochain<S>>> {
    let basis = &a.basis;
    let dim = basis.len();
    let unit = basis.unit_index();
    let order = a.truncation_order;
    // universe of unknowns
    let mut words: Vec<TensorWord> = vec![vec![]];
    let mut level: Vec<TensorWord> = vec![vec![]];
    for _ in 1..order {
        let mut next = Vec::new();
        for w in &level {
            for i in 0..dim {
                if mode.is_reduced() && Some(i) == unit {
                    continue;
                }
                let mut w2 = w.clone();
                w2.push(i);
                next.push(w2);
            }
        }
        words.extend(next.iter().cloned());
        level = next;
    }
    let mut universe: Vec<CocycleKey> = Vec::new();
    for col in 0..columns {
        for w in &words {
            for o in 0..dim {
                universe.push((col, w.clone(), o));
            }
        }
    }
    // rows: equation key (column, component) -> sparse coefficients
    let mut rows: BTreeMap<(usize, TensorWord, usize), Vec<(CocycleKey, S)>> = BTreeMap::new();
    for key in &universe {
        let (col, w, o) = key;
        let mut e = HochschildCochainSeq::zero(order);
        e.add_term(w, *o, S::one());
        for ((cw, co), c) in bstar(a, mode, &e).iter() {
            rows.entry((*col, cw.clone(), *co))
                .or_default()
                .push((key.clone(), c.clone()));
        }
        if *col >= 1 {
            for ((cw, co), c) in connes_bstar(a, mode, &e)?.iter() {
                rows.entry((col - 1, cw.clone(), *co))
                    .or_default()
                    .push((key.clone(), -c.clone()));
            }
        }
    }
    let mut sys = crate::linalg::LinearSystem::new();
    for (_, coeffs) in rows {
        sys.add_row(coeffs, S::zero());
    }
    let mut out = Vec::new();
    for v in sys.nullspace(universe.iter().cloned()) {
        let mut phi = NegativeCyclicCochain::zero(columns, order);
        for ((col, w, o), c) in v {
            phi.columns[col].add_term(&w, o, c);
        }
        out.push(phi);
    }
    Ok(out)
}

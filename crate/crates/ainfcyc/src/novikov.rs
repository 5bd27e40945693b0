//! The gapped filtered layer: truncated Novikov scalars, gapped monoids,
//! energy-tagged structures, the order functional and the filtered
//! variants of the defect, cyclicity, Darboux and equivalence pipelines.
//!
//! Exponents are exact rationals. The real-exponent generality is not
//! representable exactly and every target example is rational.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::barcx::{words_up_to, AInftyStructure, Basis, Cohomomorphism, TensorWord};
use crate::error::{Error, Result};
use crate::hochcyc::{bimodule_defect, oneform_from_cochain, BimoduleMapStore, HochschildCochainSeq};
use crate::linalg::LinearSystem;
use crate::ncgeom::{
    d_cyc, exp_lie, form_degree, lie_derivative, pullback_form, q_from_structure, vf_bracket,
    CyclicForm, FormalVectorField, Kind, LWord, Letter,
};
use crate::signcore::{Rational, Scalar};
use crate::sympeq::{
    cyclicity_defect, exp_core, field_ops, solve_contraction, ConstantTwoForm,
    EquivalenceCertificate,
};

/// Exponents this far below zero cannot arise at finite truncation; the
/// guard realizes the boundedness of topological-dual coefficients.
const VALUATION_FLOOR: i64 = -1024;

/// Truncated Novikov series: finitely many `c T^lambda` terms with
/// rational exponents, all below the cutoff when one is set. Scalars
/// without a cutoff (embedded rationals) acquire one on first contact.
#[derive(Clone, Debug, Eq)]
pub struct NovikovScalar {
    terms: BTreeMap<Rational, Rational>,
    cutoff: Option<Rational>,
}

impl NovikovScalar {
    pub fn monomial(exponent: Rational, coeff: Rational, cutoff: Option<Rational>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(exponent, coeff);
        let mut s = NovikovScalar { terms, cutoff };
        s.normalize();
        s
    }

    pub fn with_cutoff(mut self, cutoff: Rational) -> Self {
        self.cutoff = Some(cutoff);
        self.normalize();
        self
    }

    pub fn cutoff(&self) -> Option<&Rational> {
        self.cutoff.as_ref()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.terms.iter()
    }

    /// Minimal exponent; `None` for zero.
    pub fn valuation(&self) -> Option<Rational> {
        self.terms.keys().next().cloned()
    }

    pub fn coeff_at(&self, exponent: &Rational) -> Rational {
        self.terms.get(exponent).cloned().unwrap_or_else(Rational::zero)
    }

    /// Sub-series of terms whose exponent satisfies the predicate.
    pub fn filter_exponents(&self, mut keep: impl FnMut(&Rational) -> bool) -> Self {
        NovikovScalar {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| keep(e))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
            cutoff: self.cutoff.clone(),
        }
    }

    /// The embedded rational, when the scalar is one (zero or a single
    /// energy-0 term).
    pub fn as_rational(&self) -> Option<Rational> {
        if self.terms.is_empty() {
            return Some(Rational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Rational::zero()) {
                return Some(c.clone());
            }
        }
        None
    }

    fn normalize(&mut self) {
        self.terms.retain(|e, c| {
            debug_assert!(
                *e >= Rational::from_int(VALUATION_FLOOR),
                "exponent fell below the valuation floor"
            );
            let keep = !c.is_zero();
            match &self.cutoff {
                Some(cut) => keep && e < cut,
                None => keep,
            }
        });
    }

    fn merge_cutoff(a: &Option<Rational>, b: &Option<Rational>) -> Option<Rational> {
        match (a, b) {
            (Some(x), Some(y)) => Some(if x <= y { x.clone() } else { y.clone() }),
            (Some(x), None) | (None, Some(x)) => Some(x.clone()),
            (None, None) => None,
        }
    }
}

impl PartialEq for NovikovScalar {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl fmt::Display for NovikovScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if e.is_zero() {
                write!(f, "{c}")?;
            } else if c == &Rational::one() {
                write!(f, "T^({e})")?;
            } else {
                write!(f, "{c} T^({e})")?;
            }
        }
        Ok(())
    }
}

impl Add for NovikovScalar {
    type Output = NovikovScalar;
    fn add(self, rhs: NovikovScalar) -> NovikovScalar {
        let cutoff = NovikovScalar::merge_cutoff(&self.cutoff, &rhs.cutoff);
        let mut terms = self.terms;
        for (e, c) in rhs.terms {
            let entry = terms.entry(e).or_insert_with(Rational::zero);
            *entry = entry.clone() + c;
        }
        let mut out = NovikovScalar { terms, cutoff };
        out.normalize();
        out
    }
}

impl Sub for NovikovScalar {
    type Output = NovikovScalar;
    fn sub(self, rhs: NovikovScalar) -> NovikovScalar {
        self + (-rhs)
    }
}

impl Neg for NovikovScalar {
    type Output = NovikovScalar;
    fn neg(mut self) -> NovikovScalar {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Mul for NovikovScalar {
    type Output = NovikovScalar;
    fn mul(self, rhs: NovikovScalar) -> NovikovScalar {
        let cutoff = NovikovScalar::merge_cutoff(&self.cutoff, &rhs.cutoff);
        let mut terms: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea.clone() + eb.clone();
                if let Some(cut) = &cutoff {
                    if &e >= cut {
                        continue;
                    }
                }
                let entry = terms.entry(e).or_insert_with(Rational::zero);
                *entry = entry.clone() + ca.clone() * cb.clone();
            }
        }
        let mut out = NovikovScalar { terms, cutoff };
        out.normalize();
        out
    }
}

impl Zero for NovikovScalar {
    fn zero() -> Self {
        NovikovScalar { terms: BTreeMap::new(), cutoff: None }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for NovikovScalar {
    fn one() -> Self {
        NovikovScalar::monomial(Rational::zero(), Rational::one(), None)
    }
}

impl Scalar for NovikovScalar {
    fn from_rational(q: Rational) -> Self {
        NovikovScalar::monomial(Rational::zero(), q, None)
    }

    /// Geometric-series inverse below the cutoff; series without a cutoff
    /// are only invertible when they are monomials.
    fn inv(&self) -> Option<Self> {
        let (tau, lead) = self.terms.iter().next()?;
        let lead_inv = lead.recip()?;
        if self.terms.len() == 1 {
            let inv_cut = self.cutoff.as_ref().map(|c| c.clone() - tau.clone());
            return Some(NovikovScalar::monomial(-tau.clone(), lead_inv, inv_cut));
        }
        let cut = self.cutoff.clone()?;
        // self = lead T^tau (1 + u), val(u) > 0:
        // inverse = lead^-1 T^-tau sum (-u)^k; the product needs the
        // series below cut, so the inverse carries cutoff cut - tau
        let inv_cut = cut.clone() - tau.clone();
        let mut u = NovikovScalar::zero();
        for (e, c) in &self.terms {
            let shifted = e.clone() - tau.clone();
            if shifted < cut {
                u = u + NovikovScalar::monomial(shifted, c.clone() * lead_inv.clone(), None);
            }
        }
        u = (u - NovikovScalar::one()).with_cutoff(cut.clone());
        let mut acc = NovikovScalar::one().with_cutoff(cut.clone());
        let mut term = NovikovScalar::one().with_cutoff(cut);
        for _ in 0..4096 {
            term = term * (-u.clone());
            if term.is_zero() {
                break;
            }
            acc = acc + term.clone();
        }
        if !term.is_zero() {
            return None;
        }
        acc.cutoff = Some(inv_cut.clone());
        Some(acc * NovikovScalar::monomial(-tau.clone(), lead_inv, Some(inv_cut)))
    }
}

/// Discrete submonoid of energy-Maslov pairs, described by its generators
/// and closed under addition below the energy cutoff.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GappedMonoid {
    pub generators: Vec<(Rational, i64)>,
    pub cutoff: Rational,
}

impl GappedMonoid {
    pub fn new(generators: Vec<(Rational, i64)>, cutoff: Rational) -> Self {
        GappedMonoid { generators, cutoff }
    }

    /// The trivial monoid `{(0,0)}`, over which the filtered layer
    /// degenerates to the unfiltered one.
    pub fn trivial(cutoff: Rational) -> Self {
        GappedMonoid { generators: vec![], cutoff }
    }

    /// Violations of the three gapped conditions, decided at the cutoff:
    /// energies must be non-negative (discreteness of the finite closure
    /// is then automatic), the zero-energy fiber must be `{(0,0)}`, and
    /// fibers are finite because the closure below the cutoff is.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        for (l, m) in &self.generators {
            if l < &Rational::zero() {
                violations.push(format!("generator energy {l} is negative"));
            }
            if m.rem_euclid(2) != 0 {
                violations.push(format!("generator Maslov index {m} is odd"));
            }
            if l.is_zero() && *m != 0 {
                violations.push(format!(
                    "zero-energy generator with Maslov index {m} breaks the trivial-fiber condition"
                ));
            }
        }
        violations
    }

    /// Closure of the generators under addition, restricted to energies
    /// below the cutoff. Ill-formed generators are skipped (reported by
    /// [`GappedMonoid::validate`]) so the closure stays finite.
    pub fn elements(&self) -> BTreeSet<(Rational, i64)> {
        let mut set: BTreeSet<(Rational, i64)> = BTreeSet::new();
        set.insert((Rational::zero(), 0));
        let gens: Vec<&(Rational, i64)> = self
            .generators
            .iter()
            .filter(|(l, m)| l > &Rational::zero() && m.rem_euclid(2) == 0)
            .collect();
        loop {
            let mut added = false;
            let snapshot: Vec<(Rational, i64)> = set.iter().cloned().collect();
            for (l, m) in &snapshot {
                for (gl, gm) in &gens {
                    let nl = l.clone() + gl.clone();
                    if nl < self.cutoff && set.insert((nl, m + gm)) {
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        set
    }

    pub fn contains(&self, beta: &(Rational, i64)) -> bool {
        self.elements().contains(beta)
    }

    /// The increasing sequence `lambda_j` covering the energies of the
    /// closure below the cutoff; `lambda_0 = 0`.
    pub fn energy_levels(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self
            .elements()
            .into_iter()
            .map(|(l, _)| l)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        v.sort();
        v
    }

    pub fn level_index(&self, lambda: &Rational) -> Result<usize> {
        self.energy_levels().iter().position(|l| l == lambda).ok_or_else(|| {
            Error::Malformed(format!("exponent {lambda} is not in the energy lattice"))
        })
    }

    /// Order of a term: twice the energy index plus the `x`-letter count
    /// (`dx` letters do not count; `d` lowers the order by one and `i_Q`
    /// raises it by at least two on canonical structures).
    pub fn order(&self, x_count: usize, lambda: &Rational) -> Result<usize> {
        Ok(2 * self.level_index(lambda)? + x_count)
    }
}

pub(crate) fn x_count(w: &[Letter]) -> usize {
    w.iter().filter(|l| l.kind == Kind::X).count()
}

/// Order of a cyclic-form term (word plus one exponent of its scalar).
pub fn term_order(monoid: &GappedMonoid, word: &[Letter], lambda: &Rational) -> Result<usize> {
    monoid.order(x_count(word), lambda)
}

/// Keeps the slices of every term whose order is at most `bound`.
pub fn truncate_form_by_order(
    basis: &Basis,
    monoid: &GappedMonoid,
    f: &CyclicForm<NovikovScalar>,
    bound: usize,
) -> Result<CyclicForm<NovikovScalar>> {
    let mut out = CyclicForm::zero(f.truncation_order);
    for (w, s) in f.terms().iter() {
        let xc = x_count(w);
        let mut kept = NovikovScalar::zero();
        for (e, c) in s.terms() {
            if monoid.order(xc, e)? <= bound {
                kept = kept + NovikovScalar::monomial(e.clone(), c.clone(), s.cutoff().cloned());
            }
        }
        if !kept.is_zero() {
            out.add_word(basis, w.clone(), kept)?;
        }
    }
    Ok(out)
}

/// Least term order of a form, if nonzero.
pub fn form_min_order(
    monoid: &GappedMonoid,
    f: &CyclicForm<NovikovScalar>,
) -> Result<Option<usize>> {
    let mut best: Option<usize> = None;
    for (w, s) in f.terms().iter() {
        let xc = x_count(w);
        for (e, _) in s.terms() {
            let o = monoid.order(xc, e)?;
            best = Some(best.map_or(o, |b: usize| b.min(o)));
        }
    }
    Ok(best)
}

fn form_order_part(
    basis: &Basis,
    monoid: &GappedMonoid,
    f: &CyclicForm<NovikovScalar>,
    level: usize,
) -> Result<CyclicForm<NovikovScalar>> {
    let mut out = CyclicForm::zero(f.truncation_order);
    for (w, s) in f.terms().iter() {
        let xc = x_count(w);
        let mut kept = NovikovScalar::zero();
        for (e, c) in s.terms() {
            if monoid.order(xc, e)? == level {
                kept = kept + NovikovScalar::monomial(e.clone(), c.clone(), s.cutoff().cloned());
            }
        }
        if !kept.is_zero() {
            out.add_word(basis, w.clone(), kept)?;
        }
    }
    Ok(out)
}

/// Embeds a rational form at energy zero with the given cutoff.
pub fn embed_form(
    basis: &Basis,
    f: &CyclicForm<Rational>,
    cutoff: Rational,
) -> Result<CyclicForm<NovikovScalar>> {
    let mut out = CyclicForm::zero(f.truncation_order);
    for (w, c) in f.terms().iter() {
        out.add_word(
            basis,
            w.clone(),
            NovikovScalar::monomial(Rational::zero(), c.clone(), Some(cutoff.clone())),
        )?;
    }
    Ok(out)
}

/// Sparse operation table of a filtered structure: tagged input word to
/// output coefficients.
pub type TaggedOps = BTreeMap<(TensorWord, (Rational, i64)), Vec<(usize, Rational)>>;

/// A gapped filtered structure: operations tagged by monoid elements,
/// realized over [`NovikovScalar`] by summing `T^{lambda(beta)} m_{k,beta}`
/// (the even Maslov tag is dropped; degrees are checked mod 2).
#[derive(Clone, Debug)]
pub struct FilteredAInfty {
    pub basis: Basis,
    pub monoid: GappedMonoid,
    ops: TaggedOps,
    pub order_bound: usize,
}

impl FilteredAInfty {
    pub fn new(basis: Basis, monoid: GappedMonoid, order_bound: usize) -> Self {
        FilteredAInfty { basis, monoid, ops: BTreeMap::new(), order_bound }
    }

    pub fn add_op(
        &mut self,
        inputs: &[usize],
        beta: (Rational, i64),
        outputs: &[(usize, Rational)],
    ) -> Result<()> {
        let in_deg = self.basis.word_shifted_degree(inputs);
        for &(out, ref c) in outputs {
            if out >= self.basis.len() {
                return Err(Error::Malformed(format!("output index {out} out of range")));
            }
            if c.is_zero() {
                continue;
            }
            if (self.basis.shifted_degree(out) - in_deg - 1).rem_euclid(2) != 0 {
                return Err(Error::DegreeMismatch(format!(
                    "m({inputs:?}) -> {out} is not of shifted degree 1 mod 2"
                )));
            }
        }
        let entry = self.ops.entry((inputs.to_vec(), beta)).or_default();
        for (out, c) in outputs {
            entry.push((*out, c.clone()));
        }
        Ok(())
    }

    pub fn ops(&self) -> &TaggedOps {
        &self.ops
    }

    /// `m_{1,(0,0)} = 0` (the canonical condition of the filtered theory).
    pub fn is_canonical(&self) -> bool {
        !self.ops.iter().any(|((w, beta), outs)| {
            w.len() == 1
                && beta == &(Rational::zero(), 0)
                && outs.iter().any(|(_, c)| !c.is_zero())
        })
    }

    /// The realized structure over Novikov scalars.
    pub fn structure(&self) -> Result<AInftyStructure<NovikovScalar>> {
        let mut a = AInftyStructure::new_filtered(self.basis.clone(), self.order_bound);
        for ((w, beta), outs) in &self.ops {
            let coeffs: Vec<(usize, NovikovScalar)> = outs
                .iter()
                .map(|(o, c)| {
                    (
                        *o,
                        NovikovScalar::monomial(
                            beta.0.clone(),
                            c.clone(),
                            Some(self.monoid.cutoff.clone()),
                        ),
                    )
                })
                .collect();
            a.add_op(w, &coeffs)?;
        }
        Ok(a)
    }
}

#[derive(Clone, Debug)]
pub struct GappedReport {
    pub monoid_violations: Vec<String>,
    pub tag_violations: Vec<String>,
}

impl GappedReport {
    pub fn is_gapped(&self) -> bool {
        self.monoid_violations.is_empty() && self.tag_violations.is_empty()
    }
}

/// Checks the monoid's gapped conditions and that every operation tag
/// lies in the closure below the cutoff.
pub fn gapped_validate(a: &FilteredAInfty) -> GappedReport {
    let monoid_violations = a.monoid.validate();
    let elements = a.monoid.elements();
    let mut tag_violations = Vec::new();
    for ((w, beta), outs) in a.ops() {
        if outs.iter().all(|(_, c)| c.is_zero()) {
            continue;
        }
        if !elements.contains(beta) {
            tag_violations.push(format!(
                "m_{}({w:?}) tagged ({}, {}) outside the monoid",
                w.len(),
                beta.0,
                beta.1
            ));
        }
    }
    GappedReport { monoid_violations, tag_violations }
}

/// Coefficients of `d^ o d^` at all (input word, output word, exponent)
/// keys of order at most the bound; empty iff filtered A-infinity there.
pub fn filtered_ainfty_defect(
    a: &FilteredAInfty,
) -> Result<Vec<(TensorWord, TensorWord, Rational, Rational)>> {
    let s = a.structure()?;
    let mut out = Vec::new();
    for (w, lc) in s.ainfty_defect()? {
        for (w2, sc) in lc.iter() {
            for (e, c) in sc.terms() {
                if a.monoid.order(w2.len(), e)? <= a.order_bound {
                    out.push((w.clone(), w2.clone(), e.clone(), c.clone()));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct FilteredCyclicityReport {
    /// (tuple, beta, lhs, rhs) where the per-beta shift equation fails
    pub defects: Vec<(TensorWord, (Rational, i64), Rational, Rational)>,
}

impl FilteredCyclicityReport {
    pub fn is_cyclic(&self) -> bool {
        self.defects.is_empty()
    }
}

/// Per-(k, beta) cyclic-shift equation against a ground-field pairing on
/// the reduced basis. Emptiness implies emptiness of the combined
/// Novikov-scalar check, which is asserted as a cross-check.
pub fn filtered_cyclicity(
    a: &FilteredAInfty,
    pairing: &[Vec<Rational>],
) -> Result<FilteredCyclicityReport> {
    let basis = &a.basis;
    let dim = basis.len();
    let op_coeff = |w: &[usize], beta: &(Rational, i64), out: usize| -> Rational {
        match a.ops.get(&(w.to_vec(), beta.clone())) {
            Some(outs) => outs
                .iter()
                .filter(|(o, _)| *o == out)
                .fold(Rational::zero(), |acc, (_, c)| acc + c.clone()),
            None => Rational::zero(),
        }
    };
    let mut shapes: BTreeSet<(usize, (Rational, i64))> = BTreeSet::new();
    for (w, beta) in a.ops.keys() {
        if w.is_empty() {
            continue; // the k = 0 equation is vacuous
        }
        shapes.insert((w.len(), beta.clone()));
    }
    let mut defects = Vec::new();
    for (k, beta) in shapes {
        for tuple in words_up_to(dim, k + 1) {
            if tuple.len() != k + 1 {
                continue;
            }
            let mut lhs = Rational::zero();
            let mut rhs = Rational::zero();
            for (o, row) in pairing.iter().enumerate() {
                lhs = lhs + op_coeff(&tuple[..k], &beta, o) * row[tuple[k]].clone();
                rhs = rhs + op_coeff(&tuple[1..], &beta, o) * row[tuple[0]].clone();
            }
            let kos = basis.shifted_degree(tuple[0]) * basis.word_shifted_degree(&tuple[1..]);
            let rhs = rhs.signed(crate::signcore::sign_pow(kos));
            if lhs != rhs {
                defects.push((tuple, beta.clone(), lhs, rhs));
            }
        }
    }
    if defects.is_empty() {
        let matrix: Vec<Vec<NovikovScalar>> = pairing
            .iter()
            .map(|row| row.iter().map(|c| NovikovScalar::from_rational(c.clone())).collect())
            .collect();
        let omega = ConstantTwoForm::new(basis, matrix)?;
        let combined = cyclicity_defect(&a.structure()?, &omega)?;
        if !combined.is_cyclic() {
            return Err(Error::Internal(
                "per-beta cyclicity holds but the combined check fails".into(),
            ));
        }
    }
    Ok(FilteredCyclicityReport { defects })
}

/// Filtered Darboux normalization. Terms with negative energy and at
/// least one `x` letter obstruct: filtered isomorphisms preserve the
/// minimal negative exponent, so no normalization is attempted and the
/// offending term is reported instead.
pub fn filtered_darboux(
    basis: &Basis,
    monoid: &GappedMonoid,
    order_bound: usize,
    omega_full: &CyclicForm<NovikovScalar>,
) -> Result<(Cohomomorphism<NovikovScalar>, ConstantTwoForm<NovikovScalar>)> {
    let len_order = omega_full.truncation_order;
    for (w, _) in omega_full.terms().iter() {
        if form_degree(w) != 2 {
            return Err(Error::Precondition("Darboux input must be a two-form".into()));
        }
    }
    if !d_cyc(basis, omega_full)?.is_zero() {
        return Err(Error::Precondition("Darboux input must be closed".into()));
    }
    let mut worst: Option<(Rational, LWord)> = None;
    for (w, s) in omega_full.terms().iter() {
        if x_count(w) == 0 {
            continue;
        }
        if let Some(tau) = s.valuation() {
            if tau < Rational::zero() {
                let replace = match &worst {
                    Some((t, _)) => tau < *t,
                    None => true,
                };
                if replace {
                    worst = Some((tau, w.clone()));
                }
            }
        }
    }
    if let Some((tau, w)) = worst {
        return Err(Error::Obstruction(format!(
            "a filtered isomorphism preserves the minimal negative exponent {tau} \
             (witness word of {} letters); no normalization exists",
            w.len()
        )));
    }
    let constant = ConstantTwoForm::from_form(basis, omega_full)?;
    if !constant.is_nondegenerate() {
        return Err(Error::Degenerate("constant part of the form is degenerate".into()));
    }
    let c_form = constant.form(basis, len_order)?;
    let cpar = match c_form.terms().iter().next() {
        Some((w, _)) => crate::ncgeom::word_degrees(basis, w).0.rem_euclid(2),
        None => return Err(Error::Degenerate("constant part of the form is zero".into())),
    };
    let mut w_cur = truncate_form_by_order(basis, monoid, omega_full, order_bound)?;
    let c_form = truncate_form_by_order(basis, monoid, &c_form, order_bound)?;
    let levels = monoid.energy_levels();
    let dim = basis.len();
    let cutoff = Some(monoid.cutoff.clone());
    let mut total = Cohomomorphism::identity_filtered(basis.clone(), len_order);
    let cap = 2 * (order_bound + 2 * levels.len() + 1);
    for _step in 0..cap {
        let mut resid = w_cur.clone();
        resid.sub(&c_form);
        if resid.is_zero() {
            break;
        }
        let level = form_min_order(monoid, &resid)?.expect("nonzero residual");
        let resid_l = form_order_part(basis, monoid, &resid, level)?;
        for (w, _) in resid_l.terms().iter() {
            if crate::ncgeom::word_degrees(basis, w).0.rem_euclid(2) != cpar {
                return Err(Error::Precondition(
                    "perturbation is not of the symplectic form's degree mod 2; \
                     no graded transformation exists"
                        .into(),
                ));
            }
        }
        type UKey = (usize, TensorWord, Rational);
        let mut rows: BTreeMap<(LWord, Rational), Vec<(UKey, Rational)>> = BTreeMap::new();
        let mut any_unknown = false;
        for (j, lambda) in levels.iter().enumerate() {
            if 2 * j > level {
                continue;
            }
            let glen = level + 1 - 2 * j;
            if glen < 1 || (glen == 1 && j == 0) {
                continue;
            }
            for g in words_up_to(dim, glen) {
                if g.len() != glen {
                    continue;
                }
                let gdeg = basis.word_shifted_degree(&g);
                for i in 0..dim {
                    if (gdeg - basis.shifted_degree(i)).rem_euclid(2) != 0 {
                        continue;
                    }
                    any_unknown = true;
                    let key: UKey = (i, g.clone(), lambda.clone());
                    let mut fe = Cohomomorphism::identity_filtered(basis.clone(), len_order);
                    let inputs: TensorWord = g.iter().rev().copied().collect();
                    fe.add_component(
                        &inputs,
                        &[(i, NovikovScalar::monomial(lambda.clone(), Rational::one(), cutoff.clone()))],
                    )?;
                    let mut effect = pullback_form(basis, &fe, &c_form)?;
                    effect.sub(&c_form);
                    let effect_l = form_order_part(basis, monoid, &effect, level)?;
                    for (w, s) in effect_l.terms().iter() {
                        for (e, c) in s.terms() {
                            rows.entry((w.clone(), e.clone()))
                                .or_default()
                                .push((key.clone(), c.clone()));
                        }
                    }
                }
            }
        }
        for (w, s) in resid_l.terms().iter() {
            for (e, _) in s.terms() {
                rows.entry((w.clone(), e.clone())).or_default();
            }
        }
        let mut sys: LinearSystem<UKey, Rational> = LinearSystem::new();
        for ((w, e), coeffs) in rows {
            let rhs = -resid_l.terms().coeff(&w).coeff_at(&e);
            sys.add_row(coeffs, rhs);
        }
        let sol = match sys.solve() {
            Some(s) if any_unknown => s,
            _ => {
                return Err(Error::Internal(
                    "filtered Darboux level solve inconsistent for a nondegenerate \
                     constant part"
                        .into(),
                ))
            }
        };
        let mut fstep = Cohomomorphism::identity_filtered(basis.clone(), len_order);
        for ((i, g, lambda), c) in sol {
            let inputs: TensorWord = g.iter().rev().copied().collect();
            fstep.add_component(
                &inputs,
                &[(i, NovikovScalar::monomial(lambda, c, cutoff.clone()))],
            )?;
        }
        w_cur = truncate_form_by_order(
            basis,
            monoid,
            &pullback_form(basis, &fstep, &w_cur)?,
            order_bound,
        )?;
        let mut new_resid = w_cur.clone();
        new_resid.sub(&c_form);
        if let Some(l) = form_min_order(monoid, &new_resid)? {
            if l <= level {
                return Err(Error::Internal(
                    "filtered Darboux residual order failed to increase".into(),
                ));
            }
        }
        total = total.compose(&fstep)?;
    }
    let mut final_resid = w_cur;
    final_resid.sub(&c_form);
    if !final_resid.is_zero() {
        return Err(Error::Internal("filtered Darboux iteration exceeded its step bound".into()));
    }
    let source = truncate_form_by_order(basis, monoid, omega_full, order_bound)?;
    let mut recheck = truncate_form_by_order(
        basis,
        monoid,
        &pullback_form(basis, &total, &source)?,
        order_bound,
    )?;
    recheck.sub(&c_form);
    if !recheck.is_zero() {
        return Err(Error::Internal("filtered Darboux recomputation failed".into()));
    }
    Ok((total, constant))
}

#[derive(Clone, Debug)]
pub struct WeaklyFilteredReport {
    /// Maximal energy drop over the stored entries.
    pub energy_constant: Rational,
    pub witnesses: Vec<String>,
}

impl WeaklyFilteredReport {
    pub fn ok(&self) -> bool {
        self.witnesses.is_empty()
    }
}

/// Minimal energy constant of a weakly filtered bimodule map: the largest
/// valuation drop over its entries, valid only when the bimodule equation
/// holds at the truncation.
pub fn weakly_filtered_check(
    a: &AInftyStructure<NovikovScalar>,
    psi: &BimoduleMapStore<NovikovScalar>,
) -> Result<WeaklyFilteredReport> {
    let mut c = Rational::zero();
    for (_, s) in psi.iter() {
        if let Some(tau) = s.valuation() {
            let drop = -tau;
            if drop > c {
                c = drop;
            }
        }
    }
    let mut witnesses = Vec::new();
    for (slot, lc) in bimodule_defect(a, psi) {
        witnesses.push(format!("bimodule equation fails at {slot:?}: {lc:?}"));
    }
    Ok(WeaklyFilteredReport { energy_constant: c, witnesses })
}

/// Exponential automorphism of a filtered vector field: components must
/// be non-constant with order at least 2 (length-1 components need
/// positive energy) and even operator degree.
pub fn filtered_exp(
    basis: &Basis,
    monoid: &GappedMonoid,
    v: &FormalVectorField<NovikovScalar>,
) -> Result<Cohomomorphism<NovikovScalar>> {
    for comp in v.components.iter() {
        for (w, c) in comp.terms.iter() {
            if w.is_empty() {
                return Err(Error::Precondition(
                    "filtered exponential rejects constant vector field terms".into(),
                ));
            }
            for (e, _) in c.terms() {
                if monoid.order(x_count(w), e)? < 2 {
                    return Err(Error::Precondition(
                        "filtered exponential needs components of order >= 2".into(),
                    ));
                }
            }
        }
    }
    let (ops, _) = field_ops(basis, v, true)?;
    exp_core(basis, &ops, v.truncation_order, true)
}

/// Filtered equivalence loop: the unfiltered iteration with the order
/// functional replacing word length. The perturbation cochain must be
/// energy non-negative (theorem hypothesis) and the structure canonical.
pub fn filtered_equivalence(
    a: &FilteredAInfty,
    omega: &ConstantTwoForm<NovikovScalar>,
    eta: &HochschildCochainSeq<NovikovScalar>,
) -> Result<EquivalenceCertificate<NovikovScalar>> {
    let basis = &a.basis;
    let monoid = &a.monoid;
    let len_order = a.order_bound;
    let n = a.order_bound;
    if !a.is_canonical() {
        return Err(Error::Precondition(
            "filtered equivalence needs a canonical structure (m_{1,0} = 0)".into(),
        ));
    }
    if !omega.is_nondegenerate() {
        return Err(Error::Degenerate("equivalence needs a nondegenerate form".into()));
    }
    let s = a.structure()?;
    if !cyclicity_defect(&s, omega)?.is_cyclic() {
        return Err(Error::Precondition("the form is not cyclic for the structure".into()));
    }
    let pair_deg = omega.pair_degree(basis)?.expect("nondegenerate matrix is nonzero");
    for ((u, j), c) in eta.iter() {
        if u.is_empty() {
            return Err(Error::Precondition(
                "perturbation cochain must have arity >= 1 components".into(),
            ));
        }
        if let Some(tau) = c.valuation() {
            if tau < Rational::zero() {
                return Err(Error::Precondition(
                    "perturbation cochain has a negative-energy term; the theorem \
                     requires non-negative energy"
                        .into(),
                ));
            }
        }
        let d = basis.word_shifted_degree(u) + basis.shifted_degree(*j);
        if (d - pair_deg - 1).rem_euclid(2) != 0 {
            return Err(Error::Precondition(
                "perturbation cochain is not of the degree paired by the form mod 2; \
                 no graded automorphism exists"
                    .into(),
            ));
        }
    }
    let q = q_from_structure(&s);
    let omega_form =
        truncate_form_by_order(basis, monoid, &omega.form(basis, len_order)?, n)?;
    let mut alpha = oneform_from_cochain(basis, eta)?;
    let perturbation = truncate_form_by_order(
        basis,
        monoid,
        &d_cyc(basis, &lie_derivative(basis, &q, &alpha)?)?,
        n,
    )?;
    let mut w_cur = omega_form.clone();
    w_cur.add(&perturbation);
    let mut total = Cohomomorphism::identity_filtered(basis.clone(), len_order);
    let mut steps: Vec<(usize, FormalVectorField<NovikovScalar>)> = Vec::new();
    let cap = 2 * (n + 2 * monoid.energy_levels().len() + 1);
    for _round in 0..cap {
        let mut resid = w_cur.clone();
        resid.sub(&omega_form);
        if resid.is_zero() {
            break;
        }
        let level = form_min_order(monoid, &resid)?.expect("nonzero residual");
        // the Lie derivative is not truncated before d: d lowers the
        // order by one, so order-(n+1) terms still matter at order n
        let mut beta = lie_derivative(basis, &q, &alpha)?;
        let mut check = truncate_form_by_order(basis, monoid, &d_cyc(basis, &beta)?, n)?;
        check.sub(&resid);
        if !check.is_zero() {
            return Err(Error::Internal("residual left the exact image of the one-form".into()));
        }
        beta.scale(&-NovikovScalar::one());
        let v = solve_contraction(basis, omega, &beta)?;
        let bracket = vf_bracket(basis, &q, &v);
        if !bracket.is_zero() {
            return Err(Error::Internal("contraction solution does not commute with Q".into()));
        }
        let fstep = filtered_exp(basis, monoid, &v)?;
        let pulled =
            truncate_form_by_order(basis, monoid, &pullback_form(basis, &fstep, &w_cur)?, n)?;
        if v.min_order().is_some_and(|o| o >= 2) {
            let lie_route =
                truncate_form_by_order(basis, monoid, &exp_lie(basis, &v, &w_cur)?, n)?;
            if pulled != lie_route {
                return Err(Error::Internal(
                    "substitution and Lie-series pullbacks disagree".into(),
                ));
            }
        }
        // alpha' = sum_k (1/k! - 1/(k+1)!) L_v^k alpha
        let mut new_alpha = CyclicForm::zero(len_order);
        let mut term = alpha.clone();
        let mut factorial = Rational::from_int(1);
        for k in 1..=(cap as i64) {
            term = truncate_form_by_order(
                basis,
                monoid,
                &lie_derivative(basis, &v, &term)?,
                n,
            )?;
            if term.is_zero() {
                break;
            }
            factorial = factorial.clone() * Rational::from_int(k);
            let ak = Rational::from_int(1) / factorial.clone()
                - Rational::from_int(1) / (factorial.clone() * Rational::from_int(k + 1));
            let mut t = term.clone();
            t.scale(&NovikovScalar::from_rational(ak));
            new_alpha.add(&t);
        }
        let mut expect = truncate_form_by_order(
            basis,
            monoid,
            &d_cyc(basis, &lie_derivative(basis, &q, &new_alpha)?)?,
            n,
        )?;
        expect.add(&omega_form);
        if expect != pulled {
            return Err(Error::Internal("closed-form residual update failed".into()));
        }
        let mut new_resid = pulled.clone();
        new_resid.sub(&omega_form);
        if let Some(l) = form_min_order(monoid, &new_resid)? {
            if l <= level {
                return Err(Error::Internal("residual order failed to increase".into()));
            }
        }
        steps.push((level, v));
        alpha = new_alpha;
        w_cur = pulled;
        total = total.compose(&fstep)?;
    }
    let mut residual = w_cur;
    residual.sub(&omega_form);
    if !residual.is_zero() {
        return Err(Error::Internal("filtered equivalence exceeded its step bound".into()));
    }
    for (_, lc) in total.homomorphism_defect(&s, &s)? {
        for (w2, sc) in lc.iter() {
            for (e, _) in sc.terms() {
                if monoid.order(w2.len(), e)? <= n {
                    return Err(Error::Internal(
                        "equivalence automorphism is not a homomorphism".into(),
                    ));
                }
            }
        }
    }
    Ok(EquivalenceCertificate { automorphism: total, residual, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{quantum_sphere, sphere, sphere_pairing};
    use crate::gen;
    use crate::ncgeom::contract;
    use rand::Rng;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn random_scalar(rng: &mut rand_chacha::ChaCha8Rng, cutoff: Option<Rational>) -> NovikovScalar {
        let mut s = NovikovScalar::zero();
        for _ in 0..rng.gen_range(0..=3usize) {
            let e = q(rng.gen_range(-3..=6i64), rng.gen_range(1..=2i64));
            s = s + NovikovScalar::monomial(e, gen::small_rational(rng), cutoff.clone());
        }
        s
    }

    #[test]
    fn scalar_valuation_nonarchimedean() {
        let mut rng = gen::rng(11);
        for _ in 0..200 {
            let a = random_scalar(&mut rng, None);
            let b = random_scalar(&mut rng, None);
            let s = a.clone() + b.clone();
            if let Some(vs) = s.valuation() {
                let bound = match (a.valuation(), b.valuation()) {
                    (Some(x), Some(y)) => x.min(y),
                    (Some(x), None) | (None, Some(x)) => x,
                    (None, None) => unreachable!(),
                };
                assert!(vs >= bound);
            }
            let p = a.clone() * b.clone();
            match (a.valuation(), b.valuation()) {
                (Some(x), Some(y)) => {
                    // leading coefficients cannot cancel in a product of
                    // single leading terms over a field
                    assert_eq!(p.valuation(), Some(x + y));
                }
                _ => assert!(p.is_zero()),
            }
        }
    }

    #[test]
    fn scalar_inverse_roundtrip() {
        let mut rng = gen::rng(12);
        let cut = q(5, 1);
        let mut checked = 0;
        while checked < 60 {
            let a = random_scalar(&mut rng, Some(cut.clone()));
            if a.is_zero() {
                continue;
            }
            let inv = a.inv().expect("nonzero truncated series invert");
            assert_eq!(a.clone() * inv, NovikovScalar::one());
            checked += 1;
        }
        // no-cutoff series only invert when they are monomials
        let m = NovikovScalar::monomial(q(-1, 2), q(3, 1), None);
        assert_eq!(m.clone() * m.inv().unwrap(), NovikovScalar::one());
        let two_terms = NovikovScalar::one() + NovikovScalar::monomial(q(1, 1), q(1, 1), None);
        assert!(two_terms.inv().is_none());
    }

    #[test]
    fn monoid_closure_and_levels() {
        let m = GappedMonoid::new(vec![(q(1, 1), 2)], q(4, 1));
        let els: Vec<(Rational, i64)> = m.elements().into_iter().collect();
        assert_eq!(
            els,
            vec![(q(0, 1), 0), (q(1, 1), 2), (q(2, 1), 4), (q(3, 1), 6)]
        );
        assert_eq!(m.energy_levels(), vec![q(0, 1), q(1, 1), q(2, 1), q(3, 1)]);
        assert_eq!(m.level_index(&q(2, 1)).unwrap(), 2);
        assert!(m.level_index(&q(1, 2)).is_err());
        assert!(m.validate().is_empty());
    }

    #[test]
    fn monoid_condition_violations() {
        let m = GappedMonoid::new(vec![(q(0, 1), 2), (q(-1, 1), 0), (q(1, 1), 3)], q(4, 1));
        let v = m.validate();
        assert_eq!(v.len(), 3);
        assert!(v.iter().any(|s| s.contains("negative")));
        assert!(v.iter().any(|s| s.contains("odd")));
        assert!(v.iter().any(|s| s.contains("trivial-fiber")));
    }

    #[test]
    fn order_functional_examples() {
        let m = GappedMonoid::new(vec![(q(1, 1), 2)], q(4, 1));
        // one x letter at the first positive level
        assert_eq!(m.order(1, &q(1, 1)).unwrap(), 3);
        // three letters at energy zero
        assert_eq!(m.order(3, &q(0, 1)).unwrap(), 3);
        // additivity over concatenation on this lattice
        assert_eq!(
            m.order(2 + 1, &(q(1, 1) + q(2, 1))).unwrap(),
            m.order(2, &q(1, 1)).unwrap() + m.order(1, &q(2, 1)).unwrap()
        );
    }

    #[test]
    fn quantum_sphere_is_gapped() {
        let a = quantum_sphere(8, q(4, 1));
        assert!(gapped_validate(&a).is_gapped());
        let mut bad = a.clone();
        bad.add_op(&[1, 1], (q(1, 2), 0), &[(0, q(1, 1))]).unwrap();
        let report = gapped_validate(&bad);
        assert!(report.monoid_violations.is_empty());
        assert_eq!(report.tag_violations.len(), 1);
    }

    #[test]
    fn quantum_sphere_ainfty_defect_empty() {
        let a = quantum_sphere(8, q(4, 1));
        assert!(filtered_ainfty_defect(&a).unwrap().is_empty());
    }

    #[test]
    fn corrupted_structure_fails_defect_and_cyclicity() {
        let mut a = quantum_sphere(6, q(4, 1));
        // degree-legal mod 2 but breaks unitality, hence both the
        // filtered relations and the shift symmetry
        a.add_op(&[0, 1], (q(1, 1), 2), &[(0, q(1, 1))]).unwrap();
        assert!(!filtered_ainfty_defect(&a).unwrap().is_empty());
        let rep = filtered_cyclicity(&a, &sphere_pairing()).unwrap();
        assert!(!rep.is_cyclic());
    }

    #[test]
    fn quantum_sphere_cyclicity() {
        let a = quantum_sphere(6, q(4, 1));
        let rep = filtered_cyclicity(&a, &sphere_pairing()).unwrap();
        assert!(rep.is_cyclic());
    }

    fn trivial_filtered_sphere(order: usize) -> FilteredAInfty {
        let s: AInftyStructure<Rational> = sphere(order);
        let mut a =
            FilteredAInfty::new(s.basis.clone(), GappedMonoid::trivial(q(4, 1)), order);
        let zero = (Rational::zero(), 0);
        a.add_op(&[0, 0], zero.clone(), &[(0, q(1, 1))]).unwrap();
        a.add_op(&[0, 1], zero.clone(), &[(1, q(1, 1))]).unwrap();
        a.add_op(&[1, 0], zero, &[(1, q(1, 1))]).unwrap();
        a
    }

    #[test]
    fn trivial_monoid_degenerates_to_unfiltered() {
        let a = trivial_filtered_sphere(6);
        assert!(gapped_validate(&a).is_gapped());
        assert!(filtered_ainfty_defect(&a).unwrap().is_empty());
        assert!(filtered_cyclicity(&a, &sphere_pairing()).unwrap().is_cyclic());
        // filtered Darboux on an energy-zero form agrees with the
        // unfiltered normalization componentwise
        let basis = &a.basis;
        let omega_q =
            crate::sympeq::ConstantTwoForm::<Rational>::new(basis, sphere_pairing()).unwrap();
        let mut pert = CyclicForm::zero(6);
        pert.add_word(
            basis,
            vec![Letter::x(0), Letter::x(1), Letter::x(0), Letter::dx(1)],
            q(1, 2),
        )
        .unwrap();
        let mut full_q = omega_q.form(basis, 6).unwrap();
        full_q.add(&d_cyc(basis, &pert).unwrap());
        let (f_q, c_q) = crate::sympeq::darboux(basis, &full_q).unwrap();
        let full_n = embed_form(basis, &full_q, q(4, 1)).unwrap();
        let (f_n, c_n) = filtered_darboux(basis, &a.monoid, 6, &full_n).unwrap();
        assert_eq!(c_q.matrix.len(), c_n.matrix.len());
        for (rq, rn) in c_q.matrix.iter().zip(c_n.matrix.iter()) {
            for (cq, cn) in rq.iter().zip(rn.iter()) {
                assert_eq!(cn.as_rational().as_ref(), Some(cq));
            }
        }
        for w in crate::barcx::words_up_to(basis.len(), 5) {
            if w.is_empty() {
                continue;
            }
            let outs_q = f_q.component(&w);
            let outs_n = f_n.component(&w);
            for i in 0..basis.len() {
                let cq: Rational =
                    outs_q
                        .iter()
                        .filter(|(o, _)| **o == i)
                        .fold(Rational::zero(), |acc, (_, c)| acc + c.clone());
                let cn = outs_n
                    .iter()
                    .filter(|(o, _)| **o == i)
                    .fold(NovikovScalar::zero(), |acc, (_, c)| acc + c.clone());
                assert_eq!(cn.as_rational(), Some(cq));
            }
        }
    }

    #[test]
    fn filtered_darboux_normalizes_energy_one_perturbation() {
        let a = quantum_sphere(6, q(4, 1));
        let basis = &a.basis;
        let matrix: Vec<Vec<NovikovScalar>> = sphere_pairing::<Rational>()
            .iter()
            .map(|r| r.iter().map(|c| NovikovScalar::from_rational(c.clone())).collect())
            .collect();
        let omega = ConstantTwoForm::new(basis, matrix).unwrap();
        let mut pert = CyclicForm::zero(6);
        pert.add_word(
            basis,
            vec![Letter::x(0), Letter::x(1), Letter::x(0), Letter::dx(1)],
            NovikovScalar::monomial(q(1, 1), q(1, 1), Some(q(4, 1))),
        )
        .unwrap();
        let mut full = omega.form(basis, 6).unwrap();
        full.add(&d_cyc(basis, &pert).unwrap());
        let (f, c) = filtered_darboux(basis, &a.monoid, 8, &full).unwrap();
        assert!(c.is_nondegenerate());
        // the transformation is nontrivial above the identity
        let mut nontrivial = false;
        for w in crate::barcx::words_up_to(basis.len(), 5) {
            if w.len() >= 2 && !f.component(&w).is_empty() {
                nontrivial = true;
            }
        }
        assert!(nontrivial);
    }

    #[test]
    fn filtered_darboux_negative_energy_obstruction() {
        let a = quantum_sphere(6, q(4, 1));
        let basis = &a.basis;
        let matrix: Vec<Vec<NovikovScalar>> = sphere_pairing::<Rational>()
            .iter()
            .map(|r| r.iter().map(|c| NovikovScalar::from_rational(c.clone())).collect())
            .collect();
        let omega = ConstantTwoForm::new(basis, matrix).unwrap();
        let mut pert = CyclicForm::zero(6);
        pert.add_word(
            basis,
            vec![Letter::x(0), Letter::x(1), Letter::x(0), Letter::dx(1)],
            NovikovScalar::monomial(q(-1, 1), q(1, 1), Some(q(4, 1))),
        )
        .unwrap();
        let mut full = omega.form(basis, 6).unwrap();
        full.add(&d_cyc(basis, &pert).unwrap());
        let before = full.clone();
        match filtered_darboux(basis, &a.monoid, 8, &full) {
            Err(Error::Obstruction(msg)) => assert!(msg.contains("-1")),
            other => panic!("expected an obstruction, got {other:?}"),
        }
        // purity: the input is untouched
        assert_eq!(full.terms().iter().count(), before.terms().iter().count());
    }

    #[test]
    fn weakly_filtered_constants() {
        let a = quantum_sphere(6, q(4, 1));
        let s = a.structure().unwrap();
        let basis = &a.basis;
        let matrix: Vec<Vec<NovikovScalar>> = sphere_pairing::<Rational>()
            .iter()
            .map(|r| r.iter().map(|c| NovikovScalar::from_rational(c.clone())).collect())
            .collect();
        let omega = ConstantTwoForm::new(basis, matrix).unwrap();
        let _ = basis;
        let psi = omega.bimodule_map(6);
        let rep = weakly_filtered_check(&s, &psi).unwrap();
        assert!(rep.ok());
        assert_eq!(rep.energy_constant, Rational::zero());
        // a global energy shift costs exactly that much
        let mut shifted = psi.clone();
        shifted.scale(&NovikovScalar::monomial(q(-1, 2), q(1, 1), Some(q(4, 1))));
        let rep = weakly_filtered_check(&s, &shifted).unwrap();
        assert!(rep.ok());
        assert_eq!(rep.energy_constant, q(1, 2));
        // junk entries break the bimodule equation
        let mut junk: BimoduleMapStore<NovikovScalar> = BimoduleMapStore::zero(6);
        junk.add_entry(
            crate::hochcyc::BimodKey { left: vec![1], center: 0, right: vec![], out: 1 },
            NovikovScalar::one(),
        );
        let rep = weakly_filtered_check(&s, &junk).unwrap();
        assert!(!rep.ok());
    }

    fn qs_omega(a: &FilteredAInfty) -> ConstantTwoForm<NovikovScalar> {
        let matrix: Vec<Vec<NovikovScalar>> = sphere_pairing::<Rational>()
            .iter()
            .map(|r| r.iter().map(|c| NovikovScalar::from_rational(c.clone())).collect())
            .collect();
        ConstantTwoForm::new(&a.basis, matrix).unwrap()
    }

    #[test]
    fn filtered_equivalence_zero_eta_is_identity() {
        let a = quantum_sphere(6, q(4, 1));
        let omega = qs_omega(&a);
        let eta = HochschildCochainSeq::zero(6);
        let cert = filtered_equivalence(&a, &omega, &eta).unwrap();
        assert!(cert.residual.is_zero());
        assert!(cert.steps.is_empty());
    }

    #[test]
    fn filtered_equivalence_certificate() {
        let a = quantum_sphere(6, q(4, 1));
        let omega = qs_omega(&a);
        let mut eta = HochschildCochainSeq::zero(6);
        eta.add_term(
            &[1, 1],
            0,
            NovikovScalar::one() + NovikovScalar::monomial(q(1, 1), q(1, 1), Some(q(4, 1))),
        );
        eta.add_term(&[0, 1], 1, NovikovScalar::from_rational(q(1, 2)));
        let cert = filtered_equivalence(&a, &omega, &eta).unwrap();
        assert!(cert.residual.is_zero());
        assert!(!cert.steps.is_empty());
    }

    #[test]
    fn filtered_equivalence_preconditions() {
        let a = quantum_sphere(6, q(4, 1));
        let omega = qs_omega(&a);
        // negative energy in the perturbation
        let mut eta = HochschildCochainSeq::zero(6);
        eta.add_term(&[1, 1], 0, NovikovScalar::monomial(q(-1, 1), q(1, 1), Some(q(4, 1))));
        assert!(matches!(
            filtered_equivalence(&a, &omega, &eta),
            Err(Error::Precondition(_))
        ));
        // wrong parity
        let mut eta = HochschildCochainSeq::zero(6);
        eta.add_term(&[1], 1, NovikovScalar::one());
        assert!(matches!(
            filtered_equivalence(&a, &omega, &eta),
            Err(Error::Precondition(_))
        ));
        // non-canonical structure
        let basis = crate::barcx::Basis::new(vec![
            crate::signcore::BasisElement::new("a", 1),
            crate::signcore::BasisElement::new("b", 2),
        ])
        .unwrap();
        let mut nc = FilteredAInfty::new(basis.clone(), GappedMonoid::trivial(q(4, 1)), 6);
        nc.add_op(&[0], (Rational::zero(), 0), &[(1, q(1, 1))]).unwrap();
        let matrix = vec![
            vec![NovikovScalar::zero(), NovikovScalar::one()],
            vec![-NovikovScalar::one(), NovikovScalar::zero()],
        ];
        let om = ConstantTwoForm::new(&basis, matrix).unwrap();
        let eta = HochschildCochainSeq::zero(6);
        assert!(matches!(
            filtered_equivalence(&nc, &om, &eta),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn operators_respect_the_order_filtration() {
        let a = quantum_sphere(6, q(4, 1));
        let s = a.structure().unwrap();
        let basis = &a.basis;
        let monoid = &a.monoid;
        let qf = q_from_structure(&s);
        let mut rng = gen::rng(31);
        for _ in 0..60 {
            let fq = gen::random_form(&mut rng, basis, 3, 4, 6);
            let f = embed_form(basis, &fq, q(4, 1)).unwrap();
            let base = match form_min_order(monoid, &f).unwrap() {
                Some(o) => o,
                None => continue,
            };
            let df = d_cyc(basis, &f).unwrap();
            if let Some(o) = form_min_order(monoid, &df).unwrap() {
                assert!(o + 1 >= base, "d lowers the order by at most one");
            }
            let iqf = contract(basis, &qf, &f).unwrap();
            if let Some(o) = form_min_order(monoid, &iqf).unwrap() {
                assert!(o >= base + 2, "i_Q raises the order by at least two");
            }
            let lqf = lie_derivative(basis, &qf, &f).unwrap();
            if let Some(o) = form_min_order(monoid, &lqf).unwrap() {
                assert!(o > base, "L_Q raises the order by at least one");
            }
        }
    }

    #[test]
    fn filtered_exp_preconditions() {
        let a = quantum_sphere(6, q(4, 1));
        let basis = &a.basis;
        // a length-1 energy-0 component has order 1
        let mut v: FormalVectorField<NovikovScalar> = FormalVectorField::zero(basis.len(), 6);
        v.components[1].add_term(vec![Letter::x(1)], NovikovScalar::one());
        assert!(matches!(
            filtered_exp(basis, &a.monoid, &v),
            Err(Error::Precondition(_))
        ));
        // the same component at energy 1 has order 3 and exponentiates
        let mut v: FormalVectorField<NovikovScalar> = FormalVectorField::zero(basis.len(), 6);
        v.components[1].add_term(
            vec![Letter::x(1)],
            NovikovScalar::monomial(q(1, 1), q(1, 1), Some(q(4, 1))),
        );
        let f = filtered_exp(basis, &a.monoid, &v).unwrap();
        let outs = f.component(&[1]);
        let total = outs
            .iter()
            .filter(|(o, _)| **o == 1usize)
            .fold(NovikovScalar::zero(), |acc, (_, c)| acc + c.clone());
        // exp of the scaling field: 1 + T + T^2/2 + T^3/6 below the cutoff
        let mut expect = NovikovScalar::one();
        expect = expect + NovikovScalar::monomial(q(1, 1), q(1, 1), Some(q(4, 1)));
        expect = expect + NovikovScalar::monomial(q(2, 1), q(1, 2), Some(q(4, 1)));
        expect = expect + NovikovScalar::monomial(q(3, 1), q(1, 6), Some(q(4, 1)));
        assert_eq!(total + NovikovScalar::one(), expect + NovikovScalar::one());
    }

}

//! Deterministic seeded generators for randomized suites. Every consumer
//! (test harnesses and the CLI's seeded commands) goes through these so
//! identical seeds give identical objects.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::barcx::{AInftyStructure, Basis};
use crate::hochcyc::{ChainSum, HochschildChain, HochschildCochainSeq, NegativeCyclicCochain};
use crate::ncgeom::{CyclicForm, FormalVectorField, Letter, NCPoly};
use crate::signcore::Rational;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    let n = rng.gen_range(-6..=6i64);
    let d = rng.gen_range(1..=3i64);
    Rational::new(n, d)
}

pub fn nonzero_small_rational(rng: &mut ChaCha8Rng) -> Rational {
    loop {
        let q = small_rational(rng);
        if !num_traits::Zero::is_zero(&q) {
            return q;
        }
    }
}

fn random_letter(rng: &mut ChaCha8Rng, n_vars: usize, allow_dx: bool) -> Letter {
    let i = rng.gen_range(0..n_vars);
    if allow_dx && rng.gen_bool(0.4) {
        Letter::dx(i)
    } else {
        Letter::x(i)
    }
}

fn random_word(
    rng: &mut ChaCha8Rng,
    n_vars: usize,
    min_len: usize,
    max_len: usize,
    allow_dx: bool,
) -> Vec<Letter> {
    let len = rng.gen_range(min_len..=max_len);
    (0..len).map(|_| random_letter(rng, n_vars, allow_dx)).collect()
}

/// Random cyclic form with up to `max_terms` words of length in
/// `1..=max_len` (no constant term).
pub fn random_form(
    rng: &mut ChaCha8Rng,
    basis: &Basis,
    max_terms: usize,
    max_len: usize,
    order: usize,
) -> CyclicForm<Rational> {
    let mut f = CyclicForm::zero(order);
    let k = rng.gen_range(1..=max_terms);
    for _ in 0..k {
        let w = random_word(rng, basis.len(), 1, max_len, true);
        f.add_word(basis, w, small_rational(rng)).expect("nonempty word");
    }
    f
}

/// Random vector field whose terms all have the same operator degree
/// (homogeneous fields are needed for the graded commutator identities).
pub fn random_homogeneous_vf(
    rng: &mut ChaCha8Rng,
    basis: &Basis,
    max_len: usize,
    order: usize,
) -> FormalVectorField<Rational> {
    let n = basis.len();
    // sample candidate terms, keep the degree class of the first
    let mut vf = FormalVectorField::zero(n, order);
    let mut target: Option<i64> = None;
    let terms = rng.gen_range(1..=4usize);
    let mut placed = 0;
    let mut attempts = 0;
    while placed < terms && attempts < 60 {
        attempts += 1;
        let i = rng.gen_range(0..n);
        let w = random_word(rng, n, 1, max_len, false);
        let deg = crate::ncgeom::word_degrees(basis, &w).0
            - Letter::x(i).symbol(basis).shifted_degree;
        match target {
            None => target = Some(deg),
            Some(t) if t != deg => continue,
            _ => {}
        }
        vf.components[i].add_term(w, small_rational(rng));
        placed += 1;
    }
    vf
}

/// Random basis of the given dimension with degrees in `-1..=3` and a
/// flagged unit in degree 0 when `with_unit` is set.
pub fn random_basis(rng: &mut ChaCha8Rng, dim: usize, with_unit: bool) -> Basis {
    use crate::signcore::BasisElement;
    let mut v = Vec::new();
    for i in 0..dim {
        if i == 0 && with_unit {
            v.push(BasisElement::unit("e0", 0));
        } else {
            let d = rng.gen_range(-1..=3i64);
            v.push(BasisElement::new(&format!("e{i}"), d));
        }
    }
    Basis::new(v).expect("at most one unit")
}

/// Random degree-legal sparse structure: ops of arity 1..=3 with random
/// outputs wherever the degree +1 rule admits one. Usually NOT A-infinity;
/// used for verdict-agreement suites.
pub fn random_structure(
    rng: &mut ChaCha8Rng,
    basis: &Basis,
    order: usize,
    max_ops: usize,
) -> AInftyStructure<Rational> {
    let n = basis.len();
    let mut a = AInftyStructure::new(basis.clone(), order);
    let mut placed = 0;
    let mut attempts = 0;
    while placed < max_ops && attempts < 80 {
        attempts += 1;
        let k = rng.gen_range(1..=3usize);
        let inputs: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
        let in_deg = basis.word_shifted_degree(&inputs);
        let candidates: Vec<usize> =
            (0..n).filter(|&i| basis.shifted_degree(i) == in_deg + 1).collect();
        if candidates.is_empty() {
            continue;
        }
        let out = candidates[rng.gen_range(0..candidates.len())];
        a.add_op(&inputs, &[(out, nonzero_small_rational(rng))]).expect("degree-legal");
        placed += 1;
    }
    a
}

/// Random Hochschild chain sum with tails of length up to `max_tail`.
pub fn random_chain(
    rng: &mut ChaCha8Rng,
    basis: &Basis,
    max_tail: usize,
) -> ChainSum<Rational> {
    let n = basis.len();
    let mut c = ChainSum::new();
    for _ in 0..rng.gen_range(1..=3usize) {
        let v = rng.gen_range(0..n);
        let len = rng.gen_range(0..=max_tail);
        let tail: Vec<usize> = (0..len).map(|_| rng.gen_range(0..n)).collect();
        c.add_term(HochschildChain::new(v, tail), small_rational(rng));
    }
    c
}

/// Random Hochschild cochain sequence on the full complex with up to
/// `max_terms` components of arity up to `max_arity`.
pub fn random_cochain(
    rng: &mut ChaCha8Rng,
    basis: &Basis,
    max_terms: usize,
    order: usize,
    max_arity: usize,
) -> HochschildCochainSeq<Rational> {
    let n = basis.len();
    let mut f = HochschildCochainSeq::zero(order);
    let cap = max_arity.min(order.saturating_sub(1));
    for _ in 0..rng.gen_range(1..=max_terms) {
        let len = rng.gen_range(0..=cap);
        let inputs: Vec<usize> = (0..len).map(|_| rng.gen_range(0..n)).collect();
        let out = rng.gen_range(0..n);
        f.add_term(&inputs, out, small_rational(rng));
    }
    f
}

/// Random rational combination of up to `max_combo` nullspace basis
/// vectors (all assumed to share column count and order).
pub fn random_cocycle(
    rng: &mut ChaCha8Rng,
    basis_vecs: &[NegativeCyclicCochain<Rational>],
    max_combo: usize,
) -> NegativeCyclicCochain<Rational> {
    let cols = basis_vecs[0].columns.len();
    let order = basis_vecs[0].columns[0].truncation_order;
    let mut phi = NegativeCyclicCochain::zero(cols, order);
    for _ in 0..rng.gen_range(1..=max_combo) {
        let v = &basis_vecs[rng.gen_range(0..basis_vecs.len())];
        let s = nonzero_small_rational(rng);
        for (i, col) in v.columns.iter().enumerate() {
            let mut scaled = col.clone();
            scaled.scale(&s);
            phi.columns[i].add(&scaled);
        }
    }
    phi
}

/// Random operator-degree-zero vector field with component words of
/// length `2..=max_len` (the class admitted by the exponential).
pub fn random_degree0_vf(
    rng: &mut ChaCha8Rng,
    basis: &Basis,
    max_len: usize,
    order: usize,
) -> FormalVectorField<Rational> {
    let n = basis.len();
    // enumerate admissible (target, word) pairs, then sample a few
    let mut admissible: Vec<(usize, Vec<Letter>)> = Vec::new();
    for w in crate::barcx::words_up_to(n, max_len) {
        if w.len() < 2 {
            continue;
        }
        let letters: Vec<Letter> = w.iter().map(|&x| Letter::x(x)).collect();
        let deg = crate::ncgeom::word_degrees(basis, &letters).0;
        for i in 0..n {
            if deg == Letter::x(i).symbol(basis).shifted_degree {
                admissible.push((i, letters.clone()));
            }
        }
    }
    let mut vf = FormalVectorField::zero(n, order);
    if admissible.is_empty() {
        return vf;
    }
    for _ in 0..rng.gen_range(1..=3usize) {
        let (i, w) = admissible[rng.gen_range(0..admissible.len())].clone();
        vf.components[i].add_term(w, small_rational(rng));
    }
    vf
}

/// Random cochain whose components all carry the shifted degree
/// `pair_deg + 1` admitted as a perturbation of a pairing of degree
/// `pair_deg` (and arity >= 1). Empty when nothing is admissible.
pub fn random_admissible_eta(
    rng: &mut ChaCha8Rng,
    basis: &Basis,
    pair_deg: i64,
    max_terms: usize,
    order: usize,
    max_arity: usize,
) -> HochschildCochainSeq<Rational> {
    let n = basis.len();
    let cap = max_arity.min(order.saturating_sub(1)).max(1);
    let mut admissible: Vec<(Vec<usize>, usize)> = Vec::new();
    for u in crate::barcx::words_up_to(n, cap) {
        if u.is_empty() {
            continue;
        }
        for j in 0..n {
            if basis.word_shifted_degree(&u) + basis.shifted_degree(j) == pair_deg + 1 {
                admissible.push((u.clone(), j));
            }
        }
    }
    let mut f = HochschildCochainSeq::zero(order);
    if admissible.is_empty() {
        return f;
    }
    for _ in 0..rng.gen_range(1..=max_terms) {
        let (u, j) = admissible[rng.gen_range(0..admissible.len())].clone();
        f.add_term(&u, j, small_rational(rng));
    }
    f
}

/// Random A-infinity structure that IS valid: either the zero structure, a
/// fixture, or a fixture pulled through nothing; paired with broken ones in
/// the agreement suites.
pub fn random_poly_no_dx(
    rng: &mut ChaCha8Rng,
    basis: &Basis,
    max_terms: usize,
    min_len: usize,
    max_len: usize,
    order: usize,
) -> NCPoly<Rational> {
    let mut p = NCPoly::zero(order);
    let k = rng.gen_range(1..=max_terms);
    for _ in 0..k {
        let w = random_word(rng, basis.len(), min_len, max_len, false);
        p.add_term(w, small_rational(rng));
    }
    p
}

//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Everything is exact rational (or Novikov) arithmetic; the
//! criteria with an exit-code contract spawn the built binary.

use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use ainfcyc::barcx::words_up_to;
use ainfcyc::fixtures;
use ainfcyc::gen;
use ainfcyc::hochcyc::{
    b_chain, bstar, cocycle_nullspace, connes_bstar, oneform_from_cochain, pair, tilde,
    trace_compare, twoform_from_bimodmap, validate_negative_cocycle, Complex,
};
use ainfcyc::ncgeom::{
    contract, d_cyc, exp_lie, lie_derivative, poincare_h, pullback_form, q_from_structure,
    vf_bracket, word_degrees, CyclicForm, FormalVectorField, Letter,
};
use ainfcyc::novikov::{
    filtered_ainfty_defect, filtered_cyclicity, filtered_darboux, filtered_equivalence,
    gapped_validate, NovikovScalar,
};
use ainfcyc::signcore::sign_pow;
use ainfcyc::sympeq::{
    bimodmap_from_twoform, cyclicity_defect, darboux, diagram_check, equivalence_automorphism,
    exp_coderivation, ship_check, ConstantTwoForm,
};
use ainfcyc::{
    Basis, Cohomomorphism, Error, HochschildCochainSeq, Rational, Scalar, TensorWord,
};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn report(n: u32, name: &str, budget: Duration, f: impl FnOnce() + UnwindSafe) {
    let start = Instant::now();
    let r = catch_unwind(f);
    let elapsed = start.elapsed();
    let verdict = if r.is_ok() && elapsed < budget { "pass" } else { "fail" };
    println!("criterion {n} ({name}): {verdict} [{} ms]", elapsed.as_millis());
    if let Err(p) = r {
        resume_unwind(p);
    }
    assert!(elapsed < budget, "criterion {n} exceeded its {budget:?} budget");
}

fn sphere_omega(n: usize) -> (ainfcyc::QAInfty, ConstantTwoForm<Rational>) {
    let a = fixtures::sphere::<Rational>(n);
    let omega = ConstantTwoForm::new(&a.basis, fixtures::sphere_pairing()).unwrap();
    (a, omega)
}

fn proj_omega(n: usize) -> (ainfcyc::QAInfty, ConstantTwoForm<Rational>) {
    let a = fixtures::proj_plane::<Rational>(n);
    let omega = ConstantTwoForm::new(&a.basis, fixtures::proj_plane_pairing()).unwrap();
    (a, omega)
}

fn novikov_matrix(rows: Vec<Vec<Rational>>) -> Vec<Vec<NovikovScalar>> {
    rows.into_iter()
        .map(|r| r.into_iter().map(NovikovScalar::from_rational).collect())
        .collect()
}

#[test]
fn criterion_01_structural_identities() {
    report(1, "structural identities at order 8", Duration::from_secs(10), || {
        for (a, omega) in [sphere_omega(8), proj_omega(8)] {
            assert!(a.ainfty_defect().unwrap().is_empty());
            assert!(a.unit_check().unwrap().is_empty());
            let rep = cyclicity_defect(&a, &omega).unwrap();
            assert!(rep.equation_defects.is_empty());
            assert!(rep.lie_defect.is_zero());
        }
        let a = fixtures::quantum_sphere(8, q(4, 1));
        assert!(gapped_validate(&a).is_gapped());
        assert!(filtered_ainfty_defect(&a).unwrap().is_empty());
        assert!(a.structure().unwrap().unit_check().unwrap().is_empty());
        let rep = filtered_cyclicity(&a, &fixtures::sphere_pairing::<Rational>()).unwrap();
        assert!(rep.is_cyclic());
    });
}

#[test]
fn criterion_02_dual_picture_equivalence() {
    report(2, "defect emptiness agrees with [Q,Q] = 0", Duration::from_secs(60), || {
        let mut r = gen::rng(170);
        let mut broken = 0;
        for trial in 0..50 {
            let dim = 2 + (trial % 2);
            let basis = gen::random_basis(&mut r, dim, false);
            let a = gen::random_structure(&mut r, &basis, 6, 3);
            let defect_empty = a.ainfty_defect().unwrap().is_empty();
            let qf = q_from_structure(&a);
            assert_eq!(defect_empty, vf_bracket(&basis, &qf, &qf).is_zero());
            if !defect_empty {
                broken += 1;
            }
        }
        assert!(broken > 5, "suite too degenerate: {broken}");
        // the valid fixtures land on the agreeing empty/zero side
        for a in [fixtures::sphere::<Rational>(6), fixtures::proj_plane::<Rational>(6)] {
            let qf = q_from_structure(&a);
            assert!(a.ainfty_defect().unwrap().is_empty());
            assert!(vf_bracket(&a.basis, &qf, &qf).is_zero());
        }
    });
}

/// Operator shifted degree of a homogeneous field (None for zero fields).
fn vf_degree(basis: &Basis, v: &FormalVectorField<Rational>) -> Option<i64> {
    for (i, c) in v.components.iter().enumerate() {
        if let Some((w, _)) = c.terms.iter().next() {
            return Some(word_degrees(basis, w).0 - Letter::x(i).symbol(basis).shifted_degree);
        }
    }
    None
}

#[test]
fn criterion_03_cartan_suite() {
    report(3, "Cartan calculus identities", Duration::from_secs(60), || {
        let bases = [
            fixtures::sphere::<Rational>(6).basis,
            fixtures::proj_plane::<Rational>(6).basis,
        ];
        let mut r = gen::rng(171);
        let mut samples = 0;
        for basis in &bases {
            for _ in 0..110 {
                let f = gen::random_form(&mut r, basis, 4, 5, 6);
                let xi = gen::random_homogeneous_vf(&mut r, basis, 3, 6);
                let eta = gen::random_homogeneous_vf(&mut r, basis, 3, 6);
                samples += 1;
                // d^2 = 0
                assert!(d_cyc(basis, &d_cyc(basis, &f).unwrap()).unwrap().is_zero());
                // L_xi = d i_xi + i_xi d
                let mut lie = lie_derivative(basis, &xi, &f).unwrap();
                lie.sub(&d_cyc(basis, &contract(basis, &xi, &f).unwrap()).unwrap());
                lie.sub(&contract(basis, &xi, &d_cyc(basis, &f).unwrap()).unwrap());
                assert!(lie.is_zero(), "Cartan magic formula fails");
                let (dx, de) = match (vf_degree(basis, &xi), vf_degree(basis, &eta)) {
                    (Some(a), Some(b)) => (a, b),
                    _ => continue,
                };
                let br = vf_bracket(basis, &xi, &eta);
                // [i_xi, i_eta] = 0
                let mut ii = contract(basis, &xi, &contract(basis, &eta, &f).unwrap()).unwrap();
                let mut t = contract(basis, &eta, &contract(basis, &xi, &f).unwrap()).unwrap();
                t.scale(&Rational::from_int(sign_pow(dx * de)));
                ii.add(&t);
                assert!(ii.is_zero(), "[i,i] != 0");
                // [L_xi, i_eta] = i_[xi,eta]
                let mut li =
                    lie_derivative(basis, &xi, &contract(basis, &eta, &f).unwrap()).unwrap();
                let mut t = contract(basis, &eta, &lie_derivative(basis, &xi, &f).unwrap()).unwrap();
                t.scale(&Rational::from_int(-sign_pow(dx * de)));
                li.add(&t);
                li.sub(&contract(basis, &br, &f).unwrap());
                assert!(li.is_zero(), "[L,i] != i[.,.]");
                // [L_xi, L_eta] = L_[xi,eta]
                let mut ll =
                    lie_derivative(basis, &xi, &lie_derivative(basis, &eta, &f).unwrap()).unwrap();
                let mut t =
                    lie_derivative(basis, &eta, &lie_derivative(basis, &xi, &f).unwrap()).unwrap();
                t.scale(&Rational::from_int(-sign_pow(dx * de)));
                ll.add(&t);
                ll.sub(&lie_derivative(basis, &br, &f).unwrap());
                assert!(ll.is_zero(), "[L,L] != L[.,.]");
            }
        }
        assert!(samples >= 200);
    });
}

#[test]
fn criterion_04_poincare_homotopy() {
    report(4, "dH + Hd = Id on constant-free forms", Duration::from_secs(30), || {
        let bases = [
            fixtures::sphere::<Rational>(6).basis,
            fixtures::proj_plane::<Rational>(6).basis,
        ];
        let mut r = gen::rng(172);
        let mut samples = 0;
        for basis in &bases {
            for _ in 0..100 {
                let f = gen::random_form(&mut r, basis, 5, 6, 6);
                samples += 1;
                let mut lhs = d_cyc(basis, &poincare_h(basis, &f).unwrap()).unwrap();
                lhs.add(&poincare_h(basis, &d_cyc(basis, &f).unwrap()).unwrap());
                lhs.sub(&f);
                assert!(lhs.is_zero(), "dH + Hd != Id on {f:?}");
            }
        }
        assert!(samples >= 200);
    });
}

#[test]
fn criterion_05_bicomplex_identities() {
    report(5, "(b, b*, B*) bicomplex identities", Duration::from_secs(60), || {
        for a in [fixtures::sphere::<Rational>(6), fixtures::proj_plane::<Rational>(6)] {
            let mut r = gen::rng(173);
            let mut samples = 0;
            for _ in 0..50 {
                let c = gen::random_chain(&mut r, &a.basis, 4);
                let f = gen::random_cochain(&mut r, &a.basis, 3, 6, 4);
                samples += 2;
                for mode in [Complex::Full, Complex::Reduced] {
                    // b^2 = 0 and b*^2 = 0
                    assert!(b_chain(&a, mode, &b_chain(&a, mode, &c)).is_zero());
                    let g = f.restrict(&a.basis, mode);
                    assert!(bstar(&a, mode, &bstar(&a, mode, &g)).is_zero());
                }
                // adjunction on the full complex
                assert_eq!(
                    pair(&bstar(&a, Complex::Full, &f), &c),
                    pair(&f, &b_chain(&a, Complex::Full, &c))
                );
                // B*^2 = 0 and b*B* + B*b* = 0 on the reduced complex
                let g = f.restrict(&a.basis, Complex::Reduced);
                let bg = connes_bstar(&a, Complex::Reduced, &g).unwrap();
                assert!(connes_bstar(&a, Complex::Reduced, &bg).unwrap().is_zero());
                let mut x = bstar(&a, Complex::Reduced, &bg);
                x.add(&connes_bstar(&a, Complex::Reduced, &bstar(&a, Complex::Reduced, &g)).unwrap());
                assert!(x.is_zero(), "b*B* + B*b* != 0");
            }
            // 50 chains + 50 cochains, each driven through >= 2 identities
            assert!(samples >= 100);
        }
    });
}

#[test]
fn criterion_06_correspondence_rows() {
    report(6, "one-form and two-form correspondences", Duration::from_secs(30), || {
        for a in [fixtures::sphere::<Rational>(6), fixtures::proj_plane::<Rational>(6)] {
            let qf = q_from_structure(&a);
            let mut r = gen::rng(174);
            for _ in 0..50 {
                let eta = gen::random_cochain(&mut r, &a.basis, 4, 6, 5);
                let alpha = oneform_from_cochain(&a.basis, &eta).unwrap();
                // alpha_{b* eta} = L_Q alpha_eta
                let mut lhs =
                    oneform_from_cochain(&a.basis, &bstar(&a, Complex::Full, &eta)).unwrap();
                lhs.sub(&lie_derivative(&a.basis, &qf, &alpha).unwrap());
                assert!(lhs.is_zero(), "one-form correspondence fails");
                // omega_{tilde(eta)} = d alpha_eta
                let mut lhs2 =
                    twoform_from_bimodmap(&a.basis, &tilde(&a.basis, &eta)).unwrap();
                lhs2.sub(&d_cyc(&a.basis, &alpha).unwrap());
                assert!(lhs2.is_zero(), "two-form correspondence fails");
            }
        }
    });
}

#[test]
fn criterion_07_tilde_theorem() {
    report(7, "tilde of cocycles is a bimodule map", Duration::from_secs(120), || {
        // solver cocycles: tilde is an exact bimodule map
        for (a, count) in [
            (fixtures::sphere::<Rational>(5), 25usize),
            (fixtures::proj_plane::<Rational>(4), 25),
        ] {
            let null = cocycle_nullspace(&a, Complex::Full, 2).unwrap();
            assert!(!null.is_empty());
            let mut r = gen::rng(175);
            let mut nontrivial = 0;
            for _ in 0..count {
                let phi = gen::random_cocycle(&mut r, &null, 3);
                assert!(validate_negative_cocycle(&a, Complex::Full, &phi).unwrap().ok);
                let td = tilde(&a.basis, phi.phi0());
                assert!(ainfcyc::hochcyc::bimodule_defect(&a, &td).is_empty());
                if !td.is_zero() {
                    nontrivial += 1;
                }
            }
            assert!(nontrivial > 0);
        }
        // tilde kills B* images (the unital alternation identity)
        for a in [fixtures::sphere::<Rational>(6), fixtures::proj_plane::<Rational>(6)] {
            let mut r = gen::rng(176);
            for _ in 0..50 {
                let g = gen::random_cochain(&mut r, &a.basis, 4, 6, 5);
                let bg = connes_bstar(&a, Complex::Full, &g).unwrap();
                assert!(tilde(&a.basis, &bg).is_zero(), "tilde(B* gamma) != 0");
            }
        }
        // skew symmetry and closedness hold for arbitrary phi_0
        for a in [fixtures::sphere::<Rational>(6), fixtures::proj_plane::<Rational>(6)] {
            let mut r = gen::rng(177);
            for _ in 0..50 {
                let f = gen::random_cochain(&mut r, &a.basis, 4, 6, 5);
                let td = tilde(&a.basis, &f);
                let rep = ship_check(&a, &td).unwrap();
                assert!(rep.skew_witnesses.is_empty(), "skew fails");
                assert!(rep.closed_witnesses.is_empty(), "closedness fails");
            }
        }
    });
}

#[test]
fn criterion_08_trace_comparison() {
    report(8, "trace comparison on all basis pairs", Duration::from_secs(30), || {
        for a in [fixtures::sphere::<Rational>(5), fixtures::proj_plane::<Rational>(4)] {
            let null = cocycle_nullspace(&a, Complex::Full, 2).unwrap();
            let mut r = gen::rng(178);
            let mut nontrivial = 0;
            for _ in 0..10 {
                let phi = gen::random_cocycle(&mut r, &null, 3);
                let failures = trace_compare(&a, &phi).unwrap();
                assert!(failures.is_empty(), "{failures:?}");
                if !tilde(&a.basis, phi.phi0()).is_zero() {
                    nontrivial += 1;
                }
            }
            assert!(nontrivial > 0);
        }
    });
}

/// Comultiplication identity for an arity-extended map: every split of
/// `f^(w)` equals `f^ (x) f^` applied to the splits of `w`.
fn comultiplicative(basis: &Basis, f: &Cohomomorphism<Rational>, max_len: usize) -> bool {
    for w in words_up_to(basis.len(), max_len) {
        let mut lhs: ainfcyc::sparse::LinComb<(TensorWord, TensorWord), Rational> =
            ainfcyc::sparse::LinComb::new();
        for (ow, c) in f.hat(&w).iter() {
            for i in 0..=ow.len() {
                lhs.add_term((ow[..i].to_vec(), ow[i..].to_vec()), c.clone());
            }
        }
        let mut rhs: ainfcyc::sparse::LinComb<(TensorWord, TensorWord), Rational> =
            ainfcyc::sparse::LinComb::new();
        for i in 0..=w.len() {
            let (l, r) = (w[..i].to_vec(), w[i..].to_vec());
            for (fl, cl) in f.hat(&l).iter() {
                for (fr, cr) in f.hat(&r).iter() {
                    rhs.add_term((fl.clone(), fr.clone()), cl.clone() * cr.clone());
                }
            }
        }
        lhs.sub(&rhs);
        if !lhs.is_zero() {
            return false;
        }
    }
    true
}

#[test]
fn criterion_09_automorphism_machinery() {
    report(9, "exponential automorphisms", Duration::from_secs(120), || {
        // harvest vector fields with [Q, v] = 0 from equivalence runs
        let mut fields: Vec<(ainfcyc::QAInfty, FormalVectorField<Rational>)> = Vec::new();
        let mut r = gen::rng(179);
        for trial in 0..60 {
            if fields.len() >= 20 {
                break;
            }
            let (a, omega) = if trial % 2 == 0 { sphere_omega(6) } else { proj_omega(6) };
            let deg = omega.pair_degree(&a.basis).unwrap().unwrap();
            let eta = gen::random_admissible_eta(&mut r, &a.basis, deg, 3, 6, 3);
            let cert = equivalence_automorphism(&a, &omega, &eta).unwrap();
            for (_, v) in cert.steps {
                fields.push((a.clone(), v));
            }
        }
        assert!(fields.len() >= 20, "only {} fields harvested", fields.len());
        for (a, v) in &fields {
            let qf = q_from_structure(a);
            assert!(vf_bracket(&a.basis, &qf, v).is_zero());
            let f = exp_coderivation(&a.basis, v).unwrap();
            assert!(comultiplicative(&a.basis, &f, 4), "e^v is not a cohomomorphism");
            assert!(f.homomorphism_defect(a, a).unwrap().is_empty());
        }
        // the two pullback routes agree on arbitrary degree-zero fields
        let mut agreed = 0;
        for trial in 0..120 {
            if agreed >= 50 {
                break;
            }
            let (a, _) = if trial % 2 == 0 { sphere_omega(6) } else { proj_omega(6) };
            let v = gen::random_degree0_vf(&mut r, &a.basis, 3, 6);
            if v.is_zero() {
                continue;
            }
            let f = exp_coderivation(&a.basis, &v).unwrap();
            let form = gen::random_form(&mut r, &a.basis, 4, 4, 6);
            assert_eq!(
                pullback_form(&a.basis, &f, &form).unwrap(),
                exp_lie(&a.basis, &v, &form).unwrap()
            );
            agreed += 1;
        }
        assert!(agreed >= 50);
    });
}

#[test]
fn criterion_10_darboux() {
    report(10, "Darboux normalization", Duration::from_secs(120), || {
        let mut r = gen::rng(180);
        let mut normalized = 0;
        let mut trial = 0;
        while normalized < 50 && trial < 400 {
            trial += 1;
            let (a, omega) = if trial % 2 == 0 { sphere_omega(6) } else { proj_omega(6) };
            let deg = omega.pair_degree(&a.basis).unwrap().unwrap();
            let eta = gen::random_admissible_eta(&mut r, &a.basis, deg, 3, 6, 3);
            let alpha = oneform_from_cochain(&a.basis, &eta).unwrap();
            let mut pert = d_cyc(&a.basis, &alpha).unwrap();
            let constant_level = pert.length_part(2);
            pert.sub(&constant_level);
            if pert.is_zero() {
                continue;
            }
            let mut w = omega.form(&a.basis, 6).unwrap();
            w.add(&pert);
            assert!(d_cyc(&a.basis, &w).unwrap().is_zero());
            let (total, constant) = darboux(&a.basis, &w).unwrap();
            assert_eq!(constant, omega);
            // recomputation: the transformation actually flattens the form
            assert_eq!(
                pullback_form(&a.basis, &total, &w).unwrap(),
                constant.form(&a.basis, 6).unwrap()
            );
            normalized += 1;
        }
        assert!(normalized >= 50, "only {normalized} normalizations in {trial} trials");
        // filtered negative energy: library obstruction leaves the input alone
        let a = fixtures::quantum_sphere(6, q(4, 1));
        let omega =
            ConstantTwoForm::new(&a.basis, novikov_matrix(fixtures::sphere_pairing())).unwrap();
        let mut pert = CyclicForm::zero(6);
        pert.add_word(
            &a.basis,
            vec![Letter::x(0), Letter::x(1), Letter::x(0), Letter::dx(1)],
            NovikovScalar::monomial(q(-1, 1), q(1, 1), Some(q(4, 1))),
        )
        .unwrap();
        let mut full = omega.form(&a.basis, 6).unwrap();
        full.add(&d_cyc(&a.basis, &pert).unwrap());
        let before = full.clone();
        assert!(matches!(
            filtered_darboux(&a.basis, &a.monoid, 8, &full),
            Err(Error::Obstruction(_))
        ));
        assert_eq!(full, before);
        // and the CLI exits 3 without writing the transformation file
        let dir = std::env::temp_dir().join("ainfcyc-acc-darboux");
        std::fs::create_dir_all(&dir).unwrap();
        let out = dir.join("never_written.json");
        let _ = std::fs::remove_file(&out);
        let status = Command::new(env!("CARGO_BIN_EXE_ainfcyc"))
            .args(["darboux", &fixture("quantum_sphere_form_obstructed.json")])
            .args(["--output", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(status.status.code(), Some(3));
        assert!(!out.exists(), "obstructed darboux wrote a transformation");
    });
}

fn fixture(name: &str) -> String {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn criterion_11_equivalence_end_to_end() {
    report(11, "equivalence certificates", Duration::from_secs(300), || {
        // unfiltered fixtures
        let mut r = gen::rng(181);
        for (a, omega) in [sphere_omega(6), proj_omega(6)] {
            let deg = omega.pair_degree(&a.basis).unwrap().unwrap();
            let mut nontrivial = 0;
            for _ in 0..10 {
                let eta = gen::random_admissible_eta(&mut r, &a.basis, deg, 3, 6, 3);
                let cert = equivalence_automorphism(&a, &omega, &eta).unwrap();
                assert!(cert.residual.is_zero());
                assert!(cert.automorphism.homomorphism_defect(&a, &a).unwrap().is_empty());
                let prime_form = omega.form(&a.basis, 6).unwrap();
                let phi_form =
                    pullback_form(&a.basis, &cert.automorphism, &prime_form).unwrap();
                let phi = bimodmap_from_twoform(&a.basis, &phi_form).unwrap();
                let phi_prime = omega.bimodule_map(6);
                assert!(diagram_check(&a.basis, &cert.automorphism, &phi, &phi_prime)
                    .unwrap()
                    .ok);
                if !cert.steps.is_empty() {
                    nontrivial += 1;
                }
            }
            assert!(nontrivial > 0);
        }
        // filtered quantum sphere: admissible eta with random energies
        let a = fixtures::quantum_sphere(6, q(4, 1));
        let s = a.structure().unwrap();
        let omega =
            ConstantTwoForm::new(&a.basis, novikov_matrix(fixtures::sphere_pairing())).unwrap();
        let plain = fixtures::sphere::<Rational>(6);
        let plain_omega: ConstantTwoForm<Rational> =
            ConstantTwoForm::new(&plain.basis, fixtures::sphere_pairing()).unwrap();
        let deg = plain_omega.pair_degree(&plain.basis).unwrap().unwrap();
        let mut nontrivial = 0;
        for _ in 0..10 {
            let base = gen::random_admissible_eta(&mut r, &a.basis, deg, 3, 6, 3);
            let mut eta = HochschildCochainSeq::zero(6);
            for ((w, o), c) in base.iter() {
                let energy = if rand::Rng::gen_bool(&mut r, 0.5) { q(0, 1) } else { q(1, 1) };
                eta.add_term(w, *o, NovikovScalar::monomial(energy, c.clone(), Some(q(4, 1))));
            }
            let cert = filtered_equivalence(&a, &omega, &eta).unwrap();
            assert!(cert.residual.is_zero());
            assert!(cert.automorphism.homomorphism_defect(&s, &s).unwrap().is_empty());
            let prime_form = omega.form(&a.basis, 6).unwrap();
            let phi_form = pullback_form(&a.basis, &cert.automorphism, &prime_form).unwrap();
            let phi = bimodmap_from_twoform(&a.basis, &phi_form).unwrap();
            let phi_prime = omega.bimodule_map(6);
            assert!(diagram_check(&a.basis, &cert.automorphism, &phi, &phi_prime).unwrap().ok);
            if !cert.steps.is_empty() {
                nontrivial += 1;
            }
        }
        assert!(nontrivial > 0);
        // negative-energy perturbations are rejected
        let mut neg = HochschildCochainSeq::zero(6);
        neg.add_term(&[1, 1], 0, NovikovScalar::monomial(q(-1, 1), q(1, 1), Some(q(4, 1))));
        assert!(matches!(
            filtered_equivalence(&a, &omega, &neg),
            Err(Error::Precondition(_))
        ));
        let status = Command::new(env!("CARGO_BIN_EXE_ainfcyc"))
            .args([
                "equivalence",
                &fixture("quantum_sphere.json"),
                &fixture("quantum_sphere_eta_negative.json"),
            ])
            .output()
            .unwrap();
        assert_eq!(status.status.code(), Some(2));
    });
}

#[test]
fn criterion_12_degeneration() {
    report(12, "trivial monoid degenerates byte-identically", Duration::from_secs(30), || {
        let bin = env!("CARGO_BIN_EXE_ainfcyc");
        let dir = std::env::temp_dir().join("ainfcyc-acc-degeneration");
        std::fs::create_dir_all(&dir).unwrap();
        let artifact = dir.join("certificate.json");
        let run = |algebra: &str, extra: &[&str]| {
            let out = Command::new(bin)
                .args(extra)
                .args(["--format", "json"])
                .arg(fixture(algebra))
                .output()
                .unwrap();
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            String::from_utf8(out.stdout).unwrap()
        };
        // check reports
        let plain = run("sphere.json", &["check"]);
        let triv = run("sphere_trivial_monoid.json", &["check"]);
        assert_eq!(plain, triv, "check reports diverge");
        // equivalence reports and certificate artifacts, same output path
        let eta = fixture("sphere_eta.json");
        let eq = |algebra: &str| {
            let out = Command::new(bin)
                .args(["equivalence", &fixture(algebra), &eta])
                .args(["--format", "json", "--output", artifact.to_str().unwrap()])
                .output()
                .unwrap();
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            (
                String::from_utf8(out.stdout).unwrap(),
                std::fs::read_to_string(&artifact).unwrap(),
            )
        };
        let (rep_plain, cert_plain) = eq("sphere.json");
        let (rep_triv, cert_triv) = eq("sphere_trivial_monoid.json");
        assert_eq!(rep_plain, rep_triv, "equivalence reports diverge");
        assert_eq!(cert_plain, cert_triv, "equivalence certificates diverge");
    });
}

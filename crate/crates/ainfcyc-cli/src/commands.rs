//! The four subcommands. Each returns a [`RunReport`] or a [`Failure`]
//! carrying the stable exit code.

use std::path::Path;

use ainfcyc::barcx::Basis;
use ainfcyc::hochcyc::{cocycle_nullspace, tilde, validate_negative_cocycle, Complex};
use ainfcyc::ncgeom::pullback_form;
use ainfcyc::novikov::{
    filtered_ainfty_defect, filtered_cyclicity, filtered_darboux, filtered_equivalence,
    gapped_validate, NovikovScalar,
};
use ainfcyc::sympeq::{
    bimodmap_from_twoform, cyclicity_defect, darboux, diagram_check, equivalence_automorphism,
    ship_check, ConstantTwoForm,
};
use ainfcyc::{Cohomomorphism, Error, NegativeCyclicCochain, Rational, Scalar};

use crate::report::RunReport;
use crate::schema::{
    self, algebra_from_file, cocycle_from_file, eta_from_file_filtered, eta_from_file_plain,
    form_from_file_filtered, form_from_file_plain, AlgebraFile, AlgebraInput, Coeff, CocycleFile,
    EtaFile, FieldTerm, FormFile, MapComponent, MapFile, OutEntry, StepEntry, StoreEntry,
    StoreFile,
};

/// Exit codes: 0 pass, 1 check failure, 2 precondition rejection,
/// 3 mathematical obstruction, 4 input error.
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: 4, message: message.into() }
    }
}

impl From<schema::SchemaError> for Failure {
    fn from(e: schema::SchemaError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Precondition(_)
            | Error::NoUnit
            | Error::ArityZeroUnfiltered
            | Error::Degenerate(_) => 2,
            Error::Obstruction(_) => 3,
            Error::Malformed(_) | Error::DegreeMismatch(_) | Error::Internal(_) => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

pub type CmdResult = Result<RunReport, Failure>;

#[derive(Clone, Debug)]
pub struct Flags {
    pub order: Option<usize>,
    pub energy_cutoff: Option<Rational>,
    pub seed: Option<u64>,
    pub force: bool,
    pub output: Option<std::path::PathBuf>,
}

impl Flags {
    fn echo(&self, report: &mut RunReport) {
        if let Some(o) = self.order {
            report.flag("order", o);
        }
        if let Some(e) = &self.energy_cutoff {
            report.flag("energy-cutoff", e);
        }
        if let Some(s) = self.seed {
            report.flag("seed", s);
        }
        if self.force {
            report.flag("force", "true");
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_artifact<T: serde::Serialize>(
    path: &Path,
    value: &T,
    report: &mut RunReport,
) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::input(format!("serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
    report.artifact = Some(path.display().to_string());
    Ok(())
}

fn word_ids(basis: &Basis, w: &[usize]) -> String {
    let ids: Vec<&str> = w.iter().map(|&i| basis.id(i)).collect();
    format!("({})", ids.join(", "))
}

fn load_algebra(path: &Path, flags: &Flags) -> Result<AlgebraInput, Failure> {
    let file: AlgebraFile = read_json(path)?;
    Ok(algebra_from_file(&file, flags.order, flags.energy_cutoff.as_ref())?)
}

/// `check`: structure relations, unit, gapped conditions and cyclicity.
pub fn cmd_check(path: &Path, flags: &Flags) -> CmdResult {
    let mut report = RunReport::new("check");
    flags.echo(&mut report);
    match load_algebra(path, flags)? {
        AlgebraInput::Plain(a, pairing) => {
            let basis = &a.basis;
            let mut witnesses = Vec::new();
            for (w, lc) in a.ainfty_defect()? {
                for (w2, c) in lc.iter() {
                    witnesses.push(format!(
                        "d^2 at {} -> {} is {c}",
                        word_ids(basis, &w),
                        word_ids(basis, w2)
                    ));
                }
            }
            report.push("structure", witnesses.is_empty(), witnesses);
            match a.unit_check() {
                Ok(w) => report.push("unit", w.is_empty(), w),
                Err(Error::NoUnit) => {
                    report.push("unit", false, vec!["no unit element flagged".into()])
                }
                Err(e) => return Err(e.into()),
            }
            if let Some(p) = pairing {
                let omega = ConstantTwoForm::new(basis, p)?;
                let rep = cyclicity_defect(&a, &omega)?;
                let mut witnesses: Vec<String> = rep
                    .equation_defects
                    .iter()
                    .map(|(w, l, r)| {
                        format!("shift equation at {}: {l} vs {r}", word_ids(basis, w))
                    })
                    .collect();
                if !rep.lie_defect.is_zero() {
                    witnesses.push(format!(
                        "L_Q omega has {} nonzero words",
                        rep.lie_defect.terms().iter().count()
                    ));
                }
                report.push("cyclicity", rep.is_cyclic(), witnesses);
            }
        }
        AlgebraInput::Filtered(a, pairing) => {
            let basis = a.basis.clone();
            let gapped = gapped_validate(&a);
            let trivial = a.monoid.energy_levels() == vec![Rational::from_int(0)];
            if !trivial || !gapped.is_gapped() {
                let mut witnesses = gapped.monoid_violations.clone();
                witnesses.extend(gapped.tag_violations.clone());
                report.push("gapped", gapped.is_gapped(), witnesses);
            }
            let witnesses: Vec<String> = filtered_ainfty_defect(&a)?
                .into_iter()
                .map(|(w, w2, e, c)| {
                    format!(
                        "d^2 at {} -> {} is {c} at T^({e})",
                        word_ids(&basis, &w),
                        word_ids(&basis, &w2)
                    )
                })
                .collect();
            report.push("structure", witnesses.is_empty(), witnesses);
            match a.structure()?.unit_check() {
                Ok(w) => report.push("unit", w.is_empty(), w),
                Err(Error::NoUnit) => {
                    report.push("unit", false, vec!["no unit element flagged".into()])
                }
                Err(e) => return Err(e.into()),
            }
            if let Some(p) = pairing {
                let rep = filtered_cyclicity(&a, &p)?;
                let witnesses: Vec<String> = rep
                    .defects
                    .iter()
                    .map(|(w, beta, l, r)| {
                        format!(
                            "shift equation at {} tagged ({}, {}): {l} vs {r}",
                            word_ids(&basis, w),
                            beta.0,
                            beta.1
                        )
                    })
                    .collect();
                report.push("cyclicity", rep.is_cyclic(), witnesses);
            }
        }
    }
    report.finalize();
    Ok(report)
}

/// `tilde`: validate the cocycle, build the bimodule map, check the
/// strong homotopy inner product conditions and emit the store.
pub fn cmd_tilde(algebra: &Path, cocycle: Option<&Path>, flags: &Flags) -> CmdResult {
    let mut report = RunReport::new("tilde");
    flags.echo(&mut report);
    let a = match load_algebra(algebra, flags)? {
        AlgebraInput::Plain(a, _) => a,
        AlgebraInput::Filtered(..) => {
            return Err(Failure {
                code: 2,
                message: "tilde requires an unfiltered algebra".into(),
            })
        }
    };
    let basis = a.basis.clone();
    let phi = match cocycle {
        Some(path) => {
            let file: CocycleFile = read_json(path)?;
            cocycle_from_file(&file, &basis, a.truncation_order)?
        }
        None => {
            let seed = flags.seed.ok_or_else(|| {
                Failure::input("tilde needs a cocycle file or --seed to generate one")
            })?;
            let null = cocycle_nullspace(&a, Complex::Reduced, 2)?;
            if null.is_empty() {
                return Err(Failure {
                    code: 2,
                    message: "the truncated cocycle space is zero; nothing to generate".into(),
                });
            }
            let mut rng = ainfcyc::gen::rng(seed);
            ainfcyc::gen::random_cocycle(&mut rng, &null, 3)
        }
    };
    // the reduced complex is the default home of negative cyclic cocycles;
    // the cochain is restricted before checking, the tilde uses it as given
    let restricted = NegativeCyclicCochain {
        columns: phi.columns.iter().map(|c| c.restrict(&basis, Complex::Reduced)).collect(),
    };
    let cocycle_report = validate_negative_cocycle(&a, Complex::Reduced, &restricted)?;
    if !cocycle_report.ok && !flags.force {
        return Err(Failure {
            code: 2,
            message: format!(
                "cocycle does not validate ({} witnesses); rerun with --force to emit the defect",
                cocycle_report.witnesses.len()
            ),
        });
    }
    report.push("cocycle", cocycle_report.ok, cocycle_report.witnesses);
    let psi = tilde(&basis, phi.phi0());
    let ship = ship_check(&a, &psi)?;
    report.push("skew", ship.skew_witnesses.is_empty(), ship.skew_witnesses.clone());
    report.push("closed", ship.closed_witnesses.is_empty(), ship.closed_witnesses.clone());
    report.push("nondegenerate", ship.nondegenerate, Vec::new());
    let gram = psi.gram_matrix(&basis);
    let gram_lines: Vec<String> = gram
        .iter()
        .map(|row| {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    report.push("gram", true, gram_lines);
    if let Some(out) = &flags.output {
        let entries: Vec<StoreEntry> = psi
            .iter()
            .map(|(k, c)| StoreEntry {
                left: k.left.iter().map(|&i| basis.id(i).to_string()).collect(),
                center: basis.id(k.center).to_string(),
                right: k.right.iter().map(|&i| basis.id(i).to_string()).collect(),
                out: basis.id(k.out).to_string(),
                c: Coeff::from_rational(c),
            })
            .collect();
        let store = StoreFile { schema: schema::SCHEMA, entries };
        write_artifact(out, &store, &mut report)?;
    }
    report.finalize();
    Ok(report)
}

fn cohom_components<S: Scalar>(
    basis: &Basis,
    f: &Cohomomorphism<S>,
    coeff: impl Fn(&S) -> Coeff,
) -> Vec<MapComponent> {
    f.components()
        .iter()
        .map(|(w, lc)| MapComponent {
            inputs: w.iter().map(|&i| basis.id(i).to_string()).collect(),
            outputs: lc
                .iter()
                .map(|(o, c)| OutEntry { id: basis.id(*o).to_string(), c: coeff(c) })
                .collect(),
        })
        .collect()
}

fn step_entries<S: Scalar>(
    basis: &Basis,
    steps: &[(usize, ainfcyc::FormalVectorField<S>)],
    coeff: impl Fn(&S) -> Coeff,
) -> Vec<StepEntry> {
    steps
        .iter()
        .map(|(level, v)| StepEntry {
            level: *level,
            field: v
                .components
                .iter()
                .enumerate()
                .flat_map(|(i, comp)| {
                    comp.terms
                        .iter()
                        .map(|(w, c)| FieldTerm {
                            component: basis.id(i).to_string(),
                            word: w.iter().map(|l| schema::letter_to_string(basis, l)).collect(),
                            c: coeff(c),
                        })
                        .collect::<Vec<_>>()
                })
                .collect(),
        })
        .collect()
}

/// `equivalence`: run the order-by-order automorphism construction and
/// report residual, homomorphism and diagram verdicts.
pub fn cmd_equivalence(algebra: &Path, eta_path: &Path, flags: &Flags) -> CmdResult {
    let mut report = RunReport::new("equivalence");
    flags.echo(&mut report);
    let eta_file: EtaFile = read_json(eta_path)?;
    let input = load_algebra(algebra, flags)?;
    let pairing = input
        .pairing()
        .ok_or_else(|| Failure::input("equivalence needs a pairing in the algebra file"))?
        .clone();
    match input {
        AlgebraInput::Plain(a, _) => {
            let basis = a.basis.clone();
            let n = a.truncation_order;
            let omega = ConstantTwoForm::new(&basis, pairing)?;
            let eta = eta_from_file_plain(&eta_file, &basis, n)?;
            let cert = equivalence_automorphism(&a, &omega, &eta)?;
            report.push("residual", cert.residual.is_zero(), Vec::new());
            let defect = cert.automorphism.homomorphism_defect(&a, &a)?;
            report.push("homomorphism", defect.is_empty(), Vec::new());
            let prime_form = omega.form(&basis, n)?;
            let phi_form = pullback_form(&basis, &cert.automorphism, &prime_form)?;
            let phi = bimodmap_from_twoform(&basis, &phi_form)?;
            let phi_prime = omega.bimodule_map(n);
            let diag = diagram_check(&basis, &cert.automorphism, &phi, &phi_prime)?;
            report.push(
                "diagram",
                diag.ok,
                diag.witness_lengths.iter().map(|l| format!("word length {l}")).collect(),
            );
            report.push("steps", true, vec![format!("{} levels", cert.steps.len())]);
            if let Some(out) = &flags.output {
                let file = MapFile {
                    schema: schema::SCHEMA,
                    components: cohom_components(&basis, &cert.automorphism, |c| {
                        Coeff::from_rational(c)
                    }),
                    constant: None,
                    steps: step_entries(&basis, &cert.steps, Coeff::from_rational),
                };
                write_artifact(out, &file, &mut report)?;
            }
        }
        AlgebraInput::Filtered(a, _) => {
            let basis = a.basis.clone();
            let n = a.order_bound;
            let matrix: Vec<Vec<NovikovScalar>> = pairing
                .iter()
                .map(|r| r.iter().map(|c| NovikovScalar::from_rational(c.clone())).collect())
                .collect();
            let omega = ConstantTwoForm::new(&basis, matrix)?;
            let eta = eta_from_file_filtered(&eta_file, &basis, n, &a.monoid.cutoff)?;
            let cert = filtered_equivalence(&a, &omega, &eta)?;
            report.push("residual", cert.residual.is_zero(), Vec::new());
            let s = a.structure()?;
            let defect = cert.automorphism.homomorphism_defect(&s, &s)?;
            report.push("homomorphism", defect.is_empty(), Vec::new());
            let prime_form = omega.form(&basis, n)?;
            let phi_form = pullback_form(&basis, &cert.automorphism, &prime_form)?;
            let phi = bimodmap_from_twoform(&basis, &phi_form)?;
            let phi_prime = omega.bimodule_map(n);
            let diag = diagram_check(&basis, &cert.automorphism, &phi, &phi_prime)?;
            report.push(
                "diagram",
                diag.ok,
                diag.witness_lengths.iter().map(|l| format!("word length {l}")).collect(),
            );
            report.push("steps", true, vec![format!("{} levels", cert.steps.len())]);
            if let Some(out) = &flags.output {
                let file = MapFile {
                    schema: schema::SCHEMA,
                    components: cohom_components(&basis, &cert.automorphism, |c| {
                        Coeff::from_novikov(c)
                    }),
                    constant: None,
                    steps: step_entries(&basis, &cert.steps, Coeff::from_novikov),
                };
                write_artifact(out, &file, &mut report)?;
            }
        }
    }
    report.finalize();
    Ok(report)
}

/// `darboux`: normalize a closed nondegenerate form to its constant part;
/// negative-energy obstructions exit 3 without transforming anything.
pub fn cmd_darboux(form_path: &Path, flags: &Flags) -> CmdResult {
    let mut report = RunReport::new("darboux");
    flags.echo(&mut report);
    let file: FormFile = read_json(form_path)?;
    schema::check_schema(file.schema)?;
    let basis = schema::basis_from_entries(&file.basis)?;
    let order = flags.order.unwrap_or(file.truncation.order);
    if let Some(m) = &file.monoid {
        let cutoff = match (&flags.energy_cutoff, &file.truncation.energy) {
            (Some(c), _) => c.clone(),
            (None, Some(s)) => schema::parse_rational(s)?,
            (None, None) => {
                return Err(Failure::input(
                    "filtered form needs an energy cutoff (truncation.energy or --energy-cutoff)",
                ))
            }
        };
        let generators = m
            .generators
            .iter()
            .map(schema::parse_beta)
            .collect::<Result<Vec<_>, _>>()?;
        let monoid = ainfcyc::GappedMonoid::new(generators, cutoff.clone());
        let form = form_from_file_filtered(&file, &basis, &cutoff)?;
        let (f, constant) = filtered_darboux(&basis, &monoid, order, &form)?;
        report.push("normalized", true, Vec::new());
        if let Some(out) = &flags.output {
            let artifact = MapFile {
                schema: schema::SCHEMA,
                components: cohom_components(&basis, &f, Coeff::from_novikov),
                constant: Some(
                    constant
                        .matrix
                        .iter()
                        .map(|r| r.iter().map(Coeff::from_novikov).collect())
                        .collect(),
                ),
                steps: Vec::new(),
            };
            write_artifact(out, &artifact, &mut report)?;
        }
    } else {
        let mut form = form_from_file_plain(&file, &basis)?;
        form.truncation_order = order.max(file.truncation.order);
        let (f, constant) = darboux(&basis, &form)?;
        report.push("normalized", true, Vec::new());
        if let Some(out) = &flags.output {
            let artifact = MapFile {
                schema: schema::SCHEMA,
                components: cohom_components(&basis, &f, Coeff::from_rational),
                constant: Some(
                    constant
                        .matrix
                        .iter()
                        .map(|r| r.iter().map(Coeff::from_rational).collect())
                        .collect(),
                ),
                steps: Vec::new(),
            };
            write_artifact(out, &artifact, &mut report)?;
        }
    }
    report.finalize();
    Ok(report)
}

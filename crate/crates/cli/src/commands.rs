use serde::Serialize;
use viproplab_core::exact::{int, RationalRepr};
use viproplab_core::gen::hat_threshold;
use viproplab_core::proplab::{self, MIN_KMAX};
use viproplab_core::pwcalc::pow_norm;
use viproplab_core::{
    sawtooth, scaled_hat, visolve, Certificate, ExactReal, Point, Rational, SequenceSpec, Verdict,
};

use crate::{
    problem, to_json, CliError, CliResult, Format, Outcome, ReproduceArgs, L2UnitArgs,
    SequenceArgs, SolveArgs, Status, WeakEvidenceArgs,
};

/// Closed form of `‖∇u_k‖³`.
pub const NORM_CUBED: i64 = 45;

#[derive(Debug, Clone, Serialize)]
pub struct ReproduceRow {
    pub k: u64,
    pub norm_cubed: ExactReal,
    pub psi: ExactReal,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReproduceReport {
    pub alpha: RationalRepr,
    pub k_max: u64,
    pub expected_norm_cubed: RationalRepr,
    pub expected_psi: RationalRepr,
    pub rows: Vec<ReproduceRow>,
    /// Indices whose row differs from the closed forms.
    pub mismatches: Vec<u64>,
}

/// `‖∇u_k‖³` and `Ψ(u_k, v_α)` for `k = 1..=k_max`, compared exactly with
/// `expected_norm` and `expected_norm − 3α`.
pub fn reproduce(k_max: u64, alpha: &Rational, expected_norm: &Rational) -> CliResult<ReproduceReport> {
    if k_max == 0 {
        return Err(CliError::Usage("--kmax must be at least 1".into()));
    }
    let v = scaled_hat(alpha)?;
    let expected_psi = expected_norm - int(3) * alpha;
    let mut rows = Vec::with_capacity(k_max as usize);
    let mut mismatches = Vec::new();
    for k in 1..=k_max {
        let u = sawtooth(k)?;
        let norm_cubed = pow_norm(&u.derivative(), 3);
        let psi = proplab::equilibrium_gap(&u, &v);
        if norm_cubed.as_exact() != Some(expected_norm) || psi.as_exact() != Some(&expected_psi) {
            mismatches.push(k);
        }
        rows.push(ReproduceRow { k, norm_cubed, psi });
    }
    Ok(ReproduceReport {
        alpha: RationalRepr(alpha.clone()),
        k_max,
        expected_norm_cubed: RationalRepr(expected_norm.clone()),
        expected_psi: RationalRepr(expected_psi),
        rows,
        mismatches,
    })
}

pub fn cmd_reproduce(args: &ReproduceArgs) -> CliResult<Outcome> {
    let expected = args.expect_norm.clone().unwrap_or_else(|| int(NORM_CUBED));
    let report = reproduce(args.common.kmax, &args.common.alpha, &expected)?;
    let stdout = match args.format {
        Format::Json => to_json(&report, "reproduce report")?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["k", "norm_cubed", "psi"])?;
            for row in &report.rows {
                w.write_record([row.k.to_string(), row.norm_cubed.to_string(), row.psi.to_string()])?;
            }
            csv_text(w)?
        }
    };
    let notes = report
        .mismatches
        .iter()
        .map(|k| format!("mismatch at k = {k}"))
        .collect();
    let status = if report.mismatches.is_empty() {
        Status::Success
    } else {
        Status::Mismatch
    };
    Ok(Outcome { status, stdout, notes })
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyReport {
    pub sequence: String,
    pub k_max: u64,
    pub alpha: RationalRepr,
    /// The scale above which a violation is expected.
    pub threshold: RationalRepr,
    /// Ky–Fan violation certificate, then the premise audit.
    pub certificates: [Certificate; 2],
}

/// Both certificates for an arbitrary sequence, limit and direction `y`.
pub fn certify_sequence(
    seq: &SequenceSpec,
    limit: &Point,
    y: &Point,
    k_max: u64,
) -> CliResult<[Certificate; 2]> {
    Ok([
        proplab::ky_fan_violation_certificate(seq, limit, y, k_max)?,
        proplab::pseudomonotone_premise_audit(seq, limit, k_max)?,
    ])
}

/// Inconclusive if either verdict is; success when the violation verdict
/// matches `expect_violation` and the premise audit is established.
pub fn certify_status(certs: &[Certificate; 2], expect_violation: bool) -> Status {
    let [ky_fan, premise] = certs;
    if certs.iter().any(|c| c.verdict == Verdict::Inconclusive) {
        Status::Inconclusive
    } else if ky_fan.is_established() == expect_violation && premise.is_established() {
        Status::Success
    } else {
        Status::Mismatch
    }
}

pub fn certify(k_max: u64, alpha: &Rational) -> CliResult<CertifyReport> {
    let seq = SequenceSpec::Sawtooth;
    let limit = seq.known_weak_limit().expect("sawtooth has a known weak limit");
    let y = Point::Function(scaled_hat(alpha)?);
    Ok(CertifyReport {
        sequence: seq.to_string(),
        k_max,
        alpha: RationalRepr(alpha.clone()),
        threshold: RationalRepr(hat_threshold()),
        certificates: certify_sequence(&seq, &limit, &y, k_max)?,
    })
}

fn short_window(k_max: u64) -> Option<Outcome> {
    (k_max < MIN_KMAX).then(|| Outcome {
        status: Status::Inconclusive,
        stdout: String::new(),
        notes: vec![format!(
            "k_max = {k_max} is too short for limit detection (need at least {MIN_KMAX})"
        )],
    })
}

pub fn cmd_certify(args: &SequenceArgs) -> CliResult<Outcome> {
    scaled_hat(&args.alpha)?;
    if let Some(outcome) = short_window(args.kmax) {
        return Ok(outcome);
    }
    let report = certify(args.kmax, &args.alpha)?;
    let status = certify_status(&report.certificates, args.alpha > hat_threshold());
    let notes = report
        .certificates
        .iter()
        .filter_map(|c| c.witness.note.clone())
        .collect();
    Ok(Outcome {
        status,
        stdout: to_json(&report, "certificates")?,
        notes,
    })
}

pub fn cmd_weak_evidence(args: &WeakEvidenceArgs) -> CliResult<Outcome> {
    let seq = SequenceSpec::from_name(&args.sequence, &args.common.alpha)?;
    if let Some(outcome) = short_window(args.common.kmax) {
        return Ok(outcome);
    }
    let report =
        proplab::weak_convergence_evidence(&seq, &proplab::default_test_family(), args.common.kmax)?;
    let stdout = match args.format {
        Format::Json => to_json(&report, "weak-convergence evidence")?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["test", "bound_constant", "head_constant", "all_zero", "consistent"])?;
            for t in &report.tests {
                w.write_record([
                    t.test.clone(),
                    t.bound_constant.to_string(),
                    t.head_constant.to_string(),
                    t.all_zero.to_string(),
                    t.consistent.to_string(),
                ])?;
            }
            csv_text(w)?
        }
    };
    Ok(Outcome {
        status: if report.consistent {
            Status::Success
        } else {
            Status::Inconclusive
        },
        stdout,
        notes: vec![report.verdict.clone()],
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct L2UnitRow {
    pub k: u64,
    pub value: ExactReal,
}

#[derive(Debug, Clone, Serialize)]
pub struct L2UnitOutput {
    pub k_max: u64,
    pub rows: Vec<L2UnitRow>,
    pub limit: Option<ExactReal>,
    pub conclusion: String,
    pub certificate: Certificate,
}

pub fn l2_unit(k_max: u64) -> CliResult<L2UnitOutput> {
    let r = proplab::l2_unit_check(k_max)?;
    let conclusion = r
        .certificate
        .witness
        .note
        .clone()
        .unwrap_or_else(|| "no limit detected".into());
    Ok(L2UnitOutput {
        k_max,
        rows: r
            .report
            .indices
            .iter()
            .zip(&r.report.values)
            .map(|(k, v)| L2UnitRow {
                k: *k,
                value: v.clone(),
            })
            .collect(),
        limit: r.report.limit_candidate.clone(),
        conclusion,
        certificate: r.certificate,
    })
}

pub fn cmd_l2_unit(args: &L2UnitArgs) -> CliResult<Outcome> {
    if let Some(outcome) = short_window(args.kmax) {
        return Ok(outcome);
    }
    let out = l2_unit(args.kmax)?;
    let stdout = match args.format {
        Format::Json => to_json(&out, "ℓ² report")?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["k", "value"])?;
            for row in &out.rows {
                w.write_record([row.k.to_string(), row.value.to_string()])?;
            }
            csv_text(w)?
        }
    };
    let status = match out.certificate.verdict {
        Verdict::Established => Status::Success,
        Verdict::Refuted => Status::Mismatch,
        Verdict::Inconclusive => Status::Inconclusive,
    };
    Ok(Outcome {
        status,
        stdout,
        notes: vec![out.conclusion.clone()],
    })
}

pub fn cmd_solve(args: &SolveArgs) -> CliResult<Outcome> {
    let vi = problem::load(&args.problem)?;
    let result = visolve::solve(&vi)?;
    let status = if result.converged {
        Status::Success
    } else {
        Status::NotConverged
    };
    let notes = vec![format!(
        "residual {:e} after {} iterations",
        result.residual, result.iterations
    )];
    Ok(Outcome {
        status,
        stdout: to_json(&result, "solve result")?,
        notes,
    })
}

fn csv_text(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Usage(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv fields are UTF-8"))
}

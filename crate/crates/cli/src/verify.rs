use aak_core::identity::{self, ConstructionKind, IdentityApproxCertificate, Partition};
use aak_core::{residual_sq, sivm_factorization, DataMatrix, SolverConfig, StochasticMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::VerifyArgs;
use crate::error::{emit, CliError};

/// Largest q used in the end-to-end SiVM runs on identity data.
const END_TO_END_QMAX: usize = 20;
const END_TO_END_TOL: f64 = 1e-6;
const LOWER_BOUND_SLACK: f64 = 1e-8;
const TRANSPORT_SLACK: f64 = 1e-8;
/// Ambient dimension of the random point sets in the transport check.
const TRANSPORT_DIM: usize = 3;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub cases: usize,
    pub failures: usize,
    /// Largest violation (or error, for equality checks) seen.
    pub worst: f64,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub qmax: usize,
    pub trials: usize,
    pub checks: Vec<Check>,
    pub certificates: Vec<IdentityApproxCertificate>,
}

struct Tally {
    name: &'static str,
    cases: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self { name, cases: 0, failures: 0, worst: 0.0 }
    }

    /// Records one case; `excess` > 0 means the case failed by that much.
    fn record(&mut self, ok: bool, measure: f64) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
        }
        if measure.is_nan() || measure > self.worst {
            self.worst = measure;
        }
    }

    fn finish(self) -> Check {
        Check { name: self.name, pass: self.failures == 0 && self.cases > 0, cases: self.cases, failures: self.failures, worst: self.worst }
    }
}

/// Vertex-indicator `B` over the first point of each part: a deliberately
/// wrong factor for the partition closed form.
fn broken_partition_factors(q: usize, p: &Partition) -> Result<(StochasticMatrix, StochasticMatrix), CliError> {
    let (_, a) = identity::partition_identity_factors(q, p)?;
    let firsts: Vec<usize> = p.parts().iter().scan(0, |start, &len| {
        let first = *start;
        *start += len;
        Some(first)
    }).collect();
    Ok((StochasticMatrix::indicator(q, &firsts)?, a))
}

fn identity_certificates(qmax: usize, break_one: bool) -> Result<(Check, Vec<IdentityApproxCertificate>), CliError> {
    let mut tally = Tally::new("identity_certificates");
    let mut certs = Vec::new();
    let mut broken = !break_one;
    for q in 2..=qmax {
        for k in 1..q {
            let mut kinds = vec![ConstructionKind::SivmVertices, ConstructionKind::Partition];
            if k == 1 {
                kinds.push(ConstructionKind::CentroidRank1);
            }
            for kind in kinds {
                let cert = if !broken && kind == ConstructionKind::Partition {
                    broken = true;
                    let p = Partition::balanced(q, k)?;
                    let (b, a) = broken_partition_factors(q, &p)?;
                    identity::certify_factors(q, k, kind, Some(p), &b, &a)?
                } else {
                    identity::certify(q, k, kind, None)?
                };
                tally.record(cert.pass, cert.abs_gap);
                certs.push(cert);
            }
        }
    }
    Ok((tally.finish(), certs))
}

fn sampling_checks(qmax: usize, trials: usize, seed: u64) -> Result<Vec<Check>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bounds = Tally::new("positivity_and_worst_case");
    let mut lower = Tally::new("rank_lower_bound");
    let mut transport = Tally::new("product_transport");
    for _ in 0..trials {
        let q = rng.random_range(2..=qmax);
        let k = rng.random_range(1..q);
        let (b, a) = identity::sample_stochastic_pair(q, k, &mut rng)?;
        let gap = identity::frobenius_gap(&b, &a)?;
        let worst = identity::worst_case_bound(q);
        bounds.record(gap > 0.0 && gap <= worst, (gap - worst).max(0.0));
        let floor = (q - k) as f64 - LOWER_BOUND_SLACK;
        lower.record(gap >= floor, (floor - gap).max(0.0));

        let v: Vec<Vec<f64>> = (0..q).map(|_| (0..TRANSPORT_DIM).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let v = DataMatrix::from_columns(&v)?;
        let lhs = residual_sq(&v, &b, &a)?;
        let rhs = v.frobenius_sq() * gap;
        transport.record(lhs <= rhs + TRANSPORT_SLACK * (1.0 + rhs), (lhs - rhs).max(0.0));
    }
    Ok(vec![bounds.finish(), lower.finish(), transport.finish()])
}

fn sivm_end_to_end(qmax: usize, seed: u64) -> Result<Check, CliError> {
    let mut tally = Tally::new("sivm_identity_end_to_end");
    let inner = SolverConfig::default();
    for q in 2..=qmax.min(END_TO_END_QMAX) {
        let x = DataMatrix::identity(q);
        for k in 1..q {
            let f = sivm_factorization(&x, k, &inner, seed)?;
            let err = (f.rss - identity::sivm_error(q, k)?).abs();
            tally.record(err <= END_TO_END_TOL, err);
        }
    }
    Ok(tally.finish())
}

fn relative_accuracy_curve(qmax: usize) -> Result<Check, CliError> {
    let mut tally = Tally::new("relative_accuracy_curve");
    for k in 1..=crate::bounds::CURVE_KMAX {
        let r = identity::relative_accuracy(k)?;
        let exact = k as f64 / (k as f64 + 1.0);
        tally.record(r == exact, (r - exact).abs());
        for q in k + 1..=qmax.max(k + 1) {
            let ratio = identity::partition_error(q, k)? / identity::sivm_error(q, k)?;
            let err = (ratio - r).abs();
            tally.record(err <= 1e-12, err);
        }
    }
    let r10 = identity::relative_accuracy(10)?;
    tally.record(r10 > 0.9, (0.9 - r10).max(0.0));
    Ok(tally.finish())
}

pub fn build(args: &VerifyArgs) -> Result<VerifyReport, CliError> {
    if args.qmax < 2 {
        return Err(CliError::Validation(format!("--qmax must be at least 2, got {}", args.qmax)));
    }
    if args.trials == 0 {
        return Err(CliError::Validation("--trials must be at least 1".into()));
    }
    let (ident, certificates) = identity_certificates(args.qmax, args.self_test_break)?;
    let mut checks = vec![ident];
    checks.extend(sampling_checks(args.qmax, args.trials, args.seed)?);
    checks.push(sivm_end_to_end(args.qmax, args.seed)?);
    checks.push(relative_accuracy_curve(args.qmax)?);
    Ok(VerifyReport { seed: args.seed, qmax: args.qmax, trials: args.trials, checks, certificates })
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    let report = build(args)?;
    let mut text = String::new();
    for c in &report.checks {
        text.push_str(&format!(
            "{} {:<26} cases={:<6} failures={:<4} worst={:.3e}\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.cases,
            c.failures,
            c.worst
        ));
    }
    if let Some(path) = &args.report {
        let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    if failed == 0 {
        text.push_str(&format!("all {} checks passed\n", report.checks.len()));
        emit(&text)
    } else {
        emit(&text)?;
        Err(CliError::CertificateFailure(format!("{failed} of {} checks failed", report.checks.len())))
    }
}

use aak_core::identity::{self, ConstructionKind, IdentityApproxCertificate, Partition};
use serde::Serialize;

use crate::args::{BoundsArgs, Format};
use crate::error::{emit, CliError};

/// Largest k in the relative-accuracy curve.
pub const CURVE_KMAX: usize = 50;

#[derive(Debug, Serialize)]
pub struct CurvePoint {
    pub k: usize,
    pub relative_accuracy: f64,
}

#[derive(Debug, Serialize)]
pub struct BoundsReport {
    pub q: usize,
    pub k: usize,
    pub worst: f64,
    pub sivm: f64,
    pub partition: f64,
    pub ratio: f64,
    pub centroid: Option<f64>,
    pub curve: Vec<CurvePoint>,
    pub certificates: Vec<IdentityApproxCertificate>,
}

pub fn curve() -> Result<Vec<CurvePoint>, CliError> {
    (1..=CURVE_KMAX)
        .map(|k| Ok(CurvePoint { k, relative_accuracy: identity::relative_accuracy(k)? }))
        .collect()
}

fn build(args: &BoundsArgs) -> Result<BoundsReport, CliError> {
    let (q, k) = (args.q, args.k);
    if k == 0 {
        return Err(CliError::Validation("--k must be at least 1".into()));
    }
    if k > q {
        return Err(CliError::Validation(format!("--k = {k} exceeds --q = {q}")));
    }
    let partition = match &args.partition {
        Some(parts) => {
            let p = Partition::new(parts.clone(), q)?;
            if p.k() != k {
                return Err(CliError::Validation(format!("--partition has {} parts, expected k = {k}", p.k())));
            }
            Some(p)
        }
        None => None,
    };

    let mut certificates = vec![
        identity::certify(q, k, ConstructionKind::SivmVertices, None)?,
        identity::certify(q, k, ConstructionKind::Partition, partition)?,
    ];
    let centroid = if k == 1 {
        certificates.push(identity::certify(q, k, ConstructionKind::CentroidRank1, None)?);
        Some(identity::centroid_error(q)?)
    } else {
        None
    };
    Ok(BoundsReport {
        q,
        k,
        worst: identity::worst_case_bound(q),
        sivm: identity::sivm_error(q, k)?,
        partition: identity::partition_error(q, k)?,
        ratio: identity::relative_accuracy(k)?,
        centroid,
        curve: curve()?,
        certificates,
    })
}

fn kind_name(kind: ConstructionKind) -> &'static str {
    match kind {
        ConstructionKind::SivmVertices => "sivm_vertices",
        ConstructionKind::CentroidRank1 => "centroid_rank1",
        ConstructionKind::Partition => "partition",
    }
}

fn table(r: &BoundsReport) -> String {
    let mut out = String::new();
    let mut row = |label: &str, value: String| out.push_str(&format!("{label:<18} {value}\n"));
    row("q", r.q.to_string());
    row("k", r.k.to_string());
    row("worst", format!("{}", r.worst));
    row("sivm", format!("{}", r.sivm));
    row("partition", format!("{}", r.partition));
    row("ratio", format!("{}", r.ratio));
    row("centroid", r.centroid.map_or_else(|| "-".to_string(), |c| format!("{c}")));
    out.push('\n');
    out.push_str(&format!("{:<16} {:>20} {:>20} {:>12} {}\n", "certificate", "predicted", "measured", "abs_gap", "result"));
    for c in &r.certificates {
        out.push_str(&format!(
            "{:<16} {:>20.12} {:>20.12} {:>12.3e} {}\n",
            kind_name(c.kind),
            c.predicted_error,
            c.measured_error,
            c.abs_gap,
            if c.pass { "PASS" } else { "FAIL" }
        ));
    }
    out.push('\n');
    out.push_str(&format!("{:>4} {:>20}\n", "k", "relative_accuracy"));
    for p in &r.curve {
        out.push_str(&format!("{:>4} {:>20.15}\n", p.k, p.relative_accuracy));
    }
    out
}

pub fn run(args: &BoundsArgs) -> Result<(), CliError> {
    let report = build(args)?;
    match args.format {
        Format::Json => {
            let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
            emit(&format!("{text}\n"))?;
        }
        Format::Table => emit(&table(&report))?,
    }
    if report.certificates.iter().all(|c| c.pass) {
        Ok(())
    } else {
        Err(CliError::CertificateFailure("closed-form certificate failed".into()))
    }
}

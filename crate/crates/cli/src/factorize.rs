use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use aak_core::io::{read_matrix_csv, write_matrix_csv, write_report, Orientation, RunReport};
use aak_core::{fit_aa, sivm, AAConfig, DataMatrix, Factorization, Init};

use crate::args::{FactorizeArgs, InitArg, SivmArgs};
use crate::error::{emit, CliError};

/// `<prefix><suffix>`, keeping any directory part of the prefix.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn validate_k(k: usize, n: usize) -> Result<(), CliError> {
    if k == 0 || k > n {
        return Err(CliError::Validation(format!("--k must satisfy 1 <= k <= n = {n}, got {k}")));
    }
    Ok(())
}

fn write_outputs(prefix: &Path, f: &Factorization, report: &RunReport) -> Result<(), CliError> {
    write_matrix_csv(&f.b, with_suffix(prefix, ".B.csv"), Orientation::RawColumnsAsColumns)?;
    write_matrix_csv(&f.a, with_suffix(prefix, ".A.csv"), Orientation::RawColumnsAsColumns)?;
    write_matrix_csv(&f.z, with_suffix(prefix, ".Z.csv"), Orientation::PointsAsRows)?;
    write_report(report, with_suffix(prefix, ".report.json"))?;
    emit(&format!("rss = {:.12e}\niterations = {}\nconverged = {}\n", f.rss, f.iterations, f.converged))
}

fn load(input: &Path) -> Result<DataMatrix, CliError> {
    if !input.exists() {
        return Err(CliError::Runtime(format!("input file {} does not exist", input.display())));
    }
    Ok(read_matrix_csv(input)?)
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn factorize(args: &FactorizeArgs) -> Result<(), CliError> {
    let t0 = Instant::now();
    let x = load(&args.input)?;
    let read_ms = ms(t0);
    validate_k(args.k, x.ncols())?;
    if args.max_iters == 0 {
        return Err(CliError::Validation("--max-iters must be at least 1".into()));
    }
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(CliError::Validation(format!("--tol must be a positive number, got {}", args.tol)));
    }
    let mut cfg = AAConfig::new(args.k);
    cfg.seed = args.seed;
    cfg.max_outer_iters = args.max_iters;
    cfg.outer_tol = args.tol;
    cfg.init = match args.init {
        InitArg::Sivm => Init::SivmSeeded,
        InitArg::Random => Init::RandomColumns,
        InitArg::Uniform => Init::UniformB,
    };

    let t1 = Instant::now();
    let f = fit_aa(&x, &cfg)?;
    let fit_ms = ms(t1);
    let mut report = RunReport::from_factorization("factorize", cfg, x.nrows(), &f);
    if args.timings {
        report.timings_ms.insert("read".into(), read_ms);
        report.timings_ms.insert("fit".into(), fit_ms);
    }
    write_outputs(&args.out_prefix, &f, &report)
}

pub fn sivm(args: &SivmArgs) -> Result<(), CliError> {
    let t0 = Instant::now();
    let x = load(&args.input)?;
    let read_ms = ms(t0);
    validate_k(args.k, x.ncols())?;
    let mut cfg = AAConfig::new(args.k);
    cfg.seed = args.seed;

    let t1 = Instant::now();
    let selection = sivm::select_sivm(&x, args.k)?;
    let select_ms = ms(t1);
    let t2 = Instant::now();
    let f = sivm::factorization_from_selection(&x, &selection.indices, &cfg.inner, args.seed)?;
    let solve_ms = ms(t2);

    let mut report = RunReport::from_factorization("sivm", cfg, x.nrows(), &f);
    report.selected_indices = Some(selection.indices);
    if args.timings {
        report.timings_ms.insert("read".into(), read_ms);
        report.timings_ms.insert("select".into(), select_ms);
        report.timings_ms.insert("coefficients".into(), solve_ms);
    }
    write_outputs(&args.out_prefix, &f, &report)
}

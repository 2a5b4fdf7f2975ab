use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use loopfact::experiment::{
    run_det, run_det_loop, run_elliptic_report, run_factor, run_gen, run_verify, ExperimentConfig,
};
use loopfact::loops::{FactorKind, LoopFile, SU2Loop};
use loopfact::spin::SpinLabel;
use loopfact::{Error, ModelDescriptor, C64};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "loopfact", version, about = "Loop factorization and spin Toeplitz determinant experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build k1, k2 and g from the configured sequences and write loop files.
    Gen(Common),
    /// Triangular factorization of a loop file.
    Factor {
        /// Loop JSON written by `gen`.
        loop_file: PathBuf,
        /// Force the k1 or k2 form instead of detecting it.
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Factorized determinant identity, or det A(g)A(g^-1) of a loop file.
    Det {
        #[arg(long = "loop")]
        loop_file: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run every contract check over the configured families.
    Verify {
        /// Extra loop files; each must be SU(2) valued.
        #[arg(long = "loop")]
        loops: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Diagnostics of the elliptic model and its spin structure.
    EllipticReport(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    K1,
    K2,
}

#[derive(Clone, Copy, Default, PartialEq, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `disk`, `elliptic`, or `elliptic:T[:B]` for τ = iT and basepoint iB.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    spin: Option<SpinLabel>,
    #[arg(long = "N")]
    truncation: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Comma-separated complex numbers such as `0.3,0.1-0.2i`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    eta: Option<Vec<C64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    zeta: Option<Vec<C64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    chi: Option<Vec<C64>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeded random families added after the explicit one.
    #[arg(long)]
    families: Option<usize>,
    /// Output file, or directory for `gen`. Defaults to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

fn parse_model(s: &str) -> Result<ModelDescriptor, Error> {
    let bad = || Error::BadInput(format!("unrecognized model descriptor {s:?}"));
    let mut parts = s.split(':');
    match parts.next() {
        Some("disk") if parts.next().is_none() => Ok(ModelDescriptor::Disk),
        Some("elliptic") => {
            let ModelDescriptor::Elliptic {
                mut tau_im,
                mut basepoint_im,
                ..
            } = ModelDescriptor::default_elliptic()
            else {
                unreachable!()
            };
            if let Some(t) = parts.next() {
                tau_im = t.parse().map_err(|_| bad())?;
            }
            if let Some(b) = parts.next() {
                basepoint_im = b.parse().map_err(|_| bad())?;
            }
            if parts.next().is_some() {
                return Err(bad());
            }
            Ok(ModelDescriptor::Elliptic {
                tau_re: 0.0,
                tau_im,
                basepoint_re: 0.0,
                basepoint_im,
            })
        }
        _ => Err(bad()),
    }
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut c = match &self.config {
            Some(p) => serde_json::from_str(&read(p)?)?,
            None => ExperimentConfig::default(),
        };
        if let Some(m) = &self.model {
            c.model = parse_model(m)?;
        }
        if self.spin.is_some() {
            c.spin = self.spin;
        }
        if let Some(n) = self.truncation {
            c.truncation = n;
        }
        if let Some(s) = &self.sizes {
            c.sizes = s.clone();
        }
        if let Some(v) = &self.eta {
            c.eta = v.clone();
        }
        if let Some(v) = &self.zeta {
            c.zeta = v.clone();
        }
        if let Some(v) = &self.chi {
            c.chi = v.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(f) = self.families {
            c.random_families = f;
        }
        c.validate()?;
        Ok(c)
    }
}

fn read(p: &Path) -> Result<String, Error> {
    fs::read_to_string(p).map_err(|e| Error::BadInput(format!("cannot read {}: {e}", p.display())))
}

fn read_loop(p: &Path) -> Result<SU2Loop, Error> {
    let file: LoopFile = serde_json::from_str(&read(p)?)?;
    SU2Loop::from_file(&file)
}

/// Write via a temporary file in the target directory so readers never see
/// a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let io = |e: std::io::Error| Error::BadInput(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Error> {
    match out {
        Some(p) => write_atomic(p, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Error::BadInput(format!("stdout: {e}"))),
    }
}

fn json<T: Serialize>(v: &T) -> Result<Vec<u8>, Error> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

fn csv_rows<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::BadInput(format!("csv: {e}")))?;
    }
    w.into_inner().map_err(|e| Error::BadInput(format!("csv: {e}")))
}

#[derive(Serialize)]
struct Row<'a> {
    name: &'a str,
    re: f64,
    im: f64,
}

fn row(name: &str, z: C64) -> Row<'_> {
    Row { name, re: z.re, im: z.im }
}

fn gen(common: &Common) -> Result<bool, Error> {
    let config = common.config()?;
    let out = run_gen(&config)?;
    if let Some(dir) = &common.out {
        fs::create_dir_all(dir).map_err(|e| Error::BadInput(format!("cannot create {}: {e}", dir.display())))?;
        for (name, file) in &out.files {
            write_atomic(&dir.join(format!("{name}.json")), &json(file)?)?;
        }
    }
    let report = match common.format {
        Format::Json => json(&out)?,
        Format::Csv => csv_rows(&out.loops)?,
    };
    match &common.out {
        Some(dir) => write_atomic(&dir.join(report_name("gen", common.format)), &report)?,
        None => emit(None, &report)?,
    }
    Ok(true)
}

fn report_name(stem: &str, f: Format) -> String {
    match f {
        Format::Json => format!("{stem}.json"),
        Format::Csv => format!("{stem}.csv"),
    }
}

fn factor(path: &Path, kind: Option<KindArg>, common: &Common) -> Result<bool, Error> {
    let k = read_loop(path)?;
    let kind = kind.map(|k| match k {
        KindArg::K1 => FactorKind::Lower,
        KindArg::K2 => FactorKind::Upper,
    });
    let out = run_factor(&k, kind)?;
    let bytes = match common.format {
        Format::Json => json(&out)?,
        Format::Csv => {
            let f = &out.factorization;
            let mut rows = vec![
                row("diagonal", C64::new(f.diagonal, 0.0)),
                row("reassembly_error", C64::new(out.reassembly_error, 0.0)),
                row("residual", C64::new(f.diagnostics.residual, 0.0)),
            ];
            let names: Vec<String> = (1..=f.off_diagonal.truncation() as i64)
                .map(|n| format!("off_diagonal[-{n}]"))
                .collect();
            for (n, name) in names.iter().enumerate() {
                rows.push(row(name, f.off_diagonal.coefficient(0, -(n as i64 + 1))));
            }
            csv_rows(rows)?
        }
    };
    emit(common.out.as_deref(), &bytes)?;
    Ok(true)
}

#[derive(Serialize)]
struct DetRow<'a> {
    factor: &'a str,
    size: usize,
    re: f64,
    im: f64,
}

fn det(loop_file: Option<&Path>, common: &Common) -> Result<bool, Error> {
    let config = common.config()?;
    let bytes = match loop_file {
        Some(p) => {
            let r = run_det_loop(&config, &read_loop(p)?)?;
            match common.format {
                Format::Json => json(&r)?,
                Format::Csv => csv_rows(detrows("det A(g)A(g^-1)", &r))?,
            }
        }
        None => {
            let r = run_det(&config)?;
            match common.format {
                Format::Json => json(&r)?,
                Format::Csv => {
                    let id = &r.identity;
                    let mut rows = detrows("lhs", &id.lhs);
                    for f in &id.factors {
                        rows.extend(detrows(&f.name, &f.report));
                    }
                    csv_rows(rows)?
                }
            }
        }
    };
    emit(common.out.as_deref(), &bytes)?;
    Ok(true)
}

fn detrows<'a>(factor: &'a str, r: &loopfact::toeplitz::DetReport) -> Vec<DetRow<'a>> {
    let mut rows: Vec<DetRow> = r
        .sizes
        .iter()
        .zip(&r.values)
        .map(|(&size, v)| DetRow {
            factor,
            size,
            re: v.re,
            im: v.im,
        })
        .collect();
    // Size 0 marks the extrapolated limit.
    rows.push(DetRow {
        factor,
        size: 0,
        re: r.extrapolated.re,
        im: r.extrapolated.im,
    });
    rows
}

fn verify(loops: &[PathBuf], common: &Common) -> Result<bool, Error> {
    let config = common.config()?;
    let extra = loops
        .iter()
        .map(|p| Ok((p.display().to_string(), read_loop(p)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let report = run_verify(&config, &extra)?;
    let bytes = match common.format {
        Format::Json => json(&report)?,
        Format::Csv => csv_rows(&report.checks)?,
    };
    emit(common.out.as_deref(), &bytes)?;
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "FAIL family {} {}: {:.3e} > {:.1e} {}",
            c.family, c.check, c.value, c.tolerance, c.note
        );
    }
    Ok(report.passed)
}

fn elliptic_report(common: &Common) -> Result<bool, Error> {
    let mut config = common.config()?;
    if common.model.is_none() && common.config.is_none() {
        config.model = ModelDescriptor::default_elliptic();
    }
    let r = run_elliptic_report(&config)?;
    let bytes = match common.format {
        Format::Json => json(&r)?,
        Format::Csv => {
            let re = |x: f64| C64::new(x, 0.0);
            let mut rows = vec![
                row("dk_residue_basepoint", r.dk_residues[0]),
                row("dk_residue_reflected", r.dk_residues[1]),
            ];
            let period_names = ["dk_period_a", "dk_period_b"];
            for (name, p) in period_names.iter().zip(&r.dk_periods) {
                rows.push(row(name, *p));
            }
            let zero_names = ["dk_zero_inner", "dk_zero_outer"];
            for (name, z) in zero_names.iter().zip(&r.dk_zeros) {
                rows.push(row(name, *z));
            }
            rows.extend([
                row("zero_mode_dimension", re(r.zero_mode_dimension as f64)),
                row("decompose_idempotence", re(r.decompose_idempotence)),
                row("map_unimodularity", re(r.map_unimodularity)),
                row("frame_sigma_min", re(r.frame_sigma_min)),
                row("smoothing_ratio", re(r.smoothing_ratio)),
            ]);
            csv_rows(rows)?
        }
    };
    emit(common.out.as_deref(), &bytes)?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(c) => gen(c),
        Command::Factor { loop_file, kind, common } => factor(loop_file, *kind, common),
        Command::Det { loop_file, common } => det(loop_file.as_deref(), common),
        Command::Verify { loops, common } => verify(loops, common),
        Command::EllipticReport(c) => elliptic_report(c),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("loopfact: verification failed");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("loopfact: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! `chebmod`: fit ModP plans, run packing pipelines and regenerate the tables.
//!
//! Exit codes: 0 success, 1 a checked bound was violated, 2 usage, I/O or
//! parameter error.

mod config;
mod data;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chebmod::fitting::{fit_modp_with, DeltaChoice};
use chebmod::packing::pipeline::{pipeline_pack, pipeline_unpack, PackManifest};
use chebmod::packing::PackLayout;
use chebmod::tables::{build_table, Table, TableConfig, TableName};
use chebmod::Simulator;
use clap::{Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "chebmod",
    version,
    about = "Polynomial ModP approximation and CKKS packing harness"
)]
struct Cli {
    /// Run configuration (JSON); command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit ModP(x, p) over [0, B] and write the plan as JSON.
    Fit {
        #[arg(long)]
        p: u64,
        #[arg(long = "B")]
        upper: u64,
        #[arg(long = "D")]
        degree: usize,
        /// Scaling factor; suggested from the coefficients when omitted.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pack newline-delimited integer vectors through a layout.
    Pack {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Packed slot vectors, one JSON array of [re, im] pairs per line.
        #[arg(long)]
        out: PathBuf,
        /// Manifest path; defaults to `<out>.manifest.json`.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        slots: Option<usize>,
    },
    /// Encrypt packed vectors on the simulator and unpack them.
    Unpack {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        packed: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Recovered vectors, one JSON array per line.
        #[arg(long)]
        out: PathBuf,
        /// Original data for the error report.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Fail with exit code 1 when any element is further than this from the original.
        #[arg(long)]
        max_error: Option<f64>,
        #[arg(long)]
        slots: Option<usize>,
    },
    /// Regenerate a table (or `all`) as CSV and Markdown.
    Table {
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        slots: Option<usize>,
    },
    /// Quick end-to-end check on a small ring.
    Selftest {
        #[arg(long)]
        slots: Option<usize>,
    },
}

/// A run finished but violated a checked bound.
#[derive(Debug)]
struct BoundViolation(String);

impl std::fmt::Display for BoundViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BoundViolation {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<BoundViolation>().is_some() => {
            eprintln!("bound violation: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Fit {
            p,
            upper,
            degree,
            delta,
            out,
        } => cmd_fit(p, upper, degree, delta, &out),
        Command::Pack {
            layout,
            data,
            out,
            manifest,
            slots,
        } => {
            let manifest = manifest.unwrap_or_else(|| manifest_path(&out));
            cmd_pack(&layout, &data, &out, &manifest, slots.unwrap_or(cfg.sim.n))
        }
        Command::Unpack {
            layout,
            packed,
            manifest,
            out,
            data,
            max_error,
            slots,
        } => {
            let manifest = manifest.unwrap_or_else(|| manifest_path(&packed));
            let mut sim = cfg.sim.clone();
            if let Some(n) = slots {
                sim.n = n;
            }
            cmd_unpack(
                &layout,
                &packed,
                &manifest,
                &out,
                data.as_deref(),
                max_error,
                sim,
                cfg.parallel,
            )
        }
        Command::Table {
            name,
            seed,
            out_dir,
            slots,
        } => {
            let mut cfg = cfg;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = slots {
                cfg.sim.n = n;
            }
            if let Some(d) = out_dir {
                cfg.output_dir = d;
            }
            let names = match name.or_else(|| cfg.table.map(|t| t.to_string())) {
                None => bail!("no table given; pass --name or set \"table\" in the config"),
                Some(n) if n == "all" => TableName::ALL.to_vec(),
                Some(n) => vec![n.parse()?],
            };
            cmd_table(&names, &cfg)
        }
        Command::Selftest { slots } => cmd_selftest(slots.unwrap_or(1 << 10)),
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn cmd_fit(p: u64, upper: u64, degree: usize, delta: Option<f64>, out: &Path) -> Result<()> {
    let choice = match delta {
        Some(d) => DeltaChoice::Fixed(d),
        None => DeltaChoice::Suggest {
            headroom: chebmod::fitting::DEFAULT_HEADROOM,
        },
    };
    let plan = fit_modp_with(p, upper, degree, choice)?;
    plan.save(out).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "ModP(x, {p}) over [0, {upper}], degree {degree}: delta = {}, max |beta| = {:.4}, residual = {:.3e}, mean error = {:.3e}",
        plan.delta(),
        plan.series().max_abs_coeff(),
        plan.residual(),
        plan.mean_integer_error()
    );
    Ok(())
}

fn cmd_pack(layout: &Path, data: &Path, out: &Path, manifest_out: &Path, slots: usize) -> Result<()> {
    let layout = PackLayout::load(layout).with_context(|| format!("loading layout {}", layout.display()))?;
    let vectors = data::read_real_vectors(data)?;
    let (packed, manifest) = pipeline_pack(&vectors, &layout, slots)?;
    data::write_complex_vectors(out, &packed)?;
    std::fs::write(manifest_out, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("writing {}", manifest_out.display()))?;
    println!(
        "packed {} vectors into {} slot vectors of {slots} slots",
        vectors.len(),
        packed.len()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_unpack(
    layout: &Path,
    packed: &Path,
    manifest: &Path,
    out: &Path,
    original: Option<&Path>,
    max_error: Option<f64>,
    sim: chebmod::SimParams,
    parallel: bool,
) -> Result<()> {
    let layout = PackLayout::load(layout).with_context(|| format!("loading layout {}", layout.display()))?;
    let manifest: PackManifest = serde_json::from_str(
        &std::fs::read_to_string(manifest).with_context(|| format!("reading {}", manifest.display()))?,
    )?;
    let packed = data::read_complex_vectors(packed)?;
    let sim = Simulator::new(sim)?;
    let cts = packed
        .iter()
        .map(|p| sim.encrypt(p))
        .collect::<chebmod::Result<Vec<_>>>()?;
    let out_cts = pipeline_unpack(&cts, &layout, &manifest, parallel)?;
    let lengths = manifest.original_lengths().unwrap_or(&[]).to_vec();
    let lengths = if layout.stages.is_empty() {
        packed.iter().map(Vec::len).collect()
    } else {
        lengths
    };
    let recovered: Vec<Vec<f64>> = out_cts
        .iter()
        .zip(&lengths)
        .map(|(ct, &len)| ct.decrypt_real()[..len].to_vec())
        .collect();
    data::write_real_vectors(out, &recovered)?;
    println!("unpacked {} vectors", recovered.len());
    let mut worst: f64 = 0.0;
    if let Some(path) = original {
        let want = data::read_real_vectors(path)?;
        if want.len() != recovered.len() {
            bail!(
                "original data has {} vectors, recovered {}",
                want.len(),
                recovered.len()
            );
        }
        for (i, ((got, want), ct)) in recovered.iter().zip(&want).zip(&out_cts).enumerate() {
            let errs: Vec<f64> = got.iter().zip(want).map(|(g, w)| (g - w).abs()).collect();
            let max = errs.iter().copied().fold(0.0, f64::max);
            let mean = if errs.is_empty() {
                0.0
            } else {
                errs.iter().sum::<f64>() / errs.len() as f64
            };
            worst = worst.max(max);
            println!(
                "vector {i}: max error {max:.3e}, mean error {mean:.3e}, remaining level {}",
                ct.level()
            );
        }
    } else {
        for (i, ct) in out_cts.iter().enumerate() {
            println!("vector {i}: remaining level {}", ct.level());
        }
    }
    if let Some(bound) = max_error {
        if original.is_none() {
            bail!("--max-error needs --data");
        }
        if worst > bound {
            return Err(BoundViolation(format!("max error {worst:.3e} exceeds {bound:e}")).into());
        }
    }
    Ok(())
}

fn report(table: &Table) {
    println!("{}", table.to_markdown());
    for (job, secs) in &table.wall_clock {
        println!("wall-clock {job}: {secs:.2}s (informational)");
    }
}

fn cmd_table(names: &[TableName], cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    let tcfg = TableConfig {
        sim: cfg.sim.clone(),
        seed: cfg.seed,
        parallel: cfg.parallel,
    };
    let mut failed = Vec::new();
    for &name in names {
        let table = build_table(name, &tcfg)?;
        let csv = cfg.output_dir.join(format!("{name}.csv"));
        let md = cfg.output_dir.join(format!("{name}.md"));
        std::fs::write(&csv, table.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
        std::fs::write(&md, table.to_markdown()).with_context(|| format!("writing {}", md.display()))?;
        report(&table);
        for c in table.failures() {
            failed.push(format!("{name}: row {}, column {} = {:e}", c.row, c.column, c.value));
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(BoundViolation(failed.join("; ")).into())
    }
}

fn cmd_selftest(slots: usize) -> Result<()> {
    let tcfg = TableConfig {
        sim: chebmod::SimParams::with_slots(slots),
        ..TableConfig::default()
    };
    let mut failed = Vec::new();
    for name in [TableName::Modp4, TableName::Modp5, TableName::Floor, TableName::Depth] {
        let table = build_table(name, &tcfg)?;
        let status = if table.passed() { "PASS" } else { "FAIL" };
        println!("{status} {name}");
        failed.extend(
            table
                .failures()
                .iter()
                .map(|c| format!("{name}: {} / {}", c.row, c.column)),
        );
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(BoundViolation(failed.join("; ")).into())
    }
}

//! polypin: interface-polymer laboratory CLI.
//!
//! Every run is fully determined by its arguments and `--seed`; outputs are
//! written atomically (temp file + rename) so partial files never survive.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use polypin::free_energy::{MomentMethod, ScalingPoint};
use polypin::srw::InterfaceSpec;
use polypin::{Exponent, ModelParams, PolymerInstance, RenewalModel};
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "polypin", version, about = "Exact and Monte Carlo laboratory for a directed polymer among repulsive interfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Clone)]
struct GlobalArgs {
    /// Master seed; absent means 0, never ambient entropy
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default 1; POLYPIN_THREADS as fallback)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a phase-diagram point and print its predicted scales
    Phase(PhaseArgs),
    /// Solve the free energy and gap moments at (T, delta)
    FreeEnergy(FreeEnergyArgs),
    /// Build the tilted renewal model; optionally dump (n, f, u)
    Renewal(RenewalArgs),
    /// Sample polymer trajectories and write per-sample statistics
    Sample(SampleArgs),
    /// Run the per-regime experiment at a scaling point
    Experiment(ExperimentArgs),
    /// Hitting-time bound verification over a T-grid
    VerifyBounds(VerifyBoundsArgs),
}

#[derive(Args)]
struct PhaseArgs {
    /// exponent a (float or p/q)
    #[arg(long)]
    a: String,
    /// exponent b (float or p/q)
    #[arg(long)]
    b: String,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// polymer length N (even); enables numeric scales
    #[arg(long)]
    n: Option<u64>,
}

#[derive(Args)]
struct FreeEnergyArgs {
    #[arg(long)]
    t: u32,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
}

#[derive(Args)]
struct RenewalArgs {
    #[arg(long)]
    t: u32,
    #[arg(long)]
    delta: f64,
    /// horizon (even); defaults to the tail rule at defect 1e-9
    #[arg(long)]
    horizon: Option<usize>,
    /// dump the full (n, f, u) table instead of the summary
    #[arg(long)]
    dump: bool,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1000)]
    samples: u32,
    /// also dump `paths` full trajectories (small N only)
    #[arg(long, default_value_t = 0)]
    paths: u32,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 10_000)]
    samples: u32,
}

#[derive(Args)]
struct VerifyBoundsArgs {
    /// comma-separated even spacings, e.g. 8,16,32 (use "inf" for infinity)
    #[arg(long, value_delimiter = ',')]
    t: Vec<String>,
    #[arg(long, default_value_t = 20)]
    k_max: u32,
    /// horizon for the infinite-spacing entries
    #[arg(long, default_value_t = 4096)]
    inf_horizon: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .global
        .threads
        .or_else(|| {
            std::env::var("POLYPIN_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1);
    let pool = match rayon_pool(threads) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("polypin: {e}");
            return ExitCode::from(1);
        }
    };
    let result = pool.install(|| run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polypin: {e:#}");
            // parameter/domain problems exit 2, everything else 1
            let param = e.downcast_ref::<polypin::Error>().is_some_and(|pe| {
                matches!(pe, polypin::Error::Param(_) | polypin::Error::Domain { .. })
            });
            ExitCode::from(if param { 2 } else { 1 })
        }
    }
}

fn rayon_pool(threads: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()?)
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Phase(args) => cmd_phase(args, &cli.global),
        Command::FreeEnergy(args) => cmd_free_energy(args, &cli.global),
        Command::Renewal(args) => cmd_renewal(args, &cli.global),
        Command::Sample(args) => cmd_sample(args, &cli.global),
        Command::Experiment(args) => cmd_experiment(args, &cli.global),
        Command::VerifyBounds(args) => cmd_verify_bounds(args, &cli.global),
    }
}

fn parse_point(a: &str, b: &str, beta: f64, n: u64) -> anyhow::Result<ScalingPoint> {
    let a = Exponent::from_str(a)?;
    let b = Exponent::from_str(b)?;
    Ok(ScalingPoint::new(a, b, beta, n)?)
}

/// Write atomically: temp file in the same directory, then rename.
fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
        Some(path) => write_atomic(path, bytes),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "polypin-out".into())
    ));
    let write = (|| -> anyhow::Result<()> {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        Ok(())
    })();
    if let Err(e) = write {
        let _ = std::fs::remove_file(&tmp);
        return Err(e).context("writing temporary output");
    }
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

#[derive(Serialize)]
struct PhaseOut {
    a: f64,
    b: f64,
    beta: f64,
    label: String,
    th1_tag: Option<polypin::regime::Th1Subcase>,
    n: Option<u64>,
    t_n: Option<u32>,
    delta_n: Option<f64>,
    endpoint_scale: Option<f64>,
    endpoint_constant: Option<f64>,
    last_contact_scale: Option<f64>,
    contacts_scale: Option<f64>,
    contacts_scale_renewal: Option<f64>,
}

fn cmd_phase(args: &PhaseArgs, g: &GlobalArgs) -> anyhow::Result<()> {
    let a = Exponent::from_str(&args.a)?;
    let b = Exponent::from_str(&args.b)?;
    let label = polypin::classify(a, b)?;
    let tag = polypin::regime::th1_tag(a, b)?;
    let mut out = PhaseOut {
        a: a.value(),
        b: b.value(),
        beta: args.beta,
        label: label.to_string(),
        th1_tag: tag,
        n: args.n,
        t_n: None,
        delta_n: None,
        endpoint_scale: None,
        endpoint_constant: None,
        last_contact_scale: None,
        contacts_scale: None,
        contacts_scale_renewal: None,
    };
    if let Some(n) = args.n {
        let point = parse_point(&args.a, &args.b, args.beta, n)?;
        let pred = polypin::predicted_orders(&point)?;
        out.t_n = Some(point.t_n());
        out.delta_n = Some(point.delta_n());
        out.endpoint_scale = Some(pred.endpoint_scale);
        out.endpoint_constant = pred.endpoint_constant;
        out.last_contact_scale = Some(pred.last_contact_scale);
        out.contacts_scale = Some(pred.contacts_scale);
        out.contacts_scale_renewal = Some(pred.contacts_scale_renewal);
    }
    match g.format {
        Format::Json => emit(&g.out, format!("{}\n", serde_json::to_string_pretty(&out)?).as_bytes()),
        Format::Csv => {
            let mut s = String::from("field,value\n");
            writeln!(s, "label,{}", out.label)?;
            if let Some(v) = out.endpoint_scale {
                writeln!(s, "endpoint_scale,{v}")?;
                writeln!(s, "last_contact_scale,{}", out.last_contact_scale.unwrap())?;
                writeln!(s, "contacts_scale,{}", out.contacts_scale.unwrap())?;
                writeln!(s, "contacts_scale_renewal,{}", out.contacts_scale_renewal.unwrap())?;
            }
            emit(&g.out, s.as_bytes())
        }
    }
}

#[derive(Serialize)]
struct FreeEnergyOut {
    t: u32,
    delta: f64,
    phi: f64,
    gamma: f64,
    g: f64,
    residual: f64,
    mean_tau_closed: f64,
    second_tau_closed: f64,
    switch_prob_closed: f64,
    mean_tau_direct: f64,
    second_tau_direct: f64,
    switch_prob_direct: f64,
}

fn cmd_free_energy(args: &FreeEnergyArgs, g: &GlobalArgs) -> anyhow::Result<()> {
    let params = ModelParams::new(args.t, args.delta)?;
    let fe = polypin::free_energy(params, args.tol)?;
    let (closed, direct) = if args.delta > 0.0 {
        (
            polypin::renewal_moments(params, MomentMethod::ClosedForm)?,
            polypin::renewal_moments(params, MomentMethod::DirectSum)?,
        )
    } else {
        let nan = polypin::free_energy::RenewalMoments {
            mean_tau: f64::NAN,
            second_tau: f64::NAN,
            switch_prob: f64::NAN,
            method: MomentMethod::ClosedForm,
        };
        (nan, nan)
    };
    let out = FreeEnergyOut {
        t: args.t,
        delta: args.delta,
        phi: fe.phi,
        gamma: fe.gamma,
        g: fe.g,
        residual: fe.residual,
        mean_tau_closed: closed.mean_tau,
        second_tau_closed: closed.second_tau,
        switch_prob_closed: closed.switch_prob,
        mean_tau_direct: direct.mean_tau,
        second_tau_direct: direct.second_tau,
        switch_prob_direct: direct.switch_prob,
    };
    match g.format {
        Format::Json => emit(&g.out, format!("{}\n", serde_json::to_string_pretty(&out)?).as_bytes()),
        Format::Csv => {
            let mut s = String::from("field,value\n");
            writeln!(s, "phi,{}", out.phi)?;
            writeln!(s, "gamma,{}", out.gamma)?;
            writeln!(s, "g,{}", out.g)?;
            writeln!(s, "residual,{}", out.residual)?;
            writeln!(s, "mean_tau_closed,{}", out.mean_tau_closed)?;
            writeln!(s, "second_tau_closed,{}", out.second_tau_closed)?;
            writeln!(s, "switch_prob_closed,{}", out.switch_prob_closed)?;
            writeln!(s, "mean_tau_direct,{}", out.mean_tau_direct)?;
            writeln!(s, "second_tau_direct,{}", out.second_tau_direct)?;
            writeln!(s, "switch_prob_direct,{}", out.switch_prob_direct)?;
            emit(&g.out, s.as_bytes())
        }
    }
}

fn cmd_renewal(args: &RenewalArgs, g: &GlobalArgs) -> anyhow::Result<()> {
    let params = ModelParams::new(args.t, args.delta)?;
    let model = match args.horizon {
        Some(h) => RenewalModel::build(params, h)?,
        None => RenewalModel::build_to_defect(params, 1e-9, 1 << 22)?,
    };
    if args.dump {
        let mut buf = Vec::new();
        model.dump_csv(&mut buf)?;
        return emit(&g.out, &buf);
    }
    #[derive(Serialize)]
    struct RenewalOut {
        t: u32,
        delta: f64,
        horizon: usize,
        support: usize,
        phi: f64,
        normalization_defect: f64,
        method: String,
    }
    let out = RenewalOut {
        t: args.t,
        delta: args.delta,
        horizon: model.horizon,
        support: model.support,
        phi: model.fe.phi,
        normalization_defect: model.normalization_defect,
        method: format!("{:?}", model.method),
    };
    match g.format {
        Format::Json => emit(&g.out, format!("{}\n", serde_json::to_string_pretty(&out)?).as_bytes()),
        Format::Csv => {
            let mut s = String::from("field,value\n");
            writeln!(s, "horizon,{}", out.horizon)?;
            writeln!(s, "support,{}", out.support)?;
            writeln!(s, "phi,{}", out.phi)?;
            writeln!(s, "normalization_defect,{}", out.normalization_defect)?;
            writeln!(s, "method,{}", out.method)?;
            emit(&g.out, s.as_bytes())
        }
    }
}

fn cmd_sample(args: &SampleArgs, g: &GlobalArgs) -> anyhow::Result<()> {
    let point = parse_point(&args.a, &args.b, args.beta, args.n)?;
    let params = point.params()?;
    let inst = PolymerInstance::build(params, args.n as usize)?;
    if args.paths > 0 {
        let mut s = String::from("sample_id,step,height\n");
        for i in 0..args.paths {
            let path = inst.sample_path(g.seed, i as u64)?;
            for (step, h) in path.iter().enumerate() {
                writeln!(s, "{i},{step},{h}")?;
            }
        }
        return emit(&g.out, s.as_bytes());
    }
    let stats = inst.run_samples(args.samples, g.seed);
    match g.format {
        Format::Json => emit(&g.out, format!("{}\n", serde_json::to_string_pretty(&stats)?).as_bytes()),
        Format::Csv => {
            let mut s = String::from("sample_id,S_N,tau_last,L,m,visited_other\n");
            for (i, st) in stats.iter().enumerate() {
                writeln!(
                    s,
                    "{i},{},{},{},{},{}",
                    st.s_n, st.tau_last, st.l, st.m, st.visited_other_interface
                )?;
            }
            emit(&g.out, s.as_bytes())
        }
    }
}

fn cmd_experiment(args: &ExperimentArgs, g: &GlobalArgs) -> anyhow::Result<()> {
    let point = parse_point(&args.a, &args.b, args.beta, args.n)?;
    let report = polypin::run_experiment(&point, args.samples, g.seed)?;
    match g.format {
        Format::Json => emit(&g.out, format!("{}\n", serde_json::to_string_pretty(&report)?).as_bytes()),
        Format::Csv => emit(&g.out, report.criteria_csv().as_bytes()),
    }
}

fn cmd_verify_bounds(args: &VerifyBoundsArgs, g: &GlobalArgs) -> anyhow::Result<()> {
    if args.t.is_empty() {
        bail!("at least one spacing required (--t 8,16,32)");
    }
    let mut specs = Vec::new();
    for s in &args.t {
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            specs.push(InterfaceSpec::Infinite);
        } else {
            specs.push(InterfaceSpec::finite(s.parse().map_err(|_| {
                polypin::Error::Param(format!("bad spacing {s:?}"))
            })?)?);
        }
    }
    let report = polypin::verify_hitting_bounds(&specs, args.k_max, args.inf_horizon)?;
    match g.format {
        Format::Json => emit(&g.out, format!("{}\n", serde_json::to_string_pretty(&report)?).as_bytes()),
        Format::Csv => {
            let mut s = String::from("t,short_max,long_max\n");
            for row in &report.rows {
                let t = row.t.map(|v| v.to_string()).unwrap_or_else(|| "inf".into());
                let lm = row.long_max.map(|v| v.to_string()).unwrap_or_default();
                writeln!(s, "{t},{},{lm}", row.short_max)?;
            }
            writeln!(s, "grid_max,{},", report.grid_max)?;
            if let Some(cp) = report.c_prime {
                writeln!(s, "c_prime,{cp},")?;
            }
            emit(&g.out, s.as_bytes())
        }
    }
}

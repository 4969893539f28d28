//! Command-line front end for the fiberwalk simulator.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use fiberwalk::analysis::{
    bloch_recovery, corner_series, fidelity_series, linear_fit, loop_energy_series,
    lz_transfer_series, variance_series, zitter_period, SeriesReport,
};
use fiberwalk::io::{
    format_value, parse_band, parse_spinor, read_config, write_grid, write_heatmap, write_report,
    InitialSpec, OutputKind, Preset, RunConfig, SeriesKind, Split,
};
use fiberwalk::spectral::{centroid_track, BandStructure};
use fiberwalk::{
    evolve, evolve_recorded, make_initial, make_packet, CoinOp, Gradient, GridKind,
    PhaseProfile, Spinor, Trajectory,
};

#[derive(Parser, Debug)]
#[command(name = "fiberwalk", version, about = "Two-loop discrete-time quantum walk simulator")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Evolve a preset or configured run and write grids, heatmaps and a report
    Evolve(EvolveArgs),
    /// Tabulate the band structure over [0, π]
    Bands(BandsArgs),
    /// Bloch recovery: fidelity with the initial state over one period
    Bloch(BlochArgs),
    /// Zitterbewegung period of the upper-loop energy
    Zitter(ZitterArgs),
    /// Landau-Zener band transfer of a wave packet
    Lz(LzArgs),
    /// Recovery and band transfer for a list of gradients α = 2π/p
    Sweep(SweepArgs),
    /// List the built-in presets
    Presets,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Output directory (created if absent)
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads; never changes output bytes
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct InitialArgs {
    #[arg(long, allow_negative_numbers = true)]
    position: Option<i64>,
    #[arg(long, value_parser = ["up", "down", "plus"])]
    spinor: Option<String>,
    #[arg(long)]
    packet_width: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    packet_kappa: Option<f64>,
    #[arg(long, value_parser = ["plus", "minus"])]
    packet_band: Option<String>,
}

impl InitialArgs {
    fn wants_packet(&self) -> bool {
        self.packet_width.is_some() || self.packet_kappa.is_some() || self.packet_band.is_some()
    }

    /// Applies the flags on top of `base`.
    fn apply(&self, base: InitialSpec) -> Result<InitialSpec> {
        if self.spinor.is_some() && self.wants_packet() {
            bail!("--spinor cannot be combined with --packet-* flags");
        }
        let position = self.position.unwrap_or(match base {
            InitialSpec::Site { position, .. } | InitialSpec::Packet { position, .. } => position,
        });
        if self.wants_packet() {
            let (w0, k0, b0) = match base {
                InitialSpec::Packet {
                    width, kappa, band, ..
                } => (width, kappa, band),
                InitialSpec::Site { .. } => (10.0, 0.0, fiberwalk::Band::Plus),
            };
            let band = match &self.packet_band {
                Some(b) => parse_band(b).expect("validated by clap"),
                None => b0,
            };
            let width = self.packet_width.unwrap_or(w0);
            if !(width >= 1.0) || !width.is_finite() {
                bail!("--packet-width must be >= 1, got {width}");
            }
            return Ok(InitialSpec::Packet {
                position,
                width,
                kappa: self.packet_kappa.unwrap_or(k0),
                band,
            });
        }
        Ok(match (base, &self.spinor) {
            (_, Some(s)) => InitialSpec::Site {
                position,
                spinor: parse_spinor(s).expect("validated by clap"),
            },
            (InitialSpec::Site { spinor, .. }, None) => InitialSpec::Site { position, spinor },
            (InitialSpec::Packet { width, kappa, band, .. }, None) => InitialSpec::Packet {
                position,
                width,
                kappa,
                band,
            },
        })
    }
}

#[derive(Args, Debug, Default)]
struct GradientArgs {
    /// Numerator of α = 2π·Q/P
    #[arg(long, allow_negative_numbers = true)]
    alpha_q: Option<i64>,
    /// Denominator of α = 2π·Q/P
    #[arg(long)]
    alpha_p: Option<i64>,
    /// α in radians per site
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["alpha_q", "alpha_p"])]
    alpha_float: Option<f64>,
}

impl GradientArgs {
    fn gradient(&self) -> Result<Option<Gradient>> {
        match (self.alpha_q, self.alpha_p, self.alpha_float) {
            (_, _, Some(a)) => Ok(Some(Gradient::float(a)?)),
            (q, Some(p), None) => Ok(Some(Gradient::rational(q.unwrap_or(1), p)?)),
            (Some(_), None, None) => bail!("--alpha-q requires --alpha-p"),
            (None, None, None) => Ok(None),
        }
    }
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[arg(long, value_parser = ["fig2", "fig4", "fig5"], conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    record_every: Option<usize>,
    #[command(flatten)]
    gradient: GradientArgs,
    #[command(flatten)]
    initial: InitialArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct BandsArgs {
    #[arg(long, default_value_t = 512)]
    samples: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct BlochArgs {
    /// Gradient α = 2π/P
    #[arg(long = "alpha-p", visible_alias = "p", default_value_t = 32)]
    p: u64,
    /// Defaults to one Bloch period, 2P
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    initial: InitialArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ZitterArgs {
    #[arg(long, default_value_t = 40)]
    steps: usize,
    #[command(flatten)]
    gradient: GradientArgs,
    #[command(flatten)]
    initial: InitialArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct LzArgs {
    /// Defaults to one Bloch period, ⌈4π/α⌉
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    gradient: GradientArgs,
    #[command(flatten)]
    initial: InitialArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Comma-separated denominators P of α = 2π/P
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
    alpha_p: Vec<u64>,
    /// Steps per point; defaults to one Bloch period, 2P
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 10.0)]
    packet_width: f64,
    #[command(flatten)]
    common: Common,
}

/// Runs the command line `args` (including the program name) and returns the
/// process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run_cli`] with explicit output streams.
pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match dispatch(cli.verb) {
        Ok(summary) => {
            let _ = write!(out, "{summary}");
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

fn dispatch(verb: Verb) -> Result<String> {
    let threads = match &verb {
        Verb::Evolve(a) => a.common.threads,
        Verb::Bands(a) => a.common.threads,
        Verb::Bloch(a) => a.common.threads,
        Verb::Zitter(a) => a.common.threads,
        Verb::Lz(a) => a.common.threads,
        Verb::Sweep(a) => a.common.threads,
        Verb::Presets => None,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            bail!("--threads must be >= 1");
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("starting worker threads")?;
    pool.install(|| match verb {
        Verb::Evolve(a) => cmd_evolve(a),
        Verb::Bands(a) => cmd_bands(a),
        Verb::Bloch(a) => cmd_bloch(a),
        Verb::Zitter(a) => cmd_zitter(a),
        Verb::Lz(a) => cmd_lz(a),
        Verb::Sweep(a) => cmd_sweep(a),
        Verb::Presets => Ok(cmd_presets()),
    })
}

fn out_dir(common: &Common) -> Result<&Path> {
    fs::create_dir_all(&common.out)
        .with_context(|| format!("creating output directory {}", common.out.display()))?;
    Ok(&common.out)
}

fn resolve_config(a: &EvolveArgs) -> Result<RunConfig> {
    let mut c = match (&a.preset, &a.config) {
        (Some(p), _) => RunConfig::preset(Preset::from_name(p).expect("validated by clap")),
        (None, Some(path)) => read_config(path)?,
        (None, None) => RunConfig::preset(Preset::Fig2),
    };
    if let Some(s) = a.steps {
        c.steps = s;
    }
    if let Some(k) = a.record_every {
        if k == 0 {
            bail!("--record-every must be >= 1");
        }
        c.record_every = k;
    }
    if let Some(g) = a.gradient.gradient()? {
        c.phase = Split::Lower.apply(g);
    }
    c.initial = a.initial.apply(c.initial)?;
    Ok(c)
}

fn centroid_report(traj: &Trajectory) -> Result<SeriesReport> {
    let track = centroid_track(traj)?;
    let x: Vec<f64> = traj.m_values().iter().map(|&m| m as f64).collect();
    let slope = linear_fit(&x, &track).map(|f| f.slope);
    Ok(SeriesReport::new("centroid", traj.m_values(), track)?.with_scalar(slope))
}

fn series_reports(c: &RunConfig, traj: &Trajectory) -> Result<Vec<SeriesReport>> {
    let mut reports = Vec::new();
    for kind in &c.series {
        match kind {
            SeriesKind::LoopEnergy => {
                let (eu, ev) = loop_energy_series(traj);
                let period = zitter_period(&eu).ok();
                reports.push(eu.with_scalar(period));
                reports.push(ev);
            }
            SeriesKind::Variance => reports.push(variance_series(traj)),
            SeriesKind::Fidelity => reports.push(fidelity_series(traj)?),
            SeriesKind::Corner => reports.push(corner_series(traj)?),
            SeriesKind::Centroid => reports.push(centroid_report(traj)?),
            SeriesKind::LzTransfer => {
                let alpha = c
                    .phase
                    .total_gradient()
                    .context("lz-transfer needs a linear phase gradient")?;
                reports.push(lz_transfer_series(traj, alpha)?);
            }
        }
    }
    Ok(reports)
}

fn write_output(kind: OutputKind, traj: &Trajectory, dir: &Path) -> Result<()> {
    let grid = traj.grid(match kind {
        OutputKind::GridU | OutputKind::HeatmapU => GridKind::U,
        OutputKind::GridV | OutputKind::HeatmapV => GridKind::V,
        OutputKind::GridTotal | OutputKind::HeatmapTotal => GridKind::Total,
    });
    let dest = dir.join(kind.file_name());
    match kind {
        OutputKind::GridU | OutputKind::GridV | OutputKind::GridTotal => write_grid(&grid, &dest)?,
        _ => write_heatmap(&grid, &dest)?,
    }
    Ok(())
}

fn max_norm_deviation(traj: &Trajectory) -> f64 {
    traj.states()
        .iter()
        .map(|s| (s.norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max)
}

fn cmd_evolve(a: EvolveArgs) -> Result<String> {
    let c = resolve_config(&a)?;
    let dir = out_dir(&a.common)?;
    let traj = evolve_recorded(&c.initial_state()?, c.steps, &c.coin, &c.phase, c.record_every)?;
    let reports = series_reports(&c, &traj)?;
    // Each output goes to its own file, so they can be written concurrently.
    c.outputs
        .par_iter()
        .map(|&k| write_output(k, &traj, dir))
        .collect::<Result<Vec<()>>>()?;
    write_report(&reports, &dir.join("report.json"))?;
    Ok(format!(
        "steps={} positions={} records={} norm_deviation={}\n",
        c.steps,
        traj.initial().len(),
        traj.len(),
        format_value(max_norm_deviation(&traj)),
    ))
}

fn cmd_bands(a: BandsArgs) -> Result<String> {
    if a.samples < 2 {
        bail!("--samples must be >= 2");
    }
    let dir = out_dir(&a.common)?;
    let b = BandStructure::half_zone(a.samples);
    let mut csv = String::from("kappa,beta_plus,beta_minus,gap\n");
    for i in 0..b.len() {
        writeln!(
            csv,
            "{},{},{},{}",
            format_value(b.kappa_grid[i]),
            format_value(b.beta_plus[i]),
            format_value(b.beta_minus[i]),
            format_value(b.beta_plus[i] - b.beta_minus[i]),
        )
        .expect("string write");
    }
    let dest = dir.join("bands.csv");
    fs::write(&dest, csv).with_context(|| format!("writing {}", dest.display()))?;
    let last = b.len() - 1;
    Ok(format!(
        "samples={} beta_0={} beta_pi={}\n",
        a.samples,
        format_value(b.beta_plus[0]),
        format_value(b.beta_plus[last]),
    ))
}

fn site_or_packet(initial: &InitialArgs, default: InitialSpec) -> Result<InitialSpec> {
    initial.apply(default)
}

fn down_at_origin() -> InitialSpec {
    InitialSpec::Site {
        position: 0,
        spinor: Spinor::down(),
    }
}

fn cmd_bloch(a: BlochArgs) -> Result<String> {
    if a.p == 0 {
        bail!("--p must be >= 1");
    }
    let period = 2 * a.p as usize;
    let steps = a.steps.unwrap_or(period);
    if steps < period {
        bail!("--steps must cover one Bloch period ({period})");
    }
    let init = site_or_packet(&a.initial, down_at_origin())?;
    let phase = PhaseProfile::rational(1, a.p as i64)?;
    let traj = evolve(&init.build(steps)?, steps, &CoinOp::balanced(), &phase)?;
    let rec = bloch_recovery(&traj, a.p)?;
    let dir = out_dir(&a.common)?;
    for kind in [OutputKind::GridU, OutputKind::GridV] {
        write_output(kind, &traj, dir)?;
    }
    write_report(&[fidelity_series(&traj)?], &dir.join("report.json"))?;
    Ok(format!(
        "peak_step={} peak_fidelity={}\n",
        rec.peak_step,
        format_value(rec.peak_fidelity)
    ))
}

fn cmd_zitter(a: ZitterArgs) -> Result<String> {
    let init = site_or_packet(&a.initial, down_at_origin())?;
    let phase = a
        .gradient
        .gradient()?
        .map_or_else(PhaseProfile::none, PhaseProfile::lower);
    let traj = evolve(&init.build(a.steps)?, a.steps, &CoinOp::balanced(), &phase)?;
    let (eu, ev) = loop_energy_series(&traj);
    let period = zitter_period(&eu)?;
    let dir = out_dir(&a.common)?;
    write_report(&[eu.with_scalar(Some(period)), ev], &dir.join("report.json"))?;
    Ok(format!("period={}\n", format_value(period)))
}

/// Steps in one Bloch period `4π/|α|`, rounded up.
fn bloch_period_steps(g: &Gradient) -> Result<usize> {
    match *g {
        Gradient::Rational { q, p } if q != 0 => Ok((2 * p).div_ceil(q.unsigned_abs()) as usize),
        Gradient::Float(a) if a != 0.0 => Ok((4.0 * std::f64::consts::PI / a.abs()).ceil() as usize),
        _ => bail!("a nonzero gradient is needed for one Bloch period"),
    }
}

fn lz_run(g: Gradient, steps: usize, init: &InitialSpec) -> Result<SeriesReport> {
    let phase = PhaseProfile::symmetric(g);
    let traj = evolve(&init.build(steps)?, steps, &CoinOp::balanced(), &phase)?;
    Ok(lz_transfer_series(&traj, g.radians())?)
}

fn default_packet() -> InitialSpec {
    InitialSpec::Packet {
        position: 0,
        width: 10.0,
        kappa: 0.0,
        band: fiberwalk::Band::Plus,
    }
}

fn cmd_lz(a: LzArgs) -> Result<String> {
    let g = a.gradient.gradient()?.unwrap_or(Gradient::rational(1, 5)?);
    let steps = match a.steps {
        Some(s) => s,
        None => bloch_period_steps(&g)?,
    };
    let init = site_or_packet(&a.initial, default_packet())?;
    let report = lz_run(g, steps, &init)?;
    let max = report.extracted_scalar.expect("transfer series carries its maximum");
    let dir = out_dir(&a.common)?;
    write_report(&[report], &dir.join("report.json"))?;
    Ok(format!("max_transfer={}\n", format_value(max)))
}

struct SweepRow {
    p: u64,
    steps: usize,
    peak_step: usize,
    peak_fidelity: f64,
    max_transfer: f64,
}

fn sweep_point(p: u64, steps: Option<usize>, width: f64) -> Result<SweepRow> {
    let period = 2 * p as usize;
    let steps = steps.unwrap_or(period).max(period);
    let g = Gradient::rational(1, p as i64)?;
    let start = make_initial(0, Spinor::down(), (0, 0))?;
    let traj = evolve(&start, steps, &CoinOp::balanced(), &PhaseProfile::lower(g))?;
    let rec = bloch_recovery(&traj, p)?;
    let h = fiberwalk::walk::packet_half_width(width);
    let packet = make_packet(0, width, 0.0, fiberwalk::Band::Plus, (-h, h))?;
    let lz = evolve(&packet, period, &CoinOp::balanced(), &PhaseProfile::symmetric(g))?;
    let transfer = lz_transfer_series(&lz, g.radians())?;
    Ok(SweepRow {
        p,
        steps,
        peak_step: rec.peak_step,
        peak_fidelity: rec.peak_fidelity,
        max_transfer: transfer.extracted_scalar.expect("transfer series carries its maximum"),
    })
}

fn cmd_sweep(a: SweepArgs) -> Result<String> {
    if a.alpha_p.is_empty() || a.alpha_p.contains(&0) {
        bail!("--alpha-p needs a list of integers >= 1");
    }
    if !(a.packet_width >= 1.0) {
        bail!("--packet-width must be >= 1");
    }
    let rows = a
        .alpha_p
        .par_iter()
        .map(|&p| sweep_point(p, a.steps, a.packet_width).with_context(|| format!("p = {p}")))
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("p,alpha,steps,peak_step,peak_fidelity,max_transfer\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.p,
            format_value(fiberwalk::walk::bloch_gradient(r.p)),
            r.steps,
            r.peak_step,
            format_value(r.peak_fidelity),
            format_value(r.max_transfer),
        )
        .expect("string write");
    }
    let dir = out_dir(&a.common)?;
    let dest = dir.join("sweep.csv");
    fs::write(&dest, csv).with_context(|| format!("writing {}", dest.display()))?;
    Ok(format!("points={}\n", rows.len()))
}

fn cmd_presets() -> String {
    let mut s = String::new();
    for p in Preset::ALL {
        writeln!(s, "{}: {}", p.name(), p.description()).expect("string write");
    }
    s
}

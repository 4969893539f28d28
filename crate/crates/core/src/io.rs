//! Run configuration, intensity-grid CSV, PGM heatmaps and JSON reports.
//!
//! All writers are deterministic: identical inputs give identical bytes.
//!
//! # Config grammar
//!
//! A run is described in TOML. Unknown keys are rejected.
//!
//! ```toml
//! steps = 70                 # integer >= 0
//! record_every = 1           # optional, integer >= 1 (default 1)
//! outputs = ["grid-u", "grid-v", "heatmap-u", "heatmap-v"]   # optional
//! series = ["loop-energy", "variance", "fidelity"]           # optional
//!
//! [initial]
//! position = 0
//! spinor = "down"            # "up" | "down" | "plus" | [re_up, im_up, re_down, im_down]
//! # or, instead of spinor:
//! # packet = { width = 10.0, kappa = 0.0, band = "plus" }
//!
//! [phase]
//! mode = "linear-rational"   # α = 2π·q/p
//! q = 1
//! p = 32
//! split = "lower"            # optional: "lower" (default) | "upper" | "symmetric"
//! # mode = "linear-float" takes `alpha` (radians per site) and `split`;
//! # mode = "tabulated" takes `n_min`, `phi_u` and `phi_v` arrays.
//!
//! [coin]                     # optional, default (1/√2)[[1, i], [i, 1]]
//! entries = [[re, im], [re, im], [re, im], [re, im]]   # c11, c12, c21, c22
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::SeriesReport;
use crate::error::{Error, Result};
use crate::walk::{
    make_initial, make_packet, packet_half_width, Amp, Band, CoinOp, Gradient, IntensityGrid,
    PhaseProfile, Spinor, WalkState,
};

/// Files a run can write.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutputKind {
    GridU,
    GridV,
    GridTotal,
    HeatmapU,
    HeatmapV,
    HeatmapTotal,
}

impl OutputKind {
    pub const ALL: [OutputKind; 6] = [
        OutputKind::GridU,
        OutputKind::GridV,
        OutputKind::GridTotal,
        OutputKind::HeatmapU,
        OutputKind::HeatmapV,
        OutputKind::HeatmapTotal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            OutputKind::GridU => "grid-u",
            OutputKind::GridV => "grid-v",
            OutputKind::GridTotal => "grid-total",
            OutputKind::HeatmapU => "heatmap-u",
            OutputKind::HeatmapV => "heatmap-v",
            OutputKind::HeatmapTotal => "heatmap-total",
        }
    }

    pub fn file_name(&self) -> &'static str {
        match self {
            OutputKind::GridU => "grid_u.csv",
            OutputKind::GridV => "grid_v.csv",
            OutputKind::GridTotal => "grid_total.csv",
            OutputKind::HeatmapU => "heatmap_u.pgm",
            OutputKind::HeatmapV => "heatmap_v.pgm",
            OutputKind::HeatmapTotal => "heatmap_total.pgm",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Analyses a run can attach to its report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    LoopEnergy,
    Variance,
    Fidelity,
    Corner,
    Centroid,
    LzTransfer,
}

impl SeriesKind {
    pub const ALL: [SeriesKind; 6] = [
        SeriesKind::LoopEnergy,
        SeriesKind::Variance,
        SeriesKind::Fidelity,
        SeriesKind::Corner,
        SeriesKind::Centroid,
        SeriesKind::LzTransfer,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SeriesKind::LoopEnergy => "loop-energy",
            SeriesKind::Variance => "variance",
            SeriesKind::Fidelity => "fidelity",
            SeriesKind::Corner => "corner",
            SeriesKind::Centroid => "centroid",
            SeriesKind::LzTransfer => "lz-transfer",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    Site {
        position: i64,
        spinor: Spinor,
    },
    Packet {
        position: i64,
        width: f64,
        kappa: f64,
        band: Band,
    },
}

impl InitialSpec {
    /// Initial state on the smallest window that holds it; evolution grows
    /// the window to the light cone.
    pub fn build(&self, steps: usize) -> Result<WalkState> {
        match *self {
            InitialSpec::Site { position, spinor } => {
                let s = steps as i64;
                make_initial(position, spinor, (position - s, position + s))
            }
            InitialSpec::Packet {
                position,
                width,
                kappa,
                band,
            } => {
                let h = packet_half_width(width);
                make_packet(position, width, kappa, band, (position - h, position + h))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig4,
    Fig5,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Fig2, Preset::Fig4, Preset::Fig5];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    /// `(q, p)` of the gradient `α = 2π·q/p`.
    pub fn gradient(&self) -> (i64, i64) {
        match self {
            Preset::Fig2 => (0, 1),
            Preset::Fig4 => (1, 32),
            Preset::Fig5 => (1, 5),
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Preset::Fig2 => "70 steps from |down>|0>, no phase gradient (ballistic spreading)",
            Preset::Fig4 => "70 steps from |down>|0>, alpha = 2pi/32 (Bloch oscillation)",
            Preset::Fig5 => "70 steps from |down>|0>, alpha = 2pi/5 (Landau-Zener tunneling)",
        }
    }
}

/// Validated run description.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub steps: usize,
    pub record_every: usize,
    pub initial: InitialSpec,
    pub phase: PhaseProfile,
    pub coin: CoinOp,
    pub outputs: Vec<OutputKind>,
    pub series: Vec<SeriesKind>,
}

pub const DEFAULT_OUTPUTS: [OutputKind; 4] = [
    OutputKind::GridU,
    OutputKind::GridV,
    OutputKind::HeatmapU,
    OutputKind::HeatmapV,
];

pub const DEFAULT_SERIES: [SeriesKind; 3] = [
    SeriesKind::LoopEnergy,
    SeriesKind::Variance,
    SeriesKind::Fidelity,
];

impl RunConfig {
    pub fn preset(preset: Preset) -> Self {
        let (q, p) = preset.gradient();
        RunConfig {
            steps: 70,
            record_every: 1,
            initial: InitialSpec::Site {
                position: 0,
                spinor: Spinor::down(),
            },
            phase: PhaseProfile::rational(q, p).expect("preset gradients are valid"),
            coin: CoinOp::balanced(),
            outputs: DEFAULT_OUTPUTS.to_vec(),
            series: DEFAULT_SERIES.to_vec(),
        }
    }

    pub fn initial_state(&self) -> Result<WalkState> {
        self.initial.build(self.steps)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    steps: i64,
    record_every: Option<i64>,
    initial: RawInitial,
    phase: RawPhase,
    coin: Option<RawCoin>,
    outputs: Option<Vec<String>>,
    series: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    position: i64,
    spinor: Option<RawSpinor>,
    packet: Option<RawPacket>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSpinor {
    Named(String),
    Components([f64; 4]),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPacket {
    width: f64,
    kappa: f64,
    band: String,
}

#[derive(Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
enum RawPhase {
    LinearRational {
        q: i64,
        p: i64,
        split: Option<String>,
    },
    LinearFloat {
        alpha: f64,
        split: Option<String>,
    },
    Tabulated {
        n_min: i64,
        phi_u: Vec<f64>,
        phi_v: Vec<f64>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoin {
    entries: [[f64; 2]; 4],
}

pub fn parse_spinor(name: &str) -> Option<Spinor> {
    match name {
        "up" => Some(Spinor::up()),
        "down" => Some(Spinor::down()),
        "plus" => Some(Spinor::plus()),
        _ => None,
    }
}

pub fn parse_band(name: &str) -> Option<Band> {
    match name {
        "plus" => Some(Band::Plus),
        "minus" => Some(Band::Minus),
        _ => None,
    }
}

/// How a linear gradient is distributed over the two loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Lower,
    Upper,
    Symmetric,
}

impl Split {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "lower" => Some(Split::Lower),
            "upper" => Some(Split::Upper),
            "symmetric" => Some(Split::Symmetric),
            _ => None,
        }
    }

    pub fn apply(&self, g: Gradient) -> PhaseProfile {
        match self {
            Split::Lower => PhaseProfile::lower(g),
            Split::Upper => PhaseProfile::split(g, Gradient::ZERO),
            Split::Symmetric => PhaseProfile::symmetric(g),
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn parse_split(split: Option<String>) -> Result<Split> {
    match split {
        None => Ok(Split::Lower),
        Some(s) => Split::from_name(&s).ok_or_else(|| {
            Error::config("phase.split", format!("expected lower, upper or symmetric, got `{s}`"))
        }),
    }
}

/// Parses and validates a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        Error::ConfigSyntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;

    let steps = usize::try_from(raw.steps)
        .map_err(|_| Error::config("steps", format!("must be >= 0, got {}", raw.steps)))?;
    let record_every = match raw.record_every {
        None => 1,
        Some(k) if k >= 1 => k as usize,
        Some(k) => return Err(Error::config("record_every", format!("must be >= 1, got {k}"))),
    };

    let position = raw.initial.position;
    let initial = match (raw.initial.spinor, raw.initial.packet) {
        (Some(_), Some(_)) => {
            return Err(Error::config("initial", "give either `spinor` or `packet`, not both"))
        }
        (None, None) => return Err(Error::config("initial", "missing `spinor` or `packet`")),
        (Some(sp), None) => {
            let spinor = match sp {
                RawSpinor::Named(name) => parse_spinor(&name).ok_or_else(|| {
                    Error::config("initial.spinor", format!("unknown spinor `{name}`"))
                })?,
                RawSpinor::Components([a, b, c, d]) => {
                    Spinor::new(Amp::new(a, b), Amp::new(c, d))
                }
            };
            let n = spinor.norm_sqr();
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::config("initial.spinor", "spinor must be finite and non-null"));
            }
            InitialSpec::Site { position, spinor }
        }
        (None, Some(pk)) => {
            if !(pk.width >= 1.0) || !pk.width.is_finite() {
                return Err(Error::config(
                    "initial.packet.width",
                    format!("must be >= 1, got {}", pk.width),
                ));
            }
            if !pk.kappa.is_finite() {
                return Err(Error::config("initial.packet.kappa", "must be finite"));
            }
            let band = parse_band(&pk.band).ok_or_else(|| {
                Error::config("initial.packet.band", format!("expected plus or minus, got `{}`", pk.band))
            })?;
            InitialSpec::Packet {
                position,
                width: pk.width,
                kappa: pk.kappa,
                band,
            }
        }
    };

    let phase = match raw.phase {
        RawPhase::LinearRational { q, p, split } => {
            let g = Gradient::rational(q, p)
                .map_err(|_| Error::config("phase.p", format!("must be >= 1, got {p}")))?;
            parse_split(split)?.apply(g)
        }
        RawPhase::LinearFloat { alpha, split } => {
            let g = Gradient::float(alpha)
                .map_err(|_| Error::config("phase.alpha", format!("must be finite, got {alpha}")))?;
            parse_split(split)?.apply(g)
        }
        RawPhase::Tabulated { n_min, phi_u, phi_v } => PhaseProfile::tabulated(n_min, phi_u, phi_v)
            .map_err(|e| Error::config("phase", e.to_string()))?,
    };

    let coin = match raw.coin {
        None => CoinOp::balanced(),
        Some(RawCoin { entries: e }) => {
            let c = |i: usize| Amp::new(e[i][0], e[i][1]);
            CoinOp::new(c(0), c(1), c(2), c(3))
                .map_err(|e| Error::config("coin.entries", e.to_string()))?
        }
    };

    let outputs = match raw.outputs {
        None => DEFAULT_OUTPUTS.to_vec(),
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(i, s)| {
                OutputKind::from_name(s)
                    .ok_or_else(|| Error::config(format!("outputs[{i}]"), format!("unknown output `{s}`")))
            })
            .collect::<Result<_>>()?,
    };
    let series = match raw.series {
        None => DEFAULT_SERIES.to_vec(),
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(i, s)| {
                SeriesKind::from_name(s)
                    .ok_or_else(|| Error::config(format!("series[{i}]"), format!("unknown series `{s}`")))
            })
            .collect::<Result<_>>()?,
    };

    Ok(RunConfig {
        steps,
        record_every,
        initial,
        phase,
        coin,
        outputs,
        series,
    })
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Shortest decimal that parses back to the same double. Plain notation in
/// `[1e-5, 1e16)`, scientific otherwise, `0` for zero.
pub fn format_value(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".to_string()
    } else if (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// CSV text: header `m,<n_min>,...,<n_max>`, then one row per recorded step.
pub fn grid_csv(grid: &IntensityGrid) -> String {
    let mut out = String::with_capacity(grid.data.len() * 12);
    out.push('m');
    for n in grid.n_min..=grid.n_max() {
        write!(out, ",{n}").expect("string write");
    }
    out.push('\n');
    for (r, m) in grid.m_values.iter().enumerate() {
        write!(out, "{m}").expect("string write");
        for &x in grid.row(r) {
            out.push(',');
            out.push_str(&format_value(x));
        }
        out.push('\n');
    }
    out
}

fn write_file(dest: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: dest.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(dest).map_err(io_err)?;
    f.write_all(bytes).map_err(io_err)?;
    f.flush().map_err(io_err)
}

pub fn write_grid(grid: &IntensityGrid, dest: &Path) -> Result<()> {
    write_file(dest, grid_csv(grid).as_bytes())
}

/// Parses text produced by [`grid_csv`].
pub fn parse_grid(text: &str) -> Result<IntensityGrid> {
    let bad = |msg: &str| Error::MalformedGrid(msg.to_string());
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))?;
    let mut cols = header.split(',');
    if cols.next() != Some("m") {
        return Err(bad("header must start with `m`"));
    }
    let ns = cols
        .map(|c| c.parse::<i64>().map_err(|_| bad("bad position in header")))
        .collect::<Result<Vec<_>>>()?;
    let n_min = *ns.first().ok_or_else(|| bad("no positions"))?;
    if ns.iter().enumerate().any(|(i, &n)| n != n_min + i as i64) {
        return Err(bad("positions must be consecutive"));
    }
    let mut m_values = Vec::new();
    let mut data = Vec::new();
    for line in lines {
        let mut cells = line.split(',');
        let m = cells
            .next()
            .and_then(|c| c.parse::<usize>().ok())
            .ok_or_else(|| bad("bad step index"))?;
        let before = data.len();
        for c in cells {
            data.push(c.parse::<f64>().map_err(|_| bad("bad intensity"))?);
        }
        if data.len() - before != ns.len() {
            return Err(bad("row length does not match header"));
        }
        m_values.push(m);
    }
    Ok(IntensityGrid {
        n_min,
        width: ns.len(),
        m_values,
        data,
    })
}

pub fn read_grid(path: &Path) -> Result<IntensityGrid> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_grid(&text)
}

/// Six decades below the grid maximum map to black.
pub const LOG_DECADES: f64 = 6.0;

/// `round(255·(log₁₀(I/I_max) + 6)/6)` clamped to `[0, 255]`; zero stays 0.
pub fn heatmap_pixel(intensity: f64, max: f64) -> u8 {
    if !(intensity > 0.0) || !(max > 0.0) {
        return 0;
    }
    let level = 255.0 * ((intensity / max).log10() + LOG_DECADES) / LOG_DECADES;
    level.round().clamp(0.0, 255.0) as u8
}

/// Binary PGM (P5): one column per position, one row per recorded step.
pub fn heatmap_pgm(grid: &IntensityGrid) -> Vec<u8> {
    let max = grid.max();
    let mut out = format!("P5\n{} {}\n255\n", grid.width, grid.rows()).into_bytes();
    out.extend(grid.data.iter().map(|&i| heatmap_pixel(i, max)));
    out
}

pub fn write_heatmap(grid: &IntensityGrid, dest: &Path) -> Result<()> {
    write_file(dest, &heatmap_pgm(grid))
}

#[derive(Serialize)]
struct ReportFile<'a> {
    reports: &'a [SeriesReport],
}

/// Pretty JSON `{"reports": [...]}` with a trailing newline.
pub fn report_json(reports: &[SeriesReport]) -> String {
    let mut s = serde_json::to_string_pretty(&ReportFile { reports }).expect("reports serialize");
    s.push('\n');
    s
}

pub fn write_report(reports: &[SeriesReport], dest: &Path) -> Result<()> {
    write_file(dest, report_json(reports).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::{evolve, GridKind};
    use proptest::prelude::*;

    const FIG2: &str = r#"
steps = 70

[initial]
position = 0
spinor = "down"

[phase]
mode = "linear-rational"
q = 0
p = 1
"#;

    #[test]
    fn minimal_config_is_fig2() {
        assert_eq!(parse_config(FIG2).unwrap(), RunConfig::preset(Preset::Fig2));
    }

    #[test]
    fn gradient_configs_match_presets() {
        let fig4 = FIG2.replace("q = 0\np = 1", "q = 1\np = 32");
        assert_eq!(parse_config(&fig4).unwrap(), RunConfig::preset(Preset::Fig4));
        let fig5 = FIG2.replace("q = 0\np = 1", "q = 1\np = 5");
        assert_eq!(parse_config(&fig5).unwrap(), RunConfig::preset(Preset::Fig5));
        // 2/64 reduces to 1/32.
        let scaled = FIG2.replace("q = 0\np = 1", "q = 2\np = 64");
        assert_eq!(parse_config(&scaled).unwrap().phase, RunConfig::preset(Preset::Fig4).phase);
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let typo = FIG2.replace("steps = 70", "stepz = 70");
        match parse_config(&typo) {
            Err(Error::ConfigSyntax { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("stepz"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let nested = FIG2.replace("p = 1", "p = 1\nalpha = 3.0");
        assert!(matches!(parse_config(&nested), Err(Error::ConfigSyntax { .. })));
    }

    #[test]
    fn syntax_error_has_line_and_column() {
        match parse_config("steps = 70\n[initial\n") {
            Err(Error::ConfigSyntax { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column >= 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invariant_violations_name_the_key() {
        let cases = [
            (FIG2.replace("steps = 70", "steps = -1"), "steps"),
            (FIG2.replace("p = 1", "p = 0"), "phase.p"),
            (FIG2.replace("\"down\"", "[0, 0, 0, 0]"), "initial.spinor"),
            (FIG2.replace("\"down\"", "\"sideways\""), "initial.spinor"),
            (format!("record_every = 0\n{FIG2}"), "record_every"),
            (format!("outputs = [\"grid-x\"]\n{FIG2}"), "outputs[0]"),
            (format!("series = [\"variance\", \"nope\"]\n{FIG2}"), "series[1]"),
            (
                format!("{FIG2}\n[coin]\nentries = [[1, 0], [1, 0], [0, 0], [1, 0]]\n"),
                "coin.entries",
            ),
            (FIG2.replace("p = 1", "p = 1\nsplit = \"middle\""), "phase.split"),
        ];
        for (text, key) in cases {
            match parse_config(&text) {
                Err(Error::ConfigValue { path, .. }) => assert_eq!(path, key),
                other => panic!("{key}: {other:?}"),
            }
        }
    }

    #[test]
    fn full_config() {
        let text = r#"
steps = 40
record_every = 2
outputs = ["grid-total", "heatmap-total"]
series = ["lz-transfer", "centroid"]

[initial]
position = 3
packet = { width = 10.0, kappa = 0.25, band = "minus" }

[phase]
mode = "linear-float"
alpha = 0.1
split = "symmetric"

[coin]
entries = [[0.7071067811865476, 0], [0, 0.7071067811865476], [0, 0.7071067811865476], [0.7071067811865476, 0]]
"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.steps, 40);
        assert_eq!(c.record_every, 2);
        assert_eq!(c.outputs, vec![OutputKind::GridTotal, OutputKind::HeatmapTotal]);
        assert_eq!(c.series, vec![SeriesKind::LzTransfer, SeriesKind::Centroid]);
        assert_eq!(
            c.initial,
            InitialSpec::Packet {
                position: 3,
                width: 10.0,
                kappa: 0.25,
                band: Band::Minus
            }
        );
        assert_eq!(c.phase, PhaseProfile::symmetric(Gradient::Float(0.1)));
        assert!(c.coin.is_balanced());
        let s = c.initial_state().unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tabulated_and_component_spinor() {
        let text = r#"
steps = 2
[initial]
position = 0
spinor = [0.6, 0, 0, 0.8]
[phase]
mode = "tabulated"
n_min = -2
phi_u = [0, 0, 0, 0, 0]
phi_v = [0.1, 0.2, 0.3, 0.4, 0.5]
"#;
        let c = parse_config(text).unwrap();
        assert_eq!(
            c.initial,
            InitialSpec::Site {
                position: 0,
                spinor: Spinor::new(Amp::new(0.6, 0.0), Amp::new(0.0, 0.8))
            }
        );
        assert_eq!(c.phase.phases_at(2), Some((0.0, 0.5)));
        let bad = text.replace("phi_u = [0, 0, 0, 0, 0]", "phi_u = [0]");
        assert!(matches!(parse_config(&bad), Err(Error::ConfigValue { .. })));
    }

    #[test]
    fn spinor_and_packet_are_exclusive() {
        let both = FIG2.replace(
            "spinor = \"down\"",
            "spinor = \"down\"\npacket = { width = 8.0, kappa = 0.0, band = \"plus\" }",
        );
        assert!(matches!(parse_config(&both), Err(Error::ConfigValue { path, .. }) if path == "initial"));
        let narrow = FIG2.replace(
            "spinor = \"down\"",
            "packet = { width = 0.5, kappa = 0.0, band = \"plus\" }",
        );
        assert!(
            matches!(parse_config(&narrow), Err(Error::ConfigValue { path, .. }) if path == "initial.packet.width")
        );
    }

    #[test]
    fn value_formatting() {
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(1.0), "1");
        assert_eq!(format_value(0.5), "0.5");
        assert_eq!(format_value(0.25), "0.25");
        assert_eq!(format_value(2f64.powi(-70)), "8.470329472543003e-22");
        assert_eq!(format_value(1e-5), "0.00001");
    }

    fn fig2_grids() -> (IntensityGrid, IntensityGrid) {
        let c = RunConfig::preset(Preset::Fig2);
        let t = evolve(&c.initial_state().unwrap(), c.steps, &c.coin, &c.phase).unwrap();
        (t.grid(GridKind::U), t.grid(GridKind::V))
    }

    #[test]
    fn grid_csv_layout() {
        let (_, v) = fig2_grids();
        let csv = grid_csv(&v);
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("m,-70,-69,"));
        assert!(header.ends_with(",69,70"));
        let row0: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row0[0], "0");
        assert_eq!(row0[71], "1");
        assert_eq!(row0.iter().filter(|c| **c == "0").count(), 141);
        let row1: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row1[0], "1");
        assert!((row1[72].parse::<f64>().unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(csv.lines().count(), 72);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn grid_round_trip_is_bit_exact() {
        let (u, v) = fig2_grids();
        for g in [u, v] {
            let back = parse_grid(&grid_csv(&g)).unwrap();
            assert_eq!(back.n_min, g.n_min);
            assert_eq!(back.m_values, g.m_values);
            for (a, b) in back.data.iter().zip(&g.data) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn pixel_scale() {
        assert_eq!(heatmap_pixel(1.0, 1.0), 255);
        assert_eq!(heatmap_pixel(1e-6, 1.0), 0);
        assert_eq!(heatmap_pixel(1e-3, 1.0), 128);
        assert_eq!(heatmap_pixel(0.0, 1.0), 0);
        assert_eq!(heatmap_pixel(1e-9, 1.0), 0);
        assert_eq!(heatmap_pixel(0.25, 0.25), 255);
    }

    #[test]
    fn pgm_layout() {
        let (_, v) = fig2_grids();
        let pgm = heatmap_pgm(&v);
        let header = b"P5\n141 71\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        assert_eq!(pgm.len(), header.len() + 141 * 71);
        // m = 0 row: the start site is the maximum.
        assert_eq!(pgm[header.len() + 70], 255);
        assert_eq!(pgm[header.len()], 0);
    }

    #[test]
    fn report_json_shape() {
        assert_eq!(report_json(&[]), "{\n  \"reports\": []\n}\n");
        let r = SeriesReport::new("energy_u", vec![0, 1], vec![0.0, 0.5])
            .unwrap()
            .with_scalar(Some(4.0));
        let j = report_json(&[r.clone()]);
        assert!(j.contains("\"extracted_scalar\": 4.0"));
        let pos = |k: &str| j.find(k).unwrap();
        assert!(pos("\"name\"") < pos("\"m_values\""));
        assert!(pos("\"values\"") < pos("\"extracted_scalar\""));
        assert_eq!(j, report_json(&[r]));
    }

    #[test]
    fn write_to_missing_directory_fails() {
        let (_, v) = fig2_grids();
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("missing").join("g.csv");
        assert!(matches!(write_grid(&v, &bad), Err(Error::Io { .. })));
        let ok = dir.path().join("g.csv");
        write_grid(&v, &ok).unwrap();
        assert_eq!(read_grid(&ok).unwrap(), v);
    }

    proptest! {
        #[test]
        fn formatted_values_round_trip(x in proptest::num::f64::POSITIVE | proptest::num::f64::ZERO) {
            let s = format_value(x);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}

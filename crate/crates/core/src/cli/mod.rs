//! Command-line front end.
//!
//! Every numeric setting resolves in three layers: built-in defaults, an
//! optional flat JSON config file (`--config`, kebab-case keys), then flags.
//! The resolved config is echoed into a manifest next to the outputs.

mod svg;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::Error;
use crate::fieldmodel::{
    closeness_window, count_local_maxima, default_object_grid, default_spectrum_grid,
    direct_spectrum, fmt17, forward_image_kernel, object_profile, project_coeffs,
    rayleigh_distance, reconstruct_object, reconstruct_spectrum, relative_rms, uniform_grid,
    FieldProfile, ObjectField,
};
use crate::metrics::{
    imaging_psf, log_spaced, reconstruction_psf, superres_factor, sweep_s_vs_n, sweep_to_csv,
};
use crate::prolate::{load_basis, save_basis, ProlateBasis};
use crate::stochastic::{run_ensemble, NoiseKind, NoiseModel};
use svg::{polyline_plot, Series};

/// Environment variable naming the basis cache directory.
pub const CACHE_ENV: &str = "PROLATOSCOPE_CACHE";
const DEFAULT_CACHE_DIR: &str = "prolatoscope-cache";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_MISSING_BASIS: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectKind {
    DoubleGaussian,
    Rect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct RunConfig {
    pub c: f64,
    pub modes: usize,
    pub precision_bits: usize,
    pub object: ObjectKind,
    pub s0: f64,
    pub sigma: f64,
    pub eps: f64,
    pub photons: f64,
    #[serde(rename = "L")]
    pub l: Vec<usize>,
    pub model: NoiseKind,
    /// Squeezing parameter; ignored for coherent light.
    pub r: f64,
    pub trials: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
    /// Relative RMS threshold for spectrum closeness.
    pub closeness: f64,
    /// Half-width of the spectrum window the closeness check covers.
    pub window: f64,
    pub sweep_min_exp: f64,
    pub sweep_max_exp: f64,
    pub sweep_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            c: 1.0,
            modes: 18,
            precision_bits: crate::prolate::DEFAULT_PRECISION_BITS,
            object: ObjectKind::DoubleGaussian,
            s0: 0.5,
            sigma: 0.1,
            eps: crate::metrics::DEFAULT_PROBE_EPS,
            photons: 1e12,
            l: vec![7],
            model: NoiseKind::Coherent,
            r: 10f64.ln(),
            trials: 5,
            seed: 1,
            out_dir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
            closeness: crate::fieldmodel::DEFAULT_CLOSENESS,
            window: 8.0,
            sweep_min_exp: 3.0,
            sweep_max_exp: 15.0,
            sweep_points: 13,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be positive, got {v}"))
            }
        };
        positive("c", self.c)?;
        positive("sigma", self.sigma)?;
        positive("photons", self.photons)?;
        positive("closeness", self.closeness)?;
        positive("window", self.window)?;
        if self.modes == 0 {
            return Err("modes must be at least 1".into());
        }
        if self.precision_bits < crate::prolate::MIN_PRECISION_BITS {
            return Err(format!(
                "precision-bits must be at least {}",
                crate::prolate::MIN_PRECISION_BITS
            ));
        }
        if !(0.0..1.0).contains(&self.s0) {
            return Err(format!("s0 must lie in [0, 1), got {}", self.s0));
        }
        if !(self.eps > 0.0 && self.eps <= 2.0) {
            return Err(format!("eps must lie in (0, 2], got {}", self.eps));
        }
        if self.l.is_empty() {
            return Err("L list must not be empty".into());
        }
        if let Some(bad) = self.l.iter().find(|&&l| l == 0 || l > self.modes) {
            return Err(format!(
                "L = {bad} must lie in 1..={} (the basis size)",
                self.modes
            ));
        }
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(format!("r must be finite and non-negative, got {}", self.r));
        }
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        if self.sweep_points == 0 || !(self.sweep_max_exp >= self.sweep_min_exp) {
            return Err("sweep range must be non-empty".into());
        }
        Ok(())
    }

    pub fn noise_model(&self) -> NoiseModel {
        match self.model {
            NoiseKind::Coherent => NoiseModel::coherent(),
            NoiseKind::Squeezed => NoiseModel {
                kind: NoiseKind::Squeezed,
                r: self.r,
            },
        }
    }

    fn object(&self, photons: f64) -> crate::Result<ObjectField> {
        match self.object {
            ObjectKind::DoubleGaussian => {
                ObjectField::double_gaussian(photons, self.s0, self.sigma)
            }
            ObjectKind::Rect => ObjectField::rect(photons, self.eps),
        }
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "prolatoscope",
    version,
    about = "Prolate-function super-resolution toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute (or reuse) the prolate basis and print its eigenvalues.
    Basis(Flags),
    /// Object, pupil-plane spectrum and diffraction-limited image.
    Forward(Flags),
    /// Noise-free reconstructions for each L.
    Reconstruct(Flags),
    /// Seeded ensemble of noisy reconstructions.
    Montecarlo(Flags),
    /// Imaging and reconstruction point-spread functions.
    Psf(Flags),
    /// Super-resolution factor against photon number.
    Sweep(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Flat JSON config with kebab-case keys; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    precision_bits: Option<usize>,
    #[arg(long, value_enum)]
    object: Option<ObjectKind>,
    #[arg(long)]
    s0: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    photons: Option<f64>,
    #[arg(long = "L", value_delimiter = ',')]
    l: Option<Vec<usize>>,
    #[arg(long, value_parser = parse_model)]
    model: Option<NoiseKind>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',')]
    formats: Option<Vec<Format>>,
    #[arg(long)]
    closeness: Option<f64>,
    #[arg(long)]
    window: Option<f64>,
    #[arg(long)]
    sweep_min_exp: Option<f64>,
    #[arg(long)]
    sweep_max_exp: Option<f64>,
    #[arg(long)]
    sweep_points: Option<usize>,
    /// Recompute the basis even when a cached copy exists.
    #[arg(long)]
    force: bool,
}

fn parse_model(s: &str) -> Result<NoiseKind, String> {
    match s {
        "coherent" => Ok(NoiseKind::Coherent),
        "squeezed" => Ok(NoiseKind::Squeezed),
        _ => Err(format!(
            "unknown model '{s}' (expected coherent or squeezed)"
        )),
    }
}

#[derive(Debug)]
enum CliError {
    Config(String),
    MissingBasis(PathBuf),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::MissingBasis(_) => EXIT_MISSING_BASIS,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(Error::InvalidArgument(_) | Error::Domain { .. }) => EXIT_CONFIG,
            CliError::Core(Error::Io { .. }) => EXIT_IO,
            // corrupt cache files are a numerical-artifact failure
            CliError::Core(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => format!("configuration error: {m}"),
            CliError::MissingBasis(p) => format!(
                "basis file {} not found; run `prolatoscope basis` with the same --c, --modes and --precision-bits first",
                p.display()
            ),
            CliError::Core(e) => e.to_string(),
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> CliResult<()> {
    let (name, flags) = match &cmd {
        Command::Basis(f) => ("basis", f),
        Command::Forward(f) => ("forward", f),
        Command::Reconstruct(f) => ("reconstruct", f),
        Command::Montecarlo(f) => ("montecarlo", f),
        Command::Psf(f) => ("psf", f),
        Command::Sweep(f) => ("sweep", f),
    };
    let cfg = resolve_config(flags)?;
    let mut out = Outputs::new(name, &cfg)?;
    match cmd {
        Command::Basis(f) => cmd_basis(&cfg, f.force, &mut out)?,
        Command::Forward(_) => cmd_forward(&cfg, &mut out)?,
        Command::Reconstruct(_) => cmd_reconstruct(&cfg, &mut out)?,
        Command::Montecarlo(_) => cmd_montecarlo(&cfg, &mut out)?,
        Command::Psf(_) => cmd_psf(&cfg, &mut out)?,
        Command::Sweep(_) => cmd_sweep(&cfg, &mut out)?,
    }
    out.write_manifest()
}

fn resolve_config(flags: &Flags) -> CliResult<RunConfig> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    macro_rules! take {
        ($($field:ident => $target:ident),* $(,)?) => {
            $(if let Some(v) = &flags.$field { cfg.$target = v.clone(); })*
        };
    }
    take!(
        c => c, modes => modes, precision_bits => precision_bits, object => object,
        s0 => s0, sigma => sigma, eps => eps, photons => photons, l => l, model => model,
        r => r, trials => trials, seed => seed, out_dir => out_dir, formats => formats,
        closeness => closeness, window => window, sweep_min_exp => sweep_min_exp,
        sweep_max_exp => sweep_max_exp, sweep_points => sweep_points,
    );
    cfg.validate().map_err(CliError::Config)?;
    Ok(cfg)
}

fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
}

/// Cache file for a `(c, K, precision)` triple.
pub fn basis_path(dir: &Path, c: f64, modes: usize, bits: usize) -> PathBuf {
    dir.join(format!("basis-c{c}-K{modes}-p{bits}.txt"))
}

fn require_basis(cfg: &RunConfig, out: &mut Outputs) -> CliResult<ProlateBasis> {
    let path = basis_path(&cache_dir(), cfg.c, cfg.modes, cfg.precision_bits);
    if !path.exists() {
        return Err(CliError::MissingBasis(path));
    }
    let basis = load_basis(&path)?;
    out.basis = Some((path, basis.checksum()));
    Ok(basis)
}

/// Writes outputs and records them for the manifest.
struct Outputs {
    command: &'static str,
    config: RunConfig,
    dir: PathBuf,
    files: Vec<String>,
    basis: Option<(PathBuf, String)>,
    extra: serde_json::Map<String, serde_json::Value>,
}

impl Outputs {
    fn new(command: &'static str, cfg: &RunConfig) -> CliResult<Self> {
        std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
        Ok(Outputs {
            command,
            config: cfg.clone(),
            dir: cfg.out_dir.clone(),
            files: Vec::new(),
            basis: None,
            extra: serde_json::Map::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn csv(&mut self, name: &str, content: &str) -> CliResult<()> {
        if self.config.wants(Format::Csv) {
            self.write(name, content)?;
        }
        Ok(())
    }

    fn json(&mut self, name: &str, value: &serde_json::Value) -> CliResult<()> {
        if self.config.wants(Format::Json) {
            let mut text = serde_json::to_string_pretty(value).expect("serializable");
            text.push('\n');
            self.write(name, &text)?;
        }
        Ok(())
    }

    fn svg(&mut self, name: &str, title: &str, series: &[Series<'_>]) -> CliResult<()> {
        if self.config.wants(Format::Svg) {
            self.write(name, &polyline_plot(title, series))?;
        }
        Ok(())
    }

    fn profile(&mut self, name: &str, p: &FieldProfile) -> CliResult<()> {
        self.csv(&format!("{name}.csv"), &p.to_csv())?;
        let re = p.real_parts();
        self.svg(
            &format!("{name}.svg"),
            name,
            &[Series {
                label: "Re",
                x: &p.grid,
                y: &re,
            }],
        )
    }

    /// The manifest always gets written; its `timestamp` line is the only
    /// run-dependent content.
    fn write_manifest(&mut self) -> CliResult<()> {
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut m = serde_json::Map::new();
        m.insert("command".into(), json!(self.command));
        m.insert(
            "config".into(),
            serde_json::to_value(&self.config).expect("serializable"),
        );
        m.insert("cache_dir".into(), json!(cache_dir()));
        if let Some((path, sum)) = &self.basis {
            m.insert("basis_file".into(), json!(path));
            m.insert("basis_checksum".into(), json!(sum));
        }
        m.insert("outputs".into(), json!(self.files));
        m.extend(self.extra.clone());
        m.insert("timestamp".into(), json!(format!("unix:{stamp}")));
        let mut text =
            serde_json::to_string_pretty(&serde_json::Value::Object(m)).expect("serializable");
        text.push('\n');
        let path = self.dir.join(format!("manifest-{}.json", self.command));
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }
}

/// Stdout that tolerates a closed pipe.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

fn cmd_basis(cfg: &RunConfig, force: bool, out: &mut Outputs) -> CliResult<()> {
    let dir = cache_dir();
    let path = basis_path(&dir, cfg.c, cfg.modes, cfg.precision_bits);
    let cached = if path.exists() && !force {
        match load_basis(&path) {
            Ok(b) => Some(b),
            Err(e) => {
                eprintln!(
                    "warning: ignoring unusable cache file {}: {e}",
                    path.display()
                );
                None
            }
        }
    } else {
        None
    };
    let hit = cached.is_some();
    let basis = match cached {
        Some(b) => {
            say!("cache hit: {}", path.display());
            b
        }
        None => {
            let b = ProlateBasis::build(cfg.c, cfg.modes, cfg.precision_bits)?;
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            save_basis(&b, &path)?;
            say!("computed: {}", path.display());
            b
        }
    };
    out.basis = Some((path, basis.checksum()));
    out.extra.insert("cache_hit".into(), json!(hit));
    out.extra
        .insert("matrix_order".into(), json!(basis.matrix_order()));

    let mut table = String::from("n,lambda\n");
    say!("{:>4}  lambda", "n");
    for m in basis.modes() {
        let s = m.lambda_extended().to_sci_string(17);
        say!("{:>4}  {s}", m.index());
        table.push_str(&format!("{},{s}\n", m.index()));
    }
    out.csv("lambda.csv", &table)
}

fn cmd_forward(cfg: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let basis = require_basis(cfg, out)?;
    let object = cfg.object(cfg.photons)?;
    let s_grid = default_object_grid();
    let xi_grid = default_spectrum_grid();

    let obj = object_profile(&object, cfg.c, &s_grid)?;
    let spectrum = direct_spectrum(&object, cfg.c, &xi_grid)?;
    let image = forward_image_kernel(&object, cfg.c, &s_grid)?;
    out.profile("object", &obj)?;
    out.profile("spectrum", &spectrum)?;
    out.profile("image", &image)?;

    let separation = 2.0 * cfg.s0;
    let rayleigh = rayleigh_distance(basis.c())?;
    out.json(
        "forward.json",
        &json!({
            "c": cfg.c,
            "photons": cfg.photons,
            "pupil_passband": [-1.0, 1.0],
            "rayleigh_distance": rayleigh,
            "peak_separation": separation,
            "beyond_rayleigh_limit": cfg.object == ObjectKind::DoubleGaussian && separation < rayleigh,
            "image_local_maxima": count_local_maxima(&image.real_parts()),
        }),
    )
}

fn cmd_reconstruct(cfg: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let basis = require_basis(cfg, out)?;
    let object = cfg.object(cfg.photons)?;
    let coeffs = project_coeffs(&object, &basis, basis.num_modes())?;
    let s_grid = uniform_grid(-1.0, 1.0, 1e-3)?;
    let xi_grid = default_spectrum_grid();
    let exact = direct_spectrum(&object, cfg.c, &xi_grid)?;

    let mut summaries = Vec::new();
    let mut deviations: Vec<Vec<f64>> = Vec::new();
    let mut spectra = Vec::new();
    for &l in &cfg.l {
        let rec = reconstruct_object(&coeffs, &basis, l, &s_grid)?;
        let spec = reconstruct_spectrum(&coeffs, &basis, l, &xi_grid)?;
        out.profile(&format!("reconstruction-L{l}"), &rec)?;
        out.profile(&format!("reconstructed-spectrum-L{l}"), &spec)?;
        deviations.push(
            spec.values
                .iter()
                .zip(&exact.values)
                .map(|(a, e)| (a - e).norm())
                .collect(),
        );
        summaries.push(json!({
            "L": l,
            "relative_rms": relative_rms(&spec, &exact, cfg.window)?,
            "window": cfg.window,
            "closeness_window": closeness_window(&spec, &exact, cfg.closeness)?,
            "reconstruction_local_maxima": count_local_maxima(&rec.real_parts()),
        }));
        spectra.push((l, spec));
    }

    let mut table = String::from("xi,exact_re,exact_im");
    for &l in &cfg.l {
        table.push_str(&format!(",abs_dev_L{l}"));
    }
    table.push('\n');
    for (i, x) in xi_grid.iter().enumerate() {
        table.push_str(&format!(
            "{},{},{}",
            fmt17(*x),
            fmt17(exact.values[i].re),
            fmt17(exact.values[i].im)
        ));
        for d in &deviations {
            table.push(',');
            table.push_str(&fmt17(d[i]));
        }
        table.push('\n');
    }
    out.csv("deviation.csv", &table)?;

    let exact_re = exact.real_parts();
    let re: Vec<(String, Vec<f64>)> = spectra
        .iter()
        .map(|(l, s)| (format!("L={l}"), s.real_parts()))
        .collect();
    let mut series = vec![Series {
        label: "exact",
        x: &xi_grid,
        y: &exact_re,
    }];
    series.extend(re.iter().map(|(lab, y)| Series {
        label: lab,
        x: &xi_grid,
        y,
    }));
    out.svg("spectra.svg", "reconstructed spectra", &series)?;

    out.json(
        "reconstruct.json",
        &json!({ "c": cfg.c, "threshold": cfg.closeness, "results": summaries }),
    )
}

fn cmd_montecarlo(cfg: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let basis = require_basis(cfg, out)?;
    let object = cfg.object(cfg.photons)?;
    let l = cfg.l[0];
    let model = cfg.noise_model();
    let ens = run_ensemble(&object, &basis, l, &model, cfg.trials, cfg.seed)?;
    let grid = default_spectrum_grid();
    let spectra = ens.trial_spectra(&basis, &grid)?;
    let clean = ens.noise_free_spectrum(&basis, &grid)?;
    let rel = ens.relative_deviation(&basis, &grid)?;

    let mut table = String::from("xi");
    for t in 0..spectra.len() {
        table.push_str(&format!(",trial_{t}_re,trial_{t}_im"));
    }
    table.push_str(",mean_re,mean_im,noise_free_re,noise_free_im,relative_deviation\n");
    let n = spectra.len() as f64;
    for (i, x) in grid.iter().enumerate() {
        table.push_str(&fmt17(*x));
        let mut mean = Complex64::new(0.0, 0.0);
        for s in &spectra {
            table.push_str(&format!(",{},{}", fmt17(s[i].re), fmt17(s[i].im)));
            mean += s[i];
        }
        mean /= n;
        table.push_str(&format!(
            ",{},{},{},{},{}\n",
            fmt17(mean.re),
            fmt17(mean.im),
            fmt17(clean[i].re),
            fmt17(clean[i].im),
            fmt17(rel[i])
        ));
    }
    out.csv("ensemble.csv", &ens.to_csv())?;
    out.csv("spectra.csv", &table)?;
    out.json("ensemble.json", &ens.summary_json())?;

    let clean_re: Vec<f64> = clean.iter().map(|v| v.re).collect();
    let trial_re: Vec<(String, Vec<f64>)> = spectra
        .iter()
        .enumerate()
        .take(5)
        .map(|(t, s)| (format!("trial {t}"), s.iter().map(|v| v.re).collect()))
        .collect();
    let mut series = vec![Series {
        label: "noise-free",
        x: &grid,
        y: &clean_re,
    }];
    series.extend(trial_re.iter().map(|(lab, y)| Series {
        label: lab,
        x: &grid,
        y,
    }));
    out.svg("spectra.svg", "noisy reconstructed spectra", &series)
}

fn cmd_psf(cfg: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let basis = require_basis(cfg, out)?;
    let l = cfg.l[0];
    let img = imaging_psf(cfg.c)?;
    let rec = reconstruction_psf(&basis, l)?;
    let sr = superres_factor(&basis, l)?;
    let table = |grid: &[f64], vals: &[f64]| {
        let mut t = String::from("s,h\n");
        for (s, v) in grid.iter().zip(vals) {
            t.push_str(&format!("{},{}\n", fmt17(*s), fmt17(*v)));
        }
        t
    };
    out.csv("psf-imaging.csv", &table(&img.grid, &img.values))?;
    out.csv("psf-reconstruction.csv", &table(&rec.grid, &rec.values))?;
    out.svg(
        "psf.svg",
        "point-spread functions",
        &[
            Series {
                label: "imaging",
                x: &img.grid,
                y: &img.values,
            },
            Series {
                label: "reconstruction",
                x: &rec.grid,
                y: &rec.values,
            },
        ],
    )?;
    out.json(
        "psf.json",
        &json!({ "c": cfg.c, "L": l, "W": sr.w, "W_L": sr.w_l, "S": sr.s }),
    )
}

fn cmd_sweep(cfg: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let basis = require_basis(cfg, out)?;
    let photons = log_spaced(cfg.sweep_min_exp, cfg.sweep_max_exp, cfg.sweep_points);
    let models = [
        NoiseModel::coherent(),
        NoiseModel {
            kind: NoiseKind::Squeezed,
            r: cfg.r,
        },
    ];
    let points = sweep_s_vs_n(&photons, &models, &basis, cfg.eps)?;
    out.csv("sweep.csv", &sweep_to_csv(&points))?;
    let per_model: Vec<(String, Vec<f64>, Vec<f64>)> = models
        .iter()
        .map(|m| {
            let pts: Vec<_> = points.iter().filter(|p| p.model == m.kind).collect();
            (
                m.kind.as_str().to_string(),
                pts.iter().map(|p| p.photons.log10()).collect(),
                pts.iter().map(|p| p.s).collect(),
            )
        })
        .collect();
    let series: Vec<Series<'_>> = per_model
        .iter()
        .map(|(lab, x, y)| Series { label: lab, x, y })
        .collect();
    out.svg("sweep.svg", "S against log10 N", &series)?;
    out.json(
        "sweep.json",
        &json!({
            "c": cfg.c,
            "basis_checksum": basis.checksum(),
            "eps": cfg.eps,
            "r": cfg.r,
            "points": points,
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn config_file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cfg.json");
        std::fs::write(
            &p,
            r#"{"c": 2.0, "L": [5, 7], "model": "squeezed", "out-dir": "x"}"#,
        )
        .unwrap();
        let flags = Flags {
            config: Some(p),
            c: Some(3.0),
            ..Default::default()
        };
        let cfg = resolve_config(&flags).unwrap();
        assert_eq!(cfg.c, 3.0);
        assert_eq!(cfg.l, vec![5, 7]);
        assert_eq!(cfg.model, NoiseKind::Squeezed);
        assert_eq!(cfg.out_dir, PathBuf::from("x"));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cfg.json");
        std::fs::write(&p, r#"{"speed": 1}"#).unwrap();
        let flags = Flags {
            config: Some(p),
            ..Default::default()
        };
        assert!(matches!(resolve_config(&flags), Err(CliError::Config(_))));
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for flags in [
            Flags {
                modes: Some(0),
                ..Default::default()
            },
            Flags {
                l: Some(vec![19]),
                ..Default::default()
            },
            Flags {
                c: Some(-1.0),
                ..Default::default()
            },
        ] {
            assert!(matches!(resolve_config(&flags), Err(CliError::Config(_))));
        }
    }

    #[test]
    fn parse_errors_exit_two() {
        assert_eq!(run(["prolatoscope", "basis", "--modes", "x"]), EXIT_CONFIG);
        assert_eq!(run(["prolatoscope", "nonsense"]), EXIT_CONFIG);
        assert_eq!(
            run(["prolatoscope", "psf", "--model", "thermal"]),
            EXIT_CONFIG
        );
    }

    #[test]
    fn cache_file_name() {
        assert_eq!(
            basis_path(Path::new("/tmp"), 1.0, 18, 256),
            PathBuf::from("/tmp/basis-c1-K18-p256.txt")
        );
    }
}

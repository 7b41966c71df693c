//! Command-line front end: configuration, subcommands and file output.
//!
//! Frequencies in configuration files, flags and output files are
//! ordinary-frequency linewidths in MHz (FWHM); they are converted once to
//! angular frequency, `Γ = 2π·f`, on the way in and back on the way out.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use crate::elements::{binary_flip_time, CavityParams};
use crate::error::{invalid, Error, Result};
use crate::estimation::synthetic::{self, HistogramLayout};
use crate::estimation::{fit_exponential_decay, fit_reabsorption, decay_model_counts, DataSeries, FitResult};
use crate::metrics::{bandwidth_b50, power_spectrum, BandwidthReport};
use crate::optimizer::{minimize, CompressionPipeline, FlipMode, Modulation, SearchSpace, Stage};
use crate::sampling::AxisPair;
use crate::spectroscopy::{reabsorbed_unchecked, scan, symmetric_detunings, FPParams};
use crate::units::{mhz_to_rad_per_s, ns_to_s, rad_per_s_to_mhz, s_to_ns};
use crate::wavepacket::PhotonParams;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_)
        | Error::DegenerateParameters(_)
        | Error::Parse { .. }
        | Error::NoDecay => EXIT_INVALID,
        Error::OptimizationFailed(_) => EXIT_NOT_CONVERGED,
        Error::EmptyPhase | Error::GridMismatch(_) | Error::Io(_) => EXIT_FAILURE,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Tsv,
}

impl OutputFormat {
    fn delimiter(self) -> u8 {
        match self {
            Self::Csv => b',',
            Self::Tsv => b'\t',
        }
    }

    fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Tsv => "tsv",
        }
    }
}

/// Resolved run configuration. Linewidths in MHz, times in ns.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gamma_p_mhz: f64,
    pub t0_ns: f64,
    pub gamma_c_mhz: f64,
    pub detuning_mhz: f64,
    pub gamma_fp_mhz: f64,
    pub gamma_a_mhz: f64,
    pub n_samples: usize,
    pub time_span_factor: f64,
    pub scan_span_mhz: f64,
    pub scan_points: usize,
    pub output_directory: PathBuf,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            gamma_p_mhz: 20.6,
            t0_ns: 0.0,
            gamma_c_mhz: 7.3,
            detuning_mhz: 0.0,
            gamma_fp_mhz: 2.6,
            gamma_a_mhz: 6.06,
            n_samples: crate::sampling::DEFAULT_SAMPLES,
            time_span_factor: crate::sampling::DEFAULT_SPAN_FACTOR,
            scan_span_mhz: 60.0,
            scan_points: 241,
            output_directory: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    /// Parse flat `key = value` text; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i as u64 + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|message| Error::Parse { line, message })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let num = || value.parse::<f64>().map_err(|e| format!("{key}: {e}"));
        match key {
            "photon.gamma_p_mhz" => self.gamma_p_mhz = num()?,
            "photon.t0_ns" => self.t0_ns = num()?,
            "cavity.gamma_c_mhz" => self.gamma_c_mhz = num()?,
            "cavity.detuning_mhz" => self.detuning_mhz = num()?,
            "fp.gamma_fp_mhz" => self.gamma_fp_mhz = num()?,
            "fit.gamma_a_mhz" => self.gamma_a_mhz = num()?,
            "grid.n_samples" => self.n_samples = value.parse().map_err(|e| format!("{key}: {e}"))?,
            "grid.time_span_factor" => self.time_span_factor = num()?,
            "scan.span_mhz" => self.scan_span_mhz = num()?,
            "scan.points" => self.scan_points = value.parse().map_err(|e| format!("{key}: {e}"))?,
            "output.directory" => self.output_directory = PathBuf::from(value),
            "output.format" => {
                self.format = OutputFormat::from_str(value, true).map_err(|_| format!("unknown output format `{value}`"))?
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("photon.gamma_p_mhz", self.gamma_p_mhz),
            ("cavity.gamma_c_mhz", self.gamma_c_mhz),
            ("fp.gamma_fp_mhz", self.gamma_fp_mhz),
            ("fit.gamma_a_mhz", self.gamma_a_mhz),
            ("grid.time_span_factor", self.time_span_factor),
            ("scan.span_mhz", self.scan_span_mhz),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{key} must be positive, got {v}")));
            }
        }
        if !(self.t0_ns.is_finite() && self.detuning_mhz.is_finite()) {
            return Err(invalid("t0 and detuning must be finite"));
        }
        if !self.n_samples.is_power_of_two() || self.n_samples < crate::sampling::MIN_SAMPLES {
            return Err(invalid(format!("grid.n_samples must be a power of two, got {}", self.n_samples)));
        }
        if self.scan_points < 3 {
            return Err(invalid("scan.points must be at least 3"));
        }
        Ok(())
    }

    /// Canonical `key = value` rendering without the output location; its
    /// hash identifies the run.
    pub fn render(&self) -> String {
        let entries = [
            ("cavity.detuning_mhz", self.detuning_mhz.to_string()),
            ("cavity.gamma_c_mhz", self.gamma_c_mhz.to_string()),
            ("fit.gamma_a_mhz", self.gamma_a_mhz.to_string()),
            ("fp.gamma_fp_mhz", self.gamma_fp_mhz.to_string()),
            ("grid.n_samples", self.n_samples.to_string()),
            ("grid.time_span_factor", self.time_span_factor.to_string()),
            ("output.format", self.format.extension().to_string()),
            ("photon.gamma_p_mhz", self.gamma_p_mhz.to_string()),
            ("photon.t0_ns", self.t0_ns.to_string()),
            ("scan.points", self.scan_points.to_string()),
            ("scan.span_mhz", self.scan_span_mhz.to_string()),
        ];
        entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn gamma_p(&self) -> f64 {
        mhz_to_rad_per_s(self.gamma_p_mhz)
    }

    pub fn photon(&self) -> Result<PhotonParams> {
        PhotonParams::new(self.gamma_p(), ns_to_s(self.t0_ns))
    }

    pub fn axes(&self) -> Result<AxisPair> {
        AxisPair::with_span_factor(self.n_samples, self.time_span_factor, self.gamma_p(), ns_to_s(self.t0_ns))
    }

    pub fn cavity(&self) -> Result<CavityParams> {
        CavityParams::new(mhz_to_rad_per_s(self.gamma_c_mhz), mhz_to_rad_per_s(self.detuning_mhz))
    }
}

#[derive(Debug, Parser)]
#[command(name = "ccomp", version, about = "Cavity-based spectral compression of heralded single photons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides output.directory).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Skip the phase modulator.
    #[arg(long, global = true)]
    pub no_modulator: bool,
    /// Cavity linewidth, MHz FWHM.
    #[arg(long, global = true, value_name = "X", allow_hyphen_values = true)]
    pub gamma_c_mhz: Option<f64>,
    /// Photon–cavity detuning, MHz.
    #[arg(long, global = true, value_name = "X", allow_hyphen_values = true)]
    pub detuning_mhz: Option<f64>,
    /// Seed for synthetic data (fit commands without --input).
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Measured data CSV for the fit commands.
    #[arg(long, global = true, value_name = "PATH")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate the photon through cavity and modulator and report bandwidths.
    Simulate,
    /// Minimize the compressed bandwidth over cavity linewidth and detuning.
    Optimize(SpaceArgs),
    /// Emulate a Fabry-Pérot scan of the uncompressed and compressed photon.
    ScanFp,
    /// Fit an exponential decay to a coincidence histogram.
    FitTemporal,
    /// Fit the reabsorbed Lorentzian to a Fabry-Pérot scan.
    FitSpectrum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlipArg {
    Analytic,
    Free,
    Conjugate,
}

/// Search space in units of Γp (flip times in 1/Γp).
#[derive(Debug, Clone, Args)]
pub struct SpaceArgs {
    #[arg(long, default_value_t = 0.05)]
    pub gamma_c_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma_c_max: f64,
    #[arg(long, default_value_t = 25)]
    pub gamma_c_points: usize,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    pub detuning_min: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub detuning_max: f64,
    #[arg(long, default_value_t = 21)]
    pub detuning_points: usize,
    #[arg(long, value_enum, default_value_t = FlipArg::Analytic)]
    pub flip_mode: FlipArg,
    #[arg(long, default_value_t = 1.0)]
    pub flip_min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub flip_max: f64,
    #[arg(long, default_value_t = 13)]
    pub flip_points: usize,
}

/// Run the command line and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Execute a parsed command; returns `EXIT_NOT_CONVERGED` for fits that
/// wrote results without converging.
pub fn execute(cli: &Cli) -> Result<i32> {
    let mut cfg = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.common.out {
        cfg.output_directory = out.clone();
    }
    if let Some(v) = cli.common.gamma_c_mhz {
        cfg.gamma_c_mhz = v;
    }
    if let Some(v) = cli.common.detuning_mhz {
        cfg.detuning_mhz = v;
    }
    cfg.validate()?;

    let mut out = Output::create(&cfg)?;
    let (name, converged) = match &cli.command {
        Command::Simulate => ("simulate", cmd_simulate(&cfg, &cli.common, &mut out)?),
        Command::Optimize(space) => ("optimize", cmd_optimize(&cfg, &cli.common, space, &mut out)?),
        Command::ScanFp => ("scan-fp", cmd_scan_fp(&cfg, &cli.common, &mut out)?),
        Command::FitTemporal => ("fit-temporal", cmd_fit_temporal(&cfg, &cli.common, &mut out)?),
        Command::FitSpectrum => ("fit-spectrum", cmd_fit_spectrum(&cfg, &cli.common, &mut out)?),
    };
    out.manifest(name, &cfg, cli.common.seed)?;
    Ok(if converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

/// Collects written files for the manifest.
struct Output {
    dir: PathBuf,
    format: OutputFormat,
    files: Vec<PathBuf>,
}

impl Output {
    fn create(cfg: &RunConfig) -> Result<Self> {
        fs::create_dir_all(&cfg.output_directory)?;
        Ok(Self {
            dir: cfg.output_directory.clone(),
            format: cfg.format,
            files: Vec::new(),
        })
    }

    fn table<R>(&mut self, stem: &str, comments: &[String], header: &[&str], rows: R) -> Result<()>
    where
        R: IntoIterator<Item = Vec<String>>,
    {
        let path = self.dir.join(format!("{stem}.{}", self.format.extension()));
        let mut file = BufWriter::new(File::create(&path)?);
        for c in comments {
            writeln!(file, "# {c}")?;
        }
        let mut w = csv::WriterBuilder::new()
            .delimiter(self.format.delimiter())
            .from_writer(file);
        w.write_record(header).map_err(csv_io)?;
        for row in rows {
            w.write_record(&row).map_err(csv_io)?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn key_values(&mut self, name: &str, entries: &[(String, String)]) -> Result<()> {
        let path = self.dir.join(name);
        let mut file = BufWriter::new(File::create(&path)?);
        for (k, v) in entries {
            writeln!(file, "{k} = {v}")?;
        }
        file.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn manifest(&self, command: &str, cfg: &RunConfig, seed: Option<u64>) -> Result<()> {
        let path = self.dir.join("manifest.txt");
        let mut file = BufWriter::new(File::create(&path)?);
        writeln!(file, "toolkit = {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))?;
        writeln!(file, "command = {command}")?;
        writeln!(file, "config_sha256 = {}", sha256_hex(cfg.render().as_bytes()))?;
        if let Some(seed) = seed {
            writeln!(file, "seed = {seed}")?;
        }
        for f in &self.files {
            let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            writeln!(file, "file = {name} {}", sha256_hex(&fs::read(f)?))?;
        }
        file.flush()?;
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(io::Error::other(e))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn num(v: f64) -> String {
    v.to_string()
}

fn kv(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

fn modulation_for(cfg: &RunConfig, common: &CommonArgs) -> Result<Modulation> {
    if common.no_modulator {
        return Ok(Modulation::None);
    }
    let flip = binary_flip_time(cfg.gamma_p(), mhz_to_rad_per_s(cfg.gamma_c_mhz)).map_err(|e| {
        invalid(format!("{e}; the binary flip needs gamma_c < gamma_p (use --no-modulator)"))
    })?;
    Ok(Modulation::BinaryFlip { flip_time: flip })
}

/// Power density per MHz of ordinary frequency.
fn density_per_mhz(density_per_rad: f64) -> f64 {
    density_per_rad * mhz_to_rad_per_s(1.0)
}

fn bandwidth_entries(prefix: &str, r: &BandwidthReport, gamma_p: f64) -> Vec<(String, String)> {
    vec![
        kv(&format!("b50_{prefix}_mhz"), num(rad_per_s_to_mhz(r.b50))),
        kv(&format!("b50_{prefix}_over_gamma_p"), num(r.b50 / gamma_p)),
        kv(&format!("b50_{prefix}_window_lo_mhz"), num(rad_per_s_to_mhz(r.window_lo))),
        kv(&format!("b50_{prefix}_window_hi_mhz"), num(rad_per_s_to_mhz(r.window_hi))),
        kv(
            &format!("fwhm_{prefix}_mhz"),
            r.fwhm.map_or("ambiguous".to_string(), |w| num(rad_per_s_to_mhz(w))),
        ),
        kv(&format!("peak_density_{prefix}_per_mhz"), num(density_per_mhz(r.peak_density))),
        kv(&format!("energy_{prefix}"), num(r.total_energy)),
    ]
}

fn cmd_simulate(cfg: &RunConfig, common: &CommonArgs, out: &mut Output) -> Result<bool> {
    let gamma_p = cfg.gamma_p();
    let pipeline = CompressionPipeline::new(cfg.photon()?, cfg.axes()?)?;
    let modulation = modulation_for(cfg, common)?;
    let result = pipeline.run(&cfg.cavity()?, &modulation)?;
    let axes = *pipeline.axes();

    // time window from 5/Γp before the herald to 30/Γp after it
    let t0 = ns_to_s(cfg.t0_ns);
    let (t_lo, t_hi) = (t0 - 5.0 / gamma_p, t0 + 30.0 / gamma_p);
    let temporal = |psi: &crate::wavepacket::TemporalWavepacket| -> Vec<Vec<String>> {
        psi.intensity()
            .iter()
            .enumerate()
            .map(|(i, v)| (axes.time(i), v))
            .filter(|(t, _)| *t >= t_lo && *t <= t_hi)
            .map(|(t, v)| vec![num(s_to_ns(t)), num(v * 1e-9)])
            .collect()
    };
    let comment = |what: &str| {
        vec![
            what.to_string(),
            "t_ns: time in ns; intensity: |psi|^2 in 1/ns".to_string(),
        ]
    };
    let input_t = crate::sampling::inverse_transform(&result.input_spectrum)?;
    out.table("temporal_input", &comment("heralded photon before the cavity"), &["t_ns", "intensity"], temporal(&input_t))?;
    out.table("temporal_dispersed", &comment("after cavity reflection"), &["t_ns", "intensity"], temporal(&result.dispersed))?;
    out.table("temporal_modulated", &comment("after the phase modulator"), &["t_ns", "intensity"], temporal(&result.modulated))?;

    let w_max = 10.0 * gamma_p;
    let spectral = |power: &[f64]| -> Vec<Vec<String>> {
        power
            .iter()
            .enumerate()
            .map(|(k, p)| (axes.frequency(k), p))
            .filter(|(w, _)| w.abs() <= w_max)
            .map(|(w, p)| vec![num(rad_per_s_to_mhz(w)), num(density_per_mhz(*p))])
            .collect()
    };
    let spec_comment = |what: &str| {
        vec![
            what.to_string(),
            "detuning_mhz: offset from the photon carrier in MHz; power_density: per MHz".to_string(),
        ]
    };
    let p_in = power_spectrum(&result.input_spectrum);
    let p_out = power_spectrum(&result.output_spectrum);
    out.table("spectrum_input", &spec_comment("power spectrum before compression"), &["detuning_mhz", "power_density"], spectral(&p_in))?;
    out.table("spectrum_compressed", &spec_comment("power spectrum after the modulator"), &["detuning_mhz", "power_density"], spectral(&p_out))?;

    let before = bandwidth_b50(&p_in, &axes)?;
    let after = bandwidth_b50(&p_out, &axes)?;
    let window_row = |name: &str, r: &BandwidthReport| {
        vec![
            name.to_string(),
            num(rad_per_s_to_mhz(r.window_lo)),
            num(rad_per_s_to_mhz(r.window_hi)),
            num(rad_per_s_to_mhz(r.b50)),
        ]
    };
    out.table(
        "b50_windows",
        &["smallest windows holding half the energy, MHz".to_string()],
        &["spectrum", "window_lo_mhz", "window_hi_mhz", "b50_mhz"],
        vec![window_row("input", &before), window_row("compressed", &after)],
    )?;

    let mut summary = vec![
        kv("gamma_p_mhz", num(rad_per_s_to_mhz(gamma_p))),
        kv("gamma_c_mhz", num(rad_per_s_to_mhz(mhz_to_rad_per_s(cfg.gamma_c_mhz)))),
        kv("detuning_mhz", num(rad_per_s_to_mhz(mhz_to_rad_per_s(cfg.detuning_mhz)))),
        kv("gamma_c_over_gamma_p", num(cfg.gamma_c_mhz / cfg.gamma_p_mhz)),
        kv("t0_ns", num(cfg.t0_ns)),
    ];
    match modulation {
        Modulation::BinaryFlip { flip_time } => {
            summary.push(kv("modulator", "binary_flip"));
            summary.push(kv("flip_time_ns", num(s_to_ns(flip_time))));
            summary.push(kv("flip_time_gamma_p", num(flip_time * gamma_p)));
        }
        _ => summary.push(kv("modulator", "off")),
    }
    summary.extend(bandwidth_entries("input", &before, gamma_p));
    summary.extend(bandwidth_entries("compressed", &after, gamma_p));
    summary.push(kv("b50_ratio", num(before.b50 / after.b50)));
    summary.push(kv("peak_density_ratio", num(after.peak_density / before.peak_density)));
    summary.push(kv("n_samples", axes.n_samples()));
    summary.push(kv("time_step_ns", num(s_to_ns(axes.time_step()))));
    summary.push(kv("frequency_step_mhz", num(rad_per_s_to_mhz(axes.frequency_step()))));
    out.key_values("summary.txt", &summary)?;
    Ok(true)
}

fn cmd_optimize(cfg: &RunConfig, common: &CommonArgs, args: &SpaceArgs, out: &mut Output) -> Result<bool> {
    let gamma_p = cfg.gamma_p();
    let fixed = |v: Option<f64>| v.map(|mhz| mhz / cfg.gamma_p_mhz);
    let gamma_c_range = match fixed(common.gamma_c_mhz) {
        Some(g) => (g, g),
        None => (args.gamma_c_min, args.gamma_c_max),
    };
    let detuning_range = match fixed(common.detuning_mhz) {
        Some(d) => (d, d),
        None => (args.detuning_min, args.detuning_max),
    };
    let flip_mode = match (common.no_modulator, args.flip_mode) {
        (true, _) => FlipMode::Off,
        (false, FlipArg::Analytic) => FlipMode::Analytic,
        (false, FlipArg::Free) => FlipMode::Free { range: (args.flip_min, args.flip_max) },
        (false, FlipArg::Conjugate) => FlipMode::Conjugate,
    };
    let space = SearchSpace {
        gamma_c_range,
        detuning_range,
        flip_mode,
        resolution: [args.gamma_c_points, args.detuning_points, args.flip_points],
    };
    let pipeline = CompressionPipeline::new(cfg.photon()?, cfg.axes()?)?;
    let opt = minimize(&space, &pipeline)?;

    let mode = match flip_mode {
        FlipMode::Analytic => "analytic",
        FlipMode::Free { .. } => "free",
        FlipMode::Conjugate => "conjugate",
        FlipMode::Off => "off",
    };
    let gp_mhz = rad_per_s_to_mhz(gamma_p);
    let mut entries = vec![
        kv("flip_mode", mode),
        kv("gamma_p_mhz", num(gp_mhz)),
        kv("gamma_c_opt_over_gamma_p", num(opt.gamma_c_opt)),
        kv("detuning_opt_over_gamma_p", num(opt.detuning_opt)),
        kv("b50_opt_over_gamma_p", num(opt.b50_opt)),
        kv("gamma_c_opt_mhz", num(opt.gamma_c_opt * gp_mhz)),
        kv("detuning_opt_mhz", num(opt.detuning_opt * gp_mhz)),
        kv("b50_opt_mhz", num(opt.b50_opt * gp_mhz)),
    ];
    if let Some(t) = opt.flip_time_opt {
        entries.push(kv("flip_time_opt_gamma_p", num(t)));
        entries.push(kv("flip_time_opt_ns", num(s_to_ns(t / gamma_p))));
    }
    entries.push(kv("evaluation_count", opt.evaluation_count));
    entries.push(kv("failed_evaluations", opt.failures().count()));
    out.key_values("optimum.txt", &entries)?;

    let rows = opt.trace.iter().map(|e| {
        vec![
            match e.stage {
                Stage::Grid => "grid".to_string(),
                Stage::Refine => "refine".to_string(),
            },
            num(e.gamma_c),
            num(e.detuning),
            e.flip_time.map(num).unwrap_or_default(),
            e.b50.map(num).unwrap_or_default(),
            e.error.clone().unwrap_or_default(),
        ]
    });
    out.table(
        "trace",
        &["objective evaluations; rates in units of gamma_p, flip times in 1/gamma_p".to_string()],
        &["stage", "gamma_c", "detuning", "flip_time", "b50", "error"],
        rows,
    )?;
    Ok(true)
}

fn cmd_scan_fp(cfg: &RunConfig, common: &CommonArgs, out: &mut Output) -> Result<bool> {
    let pipeline = CompressionPipeline::new(cfg.photon()?, cfg.axes()?)?;
    let modulation = modulation_for(cfg, common)?;
    let result = pipeline.run(&cfg.cavity()?, &modulation)?;
    let fp = FPParams::new(mhz_to_rad_per_s(cfg.gamma_fp_mhz))?;
    let detunings = symmetric_detunings(mhz_to_rad_per_s(cfg.scan_span_mhz), cfg.scan_points)?;
    let before = scan(&result.input_spectrum, &fp, &detunings)?;
    let after = scan(&result.output_spectrum, &fp, &detunings)?;
    let reference = before.peak();

    let comments = |what: &str| {
        vec![
            what.to_string(),
            "detuning_mhz: FP detuning in MHz; rate: transmitted rate relative to the uncompressed peak".to_string(),
        ]
    };
    let rows = |rates: &[f64]| -> Vec<Vec<String>> {
        detunings
            .iter()
            .zip(rates)
            .map(|(d, r)| vec![num(rad_per_s_to_mhz(*d)), num(r / reference)])
            .collect()
    };
    out.table("scan_uncompressed", &comments("FP scan of the uncompressed photon"), &["detuning_mhz", "rate"], rows(&before.rates))?;
    out.table("scan_compressed", &comments("FP scan of the compressed photon"), &["detuning_mhz", "rate"], rows(&after.rates))?;

    let width = |r: &crate::spectroscopy::ScanResult| {
        r.fwhm()
            .ok()
            .filter(|f| !f.ambiguous)
            .map_or("ambiguous".to_string(), |f| num(rad_per_s_to_mhz(f.width)))
    };
    let entries = vec![
        kv("gamma_p_mhz", num(cfg.gamma_p_mhz)),
        kv("gamma_c_mhz", num(cfg.gamma_c_mhz)),
        kv("gamma_fp_mhz", num(rad_per_s_to_mhz(fp.gamma_fp))),
        kv("modulator", if common.no_modulator { "off" } else { "binary_flip" }),
        kv("peak_rate_ratio", num(after.peak() / before.peak())),
        kv("scan_fwhm_uncompressed_mhz", width(&before)),
        kv("scan_fwhm_compressed_mhz", width(&after)),
    ];
    out.key_values("summary.txt", &entries)?;
    Ok(true)
}

/// Read a two- or three-column numeric table (`x, y[, y_err]`).
pub fn read_series(path: &Path) -> Result<(Vec<String>, DataSeries)> {
    let text = fs::read_to_string(path)?;
    parse_series(&text)
}

pub fn parse_series(text: &str) -> Result<(Vec<String>, DataSeries)> {
    let delimiter = if text.lines().any(|l| !l.starts_with('#') && l.contains('\t')) { b'\t' } else { b',' };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let parse_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        Error::Parse { line, message: e.to_string() }
    };
    let header: Vec<String> = reader.headers().map_err(parse_err)?.iter().map(str::to_string).collect();
    if !(2..=3).contains(&header.len()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected 2 or 3 columns, header has {}", header.len()),
        });
    }
    let (mut x, mut y, mut err) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(parse_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let values: Vec<f64> = record
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("`{f}`: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        x.push(values[0]);
        y.push(values[1]);
        if let Some(e) = values.get(2) {
            err.push(*e);
        }
    }
    let y_err = (header.len() == 3).then_some(err);
    Ok((header, DataSeries::new(x, y, y_err)?))
}

fn fit_entries(fit: &FitResult) -> Vec<(String, String)> {
    let mut entries = vec![
        kv("converged", fit.converged),
        kv("residual_norm", num(fit.residual_norm)),
        kv("gradient_norm", num(fit.gradient_norm)),
        kv("iterations", fit.iterations),
        kv("evaluations", fit.evaluations),
    ];
    for name in &fit.names {
        if let Some(se) = fit.std_error(name) {
            entries.push(kv(&format!("{name}_std_error"), num(se)));
        }
    }
    entries
}

fn cmd_fit_temporal(cfg: &RunConfig, common: &CommonArgs, out: &mut Output) -> Result<bool> {
    let data_ns = match &common.input {
        Some(path) => read_series(path)?.1,
        None => {
            let layout = HistogramLayout { start: -10e-9, bin_width: 0.5e-9, n_bins: 200 };
            let hist = synthetic::decay_histogram(
                &layout,
                cfg.gamma_p(),
                ns_to_s(cfg.t0_ns),
                1e5,
                Some(common.seed.unwrap_or(0)),
            )?;
            let series = DataSeries::new(hist.x.iter().map(|t| s_to_ns(*t)).collect(), hist.y, None)?;
            out.table(
                "synthetic_histogram",
                &["synthetic Poisson coincidence histogram".to_string(), "t_ns: bin centre in ns; counts per bin".to_string()],
                &["t_ns", "counts"],
                series.x.iter().zip(&series.y).map(|(t, c)| vec![num(*t), num(*c)]),
            )?;
            series
        }
    };
    let data = DataSeries::new(
        data_ns.x.iter().map(|t| ns_to_s(*t)).collect(),
        data_ns.y.clone(),
        data_ns.y_err.clone(),
    )?;
    let fit = fit_exponential_decay(&data)?;
    let gamma_p = fit.get("gamma_p").expect("fit reports gamma_p");
    let t0 = fit.get("t0").expect("fit reports t0");
    let amplitude = fit.get("amplitude").expect("fit reports amplitude");

    let mut entries = vec![
        kv("gamma_p_rad_per_s", num(gamma_p)),
        kv("gamma_p_mhz", num(rad_per_s_to_mhz(gamma_p))),
        kv("t0_ns", num(s_to_ns(t0))),
        kv("amplitude_counts_per_bin", num(amplitude)),
    ];
    entries.extend(fit_entries(&fit));
    out.key_values("fit.txt", &entries)?;

    let width = median_width(&data.x);
    let model = decay_model_counts(&data.x, width, gamma_p, t0, amplitude);
    out.table(
        "fit_curve",
        &["fitted exponential decay".to_string(), "t_ns: bin centre in ns; counts and fit per bin".to_string()],
        &["t_ns", "counts", "fit"],
        data_ns
            .x
            .iter()
            .zip(&data_ns.y)
            .zip(&model)
            .map(|((t, c), m)| vec![num(*t), num(*c), num(*m)]),
    )?;
    Ok(fit.converged)
}

fn median_width(x: &[f64]) -> f64 {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut d: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).collect();
    d.sort_by(f64::total_cmp);
    d[d.len() / 2]
}

fn cmd_fit_spectrum(cfg: &RunConfig, common: &CommonArgs, out: &mut Output) -> Result<bool> {
    // the lineshape is dimensionally homogeneous, so the fit runs in MHz
    let data = match &common.input {
        Some(path) => read_series(path)?.1,
        None => {
            let detunings = symmetric_detunings(cfg.scan_span_mhz, cfg.scan_points)?;
            let series = synthetic::reabsorption_scan(
                &detunings,
                1.0,
                cfg.gamma_p_mhz,
                cfg.gamma_a_mhz,
                1.0,
                0.02,
                Some(common.seed.unwrap_or(0)),
            )?;
            out.table(
                "synthetic_scan",
                &["synthetic FP scan with self-absorption, od = 1".to_string(), "detuning_mhz in MHz; rate in arbitrary units".to_string()],
                &["detuning_mhz", "rate"],
                series.x.iter().zip(&series.y).map(|(d, r)| vec![num(*d), num(*r)]),
            )?;
            series
        }
    };
    let fit = fit_reabsorption(&data, cfg.gamma_p_mhz, cfg.gamma_a_mhz)?;
    let od = fit.result.get("od").expect("fit reports od");
    let scale = fit.result.get("scale").expect("fit reports scale");

    let mut entries = vec![
        kv("od", num(od)),
        kv("scale_rate_mhz", num(scale)),
        kv("gamma_p_mhz", num(cfg.gamma_p_mhz)),
        kv("gamma_a_mhz", num(cfg.gamma_a_mhz)),
    ];
    entries.extend(fit_entries(&fit.result));
    out.key_values("fit.txt", &entries)?;

    let rows = data.x.iter().zip(&data.y).zip(&fit.lorentzian).map(|((d, r), l)| {
        vec![
            num(*d),
            num(*r),
            num(reabsorbed_unchecked(*d, od, cfg.gamma_p_mhz, cfg.gamma_a_mhz, scale)),
            num(*l),
        ]
    });
    out.table(
        "fit_curve",
        &[
            "fitted reabsorbed Lorentzian".to_string(),
            "detuning_mhz in MHz; fit includes self-absorption, lorentzian omits it".to_string(),
        ],
        &["detuning_mhz", "rate", "fit", "lorentzian"],
        rows,
    )?;
    Ok(fit.result.converged)
}

/// Parse a `key = value` file such as `summary.txt`.
pub fn read_key_values(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i as u64 + 1,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

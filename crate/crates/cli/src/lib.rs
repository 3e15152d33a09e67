//! Command-line front end for the `tdlab` experiments.
//!
//! Every subcommand writes a CSV table (see [`table`]) to `--output` or to
//! standard output. Exit status is 0 on success, 2 for usage errors and 3
//! when the numerics fail.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tdlab::signals::DEFAULT_SEED;
use tdlab::simulation::{channel, default_dt, default_transient, rms_error, run};
use tdlab::sweep::{sweep, tracking_bandwidth, SweepConfig};
use tdlab::uncertainty::{self, estimate_delta, simulate_plant};
use tdlab::{
    bode_table, first_order_response, linearize, log_space, preset, DiffParams, ExperimentPreset,
    FreqPoint, NoiseSpec, PlantConfig, SignalSpec, SimConfig, TdError, PRESET_NAMES,
};

pub mod table;

use table::write_table;

#[derive(Debug, Parser)]
#[command(name = "tdlab", version, about = "Tracking-differentiator experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equivalent second-order system of a differentiator
    Linearize(LinearizeArgs),
    /// Time-domain run on a (noisy) sinusoid
    Simulate(SimulateArgs),
    /// Analytic Bode table of the equivalent linearization
    Bode(BodeArgs),
    /// Swept-sine identification by simulation
    Sweep(SweepArgs),
    /// Disturbance reconstruction on the scalar uncertain plant
    Estimate(EstimateArgs),
    /// List the built-in presets
    Presets,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Start from a named preset; explicit gains override its values
    #[arg(long)]
    pub preset: Option<String>,
    /// Perturbation parameter
    #[arg(long, conflicts_with = "r")]
    pub eps: Option<f64>,
    /// 1/eps
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub a0: Option<f64>,
    #[arg(long)]
    pub a1: Option<f64>,
    #[arg(long)]
    pub b0: Option<f64>,
    #[arg(long)]
    pub b1: Option<f64>,
    /// Signed-power exponent
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SignalArgs {
    /// Input amplitude A
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Input frequency in rad/s
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub noise_power: Option<f64>,
    /// Noise hold interval in seconds
    #[arg(long)]
    pub sample_time: Option<f64>,
    /// Drop the noise channel entirely
    #[arg(long)]
    pub no_noise: bool,
    /// Seed of every stochastic channel
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// CSV destination (standard output when omitted)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write a gnuplot script that plots the CSV
    #[arg(long, requires = "output")]
    pub plot_script: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LinearizeArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Amplitude at which the signed-power terms are linearized
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Print one CSV row instead of the report
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub signal: SignalArgs,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub omega_min: Option<f64>,
    #[arg(long)]
    pub omega_max: Option<f64>,
    /// Number of log-spaced frequencies
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BodeArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Tabulate the first-order filter sqrt(a0)/eps / (s + sqrt(a0)/eps) instead
    #[arg(long)]
    pub first_order: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Whole periods correlated at each frequency
    #[arg(long, default_value_t = 5)]
    pub measure_periods: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub noise_power: Option<f64>,
    #[arg(long)]
    pub sample_time: Option<f64>,
    #[arg(long)]
    pub no_noise: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 20.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(TdError),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<TdError> for CliError {
    fn from(e: TdError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn lookup(name: &str) -> CliResult<ExperimentPreset> {
    preset(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown preset `{name}`; available: {}",
            PRESET_NAMES.join(", ")
        ))
    })
}

impl ParamArgs {
    fn preset(&self) -> CliResult<Option<ExperimentPreset>> {
        self.preset.as_deref().map(lookup).transpose()
    }

    fn any_gain(&self) -> bool {
        self.eps.is_some()
            || self.r.is_some()
            || self.a0.is_some()
            || self.a1.is_some()
            || self.b0.is_some()
            || self.b1.is_some()
            || self.alpha.is_some()
    }

    /// Preset values overridden by any explicit flag.
    pub fn resolve(&self, fallback: Option<&str>) -> CliResult<DiffParams> {
        let base = match (self.preset()?, fallback) {
            (Some(p), _) => Some(p.params),
            (None, Some(name)) if !self.any_gain() => Some(lookup(name)?.params),
            _ => None,
        };
        let mut p = match base {
            Some(p) => p,
            None => {
                if self.eps.is_none() && self.r.is_none() {
                    return Err(CliError::Usage(
                        "give --preset or at least --eps/--r and the gains".into(),
                    ));
                }
                DiffParams::hybrid(1.0, 0.0, 0.0, 0.0, 0.0, 1.0)
            }
        };
        if let Some(eps) = self.eps {
            p.eps = eps;
        }
        if let Some(r) = self.r {
            p.eps = 1.0 / r;
        }
        p.a0 = self.a0.unwrap_or(p.a0);
        p.a1 = self.a1.unwrap_or(p.a1);
        p.b0 = self.b0.unwrap_or(p.b0);
        p.b1 = self.b1.unwrap_or(p.b1);
        p.alpha = self.alpha.unwrap_or(p.alpha);
        p.validate()?;
        Ok(p)
    }
}

fn open_output<'a>(out: &OutputArgs, stdout: &'a mut dyn Write) -> CliResult<Box<dyn Write + 'a>> {
    Ok(match &out.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(stdout)),
    })
}

fn write_plot_script(
    out: &OutputArgs,
    title: &str,
    x: &str,
    columns: &[(usize, &str)],
) -> CliResult {
    let (Some(script), Some(csv)) = (&out.plot_script, &out.output) else {
        return Ok(());
    };
    let mut f = BufWriter::new(File::create(script)?);
    writeln!(
        f,
        "# gnuplot script; run with: gnuplot -p {}",
        script.display()
    )?;
    writeln!(f, "set datafile separator ','")?;
    writeln!(f, "set key autotitle columnhead")?;
    writeln!(f, "set title '{title}'")?;
    writeln!(f, "set xlabel '{x}'")?;
    if x.starts_with("omega") {
        writeln!(f, "set logscale x")?;
    }
    let csv = csv_path_for_script(csv);
    let plots: Vec<String> = columns
        .iter()
        .map(|(col, label)| format!("'{csv}' using 1:{col} with lines title '{label}'"))
        .collect();
    writeln!(f, "plot {}", plots.join(", \\\n     "))?;
    f.flush()?;
    Ok(())
}

fn csv_path_for_script(p: &Path) -> String {
    p.display().to_string().replace('\'', "''")
}

fn signal_from(args: &SignalArgs, base: SignalSpec) -> CliResult<SignalSpec> {
    let mut s = base;
    if let Some(a) = args.amplitude {
        s.amplitude = a;
    }
    if let Some(w) = args.omega {
        s.omega = w;
    }
    let mut noise = s.noise;
    if args.noise_power.is_some() || args.sample_time.is_some() {
        let n = noise.unwrap_or(NoiseSpec {
            power: 0.0,
            sample_time: 0.01,
            seed: DEFAULT_SEED,
        });
        noise = Some(NoiseSpec {
            power: args.noise_power.unwrap_or(n.power),
            sample_time: args.sample_time.unwrap_or(n.sample_time),
            ..n
        });
    }
    if args.no_noise {
        noise = None;
    }
    if let (Some(n), Some(seed)) = (noise.as_mut(), args.seed) {
        n.seed = seed;
    }
    s.noise = noise;
    s.validate()?;
    Ok(s)
}

fn grid_from(args: &GridArgs, lo: f64, hi: f64, n: usize) -> CliResult<Vec<f64>> {
    let lo = args.omega_min.unwrap_or(lo);
    let hi = args.omega_max.unwrap_or(hi);
    let n = args.points.unwrap_or(n);
    if !(lo > 0.0 && hi > lo) && n > 1 {
        return Err(CliError::Usage(format!(
            "need 0 < omega-min < omega-max, got {lo} and {hi}"
        )));
    }
    Ok(log_space(lo, hi, n))
}

/// Dispatches one parsed command. `log` receives human-readable summaries.
pub fn execute(cli: Cli, stdout: &mut dyn Write, log: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::Linearize(a) => cmd_linearize(&a, stdout),
        Command::Simulate(a) => cmd_simulate(&a, stdout, log),
        Command::Bode(a) => cmd_bode(&a, stdout),
        Command::Sweep(a) => cmd_sweep(&a, stdout, log),
        Command::Estimate(a) => cmd_estimate(&a, stdout, log),
        Command::Presets => cmd_presets(stdout),
    }
}

fn default_amplitude(params: &ParamArgs) -> CliResult<f64> {
    Ok(params
        .preset()?
        .map(|p| p.signal.amplitude.abs())
        .filter(|a| *a > 0.0)
        .unwrap_or(1.0))
}

pub fn cmd_linearize(a: &LinearizeArgs, out: &mut dyn Write) -> CliResult {
    let p = a.params.resolve(None)?;
    let amp = match a.amplitude {
        Some(x) => x,
        None => default_amplitude(&a.params)?,
    };
    let lin = linearize(&p, amp)?;
    if a.csv {
        write_table(
            out,
            &["omega_n", "zeta", "omega_d", "k_pos", "k_vel"],
            [[lin.omega_n, lin.zeta, lin.omega_d, lin.k_pos, lin.k_vel]],
        )?;
    } else {
        let den = lin.denominator();
        writeln!(out, "amplitude  A       = {amp}")?;
        writeln!(out, "natural frequency  = {:.6} rad/s", lin.omega_n)?;
        writeln!(out, "damping            = {:.6}", lin.zeta)?;
        writeln!(out, "damped frequency   = {:.6} rad/s", lin.omega_d)?;
        writeln!(
            out,
            "G(s) = {:.6} / (s^2 + {:.6} s + {:.6})",
            lin.k_pos, den[1], den[2]
        )?;
        writeln!(out, "numerator          = [{:.6}]", lin.numerator()[0])?;
        writeln!(
            out,
            "denominator        = [{}, {:.6}, {:.6}]",
            den[0], den[1], den[2]
        )?;
    }
    Ok(())
}

pub fn cmd_simulate(a: &SimulateArgs, stdout: &mut dyn Write, log: &mut dyn Write) -> CliResult {
    let p = a.params.resolve(None)?;
    let pre = a.params.preset()?;
    let base = pre.map_or(SignalSpec::sine(1.0, 2.0), |p| p.signal);
    let spec = signal_from(&a.signal, base)?;
    let t_end = a.t_end.or(pre.map(|p| p.sim.t_end)).unwrap_or(10.0);
    let mut cfg = SimConfig::new(a.dt.unwrap_or_else(|| default_dt(&p, &spec)), t_end);
    cfg.transient_skip = default_transient(&p, spec.amplitude.abs()).min(0.5 * t_end);
    let ts = run(&p, &spec, &cfg)?;
    let names = [
        channel::V,
        channel::X1,
        channel::X2,
        channel::V_CLEAN,
        channel::DV_CLEAN,
    ];
    let cols: Vec<&[f64]> = names
        .iter()
        .map(|n| ts.channel(n))
        .collect::<Result<_, _>>()?;
    let rows = (0..ts.len()).map(|i| {
        let mut r = Vec::with_capacity(6);
        r.push(ts.t()[i]);
        r.extend(cols.iter().map(|c| c[i]));
        r
    });
    let mut out = open_output(&a.out, stdout)?;
    write_table(
        &mut out,
        &["t", "v", "x1", "x2", "v_clean", "dv_clean"],
        rows,
    )?;
    out.flush()?;
    let window = (cfg.transient_skip, cfg.t_end);
    writeln!(
        log,
        "rms(x1 - v_clean) = {:.6e}, rms(x2 - dv_clean) = {:.6e} over t in [{:.3}, {:.3}]",
        rms_error(&ts, channel::X1, channel::V_CLEAN, window)?,
        rms_error(&ts, channel::X2, channel::DV_CLEAN, window)?,
        window.0,
        window.1
    )?;
    write_plot_script(
        &a.out,
        "differentiator outputs",
        "t [s]",
        &[(2, "v"), (4, "x2"), (6, "dv_clean")],
    )
}

fn freq_rows(points: &[FreqPoint]) -> impl Iterator<Item = [f64; 4]> + '_ {
    points
        .iter()
        .map(|fp| [fp.omega, fp.mag, fp.mag_db, fp.phase_deg])
}

pub fn cmd_bode(a: &BodeArgs, stdout: &mut dyn Write) -> CliResult {
    let p = a.params.resolve(None)?;
    let amp = match a.amplitude {
        Some(x) => x,
        None => default_amplitude(&a.params)?,
    };
    let lin = linearize(&p, amp)?;
    let grid = grid_from(&a.grid, 0.1 * lin.omega_n, 100.0 * lin.omega_n, 50)?;
    let points = if a.first_order {
        if p.a0 <= 0.0 {
            return Err(CliError::Usage(
                "the first-order filter needs a0 > 0".into(),
            ));
        }
        tdlab::describing::check_grid(&grid)?;
        grid.iter()
            .map(|&w| first_order_response(p.a0, p.eps, w))
            .collect()
    } else {
        bode_table(&lin, &grid)?
    };
    let mut out = open_output(&a.out, stdout)?;
    write_table(
        &mut out,
        &["omega", "mag", "mag_db", "phase_deg"],
        freq_rows(&points),
    )?;
    out.flush()?;
    write_plot_script(&a.out, "Bode magnitude", "omega [rad/s]", &[(3, "mag_db")])
}

pub fn cmd_sweep(a: &SweepArgs, stdout: &mut dyn Write, log: &mut dyn Write) -> CliResult {
    let p = a.params.resolve(None)?;
    let amp = a.amplitude.unwrap_or(1.0);
    let grid = grid_from(&a.grid, 1.0, 2.0 * PI * 100.0, 30)?;
    let cfg = SweepConfig {
        measure_periods: a.measure_periods,
        ..SweepConfig::default()
    };
    let measured = sweep(&p, amp, &grid, &cfg)?;
    let rows = measured.iter().map(|m| {
        let d = m.deriv();
        [
            m.omega,
            d.mag,
            d.mag_db,
            d.phase_deg,
            m.track_mag,
            m.track_phase_deg,
            m.deriv_mag,
            m.deriv_phase_deg,
        ]
    });
    let mut out = open_output(&a.out, stdout)?;
    write_table(
        &mut out,
        &[
            "omega",
            "mag",
            "mag_db",
            "phase_deg",
            "track_mag",
            "track_phase_deg",
            "deriv_mag",
            "deriv_phase_deg",
        ],
        rows,
    )?;
    out.flush()?;
    match tracking_bandwidth(&measured) {
        Some(bw) => writeln!(log, "tracking -3 dB bandwidth: {bw:.6} rad/s")?,
        None => writeln!(log, "tracking -3 dB bandwidth: not reached on this grid")?,
    }
    write_plot_script(
        &a.out,
        "measured frequency characteristics",
        "omega [rad/s]",
        &[(3, "derivative [dB]"), (5, "tracking magnitude")],
    )
}

pub fn cmd_estimate(a: &EstimateArgs, stdout: &mut dyn Write, log: &mut dyn Write) -> CliResult {
    let p = a.params.resolve(Some("paper-5"))?;
    let base = lookup("paper-5")?.signal.noise;
    let noise = if a.no_noise {
        None
    } else {
        let n = base.unwrap_or(NoiseSpec {
            power: 1e-4,
            sample_time: 0.01,
            seed: DEFAULT_SEED,
        });
        Some(NoiseSpec::new(
            a.noise_power.unwrap_or(n.power),
            a.sample_time.unwrap_or(n.sample_time),
            a.seed.unwrap_or(n.seed),
        )?)
    };
    let sim = SimConfig::new(a.dt, a.t_end);
    let ts = estimate_delta(&simulate_plant(&PlantConfig::reference(noise), &sim)?, &p)?;
    use uncertainty::channel as ch;
    let names = [ch::Y, ch::U, ch::DELTA, ch::DELTA_HAT];
    let cols: Vec<&[f64]> = names
        .iter()
        .map(|n| ts.channel(n))
        .collect::<Result<_, _>>()?;
    let rows = (0..ts.len()).map(|i| [ts.t()[i], cols[0][i], cols[1][i], cols[2][i], cols[3][i]]);
    let mut out = open_output(&a.out, stdout)?;
    write_table(&mut out, &["t", "y", "u", "delta_true", "delta_hat"], rows)?;
    out.flush()?;
    if a.t_end > uncertainty::ESTIMATION_TRANSIENT {
        let e = rms_error(
            &ts,
            ch::DELTA_HAT,
            ch::DELTA,
            (uncertainty::ESTIMATION_TRANSIENT, a.t_end),
        )?;
        writeln!(log, "rms(delta_hat - delta_true) = {e:.6e} for t >= 2 s")?;
    }
    write_plot_script(
        &a.out,
        "disturbance estimate",
        "t [s]",
        &[(4, "delta_true"), (5, "delta_hat")],
    )
}

pub fn cmd_presets(out: &mut dyn Write) -> CliResult {
    for name in PRESET_NAMES {
        let pre = lookup(name)?;
        let p = pre.params;
        writeln!(
            out,
            "{name:<18} R={:<8.4} a0={:<6} a1={:<6} b0={:<6} b1={:<6} alpha={:<4} {}",
            p.r(),
            p.a0,
            p.a1,
            p.b0,
            p.b1,
            p.alpha,
            pre.description
        )?;
    }
    Ok(())
}

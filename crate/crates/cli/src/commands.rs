//! Subcommand definitions and their execution.

use std::f64::consts::{PI, SQRT_2};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use magictrap::cavityqed::{self, CavitySystem};
use magictrap::clockspec::{self, ClockTransition};
use magictrap::constants::{hz_to_wavelength, PLANCK, STANDARD_GRAVITY};
use magictrap::fieldtrap::{self, BeamStrength, FieldConfig, Polarization, TrapGeometry};
use magictrap::polarizability::{self, MagicOptions, PolarizabilityError, StateSelector};
use magictrap::{bundled_species, load_species, HalfInt, Species};

use crate::config::{Config, Section};
use crate::emit::{format_number, Cell, Format, Table};
use crate::units::{self, Depth, Kind};
use crate::{CliError, Output};

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "magictrap",
    version,
    about = "Light shifts, lattice traps, clock spectroscopy and cavity QED",
    after_help = "Dimensioned values need a unit suffix, e.g. 813.428nm, 34e6hz, 0.5s.",
    disable_help_flag = true,
    disable_version_flag = true,
    disable_help_subcommand = true
)]
pub struct Cli {
    #[arg(short = 'h', long, global = true, action = ArgAction::Help, help = "Print help [units: none]")]
    help: Option<bool>,
    #[arg(short = 'V', long, action = ArgAction::Version, help = "Print version [units: none]")]
    version: Option<bool>,
    #[arg(long, global = true, value_name = "N", help = "Worker threads for parallel scans [units: count; default: all cores]")]
    pub jobs: Option<usize>,
    #[arg(
        long,
        short = 'o',
        global = true,
        value_name = "PATH",
        help = "Write data here plus a PATH.meta.json sidecar; default stdout [units: none, file path]"
    )]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, help = "Data format; default json for magic, csv otherwise [units: none]")]
    pub format: Option<Format>,
    #[arg(long, global = true, value_name = "PATH", help = "TOML configuration; flags override it [units: none, file path]")]
    pub config: Option<PathBuf>,
    #[arg(long, short = 'v', global = true, help = "Print resolved parameters to stderr [units: none]")]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dynamic polarizability of two states over a wavelength range.
    Polarizability(PolarizabilityArgs),
    /// Wavelengths where two states have equal polarizability.
    Magic(MagicArgs),
    /// Depth, trap frequencies, recoil and Lamb-Dicke parameter of a trap.
    Trap(TrapArgs),
    /// Rabi line shape of a square clock pulse, with FWHM and Q.
    ClockLine(ClockLineArgs),
    /// pi-transition Zeeman multiplet of the clock line.
    Zeeman(ZeemanArgs),
    /// Carrier and first motional sidebands.
    Sidebands(SidebandArgs),
    /// Weighted mean of a measurement ledger (CSV).
    Aggregate(AggregateArgs),
    /// Steady-state cavity transmission versus probe frequency.
    CavitySpectrum(CavitySpectrumArgs),
    /// g2(0) on the lower vacuum-Rabi peak and at the two-photon resonance.
    Blockade(BlockadeArgs),
    /// Jaynes-Cummings eigenvalues of one excitation manifold.
    Ladder(LadderArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct SpeciesArgs {
    #[arg(
        long,
        value_name = "FILE|NAME",
        help = "Species catalog: a path, a file in $MAGICTRAP_DATA, or a bundled name (sr87, sr88, cs133); default sr87 [units: none]"
    )]
    pub species: Option<String>,
    #[arg(long, help = "Apply the catalog's calibration multipliers [units: none]")]
    pub calibrated: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PolarizabilityArgs {
    #[command(flatten)]
    pub species: SpeciesArgs,
    #[arg(long, value_name = "STATE", help = "First state, e.g. 1S0 or 3P1(m=1); default 1S0 [units: none]")]
    pub state1: Option<String>,
    #[arg(long, value_name = "STATE", help = "Second state; default 3P0 [units: none]")]
    pub state2: Option<String>,
    #[arg(long, value_name = "LENGTH", help = "Single wavelength instead of a scan [units: nm, um, mm, cm, m]")]
    pub lambda: Option<String>,
    #[arg(long, value_name = "LENGTH", help = "Scan start [units: nm, um, mm, cm, m]")]
    pub from: Option<String>,
    #[arg(long, value_name = "LENGTH", help = "Scan end [units: nm, um, mm, cm, m]")]
    pub to: Option<String>,
    #[arg(long, value_name = "N", help = "Evenly spaced scan points; default 201 [units: count]")]
    pub points: Option<usize>,
    #[arg(
        long,
        value_name = "POL",
        help = "pi, sigma+, sigma-, linear:ANGLE or sigma+:ANGLE; default pi [units: deg, rad for ANGLE]"
    )]
    pub polarization: Option<String>,
    #[arg(long, value_name = "INTENSITY", help = "Adds the differential light shift column [units: w/m2, w/cm2, kw/cm2, mw/cm2]")]
    pub intensity: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct MagicArgs {
    #[command(flatten)]
    pub species: SpeciesArgs,
    #[arg(long, value_name = "STATE", help = "First state; default 1S0 [units: none]")]
    pub state1: Option<String>,
    #[arg(long, value_name = "STATE", help = "Second state; default 3P0 [units: none]")]
    pub state2: Option<String>,
    #[arg(long, value_name = "LENGTH", help = "Search range start [units: nm, um, mm, cm, m]")]
    pub from: Option<String>,
    #[arg(long, value_name = "LENGTH", help = "Search range end [units: nm, um, mm, cm, m]")]
    pub to: Option<String>,
    #[arg(long, value_name = "N", help = "Log-spaced scan points before refinement; default 2000 [units: count]")]
    pub grid_points: Option<usize>,
    #[arg(long, value_name = "X", help = "Relative wavelength tolerance of each crossing; default 1e-9 [units: dimensionless]")]
    pub rel_tol: Option<f64>,
    #[arg(long, value_name = "POL", help = "pi, sigma+, sigma-, linear:ANGLE or sigma+:ANGLE; default pi [units: deg, rad for ANGLE]")]
    pub polarization: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeometryKind {
    Lattice,
    Gaussian,
}

#[derive(Args, Debug, Clone, Default)]
pub struct TrapArgs {
    #[command(flatten)]
    pub species: SpeciesArgs,
    #[arg(long, value_name = "MASS", help = "Overrides the catalog mass [units: kg, u]")]
    pub mass: Option<String>,
    #[arg(long, value_name = "LENGTH", help = "Trap wavelength; default 813.428nm [units: nm, um, mm, cm, m]")]
    pub wavelength: Option<String>,
    #[arg(long, value_enum, help = "Vertical retro-reflected lattice or single Gaussian beam; default lattice [units: none]")]
    pub geometry: Option<GeometryKind>,
    #[arg(long, value_name = "LENGTH", help = "Beam waist (1/e^2 radius) [units: nm, um, mm, cm, m]")]
    pub waist: Option<String>,
    #[arg(long, value_name = "DEPTH", help = "Trap depth U0 [units: erec, j, hz, khz, mhz]")]
    pub depth: Option<String>,
    #[arg(long, value_name = "POWER", help = "Beam power; depth follows from the state's polarizability [units: w, mw, uw]")]
    pub power: Option<String>,
    #[arg(long, value_name = "INTENSITY", help = "Peak single-beam intensity, instead of --power [units: w/m2, w/cm2, kw/cm2, mw/cm2]")]
    pub intensity: Option<String>,
    #[arg(long, value_name = "STATE", help = "State whose polarizability sets the depth; default ground level [units: none]")]
    pub state: Option<String>,
    #[arg(long, value_name = "LENGTH", help = "Probe wavelength for the Lamb-Dicke parameter; default ground to 3P0 [units: nm, um, mm, cm, m]")]
    pub probe: Option<String>,
    #[arg(long, value_name = "ACCEL", help = "Local gravity for the site offset; default 9.80665m/s2 [units: m/s2]")]
    pub local_g: Option<String>,
    #[arg(long, value_name = "FREQ", help = "Probe linewidth for the resolved-sideband check [units: hz, khz, mhz, ghz, thz]")]
    pub linewidth: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ClockLineArgs {
    #[arg(long, value_name = "TIME", help = "Pulse length T; default 0.5s [units: s, ms, us, ns]")]
    pub pulse: Option<String>,
    #[arg(long, value_name = "RATE", help = "Rabi frequency; default pi/T [units: rad/s, hz, khz, mhz, ghz]")]
    pub rabi: Option<String>,
    #[arg(long, value_name = "S", help = "Saturation factor s in min(1, s P); default 1 [units: dimensionless]")]
    pub saturation: Option<f64>,
    #[arg(long, value_name = "FREQ", help = "Full detuning span of the trace; default 8hz [units: hz, khz, mhz, ghz, thz]")]
    pub span: Option<String>,
    #[arg(long, value_name = "N", help = "Trace points; default 401 [units: count]")]
    pub points: Option<usize>,
    #[arg(long, value_name = "FREQ", help = "Transition frequency for Q; default 429228004229800hz [units: hz, khz, mhz, ghz, thz]")]
    pub nu: Option<String>,
    #[arg(long, value_name = "FREQ", help = "Observed linewidth; adds Q at that width [units: hz, khz, mhz, ghz, thz]")]
    pub observed_width: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ZeemanArgs {
    #[command(flatten)]
    pub species: SpeciesArgs,
    #[arg(long, value_name = "SLOPE", allow_hyphen_values = true, help = "Differential Zeeman slope per unit m_F (required) [units: hz/t, hz/mt, hz/gauss]")]
    pub delta_g: Option<String>,
    #[arg(long, value_name = "FIELD", help = "Bias field (required) [units: t, mt, ut, gauss, mgauss]")]
    pub field: Option<String>,
    #[arg(long, value_name = "F", help = "Total angular momentum of both clock states; default the nuclear spin [units: hbar]")]
    pub f: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SidebandArgs {
    #[arg(long, value_name = "ETA", help = "Lamb-Dicke parameter (required) [units: dimensionless]")]
    pub eta: Option<f64>,
    #[arg(long, value_name = "FREQ", help = "Axial trap frequency (required) [units: hz, khz, mhz, ghz, thz]")]
    pub nu_z: Option<String>,
    #[arg(long, value_name = "NBAR", help = "Mean axial occupation; default 0 [units: quanta]")]
    pub nbar: Option<f64>,
    #[arg(long, value_name = "FREQ", help = "Lorentzian FWHM of each feature; default nu_z/20 [units: hz, khz, mhz, ghz, thz]")]
    pub width: Option<String>,
    #[arg(long, value_name = "FREQ", help = "Full detuning span; default 3 nu_z [units: hz, khz, mhz, ghz, thz]")]
    pub span: Option<String>,
    #[arg(long, value_name = "N", help = "Trace points; default 601 [units: count]")]
    pub points: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct AggregateArgs {
    #[arg(value_name = "CSV", help = "Ledger with columns site,value_hz_minus_nu0,stat_hz,sys_hz [units: hz in the file]")]
    pub file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CavityArgs {
    #[arg(long, value_name = "RATE", help = "Peak coupling g0; hz means g0/2pi [units: rad/s, hz, khz, mhz, ghz]")]
    pub g0: Option<String>,
    #[arg(long, value_name = "RATE", help = "Cavity field decay rate kappa [units: rad/s, hz, khz, mhz, ghz]")]
    pub kappa: Option<String>,
    #[arg(long, value_name = "RATE", help = "Atomic dipole decay rate gamma [units: rad/s, hz, khz, mhz, ghz]")]
    pub gamma: Option<String>,
    #[arg(long, value_name = "RATE", allow_hyphen_values = true, help = "Trap shift of the ground level; default 0 [units: rad/s, hz, khz, mhz, ghz]")]
    pub delta_b: Option<String>,
    #[arg(long, value_name = "RATE", allow_hyphen_values = true, help = "Trap shift of the excited level; default 0 [units: rad/s, hz, khz, mhz, ghz]")]
    pub delta_e: Option<String>,
    #[arg(long, value_name = "RATE", help = "Cavity drive strength epsilon; default kappa/100 [units: rad/s, hz, khz, mhz, ghz]")]
    pub drive: Option<String>,
    #[arg(long, value_name = "PSI", allow_hyphen_values = true, help = "Mode function at the atom, |psi| <= 1; default 1 [units: dimensionless]")]
    pub psi: Option<f64>,
    #[arg(long, value_name = "N", help = "Fock truncation; default 5 (8 when g2 is computed) [units: photons]")]
    pub nmax: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CavitySpectrumArgs {
    #[command(flatten)]
    pub cavity: CavityArgs,
    #[arg(long, value_name = "RATE", allow_hyphen_values = true, help = "Probe detuning start; default -2 g0 [units: rad/s, hz, khz, mhz, ghz]")]
    pub from: Option<String>,
    #[arg(long, value_name = "RATE", allow_hyphen_values = true, help = "Probe detuning end; default 2 g0 [units: rad/s, hz, khz, mhz, ghz]")]
    pub to: Option<String>,
    #[arg(long, value_name = "N", help = "Probe points; default 200 [units: count]")]
    pub points: Option<usize>,
    #[arg(long, help = "Also compute g2(0) at each probe point [units: none]")]
    pub g2: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct BlockadeArgs {
    #[command(flatten)]
    pub cavity: CavityArgs,
}

#[derive(Args, Debug, Clone, Default)]
pub struct LadderArgs {
    #[arg(long, value_name = "RATE", help = "Peak coupling g0; hz means g0/2pi [units: rad/s, hz, khz, mhz, ghz]")]
    pub g0: Option<String>,
    #[arg(long, value_name = "N", help = "Excitation manifold; default 1 [units: quanta]")]
    pub n: Option<usize>,
    #[arg(long, value_name = "RATE", allow_hyphen_values = true, help = "Trap shift of the ground level; default 0 [units: rad/s, hz, khz, mhz, ghz]")]
    pub delta_b: Option<String>,
    #[arg(long, value_name = "RATE", allow_hyphen_values = true, help = "Trap shift of the excited level; default 0 [units: rad/s, hz, khz, mhz, ghz]")]
    pub delta_e: Option<String>,
}

/// Flag value first, then the config section, then nothing.
struct Resolver<'a> {
    section: Section<'a>,
}

impl<'a> Resolver<'a> {
    fn new(cfg: &'a Config, name: &'static str) -> Self {
        Resolver { section: cfg.section(name) }
    }

    fn quantity(&self, flag: &Option<String>, key: &str, kind: Kind) -> Result<Option<f64>> {
        match flag {
            Some(text) => units::parse(text, kind)
                .map(Some)
                .map_err(|e| CliError::Invalid(format!("--{}: {e}", key.replace('_', "-")))),
            None => self.section.quantity(key, kind),
        }
    }

    fn quantity_or(&self, flag: &Option<String>, key: &str, kind: Kind, default: f64) -> Result<f64> {
        Ok(self.quantity(flag, key, kind)?.unwrap_or(default))
    }

    fn required(&self, flag: &Option<String>, key: &str, kind: Kind) -> Result<f64> {
        self.quantity(flag, key, kind)?.ok_or_else(|| self.missing(key))
    }

    fn missing(&self, key: &str) -> CliError {
        CliError::Invalid(format!("missing --{} (or `{key}` in [{}])", key.replace('_', "-"), self.section.name))
    }

    fn text(&self, flag: &Option<String>, key: &str) -> Result<Option<String>> {
        match flag {
            Some(t) => Ok(Some(t.clone())),
            None => self.section.text(key),
        }
    }

    fn number(&self, flag: Option<f64>, key: &str) -> Result<Option<f64>> {
        match flag {
            Some(x) => Ok(Some(x)),
            None => self.section.number(key),
        }
    }

    fn count(&self, flag: Option<usize>, key: &str, default: usize) -> Result<usize> {
        if let Some(n) = flag {
            return Ok(n);
        }
        match self.section.integer(key)? {
            Some(n) if n >= 0 => Ok(n as usize),
            Some(n) => Err(CliError::Invalid(format!("[{}] {key} must be non-negative (got {n})", self.section.name))),
            None => Ok(default),
        }
    }

    fn switch(&self, flag: bool, key: &str) -> Result<bool> {
        Ok(flag || self.section.boolean(key)?.unwrap_or(false))
    }
}

fn num(x: f64) -> String {
    format_number(x).unwrap_or_else(|| "nan".into())
}

/// Catalog lookup: existing path, then `$MAGICTRAP_DATA`, then the bundled set.
pub fn resolve_species(name: &str) -> Result<Species> {
    let path = Path::new(name);
    if path.is_file() {
        return Ok(load_species(path)?);
    }
    let candidates = [name.to_string(), format!("{name}.lines")];
    if let Some(dir) = std::env::var_os("MAGICTRAP_DATA") {
        for c in &candidates {
            let p = Path::new(&dir).join(c);
            if p.is_file() {
                return Ok(load_species(p)?);
            }
        }
    }
    for c in &candidates {
        if magictrap::atomdata::BUNDLED.iter().any(|(n, _)| n == c) {
            return Ok(bundled_species(c)?);
        }
    }
    let bundled: Vec<&str> = magictrap::atomdata::BUNDLED.iter().map(|(n, _)| *n).collect();
    Err(CliError::Invalid(format!(
        "species {name:?} is not a file, not in $MAGICTRAP_DATA and not bundled ({})",
        bundled.join(", ")
    )))
}

fn species_for(args: &SpeciesArgs, cfg: &Config, res: &Resolver) -> Result<(Species, String)> {
    let name = match &args.species {
        Some(s) => s.clone(),
        None => cfg.top_string("species")?.unwrap_or_else(|| "sr87".into()),
    };
    let species = resolve_species(&name)?;
    if res.switch(args.calibrated, "calibrated")? {
        Ok((species.calibrated(), name))
    } else {
        Ok((species, name))
    }
}

/// `1S0`, `3P1(m=1)`, `3P1:m=-1` or `3P1:-1`.
pub fn parse_state(text: &str) -> Result<StateSelector> {
    let bad = || CliError::Invalid(format!("cannot read state {text:?}; expected LABEL, LABEL(m=M) or LABEL:M"));
    let text = text.trim();
    let (label, m) = if let Some((label, rest)) = text.split_once('(') {
        (label, Some(rest.strip_suffix(')').ok_or_else(bad)?))
    } else if let Some((label, rest)) = text.split_once(':') {
        (label, Some(rest))
    } else {
        (text, None)
    };
    if label.is_empty() {
        return Err(bad());
    }
    match m {
        None => Ok(StateSelector::scalar(label)),
        Some(m) => {
            let m = m.trim().trim_start_matches("m=");
            let m: HalfInt = m.parse().map_err(|_| bad())?;
            Ok(StateSelector::sublevel(label, m))
        }
    }
}

/// `pi`, `sigma+`, `sigma-`, `linear:ANGLE`, `sigma+:ANGLE`, `sigma-:ANGLE`.
pub fn parse_polarization(text: &str) -> Result<Polarization> {
    let lower = text.trim().to_ascii_lowercase();
    let (head, angle) = match lower.split_once(':') {
        Some((h, a)) => {
            let a = units::parse(a, Kind::Angle).map_err(|e| CliError::Invalid(format!("polarization angle: {e}")))?;
            (h.to_string(), Some(a))
        }
        None => (lower.clone(), None),
    };
    match (head.as_str(), angle) {
        ("pi", None) => Ok(Polarization::PI),
        ("linear", Some(theta)) => Ok(Polarization::Linear { theta }),
        ("sigma+", a) => Ok(Polarization::Circular { helicity: 1, theta_k: a.unwrap_or(0.0) }),
        ("sigma-", a) => Ok(Polarization::Circular { helicity: -1, theta_k: a.unwrap_or(0.0) }),
        _ => Err(CliError::Invalid(format!(
            "cannot read polarization {text:?}; expected pi, sigma+, sigma-, linear:ANGLE or sigma+:ANGLE"
        ))),
    }
}

fn polarization(res: &Resolver, flag: &Option<String>) -> Result<(Polarization, String)> {
    let text = res.text(flag, "polarization")?.unwrap_or_else(|| "pi".into());
    Ok((parse_polarization(&text)?, text))
}

fn states(res: &Resolver, s1: &Option<String>, s2: &Option<String>) -> Result<(StateSelector, StateSelector)> {
    let s1 = res.text(s1, "state1")?.unwrap_or_else(|| "1S0".into());
    let s2 = res.text(s2, "state2")?.unwrap_or_else(|| "3P0".into());
    Ok((parse_state(&s1)?, parse_state(&s2)?))
}

fn range(res: &Resolver, from: &Option<String>, to: &Option<String>, kind: Kind) -> Result<(f64, f64)> {
    let lo = res.required(from, "from", kind)?;
    let hi = res.required(to, "to", kind)?;
    if !(hi > lo) {
        return Err(CliError::Invalid(format!("empty range: --from {lo} must be below --to {hi} (SI units)")));
    }
    Ok((lo, hi))
}

pub fn dispatch(command: &Command, cfg: &Config) -> Result<Output> {
    match command {
        Command::Polarizability(a) => polarizability_cmd(a, cfg),
        Command::Magic(a) => magic_cmd(a, cfg),
        Command::Trap(a) => trap_cmd(a, cfg),
        Command::ClockLine(a) => clock_line_cmd(a, cfg),
        Command::Zeeman(a) => zeeman_cmd(a, cfg),
        Command::Sidebands(a) => sidebands_cmd(a, cfg),
        Command::Aggregate(a) => aggregate_cmd(a, cfg),
        Command::CavitySpectrum(a) => cavity_spectrum_cmd(a, cfg),
        Command::Blockade(a) => blockade_cmd(a, cfg),
        Command::Ladder(a) => ladder_cmd(a, cfg),
    }
}

fn csv_output(table: Table, summary: Vec<String>) -> Output {
    Output { table, summary, default_format: Format::Csv }
}

fn polarizability_cmd(a: &PolarizabilityArgs, cfg: &Config) -> Result<Output> {
    let res = Resolver::new(cfg, "scan");
    let (species, species_name) = species_for(&a.species, cfg, &res)?;
    let (s1, s2) = states(&res, &a.state1, &a.state2)?;
    let (pol, pol_text) = polarization(&res, &a.polarization)?;
    let intensity = res.quantity(&a.intensity, "intensity", Kind::Intensity)?;
    let grid = match res.quantity(&a.lambda, "lambda", Kind::Length)? {
        Some(l) => vec![l],
        None => {
            let (lo, hi) = range(&res, &a.from, &a.to, Kind::Length)?;
            let n = res.count(a.points, "points", 201)?;
            if n < 2 {
                return Err(CliError::Invalid("--points must be at least 2 for a scan".into()));
            }
            clockspec::linear_grid(lo, hi, n)
        }
    };
    let single = grid.len() == 1;

    // A scan point on a resonance is reported as a blank cell; a single
    // requested wavelength on a resonance is an error.
    let eval = |sel: &StateSelector, l: f64| -> Result<f64> {
        match polarizability::alpha_au(&species, sel, l, pol) {
            Ok(x) => Ok(x),
            Err(PolarizabilityError::Pole { .. }) if !single => Ok(f64::NAN),
            Err(e) => Err(e.into()),
        }
    };
    let rows: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&l| Ok((l, eval(&s1, l)?, eval(&s2, l)?)))
        .collect::<Result<_>>()?;

    let mut columns = vec!["lambda_nm", "alpha_au_state1", "alpha_au_state2", "delta_alpha_au"];
    if intensity.is_some() {
        columns.push("delta_nu_hz");
    }
    let mut table = Table::new(&columns)
        .meta("command", "polarizability")
        .meta("species", &species.name)
        .meta("state1", &s1)
        .meta("state2", &s2)
        .meta("polarization", &pol_text)
        .meta("calibrated", res.switch(a.species.calibrated, "calibrated")?);
    if let Some(i) = intensity {
        table = table.meta("intensity_w_per_m2", num(i));
    }
    let mut poles = 0;
    let mut sign_changes = 0;
    let mut prev: Option<f64> = None;
    for &(l, a1, a2) in &rows {
        let d = a2 - a1;
        if d.is_nan() {
            poles += 1;
        } else {
            if prev.is_some_and(|p| p.signum() != d.signum()) {
                sign_changes += 1;
            }
            prev = Some(d);
        }
        let mut row = vec![Cell::Num(l / 1e-9), Cell::Num(a1), Cell::Num(a2), Cell::Num(d)];
        if let Some(i) = intensity {
            let shift = polarizability::stark_shift_au(&s2.label, d, i).map(|s| s.frequency).unwrap_or(f64::NAN);
            row.push(Cell::Num(shift));
        }
        table.push(row);
    }
    let mut summary = vec![format!(
        "polarizability of {s1} and {s2} ({species_name}) at {} wavelength(s), {pol_text} light",
        rows.len()
    )];
    if single {
        let (_, a1, a2) = rows[0];
        summary.push(format!("alpha({s1}) = {a1:.6} au, alpha({s2}) = {a2:.6} au, difference {:.6} au", a2 - a1));
    } else {
        summary.push(format!("{sign_changes} sign change(s) of alpha2 - alpha1 between samples, {poles} sample(s) on a resonance"));
    }
    Ok(csv_output(table, summary))
}

fn magic_cmd(a: &MagicArgs, cfg: &Config) -> Result<Output> {
    let res = Resolver::new(cfg, "scan");
    let (species, species_name) = species_for(&a.species, cfg, &res)?;
    let (s1, s2) = states(&res, &a.state1, &a.state2)?;
    let (pol, pol_text) = polarization(&res, &a.polarization)?;
    let (lo, hi) = range(&res, &a.from, &a.to, Kind::Length)?;
    let opts = MagicOptions {
        grid_points: res.count(a.grid_points, "grid_points", polarizability::DEFAULT_GRID_POINTS)?,
        rel_tol: res.number(a.rel_tol, "rel_tol")?.unwrap_or(polarizability::DEFAULT_REL_TOL),
    };
    let points = polarizability::find_magic(&species, &s1, &s2, (lo, hi), pol, opts)?;

    let mut table = Table::new(&["lambda_nm", "residual_au", "bracket_nm"])
        .with_pair("bracket_nm")
        .meta("command", "magic")
        .meta("species", &species.name)
        .meta("state1", &s1)
        .meta("state2", &s2)
        .meta("from_nm", num(lo / 1e-9))
        .meta("to_nm", num(hi / 1e-9))
        .meta("polarization", &pol_text)
        .meta("calibrated", res.switch(a.species.calibrated, "calibrated")?)
        .meta("grid_points", opts.grid_points)
        .meta("rel_tol", num(opts.rel_tol));
    for p in &points {
        table.push(vec![
            Cell::Num(p.wavelength / 1e-9),
            Cell::Num(p.residual_au),
            Cell::Pair(p.bracket.0 / 1e-9, p.bracket.1 / 1e-9),
        ]);
    }
    let mut summary = vec![format!(
        "{} magic wavelength(s) for {s1}/{s2} ({species_name}) in {:.3}-{:.3} nm",
        points.len(),
        lo / 1e-9,
        hi / 1e-9
    )];
    for p in &points {
        summary.push(format!("  {:.6} nm  (residual {:.2e} au)", p.wavelength / 1e-9, p.residual_au));
    }
    Ok(Output { table, summary, default_format: Format::Json })
}

fn trap_cmd(a: &TrapArgs, cfg: &Config) -> Result<Output> {
    let res = Resolver::new(cfg, "trap");
    let (species, _) = species_for(&a.species, cfg, &res)?;
    let mass = res.quantity_or(&a.mass, "mass", Kind::Mass, species.mass_kg)?;
    let lambda = res.quantity_or(&a.wavelength, "wavelength", Kind::Length, 813.428e-9)?;
    let waist = res.required(&a.waist, "waist", Kind::Length)?;
    let geometry = match (a.geometry, res.section.text("geometry")?) {
        (Some(g), _) => g,
        (None, Some(t)) => GeometryKind::from_str(&t, true)
            .map_err(|_| CliError::Invalid(format!("[trap] geometry {t:?}: expected lattice or gaussian")))?,
        (None, None) => GeometryKind::Lattice,
    };
    let geom = match geometry {
        GeometryKind::Lattice => TrapGeometry::vertical_lattice(waist),
        GeometryKind::Gaussian => TrapGeometry::gaussian(waist),
    };
    let rec = fieldtrap::recoil(mass, lambda)?;

    let depth_text = res.text(&a.depth, "depth")?;
    let power = res.quantity(&a.power, "power", Kind::Power)?;
    let intensity = res.quantity(&a.intensity, "intensity", Kind::Intensity)?;
    let (depth, depth_source) = match (depth_text, power, intensity) {
        (Some(t), None, None) => {
            let d = match units::parse_depth(&t).map_err(|e| CliError::Invalid(format!("--depth: {e}")))? {
                Depth::Recoils(x) => x * rec.energy,
                Depth::Joules(x) => x,
                Depth::Hertz(x) => x * PLANCK,
            };
            (d, "given".to_string())
        }
        (None, p, i) if p.is_some() != i.is_some() => {
            let state = match res.text(&a.state, "state")? {
                Some(s) => parse_state(&s)?,
                None => StateSelector::scalar(species.ground().label.clone()),
            };
            let strength = match (p, i) {
                (Some(p), _) => BeamStrength::Power(p),
                (_, Some(i)) => BeamStrength::PeakIntensity(i),
                _ => unreachable!(),
            };
            let field = FieldConfig { wavelength: lambda, polarization: Polarization::PI, strength };
            field.validate()?;
            let peak = fieldtrap::peak_intensity(&field, &geom)?;
            let alpha = polarizability::alpha_au(&species, &state, lambda, Polarization::PI)?;
            let d = fieldtrap::depth_from_polarizability(polarizability::au_to_si(alpha), peak);
            (d, format!("alpha({state}) = {} au at peak intensity {} W/m2", num(alpha), num(peak)))
        }
        (None, None, None) => return Err(res.missing("depth")),
        _ => return Err(CliError::Invalid("give exactly one of --depth, --power, --intensity".into())),
    };

    let probe = match res.quantity(&a.probe, "probe", Kind::Length)? {
        Some(p) => p,
        None => match species.level("3P0") {
            Some(l) if l.energy_hz > 0.0 => hz_to_wavelength(l.energy_hz),
            _ => return Err(res.missing("probe")),
        },
    };
    let local_g = res.quantity_or(&a.local_g, "local_g", Kind::Acceleration, STANDARD_GRAVITY)?;
    let linewidth = res.quantity(&a.linewidth, "linewidth", Kind::Frequency)?;
    let tp = fieldtrap::trap_parameters(depth, &geom, lambda, mass, probe, local_g)?;

    let mut table = Table::new(&[
        "depth_j",
        "depth_erec",
        "depth_hz",
        "recoil_hz",
        "probe_recoil_hz",
        "axial_hz",
        "radial_hz",
        "lamb_dicke",
        "site_offset_hz",
        "resolved_sideband",
    ])
    .meta("command", "trap")
    .meta("species", &species.name)
    .meta("mass_kg", num(mass))
    .meta("wavelength_nm", num(lambda / 1e-9))
    .meta("probe_nm", num(probe / 1e-9))
    .meta("waist_m", num(waist))
    .meta("geometry", format!("{geometry:?}").to_ascii_lowercase())
    .meta("depth_source", &depth_source);
    let resolved = match linewidth {
        Some(w) => Cell::Text(if fieldtrap::resolved_sideband(tp.axial, w) { "yes" } else { "no" }.into()),
        None => Cell::Text(String::new()),
    };
    table.push(vec![
        Cell::Num(tp.depth),
        Cell::Num(tp.depth_in_recoils),
        Cell::Num(tp.depth_hz),
        Cell::Num(tp.recoil.frequency),
        Cell::Num(tp.probe_recoil.frequency),
        Cell::Num(tp.axial),
        Cell::Num(tp.radial),
        Cell::Num(tp.eta),
        Cell::Num(tp.site_offset),
        resolved,
    ]);
    let summary = vec![
        format!(
            "U0 = {:.2} E_rec = {:.4e} J = {:.3} kHz; E_rec/h = {:.4} kHz at {:.3} nm",
            tp.depth_in_recoils,
            tp.depth,
            tp.depth_hz / 1e3,
            tp.recoil.frequency / 1e3,
            lambda / 1e-9
        ),
        format!("nu_axial = {:.6e} Hz, nu_radial = {:.6e} Hz", tp.axial, tp.radial),
        format!(
            "probe recoil = {:.4} kHz at {:.3} nm, eta = {:.4}, site offset = {:.2} Hz",
            tp.probe_recoil.frequency / 1e3,
            probe / 1e-9,
            tp.eta,
            tp.site_offset
        ),
    ];
    Ok(csv_output(table, summary))
}

fn clock_line_cmd(a: &ClockLineArgs, cfg: &Config) -> Result<Output> {
    let res = Resolver::new(cfg, "clock");
    let t = res.quantity_or(&a.pulse, "pulse", Kind::Time, 0.5)?;
    if !(t > 0.0) {
        return Err(CliError::Invalid(format!("--pulse must be positive (got {t} s)")));
    }
    let omega = res.quantity_or(&a.rabi, "rabi", Kind::Rate, clockspec::pi_pulse_rabi(t))?;
    let s = res.number(a.saturation, "saturation")?.unwrap_or(1.0);
    let span = res.quantity_or(&a.span, "span", Kind::Frequency, 8.0)?;
    let n = res.count(a.points, "points", 401)?;
    let nu = res.quantity_or(&a.nu, "nu", Kind::Frequency, clockspec::SR87_NU0_OFFSET_HZ)?;
    let observed = res.quantity(&a.observed_width, "observed_width", Kind::Frequency)?;
    if !(span > 0.0) {
        return Err(CliError::Invalid(format!("--span must be positive (got {span} Hz)")));
    }
    let grid = clockspec::linear_grid(-0.5 * span, 0.5 * span, n);
    let trace = clockspec::rabi_lineshape(omega, t, &grid, s)?;
    let q = trace.fwhm_hz.map(|w| clockspec::quality_factor(nu, w)).transpose()?;
    let q_observed = observed.map(|w| clockspec::quality_factor(nu, w)).transpose()?;

    let mut table = Table::new(&["detuning_hz", "excitation"])
        .meta("command", "clock-line")
        .meta("pulse_s", num(t))
        .meta("rabi_rad_per_s", num(omega))
        .meta("saturation", num(s))
        .meta("fwhm_hz", trace.fwhm_hz.map_or("undefined".into(), num))
        .meta("nu_hz", num(nu));
    if let Some(q) = q {
        table = table.meta("q", num(q));
    }
    if let (Some(w), Some(q)) = (observed, q_observed) {
        table = table.meta("observed_width_hz", num(w)).meta("q_observed", num(q));
    }
    for (d, p) in trace.detuning_hz.iter().zip(&trace.response) {
        table.push(vec![Cell::Num(*d), Cell::Num(*p)]);
    }
    let mut summary = vec![match (trace.fwhm_hz, q) {
        (Some(w), Some(q)) => format!("FWHM = {w:.6} Hz (FWHM x T = {:.6}), Q = {q:.4e}", w * t),
        _ => "FWHM undefined: the line centre is dark at this pulse area".to_string(),
    }];
    if let (Some(w), Some(q)) = (observed, q_observed) {
        summary.push(format!("Q at observed width {w} Hz = {q:.4e}"));
    }
    Ok(csv_output(table, summary))
}

fn zeeman_cmd(a: &ZeemanArgs, cfg: &Config) -> Result<Output> {
    let res = Resolver::new(cfg, "clock");
    let dg = res.required(&a.delta_g, "delta_g", Kind::ZeemanSlope)?;
    let field = res.required(&a.field, "field", Kind::Field)?;
    let f = match res.text(&a.f, "f")? {
        Some(t) => t.parse::<HalfInt>().map_err(|e| CliError::Invalid(format!("--f: {e}")))?,
        None => species_for(&a.species, cfg, &res)?.0.nuclear_spin,
    };
    let tr = ClockTransition { f, ..ClockTransition::sr87(dg) };
    let lines = clockspec::zeeman_multiplet(&tr, field)?;
    let mut table = Table::new(&["m_f", "offset_hz"])
        .meta("command", "zeeman")
        .meta("f", f)
        .meta("delta_g_hz_per_t", num(dg))
        .meta("field_t", num(field));
    for l in &lines {
        table.push(vec![Cell::Num(l.m_f.value()), Cell::Num(l.offset_hz)]);
    }
    let spacing = dg * field;
    let worst_pair = lines
        .iter()
        .zip(lines.iter().rev())
        .map(|(lo, hi)| clockspec::pair_average(hi.offset_hz, lo.offset_hz).abs())
        .fold(0.0, f64::max);
    let summary = vec![
        format!("{} pi lines for F = {f}, spacing {spacing:.6} Hz", lines.len()),
        format!("largest |(+m_F) + (-m_F)| / 2 = {worst_pair:.3e} Hz"),
    ];
    Ok(csv_output(table, summary))
}

fn sidebands_cmd(a: &SidebandArgs, cfg: &Config) -> Result<Output> {
    let res = Resolver::new(cfg, "clock");
    let eta = res.number(a.eta, "eta")?.ok_or_else(|| res.missing("eta"))?;
    let nu_z = res.required(&a.nu_z, "nu_z", Kind::Frequency)?;
    let nbar = res.number(a.nbar, "nbar")?.unwrap_or(0.0);
    let width = res.quantity_or(&a.width, "width", Kind::Frequency, nu_z / 20.0)?;
    let span = res.quantity_or(&a.span, "span", Kind::Frequency, 3.0 * nu_z)?;
    let n = res.count(a.points, "points", 601)?;
    let grid = clockspec::linear_grid(-0.5 * span, 0.5 * span, n);
    let trace = clockspec::sideband_spectrum(eta, nu_z, nbar, width, &grid)?;
    let w = clockspec::sideband_weights(eta, nbar)?;
    let mut table = Table::new(&["detuning_hz", "response"])
        .meta("command", "sidebands")
        .meta("eta", num(eta))
        .meta("nu_z_hz", num(nu_z))
        .meta("nbar", num(nbar))
        .meta("width_hz", num(width))
        .meta("red_weight", num(w.red))
        .meta("blue_weight", num(w.blue));
    for (d, r) in trace.detuning_hz.iter().zip(&trace.response) {
        table.push(vec![Cell::Num(*d), Cell::Num(*r)]);
    }
    let ratio = w.asymmetry();
    let summary = vec![
        format!("weights: carrier 1, red {:.6e}, blue {:.6e}", w.red, w.blue),
        format!("red/blue = {ratio:.6} -> nbar = {:.6}", clockspec::nbar_from_asymmetry(ratio)?),
    ];
    Ok(csv_output(table, summary))
}

fn aggregate_cmd(a: &AggregateArgs, cfg: &Config) -> Result<Output> {
    let res = Resolver::new(cfg, "clock");
    let path = match &a.file {
        Some(p) => p.clone(),
        None => res.section.text("measurements")?.map(PathBuf::from).ok_or_else(|| {
            CliError::Invalid("missing measurement file (positional CSV or `measurements` in [clock])".into())
        })?,
    };
    let file = std::fs::File::open(&path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let ms = clockspec::read_measurements(file)?;
    let agg = clockspec::aggregate_measurements(&ms)?;
    let offset = clockspec::SR87_NU0_OFFSET_HZ;
    let mut table = Table::new(&["count", "nu0_offset_hz", "mean_hz_minus_nu0", "sigma_mean_hz", "reduced_chi2"])
        .meta("command", "aggregate")
        .meta("sites", ms.iter().map(|m| m.site.as_str()).collect::<Vec<_>>().join(";"));
    table.push(vec![
        Cell::Int(agg.count as i64),
        Cell::Int(offset as i64),
        Cell::Num(agg.mean_hz),
        Cell::Num(agg.sigma_mean_hz),
        Cell::Num(if agg.chi2_defined { agg.reduced_chi2 } else { f64::NAN }),
    ]);
    let mut summary = vec![format!(
        "nu = {} Hz + ({:.3} +/- {:.3}) Hz from {} measurement(s)",
        offset as i64, agg.mean_hz, agg.sigma_mean_hz, agg.count
    )];
    if agg.chi2_defined {
        summary.push(format!("reduced chi2 = {:.3}", agg.reduced_chi2));
    }
    Ok(csv_output(table, summary))
}

struct CavitySetup {
    sys: CavitySystem,
    drive: f64,
}

fn cavity_setup(a: &CavityArgs, res: &Resolver, default_nmax: usize) -> Result<CavitySetup> {
    let g0 = res.required(&a.g0, "g0", Kind::Rate)?;
    let kappa = res.required(&a.kappa, "kappa", Kind::Rate)?;
    let gamma = res.required(&a.gamma, "gamma", Kind::Rate)?;
    let delta_b = res.quantity_or(&a.delta_b, "delta_b", Kind::Rate, 0.0)?;
    let delta_e = res.quantity_or(&a.delta_e, "delta_e", Kind::Rate, 0.0)?;
    let drive = res.quantity_or(&a.drive, "drive", Kind::Rate, kappa / 100.0)?;
    let psi = res.number(a.psi, "psi")?.unwrap_or(1.0);
    let nmax = res.count(a.nmax, "nmax", default_nmax)?;
    let sys = CavitySystem { psi, ..CavitySystem::resonant(g0, kappa, gamma, nmax).with_shifts(delta_b, delta_e) };
    sys.validate()?;
    Ok(CavitySetup { sys, drive })
}

fn cavity_meta(table: Table, command: &str, c: &CavitySetup) -> Table {
    let s = &c.sys;
    let hz = |x: f64| num(x / (2.0 * PI));
    table
        .meta("command", command)
        .meta("g0_over_2pi_hz", hz(s.g0))
        .meta("kappa_over_2pi_hz", hz(s.kappa))
        .meta("gamma_over_2pi_hz", hz(s.gamma))
        .meta("delta_b_over_2pi_hz", hz(s.delta_b))
        .meta("delta_e_over_2pi_hz", hz(s.delta_e))
        .meta("drive_over_2pi_hz", hz(c.drive))
        .meta("psi", num(s.psi))
        .meta("nmax", s.nmax)
}

fn cavity_spectrum_cmd(a: &CavitySpectrumArgs, cfg: &Config) -> Result<Output> {
    let res = Resolver::new(cfg, "cavity");
    let with_g2 = res.switch(a.g2, "g2")?;
    let default_nmax = if with_g2 { cavityqed::DEFAULT_NMAX_G2 } else { cavityqed::DEFAULT_NMAX_SPECTRUM };
    let setup = cavity_setup(&a.cavity, &res, default_nmax)?;
    let g0 = setup.sys.g0;
    let lo = res.quantity_or(&a.from, "from", Kind::Rate, -2.0 * g0)?;
    let hi = res.quantity_or(&a.to, "to", Kind::Rate, 2.0 * g0)?;
    if !(hi > lo) {
        return Err(CliError::Invalid("empty probe range: --from must be below --to".into()));
    }
    let n = res.count(a.points, "points", 200)?;
    let grid = clockspec::linear_grid(lo, hi, n);
    let probe = cavityqed::vacuum_rabi_spectrum(&setup.sys, setup.drive, &grid, with_g2)?;

    let mut table = cavity_meta(
        Table::new(&["omega_p_over_2pi_hz", "transmission", "mean_n", "g2"]),
        "cavity-spectrum",
        &setup,
    );
    for i in 0..probe.omega_p.len() {
        let g2 = probe.g2.as_ref().map_or(f64::NAN, |g| g[i]);
        table.push(vec![
            Cell::Num(probe.omega_p[i] / (2.0 * PI)),
            Cell::Num(probe.transmission[i]),
            Cell::Num(probe.mean_n[i]),
            Cell::Num(g2),
        ]);
    }
    let peaks: Vec<String> = probe.peaks.iter().map(|p| format!("{:.6e}", p / (2.0 * PI))).collect();
    let mut summary = vec![
        format!("{} probe points, transmission peaks at omega_p/2pi = [{}] Hz", n, peaks.join(", ")),
        format!("largest top-Fock population {:.2e}", probe.max_truncation),
    ];
    if probe.max_truncation > cavityqed::TRUNCATION_WARNING {
        summary.push(format!("warning: truncation nmax = {} may be too small", setup.sys.nmax));
    }
    Ok(csv_output(table, summary))
}

fn blockade_cmd(a: &BlockadeArgs, cfg: &Config) -> Result<Output> {
    let res = Resolver::new(cfg, "cavity");
    let setup = cavity_setup(&a.cavity, &res, cavityqed::DEFAULT_NMAX_G2)?;
    let g0 = setup.sys.g0;
    let probes = [("lower_vacuum_rabi_peak", -g0), ("two_photon_resonance", -g0 / SQRT_2)];
    let mut table = cavity_meta(
        Table::new(&["probe", "omega_p_over_2pi_hz", "g2", "mean_n", "top_fock_population"]),
        "blockade",
        &setup,
    )
    .meta("blockade_detuning_over_2pi_hz", num(cavityqed::blockade_detuning(g0)? / (2.0 * PI)))
    .meta("blockade_mismatch_over_2pi_hz", num(cavityqed::blockade_mismatch(g0)? / (2.0 * PI)));
    let mut summary = Vec::new();
    for (label, wp) in probes {
        let ss = cavityqed::steady_state(&setup.sys, setup.drive, wp)?;
        let g2 = ss.g2().ok_or(cavityqed::CavityError::UndefinedG2)?;
        table.push(vec![
            Cell::Text(label.into()),
            Cell::Num(wp / (2.0 * PI)),
            Cell::Num(g2),
            Cell::Num(ss.mean_n),
            Cell::Num(ss.top_fock_population),
        ]);
        let verdict = if g2 < 1.0 { "antibunched" } else { "bunched" };
        summary.push(format!("{label}: omega_p/2pi = {:.6e} Hz, g2(0) = {g2:.4} ({verdict})", wp / (2.0 * PI)));
        if ss.truncation_warning {
            summary.push(format!("warning: top Fock population {:.2e} at {label}", ss.top_fock_population));
        }
    }
    summary.push(format!(
        "lower-branch n=1->2 step sits (sqrt2 - 1) g0 = {:.6e} Hz from the bare resonance",
        cavityqed::blockade_detuning(g0)? / (2.0 * PI)
    ));
    Ok(csv_output(table, summary))
}

fn ladder_cmd(a: &LadderArgs, cfg: &Config) -> Result<Output> {
    let res = Resolver::new(cfg, "cavity");
    let g0 = res.required(&a.g0, "g0", Kind::Rate)?;
    let n = match a.n {
        Some(n) => n,
        None => res.count(None, "n", 1)?,
    };
    let delta_b = res.quantity_or(&a.delta_b, "delta_b", Kind::Rate, 0.0)?;
    let delta_e = res.quantity_or(&a.delta_e, "delta_e", Kind::Rate, 0.0)?;
    // Decay rates do not enter the Hamiltonian eigenvalues.
    let sys = CavitySystem::resonant(g0, 1.0, 1.0, n.max(2)).with_shifts(delta_b, delta_e);
    sys.validate()?;
    let [lo, hi] = cavityqed::jc_ladder(&sys, n)?;
    let to_hz = |x: f64| x / (2.0 * PI);
    let mut table = Table::new(&["n", "lower_over_2pi_hz", "upper_over_2pi_hz"])
        .meta("command", "ladder")
        .meta("g0_over_2pi_hz", num(to_hz(g0)))
        .meta("delta_b_over_2pi_hz", num(to_hz(delta_b)))
        .meta("delta_e_over_2pi_hz", num(to_hz(delta_e)));
    table.push(vec![Cell::Int(n as i64), Cell::Num(to_hz(lo)), Cell::Num(to_hz(hi))]);
    let summary = vec![format!(
        "manifold n = {n}: eigenvalues/2pi = {:.9e} Hz and {:.9e} Hz (rotating at n omega_c)",
        to_hz(lo),
        to_hz(hi)
    )];
    Ok(csv_output(table, summary))
}

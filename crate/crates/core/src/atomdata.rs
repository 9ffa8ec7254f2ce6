//! Atomic species data: levels, dipole-coupled transition lines, and the
//! line-oriented catalog format they are loaded from.
//!
//! ```text
//! # comment
//! species <name> mass_kg <float> I <half-integer>
//! level <label> energy_hz <float> J <half-integer> [parity <+1|-1>]   # source
//! line <lower> <upper> lambda_nm <float> (gamma_s <float> | d_au <float>) [calib <float>]  # source
//! ```
//!
//! Strengths are stored both ways after loading: a partial decay rate
//! (upper -> lower, s^-1) and a reduced dipole matrix element in atomic
//! units, related by `Gamma = omega^3 |d|^2 / (3 pi eps0 hbar c^3 (2 J_upper + 1))`.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::angular::HalfInt;
use crate::constants::{DIPOLE_AU, EPSILON_0, HBAR, SPEED_OF_LIGHT};

/// Relative tolerance between a line's wavelength and its level energies.
pub const CATALOG_CONSISTENCY: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum AtomDataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid record {record}: {message}")]
    Validation { record: String, message: String },
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("unknown level {0:?}")]
    UnknownLevel(String),
    #[error("no bundled species named {0:?}")]
    UnknownBundle(String),
}

pub type Result<T> = std::result::Result<T, AtomDataError>;

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub label: String,
    /// Energy above the ground level, expressed as a frequency (Hz).
    pub energy_hz: f64,
    pub j: HalfInt,
    pub parity: Option<i8>,
    pub source: Option<String>,
}

/// The strength a catalog record was given in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrengthInput {
    DecayRate(f64),
    ReducedDipole(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionLine {
    pub lower: String,
    pub upper: String,
    /// Ordinary transition frequency, Hz.
    pub frequency_hz: f64,
    /// Partial spontaneous decay rate upper -> lower, s^-1.
    pub gamma: f64,
    /// Reduced dipole matrix element |<lower||d||upper>|, atomic units.
    pub dipole_au: f64,
    /// Multiplier on |d|^2, applied by [`Species::calibrated`]. Default 1.
    pub calibration: f64,
    pub input: StrengthInput,
    pub source: Option<String>,
}

impl TransitionLine {
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn angular_frequency(&self) -> f64 {
        2.0 * PI * self.frequency_hz
    }

    pub fn dipole_si(&self) -> f64 {
        self.dipole_au * DIPOLE_AU
    }

    pub fn touches(&self, label: &str) -> bool {
        self.lower == label || self.upper == label
    }

    /// The level at the other end of the line from `label`.
    pub fn partner(&self, label: &str) -> Option<&str> {
        if self.lower == label {
            Some(&self.upper)
        } else if self.upper == label {
            Some(&self.lower)
        } else {
            None
        }
    }

    pub fn name(&self) -> String {
        format!("{}-{}", self.lower, self.upper)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Species {
    pub name: String,
    pub mass_kg: f64,
    pub nuclear_spin: HalfInt,
    pub levels: Vec<Level>,
    pub lines: Vec<TransitionLine>,
}

impl Species {
    pub fn level(&self, label: &str) -> Option<&Level> {
        self.levels.iter().find(|l| l.label == label)
    }

    pub fn require_level(&self, label: &str) -> Result<&Level> {
        self.level(label)
            .ok_or_else(|| AtomDataError::UnknownLevel(label.to_string()))
    }

    pub fn ground(&self) -> &Level {
        // Validation guarantees a zero-energy level exists.
        self.levels
            .iter()
            .find(|l| l.energy_hz == 0.0)
            .expect("validated species has a ground level")
    }

    pub fn lines_touching<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a TransitionLine> + 'a {
        self.lines.iter().filter(move |l| l.touches(label))
    }

    pub fn find_line(&self, lower: &str, upper: &str) -> Option<&TransitionLine> {
        self.lines
            .iter()
            .find(|l| l.lower == lower && l.upper == upper)
    }

    /// A copy with every line's calibration multiplier folded into its
    /// strength (|d|^2 scaled, Gamma rescaled to match) and reset to 1.
    pub fn calibrated(&self) -> Species {
        let mut out = self.clone();
        for line in &mut out.lines {
            if line.calibration != 1.0 {
                line.dipole_au *= line.calibration.sqrt();
                line.gamma *= line.calibration;
                line.calibration = 1.0;
            }
        }
        out
    }

    /// Checks every invariant of the catalog.
    pub fn validate(&self) -> Result<()> {
        let invalid = |record: String, message: String| AtomDataError::Validation { record, message };

        if !(self.mass_kg > 0.0) {
            return Err(invalid(format!("species {}", self.name), "mass must be positive".into()));
        }
        if self.nuclear_spin.is_negative() {
            return Err(invalid(format!("species {}", self.name), "nuclear spin must be non-negative".into()));
        }
        if self.levels.is_empty() {
            return Err(invalid(
                format!("species {}", self.name),
                "no levels (a ground level with energy 0 is required)".into(),
            ));
        }
        let mut seen = HashSet::new();
        for level in &self.levels {
            let record = format!("level {}", level.label);
            if !seen.insert(level.label.as_str()) {
                return Err(invalid(record, "duplicate label".into()));
            }
            if !(level.energy_hz >= 0.0) {
                return Err(invalid(record, "energy must be non-negative".into()));
            }
            if level.j.is_negative() {
                return Err(invalid(record, "J must be non-negative".into()));
            }
        }
        if !self.levels.iter().any(|l| l.energy_hz == 0.0) {
            return Err(invalid(
                format!("species {}", self.name),
                "no ground level with energy exactly 0".into(),
            ));
        }
        for line in &self.lines {
            let record = format!("line {} {}", line.lower, line.upper);
            let lower = self.level(&line.lower).ok_or_else(|| {
                invalid(record.clone(), format!("unknown level {:?}", line.lower))
            })?;
            let upper = self.level(&line.upper).ok_or_else(|| {
                invalid(record.clone(), format!("unknown level {:?}", line.upper))
            })?;
            if !(line.frequency_hz > 0.0) {
                return Err(invalid(record, "frequency must be positive".into()));
            }
            if !(line.gamma > 0.0 && line.dipole_au > 0.0) {
                return Err(invalid(record, "strength must be positive".into()));
            }
            if !(line.calibration > 0.0) {
                return Err(invalid(record, "calibration multiplier must be positive".into()));
            }
            if !(lower.energy_hz < upper.energy_hz) {
                return Err(invalid(record, "lower level must lie below upper level".into()));
            }
            let gap = upper.energy_hz - lower.energy_hz;
            let mismatch = (line.frequency_hz - gap).abs() / line.frequency_hz;
            if mismatch >= CATALOG_CONSISTENCY {
                return Err(invalid(
                    record,
                    format!(
                        "wavelength disagrees with level energies (relative mismatch {mismatch:.2e})"
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Reduced dipole matrix element (atomic units) from a partial decay rate.
pub fn dipole_from_gamma(gamma: f64, frequency_hz: f64, upper_degeneracy: u32) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(AtomDataError::NonPositive("decay rate"));
    }
    if !(frequency_hz > 0.0) {
        return Err(AtomDataError::NonPositive("frequency"));
    }
    if upper_degeneracy == 0 {
        return Err(AtomDataError::NonPositive("upper degeneracy"));
    }
    let omega = 2.0 * PI * frequency_hz;
    let d2 = gamma * 3.0 * PI * EPSILON_0 * HBAR * SPEED_OF_LIGHT.powi(3) * upper_degeneracy as f64
        / omega.powi(3);
    Ok(d2.sqrt() / DIPOLE_AU)
}

/// Partial decay rate (s^-1) from a reduced dipole matrix element (atomic units).
pub fn gamma_from_dipole(dipole_au: f64, frequency_hz: f64, upper_degeneracy: u32) -> Result<f64> {
    if !(dipole_au > 0.0) {
        return Err(AtomDataError::NonPositive("dipole matrix element"));
    }
    if !(frequency_hz > 0.0) {
        return Err(AtomDataError::NonPositive("frequency"));
    }
    if upper_degeneracy == 0 {
        return Err(AtomDataError::NonPositive("upper degeneracy"));
    }
    let omega = 2.0 * PI * frequency_hz;
    let d = dipole_au * DIPOLE_AU;
    Ok(omega.powi(3) * d * d
        / (3.0 * PI * EPSILON_0 * HBAR * SPEED_OF_LIGHT.powi(3) * upper_degeneracy as f64))
}

struct RawLine {
    lower: String,
    upper: String,
    lambda_nm: f64,
    strength: StrengthInput,
    calibration: f64,
    source: Option<String>,
    line_no: usize,
}

fn parse_err(line: usize, message: impl Into<String>) -> AtomDataError {
    AtomDataError::Parse { line, message: message.into() }
}

fn number(tok: Option<&str>, what: &str, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing value for {what}")))?;
    let x: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("{what}: not a number: {tok:?}")))?;
    if !x.is_finite() {
        return Err(parse_err(line, format!("{what}: not finite")));
    }
    Ok(x)
}

fn half_int(tok: Option<&str>, what: &str, line: usize) -> Result<HalfInt> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing value for {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("{what}: not a half-integer: {tok:?}")))
}

fn expect_key(tok: Option<&str>, key: &str, line: usize) -> Result<()> {
    match tok {
        Some(t) if t == key => Ok(()),
        Some(t) => Err(parse_err(line, format!("expected {key:?}, found {t:?}"))),
        None => Err(parse_err(line, format!("expected {key:?}"))),
    }
}

/// Parses catalog text and validates the result.
pub fn parse_species(text: &str) -> Result<Species> {
    let mut header: Option<(String, f64, HalfInt)> = None;
    let mut levels = Vec::new();
    let mut raw_lines = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let (body, comment) = match raw.split_once('#') {
            Some((b, c)) => (b, Some(c.trim().to_string()).filter(|c| !c.is_empty())),
            None => (raw, None),
        };
        let mut toks = body.split_whitespace();
        let Some(kind) = toks.next() else { continue };
        match kind {
            "species" => {
                if header.is_some() {
                    return Err(parse_err(line_no, "duplicate species header"));
                }
                let name = toks
                    .next()
                    .ok_or_else(|| parse_err(line_no, "missing species name"))?
                    .to_string();
                expect_key(toks.next(), "mass_kg", line_no)?;
                let mass = number(toks.next(), "mass_kg", line_no)?;
                expect_key(toks.next(), "I", line_no)?;
                let spin = half_int(toks.next(), "I", line_no)?;
                header = Some((name, mass, spin));
            }
            "level" => {
                let label = toks
                    .next()
                    .ok_or_else(|| parse_err(line_no, "missing level label"))?
                    .to_string();
                expect_key(toks.next(), "energy_hz", line_no)?;
                let energy_hz = number(toks.next(), "energy_hz", line_no)?;
                expect_key(toks.next(), "J", line_no)?;
                let j = half_int(toks.next(), "J", line_no)?;
                let mut parity = None;
                if let Some(key) = toks.next() {
                    expect_key(Some(key), "parity", line_no)?;
                    parity = Some(match toks.next() {
                        Some("+1") | Some("1") | Some("even") => 1,
                        Some("-1") | Some("odd") => -1,
                        other => {
                            return Err(parse_err(line_no, format!("bad parity {other:?}")));
                        }
                    });
                }
                levels.push(Level { label, energy_hz, j, parity, source: comment });
            }
            "line" => {
                let lower = toks
                    .next()
                    .ok_or_else(|| parse_err(line_no, "missing lower level"))?
                    .to_string();
                let upper = toks
                    .next()
                    .ok_or_else(|| parse_err(line_no, "missing upper level"))?
                    .to_string();
                expect_key(toks.next(), "lambda_nm", line_no)?;
                let lambda_nm = number(toks.next(), "lambda_nm", line_no)?;
                let strength = match toks.next() {
                    Some("gamma_s") => StrengthInput::DecayRate(number(toks.next(), "gamma_s", line_no)?),
                    Some("d_au") => StrengthInput::ReducedDipole(number(toks.next(), "d_au", line_no)?),
                    other => {
                        return Err(parse_err(
                            line_no,
                            format!("expected gamma_s or d_au, found {other:?}"),
                        ))
                    }
                };
                let mut calibration = 1.0;
                if let Some(key) = toks.next() {
                    expect_key(Some(key), "calib", line_no)?;
                    calibration = number(toks.next(), "calib", line_no)?;
                }
                raw_lines.push(RawLine {
                    lower,
                    upper,
                    lambda_nm,
                    strength,
                    calibration,
                    source: comment,
                    line_no,
                });
            }
            other => return Err(parse_err(line_no, format!("unknown record type {other:?}"))),
        }
        if let Some(extra) = toks.next() {
            return Err(parse_err(line_no, format!("unexpected token {extra:?}")));
        }
    }

    let (name, mass_kg, nuclear_spin) =
        header.ok_or_else(|| parse_err(0, "missing `species` header"))?;

    let mut species = Species { name, mass_kg, nuclear_spin, levels, lines: Vec::new() };

    for raw in raw_lines {
        let record = format!("line {} {}", raw.lower, raw.upper);
        let upper = species.level(&raw.upper).ok_or_else(|| AtomDataError::Validation {
            record: record.clone(),
            message: format!("unknown level {:?}", raw.upper),
        })?;
        if species.level(&raw.lower).is_none() {
            return Err(AtomDataError::Validation {
                record,
                message: format!("unknown level {:?}", raw.lower),
            });
        }
        if !(raw.lambda_nm > 0.0) {
            return Err(parse_err(raw.line_no, "lambda_nm must be positive"));
        }
        let frequency_hz = SPEED_OF_LIGHT / (raw.lambda_nm * 1e-9);
        let g_upper = upper.j.degeneracy();
        let converted = match raw.strength {
            StrengthInput::DecayRate(g) => dipole_from_gamma(g, frequency_hz, g_upper).map(|d| (g, d)),
            StrengthInput::ReducedDipole(d) => {
                gamma_from_dipole(d, frequency_hz, g_upper).map(|g| (g, d))
            }
        };
        let (gamma, dipole_au) = converted.map_err(|e| AtomDataError::Validation {
            record,
            message: e.to_string(),
        })?;
        species.lines.push(TransitionLine {
            lower: raw.lower,
            upper: raw.upper,
            frequency_hz,
            gamma,
            dipole_au,
            calibration: raw.calibration,
            input: raw.strength,
            source: raw.source,
        });
    }

    species.validate()?;
    Ok(species)
}

/// Loads and validates a species file.
pub fn load_species(path: impl AsRef<Path>) -> Result<Species> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| AtomDataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_species(&text)
}

/// Species catalogs shipped with the crate, by file name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("sr87.lines", include_str!("../data/sr87.lines")),
    ("sr88.lines", include_str!("../data/sr88.lines")),
    ("cs133.lines", include_str!("../data/cs133.lines")),
];

/// Parses one of the bundled catalogs (`sr87.lines`, `sr88.lines`, `cs133.lines`).
pub fn bundled_species(file_name: &str) -> Result<Species> {
    let text = BUNDLED
        .iter()
        .find(|(name, _)| *name == file_name)
        .map(|(_, text)| *text)
        .ok_or_else(|| AtomDataError::UnknownBundle(file_name.to_string()))?;
    parse_species(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
species Test mass_kg 1e-25 I 0
level g energy_hz 0 J 0
level e energy_hz 5e14 J 1  # upper
line g e lambda_nm 599.584916 d_au 2.0  # synthetic
";

    #[test]
    fn parses_minimal_catalog() {
        let s = parse_species(MINIMAL).unwrap();
        assert_eq!(s.levels.len(), 2);
        assert_eq!(s.lines.len(), 1);
        assert_eq!(s.levels[1].source.as_deref(), Some("upper"));
        assert_eq!(s.lines[0].source.as_deref(), Some("synthetic"));
        assert!(s.lines[0].gamma > 0.0);
        assert_eq!(s.ground().label, "g");
    }

    #[test]
    fn unknown_level_is_named() {
        let text = MINIMAL.replace("line g e", "line g X");
        let err = parse_species(&text).unwrap_err();
        assert!(matches!(err, AtomDataError::Validation { .. }));
        assert!(err.to_string().contains("\"X\""), "{err}");
    }

    #[test]
    fn empty_levels_rejected() {
        let err = parse_species("species Test mass_kg 1e-25 I 0\n").unwrap_err();
        assert!(err.to_string().contains("ground"), "{err}");
    }

    #[test]
    fn missing_ground_rejected() {
        let text = MINIMAL.replace("level g energy_hz 0 J 0", "level g energy_hz 1 J 0");
        assert!(parse_species(&text).is_err());
    }

    #[test]
    fn inconsistent_wavelength_rejected() {
        let text = MINIMAL.replace("599.584916", "599.6");
        let err = parse_species(&text).unwrap_err();
        assert!(err.to_string().contains("disagrees"), "{err}");
    }

    #[test]
    fn malformed_number_is_parse_error() {
        let text = MINIMAL.replace("d_au 2.0", "d_au two");
        assert!(matches!(parse_species(&text), Err(AtomDataError::Parse { line: 4, .. })));
    }

    #[test]
    fn duplicate_label_rejected() {
        let text = format!("{MINIMAL}level e energy_hz 6e14 J 1\n");
        assert!(parse_species(&text).is_err());
    }

    #[test]
    fn gamma_zero_rejected() {
        assert!(dipole_from_gamma(0.0, 1e14, 3).is_err());
        assert!(dipole_from_gamma(1e6, 0.0, 3).is_err());
        assert!(gamma_from_dipole(0.0, 1e14, 3).is_err());
    }

    #[test]
    fn round_trip_gamma_dipole() {
        let d = dipole_from_gamma(3.2e7, 3.5e14, 4).unwrap();
        let g = gamma_from_dipole(d, 3.5e14, 4).unwrap();
        assert!((g / 3.2e7 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn calibration_scales_strength() {
        let text = MINIMAL.replace("d_au 2.0", "d_au 2.0 calib 4.0");
        let s = parse_species(&text).unwrap();
        assert_eq!(s.lines[0].dipole_au, 2.0);
        let c = s.calibrated();
        assert!((c.lines[0].dipole_au - 4.0).abs() < 1e-15);
        assert!((c.lines[0].gamma / s.lines[0].gamma - 4.0).abs() < 1e-12);
        assert_eq!(c.lines[0].calibration, 1.0);
    }

    #[test]
    fn bundled_catalogs_load() {
        for (name, _) in BUNDLED {
            let s = bundled_species(name).unwrap();
            assert!(!s.lines.is_empty(), "{name}");
        }
    }
}

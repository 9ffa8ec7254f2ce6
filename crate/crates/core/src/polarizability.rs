//! Dynamic polarizabilities by sum over catalog lines, a.c. Stark shifts,
//! differential clock shifts and magic-wavelength search.
//!
//! Sums are carried out in atomic units (hbar = e = a0 = m_e = 1) with
//! signed transition energies `dE = E_k - E_i`, so downward couplings enter
//! with the same formula as upward ones.

use rayon::prelude::*;

use crate::angular::{wigner_6j, HalfInt};
use crate::atomdata::{AtomDataError, Species};
use crate::constants::{hz_to_hartree, wavelength_to_hz, EPSILON_0, PLANCK, POLARIZABILITY_AU, SPEED_OF_LIGHT};
use crate::fieldtrap::Polarization;
use crate::roots::{bisect, RootError};

/// Relative distance from a resonance inside which evaluation is refused.
pub const POLE_GUARD: f64 = 1e-7;
/// Default number of log-spaced scan points for [`find_magic`].
pub const DEFAULT_GRID_POINTS: usize = 2000;
/// Default relative wavelength tolerance of the refined crossings.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum PolarizabilityError {
    #[error(transparent)]
    Atom(#[from] AtomDataError),
    #[error("wavelength {wavelength_nm} nm is on the {line} resonance")]
    Pole { line: String, wavelength_nm: f64 },
    #[error("state {state} has J = {j}; tensor decomposition supports J <= 1")]
    UnsupportedJ { state: String, j: HalfInt },
    #[error("state {state} has no sublevel m = {m}")]
    BadProjection { state: String, m: HalfInt },
    #[error("identical states {0}: the difference is identically zero")]
    DegenerateStates(String),
    #[error("invalid search range [{lo}, {hi}] m")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("{what} must be {bound} (got {value})")]
    OutOfRange { what: &'static str, bound: &'static str, value: f64 },
    #[error("root refinement failed: {0}")]
    Root(#[from] RootError),
}

pub type Result<T> = std::result::Result<T, PolarizabilityError>;

/// A state, optionally restricted to one magnetic sublevel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSelector {
    pub label: String,
    pub m: Option<HalfInt>,
}

impl StateSelector {
    pub fn scalar(label: impl Into<String>) -> Self {
        StateSelector { label: label.into(), m: None }
    }

    pub fn sublevel(label: impl Into<String>, m: HalfInt) -> Self {
        StateSelector { label: label.into(), m: Some(m) }
    }
}

impl std::fmt::Display for StateSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.m {
            Some(m) => write!(f, "{}(m={})", self.label, m),
            None => write!(f, "{}", self.label),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizabilityResult {
    pub state: String,
    pub wavelength: f64,
    pub j: HalfInt,
    pub polarization: Polarization,
    /// Atomic units.
    pub scalar_au: f64,
    pub vector_au: f64,
    pub tensor_au: f64,
    /// alpha_m in atomic units for every sublevel, ordered by m. A single
    /// `m = 0` entry equal to the scalar part when J = 0 or when only the
    /// scalar part was requested.
    pub per_m: Vec<(HalfInt, f64)>,
}

impl PolarizabilityResult {
    pub fn scalar_si(&self) -> f64 {
        au_to_si(self.scalar_au)
    }

    pub fn vector_si(&self) -> f64 {
        au_to_si(self.vector_au)
    }

    pub fn tensor_si(&self) -> f64 {
        au_to_si(self.tensor_au)
    }

    pub fn alpha_m(&self, m: HalfInt) -> Option<f64> {
        self.per_m.iter().find(|(mm, _)| *mm == m).map(|&(_, a)| a)
    }

    /// alpha for a selector: the scalar part when no sublevel is named.
    pub fn select(&self, m: Option<HalfInt>) -> Result<f64> {
        match m {
            None => Ok(self.scalar_au),
            Some(m) => self.alpha_m(m).ok_or_else(|| PolarizabilityError::BadProjection {
                state: self.state.clone(),
                m,
            }),
        }
    }
}

pub fn au_to_si(alpha_au: f64) -> f64 {
    alpha_au * POLARIZABILITY_AU
}

pub fn si_to_au(alpha_si: f64) -> f64 {
    alpha_si / POLARIZABILITY_AU
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarkShift {
    pub state: String,
    /// U in J; negative means the state is attracted to high intensity.
    pub energy: f64,
    /// U / h in Hz.
    pub frequency: f64,
}

// One catalog coupling seen from the state of interest.
#[derive(Debug, Clone)]
struct Coupling {
    name: String,
    de: f64,
    strength: f64,
    jk: HalfInt,
}

#[derive(Debug, Clone)]
struct StateLines {
    label: String,
    j: HalfInt,
    couplings: Vec<Coupling>,
}

impl StateLines {
    fn new(species: &Species, label: &str) -> Result<Self> {
        let level = species.require_level(label)?;
        let couplings = species
            .lines_touching(label)
            .map(|line| {
                let partner = species.require_level(line.partner(label).expect("line touches state"))?;
                Ok(Coupling {
                    name: line.name(),
                    de: hz_to_hartree(partner.energy_hz - level.energy_hz),
                    strength: line.dipole_au * line.dipole_au,
                    jk: partner.j,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StateLines { label: label.to_string(), j: level.j, couplings })
    }

    fn check_poles(&self, omega: f64, wavelength: f64) -> Result<()> {
        for c in &self.couplings {
            if ((omega - c.de.abs()) / c.de.abs()).abs() < POLE_GUARD {
                return Err(PolarizabilityError::Pole { line: c.name.clone(), wavelength_nm: wavelength * 1e9 });
            }
        }
        Ok(())
    }

    fn scalar(&self, omega: f64) -> f64 {
        let g = self.j.degeneracy() as f64;
        self.couplings
            .iter()
            .map(|c| c.strength / (3.0 * g) * 2.0 * c.de / (c.de * c.de - omega * omega))
            .sum()
    }

    // Irreducible rank-1 and rank-2 parts, normalised so that the stretched
    // state sees alpha_v (for sigma+ light) and alpha_t (for pi light) at full weight.
    fn vector_tensor(&self, omega: f64) -> (f64, f64) {
        let j = self.j;
        let jv = j.value();
        if jv == 0.0 {
            return (0.0, 0.0);
        }
        let one = HalfInt::from_int(1);
        let two = HalfInt::from_int(2);
        let vec_pref = (6.0 * jv / ((jv + 1.0) * (2.0 * jv + 1.0))).sqrt();
        let ten_pref =
            (10.0 * jv * (2.0 * jv - 1.0) / (3.0 * (jv + 1.0) * (2.0 * jv + 1.0) * (2.0 * jv + 3.0))).sqrt();
        let mut vector = 0.0;
        let mut tensor = 0.0;
        for c in &self.couplings {
            let den = c.de * c.de - omega * omega;
            // J + J_k is an integer for every dipole-allowed pair.
            let parity = ((j.twice() + c.jk.twice()) / 2).rem_euclid(2);
            let sign_t = if parity == 0 { 1.0 } else { -1.0 };
            let sign_v = -sign_t;
            vector += sign_v * vec_pref * wigner_6j(one, one, one, j, j, c.jk) * c.strength * 2.0 * omega / den;
            if ten_pref > 0.0 {
                tensor += sign_t * ten_pref * wigner_6j(one, one, two, j, j, c.jk) * c.strength * 2.0 * c.de / den;
            }
        }
        (vector, tensor)
    }
}

fn omega_au(wavelength: f64) -> Result<f64> {
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(PolarizabilityError::OutOfRange { what: "wavelength", bound: "positive", value: wavelength });
    }
    Ok(hz_to_hartree(wavelength_to_hz(wavelength)))
}

/// Scalar polarizability of `state` at vacuum wavelength `wavelength` (m).
/// Works for any J. `per_m` holds the single scalar entry.
pub fn alpha_scalar(species: &Species, state: &str, wavelength: f64) -> Result<PolarizabilityResult> {
    let lines = StateLines::new(species, state)?;
    let omega = omega_au(wavelength)?;
    lines.check_poles(omega, wavelength)?;
    let scalar = lines.scalar(omega);
    Ok(PolarizabilityResult {
        state: state.to_string(),
        wavelength,
        j: lines.j,
        polarization: Polarization::PI,
        scalar_au: scalar,
        vector_au: 0.0,
        tensor_au: 0.0,
        per_m: vec![(HalfInt::ZERO, scalar)],
    })
}

fn m_resolved(lines: &StateLines, wavelength: f64, pol: Polarization) -> Result<PolarizabilityResult> {
    if lines.j > HalfInt::from_int(1) {
        return Err(PolarizabilityError::UnsupportedJ { state: lines.label.clone(), j: lines.j });
    }
    let omega = omega_au(wavelength)?;
    lines.check_poles(omega, wavelength)?;
    let scalar = lines.scalar(omega);
    let (vector, tensor) = lines.vector_tensor(omega);
    let jv = lines.j.value();
    let per_m = if jv == 0.0 {
        vec![(HalfInt::ZERO, scalar)]
    } else {
        lines
            .j
            .projections()
            .map(|m| {
                let mv = m.value();
                let t = if jv >= 1.0 { (3.0 * mv * mv - jv * (jv + 1.0)) / (jv * (2.0 * jv - 1.0)) } else { 0.0 };
                let alpha = scalar + pol.vector_weight() * mv / (2.0 * jv) * vector + t * pol.tensor_weight() * tensor;
                (m, alpha)
            })
            .collect()
    };
    Ok(PolarizabilityResult {
        state: lines.label.clone(),
        wavelength,
        j: lines.j,
        polarization: pol,
        scalar_au: scalar,
        vector_au: vector,
        tensor_au: tensor,
        per_m,
    })
}

/// Scalar, vector and tensor parts plus alpha_m for every sublevel under
/// polarization `pol`. Supports J <= 1 (including J = 1/2).
pub fn alpha_m_resolved(species: &Species, state: &str, wavelength: f64, pol: Polarization) -> Result<PolarizabilityResult> {
    let lines = StateLines::new(species, state)?;
    m_resolved(&lines, wavelength, pol)
}

/// alpha (atomic units) for a selector: scalar when no sublevel is named.
pub fn alpha_au(species: &Species, sel: &StateSelector, wavelength: f64, pol: Polarization) -> Result<f64> {
    match sel.m {
        None => Ok(alpha_scalar(species, &sel.label, wavelength)?.scalar_au),
        Some(m) => alpha_m_resolved(species, &sel.label, wavelength, pol)?.select(Some(m)),
    }
}

/// U = -alpha I / (2 eps0 c) for polarizability `alpha_au` (atomic units).
pub fn stark_shift_au(state: &str, alpha_au: f64, intensity: f64) -> Result<StarkShift> {
    if !(intensity >= 0.0 && intensity.is_finite()) {
        return Err(PolarizabilityError::OutOfRange { what: "intensity", bound: "non-negative", value: intensity });
    }
    let energy = -au_to_si(alpha_au) * intensity / (2.0 * EPSILON_0 * SPEED_OF_LIGHT);
    Ok(StarkShift { state: state.to_string(), energy, frequency: energy / PLANCK })
}

/// Stark shift of one sublevel (or of the scalar part when `m` is `None`).
pub fn stark_shift(alpha: &PolarizabilityResult, m: Option<HalfInt>, intensity: f64) -> Result<StarkShift> {
    stark_shift_au(&alpha.state, alpha.select(m)?, intensity)
}

/// Light shift of the transition frequency from `state1` to `state2`, in Hz:
/// -(alpha2 - alpha1) I / (2 eps0 c h). Hyperpolarizability is not included.
pub fn differential_clock_shift(
    species: &Species,
    state1: &StateSelector,
    state2: &StateSelector,
    wavelength: f64,
    pol: Polarization,
    intensity: f64,
) -> Result<f64> {
    let a1 = alpha_au(species, state1, wavelength, pol)?;
    let a2 = alpha_au(species, state2, wavelength, pol)?;
    Ok(stark_shift_au(&state2.label, a2 - a1, intensity)?.frequency)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagicPoint {
    pub wavelength: f64,
    pub states: (String, String),
    /// |alpha1 - alpha2| re-evaluated at `wavelength`, atomic units.
    pub residual_au: f64,
    /// Scan cell that bracketed the sign change.
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagicOptions {
    pub grid_points: usize,
    pub rel_tol: f64,
}

impl Default for MagicOptions {
    fn default() -> Self {
        MagicOptions { grid_points: DEFAULT_GRID_POINTS, rel_tol: DEFAULT_REL_TOL }
    }
}

struct Difference {
    s1: StateLines,
    m1: Option<HalfInt>,
    s2: StateLines,
    m2: Option<HalfInt>,
    pol: Polarization,
}

impl Difference {
    fn side(lines: &StateLines, m: Option<HalfInt>, wavelength: f64, pol: Polarization) -> Result<f64> {
        match m {
            None => {
                let omega = omega_au(wavelength)?;
                lines.check_poles(omega, wavelength)?;
                Ok(lines.scalar(omega))
            }
            Some(m) => m_resolved(lines, wavelength, pol)?.select(Some(m)),
        }
    }

    fn eval(&self, wavelength: f64) -> Result<f64> {
        Ok(Self::side(&self.s1, self.m1, wavelength, self.pol)? - Self::side(&self.s2, self.m2, wavelength, self.pol)?)
    }

    fn pole_wavelengths(&self) -> Vec<f64> {
        let mut poles: Vec<f64> = self
            .s1
            .couplings
            .iter()
            .chain(&self.s2.couplings)
            .map(|c| crate::constants::hz_to_wavelength(c.de.abs() * crate::constants::HARTREE / PLANCK))
            .collect();
        poles.sort_by(f64::total_cmp);
        poles.dedup();
        poles
    }
}

/// Wavelengths in `[lo, hi]` where the two states' polarizabilities are equal.
///
/// The range is scanned on a log-spaced grid split at every resonance of
/// either state; each sign change inside a pole-free segment is refined by
/// bisection. Sign flips across a resonance are not crossings. Results are
/// sorted by wavelength and independent of the rayon thread count.
pub fn find_magic(
    species: &Species,
    state1: &StateSelector,
    state2: &StateSelector,
    range: (f64, f64),
    pol: Polarization,
    opts: MagicOptions,
) -> Result<Vec<MagicPoint>> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(PolarizabilityError::InvalidRange { lo, hi });
    }
    if state1 == state2 {
        return Err(PolarizabilityError::DegenerateStates(state1.to_string()));
    }
    if opts.grid_points < 2 {
        return Err(PolarizabilityError::OutOfRange {
            what: "grid points",
            bound: "at least 2",
            value: opts.grid_points as f64,
        });
    }
    if !(opts.rel_tol > 0.0) {
        return Err(PolarizabilityError::OutOfRange { what: "tolerance", bound: "positive", value: opts.rel_tol });
    }
    let diff = Difference {
        s1: StateLines::new(species, &state1.label)?,
        m1: state1.m,
        s2: StateLines::new(species, &state2.label)?,
        m2: state2.m,
        pol,
    };
    // Fail early on unsupported J or absent sublevels.
    let probe = 0.5 * (lo + hi);
    if let Err(e) = diff.eval(probe) {
        if !matches!(e, PolarizabilityError::Pole { .. }) {
            return Err(e);
        }
    }

    let n = opts.grid_points;
    let ratio = (hi / lo).ln();
    let mut grid: Vec<f64> = (0..n).map(|i| lo * (ratio * i as f64 / (n - 1) as f64).exp()).collect();
    grid[n - 1] = hi;

    // Segment boundaries: the range ends and every pole inside, nudged off the pole.
    let nudge = 10.0 * POLE_GUARD;
    let poles: Vec<f64> = diff.pole_wavelengths().into_iter().filter(|&p| p > lo && p < hi).collect();
    let mut points: Vec<(f64, usize)> = Vec::with_capacity(n + 2 * poles.len());
    let mut segment = 0;
    let mut pole_iter = poles.iter().peekable();
    for &x in &grid {
        while let Some(&&p) = pole_iter.peek() {
            if p > x {
                break;
            }
            points.push((p * (1.0 - nudge), segment));
            segment += 1;
            points.push((p * (1.0 + nudge), segment));
            pole_iter.next();
        }
        points.push((x, segment));
    }
    points.retain(|&(x, _)| {
        let omega = hz_to_hartree(wavelength_to_hz(x));
        diff.s1.check_poles(omega, x).is_ok() && diff.s2.check_poles(omega, x).is_ok()
    });

    let values: Vec<f64> = points
        .par_iter()
        .map(|&(x, _)| diff.eval(x))
        .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::new();
    for k in 1..points.len() {
        let (xa, sa) = points[k - 1];
        let (xb, sb) = points[k];
        if sa != sb || xb <= xa {
            continue;
        }
        let (fa, fb) = (values[k - 1], values[k]);
        if fa == 0.0 {
            cells.push((xa, xa));
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            cells.push((xa, xb));
        }
    }

    let refined = cells
        .par_iter()
        .map(|&(a, b)| {
            let x = if a == b {
                a
            } else {
                bisect(|x| diff.eval(x).unwrap_or(f64::NAN), a, b, opts.rel_tol)?.x
            };
            let residual = diff.eval(x)?.abs();
            Ok(MagicPoint {
                wavelength: x,
                states: (state1.to_string(), state2.to_string()),
                residual_au: residual,
                bracket: (a, b),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(refined)
}

//! Trapping light fields and trap geometry: intensity profiles, recoil,
//! trap depth and harmonic frequencies, Lamb-Dicke parameters and the
//! gravitational offset between neighbouring sites of a vertical lattice.

use std::f64::consts::PI;

use crate::constants::{EPSILON_0, PLANCK, SPEED_OF_LIGHT};

/// Relative tolerance when a caller supplies both w0 and z0 for a Gaussian beam.
pub const RAYLEIGH_CONSISTENCY: f64 = 1e-6;

/// Minimum ratio of trap frequency to linewidth that counts as resolved-sideband.
pub const RESOLVED_SIDEBAND_RATIO: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldTrapError {
    #[error("{what} must be positive (got {value})")]
    NonPositive { what: &'static str, value: f64 },
    #[error("{what} must be non-negative (got {value})")]
    Negative { what: &'static str, value: f64 },
    #[error("Rayleigh range {given} m inconsistent with pi w0^2 / lambda = {derived} m")]
    RayleighMismatch { given: f64, derived: f64 },
    #[error("lattice orientation must be a non-zero vector")]
    BadOrientation,
}

pub type Result<T> = std::result::Result<T, FieldTrapError>;

fn positive(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(FieldTrapError::NonPositive { what, value })
    }
}

fn non_negative(what: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(FieldTrapError::Negative { what, value })
    }
}

/// Light polarization relative to the quantization axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Polarization {
    /// Linear, at angle `theta` (rad) between the polarization vector and
    /// the quantization axis.
    Linear { theta: f64 },
    /// Circular with helicity `+1` (sigma+) or `-1` (sigma-), propagating at
    /// angle `theta_k` (rad) to the quantization axis.
    Circular { helicity: i8, theta_k: f64 },
}

impl Polarization {
    /// Linear polarization along the quantization axis (pi light).
    pub const PI: Polarization = Polarization::Linear { theta: 0.0 };
    pub const SIGMA_PLUS: Polarization = Polarization::Circular { helicity: 1, theta_k: 0.0 };
    pub const SIGMA_MINUS: Polarization = Polarization::Circular { helicity: -1, theta_k: 0.0 };

    /// Degree of circularity times cos(theta_k); the weight of the vector term.
    pub fn vector_weight(&self) -> f64 {
        match *self {
            Polarization::Linear { .. } => 0.0,
            Polarization::Circular { helicity, theta_k } => helicity.signum() as f64 * theta_k.cos(),
        }
    }

    /// (3 |e_z|^2 - 1) / 2, the weight of the tensor term.
    pub fn tensor_weight(&self) -> f64 {
        let ez2 = match *self {
            Polarization::Linear { theta } => theta.cos().powi(2),
            Polarization::Circular { theta_k, .. } => 0.5 * theta_k.sin().powi(2),
        };
        0.5 * (3.0 * ez2 - 1.0)
    }
}

/// How strong the beam is: total power or peak (single-beam) intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeamStrength {
    Power(f64),
    PeakIntensity(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig {
    pub wavelength: f64,
    pub polarization: Polarization,
    pub strength: BeamStrength,
}

impl FieldConfig {
    pub fn validate(&self) -> Result<()> {
        positive("wavelength", self.wavelength)?;
        match self.strength {
            BeamStrength::Power(p) => non_negative("power", p)?,
            BeamStrength::PeakIntensity(i) => non_negative("intensity", i)?,
        };
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrapGeometry {
    GaussianBeam {
        waist: f64,
        /// Derived from the waist when absent.
        rayleigh_range: Option<f64>,
    },
    Lattice1d {
        waist: f64,
        orientation: [f64; 3],
        gravity_on: bool,
        /// Scale on the lossless 4x antinode enhancement; 1 for a perfect retro mirror.
        retro_scale: f64,
    },
}

impl TrapGeometry {
    pub fn gaussian(waist: f64) -> Self {
        TrapGeometry::GaussianBeam { waist, rayleigh_range: None }
    }

    /// Vertical lattice with gravity and a lossless retro-reflection.
    pub fn vertical_lattice(waist: f64) -> Self {
        TrapGeometry::Lattice1d {
            waist,
            orientation: [0.0, 0.0, 1.0],
            gravity_on: true,
            retro_scale: 1.0,
        }
    }

    pub fn waist(&self) -> f64 {
        match *self {
            TrapGeometry::GaussianBeam { waist, .. } | TrapGeometry::Lattice1d { waist, .. } => waist,
        }
    }

    /// Checks the geometry for wavelength `lambda`, filling in a derived
    /// Rayleigh range where needed.
    pub fn validated(&self, lambda: f64) -> Result<TrapGeometry> {
        positive("wavelength", lambda)?;
        match *self {
            TrapGeometry::GaussianBeam { waist, rayleigh_range } => {
                positive("waist", waist)?;
                let derived = rayleigh_range_of(waist, lambda);
                if let Some(given) = rayleigh_range {
                    positive("Rayleigh range", given)?;
                    if ((given - derived) / derived).abs() > RAYLEIGH_CONSISTENCY {
                        return Err(FieldTrapError::RayleighMismatch { given, derived });
                    }
                }
                Ok(TrapGeometry::GaussianBeam { waist, rayleigh_range: Some(derived) })
            }
            TrapGeometry::Lattice1d { waist, orientation, gravity_on, retro_scale } => {
                positive("waist", waist)?;
                non_negative("retro scale", retro_scale)?;
                let norm = orientation.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(norm > 0.0 && norm.is_finite()) {
                    return Err(FieldTrapError::BadOrientation);
                }
                Ok(TrapGeometry::Lattice1d {
                    waist,
                    orientation: orientation.map(|x| x / norm),
                    gravity_on,
                    retro_scale,
                })
            }
        }
    }
}

/// z0 = pi w0^2 / lambda.
pub fn rayleigh_range_of(waist: f64, lambda: f64) -> f64 {
    PI * waist * waist / lambda
}

/// Peak intensity of a single beam: either given, or 2P / (pi w0^2).
pub fn single_beam_peak_intensity(field: &FieldConfig, waist: f64) -> f64 {
    match field.strength {
        BeamStrength::PeakIntensity(i) => i,
        BeamStrength::Power(p) => 2.0 * p / (PI * waist * waist),
    }
}

/// Local time-averaged intensity (W/m^2) at radial offset `r` and axial
/// offset `z` from the focus (Gaussian beam) or from an antinode (lattice).
pub fn intensity_at(field: &FieldConfig, geom: &TrapGeometry, r: f64, z: f64) -> Result<f64> {
    field.validate()?;
    let geom = geom.validated(field.wavelength)?;
    let i0 = single_beam_peak_intensity(field, geom.waist());
    Ok(match geom {
        TrapGeometry::GaussianBeam { waist, rayleigh_range } => {
            let z0 = rayleigh_range.expect("validated geometry has z0");
            let axial = 1.0 + (z / z0).powi(2);
            let w2 = waist * waist * axial;
            i0 / axial * (-2.0 * r * r / w2).exp()
        }
        TrapGeometry::Lattice1d { waist, retro_scale, .. } => {
            let k = 2.0 * PI / field.wavelength;
            4.0 * retro_scale * i0 * (k * z).cos().powi(2) * (-2.0 * r * r / (waist * waist)).exp()
        }
    })
}

/// Peak intensity of the trap (focus or lattice antinode).
pub fn peak_intensity(field: &FieldConfig, geom: &TrapGeometry) -> Result<f64> {
    intensity_at(field, geom, 0.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recoil {
    /// E_rec = h^2 / (2 m lambda^2), J.
    pub energy: f64,
    /// E_rec / h, Hz.
    pub frequency: f64,
}

pub fn recoil(mass: f64, lambda: f64) -> Result<Recoil> {
    positive("mass", mass)?;
    positive("wavelength", lambda)?;
    let energy = PLANCK * PLANCK / (2.0 * mass * lambda * lambda);
    Ok(Recoil { energy, frequency: energy / PLANCK })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapFrequencies {
    pub axial: f64,
    pub radial: f64,
}

/// Harmonic trap frequencies (Hz) for a trap of depth `depth` (J, >= 0).
///
/// Lattice axial: 2 nu_rec sqrt(U0 / E_rec). Gaussian-beam axial:
/// (1/2pi) sqrt(2 U0 / (m z0^2)). Radial for both: (1/2pi) sqrt(4 U0 / (m w0^2)).
pub fn trap_frequencies(depth: f64, geom: &TrapGeometry, lambda: f64, mass: f64) -> Result<TrapFrequencies> {
    non_negative("trap depth", depth)?;
    let geom = geom.validated(lambda)?;
    let rec = recoil(mass, lambda)?;
    let waist = geom.waist();
    let radial = (4.0 * depth / (mass * waist * waist)).sqrt() / (2.0 * PI);
    let axial = match geom {
        TrapGeometry::Lattice1d { .. } => 2.0 * rec.frequency * (depth / rec.energy).sqrt(),
        TrapGeometry::GaussianBeam { rayleigh_range, .. } => {
            let z0 = rayleigh_range.expect("validated geometry has z0");
            (2.0 * depth / (mass * z0 * z0)).sqrt() / (2.0 * PI)
        }
    };
    Ok(TrapFrequencies { axial, radial })
}

/// eta = sqrt(nu_rec(probe) / nu_axial).
pub fn lamb_dicke(probe_lambda: f64, axial_frequency: f64, mass: f64) -> Result<f64> {
    positive("axial trap frequency", axial_frequency)?;
    let rec = recoil(mass, probe_lambda)?;
    Ok((rec.frequency / axial_frequency).sqrt())
}

/// Whether the motional sidebands are resolved: nu_axial >= 10 x linewidth.
pub fn resolved_sideband(axial_frequency: f64, linewidth: f64) -> bool {
    axial_frequency >= RESOLVED_SIDEBAND_RATIO * linewidth
}

/// Energy offset between neighbouring sites of a vertical lattice, in Hz:
/// m g (lambda/2) / h.
pub fn site_offset(mass: f64, lambda: f64, local_g: f64) -> f64 {
    mass * local_g * 0.5 * lambda / PLANCK
}

/// Depth (J, positive for an attractive trap) for polarizability
/// `alpha_si` (C m^2/V) at intensity `intensity`: alpha I / (2 eps0 c).
pub fn depth_from_polarizability(alpha_si: f64, intensity: f64) -> f64 {
    alpha_si * intensity / (2.0 * EPSILON_0 * SPEED_OF_LIGHT)
}

/// Summary of a trap for one species and one probe wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapParameters {
    /// U0 in J.
    pub depth: f64,
    pub depth_in_recoils: f64,
    pub depth_hz: f64,
    pub axial: f64,
    pub radial: f64,
    /// Lamb-Dicke parameter at the probe wavelength.
    pub eta: f64,
    /// Recoil at the trap wavelength.
    pub recoil: Recoil,
    /// Recoil at the probe wavelength.
    pub probe_recoil: Recoil,
    /// Site-to-site offset (Hz); zero unless the geometry is a lattice with gravity on.
    pub site_offset: f64,
}

pub fn trap_parameters(
    depth: f64,
    geom: &TrapGeometry,
    lambda: f64,
    mass: f64,
    probe_lambda: f64,
    local_g: f64,
) -> Result<TrapParameters> {
    let freqs = trap_frequencies(depth, geom, lambda, mass)?;
    let rec = recoil(mass, lambda)?;
    let probe_recoil = recoil(mass, probe_lambda)?;
    let eta = if freqs.axial > 0.0 {
        (probe_recoil.frequency / freqs.axial).sqrt()
    } else {
        f64::INFINITY
    };
    let site = match geom {
        TrapGeometry::Lattice1d { gravity_on: true, orientation, .. } => {
            let norm = orientation.iter().map(|x| x * x).sum::<f64>().sqrt();
            let vertical = if norm > 0.0 { (orientation[2] / norm).abs() } else { 0.0 };
            site_offset(mass, lambda, local_g * vertical)
        }
        _ => 0.0,
    };
    Ok(TrapParameters {
        depth,
        depth_in_recoils: depth / rec.energy,
        depth_hz: depth / PLANCK,
        axial: freqs.axial,
        radial: freqs.radial,
        eta,
        recoil: rec,
        probe_recoil,
        site_offset: site,
    })
}

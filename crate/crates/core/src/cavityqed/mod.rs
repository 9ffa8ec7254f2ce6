//! One atom in one cavity mode with trap-induced level shifts: coupling
//! constants from cavity geometry, dressed-state transition frequencies, the
//! Jaynes-Cummings ladder, and driven-dissipative steady states.
//!
//! All rates and frequencies are angular (rad/s). `kappa` and `gamma` are
//! field and polarization decay rates (half widths), so the master equation
//! uses jump operators sqrt(2 kappa) a and sqrt(2 gamma) sigma_minus.
//! `omega_a` and `omega_c` are measured from a common reference frequency,
//! which is also the origin of the probe frequency `omega_p`.

mod lindblad;

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::constants::{DIPOLE_AU, EPSILON_0, HBAR};

pub use lindblad::{steady_state, SteadyState};

/// Default Fock truncation for transmission spectra.
pub const DEFAULT_NMAX_SPECTRUM: usize = 5;
/// Default Fock truncation for g2(0).
pub const DEFAULT_NMAX_G2: usize = 8;
/// Top-Fock population above which a steady state is flagged as truncated.
pub const TRUNCATION_WARNING: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CavityError {
    #[error("{what} must be {bound} (got {value})")]
    OutOfRange { what: &'static str, bound: &'static str, value: f64 },
    #[error("dressed-state formula needs omega_a = omega_c (got {omega_a} and {omega_c} rad/s)")]
    AtomCavityDetuned { omega_a: f64, omega_c: f64 },
    #[error("manifold n = {n} outside 1..={nmax}")]
    ManifoldOutOfRange { n: usize, nmax: usize },
    #[error("Fock truncation {nmax} too small; need at least {need}")]
    TruncationTooSmall { nmax: usize, need: usize },
    #[error("singular Liouvillian (g = {g}, kappa = {kappa}, gamma = {gamma}, omega_p = {omega_p})")]
    Singular { g: f64, kappa: f64, gamma: f64, omega_p: f64 },
    #[error("g2(0) undefined: mean photon number is zero")]
    UndefinedG2,
    #[error("probe grid is empty")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, CavityError>;

fn positive(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CavityError::OutOfRange { what, bound: "positive", value })
    }
}

fn finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CavityError::OutOfRange { what, bound: "finite", value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySystem {
    pub g0: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub omega_a: f64,
    pub omega_c: f64,
    /// Trap shift of the ground level b.
    pub delta_b: f64,
    /// Trap shift of the excited level e.
    pub delta_e: f64,
    /// Mode function at the atom, |psi| <= 1.
    pub psi: f64,
    pub nmax: usize,
}

impl CavitySystem {
    /// Resonant atom and cavity at the reference frequency, no trap shifts,
    /// atom at an antinode.
    pub fn resonant(g0: f64, kappa: f64, gamma: f64, nmax: usize) -> Self {
        CavitySystem {
            g0,
            kappa,
            gamma,
            omega_a: 0.0,
            omega_c: 0.0,
            delta_b: 0.0,
            delta_e: 0.0,
            psi: 1.0,
            nmax,
        }
    }

    pub fn with_shifts(mut self, delta_b: f64, delta_e: f64) -> Self {
        self.delta_b = delta_b;
        self.delta_e = delta_e;
        self
    }

    pub fn with_nmax(mut self, nmax: usize) -> Self {
        self.nmax = nmax;
        self
    }

    /// Places the atom at axial position `z` of a standing wave of
    /// wavelength `lambda0`: psi = cos(2 pi z / lambda0).
    pub fn at_axial_position(mut self, z: f64, lambda0: f64) -> Self {
        self.psi = (2.0 * PI * z / lambda0).cos();
        self
    }

    /// g(r) = g0 psi(r).
    pub fn g(&self) -> f64 {
        self.g0 * self.psi
    }

    pub fn validate(&self) -> Result<()> {
        positive("g0", self.g0)?;
        positive("kappa", self.kappa)?;
        positive("gamma", self.gamma)?;
        finite("omega_a", self.omega_a)?;
        finite("omega_c", self.omega_c)?;
        finite("delta_b", self.delta_b)?;
        finite("delta_e", self.delta_e)?;
        if !(self.psi.abs() <= 1.0) {
            return Err(CavityError::OutOfRange { what: "|psi|", bound: "at most 1", value: self.psi });
        }
        if self.nmax < 2 {
            return Err(CavityError::TruncationTooSmall { nmax: self.nmax, need: 2 });
        }
        Ok(())
    }
}

/// g0 = sqrt(d^2 omega_c / (2 hbar eps0 V_m)). `dipole` in C m.
pub fn coupling_g0(dipole: f64, omega_c: f64, mode_volume: f64) -> Result<f64> {
    if !(dipole >= 0.0 && dipole.is_finite()) {
        return Err(CavityError::OutOfRange { what: "dipole", bound: "non-negative", value: dipole });
    }
    positive("cavity frequency", omega_c)?;
    positive("mode volume", mode_volume)?;
    Ok((dipole * dipole * omega_c / (2.0 * HBAR * EPSILON_0 * mode_volume)).sqrt())
}

/// V_m = (pi / 4) w0^2 l for a TEM00 standing-wave mode.
pub fn mode_volume(waist: f64, length: f64) -> Result<f64> {
    positive("waist", waist)?;
    positive("cavity length", length)?;
    Ok(0.25 * PI * waist * waist * length)
}

/// Dipole (C m) of the stretched-state cycling transition J -> J + 1 for a
/// reduced element `reduced_au` in the catalog convention.
pub fn stretched_dipole(reduced_au: f64, j_upper_degeneracy: u32) -> f64 {
    reduced_au * DIPOLE_AU / (j_upper_degeneracy as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalNumbers {
    /// Saturation photon number gamma^2 / g0^2.
    pub n0: f64,
    /// Critical atom number kappa gamma / g0^2.
    pub atoms0: f64,
    pub strong_coupling: bool,
}

pub fn critical_numbers(sys: &CavitySystem) -> Result<CriticalNumbers> {
    positive("g0", sys.g0)?;
    let g2 = sys.g0 * sys.g0;
    Ok(CriticalNumbers {
        n0: sys.gamma * sys.gamma / g2,
        atoms0: sys.kappa * sys.gamma / g2,
        strong_coupling: sys.g0 > sys.gamma && sys.g0 > sys.kappa,
    })
}

/// Transition frequencies of the two n = 1 dressed states, measured from
/// the bare atomic resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedPair {
    pub plus: f64,
    pub minus: f64,
}

/// Roots of x^2 - (de - db) x - g^2 = 0, evaluated without cancellation.
pub fn dressed_roots(delta_e: f64, delta_b: f64, g: f64) -> DressedPair {
    let h = 0.5 * (delta_e - delta_b);
    let s = h.hypot(g);
    if g == 0.0 {
        let (a, b) = (2.0 * h, 0.0);
        return DressedPair { plus: a.max(b), minus: a.min(b) };
    }
    if h == 0.0 {
        return DressedPair { plus: g.abs(), minus: -g.abs() };
    }
    if h > 0.0 {
        let plus = h + s;
        DressedPair { plus, minus: -g * g / plus }
    } else {
        let minus = h - s;
        DressedPair { plus: -g * g / minus, minus }
    }
}

/// Dressed transition pair at the atom's position. Requires omega_a = omega_c.
pub fn dressed_transitions(sys: &CavitySystem) -> Result<DressedPair> {
    let scale = sys.omega_a.abs().max(sys.omega_c.abs()).max(1.0);
    if (sys.omega_a - sys.omega_c).abs() > 1e-12 * scale {
        return Err(CavityError::AtomCavityDetuned { omega_a: sys.omega_a, omega_c: sys.omega_c });
    }
    Ok(dressed_roots(sys.delta_e, sys.delta_b, sys.g()))
}

/// Eigenvalues (ascending) of manifold n on {|e, n-1>, |g, n>} in the frame
/// rotating at n omega_c.
pub fn jc_ladder(sys: &CavitySystem, n: usize) -> Result<[f64; 2]> {
    if n == 0 || n > sys.nmax {
        return Err(CavityError::ManifoldOutOfRange { n, nmax: sys.nmax });
    }
    let a = sys.omega_a - sys.omega_c + sys.delta_e;
    let d = sys.delta_b;
    let c = (n as f64).sqrt() * sys.g();
    let mean = 0.5 * (a + d);
    let half = (0.5 * (a - d)).hypot(c);
    Ok([mean - half, mean + half])
}

/// Offset of the n = 1 -> 2 step on the lower branch from the bare
/// resonance: (sqrt 2 - 1) g0.
pub fn blockade_detuning(g0: f64) -> Result<f64> {
    positive("g0", g0)?;
    Ok((2f64.sqrt() - 1.0) * g0)
}

/// How far a probe tuned to the lower vacuum-Rabi peak misses the
/// n = 1 -> 2 step: (2 - sqrt 2) g0.
pub fn blockade_mismatch(g0: f64) -> Result<f64> {
    positive("g0", g0)?;
    Ok((2.0 - 2f64.sqrt()) * g0)
}

/// Probe-frequency scan of the steady state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub omega_p: Vec<f64>,
    /// Normalized so that the empty cavity on resonance transmits 1.
    pub transmission: Vec<f64>,
    pub mean_n: Vec<f64>,
    pub g2: Option<Vec<f64>>,
    /// Local maxima of the transmission, ascending.
    pub peaks: Vec<f64>,
    /// Largest top-Fock population over the scan.
    pub max_truncation: f64,
}

/// Local maxima of `y` on `x` above `floor * max(y)`.
pub fn find_peaks(x: &[f64], y: &[f64], floor: f64) -> Vec<f64> {
    let ymax = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > floor * ymax)
        .map(|i| x[i])
        .collect()
}

/// Steady state at every probe frequency in `grid`; points are solved in
/// parallel and merged in grid order.
pub fn vacuum_rabi_spectrum(sys: &CavitySystem, drive: f64, grid: &[f64], with_g2: bool) -> Result<ProbeResult> {
    if grid.is_empty() {
        return Err(CavityError::EmptyGrid);
    }
    if with_g2 && sys.nmax < 3 {
        return Err(CavityError::TruncationTooSmall { nmax: sys.nmax, need: 3 });
    }
    let states = grid
        .par_iter()
        .map(|&wp| {
            let ss = steady_state(sys, drive, wp)?;
            let g2 = if with_g2 { ss.g2().unwrap_or(f64::NAN) } else { f64::NAN };
            Ok((ss.transmission, ss.mean_n, g2, ss.top_fock_population))
        })
        .collect::<Result<Vec<_>>>()?;
    let transmission: Vec<f64> = states.iter().map(|s| s.0).collect();
    let peaks = find_peaks(grid, &transmission, 1e-3);
    Ok(ProbeResult {
        omega_p: grid.to_vec(),
        mean_n: states.iter().map(|s| s.1).collect(),
        g2: with_g2.then(|| states.iter().map(|s| s.2).collect()),
        max_truncation: states.iter().map(|s| s.3).fold(0.0, f64::max),
        transmission,
        peaks,
    })
}

/// g2(0) = <a+ a+ a a> / <a+ a>^2 in the steady state at probe `omega_p`.
pub fn g2_zero(sys: &CavitySystem, drive: f64, omega_p: f64) -> Result<f64> {
    if sys.nmax < 3 {
        return Err(CavityError::TruncationTooSmall { nmax: sys.nmax, need: 3 });
    }
    steady_state(sys, drive, omega_p)?.g2().ok_or(CavityError::UndefinedG2)
}

/// Relative change of <n> when the truncation grows from nmax to nmax + 2.
pub fn truncation_change(sys: &CavitySystem, drive: f64, omega_p: f64) -> Result<f64> {
    let a = steady_state(sys, drive, omega_p)?.mean_n;
    let b = steady_state(&sys.with_nmax(sys.nmax + 2), drive, omega_p)?.mean_n;
    Ok(((b - a) / b).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_volume_of_reference_cavity() {
        let v = mode_volume(24e-6, 42e-6).unwrap();
        assert!((v / 1.90e-14 - 1.0).abs() < 1e-2, "{v}");
        let v4 = mode_volume(48e-6, 42e-6).unwrap();
        assert!((v4 / v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn g0_scalings() {
        assert_eq!(coupling_g0(0.0, 2.2e15, 1e-14).unwrap(), 0.0);
        let a = coupling_g0(2.69e-29, 2.2e15, 1e-14).unwrap();
        let b = coupling_g0(2.69e-29, 2.2e15, 2e-14).unwrap();
        assert!((a / b - 2f64.sqrt()).abs() < 1e-12);
        assert!(coupling_g0(1e-29, 0.0, 1e-14).is_err());
    }

    #[test]
    fn critical_numbers_values() {
        let sys = CavitySystem::resonant(2.0 * PI * 34e6, 2.0 * PI * 4.1e6, 2.0 * PI * 2.6e6, 5);
        let c = critical_numbers(&sys).unwrap();
        assert!((c.n0 - 0.00585).abs() < 1e-4, "{}", c.n0);
        assert!(c.strong_coupling);
        let eq = CavitySystem::resonant(10.0, 1.0, 1.0, 5);
        let c = critical_numbers(&eq).unwrap();
        assert_eq!(c.n0, c.atoms0);
    }

    #[test]
    fn dressed_special_cases() {
        let p = dressed_roots(0.7, 0.7, 2.0);
        assert_eq!((p.plus, p.minus), (2.0, -2.0));
        let p = dressed_roots(1.5, 0.0, 0.0);
        assert_eq!((p.plus, p.minus), (1.5, 0.0));
        let sys = CavitySystem { omega_a: 1.0, ..CavitySystem::resonant(1.0, 1.0, 1.0, 2) };
        assert!(matches!(dressed_transitions(&sys), Err(CavityError::AtomCavityDetuned { .. })));
    }

    #[test]
    fn ladder_without_shifts() {
        let sys = CavitySystem::resonant(3.0, 1.0, 1.0, 4);
        assert_eq!(jc_ladder(&sys, 1).unwrap(), [-3.0, 3.0]);
        let [lo, hi] = jc_ladder(&sys, 2).unwrap();
        assert!((hi - 3.0 * 2f64.sqrt()).abs() < 1e-15 && (lo + hi).abs() < 1e-15);
        assert!(jc_ladder(&sys, 0).is_err());
        assert!(jc_ladder(&sys, 5).is_err());
    }

    #[test]
    fn blockade_values() {
        let g0 = 2.0 * PI * 34e6;
        let d = blockade_detuning(g0).unwrap() / (2.0 * PI);
        assert!((d / 14.08e6 - 1.0).abs() < 1e-3);
        assert!(blockade_detuning(0.0).is_err());
    }

    #[test]
    fn peak_finder() {
        let x: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let y = [0.0, 1.0, 3.0, 1.0, 0.0, 0.0, 0.5, 2.0, 0.5, 0.0, 0.0];
        assert_eq!(find_peaks(&x, &y, 1e-3), vec![2.0, 7.0]);
    }
}

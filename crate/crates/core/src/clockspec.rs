//! Lattice-clock spectra: Rabi line shapes, Zeeman pi-multiplets, motional
//! sidebands in the Lamb-Dicke regime, and aggregation of absolute-frequency
//! measurements.

use std::f64::consts::PI;
use std::io::Read;

use crate::angular::HalfInt;
use crate::roots::bisect;

/// Reporting offset for the Sr-87 clock transition, Hz.
pub const SR87_NU0_OFFSET_HZ: f64 = 429_228_004_229_800.0;
/// Natural linewidth of the Sr-87 clock transition, Hz.
pub const SR87_NATURAL_LINEWIDTH_HZ: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum ClockSpecError {
    #[error("{what} must be {bound} (got {value})")]
    OutOfRange { what: &'static str, bound: &'static str, value: f64 },
    #[error("detuning grid is empty")]
    EmptyGrid,
    #[error("detuning grid must be strictly increasing")]
    UnsortedGrid,
    #[error("Lamb-Dicke parameter {0} >= 1: lowest-order sideband model does not apply")]
    EtaTooLarge(f64),
    #[error("sideband ratio {0} must lie in [0, 1)")]
    BadRatio(f64),
    #[error("no measurements to aggregate")]
    NoMeasurements,
    #[error("measurement {site}: {message}")]
    BadMeasurement { site: String, message: String },
    #[error("measurement file: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, ClockSpecError>;

fn positive(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ClockSpecError::OutOfRange { what, bound: "positive", value })
    }
}

fn non_negative(what: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ClockSpecError::OutOfRange { what, bound: "non-negative", value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockTransition {
    pub nu0_offset_hz: f64,
    pub natural_linewidth_hz: f64,
    /// F of both clock states.
    pub f: HalfInt,
    /// Differential Zeeman splitting per unit field per unit m_F, Hz/T.
    pub delta_g_hz_per_t: f64,
}

impl ClockTransition {
    /// Sr-87 with a caller-supplied differential g-factor.
    pub fn sr87(delta_g_hz_per_t: f64) -> Self {
        ClockTransition {
            nu0_offset_hz: SR87_NU0_OFFSET_HZ,
            natural_linewidth_hz: SR87_NATURAL_LINEWIDTH_HZ,
            f: HalfInt::from_twice(9),
            delta_g_hz_per_t,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("natural linewidth", self.natural_linewidth_hz)?;
        if self.f.is_negative() {
            return Err(ClockSpecError::OutOfRange { what: "F", bound: "non-negative", value: self.f.value() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub label: String,
    pub position_hz: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub detuning_hz: Vec<f64>,
    pub response: Vec<f64>,
    pub features: Vec<Feature>,
    /// Full width at half maximum of the central feature, when defined.
    pub fwhm_hz: Option<f64>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(ClockSpecError::EmptyGrid);
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|x| !x.is_finite()) {
        return Err(ClockSpecError::UnsortedGrid);
    }
    Ok(())
}

/// Evenly spaced grid from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Rabi frequency (rad/s) of a pi pulse of duration `t`.
pub fn pi_pulse_rabi(t: f64) -> f64 {
    PI / t
}

/// Excitation probability after a square pulse of Rabi frequency `omega`
/// (rad/s) and length `t` (s), at detuning `delta_hz`.
pub fn rabi_probability(omega: f64, t: f64, delta_hz: f64) -> f64 {
    let da = 2.0 * PI * delta_hz;
    let w2 = omega * omega + da * da;
    omega * omega / w2 * (0.5 * w2.sqrt() * t).sin().powi(2)
}

/// Saturated profile: min(1, s P).
pub fn rabi_saturated(omega: f64, t: f64, delta_hz: f64, saturation: f64) -> f64 {
    (saturation * rabi_probability(omega, t, delta_hz)).min(1.0)
}

/// FWHM (Hz) of the central lobe, found by bisection between line centre
/// and the first zero. `None` when the centre is dark (2 pi n pulse) or the
/// first zero does not exist.
pub fn rabi_fwhm(omega: f64, t: f64, saturation: f64) -> Result<Option<f64>> {
    positive("Rabi frequency", omega)?;
    positive("pulse length", t)?;
    positive("saturation", saturation)?;
    let peak = rabi_saturated(omega, t, 0.0, saturation);
    if peak < 1e-12 {
        return Ok(None);
    }
    let zero_sq = (2.0 * PI / t).powi(2) - omega * omega;
    if zero_sq <= 0.0 {
        return Ok(None);
    }
    let first_zero_hz = zero_sq.sqrt() / (2.0 * PI);
    let half = 0.5 * peak;
    let root = bisect(|d| rabi_saturated(omega, t, d, saturation) - half, 0.0, first_zero_hz, 1e-13)
        .map_err(|_| ClockSpecError::OutOfRange { what: "Rabi pulse area", bound: "at most 2 pi", value: omega * t })?;
    Ok(Some(2.0 * root.x))
}

/// Rabi spectrum on `grid` (Hz) with saturation `s` (1 = unsaturated).
pub fn rabi_lineshape(omega: f64, t: f64, grid: &[f64], saturation: f64) -> Result<SpectrumTrace> {
    check_grid(grid)?;
    let fwhm = rabi_fwhm(omega, t, saturation)?;
    let response = grid.iter().map(|&d| rabi_saturated(omega, t, d, saturation)).collect();
    Ok(SpectrumTrace {
        detuning_hz: grid.to_vec(),
        response,
        features: vec![Feature { label: "carrier".into(), position_hz: 0.0, weight: 1.0 }],
        fwhm_hz: fwhm,
    })
}

/// nu / FWHM.
pub fn quality_factor(frequency_hz: f64, fwhm_hz: f64) -> Result<f64> {
    positive("frequency", frequency_hz)?;
    positive("linewidth", fwhm_hz)?;
    Ok(frequency_hz / fwhm_hz)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeemanLine {
    pub m_f: HalfInt,
    pub offset_hz: f64,
}

/// pi-transitions (Delta m_F = 0) at offsets m_F dg B, ordered by m_F.
pub fn zeeman_multiplet(transition: &ClockTransition, field_t: f64) -> Result<Vec<ZeemanLine>> {
    transition.validate()?;
    if !field_t.is_finite() {
        return Err(ClockSpecError::OutOfRange { what: "field", bound: "finite", value: field_t });
    }
    Ok(transition
        .f
        .projections()
        .map(|m| ZeemanLine { m_f: m, offset_hz: m.value() * transition.delta_g_hz_per_t * field_t })
        .collect())
}

/// Mean of a +m_F / -m_F pair; cancels every shift odd in m_F.
pub fn pair_average(nu_plus: f64, nu_minus: f64) -> f64 {
    0.5 * (nu_plus + nu_minus)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandWeights {
    pub carrier: f64,
    pub red: f64,
    pub blue: f64,
}

impl SidebandWeights {
    /// red / blue; 0 at nbar = 0.
    pub fn asymmetry(&self) -> f64 {
        self.red / self.blue
    }
}

/// Lowest-order Lamb-Dicke weights: carrier 1, red eta^2 nbar, blue eta^2 (nbar + 1).
pub fn sideband_weights(eta: f64, nbar: f64) -> Result<SidebandWeights> {
    non_negative("Lamb-Dicke parameter", eta)?;
    if eta >= 1.0 {
        return Err(ClockSpecError::EtaTooLarge(eta));
    }
    non_negative("mean occupation", nbar)?;
    let e2 = eta * eta;
    Ok(SidebandWeights { carrier: 1.0, red: e2 * nbar, blue: e2 * (nbar + 1.0) })
}

fn lorentzian(x: f64, fwhm: f64) -> f64 {
    let h = 0.5 * fwhm;
    h * h / (x * x + h * h)
}

/// Carrier and first sidebands, each a Lorentzian of FWHM `carrier_width`
/// scaled by its weight.
pub fn sideband_spectrum(eta: f64, nu_z: f64, nbar: f64, carrier_width: f64, grid: &[f64]) -> Result<SpectrumTrace> {
    check_grid(grid)?;
    positive("axial frequency", nu_z)?;
    positive("carrier width", carrier_width)?;
    let w = sideband_weights(eta, nbar)?;
    let features = vec![
        Feature { label: "red".into(), position_hz: -nu_z, weight: w.red },
        Feature { label: "carrier".into(), position_hz: 0.0, weight: w.carrier },
        Feature { label: "blue".into(), position_hz: nu_z, weight: w.blue },
    ];
    let response = grid
        .iter()
        .map(|&d| features.iter().map(|f| f.weight * lorentzian(d - f.position_hz, carrier_width)).sum())
        .collect();
    Ok(SpectrumTrace { detuning_hz: grid.to_vec(), response, features, fwhm_hz: Some(carrier_width) })
}

/// Inverse of the red/blue asymmetry: nbar = r / (1 - r).
pub fn nbar_from_asymmetry(ratio: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(ClockSpecError::BadRatio(ratio));
    }
    Ok(ratio / (1.0 - ratio))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub site: String,
    /// Relative to the reporting offset, Hz.
    pub value_hz: f64,
    pub stat_hz: f64,
    pub sys_hz: f64,
}

impl Measurement {
    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| ClockSpecError::BadMeasurement { site: self.site.clone(), message };
        if !self.value_hz.is_finite() {
            return Err(bad("value is not finite".into()));
        }
        if !(self.stat_hz > 0.0 && self.stat_hz.is_finite()) {
            return Err(bad(format!("statistical sigma must be positive (got {})", self.stat_hz)));
        }
        if !(self.sys_hz > 0.0 && self.sys_hz.is_finite()) {
            return Err(bad(format!("systematic sigma must be positive (got {})", self.sys_hz)));
        }
        Ok(())
    }

    pub fn total_sigma(&self) -> f64 {
        self.stat_hz.hypot(self.sys_hz)
    }
}

/// Column names of the measurement ledger.
pub const MEASUREMENT_HEADER: [&str; 4] = ["site", "value_hz_minus_nu0", "stat_hz", "sys_hz"];

/// Reads a measurement ledger (CSV with [`MEASUREMENT_HEADER`]). Lines
/// starting with `#` are comments.
pub fn read_measurements<R: Read>(reader: R) -> Result<Vec<Measurement>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let index = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| ClockSpecError::BadMeasurement {
            site: "<header>".into(),
            message: format!("missing column {name:?}"),
        })
    };
    let cols = [index(MEASUREMENT_HEADER[0])?, index(MEASUREMENT_HEADER[1])?, index(MEASUREMENT_HEADER[2])?, index(MEASUREMENT_HEADER[3])?];
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let site = record.get(cols[0]).unwrap_or("").to_string();
        let num = |k: usize| -> Result<f64> {
            let raw = record.get(cols[k]).unwrap_or("");
            raw.parse().map_err(|_| ClockSpecError::BadMeasurement {
                site: site.clone(),
                message: format!("{}: not a number: {raw:?}", MEASUREMENT_HEADER[k]),
            })
        };
        let m = Measurement { value_hz: num(1)?, stat_hz: num(2)?, sys_hz: num(3)?, site: site.clone() };
        m.validate()?;
        out.push(m);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    /// Weighted mean relative to the reporting offset, Hz.
    pub mean_hz: f64,
    pub sigma_mean_hz: f64,
    /// Reduced chi-square about the mean; 0 when undefined.
    pub reduced_chi2: f64,
    /// False for a single measurement.
    pub chi2_defined: bool,
    pub count: usize,
}

/// Inverse-variance weighted mean with sigma^2 = stat^2 + sys^2.
pub fn aggregate_measurements(measurements: &[Measurement]) -> Result<Aggregate> {
    if measurements.is_empty() {
        return Err(ClockSpecError::NoMeasurements);
    }
    for m in measurements {
        m.validate()?;
    }
    let weights: Vec<f64> = measurements.iter().map(|m| m.total_sigma().powi(-2)).collect();
    let wsum: f64 = weights.iter().sum();
    let mean = measurements.iter().zip(&weights).map(|(m, w)| w * m.value_hz).sum::<f64>() / wsum;
    let n = measurements.len();
    let (reduced_chi2, chi2_defined) = if n > 1 {
        let chi2: f64 = measurements.iter().zip(&weights).map(|(m, w)| w * (m.value_hz - mean).powi(2)).sum();
        (chi2 / (n - 1) as f64, true)
    } else {
        (0.0, false)
    };
    Ok(Aggregate { mean_hz: mean, sigma_mean_hz: wsum.sqrt().recip(), reduced_chi2, chi2_defined, count: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonant_pi_pulse() {
        let t = 0.5;
        assert!((rabi_probability(pi_pulse_rabi(t), t, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fwhm_times_t_is_constant() {
        let mut products = Vec::new();
        for t in [0.1, 0.5, 2.0] {
            let w = rabi_fwhm(pi_pulse_rabi(t), t, 1.0).unwrap().unwrap();
            products.push(w * t);
        }
        for p in &products {
            assert!((p - products[0]).abs() < 1e-9);
            assert!((p - 0.7987).abs() < 1e-3, "{p}");
        }
    }

    #[test]
    fn two_pi_pulse_has_no_fwhm() {
        assert_eq!(rabi_fwhm(2.0 * PI, 1.0, 1.0).unwrap(), None);
    }

    #[test]
    fn saturation_clamps() {
        let t = 0.5;
        let tr = rabi_lineshape(pi_pulse_rabi(t), t, &linear_grid(-3.0, 3.0, 61), 4.0).unwrap();
        assert!(tr.response.iter().all(|&p| (0.0..=1.0).contains(&p)));
        assert!(tr.fwhm_hz.unwrap() > rabi_fwhm(pi_pulse_rabi(t), t, 1.0).unwrap().unwrap());
    }

    #[test]
    fn grid_errors() {
        assert!(matches!(rabi_lineshape(1.0, 1.0, &[], 1.0), Err(ClockSpecError::EmptyGrid)));
        assert!(matches!(rabi_lineshape(1.0, 1.0, &[1.0, 0.0], 1.0), Err(ClockSpecError::UnsortedGrid)));
    }

    #[test]
    fn zeeman_at_zero_field() {
        let lines = zeeman_multiplet(&ClockTransition::sr87(-1e6), 0.0).unwrap();
        assert_eq!(lines.len(), 10);
        assert!(lines.iter().all(|l| l.offset_hz == 0.0));
    }

    #[test]
    fn pair_average_keeps_even_term() {
        assert_eq!(pair_average(10.0 + 3.0, 10.0 - 3.0), 10.0);
        let q = 0.25;
        assert_eq!(pair_average(10.0 + 3.0 + q, 10.0 - 3.0 + q), 10.0 + q);
    }

    #[test]
    fn sideband_weights_and_errors() {
        let w = sideband_weights(0.3, 0.0).unwrap();
        assert_eq!(w.red, 0.0);
        assert!(matches!(sideband_weights(1.0, 1.0), Err(ClockSpecError::EtaTooLarge(_))));
        assert!(sideband_weights(0.3, -1.0).is_err());
        assert_eq!(sideband_weights(0.3, 1.0).unwrap().asymmetry(), 0.5);
    }

    #[test]
    fn nbar_inverse() {
        assert_eq!(nbar_from_asymmetry(0.0).unwrap(), 0.0);
        assert_eq!(nbar_from_asymmetry(0.5).unwrap(), 1.0);
        assert!(nbar_from_asymmetry(1.0).is_err());
    }

    #[test]
    fn aggregate_simple_cases() {
        let m = |v: f64, s: f64| Measurement { site: "x".into(), value_hz: v, stat_hz: s, sys_hz: s };
        let one = aggregate_measurements(&[m(5.0, 1.0)]).unwrap();
        assert_eq!(one.mean_hz, 5.0);
        assert!(!one.chi2_defined);
        let two = aggregate_measurements(&[m(1.0, 1.0), m(3.0, 1.0)]).unwrap();
        assert!((two.mean_hz - 2.0).abs() < 1e-15);
        assert!((two.sigma_mean_hz - 1.0).abs() < 1e-15);
        assert!(aggregate_measurements(&[]).is_err());
        assert!(aggregate_measurements(&[m(1.0, 0.0)]).is_err());
    }

    #[test]
    fn reads_ledger() {
        let text = "# illustrative\nsite,value_hz_minus_nu0,stat_hz,sys_hz\nA, 70, 1, 2\nB,72.5,0.5,1\n";
        let ms = read_measurements(text.as_bytes()).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[1].value_hz, 72.5);
        assert!(read_measurements("site,value_hz_minus_nu0,stat_hz\n".as_bytes()).is_err());
        assert!(read_measurements("site,value_hz_minus_nu0,stat_hz,sys_hz\nA,x,1,1\n".as_bytes()).is_err());
    }
}

//! Quantities with mandatory unit suffixes, e.g. `813.428nm`, `34e6hz`.
//! Suffixes are case-insensitive; whitespace between number and unit is allowed.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Length,
    Frequency,
    /// Angular rate in rad/s; ordinary-frequency suffixes are multiplied by 2 pi.
    Rate,
    Time,
    Power,
    Intensity,
    Field,
    ZeemanSlope,
    Acceleration,
    Angle,
    Mass,
}

impl Kind {
    /// (suffix, factor to SI).
    pub fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Kind::Length => &[("nm", 1e-9), ("um", 1e-6), ("mm", 1e-3), ("cm", 1e-2), ("m", 1.0)],
            Kind::Frequency => &[("hz", 1.0), ("khz", 1e3), ("mhz", 1e6), ("ghz", 1e9), ("thz", 1e12)],
            Kind::Rate => &[
                ("rad/s", 1.0),
                ("hz", 2.0 * PI),
                ("khz", 2.0 * PI * 1e3),
                ("mhz", 2.0 * PI * 1e6),
                ("ghz", 2.0 * PI * 1e9),
            ],
            Kind::Time => &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9)],
            Kind::Power => &[("w", 1.0), ("mw", 1e-3), ("uw", 1e-6)],
            Kind::Intensity => &[("w/m2", 1.0), ("w/cm2", 1e4), ("kw/cm2", 1e7), ("mw/cm2", 10.0)],
            Kind::Field => &[("t", 1.0), ("mt", 1e-3), ("ut", 1e-6), ("gauss", 1e-4), ("mgauss", 1e-7)],
            Kind::ZeemanSlope => &[("hz/t", 1.0), ("hz/mt", 1e3), ("hz/gauss", 1e4)],
            Kind::Acceleration => &[("m/s2", 1.0)],
            Kind::Angle => &[("rad", 1.0), ("deg", PI / 180.0)],
            Kind::Mass => &[("kg", 1.0), ("u", magictrap::constants::ATOMIC_MASS_UNIT)],
        }
    }

    pub fn describe(self) -> String {
        self.units().iter().map(|(u, _)| *u).collect::<Vec<_>>().join(", ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitError(pub String);

impl std::fmt::Display for UnitError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UnitError {}

/// Splits `text` into number and unit, and returns the value in SI units.
pub fn parse(text: &str, kind: Kind) -> Result<f64, UnitError> {
    let lower = text.trim().to_ascii_lowercase();
    let mut units: Vec<&(&str, f64)> = kind.units().iter().collect();
    units.sort_by_key(|(u, _)| std::cmp::Reverse(u.len()));
    for (unit, factor) in units {
        if let Some(num) = lower.strip_suffix(unit) {
            let num = num.trim_end();
            if let Ok(x) = num.parse::<f64>() {
                if !x.is_finite() {
                    break;
                }
                return Ok(x * factor);
            }
        }
    }
    Err(UnitError(format!("cannot read {text:?}: expected a number with one of the units [{}]", kind.describe())))
}

/// Key-form suffix of a unit: `hz/t` -> `hz_per_t`.
pub fn key_suffix(unit: &str) -> String {
    unit.replace('/', "_per_")
}

/// Depth of a trap: in recoil energies, joules, or as U/h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Depth {
    Recoils(f64),
    Joules(f64),
    Hertz(f64),
}

pub const DEPTH_UNITS: &str = "erec, j, hz, khz, mhz";

pub fn parse_depth(text: &str) -> Result<Depth, UnitError> {
    let lower = text.trim().to_ascii_lowercase();
    let num = |s: &str| s.trim_end().parse::<f64>().ok().filter(|x| x.is_finite());
    let table: [(&str, fn(f64) -> Depth); 5] = [
        ("erec", Depth::Recoils),
        ("khz", |x| Depth::Hertz(x * 1e3)),
        ("mhz", |x| Depth::Hertz(x * 1e6)),
        ("hz", Depth::Hertz),
        ("j", Depth::Joules),
    ];
    for (unit, make) in table {
        if let Some(v) = lower.strip_suffix(unit).and_then(num) {
            return Ok(make(v));
        }
    }
    Err(UnitError(format!("cannot read depth {text:?}: expected a number with one of the units [{DEPTH_UNITS}]")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths() {
        assert_eq!(parse("813.428nm", Kind::Length).unwrap(), 813.428e-9);
        assert_eq!(parse("24 um", Kind::Length).unwrap(), 24e-6);
        assert_eq!(parse("1m", Kind::Length).unwrap(), 1.0);
        assert!(parse("813.428", Kind::Length).is_err());
        assert!(parse("813hz", Kind::Length).is_err());
    }

    #[test]
    fn frequencies_and_rates() {
        assert_eq!(parse("34e6hz", Kind::Frequency).unwrap(), 34e6);
        assert_eq!(parse("34MHz", Kind::Frequency).unwrap(), 34e6);
        assert_eq!(parse("1e6hz", Kind::Rate).unwrap(), 2.0 * PI * 1e6);
        assert_eq!(parse("5rad/s", Kind::Rate).unwrap(), 5.0);
    }

    #[test]
    fn compound_units() {
        assert_eq!(parse("10kw/cm2", Kind::Intensity).unwrap(), 1e8);
        assert_eq!(parse("1e8w/m2", Kind::Intensity).unwrap(), 1e8);
        assert_eq!(parse("0.5gauss", Kind::Field).unwrap(), 0.5e-4);
        assert_eq!(parse("-108.4hz/gauss", Kind::ZeemanSlope).unwrap(), -108.4e4);
        assert_eq!(parse("500ms", Kind::Time).unwrap(), 0.5);
        assert_eq!(key_suffix("hz/t"), "hz_per_t");
    }

    #[test]
    fn depths() {
        assert_eq!(parse_depth("50erec").unwrap(), Depth::Recoils(50.0));
        assert_eq!(parse_depth("160khz").unwrap(), Depth::Hertz(160e3));
        assert_eq!(parse_depth("1e-28J").unwrap(), Depth::Joules(1e-28));
        assert!(parse_depth("50").is_err());
    }

    #[test]
    fn error_lists_units() {
        let e = parse("3", Kind::Time).unwrap_err();
        assert!(e.0.contains("ms"), "{e}");
    }
}

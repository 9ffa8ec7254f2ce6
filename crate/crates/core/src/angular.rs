//! Half-integer angular momenta and the Wigner 6j symbol.

use std::fmt;
use std::str::FromStr;

/// A half-integer quantum number, stored as twice its value so that
/// arithmetic and comparisons stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(n: i32) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Multiplicity 2J + 1.
    pub fn degeneracy(self) -> u32 {
        (self.0 + 1).max(0) as u32
    }

    /// The projections -J, -J+1, ..., J.
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        let j = self.0;
        (-j..=j).step_by(2).map(HalfInt)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a half-integer: {0:?}")]
pub struct ParseHalfIntError(pub String);

impl FromStr for HalfInt {
    type Err = ParseHalfIntError;

    /// Accepts `9/2`, `-3/2`, `4`, or a decimal such as `4.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseHalfIntError(s.to_string());
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| err())?;
            return match den.trim() {
                "2" => Ok(HalfInt(num)),
                "1" => Ok(HalfInt(2 * num)),
                _ => Err(err()),
            };
        }
        if let Ok(n) = s.parse::<i32>() {
            return Ok(HalfInt(2 * n));
        }
        let x: f64 = s.parse().map_err(|_| err())?;
        let twice = 2.0 * x;
        if twice.is_finite() && (twice - twice.round()).abs() < 1e-9 {
            Ok(HalfInt(twice.round() as i32))
        } else {
            Err(err())
        }
    }
}

fn factorial(n: i32) -> f64 {
    debug_assert!(n >= 0);
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

// Triangle coefficient Delta(abc), arguments given doubled.
fn triangle(a: i32, b: i32, c: i32) -> Option<f64> {
    let (s1, s2, s3) = (a + b - c, a - b + c, -a + b + c);
    if s1 < 0 || s2 < 0 || s3 < 0 || s1 % 2 != 0 || s2 % 2 != 0 || s3 % 2 != 0 {
        return None;
    }
    Some(
        factorial(s1 / 2) * factorial(s2 / 2) * factorial(s3 / 2)
            / factorial((a + b + c) / 2 + 1),
    )
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6} by the Racah formula.
///
/// Returns 0 whenever a triad violates the triangle rule. Intended for the
/// small angular momenta of atomic structure; factorials are evaluated in
/// floating point.
pub fn wigner_6j(j1: HalfInt, j2: HalfInt, j3: HalfInt, j4: HalfInt, j5: HalfInt, j6: HalfInt) -> f64 {
    let (a, b, c, d, e, f) = (j1.0, j2.0, j3.0, j4.0, j5.0, j6.0);
    if [a, b, c, d, e, f].iter().any(|&x| x < 0) {
        return 0.0;
    }
    let triads = [(a, b, c), (a, e, f), (d, b, f), (d, e, c)];
    let mut prefactor = 1.0;
    for &(x, y, z) in &triads {
        match triangle(x, y, z) {
            Some(t) => prefactor *= t,
            None => return 0.0,
        }
    }
    let prefactor = prefactor.sqrt();

    // Sums in units of 1 (the doubled arguments are even per triad).
    let alpha = [(a + b + c) / 2, (a + e + f) / 2, (d + b + f) / 2, (d + e + c) / 2];
    let beta = [(a + b + d + e) / 2, (a + c + d + f) / 2, (b + c + e + f) / 2];
    let t_min = *alpha.iter().max().unwrap();
    let t_max = *beta.iter().min().unwrap();

    let mut sum = 0.0;
    for t in t_min..=t_max {
        let mut denom = 1.0;
        for &al in &alpha {
            denom *= factorial(t - al);
        }
        for &be in &beta {
            denom *= factorial(be - t);
        }
        let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * factorial(t + 1) / denom;
    }
    prefactor * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(twice: i32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("9/2".parse::<HalfInt>().unwrap(), h(9));
        assert_eq!("4.5".parse::<HalfInt>().unwrap(), h(9));
        assert_eq!("2".parse::<HalfInt>().unwrap(), h(4));
        assert_eq!("-1/2".parse::<HalfInt>().unwrap(), h(-1));
        assert!("1/3".parse::<HalfInt>().is_err());
        assert!("0.3".parse::<HalfInt>().is_err());
        assert_eq!(h(9).to_string(), "9/2");
        assert_eq!(h(4).to_string(), "2");
    }

    #[test]
    fn projections_of_nine_halves() {
        let ms: Vec<_> = h(9).projections().collect();
        assert_eq!(ms.len(), 10);
        assert_eq!(ms[0], h(-9));
        assert_eq!(ms[9], h(9));
    }

    #[test]
    fn known_6j_values() {
        let one = HalfInt::from_int(1);
        let zero = HalfInt::ZERO;
        let two = HalfInt::from_int(2);
        // {1 1 1; 1 1 0} = -1/3, {1 1 1; 1 1 1} = 1/6, {1 1 1; 1 1 2} = 1/6
        assert!((wigner_6j(one, one, one, one, one, zero) + 1.0 / 3.0).abs() < 1e-14);
        assert!((wigner_6j(one, one, one, one, one, one) - 1.0 / 6.0).abs() < 1e-14);
        assert!((wigner_6j(one, one, one, one, one, two) - 1.0 / 6.0).abs() < 1e-14);
        // {1 1 2; 1 1 0} = 1/3, {1 1 2; 1 1 2} = 1/30
        assert!((wigner_6j(one, one, two, one, one, zero) - 1.0 / 3.0).abs() < 1e-14);
        assert!((wigner_6j(one, one, two, one, one, two) - 1.0 / 30.0).abs() < 1e-14);
        // {1 1 1; 1/2 1/2 1/2} = -1/3, {1 1 1; 1/2 1/2 3/2} = -1/6
        assert!((wigner_6j(one, one, one, h(1), h(1), h(1)) + 1.0 / 3.0).abs() < 1e-14);
        assert!((wigner_6j(one, one, one, h(1), h(1), h(3)) + 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn triangle_violation_is_zero() {
        let one = HalfInt::from_int(1);
        let three = HalfInt::from_int(3);
        assert_eq!(wigner_6j(one, one, three, one, one, one), 0.0);
    }

    #[test]
    fn orthogonality() {
        // sum_x (2x+1)(2j+1) {a b x; c d j}{a b x; c d j'} = delta_jj'
        let (a, b, c, d) = (h(2), h(3), h(2), h(3));
        for j in (1..=5).step_by(2).map(h) {
            for jp in (1..=5).step_by(2).map(h) {
                let mut s = 0.0;
                for x in (1..=9).step_by(2).map(h) {
                    s += (x.twice() + 1) as f64
                        * (j.twice() + 1) as f64
                        * wigner_6j(a, b, x, c, d, j)
                        * wigner_6j(a, b, x, c, d, jp);
                }
                let expect = if j == jp { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12, "j={j} j'={jp} sum={s}");
            }
        }
    }
}

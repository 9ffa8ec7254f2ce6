//! Bracketing root refinement.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("interval [{lo}, {hi}] does not bracket a sign change")]
    NotBracketed { lo: f64, hi: f64 },
    #[error("function is not finite at x = {0}")]
    NonFinite(f64),
}

/// A refined root together with the final bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

/// Bisection on `[lo, hi]` until the bracket width falls below
/// `rel_tol * |x|`. A last false-position step inside the final bracket
/// gives the returned abscissa.
pub fn bisect<F>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<Root, RootError>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let fb = f(b);
    if !fa.is_finite() {
        return Err(RootError::NonFinite(a));
    }
    if !fb.is_finite() {
        return Err(RootError::NonFinite(b));
    }
    if fa == 0.0 {
        return Ok(Root { x: a, lo: a, hi: a, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, lo: b, hi: b, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NotBracketed { lo, hi });
    }
    let mut fb = fb;

    let mut iterations = 0;
    while iterations < 200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if (b - a) <= rel_tol * mid.abs() {
            break;
        }
        let fm = f(mid);
        if !fm.is_finite() {
            return Err(RootError::NonFinite(mid));
        }
        iterations += 1;
        if fm == 0.0 {
            return Ok(Root { x: mid, lo: mid, hi: mid, iterations });
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    let x = (a - fa * (b - a) / (fb - fa)).clamp(a, b);
    Ok(Root { x, lo: a, hi: b, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-11);
        assert!(r.lo <= r.x && r.x <= r.hi);
    }

    #[test]
    fn reversed_interval() {
        let r = bisect(|x| x - 0.3, 1.0, 0.0, 1e-12).unwrap();
        assert!((r.x - 0.3).abs() < 1e-12);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-9),
            Err(RootError::NotBracketed { .. })
        ));
    }

    #[test]
    fn exact_endpoint() {
        let r = bisect(|x| x - 1.0, 1.0, 3.0, 1e-9).unwrap();
        assert_eq!(r.x, 1.0);
    }
}

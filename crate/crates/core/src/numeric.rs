//! One-dimensional minimization and root bracketing.

use crate::error::{Error, Result};

pub const DEFAULT_MINIMIZE_TOL: f64 = 1e-10;
pub const MAX_GOLDEN_ITERATIONS: usize = 200;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the minimum of a unimodal `objective` on
/// `[lo, hi]`, to relative tolerance `tol` in the argument.
///
/// Near a quadratic minimum the objective is flat to within rounding over a
/// relative window of about `sqrt(eps)`, which caps what comparisons alone can
/// resolve. The search therefore ends with one parabolic step through three
/// points spaced `eps^(1/3)` apart around the golden-section estimate; the
/// step is kept only if it stays inside that stencil.
///
/// Returns `(argmin, min)`.
pub fn numeric_minimize<F>(mut objective: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    if lo >= hi || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::BadBracket { lo, hi });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("tol", format!("must be > 0, got {tol}")));
    }
    let mut eval = |x: f64| -> Result<f64> {
        let y = objective(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteObjective { x })
        }
    };

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    let mut converged = false;
    for _ in 0..MAX_GOLDEN_ITERATIONS {
        let mid = 0.5 * (a + b);
        if b - a <= tol * mid.abs().max(1e-8) {
            converged = true;
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
    }
    if !converged {
        return Err(Error::IterationLimit(MAX_GOLDEN_ITERATIONS));
    }

    let x0 = 0.5 * (a + b);
    let f0 = eval(x0)?;
    let h = f64::EPSILON.cbrt() * x0.abs().max(1e-8);
    if x0 - h > lo && x0 + h < hi {
        let fm = eval(x0 - h)?;
        let fp = eval(x0 + h)?;
        let curvature = fm - 2.0 * f0 + fp;
        if curvature > 0.0 {
            let step = 0.5 * h * (fm - fp) / curvature;
            if step.abs() <= h {
                let x1 = x0 + step;
                return Ok((x1, eval(x1)?));
            }
        }
    }
    Ok((x0, f0))
}

/// Smallest `x` in `[lo, hi]` (both positive) where the nondecreasing
/// predicate `holds` becomes true, found by geometric bisection to relative
/// width `rel_tol`. `None` if it is false at `hi`.
pub fn bisect_threshold<F>(mut holds: F, lo: f64, hi: f64, rel_tol: f64) -> Option<f64>
where
    F: FnMut(f64) -> bool,
{
    debug_assert!(0.0 < lo && lo < hi);
    if !holds(hi) {
        return None;
    }
    if holds(lo) {
        return Some(lo);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > rel_tol * b {
        let m = (a * b).sqrt();
        let m = if m <= a || m >= b { 0.5 * (a + b) } else { m };
        if holds(m) {
            b = m;
        } else {
            a = m;
        }
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let (x, y) = numeric_minimize(|x| (x - 2.0) * (x - 2.0), 0.0, 10.0, 1e-10).unwrap();
        assert!((x - 2.0).abs() < 1e-9);
        assert!(y < 1e-18);
    }

    #[test]
    fn reciprocal_plus_linear() {
        // argmin of A/x + Bx is sqrt(A/B).
        let (a, b) = (1e-10, 1.0);
        let (x, _) = numeric_minimize(|x| a / x + b * x, 1e-9, 1.0, 1e-10).unwrap();
        let exact = (a / b).sqrt();
        assert!((x - exact).abs() / exact < 1e-9, "{x}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            numeric_minimize(|x| x, 1.0, 0.0, 1e-10),
            Err(Error::BadBracket { .. })
        ));
        assert!(matches!(
            numeric_minimize(|_| f64::NAN, 0.0, 1.0, 1e-10),
            Err(Error::NonFiniteObjective { .. })
        ));
    }

    #[test]
    fn bisection_threshold() {
        let x = bisect_threshold(|x| x > 3.7e-4, 1e-12, 1.0, 1e-12).unwrap();
        assert!((x - 3.7e-4).abs() / 3.7e-4 < 1e-11);
        assert_eq!(bisect_threshold(|_| false, 1e-12, 1.0, 1e-9), None);
        assert_eq!(bisect_threshold(|_| true, 1e-12, 1.0, 1e-9), Some(1e-12));
    }
}

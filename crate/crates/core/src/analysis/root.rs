//! Bracketed bisection for monotone scalar equations.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// `f(x)` at the returned point.
    pub residual: f64,
    pub iterations: usize,
}

/// Finds `x` in `[lo, hi]` with `|f(x)| <= tol`, given `f(lo)` and `f(hi)` of
/// opposite sign. Stops early at the floating-point resolution of the
/// bracket and returns the better endpoint.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(Root {
            x: lo,
            residual: 0.0,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Root {
            x: hi,
            residual: 0.0,
            iterations: 0,
        });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Solver {
            reason: format!("no sign change on [{lo}, {hi}]"),
            lo_value: f_lo,
            hi_value: f_hi,
        });
    }

    let mut best = if f_lo.abs() <= f_hi.abs() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    for it in 1..=max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            return Ok(Root {
                x: best.0,
                residual: best.1,
                iterations: it,
            });
        }
        let f_mid = f(mid)?;
        if f_mid.abs() < best.1.abs() {
            best = (mid, f_mid);
        }
        if f_mid.abs() <= tol {
            return Ok(Root {
                x: mid,
                residual: f_mid,
                iterations: it,
            });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Root {
        x: best.0,
        residual: best.1,
        iterations: max_iter,
    })
}

/// Multiplies `start` by `factor` until `accept` holds for the function
/// value, returning the point and its value.
pub fn expand<F, P>(
    mut f: F,
    start: f64,
    factor: f64,
    max_steps: usize,
    accept: P,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
    P: Fn(f64) -> bool,
{
    let mut x = start;
    let first = f(x)?;
    let mut fx = first;
    for _ in 0..max_steps {
        if accept(fx) {
            return Ok((x, fx));
        }
        x *= factor;
        fx = f(x)?;
    }
    if accept(fx) {
        return Ok((x, fx));
    }
    Err(Error::Solver {
        reason: format!("bracket search from {start} by factor {factor} gave up at {x}"),
        lo_value: first,
        hi_value: fx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-12);
        assert!(r.residual.abs() <= 1e-14 || r.iterations > 40);
    }

    #[test]
    fn needs_sign_change() {
        let err = bisect(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 100).unwrap_err();
        assert!(matches!(err, Error::Solver { .. }));
    }

    #[test]
    fn decreasing_function() {
        let r = bisect(|x| Ok(1.0 - x), 0.0, 3.0, 1e-15, 200).unwrap();
        assert!((r.x - 1.0).abs() < 1e-14);
    }

    #[test]
    fn expansion() {
        let (x, fx) = expand(|x| Ok(x.exp()), 1.0, 2.0, 50, |v| v > 1e6).unwrap();
        assert_eq!(x, 16.0);
        assert!(fx > 1e6);
        assert!(expand(|_| Ok(0.0), 1.0, 2.0, 10, |v| v > 1.0).is_err());
    }
}

//! Bracketed bisection, golden-section extremization, and the least-squares
//! slope used by the order diagnostics.

use crate::error::{Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Bisection on a bracketing interval. `f(lo)` and `f(hi)` must have opposite
/// signs. Converges to `xtol` in the abscissa.
pub fn bisect(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket {
            message: format!("no sign change on [{a:e}, {b:e}]"),
            trace: vec![(a, fa), (b, fb)],
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= xtol || mid == a || mid == b {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section search for an interior extremum of `f` on `[a, b]`.
/// `maximize` selects max (true) or min (false). Returns `(x, f(x))`.
pub fn golden_extremum(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    xtol: f64,
    maximize: bool,
) -> (f64, f64) {
    let sign = if maximize { -1.0 } else { 1.0 };
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = sign * f(x1);
    let mut f2 = sign * f(x2);
    for _ in 0..400 {
        if hi - lo <= xtol {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = sign * f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = sign * f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Extrema of `f` over `[lo, hi]` located by dense sampling followed by
/// golden-section refinement around the best grid cells.
#[derive(Clone, Copy, Debug)]
pub struct ScanExtrema {
    pub argmin: f64,
    pub min: f64,
    pub argmax: f64,
    pub max: f64,
}

pub fn scan_extrema(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    points: usize,
    refine_tol: f64,
) -> ScanExtrema {
    assert!(points >= 8 && hi > lo);
    let step = (hi - lo) / points as f64;
    let mut best_min = (lo, f64::INFINITY);
    let mut best_max = (lo, f64::NEG_INFINITY);
    for i in 0..=points {
        let x = lo + step * i as f64;
        let v = f(x);
        if v < best_min.1 {
            best_min = (x, v);
        }
        if v > best_max.1 {
            best_max = (x, v);
        }
    }
    let (argmin, min) = golden_extremum(
        &mut f,
        (best_min.0 - step).max(lo),
        (best_min.0 + step).min(hi),
        refine_tol,
        false,
    );
    let (argmax, max) = golden_extremum(
        &mut f,
        (best_max.0 - step).max(lo),
        (best_max.0 + step).min(hi),
        refine_tol,
        true,
    );
    ScanExtrema {
        argmin,
        min: min.min(best_min.1),
        argmax,
        max: max.max(best_max.1),
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::domain("slope needs at least two matched points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::domain("degenerate abscissae in slope fit"));
    }
    Ok(sxy / sxx)
}

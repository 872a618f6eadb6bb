//! Special functions and series machinery used by every other module.

use crate::error::{Error, Result};

/// Truncation policy for the photon-number series.
///
/// All distributions in scope decay at least as fast as `mu^(2n) / (n!)^2`
/// with `mu <= 1`, so the default cutoff leaves a tail far below tolerance.
#[derive(Debug, Clone, Copy)]
pub struct SeriesConfig {
    /// Largest photon number included in sums.
    pub n_max: usize,
    /// Absolute bound the last retained term must satisfy.
    pub tail_tol: f64,
}

impl SeriesConfig {
    pub fn new(n_max: usize, tail_tol: f64) -> Result<Self> {
        if n_max < 10 {
            return Err(Error::Config(format!("n_max must be >= 10, got {n_max}")));
        }
        if !(tail_tol > 0.0 && tail_tol <= 1e-10) {
            return Err(Error::Config(format!(
                "tail_tol must lie in (0, 1e-10], got {tail_tol}"
            )));
        }
        Ok(Self { n_max, tail_tol })
    }
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self { n_max: 40, tail_tol: 1e-12 }
    }
}

/// Modified Bessel function of the first kind, order zero.
///
/// Direct power series `I0(x) = sum_k (x/2)^(2k) / (k!)^2`, accurate to
/// better than 1e-12 relative for the argument range used here (x <= ~20);
/// arguments in the operating regime satisfy x <= 2.
pub fn bessel_i0(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("bessel_i0 requires finite x >= 0, got {x}")));
    }
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=200 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term < sum * 1e-17 {
            return Ok(sum);
        }
    }
    Err(Error::Truncation(format!("bessel_i0 series did not converge for x = {x}")))
}

/// Binary Shannon entropy `H(p) = -p log2 p - (1-p) log2 (1-p)` in bits,
/// with the continuous extension `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("binary_entropy requires p in [0,1], got {p}")));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// Sum `term(n)` for `n = 0..=cfg.n_max`, verifying that the final term has
/// decayed below `cfg.tail_tol`.
///
/// The tail check is what makes truncation a checked operation rather than a
/// silent approximation: callers summing a slowly decaying series get a
/// `Truncation` error instead of a wrong number.
pub fn weighted_series_sum<F>(term: F, cfg: SeriesConfig) -> Result<f64>
where
    F: Fn(usize) -> f64,
{
    let mut sum = 0.0;
    for n in 0..=cfg.n_max {
        sum += term(n);
    }
    let last = term(cfg.n_max).abs();
    if last >= cfg.tail_tol {
        return Err(Error::Truncation(format!(
            "term({}) = {last:e} exceeds tail tolerance {:e}",
            cfg.n_max, cfg.tail_tol
        )));
    }
    Ok(sum)
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x_max, f_max)` once the bracket shrinks below `xtol`.
pub fn golden_section_max<F>(f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);

    while (b - a).abs() > xtol {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }

    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Bisection on a sign change of `f` over `[lo, hi]`.
///
/// Requires `f(lo)` and `f(hi)` to have opposite (or zero) signs; returns the
/// bracket midpoint once the bracket is narrower than `xtol`, or `None` when
/// there is no sign change to begin with.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        if (hi - lo).abs() <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return Some(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

//! Fiber/detector channel model: transmittance, per-photon-number yields
//! and error rates, and overall gains both by series summation and by the
//! closed forms available for the heralded pair-coherent source.

use crate::error::{Error, Result};
use crate::numerics::{bessel_i0, weighted_series_sum, SeriesConfig};
use crate::sources::{SourceFamily, SourceModel};

/// Error probability assigned to a dark-count-only detection: the click
/// carries no signal information, so half the bits are wrong.
pub const E0: f64 = 0.5;

/// Channel and receiver parameters.
#[derive(Debug, Clone, Copy)]
pub struct ChannelParams {
    /// Fiber loss coefficient in dB/km.
    pub alpha: f64,
    /// Receiver transmittance including detector efficiency.
    pub eta_bob: f64,
    /// Receiver dark count probability per gate.
    pub p_dark: f64,
    /// Misalignment error probability.
    pub e_det: f64,
}

impl ChannelParams {
    pub fn new(alpha: f64, eta_bob: f64, p_dark: f64, e_det: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be > 0, got {alpha}")));
        }
        if !(eta_bob > 0.0 && eta_bob <= 1.0) {
            return Err(Error::Config(format!("eta_bob must lie in (0,1], got {eta_bob}")));
        }
        if !(0.0..1.0).contains(&p_dark) {
            return Err(Error::Config(format!("p_dark must lie in [0,1), got {p_dark}")));
        }
        if !(0.0..0.5).contains(&e_det) {
            return Err(Error::Config(format!("e_det must lie in [0,0.5), got {e_det}")));
        }
        Ok(Self { alpha, eta_bob, p_dark, e_det })
    }

    /// Dark-count-only yield, identical for both protocols: p_dark / 2.
    pub fn vacuum_yield(&self) -> f64 {
        self.p_dark / 2.0
    }
}

impl Default for ChannelParams {
    /// GYS fiber experiment parameters: alpha = 0.21 dB/km,
    /// eta_bob = 0.045, p_dark = 1.7e-6, e_det = 0.033.
    fn default() -> Self {
        Self { alpha: 0.21, eta_bob: 0.045, p_dark: 1.7e-6, e_det: 0.033 }
    }
}

/// Protocol selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    Bb84,
    Sarg,
}

impl Protocol {
    pub fn label(self) -> &'static str {
        match self {
            Protocol::Bb84 => "bb84",
            Protocol::Sarg => "sarg",
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bb84" => Ok(Protocol::Bb84),
            "sarg" | "sarg04" => Ok(Protocol::Sarg),
            other => Err(Error::Config(format!(
                "unknown protocol '{other}' (expected bb84 or sarg)"
            ))),
        }
    }
}

/// Overall gain and error-gain of a pulse ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainPair {
    /// Gain: detection probability per emitted pulse.
    pub q: f64,
    /// Error-gain: joint probability of detection and bit error.
    pub eq: f64,
}

impl GainPair {
    /// Quantum bit error rate `EQ/Q`; zero when there is no gain.
    pub fn e(&self) -> f64 {
        if self.q > 0.0 {
            self.eq / self.q
        } else {
            0.0
        }
    }
}

/// Total transmittance `eta = eta_bob * 10^(-alpha L / 10)`.
pub fn transmittance(params: &ChannelParams, distance_km: f64) -> Result<f64> {
    if !(distance_km.is_finite() && distance_km >= 0.0) {
        return Err(Error::Domain(format!(
            "distance must be finite and >= 0, got {distance_km}"
        )));
    }
    Ok(params.eta_bob * 10f64.powf(-params.alpha * distance_km / 10.0))
}

fn eta_n(eta: f64, n: usize) -> f64 {
    1.0 - (1.0 - eta).powi(n as i32)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0,1], got {eta}")));
    }
    Ok(())
}

/// BB84 yield and error rate of an n-photon pulse (n >= 1):
/// `Y_n = [eta_n + (1 - eta_n) p_dark] / 2`,
/// `e_n Y_n = eta_n e_det/2 + (1 - eta_n) p_dark/4`.
pub fn yield_error_bb84(params: &ChannelParams, eta: f64, n: usize) -> Result<(f64, f64)> {
    check_eta(eta)?;
    if n == 0 {
        return Err(Error::Domain("yield_error_bb84 requires n >= 1".into()));
    }
    let en = eta_n(eta, n);
    let y = (en + (1.0 - en) * params.p_dark) / 2.0;
    let ey = en * params.e_det / 2.0 + (1.0 - en) * params.p_dark / 4.0;
    Ok((y, ey / y))
}

/// SARG04 yield and error rate of an n-photon pulse (n >= 1):
/// `Y_n = eta_n (e_det/2 + 1/4) + (1 - eta_n) p_dark/2`,
/// `e_n Y_n = eta_n e_det/2 + (1 - eta_n) p_dark/4`.
pub fn yield_error_sarg(params: &ChannelParams, eta: f64, n: usize) -> Result<(f64, f64)> {
    check_eta(eta)?;
    if n == 0 {
        return Err(Error::Domain("yield_error_sarg requires n >= 1".into()));
    }
    let en = eta_n(eta, n);
    let y = en * (params.e_det / 2.0 + 0.25) + (1.0 - en) * params.p_dark / 2.0;
    let ey = en * params.e_det / 2.0 + (1.0 - en) * params.p_dark / 4.0;
    Ok((y, ey / y))
}

/// Yield and error rate for any n >= 0, dispatching on protocol; the vacuum
/// term is `Y_0 = p_dark/2`, `e_0 = 1/2` for both protocols.
pub fn yield_error(params: &ChannelParams, protocol: Protocol, eta: f64, n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Ok((params.vacuum_yield(), E0));
    }
    match protocol {
        Protocol::Bb84 => yield_error_bb84(params, eta, n),
        Protocol::Sarg => yield_error_sarg(params, eta, n),
    }
}

/// Gain and error-gain by direct photon-number summation:
/// `Q = sum_n P(n) Y_n`, `EQ = sum_n P(n) e_n Y_n`, with `P(n)` the
/// per-emitted-pulse distribution of the source (joint with the trigger
/// click for heralded families).
pub fn gain_series(
    src: &SourceModel,
    protocol: Protocol,
    params: &ChannelParams,
    eta: f64,
    cfg: SeriesConfig,
) -> Result<GainPair> {
    check_eta(eta)?;
    let mut qt = Vec::with_capacity(cfg.n_max + 1);
    let mut et = Vec::with_capacity(cfg.n_max + 1);
    for n in 0..=cfg.n_max {
        let p = src.pn(n)?;
        let (y, e) = yield_error(params, protocol, eta, n)?;
        qt.push(p * y);
        et.push(p * e * y);
    }
    let q = weighted_series_sum(|n| qt[n], cfg)?;
    let eq = weighted_series_sum(|n| et[n], cfg)?;
    Ok(GainPair { q, eq })
}

/// The heralding and channel-survival factors behind the closed-form gains:
/// `xi = 1 + d_a - I0(2 mu sqrt(1 - eta_a)) / I0(2 mu)` and
/// `zeta = [(1 + d_a) I0(2 mu sqrt(1 - eta)) - I0(2 mu sqrt((1-eta)(1-eta_a)))] / I0(2 mu)`.
pub fn xi_zeta(mu: f64, eta: f64, eta_a: f64, d_a: f64) -> Result<(f64, f64)> {
    let i0 = bessel_i0(2.0 * mu)?;
    let xi = 1.0 + d_a - bessel_i0(2.0 * mu * (1.0 - eta_a).sqrt())? / i0;
    let zeta = ((1.0 + d_a) * bessel_i0(2.0 * mu * (1.0 - eta).sqrt())?
        - bessel_i0(2.0 * mu * ((1.0 - eta) * (1.0 - eta_a)).sqrt())?)
        / i0;
    Ok((xi, zeta))
}

/// Closed-form gains for the heralded pair-coherent source.
///
/// The expressions follow from resumming the photon-number series with
/// `sum_n x^n mu^(2n) / (n!)^2 = I0(2 mu sqrt(x))`:
///   Q_BB84  = [xi - (1 - p_dark) zeta] / 2
///   EQ_BB84 = (e_det/2) xi - (e_det/2 - p_dark/4) zeta
///   Q_SARG  = (e_det/2 + 1/4) xi - (e_det/2 + 1/4 - p_dark/2) zeta
///   EQ_SARG = EQ_BB84
/// The 1/2 in Q_BB84 multiplies xi and zeta alike; the series summation is
/// the ground truth for that prefactor, and the equivalence is enforced to
/// 1e-10 by the acceptance suite.
pub fn gain_closed_form_hpcs(
    src: &SourceModel,
    protocol: Protocol,
    params: &ChannelParams,
    eta: f64,
) -> Result<GainPair> {
    check_eta(eta)?;
    if src.family != SourceFamily::Hpcs {
        return Err(Error::Config(format!(
            "closed-form gains are defined for hpcs, got {}",
            src.family.label()
        )));
    }
    let trigger = src
        .trigger
        .ok_or_else(|| Error::Config("hpcs source requires trigger parameters".into()))?;
    let (xi, zeta) = xi_zeta(src.mu, eta, trigger.eta_a, trigger.d_a)?;
    let ed = params.e_det;
    let pd = params.p_dark;
    let eq = ed / 2.0 * xi - (ed / 2.0 - pd / 4.0) * zeta;
    let q = match protocol {
        Protocol::Bb84 => (xi - (1.0 - pd) * zeta) / 2.0,
        Protocol::Sarg => (ed / 2.0 + 0.25) * xi - (ed / 2.0 + 0.25 - pd / 2.0) * zeta,
    };
    Ok(GainPair { q, eq })
}

//! Photon-number distributions for the three source families, with and
//! without trigger-detector heralding.
//!
//! Heralded probabilities are JOINT probabilities per emitted pulse: the
//! chance that the source emits n photons AND the trigger detector clicks.
//! Summing them over n therefore gives the heralding probability, not 1.
//! All downstream gains and key rates inherit this per-emitted-pulse
//! normalization.

use crate::error::{Error, Result};
use crate::numerics::{bessel_i0, weighted_series_sum, SeriesConfig};

/// Source family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceFamily {
    /// Weak coherent pulses, Poissonian photon statistics, no trigger.
    Wcp,
    /// Heralded single-photon source: one mode of a photon-pair source
    /// triggers acceptance of the other.
    Hsps,
    /// Heralded pair-coherent state: sub-Poissonian two-mode state with a
    /// trigger detector on the partner mode.
    Hpcs,
}

impl SourceFamily {
    pub fn label(self) -> &'static str {
        match self {
            SourceFamily::Wcp => "wcp",
            SourceFamily::Hsps => "hsps",
            SourceFamily::Hpcs => "hpcs",
        }
    }
}

impl std::fmt::Display for SourceFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for SourceFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wcp" => Ok(SourceFamily::Wcp),
            "hsps" => Ok(SourceFamily::Hsps),
            "hpcs" => Ok(SourceFamily::Hpcs),
            other => Err(Error::Config(format!(
                "unknown source family '{other}' (expected wcp, hsps, or hpcs)"
            ))),
        }
    }
}

/// Trigger detector on the heralding mode.
#[derive(Debug, Clone, Copy)]
pub struct TriggerParams {
    /// Detection efficiency of the trigger detector.
    pub eta_a: f64,
    /// Dark count probability per gate of the trigger detector.
    pub d_a: f64,
}

impl TriggerParams {
    pub fn new(eta_a: f64, d_a: f64) -> Result<Self> {
        if !(eta_a > 0.0 && eta_a <= 1.0) {
            return Err(Error::Config(format!("eta_a must lie in (0,1], got {eta_a}")));
        }
        if !(0.0..1.0).contains(&d_a) {
            return Err(Error::Config(format!("d_a must lie in [0,1), got {d_a}")));
        }
        Ok(Self { eta_a, d_a })
    }

    /// Trigger click probability given n photons in the heralding mode:
    /// `1 - (1 - eta_a)^n + d_a`. The dark count enters additively, so the
    /// bracket exceeds 1 by d_a in the perfect-detection limit; that is the
    /// model as defined, and the effect is O(d_a).
    pub fn click_probability(&self, n: usize) -> f64 {
        1.0 - (1.0 - self.eta_a).powi(n as i32) + self.d_a
    }
}

impl Default for TriggerParams {
    /// Benchmark trigger: eta_a = 0.6, d_a = 5e-8.
    fn default() -> Self {
        Self { eta_a: 0.6, d_a: 5e-8 }
    }
}

/// Un-heralded statistics assumed for the HSPS partner mode.
///
/// Thermal is the standard single-mode parametric-down-conversion model and
/// the default; Poissonian is kept as a sensitivity variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HspsStats {
    #[default]
    Thermal,
    Poissonian,
}

impl std::str::FromStr for HspsStats {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "thermal" => Ok(HspsStats::Thermal),
            "poissonian" => Ok(HspsStats::Poissonian),
            other => Err(Error::Config(format!(
                "unknown hsps_stats '{other}' (expected thermal or poissonian)"
            ))),
        }
    }
}

/// A configured photon source.
#[derive(Debug, Clone, Copy)]
pub struct SourceModel {
    pub family: SourceFamily,
    /// Intensity parameter; mean-photon-number-like, in (0, 1].
    pub mu: f64,
    /// Trigger detector, absent for WCP and required for HSPS and HPCS.
    pub trigger: Option<TriggerParams>,
    /// Un-heralded HSPS statistics; ignored by the other families.
    pub hsps_stats: HspsStats,
}

impl SourceModel {
    pub fn new(
        family: SourceFamily,
        mu: f64,
        trigger: Option<TriggerParams>,
        hsps_stats: HspsStats,
    ) -> Result<Self> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::Domain(format!("mu must lie in (0,1], got {mu}")));
        }
        match (family, trigger.is_some()) {
            (SourceFamily::Wcp, true) => {
                return Err(Error::Config("WCP takes no trigger detector".into()));
            }
            (SourceFamily::Hsps | SourceFamily::Hpcs, false) => {
                return Err(Error::Config(format!(
                    "{} requires trigger parameters",
                    family.label()
                )));
            }
            _ => {}
        }
        Ok(Self { family, mu, trigger, hsps_stats })
    }

    pub fn wcp(mu: f64) -> Result<Self> {
        Self::new(SourceFamily::Wcp, mu, None, HspsStats::default())
    }

    pub fn hsps(mu: f64, trigger: TriggerParams) -> Result<Self> {
        Self::new(SourceFamily::Hsps, mu, Some(trigger), HspsStats::default())
    }

    pub fn hsps_with_stats(mu: f64, trigger: TriggerParams, stats: HspsStats) -> Result<Self> {
        Self::new(SourceFamily::Hsps, mu, Some(trigger), stats)
    }

    pub fn hpcs(mu: f64, trigger: TriggerParams) -> Result<Self> {
        Self::new(SourceFamily::Hpcs, mu, Some(trigger), HspsStats::default())
    }

    /// The same source at a different intensity, re-validated.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.family, mu, self.trigger, self.hsps_stats)
    }

    /// Per-emitted-pulse probability of the n-photon term that reaches the
    /// quantum channel: the plain distribution for WCP, the joint
    /// emit-and-herald probability for HSPS and HPCS.
    pub fn pn(&self, n: usize) -> Result<f64> {
        match self.family {
            SourceFamily::Wcp => wcp_pn(self.mu, n),
            SourceFamily::Hsps | SourceFamily::Hpcs => heralded_pn(self, n),
        }
    }

    /// Probability that a pulse is accepted at all: 1 for WCP, the summed
    /// joint distribution (trigger click probability) for heralded sources.
    pub fn heralding_probability(&self, cfg: SeriesConfig) -> Result<f64> {
        match self.family {
            SourceFamily::Wcp => Ok(1.0),
            SourceFamily::Hsps | SourceFamily::Hpcs => {
                let mut terms = Vec::with_capacity(cfg.n_max + 1);
                for n in 0..=cfg.n_max {
                    terms.push(heralded_pn(self, n)?);
                }
                weighted_series_sum(|n| terms[n], cfg)
            }
        }
    }
}

/// Poisson distribution of the weak coherent pulse: `e^(-mu) mu^n / n!`.
pub fn wcp_pn(mu: f64, n: usize) -> Result<f64> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Domain(format!("wcp_pn requires mu > 0, got {mu}")));
    }
    let mut p = (-mu).exp();
    for k in 1..=n {
        p *= mu / k as f64;
    }
    Ok(p)
}

/// Single-mode photon-number distribution of the pair-coherent state after
/// tracing out one mode: `P(n) = mu^(2n) / ((n!)^2 I0(2 mu))`.
///
/// The distribution is sub-Poissonian: its variance is below its mean for
/// every intensity, which is what makes the source attractive here.
pub fn pcs_pn(mu: f64, n: usize) -> Result<f64> {
    if !(mu.is_finite() && mu > 0.0 && mu <= 1.0) {
        return Err(Error::Domain(format!("pcs_pn requires mu in (0,1], got {mu}")));
    }
    let i0 = bessel_i0(2.0 * mu)?;
    let mut p = 1.0 / i0;
    for k in 1..=n {
        p *= mu * mu / ((k * k) as f64);
    }
    Ok(p)
}

/// Thermal (single-mode) distribution with mean `mu`:
/// `P(n) = mu^n / (1 + mu)^(n+1)`.
pub fn thermal_pn(mu: f64, n: usize) -> Result<f64> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Domain(format!("thermal_pn requires mu > 0, got {mu}")));
    }
    Ok(mu.powi(n as i32) / (1.0 + mu).powi(n as i32 + 1))
}

/// Joint probability that a heralded source emits n photons and the trigger
/// clicks: the un-heralded distribution times `1 - (1 - eta_a)^n + d_a`.
pub fn heralded_pn(src: &SourceModel, n: usize) -> Result<f64> {
    let trigger = src
        .trigger
        .ok_or_else(|| Error::Config("heralded_pn requires trigger parameters".into()))?;
    let base = match src.family {
        SourceFamily::Hpcs => pcs_pn(src.mu, n)?,
        SourceFamily::Hsps => match src.hsps_stats {
            HspsStats::Thermal => thermal_pn(src.mu, n)?,
            HspsStats::Poissonian => wcp_pn(src.mu, n)?,
        },
        SourceFamily::Wcp => {
            return Err(Error::Config("WCP is not a heralded source".into()));
        }
    };
    Ok(base * trigger.click_probability(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Independent I1 series oracle for the PCS mean photon number:
    /// `I1(x) = sum_k (x/2)^(2k+1) / (k! (k+1)!)`.
    fn bessel_i1_oracle(x: f64) -> f64 {
        let half = x / 2.0;
        let mut term = half;
        let mut sum = half;
        for k in 1..=60 {
            term *= half * half / ((k * (k + 1)) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn i1_oracle_matches_reference() {
        // mpmath besseli(1, x) at 40 digits.
        assert_relative_eq!(bessel_i1_oracle(0.5), 0.2578943053908963163625, max_relative = 1e-14);
        assert_relative_eq!(bessel_i1_oracle(1.0), 0.5651591039924850272077, max_relative = 1e-14);
        assert_relative_eq!(bessel_i1_oracle(2.0), 1.590636854637329063382, max_relative = 1e-14);
    }

    #[test]
    fn wcp_pn_reference_values() {
        assert_relative_eq!(wcp_pn(0.1, 0).unwrap(), (-0.1f64).exp(), epsilon = 1e-16);
        let total: f64 = (0..=40).map(|n| wcp_pn(0.7, n).unwrap()).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        assert!(wcp_pn(1e-12, 2).unwrap() < 1e-20);
    }

    #[test]
    fn pcs_pn_reference_values() {
        // mpmath: mu = 0.5 column of the traced pair-coherent distribution.
        assert_relative_eq!(pcs_pn(0.5, 0).unwrap(), 0.7898483148251119664236, max_relative = 1e-13);
        assert_relative_eq!(pcs_pn(0.5, 1).unwrap(), 0.1974620787062779916059, max_relative = 1e-13);
        assert_relative_eq!(pcs_pn(0.5, 2).unwrap(), 0.01234137991914237447537, max_relative = 1e-13);
        // Vacuum term approaches 1 as mu -> 0+.
        assert!(pcs_pn(1e-9, 0).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn pcs_pn_is_normalized() {
        for k in 1..=100 {
            let mu = k as f64 / 100.0;
            let total: f64 = (0..=40).map(|n| pcs_pn(mu, n).unwrap()).sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn pcs_pn_rejects_out_of_range() {
        assert!(pcs_pn(0.0, 0).is_err());
        assert!(pcs_pn(1.5, 0).is_err());
        assert!(pcs_pn(f64::NAN, 0).is_err());
    }

    #[test]
    fn pcs_is_sub_poissonian_with_known_moments() {
        // mpmath moments at mu = 0.5: mean = mu I1(2mu)/I0(2mu).
        let mean: f64 = (0..=40).map(|n| n as f64 * pcs_pn(0.5, n).unwrap()).sum();
        let second: f64 = (0..=40)
            .map(|n| (n * n) as f64 * pcs_pn(0.5, n).unwrap())
            .sum();
        let var = second - mean * mean;
        assert_relative_eq!(mean, 0.2231949829482672535238, max_relative = 1e-12);
        assert_relative_eq!(var, 0.2001839995867226899379, max_relative = 1e-12);
        assert!(var < mean);
    }

    #[test]
    fn pcs_mean_matches_i1_over_i0() {
        for mu in [0.1, 0.3, 0.5, 0.8, 1.0] {
            let mean: f64 = (0..=40).map(|n| n as f64 * pcs_pn(mu, n).unwrap()).sum();
            let want = mu * bessel_i1_oracle(2.0 * mu) / crate::numerics::bessel_i0(2.0 * mu).unwrap();
            assert_relative_eq!(mean, want, epsilon = 1e-8);
        }
    }

    #[test]
    fn heralded_vacuum_term_is_dark_count_only() {
        // At n = 0 the click bracket reduces to d_a.
        let src = SourceModel::hpcs(0.5, TriggerParams::default()).unwrap();
        assert_relative_eq!(
            heralded_pn(&src, 0).unwrap(),
            3.949241574125559832118e-8,
            max_relative = 1e-12
        );
    }

    #[test]
    fn perfect_trigger_passes_nonvacuum_terms() {
        let trigger = TriggerParams::new(1.0, 0.0).unwrap();
        let src = SourceModel::hpcs(0.5, trigger).unwrap();
        for n in 1..=5 {
            assert_relative_eq!(
                heralded_pn(&src, n).unwrap(),
                pcs_pn(0.5, n).unwrap(),
                epsilon = 1e-16
            );
        }
    }

    #[test]
    fn heralded_pn_bounded_by_bracket_and_monotone_in_eta_a() {
        let d_a = 5e-8;
        for n in 0..=6 {
            let mut prev = 0.0;
            for k in 1..=10 {
                let eta_a = k as f64 / 10.0;
                let src = SourceModel::hpcs(0.6, TriggerParams::new(eta_a, d_a).unwrap()).unwrap();
                let p = heralded_pn(&src, n).unwrap();
                assert!(p <= (1.0 + d_a) * pcs_pn(0.6, n).unwrap() + 1e-18);
                if n >= 1 {
                    assert!(p >= prev, "heralded_pn must not decrease in eta_a");
                }
                prev = p;
            }
        }
    }

    #[test]
    fn hsps_joint_reference_value() {
        // Thermal base: P(1) = mu/(1+mu)^2 times the click bracket.
        let src = SourceModel::hsps(0.5, TriggerParams::default()).unwrap();
        let want = (0.5 / 1.5f64.powi(2)) * (0.6 + 5e-8);
        assert_relative_eq!(heralded_pn(&src, 1).unwrap(), want, epsilon = 1e-16);
    }

    #[test]
    fn heralding_probability_sums_joint_terms() {
        let cfg = SeriesConfig::default();
        let wcp = SourceModel::wcp(0.5).unwrap();
        assert_eq!(wcp.heralding_probability(cfg).unwrap(), 1.0);

        // For HPCS the sum has the closed form 1 + d_a - I0(2mu sqrt(1-eta_a))/I0(2mu).
        let src = SourceModel::hpcs(0.3, TriggerParams::default()).unwrap();
        let got = src.heralding_probability(cfg).unwrap();
        assert_relative_eq!(got, 0.05102363127033310661143, max_relative = 1e-12);
    }

    #[test]
    fn source_model_validates_trigger_presence() {
        assert!(SourceModel::new(SourceFamily::Wcp, 0.5, Some(TriggerParams::default()), HspsStats::default()).is_err());
        assert!(SourceModel::new(SourceFamily::Hpcs, 0.5, None, HspsStats::default()).is_err());
        assert!(SourceModel::new(SourceFamily::Hpcs, 1.5, Some(TriggerParams::default()), HspsStats::default()).is_err());
        assert!(heralded_pn(&SourceModel::wcp(0.5).unwrap(), 1).is_err());
    }

    #[test]
    fn trigger_params_validate() {
        assert!(TriggerParams::new(0.0, 0.0).is_err());
        assert!(TriggerParams::new(1.1, 0.0).is_err());
        assert!(TriggerParams::new(0.5, 1.0).is_err());
        assert!(TriggerParams::new(0.5, -0.1).is_err());
    }
}

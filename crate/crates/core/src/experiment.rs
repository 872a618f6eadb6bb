//! Experiment harness: distance sweeps with per-point intensity
//! optimization, rate-extinction and crossover location, average-gain
//! reports, and deterministic CSV emission.

use std::cell::RefCell;
use std::path::Path;

use rayon::prelude::*;

use crate::channel::{ChannelParams, Protocol};
use crate::decoy::DecoyProtocolParams;
use crate::error::{Error, Result};
use crate::numerics::bisect;
use crate::rate::{ideal_scenario_inputs, optimize_mu, SargMappings, SearchConfig, RATE_CUTOFF};
use crate::sources::{HspsStats, SourceFamily, SourceModel, TriggerParams};

/// Distance bracket over which thresholds and crossovers are searched.
pub const DISTANCE_BRACKET_KM: (f64, f64) = (0.0, 500.0);

/// Resolution of the distance bisections; half of the ±0.5 km contract.
pub const DISTANCE_TOL_KM: f64 = 0.25;

/// Model knobs shared by every experiment entry point.
#[derive(Debug, Clone, Copy)]
pub struct Scenario {
    pub channel: ChannelParams,
    pub trigger: TriggerParams,
    pub hsps_stats: HspsStats,
    pub maps: SargMappings,
    pub search: SearchConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            channel: ChannelParams::default(),
            trigger: TriggerParams::default(),
            hsps_stats: HspsStats::default(),
            maps: SargMappings::default(),
            search: SearchConfig::default(),
        }
    }
}

impl Scenario {
    /// Source of the given family with a placeholder intensity; sweeps and
    /// searches re-intensity it per point.
    pub fn source_template(&self, family: SourceFamily) -> Result<SourceModel> {
        match family {
            SourceFamily::Wcp => SourceModel::wcp(0.5),
            SourceFamily::Hsps => SourceModel::hsps_with_stats(0.5, self.trigger, self.hsps_stats),
            SourceFamily::Hpcs => SourceModel::hpcs(0.5, self.trigger),
        }
    }
}

/// A sweep request: the distance grid and the protocol/source product.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub l_min: f64,
    pub l_max: f64,
    pub step: f64,
    pub protocols: Vec<Protocol>,
    pub sources: Vec<SourceFamily>,
    pub scenario: Scenario,
    /// Reserved for finite-decoy sweeps; the rate columns use the ideal
    /// scenario.
    pub decoy: Option<DecoyProtocolParams>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_min >= 0.0 && self.l_min < self.l_max) {
            return Err(Error::Config(format!(
                "sweep requires 0 <= l_min < l_max, got l_min={}, l_max={}",
                self.l_min, self.l_max
            )));
        }
        if !(self.step > 0.0) {
            return Err(Error::Config(format!("sweep requires step > 0, got {}", self.step)));
        }
        if self.protocols.is_empty() {
            return Err(Error::Config("sweep requires a non-empty protocol set".into()));
        }
        if self.sources.is_empty() {
            return Err(Error::Config("sweep requires a non-empty source set".into()));
        }
        Ok(())
    }

    fn distances(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0u64;
        loop {
            let l = self.l_min + self.step * k as f64;
            if l > self.l_max + 1e-9 {
                break;
            }
            out.push(l.min(self.l_max));
            k += 1;
        }
        out
    }
}

/// One row of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct RatePoint {
    pub distance_km: f64,
    pub protocol: Protocol,
    pub source: SourceFamily,
    pub mu_opt: f64,
    pub q_mu: f64,
    pub e_mu: f64,
    pub rate: f64,
}

/// Evaluates every (protocol, source, distance) combination with a
/// per-point optimized intensity. Points are computed in parallel and the
/// result is sorted by (protocol, source, distance), so identical specs
/// produce identical output.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<RatePoint>> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for &protocol in &spec.protocols {
        for &source in &spec.sources {
            for &l in &spec.distances() {
                jobs.push((protocol, source, l));
            }
        }
    }
    let scenario = spec.scenario;
    let mut points = jobs
        .into_par_iter()
        .map(|(protocol, source, distance_km)| {
            let template = scenario.source_template(source)?;
            let opt = optimize_mu(
                &template,
                protocol,
                &scenario.channel,
                distance_km,
                &scenario.search,
                &scenario.maps,
            )?;
            let src = template.with_mu(opt.mu_opt)?;
            let inputs = ideal_scenario_inputs(&src, protocol, &scenario.channel, distance_km)?;
            Ok(RatePoint {
                distance_km,
                protocol,
                source,
                mu_opt: opt.mu_opt,
                q_mu: inputs.q_mu.q,
                e_mu: inputs.q_mu.e(),
                rate: opt.rate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| {
        (a.protocol.label(), a.source.label())
            .cmp(&(b.protocol.label(), b.source.label()))
            .then(a.distance_km.total_cmp(&b.distance_km))
    });
    Ok(points)
}

/// Optimized-intensity rate of one (protocol, source) curve at one point.
pub fn optimized_rate(
    scenario: &Scenario,
    protocol: Protocol,
    family: SourceFamily,
    distance_km: f64,
) -> Result<f64> {
    let template = scenario.source_template(family)?;
    Ok(optimize_mu(
        &template,
        protocol,
        &scenario.channel,
        distance_km,
        &scenario.search,
        &scenario.maps,
    )?
    .rate)
}

/// Locates the rate-extinction distance: the point where the optimized
/// rate falls through the 1e-12 cutoff, bisected to within ±0.5 km. A rate
/// still strictly positive at the far end of the search bracket means no
/// extinction exists there, which is a not-found error; a curve already
/// dead at zero distance reports 0.
pub fn find_threshold(
    scenario: &Scenario,
    protocol: Protocol,
    family: SourceFamily,
) -> Result<f64> {
    let (lo, hi) = DISTANCE_BRACKET_KM;
    let far = optimized_rate(scenario, protocol, family, hi)?;
    if far > 0.0 {
        return Err(Error::NotFound(format!(
            "{} + {} rate is still positive at {hi} km; no extinction inside the bracket",
            protocol.label(),
            family.label()
        )));
    }
    if optimized_rate(scenario, protocol, family, lo)? <= RATE_CUTOFF {
        return Ok(lo);
    }
    let first_err: RefCell<Option<Error>> = RefCell::new(None);
    let root = bisect(
        |l| match optimized_rate(scenario, protocol, family, l) {
            Ok(r) => r - RATE_CUTOFF,
            Err(e) => {
                first_err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        DISTANCE_TOL_KM,
    );
    if let Some(e) = first_err.into_inner() {
        return Err(e);
    }
    root.ok_or_else(|| {
        Error::NotFound(format!(
            "no rate extinction for {} + {} inside [{lo}, {hi}] km",
            protocol.label(),
            family.label()
        ))
    })
}

/// Locates the distance where the optimized rates of two sources cross:
/// the rate difference is scanned at 1 km steps for a strict sign change,
/// then bisected to within ±0.5 km. `None` when the curves never cross.
/// Symmetric in its source arguments.
pub fn find_crossover(
    scenario: &Scenario,
    protocol: Protocol,
    source_a: SourceFamily,
    source_b: SourceFamily,
) -> Result<Option<f64>> {
    let (lo, hi) = DISTANCE_BRACKET_KM;
    let diff = |l: f64| -> Result<f64> {
        Ok(optimized_rate(scenario, protocol, source_a, l)?
            - optimized_rate(scenario, protocol, source_b, l)?)
    };
    let mut prev_l = lo;
    let mut prev_d = diff(lo)?;
    let mut l = lo + 1.0;
    while l <= hi {
        let d = diff(l)?;
        if prev_d * d < 0.0 {
            let first_err: RefCell<Option<Error>> = RefCell::new(None);
            let root = bisect(
                |x| match diff(x) {
                    Ok(v) => v,
                    Err(e) => {
                        first_err.borrow_mut().get_or_insert(e);
                        f64::NAN
                    }
                },
                prev_l,
                l,
                DISTANCE_TOL_KM,
            );
            if let Some(e) = first_err.into_inner() {
                return Err(e);
            }
            return Ok(root);
        }
        // Optimized rates decay monotonically, so once both curves are
        // dead the difference stays zero forever.
        if prev_d == 0.0 && d == 0.0 {
            let a = optimized_rate(scenario, protocol, source_a, l)?;
            let b = optimized_rate(scenario, protocol, source_b, l)?;
            if a == 0.0 && b == 0.0 {
                break;
            }
        }
        prev_l = l;
        prev_d = d;
        l += 1.0;
    }
    Ok(None)
}

/// Average-gain report: mean of per-distance rate ratios over the range
/// where both sides are secure.
#[derive(Debug, Clone, Copy)]
pub struct GainReport {
    pub average_gain: f64,
    /// First and last distances entering the mean.
    pub l_min: f64,
    pub l_max: f64,
    /// Number of 1 km samples in the mean.
    pub samples: usize,
}

/// Means the ratio of the numerator source's optimized rate to the best
/// baseline rate, sampled at 1 km steps over the range where both the
/// numerator and at least one baseline stay above the rate cutoff. The
/// range is part of the report so the average is auditable.
pub fn gain_report(
    scenario: &Scenario,
    protocol: Protocol,
    numerator: SourceFamily,
    baselines: &[SourceFamily],
) -> Result<GainReport> {
    if baselines.is_empty() {
        return Err(Error::Config("gain report requires at least one baseline source".into()));
    }
    let (lo, hi) = DISTANCE_BRACKET_KM;
    let mut sum = 0.0;
    let mut samples = 0usize;
    let mut l_min = f64::NAN;
    let mut l_max = f64::NAN;
    let mut l = lo;
    while l <= hi {
        let num = optimized_rate(scenario, protocol, numerator, l)?;
        let mut base = 0.0f64;
        for &family in baselines {
            base = base.max(optimized_rate(scenario, protocol, family, l)?);
        }
        if num > RATE_CUTOFF && base > RATE_CUTOFF {
            sum += num / base;
            samples += 1;
            if l_min.is_nan() {
                l_min = l;
            }
            l_max = l;
        } else if samples > 0 {
            // Monotone decay: once either side dies the overlap is over.
            break;
        }
        l += 1.0;
    }
    if samples == 0 {
        return Err(Error::NotFound(format!(
            "no distance where {} and the baselines are simultaneously secure",
            numerator.label()
        )));
    }
    Ok(GainReport { average_gain: sum / samples as f64, l_min, l_max, samples })
}

/// CSV rendering of sweep rows: fixed header, every real in scientific
/// notation with 13 significant digits, so identical inputs give identical
/// bytes.
pub fn csv_string(points: &[RatePoint]) -> String {
    let mut out = String::from("distance_km,protocol,source,mu_opt,q_mu,e_mu,rate\n");
    for p in points {
        out.push_str(&format!(
            "{:.12e},{},{},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            p.distance_km,
            p.protocol.label(),
            p.source.label(),
            p.mu_opt,
            p.q_mu,
            p.e_mu,
            p.rate
        ));
    }
    out
}

/// Writes `csv_string` to a file, surfacing I/O failures with the path.
pub fn emit_csv(points: &[RatePoint], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(points))
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

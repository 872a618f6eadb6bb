//! Plain-text configuration: `key = value` pairs, one per line, `#`
//! comments, every key defaulted so an empty file is a valid config. CLI
//! flags override file values by calling `set` again after loading.

use std::path::Path;

use crate::channel::ChannelParams;
use crate::decoy::{DecoyProtocolParams, PrefactorVariant};
use crate::error::{Error, Result};
use crate::experiment::Scenario;
use crate::sources::{HspsStats, TriggerParams};

/// All tunable values with their defaults: the GYS channel, the Fig.-style
/// trigger (eta_a = 0.6, d_a = 5e-8), thermal HSPS statistics, the sound
/// decoy prefactors, and a 0..200 km sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub alpha: f64,
    pub eta_bob: f64,
    pub p_dark: f64,
    pub e_det: f64,
    pub eta_a: f64,
    pub d_a: f64,
    pub hsps_stats: HspsStats,
    pub variant: PrefactorVariant,
    pub mu: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub step: f64,
}

impl Default for Config {
    fn default() -> Self {
        let channel = ChannelParams::default();
        let trigger = TriggerParams::default();
        Self {
            alpha: channel.alpha,
            eta_bob: channel.eta_bob,
            p_dark: channel.p_dark,
            e_det: channel.e_det,
            eta_a: trigger.eta_a,
            d_a: trigger.d_a,
            hsps_stats: HspsStats::default(),
            variant: PrefactorVariant::default(),
            mu: 0.6,
            nu1: 0.2,
            nu2: 0.1,
            l_min: 0.0,
            l_max: 200.0,
            step: 1.0,
        }
    }
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_str_content(&text)
    }

    /// Parses config text into defaults-plus-overrides. Later lines win.
    pub fn from_str_content(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got '{line}'", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Applies one override by key name; keys mirror the struct fields.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num(key: &str, value: &str) -> Result<f64> {
            value.parse::<f64>().map_err(|_| {
                Error::Config(format!("{key} expects a number, got '{value}'"))
            })
        }
        match key {
            "alpha" => self.alpha = num(key, value)?,
            "eta_bob" => self.eta_bob = num(key, value)?,
            "p_dark" => self.p_dark = num(key, value)?,
            "e_det" => self.e_det = num(key, value)?,
            "eta_a" => self.eta_a = num(key, value)?,
            "d_a" => self.d_a = num(key, value)?,
            "hsps_stats" => self.hsps_stats = value.parse()?,
            "variant" => self.variant = value.parse()?,
            "mu" => self.mu = num(key, value)?,
            "nu1" => self.nu1 = num(key, value)?,
            "nu2" => self.nu2 = num(key, value)?,
            "l_min" => self.l_min = num(key, value)?,
            "l_max" => self.l_max = num(key, value)?,
            "step" => self.step = num(key, value)?,
            other => {
                return Err(Error::Config(format!("unknown config key '{other}'")));
            }
        }
        Ok(())
    }

    pub fn channel(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.alpha, self.eta_bob, self.p_dark, self.e_det)
    }

    pub fn trigger(&self) -> Result<TriggerParams> {
        TriggerParams::new(self.eta_a, self.d_a)
    }

    pub fn decoy(&self) -> Result<DecoyProtocolParams> {
        DecoyProtocolParams::new(self.mu, self.nu1, self.nu2)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        Ok(Scenario {
            channel: self.channel()?,
            trigger: self.trigger()?,
            hsps_stats: self.hsps_stats,
            ..Scenario::default()
        })
    }
}

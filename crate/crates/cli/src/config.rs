//! `key = value` run configuration with `#` comments, dotted keys and
//! `LANDAU_*` environment overrides.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

/// Every accepted key. Environment names are derived from these.
pub const KEYS: &[&str] = &[
    "b",
    "K",
    "J",
    "grid_radius",
    "grid_n",
    "dt",
    "t_final",
    "coupling",
    "potential.kind",
    "potential.A",
    "potential.sigma",
    "fermi.mode",
    "fermi.n",
    "fermi.mu",
    "fermi.T",
    "initial_q.kind",
    "initial_q.k",
    "initial_q.j",
    "initial_q.k2",
    "initial_q.j2",
    "initial_q.seed",
    "initial_q.hs_norm",
    "snapshot_every",
    "outputs",
];

pub const ENV_PREFIX: &str = "LANDAU_";

/// Environment variable that overrides `key`.
pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.to_uppercase().replace('.', "_"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn fail<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    Spectral,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FermiMode {
    Sea,
    Dirac,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialConfig {
    pub amplitude: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiConfig {
    pub mode: FermiMode,
    pub n: usize,
    pub mu: f64,
    pub temperature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialQ {
    Zero,
    BasisPair { k: usize, j: usize, k2: usize, j2: usize },
    Random { seed: u64, hs_norm: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub b: f64,
    pub k_levels: usize,
    pub j_count: usize,
    /// Zero selects the truncation's default radius.
    pub grid_radius: f64,
    pub grid_n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub coupling: CouplingKind,
    pub potential: PotentialConfig,
    pub fermi: FermiConfig,
    pub initial_q: InitialQ,
    pub snapshot_every: usize,
    pub outputs: PathBuf,
}

impl RunConfig {
    /// Reads an optional config file, then applies `LANDAU_*` overrides from
    /// `env`.
    pub fn load(
        path: Option<&Path>,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, ConfigError> {
        let mut raw = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", p.display())))?;
                parse_lines(&text)?
            }
            None => BTreeMap::new(),
        };
        for (name, value) in env {
            if !name.starts_with(ENV_PREFIX) {
                continue;
            }
            match KEYS.iter().find(|k| env_name(k) == name) {
                Some(k) => {
                    raw.insert((*k).to_string(), value.trim().to_string());
                }
                None => return fail(format!("unknown environment override {name}")),
            }
        }
        Self::from_map(&raw)
    }

    pub fn from_map(raw: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let get = |k: &str| raw.get(k).map(String::as_str);
        let b = num(get("b"), "b", 1.0)?;
        if !(b > 0.0 && b.is_finite()) {
            return fail(format!("b must be positive, got {b}"));
        }
        let k_levels = int(get("K"), "K", 8)?;
        let j_count = int(get("J"), "J", 16)?;
        if k_levels == 0 || j_count == 0 {
            return fail("K and J must be at least 1");
        }
        let grid_radius = num(get("grid_radius"), "grid_radius", 0.0)?;
        if !(grid_radius >= 0.0 && grid_radius.is_finite()) {
            return fail("grid_radius must be non-negative (0 = automatic)");
        }
        let grid_n = int(get("grid_n"), "grid_n", 256)?;
        let dt = num(get("dt"), "dt", PI / (800.0 * b))?;
        if !(dt > 0.0 && dt.is_finite()) {
            return fail(format!("dt must be positive, got {dt}"));
        }
        let t_final = num(get("t_final"), "t_final", PI / b)?;
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return fail(format!("t_final must be non-negative, got {t_final}"));
        }
        let coupling = match get("coupling").unwrap_or("spectral") {
            "spectral" => CouplingKind::Spectral,
            "grid" => CouplingKind::Grid,
            other => return fail(format!("coupling must be spectral or grid, got '{other}'")),
        };
        match get("potential.kind").unwrap_or("gaussian") {
            "gaussian" => {}
            other => return fail(format!("potential.kind must be gaussian, got '{other}'")),
        }
        let potential = PotentialConfig {
            amplitude: num(get("potential.A"), "potential.A", 1.0)?,
            sigma: num(get("potential.sigma"), "potential.sigma", 1.0)?,
        };
        if !potential.amplitude.is_finite() || !(potential.sigma > 0.0 && potential.sigma.is_finite()) {
            return fail("potential.A must be finite and potential.sigma positive");
        }
        let mode = match get("fermi.mode").unwrap_or("sea") {
            "sea" => FermiMode::Sea,
            "dirac" => FermiMode::Dirac,
            other => return fail(format!("fermi.mode must be sea or dirac, got '{other}'")),
        };
        let fermi = FermiConfig {
            mode,
            n: int(get("fermi.n"), "fermi.n", 1)?,
            mu: num(get("fermi.mu"), "fermi.mu", 2.0 * b)?,
            temperature: num(get("fermi.T"), "fermi.T", 0.5 * b)?,
        };
        if mode == FermiMode::Sea && fermi.n >= k_levels {
            return fail(format!("fermi.n = {} must be below K = {k_levels}", fermi.n));
        }
        if mode == FermiMode::Dirac && !(fermi.temperature > 0.0 && fermi.temperature.is_finite()) {
            return fail("fermi.T must be positive");
        }
        let initial_q = match get("initial_q.kind").unwrap_or("random") {
            "zero" => InitialQ::Zero,
            "basis_pair" => {
                let k = int(get("initial_q.k"), "initial_q.k", 0)?;
                let j = int(get("initial_q.j"), "initial_q.j", 0)?;
                let k2 = int(get("initial_q.k2"), "initial_q.k2", 0)?;
                let j2 = int(get("initial_q.j2"), "initial_q.j2", 0)?;
                if k.max(k2) >= k_levels || j.max(j2) >= j_count {
                    return fail("initial_q basis indices lie outside the truncation");
                }
                InitialQ::BasisPair { k, j, k2, j2 }
            }
            "random" => {
                let seed = int(get("initial_q.seed"), "initial_q.seed", 0)? as u64;
                let hs_norm = num(get("initial_q.hs_norm"), "initial_q.hs_norm", 1.0)?;
                if !(hs_norm >= 0.0 && hs_norm.is_finite()) {
                    return fail("initial_q.hs_norm must be non-negative");
                }
                InitialQ::Random { seed, hs_norm }
            }
            other => return fail(format!("initial_q.kind must be zero, basis_pair or random, got '{other}'")),
        };
        Ok(Self {
            b,
            k_levels,
            j_count,
            grid_radius,
            grid_n,
            dt,
            t_final,
            coupling,
            potential,
            fermi,
            initial_q,
            snapshot_every: int(get("snapshot_every"), "snapshot_every", 0)?,
            outputs: PathBuf::from(get("outputs").unwrap_or("out")),
        })
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are ignored.
pub fn parse_lines(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return fail(format!("line {}: expected 'key = value'", no + 1));
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return fail(format!("line {}: unknown key '{key}'", no + 1));
        }
        if value.is_empty() {
            return fail(format!("line {}: empty value for '{key}'", no + 1));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return fail(format!("line {}: duplicate key '{key}'", no + 1));
        }
    }
    Ok(map)
}

fn num(v: Option<&str>, key: &str, default: f64) -> Result<f64, ConfigError> {
    match v {
        None => Ok(default),
        Some(s) => s.parse().map_err(|_| ConfigError(format!("{key}: '{s}' is not a number"))),
    }
}

fn int(v: Option<&str>, key: &str, default: usize) -> Result<usize, ConfigError> {
    match v {
        None => Ok(default),
        Some(s) => s.parse().map_err(|_| ConfigError(format!("{key}: '{s}' is not a non-negative integer"))),
    }
}

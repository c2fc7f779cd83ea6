//! Scenario files: a flat TOML format holding the channel, system
//! parameters, optional rate targets, and an optional explicit design.
//!
//! ```toml
//! [system]
//! rrhs = 2
//! users = 2
//! noise_power = 1.0
//! fronthaul_caps = [2.0, 3.0]
//! power_budget = 10.0            # or "unbounded", or omit
//!
//! [channel]
//! # one row per RRH, one [re, im] pair per user
//! rows = [
//!     [[0.9, 0.1], [0.3, -0.2]],
//!     [[-0.4, 0.5], [1.1, 0.0]],
//! ]
//!
//! [targets]                      # optional
//! rates = [1.0, 0.5]
//!
//! [design]                       # optional
//! direction = "uplink"
//! powers = [1.0, 2.0]
//! # one beamformer per user, one [re, im] pair per RRH
//! beamformers = [
//!     [[1.0, 0.0], [0.0, 0.0]],
//!     [[0.0, 0.0], [1.0, 0.0]],
//! ]
//! quant_noise = [0.5, 0.5]
//! ```

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{
    ChannelMatrix, DownlinkDesign, PowerBudget, SystemParams, UplinkDesign,
};
use crate::optimizer::RateTargets;
use crate::verify::{instance_rng, random_channel};

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub channel: ChannelMatrix,
    pub params: SystemParams,
    pub targets: Option<RateTargets>,
    pub design: Option<ScenarioDesign>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioDesign {
    Uplink(UplinkDesign),
    Downlink(DownlinkDesign),
}

// --- raw serde layer -------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    system: SystemSection,
    channel: ChannelSection,
    targets: Option<TargetsSection>,
    design: Option<DesignSection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    rrhs: usize,
    users: usize,
    noise_power: f64,
    fronthaul_caps: Vec<f64>,
    power_budget: Option<BudgetValue>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BudgetValue {
    Finite(f64),
    Keyword(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    rows: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetsSection {
    rates: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignSection {
    direction: String,
    powers: Vec<f64>,
    beamformers: Vec<Vec<[f64; 2]>>,
    quant_noise: Vec<f64>,
}

fn complex_rows(raw: &[Vec<[f64; 2]>]) -> Vec<Vec<Complex64>> {
    raw.iter()
        .map(|row| row.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
        .collect()
}

/// Parse and validate a scenario from TOML text. `origin` labels error
/// messages (usually the file path).
pub fn parse_scenario_str(text: &str, origin: &str) -> Result<Scenario> {
    let raw: ScenarioFile = toml::from_str(text).map_err(|e| Error::ScenarioSyntax {
        path: origin.to_string(),
        message: e.to_string(),
    })?;

    let m = raw.system.rrhs;
    let k = raw.system.users;
    if m == 0 || k == 0 {
        return Err(Error::Scenario(
            "system.rrhs and system.users must be at least 1".into(),
        ));
    }

    if raw.channel.rows.len() != m {
        return Err(Error::Scenario(format!(
            "channel.rows must have {m} rows (one per RRH), got {}",
            raw.channel.rows.len()
        )));
    }
    for (i, row) in raw.channel.rows.iter().enumerate() {
        if row.len() != k {
            return Err(Error::Scenario(format!(
                "channel.rows[{i}] must have {k} entries (one per user), got {}",
                row.len()
            )));
        }
    }
    let channel = ChannelMatrix::from_rows(&complex_rows(&raw.channel.rows))?;

    let power_budget = match raw.system.power_budget {
        None => PowerBudget::Unbounded,
        Some(BudgetValue::Finite(p)) => PowerBudget::Finite(p),
        Some(BudgetValue::Keyword(word)) if word == "unbounded" => PowerBudget::Unbounded,
        Some(BudgetValue::Keyword(word)) => {
            return Err(Error::Scenario(format!(
                "system.power_budget must be a positive number or \"unbounded\", got \"{word}\""
            )));
        }
    };
    for &c in &raw.system.fronthaul_caps {
        if c <= 0.0 {
            return Err(Error::Scenario(
                "system.fronthaul_caps: fronthaul capacity must be positive".into(),
            ));
        }
    }
    let params = SystemParams {
        noise_power: raw.system.noise_power,
        fronthaul_caps: raw.system.fronthaul_caps,
        power_budget,
    };
    params
        .validate(m)
        .map_err(|e| Error::Scenario(format!("system: {e}")))?;

    let targets = match raw.targets {
        None => None,
        Some(t) => {
            if t.rates.len() != k {
                return Err(Error::Scenario(format!(
                    "targets.rates must have {k} entries, got {}",
                    t.rates.len()
                )));
            }
            Some(RateTargets::new(t.rates).map_err(|e| Error::Scenario(format!("targets: {e}")))?)
        }
    };

    let design = match raw.design {
        None => None,
        Some(d) => {
            if d.powers.len() != k {
                return Err(Error::Scenario(format!(
                    "design.powers must have {k} entries, got {}",
                    d.powers.len()
                )));
            }
            if d.beamformers.len() != k {
                return Err(Error::Scenario(format!(
                    "design.beamformers must have {k} vectors, got {}",
                    d.beamformers.len()
                )));
            }
            for (i, b) in d.beamformers.iter().enumerate() {
                if b.len() != m {
                    return Err(Error::Scenario(format!(
                        "design.beamformers[{i}] must have {m} entries, got {}",
                        b.len()
                    )));
                }
            }
            if d.quant_noise.len() != m {
                return Err(Error::Scenario(format!(
                    "design.quant_noise must have {m} entries, got {}",
                    d.quant_noise.len()
                )));
            }
            let beams = complex_rows(&d.beamformers);
            match d.direction.as_str() {
                "uplink" => {
                    let design = UplinkDesign {
                        powers: d.powers,
                        beamformers: beams,
                        quant_noise: d.quant_noise,
                    };
                    design
                        .validate(m, k)
                        .map_err(|e| Error::Scenario(format!("design: {e}")))?;
                    Some(ScenarioDesign::Uplink(design))
                }
                "downlink" => {
                    let design = DownlinkDesign {
                        powers: d.powers,
                        beamformers: beams,
                        quant_noise: d.quant_noise,
                    };
                    design
                        .validate(m, k)
                        .map_err(|e| Error::Scenario(format!("design: {e}")))?;
                    Some(ScenarioDesign::Downlink(design))
                }
                other => {
                    return Err(Error::Scenario(format!(
                        "design.direction must be \"uplink\" or \"downlink\", got \"{other}\""
                    )));
                }
            }
        }
    };

    Ok(Scenario {
        channel,
        params,
        targets,
        design,
    })
}

/// Parse and validate a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario_str(&text, &path.display().to_string())
}

// --- emission ---------------------------------------------------------------

// TOML floats need a decimal point or exponent; Rust's shortest round-trip
// Display for f64 drops ".0" on integral values.
fn toml_float(x: f64) -> String {
    let s = format!("{x}");
    if s.contains('.') || s.contains('e') || s.contains('E') || s.contains("inf") || s.contains("NaN")
    {
        s
    } else {
        format!("{s}.0")
    }
}

fn complex_pair(z: Complex64) -> String {
    format!("[{}, {}]", toml_float(z.re), toml_float(z.im))
}

fn float_list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|x| toml_float(*x)).collect();
    format!("[{}]", items.join(", "))
}

fn complex_matrix(out: &mut String, key: &str, rows: usize, entry: impl Fn(usize, usize) -> Complex64, cols: usize) {
    let _ = writeln!(out, "{key} = [");
    for r in 0..rows {
        let items: Vec<String> = (0..cols).map(|c| complex_pair(entry(r, c))).collect();
        let _ = writeln!(out, "    [{}],", items.join(", "));
    }
    let _ = writeln!(out, "]");
}

/// Serialize a scenario to TOML. Round-trips exactly: floats are printed in
/// shortest form that parses back to the same bits.
pub fn emit_scenario(s: &Scenario) -> String {
    let m = s.channel.num_rrhs();
    let k = s.channel.num_users();
    let mut out = String::new();
    let _ = writeln!(out, "[system]");
    let _ = writeln!(out, "rrhs = {m}");
    let _ = writeln!(out, "users = {k}");
    let _ = writeln!(out, "noise_power = {}", toml_float(s.params.noise_power));
    let _ = writeln!(out, "fronthaul_caps = {}", float_list(&s.params.fronthaul_caps));
    match s.params.power_budget {
        PowerBudget::Unbounded => {
            let _ = writeln!(out, "power_budget = \"unbounded\"");
        }
        PowerBudget::Finite(p) => {
            let _ = writeln!(out, "power_budget = {}", toml_float(p));
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "[channel]");
    complex_matrix(&mut out, "rows", m, |r, c| s.channel.entry(r, c), k);

    if let Some(targets) = &s.targets {
        let _ = writeln!(out);
        let _ = writeln!(out, "[targets]");
        let _ = writeln!(out, "rates = {}", float_list(&targets.targets));
    }

    if let Some(design) = &s.design {
        let (direction, powers, beams, quant): (&str, &[f64], &[Vec<Complex64>], &[f64]) =
            match design {
                ScenarioDesign::Uplink(d) => {
                    ("uplink", &d.powers, &d.beamformers, &d.quant_noise)
                }
                ScenarioDesign::Downlink(d) => {
                    ("downlink", &d.powers, &d.beamformers, &d.quant_noise)
                }
            };
        let _ = writeln!(out);
        let _ = writeln!(out, "[design]");
        let _ = writeln!(out, "direction = \"{direction}\"");
        let _ = writeln!(out, "powers = {}", float_list(powers));
        complex_matrix(&mut out, "beamformers", k, |r, c| beams[r][c], m);
        let _ = writeln!(out, "quant_noise = {}", float_list(quant));
    }
    out
}

/// Generate a scenario with an i.i.d. standard complex Gaussian channel from
/// the seeded generator. Deterministic per seed.
pub fn generate_scenario(
    num_rrhs: usize,
    num_users: usize,
    seed: u64,
    noise_power: f64,
    fronthaul_caps: &[f64],
    power_budget: Option<f64>,
    targets: Option<Vec<f64>>,
) -> Result<Scenario> {
    if num_rrhs == 0 || num_users == 0 {
        return Err(Error::InvalidInput(
            "scenario generation requires at least one RRH and one user".into(),
        ));
    }
    let caps: Vec<f64> = match fronthaul_caps.len() {
        1 => vec![fronthaul_caps[0]; num_rrhs],
        n if n == num_rrhs => fronthaul_caps.to_vec(),
        n => {
            return Err(Error::InvalidInput(format!(
                "expected 1 or {num_rrhs} fronthaul capacities, got {n}"
            )));
        }
    };
    let params = SystemParams {
        noise_power,
        fronthaul_caps: caps,
        power_budget: match power_budget {
            Some(p) => PowerBudget::Finite(p),
            None => PowerBudget::Unbounded,
        },
    };
    params.validate(num_rrhs)?;
    let targets = match targets {
        None => None,
        Some(rates) => {
            let rates = match rates.len() {
                1 => vec![rates[0]; num_users],
                n if n == num_users => rates,
                n => {
                    return Err(Error::InvalidInput(format!(
                        "expected 1 or {num_users} rate targets, got {n}"
                    )));
                }
            };
            Some(RateTargets::new(rates)?)
        }
    };
    let mut rng = instance_rng(seed, 0);
    let channel = random_channel(num_rrhs, num_users, &mut rng);
    Ok(Scenario {
        channel,
        params,
        targets,
        design: None,
    })
}

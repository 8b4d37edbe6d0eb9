//! Scenario files and `key=value` overrides.

use std::fs;
use std::path::Path;

use toml::{Table, Value};
use wavekin::scenarios::{scenario, SCENARIO_NAMES};
use wavekin::Scenario;

/// Header emitted by `list --template`.
pub const TEMPLATE_HEADER: &str = "\
# wavekin scenario file
#
# All quantities are dimensionless (natural units, hbar = c = 1); times are
# in the same unit as params.tau.
#
# name, description      identifier and one-line summary
# params                 mode = \"photon\" | \"matter\", omega, and tau or gamma.
#                        The other constant is derived from 4*pi*gamma*tau*omega = 1
#                        (photon) or gamma*tau*omega = 1 (matter); beta = omega.
#                        If both are given they must satisfy the identity.
# drive                  kind = \"field\" with a [drive.field] table
#                        (plane_wave, standing_wave_normal, oblique_standing,
#                        double_slit_far_field, gaussian_packet, box_eigenstate,
#                        superposition) and an optional intensity scale, or
#                        kind = \"square_wave\" (high, low, half_period) or
#                        kind = \"sinusoid\" (mean, amplitude, angular_frequency).
# region                 spatial interval [lo, hi] sampled by the point process
# grid_points, bins      density grid points and histogram bins over the region
# t_end, dt              run length and step (dt <= tau/20)
# record_every           keep every n-th step in density.csv
# seed                   64-bit seed of the event stream
# ensemble               independent copies feeding the sampler
# rate_bound             thinning bound (default: analytic supremum of the drive)
# initial                \"empty\" (p = 0) or \"born\" (Born density at t = 0)
# born_transient         samples before this many tau are excluded from the
#                        Born comparison
# steady_state           require t_end >= 30 tau
# companion_tau_factor   rerun the kinetics with tau scaled by this factor
# occupancy_window       [start, end] in units of tau for occupancy checks
# ks_samples             sample size of the lifetime / inter-birth KS checks
# coarse_bins            extra coarse histogram for a low-noise visibility
# checkpoints            birth counts at which the histogram is compared
# [thresholds.<stat>]    min and/or max bound on a computed statistic
";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown scenario {0:?}; valid names: {names}", names = SCENARIO_NAMES.join(", "))]
    UnknownScenario(String),
    #[error("{0}")]
    Read(String),
    #[error("{0}")]
    Syntax(String),
    #[error("{0}")]
    Override(String),
    #[error("{0}")]
    Invalid(String),
}

/// Serializes a scenario as a TOML document.
pub fn to_toml(s: &Scenario) -> String {
    toml::to_string(s).expect("scenarios serialize to TOML")
}

/// Resolves a registry name or a path to a TOML file into a table.
pub fn load_table(target: &str) -> Result<Table, ConfigError> {
    if let Some(s) = scenario(target) {
        return toml::from_str(&to_toml(&s)).map_err(|e| ConfigError::Syntax(e.to_string()));
    }
    let path = Path::new(target);
    if !path.exists() {
        return Err(ConfigError::UnknownScenario(target.to_string()));
    }
    let text = fs::read_to_string(path).map_err(|e| ConfigError::Read(format!("{target}: {e}")))?;
    // parse straight into the scenario first so field errors carry a line
    if let Err(e) = toml::from_str::<Scenario>(&text) {
        return Err(ConfigError::Syntax(format!("{target}: {e}")));
    }
    toml::from_str(&text).map_err(|e| ConfigError::Syntax(format!("{target}: {e}")))
}

fn parse_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `a.b.c=value`. The value is read as a TOML literal, falling back
/// to a bare string. Setting one of `params.tau` / `params.gamma` drops the
/// other so it is re-derived; changing `params.omega` drops `params.gamma`.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(format!("override {assignment:?} is not of the form key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(format!("override key {key:?} is malformed")));
    }
    let value = parse_value(raw.trim());
    let mut node = &mut *table;
    for part in &path[..path.len() - 1] {
        let entry = node.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        node = match entry {
            Value::Table(t) => t,
            _ => {
                return Err(ConfigError::Override(format!(
                    "override {key}: {part} is not a table"
                )))
            }
        };
    }
    let leaf = path[path.len() - 1];
    node.insert(leaf.to_string(), value);
    if path.len() == 2 && path[0] == "params" {
        let stale = match leaf {
            "tau" => Some("gamma"),
            "gamma" => Some("tau"),
            "omega" if node.contains_key("tau") => Some("gamma"),
            _ => None,
        };
        if let Some(key) = stale {
            node.remove(key);
        }
    }
    Ok(())
}

/// Loads a scenario, applies overrides and an optional seed, and validates.
pub fn resolve(target: &str, overrides: &[String], seed: Option<u64>) -> Result<Scenario, ConfigError> {
    let mut table = load_table(target)?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let mut s: Scenario = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Invalid(format!("{target}: {}", e.to_string().trim())))?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    s.validate().map_err(|e| ConfigError::Invalid(format!("{target}: {e}")))?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use wavekin::list_scenarios;

    #[test]
    fn registry_round_trips_through_toml() {
        for s in list_scenarios() {
            let back: Scenario = toml::from_str(&to_toml(&s)).unwrap();
            assert_eq!(back, s, "{}", s.name);
        }
    }

    #[test]
    fn overrides_set_nested_values() {
        let s = resolve("born_violation", &["drive.half_period=2.0".into(), "t_end=60".into()], Some(7)).unwrap();
        match s.drive {
            wavekin::Drive::SquareWave(sq) => assert_eq!(sq.half_period, 2.0),
            _ => panic!("drive kind changed"),
        }
        assert_eq!(s.t_end, 60.0);
        assert_eq!(s.seed, 7);
    }

    #[test]
    fn tau_override_rederives_gamma() {
        let s = resolve("born_violation", &["params.tau=2.0".into(), "dt=0.1".into(), "t_end=60".into()], None).unwrap();
        assert_eq!(s.params.tau(), 2.0);
        assert_eq!(s.params.gamma(), 0.5);
    }

    #[test]
    fn malformed_overrides() {
        assert!(matches!(resolve("born_violation", &["t_end".into()], None), Err(ConfigError::Override(_))));
        assert!(matches!(resolve("born_violation", &["t_end.x=1".into()], None), Err(ConfigError::Override(_))));
        assert!(matches!(resolve("born_violation", &["t_end=\"soon\"".into()], None), Err(ConfigError::Invalid(_))));
        assert!(matches!(resolve("nope", &[], None), Err(ConfigError::UnknownScenario(_))));
    }
}

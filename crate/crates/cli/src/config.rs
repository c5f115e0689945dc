//! TOML experiment configuration. Keys mirror `ExperimentConfig`; missing keys
//! fall back to the selected preset, unknown keys are rejected all at once.
//!
//! ```toml
//! devices = 100
//! copies = 10
//! d_values = [0, 2, 4]
//! trials = 1000
//!
//! [ns_rule]
//! kind = "affine"
//! slope = 2
//! offset = 2
//!
//! [pulse]
//! kind = "gaussian"
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use oac_core::experiments::ExperimentConfig;
use toml::{Table, Value};

const TOP_LEVEL: &[&str] = &[
    "devices",
    "symbols",
    "copies",
    "d_values",
    "ns_rule",
    "lambda",
    "noise_var",
    "x_min",
    "x_max",
    "pulse",
    "trials",
    "base_seed",
    "resample_delays",
    "include_unbiased",
];

fn allowed_nested(section: &str, kind: Option<&str>) -> &'static [&'static str] {
    match (section, kind) {
        ("ns_rule", Some("affine")) => &["kind", "slope", "offset"],
        ("ns_rule", Some("fixed")) => &["kind", "ns"],
        ("pulse", Some("custom")) => &["kind", "taps"],
        _ => &["kind"],
    }
}

/// Every key of `table` that the configuration does not define, as dotted
/// paths in file order.
pub fn unknown_keys(table: &Table) -> Vec<String> {
    let mut unknown = Vec::new();
    for (key, value) in table {
        if !TOP_LEVEL.contains(&key.as_str()) {
            unknown.push(key.clone());
            continue;
        }
        if let (Some(sub), true) = (value.as_table(), key == "ns_rule" || key == "pulse") {
            let kind = sub.get("kind").and_then(Value::as_str);
            let allowed = allowed_nested(key, kind);
            unknown.extend(
                sub.keys()
                    .filter(|k| !allowed.contains(&k.as_str()))
                    .map(|k| format!("{}.{}", key, k)),
            );
        }
    }
    unknown
}

/// Overlays `text` on `base`.
pub fn parse_config(text: &str, base: &ExperimentConfig) -> Result<ExperimentConfig> {
    let user: Table = toml::from_str(text).context("malformed TOML")?;
    let unknown = unknown_keys(&user);
    if !unknown.is_empty() {
        bail!("unknown config keys: {}", unknown.join(", "));
    }
    let mut merged = Table::try_from(base).context("serializing base config")?;
    merged.extend(user);
    let config: ExperimentConfig = merged.try_into().context("invalid config value")?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path, base: &ExperimentConfig) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text, base).with_context(|| format!("in config {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use oac_core::experiments::{NsRule, PulseConfig};

    #[test]
    fn overlay_keeps_preset_defaults() {
        let base = ExperimentConfig::figure3();
        let c = parse_config(
            "trials = 50\nd_values = [1, 2]\n[ns_rule]\nkind = \"fixed\"\nns = 8\n",
            &base,
        )
        .unwrap();
        assert_eq!(c.trials, 50);
        assert_eq!(c.d_values, vec![1, 2]);
        assert_eq!(c.ns_rule, NsRule::Fixed { ns: 8 });
        assert_eq!(c.devices, base.devices);
        assert_eq!(c.pulse, PulseConfig::Gaussian);
    }

    #[test]
    fn lists_every_unknown_key() {
        let err = parse_config(
            "trails = 5\nlamda = 0.1\n[pulse]\nkind = \"gaussian\"\nwidth = 3\n",
            &ExperimentConfig::figure3(),
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("trails"), "{}", err);
        assert!(err.contains("lamda"), "{}", err);
        assert!(err.contains("pulse.width"), "{}", err);
    }

    #[test]
    fn custom_pulse_roundtrip() {
        let c = parse_config(
            "d_values = [1]\n[ns_rule]\nkind = \"fixed\"\nns = 3\n[pulse]\nkind = \"custom\"\ntaps = [0.5, 1.0, 0.5]\n",
            &ExperimentConfig::figure3(),
        )
        .unwrap();
        assert_eq!(
            c.pulse,
            PulseConfig::Custom {
                taps: vec![0.5, 1.0, 0.5]
            }
        );
    }

    #[test]
    fn rejects_invalid_values() {
        let base = ExperimentConfig::figure3();
        assert!(parse_config("lambda = -1.0", &base).is_err());
        assert!(parse_config("devices = \"many\"", &base).is_err());
    }
}

//! JSON configuration document shared by the CLI subcommands.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelConfig;
use crate::harness::sweep::SweepSpec;
use crate::recovery::RecoveryConfig;
use crate::signals::SignalSpec;
use crate::{Error, Result};

/// Top-level config: one JSON document with optional sections. Unknown keys
/// are rejected at every level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigDoc {
    pub signal: Option<SignalSpec<f64>>,
    pub channel: Option<ChannelConfig<f64>>,
    pub recovery: Option<RecoveryConfig<f64>>,
    pub sweep: Option<SweepSpec>,
}

pub fn parse_config(text: &str) -> Result<ConfigDoc> {
    serde_json::from_str(text).map_err(|e| Error::config(format!("config: {e}")))
}

pub fn read_config(path: &Path) -> Result<ConfigDoc> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"{
      "signal": {
        "kind": {"sinc_mixture": {"shifts": [1, 2, 3, 4, 5, 6], "band_hz": 0.5}},
        "duration_s": 25.0,
        "peak_scale": 12.0
      },
      "channel": {
        "lambda": 1.0,
        "bits": null,
        "noise": {"uniform_bounded": {"rho_eta": 0.15}},
        "insertion": "post_fold",
        "oversampling": 18.0,
        "jitter_nu": 0.0,
        "seed": 7
      },
      "recovery": {
        "order": 2,
        "lambda": 1.0,
        "beta_g": 12.0,
        "block_policy": "revised",
        "reconstruction": "none"
      }
    }"#;

    #[test]
    fn full_document_parses() {
        let doc = parse_config(FULL).unwrap();
        let sig = doc.signal.unwrap();
        assert_eq!(sig.peak_scale, Some(12.0));
        let ch = doc.channel.unwrap();
        assert_eq!(ch.oversampling, 18.0);
        assert_eq!(ch.bits, None);
        let rec = doc.recovery.unwrap();
        assert_eq!(rec.order, 2);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = FULL.replace("\"duration_s\": 25.0", "\"duration_s\": 25.0, \"oops\": 1");
        assert!(parse_config(&bad).is_err());
        assert!(parse_config("{\"bogus_section\": {}}").is_err());
    }

    #[test]
    fn sweep_section_parses() {
        let text = r#"{
          "sweep": {
            "axis1": {"param": "rho", "start": 10, "stop": 22, "step": 4},
            "axis2": {"param": "of", "values": [5, 7.5, 10]},
            "trials_per_cell": 3,
            "signal": {
              "kind": {"sinc_mixture": {"shifts": [1, 2, 3, 4, 5, 6], "band_hz": 0.5}},
              "duration_s": 25.0
            },
            "channel": {
              "lambda": 1.0,
              "noise": {"uniform_bounded": {"rho_eta": 0.15}},
              "insertion": "post_fold",
              "oversampling": 10.0,
              "seed": 0
            },
            "recovery": {
              "order": 2, "lambda": 1.0, "beta_g": 10.0, "block_policy": "revised"
            },
            "success_rule": "exact_residual",
            "base_seed": 42
          }
        }"#;
        let doc = parse_config(text).unwrap();
        let sweep = doc.sweep.unwrap();
        assert_eq!(sweep.axis1.points().unwrap(), vec![10.0, 14.0, 18.0, 22.0]);
        assert_eq!(sweep.axis2.points().unwrap().len(), 3);
    }

    #[test]
    fn snr_threshold_rule_parses() {
        let text = r#"{"success_rule": {"snr_threshold": {"db": 30.0}}}"#;
        #[derive(Deserialize)]
        struct Wrap {
            success_rule: crate::harness::SuccessRule,
        }
        let w: Wrap = serde_json::from_str(text).unwrap();
        assert_eq!(w.success_rule, crate::harness::SuccessRule::SnrThreshold { db: 30.0 });
    }
}

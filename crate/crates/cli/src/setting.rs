use cddr_core::numstat::{GmmSpec, TruncatedExponential};
use cddr_core::simgen::SimSetting;

use crate::args::SettingArgs;
use crate::common::{layered_str, parse_flag};
use crate::config::{ConfigFile, List};
use crate::error::{usage, CliError, Result};

fn list(cfg: &ConfigFile, flag: &Option<String>, key: &str) -> Result<Option<Vec<f64>>> {
    layered_str(cfg, flag, key)
        .map(|s| parse_flag::<List<f64>>(key, &s).map(|l| l.0))
        .transpose()
}

/// A named setting with any parameter overrides from flags or config.
pub fn build_setting(args: &SettingArgs, cfg: &ConfigFile, default: &str) -> Result<SimSetting> {
    let name = layered_str(cfg, &args.setting, "setting").unwrap_or_else(|| default.to_string());
    let mut setting = SimSetting::named(&name).map_err(|e| CliError::Usage(e.to_string()))?;
    let shift = cfg.layer(args.shift, "shift")?;
    let beta = cfg.layer(args.beta, "beta")?;
    let noise_ratio = cfg.layer(args.noise_ratio, "noise-ratio")?;
    let x_rate = cfg.layer(args.x_rate, "x-rate")?;
    let x_upper = cfg.layer(args.x_upper, "x-upper")?;
    let parts = (
        list(cfg, &args.noise_weights, "noise-weights")?,
        list(cfg, &args.noise_means, "noise-means")?,
        list(cfg, &args.noise_sds, "noise-sds")?,
    );
    let noise = match parts {
        (None, None, None) => None,
        (Some(w), Some(m), Some(s)) => {
            Some(GmmSpec::new(w, m, s).map_err(|e| CliError::Usage(e.to_string()))?)
        }
        _ => return usage("noise-weights, noise-means and noise-sds must be given together"),
    };
    match &mut setting {
        SimSetting::Linearity(s) => {
            if let Some(v) = shift {
                s.shift = v;
            }
            if let Some(v) = beta {
                s.beta = v;
            }
            if let Some(v) = noise_ratio {
                s.noise_ratio = v;
            }
            if let Some(n) = noise {
                s.noise = n;
            }
            if x_rate.is_some() || x_upper.is_some() {
                let default = TruncatedExponential::default();
                s.x_dist = TruncatedExponential {
                    rate: x_rate.unwrap_or(default.rate),
                    upper: x_upper.unwrap_or(default.upper),
                };
                if shift.is_none() {
                    s.shift = s.x_dist.mean();
                }
            }
            s.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        }
        SimSetting::Gaussianity(s) => {
            if shift.is_some() || noise_ratio.is_some() || x_rate.is_some() || x_upper.is_some() {
                return usage(format!(
                    "shift, noise-ratio, x-rate and x-upper do not apply to setting {name}"
                ));
            }
            if let Some(v) = beta {
                s.beta = v;
            }
            if let Some(n) = noise {
                s.noise = n;
            }
        }
    }
    Ok(setting)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_apply() {
        let cfg = ConfigFile::parse("setting = nonlinear_p3\nnoise_ratio = 0.25", None).unwrap();
        let args = SettingArgs {
            beta: Some(2.0),
            ..Default::default()
        };
        match build_setting(&args, &cfg, "linear").unwrap() {
            SimSetting::Linearity(s) => {
                assert_eq!((s.beta, s.noise_ratio), (2.0, 0.25));
                assert_eq!(s.linearity.power(), 3.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_overrides() {
        let cfg = ConfigFile::default();
        let args = SettingArgs {
            setting: Some("gaussian".into()),
            shift: Some(1.0),
            ..Default::default()
        };
        assert!(build_setting(&args, &cfg, "linear").is_err());
        let args = SettingArgs {
            noise_weights: Some("0.5,0.5".into()),
            ..Default::default()
        };
        assert!(build_setting(&args, &cfg, "linear").is_err());
        let args = SettingArgs {
            setting: Some("cubic".into()),
            ..Default::default()
        };
        let err = build_setting(&args, &cfg, "linear").unwrap_err().to_string();
        assert!(err.contains("slightly_non_gaussian"), "{err}");
    }
}

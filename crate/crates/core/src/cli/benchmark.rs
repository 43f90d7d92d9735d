//! Expansion of a property grid into instance groups.

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use crate::config::validate::planning_period;
use crate::config::{ExprText, InstanceConfig, ValueSource, TIME_STAMP};
use crate::expr::parse_expression;
use crate::sampling::{PdfFamily, PdfSpec};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UrgencyLevel {
    pub mean: f64,
    pub std: f64,
}

/// Levels to combine; an absent axis keeps the template, an empty one
/// yields no groups. Times are in seconds.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkGrid {
    pub sizes: Option<Vec<u32>>,
    pub dynamism: Option<Vec<f64>>,
    pub urgency: Option<Vec<UrgencyLevel>>,
    /// Direct travel time intervals; `null` means no limit.
    pub gd: Option<Vec<Option<[f64; 2]>>>,
    #[serde(default = "default_reaction")]
    pub urgency_attribute: String,
    #[serde(default = "default_direct")]
    pub dispersion_attribute: String,
}

fn default_reaction() -> String {
    "reaction_time".into()
}

fn default_direct() -> String {
    "direct_travel_time".into()
}

fn axis<T: Clone>(levels: &Option<Vec<T>>) -> Vec<Option<T>> {
    match levels {
        Some(v) => v.iter().cloned().map(Some).collect(),
        None => vec![None],
    }
}

fn number(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// `N_p_s_b_e_d_m_t_g` for a configured group.
pub fn group_name(cfg: &InstanceConfig, grid: &BenchmarkGrid, gd: Option<Option<[f64; 2]>>) -> String {
    let na = || "na".to_string();
    let (b, e) = planning_period(cfg).map(|(b, e)| (number(b), number(e))).unwrap_or_else(|| (na(), na()));
    let d = cfg
        .attribute(TIME_STAMP)
        .and_then(|a| a.dynamism)
        .map(|d| number((d * 100.0).round()))
        .unwrap_or_else(na);
    let (m, t) = match cfg.attribute(&grid.urgency_attribute).map(|a| &a.source) {
        Some(ValueSource::Pdf(p)) if p.family == PdfFamily::Normal => (number(p.loc), number(p.scale)),
        _ => (na(), na()),
    };
    let g = match gd {
        Some(Some([lo, hi])) => format!("{}-{}", number(lo), number(hi)),
        Some(None) => "none".into(),
        None => na(),
    };
    let network: String = cfg.network.chars().filter(|c| !c.is_whitespace()).collect();
    [network, cfg.problem.clone(), cfg.requests.to_string(), b, e, d, m, t, g].join("_")
}

fn bound(text: String) -> Result<ExprText> {
    let expr = parse_expression(&text)?;
    Ok(ExprText { text, expr })
}

/// One configuration per cell of the grid, named by [`group_name`].
pub fn expand_grid(template: &InstanceConfig, grid: &BenchmarkGrid) -> Result<Vec<(String, InstanceConfig)>> {
    let mut out = Vec::new();
    for size in axis(&grid.sizes) {
        for rho in axis(&grid.dynamism) {
            for urg in axis(&grid.urgency) {
                for gd in axis(&grid.gd) {
                    let mut cfg = template.clone();
                    if let Some(s) = size {
                        cfg.requests = s;
                    }
                    if let Some(r) = rho {
                        if !(0.0..=1.0).contains(&r) {
                            bail!("dynamism level {r} outside [0, 1]");
                        }
                        let idx = cfg.attribute_index(TIME_STAMP).context("template has no time_stamp attribute")?;
                        let ts = &mut cfg.attributes[idx];
                        if matches!(ts.source, ValueSource::Expression(_)) {
                            bail!("time_stamp is an expression and cannot take a dynamism level");
                        }
                        ts.dynamism = Some(r);
                    }
                    if let Some(u) = urg {
                        let name = &grid.urgency_attribute;
                        let idx = cfg.attribute_index(name).with_context(|| format!("template has no `{name}` attribute"))?;
                        cfg.attributes[idx].source = ValueSource::Pdf(PdfSpec::normal(u.mean, u.std));
                    }
                    if let Some(interval) = gd {
                        let name = &grid.dispersion_attribute;
                        let idx = cfg.attribute_index(name).with_context(|| format!("template has no `{name}` attribute"))?;
                        let attr = &mut cfg.attributes[idx];
                        let lower = format!("{name} >=");
                        let upper = format!("{name} <=");
                        attr.constraints.retain(|c| !c.text.starts_with(&lower) && !c.text.starts_with(&upper));
                        if let Some([lo, hi]) = interval {
                            attr.constraints.push(bound(format!("{name} >= {}", number(lo)))?);
                            attr.constraints.push(bound(format!("{name} <= {}", number(hi)))?);
                        }
                    }
                    out.push((group_name(&cfg, grid, gd), cfg));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn template() -> InstanceConfig {
        parse_config(
            r#"{"network": "Test City", "problem": "ODBRP", "seed": 1, "requests": 10,
                "attributes": [
                  {"name": "origin", "type": "location"},
                  {"name": "destination", "type": "location"},
                  {"name": "time_stamp", "type": "integer", "pdf": {"type": "uniform", "loc": 25200, "scale": 3600}},
                  {"name": "reaction_time", "type": "integer", "pdf": {"type": "normal", "loc": 600, "scale": 60}},
                  {"name": "direct_travel_time", "type": "integer", "expression": "dtt(origin, destination)",
                   "constraints": ["direct_travel_time >= 600"]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn product_size() {
        let grid: BenchmarkGrid =
            serde_json::from_str(r#"{"sizes": [300, 600], "dynamism": [0, 0.5, 1.0]}"#).unwrap();
        let groups = expand_grid(&template(), &grid).unwrap();
        assert_eq!(groups.len(), 6);
        assert_eq!(groups[1].0, "TestCity_ODBRP_300_25200_28800_50_600_60_na");
    }

    #[test]
    fn empty_axis_yields_nothing() {
        let grid: BenchmarkGrid = serde_json::from_str(r#"{"sizes": []}"#).unwrap();
        assert!(expand_grid(&template(), &grid).unwrap().is_empty());
    }

    #[test]
    fn dispersion_interval_replaces_bounds() {
        let grid: BenchmarkGrid =
            serde_json::from_str(r#"{"gd": [[180, 1000], null], "urgency": [{"mean": 300, "std": 0}]}"#).unwrap();
        let groups = expand_grid(&template(), &grid).unwrap();
        let texts = |i: usize| -> Vec<String> {
            groups[i].1.attribute("direct_travel_time").unwrap().constraints.iter().map(|c| c.text.clone()).collect()
        };
        assert_eq!(texts(0), ["direct_travel_time >= 180", "direct_travel_time <= 1000"]);
        assert!(texts(1).is_empty());
        assert!(groups[0].0.ends_with("_300_0_180-1000"));
        assert!(groups[1].0.ends_with("_none"));
    }
}

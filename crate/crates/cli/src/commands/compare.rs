use anyhow::Result;
use clap::Args;
use diffraction_channel::scenarios::{compare, ComparisonReport, Gain};
use diffraction_channel::{Setup, Thresholds};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, GainName, GeometryArgs, OutputArgs, Settings};
use crate::exit::{Strict, Usage};
use crate::output::{emit, to_json};
use crate::resolve;

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub geometry: GeometryArgs,
    /// Mean signal photons per use
    #[arg(long)]
    pub nbar: Option<f64>,
    /// Mean thermal background photons per mode; positive values select the
    /// noisy gains [default: 0]
    #[arg(long)]
    pub nth: Option<f64>,
    /// Gains to report [default: all]
    #[arg(long, value_enum, value_delimiter = ',')]
    pub gain: Option<Vec<GainName>>,
    /// Exit with status 4 when a reported gain is outside its regime
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct Resolved {
    setup: Setup,
    nbar: f64,
    nth: f64,
    gains: Vec<GainName>,
    strict: bool,
    thresholds: Thresholds,
}

fn gain_key(g: GainName) -> &'static str {
    match g {
        GainName::G1 => "G1",
        GainName::G2 => "G2",
        GainName::G3 => "G3",
    }
}

fn pick(report: &ComparisonReport<f64>, g: GainName) -> Gain<f64> {
    match g {
        GainName::G1 => report.g1,
        GainName::G2 => report.g2,
        GainName::G3 => report.g3,
    }
}

pub fn run(s: &Settings) -> Result<()> {
    if resolve::format(s, Format::Json) != Format::Json {
        return Err(Usage("compare writes JSON only".into()).into());
    }
    let setup = resolve::setup(s)?;
    let thresholds = resolve::thresholds(s)?;
    let nbar = s.nbar.ok_or_else(|| Usage("nbar is required".into()))?;
    let nth = s.nth.unwrap_or(0.0);
    let mut gains = s.gain.clone().unwrap_or_else(|| vec![GainName::G1, GainName::G2, GainName::G3]);
    gains.sort();
    gains.dedup();
    let strict = resolve::flag(s.strict);

    let report = compare(&setup, nbar, nth, thresholds)?;
    if strict {
        let bad: Vec<&str> = gains.iter().filter(|&&g| !pick(&report, g).is_valid()).map(|&g| gain_key(g)).collect();
        if !bad.is_empty() {
            return Err(Strict(format!("{} evaluated outside the regime of validity", bad.join(", "))).into());
        }
    }

    let mut body = serde_json::to_value(report)?;
    if let Value::Object(m) = &mut body {
        for g in [GainName::G1, GainName::G2, GainName::G3] {
            if !gains.contains(&g) {
                m.remove(gain_key(g));
            }
        }
    }
    let config = Resolved { setup, nbar, nth, gains, strict, thresholds };
    body["settings"] = s.echo();
    body["resolved"] = serde_json::to_value(&config)?;
    body["mode"] = json!(if nth > 0.0 { "thermal" } else { "noiseless" });
    let meta = json!({
        "command": "compare",
        "version": env!("CARGO_PKG_VERSION"),
        "settings": s.echo(),
        "resolved": config,
        "mode": body["mode"],
    });
    emit(s.output.as_deref(), &to_json(&body)?, meta, resolve::flag(s.stamp))
}

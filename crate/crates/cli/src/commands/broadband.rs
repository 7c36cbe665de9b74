use anyhow::Result;
use clap::Args;
use diffraction_channel::broadband::{
    capacity_ff_narrowband, capacity_ff_spectral, capacity_nf_broadband, capacity_nf_narrowband, capacity_nf_spectral, ratio_at,
    BroadbandChecks, FrequencyBand, MultiplierKind, SpectralMode,
};
use diffraction_channel::{Setup, Thresholds};
use serde::Serialize;
use serde_json::json;

use crate::config::{BandRegime, Format, GeometryArgs, OutputArgs, Settings, SumMode};
use crate::exit::{Strict, Usage};
use crate::output::{emit, to_json};
use crate::resolve;

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct BroadbandArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub geometry: GeometryArgs,
    /// Which closed-form family the band is treated with
    #[arg(long, value_enum)]
    pub regime: Option<BandRegime>,
    /// Mean power P in watts
    #[arg(long)]
    pub power: Option<f64>,
    /// Observation window T in seconds
    #[arg(long)]
    pub window: Option<f64>,
    /// Lower band edge Ω in rad/s [default: 2πc/λ]
    #[arg(long)]
    pub omega: Option<f64>,
    /// Band width δΩ in rad/s
    #[arg(long, conflicts_with = "unbounded")]
    pub delta_omega: Option<f64>,
    /// Let the band extend to infinite frequency (near field only)
    #[arg(long)]
    pub unbounded: bool,
    /// Sum over resolvable frequencies or integrate [default: continuum]
    #[arg(long, value_enum)]
    pub mode: Option<SumMode>,
    /// Exit with status 4 when part of the band leaves the chosen regime
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct Resolved {
    setup: Setup,
    regime: BandRegime,
    power: f64,
    window: f64,
    omega: f64,
    delta_omega: Option<f64>,
    mode: SumMode,
    strict: bool,
    thresholds: Thresholds,
}

fn required(v: Option<f64>, name: &str) -> Result<f64> {
    v.ok_or_else(|| Usage(format!("{name} is required")).into())
}

pub fn run(s: &Settings) -> Result<()> {
    if resolve::format(s, Format::Json) != Format::Json {
        return Err(Usage("broadband writes JSON only".into()).into());
    }
    let setup = resolve::setup(s)?;
    let thresholds = resolve::thresholds(s)?;
    let regime = s.regime.ok_or_else(|| Usage("regime is required (near or far)".into()))?;
    let power = required(s.power, "power")?;
    let window = required(s.window, "window")?;
    let omega = s.omega.unwrap_or_else(|| setup.angular_frequency());
    let unbounded = resolve::flag(s.unbounded);
    let delta_omega = match (s.delta_omega, unbounded) {
        (Some(_), true) => return Err(Usage("delta-omega and unbounded exclude each other".into()).into()),
        (Some(d), false) => Some(d),
        (None, true) => None,
        (None, false) => return Err(Usage("delta-omega is required unless the band is unbounded".into()).into()),
    };
    let mode = s.mode.unwrap_or(SumMode::Continuum);
    let strict = resolve::flag(s.strict);
    let band = FrequencyBand::new(omega, delta_omega.unwrap_or(f64::INFINITY), window)?;
    let spectral_mode = match mode {
        SumMode::Discrete => SpectralMode::Discrete,
        SumMode::Continuum => SpectralMode::Continuum,
    };

    let result = match regime {
        BandRegime::Near => capacity_nf_spectral(&setup, &band, power, spectral_mode, thresholds)?,
        BandRegime::Far => capacity_ff_spectral(&setup, &band, power, spectral_mode, thresholds)?,
    };
    if strict && result.regime_violation {
        return Err(Strict(format!("part of the band is outside the {regime:?} field regime").to_lowercase()).into());
    }
    let narrowband = match (regime, band.is_bounded()) {
        (BandRegime::Near, true) => Some(capacity_nf_narrowband(&setup, &band, power)?),
        (BandRegime::Far, true) => Some(capacity_ff_narrowband(&setup, &band, power)?),
        (_, false) => None,
    };
    let broadband = match regime {
        BandRegime::Near => Some(capacity_nf_broadband(&setup, omega, power, window, BroadbandChecks::default())?),
        BandRegime::Far => None,
    };
    let kind = match result.allocation.multiplier_kind {
        MultiplierKind::Mu => "mu",
        MultiplierKind::Q => "q",
    };
    let config = Resolved { setup, regime, power, window, omega, delta_omega, mode, strict, thresholds };
    let body = json!({
        "settings": s.echo(),
        "resolved": config,
        "capacity_bits": result.capacity,
        "q_or_mu": { "kind": kind, "value": result.allocation.multiplier },
        "mode": mode,
        "narrowband_closed_form": narrowband,
        "broadband_closed_form": broadband,
        "diagnostics": {
            "regime_violation": result.regime_violation,
            "power_residual": result.allocation.residual,
            "ratio_at_lower_edge": ratio_at(&setup, band.lower),
            "ratio_at_upper_edge": band.is_bounded().then(|| ratio_at(&setup, band.upper())),
            "relative_width": delta_omega.map(|d| d / omega),
            "frequencies": result.allocation.frequencies.len(),
        },
    });
    let meta = json!({
        "command": "broadband",
        "version": env!("CARGO_PKG_VERSION"),
        "settings": s.echo(),
        "resolved": body["resolved"],
    });
    emit(s.output.as_deref(), &to_json(&body)?, meta, resolve::flag(s.stamp))
}

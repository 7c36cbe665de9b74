use anyhow::Result;
use clap::Args;
use diffraction_channel::transfer::{build_transfer_matrix, singular_values};
use diffraction_channel::{classify_regime, Setup};
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, GeometryArgs, OutputArgs, Settings, TransferArgs};
use crate::output::{emit, num, to_json, write_svg, Csv};
use crate::resolve::{self, TransferPlan};
use crate::svg::{Plot, Series};

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub transfer: TransferArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
    /// Also plot the spectrum next to the output file
    #[arg(long)]
    pub svg: bool,
}

#[derive(Serialize)]
struct Resolved {
    setup: Setup,
    ratio: f64,
    transfer: TransferPlan,
    format: Format,
}

#[derive(Serialize)]
struct Row {
    rank: usize,
    eta: f64,
}

pub fn run(s: &Settings) -> Result<()> {
    let setup = resolve::setup(s)?;
    let plan = resolve::transfer(s, &setup)?;
    let format = resolve::format(s, Format::Csv);
    let regime = classify_regime(&setup, resolve::thresholds(s)?)?;

    let t = build_transfer_matrix(&setup, &plan.pupil, &plan.grid, &plan.options)?;
    let spectrum = singular_values(&t)?;
    // tail-closure modes only refine the grid modes
    let etas: Vec<f64> = spectrum.values().iter().copied().take(plan.grid.modes()).collect();

    let config = Resolved { setup, ratio: setup.ratio(), transfer: plan, format };
    let meta = json!({
        "command": "spectrum",
        "version": env!("CARGO_PKG_VERSION"),
        "settings": s.echo(),
        "resolved": config,
        "n_max": plan.n_max,
        "modes": plan.grid.modes(),
        "tail_modes": t.tail_modes(),
        "quadrature_order": t.quadrature_order(),
        "regime": regime,
        "plateau_count_half": etas.iter().filter(|&&e| e > 0.5).count(),
    });
    let data = match format {
        Format::Csv => {
            let mut csv = Csv::new(&["rank", "eta"]);
            for (k, &e) in etas.iter().enumerate() {
                csv.row(&[k.to_string(), num(e)]);
            }
            csv.into_string()
        }
        Format::Json => {
            let rows: Vec<Row> = etas.iter().enumerate().map(|(rank, &eta)| Row { rank, eta }).collect();
            to_json(&json!({ "settings": s.echo(), "resolved": config, "spectrum": rows }))?
        }
    };
    let out = s.output.as_deref();
    emit(out, &data, meta, resolve::flag(s.stamp))?;
    if resolve::flag(s.svg) {
        let plot = Plot {
            title: "transmissivity spectrum",
            x_label: "rank",
            y_label: "eta",
            log_x: false,
            series: vec![Series { label: "eta", points: etas.iter().enumerate().map(|(k, &e)| (k as f64, e)).collect() }],
        };
        write_svg(out, &plot.render())?;
    }
    Ok(())
}

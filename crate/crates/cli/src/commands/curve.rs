use anyhow::Result;
use clap::Args;
use diffraction_channel::capacity::{capacity_ff_1d, capacity_ff_2d, capacity_nf_1d, capacity_nf_2d, capacity_numerical, CapacityResult};
use diffraction_channel::transfer::{build_transfer_matrix, singular_values, Dimension};
use diffraction_channel::{PhotonBudget, Setup, Thresholds};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, GeometryArgs, OutputArgs, Settings, TransferArgs};
use crate::exit::Usage;
use crate::output::{emit, num, to_json, write_svg, Csv};
use crate::resolve::{self, TransferPlan};
use crate::svg::{Plot, Series};

pub const DEFAULT_NBAR: f64 = 4.0;
pub const DEFAULT_RATIO_MIN: f64 = 0.1;
pub const DEFAULT_RATIO_MAX: f64 = 10.0;
pub const DEFAULT_POINTS: usize = 50;

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CurveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub transfer: TransferArgs,
    /// Smallest L/x_R of the sweep [default: 0.1]
    #[arg(long)]
    pub ratio_min: Option<f64>,
    /// Largest L/x_R of the sweep [default: 10]
    #[arg(long)]
    pub ratio_max: Option<f64>,
    /// Number of log-spaced sweep points [default: 50]
    #[arg(long)]
    pub points: Option<usize>,
    /// Mean photon number per use [default: 4]
    #[arg(long)]
    pub nbar: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
    /// Also plot the curves next to the output file
    #[arg(long)]
    pub svg: bool,
}

#[derive(Serialize)]
struct Resolved {
    lens: Setup,
    ratio_min: f64,
    ratio_max: f64,
    points: usize,
    nbar: f64,
    thresholds: Thresholds,
    transfer: TransferPlan,
    format: Format,
}

#[derive(Serialize)]
struct Row {
    ratio: f64,
    capacity_numeric: f64,
    capacity_ff: f64,
    capacity_nf: f64,
    #[serde(skip)]
    ff_valid: bool,
    #[serde(skip)]
    nf_valid: bool,
    #[serde(skip)]
    n_max: usize,
}

pub fn sweep(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && max.is_finite()) {
        return Err(Usage(format!("need 0 < ratio-min < ratio-max, got {min} and {max}")).into());
    }
    if points < 2 {
        return Err(Usage(format!("points must be at least 2, got {points}")).into());
    }
    let step = (max / min).ln() / (points - 1) as f64;
    Ok((0..points)
        .map(|k| match k {
            0 => min,
            k if k == points - 1 => max,
            k => min * (step * k as f64).exp(),
        })
        .collect())
}

fn point(s: &Settings, lens: &Setup, ratio: f64, nbar: f64, thr: Thresholds) -> Result<Row> {
    let setup = resolve::with_ratio(lens, ratio)?;
    let plan = resolve::transfer(s, &setup)?;
    let t = build_transfer_matrix(&setup, &plan.pupil, &plan.grid, &plan.options)?;
    let numeric = capacity_numerical(&singular_values(&t)?, &PhotonBudget::photons(nbar))?;
    let (ff, nf): (CapacityResult<f64>, CapacityResult<f64>) = match plan.grid.dimension {
        Dimension::One => (capacity_ff_1d(&setup, nbar, thr)?, capacity_nf_1d(&setup, nbar, thr)?),
        Dimension::Two => (capacity_ff_2d(&setup, nbar, false, thr)?, capacity_nf_2d(&setup, nbar, false, thr)?),
    };
    Ok(Row {
        ratio,
        capacity_numeric: numeric.capacity,
        capacity_ff: ff.capacity,
        capacity_nf: nf.capacity,
        ff_valid: !ff.flags.regime_violation,
        nf_valid: !nf.flags.regime_violation,
        n_max: plan.n_max,
    })
}

pub fn run(s: &Settings) -> Result<()> {
    if s.ratio.is_some() || s.object_size.is_some() {
        return Err(Usage("capacity-curve sweeps the object size; use ratio-min/ratio-max".into()).into());
    }
    let lens = resolve::lens(s)?;
    let thr = resolve::thresholds(s)?;
    let nbar = s.nbar.unwrap_or(DEFAULT_NBAR);
    if !(nbar > 0.0 && nbar.is_finite()) {
        return Err(Usage(format!("nbar must be positive, got {nbar}")).into());
    }
    let (min, max) = (s.ratio_min.unwrap_or(DEFAULT_RATIO_MIN), s.ratio_max.unwrap_or(DEFAULT_RATIO_MAX));
    let points = s.points.unwrap_or(DEFAULT_POINTS);
    let ratios = sweep(min, max, points)?;
    let format = resolve::format(s, Format::Csv);
    // the aperture and grid choice at the first point documents the sweep
    let plan = resolve::transfer(s, &resolve::with_ratio(&lens, min)?)?;

    let rows: Vec<Row> = ratios.par_iter().map(|&r| point(s, &lens, r, nbar, thr)).collect::<Result<_>>()?;

    let config = Resolved { lens, ratio_min: min, ratio_max: max, points, nbar, thresholds: thr, transfer: plan, format };
    let flags: Vec<_> = rows
        .iter()
        .map(|r| json!({ "ratio": r.ratio, "ff_valid": r.ff_valid, "nf_valid": r.nf_valid, "n_max": r.n_max }))
        .collect();
    let meta = json!({
        "command": "capacity-curve",
        "version": env!("CARGO_PKG_VERSION"),
        "settings": s.echo(),
        "resolved": config,
        "closed_form_validity": flags,
    });
    let data = match format {
        Format::Csv => {
            let mut csv = Csv::new(&["ratio", "capacity_numeric", "capacity_ff", "capacity_nf"]);
            for r in &rows {
                csv.row(&[num(r.ratio), num(r.capacity_numeric), num(r.capacity_ff), num(r.capacity_nf)]);
            }
            csv.into_string()
        }
        Format::Json => to_json(&json!({ "settings": s.echo(), "resolved": config, "rows": rows }))?,
    };
    let out = s.output.as_deref();
    emit(out, &data, meta, resolve::flag(s.stamp))?;
    if resolve::flag(s.svg) {
        let series = |label, f: fn(&Row) -> f64| Series { label, points: rows.iter().map(|r| (r.ratio, f(r))).collect() };
        let plot = Plot {
            title: "capacity versus L/x_R",
            x_label: "L/x_R",
            y_label: "bits per use",
            log_x: true,
            series: vec![
                series("numeric", |r| r.capacity_numeric),
                series("far field", |r| r.capacity_ff),
                series("near field", |r| r.capacity_nf),
            ],
        };
        write_svg(out, &plot.render())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_endpoints_are_exact() {
        let r = sweep(0.1, 10.0, 5).unwrap();
        assert_eq!(r.len(), 5);
        assert_eq!((r[0], r[4]), (0.1, 10.0));
        assert!((r[2] - 1.0).abs() < 1e-12);
        assert!(sweep(1.0, 1.0, 5).is_err());
        assert!(sweep(0.1, 1.0, 1).is_err());
    }
}

use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::Parser;
use nanospin::exact_dynamics::linspace;
use nanospin::lineshape::{windowed_m2, DEFAULT_T2, GRID_SPAN_FACTOR};
use nanospin::{delta_comb, fid, spectrum, spectrum_dft};
use serde_json::json;

use crate::svg::{Plot, Series};
use crate::{Context, Subcommand};

/// Free-induction decay and its broadened line shape.
#[derive(Parser)]
pub struct Opts {
    /// Number of spins.
    #[arg(long, short)]
    n: Option<usize>,
    /// Pair coupling, rad/s [default: 1e3].
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    /// Transverse decay time, s [default: 2e-3].
    #[arg(long)]
    t2: Option<f64>,
    /// Number of frequency points [default: 2001].
    #[arg(long)]
    points: Option<usize>,
    /// Half width of the frequency window in units of the outermost line [default: 1.5, minimum 1.2].
    #[arg(long)]
    span: Option<f64>,
    /// Skip the direct Fourier transform cross-check.
    #[arg(long)]
    skip_dft: bool,
    /// Also write lineshape.svg.
    #[arg(long)]
    svg: bool,
}

impl Subcommand for Opts {
    const NAME: &'static str = "lineshape";

    fn run(&self, ctx: &mut Context) -> Result<ExitCode> {
        let n = ctx.params.required("n", self.n)?;
        let g = ctx.params.value("g", self.g, 1e3)?;
        let t2 = ctx.params.value("t2", self.t2, DEFAULT_T2)?;
        let points = ctx.params.value("points", self.points, 2001)?;
        let span = ctx.params.value("span", self.span, 1.5)?;
        let skip_dft = ctx.params.switch("skip-dft", self.skip_dft)?;
        let svg = ctx.params.switch("svg", self.svg)?;
        let out = ctx.output()?;

        if !(span >= GRID_SPAN_FACTOR) {
            bail!("span {span} must be at least {GRID_SPAN_FACTOR}");
        }
        if points < 3 {
            bail!("need at least 3 frequency points, got {points}");
        }
        let half = span * 1.5 * g.abs() * n.saturating_sub(1).max(1) as f64;
        let omega = linspace(-half, half, points);
        let shape = spectrum(n, g, t2, &omega)?;
        let dft = if skip_dft { None } else { Some(spectrum_dft(n, g, t2, &omega)?) };

        match &dft {
            Some(dft) => out.write_csv("lineshape.csv", &["omega", "spectrum", "spectrum_dft"], &[&omega, &shape.spectrum, dft])?,
            None => out.write_csv("lineshape.csv", &["omega", "spectrum"], &[&omega, &shape.spectrum])?,
        };
        let t = linspace(0.0, 5.0 * t2, points);
        let decay: Vec<f64> = t.iter().map(|&t| fid(t, n, g, Some(t2))).collect::<nanospin::Result<_>>()?;
        out.write_csv("lineshape_fid.csv", &["t", "fid"], &[&t, &decay])?;

        let comb: Vec<_> = delta_comb(n, g)?.into_iter().map(|(w, p)| json!({ "omega": w, "weight": p })).collect();
        let dft_gap = dft.as_ref().map(|d| d.iter().zip(&shape.spectrum).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let peak = shape.spectrum.iter().copied().fold(0.0, f64::max);
        out.write_json(
            "lineshape.json",
            json!({
                "n_spins": n,
                "g_rad_per_s": g,
                "t2_s": t2,
                "zeta": shape.zeta,
                "m2": shape.m2,
                "m4": shape.m4,
                "trapezoid_mass": shape.trapezoid_mass(),
                "trapezoid_m2": shape.trapezoid_m2(),
                "windowed_m2": windowed_m2(n, g, t2, -half, half)?,
                "window_mass": shape.window_mass,
                "dft_max_gap_relative": dft_gap.map(|gap| gap / peak),
                "comb": comb,
            }),
        )?;
        if svg {
            let title = format!("N = {n}, T2 = {t2:e} s");
            let mut series = vec![Series { label: "Lorentzian comb", y: &shape.spectrum }];
            if let Some(d) = &dft {
                series.push(Series { label: "DFT of FID", y: d });
            }
            let plot = Plot { title: &title, x_label: "omega (rad/s)", y_label: "intensity", x: &omega, series };
            out.write_text("lineshape.svg", &plot.render())?;
        }
        Ok(ExitCode::SUCCESS)
    }
}

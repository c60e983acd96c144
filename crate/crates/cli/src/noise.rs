use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::Parser;
use nanospin::exact_dynamics::linspace;
use nanospin::noise::{NoiseAverage, GAUSSIAN_APPROX_MIN_SPINS};
use nanospin::{monte_carlo, p1_noise_gaussian_approx, NoiseModel};

use crate::svg::{Plot, Series};
use crate::{Context, Subcommand};

/// Noise-averaged first-spin polarization: analytic, Gaussian approximation and Monte Carlo.
#[derive(Parser)]
pub struct Opts {
    /// Number of spins.
    #[arg(long, short)]
    n: Option<usize>,
    /// Mean pair coupling, rad/s [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    /// Coupling variance relative to the squared mean [default: 1e-4].
    #[arg(long)]
    rel_variance: Option<f64>,
    /// Correlation time of the coupling fluctuations, s [default: 50].
    #[arg(long)]
    t_c: Option<f64>,
    /// First grid point, s [default: 0].
    #[arg(long)]
    start: Option<f64>,
    /// Last grid point, s [default: 126].
    #[arg(long)]
    end: Option<f64>,
    /// Number of grid points [default: 2521].
    #[arg(long)]
    points: Option<usize>,
    /// Monte Carlo realizations [default: 1000].
    #[arg(long)]
    realizations: Option<usize>,
    /// Monte Carlo seed [default: 20240601].
    #[arg(long)]
    seed: Option<u64>,
    /// Leave out the Monte Carlo columns.
    #[arg(long)]
    skip_mc: bool,
    /// Also write noise.svg.
    #[arg(long)]
    svg: bool,
}

impl Subcommand for Opts {
    const NAME: &'static str = "noise";

    fn run(&self, ctx: &mut Context) -> Result<ExitCode> {
        let n = ctx.params.required("n", self.n)?;
        let g = ctx.params.value("g", self.g, 1.0)?;
        let rel_variance = ctx.params.value("rel-variance", self.rel_variance, 1e-4)?;
        let t_c = ctx.params.value("t-c", self.t_c, 50.0)?;
        let start = ctx.params.value("start", self.start, 0.0)?;
        let end = ctx.params.value("end", self.end, 126.0)?;
        let points = ctx.params.value("points", self.points, 2521)?;
        let skip_mc = ctx.params.switch("skip-mc", self.skip_mc)?;
        let realizations = ctx.params.value("realizations", self.realizations, 1000)?;
        let seed = ctx.params.value("seed", self.seed, 20_240_601)?;
        let svg = ctx.params.switch("svg", self.svg)?;
        let mut out = ctx.output()?;

        if points < 2 || !(end > start) {
            bail!("grid needs at least 2 points and end > start");
        }
        let model = NoiseModel::exponential(g, rel_variance * g * g, t_c)?;
        let grid = linspace(start, end, points);
        if n < GAUSSIAN_APPROX_MIN_SPINS {
            out.note(format!("N = {n} is below {GAUSSIAN_APPROX_MIN_SPINS}; the Gaussian approximation is unreliable"));
        }
        let average = NoiseAverage::new(n, &model)?;
        let analytic: Vec<f64> = grid.iter().map(|&t| average.p1(t)).collect::<nanospin::Result<_>>()?;
        let approx: Vec<f64> = grid
            .iter()
            .map(|&t| p1_noise_gaussian_approx(n, t, &model).map(|a| a.value))
            .collect::<nanospin::Result<_>>()?;

        let mc = if skip_mc { None } else { Some(monte_carlo(n, &grid, &model, realizations, seed)?) };
        match &mc {
            Some(mc) => out.write_csv(
                "noise.csv",
                &["t", "analytic", "approx", "mc_mean", "mc_stderr"],
                &[&grid, &analytic, &approx, &mc.mean, &mc.stderr],
            )?,
            None => out.write_csv("noise.csv", &["t", "analytic", "approx"], &[&grid, &analytic, &approx])?,
        };
        if svg {
            let title = format!("N = {n}, relative variance {rel_variance:e}, t_c = {t_c}");
            let mut series = vec![Series { label: "analytic", y: &analytic }, Series { label: "approx", y: &approx }];
            if let Some(mc) = &mc {
                series.push(Series { label: "Monte Carlo", y: &mc.mean });
            }
            let plot = Plot { title: &title, x_label: "t (s)", y_label: "P1", x: &grid, series };
            out.write_text("noise.svg", &plot.render())?;
        }
        Ok(ExitCode::SUCCESS)
    }
}

use std::f64::consts::PI;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, ValueEnum};
use nanospin::{trace, ClusterSpec, TimeGrid};

use crate::svg::{Plot, Series};
use crate::{Context, Subcommand};

#[derive(Clone, Copy, ValueEnum)]
pub enum Mode {
    /// Dimensionless `τ = g t / 2`.
    Tau,
    /// Seconds.
    Time,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Tau => "tau",
            Self::Time => "time",
        })
    }
}

/// Polarization of the first spin and of the others after an initial flip.
#[derive(Parser)]
pub struct Opts {
    /// Number of spins.
    #[arg(long, short)]
    n: Option<usize>,
    /// Pair coupling, rad/s [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    /// Axis of the sampling grid [default: tau].
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// First grid point [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    start: Option<f64>,
    /// Last grid point [default: one full period, 2π in τ].
    #[arg(long, allow_negative_numbers = true)]
    end: Option<f64>,
    /// Number of grid points [default: 1001].
    #[arg(long)]
    points: Option<usize>,
    /// Also write polarize.svg.
    #[arg(long)]
    svg: bool,
}

impl Subcommand for Opts {
    const NAME: &'static str = "polarize";

    fn run(&self, ctx: &mut Context) -> Result<ExitCode> {
        let n = ctx.params.required("n", self.n)?;
        let g = ctx.params.value("g", self.g, 1.0)?;
        let mode = ctx.params.value("mode", self.mode, Mode::Tau)?;
        let start = ctx.params.value("start", self.start, 0.0)?;
        let default_end = match mode {
            Mode::Tau => 2.0 * PI,
            Mode::Time => 4.0 * PI / g,
        };
        let end = ctx.params.value("end", self.end, default_end)?;
        let points = ctx.params.value("points", self.points, 1001)?;
        let svg = ctx.params.switch("svg", self.svg)?;
        let out = ctx.output()?;

        if points < 2 {
            bail!("need at least 2 grid points, got {points}");
        }
        let grid = match mode {
            Mode::Tau => TimeGrid::linspace_tau(start, end, points),
            Mode::Time => TimeGrid::linspace_time(start, end, points),
        };
        let tr = trace(&ClusterSpec::new(n, g)?, &grid)?;
        let t = tr.t.clone().unwrap_or_else(|| vec![f64::NAN; tr.len()]);
        out.write_csv("polarize.csv", &["t", "tau", "p1", "p_other"], &[&t, &tr.tau, &tr.p1, &tr.p_other])?;
        if svg {
            let title = format!("N = {n}");
            let (x, x_label) = match mode {
                Mode::Tau => (&tr.tau, "tau = g t / 2"),
                Mode::Time => (&t, "t (s)"),
            };
            let plot = Plot {
                title: &title,
                x_label,
                y_label: "polarization",
                x,
                series: vec![Series { label: "P1", y: &tr.p1 }, Series { label: "P_other", y: &tr.p_other }],
            };
            out.write_text("polarize.svg", &plot.render())?;
        }
        Ok(ExitCode::SUCCESS)
    }
}

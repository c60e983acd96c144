use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use nanospin::geometry::PROTON_GAMMA;
use nanospin::invert_measurement;
use serde_json::json;

use crate::{Context, Subcommand};

/// Cavity volume and aspect ratio from a measured pulse period and width.
#[derive(Parser)]
pub struct Opts {
    /// Interval between polarization pulses, s.
    #[arg(long)]
    period: Option<f64>,
    /// Pulse width in the 4π/(g√N) convention, s.
    #[arg(long)]
    width: Option<f64>,
    /// Spin concentration, nm⁻³.
    #[arg(long)]
    concentration: Option<f64>,
    /// Known tilt of the cavity axis from the field, rad.
    #[arg(long)]
    alpha: Option<f64>,
    /// Gyromagnetic ratio, rad s⁻¹ G⁻¹ [default: proton].
    #[arg(long)]
    gamma: Option<f64>,
}

impl Subcommand for Opts {
    const NAME: &'static str = "invert";

    fn run(&self, ctx: &mut Context) -> Result<ExitCode> {
        let period = ctx.params.required("period", self.period)?;
        let width = ctx.params.required("width", self.width)?;
        let concentration = ctx.params.required("concentration", self.concentration)?;
        let alpha = ctx.params.required("alpha", self.alpha)?;
        let gamma = ctx.params.value("gamma", self.gamma, PROTON_GAMMA)?;
        let mut out = ctx.output()?;

        let inv = invert_measurement(period, width, concentration, alpha, gamma)?;
        if inv.coupling_sign < 0.0 {
            out.note("only the g < 0 branch is attainable for this tilt");
        }
        let body = json!({
            "volume_nm3": inv.volume,
            "aspect": inv.aspect,
            "shape_integral": inv.shape_integral,
            "coupling_sign": inv.coupling_sign,
            "mirror_aspect": inv.mirror_aspect,
            "n_spins": concentration * inv.volume,
        });
        println!("{}", serde_json::to_string_pretty(&out.document(body.clone()))?);
        out.write_json("invert.json", body)?;
        Ok(ExitCode::SUCCESS)
    }
}

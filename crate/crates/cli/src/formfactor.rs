use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use nanospin::geometry::{forward_observables, legendre_p2, shape_integral, PROTON_GAMMA};
use nanospin::{coupling_g, form_factor, CavityGeometry, GasSpec};
use serde_json::json;

use crate::{Context, Subcommand};

const MAGIC_ANGLE_P2: f64 = 1e-3;

/// Shape integral, form factor and pair coupling of a filled spheroidal cavity.
#[derive(Parser)]
pub struct Opts {
    /// Semi-axis along the symmetry axis, nm.
    #[arg(long)]
    a: Option<f64>,
    /// Transverse semi-axis, nm.
    #[arg(long)]
    b: Option<f64>,
    /// Tilt of the symmetry axis from the field, rad [default: 0].
    #[arg(long)]
    alpha: Option<f64>,
    /// Gyromagnetic ratio, rad s⁻¹ G⁻¹ [default: proton].
    #[arg(long)]
    gamma: Option<f64>,
    /// Number of spins in the cavity [default: 100].
    #[arg(long)]
    n_spins: Option<usize>,
}

impl Subcommand for Opts {
    const NAME: &'static str = "formfactor";

    fn run(&self, ctx: &mut Context) -> Result<ExitCode> {
        let a = ctx.params.required("a", self.a)?;
        let b = ctx.params.required("b", self.b)?;
        let alpha = ctx.params.value("alpha", self.alpha, 0.0)?;
        let gamma = ctx.params.value("gamma", self.gamma, PROTON_GAMMA)?;
        let n = ctx.params.value("n-spins", self.n_spins, 100)?;
        let mut out = ctx.output()?;

        let geom = CavityGeometry::new(a, b, alpha)?;
        let gas = GasSpec::filling(&geom, gamma, n)?;
        let shape = shape_integral(geom.aspect())?;
        let p2 = legendre_p2(alpha.cos())?;
        let f = form_factor(&geom);
        let g = coupling_g(&geom, &gas);
        if shape == 0.0 {
            out.note("spherical cavity: the shape integral vanishes, so g = 0 and the spins do not evolve");
        }
        if p2.abs() < MAGIC_ANGLE_P2 {
            out.note(format!("alpha is at the magic angle (P2 = {p2:.3e}): F and g are approximately zero"));
        }
        let (period, width) = if g == 0.0 { (f64::INFINITY, f64::INFINITY) } else { forward_observables(g, n) };
        let body = json!({
            "a_nm": a,
            "b_nm": b,
            "aspect": geom.aspect(),
            "alpha_rad": alpha,
            "volume_nm3": geom.volume(),
            "concentration_nm3": gas.concentration,
            "n_spins": n,
            "shape_integral": shape,
            "p2": p2,
            "form_factor": f,
            "g_rad_per_s": g,
            "pulse_period_s": period,
            "pulse_width_s": width,
        });
        println!("{}", serde_json::to_string_pretty(&out.document(body.clone()))?);
        out.write_json("formfactor.json", body)?;
        Ok(ExitCode::SUCCESS)
    }
}

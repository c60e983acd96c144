use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::Parser;
use nanospin::exact_dynamics::linspace;
use nanospin::oracle::{invariance_check, oracle_p1_tau, MAX_ORACLE_SPINS};
use nanospin::spectral_cg::{p1_via_cg, stationary_via_cg};
use nanospin::{trace, ClusterSpec, ExactPolarization, TimeGrid};
use serde_json::json;

use crate::{Context, Subcommand};

const INVARIANCE_MAX_SPINS: usize = 10;
const INVARIANCE_PARAMETERS: [(f64, f64); 2] = [(10.0, 2.0), (-3.0, 0.7)];

/// Cross-checks the closed form against the angular-momentum sum and the
/// Hilbert-space oracle, plus the invariant suites. Exits 1 on any failure.
#[derive(Parser)]
pub struct Opts {
    /// Largest spin count to check, at most 12 [default: 10].
    #[arg(long)]
    max_n: Option<usize>,
    /// Largest accepted deviation [default: 1e-10].
    #[arg(long)]
    tolerance: Option<f64>,
    /// Grid points per period [default: 200].
    #[arg(long)]
    points: Option<usize>,
    /// Adds `δ · w · cos(N τ)` to the closed form, `w` being its frequency-N weight.
    #[arg(long, allow_negative_numbers = true)]
    inject_fault: Option<f64>,
}

struct Check {
    n: usize,
    name: &'static str,
    deviation: f64,
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn checks_for(n: usize, points: usize, fault: f64) -> Result<Vec<Check>> {
    let exact = ExactPolarization::new(n)?;
    let top = exact.oscillations().iter().find(|o| o.frequency == n as f64).map_or(0.0, |o| o.weight);
    let closed = |tau: f64| exact.p1(tau) + fault * top * (n as f64 * tau).cos();
    let period = ClusterSpec::dimensionless(n)?.period_tau();
    let taus = linspace(0.0, 2.0 * PI, points);

    let p_closed: Vec<f64> = taus.iter().map(|&t| closed(t)).collect();
    let p_cg: Vec<f64> = taus.iter().map(|&t| p1_via_cg(n, t)).collect::<nanospin::Result<_>>()?;
    let p_oracle = oracle_p1_tau(n, &taus)?;
    let shifted: Vec<f64> = taus.iter().map(|&t| closed(t + period)).collect();
    let cons = trace(&ClusterSpec::dimensionless(n)?, &TimeGrid::Tau(taus.clone()))?.conservation_error();

    let mut checks = vec![
        Check { n, name: "closed form vs oracle", deviation: max_gap(&p_closed, &p_oracle) },
        Check { n, name: "closed form vs angular-momentum sum", deviation: max_gap(&p_closed, &p_cg) },
        Check { n, name: "angular-momentum sum vs oracle", deviation: max_gap(&p_cg, &p_oracle) },
        Check { n, name: "initial polarization", deviation: (closed(0.0) - 1.0).abs() },
        Check { n, name: "periodicity", deviation: max_gap(&p_closed, &shifted) },
        Check { n, name: "time average", deviation: (exact.time_average() - stationary_via_cg(n)?).abs() },
        Check { n, name: "conservation", deviation: cons },
    ];
    if n <= INVARIANCE_MAX_SPINS {
        let times: Vec<f64> = linspace(0.0, 2.0 * period, 16);
        let report = invariance_check(n, 1.0, &times, &INVARIANCE_PARAMETERS)?;
        checks.push(Check { n, name: "Zeeman and anisotropy invariance", deviation: report.model_gap });
        checks.push(Check { n, name: "spin equivalence", deviation: report.equivalence });
    }
    Ok(checks)
}

impl Subcommand for Opts {
    const NAME: &'static str = "validate";

    fn run(&self, ctx: &mut Context) -> Result<ExitCode> {
        let max_n = ctx.params.value("max-n", self.max_n, 10)?;
        let tolerance = ctx.params.value("tolerance", self.tolerance, 1e-10)?;
        let points = ctx.params.value("points", self.points, 200)?;
        let fault = ctx.params.value("inject-fault", self.inject_fault, 0.0)?;
        let mut out = ctx.output()?;

        if !(2..=MAX_ORACLE_SPINS).contains(&max_n) {
            bail!("max-n must lie in 2..={MAX_ORACLE_SPINS}, got {max_n}");
        }
        if points < 2 {
            bail!("need at least 2 grid points, got {points}");
        }
        if fault != 0.0 {
            out.note(format!("fault injected into the closed form: delta = {fault:e}"));
        }
        let started = Instant::now();
        let mut checks = Vec::new();
        for n in 2..=max_n {
            checks.extend(checks_for(n, points, fault)?);
        }
        let mut failures = 0;
        for c in &checks {
            let ok = c.deviation < tolerance;
            failures += usize::from(!ok);
            println!("{} N={:<2} {}: {:.3e}", if ok { "PASS" } else { "FAIL" }, c.n, c.name, c.deviation);
        }
        let worst = checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
        println!("{} of {} checks passed, max deviation {worst:.3e}", checks.len() - failures, checks.len());
        eprintln!("validation took {:.1} s", started.elapsed().as_secs_f64());

        let report: Vec<_> = checks
            .iter()
            .map(|c| json!({ "n": c.n, "check": c.name, "deviation": c.deviation, "pass": c.deviation < tolerance }))
            .collect();
        out.write_json(
            "validate.json",
            json!({ "passed": failures == 0, "max_deviation": worst, "checks": report }),
        )?;
        Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use hlab::calculus::MultiplierFunction;
use hlab::norms::{
    bump_eta, dyadic_t_grid, eta, hormander_norm, nq_norm, sobolev_norm, GridFunction,
};
use hlab::runner::{builtin_scenarios, find_scenario, run_and_write, ScenarioConfig};
use hlab::space::build_torus;
use hlab::weights::{ap_constant, power_weight, rh_constant};

#[derive(Parser)]
#[command(
    name = "hlab",
    version,
    about = "Weighted spectral multiplier laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write CSV + JSON reports.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List builtin scenarios.
    Scenarios {
        /// Print the full description and default config, optionally for one scenario.
        #[arg(long, num_args = 0..=1, default_missing_value = "")]
        describe: Option<String>,
    },
    /// Multiplier norms.
    Norms {
        #[command(subcommand)]
        command: NormsCommand,
    },
    /// Power-weight constants on a torus.
    Weights {
        #[command(subcommand)]
        command: WeightsCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Sobolev,
    Hormander,
    Nq,
}

#[derive(Subcommand)]
enum NormsCommand {
    /// Evaluate a norm of a multiplier preset.
    Eval {
        #[arg(long, value_enum)]
        which: Which,
        /// Preset such as `riesz_mean:1`, `heat:2`, `bump_dilate:4`.
        #[arg(long, default_value = "riesz_mean:2")]
        multiplier: String,
        #[arg(long, default_value_t = 1.5)]
        s: f64,
        /// Exponent; `inf` for the sup norm.
        #[arg(long, default_value = "inf")]
        q: f64,
        /// `N` of the ‖·‖_{N,q} norm.
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0.25)]
        t_lo: f64,
        #[arg(long, default_value_t = 4.0)]
        t_hi: f64,
    },
}

#[derive(Subcommand)]
enum WeightsCommand {
    /// A_p and RH_q constants of `max(|x|, 1/2)^β` on a torus.
    Check {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
}

fn exponent(v: f64) -> serde_json::Value {
    if v.is_infinite() {
        json!("inf")
    } else {
        json!(v)
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("HLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> hlab::Result<bool> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let (rep, csv, json) = run_and_write(&cfg, out.as_deref())?;
            for c in &rep.checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                println!(
                    "{tag} {} value={:.6e} threshold={:.6e}",
                    c.name, c.value, c.threshold
                );
            }
            let failed_rows = rep.rows.iter().filter(|r| !r.pass).count();
            println!("rows: {} ({failed_rows} failing)", rep.rows.len());
            println!("wrote {} and {}", csv.display(), json.display());
            println!("{}", if rep.pass { "PASS" } else { "FAIL" });
            Ok(rep.pass)
        }
        Command::Scenarios { describe } => {
            match describe.as_deref() {
                None => {
                    for s in builtin_scenarios() {
                        println!("{:<18} {}", s.name, s.summary);
                    }
                }
                Some("") => {
                    for s in builtin_scenarios() {
                        println!("{}\n  {}\n\n{}\n", s.name, s.details, s.default_config);
                    }
                }
                Some(name) => {
                    let s = find_scenario(name)?;
                    println!(
                        "{}: {}\n\n{}\n\ndefault config:\n\n{}",
                        s.name, s.summary, s.details, s.default_config
                    );
                }
            }
            Ok(true)
        }
        Command::Norms {
            command:
                NormsCommand::Eval {
                    which,
                    multiplier,
                    s,
                    q,
                    n,
                    t_lo,
                    t_hi,
                },
        } => {
            let f = MultiplierFunction::from_preset(&multiplier)?;
            let out = match which {
                Which::Sobolev => {
                    let g = GridFunction::sample(0.0, 2.0, hlab::norms::DEFAULT_GRID_POINTS, |x| {
                        f.eval(x) * eta(x)
                    });
                    json!({"norm": "sobolev", "multiplier": multiplier, "s": s, "q": exponent(q),
                           "value": sobolev_norm(&g, s, q)?, "eta_value": sobolev_norm(&bump_eta(), s, q)?})
                }
                Which::Hormander => {
                    let grid = dyadic_t_grid(t_lo, t_hi, hlab::norms::DEFAULT_POINTS_PER_OCTAVE)?;
                    let h = hormander_norm(&f, s, q, &grid)?;
                    json!({"norm": "hormander", "multiplier": multiplier, "s": s, "q": exponent(q),
                           "value": h.value, "argmax_t": h.argmax_t, "t_grid": grid})
                }
                Which::Nq => {
                    let on_spectrum = |x: f64| {
                        if x >= 0.0 {
                            f.eval(x)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    };
                    let v = nq_norm(on_spectrum, n, q, hlab::norms::DEFAULT_POINTS_PER_CELL)?;
                    json!({"norm": "nq", "multiplier": multiplier, "N": n, "q": exponent(q), "value": v})
                }
            };
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(true)
        }
        Command::Weights {
            command:
                WeightsCommand::Check {
                    p,
                    q,
                    beta,
                    size,
                    dim,
                },
        } => {
            let space = build_torus(size, dim)?;
            let w = power_weight(&space, beta)?;
            let n = dim as f64;
            let ap = ap_constant(&space, &w, p)?;
            let rh = rh_constant(&space, &w, q)?;
            let out = json!({
                "space": format!("Z_{size}^{dim}"), "p": p, "q": exponent(q), "beta": beta,
                "ap_constant": ap, "rh_constant": rh,
                "ap_range": [-n, n * (p - 1.0)], "in_ap_range": -n < beta && beta < n * (p - 1.0),
                "in_rh_range": beta * q > -n,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(true)
        }
    }
}

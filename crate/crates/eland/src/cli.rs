//! Command-line front end: argument parsing, experiment orchestration,
//! and CSV/JSON emission.
//!
//! Exit codes: 0 success, 1 a requested invariant check failed,
//! 2 usage/configuration error, 3 numeric failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::domain2d::{
    self, flux_at, layer_experiment, multiwell_ordered, plateau_level_ok, saddle_demo,
    solve_minimizer_2d, verify_main_theorem, Domain2D, DomainSpec, GridField2D, Shape,
};
use crate::error::{Error, Result};
use crate::potentials::Potential;
use crate::profile1d::{compute_dprime, compute_profile};
use crate::radial::{
    center_bound_scan, critical_radius, default_profile, diagnostics, solve_radial_minimizer,
    sweep_radius, RadialProblem,
};
use crate::spectrum::{eigenfunction_profile_gap, principal_eigenpair, zeta_identity_residual};
use crate::suite;

#[derive(Parser, Debug)]
#[command(name = "eland", version, about = "Semilinear elliptic Dirichlet problems: profiles, radial minimizers, spectra, 2-D solves")]
struct Cli {
    /// Directory for CSV/JSON artifacts (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct PotentialArg {
    /// Potential as a JSON file path or an inline JSON object.
    #[arg(long)]
    potential: String,
}

impl PotentialArg {
    fn load(&self) -> Result<Potential> {
        let text = if self.potential.trim_start().starts_with('{') {
            self.potential.clone()
        } else {
            std::fs::read_to_string(&self.potential)?
        };
        Potential::from_json(&text)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Connecting profile, layer constant, and decay fit.
    Profile {
        #[command(flatten)]
        potential: PotentialArg,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Sample count for the profile table.
        #[arg(long, default_value_t = 2048)]
        points: usize,
        /// Decay-fit window "s_lo,s_hi".
        #[arg(long)]
        window: Option<String>,
    },
    /// One radial minimizer with diagnostics.
    Radial {
        #[command(flatten)]
        potential: PotentialArg,
        #[arg(long)]
        n: u32,
        #[arg(long, visible_alias = "radius")]
        r: f64,
        #[arg(long)]
        h: Option<f64>,
        /// Boundary value on the sphere.
        #[arg(long, default_value_t = 0.0)]
        bv: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Radial minimizers over a list of radii.
    Sweep {
        #[command(flatten)]
        potential: PotentialArg,
        #[arg(long)]
        n: u32,
        /// Comma-separated radii.
        #[arg(long, visible_alias = "radius-list")]
        r_list: String,
        #[arg(long, default_value_t = 0.0)]
        bv: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Also fit the center quantity -W'(u(0)) against R.
        #[arg(long, default_value_t = false)]
        center_scan: bool,
    },
    /// Principal eigenpair of the linearization over a list of radii.
    Spectrum {
        #[command(flatten)]
        potential: PotentialArg,
        #[arg(long)]
        n: u32,
        #[arg(long, visible_alias = "radius-list")]
        r_list: String,
        #[arg(long, default_value_t = 0.0)]
        bv: f64,
        /// Emit one (r, phi) CSV per radius.
        #[arg(long, default_value_t = false)]
        phi_csv: bool,
    },
    /// Bisection for the triviality threshold radius.
    CriticalRadius {
        #[command(flatten)]
        potential: PotentialArg,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0.5)]
        lo: f64,
        #[arg(long, default_value_t = 5.0)]
        hi: f64,
    },
    /// Dirichlet solve on a 2-D domain with plateau verification.
    Solve2d {
        #[command(flatten)]
        potential: PotentialArg,
        /// Domain as a JSON file path or an inline JSON object.
        #[arg(long)]
        domain: String,
        /// minimizer | monotone | both
        #[arg(long, default_value = "minimizer")]
        method: String,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Plateau margin; must exceed the layer constant.
        #[arg(long, default_value_t = 2.6)]
        d: f64,
    },
    /// Boundary-layer width against the scaling parameter.
    Layer {
        #[command(flatten)]
        potential: PotentialArg,
        #[arg(long)]
        domain: Option<String>,
        /// Comma-separated scaling parameters.
        #[arg(long)]
        lambda_list: String,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Ordered solutions, one per well of a multi-well potential.
    Multiwell {
        #[command(flatten)]
        potential: PotentialArg,
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Quadrant solution vanishing on the axes, with its axis flux.
    Saddle {
        #[command(flatten)]
        potential: PotentialArg,
        /// Side length of the quadrant square.
        #[arg(long, default_value_t = 30.0)]
        l: f64,
    },
    /// Run the acceptance suite and report one line per criterion.
    Verify {
        #[arg(long, default_value = "primary")]
        suite: String,
    },
}

/// Validated run parameters, assembled from the parsed arguments before
/// any solve starts.
#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub potential: Option<serde_json::Value>,
    pub n: Option<u32>,
    pub radii: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub eps: Option<f64>,
    pub d: Option<f64>,
    pub h: Option<f64>,
    pub out_dir: PathBuf,
    pub threads: usize,
}

/// Entry point for the binary; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version itself.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let threads = match init_threads() {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    match run(cli, threads) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> i32 {
    let payload = json!({
        "error": {
            "kind": kind_name(e),
            "message": e.to_string(),
            "exit_code": e.exit_code(),
        }
    });
    eprintln!("{}", serde_json::to_string(&payload).unwrap_or_else(|_| e.to_string()));
    e.exit_code()
}

fn kind_name(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::Assumption(_) => "assumption",
        Error::Numeric(_) => "numeric",
        Error::InsufficientData(_) => "insufficient_data",
        Error::Config(_) => "config",
        Error::DiagnosticUndefined(_) => "diagnostic_undefined",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

/// Honor ELAND_THREADS as a cap on the worker pool.
fn init_threads() -> Result<usize> {
    if let Ok(raw) = std::env::var("ELAND_THREADS") {
        let n: usize = raw
            .parse()
            .map_err(|_| Error::Config(format!("ELAND_THREADS must be a positive integer, got `{raw}`")))?;
        if n == 0 {
            return Err(Error::Config("ELAND_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(n)
    } else {
        Ok(rayon::current_num_threads())
    }
}

fn parse_list(raw: &str, what: &str) -> Result<Vec<f64>> {
    let vals: std::result::Result<Vec<f64>, _> =
        raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|_| Error::Config(format!("{what}: expected comma-separated numbers, got `{raw}`")))?;
    if vals.is_empty() {
        return Err(Error::Config(format!("{what}: empty list")));
    }
    Ok(vals)
}

fn load_domain(raw: &str) -> Result<(Domain2D, DomainSpec)> {
    let text = if raw.trim_start().starts_with('{') {
        raw.to_string()
    } else {
        std::fs::read_to_string(raw)?
    };
    let spec: DomainSpec =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("domain JSON: {e}")))?;
    let shape = spec.to_shape()?;
    Ok((Domain2D::build(shape, spec.h)?, spec))
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    Ok(path)
}

/// Pretty JSON with keys sorted at every level (serde_json maps are
/// ordered), trailing newline included.
fn json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

/// A number together with the bound it was checked against.
fn checked(value: f64, target: f64, tolerance: f64) -> serde_json::Value {
    json!({
        "value": value,
        "target": target,
        "tolerance": tolerance,
        "pass": (value - target).abs() <= tolerance,
    })
}

fn field_csv(field: &GridField2D) -> String {
    let dom = &field.domain;
    let mut out = String::from("x,y,u\n");
    for (p, &b) in dom.inside.iter().enumerate() {
        if b {
            let (x, y) = dom.node_xy(p);
            let _ = writeln!(out, "{x},{y},{}", field.values[p]);
        }
    }
    out
}

/// Dispatch; Ok(true) = success, Ok(false) = an invariant check failed.
fn run(cli: Cli, threads: usize) -> Result<bool> {
    let out = cli.out.clone();
    match cli.command {
        Command::Profile { potential, eps, points, window } => {
            let pot = potential.load()?;
            let config = RunConfig {
                command: "profile".into(),
                potential: Some(serde_json::to_value(pot.to_spec())?),
                n: None,
                radii: vec![],
                lambdas: vec![],
                eps: Some(eps),
                d: None,
                h: None,
                out_dir: out.clone(),
                threads,
            };
            if !(eps > 0.0 && eps < pot.mu()) {
                return Err(Error::Config("eps must lie in (0, mu)".into()));
            }
            let points = points.max(16);
            let profile = compute_profile(&pot, pot.mu() - 1e-9, points)?;
            let fi_tol = 8.0 / (points as f64).powi(2);
            let dprime = compute_dprime(&pot, eps)?;
            let mu = pot.mu();
            let rows = profile.s.iter().zip(&profile.u).map(|(&s, &u)| {
                let slope = profile.eval_slope(s);
                format!("{s},{u},{slope},{}", mu - u)
            });
            write_file(&out, "profile.csv", &csv("s,U,Uprime,mu_minus_U", rows))?;
            let decay = match window {
                Some(w) => {
                    let ends = parse_list(&w, "--window")?;
                    if ends.len() != 2 {
                        return Err(Error::Config("--window takes exactly two numbers".into()));
                    }
                    Some(profile.fit_decay((ends[0], ends[1]))?)
                }
                None => None,
            };
            let report = json!({
                "config": config,
                "d_prime": { "eps": eps, "value": dprime },
                "slope_at_zero": profile.slope0,
                // Quadrature error of the first-integral check is
                // second order in the grid spacing.
                "first_integral_residual": {
                    "value": profile.first_integral_residual,
                    "tolerance": fi_tol,
                    "pass": profile.first_integral_residual <= fi_tol,
                },
                "decay_fit": decay,
            });
            write_file(&out, "profile.json", &json_pretty(&report)?)?;
            Ok(true)
        }

        Command::Radial { potential, n, r, h, bv, eps } => {
            let pot = potential.load()?;
            let problem = match h {
                Some(h) => RadialProblem::with_mesh(pot, n, r, bv, h)?,
                None => RadialProblem::new(pot, n, r, bv)?,
            };
            let sol = solve_radial_minimizer(&problem)?;
            let rows = sol.u.iter().zip(&sol.uprime).enumerate().map(|(k, (&u, &du))| {
                format!("{},{u},{du}", k as f64 * problem.h)
            });
            write_file(&out, "radial.csv", &csv("r,u,uprime", rows))?;
            let diag = if sol.trivial { None } else { Some(diagnostics(&sol, eps)?) };
            let report = json!({
                "n": n,
                "radius": problem.radius,
                "h": problem.h,
                "boundary_value": problem.boundary_value,
                "flux": sol.flux,
                "energy": sol.energy,
                "residual": { "value": sol.residual, "tolerance": 1e-10 },
                "trivial": sol.trivial,
                "diagnostics": diag,
            });
            write_file(&out, "radial.json", &json_pretty(&report)?)?;
            Ok(!sol.trivial)
        }

        Command::Sweep { potential, n, r_list, bv, eps, center_scan } => {
            let pot = potential.load()?;
            let radii = parse_list(&r_list, "--r-list")?;
            let table = sweep_radius(&pot, n, bv, &radii, eps)?;
            let rows = table.rows.iter().map(|row| {
                format!(
                    "{},{},{},{},{},{},{},{}",
                    row.radius,
                    row.flux,
                    row.u_center,
                    row.plateau_width,
                    row.energy_ratio,
                    row.decay_rate,
                    row.profile_gap,
                    row.status
                )
            });
            write_file(
                &out,
                "sweep.csv",
                &csv("R,flux,u0,plateau_width,energy_ratio,decay_rate,profile_gap,status", rows),
            )?;
            if center_scan {
                let scan = center_bound_scan(&table, &pot)?;
                write_file(&out, "center_scan.json", &json_pretty(&scan)?)?;
            }
            Ok(table.rows.iter().all(|r| r.status == "ok" || r.status == "trivial"))
        }

        Command::Spectrum { potential, n, r_list, bv, phi_csv } => {
            let pot = potential.load()?;
            let radii = parse_list(&r_list, "--r-list")?;
            let profile = default_profile(&pot)?;
            let wpp_bound = {
                let mut sup: f64 = 0.0;
                for k in 0..=400 {
                    let t = pot.mu() * k as f64 / 400.0;
                    sup = sup.max(pot.wpp(t).abs());
                }
                sup
            };
            let mut entries = Vec::new();
            let mut all_stable = true;
            for &r in &radii {
                let problem = RadialProblem::new(pot.clone(), n, r, bv)?;
                let sol = solve_radial_minimizer(&problem)?;
                let eig = principal_eigenpair(&sol)?;
                let zeta = zeta_identity_residual(&sol)?;
                let gap = eigenfunction_profile_gap(&eig, &sol, &profile, 5.0);
                all_stable &= eig.mu_r > 0.0;
                entries.push(json!({
                    "R": r,
                    "mu_R": eig.mu_r,
                    "mu_R_lower_bound": checked(eig.mu_r, 0.0, wpp_bound + 1e-6),
                    "residual_zeta": { "value": zeta, "tolerance": 1e-6, "pass": zeta <= 1e-6 },
                    "phi_profile_gap": gap,
                }));
                if phi_csv {
                    let rows = eig.phi.iter().enumerate().map(|(k, &phi)| {
                        format!("{},{phi}", k as f64 * problem.h)
                    });
                    write_file(&out, &format!("phi_R{r}.csv"), &csv("r,phi", rows))?;
                }
            }
            write_file(&out, "spectrum.json", &json_pretty(&entries)?)?;
            Ok(all_stable)
        }

        Command::CriticalRadius { potential, n, lo, hi } => {
            let pot = potential.load()?;
            let rc = critical_radius(&pot, n, lo, hi)?;
            let report = json!({
                "n": n,
                "numeric": rc.numeric,
                "analytic": rc.analytic,
                "bracket_tolerance": 1e-3,
                "agreement": rc.analytic.map(|a| checked(rc.numeric, a, 0.01)),
            });
            write_file(&out, "critical_radius.json", &json_pretty(&report)?)?;
            Ok(rc.analytic.map_or(true, |a| (rc.numeric - a).abs() <= 0.01))
        }

        Command::Solve2d { potential, domain, method, eps, d } => {
            let pot = potential.load()?;
            let (dom, _) = load_domain(&domain)?;
            let mut ok = true;
            let mut report = serde_json::Map::new();

            let minimizer = if method == "minimizer" || method == "both" {
                Some(solve_minimizer_2d(&dom, &pot)?)
            } else {
                None
            };
            let monotone = if method == "monotone" || method == "both" {
                Some(domain2d::solve_monotone_from_ball(&dom, &pot)?.0)
            } else if minimizer.is_none() {
                return Err(Error::Config(format!(
                    "--method must be minimizer, monotone or both, got `{method}`"
                )));
            } else {
                None
            };

            let primary = minimizer.as_ref().or(monotone.as_ref()).unwrap();
            write_file(&out, "field.csv", &field_csv(primary))?;
            if !primary.trivial {
                let verification = verify_main_theorem(primary, &pot, eps, d)?;
                ok &= verification.plateau_holds;
                report.insert("verification".into(), serde_json::to_value(&verification)?);
            }
            report.insert("trivial".into(), json!(primary.trivial));

            if let (Some(a), Some(b)) = (&minimizer, &monotone) {
                let gap = sup_gap(a, b);
                report.insert("method_gap".into(), checked(gap, 0.0, 5e-3));
                ok &= gap <= 5e-3;
            }
            write_file(&out, "solve2d.json", &json_pretty(&report)?)?;
            Ok(ok)
        }

        Command::Layer { potential, domain, lambda_list, eps } => {
            let pot = potential.load()?;
            let lambdas = parse_list(&lambda_list, "--lambda-list")?;
            let shape = match domain {
                Some(raw) => {
                    let text = if raw.trim_start().starts_with('{') {
                        raw
                    } else {
                        std::fs::read_to_string(&raw)?
                    };
                    let spec: DomainSpec = serde_json::from_str(&text)
                        .map_err(|e| Error::Config(format!("domain JSON: {e}")))?;
                    spec.to_shape()?
                }
                None => Shape::Disk(domain2d::DiskSpec { cx: 0.0, cy: 0.0, r: 1.0 }),
            };
            let table = layer_experiment(&shape, &pot, &lambdas, eps)?;
            let rows = table.iter().map(|r| {
                format!(
                    "{},{},{},{}",
                    r.lambda, r.width, r.width_times_lambda, r.width_1d_times_lambda
                )
            });
            write_file(
                &out,
                "layer.csv",
                &csv("lambda,width,width_times_lambda,width_1d_times_lambda", rows),
            )?;
            Ok(true)
        }

        Command::Multiwell { potential, domain, eps } => {
            let pot = potential.load()?;
            let (dom, _) = load_domain(&domain)?;
            let outcome = multiwell_ordered(&dom, &pot, eps)?;
            for (i, sol) in outcome.solutions.iter().enumerate() {
                write_file(&out, &format!("solution_{}.csv", i + 1), &field_csv(sol))?;
            }
            let depth = 0.5 * dom.max_dist();
            let plateaus = plateau_level_ok(&outcome, &dom, &pot, eps, depth);
            let report = json!({
                "wells": pot.wells(),
                "solutions": outcome.solutions.len(),
                "interior_gaps": outcome.interior_gaps,
                "failure_index": outcome.failure_index,
                "plateau_depth": depth,
                "plateau_ok": plateaus,
            });
            write_file(&out, "multiwell.json", &json_pretty(&report)?)?;
            Ok(outcome.failure_index.is_none() && plateaus.iter().all(|&p| p))
        }

        Command::Saddle { potential, l } => {
            let pot = potential.load()?;
            let (field, flux_profile) = saddle_demo(l, &pot)?;
            write_file(&out, "field.csv", &field_csv(&field))?;
            let rows = flux_profile.iter().map(|s| format!("{},{}", s.y, s.flux));
            write_file(&out, "saddle_flux.csv", &csv("y,flux", rows))?;
            let target = (2.0 * pot.w(0.0)).sqrt();
            let probe = flux_at(&flux_profile, l - 5.0);
            let report = json!({
                "l": l,
                "flux_target": target,
                "flux_away_from_corner": probe.map(|f| checked(f, target, 0.05 * target)),
                "all_flux_positive": flux_profile.iter().all(|s| s.flux > 0.0),
            });
            write_file(&out, "saddle.json", &json_pretty(&report)?)?;
            Ok(probe.map_or(false, |f| (f - target).abs() <= 0.05 * target))
        }

        Command::Verify { suite: which } => {
            if which != "primary" {
                return Err(Error::Config(format!("unknown suite `{which}`")));
            }
            let results = suite::primary_suite();
            let mut all = true;
            for c in &results {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                println!("{verdict} {}: {}", c.name, c.detail);
                all &= c.passed;
            }
            write_file(&out, "verify.json", &json_pretty(&results)?)?;
            Ok(all)
        }
    }
}

fn sup_gap(a: &GridField2D, b: &GridField2D) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .zip(&a.domain.inside)
        .filter(|(_, &ins)| ins)
        .map(|((&x, &y), _)| (x - y).abs())
        .fold(0.0f64, f64::max)
}

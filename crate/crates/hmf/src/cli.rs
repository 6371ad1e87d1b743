//! The `hmf` command line.
//!
//! Exit codes: 0 success, 2 caller-side errors (bad config, no nontrivial
//! steady state, ambiguous root), 1 internal faults and failed gates. Errors
//! go to stderr as one human-readable line followed by one JSON object.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::action::{alpha1, alpha1_prime, PendulumPotential};
use crate::config::{default_v_max, ExperimentConfig};
use crate::criterion::{stability_verdict, CriterionResult};
use crate::error::{HmfError, Result};
use crate::rearrange::GriddedDistribution;
use crate::reduced_energy::{inequality_suite, j_second, k0_bound, perturbation_battery, scan, ReducedRow};
use crate::steady_state::{solve_m0, SteadyState};
use crate::vlasov_sim::{run_stability_experiment, write_csv, CSV_HEADER};

/// |J″(m₀) − (1 − κ₀)| above this fails `report`.
pub const REPORT_GATE: f64 = 1e-3;

/// Slack floor for `inequalities`, in units of the grid tolerance.
pub const SLACK_FACTOR: f64 = 10.0;

const DYNAMICS_NOTE: &str = "the stability inequality has non-constructive constants; the simulator \
reports the L1 distance to the orbit of f0 and the right-hand-side terms with every constant set to 1, \
and checks boundedness, not the inequality itself";

const CONFIG_HELP: &str = "\
Config file (TOML); every table rejects unknown keys. Defaults shown.

  schema = 1                        # required
  out = \"DIR\"                       # optional; --out wins
  [profile]                         # required
  family = \"maxwell_boltzmann\"      # A, beta
         | \"polytrope_compact\"      # A, q > 1, e_star
         | \"polytrope_noncompact\"   # A, 1/3 < q < 1, e0 > 0
         | \"lynden_bell\"            # A, B, beta
  [solver]      bracket = [1e-6, 10.0], scan_points = 64, theta_offset = 0.0
  [criterion]   margin = 0.0, tolerance = 1e-6, separatrix_band = 0.01
  [sim]         n_theta = 256, n_v = 257, v_max = 1.25 * v_cutoff, dt = 0.05, t_end = 100.0,
                diag_every = 20, perturbation = { kind = \"bump\", amplitude = 0.01, theta = 0.0, v = 0.0, width = 0.3 }
                (kinds: none, bump, theta_shift{shift}, velocity_shift{v0}, scale{epsilon})
  [inequalities] n_theta = 128, n_v = 129, v_max = 1.25 * v_cutoff

Exit codes: 0 success, 2 bad input or no steady state (homogeneous only, ambiguous root),
1 internal fault including a failed report gate. Errors also print a JSON object on stderr.";

#[derive(Debug, Parser)]
#[command(name = "hmf", version, about = "Steady states of the HMF model and their nonlinear stability", after_help = CONFIG_HELP)]
pub struct Cli {
    /// Experiment config (TOML, schema = 1). Required by every subcommand except action-table.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for artifacts; overrides `out` in the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results are reproducible for a fixed count.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Parameter sweep KEY=LO:HI:N for `criterion` (KEY a profile parameter) or `reduced` (KEY = m).
    #[arg(long, global = true, value_name = "KEY=LO:HI:N")]
    pub scan: Option<ScanSpec>,
    /// Format for tabular output on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for m0; prints {m0, mass, H0, residual}. With --out, also writes rho0.csv and f0.csv.
    SteadyState,
    /// kappa0 by quadrature and by elliptic integrals, and the verdict kappa0 < 1.
    Criterion,
    /// The reduced energy at m0, or (m, J, J', J'') over --scan m=LO:HI:N.
    Reduced,
    /// Slack of the reduction and quantitative inequalities on the perturbation battery.
    Inequalities,
    /// Perturbed run of the Vlasov-HMF equation with conservation diagnostics.
    Simulate,
    /// m0, kappa0, J''(m0), K0 and the verdict; fails if |J''(m0) - (1 - kappa0)| > 1e-3.
    Report,
    /// Table of e, alpha1, alpha1_prime, b, b_prime at magnetization m.
    ActionTable {
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        /// Energies LO:HI:N (inclusive).
        #[arg(long, default_value = "-0.99:3:200", allow_hyphen_values = true)]
        range: Range,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Range {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n).map(|k| self.lo + (self.hi - self.lo) * k as f64 / (self.n - 1) as f64).collect()
    }
}

impl FromStr for Range {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected LO:HI:N, got `{s}`"));
        }
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|e| format!("`{}`: {e}", parts[2]))?;
        if n == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(format!("need finite bounds and N >= 1, got `{s}`"));
        }
        Ok(Range { lo, hi, n })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub key: String,
    pub range: Range,
}

impl FromStr for ScanSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (key, rest) = s.split_once('=').ok_or_else(|| format!("expected KEY=LO:HI:N, got `{s}`"))?;
        Ok(ScanSpec { key: key.trim().to_string(), range: rest.parse()? })
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let _ = write!(stderr, "{}", e.render());
            let _ = writeln!(stderr, "{}", error_json("usage", &e.kind().to_string(), 2));
            return 2;
        }
    };
    // buffered so the work can run inside a pool; flushed even on failure
    let mut buf: Vec<u8> = Vec::new();
    let result = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| HmfError::Config(format!("cannot start {n} threads: {e}")))
            .and_then(|pool| pool.install(|| dispatch(&cli, &mut buf))),
        None => dispatch(&cli, &mut buf),
    };
    let result = result.and_then(|()| Ok(stdout.write_all(&buf)?)).inspect_err(|_| {
        let _ = stdout.write_all(&buf);
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let code = if e.is_user_error() { 2 } else { 1 };
            let _ = writeln!(stderr, "error: {e}");
            let _ = writeln!(stderr, "{}", error_json(e.kind(), &e.to_string(), code));
            code
        }
    }
}

fn error_json(kind: &str, message: &str, code: i32) -> Value {
    json!({ "error": { "kind": kind, "message": message, "exit_code": code } })
}

fn dispatch(cli: &Cli, stdout: &mut Vec<u8>) -> Result<()> {
    if let Command::ActionTable { m, range } = &cli.command {
        reject_scan(cli, "action-table")?;
        if let Some(dir) = &cli.out {
            fs::create_dir_all(dir)?;
        }
        return action_table(*m, range, cli.format, cli.out.as_deref(), stdout);
    }
    let path = cli.config.as_ref().ok_or_else(|| HmfError::Config("--config PATH is required".into()))?;
    let cfg = ExperimentConfig::from_path(path)?;
    let out = cli.out.clone().or_else(|| cfg.out.clone());
    if let Some(dir) = &out {
        fs::create_dir_all(dir)?;
    }
    let ctx = Ctx { cfg: &cfg, out: out.as_deref(), format: cli.format };
    match &cli.command {
        Command::Criterion => match &cli.scan {
            Some(s) => criterion_scan(&ctx, s, stdout),
            None => {
                let ss = ctx.steady_state()?;
                let r = stability_verdict(&ss, cfg.criterion.options())?;
                ctx.emit_json("criterion.json", &criterion_json(&ss, &r), stdout)
            }
        },
        Command::Reduced => reduced(&ctx, cli.scan.as_ref(), stdout),
        other => {
            let name = match other {
                Command::SteadyState => "steady-state",
                Command::Inequalities => "inequalities",
                Command::Simulate => "simulate",
                _ => "report",
            };
            reject_scan(cli, name)?;
            match other {
                Command::SteadyState => steady_state(&ctx, stdout),
                Command::Inequalities => inequalities(&ctx, stdout),
                Command::Simulate => simulate(&ctx, stdout),
                _ => report(&ctx, stdout),
            }
        }
    }
}

fn reject_scan(cli: &Cli, name: &str) -> Result<()> {
    match cli.scan {
        Some(_) => Err(HmfError::Config(format!("--scan is not supported by {name}"))),
        None => Ok(()),
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    out: Option<&'a Path>,
    format: Format,
}

impl Ctx<'_> {
    fn steady_state(&self) -> Result<SteadyState> {
        let ss = solve_m0(&self.cfg.profile.build()?, self.cfg.solver.options())?;
        Ok(ss.rotated(self.cfg.solver.theta_offset))
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        if let Some(dir) = self.out {
            fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }

    /// Prints `value` and mirrors it to `<out>/<name>`.
    fn emit_json(&self, name: &str, value: &Value, stdout: &mut dyn Write) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| HmfError::Io(e.to_string()))?;
        writeln!(stdout, "{text}")?;
        self.write(name, format!("{text}\n").as_bytes())
    }

    fn emit_table<R: Serialize>(&self, name: &str, header: &str, rows: &[R], line: impl Fn(&R) -> String, stdout: &mut dyn Write) -> Result<()> {
        emit_table(self.format, self.out, name, header, rows, line, stdout)
    }
}

/// Prints a table as CSV or a JSON array and mirrors the CSV to `<out>/<name>`.
fn emit_table<R: Serialize>(
    format: Format,
    out: Option<&Path>,
    name: &str,
    header: &str,
    rows: &[R],
    line: impl Fn(&R) -> String,
    stdout: &mut dyn Write,
) -> Result<()> {
    let mut csv = format!("{header}\n");
    for r in rows {
        csv.push_str(&line(r));
        csv.push('\n');
    }
    match format {
        Format::Csv => write!(stdout, "{csv}")?,
        Format::Json => {
            let text = serde_json::to_string_pretty(rows).map_err(|e| HmfError::Io(e.to_string()))?;
            writeln!(stdout, "{text}")?;
        }
    }
    if let Some(dir) = out {
        fs::write(dir.join(name), csv)?;
    }
    Ok(())
}

fn steady_state_json(ss: &SteadyState) -> Value {
    json!({
        "family": ss.profile().family(),
        "m0": ss.m0(),
        "theta_offset": ss.theta_offset(),
        "mass": ss.mass(),
        "H0": ss.energy_h0(),
        "residual": ss.residual(),
    })
}

fn steady_state(ctx: &Ctx, stdout: &mut dyn Write) -> Result<()> {
    let ss = ctx.steady_state()?;
    if ctx.out.is_some() {
        let sim = &ctx.cfg.sim;
        let v_max = sim.v_max.unwrap_or_else(|| default_v_max(&ss));
        let mut rho = String::from("theta,rho0\n");
        for i in 0..sim.n_theta {
            let th = (i as f64 + 0.5) * std::f64::consts::TAU / sim.n_theta as f64;
            rho.push_str(&format!("{th:e},{:e}\n", ss.rho0(th)));
        }
        ctx.write("rho0.csv", rho.as_bytes())?;
        let g = GriddedDistribution::sample_steady(&ss, sim.n_theta, sim.n_v, v_max)?;
        let mut buf = Vec::new();
        g.write_csv(&mut buf)?;
        ctx.write("f0.csv", &buf)?;
    }
    ctx.emit_json("steady_state.json", &steady_state_json(&ss), stdout)
}

fn criterion_json(ss: &SteadyState, r: &CriterionResult) -> Value {
    let mut v = serde_json::to_value(r).unwrap_or(Value::Null);
    v["m0"] = json!(ss.m0());
    v
}

#[derive(Debug, Serialize)]
struct ScanPoint {
    param: f64,
    m0: Option<f64>,
    kappa0: Option<f64>,
    /// stable | unstable | homogeneous_only | error
    verdict: String,
    message: Option<String>,
}

fn criterion_scan(ctx: &Ctx, s: &ScanSpec, stdout: &mut dyn Write) -> Result<()> {
    let base = ctx.cfg.profile;
    base.with_param(&s.key, s.range.lo)?;
    let rows: Vec<ScanPoint> = s
        .range
        .points()
        .into_par_iter()
        .map(|x| {
            let attempt = || -> Result<(f64, CriterionResult)> {
                let p = base.with_param(&s.key, x)?.build()?;
                let ss = solve_m0(&p, ctx.cfg.solver.options())?;
                Ok((ss.m0(), stability_verdict(&ss, ctx.cfg.criterion.options())?))
            };
            match attempt() {
                Ok((m0, r)) => ScanPoint {
                    param: x,
                    m0: Some(m0),
                    kappa0: Some(r.kappa0_quadrature),
                    verdict: if r.stable { "stable" } else { "unstable" }.into(),
                    message: None,
                },
                Err(e) => ScanPoint {
                    param: x,
                    m0: None,
                    kappa0: None,
                    verdict: if matches!(e, HmfError::HomogeneousOnly(_)) { "homogeneous_only" } else { "error" }.into(),
                    message: Some(e.to_string()),
                },
            }
        })
        .collect();
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:e}"));
    ctx.emit_table(
        "criterion_scan.csv",
        &format!("{},m0,kappa0,verdict", s.key),
        &rows,
        |r| format!("{:e},{},{},{}", r.param, opt(r.m0), opt(r.kappa0), r.verdict),
        stdout,
    )
}

fn reduced(ctx: &Ctx, s: Option<&ScanSpec>, stdout: &mut dyn Write) -> Result<()> {
    let ss = ctx.steady_state()?;
    match s {
        Some(s) => {
            if s.key != "m" {
                return Err(HmfError::Config(format!("reduced scans magnetization only (--scan m=LO:HI:N), got key `{}`", s.key)));
            }
            let rows = scan(&ss, &s.range.points())?;
            ctx.emit_table(
                "reduced_scan.csv",
                "m,J,J_prime,J_second",
                &rows,
                |r: &ReducedRow| format!("{:e},{:e},{:e},{:e}", r.m, r.j, r.j_prime, r.j_second),
                stdout,
            )
        }
        None => {
            let row = &scan(&ss, &[ss.m0()])?[0];
            let k0 = k0_bound(&ss)?;
            ctx.emit_json("reduced.json", &json!({ "m0": ss.m0(), "J": row.j, "J_prime": row.j_prime, "J_second": row.j_second, "K0": k0 }), stdout)
        }
    }
}

fn inequalities(ctx: &Ctx, stdout: &mut dyn Write) -> Result<()> {
    let ss = ctx.steady_state()?;
    let b = &ctx.cfg.inequalities;
    let v_max = b.v_max.unwrap_or_else(|| default_v_max(&ss));
    let k0 = k0_bound(&ss)?;
    let suite = inequality_suite(&ss, &perturbation_battery(), b.n_theta, b.n_v, v_max, k0.value)?;
    let (red, quant, shifted) = suite.passes(SLACK_FACTOR);
    let mut v = serde_json::to_value(&suite).map_err(|e| HmfError::Io(e.to_string()))?;
    v["slack_floor"] = json!(-SLACK_FACTOR * suite.grid_tolerance);
    v["reduction_ok"] = json!(red);
    v["quant_ok"] = json!(quant);
    v["quant_shifted_ok"] = json!(shifted);
    v["v_max"] = json!(v_max);
    ctx.emit_json("inequalities.json", &v, stdout)
}

fn simulate(ctx: &Ctx, stdout: &mut dyn Write) -> Result<()> {
    let ss = ctx.steady_state()?;
    let sim = ctx.cfg.sim.sim_config(&ss)?;
    let ex = run_stability_experiment(&ss, &ctx.cfg.sim.perturbation, &sim)?;
    let summary = json!({
        "steady_state": steady_state_json(&ss),
        "config": sim,
        "perturbation": ctx.cfg.sim.perturbation,
        "summary": ex.summary,
        "note": DYNAMICS_NOTE,
    });
    if let Some(dir) = ctx.out {
        let mut csv = Vec::new();
        write_csv(&ex.diagnostics, &mut csv)?;
        fs::write(dir.join("diagnostics.csv"), csv)?;
        let mut bin = Vec::new();
        ex.final_state.write_binary(&mut bin)?;
        fs::write(dir.join("final_state.bin"), bin)?;
    }
    match ctx.format {
        Format::Csv => {
            let mut csv = Vec::new();
            write_csv(&ex.diagnostics, &mut csv)?;
            debug_assert!(csv.starts_with(CSV_HEADER.as_bytes()));
            stdout.write_all(&csv)?;
            ctx.write("summary.json", serde_json::to_string_pretty(&summary).unwrap_or_default().as_bytes())
        }
        Format::Json => ctx.emit_json("summary.json", &summary, stdout),
    }
}

fn report(ctx: &Ctx, stdout: &mut dyn Write) -> Result<()> {
    let ss = ctx.steady_state()?;
    let crit = stability_verdict(&ss, ctx.cfg.criterion.options())?;
    let j2 = j_second(&ss, ss.m0())?;
    let k0 = k0_bound(&ss)?;
    let residual = (j2 - (1.0 - crit.kappa0_quadrature)).abs();
    let gate = residual <= REPORT_GATE;
    let v = json!({
        "steady_state": steady_state_json(&ss),
        "kappa0": crit.kappa0_quadrature,
        "kappa0_elliptic": crit.kappa0_elliptic,
        "kappa0_verified": crit.verified,
        "J_second_m0": j2,
        "K0": k0.value,
        "verdict": if crit.stable { "stable" } else { "unstable" },
        "consistency_residual": residual,
        "gate": { "tolerance": REPORT_GATE, "passed": gate },
        "warnings": crit.warnings,
        "note": DYNAMICS_NOTE,
    });
    ctx.emit_json("report.json", &v, stdout)?;
    if gate {
        Ok(())
    } else {
        Err(HmfError::Gate(format!("|J''(m0) - (1 - kappa0)| = {residual:e} exceeds {REPORT_GATE:e}")))
    }
}

#[derive(Debug, Serialize)]
struct ActionRow {
    e: f64,
    alpha1: f64,
    alpha1_prime: f64,
    b: f64,
    b_prime: f64,
}

fn action_table(m: f64, range: &Range, format: Format, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let pot = PendulumPotential::new(m, 0.0)?;
    let rows: Vec<ActionRow> = range
        .points()
        .into_iter()
        .map(|e| {
            let x = if m > 0.0 { e / m } else { f64::INFINITY };
            ActionRow { e, alpha1: alpha1(x), alpha1_prime: alpha1_prime(x).value(), b: pot.b(e), b_prime: pot.b_prime(e).value() }
        })
        .collect();
    emit_table(
        format,
        out,
        "action_table.csv",
        "e,alpha1,alpha1_prime,b,b_prime",
        &rows,
        |r| format!("{:e},{:e},{:e},{:e},{:e}", r.e, r.alpha1, r.alpha1_prime, r.b, r.b_prime),
        stdout,
    )
}

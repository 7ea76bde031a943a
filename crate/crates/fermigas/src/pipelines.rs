//! Configuration-driven pipelines behind the `fermigas` CLI.
//!
//! Every pipeline writes a machine-readable JSON report (plus CSV where a
//! sweep is the product). Reports are byte-identical across reruns with
//! the same config and seed: ordering is fixed, no timestamps are embedded
//! (wall-clock metadata goes to a `.meta.json` sidecar), and files are
//! written atomically (temp + rename).

use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::energy_bounds::{self, ConstantsTable};
use crate::error::{FermigasError, Result};
use crate::potential::RadialPotential;
use crate::soft_potential::{self, GridSpec, SoftKitParams, SoftPotentialKit};
use crate::{scattering, two_body, Dimension};

pub const SCHEMA_VERSION: u32 = 1;

/// Execution context shared by all pipelines.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub tolerance: Option<f64>,
    pub threads: Option<usize>,
}

impl Default for RunContext {
    fn default() -> Self {
        RunContext { out_dir: PathBuf::from("."), seed: 42, tolerance: None, threads: None }
    }
}

/// One pipeline invocation; `sweep` runs a list of them from one config.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Scatter {
        potential: PathBuf,
        dim: usize,
        #[serde(default = "default_tol")]
        tol: f64,
        out: PathBuf,
    },
    Fermisea {
        n: usize,
        #[serde(rename = "L")]
        box_side: f64,
        dim: usize,
        #[serde(default)]
        sweep: bool,
        out: PathBuf,
    },
    DeterminantalCheck {
        out: PathBuf,
    },
    Dyson {
        dim: usize,
        potential: PathBuf,
        #[serde(rename = "R")]
        r_cutoff: f64,
        s: f64,
        eps: f64,
        corpus: usize,
        out: PathBuf,
    },
    Bounds {
        dim: usize,
        /// `lo:hi:count`, geometric spacing.
        rho_sweep: String,
        a: f64,
        #[serde(rename = "R0")]
        r0: f64,
        #[serde(default)]
        constants: Option<PathBuf>,
        out: PathBuf,
    },
    Oracle {
        potential: PathBuf,
        #[serde(rename = "L")]
        box_side: f64,
        cutoff: u32,
        out: PathBuf,
    },
    Sweep {
        config: PathBuf,
    },
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Serialize, Deserialize)]
struct SweepConfig {
    #[serde(default)]
    schema_version: u32,
    runs: Vec<Command>,
}

/// A value in a report, tagged with the operation that produced it.
#[derive(Serialize)]
struct NamedValue {
    name: String,
    value: serde_json::Value,
    source: String,
}

#[derive(Serialize)]
struct Report {
    tool: &'static str,
    version: &'static str,
    schema_version: u32,
    seed: u64,
    command: Command,
    outputs: Vec<NamedValue>,
}

impl Report {
    fn new(command: Command, seed: u64) -> Self {
        Report {
            tool: "fermigas",
            version: env!("CARGO_PKG_VERSION"),
            schema_version: SCHEMA_VERSION,
            seed,
            command,
            outputs: Vec::new(),
        }
    }

    fn push<V: Serialize>(&mut self, name: &str, value: V, source: &str) {
        self.outputs.push(NamedValue {
            name: name.into(),
            value: serde_json::to_value(value).expect("serializable value"),
            source: source.into(),
        });
    }
}

/// Atomic write: temp file in the same directory, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn write_report(report: &Report, path: &Path) -> Result<()> {
    let mut body = serde_json::to_string_pretty(report)?;
    body.push('\n');
    atomic_write(path, body.as_bytes())?;
    // wall-clock metadata lives outside the deterministic report
    let meta = format!(
        "{{\n  \"written_at_unix\": {}\n}}\n",
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    );
    let meta_path = path.with_extension("meta.json");
    atomic_write(&meta_path, meta.as_bytes())?;
    Ok(())
}

/// Artifacts of a successful run.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub report_path: PathBuf,
    pub extra_paths: Vec<PathBuf>,
}

/// Execute one command. Infeasible schedules surface as
/// [`FermigasError::InfeasibleSchedule`] (exit code 2 in the CLI).
pub fn run(command: Command, ctx: &RunContext) -> Result<RunArtifacts> {
    if let Some(threads) = ctx.threads {
        // ignore failures: the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match command {
        Command::Scatter { .. } => run_scatter(command, ctx),
        Command::Fermisea { .. } => run_fermisea(command, ctx),
        Command::DeterminantalCheck { .. } => run_determinantal_check(command, ctx),
        Command::Dyson { .. } => run_dyson(command, ctx),
        Command::Bounds { .. } => run_bounds(command, ctx),
        Command::Oracle { .. } => run_oracle(command, ctx),
        Command::Sweep { ref config } => {
            let text = std::fs::read_to_string(config)
                .map_err(|e| FermigasError::Config(format!("cannot read {config:?}: {e}")))?;
            let sweep: SweepConfig = serde_json::from_str(&text)
                .map_err(|e| FermigasError::Config(format!("malformed sweep config: {e}")))?;
            if sweep.runs.is_empty() {
                return Err(FermigasError::Config("sweep config has no runs".into()));
            }
            let mut all = Vec::new();
            let mut first_report = None;
            for cmd in sweep.runs {
                let art = run(cmd, ctx)?;
                if first_report.is_none() {
                    first_report = Some(art.report_path.clone());
                }
                all.push(art.report_path);
                all.extend(art.extra_paths);
            }
            Ok(RunArtifacts { report_path: first_report.unwrap(), extra_paths: all })
        }
    }
}

fn out_path(ctx: &RunContext, requested: &Path) -> PathBuf {
    if requested.is_absolute() {
        requested.to_path_buf()
    } else {
        ctx.out_dir.join(requested)
    }
}

fn run_scatter(command: Command, ctx: &RunContext) -> Result<RunArtifacts> {
    let Command::Scatter { ref potential, dim, tol, ref out } = command else { unreachable!() };
    let dim = Dimension::from_usize(dim)?;
    let tol = ctx.tolerance.unwrap_or(tol);
    let pot = RadialPotential::from_json_file(potential)?;
    let solution = scattering::solve_zero_energy(&pot, dim, tol)?;

    let out = out_path(ctx, out);
    let profile_path = out.with_extension("profile.csv");
    let mut csv = String::from("r,value,derivative,energy_integral\n");
    for s in solution.samples() {
        csv.push_str(&format!("{},{},{},{}\n", s.r, s.value, s.derivative, s.energy_integral));
    }
    atomic_write(&profile_path, csv.as_bytes())?;

    let mut report = Report::new(command.clone(), ctx.seed);
    report.push("a", solution.a, "scattering::solve_zero_energy");
    report.push("residual", solution.residual, "scattering::solve_zero_energy");
    report.push("r_max", solution.r_max, "scattering::solve_zero_energy");
    // report the requested (relative) path so reruns in different output
    // directories stay byte-identical
    report.push(
        "profile_csv_path",
        out.with_extension("profile.csv")
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default(),
        "scattering::solve_zero_energy",
    );
    if !pot.is_zero() {
        let r_probe = 2.0 * pot.range.max(solution.a);
        let integral = scattering::scattering_energy_integral(&solution, r_probe)?;
        report.push(
            "energy_integral_at_2R0",
            integral,
            "scattering::scattering_energy_integral",
        );
        let xi = scattering::xi_profile(&solution, r_probe)?;
        report.push("integral_xi_at_2R0", xi.integral_xi, "scattering::xi_profile");
    }
    write_report(&report, &out)?;
    Ok(RunArtifacts { report_path: out, extra_paths: vec![profile_path] })
}

fn run_fermisea(command: Command, ctx: &RunContext) -> Result<RunArtifacts> {
    let Command::Fermisea { n, box_side, dim, sweep, ref out } = command else { unreachable!() };
    let dim = Dimension::from_usize(dim)?;
    let out = out_path(ctx, out);
    let ns: Vec<usize> = if sweep {
        let mut v = Vec::new();
        let mut k = 1usize;
        while k <= n {
            v.push(k);
            k = (k * 2).max(k + 1);
        }
        if *v.last().unwrap() != n {
            v.push(n);
        }
        v
    } else {
        vec![n]
    };
    let csv_path = out.with_extension("csv");
    let mut csv = String::from("n,dirichlet_sum,leading,ratio\n");
    let mut rows = Vec::new();
    for &nv in &ns {
        let sum = crate::fermi_box::dirichlet_energy_sum(nv, box_side, dim)?;
        let leading = crate::fermi_box::dirichlet_leading(nv, box_side, dim);
        let ratio = sum.energy / leading;
        csv.push_str(&format!("{nv},{},{leading},{ratio}\n", sum.energy));
        rows.push((nv, sum.energy, leading, ratio));
    }
    atomic_write(&csv_path, csv.as_bytes())?;

    let mut report = Report::new(command.clone(), ctx.seed);
    let last = rows.last().unwrap();
    report.push("n", last.0, "fermi_box::dirichlet_energy_sum");
    report.push("dirichlet_sum", last.1, "fermi_box::dirichlet_energy_sum");
    report.push("leading", last.2, "fermi_box::dirichlet_leading");
    report.push("ratio", last.3, "fermi_box::dirichlet_energy_sum");
    report.push(
        "csv_path",
        csv_path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default(),
        "fermi_box::dirichlet_energy_sum",
    );
    if rows.len() >= 4 {
        let xs: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| (r.3 - 1.0).max(1e-300)).collect();
        report.push(
            "finite_size_exponent",
            crate::fit::log_log_slope(&xs, &ys),
            "fermi_box::dirichlet_energy_sum",
        );
    }
    write_report(&report, &out)?;
    Ok(RunArtifacts { report_path: out, extra_paths: vec![csv_path] })
}

fn run_determinantal_check(command: Command, ctx: &RunContext) -> Result<RunArtifacts> {
    use crate::determinantal::{bruteforce, QuadratureSpec, SineBasis, WeightedSlater};
    let Command::DeterminantalCheck { ref out } = command else { unreachable!() };
    let out = out_path(ctx, out);

    let mut checks: Vec<(String, f64, bool)> = Vec::new();
    let push_check = |name: &str, err: f64, tol: f64, checks: &mut Vec<(String, f64, bool)>| {
        checks.push((name.into(), err, err <= tol));
    };

    // 1D, three particles: norm, densities, trace against brute force
    let basis = SineBasis::line(3, 1.0);
    let weight = |x: &[f64; 3]| 1.0 - 0.6 * (-(x[0] - 0.45).powi(2) * 14.0).exp();
    let quad = QuadratureSpec { points_per_axis: 48 };
    let ws = WeightedSlater::new(basis.clone(), weight, quad);
    let brute_norm = bruteforce::norm(&basis, &weight, 48);
    push_check(
        "norm_1d_n3",
        (ws.norm() / brute_norm - 1.0).abs(),
        1e-6,
        &mut checks,
    );
    let pt = [[0.37, 0.0, 0.0]];
    let d1 = ws.k_particle_density(weight, &pt).unwrap() * ws.norm();
    let b1 = bruteforce::k_particle_density(&basis, &weight, &pt, brute_norm, 48) * brute_norm;
    push_check("density1_1d_n3", (d1 / b1 - 1.0).abs(), 1e-6, &mut checks);
    let pts2 = [[0.3, 0.0, 0.0], [0.7, 0.0, 0.0]];
    let d2 = ws.k_particle_density(weight, &pts2).unwrap();
    let b2 = bruteforce::k_particle_density(&basis, &weight, &pts2, brute_norm, 48);
    push_check("density2_1d_n3", (d2 / b2 - 1.0).abs(), 1e-6, &mut checks);
    let ksq = |x: &[f64; 3]| 0.5 + (std::f64::consts::PI * x[0]).sin().powi(2);
    let t = crate::determinantal::weighted_trace(&basis, weight, ksq, quad).unwrap();
    let bt = bruteforce::weighted_trace(&basis, &weight, &ksq, 48);
    push_check("trace_1d_n3", (t / bt - 1.0).abs(), 1e-6, &mut checks);

    // 3D, two particles: norm against the 6D tensor quadrature
    let basis3 = SineBasis::new(Dimension::Three, 2, 1.0)?;
    let w3 = |x: &[f64; 3]| {
        1.0 - 0.5
            * (-((x[0] - 0.5).powi(2) + (x[1] - 0.45).powi(2) + (x[2] - 0.55).powi(2)) * 9.0)
                .exp()
    };
    let ws3 = WeightedSlater::new(basis3.clone(), w3, QuadratureSpec { points_per_axis: 32 });
    let brute3 = bruteforce::norm(&basis3, &w3, 14);
    push_check("norm_3d_n2", (ws3.norm() / brute3 - 1.0).abs(), 1e-5, &mut checks);

    let all_pass = checks.iter().all(|(_, _, p)| *p);
    let mut report = Report::new(command.clone(), ctx.seed);
    for (name, err, pass) in &checks {
        report.push(
            name,
            serde_json::json!({"max_rel_err": err, "pass": pass}),
            "determinantal::bruteforce",
        );
    }
    report.push("all_pass", all_pass, "determinantal::bruteforce");
    write_report(&report, &out)?;
    if !all_pass {
        return Err(FermigasError::InvalidInput(
            "determinantal brute-force suite failed (see report)".into(),
        ));
    }
    Ok(RunArtifacts { report_path: out, extra_paths: vec![] })
}

fn run_dyson(command: Command, ctx: &RunContext) -> Result<RunArtifacts> {
    let Command::Dyson { dim, ref potential, r_cutoff, s, eps, corpus, ref out } = command
    else {
        unreachable!()
    };
    let dim = Dimension::from_usize(dim)?;
    let pot = RadialPotential::from_json_file(potential)?;
    let solution = scattering::solve_zero_energy(&pot, Dimension::Three, 1e-10)?;
    let kit = SoftPotentialKit::build(SoftKitParams::new(
        dim,
        s,
        r_cutoff,
        solution.a,
        pot.range.max(f64::MIN_POSITIVE),
    ))?;
    let taper = 2.5 * s.max(r_cutoff);
    let core = if pot.has_hard_core() { Some(pot.hard_core_radius) } else { None };
    let functions = soft_potential::test_function_corpus(dim, corpus, ctx.seed, taper, core);
    let grid = match dim {
        Dimension::Three => GridSpec { n: 64, dx: taper / 12.0 },
        Dimension::Two => GridSpec { n: 128, dx: taper / 24.0 },
    };
    use rayon::prelude::*;
    let reports: Vec<_> = functions
        .par_iter()
        .map(|tf| {
            soft_potential::dyson_gap(&|x: &[f64; 3]| tf.eval(x), &pot, &kit, eps, grid)
        })
        .collect::<Result<Vec<_>>>()?;
    let min_gap = reports.iter().map(|r| r.gap / r.lhs_scale).fold(f64::INFINITY, f64::min);
    let max_eta = reports.iter().map(|r| r.eta / r.lhs_scale).fold(0.0f64, f64::max);

    let s_values: Vec<f64> = (0..5).map(|i| s * 1.6f64.powi(i)).collect();
    let fits = soft_potential::w_bound_fits(dim, r_cutoff, &s_values)?;
    let lattice = soft_potential::lattice_sum_bound(&kit, 64)?;

    let out = out_path(ctx, out);
    let mut report = Report::new(command.clone(), ctx.seed);
    report.push("min_gap", min_gap, "soft_potential::dyson_gap");
    report.push("eta", max_eta, "soft_potential::dyson_gap");
    report.push(
        "bound_fits",
        serde_json::json!({
            "sup_w": fits.slope_sup,
            "int_w": fits.slope_int,
            "sum_w": lattice.bound_constant,
        }),
        "soft_potential::w_bound_fits",
    );
    report.push("corpus", corpus, "soft_potential::test_function_corpus");
    write_report(&report, &out)?;
    Ok(RunArtifacts { report_path: out, extra_paths: vec![] })
}

fn parse_sweep(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(FermigasError::Config(format!(
            "sweep spec must be lo:hi:count, got {spec}"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| FermigasError::Config(format!("bad sweep lower bound: {}", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| FermigasError::Config(format!("bad sweep upper bound: {}", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| FermigasError::Config(format!("bad sweep count: {}", parts[2])))?;
    if count < 2 || lo <= 0.0 || hi <= lo {
        return Err(FermigasError::Config(format!("empty or invalid sweep range: {spec}")));
    }
    Ok((0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect())
}

fn run_bounds(command: Command, ctx: &RunContext) -> Result<RunArtifacts> {
    let Command::Bounds { dim, ref rho_sweep, a, r0, ref constants, ref out } = command else {
        unreachable!()
    };
    let dim = Dimension::from_usize(dim)?;
    let table = match constants {
        Some(path) => ConstantsTable::from_json_file(path)?,
        None => ConstantsTable::default(),
    };
    let rhos = parse_sweep(rho_sweep)?;
    let out = out_path(ctx, out);

    let mut csv = String::from("rho,leading,upper,lower,upper_error,lower_deficit,feasible\n");
    let mut errors_up = Vec::new();
    let mut errors_low = Vec::new();
    let mut xs = Vec::new();
    for &rho in &rhos {
        let (rho1, rho2) = (0.5 * rho, 0.5 * rho);
        let (leading, upper, lower, x) = match dim {
            Dimension::Three => {
                let up = energy_bounds::upper_bound_schedule(rho1, rho2, a, r0, &table)?;
                let low = energy_bounds::lower_bound_schedule(rho1, rho2, a, r0, &table)?;
                let lead = up.leading_kinetic + up.leading_interaction;
                let x = a * rho.powf(1.0 / 3.0);
                if !(up.feasible && low.feasible) {
                    return Err(FermigasError::InfeasibleSchedule(format!(
                        "bounds infeasible at rho = {rho}"
                    )));
                }
                csv.push_str(&format!(
                    "{rho},{lead},{},{},{},{},{}\n",
                    up.total,
                    low.total,
                    up.epsilon_rho,
                    -low.epsilon_rho,
                    up.feasible && low.feasible
                ));
                (lead, up, low, x)
            }
            Dimension::Two => {
                let x = a * a * rho;
                if x >= 1.0 {
                    return Err(FermigasError::InvalidInput(format!(
                        "2D sweep requires rho a^2 < 1, got {x}"
                    )));
                }
                let big_l = x.ln().abs();
                let up =
                    energy_bounds::upper_bound_schedule_2d_by_log(big_l, 0.5, 0.5, &table)?;
                let low =
                    energy_bounds::lower_bound_schedule_2d_by_log(big_l, 0.5, 0.5, &table)?;
                // by-log reports are at unit density; energies scale by rho^2
                let lead = (up.leading_kinetic + up.leading_interaction) * rho * rho;
                csv.push_str(&format!(
                    "{rho},{lead},{},{},{},{},{}\n",
                    up.total * rho * rho,
                    low.total * rho * rho,
                    up.epsilon_rho,
                    -low.epsilon_rho,
                    up.feasible && low.feasible
                ));
                (lead, up, low, big_l)
            }
        };
        let _ = leading;
        xs.push(x);
        errors_up.push(upper.epsilon_rho.max(1e-300));
        errors_low.push((-lower.epsilon_rho).max(1e-300));
    }
    let up_slope = crate::fit::log_log_slope(&xs, &errors_up);
    let low_slope = crate::fit::log_log_slope(&xs, &errors_low);
    let summary = serde_json::json!({
        "upper_error_exponent": up_slope,
        "lower_deficit_exponent": low_slope,
    });
    csv.push_str(&format!("# summary: {summary}\n"));
    let csv_path = out.with_extension("csv");
    atomic_write(&csv_path, csv.as_bytes())?;

    let mut report = Report::new(command.clone(), ctx.seed);
    report.push("upper_error_exponent", up_slope, "energy_bounds::upper_bound_schedule");
    report.push("lower_deficit_exponent", low_slope, "energy_bounds::lower_bound_schedule");
    report.push(
        "csv_path",
        csv_path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default(),
        "energy_bounds::upper_bound_schedule",
    );
    write_report(&report, &out)?;
    Ok(RunArtifacts { report_path: out, extra_paths: vec![csv_path] })
}

fn run_oracle(command: Command, ctx: &RunContext) -> Result<RunArtifacts> {
    let Command::Oracle { ref potential, box_side, cutoff, ref out } = command else {
        unreachable!()
    };
    let pot = RadialPotential::from_json_file(potential)?;
    let problem = two_body::TwoBodyProblem {
        potential: pot.clone(),
        box_side,
        cutoff,
        dimension: Dimension::Three,
    };
    let gs = two_body::ground_state_energy(&problem)?;
    let solution = scattering::solve_zero_energy(&pot, Dimension::Three, 1e-10)?;
    let prediction =
        two_body::pseudopotential_prediction(solution.a, box_side, Dimension::Three)?;
    let free = two_body::free_energy(box_side, Dimension::Three);
    let shift = gs.energy - free;
    let out = out_path(ctx, out);
    let mut report = Report::new(command.clone(), ctx.seed);
    report.push("energy", gs.energy, "two_body::ground_state_energy");
    report.push("free_energy", free, "two_body::free_energy");
    report.push("shift", shift, "two_body::ground_state_energy");
    report.push("a", solution.a, "scattering::solve_zero_energy");
    report.push("prediction", prediction, "two_body::pseudopotential_prediction");
    report.push(
        "shift_over_prediction",
        shift / (prediction - free),
        "two_body::ground_state_energy",
    );
    report.push("trace", &gs.trace, "two_body::ground_state_energy");
    report.push("converged", gs.converged, "two_body::ground_state_energy");
    write_report(&report, &out)?;
    Ok(RunArtifacts { report_path: out, extra_paths: vec![] })
}

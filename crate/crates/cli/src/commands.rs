use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use weylkit_core::dirac::{block_rows_at_zero, check_j_identities, check_unitary_identities, propagate, SystemKind};
use weylkit_core::dynamical::{
    explicit_inverse, extract_response, response_to_potential, simulate, BoundaryControl, DynInverseConfig, ExtractConfig,
};
use weylkit_core::evolution::{
    boundary_reduction_limit, compatibility_check, denjoy_carleman, evolve_weyl, log_factorial_power,
    nwave_evolve_normalized, propagate_r, sge_goursat, Equation, GoursatConfig, ReductionConfig, TailBound,
};
use weylkit_core::inverse_sa::{solve_inverse, InverseConfig};
use weylkit_core::inverse_skew::{solve_inverse_skew, SkewInverseConfig};
use weylkit_core::io::{self, ComplexJson, MatrixJson, WeylSampleJson, WeylTableFile};
use weylkit_core::numerics::{central_diff4, CMatrix};
use weylkit_core::weyl::{nwave_gw_by_truncation, sample_line, weyl_by_truncation, Convention, TruncationConfig, WeylTable};
use weylkit_core::{Error, Grid64, Result};

use crate::output;

#[derive(Parser, Debug)]
#[command(name = "weylkit", version, about = "Weyl functions, inverse problems and integrable evolution for Dirac-type systems")]
pub struct Cli {
    /// Worker threads for independent spectral samples.
    #[arg(long, env = "WEYLKIT_WORKERS", default_value_t = 1, global = true)]
    workers: usize,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fundamental solution at one point and the block-row identities.
    Forward(ForwardArgs),
    /// Weyl or GW function by truncation.
    Weyl(WeylArgs),
    /// Selfadjoint inverse problem from a Weyl table on a line.
    InvertSa(InvertArgs),
    /// Skew-selfadjoint inverse problem from a GW table on a line.
    InvertSkew(InvertArgs),
    /// Evolve a Weyl table in time from boundary data.
    Evolve(EvolveArgs),
    /// Sine-Gordon Goursat problem.
    SgeGoursat(GoursatArgs),
    /// Weyl function at t = 0 from boundary data alone.
    ReduceBoundary(ReduceArgs),
    /// Zero-curvature residual of a field on a rectangle.
    Compat(CompatArgs),
    /// Dynamical Dirac system with boundary control.
    #[command(subcommand)]
    Dyn(DynCommand),
    /// Denjoy-Carleman quasi-analyticity test.
    QaCheck(QaArgs),
    /// Named end-to-end scenarios.
    Roundtrip(RoundtripArgs),
    /// Full acceptance suite; exit status 0 iff every criterion passes.
    Selftest,
}

#[derive(Subcommand, Debug)]
enum DynCommand {
    /// Characteristic-lattice simulation with the standard probe.
    Simulate(DynSimulateArgs),
    /// Response function from a time-domain potential.
    Response(DynResponseArgs),
    /// Potential from a response function.
    Invert(DynInvertArgs),
    /// Explicit solution from (alpha, theta1, theta2).
    Explicit(DynExplicitArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Serialize)]
struct ForwardArgs {
    #[arg(long)]
    potential: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    z: String,
    /// Point at which `u(x, z)` is reported; defaults to the grid end.
    #[arg(long)]
    x: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct WeylArgs {
    #[arg(long)]
    potential: PathBuf,
    /// Comma-separated spectral points in `a+bi` notation.
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// Line `eta,a,dxi`: points `xi + i eta` with `|xi| <= a`.
    #[arg(long)]
    z_grid: Option<String>,
    /// Truncation schedule.
    #[arg(long, default_value = "5,10,20")]
    b: String,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct InvertArgs {
    #[arg(long)]
    weyl: PathBuf,
    /// Step of the reconstruction grid.
    #[arg(long, default_value_t = 5e-3)]
    grid_h: f64,
    /// Nodes of the reconstruction grid; `length = (n - 1) h`.
    #[arg(long, default_value_t = 201)]
    grid_n: usize,
}

#[derive(Args, Debug, Serialize)]
struct EvolveArgs {
    #[arg(long)]
    boundary: PathBuf,
    /// Table of `phi(0, z)`.
    #[arg(long)]
    weyl: PathBuf,
    #[arg(long)]
    t: f64,
}

#[derive(Args, Debug, Serialize)]
struct GoursatArgs {
    /// `{"grid", "values"}` with `psi(x, 0)`.
    #[arg(long)]
    initial: PathBuf,
    /// sge boundary data with `psi(0, t)`.
    #[arg(long)]
    boundary: PathBuf,
    #[arg(long, default_value_t = 200.0)]
    a: f64,
    #[arg(long, default_value_t = 0.05)]
    dxi: f64,
    #[arg(long, default_value_t = 5e-3)]
    grid_h: f64,
    #[arg(long, default_value_t = 201)]
    grid_n: usize,
    /// Times at which the inverse map is evaluated.
    #[arg(long, default_value_t = 8)]
    t_points: usize,
}

#[derive(Args, Debug, Serialize)]
struct ReduceArgs {
    #[arg(long)]
    boundary: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    z: String,
    /// Increasing times `T` at which the estimate is formed.
    #[arg(long)]
    t: String,
    /// `epsilon(z)` of the sine-Gordon domain condition.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct CompatArgs {
    /// `{"x_grid", "t_grid", "values"}` field file.
    #[arg(long)]
    field: PathBuf,
    #[arg(long)]
    equation: String,
    #[arg(long, allow_hyphen_values = true)]
    z: String,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    t: f64,
}

#[derive(Args, Debug, Serialize)]
struct DynSimulateArgs {
    /// `{"grid", "p", "q"}` time-domain potential.
    #[arg(long)]
    potential: PathBuf,
    /// Final time; defaults to the grid end.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Emit every `stride`-th lattice row and column.
    #[arg(long, default_value_t = 1)]
    stride: usize,
}

#[derive(Args, Debug, Serialize)]
struct DynResponseArgs {
    #[arg(long)]
    potential: PathBuf,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
}

#[derive(Args, Debug, Serialize)]
struct DynInvertArgs {
    #[arg(long)]
    response: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, default_value_t = 200.0)]
    a: f64,
    #[arg(long, default_value_t = 0.05)]
    dxi: f64,
    #[arg(long, default_value_t = 5e-3)]
    grid_h: f64,
    #[arg(long, default_value_t = 201)]
    grid_n: usize,
}

#[derive(Args, Debug, Serialize)]
struct DynExplicitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    x_max: f64,
    /// Length of the response table; defaults to `x_max`.
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    grid_h: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug, Serialize)]
struct QaArgs {
    /// Test `M_k = (k!)^s` with Stirling tail bounds.
    #[arg(long, conflicts_with = "log_mk")]
    s: Option<f64>,
    /// JSON array of `ln M_k`, `k = 1..n`.
    #[arg(long)]
    log_mk: Option<PathBuf>,
    /// Upper tail bound `c,p` meaning `L_n <= c n^p`.
    #[arg(long)]
    upper: Option<String>,
    /// Lower tail bound `c,p` meaning `L_n >= c n^p`.
    #[arg(long)]
    lower: Option<String>,
    #[arg(long, default_value_t = 200)]
    n: usize,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Scenario {
    /// `v = 0.5 e^{-x}` through the selfadjoint pipeline.
    Selfadjoint,
    /// `v = -sech x` through the skew pipeline.
    Skew,
    /// Sine-Gordon kink from its Goursat data.
    Goursat,
    /// Explicit solution, simulation, extraction and inversion.
    Dynamical,
}

#[derive(Args, Debug, Serialize)]
struct RoundtripArgs {
    #[arg(long, value_enum)]
    scenario: Scenario,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

fn reals(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|_| invalid(format!("cannot parse number {p:?}"))))
        .collect()
}

fn config(name: &str, args: &impl Serialize, workers: usize) -> Value {
    json!({ "command": name, "args": args, "workers": workers, "version": env!("CARGO_PKG_VERSION") })
}

fn cplx(z: C) -> Value {
    json!(ComplexJson::from(z))
}

fn mat(m: &CMatrix<f64>) -> Value {
    json!(MatrixJson::from_matrix(m))
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    let out = cli.out.as_deref();
    let workers = cli.workers.max(1);
    match cli.command {
        Command::Forward(a) => forward(&a, &config("forward", &a, workers), out),
        Command::Weyl(a) => weyl(&a, workers, &config("weyl", &a, workers), out),
        Command::InvertSa(a) => invert(&a, false, &config("invert-sa", &a, workers), out),
        Command::InvertSkew(a) => invert(&a, true, &config("invert-skew", &a, workers), out),
        Command::Evolve(a) => evolve(&a, &config("evolve", &a, workers), out),
        Command::SgeGoursat(a) => goursat(&a, workers, &config("sge-goursat", &a, workers), out),
        Command::ReduceBoundary(a) => reduce(&a, &config("reduce-boundary", &a, workers), out),
        Command::Compat(a) => compat(&a, &config("compat", &a, workers), out),
        Command::Dyn(DynCommand::Simulate(a)) => dyn_simulate(&a, &config("dyn simulate", &a, workers), out),
        Command::Dyn(DynCommand::Response(a)) => dyn_response(&a, &config("dyn response", &a, workers), out),
        Command::Dyn(DynCommand::Invert(a)) => dyn_invert(&a, &config("dyn invert", &a, workers), out),
        Command::Dyn(DynCommand::Explicit(a)) => dyn_explicit(&a, &config("dyn explicit", &a, workers), out),
        Command::QaCheck(a) => qa_check(&a, &config("qa-check", &a, workers), out),
        Command::Roundtrip(a) => return roundtrip(&a, &config("roundtrip", &a, workers), out),
        Command::Selftest => return Ok(selftest()),
    }?;
    Ok(ExitCode::SUCCESS)
}

type Out<'a> = Option<&'a std::path::Path>;

fn forward(a: &ForwardArgs, cfg: &Value, out: Out) -> Result<()> {
    let pot = io::potential_from_json(&io::read_file(&a.potential)?)?;
    let z = io::parse_complex(&a.z)?;
    let x = a.x.unwrap_or(pot.grid().end());
    let u = propagate(&pot, z, x)?;
    let identities = match pot.kind() {
        SystemKind::NWave => Value::Null,
        kind => {
            let (beta, gamma) = block_rows_at_zero(&pot)?;
            let rep = if kind == SystemKind::SelfAdjoint {
                check_j_identities(&beta, &gamma)?
            } else {
                check_unitary_identities(&beta, &gamma)?
            };
            json!(rep)
        }
    };
    output::json(out, cfg, json!({ "z": cplx(z), "x": x, "u": mat(u.last()), "identities": identities }))
}

fn weyl(a: &WeylArgs, workers: usize, cfg: &Value, out: Out) -> Result<()> {
    let pot = io::potential_from_json(&io::read_file(&a.potential)?)?;
    let b = reals(&a.b)?;
    let config = TruncationConfig { tol: a.tol, ..TruncationConfig::with_schedule(b.clone()) };
    let mut samples = Vec::new();
    let mut warnings = Vec::new();
    if let Some(zs) = &a.z {
        for z in io::parse_complex_list(zs)? {
            if pot.kind() == SystemKind::NWave {
                let phi = nwave_gw_by_truncation(&pot, z, *b.last().ok_or_else(|| invalid("empty b schedule"))?)?;
                samples.push(WeylSampleJson { z: z.into(), phi: MatrixJson::from_matrix(&phi), residual: 0.0 });
                continue;
            }
            let est = weyl_by_truncation(&pot, z, &config)?;
            if let Some(w) = est.warning {
                warnings.push(json!({ "z": cplx(z), "im_z": w.im_z, "bound": w.bound }));
            }
            samples.push(WeylSampleJson { z: z.into(), phi: MatrixJson::from_matrix(&est.phi), residual: est.residual });
        }
    }
    if let Some(grid) = &a.z_grid {
        let v = reals(grid)?;
        let [eta, half, dxi] = v[..] else {
            return Err(invalid("--z-grid expects eta,a,dxi"));
        };
        let (line, residuals) = sample_line(&pot, eta, half, dxi, &config, workers)?;
        for (k, phi) in line.values.iter().enumerate() {
            samples.push(WeylSampleJson { z: line.z(k).into(), phi: MatrixJson::from_matrix(phi), residual: residuals[k] });
        }
    }
    if samples.is_empty() {
        return Err(invalid("give --z or --z-grid"));
    }
    let offset = if pot.kind() == SystemKind::Skew { pot.sup_norm() } else { 0.0 };
    let table = WeylTableFile { m1: pot.m1(), m2: pot.m2(), convention: Convention::Phi, offset, samples };
    let mut body = serde_json::to_value(&table).map_err(|e| invalid(e.to_string()))?;
    body["warnings"] = json!(warnings);
    output::json(out, cfg, body)
}

fn read_table(path: &std::path::Path) -> Result<WeylTable<f64>> {
    io::weyl_table_from_json(&io::read_file(path)?)
}

fn inverse_config(h: f64, n: usize) -> Result<InverseConfig<f64>> {
    if n < 2 || !(h > 0.0) {
        return Err(invalid("reconstruction grid needs h > 0 and at least two nodes"));
    }
    Ok(InverseConfig { h, length: h * (n - 1) as f64, ..InverseConfig::default() })
}

fn potential_body(pot: &weylkit_core::dirac::DiracPotential<f64>) -> Result<Value> {
    serde_json::to_value(io::PotentialFile::from_potential(pot)).map_err(|e| invalid(e.to_string()))
}

fn invert(a: &InvertArgs, skew: bool, cfg: &Value, out: Out) -> Result<()> {
    let table = read_table(&a.weyl)?;
    if table.convention != Convention::Phi {
        return Err(invalid("the inverse maps expect the phi convention"));
    }
    let line = table.to_line()?;
    let inverse = inverse_config(a.grid_h, a.grid_n)?;
    let (pot, identities, min_eig) = if skew {
        let sk = SkewInverseConfig {
            eta: line.eta,
            a: line.xi.end(),
            dxi: line.xi.h,
            inverse,
            phi0: None,
        };
        sk.validate(table.offset)?;
        let res = solve_inverse_skew(&line, None, &sk)?;
        let eig = res.min_eigenvalues.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        (res.potential, res.identities, eig)
    } else {
        let res = solve_inverse(&line, None, &inverse)?;
        let eig = res.hamiltonian.min_eigenvalues.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        (res.potential, res.identities, eig)
    };
    let mut body = potential_body(&pot)?;
    body["identities"] = json!(identities);
    body["min_eigenvalue"] = json!(min_eig);
    output::json(out, cfg, body)
}

fn evolve(a: &EvolveArgs, cfg: &Value, out: Out) -> Result<()> {
    let data = io::boundary_from_json(&io::read_file(&a.boundary)?)?;
    let table = read_table(&a.weyl)?;
    let mut samples = Vec::with_capacity(table.samples.len());
    for s in &table.samples {
        let coef = propagate_r(&data, s.z, a.t, &Default::default())?;
        let phi = if data.equation == Equation::Nwave {
            nwave_evolve_normalized(coef.last(), &s.phi)?
        } else {
            evolve_weyl(&coef, &s.phi)?
        };
        samples.push(WeylSampleJson { z: s.z.into(), phi: MatrixJson::from_matrix(&phi), residual: s.residual });
    }
    let file = WeylTableFile { m1: table.m1, m2: table.m2, convention: table.convention, offset: table.offset, samples };
    let mut body = serde_json::to_value(&file).map_err(|e| invalid(e.to_string()))?;
    body["t"] = json!(a.t);
    output::json(out, cfg, body)
}

#[derive(Deserialize)]
struct InitialFile {
    grid: Grid64,
    values: Vec<f64>,
}

fn goursat(a: &GoursatArgs, workers: usize, cfg: &Value, out: Out) -> Result<()> {
    let init: InitialFile = serde_json::from_str(&io::read_file(&a.initial)?).map_err(|e| invalid(format!("malformed JSON: {e}")))?;
    let xg = Grid64::new(init.grid.x0, init.grid.h, init.grid.n)?;
    let data = io::boundary_from_json(&io::read_file(&a.boundary)?)?;
    if data.equation != Equation::Sge {
        return Err(Error::WrongKind { expected: "sge" });
    }
    let h2: Vec<f64> = data.h2.iter().map(|m| m[(0, 0)].re).collect();
    let slope = central_diff4(&init.values, xg.h)?.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let mut config = GoursatConfig::for_offset(slope);
    config.skew.a = a.a;
    config.skew.dxi = a.dxi;
    config.skew.inverse = inverse_config(a.grid_h, a.grid_n)?;
    config.t_points = a.t_points;
    config.workers = workers;
    let sol = sge_goursat(&xg, &init.values, &data.t_grid, &h2, &config)?;
    let rows = sol.psi.iter().enumerate().flat_map(|(it, row)| {
        let t = sol.t_grid.node(it);
        let xg = sol.x_grid;
        row.iter().enumerate().map(move |(ix, p)| vec![xg.node(ix), t, *p, 0.0])
    });
    output::csv(out, cfg, &["x", "t", "re_psi", "im_psi"], rows)
}

fn reduce(a: &ReduceArgs, cfg: &Value, out: Out) -> Result<()> {
    let data = io::boundary_from_json(&io::read_file(&a.boundary)?)?;
    let z = io::parse_complex(&a.z)?;
    let schedule = reals(&a.t)?;
    let config = ReductionConfig { sge_epsilon: a.eps, ..Default::default() };
    let res = boundary_reduction_limit(&data, z, &schedule, &config)?;
    let estimates: Vec<Value> = res.estimates.iter().map(|(t, phi)| json!({ "T": t, "phi": mat(phi) })).collect();
    output::json(
        out,
        cfg,
        json!({ "z": cplx(z), "phi": mat(res.last()), "estimates": estimates, "residuals": res.residuals, "monotone": res.monotone() }),
    )
}

fn compat(a: &CompatArgs, cfg: &Value, out: Out) -> Result<()> {
    let field = io::field_from_json(&io::read_file(&a.field)?)?;
    let equation = Equation::parse(&a.equation)?;
    let z = io::parse_complex(&a.z)?;
    let residual = compatibility_check(equation, &field, z, a.x, a.t, &Default::default())?;
    output::json(out, cfg, json!({ "z": cplx(z), "x": a.x, "t": a.t, "residual": residual }))
}

fn read_td(path: &std::path::Path) -> Result<weylkit_core::dynamical::TimeDomainPotential<f64>> {
    io::time_domain_from_json(&io::read_file(path)?)
}

fn dyn_simulate(a: &DynSimulateArgs, cfg: &Value, out: Out) -> Result<()> {
    let pot = read_td(&a.potential)?;
    let t_end = a.t.unwrap_or(pot.grid.end());
    let control = BoundaryControl::probe(pot.grid, a.amplitude)?;
    let sim = simulate(&pot, &control, t_end)?;
    let stride = a.stride.max(1);
    let n = sim.steps() + 1;
    let g = sim.grid;
    let mut rows = Vec::new();
    for k in (0..n).step_by(stride) {
        for j in (0..n).step_by(stride) {
            let [y1, y2] = sim.at(j, k);
            rows.push(vec![g.node(j), g.node(k), y1.re, y1.im, y2.re, y2.im]);
        }
    }
    output::csv(out, cfg, &["x", "t", "re_y1", "im_y1", "re_y2", "im_y2"], rows)
}

fn dyn_response(a: &DynResponseArgs, cfg: &Value, out: Out) -> Result<()> {
    let pot = read_td(&a.potential)?;
    let ex = extract_response(&pot, &ExtractConfig { t_end: a.t, amplitude: a.amplitude })?;
    let mut body: Value = serde_json::from_str(&io::response_to_json(&ex.kernel)?).map_err(|e| invalid(e.to_string()))?;
    body["round_trip_residual"] = json!(ex.round_trip_residual()?);
    output::json(out, cfg, body)
}

fn dyn_invert(a: &DynInvertArgs, cfg: &Value, out: Out) -> Result<()> {
    let r = io::response_from_json(&io::read_file(&a.response)?)?;
    let config = DynInverseConfig { eta: a.eta, a: a.a, dxi: a.dxi, inverse: inverse_config(a.grid_h, a.grid_n)? };
    let res = response_to_potential(&r, &config)?;
    let mut body: Value = serde_json::from_str(&io::time_domain_to_json(&res.potential)?).map_err(|e| invalid(e.to_string()))?;
    body["identities"] = json!(res.spectral.identities);
    output::json(out, cfg, body)
}

fn dyn_explicit(a: &DynExplicitArgs, cfg: &Value, out: Out) -> Result<()> {
    let data = io::explicit_from_json(&io::read_file(&a.data)?)?;
    let xg = Grid64::span(0.0, a.x_max, a.grid_h)?;
    let tg = Grid64::span(0.0, a.t_max.unwrap_or(a.x_max), a.grid_h)?;
    let sol = explicit_inverse(&data, &xg, &tg)?;
    if a.format == Format::Csv {
        let rows = xg.nodes().enumerate().map(|(k, x)| vec![x, sol.v[k].re, sol.v[k].im, sol.potential.p[k], sol.potential.q[k]]);
        return output::csv(out, cfg, &["x", "re_v", "im_v", "p", "q"], rows);
    }
    let v: Vec<Value> = sol.v.iter().map(|&z| cplx(z)).collect();
    let r: Vec<Value> = sol.response.r.iter().map(|&z| cplx(z)).collect();
    output::json(
        out,
        cfg,
        json!({
            "x_grid": xg,
            "v": v,
            "p": sol.potential.p,
            "q": sol.potential.q,
            "t_grid": tg,
            "r": r,
            "s_min_eigenvalue": sol.s_min_eigenvalue,
        }),
    )
}

fn bound(s: &Option<String>) -> Result<Option<(f64, f64)>> {
    s.as_deref()
        .map(|s| match reals(s)?[..] {
            [c, p] => Ok((c, p)),
            _ => Err(invalid("tail bounds are given as c,p")),
        })
        .transpose()
}

fn qa_check(a: &QaArgs, cfg: &Value, out: Out) -> Result<()> {
    let (log_mk, mut bounds) = match (&a.s, &a.log_mk) {
        (Some(s), None) => (log_factorial_power(*s, a.n), TailBound::stirling(*s).to_vec()),
        (None, Some(path)) => {
            let v: Vec<f64> = serde_json::from_str(&io::read_file(path)?).map_err(|e| invalid(format!("malformed JSON: {e}")))?;
            (v, Vec::new())
        }
        _ => return Err(invalid("give exactly one of --s and --log-mk")),
    };
    if let Some((c, p)) = bound(&a.upper)? {
        bounds.push(TailBound::Upper { c, p });
    }
    if let Some((c, p)) = bound(&a.lower)? {
        bounds.push(TailBound::Lower { c, p });
    }
    let report = denjoy_carleman(&log_mk, &bounds);
    output::json(out, cfg, json!({ "report": report, "bounds": bounds }))
}

fn roundtrip(a: &RoundtripArgs, cfg: &Value, out: Out) -> Result<ExitCode> {
    let id = match a.scenario {
        Scenario::Selfadjoint => 4,
        Scenario::Skew => 5,
        Scenario::Goursat => 9,
        Scenario::Dynamical => 10,
    };
    let r = weylkit_acceptance::run(id);
    output::json(out, cfg, json!({ "scenario": a.scenario, "passed": r.passed, "detail": r.detail }))?;
    Ok(if r.passed { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn selftest() -> ExitCode {
    let reports = weylkit_acceptance::run_all(|r| println!("{r}"));
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} of {} criteria pass", reports.len() - failed, reports.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

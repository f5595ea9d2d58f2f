use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use qpvi::continuum::{integrate, limit_check, LimitConfig, LimitParams, LimitSystem};
use qpvi::error::Error;
use qpvi::laxpair::{determinant_law, fit_a, lax_chain, theta_closed_form};
use qpvi::opuc::{check_orthogonality, verblunsky_from_moments, wronskian_check};
use qpvi::painleve::weight_orbit;
use qpvi::poly::MatPoly2;
use qpvi::qseries::{default_nodes, moments, MomentTable, QWeightParams};
use qpvi::verify::{run_criterion, Preset};
use qpvi::weyl::{check_translation, composite_row, phi_pic, random_point};

const SCHEMA: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "qpvi", version, about = "Verblunsky coefficients of q-Gamma weights and the discrete Painleve map")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// seed for random-point checks
    #[arg(long, global = true, default_value_t = 20240607)]
    seed: u64,
    /// worker threads (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// output file (default stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SystemArg {
    Stated,
    Derived,
}

#[derive(Args, Debug, Clone)]
struct WeightArgs {
    /// weight parameter a as "re,im"
    #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
    a: Option<[f64; 2]>,
    /// weight parameter b as "re,im"
    #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
    b: Option<[f64; 2]>,
    #[arg(long)]
    q: Option<f64>,
    /// largest degree
    #[arg(long = "N")]
    n: Option<usize>,
    /// number of moments
    #[arg(long = "K")]
    k: Option<usize>,
    /// working precision in bits
    #[arg(long, env = "QPVI_PREC")]
    prec: Option<u32>,
    /// fit and consistency tolerance [default: 2^(-prec/2)]
    #[arg(long)]
    tol: Option<f64>,
    /// named parameter set; explicit flags take precedence
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trigonometric moments c_k, |k| <= K
    Moments(WeightArgs),
    /// Verblunsky coefficients with orthogonality and Wronskian reports
    Verblunsky(WeightArgs),
    /// Fitted spectral matrices A_n and compatibility residuals
    Lax(WeightArgs),
    /// The (y, xi) orbit from the orthogonal polynomials, JSON lines
    Orbit {
        #[command(flatten)]
        w: WeightArgs,
        #[arg(long, default_value_t = 1)]
        n_start: usize,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Picard lattice report and the reflection composite at random points
    Weyl {
        #[command(flatten)]
        w: WeightArgs,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Limit system trajectory and discrete-orbit convergence study
    Ode {
        #[arg(long, value_enum, default_value_t = SystemArg::Stated)]
        system: SystemArg,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
        k1: Option<[f64; 2]>,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
        k2: Option<[f64; 2]>,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
        theta1: Option<[f64; 2]>,
        /// C1..C4 as "re,im;re,im;re,im;re,im"
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
        u0: Option<[f64; 2]>,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
        v0: Option<[f64; 2]>,
        #[arg(long)]
        tol: Option<f64>,
        /// comma-separated step sizes for the convergence study
        #[arg(long, default_value = "1e-2,5e-3,2.5e-3")]
        eps: String,
        #[arg(long, env = "QPVI_PREC")]
        prec: Option<u32>,
    },
    /// The full acceptance suite
    VerifyAll {
        #[command(flatten)]
        w: WeightArgs,
        /// comma-separated criterion numbers
        #[arg(long)]
        only: Option<String>,
    },
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    match parts.as_slice() {
        [re] => Ok([num(re)?, 0.0]),
        [re, im] => Ok([num(re)?, num(im)?]),
        _ => Err(format!("expected \"re,im\", got '{s}'")),
    }
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numeric { check: String, message: String },
}

impl Failure {
    fn numeric(check: &str, e: impl std::fmt::Display) -> Self {
        Failure::Numeric { check: check.into(), message: e.to_string() }
    }
}

fn lift(check: &'static str) -> impl Fn(Error) -> Failure {
    move |e| match e {
        Error::Config(m) => Failure::Config(m),
        e => Failure::numeric(check, e),
    }
}

type CliResult<T> = Result<T, Failure>;

#[derive(Debug, Clone, Serialize)]
struct Resolved {
    a: [f64; 2],
    b: [f64; 2],
    q: f64,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    prec: u32,
    tol: f64,
    preset: Option<String>,
}

impl WeightArgs {
    fn resolve(&self, default_k: impl Fn(usize) -> usize) -> CliResult<Resolved> {
        let base = match &self.preset {
            Some(name) => Preset::by_name(name).ok_or_else(|| Failure::Config(format!("unknown preset '{name}'")))?,
            None => Preset::reference(),
        };
        let n = self.n.unwrap_or(base.n);
        let prec = self.prec.unwrap_or(base.prec);
        let r = Resolved {
            a: self.a.unwrap_or(base.a),
            b: self.b.unwrap_or(base.b),
            q: self.q.unwrap_or(base.q),
            n,
            k: self.k.unwrap_or_else(|| default_k(n)),
            prec,
            tol: self.tol.unwrap_or_else(|| 2f64.powi(-(prec as i32) / 2)),
            preset: self.preset.clone(),
        };
        if r.tol.is_nan() || r.tol <= 0.0 {
            return Err(Failure::Config(format!("tolerance {} must be positive", r.tol)));
        }
        Ok(r)
    }
}

impl Resolved {
    fn need_k(&self, k: usize) -> CliResult<()> {
        if self.k < k {
            return Err(Failure::Config(format!("K = {} is below the {k} moments this command needs", self.k)));
        }
        Ok(())
    }

    fn weight(&self) -> CliResult<QWeightParams> {
        QWeightParams::new(self.a, self.b, self.q, self.prec).map_err(lift("parameters"))
    }

    fn preset(&self, seed: u64) -> Preset {
        Preset { a: self.a, b: self.b, q: self.q, n: self.n, prec: self.prec, seed }
    }
}

fn table(p: &QWeightParams, k: usize) -> CliResult<MomentTable> {
    moments(p, k, default_nodes(k, p.prec), true, None).map_err(lift("moments"))
}

fn mat_json(m: &MatPoly2) -> Value {
    json!({
        "e11": m.e11.to_pairs(),
        "e12": m.e12.to_pairs(),
        "e21": m.e21.to_pairs(),
        "e22": m.e22.to_pairs(),
    })
}

fn c64(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

struct Output {
    json: Value,
    csv: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    /// JSON lines instead of a single document
    lines: Option<Vec<Value>>,
    /// criteria that failed, for verify-all
    failed: Vec<String>,
}

impl Output {
    fn doc(json: Value) -> Self {
        Output { json, csv: None, lines: None, failed: vec![] }
    }
}

fn envelope(command: &str, config: Value, result: Value) -> Value {
    json!({
        "schema": SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "result": result,
    })
}

fn run(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Moments(w) => {
            let r = w.resolve(|n| n)?;
            let t = table(&r.weight()?, r.k)?;
            let j = t.to_json();
            let k = j.k as i64;
            let rows = j
                .c
                .iter()
                .enumerate()
                .map(|(i, c)| vec![(i as i64 - k).to_string(), fmt(c[0]), fmt(c[1])])
                .collect();
            let mut out = Output::doc(envelope("moments", json!(r), json!(j)));
            out.csv = Some((vec!["k", "re", "im"], rows));
            Ok(out)
        }
        Command::Verblunsky(w) => {
            let r = w.resolve(|n| n)?;
            r.need_k(r.n)?;
            let t = table(&r.weight()?, r.k)?;
            let vt = verblunsky_from_moments(&t, r.n).map_err(lift("verblunsky"))?;
            let result = json!({
                "table": vt.to_json(),
                "orthogonality": check_orthogonality(&vt, &t),
                "wronskian": wronskian_check(&vt),
            });
            let rows = vt
                .csv_rows()
                .into_iter()
                .map(|(n, re, im, s)| vec![n.to_string(), fmt(re), fmt(im), fmt(s)])
                .collect();
            let mut out = Output::doc(envelope("verblunsky", json!(r), result));
            out.csv = Some((vec!["n", "re_alpha", "im_alpha", "sigma"], rows));
            Ok(out)
        }
        Command::Lax(w) => {
            let r = w.resolve(|n| n + 9)?;
            r.need_k(r.n + 9)?;
            let p = r.weight()?;
            let t = table(&p, r.k)?;
            let vt = verblunsky_from_moments(&t, r.n + 2).map_err(lift("verblunsky"))?;
            let chain = lax_chain(&vt, &p, &t, r.n, r.tol).map_err(lift("lax fit"))?;
            let fits: Vec<Value> = chain
                .fits
                .iter()
                .map(|f| {
                    json!({
                        "n": f.n,
                        "A": mat_json(&f.a),
                        "fit_residual": f.residual.max(f.residual_star),
                        "theta_closed_form": (&f.theta - &theta_closed_form(&p, &vt, f.n)).max_abs(),
                        "determinant": determinant_law(&p, f),
                    })
                })
                .collect();
            let compat: Vec<Value> = chain.compat.iter().map(|(n, c)| json!({"n": n, "residual": c})).collect();
            let rows = chain
                .fits
                .iter()
                .map(|f| {
                    let c = chain.compat.iter().find(|(n, _)| *n == f.n).map(|(_, c)| fmt(*c)).unwrap_or_default();
                    vec![f.n.to_string(), fmt(f.residual.max(f.residual_star)), c]
                })
                .collect();
            let mut out = Output::doc(envelope("lax", json!(r), json!({"fits": fits, "compat": compat})));
            out.csv = Some((vec!["n", "fit_residual", "compat_residual"], rows));
            Ok(out)
        }
        Command::Orbit { w, n_start, steps } => {
            use rayon::prelude::*;
            if *n_start == 0 || *steps == 0 {
                return Err(Failure::Config("--n-start and --steps must be positive".into()));
            }
            let last = n_start + steps - 1;
            let r = w.resolve(|_| last + 8)?;
            r.need_k(last + 8)?;
            let p = r.weight()?;
            let t = table(&p, r.k)?;
            let vt = verblunsky_from_moments(&t, last + 2).map_err(lift("verblunsky"))?;
            let fits = (*n_start..=last)
                .into_par_iter()
                .map(|n| fit_a(&vt, &p, &t, n, r.tol))
                .collect::<Result<Vec<_>, _>>()
                .map_err(lift("lax fit"))?;
            let orbit = weight_orbit(&p, &fits, r.tol.max(1e-25)).map_err(lift("orbit"))?;
            let config = json!({"weight": r, "n_start": n_start, "steps": steps});
            let lines: Vec<Value> = orbit.iter().map(|rec| json!(rec)).collect();
            let rows = orbit
                .iter()
                .map(|rec| {
                    let y = rec.y.unwrap_or([f64::NAN; 2]);
                    let x = rec.xi.unwrap_or([f64::NAN; 2]);
                    vec![
                        rec.n.to_string(),
                        fmt(y[0]),
                        fmt(y[1]),
                        fmt(x[0]),
                        fmt(x[1]),
                        fmt(rec.residuals.verblunsky),
                        rec.residuals.matrix.map(fmt).unwrap_or_default(),
                    ]
                })
                .collect();
            let mut out = Output::doc(envelope("orbit", config.clone(), json!(lines)));
            out.lines = Some(
                lines
                    .into_iter()
                    .map(|mut l| {
                        l["schema"] = json!(SCHEMA);
                        l["version"] = json!(env!("CARGO_PKG_VERSION"));
                        l["config"] = config.clone();
                        l
                    })
                    .collect(),
            );
            out.csv = Some((vec!["n", "re_y", "im_y", "re_xi", "im_xi", "step_vs_chain", "step_vs_matrix"], rows));
            Ok(out)
        }
        Command::Weyl { w, points } => {
            use rand::SeedableRng;
            use rayon::prelude::*;
            let r = w.resolve(|n| n)?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cli.seed);
            let pts: Vec<_> = (0..*points).map(|_| random_point(&mut rng, r.prec)).collect();
            let comp = pts
                .par_iter()
                .map(|pt| composite_row(pt, r.tol))
                .collect::<Result<Vec<_>, _>>()
                .map_err(lift("weyl composite"))?;
            let pic = check_translation(&phi_pic());
            let rows = comp
                .iter()
                .enumerate()
                .map(|(i, c)| vec![i.to_string(), fmt(c.vs_phi_step), fmt(c.closed_form_f), fmt(c.closed_form_g)])
                .collect();
            let worst = |f: fn(&qpvi::weyl::CompositeRow) -> f64| comp.iter().map(f).fold(0.0, f64::max);
            let result = json!({
                "picard": pic,
                "picard_passed": pic.passed(),
                "composite": {
                    "points": points,
                    "max_vs_phi_step": worst(|c| c.vs_phi_step),
                    "max_closed_form_f": worst(|c| c.closed_form_f),
                    "max_closed_form_g": worst(|c| c.closed_form_g),
                    "rows": comp,
                },
            });
            let config = json!({"prec": r.prec, "tol": r.tol, "points": points, "seed": cli.seed});
            let mut out = Output::doc(envelope("weyl", config, result));
            out.csv = Some((vec!["point", "vs_phi_step", "closed_form_f", "closed_form_g"], rows));
            Ok(out)
        }
        Command::Ode { system, k1, k2, theta1, c, t0, t1, u0, v0, tol, eps, prec } => {
            let mut cfg = LimitConfig::reference();
            let base = cfg.params.clone();
            let cs = match c {
                Some(s) => {
                    let v = s.split(';').map(parse_pair).collect::<Result<Vec<_>, _>>().map_err(Failure::Config)?;
                    let arr: [[f64; 2]; 4] = v
                        .try_into()
                        .map_err(|_| Failure::Config("--c needs four values separated by ';'".into()))?;
                    arr.map(c64)
                }
                None => base.c,
            };
            cfg.params = LimitParams::constrained(
                k1.map(c64).unwrap_or(base.k1),
                k2.map(c64).unwrap_or(base.k2),
                theta1.map(c64).unwrap_or(base.t1),
                cs,
            );
            cfg.t0 = t0.unwrap_or(cfg.t0);
            cfg.t1 = t1.unwrap_or(cfg.t1);
            cfg.u0 = u0.map(c64).unwrap_or(cfg.u0);
            cfg.v0 = v0.map(c64).unwrap_or(cfg.v0);
            cfg.ode_tol = tol.unwrap_or(cfg.ode_tol);
            cfg.prec = prec.unwrap_or(cfg.prec);
            let eps_list = eps
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| Failure::Config(format!("--eps '{s}': {e}"))))
                .collect::<CliResult<Vec<_>>>()?;
            if eps_list.iter().any(|e| !(*e > 0.0 && *e < 0.5)) {
                return Err(Failure::Config("every ε must lie in (0, 0.5)".into()));
            }
            for (name, t) in [("t0", cfg.t0), ("t1", cfg.t1)] {
                if !(t > 0.0 && t < 1.0) {
                    return Err(Failure::Config(format!("{name} = {t} must lie in (0, 1)")));
                }
            }
            let sys = match system {
                SystemArg::Stated => LimitSystem::Stated,
                SystemArg::Derived => LimitSystem::Derived,
            };
            let tr = integrate(sys, &cfg.params, (cfg.t0, cfg.u0, cfg.v0), cfg.t1, cfg.ode_tol)
                .map_err(lift("ode integration"))?;
            let conv = limit_check(&cfg, sys, &eps_list).map_err(lift("limit check"))?;
            let rows = tr.csv_rows().into_iter().map(|r| r.iter().map(|x| fmt(*x)).collect()).collect();
            let result = json!({
                "trajectory": tr,
                "limit_check": conv,
                "limit_check_passed": conv.passed(0.8),
            });
            let config = json!({"limit": cfg, "system": system, "eps": eps_list});
            let mut out = Output::doc(envelope("ode", config, result));
            out.csv = Some((vec!["t", "re_u", "im_u", "re_v", "im_v"], rows));
            Ok(out)
        }
        Command::VerifyAll { w, only } => {
            let r = w.resolve(|n| n)?;
            r.weight()?;
            let ids: Vec<u8> = match only {
                Some(s) => s
                    .split(',')
                    .map(|t| match t.trim().parse::<u8>() {
                        Ok(i) if (1..=13).contains(&i) => Ok(i),
                        _ => Err(Failure::Config(format!("no criterion '{t}'"))),
                    })
                    .collect::<CliResult<_>>()?,
                None => (1..=13).collect(),
            };
            let preset = r.preset(cli.seed);
            let mut results = Vec::new();
            for id in ids {
                let res = run_criterion(id, &preset).map_err(|e| Failure::numeric(&format!("criterion {id}"), e))?;
                eprintln!("{}  ({:.1}s)", res.line(), res.seconds);
                results.push(res);
            }
            let failed: Vec<String> = results
                .iter()
                .filter(|r| !r.passed)
                .map(|r| format!("criterion {} ({})", r.id, r.name))
                .collect();
            let rows = results
                .iter()
                .map(|r| {
                    vec![
                        r.id.to_string(),
                        r.name.to_string(),
                        if r.passed { "PASS" } else { "FAIL" }.to_string(),
                        fmt(r.value),
                        fmt(r.threshold),
                    ]
                })
                .collect();
            let result = json!({
                "all_passed": failed.is_empty(),
                "criteria": results,
                "picard_matrix": phi_pic().rows_i64(),
            });
            let mut out = Output::doc(envelope("verify-all", json!({"weight": r, "seed": cli.seed}), result));
            out.csv = Some((vec!["criterion", "name", "status", "value", "threshold"], rows));
            out.failed = failed;
            Ok(out)
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn emit(cli: &Cli, out: &Output) -> std::io::Result<()> {
    let mut sink: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    match (cli.format, &out.csv, &out.lines) {
        (Format::Csv, Some((header, rows)), _) => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        (Format::Json, _, Some(lines)) => {
            for l in lines {
                serde_json::to_writer(&mut sink, l)?;
                writeln!(sink)?;
            }
            sink.flush()?;
        }
        _ => {
            serde_json::to_writer_pretty(&mut sink, &out.json)?;
            writeln!(sink)?;
            sink.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let out = match run(&cli) {
        Ok(o) => o,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(Failure::Numeric { check, message }) => {
            eprintln!("numerical failure in {check}: {message}");
            return ExitCode::from(3);
        }
    };
    if let Err(e) = emit(&cli, &out) {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(2);
    }
    if !out.failed.is_empty() {
        eprintln!("failed: {}", out.failed.join(", "));
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

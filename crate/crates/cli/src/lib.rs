//! Command implementations behind the `foamtor` binary. Each command returns
//! a [`Report`]: the rendered output and whether its internal checks passed.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use foamtor_core::connection::{self, FlatOptions};
use foamtor_core::foam::{self, Foam};
use foamtor_core::partition::{self, FitModel, ZEstimate};
use foamtor_core::{par, torsion, twisted, Group, VERSION};

#[derive(Debug, Parser)]
#[command(name = "foamtor", version, about = "Flat connections, divergence degrees and torsion on cell 2-complexes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupArg {
    Su2,
    U1,
}

impl From<GroupArg> for Group {
    fn from(g: GroupArg) -> Group {
        match g {
            GroupArg::Su2 => Group::Su2,
            GroupArg::U1 => Group::U1,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Builtin key (sphere, torus, genus:<g>, appendix, dunce_hat,
    /// projective_plane) or a foam file (.json or text format).
    #[arg(long, default_value = "torus")]
    pub foam: String,
    #[arg(long, value_enum, default_value_t = GroupArg::Su2)]
    pub group: GroupArg,
    #[arg(long, env = "FOAMTOR_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results depend on (seed, workers).
    #[arg(long, default_value_t = par::default_workers())]
    pub workers: usize,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ZMethodArg {
    Mc,
    Char,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Auto,
    Pure,
    WithLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Twisted-complex volume against 4(sin²ψa + sin²ψb) on a grid.
    TorusVolume,
    /// Chart quadrature of the dominant part against the character-sum limit.
    TorusDominant,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cellular and twisted Betti numbers, b²₀ and the predicted divergence degree.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Z_τ on a grid of τ.
    Ztau {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = ZMethodArg::Char)]
        method: ZMethodArg,
        /// `a:b:n`, n log-spaced points from a to b.
        #[arg(long, default_value = "1e-3:1e-1:8")]
        tau_grid: String,
        /// MC samples per τ.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Fit Ω and Z′ to a ztau CSV, or to a freshly computed grid.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long = "in")]
        input: Option<String>,
        #[arg(long, value_enum, default_value_t = ModelArg::Auto)]
        model: ModelArg,
        #[arg(long, value_enum, default_value_t = ZMethodArg::Char)]
        method: ZMethodArg,
        #[arg(long, default_value = "1e-3:1e-1:8")]
        tau_grid: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Reidemeister torsion at sampled flat connections, or a torus check.
    Torsion {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        /// Random basis completions per sample.
        #[arg(long, default_value_t = 20)]
        completions: usize,
        #[arg(long, value_enum)]
        check: Option<Check>,
        /// Grid size for `--check torus-volume`.
        #[arg(long, default_value_t = 20)]
        grid: usize,
        /// Quadrature order for `--check torus-dominant`.
        #[arg(long, default_value_t = 40)]
        quad: usize,
    },
    /// Dump flat samples with their twisted cohomology.
    Flat {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    /// The two-dimensional toy integral and its scaling fit.
    Toy {
        #[arg(long, default_value = "1e-6:1e-2:9")]
        tau_grid: String,
        #[arg(long, default_value_t = 1.0)]
        half_width: f64,
        #[arg(long, default_value_t = 24)]
        quad: usize,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

/// Rendered output plus the outcome of the command's consistency checks.
#[derive(Debug, Clone)]
pub struct Report {
    pub output: String,
    pub ok: bool,
    pub json: Value,
}

pub fn load_foam(source: &str) -> Result<Foam> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {source}"))?;
        let foam = if path.extension().is_some_and(|e| e == "json") {
            Foam::from_json(&text)?
        } else {
            foam::parse_foam(&text)?
        };
        return Ok(foam);
    }
    Ok(foam::builtin(source)?)
}

pub fn parse_tau_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        bail!("tau grid must look like a:b:n, got `{s}`");
    };
    let (a, b): (f64, f64) = (a.parse()?, b.parse()?);
    let n: usize = n.parse()?;
    if n == 1 && a > 0.0 {
        return Ok(vec![a]);
    }
    Ok(partition::log_grid(a, b, n)?)
}

/// Genus of a one-vertex closed-surface presentation `[a1,b1]⋯[ag,bg]`.
fn surface_genus(f: &Foam) -> Option<usize> {
    if f.n_faces() != 1 || !f.n_edges().is_multiple_of(2) {
        return None;
    }
    let g = f.n_edges() / 2;
    let model = if g == 0 { foam::builtin("sphere").ok()? } else { foam::genus(g).ok()? };
    (model.faces[0].letters == f.faces[0].letters && f.n_vertices() == 1).then_some(g)
}

fn char_estimate(f: &Foam, group: Group, tau: f64) -> Result<ZEstimate> {
    if group != Group::Su2 {
        bail!("character sums are implemented for su2 only");
    }
    if let Some(g) = surface_genus(f) {
        return Ok(partition::z_char_surface(g, tau)?);
    }
    if connection::catalogue_key(f) == Some("appendix") {
        return Ok(partition::z_char_appendix(tau)?);
    }
    bail!("no character formula for foam `{}`; use --method mc", f.name)
}

fn z_grid(f: &Foam, c: &Common, method: ZMethodArg, grid: &[f64], samples: usize) -> Result<Vec<ZEstimate>> {
    let reduced = foam::reduce(f)?;
    grid.iter()
        .map(|&t| match method {
            ZMethodArg::Char => char_estimate(&reduced, c.group.into(), t),
            ZMethodArg::Mc => Ok(partition::z_mc(&reduced, c.group.into(), t, samples, c.seed, c.workers)?),
        })
        .collect()
}

fn envelope(command: &str, config: Value, seed: Option<u64>, result: Value, ok: bool) -> Value {
    json!({
        "tool": "foamtor",
        "version": VERSION,
        "command": command,
        "seed": seed,
        "config": config,
        "ok": ok,
        "result": result,
    })
}

fn csv_preamble(command: &str, config: &Value, seed: Option<u64>) -> String {
    format!(
        "# foamtor {VERSION} {command} seed={} config={}\n",
        seed.map_or("none".into(), |s| s.to_string()),
        config
    )
}

fn render(command: &str, format: Format, config: Value, seed: Option<u64>, result: Value, csv: Option<String>, ok: bool) -> Report {
    let json = envelope(command, config.clone(), seed, result, ok);
    let output = match (format, csv) {
        (Format::Csv, Some(body)) => format!("{}{}", csv_preamble(command, &config, seed), body),
        _ => serde_json::to_string_pretty(&json).expect("serializable"),
    };
    Report { output, ok, json }
}

pub fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Analyze { common, samples } => analyze(common, *samples),
        Command::Ztau { common, method, tau_grid, samples } => {
            let f = load_foam(&common.foam)?;
            let grid = parse_tau_grid(tau_grid)?;
            let pts = z_grid(&f, common, *method, &grid, *samples)?;
            let config = json!({ "common": common, "method": method, "tau_grid": tau_grid, "samples": samples });
            let ok = pts.iter().all(|p| p.value > 0.0 && p.stderr >= 0.0);
            Ok(render(
                "ztau",
                common.format.unwrap_or(Format::Csv),
                config,
                Some(common.seed),
                serde_json::to_value(&pts)?,
                Some(partition::estimates_csv(&pts)),
                ok,
            ))
        }
        Command::Fit { common, input, model, method, tau_grid, samples } => {
            let pts = match input {
                Some(path) => {
                    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
                    ZEstimate::parse_csv(&text)?
                }
                None => {
                    let f = load_foam(&common.foam)?;
                    z_grid(&f, common, *method, &parse_tau_grid(tau_grid)?, *samples)?
                }
            };
            let model = match model {
                ModelArg::Auto => FitModel::Auto,
                ModelArg::Pure => FitModel::Pure,
                ModelArg::WithLog => FitModel::WithLog,
            };
            let fit = partition::fit_scaling(&pts, model)?;
            let config = json!({ "common": common, "input": input, "model": model, "method": method, "tau_grid": tau_grid, "samples": samples });
            let mut csv = String::from("tau,log_residual\n");
            for (t, r) in fit.tau_grid.iter().zip(&fit.residuals) {
                csv.push_str(&format!("{t:e},{r:e}\n"));
            }
            let seed = input.is_none().then_some(common.seed);
            Ok(render("fit", common.format.unwrap_or(Format::Json), config, seed, serde_json::to_value(&fit)?, Some(csv), true))
        }
        Command::Torsion { common, samples, completions, check, grid, quad } => {
            torsion_cmd(common, *samples, *completions, *check, *grid, *quad)
        }
        Command::Flat { common, samples } => flat(common, *samples),
        Command::Toy { tau_grid, half_width, quad, format } => {
            let grid = parse_tau_grid(tau_grid)?;
            let mut csv = String::from("tau,z\n");
            let mut values = Vec::new();
            for &t in &grid {
                let z = partition::toy_laplace(t, *half_width, *quad)?;
                csv.push_str(&format!("{t:e},{z:e}\n"));
                values.push(json!({ "tau": t, "z": z }));
            }
            let fit = partition::fit_toy(&grid, *half_width, *quad)?;
            let config = json!({ "tau_grid": tau_grid, "half_width": half_width, "quad": quad });
            let result = json!({ "values": values, "fit": fit });
            Ok(render("toy", format.unwrap_or(Format::Json), config, None, result, Some(csv), true))
        }
    }
}

fn analyze(c: &Common, samples: usize) -> Result<Report> {
    let f = load_foam(&c.foam)?;
    let cell = foam::cellular_homology(&f);
    let group: Group = c.group.into();
    let report = twisted::min_b2(&f, group, samples, c.seed, c.workers)?;
    let ok = report.consistent();
    let result = json!({
        "foam": f.name,
        "cells": [f.n_vertices(), f.n_edges(), f.n_faces()],
        "cellular_betti": cell.betti,
        "euler": cell.euler,
        "b2_0": report.b2_0,
        "predicted_omega": report.b2_0,
        "twisted": report,
    });
    let config = json!({ "common": c, "samples": samples });
    Ok(render(
        "analyze",
        c.format.unwrap_or(Format::Json),
        config,
        Some(c.seed),
        result,
        Some(report.histogram_csv()),
        ok,
    ))
}

fn flat(c: &Common, samples: usize) -> Result<Report> {
    let f = foam::reduce(&load_foam(&c.foam)?)?;
    let group: Group = c.group.into();
    let opts = FlatOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut out = Vec::new();
    let mut csv = String::from("index,residual,iterations,b0,b1,b2,tag\n");
    let mut ok = true;
    for i in 0..samples {
        let s = connection::sample_flat(&f, group, &mut rng, &opts)?;
        let r = twisted::cohomology(&f, &s.connection)?;
        ok &= s.residual < connection::FLAT_TOL && r.euler_ok && r.exactness < 1e-10 && !r.flags.ill_conditioned;
        csv.push_str(&format!("{i},{:e},{},{},{},{},{}\n", s.residual, s.iterations, r.b0, r.b1, r.b2, s.tag()));
        out.push(json!({ "sample": s, "cohomology": r }));
    }
    let config = json!({ "common": c, "samples": samples });
    Ok(render("flat", c.format.unwrap_or(Format::Json), config, Some(c.seed), Value::Array(out), Some(csv), ok))
}

fn torsion_cmd(c: &Common, samples: usize, completions: usize, check: Option<Check>, grid: usize, quad: usize) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let config = json!({ "common": c, "samples": samples, "completions": completions, "check": check, "grid": grid, "quad": quad });
    let format = c.format.unwrap_or(Format::Json);
    match check {
        Some(Check::TorusVolume) => {
            let rows = torsion::torus_volume_grid(grid, 0.1, PI - 0.1, &mut rng)?;
            let max_err = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
            let max_tor_dev = rows.iter().map(|r| (r.torsion - 1.0).abs()).fold(0.0, f64::max);
            let ok = max_err < 1e-10;
            let result = json!({ "grid": grid, "max_abs_error": max_err, "max_torsion_deviation": max_tor_dev, "rows": rows });
            Ok(render("torsion", format, config, Some(c.seed), result, Some(torsion::volume_grid_csv(&rows)), ok))
        }
        Some(Check::TorusDominant) => {
            let d = torsion::torus_dominant_part(quad)?;
            let limit = partition::torus_character_limit()?;
            let diff = (d.value - limit).abs();
            let result = json!({ "quadrature": d, "character_limit": limit, "abs_difference": diff });
            Ok(render("torsion", format, config, Some(c.seed), result, None, diff < 1e-3))
        }
        None => {
            let f = foam::reduce(&load_foam(&c.foam)?)?;
            let group: Group = c.group.into();
            let opts = FlatOptions::default();
            let flats = (0..samples)
                .map(|_| connection::sample_flat(&f, group, &mut rng, &opts))
                .collect::<foamtor_core::Result<Vec<_>>>()?;
            let base = torsion::torsion_batch(&f, &flats, &mut rng);
            let mut out = Vec::new();
            let mut csv = String::from("index,magnitude,spectral,spread,case,error\n");
            let mut ok = true;
            for (i, (s, t)) in flats.iter().zip(base).enumerate() {
                match t {
                    Ok(t) => {
                        let mut vals = vec![t.magnitude];
                        for _ in 1..completions {
                            vals.push(torsion::torsion_at(&f, s, &mut rng)?.magnitude);
                        }
                        let (lo, hi) = vals.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
                        let spread = (hi - lo) / lo;
                        ok &= spread < 1e-8;
                        csv.push_str(&format!("{i},{:e},{:e},{spread:e},{:?},\n", t.magnitude, t.spectral, t.case));
                        out.push(json!({ "torsion": t, "relative_spread": spread, "tag": s.tag() }));
                    }
                    Err(e) => {
                        csv.push_str(&format!("{i},,,,,{e}\n"));
                        out.push(json!({ "error": e.to_string(), "tag": s.tag() }));
                    }
                }
            }
            Ok(render("torsion", format, config, Some(c.seed), Value::Array(out), Some(csv), ok))
        }
    }
}

/// Run and print; the process exit code is 0 iff the checks passed, 1 if
/// they did not, 2 on errors.
pub fn main_with(cli: &Cli) -> i32 {
    match run(cli) {
        Ok(r) => {
            println!("{}", r.output.trim_end());
            if r.ok {
                0
            } else {
                eprintln!("foamtor: consistency checks failed");
                1
            }
        }
        Err(e) => {
            eprintln!("foamtor: {e:#}");
            2
        }
    }
}

pub fn parse_args<I, T>(args: I) -> Result<Cli>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(args).map_err(|e| anyhow!(e.to_string()))
}

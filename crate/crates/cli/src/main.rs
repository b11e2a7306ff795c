mod report;
mod scenefile;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gwv_core::curves::LevelFamily;
use gwv_core::identify::identify_canonical;
use gwv_core::io::{self, Curves};
use gwv_core::measure::Integrand;
use gwv_core::radial::CanonicalKind;
use gwv_core::registry::{
    identify_rows, list_scenes, run_scene, quadratic_field, quadratic_levels, smooth_disk_field, smooth_disk_levels,
    PointSet, Provenance, Row, SceneConfig, MIN_GRID, MIN_LEVELS,
};
use gwv_core::relax::{coarea_check, f_energy, ExtractOpts};
use gwv_core::varifold::{estimate_curvature, growth_factors, singular_ratio, CurvatureOpts};
use gwv_core::{GwvError, Vec2};

use report::{Output, Report};

#[derive(Parser)]
#[command(name = "gwv", version, about = "Generalized Willmore energies: measures, curve systems, Young measures, varifolds")]
struct Cli {
    /// Also dump curve/particle coordinates (label,x,y,w) for external plotting.
    #[arg(long, global = true)]
    emit_points: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Registered scenes.
    Scene {
        #[command(subcommand)]
        action: SceneAction,
    },
    /// List registered scenes with their expected values.
    List {
        #[arg(long)]
        json: bool,
    },
    /// G(Φ) of a curve system or level family file.
    CurveEnergy {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        check: Check,
        #[command(flatten)]
        out: OutArgs,
    },
    /// ⟨⟨ν, f⟩⟩ of a Young-measure file.
    YmPair {
        #[arg(long = "in")]
        input: PathBuf,
        /// norm, area, or power:P.
        #[arg(long, default_value = "norm")]
        f: String,
        #[command(flatten)]
        check: Check,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Identify the limit triplet of a canonical sequence.
    YmIdentify {
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 64)]
        hmax: usize,
        /// Write the estimated Young measure here.
        #[arg(long)]
        estimate: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// W(V) of a varifold file carrying curvature.
    VarifoldEnergy {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        check: Check,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Estimate generalized mean curvature from the first variation.
    VarifoldCurvature {
        #[arg(long = "in")]
        input: PathBuf,
        /// Write the varifold with its estimated curvature here.
        #[arg(long)]
        write: Option<PathBuf>,
        #[arg(long)]
        reg: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// ‖δV‖(B_r)/μ_V(B_r) at a point over decreasing radii.
    SingularRatio {
        #[arg(long = "in")]
        input: PathBuf,
        /// x,y
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.1, 0.05, 0.025])]
        radii: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Direct F(u) against level-integrated G over extracted contours.
    CoareaCheck {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 40)]
        levels: usize,
        /// Relative gap tolerance.
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// F̄ estimate against the Willmore energies of candidate varifolds.
    Minvu {
        /// Registered scene name or scene JSON file.
        #[arg(long)]
        scene: String,
        #[arg(long)]
        p: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// F(u) of a sampled field.
    FEnergy {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        check: Check,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Subcommand)]
enum SceneAction {
    /// Evaluate a scene and emit its report.
    Run {
        #[arg(long)]
        name: String,
        #[command(flatten)]
        res: Resolution,
        /// Absolute tolerance override, QUANTITY=VALUE (repeatable).
        #[arg(long = "tol", value_parser = parse_override)]
        tolerances: Vec<(String, f64)>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Clone)]
struct Resolution {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Report CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub(crate) struct Check {
    /// Expected value; enables the pass/fail check.
    #[arg(long, allow_hyphen_values = true)]
    pub expect: Option<f64>,
    /// Relative tolerance of the check.
    #[arg(long, default_value_t = 0.005)]
    pub rtol: f64,
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// Field JSON file.
    #[arg(long, conflicts_with = "scene")]
    field: Option<PathBuf>,
    /// Built-in smooth field: smooth or smoothdisk.
    #[arg(long)]
    scene: Option<String>,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 512)]
    grid: usize,
}

fn parse_override(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.rsplit_once('=').ok_or("expected QUANTITY=VALUE")?;
    let v: f64 = v.parse().map_err(|e| format!("bad tolerance {v:?}: {e}"))?;
    if !(v >= 0.0) {
        return Err(format!("tolerance must be nonnegative, got {v}"));
    }
    Ok((k.to_string(), v))
}

/// Configuration or input error; every error exits with status 2.
pub(crate) fn config(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::msg(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn threads() -> Result<Option<usize>> {
    match std::env::var("GWV_THREADS") {
        Ok(s) if !s.trim().is_empty() => {
            let n: usize = s
                .trim()
                .parse()
                .map_err(|_| config(format!("GWV_THREADS must be a positive integer, got {s:?}")))?;
            Ok(Some(n))
        }
        _ => Ok(None),
    }
}

pub(crate) fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| config(format!("cannot read {}: {e}", path.display())))
}

/// Maps core errors to configuration errors; numeric failures keep their message.
pub(crate) fn core<T>(r: gwv_core::Result<T>) -> Result<T> {
    r.map_err(|e| config(e.to_string()))
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(config(GwvError::BadExponent.to_string()));
    }
    Ok(())
}

pub(crate) fn value_row(quantity: &str, value: f64, check: &Check, provenance: Provenance) -> Row {
    match check.expect {
        Some(e) => Row::rel(quantity, value, e, check.rtol, provenance),
        None => Row {
            quantity: quantity.into(),
            value,
            expected: f64::NAN,
            provenance,
            tolerance: f64::NAN,
            pass: true,
        },
    }
}

fn run(cli: Cli) -> Result<bool> {
    gwv_core::sum::init_threads(threads()?).map_err(|e| config(e.to_string()))?;
    let emit = cli.emit_points;
    match cli.command {
        Command::List { json } => {
            let scenes = core(list_scenes())?;
            if json {
                println!("{}", core(io::to_json(&scenes))?);
            } else {
                for s in &scenes {
                    println!("{}  p={}  {}", s.name, s.p, s.summary);
                    for (k, v) in &s.parameters {
                        println!("    parameter {k} = {v}");
                    }
                    for e in &s.expected {
                        println!("    [{}] {} = {}", e.provenance, e.quantity, e.formula);
                    }
                }
            }
            Ok(true)
        }
        Command::Scene {
            action: SceneAction::Run {
                name,
                res,
                tolerances,
                out,
            },
        } => {
            let cfg = SceneConfig {
                p: res.p,
                grid: res.grid,
                levels: res.levels,
                samples: res.samples,
                tolerances: tolerances.into_iter().collect::<BTreeMap<_, _>>(),
                emit_points: emit,
            };
            let rep = core(run_scene(&name, &cfg))?;
            Report::new(rep.rows).with_points(rep.points).emit(&Output::new(out.out))
        }
        Command::CurveEnergy { system, p, check, out } => {
            check_p(p)?;
            let rows = match core(io::read_curves(&read(&system)?))? {
                Curves::System(s) => {
                    let g = core(s.willmore_energy(p))?;
                    vec![value_row("G(Phi)", g, &check, Provenance::Derived)]
                }
                Curves::Family(phi) => {
                    let g = core(phi.level_energy(p))?;
                    vec![value_row("G(Phi)", g, &check, Provenance::Derived)]
                }
            };
            let pts = if emit { curve_points(&system)? } else { Vec::new() };
            Report::new(rows).with_points(pts).emit(&Output::new(out.out))
        }
        Command::YmPair { input, f, check, out } => {
            let nu = core(io::read_young(&read(&input)?))?;
            let integrand = core(Integrand::parse(&f))?;
            let v = core(nu.pairing(&integrand))?;
            let rows = vec![value_row(&format!("<<nu,{f}>>"), v, &check, Provenance::Derived)];
            Report::new(rows).emit(&Output::new(out.out))
        }
        Command::YmIdentify {
            kind,
            hmax,
            estimate,
            out,
        } => {
            let kind = core(CanonicalKind::parse(&kind))?;
            let rep = core(identify_canonical(kind, hmax))?;
            if let Some(path) = estimate {
                write_file(&path, &core(io::write_young(&rep.estimate))?)?;
            }
            let mut report = Report::new(identify_rows(kind, &rep));
            if emit {
                report = report.with_points(vec![PointSet {
                    label: "lambda".into(),
                    points: rep.estimate.lambda.particles.iter().map(|q| [q.pos.x, q.pos.y, q.w]).collect(),
                }]);
            }
            report.emit(&Output::new(out.out))
        }
        Command::VarifoldEnergy { input, p, check, out } => {
            check_p(p)?;
            let v = core(io::read_varifold(&read(&input)?))?;
            let w = core(v.willmore(p, None))?;
            let rows = vec![
                value_row("W(V)", w, &check, Provenance::Derived),
                value_row("mu_V(Omega)", v.mass(), &Check { expect: None, rtol: 0.0 }, Provenance::Derived),
            ];
            Report::new(rows).emit(&Output::new(out.out))
        }
        Command::VarifoldCurvature { input, write, reg, out } => {
            let v = core(io::read_varifold(&read(&input)?))?;
            let mut opts = CurvatureOpts::default();
            if let Some(r) = reg {
                opts.reg = r;
            }
            let est = core(estimate_curvature(&v, &opts))?;
            let unchecked = Check { expect: None, rtol: 0.0 };
            let hmax = est.h.iter().map(|k| k.norm()).fold(0.0, f64::max);
            let rows = vec![
                value_row("first variation residual", est.residual, &unchecked, Provenance::Derived),
                value_row("max |H|", hmax, &unchecked, Provenance::Derived),
                value_row("equations", est.equations as f64, &unchecked, Provenance::Trivial),
            ];
            if let Some(path) = write {
                let with = core(v.clone().with_curvature(est.h.clone()))?;
                write_file(&path, &core(io::write_varifold(&with))?)?;
            }
            Report::new(rows).emit(&Output::new(out.out))
        }
        Command::SingularRatio {
            input,
            center,
            radii,
            out,
        } => {
            let c = parse_point(&center)?;
            if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
                bail!(config("radii must be positive"));
            }
            let v = core(io::read_varifold(&read(&input)?))?;
            let prof = core(singular_ratio(&v, c, &radii))?;
            let unchecked = Check { expect: None, rtol: 0.0 };
            let mut rows: Vec<Row> = radii
                .iter()
                .zip(&prof)
                .map(|(r, q)| value_row(&format!("ratio r={r}"), *q, &unchecked, Provenance::Derived))
                .collect();
            for (k, g) in growth_factors(&prof).into_iter().enumerate() {
                rows.push(value_row(&format!("growth {}", k + 1), g, &unchecked, Provenance::Derived));
            }
            Report::new(rows).emit(&Output::new(out.out))
        }
        Command::CoareaCheck { field, levels, tol, out } => {
            check_p(field.p)?;
            if levels < MIN_LEVELS {
                bail!(config(format!("levels must be at least {MIN_LEVELS}")));
            }
            let (u, t) = load_field(&field, levels)?;
            let rep = core(coarea_check(&u, field.p, &t, &ExtractOpts::default()))?;
            let unchecked = Check { expect: None, rtol: 0.0 };
            let rows = vec![
                value_row("F(u)", rep.f_direct, &unchecked, Provenance::Derived),
                value_row("int G(Phi(t)) dt", rep.f_levels, &unchecked, Provenance::Derived),
                Row::new("coarea gap", rep.gap, 0.0, tol, Provenance::Derived),
            ];
            Report::new(rows).emit(&Output::new(out.out))
        }
        Command::Minvu { scene, p, out } => {
            let path = Path::new(&scene);
            let (rows, points) = if path.extension().is_some_and(|e| e == "json") {
                match scenefile::load(path)? {
                    scenefile::SceneFile::Registered { scene, p: fp } => registered_minvu(&scene, p.or(fp), emit)?,
                    scenefile::SceneFile::Custom(c) => scenefile::run(path, &c, p, emit)?,
                }
            } else {
                registered_minvu(&scene, p, emit)?
            };
            Report::new(rows).with_points(points).emit(&Output::new(out.out))
        }
        Command::FEnergy { field, check, out } => {
            check_p(field.p)?;
            let (u, _) = load_field(&field, MIN_LEVELS)?;
            let f = core(f_energy(&u, field.p))?;
            Report::new(vec![value_row("F(u)", f, &check, Provenance::Derived)]).emit(&Output::new(out.out))
        }
    }
}

fn registered_minvu(scene: &str, p: Option<f64>, emit: bool) -> Result<(Vec<Row>, Vec<PointSet>)> {
    let cfg = SceneConfig {
        p,
        emit_points: emit,
        ..Default::default()
    };
    let rep = core(run_scene(scene, &cfg))?;
    let keep = |q: &str| {
        q.starts_with("minVu") || q.starts_with("mass inequality") || q.contains("member") || q.contains("singular")
    };
    Ok((rep.rows.into_iter().filter(|r| keep(&r.quantity)).collect(), rep.points))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn parse_point(s: &str) -> Result<Vec2> {
    let (x, y) = s.split_once(',').ok_or_else(|| config(format!("expected x,y, got {s:?}")))?;
    let x: f64 = x.trim().parse().map_err(|_| config(format!("bad coordinate {x:?}")))?;
    let y: f64 = y.trim().parse().map_err(|_| config(format!("bad coordinate {y:?}")))?;
    Ok(Vec2::new(x, y))
}

fn load_field(a: &FieldArgs, levels: usize) -> Result<(gwv_core::field::ScalarField, Vec<f64>)> {
    if a.grid < MIN_GRID {
        bail!(config(format!("grid must be at least {MIN_GRID}")));
    }
    match (&a.field, a.scene.as_deref()) {
        (Some(path), None) => {
            let u = core(io::read_field(&read(path)?))?;
            let vals: Vec<f64> = u.domain_nodes().iter().map(|&(i, j)| u.at(i, j)).collect();
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(hi > lo) {
                bail!(config("field is constant on its domain"));
            }
            let t = (0..levels)
                .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / levels as f64)
                .collect();
            Ok((u, t))
        }
        (None, Some("smooth")) => Ok((core(quadratic_field(a.grid))?, quadratic_levels(levels, 0.01))),
        (None, Some("smoothdisk")) => Ok((core(smooth_disk_field(a.grid))?, smooth_disk_levels(levels))),
        (None, Some(other)) => Err(config(format!("unknown field scene {other:?}; use smooth or smoothdisk"))),
        _ => Err(config("give --field FILE or --scene NAME")),
    }
}

fn curve_points(path: &Path) -> Result<Vec<PointSet>> {
    let systems: Vec<_> = match core(io::read_curves(&read(path)?))? {
        Curves::System(s) => vec![s],
        Curves::Family(LevelFamily { systems, .. }) => systems,
    };
    Ok(systems
        .iter()
        .enumerate()
        .flat_map(|(k, s)| {
            s.curves.iter().enumerate().map(move |(i, c)| PointSet {
                label: format!("system{k}/curve{i}"),
                points: c.samples().iter().map(|q| [q.x, q.y, c.multiplicity as f64]).collect(),
            })
        })
        .collect())
}

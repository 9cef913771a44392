//! Command-line front end: spec-file driven subcommands, verdict tables as
//! structured text, CSV series for plotting, and a JSON run manifest that
//! makes every invocation reproducible byte-for-byte.
//!
//! Exit codes: 0 = all checks passed, 1 = a constant exceeded its cap,
//! 2 = error (bad arguments, schema violations, divergence where finiteness
//! is required).

use crate::admiss::{admissibility_verdict, power_weight_space, DiagonalSystem, InputSpace};
use crate::balayage::{balayage_eval, dyadic_balayage, StripSpec, Sweep};
use crate::balayage::SectorSpec;
use crate::dyadic::{build_adapted_sequence, decompose};
use crate::embed::{
    check_classical_carleson, check_pprime_le_q, check_sectorial_plq, check_sectorial_qgep,
    check_sobolev, check_strip, check_zen_embedding, counterexample_suite, select_kernel_power,
    CheckConfig, EmbeddingVerdict, ExponentPair, SequenceCondition, SobolevMode, Witness,
};
use crate::error::{Error, Result};
use crate::hankel::{bloch_norm, check_hankel_bounded, default_bloch_grid, Symbol};
use crate::measure::{
    carleson_ratio_sup, default_probe_grid, doubling_constant, Gauge, HalfPlaneMeasure,
    RadialMeasure, SquareFamily,
};
use crate::specfile::{fmt_f64, ParsedSpec};
use crate::transforms::{paley_wiener_check, PwOutcome, TestFunction};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Everything needed to reproduce a run: the argument vector, content
/// hashes of every spec file read, the effective grid/window/tolerance
/// settings, the seed, and the tool version.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: Vec<String>,
    pub spec_hashes: BTreeMap<String, String>,
    pub grid: String,
    pub window: String,
    pub tol: f64,
    pub seed: u64,
}

#[derive(Parser, Debug)]
#[command(name = "carleson-lab", version, about = "Carleson and Laplace-Carleson embedding checks on the half-plane")]
struct Cli {
    /// Tolerance for gap-style comparisons (pw-check)
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Grid descriptor: an integer refinement density, or `lo:hi:count`
    /// for the balayage t-grid
    #[arg(long, global = true, default_value = "2", allow_hyphen_values = true)]
    grid: String,
    /// Integer index window `lo..hi` (decompose steps, dyadic scales)
    #[arg(long, global = true, default_value = "-8..8", allow_hyphen_values = true)]
    window: String,
    /// Directory for report, CSV, and manifest files
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Manifest path (default `OUT_DIR/manifest.json`)
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Recorded in the manifest; no command draws randomness at run time
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Measure diagnostics: Carleson sup, total mass, or doubling constant
    Measure {
        #[arg(long)]
        spec: PathBuf,
        /// `sup`, `mass`, or `doubling`
        #[arg(long, default_value = "sup")]
        op: String,
        /// `pow:A`, `one`, or `nu:FILE`
        #[arg(long, default_value = "pow:1")]
        gauge: String,
    },
    /// Adapted dyadic decomposition of a half-plane measure
    Decompose {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
    },
    /// Laplace-transform isometry check between the weighted time side and
    /// the weighted Bergman space
    PwCheck {
        #[arg(long)]
        nu: PathBuf,
        /// `exp:RE[:IM]`, `monexp:N:LAMBDA`, `normkernel:LAMBDA:P`,
        /// `lacunary:NMIN:P:a1,a2,...`, or `herglotz:LOGTRUNC`
        #[arg(long)]
        f: String,
    },
    /// Poisson sweep and dyadic sweep along the boundary line
    Balayage {
        #[arg(long)]
        mu: PathBuf,
    },
    /// Embedding criteria for a measure and an exponent pair
    Check {
        #[arg(long)]
        mu: PathBuf,
        /// `classical`, `zen`, `pq`, `sector-qgep`, `sector-plq`,
        /// `strip`, or `sobolev`
        #[arg(long)]
        criterion: String,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        /// Fractional order for the sobolev criterion
        #[arg(long)]
        beta: Option<f64>,
        /// Sector half-angle; inferred from the atoms when absent
        #[arg(long)]
        theta: Option<f64>,
        /// Radial reference measure (zen criterion)
        #[arg(long)]
        nu: Option<PathBuf>,
        /// Strip bounds; inferred from the support when absent
        #[arg(long)]
        alpha1: Option<f64>,
        #[arg(long)]
        alpha2: Option<f64>,
        /// Constants at or below the cap pass
        #[arg(long, default_value_t = f64::INFINITY)]
        cap: f64,
    },
    /// Boundedness certificate for the little Hankel operator of a symbol
    Hankel {
        /// `log1p`, `identity`, `kernel:LAMBDA`, or `const:RE[:IM]`
        #[arg(long)]
        symbol: String,
        #[arg(long)]
        nu: PathBuf,
        #[arg(long, default_value_t = f64::INFINITY)]
        cap: f64,
    },
    /// Admissibility verdict for a diagonal control system
    Admiss {
        #[arg(long)]
        sys: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        /// `lp:P`, `l2w:lebesgue`, `l2w:dirac0`, `l2w:power:C:ALPHA`,
        /// `l2w:alpha:A`, or `l2w:FILE`
        #[arg(long, default_value = "lp:2")]
        space: String,
        #[arg(long, default_value_t = f64::INFINITY)]
        cap: f64,
    },
    /// Square bound, cone integrals, logarithmic divergence, and the
    /// certified norm lower bound for the unbounded-embedding example
    Counterexample {
        /// Upper limit `log T` of the divergence integral
        #[arg(long, default_value_t = 100.0)]
        log_t: f64,
        /// `log` of the test-family truncation radius
        #[arg(long, default_value_t = 1e5)]
        log_trunc: f64,
    },
}

/// Run context: accumulates the report text, CSV files, and spec hashes.
struct Ctx {
    out_dir: PathBuf,
    report: String,
    csv: Vec<(String, String)>,
    hashes: BTreeMap<String, String>,
}

impl Ctx {
    fn line(&mut self, s: impl AsRef<str>) {
        self.report.push_str(s.as_ref());
        self.report.push('\n');
    }

    fn kv(&mut self, key: &str, value: impl AsRef<str>) {
        self.line(format!("{key}: {}", value.as_ref()));
    }

    fn csv(&mut self, name: &str, header: &str, rows: Vec<String>) {
        let mut body = String::from(header);
        body.push('\n');
        for r in rows {
            body.push_str(&r);
            body.push('\n');
        }
        self.csv.push((name.to_string(), body));
    }

    fn load(&mut self, path: &Path) -> Result<ParsedSpec> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Schema {
            line: 0,
            msg: format!("cannot read {}: {e}", path.display()),
        })?;
        let digest = Sha256::digest(text.as_bytes());
        self.hashes
            .insert(path.display().to_string(), format!("{digest:x}"));
        crate::specfile::parse_spec_str(&text)
    }

    fn load_halfplane(&mut self, path: &Path) -> Result<HalfPlaneMeasure> {
        match self.load(path)? {
            ParsedSpec::HalfPlane(m) => Ok(m),
            other => Err(Error::Schema {
                line: 0,
                msg: format!("{} is a {} spec, need halfplane", path.display(), other.kind()),
            }),
        }
    }

    fn load_radial(&mut self, path: &Path) -> Result<RadialMeasure> {
        match self.load(path)? {
            ParsedSpec::Radial(m) => Ok(m),
            other => Err(Error::Schema {
                line: 0,
                msg: format!("{} is a {} spec, need radial", path.display(), other.kind()),
            }),
        }
    }
}

fn fmt_complex(z: Complex64) -> String {
    format!("{} {}", fmt_f64(z.re), fmt_f64(z.im))
}

fn fmt_witness(w: &Option<Witness>) -> String {
    match w {
        None => "none".to_string(),
        Some(Witness::Square(sq)) => format!(
            "square center {} side {}",
            fmt_f64(sq.center_y),
            fmt_f64(sq.side)
        ),
        Some(Witness::Point(z)) => format!("point {}", fmt_complex(*z)),
        Some(Witness::Index(n)) => format!("index {n}"),
    }
}

fn emit_verdicts(ctx: &mut Ctx, verdicts: &[EmbeddingVerdict]) -> bool {
    let mut rows = Vec::new();
    let mut all_pass = true;
    for v in verdicts {
        all_pass &= v.pass;
        ctx.line(format!(
            "[{}] {} constant {} cap {} ({}; witness {})",
            if v.pass { "pass" } else { "FAIL" },
            v.criterion,
            fmt_f64(v.constant),
            fmt_f64(v.cap),
            v.notes,
            fmt_witness(&v.witness)
        ));
        rows.push(format!(
            "{},{},{},{}",
            v.criterion,
            fmt_f64(v.constant),
            fmt_f64(v.cap),
            v.pass
        ));
    }
    ctx.csv("verdicts.csv", "criterion,constant,cap,pass", rows);
    all_pass
}

fn emit_sequence(ctx: &mut Ctx, name: &str, c: &SequenceCondition) {
    ctx.line(format!(
        "{name}: l^{} norm {} over n = {}..{} (out-of-window bound {})",
        fmt_f64(c.s),
        fmt_f64(c.norm),
        c.n_lo,
        c.n_lo + c.values.len() as i32 - 1,
        fmt_f64(c.out_of_window_bound)
    ));
}

fn parse_window(window: &str) -> Result<(i32, i32)> {
    let err = || Error::Schema {
        line: 0,
        msg: format!("bad window `{window}`, expected lo..hi"),
    };
    let (lo, hi) = window.split_once("..").ok_or_else(err)?;
    let lo: i32 = lo.trim().parse().map_err(|_| err())?;
    let hi: i32 = hi.trim().parse().map_err(|_| err())?;
    if hi < lo {
        return Err(Error::EmptyWindow);
    }
    Ok((lo, hi))
}

fn parse_density(grid: &str) -> Result<u32> {
    grid.parse::<u32>()
        .ok()
        .filter(|&d| d >= 1)
        .ok_or_else(|| Error::Schema {
            line: 0,
            msg: format!("bad grid `{grid}`, expected a positive integer density"),
        })
}

fn parse_t_grid(grid: &str) -> Result<Vec<f64>> {
    let err = || Error::Schema {
        line: 0,
        msg: format!("bad grid `{grid}`, expected lo:hi:count"),
    };
    let parts: Vec<&str> = grid.split(':').collect();
    if parts.len() != 3 {
        return Err(err());
    }
    let lo: f64 = parts[0].parse().map_err(|_| err())?;
    let hi: f64 = parts[1].parse().map_err(|_| err())?;
    let n: usize = parts[2].parse().map_err(|_| err())?;
    if !(hi > lo) || n < 2 {
        return Err(err());
    }
    Ok((0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect())
}

fn parse_test_function(desc: &str) -> Result<TestFunction> {
    let bad = |msg: String| Error::Schema { line: 0, msg };
    let parts: Vec<&str> = desc.split(':').collect();
    let f = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| bad(format!("bad number `{s}` in `{desc}`")))
    };
    match parts.as_slice() {
        ["exp", re] => Ok(TestFunction::exponential(f(re)?)),
        ["exp", re, im] => Ok(TestFunction::Exponential(Complex64::new(f(re)?, f(im)?))),
        ["monexp", n, lambda] => Ok(TestFunction::MonomialExponential {
            n: n.parse()
                .map_err(|_| bad(format!("bad order `{n}` in `{desc}`")))?,
            lambda: Complex64::new(f(lambda)?, 0.0),
        }),
        ["normkernel", lambda, p] => Ok(TestFunction::NormalizedKernel {
            lambda: f(lambda)?,
            p: f(p)?,
        }),
        ["lacunary", n_min, p, coeffs] => Ok(TestFunction::Lacunary {
            coeffs: coeffs
                .split(',')
                .map(f)
                .collect::<Result<Vec<f64>>>()?,
            n_min: n_min
                .parse()
                .map_err(|_| bad(format!("bad index `{n_min}` in `{desc}`")))?,
            p: f(p)?,
        }),
        ["herglotz", log_trunc] => Ok(TestFunction::HerglotzPhi {
            log_trunc: f(log_trunc)?,
        }),
        _ => Err(bad(format!("unknown test function `{desc}`"))),
    }
}

fn parse_symbol(desc: &str) -> Result<Symbol> {
    let bad = |msg: String| Error::Schema { line: 0, msg };
    let parts: Vec<&str> = desc.split(':').collect();
    match parts.as_slice() {
        ["log1p"] => Ok(Symbol::Log1p),
        ["identity"] => Ok(Symbol::Identity),
        ["kernel", lambda] => Ok(Symbol::Kernel {
            lambda: lambda
                .parse()
                .map_err(|_| bad(format!("bad rate in `{desc}`")))?,
        }),
        ["const", re] => Ok(Symbol::Constant(Complex64::new(
            re.parse().map_err(|_| bad(format!("bad value in `{desc}`")))?,
            0.0,
        ))),
        ["const", re, im] => Ok(Symbol::Constant(Complex64::new(
            re.parse().map_err(|_| bad(format!("bad value in `{desc}`")))?,
            im.parse().map_err(|_| bad(format!("bad value in `{desc}`")))?,
        ))),
        _ => Err(bad(format!("unknown symbol `{desc}`"))),
    }
}

fn parse_space(ctx: &mut Ctx, desc: &str) -> Result<InputSpace> {
    let bad = |msg: String| Error::Schema { line: 0, msg };
    if let Some(p) = desc.strip_prefix("lp:") {
        let p: f64 = p
            .parse()
            .map_err(|_| bad(format!("bad exponent in `{desc}`")))?;
        if !(p >= 1.0) {
            return Err(bad(format!("exponent p = {p} must be >= 1")));
        }
        return Ok(InputSpace::Lp { p });
    }
    let Some(rest) = desc.strip_prefix("l2w:") else {
        return Err(bad(format!("unknown space `{desc}`")));
    };
    let parts: Vec<&str> = rest.split(':').collect();
    match parts.as_slice() {
        ["lebesgue"] => Ok(InputSpace::WeightedL2 {
            nu: RadialMeasure::lebesgue(),
        }),
        ["dirac0"] => Ok(InputSpace::WeightedL2 {
            nu: RadialMeasure::dirac_zero(),
        }),
        ["power", c, alpha] => {
            let c: f64 = c.parse().map_err(|_| bad(format!("bad coeff in `{desc}`")))?;
            let alpha: f64 = alpha
                .parse()
                .map_err(|_| bad(format!("bad power in `{desc}`")))?;
            Ok(InputSpace::WeightedL2 {
                nu: RadialMeasure::power_law(c, alpha),
            })
        }
        ["alpha", a] => {
            power_weight_space(a.parse().map_err(|_| bad(format!("bad alpha in `{desc}`")))?)
        }
        [file] => Ok(InputSpace::WeightedL2 {
            nu: ctx.load_radial(Path::new(file))?,
        }),
        _ => Err(bad(format!("unknown space `{desc}`"))),
    }
}

fn infer_sector(mu: &HalfPlaneMeasure, theta: Option<f64>) -> Result<SectorSpec> {
    if let Some(t) = theta {
        return Ok(SectorSpec::new(t));
    }
    let mut worst: f64 = 0.0;
    for a in &mu.atoms {
        if a.z.re <= 0.0 {
            return Err(Error::NotSectorial);
        }
        worst = worst.max((a.z.im.abs() / a.z.re).atan());
    }
    if !mu.components.is_empty() {
        return Err(Error::UnsupportedMeasure(
            "sector inference needs an atomic measure; pass --theta",
        ));
    }
    let t = 1.05 * worst + 1e-6;
    if t >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::NotSectorial);
    }
    Ok(SectorSpec::new(t))
}

fn infer_strip(
    mu: &HalfPlaneMeasure,
    alpha1: Option<f64>,
    alpha2: Option<f64>,
) -> Result<StripSpec> {
    if let (Some(a1), Some(a2)) = (alpha1, alpha2) {
        return Ok(StripSpec::new(a1, a2));
    }
    let (x_min, x_max, _) = mu.support_extent();
    if !(x_min > 0.0) || !x_max.is_finite() {
        return Err(Error::NotInStrip);
    }
    Ok(StripSpec::new(alpha1.unwrap_or(x_min), alpha2.unwrap_or(x_max)))
}

/// Sweep a square family against the gauge and emit the per-square CSV.
fn emit_square_csv(
    ctx: &mut Ctx,
    mu: &HalfPlaneMeasure,
    gauge: &Gauge,
    density: u32,
) -> Result<()> {
    let family = SquareFamily::adapted(mu, density);
    let sweep = carleson_ratio_sup(mu, gauge, &family)?;
    let rows = sweep
        .table
        .iter()
        .map(|(sq, mass, gauge, ratio)| {
            format!(
                "{},{},{},{},{}",
                fmt_f64(sq.center_y),
                fmt_f64(sq.side),
                fmt_f64(*mass),
                fmt_f64(*gauge),
                fmt_f64(*ratio)
            )
        })
        .collect();
    ctx.csv("squares.csv", "center,side,mass,gauge,ratio", rows);
    Ok(())
}

fn run_measure(ctx: &mut Ctx, cli: &Cli, spec: &Path, op: &str, gauge: &str) -> Result<bool> {
    let parsed = ctx.load(spec)?;
    ctx.kv("spec", spec.display().to_string());
    ctx.kv("kind", parsed.kind());
    match (op, parsed) {
        ("mass", ParsedSpec::HalfPlane(mu)) => {
            ctx.kv("total-mass", fmt_f64(mu.total_mass()?));
            Ok(true)
        }
        ("mass", ParsedSpec::Radial(nu)) => {
            ctx.kv("total-mass", fmt_f64(nu.total_mass()));
            Ok(true)
        }
        ("doubling", ParsedSpec::Radial(nu)) => {
            let info = doubling_constant(&nu, &default_probe_grid(), 1e6)?;
            ctx.kv("doubling-constant", fmt_f64(info.constant));
            ctx.kv("sup-location", fmt_f64(info.sup_location));
            ctx.kv("exceeds-cap", info.exceeds_cap.to_string());
            ctx.kv(
                "kernel-power-p2",
                select_kernel_power(info.constant, 2.0).to_string(),
            );
            Ok(!info.exceeds_cap)
        }
        ("sup", ParsedSpec::HalfPlane(mu)) => {
            let gauge = match gauge.split_once(':') {
                Some(("pow", a)) => Gauge::SidePower(a.parse().map_err(|_| Error::Schema {
                    line: 0,
                    msg: format!("bad gauge `{gauge}`"),
                })?),
                Some(("nu", file)) => Gauge::NuProduct(ctx.load_radial(Path::new(file))?),
                _ if gauge == "one" => Gauge::One,
                _ => {
                    return Err(Error::Schema {
                        line: 0,
                        msg: format!("unknown gauge `{gauge}`"),
                    })
                }
            };
            let density = parse_density(&cli.grid)?;
            let family = SquareFamily::adapted(&mu, density);
            let sweep = carleson_ratio_sup(&mu, &gauge, &family)?;
            ctx.kv("constant", fmt_f64(sweep.constant));
            ctx.kv(
                "witness",
                format!(
                    "square center {} side {}",
                    fmt_f64(sweep.witness.center_y),
                    fmt_f64(sweep.witness.side)
                ),
            );
            emit_square_csv(ctx, &mu, &gauge, density)?;
            Ok(true)
        }
        (op, parsed) => Err(Error::Schema {
            line: 0,
            msg: format!("op `{op}` is not defined for a {} spec", parsed.kind()),
        }),
    }
}

fn run_decompose(ctx: &mut Ctx, cli: &Cli, mu: &Path, nu: &Path) -> Result<bool> {
    let mu = ctx.load_halfplane(mu)?;
    let nu = ctx.load_radial(nu)?;
    let (lo, hi) = parse_window(&cli.window)?;
    let seq = build_adapted_sequence(&nu, lo, hi)?;
    let (_, _, y_abs) = mu.support_extent();
    let y_extent = 2.0 * y_abs.max(1.0);
    let dec = decompose(&mu, &nu, &seq, y_extent)?;
    ctx.kv("adapted-radii", seq.a.len().to_string());
    ctx.kv("doubling-constant", fmt_f64(seq.r));
    ctx.kv("separation", fmt_f64(seq.c));
    ctx.kv("parts", dec.parts.len().to_string());
    ctx.kv("truncation-loss", fmt_f64(dec.truncation_loss));
    let mut part_rows = Vec::new();
    for (i, part) in dec.parts.iter().enumerate() {
        let n = dec.n_start + i as i32;
        let mass = part.total_mass()?;
        let dom = dec.domination.get(i).copied().unwrap_or(f64::NAN);
        ctx.line(format!(
            "part {n}: mass {} line-density {} domination {}",
            fmt_f64(mass),
            fmt_f64(dec.line_density[i]),
            fmt_f64(dom)
        ));
        part_rows.push(format!(
            "{n},{},{},{}",
            fmt_f64(mass),
            fmt_f64(dec.line_density[i]),
            fmt_f64(dom)
        ));
    }
    ctx.csv("parts.csv", "n,mass,line_density,domination", part_rows);
    let log_rows = dec
        .type_log
        .iter()
        .map(|(step, generation, base, tag)| {
            format!("{step},{generation},{},{tag:?}", fmt_f64(*base))
        })
        .collect();
    ctx.csv("type_log.csv", "step,generation,interval_lo,type", log_rows);
    Ok(true)
}

fn run_pw_check(ctx: &mut Ctx, cli: &Cli, nu: &Path, f: &str) -> Result<bool> {
    let nu = ctx.load_radial(nu)?;
    let f = parse_test_function(f)?;
    match paley_wiener_check(&nu, &f)? {
        PwOutcome::Finite { lhs, rhs, gap } => {
            ctx.kv("bergman-side", fmt_f64(lhs));
            ctx.kv("time-side", fmt_f64(rhs));
            ctx.kv("relative-gap", fmt_f64(gap));
            let pass = gap <= cli.tol;
            ctx.kv("pass", pass.to_string());
            Ok(pass)
        }
        PwOutcome::BothDivergent => {
            ctx.kv("outcome", "both sides divergent (consistent)");
            ctx.kv("pass", "true");
            Ok(true)
        }
    }
}

fn run_balayage(ctx: &mut Ctx, cli: &Cli, mu: &Path) -> Result<bool> {
    let mu = ctx.load_halfplane(mu)?;
    let ts = parse_t_grid(&cli.grid)?;
    let (n_lo, n_hi) = parse_window(&cli.window)?;
    let mut rows = Vec::with_capacity(ts.len());
    for t in ts {
        let s = match balayage_eval(&mu, t)? {
            Sweep::Finite(v) => fmt_f64(v),
            Sweep::Divergent => "inf".to_string(),
        };
        let sd = dyadic_balayage(&mu, t, n_lo, n_hi, i64::MAX / 4)?;
        rows.push(format!("{},{s},{}", fmt_f64(t), fmt_f64(sd)));
    }
    ctx.kv("rows", rows.len().to_string());
    ctx.csv("balayage.csv", "t,sweep,dyadic_sweep", rows);
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn run_check(
    ctx: &mut Ctx,
    cli: &Cli,
    mu_path: &Path,
    criterion: &str,
    p: f64,
    q: f64,
    beta: Option<f64>,
    theta: Option<f64>,
    nu: Option<&PathBuf>,
    alpha1: Option<f64>,
    alpha2: Option<f64>,
    cap: f64,
) -> Result<bool> {
    let mu = ctx.load_halfplane(mu_path)?;
    let density = parse_density(&cli.grid)?;
    let cfg = CheckConfig {
        cap,
        max_density: density.max(2) * 4,
        lower_bound_density: density,
    };
    let pq = ExponentPair::new(p, q);
    ctx.kv("criterion", criterion);
    ctx.kv("p", fmt_f64(p));
    ctx.kv("q", fmt_f64(q));
    let (verdicts, csv_gauge) = match criterion {
        "classical" => (
            check_classical_carleson(&mu, p, &cfg)?,
            Gauge::SidePower(1.0),
        ),
        "zen" => {
            let nu_path = nu.ok_or(Error::Schema {
                line: 0,
                msg: "zen criterion needs --nu FILE".to_string(),
            })?;
            let nu = ctx.load_radial(nu_path)?;
            let info = doubling_constant(&nu, &default_probe_grid(), 1e6)?;
            let n = select_kernel_power(info.constant, p);
            (
                check_zen_embedding(&mu, &nu, p, n, &cfg)?,
                Gauge::NuProduct(nu),
            )
        }
        "pq" => (check_pprime_le_q(&mu, pq, &cfg)?, pq.necessary_gauge()),
        "sector-qgep" => {
            let sector = infer_sector(&mu, theta)?;
            ctx.kv("sector-half-angle", fmt_f64(sector.theta));
            (
                check_sectorial_qgep(&mu, &sector, pq, &cfg)?,
                pq.necessary_gauge(),
            )
        }
        "sector-plq" => {
            let sector = infer_sector(&mu, theta)?;
            ctx.kv("sector-half-angle", fmt_f64(sector.theta));
            let report = check_sectorial_plq(&mu, &sector, pq, &cfg)?;
            emit_sequence(ctx, "slab-sequence", &report.cond2);
            emit_sequence(ctx, "kernel-sequence", &report.cond3);
            match &report.balayage {
                Some(b) => {
                    ctx.line(format!(
                        "balayage condition: layer norm {} in L^{} with weight exponent {} (full sweep form: {})",
                        fmt_f64(b.layer_norm),
                        fmt_f64(b.s),
                        fmt_f64(b.weight_exponent),
                        match b.printed_form {
                            Sweep::Finite(v) => fmt_f64(v),
                            Sweep::Divergent => "divergent".to_string(),
                        }
                    ));
                }
                None => ctx.line("balayage condition: not applicable in this exponent window"),
            }
            (report.verdicts, pq.necessary_gauge())
        }
        "strip" => {
            let strip = infer_strip(&mu, alpha1, alpha2)?;
            ctx.kv("strip", format!("{} {}", fmt_f64(strip.alpha1), fmt_f64(strip.alpha2)));
            (check_strip(&mu, &strip, pq, &cfg)?, pq.necessary_gauge())
        }
        "sobolev" => {
            let beta = beta.ok_or(Error::Schema {
                line: 0,
                msg: "sobolev criterion needs --beta".to_string(),
            })?;
            ctx.kv("beta", fmt_f64(beta));
            let mode = match theta {
                Some(t) => SobolevMode::Sectorial { theta: t },
                None => SobolevMode::L2,
            };
            (check_sobolev(&mu, beta, pq, &mode, &cfg)?, pq.necessary_gauge())
        }
        other => {
            return Err(Error::Schema {
                line: 0,
                msg: format!("unknown criterion `{other}`"),
            })
        }
    };
    let pass = emit_verdicts(ctx, &verdicts);
    emit_square_csv(ctx, &mu, &csv_gauge, density)?;
    Ok(pass)
}

fn run_hankel(ctx: &mut Ctx, cli: &Cli, symbol: &str, nu: &Path, cap: f64) -> Result<bool> {
    let b = parse_symbol(symbol)?;
    let nu = ctx.load_radial(nu)?;
    let density = parse_density(&cli.grid)?;
    ctx.kv("symbol", symbol);
    ctx.kv("bloch-norm", fmt_f64(bloch_norm(&b, &default_bloch_grid())));
    let verdict = check_hankel_bounded(&b, &nu, density, cap)?;
    Ok(emit_verdicts(ctx, std::slice::from_ref(&verdict)))
}

fn run_admiss(
    ctx: &mut Ctx,
    cli: &Cli,
    sys: &Path,
    q: f64,
    space: &str,
    cap: f64,
) -> Result<bool> {
    let modes = match ctx.load(sys)? {
        ParsedSpec::System(m) => m,
        other => {
            return Err(Error::Schema {
                line: 0,
                msg: format!("{} is a {} spec, need system", sys.display(), other.kind()),
            })
        }
    };
    let (eigenvalues, controls) = modes.iter().copied().unzip();
    let system = DiagonalSystem::new(eigenvalues, controls, q);
    let space = parse_space(ctx, space)?;
    let density = parse_density(&cli.grid)?;
    let cfg = CheckConfig {
        cap,
        max_density: density.max(2) * 4,
        lower_bound_density: density,
    };
    let report = admissibility_verdict(&system, &space, &cfg)?;
    ctx.kv("modes", system.eigenvalues.len().to_string());
    ctx.kv("q", fmt_f64(q));
    ctx.kv("regime", &report.regime);
    ctx.kv("sufficiency-certified", report.sufficiency_certified.to_string());
    ctx.kv("total-mass", fmt_f64(report.measure.total_mass()?));
    emit_verdicts(ctx, &report.verdicts);
    ctx.kv("admissible", report.admissible.to_string());
    Ok(report.admissible)
}

fn run_counterexample(ctx: &mut Ctx, log_t: f64, log_trunc: f64) -> Result<bool> {
    let report = counterexample_suite(log_t, log_trunc)?;
    ctx.kv("max-square-ratio", fmt_f64(report.max_square_ratio));
    for (t, quadrature, closed) in &report.cone_values {
        ctx.line(format!(
            "cone integral at t = {}: quadrature {} closed form {}",
            fmt_f64(*t),
            fmt_f64(*quadrature),
            fmt_f64(*closed)
        ));
    }
    ctx.kv("divergence-log-t", fmt_f64(report.divergence_log_t));
    ctx.kv("divergence-closed", fmt_f64(report.divergence_closed));
    ctx.kv("divergence-quadrature", fmt_f64(report.divergence_quad));
    ctx.kv("truncation-log", fmt_f64(report.log_trunc));
    ctx.kv("embedding-norm-lower-bound", fmt_f64(report.lower_bound));
    let rows = report
        .square_table
        .iter()
        .map(|(h, mass, ratio)| format!("{},{},{}", fmt_f64(*h), fmt_f64(*mass), fmt_f64(*ratio)))
        .collect();
    ctx.csv("squares.csv", "side,mass,ratio", rows);
    Ok(true)
}

fn dispatch(ctx: &mut Ctx, cli: &Cli) -> Result<bool> {
    match &cli.cmd {
        Cmd::Measure { spec, op, gauge } => run_measure(ctx, cli, spec, op, gauge),
        Cmd::Decompose { mu, nu } => run_decompose(ctx, cli, mu, nu),
        Cmd::PwCheck { nu, f } => run_pw_check(ctx, cli, nu, f),
        Cmd::Balayage { mu } => run_balayage(ctx, cli, mu),
        Cmd::Check {
            mu,
            criterion,
            p,
            q,
            beta,
            theta,
            nu,
            alpha1,
            alpha2,
            cap,
        } => run_check(
            ctx,
            cli,
            mu,
            criterion,
            *p,
            *q,
            *beta,
            *theta,
            nu.as_ref(),
            *alpha1,
            *alpha2,
            *cap,
        ),
        Cmd::Hankel { symbol, nu, cap } => run_hankel(ctx, cli, symbol, nu, *cap),
        Cmd::Admiss { sys, q, space, cap } => run_admiss(ctx, cli, sys, *q, space, *cap),
        Cmd::Counterexample { log_t, log_trunc } => run_counterexample(ctx, *log_t, *log_trunc),
    }
}

/// Replay support: `carleson-lab --manifest FILE` (with no subcommand)
/// re-executes the argument vector stored in the manifest.
fn resolve_args(argv: Vec<String>) -> std::result::Result<Vec<String>, String> {
    if argv.len() == 2 && argv[0] == "--manifest" {
        let text = std::fs::read_to_string(&argv[1])
            .map_err(|e| format!("cannot read manifest {}: {e}", argv[1]))?;
        let manifest: RunManifest =
            serde_json::from_str(&text).map_err(|e| format!("bad manifest {}: {e}", argv[1]))?;
        return Ok(manifest.command);
    }
    Ok(argv)
}

/// CLI entry point; returns the process exit code.
pub fn run_with_args(argv: Vec<String>) -> i32 {
    let argv = match resolve_args(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(std::iter::once("carleson-lab".to_string()).chain(argv.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            // help/version requests are not failures
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut ctx = Ctx {
        out_dir: cli.out_dir.clone(),
        report: String::new(),
        csv: Vec::new(),
        hashes: BTreeMap::new(),
    };
    let outcome = dispatch(&mut ctx, &cli);
    let code = match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    print!("{}", ctx.report);
    if let Err(e) = write_outputs(&ctx, &cli, argv) {
        eprintln!("error: {e}");
        return 2;
    }
    code
}

fn write_outputs(ctx: &Ctx, cli: &Cli, argv: Vec<String>) -> std::io::Result<()> {
    std::fs::create_dir_all(&ctx.out_dir)?;
    std::fs::write(ctx.out_dir.join("report.txt"), &ctx.report)?;
    for (name, body) in &ctx.csv {
        std::fs::write(ctx.out_dir.join(name), body)?;
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: argv,
        spec_hashes: ctx.hashes.clone(),
        grid: cli.grid.clone(),
        window: cli.window.clone(),
        tol: cli.tol,
        seed: cli.seed,
    };
    let path = cli
        .manifest
        .clone()
        .unwrap_or_else(|| ctx.out_dir.join("manifest.json"));
    let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    body.push('\n');
    std::fs::write(path, body)
}

/// Entry point for the binary: parses `std::env::args`.
pub fn run() -> i32 {
    run_with_args(std::env::args().skip(1).collect())
}

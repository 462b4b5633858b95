use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hsmoments::bloore::{coefficient_c, derive_intermediate_exact, intermediate, MAX_DERIVE_ORDER};
use hsmoments::ensemble::{Family, Target};
use hsmoments::exactnum::{format_rat, rat_to_f64, Rat};
use hsmoments::moments::{
    assemble_moment, complex_det_moment, det_moments, hs_det_moment, mode_interval, pt_moments,
    MomentVector, MAX_PT_ORDER,
};
use hsmoments::reconstruct::{
    density_argmax, fit_poly_density, map_moments, mass_on_interval, negative_mass, poly_curve,
    stable_curve, Curve,
};
use hsmoments::sampler::{run_estimation, separability_probability, McRecord};

mod input;

const EXACT_SCHEMA: &str = "hsmoments.exact/v1";
const RECONSTRUCT_SCHEMA: &str = "hsmoments.reconstruct/v1";

#[derive(Parser)]
#[command(name = "hsmoments", version, about = "Exact and Monte Carlo moments of two-qubit determinants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Exact rational tables.
    Exact {
        #[command(subcommand)]
        kind: ExactKind,
    },
    /// Monte Carlo moment and separability estimates.
    Mc(McArgs),
    /// Density curves reconstructed from moments.
    Reconstruct(ReconstructArgs),
}

#[derive(Subcommand)]
enum ExactKind {
    /// Moments of det(rho^PT), real 4x4 states.
    PtMoments {
        #[arg(long, default_value_t = MAX_PT_ORDER)]
        max: u32,
    },
    /// Moments of det(rho).
    DetMoments {
        #[arg(long, default_value = "real")]
        family: Family,
        #[arg(long, default_value_t = 4)]
        dims: usize,
        #[arg(long, default_value_t = 15)]
        max: u32,
    },
    /// Closed-form coefficients C_{2j}(m) of the intermediate polynomial.
    Coefficients {
        #[arg(long)]
        m: u32,
    },
    /// Coefficients of the intermediate polynomial I_m(mu) in powers of mu^2.
    Intermediate {
        #[arg(long)]
        m: u32,
        /// Recompute by symbolic integration instead of reading the table.
        #[arg(long)]
        derive: bool,
    },
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value = "real")]
    family: Family,
    #[arg(long, default_value_t = 4)]
    dims: usize,
    #[arg(long, default_value = "det")]
    target: Target,
    /// Estimate raw moments 1..=orders.
    #[arg(long, default_value_t = 2)]
    orders: u32,
    /// Sample count; accepts forms like 1e6.
    #[arg(long, value_parser = parse_count, default_value = "1e6")]
    n: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Estimate the probability that det(rho^PT) >= 0 (implies --target detPT).
    #[arg(long)]
    sep: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Source {
    Exact,
    File,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Poly,
    Stable,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long, value_enum, default_value_t = Source::Exact)]
    source: Source,
    /// Moment file for `--source file`.
    path: Option<PathBuf>,
    #[arg(long, default_value = "detPT")]
    target: Target,
    #[arg(long, default_value = "real")]
    family: Family,
    #[arg(long, value_enum, default_value_t = Method::Poly)]
    method: Method,
    /// Polynomial degree (default: all available moments, at most 24).
    #[arg(long)]
    degree: Option<usize>,
    /// Stable-approximation order (default: all available moments, at most 24).
    #[arg(long)]
    alpha: Option<u32>,
    #[arg(long, default_value_t = 201)]
    points: usize,
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a count"))?;
    if x < 0.0 || x.fract() != 0.0 || x > u64::MAX as f64 {
        return Err(format!("{s:?} is not a whole number of samples"));
    }
    Ok(x as u64)
}

/// Keyed exact values, rendered as JSON or CSV.
struct Table {
    kind: &'static str,
    params: Value,
    key: &'static str,
    rows: Vec<(u32, Rat)>,
}

impl Table {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|(k, v)| json!({ self.key: k, "exact": format_rat(v), "float": rat_to_f64(v) }))
                    .collect();
                let doc = json!({
                    "schema": EXACT_SCHEMA,
                    "kind": self.kind,
                    "params": self.params,
                    "rows": rows,
                });
                pretty(&doc)
            }
            Format::Csv => {
                let mut out = format!("{},exact,float\n", self.key);
                for (k, v) in &self.rows {
                    out.push_str(&format!("{k},{},{:e}\n", format_rat(v), rat_to_f64(v)));
                }
                out
            }
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn exact(kind: &ExactKind) -> Result<Table> {
    Ok(match *kind {
        ExactKind::PtMoments { max } => {
            if !(1..=MAX_PT_ORDER).contains(&max) {
                bail!("pt-moments supports orders 1..={MAX_PT_ORDER}, got {max}");
            }
            Table {
                kind: "pt-moments",
                params: json!({ "max": max }),
                key: "order",
                rows: (1..=max).map(|m| Ok((m, assemble_moment(m)?))).collect::<Result<_>>()?,
            }
        }
        ExactKind::DetMoments { family, dims, max } => {
            if max == 0 {
                bail!("det-moments needs --max >= 1");
            }
            let moment: fn(Family, u32) -> Rat = match (family, dims) {
                (_, 4) => |f, m| hs_det_moment(f, m),
                (Family::Complex, 6) => |_, m| complex_det_moment(6, m),
                _ => bail!("det-moments supports any family at --dims 4 and complex at --dims 6"),
            };
            Table {
                kind: "det-moments",
                params: json!({ "family": family, "dims": dims, "max": max }),
                key: "order",
                rows: (1..=max).map(|m| (m, moment(family, m))).collect(),
            }
        }
        ExactKind::Coefficients { m } => {
            if m == 0 {
                bail!("coefficients supports m >= 1");
            }
            Table {
                kind: "coefficients",
                params: json!({ "m": m }),
                key: "j",
                rows: (0..=3.min(m))
                    .map(|j| Ok((j, coefficient_c(j, m)?)))
                    .collect::<Result<_>>()?,
            }
        }
        ExactKind::Intermediate { m, derive } => {
            let poly = if derive {
                derive_intermediate_exact(m)
                    .with_context(|| format!("--derive supports m in 0..={MAX_DERIVE_ORDER}"))?
            } else {
                intermediate(m).context("intermediate supports m in 0..=9")?
            };
            Table {
                kind: "intermediate",
                params: json!({ "m": m, "derived": derive }),
                key: "power",
                rows: poly.coeffs().iter().enumerate().map(|(j, c)| (2 * j as u32, c.clone())).collect(),
            }
        }
    })
}

fn mc(args: &McArgs, format: Format) -> Result<String> {
    let record = if args.sep {
        if args.dims != 4 {
            bail!("--sep needs --dims 4");
        }
        let (_, _, acc) = separability_probability(args.family, args.n, args.seed, args.threads)?;
        McRecord::new(args.family, 4, Target::DetPt, &acc)
    } else {
        let (_, acc) = run_estimation(
            args.target,
            args.family,
            args.dims,
            args.orders,
            args.n,
            args.seed,
            args.threads,
        )?;
        McRecord::new(args.family, args.dims, args.target, &acc)
    };
    Ok(match format {
        Format::Json => pretty(&serde_json::to_value(&record)?),
        Format::Csv => {
            let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
            let mut out = String::from("quantity,order,estimate,std_error,exact,z_score\n");
            for m in &record.moments {
                out.push_str(&format!(
                    "moment,{},{:e},{:e},{},{}\n",
                    m.order,
                    m.estimate,
                    m.std_error,
                    m.exact_if_known.clone().unwrap_or_default(),
                    opt(m.z_score)
                ));
            }
            if let Some(s) = &record.separability {
                out.push_str(&format!("separable,,{:e},{:e},,\n", s.estimate, s.std_error));
            }
            out
        }
    })
}

fn source_moments(args: &ReconstructArgs, wanted: usize) -> Result<MomentVector> {
    match args.source {
        Source::File => {
            let path = args.path.as_ref().context("--source file needs a moment file path")?;
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            input::parse_moment_file(&text)
        }
        Source::Exact => match args.target {
            Target::DetPt => {
                if args.family != Family::Real {
                    bail!("exact detPT moments exist for the real family only");
                }
                if wanted > MAX_PT_ORDER as usize {
                    bail!("exact detPT moments are available for orders 1..={MAX_PT_ORDER}");
                }
                Ok(pt_moments(wanted as u32)?)
            }
            Target::Det => Ok(det_moments(args.family, wanted as u32)),
        },
    }
}

fn default_order(args: &ReconstructArgs) -> usize {
    match (args.source, args.target) {
        (Source::Exact, Target::DetPt) => MAX_PT_ORDER as usize,
        _ => 24,
    }
}

fn reconstruct(args: &ReconstructArgs, format: Format) -> Result<String> {
    let requested = match args.method {
        Method::Poly => args.degree,
        Method::Stable => args.alpha.map(|a| a as usize),
    };
    let wanted = requested.unwrap_or_else(|| default_order(args));
    let mv = source_moments(args, wanted)?;
    let order = requested.unwrap_or(wanted.min(mv.order()));
    let mapped = map_moments(&mv)?;
    let (a, b) = mv.support().clone();

    let mut summary = serde_json::Map::new();
    if mv.order() >= 2 {
        let (m1, m2) = (mv.moment(1).expect("order >= 2"), mv.moment(2).expect("order >= 2"));
        let variance = &m2 - &m1 * &m1;
        if let Ok((lo, hi)) = mode_interval(rat_to_f64(&m1), rat_to_f64(&variance)) {
            summary.insert("mode_interval".into(), json!([lo, hi]));
        }
    }
    let (label, curve): (&str, Curve) = match args.method {
        Method::Poly => {
            let pd = fit_poly_density(&mapped, order)?;
            let zero = Rat::from_integer(0.into());
            let lo = if a < zero && zero < b { zero } else { a.clone() };
            let mass = mass_on_interval(&pd, (&lo, &b))?;
            summary.insert(
                "interval_mass".into(),
                json!({ "interval": [format_rat(&lo), format_rat(&b)], "exact": format_rat(&mass), "float": rat_to_f64(&mass) }),
            );
            let nm = negative_mass(&pd)?;
            summary.insert("negative_mass".into(), json!({ "below": nm.below, "above": nm.above }));
            summary.insert("argmax".into(), json!(density_argmax(&pd)));
            ("degree", poly_curve(&pd, args.points))
        }
        Method::Stable => {
            let curve = stable_curve(&mapped, order as u32, args.points)?;
            // First point of the highest plateau.
            let best = (0..curve.x.len())
                .reduce(|i, j| if curve.density[j] > curve.density[i] { j } else { i })
                .map(|i| curve.x[i]);
            summary.insert("argmax".into(), json!(best));
            ("alpha", curve)
        }
    };
    let method = match args.method {
        Method::Poly => "poly",
        Method::Stable => "stable",
    };
    Ok(match format {
        Format::Json => pretty(&json!({
            "schema": RECONSTRUCT_SCHEMA,
            "method": method,
            label: order,
            "support": [format_rat(&a), format_rat(&b)],
            "summary": summary,
            "curve": curve,
        })),
        Format::Csv => {
            let mut out = format!("# schema: {RECONSTRUCT_SCHEMA}\n# method: {method}\n# {label}: {order}\n");
            for (k, v) in &summary {
                out.push_str(&format!("# {k}: {v}\n"));
            }
            out.push_str(&curve.to_csv());
            out
        }
    })
}

fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Exact { kind } => Ok(exact(kind)?.render(cli.format)),
        Command::Mc(args) => mc(args, cli.format),
        Command::Reconstruct(args) => reconstruct(args, cli.format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|text| match &cli.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

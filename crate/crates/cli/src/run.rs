use std::path::Path;

use biharmonic_core::blowdown::{blowdown_trend, pohozaev_residual};
use biharmonic_core::energy::{energy_profile, negative_energy_profile};
use biharmonic_core::exponents::{exceeds_joseph_lundgren, is_singular_solution_stable, min_stable_dimension};
use biharmonic_core::navierbvp::{trace_branch, BranchControl, BranchPoint};
use biharmonic_core::radialode::{integrate_with, log_grid, shoot_entire, IntegrationConfig, Termination};
use biharmonic_core::{ExtReal, Nonlinearity, ProblemParams};
use serde::Serialize;

use crate::args::{
    BlowdownArgs, BranchArgs, Cli, Command, EnergyArgs, ExponentsArgs, FieldInput, Format, Output, PohozaevArgs,
    Problem, ShootArgs, VerifyArgs,
};
use crate::checks::{verify_all, Status};
use crate::error::{CliError, CliResult};
use crate::fieldio::{field_csv, read_field, FieldSpec};
use crate::output::{csv_table, ext_real, fixed, fixed_opt, fixed_pair, fmt_f64, json_text, Sink};

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Exponents(a) => exponents(a),
        Command::Shoot(a) => shoot(a),
        Command::Energy(a) => energy(a),
        Command::Blowdown(a) => blowdown(a),
        Command::Pohozaev(a) => pohozaev(a),
        Command::Branch(a) => branch(a),
        Command::VerifyAll(a) => verify(a),
    }
}

fn problem(p: &Problem) -> CliResult<ProblemParams> {
    ProblemParams::new(p.n, p.p).map_err(|e| CliError::Usage(e.to_string()))
}

fn positive(name: &str, x: f64) -> CliResult<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Usage(format!(
            "--{name} must be a finite positive number, got {x}"
        )))
    }
}

fn emit(
    out: &Output,
    default: Format,
    csv: impl FnOnce() -> CliResult<String>,
    json: impl FnOnce() -> CliResult<String>,
) -> CliResult<()> {
    let text = match out.format_or(default) {
        Format::Csv => csv()?,
        Format::Json => json()?,
    };
    let sink = out.output.clone().map(Sink::File).unwrap_or_default();
    sink.write_all(&text)
}

/// `lo:hi` with `0 < lo < hi`.
fn parse_window(flag: &str, s: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::Usage(format!("--{flag} expects lo:hi, got '{s}'"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// `lo:hi:count` with `count ≥ 2`.
fn parse_radii(s: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Usage(format!("--radii expects lo:hi:count, got '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let (lo, hi) = parse_window("radii", &format!("{}:{}", parts[0], parts[1])).map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count < 2 {
        return Err(bad());
    }
    Ok(log_grid(lo, hi, count))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ExponentsReport {
    n: u32,
    #[serde(serialize_with = "fixed")]
    p: f64,
    #[serde(serialize_with = "fixed")]
    gamma: f64,
    #[serde(rename = "K0", serialize_with = "fixed")]
    k0: f64,
    #[serde(rename = "pS", serialize_with = "ext_real")]
    p_s: ExtReal,
    #[serde(rename = "pC", serialize_with = "ext_real")]
    p_c: ExtReal,
    #[serde(serialize_with = "fixed")]
    hardy_rellich: f64,
    #[serde(serialize_with = "fixed")]
    alpha: f64,
    #[serde(serialize_with = "fixed")]
    beta: f64,
    #[serde(rename = "cNP", serialize_with = "fixed")]
    c_np: f64,
    #[serde(rename = "J1", serialize_with = "fixed")]
    j1: f64,
    #[serde(rename = "J2", serialize_with = "fixed")]
    j2: f64,
    #[serde(serialize_with = "fixed")]
    omega: f64,
    supercritical: bool,
    /// `p K0 ≤ n²(n-4)²/16`; null outside the supercritical range.
    singular_stable: Option<bool>,
    exceeds_joseph_lundgren: bool,
    /// Smallest dimension in which `u_s` is stable for this `p`.
    min_stable_dimension: Option<u32>,
}

fn exponents(args: ExponentsArgs) -> CliResult<()> {
    let pr = problem(&args.problem)?;
    let d = pr.derived();
    let report = ExponentsReport {
        n: pr.n(),
        p: pr.p(),
        gamma: d.gamma,
        k0: d.k0,
        p_s: d.p_s,
        p_c: d.p_c,
        hardy_rellich: d.hardy_rellich,
        alpha: d.alpha,
        beta: d.beta,
        c_np: d.c_np,
        j1: d.j1,
        j2: d.j2,
        omega: d.omega,
        supercritical: pr.is_supercritical(),
        singular_stable: is_singular_solution_stable(pr).ok(),
        exceeds_joseph_lundgren: exceeds_joseph_lundgren(pr),
        min_stable_dimension: min_stable_dimension(pr.p()).ok(),
    };
    emit(
        &args.out,
        Format::Json,
        || {
            let opt_bool = |b: Option<bool>| b.map(|b| b.to_string()).unwrap_or_default();
            let cells: [(&str, String); 17] = [
                ("n", report.n.to_string()),
                ("p", fmt_f64(report.p)),
                ("gamma", fmt_f64(report.gamma)),
                ("K0", fmt_f64(report.k0)),
                ("pS", fmt_f64(report.p_s.to_f64())),
                ("pC", fmt_f64(report.p_c.to_f64())),
                ("hardyRellich", fmt_f64(report.hardy_rellich)),
                ("alpha", fmt_f64(report.alpha)),
                ("beta", fmt_f64(report.beta)),
                ("cNP", fmt_f64(report.c_np)),
                ("J1", fmt_f64(report.j1)),
                ("J2", fmt_f64(report.j2)),
                ("omega", fmt_f64(report.omega)),
                ("supercritical", report.supercritical.to_string()),
                ("singularStable", opt_bool(report.singular_stable)),
                ("exceedsJosephLundgren", report.exceeds_joseph_lundgren.to_string()),
                (
                    "minStableDimension",
                    report.min_stable_dimension.map(|d| d.to_string()).unwrap_or_default(),
                ),
            ];
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(cells.iter().map(|c| c.0))?;
            w.write_record(cells.iter().map(|c| c.1.as_str()))?;
            let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
        },
        || json_text(&report),
    )
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Event {
    kind: &'static str,
    #[serde(serialize_with = "fixed_opt")]
    r: Option<f64>,
}

fn event(t: Termination) -> Event {
    let kind = match t {
        Termination::ReachedEnd => "reachedEnd",
        Termination::Crossing { .. } => "crossing",
        Termination::BlowUp { .. } => "blowUp",
    };
    Event { kind, r: t.radius() }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ShootReport {
    n: u32,
    #[serde(serialize_with = "fixed")]
    p: f64,
    #[serde(serialize_with = "fixed")]
    a: f64,
    #[serde(serialize_with = "fixed")]
    b_star: f64,
    #[serde(serialize_with = "fixed_pair")]
    bracket: (f64, f64),
    #[serde(serialize_with = "fixed_opt")]
    decay_exponent: Option<f64>,
    #[serde(serialize_with = "fixed_opt")]
    tail_amplitude_ratio: Option<f64>,
    events: Vec<Event>,
    samples: usize,
}

fn shoot(args: ShootArgs) -> CliResult<()> {
    let pr = problem(&args.problem)?;
    let tol = positive("tol", args.tol)?;
    let r_max = positive("r-max", args.r_max)?;
    let cfg = IntegrationConfig {
        rel_tol: tol,
        abs_tol: 1e-2 * tol,
        r_max,
        ..IntegrationConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let (field, report) = match args.b {
        Some(b) => {
            let nl = if args.negative_exponent {
                Nonlinearity::NegativePower { p: pr.p() }
            } else {
                Nonlinearity::LaneEmden { p: pr.p() }
            };
            let run = integrate_with(pr, nl, args.a, b, &cfg)?;
            let report = ShootReport {
                n: pr.n(),
                p: pr.p(),
                a: args.a,
                b_star: b,
                bracket: (b, b),
                decay_exponent: None,
                tail_amplitude_ratio: None,
                events: vec![event(run.termination)],
                samples: run.field.len(),
            };
            (run.field, report)
        }
        None => {
            let s = shoot_entire(pr, args.a, &cfg)?;
            let report = ShootReport {
                n: pr.n(),
                p: pr.p(),
                a: s.a,
                b_star: s.b_star,
                bracket: s.bracket,
                decay_exponent: Some(s.decay_exponent),
                tail_amplitude_ratio: Some(s.tail_amplitude_ratio),
                events: vec![event(s.termination)],
                samples: s.field.len(),
            };
            (s.field, report)
        }
    };
    emit(&args.out, Format::Json, || field_csv(&field), || json_text(&report))
}

fn load(
    input: &FieldInput,
    nonlinearity: impl FnOnce(ProblemParams) -> Nonlinearity,
) -> CliResult<biharmonic_core::RadialField> {
    let params = problem(&input.problem)?;
    let spec = FieldSpec {
        params,
        nonlinearity: nonlinearity(params),
        regular: !input.singular,
        tolerance: positive("tol", input.tol)?,
    };
    read_field(&input.input, &spec)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct EnergyReport {
    monotone: bool,
    satisfies_lower_bound: bool,
    #[serde(serialize_with = "fixed")]
    min_defect: f64,
    samples: usize,
}

fn energy(args: EnergyArgs) -> CliResult<()> {
    let radii = parse_radii(&args.radii)?;
    let negative = args.negative_exponent;
    let field = load(&args.field, |pr| {
        if negative {
            Nonlinearity::NegativePower { p: pr.p() }
        } else {
            Nonlinearity::LaneEmden { p: pr.p() }
        }
    })?;
    let prof = if negative {
        negative_energy_profile(&field, &radii)?
    } else {
        energy_profile(&field, &radii)?
    };
    let report = EnergyReport {
        monotone: prof.is_monotone(),
        satisfies_lower_bound: prof.satisfies_lower_bound(),
        min_defect: prof.min_defect(),
        samples: prof.radii.len(),
    };
    emit(
        &args.out,
        Format::Json,
        || {
            let rows = (0..prof.radii.len()).map(|i| vec![prof.radii[i], prof.e[i], prof.de[i], prof.lower_bound[i]]);
            csv_table(&["r", "E", "dE", "lowerBound"], rows)
        },
        || json_text(&report),
    )
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TrendPoint {
    #[serde(serialize_with = "fixed")]
    lambda: f64,
    #[serde(serialize_with = "fixed")]
    deviation: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BlowdownReport {
    #[serde(serialize_with = "fixed_pair")]
    window: (f64, f64),
    trend: Vec<TrendPoint>,
}

fn blowdown(args: BlowdownArgs) -> CliResult<()> {
    let (r1, r2) = parse_window("window", &args.window)?;
    for &l in &args.lambdas {
        positive("lambdas", l)?;
    }
    let field = load(&args.field, |pr| Nonlinearity::LaneEmden { p: pr.p() })?;
    let trend = blowdown_trend(&field, &args.lambdas, r1, r2)?;
    emit(
        &args.out,
        Format::Json,
        || csv_table(&["lambda", "deviation"], trend.iter().map(|&(l, d)| vec![l, d])),
        || {
            json_text(&BlowdownReport {
                window: (r1, r2),
                trend: trend
                    .iter()
                    .map(|&(lambda, deviation)| TrendPoint { lambda, deviation })
                    .collect(),
            })
        },
    )
}

#[derive(Clone, Serialize)]
#[serde(rename_all = "camelCase")]
struct BalancePoint {
    #[serde(rename = "R", serialize_with = "fixed")]
    radius: f64,
    #[serde(serialize_with = "fixed")]
    lhs: f64,
    #[serde(serialize_with = "fixed")]
    rhs: f64,
    #[serde(serialize_with = "fixed")]
    relative: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PohozaevReport {
    points: Vec<BalancePoint>,
    #[serde(serialize_with = "fixed")]
    max_relative: f64,
}

fn pohozaev(args: PohozaevArgs) -> CliResult<()> {
    let lambda = args.lambda.map(|l| positive("lambda", l)).transpose()?;
    let field = load(&args.field, |pr| match lambda {
        Some(lambda) => Nonlinearity::Navier { lambda, p: pr.p() },
        None => Nonlinearity::LaneEmden { p: pr.p() },
    })?;
    let points = args
        .radii
        .iter()
        .map(|&r| {
            let rep = pohozaev_residual(&field, r)?;
            Ok(BalancePoint {
                radius: r,
                lhs: rep.lhs,
                rhs: rep.rhs,
                relative: rep.relative(),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let max_relative = points.iter().map(|p| p.relative).fold(0.0, f64::max);
    emit(
        &args.out,
        Format::Json,
        || {
            csv_table(
                &["R", "lhs", "rhs", "relative"],
                points.iter().map(|p| vec![p.radius, p.lhs, p.rhs, p.relative]),
            )
        },
        || {
            json_text(&PohozaevReport {
                points: points.clone(),
                max_relative,
            })
        },
    )
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BranchReport {
    n: u32,
    #[serde(serialize_with = "fixed")]
    p: f64,
    cells: usize,
    #[serde(serialize_with = "fixed")]
    lambda_star: f64,
    fold_index: Option<usize>,
    points: usize,
}

fn branch(args: BranchArgs) -> CliResult<()> {
    let pr = problem(&args.problem)?;
    if args.grid < 4 {
        return Err(CliError::Usage(format!("--grid must be at least 4, got {}", args.grid)));
    }
    let control = BranchControl {
        cells: args.grid,
        max_arclength: positive("max-arclength", args.max_arclength)?,
        ..BranchControl::default()
    };
    let br = trace_branch(pr, &control)?;
    if let Some(dir) = &args.fields_dir {
        write_fields(dir, &br.points)?;
    }
    let report = BranchReport {
        n: pr.n(),
        p: pr.p(),
        cells: br.cells,
        lambda_star: br.lambda_star,
        fold_index: br.fold_index,
        points: br.points.len(),
    };
    emit(
        &args.out,
        Format::Json,
        || {
            csv_table(
                &["lambda", "supNorm", "eigMin"],
                br.points.iter().map(|pt| vec![pt.lambda, pt.sup_norm, pt.eig_min]),
            )
        },
        || json_text(&report),
    )
}

/// `point_XXXX.csv` per branch point plus `points.csv` listing the `λ` each
/// field solves exactly (`refinedLambda`, the value to pass to `pohozaev`).
fn write_fields(dir: &Path, points: &[BranchPoint]) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    for (i, pt) in points.iter().enumerate() {
        Sink::File(dir.join(format!("point_{i:04}.csv"))).write_all(&field_csv(&pt.field)?)?;
    }
    let index = csv_table(
        &["index", "lambda", "refinedLambda", "supNorm", "eigMin"],
        points
            .iter()
            .enumerate()
            .map(|(i, pt)| vec![i as f64, pt.lambda, pt.refined_lambda(), pt.sup_norm, pt.eig_min]),
    )?;
    Sink::File(dir.join("points.csv")).write_all(&index)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CheckRow {
    id: &'static str,
    status: &'static str,
    detail: String,
}

fn verify(args: VerifyArgs) -> CliResult<()> {
    let pr = problem(&args.problem)?;
    if args.grid < 4 {
        return Err(CliError::Usage(format!("--grid must be at least 4, got {}", args.grid)));
    }
    let checks = verify_all(pr.n(), pr.p(), args.grid);
    let text = if args.json {
        let rows: Vec<CheckRow> = checks
            .iter()
            .map(|c| CheckRow {
                id: c.id,
                status: c.status.label(),
                detail: c.detail.clone(),
            })
            .collect();
        json_text(&rows)?
    } else {
        let mut s = format!("verification for n = {}, p = {}\n", pr.n(), pr.p());
        for c in &checks {
            s.push_str(&c.line());
            s.push('\n');
        }
        s
    };
    Sink::Stdout.write_all(&text)?;
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    if failed > 0 {
        Err(CliError::Verification {
            failed,
            total: checks.len(),
        })
    } else {
        Ok(())
    }
}

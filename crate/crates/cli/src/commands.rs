use std::fs;
use std::path::Path;

use lipfree::c0_embed::{
    build_net_index, check_net, verify_sandwich, CellSummary, EmbeddingReport, NetCheck,
};
use lipfree::free_norm::{free_norm, mass_balance, FreeVector};
use lipfree::generate::random_function;
use lipfree::lipschitz::LipFunction;
use lipfree::metric::{
    four_point_property, is_ultrametric, require_ultrametric, validate_metric, FourPointCheck,
    PointedMetricSpace, UltrametricCheck, ViolationReport,
};
use lipfree::separator::LevelSummary;
use lipfree::separator::{
    proper_separator, ultrametric_separator, SeparatorCheck, SeparatorKind, SeparatorResult,
    EQUALITY_TOLERANCE,
};
use lipfree::ultra_ops::{convergence_experiment, coupled_schedule};
use lipfree::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::document::SpaceDocument;
use crate::output::{g17, to_json};
use crate::{Command, Common};

pub enum Failure {
    /// Bad arguments or unreadable input.
    Usage(String),
    /// The input was understood but a check failed.
    Domain(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotUltrametric { .. } | Error::Certificate(_) | Error::Construction(_) => {
                Failure::Domain(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

struct Input {
    path: String,
    digest: String,
    doc: SpaceDocument,
    space: PointedMetricSpace,
}

fn load(path: &Path) -> Result<Input, Failure> {
    let bytes = fs::read(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| Failure::Usage(format!("{} is not UTF-8", path.display())))?;
    let doc = SpaceDocument::parse(text).map_err(Failure::Usage)?;
    let space = doc.to_space().map_err(Failure::Usage)?;
    Ok(Input {
        path: path.display().to_string(),
        digest: hex::encode(Sha256::digest(&bytes)),
        doc,
        space,
    })
}

/// Loads and insists on a valid metric.
fn load_metric(path: &Path) -> Result<Input, Failure> {
    let input = load(path)?;
    let report = validate_metric(&input.space);
    if !report.valid {
        return Err(Failure::Domain(format!(
            "input is not a metric: {}",
            serde_json::to_string(&report.witnesses).unwrap_or_default()
        )));
    }
    Ok(input)
}

#[derive(Serialize)]
struct RunReport<'a, T> {
    tool: &'static str,
    version: &'static str,
    command: Value,
    input: InputEcho<'a>,
    results: T,
}

#[derive(Serialize)]
struct InputEcho<'a> {
    path: &'a str,
    sha256: &'a str,
    format: &'static str,
    points: usize,
}

fn emit(common: &Common, text: &str) -> Outcome {
    match &common.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report<T: Serialize>(common: &Common, input: &Input, command: Value, results: T) -> Outcome {
    let r = RunReport {
        tool: "lipfree",
        version: env!("CARGO_PKG_VERSION"),
        command,
        input: InputEcho {
            path: &input.path,
            sha256: &input.digest,
            format: if input.doc.is_dendrogram() {
                "dendrogram"
            } else {
                "matrix"
            },
            points: input.space.len(),
        },
        results,
    };
    emit(common, &to_json(&r))
}

fn point(space: &PointedMetricSpace, label: &str) -> Result<usize, Failure> {
    space
        .index_of(label.trim())
        .ok_or_else(|| Failure::Usage(format!("unknown point {label:?}")))
}

/// Parses `label:value,label:value`. Repeated labels add up.
fn parse_assignments(space: &PointedMetricSpace, spec: &str) -> Result<Vec<(usize, f64)>, Failure> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (label, value) = item
                .rsplit_once(':')
                .ok_or_else(|| Failure::Usage(format!("expected label:value, got {item:?}")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("bad number in {item:?}")))?;
            if !v.is_finite() {
                return Err(Failure::Usage(format!("value in {item:?} is not finite")));
            }
            Ok((point(space, label)?, v))
        })
        .collect()
}

fn parse_schedule(spec: &str) -> Result<Vec<(f64, f64)>, Failure> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let parsed = item.split_once(':').and_then(|(r, n)| {
                Some((r.trim().parse::<f64>().ok()?, n.trim().parse::<f64>().ok()?))
            });
            match parsed {
                Some((r, n)) if r > 0.0 && n > 0.0 && r.is_finite() && n.is_finite() => Ok((r, n)),
                _ => Err(Failure::Usage(format!(
                    "schedule entries are r:n with positive numbers, got {item:?}"
                ))),
            }
        })
        .collect()
}

#[derive(Serialize)]
struct Labeled {
    label: String,
    value: f64,
}

fn labeled(space: &PointedMetricSpace, values: &[f64]) -> Vec<Labeled> {
    space
        .points()
        .map(|i| Labeled {
            label: space.label(i),
            value: values[i],
        })
        .collect()
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { common } => validate(&common),
        Command::Norm { common, masses } => norm(&common, &masses),
        Command::Separate {
            common,
            x,
            y,
            ultra,
            proper,
            stop_size,
        } => separate(&common, &x, &y, ultra, proper, stop_size),
        Command::Project {
            common,
            masses,
            schedule,
        } => project(&common, &masses, schedule.as_deref()),
        Command::Embed {
            common,
            epsilon,
            function,
            random,
        } => embed(&common, epsilon, function.as_deref(), random),
    }
}

#[derive(Serialize)]
struct ValidateResults {
    metric: ViolationReport,
    ultrametric: UltrametricCheck,
    four_point: FourPointCheck,
}

fn validate(common: &Common) -> Outcome {
    let input = load(&common.input)?;
    let results = ValidateResults {
        metric: validate_metric(&input.space),
        ultrametric: is_ultrametric(&input.space),
        four_point: four_point_property(&input.space),
    };
    let valid = results.metric.valid;
    report(common, &input, json!({ "name": "validate" }), results)?;
    if valid {
        Ok(())
    } else {
        Err(Failure::Domain("input violates the metric axioms".into()))
    }
}

#[derive(Serialize)]
struct PlanRow {
    source: String,
    target: String,
    flow: f64,
}

#[derive(Serialize)]
struct NormResults {
    value: f64,
    balanced: Vec<Labeled>,
    plan: Vec<PlanRow>,
    potential: Vec<Labeled>,
    gap: f64,
    potential_lip: f64,
}

fn norm(common: &Common, masses: &str) -> Outcome {
    let input = load_metric(&common.input)?;
    let space = &input.space;
    let mu = FreeVector::from_masses(space, parse_assignments(space, masses)?)?;
    let cert = free_norm(&mu)?;
    let balanced = mass_balance(&mu);
    let results = NormResults {
        value: cert.value,
        balanced: balanced
            .masses()
            .map(|(i, a)| Labeled {
                label: space.label(i),
                value: a,
            })
            .collect(),
        plan: cert
            .plan
            .iter()
            .map(|e| PlanRow {
                source: space.label(e.source),
                target: space.label(e.target),
                flow: e.flow,
            })
            .collect(),
        potential: labeled(space, cert.potential.values()),
        gap: cert.gap,
        potential_lip: cert.potential_lip,
    };
    report(
        common,
        &input,
        json!({ "name": "norm", "masses": masses }),
        results,
    )
}

#[derive(Serialize)]
struct ProfileView {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    max_slope: f64,
}

#[derive(Serialize)]
struct ConstructionView {
    levels: Vec<LevelSummary>,
    profiles: Vec<ProfileView>,
    remaining: Vec<usize>,
    endpoint_hits: Vec<String>,
}

#[derive(Serialize)]
struct SeparateResults {
    kind: SeparatorKind,
    x: String,
    y: String,
    distance: f64,
    h: Vec<Labeled>,
    lip_bound: f64,
    flat_radius: f64,
    flat_exclusive: bool,
    iterations: usize,
    c_bound: f64,
    check: SeparatorCheck,
    holds: bool,
    construction: Option<ConstructionView>,
}

fn separator_view(space: &PointedMetricSpace, res: &SeparatorResult) -> SeparateResults {
    let check = res.check();
    let construction = res.construction.as_ref().map(|c| ConstructionView {
        levels: c.levels.iter().map(|l| l.summary()).collect(),
        profiles: c
            .profiles
            .iter()
            .map(|p| ProfileView {
                breakpoints: p.breakpoints_f64(),
                values: p.values_f64(),
                max_slope: lipfree::separator::to_f64(&p.max_slope()),
            })
            .collect(),
        remaining: c.remaining.clone(),
        endpoint_hits: c.endpoint_hits.iter().map(|&i| space.label(i)).collect(),
    });
    SeparateResults {
        kind: res.kind,
        x: space.label(res.x),
        y: space.label(res.y),
        distance: space.d(res.x, res.y),
        h: labeled(space, res.h.values()),
        lip_bound: res.lip_bound,
        flat_radius: res.flat_radius,
        flat_exclusive: res.flat_exclusive,
        iterations: res.iterations,
        c_bound: res.c_bound,
        holds: check.holds(EQUALITY_TOLERANCE),
        check,
        construction,
    }
}

fn separate(
    common: &Common,
    x: &str,
    y: &str,
    ultra: bool,
    proper: bool,
    stop_size: usize,
) -> Outcome {
    let input = load_metric(&common.input)?;
    let space = &input.space;
    let (xi, yi) = (point(space, x)?, point(space, y)?);
    if xi == yi {
        return Err(Failure::Usage(format!("cannot separate {x:?} from itself")));
    }
    let use_ultra = ultra || (!proper && is_ultrametric(space).holds);
    let res = if use_ultra {
        ultrametric_separator(space, xi, yi)?
    } else {
        proper_separator(space, xi, yi, stop_size)?
    };
    let results = separator_view(space, &res);
    let holds = results.holds;
    let mode = if ultra {
        "ultra"
    } else if proper {
        "proper"
    } else {
        "auto"
    };
    report(
        common,
        &input,
        json!({ "name": "separate", "x": x, "y": y, "mode": mode, "stop_size": stop_size }),
        results,
    )?;
    if holds {
        Ok(())
    } else {
        Err(Failure::Domain("separator certificate failed".into()))
    }
}

fn project(common: &Common, masses: &str, schedule: Option<&str>) -> Outcome {
    let input = load_metric(&common.input)?;
    let space = &input.space;
    let mu = FreeVector::from_masses(space, parse_assignments(space, masses)?)?;
    let schedule = match schedule {
        Some(s) => parse_schedule(s)?,
        None => coupled_schedule(8),
    };
    if schedule.is_empty() {
        return Err(Failure::Usage("empty schedule".into()));
    }
    require_ultrametric(space)?;
    let rows = convergence_experiment(space, &mu, &schedule)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Usage(e.to_string());
    w.write_record(["r", "n", "err", "bound", "supported"])
        .map_err(io)?;
    for row in &rows {
        w.write_record([
            g17(row.r),
            g17(row.n),
            g17(row.err),
            g17(row.bound),
            row.supported.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    emit(common, &String::from_utf8(bytes).expect("CSV is UTF-8"))?;
    if rows.iter().all(|r| r.within_bound()) {
        Ok(())
    } else {
        Err(Failure::Domain("convergence bound violated".into()))
    }
}

#[derive(Serialize)]
struct FunctionReport {
    values: Vec<Labeled>,
    report: EmbeddingReport,
    holds: bool,
}

#[derive(Serialize)]
struct EmbedResults {
    epsilon: f64,
    entries: usize,
    cells: Vec<CellSummary>,
    net: NetCheck,
    functions: Vec<FunctionReport>,
    all_hold: bool,
}

fn embed(common: &Common, epsilon: f64, function: Option<&str>, random: Option<usize>) -> Outcome {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Failure::Usage(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let input = load_metric(&common.input)?;
    let space = &input.space;
    let functions: Vec<LipFunction> = match (function, random) {
        (Some(spec), _) => {
            let mut values = vec![0.0; space.len()];
            for (i, v) in parse_assignments(space, spec)? {
                values[i] += v;
            }
            vec![LipFunction::new(space, values)?]
        }
        (None, Some(count)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
            (0..count)
                .map(|_| random_function(&mut rng, space))
                .collect()
        }
        (None, None) => {
            return Err(Failure::Usage("pass --function or --random".into()));
        }
    };
    let net = build_net_index(space, epsilon)?;
    let net_check = check_net(&net);
    let mut reports = Vec::with_capacity(functions.len());
    for f in &functions {
        let report = verify_sandwich(f, &net)?;
        reports.push(FunctionReport {
            values: labeled(space, f.values()),
            holds: report.holds(),
            report,
        });
    }
    let all_hold = net_check.holds() && reports.iter().all(|r| r.holds);
    let results = EmbedResults {
        epsilon,
        entries: net.entries.len(),
        cells: net.summary(),
        net: net_check,
        functions: reports,
        all_hold,
    };
    let command = json!({
        "name": "embed",
        "epsilon": epsilon,
        "function": function,
        "random": random,
        "seed": common.seed,
    });
    report(common, &input, command, results)?;
    if all_hold {
        Ok(())
    } else {
        Err(Failure::Domain("sandwich inequality failed".into()))
    }
}

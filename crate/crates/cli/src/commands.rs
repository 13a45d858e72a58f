use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use contrastive_vc::bounds::{
    bound_report, hemisphere::bound_json, hemisphere_experiment, hemisphere_monte_carlo, jl_check,
    BoundRequest, VectorLayout,
};
use contrastive_vc::io::{parse_points, parse_query_file, parse_sim_config, QueryFile};
use contrastive_vc::realize::{realize, NumericConfig, RealizeConfig};
use contrastive_vc::seed::derive_seed;
use contrastive_vc::shatter::construct::{verify, Construction, Family};
use contrastive_vc::shatter::{is_shattered, vc_search, ShatterConfig, UnknownPolicy};
use contrastive_vc::sim::{sweep, SweepConfig};
use contrastive_vc::{HypothesisClass, Query, Status};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cli::{
    BoundsArgs, ClassArgs, ClassName, ConstructArgs, FamilyName, JlArgs, Layout, OnUnknown,
    RealizeArgs, SearchArgs, ShatterArgs, SimulateArgs, VcdimArgs, WendelArgs,
};
use crate::error::CliError;

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Exit status when `--strict` meets an UNKNOWN-dominated answer.
pub const EXIT_UNKNOWN: i32 = 3;
/// Exit status when a construction fails its own verification.
pub const EXIT_VERIFY_FAILED: i32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: usize,
}

pub enum Payload {
    Json(Value),
    /// CSV body; the manifest goes on a leading comment line.
    Csv(String),
}

pub struct Outcome {
    pub payload: Payload,
    /// Subcommand configuration with defaults filled in.
    pub config: Value,
    pub inputs: Vec<InputDigest>,
    pub exit: i32,
}

impl Outcome {
    fn json(config: Value, result: Value) -> Self {
        Outcome {
            payload: Payload::Json(result),
            config,
            inputs: vec![],
            exit: 0,
        }
    }

    fn with_input(mut self, input: InputDigest) -> Self {
        self.inputs.push(input);
        self
    }

    fn exit_if(mut self, cond: bool, code: i32) -> Self {
        if cond {
            self.exit = code;
        }
        self
    }
}

pub struct Globals {
    pub seed: u64,
    pub strict: bool,
}

fn read_input(path: &Path) -> CliResult<(String, InputDigest)> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => CliError::NotFound(path.to_path_buf()),
        _ => CliError::Read {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
    })?;
    let digest = InputDigest {
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        bytes: bytes.len(),
    };
    let text = String::from_utf8(bytes).map_err(|_| CliError::Read {
        path: path.to_path_buf(),
        message: "not valid UTF-8".into(),
    })?;
    Ok((text, digest))
}

fn config<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn realize_config(search: &SearchArgs, seed: u64) -> RealizeConfig {
    RealizeConfig {
        line_cap: search.line_cap,
        tree_cap: search.tree_cap,
        branch_cap: search.branch_cap,
        exact_odd_p: search.exact_odd_p,
        numeric: NumericConfig {
            restarts: search.restarts,
            iterations: search.iterations,
            seed,
            ..NumericConfig::default()
        },
        ..RealizeConfig::default()
    }
}

fn require<T>(value: Option<T>, flag: &str, what: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required for {what}")))
}

fn reject(present: bool, flag: &str, what: &str) -> CliResult<()> {
    if present {
        Err(CliError::Usage(format!("--{flag} does not apply to {what}")))
    } else {
        Ok(())
    }
}

fn class_from_args(a: &ClassArgs) -> CliResult<HypothesisClass> {
    let name = a
        .class
        .to_possible_value()
        .map_or_else(String::new, |v| v.get_name().to_string());
    let class = match a.class {
        ClassName::Lp => {
            reject(a.alpha.is_some(), "alpha", &name)?;
            HypothesisClass::Lp {
                p: require(a.p, "p", &name)?,
                d: require(a.d, "d", &name)?,
            }
        }
        ClassName::Cosine => {
            reject(a.p.is_some() || a.alpha.is_some(), "p/--alpha", &name)?;
            HypothesisClass::Cosine { d: require(a.d, "d", &name)? }
        }
        ClassName::SeparatedL2 => {
            reject(a.p.is_some(), "p", &name)?;
            HypothesisClass::SeparatedL2 {
                d: require(a.d, "d", &name)?,
                alpha: require(a.alpha, "alpha", &name)?,
            }
        }
        other => {
            reject(a.p.is_some() || a.d.is_some() || a.alpha.is_some(), "p/--d/--alpha", &name)?;
            match other {
                ClassName::Arbitrary => HypothesisClass::Arbitrary,
                ClassName::Metric => HypothesisClass::Metric,
                ClassName::Tree => HypothesisClass::Tree,
                _ => HypothesisClass::ClassPartition,
            }
        }
    };
    Ok(class.validate()?)
}

fn load_query_file(path: &Path) -> CliResult<(QueryFile, HypothesisClass, InputDigest)> {
    let (text, digest) = read_input(path)?;
    let file = parse_query_file(&text)?;
    let class = file
        .class
        .ok_or_else(|| CliError::Usage("the query file must name a class".into()))?;
    Ok((file, class, digest))
}

pub fn realize_cmd(args: &RealizeArgs, g: &Globals) -> CliResult<Outcome> {
    let (file, class, digest) = load_query_file(&args.input)?;
    let labels = file
        .labels
        .as_ref()
        .ok_or_else(|| CliError::Usage("the query file must carry labels".into()))?;
    let verdict = realize(&file.queries, labels, class, &realize_config(&args.search, g.seed))?;
    let result = json!({
        "class": class.to_string(),
        "queries": file.queries.len(),
        "verdict": verdict.to_json(),
    });
    Ok(Outcome::json(config(args), result)
        .with_input(digest)
        .exit_if(g.strict && verdict.status() == Status::Unknown, EXIT_UNKNOWN))
}

pub fn shatter_cmd(args: &ShatterArgs, g: &Globals) -> CliResult<Outcome> {
    let (file, class, digest) = load_query_file(&args.input)?;
    let cfg = ShatterConfig {
        labeling_cap: args.labeling_cap,
        unknown: args.on_unknown.map(|u| match u {
            OnUnknown::Refute => UnknownPolicy::TreatAsRefuted,
            OnUnknown::Abort => UnknownPolicy::Abort,
        }),
        natarajan: args.label_pair.map(|pair| vec![pair; file.queries.len()]),
        realize: realize_config(&args.search, g.seed),
    };
    let report = is_shattered(&file.queries, class, &cfg)?;
    let mut result = report.to_json();
    result["class"] = json!(class.to_string());
    Ok(Outcome::json(config(args), result)
        .with_input(digest)
        .exit_if(g.strict && report.refuter_status == Some(Status::Unknown), EXIT_UNKNOWN))
}

pub fn vcdim_cmd(args: &VcdimArgs, g: &Globals) -> CliResult<Outcome> {
    let class = class_from_args(&args.class)?;
    let cfg = ShatterConfig {
        realize: realize_config(&args.search, g.seed),
        ..ShatterConfig::default()
    };
    let report = vc_search(args.n, class, args.max_queries, args.budget, g.seed, &cfg)?;
    let mut result = report.to_json();
    result["class"] = json!(class.to_string());
    result["n"] = json!(args.n);
    result["unknown_counts_as_refuted"] = json!(class.may_be_unknown());
    Ok(Outcome::json(config(args), result))
}

pub fn construct_cmd(args: &ConstructArgs) -> CliResult<Outcome> {
    let what = args
        .family
        .to_possible_value()
        .map_or_else(String::new, |v| format!("the {} family", v.get_name()));
    let family = match args.family {
        FamilyName::Lp => Family::Lp {
            n: args.n,
            d: require(args.d, "d", &what)?,
            p: require(args.p, "p", &what)?,
        },
        FamilyName::Cosine => {
            reject(args.p.is_some(), "p", &what)?;
            Family::Cosine {
                n: args.n,
                d: require(args.d, "d", &what)?,
            }
        }
        FamilyName::Arbitrary | FamilyName::Class => {
            reject(args.p.is_some() || args.d.is_some(), "p/--d", &what)?;
            match args.family {
                FamilyName::Arbitrary => Family::Arbitrary { n: args.n },
                _ => Family::Class { n: args.n },
            }
        }
    };
    let construction = Construction::new(family)?;
    let qs = construction.queries();
    let mut result = json!({
        "family": family.to_string(),
        "n": qs.n(),
        "queries": qs.len(),
        "expected_size": construction.expected_size(),
        "query_list": qs.queries().iter().map(Query::to_tuple).collect::<Vec<_>>(),
    });
    let mut failed = false;
    if args.verify {
        let report = verify(&construction)?;
        failed = !report.all_verified();
        if let (Value::Object(out), Value::Object(extra)) = (&mut result, report.to_json()) {
            out.extend(extra);
        }
    }
    Ok(Outcome::json(config(args), result).exit_if(failed, EXIT_VERIFY_FAILED))
}

pub fn bounds_cmd(args: &BoundsArgs) -> CliResult<Outcome> {
    let class = class_from_args(&ClassArgs {
        class: args.setting,
        p: args.p,
        d: args.d,
        alpha: args.alpha,
    })?;
    let report = bound_report(BoundRequest {
        class,
        constant_d: args.constant_d,
        n: args.n,
        k: args.k,
        eps: args.eps,
        delta: args.delta,
        agnostic: args.agnostic,
    })?;
    Ok(Outcome::json(config(args), report.to_json()))
}

pub fn wendel_cmd(args: &WendelArgs, g: &Globals) -> CliResult<Outcome> {
    let bound = bound_json(args.dim, args.m)?;
    let mut inputs = vec![];
    let (report, layout) = match &args.vectors {
        Some(path) => {
            let (text, digest) = read_input(path)?;
            inputs.push(digest);
            let vectors = parse_points(&text)?;
            if vectors.len() != args.m || vectors[0].len() != args.dim {
                return Err(CliError::Usage(format!(
                    "expected {} vectors of dimension {}, the file has {} of dimension {}",
                    args.m,
                    args.dim,
                    vectors.len(),
                    vectors[0].len()
                )));
            }
            let report = hemisphere_monte_carlo(&vectors, args.trials, derive_seed(g.seed, 1), args.check_duality)?;
            (report, "file")
        }
        None => {
            let (layout, name) = match args.layout {
                Layout::Generic => (VectorLayout::Generic, "generic"),
                Layout::Repeated => (VectorLayout::Repeated, "repeated"),
                Layout::Collinear => (VectorLayout::Collinear, "collinear"),
            };
            let report = hemisphere_experiment(layout, args.dim, args.m, args.trials, g.seed, args.check_duality)?;
            (report, name)
        }
    };
    let value = bound["value"].as_f64().unwrap_or(f64::NAN);
    let mut result = report.to_json();
    result["dim"] = json!(args.dim);
    result["m"] = json!(args.m);
    result["layout"] = json!(layout);
    result["bound"] = bound;
    result["within_half_width"] = json!((report.miss_probability - value).abs() <= report.half_width);
    result["below_bound"] = json!(report.miss_probability <= value + report.half_width);
    let mut outcome = Outcome::json(config(args), result);
    outcome.inputs = inputs;
    Ok(outcome)
}

pub fn jl_cmd(args: &JlArgs, g: &Globals) -> CliResult<Outcome> {
    let (text, digest) = read_input(&args.points)?;
    let points = parse_points(&text)?;
    let report = jl_check(&points, args.beta, args.d1, g.seed)?;
    let mut result = report.to_json();
    result["n"] = json!(points.len());
    result["dim"] = json!(points[0].len());
    Ok(Outcome::json(config(args), result).with_input(digest))
}

#[derive(Serialize)]
struct CsvRow {
    seed: u64,
    n: usize,
    d_model: usize,
    p: u32,
    k: usize,
    m_train: usize,
    train_err: f64,
    test_err: f64,
    gap: f64,
    predicted_eps: f64,
    ratio: f64,
}

fn sweep_csv(cfg: &SweepConfig) -> CliResult<String> {
    let result = sweep(cfg)?;
    let mut w = csv::Writer::from_writer(vec![]);
    for r in &result.runs {
        w.serialize(CsvRow {
            seed: r.seed,
            n: r.n,
            d_model: r.model_dim,
            p: r.p,
            k: r.k,
            m_train: r.m_train,
            train_err: r.train_error,
            test_err: r.test_error,
            gap: r.gap,
            predicted_eps: r.predicted_eps,
            ratio: r.ratio,
        })
        .expect("in-memory CSV write");
    }
    let bytes = w.into_inner().expect("in-memory CSV flush");
    Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
}

pub fn simulate_cmd(args: &SimulateArgs) -> CliResult<Outcome> {
    let (text, digest) = read_input(&args.config)?;
    let cfg = parse_sim_config(&text)?;
    let body = sweep_csv(&cfg)?;
    let mut resolved = config(args);
    resolved["sweep"] = serde_json::to_value(&cfg).expect("sweep config serializes");
    Ok(Outcome {
        payload: Payload::Csv(body),
        config: resolved,
        inputs: vec![digest],
        exit: 0,
    })
}

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fractrunc::rayleigh::OptimizerConfig;
use fractrunc::{Error, ExperimentPlan, Params, QuadratureConfig, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const DEFAULT_OUT: &str = "fractrunc-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Parameter overrides shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Dimension N.
    #[arg(long = "dim")]
    pub n: Option<usize>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct ParamsBlock {
    n: usize,
    s: f64,
    p: f64,
    alpha: f64,
}

impl ParamsBlock {
    fn build(self) -> Result<Params> {
        if self.s == 1.0 {
            Params::local(self.n, self.p, self.alpha)
        } else {
            Params::new(self.n, self.s, self.p, self.alpha)
        }
    }
}

/// Everything a run needs, after merging the config file with the flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: Params,
    pub quad: QuadratureConfig<f64>,
    pub plan: Option<ExperimentPlan<f64>>,
    pub optimizer: OptimizerConfig<f64>,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

fn invalid(e: impl std::fmt::Display) -> Error {
    Error::InvalidConfig(e.to_string())
}

fn block<T: for<'de> Deserialize<'de>>(v: &Value, key: &str) -> Result<Option<T>> {
    v.get(key).map(|b| serde_json::from_value(b.clone()).map_err(|e| invalid(format!("{key}: {e}")))).transpose()
}

/// Reads the config file. A file holding a bare experiment plan (it has a
/// `q_list` at top level) is accepted as `{"plan": ...}`.
fn read_file(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(invalid)?;
    if !v.is_object() {
        return Err(invalid("config must be a JSON object"));
    }
    Ok(if v.get("q_list").is_some() { serde_json::json!({ "plan": v }) } else { v })
}

pub struct Overrides<'a> {
    pub config: Option<&'a Path>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub tol: Option<f64>,
    pub formats: Option<Vec<Format>>,
    pub params: &'a ParamArgs,
}

pub fn resolve(o: Overrides<'_>) -> Result<RunConfig> {
    let file = match o.config {
        Some(p) => read_file(p)?,
        None => Value::Object(Default::default()),
    };
    // params first, so a malformed block surfaces as a constraint error
    let plan_params: Option<ParamsBlock> = match file.get("plan") {
        Some(plan) => block(plan, "params")?,
        None => None,
    };
    let file_params: Option<ParamsBlock> = block(&file, "params")?;
    let mut pb = file_params.or(plan_params).unwrap_or(ParamsBlock { n: 1, s: 0.3, p: 2.0, alpha: 0.0 });
    if let Some(n) = o.params.n {
        pb.n = n;
    }
    if let Some(s) = o.params.s {
        pb.s = s;
    }
    if let Some(p) = o.params.p {
        pb.p = p;
    }
    if let Some(a) = o.params.alpha {
        pb.alpha = a;
    }
    let params = pb.build()?;
    plan_params.map(ParamsBlock::build).transpose()?;

    let mut quad: QuadratureConfig<f64> = block(&file, "quad")?.unwrap_or_default();
    let mut plan: Option<ExperimentPlan<f64>> = block(&file, "plan")?;
    let mut optimizer: OptimizerConfig<f64> = block(&file, "optimizer")?.unwrap_or_default();
    if let Some(t) = o.tol {
        quad = quad.with_tol(t);
    }
    quad.validate()?;
    if let Some(plan) = plan.as_mut() {
        plan.params = params;
        if let Some(t) = o.tol {
            plan.quad = plan.quad.with_tol(t);
        }
        plan.validate()?;
    }
    optimizer.quad = quad;

    let out = o
        .out
        .or_else(|| file.get("out").and_then(Value::as_str).map(PathBuf::from))
        .or_else(|| std::env::var_os("FRACTRUNC_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let formats = match o.formats {
        Some(f) if !f.is_empty() => f,
        _ => block(&file, "formats")?.unwrap_or_else(|| vec![Format::Csv, Format::Json, Format::Svg]),
    };
    let workers = o.workers.or(block(&file, "workers")?);
    if workers == Some(0) {
        return Err(invalid("workers must be at least 1"));
    }
    Ok(RunConfig { params, quad, plan, optimizer, out, formats, workers })
}

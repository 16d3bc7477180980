//! Browser bindings: simulate a study-1 replicate, select variables with Vita
//! or Boruta, and compare block correlations against their expected curve.
//!
//! Every entry point takes and returns JSON text. The `*_json` functions are
//! plain Rust so they can be tested natively.

use rfselect::metrics::{evaluate, EvalRecord};
use rfselect::selection::{boruta_select, vita_select, Decision};
use rfselect::simgen::{expected_block_correlation, gen_study1, Study1Config};
use rfselect::{Dataset, HyperParams};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoRequest {
    pub k: usize,
    pub p: usize,
    pub n: usize,
    pub seed: u64,
    pub replicate: u64,
    pub num_trees: usize,
    pub mtry_prop: f64,
    pub replace: bool,
    pub sample_fraction: f64,
    /// Defaults to `1 / n`.
    pub min_node_size_prop: Option<f64>,
    pub alpha: f64,
    pub max_iter: usize,
}

impl Default for DemoRequest {
    fn default() -> Self {
        DemoRequest {
            k: 10,
            p: 200,
            n: 100,
            seed: 1,
            replicate: 0,
            num_trees: 300,
            mtry_prop: 0.1,
            replace: true,
            sample_fraction: 0.632,
            min_node_size_prop: None,
            alpha: 0.05,
            max_iter: 30,
        }
    }
}

impl DemoRequest {
    fn data(&self) -> Result<Dataset, String> {
        let cfg = Study1Config { k: self.k, p: self.p, n: self.n, seed: self.seed, ..Default::default() };
        Ok(gen_study1(&cfg, self.replicate).map_err(|e| e.to_string())?.data)
    }

    fn hyper(&self) -> HyperParams {
        HyperParams {
            num_trees: self.num_trees,
            mtry_prop: self.mtry_prop,
            replace: self.replace,
            sample_fraction: self.sample_fraction,
            min_node_size_prop: self.min_node_size_prop.unwrap_or(1.0 / self.n.max(1) as f64),
            seed: self.seed,
        }
    }
}

#[derive(Serialize)]
struct VitaVariable<'a> {
    name: &'a str,
    importance: f64,
    pvalue: f64,
    adjusted: f64,
    selected: bool,
    truth: bool,
}

#[derive(Serialize)]
struct VitaResponse<'a> {
    variables: Vec<VitaVariable<'a>>,
    selected: Vec<&'a str>,
    null_size: usize,
    evaluation: EvalRecord,
}

#[derive(Serialize)]
struct BorutaVariable<'a> {
    name: &'a str,
    decision: Decision,
    hits: usize,
    mean_importance: f64,
    truth: bool,
}

#[derive(Serialize)]
struct BorutaResponse<'a> {
    variables: Vec<BorutaVariable<'a>>,
    selected: Vec<&'a str>,
    iterations_run: usize,
    trees_grown: usize,
    evaluation: EvalRecord,
}

#[derive(Serialize)]
struct CurvePoint {
    j: usize,
    expected: f64,
    observed: f64,
}

fn parse(request: &str) -> Result<DemoRequest, String> {
    if request.trim().is_empty() {
        return Ok(DemoRequest::default());
    }
    serde_json::from_str(request).map_err(|e| format!("bad request: {e}"))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn vita_json(request: &str) -> Result<String, String> {
    let req = parse(request)?;
    let data = req.data()?;
    let truth = data.truth().map(<[bool]>::to_vec).unwrap_or_default();
    let res = vita_select(&data, &req.hyper(), req.alpha).map_err(|e| e.to_string())?;
    let mut chosen = vec![false; data.p()];
    for &j in &res.selected {
        chosen[j] = true;
    }
    let names = data.names();
    let variables = (0..data.p())
        .map(|j| VitaVariable {
            name: &names[j],
            importance: res.importance[j],
            pvalue: res.pvalues[j],
            adjusted: res.adjusted[j],
            selected: chosen[j],
            truth: truth[j],
        })
        .collect();
    to_json(&VitaResponse {
        variables,
        selected: res.selected.iter().map(|&j| names[j].as_str()).collect(),
        null_size: res.null_size,
        evaluation: evaluate(&res.selected, &truth),
    })
}

pub fn boruta_json(request: &str) -> Result<String, String> {
    let req = parse(request)?;
    let data = req.data()?;
    let truth = data.truth().map(<[bool]>::to_vec).unwrap_or_default();
    let res = boruta_select(&data, &req.hyper(), req.alpha, req.max_iter).map_err(|e| e.to_string())?;
    let names = data.names();
    let confirmed = res.confirmed();
    let variables = (0..data.p())
        .map(|j| BorutaVariable {
            name: &names[j],
            decision: res.decision[j],
            hits: res.hits[j],
            mean_importance: res.mean_importance[j],
            truth: truth[j],
        })
        .collect();
    to_json(&BorutaResponse {
        variables,
        selected: confirmed.iter().map(|&j| names[j].as_str()).collect(),
        iterations_run: res.iterations_run,
        trees_grown: res.trees_grown,
        evaluation: evaluate(&confirmed, &truth),
    })
}

fn corr(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Correlation of block member 1 with member `j`, averaged over the bases of
/// one replicate, against the population value.
pub fn curve_json(request: &str) -> Result<String, String> {
    let req = parse(request)?;
    let bases = Study1Config::default().n_base;
    let req = DemoRequest { p: req.p.max(bases * req.k), ..req };
    let data = req.data()?;
    let rho1 = expected_block_correlation(1, req.k).map_err(|e| e.to_string())?;
    let points: Result<Vec<CurvePoint>, String> = (2..=req.k)
        .map(|j| {
            let observed =
                (0..bases).map(|q| corr(data.column(q), data.column((j - 1) * bases + q))).sum::<f64>() / bases as f64;
            let expected = rho1 * expected_block_correlation(j, req.k).map_err(|e| e.to_string())?;
            Ok(CurvePoint { j, expected, observed })
        })
        .collect();
    to_json(&points?)
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Runs Vita on a simulated replicate.
#[wasm_bindgen]
pub fn run_vita(request: &str) -> Result<String, JsError> {
    js(vita_json(request))
}

/// Runs Boruta on a simulated replicate.
#[wasm_bindgen]
pub fn run_boruta(request: &str) -> Result<String, JsError> {
    js(boruta_json(request))
}

#[wasm_bindgen]
pub fn block_curve(request: &str) -> Result<String, JsError> {
    js(curve_json(request))
}

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::HyperParams;
use crate::selection::{DEFAULT_BORUTA_ALPHA, DEFAULT_MAX_ITER, DEFAULT_VITA_ALPHA};
use crate::simgen::{Study1Config, Study2Config};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Vita,
    Boruta,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Vita => "vita",
            Method::Boruta => "boruta",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "vita" => Ok(Method::Vita),
            "boruta" => Ok(Method::Boruta),
            _ => Err(Error::InvalidConfig(format!("unknown method `{s}`"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The four tunables varied one at a time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hyper {
    MtryProp,
    Replace,
    SampleFraction,
    MinNodeSizeProp,
}

impl Hyper {
    pub const ALL: [Hyper; 4] = [Hyper::MtryProp, Hyper::Replace, Hyper::SampleFraction, Hyper::MinNodeSizeProp];

    pub fn name(self) -> &'static str {
        match self {
            Hyper::MtryProp => "mtry.prop",
            Hyper::Replace => "replace",
            Hyper::SampleFraction => "sample.fraction",
            Hyper::MinNodeSizeProp => "min.node.size.prop",
        }
    }

    pub fn parse(s: &str) -> Result<Hyper> {
        Hyper::ALL
            .into_iter()
            .find(|h| h.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown hyperparameter `{s}`")))
    }

    pub fn is_numeric(self) -> bool {
        self != Hyper::Replace
    }
}

impl fmt::Display for Hyper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A minimal node size proportion, either a number or `"1/n"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeSizeProp {
    Prop(f64),
    Text(String),
}

impl NodeSizeProp {
    pub fn per_observation() -> NodeSizeProp {
        NodeSizeProp::Text("1/n".into())
    }

    fn value(&self) -> Result<CellValue> {
        match self {
            NodeSizeProp::Prop(v) => Ok(CellValue::Num(*v)),
            NodeSizeProp::Text(t) if t == "1/n" => Ok(CellValue::PerObservation),
            NodeSizeProp::Text(t) => {
                Err(Error::InvalidConfig(format!("min_node_size_prop `{t}` is neither a number nor \"1/n\"")))
            }
        }
    }
}

/// Value of one grid cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CellValue {
    Num(f64),
    Bool(bool),
    /// `1 / n`, resolved per dataset.
    PerObservation,
}

impl CellValue {
    pub fn label(&self) -> String {
        match self {
            CellValue::Num(v) => format!("{v:?}"),
            CellValue::Bool(true) => "TRUE".into(),
            CellValue::Bool(false) => "FALSE".into(),
            CellValue::PerObservation => "1/n".into(),
        }
    }

    /// Numeric value for `n` observations; `None` for booleans.
    pub fn numeric(&self, n: usize) -> Option<f64> {
        match self {
            CellValue::Num(v) => Some(*v),
            CellValue::Bool(_) => None,
            CellValue::PerObservation => Some(1.0 / n as f64),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub hyper: Hyper,
    pub value: CellValue,
}

impl Cell {
    pub fn label(&self) -> String {
        self.value.label()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub mtry_prop: Vec<f64>,
    pub replace: Vec<bool>,
    pub sample_fraction: Vec<f64>,
    pub min_node_size_prop: Vec<NodeSizeProp>,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            mtry_prop: vec![0.014, 0.1, 0.2, 0.33, 0.5],
            replace: vec![true, false],
            sample_fraction: vec![0.2, 0.4, 0.632, 0.8, 1.0],
            min_node_size_prop: vec![
                NodeSizeProp::Prop(0.01),
                NodeSizeProp::Prop(0.05),
                NodeSizeProp::Prop(0.1),
                NodeSizeProp::Prop(0.2),
                NodeSizeProp::per_observation(),
            ],
        }
    }
}

/// Settings held fixed while another hyperparameter varies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Defaults {
    pub mtry_prop: f64,
    pub replace: bool,
    pub sample_fraction: f64,
    pub min_node_size_prop: NodeSizeProp,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            mtry_prop: 0.014,
            replace: true,
            sample_fraction: 0.632,
            min_node_size_prop: NodeSizeProp::per_observation(),
        }
    }
}

impl Defaults {
    pub fn value(&self, hyper: Hyper) -> Result<CellValue> {
        Ok(match hyper {
            Hyper::MtryProp => CellValue::Num(self.mtry_prop),
            Hyper::Replace => CellValue::Bool(self.replace),
            Hyper::SampleFraction => CellValue::Num(self.sample_fraction),
            Hyper::MinNodeSizeProp => self.min_node_size_prop.value()?,
        })
    }
}

/// Where the study-2 expression matrix comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpressionSource {
    /// Samples-by-genes CSV. When absent a latent-factor surrogate is used.
    pub csv: Option<PathBuf>,
    pub samples: usize,
    pub genes: usize,
    pub seed: u64,
}

impl Default for ExpressionSource {
    fn default() -> Self {
        ExpressionSource { csv: None, samples: 78, genes: 4946, seed: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BorutaSettings {
    /// Forest size of every round; `None` means `total_trees`.
    pub trees_per_round: Option<usize>,
    pub max_iter: usize,
    pub alpha: f64,
}

impl Default for BorutaSettings {
    fn default() -> Self {
        BorutaSettings { trees_per_round: None, max_iter: DEFAULT_MAX_ITER, alpha: DEFAULT_BORUTA_ALPHA }
    }
}

/// One-at-a-time sweep over the grids, for one study design.
///
/// Replicate data and forests are seeded from `seed` alone; the `seed`
/// fields inside `study1` and `study2` are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub study: u8,
    pub study1: Study1Config,
    pub study2: Study2Config,
    pub expression: ExpressionSource,
    pub methods: Vec<Method>,
    pub grids: Grids,
    pub defaults: Defaults,
    pub n_replicates: usize,
    /// Trees of every Vita forest.
    pub total_trees: usize,
    pub boruta: BorutaSettings,
    pub vita_alpha: f64,
    pub seed: u64,
    /// Write measured run times; off keeps record files reproducible.
    pub record_timing: bool,
    pub out: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig::full_study1(10)
    }
}

impl SweepConfig {
    pub fn full_study1(k: usize) -> SweepConfig {
        SweepConfig {
            study: 1,
            study1: Study1Config { k, ..Default::default() },
            study2: Study2Config::default(),
            expression: ExpressionSource::default(),
            methods: vec![Method::Vita, Method::Boruta],
            grids: Grids::default(),
            defaults: Defaults::default(),
            n_replicates: 100,
            total_trees: 10_000,
            boruta: BorutaSettings::default(),
            vita_alpha: DEFAULT_VITA_ALPHA,
            seed: 1,
            record_timing: false,
            out: None,
        }
    }

    pub fn full_study2() -> SweepConfig {
        SweepConfig { study: 2, total_trees: 14_844, ..SweepConfig::full_study1(10) }
    }

    /// CI-sized study 1: p = 500, n = 100, 1000 trees, 20 replicates.
    pub fn desk_study1(k: usize) -> SweepConfig {
        SweepConfig {
            study1: Study1Config { k, p: 500, n: 100, ..Default::default() },
            n_replicates: 20,
            total_trees: 1000,
            boruta: BorutaSettings { trees_per_round: Some(300), max_iter: 20, ..Default::default() },
            ..SweepConfig::full_study1(k)
        }
    }

    /// CI-sized study 2 on a 100 x 500 surrogate with two effect variables
    /// per effect size.
    pub fn desk_study2() -> SweepConfig {
        SweepConfig {
            study: 2,
            study2: Study2Config { n_effect: 32, ..Default::default() },
            expression: ExpressionSource { csv: None, samples: 100, genes: 500, seed: 1 },
            ..SweepConfig::desk_study1(10)
        }
    }

    pub fn profile(name: &str) -> Result<SweepConfig> {
        match name {
            "desk-study1-k10" => Ok(SweepConfig::desk_study1(10)),
            "desk-study1-k50" => Ok(SweepConfig::desk_study1(50)),
            "desk-study2" => Ok(SweepConfig::desk_study2()),
            "full-study1-k10" => Ok(SweepConfig::full_study1(10)),
            "full-study1-k50" => Ok(SweepConfig::full_study1(50)),
            "full-study2" => Ok(SweepConfig::full_study2()),
            _ => Err(Error::InvalidConfig(format!("unknown profile `{name}`"))),
        }
    }

    pub const PROFILES: [&'static str; 6] =
        ["desk-study1-k10", "desk-study1-k50", "desk-study2", "full-study1-k10", "full-study1-k50", "full-study2"];

    pub fn boruta_trees_per_round(&self) -> usize {
        self.boruta.trees_per_round.unwrap_or(self.total_trees)
    }

    /// Upper bound on the trees one Boruta run may grow.
    pub fn boruta_budget(&self) -> usize {
        self.boruta_trees_per_round() * self.boruta.max_iter
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        match self.study {
            1 => self.study1.validate()?,
            2 => {
                if self.expression.csv.is_none() && (self.expression.samples < 10 || self.expression.genes < 10) {
                    return bad("surrogate expression needs at least 10 samples and 10 genes".into());
                }
            }
            s => return bad(format!("study must be 1 or 2, got {s}")),
        }
        if self.methods.is_empty() {
            return bad("no methods requested".into());
        }
        let mut m = self.methods.clone();
        m.sort();
        m.dedup();
        if m.len() != self.methods.len() {
            return bad("methods listed twice".into());
        }
        if self.total_trees == 0 {
            return bad("total_trees must be positive".into());
        }
        if self.boruta.max_iter == 0 || self.boruta_trees_per_round() == 0 {
            return bad("boruta max_iter and trees_per_round must be positive".into());
        }
        for (name, a) in [("vita_alpha", self.vita_alpha), ("boruta.alpha", self.boruta.alpha)] {
            if !(0.0..=1.0).contains(&a) {
                return bad(format!("{name} must lie in [0, 1], got {a}"));
            }
        }
        let unit = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} value {v} is outside (0, 1]")))
            }
        };
        for &v in self.grids.mtry_prop.iter().chain([&self.defaults.mtry_prop]) {
            unit("mtry_prop", v)?;
        }
        for &v in self.grids.sample_fraction.iter().chain([&self.defaults.sample_fraction]) {
            unit("sample_fraction", v)?;
        }
        for v in self.grids.min_node_size_prop.iter().chain([&self.defaults.min_node_size_prop]) {
            if let CellValue::Num(x) = v.value()? {
                unit("min_node_size_prop", x)?;
            }
        }
        let default_hp =
            self.hyperparams(&Cell { hyper: Hyper::MtryProp, value: self.defaults.value(Hyper::MtryProp)? }, 100)?;
        if default_hp.validate().is_err() {
            return bad("the default hyperparameters form an illegal combination".into());
        }
        Ok(())
    }

    /// All labelled cells in grid order, duplicate labels removed.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let mut cells = Vec::new();
        let mut push = |hyper, value: CellValue| {
            let c = Cell { hyper, value };
            if !cells.iter().any(|x: &Cell| x.hyper == hyper && x.label() == c.label()) {
                cells.push(c);
            }
        };
        for &v in &self.grids.mtry_prop {
            push(Hyper::MtryProp, CellValue::Num(v));
        }
        for &v in &self.grids.replace {
            push(Hyper::Replace, CellValue::Bool(v));
        }
        for &v in &self.grids.sample_fraction {
            push(Hyper::SampleFraction, CellValue::Num(v));
        }
        for v in &self.grids.min_node_size_prop {
            push(Hyper::MinNodeSizeProp, v.value()?);
        }
        Ok(cells)
    }

    /// Forest settings of `cell` for data with `n` rows: the cell's value,
    /// every other hyperparameter at its default, `total_trees` trees.
    pub fn hyperparams(&self, cell: &Cell, n: usize) -> Result<HyperParams> {
        let d = &self.defaults;
        let node_default = d.min_node_size_prop.value()?.numeric(n).unwrap_or(0.0);
        let mut hp = HyperParams {
            num_trees: self.total_trees,
            mtry_prop: d.mtry_prop,
            replace: d.replace,
            sample_fraction: d.sample_fraction,
            min_node_size_prop: node_default,
            seed: 0,
        };
        match (cell.hyper, cell.value) {
            (Hyper::Replace, CellValue::Bool(b)) => hp.replace = b,
            (Hyper::Replace, _) => return Err(Error::InvalidConfig("replace takes TRUE or FALSE".into())),
            (h, v) => {
                let x = v.numeric(n).ok_or_else(|| Error::InvalidConfig(format!("{h} takes a number")))?;
                match h {
                    Hyper::MtryProp => hp.mtry_prop = x,
                    Hyper::SampleFraction => hp.sample_fraction = x,
                    Hyper::MinNodeSizeProp => hp.min_node_size_prop = x,
                    Hyper::Replace => unreachable!(),
                }
            }
        }
        Ok(hp)
    }
}

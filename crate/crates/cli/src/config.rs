//! Scenario files: TOML with dotted namespaces (`traffic.lambda_p = 0.3` or
//! a `[traffic]` table). Every key is checked against a fixed schema and
//! errors carry the key path and its line and column.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use ehcr_core::presets::Preset;
use ehcr_core::sim::{BoundaryAxis, Dominance, EnergyModel, SimConfig};
use ehcr_core::solver::{uniform_grid, SolverOptions};
use ehcr_core::validation::{ValidationOptions, CRITERIA};
use ehcr_core::{derive_success_probs, AccessPolicy, LinkModel, SuccessProbs, Traffic};
use serde::Serialize;
use toml::de::{DeTable, DeValue};
use toml::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, "{l}:{c}: ")?;
        }
        if let Some(k) = &self.key {
            write!(f, "`{k}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Curve {
    /// No feedback: best of both dominant systems.
    S,
    /// Feedback exploited.
    Sf,
    /// No feedback, random access without sensing.
    SR,
    /// Feedback exploited, random access without sensing.
    SRf,
    /// Saturated primary alone.
    S2,
    /// Sense every slot, transmit only on a free channel.
    Conventional,
}

impl Curve {
    pub const ALL: [Curve; 6] = [
        Curve::S,
        Curve::Sf,
        Curve::SR,
        Curve::SRf,
        Curve::S2,
        Curve::Conventional,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Curve::S => "S",
            Curve::Sf => "Sf",
            Curve::SR => "S_R",
            Curve::SRf => "S_R_f",
            Curve::S2 => "S2",
            Curve::Conventional => "conventional",
        }
    }
}

impl FromStr for Curve {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Curve::ALL.into_iter().find(|c| c.name() == s).ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepAxis {
    LambdaP,
    LambdaE,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub probs: SuccessProbs,
    pub traffic: Traffic,
    pub policy: AccessPolicy,
    pub solver: SolverOptions,
    pub sweep: Sweep,
    pub curves: Vec<Curve>,
    pub delays: Vec<f64>,
    pub sim: SimConfig,
    pub boundary: Option<BoundaryAxis>,
    pub criteria: Vec<u8>,
    pub validation: ValidationOptions,
    pub out_dir: PathBuf,
    pub svg: bool,
}

#[derive(Clone, Copy)]
enum Kind {
    Prob,
    Positive,
    NonNegative,
    Count,
    Bool,
    Text(&'static [&'static str]),
    ProbList,
    DelayList,
    TextList(&'static [&'static str]),
    CountList,
    Path,
}

const PRESETS: &[&str] = &["fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];
const CURVES: &[&str] = &["S", "Sf", "S_R", "S_R_f", "S2", "conventional"];
const LINK_KEYS: [&str; 12] = [
    "bits_per_packet",
    "slot_duration",
    "bandwidth",
    "sensing_duration",
    "gain_pp",
    "gain_sp",
    "gain_ss",
    "gain_ps",
    "noise_primary_rx",
    "noise_secondary_rx",
    "primary_power",
    "secondary_energy",
];
const PROB_KEYS: [&str; 6] = [
    "p_bar_p",
    "p_bar_p_c",
    "p_bar_0s",
    "p_bar_1s",
    "p_bar_0s_c",
    "p_bar_1s_c",
];

fn schema() -> BTreeMap<String, Kind> {
    let mut s = BTreeMap::new();
    s.insert("probs.preset".into(), Kind::Text(PRESETS));
    for k in PROB_KEYS {
        s.insert(format!("probs.{k}"), Kind::Prob);
    }
    for k in LINK_KEYS {
        let kind = match k {
            "bits_per_packet" | "primary_power" | "secondary_energy" => Kind::NonNegative,
            _ => Kind::Positive,
        };
        s.insert(format!("link.{k}"), kind);
    }
    for k in ["lambda_p", "lambda_s", "lambda_e", "p_fa", "p_md"] {
        s.insert(format!("traffic.{k}"), Kind::Prob);
    }
    for k in ["p_s", "p_t", "p_f", "p_b", "p_r"] {
        s.insert(format!("policy.{k}"), Kind::Prob);
    }
    s.insert("solver.ps_points".into(), Kind::Count);
    s.insert("solver.pr_points".into(), Kind::Count);
    s.insert("solver.tol".into(), Kind::Positive);
    s.insert("solver.refine".into(), Kind::Bool);
    s.insert("solver.sensing".into(), Kind::Bool);
    s.insert("sweep.axis".into(), Kind::Text(&["lambda_p", "lambda_e"]));
    s.insert("sweep.start".into(), Kind::Prob);
    s.insert("sweep.stop".into(), Kind::Prob);
    s.insert("sweep.step".into(), Kind::Positive);
    s.insert("sweep.values".into(), Kind::ProbList);
    s.insert("region.curves".into(), Kind::TextList(CURVES));
    s.insert("delay.d".into(), Kind::DelayList);
    s.insert("sim.slots".into(), Kind::Count);
    s.insert("sim.warmup".into(), Kind::Count);
    s.insert("sim.seed".into(), Kind::Count);
    s.insert("sim.batches".into(), Kind::Count);
    s.insert("sim.feedback".into(), Kind::Bool);
    s.insert(
        "sim.energy_model".into(),
        Kind::Text(&["exact", "md1-approx"]),
    );
    s.insert(
        "sim.dominance".into(),
        Kind::Text(&["none", "saturate-secondary", "saturate-primary"]),
    );
    s.insert(
        "sim.boundary".into(),
        Kind::Text(&["none", "secondary", "primary"]),
    );
    s.insert("validate.criteria".into(), Kind::CountList);
    s.insert("output.dir".into(), Kind::Path);
    s.insert("output.svg".into(), Kind::Bool);
    s
}

/// 1-based line and column of byte `offset`.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn collect_spans(
    prefix: &str,
    table: &DeTable<'_>,
    text: &str,
    out: &mut BTreeMap<String, (usize, usize)>,
) {
    for (key, value) in table {
        let path = if prefix.is_empty() {
            key.get_ref().to_string()
        } else {
            format!("{prefix}.{}", key.get_ref())
        };
        out.insert(path.clone(), line_col(text, key.span().start));
        if let DeValue::Table(inner) = value.get_ref() {
            collect_spans(&path, inner, text, out);
        }
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (key, value) in table {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match value {
            Value::Table(inner) => flatten(&path, inner, out),
            other => {
                out.insert(path, other.clone());
            }
        }
    }
}

/// Typed leaf value after schema checks.
#[derive(Debug, Clone)]
enum Item {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Nums(Vec<f64>),
    Ints(Vec<u64>),
    Texts(Vec<String>),
}

struct Document {
    items: BTreeMap<String, Item>,
    spans: BTreeMap<String, (usize, usize)>,
}

impl Document {
    fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let at = self.spans.get(key).copied();
        ConfigError {
            key: Some(key.into()),
            line: at.map(|a| a.0),
            column: at.map(|a| a.1),
            message: message.into(),
        }
    }

    fn has(&self, key: &str) -> bool {
        self.items.contains_key(key)
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.items.keys().any(|k| k.starts_with(prefix))
    }

    fn num(&self, key: &str) -> Option<f64> {
        match self.items.get(key) {
            Some(Item::Num(v)) => Some(*v),
            _ => None,
        }
    }

    fn num_or(&self, key: &str, default: f64) -> f64 {
        self.num(key).unwrap_or(default)
    }

    fn require(&self, key: &str) -> Result<f64, ConfigError> {
        self.num(key).ok_or_else(|| ConfigError {
            key: Some(key.into()),
            line: None,
            column: None,
            message: "missing required key".into(),
        })
    }

    fn int(&self, key: &str) -> Option<u64> {
        match self.items.get(key) {
            Some(Item::Int(v)) => Some(*v),
            _ => None,
        }
    }

    fn flag(&self, key: &str) -> Option<bool> {
        match self.items.get(key) {
            Some(Item::Bool(v)) => Some(*v),
            _ => None,
        }
    }

    fn text(&self, key: &str) -> Option<&str> {
        match self.items.get(key) {
            Some(Item::Text(v)) => Some(v),
            _ => None,
        }
    }
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn check_item(key: &str, kind: Kind, value: &Value) -> Result<Item, String> {
    let number = |v: &Value| as_number(v).ok_or_else(|| format!("expected a number, got {v}"));
    match kind {
        Kind::Prob => {
            let x = number(value)?;
            if (0.0..=1.0).contains(&x) {
                Ok(Item::Num(x))
            } else {
                Err(format!("value {x} is outside [0, 1]"))
            }
        }
        Kind::Positive => {
            let x = number(value)?;
            if x.is_finite() && x > 0.0 {
                Ok(Item::Num(x))
            } else {
                Err(format!("value {x} must be finite and > 0"))
            }
        }
        Kind::NonNegative => {
            let x = number(value)?;
            if x.is_finite() && x >= 0.0 {
                Ok(Item::Num(x))
            } else {
                Err(format!("value {x} must be finite and >= 0"))
            }
        }
        Kind::Count => match value {
            Value::Integer(i) if *i >= 0 => Ok(Item::Int(*i as u64)),
            other => Err(format!("expected a non-negative integer, got {other}")),
        },
        Kind::Bool => value
            .as_bool()
            .map(Item::Bool)
            .ok_or_else(|| format!("expected true or false, got {value}")),
        Kind::Text(choices) => match value.as_str() {
            Some(s) if choices.contains(&s) => Ok(Item::Text(s.into())),
            _ => Err(format!("expected one of {choices:?}, got {value}")),
        },
        Kind::Path => value
            .as_str()
            .map(|s| Item::Text(s.into()))
            .ok_or_else(|| format!("expected a path string, got {value}")),
        Kind::ProbList | Kind::DelayList => {
            let arr = match value {
                Value::Array(a) => a.clone(),
                single => vec![single.clone()],
            };
            let mut out = Vec::new();
            for v in &arr {
                let x = number(v)?;
                let ok = match kind {
                    Kind::ProbList => (0.0..=1.0).contains(&x),
                    _ => x >= 1.0 && !x.is_nan(),
                };
                if !ok {
                    return Err(match kind {
                        Kind::ProbList => format!("value {x} is outside [0, 1]"),
                        _ => format!("delay bound {x} must be >= 1 slot"),
                    });
                }
                out.push(x);
            }
            if out.is_empty() {
                return Err(format!("`{key}` must not be empty"));
            }
            Ok(Item::Nums(out))
        }
        Kind::CountList => {
            let arr = value
                .as_array()
                .ok_or_else(|| format!("expected an array of integers, got {value}"))?;
            let mut out = Vec::new();
            for v in arr {
                match v {
                    Value::Integer(i) if *i >= 0 => out.push(*i as u64),
                    other => return Err(format!("expected a non-negative integer, got {other}")),
                }
            }
            Ok(Item::Ints(out))
        }
        Kind::TextList(choices) => {
            let arr = value
                .as_array()
                .ok_or_else(|| format!("expected an array of strings, got {value}"))?;
            let mut out = Vec::new();
            for v in arr {
                match v.as_str() {
                    Some(s) if choices.contains(&s) => out.push(s.to_string()),
                    _ => return Err(format!("expected one of {choices:?}, got {v}")),
                }
            }
            Ok(Item::Texts(out))
        }
    }
}

fn parse_document(text: &str) -> Result<Document, ConfigError> {
    let table: toml::Table = toml::from_str(text).map_err(|e| {
        let at = e.span().map(|s| line_col(text, s.start));
        ConfigError {
            key: None,
            line: at.map(|a| a.0),
            column: at.map(|a| a.1),
            message: e.message().trim().to_string(),
        }
    })?;
    let mut spans = BTreeMap::new();
    if let Ok(doc) = DeTable::parse(text) {
        collect_spans("", doc.get_ref(), text, &mut spans);
    }
    let mut leaves = BTreeMap::new();
    flatten("", &table, &mut leaves);

    let schema = schema();
    let mut doc = Document {
        items: BTreeMap::new(),
        spans,
    };
    for (key, value) in leaves {
        let Some(&kind) = schema.get(&key) else {
            return Err(doc.error(&key, "unknown key"));
        };
        match check_item(&key, kind, &value) {
            Ok(item) => {
                doc.items.insert(key, item);
            }
            Err(msg) => return Err(doc.error(&key, msg)),
        }
    }
    Ok(doc)
}

fn base_probs(doc: &Document) -> Result<(SuccessProbs, Option<Preset>), ConfigError> {
    if let Some(name) = doc.text("probs.preset") {
        let preset: Preset = name
            .parse()
            .map_err(|_| doc.error("probs.preset", format!("unknown preset `{name}`")))?;
        if doc.has_prefix("link.") {
            return Err(doc.error(
                "probs.preset",
                "give either `probs.preset` or `link.*`, not both",
            ));
        }
        return Ok((preset.probs(), Some(preset)));
    }
    if doc.has_prefix("link.") {
        let mut values = [0.0; 12];
        for (slot, k) in values.iter_mut().zip(LINK_KEYS) {
            *slot = doc.require(&format!("link.{k}"))?;
        }
        let [bits_per_packet, slot_duration, bandwidth, sensing_duration, gain_pp, gain_sp, gain_ss, gain_ps, noise_primary_rx, noise_secondary_rx, primary_power, secondary_energy] =
            values;
        let link = LinkModel {
            bits_per_packet,
            slot_duration,
            bandwidth,
            sensing_duration,
            gain_pp,
            gain_sp,
            gain_ss,
            gain_ps,
            noise_primary_rx,
            noise_secondary_rx,
            primary_power,
            secondary_energy,
        };
        let probs = derive_success_probs(&link)
            .map_err(|e| doc.error("link.sensing_duration", e.to_string()))?;
        return Ok((probs, None));
    }
    let mut v = [0.0; 6];
    for (slot, k) in v.iter_mut().zip(PROB_KEYS) {
        *slot = doc.require(&format!("probs.{k}")).map_err(|mut e| {
            e.message = "missing required key (or give `probs.preset` or `link.*`)".into();
            e
        })?;
    }
    Ok((
        SuccessProbs {
            p_bar_p: v[0],
            p_bar_p_c: v[1],
            p_bar_0s: v[2],
            p_bar_1s: v[3],
            p_bar_0s_c: v[4],
            p_bar_1s_c: v[5],
        },
        None,
    ))
}

fn build(doc: &Document) -> Result<Scenario, ConfigError> {
    let (mut probs, preset) = base_probs(doc)?;
    let fields: [(&str, &mut f64); 6] = [
        ("p_bar_p", &mut probs.p_bar_p),
        ("p_bar_p_c", &mut probs.p_bar_p_c),
        ("p_bar_0s", &mut probs.p_bar_0s),
        ("p_bar_1s", &mut probs.p_bar_1s),
        ("p_bar_0s_c", &mut probs.p_bar_0s_c),
        ("p_bar_1s_c", &mut probs.p_bar_1s_c),
    ];
    for (k, slot) in fields {
        if let Some(v) = doc.num(&format!("probs.{k}")) {
            *slot = v;
        }
    }
    if let Err(e) = probs.validate() {
        let key = match &e {
            ehcr_core::ChannelError::OutOfRange { name, .. } => format!("probs.{name}"),
            ehcr_core::ChannelError::InterferenceOrder { interfered, .. } => {
                format!("probs.{interfered}")
            }
            _ => "probs".into(),
        };
        return Err(doc.error(&key, e.to_string()));
    }

    let traffic = match preset {
        Some(p) => {
            let base = p.traffic();
            Traffic {
                lambda_p: doc.num_or("traffic.lambda_p", base.lambda_p),
                lambda_s: doc.num_or("traffic.lambda_s", base.lambda_s),
                lambda_e: doc.num_or("traffic.lambda_e", base.lambda_e),
                p_fa: doc.num_or("traffic.p_fa", base.p_fa),
                p_md: doc.num_or("traffic.p_md", base.p_md),
            }
        }
        None => Traffic {
            lambda_p: doc.num_or("traffic.lambda_p", 0.0),
            lambda_s: doc.num_or("traffic.lambda_s", 0.0),
            lambda_e: doc.require("traffic.lambda_e")?,
            p_fa: doc.require("traffic.p_fa")?,
            p_md: doc.require("traffic.p_md")?,
        },
    };

    let policy = AccessPolicy {
        p_s: doc.num_or("policy.p_s", 0.0),
        p_t: doc.num_or("policy.p_t", 0.0),
        p_f: doc.num_or("policy.p_f", 0.0),
        p_b: doc.num_or("policy.p_b", 0.0),
        p_r: doc.num_or("policy.p_r", 0.0),
    };

    let defaults = SolverOptions::default();
    let points = |key: &str, default: usize| -> Result<Vec<f64>, ConfigError> {
        match doc.int(key) {
            Some(n) if n >= 2 => Ok(uniform_grid(n as usize)),
            Some(_) => Err(doc.error(key, "need at least 2 grid points")),
            None => Ok(uniform_grid(default)),
        }
    };
    let mut solver = SolverOptions {
        ps_grid: points("solver.ps_points", defaults.ps_grid.len())?,
        pr_grid: points("solver.pr_points", defaults.pr_grid.len())?,
        tol: doc.num_or("solver.tol", defaults.tol),
        refine: doc.flag("solver.refine").unwrap_or(defaults.refine),
    };
    if doc.flag("solver.sensing") == Some(false) {
        solver = solver.without_sensing();
    }

    let axis = match doc.text("sweep.axis") {
        Some("lambda_e") => SweepAxis::LambdaE,
        _ => SweepAxis::LambdaP,
    };
    let values = match doc.items.get("sweep.values") {
        Some(Item::Nums(v)) => {
            if doc.has("sweep.start") || doc.has("sweep.stop") || doc.has("sweep.step") {
                return Err(doc.error(
                    "sweep.values",
                    "give either `sweep.values` or start/stop/step",
                ));
            }
            v.clone()
        }
        _ => {
            let (start, stop, step) = match axis {
                SweepAxis::LambdaP => (0.0, (probs.p_bar_p - 0.02).max(0.0), 0.02),
                SweepAxis::LambdaE => (0.05, 1.0, 0.05),
            };
            let start = doc.num_or("sweep.start", start);
            let stop = doc.num_or("sweep.stop", stop);
            let step = doc.num_or("sweep.step", step);
            if stop < start {
                return Err(doc.error("sweep.stop", format!("stop {stop} is below start {start}")));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            if n > 100_000 {
                return Err(doc.error("sweep.step", "sweep has more than 100000 points"));
            }
            (0..=n).map(|k| start + k as f64 * step).collect()
        }
    };

    let curves = match doc.items.get("region.curves") {
        Some(Item::Texts(names)) => names.iter().filter_map(|n| n.parse().ok()).collect(),
        _ => Curve::ALL.to_vec(),
    };
    let delays = match doc.items.get("delay.d") {
        Some(Item::Nums(v)) => v.clone(),
        _ => ehcr_core::presets::FIG8_DELAYS.to_vec(),
    };

    let slots = doc.int("sim.slots").unwrap_or(1_000_000);
    let mut sim = SimConfig::new(slots, doc.int("sim.seed").unwrap_or(1));
    if let Some(w) = doc.int("sim.warmup") {
        sim.warmup_slots = w;
    }
    if let Some(b) = doc.int("sim.batches") {
        sim.batches = b as usize;
    }
    sim.feedback_enabled = doc.flag("sim.feedback").unwrap_or(false);
    sim.energy_model = match doc.text("sim.energy_model") {
        Some("exact") => EnergyModel::Exact,
        _ => EnergyModel::Md1Approx,
    };
    sim.dominance = match doc.text("sim.dominance") {
        Some("saturate-secondary") => Dominance::SaturateSecondary,
        Some("saturate-primary") => Dominance::SaturatePrimary,
        _ => Dominance::None,
    };
    let boundary = match doc.text("sim.boundary") {
        Some("secondary") => Some(BoundaryAxis::Secondary),
        Some("primary") => Some(BoundaryAxis::Primary),
        _ => None,
    };

    let criteria = match doc.items.get("validate.criteria") {
        Some(Item::Ints(ids)) => {
            let mut out = Vec::new();
            for &id in ids {
                match u8::try_from(id) {
                    Ok(id) if CRITERIA.contains(&id) => out.push(id),
                    _ => {
                        return Err(
                            doc.error("validate.criteria", format!("unknown criterion {id}"))
                        )
                    }
                }
            }
            out
        }
        _ => CRITERIA.to_vec(),
    };

    Ok(Scenario {
        probs,
        traffic,
        policy,
        solver,
        sweep: Sweep { axis, values },
        curves,
        delays,
        sim,
        boundary,
        criteria,
        validation: ValidationOptions {
            seed: doc
                .int("sim.seed")
                .unwrap_or(ValidationOptions::default().seed),
            sim_slots: doc
                .int("sim.slots")
                .unwrap_or(ValidationOptions::default().sim_slots),
        },
        out_dir: PathBuf::from(doc.text("output.dir").unwrap_or("out")),
        svg: doc.flag("output.svg").unwrap_or(false),
    })
}

/// Parses and validates a scenario file.
pub fn parse_config(text: &str) -> Result<Scenario, ConfigError> {
    let doc = parse_document(text)?;
    build(&doc)
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub slots: Option<u64>,
}

impl Scenario {
    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if let Some(dir) = &o.out {
            self.out_dir = dir.clone();
        }
        if let Some(seed) = o.seed {
            self.sim.seed = seed;
            self.validation.seed = seed;
        }
        if let Some(slots) = o.slots {
            let warmup_share = self.sim.warmup_slots as f64 / self.sim.num_slots.max(1) as f64;
            self.sim.num_slots = slots;
            self.sim.warmup_slots = (slots as f64 * warmup_share) as u64;
            self.validation.sim_slots = slots;
        }
        self.sim.validate().map_err(|e| ConfigError {
            key: Some("sim".into()),
            line: None,
            column: None,
            message: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_region_config() {
        let s = parse_config("probs.preset = \"fig3\"\n").unwrap();
        assert_eq!(s.probs, Preset::Fig3.probs());
        assert_eq!(s.traffic, Preset::Fig3.traffic());
        assert_eq!(s.curves, Curve::ALL.to_vec());
        assert_eq!(s.sweep.values.first(), Some(&0.0));
        assert!((s.sweep.values.last().unwrap() - 0.68).abs() < 1e-12);
    }

    #[test]
    fn table_and_dotted_forms_agree() {
        let a = parse_config("probs.preset = \"fig4\"\ntraffic.lambda_p = 0.3\n").unwrap();
        let b = parse_config("[probs]\npreset = \"fig4\"\n[traffic]\nlambda_p = 0.3\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.traffic.lambda_p, 0.3);
    }

    #[test]
    fn range_error_names_key_and_position() {
        let e = parse_config("probs.preset = \"fig4\"\npolicy.p_t = 1.3\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("policy.p_t"));
        assert_eq!(e.line, Some(2));
        assert_eq!(e.column, Some(8));
        assert!(e.message.contains("outside [0, 1]"));
    }

    #[test]
    fn unknown_key_is_rejected() {
        let e = parse_config("probs.preset = \"fig4\"\n\n[traffic]\nlambda_x = 0.1\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("traffic.lambda_x"));
        assert_eq!(e.line, Some(4));
        assert_eq!(e.column, Some(1));
        assert_eq!(e.message, "unknown key");
    }

    #[test]
    fn missing_key_is_reported() {
        let e = parse_config("probs.p_bar_p = 0.7\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("probs.p_bar_p_c"));
        assert!(e.message.contains("missing"));
    }

    #[test]
    fn syntax_error_has_position() {
        let e = parse_config("probs.preset = \n").unwrap_err();
        assert_eq!(e.line, Some(1));
        assert!(e.key.is_none());
    }

    #[test]
    fn fig3_preset_block() {
        let s = parse_config("probs.preset = \"fig3\"").unwrap();
        let p = s.probs;
        assert_eq!(
            [
                p.p_bar_p,
                p.p_bar_p_c,
                p.p_bar_0s,
                p.p_bar_0s_c,
                p.p_bar_1s,
                p.p_bar_1s_c
            ],
            [0.7, 0.1, 0.8, 0.1, 0.6, 0.3]
        );
        assert_eq!(
            (s.traffic.lambda_e, s.traffic.p_fa, s.traffic.p_md),
            (1.0, 0.01, 0.02)
        );
    }

    #[test]
    fn explicit_probabilities_override_the_preset() {
        let s = parse_config("probs.preset = \"fig4\"\nprobs.p_bar_p_c = 0.2\n").unwrap();
        assert_eq!(s.probs.p_bar_p_c, 0.2);
        let e = parse_config("probs.preset = \"fig4\"\nprobs.p_bar_p_c = 0.9\n").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("probs.p_bar_p_c"));
    }

    #[test]
    fn link_block_derives_probabilities() {
        let text = "link.bits_per_packet = 0\nlink.slot_duration = 1\nlink.bandwidth = 1\n\
            link.sensing_duration = 0.05\nlink.gain_pp = 1\nlink.gain_sp = 1\nlink.gain_ss = 1\n\
            link.gain_ps = 1\nlink.noise_primary_rx = 1\nlink.noise_secondary_rx = 1\n\
            link.primary_power = 1\nlink.secondary_energy = 1\n\
            traffic.lambda_e = 0.5\ntraffic.p_fa = 0\ntraffic.p_md = 0\n";
        let s = parse_config(text).unwrap();
        assert_eq!(s.probs.p_bar_p, 1.0);
        let e = parse_config(&text.replace("link.gain_ps = 1\n", "")).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("link.gain_ps"));
    }

    #[test]
    fn explicit_sweep_and_lists() {
        let s = parse_config(
            "probs.preset = \"fig7\"\nsweep.axis = \"lambda_e\"\nsweep.values = [0.1, 0.2]\n\
             region.curves = [\"S\", \"Sf\"]\ndelay.d = 3\nvalidate.criteria = [1, 3]\n",
        )
        .unwrap();
        assert_eq!(s.sweep.axis, SweepAxis::LambdaE);
        assert_eq!(s.sweep.values, vec![0.1, 0.2]);
        assert_eq!(s.curves, vec![Curve::S, Curve::Sf]);
        assert_eq!(s.delays, vec![3.0]);
        assert_eq!(s.criteria, vec![1, 3]);
        assert!(parse_config("probs.preset = \"fig7\"\nvalidate.criteria = [12]\n").is_err());
        assert!(parse_config("probs.preset = \"fig7\"\ndelay.d = [0.5]\n").is_err());
    }

    #[test]
    fn overrides_apply() {
        let mut s = parse_config("probs.preset = \"fig4\"\nsim.slots = 1000\n").unwrap();
        s.apply(&Overrides {
            out: Some("x".into()),
            seed: Some(9),
            slots: Some(5000),
        })
        .unwrap();
        assert_eq!(s.out_dir, PathBuf::from("x"));
        assert_eq!(
            (s.sim.seed, s.sim.num_slots, s.sim.warmup_slots),
            (9, 5000, 500)
        );
    }
}

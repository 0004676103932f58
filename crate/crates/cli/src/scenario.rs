//! Scenario documents: parsing, overrides, case expansion and validation.
//!
//! A scenario is a flat TOML or JSON table. Both formats go through the same
//! `serde_json::Value` representation, so they are interchangeable. An
//! optional `cases` array lists partial tables that are merged over the base
//! document, one run per entry.

use std::f64::consts::PI;
use std::path::Path;

use decolab::{Calculus, Complex64, DecoherenceForm, NonRwaMode, Variant};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{config, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Gravity,
    QedLindblad,
    QedSde,
    QedSinglePhoton,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Gravity => "gravity",
            Model::QedLindblad => "qed_lindblad",
            Model::QedSde => "qed_sde",
            Model::QedSinglePhoton => "qed_single_photon",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Model::Gravity => &[
                "steady_state",
                "coupling_over_pi",
                "cutoff",
                "beta",
                "form",
                "include_kerr_phase",
                "include_freq_shift",
            ],
            Model::QedLindblad | Model::QedSinglePhoton => &["gamma", "nbar", "dt"],
            Model::QedSde => &[
                "gamma",
                "nbar",
                "theta",
                "dt",
                "n_traj",
                "calculus",
                "nonrwa_mode",
                "variants",
                "quantum_reference",
            ],
        }
    }

    fn uses_grids(self) -> bool {
        self != Model::QedSde
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Wigner,
    Pdensity,
    Visibility,
    Negativity,
    Moments,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Wigner => "wigner",
            Observable::Pdensity => "pdensity",
            Observable::Visibility => "visibility",
            Observable::Negativity => "negativity",
            Observable::Moments => "moments",
        }
    }
}

/// A complex amplitude written as a number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Pair([f64; 2]),
}

impl Amplitude {
    pub fn value(self) -> Complex64 {
        match self {
            Amplitude::Real(re) => Complex64::new(re, 0.0),
            Amplitude::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

const COMMON_KEYS: &[&str] = &[
    "name",
    "model",
    "description",
    "budget_s",
    "label",
    "observables",
    "times",
    "overlaps",
    "overlap_range",
    "t_max",
    "t_step",
    "dim",
    "seed",
    "alpha",
    "alpha1",
    "alpha2",
];

const GRID_KEYS: &[&str] = &["grid_nx", "grid_np", "grid_range", "x_range", "x_points"];

/// One fully merged run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub model: Model,
    #[serde(default)]
    pub description: String,
    /// Declared wall-clock budget in seconds.
    pub budget_s: Option<f64>,
    pub label: Option<String>,
    #[serde(default)]
    pub observables: Vec<Observable>,

    pub times: Option<Vec<f64>>,
    /// Overlap indices k, τ_k = π(k + ½).
    pub overlaps: Option<Vec<u32>>,
    /// Inclusive `[first, last, step]` range of overlap indices.
    pub overlap_range: Option<[u32; 3]>,
    pub t_max: Option<f64>,
    pub t_step: Option<f64>,
    #[serde(default)]
    pub steady_state: bool,

    pub dim: Option<usize>,
    pub grid_nx: Option<usize>,
    pub grid_np: Option<usize>,
    pub grid_range: Option<f64>,
    pub x_range: Option<f64>,
    pub x_points: Option<usize>,
    #[serde(default)]
    pub seed: u64,

    pub alpha: Option<Amplitude>,
    pub alpha1: Option<Amplitude>,
    pub alpha2: Option<Amplitude>,

    pub coupling_over_pi: Option<f64>,
    pub cutoff: Option<f64>,
    pub beta: Option<f64>,
    pub form: Option<DecoherenceForm>,
    pub include_kerr_phase: Option<bool>,
    pub include_freq_shift: Option<bool>,

    pub gamma: Option<f64>,
    pub nbar: Option<f64>,
    pub theta: Option<f64>,
    pub dt: Option<f64>,

    pub n_traj: Option<usize>,
    pub calculus: Option<Calculus>,
    pub nonrwa_mode: Option<NonRwaMode>,
    pub variants: Option<Vec<Variant>>,
    pub quantum_reference: Option<bool>,
}

impl Scenario {
    /// Initial branch amplitudes. `alpha` alone means the even cat (α, −α),
    /// or the coherent start α for the Langevin model.
    pub fn amplitudes(&self) -> CliResult<(Complex64, Complex64)> {
        match (self.alpha, self.alpha1, self.alpha2) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                Err(config("give either `alpha` or `alpha1`/`alpha2`, not both"))
            }
            (Some(a), None, None) => {
                let a = a.value();
                Ok(if self.model == Model::QedSde { (a, a) } else { (a, -a) })
            }
            (None, a1, a2) => {
                let default = if self.model == Model::QedSde { 4.0 } else { 3.0 };
                let a1 = a1.map_or(Complex64::new(default, 0.0), Amplitude::value);
                let a2 = match a2 {
                    Some(a) => a.value(),
                    None if self.model == Model::QedSde => a1,
                    None => -a1,
                };
                Ok((a1, a2))
            }
        }
    }

    /// Sorted, de-duplicated snapshot instants from `times`, `overlaps` and
    /// `overlap_range`; the first five overlap instants when none is given.
    pub fn snapshot_times(&self) -> CliResult<Vec<f64>> {
        let overlap = |k: u32| PI * (k as f64 + 0.5);
        let mut ts: Vec<f64> = Vec::new();
        if let Some(t) = &self.times {
            ts.extend(t);
        }
        if let Some(ks) = &self.overlaps {
            ts.extend(ks.iter().map(|&k| overlap(k)));
        }
        if let Some([first, last, step]) = self.overlap_range {
            if step == 0 || last < first {
                return Err(config("overlap_range must be [first, last, step] with step > 0"));
            }
            ts.extend((first..=last).step_by(step as usize).map(overlap));
        }
        if self.times.is_none() && self.overlaps.is_none() && self.overlap_range.is_none() {
            ts.extend((0..5).map(overlap));
        }
        if let Some(bad) = ts.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(config(format!("snapshot time {bad} must be finite and nonnegative")));
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        Ok(ts)
    }

    /// `(t_max, t_step, samples)` for time series.
    pub fn series_grid(&self) -> CliResult<(f64, f64, usize)> {
        let (Some(t_max), Some(t_step)) = (self.t_max, self.t_step) else {
            return Err(config("time series need both `t_max` and `t_step`"));
        };
        if !(t_step > 0.0 && t_max > 0.0 && t_max.is_finite()) {
            return Err(config("`t_max` and `t_step` must be positive"));
        }
        let n = t_max / t_step;
        if (n - n.round()).abs() > 1e-9 * n.max(1.0) {
            return Err(config(format!("t_max = {t_max} is not a multiple of t_step = {t_step}")));
        }
        Ok((t_max, t_step, n.round() as usize))
    }

    pub fn wants(&self, o: Observable) -> bool {
        self.observables.contains(&o)
    }
}

/// A scenario ready to run, with its merged document and fingerprint.
#[derive(Debug, Clone)]
pub struct Case {
    /// File stem for outputs: the name, plus the case label if any.
    pub stem: String,
    pub scenario: Scenario,
    pub document: Value,
    /// SHA-256 of the canonical (key-sorted, compact) JSON document.
    pub hash: String,
}

/// Parses TOML or JSON text into a table.
pub fn parse_document(text: &str, json: bool) -> CliResult<Value> {
    let value: Value = if json {
        serde_json::from_str(text).map_err(|e| config(format!("invalid JSON: {e}")))?
    } else {
        let table: toml::Table = toml::from_str(text).map_err(|e| config(format!("invalid TOML: {e}")))?;
        serde_json::to_value(table).map_err(|e| config(format!("unrepresentable TOML value: {e}")))?
    };
    if !value.is_object() {
        return Err(config("scenario must be a table"));
    }
    Ok(value)
}

/// Reads a scenario file; `.json` files are JSON, anything else TOML. A
/// missing `name` defaults to the file stem.
pub fn load_file(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
    let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let mut doc = parse_document(&text, json)?;
    let map = doc.as_object_mut().expect("checked above");
    if !map.contains_key("name") {
        let stem = path.file_stem().map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
        map.insert("name".into(), Value::String(stem));
    }
    Ok(doc)
}

/// Parses `key=value`; the value is read as a TOML literal and falls back
/// to a bare string (so `form=high_T` works unquoted).
pub fn parse_override(spec: &str) -> CliResult<(String, Value)> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| config(format!("override `{spec}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(config(format!("override `{spec}` has an empty key")));
    }
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => serde_json::to_value(t.remove("v").expect("parsed key"))
            .map_err(|e| config(format!("override `{spec}`: {e}")))?,
        Err(_) => Value::String(raw.to_string()),
    };
    Ok((key.to_string(), value))
}

fn check_keys(map: &Map<String, Value>, model: Model) -> CliResult<()> {
    for key in map.keys() {
        let known = |m: Model| {
            COMMON_KEYS.contains(&key.as_str())
                || (m.uses_grids() && GRID_KEYS.contains(&key.as_str()))
                || m.keys().contains(&key.as_str())
        };
        if known(model) {
            continue;
        }
        let all = [Model::Gravity, Model::QedLindblad, Model::QedSde, Model::QedSinglePhoton];
        return Err(if all.into_iter().any(known) {
            config(format!("key `{key}` does not apply to model {}", model.name()))
        } else {
            config(format!("unknown key `{key}`"))
        });
    }
    Ok(())
}

fn check_observables(s: &Scenario) -> CliResult<()> {
    if s.observables.is_empty() {
        return Err(config("no observables requested"));
    }
    if s.model == Model::QedSde {
        if let Some(o) = s.observables.iter().find(|o| **o != Observable::Moments) {
            return Err(config(format!("model qed_sde only provides moments, not {}", o.name())));
        }
    }
    if s.steady_state && s.model != Model::Gravity {
        return Err(config("steady_state is only available for the gravity model"));
    }
    Ok(())
}

/// Sha-256 of the compact JSON encoding (object keys are sorted).
pub fn fingerprint(doc: &Value) -> String {
    let bytes = serde_json::to_vec(doc).expect("JSON values always serialise");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Merges cases and overrides, then validates every resulting run.
pub fn expand(doc: &Value, overrides: &[(String, Value)]) -> CliResult<Vec<Case>> {
    let mut base = doc.as_object().cloned().ok_or_else(|| config("scenario must be a table"))?;
    let cases = match base.remove("cases") {
        None => vec![Map::new()],
        Some(Value::Array(items)) if !items.is_empty() => items
            .into_iter()
            .map(|v| match v {
                Value::Object(m) => Ok(m),
                _ => Err(config("every entry of `cases` must be a table")),
            })
            .collect::<CliResult<_>>()?,
        Some(_) => return Err(config("`cases` must be a non-empty array of tables")),
    };
    let labelled = cases.len() > 1;
    cases
        .into_iter()
        .enumerate()
        .map(|(i, case)| {
            let mut merged = base.clone();
            if case.contains_key("cases") {
                return Err(config("cases cannot be nested"));
            }
            merged.extend(case);
            for (k, v) in overrides {
                merged.insert(k.clone(), v.clone());
            }
            if labelled && !merged.contains_key("label") {
                merged.insert("label".into(), Value::String(format!("case{i}")));
            }
            let model: Model = match merged.get("model") {
                Some(m) => serde_json::from_value(m.clone()).map_err(|e| config(format!("model: {e}")))?,
                None => return Err(config("missing key `model`")),
            };
            check_keys(&merged, model)?;
            let document = Value::Object(merged);
            let scenario: Scenario =
                serde_json::from_value(document.clone()).map_err(|e| config(e.to_string()))?;
            check_observables(&scenario)?;
            scenario.amplitudes()?;
            scenario.snapshot_times()?;
            if scenario.wants(Observable::Moments) {
                scenario.series_grid()?;
            }
            let stem = match &scenario.label {
                Some(l) => format!("{}_{}", scenario.name, l),
                None => scenario.name.clone(),
            };
            if stem.is_empty() || stem.contains(['/', '\\']) {
                return Err(config(format!("`{stem}` is not usable as a file name")));
            }
            Ok(Case {
                stem,
                hash: fingerprint(&document),
                scenario,
                document,
            })
        })
        .collect()
}

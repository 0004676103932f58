//! Built-in scenario presets, one per figure of the cat-state study.

use serde_json::Value;

use crate::error::CliResult;
use crate::scenario::parse_document;

pub struct Builtin {
    pub name: &'static str,
    pub toml: &'static str,
}

pub const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "fig1",
        toml: r#"
name = "fig1"
model = "gravity"
description = "Figure 1: Wigner functions of cats under gravitational dephasing at tau = pi/2, 9pi/2 and infinity"
budget_s = 30
observables = ["wigner", "negativity"]
overlaps = [0, 4]
steady_state = true
coupling_over_pi = 1e-3
cutoff = 1e3
beta = 1.0
alpha1 = 3.0
cases = [
  { label = "a2_m3", alpha2 = -3.0 },
  { label = "a2_m5", alpha2 = -5.0 },
  { label = "a2_m7", alpha2 = -7.0 },
]
"#,
    },
    Builtin {
        name: "fig2",
        toml: r#"
name = "fig2"
model = "gravity"
description = "Figure 2: steady-state position densities after complete gravitational dephasing"
budget_s = 10
observables = ["pdensity", "visibility"]
times = []
steady_state = true
coupling_over_pi = 1e-3
cutoff = 1e3
beta = 1.0
cases = [
  { label = "a_3_m3", alpha1 = 3.0, alpha2 = -3.0 },
  { label = "a_m5_5", alpha1 = -5.0, alpha2 = 5.0 },
  { label = "a_3_m5", alpha1 = 3.0, alpha2 = -5.0 },
  { label = "a_3_m7", alpha1 = 3.0, alpha2 = -7.0 },
]
"#,
    },
    Builtin {
        name: "fig3a",
        toml: r#"
name = "fig3a"
model = "gravity"
description = "Figure 3a: gravitational visibility decay for several inverse temperatures"
budget_s = 30
observables = ["visibility"]
overlap_range = [0, 100, 1]
coupling_over_pi = 1e-4
cutoff = 1e3
alpha1 = 3.0
alpha2 = -5.0
cases = [
  { label = "beta_1", beta = 1.0 },
  { label = "beta_1_3", beta = 0.3333333333333333 },
  { label = "beta_1_5", beta = 0.2 },
]
"#,
    },
    Builtin {
        name: "fig3b",
        toml: r#"
name = "fig3b"
model = "gravity"
description = "Figure 3b: gravitational visibility decay for several couplings"
budget_s = 30
observables = ["visibility"]
overlap_range = [0, 100, 1]
cutoff = 1e3
beta = 1.0
alpha1 = 3.0
alpha2 = -5.0
cases = [
  { label = "c_1e-4", coupling_over_pi = 1e-4 },
  { label = "c_3e-4", coupling_over_pi = 3e-4 },
  { label = "c_5e-4", coupling_over_pi = 5e-4 },
]
"#,
    },
    Builtin {
        name: "fig3c",
        toml: r#"
name = "fig3c"
model = "gravity"
description = "Figure 3c: gravitational visibility decay for several branch separations"
budget_s = 30
observables = ["visibility"]
overlap_range = [0, 100, 1]
coupling_over_pi = 1e-4
cutoff = 1e3
beta = 1.0
alpha1 = 3.0
cases = [
  { label = "a2_m3", alpha2 = -3.0 },
  { label = "a2_m4", alpha2 = -4.0 },
  { label = "a2_m5", alpha2 = -5.0 },
]
"#,
    },
    Builtin {
        name: "fig4",
        toml: r#"
name = "fig4"
model = "qed_sde"
description = "Figure 4: mean quadrature <Re a> from classical Langevin trajectories, rwa and non-rwa"
budget_s = 400
observables = ["moments"]
alpha = 4.0
t_max = 200.0
t_step = 0.1
dt = 2.5e-3
n_traj = 3000
calculus = "stratonovich"
quantum_reference = true
cases = [
  { label = "a", gamma = 3e-3, nbar = 3.0 },
  { label = "b", gamma = 5e-3, nbar = 3.0 },
  { label = "c", gamma = 3e-3, nbar = 5.0 },
  { label = "d", gamma = 5e-3, nbar = 5.0 },
]
"#,
    },
    Builtin {
        name: "fig5",
        toml: r#"
name = "fig5"
model = "qed_sde"
description = "Figure 5: mean energy <a^dag a> from classical Langevin trajectories, rwa and non-rwa"
budget_s = 600
observables = ["moments"]
alpha = 4.0
t_max = 200.0
t_step = 0.1
dt = 2.5e-3
n_traj = 5000
calculus = "stratonovich"
quantum_reference = true
cases = [
  { label = "a", gamma = 3e-3, nbar = 3.0 },
  { label = "b", gamma = 5e-3, nbar = 3.0 },
  { label = "c", gamma = 3e-3, nbar = 5.0 },
  { label = "d", gamma = 5e-3, nbar = 5.0 },
]
"#,
    },
    Builtin {
        name: "fig6",
        toml: r#"
name = "fig6"
model = "qed_lindblad"
description = "Figure 6: Wigner functions of a cat under two-photon damping at tau = 0, 3pi/2 and 9pi/2"
budget_s = 120
observables = ["wigner", "negativity"]
times = [0.0, 4.71238898038469, 14.137166941154069]
gamma = 1e-3
alpha = 3.0
cases = [
  { label = "n3", nbar = 3.0 },
  { label = "n5", nbar = 5.0 },
]
"#,
    },
    Builtin {
        name: "fig7",
        toml: r#"
name = "fig7"
model = "qed_lindblad"
description = "Figure 7: position densities under two-photon damping at overlaps k = 0, 6, 42 and 190"
budget_s = 120
observables = ["pdensity", "visibility"]
overlaps = [0, 6, 42, 190]
gamma = 5e-4
nbar = 3.0
alpha = 5.0
"#,
    },
    Builtin {
        name: "fig8a",
        toml: r#"
name = "fig8a"
model = "qed_lindblad"
description = "Figure 8a: visibility decay under two-photon damping for several amplitudes"
budget_s = 60
observables = ["visibility"]
overlap_range = [0, 60, 2]
gamma = 3e-4
nbar = 3.0
cases = [
  { label = "a3", alpha = 3.0 },
  { label = "a5", alpha = 5.0 },
  { label = "a7", alpha = 7.0 },
]
"#,
    },
    Builtin {
        name: "fig8b",
        toml: r#"
name = "fig8b"
model = "qed_lindblad"
description = "Figure 8b: visibility decay under two-photon damping for several damping rates"
budget_s = 400
observables = ["visibility"]
overlap_range = [0, 20, 1]
alpha = 3.0
nbar = 5.0
cases = [
  { label = "q1e-3", gamma = 1e-3 },
  { label = "q3e-3", gamma = 3e-3 },
  { label = "q5e-3", gamma = 5e-3 },
]
"#,
    },
    Builtin {
        name: "fig8c",
        toml: r#"
name = "fig8c"
model = "qed_lindblad"
description = "Figure 8c: visibility decay under two-photon damping for several bath occupations"
budget_s = 300
observables = ["visibility"]
overlap_range = [0, 60, 2]
gamma = 3e-4
alpha = 3.0
cases = [
  { label = "n3", nbar = 3.0 },
  { label = "n5", nbar = 5.0 },
  { label = "n7", nbar = 7.0 },
]
"#,
    },
];

pub fn get(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

impl Builtin {
    pub fn document(&self) -> CliResult<Value> {
        parse_document(self.toml, false)
    }
}

/// Document for `name`: a preset, or a preset name followed by one of its
/// case labels (`fig5a` is case `a` of `fig5`).
pub fn resolve(name: &str) -> CliResult<Option<Value>> {
    if let Some(b) = get(name) {
        return b.document().map(Some);
    }
    for b in BUILTINS {
        let Some(label) = name.strip_prefix(b.name) else {
            continue;
        };
        let mut doc = b.document()?;
        let map = doc.as_object_mut().expect("presets are tables");
        let Some(Value::Array(cases)) = map.get("cases") else {
            continue;
        };
        let picked: Vec<Value> = cases
            .iter()
            .filter(|c| c.get("label").and_then(Value::as_str) == Some(label))
            .cloned()
            .collect();
        if !picked.is_empty() {
            map.insert("cases".into(), Value::Array(picked));
            return Ok(Some(doc));
        }
    }
    Ok(None)
}

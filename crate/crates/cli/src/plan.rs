//! Experiment plans: preset defaults, TOML files and `key=value` overrides.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use shadowqpt::acquire::{PairingPlan, Scheme};
use shadowqpt::channels::ghz_process;
use shadowqpt::postprocess::{MleConfig, ProjectionMethod};
use shadowqpt::shadows::EstimatorConfig;
use shadowqpt::ChannelSpec;

use crate::states::OverlapFamily;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    FullProcess,
    ReducedProcess,
    Overlap,
    Hamlearn,
    Bounds,
    SchemeCompare,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::FullProcess,
        Preset::ReducedProcess,
        Preset::Overlap,
        Preset::Hamlearn,
        Preset::Bounds,
        Preset::SchemeCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::FullProcess => "full_process",
            Preset::ReducedProcess => "reduced_process",
            Preset::Overlap => "overlap",
            Preset::Hamlearn => "hamlearn",
            Preset::Bounds => "bounds",
            Preset::SchemeCompare => "scheme_compare",
        }
    }

    fn default_n(self) -> usize {
        match self {
            Preset::FullProcess | Preset::SchemeCompare => 2,
            Preset::ReducedProcess | Preset::Overlap => 3,
            Preset::Hamlearn => 5,
            Preset::Bounds => 2,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| anyhow!("unknown preset `{s}` (expected one of {})", Preset::ALL.map(Preset::name).join(", ")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Acquisition {
    pub scheme: Scheme,
    pub plan: PairingPlan,
    pub settings: usize,
    pub reps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedOptions {
    /// Every subsystem of each listed size is reconstructed.
    pub subsystem_sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapOptions {
    /// Number of evenly spaced angles in `[0, 2π]`, endpoints included.
    pub angles: usize,
    pub families: Vec<OverlapFamily>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamlearnOptions {
    pub t_grid: Vec<f64>,
    pub shots: usize,
    pub realizations: usize,
    pub scheme: Scheme,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsOptions {
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub eps: Vec<f64>,
    pub delta: Vec<f64>,
    pub m: Vec<u64>,
    pub t: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub preset: Preset,
    pub seed: u64,
    pub n: usize,
    /// Defaults to the GHZ preparation circuit on `n` qubits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    /// Global depolarizing probability applied on top of the channel.
    pub noise: f64,
    pub acquisition: Acquisition,
    pub estimator: EstimatorConfig,
    /// Applied in order, each stage to the output of the previous one.
    /// `mle` restarts from the records.
    pub postprocessing: Vec<ProjectionMethod>,
    pub mle: MleConfig,
    pub reduced: ReducedOptions,
    pub overlap: OverlapOptions,
    pub hamlearn: HamlearnOptions,
    pub bounds: BoundsOptions,
}

impl ExperimentPlan {
    pub fn defaults(preset: Preset, n: usize) -> Self {
        let (scheme, plan, settings, reps, post) = match preset {
            Preset::SchemeCompare => (Scheme::Ancilla, PairingPlan::Pauli, 20_000, 1, vec![ProjectionMethod::Cp]),
            Preset::ReducedProcess => (Scheme::Ancilla, PairingPlan::Pauli, 1024, 50, vec![ProjectionMethod::Cp]),
            _ => (
                Scheme::Ancilla,
                PairingPlan::default_mixed(n),
                1024,
                50,
                vec![ProjectionMethod::Cp, ProjectionMethod::Tp, ProjectionMethod::Purify],
            ),
        };
        Self {
            preset,
            seed: 0,
            n,
            channel: None,
            noise: 0.0,
            acquisition: Acquisition { scheme, plan, settings, reps },
            estimator: EstimatorConfig::Mean,
            postprocessing: post,
            mle: MleConfig::default(),
            reduced: ReducedOptions { subsystem_sizes: vec![1, 2] },
            overlap: OverlapOptions { angles: 51, families: OverlapFamily::ALL.to_vec() },
            hamlearn: HamlearnOptions { t_grid: vec![0.1], shots: 100_000, realizations: 10, scheme: Scheme::TwoSided },
            bounds: BoundsOptions {
                n: vec![2, 3, 4, 5],
                k: vec![1, 2],
                eps: vec![0.1],
                delta: vec![0.1],
                m: vec![1000],
                t: vec![0.1],
            },
        }
    }

    /// The noiseless target channel.
    pub fn target(&self) -> Result<ChannelSpec> {
        let spec = match &self.channel {
            Some(c) => c.clone(),
            None => ghz_process(self.n)?,
        };
        if spec.n != self.n {
            bail!("channel acts on {} qubits but the plan has n = {}", spec.n, self.n);
        }
        Ok(spec)
    }

    /// The channel that is actually sampled.
    pub fn sampled(&self) -> Result<ChannelSpec> {
        let t = self.target()?;
        Ok(if self.noise > 0.0 { t.depolarized(self.noise) } else { t })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            bail!("n must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.noise) {
            bail!("noise must lie in [0, 1], got {}", self.noise);
        }
        if self.acquisition.settings == 0 || self.acquisition.reps == 0 {
            bail!("acquisition needs at least one setting and one repetition");
        }
        if self.overlap.angles < 2 {
            bail!("overlap needs at least two angles");
        }
        if self.hamlearn.t_grid.is_empty() || self.hamlearn.realizations == 0 {
            bail!("hamlearn needs a non-empty t grid and at least one realization");
        }
        self.target()?;
        Ok(())
    }
}

/// Where a plan comes from, lowest precedence first: preset defaults, plan
/// file, command-line flags, then `--override` pairs.
#[derive(Clone, Debug, Default)]
pub struct PlanSource<'a> {
    pub file: Option<&'a Path>,
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub overrides: &'a [String],
}

pub fn resolve_plan(src: &PlanSource<'_>) -> Result<ExperimentPlan> {
    let mut table = match src.file {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading plan {}", p.display()))?;
            toml::from_str::<toml::Table>(&text).with_context(|| format!("parsing plan {}", p.display()))?
        }
        None => toml::Table::new(),
    };
    if let Some(p) = src.preset {
        table.insert("preset".into(), toml::Value::String(p.name().into()));
    }
    if let Some(s) = src.seed {
        table.insert("seed".into(), toml::Value::Integer(i64::try_from(s).context("seed exceeds the TOML integer range")?));
    }
    for ov in src.overrides {
        apply_override(&mut table, ov)?;
    }
    let preset = match table.get("preset") {
        Some(v) => v.as_str().ok_or_else(|| anyhow!("`preset` must be a string"))?.parse()?,
        None => Preset::FullProcess,
    };
    let n = match table.get("n") {
        Some(v) => usize::try_from(v.as_integer().ok_or_else(|| anyhow!("`n` must be an integer"))?)?,
        None => preset.default_n(),
    };
    let mut merged = toml::Table::try_from(ExperimentPlan::defaults(preset, n)).context("serializing defaults")?;
    deep_merge(&mut merged, table);
    let plan: ExperimentPlan = toml::Value::Table(merged).try_into().context("invalid plan")?;
    plan.validate()?;
    Ok(plan)
}

fn deep_merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            // tagged enums are replaced whole so stale variant fields do not linger
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) if !is_tagged(&o) => deep_merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn is_tagged(t: &toml::Table) -> bool {
    ["kind", "mode", "aggregation", "init"].iter().any(|k| t.contains_key(*k))
}

/// `a.b.c=value`, with `value` parsed as a TOML literal and falling back to a bare string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| anyhow!("override `{spec}` is not of the form key=value"))?;
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("override `{spec}` has an empty key segment");
    }
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| anyhow!("override `{spec}`: `{part}` is not a table"))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

//! Preset pipelines. Every function here is deterministic in the plan.

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use shadowqpt::acquire::{acquire_ancilla, acquire_two_sided, total_outcomes, MeasurementRecord, Scheme};
use shadowqpt::channels::reduced_choi;
use shadowqpt::hamlearn::{bound_hamlearn, disorder_sweep, optimal_t, summarize, HamLearnRow};
use shadowqpt::postprocess::{
    cp_project_with_report, mle_reconstruct, overlap_pipeline, purify_with_report, tp_project_with_report, OverlapMode,
    ProjectionMethod, ProjectionReport,
};
use shadowqpt::qmat::{frobenius_distance, purity, trace_distance};
use shadowqpt::shadows::{bound_overlap, bound_reduced, estimate_choi, estimate_overlap, estimate_reduced, OverlapScheme, ReducedScheme};
use shadowqpt::ChoiMatrix;

use crate::output::Outputs;
use crate::plan::{ExperimentPlan, Preset};
use crate::states::{angle_grid, input_state, target_state};

pub fn acquire_with(plan: &ExperimentPlan, scheme: Scheme) -> Result<Vec<MeasurementRecord>> {
    let spec = plan.sampled()?;
    let a = &plan.acquisition;
    let recs = match scheme {
        Scheme::Ancilla => acquire_ancilla(&spec, &a.plan, a.settings, a.reps, plan.seed)?,
        Scheme::TwoSided => acquire_two_sided(&spec, &a.plan, a.settings, a.reps, plan.seed)?,
    };
    Ok(recs)
}

/// Records for the plan; `scheme_compare` acquires with both schemes.
pub fn acquire(plan: &ExperimentPlan) -> Result<Vec<MeasurementRecord>> {
    if plan.preset == Preset::SchemeCompare {
        let mut recs = acquire_with(plan, Scheme::Ancilla)?;
        recs.extend(acquire_with(plan, Scheme::TwoSided)?);
        return Ok(recs);
    }
    acquire_with(plan, plan.acquisition.scheme)
}

pub struct Stage {
    pub name: String,
    pub choi: ChoiMatrix,
    pub report: Option<ProjectionReport>,
}

pub fn method_name(m: ProjectionMethod) -> &'static str {
    match m {
        ProjectionMethod::Cp => "cp",
        ProjectionMethod::Tp => "tp",
        ProjectionMethod::Purify => "purify",
        ProjectionMethod::Mle => "mle",
    }
}

/// `raw` followed by one stage per step, each applied to the previous output.
pub fn run_stages(
    raw: ChoiMatrix,
    steps: &[ProjectionMethod],
    records: Option<&[MeasurementRecord]>,
    plan_mle: &shadowqpt::postprocess::MleConfig,
) -> Result<Vec<Stage>> {
    let mut stages = vec![Stage { name: "raw".into(), choi: raw, report: None }];
    for &m in steps {
        let prev = &stages.last().expect("raw stage").choi;
        let (choi, report) = match m {
            ProjectionMethod::Cp => cp_project_with_report(prev)?,
            ProjectionMethod::Tp => tp_project_with_report(prev)?,
            ProjectionMethod::Purify => purify_with_report(prev)?,
            ProjectionMethod::Mle => {
                let recs = records.context("mle needs the measurement records")?;
                mle_reconstruct(recs, plan_mle)?
            }
        };
        stages.push(Stage { name: method_name(m).into(), choi, report: Some(report) });
    }
    Ok(stages)
}

#[derive(Clone, Debug, Serialize)]
pub struct Metrics {
    pub trace_distance: f64,
    pub frobenius_distance: f64,
    pub purity: f64,
}

pub fn metrics(est: &ChoiMatrix, reference: &ChoiMatrix) -> Result<Metrics> {
    let (e, r) = (est.to_unnormalized(), reference.to_unnormalized());
    Ok(Metrics {
        trace_distance: trace_distance(&e, &r)?,
        frobenius_distance: frobenius_distance(&e, &r)?,
        purity: purity(&e),
    })
}

#[allow(non_snake_case)]
#[derive(Serialize)]
struct MetricsRow {
    scheme: String,
    n: usize,
    N: usize,
    postproc: String,
    trace_distance: f64,
    frobenius_distance: f64,
    purity: f64,
}

#[allow(non_snake_case)]
#[derive(Serialize)]
struct ReducedRow {
    scheme: String,
    n: usize,
    N: usize,
    subsystem: String,
    postproc: String,
    trace_distance: f64,
    frobenius_distance: f64,
    purity: f64,
}

#[allow(non_snake_case)]
#[derive(Serialize)]
struct OverlapRow {
    n: usize,
    N: usize,
    family: String,
    theta: f64,
    exact: f64,
    full: f64,
    purified: f64,
    abs_err_full: f64,
    abs_err_purified: f64,
}

#[derive(Serialize)]
struct BoundRow {
    bound: &'static str,
    scheme: String,
    n: Option<usize>,
    k: Option<usize>,
    m: Option<u64>,
    t: Option<f64>,
    eps: f64,
    delta: f64,
    value: u64,
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

fn split_by_scheme(records: &[MeasurementRecord]) -> Vec<(Scheme, Vec<MeasurementRecord>)> {
    [Scheme::Ancilla, Scheme::TwoSided]
        .into_iter()
        .map(|s| (s, records.iter().filter(|r| r.scheme == s).cloned().collect::<Vec<_>>()))
        .filter(|(_, r)| !r.is_empty())
        .collect()
}

/// Run the plan's preset, writing outputs; `records` replaces simulation when given.
pub fn run_preset(plan: &ExperimentPlan, out: &mut Outputs, records: Option<Vec<MeasurementRecord>>) -> Result<Value> {
    match plan.preset {
        Preset::FullProcess | Preset::SchemeCompare => full_process(plan, out, records),
        Preset::ReducedProcess => reduced_process(plan, out, records),
        Preset::Overlap => overlap(plan, out, records),
        Preset::Hamlearn => {
            if records.is_some() {
                bail!("the hamlearn preset simulates its own disorder realizations");
            }
            hamlearn(plan, out)
        }
        Preset::Bounds => bounds(plan, out),
    }
}

fn obtain(plan: &ExperimentPlan, out: &mut Outputs, records: Option<Vec<MeasurementRecord>>) -> Result<Vec<MeasurementRecord>> {
    let recs = match records {
        Some(r) => r,
        None => acquire(plan)?,
    };
    if let Some(r) = recs.iter().find(|r| r.n != plan.n) {
        bail!("record {} has n = {} but the plan has n = {}", r.index, r.n, plan.n);
    }
    out.write_records("records.jsonl", &recs)?;
    Ok(recs)
}

fn full_process(plan: &ExperimentPlan, out: &mut Outputs, records: Option<Vec<MeasurementRecord>>) -> Result<Value> {
    let recs = obtain(plan, out, records)?;
    let reference = plan.target()?.choi()?;
    let groups = split_by_scheme(&recs);
    let tag_scheme = groups.len() > 1 || plan.preset == Preset::SchemeCompare;
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (scheme, group) in &groups {
        let raw = estimate_choi(group, &plan.estimator)?;
        let shots = total_outcomes(group);
        for st in run_stages(raw, &plan.postprocessing, Some(group), &plan.mle)? {
            let m = metrics(&st.choi, &reference)?;
            let file = if tag_scheme { format!("choi_{scheme}_{}.json", st.name) } else { format!("choi_{}.json", st.name) };
            out.write_json(&file, &st.choi)?;
            if let Some(r) = st.report {
                reports.push(json!({ "scheme": scheme.to_string(), "stage": st.name, "report": r }));
            }
            rows.push(MetricsRow {
                scheme: scheme.to_string(),
                n: plan.n,
                N: shots,
                postproc: st.name,
                trace_distance: m.trace_distance,
                frobenius_distance: m.frobenius_distance,
                purity: m.purity,
            });
        }
    }
    out.write_json("projections.json", &reports)?;
    out.write_csv("metrics.csv", &rows)?;
    Ok(json!({ "metrics": rows }))
}

fn reduced_process(plan: &ExperimentPlan, out: &mut Outputs, records: Option<Vec<MeasurementRecord>>) -> Result<Value> {
    let recs = obtain(plan, out, records)?;
    let exact = plan.target()?.choi()?;
    let mut rows = Vec::new();
    for (scheme, group) in split_by_scheme(&recs) {
        let shots = total_outcomes(&group);
        for &k in &plan.reduced.subsystem_sizes {
            if k == 0 || k > plan.n {
                bail!("subsystem size {k} on a {}-qubit channel", plan.n);
            }
            for sub in subsets(plan.n, k) {
                let reference = reduced_choi(&exact, &sub)?;
                let raw = estimate_reduced(&group, &sub, &plan.estimator)?;
                let label = sub.iter().map(|q| q.to_string()).collect::<Vec<_>>().join("-");
                for st in run_stages(raw, &plan.postprocessing, None, &plan.mle)? {
                    let m = metrics(&st.choi, &reference)?;
                    rows.push(ReducedRow {
                        scheme: scheme.to_string(),
                        n: plan.n,
                        N: shots,
                        subsystem: label.clone(),
                        postproc: st.name,
                        trace_distance: m.trace_distance,
                        frobenius_distance: m.frobenius_distance,
                        purity: m.purity,
                    });
                }
            }
        }
    }
    out.write_csv("metrics.csv", &rows)?;
    Ok(json!({ "metrics": rows }))
}

fn overlap(plan: &ExperimentPlan, out: &mut Outputs, records: Option<Vec<MeasurementRecord>>) -> Result<Value> {
    let recs = obtain(plan, out, records)?;
    let exact = plan.target()?.choi()?;
    let raw = estimate_choi(&recs, &plan.estimator)?;
    out.write_json("choi_raw.json", &raw)?;
    let shots = total_outcomes(&recs);
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for fam in &plan.overlap.families {
        let rho = input_state(fam.input, plan.n)?;
        let (mut max_full, mut max_pur) = (0.0f64, 0.0f64);
        for theta in angle_grid(plan.overlap.angles) {
            let sigma = target_state(fam.rotation, theta, plan.n)?;
            let e = estimate_overlap(&exact, &rho, &sigma)?;
            let full = overlap_pipeline(&raw, &rho, &sigma, OverlapMode::Full)?;
            let pur = overlap_pipeline(&raw, &rho, &sigma, OverlapMode::Purified)?;
            max_full = max_full.max((full - e).abs());
            max_pur = max_pur.max((pur - e).abs());
            rows.push(OverlapRow {
                n: plan.n,
                N: shots,
                family: fam.label(),
                theta,
                exact: e,
                full,
                purified: pur,
                abs_err_full: (full - e).abs(),
                abs_err_purified: (pur - e).abs(),
            });
        }
        summary.push(json!({ "family": fam.label(), "max_abs_err_full": max_full, "max_abs_err_purified": max_pur }));
    }
    out.write_csv("overlap.csv", &rows)?;
    Ok(json!({ "families": summary }))
}

fn hamlearn(plan: &ExperimentPlan, out: &mut Outputs) -> Result<Value> {
    let h = &plan.hamlearn;
    let sweep = disorder_sweep(plan.n, &h.t_grid, h.shots, h.realizations, h.scheme, plan.seed)?;
    let rows: Vec<HamLearnRow> = sweep.iter().flatten().flat_map(|r| r.rows()).collect();
    let points = sweep.iter().map(|r| summarize(r)).collect::<shadowqpt::Result<Vec<_>>>()?;
    out.write_csv("hamlearn.csv", &rows)?;
    let best = optimal_t(&points)?;
    Ok(json!({ "t_points": points, "optimal_t": best.t }))
}

fn bounds(plan: &ExperimentPlan, out: &mut Outputs) -> Result<Value> {
    let b = &plan.bounds;
    let mut rows = Vec::new();
    for &eps in &b.eps {
        for &delta in &b.delta {
            for &n in &b.n {
                for &k in b.k.iter().filter(|&&k| k <= n) {
                    for (scheme, name) in [
                        (ReducedScheme::GlobalClifford, "global_clifford"),
                        (ReducedScheme::Pauli6Frobenius, "pauli6_frobenius"),
                        (ReducedScheme::Pauli6Trace, "pauli6_trace"),
                    ] {
                        rows.push(BoundRow {
                            bound: "reduced",
                            scheme: name.into(),
                            n: Some(n),
                            k: Some(k),
                            m: None,
                            t: None,
                            eps,
                            delta,
                            value: bound_reduced(n, k, eps, delta, scheme)?,
                        });
                    }
                    for &t in &b.t {
                        rows.push(BoundRow {
                            bound: "hamlearn",
                            scheme: "pauli6".into(),
                            n: Some(n),
                            k: Some(k),
                            m: None,
                            t: Some(t),
                            eps,
                            delta,
                            value: bound_hamlearn(n, k, t, eps, delta)?,
                        });
                    }
                }
            }
            for &m in &b.m {
                let mut schemes = vec![(OverlapScheme::GlobalClifford, "global_clifford".to_string(), None)];
                schemes.extend(b.k.iter().map(|&k| (OverlapScheme::LocalClifford { k }, "local_clifford".to_string(), Some(k))));
                for (scheme, name, k) in schemes {
                    rows.push(BoundRow {
                        bound: "overlap",
                        scheme: name,
                        n: None,
                        k,
                        m: Some(m),
                        t: None,
                        eps,
                        delta,
                        value: bound_overlap(m, eps, delta, scheme)?,
                    });
                }
            }
        }
    }
    out.write_csv("bounds.csv", &rows)?;
    Ok(json!({ "rows": rows.len() }))
}

/// Write `report.json` and keep the outputs.
pub fn finish(plan: &ExperimentPlan, mut out: Outputs, summary: Value) -> Result<()> {
    let mut files = out.names();
    files.push("report.json".into());
    let report = json!({
        "preset": plan.preset.name(),
        "seed": plan.seed,
        "plan": plan,
        "outputs": files,
        "summary": summary,
    });
    out.write_json("report.json", &report)?;
    out.commit();
    Ok(())
}

//! Named scenarios and the runs that regenerate each published table and
//! figure.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::causal::{
    default_graph, faithfulness_violations, pc_skeleton, side_by_side, skeleton_f1, triangle_faithfulness_tables,
    CausalGraph, FaithfulnessReport, LinearGaussianDag, Skeleton, TriangleTables,
};
use crate::error::{Error, Result};
use crate::plant::{format_f64, simulate, ModelKind, ScenarioSpec, SignalSpec, Trace};
use crate::reference::{references, Pattern, TableSpec, TriangleRowSpec};
use crate::signals::{derive_seed, Waveform};
use crate::stats::{
    decimate, mutual_information, rejection_ratio, Corr, CorrelationEngine, CorrelationReport, DEFAULT_FLOOR,
};

pub const DEFAULT_SEED: u64 = 20110401;
const DT: f64 = 0.001;
const STEPS: usize = 1_000_000;

/// Names accepted by [`scenario`].
pub const SCENARIOS: [&str; 12] = [
    "example1",
    "example2",
    "example3",
    "example4",
    "example5_1",
    "example5_2",
    "example5_3",
    "example5_4",
    "capacitor",
    "passive",
    "open_loop",
    "feedforward",
];

fn integral(k: f64, coherence: f64, vary_r: bool, seed: u64) -> ScenarioSpec {
    let r = if vary_r { SignalSpec::smooth(coherence, 1.0) } else { SignalSpec::constant(0.0) };
    ScenarioSpec::new(ModelKind::IntegralLoop, DT, STEPS)
        .with_gain(k)
        .with_seed(seed)
        .with_input("R", r)
        .with_input("D", SignalSpec::smooth(coherence, 1.0))
}

fn split(k: f64, coherence: f64, seed: u64) -> ScenarioSpec {
    ScenarioSpec::new(ModelKind::SplitDisturbanceLoop, DT, STEPS)
        .with_gain(k)
        .with_seed(seed)
        .with_input("R", SignalSpec::constant(0.0))
        .with_input("D0", SignalSpec::smooth(coherence, 0.9f64.sqrt()))
        .with_input("D1", SignalSpec::smooth(coherence, 0.1f64.sqrt()))
}

fn proportional(k: f64, coherence: f64, calibrate: bool, seed: u64) -> ScenarioSpec {
    let mut s = ScenarioSpec::new(ModelKind::ProportionalLoop, DT, STEPS)
        .with_gain(k)
        .with_seed(seed)
        .with_input("R", SignalSpec::smooth(coherence, 1.0))
        .with_input("D_O", SignalSpec::smooth(coherence, 1.0))
        .with_input("D_P", SignalSpec::smooth(coherence, 1.0));
    s.calibrate_d_o = calibrate;
    s
}

/// The bundled scenario called `name`.
pub fn scenario(name: &str, seed: u64) -> Result<ScenarioSpec> {
    Ok(match name {
        "example1" => integral(100.0, 1.0, false, seed),
        "example2" => integral(100.0, 1.0, true, seed),
        "example3" => split(100.0, 1.0, seed),
        "example4" => proportional(100.0, 1.0, true, seed),
        "example5_1" => integral(1.0, 0.1, false, seed),
        "example5_2" => integral(1.0, 0.1, true, seed),
        "example5_3" => split(1.0, 0.1, seed),
        "example5_4" => proportional(1.0, 0.1, true, seed),
        "capacitor" => ScenarioSpec::new(ModelKind::Capacitor, 0.01, 100_001)
            .with_seed(seed)
            .with_input("V", SignalSpec::smooth(1.0, 1.0)),
        "passive" => {
            let mut s = ScenarioSpec::new(ModelKind::PassiveEquilibrium, DT, STEPS)
                .with_seed(seed)
                .with_input("D", SignalSpec::smooth(1.0, 1.0));
            s.time_constant = Some(0.05);
            s.stiffness = Some(2.0);
            s
        }
        "open_loop" => integral(0.0, 1.0, false, seed),
        "feedforward" => {
            let mut s = ScenarioSpec::new(ModelKind::FeedforwardLoop, DT, STEPS + 1)
                .with_seed(seed)
                .with_input("R", SignalSpec::constant(0.0))
                .with_input("D_O", SignalSpec::smooth(1.0, 1.0))
                .with_input("D_P", SignalSpec::constant(0.0));
            s.bias = Some(0.01);
            s
        }
        other => {
            return Err(Error::invalid(
                "scenario",
                format!("unknown scenario {other:?}; expected one of {}", SCENARIOS.join(", ")),
            ))
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CellOutcome {
    pub a: String,
    pub b: String,
    pub value: Corr,
    pub published: Option<f64>,
    pub limit: Option<f64>,
    pub range: Option<(f64, f64)>,
    pub pattern: Option<String>,
    pub class: String,
    /// `None` when the cell carries no acceptance condition.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub quantity: String,
    pub value: f64,
    pub published: Option<f64>,
    pub range: (f64, f64),
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableOutcome {
    pub id: String,
    pub title: String,
    pub cells: Vec<CellOutcome>,
    pub checks: Vec<CheckOutcome>,
}

impl TableOutcome {
    pub fn pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass != Some(false)) && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<String> {
        let cells = self
            .cells
            .iter()
            .filter(|c| c.pass == Some(false))
            .map(|c| format!("{}-{} = {}", c.a, c.b, show(c.value)));
        let checks = self
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} = {:.4}", c.quantity, c.value));
        cells.chain(checks).collect()
    }

    pub fn cell(&self, a: &str, b: &str) -> Option<&CellOutcome> {
        self.cells.iter().find(|c| (c.a == a && c.b == b) || (c.a == b && c.b == a))
    }

    /// One row per cell and per extra check, with the computed value, the
    /// published one, their absolute difference and a verdict.
    pub fn write_csv<W: Write>(&self, mut out: W, header: bool) -> Result<()> {
        if header {
            writeln!(out, "table,row,column,computed,published,abs_diff,limit,pattern,class,low,high,verdict")?;
        }
        let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
        let verdict = |p: Option<bool>| match p {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "-",
        };
        for c in &self.cells {
            let v = c.value.value();
            let diff = v.zip(c.published).map(|(a, b)| (a - b).abs());
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                self.id,
                c.a,
                c.b,
                v.map_or_else(|| "undef".to_string(), format_f64),
                opt(c.published),
                opt(diff),
                opt(c.limit),
                c.pattern.as_deref().unwrap_or(""),
                c.class,
                opt(c.range.map(|r| r.0)),
                opt(c.range.map(|r| r.1)),
                verdict(c.pass)
            )?;
        }
        for c in &self.checks {
            writeln!(
                out,
                "{},{},,{},{},{},,,,{},{},{}",
                self.id,
                c.quantity,
                format_f64(c.value),
                opt(c.published),
                opt(c.published.map(|p| (p - c.value).abs())),
                format_f64(c.range.0),
                format_f64(c.range.1),
                verdict(Some(c.pass))
            )?;
        }
        Ok(())
    }
}

fn show(c: Corr) -> String {
    c.value().map_or_else(|| "undef".into(), |v| format!("{v:.4}"))
}

fn quantity(trace: &Trace, settled: &Trace, q: &str) -> Result<f64> {
    if q == "rejection_ratio" {
        return Ok(rejection_ratio(trace)?.value());
    }
    if let Some(name) = q.strip_prefix("sd:") {
        return Ok(settled.channel(name)?.std());
    }
    if let Some((a, b)) = q.strip_prefix("corr:").and_then(|p| p.split_once(',')) {
        let c = crate::stats::correlation(settled.channel(a)?.samples(), settled.channel(b)?.samples())?;
        return c.value().ok_or_else(|| Error::Degenerate(format!("{q} is undefined")));
    }
    Err(Error::invalid("quantity", format!("unknown quantity {q:?}")))
}

/// Scores a simulated trace against one reference table.
pub fn evaluate_table(spec: &TableSpec, trace: &Trace, floor: f64) -> Result<TableOutcome> {
    let settled = trace.settled();
    let channels = spec.channels();
    let names: Vec<&str> = channels.iter().map(String::as_str).collect();
    let engine = CorrelationEngine::from_trace(trace, &names, floor)?;
    let report = engine.report();
    let mut cells = Vec::new();
    for c in &spec.cells {
        let value = report.get(&c.pair.0, &c.pair.1)?;
        let class = match (value.value(), spec.grading) {
            (None, _) => "undef".to_string(),
            (Some(r), crate::reference::Grading::Coarse) => crate::stats::classify(r, floor).to_string(),
            (Some(r), crate::reference::Grading::Graded) => crate::stats::classify_graded(r, floor).to_string(),
        };
        let mut pass = None;
        if let Some((lo, hi)) = c.range {
            pass = Some(value.value().is_some_and(|v| lo <= v && v <= hi));
        }
        if let Some(p) = &c.pattern {
            let ok = Pattern::parse(p)?.matches(value, floor, spec.grading, spec.matching);
            pass = Some(pass.unwrap_or(true) && ok);
        }
        cells.push(CellOutcome {
            a: c.pair.0.clone(),
            b: c.pair.1.clone(),
            value,
            published: c.published,
            limit: c.limit,
            range: c.range,
            pattern: c.pattern.clone(),
            class,
            pass,
        });
    }
    let mut checks = Vec::new();
    for c in &spec.checks {
        let value = quantity(trace, &settled, &c.quantity)?;
        checks.push(CheckOutcome {
            quantity: c.quantity.clone(),
            value,
            published: c.published,
            range: c.range,
            pass: c.range.0 <= value && value <= c.range.1,
        });
    }
    Ok(TableOutcome {
        id: spec.id.clone(),
        title: spec.title.clone(),
        cells,
        checks,
    })
}

/// Simulates once per distinct scenario and scores every table in `ids`.
pub fn run_tables(ids: &[&str], seed: u64, floor: f64) -> Result<Vec<TableOutcome>> {
    let refs = references();
    let specs: Vec<&TableSpec> = ids.iter().map(|id| refs.table(id)).collect::<Result<_>>()?;
    let mut names: Vec<&str> = specs.iter().map(|s| s.scenario.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    let traces: BTreeMap<&str, Trace> = names
        .par_iter()
        .map(|n| Ok((*n, simulate(&scenario(n, seed)?)?)))
        .collect::<Result<_>>()?;
    specs
        .iter()
        .map(|s| evaluate_table(s, &traces[s.scenario.as_str()], floor))
        .collect()
}

/// Tables for a printed table number.
pub fn run_table(number: u32, seed: u64, floor: f64) -> Result<Vec<TableOutcome>> {
    let ids = references().ids_for(number);
    if ids.is_empty() {
        return Err(Error::invalid("table", format!("{number} is not a table number (1-9)")));
    }
    run_tables(&ids, seed, floor)
}

#[derive(Debug, Clone, Serialize)]
pub struct TriangleCellOutcome {
    pub row: String,
    pub column: String,
    pub expected: String,
    pub value: Corr,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TriangleOutcome {
    pub noiseless: TriangleTables,
    pub noisy: TriangleTables,
    pub cells: Vec<TriangleCellOutcome>,
    pub signs: Vec<TriangleCellOutcome>,
}

impl TriangleOutcome {
    pub fn pass(&self) -> bool {
        self.cells.iter().chain(&self.signs).all(|c| c.pass)
    }
}

fn triangle_cell_ok(expected: &str, value: Corr, floor: f64, ident: f64, tol: f64) -> Result<bool> {
    Ok(match (Pattern::parse(expected)?, value.value()) {
        (Pattern::Undefined, v) => v.is_none(),
        (Pattern::Zero, Some(v)) => v.abs() < floor,
        (Pattern::Value(p), Some(v)) if p.abs() == 1.0 => (v - p).abs() <= ident,
        (Pattern::Value(p), Some(v)) => (v - p).abs() <= tol,
        _ => false,
    })
}

/// Both triangle tables for the varying-reference loop, without and with
/// measurement noise, scored against the published entries.
pub fn triangle_experiment(seed: u64, noise_fraction: f64, floor: f64) -> Result<TriangleOutcome> {
    let trace = simulate(&scenario("example2", seed)?)?;
    let noiseless = triangle_faithfulness_tables(&trace, 0.0, 0)?;
    let noisy = triangle_faithfulness_tables(&trace, noise_fraction, derive_seed(seed, "triangle-noise"))?;
    let spec = &references().triangle;
    let mut cells = Vec::new();
    let rows: Vec<&TriangleRowSpec> = spec.non_collider.iter().chain(&spec.collider).collect();
    for row in rows {
        for (col, expected) in spec.columns.iter().zip(&row.cells) {
            let value = noiseless
                .cell(&row.row, col)
                .ok_or_else(|| Error::invalid("triangle", format!("no cell {}/{col}", row.row)))?;
            cells.push(TriangleCellOutcome {
                row: row.row.clone(),
                column: col.clone(),
                expected: expected.clone(),
                value,
                pass: triangle_cell_ok(expected, value, floor, spec.identity_tolerance, spec.value_tolerance)?,
            });
        }
    }
    let mut signs = Vec::new();
    for s in &spec.regularized_signs {
        let value = noisy
            .cell(&s.row, &s.column)
            .ok_or_else(|| Error::invalid("triangle", format!("no cell {}/{}", s.row, s.column)))?;
        let v = value.regularized().or(value.value());
        signs.push(TriangleCellOutcome {
            row: s.row.clone(),
            column: s.column.clone(),
            expected: if s.sign > 0 { "+".into() } else { "-".into() },
            value,
            pass: v.is_some_and(|v| v * s.sign as f64 > 0.0),
        });
    }
    Ok(TriangleOutcome { noiseless, noisy, cells, signs })
}

#[derive(Debug, Clone, Serialize)]
pub struct Discovery {
    pub graph: CausalGraph,
    pub report: CorrelationReport,
    pub faithfulness: FaithfulnessReport,
    pub diagram: String,
}

/// Correlations of a simulated run compared with the model's causal graph,
/// plus the skeleton a constraint-based search recovers from them.
pub fn discover(trace: &Trace, floor: f64, max_cond: usize) -> Result<Discovery> {
    let graph = default_graph(trace.scenario());
    let nodes: Vec<&str> = graph.nodes().iter().map(String::as_str).collect();
    let mut engine = CorrelationEngine::from_trace(trace, &nodes, floor)?;
    let learned = pc_skeleton(&mut engine, &nodes, floor, max_cond)?;
    let report = engine.into_report();
    let faithfulness = faithfulness_violations(&graph, &report, floor)?.with_learned_skeleton(learned);
    let mut diagram = side_by_side(&graph, &report, floor)?;
    let fmt = |s: &Skeleton| {
        let v: Vec<String> = s.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        format!("{{{}}}", v.join(", "))
    };
    diagram.push_str(&format!(
        "\ntrue adjacency:   {}\nlearned skeleton: {}\n",
        fmt(&faithfulness.skeleton_truth),
        fmt(&faithfulness.skeleton_learned)
    ));
    Ok(Discovery { graph, report, faithfulness, diagram })
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlRun {
    pub seed: u64,
    pub f1: f64,
    pub faithful: bool,
}

/// Skeleton search on random linear-Gaussian DAGs, where it should work.
pub fn positive_control(n_datasets: usize, n_nodes: usize, n_samples: usize, seed: u64, floor: f64) -> Result<Vec<ControlRun>> {
    (0..n_datasets)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, &format!("positive-control/{i}"));
            let dag = LinearGaussianDag::random(n_nodes, 0.4, s)?;
            let data = dag.sample(n_samples, s);
            let labels = dag.graph.nodes().to_vec();
            let mut engine = CorrelationEngine::new(labels.clone(), data, floor)?;
            let nodes: Vec<&str> = labels.iter().map(String::as_str).collect();
            let learned = pc_skeleton(&mut engine, &nodes, floor, 3)?;
            let report = faithfulness_violations(&dag.graph, engine.report(), floor)?;
            Ok(ControlRun {
                seed: s,
                f1: skeleton_f1(&learned, &dag.graph.skeleton()),
                faithful: report.is_faithful(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Figure1 {
    pub capacitance: f64,
    pub sd_v: f64,
    pub sd_i: f64,
    pub interval: f64,
    pub corr_dense: f64,
    pub corr_decimated: f64,
    pub lag1_autocorr_decimated: f64,
    /// MI between each current sample and the voltage slope to the next sample.
    pub mi_dense: f64,
    pub mi_decimated: f64,
    /// MI between simultaneous samples.
    pub mi_pointwise_dense: f64,
    pub mi_pointwise_decimated: f64,
    #[serde(skip)]
    pub panels: Vec<(String, Vec<String>, Vec<Vec<f64>>)>,
}

fn sequential_mi(v: &[f64], i: &[f64], dt: f64, bins: usize) -> Result<f64> {
    let slope: Vec<f64> = v.windows(2).map(|p| (p[1] - p[0]) / dt).collect();
    mutual_information(&i[..slope.len()], &slope, bins)
}

/// Capacitor driven by smooth noise, sampled densely and at `interval`.
pub fn figure1(seed: u64, interval: f64) -> Result<Figure1> {
    let mut spec = scenario("capacitor", seed)?;
    spec.n_steps = 4_000_001;
    let trace = simulate(&spec)?;
    let (v, i) = (trace.channel("V")?, trace.channel("I")?);
    let dt = v.dt();
    let vd = decimate(v, interval)?;
    let id = decimate(i, interval)?;
    let pearson = |a: &[f64], b: &[f64]| crate::stats::moments::pearson(a, b).unwrap_or(f64::NAN);
    let vs = vd.samples();
    let capacitance = spec.capacitance.unwrap_or(v.std() / crate::signals::differentiate(v)?.std());
    let dense_n = 1_000_000.min(v.len());
    let (vdense, idense) = (&v.samples()[..dense_n], &i.samples()[..dense_n]);

    let window = |w: &Waveform, secs: f64| -> Vec<f64> {
        w.samples()[..((secs / w.dt()).round() as usize + 1).min(w.len())].to_vec()
    };
    let time = |w: &Waveform, n: usize| (0..n).map(|k| w.time_at(k)).collect::<Vec<f64>>();
    let a = window(v, 20.0);
    let b = window(i, 20.0);
    let ta = time(v, a.len());
    let short = 100.min(vd.len());
    let panels = vec![
        ("fig1a_voltage".to_string(), vec!["t".into(), "V".into()], vec![ta.clone(), a.clone()]),
        ("fig1b_current".to_string(), vec!["t".into(), "I".into()], vec![ta, b.clone()]),
        ("fig1c_dense".to_string(), vec!["V".into(), "I".into()], vec![a, b]),
        (
            "fig1d_decimated_short".to_string(),
            vec!["V".into(), "I".into()],
            vec![vs[..short].to_vec(), id.samples()[..short].to_vec()],
        ),
        (
            "fig1e_decimated_long".to_string(),
            vec!["V".into(), "I".into()],
            vec![vs.to_vec(), id.samples().to_vec()],
        ),
    ];
    Ok(Figure1 {
        capacitance,
        sd_v: v.std(),
        sd_i: i.std(),
        interval,
        corr_dense: pearson(v.samples(), i.samples()),
        corr_decimated: pearson(vs, id.samples()),
        lag1_autocorr_decimated: pearson(&vs[..vs.len() - 1], &vs[1..]),
        mi_dense: sequential_mi(vdense, idense, dt, 16)?,
        mi_decimated: sequential_mi(vs, id.samples(), interval, 16)?,
        mi_pointwise_dense: mutual_information(vdense, idense, 16)?,
        mi_pointwise_decimated: mutual_information(vs, id.samples(), 16)?,
        panels,
    })
}

/// Writes `columns` as a CSV with the given header.
pub fn write_columns<W: Write>(mut out: W, header: &[String], columns: &[Vec<f64>]) -> Result<()> {
    writeln!(out, "{}", header.join(","))?;
    let n = columns.iter().map(Vec::len).min().unwrap_or(0);
    for k in 0..n {
        let row: Vec<String> = columns.iter().map(|c| format_f64(c[k])).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Feedforward {
    pub bias: f64,
    pub duration: f64,
    pub final_p: f64,
    pub expected_final_p: f64,
    pub feedback_ratio: f64,
    pub feedforward_ratio: f64,
}

/// Feedforward drift under a biased disturbance measurement, and rejection
/// compared with the proportional feedback loop on the same inputs.
pub fn feedforward_comparison(seed: u64) -> Result<Feedforward> {
    let drift_spec = scenario("feedforward", seed)?;
    let bias = drift_spec.bias.unwrap_or(0.0);
    let drift = simulate(&drift_spec)?;
    let p = drift.channel("P")?;

    let mut ff = drift_spec.clone();
    ff.inputs.insert("D_P".into(), SignalSpec::smooth(1.0, 1.0));
    let mut fb = ff.clone();
    fb.model = ModelKind::ProportionalLoop;
    fb.gain = 100.0;
    fb.bias = None;
    let (ff_trace, fb_trace) = rayon::join(|| simulate(&ff), || simulate(&fb));
    Ok(Feedforward {
        bias,
        duration: p.duration(),
        final_p: p.last(),
        expected_final_p: -bias * p.duration(),
        feedback_ratio: rejection_ratio(&fb_trace?)?.value(),
        feedforward_ratio: rejection_ratio(&ff_trace?)?.value(),
    })
}

/// Default floor for callers that do not calibrate their own.
pub fn default_floor() -> f64 {
    references().floor.max(DEFAULT_FLOOR)
}

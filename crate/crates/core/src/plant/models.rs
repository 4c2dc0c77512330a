//! Forward-Euler simulators, one per [`ModelKind`].

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::plant::{ModelKind, ScenarioSpec, SignalSpec, Trace};
use crate::signals::{self, Waveform};
use crate::stats::moments;

/// Any channel beyond this multiple of the largest input magnitude is an instability.
pub const INSTABILITY_FACTOR: f64 = 1e6;

/// Runs whichever simulator matches `spec.model`.
pub fn simulate(spec: &ScenarioSpec) -> Result<Trace> {
    match spec.model {
        ModelKind::IntegralLoop => simulate_integral(spec),
        ModelKind::SplitDisturbanceLoop => simulate_split_disturbance(spec),
        ModelKind::ProportionalLoop => simulate_proportional(spec),
        ModelKind::Capacitor => simulate_capacitor(spec),
        ModelKind::PassiveEquilibrium => simulate_passive_equilibrium(spec),
        ModelKind::FeedforwardLoop => simulate_feedforward(spec),
    }
}

fn expect_model(spec: &ScenarioSpec, model: ModelKind) -> Result<()> {
    if spec.model != model {
        return Err(Error::invalid(
            "model",
            format!("expected {model:?}, got {:?}", spec.model),
        ));
    }
    spec.validate()
}

fn realize_inputs(spec: &ScenarioSpec) -> Result<BTreeMap<String, Waveform>> {
    spec.inputs
        .iter()
        .map(|(name, sig)| Ok((name.clone(), sig.realize(name, spec.seed, spec.n_steps, spec.dt)?)))
        .collect()
}

fn input_scale(inputs: &BTreeMap<String, Waveform>) -> f64 {
    let m = inputs.values().map(Waveform::max_abs).fold(0.0, f64::max);
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

fn check_stability(trace: &Trace, scale: f64) -> Result<()> {
    let limit = INSTABILITY_FACTOR * scale;
    for (name, w) in trace.channels() {
        if let Some(i) = w.samples().iter().position(|v| !(v.abs() <= limit)) {
            return Err(Error::Instability {
                channel: name.to_string(),
                time: w.time_at(i),
                value: w.samples()[i],
                limit,
            });
        }
    }
    Ok(())
}

fn wave(spec: &ScenarioSpec, samples: Vec<f64>) -> Waveform {
    Waveform::new(spec.dt, 0.0, samples).expect("simulation output is non-empty")
}

/// Output `O` of the integrating controller for the given `R` and total disturbance `D`.
fn integral_output(spec: &ScenarioSpec, r: &[f64], d: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = spec.n_steps;
    let lag = spec.lag_steps()?;
    let (k, dt) = (spec.gain, spec.dt);
    let o0 = spec.initial("O");
    let mut o = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    let mut oi = o0;
    for i in 0..n {
        o.push(oi);
        let delayed = if i >= lag { o[i - lag] } else { o0 };
        let pi = delayed + d[i];
        p.push(pi);
        oi += k * (r[i] - pi) * dt;
    }
    Ok((o, p))
}

/// Integrating controller, optionally with transport lag.
pub fn simulate_integral(spec: &ScenarioSpec) -> Result<Trace> {
    expect_model(spec, ModelKind::IntegralLoop)?;
    let inputs = realize_inputs(spec)?;
    let (r, d) = (&inputs["R"], &inputs["D"]);
    let (o, p) = integral_output(spec, r.samples(), d.samples())?;
    let e: Vec<f64> = r.samples().iter().zip(&p).map(|(r, p)| r - p).collect();

    let mut trace = Trace::new(spec.clone());
    trace.insert("P", wave(spec, p))?;
    trace.insert("R", r.clone())?;
    trace.insert("E", wave(spec, e))?;
    trace.insert("O", wave(spec, o))?;
    trace.insert("D", d.clone())?;
    check_stability(&trace, input_scale(&inputs))?;
    Ok(trace)
}

/// Integral loop whose disturbance is split into an observed `D0` and unobserved `D1`.
pub fn simulate_split_disturbance(spec: &ScenarioSpec) -> Result<Trace> {
    expect_model(spec, ModelKind::SplitDisturbanceLoop)?;
    let inputs = realize_inputs(spec)?;
    let (r, d0, d1) = (&inputs["R"], &inputs["D0"], &inputs["D1"]);
    let (s0, s1) = (d0.std(), d1.std());
    if s1 > 0.0 && ((s0 * s0) / (s1 * s1) - 9.0).abs() > 0.9 {
        log::warn!(
            "var(D0)/var(D1) = {:.3}; the split-disturbance example assumes 9",
            (s0 * s0) / (s1 * s1)
        );
    }
    let d = d0.zip_with(d1, |a, b| a + b)?;
    let (o, p) = integral_output(spec, r.samples(), d.samples())?;
    let e: Vec<f64> = r.samples().iter().zip(&p).map(|(r, p)| r - p).collect();
    let o_d0: Vec<f64> = o.iter().zip(d0.samples()).map(|(o, d)| o + d).collect();

    let mut trace = Trace::new(spec.clone());
    trace.insert("P", wave(spec, p))?;
    trace.insert("R", r.clone())?;
    trace.insert("E", wave(spec, e))?;
    trace.insert("O", wave(spec, o))?;
    trace.insert("O+D0", wave(spec, o_d0))?;
    trace.insert("D0", d0.clone())?;
    trace.insert("D1", d1.clone())?;
    trace.insert("D", d)?;
    check_stability(&trace, input_scale(&inputs))?;
    Ok(trace)
}

struct ProportionalRun {
    p: Vec<f64>,
    e: Vec<f64>,
    o: Vec<f64>,
}

fn proportional_run(spec: &ScenarioSpec, r: &[f64], d_o: &[f64], d_p: &[f64]) -> Result<ProportionalRun> {
    let n = spec.n_steps;
    let lag = spec.lag_steps()?;
    let (k, dt) = (spec.gain, spec.dt);
    let mut x = spec.initial("X");
    let mut run = ProportionalRun {
        p: Vec::with_capacity(n),
        e: Vec::with_capacity(n),
        o: Vec::with_capacity(n),
    };
    for i in 0..n {
        let p = d_p[i] + x;
        let e = r[i] - p;
        let o = k * e;
        run.p.push(p);
        run.e.push(e);
        run.o.push(o);
        let acting = if i >= lag { run.o[i - lag] } else { 0.0 };
        x += (acting + d_o[i]) * dt;
    }
    Ok(run)
}

/// Finds the `D_O` amplitude at which `D_O` alone produces the same error
/// standard deviation as `D_P` alone (secant iteration on the amplitude).
pub fn calibrate_d_o_sigma(spec: &ScenarioSpec) -> Result<f64> {
    let SignalSpec::SmoothNoise { coherence_time, seed, .. } = spec.input("D_O")?.clone() else {
        return Err(Error::invalid("inputs.D_O", "calibration needs smooth noise"));
    };
    let n = spec.n_steps;
    let start = spec.warmup_samples();
    let zeros = vec![0.0; n];
    let d_p = spec.input("D_P")?.realize("D_P", spec.seed, n, spec.dt)?;
    let target = moments::std(&proportional_run(spec, &zeros, &zeros, d_p.samples())?.e[start..]);
    if target <= 0.0 {
        return Err(Error::Degenerate(
            "D_P alone produces no error signal; nothing to match".into(),
        ));
    }
    let error_sd = |sigma: f64| -> Result<f64> {
        let d_o = SignalSpec::SmoothNoise { coherence_time, sigma, seed }.realize("D_O", spec.seed, n, spec.dt)?;
        Ok(moments::std(&proportional_run(spec, &zeros, d_o.samples(), &zeros)?.e[start..]))
    };
    let (mut s0, mut s1) = (1.0, 2.0);
    let (mut f0, mut f1) = (error_sd(s0)? - target, error_sd(s1)? - target);
    for _ in 0..30 {
        if (f1 / target).abs() < 1e-9 || f1 == f0 {
            break;
        }
        let s2 = (s1 - f1 * (s1 - s0) / (f1 - f0)).max(1e-12);
        s0 = s1;
        f0 = f1;
        s1 = s2;
        f1 = error_sd(s1)? - target;
    }
    if (f1 / target).abs() > 0.02 {
        return Err(Error::Degenerate(format!(
            "D_O calibration did not converge (relative mismatch {:.3})",
            f1 / target
        )));
    }
    Ok(s1)
}

/// Proportional controller acting through an integrating environment.
pub fn simulate_proportional(spec: &ScenarioSpec) -> Result<Trace> {
    expect_model(spec, ModelKind::ProportionalLoop)?;
    let mut inputs = realize_inputs(spec)?;
    let calibrated = if spec.calibrate_d_o {
        let sigma = calibrate_d_o_sigma(spec)?;
        let SignalSpec::SmoothNoise { coherence_time, seed, .. } = spec.input("D_O")?.clone() else {
            unreachable!("validated");
        };
        let d_o = SignalSpec::SmoothNoise { coherence_time, sigma, seed }.realize("D_O", spec.seed, spec.n_steps, spec.dt)?;
        inputs.insert("D_O".into(), d_o);
        Some(sigma)
    } else {
        None
    };
    let (r, d_o, d_p) = (&inputs["R"], &inputs["D_O"], &inputs["D_P"]);
    let run = proportional_run(spec, r.samples(), d_o.samples(), d_p.samples())?;

    let mut trace = Trace::new(spec.clone());
    if let Some(s) = calibrated {
        trace.set_calibrated_sigma_d_o(s);
    }
    trace.insert("P", wave(spec, run.p))?;
    trace.insert("R", r.clone())?;
    trace.insert("E", wave(spec, run.e))?;
    trace.insert("O", wave(spec, run.o))?;
    trace.insert("D_O", d_o.clone())?;
    trace.insert("D_P", d_p.clone())?;
    check_stability(&trace, input_scale(&inputs))?;
    Ok(trace)
}

/// Voltage source across a capacitor: `I = C dV/dt`, `V` truncated to the length of `I`.
pub fn simulate_capacitor(spec: &ScenarioSpec) -> Result<Trace> {
    expect_model(spec, ModelKind::Capacitor)?;
    let inputs = realize_inputs(spec)?;
    let v = &inputs["V"];
    let dv = signals::differentiate(v)?;
    let c = match spec.capacitance {
        Some(c) => c,
        None => {
            let sd = dv.std();
            if sd <= 0.0 {
                return Err(Error::Degenerate(
                    "constant voltage: no capacitance makes sd(I) equal sd(V)".into(),
                ));
            }
            v.std() / sd
        }
    };
    let mut trace = Trace::new(spec.clone());
    trace.insert("V", v.slice(0, v.len() - 1)?)?;
    trace.insert("I", dv.map(|x| c * x))?;
    check_stability(&trace, input_scale(&inputs))?;
    Ok(trace)
}

/// Ball in a bowl with viscous friction: relaxes towards `D / kappa`.
/// `O` is the restoring force `-kappa * P`.
pub fn simulate_passive_equilibrium(spec: &ScenarioSpec) -> Result<Trace> {
    expect_model(spec, ModelKind::PassiveEquilibrium)?;
    let tau = spec.time_constant.expect("validated");
    let kappa = spec.stiffness.expect("validated");
    let inputs = realize_inputs(spec)?;
    let d = &inputs["D"];
    let rate = spec.dt / tau;
    let mut p = Vec::with_capacity(spec.n_steps);
    let mut x = spec.initial("P");
    for &di in d.samples() {
        p.push(x);
        x += rate * (di / kappa - x);
    }
    let o: Vec<f64> = p.iter().map(|v| -kappa * v).collect();
    let mut trace = Trace::new(spec.clone());
    trace.insert("P", wave(spec, p))?;
    trace.insert("O", wave(spec, o))?;
    trace.insert("D", d.clone())?;
    check_stability(&trace, input_scale(&inputs))?;
    Ok(trace)
}

/// Example-4 environment driven open loop by the output that would cancel
/// the measured `D_O`; a measurement bias integrates into `P` unopposed.
pub fn simulate_feedforward(spec: &ScenarioSpec) -> Result<Trace> {
    expect_model(spec, ModelKind::FeedforwardLoop)?;
    let bias = spec.bias.unwrap_or(0.0);
    let inputs = realize_inputs(spec)?;
    let (r, d_o, d_p) = (&inputs["R"], &inputs["D_O"], &inputs["D_P"]);
    let n = spec.n_steps;
    let mut x = spec.initial("X");
    let (mut p, mut e, mut o) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let pi = d_p.samples()[i] + x;
        let oi = -(d_o.samples()[i] + bias);
        p.push(pi);
        e.push(r.samples()[i] - pi);
        o.push(oi);
        x += (oi + d_o.samples()[i]) * spec.dt;
    }
    let mut trace = Trace::new(spec.clone());
    trace.insert("P", wave(spec, p))?;
    trace.insert("R", r.clone())?;
    trace.insert("E", wave(spec, e))?;
    trace.insert("O", wave(spec, o))?;
    trace.insert("D_O", d_o.clone())?;
    trace.insert("D_P", d_p.clone())?;
    check_stability(&trace, input_scale(&inputs).max(bias.abs()))?;
    Ok(trace)
}

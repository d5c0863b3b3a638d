use rand_chacha::ChaCha8Rng;

use super::config::{ChannelConfig, LoadedScenario, StateLiteral};
use super::report::{bit_histogram, Criterion, Report, ScenarioOutput};
use crate::channels::{choi_of_channel, g_functionality_n, kraus_apply, post_select_exact, post_select_successes};
use crate::error::{Error, Result};
use crate::harness::{
    correction_error, distance_from_mixed, experiment_encrypted, experiment_plain, imbalance, ExperimentInputs,
};
use crate::protocol::{scheme1_run, scheme1_sim, Scheme1Instance};
use crate::qmat::{trace_distance, DensityMatrix};

const DEFAULT_ATTEMPTS: u64 = 10_000;
const EXPERIMENT_SHOTS: u64 = 1024;

fn literal_or(lit: &Option<StateLiteral>, default: &str) -> Result<DensityMatrix> {
    match lit {
        Some(l) => l.resolve(),
        None => StateLiteral::Name(default.into()).resolve(),
    }
}

pub(super) fn choi_demo(loaded: &LoadedScenario, rng: &mut ChaCha8Rng) -> Result<ScenarioOutput> {
    let cfg = &loaded.config;
    let channel_cfg = cfg.channel.clone().unwrap_or(ChannelConfig::Depolarizing(0.3));
    let channel = channel_cfg.kraus(cfg.seed)?;
    let rho = literal_or(&cfg.inputs.alice, "+")?;
    if rho.qubits() != channel.in_qubits() {
        return Err(Error::Config(format!(
            "input has {} qubits, channel takes {}",
            rho.qubits(),
            channel.in_qubits()
        )));
    }
    let mut report = Report::new(cfg, "exact", None);
    let choi = choi_of_channel(&channel);
    let tr = choi.trace();
    let g = g_functionality_n(&rho.transpose(), &choi.normalized()?, &[])?;
    let lhs = DensityMatrix::from_matrix(g.scale_real(tr))?;
    let direct = kraus_apply(&channel, &rho)?;
    let d = trace_distance(&lhs, &direct)?;
    report.value("choi_trace", tr);
    report.distance("trG_G_vs_channel", d);
    report.check(Criterion::at_most("choi_identity", d, 1e-12));
    if let ChannelConfig::Depolarizing(p) = channel_cfg {
        let closed = DensityMatrix::mixture(&[(p, rho.clone()), (1.0 - p, DensityMatrix::maximally_mixed(rho.qubits()))])?;
        let d = trace_distance(&lhs, &closed)?;
        report.distance("trG_G_vs_closed_form", d);
        report.check(Criterion::at_most("choi_identity.closed_form", d, 1e-12));
    }

    let attempts = cfg.shots.unwrap_or(DEFAULT_ATTEMPTS);
    let exact = post_select_exact(&choi, &rho, &DensityMatrix::empty())?;
    let expected = 1.0 / tr;
    report.check(Criterion::at_most(
        "post_select.exact_rate",
        (exact.success_probability - expected).abs(),
        1e-12,
    ));
    let hits = post_select_successes(&choi, &rho, &DensityMatrix::empty(), attempts, rng)?;
    let freq = hits as f64 / attempts as f64;
    let sigma = (expected * (1.0 - expected) / attempts as f64).sqrt();
    report.histogram("post_select", bit_histogram([attempts - hits, hits]));
    report.value("post_select.expected", expected);
    report.value("post_select.frequency", freq);
    report.value("post_select.sigma", sigma);
    report.check(Criterion::at_most("post_select.rate_5sigma", (freq - expected).abs(), 5.0 * sigma));
    if let Some(state) = exact.state {
        let d = trace_distance(&state, &direct)?;
        report.distance("post_select_state_vs_channel", d);
        report.check(Criterion::at_most("post_select.state", d, 1e-10));
    }
    Ok(ScenarioOutput {
        report,
        transcripts: Vec::new(),
    })
}

pub(super) fn scheme1(loaded: &LoadedScenario, rng: &mut ChaCha8Rng) -> Result<ScenarioOutput> {
    let cfg = &loaded.config;
    let channel = cfg
        .channel
        .as_ref()
        .ok_or_else(|| Error::Config("scheme1 needs a channel".into()))?
        .spec(cfg.seed)?;
    let rho_a = literal_or(&cfg.inputs.alice, "0")?;
    let rho_b = literal_or(&cfg.inputs.bob, "")?;
    if rho_a.qubits() + rho_b.qubits() != channel.in_qubits() {
        return Err(Error::Config(format!(
            "inputs have {} qubits, channel takes {}",
            rho_a.qubits() + rho_b.qubits(),
            channel.in_qubits()
        )));
    }
    let split = cfg.split.unwrap_or(channel.out_qubits());
    if split > channel.out_qubits() {
        return Err(Error::Config(format!("split {split} exceeds {} output qubits", channel.out_qubits())));
    }
    let adversary = cfg.adversary.spec()?;
    let inst = Scheme1Instance {
        channel: channel.clone(),
        rho_a: rho_a.clone(),
        rho_b: rho_b.clone(),
        split,
    };
    let run = scheme1_run(&channel, &rho_a, &rho_b, split, &adversary, rng)?;
    let (ideal_1, ideal_2) = scheme1_sim(&inst, &adversary)?;
    let mut report = Report::new(cfg, "exact", None);
    if let Some(p) = run.success_probability {
        report.value("success_probability", p);
    }
    report.check(Criterion::holds("privacy_audit", run.leaks.is_empty()));
    match (&run.tau_1, &run.tau_2) {
        (Some(t1), Some(t2)) => {
            let d1 = trace_distance(t1, &ideal_1)?;
            let d2 = trace_distance(t2, &ideal_2)?;
            report.distance("party1.real_vs_ideal", d1);
            report.distance("party2.real_vs_ideal", d2);
            report.check(Criterion::at_most("party1.output", d1, 1e-10));
            report.check(Criterion::at_most("party2.output", d2, 1e-10));
        }
        _ => report.check(Criterion::holds("completed", adversary.abort_round.is_some())),
    }
    Ok(ScenarioOutput {
        report,
        transcripts: vec![run.transcript],
    })
}

fn experiment_inputs(loaded: &LoadedScenario) -> Result<ExperimentInputs> {
    let pick = |lit: &Option<StateLiteral>, default: &str, a: &str, b: &str| -> Result<bool> {
        let name = match lit {
            None => default.to_string(),
            Some(StateLiteral::Name(n)) => n.clone(),
            Some(other) => return Err(Error::Config(format!("experiment input must be {a:?} or {b:?}, got {other:?}"))),
        };
        match name.as_str() {
            n if n == a => Ok(false),
            n if n == b => Ok(true),
            n => Err(Error::Config(format!("experiment input must be {a:?} or {b:?}, got {n:?}"))),
        }
    };
    Ok(ExperimentInputs {
        p1_one: pick(&loaded.config.inputs.alice, "0", "0", "1")?,
        p2_minus: pick(&loaded.config.inputs.bob, "+", "+", "-")?,
    })
}

pub(super) fn experiment(loaded: &LoadedScenario, rng: &mut ChaCha8Rng) -> Result<ScenarioOutput> {
    let cfg = &loaded.config;
    let inputs = experiment_inputs(loaded)?;
    let shots = cfg.shots.unwrap_or(EXPERIMENT_SHOTS);
    if shots == 0 {
        return Err(Error::Config("shots must be at least 1".into()));
    }
    let mut report = Report::new(cfg, "sampled", None);
    let plain = experiment_plain(inputs, shots, rng)?;
    let enc = experiment_encrypted(inputs, cfg.keys, shots, rng)?;
    let sigma = 1.0 / (shots as f64).sqrt();
    report.histogram("plain", bit_histogram(plain.histogram));
    report.histogram("encrypted.raw", bit_histogram(enc.histogram));
    report.histogram("encrypted.corrected", bit_histogram(enc.corrected_histogram));
    report.value("sigma", sigma);
    report.value("plain.exact_p0", plain.exact[0]);
    report.value("plain.imbalance", imbalance(&plain.histogram));
    report.value("corrected.imbalance", imbalance(&enc.corrected_histogram));

    report.check(Criterion::at_most("corrected_equals_plain.all_keys", correction_error()?, 1e-12));
    let bound = 5.0 * sigma;
    if (plain.exact[0] - 0.5).abs() < 1e-12 {
        report.check(Criterion::at_most("corrected.balance_5sigma", imbalance(&enc.corrected_histogram), bound));
    }
    let view = &enc.eavesdropper;
    report.distance("eavesdropper.q1_vs_mixed", distance_from_mixed(&view.q1));
    report.distance("eavesdropper.q2_vs_mixed", distance_from_mixed(&view.q2));
    report.distance("eavesdropper.joint_vs_mixed", distance_from_mixed(&view.joint));
    report.check(Criterion::at_most("eavesdropper.q1", distance_from_mixed(&view.q1), 1e-12));
    report.check(Criterion::at_most("eavesdropper.q2", distance_from_mixed(&view.q2), 1e-12));
    report.check(Criterion::at_most("eavesdropper.joint", distance_from_mixed(&view.joint), 1e-12));
    report.check(Criterion::at_most(
        "eavesdropper.outcome_uniform",
        (view.raw_outcome[0] - 0.5).abs(),
        1e-12,
    ));
    Ok(ScenarioOutput {
        report,
        transcripts: Vec::new(),
    })
}

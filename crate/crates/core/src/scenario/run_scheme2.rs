use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::{LoadedScenario, StateLiteral};
use super::report::{Criterion, Report, ScenarioOutput};
use super::{diagonal, mode_name, three_sigma_bound};
use crate::clifford::{bit_string, compile_t_gadget, int_to_bits};
use crate::error::{Error, Result};
use crate::harness::{compare_views, Role};
use crate::idealfunc::Scheme2Layout;
use crate::protocol::{
    hybrid_replay, qcp_learn, qcp_run, repetition_rng, scheme2_run, AdversarySpec, Averaging, Behavior, HybridLevel,
    Mode, QcpProgram, ReusableSession, Scheme2Instance, SchemeId,
};
use crate::qmat::{trace_distance, DensityMatrix};

const SAMPLED_RUNS: usize = 1000;
const MONTE_CARLO_SAMPLES: usize = 10_000;
const REUSABLE_REGISTERS: usize = 3;
const EXACT_TOL: f64 = 1e-9;

/// Honest outputs are only predictable when nobody substitutes or tampers.
fn predictable(adv: &AdversarySpec) -> bool {
    adv.behavior != Behavior::Malicious
}

fn resolve_or_zeros(lit: &Option<StateLiteral>, n: usize) -> Result<DensityMatrix> {
    match lit {
        Some(l) => l.resolve(),
        None if n == 0 => Ok(DensityMatrix::empty()),
        None => Ok(DensityMatrix::zeros(n)),
    }
}

/// `Q` compiled from the circuit file onto `(x_A, x_B, T^k, 0^k)`. By default
/// Alice receives every surviving data wire and Bob the returned `0^k`.
fn build_instance(loaded: &LoadedScenario, x_a: DensityMatrix, all_outputs_to_alice: bool) -> Result<Scheme2Instance> {
    let cfg = &loaded.config;
    let gates = loaded
        .circuit
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{} needs a circuit file", cfg.scenario)))?;
    let compiled = compile_t_gadget(gates)?;
    let t = compiled.t_count;
    if let Some(k) = cfg.k {
        if k != t {
            return Err(Error::Config(format!("k = {k} but the circuit has {t} T gates")));
        }
    }
    let q = compiled.circuit.with_idle_wires(t)?;
    let n = gates.qubits();
    let n_a = x_a.qubits();
    if let Some(na) = cfg.alice_qubits {
        if na != n_a {
            return Err(Error::Config(format!("alice_qubits = {na} but Alice's input has {n_a}")));
        }
    }
    if n_a > n {
        return Err(Error::Config(format!("Alice's input has {n_a} qubits, the circuit {n}")));
    }
    let x_b = resolve_or_zeros(&cfg.inputs.bob, n - n_a)?;
    if x_b.qubits() != n - n_a {
        return Err(Error::Config(format!("Bob's input needs {} qubits, got {}", n - n_a, x_b.qubits())));
    }
    let default_m_a = if all_outputs_to_alice { q.outputs() } else { q.outputs() - t };
    let m_a = cfg.alice_outputs.unwrap_or(default_m_a);
    let layout = Scheme2Layout {
        n_a,
        n_b: n - n_a,
        m_a,
        k: t,
        lambda: cfg.lambda,
    };
    layout.check_circuit(&q).map_err(|e| Error::Config(e.to_string()))?;
    Ok(Scheme2Instance { layout, q, x_a, x_b })
}

/// `inputs.alice`, else the first query, else `|0…0⟩` over `alice_qubits`
/// (all circuit qubits when unset).
fn alice_input(loaded: &LoadedScenario) -> Result<DensityMatrix> {
    if let (None, Some(q)) = (&loaded.config.inputs.alice, loaded.config.inputs.queries.first()) {
        return q.resolve();
    }
    let n = loaded.config.alice_qubits.or(loaded.circuit.as_ref().map(|c| c.qubits())).unwrap_or(0);
    resolve_or_zeros(&loaded.config.inputs.alice, n)
}

/// The index `o` of a cq state `|o⟩⟨o| ⊗ ρ` from a sampled run.
fn sampled_outcome(cq: &DensityMatrix, bits: usize) -> Result<String> {
    let p = diagonal(&cq.keep_range(0, bits)?);
    let o = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap_or(0);
    Ok(bit_string(&int_to_bits(o, bits)))
}

pub(super) fn scheme2(loaded: &LoadedScenario, rng: &mut ChaCha8Rng) -> Result<ScenarioOutput> {
    let cfg = &loaded.config;
    let inst = build_instance(loaded, alice_input(loaded)?, false)?;
    let adversary = cfg.adversary.spec()?;
    let mode = cfg.method.unwrap_or(Mode::Exact);
    let mut report = Report::new(cfg, mode_name(mode), loaded.circuit_text.clone());
    let reference = inst.reference_cq(&inst.x_a)?;
    let bits = inst.q.shape().total_measured();
    let mut transcripts = Vec::new();
    match mode {
        Mode::Exact => {
            let out = scheme2_run(&inst, &adversary, Mode::Exact, rng)?;
            report.value("accept_probability", out.accept_probability);
            report.check(Criterion::holds("privacy_audit", out.leaks.is_empty()));
            if !out.aborted() {
                let d = trace_distance(&out.joint_cq()?, &reference)?;
                report.distance("output_vs_cm_eval_exact", d);
                if predictable(&adversary) {
                    report.check(Criterion::at_most("correctness", d, EXACT_TOL));
                }
            } else if predictable(&adversary) {
                report.check(Criterion::holds("completed", false));
            }
            transcripts.push(out.transcript);
        }
        Mode::Sampled => {
            let runs = cfg.repetitions.unwrap_or(SAMPLED_RUNS);
            let base: u64 = rng.gen();
            let mut states = Vec::new();
            let mut hist: BTreeMap<String, u64> = BTreeMap::new();
            let mut leaks = 0;
            for i in 0..runs {
                let out = scheme2_run(&inst, &adversary, Mode::Sampled, &mut repetition_rng(base, i as u64))?;
                leaks += out.leaks.len();
                if !out.aborted() {
                    let cq = out.joint_cq()?;
                    *hist.entry(sampled_outcome(&cq, bits)?).or_default() += 1;
                    states.push(cq);
                } else {
                    *hist.entry("abort".into()).or_default() += 1;
                }
                if i == 0 {
                    transcripts.push(out.transcript);
                }
            }
            report.histogram("outcomes", hist);
            report.value("runs", runs as f64);
            report.value("accepted_runs", states.len() as f64);
            report.check(Criterion::holds("privacy_audit", leaks == 0));
            if !states.is_empty() {
                let w = 1.0 / states.len() as f64;
                let parts: Vec<_> = states.into_iter().map(|s| (w, s)).collect();
                let avg = DensityMatrix::mixture(&parts)?;
                let d = trace_distance(&avg, &reference)?;
                let p = diagonal(&reference.keep_range(0, bits)?);
                let bound = three_sigma_bound(&p, parts.len()) + EXACT_TOL;
                report.distance("output_vs_cm_eval_exact", d);
                report.value("three_sigma_bound", bound);
                if predictable(&adversary) {
                    report.check(Criterion::at_most("correctness_3sigma", d, bound));
                }
            }
        }
    }
    Ok(ScenarioOutput { report, transcripts })
}

pub(super) fn reusable(loaded: &LoadedScenario, rng: &mut ChaCha8Rng) -> Result<ScenarioOutput> {
    let cfg = &loaded.config;
    let inst = build_instance(loaded, alice_input(loaded)?, false)?;
    let adversary = cfg.adversary.spec()?;
    let mode = cfg.method.unwrap_or(Mode::Exact);
    let registers = cfg.repetitions.unwrap_or(REUSABLE_REGISTERS);
    let queries = if cfg.inputs.queries.is_empty() {
        vec![inst.x_a.clone()]
    } else {
        cfg.inputs.queries.iter().map(StateLiteral::resolve).collect::<Result<_>>()?
    };
    let mut report = Report::new(cfg, mode_name(mode), loaded.circuit_text.clone());
    let mut session = ReusableSession::new(inst.clone(), registers, mode, rng)?;
    let mut transcripts = Vec::new();
    for i in 0..registers {
        let x = &queries[i % queries.len()];
        let run = session.run(x, &adversary, rng)?;
        report.value(format!("run{i}.accept_probability"), run.accept_probability);
        if let Some(cq) = &run.joint_cq {
            if mode == Mode::Exact {
                let d = trace_distance(cq, &inst.reference_cq(x)?)?;
                report.distance(format!("run{i}.output_vs_cm_eval_exact"), d);
                if predictable(&adversary) {
                    report.check(Criterion::at_most(format!("run{i}.correctness"), d, EXACT_TOL));
                }
            }
        } else if predictable(&adversary) {
            report.check(Criterion::holds(format!("run{i}.completed"), false));
        }
        transcripts.push(run.transcript);
    }
    let exhausted = matches!(session.run(&queries[0], &adversary, rng), Err(Error::RegistersExhausted(n)) if n == registers);
    report.check(Criterion::holds("registers_exhausted", exhausted));
    Ok(ScenarioOutput { report, transcripts })
}

/// Steps where the two hybrids coincide exactly under orbit averaging.
const STEP_TOL: f64 = 1e-6;
const ENDPOINT_TOL: f64 = 0.03;

pub(super) fn hybrids(loaded: &LoadedScenario, rng: &mut ChaCha8Rng) -> Result<ScenarioOutput> {
    let cfg = &loaded.config;
    let inst = build_instance(loaded, alice_input(loaded)?, false)?;
    let adversary = cfg.adversary.spec()?;
    let side = match adversary.corrupted {
        Some(r @ (Role::Alice | Role::Bob)) => r,
        _ => return Err(Error::Config("hybrids needs adversary.corrupt set to alice or bob".into())),
    };
    let mode = cfg.method.unwrap_or(Mode::Exact);
    let label = if mode == Mode::Exact { "exact" } else { "monte-carlo" };
    let mut report = Report::new(cfg, label, loaded.circuit_text.clone());
    let levels = HybridLevel::ladder(SchemeId::Scheme2);
    let top = levels.len() - 1;
    let mut endpoint = None;
    if adversary.tamper.is_empty() {
        let views = levels
            .iter()
            .map(|&l| hybrid_replay(l, side, &inst, &adversary, Averaging::Exact, rng))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..top {
            let name = format!("H{i}-H{}", i + 1);
            let r = compare_views(&name, &views[i], &views[i + 1])?;
            report.distance(name.clone(), r.max);
            report.check(Criterion::at_most(format!("step.{name}"), r.max, STEP_TOL));
        }
        endpoint = Some(compare_views("H0-sim", &views[0], &views[top])?);
    }
    if mode == Mode::Sampled || endpoint.is_none() {
        let n = cfg.shots.map_or(MONTE_CARLO_SAMPLES, |s| s as usize);
        let real = hybrid_replay(levels[0], side, &inst, &adversary, Averaging::MonteCarlo(n), rng)?;
        let sim = hybrid_replay(levels[top], side, &inst, &adversary, Averaging::MonteCarlo(n), rng)?;
        let r = compare_views("H0-sim", &real, &sim)?;
        report.value("monte_carlo.samples", n as f64);
        if let Some(exact) = endpoint.replace(r) {
            report.distance("H0-sim.exact", exact.max);
            report.check(Criterion::at_most("endpoint.exact", exact.max, ENDPOINT_TOL));
        }
    }
    let end = endpoint.expect("set above");
    for (slot, d) in &end.distances {
        report.distance(format!("H0-sim.{slot}"), *d);
    }
    report.distance("H0-sim", end.max);
    report.check(Criterion::at_most("endpoint", end.max, ENDPOINT_TOL));
    Ok(ScenarioOutput {
        report,
        transcripts: Vec::new(),
    })
}

pub(super) fn qcp(loaded: &LoadedScenario, rng: &mut ChaCha8Rng) -> Result<ScenarioOutput> {
    let cfg = &loaded.config;
    let queries: Vec<DensityMatrix> = if cfg.inputs.queries.is_empty() {
        vec![alice_input(loaded)?]
    } else {
        cfg.inputs.queries.iter().map(StateLiteral::resolve).collect::<Result<_>>()?
    };
    if queries.iter().any(|q| q.qubits() != queries[0].qubits()) {
        return Err(Error::Config("all queries need the same width".into()));
    }
    let inst = build_instance(loaded, queries[0].clone(), true)?;
    let program = QcpProgram::new(inst.layout, inst.q.clone(), inst.x_b.clone()).map_err(|e| Error::Config(e.to_string()))?;
    let adversary = cfg.adversary.spec()?;
    let mode = cfg.method.unwrap_or(Mode::Exact);
    let mut report = Report::new(cfg, mode_name(mode), loaded.circuit_text.clone());
    let references = queries.iter().map(|x| program.reference(x)).collect::<Result<Vec<_>>>()?;
    let mut transcripts = Vec::new();
    match mode {
        Mode::Exact => {
            let run = qcp_run(&program, &queries, &adversary, Mode::Exact, rng)?;
            for (i, (y, r)) in run.outputs.iter().zip(&references).enumerate() {
                let d = trace_distance(y, r)?;
                report.distance(format!("query{i}.output_vs_cm_eval_exact"), d);
                if predictable(&adversary) {
                    report.check(Criterion::at_most(format!("query{i}.correctness"), d, EXACT_TOL));
                }
            }
            report.value("completed_queries", run.outputs.len() as f64);
            if predictable(&adversary) {
                report.check(Criterion::holds("all_queries_completed", run.aborted_at.is_none()));
            }
            transcripts = run.transcripts;
        }
        Mode::Sampled => {
            let runs = cfg.repetitions.unwrap_or(SAMPLED_RUNS);
            let base: u64 = rng.gen();
            let mut sums: Vec<Vec<(f64, DensityMatrix)>> = vec![Vec::new(); queries.len()];
            for r in 0..runs {
                let run = qcp_run(&program, &queries, &adversary, Mode::Sampled, &mut repetition_rng(base, r as u64))?;
                for (i, y) in run.outputs.into_iter().enumerate() {
                    sums[i].push((1.0, y));
                }
                if r == 0 {
                    transcripts = run.transcripts;
                }
            }
            report.value("runs", runs as f64);
            for (i, (parts, reference)) in sums.iter_mut().zip(&references).enumerate() {
                if parts.is_empty() {
                    report.check(Criterion::holds(format!("query{i}.completed"), false));
                    continue;
                }
                let w = 1.0 / parts.len() as f64;
                parts.iter_mut().for_each(|p| p.0 = w);
                let avg = DensityMatrix::mixture(parts)?;
                let p = diagonal(reference);
                let tv = 0.5 * diagonal(&avg).iter().zip(&p).map(|(a, b)| (a - b).abs()).sum::<f64>();
                let bound = three_sigma_bound(&p, parts.len()) + EXACT_TOL;
                report.distance(format!("query{i}.output_vs_cm_eval_exact"), trace_distance(&avg, reference)?);
                report.distance(format!("query{i}.diagonal_tv"), tv);
                if predictable(&adversary) {
                    report.check(Criterion::at_most(format!("query{i}.distribution_3sigma"), tv, bound));
                }
            }
        }
    }
    if inst.layout.n_a == 1 && inst.layout.m_a == 1 {
        let table = qcp_learn(&program, rng)?;
        let mut worst: f64 = 0.0;
        for (bit, pr1) in &table {
            let expected = program.reference(&DensityMatrix::basis(&[*bit]))?.matrix()[(1, 1)].re;
            report.value(format!("learned.pr1_given_{}", u8::from(*bit)), *pr1);
            worst = worst.max((pr1 - expected).abs());
        }
        report.value("learned.queries", table.len() as f64);
        report.check(Criterion::at_most("learned_table", worst, EXACT_TOL));
    }
    Ok(ScenarioOutput { report, transcripts })
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dealer::{DealerSession, Verdict};
use crate::channels::{apply_via_choi, g_functionality_n, kraus_apply, ChoiMatrix, KrausChannel};
use crate::error::{Error, Result};
use crate::harness::Role;
use crate::qmat::{ComplexMatrix, DensityMatrix};

/// The function party 1 brings to the QPFE functionality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ChannelSpec {
    Kraus(KrausChannel),
    Choi(ChoiMatrix),
}

impl ChannelSpec {
    pub fn in_qubits(&self) -> usize {
        match self {
            ChannelSpec::Kraus(k) => k.in_qubits(),
            ChannelSpec::Choi(c) => c.in_qubits(),
        }
    }

    pub fn out_qubits(&self) -> usize {
        match self {
            ChannelSpec::Kraus(k) => k.out_qubits(),
            ChannelSpec::Choi(c) => c.out_qubits(),
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        match self {
            ChannelSpec::Kraus(k) => kraus_apply(k, rho),
            ChannelSpec::Choi(c) => apply_via_choi(c, rho),
        }
    }
}

/// Result of an ideal-world QPFE call.
#[derive(Clone, Debug)]
pub struct IdealOutcome {
    /// `None` when the functionality halted.
    pub outputs: Option<Vec<DensityMatrix>>,
    /// `𝓔(ρ_1 ⊗ … ⊗ ρ_n)` before splitting.
    pub joint: Option<DensityMatrix>,
}

fn roles(n: usize) -> Result<Vec<Role>> {
    match n {
        1 => Ok(vec![Role::Alice]),
        2 => Ok(vec![Role::Alice, Role::Bob]),
        _ => Err(Error::Protocol(format!("{n} parties; the dealer models one or two"))),
    }
}

/// Computes `𝓔(ρ_1, …, ρ_n)` and hands party `i` its `split[i]` output qubits
/// on `Continue`; on `Abort` nothing is released unless `guaranteed_delivery`.
pub fn qpfe_ideal(
    channel: &ChannelSpec,
    inputs: &[DensityMatrix],
    split: &[usize],
    verdict: Verdict,
    guaranteed_delivery: bool,
) -> Result<IdealOutcome> {
    let parties = roles(inputs.len())?;
    if split.len() != inputs.len() || split.iter().sum::<usize>() != channel.out_qubits() {
        return Err(Error::Shape(format!(
            "output split {split:?} does not cover {} output qubits",
            channel.out_qubits()
        )));
    }
    let mut session: DealerSession<DensityMatrix, DensityMatrix> = DealerSession::new(0, &parties);
    for (r, rho) in parties.iter().zip(inputs) {
        session.register(*r, rho.clone())?;
    }
    let mut joint = None;
    session.compute(|ins| {
        let all = DensityMatrix::tensor_all(parties.iter().map(|r| &ins[r]));
        let out = channel.apply(&all)?;
        let mut res = BTreeMap::new();
        let mut start = 0;
        for (r, &w) in parties.iter().zip(split) {
            res.insert(*r, out.keep_range(start, w)?);
            start += w;
        }
        joint = Some(out);
        Ok(res)
    })?;
    let delivered = session.deliver(verdict, guaranteed_delivery)?;
    Ok(match delivered {
        Some(map) => IdealOutcome {
            outputs: Some(parties.iter().map(|r| map[r].clone()).collect()),
            joint,
        },
        None => IdealOutcome {
            outputs: None,
            joint: None,
        },
    })
}

/// MPQC for `G`: the dealer evaluates `g_functionality_n` on the submitted
/// registers and returns the subnormalized result.
pub fn mpqc_ideal(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    rest: &[DensityMatrix],
    verdict: Verdict,
    guaranteed_delivery: bool,
) -> Result<Option<ComplexMatrix>> {
    let mut session: DealerSession<Vec<DensityMatrix>, ComplexMatrix> =
        DealerSession::new(0, &[Role::Alice, Role::Bob]);
    session.register(Role::Alice, vec![rho1.clone(), rho2.clone()])?;
    session.register(Role::Bob, rest.to_vec())?;
    session.compute(|ins| {
        let a = &ins[&Role::Alice];
        let g = g_functionality_n(&a[0], &a[1], &ins[&Role::Bob])?;
        Ok(BTreeMap::from([(Role::Alice, g)]))
    })?;
    Ok(session
        .deliver(verdict, guaranteed_delivery)?
        .map(|mut m| m.remove(&Role::Alice).expect("computed")))
}

/// One-time-pad keys of the two-qubit experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentKeys {
    pub a1: bool,
    pub b1: bool,
    pub a2: bool,
    pub b2: bool,
    pub s: bool,
}

impl ExperimentKeys {
    /// All 32 key tuples, `a1` most significant.
    pub fn all() -> Vec<Self> {
        (0..32u8)
            .map(|v| Self {
                a1: v & 16 != 0,
                b1: v & 8 != 0,
                a2: v & 4 != 0,
                b2: v & 2 != 0,
                s: v & 1 != 0,
            })
            .collect()
    }
}

/// Identifier of the experiment circuit understood by [`classical_pfe_a3`].
pub const CNOT_MEASURE: &str = "cnot-measure";

/// The classical correction bit for the encrypted experiment circuit.
pub fn classical_pfe_a3(keys: &ExperimentKeys, circuit_id: &str) -> Result<bool> {
    match circuit_id {
        CNOT_MEASURE => Ok(keys.a1 ^ keys.a2),
        other => Err(Error::UnknownCircuit(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::choi_of_channel;
    use crate::qmat::trace_distance;

    #[test]
    fn identity_returns_inputs() {
        let a = DensityMatrix::named("+").unwrap();
        let b = DensityMatrix::named("1").unwrap();
        let out = qpfe_ideal(
            &ChannelSpec::Kraus(KrausChannel::identity(2)),
            &[a.clone(), b.clone()],
            &[1, 1],
            Verdict::Continue,
            false,
        )
        .unwrap();
        let outs = out.outputs.unwrap();
        assert!(trace_distance(&outs[0], &a).unwrap() < 1e-12);
        assert!(trace_distance(&outs[1], &b).unwrap() < 1e-12);
    }

    #[test]
    fn abort_releases_nothing() {
        let a = DensityMatrix::zeros(1);
        let spec = ChannelSpec::Kraus(KrausChannel::identity(1));
        let out = qpfe_ideal(&spec, std::slice::from_ref(&a), &[1], Verdict::Abort, false).unwrap();
        assert!(out.outputs.is_none());
        let out = qpfe_ideal(&spec, &[a], &[1], Verdict::Abort, true).unwrap();
        assert!(out.outputs.is_some());
    }

    #[test]
    fn depolarizing_through_choi() {
        let plus = DensityMatrix::named("+").unwrap();
        let p = 0.3;
        let spec = ChannelSpec::Choi(choi_of_channel(&KrausChannel::depolarizing(p).unwrap()));
        let out = qpfe_ideal(&spec, std::slice::from_ref(&plus), &[1], Verdict::Continue, false).unwrap();
        let expected = &plus.matrix().scale_real(p) + &ComplexMatrix::identity(2).scale_real((1.0 - p) / 2.0);
        assert!(out.outputs.unwrap()[0].matrix().approx_eq(&expected, 1e-12));
    }

    #[test]
    fn mpqc_routes_g() {
        let plus = DensityMatrix::named("+").unwrap();
        let choi = choi_of_channel(&KrausChannel::depolarizing(0.7).unwrap());
        let g = mpqc_ideal(&plus.transpose(), &choi.normalized().unwrap(), &[], Verdict::Continue, false)
            .unwrap()
            .unwrap();
        assert!((g.trace().re - 1.0 / choi.trace()).abs() < 1e-12);
        assert!(mpqc_ideal(&plus, &choi.normalized().unwrap(), &[], Verdict::Abort, false)
            .unwrap()
            .is_none());
    }

    #[test]
    fn a3_table() {
        assert!(!classical_pfe_a3(&ExperimentKeys::default(), CNOT_MEASURE).unwrap());
        let keys = ExperimentKeys {
            a1: true,
            ..Default::default()
        };
        assert!(classical_pfe_a3(&keys, CNOT_MEASURE).unwrap());
        for k in ExperimentKeys::all() {
            let base = ExperimentKeys {
                b1: false,
                b2: false,
                s: false,
                ..k
            };
            assert_eq!(classical_pfe_a3(&k, CNOT_MEASURE), classical_pfe_a3(&base, CNOT_MEASURE));
        }
        assert_eq!(
            classical_pfe_a3(&keys, "other"),
            Err(Error::UnknownCircuit("other".into()))
        );
    }
}

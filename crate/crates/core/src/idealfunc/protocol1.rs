use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordOp, CmCircuit, CmLayer, Selector};
use crate::error::{Error, Result};
use crate::garble::{qgarble, GarbledCircuit, GarbledInputKey};

/// Public wire counts of a Scheme 2 instance.
///
/// `Q` acts on `(x_A, x_B, T^k, 0^k)`; its first `m_a` output wires go to Alice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scheme2Layout {
    pub n_a: usize,
    pub n_b: usize,
    pub m_a: usize,
    pub k: usize,
    pub lambda: usize,
}

impl Scheme2Layout {
    pub fn q_inputs(&self) -> usize {
        self.n_a + self.n_b + 2 * self.k
    }

    /// Width of `C_{B,in}`: `(x_B, 0^λ)`.
    pub fn m_b1_width(&self) -> usize {
        self.n_b + self.lambda
    }

    /// Width of `C_{A,in}`: `(x_A, m_{B,1}, T^k, 0^k)`.
    pub fn m_a_width(&self) -> usize {
        self.n_a + self.m_b1_width() + 2 * self.k
    }

    /// Width of `C_{A,out}`: `(y_A, 0^λ)`.
    pub fn out_width(&self) -> usize {
        self.m_a + self.lambda
    }

    pub fn check_circuit(&self, q: &CmCircuit) -> Result<()> {
        if q.inputs() != self.q_inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.q_inputs(),
                got: q.inputs(),
            });
        }
        if q.outputs() < self.m_a {
            return Err(Error::Shape(format!(
                "circuit has {} outputs but Alice expects {}",
                q.outputs(),
                self.m_a
            )));
        }
        Ok(())
    }

    pub fn bob_outputs(&self, q: &CmCircuit) -> usize {
        q.outputs() - self.m_a
    }
}

fn check_width(name: &str, c: &CliffordOp, expected: usize) -> Result<()> {
    if c.qubits() != expected {
        return Err(Error::Shape(format!("{name} acts on {} qubits, expected {expected}", c.qubits())));
    }
    Ok(())
}

/// `Q[C_{A,out}]` over the wire order `(x_A, x_B, 0^λ, T^k, 0^k)` that `U_dec`
/// produces. Outputs are `(C_{A,out}(y_A, 0^λ), y_B)`.
pub fn build_q_b(q: &CmCircuit, c_a_out: &CliffordOp, layout: &Scheme2Layout) -> Result<CmCircuit> {
    layout.check_circuit(q)?;
    check_width("C_A,out", c_a_out, layout.out_width())?;
    let lam = layout.lambda;
    let data = layout.n_a + layout.n_b;
    let width = layout.q_inputs() + lam;
    let order: Vec<usize> = (0..data).chain(data + lam..width).chain(data..data + lam).collect();
    let front = CliffordOp::permutation(&order)?;

    let n_d = q.outputs();
    let m_a = layout.m_a;
    let order: Vec<usize> = (0..m_a).chain(n_d..n_d + lam).chain(m_a..n_d).collect();
    let back = c_a_out
        .tensor(&CliffordOp::identity(n_d - m_a))
        .compose(&CliffordOp::permutation(&order)?)?;

    let traps = CliffordOp::identity(lam);
    let d = q.layers().len();
    let merge_back = d > 0 && q.layers()[d - 1].measured == 0;
    let selectors = q.map_cliffords(|i, c| {
        let mut out = c.tensor(&traps);
        if i == 0 {
            out = out.compose(&front)?;
        }
        if i + 1 == d && merge_back {
            out = back.compose(&out)?;
        }
        Ok(out)
    })?;
    let mut layers: Vec<CmLayer> = selectors
        .into_iter()
        .zip(q.layers())
        .map(|(selector, l)| CmLayer {
            selector,
            measured: l.measured,
        })
        .collect();
    if d == 0 {
        layers.push(CmLayer {
            selector: Selector::Fixed(back.compose(&front)?),
            measured: 0,
        });
    } else if !merge_back {
        layers.push(CmLayer {
            selector: Selector::Fixed(back),
            measured: 0,
        });
    }
    CmCircuit::new(width, layers)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AliceTwoPcInput {
    pub c_a_in: CliffordOp,
    pub c_a_out: CliffordOp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BobTwoPcInput {
    pub c_b_in: CliffordOp,
    pub q: CmCircuit,
    pub layout: Scheme2Layout,
}

/// Bob's output `(W, Q̃)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BobTwoPcOutput {
    pub w: CliffordOp,
    pub garbled: GarbledCircuit,
}

/// The functionality's output together with the state it keeps.
#[derive(Clone, Debug)]
pub struct Protocol1Output {
    pub bob: BobTwoPcOutput,
    pub e0: GarbledInputKey,
    pub q_b: CmCircuit,
}

/// `U_dec = (I ⊗ C_{B,in}^{-1} ⊗ I) C_{A,in}^{-1}`.
pub fn u_dec(c_a_in: &CliffordOp, c_b_in: &CliffordOp, layout: &Scheme2Layout) -> Result<CliffordOp> {
    check_width("C_A,in", c_a_in, layout.m_a_width())?;
    check_width("C_B,in", c_b_in, layout.m_b1_width())?;
    let mid = CliffordOp::identity(layout.n_a)
        .tensor(&c_b_in.inverse())
        .tensor(&CliffordOp::identity(2 * layout.k));
    mid.compose(&c_a_in.inverse())
}

/// Garbles `Q[C_{A,out}]` and returns `W = E_0 U_dec` and `Q̃` for Bob.
pub fn classical_2pc_protocol1<R: Rng + ?Sized>(
    alice: &AliceTwoPcInput,
    bob: &BobTwoPcInput,
    rng: &mut R,
) -> Result<Protocol1Output> {
    let layout = &bob.layout;
    let q_b = build_q_b(&bob.q, &alice.c_a_out, layout)?;
    let dec = u_dec(&alice.c_a_in, &bob.c_b_in, layout)?;
    let (e0, garbled) = qgarble(&q_b, q_b.shape(), 0, rng)?;
    let w = e0.e0.compose(&dec)?;
    Ok(Protocol1Output {
        bob: BobTwoPcOutput { w, garbled },
        e0,
        q_b,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoPcKind {
    Round1,
    Round2,
    Out,
}

/// Message shape of the three-message 2PC. The dealer computes the result,
/// so these carry only the session binding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoPcMessage {
    pub kind: TwoPcKind,
    pub session: u64,
}

impl TwoPcMessage {
    pub fn encode(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("serializable")
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Protocol(format!("bad 2PC message: {e}")))
    }
}

/// Bob's first message `m_B`.
pub fn twopc_1(session: u64) -> TwoPcMessage {
    TwoPcMessage {
        kind: TwoPcKind::Round1,
        session,
    }
}

/// Alice's reply `m_A` to `m_B`.
pub fn twopc_2(m_b: &TwoPcMessage) -> Result<TwoPcMessage> {
    if m_b.kind != TwoPcKind::Round1 {
        return Err(Error::Protocol("2PC_2 expects a round-1 message".into()));
    }
    Ok(TwoPcMessage {
        kind: TwoPcKind::Round2,
        session: m_b.session,
    })
}

/// Bob's output step on `m_A`.
pub fn twopc_out(m_a: &TwoPcMessage, session: u64) -> Result<TwoPcMessage> {
    if m_a.kind != TwoPcKind::Round2 || m_a.session != session {
        return Err(Error::Protocol("2PC_out expects this session's round-2 message".into()));
    }
    Ok(TwoPcMessage {
        kind: TwoPcKind::Out,
        session,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{cm_eval_exact, random_clifford};
    use crate::qmat::{trace_distance, DensityMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn layout(lambda: usize) -> Scheme2Layout {
        Scheme2Layout {
            n_a: 1,
            n_b: 1,
            m_a: 1,
            k: 0,
            lambda,
        }
    }

    fn inputs(l: &Scheme2Layout, q: CmCircuit, rng: &mut ChaCha8Rng) -> (AliceTwoPcInput, BobTwoPcInput) {
        let alice = AliceTwoPcInput {
            c_a_in: random_clifford(l.m_a_width(), rng),
            c_a_out: random_clifford(l.out_width(), rng),
        };
        let bob = BobTwoPcInput {
            c_b_in: random_clifford(l.m_b1_width(), rng),
            q,
            layout: *l,
        };
        (alice, bob)
    }

    #[test]
    fn identity_telescopes_to_e0() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let l = layout(0);
        let (alice, bob) = inputs(&l, CmCircuit::identity(2), &mut rng);
        let out = classical_2pc_protocol1(&alice, &bob, &mut rng).unwrap();
        assert!(out.bob.w.unitary().is_unitary(1e-10));
        let x = DensityMatrix::named("+").unwrap().tensor(&DensityMatrix::named("1").unwrap());
        let x_b1 = bob.c_b_in.apply(&x.keep_range(1, 1).unwrap()).unwrap();
        let m_a = alice.c_a_in.apply(&x.keep_range(0, 1).unwrap().tensor(&x_b1)).unwrap();
        let recovered = out.bob.w.apply(&m_a).unwrap();
        let direct = out.e0.e0.apply(&x).unwrap();
        assert!(trace_distance(&recovered, &direct).unwrap() < 1e-10);
    }

    #[test]
    fn w_matches_operator_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = layout(2);
        let (alice, bob) = inputs(&l, CmCircuit::identity(2), &mut rng);
        let out = classical_2pc_protocol1(&alice, &bob, &mut rng).unwrap();
        let expected = out.e0.e0.compose(&u_dec(&alice.c_a_in, &bob.c_b_in, &l).unwrap()).unwrap();
        assert_eq!(out.bob.w, expected);
        assert!(out.bob.w.consistency_error() < 1e-10);
    }

    #[test]
    fn q_b_wraps_alice_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = layout(2);
        let q = CmCircuit::single(CliffordOp::cnot(2, 0, 1).unwrap(), 0).unwrap();
        let c_out = random_clifford(l.out_width(), &mut rng);
        let q_b = build_q_b(&q, &c_out, &l).unwrap();
        assert_eq!(q_b.layers().len(), 1);
        let x = DensityMatrix::named("1").unwrap().tensor(&DensityMatrix::zeros(1));
        let input = x.keep_range(0, 2).unwrap().tensor(&DensityMatrix::zeros(2));
        let br = cm_eval_exact(&q_b, &input).unwrap();
        let y = cm_eval_exact(&q, &x).unwrap()[0].output.clone();
        let wrapped = c_out.apply(&y.keep_range(0, 1).unwrap().tensor(&DensityMatrix::zeros(2))).unwrap();
        let expected = wrapped.tensor(&y.keep_range(1, 1).unwrap());
        assert!(trace_distance(&br[0].output, &expected).unwrap() < 1e-10);
    }

    #[test]
    fn rejects_mismatched_keys() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let l = layout(1);
        let (mut alice, bob) = inputs(&l, CmCircuit::identity(2), &mut rng);
        alice.c_a_out = random_clifford(1, &mut rng);
        assert!(classical_2pc_protocol1(&alice, &bob, &mut rng).is_err());
    }

    #[test]
    fn message_chain() {
        let m1 = twopc_1(9);
        let m2 = twopc_2(&TwoPcMessage::decode(&m1.encode()).unwrap()).unwrap();
        assert_eq!(twopc_out(&m2, 9).unwrap().kind, TwoPcKind::Out);
        assert!(twopc_out(&m1, 9).is_err());
    }
}

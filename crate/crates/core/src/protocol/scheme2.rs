use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::world::{Wire, World};
use crate::clifford::{bit_string, random_clifford, t_state, CliffordOp, CmCircuit, Selector};
use crate::error::{Error, Result};
use crate::garble::GarbledCircuit;
use crate::harness::{take_message, Incoming, Outgoing, PartyMachine, Role, Step};
use crate::idealfunc::{
    classical_2pc_protocol1, twopc_1, twopc_2, twopc_out, AliceTwoPcInput, BobTwoPcInput, BobTwoPcOutput,
    DealerSession, Phase, Protocol1Output, Scheme2Layout, TwoPcMessage, Verdict,
};
use crate::qmat::DensityMatrix;

pub const M_B1: &str = "m_B1";
pub const M_A: &str = "m_A";
pub const M_B2: &str = "m_B2";
pub const TWOPC_1: &str = "2PC_1";
pub const TWOPC_OUT: &str = "2PC_out";
pub const ALICE_2PC_INPUT: &str = "alice_2pc_input";
pub const BOB_2PC_INPUT: &str = "bob_2pc_input";

/// Classical records written into the world.
pub const BOB_RAW: &str = "bob.raw";
pub const BOB_OUTCOMES: &str = "bob.outcomes";
pub const ALICE_TRAPS: &str = "alice.traps";

fn xor(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

pub(crate) fn to_json<T: serde::Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_vec(v).expect("serializable")
}

pub(crate) fn from_json<T: serde::de::DeserializeOwned>(bytes: &[u8], what: &str) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| Error::Protocol(format!("malformed {what}: {e}")))
}

/// Runs `Q̃` on `wires`: applies each descriptor, measures the leading wires
/// into `raw`, and picks adaptive descriptors by the pad-corrected outcomes.
/// Writes the corrected outcomes to `decoded` and returns the output wires.
pub fn eval_garbled_on_world<R: Rng + ?Sized>(
    world: &mut World,
    wires: &[Wire],
    gc: &GarbledCircuit,
    raw: &str,
    decoded: &str,
    rng: &mut R,
) -> Result<Vec<Wire>> {
    gc.validate()?;
    if wires.len() != gc.shape.inputs() + gc.lambda {
        return Err(Error::DimensionMismatch {
            expected: gc.shape.inputs() + gc.lambda,
            got: wires.len(),
        });
    }
    let pads = gc.pads();
    let mut cur = wires.to_vec();
    for layer in &gc.layers {
        match &layer.descriptor {
            Selector::Fixed(c) => world.apply(&cur, c)?,
            Selector::Adaptive(m) => world.apply_adaptive(&cur, |b| {
                let r = b.record(raw);
                let key = bit_string(&xor(r, &pads[..r.len()]));
                m.get(&key).cloned().ok_or(Error::MissingSelector(key))
            })?,
        }
        if layer.measured > 0 {
            world.measure(&cur[..layer.measured], raw, rng)?;
            cur.drain(..layer.measured);
        }
    }
    world.derive_record(decoded, |b| xor(b.record(raw), &pads));
    Ok(cur)
}

/// Plain evaluation of `q` on `wires`, outcomes recorded under `record`.
pub fn eval_cm_on_world<R: Rng + ?Sized>(
    world: &mut World,
    wires: &[Wire],
    q: &CmCircuit,
    record: &str,
    rng: &mut R,
) -> Result<Vec<Wire>> {
    if wires.len() != q.inputs() {
        return Err(Error::DimensionMismatch {
            expected: q.inputs(),
            got: wires.len(),
        });
    }
    let mut cur = wires.to_vec();
    for (i, layer) in q.layers().iter().enumerate() {
        match &layer.selector {
            Selector::Fixed(c) => world.apply(&cur, c)?,
            Selector::Adaptive(_) => world.apply_adaptive(&cur, |b| q.select(i, b.record(record)).cloned())?,
        }
        if layer.measured > 0 {
            world.measure(&cur[..layer.measured], record, rng)?;
            cur.drain(..layer.measured);
        }
    }
    Ok(cur)
}

/// Alice's last step: undoes `C_{A,out}`, measures the traps and keeps the
/// all-zero branch. Returns the acceptance probability and, unless it is
/// negligible, her output wires.
pub fn verify_output<R: Rng + ?Sized>(
    world: &mut World,
    wires: &[Wire],
    c_out: &CliffordOp,
    l: Scheme2Layout,
    rng: &mut R,
) -> Result<(f64, Option<Vec<Wire>>)> {
    if wires.len() != l.out_width() {
        return Err(Error::DimensionMismatch {
            expected: l.out_width(),
            got: wires.len(),
        });
    }
    world.apply(wires, &c_out.inverse())?;
    let zero = |b: &super::world::Branch| b.record(ALICE_TRAPS).iter().all(|t| !t);
    if l.lambda > 0 {
        world.measure(&wires[l.m_a..], ALICE_TRAPS, rng)?;
    }
    let p = world.probability(zero);
    if p <= 1e-12 {
        return Ok((p, None));
    }
    world.condition(zero)?;
    Ok((p, Some(wires[..l.m_a].to_vec())))
}

/// Alice in Scheme 2. Keys left as `None` are drawn from her rng stream.
pub struct AliceMachine {
    pub layout: Scheme2Layout,
    pub x_a: DensityMatrix,
    pub c_a_in: Option<CliffordOp>,
    pub c_a_out: Option<CliffordOp>,
    m_b1: Option<Vec<Wire>>,
    session: Option<TwoPcMessage>,
    sent: bool,
    pub output: Option<Vec<Wire>>,
    pub accept_probability: f64,
}

impl AliceMachine {
    pub fn new(layout: Scheme2Layout, x_a: DensityMatrix) -> Self {
        Self {
            layout,
            x_a,
            c_a_in: None,
            c_a_out: None,
            m_b1: None,
            session: None,
            sent: false,
            output: None,
            accept_probability: 0.0,
        }
    }

    /// Starts with a round-1 register Bob delivered earlier.
    pub fn with_pre_received(mut self, m_b1: Vec<Wire>) -> Self {
        self.m_b1 = Some(m_b1);
        self
    }

    fn round2(&mut self, world: &mut World, rng: &mut ChaCha8Rng) -> Result<Vec<Outgoing>> {
        let l = self.layout;
        if self.x_a.qubits() != l.n_a {
            return Err(Error::DimensionMismatch {
                expected: l.n_a,
                got: self.x_a.qubits(),
            });
        }
        let c_in = self.c_a_in.get_or_insert_with(|| random_clifford(l.m_a_width(), rng)).clone();
        let c_out = self.c_a_out.get_or_insert_with(|| random_clifford(l.out_width(), rng)).clone();
        let mut wires = world.alloc(&self.x_a)?;
        wires.extend(self.m_b1.clone().expect("checked by caller"));
        for _ in 0..l.k {
            wires.extend(world.alloc(&t_state())?);
        }
        wires.extend(world.alloc(&DensityMatrix::zeros(l.k))?);
        world.apply(&wires, &c_in)?;
        let reply = twopc_2(self.session.as_ref().expect("checked by caller"))?;
        self.sent = true;
        Ok(vec![
            Outgoing::new(Role::Bob, M_A).quantum(wires).classical(reply.encode()),
            Outgoing::new(Role::Dealer, ALICE_2PC_INPUT).classical(to_json(&AliceTwoPcInput {
                c_a_in: c_in,
                c_a_out: c_out,
            })),
        ])
    }

    fn finish(&mut self, wires: Vec<Wire>, world: &mut World, rng: &mut ChaCha8Rng) -> Result<Step> {
        let c_out = self.c_a_out.clone().expect("set in round 2");
        let (p, output) = verify_output(world, &wires, &c_out, self.layout, rng)?;
        self.accept_probability = p;
        match output {
            Some(out) => self.output = Some(out),
            None => return Ok(Step::Abort("trap check failed".into())),
        }
        Ok(Step::Done)
    }
}

impl PartyMachine for AliceMachine {
    fn role(&self) -> Role {
        Role::Alice
    }

    fn step(
        &mut self,
        _round: u32,
        inbox: &mut Vec<Incoming>,
        world: &mut World,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<Outgoing>, Step)> {
        if !self.sent {
            if self.m_b1.is_none() {
                if let Some(m) = take_message(inbox, M_B1) {
                    self.m_b1 = Some(m.quantum);
                }
            }
            if self.session.is_none() {
                if let Some(m) = take_message(inbox, TWOPC_1) {
                    self.session = Some(TwoPcMessage::decode(&m.classical)?);
                }
            }
            if self.m_b1.is_some() && self.session.is_some() {
                return Ok((self.round2(world, rng)?, Step::Continue));
            }
            return Ok((Vec::new(), Step::Continue));
        }
        match take_message(inbox, M_B2) {
            Some(m) => Ok((Vec::new(), self.finish(m.quantum, world, rng)?)),
            None => Ok((Vec::new(), Step::Continue)),
        }
    }

    fn private_blobs(&self) -> Vec<Vec<u8>> {
        let mut blobs = vec![to_json(self.x_a.matrix())];
        blobs.extend(self.c_a_in.iter().map(to_json));
        blobs.extend(self.c_a_out.iter().map(to_json));
        blobs
    }
}

/// Bob in Scheme 2.
pub struct BobMachine {
    pub layout: Scheme2Layout,
    pub q: CmCircuit,
    pub x_b: DensityMatrix,
    pub c_b_in: Option<CliffordOp>,
    pub session: u64,
    pre_sent: bool,
    started: bool,
    m_a: Option<Incoming>,
    result: Option<BobTwoPcOutput>,
    pub output: Option<Vec<Wire>>,
}

impl BobMachine {
    pub fn new(layout: Scheme2Layout, q: CmCircuit, x_b: DensityMatrix, session: u64) -> Self {
        Self {
            layout,
            q,
            x_b,
            c_b_in: None,
            session,
            pre_sent: false,
            started: false,
            m_a: None,
            result: None,
            output: None,
        }
    }

    /// Skips the quantum part of round 1; `c_b_in` must be the key used earlier.
    pub fn with_pre_sent(mut self, c_b_in: CliffordOp) -> Self {
        self.c_b_in = Some(c_b_in);
        self.pre_sent = true;
        self
    }

    /// `C_{B,in}(x_B, 0^λ)` as a new world register.
    pub fn encode_round1(&self, world: &mut World, c_b_in: &CliffordOp) -> Result<Vec<Wire>> {
        if self.x_b.qubits() != self.layout.n_b {
            return Err(Error::DimensionMismatch {
                expected: self.layout.n_b,
                got: self.x_b.qubits(),
            });
        }
        let mut wires = world.alloc(&self.x_b)?;
        wires.extend(world.alloc(&DensityMatrix::zeros(self.layout.lambda))?);
        world.apply(&wires, c_b_in)?;
        Ok(wires)
    }

    fn round1(&mut self, world: &mut World, rng: &mut ChaCha8Rng) -> Result<Vec<Outgoing>> {
        self.layout.check_circuit(&self.q)?;
        let c = self
            .c_b_in
            .get_or_insert_with(|| random_clifford(self.layout.m_b1_width(), rng))
            .clone();
        let mut out = Vec::new();
        if !self.pre_sent {
            let wires = self.encode_round1(world, &c)?;
            out.push(Outgoing::new(Role::Alice, M_B1).quantum(wires));
        }
        out.push(Outgoing::new(Role::Alice, TWOPC_1).classical(twopc_1(self.session).encode()));
        out.push(Outgoing::new(Role::Dealer, BOB_2PC_INPUT).classical(to_json(&BobTwoPcInput {
            c_b_in: c,
            q: self.q.clone(),
            layout: self.layout,
        })));
        Ok(out)
    }

    fn round3(&mut self, world: &mut World, rng: &mut ChaCha8Rng) -> Result<Vec<Outgoing>> {
        let m_a = self.m_a.take().expect("checked by caller");
        let res = self.result.take().expect("checked by caller");
        twopc_out(&TwoPcMessage::decode(&m_a.classical)?, self.session)?;
        world.apply(&m_a.quantum, &res.w)?;
        let out = eval_garbled_on_world(world, &m_a.quantum, &res.garbled, BOB_RAW, BOB_OUTCOMES, rng)?;
        let w = self.layout.out_width();
        self.output = Some(out[w..].to_vec());
        Ok(vec![Outgoing::new(Role::Alice, M_B2).quantum(out[..w].to_vec())])
    }
}

impl PartyMachine for BobMachine {
    fn role(&self) -> Role {
        Role::Bob
    }

    fn step(
        &mut self,
        _round: u32,
        inbox: &mut Vec<Incoming>,
        world: &mut World,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<Outgoing>, Step)> {
        if !self.started {
            self.started = true;
            return Ok((self.round1(world, rng)?, Step::Continue));
        }
        if self.m_a.is_none() {
            self.m_a = take_message(inbox, M_A);
        }
        if self.result.is_none() {
            if let Some(m) = take_message(inbox, TWOPC_OUT) {
                self.result = Some(from_json(&m.classical, "2PC output")?);
            }
        }
        if self.m_a.is_some() && self.result.is_some() {
            return Ok((self.round3(world, rng)?, Step::Done));
        }
        Ok((Vec::new(), Step::Continue))
    }

    fn private_blobs(&self) -> Vec<Vec<u8>> {
        let mut blobs = vec![to_json(self.x_b.matrix()), to_json(&self.q)];
        blobs.extend(self.c_b_in.iter().map(to_json));
        blobs
    }
}

/// The trusted dealer running the classical 2PC.
pub struct DealerMachine {
    session: DealerSession<Vec<u8>, Vec<u8>>,
    pub result: Option<Protocol1Output>,
}

impl DealerMachine {
    pub fn new(session: u64) -> Self {
        Self {
            session: DealerSession::new(session, &[Role::Alice, Role::Bob]),
            result: None,
        }
    }
}

impl PartyMachine for DealerMachine {
    fn role(&self) -> Role {
        Role::Dealer
    }

    fn step(
        &mut self,
        _round: u32,
        inbox: &mut Vec<Incoming>,
        _world: &mut World,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<Outgoing>, Step)> {
        for (label, role) in [(ALICE_2PC_INPUT, Role::Alice), (BOB_2PC_INPUT, Role::Bob)] {
            if let Some(m) = take_message(inbox, label) {
                if m.sender != role {
                    return Err(Error::Protocol(format!("{label} arrived from {}", m.sender)));
                }
                self.session.register(role, m.classical)?;
            }
        }
        if self.session.phase() != Phase::Collecting || !self.session.ready() {
            return Ok((Vec::new(), Step::Continue));
        }
        let mut result = None;
        self.session.compute(|ins| {
            let alice: AliceTwoPcInput = from_json(&ins[&Role::Alice], "Alice's 2PC input")?;
            let bob: BobTwoPcInput = from_json(&ins[&Role::Bob], "Bob's 2PC input")?;
            let r = classical_2pc_protocol1(&alice, &bob, rng)?;
            let bytes = to_json(&r.bob);
            result = Some(r);
            Ok([(Role::Bob, bytes)].into())
        })?;
        self.result = result;
        let out = self.session.deliver(Verdict::Continue, false)?.expect("continue delivers");
        Ok((
            vec![Outgoing::new(Role::Bob, TWOPC_OUT).classical(out[&Role::Bob].clone())],
            Step::Done,
        ))
    }
}

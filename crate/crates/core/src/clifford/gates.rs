use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::circuit::{all_strings, CmCircuit, CmLayer, Selector};
use super::tableau::CliffordOp;
use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, DensityMatrix, C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    S(usize),
    X(usize),
    Z(usize),
    T(usize),
    Cnot(usize, usize),
    /// Measure the first `k` live data qubits (in index order) and drop them.
    Measure(usize),
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "H q{q}"),
            Gate::S(q) => write!(f, "S q{q}"),
            Gate::X(q) => write!(f, "X q{q}"),
            Gate::Z(q) => write!(f, "Z q{q}"),
            Gate::T(q) => write!(f, "T q{q}"),
            Gate::Cnot(c, t) => write!(f, "CNOT q{c} q{t}"),
            Gate::Measure(k) => write!(f, "MEASURE {k}"),
        }
    }
}

/// Gate list over `{H, S, X, Z, T, CNOT}` with `MEASURE` layer delimiters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCircuit {
    qubits: usize,
    gates: Vec<Gate>,
}

fn parse_qubit(tok: &str, line: usize) -> Result<usize> {
    let digits = tok.strip_prefix('q').unwrap_or(tok);
    digits.parse().map_err(|_| Error::Parse {
        line,
        message: format!("expected a qubit like q0, found {tok:?}"),
    })
}

impl GateCircuit {
    pub fn new(qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut live = vec![true; qubits];
        for g in &gates {
            let touched: Vec<usize> = match *g {
                Gate::H(q) | Gate::S(q) | Gate::X(q) | Gate::Z(q) | Gate::T(q) => vec![q],
                Gate::Cnot(c, t) => {
                    if c == t {
                        return Err(Error::Shape(format!("{g}: control equals target")));
                    }
                    vec![c, t]
                }
                Gate::Measure(k) => {
                    let alive: Vec<usize> = (0..qubits).filter(|&q| live[q]).collect();
                    if k > alive.len() {
                        return Err(Error::Shape(format!("{g}: only {} live qubits", alive.len())));
                    }
                    for &q in &alive[..k] {
                        live[q] = false;
                    }
                    continue;
                }
            };
            for q in touched {
                if q >= qubits || !live[q] {
                    return Err(Error::Shape(format!("{g}: qubit q{q} is not live")));
                }
            }
        }
        Ok(Self { qubits, gates })
    }

    /// Parses the line format documented in the README.
    pub fn parse(text: &str) -> Result<Self> {
        let mut qubits = None;
        let mut gates = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            let op = toks[0].to_ascii_uppercase();
            let args = &toks[1..];
            let arity = |n: usize| {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(Error::Parse {
                        line,
                        message: format!("{op} takes {n} argument(s), got {}", args.len()),
                    })
                }
            };
            if op == "QUBITS" {
                arity(1)?;
                if qubits.is_some() || !gates.is_empty() {
                    return Err(Error::Parse {
                        line,
                        message: "QUBITS must appear once, before any gate".into(),
                    });
                }
                qubits = Some(args[0].parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad qubit count {:?}", args[0]),
                })?);
                continue;
            }
            if qubits.is_none() {
                return Err(Error::Parse {
                    line,
                    message: "missing QUBITS header".into(),
                });
            }
            let gate = match op.as_str() {
                "H" | "S" | "X" | "Z" | "T" => {
                    arity(1)?;
                    let q = parse_qubit(args[0], line)?;
                    match op.as_str() {
                        "H" => Gate::H(q),
                        "S" => Gate::S(q),
                        "X" => Gate::X(q),
                        "Z" => Gate::Z(q),
                        _ => Gate::T(q),
                    }
                }
                "CNOT" => {
                    arity(2)?;
                    Gate::Cnot(parse_qubit(args[0], line)?, parse_qubit(args[1], line)?)
                }
                "MEASURE" => {
                    arity(1)?;
                    Gate::Measure(args[0].parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("bad measurement count {:?}", args[0]),
                    })?)
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        message: Error::UnsupportedGate(other.to_string()).to_string(),
                    })
                }
            };
            gates.push(gate);
            let n = qubits.expect("checked above");
            Self::new(n, gates.clone()).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        let qubits = qubits.ok_or(Error::Parse {
            line: text.lines().count().max(1),
            message: "missing QUBITS header".into(),
        })?;
        Self::new(qubits, gates)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("QUBITS {}\n", self.qubits);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn t_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::T(_))).count()
    }

    pub fn has_measurements(&self) -> bool {
        self.gates.iter().any(|g| matches!(g, Gate::Measure(_)))
    }

    /// Dense unitary of a measurement-free circuit, built gate by gate.
    pub fn direct_unitary(&self) -> Result<ComplexMatrix> {
        if self.has_measurements() {
            return Err(Error::Shape("direct unitary needs a measurement-free circuit".into()));
        }
        let n = self.qubits;
        let mut u = ComplexMatrix::identity(1 << n);
        for g in &self.gates {
            u = &gate_matrix(n, *g)? * &u;
        }
        Ok(u)
    }

    pub fn direct_eval(&self, x: &DensityMatrix) -> Result<DensityMatrix> {
        x.apply_unitary(&self.direct_unitary()?)
    }
}

/// Dense matrix of a single gate on `n` qubits, built from its 2×2 or 4×4 block.
fn gate_matrix(n: usize, g: Gate) -> Result<ComplexMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (block, qs): (Vec<C64>, Vec<usize>) = match g {
        Gate::H(q) => (vec![C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0)], vec![q]),
        Gate::S(q) => (vec![ONE, ZERO, ZERO, C64::new(0.0, 1.0)], vec![q]),
        Gate::X(q) => (vec![ZERO, ONE, ONE, ZERO], vec![q]),
        Gate::Z(q) => (vec![ONE, ZERO, ZERO, -ONE], vec![q]),
        Gate::T(q) => (vec![ONE, ZERO, ZERO, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)], vec![q]),
        Gate::Cnot(c, t) => {
            let mut b = vec![ZERO; 16];
            for (r, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                b[r * 4 + col] = ONE;
            }
            (b, vec![c, t])
        }
        Gate::Measure(_) => return Err(Error::UnsupportedGate("MEASURE".into())),
    };
    let k = qs.len();
    let sub = 1usize << k;
    let d = 1usize << n;
    let bit = |x: usize, q: usize| (x >> (n - 1 - q)) & 1;
    let local = |x: usize| qs.iter().fold(0, |acc, &q| (acc << 1) | bit(x, q));
    let rest_mask: usize = (0..n).filter(|q| !qs.contains(q)).map(|q| 1 << (n - 1 - q)).sum();
    Ok(ComplexMatrix::from_fn(d, d, |r, c| {
        if r & rest_mask != c & rest_mask {
            ZERO
        } else {
            block[local(r) * sub + local(c)]
        }
    }))
}

fn gate_clifford(n: usize, g: Gate, pos: &dyn Fn(usize) -> usize) -> Result<CliffordOp> {
    Ok(match g {
        Gate::H(q) => CliffordOp::h(n, pos(q)),
        Gate::S(q) => CliffordOp::s(n, pos(q)),
        Gate::X(q) => CliffordOp::x(n, pos(q)),
        Gate::Z(q) => CliffordOp::z(n, pos(q)),
        Gate::Cnot(c, t) => CliffordOp::cnot(n, pos(c), pos(t))?,
        Gate::T(_) | Gate::Measure(_) => return Err(Error::UnsupportedGate(g.to_string())),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Wire {
    Data(usize),
    Magic(usize),
}

/// Output of [`compile_t_gadget`].
#[derive(Clone, Debug)]
pub struct CompiledCircuit {
    /// Wires: data qubits, then one T ancilla per T gate.
    pub circuit: CmCircuit,
    pub data_qubits: usize,
    pub t_count: usize,
    /// Positions in the outcome string that come from explicit `MEASURE` lines.
    pub data_outcomes: Vec<usize>,
}

struct Builder {
    live: Vec<Wire>,
    current: BTreeMap<String, CliffordOp>,
    layers: Vec<CmLayer>,
    outcome_bits: usize,
    data_outcomes: Vec<usize>,
}

impl Builder {
    fn pos(&self, w: Wire) -> usize {
        self.live.iter().position(|&x| x == w).expect("live wire")
    }

    fn apply_all(&mut self, c: &CliffordOp) -> Result<()> {
        for v in self.current.values_mut() {
            *v = c.compose(v)?;
        }
        Ok(())
    }

    /// Moves `front` to the head of the live list and closes the layer measuring them.
    fn close_layer(&mut self, front: &[Wire], data: bool) -> Result<()> {
        let n = self.live.len();
        let mut order: Vec<usize> = front.iter().map(|&w| self.pos(w)).collect();
        let rest: Vec<usize> = (0..n).filter(|p| !order.contains(p)).collect();
        order.extend(rest);
        self.apply_all(&CliffordOp::permutation(&order)?)?;
        let k = front.len();
        let selector = if self.current.len() == 1 && self.current.contains_key("") {
            Selector::Fixed(self.current.remove("").expect("present"))
        } else {
            Selector::Adaptive(std::mem::take(&mut self.current))
        };
        self.layers.push(CmLayer { selector, measured: k });
        if data {
            self.data_outcomes.extend(self.outcome_bits..self.outcome_bits + k);
        }
        self.outcome_bits += k;
        self.live.retain(|w| !front.contains(w));
        let id = CliffordOp::identity(self.live.len());
        self.current = all_strings(self.outcome_bits).into_iter().map(|s| (s, id.clone())).collect();
        Ok(())
    }
}

/// Compiles `{H, S, X, Z, CNOT, T}` plus `MEASURE` into a C+M circuit: each T
/// consumes a `T|+⟩` ancilla through CNOT, measurement and an outcome-selected S.
pub fn compile_t_gadget(circuit: &GateCircuit) -> Result<CompiledCircuit> {
    let n = circuit.qubits();
    let t = circuit.t_count();
    let mut b = Builder {
        live: (0..n).map(Wire::Data).chain((0..t).map(Wire::Magic)).collect(),
        current: BTreeMap::from([(String::new(), CliffordOp::identity(n + t))]),
        layers: Vec::new(),
        outcome_bits: 0,
        data_outcomes: Vec::new(),
    };
    let mut magic = 0;
    for &g in circuit.gates() {
        match g {
            Gate::T(q) => {
                let m = Wire::Magic(magic);
                magic += 1;
                let width = b.live.len();
                let cx = CliffordOp::cnot(width, b.pos(Wire::Data(q)), b.pos(m))?;
                b.apply_all(&cx)?;
                b.close_layer(&[m], false)?;
                let width = b.live.len();
                let fix = CliffordOp::s(width, b.pos(Wire::Data(q)));
                for (key, c) in b.current.iter_mut() {
                    if key.ends_with('1') {
                        *c = fix.clone();
                    }
                }
            }
            Gate::Measure(k) => {
                let mut data: Vec<usize> = b
                    .live
                    .iter()
                    .filter_map(|w| match w {
                        Wire::Data(q) => Some(*q),
                        Wire::Magic(_) => None,
                    })
                    .collect();
                data.sort_unstable();
                let front: Vec<Wire> = data[..k].iter().map(|&q| Wire::Data(q)).collect();
                b.close_layer(&front, true)?;
            }
            other => {
                let live = b.live.clone();
                let pos = move |q: usize| live.iter().position(|&x| x == Wire::Data(q)).expect("live");
                let c = gate_clifford(b.live.len(), other, &pos)?;
                b.apply_all(&c)?;
            }
        }
    }
    let mut data: Vec<Wire> = b.live.clone();
    data.sort_by_key(|w| match w {
        Wire::Data(q) | Wire::Magic(q) => *q,
    });
    b.close_layer(&[], false)?;
    // restore index order for the surviving data wires
    let order: Vec<usize> = data.iter().map(|&w| b.pos(w)).collect();
    let perm = CliffordOp::permutation(&order)?;
    let last = b.layers.last_mut().expect("closed above");
    last.selector = match &last.selector {
        Selector::Fixed(c) => Selector::Fixed(perm.compose(c)?),
        Selector::Adaptive(m) => Selector::Adaptive(
            m.iter().map(|(k, c)| Ok((k.clone(), perm.compose(c)?))).collect::<Result<_>>()?,
        ),
    };
    Ok(CompiledCircuit {
        circuit: CmCircuit::new(n + t, b.layers)?,
        data_qubits: n,
        t_count: t,
        data_outcomes: b.data_outcomes,
    })
}

/// `|0…0⟩` data wires followed by `k` T states, matching the compiled wire layout.
pub fn compiled_input(x: &DensityMatrix, t_count: usize) -> DensityMatrix {
    let mut s = x.clone();
    for _ in 0..t_count {
        s = s.tensor(&t_state());
    }
    s
}

pub fn t_state() -> DensityMatrix {
    DensityMatrix::named("T").expect("built-in state").with_labels("t")
}

pub fn zero_states(k: usize) -> DensityMatrix {
    DensityMatrix::zeros(k).with_labels("z")
}

use std::collections::BTreeMap;

use rand::Rng;

use super::adversary::AdversarySpec;
use super::runs::{repetition_rng, scheme2_run, Scheme2Instance};
use super::world::Mode;
use crate::clifford::CmCircuit;
use crate::error::{Error, Result};
use crate::harness::Transcript;
use crate::idealfunc::Scheme2Layout;
use crate::qmat::DensityMatrix;

/// The vendor's program: `F` and Bob's private register, with no Bob output.
#[derive(Clone, Debug)]
pub struct QcpProgram {
    pub layout: Scheme2Layout,
    pub f: CmCircuit,
    pub x_b: DensityMatrix,
}

impl QcpProgram {
    pub fn new(layout: Scheme2Layout, f: CmCircuit, x_b: DensityMatrix) -> Result<Self> {
        layout.check_circuit(&f)?;
        if layout.bob_outputs(&f) != 0 {
            return Err(Error::Protocol("a copy-protected program gives the vendor no output".into()));
        }
        Ok(Self { layout, f, x_b })
    }

    fn instance(&self, x: &DensityMatrix) -> Scheme2Instance {
        Scheme2Instance {
            layout: self.layout,
            q: self.f.clone(),
            x_a: x.clone(),
            x_b: self.x_b.clone(),
        }
    }

    /// `F(x)` as Alice should receive it.
    pub fn reference(&self, x: &DensityMatrix) -> Result<DensityMatrix> {
        let inst = self.instance(x);
        let cq = inst.reference_cq(x)?;
        cq.keep_range(cq.qubits() - self.layout.m_a, self.layout.m_a)
    }
}

#[derive(Debug)]
pub struct QcpRun {
    pub outputs: Vec<DensityMatrix>,
    pub transcripts: Vec<Transcript>,
    /// Index of the query whose run aborted; later queries are not made.
    pub aborted_at: Option<usize>,
}

/// One QPFE run per query, each on its own rng stream; `adversary` is applied
/// afresh to every run.
pub fn qcp_run<R: Rng + ?Sized>(
    program: &QcpProgram,
    queries: &[DensityMatrix],
    adversary: &AdversarySpec,
    mode: Mode,
    rng: &mut R,
) -> Result<QcpRun> {
    let seed: u64 = rng.gen();
    let mut run = QcpRun {
        outputs: Vec::new(),
        transcripts: Vec::new(),
        aborted_at: None,
    };
    for (i, x) in queries.iter().enumerate() {
        let mut stream = repetition_rng(seed, i as u64);
        let out = scheme2_run(&program.instance(x), adversary, mode, &mut stream)?;
        let y = out.y_a()?;
        run.transcripts.push(out.transcript);
        match y {
            Some(y) => run.outputs.push(y),
            None => {
                run.aborted_at = Some(i);
                break;
            }
        }
    }
    Ok(run)
}

/// Tabulates a program with one input and one output qubit by querying
/// `|0⟩` and `|1⟩`: maps each input bit to `Pr[output = 1]`.
pub fn qcp_learn<R: Rng + ?Sized>(program: &QcpProgram, rng: &mut R) -> Result<BTreeMap<bool, f64>> {
    if program.layout.n_a != 1 || program.layout.m_a != 1 {
        return Err(Error::Shape("learning needs one input and one output qubit".into()));
    }
    let queries = [DensityMatrix::basis(&[false]), DensityMatrix::basis(&[true])];
    let run = qcp_run(program, &queries, &AdversarySpec::honest(), Mode::Exact, rng)?;
    if run.aborted_at.is_some() {
        return Err(Error::Protocol("a learning query aborted".into()));
    }
    Ok(run
        .outputs
        .iter()
        .zip([false, true])
        .map(|(y, b)| (b, y.matrix()[(1, 1)].re))
        .collect())
}

use std::fmt;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::clifford::{GateCircuit, PauliOp};
use crate::error::{Error, Result};
use crate::harness::Role;
use crate::idealfunc::{ChannelSpec, ExperimentKeys};
use crate::protocol::{AdversarySpec, Behavior, Mode, Tamper};
use crate::qmat::{ComplexMatrix, DensityMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Scheme1,
    Scheme2,
    Reusable,
    Hybrids,
    Experiment,
    Qcp,
    ChoiDemo,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::ChoiDemo,
        ScenarioKind::Experiment,
        ScenarioKind::Hybrids,
        ScenarioKind::Qcp,
        ScenarioKind::Reusable,
        ScenarioKind::Scheme1,
        ScenarioKind::Scheme2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Scheme1 => "scheme1",
            ScenarioKind::Scheme2 => "scheme2",
            ScenarioKind::Reusable => "reusable",
            ScenarioKind::Hybrids => "hybrids",
            ScenarioKind::Experiment => "experiment",
            ScenarioKind::Qcp => "qcp",
            ScenarioKind::ChoiDemo => "choi-demo",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::Scheme1 => "Choi-matrix QPFE through the MPQC dealer, checked against the ideal functionality",
            ScenarioKind::Scheme2 => "three-round garbled-circuit QPFE, checked against direct C+M evaluation",
            ScenarioKind::Reusable => "two-round runs on pre-sent Bob registers until they run out",
            ScenarioKind::Hybrids => "hybrid ladder H0..H4 for the corrupted party, with per-step distances",
            ScenarioKind::Experiment => "two-qubit CNOT circuit in the clear and under a Pauli one-time pad",
            ScenarioKind::Qcp => "copy-protection loop: repeated QPFE queries against one program",
            ScenarioKind::ChoiDemo => "Tr(Y) G(rho^T, Y/TrY) against the channel output, plus post-selection rate",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A complex matrix as rows of `[re, im]` pairs.
pub type MatrixLiteral = Vec<Vec<[f64; 2]>>;

fn matrix_from_literal(m: &MatrixLiteral) -> Result<ComplexMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if m.iter().any(|r| r.len() != cols) {
        return Err(Error::Config("matrix rows differ in length".into()));
    }
    let data = m.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
    ComplexMatrix::from_vec(rows, cols, data)
}

/// A state written in a config: a named qubit (`"0" "1" "+" "-" "+i" "-i" "T"`),
/// a bit string (`"010"`), a Bloch pair, a density matrix, a maximally mixed
/// register, or a list of these taken as a tensor product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateLiteral {
    Name(String),
    Product(Vec<StateLiteral>),
    Bloch { bloch: [f64; 2] },
    Mixed { mixed: usize },
    Matrix { matrix: MatrixLiteral },
}

impl StateLiteral {
    pub fn resolve(&self) -> Result<DensityMatrix> {
        let bad = |e: Error| Error::Config(format!("state literal: {e}"));
        match self {
            StateLiteral::Name(s) if s.is_empty() => Ok(DensityMatrix::empty()),
            StateLiteral::Name(s) if s.len() > 1 && s.chars().all(|c| c == '0' || c == '1') => {
                Ok(DensityMatrix::basis(&s.chars().map(|c| c == '1').collect::<Vec<_>>()))
            }
            StateLiteral::Name(s) => DensityMatrix::named(s).map_err(bad),
            StateLiteral::Product(parts) => {
                let states = parts.iter().map(Self::resolve).collect::<Result<Vec<_>>>()?;
                Ok(DensityMatrix::tensor_all(states.iter()))
            }
            StateLiteral::Bloch { bloch } => DensityMatrix::bloch(bloch[0], bloch[1]).map_err(bad),
            StateLiteral::Mixed { mixed } => Ok(DensityMatrix::maximally_mixed(*mixed)),
            StateLiteral::Matrix { matrix } => DensityMatrix::from_matrix(matrix_from_literal(matrix)?).map_err(bad),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelConfig {
    Identity(usize),
    Depolarizing(f64),
    BitFlip(f64),
    /// Drawn from the scenario seed.
    Random { in_qubits: usize, out_qubits: usize, kraus: usize },
    Kraus(Vec<MatrixLiteral>),
}

/// Stream index reserved for drawing a random channel, apart from the run streams.
const CHANNEL_STREAM: u64 = u64::MAX;

impl ChannelConfig {
    pub fn kraus(&self, seed: u64) -> Result<KrausChannel> {
        let bad = |e: Error| Error::Config(format!("channel: {e}"));
        match self {
            ChannelConfig::Identity(n) => Ok(KrausChannel::identity(*n)),
            ChannelConfig::Depolarizing(p) => KrausChannel::depolarizing(*p).map_err(bad),
            ChannelConfig::BitFlip(q) => KrausChannel::bit_flip(*q).map_err(bad),
            ChannelConfig::Random { in_qubits, out_qubits, kraus } => {
                if *kraus == 0 {
                    return Err(Error::Config("a random channel needs at least one Kraus operator".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(CHANNEL_STREAM);
                Ok(KrausChannel::random(*in_qubits, *out_qubits, *kraus, &mut rng))
            }
            ChannelConfig::Kraus(ops) => {
                let ops = ops.iter().map(matrix_from_literal).collect::<Result<Vec<_>>>()?;
                KrausChannel::new(ops).map_err(bad)
            }
        }
    }

    pub fn spec(&self, seed: u64) -> Result<ChannelSpec> {
        Ok(ChannelSpec::Kraus(self.kraus(seed)?))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TamperConfig {
    pub label: String,
    /// One of `IXYZ` per qubit of the register.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub xor: Vec<u8>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrupt: Option<Role>,
    /// Defaults to semi-honest when a party is corrupted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior: Option<Behavior>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substitute: Option<StateLiteral>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tamper: Vec<TamperConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abort_round: Option<u32>,
}

impl AdversaryConfig {
    pub fn spec(&self) -> Result<AdversarySpec> {
        let behavior = match (self.corrupt, self.behavior) {
            (_, Some(b)) => b,
            (Some(_), None) => Behavior::SemiHonest,
            (None, None) => Behavior::Honest,
        };
        let tamper = self
            .tamper
            .iter()
            .map(|t| {
                Ok(Tamper {
                    label: t.label.clone(),
                    pauli: t.pauli.as_deref().map(PauliOp::parse).transpose()?,
                    classical_xor: t.xor.clone(),
                })
            })
            .collect::<Result<_>>()?;
        let spec = AdversarySpec {
            corrupted: self.corrupt,
            behavior,
            substitute: self.substitute.as_ref().map(StateLiteral::resolve).transpose()?,
            tamper,
            abort_round: self.abort_round,
        };
        spec.validate().map_err(|e| Error::Config(format!("adversary: {e}")))?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alice: Option<StateLiteral>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob: Option<StateLiteral>,
    /// Alice's inputs for `reusable` and `qcp`, one per run.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub queries: Vec<StateLiteral>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default)]
    pub inputs: InputConfig,
    /// Gate-list file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<PathBuf>,
    #[serde(default)]
    pub lambda: usize,
    /// T-state count; must equal the circuit's T-count when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alice_qubits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alice_outputs: Option<usize>,
    #[serde(default)]
    pub adversary: AdversaryConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keys: Option<ExperimentKeys>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ScenarioConfig {
    /// A config with every optional field unset.
    pub fn new(scenario: ScenarioKind, seed: u64) -> Self {
        Self {
            scenario,
            seed,
            method: None,
            shots: None,
            inputs: InputConfig::default(),
            circuit: None,
            lambda: 0,
            k: None,
            alice_qubits: None,
            alice_outputs: None,
            adversary: AdversaryConfig::default(),
            channel: None,
            split: None,
            repetitions: None,
            keys: None,
            out: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// A config together with the circuit file it references.
#[derive(Clone, Debug)]
pub struct LoadedScenario {
    pub config: ScenarioConfig,
    pub circuit_text: Option<String>,
    pub circuit: Option<GateCircuit>,
}

impl LoadedScenario {
    /// Parses `text`, resolving the circuit path against `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<Self> {
        Self::from_config(ScenarioConfig::from_json(text)?, base)
    }

    pub fn from_config(config: ScenarioConfig, base: &Path) -> Result<Self> {
        let (circuit_text, circuit) = match &config.circuit {
            Some(rel) => {
                let path = base.join(rel);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                let parsed = GateCircuit::parse(&text)?;
                (Some(text), Some(parsed))
            }
            None => (None, None),
        };
        Ok(Self { config, circuit_text, circuit })
    }

    /// A config whose circuit is given inline rather than by file.
    pub fn with_circuit_text(config: ScenarioConfig, text: &str) -> Result<Self> {
        Ok(Self {
            config,
            circuit_text: Some(text.to_string()),
            circuit: Some(GateCircuit::parse(text)?),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_resolve() {
        let lit: StateLiteral = serde_json::from_str(r#"["+", {"bloch": [0.0, 0.0]}, "10"]"#).unwrap();
        let rho = lit.resolve().unwrap();
        assert_eq!(rho.qubits(), 4);
        let m: StateLiteral = serde_json::from_str(r#"{"matrix": [[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}"#).unwrap();
        assert!(m.resolve().unwrap().matrix().approx_eq(DensityMatrix::maximally_mixed(1).matrix(), 1e-15));
        assert!(StateLiteral::Name("q".into()).resolve().is_err());
    }

    #[test]
    fn seed_is_required() {
        assert!(ScenarioConfig::from_json(r#"{"scenario": "experiment"}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"scenario": "experiment", "seed": 1, "bogus": 2}"#).is_err());
        let c = ScenarioConfig::from_json(r#"{"scenario": "choi-demo", "seed": 3, "channel": {"depolarizing": 0.3}}"#).unwrap();
        assert_eq!(c.channel, Some(ChannelConfig::Depolarizing(0.3)));
    }

    #[test]
    fn adversary_from_json() {
        let a: AdversaryConfig = serde_json::from_str(
            r#"{"corrupt": "bob", "behavior": "malicious", "tamper": [{"label": "m_B2", "pauli": "IIXI"}]}"#,
        )
        .unwrap();
        let spec = a.spec().unwrap();
        assert_eq!(spec.corrupted, Some(Role::Bob));
        assert_eq!(spec.tamper[0].pauli.as_ref().unwrap().label(), "IIXI");
    }

    #[test]
    fn random_channel_is_seeded() {
        let c = ChannelConfig::Random { in_qubits: 1, out_qubits: 1, kraus: 2 };
        assert_eq!(c.kraus(5).unwrap(), c.kraus(5).unwrap());
    }
}

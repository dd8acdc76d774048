//! JSON formats for graphs, instances and certificates.

use crate::csp::{Clause, CspInstance, Predicate, XorInstance};
use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// `{"n": 3, "edges": [[u, v, multiplicity, sign], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<(usize, usize, u64, i8)>,
}

/// `{"n", "k", "terms": [[[i, j, ...], weight], ...], "seed"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XorJson {
    pub n: usize,
    pub k: usize,
    pub terms: Vec<(Vec<usize>, i64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// `{"n", "k", "predicate": "0110", "clauses": [[[i, j], [1, -1]], ...],
/// "p", "seed"}`; the second list is `ζ_S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CspJson {
    pub n: usize,
    pub k: usize,
    pub predicate: String,
    pub clauses: Vec<(Vec<usize>, Vec<i8>)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceJson {
    Graph(GraphJson),
    Csp(CspJson),
    Xor(XorJson),
}

pub enum Instance {
    Graph(SignedGraph),
    Xor(XorInstance),
    Csp(CspInstance),
}

impl GraphJson {
    pub fn from_graph(g: &SignedGraph) -> Self {
        Self { n: g.n(), edges: g.edges().iter().map(|e| (e.u, e.v, e.multiplicity, e.sign)).collect() }
    }

    pub fn to_graph(&self) -> Result<SignedGraph> {
        SignedGraph::new(self.n, self.edges.iter().copied())
    }
}

impl XorJson {
    pub fn from_instance(inst: &XorInstance, seed: Option<u64>) -> Self {
        Self { n: inst.n, k: inst.k, terms: inst.iter().collect(), seed }
    }

    pub fn to_instance(&self) -> Result<XorInstance> {
        for (vars, _) in &self.terms {
            if vars.len() != self.k {
                return Err(Error::InvalidInstance(format!("term {vars:?} has arity {}, expected {}", vars.len(), self.k)));
            }
        }
        XorInstance::from_terms(self.n, self.k, self.terms.iter().cloned())
    }
}

impl CspJson {
    pub fn from_instance(inst: &CspInstance, seed: Option<u64>) -> Self {
        let ks = inst.keys();
        let clauses = inst
            .clauses
            .iter()
            .map(|c| {
                let zeta = (0..inst.k).map(|a| if c.zeta >> a & 1 == 1 { -1 } else { 1 }).collect();
                (ks.decode(c.key), zeta)
            })
            .collect();
        Self { n: inst.n, k: inst.k, predicate: inst.predicate.to_bits(), clauses, p: inst.p, seed }
    }

    pub fn to_instance(&self) -> Result<CspInstance> {
        let predicate = Predicate::from_bits(&self.predicate)?;
        if predicate.k != self.k {
            return Err(Error::InvalidInstance(format!("predicate has arity {}, instance says {}", predicate.k, self.k)));
        }
        let ks = crate::csp::KeySpace::new(self.n, self.k)?;
        let mut clauses = Vec::with_capacity(self.clauses.len());
        for (vars, zeta) in &self.clauses {
            if vars.len() != self.k || zeta.len() != self.k {
                return Err(Error::InvalidInstance(format!("clause {vars:?} / {zeta:?} does not have arity {}", self.k)));
            }
            if let Some(&v) = vars.iter().find(|&&v| v >= self.n) {
                return Err(Error::InvalidInstance(format!("variable {v} out of range for n = {}", self.n)));
            }
            let mut mask = 0u32;
            for (a, &z) in zeta.iter().enumerate() {
                match z {
                    1 => {}
                    -1 => mask |= 1 << a,
                    _ => return Err(Error::InvalidInstance(format!("negation entry {z} is not ±1"))),
                }
            }
            clauses.push(Clause { key: ks.encode(vars), zeta: mask });
        }
        let mut inst = CspInstance::new(self.n, predicate, clauses)?;
        inst.p = self.p;
        Ok(inst)
    }
}

impl InstanceJson {
    pub fn resolve(&self) -> Result<Instance> {
        Ok(match self {
            Self::Graph(g) => Instance::Graph(g.to_graph()?),
            Self::Xor(x) => Instance::Xor(x.to_instance()?),
            Self::Csp(c) => Instance::Csp(c.to_instance()?),
        })
    }
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInstance(format!("malformed JSON: {e}")))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    read_json::<InstanceJson>(path)?.resolve()
}

pub fn read_graph(path: &Path) -> Result<SignedGraph> {
    match read_instance(path)? {
        Instance::Graph(g) => Ok(g),
        Instance::Xor(x) if x.k == 2 => match crate::csp::to_graph(&x)? {
            Some(fg) if fg.variables.len() == x.n => Ok(fg.graph),
            Some(_) => Err(Error::InvalidGraph("2-XOR instance leaves some variables unconstrained".into())),
            None => Err(Error::InvalidGraph("every 2-XOR term cancels".into())),
        },
        _ => Err(Error::InvalidGraph(format!("{} does not describe a graph", path.display()))),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

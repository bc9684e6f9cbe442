// SPDX-License-Identifier: Apache-2.0

//! Community sentiment energy.
//!
//! Only two-node cliques (edges) carry potential. An edge's energy is either
//! the absolute cosine of its endpoints' sentiment vectors or the mean of
//! their Euclidean norms. The community energy is the sum over edges of that
//! energy (MRF model) or of the binary entropy of the edge's communication
//! probability (graph-entropy model).

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;
use std::io::BufRead;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::CommunityGraph;
use crate::par::{self, Exec};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnergyError {
    #[error("sentiment vectors differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("unknown {kind} {value:?}")]
    UnknownKind { kind: &'static str, value: String },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EnergyFunction {
    /// Absolute cosine similarity.
    Cosine,
    /// Mean Euclidean norm of the two vectors.
    AverageLength,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EnergyModel {
    Mrf,
    Entropy,
}

impl EnergyFunction {
    pub const ALL: [EnergyFunction; 2] = [EnergyFunction::Cosine, EnergyFunction::AverageLength];

    pub fn as_str(self) -> &'static str {
        match self {
            EnergyFunction::Cosine => "cosine",
            EnergyFunction::AverageLength => "avglen",
        }
    }
}

impl EnergyModel {
    pub const ALL: [EnergyModel; 2] = [EnergyModel::Mrf, EnergyModel::Entropy];

    pub fn as_str(self) -> &'static str {
        match self {
            EnergyModel::Mrf => "mrf",
            EnergyModel::Entropy => "entropy",
        }
    }
}

impl fmt::Display for EnergyFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for EnergyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnergyFunction {
    type Err = EnergyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cosine" => Ok(EnergyFunction::Cosine),
            "avglen" => Ok(EnergyFunction::AverageLength),
            _ => Err(EnergyError::UnknownKind {
                kind: "energy function",
                value: s.to_string(),
            }),
        }
    }
}

impl FromStr for EnergyModel {
    type Err = EnergyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mrf" => Ok(EnergyModel::Mrf),
            "entropy" => Ok(EnergyModel::Entropy),
            _ => Err(EnergyError::UnknownKind {
                kind: "energy model",
                value: s.to_string(),
            }),
        }
    }
}

fn check_len(a: &[f64], b: &[f64]) -> Result<(), EnergyError> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(EnergyError::LengthMismatch(a.len(), b.len()))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `|a·b| / (|a||b|)`, 0 when either vector is all zeros.
pub fn clique_energy_cosine(a: &[f64], b: &[f64]) -> Result<f64, EnergyError> {
    check_len(a, b)?;
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot.abs() / (na * nb)).min(1.0))
}

/// `(|a| + |b|) / 2`.
pub fn clique_energy_avglen(a: &[f64], b: &[f64]) -> Result<f64, EnergyError> {
    check_len(a, b)?;
    Ok((norm(a) + norm(b)) / 2.0)
}

pub fn clique_energy(function: EnergyFunction, a: &[f64], b: &[f64]) -> Result<f64, EnergyError> {
    match function {
        EnergyFunction::Cosine => clique_energy_cosine(a, b),
        EnergyFunction::AverageLength => clique_energy_avglen(a, b),
    }
}

/// Probability that the edge's endpoints communicate about the topic.
/// Average length is divided by `√m` to land in [0, 1].
pub fn edge_probability(a: &[f64], b: &[f64], function: EnergyFunction) -> Result<f64, EnergyError> {
    match function {
        EnergyFunction::Cosine => clique_energy_cosine(a, b),
        EnergyFunction::AverageLength => {
            let e = clique_energy_avglen(a, b)?;
            if a.is_empty() {
                return Ok(0.0);
            }
            Ok((e / (a.len() as f64).sqrt()).clamp(0.0, 1.0))
        }
    }
}

/// Binary entropy in bits, with `0·log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// One edge's contribution to the community energy.
pub fn edge_term(
    model: EnergyModel,
    function: EnergyFunction,
    a: &[f64],
    b: &[f64],
) -> Result<f64, EnergyError> {
    match model {
        EnergyModel::Mrf => clique_energy(function, a, b),
        EnergyModel::Entropy => edge_probability(a, b, function).map(binary_entropy),
    }
}

/// Per-edge energy terms in community edge order. Members without a vector
/// get the zero vector of length `m`.
pub fn edge_terms(
    community: &CommunityGraph,
    vectors: &HashMap<&str, &[f64]>,
    m: usize,
    model: EnergyModel,
    function: EnergyFunction,
    exec: Exec,
) -> Result<Vec<f64>, EnergyError> {
    let zeros = vec![0.0; m];
    let resolved: Vec<&[f64]> = community
        .members()
        .iter()
        .map(|name| vectors.get(name.as_str()).copied().unwrap_or(&zeros))
        .collect();
    par::try_map(exec, community.edges(), |&(i, j)| {
        edge_term(model, function, resolved[i as usize], resolved[j as usize])
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommunityEnergy {
    pub topic: String,
    pub model: EnergyModel,
    pub function: EnergyFunction,
    pub value: f64,
}

/// Sums the edge terms with a fixed-shape pairwise reduction so the value is
/// identical under sequential and parallel execution.
pub fn community_energy(
    topic: &str,
    community: &CommunityGraph,
    vectors: &HashMap<&str, &[f64]>,
    m: usize,
    model: EnergyModel,
    function: EnergyFunction,
    exec: Exec,
) -> Result<CommunityEnergy, EnergyError> {
    let terms = edge_terms(community, vectors, m, model, function, exec)?;
    Ok(CommunityEnergy {
        topic: topic.to_string(),
        model,
        function,
        value: par::pairwise_sum(&terms),
    })
}

pub fn community_energy_mrf(
    topic: &str,
    community: &CommunityGraph,
    vectors: &HashMap<&str, &[f64]>,
    m: usize,
    function: EnergyFunction,
    exec: Exec,
) -> Result<CommunityEnergy, EnergyError> {
    community_energy(topic, community, vectors, m, EnergyModel::Mrf, function, exec)
}

pub fn community_energy_entropy(
    topic: &str,
    community: &CommunityGraph,
    vectors: &HashMap<&str, &[f64]>,
    m: usize,
    function: EnergyFunction,
    exec: Exec,
) -> Result<CommunityEnergy, EnergyError> {
    community_energy(topic, community, vectors, m, EnergyModel::Entropy, function, exec)
}

/// `hashtag<TAB>model<TAB>function<TAB>energy`
pub fn report_to_tsv(energies: &[CommunityEnergy]) -> String {
    let mut out = String::new();
    for e in energies {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", e.topic, e.model, e.function, e.value);
    }
    out
}

pub fn read_report(reader: impl BufRead) -> Result<Vec<CommunityEnergy>, EnergyError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let bad = |reason: String| EnergyError::Parse {
            line: lineno,
            reason,
        };
        let line = line.map_err(|e| bad(e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [topic, model, function, value] = fields[..] else {
            return Err(bad(format!("expected 4 fields, found {}", fields.len())));
        };
        out.push(CommunityEnergy {
            topic: topic.to_string(),
            model: model.parse()?,
            function: function.parse()?,
            value: value.parse().map_err(|e| bad(format!("energy: {e}")))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize, m: usize) -> Vec<f64> {
        let mut v = vec![0.0; m];
        v[i] = 1.0;
        v
    }

    fn triangle() -> CommunityGraph {
        CommunityGraph::from_parts(
            "a",
            1,
            ["a", "b", "c"].map(String::from),
            [("a", "b"), ("b", "c"), ("a", "c")].map(|(x, y)| (x.to_string(), y.to_string())),
        )
        .unwrap()
    }

    #[test]
    fn cosine_cases() {
        assert_eq!(clique_energy_cosine(&e(0, 4), &e(0, 4)).unwrap(), 1.0);
        assert_eq!(clique_energy_cosine(&e(0, 4), &e(1, 4)).unwrap(), 0.0);
        let v = [0.3, -0.2, 0.5];
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!((clique_energy_cosine(&v, &neg).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(clique_energy_cosine(&[0.0; 3], &v).unwrap(), 0.0);
        assert_eq!(
            clique_energy_cosine(&[1.0], &[1.0, 0.0]).unwrap_err(),
            EnergyError::LengthMismatch(1, 2)
        );
    }

    #[test]
    fn avglen_cases() {
        assert_eq!(clique_energy_avglen(&[0.0; 5], &[0.0; 5]).unwrap(), 0.0);
        assert_eq!(clique_energy_avglen(&e(0, 5), &e(1, 5)).unwrap(), 1.0);
        assert!(clique_energy_avglen(&[1.0], &[]).is_err());
    }

    #[test]
    fn probabilities() {
        let v = [0.5, 0.5];
        assert!((edge_probability(&v, &v, EnergyFunction::Cosine).unwrap() - 1.0).abs() < 1e-15);
        for f in EnergyFunction::ALL {
            assert_eq!(edge_probability(&[0.0; 3], &[0.0; 3], f).unwrap(), 0.0);
        }
        let ones = [1.0; 10];
        assert_eq!(
            edge_probability(&ones, &ones, EnergyFunction::AverageLength).unwrap(),
            1.0
        );
    }

    #[test]
    fn entropy_endpoints() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
    }

    #[test]
    fn empty_community_has_zero_energy() {
        let c = CommunityGraph::from_parts("a", 0, vec!["a".into()], vec![]).unwrap();
        let got = community_energy_mrf("t", &c, &HashMap::new(), 3, EnergyFunction::Cosine, Exec::Parallel)
            .unwrap();
        assert_eq!(got.value, 0.0);
    }

    #[test]
    fn triangle_of_identical_vectors() {
        let v = [0.2, -0.4, 0.1];
        let vectors: HashMap<&str, &[f64]> = [("a", &v[..]), ("b", &v[..]), ("c", &v[..])].into();
        let got = community_energy_mrf("t", &triangle(), &vectors, 3, EnergyFunction::Cosine, Exec::Sequential)
            .unwrap();
        assert!((got.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_edge_entropy_at_half() {
        // avglen of two unit vectors in m = 4 is 1, divided by √4 gives p = 0.5
        let c = CommunityGraph::from_parts("a", 1, ["a", "b"].map(String::from), [("a".into(), "b".into())])
            .unwrap();
        let (x, y) = (e(0, 4), e(1, 4));
        let vectors: HashMap<&str, &[f64]> = [("a", &x[..]), ("b", &y[..])].into();
        let got = community_energy_entropy("t", &c, &vectors, 4, EnergyFunction::AverageLength, Exec::Parallel)
            .unwrap();
        assert_eq!(got.value, 1.0);
        let cos = community_energy_entropy("t", &c, &vectors, 4, EnergyFunction::Cosine, Exec::Parallel)
            .unwrap();
        assert_eq!(cos.value, 0.0);
    }

    #[test]
    fn missing_vectors_are_zero() {
        let v = [1.0, 0.0];
        let vectors: HashMap<&str, &[f64]> = [("a", &v[..])].into();
        let got = community_energy_mrf("t", &triangle(), &vectors, 2, EnergyFunction::AverageLength, Exec::Parallel)
            .unwrap();
        // edges a-b and a-c each contribute 0.5, b-c contributes 0
        assert_eq!(got.value, 1.0);
    }

    #[test]
    fn report_round_trip() {
        let rows = vec![CommunityEnergy {
            topic: "Rio".into(),
            model: EnergyModel::Entropy,
            function: EnergyFunction::AverageLength,
            value: 12.345678901234567,
        }];
        let text = report_to_tsv(&rows);
        assert_eq!(text, "Rio\tentropy\tavglen\t12.345678901234567\n");
        assert_eq!(read_report(text.as_bytes()).unwrap(), rows);
        assert!(read_report("Rio\tcrf\tavglen\t1\n".as_bytes()).is_err());
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Undirected retweet-mention graph and bounded-depth communities.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::io::BufRead;

use thiserror::Error;

use crate::corpus::Tweet;
use crate::par::{self, Exec};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("seed user {0:?} is not in the graph")]
    UnknownSeed(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("edge ({0}, {1}) references a non-member")]
    EdgeOutsideMembers(String, String),
}

/// Simple undirected graph over user names.
///
/// Nodes are stored in lexicographic order, so node indices and the
/// `(i, j)` with `i < j` edge orientation are both deterministic.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SocialGraph {
    names: Vec<String>,
    index: HashMap<String, u32>,
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl SocialGraph {
    /// Builds a graph from node names and name pairs. Self-loops and
    /// duplicate pairs are dropped; endpoints are added as nodes.
    pub fn from_pairs<S: AsRef<str>>(
        nodes: impl IntoIterator<Item = S>,
        pairs: impl IntoIterator<Item = (S, S)>,
    ) -> Self {
        let mut names: Vec<String> = nodes.into_iter().map(|s| s.as_ref().to_string()).collect();
        let pairs: Vec<(String, String)> = pairs
            .into_iter()
            .filter(|(a, b)| a.as_ref() != b.as_ref())
            .map(|(a, b)| (a.as_ref().to_string(), b.as_ref().to_string()))
            .collect();
        for (a, b) in &pairs {
            names.push(a.clone());
            names.push(b.clone());
        }
        names.sort_unstable();
        names.dedup();
        let index: HashMap<String, u32> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        let mut edges: Vec<(u32, u32)> = pairs
            .iter()
            .map(|(a, b)| {
                let (i, j) = (index[a], index[b]);
                (i.min(j), i.max(j))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let (offsets, neighbors) = csr(names.len(), &edges);
        SocialGraph {
            names,
            index,
            edges,
            offsets,
            neighbors,
        }
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node_index(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn name(&self, node: u32) -> &str {
        &self.names[node as usize]
    }

    /// Edges as `(i, j)` node indices with `i < j`, sorted.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_names(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|&(i, j)| (self.name(i), self.name(j)))
    }

    pub fn neighbors(&self, node: u32) -> &[u32] {
        let n = node as usize;
        &self.neighbors[self.offsets[n]..self.offsets[n + 1]]
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        match (self.node_index(a), self.node_index(b)) {
            (Some(i), Some(j)) => self.edges.binary_search(&(i.min(j), i.max(j))).is_ok(),
            _ => false,
        }
    }

    /// `user_i<TAB>user_j` per edge, `user_i < user_j`.
    pub fn to_edge_tsv(&self) -> String {
        let mut out = String::new();
        for (a, b) in self.edge_names() {
            let _ = writeln!(out, "{a}\t{b}");
        }
        out
    }

    /// Reads an edge list; nodes are the edge endpoints.
    pub fn from_edge_tsv(reader: impl BufRead) -> Result<Self, GraphError> {
        let pairs = read_edge_pairs(reader)?;
        Ok(Self::from_pairs(Vec::<String>::new(), pairs))
    }
}

fn csr(n: usize, edges: &[(u32, u32)]) -> (Vec<usize>, Vec<u32>) {
    let mut degree = vec![0usize; n];
    for &(i, j) in edges {
        degree[i as usize] += 1;
        degree[j as usize] += 1;
    }
    let mut offsets = vec![0usize; n + 1];
    for v in 0..n {
        offsets[v + 1] = offsets[v] + degree[v];
    }
    let mut fill = offsets[..n].to_vec();
    let mut neighbors = vec![0u32; offsets[n]];
    for &(i, j) in edges {
        neighbors[fill[i as usize]] = j;
        fill[i as usize] += 1;
        neighbors[fill[j as usize]] = i;
        fill[j as usize] += 1;
    }
    // edges are sorted, so each adjacency run is already sorted
    (offsets, neighbors)
}

pub(crate) fn read_edge_pairs(reader: impl BufRead) -> Result<Vec<(String, String)>, GraphError> {
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| GraphError::Parse {
            line: lineno,
            reason: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => {
                pairs.push((a.to_string(), b.to_string()))
            }
            _ => {
                return Err(GraphError::Parse {
                    line: lineno,
                    reason: "expected user_i<TAB>user_j".into(),
                })
            }
        }
    }
    Ok(pairs)
}

/// Relation pairs observed in one tweet: author with every mention and the
/// retweet source. Self-relations are dropped.
fn relation_pairs(tweet: &Tweet) -> Vec<(&str, &str)> {
    let author = tweet.user.as_str();
    tweet
        .mentions
        .iter()
        .map(String::as_str)
        .chain(tweet.retweet_of.as_deref())
        .filter(|&other| other != author)
        .map(|other| (author, other))
        .collect()
}

/// Builds the retweet-mention graph. Every author is a node, as is every
/// user that appears in a relation.
pub fn build_graph(tweets: &[Tweet], exec: Exec) -> SocialGraph {
    let per_tweet = par::map(exec, tweets, relation_pairs);
    let pairs = per_tweet.into_iter().flatten();
    SocialGraph::from_pairs(tweets.iter().map(|t| t.user.as_str()), pairs)
}

/// Users within `max_depth` hops of `seed`, with all parent-graph edges
/// among them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommunityGraph {
    seed: String,
    max_depth: u32,
    members: Vec<String>,
    edges: Vec<(u32, u32)>,
}

impl CommunityGraph {
    /// Assembles a community from persisted parts. Members are sorted and
    /// every edge must join two members.
    pub fn from_parts(
        seed: impl Into<String>,
        max_depth: u32,
        members: impl IntoIterator<Item = String>,
        edge_pairs: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, GraphError> {
        let seed = seed.into();
        let mut members: Vec<String> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if members.binary_search(&seed).is_err() {
            return Err(GraphError::UnknownSeed(seed));
        }
        let mut edges = Vec::new();
        for (a, b) in edge_pairs {
            match (members.binary_search(&a), members.binary_search(&b)) {
                (Ok(i), Ok(j)) if i != j => edges.push((i.min(j) as u32, i.max(j) as u32)),
                _ => return Err(GraphError::EdgeOutsideMembers(a, b)),
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(CommunityGraph {
            seed,
            max_depth,
            members,
            edges,
        })
    }

    pub fn seed(&self) -> &str {
        &self.seed
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    /// Members in lexicographic order.
    pub fn members(&self) -> &[String] {
        &self.members
    }

    /// Edges as `(i, j)` member indices, `i < j`, sorted.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn member(&self, idx: u32) -> &str {
        &self.members[idx as usize]
    }

    pub fn contains(&self, user: &str) -> bool {
        self.members.binary_search_by(|m| m.as_str().cmp(user)).is_ok()
    }

    pub fn edge_names(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|&(i, j)| (self.member(i), self.member(j)))
    }

    pub fn to_edge_tsv(&self) -> String {
        let mut out = String::new();
        for (a, b) in self.edge_names() {
            let _ = writeln!(out, "{a}\t{b}");
        }
        out
    }

    pub fn members_text(&self) -> String {
        let mut out = String::new();
        for m in &self.members {
            out.push_str(m);
            out.push('\n');
        }
        out
    }

    /// Reads a community from its members list and edge list.
    pub fn read(
        seed: &str,
        max_depth: u32,
        members: impl BufRead,
        edges: impl BufRead,
    ) -> Result<Self, GraphError> {
        let mut names = Vec::new();
        for (idx, line) in members.lines().enumerate() {
            let line = line.map_err(|e| GraphError::Parse {
                line: idx + 1,
                reason: e.to_string(),
            })?;
            let line = line.trim_end_matches('\r');
            if !line.is_empty() {
                names.push(line.to_string());
            }
        }
        Self::from_parts(seed, max_depth, names, read_edge_pairs(edges)?)
    }
}

/// Breadth-first closure of `seed` up to `max_depth` hops (inclusive of the
/// seed), with the induced edge set.
pub fn extract_community(
    graph: &SocialGraph,
    seed: &str,
    max_depth: u32,
) -> Result<CommunityGraph, GraphError> {
    let start = graph
        .node_index(seed)
        .ok_or_else(|| GraphError::UnknownSeed(seed.to_string()))?;
    let mut depth = vec![u32::MAX; graph.node_count()];
    depth[start as usize] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let d = depth[v as usize];
        if d == max_depth {
            continue;
        }
        for &w in graph.neighbors(v) {
            if depth[w as usize] == u32::MAX {
                depth[w as usize] = d + 1;
                queue.push_back(w);
            }
        }
    }

    // Node indices are in name order, so the compacted member list is too.
    let mut remap = vec![u32::MAX; graph.node_count()];
    let mut members = Vec::new();
    for (v, &d) in depth.iter().enumerate() {
        if d != u32::MAX {
            remap[v] = members.len() as u32;
            members.push(graph.names[v].clone());
        }
    }
    let edges: Vec<(u32, u32)> = graph
        .edges
        .iter()
        .filter_map(|&(i, j)| {
            let (a, b) = (remap[i as usize], remap[j as usize]);
            (a != u32::MAX && b != u32::MAX).then_some((a, b))
        })
        .collect();
    Ok(CommunityGraph {
        seed: seed.to_string(),
        max_depth,
        members,
        edges,
    })
}

/// Largest hop distance from `seed` to any node reachable from it.
pub fn eccentricity(graph: &SocialGraph, seed: &str) -> Result<u32, GraphError> {
    let start = graph
        .node_index(seed)
        .ok_or_else(|| GraphError::UnknownSeed(seed.to_string()))?;
    let mut depth = vec![u32::MAX; graph.node_count()];
    depth[start as usize] = 0;
    let mut queue = VecDeque::from([start]);
    let mut max = 0;
    while let Some(v) = queue.pop_front() {
        let d = depth[v as usize];
        max = max.max(d);
        for &w in graph.neighbors(v) {
            if depth[w as usize] == u32::MAX {
                depth[w as usize] = d + 1;
                queue.push_back(w);
            }
        }
    }
    Ok(max)
}

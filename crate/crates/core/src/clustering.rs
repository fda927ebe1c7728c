//! Agglomerative clustering of feature vectors and the recurrent clustering
//! loop over a corpus.
//!
//! Clusters are merged by average linkage on Euclidean distance. When several
//! pairs are equally close, the pair whose smallest member names sort first is
//! merged. A partition is obtained by replaying the first `n - k` merges, so
//! partitions cut from one dendrogram are always nested.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::features::{encode_statement, Encoder, FeatureError, DEFAULT_DEPTH, DEFAULT_WIDTH};
use crate::proof_features::{encode_proof, ProofError, ProofOptions, DEFAULT_GOALS};

pub const MIN_GRANULARITY: u8 = 1;
pub const MAX_GRANULARITY: u8 = 5;
pub const DEFAULT_MAX_ITERS: usize = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClusterError {
    #[error("need at least 2 items to cluster, got {0}")]
    TooFewItems(usize),
    #[error("granularity {0} is outside 1..=5")]
    Granularity(u8),
    #[error("cluster count must be at least 1")]
    ZeroClusters,
    #[error("`{name}` has a feature vector of length {found}, expected {expected}")]
    MixedLengths {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("`{0}` appears twice")]
    DuplicateName(String),
    #[error("non-finite feature value in `{0}`")]
    NonFinite(String),
    #[error("granularities must be strictly increasing")]
    NotIncreasing,
    #[error("no entries with proofs")]
    NoProofs,
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Proof(#[from] ProofError),
}

/// How to cut the dendrogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cut {
    /// `k = max(2, n / (10 - g))`.
    Granularity(u8),
    /// Fixed cluster count.
    Clusters(usize),
}

impl Cut {
    pub fn granularity(self) -> Option<u8> {
        match self {
            Cut::Granularity(g) => Some(g),
            Cut::Clusters(_) => None,
        }
    }

    /// Requested cluster count for `n` items.
    pub fn requested_k(self, n: usize) -> Result<usize, ClusterError> {
        match self {
            Cut::Granularity(g) => k_for_granularity(n, g),
            Cut::Clusters(0) => Err(ClusterError::ZeroClusters),
            Cut::Clusters(k) => Ok(k),
        }
    }
}

pub fn k_for_granularity(n: usize, g: u8) -> Result<usize, ClusterError> {
    if !(MIN_GRANULARITY..=MAX_GRANULARITY).contains(&g) {
        return Err(ClusterError::Granularity(g));
    }
    Ok((n / (10 - g as usize)).max(2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub granularity: Option<u8>,
    pub clusters: Vec<Cluster>,
    /// The coarser partition this one refines, if it was cut as part of a nested family.
    pub parent: Option<Box<Partition>>,
    pub diagnostics: Vec<String>,
}

impl Partition {
    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn cluster_of(&self, name: &str) -> Option<usize> {
        self.clusters
            .iter()
            .position(|c| c.members.iter().any(|m| m == name))
    }

    pub fn member_lists(&self) -> Vec<Vec<String>> {
        self.clusters.iter().map(|c| c.members.clone()).collect()
    }

    /// Every cluster of `self` lies inside one cluster of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.clusters.iter().all(|c| {
            let owners: BTreeSet<Option<usize>> =
                c.members.iter().map(|m| coarser.cluster_of(m)).collect();
            owners.len() == 1 && !owners.contains(&None)
        })
    }

    /// Same grouping, ignoring cluster ids and member order.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        let norm = |p: &Partition| -> BTreeSet<BTreeSet<String>> {
            p.clusters
                .iter()
                .map(|c| c.members.iter().cloned().collect())
                .collect()
        };
        norm(self) == norm(other)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    /// Cluster ids: `0..n` are leaves, `n + i` is the cluster made by merge `i`.
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub leaves: Vec<String>,
    pub merges: Vec<Merge>,
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Min-max scales every dimension to `[0, 1]`; constant dimensions become 0.
pub fn normalize(vectors: &mut [Vec<f64>]) {
    let Some(dim) = vectors.first().map(Vec::len) else {
        return;
    };
    for d in 0..dim {
        let (lo, hi) = vectors
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v[d]), hi.max(v[d]))
            });
        for v in vectors.iter_mut() {
            v[d] = if hi > lo {
                (v[d] - lo) / (hi - lo)
            } else {
                0.0
            };
        }
    }
}

fn check_input(items: &[(String, Vec<f64>)]) -> Result<(), ClusterError> {
    if items.len() < 2 {
        return Err(ClusterError::TooFewItems(items.len()));
    }
    let expected = items[0].1.len();
    let mut seen = BTreeSet::new();
    for (name, v) in items {
        if v.len() != expected {
            return Err(ClusterError::MixedLengths {
                name: name.clone(),
                expected,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(ClusterError::NonFinite(name.clone()));
        }
        if !seen.insert(name.as_str()) {
            return Err(ClusterError::DuplicateName(name.clone()));
        }
    }
    Ok(())
}

/// Builds the average-linkage dendrogram of `items`.
pub fn build_dendrogram(items: &[(String, Vec<f64>)]) -> Result<Dendrogram, ClusterError> {
    check_input(items)?;
    let n = items.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = euclidean(&items[i].1, &items[j].1);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }

    struct Active {
        id: usize,
        members: Vec<usize>,
        key: String,
    }
    let mut active: Vec<Active> = items
        .iter()
        .enumerate()
        .map(|(i, (name, _))| Active {
            id: i,
            members: vec![i],
            key: name.clone(),
        })
        .collect();
    let mut merges = Vec::with_capacity(n - 1);
    let mut floor = 0.0_f64;

    while active.len() > 1 {
        let mut best: Option<(f64, (&str, &str), usize, usize)> = None;
        for x in 0..active.len() {
            for y in x + 1..active.len() {
                let (p, q) = (&active[x], &active[y]);
                let mut sum = 0.0;
                for &i in &p.members {
                    for &j in &q.members {
                        sum += dist[i][j];
                    }
                }
                let d = sum / (p.members.len() * q.members.len()) as f64;
                let key = if p.key <= q.key {
                    (p.key.as_str(), q.key.as_str())
                } else {
                    (q.key.as_str(), p.key.as_str())
                };
                let better = match &best {
                    None => true,
                    Some((bd, bk, _, _)) => d < *bd || (d == *bd && key < *bk),
                };
                if better {
                    best = Some((d, key, x, y));
                }
            }
        }
        let (d, _, x, y) = best.expect("at least two active clusters");
        // Average linkage is monotone in exact arithmetic; clamp rounding noise.
        floor = floor.max(d);
        let q = active.remove(y);
        let p = &mut active[x];
        merges.push(Merge {
            a: p.id.min(q.id),
            b: p.id.max(q.id),
            height: floor,
            size: p.members.len() + q.members.len(),
        });
        p.id = n + merges.len() - 1;
        p.members.extend(q.members);
        if q.key < p.key {
            p.key = q.key;
        }
    }
    Ok(Dendrogram {
        leaves: items.iter().map(|(n, _)| n.clone()).collect(),
        merges,
    })
}

impl Dendrogram {
    /// Leaf groups after replaying merges until at most `k` clusters remain.
    /// Merges at height zero (identical vectors) are always replayed.
    pub fn cut(&self, k: usize) -> Vec<Vec<usize>> {
        let n = self.leaves.len();
        let zero = self.merges.iter().take_while(|m| m.height == 0.0).count();
        let applied = n.saturating_sub(k.max(1)).max(zero);
        let mut groups: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for m in &self.merges[..applied] {
            let mut merged = std::mem::take(&mut groups[m.a]);
            merged.append(&mut groups[m.b]);
            groups.push(merged);
        }
        let mut out: Vec<Vec<usize>> = groups.into_iter().filter(|g| !g.is_empty()).collect();
        for g in &mut out {
            g.sort_unstable();
        }
        out.sort_by_key(|g| g[0]);
        out
    }

    /// Partition for `cut`, with diagnostics when the request cannot be met.
    pub fn partition(&self, cut: Cut) -> Result<Partition, ClusterError> {
        let n = self.leaves.len();
        let requested = cut.requested_k(n)?;
        let groups = self.cut(requested);
        let mut diagnostics = Vec::new();
        if groups.len() == 1 && n > 1 {
            diagnostics
                .push("all feature vectors are identical: no separation possible".to_string());
        } else if groups.len() < requested {
            diagnostics.push(format!(
                "requested {requested} clusters but only {} distinct feature vectors exist",
                groups.len()
            ));
        }
        Ok(Partition {
            granularity: cut.granularity(),
            clusters: groups
                .into_iter()
                .enumerate()
                .map(|(id, g)| Cluster {
                    id,
                    members: g.into_iter().map(|i| self.leaves[i].clone()).collect(),
                })
                .collect(),
            parent: None,
            diagnostics,
        })
    }
}

/// One partition of `items`.
pub fn cluster(
    items: &[(String, Vec<f64>)],
    cut: Cut,
    normalized: bool,
) -> Result<Partition, ClusterError> {
    let dendrogram = if normalized {
        build_dendrogram(&normalized_items(items)?)?
    } else {
        build_dendrogram(items)?
    };
    dendrogram.partition(cut)
}

fn normalized_items(items: &[(String, Vec<f64>)]) -> Result<Vec<(String, Vec<f64>)>, ClusterError> {
    check_input(items)?;
    let mut vectors: Vec<Vec<f64>> = items.iter().map(|(_, v)| v.clone()).collect();
    normalize(&mut vectors);
    Ok(items.iter().map(|(n, _)| n.clone()).zip(vectors).collect())
}

/// Partitions at increasing granularities, cut from one dendrogram. Each
/// partition links to the previous one as its parent.
pub fn nested_partitions(
    items: &[(String, Vec<f64>)],
    granularities: &[u8],
    normalized: bool,
) -> Result<Vec<Partition>, ClusterError> {
    if granularities.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ClusterError::NotIncreasing);
    }
    let dendrogram = if normalized {
        build_dendrogram(&normalized_items(items)?)?
    } else {
        build_dendrogram(items)?
    };
    let mut out: Vec<Partition> = Vec::with_capacity(granularities.len());
    for &g in granularities {
        let mut p = dendrogram.partition(Cut::Granularity(g))?;
        p.parent = out.last().map(|prev| Box::new(prev.clone()));
        out.push(p);
    }
    Ok(out)
}

/// On-disk form of a clustering result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub granularity: Option<u8>,
    pub k: usize,
    pub clusters: Vec<Cluster>,
    pub converged: bool,
    pub passes: usize,
}

impl PartitionFile {
    pub fn new(partition: &Partition, converged: bool, passes: usize) -> PartitionFile {
        PartitionFile {
            granularity: partition.granularity,
            k: partition.k(),
            clusters: partition.clusters.clone(),
            converged,
            passes,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("partition serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct ClusterOptions {
    /// Accepted for interface stability; every algorithm here is deterministic.
    pub seed: u64,
    pub max_iters: usize,
    pub normalize: bool,
    pub depth: usize,
    pub width: usize,
    pub goals: usize,
    pub proof: ProofOptions,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            seed: 0,
            max_iters: DEFAULT_MAX_ITERS,
            normalize: false,
            depth: DEFAULT_DEPTH,
            width: DEFAULT_WIDTH,
            goals: DEFAULT_GOALS,
            proof: ProofOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecurrentResult {
    pub partition: Partition,
    /// Encoder built from the final partition.
    pub encoder: Encoder,
    pub converged: bool,
    pub passes: usize,
}

/// Statement feature vectors of every entry, in corpus order.
pub fn statement_vectors(
    corpus: &Corpus,
    encoder: &Encoder,
    options: &ClusterOptions,
) -> Result<Vec<(String, Vec<f64>)>, ClusterError> {
    corpus
        .entries
        .iter()
        .map(|e| {
            let m = encode_statement(corpus, e, encoder, options.depth, options.width)?;
            Ok((e.name.clone(), m.flatten()))
        })
        .collect()
}

/// Proof feature vectors of every entry with a proof, in corpus order.
pub fn proof_vectors(
    corpus: &Corpus,
    encoder: &Encoder,
    options: &ClusterOptions,
) -> Result<Vec<(String, Vec<f64>)>, ClusterError> {
    corpus
        .entries
        .iter()
        .filter(|e| e.has_proof())
        .map(|e| {
            let m = encode_proof(e, encoder, &options.proof, options.goals)?;
            Ok((e.name.clone(), m.flatten()))
        })
        .collect()
}

/// Clusters statements, re-encodes constants from the partition, and repeats
/// until the partition stops changing or `max_iters` passes have run.
pub fn recurrent_cluster(
    corpus: &Corpus,
    cut: Cut,
    options: &ClusterOptions,
) -> Result<RecurrentResult, ClusterError> {
    if corpus.entries.len() < 2 {
        return Err(ClusterError::TooFewItems(corpus.entries.len()));
    }
    let mut encoder = Encoder::initial(corpus);
    let mut previous: Option<Partition> = None;
    let mut passes = 0;
    loop {
        let items = statement_vectors(corpus, &encoder, options)?;
        let partition = cluster(&items, cut, options.normalize)?;
        passes += 1;
        encoder = Encoder::from_clusters(corpus, &partition.member_lists());
        let converged = previous
            .as_ref()
            .is_some_and(|p| p.same_grouping(&partition));
        if converged || passes >= options.max_iters.max(1) {
            return Ok(RecurrentResult {
                partition,
                encoder,
                converged,
                passes,
            });
        }
        previous = Some(partition);
    }
}

/// Clusters proofs once, with term arguments encoded by `encoder`.
pub fn cluster_proofs(
    corpus: &Corpus,
    encoder: &Encoder,
    cut: Cut,
    options: &ClusterOptions,
) -> Result<Partition, ClusterError> {
    let items = proof_vectors(corpus, encoder, options)?;
    if items.is_empty() {
        return Err(ClusterError::NoProofs);
    }
    cluster(&items, cut, options.normalize)
}

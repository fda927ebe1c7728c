//! Plain-text cluster reports, nested similarity graphs and proof-flow automata.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::clustering::Partition;
use crate::corpus::{Corpus, TacticStep};
use crate::dot::{id, quote};
use crate::proof_features::{ArgRole, TacticTable};
use crate::term::library_of;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReportError {
    #[error("nothing clustered")]
    NothingClustered,
    #[error("cluster {inner} of the finer partition is not inside one cluster of the coarser one")]
    NotRefining { inner: usize },
    #[error("cannot build an automaton for an empty cluster")]
    EmptyCluster,
    #[error("`{0}` has no proof")]
    NoProof(String),
}

/// One block per cluster, members sorted, each followed by its library.
pub fn text_report(partition: &Partition, corpus: &Corpus) -> Result<String, ReportError> {
    if partition.clusters.iter().all(|c| c.members.is_empty()) {
        return Err(ReportError::NothingClustered);
    }
    let mut out = String::new();
    for (i, c) in partition.clusters.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "Cluster {}", i + 1);
        let mut members: Vec<&String> = c.members.iter().collect();
        members.sort();
        for m in members {
            let lib = corpus
                .entry(m)
                .map_or_else(|| library_of(m), |e| e.library.as_str());
            let _ = writeln!(out, "  {m} ({lib})");
        }
    }
    Ok(out)
}

/// Boxes for the clusters of `outer`, with nested boxes for the clusters of
/// `inner` that are proper subsets of their outer cluster.
pub fn similarity_dot(outer: &Partition, inner: &Partition) -> Result<String, ReportError> {
    // Which outer cluster holds each inner cluster.
    let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (j, c) in inner.clusters.iter().enumerate() {
        let owners: Vec<Option<usize>> = c.members.iter().map(|m| outer.cluster_of(m)).collect();
        match owners.first() {
            Some(Some(o)) if owners.iter().all(|x| *x == Some(*o)) => {
                children.entry(*o).or_default().push(j)
            }
            None => {}
            _ => return Err(ReportError::NotRefining { inner: j }),
        }
    }
    let mut out = String::from("digraph similarity {\n  node [shape=ellipse];\n");
    for (i, c) in outer.clusters.iter().enumerate() {
        let _ = writeln!(
            out,
            "  subgraph cluster_{i} {{\n    label={};",
            quote(&format!("Cluster {}", i + 1))
        );
        let mut loose: Vec<&String> = Vec::new();
        for &j in children.get(&i).into_iter().flatten() {
            let ic = &inner.clusters[j];
            if ic.members.len() >= 2 && ic.members.len() < c.members.len() {
                let _ = writeln!(out, "    subgraph cluster_{i}_{j} {{\n      label=\"\";");
                let mut ms: Vec<&String> = ic.members.iter().collect();
                ms.sort();
                for m in ms {
                    let _ = writeln!(out, "      {};", id(m));
                }
                out.push_str("    }\n");
            } else {
                loose.extend(&ic.members);
            }
        }
        // Outer members the inner partition does not mention.
        loose.extend(c.members.iter().filter(|m| inner.cluster_of(m).is_none()));
        loose.sort();
        for m in loose {
            let _ = writeln!(out, "    {};", id(m));
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    Ok(out)
}

/// Argument tag of an abstracted proof step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArgTag {
    None,
    Hypothesis,
    ProofTerm,
}

impl ArgTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ArgTag::None => "none",
            ArgTag::Hypothesis => "hypothesis",
            ArgTag::ProofTerm => "proof-term",
        }
    }
}

/// A tactic with its concrete arguments dropped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StepLabel {
    pub tactic: String,
    pub tag: ArgTag,
}

impl StepLabel {
    pub fn of(step: &TacticStep, table: &TacticTable) -> StepLabel {
        let tag = if step.args.is_empty() {
            ArgTag::None
        } else {
            match table.role(&step.tactic) {
                ArgRole::Hypothesis => ArgTag::Hypothesis,
                ArgRole::ProofTerm => ArgTag::ProofTerm,
            }
        };
        StepLabel {
            tactic: step.tactic.clone(),
            tag,
        }
    }
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tag {
            ArgTag::None => f.write_str(&self.tactic),
            tag => write!(f, "{} [{}]", self.tactic, tag.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub count: usize,
}

/// Prefix tree of abstracted traces. State `label` is `None` only for the
/// synthetic start state used when traces begin differently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    pub states: Vec<Option<StepLabel>>,
    pub transitions: Vec<Transition>,
    pub start: usize,
    pub accepting: Vec<bool>,
}

impl Automaton {
    fn step(&self, from: usize, label: &StepLabel) -> Option<usize> {
        self.transitions
            .iter()
            .find(|t| t.from == from && self.states[t.to].as_ref() == Some(label))
            .map(|t| t.to)
    }

    /// Whether `trace` is a path from the start state to an accepting state.
    pub fn accepts(&self, trace: &[TacticStep], table: &TacticTable) -> bool {
        let labels: Vec<StepLabel> = trace.iter().map(|s| StepLabel::of(s, table)).collect();
        let Some(first) = labels.first() else {
            return false;
        };
        let (mut state, rest) = match &self.states[self.start] {
            Some(l) if l == first => (self.start, &labels[1..]),
            Some(_) => return false,
            None => (self.start, &labels[..]),
        };
        for l in rest {
            match self.step(state, l) {
                Some(next) => state = next,
                None => return false,
            }
        }
        self.accepting[state]
    }

    pub fn out_degree(&self, state: usize) -> usize {
        self.transitions.iter().filter(|t| t.from == state).count()
    }

    /// A single path with no branching.
    pub fn is_chain(&self) -> bool {
        (0..self.states.len()).all(|s| self.out_degree(s) <= 1)
    }
}

/// Merges the member traces of one cluster step by step.
pub fn build_automaton(
    traces: &[(&str, Option<&[TacticStep]>)],
    table: &TacticTable,
) -> Result<Automaton, ReportError> {
    if traces.is_empty() {
        return Err(ReportError::EmptyCluster);
    }
    let mut labelled = Vec::with_capacity(traces.len());
    for (name, trace) in traces {
        match trace {
            Some(t) if !t.is_empty() => labelled.push(
                t.iter()
                    .map(|s| StepLabel::of(s, table))
                    .collect::<Vec<_>>(),
            ),
            _ => return Err(ReportError::NoProof(name.to_string())),
        }
    }
    let shared_first = labelled.iter().all(|t| t[0] == labelled[0][0]);
    let mut a = Automaton {
        states: vec![shared_first.then(|| labelled[0][0].clone())],
        transitions: Vec::new(),
        start: 0,
        accepting: vec![false],
    };
    for trace in &labelled {
        let rest = if shared_first {
            &trace[1..]
        } else {
            &trace[..]
        };
        let mut state = a.start;
        for l in rest {
            state = match a.step(state, l) {
                Some(next) => {
                    let t = a
                        .transitions
                        .iter_mut()
                        .find(|t| t.from == state && t.to == next)
                        .unwrap();
                    t.count += 1;
                    next
                }
                None => {
                    a.states.push(Some(l.clone()));
                    a.accepting.push(false);
                    let next = a.states.len() - 1;
                    a.transitions.push(Transition {
                        from: state,
                        to: next,
                        count: 1,
                    });
                    next
                }
            };
        }
        a.accepting[state] = true;
    }
    Ok(a)
}

pub fn automaton_dot(a: &Automaton, name: &str) -> String {
    let mut out = format!(
        "digraph {} {{\n  rankdir=LR;\n  node [shape=circle];\n",
        id(name)
    );
    for (i, s) in a.states.iter().enumerate() {
        let label = s
            .as_ref()
            .map_or_else(|| "start".to_string(), |l| l.to_string());
        let mut attrs = vec![format!("label={}", quote(&label))];
        if a.accepting[i] {
            attrs.push("shape=doublecircle".into());
        }
        if i == a.start {
            attrs.push("style=bold".into());
        }
        let _ = writeln!(out, "  s{i} [{}];", attrs.join(", "));
    }
    for t in &a.transitions {
        if t.count > 1 {
            let _ = writeln!(out, "  s{} -> s{} [label=\"x{}\"];", t.from, t.to, t.count);
        } else {
            let _ = writeln!(out, "  s{} -> s{};", t.from, t.to);
        }
    }
    out.push_str("}\n");
    out
}

/// One automaton per cluster of a proof partition.
pub fn partition_automata(
    partition: &Partition,
    corpus: &Corpus,
    table: &TacticTable,
) -> Result<Vec<Automaton>, ReportError> {
    if partition.clusters.is_empty() {
        return Err(ReportError::NothingClustered);
    }
    partition
        .clusters
        .iter()
        .map(|c| {
            let traces: Vec<(&str, Option<&[TacticStep]>)> = c
                .members
                .iter()
                .map(|m| (m.as_str(), corpus.entry(m).and_then(|e| e.proof.as_deref())))
                .collect();
            build_automaton(&traces, table)
        })
        .collect()
}

/// All cluster automata of a partition, one digraph each.
pub fn automata_dot(
    partition: &Partition,
    corpus: &Corpus,
    table: &TacticTable,
) -> Result<String, ReportError> {
    let automata = partition_automata(partition, corpus, table)?;
    Ok(automata
        .iter()
        .enumerate()
        .map(|(i, a)| automaton_dot(a, &format!("cluster_{}", i + 1)))
        .collect::<Vec<_>>()
        .join("\n"))
}

//! Theorem dependency graphs and library import graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::corpus::{Corpus, EntryKind};
use crate::dot::{id, quote};
use crate::term::{library_of, short_name};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("unknown root `{0}`")]
    UnknownRoot(String),
    #[error("cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DepNode {
    pub name: String,
    pub kind: EntryKind,
    pub library: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DepGraph {
    pub nodes: BTreeMap<String, DepNode>,
    pub edges: BTreeSet<(String, String)>,
    pub roots: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LibGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
}

/// Names each symbol mentions, in corpus order of the user.
fn mentions(corpus: &Corpus) -> BTreeMap<&str, BTreeSet<&str>> {
    let mut out: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for p in &corpus.primitives {
        out.entry(&p.name).or_default().extend(p.ty.constants());
    }
    for e in &corpus.entries {
        let used = out.entry(&e.name).or_default();
        used.extend(e.statement.constants());
        for step in e.proof.iter().flatten() {
            used.extend(step.goal_before.constants());
            for a in &step.args {
                used.extend(a.constants());
            }
        }
        used.extend(e.declared_deps.iter().flatten().map(String::as_str));
    }
    for (name, used) in out.iter_mut() {
        used.remove(name);
    }
    out
}

/// Raw "uses" edges, restricted to what `root` reaches when given.
pub fn uses_relation(
    corpus: &Corpus,
    root: Option<&str>,
) -> Result<BTreeSet<(String, String)>, GraphError> {
    let uses = mentions(corpus);
    let pairs = |from: &str| -> Vec<(String, String)> {
        uses.get(from)
            .into_iter()
            .flatten()
            .map(|to| (from.to_string(), to.to_string()))
            .collect()
    };
    match root {
        None => Ok(uses.keys().flat_map(|u| pairs(u)).collect()),
        Some(r) => {
            if corpus.symbol(r).is_none() {
                return Err(GraphError::UnknownRoot(r.to_string()));
            }
            let mut seen: BTreeSet<&str> = BTreeSet::from([r]);
            let mut stack = vec![r];
            let mut edges = BTreeSet::new();
            while let Some(u) = stack.pop() {
                for v in uses.get(u).into_iter().flatten() {
                    edges.insert((u.to_string(), v.to_string()));
                    if seen.insert(v) {
                        stack.push(v);
                    }
                }
            }
            Ok(edges)
        }
    }
}

/// Minimal edge set with the same reachability. Fails on cycles.
pub fn transitive_reduction<N: Ord + Clone>(
    edges: &BTreeSet<(N, N)>,
) -> Result<BTreeSet<(N, N)>, Vec<N>> {
    let nodes: Vec<&N> = edges
        .iter()
        .flat_map(|(a, b)| [a, b])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&N, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let n = nodes.len();
    let mut succ = vec![Vec::new(); n];
    for (a, b) in edges {
        succ[index[a]].push(index[b]);
    }

    let order = topo_order(&succ).map_err(|cycle| {
        cycle
            .into_iter()
            .map(|i| nodes[i].clone())
            .collect::<Vec<_>>()
    })?;
    // reach[v] holds every node reachable from v by a path of length >= 1.
    let mut reach = vec![vec![false; n]; n];
    for &v in order.iter().rev() {
        let mut row = vec![false; n];
        for &w in &succ[v] {
            row[w] = true;
            for (x, r) in reach[w].iter().enumerate() {
                row[x] |= r;
            }
        }
        reach[v] = row;
    }
    Ok(edges
        .iter()
        .filter(|(a, b)| {
            let (a, b) = (index[a], index[b]);
            !succ[a].iter().any(|&c| c != b && reach[c][b])
        })
        .cloned()
        .collect())
}

// Topological order of `succ`, or one cycle as a node list that closes on its first node.
fn topo_order(succ: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let n = succ.len();
    let mut mark = vec![Mark::New; n];
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        if mark[start] != Mark::New {
            continue;
        }
        let mut path = vec![start];
        let mut next = vec![0usize];
        mark[start] = Mark::Open;
        while let Some(&v) = path.last() {
            let i = next.last_mut().unwrap();
            if let Some(&w) = succ[v].get(*i) {
                *i += 1;
                match mark[w] {
                    Mark::New => {
                        mark[w] = Mark::Open;
                        path.push(w);
                        next.push(0);
                    }
                    Mark::Open => {
                        let from = path.iter().position(|&x| x == w).unwrap();
                        let mut cycle = path[from..].to_vec();
                        cycle.push(w);
                        return Err(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                order.push(v);
                path.pop();
                next.pop();
            }
        }
    }
    order.reverse();
    Ok(order)
}

/// Dependency graph of `root`, or of the whole corpus when `root` is `None`.
pub fn build_dg1(corpus: &Corpus, root: Option<&str>) -> Result<DepGraph, GraphError> {
    let raw = uses_relation(corpus, root)?;
    let edges = transitive_reduction(&raw).map_err(GraphError::Cycle)?;
    let mut names: BTreeSet<&str> = raw
        .iter()
        .flat_map(|(a, b)| [a.as_str(), b.as_str()])
        .collect();
    match root {
        Some(r) => {
            names.insert(r);
        }
        None => {
            names.extend(corpus.primitives.iter().map(|p| p.name.as_str()));
            names.extend(corpus.entries.iter().map(|e| e.name.as_str()));
        }
    }
    let mut nodes = BTreeMap::new();
    for name in names {
        let kind = corpus
            .symbol(name)
            .map(|s| s.kind())
            .ok_or_else(|| GraphError::UnknownRoot(name.to_string()))?;
        nodes.insert(
            name.to_string(),
            DepNode {
                name: name.to_string(),
                kind,
                library: library_of(name).to_string(),
            },
        );
    }
    let targets: BTreeSet<&str> = edges.iter().map(|(_, b)| b.as_str()).collect();
    let roots = nodes
        .keys()
        .filter(|n| !targets.contains(n.as_str()))
        .cloned()
        .collect();
    Ok(DepGraph {
        nodes,
        edges,
        roots,
    })
}

/// Library import graph after transitive reduction.
pub fn build_dg2(corpus: &Corpus) -> Result<LibGraph, GraphError> {
    let mut nodes: BTreeSet<String> = BTreeSet::new();
    let mut raw = BTreeSet::new();
    for lib in &corpus.libraries {
        nodes.insert(lib.name.clone());
        for imp in &lib.imports {
            nodes.insert(imp.clone());
            if *imp != lib.name {
                raw.insert((lib.name.clone(), imp.clone()));
            } else {
                return Err(GraphError::Cycle(vec![imp.clone(), imp.clone()]));
            }
        }
    }
    let edges = transitive_reduction(&raw).map_err(GraphError::Cycle)?;
    Ok(LibGraph { nodes, edges })
}

pub fn kind_color(kind: EntryKind) -> &'static str {
    match kind {
        EntryKind::Theorem => "orange",
        EntryKind::Definition => "green",
        EntryKind::Inductive => "lightpink",
        EntryKind::Constructor => "blue",
        EntryKind::InnerConstructor => "deeppink",
    }
}

/// DOT for a dependency graph: one box per library, roots drawn with a double border.
pub fn dep_graph_dot(graph: &DepGraph) -> String {
    let mut by_lib: BTreeMap<&str, Vec<&DepNode>> = BTreeMap::new();
    for node in graph.nodes.values() {
        by_lib.entry(&node.library).or_default().push(node);
    }
    let mut out = String::from("digraph dependencies {\n  node [style=filled];\n");
    for (i, (lib, nodes)) in by_lib.iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_{i} {{\n    label={};", quote(lib));
        for node in nodes {
            let _ = write!(
                out,
                "    {} [label={}, fillcolor={}",
                id(&node.name),
                quote(short_name(&node.name)),
                quote(kind_color(node.kind))
            );
            if graph.roots.contains(&node.name) {
                out.push_str(", peripheries=2");
            }
            out.push_str("];\n");
        }
        out.push_str("  }\n");
    }
    for (a, b) in &graph.edges {
        let _ = writeln!(out, "  {} -> {};", id(a), id(b));
    }
    out.push_str("}\n");
    out
}

pub fn lib_graph_dot(graph: &LibGraph) -> String {
    let mut out = String::from("digraph libraries {\n");
    for n in &graph.nodes {
        let _ = writeln!(out, "  {};", id(n));
    }
    for (a, b) in &graph.edges {
        let _ = writeln!(out, "  {} -> {};", id(a), id(b));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_corpus;

    fn set(pairs: &[(&str, &str)]) -> BTreeSet<(String, String)> {
        pairs
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    const CHAIN: &str = "\
(primitive definition D (sort Type))
(entry theorem L (statement (forall (x (const D)) (sort Prop)))
  (proof (step exact (args) (goal (sort Prop)) (subgoals 0))))
(entry theorem T (statement (sort Prop))
  (proof (step exact (args (const L)) (goal (sort Prop)) (subgoals 0))))
";

    #[test]
    fn triangle_reduces() {
        let r = transitive_reduction(&set(&[("a", "b"), ("b", "c"), ("a", "c")])).unwrap();
        assert_eq!(r, set(&[("a", "b"), ("b", "c")]));
    }

    #[test]
    fn reduced_chain_unchanged() {
        let chain = set(&[("a", "b"), ("b", "c"), ("c", "d")]);
        assert_eq!(transitive_reduction(&chain).unwrap(), chain);
    }

    #[test]
    fn cycles_are_reported() {
        let err = transitive_reduction(&set(&[("a", "b"), ("b", "c"), ("c", "a")])).unwrap_err();
        assert_eq!(err.first(), err.last());
        assert_eq!(err.len(), 4);
    }

    #[test]
    fn chain_dg1() {
        let c = parse_corpus(CHAIN).unwrap();
        assert_eq!(
            uses_relation(&c, Some("T")).unwrap(),
            set(&[("T", "L"), ("L", "D")])
        );
        let g = build_dg1(&c, Some("T")).unwrap();
        assert_eq!(g.nodes.keys().collect::<Vec<_>>(), ["D", "L", "T"]);
        assert_eq!(g.roots, BTreeSet::from(["T".to_string()]));
        let dot = dep_graph_dot(&g);
        assert!(dot.contains("T [label=\"T\", fillcolor=\"orange\", peripheries=2];"));
    }

    #[test]
    fn isolated_root() {
        let c = parse_corpus(CHAIN).unwrap();
        let g = build_dg1(&c, Some("D")).unwrap();
        assert!(g.edges.is_empty());
        assert_eq!(g.roots.len(), 1);
        assert!(uses_relation(&c, Some("D")).unwrap().is_empty());
        assert_eq!(
            build_dg1(&c, Some("nope")),
            Err(GraphError::UnknownRoot("nope".into()))
        );
    }

    #[test]
    fn library_reduction() {
        let c = parse_corpus("(library C)\n(library B (imports C))\n(library A (imports B C))\n")
            .unwrap();
        let g = build_dg2(&c).unwrap();
        assert_eq!(g.edges, set(&[("A", "B"), ("B", "C")]));
        assert_eq!(
            lib_graph_dot(&g),
            "digraph libraries {\n  A;\n  B;\n  C;\n  A -> B;\n  B -> C;\n}\n"
        );
    }

    #[test]
    fn empty_graphs() {
        let c = parse_corpus("").unwrap();
        assert_eq!(
            lib_graph_dot(&build_dg2(&c).unwrap()),
            "digraph libraries {\n}\n"
        );
        assert_eq!(
            dep_graph_dot(&DepGraph::default()),
            "digraph dependencies {\n  node [style=filled];\n}\n"
        );
    }
}

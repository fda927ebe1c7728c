use std::collections::{BTreeMap, BTreeSet};

use proofscope::clustering::{nested_partitions, statement_vectors, ClusterOptions, Partition};
use proofscope::dep_graph::{build_dg1, uses_relation};
use proofscope::features::Encoder;
use proofscope::report::similarity_dot;
use proofscope::sample::SAMPLE_CORPUS;
use proofscope::{parse_corpus, Term};

fn consts(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Const(c) => {
            out.insert(c.clone());
        }
        Term::Var(_) | Term::Sort(_) => {}
        Term::App(h, args) => {
            consts(h, out);
            args.iter().for_each(|a| consts(a, out));
        }
        Term::Binder { ty, body, .. } => {
            consts(ty, out);
            consts(body, out);
        }
        Term::Arrow(a, b) => {
            consts(a, out);
            consts(b, out);
        }
    }
}

#[test]
fn uses_relation_matches_a_full_scan() {
    let c = parse_corpus(SAMPLE_CORPUS).unwrap();
    let mut expected = BTreeSet::new();
    let mut add = |from: &str, used: BTreeSet<String>| {
        for u in used {
            if u != from {
                expected.insert((from.to_string(), u));
            }
        }
    };
    for p in &c.primitives {
        let mut s = BTreeSet::new();
        consts(&p.ty, &mut s);
        add(&p.name, s);
    }
    for e in &c.entries {
        let mut s = BTreeSet::new();
        consts(&e.statement, &mut s);
        for step in e.proof.iter().flatten() {
            consts(&step.goal_before, &mut s);
            step.args.iter().for_each(|a| consts(a, &mut s));
        }
        s.extend(e.declared_deps.iter().flatten().cloned());
        add(&e.name, s);
    }
    assert_eq!(uses_relation(&c, None).unwrap(), expected);

    // A rooted graph keeps exactly the nodes reachable from the root.
    let root = "Paths.dpath_path_l";
    let mut reach = BTreeSet::from([root.to_string()]);
    loop {
        let next: BTreeSet<String> = expected
            .iter()
            .filter(|(a, _)| reach.contains(a))
            .map(|(_, b)| b.clone())
            .collect();
        let before = reach.len();
        reach.extend(next);
        if reach.len() == before {
            break;
        }
    }
    let g = build_dg1(&c, Some(root)).unwrap();
    assert_eq!(g.nodes.keys().cloned().collect::<BTreeSet<_>>(), reach);
}

/// Node membership of each `subgraph` path in a DOT document.
fn boxes(dot: &str) -> BTreeMap<Vec<String>, BTreeSet<String>> {
    let mut stack: Vec<String> = Vec::new();
    let mut out: BTreeMap<Vec<String>, BTreeSet<String>> = BTreeMap::new();
    for line in dot.lines().map(str::trim) {
        if let Some(rest) = line.strip_prefix("subgraph ") {
            stack.push(rest.trim_end_matches(" {").to_string());
            out.entry(stack.clone()).or_default();
        } else if line == "}" {
            stack.pop();
        } else if let Some(node) = line.strip_suffix(';').and_then(|l| l.strip_prefix('"')) {
            let node = node.trim_end_matches('"').to_string();
            for depth in 1..=stack.len() {
                out.entry(stack[..depth].to_vec())
                    .or_default()
                    .insert(node.clone());
            }
        }
    }
    out
}

fn sets(p: &Partition) -> BTreeSet<BTreeSet<String>> {
    p.clusters
        .iter()
        .map(|c| c.members.iter().cloned().collect())
        .collect()
}

#[test]
fn similarity_boxes_follow_refinement() {
    let c = parse_corpus(SAMPLE_CORPUS).unwrap();
    let items = statement_vectors(&c, &Encoder::initial(&c), &ClusterOptions::default()).unwrap();
    for (g, nested) in [(1, 3), (3, 5), (2, 4)] {
        let ps = nested_partitions(&items, &[g, nested], false).unwrap();
        let (outer, inner) = (&ps[0], &ps[1]);
        let b = boxes(&similarity_dot(outer, inner).unwrap());
        let top: BTreeSet<BTreeSet<String>> = b
            .iter()
            .filter(|(k, _)| k.len() == 1)
            .map(|(_, v)| v.clone())
            .collect();
        assert_eq!(top, sets(outer));
        for (path, members) in b.iter().filter(|(k, _)| k.len() == 2) {
            assert!(
                sets(inner).contains(members),
                "{path:?} is not an inner cluster"
            );
            assert!(b[&path[..1].to_vec()].is_superset(members));
            assert!(members.len() >= 2);
        }
        // Every inner cluster that is a strict, non-singleton subset gets a box.
        let drawn: BTreeSet<&BTreeSet<String>> = b
            .iter()
            .filter(|(k, _)| k.len() == 2)
            .map(|(_, v)| v)
            .collect();
        for s in sets(inner) {
            let strict = s.len() >= 2 && !sets(outer).contains(&s);
            assert_eq!(drawn.contains(&s), strict, "{s:?}");
        }
    }
}

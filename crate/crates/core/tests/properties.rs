use std::collections::{BTreeSet, VecDeque};

use proofscope::clustering::{build_dendrogram, k_for_granularity, nested_partitions, Cut};
use proofscope::corpus::{parse_corpus, parse_term_str, term_to_sexp, Corpus, TacticStep};
use proofscope::dep_graph::transitive_reduction;
use proofscope::features::{encode_tree, Encoder};
use proofscope::proof_features::TacticTable;
use proofscope::report::build_automaton;
use proofscope::term::{BinderKind, Sort, Term};
use proofscope::term_tree::build_term_tree;
use proptest::prelude::*;

const SIGNATURE: &str = "\
(library Base)
(primitive inductive Base.paths (forall (A (sort Type)) (arrow (var A) (arrow (var A) (sort Type)))))
(primitive definition Base.f (arrow (sort Type) (arrow (sort Type) (sort Type))))
(primitive definition Base.g (arrow (sort Prop) (sort Prop)))
";
const CONSTS: [&str; 3] = ["Base.paths", "Base.f", "Base.g"];

fn signature() -> Corpus {
    parse_corpus(SIGNATURE).unwrap()
}

/// Term skeleton; variables are indices into the enclosing binders.
#[derive(Debug, Clone)]
enum Raw {
    Var(usize),
    Const(usize),
    Sort(u8),
    App(Box<Raw>, Vec<Raw>),
    Bind(u8, Box<Raw>, Box<Raw>),
    Arrow(Box<Raw>, Box<Raw>),
}

fn raw() -> impl Strategy<Value = Raw> {
    let leaf = prop_oneof![
        (0usize..8).prop_map(Raw::Var),
        (0usize..3).prop_map(Raw::Const),
        (0u8..3).prop_map(Raw::Sort),
    ];
    leaf.prop_recursive(5, 40, 4, |inner| {
        prop_oneof![
            (
                prop_oneof![
                    (0usize..3).prop_map(Raw::Const),
                    (0usize..8).prop_map(Raw::Var)
                ],
                prop::collection::vec(inner.clone(), 1..4)
            )
                .prop_map(|(h, args)| Raw::App(Box::new(h), args)),
            (0u8..3, inner.clone(), inner.clone()).prop_map(|(k, t, b)| Raw::Bind(
                k,
                Box::new(t),
                Box::new(b)
            )),
            (inner.clone(), inner).prop_map(|(a, b)| Raw::Arrow(Box::new(a), Box::new(b))),
        ]
    })
}

/// Closed term from a skeleton; binder at depth `d` is named `namer(d)`.
fn realize(r: &Raw, ctx: &mut Vec<String>, namer: &dyn Fn(usize) -> String) -> Term {
    match r {
        Raw::Var(i) if ctx.is_empty() => {
            let _ = i;
            Term::Sort(Sort::Type)
        }
        Raw::Var(i) => Term::Var(ctx[i % ctx.len()].clone()),
        Raw::Const(i) => Term::constant(CONSTS[*i]),
        Raw::Sort(s) => Term::Sort([Sort::Type, Sort::Prop, Sort::Set][*s as usize]),
        Raw::App(h, args) => {
            let head = realize(h, ctx, namer);
            let head = if matches!(head, Term::Sort(_)) {
                Term::constant(CONSTS[1])
            } else {
                head
            };
            Term::app(head, args.iter().map(|a| realize(a, ctx, namer)).collect())
        }
        Raw::Bind(k, t, b) => {
            let ty = realize(t, ctx, namer);
            let name = namer(ctx.len());
            ctx.push(name.clone());
            let body = realize(b, ctx, namer);
            ctx.pop();
            let kind = [BinderKind::Forall, BinderKind::Lambda, BinderKind::Let][*k as usize];
            Term::binder(kind, name, ty, body)
        }
        Raw::Arrow(a, b) => Term::arrow(realize(a, ctx, namer), realize(b, ctx, namer)),
    }
}

fn term(r: &Raw) -> Term {
    realize(r, &mut Vec::new(), &|d| format!("x{d}"))
}

// Independent count: keyword per binder run, one node per bound variable,
// one per application head, arrow keyword, leaves.
fn expected_nodes(t: &Term) -> usize {
    match t {
        Term::Binder { kind, .. } => {
            let mut n = 1;
            let mut cur = t;
            while let Term::Binder { kind: k, body, .. } = cur {
                if k != kind {
                    break;
                }
                n += 1;
                cur = body;
            }
            n + expected_nodes(cur)
        }
        Term::App(..) => {
            let (_, args) = t.spine();
            1 + args.into_iter().map(expected_nodes).sum::<usize>()
        }
        Term::Arrow(a, b) => 1 + expected_nodes(a) + expected_nodes(b),
        _ => 1,
    }
}

fn reach(n: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<Vec<bool>> {
    (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut q: VecDeque<usize> = edges.iter().filter(|e| e.0 == s).map(|e| e.1).collect();
            while let Some(v) = q.pop_front() {
                if !seen[v] {
                    seen[v] = true;
                    q.extend(edges.iter().filter(|e| e.0 == v).map(|e| e.1));
                }
            }
            seen
        })
        .collect()
}

fn dag() -> impl Strategy<Value = (usize, BTreeSet<(usize, usize)>)> {
    (1usize..=12).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let m = pairs.len();
        (Just(n), prop::collection::vec(any::<bool>(), m)).prop_map(move |(n, bits)| {
            let edges = pairs
                .iter()
                .zip(bits)
                .filter(|(_, b)| *b)
                .map(|(p, _)| *p)
                .collect();
            (n, edges)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn terms_survive_sexp_round_trip(r in raw()) {
        let t = term(&r);
        prop_assert_eq!(parse_term_str(&term_to_sexp(&t)).unwrap(), t);
    }

    #[test]
    fn node_count_matches_term_structure(r in raw()) {
        let t = term(&r);
        let tree = build_term_tree(&t, &[], &signature()).unwrap();
        prop_assert_eq!(tree.nodes.len(), expected_nodes(&t));
        for d in 0..tree.depth_count {
            let mut idx: Vec<usize> = tree.nodes.iter().filter(|n| n.depth == d).map(|n| n.level_index).collect();
            idx.sort_unstable();
            prop_assert_eq!(idx, (0..tree.widths()[d]).collect::<Vec<_>>());
        }
        for n in &tree.nodes[1..] {
            prop_assert_eq!(tree.nodes[n.parent.unwrap()].depth + 1, n.depth);
        }
    }

    #[test]
    fn renaming_bound_variables_keeps_features(r in raw()) {
        let sig = signature();
        let a = realize(&r, &mut Vec::new(), &|d| format!("x{d}"));
        let b = realize(&r, &mut Vec::new(), &|d| format!("renamed_{}", 100 - d));
        let ta = build_term_tree(&a, &[], &sig).unwrap();
        let tb = build_term_tree(&b, &[], &sig).unwrap();
        let (d, w) = (ta.depth_count, ta.max_width);
        prop_assert_eq!((tb.depth_count, tb.max_width), (d, w));
        let enc = Encoder::initial(&sig);
        let ma = encode_tree(&ta, &enc, d, w, "a").unwrap();
        let mb = encode_tree(&tb, &enc, d, w, "b").unwrap();
        prop_assert_eq!(ma.flatten(), mb.flatten());
    }

    #[test]
    fn reduction_preserves_reachability_minimally((n, edges) in dag()) {
        let reduced = transitive_reduction(&edges).unwrap();
        let before = reach(n, &edges);
        prop_assert!(reduced.is_subset(&edges));
        prop_assert_eq!(&reach(n, &reduced), &before);
        for e in &reduced {
            let mut fewer = reduced.clone();
            fewer.remove(e);
            prop_assert_ne!(&reach(n, &fewer), &before);
        }
        prop_assert_eq!(transitive_reduction(&reduced).unwrap(), reduced);
    }

    #[test]
    fn nested_partitions_refine(
        points in prop::collection::vec(prop::collection::vec(-5i32..5, 3), 2..30),
    ) {
        let items: Vec<(String, Vec<f64>)> = points
            .iter()
            .enumerate()
            .map(|(i, v)| (format!("e{i:02}"), v.iter().map(|x| *x as f64).collect()))
            .collect();
        let ps = nested_partitions(&items, &[1, 2, 3, 4, 5], false).unwrap();
        for w in ps.windows(2) {
            prop_assert!(w[1].refines(&w[0]));
            prop_assert!(w[1].k() >= w[0].k());
        }
        let d = build_dendrogram(&items).unwrap();
        prop_assert!(d.merges.windows(2).all(|m| m[0].height <= m[1].height));
        let all: BTreeSet<&String> = ps[4].clusters.iter().flat_map(|c| &c.members).collect();
        prop_assert_eq!(all.len(), items.len());
    }

    #[test]
    fn k_grows_with_granularity(n in 2usize..500) {
        let ks: Vec<usize> = (1..=5).map(|g| k_for_granularity(n, g).unwrap()).collect();
        prop_assert!(ks.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(ks.iter().all(|k| *k >= 2));
        prop_assert_eq!(Cut::Granularity(5).requested_k(n).unwrap(), (n / 5).max(2));
    }

    #[test]
    fn automata_accept_their_traces(
        traces in prop::collection::vec(prop::collection::vec((0usize..4, any::<bool>()), 1..6), 1..6),
    ) {
        let tactics = ["destruct", "simpl", "exact", "apply"];
        let table = TacticTable::default();
        let steps: Vec<Vec<TacticStep>> = traces
            .iter()
            .map(|t| {
                t.iter()
                    .map(|(i, arg)| TacticStep {
                        tactic: tactics[*i].to_string(),
                        args: if *arg { vec![Term::var("h")] } else { vec![] },
                        goal_before: Term::var("g"),
                        subgoals_after: 0,
                    })
                    .collect()
            })
            .collect();
        let members: Vec<(&str, Option<&[TacticStep]>)> = steps.iter().map(|s| ("m", Some(s.as_slice()))).collect();
        let a = build_automaton(&members, &table).unwrap();
        for s in &steps {
            prop_assert!(a.accepts(s, &table));
        }
    }
}

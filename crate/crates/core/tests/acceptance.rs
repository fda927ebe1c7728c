//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed; the process
//! exits non-zero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use proofscope::clustering::{
    cluster, cluster_proofs, nested_partitions, proof_vectors, recurrent_cluster,
    statement_vectors, ClusterOptions, Cut, Partition,
};
use proofscope::corpus::{parse_corpus, Corpus, TacticStep};
use proofscope::dep_graph::transitive_reduction;
use proofscope::features::{encode_statement, keyword_code, Cell, Encoder};
use proofscope::proof_features::{encode_proof, ProofOptions, TacticTable, DEFAULT_GOALS};
use proofscope::report::{partition_automata, StepLabel};
use proofscope::sample::SAMPLE_CORPUS;
use proofscope::term::{Keyword, Term};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STATEMENT_FAMILIES: [[&str; 5]; 4] = [
    [
        "PathGroupoids.concat_p1",
        "PathGroupoids.concat_1p",
        "PathGroupoids.concat_pV",
        "PathGroupoids.concat_Vp",
        "PathGroupoids.inv_V",
    ],
    [
        "Equivalences.equiv_concat_l",
        "Equivalences.equiv_concat_r",
        "Equivalences.equiv_moveL_Vp",
        "Equivalences.equiv_moveR_pV",
        "Equivalences.equiv_inverse_l",
    ],
    [
        "Paths.dpath_path_l",
        "Paths.dpath_path_r",
        "Paths.dpath_path_lr",
        "Paths.dpath_path_l_op",
        "Paths.dpath_path_r_op",
    ],
    [
        "Paths.transport_paths_l",
        "Paths.transport_paths_r",
        "Paths.transport_paths_lr",
        "Paths.transport_paths_l_op",
        "Paths.transport_paths_r_op",
    ],
];

const PROOF_FAMILIES: [[&str; 4]; 5] = [
    [
        "Equivalences.equiv_concat_l",
        "Equivalences.equiv_concat_r",
        "Paths.dpath_path_r",
        "Paths.dpath_path_lr",
    ],
    [
        "Paths.dpath_path_l",
        "Paths.transport_paths_l",
        "Paths.transport_paths_r",
        "Paths.transport_paths_lr",
    ],
    [
        "PathGroupoids.concat_pV",
        "PathGroupoids.concat_Vp",
        "Paths.transport_paths_l_op",
        "Paths.transport_paths_r_op",
    ],
    [
        "Equivalences.equiv_moveL_Vp",
        "Equivalences.equiv_moveR_pV",
        "Paths.dpath_path_l_op",
        "Paths.dpath_path_r_op",
    ],
    [
        "PathGroupoids.concat_p1",
        "PathGroupoids.concat_1p",
        "PathGroupoids.inv_V",
        "Equivalences.equiv_inverse_l",
    ],
];

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn corpus() -> Corpus {
    parse_corpus(SAMPLE_CORPUS).expect("bundled corpus parses")
}

fn groups(p: &Partition) -> BTreeSet<BTreeSet<String>> {
    p.clusters
        .iter()
        .map(|c| c.members.iter().cloned().collect())
        .collect()
}

fn expected<const N: usize>(families: &[[&str; N]]) -> BTreeSet<BTreeSet<String>> {
    families
        .iter()
        .map(|f| f.iter().map(|s| s.to_string()).collect())
        .collect()
}

fn same(p: &Partition, a: &str, b: &str) -> bool {
    p.cluster_of(a).is_some() && p.cluster_of(a) == p.cluster_of(b)
}

fn within(limit: Duration, start: Instant) -> Check {
    let took = start.elapsed();
    ensure!(took < limit, "took {took:?}, limit {limit:?}");
    Ok(())
}

fn is_keyword_code(x: f64) -> bool {
    Keyword::ALL.iter().any(|k| keyword_code(*k) == x)
}

fn term_tree_structure() -> Check {
    let start = Instant::now();
    let c = corpus();
    let entry = c.entry("Paths.dpath_path_l").ok_or("missing entry")?;
    let enc = Encoder::initial(&c);
    let m = encode_statement(&c, entry, &enc, 10, 10).map_err(|e| e.to_string())?;

    let root = m.cell(0, 0);
    ensure!(
        is_keyword_code(root.term),
        "root term code {} is not a keyword",
        root.term
    );
    ensure!(root.ty == -1.0 && root.parent == -1, "root cell {root:?}");

    // p is the fifth bound variable: a variable code typed by an application of paths.
    let p = m.cell(1, 4);
    ensure!(p.parent == 0, "p parent {}", p.parent);
    ensure!(
        p.term > 0.0 && p.term < 1.0,
        "p term code {} is not a variable code",
        p.term
    );
    let paths = enc
        .const_code("Overture.paths")
        .map_err(|e| e.to_string())?;
    ensure!(
        p.ty > paths && p.ty < paths + 1.0,
        "p type code {} is not an application of paths",
        p.ty
    );

    // Populated cells are exactly the tree nodes; the rest are zero triples.
    let tree = proofscope::features::statement_tree(&c, entry).map_err(|e| e.to_string())?;
    let populated: BTreeSet<(usize, usize)> = tree
        .nodes
        .iter()
        .map(|n| (n.depth, n.level_index))
        .collect();
    for d in 0..m.depth {
        for l in 0..m.width {
            let cell = m.cell(d, l);
            if populated.contains(&(d, l)) {
                ensure!(
                    cell.term != 0.0 && cell.ty != 0.0,
                    "populated cell ({d},{l}) has a zero code"
                );
            } else {
                ensure!(
                    cell == Cell::EMPTY,
                    "cell ({d},{l}) should be empty, got {cell:?}"
                );
            }
        }
    }
    within(Duration::from_secs(1), start)
}

fn proof_table_structure() -> Check {
    let start = Instant::now();
    let c = corpus();
    let entry = c.entry("Paths.dpath_path_l").ok_or("missing entry")?;
    let enc = Encoder::initial(&c);
    let m = encode_proof(entry, &enc, &ProofOptions::default(), DEFAULT_GOALS)
        .map_err(|e| e.to_string())?;
    ensure!(m.rows.len() == 2, "{} rows", m.rows.len());
    let counts: Vec<u32> = m.rows.iter().map(|r| r.tactic_count).collect();
    ensure!(counts == [2, 1], "tactic counts {counts:?}");
    let subgoals: Vec<u32> = m.rows.iter().map(|r| r.subgoal_count).collect();
    ensure!(subgoals == [1, 0], "subgoal counts {subgoals:?}");
    let code = |n: &str| enc.const_code(n).map_err(|e| e.to_string());
    let want = [
        code("Overture.Equiv")?,
        code("Overture.paths")?,
        code("Overture.paths")?,
    ];
    ensure!(
        m.rows[0].top_symbol_codes == want,
        "symbols {:?}, want {want:?}",
        m.rows[0].top_symbol_codes
    );
    let prop = keyword_code(Keyword::Prop);
    ensure!(
        m.rows[1].arg_type_codes[0] == prop,
        "row 2 arg type {}",
        m.rows[1].arg_type_codes[0]
    );
    within(Duration::from_secs(1), start)
}

fn reachability(n: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<Vec<bool>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
    }
    (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut queue: VecDeque<usize> = adj[s].iter().copied().collect();
            while let Some(v) = queue.pop_front() {
                if !seen[v] {
                    seen[v] = true;
                    queue.extend(adj[v].iter().copied());
                }
            }
            seen
        })
        .collect()
}

fn transitive_reduction_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..1000 {
        let n = rng.random_range(1..=12);
        let density: f64 = rng.random_range(0.1..0.7);
        // Random labels so node order carries no topological hint.
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let mut edges = BTreeSet::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(density) {
                    edges.insert((perm[i], perm[j]));
                }
            }
        }
        let reduced = transitive_reduction(&edges)
            .map_err(|c| format!("case {case}: spurious cycle {c:?}"))?;
        let before = reachability(n, &edges);
        ensure!(
            reduced.is_subset(&edges),
            "case {case}: reduction invented edges"
        );
        ensure!(
            reachability(n, &reduced) == before,
            "case {case}: reachability changed"
        );
        for e in &reduced {
            let mut fewer = reduced.clone();
            fewer.remove(e);
            ensure!(
                reachability(n, &fewer) != before,
                "case {case}: edge {e:?} is redundant"
            );
        }
    }
    within(Duration::from_secs(30), start)
}

fn refinement_nesting() -> Check {
    let start = Instant::now();
    let c = corpus();
    ensure!(c.entries.len() == 20, "{} entries", c.entries.len());
    let items = statement_vectors(&c, &Encoder::initial(&c), &ClusterOptions::default())
        .map_err(|e| e.to_string())?;
    let ps = nested_partitions(&items, &[3, 5], false).map_err(|e| e.to_string())?;
    let (coarse, fine) = (&ps[0], &ps[1]);
    for f in &fine.clusters {
        let owners: BTreeSet<Option<usize>> =
            f.members.iter().map(|m| coarse.cluster_of(m)).collect();
        ensure!(
            owners.len() == 1 && !owners.contains(&None),
            "cluster {:?} spans {owners:?}",
            f.members
        );
    }
    within(Duration::from_secs(5), start)
}

fn family_recovery() -> Check {
    let start = Instant::now();
    let c = corpus();
    let opts = ClusterOptions::default();
    let cut = Cut::Granularity(5);
    ensure!(
        cut.requested_k(c.entries.len())
            .map_err(|e| e.to_string())?
            == 4,
        "g=5 does not give k=4"
    );
    let terms = recurrent_cluster(&c, cut, &opts).map_err(|e| e.to_string())?;
    ensure!(
        groups(&terms.partition) == expected(&STATEMENT_FAMILIES),
        "term clusters {:?}",
        terms.partition.member_lists()
    );
    let proofs =
        cluster_proofs(&c, &terms.encoder, Cut::Clusters(5), &opts).map_err(|e| e.to_string())?;
    ensure!(
        groups(&proofs) == expected(&PROOF_FAMILIES),
        "proof clusters {:?}",
        proofs.member_lists()
    );

    // Separation: every within-family distance is below every cross-family one.
    let family_of = |families: &[Vec<&str>], n: &str| families.iter().position(|f| f.contains(&n));
    let margin = |items: &[(String, Vec<f64>)], families: &[Vec<&str>]| -> (f64, f64) {
        let (mut intra, mut inter) = (0.0f64, f64::INFINITY);
        for (i, (a, va)) in items.iter().enumerate() {
            for (b, vb) in &items[i + 1..] {
                let d = va
                    .iter()
                    .zip(vb)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                if family_of(families, a) == family_of(families, b) {
                    intra = intra.max(d);
                } else {
                    inter = inter.min(d);
                }
            }
        }
        (intra, inter)
    };
    let sf: Vec<Vec<&str>> = STATEMENT_FAMILIES.iter().map(|f| f.to_vec()).collect();
    let pf: Vec<Vec<&str>> = PROOF_FAMILIES.iter().map(|f| f.to_vec()).collect();
    let s_items = statement_vectors(&c, &Encoder::initial(&c), &opts).map_err(|e| e.to_string())?;
    let (intra, inter) = margin(&s_items, &sf);
    ensure!(
        intra < inter,
        "statement families overlap: intra {intra} inter {inter}"
    );
    let p_items = proof_vectors(&c, &terms.encoder, &opts).map_err(|e| e.to_string())?;
    let (intra, inter) = margin(&p_items, &pf);
    ensure!(
        intra < inter,
        "proof families overlap: intra {intra} inter {inter}"
    );
    within(Duration::from_secs(10), start)
}

fn dissociation() -> Check {
    let c = corpus();
    let opts = ClusterOptions::default();
    let terms = recurrent_cluster(&c, Cut::Granularity(5), &opts).map_err(|e| e.to_string())?;
    let proofs =
        cluster_proofs(&c, &terms.encoder, Cut::Clusters(5), &opts).map_err(|e| e.to_string())?;
    let (t, p) = (&terms.partition, &proofs);
    let (l, lr, tlr) = (
        "Paths.dpath_path_l",
        "Paths.dpath_path_lr",
        "Paths.transport_paths_lr",
    );
    ensure!(
        same(p, l, tlr),
        "{l} and {tlr} should share a proof cluster"
    );
    ensure!(
        !same(t, l, tlr),
        "{l} and {tlr} should not share a term cluster"
    );
    ensure!(same(t, l, lr), "{l} and {lr} should share a term cluster");
    ensure!(
        !same(p, l, lr),
        "{l} and {lr} should not share a proof cluster"
    );
    Ok(())
}

/// Alpha-renames every entry: statement binders, the hypotheses they
/// introduce wherever proof steps mention them, and binders inside goals.
fn rename_entry_terms(c: &Corpus, rng: &mut ChaCha8Rng) -> Corpus {
    let mut out = c.clone();
    let salt: u32 = rng.random();
    let mut counter = rng.random_range(0..1000u32);
    let mut fresh = |x: &str| {
        counter += 1;
        format!("{x}_{salt:x}_{counter}")
    };
    for e in &mut out.entries {
        let hyps: BTreeMap<String, String> = e
            .statement
            .leading_binders()
            .iter()
            .map(|(x, _)| (x.to_string(), fresh(x)))
            .collect();
        e.statement = e
            .statement
            .rename_bound(&mut |x: &str| hyps.get(x).cloned().unwrap_or_else(|| fresh(x)));
        let rename = |t: &Term, fresh: &mut dyn FnMut(&str) -> String| {
            hyps.iter().fold(t.rename_bound(fresh), |t, (old, new)| {
                t.subst(old, &Term::var(new.as_str()))
            })
        };
        if let Some(steps) = &mut e.proof {
            for s in steps.iter_mut() {
                s.goal_before = rename(&s.goal_before, &mut fresh);
                s.args = s.args.iter().map(|a| rename(a, &mut fresh)).collect();
            }
        }
    }
    out
}

fn alpha_invariance() -> Check {
    let start = Instant::now();
    let c = corpus();
    let opts = ClusterOptions::default();
    let enc = Encoder::initial(&c);
    let base_s = statement_vectors(&c, &enc, &opts).map_err(|e| e.to_string())?;
    let base_p = proof_vectors(&c, &enc, &opts).map_err(|e| e.to_string())?;
    let cut = Cut::Granularity(5);
    let base_t = groups(&cluster(&base_s, cut, false).map_err(|e| e.to_string())?);
    let base_q = groups(&cluster(&base_p, Cut::Clusters(5), false).map_err(|e| e.to_string())?);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..100 {
        let r = rename_entry_terms(&c, &mut rng);
        ensure!(
            r.entries != c.entries,
            "round {round}: renaming changed nothing"
        );
        let s = statement_vectors(&r, &enc, &opts).map_err(|e| e.to_string())?;
        let p = proof_vectors(&r, &enc, &opts).map_err(|e| e.to_string())?;
        ensure!(s == base_s, "round {round}: statement vectors differ");
        ensure!(p == base_p, "round {round}: proof vectors differ");
        ensure!(
            groups(&cluster(&s, cut, false).map_err(|e| e.to_string())?) == base_t,
            "round {round}: term partition differs"
        );
        ensure!(
            groups(&cluster(&p, Cut::Clusters(5), false).map_err(|e| e.to_string())?) == base_q,
            "round {round}: proof partition differs"
        );
    }
    within(Duration::from_secs(10), start)
}

fn run_pipeline(dir: &Path, kind: &str) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_proofscope"))
        .args([
            "pipeline",
            "--kind",
            kind,
            "--granularity",
            "3",
            "--out-dir",
        ])
        .arg(dir)
        .status()
        .map_err(|e| e.to_string())?;
    ensure!(status.success(), "pipeline exited with {status}");
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let bytes = fs::read(&path).map_err(|e| e.to_string())?;
        files.insert(
            path.file_name().unwrap().to_string_lossy().into_owned(),
            bytes,
        );
    }
    Ok(files)
}

fn determinism() -> Check {
    for kind in ["terms", "proofs"] {
        let a = tempfile::tempdir().map_err(|e| e.to_string())?;
        let b = tempfile::tempdir().map_err(|e| e.to_string())?;
        let first = run_pipeline(a.path(), kind)?;
        let second = run_pipeline(b.path(), kind)?;
        let names: Vec<&str> = first.keys().map(String::as_str).collect();
        ensure!(
            names
                == [
                    "depgraph.dot",
                    "libgraph.dot",
                    "partition.json",
                    "report.txt"
                ],
            "unexpected outputs {names:?}"
        );
        ensure!(
            first == second,
            "{kind} pipeline outputs differ between runs"
        );
    }
    Ok(())
}

fn automaton_acceptance() -> Check {
    let c = corpus();
    let opts = ClusterOptions::default();
    let table = TacticTable::default();
    let terms = recurrent_cluster(&c, Cut::Granularity(5), &opts).map_err(|e| e.to_string())?;
    for cut in [Cut::Clusters(5), Cut::Granularity(1), Cut::Granularity(3)] {
        let proofs = cluster_proofs(&c, &terms.encoder, cut, &opts).map_err(|e| e.to_string())?;
        let automata = partition_automata(&proofs, &c, &table).map_err(|e| e.to_string())?;
        for (cl, a) in proofs.clusters.iter().zip(&automata) {
            let traces: Vec<&[TacticStep]> = cl
                .members
                .iter()
                .map(|m| c.entry(m).and_then(|e| e.proof.as_deref()).unwrap_or(&[]))
                .collect();
            for (m, t) in cl.members.iter().zip(&traces) {
                ensure!(
                    a.accepts(t, &table),
                    "{m} is rejected by its cluster automaton"
                );
            }
            let shapes: BTreeSet<Vec<StepLabel>> = traces
                .iter()
                .map(|t| t.iter().map(|s| StepLabel::of(s, &table)).collect())
                .collect();
            if shapes.len() == 1 {
                ensure!(
                    a.is_chain(),
                    "uniform cluster {:?} is not a chain",
                    cl.members
                );
                ensure!(
                    a.transitions.iter().all(|t| t.count == cl.members.len()),
                    "uniform cluster {:?} has partial transitions",
                    cl.members
                );
            } else {
                ensure!(
                    !a.is_chain(),
                    "mixed cluster {:?} collapsed to a chain",
                    cl.members
                );
            }
        }
    }
    Ok(())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("term tree structure of dpath_path_l", term_tree_structure),
        ("proof feature table of dpath_path_l", proof_table_structure),
        (
            "transitive reduction against a BFS oracle",
            transitive_reduction_oracle,
        ),
        ("nested partitions refine", refinement_nesting),
        (
            "planted statement and proof families recovered",
            family_recovery,
        ),
        ("term and proof similarity dissociate", dissociation),
        (
            "alpha-renaming leaves vectors and partitions unchanged",
            alpha_invariance,
        ),
        (
            "pipeline outputs are byte-identical across runs",
            determinism,
        ),
        (
            "cluster automata accept their member traces",
            automaton_acceptance,
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("criterion {}: PASS  {name} ({took:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({took:.2}s): {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Numeric term-feature tables.
//!
//! Cell `(depth, level_index)` of a [`TermFeatureMatrix`] holds the triple
//! `(term code, type code, parent level index)` of the tree node at those
//! coordinates; cells without a node are `(0, 0, 0)`.
//!
//! Code ranges are disjoint by category:
//!
//! | category        | codes                                              |
//! |-----------------|----------------------------------------------------|
//! | keyword type    | `-1`                                               |
//! | keywords        | `-2 ..= -8` (forall, fun, let, ->, Type, Prop, Set) |
//! | variables       | `1/(1+level)`, level ≥ 1, so in `(0, 1/2]`          |
//! | metavariables   | midpoints between consecutive variable codes        |
//! | primitives      | `[1, 9)`, fixed by declaration order                |
//! | entries         | `[10(c+1), 10(c+1)+1)` for cluster `c`              |
//!
//! Entry codes come from the latest clustering pass: members of one cluster
//! share the integer part and are spread over the fractional part by their
//! position in the cluster.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::corpus::{Corpus, CorpusEntry};
use crate::term::{Keyword, Term};
use crate::term_tree::{build_term_tree, LabelKey, TermTree, TreeError};

pub const DEFAULT_DEPTH: usize = 10;
pub const DEFAULT_WIDTH: usize = 10;

/// Code of the type slot of keyword nodes and of the root's parent slot.
pub const NO_TYPE: f64 = -1.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("term tree of `{source_name}` needs a {required_depth}x{required_width} grid but the grid is {depth}x{width}")]
    GridTooSmall {
        source_name: String,
        required_depth: usize,
        required_width: usize,
        depth: usize,
        width: usize,
    },
    #[error("encoder has no code for constant `{0}`")]
    MissingConstant(String),
}

pub fn keyword_code(kw: Keyword) -> f64 {
    match kw {
        Keyword::Forall => -2.0,
        Keyword::Lambda => -3.0,
        Keyword::Let => -4.0,
        Keyword::Arrow => -5.0,
        Keyword::Type => -6.0,
        Keyword::Prop => -7.0,
        Keyword::Set => -8.0,
    }
}

/// Code of the variable bound at 1-based `level`.
pub fn var_code(level: usize) -> f64 {
    1.0 / (1.0 + level as f64)
}

/// Code of the `i`-th metavariable: halfway between two variable codes.
pub fn meta_code(i: usize) -> f64 {
    (var_code(i + 1) + var_code(i + 2)) / 2.0
}

/// Maps labels to numbers. Immutable once built; one snapshot per clustering pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    const_codes: BTreeMap<String, f64>,
}

impl Encoder {
    /// Initial encoder: every entry in its own cluster, in definition order.
    pub fn initial(corpus: &Corpus) -> Encoder {
        let singletons: Vec<Vec<&str>> = corpus
            .entries
            .iter()
            .map(|e| vec![e.name.as_str()])
            .collect();
        Encoder::from_clusters(corpus, &singletons)
    }

    /// Encoder whose entry codes follow `clusters` (cluster id = position).
    pub fn from_clusters<S: AsRef<str>>(corpus: &Corpus, clusters: &[Vec<S>]) -> Encoder {
        let mut const_codes = BTreeMap::new();
        let n = corpus.primitives.len().max(1) as f64;
        for (i, p) in corpus.primitives.iter().enumerate() {
            const_codes.insert(p.name.clone(), 1.0 + 8.0 * i as f64 / n);
        }
        for (c, members) in clusters.iter().enumerate() {
            let base = 10.0 * (c + 1) as f64;
            let m = members.len() as f64;
            for (j, name) in members.iter().enumerate() {
                const_codes.insert(name.as_ref().to_string(), base + j as f64 / m);
            }
        }
        Encoder { const_codes }
    }

    pub fn const_code(&self, name: &str) -> Result<f64, FeatureError> {
        self.const_codes
            .get(name)
            .copied()
            .ok_or_else(|| FeatureError::MissingConstant(name.to_string()))
    }

    pub fn const_codes(&self) -> &BTreeMap<String, f64> {
        &self.const_codes
    }

    pub fn key_code(&self, key: &LabelKey) -> Result<f64, FeatureError> {
        Ok(match key {
            LabelKey::Gallina => NO_TYPE,
            LabelKey::Keyword(kw) => keyword_code(*kw),
            LabelKey::Var(level) => var_code(*level),
            LabelKey::Meta(i) => meta_code(*i),
            LabelKey::Const { name, args } => {
                self.const_code(name)? + application_adjustment(*args)
            }
            LabelKey::Unknown => 0.0,
        })
    }

    /// Code of the head symbol of `term`, variables resolved in `ctx` (names in binding order).
    pub fn head_code(&self, term: &Term, ctx: &[&str]) -> Result<f64, FeatureError> {
        Ok(match term.head() {
            Term::Var(x) => ctx
                .iter()
                .rposition(|n| n == x)
                .map_or(0.0, |i| var_code(i + 1)),
            Term::Const(c) => self.const_code(c)?,
            Term::Sort(s) => keyword_code((*s).into()),
            Term::Binder { kind, .. } => keyword_code((*kind).into()),
            Term::Arrow(..) => keyword_code(Keyword::Arrow),
            Term::App(..) => unreachable!("head() looks through applications"),
        })
    }

    /// Code of a whole term: its head code, adjusted by argument count for applications.
    pub fn term_code(&self, term: &Term, ctx: &[&str]) -> Result<f64, FeatureError> {
        let (_, args) = term.spine();
        Ok(self.head_code(term, ctx)? + application_adjustment(args.len()))
    }
}

/// Fractional shift `1/(1+n)` for a head applied to `n > 0` arguments.
pub fn application_adjustment(args: usize) -> f64 {
    if args == 0 {
        0.0
    } else {
        1.0 / (1.0 + args as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub term: f64,
    pub ty: f64,
    pub parent: i64,
}

impl Cell {
    pub const EMPTY: Cell = Cell {
        term: 0.0,
        ty: 0.0,
        parent: 0,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermFeatureMatrix {
    pub depth: usize,
    pub width: usize,
    /// Row-major, `depth * width` cells.
    pub cells: Vec<Cell>,
    pub source: String,
}

impl TermFeatureMatrix {
    pub fn cell(&self, depth: usize, level_index: usize) -> Cell {
        self.cells[depth * self.width + level_index]
    }

    /// Row-major flattening, triples in (term, type, parent) order.
    pub fn flatten(&self) -> Vec<f64> {
        self.cells
            .iter()
            .flat_map(|c| [c.term, c.ty, c.parent as f64])
            .collect()
    }

    /// CSV with one row per depth and one `term:type:parent` column per level index.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("depth");
        for j in 0..self.width {
            let _ = write!(out, ",li{j}");
        }
        out.push('\n');
        for i in 0..self.depth {
            let _ = write!(out, "td{i}");
            for j in 0..self.width {
                let c = self.cell(i, j);
                let _ = write!(out, ",{}:{}:{}", c.term, c.ty, c.parent);
            }
            out.push('\n');
        }
        out
    }
}

/// Encodes a term tree into a `depth x width` grid.
pub fn encode_tree(
    tree: &TermTree,
    encoder: &Encoder,
    depth: usize,
    width: usize,
    source: &str,
) -> Result<TermFeatureMatrix, FeatureError> {
    if tree.depth_count > depth || tree.max_width > width {
        return Err(FeatureError::GridTooSmall {
            source_name: source.to_string(),
            required_depth: tree.depth_count,
            required_width: tree.max_width,
            depth,
            width,
        });
    }
    let mut cells = vec![Cell::EMPTY; depth * width];
    for node in &tree.nodes {
        let parent = match node.parent {
            Some(p) => tree.nodes[p].level_index as i64,
            None => -1,
        };
        cells[node.depth * width + node.level_index] = Cell {
            term: encoder.key_code(&node.term_label.key)?,
            ty: encoder.key_code(&node.type_label.key)?,
            parent,
        };
    }
    Ok(TermFeatureMatrix {
        depth,
        width,
        cells,
        source: source.to_string(),
    })
}

/// Term tree of an entry's statement.
pub fn statement_tree(corpus: &Corpus, entry: &CorpusEntry) -> Result<TermTree, FeatureError> {
    Ok(build_term_tree(&entry.statement, &[], corpus)?)
}

/// Feature matrix of an entry's statement.
pub fn encode_statement(
    corpus: &Corpus,
    entry: &CorpusEntry,
    encoder: &Encoder,
    depth: usize,
    width: usize,
) -> Result<TermFeatureMatrix, FeatureError> {
    let tree = statement_tree(corpus, entry)?;
    encode_tree(&tree, encoder, depth, width, &entry.name)
}

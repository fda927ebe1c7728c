//! Term trees: a rooted ordered tree per term whose nodes carry a term label,
//! a type label, a depth and a level index (left-to-right position within
//! the depth).
//!
//! Construction rules:
//! - a maximal run of binders of one kind becomes a single keyword node whose
//!   children are the bound variables followed by the body subtree;
//! - an application becomes a node for its head with one child per argument;
//! - variables, constants and sorts are leaves;
//! - an arrow is a keyword node with the domain and codomain as children.
//!
//! Constants are labelled partially applied: the leading `forall`s of their
//! declared type that bind a sort are implicit parameters and render as
//! metavariables `?X`, `?Y`, ... numbered in level order across the tree.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::corpus::Corpus;
use crate::dot;
use crate::term::{short_name, Keyword, Term};

/// Type label of keyword nodes, which carry no separate type.
pub const GALLINA_SENTINEL: &str = "#Gallina";

/// What a label encodes; the feature encoder maps keys to numbers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LabelKey {
    /// Type slot of a keyword node.
    Gallina,
    Keyword(Keyword),
    /// Bound variable, by 1-based binding level (de Bruijn level).
    Var(usize),
    /// Metavariable, by 0-based level-order occurrence.
    Meta(usize),
    /// Constant `name`, applied to `args` explicit arguments.
    Const {
        name: String,
        args: usize,
    },
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Label {
    pub text: String,
    pub key: LabelKey,
}

impl Label {
    fn new(text: impl Into<String>, key: LabelKey) -> Label {
        Label {
            text: text.into(),
            key,
        }
    }

    fn gallina() -> Label {
        Label::new(GALLINA_SENTINEL, LabelKey::Gallina)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermTreeNode {
    pub term_label: Label,
    pub type_label: Label,
    pub depth: usize,
    pub level_index: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Subterm the node was built from; a bound variable's origin is the variable itself.
    pub origin: Term,
}

impl TermTreeNode {
    pub fn is_keyword(&self) -> bool {
        matches!(self.term_label.key, LabelKey::Keyword(_))
            && self.type_label.key == LabelKey::Gallina
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermTree {
    /// Nodes in level order; index 0 is the root.
    pub nodes: Vec<TermTreeNode>,
    pub depth_count: usize,
    pub max_width: usize,
}

impl TermTree {
    pub fn root(&self) -> &TermTreeNode {
        &self.nodes[0]
    }

    pub fn node_at(&self, depth: usize, level_index: usize) -> Option<&TermTreeNode> {
        self.nodes
            .iter()
            .find(|n| n.depth == depth && n.level_index == level_index)
    }

    /// Number of nodes at each depth.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![0; self.depth_count];
        for n in &self.nodes {
            w[n.depth] += 1;
        }
        w
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
}

/// Source of declared types for constants.
pub trait Signature {
    fn const_type(&self, name: &str) -> Option<&Term>;
}

impl Signature for Corpus {
    fn const_type(&self, name: &str) -> Option<&Term> {
        self.symbol(name).map(|s| s.ty())
    }
}

impl Signature for HashMap<String, Term> {
    fn const_type(&self, name: &str) -> Option<&Term> {
        self.get(name)
    }
}

/// Splits a constant's declared type into implicit sort-typed parameters and the rest.
pub fn implicit_params(ty: &Term) -> (Vec<&str>, &Term) {
    let mut params = Vec::new();
    let mut t = ty;
    while let Term::Binder {
        kind: crate::term::BinderKind::Forall,
        var,
        ty: bty,
        body,
    } = t
    {
        if !matches!(**bty, Term::Sort(_)) {
            break;
        }
        params.push(var.as_str());
        t = body;
    }
    (params, t)
}

/// Metavariable name for the `i`-th placeholder of a tree.
pub fn meta_name(i: usize) -> String {
    const NAMES: [&str; 6] = ["X", "Y", "Z", "W", "U", "V"];
    match NAMES.get(i) {
        Some(n) => format!("?{n}"),
        None => format!("?X{i}"),
    }
}

// Label parts that depend on the level-order metavariable counter.
enum Pending {
    Ready(Label, Label),
    Const { name: String, ty: Term },
}

struct Proto {
    pending: Pending,
    children: Vec<usize>,
    origin: Term,
}

struct Builder<'a, S: Signature + ?Sized> {
    sig: &'a S,
    env: Vec<(String, Term)>,
    protos: Vec<Proto>,
}

impl<S: Signature + ?Sized> Builder<'_, S> {
    fn level_of(&self, x: &str) -> Option<usize> {
        self.env.iter().rposition(|(n, _)| n == x).map(|i| i + 1)
    }

    fn var_type(&self, x: &str) -> Result<&Term, TreeError> {
        self.env
            .iter()
            .rev()
            .find(|(n, _)| n == x)
            .map(|(_, t)| t)
            .ok_or_else(|| TreeError::UnboundVariable(x.to_string()))
    }

    fn push(&mut self, pending: Pending, origin: Term) -> usize {
        self.protos.push(Proto {
            pending,
            children: Vec::new(),
            origin,
        });
        self.protos.len() - 1
    }

    fn type_label(&self, ty: &Term) -> Label {
        Label::new(ty.to_string(), type_key(ty, &self.env))
    }

    fn build(&mut self, term: &Term) -> Result<usize, TreeError> {
        match term {
            Term::Binder { kind, .. } => {
                let kw = Keyword::from(*kind);
                let id = self.push(
                    Pending::Ready(
                        Label::new(kw.label(), LabelKey::Keyword(kw)),
                        Label::gallina(),
                    ),
                    term.clone(),
                );
                let mut t = term;
                let mut pushed = 0;
                while let Term::Binder {
                    kind: k,
                    var,
                    ty,
                    body,
                } = t
                {
                    if k != kind {
                        break;
                    }
                    for fv in ty.free_vars(&[]) {
                        self.level_of(&fv).ok_or(TreeError::UnboundVariable(fv))?;
                    }
                    let level = self.env.len() + 1;
                    let tl = self.type_label(ty);
                    let child = self.push(
                        Pending::Ready(Label::new(var.clone(), LabelKey::Var(level)), tl),
                        Term::Var(var.clone()),
                    );
                    self.protos[id].children.push(child);
                    self.env.push((var.clone(), (**ty).clone()));
                    pushed += 1;
                    t = body;
                }
                let body = self.build(t);
                self.env.truncate(self.env.len() - pushed);
                let body = body?;
                self.protos[id].children.push(body);
                Ok(id)
            }
            Term::App(..) => {
                let (head, args) = term.spine();
                let id = match head {
                    Term::Const(c) => self.const_node(c, term)?,
                    Term::Var(x) => self.var_node(x, term)?,
                    other => {
                        let key = root_keyword(other);
                        self.push(
                            Pending::Ready(Label::new(other.to_string(), key), Label::gallina()),
                            term.clone(),
                        )
                    }
                };
                for a in args {
                    let c = self.build(a)?;
                    self.protos[id].children.push(c);
                }
                Ok(id)
            }
            Term::Var(x) => self.var_node(x, term),
            Term::Const(c) => self.const_node(c, term),
            Term::Sort(s) => {
                let kw = Keyword::from(*s);
                Ok(self.push(
                    Pending::Ready(
                        Label::new(kw.label(), LabelKey::Keyword(kw)),
                        Label::gallina(),
                    ),
                    term.clone(),
                ))
            }
            Term::Arrow(a, b) => {
                let id = self.push(
                    Pending::Ready(
                        Label::new(Keyword::Arrow.label(), LabelKey::Keyword(Keyword::Arrow)),
                        Label::gallina(),
                    ),
                    term.clone(),
                );
                let ca = self.build(a)?;
                let cb = self.build(b)?;
                self.protos[id].children.extend([ca, cb]);
                Ok(id)
            }
        }
    }

    fn var_node(&mut self, x: &str, origin: &Term) -> Result<usize, TreeError> {
        let level = self
            .level_of(x)
            .ok_or_else(|| TreeError::UnboundVariable(x.to_string()))?;
        let tl = self.type_label(&self.var_type(x)?.clone());
        Ok(self.push(
            Pending::Ready(Label::new(x, LabelKey::Var(level)), tl),
            origin.clone(),
        ))
    }

    fn const_node(&mut self, c: &str, origin: &Term) -> Result<usize, TreeError> {
        let ty = self
            .sig
            .const_type(c)
            .ok_or_else(|| TreeError::UnknownConstant(c.to_string()))?
            .clone();
        Ok(self.push(
            Pending::Const {
                name: c.to_string(),
                ty,
            },
            origin.clone(),
        ))
    }
}

fn root_keyword(t: &Term) -> LabelKey {
    match t {
        Term::Binder { kind, .. } => LabelKey::Keyword(Keyword::from(*kind)),
        Term::Arrow(..) => LabelKey::Keyword(Keyword::Arrow),
        Term::Sort(s) => LabelKey::Keyword(Keyword::from(*s)),
        _ => LabelKey::Unknown,
    }
}

/// Key of a type label: determined by the root of the type.
pub fn type_key(ty: &Term, env: &[(String, Term)]) -> LabelKey {
    let var_key = |x: &str| match env.iter().rposition(|(n, _)| n == x) {
        Some(i) => LabelKey::Var(i + 1),
        None => LabelKey::Unknown,
    };
    match ty {
        Term::App(..) => {
            let (head, args) = ty.spine();
            match head {
                Term::Const(c) => LabelKey::Const {
                    name: c.clone(),
                    args: args.len(),
                },
                Term::Var(x) => var_key(x),
                other => root_keyword(other),
            }
        }
        Term::Const(c) => LabelKey::Const {
            name: c.clone(),
            args: 0,
        },
        Term::Var(x) => var_key(x),
        other => root_keyword(other),
    }
}

/// Builds the term tree of `term` with free variables typed by `ctx`.
pub fn build_term_tree<S: Signature + ?Sized>(
    term: &Term,
    ctx: &[(String, Term)],
    sig: &S,
) -> Result<TermTree, TreeError> {
    let mut b = Builder {
        sig,
        env: ctx.to_vec(),
        protos: Vec::new(),
    };
    let root = b.build(term)?;

    // Level order, with depths.
    let mut order = vec![(root, 0usize, None::<usize>)];
    let mut head = 0;
    while head < order.len() {
        let (id, depth, _) = order[head];
        let pos = head;
        for &c in &b.protos[id].children {
            order.push((c, depth + 1, Some(pos)));
        }
        head += 1;
    }

    let depth_count = order.last().map_or(0, |o| o.1 + 1);
    let mut widths = vec![0usize; depth_count];
    let mut nodes = Vec::with_capacity(order.len());
    let mut next_meta = 0;
    let mut protos: Vec<Option<Proto>> = b.protos.into_iter().map(Some).collect();
    for &(id, depth, parent) in &order {
        let proto = protos[id].take().expect("each node visited once");
        let level_index = widths[depth];
        widths[depth] += 1;
        let (term_label, type_label) = match proto.pending {
            Pending::Ready(t, ty) => (t, ty),
            Pending::Const { name, ty } => const_labels(&name, &ty, ctx, &mut next_meta),
        };
        nodes.push(TermTreeNode {
            term_label,
            type_label,
            depth,
            level_index,
            parent,
            children: Vec::new(),
            origin: proto.origin,
        });
    }
    for i in 0..nodes.len() {
        if let Some(p) = nodes[i].parent {
            nodes[p].children.push(i);
        }
    }
    let max_width = widths.iter().copied().max().unwrap_or(0);
    Ok(TermTree {
        nodes,
        depth_count,
        max_width,
    })
}

fn const_labels(
    name: &str,
    ty: &Term,
    ctx: &[(String, Term)],
    next_meta: &mut usize,
) -> (Label, Label) {
    let (params, rest) = implicit_params(ty);
    let mut text = short_name(name).to_string();
    let mut inst = rest.clone();
    let first = *next_meta;
    for p in &params {
        let m = meta_name(*next_meta);
        *next_meta += 1;
        text.push(' ');
        text.push_str(&m);
        inst = inst.subst(p, &Term::Var(m));
    }
    let key = match rest.head() {
        Term::Var(x) if params.contains(&x.as_str()) => {
            LabelKey::Meta(first + params.iter().position(|p| p == x).unwrap_or(0))
        }
        _ => type_key(rest, ctx),
    };
    (
        Label::new(
            text,
            LabelKey::Const {
                name: name.to_string(),
                args: 0,
            },
        ),
        Label::new(inst.to_string(), key),
    )
}

/// Graphviz rendering of a term tree; nodes are labelled `term : type`
/// with their `(depth, level index)` coordinates.
pub fn term_tree_dot(tree: &TermTree, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", dot::id(name));
    let _ = writeln!(out, "  node [shape=box, fontname=\"monospace\"];");
    for (i, n) in tree.nodes.iter().enumerate() {
        let label = format!(
            "{} : {}\n({},{})",
            n.term_label.text, n.type_label.text, n.depth, n.level_index
        );
        let _ = writeln!(out, "  n{i} [label={}];", dot::quote(&label));
    }
    for (i, n) in tree.nodes.iter().enumerate() {
        for c in &n.children {
            let _ = writeln!(out, "  n{i} -> n{c};");
        }
    }
    out.push_str("}\n");
    out
}

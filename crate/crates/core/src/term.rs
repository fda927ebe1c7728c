//! The minimal term language shared by statements, goals and tactic arguments.

use std::fmt;

/// Sorts of the term language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Type,
    Prop,
    Set,
}

impl Sort {
    pub fn as_str(self) -> &'static str {
        match self {
            Sort::Type => "Type",
            Sort::Prop => "Prop",
            Sort::Set => "Set",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Sort> {
        match s {
            "Type" => Some(Sort::Type),
            "Prop" => Some(Sort::Prop),
            "Set" => Some(Sort::Set),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinderKind {
    Forall,
    Lambda,
    Let,
}

impl BinderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BinderKind::Forall => "forall",
            BinderKind::Lambda => "lambda",
            BinderKind::Let => "let",
        }
    }

    pub fn from_keyword(s: &str) -> Option<BinderKind> {
        match s {
            "forall" => Some(BinderKind::Forall),
            "lambda" => Some(BinderKind::Lambda),
            "let" => Some(BinderKind::Let),
            _ => None,
        }
    }
}

/// Gallina-level keywords. Each one has a fixed negative feature code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Keyword {
    Forall,
    Lambda,
    Let,
    Arrow,
    Type,
    Prop,
    Set,
}

impl Keyword {
    pub const ALL: [Keyword; 7] = [
        Keyword::Forall,
        Keyword::Lambda,
        Keyword::Let,
        Keyword::Arrow,
        Keyword::Type,
        Keyword::Prop,
        Keyword::Set,
    ];

    /// Label used for keyword nodes of a term tree.
    pub fn label(self) -> &'static str {
        match self {
            Keyword::Forall => "forall",
            Keyword::Lambda => "fun",
            Keyword::Let => "let",
            Keyword::Arrow => "->",
            Keyword::Type => "Type",
            Keyword::Prop => "Prop",
            Keyword::Set => "Set",
        }
    }
}

impl From<BinderKind> for Keyword {
    fn from(kind: BinderKind) -> Self {
        match kind {
            BinderKind::Forall => Keyword::Forall,
            BinderKind::Lambda => Keyword::Lambda,
            BinderKind::Let => Keyword::Let,
        }
    }
}

impl From<Sort> for Keyword {
    fn from(sort: Sort) -> Self {
        match sort {
            Sort::Type => Keyword::Type,
            Sort::Prop => Keyword::Prop,
            Sort::Set => Keyword::Set,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    /// Reference to a corpus entry or primitive by qualified name.
    Const(String),
    Sort(Sort),
    /// Application; always carries at least one argument.
    App(Box<Term>, Vec<Term>),
    Binder {
        kind: BinderKind,
        var: String,
        ty: Box<Term>,
        body: Box<Term>,
    },
    Arrow(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Term {
        Term::Const(name.into())
    }

    pub fn app(head: Term, args: Vec<Term>) -> Term {
        Term::App(Box::new(head), args)
    }

    pub fn binder(kind: BinderKind, var: impl Into<String>, ty: Term, body: Term) -> Term {
        Term::Binder {
            kind,
            var: var.into(),
            ty: Box::new(ty),
            body: Box::new(body),
        }
    }

    pub fn forall(var: impl Into<String>, ty: Term, body: Term) -> Term {
        Term::binder(BinderKind::Forall, var, ty, body)
    }

    pub fn lambda(var: impl Into<String>, ty: Term, body: Term) -> Term {
        Term::binder(BinderKind::Lambda, var, ty, body)
    }

    pub fn arrow(from: Term, to: Term) -> Term {
        Term::Arrow(Box::new(from), Box::new(to))
    }

    /// Head of an application spine, looking through nested applications.
    pub fn head(&self) -> &Term {
        match self {
            Term::App(h, _) => h.head(),
            t => t,
        }
    }

    /// Head and explicit arguments, with nested applications flattened.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        match self {
            Term::App(h, args) => {
                let (head, mut all) = h.spine();
                all.extend(args.iter());
                (head, all)
            }
            t => (t, Vec::new()),
        }
    }

    /// Immediate subterms in left-to-right order.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::Const(_) | Term::Sort(_) => Vec::new(),
            Term::App(h, args) => std::iter::once(h.as_ref()).chain(args.iter()).collect(),
            Term::Binder { ty, body, .. } => vec![ty.as_ref(), body.as_ref()],
            Term::Arrow(a, b) => vec![a.as_ref(), b.as_ref()],
        }
    }

    /// Every constant name in the term, in left-to-right pre-order.
    pub fn constants(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_constants(&mut out);
        out
    }

    fn collect_constants<'a>(&'a self, out: &mut Vec<&'a str>) {
        if let Term::Const(name) = self {
            out.push(name);
        }
        for c in self.children() {
            c.collect_constants(out);
        }
    }

    /// Free variables not bound by `bound` or by binders inside the term.
    pub fn free_vars(&self, bound: &[&str]) -> Vec<String> {
        let mut scope: Vec<&str> = bound.to_vec();
        let mut out = Vec::new();
        self.collect_free(&mut scope, &mut out);
        out
    }

    fn collect_free<'a>(&'a self, scope: &mut Vec<&'a str>, out: &mut Vec<String>) {
        match self {
            Term::Var(x) => {
                if !scope.contains(&x.as_str()) && !out.contains(x) {
                    out.push(x.clone());
                }
            }
            Term::Const(_) | Term::Sort(_) => {}
            Term::App(h, args) => {
                h.collect_free(scope, out);
                for a in args {
                    a.collect_free(scope, out);
                }
            }
            Term::Binder { var, ty, body, .. } => {
                ty.collect_free(scope, out);
                scope.push(var);
                body.collect_free(scope, out);
                scope.pop();
            }
            Term::Arrow(a, b) => {
                a.collect_free(scope, out);
                b.collect_free(scope, out);
            }
        }
    }

    /// Replaces free occurrences of `name` by `with`. `with` must be closed.
    pub fn subst(&self, name: &str, with: &Term) -> Term {
        match self {
            Term::Var(x) if x == name => with.clone(),
            Term::Var(_) | Term::Const(_) | Term::Sort(_) => self.clone(),
            Term::App(h, args) => Term::App(
                Box::new(h.subst(name, with)),
                args.iter().map(|a| a.subst(name, with)).collect(),
            ),
            Term::Binder {
                kind,
                var,
                ty,
                body,
            } => Term::Binder {
                kind: *kind,
                var: var.clone(),
                ty: Box::new(ty.subst(name, with)),
                body: if var == name {
                    body.clone()
                } else {
                    Box::new(body.subst(name, with))
                },
            },
            Term::Arrow(a, b) => Term::arrow(a.subst(name, with), b.subst(name, with)),
        }
    }

    /// Leading binder chain `(x1 : T1) ... (xn : Tn)` regardless of binder kind.
    pub fn leading_binders(&self) -> Vec<(&str, &Term)> {
        let mut out = Vec::new();
        let mut t = self;
        while let Term::Binder { var, ty, body, .. } = t {
            out.push((var.as_str(), ty.as_ref()));
            t = body;
        }
        out
    }

    /// Applies `f` to every bound variable name, consistently renaming uses.
    pub fn rename_bound(&self, f: &mut dyn FnMut(&str) -> String) -> Term {
        self.rename_in(&mut Vec::new(), f)
    }

    fn rename_in(
        &self,
        env: &mut Vec<(String, String)>,
        f: &mut dyn FnMut(&str) -> String,
    ) -> Term {
        match self {
            Term::Var(x) => match env.iter().rev().find(|(old, _)| old == x) {
                Some((_, new)) => Term::Var(new.clone()),
                None => self.clone(),
            },
            Term::Const(_) | Term::Sort(_) => self.clone(),
            Term::App(h, args) => Term::App(
                Box::new(h.rename_in(env, f)),
                args.iter().map(|a| a.rename_in(env, f)).collect(),
            ),
            Term::Binder {
                kind,
                var,
                ty,
                body,
            } => {
                let ty = ty.rename_in(env, f);
                let fresh = f(var);
                env.push((var.clone(), fresh.clone()));
                let body = body.rename_in(env, f);
                env.pop();
                Term::binder(*kind, fresh, ty, body)
            }
            Term::Arrow(a, b) => Term::arrow(a.rename_in(env, f), b.rename_in(env, f)),
        }
    }

    /// Equality up to renaming of bound variables. Free variables must match by name.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        alpha_eq_in(self, other, &mut Vec::new(), &mut Vec::new())
    }
}

fn alpha_eq_in<'a>(
    a: &'a Term,
    b: &'a Term,
    left: &mut Vec<&'a str>,
    right: &mut Vec<&'a str>,
) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            let i = left.iter().rposition(|v| v == x);
            let j = right.iter().rposition(|v| v == y);
            match (i, j) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (Term::Const(x), Term::Const(y)) => x == y,
        (Term::Sort(x), Term::Sort(y)) => x == y,
        (Term::App(h1, a1), Term::App(h2, a2)) => {
            a1.len() == a2.len()
                && alpha_eq_in(h1, h2, left, right)
                && a1
                    .iter()
                    .zip(a2)
                    .all(|(x, y)| alpha_eq_in(x, y, left, right))
        }
        (
            Term::Binder {
                kind: k1,
                var: v1,
                ty: t1,
                body: b1,
            },
            Term::Binder {
                kind: k2,
                var: v2,
                ty: t2,
                body: b2,
            },
        ) => {
            if k1 != k2 || !alpha_eq_in(t1, t2, left, right) {
                return false;
            }
            left.push(v1);
            right.push(v2);
            let eq = alpha_eq_in(b1, b2, left, right);
            left.pop();
            right.pop();
            eq
        }
        (Term::Arrow(a1, b1), Term::Arrow(a2, b2)) => {
            alpha_eq_in(a1, a2, left, right) && alpha_eq_in(b1, b2, left, right)
        }
        _ => false,
    }
}

/// Last segment of a qualified name.
pub fn short_name(qualified: &str) -> &str {
    qualified.rsplit('.').next().unwrap_or(qualified)
}

/// Library part of a qualified name; unqualified names live in `Top`.
pub fn library_of(qualified: &str) -> &str {
    match qualified.rfind('.') {
        Some(i) => &qualified[..i],
        None => "Top",
    }
}

/// Canonical human-readable rendering: minimal parentheses, single spaces,
/// constants by short name.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::Const(c) => f.write_str(short_name(c)),
            Term::Sort(s) => f.write_str(s.as_str()),
            Term::App(..) => {
                let (head, args) = self.spine();
                write_atomic(f, head)?;
                for a in args {
                    f.write_str(" ")?;
                    write_atomic(f, a)?;
                }
                Ok(())
            }
            Term::Binder { kind, .. } => {
                let mut t = self;
                let opener = match kind {
                    BinderKind::Forall => "forall",
                    BinderKind::Lambda => "fun",
                    BinderKind::Let => "let",
                };
                f.write_str(opener)?;
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
                    write!(f, " ({var} : {ty})")?;
                    t = body;
                }
                let sep = match kind {
                    BinderKind::Forall => ",",
                    BinderKind::Lambda => " =>",
                    BinderKind::Let => " in",
                };
                write!(f, "{sep} {t}")
            }
            Term::Arrow(a, b) => {
                if matches!(**a, Term::Arrow(..) | Term::Binder { .. }) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " -> {b}")
            }
        }
    }
}

fn write_atomic(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    match t {
        Term::Var(_) | Term::Const(_) | Term::Sort(_) => write!(f, "{t}"),
        _ => write!(f, "({t})"),
    }
}

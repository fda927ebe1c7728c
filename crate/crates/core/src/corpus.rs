//! Corpus data model and the line-oriented s-expression corpus format.
//!
//! A corpus file holds `library` and `primitive` declarations followed by
//! `entry` forms in definition order:
//!
//! ```text
//! (library Paths (imports Overture))
//! (primitive inductive Overture.paths
//!   (forall (A (sort Type)) (arrow (var A) (arrow (var A) (sort Type)))))
//! (entry theorem Paths.path_refl
//!   (statement (forall (A (sort Type)) (forall (x (var A))
//!     (app (const Overture.paths) (var x) (var x)))))
//!   (proof (step reflexivity (args) (goal (app (const Overture.paths) (var x) (var x))) (subgoals 0)))
//!   (deps Overture.paths))
//! ```
//!
//! An entry's library is the prefix of its qualified name; unqualified names
//! belong to the implicit `Top` library. The full grammar is in `docs/corpus-format.md`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::sexp::{self, Pos, SExp, SyntaxError};
use crate::term::{library_of, BinderKind, Sort, Term};

/// Node taxonomy of dependency graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntryKind {
    Theorem,
    Definition,
    /// Inductive types and classes.
    Inductive,
    Constructor,
    /// Constructors nested inside constructors of classes.
    InnerConstructor,
}

impl EntryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntryKind::Theorem => "theorem",
            EntryKind::Definition => "definition",
            EntryKind::Inductive => "inductive",
            EntryKind::Constructor => "constructor",
            EntryKind::InnerConstructor => "inner-constructor",
        }
    }

    pub fn parse(s: &str) -> Option<EntryKind> {
        Some(match s {
            "theorem" => EntryKind::Theorem,
            "definition" => EntryKind::Definition,
            "inductive" => EntryKind::Inductive,
            "constructor" => EntryKind::Constructor,
            "inner-constructor" => EntryKind::InnerConstructor,
            _ => return None,
        })
    }
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TacticStep {
    pub tactic: String,
    pub args: Vec<Term>,
    pub goal_before: Term,
    pub subgoals_after: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub name: String,
    pub kind: EntryKind,
    pub library: String,
    pub statement: Term,
    pub proof: Option<Vec<TacticStep>>,
    pub declared_deps: Option<Vec<String>>,
}

impl CorpusEntry {
    /// Variables a proof may mention: the statement's leading binders.
    pub fn hypotheses(&self) -> Vec<(&str, &Term)> {
        self.statement.leading_binders()
    }

    pub fn has_proof(&self) -> bool {
        self.proof.as_ref().is_some_and(|p| !p.is_empty())
    }
}

/// A base constant the corpus takes as given. Primitives carry fixed feature
/// codes and are never clustered.
#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pub name: String,
    pub kind: EntryKind,
    pub ty: Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Library {
    pub name: String,
    pub imports: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub libraries: Vec<Library>,
    pub primitives: Vec<Primitive>,
    pub entries: Vec<CorpusEntry>,
}

/// A constant known to the corpus: either a primitive or an entry.
#[derive(Debug, Clone, Copy)]
pub enum Symbol<'a> {
    Primitive(usize, &'a Primitive),
    Entry(usize, &'a CorpusEntry),
}

impl<'a> Symbol<'a> {
    pub fn name(&self) -> &'a str {
        match self {
            Symbol::Primitive(_, p) => &p.name,
            Symbol::Entry(_, e) => &e.name,
        }
    }

    pub fn kind(&self) -> EntryKind {
        match self {
            Symbol::Primitive(_, p) => p.kind,
            Symbol::Entry(_, e) => e.kind,
        }
    }

    /// Declared type: a primitive's type or an entry's statement.
    pub fn ty(&self) -> &'a Term {
        match self {
            Symbol::Primitive(_, p) => &p.ty,
            Symbol::Entry(_, e) => &e.statement,
        }
    }
}

impl Corpus {
    pub fn entry(&self, name: &str) -> Option<&CorpusEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn symbol(&self, name: &str) -> Option<Symbol<'_>> {
        if let Some((i, p)) = self
            .primitives
            .iter()
            .enumerate()
            .find(|(_, p)| p.name == name)
        {
            return Some(Symbol::Primitive(i, p));
        }
        self.entries
            .iter()
            .enumerate()
            .find(|(_, e)| e.name == name)
            .map(|(i, e)| Symbol::Entry(i, e))
    }

    pub fn library_names(&self) -> Vec<&str> {
        self.libraries.iter().map(|l| l.name.as_str()).collect()
    }
}

/// Validation rule violated by a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    InvalidName,
    DuplicateName,
    UnknownLibrary,
    LibraryMismatch,
    UnresolvedReference,
    ForwardReference,
    TheoremWithoutProof,
    UnboundVariable,
    EmptyApplication,
    EmptyTactic,
}

impl Rule {
    pub fn message(self) -> &'static str {
        match self {
            Rule::InvalidName => "invalid name",
            Rule::DuplicateName => "duplicate name",
            Rule::UnknownLibrary => "unknown library",
            Rule::LibraryMismatch => "library does not match qualified name",
            Rule::UnresolvedReference => "unresolved reference",
            Rule::ForwardReference => "forward reference",
            Rule::TheoremWithoutProof => "theorem without proof",
            Rule::UnboundVariable => "unbound variable",
            Rule::EmptyApplication => "application without arguments",
            Rule::EmptyTactic => "empty tactic name",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Entry, primitive or library the violation belongs to.
    pub entry: String,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.detail.is_empty() {
            write!(f, "{}: {}", self.entry, self.rule)
        } else {
            write!(f, "{}: {}: {}", self.entry, self.rule, self.detail)
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{}{}", .0[0], if .0.len() > 1 { format!(" (and {} more)", .0.len() - 1) } else { String::new() })]
    Invalid(Vec<Diagnostic>),
}

impl CorpusError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            CorpusError::Invalid(d) => d,
            CorpusError::Syntax(_) => &[],
        }
    }
}

/// Parses and validates a corpus file.
pub fn parse_corpus(text: &str) -> Result<Corpus, CorpusError> {
    let corpus = parse_unvalidated(text)?;
    let diagnostics = validate_corpus(&corpus);
    if diagnostics.is_empty() {
        Ok(corpus)
    } else {
        Err(CorpusError::Invalid(diagnostics))
    }
}

/// Syntax-only parse; the result may violate corpus invariants.
pub fn parse_unvalidated(text: &str) -> Result<Corpus, SyntaxError> {
    let forms = sexp::read_all(text)?;
    let mut corpus = Corpus::default();
    let mut seen_entry = false;
    for form in &forms {
        let (head, items, pos) = form_parts(form)?;
        match head {
            "library" if !seen_entry => corpus.libraries.push(parse_library(items, pos)?),
            "primitive" if !seen_entry => corpus.primitives.push(parse_primitive(items, pos)?),
            "entry" => {
                seen_entry = true;
                corpus.entries.push(parse_entry(items, pos)?);
            }
            "library" | "primitive" => {
                return Err(SyntaxError::new(
                    pos,
                    "`entry` (declarations must precede entries)",
                    format!("`{head}`"),
                ))
            }
            other => {
                return Err(SyntaxError::new(
                    pos,
                    "`library`, `primitive` or `entry`",
                    format!("`{other}`"),
                ))
            }
        }
    }
    Ok(corpus)
}

fn form_parts(form: &SExp) -> Result<(&str, &[SExp], Pos), SyntaxError> {
    match form {
        SExp::List(items, pos) => match items.first() {
            Some(SExp::Atom(h, _)) => Ok((h.as_str(), &items[1..], *pos)),
            Some(other) => Err(SyntaxError::new(other.pos(), "keyword", other.describe())),
            None => Err(SyntaxError::new(*pos, "keyword", "`()`")),
        },
        SExp::Atom(..) => Err(SyntaxError::new(form.pos(), "`(`", form.describe())),
    }
}

fn atom<'a>(items: &'a [SExp], i: usize, pos: Pos, what: &str) -> Result<&'a str, SyntaxError> {
    match items.get(i) {
        Some(SExp::Atom(a, _)) => Ok(a),
        Some(other) => Err(SyntaxError::new(other.pos(), what, other.describe())),
        None => Err(SyntaxError::new(pos, what, "`)`")),
    }
}

fn ident(items: &[SExp], i: usize, pos: Pos, qualified: bool) -> Result<&str, SyntaxError> {
    let what = if qualified {
        "qualified identifier"
    } else {
        "identifier"
    };
    let a = atom(items, i, pos, what)?;
    let ok = if qualified {
        is_qualified_ident(a)
    } else {
        is_ident(a)
    };
    if ok {
        Ok(a)
    } else {
        Err(SyntaxError::new(items[i].pos(), what, format!("`{a}`")))
    }
}

fn expect_end(items: &[SExp], n: usize, _pos: Pos) -> Result<(), SyntaxError> {
    match items.get(n) {
        None => Ok(()),
        Some(extra) => Err(SyntaxError::new(extra.pos(), "`)`", extra.describe())),
    }
}

fn sub_form<'a>(
    item: Option<&'a SExp>,
    keyword: &str,
    pos: Pos,
) -> Result<(&'a [SExp], Pos), SyntaxError> {
    let expected = format!("`({keyword} ...)`");
    match item {
        Some(f @ SExp::List(..)) => {
            let (head, rest, p) = form_parts(f)?;
            if head == keyword {
                Ok((rest, p))
            } else {
                Err(SyntaxError::new(p, expected, f.describe()))
            }
        }
        Some(other) => Err(SyntaxError::new(other.pos(), expected, other.describe())),
        None => Err(SyntaxError::new(pos, expected, "`)`")),
    }
}

fn parse_library(items: &[SExp], pos: Pos) -> Result<Library, SyntaxError> {
    let name = ident(items, 0, pos, true)?.to_string();
    let imports = match items.get(1) {
        None => Vec::new(),
        Some(form) => {
            let (imports, ipos) = sub_form(Some(form), "imports", pos)?;
            (0..imports.len())
                .map(|i| ident(imports, i, ipos, true).map(str::to_string))
                .collect::<Result<_, _>>()?
        }
    };
    expect_end(items, 2, pos)?;
    Ok(Library { name, imports })
}

fn parse_kind(items: &[SExp], i: usize, pos: Pos) -> Result<EntryKind, SyntaxError> {
    let what = "entry kind (theorem|definition|inductive|constructor|inner-constructor)";
    let a = atom(items, i, pos, what)?;
    EntryKind::parse(a).ok_or_else(|| SyntaxError::new(items[i].pos(), what, format!("`{a}`")))
}

fn parse_primitive(items: &[SExp], pos: Pos) -> Result<Primitive, SyntaxError> {
    let kind = parse_kind(items, 0, pos)?;
    let name = ident(items, 1, pos, true)?.to_string();
    let ty = match items.get(2) {
        Some(t) => parse_term(t)?,
        None => return Err(SyntaxError::new(pos, "type term", "`)`")),
    };
    expect_end(items, 3, pos)?;
    Ok(Primitive { name, kind, ty })
}

fn parse_entry(items: &[SExp], pos: Pos) -> Result<CorpusEntry, SyntaxError> {
    let kind = parse_kind(items, 0, pos)?;
    let name = ident(items, 1, pos, true)?.to_string();
    let (stmt, spos) = sub_form(items.get(2), "statement", pos)?;
    let statement = match stmt {
        [t] => parse_term(t)?,
        [] => return Err(SyntaxError::new(spos, "term", "`)`")),
        [_, extra, ..] => return Err(SyntaxError::new(extra.pos(), "`)`", extra.describe())),
    };
    let mut proof = None;
    let mut declared_deps = None;
    let mut i = 3;
    if let Some(SExp::List(l, _)) = items.get(i) {
        if matches!(l.first(), Some(SExp::Atom(h, _)) if h == "proof") {
            let (steps, _) = sub_form(items.get(i), "proof", pos)?;
            proof = Some(
                steps
                    .iter()
                    .map(parse_step)
                    .collect::<Result<Vec<_>, _>>()?,
            );
            i += 1;
        }
    }
    if let Some(SExp::List(l, _)) = items.get(i) {
        if matches!(l.first(), Some(SExp::Atom(h, _)) if h == "deps") {
            let (deps, dpos) = sub_form(items.get(i), "deps", pos)?;
            declared_deps = Some(
                (0..deps.len())
                    .map(|j| ident(deps, j, dpos, true).map(str::to_string))
                    .collect::<Result<Vec<_>, _>>()?,
            );
            i += 1;
        }
    }
    if let Some(extra) = items.get(i) {
        return Err(SyntaxError::new(
            extra.pos(),
            "`(proof ...)`, `(deps ...)` or `)`",
            extra.describe(),
        ));
    }
    Ok(CorpusEntry {
        library: library_of(&name).to_string(),
        name,
        kind,
        statement,
        proof,
        declared_deps,
    })
}

fn parse_step(form: &SExp) -> Result<TacticStep, SyntaxError> {
    let (head, items, pos) = form_parts(form)?;
    if head != "step" {
        return Err(SyntaxError::new(pos, "`(step ...)`", form.describe()));
    }
    let tactic = ident(items, 0, pos, false)?.to_string();
    let (args, _) = sub_form(items.get(1), "args", pos)?;
    let args = args.iter().map(parse_term).collect::<Result<Vec<_>, _>>()?;
    let (goal, gpos) = sub_form(items.get(2), "goal", pos)?;
    let goal_before = match goal {
        [t] => parse_term(t)?,
        [] => return Err(SyntaxError::new(gpos, "term", "`)`")),
        [_, extra, ..] => return Err(SyntaxError::new(extra.pos(), "`)`", extra.describe())),
    };
    let (sub, spos) = sub_form(items.get(3), "subgoals", pos)?;
    let subgoals_after = match sub {
        [SExp::Atom(k, p)] => k
            .parse::<u32>()
            .map_err(|_| SyntaxError::new(*p, "nonnegative integer", format!("`{k}`")))?,
        [other, ..] => {
            return Err(SyntaxError::new(
                other.pos(),
                "nonnegative integer",
                other.describe(),
            ))
        }
        [] => return Err(SyntaxError::new(spos, "nonnegative integer", "`)`")),
    };
    expect_end(items, 4, pos)?;
    Ok(TacticStep {
        tactic,
        args,
        goal_before,
        subgoals_after,
    })
}

/// Parses one `<term>` form.
pub fn parse_term(form: &SExp) -> Result<Term, SyntaxError> {
    let expected = "term `(var|const|sort|app|forall|lambda|let|arrow ...)`";
    let (head, items, pos) = match form {
        SExp::List(..) => form_parts(form)?,
        SExp::Atom(..) => return Err(SyntaxError::new(form.pos(), expected, form.describe())),
    };
    match head {
        "var" => {
            let x = ident(items, 0, pos, false)?;
            expect_end(items, 1, pos)?;
            Ok(Term::Var(x.to_string()))
        }
        "const" => {
            let c = ident(items, 0, pos, true)?;
            expect_end(items, 1, pos)?;
            Ok(Term::Const(c.to_string()))
        }
        "sort" => {
            let what = "sort (Type|Prop|Set)";
            let s = atom(items, 0, pos, what)?;
            let sort = Sort::from_keyword(s)
                .ok_or_else(|| SyntaxError::new(items[0].pos(), what, format!("`{s}`")))?;
            expect_end(items, 1, pos)?;
            Ok(Term::Sort(sort))
        }
        "app" => {
            if items.len() < 2 {
                let at = items.first().map_or(pos, SExp::pos);
                return Err(SyntaxError::new(
                    at,
                    "head and at least one argument",
                    "`)`",
                ));
            }
            let head = parse_term(&items[0])?;
            let args = items[1..]
                .iter()
                .map(parse_term)
                .collect::<Result<_, _>>()?;
            Ok(Term::App(Box::new(head), args))
        }
        "arrow" => {
            let a = items
                .first()
                .ok_or_else(|| SyntaxError::new(pos, "term", "`)`"))?;
            let b = items
                .get(1)
                .ok_or_else(|| SyntaxError::new(pos, "term", "`)`"))?;
            expect_end(items, 2, pos)?;
            Ok(Term::arrow(parse_term(a)?, parse_term(b)?))
        }
        kw => match BinderKind::from_keyword(kw) {
            Some(kind) => {
                let (var, ty) = match items.first() {
                    Some(SExp::List(b, bpos)) => {
                        let x = ident(b, 0, *bpos, false)?;
                        let ty = b
                            .get(1)
                            .ok_or_else(|| SyntaxError::new(*bpos, "type term", "`)`"))?;
                        expect_end(b, 2, *bpos)?;
                        (x.to_string(), parse_term(ty)?)
                    }
                    Some(other) => {
                        return Err(SyntaxError::new(
                            other.pos(),
                            "binding `(x t)`",
                            other.describe(),
                        ))
                    }
                    None => return Err(SyntaxError::new(pos, "binding `(x t)`", "`)`")),
                };
                let body = items
                    .get(1)
                    .ok_or_else(|| SyntaxError::new(pos, "body term", "`)`"))?;
                expect_end(items, 2, pos)?;
                Ok(Term::binder(kind, var, ty, parse_term(body)?))
            }
            None => Err(SyntaxError::new(pos, expected, format!("`{kw}`"))),
        },
    }
}

/// Parses a standalone term, e.g. from a CLI argument.
pub fn parse_term_str(text: &str) -> Result<Term, SyntaxError> {
    let forms = sexp::read_all(text)?;
    match forms.as_slice() {
        [t] => parse_term(t),
        [] => Err(SyntaxError::new(
            Pos { line: 1, col: 1 },
            "term",
            "end of input",
        )),
        [_, extra, ..] => Err(SyntaxError::new(
            extra.pos(),
            "end of input",
            extra.describe(),
        )),
    }
}

pub fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

pub fn is_qualified_ident(s: &str) -> bool {
    s.split('.').all(is_ident)
}

/// Checks every corpus invariant; an empty result means the corpus is valid.
pub fn validate_corpus(corpus: &Corpus) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    let mut libraries = HashSet::new();
    libraries.insert("Top");
    for lib in &corpus.libraries {
        if !is_qualified_ident(&lib.name) {
            push(
                &mut out,
                &lib.name,
                Rule::InvalidName,
                format!("`{}`", lib.name),
            );
        }
        if !libraries.insert(lib.name.as_str()) {
            push(
                &mut out,
                &lib.name,
                Rule::DuplicateName,
                "library declared twice".into(),
            );
        }
    }
    for lib in &corpus.libraries {
        for imp in &lib.imports {
            if !libraries.contains(imp.as_str()) {
                push(
                    &mut out,
                    &lib.name,
                    Rule::UnknownLibrary,
                    format!("imports undeclared `{imp}`"),
                );
            }
        }
    }

    // Position of every declared constant: primitives first, then entries.
    let mut position: HashMap<&str, usize> = HashMap::new();
    let all_names = corpus
        .primitives
        .iter()
        .map(|p| p.name.as_str())
        .chain(corpus.entries.iter().map(|e| e.name.as_str()));
    for (i, name) in all_names.enumerate() {
        if position.contains_key(name) {
            push(&mut out, name, Rule::DuplicateName, String::new());
        } else {
            position.insert(name, i);
        }
    }

    let n_prim = corpus.primitives.len();
    for (i, prim) in corpus.primitives.iter().enumerate() {
        if !is_qualified_ident(&prim.name) {
            push(
                &mut out,
                &prim.name,
                Rule::InvalidName,
                format!("`{}`", prim.name),
            );
        }
        let lib = library_of(&prim.name);
        if !libraries.contains(lib) {
            push(
                &mut out,
                &prim.name,
                Rule::UnknownLibrary,
                format!("`{lib}`"),
            );
        }
        check_term_shape(&mut out, &prim.name, &prim.ty, &[]);
        check_refs(&mut out, &position, &prim.name, i, &prim.ty.constants());
    }

    for (i, entry) in corpus.entries.iter().enumerate() {
        let name = entry.name.as_str();
        if !is_qualified_ident(name) {
            push(&mut out, name, Rule::InvalidName, format!("`{name}`"));
        }
        if entry.library != library_of(name) {
            push(
                &mut out,
                name,
                Rule::LibraryMismatch,
                format!("`{}`", entry.library),
            );
        }
        if !libraries.contains(entry.library.as_str()) {
            push(
                &mut out,
                name,
                Rule::UnknownLibrary,
                format!("`{}`", entry.library),
            );
        }
        check_term_shape(&mut out, name, &entry.statement, &[]);

        let mut refs: Vec<&str> = entry.statement.constants();
        let hyps: Vec<&str> = entry.hypotheses().iter().map(|(x, _)| *x).collect();
        match &entry.proof {
            Some(steps) if !steps.is_empty() => {
                for step in steps {
                    if !is_ident(&step.tactic) {
                        push(
                            &mut out,
                            name,
                            Rule::EmptyTactic,
                            format!("`{}`", step.tactic),
                        );
                    }
                    for t in step.args.iter().chain(std::iter::once(&step.goal_before)) {
                        check_term_shape(&mut out, name, t, &hyps);
                        refs.extend(t.constants());
                    }
                }
            }
            _ if entry.kind == EntryKind::Theorem => {
                push(&mut out, name, Rule::TheoremWithoutProof, String::new());
            }
            _ => {}
        }
        if let Some(deps) = &entry.declared_deps {
            refs.extend(deps.iter().map(String::as_str));
        }
        check_refs(&mut out, &position, name, n_prim + i, &refs);
    }
    out
}

fn push(out: &mut Vec<Diagnostic>, entry: &str, rule: Rule, detail: String) {
    out.push(Diagnostic {
        entry: entry.to_string(),
        rule,
        detail,
    });
}

/// Every referenced name must be declared strictly before position `at`.
fn check_refs(
    out: &mut Vec<Diagnostic>,
    position: &HashMap<&str, usize>,
    owner: &str,
    at: usize,
    names: &[&str],
) {
    let mut reported = HashSet::new();
    for &n in names {
        if !reported.insert(n) {
            continue;
        }
        match position.get(n) {
            Some(&p) if p < at => {}
            Some(_) => push(out, owner, Rule::ForwardReference, format!("`{n}`")),
            None => push(out, owner, Rule::UnresolvedReference, format!("`{n}`")),
        }
    }
}

fn check_term_shape(out: &mut Vec<Diagnostic>, owner: &str, term: &Term, bound: &[&str]) {
    for x in term.free_vars(bound) {
        push(out, owner, Rule::UnboundVariable, format!("`{x}`"));
    }
    walk_shape(out, owner, term);
}

fn walk_shape(out: &mut Vec<Diagnostic>, owner: &str, term: &Term) {
    match term {
        Term::Var(x) if !is_ident(x) => {
            push(out, owner, Rule::InvalidName, format!("variable `{x}`"))
        }
        Term::Const(c) if !is_qualified_ident(c) => {
            push(out, owner, Rule::InvalidName, format!("constant `{c}`"))
        }
        Term::Binder { var, .. } if !is_ident(var) => {
            push(out, owner, Rule::InvalidName, format!("binder `{var}`"))
        }
        Term::App(_, args) if args.is_empty() => {
            push(out, owner, Rule::EmptyApplication, term.to_string())
        }
        _ => {}
    }
    for c in term.children() {
        walk_shape(out, owner, c);
    }
}

/// Writes a term in corpus syntax.
pub fn term_to_sexp(term: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, term);
    s
}

fn write_term(out: &mut String, term: &Term) {
    match term {
        Term::Var(x) => {
            out.push_str("(var ");
            out.push_str(x);
            out.push(')');
        }
        Term::Const(c) => {
            out.push_str("(const ");
            out.push_str(c);
            out.push(')');
        }
        Term::Sort(s) => {
            out.push_str("(sort ");
            out.push_str(s.as_str());
            out.push(')');
        }
        Term::App(h, args) => {
            out.push_str("(app ");
            write_term(out, h);
            for a in args {
                out.push(' ');
                write_term(out, a);
            }
            out.push(')');
        }
        Term::Binder {
            kind,
            var,
            ty,
            body,
        } => {
            out.push('(');
            out.push_str(kind.as_str());
            out.push_str(" (");
            out.push_str(var);
            out.push(' ');
            write_term(out, ty);
            out.push_str(") ");
            write_term(out, body);
            out.push(')');
        }
        Term::Arrow(a, b) => {
            out.push_str("(arrow ");
            write_term(out, a);
            out.push(' ');
            write_term(out, b);
            out.push(')');
        }
    }
}

/// Serializes a corpus into the canonical file format.
pub fn serialize_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for lib in &corpus.libraries {
        out.push_str(&format!("(library {} (imports", lib.name));
        for i in &lib.imports {
            out.push(' ');
            out.push_str(i);
        }
        out.push_str("))\n");
    }
    for p in &corpus.primitives {
        out.push_str(&format!(
            "(primitive {} {} {})\n",
            p.kind,
            p.name,
            term_to_sexp(&p.ty)
        ));
    }
    for e in &corpus.entries {
        out.push_str(&format!(
            "(entry {} {}\n  (statement {})",
            e.kind,
            e.name,
            term_to_sexp(&e.statement)
        ));
        if let Some(steps) = &e.proof {
            out.push_str("\n  (proof");
            for s in steps {
                out.push_str(&format!("\n    (step {} (args", s.tactic));
                for a in &s.args {
                    out.push(' ');
                    out.push_str(&term_to_sexp(a));
                }
                out.push_str(&format!(
                    ") (goal {}) (subgoals {}))",
                    term_to_sexp(&s.goal_before),
                    s.subgoals_after
                ));
            }
            out.push(')');
        }
        if let Some(deps) = &e.declared_deps {
            out.push_str("\n  (deps");
            for d in deps {
                out.push(' ');
                out.push_str(d);
            }
            out.push(')');
        }
        out.push_str(")\n");
    }
    out
}

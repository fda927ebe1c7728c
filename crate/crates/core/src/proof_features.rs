//! Per-goal proof feature tables.
//!
//! A proof trace is cut into goal segments. A new segment starts whenever the
//! recorded goal changes (up to bound-variable names), and no segment holds
//! more than four steps. Each segment becomes one row:
//!
//! | slots | content                                                      |
//! |-------|--------------------------------------------------------------|
//! | 4     | tactic codes                                                 |
//! | 1     | number of tactics in the segment                             |
//! | 4     | argument types (hypothesis type, or `Prop` for proof terms)  |
//! | 4     | argument terms, for tactics that supply a proof term          |
//! | 3     | head of the goal and heads of its first two subterms          |
//! | 1     | subgoals left after the segment                               |

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::corpus::{CorpusEntry, TacticStep};
use crate::features::{keyword_code, Encoder, FeatureError};
use crate::term::{Keyword, Term};
use crate::term_tree::type_key;

pub const TACTIC_SLOTS: usize = 4;
pub const ARG_SLOTS: usize = 4;
pub const SYMBOL_SLOTS: usize = 3;
pub const ROW_WIDTH: usize = TACTIC_SLOTS + 1 + ARG_SLOTS + ARG_SLOTS + SYMBOL_SLOTS + 1;
pub const DEFAULT_GOALS: usize = 8;

/// Shared code for tactics missing from the table when unknown tactics are allowed.
pub const UNKNOWN_TACTIC_CODE: f64 = 9000.0;

/// How a tactic uses its arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArgRole {
    /// Manipulates hypotheses: arguments are recorded by type only.
    Hypothesis,
    /// Supplies a proof term: arguments are recorded as terms, typed `Prop`.
    ProofTerm,
}

impl ArgRole {
    pub fn as_str(self) -> &'static str {
        match self {
            ArgRole::Hypothesis => "hypothesis",
            ArgRole::ProofTerm => "proof-term",
        }
    }

    pub fn parse(s: &str) -> Option<ArgRole> {
        match s {
            "hypothesis" => Some(ArgRole::Hypothesis),
            "proof-term" => Some(ArgRole::ProofTerm),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TacticInfo {
    pub code: f64,
    pub role: ArgRole,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProofError {
    #[error("empty proof")]
    EmptyProof,
    #[error("`{entry}` has no proof")]
    NoProof { entry: String },
    #[error("unknown tactic `{0}` (extend the tactic table or allow unknown tactics)")]
    UnknownTactic(String),
    #[error("proof of `{entry}` has {segments} goal segments but the table holds {goals}")]
    TooManyGoals {
        entry: String,
        segments: usize,
        goals: usize,
    },
    #[error("tactic registry line {line}: {message}")]
    Registry { line: usize, message: String },
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

/// Tactic codes. Related tactics sit next to each other, 100 apart.
#[derive(Debug, Clone, PartialEq)]
pub struct TacticTable {
    tactics: BTreeMap<String, TacticInfo>,
}

const BUILTIN_TACTICS: &[(&str, ArgRole)] = &[
    ("destruct", ArgRole::Hypothesis),
    ("induction", ArgRole::Hypothesis),
    ("case", ArgRole::Hypothesis),
    ("elim", ArgRole::Hypothesis),
    ("intro", ArgRole::Hypothesis),
    ("intros", ArgRole::Hypothesis),
    ("simpl", ArgRole::Hypothesis),
    ("cbn", ArgRole::Hypothesis),
    ("unfold", ArgRole::Hypothesis),
    ("rewrite", ArgRole::ProofTerm),
    ("exact", ArgRole::ProofTerm),
    ("apply", ArgRole::ProofTerm),
    ("refine", ArgRole::ProofTerm),
    ("eapply", ArgRole::ProofTerm),
    ("reflexivity", ArgRole::Hypothesis),
    ("assumption", ArgRole::Hypothesis),
    ("auto", ArgRole::Hypothesis),
    ("trivial", ArgRole::Hypothesis),
    ("split", ArgRole::Hypothesis),
    ("exists", ArgRole::ProofTerm),
];

impl Default for TacticTable {
    fn default() -> Self {
        let tactics = BUILTIN_TACTICS
            .iter()
            .enumerate()
            .map(|(i, (name, role))| {
                (
                    name.to_string(),
                    TacticInfo {
                        code: 100.0 * (i + 1) as f64,
                        role: *role,
                    },
                )
            })
            .collect();
        TacticTable { tactics }
    }
}

impl TacticTable {
    pub fn get(&self, tactic: &str) -> Option<TacticInfo> {
        self.tactics.get(tactic).copied()
    }

    pub fn insert(&mut self, tactic: impl Into<String>, info: TacticInfo) {
        self.tactics.insert(tactic.into(), info);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, TacticInfo)> {
        self.tactics.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Role of a tactic; unknown tactics are treated as hypothesis tactics.
    pub fn role(&self, tactic: &str) -> ArgRole {
        self.get(tactic).map_or(ArgRole::Hypothesis, |i| i.role)
    }

    /// Adds or overrides entries from a registry file: one
    /// `<tactic> <code> <hypothesis|proof-term>` per line, `;` starts a comment.
    pub fn extend_from_registry(&mut self, text: &str) -> Result<(), ProofError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split(';').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ProofError::Registry {
                line: n + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [name, code, role] = fields.as_slice() else {
                return Err(err(format!(
                    "expected `<tactic> <code> <role>`, found `{line}`"
                )));
            };
            if !crate::corpus::is_ident(name) {
                return Err(err(format!("invalid tactic name `{name}`")));
            }
            let code: f64 = code
                .parse()
                .ok()
                .filter(|c: &f64| c.is_finite() && *c > 0.0)
                .ok_or_else(|| err(format!("invalid code `{code}`")))?;
            let role = ArgRole::parse(role).ok_or_else(|| err(format!("invalid role `{role}`")))?;
            self.insert(*name, TacticInfo { code, role });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct ProofOptions {
    pub table: TacticTable,
    pub allow_unknown_tactics: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProofFeatureRow {
    pub tactic_codes: [f64; TACTIC_SLOTS],
    pub tactic_count: u32,
    pub arg_type_codes: [f64; ARG_SLOTS],
    pub arg_codes: [f64; ARG_SLOTS],
    pub top_symbol_codes: [f64; SYMBOL_SLOTS],
    pub subgoal_count: u32,
}

impl ProofFeatureRow {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(ROW_WIDTH);
        v.extend(self.tactic_codes);
        v.push(self.tactic_count as f64);
        v.extend(self.arg_type_codes);
        v.extend(self.arg_codes);
        v.extend(self.top_symbol_codes);
        v.push(self.subgoal_count as f64);
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProofFeatureMatrix {
    pub rows: Vec<ProofFeatureRow>,
    pub source: String,
    /// Rows the flattened vector is padded to.
    pub goals: usize,
    /// Arguments dropped because a segment had more than four.
    pub truncated_args: usize,
}

impl ProofFeatureMatrix {
    pub fn flatten(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.rows.iter().flat_map(ProofFeatureRow::to_vec).collect();
        v.resize(self.goals * ROW_WIDTH, 0.0);
        v
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("goal,tactics,n,arg_type,arg,symbols,goals\n");
        let join = |xs: &[f64]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(":")
        };
        for (i, r) in self.rows.iter().enumerate() {
            let _ = writeln!(
                out,
                "g{},{},{},{},{},{},{}",
                i + 1,
                join(&r.tactic_codes),
                r.tactic_count,
                join(&r.arg_type_codes),
                join(&r.arg_codes),
                join(&r.top_symbol_codes),
                r.subgoal_count
            );
        }
        out
    }
}

impl fmt::Display for ProofFeatureMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}

/// Groups consecutive steps that work on the same recorded goal, at most
/// four per group.
pub fn segment_trace(proof: &[TacticStep]) -> Result<Vec<&[TacticStep]>, ProofError> {
    if proof.is_empty() {
        return Err(ProofError::EmptyProof);
    }
    let mut segments = Vec::new();
    let mut start = 0;
    for i in 1..proof.len() {
        if !proof[i].goal_before.alpha_eq(&proof[i - 1].goal_before) || i - start == TACTIC_SLOTS {
            segments.push(&proof[start..i]);
            start = i;
        }
    }
    segments.push(&proof[start..]);
    Ok(segments)
}

/// Head codes of a goal: the root head and the heads of its first two
/// immediate subterms (application arguments, binder type and body, arrow
/// sides).
pub fn top_symbols(
    goal: &Term,
    ctx: &[&str],
    encoder: &Encoder,
) -> Result<[f64; SYMBOL_SLOTS], FeatureError> {
    let mut out = [0.0; SYMBOL_SLOTS];
    out[0] = encoder.head_code(goal, ctx)?;
    let (_, args) = goal.spine();
    let subterms: Vec<(&Term, Option<&str>)> = match goal {
        Term::App(..) => args.into_iter().map(|a| (a, None)).collect(),
        Term::Binder { var, ty, body, .. } => {
            vec![(ty.as_ref(), None), (body.as_ref(), Some(var.as_str()))]
        }
        Term::Arrow(a, b) => vec![(a.as_ref(), None), (b.as_ref(), None)],
        _ => Vec::new(),
    };
    for (slot, (t, bound)) in out[1..].iter_mut().zip(subterms) {
        let mut inner = ctx.to_vec();
        inner.extend(bound);
        *slot = encoder.head_code(t, &inner)?;
    }
    Ok(out)
}

/// Encodes the proof of `entry` into one row per goal segment.
pub fn encode_proof(
    entry: &CorpusEntry,
    encoder: &Encoder,
    options: &ProofOptions,
    goals: usize,
) -> Result<ProofFeatureMatrix, ProofError> {
    let proof = entry
        .proof
        .as_deref()
        .filter(|p| !p.is_empty())
        .ok_or_else(|| ProofError::NoProof {
            entry: entry.name.clone(),
        })?;
    let segments = segment_trace(proof)?;
    if segments.len() > goals {
        return Err(ProofError::TooManyGoals {
            entry: entry.name.clone(),
            segments: segments.len(),
            goals,
        });
    }
    let hyps: Vec<(String, Term)> = entry
        .hypotheses()
        .into_iter()
        .map(|(x, t)| (x.to_string(), t.clone()))
        .collect();
    let ctx: Vec<&str> = hyps.iter().map(|(x, _)| x.as_str()).collect();

    let mut rows = Vec::with_capacity(segments.len());
    let mut truncated_args = 0;
    for seg in segments {
        let mut tactic_codes = [0.0; TACTIC_SLOTS];
        let mut arg_type_codes = [0.0; ARG_SLOTS];
        let mut arg_codes = [0.0; ARG_SLOTS];
        let mut next_arg = 0;
        for (slot, step) in seg.iter().enumerate() {
            let info = match options.table.get(&step.tactic) {
                Some(info) => info,
                None if options.allow_unknown_tactics => TacticInfo {
                    code: UNKNOWN_TACTIC_CODE,
                    role: ArgRole::Hypothesis,
                },
                None => return Err(ProofError::UnknownTactic(step.tactic.clone())),
            };
            tactic_codes[slot] = info.code;
            for arg in &step.args {
                if next_arg == ARG_SLOTS {
                    truncated_args += 1;
                    continue;
                }
                match info.role {
                    ArgRole::Hypothesis => {
                        arg_type_codes[next_arg] = hypothesis_type_code(arg, &hyps, encoder)?;
                    }
                    ArgRole::ProofTerm => {
                        arg_type_codes[next_arg] = keyword_code(Keyword::Prop);
                        arg_codes[next_arg] = encoder.term_code(arg, &ctx)?;
                    }
                }
                next_arg += 1;
            }
        }
        let last = seg.last().expect("segments are non-empty");
        rows.push(ProofFeatureRow {
            tactic_codes,
            tactic_count: seg.len() as u32,
            arg_type_codes,
            arg_codes,
            top_symbol_codes: top_symbols(&seg[0].goal_before, &ctx, encoder)?,
            subgoal_count: last.subgoals_after,
        });
    }
    Ok(ProofFeatureMatrix {
        rows,
        source: entry.name.clone(),
        goals,
        truncated_args,
    })
}

// Type code of a hypothesis argument; anything but a known hypothesis counts as a proof term.
fn hypothesis_type_code(
    arg: &Term,
    hyps: &[(String, Term)],
    encoder: &Encoder,
) -> Result<f64, FeatureError> {
    if let Term::Var(x) = arg {
        if let Some(i) = hyps.iter().rposition(|(n, _)| n == x) {
            return encoder.key_code(&type_key(&hyps[i].1, &hyps[..i]));
        }
    }
    Ok(keyword_code(Keyword::Prop))
}

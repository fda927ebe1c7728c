//! C ABI over the proofscope library.
//!
//! Corpora are opaque `PsCorpus` handles. Every fallible call returns a
//! `PsStatus`; on failure `ps_last_error_message` describes the error for the
//! calling thread. Strings handed out by the library must be released with
//! `ps_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use proofscope::clustering::{
    cluster_proofs, recurrent_cluster, ClusterOptions, Cut, PartitionFile,
};
use proofscope::corpus::{parse_corpus, Corpus};
use proofscope::dep_graph::{build_dg1, build_dg2, dep_graph_dot, lib_graph_dot};
use proofscope::report::text_report;
use proofscope::sample::SAMPLE_CORPUS;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    ClusterError = 5,
    GraphError = 6,
    ReportError = 7,
    Panic = 8,
}

/// Opaque parsed corpus.
pub struct PsCorpus {
    corpus: Corpus,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: PsStatus, msg: impl Into<String>) -> PsStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> PsStatus) -> PsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(PsStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, PsStatus> {
    if p.is_null() {
        return Err(fail(PsStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(PsStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn corpus_arg<'a>(p: *const PsCorpus) -> Result<&'a Corpus, PsStatus> {
    p.as_ref()
        .map(|c| &c.corpus)
        .ok_or_else(|| fail(PsStatus::NullPointer, "corpus handle is null"))
}

unsafe fn give_string(out: *mut *mut c_char, s: String) -> PsStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            PsStatus::Ok
        }
        Err(_) => fail(PsStatus::InvalidArgument, "output contains a nul byte"),
    }
}

fn cut_from(granularity: u8, clusters: u32) -> Result<Cut, PsStatus> {
    if clusters > 0 {
        Ok(Cut::Clusters(clusters as usize))
    } else if (1..=5).contains(&granularity) {
        Ok(Cut::Granularity(granularity))
    } else {
        Err(fail(
            PsStatus::InvalidArgument,
            format!("granularity {granularity} is outside 1..=5"),
        ))
    }
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Parses and validates corpus text. On success `*out` holds a new handle.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ps_corpus_parse(text: *const c_char, out: *mut *mut PsCorpus) -> PsStatus {
    guard(|| {
        if out.is_null() {
            return fail(PsStatus::NullPointer, "out is null");
        }
        let text = tri!(str_arg(text, "text"));
        match parse_corpus(text) {
            Ok(corpus) => {
                *out = Box::into_raw(Box::new(PsCorpus { corpus }));
                PsStatus::Ok
            }
            Err(e) => fail(PsStatus::ParseError, e.to_string()),
        }
    })
}

/// Handle to the bundled sample corpus.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ps_corpus_bundled(out: *mut *mut PsCorpus) -> PsStatus {
    guard(|| {
        if out.is_null() {
            return fail(PsStatus::NullPointer, "out is null");
        }
        match parse_corpus(SAMPLE_CORPUS) {
            Ok(corpus) => {
                *out = Box::into_raw(Box::new(PsCorpus { corpus }));
                PsStatus::Ok
            }
            Err(e) => fail(PsStatus::ParseError, e.to_string()),
        }
    })
}

/// Releases a corpus handle. Null is ignored.
///
/// # Safety
/// `corpus` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ps_corpus_free(corpus: *mut PsCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Number of entries, or 0 for a null handle.
///
/// # Safety
/// `corpus` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_corpus_entry_count(corpus: *const PsCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.corpus.entries.len())
}

/// Recurrent statement clustering; writes the partition JSON to `*out_json`.
/// `clusters > 0` overrides `granularity`.
///
/// # Safety
/// `corpus` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ps_cluster_terms(
    corpus: *const PsCorpus,
    granularity: u8,
    clusters: u32,
    max_iters: u32,
    out_json: *mut *mut c_char,
) -> PsStatus {
    guard(|| {
        let corpus = tri!(corpus_arg(corpus));
        if out_json.is_null() {
            return fail(PsStatus::NullPointer, "out_json is null");
        }
        let cut = tri!(cut_from(granularity, clusters));
        let options = ClusterOptions {
            max_iters: max_iters.max(1) as usize,
            ..Default::default()
        };
        match recurrent_cluster(corpus, cut, &options) {
            Ok(r) => give_string(
                out_json,
                PartitionFile::new(&r.partition, r.converged, r.passes).to_json(),
            ),
            Err(e) => fail(PsStatus::ClusterError, e.to_string()),
        }
    })
}

/// Proof clustering, with terms encoded by a recurrent statement clustering at
/// the same cut. Writes the partition JSON to `*out_json`.
///
/// # Safety
/// `corpus` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ps_cluster_proofs(
    corpus: *const PsCorpus,
    granularity: u8,
    clusters: u32,
    max_iters: u32,
    out_json: *mut *mut c_char,
) -> PsStatus {
    guard(|| {
        let corpus = tri!(corpus_arg(corpus));
        if out_json.is_null() {
            return fail(PsStatus::NullPointer, "out_json is null");
        }
        let cut = tri!(cut_from(granularity, clusters));
        let options = ClusterOptions {
            max_iters: max_iters.max(1) as usize,
            ..Default::default()
        };
        let result = recurrent_cluster(corpus, cut, &options).and_then(|terms| {
            cluster_proofs(corpus, &terms.encoder, cut, &options)
                .map(|p| PartitionFile::new(&p, terms.converged, terms.passes))
        });
        match result {
            Ok(file) => give_string(out_json, file.to_json()),
            Err(e) => fail(PsStatus::ClusterError, e.to_string()),
        }
    })
}

/// Dependency graph DOT of `root`, or of the whole corpus when `root` is null.
///
/// # Safety
/// `corpus` must be a live handle, `root` null or nul-terminated, `out_dot` valid.
#[no_mangle]
pub unsafe extern "C" fn ps_depgraph_dot(
    corpus: *const PsCorpus,
    root: *const c_char,
    out_dot: *mut *mut c_char,
) -> PsStatus {
    guard(|| {
        let corpus = tri!(corpus_arg(corpus));
        if out_dot.is_null() {
            return fail(PsStatus::NullPointer, "out_dot is null");
        }
        let root = if root.is_null() {
            None
        } else {
            Some(tri!(str_arg(root, "root")))
        };
        match build_dg1(corpus, root) {
            Ok(g) => give_string(out_dot, dep_graph_dot(&g)),
            Err(e) => fail(PsStatus::GraphError, e.to_string()),
        }
    })
}

/// Library import graph DOT.
///
/// # Safety
/// `corpus` must be a live handle and `out_dot` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ps_libgraph_dot(
    corpus: *const PsCorpus,
    out_dot: *mut *mut c_char,
) -> PsStatus {
    guard(|| {
        let corpus = tri!(corpus_arg(corpus));
        if out_dot.is_null() {
            return fail(PsStatus::NullPointer, "out_dot is null");
        }
        match build_dg2(corpus) {
            Ok(g) => give_string(out_dot, lib_graph_dot(&g)),
            Err(e) => fail(PsStatus::GraphError, e.to_string()),
        }
    })
}

/// Plain-text report of the statement clustering at `granularity`.
///
/// # Safety
/// `corpus` must be a live handle and `out_text` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ps_text_report(
    corpus: *const PsCorpus,
    granularity: u8,
    out_text: *mut *mut c_char,
) -> PsStatus {
    guard(|| {
        let corpus = tri!(corpus_arg(corpus));
        if out_text.is_null() {
            return fail(PsStatus::NullPointer, "out_text is null");
        }
        let cut = tri!(cut_from(granularity, 0));
        let r = match recurrent_cluster(corpus, cut, &ClusterOptions::default()) {
            Ok(r) => r,
            Err(e) => return fail(PsStatus::ClusterError, e.to_string()),
        };
        match text_report(&r.partition, corpus) {
            Ok(text) => give_string(out_text, text),
            Err(e) => fail(PsStatus::ReportError, e.to_string()),
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ps_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

//! C ABI for `defgeo`.
//!
//! Structures and specs live behind opaque handles created by the `*_parse`
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`DgStatus`]; on failure [`dg_last_error_message`] describes the
//! error for the calling thread. Strings handed out by the library are
//! NUL-terminated UTF-8 and must be released with [`dg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use defgeo::closure::{decide_equivalence, def_family, fingerprint, Equivalence};
use defgeo::eval::solution_set;
use defgeo::geometry::{ed_check, EdVerdict};
use defgeo::{Error, Formula, FormulaClassSpec, Limits, Relation, Structure};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Arity = 4,
    UniverseMismatch = 5,
    ModeMismatch = 6,
    Guard = 7,
    Invalid = 8,
    Panic = 9,
}

/// A parsed structure.
pub struct DgStructure {
    inner: Structure,
}

/// A parsed formula class, bound to the structure it was parsed against.
pub struct DgSpec {
    inner: FormulaClassSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DgStatus {
    match e {
        Error::Syntax { .. } => DgStatus::Syntax,
        Error::Arity(_) | Error::Substitution { .. } | Error::OutOfRange(_) => DgStatus::Arity,
        Error::UniverseMismatch(..) => DgStatus::UniverseMismatch,
        Error::ModeMismatch(..) => DgStatus::ModeMismatch,
        Error::Guard { .. } => DgStatus::Guard,
        _ => DgStatus::Invalid,
    }
}

struct Fail(DgStatus);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        set_error(e.to_string());
        Fail(status_of(&e))
    }
}

fn null(what: &str) -> Fail {
    set_error(format!("`{what}` is null"));
    Fail(DgStatus::NullArgument)
}

/// Runs `body`, turning errors and panics into status codes.
fn guarded(body: impl FnOnce() -> Result<(), Fail>) -> DgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DgStatus::Ok
        }
        Ok(Err(Fail(status))) => status,
        Err(_) => {
            set_error("internal panic".into());
            DgStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("`{what}` is not valid UTF-8"));
        Fail(DgStatus::InvalidUtf8)
    })
}

/// # Safety
/// `p` is null or a live handle.
unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `out` is null or writable.
unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

fn limits() -> Result<Limits, Fail> {
    Ok(Limits::from_env()?)
}

/// Parses a structure file's text into a new handle.
///
/// # Safety
/// `source` is a NUL-terminated string; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn dg_structure_parse(source: *const c_char, out: *mut *mut DgStructure) -> DgStatus {
    guarded(|| {
        let s = Structure::parse(text(source, "source")?)?;
        put(out, Box::into_raw(Box::new(DgStructure { inner: s })), "out")
    })
}

/// Releases a structure handle. Null is ignored.
///
/// # Safety
/// `s` is null or a handle from [`dg_structure_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dg_structure_free(s: *mut DgStructure) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Universe size of a structure, 0 for a null handle.
///
/// # Safety
/// `s` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dg_structure_universe_size(s: *const DgStructure) -> u32 {
    s.as_ref().map_or(0, |s| s.inner.k())
}

/// Parses a spec file's text against `structure`.
///
/// # Safety
/// `structure` is a live handle, `source` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dg_spec_parse(
    structure: *const DgStructure,
    source: *const c_char,
    out: *mut *mut DgSpec,
) -> DgStatus {
    guarded(|| {
        let a = handle(structure, "structure")?;
        let spec = FormulaClassSpec::parse(text(source, "source")?, &a.inner, &limits()?)?;
        put(out, Box::into_raw(Box::new(DgSpec { inner: spec })), "out")
    })
}

/// Releases a spec handle. Null is ignored.
///
/// # Safety
/// `spec` is null or a handle from [`dg_spec_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dg_spec_free(spec: *mut DgSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Solution set of `formula` at `arity`, as canonical relation text.
///
/// # Safety
/// Handles are live, `formula` is NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dg_eval(
    structure: *const DgStructure,
    formula: *const c_char,
    arity: usize,
    out: *mut *mut c_char,
) -> DgStatus {
    guarded(|| {
        let a = &handle(structure, "structure")?.inner;
        let phi = Formula::parse(text(formula, "formula")?, a)?;
        let r = solution_set(&phi, arity, a, &limits()?)?;
        put(out, owned_string(r.to_string()), "out")
    })
}

/// Canonical fingerprint text at the comparison arity.
///
/// # Safety
/// Handles are live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dg_fingerprint(
    structure: *const DgStructure,
    spec: *const DgSpec,
    out: *mut *mut c_char,
) -> DgStatus {
    guarded(|| {
        let a = &handle(structure, "structure")?.inner;
        let spec = &handle(spec, "spec")?.inner;
        let fp = fingerprint(a, spec, &limits()?)?;
        put(out, owned_string(fp.to_text()), "out")
    })
}

/// Whether two structures define the same sets. On inequivalence, when
/// `witness` is not null, it receives a relation in exactly one family and
/// `witness_in_first` (if not null) says which.
///
/// # Safety
/// Handles are live; `equivalent` is writable; `witness` and
/// `witness_in_first` are null or writable.
#[no_mangle]
pub unsafe extern "C" fn dg_equivalent(
    structure1: *const DgStructure,
    spec1: *const DgSpec,
    structure2: *const DgStructure,
    spec2: *const DgSpec,
    equivalent: *mut bool,
    witness: *mut *mut c_char,
    witness_in_first: *mut bool,
) -> DgStatus {
    guarded(|| {
        let a1 = &handle(structure1, "structure1")?.inner;
        let a2 = &handle(structure2, "structure2")?.inner;
        let s1 = &handle(spec1, "spec1")?.inner;
        let s2 = &handle(spec2, "spec2")?.inner;
        if equivalent.is_null() {
            return Err(null("equivalent"));
        }
        let verdict = decide_equivalence(a1, s1, a2, s2, &limits()?)?;
        if !witness.is_null() {
            witness.write(ptr::null_mut());
        }
        match verdict {
            Equivalence::Equivalent => equivalent.write(true),
            Equivalence::Inequivalent { witness: w, in_first } => {
                equivalent.write(false);
                if !witness.is_null() {
                    witness.write(owned_string(w.to_string()));
                }
                if !witness_in_first.is_null() {
                    witness_in_first.write(in_first);
                }
            }
        }
        Ok(())
    })
}

/// Equational-domain check up to `bound`; `passes` receives the verdict.
///
/// # Safety
/// `structure` is live and `passes` writable.
#[no_mangle]
pub unsafe extern "C" fn dg_edcheck(structure: *const DgStructure, bound: usize, passes: *mut bool) -> DgStatus {
    guarded(|| {
        let a = &handle(structure, "structure")?.inner;
        let report = ed_check(&a.algebra_reduct(), bound, &limits()?)?;
        put(passes, report.verdict == EdVerdict::PassesAtBound, "passes")
    })
}

/// Whether `relation` (canonical text `rel/K/N:{...}`) is definable at its arity.
///
/// # Safety
/// Handles are live, `relation` is NUL-terminated, `member` writable.
#[no_mangle]
pub unsafe extern "C" fn dg_member(
    structure: *const DgStructure,
    spec: *const DgSpec,
    relation: *const c_char,
    member: *mut bool,
) -> DgStatus {
    guarded(|| {
        let a = &handle(structure, "structure")?.inner;
        let spec = &handle(spec, "spec")?.inner;
        let t = Relation::parse_canonical(text(relation, "relation")?)?;
        let family = def_family(a, spec, t.arity(), &limits()?)?;
        put(member, family.member(&t)?, "member")
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn dg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

//! C interface to graftok.
//!
//! Tokenizers are opaque handles created by `graftok_tokenizer_*` and released
//! with `graftok_tokenizer_free`. Every fallible call returns a
//! `GraftokStatus`; on failure `graftok_last_error` describes the problem for
//! the calling thread.
//!
//! Output buffers follow one convention: the caller passes a buffer and its
//! capacity, the callee always writes the required length to `out_len`, and
//! returns `GRAFTOK_STATUS_BUFFER_TOO_SMALL` without writing when it does not fit.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use graftok::prompt::{build_prompt, LanguageFamilyMap, PromptOptions};
use graftok::{DecodeMode, Error, Tokenizer};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraftokStatus {
    Ok = 0,
    NullPointer = 1,
    Io = 2,
    InvalidUtf8 = 3,
    FingerprintMismatch = 4,
    UnknownLanguage = 5,
    UnknownTokenId = 6,
    InvalidByteSequence = 7,
    MissingSpecialToken = 8,
    UnsupportedTask = 9,
    MalformedTokenizer = 10,
    BufferTooSmall = 11,
    Panic = 12,
    Other = 13,
}

/// Opaque tokenizer handle.
pub struct GraftokTokenizer {
    inner: Tokenizer,
    families: LanguageFamilyMap,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> GraftokStatus {
    match err {
        Error::Io { .. } => GraftokStatus::Io,
        Error::InvalidUtf8 { .. } => GraftokStatus::InvalidUtf8,
        Error::FingerprintMismatch { .. } => GraftokStatus::FingerprintMismatch,
        Error::UnknownLanguage(_) => GraftokStatus::UnknownLanguage,
        Error::UnknownTokenId(_) => GraftokStatus::UnknownTokenId,
        Error::InvalidByteSequence { .. } => GraftokStatus::InvalidByteSequence,
        Error::MissingSpecialToken(_) => GraftokStatus::MissingSpecialToken,
        Error::UnsupportedTask(_) => GraftokStatus::UnsupportedTask,
        Error::MalformedVocab(_)
        | Error::MalformedMerges { .. }
        | Error::InvalidMerge(_)
        | Error::MissingByteToken(_)
        | Error::Json(_) => GraftokStatus::MalformedTokenizer,
        Error::Language { source, .. } => status_of(source),
        _ => GraftokStatus::Other,
    }
}

enum Failure {
    Status(GraftokStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(GraftokStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GraftokStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GraftokStatus::Ok,
        Ok(Err(Failure::Status(status, msg))) => {
            set_error(msg);
            status
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            GraftokStatus::Panic
        }
    }
}

unsafe fn handle<'a>(tok: *const GraftokTokenizer) -> Result<&'a GraftokTokenizer, Failure> {
    tok.as_ref().ok_or_else(|| null("tokenizer"))
}

unsafe fn bytes<'a>(ptr: *const u8, len: usize, what: &str) -> Result<&'a [u8], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

unsafe fn c_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        Failure::Status(GraftokStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8"))
    })
}

unsafe fn write_out<T: Copy>(src: &[T], out: *mut T, cap: usize, out_len: *mut usize) -> Result<(), Failure> {
    if out_len.is_null() {
        return Err(null("out_len"));
    }
    *out_len = src.len();
    if src.len() > cap {
        return Err(Failure::Status(
            GraftokStatus::BufferTooSmall,
            format!("need {} elements, buffer holds {cap}", src.len()),
        ));
    }
    if !src.is_empty() {
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    }
    Ok(())
}

fn boxed(tok: Tokenizer) -> *mut GraftokTokenizer {
    Box::into_raw(Box::new(GraftokTokenizer {
        inner: tok,
        families: LanguageFamilyMap::default(),
    }))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn graftok_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn graftok_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads the bundled GPT-2 tokenizer.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn graftok_tokenizer_load_base(out: *mut *mut GraftokTokenizer) -> GraftokStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = boxed(Tokenizer::gpt2_base().clone());
        Ok(())
    })
}

/// Loads `vocab.json`, `merges.txt` and `added_tokens.json` from a directory.
///
/// # Safety
/// `dir` must be a NUL-terminated string; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn graftok_tokenizer_load_dir(
    dir: *const c_char,
    out: *mut *mut GraftokTokenizer,
) -> GraftokStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let dir = c_str(dir, "dir")?;
        *out = boxed(Tokenizer::load_dir(dir)?);
        Ok(())
    })
}

/// Replaces the handle's language-family map with the JSON in `json`.
///
/// # Safety
/// `tok` must come from a `graftok_tokenizer_load_*` call; `json` must be a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn graftok_tokenizer_set_families(
    tok: *mut GraftokTokenizer,
    json: *const c_char,
) -> GraftokStatus {
    guard(|| {
        let tok = tok.as_mut().ok_or_else(|| null("tokenizer"))?;
        tok.families = LanguageFamilyMap::from_json(c_str(json, "json")?)?;
        Ok(())
    })
}

/// # Safety
/// `tok` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn graftok_tokenizer_free(tok: *mut GraftokTokenizer) {
    if !tok.is_null() {
        drop(Box::from_raw(tok));
    }
}

/// Number of tokens, specials included. Returns 0 for a null handle.
///
/// # Safety
/// `tok` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn graftok_tokenizer_vocab_size(tok: *const GraftokTokenizer) -> usize {
    tok.as_ref().map_or(0, |t| t.inner.vocab().len())
}

/// Encodes UTF-8 text. Special-token names are treated as plain text.
///
/// # Safety
/// `text` must be readable for `len` bytes, `out_ids` writable for `cap` ids,
/// `out_len` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn graftok_encode(
    tok: *const GraftokTokenizer,
    text: *const u8,
    len: usize,
    out_ids: *mut u32,
    cap: usize,
    out_len: *mut usize,
) -> GraftokStatus {
    guard(|| {
        let tok = handle(tok)?;
        let ids = tok.inner.encode_bytes(bytes(text, len, "text")?)?;
        write_out(&ids, out_ids, cap, out_len)
    })
}

/// # Safety
/// `text` must be readable for `len` bytes and `out_count` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn graftok_token_count(
    tok: *const GraftokTokenizer,
    text: *const u8,
    len: usize,
    out_count: *mut usize,
) -> GraftokStatus {
    guard(|| {
        let tok = handle(tok)?;
        if out_count.is_null() {
            return Err(null("out_count"));
        }
        let text = std::str::from_utf8(bytes(text, len, "text")?)
            .map_err(|_| Error::InvalidUtf8 { line: None })?;
        *out_count = tok.inner.token_count(text);
        Ok(())
    })
}

/// Decodes ids to UTF-8 bytes (not NUL-terminated). With `lossy` false,
/// output that is not valid UTF-8 is an error; otherwise it is repaired with
/// U+FFFD.
///
/// # Safety
/// `ids` must be readable for `n` ids, `out` writable for `cap` bytes,
/// `out_len` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn graftok_decode(
    tok: *const GraftokTokenizer,
    ids: *const u32,
    n: usize,
    lossy: bool,
    out: *mut u8,
    cap: usize,
    out_len: *mut usize,
) -> GraftokStatus {
    guard(|| {
        let tok = handle(tok)?;
        let ids = if n == 0 {
            &[][..]
        } else if ids.is_null() {
            return Err(null("ids"));
        } else {
            slice::from_raw_parts(ids, n)
        };
        let mode = if lossy { DecodeMode::Lossy } else { DecodeMode::Strict };
        let text = tok.inner.decode(ids, mode)?;
        write_out(text.as_bytes(), out, cap, out_len)
    })
}

/// Builds the transcription prompt for `language`.
///
/// # Safety
/// `language` must be a NUL-terminated string, `out_ids` writable for `cap`
/// ids, `out_len` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn graftok_build_prompt(
    tok: *const GraftokTokenizer,
    language: *const c_char,
    use_family_prompt: bool,
    timestamps: bool,
    out_ids: *mut u32,
    cap: usize,
    out_len: *mut usize,
) -> GraftokStatus {
    guard(|| {
        let tok = handle(tok)?;
        let language = c_str(language, "language")?;
        let options = PromptOptions {
            timestamps,
            use_family_prompt,
            ..Default::default()
        };
        let prompt = build_prompt(language, options, tok.inner.vocab(), &tok.families)?;
        write_out(&prompt.ids, out_ids, cap, out_len)
    })
}

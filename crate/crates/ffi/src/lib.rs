//! C interface to specshape.
//!
//! Objects are opaque handles created and released through this API. Every
//! fallible call returns a [`SpecshapeStatus`]; on failure, the message for
//! the calling thread is available from [`specshape_last_error`]. Signal
//! matrices are `num_nodes x num_signals`, column-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use specshape::filtering::{filter_bank_apply, Damping, FilterMode, SignalBatch};
use specshape::graphs::{build_laplacian, generate_graph, Edge, Graph, GraphFamily, LaplacianKind, LaplacianOperator};
use specshape::kernel::{init_bank, Activation, ShapedFilterBank, DEFAULT_LAYER_SIZES};
use specshape::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecshapeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Degenerate = 3,
    Unsupported = 4,
    Contract = 5,
    Numeric = 6,
    Format = 7,
    Io = 8,
    Panic = 9,
}

impl From<&Error> for SpecshapeStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parameter(_) | Error::Config(_) => SpecshapeStatus::InvalidArgument,
            Error::Degenerate(_) => SpecshapeStatus::Degenerate,
            Error::Capability(_) => SpecshapeStatus::Unsupported,
            Error::Contract(_) => SpecshapeStatus::Contract,
            Error::Numeric(_) => SpecshapeStatus::Numeric,
            Error::Format { .. } => SpecshapeStatus::Format,
            Error::Io { .. } => SpecshapeStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecshapeLaplacian {
    Combinatorial = 0,
    Normalized = 1,
}

impl From<SpecshapeLaplacian> for LaplacianKind {
    fn from(k: SpecshapeLaplacian) -> Self {
        match k {
            SpecshapeLaplacian::Combinatorial => LaplacianKind::Combinatorial,
            SpecshapeLaplacian::Normalized => LaplacianKind::Normalized,
        }
    }
}

/// A graph together with its Laplacian.
pub struct SpecshapeGraph {
    lap: LaplacianOperator,
}

/// A shaped filter bank.
pub struct SpecshapeBank {
    bank: ShapedFilterBank,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Null(&'static str),
    Lib(Error),
    Arg(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SpecshapeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SpecshapeStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(&format!("{what} is null"));
            SpecshapeStatus::NullPointer
        }
        Ok(Err(Failure::Arg(msg))) => {
            set_error(&msg);
            SpecshapeStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            SpecshapeStatus::from(&e)
        }
        Err(_) => {
            set_error("internal panic");
            SpecshapeStatus::Panic
        }
    }
}

unsafe fn non_null<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Arg(format!("{what} is not UTF-8")))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn specshape_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn specshape_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Build a graph from `num_edges` weighted edges.
///
/// # Safety
/// `us`, `vs` and `weights` must each point to `num_edges` readable values;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn specshape_graph_from_edges(
    num_nodes: usize,
    us: *const usize,
    vs: *const usize,
    weights: *const f64,
    num_edges: usize,
    kind: SpecshapeLaplacian,
    out: *mut *mut SpecshapeGraph,
) -> SpecshapeStatus {
    guard(|| {
        let us = slice(us, num_edges, "us")?;
        let vs = slice(vs, num_edges, "vs")?;
        let ws = slice(weights, num_edges, "weights")?;
        let edges = (0..num_edges).map(|i| Edge {
            u: us[i],
            v: vs[i],
            weight: ws[i],
        });
        let graph = Graph::new(num_nodes, edges)?;
        let lap = build_laplacian(&graph, kind.into())?;
        emit(out, SpecshapeGraph { lap })
    })
}

/// Draw a graph from a generator given as JSON, e.g.
/// `{"family": "erdos_renyi", "n": 32, "p": 0.3}`.
///
/// # Safety
/// `family_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn specshape_graph_generate(
    family_json: *const c_char,
    kind: SpecshapeLaplacian,
    seed: u64,
    out: *mut *mut SpecshapeGraph,
) -> SpecshapeStatus {
    guard(|| {
        let text = str_arg(family_json, "family_json")?;
        let family: GraphFamily = serde_json::from_str(text)
            .map_err(|e| Failure::Arg(format!("graph family: {e}")))?;
        let graph = generate_graph(&family, seed)?;
        let lap = build_laplacian(&graph, kind.into())?;
        emit(out, SpecshapeGraph { lap })
    })
}

/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn specshape_graph_num_nodes(graph: *const SpecshapeGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.lap.num_nodes())
}

/// Upper bound on the Laplacian spectrum used for filtering; NaN for a null handle.
///
/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn specshape_graph_lambda_max(graph: *const SpecshapeGraph) -> f64 {
    graph.as_ref().map_or(f64::NAN, |g| g.lap.lambda_max())
}

/// # Safety
/// `graph` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn specshape_graph_free(graph: *mut SpecshapeGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Fresh bank with `k` shaping components and the default baseline network.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn specshape_bank_new(
    k: usize,
    lambda_max: f64,
    seed: u64,
    out: *mut *mut SpecshapeBank,
) -> SpecshapeStatus {
    guard(|| {
        let bank = init_bank(k, lambda_max, seed, &DEFAULT_LAYER_SIZES, Activation::Tanh)?;
        emit(out, SpecshapeBank { bank })
    })
}

/// Load a bank from its JSON document (as written by checkpoints or
/// [`specshape_bank_to_json`]).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn specshape_bank_from_json(
    json: *const c_char,
    out: *mut *mut SpecshapeBank,
) -> SpecshapeStatus {
    guard(|| {
        let bank = ShapedFilterBank::from_json(str_arg(json, "json")?)?;
        emit(out, SpecshapeBank { bank })
    })
}

/// Serialize a bank. The string must be released with [`specshape_string_free`].
///
/// # Safety
/// `bank` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn specshape_bank_to_json(
    bank: *const SpecshapeBank,
    out: *mut *mut c_char,
) -> SpecshapeStatus {
    guard(|| {
        let bank = non_null(bank, "bank")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let text = CString::new(bank.bank.to_json()).expect("JSON has no NUL");
        *out = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `bank` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn specshape_bank_num_components(bank: *const SpecshapeBank) -> usize {
    bank.as_ref().map_or(0, |b| b.bank.num_components())
}

/// Total response at `len` frequencies.
///
/// # Safety
/// `bank` must be a live handle; `lambdas` and `out` must each hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn specshape_bank_eval(
    bank: *const SpecshapeBank,
    lambdas: *const f64,
    len: usize,
    out: *mut f64,
) -> SpecshapeStatus {
    guard(|| {
        let bank = non_null(bank, "bank")?;
        let lambdas = slice(lambdas, len, "lambdas")?;
        if len > 0 && out.is_null() {
            return Err(Failure::Null("out"));
        }
        let values = bank.bank.eval(lambdas);
        if len > 0 {
            ptr::copy_nonoverlapping(values.as_ptr(), out, len);
        }
        Ok(())
    })
}

/// # Safety
/// `bank` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn specshape_bank_free(bank: *mut SpecshapeBank) {
    if !bank.is_null() {
        drop(Box::from_raw(bank));
    }
}

/// Filter `num_signals` column-major signals on a graph with a bank's response.
/// `degree == 0` selects exact filtering through an eigendecomposition;
/// otherwise a Chebyshev expansion of that degree is used, with Jackson damping
/// when `jackson` is true.
///
/// # Safety
/// Handles must be live; `x` and `y` must each hold `num_nodes * num_signals`
/// values, where `num_nodes` is the graph's node count. `y` may not alias `x`.
#[no_mangle]
pub unsafe extern "C" fn specshape_filter_apply(
    bank: *const SpecshapeBank,
    graph: *const SpecshapeGraph,
    degree: usize,
    jackson: bool,
    x: *const f64,
    num_signals: usize,
    y: *mut f64,
) -> SpecshapeStatus {
    guard(|| {
        let bank = non_null(bank, "bank")?;
        let graph = non_null(graph, "graph")?;
        let n = graph.lap.num_nodes();
        let len = n
            .checked_mul(num_signals)
            .ok_or_else(|| Failure::Arg("signal matrix size overflows".into()))?;
        let x = slice(x, len, "x")?;
        if len > 0 && y.is_null() {
            return Err(Failure::Null("y"));
        }
        let batch = SignalBatch::from_column_major(n, num_signals, x.to_vec())?;
        let mode = if degree == 0 {
            FilterMode::Exact
        } else {
            FilterMode::Chebyshev {
                degree,
                damping: if jackson { Damping::Jackson } else { Damping::None },
            }
        };
        let out = filter_bank_apply(&bank.bank, &graph.lap, &batch, mode)?;
        if len > 0 {
            ptr::copy_nonoverlapping(out.as_column_major().as_ptr(), y, len);
        }
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn specshape_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

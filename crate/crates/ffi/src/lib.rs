//! C ABI for the `localtime` library.
//!
//! Chains are opaque handles created by [`lt_chain_new`] and released with
//! [`lt_chain_free`]. Every other function returns a status code (`LT_OK` on
//! success) and writes its result through an out-pointer. After a failure,
//! [`lt_last_error`] describes what went wrong on the calling thread.
//!
//! Vertex arguments named `vb` select the endpoint: a negative value means a
//! free endpoint, otherwise the walk is pinned to end at `vb` and the result
//! is the unnormalized sum over those paths.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use localtime::graph::{Endpoint, EnsembleSpec, TransitionMatrix};
use localtime::montecarlo::{self, Functional, SimulationConfig};
use localtime::{asymptotics, exact, zdomain, Error};

pub const LT_OK: i32 = 0;
pub const LT_NULL_POINTER: i32 = 1;
pub const LT_INVALID_INPUT: i32 = 2;
pub const LT_COMPUTATION_FAILED: i32 = 3;
pub const LT_BUFFER_TOO_SMALL: i32 = 4;
pub const LT_PANIC: i32 = 5;

/// Weights are normalized row by row.
pub const LT_MODE_ADJACENCY: i32 = 0;
/// Weights are probabilities and only validated.
pub const LT_MODE_STOCHASTIC: i32 = 1;

/// Opaque transition matrix.
pub struct LtChain {
    p: TransitionMatrix,
}

/// Functionals for [`lt_simulate`]: `L(a)`.
pub const LT_FUNCTIONAL_MEAN: i32 = 0;
/// `L(a) L(b)`.
pub const LT_FUNCTIONAL_PRODUCT: i32 = 1;
/// `[L(a) == b]`.
pub const LT_FUNCTIONAL_INDICATOR: i32 = 2;
/// `[L(a) == 0]`.
pub const LT_FUNCTIONAL_ZERO_VISIT: i32 = 3;

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LtEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub trials_used: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> i32 {
    if e.is_input_error() {
        LT_INVALID_INPUT
    } else {
        LT_COMPUTATION_FAILED
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (i32, String)>) -> i32 {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LT_OK,
        Ok(Err((code, message))) => {
            set_error(message);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            LT_PANIC
        }
    }
}

fn lift(e: Error) -> (i32, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (i32, String) {
    (LT_NULL_POINTER, format!("{what} is null"))
}

unsafe fn chain<'a>(c: *const LtChain) -> Result<&'a LtChain, (i32, String)> {
    c.as_ref().ok_or_else(|| null("chain"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), (i32, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn endpoint(vb: i64) -> Endpoint {
    if vb < 0 {
        Endpoint::Free
    } else {
        Endpoint::Fixed(vb as usize)
    }
}

fn spec(va: usize, vb: i64, n: usize) -> EnsembleSpec {
    EnsembleSpec { start: va, horizon: n, endpoint: endpoint(vb) }
}

/// Builds a chain from `size * size` row-major weights.
///
/// # Safety
/// `entries` must point to `size * size` readable doubles and `out` to a
/// writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn lt_chain_new(entries: *const f64, size: usize, mode: i32, out: *mut *mut LtChain) -> i32 {
    guard(|| {
        if entries.is_null() {
            return Err(null("entries"));
        }
        if out.is_null() {
            return Err(null("output pointer"));
        }
        if size == 0 {
            return Err((LT_INVALID_INPUT, "size must be positive".into()));
        }
        let len = size.checked_mul(size).ok_or((LT_INVALID_INPUT, "size overflows".to_string()))?;
        let flat = std::slice::from_raw_parts(entries, len);
        let rows: Vec<Vec<f64>> = flat.chunks(size).map(<[f64]>::to_vec).collect();
        let p = match mode {
            LT_MODE_ADJACENCY => TransitionMatrix::from_adjacency_rows(&rows),
            LT_MODE_STOCHASTIC => TransitionMatrix::from_rows(&rows),
            other => return Err((LT_INVALID_INPUT, format!("unknown mode {other}"))),
        }
        .map_err(lift)?;
        *out = Box::into_raw(Box::new(LtChain { p }));
        Ok(())
    })
}

/// Releases a chain. Null is ignored.
///
/// # Safety
/// `chain` must come from [`lt_chain_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lt_chain_free(chain: *mut LtChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lt_chain_size(chain: *const LtChain) -> usize {
    chain.as_ref().map_or(0, |c| c.p.size())
}

/// Probability `p(from, to)`.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_chain_entry(chain: *const LtChain, from: usize, to: usize, out: *mut f64) -> i32 {
    guard(|| {
        let c = self::chain(chain)?;
        c.p.check_vertex(from).map_err(lift)?;
        c.p.check_vertex(to).map_err(lift)?;
        write(out, c.p.get(from, to))
    })
}

/// `<1>`: `P^n[va, vb]` for a fixed endpoint, 1 for a free one.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_normalization(chain: *const LtChain, va: usize, vb: i64, n: usize, out: *mut f64) -> i32 {
    guard(|| {
        let c = self::chain(chain)?;
        write(out, exact::normalization(&c.p, &spec(va, vb, n)).map_err(lift)?)
    })
}

/// Mean local time `<L(v1)>`.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_mean(chain: *const LtChain, va: usize, vb: i64, v1: usize, n: usize, out: *mut f64) -> i32 {
    guard(|| {
        let c = self::chain(chain)?;
        write(out, exact::mean_local_time(&c.p, &spec(va, vb, n), v1).map_err(lift)?)
    })
}

/// `<L(v1) L(v2)>`.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_correlation(
    chain: *const LtChain,
    va: usize,
    vb: i64,
    v1: usize,
    v2: usize,
    n: usize,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let c = self::chain(chain)?;
        write(out, exact::correlation(&c.p, &spec(va, vb, n), v1, v2).map_err(lift)?)
    })
}

/// Weight of the paths that never visit `v`.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_zero_visit(chain: *const LtChain, va: usize, vb: i64, v: usize, n: usize, out: *mut f64) -> i32 {
    guard(|| {
        let c = self::chain(chain)?;
        write(out, exact::zero_visit_probability(&c.p, &spec(va, vb, n), v).map_err(lift)?)
    })
}

/// Distribution of `L(v)` for `l = 0..len`. When `len <= n` the last entry
/// holds every count `>= len - 1`.
///
/// # Safety
/// `chain` must be a live handle and `buffer` must hold `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn lt_distribution(
    chain: *const LtChain,
    va: usize,
    vb: i64,
    v: usize,
    n: usize,
    buffer: *mut f64,
    len: usize,
) -> i32 {
    guard(|| {
        let c = self::chain(chain)?;
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        if len == 0 {
            return Err((LT_BUFFER_TOO_SMALL, "buffer needs at least one entry".into()));
        }
        let table = exact::local_time_distribution(&c.p, &spec(va, vb, n), v, len - 1).map_err(lift)?;
        std::slice::from_raw_parts_mut(buffer, len).copy_from_slice(&table.mass);
        Ok(())
    })
}

/// Stationary distribution into `buffer` (`len >= size`).
///
/// # Safety
/// `chain` must be a live handle and `buffer` must hold `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn lt_stationary(chain: *const LtChain, buffer: *mut f64, len: usize) -> i32 {
    guard(|| {
        let c = self::chain(chain)?;
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        if len < c.p.size() {
            return Err((LT_BUFFER_TOO_SMALL, format!("buffer holds {len}, need {}", c.p.size())));
        }
        let pi = asymptotics::invariant_distribution(&c.p).map_err(lift)?.pi;
        std::slice::from_raw_parts_mut(buffer, pi.len()).copy_from_slice(&pi);
        Ok(())
    })
}

/// `<va| (P - zI)^-1 |vb>` for real `z > 1`.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_resolvent(chain: *const LtChain, z: f64, va: usize, vb: usize, out: *mut f64) -> i32 {
    guard(|| {
        let c = self::chain(chain)?;
        write(out, zdomain::resolvent_element(&c.p, z, va, vb).map_err(lift)?)
    })
}

/// `<va| (P e^U - zI)^-1 |vb>` with `U = u |v><v|`.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_deformed_resolvent(
    chain: *const LtChain,
    z: f64,
    v: usize,
    u: f64,
    va: usize,
    vb: usize,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let c = self::chain(chain)?;
        write(out, zdomain::deformed_resolvent_element(&c.p, z, v, u, va, vb).map_err(lift)?)
    })
}

/// Monte Carlo estimate of a path functional. For a fixed endpoint only the
/// paths ending at `vb` are kept, so the estimate is the normalized average.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lt_simulate(
    chain: *const LtChain,
    functional: i32,
    a: usize,
    b: usize,
    va: usize,
    vb: i64,
    n: usize,
    seed: u64,
    trials: u64,
    out: *mut LtEstimate,
) -> i32 {
    guard(|| {
        let c = self::chain(chain)?;
        let f = match functional {
            LT_FUNCTIONAL_MEAN => Functional::Mean { v1: a },
            LT_FUNCTIONAL_PRODUCT => Functional::Product { v1: a, v2: b },
            LT_FUNCTIONAL_INDICATOR => Functional::Indicator { v: a, l: b },
            LT_FUNCTIONAL_ZERO_VISIT => Functional::ZeroVisit { v: a },
            other => return Err((LT_INVALID_INPUT, format!("unknown functional {other}"))),
        };
        let config = SimulationConfig::new(seed, trials, spec(va, vb, n)).map_err(lift)?;
        let e = montecarlo::estimate(&c.p, &config, f).map_err(lift)?;
        write(out, LtEstimate { mean: e.mean, standard_error: e.standard_error, trials_used: e.trials_used })
    })
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn lt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

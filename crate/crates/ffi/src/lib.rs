//! C ABI for spinlab.
//!
//! Every fallible function returns a [`SpinlabStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`spinlab_last_error_message`]. Handles are opaque and must
//! be released with the matching `_free` function.

#![allow(clippy::missing_safety_doc)]

use spinlab::dynamics::{ChainState, DynamicsKind, DynamicsSpec};
use spinlab::exact::{spectral_report, transition_matrix};
use spinlab::uniqueness;
use spinlab::{Configuration, Error, GibbsTable, Graph, TwoSpinSystem};
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Infeasible = 3,
    CapExceeded = 4,
    Numeric = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinlabDynamicsKind {
    Glauber = 0,
    Block = 1,
    Field = 2,
    ProjectedBlock = 3,
}

/// Chain selector. `theta` is read by field dynamics, `ell` by block and
/// projected block dynamics, `k` by projected block dynamics.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpinlabDynamics {
    pub kind: SpinlabDynamicsKind,
    pub theta: f64,
    pub ell: usize,
    pub k: usize,
}

/// A two-spin system on a graph.
pub struct SpinlabSystem {
    inner: TwoSpinSystem,
}

/// A running Markov chain with its own random stream.
pub struct SpinlabChain {
    state: ChainState,
    kind: DynamicsKind,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SpinlabStatus {
    match e {
        Error::Infeasible => SpinlabStatus::Infeasible,
        Error::Cap(_) => SpinlabStatus::CapExceeded,
        Error::NotReversible(_) => SpinlabStatus::Numeric,
        _ => SpinlabStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (SpinlabStatus, String)>) -> SpinlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpinlabStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SpinlabStatus::Panic
        }
    }
}

fn lib<T>(r: spinlab::Result<T>) -> Result<T, (SpinlabStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SpinlabStatus, String) {
    (SpinlabStatus::NullPointer, format!("{what} is null"))
}

fn kind_of(d: &SpinlabDynamics) -> DynamicsKind {
    match d.kind {
        SpinlabDynamicsKind::Glauber => DynamicsKind::Glauber,
        SpinlabDynamicsKind::Block => DynamicsKind::Block { ell: d.ell },
        SpinlabDynamicsKind::Field => DynamicsKind::Field { theta: d.theta },
        SpinlabDynamicsKind::ProjectedBlock => DynamicsKind::ProjectedBlock { k: d.k, ell: d.ell },
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, or 0 if none.
#[no_mangle]
pub unsafe extern "C" fn spinlab_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Static version string.
#[no_mangle]
pub extern "C" fn spinlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds a system with a uniform field. `edges` holds `2 * m` vertex
/// indices.
#[no_mangle]
pub unsafe extern "C" fn spinlab_system_new(
    n: usize,
    edges: *const u32,
    m: usize,
    beta: f64,
    gamma: f64,
    lambda: f64,
    out: *mut *mut SpinlabSystem,
) -> SpinlabStatus {
    if n == 0 {
        return spinlab_system_new_with_fields(n, edges, m, beta, gamma, ptr::null(), out);
    }
    let fields = vec![lambda; n];
    spinlab_system_new_with_fields(n, edges, m, beta, gamma, fields.as_ptr(), out)
}

/// Builds a system with per-vertex fields (`n` values).
#[no_mangle]
pub unsafe extern "C" fn spinlab_system_new_with_fields(
    n: usize,
    edges: *const u32,
    m: usize,
    beta: f64,
    gamma: f64,
    fields: *const f64,
    out: *mut *mut SpinlabSystem,
) -> SpinlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if m > 0 && edges.is_null() {
            return Err(null("edges"));
        }
        if n > 0 && fields.is_null() {
            return Err(null("fields"));
        }
        let raw = if m > 0 { std::slice::from_raw_parts(edges, 2 * m) } else { &[] };
        let pairs: Vec<(usize, usize)> = raw.chunks(2).map(|p| (p[0] as usize, p[1] as usize)).collect();
        let graph = lib(Graph::new(n, &pairs))?;
        let f = if n > 0 { std::slice::from_raw_parts(fields, n).to_vec() } else { Vec::new() };
        let inner = lib(TwoSpinSystem::with_fields(graph, beta, gamma, f))?;
        *out = Box::into_raw(Box::new(SpinlabSystem { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn spinlab_system_free(sys: *mut SpinlabSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

#[no_mangle]
pub unsafe extern "C" fn spinlab_system_num_vertices(sys: *const SpinlabSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.n())
}

/// Exact `Pr[σ_v = +1]`.
#[no_mangle]
pub unsafe extern "C" fn spinlab_marginal(sys: *const SpinlabSystem, v: usize, out: *mut f64) -> SpinlabStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("system"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if v >= s.inner.n() {
            return Err((SpinlabStatus::InvalidArgument, format!("vertex {v} out of range")));
        }
        *out = lib(GibbsTable::enumerate(&s.inner))?.marginal_plus(v);
        Ok(())
    })
}

/// Exact spectral gap `1 − λ₂` of the chosen chain.
#[no_mangle]
pub unsafe extern "C" fn spinlab_spectral_gap(
    sys: *const SpinlabSystem,
    dynamics: SpinlabDynamics,
    out: *mut f64,
) -> SpinlabStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("system"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let table = lib(GibbsTable::enumerate(&s.inner))?;
        let kind = kind_of(&dynamics);
        lib(kind.validate(table.free_vertices().len()))?;
        let p = lib(transition_matrix(&kind, &table))?;
        *out = lib(spectral_report(&p))?.gap;
        Ok(())
    })
}

/// Starts a chain. `start` holds `n` spins in `{−1, +1}`; null starts from
/// all `−1`.
#[no_mangle]
pub unsafe extern "C" fn spinlab_chain_new(
    sys: *const SpinlabSystem,
    dynamics: SpinlabDynamics,
    seed: u64,
    start: *const i8,
    out: *mut *mut SpinlabChain,
) -> SpinlabStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("system"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let n = s.inner.n();
        let start = if start.is_null() {
            Configuration::all_minus(n)
        } else {
            lib(Configuration::new(std::slice::from_raw_parts(start, n).to_vec()))?
        };
        let kind = kind_of(&dynamics);
        let spec = DynamicsSpec::new(kind, s.inner.clone());
        let state = lib(ChainState::new(&spec, start, seed))?;
        *out = Box::into_raw(Box::new(SpinlabChain { state, kind }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn spinlab_chain_free(chain: *mut SpinlabChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Advances the chain by `steps` transitions.
#[no_mangle]
pub unsafe extern "C" fn spinlab_chain_step(chain: *mut SpinlabChain, steps: u64) -> SpinlabStatus {
    guard(|| {
        let c = chain.as_mut().ok_or_else(|| null("chain"))?;
        let kind = c.kind;
        for _ in 0..steps {
            lib(c.state.step(&kind))?;
        }
        Ok(())
    })
}

/// Copies the current spins into `buf`, which must hold `len >= n` values.
#[no_mangle]
pub unsafe extern "C" fn spinlab_chain_config(chain: *const SpinlabChain, buf: *mut i8, len: usize) -> SpinlabStatus {
    guard(|| {
        let c = chain.as_ref().ok_or_else(|| null("chain"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let spins = c.state.config().spins();
        if len < spins.len() {
            return Err((SpinlabStatus::InvalidArgument, format!("buffer holds {len} spins, need {}", spins.len())));
        }
        ptr::copy_nonoverlapping(spins.as_ptr(), buf, spins.len());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn spinlab_chain_steps(chain: *const SpinlabChain) -> u64 {
    chain.as_ref().map_or(0, |c| c.state.steps())
}

/// Fixed point of `x ↦ λ((βx+1)/(x+γ))^d`.
#[no_mangle]
pub unsafe extern "C" fn spinlab_fixed_point(beta: f64, gamma: f64, lambda: f64, d: usize, out: *mut f64) -> SpinlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lib(uniqueness::fixed_point(beta, gamma, lambda, d))?;
        Ok(())
    })
}

/// Decay rate `f_d` at the fixed point.
#[no_mangle]
pub unsafe extern "C" fn spinlab_decay_at_fixed_point(
    beta: f64,
    gamma: f64,
    lambda: f64,
    d: usize,
    out: *mut f64,
) -> SpinlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lib(uniqueness::decay_at_fixed_point(beta, gamma, lambda, d))?.f;
        Ok(())
    })
}

/// Hardcore uniqueness threshold for maximum degree `delta_max >= 3`.
#[no_mangle]
pub unsafe extern "C" fn spinlab_lambda_c(delta_max: usize, out: *mut f64) -> SpinlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lib(uniqueness::lambda_c(delta_max))?;
        Ok(())
    })
}

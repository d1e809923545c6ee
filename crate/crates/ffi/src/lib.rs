//! C interface to the lambdaext engine.
//!
//! Every function returns an [`LxStatus`]. On failure the message is kept
//! per thread and can be read with [`lx_last_error`]. Strings handed out by
//! the library must be released with [`lx_string_free`], modules with
//! [`lx_module_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use lambdaext::expr::{parse_chain, parse_lambda};
use lambdaext::modules::{module_delta, module_from_str, resolve, FiniteAModule};
use lambdaext::Error;

pub const LX_ABI_VERSION: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    UnknownName = 4,
    Domain = 5,
    InvalidModule = 6,
    WindowTooLarge = 7,
    NotACycle = 8,
    CacheCorrupt = 9,
    Io = 10,
    Internal = 11,
}

/// A module of cells with a Steenrod action.
pub struct LxModule {
    inner: Arc<FiniteAModule>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> LxStatus {
    match e {
        Error::Parse { .. } | Error::ScriptParse { .. } => LxStatus::Parse,
        Error::UnknownName(_) => LxStatus::UnknownName,
        Error::Domain(_) | Error::ZeroChain | Error::ModuleMismatch(_) | Error::DimensionMismatch(_) | Error::NotInSpan => LxStatus::Domain,
        Error::InvalidAction(_) | Error::NotActionClosed(_) | Error::NotPType | Error::InvalidMorphism(_) => LxStatus::InvalidModule,
        Error::WindowTooLarge { .. } | Error::RewriteFuelExhausted | Error::NotConverged { .. } => LxStatus::WindowTooLarge,
        Error::NotACycle | Error::ResidualNotACycle => LxStatus::NotACycle,
        Error::CacheCorrupt(_) | Error::RegistryCorrupt(_) => LxStatus::CacheCorrupt,
        Error::Io(_) => LxStatus::Io,
    }
}

/// Run `f`, turning errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (LxStatus, String)>) -> LxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LxStatus::Ok
        }
        Ok(Err((st, msg))) => {
            set_error(&msg);
            st
        }
        Err(_) => {
            set_error("internal error");
            LxStatus::Internal
        }
    }
}

fn lx(e: Error) -> (LxStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (LxStatus, String)> {
    if p.is_null() {
        return Err((LxStatus::NullPointer, format!("{} is null", what)));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (LxStatus::InvalidUtf8, format!("{} is not UTF-8", what)))
}

fn null_out(what: &str) -> (LxStatus, String) {
    (LxStatus::NullPointer, format!("{} is null", what))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (LxStatus, String)> {
    let c = CString::new(s).map_err(|_| (LxStatus::Internal, "string contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

#[no_mangle]
pub extern "C" fn lx_abi_version() -> u32 {
    LX_ABI_VERSION
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn lx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Build a module from a spec such as `S0`, `P(1,8)`, `Pt62` or `file:<path>`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lx_module_new(spec: *const c_char, out: *mut *mut LxModule) -> LxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_out("out"));
        }
        *out = ptr::null_mut();
        let m = resolve(str_arg(spec, "spec")?, None).map_err(lx)?;
        *out = Box::into_raw(Box::new(LxModule { inner: m }));
        Ok(())
    })
}

/// Build a module from the text of a module file.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lx_module_from_toml(text: *const c_char, out: *mut *mut LxModule) -> LxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_out("out"));
        }
        *out = ptr::null_mut();
        let m = module_from_str(str_arg(text, "text")?).map_err(lx)?;
        *out = Box::into_raw(Box::new(LxModule { inner: m }));
        Ok(())
    })
}

/// # Safety
/// `m` must come from a module constructor and not be freed already. Null
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn lx_module_free(m: *mut LxModule) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Name of the module, to be freed with [`lx_string_free`].
///
/// # Safety
/// `m` must be a live module and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lx_module_name(m: *const LxModule, out: *mut *mut c_char) -> LxStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null_out("module"))?;
        if out.is_null() {
            return Err(null_out("out"));
        }
        put_string(out, m.inner.name().to_string())
    })
}

/// `dim Ext^{s,t}` of the module.
///
/// # Safety
/// `m` must be a live module and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lx_ext_dim(m: *const LxModule, s: u32, t: u32, out: *mut usize) -> LxStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null_out("module"))?;
        if out.is_null() {
            return Err(null_out("out"));
        }
        *out = lambdaext::ext::ext_dim(&m.inner, s, t).map_err(lx)?;
        Ok(())
    })
}

/// Admissible form of a lambda algebra expression such as `l3 l7 + l5^2`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lx_chain_normalize(text: *const c_char, out: *mut *mut c_char) -> LxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_out("out"));
        }
        *out = ptr::null_mut();
        let c = parse_lambda(str_arg(text, "text")?).map_err(lx)?;
        put_string(out, c.normalize().to_string())
    })
}

/// Differential of a chain. With a null module the chain is a lambda
/// algebra expression, otherwise a chain like `e2 l1 + e1 l2` in `m`.
///
/// # Safety
/// `m` must be null or a live module, `text` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lx_chain_delta(m: *const LxModule, text: *const c_char, out: *mut *mut c_char) -> LxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_out("out"));
        }
        *out = ptr::null_mut();
        let text = str_arg(text, "text")?;
        let s = match m.as_ref() {
            None => lambdaext::lambda::delta(&parse_lambda(text).map_err(lx)?).to_string(),
            Some(m) => module_delta(&parse_chain(&m.inner, text).map_err(lx)?).to_string(),
        };
        put_string(out, s)
    })
}

/// The vector-field number of `n >= 2`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lx_rho(n: u64, out: *mut u64) -> LxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_out("out"));
        }
        *out = lambdaext::rho::rho(n).map_err(lx)?;
        Ok(())
    })
}

/// Cap on the chain basis of a single bidegree.
#[no_mangle]
pub extern "C" fn lx_set_max_basis(cap: usize) {
    lambdaext::ext::set_max_basis(cap);
}

/// # Safety
/// `s` must come from this library and not be freed already. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn lx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

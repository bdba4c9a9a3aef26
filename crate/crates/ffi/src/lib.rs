//! C interface: opaque space handles, status codes and JSON strings.
//!
//! Every function returns an [`AcgStatus`]. On failure the message is kept per
//! thread and read with [`acg_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;

use acgcl::cl::Battery;
use acgcl::exact::rank_i64;
use acgcl::flats::Space;
use acgcl::geometry::{Case, SpaceConfig};
use acgcl::scheme::SchemeTables;
use acgcl::Error;

/// Status codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AcgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Unsupported = 3,
    BoundExceeded = 4,
    Internal = 5,
    Panic = 6,
}

/// Form of the classical space.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AcgCase {
    Symplectic = 0,
    Unitary = 1,
    Orthogonal = 2,
}

/// Opaque handle to a classical affine space and its maximal flats.
pub struct AcgSpace {
    space: Space,
    battery: OnceLock<Result<Battery, (AcgStatus, String)>>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> AcgStatus {
    match e {
        Error::NotPrime(_) | Error::UnsupportedOrder(_) | Error::NotSquare(_) | Error::UnsupportedConfig(_) => {
            AcgStatus::Unsupported
        }
        Error::BoundExceeded { .. } => AcgStatus::BoundExceeded,
        Error::Inconsistent(_) | Error::NonIntegral(_) => AcgStatus::Internal,
        _ => AcgStatus::InvalidArgument,
    }
}

struct Fail(AcgStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AcgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AcgStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(&msg);
            AcgStatus::Panic
        }
    }
}

fn null() -> Fail {
    Fail(AcgStatus::NullPointer, "null pointer argument".into())
}

unsafe fn handle<'a>(p: *const AcgSpace) -> Result<&'a AcgSpace, Fail> {
    p.as_ref().ok_or_else(null)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

fn json_string(v: &serde_json::Value) -> Result<*mut c_char, Fail> {
    let s = serde_json::to_string(v).map_err(|e| Fail(AcgStatus::Internal, e.to_string()))?;
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Fail(AcgStatus::Internal, e.to_string()))
}

impl AcgSpace {
    fn battery(&self) -> Result<&Battery, Fail> {
        self.battery
            .get_or_init(|| Battery::new(self.space.clone()).map_err(|e| (status_of(&e), e.to_string())))
            .as_ref()
            .map_err(|(s, m)| Fail(*s, m.clone()))
    }
}

/// Builds the space of the given form over `F_q` in dimension `2ν`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn acg_space_new(form: AcgCase, q: u32, nu: u32, out: *mut *mut AcgSpace) -> AcgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let case = match form {
            AcgCase::Symplectic => Case::Symplectic,
            AcgCase::Unitary => Case::Unitary,
            AcgCase::Orthogonal => Case::Orthogonal,
        };
        let config = SpaceConfig::new(case, q, nu as usize)?;
        let space = Space::new(config)?;
        let h = Box::new(AcgSpace {
            space,
            battery: OnceLock::new(),
        });
        write(out, Box::into_raw(h))
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `space` must come from [`acg_space_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn acg_space_free(space: *mut AcgSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Number of points `q^{2ν}`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn acg_space_num_points(space: *const AcgSpace, out: *mut u64) -> AcgStatus {
    guard(|| write(out, handle(space)?.space.num_points() as u64))
}

/// Number of maximal totally isotropic flats.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn acg_space_num_flats(space: *const AcgSpace, out: *mut u64) -> AcgStatus {
    guard(|| write(out, handle(space)?.space.len() as u64))
}

/// Closed-form number of `(m,0)`-flats.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn acg_space_flat_count(space: *const AcgSpace, m: u32, out: *mut u64) -> AcgStatus {
    guard(|| {
        let c = handle(space)?.space.config();
        if m as usize > c.nu() {
            return Err(Fail(AcgStatus::InvalidArgument, format!("m = {m} exceeds nu")));
        }
        let n = u64::try_from(c.flat_count(m as usize))
            .map_err(|_| Fail(AcgStatus::BoundExceeded, "count exceeds 64 bits".into()))?;
        write(out, n)
    })
}

/// Exact rank of the point–flat incidence matrix.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn acg_space_incidence_rank(space: *const AcgSpace, out: *mut u64) -> AcgStatus {
    guard(|| {
        let m: Vec<Vec<i64>> = handle(space)?
            .space
            .incidence_matrix()
            .dense()
            .into_iter()
            .map(|r| r.into_iter().map(i64::from).collect())
            .collect();
        write(out, rank_i64(&m) as u64)
    })
}

/// Whether the flats `ids[0..len]` form a Cameron-Liebler set.
///
/// # Safety
/// `ids` must point to `len` readable values (or be null with `len == 0`).
#[no_mangle]
pub unsafe extern "C" fn acg_cl_test(space: *const AcgSpace, ids: *const u64, len: usize, out: *mut bool) -> AcgStatus {
    guard(|| {
        let h = handle(space)?;
        let ids: &[u64] = if len == 0 {
            &[]
        } else if ids.is_null() {
            return Err(null());
        } else {
            std::slice::from_raw_parts(ids, len)
        };
        let b = h.battery()?;
        let set = b.set(ids.iter().map(|&i| i as usize))?;
        let v = b.verdict(&set)?;
        if !v.agree() {
            return Err(Fail(AcgStatus::Internal, format!("membership tests disagree: {v:?}")));
        }
        write(out, v.is_cl())
    })
}

/// Parameters and counts as JSON; free with [`acg_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn acg_space_info_json(space: *const AcgSpace, out: *mut *mut c_char) -> AcgStatus {
    guard(|| {
        let s = &handle(space)?.space;
        let c = s.config();
        let v = serde_json::json!({
            "case": c.case(),
            "q": c.q().to_string(),
            "nu": c.nu().to_string(),
            "points": c.num_points().to_string(),
            "flats": s.len().to_string(),
            "flat_counts": (0..=c.nu()).map(|m| c.flat_count(m).to_string()).collect::<Vec<_>>(),
            "incidence_rank": c.incidence_rank().to_string(),
        });
        write(out, json_string(&v)?)
    })
}

/// Eigenmatrices, valencies and multiplicities as JSON; free with [`acg_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn acg_scheme_tables_json(space: *const AcgSpace, out: *mut *mut c_char) -> AcgStatus {
    guard(|| {
        let t = SchemeTables::for_config(handle(space)?.space.config())?;
        write(out, json_string(&t.to_json(true))?)
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn acg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failure on this thread; valid until the next call that fails.
#[no_mangle]
pub extern "C" fn acg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Copies the last error message (for callers that cannot hold the pointer).
pub fn last_error_message() -> String {
    unsafe { CStr::from_ptr(acg_last_error()) }.to_string_lossy().into_owned()
}

//! C ABI over the deepradar library.
//!
//! Every fallible function returns a [`DrStatus`]; on failure a message is
//! available from [`dr_last_error_message`] on the same thread. Objects are
//! opaque handles created by `*_open`/`*_load` and released with the
//! matching `*_free`. Panics never cross the boundary.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::sync::OnceLock;

use deepradar::dataset::{generate_example, DatasetError, DatasetManifest, Generator, Split, SplitReader};
use deepradar::lstm::{load_checkpoint, prepare_input, LstmError, Model};
use deepradar::waveforms::RadarClass;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    Numeric = 5,
    /// A split reader has no more records.
    End = 6,
    Internal = 7,
}

/// A loaded classifier.
pub struct DrModel {
    model: Model<f32>,
}

/// A streaming reader over a split file.
pub struct DrSplitReader {
    inner: SplitReader,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("interior NULs removed"));
}

fn fail(status: DrStatus, msg: impl Into<String>) -> DrStatus {
    set_error(msg);
    status
}

fn dataset_status(e: &DatasetError) -> DrStatus {
    match e {
        DatasetError::Io(_) => DrStatus::Io,
        DatasetError::Config(_) | DatasetError::InvalidManifest(_) => DrStatus::InvalidArgument,
        _ => DrStatus::Format,
    }
}

fn lstm_status(e: &LstmError) -> DrStatus {
    match e {
        LstmError::Io(_) => DrStatus::Io,
        LstmError::NonFinite(_) => DrStatus::Numeric,
        LstmError::ShapeMismatch { .. } | LstmError::LabelOutOfRange { .. } => DrStatus::InvalidArgument,
        _ => DrStatus::Format,
    }
}

fn guard(f: impl FnOnce() -> DrStatus) -> DrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(DrStatus::Internal, "internal panic"),
    }
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, DrStatus> {
    if p.is_null() {
        return Err(fail(DrStatus::NullPointer, "path is NULL"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| fail(DrStatus::InvalidArgument, "path is not valid UTF-8"))
}

/// Message describing the last failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Number of radar classes.
#[no_mangle]
pub extern "C" fn dr_class_count() -> u32 {
    RadarClass::ALL.len() as u32
}

/// Static name of radar class `index`, or NULL when out of range.
#[no_mangle]
pub extern "C" fn dr_class_name(index: u32) -> *const c_char {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    NAMES
        .get_or_init(|| {
            RadarClass::ALL
                .iter()
                .map(|c| CString::new(c.name()).expect("class names have no NUL"))
                .collect()
        })
        .get(index as usize)
        .map_or(ptr::null(), |s| s.as_ptr().cast())
}

/// Generate example `index` of radar class `class_index` at `snr_db`,
/// exactly as the training split of a dataset with `master_seed` would.
/// Writes `2 * 1024` interleaved I/Q floats to `out_iq`; `out_len` is the
/// buffer length in floats.
#[no_mangle]
pub unsafe extern "C" fn dr_generate_example(
    class_index: u32,
    snr_db: i16,
    master_seed: u64,
    index: u64,
    out_iq: *mut f32,
    out_len: usize,
) -> DrStatus {
    guard(|| {
        if out_iq.is_null() {
            return fail(DrStatus::NullPointer, "output buffer is NULL");
        }
        let manifest = DatasetManifest::deepradar2022(master_seed);
        if class_index as usize >= manifest.n_classes() {
            return fail(DrStatus::InvalidArgument, format!("class index {class_index} out of range"));
        }
        if out_len < 2 * manifest.signal_length {
            return fail(
                DrStatus::InvalidArgument,
                format!("output buffer holds {out_len} floats, need {}", 2 * manifest.signal_length),
            );
        }
        let generator = match Generator::from_manifest(&manifest) {
            Ok(g) => g,
            Err(e) => return fail(dataset_status(&e), e.to_string()),
        };
        match generate_example(&generator, &manifest, class_index as usize, snr_db, Split::Train, index as usize) {
            Ok(ex) => {
                let out = std::slice::from_raw_parts_mut(out_iq, ex.iq.len());
                out.copy_from_slice(&ex.iq);
                DrStatus::Ok
            }
            Err(e) => fail(dataset_status(&e), e.to_string()),
        }
    })
}

/// Load a checkpoint. On success `*out` receives a handle to release with
/// [`dr_model_free`].
#[no_mangle]
pub unsafe extern "C" fn dr_model_load(path: *const c_char, out: *mut *mut DrModel) -> DrStatus {
    guard(|| {
        if out.is_null() {
            return fail(DrStatus::NullPointer, "output handle is NULL");
        }
        *out = ptr::null_mut();
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_checkpoint(&path) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(DrModel { model }));
                DrStatus::Ok
            }
            Err(e) => fail(lstm_status(&e), format!("{}: {e}", path.display())),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn dr_model_free(model: *mut DrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of output classes, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn dr_model_num_classes(model: *const DrModel) -> u32 {
    model.as_ref().map_or(0, |m| m.model.n_classes as u32)
}

/// Parameter counts of the recurrent stack and the dense head.
#[no_mangle]
pub unsafe extern "C" fn dr_model_param_counts(model: *const DrModel, lstm: *mut u64, head: *mut u64) -> DrStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return fail(DrStatus::NullPointer, "model handle is NULL");
        };
        if lstm.is_null() || head.is_null() {
            return fail(DrStatus::NullPointer, "output pointer is NULL");
        }
        let c = m.model.param_counts();
        *lstm = c.lstm as u64;
        *head = c.head as u64;
        DrStatus::Ok
    })
}

/// Classify one signal of `n_samples` complex samples given as interleaved
/// I/Q floats. Class probabilities go to `probs` (`probs_len` must be at
/// least the class count; may be NULL when `probs_len` is 0) and the arg-max
/// class to `*class_out`.
#[no_mangle]
pub unsafe extern "C" fn dr_model_predict(
    model: *const DrModel,
    iq: *const f32,
    n_samples: usize,
    probs: *mut f32,
    probs_len: usize,
    class_out: *mut u32,
) -> DrStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return fail(DrStatus::NullPointer, "model handle is NULL");
        };
        if iq.is_null() || class_out.is_null() {
            return fail(DrStatus::NullPointer, "input or class pointer is NULL");
        }
        let n = m.model.n_classes;
        if probs_len > 0 && (probs.is_null() || probs_len < n) {
            return fail(DrStatus::InvalidArgument, format!("probability buffer must hold {n} floats"));
        }
        let signal = std::slice::from_raw_parts(iq, 2 * n_samples);
        let input = match prepare_input::<f32>(signal, m.model.input_domain) {
            Ok(x) => x,
            Err(e) => return fail(DrStatus::InvalidArgument, e.to_string()),
        };
        match m.model.forward(&input) {
            Ok(p) => {
                if probs_len > 0 {
                    std::slice::from_raw_parts_mut(probs, n).copy_from_slice(&p);
                }
                *class_out = deepradar::lstm::argmax(&p) as u32;
                DrStatus::Ok
            }
            Err(e) => fail(lstm_status(&e), e.to_string()),
        }
    })
}

/// Open a split file for streaming. Release with [`dr_split_free`].
#[no_mangle]
pub unsafe extern "C" fn dr_split_open(path: *const c_char, out: *mut *mut DrSplitReader) -> DrStatus {
    guard(|| {
        if out.is_null() {
            return fail(DrStatus::NullPointer, "output handle is NULL");
        }
        *out = ptr::null_mut();
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match SplitReader::open(&path) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(DrSplitReader { inner }));
                DrStatus::Ok
            }
            Err(e) => fail(dataset_status(&e), format!("{}: {e}", path.display())),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn dr_split_free(reader: *mut DrSplitReader) {
    if !reader.is_null() {
        drop(Box::from_raw(reader));
    }
}

/// Header fields of an open split; any output pointer may be NULL.
#[no_mangle]
pub unsafe extern "C" fn dr_split_info(
    reader: *const DrSplitReader,
    record_count: *mut u64,
    n_classes: *mut u32,
    signal_length: *mut u32,
) -> DrStatus {
    guard(|| {
        let Some(r) = reader.as_ref() else {
            return fail(DrStatus::NullPointer, "reader handle is NULL");
        };
        let h = r.inner.header();
        if let Some(p) = record_count.as_mut() {
            *p = h.record_count;
        }
        if let Some(p) = n_classes.as_mut() {
            *p = h.n_classes as u32;
        }
        if let Some(p) = signal_length.as_mut() {
            *p = h.signal_length;
        }
        DrStatus::Ok
    })
}

/// Read the next record. Returns `DR_STATUS_END` after the last one.
/// `iq_len` is the buffer length in floats (at least twice the signal
/// length).
#[no_mangle]
pub unsafe extern "C" fn dr_split_next(
    reader: *mut DrSplitReader,
    class_index: *mut u16,
    snr_db: *mut i16,
    iq: *mut f32,
    iq_len: usize,
) -> DrStatus {
    guard(|| {
        let Some(r) = reader.as_mut() else {
            return fail(DrStatus::NullPointer, "reader handle is NULL");
        };
        if class_index.is_null() || snr_db.is_null() || iq.is_null() {
            return fail(DrStatus::NullPointer, "output pointer is NULL");
        }
        let need = 2 * r.inner.header().signal_length as usize;
        if iq_len < need {
            return fail(DrStatus::InvalidArgument, format!("sample buffer must hold {need} floats"));
        }
        match r.inner.next() {
            None => DrStatus::End,
            Some(Ok(ex)) => {
                *class_index = ex.class_index;
                *snr_db = ex.snr_db;
                std::slice::from_raw_parts_mut(iq, need).copy_from_slice(&ex.iq);
                DrStatus::Ok
            }
            Some(Err(e)) => fail(dataset_status(&e), e.to_string()),
        }
    })
}

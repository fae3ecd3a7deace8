use std::ffi::{CStr, CString};
use std::ptr;

use asep_duality_ffi::*;

fn last_error() -> String {
    let p = asep_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn generator_lifecycle_and_evolution() {
    let mut h = ptr::null_mut();
    let s = unsafe { asep_generator_new(6, 2, 1.5, 1.5, 1.0, &mut h) };
    assert_eq!(s, AsepStatus::Ok);
    let dim = unsafe { asep_generator_dim(h) };
    assert_eq!(dim, 15);
    let mut v = vec![0.0; dim];
    v[3] = 1.0;
    let mut out = vec![0.0; dim];
    assert_eq!(unsafe { asep_generator_evolve(h, 0.4, v.as_ptr(), out.as_mut_ptr(), dim) }, AsepStatus::Ok);
    // At α = q, β = 1 the generator is stochastic.
    let total: f64 = out.iter().sum();
    assert!((total - 1.0).abs() < 1e-12, "{total}");
    assert!(out.iter().all(|&p| p >= -1e-15));

    let s = unsafe { asep_generator_evolve(h, 0.4, v.as_ptr(), out.as_mut_ptr(), dim - 1) };
    assert_eq!(s, AsepStatus::InvalidArgument);
    assert!(last_error().contains("dimension"));
    unsafe { asep_generator_free(h) };
    unsafe { asep_generator_free(ptr::null_mut()) };
    assert_eq!(unsafe { asep_generator_dim(ptr::null()) }, 0);
}

#[test]
fn driving_tilts_the_generator() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { asep_generator_driven(6, 2, AsepDriving::Boundary, 1, 1.5, &mut h) }, AsepStatus::Ok);
    let dim = unsafe { asep_generator_dim(h) };
    let v = vec![1.0; dim];
    let mut out = vec![0.0; dim];
    assert_eq!(unsafe { asep_generator_evolve(h, 0.5, v.as_ptr(), out.as_mut_ptr(), dim) }, AsepStatus::Ok);
    let total: f64 = out.iter().sum();
    assert!((total - dim as f64).abs() > 1e-3, "{total}");
    unsafe { asep_generator_free(h) };
}

#[test]
fn invalid_arguments_set_error() {
    let mut h = ptr::null_mut();
    let s = unsafe { asep_generator_new(4, 7, 1.5, 1.0, 1.0, &mut h) };
    assert_eq!(s, AsepStatus::InvalidArgument);
    assert!(h.is_null());
    assert!(last_error().contains("particle number 7"));
    let s = unsafe { asep_generator_new(4, 1, 1.5, 1.0, 1.0, ptr::null_mut()) };
    assert_eq!(s, AsepStatus::NullPointer);
}

#[test]
fn sam_vector_matches_library() {
    let xs = [2usize];
    let mut out = vec![0.0; 6];
    let s = unsafe { asep_sam_vector(4, 2, xs.as_ptr(), 1, 1.0, 1.5, AsepSamKind::I, out.as_mut_ptr(), 6) };
    assert_eq!(s, AsepStatus::Ok);
    // Sector states without site 2 carry no weight.
    assert_eq!(out.iter().filter(|&&c| c == 0.0).count(), 3);
    let bad = [5usize];
    let s = unsafe { asep_sam_vector(4, 2, bad.as_ptr(), 1, 1.0, 1.5, AsepSamKind::I, out.as_mut_ptr(), 6) };
    assert_eq!(s, AsepStatus::InvalidArgument);
}

#[test]
fn suite_report_round_trip() {
    let name = CString::new("algebra").unwrap();
    let config = CString::new(r#"{"max_sites": 3, "timings": false}"#).unwrap();
    let mut json = ptr::null_mut();
    let s = unsafe { asep_run_suite(name.as_ptr(), config.as_ptr(), &mut json) };
    assert_eq!(s, AsepStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { asep_string_free(json) };
    let reports: serde_json::Value = serde_json::from_str(&text).unwrap();
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 20);
    assert!(reports.iter().all(|r| r["pass"] == true && r["runtime_ms"].is_null()));

    let bogus = CString::new("bogus").unwrap();
    let mut json = ptr::null_mut();
    let s = unsafe { asep_run_suite(bogus.as_ptr(), ptr::null(), &mut json) };
    assert_eq!(s, AsepStatus::InvalidArgument);
    assert!(json.is_null());
    assert!(last_error().contains("bogus"));
}

#[test]
fn header_declares_the_abi() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/asep_duality.h")).unwrap();
    for name in [
        "asep_last_error",
        "asep_string_free",
        "asep_generator_new",
        "asep_generator_driven",
        "asep_generator_evolve",
        "asep_generator_free",
        "asep_sam_vector",
        "asep_run_suite",
        "typedef struct AsepGenerator AsepGenerator",
        "ASEP_STATUS_CHECK_FAILED",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

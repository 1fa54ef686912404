use std::ffi::{CStr, CString};
use std::ptr;

use specdens_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        sd_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

const TARGET: SdTarget = SdTarget {
    sigma: 0.25,
    delta: 0.1,
    beta: 0.1,
    eta: 0.05,
};

#[test]
fn planners_match_library() {
    let (mut n, mut n_s) = (0u64, 0u64);
    assert_eq!(
        unsafe { sd_plan_fejer(&TARGET, &mut n, &mut n_s) },
        SdStatus::Ok
    );
    assert_eq!((n, n_s), (64, 185));

    let t = SdTarget {
        sigma: 0.1,
        delta: 0.2,
        beta: 0.05,
        eta: 0.05,
    };
    let mut plan = SdGitPlan {
        lambda: 0.0,
        formula_order: 0,
        order: 0,
        asymptotic: -1,
        r_l_bound: 0.0,
    };
    assert_eq!(unsafe { sd_plan_git(&t, &mut plan) }, SdStatus::Ok);
    assert_eq!(plan.formula_order, 55);
    assert!(plan.order >= plan.formula_order);
    assert_eq!(plan.asymptotic, 0);
}

#[test]
fn error_codes_and_messages() {
    let bad = SdTarget {
        sigma: 2.0,
        ..TARGET
    };
    let (mut n, mut n_s) = (0u64, 0u64);
    assert_eq!(
        unsafe { sd_plan_fejer(&bad, &mut n, &mut n_s) },
        SdStatus::Validation
    );
    assert!(last_error().contains("sigma"), "{}", last_error());

    assert_eq!(
        unsafe { sd_plan_fejer(ptr::null(), &mut n, &mut n_s) },
        SdStatus::NullPointer
    );
    assert!(last_error().contains("target"));

    let out_of_regime = SdTarget {
        sigma: 0.5,
        delta: 0.9,
        beta: 0.99,
        eta: 0.05,
    };
    let mut plan = SdGitPlan {
        lambda: 0.0,
        formula_order: 0,
        order: 0,
        asymptotic: 0,
        r_l_bound: 0.0,
    };
    assert_eq!(
        unsafe { sd_plan_git(&out_of_regime, &mut plan) },
        SdStatus::OutOfRegime
    );

    // success clears the message
    assert_eq!(
        unsafe { sd_plan_fejer(&TARGET, &mut n, &mut n_s) },
        SdStatus::Ok
    );
    assert_eq!(unsafe { sd_last_error_message(ptr::null_mut(), 0) }, 0);
}

#[test]
fn message_truncation_reports_full_length() {
    let bad = SdTarget { eta: 0.0, ..TARGET };
    let (mut n, mut n_s) = (0u64, 0u64);
    unsafe { sd_plan_fejer(&bad, &mut n, &mut n_s) };
    let mut small = [0 as std::ffi::c_char; 4];
    let full = unsafe { sd_last_error_message(small.as_mut_ptr(), small.len()) };
    assert!(full > 3);
    let s = unsafe { CStr::from_ptr(small.as_ptr()) }.to_bytes().len();
    assert_eq!(s, 3);
}

#[test]
fn fejer_estimate_round_trip() {
    let omegas = [-0.5, 0.0, 0.5];
    let weights = [0.25, 0.5, 0.25];
    let mut model = ptr::null_mut();
    assert_eq!(
        unsafe { sd_model_from_spectrum(omegas.as_ptr(), weights.as_ptr(), 3, &mut model) },
        SdStatus::Ok
    );
    assert_eq!(unsafe { sd_model_dim(model) }, 3);
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { sd_estimate_fejer(model, SdMethod::Fejer, &TARGET, 0, 9, &mut res) },
        SdStatus::Ok
    );
    let len = unsafe { sd_result_len(res) };
    assert_eq!(len, 64);
    assert_eq!(unsafe { sd_result_samples(res) }, 185);
    let mut nu = vec![0.0; len];
    let mut val = vec![0.0; len];
    assert_eq!(
        unsafe { sd_result_copy(res, nu.as_mut_ptr(), val.as_mut_ptr(), len) },
        SdStatus::Ok
    );
    assert!((val.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert_eq!(
        unsafe { sd_result_copy(res, nu.as_mut_ptr(), val.as_mut_ptr(), 3) },
        SdStatus::Validation
    );
    unsafe {
        sd_result_free(res);
        sd_model_free(model);
    }
}

#[test]
fn git_estimate_with_exact_moments() {
    let spec = CString::new("dense").unwrap();
    let mut model = ptr::null_mut();
    assert_eq!(
        unsafe { sd_model_generate(8, 4, spec.as_ptr(), &mut model) },
        SdStatus::Ok
    );
    let (mut scale, mut shift) = (0.0, 0.0);
    assert_eq!(
        unsafe { sd_model_normalize(model, SdInterval::Half, &mut scale, &mut shift) },
        SdStatus::Ok
    );
    assert!(scale > 0.0);
    let t = SdTarget {
        sigma: 0.1,
        delta: 0.2,
        beta: 0.1,
        eta: 0.05,
    };
    let nu = [0.0, 0.25];
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { sd_estimate_git(model, &t, nu.as_ptr(), 2, 0, 1, 1, &mut res) },
        SdStatus::Ok
    );
    assert_eq!(unsafe { sd_result_len(res) }, 2);
    // outside [-1/2, 1/2] in half mode
    let far = [0.9];
    let mut res2 = ptr::null_mut();
    assert_eq!(
        unsafe { sd_estimate_git(model, &t, far.as_ptr(), 1, 0, 1, 1, &mut res2) },
        SdStatus::Validation
    );
    assert!(res2.is_null());
    unsafe {
        sd_result_free(res);
        sd_model_free(model);
        sd_model_free(ptr::null_mut());
    }
}

#[test]
fn model_text_parse_errors() {
    let text = CString::new("dim 2\n1 0\n").unwrap();
    let mut model = ptr::null_mut();
    let st = unsafe { sd_model_from_text(text.as_ptr(), &mut model) };
    assert_eq!(st, SdStatus::Validation);
    assert!(model.is_null());
    assert_eq!(
        unsafe { sd_model_from_text(ptr::null(), &mut model) },
        SdStatus::NullPointer
    );
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/specdens.h"))
        .unwrap();
    for f in [
        "sd_version",
        "sd_last_error_message",
        "sd_model_from_spectrum",
        "sd_model_generate",
        "sd_model_from_text",
        "sd_model_normalize",
        "sd_model_dim",
        "sd_model_free",
        "sd_plan_fejer",
        "sd_plan_git",
        "sd_estimate_fejer",
        "sd_estimate_git",
        "sd_result_len",
        "sd_result_samples",
        "sd_result_copy",
        "sd_result_free",
    ] {
        assert!(h.contains(&format!("{f}(")), "missing {f}");
    }
    assert!(h.contains("SD_STATUS_NULL_POINTER = 7"));
    let v = unsafe { CStr::from_ptr(sd_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

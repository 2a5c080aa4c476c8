use spinlab_ffi::*;
use std::ffi::CStr;
use std::ptr;

fn edge_hardcore() -> *mut SpinlabSystem {
    let edges = [0u32, 1];
    let mut sys = ptr::null_mut();
    let st = unsafe { spinlab_system_new(2, edges.as_ptr(), 1, 0.0, 1.0, 1.0, &mut sys) };
    assert_eq!(st, SpinlabStatus::Ok);
    sys
}

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe {
        spinlab_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn glauber() -> SpinlabDynamics {
    SpinlabDynamics { kind: SpinlabDynamicsKind::Glauber, theta: 0.0, ell: 0, k: 0 }
}

#[test]
fn gap_and_marginal_of_edge() {
    let sys = edge_hardcore();
    let mut gap = 0.0;
    let mut m = 0.0;
    unsafe {
        assert_eq!(spinlab_spectral_gap(sys, glauber(), &mut gap), SpinlabStatus::Ok);
        assert_eq!(spinlab_marginal(sys, 0, &mut m), SpinlabStatus::Ok);
        assert_eq!(spinlab_system_num_vertices(sys), 2);
        spinlab_system_free(sys);
    }
    assert!((gap - 0.25).abs() < 1e-12);
    assert!((m - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn uniqueness_entry_points() {
    let (mut x, mut lc, mut f) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(spinlab_lambda_c(3, &mut lc), SpinlabStatus::Ok);
        assert_eq!(spinlab_fixed_point(0.0, 1.0, 4.0, 2, &mut x), SpinlabStatus::Ok);
        assert_eq!(spinlab_decay_at_fixed_point(0.0, 1.0, 4.0, 2, &mut f), SpinlabStatus::Ok);
    }
    assert_eq!(lc, 4.0);
    // x = 4/(1+x)^2 at x = 1.
    assert!((x - 1.0).abs() < 1e-12);
    assert!((f - 1.0).abs() < 1e-9);
    assert_eq!(unsafe { spinlab_lambda_c(2, &mut lc) }, SpinlabStatus::InvalidArgument);
    assert!(last_error().contains("Delta"));
}

#[test]
fn chain_is_seeded_and_respects_constraints() {
    let sys = edge_hardcore();
    let dynamics = SpinlabDynamics { kind: SpinlabDynamicsKind::Field, theta: 0.5, ell: 0, k: 0 };
    let run = |seed: u64| unsafe {
        let mut ch = ptr::null_mut();
        assert_eq!(spinlab_chain_new(sys, dynamics, seed, ptr::null(), &mut ch), SpinlabStatus::Ok);
        let mut seen = Vec::new();
        for _ in 0..50 {
            assert_eq!(spinlab_chain_step(ch, 1), SpinlabStatus::Ok);
            let mut buf = [0i8; 2];
            assert_eq!(spinlab_chain_config(ch, buf.as_mut_ptr(), 2), SpinlabStatus::Ok);
            assert!(!(buf[0] == 1 && buf[1] == 1));
            seen.push(buf);
        }
        assert_eq!(spinlab_chain_steps(ch), 50);
        spinlab_chain_free(ch);
        seen
    };
    assert_eq!(run(5), run(5));
    unsafe { spinlab_system_free(sys) };
}

#[test]
fn errors_map_to_status_codes() {
    let sys = edge_hardcore();
    unsafe {
        let mut out = 0.0;
        assert_eq!(spinlab_marginal(ptr::null(), 0, &mut out), SpinlabStatus::NullPointer);
        assert_eq!(spinlab_marginal(sys, 5, &mut out), SpinlabStatus::InvalidArgument);
        let bad = SpinlabDynamics { kind: SpinlabDynamicsKind::Field, theta: 1.5, ell: 0, k: 0 };
        assert_eq!(spinlab_spectral_gap(sys, bad, &mut out), SpinlabStatus::InvalidArgument);
        assert!(last_error().contains("theta must lie in (0,1)"));
        let start = [1i8, 1];
        let mut ch = ptr::null_mut();
        assert_eq!(spinlab_chain_new(sys, glauber(), 0, start.as_ptr(), &mut ch), SpinlabStatus::Infeasible);
        assert!(ch.is_null());
        let mut small = [0i8; 1];
        assert_eq!(spinlab_chain_new(sys, glauber(), 0, ptr::null(), &mut ch), SpinlabStatus::Ok);
        assert_eq!(spinlab_chain_config(ch, small.as_mut_ptr(), 1), SpinlabStatus::InvalidArgument);
        spinlab_chain_free(ch);
        let edges = [0u32, 0];
        let mut other = ptr::null_mut();
        assert_ne!(spinlab_system_new(2, edges.as_ptr(), 1, 0.0, 1.0, 1.0, &mut other), SpinlabStatus::Ok);
        assert!(other.is_null());
        spinlab_system_free(sys);
        // Freeing null is a no-op.
        spinlab_system_free(ptr::null_mut());
        spinlab_chain_free(ptr::null_mut());
    }
}

#[test]
fn error_message_truncates() {
    unsafe {
        let mut x = 0.0;
        spinlab_lambda_c(1, &mut x);
        let full = spinlab_last_error_message(ptr::null_mut(), 0);
        let mut buf = [0 as std::ffi::c_char; 8];
        assert_eq!(spinlab_last_error_message(buf.as_mut_ptr(), 8), full);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_bytes().len(), 7);
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(spinlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/spinlab.h")).unwrap();
    for name in ["spinlab_system_new", "spinlab_chain_step", "spinlab_fixed_point", "spinlab_lambda_c", "SPINLAB_STATUS_OK", "typedef struct SpinlabSystem SpinlabSystem"] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/spinlab.h");
    match std::process::Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c", header]).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler; skipping"),
    }
}

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use linsync_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        lc_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(lc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn expm_of_diagonal() {
    let m = [1.0, 0.0, 0.0, -2.0];
    let mut out = [0.0; 4];
    let st = unsafe { lc_expm(2, m.as_ptr(), 0.5, out.as_mut_ptr()) };
    assert_eq!(st, LcStatus::Ok);
    assert!((out[0] - 0.5f64.exp()).abs() < 1e-14);
    assert!((out[3] - (-1.0f64).exp()).abs() < 1e-14);
    assert_eq!(out[1], 0.0);
}

#[test]
fn phi_of_example() {
    let q = [-0.2, -0.5, -0.16, -0.5];
    let g = [2.5, 1.5];
    let mut out = [0.0; 4];
    let st = unsafe { lc_phi_from_gamma(2, q.as_ptr(), g.as_ptr(), out.as_mut_ptr()) };
    assert_eq!(st, LcStatus::Ok);
    for (a, b) in out.iter().zip([6.5, -5.0, 4.0, -2.5]) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn null_pointers_are_reported() {
    let mut out = [0.0; 1];
    let st = unsafe { lc_expm(1, ptr::null(), 1.0, out.as_mut_ptr()) };
    assert_eq!(st, LcStatus::NullPointer);
    assert!(last_error().contains("null"));
    let st = unsafe { lc_graph_lambda2(ptr::null(), out.as_mut_ptr(), out.as_mut_ptr()) };
    assert_eq!(st, LcStatus::NullPointer);
}

#[test]
fn graph_handle_round_trip() {
    // path 0-1-2, undirected
    let w = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
    let mut g: *mut LcGraph = ptr::null_mut();
    unsafe {
        assert_eq!(lc_graph_new(3, w.as_ptr(), 1e-6, &mut g), LcStatus::Ok);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(lc_graph_lambda2(g, &mut re, &mut im), LcStatus::Ok);
        assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-12);
        let (mut c, mut s) = (0, 0);
        assert_eq!(lc_graph_connectivity(g, &mut c, &mut s), LcStatus::Ok);
        assert_eq!((c, s), (1, 1));
        let mut l = [0.0; 9];
        assert_eq!(lc_graph_laplacian(g, l.as_mut_ptr(), 9), LcStatus::Ok);
        assert_eq!(l[4], 2.0);
        let mut small = [0.0; 4];
        assert_eq!(lc_graph_laplacian(g, small.as_mut_ptr(), 4), LcStatus::BufferTooSmall);
        lc_graph_free(g);
        lc_graph_free(ptr::null_mut());
    }
}

#[test]
fn bad_weights_are_invalid_arguments() {
    let w = [0.0, -1.0, 0.0, 0.0];
    let mut g: *mut LcGraph = ptr::null_mut();
    let st = unsafe { lc_graph_new(2, w.as_ptr(), 1e-6, &mut g) };
    assert_eq!(st, LcStatus::InvalidArgument);
    assert!(g.is_null());
    assert!(last_error().contains("negative"));
}

#[test]
fn builtin_experiment_simulates() {
    unsafe {
        let mut exp: *mut LcExperiment = ptr::null_mut();
        assert_eq!(lc_experiment_builtin(&mut exp), LcStatus::Ok);
        let (mut m, mut n, mut k) = (0, 0, 0);
        assert_eq!(lc_experiment_dims(exp, &mut m, &mut n, &mut k), LcStatus::Ok);
        assert_eq!((m, n), (4, 2));
        let mut phi = [0.0; 4];
        assert_eq!(lc_experiment_phi(exp, phi.as_mut_ptr(), 4), LcStatus::Ok);
        assert!((phi[0] - 6.5).abs() < 1e-9);

        for engine in [LcEngine::Ode, LcEngine::Modal] {
            let mut tr: *mut LcTrajectory = ptr::null_mut();
            assert_eq!(lc_experiment_simulate(exp, engine, &mut tr), LcStatus::Ok);
            let len = lc_trajectory_len(tr);
            let mut e = vec![0.0; len];
            assert_eq!(lc_trajectory_error(tr, e.as_mut_ptr(), len), LcStatus::Ok);
            assert!(e[len - 1] < 1e-4 * e[0]);
            let mut t = vec![0.0; len];
            assert_eq!(lc_trajectory_times(tr, t.as_mut_ptr(), len), LcStatus::Ok);
            assert!((t[len - 1] - 30.0).abs() < 1e-9);
            let mut st = vec![0.0; m * n];
            assert_eq!(lc_trajectory_state(tr, 0, st.as_mut_ptr(), st.len()), LcStatus::Ok);
            assert_eq!(lc_trajectory_state(tr, len, st.as_mut_ptr(), st.len()), LcStatus::InvalidArgument);
            lc_trajectory_free(tr);
        }

        let mut other: *mut LcExperiment = ptr::null_mut();
        assert_eq!(lc_experiment_with_seed(exp, 9, &mut other), LcStatus::Ok);
        lc_experiment_free(other);
        lc_experiment_free(exp);
    }
}

#[test]
fn toml_errors_map_to_status_codes() {
    let bad = CString::new("[model]\na = 1").unwrap();
    let mut exp: *mut LcExperiment = ptr::null_mut();
    let st = unsafe { lc_experiment_from_toml(bad.as_ptr(), &mut exp) };
    assert_eq!(st, LcStatus::Config);
    assert!(exp.is_null());

    // no explicit γ, so the designer runs and rejects the split graph
    let split = linsync::cli::EXAMPLE_CONFIG
        .replace("gamma = [2.5, 1.5]\n", "")
        .replace(
            "edges = [[1, 2, 0.1892], [2, 3, 0.7206], [3, 4, 1.1249]]",
            "edges = [[1, 2, 0.1892], [3, 4, 1.1249]]",
        );
    let text = CString::new(split).unwrap();
    let st = unsafe { lc_experiment_from_toml(text.as_ptr(), &mut exp) };
    assert_eq!(st, LcStatus::Infeasible);
    assert!(last_error().contains("network.graphs[1]"));
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/linsync.h");
    for name in [
        "lc_last_error",
        "lc_version",
        "lc_expm",
        "lc_phi_from_gamma",
        "lc_graph_new",
        "lc_graph_free",
        "lc_graph_lambda2",
        "lc_graph_laplacian",
        "lc_graph_connectivity",
        "lc_experiment_from_toml",
        "lc_experiment_builtin",
        "lc_experiment_with_seed",
        "lc_experiment_free",
        "lc_experiment_dims",
        "lc_experiment_gamma",
        "lc_experiment_phi",
        "lc_experiment_simulate",
        "lc_trajectory_free",
        "lc_trajectory_len",
        "lc_trajectory_times",
        "lc_trajectory_error",
        "lc_trajectory_state",
        "LC_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

use std::ffi::{CStr, CString};
use std::ptr;

use graphqubo_ffi::*;

fn last_error() -> String {
    let p = gq_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn path3() -> *mut GqGraph {
    let src = [0usize, 1];
    let dst = [1usize, 2];
    let mut g = ptr::null_mut();
    let st = gq_graph_new(3, src.as_ptr(), dst.as_ptr(), ptr::null(), 2, &mut g);
    assert_eq!(st, GqStatus::Ok);
    g
}

#[test]
fn pipeline_on_a_path() {
    unsafe {
        let g = path3();
        assert_eq!(gq_graph_n_vertices(g), 3);
        assert_eq!(gq_graph_n_edges(g), 2);

        let mut d = ptr::null_mut();
        assert_eq!(gq_distances_new(g, &mut d), GqStatus::Ok);
        let mut d02 = -1.0;
        assert_eq!(gq_distances_get(d, 0, 2, &mut d02), GqStatus::Ok);
        assert_eq!(d02, 0.0);
        let mut direct = -1.0;
        assert_eq!(gq_burt_distance(g, 0, 1, &mut direct), GqStatus::Ok);
        assert_eq!(direct, 1.0);

        let params = gq_model_params_default(GqModel::Model1, 2);
        let mut q = ptr::null_mut();
        assert_eq!(gq_qubo_build(d, &params, &mut q), GqStatus::Ok);
        assert_eq!(gq_qubo_n_vars(q), 6);

        let mut exact = ptr::null_mut();
        assert_eq!(gq_exact_solve(q, 24, &mut exact), GqStatus::Ok);
        assert_eq!(gq_exact_result_optimal_energy(exact), 0.0);
        assert_eq!(gq_exact_result_n_states(exact), 2);

        let mut sched = gq_anneal_schedule_default();
        sched.seed = 5;
        let mut r = ptr::null_mut();
        assert_eq!(gq_anneal(q, &sched, &mut r), GqStatus::Ok);
        assert_eq!(gq_anneal_result_best_energy(r), 0.0);
        let mut state = [0u8; 6];
        assert_eq!(gq_anneal_result_copy_state(r, state.as_mut_ptr(), 6), GqStatus::Ok);
        let mut e = f64::NAN;
        assert_eq!(gq_qubo_energy(q, state.as_ptr(), 6, &mut e), GqStatus::Ok);
        assert_eq!(e, 0.0);

        let mut labels = [9usize; 3];
        assert_eq!(
            gq_decode(state.as_ptr(), 6, 3, 2, ptr::null(), labels.as_mut_ptr()),
            GqStatus::Ok
        );
        assert_eq!(labels[0], labels[2]);
        assert_ne!(labels[0], labels[1]);
        let mut obj = f64::NAN;
        assert_eq!(gq_objective_value(d, labels.as_ptr(), 3, 2, &mut obj), GqStatus::Ok);
        assert_eq!(obj, 0.0);

        gq_anneal_result_free(r);
        gq_exact_result_free(exact);
        gq_qubo_free(q);
        gq_distances_free(d);
        gq_graph_free(g);
    }
}

#[test]
fn errors_map_to_codes() {
    unsafe {
        let src = [0usize];
        let dst = [0usize];
        let mut g = ptr::null_mut();
        let st = gq_graph_new(2, src.as_ptr(), dst.as_ptr(), ptr::null(), 1, &mut g);
        assert_eq!(st, GqStatus::InvalidEdge);
        assert!(g.is_null());
        assert!(!last_error().is_empty());

        let st = gq_graph_new(2, ptr::null(), ptr::null(), ptr::null(), 1, &mut g);
        assert_eq!(st, GqStatus::InvalidArgument);
        assert!(last_error().contains("src"));

        let g = path3();
        let mut v = 0.0;
        assert_eq!(gq_burt_distance(g, 1, 1, &mut v), GqStatus::InvalidPair);
        assert_eq!(gq_burt_distance(g, 0, 7, &mut v), GqStatus::IndexOutOfRange);

        let mut d = ptr::null_mut();
        gq_distances_new(g, &mut d);
        let mut params = gq_model_params_default(GqModel::Model2, 2);
        params.penalty_p = -1.0;
        let mut q = ptr::null_mut();
        assert_eq!(gq_qubo_build(d, &params, &mut q), GqStatus::InvalidParameter);

        let state = [1u8, 1, 0, 0, 0, 1];
        let mut labels = [0usize; 3];
        assert_eq!(
            gq_decode(state.as_ptr(), 6, 3, 2, ptr::null(), labels.as_mut_ptr()),
            GqStatus::ConstraintViolation
        );
        assert_eq!(gq_decode(state.as_ptr(), 6, 3, 2, d, labels.as_mut_ptr()), GqStatus::Ok);

        let missing = CString::new("/nonexistent/graph.txt").unwrap();
        let mut h = ptr::null_mut();
        assert_eq!(gq_graph_load(missing.as_ptr(), &mut h), GqStatus::Io);
        assert!(last_error().contains("/nonexistent/graph.txt"));

        gq_distances_free(d);
        gq_graph_free(g);
        // Freeing NULL is a no-op.
        gq_graph_free(ptr::null_mut());
    }
}

#[test]
fn dense_qubo_and_time_to_target() {
    unsafe {
        let coeffs = [-1.0, 2.0, 2.0, -1.0];
        let mut q = ptr::null_mut();
        assert_eq!(gq_qubo_from_dense(2, coeffs.as_ptr(), 0.5, &mut q), GqStatus::Ok);
        assert_eq!(gq_qubo_offset(q), 0.5);
        let x = [1u8, 0];
        let mut delta = 0.0;
        assert_eq!(gq_qubo_delta_energy(q, x.as_ptr(), 2, 1, &mut delta), GqStatus::Ok);
        assert_eq!(delta, 3.0);

        let sched = gq_anneal_schedule_default();
        let mut secs = -1.0;
        assert_eq!(gq_time_to_target(q, &sched, -0.5, 5.0, &mut secs), GqStatus::Ok);
        assert!(secs >= 0.0);
        assert_eq!(gq_time_to_target(q, &sched, -10.0, 0.05, &mut secs), GqStatus::Timeout);
        gq_qubo_free(q);
    }
}

#[test]
fn sbm_labels_and_ari() {
    unsafe {
        let sizes = [4usize, 4];
        let mut g = ptr::null_mut();
        let mut labels = [9usize; 8];
        let st = gq_graph_generate_sbm(sizes.as_ptr(), 2, 0.9, 1.0, 0.0, 0.1, 3, &mut g, labels.as_mut_ptr());
        assert_eq!(st, GqStatus::Ok);
        assert_eq!(labels, [0, 0, 0, 0, 1, 1, 1, 1]);
        let mut ari = 0.0;
        assert_eq!(
            gq_adjusted_rand_index(labels.as_ptr(), labels.as_ptr(), 8, &mut ari),
            GqStatus::Ok
        );
        assert_eq!(ari, 1.0);
        gq_graph_free(g);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/graphqubo.h");
    let source = include_str!("../src/lib.rs");
    let mut count = 0;
    for line in source.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
            count += 1;
        }
    }
    assert!(count > 30);
    let v = unsafe { CStr::from_ptr(gq_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let dir = tempfile_dir();
    let src = dir.join("use_header.c");
    std::fs::write(
        &src,
        "#include \"graphqubo.h\"\n\
         int main(void) {\n\
           GqModelParams p = gq_model_params_default(GQ_MODEL_MODEL2, 4);\n\
           GqAnnealSchedule s = gq_anneal_schedule_default();\n\
           GqGraph *g = NULL;\n\
           GqStatus st = gq_graph_load(\"x\", &g);\n\
           (void)p; (void)s;\n\
           return st == GQ_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let out = match std::process::Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .output()
    {
        Ok(out) => out,
        // No C toolchain on this machine.
        Err(_) => return,
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let _ = std::fs::remove_dir_all(dir);
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("gq-header-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

use specfill_ffi::*;

fn last_error() -> String {
    let p = specfill_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn binary(p: f64) -> *mut SpecfillProcess {
    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { specfill_process_binary(p, &mut handle) }, SpecfillStatus::Ok);
    handle
}

fn filling(kind: SpecfillFillingKind, n: usize) -> *mut SpecfillFilling {
    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { specfill_filling_new(kind, n, &mut handle) }, SpecfillStatus::Ok);
    handle
}

#[test]
fn moments_through_the_abi() {
    let json = CString::new(r#"{"kind": "binary", "p": 0.7}"#).unwrap();
    let mut proc_ = ptr::null_mut();
    unsafe {
        assert_eq!(specfill_process_from_json(json.as_ptr(), &mut proc_), SpecfillStatus::Ok);
        let mut out = 0.0;
        // unsorted input is accepted
        let idx = [3u64, 0];
        assert_eq!(
            specfill_process_mixed_moment(proc_, idx.as_ptr(), 2, &mut out),
            SpecfillStatus::Ok
        );
        assert!((out - 0.4f64.powi(3)).abs() < 1e-14);
        assert_eq!(
            specfill_process_mixed_moment(proc_, ptr::null(), 0, &mut out),
            SpecfillStatus::Ok
        );
        assert_eq!(out, 1.0);
        specfill_process_free(proc_);
    }
}

#[test]
fn gaussian_from_json() {
    let json = CString::new(r#"{"kind": "gaussian", "beta": 0.5}"#).unwrap();
    let mut proc_ = ptr::null_mut();
    unsafe {
        assert_eq!(specfill_process_from_json(json.as_ptr(), &mut proc_), SpecfillStatus::Ok);
        let idx = [1u64, 2, 3, 4];
        let mut out = 0.0;
        specfill_process_mixed_moment(proc_, idx.as_ptr(), 4, &mut out);
        assert!((out - (0.25 + 2.0 * 0.0625)).abs() < 1e-14);
        specfill_process_free(proc_);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut proc_ = ptr::null_mut();
    unsafe {
        assert_eq!(specfill_process_binary(1.5, &mut proc_), SpecfillStatus::Process);
        assert!(proc_.is_null());
        assert!(!last_error().is_empty());

        let bad = CString::new(r#"{"kind": "nonsense"}"#).unwrap();
        assert_eq!(specfill_process_from_json(bad.as_ptr(), &mut proc_), SpecfillStatus::Process);
        assert!(last_error().contains("nonsense"));

        assert_eq!(
            specfill_process_from_json(ptr::null(), &mut proc_),
            SpecfillStatus::NullPointer
        );
        let mut out = 0.0;
        assert_eq!(
            specfill_process_mixed_moment(ptr::null(), ptr::null(), 0, &mut out),
            SpecfillStatus::NullPointer
        );

        let f = filling(SpecfillFillingKind::Diagonal, 4);
        let (mut i, mut j) = (0usize, 0usize);
        assert_eq!(specfill_filling_phi(f, 11, &mut i, &mut j), SpecfillStatus::Filling);
        assert!(last_error().contains("11"));
        let mut n_out = 0u64;
        assert_eq!(specfill_filling_phi_inv(f, 0, 1, &mut n_out), SpecfillStatus::Filling);
        specfill_filling_free(f);

        let mut c = 0u64;
        assert_eq!(specfill_catalan(31, &mut c), SpecfillStatus::Spectra);

        specfill_process_free(ptr::null_mut());
        specfill_filling_free(ptr::null_mut());
    }
}

#[test]
fn filling_queries() {
    unsafe {
        let d = filling(SpecfillFillingKind::Diagonal, 5);
        assert_eq!(specfill_filling_dimension(d), 5);
        let (mut i, mut j) = (0usize, 0usize);
        assert_eq!(specfill_filling_phi(d, 6, &mut i, &mut j), SpecfillStatus::Ok);
        assert_eq!((i, j), (1, 2));
        let mut m = 0u64;
        assert_eq!(specfill_filling_phi_inv(d, 2, 1, &mut m), SpecfillStatus::Ok);
        assert_eq!(m, 6);
        let mut jn = 0u64;
        specfill_filling_neighbor_count(d, &mut jn);
        assert_eq!(jn, 1);
        specfill_filling_free(d);

        let r = filling(SpecfillFillingKind::RowWise, 7);
        specfill_filling_neighbor_count(r, &mut jn);
        assert_eq!(jn, 7 * 6 / 2 + 1);
        specfill_filling_free(r);
    }
}

#[test]
fn custom_table_from_file() {
    let dir = std::env::temp_dir().join(format!("specfill-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("table.txt");
    std::fs::write(&path, "# m i j\n1 1 2\n2 1 1\n3 2 2\n").unwrap();
    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(specfill_filling_load(c_path.as_ptr(), &mut f), SpecfillStatus::Ok);
        let mut m = 0u64;
        specfill_filling_phi_inv(f, 2, 1, &mut m);
        assert_eq!(m, 1);
        specfill_filling_free(f);
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn eigenvalues_and_trace_moment() {
    unsafe {
        let p = binary(0.7);
        let f = filling(SpecfillFillingKind::Diagonal, 6);
        let mut eig = [0.0f64; 6];
        assert_eq!(
            specfill_sample_eigenvalues(p, f, 9, eig.as_mut_ptr(), 6),
            SpecfillStatus::Ok
        );
        assert!(eig.windows(2).all(|w| w[0] <= w[1]));
        // sum of squared eigenvalues equals the Frobenius norm: entries are +-1/sqrt(6)
        let frob: f64 = eig.iter().map(|x| x * x).sum();
        assert!((frob - 36.0 / 6.0).abs() < 1e-10);
        assert_eq!(
            specfill_sample_eigenvalues(p, f, 9, eig.as_mut_ptr(), 5),
            SpecfillStatus::InvalidArgument
        );
        let mut m2 = 0.0;
        assert_eq!(specfill_expected_trace_moment(p, f, 2, &mut m2), SpecfillStatus::Ok);
        assert!((m2 - 1.0).abs() < 1e-12);
        specfill_filling_free(f);
        specfill_process_free(p);
    }
}

#[test]
fn samples_are_seeded() {
    unsafe {
        let p = binary(0.9);
        let mut a = [0.0f64; 32];
        let mut b = [0.0f64; 32];
        specfill_process_sample(p, 32, 5, a.as_mut_ptr());
        specfill_process_sample(p, 32, 5, b.as_mut_ptr());
        assert_eq!(a, b);
        assert!(a.iter().all(|x| x.abs() == 1.0));
        specfill_process_free(p);
    }
}

#[test]
fn scalar_helpers() {
    let mut c = 0u64;
    unsafe { specfill_catalan(4, &mut c) };
    assert_eq!(c, 14);
    assert_eq!(specfill_semicircle_cdf(0.0), 0.5);
    assert!((specfill_semicircle_density(0.0) - 1.0 / std::f64::consts::PI).abs() < 1e-15);
    assert_eq!(specfill_seed_for_trial(1, 2), specfill::seed_for_trial(1, 2));
}

#[test]
fn header_declares_every_export() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/specfill.h");
    let text = std::fs::read_to_string(&header).unwrap();
    let source = include_str!("../src/lib.rs");
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(text.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(text.contains("typedef struct SpecfillProcess SpecfillProcess;"));
}

#[test]
fn header_compiles_as_c() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/specfill.h");
    let dir = std::env::temp_dir().join(format!("specfill-hdr-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("probe.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{}\"\nint main(void) {{ SpecfillProcess *p = 0; return specfill_process_binary(0.7, &p) == SPECFILL_STATUS_OK ? 0 : 1; }}\n",
            header.display()
        ),
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&src)
        .status();
    std::fs::remove_dir_all(&dir).unwrap();
    match status {
        Ok(s) => assert!(s.success(), "header does not compile"),
        Err(_) => eprintln!("no C compiler found; skipping"),
    }
}

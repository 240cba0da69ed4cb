use std::ffi::{c_char, CString};
use std::ptr;

use aan_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 512];
    let n = unsafe { aan_last_error_message(buf.as_mut_ptr().cast::<c_char>(), buf.len()) };
    buf.truncate(n.min(511));
    String::from_utf8(buf).unwrap()
}

fn new_rbm(nv: usize, nh: usize, seed: u64) -> *mut AanRbm {
    let mut rbm = ptr::null_mut();
    let st = unsafe { aan_rbm_new(nv, nh, 0.1, 0.001, 0.8, seed, &mut rbm) };
    assert_eq!(st, AanStatus::Ok);
    assert!(!rbm.is_null());
    rbm
}

const TOY: &str = "dataset = toy2d\nbatch_size = 32\ntoy_n = 256\neval_batch = 32\nseed = 3\n";

fn new_trainer(text: &str) -> *mut AanTrainer {
    let text = CString::new(text).unwrap();
    let mut t = ptr::null_mut();
    let st = unsafe { aan_trainer_new(text.as_ptr(), &mut t) };
    assert_eq!(st, AanStatus::Ok, "{}", last_error());
    t
}

#[test]
fn rbm_params_round_trip() {
    let rbm = new_rbm(3, 2, 1);
    let (mut nv, mut nh) = (0, 0);
    unsafe {
        assert_eq!(aan_rbm_dims(rbm, &mut nv, &mut nh), AanStatus::Ok);
        assert_eq!((nv, nh), (3, 2));
        let w = [0.1, -0.2, 0.3, 0.4, -0.5, 0.6];
        let (b, c) = ([0.01, 0.02, 0.03], [-0.1, 0.1]);
        let st = aan_rbm_set_params(rbm, w.as_ptr(), 6, b.as_ptr(), 3, c.as_ptr(), 2);
        assert_eq!(st, AanStatus::Ok);
        let (mut w2, mut b2, mut c2) = ([0.0; 6], [0.0; 3], [0.0; 2]);
        let st = aan_rbm_get_params(rbm, w2.as_mut_ptr(), 6, b2.as_mut_ptr(), 3, c2.as_mut_ptr(), 2);
        assert_eq!(st, AanStatus::Ok);
        assert_eq!((w, b, c), (w2, b2, c2));
        let st = aan_rbm_get_params(rbm, w2.as_mut_ptr(), 5, b2.as_mut_ptr(), 3, c2.as_mut_ptr(), 2);
        assert_eq!(st, AanStatus::BufferTooSmall);
        assert!(last_error().contains("weights"));
        let bad = [f64::NAN; 6];
        let st = aan_rbm_set_params(rbm, bad.as_ptr(), 6, b.as_ptr(), 3, c.as_ptr(), 2);
        assert_eq!(st, AanStatus::NonFinite);
        aan_rbm_get_params(rbm, w2.as_mut_ptr(), 6, b2.as_mut_ptr(), 3, c2.as_mut_ptr(), 2);
        assert_eq!(w2, w);
        aan_rbm_free(rbm);
    }
}

#[test]
fn zero_rbm_partition_and_likelihood() {
    let mut rbm = ptr::null_mut();
    unsafe {
        assert_eq!(aan_rbm_new(4, 3, 0.0, 0.001, 0.8, 0, &mut rbm), AanStatus::Ok);
        let mut log_z = 0.0;
        assert_eq!(aan_rbm_log_partition(rbm, &mut log_z), AanStatus::Ok);
        // Zero parameters leave only the ½Σv² term: every one of the 2^7
        // joint states has energy 2.
        assert!((log_z - (7.0 * 2f64.ln() - 2.0)).abs() < 1e-12);
        let spins = [1i8, -1, 1, 1, -1, -1, -1, 1];
        let mut ll = 0.0;
        assert_eq!(aan_rbm_log_likelihood(rbm, spins.as_ptr(), 2, &mut ll), AanStatus::Ok);
        assert!((ll + 4.0 * 2f64.ln()).abs() < 1e-12);
        aan_rbm_free(rbm);
    }
}

#[test]
fn cd_steps_raise_likelihood() {
    let rbm = new_rbm(4, 3, 2);
    let data: Vec<i8> = (0..64).flat_map(|i| if i % 4 == 0 { [-1, -1, 1, 1] } else { [1, 1, -1, -1] }).collect();
    unsafe {
        let (mut before, mut after, mut recon) = (0.0, 0.0, -1.0);
        aan_rbm_log_likelihood(rbm, data.as_ptr(), 64, &mut before);
        for _ in 0..300 {
            assert_eq!(aan_rbm_cd_step(rbm, data.as_ptr(), 64, 2, &mut recon), AanStatus::Ok);
        }
        aan_rbm_log_likelihood(rbm, data.as_ptr(), 64, &mut after);
        assert!(after > before + 0.5, "{before} -> {after}");
        assert!((0.0..=1.0).contains(&recon));
        assert_eq!(aan_rbm_cd_step(rbm, data.as_ptr(), 64, 0, ptr::null_mut()), AanStatus::InvalidArgument);
        aan_rbm_free(rbm);
    }
}

#[test]
fn samples_are_spins() {
    let rbm = new_rbm(5, 2, 4);
    let mut out = vec![0i8; 50];
    unsafe {
        assert_eq!(aan_rbm_sample(rbm, 10, 3, out.as_mut_ptr(), 50), AanStatus::Ok);
        assert!(out.iter().all(|&s| s == 1 || s == -1));
        assert_eq!(aan_rbm_sample(rbm, 11, 3, out.as_mut_ptr(), 50), AanStatus::BufferTooSmall);
        aan_rbm_free(rbm);
    }
}

#[test]
fn enumeration_bound_reported() {
    let rbm = new_rbm(20, 20, 0);
    let mut log_z = 0.0;
    unsafe {
        assert_eq!(aan_rbm_log_partition(rbm, &mut log_z), AanStatus::Bound);
        aan_rbm_free(rbm);
    }
}

#[test]
fn null_pointers_rejected() {
    let mut v = 0.0;
    let (mut nv, mut nh) = (0, 0);
    unsafe {
        assert_eq!(aan_rbm_log_partition(ptr::null(), &mut v), AanStatus::NullPointer);
        assert!(last_error().contains("rbm"));
        assert_eq!(aan_rbm_dims(ptr::null(), &mut nv, &mut nh), AanStatus::NullPointer);
        assert_eq!(aan_rbm_new(2, 2, 0.1, 0.001, 0.8, 0, ptr::null_mut()), AanStatus::NullPointer);
        assert_eq!(aan_trainer_step(ptr::null_mut(), ptr::null_mut()), AanStatus::NullPointer);
        let mut t = ptr::null_mut();
        assert_eq!(aan_trainer_new(ptr::null(), &mut t), AanStatus::NullPointer);
        aan_rbm_free(ptr::null_mut());
        aan_trainer_free(ptr::null_mut());
    }
}

#[test]
fn error_message_cleared_and_truncated() {
    let mut t = ptr::null_mut();
    let bad = CString::new("no_such_key = 1\n").unwrap();
    unsafe {
        assert_eq!(aan_trainer_new(bad.as_ptr(), &mut t), AanStatus::Config);
        assert!(last_error().contains("no_such_key"));
        let mut small = [0x7fu8; 4];
        let n = aan_last_error_message(small.as_mut_ptr().cast::<c_char>(), 4);
        assert!(n > 3);
        assert_eq!(small[3], 0);
        let rbm = new_rbm(2, 2, 0);
        assert_eq!(aan_last_error_message(ptr::null_mut(), 0), 0);
        aan_rbm_free(rbm);
    }
}

#[test]
fn trainer_steps_generates_and_checkpoints() {
    let t = new_trainer(TOY);
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("c.aanc").to_str().unwrap()).unwrap();
    unsafe {
        let mut m = AanStepMetrics::default();
        for _ in 0..3 {
            assert_eq!(aan_trainer_step(t, &mut m), AanStatus::Ok);
        }
        assert_eq!(m.step, 3);
        assert!(m.d_loss.is_finite() && m.sample_diversity.is_finite());
        let mut len = 0;
        assert_eq!(aan_trainer_sample_len(t, &mut len), AanStatus::Ok);
        assert_eq!(len, 2);
        let mut xs = vec![0.0; 20];
        assert_eq!(aan_trainer_generate(t, 10, 7, xs.as_mut_ptr(), 20), AanStatus::Ok);
        assert!(xs.iter().all(|x| x.abs() <= 1.0));
        assert_eq!(aan_trainer_save_checkpoint(t, path.as_ptr()), AanStatus::Ok);

        let mut r = ptr::null_mut();
        assert_eq!(aan_trainer_load_checkpoint(path.as_ptr(), &mut r), AanStatus::Ok, "{}", last_error());
        let mut step = 0;
        aan_trainer_step_count(r, &mut step);
        assert_eq!(step, 3);
        let (mut a, mut b) = (AanStepMetrics::default(), AanStepMetrics::default());
        aan_trainer_step(t, &mut a);
        aan_trainer_step(r, &mut b);
        assert_eq!(a, b);
        aan_trainer_free(r);
        aan_trainer_free(t);
    }
}

#[test]
fn corrupt_checkpoint_reports_checksum() {
    let t = new_trainer(TOY);
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.aanc");
    let path = CString::new(file.to_str().unwrap()).unwrap();
    unsafe {
        aan_trainer_save_checkpoint(t, path.as_ptr());
        aan_trainer_free(t);
    }
    let mut bytes = std::fs::read(&file).unwrap();
    let mid = bytes.len() / 3;
    bytes[mid] ^= 0x55;
    std::fs::write(&file, bytes).unwrap();
    let mut r = ptr::null_mut();
    let st = unsafe { aan_trainer_load_checkpoint(path.as_ptr(), &mut r) };
    assert_eq!(st, AanStatus::Checksum, "{}", last_error());
    assert!(r.is_null());
    let missing = CString::new(dir.path().join("none.aanc").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { aan_trainer_load_checkpoint(missing.as_ptr(), &mut r) }, AanStatus::Io);
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/aan.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.trim().strip_prefix("pub unsafe extern \"C\" fn "))
        .map(|l| l.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("AAN_STATUS_OK = 0"));
    assert!(header.contains("typedef struct AanTrainer AanTrainer"));
}

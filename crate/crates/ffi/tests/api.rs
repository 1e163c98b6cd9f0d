use std::ffi::{CStr, CString};
use std::ptr;

use pitchmarks_ffi::*;

const H: usize = 80;
const W: usize = 120;

/// Gray frame with one bright horizontal bar (tent profile) at row 30.
fn frame() -> Vec<u8> {
    (0..H * W)
        .map(|i| {
            let a = (1.0 - ((i / W) as f64 - 30.0).abs() / 3.0).max(0.0);
            (255.0 * (0.3 + 0.6 * a)).round() as u8
        })
        .collect()
}

fn last_error() -> String {
    let p = pm_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn detect_round_trip() {
    unsafe {
        let cfg = pm_config_new();
        assert_eq!(pm_config_set_seed(cfg, 3), PmStatus::Ok);
        let img = frame();
        let mut det = ptr::null_mut();
        assert_eq!(pm_detect(cfg, img.as_ptr(), H, W, 1, ptr::null(), &mut det), PmStatus::Ok);
        assert_eq!((pm_detection_height(det), pm_detection_width(det)), (H, W));

        let mut mask = vec![0u8; H * W];
        assert_eq!(pm_detection_mask(det, mask.as_mut_ptr(), mask.len()), PmStatus::Ok);
        let on: Vec<_> = (0..H * W).filter(|&i| mask[i] == 1).collect();
        assert!(!on.is_empty());
        assert!(on.iter().all(|i| (29..=31).contains(&(i / W))));

        let mut prob = vec![-1.0; H * W];
        assert_eq!(pm_detection_probability(det, prob.as_mut_ptr(), prob.len()), PmStatus::Ok);
        assert!(prob.iter().all(|p| (0.0..=1.0).contains(p)));
        assert!(on.iter().all(|&i| prob[i] >= 0.8));

        let mut labels = vec![9u8; H * W];
        assert_eq!(pm_detection_labels(det, labels.as_mut_ptr(), labels.len()), PmStatus::Ok);
        assert!(labels.iter().all(|&l| l <= 2));

        assert_eq!(pm_detection_line_count(det), 1);
        assert_eq!(pm_detection_ellipse_count(det), 0);
        let mut line = PmLine::default();
        assert_eq!(pm_detection_line(det, 0, &mut line), PmStatus::Ok);
        assert!(line.normal[0].abs() > 0.999);
        assert!((line.offset / line.normal[0] - 30.0).abs() < 0.5);
        assert!(line.pixel_count >= W - 10);
        let mut e = PmEllipse::default();
        assert_eq!(pm_detection_ellipse(det, 0, &mut e), PmStatus::OutOfRange);

        let mut json = ptr::null_mut();
        assert_eq!(pm_detection_to_json(det, &mut json), PmStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        pm_string_free(json);
        assert!(text.contains("\"lines\""));

        // Same seed, same result.
        let mut again = ptr::null_mut();
        assert_eq!(pm_detect(cfg, img.as_ptr(), H, W, 1, ptr::null(), &mut again), PmStatus::Ok);
        let mut mask2 = vec![0u8; H * W];
        pm_detection_mask(again, mask2.as_mut_ptr(), mask2.len());
        assert_eq!(mask, mask2);

        pm_detection_free(again);
        pm_detection_free(det);
        pm_config_free(cfg);
    }
}

#[test]
fn field_mask_restricts_detection() {
    unsafe {
        let cfg = pm_config_new();
        let img = frame();
        let field: Vec<u8> = (0..H * W).map(|i| (i % W < W / 2) as u8).collect();
        let mut det = ptr::null_mut();
        assert_eq!(pm_detect(cfg, img.as_ptr(), H, W, 1, field.as_ptr(), &mut det), PmStatus::Ok);
        let mut mask = vec![0u8; H * W];
        pm_detection_mask(det, mask.as_mut_ptr(), mask.len());
        assert!((0..H * W).all(|i| mask[i] == 0 || field[i] == 1));
        pm_detection_free(det);
        pm_config_free(cfg);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut cfg = ptr::null_mut();
        let bad = CString::new("experimets = 3").unwrap();
        assert_eq!(pm_config_from_toml(bad.as_ptr(), &mut cfg), PmStatus::Config);
        assert!(cfg.is_null());
        assert!(last_error().contains("experimets"));

        let good = CString::new("seed = 4\nexperiments = 5\n").unwrap();
        assert_eq!(pm_config_from_toml(good.as_ptr(), &mut cfg), PmStatus::Ok);
        let mut toml = ptr::null_mut();
        assert_eq!(pm_config_to_toml(cfg, &mut toml), PmStatus::Ok);
        assert!(CStr::from_ptr(toml).to_str().unwrap().contains("experiments = 5"));
        pm_string_free(toml);

        assert_eq!(pm_config_set_threshold(cfg, 1.5), PmStatus::Config);
        assert_eq!(pm_config_set_experiments(cfg, 0), PmStatus::Config);
        assert_eq!(pm_config_set_threshold(ptr::null_mut(), 0.5), PmStatus::NullPointer);
        assert!(last_error().contains("config"));

        let path = CString::new("/nonexistent/pm.toml").unwrap();
        let mut other = ptr::null_mut();
        assert_eq!(pm_config_load(path.as_ptr(), &mut other), PmStatus::Io);
        assert!(last_error().contains("/nonexistent/pm.toml"));

        let img = frame();
        let mut det = ptr::null_mut();
        assert_eq!(pm_detect(cfg, img.as_ptr(), H, W, 2, ptr::null(), &mut det), PmStatus::InvalidArgument);
        assert_eq!(pm_detect(cfg, ptr::null(), H, W, 1, ptr::null(), &mut det), PmStatus::NullPointer);
        assert!(det.is_null());

        assert_eq!(pm_detect(cfg, img.as_ptr(), H, W, 1, ptr::null(), &mut det), PmStatus::Ok);
        let mut small = vec![0u8; 10];
        assert_eq!(pm_detection_mask(det, small.as_mut_ptr(), small.len()), PmStatus::OutOfRange);
        assert_eq!(pm_detection_mask(det, ptr::null_mut(), H * W), PmStatus::NullPointer);
        assert_eq!(pm_detection_line_count(ptr::null()), 0);

        pm_detection_free(det);
        pm_config_free(cfg);
        pm_config_free(ptr::null_mut());
        pm_detection_free(ptr::null_mut());
        pm_string_free(ptr::null_mut());
    }
}

#[test]
fn last_error_is_thread_local() {
    unsafe {
        let mut cfg = ptr::null_mut();
        let bad = CString::new("threshold = 7").unwrap();
        assert_eq!(pm_config_from_toml(bad.as_ptr(), &mut cfg), PmStatus::Config);
    }
    std::thread::spawn(|| assert!(pm_last_error_message().is_null())).join().unwrap();
    assert!(last_error().contains("threshold"));
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(pm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

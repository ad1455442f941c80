use std::ffi::CStr;
use std::ptr;

use entmeas_ffi::*;

fn last_error() -> String {
    let p = em_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(em_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn gate_round_trip() {
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(em_entanglement_matrix_from_q(0.5, 0.0, &mut r), EmStatus::Ok);
        assert!(em_last_error_message().is_null());
        assert_eq!(em_entanglement_matrix_dim(r), 2);

        let mut g = ptr::null_mut();
        assert_eq!(em_combined_unitary(r, &mut g), EmStatus::Ok);
        assert_eq!(em_gate_dim(g), 8);
        assert!(em_gate_unitarity_error(g) < 1e-12);

        let mut dims = [0usize; 3];
        let mut count = 0;
        assert_eq!(em_gate_dims(g, dims.as_mut_ptr(), 3, &mut count), EmStatus::Ok);
        assert_eq!((count, dims), (3, [2, 2, 2]));
        assert_eq!(em_gate_dims(g, dims.as_mut_ptr(), 2, &mut count), EmStatus::BufferTooSmall);

        let mut entries = vec![EmComplex::default(); 64];
        assert_eq!(em_gate_entries(g, entries.as_mut_ptr(), 63), EmStatus::BufferTooSmall);
        assert_eq!(em_gate_entries(g, entries.as_mut_ptr(), 64), EmStatus::Ok);
        // Row 6, column 4 carries q.
        assert!((entries[6 * 8 + 4].re - 0.5).abs() < 1e-15 && entries[6 * 8 + 4].im == 0.0);
        assert!((entries[7 * 8 + 4].re - 0.75f64.sqrt()).abs() < 1e-15);

        em_gate_free(g);
        em_entanglement_matrix_free(r);
    }
}

#[test]
fn coherent_information_of_plus() {
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(em_entanglement_matrix_from_q(1.0, 0.0, &mut r), EmStatus::Ok);
        let rho = [EmComplex { re: 0.5, im: 0.0 }; 4];
        let mut rep = EmInfoReport::default();
        assert_eq!(em_coherent_information(r, rho.as_ptr(), 2, &mut rep), EmStatus::Ok);
        assert!((rep.i_c_formula - 1.0).abs() < 1e-12);
        assert!((rep.i_c_general - 1.0).abs() < 1e-12);

        let third = EmComplex { re: 1.0 / 3.0, im: 0.0 };
        let z = EmComplex::default();
        let mixed3 = [third, z, z, z, third, z, z, z, third];
        assert_eq!(em_coherent_information(r, mixed3.as_ptr(), 3, &mut rep), EmStatus::DimensionMismatch);
        assert!(last_error().contains("dimension"));
        let bad = [EmComplex { re: 2.0, im: 0.0 }, EmComplex::default(), EmComplex::default(), EmComplex { re: -1.0, im: 0.0 }];
        assert_eq!(em_coherent_information(r, bad.as_ptr(), 2, &mut rep), EmStatus::InvalidArgument);
        em_entanglement_matrix_free(r);
    }
}

#[test]
fn general_matrix_and_errors() {
    unsafe {
        let one = EmComplex { re: 1.0, im: 0.0 };
        let z = EmComplex { re: 0.2, im: 0.1 };
        let zc = EmComplex { re: 0.2, im: -0.1 };
        let entries = [one, z, EmComplex::default(), zc, one, z, EmComplex::default(), zc, one];
        let mut r = ptr::null_mut();
        assert_eq!(em_entanglement_matrix_new(3, entries.as_ptr(), &mut r), EmStatus::Ok);
        let (mut dev, mut pass) = (f64::NAN, false);
        assert_eq!(em_verify_dilation(r, 1e-9, &mut dev, &mut pass), EmStatus::Ok);
        assert!(pass && dev < 1e-9);
        assert_eq!(em_verify_dilation(r, -1.0, &mut dev, &mut pass), EmStatus::InvalidArgument);
        em_entanglement_matrix_free(r);

        let mut r = ptr::null_mut();
        assert_eq!(em_entanglement_matrix_from_q(1.5, 0.0, &mut r), EmStatus::NotPositive);
        assert!(r.is_null());
        assert!(!last_error().is_empty());
        let (h, m) = (EmComplex { re: 0.9, im: 0.0 }, EmComplex { re: -0.9, im: 0.0 });
        let non_psd = [one, h, h, h, one, m, h, m, one];
        assert_eq!(em_entanglement_matrix_new(3, non_psd.as_ptr(), &mut r), EmStatus::NotPositive);
        let bad_diag = [EmComplex { re: 2.0, im: 0.0 }, EmComplex::default(), EmComplex::default(), one];
        assert_eq!(em_entanglement_matrix_new(2, bad_diag.as_ptr(), &mut r), EmStatus::InvalidArgument);
        assert_eq!(em_entanglement_matrix_new(2, ptr::null(), &mut r), EmStatus::NullPointer);
        assert_eq!(em_entanglement_matrix_from_q(0.5, 0.0, ptr::null_mut()), EmStatus::NullPointer);
        assert_eq!(em_combined_unitary(ptr::null(), &mut ptr::null_mut()), EmStatus::NullPointer);

        assert_eq!(em_entanglement_matrix_dim(ptr::null()), 0);
        assert_eq!(em_gate_dim(ptr::null()), 0);
        assert!(em_gate_unitarity_error(ptr::null()).is_nan());
        em_gate_free(ptr::null_mut());
        em_entanglement_matrix_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_per_thread() {
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(em_entanglement_matrix_from_q(2.0, 0.0, &mut r), EmStatus::NotPositive);
    }
    std::thread::spawn(|| assert!(em_last_error_message().is_null())).join().unwrap();
    assert!(!em_last_error_message().is_null());
}

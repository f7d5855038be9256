use conelab_wasm::{
    alpha_curve_data, certificate_grid_data, counterexample_slice_data, decay_profile_data, eps_limit, sector_mask_data,
};

#[test]
fn curve_pairs_are_interleaved_and_rise_to_two() {
    let d = alpha_curve_data(0.05, eps_limit() - 1e-9, 20).unwrap();
    assert_eq!(d.len(), 40);
    assert!(d.chunks(2).zip(d.chunks(2).skip(1)).all(|(a, b)| b[1] >= a[1]));
    assert!((d[39] - 2.0).abs() < 1e-6);
}

#[test]
fn certificate_grid_changes_sign_across_the_curve() {
    let g = certificate_grid_data(11, 11, eps_limit());
    assert_eq!(g.len(), 121);
    // top-left: α = 2, ε = 0 is admissible; bottom row α = 1 is not
    assert!(g[0] > 0.0);
    assert!(g[110..].iter().all(|v| *v <= 0.0));
}

#[test]
fn slice_is_symmetric_and_mask_matches_size() {
    let n = 21;
    let s = counterexample_slice_data(1.0, 4.0, 1.0, 0.5, n, 2.0).unwrap();
    assert_eq!(s.len(), n * n);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (s[i * n + j], s[(n - 1 - i) * n + j]);
            assert!(a.is_nan() && b.is_nan() || (a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }
    let mask = sector_mask_data(1.0, 4.0, 1.0, n, 2.0).unwrap();
    assert_eq!(mask.len(), n * n);
    assert!(mask.contains(&1.0) && mask.contains(&0.0));
    assert!(counterexample_slice_data(1.0, 1.5, 1.0, 0.5, n, 2.0).is_err());
}

#[test]
fn decay_profile_rises_and_envelope_dominates() {
    let d = decay_profile_data(1, 4.0, 50).unwrap();
    let (t, v, e) = (d.times(), d.values(), d.envelope());
    assert_eq!(t.len(), v.len());
    assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-15));
    assert!(d.beta() > 0.05 && d.beta() < 0.5);
    for i in 0..t.len() {
        if e[i] > 0.0 {
            assert!(v[i] <= e[i] * (1.0 + 1e-9));
        }
    }
}

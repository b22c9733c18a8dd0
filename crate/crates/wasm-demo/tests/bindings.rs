use dressed_wasm::{dressed_potential_map, dressing_matrix, two_site_dipoles};

#[test]
fn dipole_traces_start_at_initial_dipole() {
    let data = two_site_dipoles(0.01, 5.0, 0.05, 11).unwrap();
    assert_eq!(data.len(), 4 * 11);
    assert_eq!(data[0], 0.0);
    let d0 = data[1];
    assert!((data[2] - d0).abs() < 1e-12 && (data[3] - d0).abs() < 1e-12);
    assert!((data[40] - 5.0).abs() < 1e-9);
    assert!(two_site_dipoles(0.01, -1.0, 0.05, 11).is_err());
}

#[test]
fn potential_map_is_symmetric_under_joint_inversion() {
    let (nx, nq) = (21, 17);
    let v = dressed_potential_map(0.3, 0.58037, "mx", nx, nq, 8.0).unwrap();
    for i in 0..nx {
        for a in 0..nq {
            let mirrored = v[(nx - 1 - i) * nq + (nq - 1 - a)];
            assert!((v[i * nq + a] - mirrored).abs() < 1e-12);
        }
    }
    assert!(dressed_potential_map(0.3, 0.58037, "pbe", nx, nq, 8.0).is_err());
}

#[test]
fn dressing_matrix_carries_its_orthogonality_error() {
    let data = dressing_matrix(4).unwrap();
    assert_eq!(data.len(), 17);
    assert!(data[16] < 1e-15);
    assert!(dressing_matrix(1).is_err());
}

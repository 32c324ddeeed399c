use ergodic_demo::{storage_table, Explorer};

#[test]
fn explorer_moves_at_bounded_speed_and_stays_inside() {
    let mut e = Explorer::build(&[0.3, 0.3, 0.7, 0.6], 0.01, 8, 1).unwrap();
    let pts = e.advance(500);
    assert_eq!(pts.len(), 1000);
    assert!(pts.iter().all(|v| (0.0..=1.0).contains(v)));
    for w in pts.chunks(2).collect::<Vec<_>>().windows(2) {
        let step = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
        assert!(step <= 0.1 * 0.01 + 1e-12);
    }
    assert!((e.time() - 5.0).abs() < 1e-9);
    assert!(e.metric().is_finite());
}

#[test]
fn density_peaks_at_the_component() {
    let e = Explorer::build(&[0.25, 0.75], 0.005, 6, 0).unwrap();
    let g = e.density(4);
    let (imax, &top) = g.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    assert_eq!(top, 1.0);
    // The mean sits on cell edges: column 0 or 1, row 2 or 3.
    assert!(imax % 4 <= 1 && imax / 4 >= 2, "{imax}");
}

#[test]
fn bad_input_is_rejected() {
    assert!(Explorer::build(&[0.5], 0.01, 5, 0).is_err());
    assert!(Explorer::build(&[0.5, 0.5], -1.0, 5, 0).is_err());
}

#[test]
fn storage_of_a_gaussian_is_linear_in_d() {
    let t = storage_table(4, 5, 0.015);
    let rows: Vec<Vec<&str>> = t.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 4);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[1], ((i + 1) * 5).to_string());
    }
}

use proptest::prelude::*;
use tfseg::transform::{
    analyze, denoise, dense_frame_matrix, shrink_complex, shrink_real, soft_threshold, synthesize,
    FrameBackend, ThresholdVector,
};
use tfseg::ImageField;

fn field_strategy(ndim: usize, lo: usize, hi: usize) -> impl Strategy<Value = ImageField> {
    prop::collection::vec(lo..=hi, ndim).prop_flat_map(|extents| {
        let n: usize = extents.iter().product();
        prop::collection::vec(-1.0f64..1.0, n).prop_map(move |data| ImageField::new(&extents, data).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bspline_perfect_reconstruction_1d(f in field_strategy(1, 1, 64)) {
        let c = analyze(&f, FrameBackend::BSplineFramelet).unwrap();
        let g = synthesize(&c, FrameBackend::BSplineFramelet).unwrap();
        prop_assert!(g.max_abs_diff(&f) <= 1e-10);
    }

    #[test]
    fn bspline_perfect_reconstruction_2d(f in field_strategy(2, 1, 40)) {
        let c = analyze(&f, FrameBackend::BSplineFramelet).unwrap();
        prop_assert_eq!(c.subbands.len(), 9);
        let g = synthesize(&c, FrameBackend::BSplineFramelet).unwrap();
        prop_assert!(g.max_abs_diff(&f) <= 1e-10);
    }

    #[test]
    fn bspline_perfect_reconstruction_3d(f in field_strategy(3, 1, 12)) {
        let c = analyze(&f, FrameBackend::BSplineFramelet).unwrap();
        prop_assert_eq!(c.subbands.len(), 27);
        let g = synthesize(&c, FrameBackend::BSplineFramelet).unwrap();
        prop_assert!(g.max_abs_diff(&f) <= 1e-10);
    }

    #[test]
    fn dtcwt_perfect_reconstruction(f in field_strategy(2, 4, 40), levels in 1usize..=4) {
        let backend = FrameBackend::dual_tree(levels);
        let c = analyze(&f, backend).unwrap();
        let g = synthesize(&c, backend).unwrap();
        prop_assert!(g.max_abs_diff(&f) <= 1e-8);
    }

    #[test]
    fn analysis_is_linear(
        f in field_strategy(2, 8, 8),
        g in field_strategy(2, 8, 8),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        for backend in [FrameBackend::BSplineFramelet, FrameBackend::dual_tree(2)] {
            let combo = ImageField::new(
                f.extents(),
                f.data().iter().zip(g.data()).map(|(x, y)| a * x + b * y).collect(),
            ).unwrap();
            let lhs = analyze(&combo, backend).unwrap().flatten();
            let cf = analyze(&f, backend).unwrap().flatten();
            let cg = analyze(&g, backend).unwrap().flatten();
            for ((l, x), y) in lhs.iter().zip(&cf).zip(&cg) {
                prop_assert!((l - (a * x + b * y)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn shrinkage_never_grows(v in -2.0f64..2.0, w in -2.0f64..2.0, lambda in 0.0f64..1.0) {
        let r = shrink_real(v, lambda);
        prop_assert!(r.abs() <= v.abs());
        prop_assert!((r.abs() - (v.abs() - lambda).max(0.0)).abs() <= 1e-15);
        let (re, im) = shrink_complex(v, w, lambda);
        prop_assert!(re.hypot(im) <= v.hypot(w) + 1e-15);
    }
}

#[test]
fn dtcwt_round_trip_16x16_two_levels() {
    let f = ImageField::from_fn(&[16, 16], |c| ((c[0] * 7 + c[1] * 13) % 17) as f64 / 17.0).unwrap();
    let backend = FrameBackend::dual_tree(2);
    let g = synthesize(&analyze(&f, backend).unwrap(), backend).unwrap();
    assert!(g.max_abs_diff(&f) <= 1e-8);
}

#[test]
fn bspline_matches_dense_oracle_on_small_shapes() {
    let mut shapes: Vec<Vec<usize>> = Vec::new();
    for nx in 1..=8 {
        shapes.push(vec![nx]);
        for ny in 1..=8 {
            shapes.push(vec![nx, ny]);
        }
    }
    for nx in 1..=4 {
        for ny in 1..=4 {
            for nz in 1..=4 {
                shapes.push(vec![nx, ny, nz]);
            }
        }
    }
    for extents in shapes {
        let n: usize = extents.iter().product();
        let f = ImageField::new(
            &extents,
            (0..n).map(|i| ((i * 29 + 3) % 23) as f64 / 23.0 - 0.4).collect(),
        )
        .unwrap();
        let a = dense_frame_matrix(FrameBackend::BSplineFramelet, &extents).unwrap();
        let dense = a.mul_vec(f.data());
        let fast = analyze(&f, FrameBackend::BSplineFramelet).unwrap().flatten();
        let worst = dense
            .iter()
            .zip(&fast)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-12, "{extents:?}: {worst}");
        assert!(a.gram().distance_from_identity() <= 1e-12, "{extents:?}");
    }
}

#[test]
fn dtcwt_is_tight_on_block_aligned_grids() {
    for (extents, levels) in [([8, 8], 3), ([16, 8], 2), ([4, 12], 2)] {
        let backend = FrameBackend::dual_tree(levels);
        let a = dense_frame_matrix(backend, &extents).unwrap();
        assert!(a.gram().distance_from_identity() < 1e-12, "{extents:?}");
        // synthesis is the transpose of analysis
        let f = ImageField::from_fn(&extents, |c| (c[0] as f64 * 0.3).cos() + c[1] as f64 * 0.1).unwrap();
        let c = soft_threshold(&analyze(&f, backend).unwrap(), &ThresholdVector::scalar(0.05)).unwrap();
        let via_matrix = a.transpose_mul_vec(&c.flatten());
        let via_fast = synthesize(&c, backend).unwrap();
        let worst = via_matrix
            .iter()
            .zip(via_fast.data())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12);
    }
}

#[test]
fn impulse_denoise_matches_dense_oracle() {
    let extents = [8, 8];
    let mut f = ImageField::zeros(&extents).unwrap();
    f.set(&[3, 4], 1.0);
    let t = ThresholdVector::scalar(0.1);
    let got = denoise(&f, FrameBackend::BSplineFramelet, &t).unwrap();

    let a = dense_frame_matrix(FrameBackend::BSplineFramelet, &extents).unwrap();
    let mut coeffs = a.mul_vec(f.data());
    // lowpass rows (block 0) are exempt
    for c in coeffs.iter_mut().skip(64) {
        *c = if c.abs() > 0.1 {
            c.signum() * (c.abs() - 0.1)
        } else {
            0.0
        };
    }
    let expected = a.transpose_mul_vec(&coeffs);
    for (x, y) in got.data().iter().zip(&expected) {
        assert!((x - y).abs() <= 1e-12);
    }
    // the impulse is attenuated but not removed
    assert!(got.get(&[3, 4]) < 1.0 && got.get(&[3, 4]) > 0.0);
}

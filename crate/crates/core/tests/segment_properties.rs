use proptest::prelude::*;
use tfseg::segment::{segment, IterationStats, SegmentParams};
use tfseg::transform::FrameBackend;
use tfseg::{Error, ImageField};

fn check_run(stats: &IterationStats, mask: &ImageField) -> Result<(), TestCaseError> {
    prop_assert!(mask.is_binary());
    let recs = stats.records();
    prop_assert!(!recs.is_empty());
    let counts = stats.cardinalities();
    prop_assert_eq!(*counts.last().unwrap(), 0);
    // the first pass may recruit flat pixels, so it is compared against
    // Lambda(0) plus its recruits
    prop_assert!(counts[1] < recs[0].candidates + recs[0].recruited);
    for w in counts[1..].windows(2) {
        prop_assert!(w[1] < w[0]);
    }
    for r in recs {
        let g = r.range;
        prop_assert!(0.0 <= g.alpha && g.alpha <= g.mu && g.mu <= g.beta && g.beta <= 1.0);
        prop_assert!(g.mu_minus <= g.mu && g.mu <= g.mu_plus);
    }
    prop_assert!(stats.iterations() <= stats.omega() + 1);
    Ok(())
}

fn backend_strategy() -> impl Strategy<Value = FrameBackend> {
    prop_oneof![
        Just(FrameBackend::BSplineFramelet),
        (1usize..=3).prop_map(FrameBackend::dual_tree),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_fields_terminate(
        nx in 4usize..24,
        ny in 4usize..24,
        seed in prop::collection::vec(0.0f64..1.0, 576),
        backend in backend_strategy(),
        lambda in 0.0f64..0.3,
    ) {
        let f = ImageField::new(&[nx, ny], seed[..nx * ny].to_vec()).unwrap();
        let params = SegmentParams { lambda, backend, ..SegmentParams::defaults_for(2) };
        let out = segment(&f, &params).unwrap();
        check_run(&out.stats, &out.mask)?;
    }

    #[test]
    fn near_constant_fields_terminate(
        n in 4usize..16,
        bumps in prop::collection::vec((0usize..256, 0.0f64..1e-9), 1..6),
    ) {
        let mut data = vec![0.5; n * n];
        for (i, b) in bumps {
            data[i % (n * n)] += b;
        }
        let f = ImageField::new(&[n, n], data).unwrap();
        let params = SegmentParams { backend: FrameBackend::BSplineFramelet, ..SegmentParams::defaults_for(2) };
        match segment(&f, &params) {
            Ok(out) => check_run(&out.stats, &out.mask)?,
            Err(Error::NoCandidates { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn random_volumes_terminate(
        n in 3usize..9,
        seed in prop::collection::vec(0.0f64..1.0, 512),
    ) {
        let f = ImageField::new(&[n, n, n], seed[..n * n * n].to_vec()).unwrap();
        let out = segment(&f, &SegmentParams::defaults_for(3)).unwrap();
        check_run(&out.stats, &out.mask)?;
    }
}

#[test]
fn quantized_levels_terminate() {
    // few distinct grey levels make ties with the mean likely
    for levels in 2..6usize {
        let f = ImageField::from_fn(&[17, 13], |c| ((c[0] * 5 + c[1] * 3) % levels) as f64).unwrap();
        let out = segment(&f, &SegmentParams::defaults_for(2)).unwrap();
        assert!(out.mask.is_binary());
        assert_eq!(*out.stats.cardinalities().last().unwrap(), 0);
    }
}

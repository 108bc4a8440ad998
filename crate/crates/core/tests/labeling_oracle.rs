mod oracles;

use fillseg_core::regions::{
    filter_small, label_components, region_stats, total_area_mm2, Connectivity, DEFAULT_PIXEL_AREA_MM2,
};
use fillseg_core::Mask;
use proptest::prelude::*;

fn mask(max_side: usize) -> impl Strategy<Value = Mask> {
    (1..=max_side, 1..=max_side, 0.1f64..0.9).prop_flat_map(|(w, h, density)| {
        proptest::collection::vec(proptest::bool::weighted(density), w * h).prop_map(move |bits| {
            Mask::new(w, h, bits.into_iter().map(u8::from).collect()).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn matches_flood_fill(m in mask(16)) {
        for (conn, eight) in [(Connectivity::Four, false), (Connectivity::Eight, true)] {
            let got = label_components(&m, conn);
            let (want, count) = oracles::flood_fill(&m, eight);
            prop_assert_eq!(got.labels(), want.as_slice());
            prop_assert_eq!(got.label_count(), count);
            let regions = region_stats(&got, DEFAULT_PIXEL_AREA_MM2);
            let area: u64 = regions.iter().map(|r| r.area_px).sum();
            prop_assert_eq!(area as usize, m.count());
        }
    }

    #[test]
    fn eight_never_has_more_components(m in mask(24)) {
        let four = label_components(&m, Connectivity::Four).label_count();
        let eight = label_components(&m, Connectivity::Eight).label_count();
        prop_assert!(eight <= four);
    }

    #[test]
    fn translation_invariant(m in mask(12), dr in 0usize..5, dc in 0usize..5) {
        let shifted = Mask::from_fn(m.width() + dc, m.height() + dr, |r, c| {
            r >= dr && c >= dc && m.get(r - dr, c - dc)
        });
        let a = label_components(&m, Connectivity::Eight);
        let b = label_components(&shifted, Connectivity::Eight);
        prop_assert_eq!(a.label_count(), b.label_count());
        for r in 0..m.height() {
            for c in 0..m.width() {
                prop_assert_eq!(a.get(r, c), b.get(r + dr, c + dc));
            }
        }
    }

    #[test]
    fn region_invariants(m in mask(16), min_px in 0u64..6) {
        let labels = filter_small(&label_components(&m, Connectivity::Eight), min_px);
        let regions = region_stats(&labels, DEFAULT_PIXEL_AREA_MM2);
        prop_assert_eq!(regions.len() as u32, labels.label_count());
        for (i, r) in regions.iter().enumerate() {
            prop_assert_eq!(r.label as usize, i + 1);
            prop_assert!(r.area_px >= min_px.max(1));
            prop_assert_eq!(r.area_mm2, r.area_px as f64 * DEFAULT_PIXEL_AREA_MM2);
            prop_assert!((r.area_mm2 / r.area_px as f64 - DEFAULT_PIXEL_AREA_MM2).abs() < 1e-15);
            let (cr, cc) = r.centroid;
            prop_assert!(cr >= r.bbox.min_row as f64 && cr <= r.bbox.max_row as f64);
            prop_assert!(cc >= r.bbox.min_col as f64 && cc <= r.bbox.max_col as f64);
        }
        let total: f64 = regions.iter().map(|r| r.area_mm2).sum();
        prop_assert_eq!(total_area_mm2(&regions), total);
    }
}

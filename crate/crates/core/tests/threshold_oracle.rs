mod oracles;

use fillseg_core::threshold::{binarize, histogram, otsu, Histogram, ThresholdError};
use fillseg_core::Image;
use proptest::prelude::*;

/// Histograms with between 0 and `max_bins` occupied bins.
fn hist(max_bins: usize) -> impl Strategy<Value = [u64; 256]> {
    proptest::collection::vec((any::<u8>(), 1u64..2000), 0..=max_bins).prop_map(|bins| {
        let mut counts = [0u64; 256];
        for (v, c) in bins {
            counts[v as usize] += c;
        }
        counts
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn otsu_matches_exhaustive_search(counts in prop_oneof![hist(4), hist(40), hist(256)]) {
        let got = otsu(&Histogram::from_counts(counts));
        match oracles::otsu(&counts) {
            Some(t) => {
                prop_assert_eq!(got.clone(), Ok(t));
                let h = Histogram::from_counts(counts);
                prop_assert!(t >= h.min_value().unwrap());
                prop_assert!(t < h.max_value().unwrap());
            }
            None => prop_assert_eq!(got, Err(ThresholdError::DegenerateHistogram)),
        }
    }
}

fn image() -> impl Strategy<Value = Image> {
    (1usize..20, 1usize..20).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<u8>(), w * h).prop_map(move |px| Image::new(w, h, px).unwrap())
    })
}

proptest! {
    #[test]
    fn histogram_counts_every_pixel(img in image()) {
        let h = histogram(&img);
        prop_assert_eq!(h.total() as usize, img.len());
        for v in 0..256 {
            let direct = img.pixels().iter().filter(|&&p| p as usize == v).count() as u64;
            prop_assert_eq!(h.counts()[v], direct);
        }
    }

    #[test]
    fn binarize_monotone_and_counted(img in image(), a in any::<u8>(), b in any::<u8>()) {
        let (lo, hi) = (a.min(b), a.max(b));
        let m_lo = binarize(&img, lo);
        let m_hi = binarize(&img, hi);
        for (&x, &y) in m_lo.bits().iter().zip(m_hi.bits()) {
            prop_assert!(y <= x);
        }
        prop_assert_eq!(m_lo.count() as u64, histogram(&img).count_above(lo));
    }
}

#[test]
fn documented_otsu_examples() {
    let mut counts = [0u64; 256];
    counts[0] = 5;
    counts[255] = 5;
    assert_eq!(oracles::otsu(&counts), Some(0));
    assert_eq!(otsu(&Histogram::from_counts(counts)), Ok(0));

    let mut counts = [0u64; 256];
    counts[10] = 10;
    counts[200] = 10;
    assert_eq!(oracles::otsu(&counts), Some(10));
    assert_eq!(otsu(&Histogram::from_counts(counts)), Ok(10));
}

#[test]
fn huge_counts_do_not_overflow() {
    let mut counts = [0u64; 256];
    counts[3] = u32::MAX as u64;
    counts[250] = 7;
    counts[251] = u32::MAX as u64 / 3;
    assert_eq!(otsu(&Histogram::from_counts(counts)), Ok(3));
}

//! Property-based invariants.

use proptest::prelude::*;
use secmc::frame::build_frame_opts;
use secmc::logic::{self, Cut, Cuts};
use secmc::oracle::{self, GenBounds};
use secmc::trace::destutter;

proptest! {
    #[test]
    fn destutter_is_idempotent_and_shrinking(xs in proptest::collection::vec(0u8..4, 0..40)) {
        let once = destutter(&xs);
        prop_assert!(once.len() <= xs.len());
        prop_assert_eq!(destutter(&once), once.clone());
        // first element survives
        prop_assert_eq!(once.first(), xs.first());
        // no two consecutive entries equal
        prop_assert!(once.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn cut_vectors_denote_temporally_sound_sets(seed in 0u64..60, picks in proptest::collection::vec(0u32..8, 1..4)) {
        let (_, program, ctx) = oracle::gen_entry(seed, GenBounds::default());
        let frame = build_frame_opts(&program, &ctx, 10_000, 4096, false).unwrap();
        let cuts = Cuts(
            frame
                .runs
                .iter()
                .enumerate()
                .map(|(r, run)| {
                    let c = picks[r % picks.len()];
                    if c as usize > run.stores.len() {
                        Cut::Empty
                    } else {
                        Cut::At(c)
                    }
                })
                .collect(),
        );
        let mask = cuts.mask(&frame);
        prop_assert!(logic::is_temporally_sound(&frame, &mask));
        // canonicalizing through from_mask preserves the denoted set
        prop_assert_eq!(Cuts::from_mask(&frame, &mask).mask(&frame), mask);
    }
}

use proptest::prelude::*;

use kneser::isometry::is_isometric;
use kneser::lattice::lattice_z;
use kneser::neighbors::{enumerate_genus, isotropic_lines, neighbor, GenusCatalog, GenusOptions};
use kneser::stats::{neighbor_matrix, StatsMode, StatsOptions};

fn z9() -> GenusCatalog {
    enumerate_genus(&lattice_z(9), 3, &GenusOptions::default()).unwrap()
}

/// Counts built from explicit neighbors and pairwise isometry tests only.
#[test]
fn exact_counts_match_direct_construction() {
    let c = z9();
    let reps = c.representatives();
    let fast = neighbor_matrix(&c, 3, StatsMode::Exact, &StatsOptions::default()).unwrap();
    for (x, l) in reps.iter().enumerate() {
        let mut row = vec![0u64; reps.len()];
        for line in isotropic_lines(l, 3).unwrap() {
            let n = neighbor(l, &line).unwrap().lattice;
            let hits: Vec<usize> = (0..reps.len())
                .filter(|&y| is_isometric(&reps[y], &n).is_some())
                .collect();
            assert_eq!(hits.len(), 1);
            row[hits[0]] += 1;
        }
        assert_eq!(row, fast.counts[x]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn exact_counts_ignore_chunking(chunks in 1usize..40, orbits in any::<bool>()) {
        let c = z9();
        let base = neighbor_matrix(&c, 3, StatsMode::Exact, &StatsOptions::default()).unwrap();
        let opts = StatsOptions { chunks, orbit_reduction: orbits, ..Default::default() };
        let s = neighbor_matrix(&c, 3, StatsMode::Exact, &opts).unwrap();
        prop_assert_eq!(s.counts, base.counts);
    }

    #[test]
    fn sampled_rows_sum_to_sample_size(seed in any::<u64>(), count in 1usize..300, chunks in 1usize..9) {
        let c = z9();
        let mode = StatsMode::Sampled { seed, count };
        let opts = StatsOptions { chunks, ..Default::default() };
        let a = neighbor_matrix(&c, 5, mode, &opts).unwrap();
        let b = neighbor_matrix(&c, 5, mode, &opts).unwrap();
        for row in &a.counts {
            prop_assert_eq!(row.iter().sum::<u64>() as usize, count);
        }
        prop_assert_eq!(a.counts, b.counts);
    }
}

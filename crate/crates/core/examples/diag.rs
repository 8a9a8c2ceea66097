use std::time::Instant;

use catalysis_core::model::GasCount;
use catalysis_core::score::threshold_search;

fn main() {
    for k in [7usize, 8, 9] {
        let t0 = Instant::now();
        let res = threshold_search(GasCount::Finite(3), 5, k, 1e-4).unwrap();
        println!(
            "threshold(n=3, L=5, K={k}) = {:?}  [{:.1}s]",
            res.p1_star,
            t0.elapsed().as_secs_f64()
        );
    }
}

use catalysis_core::model::GasCount;
use catalysis_core::score::reference::reference_score_table;
use catalysis_core::score::{fixed_point_solve, SolverConfig};

fn main() {
    let published = reference_score_table();
    for p1 in [0.4670, 0.4680, 0.4685, 0.4690, 0.4695, 0.4699] {
        let mut cfg = SolverConfig::new(GasCount::Finite(4), 3, p1);
        cfg.tolerance = 1e-8;
        let out = fixed_point_solve(&cfg).unwrap();
        let devs: Vec<f64> = out
            .table
            .iter()
            .map(|(b, s)| s - published.score(b).unwrap())
            .collect();
        let max = devs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let mean = devs.iter().sum::<f64>() / devs.len() as f64;
        println!(
            "p1 {p1:.4}: ref-test {:+.6} maxdev {max:.4} meandev {mean:+.4}",
            out.reference_drift
        );
    }
}

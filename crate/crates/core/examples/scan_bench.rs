//! Quick throughput check for the Gray-code scan.

use std::time::Instant;

use npp_core::partition::Partition;
use npp_core::sampler::{sample_planted, PlantedSpec};
use npp_core::scan::{full_scan, ScanOptions};

fn main() {
    for &n in &[22usize, 24, 26] {
        let inst = sample_planted(&PlantedSpec::new(n, 7)).unwrap();
        let star = Partition::all_plus(n);
        for parallel in [false, true] {
            let opts = ScanOptions { max_n: 30, parallel };
            let t0 = Instant::now();
            let r = full_scan(&inst, &star, &[], &opts).unwrap();
            let dt = t0.elapsed().as_secs_f64();
            let rate = r.states as f64 / dt / 1e6;
            println!(
                "n = {n:2} parallel = {parallel:5} states = {:>10} time = {dt:7.3}s rate = {rate:7.1} Mstate/s log2H = {:8.3}",
                r.states,
                r.global_min_excl.1.log2_hamiltonian()
            );
        }
    }
}

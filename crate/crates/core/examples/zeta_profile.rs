//! Aggregate zeta profile: mean log2 zeta[k] across planted instances.

use npp_core::sampler::{sample_planted, PlantedSpec};
use npp_core::scan::{full_scan, ScanOptions};

fn main() {
    let n = 16usize;
    let trials = 2000u64;
    let mut sums = vec![0.0f64; n - 1];
    for t in 0..trials {
        let inst = sample_planted(&PlantedSpec::new(n, 31_000 + t)).unwrap();
        let star = inst.planting().unwrap().sigma_star.clone();
        let r = full_scan(&inst, &star, &[], &ScanOptions::default()).unwrap();
        for (i, e) in r.zeta.iter().enumerate() {
            sums[i] += e.log2_hamiltonian();
        }
    }
    for k in 1..n {
        println!("k = {k:2}  mean log2 zeta = {:.4}", sums[k - 1] / trials as f64);
    }
}

//! Polynomial-time solvers and algorithm probes.
//!
//! The largest differencing method repeatedly replaces the two largest
//! remaining magnitudes a >= b by a - b, recording a must-differ constraint
//! between them; after n-1 rounds the constraint graph is a tree whose
//! 2-coloring recovers the partition, and |<sigma, X>| equals the final
//! residue exactly. All arithmetic stays on the fixed-point grid.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::energy::Threshold;
use crate::fixed::FixedReal;
use crate::instance::Instance;
use crate::partition::Partition;
use crate::rng::{derive, substream};
use crate::sampler::{correlated_pair_with, sample_planted, PlantedSpec};
use crate::scan::{full_scan, ScanOptions};
use crate::wide::I256;
use crate::CoreError;

/// A partitioning algorithm: a pure function of (instance, seed).
pub trait Algorithm: Sync {
    fn name(&self) -> &str;
    fn solve(&self, inst: &Instance, seed: u64) -> Partition;
}

/// Karmarkar-Karp largest differencing method.
pub struct Ldm;

/// Greedy descending assignment to the lighter side.
pub struct Greedy;

/// Best of `budget` uniformly random canonical partitions; switches to
/// exhaustive enumeration when the budget covers the whole space.
pub struct RandomSearch {
    pub budget: u64,
}

/// Exhaustive optimum via full scan; intractable beyond small n, used as a
/// reference algorithm in probes.
pub struct ExhaustiveMin {
    pub opts: ScanOptions,
}

/// Returns a fixed partition regardless of input.
pub struct Constant(pub Partition);

impl Algorithm for Ldm {
    fn name(&self) -> &str {
        "ldm"
    }
    fn solve(&self, inst: &Instance, _seed: u64) -> Partition {
        ldm(inst).0
    }
}

impl Algorithm for Greedy {
    fn name(&self) -> &str {
        "greedy"
    }
    fn solve(&self, inst: &Instance, _seed: u64) -> Partition {
        greedy(inst)
    }
}

impl Algorithm for RandomSearch {
    fn name(&self) -> &str {
        "random"
    }
    fn solve(&self, inst: &Instance, seed: u64) -> Partition {
        random_search(inst, self.budget, seed)
    }
}

impl Algorithm for ExhaustiveMin {
    fn name(&self) -> &str {
        "exact"
    }
    fn solve(&self, inst: &Instance, _seed: u64) -> Partition {
        let star = Partition::all_plus(inst.n());
        full_scan(inst, &star, &[], &self.opts)
            .expect("instance exceeds the scan budget")
            .global_min
            .0
    }
}

impl Algorithm for Constant {
    fn name(&self) -> &str {
        "constant"
    }
    fn solve(&self, _inst: &Instance, _seed: u64) -> Partition {
        self.0.clone()
    }
}

/// Heap key: larger magnitude first, ties to the lowest original index of
/// any element absorbed into the node.
#[derive(PartialEq, Eq)]
struct HeapItem {
    mag: I256,
    rep: usize,
    node: usize,
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.mag
            .cmp(&other.mag)
            .then_with(|| other.rep.cmp(&self.rep))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The differencing schedule plus tree 2-coloring. Returns the canonical
/// partition and the exact final residue |<sigma, X>|.
pub fn ldm(inst: &Instance) -> (Partition, FixedReal) {
    let n = inst.n();
    // Nodes 0..n are the originals; merges append.
    let mut mag: Vec<I256> = inst.values().iter().map(|v| v.numerator().abs()).collect();
    let mut children: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut heap: BinaryHeap<HeapItem> = (0..n)
        .map(|i| HeapItem {
            mag: mag[i],
            rep: i,
            node: i,
        })
        .collect();

    while heap.len() > 1 {
        let a = heap.pop().unwrap();
        let b = heap.pop().unwrap();
        let node = mag.len();
        mag.push(a.mag - b.mag);
        children.push(Some((a.node, b.node)));
        heap.push(HeapItem {
            mag: mag[node],
            rep: a.rep.min(b.rep),
            node,
        });
    }
    let root = heap.pop().expect("n >= 1").node;
    let residue = FixedReal::from_numerator(mag[root]);

    // Color the tree: the larger child keeps the parent side, the smaller
    // child takes the opposite side.
    let mut side = vec![1i8; mag.len()];
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        if let Some((a, b)) = children[v] {
            side[a] = side[v];
            side[b] = -side[v];
            stack.push(a);
            stack.push(b);
        }
    }

    // side colors magnitudes; recover signs for the signed inputs.
    let mut sigma = Partition::all_plus(n);
    for i in 0..n {
        let value_sign = if inst.value(i).numerator().is_negative() {
            -1
        } else {
            1
        };
        sigma.set_sign(i, side[i] * value_sign);
    }
    (sigma.canonicalize(), residue)
}

/// Sort by descending magnitude, assign each number to the side with the
/// smaller running sum (ties to the first side).
pub fn greedy(inst: &Instance) -> Partition {
    let n = inst.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        inst.value(j)
            .numerator()
            .abs()
            .cmp(&inst.value(i).numerator().abs())
            .then(i.cmp(&j))
    });
    let mut sum_a = I256::ZERO;
    let mut sum_b = I256::ZERO;
    let mut side = vec![1i8; n];
    for &i in &order {
        let m = inst.value(i).numerator().abs();
        if sum_b < sum_a {
            side[i] = -1;
            sum_b += m;
        } else {
            sum_a += m;
        }
    }
    let mut sigma = Partition::all_plus(n);
    for i in 0..n {
        let value_sign = if inst.value(i).numerator().is_negative() {
            -1
        } else {
            1
        };
        sigma.set_sign(i, side[i] * value_sign);
    }
    sigma.canonicalize()
}

/// Best of `budget` uniformly random canonical partitions. A budget that
/// covers all 2^(n-1) canonical states enumerates them instead, so the
/// result is the exact optimum.
pub fn random_search(inst: &Instance, budget: u64, seed: u64) -> Partition {
    assert!(budget >= 1, "budget must be positive");
    let n = inst.n();
    let free = n - 1;
    let exhaustive = free < 63 && budget >= (1u64 << free);

    let mut best: Option<(I256, Partition)> = None;
    let mut offer = |sigma: Partition| {
        let abs = inst
            .inner_product(&sigma)
            .expect("dimensions match by construction")
            .abs();
        let better = match &best {
            None => true,
            Some((b, bp)) => abs < *b || (abs == *b && sigma < *bp),
        };
        if better {
            best = Some((abs, sigma));
        }
    };

    if exhaustive {
        for mask in 0..1u64 << free {
            let mut sigma = Partition::all_plus(n);
            for j in 0..free {
                if mask >> j & 1 == 1 {
                    sigma.set_sign(j + 1, -1);
                }
            }
            offer(sigma);
        }
    } else {
        let mut rng = substream(seed, 0);
        for _ in 0..budget {
            let mut sigma = Partition::all_plus(n);
            for j in 1..n {
                if rand::Rng::gen::<bool>(&mut rng) {
                    sigma.set_sign(j, -1);
                }
            }
            offer(sigma);
        }
    }
    best.expect("budget >= 1").1
}

/// One success/stability/anti-concentration record of a correlated trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRecord {
    pub trial: u64,
    pub rho: f64,
    /// ||X - Y||_2^2, from the exact coordinate differences.
    pub dist_sq: f64,
    pub d_h: usize,
    /// d_h <= f + L * dist_sq?
    pub bound_ok: bool,
}

/// Fraction of planted draws on which the algorithm's output has
/// `H <= 2^(-eps n)`; the threshold comparison is exact.
pub fn success_probe(
    alg: &dyn Algorithm,
    spec: &PlantedSpec,
    eps: f64,
    trials: u64,
) -> Result<f64, CoreError> {
    if trials == 0 {
        return Err(CoreError::BadParameter("trials must be >= 1".into()));
    }
    let thr = Threshold::from_log2(
        spec.n as u32,
        spec.frac_bits,
        -eps * spec.n as f64,
    )?;
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| {
            let inst = sample_planted(&spec.clone().with_seed(derive(spec.seed, 2 * t)))
                .expect("spec validated on first draw");
            let sigma = alg.solve(&inst, derive(spec.seed, 2 * t + 1));
            let e = inst.hamiltonian(&sigma).expect("algorithm output has length n");
            e.le(&thr) as u64
        })
        .sum::<u64>();
    Ok(hits as f64 / trials as f64)
}

/// Hamming stability of an algorithm on rho-correlated Gaussian pairs.
/// Both solves share the same algorithm seed, as stability requires.
pub fn stability_probe(
    alg: &dyn Algorithm,
    n: usize,
    frac_bits: u32,
    rho: f64,
    f: f64,
    l: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<StabilityRecord>, CoreError> {
    if trials == 0 {
        return Err(CoreError::BadParameter("trials must be >= 1".into()));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let (x, y) = correlated_pair_with(n, frac_bits, rho, derive(seed, 2 * t))?;
            let omega = derive(seed, 2 * t + 1);
            let sx = alg.solve(&x, omega);
            let sy = alg.solve(&y, omega);
            let d_h = sx.hamming_distance(&sy)?;
            let dist_sq: f64 = x
                .values()
                .iter()
                .zip(y.values())
                .map(|(a, b)| {
                    let diff = (*a - *b).to_f64(frac_bits);
                    diff * diff
                })
                .sum();
            Ok(StabilityRecord {
                trial: t,
                rho,
                dist_sq,
                d_h,
                bound_ok: (d_h as f64) <= f + l * dist_sq,
            })
        })
        .collect()
}

/// Fraction of planted draws whose output differs from +-sigma*.
pub fn anticoncentration_probe(
    alg: &dyn Algorithm,
    spec: &PlantedSpec,
    trials: u64,
) -> Result<f64, CoreError> {
    if trials == 0 {
        return Err(CoreError::BadParameter("trials must be >= 1".into()));
    }
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| {
            let inst = sample_planted(&spec.clone().with_seed(derive(spec.seed, 2 * t)))
                .expect("spec validated on first draw");
            let star = inst.planting().unwrap().sigma_star.canonicalize();
            let sigma = alg
                .solve(&inst, derive(spec.seed, 2 * t + 1))
                .canonicalize();
            (sigma != star) as u64
        })
        .sum::<u64>();
    Ok(hits as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::sample_unplanted;

    #[test]
    fn ldm_perfect_partition() {
        let inst = Instance::quantize(&[4.0, 5.0, 6.0, 7.0], 32).unwrap();
        let (sigma, residue) = ldm(&inst);
        assert!(residue.is_zero());
        assert!(inst.hamiltonian(&sigma).unwrap().is_zero());
        // {7,4} vs {6,5}.
        assert_eq!(sigma.sign(0), sigma.sign(3));
        assert_eq!(sigma.sign(1), sigma.sign(2));
        assert_ne!(sigma.sign(0), sigma.sign(1));
    }

    #[test]
    fn ldm_two_numbers() {
        let inst = Instance::quantize(&[5.0, 3.0], 32).unwrap();
        let (sigma, residue) = ldm(&inst);
        assert_eq!(residue.to_f64(32), 2.0);
        let e = inst.hamiltonian(&sigma).unwrap();
        assert!((e.hamiltonian() - 2.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ldm_single_number() {
        let inst = Instance::quantize(&[-1.75], 32).unwrap();
        let (sigma, residue) = ldm(&inst);
        assert_eq!(residue.to_f64(32), 1.75);
        assert_eq!(sigma.n(), 1);
        assert!((inst.hamiltonian(&sigma).unwrap().hamiltonian() - 1.75).abs() < 1e-12);
    }

    #[test]
    fn ldm_residue_identity_random() {
        for seed in 0..50 {
            let inst = sample_unplanted(40, seed).unwrap();
            let (sigma, residue) = ldm(&inst);
            let ip = inst.inner_product(&sigma).unwrap();
            assert_eq!(ip.abs(), residue.numerator(), "seed {seed}");
        }
    }

    #[test]
    fn greedy_trace_and_bound() {
        let inst = Instance::quantize(&[4.0, 5.0, 6.0, 7.0], 32).unwrap();
        let sigma = greedy(&inst);
        assert!(inst.hamiltonian(&sigma).unwrap().is_zero());
        let inst = Instance::quantize(&[-2.0], 16).unwrap();
        let sigma = greedy(&inst);
        assert!((inst.hamiltonian(&sigma).unwrap().hamiltonian() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn random_search_exhaustive_matches_scan() {
        let inst = sample_unplanted(10, 5).unwrap();
        let sigma = random_search(&inst, 1 << 9, 1);
        let star = Partition::all_plus(10);
        let opt = full_scan(&inst, &star, &[], &ScanOptions::default()).unwrap();
        assert_eq!(
            inst.hamiltonian(&sigma).unwrap(),
            opt.global_min.1
        );
    }

    #[test]
    fn random_search_never_worse_than_first_draw() {
        let inst = sample_unplanted(24, 8).unwrap();
        let first = random_search(&inst, 1, 42);
        let more = random_search(&inst, 500, 42);
        assert!(
            inst.hamiltonian(&more).unwrap() <= inst.hamiltonian(&first).unwrap()
        );
    }

    #[test]
    fn constant_algorithm_probes() {
        let star = Partition::all_plus(12);
        let spec = PlantedSpec::new(12, 77);
        let frac = anticoncentration_probe(&Constant(star.clone()), &spec, 40).unwrap();
        assert_eq!(frac, 0.0);
        let mut other = star.clone();
        other.set_sign(3, -1);
        other.set_sign(7, -1);
        let frac = anticoncentration_probe(&Constant(other), &spec, 40).unwrap();
        assert_eq!(frac, 1.0);
    }

    #[test]
    fn stability_constant_is_flat() {
        let alg = Constant(Partition::all_plus(16));
        let recs = stability_probe(&alg, 16, 64, 0.5, 0.0, 1.0, 50, 3).unwrap();
        assert!(recs.iter().all(|r| r.d_h == 0 && r.bound_ok));
    }

    #[test]
    fn success_probe_monotone_in_eps() {
        let spec = PlantedSpec::new(14, 5);
        let a = success_probe(&Ldm, &spec, 0.2, 60).unwrap();
        let b = success_probe(&Ldm, &spec, 0.5, 60).unwrap();
        assert!(b <= a, "success fraction must shrink as eps grows");
    }
}

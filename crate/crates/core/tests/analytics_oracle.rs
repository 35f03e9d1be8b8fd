//! Exact and quadrature oracles for the analytic predictors.

use npp_core::analytics::*;
use npp_core::partition::Partition;
use npp_core::quadrature::{bivariate_abs_box, normal_abs_box};
use npp_core::sampler::{sample_planted, PlantedSpec};
use npp_core::Threshold;
use rand::Rng;

#[test]
fn binomial_entropy_sandwich_all_n_up_to_100() {
    for n in 2..=100u64 {
        for k in 1..n {
            let (lo, exact, hi) = binom_entropy_sandwich(n, k).unwrap();
            assert!(
                lo <= exact + 1e-9 && exact <= hi + 1e-9,
                "C({n},{k}): {lo} <= {exact} <= {hi}"
            );
        }
    }
}

#[test]
fn vandermonde_exhaustive_up_to_60() {
    for n in 1..=60u64 {
        for k0 in 0..=n / 2 {
            assert!(
                vandermonde_convolution_holds(n, k0).unwrap(),
                "failed at n = {n}, k0 = {k0}"
            );
        }
    }
}

#[test]
fn binomial_sum_entropy_bound_up_to_60() {
    // sum_{i <= alpha n} C(n,i) <= 2^(n h(alpha)) for alpha <= 1/2.
    for n in 1..=60u64 {
        for k in 0..=n / 2 {
            let sum = binom_partial_sum(n, k).unwrap();
            let alpha = k as f64 / n as f64;
            let bound = n as f64 * binary_entropy(alpha).unwrap();
            assert!(
                log2_biguint(&sum) <= bound + 1e-9,
                "n = {n}, k = {k}: log2 sum = {} > {bound}",
                log2_biguint(&sum)
            );
        }
    }
}

#[test]
fn sublinear_binomial_log_ratio() {
    // log2 C(n, d) / (d log2(n/d)) at d = sqrt(n) drifts to 1 from above;
    // the correction is ~log2(e)/log2(sqrt(n)), still 0.26 at n = 10^3,
    // so the [0.8, 1.2] band is asserted only once n reaches 10^5.
    let mut prev = f64::INFINITY;
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        let d = (n as f64).sqrt() as u64;
        let exact = log2_biguint(&binom_exact(n, d).unwrap());
        let ratio = exact / (d as f64 * (n as f64 / d as f64).log2());
        println!("n = {n:>8}, d = {d:>5}, ratio = {ratio:.4}");
        assert!(ratio > 1.0 && ratio < 1.3, "n = {n}: ratio {ratio}");
        assert!(ratio < prev, "ratio must decrease toward 1");
        prev = ratio;
        if n >= 100_000 {
            assert!((0.8..=1.2).contains(&ratio), "n = {n}: ratio {ratio}");
        }
    }
}

#[test]
fn gauss_box_1_bracket_contains_quadrature() {
    for &z in &[1e-4, 1e-3, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5] {
        let b = gauss_box_1(z).unwrap();
        let truth = normal_abs_box(z);
        // At tiny z the bracket margin is O(z^5), below f64 resolution of
        // the values themselves; allow a few ulps.
        let slack = 4e-16 * truth;
        assert!(
            b.lower <= truth + slack && truth <= b.upper + slack,
            "z = {z}: {} <= {truth} <= {}",
            b.lower,
            b.upper
        );
    }
    // Monotone in z.
    let mut prev = 0.0;
    for i in 1..50 {
        let b = gauss_box_1(i as f64 / 50.0).unwrap();
        assert!(b.approx > prev);
        prev = b.approx;
    }
}

#[test]
fn gauss_box_2_bracket_contains_quadrature() {
    let zs = [1e-3, 0.01, 0.1, 0.2];
    let rhos = [0.0, 0.3, 0.6, 0.9];
    let mut checked = 0;
    for &z1 in &zs {
        for &z2 in &zs {
            for &rho in &rhos {
                match gauss_box_2(z1, z2, rho) {
                    Ok((lo, hi)) => {
                        let truth = bivariate_abs_box(z1, z2, rho);
                        assert!(
                            lo <= truth && truth <= hi,
                            "z1={z1} z2={z2} rho={rho}: {lo} <= {truth} <= {hi}"
                        );
                        checked += 1;
                    }
                    Err(_) => {
                        // Validity condition excluded this corner.
                        assert!((z1 * z1 + z2 * z2) / (1.0 - rho * rho).sqrt() >= 1.0);
                    }
                }
            }
        }
    }
    assert!(checked > 40, "grid mostly valid, checked {checked}");
}

#[test]
fn lambda_matches_eigensolver_on_dense_grid() {
    for i in 1..1000 {
        let rho = i as f64 / 1000.0;
        let lam = overlap_gram_min_eigenvalue(rho).unwrap();
        let eig = sym3_eigenvalues(&overlap_gram_matrix(rho));
        assert!(
            (lam - eig[2]).abs() < 1e-10,
            "rho = {rho}: formula {lam} vs solver {}",
            eig[2]
        );
    }
}

#[test]
fn hoffman_wielandt_property_of_eigensolver() {
    let mut rng = npp_core::rng::substream(424242, 0);
    for trial in 0..1000 {
        let mut a = [[0.0f64; 3]; 3];
        let mut e = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let v: f64 = rng.gen_range(-2.0..2.0);
                a[i][j] = v;
                a[j][i] = v;
                let w: f64 = rng.gen_range(-0.1..0.1);
                e[i][j] = w;
                e[j][i] = w;
            }
        }
        let mut ape = a;
        for i in 0..3 {
            for j in 0..3 {
                ape[i][j] += e[i][j];
            }
        }
        let la = sym3_eigenvalues(&a);
        let lb = sym3_eigenvalues(&ape);
        let dist2: f64 = la.iter().zip(&lb).map(|(x, y)| (x - y) * (x - y)).sum();
        let fro2: f64 = e.iter().flatten().map(|x| x * x).sum();
        assert!(
            dist2.sqrt() <= fro2.sqrt() + 1e-9,
            "trial {trial}: {} > {}",
            dist2.sqrt(),
            fro2.sqrt()
        );
    }
}

#[test]
fn gram_determinant_lower_bound_random_triples() {
    let mut rng = npp_core::rng::substream(31, 7);
    let mut done = 0;
    while done < 10_000 {
        let n = rng.gen_range(8..=30usize);
        let mut triple = Vec::with_capacity(3);
        for _ in 0..3 {
            let mut p = Partition::all_plus(n);
            for i in 0..n {
                if rng.gen::<bool>() {
                    p.set_sign(i, -1);
                }
            }
            triple.push(p);
        }
        let Ok(det) = gram_det3(&triple[0], &triple[1], &triple[2]) else {
            continue; // coincident or antipodal draw
        };
        assert!(det.scaled >= 1, "det(n Sigma) = {} at n = {n}", det.scaled);
        // Cross-arithmetic check against the f64 determinant.
        let ov = |a: &Partition, b: &Partition| {
            a.overlap(b).unwrap().numerator as f64 / n as f64
        };
        let (a, b, c) = (
            ov(&triple[0], &triple[1]),
            ov(&triple[0], &triple[2]),
            ov(&triple[1], &triple[2]),
        );
        let float_det = 1.0 + 2.0 * a * b * c - (a * a + b * b + c * c);
        assert!((float_det - det.value()).abs() < 1e-12);
        done += 1;
    }
}

#[test]
fn first_moment_prediction_vs_monte_carlo() {
    // n = 14, rho = 1/2, scale = 1: the prediction should land within a
    // factor of 3 of the planted-measure average of |S| counted exactly.
    let n = 14usize;
    let pred = expected_count_at_distance(n as u64, 0.5, 1.0).unwrap();
    let trials = 500u64;
    let mut total = 0u64;
    for t in 0..trials {
        let inst = sample_planted(&PlantedSpec::new(n, 9_000 + t)).unwrap();
        let star = inst.planting().unwrap().sigma_star.clone();
        let log2_t = 0.5 * (n as f64).log2() - n as f64; // sqrt(n) 2^-n
        let thr = Threshold::from_log2(n as u32, inst.frac_bits(), log2_t).unwrap();
        // Count over the full space: each canonical state at distance 7
        // represents itself and its negation, also at distance 7.
        for mask in 0..1u64 << (n - 1) {
            let mut p = Partition::all_plus(n);
            for j in 0..n - 1 {
                if mask >> j & 1 == 1 {
                    p.set_sign(j + 1, -1);
                }
            }
            if p.hamming_distance(&star).unwrap() == n / 2
                && inst.hamiltonian(&p).unwrap().le(&thr)
            {
                total += 2;
            }
        }
    }
    let mc = total as f64 / trials as f64;
    let ratio = mc / pred.expected_count;
    println!(
        "Monte Carlo {mc:.4} vs prediction {:.4} (ratio {ratio:.3})",
        pred.expected_count
    );
    assert!(
        (1.0 / 3.0..=3.0).contains(&ratio),
        "ratio {ratio} out of tolerance"
    );
}

#[test]
fn ogp_parameters_satisfy_invariants() {
    for (eps, delta) in [(1.0, 0.5), (0.8, 0.0), (0.3, 0.1), (0.05, 0.0)] {
        let p = ogp_parameters(eps, delta).unwrap();
        let gap = eps - delta;
        assert!(p.m as f64 >= 8.0 * (1.0 + 3f64.log2()) / gap);
        assert!((p.m as f64) < 8.0 * (1.0 + 3f64.log2()) / gap + 1.0);
        assert!((p.eta - (1.0 - p.beta) / (2.0 * p.m as f64)).abs() < 1e-12);
        let h = binary_entropy((1.0 - p.beta + p.eta) / 2.0).unwrap();
        assert!((h - gap / 4.0).abs() < 1e-10, "defining equation off: {h}");
        assert!(p.eta < (1.0 - p.beta) / p.m as f64);
        assert!(0.0 < p.eta && p.eta < p.beta && p.beta < 1.0);
    }
}

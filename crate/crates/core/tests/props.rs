//! Property tests of the exact-arithmetic invariants.

use npp_core::fixed::FixedReal;
use npp_core::instance::Instance;
use npp_core::partition::Partition;
use npp_core::DEFAULT_FRAC_BITS;
use proptest::prelude::*;

/// Grid-representable f64 values: m * 2^e with |value| < 2^20 and the
/// lowest bit at or above the 2^-128 grid.
fn representable() -> impl Strategy<Value = f64> {
    (any::<i64>(), -60i32..=10)
        .prop_map(|(m, e)| (m >> 14) as f64 * 2f64.powi(e))
        .prop_filter("in range", |v| v.abs() < 1e6)
}

fn signs(n: usize) -> impl Strategy<Value = Vec<i8>> {
    proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], n)
}

proptest! {
    #[test]
    fn quantize_roundtrips_representables(v in representable()) {
        let q = FixedReal::quantize(v, DEFAULT_FRAC_BITS).unwrap();
        prop_assert_eq!(q.to_f64(DEFAULT_FRAC_BITS), v);
        let q2 = FixedReal::quantize(q.to_f64(DEFAULT_FRAC_BITS), DEFAULT_FRAC_BITS).unwrap();
        prop_assert_eq!(q2, q);
    }

    #[test]
    fn quantize_is_deterministic(vs in proptest::collection::vec(-100.0..100.0f64, 1..20)) {
        let a = Instance::quantize(&vs, DEFAULT_FRAC_BITS).unwrap();
        let b = Instance::quantize(&vs, DEFAULT_FRAC_BITS).unwrap();
        prop_assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn hamiltonian_sign_symmetry(
        s in signs(16),
        vs in proptest::collection::vec(-50.0..50.0f64, 16),
    ) {
        let sigma = Partition::from_signs(&s).unwrap();
        let inst = Instance::quantize(&vs, DEFAULT_FRAC_BITS).unwrap();
        let a = inst.hamiltonian(&sigma).unwrap();
        let b = inst.hamiltonian(&sigma.negated()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn overlap_hamming_identity(a in signs(24), b in signs(24)) {
        let pa = Partition::from_signs(&a).unwrap();
        let pb = Partition::from_signs(&b).unwrap();
        let d = pa.hamming_distance(&pb).unwrap();
        let ov = pa.overlap(&pb).unwrap();
        prop_assert_eq!(ov.numerator, 24 - 2 * d as i64);
        // Direct inner product agrees.
        let ip: i64 = a.iter().zip(&b).map(|(x, y)| (*x as i64) * (*y as i64)).sum();
        prop_assert_eq!(ov.numerator, ip);
    }

    #[test]
    fn canonicalize_idempotent(s in signs(12)) {
        let p = Partition::from_signs(&s).unwrap();
        let c = p.canonicalize();
        prop_assert!(c.is_canonical());
        prop_assert_eq!(c.canonicalize(), c.clone());
        // Parse/display roundtrip.
        let back: Partition = c.to_string().parse().unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn instance_text_roundtrip(
        vs in proptest::collection::vec(-100.0..100.0f64, 2..12),
        planted_seed in proptest::option::of(0u64..10_000),
    ) {
        // Unplanted: arbitrary quantized values. Planted: a sampler draw,
        // whose metadata satisfies the construction-time invariants.
        let inst = match planted_seed {
            None => Instance::quantize(&vs, 96).unwrap(),
            Some(seed) => npp_core::sampler::sample_planted(
                &npp_core::sampler::PlantedSpec::new(vs.len().max(2), seed),
            )
            .unwrap(),
        };
        let text = inst.to_text();
        let back = Instance::parse_text(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(back.to_text(), text);
    }

    #[test]
    fn gray_scan_equals_recomputation(
        n in 2usize..=10,
        seed in 0u64..5000,
    ) {
        use npp_core::scan::{full_scan, ScanOptions};
        use npp_core::sampler::sample_unplanted;
        let inst = sample_unplanted(n, seed).unwrap();
        let star = Partition::all_plus(n);
        let r = full_scan(&inst, &star, &[], &ScanOptions { max_n: 30, parallel: false })
            .unwrap();
        // From-scratch minimum over canonical states.
        let mut best: Option<npp_core::Energy> = None;
        for mask in 0..1u64 << (n - 1) {
            let mut p = Partition::all_plus(n);
            for j in 0..n - 1 {
                if mask >> j & 1 == 1 {
                    p.set_sign(j + 1, -1);
                }
            }
            let e = inst.hamiltonian(&p).unwrap();
            best = Some(best.map_or(e, |b| b.min(e)));
        }
        prop_assert_eq!(r.global_min.1, best.unwrap());
    }
}

mod common;

use std::collections::HashSet;

use common::{random_message, rng, ClasWorld};
use mhcs_core::clas::{
    self, aggregate, aggregate_verify, recompute_q2_sum, AggregateItem, ClasSignature,
};
use mhcs_core::metrics::measure;
use mhcs_core::{Bls12, Error, PairingBackend, TypeA};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn setups_draw_distinct_secrets() {
    let mut r = rng("setup-distinct");
    let mut seen = HashSet::new();
    for _ in 0..1000 {
        let (suite, keys) = clas::setup::<Bls12, _>(128, &mut r).unwrap();
        assert!(seen.insert(suite.scalar_to_bytes(keys.secret())));
    }
}

#[test]
fn unsupported_level() {
    let mut r = rng("level");
    assert!(matches!(
        clas::setup::<Bls12, _>(80, &mut r),
        Err(Error::UnsupportedParameter(80, _))
    ));
    assert!(clas::setup::<TypeA, _>(80, &mut r).is_ok());
}

#[test]
fn sign_verify_thousand_and_bitflip_rejects() {
    let mut r = rng("roundtrip");
    let mut w = ClasWorld::<Bls12>::new(&mut r);
    let keys: Vec<_> = (0..20)
        .map(|i| w.enroll(format!("user-{i}").as_bytes(), &mut r))
        .collect();
    let mut accepts = 0;
    let mut false_accepts = 0;
    for i in 0..1000 {
        let k = &keys[i % keys.len()];
        let len = r.gen_range(1..64);
        let m = random_message(&mut r, len);
        let sig = w.sign(k, &m, &mut r);
        accepts += w.verify(k, &m, &sig) as u32;
        let mut bad = m.clone();
        let bit = r.gen_range(0..bad.len() * 8);
        bad[bit / 8] ^= 1 << (bit % 8);
        false_accepts += w.verify(k, &bad, &sig) as u32;
    }
    assert_eq!(accepts, 1000);
    assert_eq!(false_accepts, 0);
}

#[test]
fn fresh_nonce_each_signature() {
    let mut r = rng("nonce");
    let mut w = ClasWorld::<Bls12>::new(&mut r);
    let k = w.enroll(b"alice", &mut r);
    let mut seen = HashSet::new();
    for _ in 0..1000 {
        let sig = w.sign(&k, b"same message", &mut r);
        assert!(seen.insert(w.suite.g1_to_bytes(&sig.v)));
    }
}

#[test]
fn correctness_identity_as_gt_elements() {
    fn run<B: PairingBackend>(trials: usize) {
        let mut r = rng("identity");
        let mut w = ClasWorld::<B>::new(&mut r);
        for i in 0..trials {
            let k = w.enroll(format!("id-{i}").as_bytes(), &mut r);
            let m = random_message(&mut r, 20);
            let sig = w.sign(&k, &m, &mut r);
            let s = &w.suite;
            let q2 = clas::derive_q2(s, k.id(), k.q1());
            let h = clas::message_hash(s, &m, &sig.v);
            let lhs = s.pairing(&sig.u, s.gen_g2());
            let rhs = s.pairing(&s.g1_add(&q2, &s.g1_mul(&sig.v, &h)), &w.pk.pk_g2);
            assert_eq!(lhs, rhs);
        }
    }
    run::<Bls12>(20);
    run::<TypeA>(3);
}

#[test]
fn op_counts_match_table() {
    fn run<B: PairingBackend>() {
        let mut r = rng("counts");
        let mut w = ClasWorld::<B>::new(&mut r);
        let k = w.enroll(b"counter", &mut r);
        let (sig, c) = measure(|| w.sign(&k, b"m", &mut r));
        assert_eq!(c.table_classes(), (1, 2, 0));
        let (ok, c) = measure(|| w.verify(&k, b"m", &sig));
        assert!(ok);
        assert_eq!(c.table_classes(), (2, 1, 2));
    }
    run::<Bls12>();
    run::<TypeA>();
}

type Signed<B> = (
    Vec<u8>,
    <B as PairingBackend>::G1,
    Vec<u8>,
    ClasSignature<B>,
);

fn batch<B: PairingBackend>(
    w: &mut ClasWorld<B>,
    n: usize,
    tag: &str,
    r: &mut rand_chacha::ChaCha20Rng,
) -> Vec<Signed<B>> {
    (0..n)
        .map(|i| {
            let id = format!("{tag}-{i}").into_bytes();
            let k = w.enroll(&id, r);
            let m = random_message(r, 20);
            let sig = w.sign(&k, &m, r);
            (id, k.q1().clone(), m, sig)
        })
        .collect()
}

fn items<B: PairingBackend>(b: &[Signed<B>]) -> Vec<AggregateItem<'_, B>> {
    b.iter()
        .map(|(id, q1, m, sig)| AggregateItem { id, q1, m, sig })
        .collect()
}

#[test]
fn aggregate_n10_and_n100_two_pairings() {
    let mut r = rng("agg-n");
    let mut w = ClasWorld::<Bls12>::new(&mut r);
    for n in [10, 100] {
        let b = batch(&mut w, n, &format!("n{n}"), &mut r);
        let agg = aggregate(&w.suite, &items(&b)).unwrap();
        let (ok, c) = measure(|| aggregate_verify(&w.suite, &w.pk.pk_g2, &agg));
        assert!(ok);
        assert_eq!(c.table_classes(), (0, 0, 2));
        let signers = b.iter().map(|(id, q1, _, _)| (id.as_slice(), q1));
        assert_eq!(recompute_q2_sum(&w.suite, signers), agg.q2_sum);
    }
}

#[test]
fn aggregate_is_order_independent() {
    let mut r = rng("perm");
    let mut w = ClasWorld::<Bls12>::new(&mut r);
    let b = batch(&mut w, 8, "perm", &mut r);
    let reference = aggregate(&w.suite, &items(&b)).unwrap();
    for _ in 0..20 {
        let mut it = items(&b);
        it.shuffle(&mut r);
        assert_eq!(aggregate(&w.suite, &it).unwrap(), reference);
    }
}

#[test]
fn aggregate_product_expansion_small_n() {
    let mut r = rng("product");
    let mut w = ClasWorld::<Bls12>::new(&mut r);
    for trial in 0..10 {
        let n = r.gen_range(1..=8);
        let b = batch(&mut w, n, &format!("prod{trial}"), &mut r);
        let agg = aggregate(&w.suite, &items(&b)).unwrap();
        let s = &w.suite;
        let direct = s.pairing(&agg.u, s.gen_g2());
        let product = b.iter().fold(s.gt_identity(), |acc, (_, _, _, sig)| {
            s.gt_mul(&acc, &s.pairing(&sig.u, s.gen_g2()))
        });
        assert_eq!(direct, product);
    }
}

#[test]
fn aggregate_verify_agrees_with_individual_verifies() {
    let mut r = rng("agree");
    let mut w = ClasWorld::<Bls12>::new(&mut r);
    for trial in 0..200 {
        let n = r.gen_range(1..=16);
        let b = batch(&mut w, n, &format!("agree{trial}"), &mut r);
        let all = b
            .iter()
            .all(|(id, q1, m, sig)| clas::verify(&w.suite, id, q1, &w.pk.pk_g2, m, sig));
        let agg = aggregate(&w.suite, &items(&b)).unwrap();
        assert_eq!(aggregate_verify(&w.suite, &w.pk.pk_g2, &agg), all);
        assert!(all);
    }
}

#[test]
fn single_field_tamper_rejected_everywhere() {
    let mut r = rng("tamper");
    let mut w = ClasWorld::<Bls12>::new(&mut r);
    let keys: Vec<_> = (0..16)
        .map(|i| w.enroll(format!("pool-{i}").as_bytes(), &mut r))
        .collect();
    let mut false_accepts = 0;
    for trial in 0..1000 {
        let n = r.gen_range(1..=4);
        let start = r.gen_range(0..=keys.len() - n);
        let mut b: Vec<_> = keys[start..start + n]
            .iter()
            .map(|k| {
                let m = random_message(&mut r, 20);
                let sig = w.sign(k, &m, &mut r);
                (k.id().to_vec(), *k.q1(), m, sig)
            })
            .collect();
        let victim = r.gen_range(0..n);
        let entry = &mut b[victim];
        match trial % 5 {
            0 => {
                let bit = r.gen_range(0..160);
                entry.2[bit / 8] ^= 1 << (bit % 8);
            }
            1 => entry.3.u = w.suite.random_g1(&mut r),
            2 => entry.3.v = w.suite.random_g1(&mut r),
            3 => entry.1 = w.suite.random_g1(&mut r),
            _ => entry.0.push(b'x'),
        }
        let (id, q1, m, sig) = &b[victim];
        false_accepts += clas::verify(&w.suite, id, q1, &w.pk.pk_g2, m, sig) as u32;
        let agg = aggregate(&w.suite, &items(&b)).unwrap();
        false_accepts += aggregate_verify(&w.suite, &w.pk.pk_g2, &agg) as u32;
    }
    assert_eq!(false_accepts, 0);
}

#[test]
fn corrupt_one_u_before_aggregation() {
    let mut r = rng("corrupt-u");
    let mut w = ClasWorld::<Bls12>::new(&mut r);
    let b0 = batch(&mut w, 6, "cu", &mut r);
    let mut accepts = 0;
    for _ in 0..500 {
        let mut b = b0.clone();
        let i = r.gen_range(0..b.len());
        b[i].3.u = w.suite.g1_add(&b[i].3.u, &w.suite.random_g1(&mut r));
        let agg = aggregate(&w.suite, &items(&b)).unwrap();
        accepts += aggregate_verify(&w.suite, &w.pk.pk_g2, &agg) as u32;
    }
    assert_eq!(accepts, 0);
}

#[test]
fn symmetric_backend_end_to_end() {
    let mut r = rng("type-a");
    let mut w = ClasWorld::<TypeA>::new(&mut r);
    let b = batch(&mut w, 3, "ta", &mut r);
    for (id, q1, m, sig) in &b {
        assert!(clas::verify(&w.suite, id, q1, &w.pk.pk_g2, m, sig));
    }
    let agg = aggregate(&w.suite, &items(&b)).unwrap();
    let (ok, c) = measure(|| aggregate_verify(&w.suite, &w.pk.pk_g2, &agg));
    assert!(ok);
    assert_eq!(c.pairing, 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prop_single_aggregate_matches_verify(seed in any::<u64>(), m in proptest::collection::vec(any::<u8>(), 0..48)) {
        let mut r = mhcs_core::derive_rng(seed, b"prop-single");
        let mut w = ClasWorld::<Bls12>::new(&mut r);
        let k = w.enroll(b"p", &mut r);
        let sig = w.sign(&k, &m, &mut r);
        let item = [AggregateItem { id: k.id(), q1: k.q1(), m: &m, sig: &sig }];
        let agg = aggregate(&w.suite, &item).unwrap();
        prop_assert_eq!(&agg.u, &sig.u);
        prop_assert_eq!(aggregate_verify(&w.suite, &w.pk.pk_g2, &agg), w.verify(&k, &m, &sig));
    }

    #[test]
    fn prop_signature_bytes_roundtrip(seed in any::<u64>()) {
        let mut r = mhcs_core::derive_rng(seed, b"prop-bytes");
        let mut w = ClasWorld::<Bls12>::new(&mut r);
        let k = w.enroll(b"p", &mut r);
        let sig = w.sign(&k, b"msg", &mut r);
        let back = ClasSignature::from_bytes(&w.suite, &sig.to_bytes(&w.suite)).unwrap();
        prop_assert_eq!(back, sig);
    }
}

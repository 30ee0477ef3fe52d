mod common;

use common::{random_message, rng, SlotWorld};
use mhcs_core::clas::AuthorityKeyPair;
use mhcs_core::metrics::measure;
use mhcs_core::mhcs::{
    close_slot_and_batch_verify, ms_init, verify_single, ManagementServer, Participant,
    RegistrationRecord, Rejection, Submission, TimeSlot,
};
use mhcs_core::scenario::{
    run_scenario, tamper_submission, ScenarioConfig, TamperField, TamperSpec,
};
use mhcs_core::{Bls12, Error, PairingBackend, TypeA};
use rand::seq::SliceRandom;
use rand::Rng;

const START: u64 = 1_000;
const END: u64 = 2_000;

fn signed_batch<B: PairingBackend>(
    w: &mut SlotWorld<B>,
    n: usize,
    tag: &str,
    r: &mut rand_chacha::ChaCha20Rng,
) -> Vec<Submission<B>> {
    let ms_g1 = w.ms_g1();
    (0..n)
        .map(|i| {
            let p = w.participant(&format!("{tag}-{i}"), r);
            let m = random_message(r, 20);
            let t = r.gen_range(START..END);
            p.sign(&w.suite, &ms_g1, w.dc.public_g1(), &m, t, r)
                .unwrap()
        })
        .collect()
}

#[test]
fn init_key_relations() {
    let mut r = rng("init");
    let (suite, ms, dc) = ms_init::<Bls12, _>(128, &mut r).unwrap();
    assert_eq!(ms.public().pk_g1, suite.g1_mul(suite.gen_g1(), ms.secret()));
    assert_eq!(dc.public().pk_g1, suite.g1_mul(suite.gen_g1(), dc.secret()));
    assert_ne!(
        suite.pairing(suite.gen_g1(), suite.gen_g2()),
        suite.gt_identity()
    );
    assert!(ms_init::<TypeA, _>(128, &mut r).is_err());
}

#[test]
fn registration_equations_and_duplicates() {
    let mut r = rng("register");
    let mut w = SlotWorld::<Bls12>::new(&mut r);
    let p = Participant::<Bls12>::new(&w.suite, b"alice".to_vec(), &mut r);
    let grant =
        w.ms.register(&w.suite, b"alice", p.keys().q1(), &mut r)
            .unwrap();
    let s = &w.suite;
    assert_eq!(
        s.pairing(&grant.index_s, s.gen_g2()),
        s.pairing(&grant.sn, &w.ms.public().pk_g2)
    );
    let rec = w.ms.record_for(&grant.sn).unwrap();
    assert_eq!(rec.index_v, s.g1_mul(&rec.q2, &rec.a));
    assert_eq!(rec.index_s, s.g1_mul(&grant.s2, &rec.a));
    assert_eq!(
        w.ms.register(&w.suite, b"alice", p.keys().q1(), &mut r),
        Err(Error::DuplicateIdentity)
    );
    assert_eq!(w.ms.trace(&grant.sn).unwrap(), b"alice");
    assert_eq!(w.ms.trace(&s.random_g1(&mut r)), Err(Error::UnknownIndex));
}

#[test]
fn unregistered_participant_cannot_sign() {
    let mut r = rng("unregistered");
    let w = SlotWorld::<Bls12>::new(&mut r);
    let p = Participant::<Bls12>::new(&w.suite, b"x".to_vec(), &mut r);
    let err = p
        .sign(&w.suite, &w.ms_g1(), w.dc.public_g1(), b"m", START, &mut r)
        .unwrap_err();
    assert_eq!(err, Error::IncompleteRegistration);
}

#[test]
fn sign_counts_and_anonymity_surface() {
    let mut r = rng("sign-counts");
    let mut w = SlotWorld::<Bls12>::new(&mut r);
    let p = w.participant("carol-the-participant", &mut r);
    let (sub, c) = measure(|| {
        p.sign(
            &w.suite,
            &w.ms_g1(),
            w.dc.public_g1(),
            b"heart rate 72",
            START,
            &mut r,
        )
        .unwrap()
    });
    assert_eq!(c.table_classes(), (1, 2, 0));
    assert!(c.envelope > 0);
    let needle = b"carol-the-participant";
    assert!(!sub.to_bytes().windows(needle.len()).any(|x| x == needle));
    assert!(!sub.to_json().contains("carol"));
    assert_eq!(Submission::<Bls12>::from_json(&sub.to_json()).unwrap(), sub);
}

#[test]
fn open_verify_single_and_batch() {
    let mut r = rng("open");
    let mut w = SlotWorld::<Bls12>::new(&mut r);
    let subs = signed_batch(&mut w, 5, "o", &mut r);
    let mut slot = TimeSlot::<Bls12>::new(7, START, END).unwrap();
    for s in subs {
        assert!(w.dc.dc_open(&w.suite, s, &mut slot).is_ok());
    }
    let (u, v, iv) = slot.recompute_sums();
    assert_eq!(slot.sums(), (&u, &v, &iv));
    for o in slot.accepted() {
        let (ok, c) = measure(|| verify_single(&w.suite, o, &w.ms_g2()));
        assert!(ok);
        assert_eq!(c.table_classes(), (0, 1, 2));
    }
    let (report, c) = measure(|| close_slot_and_batch_verify(&w.suite, &slot, &w.ms_g2()).unwrap());
    assert!(report.verified);
    assert_eq!(report.n, 5);
    assert_eq!(report.slot_id, 7);
    assert_eq!(c.pairing, 2);
}

#[test]
fn freshness_window_half_open() {
    let mut r = rng("fresh");
    let mut w = SlotWorld::<Bls12>::new(&mut r);
    let p = w.participant("f", &mut r);
    let mut slot = TimeSlot::<Bls12>::new(0, START, END).unwrap();
    for (t, ok) in [
        (START - 1, false),
        (START, true),
        (END - 1, true),
        (END, false),
    ] {
        let sub = p
            .sign(
                &w.suite,
                &w.ms_g1(),
                w.dc.public_g1(),
                &t.to_be_bytes(),
                t,
                &mut r,
            )
            .unwrap();
        let res = w.dc.dc_open(&w.suite, sub, &mut slot);
        if ok {
            assert!(res.is_ok());
        } else {
            assert_eq!(res, Err(Rejection::StaleTimestamp));
        }
    }
    assert_eq!(slot.len(), 2);
    assert_eq!(slot.rejected().len(), 2);
}

#[test]
fn open_rejection_reasons() {
    let mut r = rng("reasons");
    let mut w = SlotWorld::<Bls12>::new(&mut r);
    let p = w.participant("r", &mut r);
    let mut slot = TimeSlot::<Bls12>::new(0, START, END).unwrap();
    let fresh = |r: &mut rand_chacha::ChaCha20Rng| {
        p.sign(
            &w.suite,
            &w.ms_g1(),
            w.dc.public_g1(),
            b"payload",
            START + 5,
            r,
        )
        .unwrap()
    };
    let mut s = fresh(&mut r);
    s.m[0] ^= 1;
    assert_eq!(
        w.dc.dc_open(&w.suite, s, &mut slot),
        Err(Rejection::HashMismatch)
    );
    let mut s = fresh(&mut r);
    s.v = w.suite.random_g1(&mut r);
    assert_eq!(
        w.dc.dc_open(&w.suite, s, &mut slot),
        Err(Rejection::HashMismatch)
    );
    let mut s = fresh(&mut r);
    let last = s.sn_enc.len() - 1;
    s.sn_enc[last] ^= 0x80;
    assert_eq!(
        w.dc.dc_open(&w.suite, s, &mut slot),
        Err(Rejection::DecryptFailure)
    );
    let s = fresh(&mut r);
    assert!(w.dc.dc_open(&w.suite, s.clone(), &mut slot).is_ok());
    assert_eq!(w.dc.dc_open(&w.suite, s, &mut slot), Err(Rejection::Replay));
    let seqs: Vec<u64> = slot.rejected().iter().map(|e| e.seq).collect();
    assert_eq!(seqs, vec![0, 1, 2, 4]);
}

#[test]
fn wrong_dc_key_is_decrypt_failure() {
    let mut r = rng("wrong-dc");
    let mut w = SlotWorld::<Bls12>::new(&mut r);
    let p = w.participant("z", &mut r);
    let other = AuthorityKeyPair::generate(&w.suite, &mut r);
    let sub = p
        .sign(
            &w.suite,
            &w.ms_g1(),
            &other.public().pk_g1,
            b"m",
            START,
            &mut r,
        )
        .unwrap();
    let mut slot = TimeSlot::<Bls12>::new(0, START, END).unwrap();
    assert_eq!(
        w.dc.dc_open(&w.suite, sub, &mut slot),
        Err(Rejection::DecryptFailure)
    );
}

#[test]
fn empty_slot_errors() {
    let mut r = rng("empty");
    let w = SlotWorld::<Bls12>::new(&mut r);
    let slot = TimeSlot::<Bls12>::new(0, START, END).unwrap();
    assert_eq!(
        close_slot_and_batch_verify(&w.suite, &slot, &w.ms_g2()),
        Err(Error::EmptySlot)
    );
}

#[test]
fn corrupted_u_localized_by_bisection() {
    let mut r = rng("bisect");
    let mut w = SlotWorld::<Bls12>::new(&mut r);
    let subs = signed_batch(&mut w, 23, "b", &mut r);
    for trial in 0..6 {
        let mut slot = TimeSlot::<Bls12>::new(0, START, END).unwrap();
        for s in subs.iter().cloned() {
            w.dc.dc_open(&w.suite, s, &mut slot).unwrap();
        }
        let bad: Vec<usize> = if trial < 4 {
            vec![r.gen_range(0..23)]
        } else {
            let mut v: Vec<usize> = (0..23).collect();
            v.shuffle(&mut r);
            v.truncate(trial - 1);
            v
        };
        for &i in &bad {
            slot.corrupt_u(&w.suite, i, w.suite.random_g1(&mut r));
        }
        let report = close_slot_and_batch_verify(&w.suite, &slot, &w.ms_g2()).unwrap();
        assert!(!report.verified);
        let mut expected: Vec<u64> = bad.iter().map(|&i| slot.accepted()[i].seq).collect();
        expected.sort_unstable();
        assert_eq!(report.offending, expected);
        let pairings = report.localization_pairings;
        // f * 2 * ceil(log2 n) pairing pairs at most
        assert!(pairings <= bad.len() as u64 * 2 * 2 * 5, "{pairings}");
    }
}

#[test]
fn single_submission_slot_agrees_with_verify_single() {
    let mut r = rng("n1");
    let mut w = SlotWorld::<Bls12>::new(&mut r);
    for corrupt in [false, true] {
        let sub = signed_batch(&mut w, 1, &format!("one-{corrupt}"), &mut r).remove(0);
        let mut slot = TimeSlot::<Bls12>::new(0, START, END).unwrap();
        w.dc.dc_open(&w.suite, sub, &mut slot).unwrap();
        if corrupt {
            slot.corrupt_u(&w.suite, 0, w.suite.random_g1(&mut r));
        }
        let single = verify_single(&w.suite, &slot.accepted()[0], &w.ms_g2());
        let report = close_slot_and_batch_verify(&w.suite, &slot, &w.ms_g2()).unwrap();
        assert_eq!(single, report.verified);
        assert_eq!(single, !corrupt);
    }
}

#[test]
fn batch_agrees_with_singles_under_one_tamper() {
    let mut r = rng("agree-batch");
    let mut w = SlotWorld::<Bls12>::new(&mut r);
    let pool: Vec<_> = (0..16)
        .map(|i| w.participant(&format!("pool-{i}"), &mut r))
        .collect();
    let fields = [
        TamperField::M,
        TamperField::U,
        TamperField::V,
        TamperField::SnEnc,
        TamperField::T,
    ];
    for trial in 0..500 {
        let n = r.gen_range(1..=16);
        let tamper = (trial % 2 == 0).then(|| (r.gen_range(0..n), fields[r.gen_range(0..5)]));
        let mut slot = TimeSlot::<Bls12>::new(0, START, END).unwrap();
        for (i, p) in pool.iter().take(n).enumerate() {
            let t = match tamper {
                Some((j, TamperField::T)) if j == i => END + 3,
                _ => START + i as u64,
            };
            let mut sub = p
                .sign(
                    &w.suite,
                    &w.ms_g1(),
                    w.dc.public_g1(),
                    &random_message(&mut r, 20),
                    t,
                    &mut r,
                )
                .unwrap();
            if let Some((j, f)) = tamper {
                if i == j {
                    tamper_submission(&w.suite, &mut sub, f, &mut r);
                }
            }
            let _ = w.dc.dc_open(&w.suite, sub, &mut slot);
        }
        if slot.is_empty() {
            continue;
        }
        let all = slot
            .accepted()
            .iter()
            .all(|o| verify_single(&w.suite, o, &w.ms_g2()));
        let report = close_slot_and_batch_verify(&w.suite, &slot, &w.ms_g2()).unwrap();
        assert_eq!(report.verified, all, "trial {trial}");
        if tamper.is_some() {
            assert!(!report.verified || !report.rejected_submissions.is_empty());
        }
    }
}

#[test]
fn order_independence() {
    let mut r = rng("order");
    let mut w = SlotWorld::<Bls12>::new(&mut r);
    let subs = signed_batch(&mut w, 10, "ord", &mut r);
    let mut reference = None;
    for _ in 0..5 {
        let mut s = subs.clone();
        s.shuffle(&mut r);
        let mut slot = TimeSlot::<Bls12>::new(0, START, END).unwrap();
        for x in s {
            w.dc.dc_open(&w.suite, x, &mut slot).unwrap();
        }
        let report = close_slot_and_batch_verify(&w.suite, &slot, &w.ms_g2()).unwrap();
        assert!(report.verified);
        let agg = report.aggregate.clone();
        match &reference {
            None => reference = Some(agg),
            Some(a) => assert_eq!(a, &agg),
        }
    }
}

#[test]
fn end_to_end_sizes() {
    let mut r = rng("e2e");
    let mut w = SlotWorld::<Bls12>::new(&mut r);
    for n in [1, 2, 10, 100] {
        let subs = signed_batch(&mut w, n, &format!("e2e{n}"), &mut r);
        let mut slot = TimeSlot::<Bls12>::new(n as u64, START, END).unwrap();
        for s in subs {
            w.dc.dc_open(&w.suite, s, &mut slot).unwrap();
        }
        let (report, c) =
            measure(|| close_slot_and_batch_verify(&w.suite, &slot, &w.ms_g2()).unwrap());
        assert!(report.verified);
        assert_eq!(c.pairing, 2);
    }
}

#[test]
fn end_to_end_symmetric() {
    let mut r = rng("e2e-a");
    let mut w = SlotWorld::<TypeA>::new(&mut r);
    let subs = signed_batch(&mut w, 4, "ta", &mut r);
    let mut slot = TimeSlot::<TypeA>::new(0, START, END).unwrap();
    for s in subs {
        w.dc.dc_open(&w.suite, s, &mut slot).unwrap();
    }
    assert!(
        close_slot_and_batch_verify(&w.suite, &slot, &w.ms_g2())
            .unwrap()
            .verified
    );
}

#[test]
fn non_repudiation_and_dc_state_has_no_ids() {
    let mut r = rng("nonrep");
    let mut w = SlotWorld::<Bls12>::new(&mut r);
    let subs = signed_batch(&mut w, 12, "patient-record", &mut r);
    let mut slot = TimeSlot::<Bls12>::new(0, START, END).unwrap();
    for s in subs {
        w.dc.dc_open(&w.suite, s, &mut slot).unwrap();
    }
    let report = close_slot_and_batch_verify(&w.suite, &slot, &w.ms_g2()).unwrap();
    let dc_view = format!("{}{}", slot.to_json(), report.to_json());
    for rec in w.ms.records() {
        let id = std::str::from_utf8(&rec.id).unwrap();
        assert!(!dc_view.contains(id));
        assert!(!dc_view.contains(&hex::encode(&rec.id)));
    }
    for o in slot.accepted() {
        let rec = w.ms.record_for(&o.index_v).unwrap();
        let matches =
            w.ms.records()
                .iter()
                .filter(|x| x.index_v == o.index_v)
                .count();
        assert_eq!(matches, 1);
        let mut again = o.clone();
        again.index_v = rec.index_v;
        assert!(verify_single(&w.suite, &again, &w.ms_g2()));
    }
}

#[test]
fn ledger_and_slot_persistence_roundtrip() {
    let mut r = rng("persist");
    let mut w = SlotWorld::<Bls12>::new(&mut r);
    let subs = signed_batch(&mut w, 4, "persist", &mut r);
    let text = w.ms.ledger_jsonl();
    let records = ManagementServer::<Bls12>::parse_ledger(&text).unwrap();
    assert_eq!(records.len(), 4);
    assert_eq!(
        RegistrationRecord::<Bls12>::from_json(&records[0].to_json()).unwrap(),
        records[0]
    );
    let mut restored = ManagementServer::from_records(w.ms.keys().clone(), records).unwrap();
    let q1 = w.suite.random_g1(&mut r);
    assert_eq!(
        restored.register(&w.suite, b"persist-0", &q1, &mut r),
        Err(Error::DuplicateIdentity)
    );

    let mut slot = TimeSlot::<Bls12>::new(3, START, END).unwrap();
    for s in subs {
        w.dc.dc_open(&w.suite, s, &mut slot).unwrap();
    }
    let back = TimeSlot::<Bls12>::from_json(&w.suite, &slot.to_json()).unwrap();
    assert_eq!(back.sums(), slot.sums());
    assert_eq!(back.accepted(), slot.accepted());
    assert!(
        close_slot_and_batch_verify(&w.suite, &back, &w.ms_g2())
            .unwrap()
            .verified
    );

    let p = w.participant("saved", &mut r);
    let ms_pub = w.ms.public().clone();
    assert_eq!(
        Participant::from_json(&w.suite, &ms_pub, &p.to_json()).unwrap(),
        p
    );
}

#[test]
fn scenario_runs() {
    let mut cfg = ScenarioConfig::new(5);
    cfg.seed = Some(1);
    let out = run_scenario::<Bls12>(&cfg).unwrap();
    assert!(out.success);
    assert_eq!(out.traced.len(), 5);
    for field in ["m", "u", "v", "sn_enc", "t"] {
        cfg.tamper = Some(format!("{field}:3").parse::<TamperSpec>().unwrap());
        let out = run_scenario::<Bls12>(&cfg).unwrap();
        assert!(!out.success, "{field}");
        if field == "u" {
            assert_eq!(out.report.offending, vec![2]);
        } else {
            assert_eq!(out.report.rejected_submissions.len(), 1);
            assert_eq!(out.report.rejected_submissions[0].seq, 2);
        }
    }
    assert!("q:1".parse::<TamperSpec>().is_err());
    assert!("m:0".parse::<TamperSpec>().is_err());
}

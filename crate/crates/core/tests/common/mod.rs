#![allow(dead_code)]

use mhcs_core::clas::{
    self, AuthorityPublicKey, ClasSignature, KeyGenerationCenter, ParticipantKeys,
};
use mhcs_core::mhcs::{ms_init, DataCenter, ManagementServer, Participant};
use mhcs_core::{derive_rng, BilinearSuite, PairingBackend};
use rand::RngCore;
use rand_chacha::ChaCha20Rng;

pub fn rng(label: &str) -> ChaCha20Rng {
    derive_rng(0x5eed, label.as_bytes())
}

pub struct ClasWorld<B: PairingBackend> {
    pub suite: BilinearSuite<B>,
    pub kgc: KeyGenerationCenter<B>,
    pub pk: AuthorityPublicKey<B>,
}

impl<B: PairingBackend> ClasWorld<B> {
    pub fn new(rng: &mut ChaCha20Rng) -> Self {
        let (suite, keys) = clas::setup::<B, _>(B::SECURITY_BITS, rng).unwrap();
        let pk = keys.public().clone();
        ClasWorld {
            suite,
            kgc: KeyGenerationCenter::new(keys),
            pk,
        }
    }

    pub fn enroll(&mut self, id: &[u8], rng: &mut ChaCha20Rng) -> ParticipantKeys<B> {
        let mut keys = ParticipantKeys::generate(&self.suite, id.to_vec(), rng);
        let partial = self
            .kgc
            .set_partial_key(&self.suite, id, keys.q1())
            .unwrap();
        keys.install_partial_key(&self.suite, &self.pk, partial)
            .unwrap();
        keys
    }

    pub fn sign(
        &self,
        keys: &ParticipantKeys<B>,
        m: &[u8],
        rng: &mut ChaCha20Rng,
    ) -> ClasSignature<B> {
        clas::sign(&self.suite, keys, &self.pk.pk_g1, m, rng).unwrap()
    }

    pub fn verify(&self, keys: &ParticipantKeys<B>, m: &[u8], sig: &ClasSignature<B>) -> bool {
        clas::verify(&self.suite, keys.id(), keys.q1(), &self.pk.pk_g2, m, sig)
    }
}

pub struct SlotWorld<B: PairingBackend> {
    pub suite: BilinearSuite<B>,
    pub ms: ManagementServer<B>,
    pub dc: DataCenter<B>,
}

impl<B: PairingBackend> SlotWorld<B> {
    pub fn new(rng: &mut ChaCha20Rng) -> Self {
        let (suite, ms_keys, dc_keys) = ms_init::<B, _>(B::SECURITY_BITS, rng).unwrap();
        SlotWorld {
            suite,
            ms: ManagementServer::new(ms_keys),
            dc: DataCenter::new(dc_keys),
        }
    }

    pub fn participant(&mut self, id: &str, rng: &mut ChaCha20Rng) -> Participant<B> {
        let mut p = Participant::new(&self.suite, id.as_bytes().to_vec(), rng);
        let grant = self
            .ms
            .register(&self.suite, p.keys().id(), p.keys().q1(), rng)
            .unwrap();
        p.complete_registration(&self.suite, &self.ms.public().clone(), grant)
            .unwrap();
        p
    }

    pub fn ms_g1(&self) -> B::G1 {
        self.ms.public().pk_g1.clone()
    }

    pub fn ms_g2(&self) -> B::G2 {
        self.ms.public().pk_g2.clone()
    }
}

pub fn random_message(rng: &mut ChaCha20Rng, len: usize) -> Vec<u8> {
    let mut m = vec![0u8; len];
    rng.fill_bytes(&mut m);
    m
}

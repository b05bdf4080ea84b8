//! Secure point-to-point channels carrying private material between
//! simulated entities.
//!
//! The cipher is pluggable. The default [`KeyedStreamCipher`] is a
//! deliberately simple test construction (SHA-256 keystream plus a keyed
//! SHA-256 tag) and makes no claim to production security.

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("integrity tag mismatch")]
    Integrity,
    #[error("envelope too short")]
    Truncated,
}

pub trait ChannelCipher {
    /// Recorded in transcript headers.
    fn name(&self) -> &'static str;

    fn seal(&self, key: &[u8; 32], nonce: u64, plaintext: &[u8]) -> Vec<u8>;

    fn open(&self, key: &[u8; 32], envelope: &[u8]) -> Result<Vec<u8>, ChannelError>;
}

/// Envelope: `[nonce 8][ciphertext][tag 16]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct KeyedStreamCipher;

impl KeyedStreamCipher {
    pub const TAG_LEN: usize = 16;

    fn keystream_xor(key: &[u8; 32], nonce: u64, data: &mut [u8]) {
        for (block, chunk) in data.chunks_mut(32).enumerate() {
            let pad = Sha256::new()
                .chain_update(b"grpauth-stream")
                .chain_update(key)
                .chain_update(nonce.to_be_bytes())
                .chain_update((block as u64).to_be_bytes())
                .finalize();
            chunk.iter_mut().zip(pad).for_each(|(b, p)| *b ^= p);
        }
    }

    fn tag(key: &[u8; 32], nonce: u64, ciphertext: &[u8]) -> [u8; 16] {
        let digest = Sha256::new()
            .chain_update(b"grpauth-tag")
            .chain_update(key)
            .chain_update(nonce.to_be_bytes())
            .chain_update((ciphertext.len() as u64).to_be_bytes())
            .chain_update(ciphertext)
            .finalize();
        digest[..16].try_into().expect("16 of 32 bytes")
    }
}

impl ChannelCipher for KeyedStreamCipher {
    fn name(&self) -> &'static str {
        "sha256-stream-v1"
    }

    fn seal(&self, key: &[u8; 32], nonce: u64, plaintext: &[u8]) -> Vec<u8> {
        let mut body = plaintext.to_vec();
        Self::keystream_xor(key, nonce, &mut body);
        let tag = Self::tag(key, nonce, &body);
        let mut out = Vec::with_capacity(8 + body.len() + Self::TAG_LEN);
        out.extend_from_slice(&nonce.to_be_bytes());
        out.extend_from_slice(&body);
        out.extend_from_slice(&tag);
        out
    }

    fn open(&self, key: &[u8; 32], envelope: &[u8]) -> Result<Vec<u8>, ChannelError> {
        if envelope.len() < 8 + Self::TAG_LEN {
            return Err(ChannelError::Truncated);
        }
        let nonce = u64::from_be_bytes(envelope[..8].try_into().expect("8 bytes"));
        let (body, tag) = envelope[8..].split_at(envelope.len() - 8 - Self::TAG_LEN);
        // not constant time; test cipher
        if Self::tag(key, nonce, body) != tag {
            return Err(ChannelError::Integrity);
        }
        let mut plain = body.to_vec();
        Self::keystream_xor(key, nonce, &mut plain);
        Ok(plain)
    }
}

/// A keyed channel between two named entities with a send counter as nonce.
pub struct SecureChannel {
    cipher: Box<dyn ChannelCipher>,
    key: [u8; 32],
    peers: (String, String),
    next_nonce: u64,
}

impl std::fmt::Debug for SecureChannel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SecureChannel")
            .field("cipher", &self.cipher.name())
            .field("peers", &self.peers)
            .field("next_nonce", &self.next_nonce)
            .finish_non_exhaustive()
    }
}

impl SecureChannel {
    pub fn new(cipher: Box<dyn ChannelCipher>, key: [u8; 32], a: &str, b: &str) -> Self {
        let peers = if a <= b { (a.to_owned(), b.to_owned()) } else { (b.to_owned(), a.to_owned()) };
        Self { cipher, key, peers, next_nonce: 0 }
    }

    /// Pre-shared key of the pair, derived from the simulation seed.
    pub fn derive_key(seed: u64, a: &str, b: &str) -> [u8; 32] {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Sha256::new()
            .chain_update(b"grpauth-channel-key")
            .chain_update(seed.to_be_bytes())
            .chain_update((lo.len() as u64).to_be_bytes())
            .chain_update(lo)
            .chain_update(hi)
            .finalize()
            .into()
    }

    pub fn peers(&self) -> (&str, &str) {
        (&self.peers.0, &self.peers.1)
    }

    pub fn seal(&mut self, payload: &[u8]) -> Vec<u8> {
        let nonce = self.next_nonce;
        self.next_nonce += 1;
        self.cipher.seal(&self.key, nonce, payload)
    }

    pub fn open(&self, envelope: &[u8]) -> Result<Vec<u8>, ChannelError> {
        self.cipher.open(&self.key, envelope)
    }

    /// Seal, pass through `tap`, open.
    pub fn secure_send(&mut self, payload: &[u8], tap: impl FnOnce(&mut Vec<u8>)) -> Result<Vec<u8>, ChannelError> {
        let mut wire = self.seal(payload);
        tap(&mut wire);
        self.open(&wire)
    }
}

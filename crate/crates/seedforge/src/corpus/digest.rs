use sha2::{Digest, Sha256};

/// Hex-encoded SHA-256 of `content`. This is the identity used for
/// deduplication and for on-disk corpus file names.
pub fn content_digest(content: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(content);
    hex::encode(hasher.finalize())
}

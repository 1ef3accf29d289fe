//! Password verifiers: Argon2id with a per-user random salt, stored as a PHC string.

use argon2::password_hash::{PasswordHash, PasswordHasher, PasswordVerifier, SaltString};
use argon2::{Algorithm, Argon2, Params, Version};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PasswordParams {
    pub memory_kib: u32,
    pub iterations: u32,
    pub parallelism: u32,
}

impl Default for PasswordParams {
    fn default() -> Self {
        Self { memory_kib: 19 * 1024, iterations: 2, parallelism: 1 }
    }
}

impl PasswordParams {
    /// Cheap parameters for tests. Never use for real accounts.
    pub const fn insecure_fast() -> Self {
        Self { memory_kib: 256, iterations: 1, parallelism: 1 }
    }

    fn hasher(&self) -> Argon2<'static> {
        let params = Params::new(self.memory_kib, self.iterations, self.parallelism, None)
            .expect("argon2 parameters out of range");
        Argon2::new(Algorithm::Argon2id, Version::V0x13, params)
    }
}

pub fn hash_password(password: &str, params: &PasswordParams) -> String {
    let salt = SaltString::encode_b64(&rand::random::<[u8; 16]>()).expect("16-byte salt");
    params.hasher().hash_password(password.as_bytes(), &salt).expect("argon2 hashing failed").to_string()
}

/// Checks `password` against a stored verifier. The parameters embedded in
/// the verifier win over `params`, so changing the configuration does not
/// lock out existing accounts.
pub fn verify_password(password: &str, verifier: &str, params: &PasswordParams) -> bool {
    match PasswordHash::new(verifier) {
        Ok(parsed) => params.hasher().verify_password(password.as_bytes(), &parsed).is_ok(),
        Err(_) => false,
    }
}

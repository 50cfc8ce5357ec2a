//! Key-material directories as written by the dealer:
//!
//! ```text
//! <key_id>.public.json        public key of the scheme
//! <key_id>.party-<i>.json     share of party i
//! auth.party-<i>.json         pairwise MAC keys of party i (optional)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use tcs_core::KeyStore;
use tcs_network::{deal_auth_keys, AuthKeys};
use tcs_schemes::{api, DealOptions, KeyShare, PublicKeyMaterial, SchemeId, ThresholdParams};

use crate::error::ServiceError;

#[derive(Clone, Debug)]
pub struct DealSpec {
    pub scheme: SchemeId,
    pub n: u16,
    pub t: u16,
    pub seed: [u8; 32],
    /// Defaults to the lowercase scheme name.
    pub key_id: Option<String>,
    pub options: DealOptions,
    /// Also write pairwise MAC keys for the transport.
    pub auth: bool,
}

/// Turns a hex seed into dealer randomness. A 32-byte seed is used as is;
/// any other length is hashed.
pub fn parse_seed(hex_seed: &str) -> Result<[u8; 32], ServiceError> {
    let bytes = hex::decode(hex_seed.trim()).map_err(|e| ServiceError::Config(format!("seed: {e}")))?;
    if bytes.is_empty() {
        return Err(ServiceError::Config("seed is empty".into()));
    }
    Ok(match <[u8; 32]>::try_from(bytes.as_slice()) {
        Ok(s) => s,
        Err(_) => Sha256::digest(&bytes).into(),
    })
}

pub fn public_file(dir: &Path, key_id: &str) -> PathBuf {
    dir.join(format!("{key_id}.public.json"))
}

pub fn share_file(dir: &Path, key_id: &str, index: u16) -> PathBuf {
    dir.join(format!("{key_id}.party-{index}.json"))
}

pub fn auth_file(dir: &Path, index: u16) -> PathBuf {
    dir.join(format!("auth.party-{index}.json"))
}

/// Deals keys and writes them into `out`. Returns the files written.
pub fn deal_to_dir(spec: &DealSpec, out: &Path) -> Result<Vec<PathBuf>, ServiceError> {
    let params = ThresholdParams::new(spec.n, spec.t)?;
    let key_id = spec
        .key_id
        .clone()
        .unwrap_or_else(|| KeyStore::default_key_id(spec.scheme));
    if key_id.is_empty() || key_id == "auth" || key_id.contains(['/', '\\', '.']) {
        return Err(ServiceError::Config(format!("unusable key id {key_id:?}")));
    }
    let (public, shares) = api::deal_keys_seeded(spec.scheme, params, &spec.options, spec.seed)?;
    fs::create_dir_all(out).map_err(|e| ServiceError::io(out, e))?;

    let mut written = Vec::new();
    let mut write = |path: PathBuf, body: String| -> Result<(), ServiceError> {
        fs::write(&path, body + "\n").map_err(|e| ServiceError::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    write(public_file(out, &key_id), public.to_json_pretty())?;
    for s in &shares {
        write(share_file(out, &key_id, s.index), s.to_json_pretty())?;
    }
    if spec.auth {
        let mut seed = Sha256::new();
        seed.update(b"tcs/auth-keys");
        seed.update(spec.seed);
        let mut rng = ChaCha20Rng::from_seed(seed.finalize().into());
        for k in deal_auth_keys(spec.n, &mut rng) {
            write(auth_file(out, k.index), k.to_json_pretty())?;
        }
    }
    Ok(written)
}

fn read(path: &Path) -> Result<Vec<u8>, ServiceError> {
    fs::read(path).map_err(|e| ServiceError::io(path, e))
}

pub fn load_public(dir: &Path, key_id: &str) -> Result<PublicKeyMaterial, ServiceError> {
    let path = public_file(dir, key_id);
    PublicKeyMaterial::from_json(&read(&path)?).map_err(|e| ServiceError::Keys(format!("{}: {e}", path.display())))
}

/// Loads every share of party `index` found in `dir`. Each share must
/// agree with the public file next to it.
pub fn load_keystore(dir: &Path, index: u16) -> Result<KeyStore, ServiceError> {
    let suffix = format!(".party-{index}.json");
    let entries = fs::read_dir(dir).map_err(|e| ServiceError::io(dir, e))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|name| name.ends_with(&suffix) && !name.starts_with("auth."))
        .collect();
    names.sort();
    let mut store = KeyStore::new();
    for name in names {
        let key_id = &name[..name.len() - suffix.len()];
        let path = dir.join(&name);
        let share = KeyShare::from_json(&read(&path)?)
            .map_err(|e| ServiceError::Keys(format!("{}: {e}", path.display())))?;
        if share.index != index {
            return Err(ServiceError::Keys(format!(
                "{} holds share {}, expected {index}",
                path.display(),
                share.index
            )));
        }
        if let Ok(public) = load_public(dir, key_id) {
            if public != share.public {
                return Err(ServiceError::Keys(format!(
                    "{} does not match {}",
                    path.display(),
                    public_file(dir, key_id).display()
                )));
            }
        }
        store.insert(key_id, share)?;
    }
    if store.is_empty() {
        return Err(ServiceError::Keys(format!("no key shares for party {index} in {}", dir.display())));
    }
    Ok(store)
}

pub fn load_auth(dir: &Path, index: u16) -> Result<AuthKeys, ServiceError> {
    let path = auth_file(dir, index);
    let keys = AuthKeys::load(&path).map_err(|e| ServiceError::Keys(format!("{}: {e}", path.display())))?;
    if keys.index != index {
        return Err(ServiceError::Keys(format!("{} belongs to party {}", path.display(), keys.index)));
    }
    Ok(keys)
}

use std::collections::BTreeMap;
use std::sync::Arc;

use tcs_schemes::{KeyShare, PublicKeyMaterial, SchemeId};

use crate::error::OrchestrationError;

/// Key shares of one party, addressed by key id. Filled at startup and
/// read-only afterwards.
#[derive(Default, Clone)]
pub struct KeyStore {
    keys: BTreeMap<String, Arc<KeyShare>>,
}

impl KeyStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Conventional key id for a scheme's dealt key: its lowercase name.
    pub fn default_key_id(scheme: SchemeId) -> String {
        scheme.as_str().to_ascii_lowercase()
    }

    pub fn insert(&mut self, key_id: impl Into<String>, share: KeyShare) -> Result<(), OrchestrationError> {
        share.validate()?;
        self.keys.insert(key_id.into(), Arc::new(share));
        Ok(())
    }

    pub fn get(&self, key_id: &str) -> Result<Arc<KeyShare>, OrchestrationError> {
        self.keys.get(key_id).cloned().ok_or_else(|| OrchestrationError::UnknownKey {
            key_id: key_id.to_string(),
        })
    }

    /// Looks up a key and checks it belongs to `scheme`.
    pub fn get_for(&self, scheme: SchemeId, key_id: &str) -> Result<Arc<KeyShare>, OrchestrationError> {
        let k = self.get(key_id)?;
        if k.scheme != scheme {
            return Err(OrchestrationError::KeySchemeMismatch {
                key_id: key_id.to_string(),
                actual: k.scheme,
                requested: scheme,
            });
        }
        Ok(k)
    }

    pub fn public(&self, key_id: &str) -> Result<PublicKeyMaterial, OrchestrationError> {
        Ok(self.get(key_id)?.public.clone())
    }

    pub fn key_ids(&self) -> impl Iterator<Item = (&str, SchemeId)> {
        self.keys.iter().map(|(k, v)| (k.as_str(), v.scheme))
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

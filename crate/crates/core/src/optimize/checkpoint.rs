use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::network::PolicyParams;
use super::OptimError;

/// JSON document holding the run configuration, seed, step count and the
/// per-layer parameter arrays. Floats round-trip bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint<C> {
    pub config: C,
    pub seed: u64,
    pub step: u64,
    pub params: PolicyParams,
}

impl<C: Serialize + DeserializeOwned> Checkpoint<C> {
    pub fn to_json(&self) -> Result<String, OptimError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, OptimError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), OptimError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, OptimError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn save_load_round_trip() {
        let params = PolicyParams::new(12, &[6, 5], &mut ChaCha8Rng::seed_from_u64(1));
        let ck = Checkpoint {
            config: "cfg".to_string(),
            seed: 3,
            step: 8192,
            params,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        ck.save(&path).unwrap();
        let back: Checkpoint<String> = Checkpoint::load(&path).unwrap();
        assert_eq!(back, ck);
        let bits = |p: &PolicyParams| p.to_flat().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.params), bits(&ck.params));
    }

    #[test]
    fn rejects_inconsistent_layers() {
        let params = PolicyParams::zeros(3, &[2]);
        let mut value: serde_json::Value = serde_json::to_value(&params).unwrap();
        value["layers"][0]["rows"] = serde_json::json!(5);
        assert!(serde_json::from_value::<PolicyParams>(value).is_err());
    }
}

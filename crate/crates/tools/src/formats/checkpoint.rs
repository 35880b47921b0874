use serde::{Deserialize, Serialize};

use scenegraph_core::numerics::{ParamStore, Tensor};

use crate::error::{Result, ToolError};

pub const CHECKPOINT_FORMAT: &str = "sgt-params";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Named parameter tensors in registration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub params: Vec<ParamRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Checkpoint {
    pub fn from_store(store: &ParamStore) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            params: store
                .iter()
                .map(|(_, p)| ParamRecord { name: p.name.clone(), shape: p.value.shape().to_vec(), data: p.value.data().to_vec() })
                .collect(),
        }
    }

    /// Copies values into the parameters of `store` with matching names.
    /// With `strict`, every parameter of `store` must be present. Returns
    /// the number of restored tensors.
    pub fn restore(&self, store: &mut ParamStore, strict: bool) -> Result<usize> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(ToolError::Format(format!(
                "expected checkpoint format `{CHECKPOINT_FORMAT}` version {CHECKPOINT_VERSION}, got `{}` version {}",
                self.format, self.version
            )));
        }
        let mut restored = 0;
        let ids: Vec<_> = store.ids().collect();
        for id in ids {
            let name = store.get(id).name.clone();
            let Some(rec) = self.params.iter().find(|r| r.name == name) else {
                if strict {
                    return Err(ToolError::Format(format!("checkpoint has no parameter `{name}`")));
                }
                continue;
            };
            let value = Tensor::new(rec.shape.clone(), rec.data.clone())?;
            if value.shape() != store.value(id).shape() {
                return Err(ToolError::Format(format!(
                    "parameter `{name}` has shape {:?} in the checkpoint, model expects {:?}",
                    value.shape(),
                    store.value(id).shape()
                )));
            }
            *store.value_mut(id) = value;
            restored += 1;
        }
        Ok(restored)
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Worker `id` of `count`; it owns indices `id, id + count, id + 2·count, …`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardSpec {
    id: u32,
    count: u32,
}

impl ShardSpec {
    pub fn new(id: u32, count: u32) -> Result<Self> {
        if id >= count {
            return Err(Error::InvalidShard { id, count });
        }
        Ok(Self { id, count })
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    /// Unbounded index sequence of this shard.
    pub fn indices(self) -> impl Iterator<Item = u64> {
        (0..).map(move |k| shard_indices(self, k))
    }
}

/// The `k`-th index of `shard`.
pub fn shard_indices(shard: ShardSpec, k: u64) -> u64 {
    k * shard.count as u64 + shard.id as u64
}

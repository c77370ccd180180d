//! Resource guards shared by every engine entry point.
//!
//! Exact computations in this crate are exhaustive, so every one of them is
//! bounded by a named guard. A tripped guard surfaces as [`Error::Guard`]
//! carrying the guard's name.

use crate::error::{Error, Result};

/// Environment variable overriding [`Limits::memory_mib`].
pub const ENV_MEMORY_MIB: &str = "DEFGEO_MEMORY_MIB";
/// Environment variable overriding [`Limits::max_family_size`].
pub const ENV_FAMILY_CAP: &str = "DEFGEO_FAMILY_CAP";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Arity cap for solution sets and families; `None` uses [`default_arity_cap`].
    pub max_arity: Option<usize>,
    /// Cap on the free-variable arity of a generator; `None` means the comparison arity.
    pub max_generator_arity: Option<usize>,
    /// Override for the comparison arity (default `k^2`).
    pub comparison_arity: Option<usize>,
    /// Maximum number of minor maps enumerated while seeding a family.
    pub max_seed_maps: u64,
    /// Maximum number of operation tables in a term clone.
    pub max_clone_size: usize,
    /// Maximum number of compositions tried while generating a term clone.
    pub max_compositions: u64,
    /// Maximum number of members of an explicitly enumerated algebraic family.
    pub max_family_size: usize,
    /// Maximum number of members of an explicitly enumerated oracle family.
    pub max_oracle_family: usize,
    /// Hard memory guard for explicit families, in MiB.
    pub memory_mib: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_arity: None,
            max_generator_arity: None,
            comparison_arity: None,
            max_seed_maps: 1 << 24,
            max_clone_size: 1 << 20,
            max_compositions: 1 << 34,
            max_family_size: 1 << 25,
            max_oracle_family: 1 << 20,
            memory_mib: 1024,
        }
    }
}

/// Default arity cap: 16 at `k <= 2`, otherwise the largest `n` with `k^n <= 3^9`.
pub fn default_arity_cap(k: u32) -> usize {
    if k <= 2 {
        return 16;
    }
    let mut n = 0usize;
    let mut size = 1u64;
    while size * k as u64 <= 19_683 {
        size *= k as u64;
        n += 1;
    }
    n.max(1)
}

impl Limits {
    /// Defaults with overrides from [`ENV_MEMORY_MIB`] and [`ENV_FAMILY_CAP`].
    pub fn from_env() -> Result<Self> {
        let mut limits = Limits::default();
        if let Some(v) = read_env(ENV_MEMORY_MIB)? {
            limits.memory_mib = v;
        }
        if let Some(v) = read_env(ENV_FAMILY_CAP)? {
            limits.max_family_size = v as usize;
            limits.max_oracle_family = v as usize;
        }
        Ok(limits)
    }

    pub fn arity_cap(&self, k: u32) -> usize {
        self.max_arity.unwrap_or_else(|| default_arity_cap(k))
    }

    /// The arity at which fingerprints are taken: `k^2` unless overridden.
    pub fn comparison_arity(&self, k: u32) -> usize {
        self.comparison_arity.unwrap_or((k * k) as usize)
    }

    pub fn generator_arity_cap(&self, k: u32) -> usize {
        self.max_generator_arity
            .unwrap_or_else(|| self.comparison_arity(k))
    }

    pub fn check_arity(&self, k: u32, n: usize) -> Result<()> {
        let cap = self.arity_cap(k);
        if n > cap {
            return Err(Error::guard(
                "arity",
                format!("arity {n} exceeds the cap {cap} at universe size {k}"),
            ));
        }
        Ok(())
    }

    /// Fails when `count` relations of `bits` bits each would exceed the memory guard.
    pub fn check_memory(&self, count: usize, bits: u64) -> Result<()> {
        let words = bits.div_ceil(64).max(1);
        let bytes = (count as u128) * (words as u128) * 8;
        let cap = (self.memory_mib as u128) << 20;
        if bytes > cap {
            return Err(Error::guard(
                "memory",
                format!(
                    "{count} relations of {bits} bits need {} MiB, cap is {} MiB",
                    bytes >> 20,
                    self.memory_mib
                ),
            ));
        }
        Ok(())
    }
}

fn read_env(name: &str) -> Result<Option<u64>> {
    match std::env::var(name) {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| Error::Invalid(format!("{name}={s} is not a non-negative integer"))),
        Err(_) => Ok(None),
    }
}

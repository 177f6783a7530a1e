//! Shared computation context: a surface model plus memoization tables and
//! an optional persistent cache.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::cache::CacheStore;
use crate::fock::{FockVector, HeisenbergMonomial};
use crate::hilbert::PartitionKey;
use crate::ops::OperatorSum;
use crate::rational::Q;
use crate::surface::SurfaceModel;

/// Key of a fully reduced nested commutator of a Chern operator with a
/// sequence of creation operators: `(k, α basis index, [(r, β basis index)])`.
pub(crate) type BracketKey = (u32, usize, Vec<(u32, usize)>);

/// A surface model together with every cache the calculator uses.
///
/// All expensive results are memoized in memory; commutator expansions and
/// basis conversions can additionally be persisted through a [`CacheStore`].
/// Cached data never changes answers: persisted entries are keyed by the
/// model fingerprint and truncation budget, and results are always cut back
/// to the requested budget before use.
pub struct Engine {
    pub model: Arc<SurfaceModel>,
    /// `(k, α, r, β) → (budget, expansion)` for Chern–creation commutators.
    pub(crate) cc_cache: Mutex<HashMap<(u32, usize, u32, usize), (u32, OperatorSum)>>,
    /// Fully nested brackets used when applying a Chern operator.
    pub(crate) bracket_cache: Mutex<HashMap<BracketKey, OperatorSum>>,
    /// `𝔊_k(basis class)` applied to a single creation monomial.
    pub(crate) apply_cache: Mutex<HashMap<(u32, usize, HeisenbergMonomial), FockVector>>,
    /// Expansions of creation-monomial classes in the Chern-generator basis.
    pub(crate) gb_cache: Mutex<HashMap<crate::hilbert::PartitionKey, crate::cup::GPolynomial>>,
    /// Stable structure-constant rows of the Hilbert ring.
    pub(crate) sc_cache:
        Mutex<HashMap<(PartitionKey, PartitionKey), Vec<(PartitionKey, Q)>>>,
    pub(crate) store: Option<CacheStore>,
}

impl Engine {
    pub fn new(model: Arc<SurfaceModel>) -> Engine {
        Engine {
            model,
            cc_cache: Mutex::new(HashMap::new()),
            bracket_cache: Mutex::new(HashMap::new()),
            apply_cache: Mutex::new(HashMap::new()),
            gb_cache: Mutex::new(HashMap::new()),
            sc_cache: Mutex::new(HashMap::new()),
            store: None,
        }
    }

    /// Attach a persistent cache directory.
    pub fn with_store(model: Arc<SurfaceModel>, store: CacheStore) -> Engine {
        Engine {
            store: Some(store),
            ..Engine::new(model)
        }
    }
}

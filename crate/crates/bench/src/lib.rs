//! Shared fixtures for the criterion benchmarks.

use dnnfmt::{generate, AtomSet, FormulaId, FormulaStore, InstanceSpec};

/// A generated instance together with the store that owns it.
pub struct Fixture {
    pub store: FormulaStore,
    pub phi: FormulaId,
    pub alpha: AtomSet,
}

/// Arithmetic-heavy instance with `atoms` atoms, two of them Boolean.
pub fn fixture(atoms: usize, seed: u64) -> Fixture {
    let spec = InstanceSpec {
        bool_atoms: 2,
        lra_atoms: atoms.saturating_sub(2),
        vars: 8,
        depth: 4,
        seed,
        ..InstanceSpec::default()
    };
    let mut store = FormulaStore::new();
    let (phi, alpha) = generate(&mut store, &spec);
    Fixture { store, phi, alpha }
}

/// Sizes swept by the scaling benchmarks.
pub const SIZES: [usize; 3] = [10, 14, 18];

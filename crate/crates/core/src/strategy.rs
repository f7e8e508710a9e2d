use crate::mergemap::{MapError, MapStore, MergeMap};
use crate::qbf::{Pcnf, Var};

/// A universal strategy: one merge-map per universal variable of a formula,
/// in prefix order, together with the node table the maps live in.
///
/// Trivial maps mark universals whose value is left open; strategy checking
/// treats them as adversarial (every value must lose for the existential
/// player).
#[derive(Clone, Debug)]
pub struct Strategy {
    pub store: MapStore,
    pub maps: Vec<MergeMap>,
}

impl Strategy {
    pub fn new(store: MapStore, maps: Vec<MergeMap>) -> Strategy {
        Strategy { store, maps }
    }

    pub fn map_for(&self, universal: Var) -> Option<&MergeMap> {
        self.maps.iter().find(|m| m.owner == universal)
    }

    /// Checks that there is exactly one map per universal, in prefix order,
    /// and that each only queries existentials to its left.
    pub fn validate(&self, formula: &Pcnf) -> Result<(), MapError> {
        let universals = formula.universals();
        if self.maps.len() != universals.len() {
            return Err(MapError::InputCount {
                expected: universals.len(),
                found: self.maps.len(),
            });
        }
        for (map, &u) in self.maps.iter().zip(universals) {
            if map.owner != u {
                return Err(MapError::OwnerMismatch {
                    left: u,
                    right: map.owner,
                });
            }
            self.store.validate(formula, map)?;
        }
        Ok(())
    }

    /// All maps in the text dump format, one block per universal.
    pub fn dump(&self) -> String {
        self.maps.iter().map(|m| self.store.dump(m)).collect()
    }

    /// Reads a dump produced by [`Strategy::dump`].
    pub fn parse(text: &str) -> Result<Strategy, MapError> {
        let mut store = MapStore::new();
        let maps = store.parse_dump(text)?;
        Ok(Strategy { store, maps })
    }

    /// Completes a partial map list with trivial maps for unmentioned universals.
    pub fn complete_for(mut self, formula: &Pcnf) -> Strategy {
        let maps = formula
            .universals()
            .iter()
            .map(|&u| {
                self.map_for(u)
                    .copied()
                    .unwrap_or_else(|| MergeMap::trivial_unchecked(u))
            })
            .collect();
        self.maps = maps;
        self
    }
}

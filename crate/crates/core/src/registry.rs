//! Named solver strategies, selected at run time.

use indexmap::IndexMap;

use crate::enumeration::{EquilibriumSearch, ExhaustiveSearch, ThresholdSearch};
use crate::error::{Error, Result};
use crate::mpg::{BruteForce, MpgSolver, ValueIteration};

/// Strategies of one kind, by name, in registration order.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: IndexMap<&'static str, Box<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: IndexMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, entry: Box<T>) {
        self.entries.insert(name, entry);
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

/// `value-iteration` (default) and `brute-force`.
pub fn mpg_solvers() -> Registry<dyn MpgSolver> {
    let mut r: Registry<dyn MpgSolver> = Registry::new("punishment solver");
    for s in [Box::new(ValueIteration) as Box<dyn MpgSolver>, Box::new(BruteForce::default())] {
        r.register(s.name(), s);
    }
    r
}

/// `threshold` (default) and `exhaustive`.
pub fn equilibrium_searches() -> Registry<dyn EquilibriumSearch> {
    let mut r: Registry<dyn EquilibriumSearch> = Registry::new("equilibrium search");
    for s in [
        Box::new(ThresholdSearch) as Box<dyn EquilibriumSearch>,
        Box::new(ExhaustiveSearch::default()),
    ] {
        r.register(s.name(), s);
    }
    r
}

//! Name-keyed registries of interchangeable strategies.
//!
//! Correlation structures, fit engines and experiment presets are each a
//! trait object registered under a canonical name plus optional aliases.
//! The CLI and config parser resolve user-supplied names through these.

/// Implemented by every strategy that can live in a [`Registry`].
pub trait Named {
    fn name(&self) -> &'static str;

    fn aliases(&self) -> &'static [&'static str] {
        &[]
    }
}

pub struct Registry<T: ?Sized + Named> {
    kind: &'static str,
    entries: Vec<Box<T>>,
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Registers a strategy. Panics on a duplicate name or alias, which is
    /// a programming error in the registration table.
    pub fn register(&mut self, entry: Box<T>) {
        for key in std::iter::once(entry.name()).chain(entry.aliases().iter().copied()) {
            assert!(self.lookup(key).is_none(), "duplicate {} name {key:?}", self.kind);
        }
        self.entries.push(entry);
    }

    fn lookup(&self, key: &str) -> Option<&T> {
        let key = key.trim();
        self.entries
            .iter()
            .find(|e| e.name().eq_ignore_ascii_case(key) || e.aliases().iter().any(|a| a.eq_ignore_ascii_case(key)))
            .map(Box::as_ref)
    }

    /// Looks up a strategy by canonical name or alias (case-insensitive).
    pub fn get(&self, key: &str) -> crate::Result<&T> {
        self.lookup(key).ok_or_else(|| {
            crate::Error::Config(format!(
                "unknown {} {key:?}; available: {}",
                self.kind,
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.entries.iter().map(Box::as_ref)
    }
}

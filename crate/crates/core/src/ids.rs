//! Identifiers for objects, dialogues and utterance positions.

use std::fmt;
use std::num::NonZeroU32;

use serde::{Deserialize, Serialize};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl TryFrom<String> for $name {
            type Error = &'static str;

            fn try_from(id: String) -> Result<Self, Self::Error> {
                Self::new(id).ok_or("identifier must be non-empty")
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.0
            }
        }

        impl $name {
            /// Returns `None` for an empty identifier.
            pub fn new(id: impl Into<String>) -> Option<Self> {
                let id = id.into();
                if id.is_empty() {
                    None
                } else {
                    Some(Self(id))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            /// Panics on an empty string; use [`Self::new`] for untrusted input.
            fn from(id: &str) -> Self {
                Self::new(id).expect(concat!(stringify!($name), " must be non-empty"))
            }
        }
    };
}

string_id!(
    /// An entity in the shared scene.
    ObjectId
);
string_id!(
    /// A dialogue (monologue) in the corpus.
    DialogueId
);

/// 1-based position of an utterance within its dialogue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UtteranceIndex(NonZeroU32);

impl UtteranceIndex {
    pub fn new(index: u32) -> Option<Self> {
        NonZeroU32::new(index).map(Self)
    }

    pub fn get(self) -> u32 {
        self.0.get()
    }

    /// The previous utterance, or `None` at the first one.
    pub fn prev(self) -> Option<Self> {
        Self::new(self.get() - 1)
    }

    pub fn next(self) -> Self {
        Self(self.0.checked_add(1).expect("utterance index overflow"))
    }
}

impl fmt::Display for UtteranceIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

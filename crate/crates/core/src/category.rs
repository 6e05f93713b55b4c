use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Coarse bug class assigned from commit-message evidence.
///
/// Declaration order is the canonical order used for serialization and for
/// the last-resort tie break in category estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BugCategory {
    Logic,
    NullPointer,
    Overflow,
}

impl BugCategory {
    pub const ALL: [BugCategory; 3] = [BugCategory::Logic, BugCategory::NullPointer, BugCategory::Overflow];

    pub fn as_str(self) -> &'static str {
        match self {
            BugCategory::Logic => "logic",
            BugCategory::NullPointer => "null_pointer",
            BugCategory::Overflow => "overflow",
        }
    }
}

impl fmt::Display for BugCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BugCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<BugCategory, Error> {
        BugCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown bug category `{s}`")))
    }
}

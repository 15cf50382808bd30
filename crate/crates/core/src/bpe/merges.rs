use std::collections::HashMap;

use crate::error::{Error, Result};

/// Rank-ordered merge rules. Rank is the position in the list; lower ranks
/// are applied first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergeTable {
    rules: Vec<(String, String)>,
    ranks: HashMap<(String, String), usize>,
}

impl MergeTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rules<I>(rules: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut table = Self::new();
        for (left, right) in rules {
            if !table.push(left.clone(), right.clone()) {
                return Err(Error::InvalidMerge(format!(
                    "duplicate rule `{left} {right}`"
                )));
            }
        }
        Ok(table)
    }

    /// Appends a rule at the lowest priority. Returns false if it already exists.
    pub fn push(&mut self, left: String, right: String) -> bool {
        let key = (left, right);
        if self.ranks.contains_key(&key) {
            return false;
        }
        self.ranks.insert(key.clone(), self.rules.len());
        self.rules.push(key);
        true
    }

    pub fn rank(&self, left: &str, right: &str) -> Option<usize> {
        // Tuple-of-String keys need owned lookups; rank() is not on the encode path.
        self.ranks.get(&(left.to_owned(), right.to_owned())).copied()
    }

    pub fn contains(&self, left: &str, right: &str) -> bool {
        self.rank(left, right).is_some()
    }

    pub fn rules(&self) -> &[(String, String)] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.rules.iter().map(|(l, r)| (l.as_str(), r.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_is_position() {
        let t = MergeTable::from_rules(vec![
            ("a".to_string(), "b".to_string()),
            ("ab".to_string(), "c".to_string()),
        ])
        .unwrap();
        assert_eq!(t.rank("a", "b"), Some(0));
        assert_eq!(t.rank("ab", "c"), Some(1));
        assert_eq!(t.rank("b", "c"), None);
    }

    #[test]
    fn duplicates_rejected() {
        let err = MergeTable::from_rules(vec![
            ("a".to_string(), "b".to_string()),
            ("a".to_string(), "b".to_string()),
        ]);
        assert!(err.is_err());
    }
}

//! Group-spec parsing: the mapping from feature columns to group ids.
//!
//! The sidecar format is one `column_name=group_id` pair per line, with `#`
//! comments and blank lines ignored; the inline flag format is the same
//! pairs joined by commas. Group ids must form a contiguous `1..=p`
//! sequence — their order defines fusion adjacency.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Column-to-group assignment, unordered until matched against a header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAssignment {
    by_column: BTreeMap<String, usize>,
}

impl GroupAssignment {
    pub fn len(&self) -> usize {
        self.by_column.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_column.is_empty()
    }

    pub fn group_of(&self, column: &str) -> Option<usize> {
        self.by_column.get(column).copied()
    }

    /// Number of groups `p`; ids are validated to be exactly `1..=p`.
    pub fn num_groups(&self) -> usize {
        self.by_column.values().copied().max().unwrap_or(0)
    }

    /// Group sizes in ascending group order.
    pub fn contiguous_sizes(&self) -> Result<Vec<usize>> {
        let p = self.num_groups();
        let mut sizes = vec![0usize; p];
        for &g in self.by_column.values() {
            sizes[g - 1] += 1;
        }
        if let Some(missing) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Parse(format!(
                "group ids must be contiguous 1..={p}, but group {} has no columns",
                missing + 1
            )));
        }
        Ok(sizes)
    }

    /// Indices into `feature_names` ordered by `(group id, position)`.
    ///
    /// Fails when a feature column has no assignment (naming it) or when
    /// the assignment names a column absent from the header.
    pub fn design_order(&self, feature_names: &[String]) -> Result<Vec<usize>> {
        for name in self.by_column.keys() {
            if !feature_names.iter().any(|f| f == name) {
                return Err(Error::Parse(format!(
                    "group spec names column '{name}' which is not in the CSV"
                )));
            }
        }
        let mut order: Vec<(usize, usize)> = Vec::with_capacity(feature_names.len());
        for (idx, name) in feature_names.iter().enumerate() {
            match self.group_of(name) {
                Some(g) => order.push((g, idx)),
                None => {
                    return Err(Error::Parse(format!(
                        "column '{name}' has no group id assigned"
                    )))
                }
            }
        }
        order.sort();
        Ok(order.into_iter().map(|(_, idx)| idx).collect())
    }
}

/// Parses the sidecar file format (one pair per line).
pub fn parse_group_spec(text: &str) -> Result<GroupAssignment> {
    let pairs = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    assignment_from_pairs(pairs)
}

/// Parses the inline flag format (`a=1,b=1,c=2`).
pub fn parse_inline_groups(text: &str) -> Result<GroupAssignment> {
    let pairs = text.split(',').map(str::trim).filter(|l| !l.is_empty());
    assignment_from_pairs(pairs)
}

fn assignment_from_pairs<'a>(
    pairs: impl Iterator<Item = &'a str>,
) -> Result<GroupAssignment> {
    let mut by_column = BTreeMap::new();
    for pair in pairs {
        let (name, id) = pair.split_once('=').ok_or_else(|| {
            Error::Parse(format!("expected 'column=group_id', got '{pair}'"))
        })?;
        let name = name.trim();
        let id = id.trim();
        if name.is_empty() {
            return Err(Error::Parse(format!("empty column name in '{pair}'")));
        }
        let group: usize = id
            .parse()
            .map_err(|_| Error::Parse(format!("'{id}' is not a valid group id")))?;
        if group == 0 {
            return Err(Error::Parse("group ids start at 1".into()));
        }
        if by_column.insert(name.to_string(), group).is_some() {
            return Err(Error::Parse(format!(
                "column '{name}' assigned to a group twice"
            )));
        }
    }
    if by_column.is_empty() {
        return Err(Error::Parse("group spec assigns no columns".into()));
    }
    let assignment = GroupAssignment { by_column };
    assignment.contiguous_sizes()?;
    Ok(assignment)
}

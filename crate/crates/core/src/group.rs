use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{norm, MIN_NORM};

/// A direction in embedding space. Only its orientation matters: every
/// consumer goes through normalized projections, so any positive rescaling
/// is equivalent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentDirection {
    components: Vec<f64>,
    source_group_size: usize,
    source_identity_count: usize,
}

impl LatentDirection {
    pub fn new(components: Vec<f64>, source_group_size: usize, source_identity_count: usize) -> Result<Self> {
        let n = norm(&components);
        if !(n > MIN_NORM) {
            return Err(Error::DegenerateDirection { norm: n });
        }
        Ok(Self {
            components,
            source_group_size,
            source_identity_count,
        })
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.components)
    }

    /// Unit-length copy of the components.
    pub fn unit(&self) -> Vec<f64> {
        let n = self.norm();
        self.components.iter().map(|x| x / n).collect()
    }

    /// Returns a copy with components multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "direction scale factor must be positive, got {factor}"
            )));
        }
        Self::new(
            self.components.iter().map(|x| x * factor).collect(),
            self.source_group_size,
            self.source_identity_count,
        )
    }

    /// Number of members `n` of the group the direction was computed from.
    pub fn source_group_size(&self) -> usize {
        self.source_group_size
    }

    /// Number of distinct identities `C` in that group.
    pub fn source_identity_count(&self) -> usize {
        self.source_identity_count
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedProvenance {
    GraphComponent,
    UserSupplied,
    Singleton,
    /// Produced by a comparison method (k-means cluster, NNS neighborhood,
    /// random sample) rather than used as an LFA seed.
    Baseline,
}

impl SeedProvenance {
    pub fn as_str(self) -> &'static str {
        match self {
            SeedProvenance::GraphComponent => "graph-component",
            SeedProvenance::UserSupplied => "user-supplied",
            SeedProvenance::Singleton => "singleton",
            SeedProvenance::Baseline => "baseline",
        }
    }
}

/// An ordered set of dataset rows. Order is insertion order.
///
/// `direction` and `threshold_used` are absent for seed groups that have not
/// been grown yet.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    members: Vec<usize>,
    pub direction: Option<LatentDirection>,
    pub threshold_used: Option<f64>,
    pub provenance: SeedProvenance,
}

impl Group {
    /// Creates a group, rejecting duplicate members.
    pub fn new(members: Vec<usize>, provenance: SeedProvenance) -> Result<Self> {
        let mut seen = HashSet::with_capacity(members.len());
        for &m in &members {
            if !seen.insert(m) {
                return Err(Error::InvalidArgument(format!("group lists row {m} more than once")));
            }
        }
        Ok(Self {
            members,
            direction: None,
            threshold_used: None,
            provenance,
        })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.contains(&index)
    }

    /// Checks every member index against a dataset of `n` rows.
    pub fn check_bounds(&self, n: usize) -> Result<()> {
        match self.members.iter().find(|&&m| m >= n) {
            Some(&index) => Err(Error::IndexOutOfRange { index, len: n }),
            None => Ok(()),
        }
    }

    pub(crate) fn push(&mut self, index: usize) {
        debug_assert!(!self.members.contains(&index));
        self.members.push(index);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates() {
        assert!(Group::new(vec![0, 1, 0], SeedProvenance::UserSupplied).is_err());
        let g = Group::new(vec![2, 0], SeedProvenance::UserSupplied).unwrap();
        assert_eq!(g.members(), &[2, 0]);
        assert!(g.check_bounds(3).is_ok());
        assert_eq!(g.check_bounds(2), Err(Error::IndexOutOfRange { index: 2, len: 2 }));
    }

    #[test]
    fn degenerate_direction() {
        assert!(matches!(
            LatentDirection::new(vec![0.0, 0.0], 1, 1),
            Err(Error::DegenerateDirection { .. })
        ));
        let d = LatentDirection::new(vec![3.0, 4.0], 2, 1).unwrap();
        assert_eq!(d.unit(), vec![0.6, 0.8]);
        assert!(d.scaled(0.0).is_err());
        assert_eq!(d.scaled(2.0).unwrap().components(), &[6.0, 8.0]);
    }
}

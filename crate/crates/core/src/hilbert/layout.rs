use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

/// Ordered, labelled tensor factors.
///
/// The product basis is enumerated with the leftmost subsystem varying
/// slowest, i.e. the composite index of digits `(i_0, …, i_{n-1})` is
/// `Σ i_j · stride_j` with `stride_j = Π_{l>j} dim_l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsystemLayout {
    subsystems: Vec<Subsystem>,
}

/// Lookup table between a composite index and a (group, rest) index pair.
///
/// The group's digits are combined in the order the group was given, the rest
/// in layout order; both leftmost-slowest.
#[derive(Debug, Clone)]
pub struct IndexSplit {
    pub group_dim: usize,
    pub rest_dim: usize,
    table: Vec<usize>,
}

impl IndexSplit {
    #[inline]
    pub fn full(&self, group: usize, rest: usize) -> usize {
        self.table[group * self.rest_dim + rest]
    }
}

impl SubsystemLayout {
    pub fn new<S: Into<String>>(subsystems: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let subsystems: Vec<Subsystem> = subsystems
            .into_iter()
            .map(|(label, dim)| Subsystem {
                label: label.into(),
                dim,
            })
            .collect();
        if subsystems.is_empty() {
            return Err(Error::DegenerateLayout("layout has no subsystems".into()));
        }
        let mut seen = HashSet::new();
        for s in &subsystems {
            if s.dim == 0 {
                return Err(Error::DegenerateLayout(format!(
                    "subsystem `{}` has dimension 0",
                    s.label
                )));
            }
            if !seen.insert(s.label.as_str()) {
                return Err(Error::LayoutConflict(s.label.clone()));
            }
        }
        Ok(SubsystemLayout { subsystems })
    }

    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(label.into(), dim)])
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn labels(&self) -> Vec<&str> {
        self.subsystems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.subsystems.iter().any(|s| s.label == label)
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subsystems[self.position(label)?].dim)
    }

    /// `"A+B"` style name of the whole layout.
    pub fn joined_label(&self) -> String {
        self.labels().join("+")
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.len()];
        for j in (0..self.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * self.subsystems[j + 1].dim;
        }
        strides
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &SubsystemLayout) -> Result<Self> {
        Self::new(
            self.subsystems
                .iter()
                .chain(other.subsystems.iter())
                .map(|s| (s.label.clone(), s.dim)),
        )
    }

    /// Sub-layout in the order given by `labels`.
    pub fn select<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let positions = self.positions(labels)?;
        Self::new(
            positions
                .iter()
                .map(|&p| (self.subsystems[p].label.clone(), self.subsystems[p].dim)),
        )
    }

    /// Sub-layout of everything not in `labels`, in layout order.
    pub fn without<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let removed = self.positions(labels)?;
        let kept: Vec<_> = (0..self.len())
            .filter(|p| !removed.contains(p))
            .map(|p| (self.subsystems[p].label.clone(), self.subsystems[p].dim))
            .collect();
        if kept.is_empty() {
            return Err(Error::DegenerateLayout(
                "operation would remove every subsystem".into(),
            ));
        }
        Self::new(kept)
    }

    /// Positions of `labels`, rejecting unknown and repeated labels.
    pub fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l.as_ref())?;
            if out.contains(&p) {
                return Err(Error::LayoutConflict(l.as_ref().to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Splits the composite index into the digits of `group` (in the given
    /// order) and of every remaining subsystem (in layout order).
    pub fn split(&self, group: &[usize]) -> IndexSplit {
        let dims = self.dims();
        let strides = self.strides();
        let rest: Vec<usize> = (0..self.len()).filter(|p| !group.contains(p)).collect();
        let group_dims: Vec<usize> = group.iter().map(|&p| dims[p]).collect();
        let rest_dims: Vec<usize> = rest.iter().map(|&p| dims[p]).collect();
        let group_dim: usize = group_dims.iter().product();
        let rest_dim: usize = rest_dims.iter().product();

        let offsets = |positions: &[usize], pdims: &[usize], total: usize| -> Vec<usize> {
            (0..total)
                .map(|mut idx| {
                    let mut off = 0;
                    for k in (0..positions.len()).rev() {
                        off += (idx % pdims[k]) * strides[positions[k]];
                        idx /= pdims[k];
                    }
                    off
                })
                .collect()
        };
        let g_off = offsets(group, &group_dims, group_dim);
        let r_off = offsets(&rest, &rest_dims, rest_dim);
        let mut table = Vec::with_capacity(group_dim * rest_dim);
        for g in &g_off {
            for r in &r_off {
                table.push(g + r);
            }
        }
        IndexSplit {
            group_dim,
            rest_dim,
            table,
        }
    }
}

impl fmt::Display for SubsystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .subsystems
            .iter()
            .map(|s| format!("{}:{}", s.label, s.dim))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_zero_dims() {
        assert!(matches!(
            SubsystemLayout::new([("A", 2), ("A", 3)]),
            Err(Error::LayoutConflict(_))
        ));
        assert!(matches!(
            SubsystemLayout::new([("A", 0)]),
            Err(Error::DegenerateLayout(_))
        ));
    }

    #[test]
    fn strides_are_leftmost_slowest() {
        let l = SubsystemLayout::new([("A", 2), ("B", 3), ("C", 4)]).unwrap();
        assert_eq!(l.strides(), vec![12, 4, 1]);
        assert_eq!(l.total_dim(), 24);
    }

    #[test]
    fn split_enumerates_every_index_once() {
        let l = SubsystemLayout::new([("A", 2), ("B", 3), ("C", 2)]).unwrap();
        let s = l.split(&[2, 0]);
        assert_eq!((s.group_dim, s.rest_dim), (4, 3));
        let mut seen: Vec<usize> = (0..4)
            .flat_map(|g| (0..3).map(move |r| (g, r)))
            .map(|(g, r)| s.full(g, r))
            .collect();
        seen.sort();
        assert_eq!(seen, (0..12).collect::<Vec<_>>());
        // group (C=1, A=1), rest B=2 → A=1,B=2,C=1 → 6+2*2+1
        assert_eq!(s.full(3, 2), 11);
    }
}

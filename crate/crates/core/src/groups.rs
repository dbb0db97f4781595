//! Non-overlapping group structures and the group reduction operator.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A partition of `p` variables into `m` non-empty groups with ids `0..m`.
///
/// `scale_sizes` is the group size used when scaling group norms. It equals
/// the member count except for structures produced by [`GroupStructure::restrict`],
/// which keep the parent's sizes so the restricted penalty agrees with the
/// full one on vectors supported inside the restriction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStructure {
    assignment: Vec<usize>,
    group_index: Vec<Vec<usize>>,
    sizes: Vec<usize>,
    scale_sizes: Vec<usize>,
}

/// A group structure restricted to a subset of variables.
#[derive(Debug, Clone)]
pub struct Restriction {
    /// Structure over the local coordinates `0..vars.len()`.
    pub groups: GroupStructure,
    /// Sorted original variable ids; local coordinate `k` is `vars[k]`.
    pub vars: Vec<usize>,
    /// Original group id of each local group.
    pub group_ids: Vec<usize>,
}

impl GroupStructure {
    /// Builds a structure from per-variable group labels.
    ///
    /// Labels may be any integers; they are re-indexed to `0..m` in increasing
    /// label order.
    pub fn from_assignment(labels: &[i64]) -> Result<Self> {
        if labels.is_empty() {
            return invalid("group assignment is empty");
        }
        let mut distinct: Vec<i64> = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let assignment: Vec<usize> = labels
            .iter()
            .map(|l| distinct.binary_search(l).expect("label present"))
            .collect();
        Ok(Self::from_dense(assignment, distinct.len()))
    }

    /// Every variable in its own group.
    pub fn singletons(p: usize) -> Self {
        Self::from_dense((0..p).collect(), p)
    }

    /// Consecutive groups with the given sizes.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return invalid("group sizes must be non-empty and positive");
        }
        let assignment = sizes
            .iter()
            .enumerate()
            .flat_map(|(g, &s)| std::iter::repeat_n(g, s))
            .collect();
        Ok(Self::from_dense(assignment, sizes.len()))
    }

    fn from_dense(assignment: Vec<usize>, m: usize) -> Self {
        let mut group_index = vec![Vec::new(); m];
        for (i, &g) in assignment.iter().enumerate() {
            group_index[g].push(i);
        }
        let sizes: Vec<usize> = group_index.iter().map(Vec::len).collect();
        Self {
            assignment,
            group_index,
            scale_sizes: sizes.clone(),
            sizes,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_groups(&self) -> usize {
        self.group_index.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn group_of(&self, var: usize) -> usize {
        self.assignment[var]
    }

    pub fn members(&self, g: usize) -> &[usize] {
        &self.group_index[g]
    }

    pub fn group_index(&self) -> &[Vec<usize>] {
        &self.group_index
    }

    /// Member counts per group.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Sizes used to scale group norms (see the type-level docs).
    pub fn scale_sizes(&self) -> &[usize] {
        &self.scale_sizes
    }

    /// All variables belonging to the given groups, sorted.
    pub fn vars_of_groups(&self, groups: &[usize]) -> Vec<usize> {
        let mut vars: Vec<usize> = groups
            .iter()
            .flat_map(|&g| self.group_index[g].iter().copied())
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    /// Groups containing at least one of `vars`, sorted.
    pub fn groups_of_vars(&self, vars: &[usize]) -> Vec<usize> {
        let mut groups: Vec<usize> = vars.iter().map(|&v| self.assignment[v]).collect();
        groups.sort_unstable();
        groups.dedup();
        groups
    }

    /// Restricts the structure to `vars`, keeping the parent's scale sizes.
    pub fn restrict(&self, vars: &[usize]) -> Result<Restriction> {
        let mut vars = vars.to_vec();
        vars.sort_unstable();
        vars.dedup();
        if let Some(&last) = vars.last() {
            if last >= self.num_vars() {
                return invalid(format!("variable {last} out of range"));
            }
        }
        let group_ids = self.groups_of_vars(&vars);
        let local: Vec<usize> = vars
            .iter()
            .map(|&v| group_ids.binary_search(&self.assignment[v]).expect("group present"))
            .collect();
        let mut groups = Self::from_dense(local, group_ids.len());
        groups.scale_sizes = group_ids.iter().map(|&g| self.scale_sizes[g]).collect();
        Ok(Restriction {
            groups,
            vars,
            group_ids,
        })
    }
}

/// `[b]_{G,q}`: entry `g` is `p_g^q * ||b_g||_2`.
pub fn group_reduce(b: &[f64], groups: &GroupStructure, q: f64) -> Result<Vec<f64>> {
    if b.len() != groups.num_vars() {
        return invalid(format!(
            "vector has length {} but the group structure covers {} variables",
            b.len(),
            groups.num_vars()
        ));
    }
    Ok(group_reduce_unchecked(b, groups, q))
}

pub(crate) fn group_reduce_unchecked(b: &[f64], groups: &GroupStructure, q: f64) -> Vec<f64> {
    groups
        .group_index
        .iter()
        .zip(&groups.scale_sizes)
        .map(|(members, &size)| {
            let norm = members.iter().map(|&i| b[i] * b[i]).sum::<f64>().sqrt();
            if norm == 0.0 {
                0.0
            } else {
                (size as f64).powf(q) * norm
            }
        })
        .collect()
}

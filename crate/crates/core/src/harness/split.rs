//! Subject-wise train/validation/test partitioning.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::bail;
use crate::Result;

pub const MIN_SUBJECTS: usize = 5;

/// Integer weights; sizes are `floor(n * w / total)` for train and
/// validation, the remainder going to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: u32,
    pub valid: u32,
    pub test: u32,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 6,
            valid: 2,
            test: 2,
        }
    }
}

impl SplitRatios {
    pub fn sizes(&self, n: usize) -> Result<(usize, usize, usize)> {
        let total = u64::from(self.train) + u64::from(self.valid) + u64::from(self.test);
        if self.train == 0 || self.valid == 0 || self.test == 0 {
            bail!(Argument, "every split needs a positive weight");
        }
        let part = |w: u32| (n as u64 * u64::from(w) / total) as usize;
        let (tr, va) = (part(self.train), part(self.valid));
        Ok((tr, va, n - tr - va))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_subjects: Vec<String>,
    pub valid_subjects: Vec<String>,
    pub test_subjects: Vec<String>,
    pub seed: u64,
}

impl SplitPlan {
    /// Checks disjointness, exhaustiveness over `subjects` and the size rule.
    pub fn audit<S: AsRef<str>>(&self, subjects: &[S], ratios: &SplitRatios) -> Result<()> {
        let all: BTreeSet<&str> = subjects.iter().map(|s| s.as_ref()).collect();
        let mut seen = BTreeSet::new();
        for s in self
            .train_subjects
            .iter()
            .chain(&self.valid_subjects)
            .chain(&self.test_subjects)
        {
            if !seen.insert(s.as_str()) {
                bail!(Data, "subject {s} appears in more than one split");
            }
            if !all.contains(s.as_str()) {
                bail!(Data, "subject {s} is not part of the dataset");
            }
        }
        if seen.len() != all.len() {
            bail!(Data, "{} of {} subjects assigned", seen.len(), all.len());
        }
        let want = ratios.sizes(all.len())?;
        let got = (
            self.train_subjects.len(),
            self.valid_subjects.len(),
            self.test_subjects.len(),
        );
        if want != got {
            bail!(Size, "split sizes {got:?}, expected {want:?}");
        }
        Ok(())
    }
}

/// Sorted, de-duplicated subjects shuffled on the seed's split stream.
pub fn monte_carlo_split<S: AsRef<str>>(
    subjects: &[S],
    seed: u64,
    ratios: &SplitRatios,
) -> Result<SplitPlan> {
    let unique: BTreeSet<&str> = subjects.iter().map(|s| s.as_ref()).collect();
    if unique.len() < MIN_SUBJECTS {
        bail!(
            Size,
            "need at least {MIN_SUBJECTS} subjects, got {}",
            unique.len()
        );
    }
    let mut order: Vec<String> = unique.into_iter().map(String::from).collect();
    order.shuffle(&mut crate::rng::stream(seed, &["split"]));
    let (tr, va, _) = ratios.sizes(order.len())?;
    let test = order.split_off(tr + va);
    let valid = order.split_off(tr);
    Ok(SplitPlan {
        train_subjects: order,
        valid_subjects: valid,
        test_subjects: test,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use proptest::prelude::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("sub-{i:03}")).collect()
    }

    #[test]
    fn worked_sizes() {
        let r = SplitRatios::default();
        assert_eq!(r.sizes(127).unwrap(), (76, 25, 26));
        assert_eq!(r.sizes(10).unwrap(), (6, 2, 2));
        let plan = monte_carlo_split(&ids(127), 41, &r).unwrap();
        plan.audit(&ids(127), &r).unwrap();
    }

    #[test]
    fn too_few_subjects() {
        assert!(matches!(
            monte_carlo_split(&ids(4), 1, &SplitRatios::default()),
            Err(crate::Error::Size(_))
        ));
        // duplicates do not count twice
        let dup = ["a", "a", "b", "c", "d", "d"];
        assert!(monte_carlo_split(&dup, 1, &SplitRatios::default()).is_err());
    }

    #[test]
    fn audit_catches_overlap() {
        let r = SplitRatios::default();
        let mut plan = monte_carlo_split(&ids(10), 3, &r).unwrap();
        plan.test_subjects[0] = plan.train_subjects[0].clone();
        assert!(plan.audit(&ids(10), &r).is_err());
    }

    proptest! {
        #[test]
        fn plans_partition_subjects(n in 5usize..200, seed in any::<u64>()) {
            let r = SplitRatios::default();
            let a = monte_carlo_split(&ids(n), seed, &r).unwrap();
            prop_assert!(a.audit(&ids(n), &r).is_ok());
            prop_assert_eq!(&a, &monte_carlo_split(&ids(n), seed, &r).unwrap());
        }
    }
}

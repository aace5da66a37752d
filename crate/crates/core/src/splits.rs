//! Size-stratified train/val/small_test/large_test splits and class
//! upsampling for the training set.
//!
//! The smaller half of a dataset (by node count) feeds train, val and
//! small_test; large_test mirrors small_test's class counts using the
//! largest graphs of each class.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::spectral::size_order;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.7,
            val: 0.15,
            test: 0.15,
        }
    }
}

impl SplitRatios {
    fn validate(&self) -> Result<()> {
        let ok = [self.train, self.val, self.test]
            .iter()
            .all(|r| r.is_finite() && *r >= 0.0)
            && ((self.train + self.val + self.test) - 1.0).abs() < 1e-9;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "split ratios must be nonnegative and sum to 1, got {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitBundle {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub small_test: Vec<usize>,
    pub large_test: Vec<usize>,
}

/// Names and order of the four splits in the text format.
pub const SPLIT_NAMES: [&str; 4] = ["train", "val", "small_test", "large_test"];

impl SplitBundle {
    pub fn parts(&self) -> [&Vec<usize>; 4] {
        [&self.train, &self.val, &self.small_test, &self.large_test]
    }

    fn parts_mut(&mut self) -> [&mut Vec<usize>; 4] {
        [
            &mut self.train,
            &mut self.val,
            &mut self.small_test,
            &mut self.large_test,
        ]
    }

    /// Per-class counts of one index list.
    pub fn class_counts(indices: &[usize], labels: &[usize], class_count: usize) -> Vec<usize> {
        let mut counts = vec![0; class_count];
        for &i in indices {
            counts[labels[i]] += 1;
        }
        counts
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, part) in SPLIT_NAMES.iter().zip(self.parts()) {
            writeln!(out, "[{name}]").unwrap();
            for i in part {
                writeln!(out, "{i}").unwrap();
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut bundle = Self::default();
        let mut seen = [false; 4];
        let mut current: Option<usize> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let k = SPLIT_NAMES.iter().position(|n| *n == name).ok_or_else(|| {
                    Error::SplitFormat(format!("line {}: unknown section [{name}]", lineno + 1))
                })?;
                if seen[k] {
                    return Err(Error::SplitFormat(format!(
                        "line {}: duplicate section [{name}]",
                        lineno + 1
                    )));
                }
                seen[k] = true;
                current = Some(k);
                continue;
            }
            let k = current.ok_or_else(|| {
                Error::SplitFormat(format!("line {}: index before any section", lineno + 1))
            })?;
            let idx = line
                .parse()
                .map_err(|e| Error::SplitFormat(format!("line {}: {line:?}: {e}", lineno + 1)))?;
            bundle.parts_mut()[k].push(idx);
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::SplitFormat(format!(
                "missing section [{}]",
                SPLIT_NAMES[k]
            )));
        }
        Ok(bundle)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Checks that indices are in range and splits are pairwise disjoint.
    pub fn validate_against(&self, d: &Dataset) -> Result<()> {
        let mut owner = vec![None; d.len()];
        for (k, part) in self.parts().iter().enumerate() {
            for &i in part.iter() {
                let slot = owner.get_mut(i).ok_or_else(|| {
                    Error::SplitFormat(format!("index {i} out of range for {} graphs", d.len()))
                })?;
                if let Some(prev) = *slot {
                    return Err(Error::SplitFormat(format!(
                        "index {i} appears in both [{}] and [{}]",
                        SPLIT_NAMES[prev], SPLIT_NAMES[k]
                    )));
                }
                *slot = Some(k);
            }
        }
        Ok(())
    }
}

/// Number of graphs in the small-graph pool.
pub fn pool_size(n: usize) -> usize {
    n.div_ceil(2)
}

/// Builds the four splits. Within each class of the pool the graphs are
/// shuffled with `seed`, then cut as `train = ⌊r_train·n⌋`,
/// `small_test = ⌊r_test·n⌋`, and `val` takes the remainder.
pub fn make_size_splits(d: &Dataset, ratios: SplitRatios, seed: u64) -> Result<SplitBundle> {
    ratios.validate()?;
    let labels = d.labels();
    let order = size_order(d);
    let pool_len = pool_size(d.len());
    let (pool, rest) = order.split_at(pool_len);

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); d.class_count];
    for &i in pool {
        by_class[labels[i]].push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bundle = SplitBundle::default();
    let mut small_counts = vec![0; d.class_count];
    for (c, members) in by_class.iter_mut().enumerate() {
        if members.is_empty() {
            return Err(Error::ClassCannotSplit(c));
        }
        members.sort_unstable();
        members.shuffle(&mut rng);
        let n = members.len();
        let n_train = floor_count(ratios.train, n);
        let n_small = floor_count(ratios.test, n);
        let n_val = n - n_train - n_small;
        bundle.train.extend(&members[..n_train]);
        bundle.val.extend(&members[n_train..n_train + n_val]);
        bundle.small_test.extend(&members[n_train + n_val..]);
        small_counts[c] = n_small;
    }

    // largest first, ties by lower index
    let mut taken = vec![0; d.class_count];
    let mut descending: Vec<usize> = rest.to_vec();
    descending.sort_by_key(|&i| (std::cmp::Reverse(d.graphs[i].node_count()), i));
    for i in descending {
        let c = labels[i];
        if taken[c] < small_counts[c] {
            bundle.large_test.push(i);
            taken[c] += 1;
        }
    }
    if let Some(c) = (0..d.class_count).find(|&c| taken[c] < small_counts[c]) {
        return Err(Error::ClassCannotSplit(c));
    }
    Ok(bundle)
}

fn floor_count(ratio: f64, n: usize) -> usize {
    ((ratio * n as f64 + 1e-9).floor() as usize).min(n)
}

/// Per-class `(fraction, ratio)`: a `fraction` of the class's training
/// graphs is repeated `ratio - 1` extra times.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct UpsampleSpec {
    pub classes: BTreeMap<usize, (f64, usize)>,
}

impl UpsampleSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_class(mut self, class: usize, fraction: f64, ratio: usize) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) || ratio < 1 {
            return Err(Error::InvalidArgument(format!(
                "upsample class {class}: need fraction in (0,1] and ratio >= 1, got ({fraction}, {ratio})"
            )));
        }
        self.classes.insert(class, (fraction, ratio));
        Ok(self)
    }

    pub fn is_identity(&self) -> bool {
        self.classes.values().all(|&(_, r)| r == 1)
    }

    /// Parses `class:fraction:ratio` items separated by commas.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = Self::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let bad = || {
                Error::InvalidArgument(format!(
                    "bad upsample item {item:?}, expected class:fraction:ratio"
                ))
            };
            let parts: Vec<&str> = item.split(':').collect();
            let [c, f, r] = parts.as_slice() else {
                return Err(bad());
            };
            spec = spec.with_class(
                c.parse().map_err(|_| bad())?,
                f.parse().map_err(|_| bad())?,
                r.parse().map_err(|_| bad())?,
            )?;
        }
        Ok(spec)
    }
}

/// Returns `train` followed by the duplicated entries, class by class.
pub fn upsample(train: &[usize], labels: &[usize], spec: &UpsampleSpec, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = train.to_vec();
    for (&class, &(fraction, ratio)) in &spec.classes {
        let members: Vec<usize> = train
            .iter()
            .copied()
            .filter(|&i| labels[i] == class)
            .collect();
        let pick = floor_count(fraction, members.len());
        if pick == 0 || ratio <= 1 {
            continue;
        }
        let mut chosen: Vec<usize> = index::sample(&mut rng, members.len(), pick)
            .into_iter()
            .map(|k| members[k])
            .collect();
        chosen.sort_unstable();
        for _ in 1..ratio {
            out.extend(&chosen);
        }
    }
    out
}

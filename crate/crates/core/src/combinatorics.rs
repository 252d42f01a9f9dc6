//! Counting and enumerating the distinct pivot views of an n-dimensional
//! cube.
//!
//! A view picks one horizontal dimension and an unordered set of vertical
//! dimensions, `r` dimensions in total. There are `n` choices for the
//! horizontal and `C(n-1, r-1)` choices for the verticals, so
//! `view_count(n, r) = n * C(n-1, r-1)` and summing over `r` gives
//! `n * 2^(n-1)`.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::olap::PivotConfig;

/// Largest `n` for which every count here fits in a `u64`.
pub const MAX_DIMENSIONS: u64 = 20;

/// Largest dimension list the exhaustive oracle accepts.
pub const MAX_BRUTE_FORCE_DIMENSIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("{0}")]
    OutOfRange(String),
    #[error("duplicate dimension `{0}`")]
    DuplicateDimension(String),
}

pub fn factorial(n: u64) -> Result<u64, CountError> {
    if n > MAX_DIMENSIONS {
        return Err(CountError::OutOfRange(format!(
            "factorial is exact only for n <= {MAX_DIMENSIONS}, got {n}"
        )));
    }
    Ok((1..=n).product())
}

/// Binomial coefficient, computed multiplicatively. `r > n` yields 0.
///
/// Fails only if the result does not fit in a `u64`.
pub fn choose(n: u64, r: u64) -> Result<u64, CountError> {
    if r > n {
        return Ok(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc
            .checked_mul(u128::from(n - i))
            .ok_or_else(|| too_large(n, r))?
            / u128::from(i + 1);
    }
    u64::try_from(acc).map_err(|_| too_large(n, r))
}

fn too_large(n: u64, r: u64) -> CountError {
    CountError::OutOfRange(format!("C({n}, {r}) does not fit in 64 bits"))
}

fn check_n(n: u64) -> Result<(), CountError> {
    if n == 0 || n > MAX_DIMENSIONS {
        return Err(CountError::OutOfRange(format!(
            "dimension count must be in 1..={MAX_DIMENSIONS}, got {n}"
        )));
    }
    Ok(())
}

fn check_r(n: u64, r: u64) -> Result<(), CountError> {
    if r == 0 || r > n {
        return Err(CountError::OutOfRange(format!(
            "r must be in 1..={n}, got {r}"
        )));
    }
    Ok(())
}

/// Number of distinct views using exactly `r` of `n` dimensions.
pub fn view_count(n: u64, r: u64) -> Result<u64, CountError> {
    check_n(n)?;
    check_r(n, r)?;
    Ok(n * choose(n - 1, r - 1)?)
}

/// View counts for every `r` of an `n`-dimensional cube.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViewCount {
    pub n: u64,
    /// `per_r[i]` is the count for `r = i + 1`.
    pub per_r: Vec<u64>,
    pub total: u64,
    /// Views sharing one fixed horizontal dimension.
    pub per_horizontal: u64,
}

impl ViewCount {
    pub fn for_r(&self, r: u64) -> Option<u64> {
        r.checked_sub(1)
            .and_then(|i| self.per_r.get(i as usize).copied())
    }

    /// Counts at `r = 1` and `r = n`; both equal `n`.
    pub fn min_max(&self) -> (u64, u64) {
        (self.per_r[0], self.per_r[self.per_r.len() - 1])
    }
}

pub fn total_view_count(n: u64) -> Result<ViewCount, CountError> {
    check_n(n)?;
    let per_r = (1..=n)
        .map(|r| view_count(n, r))
        .collect::<Result<Vec<_>, _>>()?;
    let total: u64 = per_r.iter().sum();
    Ok(ViewCount {
        n,
        per_horizontal: total / n,
        per_r,
        total,
    })
}

fn check_distinct<S: AsRef<str>>(dims: &[S]) -> Result<(), CountError> {
    let mut seen = HashSet::new();
    for d in dims {
        if !seen.insert(d.as_ref()) {
            return Err(CountError::DuplicateDimension(d.as_ref().to_owned()));
        }
    }
    Ok(())
}

/// Every canonical view with `r` dimensions, ordered by horizontal and then
/// by vertical list.
pub fn enumerate_views<S: AsRef<str>>(
    dims: &[S],
    r: usize,
) -> Result<Vec<PivotConfig>, CountError> {
    check_n(dims.len() as u64)?;
    check_r(dims.len() as u64, r as u64)?;
    check_distinct(dims)?;

    let mut sorted: Vec<&str> = dims.iter().map(AsRef::as_ref).collect();
    sorted.sort_unstable();

    let mut views = Vec::new();
    for (h, horizontal) in sorted.iter().enumerate() {
        let rest: Vec<&str> = sorted
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != h)
            .map(|(_, d)| *d)
            .collect();
        for_each_combination(&rest, r - 1, &mut |verticals| {
            let config = PivotConfig::new(*horizontal, verticals.iter().copied())
                .expect("dimensions are distinct and non-empty");
            views.push(config);
        });
    }
    Ok(views)
}

/// Calls `f` with every `k`-subset of `items`, in lexicographic order of
/// positions.
fn for_each_combination<'a>(items: &[&'a str], k: usize, f: &mut impl FnMut(&[&'a str])) {
    fn go<'a>(
        items: &[&'a str],
        k: usize,
        start: usize,
        picked: &mut Vec<&'a str>,
        f: &mut impl FnMut(&[&'a str]),
    ) {
        if picked.len() == k {
            f(picked);
            return;
        }
        let needed = k - picked.len();
        for i in start..=items.len() - needed {
            picked.push(items[i]);
            go(items, k, i + 1, picked, f);
            picked.pop();
        }
    }
    go(items, k, 0, &mut Vec::with_capacity(k), f);
}

/// Exhaustive count: generate every ordered sequence of `r` distinct
/// dimensions, treat the first as horizontal and the rest as an unordered
/// set, and count the distinct results.
pub fn brute_force_count<S: AsRef<str>>(dims: &[S], r: usize) -> Result<u64, CountError> {
    if dims.is_empty() || dims.len() > MAX_BRUTE_FORCE_DIMENSIONS {
        return Err(CountError::OutOfRange(format!(
            "exhaustive count supports 1..={MAX_BRUTE_FORCE_DIMENSIONS} dimensions, got {}",
            dims.len()
        )));
    }
    check_r(dims.len() as u64, r as u64)?;
    check_distinct(dims)?;

    let names: Vec<&str> = dims.iter().map(AsRef::as_ref).collect();
    let mut distinct: HashSet<(&str, BTreeSet<&str>)> = HashSet::new();
    let mut used = vec![false; names.len()];
    let mut sequence = Vec::with_capacity(r);
    permute(&names, r, &mut used, &mut sequence, &mut |seq| {
        distinct.insert((seq[0], seq[1..].iter().copied().collect()));
    });
    Ok(distinct.len() as u64)
}

/// Number of ordered sequences the oracle walks for `(|dims|, r)`.
pub fn ordered_sequence_count(n: u64, r: u64) -> u64 {
    (n - r + 1..=n).product()
}

fn permute<'a>(
    names: &[&'a str],
    r: usize,
    used: &mut [bool],
    sequence: &mut Vec<&'a str>,
    visit: &mut impl FnMut(&[&'a str]),
) {
    if sequence.len() == r {
        visit(sequence);
        return;
    }
    for i in 0..names.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        sequence.push(names[i]);
        permute(names, r, used, sequence, visit);
        sequence.pop();
        used[i] = false;
    }
}

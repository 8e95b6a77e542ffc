//! Balanced interleaving of two rankings and click attribution.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// Which input lists contain an interleaved item.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    A,
    B,
    Both,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleavedList<T> {
    pub items: Vec<T>,
    pub origin: Vec<Origin>,
    /// The list whose pointer advanced to contribute each item.
    pub picked_by: Vec<Side>,
    pub first_picker: Side,
}

fn check_unique<T: Eq + Hash>(list: &[T], side: Side) -> Result<(), EvalError> {
    let mut seen = HashSet::with_capacity(list.len());
    if list.iter().all(|x| seen.insert(x)) {
        Ok(())
    } else {
        Err(EvalError::DuplicateItems(side))
    }
}

/// Balanced interleaving with a fair coin for the first pick.
pub fn balanced_interleave<T, R>(
    a: &[T],
    b: &[T],
    display_size: Option<usize>,
    rng: &mut R,
) -> Result<InterleavedList<T>, EvalError>
where
    T: Clone + Eq + Hash,
    R: Rng + ?Sized,
{
    let first = if rng.random::<bool>() {
        Side::A
    } else {
        Side::B
    };
    balanced_interleave_from(a, b, first, display_size)
}

/// Balanced interleaving with a fixed first picker.
///
/// Pointers `ka` and `kb` walk the two lists; the list that is behind
/// (`first` on ties) contributes its next item unless already shown. The
/// output stops at `2 * min(|a|, |b|)` items, capped at `display_size`, or
/// when both lists are exhausted.
pub fn balanced_interleave_from<T>(
    a: &[T],
    b: &[T],
    first: Side,
    display_size: Option<usize>,
) -> Result<InterleavedList<T>, EvalError>
where
    T: Clone + Eq + Hash,
{
    check_unique(a, Side::A)?;
    check_unique(b, Side::B)?;
    let mut target = 2 * a.len().min(b.len());
    if let Some(cap) = display_size {
        target = target.min(cap);
    }
    let in_a: HashSet<&T> = a.iter().collect();
    let in_b: HashSet<&T> = b.iter().collect();
    let mut shown: HashSet<T> = HashSet::new();
    let mut out = InterleavedList {
        items: Vec::new(),
        origin: Vec::new(),
        picked_by: Vec::new(),
        first_picker: first,
    };
    let (mut ka, mut kb) = (0, 0);
    while out.items.len() < target && (ka < a.len() || kb < b.len()) {
        let a_turn = ka < kb || (ka == kb && first == Side::A);
        let side = match (a_turn, ka < a.len(), kb < b.len()) {
            (true, true, _) | (false, true, false) => Side::A,
            _ => Side::B,
        };
        let item = match side {
            Side::A => {
                ka += 1;
                &a[ka - 1]
            }
            Side::B => {
                kb += 1;
                &b[kb - 1]
            }
        };
        if shown.insert(item.clone()) {
            out.origin
                .push(match (in_a.contains(item), in_b.contains(item)) {
                    (true, true) => Origin::Both,
                    (true, false) => Origin::A,
                    _ => Origin::B,
                });
            out.items.push(item.clone());
            out.picked_by.push(side);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AWins,
    BWins,
    Tie,
}

/// Credit computation trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribution {
    /// 1-based interleaved rank of the lowest clicked item (0 without clicks).
    pub lowest_click_rank: usize,
    /// Prefix length examined in both inputs.
    pub k: usize,
    pub credit_a: usize,
    pub credit_b: usize,
    pub verdict: Verdict,
}

/// Attributes clicks on `il` to the input rankings.
///
/// With `ℓ` the rank of the lowest click, `k` is the smallest prefix length
/// such that the top `k` of `a` and the top `k` of `b` together cover the
/// first `ℓ` interleaved items. Each side is credited with the clicked
/// items in its top `k`; the larger credit wins.
pub fn attribute_clicks<T>(
    il: &InterleavedList<T>,
    a: &[T],
    b: &[T],
    clicks: &[T],
) -> Result<Attribution, EvalError>
where
    T: Eq + Hash,
{
    let pos: HashMap<&T, usize> = il.items.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let mut lowest = 0;
    let mut clicked: HashSet<&T> = HashSet::new();
    for (ci, c) in clicks.iter().enumerate() {
        let &p = pos.get(c).ok_or(EvalError::UnknownClick(ci))?;
        lowest = lowest.max(p + 1);
        clicked.insert(c);
    }
    if clicked.is_empty() {
        return Ok(Attribution {
            lowest_click_rank: 0,
            k: 0,
            credit_a: 0,
            credit_b: 0,
            verdict: Verdict::Tie,
        });
    }
    let rank_a: HashMap<&T, usize> = a.iter().enumerate().map(|(i, x)| (x, i + 1)).collect();
    let rank_b: HashMap<&T, usize> = b.iter().enumerate().map(|(i, x)| (x, i + 1)).collect();
    let mut k = 0;
    for (i, item) in il.items[..lowest].iter().enumerate() {
        let need = match (rank_a.get(item), rank_b.get(item)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) | (None, Some(&x)) => x,
            (None, None) => return Err(EvalError::ForeignItem(i + 1)),
        };
        k = k.max(need);
    }
    let credit = |list: &[T]| list.iter().take(k).filter(|x| clicked.contains(x)).count();
    let (credit_a, credit_b) = (credit(a), credit(b));
    let verdict = match credit_a.cmp(&credit_b) {
        std::cmp::Ordering::Greater => Verdict::AWins,
        std::cmp::Ordering::Less => Verdict::BWins,
        std::cmp::Ordering::Equal => Verdict::Tie,
    };
    Ok(Attribution {
        lowest_click_rank: lowest,
        k,
        credit_a,
        credit_b,
        verdict,
    })
}

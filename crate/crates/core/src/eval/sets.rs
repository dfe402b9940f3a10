//! Sets that are described rather than stored: intervals, function and
//! relation spaces, power sets. Membership and cardinality are answered from
//! the description; elements are produced on demand.

use std::collections::BTreeSet;

use super::value::Value;

/// Largest set the evaluator will build explicitly.
pub const ENUMERATION_CAP: u128 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    /// `S <-> T`
    Relations,
    /// `S +-> T`
    Partial,
    /// `S --> T`
    Total,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LazySet {
    /// `lo..hi`; empty when `lo > hi`.
    Interval(i64, i64),
    Space {
        kind: SpaceKind,
        dom: Vec<Value>,
        codom: Vec<Value>,
    },
    PowerSet(Vec<Value>),
}

impl LazySet {
    pub fn space(kind: SpaceKind, dom: BTreeSet<Value>, codom: BTreeSet<Value>) -> Self {
        LazySet::Space {
            kind,
            dom: dom.into_iter().collect(),
            codom: codom.into_iter().collect(),
        }
    }

    pub fn power_set(base: BTreeSet<Value>) -> Self {
        LazySet::PowerSet(base.into_iter().collect())
    }

    /// Number of elements; `None` when it does not fit in 128 bits.
    pub fn card(&self) -> Option<u128> {
        match self {
            LazySet::Interval(lo, hi) => {
                Some(if lo > hi { 0 } else { (*hi as i128 - *lo as i128 + 1) as u128 })
            }
            LazySet::Space { kind, dom, codom } => {
                let n = u32::try_from(dom.len()).ok()?;
                let m = codom.len() as u128;
                match kind {
                    SpaceKind::Total => m.checked_pow(n),
                    SpaceKind::Partial => (m + 1).checked_pow(n),
                    SpaceKind::Relations => {
                        let bits = u32::try_from(dom.len().checked_mul(codom.len())?).ok()?;
                        2u128.checked_pow(bits)
                    }
                }
            }
            LazySet::PowerSet(base) => 2u128.checked_pow(u32::try_from(base.len()).ok()?),
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        match self {
            LazySet::Interval(lo, hi) => matches!(v, Value::Int(n) if lo <= n && n <= hi),
            LazySet::PowerSet(base) => match v {
                Value::Set(items) => items.iter().all(|x| base.binary_search(x).is_ok()),
                _ => false,
            },
            LazySet::Space { kind, dom, codom } => {
                let Value::Set(items) = v else { return false };
                let mut firsts = 0usize;
                let mut last_first: Option<&Value> = None;
                for item in items {
                    let Value::Pair(a, b) = item else { return false };
                    if dom.binary_search(a).is_err() || codom.binary_search(b).is_err() {
                        return false;
                    }
                    if last_first != Some(&**a) {
                        firsts += 1;
                        last_first = Some(a);
                    } else if *kind != SpaceKind::Relations {
                        // pairs are ordered, so a repeated first component is adjacent
                        return false;
                    }
                }
                match kind {
                    SpaceKind::Total => firsts == dom.len(),
                    _ => true,
                }
            }
        }
    }

    /// Same description, hence the same set.
    pub fn same_description(&self, other: &LazySet) -> bool {
        match (self, other) {
            (LazySet::Interval(a, b), LazySet::Interval(c, d)) => (a > b && c > d) || (a == c && b == d),
            _ => self == other,
        }
    }

    /// Lazily enumerates the elements, ascending or in reverse.
    pub fn elements(&self, reverse: bool) -> Box<dyn Iterator<Item = Value>> {
        match self {
            LazySet::Interval(lo, hi) => {
                let (lo, hi) = (*lo, *hi);
                if reverse {
                    Box::new((lo..=hi).rev().map(Value::Int))
                } else {
                    Box::new((lo..=hi).map(Value::Int))
                }
            }
            LazySet::PowerSet(base) => {
                let base = base.clone();
                Box::new(
                    Odometer::new(2, base.len(), reverse).map(move |digits| {
                        Value::Set(
                            digits
                                .iter()
                                .zip(&base)
                                .filter(|(d, _)| **d == 1)
                                .map(|(_, v)| v.clone())
                                .collect(),
                        )
                    }),
                )
            }
            LazySet::Space { kind, dom, codom } => {
                let (dom, codom) = (dom.clone(), codom.clone());
                match kind {
                    SpaceKind::Total | SpaceKind::Partial => {
                        let radix = codom.len() + usize::from(*kind == SpaceKind::Partial);
                        Box::new(Odometer::new(radix, dom.len(), reverse).map(move |digits| {
                            Value::Set(
                                digits
                                    .iter()
                                    .zip(&dom)
                                    .filter_map(|(d, a)| {
                                        codom.get(*d).map(|b| Value::pair(a.clone(), b.clone()))
                                    })
                                    .collect(),
                            )
                        }))
                    }
                    SpaceKind::Relations => {
                        let pairs: Vec<Value> = dom
                            .iter()
                            .flat_map(|a| codom.iter().map(move |b| Value::pair(a.clone(), b.clone())))
                            .collect();
                        Box::new(Odometer::new(2, pairs.len(), reverse).map(move |digits| {
                            Value::Set(
                                digits
                                    .iter()
                                    .zip(&pairs)
                                    .filter(|(d, _)| **d == 1)
                                    .map(|(_, p)| p.clone())
                                    .collect(),
                            )
                        }))
                    }
                }
            }
        }
    }
}

/// Counts through all digit vectors of a fixed length in a fixed radix.
struct Odometer {
    radix: usize,
    digits: Vec<usize>,
    reverse: bool,
    done: bool,
}

impl Odometer {
    fn new(radix: usize, len: usize, reverse: bool) -> Self {
        let start = if reverse { radix.saturating_sub(1) } else { 0 };
        Odometer {
            radix,
            digits: vec![start; len],
            reverse,
            done: radix == 0 && len > 0,
        }
    }
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let current = self.digits.clone();
        // advance the least significant digit (the last one)
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.reverse {
                if self.digits[i] > 0 {
                    self.digits[i] -= 1;
                    break;
                }
                self.digits[i] = self.radix - 1;
            } else {
                if self.digits[i] + 1 < self.radix {
                    self.digits[i] += 1;
                    break;
                }
                self.digits[i] = 0;
            }
        }
        Some(current)
    }
}

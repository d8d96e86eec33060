use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest item count a bundle can address.
pub const MAX_BUNDLE_ITEMS: usize = 32;

/// A set of items stored as a bitmask (bit `j` is item `j`, 0-based).
///
/// Ordering is lexicographic on the sorted item lists, so `{1} < {1,2} <
/// {1,3} < {2}` and the empty bundle sorts first. Display and serde use
/// 1-based item numbers.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Bundle(u32);

impl Bundle {
    pub const EMPTY: Bundle = Bundle(0);

    pub fn from_mask(mask: u32) -> Self {
        Bundle(mask)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    /// All items `0..k`.
    pub fn full(k: usize) -> Self {
        assert!(k <= MAX_BUNDLE_ITEMS);
        if k == MAX_BUNDLE_ITEMS {
            Bundle(u32::MAX)
        } else {
            Bundle((1u32 << k) - 1)
        }
    }

    pub fn singleton(item: usize) -> Self {
        Bundle(1u32 << item)
    }

    /// From 0-based item indices.
    pub fn from_items(items: impl IntoIterator<Item = usize>) -> Self {
        Bundle(items.into_iter().fold(0, |m, i| m | (1u32 << i)))
    }

    /// From 1-based item numbers; `None` on 0 or out-of-range entries.
    pub fn from_one_based(items: &[usize]) -> Option<Self> {
        items.iter().try_fold(Bundle::EMPTY, |b, &i| {
            (1..=MAX_BUNDLE_ITEMS).contains(&i).then(|| b.with(i - 1))
        })
    }

    pub fn contains(self, item: usize) -> bool {
        item < MAX_BUNDLE_ITEMS && self.0 & (1u32 << item) != 0
    }

    pub fn with(self, item: usize) -> Self {
        Bundle(self.0 | (1u32 << item))
    }

    pub fn without(self, item: usize) -> Self {
        Bundle(self.0 & !(1u32 << item))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Bundle) -> Self {
        Bundle(self.0 | other.0)
    }

    pub fn intersection(self, other: Bundle) -> Self {
        Bundle(self.0 & other.0)
    }

    pub fn difference(self, other: Bundle) -> Self {
        Bundle(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: Bundle) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Bundle) -> bool {
        self.0 & other.0 == 0
    }

    /// Largest item index plus one (0 for the empty bundle).
    pub fn span(self) -> usize {
        (32 - self.0.leading_zeros()) as usize
    }

    /// 0-based items in increasing order.
    pub fn items(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            (m != 0).then(|| {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                i
            })
        })
    }

    /// 1-based item numbers in increasing order.
    pub fn to_one_based(self) -> Vec<usize> {
        self.items().map(|i| i + 1).collect()
    }

    /// Every subset of the first `k` items, by increasing mask.
    pub fn all(k: usize) -> impl Iterator<Item = Bundle> {
        assert!(k < MAX_BUNDLE_ITEMS);
        (0..1u32 << k).map(Bundle)
    }
}

impl Ord for Bundle {
    fn cmp(&self, other: &Self) -> Ordering {
        let (mut a, mut b) = (self.0, other.0);
        loop {
            match (a == 0, b == 0) {
                (true, true) => return Ordering::Equal,
                (true, false) => return Ordering::Less,
                (false, true) => return Ordering::Greater,
                _ => {}
            }
            let (x, y) = (a.trailing_zeros(), b.trailing_zeros());
            if x != y {
                return x.cmp(&y);
            }
            a &= a - 1;
            b &= b - 1;
        }
    }
}

impl PartialOrd for Bundle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.items().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Bundle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bundle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let items = Vec::<usize>::deserialize(d)?;
        Bundle::from_one_based(&items).ok_or_else(|| serde::de::Error::custom("item numbers must be in 1..=32"))
    }
}

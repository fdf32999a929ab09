use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Finitely supported nonnegative vector with exact rational entries.
/// Zero entries are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct L1Vector<I: Ord> {
    entries: BTreeMap<I, BigRational>,
}

impl<I: Ord> Default for L1Vector<I> {
    fn default() -> Self {
        L1Vector { entries: BTreeMap::new() }
    }
}

impl<I: Ord + Copy> L1Vector<I> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Point mass at `idx`.
    pub fn delta(idx: I) -> Self {
        let mut v = Self::new();
        v.add_mass(idx, BigRational::from_integer(BigInt::from(1)));
        v
    }

    /// Adds nonnegative `amount` at `idx`.
    pub fn add_mass(&mut self, idx: I, amount: BigRational) {
        assert!(!amount.is_negative(), "L1Vector entries are nonnegative");
        if amount.is_zero() {
            return;
        }
        *self.entries.entry(idx).or_insert_with(BigRational::zero) += amount;
    }

    pub fn get(&self, idx: I) -> Option<&BigRational> {
        self.entries.get(&idx)
    }

    pub fn iter(&self) -> impl Iterator<Item = (I, &BigRational)> {
        self.entries.iter().map(|(&i, v)| (i, v))
    }

    pub fn support(&self) -> impl Iterator<Item = I> + '_ {
        self.entries.keys().copied()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn mass(&self) -> BigRational {
        self.entries.values().fold(BigRational::zero(), |acc, v| acc + v)
    }

    /// `Σ |u(i) − v(i)|` over the union of supports.
    pub fn l1_distance(&self, other: &Self) -> BigRational {
        let mut total = BigRational::zero();
        for (i, a) in &self.entries {
            match other.entries.get(i) {
                Some(b) => total += (a - b).abs(),
                None => total += a,
            }
        }
        for (i, b) in &other.entries {
            if !self.entries.contains_key(i) {
                total += b;
            }
        }
        total
    }

    /// Image under the index map `f`; masses landing on the same index add up.
    pub fn pushforward<J: Ord + Copy>(&self, f: impl Fn(I) -> J) -> L1Vector<J> {
        let mut out = L1Vector::new();
        for (i, v) in &self.entries {
            out.add_mass(f(*i), v.clone());
        }
        out
    }
}

/// Uniform probability measure on a nonempty index set.
pub fn uniform<I: Ord + Copy>(set: &[I]) -> Option<L1Vector<I>> {
    if set.is_empty() {
        return None;
    }
    let weight = BigRational::new(BigInt::from(1), BigInt::from(set.len()));
    let mut v = L1Vector::new();
    for &i in set {
        v.entries.insert(i, weight.clone());
    }
    // duplicates in `set` would break normalization
    debug_assert_eq!(v.entries.len(), set.len());
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn distance_examples() {
        let u = uniform(&[1u32, 2]).unwrap();
        assert_eq!(u.l1_distance(&u), q(0, 1));
        let v = uniform(&[2u32, 3]).unwrap();
        assert_eq!(u.l1_distance(&v), q(1, 1));
        let a = uniform(&[0u32]).unwrap();
        let abcd = uniform(&[0u32, 1, 2, 3]).unwrap();
        assert_eq!(a.l1_distance(&abcd), q(3, 2));
    }

    #[test]
    fn uniform_has_unit_mass() {
        let v = uniform(&[4u32, 7, 9]).unwrap();
        assert_eq!(v.mass(), q(1, 1));
        assert_eq!(v.get(7), Some(&q(1, 3)));
        assert!(uniform::<u32>(&[]).is_none());
        assert_eq!(uniform(&[5u32]).unwrap(), L1Vector::delta(5));
    }

    #[test]
    fn pushforward_merges_collisions() {
        let v = uniform(&[0u32, 1]).unwrap();
        let merged = v.pushforward(|_| 'p');
        assert_eq!(merged, L1Vector::delta('p'));
        assert_eq!(merged.support_len(), 1);
    }

    #[test]
    fn zero_mass_is_not_stored() {
        let mut v = L1Vector::new();
        v.add_mass(3u32, q(0, 5));
        assert_eq!(v.support_len(), 0);
    }
}

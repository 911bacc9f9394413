//! Permutations of `[n]` with parity.
//!
//! Images are stored zero-based; `Display` prints the one-based one-line
//! notation `σ(1) σ(2) … σ(n)`.

use std::fmt;

use crate::error::{Error, Result};

/// A sign `±1`. Multiplication is the group law of `{+1, −1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity(odd: bool) -> Sign {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn is_odd(self) -> bool {
        self == Sign::Minus
    }

    pub fn to_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_parity(self.is_odd() ^ rhs.is_odd())
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        Sign::from_parity(!self.is_odd())
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// A bijection of `{0, …, n−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u8>,
}

impl Permutation {
    /// Validates `images` as a bijection of `0..images.len()`.
    pub fn new(images: Vec<u8>) -> Result<Self> {
        let n = images.len();
        if n > u8::MAX as usize {
            return Err(Error::validation(format!("permutation length {n} exceeds 255")));
        }
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(Error::validation(format!(
                    "images {images:?} do not form a bijection of [{n}]"
                )));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    /// Builds a permutation from one-based images, as written in the
    /// one-line notation.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        let zero_based = images
            .iter()
            .map(|&x| {
                if x == 0 || x > u8::MAX as usize {
                    Err(Error::validation(format!("one-based image {x} out of range")))
                } else {
                    Ok((x - 1) as u8)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(zero_based)
    }

    pub(crate) fn from_images_unchecked(images: Vec<u8>) -> Self {
        debug_assert!(Permutation::new(images.clone()).is_ok());
        Permutation { images }
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n as u8).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[u8] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    /// Parity via cycle decomposition: a cycle of length `k` contributes
    /// `k − 1` transpositions.
    pub fn sign(&self) -> Sign {
        let n = self.images.len();
        let mut visited = vec![false; n];
        let mut odd = false;
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut len = 0usize;
            let mut i = start;
            while !visited[i] {
                visited[i] = true;
                i = self.images[i] as usize;
                len += 1;
            }
            odd ^= len % 2 == 0;
        }
        Sign::from_parity(odd)
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::validation(format!(
                "cannot compose permutations of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Permutation {
            images: other.images.iter().map(|&i| self.images[i as usize]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u8; self.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u8;
        }
        Permutation { images: inv }
    }

    /// All permutations of `[n]` in lexicographic order of their images.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut current: Vec<u8> = (0..n as u8).collect();
        let mut out = vec![Permutation {
            images: current.clone(),
        }];
        while next_permutation(&mut current) {
            out.push(Permutation {
                images: current.clone(),
            });
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, x) in self.images.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", *x as usize + 1)?;
        }
        f.write_str("]")
    }
}

/// Advances `v` to the next lexicographically greater arrangement, skipping
/// duplicates. Returns `false` (leaving `v` sorted descending) at the end.
pub fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Every distinct arrangement of a multiset, in lexicographic order.
pub fn distinct_arrangements<T: Ord + Clone>(items: &[T]) -> Vec<Vec<T>> {
    let mut current = items.to_vec();
    current.sort();
    let mut out = vec![current.clone()];
    while next_permutation(&mut current) {
        out.push(current.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sign_examples() {
        assert_eq!(Permutation::identity(4).sign(), Sign::Plus);
        assert_eq!(Permutation::from_one_based(&[2, 1]).unwrap().sign(), Sign::Minus);
        // 1→2→3→1
        assert_eq!(Permutation::from_one_based(&[2, 3, 1]).unwrap().sign(), Sign::Plus);
    }

    #[test]
    fn malformed_images_rejected() {
        assert!(matches!(Permutation::new(vec![0, 0]), Err(Error::Validation(_))));
        assert!(matches!(Permutation::new(vec![0, 2]), Err(Error::Validation(_))));
        assert!(Permutation::from_one_based(&[0, 1]).is_err());
    }

    #[test]
    fn all_is_lexicographic_and_complete() {
        let perms = Permutation::all(4);
        assert_eq!(perms.len(), 24);
        assert!(perms.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(perms.iter().filter(|p| p.sign() == Sign::Plus).count(), 12);
    }

    #[test]
    fn arrangements_of_multiset() {
        let a = distinct_arrangements(&[1, 0, 1]);
        assert_eq!(a, vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
    }

    #[test]
    fn display_is_one_based() {
        assert_eq!(Permutation::from_one_based(&[2, 3, 1]).unwrap().to_string(), "[2 3 1]");
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = Permutation> {
        Just((0..n as u8).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::new(v).unwrap())
    }

    fn arb_pair() -> impl Strategy<Value = (Permutation, Permutation)> {
        (1usize..=8).prop_flat_map(|n| (arb_perm(n), arb_perm(n)))
    }

    proptest! {
        #[test]
        fn sign_is_multiplicative((p, q) in arb_pair()) {
            let pq = p.compose(&q).unwrap();
            prop_assert_eq!(pq.sign(), p.sign() * q.sign());
        }

        #[test]
        fn inverse_has_same_sign(p in (1usize..=8).prop_flat_map(arb_perm)) {
            prop_assert_eq!(p.inverse().sign(), p.sign());
            prop_assert_eq!(p.compose(&p.inverse()).unwrap(), Permutation::identity(p.len()));
        }
    }
}

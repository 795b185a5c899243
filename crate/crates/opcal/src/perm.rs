//! Permutations, Koszul signs, shuffles, and the blocked compositions.
//!
//! Everything is 1-based: a permutation stores the images `sigma(1..=n)`,
//! matching the operad formulas verbatim. Signs are never cached inside
//! permutations — the same permutation acts on spaces of different parities,
//! so every sign is computed from an explicit parity vector at the call site.

use crate::error::{Error, Result};
use itertools::Itertools;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    /// Sum of parities mod 2.
    pub fn plus(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// (-1)^(p(a)p(b)) as +-1.
    pub fn pair_sign(a: Parity, b: Parity) -> i8 {
        if a.is_odd() && b.is_odd() {
            -1
        } else {
            1
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

/// Sum a list of parities mod 2.
pub fn parity_sum<I: IntoIterator<Item = Parity>>(it: I) -> Parity {
    it.into_iter().fold(Parity::Even, Parity::plus)
}

/// A permutation of `{1, ..., n}`, stored as the image list `sigma(i)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (1..=n).collect() }
    }

    /// Build from 1-based images, checking bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x < 1 || x > n || seen[x - 1] {
                return Err(Error::Parse(format!("{images:?} is not a permutation")));
            }
            seen[x - 1] = true;
        }
        Ok(Permutation { images })
    }

    /// The transposition (i j) in S_n.
    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut images: Vec<usize> = (1..=n).collect();
        images.swap(i - 1, j - 1);
        Permutation { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(k, &x)| x == k + 1)
    }

    /// sigma(i), 1-based.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.images.len()];
        for (k, &x) in self.images.iter().enumerate() {
            images[x - 1] = k + 1;
        }
        Permutation { images }
    }

    /// Function composition: `(self * other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "composable permutations");
        Permutation {
            images: (1..=self.len()).map(|i| self.apply(other.apply(i))).collect(),
        }
    }

    /// All permutations of S_n in a deterministic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        (1..=n)
            .permutations(n)
            .map(|images| Permutation { images })
            .collect()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, x) in self.images.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

/// Koszul sign of `sigma` acting on a tensor of the given parities:
/// the product of `(-1)^(p_i p_j)` over inversions `i < j`, `sigma(i) > sigma(j)`.
pub fn koszul_sign(sigma: &Permutation, parities: &[Parity]) -> Result<i8> {
    if sigma.len() != parities.len() {
        return Err(Error::LengthMismatch { expected: sigma.len(), found: parities.len() });
    }
    let mut sign = 1i8;
    for i in 1..=sigma.len() {
        for j in (i + 1)..=sigma.len() {
            if sigma.apply(i) > sigma.apply(j) {
                sign *= Parity::pair_sign(parities[i - 1], parities[j - 1]);
            }
        }
    }
    Ok(sign)
}

/// The tensor action of `sigma`: returns the Koszul sign and the list
/// `[items[sigma^-1(1)], ..., items[sigma^-1(n)]]`.
pub fn permute_slots<T: Clone>(
    sigma: &Permutation,
    items: &[T],
    parities: &[Parity],
) -> Result<(i8, Vec<T>)> {
    if sigma.len() != items.len() {
        return Err(Error::LengthMismatch { expected: sigma.len(), found: items.len() });
    }
    let sign = koszul_sign(sigma, parities)?;
    let inv = sigma.inverse();
    let permuted = (1..=items.len()).map(|k| items[inv.apply(k) - 1].clone()).collect();
    Ok((sign, permuted))
}

/// All `(m, n)`-shuffles: permutations of `S_{m+n}` increasing on the first
/// `m` and on the last `n` positions. Empty if `m` or `n` is negative;
/// `{id}` if either is zero.
pub fn enumerate_shuffles(m: i64, n: i64) -> Vec<Permutation> {
    if m < 0 || n < 0 {
        return Vec::new();
    }
    let (m, n) = (m as usize, n as usize);
    let total = m + n;
    let mut out = Vec::new();
    for first_images in (1..=total).combinations(m) {
        let mut images = vec![0; total];
        let mut in_first = vec![false; total];
        for (k, &x) in first_images.iter().enumerate() {
            images[k] = x;
            in_first[x - 1] = true;
        }
        let rest: Vec<usize> = (1..=total).filter(|&x| !in_first[x - 1]).collect();
        for (k, &x) in rest.iter().enumerate() {
            images[m + k] = x;
        }
        out.push(Permutation { images });
    }
    out
}

/// The blocked composition `sigma(tau_1, ..., tau_n)`: apply each `tau_b`
/// inside its block, then permute the blocks by `sigma`.
pub fn compose_block(sigma: &Permutation, taus: &[Permutation]) -> Result<Permutation> {
    let n = sigma.len();
    if taus.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: taus.len() });
    }
    let sizes: Vec<usize> = taus.iter().map(|t| t.len()).collect();
    let total: usize = sizes.iter().sum();
    // Flattened start offset of the target position each block lands at.
    let mut start = vec![0usize; n];
    for b in 1..=n {
        let target = sigma.apply(b);
        let offset: usize = (1..=n).filter(|&c| sigma.apply(c) < target).map(|c| sizes[c - 1]).sum();
        start[b - 1] = offset;
    }
    let mut images = vec![0; total];
    let mut src = 0usize;
    for b in 1..=n {
        for k in 1..=sizes[b - 1] {
            images[src] = start[b - 1] + taus[b - 1].apply(k);
            src += 1;
        }
    }
    Ok(Permutation { images })
}

/// The insertion composition `sigma o_i tau` in `S_{m+n-1}`: `tau` acts on
/// the `m` slots starting at `i`, then `sigma` acts on the `n` blocks.
pub fn compose_insert(sigma: &Permutation, i: usize, tau: &Permutation) -> Result<Permutation> {
    let n = sigma.len();
    if i < 1 || i > n {
        return Err(Error::IndexOutOfRange { index: i, arity: n });
    }
    let taus: Vec<Permutation> = (1..=n)
        .map(|b| if b == i { tau.clone() } else { Permutation::identity(1) })
        .collect();
    compose_block(sigma, &taus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(images: &[usize]) -> Permutation {
        Permutation::from_images(images.to_vec()).unwrap()
    }

    #[test]
    fn koszul_identity_is_plus_one() {
        let id = Permutation::identity(3);
        for p in [Parity::Even, Parity::Odd] {
            assert_eq!(koszul_sign(&id, &[p, p, p]).unwrap(), 1);
        }
    }

    #[test]
    fn koszul_swap_of_two_odds() {
        let swap = perm(&[2, 1]);
        assert_eq!(koszul_sign(&swap, &[Parity::Odd, Parity::Odd]).unwrap(), -1);
        assert_eq!(koszul_sign(&swap, &[Parity::Odd, Parity::Even]).unwrap(), 1);
    }

    #[test]
    fn koszul_cycle_with_one_even_slot() {
        // 1->2, 2->3, 3->1: inversions (1,3) and (2,3) both touch the even slot.
        let cycle = perm(&[2, 3, 1]);
        assert_eq!(
            koszul_sign(&cycle, &[Parity::Odd, Parity::Odd, Parity::Even]).unwrap(),
            1
        );
    }

    #[test]
    fn permute_slots_examples() {
        let id = Permutation::identity(2);
        let (s, v) = permute_slots(&id, &["a", "b"], &[Parity::Odd, Parity::Odd]).unwrap();
        assert_eq!((s, v), (1, vec!["a", "b"]));

        let swap = perm(&[2, 1]);
        let (s, v) = permute_slots(&swap, &["a", "b"], &[Parity::Odd, Parity::Odd]).unwrap();
        assert_eq!((s, v), (-1, vec!["b", "a"]));
    }

    #[test]
    fn tensor_action_composition_law() {
        // Acting by sigma then tau equals acting by tau*sigma, including signs,
        // brute-forced over S_3 and all parity vectors.
        let items = ["x", "y", "z"];
        for sigma in Permutation::all(3) {
            for tau in Permutation::all(3) {
                for bits in 0..8u8 {
                    let ps: Vec<Parity> = (0..3)
                        .map(|k| if bits >> k & 1 == 1 { Parity::Odd } else { Parity::Even })
                        .collect();
                    let (s1, v1) = permute_slots(&sigma, &items, &ps).unwrap();
                    let ps1: Vec<Parity> = {
                        let (_, permuted) = permute_slots(
                            &sigma,
                            &ps.iter().copied().collect::<Vec<_>>(),
                            &ps,
                        )
                        .unwrap();
                        permuted
                    };
                    let (s2, v2) = permute_slots(&tau, &v1, &ps1).unwrap();
                    let combined = tau.compose(&sigma);
                    let (s3, v3) = permute_slots(&combined, &items, &ps).unwrap();
                    assert_eq!(v2, v3, "slots for {sigma} then {tau}");
                    assert_eq!(s1 * s2, s3, "signs for {sigma} then {tau} parities {ps:?}");
                }
            }
        }
    }

    #[test]
    fn shuffle_edge_cases() {
        for n in 0..4 {
            assert_eq!(enumerate_shuffles(n, 0), vec![Permutation::identity(n as usize)]);
            assert_eq!(enumerate_shuffles(0, n), vec![Permutation::identity(n as usize)]);
        }
        assert!(enumerate_shuffles(-1, 3).is_empty());
        assert!(enumerate_shuffles(2, -1).is_empty());
    }

    #[test]
    fn shuffle_two_one() {
        let shuffles = enumerate_shuffles(2, 1);
        assert_eq!(shuffles.len(), 3);
        for s in &shuffles {
            assert!(s.apply(1) < s.apply(2));
        }
    }

    #[test]
    fn shuffle_counts_are_binomial() {
        fn binom(m: usize, n: usize) -> usize {
            let mut acc = 1usize;
            for j in 0..m {
                acc = acc * (m + n - j) / (j + 1);
            }
            acc
        }
        for m in 0..=5i64 {
            for n in 0..=5i64 {
                assert_eq!(
                    enumerate_shuffles(m, n).len(),
                    binom(m as usize, n as usize),
                    "({m},{n})"
                );
            }
        }
    }

    #[test]
    fn insert_identity_into_identity() {
        let id2 = Permutation::identity(2);
        assert_eq!(compose_insert(&id2, 1, &id2).unwrap(), Permutation::identity(3));
    }

    #[test]
    fn insert_produces_three_cycle() {
        // (12) o_1 id_2 acts on v1 v2 v3 as v3 v1 v2, i.e. the cycle 1->2->3->1.
        let swap = perm(&[2, 1]);
        let got = compose_insert(&swap, 1, &Permutation::identity(2)).unwrap();
        assert_eq!(got, perm(&[2, 3, 1]));
    }

    #[test]
    fn insert_out_of_range() {
        let swap = perm(&[2, 1]);
        assert!(compose_insert(&swap, 3, &Permutation::identity(1)).is_err());
    }

    #[test]
    fn block_identities() {
        let id2 = Permutation::identity(2);
        let taus = [Permutation::identity(3), Permutation::identity(2)];
        let got = compose_block(&id2, &taus).unwrap();
        assert_eq!(got, Permutation::identity(5));

        let swap = perm(&[2, 1]);
        let ones = [Permutation::identity(1), Permutation::identity(1)];
        assert_eq!(compose_block(&swap, &ones).unwrap(), swap);
    }

    #[test]
    fn block_composition_matches_direct_slot_action() {
        // sigma=(12) with blocks of sizes (2,1) sends slots (1,2,3) to (2,3,1).
        let swap = perm(&[2, 1]);
        let taus = [Permutation::identity(2), Permutation::identity(1)];
        let got = compose_block(&swap, &taus).unwrap();
        assert_eq!(got, perm(&[2, 3, 1]));
        // And with tau_1 = (12) inside the block.
        let taus = [perm(&[2, 1]), Permutation::identity(1)];
        let got = compose_block(&swap, &taus).unwrap();
        assert_eq!(got, perm(&[3, 2, 1]));
    }

    #[test]
    fn insert_associativity_against_tensor_action() {
        // (sigma o_i tau) acting on slots equals tau-inside then sigma-on-blocks,
        // checked by composing position maps over S_2 and S_3.
        for sigma in Permutation::all(2) {
            for tau in Permutation::all(2) {
                for i in 1..=2 {
                    let composed = compose_insert(&sigma, i, &tau).unwrap();
                    // Position map computed independently.
                    let sizes = if i == 1 { [2usize, 1] } else { [1usize, 2] };
                    let mut expect = vec![0usize; 3];
                    let mut src = 1usize;
                    for b in 1..=2 {
                        for k in 1..=sizes[b - 1] {
                            let inner = if b == i { tau.apply(k) } else { k };
                            let target_block = sigma.apply(b);
                            let offset: usize = (1..=2)
                                .filter(|&c| sigma.apply(c) < target_block)
                                .map(|c| sizes[c - 1])
                                .sum();
                            expect[src - 1] = offset + inner;
                            src += 1;
                        }
                    }
                    assert_eq!(composed, perm(&expect));
                }
            }
        }
    }

    #[test]
    fn insert_block_mixed_identity() {
        // ((12) o_1 1_{m+1}) o_{m+2} 1_{l+1} = (12)(1_{m+1}, 1_{l+1}, 1_1, ..., 1_1)
        // with (12) in S_{n+1}.
        for m in 1..=2usize {
            for l in 1..=2usize {
                for n in 2..=3usize {
                    let swap = Permutation::transposition(n + 1, 1, 2);
                    let lhs = {
                        let first = compose_insert(&swap, 1, &Permutation::identity(m + 1)).unwrap();
                        compose_insert(&first, m + 2, &Permutation::identity(l + 1)).unwrap()
                    };
                    let mut taus = vec![Permutation::identity(m + 1), Permutation::identity(l + 1)];
                    taus.extend(std::iter::repeat(Permutation::identity(1)).take(n - 1));
                    let rhs = compose_block(&swap, &taus).unwrap();
                    assert_eq!(lhs, rhs, "m={m} l={l} n={n}");
                }
            }
        }
    }
}

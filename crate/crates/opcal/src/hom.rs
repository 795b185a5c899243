//! The endomorphism operad of a finite dimensional superspace.
//!
//! Cochains of arity `n` are linear maps `V^(tensor n) -> V`, stored as
//! value tables on basis tuples. All signs are computed in the parity
//! reversed space `Pi V`, which is the flavour the Lie algebra
//! correspondence and the Chevalley-Eilenberg complex use.

use crate::error::{Error, Result};
use crate::fdmod::ModuleSpec;
use crate::operad::{box_prod, symmetrize, Cochain, OperadSpace, PseudoOperad, WElement};
use crate::perm::{koszul_sign, parity_sum, Parity, Permutation};
use crate::scalar::Scalar;
use num_traits::Zero;
use std::collections::BTreeMap;

/// A multilinear map `V^(tensor n) -> V` on basis tuples.
///
/// Values are coordinate vectors in the basis of `V`; zero vectors are not
/// stored. Parity homogeneity (in `Pi V`) is enforced at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HomCochain<S> {
    arity: usize,
    parity: Parity,
    values: BTreeMap<Vec<usize>, Vec<S>>,
}

impl<S: Scalar> HomCochain<S> {
    pub fn values(&self) -> &BTreeMap<Vec<usize>, Vec<S>> {
        &self.values
    }

    pub fn value(&self, tuple: &[usize], dim: usize) -> Vec<S> {
        self.values
            .get(tuple)
            .cloned()
            .unwrap_or_else(|| vec![S::zero(); dim])
    }

    /// Deterministic sparse coordinates, for rank computations.
    pub fn coord_map(&self) -> BTreeMap<String, S> {
        let mut out = BTreeMap::new();
        for (tuple, coords) in &self.values {
            for (b, c) in coords.iter().enumerate() {
                if !c.is_zero() {
                    let key = format!(
                        "{}|{}",
                        tuple.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
                        b
                    );
                    out.insert(key, c.clone());
                }
            }
        }
        out
    }
}

impl<S: Scalar> Cochain<S> for HomCochain<S> {
    fn arity(&self) -> usize {
        self.arity
    }

    fn parity(&self) -> Parity {
        self.parity
    }

    fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity, "cochain arity");
        assert_eq!(self.parity, other.parity, "cochain parity");
        let mut values = self.values.clone();
        for (t, v) in &other.values {
            match values.get_mut(t) {
                Some(w) => {
                    for (a, b) in w.iter_mut().zip(v.iter()) {
                        *a = a.clone() + b.clone();
                    }
                }
                None => {
                    values.insert(t.clone(), v.clone());
                }
            }
        }
        values.retain(|_, v| v.iter().any(|c| !c.is_zero()));
        HomCochain { arity: self.arity, parity: self.parity, values }
    }

    fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return HomCochain { arity: self.arity, parity: self.parity, values: BTreeMap::new() };
        }
        HomCochain {
            arity: self.arity,
            parity: self.parity,
            values: self
                .values
                .iter()
                .map(|(t, v)| (t.clone(), v.iter().map(|x| x.clone() * c.clone()).collect()))
                .collect(),
        }
    }
}

/// The endomorphism operad backend over a module spec (only generator
/// parities and weights are used; the `d`-action plays no role here).
#[derive(Debug, Clone)]
pub struct HomOperad<S> {
    module: ModuleSpec,
    _marker: std::marker::PhantomData<S>,
}

impl<S: Scalar> HomOperad<S> {
    pub fn new(module: ModuleSpec) -> Self {
        HomOperad { module, _marker: std::marker::PhantomData }
    }

    pub fn module(&self) -> &ModuleSpec {
        &self.module
    }

    pub fn dim(&self) -> usize {
        self.module.len()
    }

    fn pi_parities(&self, tuple: &[usize]) -> Vec<Parity> {
        tuple.iter().map(|&b| self.module.pi_parity(b)).collect()
    }

    /// Build a cochain, validating parity homogeneity: nonzero coordinates
    /// at basis index `b` on tuple `t` require
    /// `pi_parity(b) = parity + sum pi_parity(t)`.
    pub fn cochain(
        &self,
        arity: usize,
        parity: Parity,
        values: BTreeMap<Vec<usize>, Vec<S>>,
    ) -> Result<HomCochain<S>> {
        let dim = self.dim();
        let mut clean = BTreeMap::new();
        for (tuple, coords) in values {
            if tuple.len() != arity {
                return Err(Error::ArityMismatch { expected: arity, found: tuple.len() });
            }
            if coords.len() != dim {
                return Err(Error::LengthMismatch { expected: dim, found: coords.len() });
            }
            let input_parity = parity_sum(self.pi_parities(&tuple));
            for (b, c) in coords.iter().enumerate() {
                if !c.is_zero() && self.module.pi_parity(b) != parity.plus(input_parity) {
                    return Err(Error::InhomogeneousParity);
                }
            }
            if coords.iter().any(|c| !c.is_zero()) {
                clean.insert(tuple, coords);
            }
        }
        Ok(HomCochain { arity, parity, values: clean })
    }

    /// Elementary cochain: tuple `t` maps to basis vector `b`, all other
    /// tuples to zero.
    pub fn elementary(&self, tuple: &[usize], b: usize) -> HomCochain<S> {
        let input_parity = parity_sum(self.pi_parities(tuple));
        let parity = self.module.pi_parity(b).plus(input_parity);
        let mut coords = vec![S::zero(); self.dim()];
        coords[b] = S::one();
        let mut values = BTreeMap::new();
        values.insert(tuple.to_vec(), coords);
        HomCochain { arity: tuple.len(), parity, values }
    }

    /// The operad unit: the identity endomorphism in arity 1.
    pub fn unit(&self) -> HomCochain<S> {
        let mut values = BTreeMap::new();
        for b in 0..self.dim() {
            let mut coords = vec![S::zero(); self.dim()];
            coords[b] = S::one();
            values.insert(vec![b], coords);
        }
        HomCochain { arity: 1, parity: Parity::Even, values }
    }

    /// All basis tuples of the given length.
    pub fn tuples(&self, arity: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for _ in 0..arity {
            out = out
                .into_iter()
                .flat_map(|t| {
                    (0..self.dim()).map(move |b| {
                        let mut t = t.clone();
                        t.push(b);
                        t
                    })
                })
                .collect();
        }
        out
    }

    /// Weight of a cochain: value weight minus input weights, which must
    /// agree across all stored values. `None` for the zero cochain.
    pub fn weight(&self, f: &HomCochain<S>) -> Result<Option<i64>> {
        let mut found = None;
        for (tuple, coords) in &f.values {
            let input: i64 = tuple.iter().map(|&b| self.module.gen(b).weight).sum();
            for (b, c) in coords.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let w = self.module.gen(b).weight - input;
                match found {
                    None => found = Some(w),
                    Some(x) if x == w => {}
                    Some(_) => {
                        return Err(Error::NotWeightGraded("hom cochain mixes weights".into()))
                    }
                }
            }
        }
        Ok(found)
    }

    /// Basis of the invariants `W_(arity-1)` in the given weight: symmetrize
    /// elementary cochains on sorted tuples and keep an independent set.
    pub fn invariant_basis(&self, arity: usize, weight: i64) -> Result<Vec<HomCochain<S>>> {
        let mut candidates = Vec::new();
        for tuple in self.tuples(arity) {
            if !tuple.windows(2).all(|w| w[0] <= w[1]) {
                continue;
            }
            let input: i64 = tuple.iter().map(|&b| self.module.gen(b).weight).sum();
            for b in 0..self.dim() {
                if self.module.gen(b).weight - input != weight {
                    continue;
                }
                let sym = symmetrize(self, &self.elementary(&tuple, b))?;
                if !sym.is_zero() {
                    candidates.push(sym);
                }
            }
        }
        Ok(filter_independent(&candidates, |f| f.coord_map()))
    }
}

/// Keep a maximal linearly independent subset, via shared sparse keys.
pub(crate) fn filter_independent<S: Scalar, E: Clone>(
    candidates: &[E],
    coords: impl Fn(&E) -> BTreeMap<String, S>,
) -> Vec<E> {
    let maps: Vec<BTreeMap<String, S>> = candidates.iter().map(&coords).collect();
    let mut keys: Vec<&String> = maps.iter().flat_map(|m| m.keys()).collect();
    keys.sort();
    keys.dedup();
    let vectors: Vec<Vec<S>> = maps
        .iter()
        .map(|m| keys.iter().map(|k| m.get(*k).cloned().unwrap_or_else(S::zero)).collect())
        .collect();
    crate::linalg::independent_subset(&vectors)
        .into_iter()
        .map(|i| candidates[i].clone())
        .collect()
}

impl<S: Scalar> OperadSpace<S> for HomOperad<S> {
    type Elem = HomCochain<S>;

    fn zero(&self, arity: usize, parity: Parity) -> HomCochain<S> {
        HomCochain { arity, parity, values: BTreeMap::new() }
    }

    fn act(&self, f: &HomCochain<S>, sigma: &Permutation) -> Result<HomCochain<S>> {
        if sigma.len() != f.arity {
            return Err(Error::LengthMismatch { expected: f.arity, found: sigma.len() });
        }
        let inv = sigma.inverse();
        let mut values = BTreeMap::new();
        for tuple in self.tuples(f.arity) {
            let permuted: Vec<usize> = (1..=f.arity).map(|k| tuple[inv.apply(k) - 1]).collect();
            let Some(val) = f.values.get(&permuted) else { continue };
            let sign = koszul_sign(sigma, &self.pi_parities(&tuple))?;
            let signed: Vec<S> = val
                .iter()
                .map(|c| if sign < 0 { -c.clone() } else { c.clone() })
                .collect();
            values.insert(tuple, signed);
        }
        values.retain(|_, v| v.iter().any(|c| !c.is_zero()));
        Ok(HomCochain { arity: f.arity, parity: f.parity, values })
    }
}

impl<S: Scalar> PseudoOperad<S> for HomOperad<S> {
    fn circ(&self, f: &HomCochain<S>, i: usize, g: &HomCochain<S>) -> Result<HomCochain<S>> {
        let n = f.arity;
        let m = g.arity;
        if i < 1 || i > n {
            return Err(Error::IndexOutOfRange { index: i, arity: n });
        }
        let out_arity = n + m - 1;
        let parity = f.parity.plus(g.parity);
        let dim = self.dim();
        let mut values: BTreeMap<Vec<usize>, Vec<S>> = BTreeMap::new();
        for (block, gval) in &g.values {
            for (ftuple, fval) in &f.values {
                // f's slot i is fed by g's output in basis coordinates.
                let b = ftuple[i - 1];
                if gval[b].is_zero() {
                    continue;
                }
                let mut tuple = Vec::with_capacity(out_arity);
                tuple.extend_from_slice(&ftuple[..i - 1]);
                tuple.extend_from_slice(block);
                tuple.extend_from_slice(&ftuple[i..]);
                // Koszul sign: g moves past the first i-1 inputs.
                let prefix = parity_sum(self.pi_parities(&ftuple[..i - 1]));
                let sgn: S = if g.parity.is_odd() && prefix.is_odd() {
                    -S::one()
                } else {
                    S::one()
                };
                let coef = gval[b].clone() * sgn;
                let entry = values.entry(tuple).or_insert_with(|| vec![S::zero(); dim]);
                for (slot, c) in entry.iter_mut().zip(fval.iter()) {
                    *slot = slot.clone() + coef.clone() * c.clone();
                }
            }
        }
        values.retain(|_, v| v.iter().any(|c| !c.is_zero()));
        Ok(HomCochain { arity: out_arity, parity, values })
    }
}

/// Bracket table of a would-be Lie superalgebra: `[a, b]` on basis pairs.
pub type BracketTable<S> = BTreeMap<(usize, usize), Vec<S>>;

/// The odd master element: `X(a ⊗ b) = (-1)^(p(a)) [a, b]`, with `p` the
/// parity in `V`. `box(X, X) = 0` iff the table is a Lie superalgebra.
pub fn x_from_lie_bracket<S: Scalar>(
    operad: &HomOperad<S>,
    table: &BracketTable<S>,
) -> Result<WElement<HomCochain<S>>> {
    let dim = operad.dim();
    let mut values = BTreeMap::new();
    for ((a, b), coords) in table {
        if coords.len() != dim {
            return Err(Error::LengthMismatch { expected: dim, found: coords.len() });
        }
        let sign: S =
            if operad.module().gen(*a).parity.is_odd() { -S::one() } else { S::one() };
        let signed: Vec<S> = coords.iter().map(|c| c.clone() * sign.clone()).collect();
        values.insert(vec![*a, *b], signed);
    }
    let x = operad.cochain(2, Parity::Odd, values)?;
    WElement::new(operad, x)
}

/// Recover the bracket table from a master element.
pub fn lie_bracket_from_x<S: Scalar>(
    operad: &HomOperad<S>,
    x: &HomCochain<S>,
) -> Result<BracketTable<S>> {
    if x.arity != 2 {
        return Err(Error::ArityMismatch { expected: 2, found: x.arity });
    }
    let dim = operad.dim();
    let mut table = BTreeMap::new();
    for a in 0..dim {
        for b in 0..dim {
            let val = x.value(&[a, b], dim);
            let sign: S =
                if operad.module().gen(a).parity.is_odd() { -S::one() } else { S::one() };
            let signed: Vec<S> = val.iter().map(|c| c.clone() * sign.clone()).collect();
            if signed.iter().any(|c| !c.is_zero()) {
                table.insert((a, b), signed);
            }
        }
    }
    Ok(table)
}

/// `box(X, X)` for the master element; zero iff the encoded bracket
/// satisfies skewsymmetry and Jacobi.
pub fn master_square<S: Scalar>(
    operad: &HomOperad<S>,
    x: &WElement<HomCochain<S>>,
) -> Result<HomCochain<S>> {
    box_prod(operad, x.elem(), x.elem())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdmod::GenKind;
    use crate::operad::{bracket, is_invariant};
    use crate::sample::Sampler;
    use crate::{rat, Rat};

    pub(crate) fn sl2_operad() -> HomOperad<Rat> {
        HomOperad::new(ModuleSpec::of(&[
            ("e", Parity::Even, 0, GenKind::Free),
            ("h", Parity::Even, 0, GenKind::Free),
            ("f", Parity::Even, 0, GenKind::Free),
        ]))
    }

    pub(crate) fn sl2_table() -> BracketTable<Rat> {
        // Basis order e, h, f: [e,f]=h, [h,e]=2e, [h,f]=-2f.
        let mut t: BracketTable<Rat> = BTreeMap::new();
        let v = |e: i64, h: i64, f: i64| vec![rat(e), rat(h), rat(f)];
        t.insert((0, 2), v(0, 1, 0));
        t.insert((2, 0), v(0, -1, 0));
        t.insert((1, 0), v(2, 0, 0));
        t.insert((0, 1), v(-2, 0, 0));
        t.insert((1, 2), v(0, 0, -2));
        t.insert((2, 1), v(0, 0, 2));
        t
    }

    fn mixed_operad(dim: usize) -> HomOperad<Rat> {
        let names = ["x", "y", "z"];
        let gens: Vec<(&str, Parity, i64, GenKind)> = (0..dim)
            .map(|k| {
                let p = if k % 2 == 1 { Parity::Odd } else { Parity::Even };
                (names[k], p, 0, GenKind::Free)
            })
            .collect();
        HomOperad::new(ModuleSpec::of(&gens))
    }

    #[test]
    fn unit_laws() {
        let op = sl2_operad();
        let sampler = Sampler::new(7);
        let f = sampler.hom_cochain(&op, 2, Parity::Even, 1);
        let unit = op.unit();
        for i in 1..=2 {
            assert_eq!(op.circ(&f, i, &unit).unwrap(), f);
        }
        assert_eq!(op.circ(&unit, 1, &f).unwrap(), f);
    }

    #[test]
    fn circ_associativity_all_three_shapes() {
        let op = mixed_operad(2);
        let sampler = Sampler::new(11);
        for trial in 0..6u64 {
            let f = sampler.hom_cochain(&op, 2, Parity::Odd, trial + 1);
            let g = sampler.hom_cochain(&op, 2, Parity::Even, trial + 101);
            let h = sampler.hom_cochain(&op, 2, Parity::Odd, trial + 201);
            // j < i:   (f o_i g) o_j h = +-(f o_j h) o_(l+i-1) g
            let lhs = op.circ(&op.circ(&f, 2, &g).unwrap(), 1, &h).unwrap();
            let rhs = op.circ(&op.circ(&f, 1, &h).unwrap(), 3, &g).unwrap();
            let rhs = if Parity::pair_sign(g.parity(), h.parity()) < 0 { rhs.neg() } else { rhs };
            assert_eq!(lhs, rhs, "assoc1 trial {trial}");
            // i <= j < i+m: (f o_i g) o_j h = f o_i (g o_(j-i+1) h)
            let lhs = op.circ(&op.circ(&f, 1, &g).unwrap(), 2, &h).unwrap();
            let rhs = op.circ(&f, 1, &op.circ(&g, 2, &h).unwrap()).unwrap();
            assert_eq!(lhs, rhs, "assoc2 trial {trial}");
            // j >= i+m: (f o_i g) o_j h = +-(f o_(j-m+1) h) o_i g
            let lhs = op.circ(&op.circ(&f, 1, &g).unwrap(), 3, &h).unwrap();
            let rhs = op.circ(&op.circ(&f, 2, &h).unwrap(), 1, &g).unwrap();
            let rhs = if Parity::pair_sign(g.parity(), h.parity()) < 0 { rhs.neg() } else { rhs };
            assert_eq!(lhs, rhs, "assoc3 trial {trial}");
        }
    }

    #[test]
    fn circ_equivariance() {
        let op = mixed_operad(2);
        let sampler = Sampler::new(13);
        for trial in 0..4u64 {
            let f = sampler.hom_cochain(&op, 2, Parity::Odd, trial + 1);
            let g = sampler.hom_cochain(&op, 2, Parity::Even, trial + 51);
            for sigma in Permutation::all(2) {
                for tau in Permutation::all(2) {
                    for i in 1..=2usize {
                        let lhs = op
                            .circ(&op.act(&f, &sigma).unwrap(), i, &op.act(&g, &tau).unwrap())
                            .unwrap();
                        let composed = crate::perm::compose_insert(&sigma, i, &tau).unwrap();
                        let rhs =
                            op.act(&op.circ(&f, sigma.apply(i), &g).unwrap(), &composed).unwrap();
                        assert_eq!(lhs, rhs, "sigma={sigma} tau={tau} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn action_composes() {
        let op = mixed_operad(3);
        let sampler = Sampler::new(17);
        let f = sampler.hom_cochain(&op, 3, Parity::Odd, 2);
        for sigma in Permutation::all(3) {
            for tau in Permutation::all(3) {
                let lhs = op.act(&op.act(&f, &sigma).unwrap(), &tau).unwrap();
                let rhs = op.act(&f, &sigma.compose(&tau)).unwrap();
                assert_eq!(lhs, rhs, "sigma={sigma} tau={tau}");
            }
        }
    }

    #[test]
    fn sl2_master_element_squares_to_zero() {
        let op = sl2_operad();
        let x = x_from_lie_bracket(&op, &sl2_table()).unwrap();
        assert!(master_square(&op, &x).unwrap().is_zero());
        let table = lie_bracket_from_x(&op, x.elem()).unwrap();
        assert_eq!(table, sl2_table());
    }

    #[test]
    fn abelian_bracket_gives_zero_master() {
        let op = sl2_operad();
        let x = x_from_lie_bracket(&op, &BTreeMap::new()).unwrap();
        assert!(x.elem().is_zero());
        assert!(master_square(&op, &x).unwrap().is_zero());
    }

    #[test]
    fn perturbed_sl2_fails() {
        let op = sl2_operad();
        let mut table = sl2_table();
        table.insert((1, 0), vec![rat(3), rat(0), rat(0)]);
        table.insert((0, 1), vec![rat(-3), rat(0), rat(0)]);
        let x = x_from_lie_bracket(&op, &table).unwrap();
        assert!(!master_square(&op, &x).unwrap().is_zero());
    }

    #[test]
    fn symmetrize_is_projector() {
        let op = mixed_operad(2);
        let sampler = Sampler::new(23);
        for trial in 0..4u64 {
            let f = sampler.hom_cochain(&op, 2, Parity::Odd, trial + 1);
            let s = symmetrize(&op, &f).unwrap();
            assert!(is_invariant(&op, &s).unwrap());
            assert_eq!(symmetrize(&op, &s).unwrap(), s);
        }
    }

    #[test]
    fn box_of_w_minus_one_is_zero() {
        let op = sl2_operad();
        let sampler = Sampler::new(29);
        let c = sampler.hom_cochain(&op, 0, Parity::Odd, 1);
        let g = sampler.hom_cochain(&op, 2, Parity::Odd, 2);
        assert!(box_prod(&op, &c, &g).unwrap().is_zero());
    }

    #[test]
    fn bracket_closes_on_invariants() {
        let op = mixed_operad(2);
        let sampler = Sampler::new(31);
        let f = symmetrize(&op, &sampler.hom_cochain(&op, 2, Parity::Odd, 1)).unwrap();
        let g = symmetrize(&op, &sampler.hom_cochain(&op, 2, Parity::Even, 2)).unwrap();
        let fg = box_prod(&op, &f, &g).unwrap();
        assert!(is_invariant(&op, &fg).unwrap(), "box output invariant");
        let br = bracket(&op, &f, &g).unwrap();
        assert!(is_invariant(&op, &br).unwrap(), "bracket output invariant");
    }

    #[test]
    fn jacobi_on_random_invariant_triples() {
        // [[f,g],h] = [f,[g,h]] - (-1)^(p(f)p(g)) [g,[f,h]]
        let op = mixed_operad(2);
        let sampler = Sampler::new(37);
        for trial in 0..3u64 {
            let f =
                symmetrize(&op, &sampler.hom_cochain(&op, 2, Parity::Odd, trial + 1)).unwrap();
            let g =
                symmetrize(&op, &sampler.hom_cochain(&op, 2, Parity::Even, trial + 41)).unwrap();
            let h =
                symmetrize(&op, &sampler.hom_cochain(&op, 1, Parity::Odd, trial + 81)).unwrap();
            let lhs = bracket(&op, &bracket(&op, &f, &g).unwrap(), &h).unwrap();
            let t1 = bracket(&op, &f, &bracket(&op, &g, &h).unwrap()).unwrap();
            let t2 = bracket(&op, &g, &bracket(&op, &f, &h).unwrap()).unwrap();
            let sign = Parity::pair_sign(f.parity(), g.parity());
            let rhs = if sign < 0 { t1.add(&t2) } else { t1.sub(&t2) };
            assert_eq!(lhs, rhs, "trial {trial}");
        }
    }

    #[test]
    fn sl2_invariant_basis_dims() {
        let op = sl2_operad();
        let dims: Vec<usize> = (0..=3).map(|j| op.invariant_basis(j, 0).unwrap().len()).collect();
        assert_eq!(dims, vec![3, 9, 9, 3]);
        assert_eq!(op.invariant_basis(4, 0).unwrap().len(), 0);
    }
}

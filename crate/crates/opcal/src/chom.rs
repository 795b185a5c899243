//! The Chom operad over a finitely generated `F[d]`-module, in two flavours:
//! quotient-valued cochains (values in `V[l1..ln] / <d + sum l>`) and
//! polynomial-valued tilde cochains (values in `V[l1..ln]`).
//!
//! Cochains are stored on generator tuples only; evaluation on arbitrary
//! module elements goes through the sesquilinearity extension, where a
//! coefficient `P(d)` in slot `i` becomes the multiplier `P(-l_i)`.

use crate::error::{Error, Result};
use crate::fdmod::{iota_embed, quotient_project, GenKind, ModElem, ModuleSpec, QuotElem, WeightClass};
use crate::operad::{
    Cochain, ConformalPseudoOperad, LambdaSeries, OperadSpace, PseudoOperad, TildePair,
};
use crate::perm::{koszul_sign, parity_sum, Parity, Permutation};
use crate::poly::{lam, mu, Poly, Var};
use crate::scalar::Scalar;
use std::collections::BTreeMap;

/// Quotient-valued Chom cochain on generator tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct ChomCochain<S> {
    arity: usize,
    parity: Parity,
    values: BTreeMap<Vec<usize>, QuotElem<S>>,
}

/// Polynomial-valued tilde-Chom cochain on generator tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeChomCochain<S> {
    arity: usize,
    parity: Parity,
    values: BTreeMap<Vec<usize>, ModElem<S>>,
}

macro_rules! cochain_vector_ops {
    ($ty:ident, $val:ident) => {
        impl<S: Scalar> Cochain<S> for $ty<S> {
            fn arity(&self) -> usize {
                self.arity
            }

            fn parity(&self) -> Parity {
                self.parity
            }

            fn is_zero(&self) -> bool {
                self.values.values().all(|v| v.is_zero())
            }

            fn add(&self, other: &Self) -> Self {
                assert_eq!(self.arity, other.arity, "cochain arity");
                assert_eq!(self.parity, other.parity, "cochain parity");
                let mut values = self.values.clone();
                for (t, v) in &other.values {
                    match values.get_mut(t) {
                        Some(w) => *w = w.add(v),
                        None => {
                            values.insert(t.clone(), v.clone());
                        }
                    }
                }
                values.retain(|_, v| !v.is_zero());
                $ty { arity: self.arity, parity: self.parity, values }
            }

            fn scale(&self, c: &S) -> Self {
                let mut values: BTreeMap<Vec<usize>, $val<S>> =
                    self.values.iter().map(|(t, v)| (t.clone(), v.scale(c))).collect();
                values.retain(|_, v| !v.is_zero());
                $ty { arity: self.arity, parity: self.parity, values }
            }
        }

        impl<S: Scalar> $ty<S> {
            pub fn values(&self) -> &BTreeMap<Vec<usize>, $val<S>> {
                &self.values
            }

            pub fn value(&self, tuple: &[usize]) -> $val<S> {
                self.values
                    .get(tuple)
                    .cloned()
                    .unwrap_or_else(|| $val::zero(self.arity))
            }

            /// Deterministic sparse coordinates for rank computations.
            pub fn coord_map(&self) -> BTreeMap<String, S> {
                let mut out = BTreeMap::new();
                for (tuple, v) in &self.values {
                    let tkey = tuple
                        .iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(",");
                    for (g, p) in v.comps() {
                        for (mono, c) in p.iter_terms() {
                            let mkey = mono
                                .iter()
                                .map(|(var, e)| format!("{var}^{e}"))
                                .collect::<Vec<_>>()
                                .join("*");
                            out.insert(format!("{tkey}|{g}|{mkey}"), c.clone());
                        }
                    }
                }
                out
            }
        }
    };
}

cochain_vector_ops!(ChomCochain, QuotElem);
cochain_vector_ops!(TildeChomCochain, ModElem);

/// Shared backend state for both flavours.
#[derive(Debug, Clone)]
pub struct ChomOperad<S> {
    module: ModuleSpec,
    _marker: std::marker::PhantomData<S>,
}

#[derive(Debug, Clone)]
pub struct TildeChomOperad<S> {
    module: ModuleSpec,
    _marker: std::marker::PhantomData<S>,
}

/// All generator tuples of the given length over a module spec.
pub(crate) fn gen_tuples(spec: &ModuleSpec, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..spec.len()).map(move |b| {
                    let mut t = t.clone();
                    t.push(b);
                    t
                })
            })
            .collect();
    }
    out
}

pub(crate) fn pi_parities(spec: &ModuleSpec, tuple: &[usize]) -> Vec<Parity> {
    tuple.iter().map(|&b| spec.pi_parity(b)).collect()
}

/// Check `parity(value in Pi V) = parity(f) + sum of input Pi-parities`.
fn check_value_parity<S: Scalar>(
    spec: &ModuleSpec,
    elem: &ModElem<S>,
    tuple: &[usize],
    parity: Parity,
) -> Result<()> {
    let want_pi = parity.plus(parity_sum(pi_parities(spec, tuple)));
    match elem.parity(spec)? {
        None => Ok(()),
        Some(v_parity) if v_parity.flip() == want_pi => Ok(()),
        Some(_) => Err(Error::InhomogeneousParity),
    }
}

/// Substitution of `f`'s slot variables when `g` of arity `m` is inserted in
/// slot `i` of `f` of arity `n`: slots before `i` keep their outer variable,
/// slot `i` becomes `lambda + mu_i + .. + mu_(i+m-1)`, later slots shift by
/// `m - 1`. Outer variables are the scratch `mu` namespace; `lambda` is the
/// formal `Aux(1)` (absent in the quotient case).
fn slot_substitution<S: Scalar>(
    n: usize,
    m: usize,
    i: usize,
    with_aux: bool,
) -> BTreeMap<Var, Poly<S>> {
    let mut map = BTreeMap::new();
    for j in 1..=n {
        let repl = if j < i {
            Poly::var(mu(j))
        } else if j == i {
            let mut acc = if with_aux { Poly::var(Var::Aux(1)) } else { Poly::zero() };
            for k in i..i + m {
                acc = acc.add(&Poly::var(mu(k)));
            }
            acc
        } else {
            Poly::var(mu(j + m - 1))
        };
        map.insert(lam(j), repl);
    }
    map
}

/// Rename block lambda variables of `g`'s value to the outer mu namespace.
fn block_rename<S: Scalar>(m: usize, i: usize) -> BTreeMap<Var, Poly<S>> {
    (1..=m).map(|k| (lam(k), Poly::var(mu(i + k - 1)))).collect()
}

/// Rename the outer mu namespace back to canonical lambda indexing.
fn mu_to_lambda<S: Scalar>(out_arity: usize) -> BTreeMap<Var, Poly<S>> {
    (1..=out_arity).map(|k| (mu(k), Poly::var(lam(k)))).collect()
}

/// The common insertion kernel. `f_values`/`g_values` map tuples to raw
/// component polynomials; returns, per output tuple and target generator,
/// the accumulated polynomial in `D, Aux(1), Mu(1..out_arity)`.
#[allow(clippy::too_many_arguments)]
fn circ_accumulate<S: Scalar>(
    spec: &ModuleSpec,
    f_value: &dyn Fn(&[usize]) -> ModElem<S>,
    g_value: &dyn Fn(&[usize]) -> ModElem<S>,
    n: usize,
    m: usize,
    i: usize,
    g_parity: Parity,
    with_aux: bool,
) -> BTreeMap<(Vec<usize>, usize), Poly<S>> {
    let out_arity = n + m - 1;
    let subst = slot_substitution::<S>(n, m, i, with_aux);
    let rename = block_rename::<S>(m, i);
    // Lambda = Aux + mu_i + ... + mu_(i+m-1), the slot-i multiplier for d's.
    let mut big_lambda = if with_aux { Poly::var(Var::Aux(1)) } else { Poly::zero() };
    for k in i..i + m {
        big_lambda = big_lambda.add(&Poly::var(mu(k)));
    }
    let neg_lambda = big_lambda.neg();
    let mut acc: BTreeMap<(Vec<usize>, usize), Poly<S>> = BTreeMap::new();
    for tuple in gen_tuples(spec, out_arity) {
        let block = &tuple[i - 1..i - 1 + m];
        let gval = g_value(block);
        if gval.is_zero() {
            continue;
        }
        let gval = gval.substitute(spec, &rename);
        let prefix = parity_sum(pi_parities(spec, &tuple[..i - 1]));
        let sign: S = if g_parity.is_odd() && prefix.is_odd() { -S::one() } else { S::one() };
        for (u, coeff) in gval.comps() {
            // Split off d-powers: each d^k becomes (-Lambda)^k by
            // sesquilinearity of f in slot i.
            for (k, h) in coeff.coeffs_in(Var::D).into_iter().enumerate() {
                if h.is_zero() {
                    continue;
                }
                let mut ftuple = Vec::with_capacity(n);
                ftuple.extend_from_slice(&tuple[..i - 1]);
                ftuple.push(*u);
                ftuple.extend_from_slice(&tuple[i - 1 + m..]);
                let fval = f_value(&ftuple);
                if fval.is_zero() {
                    continue;
                }
                let fval = fval.substitute(spec, &subst);
                let multiplier = h.mul(&neg_lambda.pow(k as u32)).scale(&sign);
                for (target, fpoly) in fval.comps() {
                    let term = fpoly.mul(&multiplier);
                    if term.is_zero() {
                        continue;
                    }
                    let entry = acc
                        .entry((tuple.clone(), *target))
                        .or_insert_with(Poly::zero);
                    *entry = entry.add(&term);
                }
            }
        }
    }
    acc.retain(|_, p| !p.is_zero());
    acc
}

impl<S: Scalar> ChomOperad<S> {
    pub fn new(module: ModuleSpec) -> Self {
        ChomOperad { module, _marker: std::marker::PhantomData }
    }

    pub fn module(&self) -> &ModuleSpec {
        &self.module
    }

    pub fn tuples(&self, arity: usize) -> Vec<Vec<usize>> {
        gen_tuples(&self.module, arity)
    }

    /// Build a cochain, checking parity homogeneity and the torsion
    /// consistency rule: a torsion generator in slot `i` forces
    /// `l_i * value = 0` in the quotient.
    pub fn cochain(
        &self,
        arity: usize,
        parity: Parity,
        values: BTreeMap<Vec<usize>, QuotElem<S>>,
    ) -> Result<ChomCochain<S>> {
        let mut clean = BTreeMap::new();
        for (tuple, v) in values {
            if tuple.len() != arity {
                return Err(Error::ArityMismatch { expected: arity, found: tuple.len() });
            }
            if v.arity() != arity {
                return Err(Error::ArityMismatch { expected: arity, found: v.arity() });
            }
            check_value_parity(&self.module, &v.as_mod_elem(), &tuple, parity)?;
            for (slot, &g) in tuple.iter().enumerate() {
                if self.module.gen(g).kind == GenKind::TorsionD0 {
                    let killed = v.mul_poly(&self.module, &Poly::var(lam(slot + 1)));
                    if !killed.is_zero() {
                        return Err(Error::Inconsistent(format!(
                            "torsion slot {} of tuple {:?} requires l{} * value = 0",
                            slot + 1,
                            tuple,
                            slot + 1
                        )));
                    }
                }
            }
            if !v.is_zero() {
                clean.insert(tuple, v);
            }
        }
        Ok(ChomCochain { arity, parity, values: clean })
    }

    /// Weight of a cochain: value weight minus input weights.
    pub fn weight(&self, f: &ChomCochain<S>) -> Result<Option<i64>> {
        let mut found = None;
        for (tuple, v) in &f.values {
            let input: i64 = tuple.iter().map(|&b| self.module.gen(b).weight).sum();
            match v.weight(&self.module) {
                WeightClass::Zero => {}
                WeightClass::Homogeneous(w) => {
                    let w = w - input;
                    match found {
                        None => found = Some(w),
                        Some(x) if x == w => {}
                        Some(_) => {
                            return Err(Error::NotWeightGraded(
                                "chom cochain mixes weights".into(),
                            ))
                        }
                    }
                }
                WeightClass::Inhomogeneous => {
                    return Err(Error::NotWeightGraded("chom value mixes weights".into()))
                }
            }
        }
        Ok(found)
    }
}

impl<S: Scalar> TildeChomOperad<S> {
    pub fn new(module: ModuleSpec) -> Self {
        TildeChomOperad { module, _marker: std::marker::PhantomData }
    }

    pub fn module(&self) -> &ModuleSpec {
        &self.module
    }

    pub fn tuples(&self, arity: usize) -> Vec<Vec<usize>> {
        gen_tuples(&self.module, arity)
    }

    /// Build a tilde cochain. Over `V[l]` the torsion rule `l_i * value = 0`
    /// forces the value to vanish outright on tuples with torsion slots.
    pub fn cochain(
        &self,
        arity: usize,
        parity: Parity,
        values: BTreeMap<Vec<usize>, ModElem<S>>,
    ) -> Result<TildeChomCochain<S>> {
        let mut clean = BTreeMap::new();
        for (tuple, v) in values {
            if tuple.len() != arity {
                return Err(Error::ArityMismatch { expected: arity, found: tuple.len() });
            }
            if v.arity() != arity {
                return Err(Error::ArityMismatch { expected: arity, found: v.arity() });
            }
            check_value_parity(&self.module, &v, &tuple, parity)?;
            let has_torsion_slot = tuple
                .iter()
                .any(|&g| self.module.gen(g).kind == GenKind::TorsionD0);
            if has_torsion_slot && !v.is_zero() {
                return Err(Error::Inconsistent(format!(
                    "polynomial-valued cochains vanish on torsion slots (tuple {tuple:?})"
                )));
            }
            if !v.is_zero() {
                clean.insert(tuple, v);
            }
        }
        Ok(TildeChomCochain { arity, parity, values: clean })
    }

    pub fn weight(&self, f: &TildeChomCochain<S>) -> Result<Option<i64>> {
        let mut found = None;
        for (tuple, v) in &f.values {
            let input: i64 = tuple.iter().map(|&b| self.module.gen(b).weight).sum();
            match v.weight(&self.module) {
                WeightClass::Zero => {}
                WeightClass::Homogeneous(w) => {
                    let w = w - input;
                    match found {
                        None => found = Some(w),
                        Some(x) if x == w => {}
                        Some(_) => {
                            return Err(Error::NotWeightGraded(
                                "tilde cochain mixes weights".into(),
                            ))
                        }
                    }
                }
                WeightClass::Inhomogeneous => {
                    return Err(Error::NotWeightGraded("tilde value mixes weights".into()))
                }
            }
        }
        Ok(found)
    }
}

/// Apply the permutation action shared by both flavours: evaluate on the
/// `sigma^-1`-permuted tuple, rename `l_k -> l_(sigma^-1(k))`, and multiply
/// by the Koszul sign of the input parities.
fn act_values<S: Scalar, V, F>(
    spec: &ModuleSpec,
    arity: usize,
    sigma: &Permutation,
    read: F,
    mut write: impl FnMut(Vec<usize>, V),
) -> Result<()>
where
    F: Fn(&[usize]) -> Option<V>,
    V: ActValue<S>,
{
    if sigma.len() != arity {
        return Err(Error::LengthMismatch { expected: arity, found: sigma.len() });
    }
    let inv = sigma.inverse();
    let rename: BTreeMap<Var, Poly<S>> =
        (1..=arity).map(|k| (lam(k), Poly::var(lam(inv.apply(k))))).collect();
    for tuple in gen_tuples(spec, arity) {
        let permuted: Vec<usize> = (1..=arity).map(|k| tuple[inv.apply(k) - 1]).collect();
        let Some(val) = read(&permuted) else { continue };
        let sign = koszul_sign(sigma, &pi_parities(spec, &tuple))?;
        let out = val.rename_and_sign(spec, &rename, sign);
        write(tuple, out);
    }
    Ok(())
}

trait ActValue<S: Scalar>: Sized {
    fn rename_and_sign(
        &self,
        spec: &ModuleSpec,
        rename: &BTreeMap<Var, Poly<S>>,
        sign: i8,
    ) -> Self;
}

impl<S: Scalar> ActValue<S> for QuotElem<S> {
    fn rename_and_sign(
        &self,
        spec: &ModuleSpec,
        rename: &BTreeMap<Var, Poly<S>>,
        sign: i8,
    ) -> Self {
        let out = self.substitute(spec, rename);
        if sign < 0 {
            out.neg()
        } else {
            out
        }
    }
}

impl<S: Scalar> ActValue<S> for ModElem<S> {
    fn rename_and_sign(
        &self,
        spec: &ModuleSpec,
        rename: &BTreeMap<Var, Poly<S>>,
        sign: i8,
    ) -> Self {
        let out = self.substitute(spec, rename);
        if sign < 0 {
            out.neg()
        } else {
            out
        }
    }
}

impl<S: Scalar> OperadSpace<S> for ChomOperad<S> {
    type Elem = ChomCochain<S>;

    fn zero(&self, arity: usize, parity: Parity) -> ChomCochain<S> {
        ChomCochain { arity, parity, values: BTreeMap::new() }
    }

    fn act(&self, f: &ChomCochain<S>, sigma: &Permutation) -> Result<ChomCochain<S>> {
        let mut values = BTreeMap::new();
        act_values::<S, QuotElem<S>, _>(
            &self.module,
            f.arity,
            sigma,
            |t| f.values.get(t).cloned(),
            |t, v| {
                if !v.is_zero() {
                    values.insert(t, v);
                }
            },
        )?;
        Ok(ChomCochain { arity: f.arity, parity: f.parity, values })
    }
}

impl<S: Scalar> PseudoOperad<S> for ChomOperad<S> {
    fn circ(&self, f: &ChomCochain<S>, i: usize, g: &ChomCochain<S>) -> Result<ChomCochain<S>> {
        let n = f.arity;
        let m = g.arity;
        if i < 1 || i > n {
            return Err(Error::IndexOutOfRange { index: i, arity: n });
        }
        let out_arity = n + m - 1;
        let spec = &self.module;
        let acc = circ_accumulate(
            spec,
            &|t| f.value(t).as_mod_elem(),
            &|t| g.value(t).as_mod_elem(),
            n,
            m,
            i,
            g.parity,
            false,
        );
        let rename = mu_to_lambda::<S>(out_arity);
        let mut values: BTreeMap<Vec<usize>, QuotElem<S>> = BTreeMap::new();
        for ((tuple, target), poly) in acc {
            let poly = poly.substitute(&rename);
            let elem = ModElem::monomial(spec, out_arity, target, poly)?;
            let q = quotient_project(spec, &elem);
            match values.get_mut(&tuple) {
                Some(v) => *v = v.add(&q),
                None => {
                    values.insert(tuple, q);
                }
            }
        }
        values.retain(|_, v| !v.is_zero());
        Ok(ChomCochain { arity: out_arity, parity: f.parity.plus(g.parity), values })
    }
}

impl<S: Scalar> OperadSpace<S> for TildeChomOperad<S> {
    type Elem = TildeChomCochain<S>;

    fn zero(&self, arity: usize, parity: Parity) -> TildeChomCochain<S> {
        TildeChomCochain { arity, parity, values: BTreeMap::new() }
    }

    fn act(&self, f: &TildeChomCochain<S>, sigma: &Permutation) -> Result<TildeChomCochain<S>> {
        let mut values = BTreeMap::new();
        act_values::<S, ModElem<S>, _>(
            &self.module,
            f.arity,
            sigma,
            |t| f.values.get(t).cloned(),
            |t, v| {
                if !v.is_zero() {
                    values.insert(t, v);
                }
            },
        )?;
        Ok(TildeChomCochain { arity: f.arity, parity: f.parity, values })
    }
}

impl<S: Scalar> ConformalPseudoOperad<S> for TildeChomOperad<S> {
    fn partial(&self, f: &TildeChomCochain<S>) -> Result<TildeChomCochain<S>> {
        let values = f
            .values
            .iter()
            .map(|(t, v)| (t.clone(), v.apply_shifted_partial(&self.module)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        Ok(TildeChomCochain { arity: f.arity, parity: f.parity, values })
    }

    fn circ_lambda(
        &self,
        f: &TildeChomCochain<S>,
        i: usize,
        g: &TildeChomCochain<S>,
    ) -> Result<LambdaSeries<TildeChomCochain<S>>> {
        let n = f.arity;
        let m = g.arity;
        if i < 1 || i > n {
            return Err(Error::IndexOutOfRange { index: i, arity: n });
        }
        let out_arity = n + m - 1;
        let spec = &self.module;
        let acc = circ_accumulate(
            spec,
            &|t| f.value(t),
            &|t| g.value(t),
            n,
            m,
            i,
            g.parity,
            true,
        );
        let rename = mu_to_lambda::<S>(out_arity);
        let parity = f.parity.plus(g.parity);
        let mut per_degree: Vec<BTreeMap<Vec<usize>, BTreeMap<usize, Poly<S>>>> = Vec::new();
        for ((tuple, target), poly) in acc {
            for (k, coeff) in poly.coeffs_in(Var::Aux(1)).into_iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                while per_degree.len() <= k {
                    per_degree.push(BTreeMap::new());
                }
                let comp = coeff.substitute(&rename);
                per_degree[k]
                    .entry(tuple.clone())
                    .or_default()
                    .insert(target, comp);
            }
        }
        let mut coeffs = Vec::with_capacity(per_degree.len());
        for layer in per_degree {
            let mut values = BTreeMap::new();
            for (tuple, comps) in layer {
                let elem = ModElem::new(spec, out_arity, comps)?;
                if !elem.is_zero() {
                    values.insert(tuple, elem);
                }
            }
            coeffs.push(TildeChomCochain { arity: out_arity, parity, values });
        }
        Ok(LambdaSeries::new(coeffs))
    }
}

impl<S: Scalar> TildePair<S> for TildeChomOperad<S> {
    type Quot = ChomCochain<S>;

    /// Compose values with the quotient projection.
    fn project(&self, f: &TildeChomCochain<S>) -> Result<ChomCochain<S>> {
        let values: BTreeMap<Vec<usize>, QuotElem<S>> = f
            .values
            .iter()
            .map(|(t, v)| (t.clone(), quotient_project(&self.module, v)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        Ok(ChomCochain { arity: f.arity, parity: f.parity, values })
    }

    /// The averaged embedding: `(1/n) sum_l iota_l` on generator tuples.
    /// Only defined over free modules.
    fn lift(&self, f: &ChomCochain<S>) -> Result<TildeChomCochain<S>> {
        if self.module.has_torsion() {
            return Err(Error::TorsionUnsupported("tilde lift"));
        }
        let n = f.arity;
        let mut values = BTreeMap::new();
        for (tuple, q) in &f.values {
            let lifted = if n == 0 {
                q.as_mod_elem()
            } else {
                let mut acc = ModElem::zero(n);
                for ell in 1..=n {
                    acc = acc.add(&iota_embed(&self.module, q, ell)?);
                }
                acc.scale(&(S::one() / S::from_integer(n as i64)))
            };
            if !lifted.is_zero() {
                values.insert(tuple.clone(), lifted);
            }
        }
        Ok(TildeChomCochain { arity: n, parity: f.parity, values })
    }
}

/// Bracket table for a lambda bracket: `[a_lam b]` as an arity-1 module
/// element (variables `d` and `l1`, where `l1` plays the role of lambda).
pub type LambdaBracketTable<S> = BTreeMap<(usize, usize), ModElem<S>>;

/// The master element of a lambda bracket table:
/// `X(a ⊗ b) = class of (-1)^(p(a)) [a_(l1) b]` in the arity-2 quotient.
/// `X` is odd; it is S_2-invariant iff the table is skewsymmetric.
pub fn x_from_lambda_bracket<S: Scalar>(
    operad: &ChomOperad<S>,
    table: &LambdaBracketTable<S>,
) -> Result<ChomCochain<S>> {
    let spec = operad.module();
    let mut values = BTreeMap::new();
    for ((a, b), elem) in table {
        if elem.arity() != 1 {
            return Err(Error::ArityMismatch { expected: 1, found: elem.arity() });
        }
        let sign: S = if spec.gen(*a).parity.is_odd() { -S::one() } else { S::one() };
        // Reinterpret the arity-1 value as an arity-2 representative: the
        // lambda of the bracket is the first slot variable.
        let as2 = ModElem::new(spec, 2, elem.comps().clone())?.scale(&sign);
        let q = quotient_project(spec, &as2);
        if !q.is_zero() {
            values.insert(vec![*a, *b], q);
        }
    }
    operad.cochain(2, Parity::Odd, values)
}

/// Recover the lambda bracket table: `[a_lam b] = (-1)^(p(a)) X(a ⊗ b)` with
/// the second slot variable evaluated at `-l1 - d`.
pub fn lambda_bracket_from_x<S: Scalar>(
    operad: &ChomOperad<S>,
    x: &ChomCochain<S>,
) -> Result<LambdaBracketTable<S>> {
    if x.arity != 2 {
        return Err(Error::ArityMismatch { expected: 2, found: x.arity });
    }
    let spec = operad.module();
    let mut table = BTreeMap::new();
    for (tuple, q) in &x.values {
        let (a, b) = (tuple[0], tuple[1]);
        let sign: S = if spec.gen(a).parity.is_odd() { -S::one() } else { S::one() };
        let mut bind = BTreeMap::new();
        bind.insert(lam(2), Poly::var(Var::D).neg().sub(&Poly::var(lam(1))));
        let elem = q.as_mod_elem().substitute(spec, &bind).scale(&sign);
        let elem = ModElem::new(spec, 1, elem.comps().clone())?;
        if !elem.is_zero() {
            table.insert((a, b), elem);
        }
    }
    Ok(table)
}

/// Basis of the weight slice of the invariants `W_(arity-1)`, for either
/// flavour. Elementary seeds live on sorted tuples and are symmetrized.
pub fn chom_invariant_basis<S: Scalar>(
    operad: &ChomOperad<S>,
    arity: usize,
    weight: i64,
) -> Result<Vec<ChomCochain<S>>> {
    let spec = operad.module().clone();
    let mut candidates = Vec::new();
    for tuple in gen_tuples(&spec, arity) {
        if !tuple.windows(2).all(|w| w[0] <= w[1]) {
            continue;
        }
        let input: i64 = tuple.iter().map(|&b| spec.gen(b).weight).sum();
        for target in 0..spec.len() {
            let deg = weight + input - spec.gen(target).weight;
            if deg < 0 {
                continue;
            }
            let nvars = match spec.gen(target).kind {
                GenKind::Free => arity,
                GenKind::TorsionD0 => arity.saturating_sub(1),
            };
            for mono in monomials(nvars, deg as u16) {
                let mut poly = Poly::one();
                for (k, &e) in mono.iter().enumerate() {
                    poly = poly.mul(&Poly::var(lam(k + 1)).pow(e as u32));
                }
                let elem = ModElem::monomial(&spec, arity, target, poly)?;
                let q = quotient_project(&spec, &elem);
                let parity = value_parity_for(&spec, &tuple, target);
                let mut values = BTreeMap::new();
                values.insert(tuple.clone(), q);
                let Ok(c) = operad.cochain(arity, parity, values) else { continue };
                let sym = crate::operad::symmetrize(operad, &c)?;
                if !sym.is_zero() {
                    candidates.push(sym);
                }
            }
        }
    }
    Ok(crate::hom::filter_independent(&candidates, |f| f.coord_map()))
}

/// Same for the tilde flavour (values may carry `d`).
pub fn tchom_invariant_basis<S: Scalar>(
    operad: &TildeChomOperad<S>,
    arity: usize,
    weight: i64,
) -> Result<Vec<TildeChomCochain<S>>> {
    let spec = operad.module().clone();
    let mut candidates = Vec::new();
    for tuple in gen_tuples(&spec, arity) {
        if !tuple.windows(2).all(|w| w[0] <= w[1]) {
            continue;
        }
        if tuple.iter().any(|&g| spec.gen(g).kind == GenKind::TorsionD0) {
            continue;
        }
        let input: i64 = tuple.iter().map(|&b| spec.gen(b).weight).sum();
        for target in 0..spec.len() {
            let deg = weight + input - spec.gen(target).weight;
            if deg < 0 {
                continue;
            }
            let with_d = spec.gen(target).kind == GenKind::Free;
            let nvars = arity + usize::from(with_d);
            for mono in monomials(nvars, deg as u16) {
                let mut poly = Poly::one();
                for (k, &e) in mono.iter().enumerate() {
                    let v = if with_d {
                        if k == 0 {
                            Var::D
                        } else {
                            lam(k)
                        }
                    } else {
                        lam(k + 1)
                    };
                    poly = poly.mul(&Poly::var(v).pow(e as u32));
                }
                let elem = ModElem::monomial(&spec, arity, target, poly)?;
                let parity = value_parity_for(&spec, &tuple, target);
                let mut values = BTreeMap::new();
                values.insert(tuple.clone(), elem);
                let Ok(c) = operad.cochain(arity, parity, values) else { continue };
                let sym = crate::operad::symmetrize(operad, &c)?;
                if !sym.is_zero() {
                    candidates.push(sym);
                }
            }
        }
    }
    Ok(crate::hom::filter_independent(&candidates, |f| f.coord_map()))
}

fn value_parity_for(spec: &ModuleSpec, tuple: &[usize], target: usize) -> Parity {
    spec.pi_parity(target).plus(parity_sum(pi_parities(spec, tuple)))
}

/// All exponent vectors of the given length summing to `total`.
pub(crate) fn monomials(nvars: usize, total: u16) -> Vec<Vec<u16>> {
    if nvars == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in monomials(nvars - 1, total - first) {
            let mut v = vec![first];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

//! Finitely generated `F[d]`-supermodules and their quotient canonical forms.
//!
//! A module is a list of generators, each either free (an `F[d]`-free summand)
//! or `d`-torsion (a one dimensional summand with `d` acting as zero). An
//! element of `V[l1..ln]` assigns to each generator a polynomial in `d` and
//! the lambda variables; the quotient by the image of `d + l1 + .. + ln` has
//! a closed canonical transversal for both generator kinds.

use crate::error::{Error, Result};
use crate::perm::Parity;
use crate::poly::{lam, Poly, Var};
use crate::scalar::Scalar;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Free,
    /// One dimensional summand with `d` acting as zero.
    TorsionD0,
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub name: String,
    pub parity: Parity,
    pub weight: i64,
    pub kind: GenKind,
}

/// A finitely generated `F[d]`-supermodule presented by generators.
#[derive(Debug, Clone)]
pub struct ModuleSpec {
    gens: Vec<Generator>,
}

impl ModuleSpec {
    pub fn new(gens: Vec<Generator>) -> Result<Self> {
        for (i, g) in gens.iter().enumerate() {
            if gens[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::Inconsistent(format!("duplicate generator `{}`", g.name)));
            }
        }
        Ok(ModuleSpec { gens })
    }

    /// Convenience constructor: `(name, parity, weight, kind)`.
    pub fn of(gens: &[(&str, Parity, i64, GenKind)]) -> Self {
        ModuleSpec {
            gens: gens
                .iter()
                .map(|(n, p, w, k)| Generator {
                    name: n.to_string(),
                    parity: *p,
                    weight: *w,
                    kind: *k,
                })
                .collect(),
        }
    }

    /// A single free even generator of weight `w`.
    pub fn free_rank1(name: &str, w: i64) -> Self {
        Self::of(&[(name, Parity::Even, w, GenKind::Free)])
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn gen(&self, idx: usize) -> &Generator {
        &self.gens[idx]
    }

    pub fn gens(&self) -> &[Generator] {
        &self.gens
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.gens
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn is_free(&self) -> bool {
        self.gens.iter().all(|g| g.kind == GenKind::Free)
    }

    pub fn has_torsion(&self) -> bool {
        !self.is_free()
    }

    /// Parity of a generator in the parity reversed module `Pi V`.
    pub fn pi_parity(&self, idx: usize) -> Parity {
        self.gens[idx].parity.flip()
    }
}

/// Weight of an element: a single integer, or zero, or mixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightClass {
    Zero,
    Homogeneous(i64),
    Inhomogeneous,
}

impl WeightClass {
    fn join(self, other: WeightClass) -> WeightClass {
        use WeightClass::*;
        match (self, other) {
            (Zero, x) | (x, Zero) => x,
            (Homogeneous(a), Homogeneous(b)) if a == b => Homogeneous(a),
            _ => Inhomogeneous,
        }
    }
}

/// An element of `V[l1..ln]`: per-generator polynomial in `d, l1..ln`.
///
/// Torsion generators carry no `d` (the action is zero, so `d` is reduced
/// away at construction).
#[derive(Debug, Clone, PartialEq)]
pub struct ModElem<S> {
    arity: usize,
    comps: BTreeMap<usize, Poly<S>>,
}

/// Canonical representative of `V[l1..ln] / <d + l1 + .. + ln>`.
///
/// Free generators carry a `d`-free polynomial in `l1..ln`; torsion
/// generators additionally have `ln` eliminated (`ln = -(l1+..+l(n-1))`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuotElem<S> {
    arity: usize,
    comps: BTreeMap<usize, Poly<S>>,
}

fn allowed_vars(arity: usize) -> Vec<Var> {
    let mut v = vec![Var::D];
    v.extend((1..=arity).map(lam));
    v
}

/// Sum `l1 + .. + ln` as a polynomial.
pub fn lambda_sum<S: Scalar>(arity: usize) -> Poly<S> {
    let mut acc = Poly::zero();
    for i in 1..=arity {
        acc = acc.add(&Poly::var(lam(i)));
    }
    acc
}

impl<S: Scalar> ModElem<S> {
    pub fn zero(arity: usize) -> Self {
        ModElem { arity, comps: BTreeMap::new() }
    }

    /// Build from per-generator coefficients, reducing `d` on torsion
    /// generators (where it acts as zero).
    pub fn new(spec: &ModuleSpec, arity: usize, comps: BTreeMap<usize, Poly<S>>) -> Result<Self> {
        let allowed = allowed_vars(arity);
        let mut reduced = BTreeMap::new();
        for (idx, p) in comps {
            if idx >= spec.len() {
                return Err(Error::UnknownGenerator(format!("#{idx}")));
            }
            for v in p.vars() {
                if !allowed.contains(v) {
                    return Err(Error::Parse(format!(
                        "variable {v} not allowed in arity {arity} module element"
                    )));
                }
            }
            let p = match spec.gen(idx).kind {
                GenKind::Free => p,
                GenKind::TorsionD0 => p.substitute_one(Var::D, &Poly::zero()),
            };
            if !p.is_zero() {
                reduced.insert(idx, p);
            }
        }
        Ok(ModElem { arity, comps: reduced })
    }

    /// `coeff * generator`.
    pub fn monomial(spec: &ModuleSpec, arity: usize, gen: usize, coeff: Poly<S>) -> Result<Self> {
        let mut comps = BTreeMap::new();
        comps.insert(gen, coeff);
        Self::new(spec, arity, comps)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn comps(&self) -> &BTreeMap<usize, Poly<S>> {
        &self.comps
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity, "module element arity");
        let mut comps = self.comps.clone();
        for (idx, p) in &other.comps {
            let entry = comps.entry(*idx).or_insert_with(Poly::zero);
            *entry = entry.add(p);
        }
        comps.retain(|_, p| !p.is_zero());
        ModElem { arity: self.arity, comps }
    }

    pub fn neg(&self) -> Self {
        ModElem {
            arity: self.arity,
            comps: self.comps.iter().map(|(i, p)| (*i, p.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.arity);
        }
        ModElem {
            arity: self.arity,
            comps: self.comps.iter().map(|(i, p)| (*i, p.scale(c))).collect(),
        }
    }

    /// Multiply by a polynomial in the lambda variables (no `d`), or in `d`
    /// too for fully free modules.
    pub fn mul_poly(&self, spec: &ModuleSpec, q: &Poly<S>) -> Self {
        let mut comps = BTreeMap::new();
        for (idx, p) in &self.comps {
            let q = match spec.gen(*idx).kind {
                GenKind::Free => q.clone(),
                GenKind::TorsionD0 => q.substitute_one(Var::D, &Poly::zero()),
            };
            let r = p.mul(&q);
            if !r.is_zero() {
                comps.insert(*idx, r);
            }
        }
        ModElem { arity: self.arity, comps }
    }

    /// The module action of `d` on a value in `V[l1..ln]` shifted by the
    /// lambda variables: multiply free components by `d + l1 + .. + ln`
    /// and torsion components by `l1 + .. + ln`.
    pub fn apply_shifted_partial(&self, spec: &ModuleSpec) -> Self {
        let lsum = lambda_sum::<S>(self.arity);
        let with_d = Poly::var(Var::D).add(&lsum);
        let mut comps = BTreeMap::new();
        for (idx, p) in &self.comps {
            let factor = match spec.gen(*idx).kind {
                GenKind::Free => &with_d,
                GenKind::TorsionD0 => &lsum,
            };
            let r = p.mul(factor);
            if !r.is_zero() {
                comps.insert(*idx, r);
            }
        }
        ModElem { arity: self.arity, comps }
    }

    /// Apply a variable substitution to every component, re-reducing torsion.
    pub fn substitute(&self, spec: &ModuleSpec, bindings: &BTreeMap<Var, Poly<S>>) -> Self {
        let mut comps = BTreeMap::new();
        for (idx, p) in &self.comps {
            let mut r = p.substitute(bindings);
            if spec.gen(*idx).kind == GenKind::TorsionD0 {
                r = r.substitute_one(Var::D, &Poly::zero());
            }
            if !r.is_zero() {
                comps.insert(*idx, r);
            }
        }
        ModElem { arity: self.arity, comps }
    }

    /// Apply a linear-in-coefficients operator to every component.
    pub fn map_components(&self, f: impl Fn(&Poly<S>) -> Poly<S>) -> Self {
        let mut comps = BTreeMap::new();
        for (idx, p) in &self.comps {
            let r = f(p);
            if !r.is_zero() {
                comps.insert(*idx, r);
            }
        }
        ModElem { arity: self.arity, comps }
    }

    /// Parity of the element in `V` (not parity reversed).
    pub fn parity(&self, spec: &ModuleSpec) -> Result<Option<Parity>> {
        let mut found: Option<Parity> = None;
        for idx in self.comps.keys() {
            let p = spec.gen(*idx).parity;
            match found {
                None => found = Some(p),
                Some(q) if q == p => {}
                Some(_) => return Err(Error::InhomogeneousParity),
            }
        }
        Ok(found)
    }

    /// Conformal weight: generator weight plus total degree in `d` and
    /// all lambda variables, which must agree across all terms.
    pub fn weight(&self, spec: &ModuleSpec) -> WeightClass {
        let mut acc = WeightClass::Zero;
        for (idx, p) in &self.comps {
            let base = spec.gen(*idx).weight;
            for (mono, _) in p.iter_terms() {
                let deg: i64 = mono.iter().map(|(_, e)| *e as i64).sum();
                acc = acc.join(WeightClass::Homogeneous(base + deg));
            }
        }
        acc
    }

    pub fn render(&self, spec: &ModuleSpec) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        self.comps
            .iter()
            .map(|(idx, p)| format!("({p})*{}", spec.gen(*idx).name))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl<S: Scalar> QuotElem<S> {
    pub fn zero(arity: usize) -> Self {
        QuotElem { arity, comps: BTreeMap::new() }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn comps(&self) -> &BTreeMap<usize, Poly<S>> {
        &self.comps
    }

    /// View the canonical representative as a module element.
    pub fn as_mod_elem(&self) -> ModElem<S> {
        ModElem { arity: self.arity, comps: self.comps.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity, "quotient element arity");
        let m = self.as_mod_elem().add(&other.as_mod_elem());
        QuotElem { arity: self.arity, comps: m.comps }
    }

    pub fn neg(&self) -> Self {
        QuotElem { arity: self.arity, comps: self.as_mod_elem().neg().comps }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &S) -> Self {
        QuotElem { arity: self.arity, comps: self.as_mod_elem().scale(c).comps }
    }

    /// Multiply by a polynomial in the lambda variables and re-canonicalize.
    pub fn mul_poly(&self, spec: &ModuleSpec, q: &Poly<S>) -> Self {
        quotient_project(spec, &self.as_mod_elem().mul_poly(spec, q))
    }

    /// Apply a lambda-variable substitution and re-canonicalize.
    pub fn substitute(&self, spec: &ModuleSpec, bindings: &BTreeMap<Var, Poly<S>>) -> Self {
        quotient_project(spec, &self.as_mod_elem().substitute(spec, bindings))
    }

    /// Apply `d/dl_j - d/dl_i` to the canonical representative.
    ///
    /// This descends to the quotient because the operator commutes with
    /// multiplication by `d + l1 + .. + ln`; torsion components are
    /// re-canonicalized afterwards.
    pub fn lambda_derivative(&self, spec: &ModuleSpec, j: usize, i: usize) -> Self {
        let m = self.as_mod_elem().map_components(|p| {
            p.partial(lam(j)).sub(&p.partial(lam(i)))
        });
        quotient_project(spec, &m)
    }

    pub fn parity(&self, spec: &ModuleSpec) -> Result<Option<Parity>> {
        self.as_mod_elem().parity(spec)
    }

    pub fn weight(&self, spec: &ModuleSpec) -> WeightClass {
        self.as_mod_elem().weight(spec)
    }

    pub fn render(&self, spec: &ModuleSpec) -> String {
        self.as_mod_elem().render(spec)
    }
}

/// Project a module element onto the canonical transversal of
/// `V[l1..ln] / <d + l1 + .. + ln>`.
///
/// Free generators: substitute `d -> -(l1+..+ln)`. Torsion generators:
/// `d` already acts as zero; substitute `ln -> -(l1+..+l(n-1))`.
pub fn quotient_project<S: Scalar>(spec: &ModuleSpec, e: &ModElem<S>) -> QuotElem<S> {
    let n = e.arity;
    let neg_lsum = lambda_sum::<S>(n).neg();
    let mut comps = BTreeMap::new();
    for (idx, p) in &e.comps {
        let r = match spec.gen(*idx).kind {
            GenKind::Free => p.substitute_one(Var::D, &neg_lsum),
            GenKind::TorsionD0 => {
                let p = p.substitute_one(Var::D, &Poly::zero());
                if n == 0 {
                    p
                } else {
                    let mut partial = Poly::zero();
                    for i in 1..n {
                        partial = partial.add(&Poly::var(lam(i)));
                    }
                    p.substitute_one(lam(n), &partial.neg())
                }
            }
        };
        if !r.is_zero() {
            comps.insert(*idx, r);
        }
    }
    QuotElem { arity: n, comps }
}

/// The embedding `iota_l`: substitute `l_l -> -d - l1 - .. (omit l) .. - ln`
/// into the canonical representative. Defined only for free modules;
/// `quotient_project(iota_embed(q, l)) == q`.
pub fn iota_embed<S: Scalar>(spec: &ModuleSpec, q: &QuotElem<S>, ell: usize) -> Result<ModElem<S>> {
    let n = q.arity;
    if ell < 1 || ell > n {
        return Err(Error::IndexOutOfRange { index: ell, arity: n });
    }
    if spec.has_torsion() {
        return Err(Error::TorsionUnsupported("iota embedding"));
    }
    let mut repl = Poly::var(Var::D).neg();
    for i in 1..=n {
        if i != ell {
            repl = repl.sub(&Poly::var(lam(i)));
        }
    }
    let mut bindings = BTreeMap::new();
    bindings.insert(lam(ell), repl);
    Ok(q.as_mod_elem().substitute(spec, &bindings))
}

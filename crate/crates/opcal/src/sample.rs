//! Deterministic samplers for randomized identity suites.
//!
//! Every sample is a pure function of `(seed, salt)`, so suites are
//! reproducible and failures can be replayed exactly.

use crate::chiral::{ChiralCochain, ChiralOperad, TildeChiralCochain, TildeChiralOperad};
use crate::chom::{ChomCochain, ChomOperad, TildeChomCochain, TildeChomOperad};
use crate::fdmod::{GenKind, ModuleSpec};
use crate::hom::{HomCochain, HomOperad};
use crate::perm::{parity_sum, Parity};
use crate::poly::{lam, Poly, Var};
use crate::{rat, QModElem, QPoly, QQuotElem, Rat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy)]
pub struct Sampler {
    seed: u64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { seed }
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(salt))
    }

    fn small(rng: &mut ChaCha8Rng) -> Rat {
        rat(rng.gen_range(-2i64..=2))
    }

    /// Random polynomial in the given variables, total degree <= max_deg.
    fn poly(rng: &mut ChaCha8Rng, vars: &[Var], max_deg: u16, terms: usize) -> QPoly {
        let mut acc = QPoly::zero();
        for _ in 0..terms {
            let mut mono = QPoly::constant(Self::small(rng));
            let mut budget = max_deg;
            for &v in vars {
                if budget == 0 {
                    break;
                }
                let e = rng.gen_range(0..=budget.min(2));
                budget -= e;
                mono = mono.mul(&QPoly::var(v).pow(e as u32));
            }
            acc = acc.add(&mono);
        }
        acc
    }

    /// Random parity-homogeneous endomorphism operad cochain.
    pub fn hom_cochain(
        &self,
        op: &HomOperad<Rat>,
        arity: usize,
        parity: Parity,
        salt: u64,
    ) -> HomCochain<Rat> {
        let mut rng = self.rng(salt.wrapping_add(arity as u64) ^ 0x48);
        let spec = op.module();
        let mut values = BTreeMap::new();
        for tuple in op.tuples(arity) {
            let input = parity_sum(tuple.iter().map(|&b| spec.pi_parity(b)));
            let target_parity = parity.plus(input);
            let coords: Vec<Rat> = (0..op.dim())
                .map(|b| {
                    if spec.pi_parity(b) == target_parity {
                        Self::small(&mut rng)
                    } else {
                        rat(0)
                    }
                })
                .collect();
            values.insert(tuple, coords);
        }
        op.cochain(arity, parity, values).expect("sampled cochain is homogeneous")
    }

    fn free_targets(spec: &ModuleSpec, tuple: &[usize], parity: Parity) -> Vec<usize> {
        let input = parity_sum(tuple.iter().map(|&b| spec.pi_parity(b)));
        (0..spec.len())
            .filter(|&b| spec.pi_parity(b) == parity.plus(input))
            .collect()
    }

    /// Random Chom cochain over a free module (quotient-valued).
    pub fn chom_cochain(
        &self,
        op: &ChomOperad<Rat>,
        arity: usize,
        parity: Parity,
        salt: u64,
    ) -> ChomCochain<Rat> {
        let spec = op.module();
        assert!(spec.is_free(), "sampler only draws over free modules");
        let mut rng = self.rng(salt.wrapping_add(arity as u64) ^ 0xC0);
        let lam_vars: Vec<Var> = (1..=arity).map(lam).collect();
        let mut values = BTreeMap::new();
        for tuple in op.tuples(arity) {
            let mut comps = BTreeMap::new();
            for b in Self::free_targets(spec, &tuple, parity) {
                let p = Self::poly(&mut rng, &lam_vars, 2, 2);
                if !p.is_zero() {
                    comps.insert(b, p);
                }
            }
            let elem = QModElem::new(spec, arity, comps).expect("sampled element");
            values.insert(tuple, crate::fdmod::quotient_project(spec, &elem));
        }
        op.cochain(arity, parity, values).expect("sampled chom cochain")
    }

    /// Random tilde-Chom cochain over a free module (polynomial-valued).
    pub fn tchom_cochain(
        &self,
        op: &TildeChomOperad<Rat>,
        arity: usize,
        parity: Parity,
        salt: u64,
    ) -> TildeChomCochain<Rat> {
        let spec = op.module();
        assert!(spec.is_free(), "sampler only draws over free modules");
        let mut rng = self.rng(salt.wrapping_add(arity as u64) ^ 0x7E);
        let mut vars: Vec<Var> = vec![Var::D];
        vars.extend((1..=arity).map(lam));
        let mut values = BTreeMap::new();
        for tuple in op.tuples(arity) {
            let mut comps = BTreeMap::new();
            for b in Self::free_targets(spec, &tuple, parity) {
                let p = Self::poly(&mut rng, &vars, 2, 2);
                if !p.is_zero() {
                    comps.insert(b, p);
                }
            }
            values.insert(tuple, QModElem::new(spec, arity, comps).expect("sampled element"));
        }
        op.cochain(arity, parity, values).expect("sampled tchom cochain")
    }

    /// Random quotient chiral cochain: the deepest pole layer is drawn
    /// freely, shallower seeds follow by the numerator descent
    /// `f(pole d) = (d/dl2 - d/dl1) f(pole d+1)`. Arity <= 2 only (one
    /// hyperplane), which is all the randomized chiral suites use.
    pub fn chiral_cochain(
        &self,
        op: &ChiralOperad<Rat>,
        arity: usize,
        parity: Parity,
        salt: u64,
    ) -> ChiralCochain<Rat> {
        let spec = op.module();
        assert!(spec.is_free(), "sampler only draws over free modules");
        assert!(arity <= 2, "random chiral cochains are drawn at arity <= 2");
        let mut rng = self.rng(salt.wrapping_add(arity as u64) ^ 0xCA);
        let lam_vars: Vec<Var> = (1..=arity).map(lam).collect();
        let depth = 2 + op.window() as u16;
        let mut seeds = BTreeMap::new();
        for tuple in op.tuples(arity) {
            let mut comps = BTreeMap::new();
            for b in Self::free_targets(spec, &tuple, parity) {
                let p = Self::poly(&mut rng, &lam_vars, depth, 3);
                if !p.is_zero() {
                    comps.insert(b, p);
                }
            }
            let elem = QModElem::new(spec, arity, comps).expect("sampled element");
            let deepest: QQuotElem = crate::fdmod::quotient_project(spec, &elem);
            if arity < 2 {
                seeds.insert((tuple.clone(), Vec::new()), deepest);
                continue;
            }
            let mut level = deepest;
            for k in (0..=op.window()).rev() {
                seeds.insert((tuple.clone(), vec![k as u32]), level.clone());
                level = level.lambda_derivative(spec, 2, 1);
            }
        }
        op.cochain(arity, parity, seeds).expect("sampled chiral cochain")
    }

    /// Random tilde chiral cochain, deepest layer free, descent-derived.
    pub fn tchiral_cochain(
        &self,
        op: &TildeChiralOperad<Rat>,
        arity: usize,
        parity: Parity,
        salt: u64,
    ) -> TildeChiralCochain<Rat> {
        let spec = op.module();
        assert!(spec.is_free(), "sampler only draws over free modules");
        assert!(arity <= 2, "random chiral cochains are drawn at arity <= 2");
        let mut rng = self.rng(salt.wrapping_add(arity as u64) ^ 0x7C);
        let depth = 2 + op.window() as u16;
        let mut vars: Vec<Var> = vec![Var::D];
        vars.extend((1..=arity).map(lam));
        let mut seeds = BTreeMap::new();
        for tuple in op.tuples(arity) {
            let mut comps = BTreeMap::new();
            for b in Self::free_targets(spec, &tuple, parity) {
                let p = Self::poly(&mut rng, &vars, depth, 3);
                if !p.is_zero() {
                    comps.insert(b, p);
                }
            }
            let deepest = QModElem::new(spec, arity, comps).expect("sampled element");
            if arity < 2 {
                seeds.insert((tuple.clone(), Vec::new()), deepest);
                continue;
            }
            let mut level = deepest;
            for k in (0..=op.window()).rev() {
                seeds.insert((tuple.clone(), vec![k as u32]), level.clone());
                level = level
                    .map_components(|p| p.partial(lam(2)).sub(&p.partial(lam(1))));
            }
        }
        op.cochain(arity, parity, seeds).expect("sampled tilde chiral cochain")
    }

    /// Random module element in `V[l1..ln]`.
    pub fn mod_elem(
        &self,
        spec: &ModuleSpec,
        arity: usize,
        parity: Parity,
        salt: u64,
    ) -> QModElem {
        let mut rng = self.rng(salt ^ 0xE1);
        let mut vars: Vec<Var> = Vec::new();
        vars.push(Var::D);
        vars.extend((1..=arity).map(lam));
        let mut comps = BTreeMap::new();
        for (idx, g) in spec.gens().iter().enumerate() {
            if g.parity != parity {
                continue;
            }
            let allowed: Vec<Var> = if g.kind == GenKind::TorsionD0 {
                vars.iter().copied().filter(|v| *v != Var::D).collect()
            } else {
                vars.clone()
            };
            let p = Self::poly(&mut rng, &allowed, 2, 2);
            if !p.is_zero() {
                comps.insert(idx, p);
            }
        }
        QModElem::new(spec, arity, comps).expect("sampled module element")
    }
}

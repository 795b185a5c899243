//! Exact multivariate polynomials over a scalar field.
//!
//! Variables come from a fixed global registry ([`Var`]) with a total order,
//! so every polynomial has a unique canonical form: the variable list is the
//! sorted set of variables that actually occur, exponent vectors are dense
//! over that list, and no zero coefficients are stored. Equality is
//! structural.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;

/// A variable of the global registry.
///
/// `D` is the module endomorphism, `Lam(i)` the lambda variable attached to
/// slot `i`, `Mu(i)` a scratch namespace used while assembling compositions,
/// `W(i)` the difference coordinate `z_i - z_n`, and `Aux(i)` a formal
/// bracket variable (the lambda or mu of a bracket identity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    D,
    Lam(u8),
    Mu(u8),
    W(u8),
    Aux(u8),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::D => write!(f, "d"),
            Var::Lam(i) => write!(f, "l{i}"),
            Var::Mu(i) => write!(f, "m{i}"),
            Var::W(i) => write!(f, "w{i}"),
            Var::Aux(i) => write!(f, "a{i}"),
        }
    }
}

/// Lambda variable for 1-based slot `i`.
pub fn lam(i: usize) -> Var {
    Var::Lam(u8::try_from(i).expect("slot index fits in u8"))
}

/// Difference coordinate `w_i = z_i - z_n`, 1-based.
pub fn wvar(i: usize) -> Var {
    Var::W(u8::try_from(i).expect("w index fits in u8"))
}

/// Scratch mu variable, 1-based.
pub fn mu(i: usize) -> Var {
    Var::Mu(u8::try_from(i).expect("mu index fits in u8"))
}

/// Multivariate polynomial in canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly<S> {
    vars: Vec<Var>,
    terms: BTreeMap<Vec<u16>, S>,
}

impl<S: Scalar> Poly<S> {
    pub fn zero() -> Self {
        Poly { vars: Vec::new(), terms: BTreeMap::new() }
    }

    pub fn constant(c: S) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        Poly { vars: Vec::new(), terms }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn int(n: i64) -> Self {
        Self::constant(S::from_integer(n))
    }

    pub fn var(v: Var) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![1], S::one());
        Poly { vars: vec![v], terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.vars.is_empty()
    }

    /// The constant term.
    pub fn constant_term(&self) -> S {
        let key = vec![0u16; self.vars.len()];
        self.terms.get(&key).cloned().unwrap_or_else(S::zero)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    /// Iterate over `(monomial as (Var, exp) pairs, coefficient)`.
    pub fn iter_terms(&self) -> impl Iterator<Item = (Vec<(Var, u16)>, &S)> + '_ {
        self.terms.iter().map(move |(exps, c)| {
            let mono: Vec<(Var, u16)> = self
                .vars
                .iter()
                .zip(exps.iter())
                .filter(|(_, &e)| e > 0)
                .map(|(&v, &e)| (v, e))
                .collect();
            (mono, c)
        })
    }

    /// Rebuild canonical form from raw term data.
    fn from_raw(vars: Vec<Var>, terms: BTreeMap<Vec<u16>, S>) -> Self {
        // Drop zero coefficients, then drop variable columns that no term uses.
        let terms: BTreeMap<Vec<u16>, S> =
            terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let used: Vec<bool> = (0..vars.len())
            .map(|j| terms.keys().any(|e| e[j] > 0))
            .collect();
        if used.iter().all(|&u| u) {
            return Poly { vars, terms };
        }
        let new_vars: Vec<Var> = vars
            .iter()
            .zip(used.iter())
            .filter(|(_, &u)| u)
            .map(|(&v, _)| v)
            .collect();
        let new_terms = terms
            .into_iter()
            .map(|(e, c)| {
                let ne: Vec<u16> = e
                    .iter()
                    .zip(used.iter())
                    .filter(|(_, &u)| u)
                    .map(|(&x, _)| x)
                    .collect();
                (ne, c)
            })
            .collect();
        Poly { vars: new_vars, terms: new_terms }
    }

    /// Align `self` onto a superset of variables (sorted).
    fn aligned_terms(&self, vars: &[Var]) -> BTreeMap<Vec<u16>, S> {
        let positions: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.binary_search(v).expect("aligned var present"))
            .collect();
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut ne = vec![0u16; vars.len()];
                for (j, &p) in positions.iter().enumerate() {
                    ne[p] = e[j];
                }
                (ne, c.clone())
            })
            .collect()
    }

    fn union_vars(&self, other: &Self) -> Vec<Var> {
        let mut vars: Vec<Var> = self.vars.clone();
        for &v in &other.vars {
            if vars.binary_search(&v).is_err() {
                vars.push(v);
            }
        }
        vars.sort();
        vars
    }

    pub fn add(&self, other: &Self) -> Self {
        let vars = self.union_vars(other);
        let mut terms = self.aligned_terms(&vars);
        for (e, c) in other.aligned_terms(&vars) {
            let entry = terms.entry(e).or_insert_with(S::zero);
            *entry = entry.clone() + c;
        }
        Self::from_raw(vars, terms)
    }

    pub fn neg(&self) -> Self {
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let vars = self.union_vars(other);
        let a = self.aligned_terms(&vars);
        let b = other.aligned_terms(&vars);
        let mut terms: BTreeMap<Vec<u16>, S> = BTreeMap::new();
        for (ea, ca) in &a {
            for (eb, cb) in &b {
                let e: Vec<u16> = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                let c = ca.clone() * cb.clone();
                let entry = terms.entry(e).or_insert_with(S::zero);
                *entry = entry.clone() + c;
            }
        }
        Self::from_raw(vars, terms)
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, a)| (e.clone(), a.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Simultaneous substitution of variables by polynomials.
    ///
    /// Bindings for variables absent from `self` are ignored. Because the
    /// substitution is applied to the original monomials in one pass, there
    /// is no variable capture.
    pub fn substitute(&self, bindings: &BTreeMap<Var, Poly<S>>) -> Self {
        if self.vars.iter().all(|v| !bindings.contains_key(v)) {
            return self.clone();
        }
        let mut acc = Self::zero();
        for (e, c) in &self.terms {
            let mut term = Self::constant(c.clone());
            for (j, &v) in self.vars.iter().enumerate() {
                if e[j] == 0 {
                    continue;
                }
                let factor = match bindings.get(&v) {
                    Some(p) => p.pow(e[j] as u32),
                    None => {
                        let mut t = BTreeMap::new();
                        t.insert(vec![e[j]], S::one());
                        Poly { vars: vec![v], terms: t }
                    }
                };
                term = term.mul(&factor);
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Substitute a single variable.
    pub fn substitute_one(&self, v: Var, p: &Poly<S>) -> Self {
        let mut b = BTreeMap::new();
        b.insert(v, p.clone());
        self.substitute(&b)
    }

    /// Formal partial derivative.
    pub fn partial(&self, v: Var) -> Self {
        let Some(j) = self.vars.iter().position(|&x| x == v) else {
            return Self::zero();
        };
        let mut terms: BTreeMap<Vec<u16>, S> = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[j] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[j] -= 1;
            let nc = c.clone() * S::from_integer(e[j] as i64);
            let entry = terms.entry(ne).or_insert_with(S::zero);
            *entry = entry.clone() + nc;
        }
        Self::from_raw(self.vars.clone(), terms)
    }

    /// Formal antiderivative in `v` with zero constant term: `v^k -> v^(k+1)/(k+1)`.
    pub fn integrate(&self, v: Var) -> Self {
        let mut acc = Self::zero();
        for (e, c) in &self.terms {
            let k = match self.vars.iter().position(|&x| x == v) {
                Some(j) => e[j],
                None => 0,
            };
            let mut mono = Self::constant(c.clone() / S::from_integer(k as i64 + 1));
            for (j, &x) in self.vars.iter().enumerate() {
                if e[j] > 0 {
                    let mut t = BTreeMap::new();
                    let exp = if x == v { e[j] + 1 } else { e[j] };
                    t.insert(vec![exp], S::one());
                    mono = mono.mul(&Poly { vars: vec![x], terms: t });
                }
            }
            if !self.vars.contains(&v) {
                mono = mono.mul(&Self::var(v));
            }
            acc = acc.add(&mono);
        }
        acc
    }

    pub fn degree_in(&self, v: Var) -> u16 {
        match self.vars.iter().position(|&x| x == v) {
            Some(j) => self.terms.keys().map(|e| e[j]).max().unwrap_or(0),
            None => 0,
        }
    }

    /// Total degree of each monomial must agree; `None` if inhomogeneous or zero.
    pub fn homogeneous_degree(&self) -> Option<u16> {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u16>());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn max_total_degree(&self) -> u16 {
        self.terms.keys().map(|e| e.iter().sum::<u16>()).max().unwrap_or(0)
    }

    /// Write `self` as a polynomial in `v`: coefficient of `v^k` at index `k`.
    pub fn coeffs_in(&self, v: Var) -> Vec<Poly<S>> {
        let deg = self.degree_in(v) as usize;
        let mut out = vec![Self::zero(); deg + 1];
        let j = self.vars.iter().position(|&x| x == v);
        for (e, c) in &self.terms {
            let k = j.map_or(0, |j| e[j] as usize);
            let mut mono_vars = Vec::new();
            let mut mono_exps = Vec::new();
            for (idx, &x) in self.vars.iter().enumerate() {
                if x != v && e[idx] > 0 {
                    mono_vars.push(x);
                    mono_exps.push(e[idx]);
                }
            }
            let mut t = BTreeMap::new();
            t.insert(mono_exps, c.clone());
            let mono = Poly { vars: mono_vars, terms: t };
            out[k] = out[k].add(&mono);
        }
        out
    }

    /// Exact division: `Some(q)` with `self = q * divisor`, or `None`.
    ///
    /// Uses lead-term reduction in the canonical monomial order; for the
    /// linear hyperplane forms this is all the factorization the crate needs.
    pub fn try_div_exact(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let vars = self.union_vars(divisor);
        let mut rem = self.aligned_terms(&vars);
        let div = divisor.aligned_terms(&vars);
        // Lead term of the divisor in graded-lex order on the aligned exponents.
        let (lead_e, lead_c) = div
            .iter()
            .max_by_key(|(e, _)| (e.iter().sum::<u16>(), (*e).clone()))
            .map(|(e, c)| (e.clone(), c.clone()))
            .expect("nonzero divisor");
        let mut quot: BTreeMap<Vec<u16>, S> = BTreeMap::new();
        while !rem.is_empty() {
            let (re, rc) = rem
                .iter()
                .max_by_key(|(e, _)| (e.iter().sum::<u16>(), (*e).clone()))
                .map(|(e, c)| (e.clone(), c.clone()))
                .expect("nonempty remainder");
            if !re.iter().zip(lead_e.iter()).all(|(a, b)| a >= b) {
                return None;
            }
            let qe: Vec<u16> = re.iter().zip(lead_e.iter()).map(|(a, b)| a - b).collect();
            let qc = rc / lead_c.clone();
            // rem -= (qe, qc) * divisor
            for (de, dc) in &div {
                let e: Vec<u16> = qe.iter().zip(de.iter()).map(|(a, b)| a + b).collect();
                let c = qc.clone() * dc.clone();
                let entry = rem.entry(e).or_insert_with(S::zero);
                *entry = entry.clone() - c;
            }
            rem.retain(|_, c| !c.is_zero());
            let entry = quot.entry(qe).or_insert_with(S::zero);
            *entry = entry.clone() + qc;
        }
        Some(Self::from_raw(vars, quot))
    }

    /// Parse an expression in the grammar `p/q | d | l<i> | w<i> | + - * ^ ( )`.
    pub fn parse(input: &str) -> Result<Self> {
        Parser { tokens: tokenize(input)?, pos: 0 }.parse_all()
    }
}

impl<S: Scalar> fmt::Display for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        // Highest total degree first, then lexicographic, for readable output.
        let mut keys: Vec<&Vec<u16>> = self.terms.keys().collect();
        keys.sort_by_key(|e| (std::cmp::Reverse(e.iter().sum::<u16>()), (*e).clone()));
        for e in keys {
            let c = &self.terms[e];
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono: Vec<String> = self
                .vars
                .iter()
                .zip(e.iter())
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| if k == 1 { format!("{v}") } else { format!("{v}^{k}") })
                .collect();
            if mono.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one_like() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", c, mono.join("*"))?;
            }
        }
        Ok(())
    }
}

trait OneLike {
    fn is_one_like(&self) -> bool;
}

impl<S: Scalar> OneLike for S {
    fn is_one_like(&self) -> bool {
        *self == S::one()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Var(Var),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

fn tokenize(input: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n: i64 = s
                    .parse()
                    .map_err(|_| Error::Parse(format!("integer literal `{s}` too large")))?;
                out.push(Tok::Int(n));
            }
            'd' => {
                out.push(Tok::Var(Var::D));
                i += 1;
            }
            'l' | 'w' | 'm' | 'a' => {
                let kind = c;
                i += 1;
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if start == i {
                    return Err(Error::Parse(format!("variable `{kind}` needs an index")));
                }
                let s: String = chars[start..i].iter().collect();
                let idx: u8 = s
                    .parse()
                    .map_err(|_| Error::Parse(format!("variable index `{s}` too large")))?;
                let v = match kind {
                    'l' => Var::Lam(idx),
                    'w' => Var::W(idx),
                    'm' => Var::Mu(idx),
                    _ => Var::Aux(idx),
                };
                out.push(Tok::Var(v));
            }
            _ => return Err(Error::Parse(format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn parse_all<S: Scalar>(&mut self) -> Result<Poly<S>> {
        let p = self.expr()?;
        if self.pos != self.tokens.len() {
            return Err(Error::Parse("trailing tokens after expression".into()));
        }
        Ok(p)
    }

    fn expr<S: Scalar>(&mut self) -> Result<Poly<S>> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.next();
                self.term::<S>()?.neg()
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    let t = self.term()?;
                    acc = acc.add(&t);
                }
                Some(Tok::Minus) => {
                    self.next();
                    let t = self.term::<S>()?;
                    acc = acc.sub(&t);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term<S: Scalar>(&mut self) -> Result<Poly<S>> {
        let mut acc = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.next();
            let f = self.factor()?;
            acc = acc.mul(&f);
        }
        Ok(acc)
    }

    fn factor<S: Scalar>(&mut self) -> Result<Poly<S>> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.next();
            match self.next() {
                Some(Tok::Int(n)) if n >= 0 => Ok(base.pow(n as u32)),
                _ => Err(Error::Parse("exponent must be a nonnegative integer".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom<S: Scalar>(&mut self) -> Result<Poly<S>> {
        match self.next() {
            Some(Tok::Int(n)) => {
                // Rational literal p/q binds tighter than general division,
                // which the grammar does not have.
                if let Some(Tok::Slash) = self.peek() {
                    self.next();
                    match self.next() {
                        Some(Tok::Int(q)) if q > 0 => {
                            Ok(Poly::constant(S::from_ratio(n, q)))
                        }
                        _ => Err(Error::Parse("denominator must be a positive integer".into())),
                    }
                } else {
                    Ok(Poly::int(n))
                }
            }
            Some(Tok::Var(v)) => Ok(Poly::var(v)),
            Some(Tok::Minus) => Ok(self.atom::<S>()?.neg()),
            Some(Tok::LParen) => {
                let p = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(p),
                    _ => Err(Error::Parse("missing closing parenthesis".into())),
                }
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, QPoly};

    fn p(s: &str) -> QPoly {
        QPoly::parse(s).unwrap()
    }

    #[test]
    fn cancellation() {
        assert_eq!(p("l1+l2").add(&p("-l2")), p("l1"));
    }

    #[test]
    fn mul_identity() {
        assert_eq!(p("d+2*l1").mul(&p("1")), p("d+2*l1"));
    }

    #[test]
    fn expand_product_of_linear_forms() {
        // (d+l1)(d+l2) = d^2 + (l1+l2)d + l1*l2
        assert_eq!(p("(d+l1)*(d+l2)"), p("d^2 + d*l1 + d*l2 + l1*l2"));
    }

    #[test]
    fn substitute_virasoro_canonical_form() {
        let mut b = BTreeMap::new();
        b.insert(Var::D, p("-l1-l2"));
        assert_eq!(p("d+2*l1").substitute(&b), p("l1-l2"));
    }

    #[test]
    fn substitute_empty_is_identity() {
        let q = p("d^2*l1 - 3/2*w1");
        assert_eq!(q.substitute(&BTreeMap::new()), q);
    }

    #[test]
    fn substitute_expands() {
        let mut b = BTreeMap::new();
        b.insert(Var::Lam(1), p("-d-l2"));
        assert_eq!(p("l1^2").substitute(&b), p("d^2 + 2*d*l2 + l2^2"));
    }

    #[test]
    fn partial_power_rule() {
        assert_eq!(p("l1^2*l2").partial(Var::Lam(1)), p("2*l1*l2"));
        assert_eq!(p("l1").partial(Var::Lam(2)), QPoly::zero());
        let q = p("l1*l2");
        assert_eq!(q.partial(Var::Lam(2)).sub(&q.partial(Var::Lam(1))), p("l1-l2"));
    }

    #[test]
    fn integrate_monomials() {
        assert_eq!(p("a1^2").integrate(Var::Aux(1)), p("1/3*a1^3"));
        assert_eq!(p("d").integrate(Var::Aux(1)), p("d*a1"));
    }

    #[test]
    fn exact_division_by_linear_form() {
        let prod = p("(w1-w2)*(w1+3)");
        assert_eq!(prod.try_div_exact(&p("w1-w2")), Some(p("w1+3")));
        assert_eq!(p("w1^2+1").try_div_exact(&p("w1-w2")), None);
    }

    #[test]
    fn rational_literals() {
        assert_eq!(p("3/2").constant_term(), rat(3) / rat(2));
        assert_eq!(p("1/2 + 1/2"), p("1"));
    }

    #[test]
    fn display_round_trip() {
        let q = p("d^2 - 3/2*l1*l2 + 7");
        assert_eq!(p(&q.to_string()), q);
    }

    #[test]
    fn coeffs_in_variable() {
        let q = p("(a1+d)^2");
        let cs = q.coeffs_in(Var::Aux(1));
        assert_eq!(cs.len(), 3);
        assert_eq!(cs[0], p("d^2"));
        assert_eq!(cs[1], p("2*d"));
        assert_eq!(cs[2], p("1"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_poly() -> impl Strategy<Value = QPoly> {
            let vars = prop::sample::subsequence(
                vec![Var::D, Var::Lam(1), Var::Lam(2), Var::W(1)],
                0..=3,
            );
            (vars, prop::collection::vec(((0u16..3, 0u16..3, 0u16..3), -4i64..=4), 0..5))
                .prop_map(|(vars, raw)| {
                    let mut acc = QPoly::zero();
                    for ((e1, e2, e3), c) in raw {
                        let exps = [e1, e2, e3];
                        let mut mono = QPoly::int(c);
                        for (j, &v) in vars.iter().enumerate() {
                            mono = mono.mul(&QPoly::var(v).pow(exps[j] as u32));
                        }
                        acc = acc.add(&mono);
                    }
                    acc
                })
        }

        proptest! {
            #[test]
            fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
                prop_assert_eq!(a.add(&b), b.add(&a));
                prop_assert_eq!(a.mul(&b), b.mul(&a));
                prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
                prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
                prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            }

            #[test]
            fn substitution_is_ring_hom(a in arb_poly(), b in arb_poly()) {
                let mut bind = BTreeMap::new();
                bind.insert(Var::D, QPoly::parse("-l1-l2").unwrap());
                bind.insert(Var::Lam(1), QPoly::parse("w1+1").unwrap());
                prop_assert_eq!(
                    a.mul(&b).substitute(&bind),
                    a.substitute(&bind).mul(&b.substitute(&bind))
                );
                prop_assert_eq!(
                    a.add(&b).substitute(&bind),
                    a.substitute(&bind).add(&b.substitute(&bind))
                );
            }

            #[test]
            fn leibniz_rule(a in arb_poly(), b in arb_poly()) {
                for v in [Var::D, Var::Lam(1)] {
                    let lhs = a.mul(&b).partial(v);
                    let rhs = a.partial(v).mul(&b).add(&a.mul(&b.partial(v)));
                    prop_assert_eq!(lhs, rhs);
                }
            }
        }
    }
}

//! Operad-agnostic algebra: symmetrization, box products, brackets, and the
//! action of the quotient invariants on the polynomial-valued invariants.
//!
//! A pseudo operad backend supplies the symmetric group action and the
//! insertion products; everything here is written against those traits. The
//! graded pieces `W_n = P(n+1)^{S_(n+1)}` carry the box product
//! `f box g = sum over (m+1, n)-shuffles of (f o_1 g)^(sigma^-1)` and its
//! conformal analogue where the first-slot insertion happens at `-lambda-d`.

use crate::error::{Error, Result};
use crate::perm::{enumerate_shuffles, Parity, Permutation};
use crate::scalar::{binomial, Scalar};

/// Vector-space structure shared by all cochain flavours.
pub trait Cochain<S: Scalar>: Clone + PartialEq {
    fn arity(&self) -> usize;
    fn parity(&self) -> Parity;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, c: &S) -> Self;

    fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

/// A collection of spaces with a right symmetric group action.
pub trait OperadSpace<S: Scalar> {
    type Elem: Cochain<S>;

    fn zero(&self, arity: usize, parity: Parity) -> Self::Elem;

    /// Right action `f^sigma`.
    fn act(&self, f: &Self::Elem, sigma: &Permutation) -> Result<Self::Elem>;
}

/// Linear pseudo operad: insertion products `f o_i g`, `i = 1..=arity(f)`.
pub trait PseudoOperad<S: Scalar>: OperadSpace<S> {
    fn circ(&self, f: &Self::Elem, i: usize, g: &Self::Elem) -> Result<Self::Elem>;
}

/// Conformal pseudo operad: an even endomorphism `d` and lambda-valued
/// insertion products, returned as polynomials in lambda.
pub trait ConformalPseudoOperad<S: Scalar>: OperadSpace<S> {
    fn partial(&self, f: &Self::Elem) -> Result<Self::Elem>;

    /// `f o^i_lambda g` as a polynomial in lambda with cochain coefficients.
    fn circ_lambda(
        &self,
        f: &Self::Elem,
        i: usize,
        g: &Self::Elem,
    ) -> Result<LambdaSeries<Self::Elem>>;
}

/// A conformal backend paired with its quotient: projection and (for free
/// modules) the averaged embedding back.
pub trait TildePair<S: Scalar>: ConformalPseudoOperad<S> {
    type Quot: Cochain<S>;

    fn project(&self, f: &Self::Elem) -> Result<Self::Quot>;
    fn lift(&self, f: &Self::Quot) -> Result<Self::Elem>;
}

/// Polynomial in one formal lambda with cochain coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSeries<E> {
    coeffs: Vec<E>,
}

impl<E> LambdaSeries<E> {
    pub fn new(coeffs: Vec<E>) -> Self {
        LambdaSeries { coeffs }
    }

    pub fn zero() -> Self {
        LambdaSeries { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[E] {
        &self.coeffs
    }
}

impl<E: Clone> LambdaSeries<E> {
    pub fn coeff_or<'a>(&'a self, k: usize, zero: &'a E) -> &'a E {
        self.coeffs.get(k).unwrap_or(zero)
    }
}

impl<E> LambdaSeries<E> {
    pub fn map<F: Fn(&E) -> Result<E>>(&self, f: F) -> Result<Self> {
        let coeffs: Result<Vec<E>> = self.coeffs.iter().map(f).collect();
        Ok(LambdaSeries { coeffs: coeffs? })
    }
}

impl<E> LambdaSeries<E> {
    pub fn is_zero_with(&self, is_zero: impl Fn(&E) -> bool) -> bool {
        self.coeffs.iter().all(is_zero)
    }
}

impl<E> LambdaSeries<E> {
    pub fn is_zero<S: Scalar>(&self) -> bool
    where
        E: Cochain<S>,
    {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add<S: Scalar>(&self, other: &Self, zero: &E) -> Self
    where
        E: Cochain<S>,
    {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| self.coeff_or(k, zero).add(other.coeff_or(k, zero)))
            .collect();
        LambdaSeries { coeffs }
    }

    pub fn scale<S: Scalar>(&self, c: &S) -> Self
    where
        E: Cochain<S>,
    {
        LambdaSeries { coeffs: self.coeffs.iter().map(|x| x.scale(c)).collect() }
    }

    pub fn neg<S: Scalar>(&self) -> Self
    where
        E: Cochain<S>,
    {
        LambdaSeries { coeffs: self.coeffs.iter().map(|x| x.neg()).collect() }
    }

    pub fn sub<S: Scalar>(&self, other: &Self, zero: &E) -> Self
    where
        E: Cochain<S>,
    {
        self.add(&other.neg(), zero)
    }

    /// Evaluate at lambda = 0.
    pub fn at_zero<S: Scalar>(&self, zero: &E) -> E
    where
        E: Cochain<S>,
    {
        self.coeff_or(0, zero).clone()
    }
}

/// `d^k` applied to a cochain through the backend endomorphism.
fn partial_pow<S: Scalar, B: ConformalPseudoOperad<S>>(
    backend: &B,
    f: &B::Elem,
    k: usize,
) -> Result<B::Elem> {
    let mut acc = f.clone();
    for _ in 0..k {
        acc = backend.partial(&acc)?;
    }
    Ok(acc)
}

/// Substitute `lambda -> -lambda - d` into a series, with `d` applied to the
/// coefficients from the left: the new coefficient of `lambda^j` is
/// `sum_(k>=j) C(k,j) (-1)^k d^(k-j) c_k`.
pub fn subst_neg_lambda_minus_partial<S: Scalar, B: ConformalPseudoOperad<S>>(
    backend: &B,
    series: &LambdaSeries<B::Elem>,
    zero: &B::Elem,
) -> Result<LambdaSeries<B::Elem>> {
    let n = series.coeffs.len();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = zero.clone();
        for k in j..n {
            let sign = if k % 2 == 0 { S::one() } else { -S::one() };
            let c: S = binomial::<S>(k, j) * sign;
            let term = partial_pow(backend, &series.coeffs[k], k - j)?.scale(&c);
            acc = acc.add(&term);
        }
        out.push(acc);
    }
    Ok(LambdaSeries { coeffs: out })
}

/// Evaluate a series at `lambda = -d` (coefficients hit by the endomorphism).
pub fn series_at_neg_partial<S: Scalar, B: ConformalPseudoOperad<S>>(
    backend: &B,
    series: &LambdaSeries<B::Elem>,
    zero: &B::Elem,
) -> Result<B::Elem> {
    let mut acc = zero.clone();
    for (k, c) in series.coeffs.iter().enumerate() {
        let sign = if k % 2 == 0 { S::one() } else { -S::one() };
        acc = acc.add(&partial_pow(backend, c, k)?.scale(&sign));
    }
    Ok(acc)
}

/// Full-group average `(1/n!) sum_sigma f^sigma`: a projector onto the
/// invariants, and the identity on them.
pub fn symmetrize<S: Scalar, B: OperadSpace<S>>(backend: &B, f: &B::Elem) -> Result<B::Elem> {
    let n = f.arity();
    let mut acc = backend.zero(n, f.parity());
    for sigma in Permutation::all(n) {
        acc = acc.add(&backend.act(f, &sigma)?);
    }
    Ok(acc.scale(&S::inv_factorial(n)))
}

pub fn is_invariant<S: Scalar, B: OperadSpace<S>>(backend: &B, f: &B::Elem) -> Result<bool> {
    for sigma in Permutation::all(f.arity()) {
        if backend.act(f, &sigma)? != *f {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Box product of invariants: for `f in W_n`, `g in W_m` (arities n+1, m+1),
/// `f box g = sum_(sigma in S_(m+1,n)) (f o_1 g)^(sigma^-1) in W_(n+m)`.
/// Zero when `f in W_(-1)`.
pub fn box_prod<S: Scalar, B: PseudoOperad<S>>(
    backend: &B,
    f: &B::Elem,
    g: &B::Elem,
) -> Result<B::Elem> {
    let n = f.arity() as i64 - 1;
    let m = g.arity() as i64 - 1;
    let out_arity = (f.arity() + g.arity()).saturating_sub(1);
    let out_parity = f.parity().plus(g.parity());
    let mut acc = backend.zero(out_arity, out_parity);
    if n < 0 {
        return Ok(acc);
    }
    let comp = backend.circ(f, 1, g)?;
    for sigma in enumerate_shuffles(m + 1, n) {
        acc = acc.add(&backend.act(&comp, &sigma.inverse())?);
    }
    Ok(acc)
}

/// Lie superalgebra bracket `[f, g] = f box g - (-1)^(p(f)p(g)) g box f`.
pub fn bracket<S: Scalar, B: PseudoOperad<S>>(
    backend: &B,
    f: &B::Elem,
    g: &B::Elem,
) -> Result<B::Elem> {
    let fg = box_prod(backend, f, g)?;
    let gf = box_prod(backend, g, f)?;
    let sign = Parity::pair_sign(f.parity(), g.parity());
    Ok(if sign < 0 { fg.add(&gf) } else { fg.sub(&gf) })
}

/// Conformal box product
/// `f box_lambda g = sum_(sigma in S_(m+1,n)) (f o^1_(-lambda-d) g)^(sigma^-1)`.
pub fn box_lambda<S: Scalar, B: ConformalPseudoOperad<S>>(
    backend: &B,
    f: &B::Elem,
    g: &B::Elem,
) -> Result<LambdaSeries<B::Elem>> {
    let n = f.arity() as i64 - 1;
    let m = g.arity() as i64 - 1;
    let out_arity = (f.arity() + g.arity()).saturating_sub(1);
    let out_parity = f.parity().plus(g.parity());
    let zero = backend.zero(out_arity, out_parity);
    if n < 0 {
        return Ok(LambdaSeries::zero());
    }
    let comp = backend.circ_lambda(f, 1, g)?;
    let comp = subst_neg_lambda_minus_partial(backend, &comp, &zero)?;
    let mut acc = LambdaSeries::zero();
    for sigma in enumerate_shuffles(m + 1, n) {
        let inv = sigma.inverse();
        let term = comp.map(|c| backend.act(c, &inv))?;
        acc = acc.add(&term, &zero);
    }
    Ok(acc)
}

/// Conformal bracket
/// `[f_lambda g] = f box_lambda g - (-1)^(p(f)p(g)) g box_(-lambda-d) f`.
pub fn lambda_bracket<S: Scalar, B: ConformalPseudoOperad<S>>(
    backend: &B,
    f: &B::Elem,
    g: &B::Elem,
) -> Result<LambdaSeries<B::Elem>> {
    let out_arity = (f.arity() + g.arity()).saturating_sub(1);
    let out_parity = f.parity().plus(g.parity());
    let zero = backend.zero(out_arity, out_parity);
    let fg = box_lambda(backend, f, g)?;
    let gf = box_lambda(backend, g, f)?;
    let gf = subst_neg_lambda_minus_partial(backend, &gf, &zero)?;
    let sign = Parity::pair_sign(f.parity(), g.parity());
    Ok(if sign < 0 { fg.add(&gf, &zero) } else { fg.sub(&gf, &zero) })
}

/// Action of an invariant `fbar` of the quotient operad on a tilde invariant:
/// `ftilde box_0 g - (-1)^(p(f)p(g)) g box_(-d) ftilde`, with `ftilde` the
/// representative computed by the averaged embedding.
pub fn w_action<S: Scalar, B: TildePair<S>>(
    backend: &B,
    fbar: &B::Quot,
    g: &B::Elem,
) -> Result<B::Elem> {
    let ftilde = backend.lift(fbar)?;
    w_action_with_rep(backend, &ftilde, g)
}

/// Same as [`w_action`] with an explicit tilde representative.
pub fn w_action_with_rep<S: Scalar, B: ConformalPseudoOperad<S>>(
    backend: &B,
    ftilde: &B::Elem,
    g: &B::Elem,
) -> Result<B::Elem> {
    let out_arity = (ftilde.arity() + g.arity()).saturating_sub(1);
    let out_parity = ftilde.parity().plus(g.parity());
    let zero = backend.zero(out_arity, out_parity);
    let t1 = box_lambda(backend, ftilde, g)?.at_zero(&zero);
    let t2 = series_at_neg_partial(backend, &box_lambda(backend, g, ftilde)?, &zero)?;
    let sign = Parity::pair_sign(ftilde.parity(), g.parity());
    Ok(if sign < 0 { t1.add(&t2) } else { t1.sub(&t2) })
}

/// An element of `W_n = P(n+1)^(S_(n+1))`, wrapped after verifying invariance.
#[derive(Debug, Clone, PartialEq)]
pub struct WElement<E> {
    elem: E,
}

impl<E> WElement<E> {
    pub fn elem(&self) -> &E {
        &self.elem
    }

    pub fn into_elem(self) -> E {
        self.elem
    }

    /// Wrap a cochain after verifying symmetric group invariance.
    pub fn new<S: Scalar, B: OperadSpace<S, Elem = E>>(backend: &B, elem: E) -> Result<Self>
    where
        E: Cochain<S>,
    {
        if !is_invariant(backend, &elem)? {
            return Err(Error::Inconsistent("cochain is not S_n invariant".into()));
        }
        Ok(WElement { elem })
    }

    /// Degree in the graded Lie superalgebra: arity minus one.
    pub fn degree<S: Scalar>(&self) -> i64
    where
        E: Cochain<S>,
    {
        self.elem.arity() as i64 - 1
    }
}

/// Polynomial in two formal variables (lambda, mu) with cochain coefficients,
/// used to state two-variable identities such as the conformal Jacobi
/// identity and the associator symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct Series2<E> {
    coeffs: std::collections::BTreeMap<(usize, usize), E>,
}

impl<E> Series2<E> {
    pub fn zero() -> Self {
        Series2 { coeffs: std::collections::BTreeMap::new() }
    }

    pub fn coeffs(&self) -> &std::collections::BTreeMap<(usize, usize), E> {
        &self.coeffs
    }
}

impl<E> Series2<E> {
    pub fn insert_add<S: Scalar>(&mut self, key: (usize, usize), val: E)
    where
        E: Cochain<S>,
    {
        if val.is_zero() {
            return;
        }
        match self.coeffs.remove(&key) {
            Some(old) => {
                let sum = old.add(&val);
                if !sum.is_zero() {
                    self.coeffs.insert(key, sum);
                }
            }
            None => {
                self.coeffs.insert(key, val);
            }
        }
    }

    pub fn add<S: Scalar>(&self, other: &Self) -> Self
    where
        E: Cochain<S>,
    {
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            out.insert_add(*k, v.clone());
        }
        out
    }

    pub fn neg<S: Scalar>(&self) -> Self
    where
        E: Cochain<S>,
    {
        Series2 { coeffs: self.coeffs.iter().map(|(k, v)| (*k, v.neg())).collect() }
    }

    pub fn sub<S: Scalar>(&self, other: &Self) -> Self
    where
        E: Cochain<S>,
    {
        self.add(&other.neg())
    }

    pub fn scale<S: Scalar>(&self, c: &S) -> Self
    where
        E: Cochain<S>,
    {
        Series2 { coeffs: self.coeffs.iter().map(|(k, v)| (*k, v.scale(c))).collect() }
    }

    pub fn is_zero<S: Scalar>(&self) -> bool
    where
        E: Cochain<S>,
    {
        self.coeffs.values().all(|v| v.is_zero())
    }

    /// Lift a series in lambda, multiplied by `lambda^extra.0 mu^extra.1`.
    pub fn from_lambda<S: Scalar>(series: &LambdaSeries<E>, extra: (usize, usize)) -> Self
    where
        E: Cochain<S>,
    {
        let mut out = Self::zero();
        for (k, c) in series.coeffs().iter().enumerate() {
            out.insert_add((extra.0 + k, extra.1), c.clone());
        }
        out
    }

    /// Lift a series in mu, multiplied by `lambda^extra.0 mu^extra.1`.
    pub fn from_mu<S: Scalar>(series: &LambdaSeries<E>, extra: (usize, usize)) -> Self
    where
        E: Cochain<S>,
    {
        let mut out = Self::zero();
        for (k, c) in series.coeffs().iter().enumerate() {
            out.insert_add((extra.0, extra.1 + k), c.clone());
        }
        out
    }

    /// Expand a series in a fresh variable `nu` at `nu = lambda + mu`,
    /// multiplied by `lambda^extra.0 mu^extra.1`.
    pub fn expand_at_lambda_plus_mu<S: Scalar>(
        series: &LambdaSeries<E>,
        extra: (usize, usize),
    ) -> Self
    where
        E: Cochain<S>,
    {
        let mut out = Self::zero();
        for (l, c) in series.coeffs().iter().enumerate() {
            for a in 0..=l {
                let coef: S = binomial(l, a);
                out.insert_add((extra.0 + a, extra.1 + l - a), c.scale(&coef));
            }
        }
        out
    }
}

/// Expand a series in `nu` at `nu = -lambda - mu - d`, multiplied by
/// `lambda^extra.0 mu^extra.1`.
pub fn expand_at_neg_lambda_mu_partial<S: Scalar, B: ConformalPseudoOperad<S>>(
    backend: &B,
    series: &LambdaSeries<B::Elem>,
    extra: (usize, usize),
) -> Result<Series2<B::Elem>> {
    let mut out = Series2::zero();
    for (l, c) in series.coeffs().iter().enumerate() {
        // (-lambda - mu - d)^l: multinomial over lambda^a mu^b d^k, all signs (-1)^l.
        for a in 0..=l {
            for b in 0..=(l - a) {
                let k = l - a - b;
                let multinomial: S = binomial::<S>(l, a) * binomial::<S>(l - a, b);
                let sign = if l % 2 == 0 { S::one() } else { -S::one() };
                let term = partial_pow(backend, c, k)?.scale(&(multinomial * sign));
                out.insert_add((extra.0 + a, extra.1 + b), term);
            }
        }
    }
    Ok(out)
}

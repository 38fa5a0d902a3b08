//! Dense polynomials over the rationals. Only what the discriminant and the
//! square-free decomposition need: division, gcd, derivative, resultant.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct QPoly {
    pub c: Vec<BigRational>,
}

impl QPoly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        QPoly { c }
    }

    pub fn from_ints(c: &[BigInt]) -> Self {
        QPoly::new(c.iter().map(|x| BigRational::from_integer(x.clone())).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn lc(&self) -> &BigRational {
        self.c.last().expect("nonzero polynomial")
    }

    pub fn monic(&self) -> Self {
        let l = self.lc().clone();
        QPoly::new(self.c.iter().map(|x| x / &l).collect())
    }

    pub fn derivative(&self) -> Self {
        QPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, x)| x * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let z = BigRational::zero();
        QPoly::new(
            (0..n)
                .map(|i| self.c.get(i).unwrap_or(&z) - o.c.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    /// Quotient and remainder; `d` must be nonzero.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let mut r = self.c.clone();
        let dd = d.degree();
        if self.is_zero() || self.degree() < dd {
            return (QPoly::new(vec![]), self.clone());
        }
        let mut q = vec![BigRational::zero(); self.degree() - dd + 1];
        let l = d.lc().clone();
        for i in (0..q.len()).rev() {
            let coef = &r[i + dd] / &l;
            if !coef.is_zero() {
                for (j, dj) in d.c.iter().enumerate() {
                    r[i + j] -= &coef * dj;
                }
            }
            q[i] = coef;
        }
        r.truncate(dd);
        (QPoly::new(q), QPoly::new(r))
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r;
        }
        if x.is_zero() {
            x
        } else {
            x.monic()
        }
    }

    /// Resultant by the Euclidean recurrence
    /// `Res(g, f) = lc(g)^(deg f - deg r) Res(g, r)` with `f = qg + r`.
    pub fn resultant(f: &Self, g: &Self) -> BigRational {
        if f.is_zero() || g.is_zero() {
            return BigRational::zero();
        }
        let mut acc = BigRational::one();
        let (mut f, mut g) = (f.clone(), g.clone());
        loop {
            let (df, dg) = (f.degree(), g.degree());
            if dg == 0 {
                return acc * pow(&g.c[0], df);
            }
            if df == 0 {
                return acc * pow(&f.c[0], dg);
            }
            let (_, r) = f.div_rem(&g);
            if r.is_zero() {
                return BigRational::zero();
            }
            if (df * dg) % 2 == 1 {
                acc = -acc;
            }
            acc *= pow(g.lc(), df - r.degree());
            f = g;
            g = r;
        }
    }

    /// Yun's algorithm on a monic polynomial: returns `(P_i, i)` with every
    /// `P_i` monic, square-free, pairwise coprime, and `f = prod P_i^i`.
    pub fn squarefree_decomposition(f: &Self) -> Vec<(Self, usize)> {
        let f = f.monic();
        let mut out = Vec::new();
        if f.degree() == 0 {
            return out;
        }
        let fp = f.derivative();
        let a0 = QPoly::gcd(&f, &fp);
        let mut b = f.div_rem(&a0).0;
        let c = fp.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree() > 0 {
            let a = QPoly::gcd(&b, &d);
            let bn = b.div_rem(&a).0;
            let cn = d.div_rem(&a).0;
            if a.degree() > 0 {
                out.push((a, i));
            }
            d = cn.sub(&bn.derivative());
            b = bn;
            i += 1;
        }
        out
    }
}

pub(crate) fn pow(x: &BigRational, e: usize) -> BigRational {
    let mut r = BigRational::one();
    for _ in 0..e {
        r *= x;
    }
    r
}

pub(crate) fn abs(x: BigRational) -> BigRational {
    x.abs()
}

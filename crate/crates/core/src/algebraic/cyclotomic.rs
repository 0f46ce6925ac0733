//! Exact arithmetic in ℚ(ζ_n) = ℚ[x]/Φ_n(x), power basis.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::dd::{CDd, Dd, DD_EPS};

/// Φ_n as integer coefficients, lowest degree first.
pub fn cyclotomic_polynomial(n: u64) -> Vec<BigInt> {
    assert!(n >= 1);
    // xⁿ − 1 divided by Φ_d for every proper divisor d.
    let mut p: Vec<BigInt> = vec![BigInt::zero(); n as usize + 1];
    p[0] = -BigInt::one();
    p[n as usize] = BigInt::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            p = exact_div_monic(&p, &cyclotomic_polynomial(d));
        }
    }
    p
}

fn exact_div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut r = num.to_vec();
    let dn = den.len() - 1;
    let mut q = vec![BigInt::zero(); r.len() - dn];
    for k in (dn..r.len()).rev() {
        let c = r[k].clone();
        if c.is_zero() {
            continue;
        }
        q[k - dn] = c.clone();
        for (i, di) in den.iter().enumerate() {
            r[k - dn + i] -= &c * di;
        }
    }
    debug_assert!(r.iter().all(|x| x.is_zero()));
    q
}

pub fn euler_phi(n: u64) -> u64 {
    (1..=n).filter(|k| k.gcd(&n) == 1).count() as u64
}

/// Shared data of ℚ(ζ_n).
#[derive(Debug)]
pub struct CyclotomicField {
    n: u64,
    phi: Vec<i64>,
}

impl CyclotomicField {
    /// Interned per n, so equal fields share one allocation.
    pub fn get(n: u64) -> Arc<CyclotomicField> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<CyclotomicField>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("field cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| {
                let phi = cyclotomic_polynomial(n).iter().map(|c| c.to_i64().expect("Φ_n coefficient fits in i64")).collect();
                Arc::new(CyclotomicField { n, phi })
            })
            .clone()
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }

    /// Exponents k coprime to n in ascending order; embedding j sends ζ to e^{2πik_j/n}.
    pub fn embedding_exponents(&self) -> Vec<u64> {
        (1..=self.n).filter(|k| k.gcd(&self.n) == 1).map(|k| k % self.n).collect::<Vec<_>>().into_iter().fold(Vec::new(), |mut acc, k| {
            acc.push(k);
            acc.sort();
            acc
        })
    }
}

/// Element of ℚ(ζ_n): (Σ num_j ζ^j) / den with gcd(num, den) = 1 and den > 0.
#[derive(Clone)]
pub struct CyclotomicNumber {
    field: Arc<CyclotomicField>,
    num: Vec<BigInt>,
    den: BigInt,
}

impl PartialEq for CyclotomicNumber {
    fn eq(&self, other: &Self) -> bool {
        self.field.n == other.field.n && self.num == other.num && self.den == other.den
    }
}

impl Eq for CyclotomicNumber {}

impl CyclotomicNumber {
    pub fn zero(n: u64) -> Self {
        let field = CyclotomicField::get(n);
        let h = field.degree();
        CyclotomicNumber { field, num: vec![BigInt::zero(); h], den: BigInt::one() }
    }

    pub fn one(n: u64) -> Self {
        Self::from_integer(n, 1)
    }

    pub fn from_integer(n: u64, k: i64) -> Self {
        let mut z = Self::zero(n);
        z.num[0] = BigInt::from(k);
        z
    }

    pub fn from_rational(n: u64, q: &BigRational) -> Self {
        let mut z = Self::zero(n);
        z.num[0] = q.numer().clone();
        z.den = q.denom().clone();
        z.normalize();
        z
    }

    /// ζ_n^k.
    pub fn zeta_pow(n: u64, k: i64) -> Self {
        let e = k.rem_euclid(n as i64) as usize;
        let mut c = vec![BigInt::zero(); e + 1];
        c[e] = BigInt::one();
        cyclotomic_reduce(&c, n)
    }

    pub fn modulus(&self) -> u64 {
        self.field.n
    }

    pub fn degree(&self) -> usize {
        self.field.degree()
    }

    pub fn field(&self) -> &Arc<CyclotomicField> {
        &self.field
    }

    /// Power-basis coefficients as rationals.
    pub fn coeffs(&self) -> Vec<BigRational> {
        self.num.iter().map(|c| BigRational::new(c.clone(), self.den.clone())).collect()
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    /// In ℤ[ζ_n] (power-basis integral).
    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.num.iter().skip(1).all(|c| c.is_zero())
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| BigRational::new(self.num[0].clone(), self.den.clone()))
    }

    fn normalize(&mut self) {
        if self.den.is_negative() {
            self.den = -self.den.clone();
            for c in &mut self.num {
                *c = -c.clone();
            }
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if !g.is_one() && !g.is_zero() {
            for c in &mut self.num {
                *c = &*c / &g;
            }
            self.den = &self.den / &g;
        }
        if self.is_zero() {
            self.den = BigInt::one();
        }
    }

    fn with(&self, num: Vec<BigInt>, den: BigInt) -> Self {
        let mut z = CyclotomicNumber { field: self.field.clone(), num, den };
        z.normalize();
        z
    }

    fn check_field(&self, other: &Self) {
        assert_eq!(self.field.n, other.field.n, "operands live in different cyclotomic fields");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_field(other);
        if self.den == other.den {
            let num = self.num.iter().zip(&other.num).map(|(a, b)| a + b).collect();
            return self.with(num, self.den.clone());
        }
        let num = self.num.iter().zip(&other.num).map(|(a, b)| a * &other.den + b * &self.den).collect();
        self.with(num, &self.den * &other.den)
    }

    pub fn neg(&self) -> Self {
        CyclotomicNumber { field: self.field.clone(), num: self.num.iter().map(|c| -c).collect(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_field(other);
        let h = self.degree();
        if self.is_rational() {
            let c = &self.num[0];
            return self.with(other.num.iter().map(|x| x * c).collect(), &self.den * &other.den);
        }
        if other.is_rational() {
            return other.mul(self);
        }
        let mut prod = vec![BigInt::zero(); 2 * h - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        let num = reduce_in_place(prod, &self.field.phi);
        self.with(num, &self.den * &other.den)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        self.with(self.num.iter().map(|c| c * q.numer()).collect(), &self.den * q.denom())
    }

    pub fn div_integer(&self, k: i64) -> Self {
        assert!(k != 0);
        self.with(self.num.clone(), &self.den * BigInt::from(k))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.modulus());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Complex conjugation ζ ↦ ζ⁻¹.
    pub fn conj(&self) -> Self {
        let n = self.field.n as usize;
        let mut lifted = vec![BigInt::zero(); n.max(1)];
        for (j, c) in self.num.iter().enumerate() {
            lifted[(n - j) % n] += c;
        }
        let num = reduce_in_place(lifted, &self.field.phi);
        self.with(num, self.den.clone())
    }

    /// The same element viewed in ℚ(ζ_m) for a multiple m of n.
    pub fn lift(&self, m: u64) -> Self {
        let n = self.field.n;
        assert!(m.is_multiple_of(n), "ℚ(ζ_{n}) is not a subfield of ℚ(ζ_{m})");
        let step = (m / n) as usize;
        let mut c = vec![BigInt::zero(); (self.num.len().max(1) - 1) * step + 1];
        for (j, x) in self.num.iter().enumerate() {
            c[j * step] = x.clone();
        }
        let mut z = cyclotomic_reduce(&c, m);
        z.den = self.den.clone();
        z.normalize();
        z
    }

    /// Evaluations under ζ ↦ e^{2πik/n}, k coprime to n ascending, with a bound on
    /// the absolute rounding error of each value.
    pub fn embeddings_with_error(&self) -> Vec<(CDd, f64)> {
        let n = self.field.n;
        let den = Dd::from_bigint(&self.den);
        let coeffs: Vec<Dd> = self.num.iter().map(|c| Dd::from_bigint(c).div(den)).collect();
        let mass: f64 = coeffs.iter().map(|c| c.abs().to_f64()).sum();
        self.field
            .embedding_exponents()
            .into_iter()
            .map(|k| {
                let z = CDd::root_of_unity(k, n);
                // Horner in ζ.
                let mut acc = CDd::ZERO;
                for c in coeffs.iter().rev() {
                    acc = acc * z + CDd::new(*c, Dd::ZERO);
                }
                let err = mass * (8.0 * coeffs.len() as f64 + 16.0) * DD_EPS;
                (acc, err)
            })
            .collect()
    }

    pub fn embeddings(&self) -> Vec<CDd> {
        self.embeddings_with_error().into_iter().map(|(z, _)| z).collect()
    }

    /// Value under the identity embedding ζ ↦ e^{2πi/n}.
    pub fn identity_embedding(&self) -> CDd {
        self.embeddings()[0]
    }

    /// Real elements as a rational combination a_0 + Σ a_j cos(2πj/n), 1 ≤ j < h/2,
    /// which is unique. None when the element is not real.
    pub fn cosine_form(&self) -> Option<Vec<(u64, BigRational)>> {
        let n = self.field.n;
        let h = self.degree();
        let r = (h / 2).max(1);
        // Columns: 1 and ζ^j + ζ^{-j} (= 2cos) reduced into the power basis.
        let mut cols: Vec<Vec<BigRational>> = vec![CyclotomicNumber::one(n).coeffs()];
        for j in 1..r as i64 {
            cols.push(CyclotomicNumber::zeta_pow(n, j).add(&CyclotomicNumber::zeta_pow(n, -j)).coeffs());
        }
        let mut aug: Vec<Vec<BigRational>> = (0..h)
            .map(|i| {
                let mut row: Vec<BigRational> = cols.iter().map(|c| c[i].clone()).collect();
                row.push(self.coeffs()[i].clone());
                row
            })
            .collect();
        let mut pivot_row = 0;
        let mut pivots = Vec::new();
        for col in 0..r {
            let Some(p) = (pivot_row..h).find(|&i| !aug[i][col].is_zero()) else { continue };
            aug.swap(pivot_row, p);
            let lead = aug[pivot_row][col].clone();
            for x in aug[pivot_row].iter_mut() {
                *x = &*x / &lead;
            }
            for i in 0..h {
                if i != pivot_row && !aug[i][col].is_zero() {
                    let f = aug[i][col].clone();
                    let src = aug[pivot_row].clone();
                    for (x, y) in aug[i].iter_mut().zip(&src) {
                        *x -= &f * y;
                    }
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        if aug[pivot_row..].iter().any(|row| !row[r].is_zero()) {
            return None;
        }
        let two = BigRational::from_integer(BigInt::from(2));
        let mut out = Vec::new();
        for (row, &col) in pivots.iter().enumerate() {
            let v = aug[row][r].clone();
            if v.is_zero() {
                continue;
            }
            out.push(if col == 0 { (0, v) } else { (col as u64, v * &two) });
        }
        Some(out)
    }

    pub fn to_f64_real(&self) -> f64 {
        self.identity_embedding().re.to_f64()
    }
}

/// Reduces polynomial coefficients modulo Φ_n.
pub fn cyclotomic_reduce(poly: &[BigInt], n: u64) -> CyclotomicNumber {
    let field = CyclotomicField::get(n);
    let h = field.degree();
    let mut p = poly.to_vec();
    if p.len() < h {
        p.resize(h, BigInt::zero());
    }
    let num = reduce_in_place(p, &field.phi);
    let mut z = CyclotomicNumber { field, num, den: BigInt::one() };
    z.normalize();
    z
}

/// Rational coefficients version of [`cyclotomic_reduce`].
pub fn cyclotomic_reduce_rational(poly: &[BigRational], n: u64) -> CyclotomicNumber {
    let den = poly.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = poly.iter().map(|c| c.numer() * (&den / c.denom())).collect();
    let mut z = cyclotomic_reduce(&ints, n);
    z.den = den;
    z.normalize();
    z
}

fn reduce_in_place(mut p: Vec<BigInt>, phi: &[i64]) -> Vec<BigInt> {
    let h = phi.len() - 1;
    for k in (h..p.len()).rev() {
        if p[k].is_zero() {
            continue;
        }
        let c = std::mem::take(&mut p[k]);
        for (i, &f) in phi.iter().enumerate().take(h) {
            if f != 0 {
                p[k - h + i] -= &c * f;
            }
        }
    }
    p.truncate(h);
    p.resize(h, BigInt::zero());
    p
}

/// Resultant of two rational polynomials (lowest degree first) by the Euclidean
/// remainder sequence.
pub fn resultant(a: &[BigRational], b: &[BigRational]) -> BigRational {
    let a = trim(a.to_vec());
    let b = trim(b.to_vec());
    if a.is_empty() || b.is_empty() {
        return BigRational::zero();
    }
    let (da, db) = (a.len() - 1, b.len() - 1);
    if db == 0 {
        return pow_rat(&b[0], da);
    }
    if da == 0 {
        return pow_rat(&a[0], db);
    }
    if da < db {
        let sign = if (da * db) % 2 == 1 { -BigRational::one() } else { BigRational::one() };
        return sign * resultant(&b, &a);
    }
    let r = trim(poly_rem(&a, &b));
    if r.is_empty() {
        return BigRational::zero();
    }
    let dr = r.len() - 1;
    // Res(a, b) = (−1)^{da·db} lc(b)^{da−dr} Res(b, r).
    let sign = if (da * db) % 2 == 1 { -BigRational::one() } else { BigRational::one() };
    sign * pow_rat(&b[db], da - dr) * resultant(&b, &r)
}

fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn pow_rat(x: &BigRational, k: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

fn poly_rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lc = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1;
        let c = &r[k] / &lc;
        if !c.is_zero() {
            for (i, bi) in b.iter().enumerate() {
                r[k - db + i] -= &c * bi;
            }
        }
        r.pop();
        r = trim(r);
    }
    r
}

/// N(x) = ∏ e_j(x), computed exactly as Res(Φ_n, x).
pub fn field_norm(x: &CyclotomicNumber) -> BigRational {
    if x.is_zero() {
        return BigRational::zero();
    }
    let phi: Vec<BigRational> = x.field.phi.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect();
    let num: Vec<BigRational> = x.num.iter().map(|c| BigRational::from_integer(c.clone())).collect();
    let res = resultant(&phi, &num);
    let h = x.degree();
    res / pow_rat(&BigRational::from_integer(x.den.clone()), h)
}

impl fmt::Debug for CyclotomicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for CyclotomicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (j, c) in self.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            parts.push(match j {
                0 => format!("{c}"),
                1 => format!("({c})ζ"),
                _ => format!("({c})ζ^{j}"),
            });
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{} [n={}]", parts.join(" + "), self.field.n)
    }
}

/// Human-readable cosine form of a real element, e.g. `28 + 8cos(2π·1/3)`.
pub fn format_cosine_form(x: &CyclotomicNumber) -> String {
    let n = x.modulus();
    let Some(terms) = x.cosine_form() else {
        return format!("{x}");
    };
    if terms.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (j, c)) in terms.iter().enumerate() {
        let body = if *j == 0 {
            format!("{}", c.abs())
        } else {
            let g = j.gcd(&n);
            let coef = if c.abs().is_one() { String::new() } else { format!("{}", c.abs()) };
            format!("{coef}cos(2π·{}/{})", j / g, n / g)
        };
        if i == 0 {
            if c.is_negative() {
                s.push('-');
            }
        } else {
            s.push_str(if c.is_negative() { " - " } else { " + " });
        }
        s.push_str(&body);
    }
    s
}

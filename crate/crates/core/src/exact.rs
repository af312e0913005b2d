//! Exact arithmetic in the ring Q[ln 2, ln(1/a)].
//!
//! Every constant of the bump construction lives in this ring: the matching
//! targets are rational, the closed-form coefficients are affine in `ln 2`,
//! and the head value carries one copy of `ln(1/a)`. Signs of `ln(1/a)`-free
//! elements are decided exactly by enclosing `ln 2` in rational intervals of
//! shrinking width; since `ln 2` is transcendental, a nonzero polynomial in it
//! never evaluates to zero and the refinement terminates.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial in `ln 2` and `ln(1/a)` with rational coefficients.
///
/// Keys are `(power of ln 2, power of ln(1/a))`; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExactReal {
    terms: BTreeMap<(u32, u32), BigRational>,
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn rational_to_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

impl ExactReal {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut out = Self::zero();
        out.add_term((0, 0), q);
        out
    }

    pub fn int(v: i64) -> Self {
        Self::from_rational(rational(v, 1))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(rational(num, den))
    }

    /// The symbol `ln 2`.
    pub fn ln2() -> Self {
        let mut out = Self::zero();
        out.add_term((1, 0), BigRational::one());
        out
    }

    /// The symbol `ln(1/a)`.
    pub fn log_inv_a() -> Self {
        let mut out = Self::zero();
        out.add_term((0, 1), BigRational::one());
        out
    }

    /// `q0 + q1 ln 2 + qa ln(1/a)`.
    pub fn affine(q0: BigRational, q1: BigRational, qa: BigRational) -> Self {
        let mut out = Self::zero();
        out.add_term((0, 0), q0);
        out.add_term((1, 0), q1);
        out.add_term((0, 1), qa);
        out
    }

    fn add_term(&mut self, key: (u32, u32), q: BigRational) {
        if q.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(BigRational::zero);
        *entry += q;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no `ln 2` or `ln(1/a)` term survives.
    pub fn is_rational(&self) -> bool {
        self.terms.keys().all(|&k| k == (0, 0))
    }

    pub fn depends_on_a(&self) -> bool {
        self.terms.keys().any(|&(_, l)| l > 0)
    }

    pub fn coefficient(&self, ln2_power: u32, log_inv_a_power: u32) -> BigRational {
        self.terms
            .get(&(ln2_power, log_inv_a_power))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Coefficients `(rational, ln 2, ln(1/a))` when the element is affine in both symbols.
    pub fn affine_parts(&self) -> Option<(BigRational, BigRational, BigRational)> {
        if self
            .terms
            .keys()
            .any(|&k| k != (0, 0) && k != (1, 0) && k != (0, 1))
        {
            return None;
        }
        Some((
            self.coefficient(0, 0),
            self.coefficient(1, 0),
            self.coefficient(0, 1),
        ))
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.terms {
            out.add_term(*k, c * q);
        }
        out
    }

    pub fn div_rational(&self, q: &BigRational) -> Self {
        assert!(!q.is_zero(), "division by zero rational");
        self.scale(&(BigRational::one() / q))
    }

    /// Floating-point value for a given `a`.
    pub fn to_f64(&self, a: f64) -> f64 {
        let ln2 = std::f64::consts::LN_2;
        let la = (1.0 / a).ln();
        self.terms
            .iter()
            .map(|(&(p, l), c)| rational_to_f64(c) * ln2.powi(p as i32) * la.powi(l as i32))
            .fold(0.0, |acc, t| acc + t)
    }

    /// Floating-point value of an `a`-independent element.
    pub fn value(&self) -> f64 {
        debug_assert!(!self.depends_on_a());
        self.to_f64(1.0)
    }

    /// Exact sign of an `a`-independent element.
    ///
    /// Returns `None` when the element still carries `ln(1/a)`.
    pub fn sign(&self) -> Option<Ordering> {
        if self.depends_on_a() {
            return None;
        }
        if self.is_zero() {
            return Some(Ordering::Equal);
        }
        if self.is_rational() {
            return Some(self.coefficient(0, 0).cmp(&BigRational::zero()));
        }
        let mut terms = 64;
        while terms <= 1 << 14 {
            let (lo, hi) = ln2_enclosure(terms);
            let (vlo, vhi) = self.interval_eval(&lo, &hi);
            if vlo.is_positive() {
                return Some(Ordering::Greater);
            }
            if vhi.is_negative() {
                return Some(Ordering::Less);
            }
            terms *= 2;
        }
        None
    }

    pub fn cmp_exact(&self, other: &Self) -> Option<Ordering> {
        (self.clone() - other.clone()).sign()
    }

    fn interval_eval(&self, lo: &BigRational, hi: &BigRational) -> (BigRational, BigRational) {
        let mut acc_lo = BigRational::zero();
        let mut acc_hi = BigRational::zero();
        for (&(p, _), c) in &self.terms {
            let plo = num_traits::pow(lo.clone(), p as usize);
            let phi = num_traits::pow(hi.clone(), p as usize);
            if c.is_positive() {
                acc_lo += c * &plo;
                acc_hi += c * &phi;
            } else {
                acc_lo += c * &phi;
                acc_hi += c * &plo;
            }
        }
        (acc_lo, acc_hi)
    }

    /// Serializable affine form; `None` for higher-degree elements.
    pub fn to_affine_json(&self) -> Option<ExactAffine> {
        self.affine_parts().map(|(q0, q1, qa)| ExactAffine {
            rational: rational_to_string(&q0),
            log2_coeff: rational_to_string(&q1),
            log_inv_a_coeff: rational_to_string(&qa),
        })
    }
}

/// `ln 2` lies in `[lo, hi]`, from the series `sum_k 1/(k 2^k)` truncated after `terms` terms.
pub fn ln2_enclosure(terms: usize) -> (BigRational, BigRational) {
    let mut sum = BigRational::zero();
    let mut pow = BigInt::one();
    for k in 1..=terms {
        pow *= 2;
        sum += BigRational::new(BigInt::one(), BigInt::from(k) * &pow);
    }
    let tail = BigRational::new(BigInt::one(), BigInt::from(terms + 1) * &pow);
    let hi = &sum + tail;
    (sum, hi)
}

impl fmt::Display for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(p, l), c) in &self.terms {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let mut symbol = String::new();
            if p > 0 {
                symbol.push_str("ln2");
                if p > 1 {
                    symbol.push_str(&format!("^{p}"));
                }
            }
            if l > 0 {
                if !symbol.is_empty() {
                    symbol.push('*');
                }
                symbol.push_str("ln(1/a)");
                if l > 1 {
                    symbol.push_str(&format!("^{l}"));
                }
            }
            if symbol.is_empty() {
                write!(f, "{}", rational_to_string(&mag))?;
            } else if mag.is_one() {
                write!(f, "{symbol}")?;
            } else {
                write!(f, "{} {symbol}", rational_to_string(&mag))?;
            }
        }
        Ok(())
    }
}

/// Parses `p/q`, an integer or a plain decimal such as `-1.375` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::InvalidParameter(format!("not a rational number: `{text}`"));
    if t.contains('/') {
        return t.parse::<BigRational>().map_err(|_| bad());
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits = format!("{int}{frac}");
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let q = BigRational::new(digits.parse().map_err(|_| bad())?, BigInt::from(10).pow(frac.len() as u32));
    Ok(if neg { -q } else { q })
}

/// JSON view of an element affine in `ln 2` and `ln(1/a)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactAffine {
    pub rational: String,
    pub log2_coeff: String,
    pub log_inv_a_coeff: String,
}

impl Add for ExactReal {
    type Output = ExactReal;
    fn add(mut self, rhs: ExactReal) -> ExactReal {
        for (k, c) in rhs.terms {
            self.add_term(k, c);
        }
        self
    }
}

impl Sub for ExactReal {
    type Output = ExactReal;
    fn sub(self, rhs: ExactReal) -> ExactReal {
        self + (-rhs)
    }
}

impl Neg for ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        self.scale(&-BigRational::one())
    }
}

impl Mul for ExactReal {
    type Output = ExactReal;
    fn mul(self, rhs: ExactReal) -> ExactReal {
        let mut out = ExactReal::zero();
        for (&(p1, l1), c1) in &self.terms {
            for (&(p2, l2), c2) in &rhs.terms {
                out.add_term((p1 + p2, l1 + l2), c1 * c2);
            }
        }
        out
    }
}

impl<'a> Add<&'a ExactReal> for &'a ExactReal {
    type Output = ExactReal;
    fn add(self, rhs: &ExactReal) -> ExactReal {
        self.clone() + rhs.clone()
    }
}

impl<'a> Sub<&'a ExactReal> for &'a ExactReal {
    type Output = ExactReal;
    fn sub(self, rhs: &ExactReal) -> ExactReal {
        self.clone() - rhs.clone()
    }
}

impl<'a> Mul<&'a ExactReal> for &'a ExactReal {
    type Output = ExactReal;
    fn mul(self, rhs: &ExactReal) -> ExactReal {
        self.clone() * rhs.clone()
    }
}

/// Solves `m x = rhs` for a nonsingular rational matrix and an exact right-hand side.
///
/// Returns `None` if `m` is singular.
pub fn solve_rational_system(
    m: &[Vec<BigRational>],
    rhs: &[ExactReal],
) -> Option<Vec<ExactReal>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut b: Vec<ExactReal> = rhs.to_vec();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let factor = &a[row][col] / &a[col][col];
            for k in col..n {
                let delta = &factor * &a[col][k];
                a[row][k] -= delta;
            }
            let delta = b[col].scale(&factor);
            b[row] = b[row].clone() - delta;
        }
    }
    Some((0..n).map(|i| b[i].div_rational(&a[i][i])).collect())
}

/// Exact determinant of a small rational matrix by cofactor expansion.
pub fn rational_determinant(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut det = BigRational::zero();
    for j in 0..n {
        let minor: Vec<Vec<BigRational>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][j] * rational_determinant(&minor);
        if j % 2 == 0 {
            det += term;
        } else {
            det -= term;
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3/5").unwrap(), rational(3, 5));
        assert_eq!(parse_rational("-1.375").unwrap(), rational(-11, 8));
        assert_eq!(parse_rational("7").unwrap(), rational(7, 1));
        assert_eq!(parse_rational(".5").unwrap(), rational(1, 2));
        for bad in ["", ".", "1e3", "a/b", "1.2.3", "--1"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn enclosure_brackets_ln2() {
        let (lo, hi) = ln2_enclosure(60);
        let ln2 = std::f64::consts::LN_2;
        assert!(rational_to_f64(&lo) <= ln2 + 1e-16);
        assert!(rational_to_f64(&hi) >= ln2 - 1e-16);
        assert!(rational_to_f64(&(hi - lo)) < 1e-18);
    }

    #[test]
    fn signs_of_ln2_combinations() {
        // 12 ln2 - 5 = 3.317... > 0
        let x = ExactReal::ln2().scale(&rational(12, 1)) - ExactReal::int(5);
        assert_eq!(x.sign(), Some(Ordering::Greater));
        // 8 ln2 - 5 = 0.545 > 0 ; 5 - 8 ln2 < 0
        let y = ExactReal::int(5) - ExactReal::ln2().scale(&rational(8, 1));
        assert_eq!(y.sign(), Some(Ordering::Less));
        // very close rational approximation: 0.693147 < ln2
        let z = ExactReal::ln2() - ExactReal::ratio(693147, 1_000_000);
        assert_eq!(z.sign(), Some(Ordering::Greater));
        // quadratic in ln2: ln2^2 - 0.480453 (ln2^2 = 0.4804530139...)
        let q = ExactReal::ln2() * ExactReal::ln2() - ExactReal::ratio(480453, 1_000_000);
        assert_eq!(q.sign(), Some(Ordering::Greater));
    }

    #[test]
    fn log_inv_a_blocks_sign_but_cancels() {
        let l = ExactReal::log_inv_a();
        assert_eq!(l.sign(), None);
        let zero = l.clone() - l;
        assert!(zero.is_zero());
        assert_eq!(zero.sign(), Some(Ordering::Equal));
    }

    #[test]
    fn display_and_affine_json() {
        let c2 = ExactReal::int(5) - ExactReal::ln2().scale(&rational(12, 1));
        assert_eq!(c2.to_string(), "5 - 12 ln2");
        let j = c2.to_affine_json().unwrap();
        assert_eq!(j.rational, "5");
        assert_eq!(j.log2_coeff, "-12");
        assert_eq!(j.log_inv_a_coeff, "0");
        let sq = c2.clone() * c2;
        assert!(sq.to_affine_json().is_none());
    }

    #[test]
    fn rational_solve_roundtrip() {
        let m = vec![
            vec![rational(2, 1), rational(1, 1)],
            vec![rational(1, 1), rational(3, 1)],
        ];
        let rhs = vec![ExactReal::ln2(), ExactReal::int(1)];
        let x = solve_rational_system(&m, &rhs).unwrap();
        // 2x + y = ln2, x + 3y = 1  ->  x = (3 ln2 - 1)/5, y = (2 - ln2)/5
        let x0 = (ExactReal::ln2().scale(&rational(3, 1)) - ExactReal::int(1))
            .div_rational(&rational(5, 1));
        assert_eq!(x[0], x0);
        assert_eq!(rational_determinant(&m), rational(5, 1));
    }
}

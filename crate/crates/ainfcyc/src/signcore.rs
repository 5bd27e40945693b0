//! Exact scalar arithmetic and the Koszul sign engine.
//!
//! Every sign in the crate is produced here: the other modules describe
//! *which* blocks of graded symbols move past each other and this module
//! decides the sign. Gradings are tracked as the pair (shifted degree
//! `|.|'`, form degree `#`) and a transposition of homogeneous blocks
//! costs `(-1)^{|f|'|g|' + #f #g}`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational number, always reduced, denominator > 0.
///
/// Serializes as `"p/q"`, or `"p"` when the denominator is 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Option<Self> {
        if self.0.is_zero() {
            None
        } else {
            Some(Rational(self.0.recip()))
        }
    }

    /// Floor of self, as a BigInt.
    pub fn floor_int(&self) -> BigInt {
        self.0.floor().to_integer()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Parses `"p"` or `"p/q"` with optional sign, exactly.
impl FromStr for Rational {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let n = BigInt::from_str(num.trim()).map_err(|e| format!("bad numerator {num:?}: {e}"))?;
        let d = BigInt::from_str(den.trim()).map_err(|e| format!("bad denominator {den:?}: {e}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        Ok(Rational(BigRational::new(n, d)))
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.0.is_zero(), "division by zero");
        Rational(self.0 / rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational(BigRational::one())
    }
}

/// Coefficient field abstraction shared by the whole crate.
///
/// Implemented by [`Rational`] and by the truncated Novikov scalars of the
/// filtered layer; all algebraic code is written once against this trait.
pub trait Scalar:
    Clone
    + PartialEq
    + Eq
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    fn from_rational(q: Rational) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rational(Rational::from_int(n))
    }

    /// Multiplicative inverse; `None` for zero.
    fn inv(&self) -> Option<Self>;

    /// Scale by an integer sign (+1 or -1) without cloning twice.
    fn signed(self, sign: i64) -> Self {
        debug_assert!(sign == 1 || sign == -1);
        if sign == 1 {
            self
        } else {
            -self
        }
    }
}

impl Scalar for Rational {
    fn from_rational(q: Rational) -> Self {
        q
    }

    fn inv(&self) -> Option<Self> {
        self.recip()
    }
}

/// Basis element of the underlying graded vector space.
///
/// `degree` is the unshifted grading `|e|`; the shifted degree `|e|' = |e| - 1`
/// is always derived via [`BasisElement::shifted_degree`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElement {
    pub id: String,
    pub degree: i64,
    pub is_unit: bool,
}

impl BasisElement {
    pub fn new(id: &str, degree: i64) -> Self {
        BasisElement { id: id.to_string(), degree, is_unit: false }
    }

    pub fn unit(id: &str, degree: i64) -> Self {
        BasisElement { id: id.to_string(), degree, is_unit: true }
    }

    pub fn shifted_degree(&self) -> i64 {
        self.degree - 1
    }
}

/// A homogeneous symbol with its shifted degree and form degree `#`.
///
/// `#(x) = 0`, `#(dx) = 1`, `#(d/dx) = -1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GradedSymbol {
    pub shifted_degree: i64,
    pub sharp: i64,
}

impl GradedSymbol {
    pub fn new(shifted_degree: i64, sharp: i64) -> Self {
        GradedSymbol { shifted_degree, sharp }
    }
}

/// Sign `(-1)^n` as an i64 in {+1, -1}.
pub fn sign_pow(n: i64) -> i64 {
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Sign picked up when the whole `left` block moves past the whole `right`
/// block: `(-1)^{|L|'|R|' + #L #R}` with degrees summed over each block.
///
/// Multiplicative in concatenation on either side.
pub fn koszul_sign(left: &[GradedSymbol], right: &[GradedSymbol]) -> i64 {
    let (ld, ls) = block_degrees(left);
    let (rd, rs) = block_degrees(right);
    sign_pow(ld * rd + ls * rs)
}

/// Same transposition sign from pre-summed block degrees.
pub fn koszul_sign_blocks(left: (i64, i64), right: (i64, i64)) -> i64 {
    sign_pow(left.0 * right.0 + left.1 * right.1)
}

fn block_degrees(block: &[GradedSymbol]) -> (i64, i64) {
    let mut d = 0;
    let mut s = 0;
    for g in block {
        d += g.shifted_degree;
        s += g.sharp;
    }
    (d, s)
}

/// Sum of shifted degrees `|e| - 1` over a word; 0 for the empty word.
pub fn shifted_degree_of_word(word: &[BasisElement]) -> i64 {
    word.iter().map(|e| e.shifted_degree()).sum()
}

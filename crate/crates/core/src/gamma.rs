//! The modular group `Γ = PSL₂(Z)`, its homomorphism `ψ` onto the group of
//! orientation-preserving affine automorphisms of `R`, normal forms in that
//! group, the character `ℓ`, and the kernel `N`.
//!
//! `ψ` is defined on generators by `S ↦ (z ↦ −z + ω + ω²)` and
//! `T ↦ (z ↦ ωz)`. Everything here is exact integer arithmetic; overflow is
//! an error.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::EisensteinInt;

fn to_i64(x: i128, what: &'static str) -> Result<i64> {
    i64::try_from(x).map_err(|_| Error::Overflow(what))
}

/// An element of `PSL₂(Z)`, stored as an integer matrix of determinant 1
/// whose first nonzero entry among `(a, b, c)` is positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GammaElt {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

impl GammaElt {
    pub const IDENTITY: Self = Self { a: 1, b: 0, c: 0, d: 1 };
    /// `[[0, −1], [1, 0]]`, stored with the leading sign flipped.
    pub const S: Self = Self { a: 0, b: 1, c: -1, d: 0 };
    pub const T: Self = Self { a: 1, b: 1, c: 0, d: 1 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = a as i128 * d as i128 - b as i128 * c as i128;
        if det != 1 {
            return Err(Error::Determinant(to_i64(det, "determinant")?));
        }
        Ok(Self::normalized(a, b, c, d))
    }

    fn normalized(a: i64, b: i64, c: i64, d: i64) -> Self {
        let lead = [a, b, c].into_iter().find(|&x| x != 0).unwrap_or(1);
        if lead < 0 {
            Self { a: -a, b: -b, c: -c, d: -d }
        } else {
            Self { a, b, c, d }
        }
    }

    /// `T^k`.
    pub fn t_pow(k: i64) -> Self {
        Self { a: 1, b: k, c: 0, d: 1 }
    }

    pub fn entries(&self) -> [[i64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        let (e, f, g, h) = (rhs.a as i128, rhs.b as i128, rhs.c as i128, rhs.d as i128);
        let w = "gamma mul";
        Ok(Self::normalized(
            to_i64(a * e + b * g, w)?,
            to_i64(a * f + b * h, w)?,
            to_i64(c * e + d * g, w)?,
            to_i64(c * f + d * h, w)?,
        ))
    }

    pub fn inverse(&self) -> Self {
        Self::normalized(self.d, -self.b, -self.c, self.a)
    }

    /// `(az + b)/(cz + d)`.
    pub fn act(&self, z: Complex64) -> Complex64 {
        let [[a, b], [c, d]] = self.entries().map(|r| r.map(|x| x as f64));
        (z * a + b) / (z * c + d)
    }

    /// `cz + d`; its square is the inverse of the derivative of the action.
    pub fn automorphy(&self, z: Complex64) -> Complex64 {
        z * self.c as f64 + self.d as f64
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }
}

impl fmt::Display for GammaElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Generators of `Γ` as they appear in words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    S,
    T,
    TInv,
}

impl Letter {
    pub fn inverse(self) -> Self {
        match self {
            Letter::S => Letter::S,
            Letter::T => Letter::TInv,
            Letter::TInv => Letter::T,
        }
    }

    pub fn to_gamma(self) -> GammaElt {
        match self {
            Letter::S => GammaElt::S,
            Letter::T => GammaElt::T,
            Letter::TInv => GammaElt::t_pow(-1),
        }
    }

    fn symbol(self) -> char {
        match self {
            Letter::S => 'S',
            Letter::T => 'T',
            Letter::TInv => 't',
        }
    }
}

/// A word in `S, T, T⁻¹`, kept freely reduced: no adjacent `T T⁻¹` and,
/// since `S² = 1` in `Γ`, no adjacent `S S`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn push(&mut self, l: Letter) {
        if self.letters.last() == Some(&l.inverse()) {
            self.letters.pop();
        } else {
            self.letters.push(l);
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &l in &other.letters {
            w.push(l);
        }
        w
    }

    pub fn inverse(&self) -> Word {
        self.letters.iter().rev().map(|l| l.inverse()).collect()
    }

    pub fn to_gamma(&self) -> Result<GammaElt> {
        self.letters
            .iter()
            .try_fold(GammaElt::IDENTITY, |acc, l| acc.mul(&l.to_gamma()))
    }

    /// A uniformly random sequence of `len` letters, then freely reduced.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Word {
        (0..len)
            .map(|_| match rng.gen_range(0..3) {
                0 => Letter::S,
                1 => Letter::T,
                _ => Letter::TInv,
            })
            .collect()
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        let mut w = Word::new();
        for l in iter {
            w.push(l);
        }
        w
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Letters `S`, `T` and `t` (for `T⁻¹`).
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                'S' => Ok(Letter::S),
                'T' => Ok(Letter::T),
                't' => Ok(Letter::TInv),
                other => Err(Error::Parse(format!(
                    "unexpected letter '{other}' in word (use S, T, t)"
                ))),
            })
            .collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for l in &self.letters {
            write!(f, "{}", l.symbol())?;
        }
        Ok(())
    }
}

/// An affine map `z ↦ ℓz + c` with `ℓ` a sixth root of unity and
/// `c ∈ Z[ω]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap {
    linear: EisensteinInt,
    trans: EisensteinInt,
}

impl AffineMap {
    pub const IDENTITY: Self = Self {
        linear: EisensteinInt::ONE,
        trans: EisensteinInt::ZERO,
    };

    pub fn new(linear: EisensteinInt, trans: EisensteinInt) -> Result<Self> {
        if !linear.is_unit() {
            return Err(Error::NotAUnit(linear.to_string()));
        }
        Ok(Self { linear, trans })
    }

    pub fn rotation(k: i64) -> Self {
        Self {
            linear: EisensteinInt::omega_pow(k),
            trans: EisensteinInt::ZERO,
        }
    }

    pub fn translation(c: EisensteinInt) -> Self {
        Self {
            linear: EisensteinInt::ONE,
            trans: c,
        }
    }

    pub fn linear(&self) -> EisensteinInt {
        self.linear
    }

    pub fn trans(&self) -> EisensteinInt {
        self.trans
    }

    /// `k` with `linear = ω^k`.
    pub fn linear_exponent(&self) -> u8 {
        self.linear
            .unit_exponent()
            .expect("linear part is a unit by construction")
    }

    /// `self ∘ other`: `(ℓ₁, c₁) ∘ (ℓ₂, c₂) = (ℓ₁ℓ₂, ℓ₁c₂ + c₁)`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            linear: self.linear.checked_mul(other.linear)?,
            trans: self.linear.checked_mul(other.trans)?.checked_add(self.trans)?,
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = EisensteinInt::omega_pow(-(self.linear_exponent() as i64));
        Ok(Self {
            linear: inv,
            trans: inv.checked_mul(self.trans)?.checked_neg()?,
        })
    }

    pub fn pow(&self, n: i64) -> Result<Self> {
        let base = if n < 0 { self.inverse()? } else { *self };
        (0..n.unsigned_abs()).try_fold(Self::IDENTITY, |acc, _| acc.compose(&base))
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.linear.to_complex() * z + self.trans.to_complex()
    }

    pub fn apply_exact(&self, x: EisensteinInt) -> Result<EisensteinInt> {
        self.linear.checked_mul(x)?.checked_add(self.trans)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z -> ({})z + ({})", self.linear, self.trans)
    }
}

/// Generators of `Aut⁺(L)` for `L = Z ⊕ Zω`: `a: z ↦ z+1`, `b: z ↦ z+ω`,
/// `c: z ↦ ωz`.
pub mod aut {
    use super::AffineMap;
    use crate::lattice::EisensteinInt;

    pub fn a() -> AffineMap {
        AffineMap::translation(EisensteinInt::ONE)
    }

    pub fn b() -> AffineMap {
        AffineMap::translation(EisensteinInt::OMEGA)
    }

    pub fn c() -> AffineMap {
        AffineMap::rotation(1)
    }

    /// `A: z ↦ z + (ω+1)`.
    pub fn big_a() -> AffineMap {
        AffineMap::translation(EisensteinInt::new(1, 1))
    }

    /// `B: z ↦ z + (ω+ω²)`.
    pub fn big_b() -> AffineMap {
        AffineMap::translation(EisensteinInt::new(-1, 2))
    }
}

/// `ψ` on a single generator.
pub fn psi_letter(l: Letter) -> AffineMap {
    match l {
        // −z + ω + ω² = −z + (2ω − 1)
        Letter::S => AffineMap {
            linear: EisensteinInt::new(-1, 0),
            trans: EisensteinInt::new(-1, 2),
        },
        Letter::T => AffineMap::rotation(1),
        Letter::TInv => AffineMap::rotation(-1),
    }
}

/// `ψ(w)`, the product of the generator images in word order.
pub fn psi_word(w: &Word) -> Result<AffineMap> {
    w.letters()
        .iter()
        .try_fold(AffineMap::IDENTITY, |acc, &l| acc.compose(&psi_letter(l)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Syllable {
    S,
    T(i64),
}

/// Euclidean decomposition `g = ± T^{k₁} S T^{k₂} S ⋯ T^m`.
fn decompose(g: &GammaElt) -> Result<Vec<Syllable>> {
    let [[mut a, mut b], [mut c, mut d]] = g.entries();
    let mut out = vec![];
    while c != 0 {
        // nearest integer to a/c, so that |a − kc| ≤ |c|/2
        let (num, den) = (2 * a as i128 + c as i128, 2 * c as i128);
        let k = if den > 0 { num.div_euclid(den) } else { (-num).div_euclid(-den) };
        let k = to_i64(k, "matrix_to_word")?;
        if k != 0 {
            out.push(Syllable::T(k));
            a = to_i64(a as i128 - k as i128 * c as i128, "matrix_to_word")?;
            b = to_i64(b as i128 - k as i128 * d as i128, "matrix_to_word")?;
        }
        out.push(Syllable::S);
        (a, b, c, d) = (-c, -d, a, b);
    }
    debug_assert!(a.abs() == 1 && d == a);
    let m = b * a;
    if m != 0 {
        out.push(Syllable::T(m));
    }
    Ok(out)
}

/// A word whose matrix product equals `g` up to sign. Not minimal in general.
pub fn matrix_to_word(g: &GammaElt) -> Result<Word> {
    let mut w = Word::new();
    for s in decompose(g)? {
        match s {
            Syllable::S => w.push(Letter::S),
            Syllable::T(k) => {
                let l = if k > 0 { Letter::T } else { Letter::TInv };
                for _ in 0..k.unsigned_abs() {
                    w.push(l);
                }
            }
        }
    }
    Ok(w)
}

/// `ψ(g)`, computed along the Euclidean word of `g` (powers of `T` are
/// folded into a single rotation).
pub fn psi_matrix(g: &GammaElt) -> Result<AffineMap> {
    decompose(g)?
        .into_iter()
        .try_fold(AffineMap::IDENTITY, |acc, s| match s {
            Syllable::S => acc.compose(&psi_letter(Letter::S)),
            Syllable::T(k) => acc.compose(&AffineMap::rotation(k)),
        })
}

/// `A^p B^q c^k` in `Aut⁺(R)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NormalForm {
    pub p: i64,
    pub q: i64,
    pub k: u8,
}

impl NormalForm {
    /// `z ↦ ω^k z + p(ω+1) + q(ω+ω²)`.
    pub fn to_affine(&self) -> Result<AffineMap> {
        let tp = EisensteinInt::new(1, 1).checked_mul(EisensteinInt::new(self.p, 0))?;
        let tq = EisensteinInt::new(-1, 2).checked_mul(EisensteinInt::new(self.q, 0))?;
        AffineMap::new(EisensteinInt::omega_pow(self.k as i64), tp.checked_add(tq)?)
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p, self.q, self.k)
    }
}

/// Writes `m` as `A^p B^q c^k`. The translation `u + vω` must lie in `R`:
/// solving `u = p − q`, `v = p + 2q` needs `3 | v − u`.
pub fn normal_form(m: &AffineMap) -> Result<NormalForm> {
    let EisensteinInt { u, v } = m.trans();
    let diff = v as i128 - u as i128;
    if diff.rem_euclid(3) != 0 {
        return Err(Error::NotInAutR(m.trans().to_string()));
    }
    let q = to_i64(diff / 3, "normal_form")?;
    let p = to_i64((2 * u as i128 + v as i128) / 3, "normal_form")?;
    Ok(NormalForm {
        p,
        q,
        k: m.linear_exponent(),
    })
}

/// Exponent `k ∈ 0..6` of the linear part `ℓ(g) = ω^k` of `ψ(g)`.
pub fn ell_character(g: &GammaElt) -> Result<u8> {
    Ok(psi_matrix(g)?.linear_exponent())
}

/// Membership in the kernel `N` of `ψ`.
pub fn in_n(g: &GammaElt) -> Result<bool> {
    Ok(psi_matrix(g)?.is_identity())
}

/// Parameters of the nilpotent matrix `A = [[−xy, x²], [−y², xy]]`; the
/// element `1 − 6A` lies in `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NMatrix {
    pub x: i64,
    pub y: i64,
}

impl NMatrix {
    pub fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn core(&self) -> Result<[[i64; 2]; 2]> {
        let of = || Error::Overflow("n_matrix");
        let xy = self.x.checked_mul(self.y).ok_or_else(of)?;
        let xx = self.x.checked_mul(self.x).ok_or_else(of)?;
        let yy = self.y.checked_mul(self.y).ok_or_else(of)?;
        Ok([[-xy, xx], [-yy, xy]])
    }

    pub fn to_gamma(&self) -> Result<GammaElt> {
        let [[p, q], [r, s]] = self.core()?;
        let six = |v: i64| v.checked_mul(6).ok_or(Error::Overflow("n_matrix"));
        GammaElt::new(1 - six(p)?, -six(q)?, -six(r)?, 1 - six(s)?)
    }
}

/// `1 − 6A` for `A = [[−xy, x²], [−y², xy]]`.
pub fn n_matrix(x: i64, y: i64) -> Result<GammaElt> {
    if x == 0 && y == 0 {
        return Err(Error::Domain("n_matrix needs (x, y) != (0, 0)".into()));
    }
    NMatrix::new(x, y).to_gamma()
}

fn mat_mul(p: [[i64; 2]; 2], q: [[i64; 2]; 2]) -> Result<[[i64; 2]; 2]> {
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let s = p[i][0] as i128 * q[0][j] as i128 + p[i][1] as i128 * q[1][j] as i128;
            out[i][j] = to_i64(s, "matrix product")?;
        }
    }
    Ok(out)
}

/// `A²` for the core matrix of `m`.
pub fn core_square(m: &NMatrix) -> Result<[[i64; 2]; 2]> {
    let a = m.core()?;
    mat_mul(a, a)
}

/// Result of computing the anticommutator `AB + BA`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CliffordBracket {
    /// The `(0,0)` entry; equals the scalar when `is_scalar` holds.
    pub scalar: i64,
    pub is_scalar: bool,
}

/// `AB + BA` for the core matrices of `a` and `b`. With `a = (x, y)` and
/// `b = (p, q)` this comes out as `−(xq − py)² I`.
pub fn clifford_bracket(a: &NMatrix, b: &NMatrix) -> Result<CliffordBracket> {
    let (ma, mb) = (a.core()?, b.core()?);
    let ab = mat_mul(ma, mb)?;
    let ba = mat_mul(mb, ma)?;
    let mut s = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            s[i][j] = ab[i][j].checked_add(ba[i][j]).ok_or(Error::Overflow("bracket"))?;
        }
    }
    Ok(CliffordBracket {
        scalar: s[0][0],
        is_scalar: s[0][1] == 0 && s[1][0] == 0 && s[0][0] == s[1][1],
    })
}

const REDUCE_MAX_STEPS: usize = 100_000;

/// Reduces `z` into the standard fundamental domain `F`.
///
/// Returns `(g, g·z)` with `|Re g·z| ≤ ½` and `|g·z| ≥ 1`. On the boundary,
/// `Re ∈ [−½, ½)`, and points on the unit circle are taken with `Re ≥ 0`
/// except the corner `ω² = (−1 + i√3)/2`, which has no partner with `Re ≥ 0`
/// inside `[−½, ½)` and is kept as its own representative.
pub fn reduce_to_f(z: Complex64) -> Result<(GammaElt, Complex64)> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("reduce_to_f needs Im z > 0, got {z}")));
    }
    let near_one = 4.0 * f64::EPSILON;
    let mut g = GammaElt::IDENTITY;
    let mut w = z;
    for _ in 0..REDUCE_MAX_STEPS {
        let n = (w.re + 0.5).floor();
        if n != 0.0 {
            if n.abs() > 9.0e15 {
                return Err(Error::Overflow("reduce_to_f translation"));
            }
            w.re -= n;
            g = GammaElt::t_pow(-(n as i64)).mul(&g)?;
        }
        let r2 = w.norm_sqr();
        if r2 < 1.0 - near_one {
            w = -w.inv();
            g = GammaElt::S.mul(&g)?;
            continue;
        }
        if (r2 - 1.0).abs() <= near_one && w.re < 0.0 && w.re > -0.5 {
            w = -w.inv();
            g = GammaElt::S.mul(&g)?;
        }
        return Ok((g, w));
    }
    Err(Error::Convergence(format!("reduce_to_f did not terminate for {z}")))
}

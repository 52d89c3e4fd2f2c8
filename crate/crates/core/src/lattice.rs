//! Exact arithmetic in `Z[ω]`, the excised lattice `R` and the fundamental
//! triangle `F̄` with corners `0, ω, ω²`.
//!
//! Throughout, `ω = (1 + i√3)/2` is a primitive sixth root of unity, so
//! `ω² = ω − 1` and every element of `Z[ω]` is written `u + vω`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// `ω = (1 + i√3)/2` as a complex number.
pub const OMEGA: Complex64 = Complex64::new(0.5, SQRT3 / 2.0);

/// `ω² = (−1 + i√3)/2` as a complex number.
pub const OMEGA_SQ: Complex64 = Complex64::new(-0.5, SQRT3 / 2.0);

/// An Eisenstein integer `u + vω`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EisensteinInt {
    pub u: i64,
    pub v: i64,
}

impl EisensteinInt {
    pub const ZERO: Self = Self::new(0, 0);
    pub const ONE: Self = Self::new(1, 0);
    pub const OMEGA: Self = Self::new(0, 1);

    pub const fn new(u: i64, v: i64) -> Self {
        Self { u, v }
    }

    /// `ω^k` for any integer `k`.
    pub fn omega_pow(k: i64) -> Self {
        // ω^0..ω^5 = 1, ω, ω−1, −1, −ω, 1−ω
        const UNITS: [EisensteinInt; 6] = [
            EisensteinInt::new(1, 0),
            EisensteinInt::new(0, 1),
            EisensteinInt::new(-1, 1),
            EisensteinInt::new(-1, 0),
            EisensteinInt::new(0, -1),
            EisensteinInt::new(1, -1),
        ];
        UNITS[k.rem_euclid(6) as usize]
    }

    /// Returns `k ∈ 0..6` with `self = ω^k`, or `None` if `self` is not a unit.
    pub fn unit_exponent(self) -> Option<u8> {
        (0..6).find(|&k| Self::omega_pow(k as i64) == self)
    }

    pub fn is_unit(self) -> bool {
        self.unit_exponent().is_some()
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self> {
        Ok(Self::new(
            self.u.checked_add(rhs.u).ok_or(Error::Overflow("eisenstein add"))?,
            self.v.checked_add(rhs.v).ok_or(Error::Overflow("eisenstein add"))?,
        ))
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self> {
        self.checked_add(rhs.checked_neg()?)
    }

    pub fn checked_neg(self) -> Result<Self> {
        Ok(Self::new(
            self.u.checked_neg().ok_or(Error::Overflow("eisenstein neg"))?,
            self.v.checked_neg().ok_or(Error::Overflow("eisenstein neg"))?,
        ))
    }

    /// `(u₁ + v₁ω)(u₂ + v₂ω) = (u₁u₂ − v₁v₂) + (u₁v₂ + v₁u₂ + v₁v₂)ω`.
    pub fn checked_mul(self, rhs: Self) -> Result<Self> {
        let of = || Error::Overflow("eisenstein mul");
        let uu = self.u.checked_mul(rhs.u).ok_or_else(of)?;
        let vv = self.v.checked_mul(rhs.v).ok_or_else(of)?;
        let uv = self.u.checked_mul(rhs.v).ok_or_else(of)?;
        let vu = self.v.checked_mul(rhs.u).ok_or_else(of)?;
        let re = uu.checked_sub(vv).ok_or_else(of)?;
        let om = uv
            .checked_add(vu)
            .and_then(|s| s.checked_add(vv))
            .ok_or_else(of)?;
        Ok(Self::new(re, om))
    }

    pub fn checked_pow(self, mut e: u32) -> Result<Self> {
        let mut base = self;
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.checked_mul(base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(base)?;
            }
        }
        Ok(acc)
    }

    /// Complex conjugate: `conj(ω) = 1 − ω`.
    pub fn conj(self) -> Self {
        Self::new(self.u + self.v, -self.v)
    }

    /// Norm `u² + uv + v²`.
    pub fn norm(self) -> i64 {
        self.u * self.u + self.u * self.v + self.v * self.v
    }

    /// Embedding into `C`.
    pub fn to_complex(self) -> Complex64 {
        let (u, v) = (self.u as f64, self.v as f64);
        Complex64::new(u + 0.5 * v, v * SQRT3 / 2.0)
    }

    /// Membership in `R = (1 + ω)Z[ω]`, the index-3 sublattice.
    pub fn in_sublattice_r(self) -> bool {
        (self.v - self.u).rem_euclid(3) == 0
    }
}

/// Exact product in `Z[ω]`; overflow is reported, never wrapped.
pub fn eis_mul(x: EisensteinInt, y: EisensteinInt) -> Result<EisensteinInt> {
    x.checked_mul(y)
}

impl fmt::Display for EisensteinInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.u, self.v) {
            (u, 0) => write!(f, "{u}"),
            (0, 1) => write!(f, "ω"),
            (0, -1) => write!(f, "-ω"),
            (0, v) => write!(f, "{v}ω"),
            (u, 1) => write!(f, "{u}+ω"),
            (u, -1) => write!(f, "{u}-ω"),
            (u, v) if v > 0 => write!(f, "{u}+{v}ω"),
            (u, v) => write!(f, "{u}{v}ω"),
        }
    }
}

/// The point `m(ω+1) + n(ω²−1)` of the excised lattice `R`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExcisedPoint {
    pub m: i64,
    pub n: i64,
}

impl ExcisedPoint {
    pub const fn new(m: i64, n: i64) -> Self {
        Self { m, n }
    }

    /// `ω + 1` in the `{1, ω}` basis.
    pub const GEN1: EisensteinInt = EisensteinInt::new(1, 1);
    /// `ω² − 1 = ω − 2` in the `{1, ω}` basis.
    pub const GEN2: EisensteinInt = EisensteinInt::new(-2, 1);

    pub fn to_eisenstein(self) -> EisensteinInt {
        EisensteinInt::new(self.m - 2 * self.n, self.m + self.n)
    }

    /// Inverse of [`to_eisenstein`](Self::to_eisenstein); `None` off `R`.
    pub fn from_eisenstein(x: EisensteinInt) -> Option<Self> {
        if !x.in_sublattice_r() {
            return None;
        }
        let n = (x.v - x.u) / 3;
        Some(Self::new(x.v - n, n))
    }

    /// Multiplication by `ω`, which maps `R` onto itself:
    /// `ω(ω+1) = (ω+1) + (ω²−1)` and `ω(ω²−1) = −(ω+1)`.
    pub fn rotate(self) -> Self {
        Self::new(self.m - self.n, self.m)
    }

    pub fn embed(self) -> Complex64 {
        excised_embed(self)
    }
}

/// `m(ω+1) + n(ω²−1)` as a complex number.
pub fn excised_embed(p: ExcisedPoint) -> Complex64 {
    let (m, n) = (p.m as f64, p.n as f64);
    Complex64::new(1.5 * (m - n), (m + n) * SQRT3 / 2.0)
}

/// Nearest point of `R` to `z`; ties go to the lexicographically smallest
/// `(m, n)`.
pub fn nearest_excised_point(z: Complex64) -> ExcisedPoint {
    // continuous coordinates: re = 1.5(m − n), im = (√3/2)(m + n)
    let d = z.re / 1.5;
    let s = z.im * 2.0 / SQRT3;
    let m0 = ((s + d) / 2.0).round() as i64;
    let n0 = ((s - d) / 2.0).round() as i64;
    let mut best = ExcisedPoint::new(m0, n0);
    let mut best_d = (z - best.embed()).norm_sqr();
    for dm in -2..=2 {
        for dn in -2..=2 {
            let p = ExcisedPoint::new(m0 + dm, n0 + dn);
            let dist = (z - p.embed()).norm_sqr();
            if dist < best_d || (dist == best_d && p < best) {
                best = p;
                best_d = dist;
            }
        }
    }
    best
}

/// Distance from `z` to the nearest point of `R`.
pub fn distance_to_excised(z: Complex64) -> f64 {
    (z - nearest_excised_point(z).embed()).norm()
}

/// The closed triangle with corners `0, ω, ω²`, a fundamental domain for the
/// affine group preserving `R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalTriangle {
    pub vertices: [Complex64; 3],
}

impl Default for FundamentalTriangle {
    fn default() -> Self {
        Self {
            vertices: [Complex64::new(0.0, 0.0), OMEGA, OMEGA_SQ],
        }
    }
}

impl FundamentalTriangle {
    /// Barycentric coordinates with respect to the three vertices.
    pub fn barycentric(&self, u: Complex64) -> [f64; 3] {
        let cross = |a: Complex64, b: Complex64| a.re * b.im - a.im * b.re;
        let [a, b, c] = self.vertices;
        let area = cross(b - a, c - a);
        let wa = cross(b - u, c - u) / area;
        let wb = cross(c - u, a - u) / area;
        [wa, wb, 1.0 - wa - wb]
    }

    pub fn contains(&self, u: Complex64, tol: f64) -> bool {
        self.barycentric(u)
            .iter()
            .all(|&b| b >= -tol && b <= 1.0 + tol)
    }

    pub fn centroid(&self) -> Complex64 {
        (self.vertices[0] + self.vertices[1] + self.vertices[2]) / 3.0
    }
}

pub fn in_fundamental_triangle(u: Complex64, tol: f64) -> bool {
    FundamentalTriangle::default().contains(u, tol)
}

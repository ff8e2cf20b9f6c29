//! GF(2^8) arithmetic with the AES reduction polynomial `x^8 + x^4 + x^3 + x + 1`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul};

/// Low byte of the reduction polynomial (0x11B).
pub const REDUCTION: u8 = 0x1B;

/// A byte interpreted as an element of GF(2^8).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GfByte(pub u8);

impl GfByte {
    pub const ZERO: GfByte = GfByte(0);
    pub const ONE: GfByte = GfByte(1);

    pub const fn value(self) -> u8 {
        self.0
    }

    /// Multiplication by `02`: one left shift, reduced when the high bit falls off.
    pub const fn xtime(self) -> GfByte {
        GfByte(xtime(self.0))
    }
}

impl fmt::Debug for GfByte {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02x}", self.0)
    }
}

impl From<u8> for GfByte {
    fn from(v: u8) -> Self {
        GfByte(v)
    }
}

/// Field addition is XOR.
#[allow(clippy::suspicious_arithmetic_impl)]
impl Add for GfByte {
    type Output = GfByte;
    fn add(self, rhs: GfByte) -> GfByte {
        GfByte(self.0 ^ rhs.0)
    }
}

#[allow(clippy::suspicious_op_assign_impl)]
impl AddAssign for GfByte {
    fn add_assign(&mut self, rhs: GfByte) {
        self.0 ^= rhs.0;
    }
}

impl Mul for GfByte {
    type Output = GfByte;
    fn mul(self, rhs: GfByte) -> GfByte {
        GfByte(gf_mul(self.0, rhs.0))
    }
}

#[inline]
pub const fn xtime(b: u8) -> u8 {
    let shifted = b << 1;
    if b & 0x80 != 0 {
        shifted ^ REDUCTION
    } else {
        shifted
    }
}

/// Shift-and-add product in GF(2^8).
pub const fn gf_mul(a: u8, b: u8) -> u8 {
    let mut acc = 0u8;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        a = xtime(a);
        b >>= 1;
    }
    acc
}

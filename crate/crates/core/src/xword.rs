//! Register-width integers.
//!
//! `XWord` is a two's-complement machine word whose width (XLEN) is a
//! machine configuration value fixed at construction time, not a compile
//! time parameter. Both widths go through the same code path: values are
//! kept masked to the configured width, and signedness is a property of
//! each operation rather than of the stored bits.

use std::fmt;

/// Machine word width selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Xlen {
    X32,
    X64,
}

impl Xlen {
    pub fn bits(self) -> u32 {
        match self {
            Xlen::X32 => 32,
            Xlen::X64 => 64,
        }
    }

    pub fn bytes(self) -> u64 {
        self.bits() as u64 / 8
    }

    fn mask(self) -> u64 {
        match self {
            Xlen::X32 => 0xffff_ffff,
            Xlen::X64 => u64::MAX,
        }
    }

    /// Number of low bits of a shift amount that are significant (5 or 6).
    fn shamt_bits(self) -> u32 {
        match self {
            Xlen::X32 => 5,
            Xlen::X64 => 6,
        }
    }
}

impl fmt::Display for Xlen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits())
    }
}

/// Signed integer wide enough for any immediate, CSR value or raw
/// instruction word handled by the decoder and the machine primitives.
pub type MachineInt = i64;

/// A machine word of the configured register width.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct XWord {
    bits: u64,
    xlen: Xlen,
}

// Arithmetic keeps the ISA operation names rather than the std::ops traits;
// width checking and the defined divide-by-zero results don't fit them.
#[allow(clippy::should_implement_trait, clippy::manual_checked_ops)]
impl XWord {
    pub fn new(xlen: Xlen, bits: u64) -> XWord {
        XWord { bits: bits & xlen.mask(), xlen }
    }

    pub fn zero(xlen: Xlen) -> XWord {
        XWord::new(xlen, 0)
    }

    /// Sign-extends a `MachineInt` into a word, i.e. truncates the two's
    /// complement representation to XLEN bits. Immediates enter the
    /// register file through this.
    pub fn from_imm(xlen: Xlen, imm: MachineInt) -> XWord {
        XWord::new(xlen, imm as u64)
    }

    pub fn xlen(self) -> Xlen {
        self.xlen
    }

    /// The raw bits, zero-extended to 64.
    pub fn bits(self) -> u64 {
        self.bits
    }

    /// The value read as unsigned.
    pub fn unsigned(self) -> u64 {
        self.bits
    }

    /// The value read as signed (sign-extended to 64 bits).
    pub fn signed(self) -> i64 {
        match self.xlen {
            Xlen::X32 => self.bits as u32 as i32 as i64,
            Xlen::X64 => self.bits as i64,
        }
    }

    fn with(self, bits: u64) -> XWord {
        XWord::new(self.xlen, bits)
    }

    fn check_width(self, other: XWord) {
        debug_assert_eq!(self.xlen, other.xlen, "mixed-width XWord operation");
    }

    pub fn add(self, other: XWord) -> XWord {
        self.check_width(other);
        self.with(self.bits.wrapping_add(other.bits))
    }

    pub fn add_imm(self, imm: MachineInt) -> XWord {
        self.add(XWord::from_imm(self.xlen, imm))
    }

    pub fn sub(self, other: XWord) -> XWord {
        self.check_width(other);
        self.with(self.bits.wrapping_sub(other.bits))
    }

    pub fn and(self, other: XWord) -> XWord {
        self.check_width(other);
        self.with(self.bits & other.bits)
    }

    pub fn or(self, other: XWord) -> XWord {
        self.check_width(other);
        self.with(self.bits | other.bits)
    }

    pub fn xor(self, other: XWord) -> XWord {
        self.check_width(other);
        self.with(self.bits ^ other.bits)
    }

    pub fn not(self) -> XWord {
        self.with(!self.bits)
    }

    /// Shift amount taken from the low `log2(XLEN)` bits of `other`.
    pub fn sll(self, other: XWord) -> XWord {
        self.with(self.bits << self.shamt(other))
    }

    pub fn srl(self, other: XWord) -> XWord {
        self.with(self.bits >> self.shamt(other))
    }

    pub fn sra(self, other: XWord) -> XWord {
        let sh = self.shamt(other);
        self.with((self.signed() >> sh) as u64)
    }

    fn shamt(self, other: XWord) -> u32 {
        (other.bits as u32) & ((1 << self.xlen.shamt_bits()) - 1)
    }

    pub fn lt_signed(self, other: XWord) -> bool {
        self.check_width(other);
        self.signed() < other.signed()
    }

    pub fn lt_unsigned(self, other: XWord) -> bool {
        self.check_width(other);
        self.bits < other.bits
    }

    pub fn slt(self, other: XWord) -> XWord {
        self.with(self.lt_signed(other) as u64)
    }

    pub fn sltu(self, other: XWord) -> XWord {
        self.with(self.lt_unsigned(other) as u64)
    }

    pub fn mul(self, other: XWord) -> XWord {
        self.check_width(other);
        self.with(self.bits.wrapping_mul(other.bits))
    }

    /// High XLEN bits of the signed 2*XLEN product.
    pub fn mulh(self, other: XWord) -> XWord {
        self.check_width(other);
        let p = self.signed() as i128 * other.signed() as i128;
        self.with((p >> self.xlen.bits()) as u64)
    }

    /// High XLEN bits of the signed * unsigned 2*XLEN product.
    pub fn mulhsu(self, other: XWord) -> XWord {
        self.check_width(other);
        let p = self.signed() as i128 * other.bits as i128;
        self.with((p >> self.xlen.bits()) as u64)
    }

    /// High XLEN bits of the unsigned 2*XLEN product.
    pub fn mulhu(self, other: XWord) -> XWord {
        self.check_width(other);
        let p = self.bits as u128 * other.bits as u128;
        self.with((p >> self.xlen.bits()) as u64)
    }

    /// Signed division, rounding toward zero. Division by zero yields
    /// all-ones; the most-negative-value / -1 overflow yields the dividend.
    pub fn div(self, other: XWord) -> XWord {
        self.check_width(other);
        let (a, b) = (self.signed() as i128, other.signed() as i128);
        if b == 0 {
            self.with(u64::MAX)
        } else {
            // i128 is wide enough that MIN / -1 cannot overflow here.
            self.with((a / b) as u64)
        }
    }

    pub fn divu(self, other: XWord) -> XWord {
        self.check_width(other);
        if other.bits == 0 {
            self.with(u64::MAX)
        } else {
            self.with(self.bits / other.bits)
        }
    }

    /// Signed remainder, sign follows the dividend. Remainder by zero
    /// yields the dividend; the overflow case yields zero.
    pub fn rem(self, other: XWord) -> XWord {
        self.check_width(other);
        let (a, b) = (self.signed() as i128, other.signed() as i128);
        if b == 0 {
            self
        } else {
            self.with((a % b) as u64)
        }
    }

    pub fn remu(self, other: XWord) -> XWord {
        self.check_width(other);
        if other.bits == 0 {
            self
        } else {
            self.with(self.bits % other.bits)
        }
    }

    /// Sign-extends the low 32 bits into the full width.
    pub fn sign_extend_w(self) -> XWord {
        self.with(self.bits as u32 as i32 as i64 as u64)
    }

    /// Zero-extends the low 32 bits into the full width.
    pub fn zero_extend_w(self) -> XWord {
        self.with(self.bits as u32 as u64)
    }

    fn low32(self) -> u32 {
        self.bits as u32
    }

    pub fn addw(self, other: XWord) -> XWord {
        self.with(self.low32().wrapping_add(other.low32()) as i32 as i64 as u64)
    }

    pub fn subw(self, other: XWord) -> XWord {
        self.with(self.low32().wrapping_sub(other.low32()) as i32 as i64 as u64)
    }

    pub fn sllw(self, other: XWord) -> XWord {
        let sh = other.low32() & 31;
        self.with(((self.low32() << sh) as i32) as i64 as u64)
    }

    pub fn srlw(self, other: XWord) -> XWord {
        let sh = other.low32() & 31;
        self.with(((self.low32() >> sh) as i32) as i64 as u64)
    }

    pub fn sraw(self, other: XWord) -> XWord {
        let sh = other.low32() & 31;
        self.with(((self.low32() as i32) >> sh) as i64 as u64)
    }

    pub fn mulw(self, other: XWord) -> XWord {
        self.with(self.low32().wrapping_mul(other.low32()) as i32 as i64 as u64)
    }

    fn word32(self) -> XWord {
        XWord::new(Xlen::X32, self.low32() as u64)
    }

    fn from32(self, w: XWord) -> XWord {
        self.with(w.bits as u32 as i32 as i64 as u64)
    }

    pub fn divw(self, other: XWord) -> XWord {
        self.from32(self.word32().div(other.word32()))
    }

    pub fn divuw(self, other: XWord) -> XWord {
        self.from32(self.word32().divu(other.word32()))
    }

    pub fn remw(self, other: XWord) -> XWord {
        self.from32(self.word32().rem(other.word32()))
    }

    pub fn remuw(self, other: XWord) -> XWord {
        self.from32(self.word32().remu(other.word32()))
    }

    pub fn is_aligned(self, bytes: u64) -> bool {
        self.bits.is_multiple_of(bytes)
    }
}

impl fmt::Debug for XWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.bits)
    }
}

impl fmt::Display for XWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.xlen {
            Xlen::X32 => write!(f, "{:#010x}", self.bits),
            Xlen::X64 => write!(f, "{:#018x}", self.bits),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w32(v: u64) -> XWord {
        XWord::new(Xlen::X32, v)
    }

    fn w64(v: u64) -> XWord {
        XWord::new(Xlen::X64, v)
    }

    #[test]
    fn masking_and_sign_views() {
        assert_eq!(w32(0x1_0000_0001).bits(), 1);
        assert_eq!(w32(0xffff_ffff).signed(), -1);
        assert_eq!(w32(0xffff_ffff).unsigned(), 0xffff_ffff);
        assert_eq!(w64(u64::MAX).signed(), -1);
        assert_eq!(XWord::from_imm(Xlen::X32, -5).bits(), 0xffff_fffb);
    }

    #[test]
    fn modular_arithmetic() {
        assert_eq!(w32(0xffff_ffff).add(w32(1)).bits(), 0);
        assert_eq!(w64(u64::MAX).add(w64(1)).bits(), 0);
        assert_eq!(w32(0).sub(w32(1)).bits(), 0xffff_ffff);
    }

    #[test]
    fn shifts_mask_amount() {
        // Shift amounts use only log2(XLEN) bits of the second operand.
        assert_eq!(w32(1).sll(w32(33)).bits(), 2);
        assert_eq!(w64(1).sll(w64(65)).bits(), 2);
        assert_eq!(w32(0x8000_0000).sra(w32(31)).bits(), 0xffff_ffff);
        assert_eq!(w32(0x8000_0000).srl(w32(31)).bits(), 1);
    }

    #[test]
    fn div_rem_by_zero() {
        // Division by zero produces all-ones, remainder the dividend.
        assert_eq!(w32(7).div(w32(0)).bits(), 0xffff_ffff);
        assert_eq!(w64(7).div(w64(0)).bits(), u64::MAX);
        assert_eq!(w32(7).divu(w32(0)).bits(), 0xffff_ffff);
        assert_eq!(w32(7).rem(w32(0)).bits(), 7);
        assert_eq!(w32(7).remu(w32(0)).bits(), 7);
    }

    #[test]
    fn div_rem_overflow() {
        // Most-negative / -1 yields the dividend and remainder zero.
        let min32 = w32(0x8000_0000);
        assert_eq!(min32.div(w32(0xffff_ffff)).bits(), 0x8000_0000);
        assert_eq!(min32.rem(w32(0xffff_ffff)).bits(), 0);
        let min64 = w64(0x8000_0000_0000_0000);
        assert_eq!(min64.div(w64(u64::MAX)).bits(), 0x8000_0000_0000_0000);
        assert_eq!(min64.rem(w64(u64::MAX)).bits(), 0);
    }

    #[test]
    fn div_rem_signs() {
        // Quotient rounds toward zero, remainder follows the dividend.
        let a = XWord::from_imm(Xlen::X32, -7);
        let b = XWord::from_imm(Xlen::X32, 2);
        assert_eq!(a.div(b).signed(), -3);
        assert_eq!(a.rem(b).signed(), -1);
        assert_eq!(b.div(a).signed(), 0);
        assert_eq!(b.rem(a).signed(), 2);
    }

    #[test]
    fn mul_high_parts() {
        let a = w64(0xffff_ffff_ffff_fff6); // -10
        let b = w64(3);
        assert_eq!(a.mul(b).signed(), -30);
        assert_eq!(a.mulh(b).signed(), -1);
        assert_eq!(a.mulhu(b).bits(), 2);
        assert_eq!(a.mulhsu(b).signed(), -1);
        assert_eq!(b.mulhsu(a).bits(), 2);
        let c = w32(0x8000_0000);
        assert_eq!(c.mulhu(c).bits(), 0x4000_0000);
        assert_eq!(c.mulh(c).bits(), 0x4000_0000);
    }

    #[test]
    fn word_ops_sign_extend() {
        let a = w64(0x7fff_ffff);
        assert_eq!(a.addw(w64(1)).signed(), -0x8000_0000);
        assert_eq!(w64(0x1_0000_0000).addw(w64(0)).bits(), 0);
        assert_eq!(w64(0x8000_0000).sign_extend_w().signed(), -0x8000_0000);
        assert_eq!(w64(0xffff_ffff_8000_0000).zero_extend_w().bits(), 0x8000_0000);
        assert_eq!(w64(1).sllw(w64(31)).signed(), -0x8000_0000);
        assert_eq!(w64(0x8000_0000).srlw(w64(4)).bits(), 0x0800_0000);
        assert_eq!(w64(0x8000_0000).sraw(w64(4)).bits(), 0xffff_ffff_f800_0000);
    }

    #[test]
    fn word_div_uses_32_bit_edge_cases() {
        let min = w64(0x8000_0000);
        let neg1 = w64(0xffff_ffff);
        assert_eq!(min.divw(neg1).signed(), -0x8000_0000);
        assert_eq!(min.remw(neg1).bits(), 0);
        assert_eq!(w64(7).divw(w64(0)).signed(), -1);
        assert_eq!(w64(7).remw(w64(0)).bits(), 7);
    }
}

//! AES-128 split into its named round transformations.
//!
//! The state is a 4x4 byte matrix. Blocks map onto it column-major: byte `j` of a block
//! lands at row `j % 4`, column `j / 4`, which is also the element numbering used by the
//! stage task graphs in [`crate::sim`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gf::{gf_mul, xtime};

pub const BLOCK_LEN: usize = 16;
pub const ROUNDS: usize = 10;

/// Forward column-mixing matrix.
pub const MIX: [[u8; 4]; 4] = [
    [0x02, 0x03, 0x01, 0x01],
    [0x01, 0x02, 0x03, 0x01],
    [0x01, 0x01, 0x02, 0x03],
    [0x03, 0x01, 0x01, 0x02],
];

/// Inverse column-mixing matrix.
pub const INV_MIX: [[u8; 4]; 4] = [
    [0x0E, 0x0B, 0x0D, 0x09],
    [0x09, 0x0E, 0x0B, 0x0D],
    [0x0D, 0x09, 0x0E, 0x0B],
    [0x0B, 0x0D, 0x09, 0x0E],
];

#[rustfmt::skip]
pub const SBOX: [u8; 256] = [
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
];

pub const INV_SBOX: [u8; 256] = {
    let mut inv = [0u8; 256];
    let mut i = 0;
    while i < 256 {
        inv[SBOX[i] as usize] = i as u8;
        i += 1;
    }
    inv
};

const RCON: [u8; ROUNDS] = [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36];

/// The 4x4 byte matrix every round transformation acts on, indexed `(row, col)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct State {
    cells: [[u8; 4]; 4],
}

impl State {
    pub const fn from_cells(cells: [[u8; 4]; 4]) -> Self {
        State { cells }
    }

    pub fn from_block(block: &Block) -> Self {
        let mut cells = [[0u8; 4]; 4];
        for (j, &b) in block.0.iter().enumerate() {
            cells[j % 4][j / 4] = b;
        }
        State { cells }
    }

    pub fn to_block(&self) -> Block {
        let mut out = [0u8; BLOCK_LEN];
        for (j, b) in out.iter_mut().enumerate() {
            *b = self.cells[j % 4][j / 4];
        }
        Block(out)
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row][col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: u8) {
        self.cells[row][col] = v;
    }

    /// Byte at position `k` of the row-major 1-based numbering `b_1..b_16`, so that a
    /// matrix column reads `(b_1, b_5, b_9, b_13)`.
    pub fn element(&self, k: usize) -> u8 {
        assert!((1..=16).contains(&k), "element index {k} out of 1..=16");
        self.cells[(k - 1) / 4][(k - 1) % 4]
    }

    pub fn cells(&self) -> &[[u8; 4]; 4] {
        &self.cells
    }

    pub fn column(&self, col: usize) -> [u8; 4] {
        [self.cells[0][col], self.cells[1][col], self.cells[2][col], self.cells[3][col]]
    }

    pub fn set_column(&mut self, col: usize, v: [u8; 4]) {
        for (row, b) in v.into_iter().enumerate() {
            self.cells[row][col] = b;
        }
    }

    fn map_bytes(mut self, f: impl Fn(u8) -> u8) -> Self {
        for row in self.cells.iter_mut() {
            for b in row.iter_mut() {
                *b = f(*b);
            }
        }
        self
    }
}

impl std::ops::BitXor for State {
    type Output = State;
    fn bitxor(self, rhs: State) -> State {
        let mut out = self;
        for r in 0..4 {
            for c in 0..4 {
                out.cells[r][c] ^= rhs.cells[r][c];
            }
        }
        out
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "State({})", self.to_block())
    }
}

/// A 128-bit block in external wire order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Block(pub [u8; BLOCK_LEN]);

impl Block {
    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        let arr: [u8; BLOCK_LEN] = bytes.try_into().map_err(|_| Error::Length {
            expected: BLOCK_LEN,
            actual: bytes.len(),
        })?;
        Ok(Block(arr))
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        Ok(Block(parse_hex16(s)?))
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(2 * BLOCK_LEN);
        for b in self.0 {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }

    pub fn as_bytes(&self) -> &[u8; BLOCK_LEN] {
        &self.0
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Block({})", self.to_hex())
    }
}

impl FromStr for Block {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Block::from_hex(s)
    }
}

/// Parses exactly 32 hex characters, no separators.
pub fn parse_hex16(s: &str) -> Result<[u8; BLOCK_LEN]> {
    if s.len() != 2 * BLOCK_LEN {
        return Err(Error::Hex(s.to_string(), "expected 32 hex characters"));
    }
    if !s.is_ascii() {
        return Err(Error::Hex(s.to_string(), "non-hex character"));
    }
    let mut out = [0u8; BLOCK_LEN];
    for (i, b) in out.iter_mut().enumerate() {
        *b = u8::from_str_radix(&s[2 * i..2 * i + 2], 16)
            .map_err(|_| Error::Hex(s.to_string(), "non-hex character"))?;
    }
    Ok(out)
}

/// Eleven 16-byte round keys; entry 0 is the cipher key itself.
#[derive(Clone, PartialEq, Eq)]
pub struct KeySchedule {
    round_keys: [[u8; BLOCK_LEN]; ROUNDS + 1],
}

impl KeySchedule {
    pub fn round_key(&self, round: usize) -> &[u8; BLOCK_LEN] {
        &self.round_keys[round]
    }

    pub fn round_keys(&self) -> &[[u8; BLOCK_LEN]; ROUNDS + 1] {
        &self.round_keys
    }
}

impl fmt::Debug for KeySchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.round_keys.iter().map(|k| Block(*k)))
            .finish()
    }
}

/// Standard AES-128 key expansion.
pub fn key_expand(key: &[u8]) -> Result<KeySchedule> {
    if key.len() != BLOCK_LEN {
        return Err(Error::Length {
            expected: BLOCK_LEN,
            actual: key.len(),
        });
    }
    let mut words = [[0u8; 4]; 4 * (ROUNDS + 1)];
    for (i, w) in words.iter_mut().take(4).enumerate() {
        w.copy_from_slice(&key[4 * i..4 * i + 4]);
    }
    for i in 4..words.len() {
        let mut temp = words[i - 1];
        if i % 4 == 0 {
            temp.rotate_left(1);
            for b in temp.iter_mut() {
                *b = SBOX[*b as usize];
            }
            temp[0] ^= RCON[i / 4 - 1];
        }
        for k in 0..4 {
            words[i][k] = words[i - 4][k] ^ temp[k];
        }
    }
    let mut round_keys = [[0u8; BLOCK_LEN]; ROUNDS + 1];
    for (r, rk) in round_keys.iter_mut().enumerate() {
        for w in 0..4 {
            rk[4 * w..4 * w + 4].copy_from_slice(&words[4 * r + w]);
        }
    }
    Ok(KeySchedule { round_keys })
}

pub fn byte_sub(s: State) -> State {
    s.map_bytes(|b| SBOX[b as usize])
}

pub fn inv_byte_sub(s: State) -> State {
    s.map_bytes(|b| INV_SBOX[b as usize])
}

/// Row `r` rotates left by `r` positions.
pub fn shift_row(s: State) -> State {
    let mut out = s;
    for r in 1..4 {
        out.cells[r].rotate_left(r);
    }
    out
}

pub fn inv_shift_row(s: State) -> State {
    let mut out = s;
    for r in 1..4 {
        out.cells[r].rotate_right(r);
    }
    out
}

fn mat_times_column(m: &[[u8; 4]; 4], col: [u8; 4]) -> [u8; 4] {
    let mut out = [0u8; 4];
    for (r, o) in out.iter_mut().enumerate() {
        *o = (0..4).fold(0, |acc, k| acc ^ gf_mul(m[r][k], col[k]));
    }
    out
}

/// Each column is replaced by `MIX * column` over GF(2^8).
pub fn mix_column(s: State) -> State {
    let mut out = s;
    for c in 0..4 {
        out.set_column(c, mix_single_column(s.column(c)));
    }
    out
}

pub fn inv_mix_column(s: State) -> State {
    let mut out = s;
    for c in 0..4 {
        out.set_column(c, mat_times_column(&INV_MIX, s.column(c)));
    }
    out
}

/// `02·b_r ⊕ 03·b_{r+1} ⊕ b_{r+2} ⊕ b_{r+3}` for each row, with `03·b = 02·b ⊕ b`.
pub fn mix_single_column(col: [u8; 4]) -> [u8; 4] {
    let mut out = [0u8; 4];
    for (r, o) in out.iter_mut().enumerate() {
        let b0 = col[r];
        let b1 = col[(r + 1) % 4];
        *o = xtime(b0) ^ (xtime(b1) ^ b1) ^ col[(r + 2) % 4] ^ col[(r + 3) % 4];
    }
    out
}

pub fn add_round_key(s: State, key: &[u8; BLOCK_LEN]) -> State {
    let k = State::from_block(&Block(*key));
    s ^ k
}

/// States after each of the eleven encryption stages (initial key addition, nine standard
/// rounds, final round).
pub fn encrypt_trace(block: &Block, ks: &KeySchedule) -> [State; ROUNDS + 1] {
    let mut trace = [State::default(); ROUNDS + 1];
    let mut s = add_round_key(State::from_block(block), ks.round_key(0));
    trace[0] = s;
    for round in 1..ROUNDS {
        s = add_round_key(mix_column(shift_row(byte_sub(s))), ks.round_key(round));
        trace[round] = s;
    }
    s = add_round_key(shift_row(byte_sub(s)), ks.round_key(ROUNDS));
    trace[ROUNDS] = s;
    trace
}

/// States after each of the eleven decryption stages; stage `j` uses round key `10 - j`.
pub fn decrypt_trace(block: &Block, ks: &KeySchedule) -> [State; ROUNDS + 1] {
    let mut trace = [State::default(); ROUNDS + 1];
    let mut s = add_round_key(State::from_block(block), ks.round_key(ROUNDS));
    trace[0] = s;
    for stage in 1..ROUNDS {
        s = inv_mix_column(add_round_key(
            inv_byte_sub(inv_shift_row(s)),
            ks.round_key(ROUNDS - stage),
        ));
        trace[stage] = s;
    }
    s = add_round_key(inv_byte_sub(inv_shift_row(s)), ks.round_key(0));
    trace[ROUNDS] = s;
    trace
}

pub fn encrypt_block(block: &Block, ks: &KeySchedule) -> Block {
    encrypt_trace(block, ks)[ROUNDS].to_block()
}

pub fn decrypt_block(block: &Block, ks: &KeySchedule) -> Block {
    decrypt_trace(block, ks)[ROUNDS].to_block()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand::rngs::StdRng;

    fn random_state(rng: &mut StdRng) -> State {
        let mut b = [0u8; 16];
        rng.fill(&mut b);
        State::from_block(&Block(b))
    }

    /// S-box built from first principles: brute-force inverse, then the affine map.
    fn generated_sbox() -> [u8; 256] {
        let mut table = [0u8; 256];
        for x in 0..=255u8 {
            let inv = if x == 0 {
                0
            } else {
                (1..=255u8).find(|&y| crate::gf::gf_mul(x, y) == 1).unwrap()
            };
            let mut out = 0x63u8;
            for i in 0..8 {
                let bit = ((inv >> i)
                    ^ (inv >> ((i + 4) % 8))
                    ^ (inv >> ((i + 5) % 8))
                    ^ (inv >> ((i + 6) % 8))
                    ^ (inv >> ((i + 7) % 8)))
                    & 1;
                out ^= bit << i;
            }
            table[x as usize] = out;
        }
        table
    }

    #[test]
    fn sbox_matches_generated_table() {
        assert_eq!(generated_sbox(), SBOX);
        assert_eq!(SBOX[0x00], 0x63);
        assert_eq!(SBOX[0x53], 0xED);
    }

    #[test]
    fn inverse_sbox_round_trips_every_byte() {
        for b in 0..=255u8 {
            let s = State::from_cells([[b; 4]; 4]);
            assert_eq!(inv_byte_sub(byte_sub(s)), s);
        }
    }

    #[test]
    fn shift_row_rotations() {
        let s = State::from_cells([
            [0x00, 0x01, 0x02, 0x03],
            [0x10, 0x11, 0x12, 0x13],
            [0x20, 0x21, 0x22, 0x23],
            [0x30, 0x31, 0x32, 0x33],
        ]);
        let t = shift_row(s);
        assert_eq!(t.cells()[0], [0x00, 0x01, 0x02, 0x03]);
        assert_eq!(t.cells()[1], [0x11, 0x12, 0x13, 0x10]);
        assert_eq!(t.cells()[2], [0x22, 0x23, 0x20, 0x21]);
        assert_eq!(t.cells()[3], [0x33, 0x30, 0x31, 0x32]);
        let flat = State::from_cells([[0xAB; 4]; 4]);
        assert_eq!(shift_row(flat), flat);

        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let s = random_state(&mut rng);
            assert_eq!(inv_shift_row(shift_row(s)), s);
        }
    }

    #[test]
    fn mix_column_reference_column() {
        // Brute-force matrix-vector product as the oracle.
        let col = [0xDB, 0x13, 0x53, 0x45];
        assert_eq!(mat_times_column(&MIX, col), [0x8E, 0x4D, 0xA1, 0xBC]);
        let mut s = State::default();
        s.set_column(2, col);
        let m = mix_column(s);
        assert_eq!(m.column(2), [0x8E, 0x4D, 0xA1, 0xBC]);
        assert_eq!(inv_mix_column(m).column(2), col);
    }

    #[test]
    fn element_indexing_matches_row_major_numbering() {
        let mut s = State::default();
        s.set_column(0, [1, 5, 9, 13]);
        assert_eq!(
            [s.element(1), s.element(5), s.element(9), s.element(13)],
            [1, 5, 9, 13]
        );
    }

    #[test]
    fn mix_matches_matrix_product() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let s = random_state(&mut rng);
            for c in 0..4 {
                assert_eq!(mix_column(s).column(c), mat_times_column(&MIX, s.column(c)));
            }
        }
    }

    #[test]
    fn constant_columns_are_fixed() {
        for x in 0..=255u8 {
            let s = State::from_cells([[x; 4]; 4]);
            assert_eq!(mix_column(s), s);
            assert_eq!(inv_mix_column(s), s);
        }
    }

    #[test]
    fn add_round_key_cases() {
        let s = State::from_cells([[0xFF; 4]; 4]);
        assert_eq!(add_round_key(s, &[0u8; 16]), s);
        assert_eq!(add_round_key(s, &[0x0F; 16]), State::from_cells([[0xF0; 4]; 4]));
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let s = random_state(&mut rng);
            let mut k = [0u8; 16];
            rng.fill(&mut k);
            assert_eq!(add_round_key(add_round_key(s, &k), &k), s);
        }
    }

    #[test]
    fn key_schedule_reference() {
        let zero = key_expand(&[0u8; 16]).unwrap();
        assert_eq!(zero.round_key(0), &[0u8; 16]);
        assert_eq!(&zero.round_key(1)[..4], &[0x62, 0x63, 0x63, 0x63]);

        // FIPS-197 appendix A.1 key.
        let key = parse_hex16("2b7e151628aed2a6abf7158809cf4f3c").unwrap();
        let ks = key_expand(&key).unwrap();
        assert_eq!(&ks.round_key(0)[..], &key[..]);
        assert_eq!(
            Block(*ks.round_key(10)).to_hex(),
            "d014f9a8c9ee2589e13f0cc8b6630ca6"
        );
        assert!(matches!(key_expand(&[0u8; 15]), Err(Error::Length { .. })));
    }

    #[test]
    fn fips_vector() {
        let pt = Block::from_hex("00112233445566778899aabbccddeeff").unwrap();
        let key = parse_hex16("000102030405060708090a0b0c0d0e0f").unwrap();
        let ks = key_expand(&key).unwrap();
        let ct = encrypt_block(&pt, &ks);
        assert_eq!(ct.to_hex(), "69c4e0d86a7b0430d8cdb78070b4c55a");
        assert_eq!(decrypt_block(&ct, &ks), pt);
    }

    #[test]
    fn equal_blocks_give_equal_ciphertexts() {
        let ks = key_expand(&[9u8; 16]).unwrap();
        let b = Block([0x42; 16]);
        assert_eq!(encrypt_block(&b, &ks), encrypt_block(&b, &ks));
    }

    #[test]
    fn hex_parsing_rejects_bad_input() {
        assert!(Block::from_hex("00112233445566778899aabbccddeef").is_err());
        assert!(Block::from_hex("zz112233445566778899aabbccddeeff").is_err());
        assert!(Block::from_hex("00112233445566778899aabbccddeeffaa").is_err());
        assert_eq!(
            Block::from_hex("00112233445566778899AABBCCDDEEFF").unwrap().to_hex(),
            "00112233445566778899aabbccddeeff"
        );
    }
}

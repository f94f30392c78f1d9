//! Packed binary codes and the Hamming retrieval engine.
//!
//! A code is `r` bits packed into 64-bit words (bit `k` of word `k/64` is set
//! iff component `k` is +1; padding bits above `r` are always zero, so
//! distances reduce to word-wise XOR + popcount). Ranking is an exact linear
//! scan sorted by `(distance, database index)`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const DB_MAGIC: [u8; 4] = *b"HNDB";
const DB_VERSION: u8 = 1;

/// An r-bit binary code in canonical packed form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PackedCode {
    r: usize,
    words: Vec<u64>,
}

pub(crate) fn words_for(r: usize) -> usize {
    r.div_ceil(64)
}

/// Mask selecting the valid bits of the last word.
fn tail_mask(r: usize) -> u64 {
    match r % 64 {
        0 => u64::MAX,
        t => (1u64 << t) - 1,
    }
}

impl PackedCode {
    /// Builds a code from raw words, enforcing zero padding bits.
    pub fn from_words(r: usize, words: Vec<u64>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidConfig("code length must be >= 1".into()));
        }
        if words.len() != words_for(r) {
            return Err(Error::DimensionMismatch(format!(
                "code of {} bits needs {} words, got {}",
                r,
                words_for(r),
                words.len()
            )));
        }
        if words[words.len() - 1] & !tail_mask(r) != 0 {
            return Err(Error::InvalidConfig(
                "padding bits above the code length must be zero".into(),
            ));
        }
        Ok(Self { r, words })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Packs a ±1 sign vector; bit k is set iff `bits[k] == +1`.
pub fn pack(bits: &[i8]) -> Result<PackedCode> {
    if bits.is_empty() {
        return Err(Error::InvalidConfig("code length must be >= 1".into()));
    }
    let mut words = vec![0u64; words_for(bits.len())];
    for (k, &b) in bits.iter().enumerate() {
        match b {
            1 => words[k / 64] |= 1u64 << (k % 64),
            -1 => {}
            other => {
                return Err(Error::Parse(format!(
                    "code component {} is {}, expected -1 or +1",
                    k, other
                )))
            }
        }
    }
    Ok(PackedCode {
        r: bits.len(),
        words,
    })
}

/// Inverse of [`pack`].
pub fn unpack(code: &PackedCode) -> Vec<i8> {
    (0..code.r)
        .map(|k| {
            if code.words[k / 64] >> (k % 64) & 1 == 1 {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// Hamming distance via XOR + popcount over the packed words.
pub fn hamming(a: &PackedCode, b: &PackedCode) -> Result<u32> {
    if a.r != b.r {
        return Err(Error::DimensionMismatch(format!(
            "code lengths differ: {} vs {}",
            a.r, b.r
        )));
    }
    Ok(hamming_words(&a.words, &b.words))
}

#[inline]
fn hamming_words(a: &[u64], b: &[u64]) -> u32 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x ^ y).count_ones())
        .sum()
}

/// A flat database of equal-length codes with a parallel id array.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeDatabase {
    r: usize,
    words_per_code: usize,
    words: Vec<u64>,
    ids: Vec<u64>,
}

impl CodeDatabase {
    pub fn new(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidConfig("code length must be >= 1".into()));
        }
        Ok(Self {
            r,
            words_per_code: words_for(r),
            words: Vec::new(),
            ids: Vec::new(),
        })
    }

    pub fn push(&mut self, code: &PackedCode, id: u64) -> Result<()> {
        if code.r != self.r {
            return Err(Error::DimensionMismatch(format!(
                "database holds {}-bit codes, got {}",
                self.r, code.r
            )));
        }
        self.words.extend_from_slice(&code.words);
        self.ids.push(id);
        Ok(())
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn code_words(&self, index: usize) -> &[u64] {
        let start = index * self.words_per_code;
        &self.words[start..start + self.words_per_code]
    }

    pub fn code(&self, index: usize) -> PackedCode {
        PackedCode {
            r: self.r,
            words: self.code_words(index).to_vec(),
        }
    }

    /// Position of the entry with the given id, if present.
    pub fn find_id(&self, id: u64) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = crate::data::io::tmp_path(path);
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(&DB_MAGIC)?;
        w.write_all(&[DB_VERSION])?;
        w.write_all(&(self.r as u32).to_le_bytes())?;
        w.write_all(&(self.ids.len() as u64).to_le_bytes())?;
        for word in &self.words {
            w.write_all(&word.to_le_bytes())?;
        }
        for id in &self.ids {
            w.write_all(&id.to_le_bytes())?;
        }
        w.flush()?;
        drop(w);
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic, "magic")?;
        if magic != DB_MAGIC {
            return Err(Error::BadMagic {
                expected: DB_MAGIC,
                found: magic,
            });
        }
        let mut ver = [0u8; 1];
        read_exact(&mut r, &mut ver, "version")?;
        if ver[0] != DB_VERSION {
            return Err(Error::UnsupportedVersion {
                expected: DB_VERSION,
                found: ver[0],
            });
        }
        let mut buf4 = [0u8; 4];
        read_exact(&mut r, &mut buf4, "code length")?;
        let bits = u32::from_le_bytes(buf4) as usize;
        if bits == 0 {
            return Err(Error::Parse("code length must be >= 1".into()));
        }
        let mut buf8 = [0u8; 8];
        read_exact(&mut r, &mut buf8, "entry count")?;
        let count = u64::from_le_bytes(buf8) as usize;
        let wpc = words_for(bits);
        let mut words = Vec::with_capacity(count * wpc);
        for i in 0..count * wpc {
            read_exact(&mut r, &mut buf8, &format!("code word {}", i))?;
            words.push(u64::from_le_bytes(buf8));
        }
        let mask = tail_mask(bits);
        for i in 0..count {
            if words[i * wpc + wpc - 1] & !mask != 0 {
                return Err(Error::Parse(format!(
                    "entry {} has nonzero padding bits",
                    i
                )));
            }
        }
        let mut ids = Vec::with_capacity(count);
        for i in 0..count {
            read_exact(&mut r, &mut buf8, &format!("id {}", i))?;
            ids.push(u64::from_le_bytes(buf8));
        }
        Ok(Self {
            r: bits,
            words_per_code: wpc,
            words,
            ids,
        })
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Truncated(format!("file ended while reading {}", what))
        } else {
            Error::Io(e)
        }
    })
}

/// Distances from a query to every database entry, in database order.
pub fn distances(query: &PackedCode, db: &CodeDatabase) -> Result<Vec<u32>> {
    if query.r != db.r {
        return Err(Error::DimensionMismatch(format!(
            "query has {} bits, database {}",
            query.r, db.r
        )));
    }
    Ok((0..db.len())
        .map(|i| hamming_words(&query.words, db.code_words(i)))
        .collect())
}

/// All database indices sorted by ascending Hamming distance, ties broken by
/// ascending index.
pub fn rank(query: &PackedCode, db: &CodeDatabase) -> Result<Vec<usize>> {
    let dist = distances(query, db)?;
    let mut order: Vec<usize> = (0..db.len()).collect();
    order.sort_unstable_by_key(|&i| (dist[i], i));
    Ok(order)
}

/// First `min(k, len)` entries of [`rank`].
pub fn search_topk(query: &PackedCode, db: &CodeDatabase, k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be >= 1".into()));
    }
    let mut order = rank(query, db)?;
    order.truncate(k);
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn code_of(bits: &[i8]) -> PackedCode {
        pack(bits).unwrap()
    }

    #[test]
    fn pack_all_plus_one_r12() {
        let c = code_of(&[1; 12]);
        assert_eq!(c.words(), &[0x0FFF]);
    }

    #[test]
    fn pack_all_minus_one_is_zero_words() {
        let c = code_of(&[-1; 70]);
        assert_eq!(c.words(), &[0, 0]);
    }

    #[test]
    fn pack_rejects_bad_entry() {
        assert!(matches!(pack(&[1, 0, -1]), Err(Error::Parse(_))));
    }

    #[test]
    fn hamming_identical_is_zero() {
        let c = code_of(&[1, -1, 1, -1]);
        assert_eq!(hamming(&c, &c).unwrap(), 0);
    }

    #[test]
    fn hamming_complementary_r12() {
        let a = code_of(&[1; 12]);
        let b = code_of(&[-1; 12]);
        assert_eq!(hamming(&a, &b).unwrap(), 12);
    }

    #[test]
    fn hamming_matches_inner_product_identity_example() {
        // a·b = 0 on r=4 gives distance (4 - 0)/2 = 2
        let a = code_of(&[1, 1, -1, 1]);
        let b = code_of(&[1, -1, -1, -1]);
        assert_eq!(hamming(&a, &b).unwrap(), 2);
    }

    #[test]
    fn hamming_rejects_length_mismatch() {
        let a = code_of(&[1; 4]);
        let b = code_of(&[1; 5]);
        assert!(matches!(
            hamming(&a, &b),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn rank_single_entry() {
        let mut db = CodeDatabase::new(4).unwrap();
        db.push(&code_of(&[1, 1, -1, 1]), 7).unwrap();
        let q = code_of(&[-1, -1, -1, -1]);
        assert_eq!(rank(&q, &db).unwrap(), vec![0]);
    }

    #[test]
    fn rank_puts_exact_match_first() {
        let mut db = CodeDatabase::new(6).unwrap();
        db.push(&code_of(&[1, 1, 1, -1, -1, -1]), 0).unwrap();
        db.push(&code_of(&[-1, 1, -1, 1, -1, 1]), 1).unwrap();
        db.push(&code_of(&[1, -1, 1, -1, 1, -1]), 2).unwrap();
        let q = db.code(1);
        assert_eq!(rank(&q, &db).unwrap()[0], 1);
    }

    #[test]
    fn search_topk_is_rank_prefix_and_k_clamps() {
        let mut db = CodeDatabase::new(8).unwrap();
        for i in 0..10u8 {
            let bits: Vec<i8> = (0..8).map(|k| if i >> (k % 8) & 1 == 1 { 1 } else { -1 }).collect();
            db.push(&code_of(&bits), i as u64).unwrap();
        }
        let q = db.code(3);
        let full = rank(&q, &db).unwrap();
        assert_eq!(search_topk(&q, &db, 4).unwrap(), full[..4]);
        assert_eq!(search_topk(&q, &db, 100).unwrap(), full);
        assert_eq!(search_topk(&q, &db, 1).unwrap(), full[..1]);
        assert!(search_topk(&q, &db, 0).is_err());
    }

    #[test]
    fn db_roundtrip_through_file() {
        let mut db = CodeDatabase::new(100).unwrap();
        let bits: Vec<i8> = (0..100).map(|k| if k % 3 == 0 { 1 } else { -1 }).collect();
        db.push(&code_of(&bits), 42).unwrap();
        db.push(&code_of(&[-1; 100]), 43).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("codes.hndb");
        db.save(&path).unwrap();
        let back = CodeDatabase::load(&path).unwrap();
        assert_eq!(db, back);
    }

    #[test]
    fn db_load_rejects_bad_magic_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.hndb");
        std::fs::write(&path, b"NOPE\x01").unwrap();
        assert!(matches!(
            CodeDatabase::load(&path),
            Err(Error::BadMagic { .. })
        ));
        // valid header claiming one 64-bit entry, but no body
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"HNDB");
        bytes.push(1);
        bytes.extend_from_slice(&64u32.to_le_bytes());
        bytes.extend_from_slice(&1u64.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            CodeDatabase::load(&path),
            Err(Error::Truncated(_))
        ));
    }

    fn sign_vec(r: usize) -> impl Strategy<Value = Vec<i8>> {
        proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], r..=r)
    }

    proptest! {
        #[test]
        fn unpack_pack_roundtrip(bits in (1usize..200).prop_flat_map(sign_vec)) {
            let code = pack(&bits).unwrap();
            prop_assert_eq!(unpack(&code), bits);
            // canonical padding
            prop_assert_eq!(code.words().last().unwrap() & !super::tail_mask(code.r()), 0);
        }

        #[test]
        fn popcount_distance_equals_sign_identity(
            (a, b) in (1usize..150).prop_flat_map(|r| (sign_vec(r), sign_vec(r)))
        ) {
            let ca = pack(&a).unwrap();
            let cb = pack(&b).unwrap();
            let dot: i64 = a.iter().zip(b.iter()).map(|(&x, &y)| x as i64 * y as i64).sum();
            let expected = (a.len() as i64 - dot) / 2;
            prop_assert_eq!(hamming(&ca, &cb).unwrap() as i64, expected);
        }

        #[test]
        fn rank_is_distance_sorted_permutation(
            codes in proptest::collection::vec(sign_vec(16), 1..60),
            qbits in sign_vec(16)
        ) {
            let mut db = CodeDatabase::new(16).unwrap();
            for (i, bits) in codes.iter().enumerate() {
                db.push(&pack(bits).unwrap(), i as u64).unwrap();
            }
            let q = pack(&qbits).unwrap();
            let order = rank(&q, &db).unwrap();
            let mut seen = vec![false; db.len()];
            for &i in &order {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
            prop_assert!(seen.into_iter().all(|s| s));
            let dist = distances(&q, &db).unwrap();
            for w in order.windows(2) {
                prop_assert!(dist[w[0]] <= dist[w[1]]);
                if dist[w[0]] == dist[w[1]] {
                    prop_assert!(w[0] < w[1]);
                }
            }
        }
    }
}

//! Binary TT serialization.
//!
//! Layout, all little-endian: `u64` order `d`, `d` x `u64` mode sizes,
//! `d+1` x `u64` ranks, then each core as `f64` values in row-major
//! `r_{i-1} x r_i x K_i` order.

use std::io::{Read, Write};

use super::{TtCore, TtTensor};
use crate::error::{Error, Result};

/// Refuse headers that would allocate more than this many scalars.
const MAX_SCALARS: u64 = 1 << 32;

pub fn write_tt<W: Write>(t: &TtTensor, mut w: W) -> Result<()> {
    w.write_all(&(t.order() as u64).to_le_bytes())?;
    for n in t.mode_sizes() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for r in t.ranks() {
        w.write_all(&(r as u64).to_le_bytes())?;
    }
    for c in t.cores() {
        let (l, n, r) = (c.left(), c.size(), c.right());
        let mut buf = Vec::with_capacity(l * n * r * 8);
        for a in 0..l {
            for b in 0..r {
                for k in 0..n {
                    buf.extend_from_slice(&c.at(a, k, b).to_le_bytes());
                }
            }
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_tt<R: Read>(mut r: R) -> Result<TtTensor> {
    let d = read_u64(&mut r)?;
    if d == 0 || d > 4096 {
        return Err(Error::Shape(format!("implausible tensor order {d}")));
    }
    let d = d as usize;
    let sizes = (0..d).map(|_| read_u64(&mut r)).collect::<Result<Vec<_>>>()?;
    let ranks = (0..=d).map(|_| read_u64(&mut r)).collect::<Result<Vec<_>>>()?;
    let mut total: u64 = 0;
    for i in 0..d {
        let len = ranks[i]
            .checked_mul(ranks[i + 1])
            .and_then(|x| x.checked_mul(sizes[i]))
            .ok_or_else(|| Error::Shape("core size overflows".into()))?;
        total = total.saturating_add(len);
    }
    if total > MAX_SCALARS {
        return Err(Error::Shape(format!("header asks for {total} scalars")));
    }
    let mut cores = Vec::with_capacity(d);
    for i in 0..d {
        let (l, n, rr) = (ranks[i] as usize, sizes[i] as usize, ranks[i + 1] as usize);
        let mut raw = vec![0u8; l * n * rr * 8];
        r.read_exact(&mut raw)?;
        let mut data = vec![0.0; l * n * rr];
        let mut vals = raw.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()));
        for a in 0..l {
            for b in 0..rr {
                for k in 0..n {
                    data[(a * n + k) * rr + b] = vals.next().unwrap();
                }
            }
        }
        cores.push(TtCore::new(l, n, rr, data)?);
    }
    TtTensor::from_cores(cores)
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::random_tt;
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let t = random_tt(&[5, 6, 7, 8], &[2, 3, 4], 5);
        let mut buf = Vec::new();
        write_tt(&t, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 * (1 + 4 + 5) + 8 * t.param_count());
        assert_eq!(read_tt(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn header_and_layout() {
        // Core 0 is 1x2x3 (r0 x r1 x K): element (0, b, k) at offset b*3+k.
        let c0 = TtCore::new(1, 3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let c1 = TtCore::new(2, 1, 1, vec![7.0, 8.0]).unwrap();
        let t = TtTensor::from_cores(vec![c0, c1]).unwrap();
        let mut buf = Vec::new();
        write_tt(&t, &mut buf).unwrap();
        let u = |i: usize| u64::from_le_bytes(buf[i * 8..i * 8 + 8].try_into().unwrap());
        assert_eq!((u(0), u(1), u(2), u(3), u(4), u(5)), (2, 3, 1, 1, 2, 1));
        let f = |i: usize| f64::from_le_bytes(buf[i * 8..i * 8 + 8].try_into().unwrap());
        let body: Vec<f64> = (6..12).map(f).collect();
        assert_eq!(body, vec![1.0, 3.0, 5.0, 2.0, 4.0, 6.0]);
    }

    #[test]
    fn truncated_input_fails() {
        let t = random_tt(&[3, 3], &[2], 1);
        let mut buf = Vec::new();
        write_tt(&t, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_tt(buf.as_slice()), Err(Error::Io(_))));
    }

    #[test]
    fn broken_rank_chain_fails() {
        let mut buf = Vec::new();
        for v in [1u64, 2, 2, 2] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend(std::iter::repeat_n(0u8, 8 * 8));
        assert!(read_tt(buf.as_slice()).is_err());
    }
}

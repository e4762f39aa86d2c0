//! Inner-product and DEOR extractors on single blocks and on bit streams.
//!
//! Streams are raw bytes read LSB-first: bit `j` of a stream is bit `j % 8`
//! of byte `j / 8`. Block `b` of each input occupies bits `b*n..(b+1)*n`.
//! Weak output per block is `Z` (`m` bits); strong output is `Z` followed by
//! the block's `Y` (`m + n` bits). Outputs are packed back to back and the
//! final byte is zero-padded.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use crate::bitlinalg::{BitSink, BitVector, Construction, MatrixFamily};
use crate::par::{self, ExecMode};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractorKind {
    Ip,
    Deor,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractorSpec {
    kind: ExtractorKind,
    n: usize,
    family: Option<MatrixFamily>,
}

impl ExtractorSpec {
    pub fn ip(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("block size must be positive".into()));
        }
        Ok(Self {
            kind: ExtractorKind::Ip,
            n,
            family: None,
        })
    }

    pub fn deor(family: MatrixFamily) -> Self {
        Self {
            kind: ExtractorKind::Deor,
            n: family.n(),
            family: Some(family),
        }
    }

    pub fn kind(&self) -> ExtractorKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Output bits per block: 1 for IP, `family.m` for DEOR.
    pub fn m(&self) -> usize {
        self.family.as_ref().map_or(1, MatrixFamily::m)
    }

    pub fn family(&self) -> Option<&MatrixFamily> {
        self.family.as_ref()
    }

    pub fn output_bits(&self, strong: bool) -> usize {
        self.m() + if strong { self.n } else { 0 }
    }

    pub fn extract(&self, x: &BitVector, y: &BitVector) -> Result<BitVector> {
        match self.kind {
            ExtractorKind::Ip => Ok(BitVector::from_bools([ip_extract(x, y)?])),
            ExtractorKind::Deor => deor_extract(self, x, y),
        }
    }
}

/// `x . y mod 2`.
pub fn ip_extract(x: &BitVector, y: &BitVector) -> Result<bool> {
    x.dot(y)
}

/// `(x^T K_1 y, ..., x^T K_m y)`. Circulant families take the rotation path;
/// everything else goes through [`deor_extract_naive`].
pub fn deor_extract(spec: &ExtractorSpec, x: &BitVector, y: &BitVector) -> Result<BitVector> {
    let family = deor_family(spec, x, y)?;
    if family.construction() == Construction::Circulant {
        Ok(circulant_unchecked(family.m(), x, y))
    } else {
        Ok(naive_unchecked(family, x, y))
    }
}

/// Reference evaluation: one matrix-vector product per output bit.
pub fn deor_extract_naive(spec: &ExtractorSpec, x: &BitVector, y: &BitVector) -> Result<BitVector> {
    let family = deor_family(spec, x, y)?;
    Ok(naive_unchecked(family, x, y))
}

fn deor_family<'a>(spec: &'a ExtractorSpec, x: &BitVector, y: &BitVector) -> Result<&'a MatrixFamily> {
    let family = spec
        .family
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("DEOR extraction needs a matrix family".into()))?;
    for v in [x, y] {
        if v.len() != spec.n {
            return Err(Error::DimensionMismatch {
                expected: spec.n,
                got: v.len(),
            });
        }
    }
    Ok(family)
}

fn naive_unchecked(family: &MatrixFamily, x: &BitVector, y: &BitVector) -> BitVector {
    BitVector::from_bools(
        family
            .matrices()
            .iter()
            .map(|k| x.dot_unchecked(&k.matvec_unchecked(y))),
    )
}

// K_i y = C^(i-1) y is y rotated left by i-1, so bit i is a cyclic
// cross-correlation coefficient of x and y.
fn circulant_unchecked(m: usize, x: &BitVector, y: &BitVector) -> BitVector {
    BitVector::from_bools((0..m).map(|i| x.dot_unchecked(&y.rotate_left(i))))
}

/// A streaming extraction request.
#[derive(Clone, Debug)]
pub struct ExtractionJob {
    pub spec: ExtractorSpec,
    pub strong: bool,
    pub blocks: u64,
    pub mode: ExecMode,
    /// Blocks read per refill; rounded up to a multiple of 8.
    pub chunk_blocks: usize,
}

impl ExtractionJob {
    pub const DEFAULT_CHUNK_BLOCKS: usize = 1 << 15;

    pub fn new(spec: ExtractorSpec, strong: bool, blocks: u64) -> Self {
        Self {
            spec,
            strong,
            blocks,
            mode: ExecMode::default(),
            chunk_blocks: Self::DEFAULT_CHUNK_BLOCKS,
        }
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_chunk_blocks(mut self, chunk_blocks: usize) -> Self {
        self.chunk_blocks = chunk_blocks;
        self
    }

    pub fn output_bytes(&self) -> u64 {
        (self.blocks * self.spec.output_bits(self.strong) as u64).div_ceil(8)
    }
}

/// Summary of a completed stream extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StreamStats {
    pub blocks: u64,
    pub input_bytes: u64,
    pub output_bytes: u64,
}

// Blocks handed to one worker at a time. A multiple of 8 keeps every
// worker's output byte-aligned.
const WORKER_BLOCKS: usize = 512;

/// Extracts `job.blocks` blocks from `x` and `y` into `out`.
///
/// Blocks are processed in chunks; within a chunk, groups of blocks are mapped
/// in parallel (per `job.mode`) and emitted in block order, so the output is
/// bit-identical regardless of thread count. A stream that ends before the
/// last requested block yields [`Error::Truncated`] naming the first
/// incomplete block; output for earlier chunks may already have been written.
pub fn extract_stream<X: Read, Y: Read, W: Write>(
    job: &ExtractionJob,
    mut x: X,
    mut y: Y,
    mut out: W,
) -> Result<StreamStats> {
    let n = job.spec.n;
    let chunk = job.chunk_blocks.max(1).next_multiple_of(8);
    let mut xbuf = Vec::new();
    let mut ybuf = Vec::new();
    let mut done = 0u64;
    let mut written = 0u64;
    while done < job.blocks {
        let count = (job.blocks - done).min(chunk as u64) as usize;
        // count * n is a whole number of bytes except possibly in the final chunk
        let want = (count * n).div_ceil(8);
        let got_x = fill(&mut x, &mut xbuf, want)?;
        let got_y = fill(&mut y, &mut ybuf, want)?;
        let avail_bits = got_x.min(got_y) * 8;
        if avail_bits < count * n {
            return Err(Error::Truncated {
                block: done + (avail_bits / n) as u64,
            });
        }
        let bytes = extract_blocks(&job.spec, job.strong, &xbuf, &ybuf, count, job.mode)?;
        out.write_all(&bytes)?;
        written += bytes.len() as u64;
        done += count as u64;
    }
    out.flush()?;
    Ok(StreamStats {
        blocks: done,
        input_bytes: 2 * (done * n as u64).div_ceil(8),
        output_bytes: written,
    })
}

fn fill<R: Read>(r: &mut R, buf: &mut Vec<u8>, want: usize) -> io::Result<usize> {
    buf.clear();
    r.take(want as u64).read_to_end(buf)
}

/// Extracts `count` blocks from in-memory LSB-first buffers.
pub fn extract_blocks(
    spec: &ExtractorSpec,
    strong: bool,
    x: &[u8],
    y: &[u8],
    count: usize,
    mode: ExecMode,
) -> Result<Vec<u8>> {
    let n = spec.n;
    let need = count * n;
    for buf in [x, y] {
        if buf.len() * 8 < need {
            return Err(Error::Truncated {
                block: (buf.len() * 8 / n) as u64,
            });
        }
    }
    let groups = count.div_ceil(WORKER_BLOCKS);
    let parts = par::map_indexed(mode, groups, |g| {
        let start = g * WORKER_BLOCKS;
        let end = (start + WORKER_BLOCKS).min(count);
        extract_group(spec, strong, x, y, start..end)
    });
    let mut bytes = Vec::with_capacity((count * spec.output_bits(strong)).div_ceil(8));
    for part in parts {
        bytes.extend_from_slice(&part);
    }
    Ok(bytes)
}

fn extract_group(
    spec: &ExtractorSpec,
    strong: bool,
    x: &[u8],
    y: &[u8],
    blocks: std::ops::Range<usize>,
) -> Vec<u8> {
    let n = spec.n;
    let mut sink = BitSink::with_capacity_bits(blocks.len() * spec.output_bits(strong));
    let byte_aligned = n.is_multiple_of(8);
    for b in blocks {
        if spec.kind == ExtractorKind::Ip && byte_aligned && !strong {
            let range = b * n / 8..(b + 1) * n / 8;
            sink.push_bit(ip_bytes(&x[range.clone()], &y[range]));
            continue;
        }
        // bounds were checked by the caller
        let xb = BitVector::from_le_bits(x, b * n, n).expect("x block in range");
        let yb = BitVector::from_le_bits(y, b * n, n).expect("y block in range");
        match spec.kind {
            ExtractorKind::Ip => sink.push_bit(xb.dot_unchecked(&yb)),
            ExtractorKind::Deor => {
                let family = spec.family.as_ref().expect("DEOR spec carries a family");
                let z = if family.construction() == Construction::Circulant {
                    circulant_unchecked(family.m(), &xb, &yb)
                } else {
                    naive_unchecked(family, &xb, &yb)
                };
                z.append_to(&mut sink);
            }
        }
        if strong {
            yb.append_to(&mut sink);
        }
    }
    sink.into_bytes()
}

fn ip_bytes(x: &[u8], y: &[u8]) -> bool {
    let mut acc = 0u64;
    let mut xc = x.chunks_exact(8);
    let mut yc = y.chunks_exact(8);
    for (a, b) in (&mut xc).zip(&mut yc) {
        let a = u64::from_le_bytes(a.try_into().expect("8-byte chunk"));
        let b = u64::from_le_bytes(b.try_into().expect("8-byte chunk"));
        acc ^= a & b;
    }
    for (a, b) in xc.remainder().iter().zip(yc.remainder()) {
        acc ^= u64::from(a & b);
    }
    acc.count_ones() & 1 == 1
}

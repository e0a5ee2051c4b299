//! Dense kernels for applying few-site superoperators to row-major blocks of
//! vectorized operators without materializing the embedded `4^L x 4^L` matrix.
//!
//! A block is `4^L` rows by `ncols` columns, stored row-major. Each row index
//! is a vectorized-operator index `i * 2^L + j`; a local gate touches the row
//! bits belonging to its sites and leaves every other bit untouched.

use faer::linalg::matmul::matmul;
use faer::{Accum, MatMut, MatRef, Par};

use crate::C64;

const CHUNK: usize = 1024;
/// Blocks at least this wide go through the packed GEMM path.
const GEMM_MIN_COLS: usize = 32;

/// Global bit positions (LSB = 0) of the local superoperator index bits.
///
/// Local index layout for a `k`-site superoperator is `i_loc * 2^k + j_loc`
/// with local qubit `q` at bit `k - 1 - q` of both `i_loc` and `j_loc`.
/// Entry `b` of the result is the global position of local bit `b`.
pub fn superop_bit_positions(sites: &[usize], n: usize) -> Vec<u32> {
    let k = sites.len();
    let mut pos = vec![0u32; 2 * k];
    for (q, &s) in sites.iter().enumerate() {
        pos[k - 1 - q] = (n - 1 - s) as u32;
        pos[2 * k - 1 - q] = (2 * n - 1 - s) as u32;
    }
    pos
}

/// Global bit positions for a `k`-site operator acting on `n` qubits.
pub fn operator_bit_positions(sites: &[usize], n: usize) -> Vec<u32> {
    let k = sites.len();
    let mut pos = vec![0u32; k];
    for (q, &s) in sites.iter().enumerate() {
        pos[k - 1 - q] = (n - 1 - s) as u32;
    }
    pos
}

/// Offsets of every local index inside the global index space.
pub fn local_offsets(positions: &[u32]) -> Vec<usize> {
    let d = 1usize << positions.len();
    (0..d)
        .map(|loc| {
            positions
                .iter()
                .enumerate()
                .filter(|(b, _)| loc >> b & 1 == 1)
                .map(|(_, &p)| 1usize << p)
                .sum()
        })
        .collect()
}

/// Iterator over all global indices whose bits at `positions` are zero.
pub fn rest_indices(total_bits: u32, positions: &[u32]) -> impl Iterator<Item = usize> {
    let mut sorted = positions.to_vec();
    sorted.sort_unstable();
    let count = 1usize << (total_bits as usize - positions.len());
    (0..count).map(move |mut r| {
        for &p in &sorted {
            let low = r & ((1usize << p) - 1);
            r = ((r >> p) << (p + 1)) | low;
        }
        r
    })
}

/// A square local matrix with a precomputed sparsity pattern, ready to be
/// applied to blocks of rows.
#[derive(Clone, Debug)]
pub struct LocalKernel {
    dim: usize,
    dense: Vec<C64>,
    rows: Vec<Vec<(usize, C64)>>,
}

impl LocalKernel {
    pub fn new(dim: usize, dense: Vec<C64>) -> Self {
        assert_eq!(dense.len(), dim * dim, "local kernel must be square");
        let rows = (0..dim)
            .map(|k| {
                (0..dim)
                    .filter_map(|l| {
                        let g = dense[k * dim + l];
                        (g != C64::new(0.0, 0.0)).then_some((l, g))
                    })
                    .collect()
            })
            .collect();
        Self { dim, dense, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dense(&self) -> &[C64] {
        &self.dense
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// In-place `block <- G_embedded * block`, with `G` acting on the row
    /// bits at `positions`.
    pub fn apply_rows(&self, block: &mut [C64], ncols: usize, total_bits: u32, positions: &[u32]) {
        debug_assert_eq!(1usize << positions.len(), self.dim);
        debug_assert_eq!(block.len(), (1usize << total_bits) * ncols);
        let offsets = local_offsets(positions);
        if ncols >= GEMM_MIN_COLS {
            self.apply_rows_gemm(block, ncols, total_bits, positions, &offsets);
            return;
        }
        let width = ncols.min(CHUNK);
        let mut buf = vec![C64::new(0.0, 0.0); self.dim * width];
        for base in rest_indices(total_bits, positions) {
            let mut c0 = 0;
            while c0 < ncols {
                let w = width.min(ncols - c0);
                for (l, off) in offsets.iter().enumerate() {
                    let start = (base + off) * ncols + c0;
                    buf[l * width..l * width + w].copy_from_slice(&block[start..start + w]);
                }
                for (k, off) in offsets.iter().enumerate() {
                    let start = (base + off) * ncols + c0;
                    let out = &mut block[start..start + w];
                    out.fill(C64::new(0.0, 0.0));
                    for &(l, g) in &self.rows[k] {
                        let src = &buf[l * width..l * width + w];
                        for (o, s) in out.iter_mut().zip(src) {
                            *o += g * s;
                        }
                    }
                }
                c0 += w;
            }
        }
    }

    fn apply_rows_gemm(&self, block: &mut [C64], ncols: usize, total_bits: u32, positions: &[u32], offsets: &[usize]) {
        let d = self.dim;
        let width = ncols.min(CHUNK);
        let g = MatRef::from_row_major_slice(&self.dense, d, d);
        let mut inb = vec![C64::new(0.0, 0.0); d * width];
        let mut outb = vec![C64::new(0.0, 0.0); d * width];
        for base in rest_indices(total_bits, positions) {
            let mut c0 = 0;
            while c0 < ncols {
                let w = width.min(ncols - c0);
                for (l, off) in offsets.iter().enumerate() {
                    let start = (base + off) * ncols + c0;
                    inb[l * w..(l + 1) * w].copy_from_slice(&block[start..start + w]);
                }
                matmul(
                    MatMut::from_row_major_slice_mut(&mut outb[..d * w], d, w),
                    Accum::Replace,
                    g,
                    MatRef::from_row_major_slice(&inb[..d * w], d, w),
                    C64::new(1.0, 0.0),
                    Par::Seq,
                );
                for (k, off) in offsets.iter().enumerate() {
                    let start = (base + off) * ncols + c0;
                    block[start..start + w].copy_from_slice(&outb[k * w..(k + 1) * w]);
                }
                c0 += w;
            }
        }
    }
}

/// Local environment `E[k][l] = sum_{rest, c} A[(k, rest), c] * conj(B[(l, rest), c])`.
///
/// This is the partial contraction of `A * B^dagger` over every index the
/// local gate does not touch; it yields the gradient of `Re tr(A^dagger G B)`
/// with respect to the local gate entries.
pub fn local_environment(
    a: &[C64],
    b: &[C64],
    ncols: usize,
    total_bits: u32,
    positions: &[u32],
) -> Vec<C64> {
    let d = 1usize << positions.len();
    let offsets = local_offsets(positions);
    let width = ncols.min(CHUNK);
    let mut env = vec![C64::new(0.0, 0.0); d * d];
    let mut abuf = vec![C64::new(0.0, 0.0); d * width];
    let mut bbuf = vec![C64::new(0.0, 0.0); d * width];
    for base in rest_indices(total_bits, positions) {
        let mut c0 = 0;
        while c0 < ncols {
            let w = width.min(ncols - c0);
            for (l, off) in offsets.iter().enumerate() {
                let start = (base + off) * ncols + c0;
                abuf[l * w..(l + 1) * w].copy_from_slice(&a[start..start + w]);
                bbuf[l * w..(l + 1) * w].copy_from_slice(&b[start..start + w]);
            }
            matmul(
                MatMut::from_row_major_slice_mut(&mut env, d, d),
                Accum::Add,
                MatRef::from_row_major_slice(&abuf[..d * w], d, w),
                MatRef::from_row_major_slice(&bbuf[..d * w], d, w).adjoint(),
                C64::new(1.0, 0.0),
                Par::Seq,
            );
            c0 += w;
        }
    }
    env
}

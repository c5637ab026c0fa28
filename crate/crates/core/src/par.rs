//! Data-parallel helpers. With the `parallel` feature these run on the rayon
//! pool; without it they fall back to plain sequential loops with identical
//! results and ordering.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Below this many output entries a matrix product is done on one thread.
const PAR_MATMUL_MIN: usize = 64 * 64;

/// `(0..n).map(f).collect()`, possibly in parallel. Output order is the index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Maps a slice, possibly in parallel, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Number of independent work chunks worth creating.
pub fn chunk_count() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads().max(1)
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Runs two closures, concurrently when the pool allows it.
pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    {
        rayon::join(a, b)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (a(), b())
    }
}

/// Dense complex product `a * b`; large products are split by column blocks.
pub fn matmul(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimensions differ");
    let (m, n) = (a.nrows(), b.ncols());
    if m * n < PAR_MATMUL_MIN || n < 2 {
        return a * b;
    }
    #[cfg(feature = "parallel")]
    {
        let threads = rayon::current_num_threads().max(1);
        let chunk = n.div_ceil(threads).max(8);
        let starts: Vec<usize> = (0..n).step_by(chunk).collect();
        let blocks = map_slice(&starts, |&c0| {
            let w = chunk.min(n - c0);
            a * b.columns(c0, w)
        });
        let mut out = DMatrix::zeros(m, n);
        for (c0, blk) in starts.iter().zip(blocks) {
            out.columns_mut(*c0, blk.ncols()).copy_from(&blk);
        }
        out
    }
    #[cfg(not(feature = "parallel"))]
    {
        a * b
    }
}

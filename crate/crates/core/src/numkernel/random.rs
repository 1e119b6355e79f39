use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::{c64, CMat, C64};

/// Deterministic, splittable random source.
///
/// Backed by ChaCha20: the seed fixes the key and the stream id selects an
/// independent keystream, so draws for one `(seed, stream)` pair never depend
/// on what other streams consumed.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    stream: u64,
    inner: ChaCha20Rng,
}

impl Rng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Rng { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Stream for trial `trial` of the suite numbered `suite`.
    pub fn for_trial(seed: u64, suite: u32, trial: u32) -> Self {
        Rng::new(seed, (u64::from(suite) << 32) | u64::from(trial))
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Complex Gaussian with `E|z|^2 = 1`.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        c64(s * self.normal(), s * self.normal())
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.inner.random::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleKind {
    /// Haar-distributed unitary.
    Unitary,
    /// `(G + G*) / 2` for a Ginibre matrix `G`.
    Hermitian,
    /// Ginibre: i.i.d. standard complex Gaussian entries.
    General,
    /// Ginibre scaled by the given factor.
    SmallGeneral(f64),
}

/// Rectangular Ginibre matrix.
pub fn sample_rect(rows: usize, cols: usize, rng: &mut Rng) -> CMat {
    // explicit loop keeps the draw order row-major and fixed
    let mut a = CMat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            a[(i, j)] = rng.complex_normal();
        }
    }
    a
}

pub fn sample_random(kind: SampleKind, n: usize, rng: &mut Rng) -> CMat {
    match kind {
        SampleKind::General => sample_rect(n, n, rng),
        SampleKind::SmallGeneral(scale) => sample_rect(n, n, rng) * c64(scale, 0.0),
        SampleKind::Hermitian => {
            let g = sample_rect(n, n, rng);
            (&g + g.adjoint()) * c64(0.5, 0.0)
        }
        SampleKind::Unitary => {
            let qr = sample_rect(n, n, rng).qr();
            let mut q = qr.q();
            let r = qr.r();
            // fix column phases so the distribution is Haar
            for j in 0..n {
                let d = r[(j, j)];
                let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
                let mut col = q.column_mut(j);
                col *= phase;
            }
            q
        }
    }
}

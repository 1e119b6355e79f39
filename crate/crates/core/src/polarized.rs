//! The polarized space `H = H+ ⊕ H-` at finite truncation.
//!
//! Basis vectors `0..n_plus` span `H+`, the remaining `n_minus` span `H-`.
//! Projections act by masking rows/columns, never by multiplication.

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::numkernel::{c64, CMat, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polarization {
    n_plus: usize,
    n_minus: usize,
}

impl Polarization {
    pub fn new(n_plus: usize, n_minus: usize) -> Result<Self> {
        if n_plus == 0 || n_minus == 0 {
            return Err(Error::InvalidInput(format!(
                "polarization needs n_plus >= 1 and n_minus >= 1, got ({n_plus}, {n_minus})"
            )));
        }
        Ok(Polarization { n_plus, n_minus })
    }

    /// `n_plus = n_minus = n`.
    pub fn symmetric(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn n_plus(&self) -> usize {
        self.n_plus
    }

    pub fn n_minus(&self) -> usize {
        self.n_minus
    }

    pub fn dim(&self) -> usize {
        self.n_plus + self.n_minus
    }

    fn sign(&self, i: usize) -> f64 {
        if i < self.n_plus {
            1.0
        } else {
            -1.0
        }
    }

    /// The grading operator `ε = pr+ - pr-`.
    pub fn epsilon(&self) -> CMat {
        let n = self.dim();
        CMat::from_fn(n, n, |i, j| if i == j { c64(self.sign(i), 0.0) } else { C64::default() })
    }

    pub fn pr_plus(&self) -> CMat {
        let n = self.dim();
        CMat::from_fn(n, n, |i, j| if i == j && i < self.n_plus { c64(1.0, 0.0) } else { C64::default() })
    }

    pub fn pr_minus(&self) -> CMat {
        let n = self.dim();
        CMat::from_fn(n, n, |i, j| if i == j && i >= self.n_plus { c64(1.0, 0.0) } else { C64::default() })
    }

    fn check_rows(&self, a: &CMat, op: &'static str) -> Result<()> {
        if a.nrows() == self.dim() {
            Ok(())
        } else {
            Err(shape_err(op, format!("{} rows", self.dim()), format!("{} rows", a.nrows())))
        }
    }

    pub(crate) fn check_square(&self, a: &CMat, op: &'static str) -> Result<()> {
        let n = self.dim();
        if a.shape() == (n, n) {
            Ok(())
        } else {
            Err(shape_err(op, format!("{n}x{n}"), format!("{}x{}", a.nrows(), a.ncols())))
        }
    }

    /// `pr+ · a`, kept in the ambient space (lower rows zeroed).
    pub fn apply_pr_plus(&self, a: &CMat) -> Result<CMat> {
        self.check_rows(a, "apply_pr_plus")?;
        let mut out = a.clone();
        out.rows_mut(self.n_plus, self.n_minus).fill(C64::default());
        Ok(out)
    }

    /// `pr- · a`, kept in the ambient space (upper rows zeroed).
    pub fn apply_pr_minus(&self, a: &CMat) -> Result<CMat> {
        self.check_rows(a, "apply_pr_minus")?;
        let mut out = a.clone();
        out.rows_mut(0, self.n_plus).fill(C64::default());
        Ok(out)
    }

    /// `ε · a` by row sign flips.
    pub fn apply_epsilon(&self, a: &CMat) -> Result<CMat> {
        self.check_rows(a, "apply_epsilon")?;
        let mut out = a.clone();
        out.rows_mut(self.n_plus, self.n_minus).neg_mut();
        Ok(out)
    }

    /// `a · ε` by column sign flips.
    pub fn epsilon_right(&self, a: &CMat) -> Result<CMat> {
        if a.ncols() != self.dim() {
            return Err(shape_err("epsilon_right", format!("{} columns", self.dim()), a.ncols()));
        }
        let mut out = a.clone();
        out.columns_mut(self.n_plus, self.n_minus).neg_mut();
        Ok(out)
    }

    /// The `H+` component of an operator into `H`, as an `n_plus × k` block.
    pub fn upper(&self, a: &CMat) -> Result<CMat> {
        self.check_rows(a, "upper")?;
        Ok(a.rows(0, self.n_plus).into_owned())
    }

    /// The `H-` component of an operator into `H`, as an `n_minus × k` block.
    pub fn lower(&self, a: &CMat) -> Result<CMat> {
        self.check_rows(a, "lower")?;
        Ok(a.rows(self.n_plus, self.n_minus).into_owned())
    }

    pub fn split_blocks(&self, a: &CMat) -> Result<Blocks> {
        self.check_square(a, "split_blocks")?;
        let (p, m) = (self.n_plus, self.n_minus);
        Ok(Blocks {
            a: a.view((0, 0), (p, p)).into_owned(),
            b: a.view((0, p), (p, m)).into_owned(),
            c: a.view((p, 0), (m, p)).into_owned(),
            d: a.view((p, p), (m, m)).into_owned(),
        })
    }

    /// `½ tr(A + εAε)`; at finite dimension this is `tr(a) + tr(d)`.
    pub fn conditional_trace(&self, a: &CMat) -> Result<C64> {
        self.check_square(a, "conditional_trace")?;
        let eae = self.epsilon_right(&self.apply_epsilon(a)?)?;
        Ok((a + eae).diagonal().iter().sum::<C64>() * 0.5)
    }
}

/// Block decomposition `[[a, b], [c, d]]` relative to `H+ ⊕ H-`.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
    pub d: CMat,
}

impl Blocks {
    pub fn assemble(&self) -> CMat {
        let (p, m) = (self.a.nrows(), self.d.nrows());
        let mut out = CMat::zeros(p + m, p + m);
        out.view_mut((0, 0), (p, p)).copy_from(&self.a);
        out.view_mut((0, p), (p, m)).copy_from(&self.b);
        out.view_mut((p, 0), (m, p)).copy_from(&self.c);
        out.view_mut((p, p), (m, m)).copy_from(&self.d);
        out
    }
}

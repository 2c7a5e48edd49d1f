//! Diagonal-norm summation-by-parts first-derivative operators.
//!
//! An operator is `D = P⁻¹Q` with `P` diagonal positive and
//! `Q + Qᵀ = diag(-1, 0, …, 0, 1)`. Two operators are provided: the 2-1
//! operator (interior order 2, boundary order 1) and the classical 4-2
//! operator (interior order 4, boundary order 2) with a four-point closure.
//!
//! Coefficients are kept as exact rationals until the operator is built.
//! The right closure is the left closure mirrored: `D[n-1-i][n-1-j] = -D[i][j]`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    Sbp2,
    Sbp4,
}

impl Order {
    pub fn min_points(self) -> usize {
        match self {
            Order::Sbp2 => 4,
            Order::Sbp4 => 12,
        }
    }

    /// Interior accuracy order.
    pub fn interior_order(self) -> u32 {
        match self {
            Order::Sbp2 => 2,
            Order::Sbp4 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Order::Sbp2 => "SBP2",
            Order::Sbp4 => "SBP4",
        }
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy)]
struct Ratio(i64, i64);

impl Ratio {
    const ZERO: Ratio = Ratio(0, 1);

    fn to_f64(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }

    /// `self / other`, evaluated exactly before rounding.
    fn div(self, other: Ratio) -> f64 {
        (self.0 * other.1) as f64 / (self.1 * other.0) as f64
    }
}

struct Coefficients {
    /// Boundary norm weights (in units of dx); interior weight is 1.
    weights: &'static [Ratio],
    /// Rows of Q in the left closure, starting at column 0.
    closure: &'static [&'static [Ratio]],
    /// Right half of the interior Q stencil, offsets 1..=r; the left half is antisymmetric.
    interior: &'static [Ratio],
}

const SBP2: Coefficients = Coefficients {
    weights: &[Ratio(1, 2)],
    closure: &[&[Ratio(-1, 2), Ratio(1, 2)]],
    interior: &[Ratio(1, 2)],
};

#[rustfmt::skip]
const SBP4: Coefficients = Coefficients {
    weights: &[Ratio(17, 48), Ratio(59, 48), Ratio(43, 48), Ratio(49, 48)],
    closure: &[
        &[Ratio(-1, 2), Ratio(59, 96), Ratio(-1, 12), Ratio(-1, 32)],
        &[Ratio(-59, 96), Ratio::ZERO, Ratio(59, 96)],
        &[Ratio(1, 12), Ratio(-59, 96), Ratio::ZERO, Ratio(59, 96), Ratio(-1, 12)],
        &[Ratio(1, 32), Ratio::ZERO, Ratio(-59, 96), Ratio::ZERO, Ratio(2, 3), Ratio(-1, 12)],
    ],
    interior: &[Ratio(2, 3), Ratio(-1, 12)],
};

impl Order {
    fn coefficients(self) -> &'static Coefficients {
        match self {
            Order::Sbp2 => &SBP2,
            Order::Sbp4 => &SBP4,
        }
    }
}

/// A banded SBP first-derivative operator on `n` equispaced points.
#[derive(Debug, Clone)]
pub struct SbpOperator1D {
    order: Order,
    n: usize,
    dx: f64,
    p_diag: Vec<f64>,
    /// Left closure rows of Q, starting at column 0.
    q_closure: Vec<Vec<f64>>,
    /// Left closure rows of D, starting at column 0.
    d_closure: Vec<Vec<f64>>,
    /// Right closure rows of D, bottom row first, each paired with its first column.
    d_right: Vec<(usize, Vec<f64>)>,
    /// Full interior Q stencil, offsets -r..=r.
    q_interior: Vec<f64>,
    /// Full interior D stencil, offsets -r..=r.
    d_interior: Vec<f64>,
}

impl SbpOperator1D {
    pub fn new(order: Order, n: usize, dx: f64) -> Result<Self> {
        let min = order.min_points();
        if n < min {
            return Err(Error::TooFewPoints {
                order: order.name(),
                min,
                n,
            });
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::BadSpacing(dx));
        }
        let c = order.coefficients();
        let nb = c.closure.len();

        let mut p_diag = vec![dx; n];
        for (k, w) in c.weights.iter().enumerate() {
            p_diag[k] = w.to_f64() * dx;
            p_diag[n - 1 - k] = w.to_f64() * dx;
        }

        let q_closure: Vec<Vec<f64>> = c
            .closure
            .iter()
            .map(|row| row.iter().map(|q| q.to_f64()).collect())
            .collect();
        let d_closure: Vec<Vec<f64>> = c
            .closure
            .iter()
            .zip(c.weights)
            .map(|(row, &w)| row.iter().map(|&q| q.div(w) / dx).collect())
            .collect();
        debug_assert_eq!(nb, c.weights.len());

        let r = c.interior.len();
        let mut q_interior = vec![0.0; 2 * r + 1];
        for (k, q) in c.interior.iter().enumerate() {
            q_interior[r + 1 + k] = q.to_f64();
            q_interior[r - 1 - k] = -q.to_f64();
        }
        let d_interior = q_interior.iter().map(|q| q / dx).collect();
        let d_right = d_closure
            .iter()
            .map(|row: &Vec<f64>| (n - row.len(), row.iter().rev().map(|d| -d).collect()))
            .collect();

        Ok(Self {
            order,
            n,
            dx,
            p_diag,
            q_closure,
            d_closure,
            d_right,
            q_interior,
            d_interior,
        })
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn p_diag(&self) -> &[f64] {
        &self.p_diag
    }

    fn closure_rows(&self) -> usize {
        self.d_closure.len()
    }

    fn half_width(&self) -> usize {
        self.d_interior.len() / 2
    }

    /// Nonzero pattern of row `i` of D: `(first column, coefficients)`.
    ///
    /// Coefficients are contiguous; some closure entries are exact zeros.
    pub fn d_row(&self, i: usize) -> (usize, &[f64]) {
        let nb = self.closure_rows();
        let n = self.n;
        if i < nb {
            (0, &self.d_closure[i])
        } else if i >= n - nb {
            let (start, coefs) = &self.d_right[n - 1 - i];
            (*start, coefs)
        } else {
            (i - self.half_width(), &self.d_interior)
        }
    }

    /// Writes `D w` into `out` by banded stencil application.
    ///
    /// `stride` lets the same kernel run along a non-contiguous axis: element
    /// `k` of the line is `w[k * stride]`.
    pub(crate) fn apply_strided(&self, w: &[f64], stride: usize, out: &mut [f64], out_stride: usize) {
        let n = self.n;
        let nb = self.closure_rows();
        let r = self.half_width();
        let at = |k: usize| w[k * stride];
        for (i, row) in self.d_closure.iter().enumerate() {
            let mut s = 0.0;
            for (k, d) in row.iter().enumerate() {
                s += d * at(k);
            }
            out[i * out_stride] = s;

            let mut s = 0.0;
            for (k, d) in row.iter().enumerate() {
                s -= d * at(n - 1 - k);
            }
            out[(n - 1 - i) * out_stride] = s;
        }
        for i in nb..n - nb {
            let mut s = 0.0;
            for (k, d) in self.d_interior.iter().enumerate() {
                s += d * at(i + k - r);
            }
            out[i * out_stride] = s;
        }
    }

    pub fn apply_d(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_len(w.len())?;
        let mut out = vec![0.0; self.n];
        self.apply_strided(w, 1, &mut out, 1);
        Ok(out)
    }

    /// `(v, w)_P = Σ p_j v_j w_j`.
    pub fn p_inner(&self, v: &[f64], w: &[f64]) -> Result<f64> {
        self.check_len(v.len())?;
        self.check_len(w.len())?;
        Ok(self
            .p_diag
            .iter()
            .zip(v.iter().zip(w))
            .map(|(p, (a, b))| p * a * b)
            .sum())
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got,
            });
        }
        Ok(())
    }

    /// Dense Q, row-major. Intended for tests and debugging only.
    pub fn q_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        let nb = self.closure_rows();
        let r = self.half_width();
        let mut q = vec![vec![0.0; n]; n];
        for (i, row) in self.q_closure.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                q[i][k] = *v;
                q[n - 1 - i][n - 1 - k] = -v;
            }
        }
        for (i, qrow) in q.iter_mut().enumerate().take(n - nb).skip(nb) {
            for (k, v) in self.q_interior.iter().enumerate() {
                qrow[i + k - r] = *v;
            }
        }
        q
    }

    /// Dense D, row-major. Intended for tests and debugging only.
    pub fn d_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            let (start, coefs) = self.d_row(i);
            row[start..start + coefs.len()].copy_from_slice(coefs);
        }
        d
    }

    /// Plain-text dump of P (diagonal) and Q.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {} n={} dx={:.17e}", self.order, self.n, self.dx);
        let _ = writeln!(s, "P");
        for p in &self.p_diag {
            let _ = writeln!(s, "{p:.17e}");
        }
        let _ = writeln!(s, "Q");
        for row in self.q_dense() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }
}

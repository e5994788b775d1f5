//! Banded complex matrices: Givens QR and smallest-singular-value search.

use alloc::vec;
use alloc::vec::Vec;

use crate::real::{real, Cx, Real};

/// Square matrix with `lower` sub- and `upper` super-diagonals. Rows carry
/// `lower` extra columns on the right so QR fill-in fits.
#[derive(Clone, Debug)]
pub struct Banded {
    n: usize,
    lower: usize,
    upper: usize,
    rows: Vec<Vec<Cx>>,
}

impl Banded {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let width = 2 * lower + upper + 1;
        Banded {
            n,
            lower,
            upper,
            rows: vec![vec![Cx::ZERO; width]; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn offset(&self, i: usize, j: usize) -> Option<usize> {
        let first = i as isize - self.lower as isize;
        let off = j as isize - first;
        (off >= 0 && (off as usize) < self.rows[i].len()).then_some(off as usize)
    }

    pub fn get(&self, i: usize, j: usize) -> Cx {
        self.offset(i, j).map_or(Cx::ZERO, |o| self.rows[i][o])
    }

    /// Panics outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: Cx) {
        assert!(
            j + self.lower >= i && j <= i + self.upper,
            "entry ({i}, {j}) outside the band"
        );
        let o = self.offset(i, j).expect("inside storage");
        self.rows[i][o] = v;
    }

    pub fn mul_vec(&self, x: &[Cx]) -> Vec<Cx> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper).min(self.n - 1);
                (lo..=hi).fold(Cx::ZERO, |acc, j| acc + self.get(i, j) * x[j])
            })
            .collect()
    }

    /// Subtracts `λ` from the diagonal.
    pub fn shifted(&self, lambda: Cx) -> Banded {
        let mut out = self.clone();
        for i in 0..self.n {
            let v = out.get(i, i) - lambda;
            out.set(i, i, v);
        }
        out
    }

    fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| {
            let lo = i.saturating_sub(self.lower);
            let hi = (i + self.upper).min(self.n - 1);
            (lo..=hi).all(|j| j == i || self.get(i, j).is_zero())
        })
    }

    /// Upper-triangular `R` from `A = QR`, with bandwidth `lower + upper`.
    fn qr_r(&self) -> Banded {
        let mut r = self.clone();
        let reach = self.lower + self.upper;
        for c in 0..self.n {
            for row in c + 1..(c + self.lower + 1).min(self.n) {
                let b = r.get(row, c);
                if b.is_zero() {
                    continue;
                }
                let a = r.get(c, c);
                let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
                let (ca, cb) = (a.conj().scale(norm.recip()), b.conj().scale(norm.recip()));
                let (sa, sb) = (a.scale(norm.recip()), b.scale(norm.recip()));
                for j in c..(c + reach + 1).min(self.n) {
                    let (x, y) = (r.get(c, j), r.get(row, j));
                    let top = ca * x + cb * y;
                    let bottom = sa * y - sb * x;
                    if let Some(o) = r.offset(c, j) {
                        r.rows[c][o] = top;
                    }
                    if let Some(o) = r.offset(row, j) {
                        r.rows[row][o] = bottom;
                    }
                }
            }
        }
        r
    }
}

/// Result of a smallest-singular-value search.
#[derive(Clone, Debug)]
pub struct SingularEstimate {
    /// `‖A v‖` for the returned unit vector; an upper bound on `σ_min`.
    pub sigma: Real,
    pub vector: Vec<Cx>,
}

/// Pivot magnitude substituted for exact zeros in `R`.
fn tiny() -> Real {
    real(1e-72)
}

fn solve_upper(r: &Banded, reach: usize, y: &[Cx]) -> Vec<Cx> {
    let n = r.n;
    let mut x = vec![Cx::ZERO; n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        for j in i + 1..(i + reach + 1).min(n) {
            acc -= r.get(i, j) * x[j];
        }
        let d = r.get(i, i);
        let d = if d.abs() < tiny() {
            Cx::from_real(tiny())
        } else {
            d
        };
        x[i] = acc / d;
    }
    x
}

fn solve_upper_adjoint(r: &Banded, reach: usize, y: &[Cx]) -> Vec<Cx> {
    let n = r.n;
    let mut x = vec![Cx::ZERO; n];
    for i in 0..n {
        let mut acc = y[i];
        for j in i.saturating_sub(reach)..i {
            acc -= r.get(j, i).conj() * x[j];
        }
        let d = r.get(i, i).conj();
        let d = if d.abs() < tiny() {
            Cx::from_real(tiny())
        } else {
            d
        };
        x[i] = acc / d;
    }
    x
}

fn normalize(v: &mut [Cx]) -> Real {
    let n = v.iter().fold(Real::ZERO, |a, c| a + c.norm_sqr()).sqrt();
    if !n.eq_zero() {
        v.iter_mut().for_each(|c| *c = c.scale(n.recip()));
    }
    n
}

/// Smallest singular value of `A` by inverse iteration on `(A*A)⁻¹`.
/// Diagonal matrices are answered exactly.
pub fn smallest_singular(a: &Banded, iterations: usize) -> SingularEstimate {
    let n = a.n;
    if a.is_diagonal() {
        let (i, sigma) =
            (0..n)
                .map(|i| (i, a.get(i, i).abs()))
                .fold(
                    (0, Real::INFINITY),
                    |best, cur| if cur.1 < best.1 { cur } else { best },
                );
        let mut vector = vec![Cx::ZERO; n];
        vector[i] = Cx::ONE;
        return SingularEstimate { sigma, vector };
    }
    let r = a.qr_r();
    let reach = a.lower + a.upper;
    let mut x: Vec<Cx> = (0..n)
        .map(|i| Cx::turn(real(0.618_034) * Real::from(i as u64 * i as u64)))
        .collect();
    normalize(&mut x);
    for _ in 0..iterations.max(1) {
        let y = solve_upper_adjoint(&r, reach, &x);
        x = solve_upper(&r, reach, &y);
        normalize(&mut x);
    }
    let residual = a.mul_vec(&x);
    let sigma = residual
        .iter()
        .fold(Real::ZERO, |acc, c| acc + c.norm_sqr())
        .sqrt();
    SingularEstimate { sigma, vector: x }
}

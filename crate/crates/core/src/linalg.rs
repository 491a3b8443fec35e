//! Minimal dense complex linear algebra for small (N ≲ 16) systems.
//!
//! Chain Hamiltonians here are tiny, so everything is a dense row-major
//! square matrix; no sparsity is exploited.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

/// Complex state vector.
pub type CVector<R> = Vec<Complex<R>>;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<R> {
    dim: usize,
    data: Vec<Complex<R>>,
}

impl<R: Real> CMatrix<R> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex<R>]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[Complex<R>]) -> CVector<R> {
        debug_assert_eq!(x.len(), self.dim);
        let mut y = vec![Complex::zero(); self.dim];
        for i in 0..self.dim {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            let mut acc = Complex::zero();
            for (a, xj) in row.iter().zip(x) {
                acc += *a * *xj;
            }
            y[i] = acc;
        }
        y
    }

    /// `y = A† x` (conjugate-transpose product, without forming A†).
    pub fn adjoint_matvec(&self, x: &[Complex<R>]) -> CVector<R> {
        debug_assert_eq!(x.len(), self.dim);
        let mut y = vec![Complex::zero(); self.dim];
        for j in 0..self.dim {
            let xj = x[j];
            for i in 0..self.dim {
                y[i] += self.data[j * self.dim + i].conj() * xj;
            }
        }
        y
    }

    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= *b;
        }
        out
    }

    pub fn scale(&self, factor: Complex<R>) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= factor;
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// Maximum column sum of absolute values.
    pub fn one_norm(&self) -> R {
        let n = self.dim;
        let mut best = R::zero();
        for j in 0..n {
            let mut col = R::zero();
            for i in 0..n {
                col += self.data[i * n + j].norm();
            }
            if col > best {
                best = col;
            }
        }
        best
    }

    /// Largest entry magnitude; convenient for closeness checks.
    pub fn max_norm(&self) -> R {
        self.data.iter().fold(R::zero(), |acc, z| acc.max(z.norm()))
    }

    /// Deviation from Hermiticity, `max |A - A†|`.
    pub fn hermiticity_defect(&self) -> R {
        self.sub(&self.adjoint()).max_norm()
    }
}

impl<R> std::ops::Index<(usize, usize)> for CMatrix<R> {
    type Output = Complex<R>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<R> {
        &self.data[i * self.dim + j]
    }
}

impl<R> std::ops::IndexMut<(usize, usize)> for CMatrix<R> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<R> {
        let n = self.dim;
        &mut self.data[i * n + j]
    }
}

/// Hermitian inner product `⟨a|b⟩ = Σ conj(a_i) b_i`.
pub fn vdot<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> Complex<R> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * *y).fold(Complex::zero(), |acc, z| acc + z)
}

/// Euclidean norm of a complex vector.
pub fn vec_norm<R: Real>(v: &[Complex<R>]) -> R {
    v.iter().fold(R::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// `a + s b` elementwise.
pub fn axpy<R: Real>(a: &[Complex<R>], s: Complex<R>, b: &[Complex<R>]) -> CVector<R> {
    a.iter().zip(b).map(|(x, y)| *x + s * *y).collect()
}

/// Matrix exponential by scaling-and-squaring with a Padé(13) approximant
/// (Higham 2005). Accurate to machine precision for the small matrices
/// used here.
pub fn expm<R: Real>(a: &CMatrix<R>) -> CMatrix<R> {
    let n = a.dim();
    if n == 0 {
        return CMatrix::zeros(0);
    }
    let theta13 = R::of(5.371_920_351_148_152);
    let norm = a.one_norm();
    let squarings = if norm > theta13 {
        (norm / theta13).log2().ceil().to_usize().unwrap_or(0)
    } else {
        0
    };
    let scale = R::of(0.5).powi(squarings as i32);
    let a_scaled = a.scale(Complex::new(scale, R::zero()));
    let mut result = pade13(&a_scaled);
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

// Padé(13) coefficients b_0..b_13 for exp, from Higham (2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn pade13<R: Real>(a: &CMatrix<R>) -> CMatrix<R> {
    let n = a.dim();
    let b: Vec<Complex<R>> =
        PADE13.iter().map(|&c| Complex::new(R::of(c), R::zero())).collect();
    let eye = CMatrix::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);

    // u = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let inner = a6.scale(b[13]).add(&a4.scale(b[11])).add(&a2.scale(b[9]));
    let u = a.matmul(
        &a6.matmul(&inner)
            .add(&a6.scale(b[7]))
            .add(&a4.scale(b[5]))
            .add(&a2.scale(b[3]))
            .add(&eye.scale(b[1])),
    );
    // v = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let inner = a6.scale(b[12]).add(&a4.scale(b[10])).add(&a2.scale(b[8]));
    let v = a6
        .matmul(&inner)
        .add(&a6.scale(b[6]))
        .add(&a4.scale(b[4]))
        .add(&a2.scale(b[2]))
        .add(&eye.scale(b[0]));

    // exp(A) ≈ (v - u)^{-1} (v + u)
    let rhs = v.add(&u);
    let lhs = v.sub(&u);
    solve_matrix(&lhs, &rhs)
}

/// Solve `A X = B` for square complex `A` by LU with partial pivoting.
fn solve_matrix<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> CMatrix<R> {
    let n = a.dim();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let mut pivot = k;
        let mut best = lu[(k, k)].norm();
        for i in (k + 1)..n {
            let mag = lu[(i, k)].norm();
            if mag > best {
                best = mag;
                pivot = i;
            }
        }
        if pivot != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = tmp;
            }
            perm.swap(k, pivot);
        }
        let diag = lu[(k, k)];
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / diag;
            lu[(i, k)] = factor;
            for j in (k + 1)..n {
                let sub = factor * lu[(k, j)];
                lu[(i, j)] -= sub;
            }
        }
    }

    let mut x = CMatrix::zeros(n);
    for col in 0..n {
        // forward substitution on the permuted right-hand side
        let mut y = vec![Complex::zero(); n];
        for i in 0..n {
            let mut acc = b[(perm[i], col)];
            for j in 0..i {
                acc -= lu[(i, j)] * y[j];
            }
            y[i] = acc;
        }
        // back substitution
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in (i + 1)..n {
                acc -= lu[(i, j)] * x[(j, col)];
            }
            x[(i, col)] = acc / lu[(i, i)];
        }
    }
    x
}

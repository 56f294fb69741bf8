//! Dense complex matrices sized for desk-scale primes (p up to a few
//! thousand): multiplication, operator norms, and a Hermitian Jacobi
//! eigensolver for the joint-diagonalization oracle.

use num_complex::Complex64;
use rayon::prelude::*;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CMatrix({}x{})", self.n, self.n)
    }
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64 + Sync) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(i, j);
            }
        });
        CMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        });
        CMatrix { n, data }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn add_assign_scaled(&mut self, other: &CMatrix, c: Complex64) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(a, x)| a * x)
                    .sum::<Complex64>()
            })
            .collect()
    }

    /// Applies the conjugate transpose without materializing it.
    pub fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.n, v.len());
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for i in 0..self.n {
            let x = v[i];
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * x;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value by power iteration on `A* A`, converging
    /// from below. The deterministic start vector avoids a pathological
    /// zero-overlap start.
    pub fn operator_norm(&self) -> f64 {
        operator_norm_of(self.n, |v| self.apply(v), |v| self.apply_adjoint(v))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Power iteration for the largest singular value of a linear map given by
/// `apply` and its adjoint. Works for any operator presented as closures,
/// so commutators never have to be materialized.
pub fn operator_norm_of(
    n: usize,
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    apply_adjoint: impl Fn(&[Complex64]) -> Vec<Complex64>,
) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i as f64) / (n as f64 + 1.0), 0.3 + (i % 7) as f64 * 0.1))
        .collect();
    normalize(&mut v);
    let mut sigma = 0.0f64;
    for iter in 0..120 {
        let w = apply(&v);
        let next_sigma = l2(&w);
        if next_sigma == 0.0 {
            return 0.0;
        }
        // Norms this far below every tolerance in the crate need no
        // further resolution.
        if iter >= 2 && next_sigma < 1e-12 {
            return next_sigma;
        }
        let mut u = apply_adjoint(&w);
        normalize(&mut u);
        v = u;
        if (next_sigma - sigma).abs() <= 1e-9 * next_sigma.max(1e-300) {
            return next_sigma;
        }
        sigma = next_sigma;
    }
    sigma
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = l2(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues (ascending) and the matching unit
/// eigenvectors as columns of `V`, so that `H V = V diag(lambda)`.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.dim();
    let mut a = h.clone();
    let mut v = CMatrix::identity(n);
    let tol = 1e-14 * h.frobenius_norm().max(1e-300);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= tol / (n as f64) {
                    continue;
                }
                // Phase that makes the pivot real, then a real Jacobi angle:
                // with J[p,p]=J[q,q]=c, J[p,q]=s e^{i psi}, J[q,p]=-s e^{-i psi}
                // the rotated (p,q) entry vanishes when tan(2 theta) =
                // 2|b| / (a_qq - a_pp).
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = 0.5 * (2.0 * mag).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                let sp = s * phase;
                // Columns p,q of A and V: right-multiply by J.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - sp.conj() * aiq;
                    a[(i, q)] = sp * aip + c * aiq;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - sp.conj() * viq;
                    v[(i, q)] = sp * vip + c * viq;
                }
                // Rows p,q of A: left-multiply by J adjoint.
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = c * apj - sp * aqj;
                    a[(q, j)] = sp.conj() * apj + c * aqj;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let eigs: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| eigs[i].partial_cmp(&eigs[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eigs[i]).collect();
    let vectors = CMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = CMatrix::zeros(n);
        for i in 0..n {
            h[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in i + 1..n {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        h
    }

    #[test]
    fn jacobi_reconstructs_hermitian() {
        for (n, seed) in [(3usize, 1u64), (8, 2), (25, 3)] {
            let h = random_hermitian(n, seed);
            let (vals, vecs) = hermitian_eigen(&h);
            // H V = V D and V* V = I.
            let hv = h.mul(&vecs);
            let mut vd = vecs.clone();
            for j in 0..n {
                for i in 0..n {
                    vd[(i, j)] = vecs[(i, j)] * vals[j];
                }
            }
            assert!(hv.sub(&vd).max_abs() < 1e-10, "n={n}");
            let gram = vecs.adjoint().mul(&vecs);
            assert!(gram.sub(&CMatrix::identity(n)).max_abs() < 1e-11);
            for w in vals.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn operator_norm_matches_diagonal() {
        let mut d = CMatrix::zeros(4);
        for (i, s) in [0.5, 2.5, 1.0, 2.0].iter().enumerate() {
            d[(i, i)] = Complex64::new(*s, 0.0);
        }
        assert!((d.operator_norm() - 2.5).abs() < 1e-8);
        assert!(d.operator_norm() <= d.frobenius_norm() + 1e-12);
    }

    #[test]
    fn operator_norm_of_zero() {
        assert_eq!(CMatrix::zeros(5).operator_norm(), 0.0);
    }
}

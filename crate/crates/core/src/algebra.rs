//! Dense complex matrices and the handful of linear-algebra primitives the
//! rest of the crate is built on.
//!
//! Storage is row-major. Tensor products use the index convention
//! `idx(x, y) = idx(x) * dim2 + idx(y)`: the first factor is the slow index.
//! Every module that builds operators on a composite space relies on this.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{cre, Real, C};

/// Absolute and relative tolerance pair used by every approximate test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance<T> {
    pub abs_eps: T,
    pub rel_eps: T,
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs_eps: T, rel_eps: T) -> Result<Self> {
        if !(abs_eps > T::zero() && rel_eps > T::zero()) {
            return Err(Error::Tolerance(format!(
                "abs_eps and rel_eps must be strictly positive, got {abs_eps} and {rel_eps}"
            )));
        }
        Ok(Self { abs_eps, rel_eps })
    }

    /// Both components set to `eps`.
    pub fn uniform(eps: T) -> Result<Self> {
        Self::new(eps, eps)
    }
}

impl<T: Real> Default for Tolerance<T> {
    fn default() -> Self {
        Self {
            abs_eps: T::default_eps(),
            rel_eps: T::default_eps(),
        }
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<C<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Dimension("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cre(T::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(diag: &[C<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_real_diag(diag: &[T]) -> Self {
        let d: Vec<C<T>> = diag.iter().map(|&x| cre(x)).collect();
        Self::from_diag(&d)
    }

    /// Build from real row slices; handy for literals in tests.
    pub fn from_real_rows(rows: &[&[T]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| cre(rows[i][j]))
    }

    /// Matrix unit `|i><j|` of size `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = cre(T::one());
        m
    }

    /// Rank-one operator `|u><v|`.
    pub fn outer(u: &[C<T>], v: &[C<T>]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> C<T> {
        let n = self.rows.min(self.cols);
        (0..n).fold(cre(T::zero()), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    /// Matrix product; panics on inner-dimension mismatch.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `self * x * self^*`.
    pub fn conjugate(&self, x: &Self) -> Self {
        self.matmul(x).matmul(&self.adjoint())
    }

    pub fn apply_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(cre(T::zero()), |acc, j| acc + self[(i, j)] * v[j])
            })
            .collect()
    }

    /// Hilbert–Schmidt inner product `tr(self^* other)`.
    pub fn hs_inner(&self, other: &Self) -> C<T> {
        self.data
            .iter()
            .zip(&other.data)
            .fold(cre(T::zero()), |acc, (a, b)| acc + a.conj() * b)
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C<T> {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = cre(T::zero());
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "shapes {}x{} and {}x{} differ",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Frobenius distance; errors on shape mismatch.
    pub fn distance(&self, other: &Self) -> Result<T> {
        self.same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc + (a - b).norm_sqr())
            .sqrt())
    }

    /// Frobenius-norm comparison:
    /// `‖a − b‖_F ≤ abs_eps + rel_eps · max(‖a‖_F, ‖b‖_F)`.
    pub fn approx_eq(&self, other: &Self, tol: Tolerance<T>) -> Result<bool> {
        let d = self.distance(other)?;
        let scale = self.frobenius_norm().max(other.frobenius_norm());
        Ok(d <= tol.abs_eps + tol.rel_eps * scale)
    }

    /// Frobenius norm of the anti-Hermitian part, `‖t − t^*‖_F`.
    pub fn hermiticity_residual(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut acc = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: Tolerance<T>) -> bool {
        self.is_square()
            && self.hermiticity_residual() <= tol.abs_eps + tol.rel_eps * self.frobenius_norm()
    }

    /// `(t + t^*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * half
        })
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |row, col| {
            self[(row / r2, col / c2)] * other[(row % r2, col % c2)]
        })
    }

    /// Partial trace over the second tensor factor of a
    /// `(dim1·dim2) × (dim1·dim2)` operator.
    pub fn partial_trace_second(&self, dim1: usize, dim2: usize) -> Result<Self> {
        self.check_bipartite(dim1, dim2)?;
        Ok(Self::from_fn(dim1, dim1, |i, j| {
            (0..dim2).fold(cre(T::zero()), |acc, k| {
                acc + self[(i * dim2 + k, j * dim2 + k)]
            })
        }))
    }

    /// Partial trace over the first tensor factor.
    pub fn partial_trace_first(&self, dim1: usize, dim2: usize) -> Result<Self> {
        self.check_bipartite(dim1, dim2)?;
        Ok(Self::from_fn(dim2, dim2, |i, j| {
            (0..dim1).fold(cre(T::zero()), |acc, k| {
                acc + self[(k * dim2 + i, k * dim2 + j)]
            })
        }))
    }

    fn check_bipartite(&self, dim1: usize, dim2: usize) -> Result<()> {
        let n = dim1 * dim2;
        if self.rows != n || self.cols != n {
            return Err(Error::Dimension(format!(
                "expected {n}x{n} operator on a {dim1}x{dim2} product space, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Eigenvalues ascending; eigenvectors are the columns of the
    /// returned unitary. Only the Hermitian part of `self` is used.
    pub fn eigh(&self) -> Result<(Vec<T>, Self)> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "eigh needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a = self.hermitian_part();
        let mut v = Self::identity(n);
        let scale = a.frobenius_norm();
        if scale == T::zero() {
            return Ok((vec![T::zero(); n], v));
        }
        let threshold = T::epsilon() * T::epsilon() * scale * scale;

        for _sweep in 0..100 {
            let off: T = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .fold(T::zero(), |acc, (i, j)| acc + a[(i, j)].norm_sqr());
            if off <= threshold {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let b = a[(p, q)];
                    let babs = b.norm();
                    if babs == T::zero() {
                        continue;
                    }
                    let phase = b / babs;
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let theta = (aqq - app) / (T::lit(2.0) * babs);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    // G = diag(1, conj(phase)) · [[c, s], [-s, c]]
                    let g_pp = cre(c);
                    let g_pq = cre(s);
                    let g_qp = phase.conj() * (-s);
                    let g_qq = phase.conj() * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * g_pp + akq * g_qp;
                        a[(k, q)] = akp * g_pq + akq * g_qq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                    }
                    a[(p, q)] = cre(T::zero());
                    a[(q, p)] = cre(T::zero());
                    a[(p, p)] = cre(a[(p, p)].re);
                    a[(q, q)] = cre(a[(q, q)].re);
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * g_pp + vkq * g_qp;
                        v[(k, q)] = vkp * g_pq + vkq * g_qq;
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).expect("finite"));
        let values = order.iter().map(|&i| a[(i, i)].re).collect();
        let vectors = Self::from_fn(n, n, |r, c| v[(r, order[c])]);
        Ok((values, vectors))
    }

    /// Positive semidefiniteness: the smallest eigenvalue must be at least
    /// `−abs_eps · (1 + ‖t‖_∞)`, with `‖t‖_∞` the spectral norm.
    pub fn is_psd(&self, tol: Tolerance<T>) -> Result<bool> {
        if !self.is_square() {
            return Err(Error::Dimension("is_psd needs a square matrix".into()));
        }
        if !self.is_hermitian(tol) {
            return Err(Error::Hermiticity {
                residual: self.hermiticity_residual().as_f64(),
            });
        }
        let (values, _) = self.eigh()?;
        let (Some(&lo), Some(&hi)) = (values.first(), values.last()) else {
            return Ok(true);
        };
        let norm = lo.abs().max(hi.abs());
        Ok(lo >= -tol.abs_eps * (T::one() + norm))
    }

    /// Singular values, descending; square roots of the eigenvalues of
    /// `t^* t` with negative round-off clipped to zero.
    pub fn singular_values(&self) -> Vec<T> {
        let gram = self.adjoint().matmul(self);
        let (values, _) = gram.eigh().expect("Gram matrix is square");
        let mut sv: Vec<T> = values.into_iter().map(|x| x.max(T::zero()).sqrt()).collect();
        sv.reverse();
        sv
    }

    /// Trace norm: sum of singular values.
    pub fn trace_norm(&self) -> T {
        self.singular_values()
            .into_iter()
            .fold(T::zero(), |acc, s| acc + s)
    }

    /// Kraus-style factorisation of a PSD matrix: vectors `v_k` with
    /// `Σ_k |v_k><v_k| = self`, dropping eigenvalues at or below `cutoff`.
    pub fn psd_factors(&self, cutoff: T) -> Result<Vec<Vec<C<T>>>> {
        let (values, vectors) = self.eigh()?;
        Ok(values
            .iter()
            .enumerate()
            .filter(|(_, &lambda)| lambda > cutoff)
            .map(|(k, &lambda)| {
                let s = lambda.sqrt();
                vectors.column(k).into_iter().map(|z| z * s).collect()
            })
            .collect())
    }

    pub(crate) fn to_f64_pairs(&self) -> Vec<[f64; 2]> {
        self.data
            .iter()
            .map(|z| [z.re.as_f64(), z.im.as_f64()])
            .collect()
    }
}

/// Free-function form of [`CMatrix::kron`].
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kron(b)
}

/// Free-function form of [`CMatrix::partial_trace_second`].
pub fn partial_trace_second<T: Real>(t: &CMatrix<T>, dim1: usize, dim2: usize) -> Result<CMatrix<T>> {
    t.partial_trace_second(dim1, dim2)
}

/// Free-function form of [`CMatrix::is_psd`].
pub fn is_psd<T: Real>(t: &CMatrix<T>, tol: Tolerance<T>) -> Result<bool> {
    t.is_psd(tol)
}

/// Free-function form of [`CMatrix::trace_norm`].
pub fn trace_norm<T: Real>(t: &CMatrix<T>) -> T {
    t.trace_norm()
}

/// Free-function form of [`CMatrix::approx_eq`].
pub fn approx_eq<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>, tol: Tolerance<T>) -> Result<bool> {
    a.approx_eq(b, tol)
}

/// Numerical rank of a real matrix given as rows, via the eigenvalues of
/// its Gram matrix. Singular values at or below `rel_cutoff · s_max` count
/// as zero.
pub fn real_rank<T: Real>(rows: &[Vec<T>], rel_cutoff: T) -> usize {
    let k = rows.len();
    if k == 0 {
        return 0;
    }
    let gram = CMatrix::from_fn(k, k, |i, j| {
        cre(rows[i]
            .iter()
            .zip(&rows[j])
            .fold(T::zero(), |acc, (a, b)| acc + *a * *b))
    });
    let sv = gram.singular_values();
    // singular values of the Gram matrix are squares of those of `rows`
    let s: Vec<T> = sv.into_iter().map(|x| x.sqrt()).collect();
    let smax = s.first().copied().unwrap_or_else(T::zero);
    if smax == T::zero() {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_cutoff * smax).count()
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;

    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn add(self, rhs: Self) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add: shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn sub(self, rhs: Self) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub: shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Neg for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn neg(self) -> CMatrix<T> {
        self.map(|z| -z)
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn mul(self, rhs: Self) -> CMatrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Real> AddAssign<&CMatrix<T>> for CMatrix<T> {
    fn add_assign(&mut self, rhs: &CMatrix<T>) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add_assign: shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl<T: Real> fmt::Debug for CMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>10.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl<T: Real> Serialize for CMatrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            data: self.to_f64_pairs(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for CMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        let data = repr
            .data
            .iter()
            .map(|[re, im]| match (T::from_f64(*re), T::from_f64(*im)) {
                (Some(re), Some(im)) => Ok(C::new(re, im)),
                _ => Err(serde::de::Error::custom("matrix entry out of range")),
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        CMatrix::new(repr.rows, repr.cols, data).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    type M = CMatrix<f64>;

    fn sx() -> M {
        M::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    fn sy() -> M {
        M::new(
            2,
            2,
            vec![cre(0.0), cx(0.0, -1.0), cx(0.0, 1.0), cre(0.0)],
        )
        .unwrap()
    }

    fn sz() -> M {
        M::from_real_diag(&[1.0, -1.0])
    }

    fn tol() -> Tolerance<f64> {
        Tolerance::default()
    }

    #[test]
    fn kron_identities_and_diagonals() {
        assert_eq!(M::identity(2).kron(&M::identity(2)), M::identity(4));
        assert_eq!(
            sz().kron(&M::identity(2)),
            M::from_real_diag(&[1.0, 1.0, -1.0, -1.0])
        );
    }

    #[test]
    fn kron_sigma_x_sigma_z_blocks() {
        // [[0, σz], [σz, 0]] written out entry by entry
        let expected = M::from_real_rows(&[
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, -1.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, -1.0, 0.0, 0.0],
        ]);
        assert_eq!(kron(&sx(), &sz()), expected);
    }

    #[test]
    fn partial_trace_examples() {
        let a = M::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = M::from_real_rows(&[&[0.5, 1.0, 0.0], &[0.0, 2.0, 0.0], &[7.0, 0.0, 0.5]]);
        let pt = partial_trace_second(&a.kron(&b), 2, 3).unwrap();
        assert!(pt.approx_eq(&a.scale_real(3.0), tol()).unwrap());

        let pt = M::identity(4).partial_trace_second(2, 2).unwrap();
        assert_eq!(pt, M::identity(2).scale_real(2.0));

        // |Φ+><Φ+| reduces to the maximally mixed qubit
        let h = 1.0 / 2f64.sqrt();
        let phi = vec![cre(h), cre(0.0), cre(0.0), cre(h)];
        let bell = M::outer(&phi, &phi);
        let pt = bell.partial_trace_second(2, 2).unwrap();
        assert!(pt.approx_eq(&M::identity(2).scale_real(0.5), tol()).unwrap());

        assert!(matches!(
            M::identity(3).partial_trace_second(2, 2),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn partial_trace_first_of_product() {
        let a = M::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = M::from_real_rows(&[&[1.0, 0.5], &[0.0, 3.0]]);
        let pt = a.kron(&b).partial_trace_first(2, 2).unwrap();
        assert!(pt.approx_eq(&b.scale_real(5.0), tol()).unwrap());
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&M::identity(2), tol()).unwrap());
        assert!(!is_psd(&sz(), tol()).unwrap());
        let k = 1.0 / 3f64.sqrt();
        let n = &(&sx().scale_real(k) + &sy().scale_real(k)) + &sz().scale_real(k);
        let s = (&M::identity(2) + &n).scale_real(0.5);
        assert!(is_psd(&s, tol()).unwrap());
        let (values, _) = s.eigh().unwrap();
        assert!(values[0].abs() < 1e-12 && (values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psd_rejects_non_hermitian() {
        let m = M::unit(2, 0, 1);
        assert!(matches!(is_psd(&m, tol()), Err(Error::Hermiticity { .. })));
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&M::identity(3)) - 3.0).abs() < 1e-12);
        assert!((trace_norm(&sz()) - 2.0).abs() < 1e-12);
        assert!((trace_norm(&M::unit(2, 0, 1)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn approx_eq_examples() {
        let i = M::identity(2);
        assert!(approx_eq(&i, &i, tol()).unwrap());
        let mut j = i.clone();
        j[(0, 0)] += cre(1e-12);
        assert!(approx_eq(&i, &j, tol()).unwrap());
        assert!(!approx_eq(&i, &sx(), tol()).unwrap());
        assert!(matches!(
            approx_eq(&i, &M::identity(3), tol()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn eigh_pauli_y() {
        let (values, vectors) = sy().eigh().unwrap();
        assert!((values[0] + 1.0).abs() < 1e-14 && (values[1] - 1.0).abs() < 1e-14);
        let back = vectors
            .matmul(&M::from_real_diag(&values))
            .matmul(&vectors.adjoint());
        assert!(back.distance(&sy()).unwrap() < 1e-14);
    }

    #[test]
    fn eigh_degenerate_and_zero() {
        let (values, v) = M::zeros(3, 3).eigh().unwrap();
        assert_eq!(values, vec![0.0; 3]);
        assert_eq!(v, M::identity(3));
        let (values, _) = M::identity(4).scale_real(2.0).eigh().unwrap();
        assert!(values.iter().all(|x| (x - 2.0).abs() < 1e-15));
    }

    #[test]
    fn real_rank_counts_independent_rows() {
        let rows = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]];
        assert_eq!(real_rank(&rows, 1e-8), 2);
        assert_eq!(real_rank::<f64>(&[], 1e-8), 0);
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(Tolerance::new(0.0, 1e-9).is_err());
        assert!(Tolerance::new(1e-9, -1.0).is_err());
        assert!(Tolerance::<f64>::uniform(1e-6).is_ok());
    }

    #[test]
    fn json_shape() {
        let m = M::new(1, 2, vec![cx(0.1, -2.5), cre(3.0)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"data":[[0.1,-2.5],[3.0,0.0]]}"#);
        let bad = r#"{"rows":2,"cols":2,"data":[[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<M>(bad).is_err());
    }

    #[test]
    fn single_precision_works() {
        let m = CMatrix::<f32>::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let (values, _) = m.eigh().unwrap();
        assert!((values[0] - 1.0).abs() < 1e-5 && (values[1] - 3.0).abs() < 1e-5);
        assert!(m.is_psd(Tolerance::default()).unwrap());
    }
}

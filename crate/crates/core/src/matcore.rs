//! Dense complex Hermitian linear algebra on tensor-product spaces.
//!
//! Basis ordering is row-major everywhere: the factor tuple `(a, b)` of
//! `A ⊗ B` sits at flat index `a * d_B + b`. Every multi-system operator
//! carries its factor signature, so subsystem reorderings are always explicit.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Relative asymmetry above which a matrix is rejected as non-Hermitian.
pub const HERMITIAN_REJECT: f64 = 1e-9;
/// Default relative rank cutoff for support projectors.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Max absolute entry, used as the scale for relative tolerances.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::Permutation(format!("order has {} entries but there are {} factors", order.len(), n)));
    }
    let mut seen = vec![false; n];
    for &k in order {
        if k >= n {
            return Err(Error::Permutation(format!("factor index {k} out of range 0..{n}")));
        }
        if seen[k] {
            return Err(Error::Permutation(format!("factor {k} appears twice")));
        }
        seen[k] = true;
    }
    Ok(())
}

/// Index map sending the flat index over `dims` to the flat index over the
/// permuted signature `dims[order[0]], dims[order[1]], ...`.
fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let new_strides = strides(&new_dims);
    // position of old factor k in the new ordering
    let mut pos = vec![0; dims.len()];
    for (p, &k) in order.iter().enumerate() {
        pos[k] = p;
    }
    (0..total)
        .map(|flat| {
            let mut out = 0;
            for k in 0..dims.len() {
                let digit = (flat / old_strides[k]) % dims[k];
                out += digit * new_strides[pos[k]];
            }
            out
        })
        .collect()
}

/// Reorders the tensor factors of a (not necessarily Hermitian) operator.
/// Factor `k` of the result is factor `order[k]` of the input.
pub fn permute_subsystems(m: &CMatrix, dims: &[usize], order: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::dim(format!("matrix is {}x{} but factors {:?} give {}", m.nrows(), m.ncols(), dims, total)));
    }
    check_permutation(order, dims.len())?;
    let map = permutation_map(dims, order);
    let mut out = CMatrix::zeros(total, total);
    for c in 0..total {
        for r in 0..total {
            out[(map[r], map[c])] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Permutes a state vector's tensor factors.
pub fn permute_vector(v: &DVector<C64>, dims: &[usize], order: &[usize]) -> Result<DVector<C64>> {
    let total: usize = dims.iter().product();
    if v.len() != total {
        return Err(Error::dim(format!("vector length {} != {}", v.len(), total)));
    }
    check_permutation(order, dims.len())?;
    let map = permutation_map(dims, order);
    let mut out = DVector::zeros(total);
    for (r, &t) in map.iter().enumerate() {
        out[t] = v[r];
    }
    Ok(out)
}

/// Partial trace of a general operator, keeping the factors in `keep`
/// (in their original relative order).
pub fn partial_trace_general(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let n = dims.len();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(Error::Permutation(format!("duplicate factor in keep {keep:?}")));
    }
    if let Some(&bad) = kept.iter().find(|&&k| k >= n) {
        return Err(Error::Permutation(format!("keep index {bad} out of range 0..{n}")));
    }
    let traced: Vec<usize> = (0..n).filter(|k| !kept.contains(k)).collect();
    let mut order = kept.clone();
    order.extend(&traced);
    let permuted = permute_subsystems(m, dims, &order)?;
    let dk: usize = kept.iter().map(|&k| dims[k]).product();
    let dt: usize = traced.iter().map(|&k| dims[k]).product();
    let mut out = CMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..dt {
                acc += permuted[(a * dt + t, b * dt + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Eigendecomposition with eigenvalues sorted ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Columns are orthonormal eigenvectors, aligned with `values`.
    pub vectors: CMatrix,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Reassembles `Σ f(λ_k) |v_k⟩⟨v_k|`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.vectors.nrows();
        let mut out = CMatrix::zeros(d, d);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            let v = self.vectors.column(k);
            out += (&v * v.adjoint()) * real(w);
        }
        out
    }
}

pub fn hermitian_spectrum(m: &CMatrix) -> Spectrum {
    let eig = SymmetricEigen::new(m.clone());
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(m.nrows(), idx.len());
    for (new, &old) in idx.iter().enumerate() {
        vectors.set_column(new, &eig.eigenvectors.column(old));
    }
    Spectrum { values, vectors }
}

/// Isometry whose columns span the eigenspace of `m` with eigenvalues above
/// `cutoff`.
pub fn range_isometry(m: &CMatrix, cutoff: f64) -> CMatrix {
    let spec = hermitian_spectrum(m);
    let cols: Vec<usize> = (0..spec.values.len()).filter(|&k| spec.values[k] > cutoff).collect();
    let mut v = CMatrix::zeros(m.nrows(), cols.len());
    for (j, &k) in cols.iter().enumerate() {
        v.set_column(j, &spec.vectors.column(k));
    }
    v
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().fold(0.0_f64, |a, &s| a.max(s))
}

/// Dense square complex matrix asserted Hermitian, with a tensor-factor signature.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    data: CMatrix,
    factors: Vec<usize>,
}

impl HermitianMatrix {
    /// Hermitizes `(X + X†)/2`, rejecting inputs whose relative asymmetry
    /// exceeds [`HERMITIAN_REJECT`].
    pub fn new(data: CMatrix) -> Result<Self> {
        let d = data.nrows();
        Self::with_factors(data, vec![d])
    }

    pub fn with_factors(data: CMatrix, factors: Vec<usize>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::dim(format!("matrix is {}x{}, not square", data.nrows(), data.ncols())));
        }
        let d = data.nrows();
        if d == 0 {
            return Err(Error::dim("empty matrix"));
        }
        check_factors(&factors, d)?;
        let scale = max_abs(&data);
        let adj = data.adjoint();
        if scale > 0.0 {
            let asym = max_abs(&(&data - &adj)) / scale;
            if asym > HERMITIAN_REJECT {
                return Err(Error::NotHermitian { asymmetry: asym });
            }
        }
        let data = (&data + adj) * real(0.5);
        Ok(Self { data, factors })
    }

    /// Wraps a matrix that is Hermitian by construction (hermitized without the
    /// rejection check).
    pub(crate) fn from_hermitian_unchecked(data: CMatrix, factors: Vec<usize>) -> Self {
        debug_assert_eq!(factors.iter().product::<usize>(), data.nrows());
        let adj = data.adjoint();
        let data = (&data + adj) * real(0.5);
        Self { data, factors }
    }

    pub fn identity(d: usize) -> Self {
        Self { data: identity(d), factors: vec![d] }
    }

    pub fn zeros(d: usize) -> Self {
        Self { data: CMatrix::zeros(d, d), factors: vec![d] }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = CMatrix::zeros(d, d);
        for (k, &v) in diag.iter().enumerate() {
            m[(k, k)] = real(v);
        }
        Self { data: m, factors: vec![d] }
    }

    /// Rank-one `|v⟩⟨v|` (unnormalized).
    pub fn outer(v: &DVector<C64>) -> Self {
        let d = v.len();
        Self { data: v * v.adjoint(), factors: vec![d] }
    }

    /// Unnormalized maximally entangled `|Φ⟩⟨Φ|` on `d ⊗ d`.
    pub fn max_entangled(d: usize) -> Self {
        let mut v = DVector::zeros(d * d);
        for k in 0..d {
            v[k * d + k] = real(1.0);
        }
        Self::outer(&v).with_signature(vec![d, d]).expect("d*d factors")
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.data[(r, c)]
    }

    pub fn with_signature(mut self, factors: Vec<usize>) -> Result<Self> {
        check_factors(&factors, self.dim())?;
        self.factors = factors;
        Ok(self)
    }

    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { data: &self.data * real(s), factors: self.factors.clone() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self { data: &self.data + &other.data, factors: self.factors.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self { data: &self.data - &other.data, factors: self.factors.clone() })
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::dim(format!("{} vs {}", self.dim(), other.dim())));
        }
        Ok(())
    }

    /// Entrywise complex conjugate (equivalently the transpose, for Hermitian X).
    pub fn conj(&self) -> Self {
        Self { data: self.data.map(|z| z.conj()), factors: self.factors.clone() }
    }

    /// `V X V†` for an arbitrary (rectangular) `V`; the result has a single factor.
    pub fn congruence(&self, v: &CMatrix) -> Result<Self> {
        if v.ncols() != self.dim() {
            return Err(Error::dim(format!("congruence by {}x{} on dim {}", v.nrows(), v.ncols(), self.dim())));
        }
        let out = v * &self.data * v.adjoint();
        let d = out.nrows();
        Ok(Self::from_hermitian_unchecked(out, vec![d]))
    }

    /// Tensor product; the factor signatures are concatenated.
    pub fn kron(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self { data: kron(&self.data, &other.data), factors }
    }

    /// Reorders tensor factors: factor `k` of the result is factor `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let data = permute_subsystems(&self.data, &self.factors, order)?;
        let factors = order.iter().map(|&k| self.factors[k]).collect();
        Ok(Self { data, factors })
    }

    /// Traces out every factor not listed in `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::Permutation("keep must be non-empty".into()));
        }
        let data = partial_trace_general(&self.data, &self.factors, keep)?;
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        let factors = kept.iter().map(|&k| self.factors[k]).collect();
        Ok(Self::from_hermitian_unchecked(data, factors))
    }

    pub fn spectrum(&self) -> Spectrum {
        hermitian_spectrum(&self.data)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum().min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.spectrum().max()
    }

    /// Largest absolute eigenvalue.
    pub fn op_norm(&self) -> f64 {
        let s = self.spectrum();
        s.min().abs().max(s.max().abs())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    /// Projector onto the span of eigenvectors whose eigenvalue exceeds
    /// `tol · λ_max`; `tol` defaults to [`DEFAULT_RANK_TOL`].
    pub fn support_projector(&self, tol: Option<f64>) -> Result<Self> {
        let tol = tol.unwrap_or(DEFAULT_RANK_TOL);
        let spec = self.spectrum();
        let scale = spec.max().abs().max(spec.min().abs());
        if spec.min() < -tol * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotPsd { eigenvalue: spec.min() });
        }
        let cutoff = tol * spec.max();
        let data = spec.reconstruct_with(|lam| if lam > cutoff && lam > 0.0 { 1.0 } else { 0.0 });
        Ok(Self::from_hermitian_unchecked(data, self.factors.clone()))
    }

    /// Number of eigenvalues above `tol · λ_max`.
    pub fn rank(&self, tol: Option<f64>) -> usize {
        let tol = tol.unwrap_or(DEFAULT_RANK_TOL);
        let spec = self.spectrum();
        let cutoff = tol * spec.max();
        spec.values.iter().filter(|&&v| v > cutoff && v > 0.0).count()
    }

    pub fn projector_residual(&self) -> f64 {
        (&self.data * &self.data - &self.data).norm()
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        self.projector_residual() <= tol
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// `Re tr(self · other)`.
    pub fn inner(&self, other: &Self) -> f64 {
        self.data.iter().zip(other.data.transpose().iter()).map(|(a, b)| (a * b).re).sum()
    }

    /// Operator square root of a PSD matrix (negative eigenvalues clamped).
    pub fn sqrt_psd(&self) -> Self {
        let data = self.spectrum().reconstruct_with(|l| l.max(0.0).sqrt());
        Self::from_hermitian_unchecked(data, self.factors.clone())
    }
}

fn check_factors(factors: &[usize], d: usize) -> Result<()> {
    if factors.is_empty() || factors.contains(&0) {
        return Err(Error::dim(format!("invalid factor signature {factors:?}")));
    }
    let p: usize = factors.iter().product();
    if p != d {
        return Err(Error::dim(format!("factors {factors:?} multiply to {p}, not {d}")));
    }
    Ok(())
}

/// Tensor product of `ops` followed by a reordering of the flattened factor
/// list. `order` indexes the concatenation of every operand's factors.
pub fn kron_perm(ops: &[&HermitianMatrix], order: &[usize]) -> Result<HermitianMatrix> {
    let (first, rest) = ops.split_first().ok_or_else(|| Error::dim("kron_perm needs at least one operand"))?;
    let mut acc = (*first).clone();
    for op in rest {
        acc = acc.kron(op);
    }
    acc.permute(order)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(x: &HermitianMatrix) -> f64 {
    x.min_eigenvalue()
}

/// Hermitian operator basis of `d×d` matrices, traceless elements only:
/// off-diagonal symmetric/antisymmetric pairs and `|0⟩⟨0| − |k⟩⟨k|`.
pub fn traceless_hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::new();
    for p in 0..d {
        for q in p + 1..d {
            let mut s = CMatrix::zeros(d, d);
            s[(p, q)] = real(1.0);
            s[(q, p)] = real(1.0);
            out.push(s);
            let mut a = CMatrix::zeros(d, d);
            a[(p, q)] = c64(0.0, -1.0);
            a[(q, p)] = c64(0.0, 1.0);
            out.push(a);
        }
    }
    for k in 1..d {
        let mut z = CMatrix::zeros(d, d);
        z[(0, 0)] = real(1.0);
        z[(k, k)] = real(-1.0);
        out.push(z);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pauli_z() -> HermitianMatrix {
        HermitianMatrix::from_diagonal(&[1.0, -1.0])
    }

    #[test]
    fn kron_perm_identity_order() {
        let x =
            HermitianMatrix::new(CMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(1.0), real(0.0)])).unwrap();
        let out = kron_perm(&[&x], &[0]).unwrap();
        assert_eq!(out, x);
    }

    #[test]
    fn kron_perm_swap() {
        let id = HermitianMatrix::identity(2);
        let z = pauli_z();
        let out = kron_perm(&[&id, &z], &[1, 0]).unwrap();
        let expected = z.kron(&id);
        assert!((out.matrix() - expected.matrix()).norm() < 1e-15);
    }

    #[test]
    fn kron_perm_rejects_bad_order() {
        let id = HermitianMatrix::identity(2);
        assert!(matches!(kron_perm(&[&id, &id], &[0, 0]), Err(Error::Permutation(_))));
        assert!(matches!(kron_perm(&[&id, &id], &[0, 2]), Err(Error::Permutation(_))));
        assert!(matches!(kron_perm(&[&id, &id], &[0]), Err(Error::Permutation(_))));
    }

    #[test]
    fn partial_trace_of_max_entangled() {
        let phi = HermitianMatrix::max_entangled(2);
        let a = phi.partial_trace(&[0]).unwrap();
        assert!((a.matrix() - identity(2)).norm() < 1e-14);
    }

    #[test]
    fn partial_trace_product_rule() {
        let x = HermitianMatrix::from_diagonal(&[0.3, 1.2]);
        let y = HermitianMatrix::from_diagonal(&[2.0, 0.5, 1.0]);
        let xy = x.kron(&y);
        let first = xy.partial_trace(&[0]).unwrap();
        assert!((first.matrix() - x.matrix() * real(y.trace())).norm() < 1e-14);
        let second = xy.partial_trace(&[1]).unwrap();
        assert!((second.matrix() - y.matrix() * real(x.trace())).norm() < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_out_of_range() {
        let x = HermitianMatrix::identity(4).with_signature(vec![2, 2]).unwrap();
        assert!(x.partial_trace(&[2]).is_err());
        assert!(x.partial_trace(&[]).is_err());
    }

    #[test]
    fn support_projector_cases() {
        let id = HermitianMatrix::identity(3);
        let p = id.support_projector(None).unwrap();
        assert!((p.matrix() - id.matrix()).norm() < 1e-12);

        let v = DVector::from_vec(vec![c64(1.0, 0.5), real(2.0), c64(0.0, -1.0)]);
        let rank1 = HermitianMatrix::outer(&v);
        let p = rank1.support_projector(None).unwrap();
        let expected = rank1.scale(1.0 / v.norm_squared());
        assert!((p.matrix() - expected.matrix()).norm() < 1e-12);
    }

    #[test]
    fn support_projector_rejects_negative() {
        let x = HermitianMatrix::from_diagonal(&[1.0, -0.5]);
        assert!(matches!(x.support_projector(None), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn eigenvalue_examples() {
        assert_abs_diff_eq!(HermitianMatrix::identity(3).min_eigenvalue(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(HermitianMatrix::from_diagonal(&[3.0, -2.0]).min_eigenvalue(), -2.0, epsilon = 1e-14);
        let phi = HermitianMatrix::max_entangled(2);
        assert_abs_diff_eq!(phi.min_eigenvalue(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(phi.max_eigenvalue(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn hermitization_rejects_asymmetric() {
        let m = CMatrix::from_row_slice(2, 2, &[real(1.0), real(1.0), real(0.0), real(1.0)]);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian { .. })));
        let tiny = CMatrix::from_row_slice(2, 2, &[real(1.0), real(1.0 + 1e-13), real(1.0), real(1.0)]);
        let h = HermitianMatrix::new(tiny).unwrap();
        assert_eq!(h.entry(0, 1), h.entry(1, 0).conj());
    }

    #[test]
    fn traceless_basis_is_complete() {
        let basis = traceless_hermitian_basis(3);
        assert_eq!(basis.len(), 8);
        for b in &basis {
            assert!(b.trace().norm() < 1e-15);
            assert!((b - b.adjoint()).norm() < 1e-15);
        }
    }
}

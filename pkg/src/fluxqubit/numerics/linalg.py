"""Dense Hermitian operators and their lowest eigenpairs."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from ..errors import NumericError, ValidationError

ASYMMETRY_TOL = 1e-14
RESIDUAL_TOL = 1e-10


class HermitianOperator:
    """Dense Hermitian matrix.

    The constructor checks that ``matrix`` equals its conjugate transpose to
    within ``1e-14`` of its norm, then stores the exactly symmetrized
    ``(M + M^H) / 2``. A real-valued input keeps a real ``float64`` storage,
    which lets :func:`hermitian_eig` take the real-symmetric LAPACK path.
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = np.asarray(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"expected a square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("matrix has non-finite entries")
        if np.iscomplexobj(m) and not np.any(m.imag):
            m = m.real
        m = m.astype(np.complex128 if np.iscomplexobj(m) else np.float64)
        scale = np.linalg.norm(m)
        asym = np.linalg.norm(m - m.conj().T)
        if asym > ASYMMETRY_TOL * max(scale, np.finfo(float).tiny):
            raise ValidationError(
                f"matrix is not Hermitian: |M - M^H| = {asym:.3e}, |M| = {scale:.3e}"
            )
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        self.matrix = m

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix)

    def norm(self) -> float:
        """Frobenius norm, an upper bound on the spectral norm."""
        return float(np.linalg.norm(self.matrix))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        kind = "real" if self.is_real else "complex"
        return f"HermitianOperator(dimension={self.dimension}, {kind})"


def hermitian_eig(op: HermitianOperator, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Return the ``k`` smallest eigenpairs of ``op``.

    Parameters
    ----------
    op : HermitianOperator
    k : int
        Number of eigenpairs, ``1 <= k <= op.dimension``.

    Returns
    -------
    values : ndarray, shape (k,)
        Ascending eigenvalues.
    vectors : ndarray, shape (dimension, k)
        Orthonormal eigenvectors as columns.

    Raises
    ------
    NumericError
        If LAPACK fails or a residual ``|Hv - Ev|`` exceeds ``1e-10 |H|``.
    """
    if not isinstance(op, HermitianOperator):
        op = HermitianOperator(op)
    n = op.dimension
    if not 1 <= k <= n:
        raise ValidationError(f"k must lie in [1, {n}], got {k}")
    h = op.matrix
    try:
        values, vectors = scipy.linalg.eigh(h, subset_by_index=(0, k - 1), driver="evr")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"eigensolver failed for a {n}x{n} matrix: {exc}") from exc

    residual = np.linalg.norm(h @ vectors - vectors * values, axis=0)
    bound = RESIDUAL_TOL * op.norm()
    if np.any(residual > bound):
        raise NumericError(
            f"eigen-residual {residual.max():.3e} exceeds {bound:.3e} "
            f"for a {n}x{n} matrix"
        )
    return values, vectors

"""Symmetric tensor algebra in the orthonormal Mandel (Kelvin) representation.

Symmetric second-order tensors are stored as vectors of length m = d(d+1)/2
with the off-diagonal entries scaled by sqrt(2); fourth-order tensors with
minor and major symmetries become symmetric m x m matrices.  The scaling makes
the representation orthonormal: Mandel dot products equal full double
contractions, and the eigenvalues of the Mandel matrix are the eigenvalues of
the fourth-order tensor itself (a Voigt encoding would distort them).

d = 2 is the primary use case (plate bending); d = 3 is supported here as
well, but nothing downstream relies on it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT2 = float(np.sqrt(2.0))

# Independent index pairs, row-major upper triangle ordering of the off-diagonal
# block after the diagonal: (11, 22, 12) for d=2, (11, 22, 33, 23, 13, 12) for d=3.
_PAIRS = {
    2: ((0, 0), (1, 1), (0, 1)),
    3: ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)),
}
_MANDEL_SIZE = {2: 3, 3: 6}
_SPATIAL_DIM = {3: 2, 6: 3}

_SYM_TOL = 1e-12


class SingularTensorError(ValueError):
    """Raised when a stiffness tensor has no usable inverse."""


def mandel_size(d: int) -> int:
    """Number of Mandel components for spatial dimension d."""
    if d not in _MANDEL_SIZE:
        raise ValueError(f"unsupported spatial dimension {d} (expected 2 or 3)")
    return _MANDEL_SIZE[d]


def spatial_dim(m: int) -> int:
    """Spatial dimension corresponding to a Mandel vector length m."""
    if m not in _SPATIAL_DIM:
        raise ValueError(f"invalid Mandel component count {m} (expected 3 or 6)")
    return _SPATIAL_DIM[m]


def sym_to_mandel(matrix: np.ndarray) -> np.ndarray:
    """Encode a symmetric d x d matrix as a Mandel vector."""
    matrix = np.asarray(matrix, dtype=float)
    d = matrix.shape[0]
    pairs = _PAIRS[d] if d in _PAIRS else None
    if pairs is None or matrix.shape != (d, d):
        raise ValueError(f"expected a square 2x2 or 3x3 matrix, got shape {matrix.shape}")
    out = np.empty(mandel_size(d))
    for a, (i, j) in enumerate(pairs):
        out[a] = matrix[i, j] if i == j else SQRT2 * 0.5 * (matrix[i, j] + matrix[j, i])
    return out


def mandel_to_sym(vec: np.ndarray) -> np.ndarray:
    """Decode a Mandel vector back into the dense symmetric matrix."""
    vec = np.asarray(vec)
    d = spatial_dim(vec.shape[-1])
    out = np.zeros(vec.shape[:-1] + (d, d), dtype=vec.dtype)
    for a, (i, j) in enumerate(_PAIRS[d]):
        if i == j:
            out[..., i, j] = vec[..., a]
        else:
            out[..., i, j] = vec[..., a] / SQRT2
            out[..., j, i] = vec[..., a] / SQRT2
    return out


def stiff_to_mandel(dense: np.ndarray) -> np.ndarray:
    """Encode a minor+major symmetric fourth-order tensor as an m x m matrix."""
    dense = np.asarray(dense, dtype=float)
    d = dense.shape[0]
    if d not in _PAIRS or dense.shape != (d,) * 4:
        raise ValueError(f"expected shape (d,d,d,d) with d in (2,3), got {dense.shape}")
    pairs = _PAIRS[d]
    m = mandel_size(d)
    out = np.empty((m, m))
    for a, (i, j) in enumerate(pairs):
        fa = 1.0 if i == j else SQRT2
        for b, (k, l) in enumerate(pairs):
            fb = 1.0 if k == l else SQRT2
            out[a, b] = fa * fb * dense[i, j, k, l]
    return out


def mandel_to_stiff(matrix: np.ndarray) -> np.ndarray:
    """Decode an m x m Mandel matrix into the dense (d,d,d,d) tensor."""
    matrix = np.asarray(matrix, dtype=float)
    d = spatial_dim(matrix.shape[0])
    pairs = _PAIRS[d]
    out = np.zeros((d,) * 4)
    for a, (i, j) in enumerate(pairs):
        fa = 1.0 if i == j else SQRT2
        for b, (k, l) in enumerate(pairs):
            fb = 1.0 if k == l else SQRT2
            val = matrix[a, b] / (fa * fb)
            for ii, jj in {(i, j), (j, i)}:
                for kk, ll in {(k, l), (l, k)}:
                    out[ii, jj, kk, ll] = val
    return out


def identity_vector(d: int) -> np.ndarray:
    """Mandel encoding of the d x d identity matrix."""
    v = np.zeros(mandel_size(d))
    v[:d] = 1.0
    return v


def trace_dyad(d: int) -> np.ndarray:
    """Mandel matrix of the map xi -> Tr(xi) * I (rank one, singular)."""
    iv = identity_vector(d)
    return np.outer(iv, iv)


@dataclass(frozen=True)
class SymTensor2:
    """Symmetric second-order tensor stored as a Mandel vector."""

    mandel: np.ndarray

    def __post_init__(self):
        vec = np.array(self.mandel, dtype=float)
        if vec.ndim != 1:
            raise ValueError(f"Mandel vector must be one-dimensional, got shape {vec.shape}")
        spatial_dim(vec.shape[0])
        vec.flags.writeable = False
        object.__setattr__(self, "mandel", vec)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "SymTensor2":
        matrix = np.asarray(matrix, dtype=float)
        if not np.allclose(matrix, matrix.T, rtol=0, atol=_SYM_TOL * max(1.0, abs(matrix).max())):
            raise ValueError("matrix is not symmetric")
        return cls(sym_to_mandel(matrix))

    @classmethod
    def zero(cls, d: int = 2) -> "SymTensor2":
        return cls(np.zeros(mandel_size(d)))

    @classmethod
    def basis(cls, index: int, d: int = 2) -> "SymTensor2":
        """k-th Mandel basis tensor (unit Mandel vector)."""
        v = np.zeros(mandel_size(d))
        v[index] = 1.0
        return cls(v)

    @property
    def d(self) -> int:
        return spatial_dim(self.mandel.shape[0])

    def to_matrix(self) -> np.ndarray:
        return mandel_to_sym(self.mandel)

    def trace(self) -> float:
        return float(self.mandel[: self.d].sum())

    def inner(self, other: "SymTensor2") -> float:
        """Full double contraction a_ij b_ij (= Mandel dot product)."""
        return float(self.mandel @ other.mandel)

    def norm(self) -> float:
        return float(np.linalg.norm(self.mandel))

    def __add__(self, other: "SymTensor2") -> "SymTensor2":
        return SymTensor2(self.mandel + other.mandel)

    def __sub__(self, other: "SymTensor2") -> "SymTensor2":
        return SymTensor2(self.mandel - other.mandel)

    def __mul__(self, scalar: float) -> "SymTensor2":
        return SymTensor2(self.mandel * float(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True)
class StiffTensor4:
    """Fourth-order stiffness tensor with minor+major symmetries (Mandel matrix)."""

    mandel_matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.mandel_matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"Mandel matrix must be square, got shape {mat.shape}")
        spatial_dim(mat.shape[0])
        scale = max(1.0, float(abs(mat).max()))
        if abs(mat - mat.T).max() > 1e-10 * scale:
            raise ValueError("Mandel matrix is not symmetric (major symmetry violated)")
        mat = 0.5 * (mat + mat.T)
        mat.flags.writeable = False
        object.__setattr__(self, "mandel_matrix", mat)

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "StiffTensor4":
        return cls(stiff_to_mandel(dense))

    @classmethod
    def identity(cls, d: int = 2) -> "StiffTensor4":
        """Symmetric fourth-order identity: C:e = e for every symmetric e."""
        return cls(np.eye(mandel_size(d)))

    @classmethod
    def trace_multiple(cls, lam: float, d: int = 2) -> "StiffTensor4":
        """The reference action xi -> lam * Tr(xi) * I (singular for lam != 0)."""
        return cls(lam * trace_dyad(d))

    @property
    def d(self) -> int:
        return spatial_dim(self.mandel_matrix.shape[0])

    @property
    def m(self) -> int:
        return self.mandel_matrix.shape[0]

    def to_dense(self) -> np.ndarray:
        return mandel_to_stiff(self.mandel_matrix)

    def apply(self, e: SymTensor2) -> SymTensor2:
        """Double contraction C:e as a Mandel matrix-vector product."""
        if e.mandel.shape[0] != self.m:
            raise ValueError(
                f"dimension mismatch: tensor has m={self.m}, argument has m={e.mandel.shape[0]}"
            )
        return SymTensor2(self.mandel_matrix @ e.mandel)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the Mandel matrix, ascending."""
        return np.linalg.eigvalsh(self.mandel_matrix)

    def inverse(self) -> "StiffTensor4":
        """Inverse tensor; raises SingularTensorError near singularity."""
        eig = np.abs(self.eigenvalues())
        if eig.min() <= 1e-12 * max(eig.max(), 1e-300):
            raise SingularTensorError(
                "stiffness tensor is singular (smallest |eigenvalue| below 1e-12 of largest)"
            )
        return StiffTensor4(np.linalg.inv(self.mandel_matrix))

    def operator_norm(self) -> float:
        """Spectral norm max |eigenvalue| of the Mandel matrix."""
        return float(np.abs(self.eigenvalues()).max())

    def is_elliptic(self, alpha: float, tol: float = 1e-12) -> bool:
        """All eigenvalues within [alpha, 1/alpha] up to tol."""
        eig = self.eigenvalues()
        return bool(eig[0] >= alpha - tol and eig[-1] <= 1.0 / alpha + tol)

    def __add__(self, other: "StiffTensor4") -> "StiffTensor4":
        return StiffTensor4(self.mandel_matrix + other.mandel_matrix)

    def __sub__(self, other: "StiffTensor4") -> "StiffTensor4":
        return StiffTensor4(self.mandel_matrix - other.mandel_matrix)

    def __mul__(self, scalar: float) -> "StiffTensor4":
        return StiffTensor4(self.mandel_matrix * float(scalar))

    __rmul__ = __mul__


def double_contract(c: StiffTensor4, e: SymTensor2) -> SymTensor2:
    """Module-level alias for C:e."""
    return c.apply(e)

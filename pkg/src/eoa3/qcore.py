"""Small dense complex linear algebra and state-geometry kernels.

Everything in this module is a pure function on immutable values.  States are
indexed with the first subsystem most significant (index = 4a + 2b + c for
three qubits), and amplitudes are stored as flat complex vectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class InputError(ValueError):
    """Raised when an argument violates an operation's precondition."""


@dataclass(frozen=True)
class Tolerances:
    """Central numerical tolerances used across the package."""

    norm: float = 1e-12
    hermitian: float = 1e-12
    psd: float = 1e-12
    trace: float = 1e-12
    schmidt: float = 1e-10
    bloch: float = 1e-12
    commutator: float = 1e-9
    rank: float = 1e-10


TOL = Tolerances()

# Pauli matrices, used throughout for qubit geometry.
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def _frozen_array(a, dtype=complex) -> np.ndarray:
    out = np.asarray(a, dtype=dtype).copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PureState:
    """Normalized pure state over an ordered list of subsystem dimensions."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(d < 2 for d in dims):
            raise InputError(f"subsystem dimensions must be >= 2, got {dims}")
        amps = _frozen_array(self.amplitudes)
        if amps.ndim != 1 or amps.size != int(np.prod(dims)):
            raise InputError(
                f"amplitude vector length {amps.size} does not match dims {dims}"
            )
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > 1e-10:
            raise InputError(f"state norm {nrm} is not 1")
        if abs(nrm - 1.0) > TOL.norm:
            amps = _frozen_array(amps / nrm)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_subsystems(self) -> int:
        return len(self.dims)

    def tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def density(self) -> "DensityMatrix":
        return DensityMatrix.from_matrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def reduced(self, keep) -> "DensityMatrix":
        """Reduced density matrix on the kept subsystems."""
        return reduced_density(self, keep)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        m = _frozen_array(self.entries)
        if m.shape != (self.dim, self.dim):
            raise InputError(f"entries shape {m.shape} does not match dim {self.dim}")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise InputError("matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10 or abs(np.trace(m).imag) > 1e-10:
            raise InputError("matrix trace is not 1")
        evals = np.linalg.eigvalsh(m)
        if evals[0] < -1e-10:
            raise InputError(f"matrix has negative eigenvalue {evals[0]}")
        object.__setattr__(self, "entries", m)

    @staticmethod
    def from_matrix(m) -> "DensityMatrix":
        m = np.asarray(m, dtype=complex)
        return DensityMatrix(dim=m.shape[0], entries=m)

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))


@dataclass(frozen=True)
class BlochVector:
    """3-vector representation of a qubit density matrix, rho = (I + r.sigma)/2."""

    r: np.ndarray

    def __post_init__(self):
        v = _frozen_array(self.r, dtype=float)
        if v.shape != (3,):
            raise InputError("Bloch vector must have 3 real components")
        object.__setattr__(self, "r", v)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.r))


@dataclass(frozen=True)
class SchmidtForm:
    """Squared Schmidt coefficients (non-increasing) with the local bases.

    ``coefficients[k]`` is the squared coefficient of the k-th Schmidt term;
    ``left_basis[:, k]`` / ``right_basis[:, k]`` are the corresponding local
    vectors.
    """

    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """Flat amplitude vector (left subsystem most significant)."""
        mat = (self.left_basis * np.sqrt(self.coefficients)) @ self.right_basis.conj().T
        return mat.reshape(-1)


# ---------------------------------------------------------------------------
# Operations


def tensor(a: PureState, b: PureState) -> PureState:
    return PureState(a.dims + b.dims, np.kron(a.amplitudes, b.amplitudes))


def partial_trace(rho: DensityMatrix, dims, keep) -> DensityMatrix:
    """Trace out every subsystem not listed in ``keep``."""
    dims = tuple(int(d) for d in dims)
    if int(np.prod(dims)) != rho.dim:
        raise InputError(f"product of dims {dims} does not equal matrix dim {rho.dim}")
    keep = tuple(sorted(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise InputError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = rho.entries.reshape(dims + dims)
    # Trace over the complement, highest index first so axis numbers stay valid.
    for idx in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=idx, axis2=idx + t.ndim // 2)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return DensityMatrix.from_matrix(t.reshape(d_keep, d_keep))


def reduced_density(psi: PureState, keep) -> DensityMatrix:
    """Partial trace of |psi><psi| keeping the listed subsystems."""
    keep = tuple(sorted(int(k) for k in keep))
    n = psi.num_subsystems
    if any(k < 0 or k >= n for k in keep):
        raise InputError(f"keep indices {keep} out of range")
    drop = tuple(i for i in range(n) if i not in keep)
    t = psi.tensor_view().transpose(keep + drop)
    d_keep = int(np.prod([psi.dims[k] for k in keep]))
    mat = t.reshape(d_keep, -1)
    return DensityMatrix.from_matrix(mat @ mat.conj().T)


def schmidt_decompose(psi: PureState, cut) -> SchmidtForm:
    """SVD of the amplitude matrix across the bipartition ``cut | rest``."""
    if psi.num_subsystems < 2:
        raise InputError("Schmidt decomposition needs at least 2 subsystems")
    left = tuple(sorted(int(k) for k in cut))
    right = tuple(i for i in range(psi.num_subsystems) if i not in left)
    if not left or not right:
        raise InputError("cut must be a proper bipartition")
    t = psi.tensor_view().transpose(left + right)
    d_left = int(np.prod([psi.dims[k] for k in left]))
    mat = t.reshape(d_left, -1)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    return SchmidtForm(
        coefficients=_frozen_array(s**2, dtype=float),
        left_basis=_frozen_array(u),
        right_basis=_frozen_array(vh.conj().T),
    )


def bloch_vector(rho: DensityMatrix) -> BlochVector:
    if rho.dim != 2:
        raise InputError("Bloch vector is defined for qubits only")
    r = np.array([np.real(np.trace(rho.entries @ s)) for s in PAULIS])
    return BlochVector(r)


def from_bloch(r: BlochVector) -> DensityMatrix:
    if r.length > 1.0 + 1e-12:
        raise InputError(f"Bloch vector length {r.length} exceeds 1")
    v = np.clip(r.r, -1.0, 1.0) if r.length <= 1.0 else r.r / r.length
    m = 0.5 * (np.eye(2, dtype=complex) + sum(v[i] * PAULIS[i] for i in range(3)))
    return DensityMatrix.from_matrix(m)


def haar_random_pure(dims, seed) -> PureState:
    """Unitarily-invariant random pure state, deterministic per seed."""
    dims = tuple(int(d) for d in dims)
    rng = np.random.default_rng(seed)
    n = int(np.prod(dims))
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return PureState(dims, z / np.linalg.norm(z))


def random_density_matrix(dim, rank, seed) -> DensityMatrix:
    """Wishart-distributed density matrix of the requested rank."""
    if not 1 <= rank <= dim:
        raise InputError(f"rank must lie in [1, {dim}]")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return DensityMatrix.from_matrix(m / np.trace(m).real)


def haar_random_unitary(dim, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def eig_hermitian(h: np.ndarray):
    """Eigenvalues (non-increasing) and orthonormal eigenvectors.

    The 2x2 case goes through the closed-form quadratic; degenerate pairs fall
    back to a fixed reference basis so results are reproducible.
    """
    h = np.asarray(h, dtype=complex)
    if np.max(np.abs(h - h.conj().T)) > 1e-10:
        raise InputError("matrix is not Hermitian")
    if h.shape == (2, 2):
        return _eig_hermitian_2x2(h)
    evals, evecs = np.linalg.eigh(h)
    return evals[::-1].copy(), evecs[:, ::-1].copy()


def _eig_hermitian_2x2(h: np.ndarray):
    a = h[0, 0].real
    d = h[1, 1].real
    b = h[0, 1]
    mean = 0.5 * (a + d)
    delta = np.sqrt((0.5 * (a - d)) ** 2 + abs(b) ** 2)
    evals = np.array([mean + delta, mean - delta])
    if delta < 1e-14:
        # Degenerate: fixed computational reference basis.
        return evals, np.eye(2, dtype=complex)
    # Eigenvector for mean + delta; pick the numerically stabler expression.
    if a - d >= 0:
        v0 = np.array([0.5 * (a - d) + delta, np.conj(b)], dtype=complex)
    else:
        v0 = np.array([b, delta - 0.5 * (a - d)], dtype=complex)
    v0 /= np.linalg.norm(v0)
    v1 = np.array([-np.conj(v0[1]), np.conj(v0[0])], dtype=complex)
    return evals, np.column_stack([v0, v1])


def lambda_min(rho: DensityMatrix) -> float:
    evals, _ = eig_hermitian(rho.entries)
    return float(evals[-1])


def canonical_phase(amplitudes: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first non-negligible amplitude is real > 0."""
    amps = np.asarray(amplitudes, dtype=complex)
    idx = np.argmax(np.abs(amps) > 1e-12)
    a = amps[idx]
    if abs(a) < 1e-12:
        return amps.copy()
    return amps * (np.conj(a) / abs(a))


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    if a.dims != b.dims:
        raise InputError("states live on different subsystem layouts")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


# ---------------------------------------------------------------------------
# JSON state format


def state_to_json(psi: PureState) -> str:
    payload = {
        "dims": list(psi.dims),
        "amplitudes": [[float(z.real), float(z.imag)] for z in psi.amplitudes],
    }
    return json.dumps(payload, sort_keys=True)


def state_from_json(text: str) -> PureState:
    try:
        payload = json.loads(text)
        dims = tuple(int(d) for d in payload["dims"])
        amps = np.array([complex(re, im) for re, im in payload["amplitudes"]])
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"malformed state file: {exc}") from exc
    return PureState(dims, amps)


def density_to_json(rho: DensityMatrix) -> str:
    entries = [
        [[float(z.real), float(z.imag)] for z in row] for row in rho.entries
    ]
    return json.dumps({"dim": rho.dim, "entries": entries}, sort_keys=True)


def density_from_json(text: str) -> DensityMatrix:
    try:
        payload = json.loads(text)
        entries = np.array(
            [[complex(re, im) for re, im in row] for row in payload["entries"]]
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"malformed density-matrix file: {exc}") from exc
    return DensityMatrix.from_matrix(entries)

"""Bipartite entanglement measures used throughout the package.

All pure-state measures reduce to a function of the smallest squared Schmidt
coefficient ``f(lam)`` on [0, 1/2] in the two-level case.  Logarithms are base
2 so the Bell state carries one ebit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import (
    SIGMA_Y,
    DensityMatrix,
    InputError,
    PureState,
    bloch_vector,
    eig_hermitian,
    reduced_density,
    schmidt_decompose,
)

# Rank tolerance for the alpha = 0 step function: smaller eigenvalues count as 0.
S0_RANK_TOL = 1e-10


@dataclass(frozen=True)
class MonotoneSpec:
    """Tagged choice of entanglement monotone.

    kind is one of "e2", "kyfan", "entropy", "s0", "concurrence", "gconc";
    ``k`` applies to Ky-Fan, ``alpha`` to the entropy family.
    """

    kind: str
    alpha: float | None = None
    k: int | None = None

    def __post_init__(self):
        if self.kind not in ("e2", "kyfan", "entropy", "s0", "concurrence", "gconc"):
            raise InputError(f"unknown monotone kind {self.kind!r}")
        if self.kind == "kyfan" and (self.k is None or self.k < 1):
            raise InputError("Ky-Fan monotone needs k >= 1")
        if self.kind == "entropy" and (
            self.alpha is None or not 0.0 <= self.alpha <= 1.0
        ):
            raise InputError("entropy monotone needs alpha in [0, 1]")

    @property
    def strictly_concave(self) -> bool:
        if self.kind == "entropy":
            return self.alpha > 0.0
        return self.kind in ("concurrence", "gconc")

    def eigenvalue_fn(self, lam: float) -> float:
        """f(lambda_min) for a two-level Schmidt spectrum (lam, 1 - lam)."""
        lam = float(np.clip(lam, 0.0, 0.5))
        if self.kind == "e2":
            return 2.0 * lam
        if self.kind == "kyfan":
            if self.k == 1:
                return 1.0
            return lam
        if self.kind in ("concurrence", "gconc"):
            return 2.0 * np.sqrt(lam * (1.0 - lam))
        if self.kind == "s0":
            return 0.0 if lam < S0_RANK_TOL else 1.0
        # entropy
        if self.alpha < S0_RANK_TOL:
            return 0.0 if lam < S0_RANK_TOL else 1.0
        return _entropy_of_spectrum(np.array([lam, 1.0 - lam]), self.alpha)

    def label(self) -> str:
        if self.kind == "kyfan":
            return f"ek:{self.k}"
        if self.kind == "entropy":
            return f"entropy:{self.alpha:g}"
        return self.kind

    @staticmethod
    def parse(text: str) -> "MonotoneSpec":
        text = text.strip().lower()
        if text == "e2":
            return MonotoneSpec("e2")
        if text == "s0":
            return MonotoneSpec("s0")
        if text == "concurrence":
            return MonotoneSpec("concurrence")
        if text == "gconc":
            return MonotoneSpec("gconc")
        if text.startswith("ek:"):
            return MonotoneSpec("kyfan", k=int(text[3:]))
        if text.startswith("entropy:"):
            return MonotoneSpec("entropy", alpha=float(text[8:]))
        raise InputError(f"unknown monotone string {text!r}")


E2 = MonotoneSpec("e2")
ENTROPY_1 = MonotoneSpec("entropy", alpha=1.0)
CONCURRENCE = MonotoneSpec("concurrence")


def _entropy_of_spectrum(spectrum: np.ndarray, alpha: float) -> float:
    spectrum = spectrum[spectrum > 1e-15]
    if abs(alpha - 1.0) < 1e-9:
        return float(-np.sum(spectrum * np.log2(spectrum)))
    return float(np.log2(np.sum(spectrum**alpha)) / (1.0 - alpha))


def _two_qubit_marginal_spectrum(phi: PureState) -> np.ndarray:
    if phi.dims != (2, 2):
        raise InputError("expected a two-qubit pure state")
    m = phi.amplitudes.reshape(2, 2)
    evals, _ = eig_hermitian(m @ m.conj().T)
    return np.clip(evals, 0.0, 1.0)


def e2(phi: PureState) -> float:
    """Twice the smallest marginal eigenvalue; the optimal Bell-conversion probability."""
    return float(2.0 * _two_qubit_marginal_spectrum(phi)[-1])


def ky_fan(phi: PureState, k: int) -> float:
    """Tail sum of the ordered squared Schmidt coefficients from index k."""
    sf = schmidt_decompose(phi, cut=(0,))
    d = len(sf.coefficients)
    if k > d:
        raise InputError(f"k={k} exceeds the Schmidt rank bound {d}")
    return float(np.sum(sf.coefficients[k - 1 :]))


def entropy_alpha(phi: PureState, alpha: float) -> float:
    sf = schmidt_decompose(phi, cut=(0,))
    spectrum = np.clip(sf.coefficients, 0.0, 1.0)
    if alpha < S0_RANK_TOL:
        lam_min = spectrum[-1] if len(spectrum) > 1 else 0.0
        return 0.0 if lam_min < S0_RANK_TOL else 1.0
    return _entropy_of_spectrum(spectrum, alpha)


def concurrence_pure(phi: PureState) -> float:
    """2 sqrt(lam_min (1 - lam_min)), computed as 2|det| for full precision."""
    if phi.dims != (2, 2):
        raise InputError("expected a two-qubit pure state")
    m = phi.amplitudes.reshape(2, 2)
    return float(2.0 * abs(np.linalg.det(m)))


def g_concurrence(phi: PureState) -> float:
    m = phi.amplitudes.reshape(2, 2)
    det = np.linalg.det(m @ m.conj().T).real
    return float(2.0 * np.sqrt(max(det, 0.0)))


def spin_flip(rho_entries: np.ndarray) -> np.ndarray:
    """rho_tilde = (sy x sy) rho* (sy x sy) in the computational basis."""
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    return yy @ rho_entries.conj() @ yy


def wootters_lambdas(rho: DensityMatrix) -> np.ndarray:
    """Square roots of the eigenvalues of rho * rho_tilde, non-increasing.

    Computed from the Hermitian product sqrt(rho) rho_tilde sqrt(rho), which
    shares the spectrum of rho * rho_tilde but avoids a non-Hermitian solver.
    """
    if rho.dim != 4:
        raise InputError("Wootters concurrence is defined for two qubits")
    evals, evecs = np.linalg.eigh(rho.entries)
    sqrt_rho = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T
    prod = sqrt_rho @ spin_flip(rho.entries) @ sqrt_rho
    mu = np.linalg.eigvalsh(prod)
    # Round-off noise of order eps in mu would turn into sqrt(eps)-sized
    # lambdas on rank-deficient inputs; flush it to zero first.
    mu = np.clip(mu, 0.0, None)
    mu[mu < 1e-13 * max(1.0, mu.max(initial=0.0))] = 0.0
    return np.sqrt(mu)[::-1]


def wootters_concurrence(rho: DensityMatrix) -> float:
    lam = wootters_lambdas(rho)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


_CUTS = {"A|BC": (0,), "B|AC": (1,)}


def cut_entanglement(psi: PureState, cut: str, m: MonotoneSpec) -> float:
    """Evaluate the monotone across a bipartite cut of a three-party pure state."""
    if cut not in _CUTS:
        raise InputError(f"cut must be one of {sorted(_CUTS)}")
    sf = schmidt_decompose(psi, cut=_CUTS[cut])
    lam_min = float(sf.coefficients[-1]) if len(sf.coefficients) > 1 else 0.0
    return m.eigenvalue_fn(lam_min)


def pure_cut_concurrence(psi: PureState, cut: str) -> float:
    """Concurrence of a single party versus the remaining two, 2 sqrt(det rho)."""
    rho = reduced_density(psi, _CUTS[cut])
    det = np.linalg.det(rho.entries).real
    return float(2.0 * np.sqrt(max(det, 0.0)))


def three_tangle(psi: PureState) -> float:
    """Residual tripartite entanglement from the monogamy relation.

    Computes both the A-centered and B-centered forms and checks they agree;
    the difference identity between them is what makes the quantity party
    symmetric.
    """
    if psi.dims != (2, 2, 2):
        raise InputError("three-tangle is defined for three qubits")
    c_ab = wootters_concurrence(reduced_density(psi, (0, 1)))
    c_ac = wootters_concurrence(reduced_density(psi, (0, 2)))
    c_bc = wootters_concurrence(reduced_density(psi, (1, 2)))
    tau_a = pure_cut_concurrence(psi, "A|BC") ** 2 - c_ab**2 - c_ac**2
    tau_b = pure_cut_concurrence(psi, "B|AC") ** 2 - c_ab**2 - c_bc**2
    if abs(tau_a - tau_b) > 1e-8:
        raise ArithmeticError(
            f"party-centered tangle forms disagree: {tau_a} vs {tau_b}"
        )
    return float(0.5 * (tau_a + tau_b))

"""Pure-state ensemble machinery for two-qubit density matrices.

Three constructions live here:

* the purification-measurement realization of an arbitrary ensemble (every
  ensemble of rho arises from a measurement on a purifying system);
* the equal-concurrence decomposition: every two-qubit state has a pure
  decomposition in which each element's concurrence equals the mixed-state
  concurrence;
* the entangled decomposition: when both marginals are mixed, a decomposition
  exists in which every element is entangled, obtained by repeatedly mixing a
  product element with a partner through a 2x2 unitary.

Subnormalized vectors carry the weights: an element (w, |phi>) is stored while
working as y = sqrt(w)|phi>, whose "preconcurrence" y^T (sy x sy) y transforms
linearly under ensemble-mixing unitaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize

from .monotones import wootters_concurrence
from .qcore import SIGMA_Y, DensityMatrix, InputError, PureState

_YY = np.kron(SIGMA_Y, SIGMA_Y)


@dataclass(frozen=True)
class Ensemble:
    """Probability-weighted pure states mixing to a declared target."""

    target: DensityMatrix
    elements: tuple  # (weight, PureState) pairs

    def __post_init__(self):
        elements = tuple((float(w), s) for w, s in self.elements)
        weights = np.array([w for w, _ in elements])
        if np.any(weights <= 0):
            raise InputError("ensemble weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise InputError("ensemble weights must sum to 1")
        mix = sum(
            w * np.outer(s.amplitudes, s.amplitudes.conj()) for w, s in elements
        )
        if np.max(np.abs(mix - self.target.entries)) > 1e-10:
            raise InputError("ensemble does not reconstruct its target")
        object.__setattr__(self, "elements", elements)


def _subnormalized(elements, target: DensityMatrix | None = None) -> Ensemble:
    """Build an Ensemble from subnormalized vectors, pruning null elements."""
    kept = []
    for y in elements:
        w = float(np.real(np.vdot(y, y)))
        if w < 1e-14:
            continue
        kept.append((w, PureState((2, 2), y / np.sqrt(w))))
    if target is None:
        total = sum(w * np.outer(s.amplitudes, s.amplitudes.conj()) for w, s in kept)
        target = DensityMatrix.from_matrix(total)
    return Ensemble(target=target, elements=tuple(kept))


def _preconcurrence(y: np.ndarray) -> complex:
    return y @ _YY @ y


def _element_concurrence(y: np.ndarray) -> float:
    w = float(np.real(np.vdot(y, y)))
    if w < 1e-14:
        return 0.0
    return float(abs(_preconcurrence(y))) / w


def _support_vectors(rho: DensityMatrix):
    """Subnormalized eigenvectors spanning the support, descending weight."""
    evals, evecs = np.linalg.eigh(rho.entries)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    cols = [np.sqrt(lam) * evecs[:, j] for j, lam in enumerate(evals) if lam > 1e-12]
    return cols


# ---------------------------------------------------------------------------
# Purification-measurement ensembles


def purification(rho: DensityMatrix, purifier_dim: int) -> np.ndarray:
    """4 x d amplitude matrix of the canonical purification against |c> kets."""
    evals, evecs = np.linalg.eigh(rho.entries)
    evals, evecs = np.clip(evals[::-1], 0.0, None), evecs[:, ::-1]
    rank = int(np.sum(evals > 1e-12))
    if purifier_dim < rank:
        raise InputError(
            f"purifier dimension {purifier_dim} is below the state rank {rank}"
        )
    psi = np.zeros((rho.dim, purifier_dim), dtype=complex)
    for c in range(min(purifier_dim, rho.dim)):
        psi[:, c] = np.sqrt(evals[c]) * evecs[:, c]
    return psi


def hjw_ensemble(rho: DensityMatrix, meas) -> Ensemble:
    """Ensemble of rho induced by measuring the canonical purifier."""
    psi = purification(rho, meas.dim)
    elements = []
    for m in meas.elements:
        branch = psi @ np.asarray(m, dtype=complex).T
        w = float(np.linalg.norm(branch) ** 2)
        if w < 1e-14:
            continue
        rho_x = branch @ branch.conj().T / w
        purity = float(np.real(np.trace(rho_x @ rho_x)))
        if purity < 1.0 - 1e-10:
            raise InputError(
                "measurement branch is mixed; rank-1 elements are required"
            )
        _, evecs = np.linalg.eigh(rho_x)
        elements.append(np.sqrt(w) * evecs[:, -1])
    return _subnormalized(elements, target=rho)


# ---------------------------------------------------------------------------
# Equal-concurrence decomposition


def _takagi(tau: np.ndarray):
    """Autonne-Takagi factorization of a complex symmetric matrix.

    Returns orthonormal columns c_k and values s_k >= 0 (descending) with
    tau conj(c_k) = s_k c_k.  Uses the real embedding M = [[X, Y], [Y, -X]]
    for tau = X + iY: if M(u; w) = s(u; w) then c = u + iw works, and the
    anticommuting J = [[0, I], [-I, 0]] pairs each +s eigenvector with a -s
    one, which keeps an orthonormal selection possible even at s = 0.
    """
    r = tau.shape[0]
    x, y = tau.real, tau.imag
    x = 0.5 * (x + x.T)
    y = 0.5 * (y + y.T)
    m = np.block([[x, y], [y, -x]])
    evals, evecs = np.linalg.eigh(m)
    order = np.argsort(evals)[::-1]
    jmat = np.block(
        [[np.zeros((r, r)), np.eye(r)], [-np.eye(r), np.zeros((r, r))]]
    )
    selected = []
    for idx in order:
        if len(selected) == r:
            break
        z = evecs[:, idx].copy()
        for zs in selected:
            z -= (zs @ z) * zs
            jz = jmat @ zs
            z -= (jz @ z) * jz
        nz = np.linalg.norm(z)
        if nz < 0.5:
            continue
        selected.append(z / nz)
    if len(selected) < r:
        raise ArithmeticError("Takagi selection failed to span the support")
    values = np.array([max(0.0, float(z @ m @ z)) for z in selected])
    order2 = np.argsort(values)[::-1]
    cols = np.column_stack([selected[i][:r] + 1j * selected[i][r:] for i in order2])
    return cols, values[order2]


def _preconcurrence_diagonal_vectors(rho: DensityMatrix):
    """Subnormalized vectors x_k with x_j^T (sy x sy) x_k = s_k delta_jk."""
    vmat = np.column_stack(_support_vectors(rho))
    tau = vmat.T @ _YY @ vmat
    cols, values = _takagi(tau)
    xs = [vmat @ cols[:, k].conj() for k in range(cols.shape[1])]
    return xs, values


def equal_concurrence_decomposition(rho: DensityMatrix) -> Ensemble:
    """Pure decomposition whose elements all share the mixed concurrence."""
    if rho.dim != 4:
        raise InputError("expected a two-qubit density matrix")
    xs, values = _preconcurrence_diagonal_vectors(rho)
    r = len(xs)
    c_raw = values[0] - values[1:].sum()
    if r == 1:
        return _subnormalized(xs, target=rho)
    if c_raw > 1e-12:
        ys = [xs[0]] + [1j * x for x in xs[1:]]
        ys = _equalize_ratios(ys, c_raw)
    else:
        ys = _zero_concurrence_mix(xs, values)
    return _subnormalized(ys, target=rho)


def _equalize_ratios(ys, target):
    """Pairwise real rotations driving every element's concurrence to target.

    The signed preconcurrence matrix is real diagonal at entry and stays real
    symmetric under real rotations; its trace (= target) is invariant, so a
    rotation angle equalizing the extreme normalized preconcurrences always
    exists by the intermediate value theorem.
    """
    ys = [y.copy() for y in ys]
    unlocked = list(range(len(ys)))
    while len(unlocked) > 1:
        ratios = {
            j: float(np.real(_preconcurrence(ys[j]))) / float(np.real(np.vdot(ys[j], ys[j])))
            for j in unlocked
        }
        a = max(unlocked, key=lambda j: ratios[j])
        b = min(unlocked, key=lambda j: ratios[j])
        if ratios[a] - ratios[b] < 1e-13:
            break
        ya, yb = ys[a], ys[b]

        def ratio(theta):
            v = np.cos(theta) * ya + np.sin(theta) * yb
            return float(np.real(_preconcurrence(v))) / float(np.real(np.vdot(v, v)))

        if ratio(0.0) - target < 0 or ratio(np.pi / 2) - target > 0:
            theta = 0.0  # already within round-off of the target
        else:
            theta = brentq(lambda t: ratio(t) - target, 0.0, np.pi / 2, xtol=1e-15)
        new_a = np.cos(theta) * ya + np.sin(theta) * yb
        new_b = -np.sin(theta) * ya + np.cos(theta) * yb
        ys[a], ys[b] = new_a, new_b
        unlocked.remove(a)
    return ys


def _zero_concurrence_mix(xs, values):
    """Phases cancelling the total preconcurrence, then an unbiased mixing."""
    xs = list(xs) + [np.zeros(4, dtype=complex)] * (4 - len(xs))
    s = np.zeros(4)
    s[: len(values)] = values
    phis = _closing_polygon_angles(s[0], s[1], s[2] + s[3])
    phases = np.exp(0.5j * np.array([phis[0], phis[1], phis[2], phis[2]]))
    zs = [phases[k] * xs[k] for k in range(4)]
    if len(values) <= 2 and s[1] < 1e-14:
        o = np.eye(4)
        o[:2, :2] = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    else:
        o = (
            np.array(
                [
                    [1, 1, 1, 1],
                    [1, -1, 1, -1],
                    [1, 1, -1, -1],
                    [1, -1, -1, 1],
                ],
                dtype=float,
            )
            / 2.0
        )
    return [sum(o[j, k] * zs[k] for k in range(4)) for j in range(4)]


def _closing_polygon_angles(a, b, c):
    """Angles (0, phi_b, phi_c) making a + b e^{i phi_b} + c e^{i phi_c} = 0.

    Requires the triangle inequality a <= b + c with a >= b >= 0, which is
    exactly the zero-concurrence condition on the sorted preconcurrence values.
    """
    if a < 1e-14:
        return 0.0, 0.0, 0.0
    if b < 1e-14:
        # Then c must match a alone.
        return 0.0, 0.0, np.pi
    cos_beta = np.clip((a * a + b * b - c * c) / (2.0 * a * b), -1.0, 1.0)
    beta = np.arccos(cos_beta)
    v2 = b * np.exp(1j * (np.pi - beta))
    v3 = -(a + v2)
    return 0.0, np.pi - beta, float(np.angle(v3))


# ---------------------------------------------------------------------------
# Entangled decomposition

# Fixed low-discrepancy angle sequence for the 2x2 mixing search (golden-ratio
# and plastic-number rotations of the unit square).
_MIX_SAMPLES = [(0.25 * np.pi, 0.0), (0.25 * np.pi, 0.5 * np.pi)] + [
    (
        0.5 * np.pi * ((0.5 + 0.6180339887498949 * i) % 1.0),
        2.0 * np.pi * ((0.7548776662466927 * i) % 1.0),
    )
    for i in range(1, 63)
]


def entangled_decomposition(rho: DensityMatrix) -> Ensemble:
    """Decomposition with every element entangled; needs both marginals mixed."""
    if rho.dim != 4:
        raise InputError("expected a two-qubit density matrix")
    red_a = rho.entries.reshape(2, 2, 2, 2).trace(axis1=1, axis2=3)
    red_b = rho.entries.reshape(2, 2, 2, 2).trace(axis1=0, axis2=2)
    if np.linalg.eigvalsh(red_a)[0] <= 1e-9 or np.linalg.eigvalsh(red_b)[0] <= 1e-9:
        raise InputError(
            "a reduced state is pure; no fully entangled decomposition exists"
        )
    ys = _support_vectors(rho)
    if len(ys) < 2:
        raise InputError("expected rank >= 2 with both marginals mixed")
    for _ in range(len(ys) + 2):
        product_idx = [j for j, y in enumerate(ys) if _element_concurrence(y) <= 1e-6]
        if not product_idx:
            break
        j = product_idx[0]
        if not _eliminate_product(ys, j):
            raise ArithmeticError("no mixing partner eliminated the product element")
    else:
        raise ArithmeticError("product elimination did not terminate")
    return _subnormalized(ys, target=rho)


def _eliminate_product(ys, j) -> bool:
    """Mix element j with some partner so both mixtures become entangled."""
    partners = sorted(
        (k for k in range(len(ys)) if k != j),
        key=lambda k: -_element_concurrence(ys[k]),
    )
    for k in partners:
        if _element_concurrence(ys[k]) <= 1e-6 and _same_product_ray(ys[j], ys[k]):
            continue
        for theta, phi in _MIX_SAMPLES:
            c, s = np.cos(theta), np.sin(theta)
            new_j = c * ys[j] + s * np.exp(1j * phi) * ys[k]
            new_k = -s * np.exp(-1j * phi) * ys[j] + c * ys[k]
            if (
                _element_concurrence(new_j) > 1e-6
                and _element_concurrence(new_k) > 1e-6
            ):
                ys[j], ys[k] = new_j, new_k
                return True
    return False


def _same_product_ray(y1, y2) -> bool:
    """True when two product vectors share both local factors (up to phase)."""
    m1 = y1.reshape(2, 2)
    m2 = y2.reshape(2, 2)
    u1, _, v1 = np.linalg.svd(m1)
    u2, _, v2 = np.linalg.svd(m2)
    return (
        abs(np.vdot(u1[:, 0], u2[:, 0])) > 1.0 - 1e-8
        and abs(np.vdot(v1[0], v2[0])) > 1.0 - 1e-8
    )


def s0_assistance(rho: DensityMatrix) -> float:
    """Assisted value of the rank step measure: 1 iff an all-entangled ensemble exists."""
    if rho.dim != 4:
        raise InputError("expected a two-qubit density matrix")
    red_a = rho.entries.reshape(2, 2, 2, 2).trace(axis1=1, axis2=3)
    red_b = rho.entries.reshape(2, 2, 2, 2).trace(axis1=0, axis2=2)
    lam = min(np.linalg.eigvalsh(red_a)[0], np.linalg.eigvalsh(red_b)[0])
    if rho.purity() > 1.0 - 1e-10:
        verdict = 1.0 if wootters_concurrence(rho) > 1e-9 else 0.0
    elif lam > 1e-9:
        entangled_decomposition(rho)  # existence is the certificate
        verdict = 1.0
    else:
        verdict = 0.0
    # The step-function value agrees with thresholding the smaller marginal
    # eigenvalue; keep the two views consistent.
    step = 1.0 if lam > 1e-9 or (rho.purity() > 1.0 - 1e-10 and wootters_concurrence(rho) > 1e-9) else 0.0
    if verdict != step:
        raise ArithmeticError("step-measure verdicts disagree")
    return verdict


# ---------------------------------------------------------------------------
# JSON serialization


def ensemble_to_json(ens: Ensemble) -> str:
    import json

    from .qcore import state_to_json

    payload = {
        "target": [
            [[float(z.real), float(z.imag)] for z in row]
            for row in ens.target.entries
        ],
        "elements": [
            {"weight": w, "state": json.loads(state_to_json(s))}
            for w, s in ens.elements
        ],
    }
    return json.dumps(payload, sort_keys=True)


def ensemble_from_json(text: str) -> Ensemble:
    import json

    from .qcore import state_from_json

    try:
        payload = json.loads(text)
        target = DensityMatrix.from_matrix(
            np.array(
                [[complex(re, im) for re, im in row] for row in payload["target"]]
            )
        )
        elements = tuple(
            (float(e["weight"]), state_from_json(json.dumps(e["state"])))
            for e in payload["elements"]
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"malformed ensemble file: {exc}") from exc
    return Ensemble(target=target, elements=elements)


# ---------------------------------------------------------------------------
# Brute-force convex roof (independent cross-check for the closed formula)


def convex_roof_concurrence(rho: DensityMatrix, starts: int = 6, max_evals: int = 4000, seed: int = 0) -> float:
    """Minimize the average pure concurrence over 4-element ensembles.

    Parameterizes ensembles through isometries on the purifier (every ensemble
    arises that way); purely random multi-starts so the result is independent
    of the closed-form construction it cross-checks.
    """
    evals = np.linalg.eigvalsh(rho.entries)[::-1]
    r = max(2, int(np.sum(evals > 1e-12)))
    psi = purification(rho, r)

    def objective(x):
        b = (x[: 4 * r] + 1j * x[4 * r :]).reshape(r, 4)
        sigma = b @ b.conj().T
        ev, evec = np.linalg.eigh(sigma)
        if ev[0] < 1e-12:
            return 4.0
        w = (evec / np.sqrt(ev)) @ evec.conj().T @ b
        total = 0.0
        for k in range(4):
            z = psi @ w[:, k].conj()
            total += abs(z @ _YY @ z)
        return total

    rng = np.random.default_rng(seed)
    best = objective(np.concatenate([np.eye(r, 4).reshape(-1), np.zeros(4 * r)]))
    for _ in range(starts):
        x0 = rng.standard_normal(8 * r)
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"maxfev": max_evals, "fatol": 1e-10, "xatol": 1e-8},
        )
        best = min(best, float(res.fun))
    return best

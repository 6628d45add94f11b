"""Command-line interface: analysis, Monte Carlo verification, decompositions.

Exit codes: 0 on success, 1 when a verification run finds a counterexample,
2 on malformed input.  Reports are JSON with sorted keys so identical configs
produce byte-identical output; the CSV format emits one row per trial.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import assistance, ensembles, monotones, states
from .assistance import (
    Measurement,
    SearchBudget,
    VerificationError,
    corollary_check,
    eoa_density,
    lossless_classifier,
    unital_fixed_point_check,
    verify_theorem1,
)
from .monotones import (
    MonotoneSpec,
    pure_cut_concurrence,
    three_tangle,
    wootters_concurrence,
)
from .qcore import (
    DensityMatrix,
    InputError,
    PureState,
    density_from_json,
    haar_random_pure,
    haar_random_unitary,
    random_density_matrix,
    reduced_density,
    state_from_json,
    state_to_json,
)

VERIFY_TARGETS = ("thm1", "thm2", "prop2", "corollary", "appendixB", "ckw", "eq37")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eoa3",
        description="Entanglement of assistance for three-qubit pure states",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="full report for one state")
    analyze.add_argument("--family", help="named family: ghz, w, product, bell_c, haar, eq21, thm2, corollary")
    analyze.add_argument("--state", help="path to a state JSON file")
    analyze.add_argument("--monotone", default="e2")
    analyze.add_argument("--seed", type=int, default=0)
    analyze.add_argument("--budget", type=int, default=2000)
    analyze.add_argument("--tol", type=float, default=1e-7)
    analyze.add_argument("--out")
    analyze.add_argument("--format", choices=("json", "csv"), default="json")

    verify = sub.add_parser("verify", help="Monte Carlo verification suites")
    verify.add_argument("target", choices=VERIFY_TARGETS)
    verify.add_argument("--trials", type=int, default=100)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--tol", type=float, default=1e-7)
    verify.add_argument("--budget", type=int, default=400)
    verify.add_argument("--out")
    verify.add_argument("--format", choices=("json", "csv"), default="json")

    decompose = sub.add_parser("decompose", help="ensemble decompositions of a density matrix")
    decompose.add_argument("--rho", required=True, help="path to a density-matrix JSON file")
    decompose.add_argument("--mode", choices=("hjw", "equalc", "entangled"), required=True)
    decompose.add_argument("--basis", choices=("z", "x"), default="z", help="purifier basis for hjw")
    decompose.add_argument("--out")
    return parser


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_state(args) -> PureState:
    if bool(args.family) == bool(args.state):
        raise InputError("provide exactly one of --family or --state")
    if args.family:
        return states.generate(states.parse_family(args.family, seed=args.seed))
    try:
        with open(args.state, "r", encoding="utf-8") as fh:
            return state_from_json(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read state file: {exc}") from exc


def cmd_analyze(args) -> int:
    psi = _load_state(args)
    m = MonotoneSpec.parse(args.monotone)
    budget = SearchBudget(random_starts=2, max_evals=args.budget, seed=args.seed)
    report = assistance.analyze(psi, m, budget=budget)
    payload = report.to_dict()
    if args.format == "csv":
        keys = ("cutA", "cutB", "eoaConstructive", "eoaNumeric", "monotone", "verdict")
        lines = [",".join(keys), ",".join(str(payload[k]) for k in keys)]
        _emit("\n".join(lines), args.out)
    else:
        _emit(json.dumps(payload, sort_keys=True), args.out)
    return 0


# ---------------------------------------------------------------------------
# Verification suites.  Each trial function returns (ok, row_dict); row_dict
# holds the per-trial values for CSV output and counterexample reporting.


def _trial_thm1(seed, tol, budget):
    psi = haar_random_pure((2, 2, 2), seed)
    try:
        rep = verify_theorem1(psi, tol)
        return True, {"gap": rep.gap, "mincut": min(rep.cut_a, rep.cut_b)}, psi
    except VerificationError as exc:
        return False, {"gap": exc.gap}, psi


def _trial_thm2(seed, tol, budget):
    psi = states.generate(states.FamilySpec(kind="thm2", seed=seed))
    verdict = lossless_classifier(psi, "A|BC", tol=max(tol, 1e-8))
    ok = verdict.kind in ("lossless", "decoupled")
    return ok, {"verdict": verdict.kind, "objective": verdict.objective}, psi


def _random_prop2_instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    probs = rng.uniform(0.1, 1.0, n)
    probs /= probs.sum()
    if seed % 2 == 0:
        v = haar_random_unitary(2, seed)
        h_evals = np.sort(rng.uniform(0.0, 1.0, 2))[::-1]
        h = v @ np.diag(h_evals).astype(complex) @ v.conj().T
        us = [np.eye(2, dtype=complex)] + [
            v @ np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 2))) @ v.conj().T
            for _ in range(n - 1)
        ]
    else:
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        h = 0.5 * (g + g.conj().T)
        us = [np.eye(2, dtype=complex)] + [
            haar_random_unitary(2, int(rng.integers(2**32))) for _ in range(n - 1)
        ]
    return h, probs, us


def _trial_prop2(seed, tol, budget):
    h, probs, us = _random_prop2_instance(seed)
    preserved, commutes = unital_fixed_point_check(h, probs, us)
    ok = preserved == commutes
    if ok and preserved:
        # Shared-eigenvector consistency: each rotated copy keeps H's principal
        # eigenvector as an eigenvector.
        _, evecs = np.linalg.eigh(h)
        v = evecs[:, -1]
        for u in us:
            term = u @ h @ u.conj().T
            resid = term @ v - (v.conj() @ term @ v) * v
            if np.linalg.norm(resid) > 1e-9:
                ok = False
    return ok, {"preserved": preserved, "commutes": commutes}, None


def _trial_corollary(seed, tol, budget):
    rng = np.random.default_rng(seed)
    spec = states.FamilySpec(
        kind="eq21",
        p=float(rng.uniform(0.1, 0.9)),
        overlap=complex(rng.uniform(-0.95, 0.95)),
    )
    sym = states.generate(spec)
    rep = corollary_check(sym, max(tol, 1e-6))
    ok = rep.i and rep.ii and rep.iii
    haar = haar_random_pure((2, 2, 2), seed + 10**9)
    rep2 = corollary_check(haar, max(tol, 1e-6), check_swap=False)
    ok = ok and (rep2.i == rep2.iii)
    return ok, {"symmetric_all": rep.i and rep.ii and rep.iii, "haar_i": rep2.i, "haar_iii": rep2.iii}, sym


def _trial_appendix_b(seed, tol, budget):
    rho = _mixed_marginal_density(seed)
    ens = ensembles.entangled_decomposition(rho)
    concs = [monotones.concurrence_pure(s) for _, s in ens.elements]
    mix = sum(w * np.outer(s.amplitudes, s.amplitudes.conj()) for w, s in ens.elements)
    recon = float(np.max(np.abs(mix - rho.entries)))
    ok = min(concs) > 0 and recon <= 1e-10 and ensembles.s0_assistance(rho) == 1.0
    return ok, {"min_concurrence": min(concs), "reconstruction": recon}, None


def _mixed_marginal_density(seed) -> DensityMatrix:
    rank = 2 + seed % 3
    bump = 0
    while True:
        rho = random_density_matrix(4, rank, seed + bump * 10**7)
        red_a = rho.entries.reshape(2, 2, 2, 2).trace(axis1=1, axis2=3)
        red_b = rho.entries.reshape(2, 2, 2, 2).trace(axis1=0, axis2=2)
        if min(np.linalg.eigvalsh(red_a)[0], np.linalg.eigvalsh(red_b)[0]) > 1e-6:
            return rho
        bump += 1


def _trial_ckw(seed, tol, budget):
    psi = haar_random_pure((2, 2, 2), seed)
    tau = three_tangle(psi)
    c_ac = wootters_concurrence(reduced_density(psi, (0, 2)))
    c_bc = wootters_concurrence(reduced_density(psi, (1, 2)))
    lhs = c_ac**2 - c_bc**2
    rhs = pure_cut_concurrence(psi, "A|BC") ** 2 - pure_cut_concurrence(psi, "B|AC") ** 2
    ok = tau >= -1e-9 and abs(lhs - rhs) <= 1e-8
    return ok, {"tau": tau, "difference_identity": abs(lhs - rhs)}, psi


def _trial_eq37(seed, tol, budget):
    psi = haar_random_pure((2, 2, 2), seed)
    rho = reduced_density(psi, (0, 1))
    try:
        value = eoa_density(rho)
        red_a = rho.entries.reshape(2, 2, 2, 2).trace(axis1=1, axis2=3)
        red_b = rho.entries.reshape(2, 2, 2, 2).trace(axis1=0, axis2=2)
        expected = 2.0 * min(np.linalg.eigvalsh(red_a)[0], np.linalg.eigvalsh(red_b)[0])
        ok = abs(value - expected) <= max(tol, 1e-8)
        return ok, {"value": value, "expected": expected}, psi
    except VerificationError as exc:
        return False, {"gap": exc.gap}, psi


_TRIALS = {
    "thm1": _trial_thm1,
    "thm2": _trial_thm2,
    "prop2": _trial_prop2,
    "corollary": _trial_corollary,
    "appendixB": _trial_appendix_b,
    "ckw": _trial_ckw,
    "eq37": _trial_eq37,
}


def cmd_verify(args) -> int:
    if args.trials < 1:
        raise InputError("trials must be >= 1")
    if args.tol <= 0:
        raise InputError("tol must be positive")
    trial_fn = _TRIALS[args.target]
    rows = []
    failures = 0
    first_counterexample = None
    for i in range(args.trials):
        ok, row, witness = trial_fn(args.seed + i, args.tol, args.budget)
        row = {"trial": i, "seed": args.seed + i, "ok": ok, **row}
        rows.append(row)
        if not ok:
            failures += 1
            if first_counterexample is None and witness is not None:
                first_counterexample = json.loads(state_to_json(witness))
    summary = {
        "target": args.target,
        "trials": args.trials,
        "failures": failures,
        "tol": args.tol,
        "seed": args.seed,
    }
    if first_counterexample is not None:
        summary["firstCounterexample"] = first_counterexample
    if args.format == "csv":
        keys = sorted({k for row in rows for k in row})
        lines = [",".join(keys)]
        lines += [",".join(str(row.get(k, "")) for k in keys) for row in rows]
        _emit("\n".join(lines), args.out)
    else:
        _emit(json.dumps(summary, sort_keys=True), args.out)
    return 0 if failures == 0 else 1


def cmd_decompose(args) -> int:
    try:
        with open(args.rho, "r", encoding="utf-8") as fh:
            rho = density_from_json(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read density-matrix file: {exc}") from exc
    if args.mode == "hjw":
        if args.basis == "z":
            basis = np.eye(2, dtype=complex)
        else:
            basis = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        meas = Measurement.projective(basis, subsystem=1)
        ens = ensembles.hjw_ensemble(rho, meas)
    elif args.mode == "equalc":
        ens = ensembles.equal_concurrence_decomposition(rho)
    else:
        ens = ensembles.entangled_decomposition(rho)
    _emit(ensembles.ensemble_to_json(ens), args.out)
    for idx, (w, s) in enumerate(ens.elements):
        conc = monotones.concurrence_pure(s)
        print(f"element {idx}: weight {w:.12f} concurrence {conc:.12f}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            return cmd_analyze(args)
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_decompose(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

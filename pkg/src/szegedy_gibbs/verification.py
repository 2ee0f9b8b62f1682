"""The invariant ladder behind the ``verify`` command.

Each check records its value, tolerance and a status of ``pass``, ``fail`` or
``skipped: <reason>``. Checks that only hold for a normal M_hyb are skipped,
not failed, when the eigenvectors are not orthonormal.
"""

from __future__ import annotations

import math

import numpy as np

from .bayesnet import BayesianNetwork
from .chains import (
    build_M1,
    build_M2,
    build_M_hyb,
    check_pair_detailed_balance,
    spectrum,
    stationarity_residuals,
    verify_spectra_equal,
)
from .embedding import QEmbedding, decompose_multiplexors, defined_columns, hybrid_block, verify_eigen_diagonal
from .errors import DegenerateTopEigenvalue, SingularPi
from .reflection import choose_parameters, measure_reflection_error, walk_phase_gap
from .walk import GATE_TOL, MAX_DENSE_W_BITS, verify_walk_spectrum

SCHEMA_VERSION = 1
MAX_GATE_CHECK_BITS = 4
MAX_REFLECTION_BITS = 3


def _check(value, tol, skipped=None):
    if skipped is not None:
        return {"value": None, "tol": tol, "status": skipped}
    value = float(value)
    return {"value": value, "tol": tol, "status": "pass" if value < tol else "fail"}


def _embedding_checks(net, emb):
    N = net.n_states
    U1, U2 = emb.dense_U1(), emb.dense_U2()
    L1, L2 = np.sqrt(build_M1(net)), np.sqrt(build_M2(net))
    eye = np.eye(N)
    col1 = max(np.abs(U1[:, x * N].reshape(N, N) - np.outer(eye[x], L1[:, x])).max() for x in range(N))
    col2 = max(np.abs(U2[:, y].reshape(N, N) - np.outer(L2[:, y], eye[y])).max() for y in range(N))
    unit = max(np.abs(U.conj().T @ U - np.eye(N * N)).max() for U in (U1, U2))
    out = {
        "U1_defined_columns": _check(col1, 1e-12),
        "U2_defined_columns": _check(col2, 1e-12),
        "unitarity": _check(unit, 1e-10),
    }
    if net.n_bits <= MAX_GATE_CHECK_BITS:
        gaps = []
        for which, U in ((1, U1), (2, U2)):
            cols = defined_columns(N, which)
            G = decompose_multiplexors(net, which).dense()
            gaps.append(np.abs(G[:, cols] - U[:, cols]).max())
        out["gates_vs_dense"] = _check(max(gaps), 1e-10)
    else:
        out["gates_vs_dense"] = _check(None, 1e-10, "skipped: more than 4 bits")
    return out


def run_ladder(net: BayesianNetwork, epsilon2: float = 1 / 16, completion: str = "gram_schmidt") -> dict:
    """Run every check that fits the net's size; returns a JSON-ready dict."""
    report = {"schema_version": SCHEMA_VERSION, "n_bits": net.n_bits, "checks": {}}
    checks = report["checks"]
    pi = net.pi
    M1, M2 = build_M1(net), build_M2(net)
    M_hyb = build_M_hyb(M1, M2)

    checks["detailed_balance"] = _check(check_pair_detailed_balance(M1, M2, pi), 1e-12)
    try:
        cmp = verify_spectra_equal(M1, M2, M_hyb, pi)
        checks["spectra_equal"] = _check(cmp.mismatch, 1e-9)
        report["spectra_raw_mismatch"] = cmp.raw_mismatch
        checks["similarity_M2"] = _check(cmp.m2_similarity_residual, 1e-12)
        checks["similarity_M_hyb"] = _check(cmp.hyb_similarity_residual, 1e-12)
    except SingularPi as exc:
        for key in ("spectra_equal", "similarity_M2", "similarity_M_hyb"):
            checks[key] = _check(None, 1e-9, f"skipped: {exc}")
    st = stationarity_residuals(M1, M2, M_hyb, pi)
    checks["stationarity_M1"] = _check(st["M1"], 1e-12)
    checks["stationarity_M_hyb"] = _check(st["M_hyb"], 1e-10)

    try:
        spec = spectrum(M_hyb)
    except DegenerateTopEigenvalue as exc:
        report["spectrum_error"] = str(exc)
        spec = None
    if spec is not None:
        report["delta"] = spec.delta
        report["normal_M_hyb"] = bool(spec.orthonormality_residual < GATE_TOL)

    emb = QEmbedding(net, completion)
    if net.n_bits <= 5:
        checks.update(_embedding_checks(net, emb))
    else:
        checks["unitarity"] = _check(None, 1e-10, "skipped: more than 5 bits")
    A = hybrid_block(emb.apply_U, net.n_states)
    checks["U_hybrid_block"] = _check(np.abs(A - M_hyb).max(), 1e-10)
    if spec is not None:
        c3 = verify_eigen_diagonal(emb.apply_U, spec, emb.layout)
        checks["eigen_diagonal"] = _check(c3.value, 1e-9, c3.skipped)
        report["eigen_diagonal_observed"] = c3.value

    if net.n_bits <= MAX_DENSE_W_BITS and spec is not None:
        walk = verify_walk_spectrum(net, completion)
        normal = walk["normal_M_hyb"]
        gate = None if normal else "skipped: non-normal M_hyb"
        checks["walk_psi0_fixed"] = _check(walk["psi0_fixed"], 1e-10)
        checks["walk_u_swap_psi0"] = _check(walk["u_swap_psi0"], 1e-10)
        checks["walk_spectrum_singular"] = _check(walk["spectrum_mismatch_singular"], 1e-9)
        checks["walk_spectrum_eigen"] = _check(walk["spectrum_mismatch_eigen"], 1e-9, gate)
        checks["walk_swap_eigen"] = _check(walk["swap_eigen"], 1e-9)
        checks["walk_swap_adjoint_eigen"] = _check(walk["swap_adjoint_eigen"], 1e-9, gate)
        checks["walk_perp_fixed"] = _check(walk["perp_fixed"], 1e-9)
        checks["walk_busy_dimension"] = _check(abs(walk["busy_dimension"] - (2 * net.n_states - 1)), 0.5)
        for key in ("busy_eigenpairs", "busy_gram", "busy_invariance"):
            val = walk[key]
            skipped = val if isinstance(val, str) else None
            checks[f"walk_{key}"] = _check(None if skipped else val, 1e-9, skipped)
        report["walk_observed"] = {
            "spectrum_mismatch_eigen": walk["spectrum_mismatch_eigen"],
            "swap_adjoint_eigen": walk["swap_adjoint_eigen"],
        }
    else:
        checks["walk_spectrum_singular"] = _check(None, 1e-9, "skipped: net too large for dense W")

    if net.n_bits <= MAX_REFLECTION_BITS and spec is not None and spec.delta > 0:
        pe = choose_parameters(spec.delta, epsilon2, phase_gap=walk_phase_gap(M_hyb))
        err = measure_reflection_error(net, pe)
        report["reflection"] = {"a": pe.a, "c": pe.c, "epsilon2": epsilon2, "error": err}
        checks["reflection_error"] = _check(err, 4 * math.sqrt(epsilon2))
    else:
        checks["reflection_error"] = _check(None, 4 * math.sqrt(epsilon2), "skipped: net too large")

    report["ok"] = all(c["status"] != "fail" for c in checks.values())
    report["failed"] = [k for k, c in checks.items() if c["status"] == "fail"]
    report["skipped"] = [k for k, c in checks.items() if c["status"].startswith("skipped")]
    return report

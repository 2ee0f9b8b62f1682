"""Acceptance criteria 1-10.

Each criterion records one PASS/FAIL line; the lines are printed in the
pytest terminal summary and also when this file is run as a script.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import DATA, GENERIC_NETS, SYMMETRIC_NETS  # noqa: E402

from szegedy_gibbs import nets  # noqa: E402
from szegedy_gibbs.bayesnet import BayesianNetwork  # noqa: E402
from szegedy_gibbs.chains import (  # noqa: E402
    build_M1,
    build_M2,
    build_M_hyb,
    check_pair_detailed_balance,
    spectrum,
    stationarity_residuals,
    verify_spectra_equal,
)
from szegedy_gibbs.embedding import QEmbedding, verify_eigen_diagonal  # noqa: E402
from szegedy_gibbs.reflection import PEParams, measure_reflection_error  # noqa: E402
from szegedy_gibbs.sampler import (  # noqa: E402
    compare,
    default_parameters,
    loglog_slope,
    make_config,
    run_quantum_sampler,
)
from szegedy_gibbs.verification import _embedding_checks  # noqa: E402
from szegedy_gibbs.walk import verify_walk_spectrum  # noqa: E402

RESULTS: dict = {}


def record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    return ok


def random_suite():
    """25 seeded random nets with 1 to 6 bits."""
    rng = np.random.default_rng(2024)
    out = []
    for k in range(25):
        cards = []
        while sum(c.bit_length() - 1 for c in cards) < 1 + k % 6:
            cards.append(int(rng.choice([2, 2, 4])))
        while sum(c.bit_length() - 1 for c in cards) > 6:
            cards.pop()
        out.append(nets.random_network(1000 + k, len(cards), cards, edge_prob=0.6))
    return out


def fixtures():
    return {p.stem: BayesianNetwork.from_json(p) for p in sorted(DATA.glob("*.json"))
            if p.stem != "malformed" and not p.stem.startswith("golden")}


def _kernels(net):
    M1, M2 = build_M1(net), build_M2(net)
    return M1, M2, build_M_hyb(M1, M2)


def criterion_1():
    start = time.perf_counter()
    worst = max(check_pair_detailed_balance(M1, M2, net.pi)
                for net in random_suite() for M1, M2, _ in [_kernels(net)])
    elapsed = time.perf_counter() - start
    return record(1, worst < 1e-12 and elapsed < 5, f"detailed balance {worst:.1e} (< 1e-12), {elapsed:.2f} s (< 5 s)")


def criterion_2():
    mism, raw, sim = 0.0, 0.0, 0.0
    for net in random_suite():
        M1, M2, Mh = _kernels(net)
        cmp = verify_spectra_equal(M1, M2, Mh, net.pi)
        mism = max(mism, cmp.mismatch)
        raw = max(raw, cmp.raw_mismatch)
        sim = max(sim, cmp.m2_similarity_residual, cmp.hyb_similarity_residual)
    ok = mism < 1e-9 and sim < 1e-12
    return record(2, ok, f"spectra {mism:.1e} (< 1e-9; raw eigensolver {raw:.1e}), similarity {sim:.1e} (< 1e-12)")


def criterion_3():
    r1 = rh = 0.0
    for net in fixtures().values():
        M1, M2, Mh = _kernels(net)
        st = stationarity_residuals(M1, M2, Mh, net.pi)
        r1, rh = max(r1, st["M1"]), max(rh, st["M_hyb"])
    return record(3, r1 < 1e-12 and rh < 1e-10, f"M1 pi {r1:.1e} (< 1e-12), M_hyb sqrt(pi) {rh:.1e} (< 1e-10)")


def criterion_4():
    cols = unit = gates = 0.0
    pool = list(fixtures().values()) + [n for n in random_suite() if n.n_bits <= 5]
    for net in pool:
        if net.n_bits > 5:
            continue
        checks = _embedding_checks(net, QEmbedding(net))
        cols = max(cols, checks["U1_defined_columns"]["value"], checks["U2_defined_columns"]["value"])
        unit = max(unit, checks["unitarity"]["value"])
        if checks["gates_vs_dense"]["value"] is not None:
            gates = max(gates, checks["gates_vs_dense"]["value"])
    ok = cols < 1e-12 and unit < 1e-10 and gates < 1e-10
    return record(4, ok, f"columns {cols:.1e} (< 1e-12), unitarity {unit:.1e} (< 1e-10), gates {gates:.1e} (< 1e-10)")


def criterion_5():
    sym = 0.0
    for make in SYMMETRIC_NETS.values():
        net = make()
        emb = QEmbedding(net)
        sym = max(sym, verify_eigen_diagonal(emb.apply_U, spectrum(_kernels(net)[2]), emb.layout).value)
    generic = []
    for name, make in GENERIC_NETS.items():
        net = make()
        emb = QEmbedding(net)
        res = verify_eigen_diagonal(emb.apply_U, spectrum(_kernels(net)[2]), emb.layout)
        generic.append(f"{name}={res.value:.1e}")
    return record(5, sym < 1e-9, f"symmetric {sym:.1e} (< 1e-9); generic reported: {', '.join(generic)}")


def criterion_6():
    eig = fixed = perp = sing = 0.0
    for make in SYMMETRIC_NETS.values():
        net = make()
        if net.n_bits > 3:
            continue
        rep = verify_walk_spectrum(net)
        eig = max(eig, rep["spectrum_mismatch_eigen"])
        fixed, perp = max(fixed, rep["psi0_fixed"]), max(perp, rep["perp_fixed"])
    generic = 0.0
    for make in list(GENERIC_NETS.values()) + [lambda: nets.uniform_independent(3)]:
        net = make()
        rep = verify_walk_spectrum(net)
        sing = max(sing, rep["spectrum_mismatch_singular"])
        fixed, perp = max(fixed, rep["psi0_fixed"]), max(perp, rep["perp_fixed"])
        if not rep["normal_M_hyb"]:
            generic = max(generic, rep["spectrum_mismatch_eigen"])
    ok = eig < 1e-9 and sing < 1e-9 and fixed < 1e-10 and perp < 1e-9
    return record(6, ok, f"eigenphase spectrum {eig:.1e} (< 1e-9, normal nets), singular-value spectrum {sing:.1e} "
                         f"(all nets), W psi0 {fixed:.1e}, perp {perp:.1e}; non-normal eigenphase mismatch "
                         f"reported {generic:.1e}")


def criterion_7():
    start = time.perf_counter()
    ok, parts = True, []
    for name, net in [("single", nets.single_node(0.5)), ("two_node", nets.two_node_example()),
                      ("seeded3", nets.seeded_three_node())]:
        pe = default_parameters(net, 1 / 16)
        errs = [measure_reflection_error(net, PEParams(pe.a, c, pe.epsilon2, pe.Delta)) for c in (1, 2, 3)]
        chosen = measure_reflection_error(net, pe)
        exact = errs[0] < 1e-9
        mono = all(e < 1e-9 for e in errs) if exact else errs[0] > errs[1] > errs[2]
        ok &= mono and chosen < 4 * math.sqrt(pe.epsilon2)
        parts.append(f"{name} c=1..3 {[float(f'{e:.2g}') for e in errs]}")
    exact_err = max(measure_reflection_error(n, PEParams(1, 1, 0.25, 0.5))
                    for n in (nets.single_node(0.5), nets.uniform_independent(3)))
    elapsed = time.perf_counter() - start
    ok &= exact_err < 1e-9 and elapsed < 60
    return record(7, ok, f"{'; '.join(parts)}; bound 4 sqrt(eps2) = 1; exact-phase {exact_err:.1e}; {elapsed:.1f} s")


def criterion_8():
    net = nets.uniform_independent(3)
    cfg = make_config(net, x0=(0, 0, 0), shots=10_000, seed=8)
    rep = run_quantum_sampler(net, cfg)
    fid = rep.details["grover_fidelity"]
    sigma = np.sqrt(net.pi * (1 - net.pi) / cfg.shots)
    within = bool(np.all(np.abs(rep.pi_tilde - net.pi) <= 3 * sigma))
    budget = cfg.L * math.sqrt(cfg.pe.epsilon2)
    const = rep.epsilon_hat_exact / budget
    ok = cfg.L == 2 and fid >= 0.94 and within and const <= 4
    return record(8, ok, f"L={cfg.L}, fidelity {fid:.4f} (>= 0.94), 3-sigma {within}, "
                         f"eps_hat/(L sqrt(eps2)) = {const:.2g} (<= 4)")


def criterion_9():
    start = time.perf_counter()
    rows = [compare(BayesianNetwork.from_json(DATA / f"coupling_g{g}.json"), 0.25)["row"]
            for g in ("060", "080", "090", "095")]
    inv_delta = [1 / r["delta"] for r in rows]
    q = loglog_slope(inv_delta, [r["W_applications"] for r in rows])
    c = loglog_slope(inv_delta, [r["classical_sweeps"] for r in rows])
    elapsed = time.perf_counter() - start
    ok = 0.35 <= q <= 0.65 and 0.85 <= c <= 1.15 and elapsed < 300
    return record(9, ok, f"quantum slope {q:.3f} in [0.35, 0.65], classical slope {c:.3f} in [0.85, 1.15], "
                         f"{elapsed:.1f} s")


def _accounting_run():
    net = nets.seeded_three_node()
    cfg = make_config(net, shots=100, seed=10)
    return cfg, run_quantum_sampler(net, cfg)


def criterion_10():
    cfg, rep = _accounting_run()
    literal = cfg.L * 2 * (1 << cfg.pe.a) * cfg.pe.c
    got = rep.details["W_applications_prep"]
    return record(10, got == literal, f"prepared-state W count {got} vs L*2*2^a*c = {literal} "
                                      f"(a={cfg.pe.a}, c={cfg.pe.c}, L={cfg.L}; phase estimation uses 2^a - 1 per block)")


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n):
    assert globals()[f"criterion_{n}"]()


@pytest.mark.xfail(strict=True, reason="controlled powers W^(2^t), t < a, cost 2^a - 1 walks per block, not 2^a")
def test_criterion_10_literal_count():
    assert criterion_10()


def test_step_accounting_matches_counter():
    cfg, rep = _accounting_run()
    per_block = (1 << cfg.pe.a) - 1
    assert rep.details["W_applications_prep"] == cfg.L * 2 * per_block * cfg.pe.c
    assert rep.W_applications == rep.details["W_applications_prep"] + per_block * cfg.pe.c


if __name__ == "__main__":
    results = [globals()[f"criterion_{n}"]() for n in range(1, 11)]
    sys.exit(0 if all(results) else 1)

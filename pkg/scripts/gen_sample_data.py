"""Generate the bundled sample data files.

The sample equation set is synthetic: small coefficients on the standard
29-term structure, diagonally dominant on the linear blocks so that the
induced transient dynamics stay bounded and the residual system K stays well
conditioned across the working range.  Run once; the outputs are committed.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from affectagent.dynamics import build_k, hc_factors, oracle_trace  # noqa: E402
from affectagent.equations import DEFAULT_TERMS, EquationSet, save_equations  # noqa: E402

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "affectagent" / "data"


def make_sample_equations(seed: int) -> EquationSet:
    """Damped self-anchoring on each block plus a strong behaviour->actor
    coupling, so identity-confirming behaviours exist (low deflection floor)
    and observed behaviours carry information about who is acting."""
    rng = np.random.default_rng(seed)
    n_terms = len(DEFAULT_TERMS)
    m = np.zeros((9, n_terms))

    m[:, 0] = rng.uniform(-0.03, 0.03, size=9)

    # actor rows: impressions persist and are repaired by the behaviour
    m[0:3, 1:4] = 0.50 * np.eye(3) + rng.uniform(-0.02, 0.02, size=(3, 3))
    m[0:3, 4:7] = 0.35 * np.eye(3) + rng.uniform(-0.03, 0.03, size=(3, 3))
    m[0:3, 7:10] = rng.uniform(-0.03, 0.03, size=(3, 3))

    # behaviour rows: the acted behaviour dominates its own impression
    m[3:6, 1:4] = 0.20 * np.eye(3) + rng.uniform(-0.02, 0.02, size=(3, 3))
    m[3:6, 4:7] = 0.50 * np.eye(3) + rng.uniform(-0.02, 0.02, size=(3, 3))
    m[3:6, 7:10] = 0.10 * np.eye(3) + rng.uniform(-0.02, 0.02, size=(3, 3))

    # object rows: persistence with a mild behaviour spillover
    m[6:9, 1:4] = rng.uniform(-0.03, 0.03, size=(3, 3))
    m[6:9, 4:7] = 0.15 * np.eye(3) + rng.uniform(-0.03, 0.03, size=(3, 3))
    m[6:9, 7:10] = 0.50 * np.eye(3) + rng.uniform(-0.02, 0.02, size=(3, 3))

    # sparse, small interaction terms
    inter = rng.uniform(-0.04, 0.04, size=(9, n_terms - 10))
    inter[rng.random(inter.shape) < 0.6] = 0.0
    m[:, 10:] = inter

    np.clip(m, -0.5, 0.5, out=m)
    return EquationSet(m=m, terms=DEFAULT_TERMS, culture="sample")


def conditioning_report(eq: EquationSet, rng: np.random.Generator):
    worst_cond = 0.0
    worst_tau = 0.0
    floors = []
    for _ in range(500):
        tau = rng.uniform(-4.0, 4.0, size=9)
        for turn in ("agent", "client"):
            k = build_k(hc_factors(tau, turn, eq))
            worst_cond = max(worst_cond, np.linalg.cond(k))
    for _ in range(50):
        ids = rng.uniform(-3.0, 3.0, size=6)
        trace = oracle_trace(ids[:3], ids[3:], eq, steps=200)
        worst_tau = max(worst_tau, max(np.max(np.abs(s.tau_prime)) for s in trace))
        floors.append(np.mean([s.deflection for s in trace[-20:]]))
    return worst_cond, worst_tau, float(np.median(floors))


def main() -> None:
    check_rng = np.random.default_rng(20240817)
    best = None
    for seed in range(1, 60):
        eq = make_sample_equations(seed)
        cond, tau_max, floor = conditioning_report(
            eq, np.random.default_rng(check_rng.integers(2**31))
        )
        print(
            f"seed {seed:3d}: worst cond(K) = {cond:9.2f}, max |tau| = {tau_max:8.2f}, "
            f"median settled deflection = {floor:6.2f}"
        )
        if best is None or (cond, tau_max) < best[1:3]:
            best = (seed, cond, tau_max, floor)
        if cond < 60 and tau_max < 8 and floor < 4.0:
            best = (seed, cond, tau_max, floor)
            break
    seed, cond, tau_max, floor = best
    print(f"selected seed {seed} (cond {cond:.2f}, max tau {tau_max:.2f}, floor {floor:.2f})")
    eq = make_sample_equations(seed)
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    save_equations(eq, DATA_DIR / "sample_equations.txt")


if __name__ == "__main__":
    main()

import numpy as np
import pytest

from kinstab.operators import as_dense

# criterion id -> [(clause, ok, detail)], filled by tests/test_acceptance.py
ACCEPTANCE = {}


def record(criterion, clause, ok, detail):
    ACCEPTANCE.setdefault(criterion, []).append((clause, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'} criterion {criterion} [{clause}]: {detail}")
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE, key=int):
        clauses = ACCEPTANCE[crit]
        ok = all(c[1] for c in clauses)
        failed = [c[0] for c in clauses if not c[1]]
        tail = f" (failed: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {crit}{tail}")
        for clause, c_ok, detail in clauses:
            terminalreporter.write_line(f"    {'pass' if c_ok else 'FAIL'} {clause}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def dense_full_step(spec, state, tau, F=None):
    """Oracle: solve the unreduced 2n x 2n system of one step directly."""
    n = state.n
    I = np.eye(n)
    a, c = spec.w.alpha, spec.w.c
    Li = as_dense(spec.implicit_op) if spec.implicit_op is not None else np.zeros((n, n))
    Le = as_dense(spec.explicit_op) if spec.explicit_op is not None else np.zeros((n, n))
    A = np.block([[I + tau * Li, I], [-tau * a * c * I, (1 + tau * a) * I]])
    r1 = state.U + state.V - tau * Le @ state.U
    if F is not None:
        r1 = r1 + tau * F
    x = np.linalg.solve(A, np.concatenate([r1, state.V]))
    return x[:n], x[n:]


def dense_two_species_step(ts, L, tau):
    """Oracle: unreduced 3n x 3n solve for the two-species system."""
    n = ts.U.size
    I = np.eye(n)
    Z = np.zeros((n, n))
    a1, a2, c1, c2 = ts.alpha1, ts.alpha2, ts.c1, ts.c2
    A = np.block(
        [
            [I + tau * L, I, I],
            [-tau * a1 * c1 * I, (1 + tau * a1) * I, Z],
            [-tau * a2 * c2 * I, Z, (1 + tau * a2) * I],
        ]
    )
    x = np.linalg.solve(A, np.concatenate([ts.U + ts.V1 + ts.V2, ts.V1, ts.V2]))
    return x[:n], x[n : 2 * n], x[2 * n :]


def random_spd(rng, n, cond=10.0):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    ev = np.geomspace(1.0, cond, n)
    M = Q @ np.diag(ev) @ Q.T
    return 0.5 * (M + M.T)

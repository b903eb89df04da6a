"""Shared brute-force oracles for the test suite.

Everything here is deliberately independent of the library's closed forms:
fixed-step RK4 marches and dense operator matrices only.
"""

import numpy as np


def phase_ode(protocol, times, steps_per_unit=600):
    """RK4 integration of eta' = f, chi' = g e^{-i eta} with checkpoints.

    Returns a list of (eta, chi) at the requested (sorted, nonnegative)
    times. Independent referee for the drive-phase closed forms; at the
    default resolution the accumulated error is ~1e-11 per time unit for
    fields of order one.
    """
    out = []
    eta, chi = 0.0, 0.0 + 0.0j
    t_prev = 0.0

    def rhs(tau, e):
        return float(protocol.f(tau)), complex(protocol.g(tau)) * np.exp(-1j * e)

    for t_next in times:
        span = t_next - t_prev
        if span > 0:
            nsteps = max(8, int(np.ceil(span * steps_per_unit)))
            h = span / nsteps
            tau = t_prev
            for _ in range(nsteps):
                f1, c1 = rhs(tau, eta)
                f2, c2 = rhs(tau + h / 2, eta + h / 2 * f1)
                f3, c3 = rhs(tau + h / 2, eta + h / 2 * f2)
                f4, c4 = rhs(tau + h, eta + h * f3)
                chi = chi + h / 6 * (c1 + 2 * c2 + 2 * c3 + c4)
                eta = eta + h / 6 * (f1 + 2 * f2 + 2 * f3 + f4)
                tau += h
        out.append((eta, chi))
        t_prev = t_next
    return out


def dense_operators(window):
    """Dense N and K matrices on [n_min, n_max]: N|n> = n|n>, K|n> = |n-1>."""
    lo, hi = window
    size = hi - lo + 1
    n_mat = np.diag(np.arange(lo, hi + 1).astype(float)).astype(complex)
    k_mat = np.zeros((size, size), dtype=complex)
    for i in range(size - 1):
        k_mat[i, i + 1] = 1.0  # (K psi)_n = c_{n+1}
    return n_mat, k_mat


def dense_coherence(state):
    """Coherence parameters from explicit matrix expectations.

    The state is zero-padded by two sites so the truncated K matrix acts
    unitarily on its support (window = storage, not a physical boundary).
    """
    state = state.embedded((state.n_min - 2, state.n_max + 2))
    n_mat, k_mat = dense_operators(state.window)
    c = state.amplitudes

    def ev(mat):
        return complex(np.vdot(c, mat @ c))

    k_dag = k_mat.conj().T
    c_mat = 0.5 * (k_mat + k_dag)
    s_mat = (k_mat - k_dag) / 2j
    ops = {"C": c_mat, "S": s_mat, "N": n_mat}
    cov = np.zeros((3, 3))
    for i, a in enumerate("CSN"):
        for j, b in enumerate("CSN"):
            sym = 0.5 * (ops[a] @ ops[b] + ops[b] @ ops[a])
            cov[i, j] = (ev(sym) - ev(ops[a]) * ev(ops[b])).real
    return {
        "K": ev(k_mat),
        "J": ev(n_mat @ k_mat + k_mat @ n_mat),
        "L": ev(k_mat @ k_mat),
        "n_mean": ev(n_mat).real,
        "n2_mean": ev(n_mat @ n_mat).real,
        "cov": cov,
    }


def rk4_classical(protocol, p0, q0, t_end, steps=100000, delta=1.0):
    """RK4 integration of pdot = -f/delta, qdot = -2 g delta sin(p delta)."""
    h = t_end / steps
    p, q = float(p0), float(q0)

    def rhs(tau, pp):
        f = float(protocol.f(tau))
        g = float(protocol.g(tau))
        return -f / delta, -2.0 * g * delta * np.sin(pp * delta)

    tau = 0.0
    for _ in range(steps):
        dp1, dq1 = rhs(tau, p)
        dp2, dq2 = rhs(tau + h / 2, p + h / 2 * dp1)
        dp3, dq3 = rhs(tau + h / 2, p + h / 2 * dp2)
        dp4, dq4 = rhs(tau + h, p + h * dp3)
        q = q + h / 6 * (dq1 + 2 * dq2 + 2 * dq3 + dq4)
        p = p + h / 6 * (dp1 + 2 * dp2 + 2 * dp3 + dp4)
        tau += h
    return p, q


def random_state(rng, window, ring=False):
    """A normalized random complex state on the window."""
    from driventb import LatticeState

    size = window[1] - window[0] + 1
    amps = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    amps /= np.linalg.norm(amps)
    return LatticeState(window[0], amps, ring=ring)

"""Reference computations kept independent of the package's solvers."""

import numpy as np


def projection_tsls(y, x, z):
    """One-shot 2SLS: beta = (X' Pz X)^-1 X' Pz y with Pz = Z (Z'Z)^-1 Z'."""
    pz = z @ np.linalg.solve(z.T @ z, z.T)
    xh = pz @ x
    return np.linalg.solve(xh.T @ x, xh.T @ y)


def design_matrices(data, spec):
    n = len(data["p"])
    const = np.ones(n)
    x = np.column_stack([const] + [np.asarray(data[c]) for c in spec.regressors])
    z = np.column_stack([const] + [np.asarray(data[c]) for c in spec.exogenous + spec.instruments])
    return x, z


def relative_gap(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))

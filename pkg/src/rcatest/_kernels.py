"""Vectorized Monte Carlo cores.

These mirror the single-series functions in :mod:`rcatest.teststats` and
:mod:`rcatest.estimate` but operate on whole batches (rows = replications,
or rows = candidate coefficients for one path).  A property test pins the
batch results to the public single-series API.

Degenerate rows (zero variances, collinear designs) yield NaN here instead
of raising; batch callers only ever feed continuously distributed data,
where degeneracy has probability zero.
"""

from __future__ import annotations

import numpy as np

from .teststats import StatKind

_PSI_CLAMP = 1.0 - 1e-12


def batch_paths(
    rho: float,
    omega: float,
    y0: float,
    eps: np.ndarray,
    v: np.ndarray | None,
) -> np.ndarray:
    """Simulate ``eps.shape[0]`` paths at once; returns shape ``(B, T+1)``.

    Scalar arithmetic matches :func:`rcatest.simulate.simulate_rca` exactly,
    so single rows agree bitwise with the public path simulator.
    """
    B, T = eps.shape
    y = np.empty((B, T + 1))
    y[:, 0] = y0
    prev = np.full(B, float(y0))
    if omega == 0.0:
        for t in range(T):
            prev = rho * prev + eps[:, t]
            y[:, t + 1] = prev
    else:
        for t in range(T):
            prev = (rho + omega * v[:, t]) * prev + eps[:, t]
            y[:, t + 1] = prev
    return y


def _row_dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise inner product with broadcasting for a shared 1-D factor."""
    if a.ndim == 1 and b.ndim == 1:
        return np.array(a @ b)
    if a.ndim == 1:
        return b @ a
    if b.ndim == 1:
        return a @ b
    return np.einsum("rt,rt->r", a, b)


def kind_stats(
    Z: np.ndarray,
    X1: np.ndarray,
    kinds,
    Z2: np.ndarray | None = None,
) -> dict[StatKind, np.ndarray]:
    """Statistic values for each requested kind, one per row of ``Z``.

    Parameters
    ----------
    Z : ndarray, shape (R, T)
        Residual rows.
    X1 : ndarray, shape (T,) or (R, T)
        Lagged level, shared across rows or per row.
    kinds : iterable of StatKind
    Z2 : ndarray, optional
        Squared-residual rows overriding ``Z**2`` (used by the calibration
        device that substitutes a synthetic squared-noise sequence).
    """
    kinds = list(kinds)
    R, T = Z.shape
    if Z2 is None:
        Z2 = Z * Z
    with np.errstate(invalid="ignore", divide="ignore"):
        s_eps2 = Z2.mean(axis=1)
        dev = Z2 - s_eps2[:, None]
        s_eta2 = np.einsum("rt,rt->r", dev, dev) / T
        psi = np.einsum("rt,rt->r", Z, dev) / T / np.sqrt(s_eps2 * s_eta2)
        psi = np.clip(psi, -_PSI_CLAMP, _PSI_CLAMP)

        # Demeaned design sums (scalars when X1 is shared).
        x1t = X1 - X1.mean(axis=-1, keepdims=True)
        x2 = X1 * X1
        x2t = x2 - x2.mean(axis=-1, keepdims=True)
        s11 = _row_dot(x1t, x1t)
        s12 = _row_dot(x1t, x2t)
        s22 = _row_dot(x2t, x2t)
        det = s11 * s22 - s12 * s12

        need_plain = any(not k.modified for k in kinds)
        need_mod = any(k.modified for k in kinds)
        out: dict[StatKind, np.ndarray] = {}

        for modified in (False, True):
            if modified and not need_mod:
                continue
            if not modified and not need_plain:
                continue
            if modified:
                coef = np.sqrt(s_eta2 / s_eps2) * psi
                W = (Z2 - coef[:, None] * Z) / np.sqrt(1.0 - psi * psi)[:, None]
            else:
                W = Z2
            b1 = _row_dot(x1t, W)
            b2 = _row_dot(x2t, W)
            sel = [k for k in kinds if k.modified == modified]
            if any(k in (StatKind.LN, StatKind.LN_STAR) for k in sel):
                ln = b2 / (np.sqrt(s_eta2) * np.sqrt(s22))
                if StatKind.LN in sel and not modified:
                    out[StatKind.LN] = np.atleast_1d(ln)
                if StatKind.LN_STAR in sel and modified:
                    out[StatKind.LN_STAR] = np.atleast_1d(ln)
            if any(k not in (StatKind.LN, StatKind.LN_STAR) for k in sel):
                delta = (s22 * b1 - s12 * b2) / det
                omega2 = (s11 * b2 - s12 * b1) / det
                wmean = W.mean(axis=1)
                sww = np.einsum("rt,rt->r", W, W) - T * wmean * wmean
                rss = np.maximum(sww - delta * b1 - omega2 * b2, 0.0)
                sigma2 = rss / T
                for k in sel:
                    if k in (StatKind.AUG_T, StatKind.AUG_T_STAR):
                        val = omega2 * np.sqrt(det / s11) / np.sqrt(sigma2)
                    elif k in (StatKind.WALD, StatKind.WALD_STAR):
                        val = (
                            s22 * b1 * b1 - 2.0 * s12 * b1 * b2 + s11 * b2 * b2
                        ) / det / sigma2
                    else:
                        continue
                    out[k] = np.atleast_1d(val)
    return out


def stats_at_rho(Y: np.ndarray, rho: float, kinds) -> dict[StatKind, np.ndarray]:
    """Statistics at a common hypothesized coefficient for each path row."""
    Z = Y[:, 1:] - rho * Y[:, :-1]
    return kind_stats(Z, Y[:, :-1], kinds)


def stats_over_rho_grid(
    y: np.ndarray,
    rho_grid: np.ndarray,
    kind: StatKind,
    Z2: np.ndarray | None = None,
) -> np.ndarray:
    """One path, many hypothesized coefficients."""
    Z = y[None, 1:] - rho_grid[:, None] * y[None, :-1]
    return kind_stats(Z, y[:-1], [kind], Z2=Z2)[kind]


def batch_rho_ols(Y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row-wise least-squares coefficient, t-ratio scale pieces.

    Returns ``(rho_hat, sum_lag_sq, sigma_eps2)`` per row, mirroring
    :func:`rcatest.estimate.rho_ols`.
    """
    lag, cur = Y[:, :-1], Y[:, 1:]
    den = np.einsum("rt,rt->r", lag, lag)
    rho_hat = np.einsum("rt,rt->r", lag, cur) / den
    Z = cur - rho_hat[:, None] * lag
    s2 = np.einsum("rt,rt->r", Z, Z) / Z.shape[1]
    return rho_hat, den, s2

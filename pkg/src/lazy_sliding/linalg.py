"""Small deterministic linear-algebra helpers (power iteration)."""

import numpy as np

from .errors import NumericalError


def start_vector(dim):
    """Deterministic power-iteration start: normalized all-ones, perturbed at index 0."""
    v = np.ones(dim)
    v[0] += 0.5
    return v / np.linalg.norm(v)


def power_iteration(matvec, dim, tol=1e-9, maxiter=None, start=None, stall_tol=None):
    """Dominant eigenpair of a symmetric operator by power iteration.

    Parameters
    ----------
    matvec : callable
        v -> M v for a symmetric M whose dominant eigenvalue (largest in
        magnitude) is the one wanted.
    dim : int
        Ambient dimension.
    tol : float
        Relative residual tolerance: stop once ||Mv - lam v|| <= tol * scale
        where scale = max(1, |lam|).
    maxiter : int, optional
        Iteration cap; defaults to max(500, ceil(10 * dim * log2(dim + 1))).
    start : ndarray, optional
        Start vector (defaults to `start_vector`).
    stall_tol : float, optional
        If given, also stop after three consecutive Rayleigh-quotient
        improvements below stall_tol * scale.  Used where the eigen*value*
        is what matters and near-degenerate spectra would otherwise make the
        residual criterion needlessly slow.

    Returns
    -------
    (eigval, eigvec, residual, iterations)

    Raises
    ------
    NumericalError
        If neither stopping criterion fires within the cap.
    """
    if maxiter is None:
        maxiter = max(500, int(np.ceil(10 * dim * np.log2(dim + 1))))
    v = start_vector(dim) if start is None else start / np.linalg.norm(start)
    lam_prev = None
    stalled = 0
    lam = 0.0
    resid = np.inf
    for it in range(1, maxiter + 1):
        w = matvec(v)
        lam = float(v @ w)
        scale = max(1.0, abs(lam))
        resid = float(np.linalg.norm(w - lam * v))
        if resid <= tol * scale:
            return lam, v, resid, it
        nw = np.linalg.norm(w)
        if nw <= 1e-300:
            # Operator annihilates the start vector; treat as (numerically) zero map.
            return 0.0, v, resid, it
        if stall_tol is not None and lam_prev is not None:
            if abs(lam - lam_prev) <= stall_tol * scale:
                stalled += 1
                if stalled >= 3:
                    return lam, v, resid, it
            else:
                stalled = 0
        lam_prev = lam
        v = w / nw
    raise NumericalError(
        "power iteration did not converge in %d iterations (residual %.3e)" % (maxiter, resid),
        residual=resid,
    )

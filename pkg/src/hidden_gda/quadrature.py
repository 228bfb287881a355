"""Adaptive Simpson quadrature, vectorised over many integrals at once.

Every integral ``[a_k, b_k]`` starts as one panel.  Each sweep evaluates the
integrand at the quarter points of all live panels in a single call, accepts
panels whose two-half Simpson estimate agrees with the whole-panel estimate
(``|S2 - S1| <= 15 tol_panel``, or below the rounding level of the panel
value), and splits the rest in two with half the
tolerance.  Accepted panels contribute the Richardson-corrected value
``S2 + (S2 - S1) / 15``.
"""

import numpy as np

MAX_PANELS = 2_000_000


class QuadratureError(RuntimeError):
    pass


def _simpson(fa, fm, fb, h):
    return h / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(func, a, b, tol=1e-10, max_depth=100):
    """Integrate ``func`` from ``a`` to ``b`` (broadcast arrays) to absolute ``tol``.

    ``func`` must accept and return 1-d float arrays.  ``tol`` may be an array
    broadcastable to the integrals.  Returns an array with the broadcast shape
    of ``a`` and ``b`` (a float for scalar input).
    """
    a_arr, b_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    tol_arr = np.broadcast_to(np.asarray(tol, dtype=float), a_arr.shape).ravel()
    shape = a_arr.shape
    lo = a_arr.ravel().copy()
    hi = b_arr.ravel().copy()
    out = np.zeros(lo.size)

    owner = np.nonzero(lo != hi)[0]
    lo, hi = lo[owner], hi[owner]
    if owner.size:
        mid = 0.5 * (lo + hi)
        vals = func(np.concatenate([lo, mid, hi]))
        fa, fm, fb = np.split(vals, 3)
        whole = _simpson(fa, fm, fb, hi - lo)
        ptol = tol_arr[owner].copy()

    depth = 0
    while owner.size:
        if depth > max_depth:
            raise QuadratureError(f"adaptive Simpson did not converge within depth {max_depth}")
        if owner.size > MAX_PANELS:
            raise QuadratureError(f"adaptive Simpson needs more than {MAX_PANELS} live panels; tolerance unreachable")
        mid = 0.5 * (lo + hi)
        lq = 0.5 * (lo + mid)
        rq = 0.5 * (mid + hi)
        flq, frq = np.split(func(np.concatenate([lq, rq])), 2)
        left = _simpson(fa, flq, fm, mid - lo)
        right = _simpson(fm, frq, fb, hi - mid)
        two = left + right
        err = two - whole
        if not np.all(np.isfinite(two)):
            raise QuadratureError("integrand is not finite on the integration interval")
        done = np.abs(err) <= 15.0 * np.maximum(ptol, 8.0 * np.finfo(float).eps * np.abs(two))
        np.add.at(out, owner[done], two[done] + err[done] / 15.0)
        keep = ~done
        owner = np.concatenate([owner[keep], owner[keep]])
        lo, mid_k, hi = lo[keep], mid[keep], hi[keep]
        fa, fm, fb = fa[keep], fm[keep], fb[keep]
        flq, frq = flq[keep], frq[keep]
        ptol = np.concatenate([ptol[keep], ptol[keep]]) / 2.0
        whole = np.concatenate([left[keep], right[keep]])
        lo, hi = np.concatenate([lo, mid_k]), np.concatenate([mid_k, hi])
        fa, fm, fb = np.concatenate([fa, fm]), np.concatenate([flq, frq]), np.concatenate([fm, fb])
        depth += 1

    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out


def cumulative_integrals(func, c, x, tol=1e-10):
    """``int_c^x func`` for every entry of ``x`` in one pass.

    The distinct values of ``x`` (and ``c``) split their hull into panels,
    each integrated adaptively with a tolerance proportional to its width, so
    the accumulated error stays below ``tol``.  Much cheaper than independent
    integrals when ``x`` samples a trajectory densely.
    """
    x = np.asarray(x, dtype=float)
    nodes, inverse = np.unique(np.concatenate([x.ravel(), [float(c)]]), return_inverse=True)
    if nodes.size == 1:
        return np.zeros(x.shape)
    widths = np.diff(nodes)
    panels = adaptive_simpson(func, nodes[:-1], nodes[1:], tol=tol * widths / (nodes[-1] - nodes[0]))
    running = np.concatenate([[0.0], np.cumsum(panels)])
    at = running[inverse.ravel()]
    return (at[:-1] - at[-1]).reshape(x.shape)

"""Adaptive Simpson integration for vector-valued integrands."""

import numpy as np

from .exceptions import ConvergenceError

MAX_PANELS = 2**20


def adaptive_simpson(func, a, b, tol=1e-9, initial_panels=8, max_panels=MAX_PANELS):
    """Integrate ``func`` over ``[a, b]`` to absolute tolerance ``tol``.

    ``func`` maps a float to a 1-D array; the error test uses the sup norm
    over components. Each panel is accepted when its two-half Simpson
    estimate agrees with the whole-panel one within ``15 * tol_panel``,
    with the panel tolerance proportional to its width, and the accepted
    value gets the Richardson correction.
    """
    if b <= a:
        raise ValueError("need a < b")
    width = b - a
    xs = np.linspace(a, b, initial_panels + 1)
    stack = []
    for lo, hi in zip(xs[:-1], xs[1:]):
        mid = 0.5 * (lo + hi)
        flo, fmid, fhi = (np.asarray(func(x), dtype=float) for x in (lo, mid, hi))
        whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
        stack.append((lo, mid, hi, flo, fmid, fhi, whole))

    total = None
    panels = 0
    while stack:
        lo, mid, hi, flo, fmid, fhi, whole = stack.pop()
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm = np.asarray(func(lm), dtype=float)
        frm = np.asarray(func(rm), dtype=float)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        halves = left + right
        err = np.max(np.abs(halves - whole))
        local_tol = tol * (hi - lo) / width
        if err <= 15.0 * local_tol or hi - lo <= 1e-12 * width:
            value = halves + (halves - whole) / 15.0
            total = value if total is None else total + value
            continue
        panels += 1
        if panels > max_panels:
            raise ConvergenceError(f"adaptive Simpson exceeded {max_panels} panels")
        stack.append((lo, lm, mid, flo, flm, fmid, left))
        stack.append((mid, rm, hi, fmid, frm, fhi, right))
    return total

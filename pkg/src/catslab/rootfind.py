"""Bracketed scalar root finding: bisection to a narrow interval, Newton polish.

All transcendental equations in this package (critical scale, cone tangency,
threshold inversion) have a proven bracketed root, so the solver insists on a
sign change and never leaves the bracket.  Newton (or secant, if no derivative
is supplied) only polishes the last few digits, which avoids the divergence a
raw Newton iteration can exhibit near the ends of the bracket.
"""

from __future__ import annotations

from .errors import ConvergenceError


def bracketed_root(
    f,
    lo: float,
    hi: float,
    fprime=None,
    *,
    bisect_width: float = 1e-8,
    residual_tol: float = 1e-12,
    max_polish: int = 60,
) -> float:
    """Root of ``f`` in ``[lo, hi]``; ``f(lo)`` and ``f(hi)`` must differ in sign.

    Bisects until the bracket is narrower than ``bisect_width``, then polishes
    with Newton steps (secant when ``fprime`` is None), rejecting any step that
    leaves the bracket.  Returns once ``|f(x)| <= residual_tol`` or the update
    stagnates at machine precision.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise ValueError(f"root not bracketed on [{lo}, {hi}]: f={flo}, {fhi}")

    while hi - lo > bisect_width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # bracket at machine resolution
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm

    x, fx = (lo, flo) if abs(flo) <= abs(fhi) else (hi, fhi)
    x_prev, f_prev = (hi, fhi) if x == lo else (lo, flo)
    for _ in range(max_polish):
        if abs(fx) <= residual_tol:
            return x
        if fprime is not None:
            df = fprime(x)
        else:
            df = (fx - f_prev) / (x - x_prev) if x != x_prev else 0.0
        step_ok = df != 0.0 and abs(df) > 1e-300
        x_new = x - fx / df if step_ok else 0.5 * (lo + hi)
        if not (lo <= x_new <= hi):
            x_new = 0.5 * (lo + hi)
        if x_new == x:
            break
        f_new = f(x_new)
        # keep the sign-change bracket tight
        if (f_new > 0.0) == (flo > 0.0):
            lo, flo = x_new, f_new
        else:
            hi, fhi = x_new, f_new
        x_prev, f_prev = x, fx
        x, fx = x_new, f_new

    if abs(fx) <= residual_tol:
        return x
    raise ConvergenceError(
        f"root polish stalled at x={x!r}", residuals={"f": fx, "bracket": (lo, hi)}
    )

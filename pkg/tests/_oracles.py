"""Independent numerical oracles used by the tests.

Each oracle deliberately avoids the closed forms implemented in the package:
tangent vectors come from finite differences of the parameterization, lengths
from discretized line integrals, eigenvalues from monodromy shooting, solution
counts from sign-change cells of a dense residual grid.
"""

import math

import numpy as np
from scipy.signal import resample as trig_resample

from catslab.geometry import CatenoidPiece, parameterize

TWO_PI = 2.0 * math.pi


def flux_line_integral(piece: CatenoidPiece, height: float, n: int = 256, step: float = 1e-6):
    """Discretized flux integral of the conormal over a horizontal slice circle.

    The conormal is the unit surface-tangent direction normal to the slice,
    taken here from a central difference of the parameterization in height.
    Returns a 3-vector.
    """
    theta = np.linspace(0.0, TWO_PI, n, endpoint=False)
    dh = step * max(1.0, piece.scale)
    hp, hm = height + dh, height - dh
    tangent_h = (parameterize(piece, hp, theta) - parameterize(piece, hm, theta)) / (
        hp - hm
    )
    conormal = tangent_h / np.linalg.norm(tangent_h, axis=-1, keepdims=True)
    tp, tm = theta + step, theta - step
    ds = np.linalg.norm(
        (parameterize(piece, height, tp) - parameterize(piece, height, tm))
        / (tp - tm)[:, None],
        axis=-1,
    )
    return (conormal * ds[:, None]).mean(axis=0) * TWO_PI


def circle_arclength(piece: CatenoidPiece, height: float, n: int = 512, step: float = 1e-6):
    """Arclength of one horizontal slice circle from the parameterization."""
    theta = np.linspace(0.0, TWO_PI, n, endpoint=False)
    tp, tm = theta + step, theta - step
    speed = np.linalg.norm(
        (parameterize(piece, height, tp) - parameterize(piece, height, tm))
        / (tp - tm)[:, None],
        axis=-1,
    )
    return float(speed.mean() * TWO_PI)


def boundary_arclength(piece: CatenoidPiece, n: int = 512):
    return circle_arclength(piece, piece.slab.h_minus, n) + circle_arclength(
        piece, piece.slab.h_plus, n
    )


def cone_separation(apex_height: float, t_tangent: float, n: int = 4001):
    """Sampled min over heights of cosh(x3) minus the cone-profile radius.

    The cone through (0, apex_height) touching the profile r = cosh(x3) at
    height t has profile radius cosh(t) + (x3 - t) sinh(t); the catenoid must
    stay outside the cone except at the tangency height (which is included in
    the sample set, so the minimum is ~0 there).
    """
    span = 3.0 * max(1.0, abs(t_tangent), abs(apex_height))
    heights = np.concatenate([np.linspace(-span, span, n), [t_tangent]])
    line = math.cosh(t_tangent) + (heights - t_tangent) * math.sinh(t_tangent)
    return float((np.cosh(heights) - line).min())


def floquet_lambda1(curve, steps: int = 2048, tol: float = 1e-11):
    """Lowest periodic eigenvalue of -f'' + kappa^2 f by monodromy shooting.

    Integrates the fundamental system of the Hill equation over one period by
    fixed-step RK4 (curvature squared trig-refined to the half-step grid).
    The discriminant u1(L) + u2'(L) exceeds 2 strictly below the lowest
    periodic eigenvalue and dips below 2 just above it (it exceeds 2 again in
    spectral gaps), so the FIRST downward crossing of 2 is located by an
    upward scan and then bisected.
    """
    n = len(curve)
    mult = max(1, int(math.ceil(2 * steps / n)))
    fine = trig_resample(curve.curvature**2, mult * n)
    steps = (mult * n) // 2
    L = curve.total_length
    h = L / steps

    def discriminant(lams):
        lams = np.atleast_1d(np.asarray(lams, dtype=float))
        u1 = np.ones_like(lams)
        v1 = np.zeros_like(lams)
        u2 = np.zeros_like(lams)
        v2 = np.ones_like(lams)

        def rk4(u, v, q0, qm, q1):
            k1u, k1v = v, q0 * u
            au, av = u + 0.5 * h * k1u, v + 0.5 * h * k1v
            k2u, k2v = av, qm * au
            bu, bv = u + 0.5 * h * k2u, v + 0.5 * h * k2v
            k3u, k3v = bv, qm * bu
            cu, cv = u + h * k3u, v + h * k3v
            k4u, k4v = cv, q1 * cu
            return (
                u + (h / 6.0) * (k1u + 2 * k2u + 2 * k3u + k4u),
                v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v),
            )

        for i in range(steps):
            q0 = fine[2 * i] - lams
            qm = fine[2 * i + 1] - lams
            q1 = fine[(2 * i + 2) % len(fine)] - lams
            u1, v1 = rk4(u1, v1, q0, qm, q1)
            u2, v2 = rk4(u2, v2, q0, qm, q1)
        return u1 + v2

    rayleigh_const = float(
        (curve.curvature**2 * curve.speed).mean() / curve.speed.mean()
    )
    grid = np.linspace(0.0, rayleigh_const * 1.01 + 1e-12, 160)
    disc = discriminant(grid) - 2.0
    below = np.nonzero(disc < 0.0)[0]
    assert disc[0] > 0.0 and below.size, "no downward crossing of the discriminant"
    k = below[0]
    lo, hi = float(grid[k - 1]), float(grid[k])
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if float(discriminant(mid)[0]) - 2.0 > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def spanning_count_grid(lower, upper, slab, n_lam=400, n_c=400):
    """Count solution clusters of the two-length system on a dense (lam, c)
    grid: cells where both boundary-length residuals change sign, merged into
    4-connected clusters."""
    lam_max = lower / TWO_PI
    lams = np.geomspace(lam_max * 1e-3, lam_max * 1.0, n_lam)
    span = slab.h_plus - slab.h_minus
    cs = np.linspace(slab.h_minus - 3.0 * span, slab.h_plus + 3.0 * span, n_c)
    Lg, Cg = np.meshgrid(lams, cs, indexing="ij")
    r1 = TWO_PI * Lg * np.cosh(np.clip((slab.h_minus - Cg) / Lg, -700, 700)) - lower
    r2 = TWO_PI * Lg * np.cosh(np.clip((slab.h_plus - Cg) / Lg, -700, 700)) - upper

    def changes(r):
        s = np.sign(r)
        return (
            (s[:-1, :-1] != s[1:, :-1])
            | (s[:-1, :-1] != s[:-1, 1:])
            | (s[:-1, :-1] != s[1:, 1:])
        )

    hot = changes(r1) & changes(r2)
    seen = np.zeros_like(hot, dtype=bool)
    clusters = 0
    stack = []
    for i in range(hot.shape[0]):
        for j in range(hot.shape[1]):
            if hot[i, j] and not seen[i, j]:
                clusters += 1
                stack.append((i, j))
                seen[i, j] = True
                while stack:
                    a, b = stack.pop()
                    for da, db in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                        x, y = a + da, b + db
                        if (
                            0 <= x < hot.shape[0]
                            and 0 <= y < hot.shape[1]
                            and hot[x, y]
                            and not seen[x, y]
                        ):
                            seen[x, y] = True
                            stack.append((x, y))
    return clusters

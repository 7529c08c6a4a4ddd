"""Minimal annuli synthesized from Laurent-series Weierstrass data.

The data is a pair of finite Laurent series on an annulus: ``g`` (stereographic
projection of the Gauss map, nonvanishing on the closed annulus) and ``h`` with
height differential ``h(z) dz``.  The immersion is recovered by contour
integration of

    F = Re Int ( (g^-1 - g)/2, i (g^-1 + g)/2, 1 ) h dz,

well defined on the annulus when the residue conditions hold: the residue of
``h`` is real (single-valued height) and the z^-1 coefficients of ``g*h`` and
``h/g`` vanish (single-valued horizontal coordinates and vertical flux).  The
vertical flux is then F3 = 2*pi*Res(h) > 0 and mu = F3/(2*pi) is the conformal
circumference scale of the annulus.

The length of the image of the circle |z| = e^t,

    L(t) = 1/2 Int (|z g h| + |z h / g|) dtheta,

is log-convex in the strong sense L''(t) >= L(t), with equality exactly on
planar and catenoidal data; the reference instance g = z, h = lam/z gives the
scale-lam vertical catenoid with L(t) = 2*pi*lam*cosh(t).  On data in vertical
gauge (h = mu/z exactly) the circles are the horizontal level sets, heights
are mu*t, and the module can compare areas against the flux-matched catenoid
and test the second-derivative decomposition of level-set length along the
level curves.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import DataInvalidError, ResolutionError
from .geometry import TWO_PI, CatenoidPiece, Slab

_SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeierstrassData:
    """Laurent coefficient tables for (g, h) on the annulus r_inner < |z| < r_outer."""

    g_coeffs: dict
    h_coeffs: dict
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not (0.0 < self.r_inner < self.r_outer):
            raise DataInvalidError(
                f"need 0 < r_inner < r_outer, got {self.r_inner}, {self.r_outer}"
            )
        for name, table in (("g", self.g_coeffs), ("h", self.h_coeffs)):
            if not table:
                raise DataInvalidError(f"empty coefficient table for {name}")
            for p in table:
                if p != int(p):
                    raise DataInvalidError(f"non-integer power {p} in {name}")
        # canonical (power-sorted) order so evaluation is bit-reproducible
        object.__setattr__(
            self,
            "g_coeffs",
            {int(p): complex(self.g_coeffs[p]) for p in sorted(self.g_coeffs)},
        )
        object.__setattr__(
            self,
            "h_coeffs",
            {int(p): complex(self.h_coeffs[p]) for p in sorted(self.h_coeffs)},
        )

    def scaled(self, factor: float) -> "WeierstrassData":
        """Homothety: scale the height differential (and hence the immersion)."""
        return WeierstrassData(
            dict(self.g_coeffs),
            {p: factor * c for p, c in self.h_coeffs.items()},
            self.r_inner,
            self.r_outer,
        )


def _eval_laurent(coeffs: dict, z: np.ndarray) -> np.ndarray:
    out = np.zeros_like(np.asarray(z, dtype=complex))
    for p, c in coeffs.items():
        out = out + c * np.asarray(z, dtype=complex) ** p
    return out


def _derivative_coeffs(coeffs: dict) -> dict:
    return {p - 1: p * c for p, c in coeffs.items() if p != 0}


def eval_g(data: WeierstrassData, z) -> np.ndarray:
    return _eval_laurent(data.g_coeffs, z)


def eval_h(data: WeierstrassData, z) -> np.ndarray:
    return _eval_laurent(data.h_coeffs, z)


def to_json(data: WeierstrassData) -> str:
    doc = {
        "version": _SCHEMA_VERSION,
        "g": [[p, c.real, c.imag] for p, c in sorted(data.g_coeffs.items())],
        "h": [[p, c.real, c.imag] for p, c in sorted(data.h_coeffs.items())],
        "r_inner": data.r_inner,
        "r_outer": data.r_outer,
    }
    return json.dumps(doc, sort_keys=True)


def from_json(text: str) -> WeierstrassData:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataInvalidError(f"unparsable Weierstrass document: {exc}") from exc
    if not isinstance(doc, dict):
        raise DataInvalidError("Weierstrass document must be a JSON object")
    allowed = {"version", "g", "h", "r_inner", "r_outer"}
    unknown = set(doc) - allowed
    if unknown:
        raise DataInvalidError(f"unknown keys in Weierstrass document: {sorted(unknown)}")
    if doc.get("version") != _SCHEMA_VERSION:
        raise DataInvalidError(f"unsupported document version {doc.get('version')!r}")
    try:
        g = {int(p): complex(re, im) for p, re, im in doc["g"]}
        h = {int(p): complex(re, im) for p, re, im in doc["h"]}
        return WeierstrassData(g, h, float(doc["r_inner"]), float(doc["r_outer"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataInvalidError(f"malformed Weierstrass document: {exc}") from exc


# ---------------------------------------------------------------------------
# validation: nonvanishing g, residue conditions, flux
# ---------------------------------------------------------------------------


def _winding_number(values: np.ndarray) -> int:
    phases = np.angle(values)
    increments = np.diff(np.concatenate([phases, phases[:1]]))
    increments = (increments + math.pi) % TWO_PI - math.pi
    return int(round(increments.sum() / TWO_PI))


def _circle(data: WeierstrassData, rho: float, n: int) -> np.ndarray:
    theta = np.linspace(0.0, TWO_PI, n, endpoint=False)
    return rho * np.exp(1j * theta)


def _loop_integral(values_times_dz: np.ndarray) -> complex:
    # trapezoid rule on a periodic integrand: the plain mean, times 2*pi
    return complex(values_times_dz.mean() * TWO_PI)


@dataclass
class DataValidation:
    winding: int
    min_modulus_g: float
    period_residuals: dict
    flux_vector: np.ndarray
    f3: float
    mu: float


def validate(
    data: WeierstrassData,
    *,
    n_scan: int = 4096,
    n_circles: int = 8,
    min_modulus: float = 1e-6,
    period_rtol: float = 1e-8,
) -> DataValidation:
    """Certify the data invariants; raises DataInvalidError on violation.

    Nonvanishing of g is certified by equal winding numbers on the inner and
    outer circles plus a minimum-modulus margin on a radial scan.  The residue
    conditions (real residue of h, vanishing z^-1 coefficients of g*h and h/g)
    are measured by spectrally accurate loop integrals and compared against
    ``period_rtol`` times the vertical flux.
    """
    rhos = np.geomspace(data.r_inner, data.r_outer, n_circles)
    min_mod = math.inf
    windings = []
    for rho in (data.r_inner, data.r_outer):
        gv = eval_g(data, _circle(data, rho, n_scan))
        windings.append(_winding_number(gv))
    for rho in rhos:
        gv = eval_g(data, _circle(data, rho, n_scan))
        min_mod = min(min_mod, float(np.abs(gv).min()))
    if windings[0] != windings[1]:
        raise DataInvalidError(
            f"g has zeros in the annulus: winding {windings[0]} inner vs {windings[1]} outer"
        )
    if min_mod < min_modulus:
        raise DataInvalidError(
            f"g modulus {min_mod:.3e} below margin {min_modulus:.3e} on scanned circles"
        )

    rho_mid = math.sqrt(data.r_inner * data.r_outer)
    z = _circle(data, rho_mid, n_scan)
    gv = eval_g(data, z)
    hv = eval_h(data, z)
    dz = 1j * z
    p_h = _loop_integral(hv * dz)
    p_gh = _loop_integral(gv * hv * dz)
    p_gih = _loop_integral(hv / gv * dz)
    f3 = p_h.imag
    if f3 <= 0.0:
        raise DataInvalidError(f"vertical flux must be positive, got {f3:.3e}")
    residuals = {
        "height_period": abs(p_h.real),
        "g_dh": abs(p_gh),
        "ginv_dh": abs(p_gih),
    }
    worst = max(residuals.values())
    if worst > period_rtol * f3:
        raise DataInvalidError(
            f"period residuals {residuals} exceed {period_rtol:.1e} * F3 = {period_rtol * f3:.3e}"
        )
    fl = np.array(
        [
            (0.5 * (p_gih - p_gh)).imag,
            (0.5j * (p_gih + p_gh)).imag,
            f3,
        ]
    )
    return DataValidation(windings[0], min_mod, residuals, fl, f3, f3 / TWO_PI)


def flux(data: WeierstrassData, *, n: int = 2048, radius: float | None = None) -> np.ndarray:
    """Flux vector of the core circle (homology invariant; any radius works)."""
    rho = radius if radius is not None else math.sqrt(data.r_inner * data.r_outer)
    z = _circle(data, rho, n)
    gv = eval_g(data, z)
    hv = eval_h(data, z)
    dz = 1j * z
    p_gh = _loop_integral(gv * hv * dz)
    p_gih = _loop_integral(hv / gv * dz)
    p_h = _loop_integral(hv * dz)
    fl = np.array(
        [(0.5 * (p_gih - p_gh)).imag, (0.5j * (p_gih + p_gh)).imag, p_h.imag]
    )
    if fl[2] <= 0.0:
        raise DataInvalidError(f"vertical flux must be positive, got {fl[2]:.3e}")
    return fl


def required_rotation(data: WeierstrassData, *, rtol: float = 1e-10):
    """Axis-angle rotation that would make the flux vertical (angle 0 if it is).

    The module requires vertical flux of its inputs rather than rotating them;
    this helper reports what an upstream producer would have to apply.
    """
    fl = flux(data)
    horizontal = math.hypot(fl[0], fl[1])
    norm = float(np.linalg.norm(fl))
    if horizontal <= rtol * norm:
        return np.array([0.0, 0.0, 1.0]), 0.0
    axis = np.cross(fl, [0.0, 0.0, 1.0])
    axis = axis / np.linalg.norm(axis)
    return axis, math.atan2(horizontal, fl[2])


# ---------------------------------------------------------------------------
# reference and randomized data
# ---------------------------------------------------------------------------


def catenoid_data(scale: float, r_inner: float, r_outer: float) -> WeierstrassData:
    """Data of the scale-``scale`` vertical catenoid: g = z, h = scale/z.

    The immersion covers heights scale*log(r) for r in (r_inner, r_outer),
    with the neck on |z| = 1.
    """
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    return WeierstrassData({1: 1.0}, {-1: scale}, r_inner, r_outer)


def _laurent_coeff_fft(values_on_circle: np.ndarray, rho: float, power: int) -> complex:
    """Laurent coefficient [f]_power from samples of f on the circle |z| = rho."""
    n = values_on_circle.size
    spectrum = np.fft.fft(values_on_circle) / n
    return complex(spectrum[power % n] * rho ** (-power))


def adjust_height_for_periods(
    g_coeffs: dict,
    h_coeffs: dict,
    flux_scale: float,
    r_inner: float,
    r_outer: float,
    *,
    n_fft: int = 4096,
) -> WeierstrassData:
    """Project the residue constraints to zero by adjusting the three
    lowest-order h coefficients (the constraints are linear in h for fixed g).

    Pins the residue of h to the real ``flux_scale`` and solves the 2x2 complex
    system for the h coefficients at powers -2 and 0 so that the z^-1
    coefficients of g*h and h/g vanish; all other drafted h coefficients are
    kept.  The Laurent coefficients of 1/g come from an FFT on a circle.
    """
    g = {int(p): complex(c) for p, c in g_coeffs.items()}
    h = {int(p): complex(c) for p, c in h_coeffs.items() if p not in (-2, -1, 0)}
    h[-1] = complex(flux_scale)

    theta = np.linspace(0.0, TWO_PI, n_fft, endpoint=False)
    z1 = np.exp(1j * theta)
    ginv = 1.0 / _eval_laurent(g, z1)
    powers_needed = {-1 - k for k in list(h) + [-2, 0]}
    q = {m: _laurent_coeff_fft(ginv, 1.0, m) for m in powers_needed}

    # [g*h]_{-1} = sum_p g_p h_{-1-p};  [h/g]_{-1} = sum_k q_{-1-k} h_k
    rhs_b = -sum(g[p] * h.get(-1 - p, 0.0) for p in g)
    rhs_c = -sum(q[-1 - k] * c for k, c in h.items())
    mat = np.array(
        [[g.get(1, 0.0), g.get(-1, 0.0)], [q.get(1, 0.0), q.get(-1, 0.0)]],
        dtype=complex,
    )
    rhs = np.array([rhs_b, rhs_c], dtype=complex)
    sol = np.linalg.solve(mat, rhs)
    h[-2], h[0] = complex(sol[0]), complex(sol[1])
    return WeierstrassData(g, h, r_inner, r_outer)


def random_annulus_data(
    rng: np.random.Generator,
    *,
    flux_scale: float = 1.0,
    r_inner: float = 1.0 / math.e,
    r_outer: float = math.e,
    perturbation: float = 0.04,
    max_tries: int = 50,
) -> WeierstrassData:
    """Randomized valid data near the catenoid: draw Laurent coefficients for
    g and the upper h coefficients, then project the residue constraints to
    zero through ``adjust_height_for_periods``."""
    for _ in range(max_tries):
        g = {1: 1.0 + 0.0j}
        for p in (-2, -1, 2, 3):
            amp = perturbation * 0.5 ** abs(p - 1)
            g[p] = amp * complex(rng.standard_normal(), rng.standard_normal())
        h = {}
        for p in (1, 2):
            amp = perturbation * flux_scale * 0.5 ** abs(p + 1)
            h[p] = amp * complex(rng.standard_normal(), rng.standard_normal())
        try:
            data = adjust_height_for_periods(g, h, flux_scale, r_inner, r_outer)
            validate(data)
        except (np.linalg.LinAlgError, DataInvalidError):
            continue
        return data
    raise DataInvalidError("failed to draw valid random annulus data")


def vertical_annulus_data(
    rng: np.random.Generator,
    *,
    flux_scale: float = 1.0,
    r_inner: float = 1.0 / math.e,
    r_outer: float = math.e,
    perturbation: float = 0.04,
    max_tries: int = 50,
) -> WeierstrassData:
    """Randomized data in vertical gauge: h = mu/z exactly, so the circle images
    are the horizontal level sets and heights equal mu * log|z|.

    Writing g = z*G with G near 1, the residue conditions reduce to
    [G]_{-1} = 0 (imposed by construction) and [1/G]_1 = 0, enforced by a
    Newton iteration on the z^1 coefficient of G.
    """
    n_fft = 4096
    theta = np.linspace(0.0, TWO_PI, n_fft, endpoint=False)
    z1 = np.exp(1j * theta)
    for _ in range(max_tries):
        G = {0: 1.0 + 0.0j, 1: 0.0j}
        for p in (-3, -2, 1, 2):
            amp = perturbation * 0.5 ** abs(p)
            G[p] = G.get(p, 0.0) + amp * complex(
                rng.standard_normal(), rng.standard_normal()
            )
        ok = False
        for _ in range(25):
            Gv = _eval_laurent(G, z1)
            target = _laurent_coeff_fft(1.0 / Gv, 1.0, 1)
            if abs(target) <= 1e-14:
                ok = True
                break
            # d[1/G]_1 / dG_1 = -[z/G^2]_1 = -[1/G^2]_0
            deriv = -_laurent_coeff_fft(1.0 / Gv**2, 1.0, 0)
            if deriv == 0:
                break
            G[1] = G[1] - target / deriv
        if not ok:
            continue
        g = {p + 1: c for p, c in G.items() if c != 0}
        data = WeierstrassData(g, {-1: complex(flux_scale)}, r_inner, r_outer)
        try:
            validate(data)
        except DataInvalidError:
            continue
        return data
    raise DataInvalidError("failed to draw valid vertical-gauge data")


def is_vertical_gauge(data: WeierstrassData, rtol: float = 1e-12) -> bool:
    """True when h = mu/z exactly (up to rtol), i.e. circles are level sets."""
    res = data.h_coeffs.get(-1, 0.0)
    if res == 0 or abs(res.imag) > rtol * abs(res):
        return False
    scale = abs(res)
    return all(
        abs(c) <= rtol * scale for p, c in data.h_coeffs.items() if p != -1
    )


# ---------------------------------------------------------------------------
# level-length profile and convexity
# ---------------------------------------------------------------------------


def _circle_lengths(data: WeierstrassData, ts: np.ndarray, n_theta: int) -> np.ndarray:
    """Lengths of the images of |z| = e^t for each t, by periodic trapezoid rule."""
    theta = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
    z = np.exp(ts[:, None] + 1j * theta[None, :])
    gv = _eval_laurent(data.g_coeffs, z)
    hv = _eval_laurent(data.h_coeffs, z)
    integrand = 0.5 * (np.abs(z * gv * hv) + np.abs(z * hv / gv))
    return integrand.mean(axis=1) * TWO_PI


def _circle_min_moduli(data: WeierstrassData, ts: np.ndarray, n_theta: int):
    theta = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
    z = np.exp(ts[:, None] + 1j * theta[None, :])
    gv = _eval_laurent(data.g_coeffs, z)
    hv = _eval_laurent(data.h_coeffs, z)
    a = np.abs(z * gv * hv)
    b = np.abs(z * hv / gv)
    return a.min(axis=1), b.min(axis=1), max(a.max(), b.max())


@dataclass
class LevelProfile:
    """Lengths of the circle images, in log-radius and geometric height gauges."""

    log_radii: np.ndarray
    heights: np.ndarray
    lengths: np.ndarray
    second_derivative: np.ndarray
    flux_vertical: float
    mu: float
    skipped: list = field(default_factory=list)

    def __post_init__(self):
        if np.any(self.lengths <= 0.0):
            raise DataInvalidError("level lengths must be positive")
        if np.any(np.diff(self.log_radii) <= 0.0):
            raise DataInvalidError("levels must be strictly increasing")
        # discrete convexity guard (the strong convexity makes these strongly positive)
        if self.lengths.size >= 3:
            d2 = self.lengths[:-2] - 2.0 * self.lengths[1:-1] + self.lengths[2:]
            if d2.min() < -1e-9 * self.lengths.max():
                raise DataInvalidError("level-length profile is not convex")


def level_profile(
    data: WeierstrassData,
    num_levels: int = 33,
    *,
    n_theta: int = 512,
    fd_step: float = 1e-3,
    quadrature_rtol: float = 1e-8,
    min_modulus_rel: float = 1e-9,
) -> LevelProfile:
    """Level-length profile L(t) with a dedicated 5-point stencil for L''(t).

    Levels where z*g*h or z*h/g comes within ``min_modulus_rel`` of vanishing
    are skipped and recorded (L'' is continuous across such circles but the
    integrand loses smoothness, so nothing is extrapolated through them).
    Quadrature is accepted only if doubling the node count moves no length by
    more than ``quadrature_rtol`` relatively.
    """
    if num_levels < 5:
        raise ValueError("need at least 5 levels")
    val = validate(data)
    t_lo, t_hi = math.log(data.r_inner), math.log(data.r_outer)
    ts = np.linspace(t_lo, t_hi, num_levels)

    min_a, min_b, scale = _circle_min_moduli(data, ts, n_theta)
    keep = (min_a > min_modulus_rel * scale) & (min_b > min_modulus_rel * scale)
    skipped = [int(i) for i in np.nonzero(~keep)[0]]
    ts_kept = ts[keep]
    if ts_kept.size < 5:
        raise DataInvalidError("too few usable levels after skipping near-zeros")

    lengths = _circle_lengths(data, ts_kept, n_theta)
    lengths_2n = _circle_lengths(data, ts_kept, 2 * n_theta)
    disagreement = np.abs(lengths - lengths_2n) / np.abs(lengths_2n)
    if disagreement.max() > quadrature_rtol:
        raise ResolutionError(
            "level-length quadrature did not converge",
            {"max_relative_disagreement": float(disagreement.max()), "n_theta": n_theta},
        )
    lengths = lengths_2n

    # dedicated 5-point central stencil for L''(t); only where it fits
    second = np.full(ts_kept.size, np.nan)
    fits = (ts_kept - 2 * fd_step >= t_lo) & (ts_kept + 2 * fd_step <= t_hi)
    idx = np.nonzero(fits)[0]
    if idx.size:
        offsets = np.array([-2.0, -1.0, 1.0, 2.0]) * fd_step
        stencil_ts = (ts_kept[idx][:, None] + offsets[None, :]).ravel()
        stencil_L = _circle_lengths(data, stencil_ts, n_theta).reshape(idx.size, 4)
        second[idx] = (
            -stencil_L[:, 0]
            + 16.0 * stencil_L[:, 1]
            - 30.0 * lengths[idx]
            + 16.0 * stencil_L[:, 2]
            - stencil_L[:, 3]
        ) / (12.0 * fd_step**2)

    mu = val.mu
    return LevelProfile(
        ts_kept, mu * ts_kept, lengths, second, val.f3, mu, skipped
    )


@dataclass
class ConvexityReport:
    min_slack: float
    min_slack_geometric: float
    max_abs_slack: float
    equality_flag: bool


def convexity_check(profile: LevelProfile, *, equality_rtol: float = 1e-6) -> ConvexityReport:
    """Slack of the level-length convexity bound, in both gauges.

    Log-radius gauge: L''(t) - L(t) >= 0.  Geometric gauge: the same statement
    transported by heights = mu * t, i.e. d^2/dh^2 H1 - (2*pi/F3)^2 H1, which is
    the log-gauge slack divided by mu^2.  The equality flag marks profiles that
    saturate the bound everywhere (planar or catenoidal data).
    """
    finite = np.isfinite(profile.second_derivative)
    if not finite.any():
        raise ValueError("profile has no interior levels with a second derivative")
    slack = profile.second_derivative[finite] - profile.lengths[finite]
    min_slack = float(slack.min())
    max_abs = float(np.abs(slack).max())
    return ConvexityReport(
        min_slack,
        min_slack / profile.mu**2,
        max_abs,
        bool(max_abs <= equality_rtol * profile.lengths.max()),
    )


@dataclass
class CircleMeanReport:
    lhs: float
    rhs: float
    slack: float


def cpx_inequality_check(
    F_coeffs: dict, rho: float, *, n: int = 2048, min_modulus_rel: float = 1e-6
) -> CircleMeanReport:
    """Circle-mean inequality for a holomorphic Laurent polynomial F with zero
    constant term and no zeros on |z| = rho:

        Int rho^2 |F'|^2/|F| |dz/z|  >=  Int |F| |dz/z|,

    with equality exactly for F = a*z and F = a/z.  (|F'|^2/|F| is the
    Laplacian of |F| for holomorphic nonvanishing F.)
    """
    coeffs = {int(p): complex(c) for p, c in F_coeffs.items()}
    scale = max(abs(c) for c in coeffs.values())
    if abs(coeffs.get(0, 0.0)) > 1e-15 * scale:
        raise ValueError("constant Laurent coefficient of F must vanish")
    theta = np.linspace(0.0, TWO_PI, n, endpoint=False)
    z = rho * np.exp(1j * theta)
    Fv = _eval_laurent(coeffs, z)
    if np.abs(Fv).min() < min_modulus_rel * np.abs(Fv).max():
        raise ValueError("F vanishes (or nearly) on the circle")
    Fpv = _eval_laurent(_derivative_coeffs(coeffs), z)
    lhs = float((rho**2 * np.abs(Fpv) ** 2 / np.abs(Fv)).mean() * TWO_PI)
    rhs = float(np.abs(Fv).mean() * TWO_PI)
    return CircleMeanReport(lhs, rhs, lhs - rhs)


# ---------------------------------------------------------------------------
# immersion
# ---------------------------------------------------------------------------


def _phi(data: WeierstrassData, z: np.ndarray) -> np.ndarray:
    """Weierstrass integrand (phi1, phi2, phi3) stacked on the last axis."""
    gv = _eval_laurent(data.g_coeffs, z)
    hv = _eval_laurent(data.h_coeffs, z)
    ginv = 1.0 / gv
    return np.stack(
        [0.5 * (ginv - gv) * hv, 0.5j * (ginv + gv) * hv, hv + 0.0j], axis=-1
    )


def _angular_cumulative(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Spectral cumulative integral over theta of periodic samples.

    ``f`` has shape (..., N); returns (I, period) with I[..., k] the integral
    from theta=0 to theta_k and ``period`` the full loop integral.
    """
    n = f.shape[-1]
    C = np.fft.fft(f, axis=-1) / n
    m = np.fft.fftfreq(n, d=1.0 / n)  # integer mode numbers
    D = np.zeros_like(C)
    nonzero = m != 0
    D[..., nonzero] = C[..., nonzero] / (1j * m[nonzero])
    G = np.fft.ifft(D * n, axis=-1)
    theta = np.linspace(0.0, TWO_PI, n, endpoint=False)
    c0 = C[..., 0]
    I = c0[..., None] * theta + G - G[..., :1]
    return I, c0 * TWO_PI


def _radial_cumulative(data: WeierstrassData, ts: np.ndarray, phase: complex = 1.0 + 0.0j):
    """Cumulative integral of the Weierstrass integrand along the ray arg z = arg(phase)."""
    nodes, weights = np.polynomial.legendre.leggauss(12)
    out = np.zeros((ts.size, 3), dtype=complex)
    for j in range(1, ts.size):
        a, b = ts[j - 1], ts[j]
        tau = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        w = 0.5 * (b - a) * weights
        zq = np.exp(tau) * phase
        vals = _phi(data, zq) * zq[:, None]  # dz = z dtau along the ray
        out[j] = out[j - 1] + (w[:, None] * vals).sum(axis=0)
    return out


@dataclass
class SampledAnnulus:
    """Immersed (modulus x angle) grid with per-node first/second order data.

    ``metric_factor`` is the conformal factor with respect to the flat
    (t, theta) cylinder coordinates (t = log|z|); ``second_form`` is the second
    fundamental form in the (d/dt, d/dtheta) frame.
    """

    grid: np.ndarray
    metric_factor: np.ndarray
    normal: np.ndarray
    second_form: np.ndarray
    flux_vertical: float
    modulus_mu: float
    log_radii: np.ndarray
    thetas: np.ndarray
    data: WeierstrassData = field(repr=False, default=None)

    def __post_init__(self):
        if np.any(self.metric_factor <= 0.0):
            raise DataInvalidError("metric factor must be positive (immersion)")
        norms = np.linalg.norm(self.normal, axis=-1)
        if np.abs(norms - 1.0).max() > 1e-10:
            raise DataInvalidError("normals are not unit length")


def immerse(
    data: WeierstrassData,
    grid_spec: tuple[int, int] = (64, 256),
    *,
    verify: bool = True,
    center: bool = True,
    path_rtol: float = 1e-7,
    min_metric_rel: float = 1e-9,
    period_rtol: float = 1e-8,
) -> SampledAnnulus:
    """Immerse the annulus on an (M modulus levels x N angular nodes) grid.

    Integration runs from a basepoint on the inner circle: radially along the
    positive real ray, then angularly around each circle (spectral cumulative
    integral).  With ``verify`` the loop-closure defect of every circle and a
    radial-then-angular vs angular-then-radial comparison along the opposite
    meridian must stay below ``path_rtol`` relative to the immersion size.

    Centered output translates the image so the angular mean of (x1, x2) is
    zero and the angular mean of x3 matches mu * t on the middle circle.
    """
    M, N = grid_spec
    if M < 4 or N < 16 or N % 2:
        raise ValueError("grid_spec needs M >= 4 and even N >= 16")
    val = validate(data, period_rtol=period_rtol)
    ts = np.linspace(math.log(data.r_inner), math.log(data.r_outer), M)
    thetas = np.linspace(0.0, TWO_PI, N, endpoint=False)
    z = np.exp(ts[:, None] + 1j * thetas[None, :])

    W = _phi(data, z)
    f_ang = W * (1j * z)[..., None]  # integrand for d theta
    I_ang, periods = _angular_cumulative(np.moveaxis(f_ang, -1, 0).reshape(3 * M, N))
    I_ang = np.moveaxis(I_ang.reshape(3, M, N), 0, -1)
    periods = periods.reshape(3, M)

    R = _radial_cumulative(data, ts)
    F = (R[:, None, :] + I_ang).real

    gv = _eval_laurent(data.g_coeffs, z)
    hv = _eval_laurent(data.h_coeffs, z)
    metric = 0.5 * (np.abs(gv) + 1.0 / np.abs(gv)) * np.abs(hv) * np.abs(z)
    if metric.min() < min_metric_rel * np.median(metric):
        raise DataInvalidError(
            f"branch point: metric factor {metric.min():.3e} vanishes on the grid"
        )

    absg2 = np.abs(gv) ** 2
    normal = np.stack(
        [2.0 * gv.real, 2.0 * gv.imag, absg2 - 1.0], axis=-1
    ) / (absg2 + 1.0)[..., None]

    gpv = _eval_laurent(_derivative_coeffs(data.g_coeffs), z)
    q = gpv / gv * hv * z**2  # Hopf-type quadratic coefficient in w = log z
    second_form = np.empty(z.shape + (2, 2))
    second_form[..., 0, 0] = q.real
    second_form[..., 1, 1] = -q.real
    second_form[..., 0, 1] = -q.imag
    second_form[..., 1, 0] = -q.imag

    size = max(1.0, float(np.ptp(F.reshape(-1, 3), axis=0).max()))
    if verify:
        closure = np.abs(periods.real).max()
        if closure > path_rtol * size:
            raise DataInvalidError(
                f"loop-closure defect {closure:.3e} exceeds {path_rtol:.1e} * size"
            )
        # opposite-meridian cross check (theta index N//2 is pi)
        k_pi = N // 2
        R_pi = _radial_cumulative(data, ts, phase=complex(math.cos(math.pi), math.sin(math.pi)))
        alt = (R[0][None, :] + I_ang[0, k_pi][None, :] + (R_pi - R_pi[0][None, :])).real
        defect = np.abs(alt - F[:, k_pi, :]).max()
        if defect > path_rtol * size:
            raise DataInvalidError(
                f"path-independence defect {defect:.3e} exceeds {path_rtol:.1e} * size"
            )

    if center:
        j_mid = M // 2
        F[..., 0] -= F[:, :, 0][j_mid].mean()
        F[..., 1] -= F[:, :, 1][j_mid].mean()
        F[..., 2] -= F[j_mid, :, 2].mean() - val.mu * ts[j_mid]

    return SampledAnnulus(
        F, metric, normal, second_form, val.f3, val.mu, ts, thetas, data
    )


def measured_modulus(annulus: SampledAnnulus) -> float:
    """Conformal circumference scale measured from the immersion itself: the
    rate of the angular mean of x3 against log-radius (equals F3/2pi)."""
    mean_height = annulus.grid[..., 2].mean(axis=1)
    slope = np.polyfit(annulus.log_radii, mean_height, 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# level-curve decomposition and area comparison
# ---------------------------------------------------------------------------


def _require_vertical_gauge(data: WeierstrassData, op: str):
    if not is_vertical_gauge(data):
        raise ValueError(
            f"{op} needs vertical-gauge data (h = mu/z exactly), where circle "
            "images are the horizontal level sets"
        )


@dataclass
class DecompositionReport:
    fd_value: float
    formula_value: float
    beta_term: float
    level_height: float


def second_derivative_decomposition(
    annulus: SampledAnnulus, level_index: int, *, fd_step: float = 1e-3
) -> DecompositionReport:
    """Geometric decomposition of d^2/dh^2 of level-set length at one level.

    fd_value is a 5-point central difference of the level length in geometric
    height; formula_value integrates, along the level curve,

        |grad_curve (1/|grad x3|)|^2 + (kappa^2 + beta^2) / |grad x3|^2,

    where kappa is the space-curve curvature of the level and beta is the
    second fundamental form paired between the level's conormal and tangent
    (beta vanishes identically on a vertical catenoid).  The two agree as an
    identity on minimal annuli; beta_term reports the beta contribution alone.
    """
    data = annulus.data
    if data is None:
        raise ValueError("annulus carries no source data")
    _require_vertical_gauge(data, "second_derivative_decomposition")
    M, N = annulus.metric_factor.shape
    if N < 64:
        raise ResolutionError("angular resolution too coarse", {"n_theta": N})
    if not 0 < level_index < M - 1:
        raise ValueError("level must be interior")
    t = float(annulus.log_radii[level_index])
    t_lo, t_hi = math.log(data.r_inner), math.log(data.r_outer)
    if t - 2 * fd_step < t_lo or t + 2 * fd_step > t_hi:
        raise ResolutionError(
            "level too close to the annulus edge for the stencil", {"t": t}
        )
    mu = annulus.modulus_mu

    stencil_ts = t + fd_step * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    L = _circle_lengths(data, stencil_ts, N)
    d2_dt2 = (-L[0] + 16.0 * L[1] - 30.0 * L[2] + 16.0 * L[3] - L[4]) / (
        12.0 * fd_step**2
    )
    fd_value = d2_dt2 / mu**2  # heights are mu * t in vertical gauge

    theta = annulus.thetas
    z = np.exp(t) * np.exp(1j * theta)
    W = _phi(data, z)
    c_prime = (W * (1j * z)[:, None]).real  # d/dtheta of the immersed curve
    modes = np.fft.fftfreq(N, d=1.0 / N)
    c_second = np.fft.ifft(
        np.fft.fft(c_prime, axis=0) * (1j * modes)[:, None], axis=0
    ).real

    speed = np.linalg.norm(c_prime, axis=1)  # equals the conformal factor
    cross = np.cross(c_prime, c_second)
    kappa = np.linalg.norm(cross, axis=1) / speed**3

    lam = annulus.metric_factor[level_index]
    inv_grad = lam / mu  # 1/|grad x3| on the level
    d_invgrad = np.fft.ifft(np.fft.fft(inv_grad) * (1j * modes)).real / lam

    gv = _eval_laurent(data.g_coeffs, z)
    gpv = _eval_laurent(_derivative_coeffs(data.g_coeffs), z)
    hv = _eval_laurent(data.h_coeffs, z)
    q = gpv / gv * hv * z**2
    beta = -q.imag / lam**2

    ds = lam * (TWO_PI / N)
    formula = float(((d_invgrad**2 + (kappa**2 + beta**2) * inv_grad**2) * ds).sum())
    beta_term = float(((beta**2) * inv_grad**2 * ds).sum())
    return DecompositionReport(float(fd_value), formula, beta_term, mu * t)


@dataclass
class AreaReport:
    area_sigma: float
    area_catenoid: float
    gap: float
    neck_height: float
    level_gap_min: float


def area_comparison(
    data: WeierstrassData,
    slab: Slab,
    *,
    n_height: int = 96,
    n_theta: int = 512,
    num_levels: int = 65,
) -> AreaReport:
    """Area of the annulus over a slab against the flux-matched catenoid.

    Heights are the conformal-gauge heights mu * log|z| (exactly the ambient
    heights for vertical-gauge and catenoid data).  The comparison catenoid has
    scale mu = F3/(2*pi) and neck at the height minimizing the level-length
    profile; its clipped area comes from the closed form in ``geometry``.
    Also reports the worst per-level length gap against the catenoid profile.
    """
    val = validate(data)
    mu = val.mu
    t_lo, t_hi = math.log(data.r_inner), math.log(data.r_outer)
    if mu * t_lo > slab.h_minus + 1e-12 or mu * t_hi < slab.h_plus - 1e-12:
        raise ValueError(
            f"annulus spans heights [{mu * t_lo:.6g}, {mu * t_hi:.6g}], "
            f"not the slab [{slab.h_minus}, {slab.h_plus}]"
        )
    ta, tb = slab.h_minus / mu, slab.h_plus / mu

    nodes, weights = np.polynomial.legendre.leggauss(n_height)
    tq = 0.5 * (tb - ta) * nodes + 0.5 * (ta + tb)
    wq = 0.5 * (tb - ta) * weights
    theta = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
    z = np.exp(tq[:, None] + 1j * theta[None, :])
    gv = _eval_laurent(data.g_coeffs, z)
    hv = _eval_laurent(data.h_coeffs, z)
    lam_w = 0.5 * (np.abs(gv) + 1.0 / np.abs(gv)) * np.abs(hv) * np.abs(z)
    area_sigma = float((wq * (lam_w**2).mean(axis=1) * TWO_PI).sum())

    # neck height: minimize the level length over the clipped range
    from scipy.optimize import minimize_scalar

    length_at = lambda t: float(_circle_lengths(data, np.array([t]), n_theta)[0])
    res = minimize_scalar(
        length_at, bounds=(ta, tb), method="bounded", options={"xatol": 1e-10}
    )
    t0 = float(np.clip(res.x, ta, tb))
    for t_end in (ta, tb):  # guard against an interior plateau hiding an end minimum
        if length_at(t_end) < length_at(t0):
            t0 = t_end
    delta = 1e-3
    if ta + 2 * delta < t0 < tb - 2 * delta:
        # Newton polish on L'(t) = 0 with 5-point stencils
        for _ in range(8):
            stencil = _circle_lengths(
                data, t0 + delta * np.array([-2.0, -1.0, 0.0, 1.0, 2.0]), n_theta
            )
            d1 = (stencil[0] - 8 * stencil[1] + 8 * stencil[3] - stencil[4]) / (
                12 * delta
            )
            d2 = (
                -stencil[0] + 16 * stencil[1] - 30 * stencil[2] + 16 * stencil[3] - stencil[4]
            ) / (12 * delta**2)
            if d2 <= 0.0:
                break
            step = d1 / d2
            t0 = float(np.clip(t0 - step, ta, tb))
            if abs(step) < 1e-13:
                break
    h0 = mu * t0
    area_cat = geometry.area_in_slab(CatenoidPiece(mu, h0, slab))

    levels = np.linspace(ta, tb, num_levels)
    L_sigma = _circle_lengths(data, levels, n_theta)
    L_cat = TWO_PI * mu * np.cosh(levels - t0)
    level_gap_min = float((L_sigma - L_cat).min())

    return AreaReport(area_sigma, area_cat, area_sigma - area_cat, h0, level_gap_min)

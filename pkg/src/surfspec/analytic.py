"""Closed-form reference values: model spectra, limit spectra, collars and test maps."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special


def interval_z2_dirichlet(h: float, count: int) -> np.ndarray:
    """Dirichlet eigenvalues of [0, 2h] whose modes are even under t -> 2h - t.

    Only sin(n pi t / 2h) with n odd survive, giving ((2m+1) pi / 2h)^2.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    m = np.arange(int(count))
    return ((2 * m + 1) * np.pi / (2 * h)) ** 2


def interval_dirichlet(h: float, count: int) -> np.ndarray:
    """Full Dirichlet spectrum (n pi / 2h)^2, n >= 1, of [0, 2h]."""
    if not h > 0:
        raise ValueError("h must be positive")
    n = np.arange(1, int(count) + 1)
    return (n * np.pi / (2 * h)) ** 2


@dataclass(frozen=True)
class ModelModes:
    dirichlet: float
    neumann: float
    valid: bool


def model_mode_values(kind: str, epsilon: float, h: float) -> ModelModes:
    """Lowest Dirichlet and first nonzero Neumann eigenvalue of a flat model piece.

    ``valid`` says whether the circle S^1(epsilon), with lambda_1 = 1/epsilon^2,
    sits above both, in which case the axial modes are the lowest ones.
    """
    if not (epsilon > 0 and h > 0):
        raise ValueError("epsilon and h must be positive")
    if kind == "cross_cap":
        lam0, mu1 = np.pi**2 / (4 * h**2), np.pi**2 / h**2
    elif kind == "cylinder":
        lam0 = mu1 = np.pi**2 / h**2
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return ModelModes(lam0, mu1, bool(1 / epsilon**2 > max(lam0, mu1)))


@dataclass(frozen=True)
class LimitSpectrum:
    base: np.ndarray
    h: float
    merged: np.ndarray
    source: np.ndarray  # 0 where merged[i] came from base, 1 from the interval


def merge_limit_spectrum(base, h: float, count: int) -> LimitSpectrum:
    """Sorted union of a surface spectrum and the even interval spectrum, first ``count`` values.

    Ties keep base values first.
    """
    b = np.asarray(base, dtype=float)
    if np.any(np.diff(b) < 0):
        raise ValueError("base spectrum must be ascending")
    iv = interval_z2_dirichlet(h, count)
    vals = np.concatenate([b, iv])
    src = np.concatenate([np.zeros(len(b), dtype=np.int64), np.ones(len(iv), dtype=np.int64)])
    order = np.lexsort((src, vals))[:count]
    return LimitSpectrum(b, float(h), vals[order], src[order])


def crossing_height(lam1: float) -> float:
    """Height at which pi^2 / (4 h^2) equals lam1."""
    return float(np.pi / (2 * np.sqrt(lam1)))


def collar_width(kind: str, l: float) -> float:
    """Half-width of the standard collar around a closed geodesic of length l."""
    if not l > 0:
        raise ValueError("geodesic length must be positive")
    if kind == "two_sided":
        return float(np.pi / l * (np.pi - 2 * np.arctan(np.sinh(l / 2))))
    if kind == "one_sided":
        return float(np.pi / (2 * l) * (np.pi - 2 * np.arctan(np.sinh(l))))
    raise ValueError(f"unknown collar kind {kind!r}")


def collar_conformal_factor(kind: str, l: float, t) -> np.ndarray:
    """Conformal factor of the hyperbolic collar in flat cylinder coordinates (t, theta)."""
    w = collar_width(kind, l)
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) >= w):
        raise ValueError(f"|t| must be below the collar width {w:.6g}")
    ll = l if kind == "two_sided" else 2 * l
    return (ll / (2 * np.pi * np.cos(ll * t / (2 * np.pi)))) ** 2


def sphere_map(t, theta) -> np.ndarray:
    """Conformal map from the cylinder R x S^1 onto the punctured unit sphere."""
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    # divide through by e^{2t} for large t to stay finite
    s = 1.0 / np.cosh(t)
    return np.stack([s * np.cos(theta), s * np.sin(theta), np.tanh(t)], axis=-1)


def _sphere_map_derivatives(t, theta):
    s = 1.0 / np.cosh(t)
    th = np.tanh(t)
    dt = np.stack([-s * th * np.cos(theta), -s * th * np.sin(theta), s * s], axis=-1)
    dth = np.stack([-s * np.sin(theta), s * np.cos(theta), np.zeros_like(t)], axis=-1)
    return dt, dth


def veronese(p) -> np.ndarray:
    """Veronese map of the unit sphere into the unit sphere S^4 (scaled by sqrt 3)."""
    p = np.asarray(p, dtype=float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    r3 = np.sqrt(3.0)
    v = np.stack([x * y, x * z, y * z, (x * x - y * y) / 2, (x * x + y * y - 2 * z * z) / (2 * r3)], axis=-1)
    return r3 * v


def _veronese_jacobian(p):
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    r3 = np.sqrt(3.0)
    zero = np.zeros_like(x)
    dx = np.stack([y, z, zero, x, x / r3], axis=-1)
    dy = np.stack([x, zero, z, -y, y / r3], axis=-1)
    dz = np.stack([zero, x, y, zero, -2 * z / r3], axis=-1)
    return r3 * np.stack([dx, dy, dz], axis=-1)  # (..., 5, 3)


def veronese_energy(resolution: int = 64, t_max: float = 8.0) -> float:
    """Dirichlet energy of the Veronese composite on the truncated Moebius band.

    The band is the cylinder |t| <= t_max modulo (t, theta) ~ (-t, theta + pi);
    its fundamental domain is t in [0, t_max]. Gauss-Legendre in t, trapezoid
    (exact for trigonometric polynomials) in theta.
    """
    n = int(resolution)
    xg, wg = np.polynomial.legendre.leggauss(n)
    t = 0.5 * t_max * (xg + 1)
    wt = 0.5 * t_max * wg
    theta = 2 * np.pi * np.arange(n) / n
    T, TH = np.meshgrid(t, theta, indexing="ij")
    p = sphere_map(T, TH)
    J = _veronese_jacobian(p)
    dt, dth = _sphere_map_derivatives(T, TH)
    gt = np.einsum("...ij,...j->...i", J, dt)
    gth = np.einsum("...ij,...j->...i", J, dth)
    dens = np.sum(gt**2, axis=-1) + np.sum(gth**2, axis=-1)
    return float(np.sum(wt[:, None] * dens) * (2 * np.pi / n))


def veronese_energy_closed_form(t_max: float) -> float:
    """12 pi tanh(t_max): the composite is conformal, so energy is twice the covered area."""
    return float(12 * np.pi * np.tanh(t_max))


def elliptic_e(k: float) -> float:
    """Complete elliptic integral of the second kind in the modulus convention."""
    return float(special.ellipe(k * k))


def elliptic_e_quadrature(k: float) -> float:
    val, _ = integrate.quad(lambda th: np.sqrt(1 - (k * np.sin(th)) ** 2), 0, np.pi / 2, epsabs=0.0, epsrel=1e-13, limit=200)
    return float(val)


def klein_maximizer_value() -> float:
    """12 pi E(2 sqrt 2 / 3), cross-checked between two independent evaluations."""
    k = 2 * np.sqrt(2) / 3
    a = elliptic_e_quadrature(k)
    b = elliptic_e(k)
    if abs(a - b) > 1e-12 * abs(b):
        raise ArithmeticError(f"elliptic integral evaluations disagree: {a!r} vs {b!r}")
    return float(12 * np.pi * a)


KNOWN_CONSTANTS = {
    "sphere": {"value": 8 * np.pi, "expression": "8*pi", "citation": "Hersch (1970)"},
    "projective_plane": {"value": 12 * np.pi, "expression": "12*pi", "citation": "Li and Yau (1982)"},
    "torus": {"value": 8 * np.pi**2 / np.sqrt(3), "expression": "8*pi^2/sqrt(3)", "citation": "Nadirashvili (1996)"},
    "klein_bottle": {"value": None, "expression": "12*pi*E(2*sqrt(2)/3), modulus convention",
                     "citation": "Jakobson, Nadirashvili and Polterovich (2006); El Soufi, Giacomini and Jazar (2006)"},
}


def known_constants() -> dict:
    out = {k: dict(v) for k, v in KNOWN_CONSTANTS.items()}
    out["klein_bottle"]["value"] = klein_maximizer_value()
    return out


def known_constants_json() -> str:
    return json.dumps(known_constants(), indent=1, sort_keys=True)


def torus_lambda1_area(basis) -> float:
    """lambda_1 * area of a flat torus from the shortest dual lattice vector."""
    B = np.asarray(basis, dtype=float)
    dual = np.linalg.inv(B).T
    best = np.inf
    for i in range(-3, 4):
        for j in range(-3, 4):
            if i or j:
                best = min(best, float(np.sum((i * dual[0] + j * dual[1]) ** 2)))
    return 4 * np.pi**2 * best * abs(np.linalg.det(B))

r"""Scattering Green tensor above a planar mirror at imaginary frequency.

The tensor is the plane-wave expansion

.. math::
    G^{(1)}(r, r', i\xi) = \frac{1}{8\pi^2}\int\frac{d^2q}{\beta}
    e^{iq\cdot(r-r') - \beta(z+z')}
    \left(r_s e_s e_s + r_p e_p^+ e_p^- + r_{sp} e_p^+ e_s + r_{ps} e_s e_p^-\right)

with :math:`\beta = \sqrt{\xi^2/c^2 + q^2}`, :math:`e_s = e_q \times e_z` and
:math:`e_p^\pm = -(c/\xi)(i q e_z \pm \beta e_q)`. Two evaluation routes are
provided: a brute-force polar double integral valid for any pair of points,
and a one-dimensional radial integral for coincident points where the
azimuthal average is done analytically. Curls are taken in the mode basis:

* left curl (acting on r):   e_s^+ -> (xi/c) e_p^+,  e_p^+ -> -(xi/c) e_s^+
* right curl (acting on r'): e_s^- -> (xi/c) e_p^-,  e_p^- -> -(xi/c) e_s^-

Scaling: every entry of G is ``(1/z) g(xi z / c)`` (and the curls
``(1/z^2) h(xi z / c)``), so ``G(lam z, xi / lam) = G(z, xi) / lam``.
"""
from __future__ import annotations

import numpy as np

from .layer import CoefficientSet
from .quadrature import integrate_2d_polar, integrate_exp_semiinfinite
from .units import C

# dyad index pairs (outgoing side, incoming side)
_PAIRS = ("ss", "pp", "ps", "sp")


class GreenDomainError(ValueError):
    pass


def _weights(coeffs: CoefficientSet) -> dict:
    return {"ss": coeffs.r_s, "pp": coeffs.r_p, "ps": coeffs.r_sp, "sp": coeffs.r_ps}


def _curl_weights(w: dict, side: str) -> dict:
    """Coefficient map after applying a curl (factor xi/c omitted)."""
    out = dict.fromkeys(_PAIRS, 0.0)
    for pair, val in w.items():
        a, b = pair
        if side == "left":
            a, sign = ("p", 1.0) if a == "s" else ("s", -1.0)
        else:
            b, sign = ("p", 1.0) if b == "s" else ("s", -1.0)
        out[a + b] += sign * val
    return out


def mode_vectors(beta, phi, xi):
    """Unit vectors ``e_q``, ``e_s``, ``e_p^+``, ``e_p^-`` on a (beta, phi) grid.

    Returned arrays have shape ``broadcast(beta, phi).shape + (3,)``.
    """
    beta, phi = np.broadcast_arrays(np.asarray(beta, float), np.asarray(phi, float))
    b = xi / C
    q = np.sqrt(np.maximum(beta**2 - b**2, 0.0))
    cos, sin = np.cos(phi), np.sin(phi)
    zero = np.zeros_like(cos)
    e_q = np.stack([cos, sin, zero], axis=-1)
    e_s = np.stack([sin, -cos, zero], axis=-1)
    e_z = np.array([0.0, 0.0, 1.0])
    k = C / xi
    e_pp = -k * (1j * q[..., None] * e_z + beta[..., None] * e_q)
    e_pm = -k * (1j * q[..., None] * e_z - beta[..., None] * e_q)
    return e_q, e_s, e_pp, e_pm, q


def _check_points(r, r2, xi):
    r = np.asarray(r, dtype=float).reshape(3)
    r2 = np.asarray(r2, dtype=float).reshape(3)
    if r[2] <= 0 or r2[2] <= 0:
        raise GreenDomainError("both points must lie above the layer (z > 0)")
    if not xi > 0:
        raise GreenDomainError("imaginary frequency xi must be positive")
    return r, r2


def _green_2d(r, r2, xi, weights, prefactor, rel_tol, n_phi):
    b = xi / C
    z_sum = r[2] + r2[2]
    drho = (r - r2)[:2]

    def f(beta, phi):
        _, e_s, e_pp, e_pm, q = mode_vectors(beta, phi, xi)
        phase = np.exp(1j * q * (np.cos(phi) * drho[0] + np.sin(phi) * drho[1]))
        vec = {"s+": e_s.astype(complex), "s-": e_s.astype(complex), "p+": e_pp, "p-": e_pm}
        out = 0.0
        for pair, w in weights.items():
            if w == 0:
                continue
            out = out + w * np.einsum("...j,...l->...jl", vec[pair[0] + "+"], vec[pair[1] + "-"])
        if np.isscalar(out):
            out = np.zeros(phase.shape + (3, 3), complex)
        return out * phase[..., None, None]

    res = integrate_2d_polar(f, b, z_sum, rel_tol=rel_tol, n_phi=n_phi)
    return prefactor * np.exp(-b * z_sum) / (8 * np.pi**2) * res.value


def green_scattering(r, r2, xi: float, coeffs: CoefficientSet,
                     rel_tol: float = 1e-12, n_phi: int = 64,
                     complex_out: bool = False) -> np.ndarray:
    """Scattering Green tensor G(r, r', i xi) in 1/m by polar double integration.

    The result is real on the imaginary frequency axis; ``complex_out`` returns
    the raw complex quadrature (imaginary part at roundoff level).
    """
    r, r2 = _check_points(r, r2, xi)
    g = _green_2d(r, r2, xi, _weights(coeffs), 1.0, rel_tol, n_phi)
    return g if complex_out else g.real


def curl_green(side: str, r, r2, xi: float, coeffs: CoefficientSet,
               rel_tol: float = 1e-12, n_phi: int = 64,
               complex_out: bool = False) -> np.ndarray:
    """``curl x G`` (side="left", derivative on r) or ``G x curl'``
    (side="right", derivative on r'), in 1/m^2.

    Component conventions: ``(curl x G)_jl = eps_jmn d_m G_nl`` and
    ``(G x curl')_jl = eps_lmn G_jm d'_n``.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    r, r2 = _check_points(r, r2, xi)
    w = _curl_weights(_weights(coeffs), side)
    g = _green_2d(r, r2, xi, w, xi / C, rel_tol, n_phi)
    return g if complex_out else g.real


def onsager_defect(r, r2, xi: float, coeffs: CoefficientSet, rel_tol: float = 1e-12) -> np.ndarray:
    """``G(r, r') - G(r', r)^T``; zero for a reciprocal mirror."""
    return green_scattering(r, r2, xi, coeffs, rel_tol) - green_scattering(r2, r, xi, coeffs, rel_tol).T


# --------------------------------------------------------------------------
# coincident points, one-dimensional radial route

_T = np.diag([1.0, 1.0, 0.0])
_Z = np.diag([0.0, 0.0, 1.0])
_D = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


def radial_moments(z: float, xi, rel_tol: float = 1e-13) -> np.ndarray:
    r"""Scaled radial integrals for coincident points.

    Returns an array ``(n, 4)`` holding, for each ``xi``,
    :math:`e^{2bz}\int_b^\infty d\beta\, e^{-2\beta z}\, w(\beta)` for the
    weights ``1, beta, beta^2, beta^2 - b^2`` (``b = xi / c``), by quadrature
    in ``u = 2 z (beta - b)``.
    """
    b = np.atleast_1d(np.asarray(xi, dtype=float)) / C

    def f(u):
        s = u[:, None] / (2 * z)
        beta = b[None, :] + s
        return np.stack([np.ones_like(beta), beta, beta**2, s * (2 * b[None, :] + s)], axis=-1)

    res = integrate_exp_semiinfinite(f, rel_tol=rel_tol, abs_floor=0.0)
    return res.value / (2 * z)


def radial_moments_exact(z: float, xi) -> np.ndarray:
    """Closed-form counterpart of ``radial_moments`` (for checks)."""
    b = np.atleast_1d(np.asarray(xi, dtype=float)) / C
    s = 2 * z
    m0 = 1 / s + 0 * b
    m1 = b / s + 1 / s**2
    m2 = b**2 / s + 2 * b / s**2 + 2 / s**3
    mq = 2 * b / s**2 + 2 / s**3
    return np.stack([m0, m1, m2, mq], axis=-1)


def coincident_kernels(z: float, xi, coeffs: CoefficientSet, rel_tol: float = 1e-13,
                       moments: np.ndarray | None = None):
    """``(G, curl x G, G x curl')`` at ``r = r' = (0, 0, z)``, each multiplied by
    ``exp(2 xi z / c)``; arrays of shape ``(n, 3, 3)`` for ``n`` values of xi."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if moments is None:
        moments = radial_moments(z, xi, rel_tol)
    m0, m1, m2, mq = (moments[:, i][:, None, None] for i in range(4))
    k = (C / xi)[:, None, None]
    pref = 1 / (4 * np.pi)
    rs, rp, rsp, rps = coeffs.r_s, coeffs.r_p, coeffs.r_sp, coeffs.r_ps

    G = pref * (
        (0.5 * rs * m0 - 0.5 * k**2 * rp * m2) * _T
        - k**2 * rp * mq * _Z
        + 0.5 * k * (rsp + rps) * m1 * _D
    )

    def curl(cross_t, cross_p):
        return pref / k * (
            0.5 * k * (rs - rp) * m1 * _D
            - 0.5 * cross_t * m0 * _T
            - cross_p * k**2 * (mq * _Z + 0.5 * m2 * _T)
        )

    return G, curl(rsp, rps), curl(rps, rsp)


def _check_coincident(z, xi):
    if not z > 0:
        raise GreenDomainError("z must be positive")
    if not xi > 0:
        raise GreenDomainError("xi must be positive")


def green_coincident(z: float, xi: float, coeffs: CoefficientSet, rel_tol: float = 1e-13) -> np.ndarray:
    """G(r_A, r_A, i xi) for r_A = (0, 0, z) via the radial integral, in 1/m.

    Structure: ``diag(G_t, G_t, G_zz) + G_a (x y - y x)`` with G_a
    proportional to ``r_sp + r_ps``.
    """
    _check_coincident(z, xi)
    G, _, _ = coincident_kernels(z, xi, coeffs, rel_tol)
    return G[0] * np.exp(-2 * xi * z / C)


def coincident_curls(z: float, xi: float, coeffs: CoefficientSet, rel_tol: float = 1e-13):
    """Left and right curls of G at coincident points (radial route)."""
    _check_coincident(z, xi)
    _, L, R = coincident_kernels(z, xi, coeffs, rel_tol)
    damp = np.exp(-2 * xi * z / C)
    return L[0] * damp, R[0] * damp


def decompose(G: np.ndarray) -> dict:
    """``G_t``, ``G_zz``, ``G_a`` of a coincident-point tensor."""
    return {
        "G_t": 0.5 * (G[0, 0] + G[1, 1]),
        "G_zz": G[2, 2],
        "G_a": 0.5 * (G[0, 1] - G[1, 0]),
    }

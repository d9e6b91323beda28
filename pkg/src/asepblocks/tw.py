"""Tracy-Widom F2 and its density by three independent routes.

* f2            -- Airy-kernel Fredholm determinant on (s, oo), Nystrom with
                   Gauss-Legendre nodes under a rational map (the workhorse);
* det_J0_contour -- the deformed contour-operator route on rays, kept as a
                   fidelity check of the asymptotic analysis;
* painleve_f2   -- Hastings-McLeod Painleve II integration (oracle).

trace_f2_ratio evaluates tr((I+J0)^-1 J1) = F2'(s)/F2(s), the trace identity
behind the block-density prediction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from .airyfn import airy_unchecked

__all__ = [
    "airy",
    "f2",
    "f2_prime",
    "det_J0_contour",
    "trace_f2_ratio",
    "painleve_f2",
    "ContourRays",
]

from .airyfn import airy  # re-exported: the special-function entry point


def _airy_vals(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ai = np.empty_like(x)
    aip = np.empty_like(x)
    for i, v in enumerate(x):
        ai[i], aip[i] = airy_unchecked(float(v))
    return ai, aip


def _airy_kernel_matrix(s: float, n: int, scale: float = 10.0) -> np.ndarray:
    """Symmetrized Nystrom matrix of the Airy kernel on (s, oo).

    Nodes x = s + scale*u/(1-u) with u Gauss-Legendre on (0,1); the kernel
    decays superexponentially so the rational map's infinite tail is benign.
    """
    u, wu = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (u + 1.0)
    wu = 0.5 * wu
    x = s + scale * u / (1.0 - u)
    w = wu * scale / (1.0 - u) ** 2
    ai, aip = _airy_vals(x)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    k_mat = (ai[:, None] * aip[None, :] - aip[:, None] * ai[None, :]) / diff
    np.fill_diagonal(k_mat, aip**2 - x * ai**2)
    sw = np.sqrt(w)
    return sw[:, None] * k_mat * sw[None, :]


def f2(s: float, n: int | None = None) -> float:
    """Tracy-Widom GUE distribution function, converged to ~1e-10.

    With n given, a single Nystrom evaluation at that node count; otherwise
    node-doubling until successive values agree below 1e-10.
    """
    if not -8.5 <= s <= 8.0:
        raise ValueError(f"f2 argument {s} outside supported range [-8.5, 8]")
    if n is not None:
        return float(np.linalg.det(np.eye(n) - _airy_kernel_matrix(s, n)))
    prev = None
    for n_try in (40, 80, 160, 320):
        val = f2(s, n_try)
        if prev is not None and abs(val - prev) < 1e-10:
            return val
        prev = val
    raise RuntimeError(f"f2({s}) did not converge under node doubling")


def f2_prime(s: float, n: int = 160) -> float:
    """Density F2' by Richardson-extrapolated central differences of f2."""
    if not -8.0 <= s <= 7.5:
        raise ValueError(f"f2_prime argument {s} outside supported range")
    h = 1e-3
    d1 = (f2(s + h, n) - f2(s - h, n)) / (2 * h)
    d2 = (f2(s + h / 2, n) - f2(s - h / 2, n)) / h
    val = (4.0 * d2 - d1) / 3.0
    if val < -1e-9:
        raise RuntimeError(f"f2_prime({s}) = {val} is negative beyond tolerance")
    return max(val, 0.0)


@dataclass(frozen=True)
class ContourRays:
    """A pair of rays vertex + r*exp(+/-i*angle), truncated at `radius`.

    Node layout runs from the far end of the lower ray through the vertex to
    the far end of the upper ray, so weights carry the traversal direction;
    all contour integrals here are 1/(2*pi*i)-normalized.
    """

    vertex: complex
    angle: float
    radius: float = 8.0
    n_nodes: int = 96

    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        u, wu = np.polynomial.legendre.leggauss(self.n_nodes)
        r = 0.5 * (u + 1.0) * self.radius
        wr = 0.5 * wu * self.radius
        up = self.vertex + r * np.exp(1j * self.angle)
        dn = self.vertex + r * np.exp(-1j * self.angle)
        nodes = np.concatenate([dn[::-1], up])
        weights = np.concatenate(
            [-(wr * np.exp(-1j * self.angle))[::-1], wr * np.exp(1j * self.angle)]
        )
        return nodes, weights / (2j * np.pi)


def _j0_matrices(s: float, c3: float, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nystrom matrices (J0*W, J1*W) on the eta-ray contour."""
    eta_contour = ContourRays(0.0, np.pi / 3.0, n_nodes=n)
    zeta_contour = ContourRays(-c3, 2.0 * np.pi / 3.0, n_nodes=n)
    eta, weta = eta_contour.nodes_weights()
    zeta, wzeta = zeta_contour.nodes_weights()
    vz = np.exp(-(zeta**3) / 3.0 + s * zeta) * wzeta
    ve = np.exp((eta**3) / 3.0 - s * eta)
    inv_ze = 1.0 / (zeta[None, :] - eta[:, None])  # (eta_i, zeta_k)
    # J0(e, e') = int vz / ((zeta - e)(e' - zeta));  J1(e, e') = -int vz / (zeta - e)
    j0 = (inv_ze * vz[None, :]) @ (1.0 / (eta[None, :] - zeta[:, None])) * ve[None, :]
    j1 = -(inv_ze @ vz)[:, None] * ve[None, :]
    return j0 * weta[None, :], j1 * weta[None, :], eta


def det_J0_contour(s: float, c3: float = 0.4, n: int = 96) -> complex:
    """Fredholm determinant det(I + J0) on the ray contours; equals F2(s)."""
    if c3 <= 0:
        raise ValueError("c3 must be positive")
    m0, _, _ = _j0_matrices(s, c3, n)
    val = np.linalg.det(np.eye(m0.shape[0]) + m0)
    if abs(val.imag) > 1e-8:
        raise RuntimeError(f"det_J0_contour({s}): imaginary part {val.imag} too large")
    return val


def trace_f2_ratio(s: float, c3: float = 0.4, n: int = 96) -> float:
    """tr((I+J0)^-1 J1) = F2'(s)/F2(s) on the same discretization."""
    m0, m1, _ = _j0_matrices(s, c3, n)
    val = np.trace(np.linalg.solve(np.eye(m0.shape[0]) + m0, m1))
    if abs(val.imag) > 1e-8:
        raise RuntimeError(f"trace_f2_ratio({s}): imaginary part {val.imag} too large")
    return float(val.real)


@lru_cache(maxsize=8)
def _hastings_mcleod(s_min: float, s0: float = 8.0):
    """Integrate q'' = s q + 2 q^3 backward from Airy data at s0.

    The state is augmented with J = int q^2 and I = int (x-s) q(x)^2 dx so
    F2(s) = exp(-I(s)) comes straight off the solver mesh.
    """
    ai0, aip0 = airy_unchecked(s0)
    # tails int_{s0}^inf Ai^2 and int_{s0}^inf (x - s0) Ai^2 by quadrature
    u, wu = np.polynomial.legendre.leggauss(80)
    x = s0 + 0.5 * (u + 1.0) * 16.0
    w = 0.5 * wu * 16.0
    ai_sq = np.array([airy_unchecked(float(v))[0] ** 2 for v in x])
    j0 = float(np.sum(w * ai_sq))
    i0 = float(np.sum(w * (x - s0) * ai_sq))

    def rhs(x, y):
        q, qp, jj, ii = y
        return [qp, x * q + 2.0 * q**3, -q * q, -jj]

    sol = solve_ivp(
        rhs,
        (s0, s_min),
        [ai0, aip0, j0, i0],
        method="DOP853",
        rtol=1e-12,
        atol=1e-14,
        dense_output=True,
    )
    if not sol.success:
        raise RuntimeError(f"Painleve II integration failed: {sol.message}")
    return sol


def painleve_f2(s: float) -> float:
    """F2 via the Hastings-McLeod Painleve II representation (independent oracle)."""
    if s < -8.0:
        raise ValueError("painleve_f2 supported for s >= -8")
    if s >= 8.0:
        return 1.0
    sol = _hastings_mcleod(-8.0)
    ii = sol.sol(s)[3]
    return float(math.exp(-ii))


def hastings_mcleod_q(s: float) -> float:
    """The Hastings-McLeod solution itself (q ~ Ai at +infinity)."""
    if s >= 8.0:
        return airy_unchecked(s)[0]
    return float(_hastings_mcleod(-8.0).sol(s)[0])

"""Complex contour calculus for the exact block-probability formulas.

Evaluates the two exact representations of the step-initial-condition
block probability -- the大 circle-operator form (kernels U, K_x, Fredholm
determinant, lambda integral, nested residues over tiny circles at 0 and
tau) and the deformed w-operator form (phi_infinity, bilateral series f,
V-product kernel, mu integral) -- plus the q-Pochhammer and weight-function
identities used by the asymptotic analysis.

Conventions frozen here (resolved against the CTMC oracle; see tests):

* every contour integral carries the 1/(2*pi*i) normalization;
* integral operators on a circle act with measure d(xi')/(2*pi*i), which
  makes det(I - tau^L*lambda*K0) = (tau^L*lambda; tau)_inf for the kernel
  1/(xi' - tau*xi);
* nested contours integrate the innermost (last) variable first, picking
  the residues at 0 and tau only, with simple poles evaluated directly and
  higher-order poles by spectrally-accurate quadrature on tiny circles;
* the exponent of phi_infinity carries the rate factor gamma = q - p
  (literal CTMC time everywhere).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams

__all__ = [
    "CircleContour",
    "qpoch",
    "f_bilateral",
    "eval_U",
    "eval_Kx",
    "fredholm_det_circle",
    "lambda_block_integral",
    "block_probability_circle",
    "block_probability_deformed",
    "mu_integral_lhs",
    "mu_integral_rhs",
    "contour_weight",
]

MAX_L_DEFAULT = 2  # cost guard: nested residues multiply work ~30x per level


@dataclass(frozen=True)
class CircleContour:
    """Equispaced quadrature nodes on a circle, 1/(2*pi*i)-normalized."""

    center: complex
    radius: float
    n_nodes: int

    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        theta = 2.0 * np.pi * np.arange(self.n_nodes) / self.n_nodes
        offs = self.radius * np.exp(1j * theta)
        # dz/(2*pi*i) = offs/n on an equispaced circle
        return self.center + offs, offs / self.n_nodes


def contour_integral(f, contour: CircleContour) -> complex:
    nodes, weights = contour.nodes_weights()
    return complex(sum(f(z) * w for z, w in zip(nodes, weights)))


def qpoch(a: complex, tau: float, m: int | float = math.inf) -> complex:
    """q-Pochhammer (a; tau)_m = prod_{j<m} (1 - a*tau^j), tau in (0,1)."""
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0,1)")
    if m is math.inf:
        out = 1.0 + 0.0j
        factor = complex(a)
        # truncate when the factor deviation |a| tau^j drops below 1e-16
        while abs(factor) > 1e-16:
            out *= 1.0 - factor
            factor *= tau
        return out
    out = 1.0 + 0.0j
    for j in range(int(m)):
        out *= 1.0 - a * tau**j
    return out


def f_bilateral(mu: complex, z: complex, tau: float, max_terms: int = 10_000) -> complex:
    """The bilateral series sum_k tau^k z^k / (1 - tau^k mu) on 1 < |z| < 1/tau.

    The k < 0 half is summed as sum_{j>=1} z^-j / (tau^j - mu), which keeps
    every term bounded for mu off the pole lattice tau^-k.
    """
    az = abs(z)
    if not 1.0 < az < 1.0 / tau:
        raise ValueError(f"|z|={az} outside the annulus (1, {1/tau:.4f})")
    if mu == 0:
        # mu = 0 is an accumulation point of the pole lattice tau^-k and the
        # negative-k half of the series loses its convergence factor there
        raise ValueError("mu = 0 lies on the closure of the pole lattice")
    total = 0.0 + 0.0j
    # k >= 0: terms (tau z)^k / (1 - tau^k mu)
    tz = tau * z
    power = 1.0 + 0.0j
    tau_k = 1.0
    k = 0
    while True:
        total += power / (1.0 - tau_k * mu)
        k += 1
        power *= tz
        tau_k *= tau
        if abs(power) < 1e-14 * (1.0 - abs(tz)) and k > 4:
            break
        if k > max_terms:
            raise RuntimeError("bilateral series (positive half) did not converge")
    # k = -j < 0: terms z^-j / (tau^j - mu)
    zinv = 1.0 / z
    power = zinv
    tau_j = tau
    j = 1
    while True:
        total += power / (tau_j - mu)
        j += 1
        power *= zinv
        tau_j *= tau
        if abs(power) < 1e-15 * (1.0 - abs(zinv)) * abs(mu) and j > 4:
            break
        if j > max_terms:
            raise RuntimeError("bilateral series (negative half) did not converge")
    return total


def eval_U(xi: complex, xi_p: complex, model: ModelParams) -> complex:
    """U(xi, xi') = (p + q*xi*xi' - xi) / (xi' - xi)."""
    if xi == xi_p:
        raise ZeroDivisionError("U undefined at coincident points")
    return (model.p + model.q * xi * xi_p - xi) / (xi_p - xi)


def _u_iterated(inner: complex, outer: complex, model: ModelParams) -> complex:
    """U(z_inner, z_outer) under the innermost-first residue convention.

    U(tau, z) = p identically, so when the inner variable's residue point is
    tau the factor is p for every outer value, including outer = tau.
    """
    if inner == model.tau:
        return model.p
    return eval_U(inner, outer, model)


def eval_Kx(xi: complex, xi_p: complex, x: int, t: float, model: ModelParams) -> complex:
    """K_x(xi, xi') = xi^x exp((p/xi + q*xi - 1) t) / (p + q*xi*xi' - xi)."""
    den = model.p + model.q * xi * xi_p - xi
    if den == 0:
        raise ZeroDivisionError("K_x pole hit")
    return xi**x * cmath.exp((model.p / xi + model.q * xi - 1.0) * t) / den


def fredholm_det_circle(kernel, contour: CircleContour, scalar: complex,
                        tol: float = 1e-10, max_nodes: int = 1024) -> complex:
    """det(I + scalar*K) for an integral operator K on a circle.

    K acts with measure d(xi')/(2*pi*i); node count doubles until two
    successive determinants agree below tol.
    """
    prev = None
    n = contour.n_nodes
    while n <= max_nodes:
        c = CircleContour(contour.center, contour.radius, n)
        nodes, weights = c.nodes_weights()
        k_mat = np.array([[kernel(zi, zj) for zj in nodes] for zi in nodes],
                         dtype=complex)
        val = complex(np.linalg.det(np.eye(n) + scalar * k_mat * weights[None, :]))
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        n *= 2
    raise RuntimeError(
        f"fredholm_det_circle did not converge below {tol} within {max_nodes} nodes"
    )


# ---------------------------------------------------------------------------
# circle route: the block operator on the big circle C_R, z-variables
# ---------------------------------------------------------------------------


def _c_r_contour(model: ModelParams, n_nodes: int) -> CircleContour:
    return CircleContour(0.0, max(4.0, 2.0 / (1.0 - model.tau)), n_nodes)


def _klx_eigenvalues(z: tuple[complex, ...], x: int, t: float, l_block: int,
                     model: ModelParams, n_xi: int) -> np.ndarray:
    """Eigenvalues of the discretized tau^-L K_{L,x}(z) on C_R."""
    nodes, weights = _c_r_contour(model, n_xi).nodes_weights()
    xi = nodes[:, None]
    xi_p = nodes[None, :]
    kern = (
        model.q ** (1 - l_block)
        * xi ** (x + l_block - 1)
        * np.exp((model.p / xi + model.q * xi - 1.0) * t)
        / (model.p + model.q * xi * xi_p - xi)
    )
    uprod = np.ones(n_xi, dtype=complex)
    for zj in z:
        uprod *= (model.p + model.q * zj * nodes - zj) / (nodes - zj)
    mat = model.tau ** (-l_block) * kern * uprod[:, None] * weights[None, :]
    return np.linalg.eigvals(mat)


def lambda_block_integral(x: int, m: int, t: float, l_block: int,
                          z: tuple[complex, ...], model: ModelParams,
                          n_xi: int = 64, n_lambda: int = 128) -> complex:
    """The bracketed integral of the circle-operator form at fixed z:
    (1/2*pi*i) oint det(I - tau^-L lambda K_{L,x}(z)) / (lambda; tau)_m
    dlambda / lambda^L over a circle enclosing 0 and tau^-j, j < m."""
    beta = _klx_eigenvalues(z, x, t, l_block, model, n_xi)
    contour = CircleContour(0.0, model.tau ** (-(m - 1) - 0.5), n_lambda)
    nodes, weights = contour.nodes_weights()
    total = 0.0 + 0.0j
    for lam, w in zip(nodes, weights):
        det = np.prod(1.0 - lam * beta)
        total += w * det / (qpoch(lam, model.tau, m) * lam**l_block)
    return total


# ---------------------------------------------------------------------------
# nested residues over the tiny circles at 0 and tau
# ---------------------------------------------------------------------------


def _nested_residues(levels, inner, tau: float, radii: list[float], n_nodes: int,
                     outer=()):
    """Sum of iterated residues at {0, tau}, innermost variable first.

    levels[j] = (base_j, orders) where base_j(v) is the factor carrying this
    variable's poles and orders maps pole -> order; direct evaluation is
    used at simple poles (residue coefficient callback), tiny-circle
    quadrature at higher orders.  `inner(values)` evaluates everything
    deeper than the current level, couplings included.
    """
    depth = len(outer)
    if depth == len(levels):
        return inner(outer)
    base, orders, res_coeff = levels[depth]
    total = 0.0 + 0.0j
    for pole, order in orders.items():
        if order == 1:
            total += res_coeff(pole) * _nested_residues(
                levels, inner, tau, radii, n_nodes, outer + (pole,))
        else:
            circle = CircleContour(pole, radii[depth], n_nodes)
            nodes, weights = circle.nodes_weights()
            for v, w in zip(nodes, weights):
                total += w * base(v) * _nested_residues(
                    levels, inner, tau, radii, n_nodes, outer + (v,))
    return total


def _residue_radii(tau: float, l_block: int) -> list[float]:
    base = 0.1 * min(tau, 1.0 - tau)
    ratio = min(0.3, tau / 3.0)
    return [base * ratio**j for j in range(l_block)]


def block_probability_circle(x: int, m: int, t: float, l_block: int, model: ModelParams,
                    n_xi: int = 64, n_lambda: int = 128, n_z: int = 32,
                    allow_large: bool = False) -> float:
    """Exact block probability from the circle-operator representation.

    P(x_m(t) = x, ..., x_{m+L-1}(t) = x+L-1) for step initial data, by
    nested residues over Gamma_{0,tau} of the lambda-integral with the
    prefactor (-1)^(L-1) p^(L(L+1)/2) tau^(-(m-1)(L-1)).
    """
    _guard(l_block, m, t, allow_large)
    tau, p, q = model.tau, model.p, model.q

    def base(j):  # 1 / (z^(L-j+1) (q z - p)), 1-indexed level j
        k = l_block - j + 1
        return lambda v: 1.0 / (v**k * (q * v - p))

    def res_coeff(j, pole):
        k = l_block - j + 1
        if pole == 0:  # simple only when k == 1
            return 1.0 / (-p)
        return 1.0 / (pole**k * q)  # at tau: residue of 1/(q(z - tau)) factor

    levels = []
    for j in range(1, l_block + 1):
        k = l_block - j + 1
        orders = {0.0: k, tau: 1}
        levels.append((base(j), orders, (lambda jj: lambda pole: res_coeff(jj, pole))(j)))

    def inner(zvals):
        coupling = 1.0 + 0.0j
        for jj in range(len(zvals)):
            for ii in range(jj):
                coupling /= _u_iterated(zvals[jj], zvals[ii], model)
        return coupling * lambda_block_integral(
            x, m, t, l_block, zvals, model, n_xi, n_lambda)

    val = _nested_residues(levels, inner, tau, _residue_radii(tau, l_block), n_z)
    pref = (-1.0) ** (l_block - 1) * p ** (l_block * (l_block + 1) / 2) \
        * tau ** (-(m - 1) * (l_block - 1))
    return _as_probability(pref * val, "block_probability_circle")


def _guard(l_block: int, m: int, t: float, allow_large: bool) -> None:
    if l_block < 1 or m < 1:
        raise ValueError("need L >= 1 and m >= 1")
    if not allow_large and (l_block > MAX_L_DEFAULT or m > 3 or t > 2.0):
        raise ValueError(
            f"cost guard: L <= {MAX_L_DEFAULT}, m <= 3, t <= 2 "
            "(pass allow_large=True to override)")


def _as_probability(val: complex, name: str) -> float:
    if abs(val.imag) > 1e-8:
        raise RuntimeError(f"{name}: imaginary residue {val.imag} exceeds 1e-8")
    if not -1e-8 <= val.real <= 1.0 + 1e-8:
        raise RuntimeError(f"{name}: value {val.real} outside [0, 1]")
    return min(max(val.real, 0.0), 1.0)


# ---------------------------------------------------------------------------
# deformed route: operator J on a circle of radius in (tau, 1), w-variables
# ---------------------------------------------------------------------------


def _phi_inf(v: np.ndarray, x: int, l_block: int, t: float,
             model: ModelParams) -> np.ndarray:
    """phi_inf(v) = (1-v)^(-x-L+1) exp(gamma t v/(1-v)); gamma restores the
    literal-time rate dropped in the deformed representation."""
    return (1.0 - v) ** (-(x + l_block - 1)) * np.exp(
        model.gamma * t * v / (1.0 - v))


class _JOperator:
    """Precomputed pieces of J_{L,x,m}(w) for all mu nodes at once."""

    def __init__(self, x: int, m: int, t: float, l_block: int,
                 model: ModelParams, n_r: int = 48, n_zeta: int = 128,
                 n_mu: int = 96):
        tau = model.tau
        self.model = model
        self.l_block = l_block
        r = 0.5 * (1.0 + tau)
        self.eps_nodes, self.eps_weights = CircleContour(0.0, r, n_r).nodes_weights()
        zeta_radius = math.sqrt(r / tau)
        self.zeta_nodes, zeta_weights = CircleContour(
            0.0, zeta_radius, n_zeta).nodes_weights()
        self.mu_contour = CircleContour(0.0, tau ** (-l_block + 0.5), n_mu)
        self.mu_nodes, mu_weights = self.mu_contour.nodes_weights()
        self.mu_prefactor = mu_weights * np.array(
            [qpoch(mu * tau**l_block, tau, math.inf) for mu in self.mu_nodes]
        ) / self.mu_nodes**l_block
        # zeta-side and eps'-side scalar factors
        phi_z = _phi_inf(self.zeta_nodes, x, l_block, t, model)
        phi_e = _phi_inf(self.eps_nodes, x, l_block, t, model)
        self.vec_zeta = phi_z * self.zeta_nodes ** (m - l_block) * zeta_weights
        self.col_eps = 1.0 / (phi_e * self.eps_nodes ** (m - l_block + 1))
        # cauchy factor 1/(zeta - eps) for the outer variable
        self.cauchy = 1.0 / (self.zeta_nodes[None, :] - self.eps_nodes[:, None])
        # bilateral series tensor f(mu_a, zeta_k/eps'_j)
        ratio = self.zeta_nodes[:, None] / self.eps_nodes[None, :]
        self.f_tensor = self._f_tensor(ratio, tau)

    def _f_tensor(self, ratio: np.ndarray, tau: float) -> np.ndarray:
        n_mu = self.mu_nodes.size
        out = np.zeros((n_mu,) + ratio.shape, dtype=complex)
        tz = tau * ratio
        power = np.ones_like(ratio)
        k = 0
        max_abs_tz = np.abs(tz).max()
        while True:
            denom = 1.0 - (tau**k) * self.mu_nodes
            out += power[None, :, :] / denom[:, None, None]
            power = power * tz
            k += 1
            if np.abs(power).max() < 1e-15 * (1.0 - max_abs_tz) or k > 2000:
                break
        zinv = 1.0 / ratio
        power = zinv.copy()
        j = 1
        max_abs_zi = np.abs(zinv).max()
        while True:
            denom = tau**j - self.mu_nodes
            out += power[None, :, :] / denom[:, None, None]
            power = power * zinv
            j += 1
            if np.abs(power).max() < 1e-15 * (1.0 - max_abs_zi) or j > 2000:
                break
        return out

    def mu_integral(self, w: tuple[complex, ...]) -> complex:
        """(1/2*pi*i) oint (tau^L mu; tau)_inf det(I + mu J(w, mu)) dmu/mu^L."""
        tau = self.model.tau
        vz = np.ones_like(self.zeta_nodes)
        ve = np.ones_like(self.eps_nodes)
        for wj in w:  # the V-product, split over the two circles
            vz = vz * (wj * self.zeta_nodes - tau)
            ve = ve * (wj * self.eps_nodes - tau)
        core = (self.vec_zeta * vz)[:, None] * (self.col_eps / ve)[None, :]
        n_r = self.eps_nodes.size
        dets = np.empty(self.mu_nodes.size, dtype=complex)
        for a in range(self.mu_nodes.size):
            j_mat = self.cauchy @ (core * self.f_tensor[a])
            j_mat = j_mat * self.eps_weights[None, :]
            dets[a] = np.linalg.det(
                np.eye(n_r) + self.mu_nodes[a] * j_mat)
        return complex(np.sum(dets * self.mu_prefactor))


def block_probability_deformed(x: int, m: int, t: float, l_block: int,
                               model: ModelParams, n_r: int = 48,
                               n_zeta: int = 128, n_mu: int = 96,
                               n_w: int = 32, allow_large: bool = False) -> float:
    """Exact block probability from the deformed w-operator representation.

    Must agree with block_probability_circle for all shared inputs; the agreement is
    the numerical content of the operator-deformation argument.
    """
    _guard(l_block, m, t, allow_large)
    tau = model.tau
    op = _JOperator(x, m, t, l_block, model, n_r, n_zeta, n_mu)

    def base(j):  # (w-1)^(L-j) / (w (w - tau)^(L-j+1)), 1-indexed level j
        k = l_block - j + 1
        return lambda v: (v - 1.0) ** (l_block - j) / (v * (v - tau) ** k)

    def res_coeff(j, pole):
        k = l_block - j + 1
        if pole == 0:  # simple pole from 1/w
            return (-1.0) ** (l_block - j) / (-tau) ** k
        # at tau: simple only when k == 1 (innermost level)
        return (tau - 1.0) ** (l_block - j) / tau

    levels = []
    for j in range(1, l_block + 1):
        k = l_block - j + 1
        orders = {0.0: 1, tau: k}
        levels.append((base(j), orders, (lambda jj: lambda pole: res_coeff(jj, pole))(j)))

    def inner(wvals):
        coupling = 1.0 + 0.0j
        for jj in range(len(wvals)):
            for ii in range(jj):
                if wvals[jj] == 0.0:
                    # innermost-first: (w_j - w_i)/(w_j - tau w_i) -> 1/tau
                    coupling /= tau
                else:
                    coupling *= (wvals[jj] - wvals[ii]) / (wvals[jj] - tau * wvals[ii])
        return coupling * op.mu_integral(wvals)

    val = _nested_residues(levels, inner, tau, _residue_radii(tau, l_block), n_w)
    pref = -(tau ** (-(l_block**2 - 5 * l_block + 2) / 2.0))
    return _as_probability(pref * val, "block_probability_deformed")


# ---------------------------------------------------------------------------
# the mu-integral identity and the w-weight function
# ---------------------------------------------------------------------------


def mu_integral_lhs(l_block: int, tau: float, n_mu: int = 256) -> complex:
    """(1/2*pi*i) oint (tau^L mu; tau)_inf dmu / mu^L on the standard circle."""
    if l_block < 1:
        raise ValueError("L must be >= 1")
    contour = CircleContour(0.0, tau ** (-l_block + 0.5), n_mu)
    return contour_integral(
        lambda mu: qpoch(mu * tau**l_block, tau, math.inf) / mu**l_block, contour)


def mu_integral_rhs(l_block: int, tau: float) -> float:
    """(-1)^(L-1) tau^((L-1)(3L-2)/2) / ((1-tau)...(1-tau^(L-1)))."""
    if l_block < 1:
        raise ValueError("L must be >= 1")
    den = 1.0
    for j in range(1, l_block):
        den *= 1.0 - tau**j
    return (-1.0) ** (l_block - 1) * tau ** ((l_block - 1) * (3 * l_block - 2) / 2.0) / den


def contour_weight(w: tuple[complex, ...], l_block: int, tau: float) -> complex:
    """Nested-contour weight: prod_j (w_j-1)^(L-j) / (w_j (w_j-tau)^(L-j+1))
    * prod_{i<j} (w_j-w_i)/(w_j-tau*w_i)."""
    if len(w) != l_block:
        raise ValueError("w must have length L")
    out = 1.0 + 0.0j
    for j, wj in enumerate(w, start=1):
        out *= (wj - 1.0) ** (l_block - j) / (wj * (wj - tau) ** (l_block - j + 1))
    for j in range(l_block):
        for i in range(j):
            out *= (w[j] - w[i]) / (w[j] - tau * w[i])
    return out

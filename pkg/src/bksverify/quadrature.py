"""Integration engines over the Lie algebra and over the group.

Every integral in the verification pipeline is either an algebra
integral against a Gaussian weight or a normalized-Haar integral over
the group.  Three algebra backends cover the regimes that occur:

* ``cartan-reduced``: Weyl reduction of Ad-invariant integrands to the
  Cartan subalgebra, with the Jacobian prod_{alpha>0} alpha(H)^2 and
  the constant c_K folded into composite Gauss-Legendre weights.
* ``gauss-hermite-full``: tensor Gauss-Hermite rule on all ``dim``
  coordinates with the Gaussian weight divided back out, rescaled to
  the width of the integrand at hand.
* ``monte-carlo``: seeded Gaussian importance sampling with standard
  errors.

Group backends: trapezoid grids on tori (exact below the resolution),
an Euler-angle product rule on SU(2), and seeded Haar samples.

Deterministic rules carry a coarser companion rule; the reported error
estimate is the difference between the two resolutions.  Accumulation
is compensated and in fixed node order, so identical (backend,
resolution, seed) reproduce bit-identical reports.
"""

from __future__ import annotations

import dataclasses
import functools
import math

import numpy as np
from scipy.special import roots_hermite
from numpy.polynomial.legendre import leggauss
from scipy.special import logsumexp

from .groups import GroupSpec


@dataclasses.dataclass(frozen=True, eq=False)
class AlgebraQuadrature:
    """One configured integration rule over the algebra.

    Deterministic backends store nodes as full algebra vectors together
    with positive weights (Jacobian and c_K included for the reduced
    rule), plus a coarser companion used for the error estimate.  The
    Monte Carlo backend stores only (samples, seed, scale).
    """

    backend: str
    group: GroupSpec
    nodes: np.ndarray | None = None
    weights: np.ndarray | None = None
    coarse_nodes: np.ndarray | None = None
    coarse_weights: np.ndarray | None = None
    samples: int = 0
    seed: int = 0
    scale: float = 1.0
    weyl_c: float | None = None
    error_policy: str = "companion"


@dataclasses.dataclass(frozen=True, eq=False)
class GroupQuadrature:
    """One configured integration rule against normalized Haar measure."""

    backend: str
    group: GroupSpec
    resolution: int = 0
    samples: int = 0
    seed: int = 0


def weyl_constant(group: GroupSpec) -> float:
    """Constant c_K with int_k F dY = c_K int_t F(H) prod alpha(H)^2 dH.

    Holds for Ad-invariant F; calibrated on the exact Gaussian
    int_k e^{-|Y|^2} dY = pi^{dim/2}.  The Cartan-side integral has a
    polynomial integrand, so a small Gauss-Hermite rule is exact.
    """
    if group.kind == "torus":
        raise ValueError("torus integrals need no Weyl reduction")
    x, w = roots_hermite(8)
    H = _tensor_nodes(x, group.rank)
    W = _tensor_weights(w, group.rank)
    jac = np.prod((H @ group.positive_roots.T) ** 2, axis=1)
    return math.pi ** (group.dim / 2) / math.fsum(W * jac)


def _tensor_nodes(x: np.ndarray, rank: int) -> np.ndarray:
    grids = np.meshgrid(*([x] * rank), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def _tensor_weights(w: np.ndarray, rank: int) -> np.ndarray:
    return functools.reduce(np.multiply.outer, [w] * rank).ravel()


def _composite_legendre(half_width: float, panels: int, points: int):
    x, w = leggauss(points)
    edges = np.linspace(-half_width, half_width, panels + 1)
    mid = (edges[:-1] + edges[1:]) / 2.0
    h = (edges[1] - edges[0]) / 2.0
    nodes = (mid[:, None] + h * x[None, :]).ravel()
    weights = np.broadcast_to(h * w, (panels, points)).ravel()
    return nodes, np.ascontiguousarray(weights)


def _cartan_rule(group: GroupSpec, c_k: float, half_width: float, panels: int, points: int):
    x, w = _composite_legendre(half_width, panels, points)
    H = _tensor_nodes(x, group.rank)
    W = _tensor_weights(w, group.rank)
    jac = np.prod((H @ group.positive_roots.T) ** 2, axis=1)
    nodes = np.zeros((H.shape[0], group.dim))
    nodes[:, list(group.cartan_indices)] = H
    return nodes, c_k * W * jac


def cartan_quadrature(
    group: GroupSpec, half_width: float, points_per_panel: int = 12, panels: int = 8
) -> AlgebraQuadrature:
    """Weyl-reduced rule on the Cartan box [-half_width, half_width]^rank.

    Only valid for Ad-invariant integrands (the caller asserts this).
    Keep ``points_per_panel`` even so no node lands on a root
    hyperplane and every weight stays strictly positive.
    """
    if group.kind == "torus":
        raise ValueError("use the Gauss-Hermite backend on tori")
    c_k = weyl_constant(group)
    nodes, weights = _cartan_rule(group, c_k, half_width, panels, points_per_panel)
    cnodes, cweights = _cartan_rule(
        group, c_k, half_width, panels, max(4, (3 * points_per_panel) // 4)
    )
    return AlgebraQuadrature(
        backend="cartan-reduced",
        group=group,
        nodes=nodes,
        weights=weights,
        coarse_nodes=cnodes,
        coarse_weights=cweights,
        weyl_c=c_k,
    )


def hermite_quadrature(
    group: GroupSpec, points: int, scale: float = 1.0, center=None
) -> AlgebraQuadrature:
    """Tensor Gauss-Hermite rule on all ``dim`` coordinates.

    Integrates F(Y) dY exactly for F = polynomial((Y-center)/scale)
    times e^{-|(Y-center)/scale|^2} up to per-coordinate degree
    2*points - 1; accurate whenever F decays at least like that
    Gaussian.  Shifting the center is how linearly tilted Gaussians are
    handled without inflating the point count.
    """
    if points**group.dim > 2_000_000:
        raise ValueError("tensor rule too large; use cartan-reduced or monte-carlo")
    if points > 350:
        # beyond this the detached weights leave normal float range
        raise ValueError("rule too long for stable weights; recenter instead")
    nodes, weights = _hermite_rule(group.dim, points, scale, center)
    cnodes, cweights = _hermite_rule(group.dim, max(4, (3 * points) // 4), scale, center)
    return AlgebraQuadrature(
        backend="gauss-hermite-full",
        group=group,
        nodes=nodes,
        weights=weights,
        coarse_nodes=cnodes,
        coarse_weights=cweights,
    )


def _hermite_rule(dim: int, points: int, scale: float, center=None):
    x, w = roots_hermite(points)
    detached = np.exp(np.log(w) + x * x)  # Gaussian weight divided back out
    nodes = scale * _tensor_nodes(x, dim)
    if center is not None:
        nodes = nodes + np.asarray(center, dtype=float)[None, :]
    weights = scale**dim * _tensor_weights(detached, dim)
    return nodes, weights


def algebra_montecarlo(
    group: GroupSpec, samples: int, seed: int, scale: float = 1.0
) -> AlgebraQuadrature:
    """Importance sampler Y ~ N(0, scale^2 I) with standard errors."""
    return AlgebraQuadrature(
        backend="monte-carlo",
        group=group,
        samples=samples,
        seed=seed,
        scale=scale,
        error_policy="stderr",
    )


def _weighted_sum(weights: np.ndarray, values: np.ndarray):
    if np.iscomplexobj(values):
        return complex(
            math.fsum(weights * values.real), math.fsum(weights * values.imag)
        )
    return math.fsum(weights * values)


def _evaluate(F, nodes: np.ndarray) -> np.ndarray:
    values = np.asarray([F(Y) for Y in nodes])
    if not np.all(np.isfinite(values)):
        raise ValueError("integrand produced a non-finite sample")
    return values


def integrate_algebra(F, quad: AlgebraQuadrature):
    """Integral of F over the algebra, as (value, error_estimate).

    F maps one algebra vector to a real or complex number.  For the
    cartan-reduced backend F must be Ad-invariant; the deterministic
    error estimate is the difference against the companion resolution,
    the Monte Carlo one a standard error.
    """
    if quad.backend == "monte-carlo":
        return _montecarlo_algebra(F, quad)
    value = _weighted_sum(quad.weights, _evaluate(F, quad.nodes))
    coarse = _weighted_sum(quad.coarse_weights, _evaluate(F, quad.coarse_nodes))
    return value, abs(value - coarse)


def integrate_algebra_log(logF, quad: AlgebraQuadrature):
    """log of the integral of e^{logF} >= 0, as (log_value, log_error).

    Overflow-safe route for positive integrands whose scale exceeds
    float range; logF must be real-valued.  Deterministic backends
    only.
    """
    if quad.backend == "monte-carlo":
        raise ValueError("log-space evaluation needs a deterministic backend")
    with np.errstate(divide="ignore"):
        logw = np.log(quad.weights)
        logw_c = np.log(quad.coarse_weights)
    value = float(logsumexp(_evaluate(logF, quad.nodes) + logw))
    coarse = float(logsumexp(_evaluate(logF, quad.coarse_nodes) + logw_c))
    return value, abs(value - coarse)


def _montecarlo_algebra(F, quad: AlgebraQuadrature):
    rng = np.random.default_rng(quad.seed)
    dim = quad.group.dim
    norm = (2.0 * math.pi) ** (dim / 2.0) * quad.scale**dim
    xi = rng.standard_normal((quad.samples, dim))
    ratios = np.asarray(
        [F(quad.scale * x) * norm * math.exp(0.5 * float(x @ x)) for x in xi]
    )
    if not np.all(np.isfinite(ratios)):
        raise ValueError("integrand produced a non-finite sample")
    value = ratios.mean()
    stderr = float(np.std(ratios, ddof=1) / math.sqrt(quad.samples))
    if not np.iscomplexobj(ratios):
        value = float(value)
    return value, stderr


def torus_quadrature(group: GroupSpec, resolution: int) -> GroupQuadrature:
    """Product trapezoid grid; exact for band limits below resolution."""
    if group.kind != "torus":
        raise ValueError("trapezoid grids are a torus backend")
    return GroupQuadrature(backend="torus-trapezoid", group=group, resolution=resolution)


def euler_quadrature(group: GroupSpec, resolution: int) -> GroupQuadrature:
    """SU(2) Euler-angle rule, trapezoid in both periodic angles."""
    if group.kind != "su2":
        raise ValueError("Euler-angle rule is an SU(2) backend")
    return GroupQuadrature(backend="su2-euler", group=group, resolution=resolution)


def group_montecarlo(group: GroupSpec, samples: int, seed: int) -> GroupQuadrature:
    """Seeded Haar sampler (uniform angles / orthonormalized Ginibre)."""
    return GroupQuadrature(backend="haar-mc", group=group, samples=samples, seed=seed)


def _torus_values(f, group: GroupSpec, resolution: int) -> np.ndarray:
    ticks = 2.0 * math.pi * np.arange(resolution) / resolution
    thetas = _tensor_nodes(ticks, group.rank)
    return np.asarray([f(theta) for theta in thetas])


def _euler_values(f, resolution: int):
    alphas = 2.0 * math.pi * np.arange(resolution) / resolution
    gammas = 4.0 * math.pi * np.arange(resolution) / resolution
    u, wu = leggauss(resolution)
    beta_half = 0.5 * np.arccos(u)
    values = []
    weights = []
    for a in alphas:
        za = np.array([np.exp(-0.5j * a), np.exp(0.5j * a)])
        for bh, wb in zip(beta_half, wu):
            ry = np.array([[math.cos(bh), -math.sin(bh)], [math.sin(bh), math.cos(bh)]])
            m = za[:, None] * ry
            for g in gammas:
                zg = np.array([np.exp(-0.5j * g), np.exp(0.5j * g)])
                values.append(f(m * zg[None, :]))
                weights.append(wb / (2.0 * resolution**2))
    return np.asarray(values), np.asarray(weights)


def _haar_sample(group: GroupSpec, rng: np.random.Generator):
    if group.kind == "torus":
        return rng.uniform(0.0, 2.0 * math.pi, group.rank)
    d = group.defining.shape[1]
    a = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2.0)
    q, r = np.linalg.qr(a)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))[None, :]
    det = np.linalg.det(q)
    return q * (det / abs(det)) ** (-1.0 / d)


def integrate_group(f, quad: GroupQuadrature):
    """Normalized-Haar integral of f, as (value, error_estimate).

    f maps one group element (angle vector or defining-representation
    matrix) to a real or complex number.
    """
    if quad.backend == "torus-trapezoid":
        values = _torus_values(f, quad.group, quad.resolution)
        coarse = _torus_values(f, quad.group, max(2, (2 * quad.resolution) // 3))
        _require_finite(values)
        n = quad.group.rank
        value = _weighted_sum(np.full(len(values), quad.resolution ** -n), values)
        cval = _weighted_sum(np.full(len(coarse), float(len(coarse)) ** -1.0), coarse)
        return value, abs(value - cval)
    if quad.backend == "su2-euler":
        values, weights = _euler_values(f, quad.resolution)
        cvalues, cweights = _euler_values(f, max(3, (2 * quad.resolution) // 3))
        _require_finite(values)
        value = _weighted_sum(weights, values)
        return value, abs(value - _weighted_sum(cweights, cvalues))
    if quad.backend == "haar-mc":
        rng = np.random.default_rng(quad.seed)
        values = np.asarray([f(_haar_sample(quad.group, rng)) for _ in range(quad.samples)])
        _require_finite(values)
        value = values.mean()
        stderr = float(np.std(values, ddof=1) / math.sqrt(quad.samples))
        if not np.iscomplexobj(values):
            value = float(value)
        return value, stderr
    raise ValueError(f"unknown group backend {quad.backend!r}")


def _require_finite(values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise ValueError("integrand produced a non-finite sample")

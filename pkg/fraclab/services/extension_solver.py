"""
Extension realization of the fractional Laplacian.

The trace f is extended to the strip base x [0, Y] by solving

    div(y^a grad F) = 0,   F(x, 0) = f(x),

and the weighted conormal derivative lim y^a F_y recovers -c_{1,s} (-Delta)^s f.
Discretization: 5-point finite volumes, periodic in x, with the y-flux
coefficient exact for y^{1-a} between neighbouring layers.
"""
import logging
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu
from scipy.special import gamma, kv, roots_jacobi

from fraclab.core.exceptions import (
    ConfigurationError,
    NumericalError,
    ParameterError,
    ShapeError,
)
from fraclab.models.extension import ExtensionField, StripGrid
from fraclab.models.grid import Field, Grid1D
from fraclab.models.operators import SpectralOp

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
DTN_LAYERS = 3


def build_strip(
    base: Grid1D,
    s: float,
    height: float = 16.0,
    m: int = 256,
    grade: float | None = None,
) -> StripGrid:
    """Strip with y_j = height * (j/m)^grade, grade defaulting to 2/(1-a) = 1/s."""
    if not 0.0 < s < 1.0:
        raise ParameterError(f"s must lie in (0, 1), got {s}")
    if height <= 0 or m < 2:
        raise ParameterError(f"need height > 0 and m >= 2, got height={height}, m={m}")
    a = 1.0 - 2.0 * s
    gamma_grade = 2.0 / (1.0 - a) if grade is None else float(grade)
    y = height * (np.arange(m + 1) / m) ** gamma_grade
    return StripGrid(base=base, y_nodes=y, height=float(height), a=a, grade=gamma_grade)


def extension_constant(s: float) -> float:
    """c_{1,s} = 2^{1-2s} Gamma(1-s) / Gamma(s)."""
    if not 0.0 < s < 1.0:
        raise ParameterError(f"s must lie in (0, 1), got {s}")
    return float(2.0 ** (1.0 - 2.0 * s) * gamma(1.0 - s) / gamma(s))


def extension_profile(s: float, xi: float, y: np.ndarray) -> np.ndarray:
    """
    Decaying solution of phi'' + (a/y) phi' = xi^2 phi with phi(0) = 1:
    (2^{1-s}/Gamma(s)) (xi y)^s K_s(xi y).
    """
    y = np.asarray(y, dtype=float)
    arg = abs(xi) * y
    out = np.ones_like(arg)
    pos = arg > 0
    out[pos] = 2.0 ** (1.0 - s) / gamma(s) * arg[pos] ** s * kv(s, arg[pos])
    return out


def _flux_and_mass(strip: StripGrid, weight: float) -> tuple[np.ndarray, np.ndarray]:
    """
    sigma[j] couples layers j and j+1; mass[j] = int of y^weight over the
    dual cell of layer j.
    """
    y = strip.y_nodes
    q = 1.0 - weight
    sigma = q / np.diff(y ** q)
    lower, upper = strip.dual_edges()
    mass = (upper ** (1.0 + weight) - lower ** (1.0 + weight)) / (1.0 + weight)
    return sigma, mass


def _second_difference(n: int, periodic: bool) -> sparse.csr_matrix:
    i = np.arange(n)
    rows = [i]
    cols = [i]
    vals = [np.full(n, 2.0)]
    if periodic:
        rows += [i, i]
        cols += [(i + 1) % n, (i - 1) % n]
        vals += [np.full(n, -1.0), np.full(n, -1.0)]
    else:
        rows += [i[:-1], i[1:]]
        cols += [i[1:], i[:-1]]
        vals += [np.full(n - 1, -1.0), np.full(n - 1, -1.0)]
    return sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()


def _layer_matrix(diag: np.ndarray, off: np.ndarray) -> sparse.csr_matrix:
    return sparse.diags([diag, -off, -off], [0, 1, -1], format="csr")


class _LinearSystem:
    """Factorized SPD system with a residual check on every solve."""

    def __init__(self, matrix: sparse.spmatrix, label: str):
        self.matrix = matrix.tocsc()
        self.label = label
        self._lu = splu(self.matrix)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x = self._lu.solve(rhs)
        scale = max(float(np.linalg.norm(rhs)), 1e-300)
        residual = float(np.linalg.norm(self.matrix @ x - rhs)) / scale
        if not np.all(np.isfinite(x)) or residual > RESIDUAL_TOL:
            raise NumericalError(
                f"{self.label}: linear solve failed, relative residual {residual:.3e}",
                residual=residual,
            )
        return x


@lru_cache(maxsize=16)
def _periodic_system(strip: StripGrid, weight: float) -> _LinearSystem:
    n = strip.base.n_points
    m = strip.m
    sigma, mass = _flux_and_mass(strip, weight)
    dy = _layer_matrix(sigma[:-1] + sigma[1:], sigma[1:-1])
    dx = _second_difference(n, periodic=True) / strip.base.h ** 2
    matrix = sparse.kron(dy, sparse.identity(n)) + sparse.kron(sparse.diags(mass[1:m]), dx)
    logger.debug(f"Assembled periodic extension system: {matrix.shape[0]} unknowns, weight={weight:.4g}")
    return _LinearSystem(matrix, "extension solve")


def solve_extension(f: Field, a: float, strip: StripGrid, weight_sign: int = 1) -> ExtensionField:
    """
    Extend `f` into the strip with weight y^(weight_sign * a).

    The top row y = Y carries the mean of f rather than 0: the fluctuation
    f - mean is extended with homogeneous Dirichlet data at y = Y and the
    mean is added back, so constants extend to constants and their conormal
    derivative is exactly zero. For zero-mean traces this is the plain
    homogeneous Dirichlet truncation.
    """
    if weight_sign not in (1, -1):
        raise ParameterError(f"weight_sign must be +1 or -1, got {weight_sign}")
    if not -1.0 < a < 1.0:
        raise ParameterError(f"a must lie in (-1, 1), got {a}")
    if not np.isclose(a, strip.a, rtol=0.0, atol=1e-12):
        raise ParameterError(f"strip was built for a={strip.a}, got a={a}")
    if f.grid != strip.base:
        raise ShapeError("trace does not live on the strip's base grid")
    weight = weight_sign * a
    n = strip.base.n_points
    m = strip.m
    sigma, _ = _flux_and_mass(strip, weight)

    mean = float(f.values.mean())
    fluctuation = f.values - mean
    rhs = np.zeros((m - 1) * n)
    rhs[:n] = sigma[0] * fluctuation
    interior = _periodic_system(strip, weight).solve(rhs).reshape(m - 1, n).T

    values = np.empty(strip.shape)
    values[:, 0] = f.values
    values[:, 1:m] = interior + mean
    values[:, m] = mean
    return ExtensionField(strip=strip, values=values, weight=weight)


def dtn_trace(F: ExtensionField, a: float) -> Field:
    """
    Weighted conormal derivative lim_{y->0} y^a F_y.

    Fits F(x, y_j) - F(x, 0) = B y_j^{1-a} + D y_j^2 on the first three
    layers (weights 1/y_j^{1-a}) and returns (1-a) B.
    """
    strip = F.strip
    if not np.isclose(F.weight, a, rtol=0.0, atol=1e-12):
        raise ParameterError(f"dtn_trace needs an extension solved with weight a={a}, got {F.weight}")
    y = strip.y_nodes
    shallow = int(np.count_nonzero((y[1:] > 0) & (y[1:] < 0.01 * strip.height)))
    if shallow < DTN_LAYERS:
        raise ConfigurationError(
            f"only {shallow} layers below y = 0.01*Y; refine the strip (need {DTN_LAYERS})"
        )
    layers = y[1:DTN_LAYERS + 1]
    eta = layers ** (1.0 - a)
    w = 1.0 / eta
    design = np.column_stack((eta, layers ** 2)) * w[:, None]
    pinv = np.linalg.pinv(design)
    increments = (F.values[:, 1:DTN_LAYERS + 1] - F.values[:, [0]]) * w[None, :]
    slope = increments @ pinv[0]
    return Field(strip.base, (1.0 - a) * slope)


def fit_extension_constant(
    family: Sequence[Field],
    strip: StripGrid,
    op: SpectralOp,
) -> tuple[float, np.ndarray]:
    """Least-squares c with -dtn_trace ~ c * spectral (-Delta)^s, plus per-function ratios."""
    a = strip.a
    num = 0.0
    den = 0.0
    ratios = []
    for f in family:
        dtn = -dtn_trace(solve_extension(f, a, strip), a).values
        ref = op.apply(f).values
        num += float(dtn @ ref)
        den += float(ref @ ref)
        ratios.append(float(dtn @ ref) / float(ref @ ref))
    c = num / den
    logger.info(f"Fitted c_(1,{strip.s:.4g}) = {c:.6g} over {len(family)} traces")
    return c, np.array(ratios)


def rayleigh_quotient(
    profile: Callable[[np.ndarray], np.ndarray],
    derivative: Callable[[np.ndarray], np.ndarray],
    s: float,
    m_angular: int,
) -> float:
    """
    int |h'|^2 y^{-a} / int h^2 y^{-a} over the upper half circle, n = 1.

    With t = cos(theta) the angular weight (sin theta)^{-a} becomes
    (1 - t^2)^{s-1} dt. Gauss-Jacobi rules absorb the endpoint behaviour of
    profiles vanishing like (1 - cos theta)^{1-s}: the denominator is
    integrated against (1-t)^{1-s} (1+t)^{s-1}, the numerator against
    (1-t)^{-s} (1+t)^{s}.
    """
    t_den, w_den = roots_jacobi(m_angular, 1.0 - s, s - 1.0)
    t_num, w_num = roots_jacobi(m_angular, -s, s)
    den_nodes = profile(np.arccos(t_den)) ** 2 / (1.0 - t_den) ** (2.0 - 2.0 * s)
    num_nodes = derivative(np.arccos(t_num)) ** 2 / ((1.0 - t_num) ** (1.0 - 2.0 * s) * (1.0 + t_num))
    den = float(w_den @ den_nodes)
    num = float(w_num @ num_nodes)
    if not (np.isfinite(den) and np.isfinite(num)) or den <= 1e-300:
        raise NumericalError(f"angular quadrature underflow (num={num}, den={den})")
    return num / den


def eigen_check(s: float, m_angular: int = 64, scale: float = 1.0) -> float:
    """
    Rayleigh quotient of h(theta) = (1 - cos theta)^{1-s}, the angular part
    of (sqrt(x^2+y^2) - x)^{1-s}. Expected value (1-s) s.
    """
    if not 0.0 < s < 1.0:
        raise ParameterError(f"s must lie in (0, 1), got {s}")
    if m_angular < 64:
        raise ParameterError(f"m_angular must be >= 64, got {m_angular}")

    def profile(theta):
        return scale * (1.0 - np.cos(theta)) ** (1.0 - s)

    def derivative(theta):
        return scale * (1.0 - s) * (1.0 - np.cos(theta)) ** (-s) * np.sin(theta)

    value = rayleigh_quotient(profile, derivative, s, m_angular)
    logger.debug(f"Eigen check s={s}: {value:.12g} (expected {(1 - s) * s:.12g})")
    return value


def _signed_offsets(grid: Grid1D, center_index: int) -> np.ndarray:
    n = grid.n_points
    k = (np.arange(n) - center_index + n // 2) % n - n // 2
    return k * grid.h


def monotonicity_phi(
    w: ExtensionField,
    radii: np.ndarray,
    center_index: int | None = None,
    subsamples: int = 4,
) -> np.ndarray:
    """
    phi(r) = r^{-2(1-s)} int_{B_r^+} |grad w|^2 y^{-a} |z|^{a} dz around the
    boundary point (x[center_index], 0).

    Nodal gradients, dual-cell integrals of y^{-a}, and a sub-sampled
    coverage fraction of each cell by the half disk.
    """
    strip = w.strip
    base = strip.base
    a = strip.a
    s = strip.s
    if not np.isclose(w.weight, -a, rtol=0.0, atol=1e-12):
        raise ParameterError(f"monotonicity functional needs weight -a={-a}, got {w.weight}")
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    r_limit = min(strip.height, 0.5 * base.width)
    if np.any(radii <= 0) or np.any(radii > r_limit):
        raise ParameterError(f"radii must lie in (0, {r_limit:.4g}]")
    if center_index is None:
        center_index = base.n_points // 2
    h = base.h

    values = w.values
    dwx = (np.roll(values, -1, axis=0) - np.roll(values, 1, axis=0)) / (2.0 * h)
    dwy = np.gradient(values, strip.y_nodes, axis=1)
    grad2 = dwx ** 2 + dwy ** 2

    dx = _signed_offsets(base, center_index)
    lower, upper = strip.dual_edges()
    y_weight = (upper ** (1.0 - a) - lower ** (1.0 - a)) / (1.0 - a)
    dist = np.maximum(np.hypot(dx[:, None], strip.y_nodes[None, :]), 0.5 * h)
    density = grad2 * dist ** a * y_weight[None, :] * h

    frac = (np.arange(subsamples) + 0.5) / subsamples
    phi = np.empty(radii.size)
    for k, r in enumerate(radii):
        cols = np.nonzero(np.abs(dx) < r + h)[0]
        rows = np.nonzero(lower < r)[0]
        xs = dx[cols][:, None] + h * (frac[None, :] - 0.5)
        ys = lower[rows][:, None] + (upper - lower)[rows][:, None] * frac[None, :]
        inside = (xs[:, None, :, None] ** 2 + ys[None, :, None, :] ** 2) < r * r
        coverage = inside.mean(axis=(2, 3))
        total = float(np.sum(density[np.ix_(cols, rows)] * coverage))
        phi[k] = total / r ** (2.0 * (1.0 - s))
    if not np.all(np.isfinite(phi)):
        raise NumericalError("monotonicity functional is not finite")
    return phi


def monotonicity_bound(
    phi: np.ndarray,
    radii: np.ndarray,
    alpha: float,
    s: float,
    factor: float = 10.0,
) -> tuple[float, float, bool]:
    """
    Compare phi(r) with C (1 + r^e), e = 2 alpha + delta_alpha - a - 1,
    C taken from the largest radius. Returns (C, e, violated).
    """
    from fraclab.services.regularity_lab import delta_alpha

    a = 1.0 - 2.0 * s
    exponent = 2.0 * alpha + delta_alpha(alpha, s) - a - 1.0
    radii = np.asarray(radii, dtype=float)
    shape = 1.0 + radii ** exponent
    top = int(np.argmax(radii))
    c = float(phi[top] / shape[top])
    violated = bool(np.any(phi > factor * c * shape))
    if violated:
        logger.warning(f"Monotonicity bound exceeded by more than {factor}x (C={c:.4g}, e={exponent:.4g})")
    return c, exponent, violated


@lru_cache(maxsize=16)
def _framed_systems(strip: StripGrid, dt: float | None) -> _LinearSystem:
    """
    Systems on the interior columns 1..N-2 of a strip whose first and last
    columns and top row are Dirichlet.

    dt is None: Dirichlet trace problem, unknown layers 1..m-1.
    dt > 0: resolvent problem, unknown layers 0..m-1 with the Robin row
    (c/dt) u + sigma_0 (u - F_1) - mass_0 d_xx u = (c/dt) rhs at y = 0.
    """
    n_in = strip.base.n_points - 2
    m = strip.m
    sigma, mass = _flux_and_mass(strip, strip.a)
    dx = _second_difference(n_in, periodic=False) / strip.base.h ** 2
    eye = sparse.identity(n_in)
    if dt is None:
        dy = _layer_matrix(sigma[:-1] + sigma[1:], sigma[1:-1])
        matrix = sparse.kron(dy, eye) + sparse.kron(sparse.diags(mass[1:m]), dx)
        return _LinearSystem(matrix, "framed extension solve")
    c = extension_constant(strip.s)
    diag = np.concatenate(([sigma[0]], sigma[:-1] + sigma[1:]))
    dy = _layer_matrix(diag, sigma[:-1])
    robin = np.zeros(m)
    robin[0] = c / dt
    matrix = (
        sparse.kron(dy + sparse.diags(robin), eye)
        + sparse.kron(sparse.diags(mass[:m]), dx)
    )
    return _LinearSystem(matrix, "framed resolvent solve")


@dataclass(frozen=True, eq=False)
class FramedExtensionGenerator:
    """
    (-Delta)^s realized through the extension on a strip with prescribed
    Dirichlet data on the first and last columns and on the top row.

    `frame(t, x, y)` gives the data; the generator is affine and bound to
    `time`. The first and last trace nodes are frame nodes: the resolvent
    returns the frame value there and `apply` reports 0.
    """
    strip: StripGrid
    frame: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    time: float = 0.0

    @property
    def s(self) -> float:
        return self.strip.s

    @property
    def grid(self) -> Grid1D:
        return self.strip.base

    def at_time(self, t: float) -> "FramedExtensionGenerator":
        return replace(self, time=float(t))

    def _frame_loads(self, rows: slice) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = self.grid.nodes
        y = self.strip.y_nodes
        left = self.frame(self.time, np.full(y.size, x[0]), y)
        right = self.frame(self.time, np.full(y.size, x[-1]), y)
        top = self.frame(self.time, x, np.full(x.size, y[-1]))
        return left[rows], right[rows], top[1:-1]

    def _lateral_load(self, left, right, mass_rows) -> np.ndarray:
        n_in = self.grid.n_points - 2
        h2 = self.grid.h ** 2
        load = np.zeros((mass_rows.size, n_in))
        load[:, 0] += mass_rows * left / h2
        load[:, -1] += mass_rows * right / h2
        return load

    def apply(self, f: Field) -> Field:
        if f.grid != self.grid:
            raise ShapeError("trace does not live on the generator's grid")
        strip = self.strip
        m = strip.m
        h2 = self.grid.h ** 2
        sigma, mass = _flux_and_mass(strip, strip.a)
        left, right, top = self._frame_loads(slice(1, m))
        load = self._lateral_load(left, right, mass[1:m])
        u = f.values
        load[0] += sigma[0] * u[1:-1]
        load[-1] += sigma[m - 1] * top
        first = _framed_systems(strip, None).solve(load.ravel())[: u.size - 2]
        boundary_flux = sigma[0] * (first - u[1:-1]) + mass[0] * (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h2
        out = np.zeros(u.size)
        out[1:-1] = -boundary_flux / extension_constant(strip.s)
        return f.with_values(out)

    def implicit_solve(self, dt: float, rhs: Field) -> Field:
        if not dt > 0:
            raise ParameterError(f"dt must be positive, got {dt}")
        if rhs.grid != self.grid:
            raise ShapeError("right-hand side does not live on the generator's grid")
        strip = self.strip
        m = strip.m
        sigma, mass = _flux_and_mass(strip, strip.a)
        left, right, top = self._frame_loads(slice(0, m))
        load = self._lateral_load(left, right, mass[:m])
        load[0] += extension_constant(strip.s) / dt * rhs.values[1:-1]
        load[-1] += sigma[m - 1] * top
        trace = _framed_systems(strip, float(dt)).solve(load.ravel())[: rhs.values.size - 2]
        out = np.empty(rhs.values.size)
        out[1:-1] = trace
        out[0] = left[0]
        out[-1] = right[0]
        return rhs.with_values(out)

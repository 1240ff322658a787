"""Real-space potential theory: singular kernels, sphere quadrature,
homogeneous matrix-kernel forms, weighted norms, and the flux functional.

Singular quadratures use the midpoint rule with the self cell skipped; the
omitted mass is O(h) relative and is tracked by refinement tests. Matrix
kernel forms come in two execution paths, a direct pair sum and an
FFT-accelerated convolution on the doubled grid, which evaluate the same
lattice sum and must agree to roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import backend
from .errors import (DimensionError, PotlabError, QOutOfRangeError,
                     RadiusOutOfRangeError)
from .fields import Field, Grid, MatrixField, ScalarField, VectorField
from .spectral import (dft, divergence, frac_laplacian_power, gradient,
                       idft, jacobian, relative_mean, require_mean_zero,
                       SpectralField)
from .specfun import bessel_k1, sphere_area

SUPPORT_L1_RTOL = 1e-9


# ---------------------------------------------------------------------------
# sphere quadrature

@dataclass(frozen=True)
class SphereQuadrature:
    """Nodes on S^{n-1} with weights summing to the sphere area."""

    n: int
    nodes: np.ndarray
    weights: np.ndarray

    def moment_matrix(self) -> np.ndarray:
        """Quadrature of omega_i omega_j; target is area/n on the diagonal."""
        return np.einsum("m,mi,mj->ij", self.weights, self.nodes, self.nodes)

    def integrate(self, values: np.ndarray) -> float:
        return float(self.weights @ values)


@lru_cache(maxsize=8)
def sphere_quadrature(n: int, count: int | None = None) -> SphereQuadrature:
    """Uniform angles for n=2; Gauss-Legendre x uniform product for n=3.

    Both rules integrate second moments to machine accuracy, which the
    moment identity gate requires.
    """
    if n == 2:
        m = count or 512
        theta = 2 * np.pi * np.arange(m) / m
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        weights = np.full(m, 2 * np.pi / m)
    elif n == 3:
        m = count or 1024
        mz = max(4, int(round(math.sqrt(m / 4))))
        mphi = 4 * mz
        z, wz = np.polynomial.legendre.leggauss(mz)
        phi = 2 * np.pi * np.arange(mphi) / mphi
        s = np.sqrt(1 - z * z)
        nodes = np.stack([
            np.outer(s, np.cos(phi)).ravel(),
            np.outer(s, np.sin(phi)).ravel(),
            np.repeat(z, mphi),
        ], axis=1)
        weights = np.repeat(wz, mphi) * (2 * np.pi / mphi)
    else:
        raise DimensionError(f"sphere quadrature needs n in {{2,3}}, got {n}")
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return SphereQuadrature(n, nodes, weights)


# ---------------------------------------------------------------------------
# homogeneous integrands

class AbsPowerCombo:
    """Phi(v) = sum_j a_j |v_j|^q, positively homogeneous of degree q."""

    def __init__(self, coeffs, q: float):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.q = float(q)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return (np.abs(v) ** self.q @ self.coeffs)

    def sphere_mean(self, quad: SphereQuadrature) -> float:
        return quad.integrate(self(quad.nodes))


class QuadraticFormIntegrand:
    """Phi(v) = v^t A v, degree 2; used only by critical-exponent probes."""

    def __init__(self, a):
        self.a = np.asarray(a, dtype=float)
        self.q = 2.0

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return np.einsum("...i,ij,...j->...", v, self.a, v)

    def sphere_mean(self, quad: SphereQuadrature) -> float:
        return quad.integrate(self(quad.nodes))


# ---------------------------------------------------------------------------
# matrix kernels

@dataclass(frozen=True)
class MatrixKernel:
    """Homogeneous kernel omega omega^t - shift * I on the unit sphere."""

    kind: str
    n: int
    shift: float

    def entries(self, omega: np.ndarray) -> np.ndarray:
        eye = np.eye(self.n)
        return np.einsum("...i,...j->...ij", omega, omega) - self.shift * eye

    def operator_norm(self, omega: np.ndarray) -> np.ndarray:
        # eigenvalues of omega omega^t - s I are 1 - s (once) and -s
        del omega
        return max(abs(1 - self.shift), abs(self.shift))


def matrix_kernel(kind: str, n: int) -> MatrixKernel:
    shifts = {"M": 1.0 / n, "M_half": 0.5, "N": 0.0}
    if kind not in shifts:
        raise PotlabError(f"unknown kernel kind {kind!r}")
    return MatrixKernel(kind, n, shifts[kind])


# ---------------------------------------------------------------------------
# source extraction

def _source_cells(f: Field, enforce_compact: bool = True):
    """Positions and values of nonzero cells; optionally check compactness."""
    grid = f.grid
    coords = grid.coords()
    pos_all = np.stack([c.ravel() for c in coords], axis=1)
    if isinstance(f, ScalarField):
        vals = f.values.reshape(-1, 1)
    else:
        vals = f.values.reshape(grid.n, -1).T
    scale = np.abs(vals).max()
    mask = np.abs(vals).max(axis=1) > 1e-14 * scale if scale > 0 else np.zeros(len(vals), bool)
    if enforce_compact:
        r = grid.radius().ravel()
        outside = mask & (r > 0.25 * grid.box_len * (1 + 1e-12))
        if outside.any():
            l1_out = np.abs(vals[outside]).sum()
            l1_all = np.abs(vals).sum()
            if l1_out > SUPPORT_L1_RTOL * l1_all:
                raise PotlabError(
                    "field is not compactly supported inside |x| <= L/4 "
                    f"(outside mass fraction {l1_out / l1_all:.2e})")
            mask = mask & ~outside
    pos = np.ascontiguousarray(pos_all[mask])
    return pos, np.ascontiguousarray(vals[mask]), mask


def _all_cells(grid: Grid) -> np.ndarray:
    coords = grid.coords()
    return np.ascontiguousarray(np.stack([c.ravel() for c in coords], axis=1))


# ---------------------------------------------------------------------------
# Newtonian potential and gradient kernel

def newtonian_potential(f: Field) -> Field:
    """Convolution with the fundamental solution of -Laplace.

    Direct midpoint sum with the self cell skipped; the logarithmic kernel
    for n = 2 additionally needs a zero-mean source for decay.
    """
    grid = f.grid
    if grid.n == 2:
        require_mean_zero(f, "Newtonian potential (n=2 log kernel)")
    pos, vals, _ = _source_cells(f)
    tgts = _all_cells(grid)
    hn = grid.h**grid.n
    skip = grid.h / 2
    if isinstance(f, ScalarField):
        out = backend.potential_sum(pos, np.ascontiguousarray(vals[:, 0] * hn),
                                    tgts, grid.n, skip)
        return ScalarField(grid, out.reshape(grid.shape))
    comps = [backend.potential_sum(pos, np.ascontiguousarray(vals[:, i] * hn),
                                   tgts, grid.n, skip).reshape(grid.shape)
             for i in range(grid.n)]
    return VectorField(grid, np.stack(comps))


def gradient_kernel_apply(f: ScalarField, points: np.ndarray) -> np.ndarray:
    """(1/|S^{n-1}|) sum_y (y - x)/|y - x|^n f(y) h^n at the given points.

    The cell containing each point is excluded from the sum.
    """
    grid = f.grid
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    pos, vals, _ = _source_cells(f, enforce_compact=False)
    w = np.ascontiguousarray(vals[:, 0] * grid.h**grid.n)
    out = backend.gradient_sum(pos, w, np.ascontiguousarray(pts), grid.h / 2)
    return out / sphere_area(grid.n)


def a_decomposition(f: ScalarField, x: np.ndarray):
    """Split the gradient-kernel integral into the four annulus pieces.

    Regions are |y| < |x|/2, the middle annulus, and |y| > 2|x|; the first
    piece carries the +x/|x|^n correction whose total is returned as the
    fourth, so the four vectors sum to gradient_kernel_apply(f, x) exactly.
    """
    grid = f.grid
    x = np.asarray(x, dtype=float)
    rx = float(np.linalg.norm(x))
    if rx == 0:
        raise PotlabError("decomposition point must be nonzero")
    pos, vals, _ = _source_cells(f, enforce_compact=False)
    w = vals[:, 0] * grid.h**grid.n
    d = pos - x[None, :]
    r = np.sqrt((d * d).sum(1))
    keep = r > grid.h / 2
    ry = np.sqrt((pos * pos).sum(1))
    n = grid.n
    kern = np.zeros_like(d)
    kern[keep] = d[keep] / r[keep, None] ** n
    corr = x / rx**n
    area = sphere_area(n)
    inner = ry < rx / 2
    outer = ry > 2 * rx
    middle = ~inner & ~outer
    mass_inner = float(w[inner].sum())
    a1 = ((kern[inner] + corr[None, :]) * w[inner, None]).sum(0) / area
    a2 = (kern[middle] * w[middle, None]).sum(0) / area
    a3 = (kern[outer] * w[outer, None]).sum(0) / area
    a4 = -corr * mass_inner / area
    return a1, a2, a3, a4


def a_bound_majorants(f: ScalarField, x: np.ndarray):
    """Majorant integrals of the three annulus bounds, for measured constants."""
    grid = f.grid
    x = np.asarray(x, dtype=float)
    rx = float(np.linalg.norm(x))
    pos, vals, _ = _source_cells(f, enforce_compact=False)
    w = np.abs(vals[:, 0]) * grid.h**grid.n
    d = pos - x[None, :]
    r = np.sqrt((d * d).sum(1))
    keep = r > grid.h / 2
    ry = np.sqrt((pos * pos).sum(1))
    n = grid.n
    inner = ry < rx / 2
    outer = ry > 2 * rx
    middle = ~inner & ~outer & keep
    m1 = float((w[inner] * ry[inner]).sum()) / rx**n
    m2 = float((w[middle] / r[middle] ** (n - 1)).sum())
    m3 = float((w[outer] / ry[outer] ** (n - 1)).sum())
    return m1, m2, m3


# ---------------------------------------------------------------------------
# weighted norms and truncated integrals

def _check_q(n: int, q: float, probe_mode: bool):
    critical = n / (n - 1)
    if q < 1 or (q >= critical and not probe_mode):
        raise QOutOfRangeError(
            f"q = {q:g} outside [1, {critical:g}) and probe mode is off")


def radial_weight(grid: Grid, q: float) -> np.ndarray:
    """|x|^{n(q-1)-q} at cell centers (grid never samples the origin)."""
    n = grid.n
    return grid.radius() ** (n * (q - 1) - q)


def weighted_lq_norm(f, q: float, probe_mode: bool = False) -> float:
    """(integral of |f|^q |x|^{n(q-1)-q} dx)^{1/q} by the midpoint rule."""
    grid = f.grid
    _check_q(grid.n, q, probe_mode)
    mag = f.magnitude()
    val = float((mag**q * radial_weight(grid, q)).sum() * grid.h**grid.n)
    return val ** (1.0 / q)


def grad_potential(f: ScalarField, refined: bool = False) -> VectorField:
    """Spectral gradient of the inverse Laplacian of f.

    With ``refined`` the composite multiplier i xi / |xi|^2 is applied in
    one pass with the near-origin subgrid synthesis."""
    if not refined:
        return gradient(frac_laplacian_power(f, -2.0))
    from .spectral import vector_multiplier_refined

    grid = f.grid
    stacked = VectorField(grid, np.repeat(f.values[None, ...], grid.n, axis=0))

    def apply(mesh, mag2, ghat):
        return np.stack([1j * mesh[i] / mag2 * ghat[i] for i in range(grid.n)])

    return vector_multiplier_refined(stacked, apply)


def truncated_phi_integral(f: ScalarField, phi, q: float, radius: float,
                           probe_mode: bool = False,
                           grad_u: VectorField | None = None) -> float:
    """Signed integral of Phi(grad u) |x|^{n(q-1)-q} over |x| < R."""
    grid = f.grid
    _check_q(grid.n, q, probe_mode)
    if not 0 < radius <= grid.box_len / 2:
        raise RadiusOutOfRangeError(f"radius {radius:g} outside (0, L/2]")
    gu = grad_u if grad_u is not None else grad_potential(f)
    integrand = phi(np.moveaxis(gu.values, 0, -1)) * radial_weight(grid, q)
    mask = grid.radius() < radius
    return float(integrand[mask].sum() * grid.h**grid.n)


def phi_integral_ladder(f: ScalarField, phi, q: float, radii,
                        probe_mode: bool = False,
                        grad_u: VectorField | None = None) -> np.ndarray:
    """truncated_phi_integral at every radius of a ladder, via prefix sums."""
    grid = f.grid
    _check_q(grid.n, q, probe_mode)
    gu = grad_u if grad_u is not None else grad_potential(f)
    integrand = (phi(np.moveaxis(gu.values, 0, -1)) * radial_weight(grid, q)).ravel()
    r = grid.radius().ravel()
    order = np.argsort(r, kind="stable")
    csum = np.concatenate([[0.0], np.cumsum(integrand[order])])
    idx = np.searchsorted(r[order], np.asarray(radii), side="left")
    return csum[idx] * grid.h**grid.n


def default_radius_ladder(grid: Grid, count: int = 64) -> np.ndarray:
    """Geometric ladder of truncation radii from 2h to L/2."""
    return np.geomspace(2 * grid.h, grid.box_len / 2, count)


# ---------------------------------------------------------------------------
# matrix kernel forms and convolutions

def matrix_kernel_form(g: VectorField, kernel: MatrixKernel, path: str = "auto") -> float:
    """Double integral of (K((x-y)/|x-y|) g(x), g(y)) over all cell pairs.

    Self pairs contribute zero (the kernel is bounded and the direction is
    undefined on the diagonal). ``path`` selects "direct" pair summation or
    the "fft" convolution on the doubled grid; both evaluate the same sum.
    """
    grid = g.grid
    if path == "auto":
        path = "fft" if grid.ncells >= 32**3 else "direct"
    if path == "direct":
        pos, vals, _ = _source_cells(g)
        return backend.pair_quadratic_form(pos, vals, kernel.shift, grid.h / 2) \
            * grid.h ** (2 * grid.n)
    if path != "fft":
        raise PotlabError(f"unknown path {path!r}")
    conv = _kernel_convolve_values(g, kernel)
    return float((conv * g.values).sum() * grid.h ** (2 * grid.n))


@lru_cache(maxsize=4)
def _kernel_offset_entries(grid: Grid, kind: str):
    """Kernel entries on the doubled offset lattice, origin set to zero.

    Entries are returned as real-FFT spectra, upper triangle only (the
    kernel is symmetric in (j, k))."""
    n = grid.n
    kernel = matrix_kernel(kind, n)
    ax = np.fft.fftfreq(2 * grid.npts) * 2 * grid.npts * grid.h
    mesh = np.meshgrid(*([ax] * n), indexing="ij")
    r = np.sqrt(sum(m * m for m in mesh))
    rsafe = np.where(r == 0, np.inf, r)
    out = {}
    for j in range(n):
        for k in range(j, n):
            vals = mesh[j] * mesh[k] / rsafe**2
            if j == k:
                vals = vals - kernel.shift * (r > 0)
            out[(j, k)] = np.fft.rfftn(vals)
    return out


def _kernel_convolve_values(g: VectorField, kernel: MatrixKernel) -> np.ndarray:
    """(K * g) as a lattice sum, evaluated by FFT on the doubled grid."""
    grid = g.grid
    n = grid.n
    npts = grid.npts
    shape = (2 * npts,) * n
    hats = _kernel_offset_entries(grid, kernel.kind)
    pads = []
    for k in range(n):
        pad = np.zeros(shape)
        pad[(slice(0, npts),) * n] = g.values[k]
        pads.append(np.fft.rfftn(pad))
    out = np.zeros((n,) + grid.shape)
    corner = (slice(0, npts),) * n
    axes = tuple(range(n))
    for j in range(n):
        acc = None
        for k in range(n):
            key = (j, k) if j <= k else (k, j)
            term = hats[key] * pads[k]
            acc = term if acc is None else acc + term
        out[j] = np.fft.irfftn(acc, s=shape, axes=axes)[corner]
    return out


def kernel_convolution(g: VectorField, kernel: MatrixKernel, scale: float,
                       path: str = "fft") -> VectorField:
    """scale * sum_y K((x-y)/|x-y|) g(y) h^n with the self cell skipped."""
    grid = g.grid
    require_mean_zero(g, "kernel convolution", rtol=1e-8)
    if path == "fft":
        vals = _kernel_convolve_values(g, kernel) * scale * grid.h**grid.n
        return VectorField(grid, vals)
    if path != "direct":
        raise PotlabError(f"unknown path {path!r}")
    pos, vals, _ = _source_cells(g)
    tgts = _all_cells(grid)
    out = backend.kernel_apply(pos, vals, tgts, kernel.shift, grid.h / 2)
    out = out.T.reshape((grid.n,) + grid.shape) * scale * grid.h**grid.n
    return VectorField(grid, out)


# ---------------------------------------------------------------------------
# flux functional and matrix calculus

def interpolate_field(f: Field, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of field values at arbitrary points."""
    grid = f.grid
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x0 = float(grid.axis()[0])
    t = (pts - x0) / grid.h
    base = np.floor(t).astype(int)
    frac = t - base
    base = np.clip(base, 0, grid.npts - 2)
    frac = np.clip(t - base, 0.0, 1.0)
    comps = f.values[None, ...] if isinstance(f, ScalarField) else f.values
    ncomp = comps.shape[0]
    out = np.zeros((pts.shape[0], ncomp))
    n = grid.n
    for corner in range(2**n):
        bits = [(corner >> i) & 1 for i in range(n)]
        weight = np.ones(pts.shape[0])
        idx = []
        for i, b in enumerate(bits):
            weight = weight * (frac[:, i] if b else 1 - frac[:, i])
            idx.append(base[:, i] + b)
        vals = comps[(slice(None),) + tuple(idx)]
        out += weight[None, :].T * vals.T
    return out[:, 0] if isinstance(f, ScalarField) else out


def flux_functional(v: VectorField, radius: float,
                    quad: SphereQuadrature | None = None) -> float:
    """Radial flux integral of v over the sphere of given radius.

    Uses the unit-sphere measure: integral of (y/|y|) . v(r y/|y|) d omega.
    """
    grid = v.grid
    if not 0 < radius < grid.box_len / 2:
        raise RadiusOutOfRangeError(f"radius {radius:g} outside (0, L/2)")
    quad = quad or sphere_quadrature(grid.n)
    pts = radius * quad.nodes
    vals = interpolate_field(v, pts)
    return float(quad.weights @ (vals * quad.nodes).sum(axis=1))


def matrix_curl(u: VectorField) -> MatrixField:
    """Skew matrix of (d u_i / d x_j - d u_j / d x_i), spectral derivatives."""
    jac = jacobian(u)
    return MatrixField(u.grid, jac.values - np.swapaxes(jac.values, 0, 1))


def row_divergence(fmat: MatrixField) -> VectorField:
    """Vector of divergences of the matrix columns (div F_1, ..., div F_n)."""
    grid = fmat.grid
    from .spectral import _freq_mesh  # shared cached mesh

    mesh = _freq_mesh(grid)
    out = []
    for j in range(grid.n):
        col = VectorField(grid, fmat.values[:, j])
        chat = dft(col).coeffs
        dhat = sum(1j * mesh[i] * chat[i] for i in range(grid.n))
        out.append(idft(SpectralField(grid, dhat)).values)
    return VectorField(grid, np.stack(out))


def ring_flux_matrix(fmat: MatrixField, radius: float,
                     quad: SphereQuadrature | None = None) -> np.ndarray:
    """Fluxes of all matrix columns at one radius: P(F_j; r) for each j."""
    return np.array([flux_functional(fmat.column(j), radius, quad)
                     for j in range(fmat.grid.n)])


def remark5_kernel_form(g: VectorField) -> float:
    """Double sum of (omega . g(x)) (omega . g(y)) t K1(t), t = |x - y|."""
    grid = g.grid
    pos, vals, _ = _source_cells(g)
    return backend.pair_quadratic_form_bessel(pos, vals, grid.h / 2) \
        * grid.h ** (2 * grid.n)


def bessel_pair_bound_ok(g: VectorField) -> bool:
    """t K1(t) <= 1 on the pair distances actually evaluated."""
    pos, _, _ = _source_cells(g)
    d = pos[:, None, :] - pos[None, :, :]
    r = np.sqrt((d * d).sum(-1)).ravel()
    r = r[r > g.grid.h / 2]
    sample = r[:: max(1, len(r) // 4096)]
    return bool(np.all(sample * bessel_k1(sample) <= 1.0 + 1e-12))

"""Grids, field containers and generators of structured test fields.

All fields live on a uniform periodic lattice over a centered box. Cell
centers are offset by half a spacing so no sample lands on the origin,
which lets singular weights and kernels be evaluated everywhere.
Compactly supported recipes keep their support inside |x| <= L/4 so that
periodic images of slowly decaying potentials stay small.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import PotlabError, SupportOverflowError

SUPPORT_FRACTION = 0.25  # compact recipes fit in |x| <= SUPPORT_FRACTION * L
BUMP_SIGMAS = 2.5        # nominal extent of a Gaussian bump, in widths

_MAX_N = {2: 256, 3: 64}


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on [-L/2, L/2)^n with cell-centered samples."""

    n: int
    box_len: float
    npts: int

    @property
    def h(self) -> float:
        return self.box_len / self.npts

    @property
    def shape(self) -> tuple:
        return (self.npts,) * self.n

    @property
    def ncells(self) -> int:
        return self.npts**self.n

    def axis(self) -> np.ndarray:
        return _axis(self)

    def coords(self) -> tuple:
        """Meshgrid of cell-center coordinates, one array per component."""
        return _coords(self)

    def radius(self) -> np.ndarray:
        return _radius(self)

    def refine(self) -> "Grid":
        return Grid(self.n, self.box_len, 2 * self.npts)


@lru_cache(maxsize=64)
def _axis(grid: Grid) -> np.ndarray:
    h = grid.h
    x = (np.arange(grid.npts) + 0.5) * h - grid.box_len / 2
    x.setflags(write=False)
    return x


@lru_cache(maxsize=64)
def _coords(grid: Grid) -> tuple:
    mesh = np.meshgrid(*([_axis(grid)] * grid.n), indexing="ij")
    for m in mesh:
        m.setflags(write=False)
    return tuple(mesh)


@lru_cache(maxsize=64)
def _radius(grid: Grid) -> np.ndarray:
    r = np.sqrt(sum(c * c for c in _coords(grid)))
    r.setflags(write=False)
    return r


def make_grid(n: int, box_len: float, npts: int) -> Grid:
    """Validated grid constructor; rejects odd point counts and unsupported n."""
    if n not in (2, 3):
        raise PotlabError(f"dimension must be 2 or 3, got {n}")
    if npts % 2 != 0:
        raise PotlabError(f"point count must be even, got {npts}")
    if not 8 <= npts <= _MAX_N[n]:
        raise PotlabError(f"point count {npts} outside [8, {_MAX_N[n]}] for n={n}")
    if not box_len > 0:
        raise PotlabError("box length must be positive")
    return Grid(n, float(box_len), npts)


def _freeze(values: np.ndarray) -> np.ndarray:
    values = np.ascontiguousarray(values, dtype=np.float64)
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class ScalarField:
    grid: Grid
    values: np.ndarray
    support_radius: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        if self.values.shape != self.grid.shape:
            raise PotlabError("scalar values shape does not match grid")

    @property
    def ncomp(self) -> int:
        return 1

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.h**self.grid.n)

    def l1_norm(self) -> float:
        return float(np.abs(self.values).sum() * self.grid.h**self.grid.n)

    def l2_norm(self) -> float:
        return float(math.sqrt((self.values**2).sum() * self.grid.h**self.grid.n))

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def __mul__(self, c: float) -> "ScalarField":
        return ScalarField(self.grid, self.values * c, self.support_radius)

    __rmul__ = __mul__

    def __add__(self, other: "ScalarField") -> "ScalarField":
        _check_same_grid(self, other)
        return ScalarField(self.grid, self.values + other.values,
                           _merge_support(self.support_radius, other.support_radius))


@dataclass(frozen=True)
class VectorField:
    """n real components sharing one grid; values has shape (n,) + grid.shape."""

    grid: Grid
    values: np.ndarray
    support_radius: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        if self.values.shape != (self.grid.n,) + self.grid.shape:
            raise PotlabError("vector values shape does not match grid")

    @property
    def ncomp(self) -> int:
        return self.grid.n

    def component(self, i: int) -> ScalarField:
        return ScalarField(self.grid, self.values[i], self.support_radius)

    @property
    def components(self) -> tuple:
        return tuple(self.component(i) for i in range(self.grid.n))

    def integral(self) -> np.ndarray:
        return self.values.sum(axis=tuple(range(1, self.grid.n + 1))) * self.grid.h**self.grid.n

    def l1_norm(self) -> float:
        return float(self.magnitude().sum() * self.grid.h**self.grid.n)

    def l2_norm(self) -> float:
        return float(math.sqrt((self.values**2).sum() * self.grid.h**self.grid.n))

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean length."""
        return np.sqrt((self.values**2).sum(axis=0))

    def __mul__(self, c: float) -> "VectorField":
        return VectorField(self.grid, self.values * c, self.support_radius)

    __rmul__ = __mul__

    def __add__(self, other: "VectorField") -> "VectorField":
        _check_same_grid(self, other)
        return VectorField(self.grid, self.values + other.values,
                           _merge_support(self.support_radius, other.support_radius))


@dataclass(frozen=True)
class MatrixField:
    """n x n entries sharing one grid; values has shape (n, n) + grid.shape."""

    grid: Grid
    values: np.ndarray
    support_radius: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        n = self.grid.n
        if self.values.shape != (n, n) + self.grid.shape:
            raise PotlabError("matrix values shape does not match grid")

    def entry(self, i: int, j: int) -> ScalarField:
        return ScalarField(self.grid, self.values[i, j], self.support_radius)

    def column(self, j: int) -> VectorField:
        return VectorField(self.grid, self.values[:, j], self.support_radius)

    def magnitude(self) -> np.ndarray:
        """Pointwise Frobenius norm."""
        return np.sqrt((self.values**2).sum(axis=(0, 1)))

    def is_skew_symmetric(self, tol: float = 1e-12) -> bool:
        scale = np.abs(self.values).max() or 1.0
        askew = self.values + np.swapaxes(self.values, 0, 1)
        return bool(np.abs(askew).max() <= tol * scale)

    def transpose(self) -> "MatrixField":
        return MatrixField(self.grid, np.swapaxes(self.values, 0, 1), self.support_radius)


Field = ScalarField | VectorField


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise PotlabError("fields live on different grids")


def _merge_support(ra, rb):
    if ra is None or rb is None:
        return None
    return max(ra, rb)


# ---------------------------------------------------------------------------
# recipes

RECIPE_KINDS = (
    "gaussian_bump",
    "dipole_pair",
    "radial_ring",
    "divfree_projected",
    "gradient_of",
    "extremizer_northpole",
)


@dataclass(frozen=True)
class FieldRecipe:
    """Serializable description of one generated field.

    ``params`` is a flat name -> number map; vector-valued parameters are
    split into suffixed entries (center_x, center_y, ...). ``seed`` feeds
    the PRNG of the random kinds and is ignored by deterministic ones.
    """

    kind: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in RECIPE_KINDS:
            raise PotlabError(f"unknown recipe kind {self.kind!r}")
        for k, v in self.params.items():
            if not isinstance(k, str) or not isinstance(v, (int, float)):
                raise PotlabError("recipe params must map names to numbers")

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "params": self.params, "seed": self.seed},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FieldRecipe":
        data = json.loads(text)
        extra = set(data) - {"kind", "params", "seed"}
        if extra:
            raise PotlabError(f"unknown recipe keys {sorted(extra)}")
        return cls(data["kind"], dict(data.get("params", {})), data.get("seed"))


def _vec_param(params, name, n, default=None):
    names = [f"{name}_{ax}" for ax in "xyz"[:n]]
    if not any(nm in params for nm in names):
        if default is None:
            raise PotlabError(f"recipe needs {name}_x.. parameters")
        return np.asarray(default, dtype=float)
    return np.array([float(params.get(nm, 0.0)) for nm in names])


def _support_radius(grid: Grid) -> float:
    return SUPPORT_FRACTION * grid.box_len


def _check_bump_fits(grid: Grid, center: np.ndarray, width: float):
    extent = float(np.linalg.norm(center)) + BUMP_SIGMAS * width
    if extent > _support_radius(grid) + 1e-12:
        raise SupportOverflowError(
            f"bump at |c|={np.linalg.norm(center):.3g} width {width:.3g} "
            f"extends past |x| <= {_support_radius(grid):.3g}")


def _gaussian(grid: Grid, center: np.ndarray, width: float, amp: float) -> np.ndarray:
    coords = grid.coords()
    r2 = sum((coords[i] - center[i]) ** 2 for i in range(grid.n))
    vals = amp * np.exp(-r2 / (2.0 * width**2))
    vals[_radius(grid) > _support_radius(grid)] = 0.0
    return vals


@lru_cache(maxsize=64)
def reference_bump(grid: Grid) -> ScalarField:
    """Fixed positive bump used to remove means without losing compactness."""
    vals = _gaussian(grid, np.zeros(grid.n), grid.box_len / 20.0, 1.0)
    return ScalarField(grid, vals, support_radius=_support_radius(grid))


def mean_subtract(f: Field) -> Field:
    """Remove the discrete mean by subtracting a scaled reference bump.

    The subtraction is supported in |x| <= L/4, so compactly supported
    inputs stay compactly supported. The output's discrete sum is zero to
    machine precision; already-zero means are left untouched.
    """
    ref = reference_bump(f.grid).values
    refsum = ref.sum()
    if isinstance(f, ScalarField):
        total = f.values.sum()
        if total == 0.0:
            return f
        return ScalarField(f.grid, f.values - (total / refsum) * ref,
                           _merge_support(f.support_radius, _support_radius(f.grid)))
    vals = f.values.copy()
    for i in range(f.grid.n):
        total = vals[i].sum()
        if total != 0.0:
            vals[i] -= (total / refsum) * ref
    return VectorField(f.grid, vals,
                       _merge_support(f.support_radius, _support_radius(f.grid)))


def _gen_gaussian_bump(recipe, grid):
    p = recipe.params
    center = _vec_param(p, "center", grid.n, default=np.zeros(grid.n))
    width = float(p.get("width", 1.0))
    amp = float(p.get("amplitude", 1.0))
    _check_bump_fits(grid, center, width)
    return ScalarField(grid, _gaussian(grid, center, width, amp),
                       support_radius=_support_radius(grid))


def _gen_dipole_pair(recipe, grid):
    p = recipe.params
    center = _vec_param(p, "center", grid.n)
    width = float(p.get("width", 0.5))
    amp = float(p.get("amplitude", 1.0))
    _check_bump_fits(grid, center, width)
    # grid is symmetric under x -> -x, so the pair cancels exactly
    scalar = _gaussian(grid, center, width, amp) - _gaussian(grid, -center, width, amp)
    names = [f"direction_{ax}" for ax in "xyz"[:grid.n]]
    if any(nm in p for nm in names):
        direction = _vec_param(p, "direction", grid.n)
        norm = np.linalg.norm(direction)
        if norm == 0:
            raise PotlabError("dipole direction must be nonzero")
        direction = direction / norm
        vals = np.stack([direction[i] * scalar for i in range(grid.n)])
        return VectorField(grid, vals, support_radius=_support_radius(grid))
    return ScalarField(grid, scalar, support_radius=_support_radius(grid))


def _gen_radial_ring(recipe, grid):
    p = recipe.params
    r0 = float(p.get("radius", grid.box_len / 8))
    width = float(p.get("width", r0 / 4))
    amp = float(p.get("amplitude", 1.0))
    if r0 + BUMP_SIGMAS * width > _support_radius(grid) + 1e-12:
        raise SupportOverflowError("ring extends past |x| <= L/4")
    r = _radius(grid)
    vals = amp * np.exp(-((r - r0) ** 2) / (2 * width**2))
    vals = np.where(r > _support_radius(grid), 0.0, vals)
    ring = ScalarField(grid, vals, support_radius=_support_radius(grid))
    return mean_subtract(ring)


def _random_scalar_sum(grid, rng, nbumps, wmin, wmax, amp):
    vals = np.zeros(grid.shape)
    cmax = _support_radius(grid) - BUMP_SIGMAS * wmax
    if cmax <= 0:
        raise SupportOverflowError("widths too large for the box")
    for _ in range(nbumps):
        center = rng.uniform(-cmax / math.sqrt(grid.n), cmax / math.sqrt(grid.n), grid.n)
        width = rng.uniform(wmin, wmax)
        vals += _gaussian(grid, center, width, amp * rng.normal())
    return vals


def _gen_divfree_projected(recipe, grid):
    from .spectral import leray_project  # deferred: avoids import cycle

    p = recipe.params
    rng = np.random.default_rng(0 if recipe.seed is None else recipe.seed)
    nbumps = int(p.get("nbumps", 3))
    wmin = float(p.get("width_min", grid.box_len / 20))
    wmax = float(p.get("width_max", grid.box_len / 12))
    amp = float(p.get("amplitude", 1.0))
    comps = [_random_scalar_sum(grid, rng, nbumps, wmin, wmax, amp) for _ in range(grid.n)]
    raw = mean_subtract(VectorField(grid, np.stack(comps)))
    return leray_project(raw)


def _gen_gradient_of(recipe, grid):
    from .spectral import gradient

    p = recipe.params
    rng = np.random.default_rng(0 if recipe.seed is None else recipe.seed)
    nbumps = int(p.get("nbumps", 3))
    wmin = float(p.get("width_min", grid.box_len / 20))
    wmax = float(p.get("width_max", grid.box_len / 12))
    amp = float(p.get("amplitude", 1.0))
    u = ScalarField(grid, _random_scalar_sum(grid, rng, nbumps, wmin, wmax, amp),
                    support_radius=_support_radius(grid))
    return gradient(u)


def _gen_extremizer_northpole(recipe, grid):
    """Annular field along one direction, concentrated near that direction
    on the sphere with angular mollifier width rho.

    The direction defaults to the last axis (the north pole); axis_*
    parameters rotate the construction, e.g. onto the grid diagonal where
    a single file of cell centers exists, which is what the sharpness
    sweep needs on a cell-centered lattice. The radial profile is a
    tapered plateau by default; gauss_profile=1 selects a Gaussian bump.
    """
    p = recipe.params
    r_in = float(p.get("r_inner", 0.3 * _support_radius(grid)))
    r_out = float(p.get("r_outer", 0.9 * _support_radius(grid)))
    rho = float(p.get("rho", 0.3))
    if r_out > _support_radius(grid) + 1e-12:
        raise SupportOverflowError("annulus extends past |x| <= L/4")
    if not 0 < r_in < r_out:
        raise PotlabError("need 0 < r_inner < r_outer")
    axis = np.zeros(grid.n)
    axis[grid.n - 1] = 1.0
    axis = _vec_param(p, "axis", grid.n, default=axis)
    norm = np.linalg.norm(axis)
    if norm == 0:
        raise PotlabError("extremizer axis must be nonzero")
    axis = axis / norm
    r = _radius(grid)
    if p.get("gauss_profile", 0.0):
        mid, wid = 0.5 * (r_in + r_out), (r_out - r_in) / 6.0
        eta = np.exp(-((r - mid) ** 2) / (2 * wid**2))
    else:
        taper = 0.15 * (r_out - r_in)
        ramp = np.minimum(np.clip((r - r_in) / taper, 0.0, 1.0),
                          np.clip((r_out - r) / taper, 0.0, 1.0))
        eta = 0.5 - 0.5 * np.cos(np.pi * ramp)
    eta = np.where((r < r_in) | (r > r_out), 0.0, eta)
    coords = grid.coords()
    proj = sum(axis[i] * coords[i] for i in range(grid.n))
    with np.errstate(invalid="ignore", divide="ignore"):
        cosang = np.where(r > 0, proj / np.where(r > 0, r, 1.0), 0.0)
    angle = np.arccos(np.clip(cosang, -1.0, 1.0))
    phi = np.exp(-(angle**2) / (2 * rho**2))
    vals = np.stack([axis[i] * eta * phi for i in range(grid.n)])
    return VectorField(grid, vals, support_radius=r_out)


_GENERATORS = {
    "gaussian_bump": _gen_gaussian_bump,
    "dipole_pair": _gen_dipole_pair,
    "radial_ring": _gen_radial_ring,
    "divfree_projected": _gen_divfree_projected,
    "gradient_of": _gen_gradient_of,
    "extremizer_northpole": _gen_extremizer_northpole,
}


def generate(recipe: FieldRecipe, grid: Grid) -> Field:
    """Produce the field described by a recipe; deterministic given recipe + seed."""
    return _GENERATORS[recipe.kind](recipe, grid)


def generate_sum(recipes, grid: Grid) -> Field:
    """Superpose several recipes of the same rank (all scalar or all vector)."""
    if not recipes:
        raise PotlabError("need at least one recipe")
    out = generate(recipes[0], grid)
    for r in recipes[1:]:
        out = out + generate(r, grid)
    return out


# ---------------------------------------------------------------------------
# randomized ensembles used by the inequality suites

def _default_widths(grid: Grid) -> tuple:
    """Bump width range in length units.

    Depends only on the box so that the same recipe draws describe the
    same continuum field at every resolution (refinement studies compare
    N against 2N on identical fields). The range resolves on the coarsest
    grids in use while leaving room to decenter inside |x| <= L/4.
    """
    return 0.065 * grid.box_len, 0.085 * grid.box_len


def random_mean_zero_scalar(grid: Grid, rng: np.random.Generator,
                            nbumps: int = 3, width_range=None) -> ScalarField:
    """Sum of random bumps, mean-removed; widths in length units."""
    wmin, wmax = width_range or _default_widths(grid)
    vals = _random_scalar_sum(grid, rng, nbumps, wmin, wmax, 1.0)
    return mean_subtract(ScalarField(grid, vals, support_radius=_support_radius(grid)))


def random_scalar_bumps(grid: Grid, rng: np.random.Generator,
                        nbumps: int = 3, width_range=None) -> ScalarField:
    wmin, wmax = width_range or _default_widths(grid)
    vals = _random_scalar_sum(grid, rng, nbumps, wmin, wmax, 1.0)
    return ScalarField(grid, vals, support_radius=_support_radius(grid))


def random_dipole_ensemble(grid: Grid, rng: np.random.Generator,
                           npairs: int = 3, width_range=None,
                           jitter: float = 0.18) -> VectorField:
    """Mean-zero vector field built from dipole bump pairs.

    Each pair is exactly antisymmetric, hence mean-zero. Component
    directions cluster around one random axis and pair separations around
    a perpendicular one (with ``jitter``), so the homogeneous quadratic
    kernel forms of the ensemble stay away from zero.
    """
    n = grid.n
    common = rng.normal(size=n)
    common /= np.linalg.norm(common)
    v = rng.normal(size=n)
    v -= (v @ common) * common
    common_perp = v / np.linalg.norm(v)
    out = None
    rmax = _support_radius(grid)
    wmin, wmax = width_range or _default_widths(grid)
    for _ in range(npairs):
        width = rng.uniform(wmin, wmax)
        direction = common + jitter * rng.normal(size=n)
        direction /= np.linalg.norm(direction)
        axis = common_perp + jitter * rng.normal(size=n)
        axis /= np.linalg.norm(axis)
        cmax = max(rmax - BUMP_SIGMAS * width, 0.0)
        center = axis * rng.uniform(0.5, 0.95) * cmax
        params = {"width": width, "amplitude": float(rng.uniform(0.6, 1.4))}
        for ax, c in zip("xyz", center):
            params[f"center_{ax}"] = float(c)
        for ax, d in zip("xyz", direction):
            params[f"direction_{ax}"] = float(d)
        fld = generate(FieldRecipe("dipole_pair", params), grid)
        out = fld if out is None else out + fld
    return out

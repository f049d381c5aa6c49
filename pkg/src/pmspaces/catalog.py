"""Builders for concrete finite perimeter-measure spaces.

Each builder returns ``(space, omega)``: a cut-perimeter space and the
default domain inside it.  Where a domain should have a boundary, the space
contains extra exterior points around it so that ``P(omega)`` counts the
edges leaving the domain.

Families
--------
``build_grid``
    cell-centred grids with volume density ``g`` and edge density
    ``h(x, nu)``; vertex mass ``g * spacing**2``, edge weight
    ``h * spacing`` (4-neighbour, the crystalline ``|.|_1`` perimeter) or the
    two-slope Cauchy-Crofton weights ``pi/8 * spacing`` (axis) and
    ``pi/(8 sqrt 2) * spacing`` (diagonal) on 8 neighbours.
``build_radial_disk``
    polar cells of the unit disk with mass density ``|x|^-alpha``; radial
    cuts carry their arc length and angular cuts their radial length, so the
    disks ``B_r`` at ring radii have exact length ``2 pi r`` and exact mass.
``build_gaussian_line``
    1-D grid with volume and edge density the standard normal density.
``build_kernel_space``
    complete graph with ``w(x, y) = 2 K(x, y) m(x) m(y)``; the factor 2
    counts both ordered pairs of the double integral.
``build_metric_graph``
    subdivided metric graph; a node carries half the length of its incident
    segments and every segment crossing costs 1.
``build_dumbbell``
    complete-graph lobes joined in a chain by weak bridges.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import numeric as num
from .errors import PositivityError, SymmetryError
from .space import FiniteSpace


def _space(measure, edges, labels=(), exact=False) -> FiniteSpace:
    return FiniteSpace.from_cut(measure, edges, labels, exact=exact)


# ---------------------------------------------------------------------------
# small graphs


def path_graph(n: int = 4, weights=None, measures=None, exact: bool = False):
    """Path ``v1 - v2 - ... - vn``; default domain is all but the last vertex."""
    weights = [1] * (n - 1) if weights is None else weights
    measures = [1] * n if measures is None else measures
    labels = [f"v{i + 1}" for i in range(n)]
    edges = [(i, i + 1, weights[i]) for i in range(n - 1)]
    space = _space(measures, edges, labels, exact)
    omega = np.arange(n) < n - 1
    return space, omega


def complete_graph(n: int = 3, weight=1, exact: bool = False):
    edges = [(i, j, weight) for i in range(n) for j in range(i + 1, n)]
    space = _space([1] * n, edges, exact=exact)
    return space, space.full()


def cycle_graph(n: int, weight=1, exact: bool = False):
    """Cycle on ``n`` vertices; the default domain drops vertex 0."""
    space = _space([1] * n, [(i, (i + 1) % n, weight) for i in range(n)], exact=exact)
    omega = space.full()
    omega[0] = False
    return space, omega


def star_graph(leaves: int, weight=1, exact: bool = False):
    """Centre 0 with unit-weight spokes; the domain is the centre and all but one leaf."""
    space = _space([1] * (leaves + 1), [(0, i, weight) for i in range(1, leaves + 1)], exact=exact)
    omega = space.full()
    omega[-1] = False
    return space, omega


def random_graph(n: int, density: float, seed: int, exact: bool = True, omega_size=None):
    """Connected random graph with small rational weights and masses.

    A spanning path guarantees connectivity; extra edges appear with
    probability ``density``.  Weights are multiples of 1/4 in ``[1/4, 2]``,
    masses multiples of 1/2 in ``[1/2, 2]``.
    """
    rng = np.random.default_rng([seed, n])
    order = rng.permutation(n)
    pairs = {(min(a, b), max(a, b)) for a, b in zip(order, order[1:])}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                pairs.add((i, j))
    edges = [(a, b, Fraction(int(rng.integers(1, 9)), 4)) for a, b in sorted(pairs)]
    masses = [Fraction(int(rng.integers(1, 5)), 2) for _ in range(n)]
    space = _space(masses, edges, exact=exact)
    k = n - 1 if omega_size is None else omega_size
    omega = np.zeros(n, dtype=bool)
    omega[rng.permutation(n)[:k]] = True
    return space, omega


def twin_components(size: int = 3, exact: bool = True):
    """Two equal complete graphs, each tied to one shared exterior point."""
    n = 2 * size + 1
    ground = n - 1
    edges = []
    for base in (0, size):
        edges += [(base + i, base + j, 1) for i in range(size) for j in range(i + 1, size)]
        edges += [(base + i, ground, 1) for i in range(size)]
    space = _space([1] * n, edges, exact=exact)
    omega = space.full()
    omega[ground] = False
    return space, omega


# ---------------------------------------------------------------------------
# weighted grids


@dataclass
class GridSpec:
    """Cell-centred grid over ``bounds`` with ``nx * ny`` cells.

    ``g(x, y)`` is the volume density and ``h(x, y, nu)`` the edge density
    for a cut with unit normal ``nu``; both default to 1.  ``spacing``
    defaults to the cell width along ``x`` and must match the ``y`` width.
    """

    nx: int
    ny: int
    bounds: tuple = ((0.0, 1.0), (0.0, 1.0))
    g: Callable | None = None
    h: Callable | None = None
    neighborhood: int = 4
    spacing: float | None = None
    exact: bool = False

    def __post_init__(self):
        if self.neighborhood not in (4, 8):
            raise ValueError("neighborhood must be 4 or 8")
        (x0, x1), (y0, y1) = self.bounds
        dx, dy = (x1 - x0) / self.nx, (y1 - y0) / self.ny
        if self.spacing is None:
            self.spacing = dx
        if not (self.spacing > 0 and np.isclose(dx, self.spacing) and np.isclose(dy, self.spacing)):
            raise ValueError("cells must be square with the given spacing")


def build_grid(spec: GridSpec, embed_boundary: bool = True):
    """Grid space and its interior domain.

    With ``embed_boundary`` a ring of exterior cells is added, connected to
    the domain and to each other with the same rule, so ``P(omega)`` is the
    weighted length of the outer boundary.
    """
    (x0, x1), (y0, _) = spec.bounds
    d = spec.spacing
    ring = 1 if embed_boundary else 0
    NX, NY = spec.nx + 2 * ring, spec.ny + 2 * ring
    exact = spec.exact
    g = spec.g or (lambda x, y: 1)
    h = spec.h or (lambda x, y, nu: 1)

    def centre(i, j):
        return x0 + (i - ring + 0.5) * d, y0 + (j - ring + 0.5) * d

    def index(i, j):
        return j * NX + i

    measure, labels = [], []
    inside = np.zeros(NX * NY, dtype=bool)
    # exact spacing from the bounds, so that 1/3 stays 1/3
    dd = num.number(x1, exact) - num.number(x0, exact)
    dd = dd / spec.nx if exact else d
    for j in range(NY):
        for i in range(NX):
            x, y = centre(i, j)
            gv = g(x, y)
            if not gv > 0:
                raise PositivityError(f"volume density is not positive at ({x:.4g}, {y:.4g})")
            measure.append(num.number(gv, exact) * dd * dd)
            labels.append(f"c{i - ring}_{j - ring}")
            inside[index(i, j)] = ring <= i < NX - ring and ring <= j < NY - ring

    steps = [((1, 0), 1), ((0, 1), 1)]
    if spec.neighborhood == 8:
        steps += [((1, 1), 2), ((1, -1), 2)]
    edges = []
    for j in range(NY):
        for i in range(NX):
            for (di, dj), kind in steps:
                a, b = i + di, j + dj
                if not (0 <= a < NX and 0 <= b < NY):
                    continue
                xa, ya = centre(i, j)
                xb, yb = centre(a, b)
                length = np.hypot(di, dj)
                nu = (di / length, dj / length)
                hv = h(0.5 * (xa + xb), 0.5 * (ya + yb), nu)
                if spec.neighborhood == 4:
                    coef = num.number(1, exact)
                elif kind == 1:
                    coef = num.number(np.pi / 8, exact)
                else:
                    coef = num.number(np.pi / (8 * np.sqrt(2)), exact)
                edges.append((index(i, j), index(a, b), num.number(hv, exact) * coef * dd))
    space = _space(measure, edges, labels, exact)
    return space, inside


def unit_square(n: int, neighborhood: int = 4, exact: bool = False):
    """``n x n`` unit-square grid with an exterior ring; ``omega`` is the square."""
    return build_grid(GridSpec(n, n, neighborhood=neighborhood, exact=exact))


def build_radial_disk(rings: int, sectors: int = 8, alpha: float = 1.5, exact: bool = False):
    """Polar cells of the unit disk with mass density ``|x|^-alpha``.

    Ring ``k`` spans radii ``[k/rings, (k+1)/rings]``; one extra ring outside
    radius 1 is exterior.  A cell of angle ``dtheta`` has mass
    ``dtheta * int r^(1-alpha) dr``, radial cuts weigh their arc length
    ``r dtheta`` and angular cuts their radial length.  Hence
    ``P(B_r) = 2 pi r`` and, for ``alpha = 3/2``, ``m(B_r) = 4 pi sqrt(r)``
    exactly at ring radii.
    """
    if not alpha < 2:
        raise ValueError("alpha must be below 2 for finite mass near the origin")
    dth = 2 * np.pi / sectors
    dr = 1.0 / rings
    total_rings = rings + 1

    def mass(k):
        a, b = k * dr, (k + 1) * dr
        e = 2.0 - alpha
        return dth * (b**e - a**e) / e

    def index(k, j):
        return k * sectors + j

    measure = [mass(k) for k in range(total_rings) for _ in range(sectors)]
    labels = [f"r{k}_s{j}" for k in range(total_rings) for j in range(sectors)]
    edges = []
    for k in range(total_rings):
        for j in range(sectors):
            if sectors > 1:
                edges.append((index(k, j), index(k, (j + 1) % sectors), dr))
            if k + 1 < total_rings:
                edges.append((index(k, j), index(k + 1, j), (k + 1) * dr * dth))
    space = _space(measure, edges, labels, exact)
    omega = np.arange(space.n) < rings * sectors
    return space, omega


def disk_mask(space: FiniteSpace, rings: int, sectors: int, k: int) -> np.ndarray:
    """Cells of the first ``k`` rings of a radial disk, i.e. ``B_{k/rings}``."""
    return np.arange(space.n) < k * sectors


def gaussian_density(x):
    return np.exp(-0.5 * np.asarray(x, dtype=float) ** 2) / np.sqrt(2 * np.pi)


def build_gaussian_line(n: int = 512, half_width: float = 6.0):
    """1-D grid on ``[-L, L]`` with volume and edge density the normal density.

    Point ``i`` sits at a cell centre with mass ``gamma(x_i) dx``; neighbouring
    points are joined with weight ``gamma`` at the cell interface.  The
    default domain is the whole interval except the two end cells.
    """
    d = 2 * half_width / n
    x = -half_width + (np.arange(n) + 0.5) * d
    measure = gaussian_density(x) * d
    edges = [(i, i + 1, float(gaussian_density(0.5 * (x[i] + x[i + 1])))) for i in range(n - 1)]
    space = _space(measure, edges, [f"x{i}" for i in range(n)])
    omega = np.ones(n, dtype=bool)
    omega[[0, -1]] = False
    return space, omega


# ---------------------------------------------------------------------------
# nonlocal kernels


@dataclass
class KernelSpec:
    """Point cloud with masses and a kernel ``K(x, y)`` (or ``K(z)`` with ``z = x - y``).

    Pairs farther apart than ``radius`` are dropped when ``radius`` is set.
    """

    points: np.ndarray
    measures: np.ndarray
    kernel: Callable
    radius: float | None = None
    difference_kernel: bool = True
    exact: bool = False
    labels: tuple = field(default=())


def fractional_kernel(s: float, dim: int = 1):
    """``K_s(z) = |z|^(-dim-s)``."""
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")

    def K(z):
        r = np.linalg.norm(np.atleast_1d(z))
        return r ** (-dim - s)
    return K


def build_kernel_space(spec: KernelSpec) -> FiniteSpace:
    """Complete-graph cut with ``w(x, y) = 2 K(x, y) m(x) m(y)``.

    Raises
    ------
    SymmetryError
        if ``K(x, y) != K(y, x)`` for some pair.
    """
    pts = np.atleast_2d(np.asarray(spec.points, dtype=float))
    if pts.shape[0] == 1 and len(spec.measures) > 1:
        pts = pts.T
    n = len(spec.measures)
    m = num.as_array(list(spec.measures), spec.exact)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            dist = float(np.linalg.norm(pts[i] - pts[j]))
            if spec.radius is not None and dist > spec.radius:
                continue
            if spec.difference_kernel:
                kij, kji = spec.kernel(pts[i] - pts[j]), spec.kernel(pts[j] - pts[i])
            else:
                kij, kji = spec.kernel(pts[i], pts[j]), spec.kernel(pts[j], pts[i])
            if not np.isclose(kij, kji, rtol=1e-12, atol=0.0):
                raise SymmetryError(f"K is not symmetric on the pair ({i}, {j})")
            if kij < 0:
                raise ValueError("kernel values must be non-negative")
            edges.append((i, j, 2 * num.number(kij, spec.exact) * m[i] * m[j]))
    return FiniteSpace.from_cut(m, edges, spec.labels, exact=spec.exact)


def build_kernel_row(n: int = 12, s: float = 0.5, spacing: float = 1.0):
    """``n`` equally spaced points on a line with the fractional kernel ``K_s``."""
    pts = np.arange(n, dtype=float)[:, None] * spacing
    spec = KernelSpec(pts, [spacing] * n, fractional_kernel(s, 1))
    return build_kernel_space(spec)


def central_rows(n: int, sizes) -> list[np.ndarray]:
    """Nested centred index windows of the given sizes."""
    out = []
    for k in sizes:
        lo = (n - k) // 2
        mask = np.zeros(n, dtype=bool)
        mask[lo:lo + k] = True
        out.append(mask)
    return out


# ---------------------------------------------------------------------------
# metric graphs


def build_metric_graph(edges, subdivision: int = 1, exact: bool = False):
    """Subdivided metric graph.

    Each edge ``(a, b, length)`` is cut into ``max(subdivision, 1)`` equal
    segments.  A node's mass is half the total length of its incident
    segments; every segment has unit cut weight, so ``P(E)`` counts the
    segments crossing the boundary of ``E``.  ``subdivision=0`` keeps the
    combinatorial graph.

    Returns the space and the list of original vertex names (node ``i`` is
    vertex ``names[i]`` for the first ``len(names)`` nodes).
    """
    names: list = []
    edges = [(a, b, num.to_fraction(length) if exact else float(num.to_fraction(length)))
             for a, b, length in edges]
    for a, b, length in edges:
        if not length > 0 or not np.isfinite(float(length)):
            raise ValueError(f"edge ({a}, {b}) needs a finite positive length")
        for v in (a, b):
            if v not in names:
                names.append(v)
    index = {v: i for i, v in enumerate(names)}
    s = max(int(subdivision), 1)
    mass = [num.zero(exact)] * len(names)
    labels = [str(v) for v in names]
    seg_edges = []
    for a, b, length in edges:
        step = num.number(length, exact) / s
        chain = [index[a]]
        for t in range(1, s):
            mass.append(num.zero(exact))
            labels.append(f"{a}-{b}:{t}")
            chain.append(len(mass) - 1)
        chain.append(index[b])
        for u, v in zip(chain, chain[1:]):
            seg_edges.append((u, v, 1))
            mass[u] = mass[u] + step / 2
            mass[v] = mass[v] + step / 2
    space = _space(mass, seg_edges, labels, exact)
    return space, names


def metric_interval(length=1.0, subdivision: int = 8, exact: bool = False):
    """One edge; endpoints are exterior, the domain is the open edge."""
    space, names = build_metric_graph([("a", "b", length)], subdivision, exact)
    omega = space.full()
    omega[[0, 1]] = False
    return space, omega


def metric_star(arms: int = 3, length=1.0, subdivision: int = 8, exact: bool = False):
    """Star with ``arms`` edges; the leaf endpoints are exterior."""
    space, names = build_metric_graph([("c", f"l{i}", length) for i in range(arms)], subdivision, exact)
    omega = space.full()
    for i, v in enumerate(names):
        if v != "c":
            omega[i] = False
    return space, omega


# ---------------------------------------------------------------------------
# dumbbells


def build_dumbbell(lobes: int = 2, lobe_size: int = 4, bridge=0.01, tube_length: int = 1,
                   tube_mass=0.1, wall=1, exterior=1, opening=None, exact: bool = False):
    """Chain of complete-graph lobes joined by thin tubes.

    Lobe vertices have unit mass, unit internal weights and weight
    ``exterior`` to a single exterior point.  Consecutive lobes are joined
    through ``tube_length`` tube vertices (mass ``tube_mass``, weight
    ``wall`` to the exterior) by links of weight ``bridge``; with
    ``tube_length=0`` the lobes are linked directly.  Where a tube attaches,
    the lobe loses ``opening`` (default ``2 * bridge``) of exterior weight,
    mimicking the boundary removed by the tube mouth; interior lobes have
    two mouths and so the least ratio.

    Returns the space and the domain (everything but the exterior point).
    """
    to_n = lambda v: num.number(v, exact)  # noqa: E731
    bridge = to_n(bridge)
    opening = 2 * bridge if opening is None else to_n(opening)
    measure, labels, edges = [], [], []
    lobe_nodes = []
    for L in range(lobes):
        nodes = []
        for i in range(lobe_size):
            nodes.append(len(measure))
            measure.append(to_n(1))
            labels.append(f"L{L}_{i}")
        lobe_nodes.append(nodes)
        edges += [(a, b, to_n(1)) for ia, a in enumerate(nodes) for b in nodes[ia + 1:]]
    ext_weight = {v: to_n(exterior) for nodes in lobe_nodes for v in nodes}
    tube_nodes = []
    for L in range(lobes - 1):
        left = lobe_nodes[L][min(1, lobe_size - 1)]
        right = lobe_nodes[L + 1][0]
        ext_weight[left] -= opening
        ext_weight[right] -= opening
        chain = [left]
        for t in range(tube_length):
            chain.append(len(measure))
            tube_nodes.append(len(measure))
            measure.append(to_n(tube_mass))
            labels.append(f"T{L}_{t}")
        chain.append(right)
        edges += [(a, b, bridge) for a, b in zip(chain, chain[1:])]
    if any(w < 0 for w in ext_weight.values()):
        raise ValueError("opening exceeds the exterior weight of a lobe vertex")
    ground = len(measure)
    measure.append(to_n(1))
    labels.append("ext")
    edges += [(v, ground, w) for v, w in ext_weight.items()]
    edges += [(v, ground, to_n(wall)) for v in tube_nodes]
    space = _space(measure, edges, labels, exact)
    omega = space.full()
    omega[ground] = False
    return space, omega


def lobe_masks(space: FiniteSpace, lobes: int) -> list[np.ndarray]:
    return [np.array([lab.startswith(f"L{L}_") for lab in space.labels]) for L in range(lobes)]


# ---------------------------------------------------------------------------
# desk suite


def desk_suite(exact: bool = True) -> list[tuple[str, FiniteSpace, np.ndarray]]:
    """At least 25 small spaces with ``|omega| <= 14`` for exhaustive cross-checks."""
    suite = []

    def add(name, pair):
        suite.append((name, pair[0], pair[1]))

    add("path4", path_graph(4, exact=exact))
    add("path6-weighted", path_graph(6, weights=["1", "1/2", "2", "1/2", "1"],
                                     measures=["1", "2", "1", "1/2", "1", "1"], exact=exact))
    add("complete5-minus-one", _drop_last(complete_graph(5, exact=exact)))
    add("complete4-minus-one", _drop_last(complete_graph(4, exact=exact)))
    for n in (5, 6, 8):
        add(f"cycle{n}", cycle_graph(n, exact=exact))
    add("star5", star_graph(5, exact=exact))
    add("twin3", twin_components(3, exact=exact))
    add("twin4", twin_components(4, exact=exact))
    add("dumbbell-twin", build_dumbbell(2, 4, "0.01", exact=exact))
    add("dumbbell-twin-eps0", build_dumbbell(2, 4, 0, exact=exact))
    add("dumbbell-chain3", build_dumbbell(3, 3, "0.01", exact=exact))
    add("dumbbell-chain3-direct", build_dumbbell(3, 3, "0.05", tube_length=0, exact=exact))
    add("grid-3x3", unit_square(3, exact=exact))
    add("grid-2x3-8nb", build_grid(GridSpec(2, 3, bounds=((0, 2), (0, 3)), neighborhood=8, exact=exact)))
    add("metric-interval-6", metric_interval(1, 6, exact=exact))
    add("metric-star-3x4", metric_star(3, 1, 4, exact=exact))
    add("metric-triangle", _metric_triangle(exact))
    for seed in range(8):
        n = 8 + seed % 5
        add(f"random-{seed}", random_graph(n, 0.35, seed, exact=exact))
    return suite


def _drop_last(pair):
    space, omega = pair
    omega = omega.copy()
    omega[-1] = False
    return space, omega


def _metric_triangle(exact):
    space, names = build_metric_graph([("a", "b", 1), ("b", "c", 2), ("c", "a", "3/2")], 3, exact)
    omega = space.full()
    omega[0] = False
    return space, omega


# ---------------------------------------------------------------------------
# config-driven construction


def _grid_from_params(nx, ny=None, bounds=((0, 1), (0, 1)), g=1, h=1, neighborhood=4, exact=False):
    gv, hv = num.to_fraction(g) if exact else float(g), num.to_fraction(h) if exact else float(h)
    spec = GridSpec(int(nx), int(ny or nx), tuple(tuple(b) for b in bounds),
                    lambda x, y: gv, lambda x, y, nu: hv, int(neighborhood), exact=exact)
    return build_grid(spec)


def _kernel_row_pair(n=12, s=0.5, spacing=1.0, omega_size=None, exact=False):
    space = build_kernel_row(int(n), float(s), float(spacing))
    return space, central_rows(int(n), [int(omega_size or n - 2)])[0]


def _gaussian_pair(n=512, half_width=6.0, exact=False):
    return build_gaussian_line(int(n), float(half_width))


def _radial_pair(rings=16, sectors=8, alpha=1.5, exact=False):
    return build_radial_disk(int(rings), int(sectors), float(alpha))


def _metric_pair(edges, subdivision=1, exterior=(), exact=False):
    space, names = build_metric_graph([tuple(e) for e in edges], int(subdivision), exact)
    omega = space.full()
    for v in exterior:
        omega[names.index(v)] = False
    return space, omega


BUILDERS: dict[str, Callable] = {
    "path": path_graph,
    "complete": complete_graph,
    "cycle": cycle_graph,
    "star": star_graph,
    "random": random_graph,
    "twin": twin_components,
    "grid": _grid_from_params,
    "unit-square": unit_square,
    "radial": _radial_pair,
    "gaussian": _gaussian_pair,
    "kernel-row": _kernel_row_pair,
    "metric-graph": _metric_pair,
    "metric-interval": metric_interval,
    "metric-star": metric_star,
    "dumbbell": build_dumbbell,
}

# the parameter a refinement study varies, per family
LEVEL_PARAM = {"unit-square": "n", "radial": "rings", "gaussian": "n", "kernel-row": "n",
               "metric-interval": "subdivision", "metric-star": "subdivision", "path": "n",
               "cycle": "n", "grid": "nx", "metric-graph": "subdivision"}


def build(name: str, params: dict | None = None, exact: bool = False):
    """Build a catalog space by registry name.

    Raises
    ------
    KeyError
        unknown builder name.
    TypeError, ValueError
        bad parameters.
    """
    if name not in BUILDERS:
        raise KeyError(name)
    return BUILDERS[name](**dict(params or {}), exact=exact)


__all__ = [
    "BUILDERS", "GridSpec", "LEVEL_PARAM", "build", "KernelSpec", "build_dumbbell", "build_gaussian_line", "build_grid",
    "build_kernel_row", "build_kernel_space", "build_metric_graph", "build_radial_disk",
    "central_rows", "complete_graph", "cycle_graph", "desk_suite", "disk_mask",
    "fractional_kernel", "gaussian_density", "lobe_masks", "metric_interval", "metric_star",
    "path_graph", "random_graph", "star_graph", "twin_components", "unit_square",
]

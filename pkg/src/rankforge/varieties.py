"""Level sets of multiaffine maps: densities, external approximation by random
dot-product conditions, layer approximation errors, connectivity in the
coordinate-change graph, the quasirandomness-implies-connectivity check, the
dot-product solvability criterion, and homogenization of a variety inside the
zero set of a multilinear map.

The coordinate-change graph on G_[k] joins two points iff they differ in
exactly one coordinate.  BFS over it is run implicitly on boolean grids: one
expansion step is an OR-reduction along each coordinate axis, so a level
costs O(k |G|) vectorized work regardless of vertex degrees.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from .analytic import exact_bias
from .errors import LemmaViolationError
from .forms import (
    DEFAULT_ENUM_GUARD,
    Map,
    MultiaffineMap,
    MultilinearMap,
    Shape,
    as_multiaffine,
    compose_output,
    slice_map,
    value_table,
)

TRAVERSAL_GUARD = 1 << 21
EXACT_DIAMETER_SET_CAP = 4096
EXACT_DIAMETER_WORK_CAP = 30_000_000


# ---------------------------------------------------------------------------
#  Varieties and layers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Variety:
    """The level set {x : defining_map(x) = value}; codimension = target dim."""

    defining_map: Map
    value: tuple[int, ...] = None

    def __post_init__(self):
        m = self.defining_map.m
        v = self.value if self.value is not None else (0,) * m
        v = tuple(int(t) % self.defining_map.shape.p for t in v)
        if len(v) != m:
            raise ValueError(f"layer value must have length {m}")
        object.__setattr__(self, "value", v)

    @property
    def shape(self) -> Shape:
        return self.defining_map.shape

    @property
    def codim(self) -> int:
        return self.defining_map.m

    def contains(self, xs) -> bool:
        return tuple(int(t) for t in self.defining_map.evaluate(xs)) == self.value

    def table(self, max_points: int = DEFAULT_ENUM_GUARD) -> np.ndarray:
        vt = value_table(self.defining_map, max_points)
        want = np.asarray(self.value, dtype=np.int64)
        return (vt == want).all(axis=-1)

    def size(self, max_points: int = DEFAULT_ENUM_GUARD) -> int:
        return int(self.table(max_points).sum())


@dataclass(frozen=True)
class LayerFamily:
    """A multiaffine map together with a selection of its layer values."""

    defining_map: Map
    selected: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        p = self.defining_map.shape.p
        sel = tuple(tuple(int(t) % p for t in v) for v in self.selected)
        if any(len(v) != self.defining_map.m for v in sel):
            raise ValueError("every layer value must match the target dimension")
        object.__setattr__(self, "selected", sel)

    def layer_tables(self, max_points: int = DEFAULT_ENUM_GUARD):
        vt = value_table(self.defining_map, max_points)
        for v in self.selected:
            yield v, (vt == np.asarray(v, dtype=np.int64)).all(axis=-1)

    def union_table(self, max_points: int = DEFAULT_ENUM_GUARD) -> np.ndarray:
        out = np.zeros(self.defining_map.shape.sizes, dtype=bool)
        for _, t in self.layer_tables(max_points):
            out |= t
        return out


def density(V: Variety, max_points: int = DEFAULT_ENUM_GUARD) -> Fraction:
    return Fraction(V.size(max_points), V.shape.domain_size)


@dataclass(frozen=True)
class DensityBoundReport:
    density: Fraction
    bound: Fraction
    nonempty: bool
    ok: bool


def density_bound_check(V: Variety, max_points: int = DEFAULT_ENUM_GUARD) -> DensityBoundReport:
    """Nonempty varieties of codimension r have density at least p^(-k r)."""
    d = density(V, max_points)
    k = V.shape.k
    bound = Fraction(1, V.shape.p ** (k * V.codim))
    nonempty = d > 0
    ok = (not nonempty) or d >= bound
    if not ok:
        raise LemmaViolationError(
            f"nonempty variety of codimension {V.codim} has density {d} < {bound}"
        )
    return DensityBoundReport(d, bound, nonempty, ok)


# ---------------------------------------------------------------------------
#  External approximation by random dot-product conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BohrReport:
    phi: Map
    s: int
    containment: bool
    exceptional_count: int       # |{phi = 0} minus {A = 0}|, exact
    nonzero_count: int           # |{A != 0}|, exact
    domain_size: int

    @property
    def exceptional_density(self) -> Fraction:
        return Fraction(self.exceptional_count, self.domain_size)


def bohr_external(A: Map, s: int, seed, max_points: int = DEFAULT_ENUM_GUARD) -> BohrReport:
    """phi(x)_i = A(x) . h_i for s independent uniform h_i.

    {A = 0} is contained in {phi = 0} by construction; the exceptional set
    {phi = 0} minus {A = 0} is counted exactly.  If A is linear in some
    coordinate so is phi (the construction only touches the output side).
    """
    if s < 1:
        raise ValueError("need s >= 1")
    rng = np.random.default_rng(seed)
    p = A.shape.p
    H = rng.integers(0, p, size=(A.m, s), dtype=np.int64)
    phi = compose_output(A, H)
    tA = ~value_table(A, max_points).any(axis=-1)
    tPhi = ~value_table(phi, max_points).any(axis=-1)
    if (tA & ~tPhi).any():
        raise LemmaViolationError("containment {A=0} within {phi=0} failed")
    exceptional = int((tPhi & ~tA).sum())
    return BohrReport(phi, s, True, exceptional, int((~tA).sum()), A.shape.domain_size)


@dataclass(frozen=True)
class BohrSimReport:
    phis: tuple
    s: int
    per_lambda: dict  # lambda tuple -> (containment ok, exceptional count)
    domain_size: int


def bohr_external_sim(
    A_list, epsilon: Fraction, seed, max_points: int = DEFAULT_ENUM_GUARD
) -> BohrSimReport:
    """Simultaneous version via the auxiliary map on G x F_p^r sending
    (x, lam) to sum_i lam_i A_i(x); one random approximation of it restricts
    to approximations of every linear combination at once."""
    A_list = list(A_list)
    if not A_list:
        raise ValueError("need at least one map")
    shape = A_list[0].shape
    p = shape.p
    m = A_list[0].m
    r = len(A_list)
    if any(A.shape != shape or A.m != m for A in A_list):
        raise ValueError("all maps must share shape and target dimension")
    epsilon = Fraction(epsilon)
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    # smallest integer s with p^(r-s) <= epsilon, i.e. p^s * eps_num >= p^r * eps_den
    s = 0
    lhs = epsilon.numerator
    rhs = p ** r * epsilon.denominator
    while lhs < rhs:
        lhs *= p
        s += 1
    s = max(s, 1)

    ext_shape = Shape(p, shape.dims + (r,))
    aux_parts: dict[frozenset, np.ndarray] = {}
    aux_coord = shape.k + 1
    for i, A in enumerate(A_list):
        for I, C in as_multiaffine(A).parts.items():
            J = I | {aux_coord}
            want = tuple(ext_shape.dims[t - 1] for t in sorted(J)) + (m,)
            if J not in aux_parts:
                aux_parts[J] = np.zeros(want, dtype=np.int64)
            # the auxiliary coordinate axis sits right before the out axis
            aux_parts[J][..., i, :] = (aux_parts[J][..., i, :] + C) % p
    Phi = MultiaffineMap(ext_shape, m, aux_parts)

    rng = np.random.default_rng(seed)
    H = rng.integers(0, p, size=(m, s), dtype=np.int64)
    psi = compose_output(Phi, H)

    basis = np.eye(r, dtype=np.int64)
    phis = tuple(slice_map(psi, [aux_coord], [basis[i]]) for i in range(r))

    per_lambda = {}
    tables_A = [value_table(A, max_points) for A in A_list]
    tables_phi = [value_table(f, max_points) for f in phis]
    lams = np.stack(np.meshgrid(*([np.arange(p)] * r), indexing="ij"), axis=-1).reshape(-1, r)
    for lam in lams:
        combA = sum(int(l) * t for l, t in zip(lam, tables_A)) % p
        combP = sum(int(l) * t for l, t in zip(lam, tables_phi)) % p
        zA = ~combA.any(axis=-1)
        zP = ~combP.any(axis=-1)
        ok = not (zA & ~zP).any()
        if not ok:
            raise LemmaViolationError("per-lambda containment failed")
        per_lambda[tuple(int(l) for l in lam)] = (ok, int((zP & ~zA).sum()))
    return BohrSimReport(phis, s, per_lambda, shape.domain_size)


# ---------------------------------------------------------------------------
#  Internal / external approximation error of a layer family
# ---------------------------------------------------------------------------

def approximation_error(
    layers: LayerFamily,
    S: np.ndarray,
    mode: str,
    max_points: int = DEFAULT_ENUM_GUARD,
) -> Fraction:
    """Density of the approximation defect of the selected layers against S.

    internal: each selected layer must be contained in S; the error is
    |S minus union| / |G|.  external: S must be contained in the union; the
    error is |union minus S| / |G|.
    """
    shape = layers.defining_map.shape
    if S.shape != shape.sizes:
        raise ValueError("membership grid does not match the domain")
    if mode not in ("internal", "external"):
        raise ValueError("mode must be 'internal' or 'external'")
    union = np.zeros(shape.sizes, dtype=bool)
    for v, t in layers.layer_tables(max_points):
        if mode == "internal" and (t & ~S).any():
            raise ValueError(f"layer {v} is not contained in S (internal mode)")
        union |= t
    if mode == "external" and (S & ~union).any():
        raise ValueError("S is not contained in the union of the selected layers")
    defect = (S & ~union) if mode == "internal" else (union & ~S)
    return Fraction(int(defect.sum()), shape.domain_size)


# ---------------------------------------------------------------------------
#  Connectivity in the coordinate-change graph
# ---------------------------------------------------------------------------

@dataclass
class ConnectivityReport:
    is_connected: bool
    component_count: int
    set_size: int
    diameter: int | None          # exact value, or a certified upper bound
    diameter_exact: bool
    diameter_lower: int | None
    eta_threshold: Fraction | None = None
    hypothesis_satisfied: bool | None = None
    conclusion_verified: bool | None = None
    conclusion_certified: bool | None = None
    max_bias: Fraction | None = None
    diameter_bound: int | None = None


def _expand_once(frontier: np.ndarray, member: np.ndarray, visited: np.ndarray) -> np.ndarray:
    grown = np.zeros_like(member)
    for ax in range(member.ndim):
        grown |= frontier.any(axis=ax, keepdims=True)
    return grown & member & ~visited


def _bfs(member: np.ndarray, start_idx: tuple) -> tuple[np.ndarray, int]:
    """Visited mask and eccentricity of the start vertex within its component."""
    visited = np.zeros_like(member)
    visited[start_idx] = True
    frontier = visited.copy()
    ecc = 0
    while True:
        nxt = _expand_once(frontier, member, visited)
        if not nxt.any():
            return visited, ecc
        visited |= nxt
        frontier = nxt
        ecc += 1


def _first_true(mask: np.ndarray) -> tuple:
    flat = int(np.argmax(mask.reshape(-1)))
    return np.unravel_index(flat, mask.shape)


def _bfs_distances(member: np.ndarray, start_idx: tuple) -> np.ndarray:
    dist = np.full(member.shape, -1, dtype=np.int32)
    dist[start_idx] = 0
    frontier = np.zeros_like(member)
    frontier[start_idx] = True
    visited = frontier.copy()
    level = 0
    while True:
        nxt = _expand_once(frontier, member, visited)
        if not nxt.any():
            return dist
        level += 1
        dist[nxt] = level
        visited |= nxt
        frontier = nxt


def membership_table(shape: Shape, predicate, max_points: int = TRAVERSAL_GUARD) -> np.ndarray:
    """Boolean grid from a predicate on points (tuples of vectors)."""
    from .forms import codes_to_point, domain_codes

    shape.guard(shape.domain_size, max_points, "membership table")
    out = np.zeros(shape.sizes, dtype=bool)
    for codes in domain_codes(shape):
        out[codes] = bool(predicate(codes_to_point(shape, codes)))
    return out


def connectivity(
    shape: Shape,
    member: np.ndarray,
    max_points: int = TRAVERSAL_GUARD,
    extra_sweeps: int = 2,
) -> ConnectivityReport:
    """Connected components and diameter of a subset of G_[k].

    The diameter is exact for small sets (all-pairs BFS when |S| <= 4096 and
    the total work stays desk-scale); otherwise the report carries the
    certified upper bound 2 * min eccentricity over double-sweep samples,
    flagged via diameter_exact=False, together with the eccentricity lower
    bound.
    """
    shape.guard(shape.domain_size, max_points, "graph traversal")
    if member.dtype != bool or member.shape != shape.sizes:
        raise ValueError("need a boolean membership grid over the domain")
    size = int(member.sum())
    if size == 0:
        return ConnectivityReport(False, 0, 0, None, True, None)

    remaining = member.copy()
    components = 0
    first_component = None
    while remaining.any():
        seed = _first_true(remaining)
        visited, _ = _bfs(member, seed)
        if components == 0:
            first_component = visited
        components += 1
        remaining &= ~visited
    connected = components == 1
    if not connected:
        return ConnectivityReport(False, components, size, None, True, None)

    work = size * shape.domain_size * shape.k
    if size <= EXACT_DIAMETER_SET_CAP and work <= EXACT_DIAMETER_WORK_CAP:
        diam = 0
        for idx in map(tuple, np.argwhere(member)):
            d = _bfs_distances(member, idx)
            diam = max(diam, int(d.max()))
        return ConnectivityReport(True, 1, size, diam, True, diam)

    # double sweep plus extra eccentricity samples
    u = _first_true(member)
    du = _bfs_distances(member, u)
    ecc_u = int(du.max())
    lower = ecc_u
    upper = 2 * ecc_u
    src = du
    for _ in range(1 + extra_sweeps):
        far_mask = src == src.max()
        w = _first_true(far_mask)
        dw = _bfs_distances(member, w)
        ecc_w = int(dw.max())
        lower = max(lower, ecc_w)
        upper = min(upper, 2 * ecc_w)
        src = dw
    upper = max(upper, lower)
    return ConnectivityReport(True, 1, size, upper, False, lower)


# ---------------------------------------------------------------------------
#  Quasirandom forms have a connected nonzero locus on the common zero set
# ---------------------------------------------------------------------------

def eta_threshold(p: int, k: int, r: int) -> Fraction:
    return Fraction(1, 2 ** (2 * k)) * Fraction(1, p ** ((k + 1) * (3 * r + 2)))


def nonzero_conn_check(
    rho: MultilinearMap,
    gammas,
    max_points: int = TRAVERSAL_GUARD,
) -> ConnectivityReport:
    """Checks: if every full-support twist rho - sum lam_i gamma_i has bias at
    most eta = 2^(-2k) p^(-(k+1)(3r+2)), then the set
    {x : all gamma_i(x_{I_i}) = 0, rho(x) != 0} is connected with diameter at
    most (2k+1)(2^k - 1).

    `gammas` is a sequence of (index_set, MultilinearMap on G_I) pairs.  The
    hypothesis side is decided with exact rationals; the conclusion uses BFS
    with a certified diameter bound.  A certified violation raises.
    """
    if not rho.scalar:
        raise ValueError("rho must be a scalar form")
    shape = rho.shape
    p, k = shape.p, shape.k
    gammas = [(frozenset(int(i) for i in I), g) for I, g in gammas]
    for I, g in gammas:
        if not I:
            raise ValueError("index sets must be nonempty")
        if g.shape != shape.sub(I) or g.m != 1:
            raise ValueError("gamma does not match its index set")
    r = len(gammas)
    eta = eta_threshold(p, k, r)

    full = frozenset(range(1, k + 1))
    full_idx = [i for i, (I, _) in enumerate(gammas) if I == full]
    max_bias = Fraction(0)
    lam_count = p ** len(full_idx)
    for code in range(lam_count):
        coeffs = rho.coeffs[..., 0].copy()
        c = code
        for i in full_idx:
            lam = c % p
            c //= p
            coeffs = (coeffs - lam * gammas[i][1].coeffs[..., 0]) % p
        twisted = MultilinearMap(shape, 1, coeffs.reshape(shape.dims + (1,)))
        b = exact_bias(twisted, max_points)
        max_bias = max(max_bias, b)
    hypothesis = max_bias <= eta

    # the target set
    member = value_table(rho, max_points)[..., 0] != 0
    from .forms import _part_grid

    for I, g in gammas:
        grid = _part_grid(shape, I, g.coeffs)[..., 0]
        member &= np.broadcast_to(grid == 0, shape.sizes)
    rep = connectivity(shape, member, max_points)
    bound = (2 * k + 1) * (2 ** k - 1)
    rep.eta_threshold = eta
    rep.hypothesis_satisfied = hypothesis
    rep.max_bias = max_bias
    rep.diameter_bound = bound
    if hypothesis:
        nonempty = rep.set_size > 0
        diam_ok = rep.diameter is not None and rep.diameter <= bound
        certified = rep.diameter_exact or diam_ok
        rep.conclusion_verified = nonempty and rep.is_connected and diam_ok
        rep.conclusion_certified = certified
        violated = (not nonempty) or (not rep.is_connected) or (
            rep.diameter_lower is not None and rep.diameter_lower > bound
        )
        if violated:
            raise LemmaViolationError(
                "quasirandomness hypothesis holds but the nonzero locus is not "
                f"connected with diameter <= {bound}: {rep}"
            )
    return rep


# ---------------------------------------------------------------------------
#  Dot-product solvability and the common non-vanisher
# ---------------------------------------------------------------------------

def find_common_nonvanisher(v1, v2, us, p: int):
    """A z with v1.z != 0, v2.z != 0 and u.z = 0 for all u, when one exists.

    Exists iff neither v1 nor v2 lies in span{u_i}; built constructively on
    the solution space of the u-system.
    """
    v1 = np.asarray(v1, dtype=np.int64) % p
    v2 = np.asarray(v2, dtype=np.int64) % p
    us = [np.asarray(u, dtype=np.int64) % p for u in us]
    n = v1.shape[0]
    if v2.shape != (n,) or any(u.shape != (n,) for u in us):
        raise ValueError("all vectors must share one length")
    U = np.vstack(us) if us else np.zeros((0, n), dtype=np.int64)
    B = linalg.nullspace(U, p)  # rows span {z : u.z = 0 for all u}
    a = B @ v1 % p
    b = B @ v2 % p
    if not a.any() or not b.any():
        return None
    i = int(np.flatnonzero(a)[0])
    j = int(np.flatnonzero(b)[0])
    c1 = B[i]
    c2 = B[j]
    if b[i]:
        z = c1
    elif a[j]:
        z = c2
    else:
        z = (c1 + c2) % p
    assert int(v1 @ z % p) != 0 and int(v2 @ z % p) != 0
    assert not us or not (U @ z % p).any()
    return z % p


@dataclass(frozen=True)
class SolvabilityReport:
    exists: bool
    witness_y: np.ndarray | None
    violating_mu: np.ndarray | None


def solvability_check(xs, lam, p: int) -> SolvabilityReport:
    """Decides whether some y solves x_i . y = lam_i and cross-checks the
    kernel criterion: solvable iff every mu with sum mu_i x_i = 0 has
    mu . lam = 0.  The two sides are decided independently and must agree."""
    xs = [np.asarray(x, dtype=np.int64) % p for x in xs]
    lam = np.asarray(lam, dtype=np.int64) % p
    r = len(xs)
    if lam.shape != (r,):
        raise ValueError("one target per vector is required")
    if r == 0:
        return SolvabilityReport(True, np.zeros(0, dtype=np.int64), None)
    n = xs[0].shape[0]
    X = np.vstack(xs)

    y = linalg.solve(X, lam, p)  # condition (i) by elimination

    # condition (ii) by kernel enumeration
    K = linalg.nullspace(X.T, p)  # rows mu with sum mu_i x_i = 0
    violating = None
    d = K.shape[0]
    for code in range(p ** d):
        mu = np.zeros(r, dtype=np.int64)
        c = code
        for t in range(d):
            mu = (mu + (c % p) * K[t]) % p
            c //= p
        if int(mu @ lam % p) != 0:
            violating = mu
            break
    cond_ii = violating is None

    if (y is not None) != cond_ii:
        raise LemmaViolationError("solvability criterion sides disagree")
    if y is not None:
        assert np.array_equal(X @ y % p, lam)
    return SolvabilityReport(y is not None, y, violating)


# ---------------------------------------------------------------------------
#  Homogenization: replace a variety inside {A = 0} by one cut out by
#  homogeneous multilinear forms
# ---------------------------------------------------------------------------

@dataclass
class MultilinearizedVariety:
    forms: list            # (index_set, MultilinearMap) pairs, all with value 0
    bound: int             # 2^(2k) * codim
    table: np.ndarray      # membership grid of the output variety


def _constraint_table(shape: Shape, I: frozenset, form: MultilinearMap, val: int) -> np.ndarray:
    from .forms import _part_grid

    grid = _part_grid(shape, I, form.coeffs)[..., 0]
    return np.broadcast_to(grid == val, shape.sizes)


def _lex_least_point(shape: Shape, table: np.ndarray):
    from .forms import codes_to_point

    idx = _first_true(table)
    return codes_to_point(shape, idx)


def multilinearize_variety(
    D: Variety,
    A: Map,
    max_points: int = DEFAULT_ENUM_GUARD,
) -> MultilinearizedVariety:
    """Given a nonempty variety D contained in {A = 0}, produce at most
    2^(2k) codim(D) homogeneous multilinear constraints cutting out a
    nonempty variety still contained in {A = 0}.

    The constraints start as the multilinear parts of the defining map pinned
    to their values at the lexicographically least point of D; then one
    coordinate at a time, each constraint involving that coordinate is
    replaced by its homogeneous version plus its slice at the current
    variety's lexicographically least point.  Containment of the output is
    verified by enumeration.
    """
    shape = D.shape
    p, k = shape.p, shape.k
    if A.shape != shape:
        raise ValueError("A must live on the same domain as D")
    tD = D.table(max_points)
    if not tD.any():
        raise ValueError("D is empty")
    tA = ~value_table(A, max_points).any(axis=-1)
    if (tD & ~tA).any():
        raise ValueError("containment of D in {A = 0} fails")

    fa = as_multiaffine(D.defining_map)
    parts = fa.parts
    r = D.codim
    bound = 2 ** (2 * k) * r

    # early exit: already cut out by homogeneous multilinear forms
    component_parts = [[] for _ in range(r)]
    for I, C in parts.items():
        for j in range(r):
            if C[..., j].any():
                component_parts[j].append((I, C[..., j]))
    if all(
        len(ps) == 1 and ps[0][0] and D.value[j] == 0
        for j, ps in enumerate(component_parts)
    ) or not parts:
        forms = []
        for j, ps in enumerate(component_parts):
            if not ps:
                continue
            I, C = ps[0]
            forms.append((I, MultilinearMap(shape.sub(I), 1, C[..., None])))
        table = np.ones(shape.sizes, dtype=bool)
        for I, g in forms:
            table &= _constraint_table(shape, I, g, 0)
        return MultilinearizedVariety(forms, bound, table)

    # step 1: split into scalar multilinear constraints pinned at the
    # lexicographically least point of D
    w = _lex_least_point(shape, tD)
    constraints = []  # (index_set, form, value)
    for I, C in parts.items():
        if not I:
            continue
        for j in range(r):
            Cj = C[..., j]
            if not Cj.any():
                continue
            g = MultilinearMap(shape.sub(I), 1, Cj[..., None])
            val = int(g.evaluate([w[i - 1] for i in sorted(I)])[0])
            constraints.append((I, g, val))

    def system_table(cons):
        t = np.ones(shape.sizes, dtype=bool)
        for I, g, val in cons:
            t &= _constraint_table(shape, I, g, val)
        return t

    cur = system_table(constraints)
    assert cur.any(), "pinned system lost the base point"

    for d in range(1, k + 1):
        v = _lex_least_point(shape, cur)
        nxt = []
        for I, g, val in constraints:
            if d not in I:
                nxt.append((I, g, val))
                continue
            nxt.append((I, g, 0))
            J = I - {d}
            if J:
                pos = sorted(I).index(d)
                sliced = slice_map(g, [pos + 1], [v[d - 1]])
                nxt.append((J, sliced, val))
            else:
                # constant constraint; holds at v by construction
                assert int(g.evaluate([v[d - 1]])[0]) == val
        # drop tautologies and duplicates
        seen = set()
        cleaned = []
        for I, g, val in nxt:
            if g.is_zero() and val == 0:
                continue
            key = (tuple(sorted(I)), g.coeffs.tobytes(), val)
            if key in seen:
                continue
            seen.add(key)
            cleaned.append((I, g, val))
        constraints = cleaned
        cur = system_table(constraints)
        if not cur.any():
            raise LemmaViolationError("homogenization emptied the variety")

    assert all(val == 0 for _, _, val in constraints)
    forms = [(I, g) for I, g, _ in constraints]
    if len(forms) > bound:
        raise LemmaViolationError(
            f"homogenization produced {len(forms)} constraints, above the bound {bound}"
        )
    if (cur & ~tA).any():
        raise LemmaViolationError("homogenized variety escaped {A = 0}")
    return MultilinearizedVariety(forms, bound, cur)

"""Tropical implicitization of generic torus parametrizations.

Three pipelines feed the Newton polytope oracle:

* ``get_tropical_cycle`` computes the tropicalization of the closed image
  of a Laurent parametrization from its coordinate Newton polytopes, by
  projecting a graph cycle built from mixed volumes of normal-fan faces.
* ``get_trop_a_disc`` computes the tropical A-discriminant as a projected
  Bergman fan.
* ``get_vertex`` / ``reconstruct_polytope`` turn any hypersurface cycle
  into the (translated) Newton polytope of its defining equation via
  support-function queries answered by weighted ray crossings.
"""

import itertools
import random
from dataclasses import dataclass

from . import exactcore as ec
from .errors import (
    DimensionMismatch,
    GenericityExhausted,
    InputFormatError,
    LoopyMatroid,
    NonDivisibleDegree,
    OracleInconsistent,
    RowSpanMissingOnes,
)
from .polyhedra import Cone, Polytope, mixed_volume, minkowski_sum, normal_fan_cones
from .tropical import (
    BERGMAN_SIGN,
    LinearMatroid,
    TropicalCycle,
    indicator,
    push_forward_cycle,
)


@dataclass
class OracleConfig:
    """Knobs for the vertex oracle and polytope reconstruction."""

    rng_seed: int = 0
    perturbation_height: int = 16
    max_retries: int = 12

    def __post_init__(self):
        if self.perturbation_height < 1:
            raise ValueError("perturbation_height must be at least 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be nonnegative")


def _coeff_from_json(x):
    if isinstance(x, bool):
        raise ValueError("coefficient must be a number")
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        num, _, den = x.partition("/")
        return ec.rat(int(num), int(den) if den else 1)
    raise ValueError(f"bad coefficient {x!r}")


def _coeff_to_json(c):
    if isinstance(c, int):
        return c
    return f"{c.numerator}/{c.denominator}"


class Parametrization:
    """n Laurent polynomial components in d torus variables.

    Each component is a nonempty list of (coefficient, exponent) terms with
    nonzero rational coefficients and integer exponent vectors of length d.
    """

    def __init__(self, d, n, components):
        if d < 1 or n < 1:
            raise ValueError("need d >= 1 and n >= 1")
        if len(components) != n:
            raise ValueError(f"expected {n} components, got {len(components)}")
        self.d = d
        self.n = n
        comps = []
        for terms in components:
            if not terms:
                raise ValueError("component with no terms")
            clean = []
            for coeff, exp in terms:
                if not coeff:
                    raise ValueError("zero coefficient in a component")
                exp = tuple(int(e) for e in exp)
                if len(exp) != d:
                    raise ValueError(f"exponent {exp} is not length {d}")
                clean.append((coeff, exp))
            comps.append(tuple(clean))
        self.components = tuple(comps)

    @classmethod
    def from_json(cls, obj):
        try:
            comps = [[(_coeff_from_json(t["coeff"]), t["exp"])
                      for t in comp["terms"]]
                     for comp in obj["components"]]
            return cls(int(obj["d"]), int(obj["n"]), comps)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputFormatError(f"bad parametrization: {exc}") from exc

    def to_json(self):
        return {
            "d": self.d,
            "n": self.n,
            "components": [
                {"terms": [{"coeff": _coeff_to_json(c), "exp": list(e)}
                           for c, e in terms]}
                for terms in self.components
            ],
        }

    def newton_polytopes(self):
        return [Polytope([e for _, e in terms]) for terms in self.components]

    def __repr__(self):
        return f"Parametrization(d={self.d}, n={self.n})"


def get_graph_cycle(newton_polytopes):
    """Tropicalization of the graph of a generic parametrization.

    Takes the coordinate Newton polytopes Q_1 .. Q_n in Z^d and returns a
    pure d-dimensional cycle in R^(n+d), coordinates ordered image-first.
    The weight of a d-dimensional normal-fan cone is the mixed volume of
    the matching faces of the lifted polytopes conv(e_i, 0 x Q_i), taken
    in the affine lattice of the face; cones whose face directions do not
    span rank n are dropped.
    """
    polys = list(newton_polytopes)
    n = len(polys)
    if n == 0:
        raise ValueError("need at least one Newton polytope")
    d = polys[0].ambient_dim
    for Q in polys:
        if Q.ambient_dim != d:
            raise DimensionMismatch("Newton polytopes in mixed dimensions")
    amb = n + d
    lifted = []
    for i, Q in enumerate(polys):
        apex = tuple(1 if j == i else 0 for j in range(n)) + (0,) * d
        pts = [apex] + [(0,) * n + tuple(v) for v in Q.vertices]
        lifted.append(Polytope(pts))
    P = minkowski_sum(lifted)
    items = []
    for cone, face, _w in normal_fan_cones(P, d):
        base = face.vertices[0]
        dirs = [ec.vec_sub(v, base) for v in face.vertices[1:]]
        lat = ec.saturate(dirs, amb)
        if lat.rank != n:
            continue
        m = mixed_volume(list(face.summands), lat)
        if m > 0:
            items.append((cone, int(m)))
    return TropicalCycle(amb, d, items)


def get_tropical_cycle(newton_polytopes, delta=1):
    """Tropicalization of the closed image, as a cycle in R^n.

    Projects the graph cycle by forgetting the domain coordinates.  The
    result overcounts by the degree delta of the parametrization onto its
    image; passing delta consolidates duplicate cones and divides every
    weight, raising NonDivisibleDegree when a weight is not a multiple.
    With delta=1 duplicate cones from distinct graph cones are preserved.
    """
    if delta < 1:
        raise ValueError("delta must be a positive integer")
    polys = list(newton_polytopes)
    G = get_graph_cycle(polys)
    n = len(polys)
    proj = [[1 if j == i else 0 for j in range(G.ambient_dim)]
            for i in range(n)]
    C = push_forward_cycle(G, proj)
    if delta == 1:
        return C
    merged = C.consolidated()
    items = []
    for cone, w in merged:
        if w % delta:
            raise NonDivisibleDegree(
                f"weight {w} not divisible by degree {delta}")
        items.append((cone, w // delta))
    return TropicalCycle(C.ambient_dim, C.pure_dim, items)


def _matroid_components(M):
    """Connected components of a loopless matroid, as sorted index lists.

    Fundamental circuits with respect to one fixed basis already generate
    the component partition, so a single echelon pass suffices.
    """
    n = M.ground_size
    basis = []
    basis_rows = []
    for e in range(n):
        if ec.rational_rank(basis_rows + [list(M.realization[e])]) > len(basis):
            basis.append(e)
            basis_rows.append(list(M.realization[e]))
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    cols = ec.transpose(basis_rows)
    in_basis = set(basis)
    for e in range(n):
        if e in in_basis:
            continue
        coeff = ec.solve_linear(cols, M.realization[e])
        for k, c in zip(basis, coeff):
            if c:
                union(e, k)
    groups = {}
    for e in range(n):
        groups.setdefault(find(e), []).append(e)
    return sorted(groups.values())


def _connected_flats(M):
    """Proper nonempty flats of M whose restriction is connected."""
    flats = set()
    level = {M.closure((e,)) for e in range(M.ground_size)}
    while level:
        flats |= level
        grown = set()
        for F in level:
            for e in range(M.ground_size):
                if e not in F:
                    G = M.closure(F | {e})
                    if M.rank_of(G) < M.rank:
                        grown.add(G)
        level = grown - flats
    out = []
    for F in sorted(flats, key=sorted):
        if len(F) == 1 or len(_matroid_components(
                LinearMatroid([M.realization[e] for e in F]))) == 1:
            out.append(F)
    return out


def _maximal_nested_sets(M):
    """Maximal nested sets of connected proper flats of a connected matroid.

    A set is nested when every antichain of two or more members joins to a
    flat that is disconnected or the full ground set.  These index the
    coarsest canonical cone structure on the tropical linear space; each
    nested cone is the union of the maximal-chain cones inside it, so the
    underlying cycle is the fine one.  Maximal nested sets all have
    rank - 1 members.
    """
    r = M.rank
    ground = frozenset(range(M.ground_size))
    building = _connected_flats(M)
    member = set(building)
    out = []
    for S in itertools.combinations(building, r - 1):
        nested = True
        for k in range(2, r):
            for anti in itertools.combinations(S, k):
                if any(a <= b or b <= a
                       for a, b in itertools.combinations(anti, 2)):
                    continue
                join = M.closure(frozenset().union(*anti))
                if join == ground or join in member:
                    nested = False
                    break
            if not nested:
                break
        if nested:
            out.append(list(S))
    return out


def _product_bergman_cycle(M):
    """Bergman cycle of M with the direct-sum product structure.

    One cone per choice of a maximal nested set in every connected
    component; the component indicator vectors span the lineality.  The
    support and weights agree with the fine chains-of-flats fan, but each
    cone is a product over components, so a linear map whose fibers run
    along component indicators stays within single cones, and each factor
    is as coarse as the nested structure allows.
    """
    if M.loops():
        raise LoopyMatroid(f"matroid has loops {sorted(M.loops())}")
    m = M.ground_size
    comps = _matroid_components(M)
    lin = [indicator(frozenset(comp), m) for comp in comps]
    factors = []
    for comp in comps:
        sub = LinearMatroid([M.realization[e] for e in comp])
        embedded = []
        for nested in _maximal_nested_sets(sub):
            embedded.append(
                [tuple(BERGMAN_SIGN * x
                       for x in indicator(frozenset(comp[i] for i in F), m))
                 for F in nested])
        factors.append(embedded)
    items = []
    for choice in itertools.product(*factors):
        rays = [r for group in choice for r in group]
        items.append((Cone(rays, lin, m), 1))
    return TropicalCycle(m, M.rank, items)


def get_trop_a_disc(A):
    """Tropical discriminant of a point configuration A, as a cycle in R^n.

    A is a d x n integer matrix of rank d whose row span contains the
    all-ones vector (RowSpanMissingOnes otherwise).  The cycle is the
    image of the Bergman fan of the matroid of the rows of
    U = [[B^T, 0], [0, I_d]] under V = [I_n | A^T], with B a Gale dual
    of A; weights are the lattice indices of the projected cone lattices.

    The Bergman fan must carry its component product structure here: the
    projection collapses each cone along a component-indicator direction,
    and splitting cones across that direction would overcount the image.
    Factors use the coarse nested-set structure, so the returned cones are
    the images of the maximal nested cones that keep full dimension.
    """
    A = [[int(x) for x in row] for row in A]
    d = len(A)
    n = len(A[0]) if d else 0
    B = ec.gale_dual(A)
    At = ec.transpose(A)
    if ec.solve_linear(At, (1,) * n) is None:
        raise RowSpanMissingOnes(
            "all-ones vector is outside the row span of A")
    nd = n - d
    rows_U = [tuple(B[k][i] for k in range(nd)) + (0,) * d for i in range(n)]
    for j in range(d):
        rows_U.append((0,) * nd + tuple(1 if k == j else 0 for k in range(d)))
    M = LinearMatroid(rows_U)
    berg = _product_bergman_cycle(M)
    V = [tuple(1 if j == i else 0 for j in range(n)) + tuple(At[i])
         for i in range(n)]
    return push_forward_cycle(berg, V)


def get_vertex(C, w, cfg=None):
    """Vertex of the Newton polytope dual to C minimizing direction w.

    C must be a pure codimension-one cycle in R^n and w a nonzero integer
    vector.  Coordinate i of the vertex counts the weighted crossings of
    the ray w + R_+ e_i through the cycle, each crossing contributing the
    cone weight times the i-th coordinate of the primitive normal of the
    cone's hyperplane.  Queries that graze a cone boundary or run inside
    a hyperplane are retried with a magnified perturbed direction chosen
    so the answer still minimizes the original w; GenericityExhausted
    after cfg.max_retries retries.
    """
    if cfg is None:
        cfg = OracleConfig()
    n = C.ambient_dim
    if C.pure_dim != n - 1:
        raise DimensionMismatch(
            f"cycle is pure dimension {C.pure_dim}, need {n - 1}")
    probe = []
    for x in w:
        xi = int(x)
        if xi != x:
            raise ValueError("direction must be an integer vector")
        probe.append(xi)
    if not any(probe):
        raise ValueError("direction must be nonzero")
    probe = tuple(probe)
    if len(probe) != n:
        raise DimensionMismatch(f"direction has length {len(probe)}, need {n}")
    data = []
    bound = 0
    for cone, mult in C:
        nu = cone.hyperplane_normal()
        data.append((cone, mult, nu))
        bound += mult * max(abs(x) for x in nu)
    if not data:
        return (0,) * n
    rng = random.Random(cfg.rng_seed)
    big = 2 * n * cfg.perturbation_height * bound + 1
    base = probe
    for attempt in range(cfg.max_retries + 1):
        v = _crossing_counts(data, probe, n)
        if v is not None:
            return v
        delta = tuple(rng.randint(1, cfg.perturbation_height)
                      for _ in range(n))
        probe = tuple(big * wi + di for wi, di in zip(base, delta))
    raise GenericityExhausted(
        f"no generic perturbation of {tuple(w)} found after "
        f"{cfg.max_retries} retries")


def _crossing_counts(data, w, n):
    """Weighted crossing counts for one probe; None when degenerate."""
    v = [0] * n
    for cone, mult, nu in data:
        nw = ec.dot(nu, w)
        for i in range(n):
            if nu[i] == 0:
                if nw == 0:
                    return None
                continue
            s = ec.rat(-nw, nu[i])
            if s < 0:
                continue
            if s == 0:
                return None
            x = tuple(w[j] + s if j == i else w[j] for j in range(n))
            if cone.contains_relint(x):
                v[i] += mult * abs(nu[i])
            elif cone.contains(x):
                return None
    return tuple(v)


def reconstruct_polytope(C, cfg=None):
    """Newton polytope of the hypersurface with tropicalization C.

    Runs the vertex oracle inside a beneath-beyond loop: maintain the hull
    of the vertices seen, confirm every affine-hull equation and every
    facet by querying its outer normal, and add the answer as a new vertex
    whenever it lies beyond.  Confirmed facets are kept as certificates;
    an oracle answer violating one raises OracleInconsistent.  The result
    is the translate with all coordinate minima at zero.
    """
    if cfg is None:
        cfg = OracleConfig()
    n = C.ambient_dim
    if C.pure_dim != n - 1:
        raise DimensionMismatch(
            f"cycle is pure dimension {C.pure_dim}, need {n - 1}")
    merged = C.consolidated()
    return _reconstruct(lambda w: get_vertex(merged, w, cfg), n, cfg)


def _reconstruct(oracle, n, cfg):
    pts = set()
    certified = set()

    def ask(w):
        v = tuple(oracle(w))
        wv = ec.dot(w, v)
        for p in pts:
            if ec.dot(w, p) < wv:
                raise OracleInconsistent(
                    f"answer {v} for direction {w} is beaten by known "
                    f"vertex {p}")
        for a, b in certified:
            if ec.dot(a, v) > b:
                raise OracleInconsistent(
                    f"answer {v} violates confirmed facet {a} . x <= {b}")
        pts.add(v)
        return v

    rng = random.Random(f"reconstruct-{cfg.rng_seed}")
    for i in range(n):
        e = tuple(1 if j == i else 0 for j in range(n))
        ask(e)
        ask(tuple(-x for x in e))
    for _ in range(n):
        w = (0,) * n
        while not any(w):
            w = tuple(rng.randint(-9, 9) for _ in range(n))
        ask(w)
    while True:
        H = Polytope(sorted(pts))
        grew = False
        for c, c0 in H.equations():
            c = tuple(c)
            if (c, c0) in certified:
                continue
            for probe in (c, tuple(-x for x in c)):
                v = ask(probe)
                if ec.dot(c, v) != c0:
                    grew = True
                    break
            if grew:
                break
            certified.add((c, c0))
            certified.add((tuple(-x for x in c), -c0))
        if grew:
            continue
        complete = True
        for a, b, _inc in H.facets():
            a = tuple(a)
            if (a, b) in certified:
                continue
            v = ask(tuple(-x for x in a))
            if ec.dot(a, v) > b:
                complete = False
                break
            certified.add((a, b))
        if complete:
            return H

"""Recovering the implicit equation once its Newton polytope is known.

The equation is determined up to scale by one linear algebra step: evaluate
all candidate monomials at enough points of the variety and take the kernel
of the resulting matrix.  Points come from pushing random rational
parameters through the parametrization, or through the Horn map for
discriminants.  Kernels are computed exactly over Q or a prime field, with
an optional multi-prime mode that lifts prime-field solutions back to Q by
Chinese remaindering.
"""

import random

from . import exactcore as ec
from .errors import (
    InputFormatError,
    KernelEmpty,
    KernelTooBig,
    ReconstructionFailed,
    SamplingExhausted,
    VerificationFailed,
)
from .implicitize import Parametrization

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _is_prime(m):
    if m < 2:
        return False
    for q in _MR_BASES:
        if m % q == 0:
            return m == q
    d = m - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, m)
        if x in (1, m - 1):
            continue
        for _ in range(r - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


def _primes_descending(start):
    m = start if start % 2 else start - 1
    while m > 2:
        if _is_prime(m):
            yield m
        m -= 2


def parse_field(spec):
    """Field spec: "q", "gf:<prime>", "crt:<count>", or a bare prime."""
    if spec is None or spec == "q":
        return ("q", None)
    if isinstance(spec, int):
        if not _is_prime(spec):
            raise InputFormatError(f"{spec} is not prime")
        return ("gf", spec)
    if isinstance(spec, str):
        if spec.startswith("gf:"):
            p = int(spec[3:])
            if not _is_prime(p):
                raise InputFormatError(f"{p} is not prime")
            return ("gf", p)
        if spec.startswith("crt:"):
            k = int(spec[4:])
            if k < 1:
                raise InputFormatError("crt wants a positive prime count")
            return ("crt", k)
    raise InputFormatError(f"unknown field spec {spec!r}")


def _pow(x, e):
    if e >= 0:
        return x ** e
    return ec.div_exact(1, x ** (-e))


def _pow_mod(x, e, p):
    if e >= 0:
        return pow(x, e, p)
    return pow(pow(x, p - 2, p), -e, p)


class MonomialBasis:
    """Distinct integer exponent vectors, lexicographically sorted."""

    def __init__(self, exponents, ambient_dim=None):
        exps = sorted(tuple(int(x) for x in e) for e in exponents)
        if not exps:
            raise ValueError("empty monomial basis")
        if ambient_dim is None:
            ambient_dim = len(exps[0])
        for e in exps:
            if len(e) != ambient_dim:
                raise ValueError(f"exponent {e} is not length {ambient_dim}")
        for a, b in zip(exps, exps[1:]):
            if a == b:
                raise ValueError(f"duplicate exponent {a}")
        self.exponents = tuple(exps)
        self.ambient_dim = ambient_dim

    @classmethod
    def from_polytope(cls, P):
        return cls(P.lattice_points(), P.ambient_dim)

    def __len__(self):
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    def row(self, point):
        """Values of every basis monomial at a rational point."""
        out = []
        for e in self.exponents:
            v = 1
            for x, k in zip(point, e):
                if k:
                    v *= _pow(x, k)
            out.append(v)
        return tuple(out)

    def row_mod(self, point, p):
        out = []
        for e in self.exponents:
            v = 1
            for x, k in zip(point, e):
                if k:
                    v = v * _pow_mod(x, k, p) % p
            out.append(v)
        return tuple(out)

    def __repr__(self):
        return (f"MonomialBasis({len(self.exponents)} monomials "
                f"in dim {self.ambient_dim})")


class ImplicitPolynomial:
    """Polynomial supported on a monomial basis, canonically scaled.

    Over Q the coefficients are coprime integers with the first nonzero one
    positive; over GF(p) the first nonzero coefficient is 1 and ``modulus``
    is set.  Zero coefficients are kept so the vector aligns with the basis.
    """

    def __init__(self, basis, coefficients, modulus=None):
        coefficients = tuple(coefficients)
        if len(coefficients) != len(basis):
            raise ValueError("one coefficient per basis monomial")
        if not any(coefficients):
            raise ValueError("zero polynomial")
        self.basis = basis
        self.coefficients = coefficients
        self.modulus = modulus

    def coefficient(self, exponent):
        exponent = tuple(exponent)
        for e, c in zip(self.basis, self.coefficients):
            if e == exponent:
                return c
        raise KeyError(f"{exponent} is outside the basis")

    def evaluate(self, point):
        if self.modulus is None:
            total = 0
            for c, v in zip(self.coefficients, self.basis.row(point)):
                if c:
                    total += c * v
            return total
        p = self.modulus
        reduced = ec.PrimeField(p).reduce_vector(point)
        total = 0
        for c, v in zip(self.coefficients, self.basis.row_mod(reduced, p)):
            total += c * v
        return total % p

    def terms(self):
        return [(c, e) for c, e in zip(self.coefficients, self.basis) if c]

    def to_json(self):
        n = self.basis.ambient_dim
        out = {
            "vars": [f"x{i + 1}" for i in range(n)],
            "terms": [{"coeff": c if isinstance(c, int)
                       else f"{c.numerator}/{c.denominator}",
                       "exp": list(e)}
                      for c, e in self.terms()],
        }
        if self.modulus is not None:
            out["modulus"] = self.modulus
        return out

    def __repr__(self):
        kind = f"mod {self.modulus}" if self.modulus else "over Q"
        return f"ImplicitPolynomial({len(self.terms())} terms {kind})"


def _random_rational(rng, height):
    num = rng.randint(1, height)
    den = rng.randint(1, height)
    sign = 1 if rng.random() < 0.5 else -1
    return ec.rat(sign * num, den)


def _component_value(terms, t):
    total = 0
    for coeff, exp in terms:
        v = coeff
        for x, k in zip(t, exp):
            if k:
                v = v * _pow(x, k)
        total += v
    return total


def sample_points(f, count, height=20, seed=0):
    """Distinct points of the image variety: f at random rational parameters.

    Parameter coordinates are sign * num/den with num, den in [1, height];
    draws where any component vanishes, and repeats of an earlier point,
    are rejected.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if height < 2:
        raise ValueError("height must be at least 2")
    rng = random.Random(seed)
    out = []
    seen = set()
    for _ in range(100 * count):
        t = tuple(_random_rational(rng, height) for _ in range(f.d))
        x = tuple(_component_value(terms, t) for terms in f.components)
        if any(v == 0 for v in x) or x in seen:
            continue
        seen.add(x)
        out.append(x)
        if len(out) == count:
            return out
    raise SamplingExhausted(
        f"{count} torus samples not found in {100 * count} draws")


def horn_sample(A, B, count, height=20, seed=0):
    """Points of the A-discriminant via the Horn map.

    Draws random rational u and t and emits x_j = t^(a_j) * (uB)_j, with
    a_j the j-th column of A; draws where some (uB)_j vanishes, and
    repeats of an earlier point, are rejected.  Requires A B^T = 0.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if height < 2:
        raise ValueError("height must be at least 2")
    A = [list(map(int, row)) for row in A]
    B = [list(map(int, row)) for row in B]
    d = len(A)
    n = len(A[0]) if d else 0
    for arow in A:
        for brow in B:
            if ec.dot(arow, brow) != 0:
                raise ValueError("A B^T must vanish for Horn sampling")
    rng = random.Random(seed)
    out = []
    seen = set()
    for _ in range(100 * count):
        u = tuple(_random_rational(rng, height) for _ in range(len(B)))
        t = tuple(_random_rational(rng, height) for _ in range(d))
        ub = [sum(u[r] * B[r][j] for r in range(len(B))) for j in range(n)]
        if any(v == 0 for v in ub):
            continue
        x = []
        for j in range(n):
            v = ub[j]
            for i in range(d):
                if A[i][j]:
                    v = v * _pow(t[i], A[i][j])
            x.append(v)
        x = tuple(x)
        if x in seen:
            continue
        seen.add(x)
        out.append(x)
        if len(out) == count:
            return out
    raise SamplingExhausted(
        f"{count} Horn samples not found in {100 * count} draws")


def vandermonde_kernel(basis, points, field="q"):
    """Canonical kernel generator of the monomial evaluation matrix.

    Each point contributes the row of basis monomial values; duplicate
    points are dropped first.  The kernel must be exactly one dimensional:
    KernelEmpty when no equation fits, KernelTooBig when several do.  Over
    GF(p) the points are rational and get reduced, skipping points with
    denominator collisions or zero residues.
    """
    kind, p = parse_field(field)
    if kind == "crt":
        raise InputFormatError("crt mode lives in implicit_equation")
    seen = set()
    pts = []
    for pt in points:
        pt = tuple(pt)
        if pt not in seen:
            seen.add(pt)
            pts.append(pt)
    if len(pts) < len(basis) - 1:
        raise ValueError(
            f"need at least {len(basis) - 1} distinct points, "
            f"got {len(pts)}")
    if kind == "q":
        rows = [basis.row(pt) for pt in pts]
        kernel = ec.rational_kernel(rows, len(basis))
    else:
        F = ec.PrimeField(p)
        rows = []
        for pt in pts:
            try:
                red = F.reduce_vector(pt)
            except ZeroDivisionError:
                continue
            if any(v == 0 for v in red):
                continue
            rows.append(basis.row_mod(red, p))
        kernel = ec.gfp_kernel(rows, p, len(basis))
    if not kernel:
        raise KernelEmpty(
            "no nonzero polynomial on this basis fits the samples")
    if len(kernel) > 1:
        raise KernelTooBig(
            f"kernel has dimension {len(kernel)}, need 1")
    return kernel[0]


def implicit_equation(f, P, field="q", seed=0, height=20):
    """Defining equation of the hypersurface with Newton polytope P.

    f is a Parametrization, or an (A, B) matrix pair meaning points come
    from the Horn map.  Uses |basis| - 1 samples and certifies the answer
    on ten fresh samples (VerificationFailed otherwise).  When the kernel
    comes back too big the sample set is topped up and the solve retried a
    few times: over a small prime the reduction discards a fraction of the
    rows, so the shortfall grows with the basis.
    """
    kind, arg = parse_field(field)
    basis = MonomialBasis.from_polytope(P)
    if isinstance(f, Parametrization):
        def sampler(m, s):
            return sample_points(f, m, height, s)
    else:
        A, B = f

        def sampler(m, s):
            return horn_sample(A, B, m, height, s)

    pts = sampler(max(len(basis) - 1, 1), seed)
    if kind == "crt":
        coeffs = _crt_kernel(basis, pts, arg, sampler, seed)
        poly = ImplicitPolynomial(basis, coeffs)
    else:
        fld = "q" if kind == "q" else arg
        rounds = 0
        while True:
            try:
                coeffs = vandermonde_kernel(basis, pts, fld)
                break
            except KernelTooBig:
                rounds += 1
                if rounds > 5:
                    raise
                pts = pts + sampler(len(basis) // 4 + 10, seed + rounds)
        poly = ImplicitPolynomial(basis, coeffs,
                                  modulus=arg if kind == "gf" else None)
    _verify(poly, sampler, seed)
    return poly


def _crt_kernel(basis, pts, nprimes, sampler, seed):
    """Per-prime kernels, aligned by a common unit coordinate, lifted to Q."""
    gen = _primes_descending(ec.DEFAULT_PRIME)
    residues = []
    used = []
    target = nprimes
    grew = False
    skipped = 0
    while True:
        while len(used) < target:
            p = next(gen)
            try:
                v = vandermonde_kernel(basis, pts, p)
            except KernelTooBig:
                if not grew:
                    pts = pts + sampler(10, seed + 1)
                    grew = True
                    continue
                skipped += 1
                if skipped > 5:
                    raise
                continue
            residues.append(v)
            used.append(p)
        unit = next((j for j in range(len(basis))
                     if all(v[j] for v in residues)), None)
        if unit is None:
            raise ReconstructionFailed(
                "no basis coordinate is a unit for every prime")
        scaled = []
        for v, p in zip(residues, used):
            inv = pow(v[unit], p - 2, p)
            scaled.append(tuple(x * inv % p for x in v))
        try:
            lifted = ec.crt_rational_reconstruct(scaled, used)
        except ReconstructionFailed:
            if target >= 6 * nprimes:
                raise
            target += nprimes
            continue
        return ec.canonicalize_rational_vector(list(lifted))


def _verify(poly, sampler, seed):
    checked = 0
    for pt in sampler(40, seed + 1000):
        try:
            value = poly.evaluate(pt)
        except ZeroDivisionError:
            continue
        if value != 0:
            raise VerificationFailed(
                f"candidate equation is nonzero at fresh sample {pt}")
        checked += 1
        if checked == 10:
            return
    raise VerificationFailed(
        "fewer than 10 fresh samples could be evaluated")

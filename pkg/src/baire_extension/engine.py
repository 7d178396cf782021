"""Geometric-series extension of a bounded function from A to the whole space.

The signed construction writes the extension as

    F(x) = sum_n c (2/3)^(n+1) (1/2 - [x in H_n])

where each H_n separates the points of A on which the current residual is
large and negative from those where it is large and positive. The residual on
A shrinks by a factor 2/3 per step, so truncating after K+1 terms leaves an
error of at most c (2/3)^(K+1) on A.

The positive construction runs the signed one on ``2 f / s - 1`` (s = sup f)
and writes the result as ``s/2 * sum_n (2/3)^(n+1) [x in G_n]`` with G_n the
complement of H_n.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import gmpy2

from .separation import SeparatingSet, complement, separate
from .space import AmbientSpace, ClassLabel, SampledFunction, SubsetMask, ValidationError, sup_norm, to_exact

SIGNED = "signed"
POSITIVE = "positive"
MODES = (SIGNED, POSITIVE)
ARITHMETICS = ("float", "rational")
MPQ = type(gmpy2.mpq(0))


@dataclass(frozen=True)
class Arithmetic:
    """Number system used by a run: exact rationals (gmpy2 ``mpq``) or binary floats."""

    name: str

    def __post_init__(self):
        if self.name not in ARITHMETICS:
            raise ValidationError(f"unknown arithmetic {self.name!r}; expected one of {ARITHMETICS}")

    @property
    def exact(self) -> bool:
        return self.name == "rational"

    def num(self, value):
        if self.exact:
            return value if isinstance(value, MPQ) else gmpy2.mpq(to_exact(value))
        if isinstance(value, str):
            return float(to_exact(value))
        return float(value)

    @property
    def zero(self):
        return gmpy2.mpq(0) if self.exact else 0.0

    @property
    def half(self):
        return gmpy2.mpq(1, 2) if self.exact else 0.5

    @property
    def ratio(self):
        return gmpy2.mpq(2, 3) if self.exact else 2.0 / 3.0

    def power(self, k: int):
        """(2/3)**k in this arithmetic."""
        return self.ratio**k


def as_arithmetic(arithmetic) -> Arithmetic:
    return arithmetic if isinstance(arithmetic, Arithmetic) else Arithmetic(arithmetic)


@dataclass(frozen=True)
class Term:
    """One series term; ``coefficient`` is the full prefactor c (2/3)^(n+1).

    In positive mode ``H`` holds the set G_n whose indicator is summed.
    """

    n: int
    H: SeparatingSet
    coefficient: object


@dataclass(frozen=True)
class ExtensionResult:
    c: object
    mode: str
    terms: tuple
    K: int
    error_bound: object
    extended: dict
    alpha: ClassLabel
    arithmetic: str = "float"
    space_size: int = field(default=0)


@dataclass(frozen=True)
class Residual:
    """What is left of the normalized function on A after the first n terms."""

    values: dict
    bound: object
    space_size: int


def normalize(f: SampledFunction):
    """Return ``(c, f / c)``; for ``c == 0`` the function comes back untouched."""
    c = sup_norm(f)
    if c == 0:
        return c, f
    return c, SampledFunction(f.domain, {a: v / c for a, v in f.values.items()})


def threshold_sets(r: Residual, n: int, arithmetic="float"):
    """Points of A where the residual is at most -b/3 and at least b/3, b = (2/3)^n."""
    ar = as_arithmetic(arithmetic)
    level = ar.power(n) / 3
    low = [a for a, v in r.values.items() if v <= -level]
    high = [a for a, v in r.values.items() if v >= level]
    return SubsetMask(frozenset(low), r.space_size), SubsetMask(frozenset(high), r.space_size)


def truncation_length(c, eps, arithmetic="float") -> int:
    """Smallest K >= 0 with c (2/3)^(K+1) <= eps."""
    ar = as_arithmetic(arithmetic)
    c, eps = ar.num(c), ar.num(eps)
    if eps <= 0:
        raise ValidationError(f"tolerance must be positive, got {eps}")
    if c == 0:
        return 0
    K = 0
    bound = c * ar.ratio
    while bound > eps:
        K += 1
        bound = c * ar.power(K + 1)
    return K


def _check_inputs(space: AmbientSpace, A: SubsetMask, f: SampledFunction, tolerance, ar: Arithmetic, depth):
    if len(A) == 0:
        raise ValidationError("domain subset A is empty")
    if A.space_size != space.size:
        raise ValidationError(f"A indexes a space of size {A.space_size}, not {space.size}")
    if f.domain.members != A.members:
        raise ValidationError("function is not defined exactly on A")
    if depth is None:
        if ar.num(tolerance) <= 0:
            raise ValidationError(f"tolerance must be positive, got {tolerance}")
    elif not isinstance(depth, int) or depth < 0:
        raise ValidationError(f"depth must be a non-negative integer, got {depth!r}")


def _separating_sequence(space, unit: SampledFunction, K: int, alpha: ClassLabel, ar: Arithmetic) -> list:
    """H_0..H_K for a function with sup norm 1 on A."""
    half = ar.half
    r = Residual({a: ar.num(v) for a, v in unit.values.items()}, ar.power(0), space.size)
    sets = []
    for n in range(K + 1):
        M, N = threshold_sets(r, n, ar)
        H = separate(space, M, N, alpha)
        sets.append(H)
        step = ar.power(n + 1)
        r = Residual(
            {a: v - step * (half - (a in H)) for a, v in r.values.items()},
            step,
            space.size,
        )
    return sets


def _zero_result(space, mode, alpha, ar) -> ExtensionResult:
    return ExtensionResult(
        c=ar.zero, mode=mode, terms=(), K=0, error_bound=ar.zero,
        extended={x: ar.zero for x in space.points}, alpha=alpha,
        arithmetic=ar.name, space_size=space.size,
    )


def term_value(result: ExtensionResult, term: Term, x: int):
    """Contribution of one term at ``x``."""
    inside, outside = _term_levels(result, term)
    return inside if x in term.H else outside


def _term_levels(result: ExtensionResult, term: Term):
    """Term value on its set and off it."""
    ar = as_arithmetic(result.arithmetic)
    if result.mode == POSITIVE:
        return term.coefficient * ar.half, ar.zero
    return term.coefficient * (ar.half - 1), term.coefficient * ar.half


def _check_point(result: ExtensionResult, x) -> None:
    if not (isinstance(x, int) and 0 <= x < result.space_size):
        raise ValidationError(f"point id {x!r} out of range 0..{result.space_size - 1}")


def partial_sums(result: ExtensionResult, x: int) -> list:
    """S_0(x), ..., S_K(x); S_m sums terms 0..m."""
    _check_point(result, x)
    total = as_arithmetic(result.arithmetic).zero
    sums = []
    for term in result.terms:
        total = total + term_value(result, term, x)
        sums.append(total)
    return sums


def evaluate(result: ExtensionResult, x: int):
    sums = partial_sums(result, x)
    return sums[-1] if sums else as_arithmetic(result.arithmetic).zero


def _assemble(space, mode, c, K, sets, alpha, ar) -> ExtensionResult:
    terms = tuple(Term(n, H, c * ar.power(n + 1)) for n, H in enumerate(sets))
    result = ExtensionResult(
        c=c, mode=mode, terms=terms, K=K, error_bound=c * ar.power(K + 1),
        extended={}, alpha=alpha, arithmetic=ar.name, space_size=space.size,
    )
    # same summation order as evaluate, so float results agree bit for bit
    levels = [(t.H.members.members, *_term_levels(result, t)) for t in terms]
    extended = {}
    for x in space.points:
        total = ar.zero
        for members, inside, outside in levels:
            total = total + (inside if x in members else outside)
        extended[x] = total
    return replace(result, extended=extended)


def extend(space: AmbientSpace, A: SubsetMask, f: SampledFunction, tolerance=1e-6,
           alpha: ClassLabel = ClassLabel(), arithmetic="float", depth: int | None = None) -> ExtensionResult:
    """Signed series extension of ``f`` from ``A`` to all of ``space``.

    The number of terms is the smallest that certifies ``tolerance`` on A,
    unless ``depth`` fixes K directly.
    """
    ar = as_arithmetic(arithmetic)
    _check_inputs(space, A, f, tolerance, ar, depth)
    f = SampledFunction(f.domain, {a: ar.num(v) for a, v in f.values.items()})
    c, unit = normalize(f)
    if c == 0:
        return _zero_result(space, SIGNED, alpha, ar)
    K = truncation_length(c, tolerance, ar) if depth is None else depth
    sets = _separating_sequence(space, unit, K, alpha, ar)
    return _assemble(space, SIGNED, c, K, sets, alpha, ar)


def positive_companion(f: SampledFunction, arithmetic="float"):
    """Return ``(s, g)`` with s = sup f and g = 2 f / s - 1 (values in [-1, 1])."""
    ar = as_arithmetic(arithmetic)
    vals = {a: ar.num(v) for a, v in f.values.items()}
    negative = sorted(a for a, v in vals.items() if v < 0)
    if negative:
        raise ValidationError(f"positive mode needs f >= 0; negative value at id {negative[0]}")
    s = max(vals.values())
    if s == 0:
        return s, None
    return s, SampledFunction(f.domain, {a: 2 * v / s - 1 for a, v in vals.items()})


def extend_positive(space: AmbientSpace, A: SubsetMask, f: SampledFunction, tolerance=1e-6,
                    alpha: ClassLabel = ClassLabel(), arithmetic="float", depth: int | None = None) -> ExtensionResult:
    """Non-negative extension ``s/2 * sum (2/3)^(n+1) [x in G_n]`` of ``f >= 0``."""
    ar = as_arithmetic(arithmetic)
    _check_inputs(space, A, f, tolerance, ar, depth)
    s, g = positive_companion(f, ar)
    if s == 0:
        return _zero_result(space, POSITIVE, alpha, ar)
    K = truncation_length(s, tolerance, ar) if depth is None else depth
    _, g_unit = normalize(g)
    sets = [complement(space, H) for H in _separating_sequence(space, g_unit, K, alpha, ar)]
    return _assemble(space, POSITIVE, s, K, sets, alpha, ar)

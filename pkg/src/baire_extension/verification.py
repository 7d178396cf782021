"""Invariant checks for finished runs and an exact brute-force oracle.

Every check measures a *slack*: the allowed quantity minus the measured one
(for equalities, the tolerance minus the deviation). A check passes when the
slack is non-negative. Rational runs are held to zero tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import gmpy2

from . import engine
from .engine import POSITIVE, SIGNED, ExtensionResult, as_arithmetic, evaluate, partial_sums, threshold_sets
from .separation import ContractViolation
from .space import AmbientSpace, SampledFunction, SubsetMask, ValidationError

REL_TOL = 1e-12
ABS_TOL = 1e-9
ORACLE_MAX_POINTS = 64
ORACLE_MAX_DEPTH = 64
SCALE_FACTOR = 2

CHECK_NAMES = (
    "term_magnitude",
    "restriction_bound",
    "sup_bound",
    "separation",
    "positivity",
    "affine_identity",
    "partial_sum_identity",
    "determinism",
    "scaling_equivariance",
    "series_evaluation",
    "truncation",
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    slack: object = 0
    witness: object = None
    measured: object = None
    applicable: bool = True


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return all(ch.passed for ch in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for ch in self.checks:
            if ch.name == name:
                return ch
        raise KeyError(name)

    def failed(self) -> list:
        return [ch for ch in self.checks if not ch.passed]


def _not_applicable(name: str) -> CheckResult:
    return CheckResult(name, True, 0, None, None, applicable=False)


class RunContext:
    """Shared quantities for checking one result against its inputs."""

    def __init__(self, space: AmbientSpace, A: SubsetMask, f: SampledFunction, result: ExtensionResult):
        if result.mode not in engine.MODES:
            raise ContractViolation(f"unknown mode {result.mode!r}")
        if result.space_size != space.size:
            raise ContractViolation(f"result covers {result.space_size} points, space has {space.size}")
        if f.domain.members != A.members or A.space_size != space.size:
            raise ContractViolation("function domain does not match A")
        self.space, self.A, self.result = space, A, result
        self.ar = as_arithmetic(result.arithmetic)
        ar = self.ar
        self.f = SampledFunction(f.domain, {a: ar.num(v) for a, v in f.values.items()})
        self.raw_f = f
        self.q = ar.ratio
        self.half = ar.half
        self.K = result.K
        if result.mode == POSITIVE:
            self.c, self.g = engine.positive_companion(self.f, ar)
        else:
            self.c = max(abs(v) for v in self.f.values.values())
            self.g = None
        self.rel_tol = 0 if ar.exact else REL_TOL
        self.abs_tol = 0 if ar.exact else ABS_TOL

    def signed_view(self):
        """(unit function, H_0..H_K) of the signed recursion behind the result."""
        if self.result.mode == POSITIVE:
            full = frozenset(self.space.points)
            return self.g, [full - t.H.members.members for t in self.result.terms]
        unit = SampledFunction(self.f.domain, {a: v / self.c for a, v in self.f.values.items()})
        return unit, [t.H.members.members for t in self.result.terms]

    def rerun(self, f: SampledFunction) -> ExtensionResult:
        run = engine.extend_positive if self.result.mode == POSITIVE else engine.extend
        return run(self.space, self.A, f, alpha=self.result.alpha, arithmetic=self.ar, depth=self.K)


def check_term_magnitude(run: RunContext) -> CheckResult:
    worst, witness = None, None
    positive = run.result.mode == POSITIVE
    for term in run.result.terms:
        expected = run.c * run.half * run.q ** (term.n + 1)
        for x in run.space.points:
            inside = x in term.H
            # positive terms are read through their signed twin coef * (chi_G - 1/2)
            value = term.coefficient * ((inside - run.half) if positive else (run.half - inside))
            dev = abs(abs(value) - expected)
            if not run.ar.exact:
                dev = dev / expected
            if worst is None or dev > worst:
                worst, witness = dev, {"n": term.n, "x": x}
    if worst is None:
        return CheckResult("term_magnitude", True, 0, None, 0)
    slack = run.rel_tol - worst
    return CheckResult("term_magnitude", slack >= 0, slack, witness if slack < 0 else None, worst)


def check_restriction_bound(run: RunContext) -> CheckResult:
    best = best_m = witness = measured = None
    for a in run.A.sorted_ids():
        sums = [run.ar.zero] + partial_sums(run.result, a)
        for m, s in enumerate(sums):
            err = abs(run.f[a] - s)
            margin = run.c * run.q**m - err
            # ties go to the deepest prefix, then to the smallest id; an exact bound is tight there
            if best is None or margin < best or (margin == best and m > best_m):
                best, best_m, witness, measured = margin, m, {"a": a, "m": m}, err
    slack = best + run.abs_tol
    return CheckResult("restriction_bound", slack >= 0, slack, witness if slack < 0 else None, measured)


def check_sup_bound(run: RunContext) -> CheckResult:
    values = run.result.extended
    top = max(abs(v) for v in values.values())
    arg = max(values, key=lambda x: abs(values[x]))
    tail = run.c * run.q ** (run.K + 1) if run.result.terms else run.ar.zero
    upper = run.c - tail - top
    lower = top - (max(abs(v) for v in run.f.values.values()) - tail)
    slack = min(upper, lower) + run.abs_tol
    witness = {"x": arg, "side": "upper" if upper <= lower else "lower"} if slack < 0 else None
    return CheckResult("sup_bound", slack >= 0, slack, witness, top)


def check_separation(run: RunContext) -> CheckResult:
    if not run.result.terms:
        return CheckResult("separation", True, 0, None, 0)
    unit, sets = run.signed_view()
    r = engine.Residual(dict(unit.values), run.ar.power(0), run.space.size)
    violations, witness = 0, None
    for n, H in enumerate(sets):
        M, N = threshold_sets(r, n, run.ar)
        bad = [(x, "M not inside H") for x in M.sorted_ids() if x not in H]
        bad += [(x, "N meets H") for x in N.sorted_ids() if x in H]
        if bad and witness is None:
            witness = {"n": n, "x": bad[0][0], "reason": bad[0][1]}
        violations += len(bad)
        step = run.ar.power(n + 1)
        r = engine.Residual({a: v - step * (run.half - (a in H)) for a, v in r.values.items()}, step, run.space.size)
    return CheckResult("separation", violations == 0, -violations, witness, violations)


def check_positivity(run: RunContext) -> CheckResult:
    if run.result.mode != POSITIVE:
        return _not_applicable("positivity")
    values = run.result.extended
    arg = min(values, key=lambda x: values[x])
    low = values[arg]
    return CheckResult("positivity", low >= 0, low, {"x": arg} if low < 0 else None, low)


def check_positive_identity(signed_result: ExtensionResult, positive_result: ExtensionResult, s) -> CheckResult:
    """2 S+(x)/s - S_g(x) must equal 1 - (2/3)^(K+1) everywhere.

    Both series are re-evaluated from their terms, so tampered sets show up
    even when the stored values were left alone.
    """
    if signed_result.K != positive_result.K or len(signed_result.terms) != len(positive_result.terms):
        raise ContractViolation(
            f"runs differ in depth: K={signed_result.K} with {len(signed_result.terms)} terms "
            f"vs K={positive_result.K} with {len(positive_result.terms)} terms"
        )
    if signed_result.space_size != positive_result.space_size:
        raise ContractViolation("runs cover different spaces")
    ar = as_arithmetic(positive_result.arithmetic)
    s = ar.num(s)
    if s == 0 or not positive_result.terms:
        return CheckResult("affine_identity", True, 0, None, 0)
    target = 1 - ar.power(positive_result.K + 1)
    tol = 0 if ar.exact else ABS_TOL
    worst, witness = None, None
    for x in range(positive_result.space_size):
        lhs = 2 * evaluate(positive_result, x) / s - evaluate(signed_result, x)
        dev = abs(lhs - target)
        if worst is None or dev > worst:
            worst, witness = dev, {"x": x}
    slack = tol - worst
    return CheckResult("affine_identity", slack >= 0, slack, witness if slack < 0 else None, worst)


def check_affine_identity(run: RunContext) -> CheckResult:
    if run.result.mode != POSITIVE:
        return _not_applicable("affine_identity")
    if run.g is None:
        return CheckResult("affine_identity", True, 0, None, 0)
    signed = engine.extend(run.space, run.A, run.g, alpha=run.result.alpha, arithmetic=run.ar, depth=run.K)
    return check_positive_identity(signed, run.result, run.c)


def check_partial_sum_identity(run: RunContext) -> CheckResult:
    terms = run.result.terms
    if not terms:
        return CheckResult("partial_sum_identity", True, 0, None, 0)
    tail = 1 - run.q ** (run.K + 1)
    geometric = sum((run.q ** (n + 1) for n in range(run.K + 1)), run.ar.zero)
    dev_geo = abs(geometric - 2 * tail)
    dev_coef = abs(sum((t.coefficient for t in terms), run.ar.zero) - 2 * run.c * tail)
    worst = max(dev_geo, dev_coef)
    slack = run.abs_tol - worst
    witness = None if slack >= 0 else {"part": "geometric" if dev_geo >= dev_coef else "coefficients"}
    return CheckResult("partial_sum_identity", slack >= 0, slack, witness, worst)


def _compare_runs(name, expected: ExtensionResult, got: ExtensionResult, coef_scale, run: RunContext) -> CheckResult:
    if len(expected.terms) != len(got.terms):
        return CheckResult(name, False, -1, {"terms": [len(expected.terms), len(got.terms)]})
    worst = run.ar.zero
    for te, tg in zip(expected.terms, got.terms):
        if te.H.members.members != tg.H.members.members:
            x = min(te.H.members.members ^ tg.H.members.members)
            return CheckResult(name, False, -1, {"n": te.n, "x": x})
        want = te.coefficient * coef_scale
        dev = abs(tg.coefficient - want)
        if not run.ar.exact and want:
            dev = dev / abs(want)
        if dev > run.rel_tol:
            return CheckResult(name, False, run.rel_tol - dev, {"n": te.n}, dev)
        worst = max(worst, dev)
    return CheckResult(name, True, run.rel_tol - worst, None, worst)


def check_determinism(run: RunContext) -> CheckResult:
    fresh = run.rerun(run.raw_f)
    out = _compare_runs("determinism", fresh, run.result, 1, run)
    if out.passed:
        diff = [x for x in run.space.points if fresh.extended[x] != run.result.extended.get(x)]
        if diff:
            return CheckResult("determinism", False, -1, {"x": diff[0]}, None)
        # bitwise reproduction is required, whatever the arithmetic
        out.slack = 0
    return out


def check_scaling_equivariance(run: RunContext) -> CheckResult:
    scaled = run.rerun(run.f.scaled(SCALE_FACTOR))
    return _compare_runs("scaling_equivariance", run.result, scaled, SCALE_FACTOR, run)


def check_series_evaluation(run: RunContext) -> CheckResult:
    stored = run.result.extended
    if set(stored) != set(run.space.points):
        missing = sorted(set(run.space.points) - set(stored))
        return CheckResult("series_evaluation", False, -1, {"missing": missing})
    for x in run.space.points:
        if evaluate(run.result, x) != stored[x]:
            return CheckResult("series_evaluation", False, -1, {"x": x}, abs(evaluate(run.result, x) - stored[x]))
    return CheckResult("series_evaluation", True, 0, None, 0)


def check_truncation(run: RunContext, tolerance=None) -> CheckResult:
    res = run.result
    if res.c != run.c:
        return CheckResult("truncation", False, -1, {"field": "c"}, res.c)
    expected_terms = 0 if run.c == 0 else res.K + 1
    if len(res.terms) != expected_terms or any(t.n != i for i, t in enumerate(res.terms)):
        return CheckResult("truncation", False, -1, {"field": "terms"}, len(res.terms))
    bound = run.c * run.q ** (res.K + 1) if run.c else run.ar.zero
    dev = abs(res.error_bound - bound)
    if not run.ar.exact and bound:
        dev = dev / bound
    if dev > run.rel_tol:
        return CheckResult("truncation", False, run.rel_tol - dev, {"field": "error_bound"}, res.error_bound)
    if tolerance is not None:
        eps = run.ar.num(tolerance)
        if res.K != engine.truncation_length(run.c, eps, run.ar):
            return CheckResult("truncation", False, -1, {"field": "K"}, res.K)
        return CheckResult("truncation", True, eps - bound, None, bound)
    return CheckResult("truncation", True, run.rel_tol - dev, None, bound)


def check_equations(space: AmbientSpace, A: SubsetMask, f: SampledFunction, result: ExtensionResult,
                    tolerance=None) -> VerificationReport:
    """Run every invariant against ``result``; one entry per name in CHECK_NAMES."""
    run = RunContext(space, A, f, result)
    checks = [
        check_term_magnitude(run),
        check_restriction_bound(run),
        check_sup_bound(run),
        check_separation(run),
        check_positivity(run),
        check_affine_identity(run),
        check_partial_sum_identity(run),
        check_determinism(run),
        check_scaling_equivariance(run),
        check_series_evaluation(run),
        check_truncation(run, tolerance),
    ]
    return VerificationReport(checks)


# --- oracle -----------------------------------------------------------------


@dataclass(frozen=True)
class OracleTrace:
    extended: dict
    coefficients: tuple
    sets: tuple


@lru_cache(maxsize=64)
def _oracle_distances(space: AmbientSpace) -> tuple:
    """Pairwise distances (squared for euclidean) scaled to integers.

    Multiplying every entry by the common denominator keeps all comparisons
    exact and lets them run on ints.
    """
    n = space.size
    exact = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if space.matrix is not None:
                exact[i][j] = Fraction(space.matrix[i][j])
                continue
            p, q = space.coords[i], space.coords[j]
            d = Fraction(0)
            for k in range(len(p)):
                if space.metric == "euclidean":
                    d += (p[k] - q[k]) * (p[k] - q[k])
                elif space.metric == "manhattan":
                    d += abs(p[k] - q[k])
                else:
                    d = max(d, abs(p[k] - q[k]))
            exact[i][j] = d
    common = 1
    for row in exact:
        for d in row:
            common = math.lcm(common, d.denominator)
    return tuple(tuple(int(d * common) for d in row) for row in exact)


def oracle_trace(space: AmbientSpace, A: SubsetMask, f: SampledFunction, K: int, mode: str = SIGNED,
                 number=gmpy2.mpq) -> OracleTrace:
    """Exact re-derivation of the truncated series, written for clarity over speed.

    Shares no code with the engine: own distances, thresholds, separation
    rule and residual bookkeeping. ``number`` is the exact rational type
    (``fractions.Fraction`` works too, only slower).
    """
    if space.size > ORACLE_MAX_POINTS or K > ORACLE_MAX_DEPTH:
        raise ContractViolation(
            f"oracle limited to {ORACLE_MAX_POINTS} points and depth {ORACLE_MAX_DEPTH}; got {space.size}, {K}"
        )
    if mode not in (SIGNED, POSITIVE):
        raise ValidationError(f"unknown mode {mode!r}")
    points = list(range(space.size))
    dist = _oracle_distances(space)
    third = number(1, 3)
    two_thirds = number(2, 3)
    half = number(1, 2)
    values = {}
    for a in sorted(A.members):
        v = f.values[a]
        if isinstance(v, float):
            v = Fraction(repr(v))
        elif isinstance(v, str):
            v = Fraction(v)
        values[a] = number(v.numerator, v.denominator) if not isinstance(v, int) else number(v)

    if mode == POSITIVE:
        for a in values:
            if values[a] < 0:
                raise ValidationError(f"positive mode needs f >= 0; negative value at id {a}")
        scale = max(values.values())
        if scale == 0:
            return OracleTrace({x: number(0) for x in points}, (), ())
        target = {}
        for a in values:
            target[a] = 2 * values[a] / scale - 1
    else:
        scale = number(0)
        for a in values:
            if abs(values[a]) > scale:
                scale = abs(values[a])
        if scale == 0:
            return OracleTrace({x: number(0) for x in points}, (), ())
        target = {}
        for a in values:
            target[a] = values[a] / scale

    # signed recursion on a function bounded by 1
    residual = dict(target)
    sum_h = {x: number(0) for x in points}
    h_sets = []
    for n in range(K + 1):
        level = two_thirds**n * third
        M = [a for a in residual if residual[a] <= -level]
        N = [a for a in residual if residual[a] >= level]
        H = []
        for x in points:
            dM = None
            for m in M:
                if dM is None or dist[x][m] < dM:
                    dM = dist[x][m]
            dN = None
            for p in N:
                if dN is None or dist[x][p] < dN:
                    dN = dist[x][p]
            # missing distance stands for +infinity
            if dM is not None and (dN is None or dM < dN):
                H.append(x)
        H = frozenset(H)
        h_sets.append(H)
        g_inside = two_thirds ** (n + 1) * (half - 1)
        g_outside = two_thirds ** (n + 1) * half
        for x in points:
            sum_h[x] += g_inside if x in H else g_outside
        for a in residual:
            residual[a] -= g_inside if a in H else g_outside

    coefficients = tuple(scale * two_thirds ** (n + 1) for n in range(K + 1))
    if mode == SIGNED:
        return OracleTrace({x: scale * sum_h[x] for x in points}, coefficients, tuple(h_sets))
    g_sets = tuple(frozenset(points) - H for H in h_sets)
    out = {}
    for x in points:
        total = number(0)
        for n in range(K + 1):
            if x in g_sets[n]:
                total += coefficients[n]
        out[x] = half * total
    return OracleTrace(out, coefficients, g_sets)


def oracle_extend(space: AmbientSpace, A: SubsetMask, f: SampledFunction, K: int, mode: str = SIGNED,
                  number=gmpy2.mpq) -> dict:
    """Ground-truth truncated extension S_K as exact rationals."""
    return oracle_trace(space, A, f, K, mode, number).extended

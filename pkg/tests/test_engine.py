import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from baire_extension import (
    ClassLabel,
    Residual,
    SampledFunction,
    ValidationError,
    evaluate,
    extend,
    extend_positive,
    normalize,
    partial_sums,
    threshold_sets,
    truncation_length,
)
from baire_extension.verification import oracle_trace

from instances import line_space, line_step, random_instance

Q = Fraction(2, 3)


def brute_truncation(c, eps):
    for K in range(10_000):
        if c * Q ** (K + 1) <= eps:
            return K


def sets_of(result):
    return [t.H.sorted_ids() for t in result.terms]


# --- normalize / thresholds / truncation ------------------------------------


def test_normalize_examples():
    space = line_space(5)
    A = space.subset([0, 4])
    c, unit = normalize(SampledFunction(A, {0: Fraction(-3), 4: Fraction(3)}))
    assert c == 3 and unit.values == {0: -1, 4: 1}

    c, unit = normalize(SampledFunction(space.subset([0]), {0: 0}))
    assert c == 0 and unit.values == {0: 0}

    f = SampledFunction(space.subset([0]), {0: 1})
    c, unit = normalize(f)
    assert c == 1 and unit == f


def test_threshold_examples():
    r = Residual({0: Fraction(-1), 4: Fraction(1)}, Fraction(1), 5)
    M, N = threshold_sets(r, 0, "rational")
    assert M.sorted_ids() == [0] and N.sorted_ids() == [4]

    r = Residual({0: Fraction(0), 4: Fraction(0)}, Fraction(1), 5)
    M, N = threshold_sets(r, 3, "rational")
    assert not M.members and not N.members

    # n = 1: thresholds are +-2/9
    r = Residual({0: -Q, 4: Q, 2: Fraction(2, 9), 3: Fraction(1, 5)}, Q, 5)
    M, N = threshold_sets(r, 1, "rational")
    assert M.sorted_ids() == [0] and N.sorted_ids() == [2, 4]


@pytest.mark.parametrize(
    "c, eps, K",
    [
        (1, Fraction(1, 10), 5),
        (1, Q, 0),
        (0, Fraction(1, 10), 0),
        (3, Fraction(1, 10**6), None),
        (Fraction(1, 7), Fraction(1, 3), None),
    ],
)
def test_truncation_length(c, eps, K):
    expected = brute_truncation(c, eps) if c else 0
    if K is not None:
        assert expected == K
    assert truncation_length(c, eps, "rational") == expected
    assert truncation_length(c, float(eps)) == expected


def test_truncation_rejects_bad_tolerance():
    with pytest.raises(ValidationError, match="tolerance"):
        truncation_length(1, 0)


# --- golden runs ----------------------------------------------------------------


def test_line_step_extension():
    space, A, f = line_step()
    res = extend(space, A, f, Fraction(1, 10), arithmetic="rational")
    assert res.K == 5 and res.c == 1
    assert res.error_bound == Q**6
    assert sets_of(res) == [[0, 1]] * 6
    level = 1 - Q**6
    assert res.extended == {0: -level, 1: -level, 2: level, 3: level, 4: level}
    assert [t.coefficient for t in res.terms] == [Q ** (n + 1) for n in range(6)]

    trace = oracle_trace(space, A, f, 5)
    assert trace.extended == res.extended
    assert evaluate(res, 2) == level


def test_constant_one_extension():
    space = line_space(6)
    A = space.subset([1, 3])
    f = SampledFunction(A, {1: 1, 3: 1})
    res = extend(space, A, f, Fraction(1, 10), arithmetic="rational")
    # nothing reaches -1/3, so every H_n is empty and each term is +(1/3)(2/3)^n
    assert sets_of(res) == [[]] * 6
    assert set(res.extended.values()) == {1 - Q**6}
    assert oracle_trace(space, A, f, res.K).extended == res.extended


def test_zero_function():
    space = line_space(4)
    A = space.subset([0, 2])
    res = extend(space, A, SampledFunction(A, {0: 0, 2: 0}), 1e-3, arithmetic="rational")
    assert res.terms == () and res.K == 0 and res.error_bound == 0
    assert set(res.extended.values()) == {0}
    assert evaluate(res, 3) == 0


def test_positive_golden():
    space = line_space(5)
    A = space.subset([0, 4])
    res = extend_positive(space, A, SampledFunction(A, {0: 0, 4: 1}), Fraction(1, 10), arithmetic="rational")
    assert res.K == 5
    assert sets_of(res) == [[2, 3, 4]] * 6
    level = 1 - Q**6
    assert res.extended == {0: 0, 1: 0, 2: level, 3: level, 4: level}
    assert oracle_trace(space, A, SampledFunction(A, {0: 0, 4: 1}), 5, "positive").extended == res.extended


def test_positive_constant_and_zero():
    space = line_space(4)
    A = space.subset([0, 3])
    res = extend_positive(space, A, SampledFunction(A, {0: 1, 3: 1}), Fraction(1, 10), arithmetic="rational")
    assert sets_of(res) == [[0, 1, 2, 3]] * (res.K + 1)
    assert set(res.extended.values()) == {1 - Q ** (res.K + 1)}

    res = extend_positive(space, A, SampledFunction(A, {0: 0, 3: 0}), Fraction(1, 10), arithmetic="rational")
    assert res.terms == () and set(res.extended.values()) == {0}


def test_positive_rejects_negative():
    space = line_space(3)
    A = space.subset([0, 2])
    with pytest.raises(ValidationError, match="negative value at id 2"):
        extend_positive(space, A, SampledFunction(A, {0: 1, 2: -0.5}))


def test_bad_inputs():
    space, A, f = line_step()
    with pytest.raises(ValidationError, match="tolerance"):
        extend(space, A, f, 0)
    with pytest.raises(ValidationError, match="tolerance"):
        extend(space, A, f, -1e-3)
    with pytest.raises(ValidationError, match="not defined exactly on A"):
        extend(space, space.subset([0, 1, 4]), f)
    with pytest.raises(ValidationError, match="arithmetic"):
        extend(space, A, f, arithmetic="decimal")
    with pytest.raises(ValidationError):
        evaluate(extend(space, A, f), 9)


def test_alpha_is_recorded():
    space, A, f = line_step()
    res = extend(space, A, f, 0.01, alpha=ClassLabel(3))
    assert res.alpha == ClassLabel(3)
    assert {t.H.label for t in res.terms} == {ClassLabel(3)}
    assert sets_of(res) == sets_of(extend(space, A, f, 0.01))


def test_float_matches_rational_sets():
    space, A, f = line_step()
    exact = extend(space, A, f, 1e-6, arithmetic="rational")
    approx = extend(space, A, f, 1e-6)
    assert exact.K == approx.K
    assert sets_of(exact) == sets_of(approx)
    for x in space.points:
        assert approx.extended[x] == pytest.approx(float(exact.extended[x]), abs=1e-12)


# --- properties -----------------------------------------------------------------

seeds = st.integers(0, 2**32)


@given(seeds)
def test_term_magnitudes_and_prefix_bounds(seed):
    space, A, f = random_instance(random.Random(seed), max_points=16, max_domain=8)
    res = extend(space, A, f, Fraction(1, 10**4), arithmetic="rational")
    c = max(abs(v) for v in f.values.values())
    for t in res.terms:
        for x in space.points:
            g = t.coefficient * (Fraction(1, 2) - (x in t.H))
            assert abs(g) == c / 2 * Q ** (t.n + 1)
    for a in A:
        sums = [0] + partial_sums(res, a)
        for m, s in enumerate(sums):
            assert abs(f[a] - s) <= c * Q**m
    top = max(abs(v) for v in res.extended.values())
    assert top <= c * (1 - Q ** (res.K + 1))
    assert top >= c - res.error_bound


@given(seeds, st.fractions(min_value=Fraction(1, 50), max_value=50))
def test_scaling_equivariance(seed, lam):
    space, A, f = random_instance(random.Random(seed), max_points=12, max_domain=6)
    base = extend(space, A, f, arithmetic="rational", depth=8)
    scaled = extend(space, A, f.scaled(lam), arithmetic="rational", depth=8)
    assert sets_of(base) == sets_of(scaled)
    assert [lam * t.coefficient for t in base.terms] == [t.coefficient for t in scaled.terms]


@given(seeds)
def test_positive_identity(seed):
    space, A, f = random_instance(random.Random(seed), max_points=12, max_domain=6, nonnegative=True)
    pos = extend_positive(space, A, f, arithmetic="rational", depth=7)
    s = max(f.values.values())
    assert min(pos.extended.values()) >= 0
    if s == 0:
        return
    g = SampledFunction(A, {a: 2 * v / s - 1 for a, v in f.values.items()})
    signed = extend(space, A, g, arithmetic="rational", depth=7)
    for x in space.points:
        assert 2 * pos.extended[x] / s - signed.extended[x] == 1 - Q**8
    for a in A:
        assert abs(f[a] - pos.extended[a]) <= s * Q**8


@given(seeds)
def test_determinism_and_prefix_stability(seed):
    space, A, f = random_instance(random.Random(seed), max_points=10, max_domain=5)
    deep = extend(space, A, f, arithmetic="rational", depth=9)
    assert extend(space, A, f, arithmetic="rational", depth=9) == deep
    if not deep.terms:
        return
    for k in range(9):
        shallow = extend(space, A, f, arithmetic="rational", depth=k)
        assert shallow.terms == deep.terms[: k + 1]
        assert all(evaluate(shallow, x) == partial_sums(deep, x)[k] for x in space.points)


@given(seeds)
def test_float_mode_bounds(seed):
    space, A, f = random_instance(random.Random(seed))
    res = extend(space, A, f, 1e-6)
    c = float(max(abs(v) for v in f.values.values()))
    for t in res.terms:
        assert t.coefficient == pytest.approx(c * (2 / 3) ** (t.n + 1), rel=1e-12)
    for a in A:
        assert abs(float(f[a]) - res.extended[a]) <= res.error_bound + 1e-9
        assert res.error_bound <= 1e-6

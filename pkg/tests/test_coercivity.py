import numpy as np
import pytest

from pencon.builtins import builtin_phi
from pencon.coercivity import (
    DecomposedFn,
    coercivity_probe,
    composite_coercive,
    is_normcoercive,
    min_singular_value,
    sum_coercivity,
)
from pencon.errors import AmbientMismatch, CapabilityMissing, DimensionMismatch, NotDirect
from pencon.functions import Caps, ConvexFn
from pencon.subspaces import Subspace, nullspace

e1, e2 = Subspace.coordinate([0], 2), Subspace.coordinate([1], 2)
diag = Subspace.span([[1.0, 1.0]])
COERCIVE = Caps(coercive=True, locally_bounded_below=True, bounded_below=True)


def square(scale=1.0, dim=1):
    return ConvexFn(dim, lambda t: scale * float(t @ t), caps=COERCIVE, name="square")


def zero(dim=1):
    return ConvexFn(dim, lambda t: 0.0, caps=Caps(locally_bounded_below=True, bounded_below=True), name="zero")


def singular_quartic():
    # t^2 - t^-4 away from 0: coercive but not locally bounded below near 0
    return ConvexFn(1, lambda t: 0.0 if t[0] == 0 else t[0] ** 2 - t[0] ** -4,
                    caps=Caps(convex=False, coercive=True), name="singular_quartic")


# -- linear maps ---------------------------------------------------------------------

def test_normcoercive_truth_table():
    assert is_normcoercive(np.eye(2))
    assert not is_normcoercive([[1.0, 1.0]])
    assert not is_normcoercive([[1.0, 0.0], [2.0, 0.0]])
    H, K = np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]])
    assert not is_normcoercive(H) and not is_normcoercive(K)
    assert is_normcoercive(np.vstack([H, K]))


def test_normcoercive_matches_nullspace_rank(rng):
    for _ in range(50):
        m, n = rng.integers(1, 5, size=2)
        A = rng.standard_normal((m, n))
        if rng.random() < 0.5 and n > 1:
            A[:, -1] = A[:, 0]
        assert is_normcoercive(A) == (np.linalg.matrix_rank(A) == n)


def test_normcoercive_lower_bound_probe(rng):
    A = rng.standard_normal((4, 3))
    assert is_normcoercive(A)
    s = min_singular_value(A)
    assert s > 0
    X = rng.standard_normal((1000, 3))
    assert np.all(np.linalg.norm(X @ A.T, axis=1) >= s * np.linalg.norm(X, axis=1) * (1 - 1e-12))
    assert min_singular_value([[1.0, 1.0]]) == 0.0


# -- composite criterion -----------------------------------------------------------

def test_composite_examples():
    q2 = square(dim=2)
    assert composite_coercive(np.eye(2), np.eye(2), q2, q2)
    assert composite_coercive([[1.0, 0.0]], [[0.0, 1.0]], square(), square())
    assert not composite_coercive([[1.0, 0.0]], [[1.0, 0.0]], square(), square())


def test_composite_requires_caps():
    with pytest.raises(CapabilityMissing):
        composite_coercive(np.eye(2), np.eye(2), square(dim=2), zero(dim=2))
    with pytest.raises(DimensionMismatch):
        composite_coercive(np.eye(2), np.eye(3), square(dim=2), square(dim=3))


def test_composite_equals_stacked_normcoercivity(rng):
    for _ in range(40):
        n = int(rng.integers(1, 4))
        H = rng.integers(-1, 2, size=(int(rng.integers(1, 3)), n)).astype(float)
        K = rng.integers(-1, 2, size=(int(rng.integers(1, 3)), n)).astype(float)
        got = composite_coercive(H, K, square(dim=H.shape[0]), square(dim=K.shape[0]))
        assert got == is_normcoercive(np.vstack([H, K]))


# -- sums of semidirect sums ----------------------------------------------------------

def nonorth_pair():
    # H(x) = x1^2 split along e1 (+) e2 and along (e1 + e2) (+) e2
    F = DecomposedFn(square(), e1, zero(), e2)
    G = DecomposedFn(square(0.5), diag, zero(), e2)
    return F, G


def locally_unbounded_pair():
    F = DecomposedFn(singular_quartic(), e1, zero(), e2)
    G = DecomposedFn(square(), e2, zero(), e1)
    return F, G


def test_orthogonal_trivial_intersection_certifies_full_space():
    F = DecomposedFn(square(), e1, square(), e2)
    G = DecomposedFn(square(), e2, square(), e1)
    v = sum_coercivity(F, G)
    assert v.certified and v.orth1 and v.orth2
    assert v.subspace.dim == 2


def test_certified_subspace_is_sum_of_first_parts():
    R3 = [Subspace.coordinate(i, 3) for i in ([0], [1, 2], [1], [0, 2])]
    F = DecomposedFn(square(), R3[0], zero(2), R3[1])
    G = DecomposedFn(square(), R3[2], zero(2), R3[3])
    v = sum_coercivity(F, G)
    assert v.certified
    assert v.subspace.same_as(Subspace.coordinate([0, 1], 3))
    pr = coercivity_probe(ConvexFn(3, lambda x: F(x) + G(x)), [1, 2, 4, 8], 100, subspace=v.subspace)
    assert pr.supported


def test_non_orthogonal_refused():
    F, G = nonorth_pair()
    v = sum_coercivity(F, G, probe={"radii": [1, 2, 4, 8], "samples_per_shell": 100})
    assert not v.certified and v.reason == "orthogonality"
    assert v.orth1 and not v.orth2
    # H = 2 x1^2 is flat along e2 even though X1 + Y1 = R^2
    assert v.status == "witness_found"
    assert abs(abs(v.probe.witness[1]) - 1.0) < 1e-9
    assert v.valid_complement.same_as(e1)
    pr = coercivity_probe(ConvexFn(2, lambda x: F(x) + G(x)), [1, 2, 4, 8], 100, subspace=v.valid_complement)
    assert pr.supported


def test_locally_unbounded_refused_for_capability():
    F, G = locally_unbounded_pair()
    v = sum_coercivity(F, G)
    assert v.status == "refused" and v.reason == "capability"
    assert any("locally bounded below" in m for m in v.missing)
    assert v.valid_complement is None
    v = sum_coercivity(F, G, probe={"radii": [16, 64, 256, 1024], "samples_per_shell": 100})
    assert v.status == "witness_found" and v.reason == "capability"


@pytest.mark.parametrize("make", [nonorth_pair, locally_unbounded_pair])
def test_sum_coercivity_symmetric(make):
    F, G = make()
    a, b = sum_coercivity(F, G), sum_coercivity(G, F)
    assert (a.status, a.reason) == (b.status, b.reason)
    assert {a.orth1, a.orth2} == {b.orth1, b.orth2}
    if a.valid_complement is None:
        assert b.valid_complement is None
    else:
        assert a.valid_complement.same_as(b.valid_complement)


def test_symmetric_when_certified():
    F = DecomposedFn(square(), e1, zero(), e2)
    G = DecomposedFn(square(), e2, square(), e1)
    a, b = sum_coercivity(F, G), sum_coercivity(G, F)
    assert a.certified and b.certified and a.subspace.same_as(b.subspace)


@pytest.mark.parametrize("name,params", [("quadratic", {"Q": [[2.0]], "b": [3.0]}), ("abs_shift", [2.0]),
                                         ("piecewise_gdemo", None)])
def test_probe_supported_on_certified_space_for_builtins(name, params):
    phi = builtin_phi(name, params).with_caps(coercive=True, locally_bounded_below=True, bounded_below=True)
    F = DecomposedFn(phi, e1, square(), e2)
    G = DecomposedFn(square(), e2, phi, e1)
    v = sum_coercivity(F, G)
    assert v.certified
    pr = coercivity_probe(ConvexFn(2, lambda x: F(x) + G(x)), [8, 16, 32, 64], 100, subspace=v.subspace)
    assert pr.supported


def test_decomposed_validation():
    with pytest.raises(AmbientMismatch):
        DecomposedFn(square(), e1, zero(), Subspace.coordinate([1], 3))
    with pytest.raises(DimensionMismatch):
        DecomposedFn(square(dim=2), e1, zero(), e2)
    with pytest.raises(NotDirect):
        DecomposedFn(square(), e1, zero(), e1)
    F = DecomposedFn(square(), e1, zero(), e2)
    G3 = DecomposedFn(square(), Subspace.coordinate([0], 3), zero(2), Subspace.coordinate([1, 2], 3))
    with pytest.raises(AmbientMismatch):
        sum_coercivity(F, G3)


def test_domination_spot_check():
    whole = ConvexFn(2, lambda x: float(x[0] ** 2 + abs(x[1])))
    good = DecomposedFn(square(), e1, zero(), e2, whole=whole)
    assert good.domination_spot_check()
    bad = DecomposedFn(square(2.0), e1, zero(), e2, whole=whole)
    assert not bad.domination_spot_check()
    v = sum_coercivity(bad, DecomposedFn(square(), e2, zero(), e1))
    assert v.reason == "capability" and any("domination" in m for m in v.missing)


# -- probe -----------------------------------------------------------------------------

def test_probe_examples():
    pr = coercivity_probe(square(dim=2), [1, 2, 4, 8])
    np.testing.assert_allclose(pr.shell_minima, [1, 4, 16, 64], rtol=1e-12)
    assert pr.supported
    pr = coercivity_probe(ConvexFn(2, lambda x: float(x[0] ** 2)), [1, 2, 4, 8])
    assert pr.verdict == "witness"
    assert abs(abs(pr.witness[1]) - 1.0) < 1e-12


def test_probe_finds_locally_unbounded_sequence():
    F, G = locally_unbounded_pair()
    total = ConvexFn(2, lambda x: F(x) + G(x))
    # along (1/n, n) the sum is n^2 + 1/n^2 - n^4, decreasing
    vals = [total(np.array([1.0 / n, float(n)])) for n in (2, 4, 8, 16)]
    np.testing.assert_allclose(vals, [n * n + 1.0 / n ** 2 - n ** 4 for n in (2, 4, 8, 16)], rtol=1e-12)
    assert all(b < a for a, b in zip(vals, vals[1:]))
    pr = coercivity_probe(total, [16, 64, 256, 1024], 50)
    assert pr.verdict == "witness"
    assert abs(pr.witness[1]) > 0.99


def test_probe_validation():
    with pytest.raises(ValueError):
        coercivity_probe(square(dim=2), [1, 2])
    with pytest.raises(ValueError):
        coercivity_probe(square(dim=2), [1, 3, 2])
    with pytest.raises(AmbientMismatch):
        coercivity_probe(square(dim=2), [1, 2, 4], subspace=Subspace.full(3))


def test_probe_is_deterministic_per_seed():
    f = ConvexFn(2, lambda x: float(x[0] ** 2 + 0.1 * x[1] ** 2))
    a = coercivity_probe(f, [1, 2, 4], 30, seed=5)
    b = coercivity_probe(f, [1, 2, 4], 30, seed=5)
    assert a.shell_minima == b.shell_minima


def test_nullspace_of_stack_is_common_nullspace():
    H, K = np.array([[1.0, 0.0, 0.0]]), np.array([[0.0, 1.0, 0.0]])
    assert nullspace(np.vstack([H, K])).same_as(Subspace.coordinate([2], 3))

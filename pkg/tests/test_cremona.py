import pytest
from hypothesis import assume, given, settings, strategies as st

from conelab.baselocus import divisorial_fixed_components
from conelab.cones import is_effective
from conelab.core import DivisorClass, JoinCycle, LinearSystemSpec, enumerate_join_cycles
from conelab.cremona import (
    clamp,
    cone_reduce,
    cremona_c,
    cremona_reduce,
    cremona_transform,
    is_cremona_reduced,
    largest_pivot,
    reduce_fully,
)
from conelab.formulas import k_join, sldim, slvdim


def systems(n_max=6, d_max=12, effective=True):
    @st.composite
    def build(draw):
        n = draw(st.integers(2, n_max))
        d = draw(st.integers(0, d_max))
        m = draw(st.lists(st.integers(0, d), min_size=n + 3, max_size=n + 3))
        L = LinearSystemSpec(n, d, m)
        if effective:
            assume(is_effective(L.as_divisor())[0])
        return L

    return build()


def test_cremona_c_examples():
    L = LinearSystemSpec(4, 2, (2, 2, 1, 1, 1, 1, 1))
    assert cremona_c(L, largest_pivot(L)) == 1
    assert cremona_c(LinearSystemSpec(3, 4, (2, 2, 2, 2, 0, 0)), (1, 2, 3, 4)) == 0
    assert cremona_c(LinearSystemSpec(2, 4, (2,) * 5), (1, 2, 3)) == 2
    with pytest.raises(ValueError):
        cremona_c(L, (1, 2, 3))


def test_cremona_transform_examples():
    L = LinearSystemSpec(4, 2, (2, 2, 1, 1, 1, 1, 1))
    C = cremona_transform(L, largest_pivot(L))
    assert C.d == 1 and sorted(C.mults) == [0, 0, 0, 1, 1, 1, 1]
    assert cremona_transform(LinearSystemSpec(2, 4, (2,) * 5), (1, 2, 3)) == LinearSystemSpec(2, 2, (0, 0, 0, 2, 2))
    D = DivisorClass(3, 2, (3, 3, 1, 0, 0, 0))
    assert cremona_transform(D, (1, 2, 3, 4)) == DivisorClass(3, -1, (0, 0, -2, -3, 0, 0))


def test_pivot_ties_lowest_index():
    assert largest_pivot(LinearSystemSpec(2, 3, (1, 2, 1, 2, 1))) == (1, 2, 4)


def test_is_cremona_reduced_examples():
    assert not is_cremona_reduced(LinearSystemSpec(4, 3, (2,) * 7))
    assert not is_cremona_reduced(LinearSystemSpec(6, 8, (6,) * 9))
    assert is_cremona_reduced(LinearSystemSpec(2, 3, (1,) * 5))
    with pytest.raises(ValueError):
        is_cremona_reduced(LinearSystemSpec(2, -1, ()))


def test_cremona_reduce_transcripts():
    red = cremona_reduce(LinearSystemSpec(2, 4, (2,) * 5))
    kinds = [s.kind for s in red.steps]
    assert kinds[0] == "cremona" and red.steps[0].after == LinearSystemSpec(2, 2, (0, 0, 0, 2, 2))
    # the pencil-free double line reduces further to the trivial system
    assert red.system == LinearSystemSpec(2, 0, (0,) * 5) and not red.empty
    assert "clamp" in kinds
    for s in red.steps:
        if s.kind == "cremona":
            assert len(s.pivot) == 3 and s.after.d == s.before.d - s.c and s.c >= 1
        assert s.describe()
    assert is_cremona_reduced(red.system)

    L = LinearSystemSpec(2, 3, (1,) * 5)
    red = cremona_reduce(L)
    assert red.system == L and red.steps == []

    red = cremona_reduce(LinearSystemSpec(2, 2, (2, 2, 2, 0, 0)))
    assert red.empty and red.system.d < 0


def test_cone_reduce_examples():
    assert cone_reduce(LinearSystemSpec(3, 2, (2, 1, 1, 1, 1, 0))) == (LinearSystemSpec(2, 2, (1, 1, 1, 1, 0)), 1)
    L = LinearSystemSpec(3, 3, (2, 1, 1))
    assert cone_reduce(L) == (L, 0)
    assert cone_reduce(LinearSystemSpec(2, 0, ())) == (LinearSystemSpec(2, 0, ()), 0)
    with pytest.raises(ValueError):
        cone_reduce(LinearSystemSpec(2, 1, (1, 1, 1)))


def test_secant_chain_reaches_quadric_pencil():
    target = LinearSystemSpec(2, 2, (1,) * 5)
    red = reduce_fully(LinearSystemSpec(4, 2, (2, 2, 1, 1, 1, 1, 1)))
    assert red.steps[0].kind == "cone" and red.steps[0].after == target
    red = reduce_fully(LinearSystemSpec(4, 3, (2,) * 7))
    assert [s.kind for s in red.steps[:2]] == ["cremona", "cone"]
    assert red.steps[1].after == target
    assert red.system == LinearSystemSpec(2, 0, (0,) * 5) and not red.empty


@settings(max_examples=300, deadline=None)
@given(
    st.integers(2, 7).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.integers(-5, 15),
            st.lists(st.integers(-5, 15), min_size=n + 3, max_size=n + 3),
            st.sets(st.integers(1, n + 3), min_size=n + 1, max_size=n + 1),
        )
    )
)
def test_cremona_is_involution_on_classes(args):
    n, d, m, J = args
    D = DivisorClass(n, d, m)
    assert cremona_transform(cremona_transform(D, sorted(J)), sorted(J)) == D


@settings(max_examples=300, deadline=None)
@given(systems(), st.randoms(use_true_random=False))
def test_sldim_invariant_under_cremona(L, rnd):
    for J in (largest_pivot(L), sorted(rnd.sample(range(1, L.n + 4), L.n + 1))):
        C = clamp(cremona_transform(L, J))
        assert sldim(C) == sldim(L)
        assert slvdim(C) == slvdim(L)


@settings(max_examples=300, deadline=None)
@given(systems())
def test_sldim_invariant_under_cone_reduction(L):
    assume(L.d > 0)
    Lc = LinearSystemSpec(L.n, L.d, (L.d,) + L.mults[1:])
    assume(is_effective(Lc.as_divisor())[0])
    R = LinearSystemSpec(L.n - 1, L.d, L.mults[1:])
    assert sldim(Lc) == sldim(R)
    assert slvdim(Lc) == slvdim(R)


@settings(max_examples=300, deadline=None)
@given(systems(8, 14))
def test_cremona_reduced_has_no_divisorial_join(L):
    red = cremona_reduce(L)
    assume(not red.empty)
    R = red.system
    assert is_cremona_reduced(R)
    for c in enumerate_join_cycles(R.n, lambda size, t: size == R.n - 2 * t):
        assert k_join(R, c) <= 0
    if is_effective(R.as_divisor())[0]:
        assert divisorial_fixed_components(R) == []

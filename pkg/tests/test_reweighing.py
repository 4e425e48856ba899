from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fairaudit import data, reweighing
from fairaudit.data import GroupCounts
from fairaudit.errors import DegenerateGroupError

from conftest import make_dataset

FIXTURE = GroupCounts(n_p=6, n_up=4, n_pp=4, n_np=2, n_pup=1, n_nup=3, n_pos=5, n_neg=5, n_total=10)


def exact_weights(c: GroupCounts):
    """Oracle: P(group) * P(label) / P(group, label) in exact rationals."""
    def w(group, label, cell):
        return Fraction(group, c.n_total) * Fraction(label, c.n_total) / Fraction(cell, c.n_total)
    return (w(c.n_p, c.n_pos, c.n_pp), w(c.n_up, c.n_pos, c.n_pup),
            w(c.n_p, c.n_neg, c.n_np), w(c.n_up, c.n_neg, c.n_nup))


def test_fixture_values():
    w = reweighing.compute_weights(FIXTURE)
    assert exact_weights(FIXTURE) == (Fraction(3, 4), Fraction(2), Fraction(3, 2), Fraction(2, 3))
    assert (w.w_pp, w.w_pup, w.w_np, w.w_nup) == (0.75, 2.0, 1.5, 2 / 3)


def test_independent_counts_give_unit_weights():
    # both groups have positive rate 1/2, equal to the overall rate
    c = GroupCounts(n_p=4, n_up=6, n_pp=2, n_np=2, n_pup=3, n_nup=3, n_pos=5, n_neg=5, n_total=10)
    w = reweighing.compute_weights(c)
    assert (w.w_pp, w.w_pup, w.w_np, w.w_nup) == (1.0, 1.0, 1.0, 1.0)


@pytest.mark.parametrize("cell", ["n_pp", "n_pup", "n_np", "n_nup"])
def test_degenerate_cell(cell):
    counts = dict(vars(FIXTURE))
    counts[cell] = 0
    with pytest.raises(DegenerateGroupError, match=cell):
        reweighing.compute_weights(GroupCounts(**counts))


def test_apply_broadcasts_by_cell(ten_rows):
    out = reweighing.apply(ten_rows)
    expected = {(1, 1): 0.75, (1, 0): 2.0, (0, 1): 1.5, (0, 0): 2 / 3}
    for y, s, w in zip(out.labels, out.protected, out.weights):
        assert w == expected[(int(y), int(s))]
    assert np.array_equal(out.features, ten_rows.features)
    assert np.array_equal(out.labels, ten_rows.labels)
    assert np.array_equal(out.protected, ten_rows.protected)


def test_apply_independent_is_identity():
    ds = make_dataset([1, 0, 1, 0, 1, 0], [1, 1, 0, 0, 0, 0], weights=[1, 2, 3, 4, 5, 6])
    out = reweighing.apply(ds)
    assert np.array_equal(out.weights, ds.weights)


def test_apply_twice_squares_coefficients(ten_rows):
    once = reweighing.apply(ten_rows)
    twice = reweighing.apply(once)
    # repeat-application oracle: counts are unweighted, so the same coefficient is applied again
    coef = reweighing.compute_weights(data.count_groups(ten_rows)).for_rows(ten_rows.labels, ten_rows.protected)
    assert np.allclose(twice.weights, coef**2, rtol=0, atol=1e-15)
    assert not np.allclose(twice.weights, once.weights)


def test_apply_multiplies_incoming_weights(ten_rows):
    incoming = np.linspace(0.5, 2.0, ten_rows.n)
    out = reweighing.apply(ten_rows.with_weights(incoming))
    base = reweighing.apply(ten_rows).weights
    assert np.allclose(out.weights, incoming * base, rtol=1e-15)


def test_apply_degenerate_propagates():
    with pytest.raises(DegenerateGroupError):
        reweighing.apply(make_dataset([1, 1, 0], [1, 0, 1]))


cells = st.integers(1, 40)


@given(n_pp=cells, n_np=cells, n_pup=cells, n_nup=cells, seed=st.integers(0, 2**31))
def test_mass_and_independence(n_pp, n_np, n_pup, n_nup, seed):
    labels = [1] * n_pp + [0] * n_np + [1] * n_pup + [0] * n_nup
    protected = [1] * (n_pp + n_np) + [0] * (n_pup + n_nup)
    order = np.random.default_rng(seed).permutation(len(labels))
    ds = make_dataset(np.array(labels)[order], np.array(protected)[order])
    out = reweighing.apply(ds)
    n = ds.n
    assert out.weights.sum() == pytest.approx(n, rel=1e-9)
    assert (out.weights > 0).all()
    overall = (n_pp + n_pup) / n
    for g in (0, 1):
        mask = out.protected == g
        rate = out.weights[mask & (out.labels == 1)].sum() / out.weights[mask].sum()
        assert rate == pytest.approx(overall, abs=1e-9)

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonlocal_vrp import bell
from nonlocal_vrp.bell import (
    Behavior,
    CorrelationParams,
    DeterministicStrategy,
    Locality,
    behavior_from_params,
    certify_local,
    check_no_signaling,
    chsh_from_params,
    chsh_value,
    lhv_decomposition,
    local_deterministic_vertices,
    ns_extremal_vertices,
    params_from_behavior,
    pr_box,
    random_behavior,
    tilted_value,
)
from nonlocal_vrp.errors import InvalidParams, NotAProbabilityTable, NotLocal, SignalingInput
from nonlocal_vrp.quantum import behavior_from_quantum, canonical_chsh_strategy

PR_TABLE = np.array(
    [
        [0.5, 0.0, 0.0, 0.5],
        [0.5, 0.0, 0.0, 0.5],
        [0.5, 0.0, 0.0, 0.5],
        [0.0, 0.5, 0.5, 0.0],
    ]
)
ALL_ONES = np.tile([1.0, 0.0, 0.0, 0.0], (4, 1))
UNIFORM = np.full((4, 4), 0.25)
PR_PARAMS = CorrelationParams(0.5, 0.5, 0.5, 0.0, 0.5, 0.5, 0.5, 0.5)


def brute_chsh(table):
    # Correlators summed label by label: (-1)^(a+b) p(ab|ij) with a, b in {1, 2}.
    total = 0.0
    for (i, j), sign in zip(itertools.product((1, 2), repeat=2), (1, 1, 1, -1)):
        corr = sum(
            (-1) ** (a + b) * table[2 * (i - 1) + (j - 1), 2 * (a - 1) + (b - 1)]
            for a, b in itertools.product((1, 2), repeat=2)
        )
        total += sign * corr
    return total


@st.composite
def correlation_params(draw):
    unit = st.floats(0.0, 1.0, allow_nan=False)
    m = (draw(unit), draw(unit))
    n = (draw(unit), draw(unit))
    cs = []
    for i, j in itertools.product((0, 1), repeat=2):
        lo, hi = max(0.0, m[i] + n[j] - 1.0), min(m[i], n[j])
        cs.append(lo + draw(unit) * (hi - lo))
    return CorrelationParams(*cs, *m, *n)


class TestConstruction:
    def test_pr_box_from_params(self):
        b = behavior_from_params(PR_PARAMS)
        np.testing.assert_array_equal(b.table, PR_TABLE)

    def test_all_ones_point_mass(self):
        b = behavior_from_params(CorrelationParams(1, 1, 1, 1, 1, 1, 1, 1))
        np.testing.assert_array_equal(b.table, ALL_ONES)

    def test_uniform(self):
        b = behavior_from_params(CorrelationParams(0.25, 0.25, 0.25, 0.25, 0.5, 0.5, 0.5, 0.5))
        np.testing.assert_array_equal(b.table, UNIFORM)

    def test_infeasible_params(self):
        with pytest.raises(InvalidParams):
            behavior_from_params(CorrelationParams(0.9, 0, 0, 0, 0.5, 0.5, 0.5, 0.5))
        with pytest.raises(InvalidParams):
            behavior_from_params(CorrelationParams(0, 0, 0, 0, 0.8, 0.5, 0.8, 0.5))

    def test_inverse_examples(self):
        p = params_from_behavior(Behavior(ALL_ONES))
        assert p.as_array().tolist() == [1.0] * 8
        p = params_from_behavior(Behavior(PR_TABLE))
        assert p.as_array().tolist() == [0.5, 0.5, 0.5, 0.0, 0.5, 0.5, 0.5, 0.5]

    def test_signaling_input_rejected(self):
        t = UNIFORM.copy()
        t[1] = [0.5, 0.25, 0.0, 0.25]  # p(l1=1 | 12) = 0.75 != p(l1=1 | 11) = 0.5
        with pytest.raises(SignalingInput):
            params_from_behavior(t)

    @pytest.mark.parametrize(
        "table",
        [UNIFORM - 0.3, UNIFORM * 1.1, np.zeros((3, 4))],
    )
    def test_not_a_probability_table(self, table):
        with pytest.raises(NotAProbabilityTable):
            check_no_signaling(table)

    def test_json_round_trip(self):
        b = random_behavior(np.random.default_rng(3))
        again = Behavior.from_json(b.to_json())
        np.testing.assert_array_equal(again.table, b.table)

    def test_immutable(self):
        b = Behavior(UNIFORM)
        with pytest.raises(ValueError):
            b.table[0, 0] = 1.0


class TestNoSignaling:
    def test_pr_box(self):
        assert check_no_signaling(PR_TABLE).ok

    def test_deterministic(self):
        for s in bell.deterministic_strategies():
            assert check_no_signaling(s.table()).ok

    def test_one_way_signaling(self):
        # Second postman outputs l2 = t1: marginal of l2 shifts with t1 only.
        t = np.zeros((4, 4))
        for t1, t2 in bell.PAIRS:
            t[bell.pair_index(t1, t2), bell.pair_index(1, t1)] = 1.0
        report = check_no_signaling(t)
        assert not report.ok
        assert len(report.violations) == 2
        assert {v.party for v in report.violations} == {"B"}
        assert all(v.magnitude == pytest.approx(1.0) for v in report.violations)

    def test_single_violation(self):
        t = UNIFORM.copy()
        t[3] = [0.25, 0.25, 0.0, 0.5]  # p(l2=1 | 22) = 0.25 != p(l2=1 | 12) = 0.5
        t[2] = [0.25, 0.25, 0.25, 0.25]
        report = check_no_signaling(t)
        assert len(report.violations) == 1
        v = report.violations[0]
        assert (v.party, v.own_input) == ("B", 2)
        assert v.magnitude == pytest.approx(0.25)


class TestChsh:
    def test_all_ones(self):
        assert chsh_value(Behavior(ALL_ONES)) == 2.0

    def test_pr_box(self):
        assert chsh_value(Behavior(PR_TABLE)) == 4.0

    def test_canonical_quantum(self):
        b = behavior_from_quantum(canonical_chsh_strategy())
        assert chsh_value(b) == pytest.approx(2 * math.sqrt(2), abs=1e-12)

    def test_matches_brute_force_and_closed_form(self, rng):
        for _ in range(500):
            b = random_behavior(rng, concentration=rng.uniform(0.2, 3))
            v = chsh_value(b)
            assert v == pytest.approx(brute_chsh(b.table), abs=1e-12)
            assert v == pytest.approx(chsh_from_params(params_from_behavior(b)), abs=1e-12)

    def test_tilted(self):
        assert tilted_value(Behavior(ALL_ONES), 0.5) == 3.0
        b = behavior_from_quantum(canonical_chsh_strategy())
        assert tilted_value(b, 0.5) == pytest.approx(2 * math.sqrt(2) + 0.5, abs=1e-12)
        pr = Behavior(PR_TABLE)
        assert tilted_value(pr, 0.0) == chsh_value(pr)

    @settings(max_examples=200, deadline=None)
    @given(
        st.integers(0, 2**32 - 1),
        st.floats(0.0, 1.0),
        st.floats(0.0, 3.0),
    )
    def test_affine_under_mixing(self, seed, lam, zeta):
        rng = np.random.default_rng(seed)
        b1, b2 = random_behavior(rng), random_behavior(rng)
        mixed = b1.mix(b2, lam)
        assert chsh_value(mixed) == pytest.approx(
            lam * chsh_value(b1) + (1 - lam) * chsh_value(b2), abs=1e-12
        )
        assert tilted_value(mixed, zeta) == pytest.approx(
            lam * tilted_value(b1, zeta) + (1 - lam) * tilted_value(b2, zeta), abs=1e-12
        )


class TestRoundTrip:
    @settings(max_examples=300, deadline=None)
    @given(correlation_params())
    def test_params_round_trip(self, p):
        b = behavior_from_params(p)
        np.testing.assert_allclose(params_from_behavior(b).as_array(), p.as_array(), atol=1e-12, rtol=0)
        np.testing.assert_allclose(behavior_from_params(params_from_behavior(b)).table, b.table, atol=1e-12, rtol=0)

    def test_round_trip_bulk(self, rng):
        for _ in range(10_000):
            b = random_behavior(rng)
            again = behavior_from_params(params_from_behavior(b))
            assert np.abs(again.table - b.table).max() <= 1e-12


class TestVertices:
    def test_local_vertices(self):
        verts = local_deterministic_vertices()
        assert len(verts) == 16
        assert len({v.table.tobytes() for v in verts}) == 16
        assert all(check_no_signaling(v.table).ok for v in verts)
        assert max(abs(chsh_value(v)) for v in verts) == 2.0

    def test_local_vertices_hit_every_relabeling_at_plus_minus_two(self):
        for v in local_deterministic_vertices():
            for signs in bell.CHSH_RELABELINGS:
                assert bell.relabeled_chsh(v, signs) in (-2.0, 2.0)

    def test_ns_vertices(self):
        verts = ns_extremal_vertices()
        assert len(verts) == 24
        assert len({v.table.tobytes() for v in verts}) == 24
        assert all(check_no_signaling(v.table).ok for v in verts)
        assert any(np.array_equal(v.table, PR_TABLE) for v in verts)
        assert max(chsh_value(v) for v in verts) == 4.0
        nonlocal_ = [v for v in verts if not certify_local(v).is_local]
        assert len(nonlocal_) == 8
        assert all(certify_local(v).value == 4.0 for v in nonlocal_)

    def test_strategy_codes(self):
        codes = [s.code for s in bell.deterministic_strategies()]
        assert codes == sorted(codes)
        assert codes[0] == "1111"
        s = DeterministicStrategy.from_code("1221")
        assert s.f1 == (1, 2) and s.f2 == (2, 1)
        np.testing.assert_array_equal(s.behavior().table, s.table())


class TestLocality:
    def test_pr_box_nonlocal(self):
        v = certify_local(Behavior(PR_TABLE))
        assert v.verdict is Locality.NONLOCAL
        assert v.witness == ((1, 1, 1, -1), 4.0)

    def test_uniform_local(self):
        v = certify_local(Behavior(UNIFORM))
        assert v.is_local
        assert all(x == 0.0 for x in v.values)

    def test_quantum_nonlocal(self):
        v = certify_local(behavior_from_quantum(canonical_chsh_strategy()))
        assert not v.is_local
        assert v.value == pytest.approx(2 * math.sqrt(2), abs=1e-12)

    def test_signaling_rejected(self):
        t = UNIFORM.copy()
        t[1] = [0.5, 0.25, 0.0, 0.25]
        with pytest.raises(SignalingInput):
            certify_local(t)

    def test_lhv_vertex_idempotent(self):
        for k, s in enumerate(bell.deterministic_strategies()):
            model = lhv_decomposition(s.behavior())
            assert model.weights[k] == pytest.approx(1.0, abs=1e-9)

    def test_lhv_uniform(self):
        model = lhv_decomposition(Behavior(UNIFORM))
        np.testing.assert_allclose(model.table(), UNIFORM, atol=1e-7)
        # Uniform weights are also a certificate.
        uniform_model = bell.LocalModel(np.full(16, 1 / 16))
        np.testing.assert_allclose(uniform_model.table(), UNIFORM, atol=1e-15)

    def test_lhv_pr_box(self):
        with pytest.raises(NotLocal):
            lhv_decomposition(Behavior(PR_TABLE))

    def test_lhv_deterministic_result(self, rng):
        b = random_behavior(rng, concentration=0.5)
        while not certify_local(b).is_local:
            b = random_behavior(rng, concentration=0.5)
        w1, w2 = lhv_decomposition(b).weights, lhv_decomposition(b).weights
        np.testing.assert_array_equal(w1, w2)

    def test_fine_agrees_with_lp_sample(self, rng):
        seen = set()
        for _ in range(500):
            b = random_behavior(rng, concentration=rng.choice([0.2, 1.0, 3.0]))
            local = certify_local(b).is_local
            try:
                model = lhv_decomposition(b)
            except NotLocal:
                lp_local = False
            else:
                lp_local = True
                assert np.abs(model.table() - b.table).max() <= 1e-7
            assert local == lp_local
            seen.add(local)
        assert seen == {True, False}

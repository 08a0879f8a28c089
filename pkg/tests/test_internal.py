import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bnreshape import (
    CoarseningMap,
    MappingError,
    NetworkError,
    NotCoarsenable,
    RefinementMap,
    RefinementRejected,
    SplitSpec,
    coarsen_deviation,
    external_coarsen,
    external_refine,
    full_joint,
    internal_coarsen,
    internal_refine,
    posterior_marginals,
    proportional_split_check,
    remove_redundant_arc,
    trivial_lower,
)
from bnreshape.graph_ops import introduced_arcs, is_arc_redundant
from bnreshape.network import row_index
from bnreshape.verify import joint_equivalence

import oracle
from conftest import (
    FIG5_LOWER,
    FIG5_UPPER,
    FIG6_UPPER,
    SPLIT,
    figure5_network,
    nets_with_target,
    refinements,
    vehicle_refinement,
)


def f_row(net, **assignment):
    return net.node("F").cpt.rows[row_index(net, "F", assignment)]


@pytest.fixture
def vehicle_merge(net7):
    return CoarseningMap.build(net7.states("V"), {"Y": ["A", "U"]})


class TestTrivialLower:
    def test_copies_old_row(self, net3):
        f = trivial_lower(net3, "V", vehicle_refinement(net3))["F"]
        rows = f.rows.reshape(3, 2, 3)
        assert rows[0, 0].tolist() == [0.45, 0.45, 0.1]
        assert rows[1, 0].tolist() == [0.45, 0.45, 0.1]
        assert rows[2, 0].tolist() == [0.1, 0.1, 0.8]

    def test_identity_map(self, net3):
        identity = RefinementMap.build(net3.states("V"), {})
        assert trivial_lower(net3, "V", identity)["F"] == net3.node("F").cpt

    def test_three_way(self, net3):
        rmap = RefinementMap.build(net3.states("V"), {"Y": ["a", "b", "c"]})
        rows = trivial_lower(net3, "V", rmap)["F"].rows.reshape(4, 2, 3)
        for i in range(3):
            assert rows[i].tolist() == [[0.45, 0.45, 0.1], [0.3, 0.3, 0.4]]


class TestProportionalSplit:
    def test_figure5_ratio(self, net3):
        k = proportional_split_check(FIG5_UPPER, net3.node("V").cpt, vehicle_refinement(net3))
        assert k == pytest.approx([0.2, 0.8, 1.0], abs=1e-12)

    def test_figure6_has_none(self, net3):
        assert proportional_split_check(FIG6_UPPER, net3.node("V").cpt, vehicle_refinement(net3)) is None

    def test_zero_mass_state_is_uniform(self):
        rmap = RefinementMap.build(("x", "y"), {"y": ["y1", "y2"]})
        k = proportional_split_check([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]], [[1.0, 0.0], [1.0, 0.0]], rmap)
        assert k == pytest.approx([1.0, 0.5, 0.5])


class TestInternalRefine:
    def test_trivial_lower_matches_figure4_posteriors(self, net3, evidence):
        out = internal_refine(net3, "V", vehicle_refinement(net3), SplitSpec(SPLIT))
        assert out.parents("F") == net3.parents("F")
        assert f_row(out, V="A", T="G").tolist() == [0.45, 0.45, 0.1]
        assert f_row(out, V="U", T="G").tolist() == [0.45, 0.45, 0.1]
        post = posterior_marginals(out, evidence)
        assert post["M"] == pytest.approx([0.476, 0.524], abs=5e-4)
        assert post["T"] == pytest.approx([0.724, 0.276], abs=5e-4)
        assert post["V"] == pytest.approx([0.151, 0.604, 0.245], abs=5e-4)
        assert post["F"] == pytest.approx([0.126, 0.795, 0.08], abs=5e-4)

    def test_figure5_lower_accepted(self, net3, evidence):
        out = figure5_network(net3)
        assert 0.2 * f_row(out, V="A", T="G")[0] + 0.8 * f_row(out, V="U", T="G")[0] == pytest.approx(0.45)
        assert joint_equivalence(net3, out, ["M", "T", "F"]).max_diff <= 1e-9
        post = posterior_marginals(out, evidence)
        assert post["M"] == pytest.approx([0.476, 0.524], abs=5e-4)
        assert post["F"] == pytest.approx([0.126, 0.795, 0.08], abs=5e-4)
        # the evidence favours feature B, which tanks rarely show
        assert post["V"][0] < 0.151

    def test_figure6_rejects_nontrivial_lower(self, net3):
        with pytest.raises(RefinementRejected) as info:
            internal_refine(net3, "V", vehicle_refinement(net3), FIG6_UPPER, {"F": FIG5_LOWER})
        assert info.value.max_deviation > 1e-9

    def test_figure6_accepts_trivial_lower(self, net3, evidence):
        out = internal_refine(net3, "V", vehicle_refinement(net3), FIG6_UPPER)
        assert joint_equivalence(net3, out, ["M", "T", "F"]).max_diff <= 1e-12
        fig5 = posterior_marginals(figure5_network(net3), evidence)["V"]
        assert not np.allclose(posterior_marginals(out, evidence)["V"], fig5, atol=1e-3)

    def test_upper_must_add_up(self, net3):
        with pytest.raises(MappingError):
            internal_refine(net3, "V", vehicle_refinement(net3), [[0.3, 0.6, 0.1], [0.08, 0.32, 0.6]])

    def test_lower_shape_checked(self, net3):
        with pytest.raises(NetworkError):
            internal_refine(net3, "V", vehicle_refinement(net3), FIG5_UPPER, {"F": FIG5_LOWER[:4]})


class TestInternalCoarsen:
    def test_figure7_approximate(self, net7, vehicle_merge, evidence):
        out, report = internal_coarsen(net7, "V", vehicle_merge, mode="approximate")
        assert out.node("V").cpt.rows == pytest.approx(np.array([[0.8, 0.2], [0.4, 0.6]]), abs=1e-12)
        assert f_row(out, T="G", V="Y") == pytest.approx([0.5375, 0.3625, 0.1], abs=1e-9)
        assert f_row(out, T="B", V="Y") == pytest.approx([0.30625, 0.29375, 0.4], abs=1e-9)
        assert f_row(out, T="G", V="N").tolist() == [0.1, 0.1, 0.8]
        post = posterior_marginals(out, evidence)
        assert post["M"] == pytest.approx([0.467, 0.533], abs=5e-4)
        assert post["T"] == pytest.approx([0.702, 0.298], abs=5e-4)
        assert post["V"] == pytest.approx([0.732, 0.268], abs=5e-4)
        assert post["F"] == pytest.approx([0.154, 0.759, 0.087], abs=5e-4)
        assert report.residual > 0

    def test_figure7_exact_fails(self, net7, vehicle_merge):
        with pytest.raises(NotCoarsenable) as info:
            internal_coarsen(net7, "V", vehicle_merge, mode="exact")
        report = info.value.report
        assert report.max_spread == pytest.approx(0.0375, abs=1e-9)
        entry = next(e for e in report.entries
                     if e.child_state == "A" and e.config == (("T", "G"),))
        assert dict(entry.values) == pytest.approx({(("M", "A"),): 0.525, (("M", "B"),): 0.55})
        assert entry.spread == pytest.approx(0.025)

    def test_column_sums(self, net7, vehicle_merge):
        out, _ = internal_coarsen(net7, "V", vehicle_merge)
        old = net7.node("V").cpt.rows
        new = out.node("V").cpt.rows
        assert np.array_equal(new[:, 0], old[:, 0] + old[:, 1])
        assert np.array_equal(new[:, 1], old[:, 2])

    def test_figure5_network_coarsens_back_to_fig3(self, net3):
        refined = figure5_network(net3)
        cmap = vehicle_refinement(net3).inverse()
        out, report = internal_coarsen(refined, "V", cmap, mode="exact")
        assert report.max_spread <= 1e-9
        assert joint_equivalence(net3, out, net3.ids).max_diff <= 1e-9
        for a, b in zip(out.node("F").cpt.rows, net3.node("F").cpt.rows):
            assert a == pytest.approx(b, abs=1e-12)

    def test_unknown_mode(self, net7, vehicle_merge):
        with pytest.raises(ValueError):
            internal_coarsen(net7, "V", vehicle_merge, mode="fuzzy")

    def test_two_successors_mixture_is_not_exact(self):
        # one parentless target, so per-successor rows always agree, yet the pair of children is correlated
        from bnreshape import network, node

        net = network([
            node("X", ["a", "b"], [], [[0.5, 0.5]]),
            node("S1", ["0", "1"], ["X"], [[0.9, 0.1], [0.1, 0.9]]),
            node("S2", ["0", "1"], ["X"], [[0.9, 0.1], [0.1, 0.9]]),
        ])
        cmap = CoarseningMap.build(net.states("X"), {"ab": ["a", "b"]})
        assert coarsen_deviation(net, "X", cmap).max_spread == 0.0
        with pytest.raises(NotCoarsenable) as info:
            internal_coarsen(net, "X", cmap, mode="exact")
        assert info.value.report.residual > 0.1


class TestDeviation:
    def test_figure7_spread(self, net7, vehicle_merge):
        report = coarsen_deviation(net7, "V", vehicle_merge)
        assert report.max_spread == pytest.approx(0.0375, abs=1e-12)
        worst = report.worst
        assert worst.config == (("T", "B"),)
        assert report.residual is None

    def test_candidate_rows_per_unit(self, net7, vehicle_merge):
        report = coarsen_deviation(net7, "V", vehicle_merge)
        rows = {(c.config, c.target_config): c.row for c in report.candidates}
        assert rows[((("T", "G"),), (("M", "A"),))] == pytest.approx([0.525, 0.375, 0.1])
        assert rows[((("T", "G"),), (("M", "B"),))] == pytest.approx([0.55, 0.35, 0.1])

    def test_pruned_external_refinement_is_flat(self, net3):
        fig4 = external_refine(net3, "V", vehicle_refinement(net3), SplitSpec(SPLIT), "V1")
        pruned = remove_redundant_arc(fig4, "M", "F")
        cmap = CoarseningMap.build(pruned.states("V1"), {"Y": ["A", "U"]})
        report = coarsen_deviation(pruned, "V1", cmap)
        assert report.entries and report.max_spread == 0.0

    def test_singletons_only(self, net7):
        cmap = CoarseningMap.build(net7.states("V"), {})
        report = coarsen_deviation(net7, "V", cmap)
        assert report.entries == () and report.max_spread == 0.0


def test_exact_internal_matches_external_when_flat(net3):
    refined = figure5_network(net3)
    cmap = vehicle_refinement(net3).inverse()
    internal, _ = internal_coarsen(refined, "V", cmap, mode="exact")
    external = external_coarsen(refined, "V", cmap, "VI")
    assert joint_equivalence(internal, external, internal.ids, rename={"V": "VI"}).max_diff <= 1e-12
    arcs = introduced_arcs(refined, external)
    assert arcs == [("M", "F")]
    assert all(is_arc_redundant(external, a, b) for a, b in arcs)


def test_external_refine_pruned_equals_internal(net3):
    external = external_refine(net3, "V", vehicle_refinement(net3), SplitSpec(SPLIT), "V1")
    pruned = remove_redundant_arc(external, "M", "F")
    internal = internal_refine(net3, "V", vehicle_refinement(net3), SplitSpec(SPLIT))
    assert joint_equivalence(internal, pruned, internal.ids, rename={"V": "V1"}).max_diff <= 1e-12


@settings(max_examples=40, deadline=None)
@given(nets_with_target(), st.data())
def test_random_refine_coarsen_duality(pair, data):
    net, target = pair
    rmap, split = data.draw(refinements(net.states(target)))
    refined = internal_refine(net, target, rmap, split)
    rest = [v for v in net.ids if v != target]
    assert oracle.max_marginal_diff(net, refined, rest) <= 1e-9
    back, report = internal_coarsen(refined, target, rmap.inverse(), mode="exact")
    assert report.max_spread <= 1e-9
    diff = np.max(np.abs(full_joint(back).table - full_joint(net).table))
    assert diff <= 1e-9
    assert [n.parents for n in back.nodes] == [n.parents for n in net.nodes]

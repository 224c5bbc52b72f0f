from fractions import Fraction

import pytest

from errors import BadBlockSize, BadParams, InvariantViolation, NotApplicable, Stuck, UnknownBasis
from graph_core import GraphProperty, MultiGraph, SelectionKernel, check_property
from model_dsl import preset
from random_stream import RandomStream
from rules_engine import (
    BasisGraph, Expansion, PicgModel, Rule, RuleKind, StopCondition, apply_rule, applicable, basis_graph,
    check_conservation, collapse_pa, grow,
)


def steps(t: int) -> StopCondition:
    return StopCondition.after_steps(t)


class TestBasis:
    def test_named_basis_graphs(self):
        assert basis_graph("B1") == MultiGraph(1)
        assert basis_graph("B2") == MultiGraph(3, [(0, 1), (1, 2), (2, 0)])
        pa = basis_graph("PA(3)")
        assert (pa.n, pa.m) == (2, 3)
        assert basis_graph("PA") == MultiGraph(2, [(0, 1)])

    def test_unknown_basis(self):
        with pytest.raises(UnknownBasis):
            basis_graph("B3")

    def test_pa_needs_an_edge(self):
        with pytest.raises(BadParams):
            basis_graph("PA(0)")


class TestApplyRule:
    def test_attach_triangle(self, debug_checks):
        g = MultiGraph(3, [(0, 1), (1, 2), (2, 0)])
        rule = Rule("R4", RuleKind.ATTACH_TRIANGLE, SelectionKernel.UNIFORM_VERTEX, Fraction(1))
        record = apply_rule(g, rule, RandomStream(4))
        assert record.created == (3, 4)
        assert (record.dn, record.dm) == (2, 3)
        assert g.has_edge(3, 4)
        assert g.has_edge(record.left.vertices[0], 3)

    def test_subdivide_records_edge(self, debug_checks):
        g = MultiGraph(3, [(0, 1), (1, 2), (2, 0)])
        rule = Rule("R3", RuleKind.SUBDIVIDE_EDGE, SelectionKernel.UNIFORM_EDGE, Fraction(1))
        record = apply_rule(g, rule, RandomStream(9))
        assert record.left.edge is not None
        assert record.created == (3,)
        assert (record.dn, record.dm) == (1, 1)

    def test_add_edge_needs_two_vertices(self):
        rule = Rule("R2", RuleKind.ADD_EDGE, SelectionKernel.UNIFORM_PAIR, Fraction(1))
        assert not applicable(MultiGraph(1), rule)
        with pytest.raises(NotApplicable):
            apply_rule(MultiGraph(1), rule, RandomStream(0))

    def test_rule_deltas(self):
        assert [(kind, Rule("x", kind, SelectionKernel.UNIFORM_VERTEX, Fraction(1)).delta_n) for kind in RuleKind] \
            == [(RuleKind.ADD_PENDANT, 1), (RuleKind.ADD_EDGE, 0), (RuleKind.SUBDIVIDE_EDGE, 1),
                (RuleKind.ATTACH_TRIANGLE, 2), (RuleKind.PA_ATTACH, 1)]


class TestRuleProperties:
    @pytest.mark.parametrize("kernel, local", [
        (SelectionKernel.UNIFORM_VERTEX, True),
        (SelectionKernel.DEGREE_PROPORTIONAL_VERTEX, True),
        (SelectionKernel.UNIFORM_EDGE, True),
        (SelectionKernel.UNIFORM_PAIR, False),
        (SelectionKernel.UNIFORM_NONADJACENT_PAIR, False),
    ])
    def test_locality_follows_the_kernel(self, kernel, local):
        assert Rule("x", RuleKind.ADD_EDGE, kernel, Fraction(1)).is_local is local

    def test_expansion(self):
        add_edge = Rule("R2", RuleKind.ADD_EDGE, SelectionKernel.UNIFORM_PAIR, Fraction(1))
        assert add_edge.expansion("n") is Expansion.STABLE
        assert add_edge.expansion("m") is Expansion.EXPANDING
        for kind in (RuleKind.ADD_PENDANT, RuleKind.SUBDIVIDE_EDGE, RuleKind.ATTACH_TRIANGLE, RuleKind.PA_ATTACH):
            rule = Rule("x", kind, SelectionKernel.UNIFORM_VERTEX, Fraction(1))
            assert (rule.expansion("n"), rule.expansion("m")) == (Expansion.EXPANDING, Expansion.EXPANDING)

    def test_unknown_quantity(self):
        with pytest.raises(BadParams):
            Rule("R1", RuleKind.ADD_PENDANT, SelectionKernel.UNIFORM_VERTEX, Fraction(1)).expansion("k")

    def test_expected_deltas(self):
        model = PicgModel("mix", [BasisGraph("B1", basis_graph("B1"), Fraction(1))], [
            Rule("R1", RuleKind.ADD_PENDANT, SelectionKernel.UNIFORM_VERTEX, Fraction(1, 4)),
            Rule("R2", RuleKind.ADD_EDGE, SelectionKernel.UNIFORM_PAIR, Fraction(1, 4)),
            Rule("R4", RuleKind.ATTACH_TRIANGLE, SelectionKernel.UNIFORM_VERTEX, Fraction(1, 2)),
        ])
        assert (model.expected_delta("n"), model.expected_delta("m")) == (Fraction(5, 4), Fraction(2))
        model.check_growth("n")
        model.check_growth("m")

    def test_edge_only_model_does_not_grow_in_vertices(self):
        model = PicgModel("edges", [BasisGraph("B2", basis_graph("B2"), Fraction(1))],
                          [Rule("R2", RuleKind.ADD_EDGE, SelectionKernel.UNIFORM_PAIR, Fraction(1))])
        model.check_growth("m")
        with pytest.raises(BadParams, match="does not grow in n"):
            model.check_growth("n")

    @pytest.mark.parametrize("name, params", [("pa", []), ("connected", ["0.5"]), ("two_edge_connected", ["0.3", "0.3"])])
    def test_presets_grow(self, name, params):
        model = preset(name, params)
        model.check_growth("n")
        model.check_growth("m")


class TestGrow:
    def test_same_seed_same_graph_and_trace(self):
        model = preset("two_edge_connected", ["1/3", "1/3"])
        g1, trace1 = grow(model, steps(300), seed=17)
        g2, trace2 = grow(model, steps(300), seed=17)
        assert g1 == g2
        assert trace1 == trace2

    def test_different_seeds_differ(self):
        model = preset("connected", [0.5])
        g1, _ = grow(model, steps(200), seed=1)
        g2, _ = grow(model, steps(200), seed=2)
        assert g1 != g2

    def test_connected_first_step_is_forced_to_pendant(self):
        model = preset("connected", [0.1])
        for seed in range(20):
            _, trace = grow(model, steps(1), seed)
            assert trace.steps[0].rule == "R1"

    def test_connected_size_equals_steps(self):
        model = preset("connected", [0.3])
        g, trace = grow(model, steps(500), seed=5)
        assert g.m == 500
        r1_steps = sum(1 for record in trace.steps if record.rule == "R1")
        assert g.n == 1 + r1_steps
        trace.reconcile(g)
        check_conservation(model, trace)

    def test_zero_steps_returns_basis(self):
        g, trace = grow(preset("two_vertex_connected", [0.5]), steps(0), seed=3)
        assert g == basis_graph("B2")
        assert trace.steps == []

    def test_vertex_stop_may_overshoot_by_one(self):
        model = preset("two_edge_connected", [0.2, 0.2])
        for seed in range(10):
            g, trace = grow(model, StopCondition.at_vertices(50), seed)
            before_last = g.n - trace.steps[-1].dn
            assert before_last < 50 <= g.n <= 51

    def test_observer_sees_every_step(self):
        seen = []
        grow(preset("pa"), steps(25), seed=0, observer=lambda t, g, record: seen.append((t, g.n)))
        assert seen == [(t, t + 2) for t in range(1, 26)]

    def test_observer_does_not_change_the_run(self):
        model = preset("connected", [0.5])
        plain, _ = grow(model, steps(300), seed=12)
        watched, _ = grow(model, steps(300), seed=12,
                          observer=lambda t, g, record: check_property(g, GraphProperty.CONNECTED))
        assert plain == watched

    @pytest.mark.parametrize("name, params, prop", [
        ("connected", [0.5], GraphProperty.CONNECTED),
        ("simple_connected", [0.3], GraphProperty.CONNECTED),
        ("two_vertex_connected", [0.5], GraphProperty.BICONNECTED),
        ("two_edge_connected", ["1/3", "1/3"], GraphProperty.TWO_EDGE_CONNECTED),
        ("pa", [], GraphProperty.CONNECTED),
    ])
    def test_class_property_holds(self, name, params, prop):
        model = preset(name, params)
        for seed in range(5):
            g, _ = grow(model, steps(150), seed)
            assert check_property(g, prop)

    def test_simple_connected_stays_simple(self):
        g, _ = grow(preset("simple_connected", [0.2]), steps(400), seed=8)
        assert all(g.multiplicity(u, v) == 1 for u, v in g.edges)

    def test_stuck_when_nothing_applies(self):
        model = PicgModel("stuck", [BasisGraph("B1", MultiGraph(1), Fraction(1))],
                          [Rule("R3", RuleKind.SUBDIVIDE_EDGE, SelectionKernel.UNIFORM_EDGE, Fraction(1))])
        with pytest.raises(Stuck):
            grow(model, steps(1), seed=0)

    def test_vertex_target_below_basis(self):
        with pytest.raises(BadParams):
            grow(preset("two_vertex_connected", [0.5]), StopCondition.at_vertices(2), seed=0)

    def test_vertex_target_without_vertex_rules(self):
        model = PicgModel("edges", [BasisGraph("B2", basis_graph("B2"), Fraction(1))],
                          [Rule("R2", RuleKind.ADD_EDGE, SelectionKernel.UNIFORM_PAIR, Fraction(1))])
        with pytest.raises(BadParams):
            grow(model, StopCondition.at_vertices(10), seed=0)

    def test_reconcile_detects_mismatch(self):
        g, trace = grow(preset("pa"), steps(10), seed=0)
        g.add_vertex()
        with pytest.raises(InvariantViolation):
            trace.reconcile(g)


class TestCollapsePa:
    def test_block_size_one_is_identity(self):
        g, trace = grow(preset("pa"), steps(40), seed=21)
        collapsed = collapse_pa(g, trace, 1)
        assert collapsed.n == g.n
        assert collapsed.edges == g.edges

    def test_blocks_merge_vertices(self):
        g, trace = grow(preset("pa"), steps(12), seed=4)
        collapsed = collapse_pa(g, trace, 3)
        assert collapsed.n == 2 + 4
        assert collapsed.m == g.m
        assert sum(collapsed.degree) == 2 * g.m
        # every block keeps the three edges its vertices brought in
        assert all(d >= 3 for d in collapsed.degree[2:])

    def test_bad_block_size(self):
        g, trace = grow(preset("pa"), steps(5), seed=0)
        with pytest.raises(BadBlockSize):
            collapse_pa(g, trace, 2)

    def test_needs_one_new_vertex_per_step(self):
        g, trace = grow(preset("two_edge_connected", [0.2, 0.2]), steps(20), seed=0)
        with pytest.raises(BadParams):
            collapse_pa(g, trace, 1)


class TestWorkedExamples:
    def test_connected_first_step(self):
        for seed in range(5):
            g, _ = grow(preset("connected", [0.5]), steps(1), seed)
            assert (g.n, g.m) == (2, 1)

    def test_pa_first_step(self):
        g, _ = grow(preset("pa"), steps(1), seed=3)
        assert (g.n, g.m) == (3, 2)

    def test_applicability(self):
        pendant = Rule("R1", RuleKind.ADD_PENDANT, SelectionKernel.UNIFORM_VERTEX, Fraction(1))
        subdivide = Rule("R3", RuleKind.SUBDIVIDE_EDGE, SelectionKernel.UNIFORM_EDGE, Fraction(1))
        assert applicable(basis_graph("B1"), pendant)
        assert applicable(basis_graph("B2"), subdivide)

    def test_subdivide_triangle_gives_four_cycle(self):
        g = basis_graph("B2")
        apply_rule(g, Rule("R3", RuleKind.SUBDIVIDE_EDGE, SelectionKernel.UNIFORM_EDGE, Fraction(1)), RandomStream(0))
        assert (g.n, g.m) == (4, 4)
        assert g.degree == [2, 2, 2, 2]
        assert check_property(g, GraphProperty.TWO_EDGE_CONNECTED)

    def test_attach_triangle_on_k3(self):
        g = basis_graph("B2")
        record = apply_rule(g, Rule("R4", RuleKind.ATTACH_TRIANGLE, SelectionKernel.UNIFORM_VERTEX, Fraction(1)),
                            RandomStream(1))
        assert (g.n, g.m) == (5, 6)
        assert g.degree[record.left.vertices[0]] == 4

    def test_pendant_on_single_vertex(self):
        g = basis_graph("B1")
        apply_rule(g, Rule("R1", RuleKind.ADD_PENDANT, SelectionKernel.UNIFORM_VERTEX, Fraction(1)), RandomStream(2))
        assert g == MultiGraph(2, [(0, 1)])

    @pytest.mark.parametrize("seed", range(6))
    def test_collapse_two_steps_into_one_vertex(self, seed):
        g, trace = grow(preset("pa"), steps(2), seed)
        collapsed = collapse_pa(g, trace, 2)
        assert collapsed.n == 3
        loops = sum(1 for u, v in collapsed.edges if u == v)
        # the second new vertex may attach to the first, which leaves a loop on the block
        assert collapsed.degree[2] == 2 + loops
        assert sum(collapsed.degree) == sum(g.degree)

"""
The PICG executor: basis graphs, the rule vocabulary, probabilistic rule selection
with the redraw policy for inapplicable rules, the growth loop and the PA collapse.
"""

import logging
import re
import sys
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import accumulate
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

# Add src directory to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from errors import BadBlockSize, BadParams, InvariantViolation, NotApplicable, Stuck, UnknownBasis
from graph_core import LeftElement, MultiGraph, SelectionKernel, kernel_applicable, sample_left_element
from random_stream import RandomStream

logger = logging.getLogger(__name__)


class RuleKind(str, Enum):
    ADD_PENDANT = "add_pendant"          # R1
    ADD_EDGE = "add_edge"                # R2
    SUBDIVIDE_EDGE = "subdivide_edge"    # R3
    ATTACH_TRIANGLE = "attach_triangle"  # R4
    PA_ATTACH = "pa_attach"


class Expansion(str, Enum):
    EXPANDING = "expanding"
    STABLE = "stable"
    SHRINKING = "shrinking"


# (delta_n, delta_m) realized by one application
RULE_DELTAS: Dict[RuleKind, Tuple[int, int]] = {
    RuleKind.ADD_PENDANT: (1, 1),
    RuleKind.ADD_EDGE: (0, 1),
    RuleKind.SUBDIVIDE_EDGE: (1, 1),
    RuleKind.ATTACH_TRIANGLE: (2, 3),
    RuleKind.PA_ATTACH: (1, 1),
}

VERTEX_KERNELS = (SelectionKernel.UNIFORM_VERTEX, SelectionKernel.DEGREE_PROPORTIONAL_VERTEX)

# kernels whose left element is connected; a vertex pair is not
LOCAL_KERNELS = VERTEX_KERNELS + (SelectionKernel.UNIFORM_EDGE,)

QUANTITIES = ("n", "m")

COMPATIBLE_KERNELS: Dict[RuleKind, Tuple[SelectionKernel, ...]] = {
    RuleKind.ADD_PENDANT: VERTEX_KERNELS,
    RuleKind.ADD_EDGE: (SelectionKernel.UNIFORM_PAIR, SelectionKernel.UNIFORM_NONADJACENT_PAIR),
    RuleKind.SUBDIVIDE_EDGE: (SelectionKernel.UNIFORM_EDGE,),
    RuleKind.ATTACH_TRIANGLE: VERTEX_KERNELS,
    RuleKind.PA_ATTACH: (SelectionKernel.DEGREE_PROPORTIONAL_VERTEX,),
}


@dataclass(frozen=True)
class Rule:
    """A generating rule with its selection kernel and selection probability r_i."""
    name: str
    kind: RuleKind
    kernel: SelectionKernel
    prob: Fraction

    @property
    def delta_n(self) -> int:
        return RULE_DELTAS[self.kind][0]

    @property
    def delta_m(self) -> int:
        return RULE_DELTAS[self.kind][1]

    def delta(self, quantity: str) -> int:
        if quantity not in QUANTITIES:
            raise BadParams(f"quantity must be one of {QUANTITIES}, got {quantity!r}")
        return RULE_DELTAS[self.kind][QUANTITIES.index(quantity)]

    @property
    def is_local(self) -> bool:
        return self.kernel in LOCAL_KERNELS

    def expansion(self, quantity: str) -> Expansion:
        """Whether one application raises, keeps or lowers the vertex (`n`) or edge (`m`) count."""
        change = self.delta(quantity)
        if change > 0:
            return Expansion.EXPANDING
        if change == 0:
            return Expansion.STABLE
        return Expansion.SHRINKING


@dataclass
class BasisGraph:
    """An initial graph with its selection probability q_i."""
    name: str
    graph: MultiGraph
    prob: Fraction


@dataclass
class PicgModel:
    """Basis distribution plus weighted rule list."""
    name: str
    basis: List[BasisGraph]
    rules: List[Rule]

    @property
    def max_basis_order(self) -> int:
        return max(entry.graph.n for entry in self.basis)

    def expected_delta(self, quantity: str) -> Fraction:
        """Mean change of `n` or `m` per step when every rule is applicable."""
        return sum((Fraction(rule.prob) * rule.delta(quantity) for rule in self.rules), Fraction(0))

    def check_growth(self, quantity: str = "n") -> None:
        """BadParams unless the expected change of `quantity` per step is positive."""
        rate = self.expected_delta(quantity)
        if rate <= 0:
            raise BadParams(f"model {self.name} does not grow in {quantity}: expected change per step is {rate}")


@dataclass(frozen=True)
class StopCondition:
    """Stop after `steps` steps, or after the step that first reaches `vertices` vertices."""
    steps: Optional[int] = None
    vertices: Optional[int] = None

    @classmethod
    def after_steps(cls, steps: int) -> "StopCondition":
        return cls(steps=steps)

    @classmethod
    def at_vertices(cls, vertices: int) -> "StopCondition":
        return cls(vertices=vertices)

    def reached(self, t: int, g: MultiGraph) -> bool:
        if self.steps is not None:
            return t >= self.steps
        return g.n >= self.vertices

    def describe(self) -> str:
        if self.steps is not None:
            return f"steps={self.steps}"
        return f"vertices={self.vertices}"


@dataclass(frozen=True)
class StepRecord:
    t: int
    rule_index: int
    rule: str
    left: LeftElement
    created: Tuple[int, ...]
    dn: int
    dm: int


@dataclass
class GrowthTrace:
    seed: int
    model_name: str
    basis_name: str
    n0: int
    m0: int
    steps: List[StepRecord] = field(default_factory=list)

    def totals(self) -> Tuple[int, int]:
        """(n, m) implied by the basis plus every recorded delta."""
        return (self.n0 + sum(r.dn for r in self.steps),
                self.m0 + sum(r.dm for r in self.steps))

    def reconcile(self, g: MultiGraph) -> None:
        if self.totals() != (g.n, g.m):
            raise InvariantViolation(
                f"trace totals {self.totals()} do not match the graph ({g.n}, {g.m})")


Observer = Callable[[int, MultiGraph, StepRecord], None]


def basis_graph(name: str) -> MultiGraph:
    """B1 (one vertex), B2 (triangle) or PA(m_pa) (two vertices, m_pa parallel edges)."""
    key = name.strip()
    if key == "B1":
        return MultiGraph(1)
    if key == "B2":
        return MultiGraph(3, [(0, 1), (1, 2), (2, 0)])
    match = re.fullmatch(r"PA(?:\((\d+)\))?", key)
    if match is None:
        raise UnknownBasis(f"unknown basis graph {name!r} (expected B1, B2 or PA(m))")
    m_pa = int(match.group(1) or 1)
    if m_pa < 1:
        raise BadParams(f"PA basis needs m_pa >= 1, got {m_pa}")
    return MultiGraph(2, [(0, 1)] * m_pa)


def applicable(g: MultiGraph, rule: Rule) -> bool:
    return kernel_applicable(g, rule.kernel)


def apply_rule(g: MultiGraph, rule: Rule, rng: RandomStream, t: int = 0, rule_index: int = -1) -> StepRecord:
    """Select the left element and rewrite g in place."""
    if not applicable(g, rule):
        raise NotApplicable(f"rule {rule.name} ({rule.kind.value}) has no left element in {g!r}")
    n_before, m_before = g.n, g.m
    left = sample_left_element(g, rule.kernel, rng)

    if rule.kind in (RuleKind.ADD_PENDANT, RuleKind.PA_ATTACH):
        w = g.add_vertex()
        g.add_edge(left.vertices[0], w)
        created: Tuple[int, ...] = (w,)
    elif rule.kind is RuleKind.ADD_EDGE:
        g.add_edge(*left.vertices)
        created = ()
    elif rule.kind is RuleKind.SUBDIVIDE_EDGE:
        created = (g.subdivide_edge(left.edge),)
    else:
        # triangle on v and two new vertices
        v = left.vertices[0]
        w1 = g.add_vertex()
        w2 = g.add_vertex()
        g.add_edge(v, w1)
        g.add_edge(v, w2)
        g.add_edge(w1, w2)
        created = (w1, w2)

    return StepRecord(t=t, rule_index=rule_index, rule=rule.name, left=left, created=created,
                      dn=g.n - n_before, dm=g.m - m_before)


def grow(model: PicgModel, stop: StopCondition, seed: int,
         observer: Optional[Observer] = None) -> Tuple[MultiGraph, GrowthTrace]:
    """Draw a basis graph, then apply i.i.d. drawn rules until the stop condition holds.

    A drawn rule without a left element is replaced by a redraw from the applicable
    rules with renormalized probabilities. Deterministic in (model, stop, seed).
    """
    _check_stop(model, stop)
    rng = RandomStream(seed)

    # the basis draw consumes the first variate
    basis = model.basis[rng.choose_weighted(list(accumulate(float(b.prob) for b in model.basis)))]
    g = basis.graph.copy()
    trace = GrowthTrace(seed=seed, model_name=model.name, basis_name=basis.name, n0=g.n, m0=g.m)

    weights = [float(rule.prob) for rule in model.rules]
    cumulative = list(accumulate(weights))
    logger.debug("growing %s from %s (%s, seed %d)", model.name, basis.name, stop.describe(), seed)

    t = 0
    while not stop.reached(t, g):
        t += 1
        index = rng.choose_weighted(cumulative)
        # redraw among the rules that still have a left element
        if not applicable(g, model.rules[index]):
            index = _redraw_applicable(g, model, weights, rng, t)
        record = apply_rule(g, model.rules[index], rng, t=t, rule_index=index)
        trace.steps.append(record)
        if observer is not None:
            observer(t, g, record)

    logger.debug("grew %s to n=%d m=%d in %d steps", model.name, g.n, g.m, t)
    return g, trace


def _check_stop(model: PicgModel, stop: StopCondition) -> None:
    if (stop.steps is None) == (stop.vertices is None):
        raise BadParams("give exactly one of steps or vertices as the stop condition")
    if stop.steps is not None and stop.steps < 0:
        raise BadParams(f"step count must be >= 0, got {stop.steps}")
    if stop.vertices is not None:
        if stop.vertices < model.max_basis_order:
            raise BadParams(f"vertex target {stop.vertices} is below the basis order {model.max_basis_order}")
        model.check_growth("n")


def _redraw_applicable(g: MultiGraph, model: PicgModel, weights: List[float], rng: RandomStream, t: int) -> int:
    candidates = [i for i, rule in enumerate(model.rules) if applicable(g, rule)]
    if not candidates:
        raise Stuck(f"no rule of {model.name} is applicable at step {t} ({g!r})")
    choice = rng.choose_weighted(list(accumulate(weights[i] for i in candidates)))
    return candidates[choice]


def check_conservation(model: PicgModel, trace: GrowthTrace) -> None:
    """Every record realized its rule's declared deltas."""
    for record in trace.steps:
        rule = model.rules[record.rule_index]
        if (record.dn, record.dm) != (rule.delta_n, rule.delta_m):
            raise InvariantViolation(
                f"step {record.t}: {rule.name} realized ({record.dn}, {record.dm}), "
                f"declared ({rule.delta_n}, {rule.delta_m})")


def collapse_pa(g: MultiGraph, trace: GrowthTrace, m_pa: int) -> MultiGraph:
    """Merge the vertices added at steps (j-1)m_pa+1 .. j*m_pa into vertex j.

    The basis vertices keep their ids; edges inside a block become loops.
    """
    if m_pa < 1:
        raise BadParams(f"m_pa must be >= 1, got {m_pa}")
    steps = len(trace.steps)
    if steps % m_pa:
        raise BadBlockSize(f"{steps} steps is not a multiple of m_pa={m_pa}")

    # old vertex id -> collapsed id
    mapping: List[Optional[int]] = [None] * g.n
    for v in range(trace.n0):
        mapping[v] = v
    for record in trace.steps:
        if len(record.created) != 1:
            raise BadParams(f"step {record.t} created {len(record.created)} vertices; "
                            "collapse needs a preferential-attachment trace")
        mapping[record.created[0]] = trace.n0 + (record.t - 1) // m_pa
    if any(target is None for target in mapping):
        raise BadParams("trace does not account for every vertex of the graph")

    # parallel edges and loops survive the merge
    collapsed = MultiGraph(trace.n0 + steps // m_pa, allow_loops=True)
    for u, v in g.edges:
        collapsed.add_edge(mapping[u], mapping[v])
    return collapsed


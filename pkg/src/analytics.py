#!/usr/bin/env python3
"""
Closed-form predictors for the preset PICG models and the oracles used to check them.

- rate_limits: expected per-step growth of n and m
- order/size distributions: exact forward DP over the model (the oracle) and the
  printed closed forms for the presets
- degree laws: the printed stationary laws, the power-series recurrence of the same
  generating functions, and the corrected laws that count both endpoints of an added edge
"""

import logging
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, logsumexp

# Add src directory to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from errors import BadParams, Stuck
from graph_core import SelectionKernel
from model_dsl import preset_kind
from rules_engine import BasisGraph, PicgModel, Rule

logger = logging.getLogger(__name__)

TAIL_TOLERANCE = 1e-15
MAX_DEGREE = 200_000
NEAR_ROOT_TOLERANCE = 1e-6

DEGREE_LAW_KINDS = ("connected", "two_vertex_connected", "two_edge_connected")
ORDER_LAW_KINDS = ("pa", "connected", "two_vertex_connected", "two_edge_connected")


@dataclass
class Distribution:
    """Probabilities of the integers offset, offset + 1, ..."""
    offset: int
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)

    @classmethod
    def point(cls, value: int) -> "Distribution":
        return cls(value, np.ones(1))

    @classmethod
    def from_dict(cls, mapping: Dict[int, float]) -> "Distribution":
        if not mapping:
            return cls(0, np.zeros(0))
        low, high = min(mapping), max(mapping)
        probs = np.zeros(high - low + 1)
        for value, p in mapping.items():
            probs[value - low] += p
        return cls(low, probs)

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + len(self.probs))

    def pmf(self, value: int) -> float:
        index = value - self.offset
        if 0 <= index < len(self.probs):
            return float(self.probs[index])
        return 0.0

    def total(self) -> float:
        return float(self.probs.sum())

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    def as_dict(self) -> Dict[int, float]:
        return {int(v): float(p) for v, p in zip(self.support, self.probs) if p > 0}

    def trimmed(self) -> "Distribution":
        nonzero = np.flatnonzero(self.probs)
        if len(nonzero) == 0:
            return Distribution(self.offset, np.zeros(0))
        first, last = nonzero[0], nonzero[-1]
        return Distribution(self.offset + int(first), self.probs[first:last + 1].copy())


@dataclass(frozen=True)
class RatePair:
    """Expected change of vertex count (dn) and edge count (dm) per step."""
    dn: Fraction
    dm: Fraction

    @property
    def mean_degree(self) -> float:
        """Limit of 2m/n."""
        return float(2 * self.dm / self.dn)


def rate_limits(model: PicgModel) -> RatePair:
    return RatePair(model.expected_delta("n"), model.expected_delta("m"))


# -- exact DP oracle --------------------------------------------------------

def _kernel_open(kernel: SelectionKernel, n: int, m: int) -> bool:
    """Applicability of a kernel from vertex and edge counts alone."""
    if kernel is SelectionKernel.UNIFORM_VERTEX:
        return n >= 1
    if kernel is SelectionKernel.UNIFORM_PAIR:
        return n >= 2
    if kernel is SelectionKernel.UNIFORM_NONADJACENT_PAIR:
        # exact for simple graphs only
        return n >= 2 and m < n * (n - 1) // 2
    return m >= 1


def _step_weights(model: PicgModel, n: int, m: int) -> List[Tuple[Rule, float]]:
    """Rules that can fire at (n, m) with their probabilities after redraw renormalization."""
    open_rules = [rule for rule in model.rules if _kernel_open(rule.kernel, n, m)]
    if not open_rules:
        raise Stuck(f"no rule of {model.name} is applicable with n={n}, m={m}")
    total = float(sum(rule.prob for rule in open_rules))
    return [(rule, float(rule.prob) / total) for rule in open_rules]


def _needs_joint_state(model: PicgModel) -> bool:
    return any(rule.kernel is SelectionKernel.UNIFORM_NONADJACENT_PAIR for rule in model.rules)


def joint_distribution_exact(model: PicgModel, t: int) -> Dict[Tuple[int, int], float]:
    """Exact law of (n, m) after t steps by forward DP over the joint state."""
    if t < 0:
        raise BadParams(f"step count must be >= 0, got {t}")
    if _needs_joint_state(model) and any(b.graph.m != _simple_edge_count(b) for b in model.basis):
        logger.warning("model %s has a basis graph with parallel edges; the non-adjacent pair count assumes "
                       "a simple graph", model.name)

    # start from the basis law
    states: Dict[Tuple[int, int], float] = {}
    for entry in model.basis:
        key = (entry.graph.n, entry.graph.m)
        states[key] = states.get(key, 0.0) + float(entry.prob)

    # one step: push each state along every rule that can fire there
    for _ in range(t):
        following: Dict[Tuple[int, int], float] = {}
        for (n, m), p in states.items():
            for rule, weight in _step_weights(model, n, m):
                key = (n + rule.delta_n, m + rule.delta_m)
                following[key] = following.get(key, 0.0) + p * weight
        states = following
    return states


def _simple_edge_count(entry: BasisGraph) -> int:
    return len({(min(u, v), max(u, v)) for u, v in entry.graph.edges if u != v})


def _tracked_distribution(model: PicgModel, t: int, quantity: str) -> Distribution:
    """Law of n (quantity "n") or m ("m") after t steps.

    Kernel applicability only depends on min(n, 2) and min(m, 1), both
    non-decreasing, so the DP carries one vector per such phase.
    """
    if t < 0:
        raise BadParams(f"step count must be >= 0, got {t}")
    if _needs_joint_state(model):
        logger.debug("model %s selects non-adjacent pairs; using the joint (n, m) DP", model.name)
        joint = joint_distribution_exact(model, t)
        index = 0 if quantity == "n" else 1
        marginal: Dict[int, float] = {}
        for key, p in joint.items():
            marginal[key[index]] = marginal.get(key[index], 0.0) + p
        return Distribution.from_dict(marginal).trimmed()

    def tracked(graph) -> int:
        return graph.n if quantity == "n" else graph.m

    max_delta = max(rule.delta(quantity) for rule in model.rules)
    high = max(tracked(entry.graph) for entry in model.basis)
    size = high + t * max_delta + 1

    # phase (min(n, 2), min(m, 1)) -> law of the tracked count
    phases: Dict[Tuple[int, int], np.ndarray] = {}
    for entry in model.basis:
        phase = (min(entry.graph.n, 2), min(entry.graph.m, 1))
        vector = phases.setdefault(phase, np.zeros(size))
        vector[tracked(entry.graph)] += float(entry.prob)

    for _ in range(t):
        following: Dict[Tuple[int, int], np.ndarray] = {}
        for (n_flag, m_flag), vector in phases.items():
            for rule, weight in _step_weights(model, n_flag, m_flag):
                phase = (min(n_flag + rule.delta_n, 2), min(m_flag + rule.delta_m, 1))
                target = following.setdefault(phase, np.zeros(size))
                shift = rule.delta(quantity)
                # only the first high + 1 entries can be nonzero
                target[shift:high + shift + 1] += weight * vector[:high + 1]
        phases = following
        high += max_delta

    total = np.sum(list(phases.values()), axis=0)
    return Distribution(0, total).trimmed()


def order_distribution_exact(model: PicgModel, t: int) -> Distribution:
    """Exact law of the vertex count after t steps."""
    return _tracked_distribution(model, t, "n")


def size_distribution(model: PicgModel, t: int) -> Distribution:
    """Exact law of the edge count after t steps."""
    return _tracked_distribution(model, t, "m")


def expected_order(model: PicgModel, t: int) -> float:
    return order_distribution_exact(model, t).mean()


def expected_size(model: PicgModel, t: int) -> float:
    return size_distribution(model, t).mean()


# -- printed closed forms -----------------------------------------------------

def _checked_params(kind: str, params: Sequence) -> Tuple[str, List[float]]:
    """Normalized preset kind and float parameters, validated."""
    if kind == "simple_connected":
        kind = "connected"
    arity = {"pa": 0, "connected": 1, "two_vertex_connected": 1, "two_edge_connected": 2}
    if kind not in arity:
        raise BadParams(f"no closed forms for model kind {kind!r}")
    values = [float(p) for p in params]
    if kind == "pa":
        return kind, values
    if len(values) != arity[kind]:
        raise BadParams(f"{kind} takes {arity[kind]} parameters, got {len(values)}")
    if any(not 0 < v < 1 for v in values):
        raise BadParams(f"{kind} parameters must lie in (0, 1), got {values}")
    if kind == "two_edge_connected" and values[0] + values[1] >= 1:
        raise BadParams(f"q + r must be below 1, got {values[0] + values[1]}")
    return kind, values


def model_params(model: PicgModel) -> Tuple[str, List[float]]:
    """Preset kind and parameters of a model, for the closed-form predictors."""
    recognized = preset_kind(model)
    if recognized is None:
        raise BadParams(f"model {model.name} does not have the structure of a preset; no closed forms apply")
    kind, params = recognized
    return _checked_params(kind, [] if kind == "pa" else params)


def _log_binom(a: int, b: int) -> float:
    if b < 0 or b > a or a < 0:
        return -math.inf
    return float(gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1))


def _log_power(base: float, exponent: int) -> float:
    if exponent == 0:
        return 0.0
    return exponent * math.log(base)


def order_distribution_paper(kind: str, t: int, params: Sequence, n: int, coefficient: str = "printed") -> float:
    """P(n vertices after t steps) from the preset's closed form, evaluated in log space.

    For two_edge_connected, coefficient="printed" uses a_j^n = C(2j-n+2, n-j-2) and
    coefficient="multinomial" uses C(j-1, n-j-2).
    """
    kind, values = _checked_params(kind, params)
    if t < 0:
        raise BadParams(f"step count must be >= 0, got {t}")
    if coefficient not in ("printed", "multinomial"):
        raise BadParams(f"coefficient must be 'printed' or 'multinomial', got {coefficient!r}")

    if kind == "pa":
        return 1.0 if n == t + 2 else 0.0

    if kind == "connected":
        if t == 0:
            return 1.0 if n == 1 else 0.0
        q = values[0]
        if n <= 1:
            return 0.0
        log_p = _log_binom(t - 1, t - n + 1) + _log_power(q, n - 2) + _log_power(1 - q, t - n + 1)
        return math.exp(log_p) if log_p > -math.inf else 0.0

    if kind == "two_vertex_connected":
        if t == 0:
            return 1.0 if n == 3 else 0.0
        q = values[0]
        r = 1 - q
        if n <= 2:
            return 0.0
        log_p = _log_binom(t, n - 3) + _log_power(r, n - 3) + _log_power(q, t - n + 3)
        return math.exp(log_p) if log_p > -math.inf else 0.0

    q, r = values
    s = 1 - q - r
    terms = []
    for j in range(n // 2, n - 1):
        if coefficient == "printed":
            log_a = _log_binom(2 * j - n + 2, n - j - 2)
        else:
            log_a = _log_binom(j - 1, n - j - 2)
        if log_a == -math.inf or t - j + 1 < 0:
            continue
        terms.append(log_a + _log_binom(t, t - j + 1) + _log_power(q, t - j + 1)
                     + _log_power(r, 2 * j - n + 1) + _log_power(s, n - j - 2))
    if not terms:
        return 0.0
    return float(np.exp(logsumexp(terms)))


def order_law_table(kind: str, t: int, params: Sequence, coefficient: str = "printed") -> Distribution:
    """order_distribution_paper over every order a preset can reach in t steps."""
    kind, values = _checked_params(kind, params)
    top = 3 + 2 * t
    probs = [order_distribution_paper(kind, t, values, n, coefficient) for n in range(0, top + 1)]
    return Distribution(0, np.array(probs)).trimmed()


def size_distribution_paper(kind: str, t: int, m_pa: int = 1) -> Optional[Distribution]:
    """Printed size law (a point mass) or None where no closed form is given.

    `m_pa` is the number of parallel edges in the PA basis.
    """
    if t < 0:
        raise BadParams(f"step count must be >= 0, got {t}")
    if kind in ("connected", "simple_connected"):
        return Distribution.point(t)
    if kind == "two_vertex_connected":
        return Distribution.point(t + 3)
    if kind == "pa":
        if m_pa < 1:
            raise BadParams(f"m_pa must be >= 1, got {m_pa}")
        return Distribution.point(t + m_pa)
    return None


def expected_order_paper(kind: str, t: int, params: Sequence) -> float:
    """The printed expectation of the vertex count."""
    kind, values = _checked_params(kind, params)
    if t < 0:
        raise BadParams(f"step count must be >= 0, got {t}")
    if kind == "pa":
        return float(t + 2)
    if kind == "connected":
        if t == 0:
            return 1.0
        q = values[0]
        return (t - 1) * q + 2 - (t + 1) * q ** (t - 1)
    if kind == "two_vertex_connected":
        if t == 0:
            return 3.0
        q = values[0]
        r = 1 - q
        value = t * r + 3 - t * (t - 1) * (t + 1) / 2 * q * q * (r ** (t - 2) if t >= 2 else 0.0)
        return value - (t + 2) * t * q * r ** (t - 1) - (t - 3) * r ** t
    q, r = values
    return 3 + t * (r + 2 * (1 - q - r))


# -- degree laws ----------------------------------------------------------------

def _rational_law(kind: str, values: List[float], corrected: bool) -> Tuple[List[float], List[float], int]:
    """(numerator, denominator, shift) of the degree generating function.

    p_{shift + k} is the coefficient of z^k in numerator / denominator.
    """
    if kind == "connected":
        q = values[0]
        if corrected:
            return [0.0, q], [2.0, -(2.0 - q)], 0
        return [0.0, q], [1.0 + q, -1.0], 0
    if kind == "two_vertex_connected":
        q = values[0]
        r = 1 - q
        if corrected:
            return [r], [r + 2 * q, -2 * q], 2
        return [r], [1.0, -q], 2
    if kind == "two_edge_connected":
        q, r = values
        s = 1 - q - r
        if corrected:
            return [r + 2 * s], [1 + q + 2 * s, -2 * q, -s], 2
        return [r + 2 * s], [1 + 2 * s, -q, -s], 2
    raise BadParams(f"no closed-form degree law for {kind}")


def _degree_kind(kind: str, params: Sequence) -> Tuple[str, List[float]]:
    kind, values = _checked_params(kind, params)
    if kind not in DEGREE_LAW_KINDS:
        raise BadParams(f"no closed-form degree law for {kind}")
    return kind, values


def two_root_coefficient(scale: float, rho1: float, rho2: float, k: int) -> float:
    """[z^k] scale / ((1 - rho1 z)(1 - rho2 z)).

    Partial fractions for well separated roots, the confluent form
    scale (k+1) rho^k for a repeated root, and the direct convolution
    sum for roots closer than NEAR_ROOT_TOLERANCE.
    """
    if k < 0:
        return 0.0
    gap = abs(rho1 - rho2)
    largest = max(abs(rho1), abs(rho2))
    if gap == 0:
        return scale * (k + 1) * rho1 ** k
    if gap <= NEAR_ROOT_TOLERANCE * largest:
        return scale * sum(rho1 ** j * rho2 ** (k - j) for j in range(k + 1))
    return scale * (rho1 ** (k + 1) - rho2 ** (k + 1)) / (rho1 - rho2)


def _quadratic_roots(d0: float, d1: float, d2: float) -> Tuple[float, float]:
    """rho1 >= rho2 with d0 + d1 z + d2 z^2 = d0 (1 - rho1 z)(1 - rho2 z)."""
    discriminant = d1 * d1 - 4 * d0 * d2
    if discriminant < 0:
        raise BadParams("degree generating function has complex roots")
    root = math.sqrt(discriminant)
    return (-d1 + root) / (2 * d0), (-d1 - root) / (2 * d0)


def degree_distribution_paper(kind: str, params: Sequence, d: int) -> float:
    """Stationary degree law as printed: geometric for connected and 2V, two-root for 2E."""
    kind, values = _degree_kind(kind, params)
    if kind == "connected":
        q = values[0]
        return q / (1 + q) ** d if d >= 1 else 0.0
    if kind == "two_vertex_connected":
        q = values[0]
        return (1 - q) * q ** (d - 2) if d >= 2 else 0.0

    if d < 2:
        return 0.0
    q, r = values
    s = 1 - q - r
    root = math.sqrt(q * q + 4 * s * (1 + 2 * s))
    rho1 = (q + root) / (2 * (1 + 2 * s))
    rho2 = (q - root) / (2 * (1 + 2 * s))
    k = d - 2
    if abs(rho1 - rho2) <= NEAR_ROOT_TOLERANCE * max(abs(rho1), abs(rho2)):
        return two_root_coefficient((r + 2 * s) / (1 + 2 * s), rho1, rho2, k)
    a1 = (q + root) * (r + 2 * s) / (2 * (1 + 2 * s) * root)
    a2 = -(q - root) * (r + 2 * s) / (2 * (1 + 2 * s) * root)
    return a1 * rho1 ** k + a2 * rho2 ** k


def degree_distribution_corrected(kind: str, params: Sequence, d: int) -> float:
    """Stationary degree law with both endpoints of an added edge gaining a degree."""
    kind, values = _degree_kind(kind, params)
    numerator, denominator, shift = _rational_law(kind, values, corrected=True)
    if kind == "connected":
        q = values[0]
        return q / 2 * (1 - q / 2) ** (d - 1) if d >= 1 else 0.0
    if kind == "two_vertex_connected":
        q = values[0]
        r = 1 - q
        return r / (r + 2 * q) * (2 * q / (r + 2 * q)) ** (d - 2) if d >= 2 else 0.0
    rho1, rho2 = _quadratic_roots(*denominator)
    return two_root_coefficient(numerator[0] / denominator[0], rho1, rho2, d - shift)


def series_coefficients(numerator: Sequence[float], denominator: Sequence[float], count: int) -> np.ndarray:
    """First `count` power-series coefficients of numerator / denominator."""
    c = np.zeros(count)
    for k in range(count):
        value = numerator[k] if k < len(numerator) else 0.0
        for i in range(1, min(k, len(denominator) - 1) + 1):
            value -= denominator[i] * c[k - i]
        c[k] = value / denominator[0]
    return c


def degree_distribution_series(kind: str, params: Sequence, d_max: int, law: str = "paper") -> Distribution:
    """Degrees 0..d_max by the linear recurrence of the generating function's denominator."""
    kind, values = _degree_kind(kind, params)
    if d_max < 2:
        raise BadParams(f"d_max must be >= 2, got {d_max}")
    if law not in ("paper", "corrected"):
        raise BadParams(f"law must be 'paper' or 'corrected', got {law!r}")
    numerator, denominator, shift = _rational_law(kind, values, corrected=(law == "corrected"))
    probs = np.zeros(d_max + 1)
    probs[shift:] = series_coefficients(numerator, denominator, d_max + 1 - shift)
    return Distribution(0, probs)


def dominant_ratio(kind: str, params: Sequence, law: str = "paper") -> float:
    """Largest root of the reflected denominator; the tail decays like its powers."""
    kind, values = _degree_kind(kind, params)
    _, denominator, _ = _rational_law(kind, values, corrected=(law == "corrected"))
    if len(denominator) == 2:
        return -denominator[1] / denominator[0]
    return max(abs(rho) for rho in _quadratic_roots(*denominator))


def degree_law_table(kind: str, params: Sequence, law: str = "paper",
                     d_max: Optional[int] = None, tail: float = TAIL_TOLERANCE) -> Distribution:
    """Degree law truncated at d_max, or where the remaining mass drops below `tail`.

    When the automatic cutoff reaches MAX_DEGREE first, the mass beyond it is
    added to the last cell so the table still sums to one.
    """
    if law not in ("paper", "corrected", "series"):
        raise BadParams(f"unknown degree law {law!r}")
    capped = False
    if d_max is None:
        d_max, capped = _tail_cutoff(kind, params, "paper" if law == "series" else law, tail)

    if law == "series":
        table = degree_distribution_series(kind, params, d_max, "paper")
    else:
        point = degree_distribution_paper if law == "paper" else degree_distribution_corrected
        table = Distribution(0, np.array([point(kind, params, d) for d in range(d_max + 1)]))

    if capped:
        missing = 1.0 - table.total()
        table.probs[-1] += max(0.0, missing)
        logger.info("%s %s law cut at degree %d; %.3g of tail mass folded into the last cell",
                    law, kind, d_max, missing)
    return table


def _tail_cutoff(kind: str, params: Sequence, law: str, tail: float) -> Tuple[int, bool]:
    """(d_max, whether MAX_DEGREE was hit before the tail fell below `tail`)."""
    ratio = dominant_ratio(kind, params, law)
    # tail after d is at most a constant times ratio^d / (1 - ratio)
    steps = math.log(tail * (1 - ratio)) / math.log(ratio)
    wanted = max(2, math.ceil(steps) + 3)
    if wanted > MAX_DEGREE:
        return MAX_DEGREE, True
    return int(wanted), False


def corrected_mean_degree(kind: str, params: Sequence) -> float:
    """Mean of the corrected degree law in closed form: 2 dm / dn."""
    kind, values = _degree_kind(kind, params)
    if kind == "connected":
        return 2 / values[0]
    if kind == "two_vertex_connected":
        return 2 / (1 - values[0])
    q, r = values
    s = 1 - q - r
    return 2 * (q + r + 3 * s) / (r + 2 * s)

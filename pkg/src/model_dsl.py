#!/usr/bin/env python3
"""
Model description language for PICG models (.picg files).

A model file names the basis graphs with their probabilities and the generating
rules with their probabilities and selection kernels:

    model connected
    basis {
      graph B1 prob 1 {
        vertices 1
      }
    }
    rules {
      rule R1 kind add_pendant prob 0.5 select uniform_vertex
      rule R2 kind add_edge prob 0.5 select uniform_pair
    }

Probabilities are decimals or fractions a/b. `#` starts a comment.
Also holds the preset models as factory functions.
"""

import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import LarkError, UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken

# Add src directory to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from errors import BadParams, Diagnostic, ParseError, ValidationError
from graph_core import MultiGraph, SelectionKernel
from rules_engine import COMPATIBLE_KERNELS, BasisGraph, PicgModel, Rule, RuleKind, basis_graph

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent.parent / "data"
MODEL_SUFFIX = ".picg"

NORMALIZATION_TOLERANCE = 1e-9
MAX_BASIS_ORDER = 10_000
MAX_EXACT_DIGITS = 17

GRAMMAR = r"""
    start: model_decl basis_block rules_block

    model_decl: "model" NAME
    basis_block: BASIS "{" graph_decl* "}"
    graph_decl: "graph" NAME "prob" PROB "{" "vertices" INT edge_list? "}"
    edge_list: "edges" EDGE*
    rules_block: RULES "{" rule_decl* "}"
    rule_decl: "rule" NAME "kind" KIND "prob" PROB "select" KERNEL SIMPLE?

    BASIS: "basis"
    RULES: "rules"
    SIMPLE: "simple"
    KIND: /(add_pendant|add_edge|subdivide_edge|attach_triangle|pa_attach)\b/
    KERNEL: /(uniform_vertex|degree_proportional_vertex|degree_proportional|uniform_nonadjacent_pair|uniform_pair|uniform_edge)\b/
    NAME: /[A-Za-z_][A-Za-z0-9_.()\-]*/
    PROB: /\d+\/\d+|(\d+\.?\d*|\.\d+)([eE][+-]?\d{1,3})?/
    INT: /\d+/
    EDGE: /\d+-\d+/
    COMMENT: /#[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

# DSL spelling of each kernel; the non-adjacent kernel is written `uniform_pair simple`
KERNEL_KEYWORDS: Dict[SelectionKernel, str] = {
    SelectionKernel.UNIFORM_VERTEX: "uniform_vertex",
    SelectionKernel.DEGREE_PROPORTIONAL_VERTEX: "degree_proportional",
    SelectionKernel.UNIFORM_PAIR: "uniform_pair",
    SelectionKernel.UNIFORM_NONADJACENT_PAIR: "uniform_pair",
    SelectionKernel.UNIFORM_EDGE: "uniform_edge",
}

_KERNEL_BY_KEYWORD: Dict[str, SelectionKernel] = {
    "uniform_vertex": SelectionKernel.UNIFORM_VERTEX,
    "degree_proportional": SelectionKernel.DEGREE_PROPORTIONAL_VERTEX,
    "degree_proportional_vertex": SelectionKernel.DEGREE_PROPORTIONAL_VERTEX,
    "uniform_pair": SelectionKernel.UNIFORM_PAIR,
    "uniform_nonadjacent_pair": SelectionKernel.UNIFORM_NONADJACENT_PAIR,
    "uniform_edge": SelectionKernel.UNIFORM_EDGE,
}

# how grammar terminals read in syntax messages
TERMINAL_TEXT: Dict[str, str] = {
    "KIND": "rule kind (add_pendant|add_edge|subdivide_edge|attach_triangle|pa_attach)",
    "KERNEL": "selection kernel (uniform_vertex|degree_proportional|uniform_pair|uniform_edge)",
    "SIMPLE": "'simple'",
    "BASIS": "'basis'",
    "RULES": "'rules'",
    "NAME": "name",
    "PROB": "probability (decimal or a/b)",
    "INT": "vertex count",
    "EDGE": "edge (u-v)",
    "LBRACE": "'{'",
    "RBRACE": "'}'",
}


@dataclass
class _GraphDecl:
    name: Token
    prob: Token
    vertices: Token
    edges: List[Token] = field(default_factory=list)


@dataclass
class _RuleDecl:
    name: Token
    kind: Token
    prob: Token
    kernel: Token
    simple: Optional[Token] = None


@v_args(inline=True)
class _ModelTransformer(Transformer):
    """Turns the parse tree into declarations that still carry their tokens."""

    def start(self, name, basis, rules):
        return name, basis, rules

    def model_decl(self, name):
        return name

    def basis_block(self, keyword, *graphs):
        return keyword, list(graphs)

    def graph_decl(self, name, prob, vertices, edges=None):
        return _GraphDecl(name, prob, vertices, edges or [])

    def edge_list(self, *edges):
        return list(edges)

    def rules_block(self, keyword, *rules):
        return keyword, list(rules)

    def rule_decl(self, name, kind, prob, kernel, simple=None):
        return _RuleDecl(name, kind, prob, kernel, simple)


_parser = Lark(GRAMMAR, parser="lalr", propagate_positions=True)


def parse_probability(literal: str) -> Fraction:
    """Exact value of a decimal or a/b literal; ValueError when malformed or a/0."""
    text = literal.strip()
    if "/" in text:
        numerator, denominator = text.split("/", 1)
        return Fraction(int(numerator), int(denominator))
    return Fraction(text)


def format_probability(p: Fraction) -> str:
    """Exact decimal when one with at most 17 significant digits exists, else a/b."""
    p = Fraction(p)
    if p.denominator == 1:
        return str(p.numerator)
    twos, fives, rest = 0, 0, p.denominator
    while rest % 2 == 0:
        rest //= 2
        twos += 1
    while rest % 5 == 0:
        rest //= 5
        fives += 1
    if rest == 1:
        places = max(twos, fives)
        scaled = abs(p.numerator) * 10 ** places // p.denominator
        digits = str(scaled).lstrip("0").rstrip("0")
        if len(digits) <= MAX_EXACT_DIGITS:
            whole, frac = divmod(scaled, 10 ** places)
            sign = "-" if p < 0 else ""
            return f"{sign}{whole}.{str(frac).zfill(places).rstrip('0')}"
    return f"{p.numerator}/{p.denominator}"


def _position(token: Token) -> Tuple[int, int]:
    return token.line, token.column


def _end_position(text: str) -> Tuple[int, int]:
    lines = text.split("\n")
    return len(lines), len(lines[-1]) + 1


def _terminal_text(name: str) -> str:
    if name in TERMINAL_TEXT:
        return TERMINAL_TEXT[name]
    try:
        pattern = _parser.get_terminal(name).pattern
    except KeyError:
        return name.strip('"').lower()
    # keywords are plain string patterns
    if pattern.type == "str":
        return repr(pattern.value)
    return name.lower()


def _syntax_diagnostic(err: LarkError, text: str) -> Diagnostic:
    line = getattr(err, "line", None)
    column = getattr(err, "column", None)
    if not isinstance(line, int) or line < 1:
        line, column = _end_position(text)

    if isinstance(err, UnexpectedCharacters):
        word = text[err.pos_in_stream:].split(None, 1)
        message = f"unexpected input {word[0]!r}" if word else "unexpected input"
    elif isinstance(err, UnexpectedEOF):
        message = "unexpected end of input"
    elif isinstance(err, UnexpectedToken):
        if err.token.type == "$END":
            line, column = _end_position(text)
            message = "unexpected end of input"
        else:
            what = "keyword" if err.token.type.startswith("__") else err.token.type.lower()
            message = f"unexpected {what} {str(err.token)!r}"
        expected = sorted({_terminal_text(name) for name in err.expected if not name.startswith("$")})
        if expected:
            message += f", expected one of: {', '.join(expected)}"
    else:
        message = str(err).splitlines()[0] if str(err) else type(err).__name__
    return Diagnostic(line, column if isinstance(column, int) and column > 0 else 1, message)


def parse_model(text: str, source_name: str = "<model>") -> PicgModel:
    """Parse and validate model text.

    Raises ParseError for syntax errors and ValidationError carrying every
    semantic problem found; a partial model is never returned.
    """
    try:
        tree = _parser.parse(text)
    except UnexpectedInput as err:
        raise ParseError([_syntax_diagnostic(err, text)], source_name) from None
    except LarkError as err:
        raise ParseError([_syntax_diagnostic(err, text)], source_name) from None

    name, (basis_kw, graphs), (rules_kw, rules) = _ModelTransformer().transform(tree)
    diagnostics: List[Diagnostic] = []
    basis = _build_basis(basis_kw, graphs, diagnostics)
    rule_list = _build_rules(rules_kw, rules, diagnostics)
    if diagnostics:
        raise ValidationError(diagnostics, source_name)

    model = PicgModel(name=str(name), basis=_renormalize_basis(basis), rules=_renormalize_rules(rule_list))
    logger.debug("parsed model %s: %d basis graphs, %d rules", model.name, len(model.basis), len(model.rules))
    return model


def _checked_probability(token: Token, what: str, diagnostics: List[Diagnostic]) -> Optional[Fraction]:
    try:
        value = parse_probability(str(token))
    except (ValueError, ZeroDivisionError):
        diagnostics.append(Diagnostic(*_position(token), f"{what} probability {str(token)!r} is not a number"))
        return None
    if value <= 0:
        diagnostics.append(Diagnostic(*_position(token), f"{what} probability must be > 0, got {token}"))
        return None
    if value > 1:
        diagnostics.append(Diagnostic(*_position(token), f"{what} probability must be <= 1, got {token}"))
        return None
    return value


def _check_sum(keyword: Token, what: str, probs: Sequence[Fraction], diagnostics: List[Diagnostic]) -> None:
    total = sum(probs, Fraction(0))
    if abs(float(total) - 1.0) > NORMALIZATION_TOLERANCE:
        diagnostics.append(Diagnostic(*_position(keyword), f"{what} weights sum to {float(total):.12g}"))


def _build_basis(keyword: Token, graphs: List[_GraphDecl], diagnostics: List[Diagnostic]) -> List[BasisGraph]:
    if not graphs:
        diagnostics.append(Diagnostic(*_position(keyword), "basis is empty"))
        return []

    result: List[BasisGraph] = []
    seen = set()
    complete = True
    for decl in graphs:
        if str(decl.name) in seen:
            diagnostics.append(Diagnostic(*_position(decl.name), f"duplicate basis graph {decl.name}"))
        seen.add(str(decl.name))

        prob = _checked_probability(decl.prob, f"basis graph {decl.name}", diagnostics)
        order = int(decl.vertices)
        if order < 1 or order > MAX_BASIS_ORDER:
            diagnostics.append(Diagnostic(*_position(decl.vertices),
                                          f"basis graph {decl.name} needs 1..{MAX_BASIS_ORDER} vertices, got {order}"))
            complete = False
            continue

        edges = []
        for token in decl.edges:
            u, v = (int(part) for part in str(token).split("-"))
            if u >= order or v >= order:
                diagnostics.append(Diagnostic(*_position(token), f"edge {token} uses a vertex outside 0..{order - 1}"))
            elif u == v:
                diagnostics.append(Diagnostic(*_position(token), f"edge {token} is a loop"))
            else:
                edges.append((u, v))
        if prob is None:
            complete = False
            continue
        result.append(BasisGraph(name=str(decl.name), graph=MultiGraph(order, edges), prob=prob))

    if complete:
        _check_sum(keyword, "basis", [entry.prob for entry in result], diagnostics)
    return result


def _build_rules(keyword: Token, rules: List[_RuleDecl], diagnostics: List[Diagnostic]) -> List[Rule]:
    if not rules:
        diagnostics.append(Diagnostic(*_position(keyword), "rule list is empty"))
        return []

    result: List[Rule] = []
    seen = set()
    complete = True
    for decl in rules:
        if str(decl.name) in seen:
            diagnostics.append(Diagnostic(*_position(decl.name), f"duplicate rule {decl.name}"))
        seen.add(str(decl.name))

        kind = RuleKind(str(decl.kind))
        kernel = _KERNEL_BY_KEYWORD[str(decl.kernel)]
        if decl.simple is not None:
            if kind is not RuleKind.ADD_EDGE or kernel is not SelectionKernel.UNIFORM_PAIR:
                diagnostics.append(Diagnostic(*_position(decl.simple),
                                              "`simple` only applies to add_edge with uniform_pair"))
            else:
                kernel = SelectionKernel.UNIFORM_NONADJACENT_PAIR
        if kernel not in COMPATIBLE_KERNELS[kind]:
            allowed = ", ".join(sorted({KERNEL_KEYWORDS[k] for k in COMPATIBLE_KERNELS[kind]}))
            diagnostics.append(Diagnostic(*_position(decl.kernel),
                                          f"kernel {decl.kernel} cannot select for {kind.value} (use {allowed})"))

        prob = _checked_probability(decl.prob, f"rule {decl.name}", diagnostics)
        if prob is None:
            complete = False
            continue
        result.append(Rule(name=str(decl.name), kind=kind, kernel=kernel, prob=prob))

    if complete:
        _check_sum(keyword, "rule", [rule.prob for rule in result], diagnostics)
    return result


def _renormalize_basis(basis: List[BasisGraph]) -> List[BasisGraph]:
    total = sum((entry.prob for entry in basis), Fraction(0))
    if total == 1:
        return basis
    return [BasisGraph(entry.name, entry.graph, entry.prob / total) for entry in basis]


def _renormalize_rules(rules: List[Rule]) -> List[Rule]:
    total = sum((rule.prob for rule in rules), Fraction(0))
    if total == 1:
        return rules
    return [Rule(rule.name, rule.kind, rule.kernel, rule.prob / total) for rule in rules]


def parse_model_file(path: Union[str, Path]) -> PicgModel:
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as err:
        raise ParseError([Diagnostic(1, 1, f"file is not UTF-8 text ({err.reason})")], str(path)) from None
    return parse_model(text, source_name=str(path))


def serialize_model(model: PicgModel) -> str:
    """Canonical model text; parse_model(serialize_model(m)) == m."""
    lines = [f"model {model.name}", "basis {"]
    for entry in model.basis:
        lines.append(f"  graph {entry.name} prob {format_probability(entry.prob)} {{")
        lines.append(f"    vertices {entry.graph.n}")
        if entry.graph.m:
            lines.append("    edges " + " ".join(f"{u}-{v}" for u, v in entry.graph.edges))
        lines.append("  }")
    lines.append("}")
    lines.append("rules {")
    for rule in model.rules:
        select = KERNEL_KEYWORDS[rule.kernel]
        if rule.kernel is SelectionKernel.UNIFORM_NONADJACENT_PAIR:
            select += " simple"
        lines.append(f"  rule {rule.name} kind {rule.kind.value} prob {format_probability(rule.prob)} select {select}")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --- presets -------------------------------------------------------------------

def _probability_param(value: Union[float, str, Fraction], label: str) -> Fraction:
    if isinstance(value, Fraction):
        p = value
    elif isinstance(value, str):
        try:
            p = parse_probability(value)
        except (ValueError, ZeroDivisionError):
            raise BadParams(f"{label} must be a probability, got {value!r}") from None
    else:
        # str() keeps 0.1 as 1/10 instead of the binary expansion
        p = Fraction(str(value))
    if not 0 < p < 1:
        raise BadParams(f"{label} must lie in (0, 1), got {value}")
    return p


def _single_basis(name: str) -> List[BasisGraph]:
    return [BasisGraph(name=name, graph=basis_graph(name), prob=Fraction(1))]


def create_pa_model(m_pa: int = 1) -> PicgModel:
    """Preferential attachment from PA(m_pa); one new vertex per step."""
    if int(m_pa) != m_pa or m_pa < 1:
        raise BadParams(f"m_pa must be a positive integer, got {m_pa}")
    return PicgModel(
        name="pa",
        basis=_single_basis(f"PA({int(m_pa)})"),
        rules=[Rule("PA", RuleKind.PA_ATTACH, SelectionKernel.DEGREE_PROPORTIONAL_VERTEX, Fraction(1))],
    )


def create_connected_model(q) -> PicgModel:
    """I(B1; R1, R2): pendant vertex with probability q, edge between any two vertices otherwise."""
    q = _probability_param(q, "q")
    return PicgModel(
        name="connected",
        basis=_single_basis("B1"),
        rules=[
            Rule("R1", RuleKind.ADD_PENDANT, SelectionKernel.UNIFORM_VERTEX, q),
            Rule("R2", RuleKind.ADD_EDGE, SelectionKernel.UNIFORM_PAIR, 1 - q),
        ],
    )


def create_simple_connected_model(q) -> PicgModel:
    """Connected model restricted to simple graphs: R2 only joins non-adjacent vertices."""
    q = _probability_param(q, "q")
    return PicgModel(
        name="simple_connected",
        basis=_single_basis("B1"),
        rules=[
            Rule("R1", RuleKind.ADD_PENDANT, SelectionKernel.UNIFORM_VERTEX, q),
            Rule("R2", RuleKind.ADD_EDGE, SelectionKernel.UNIFORM_NONADJACENT_PAIR, 1 - q),
        ],
    )


def create_two_vertex_connected_model(q) -> PicgModel:
    """I(B2; R2, R3): edge with probability q, subdivision with r = 1 - q."""
    q = _probability_param(q, "q")
    return PicgModel(
        name="two_vertex_connected",
        basis=_single_basis("B2"),
        rules=[
            Rule("R2", RuleKind.ADD_EDGE, SelectionKernel.UNIFORM_PAIR, q),
            Rule("R3", RuleKind.SUBDIVIDE_EDGE, SelectionKernel.UNIFORM_EDGE, 1 - q),
        ],
    )


def create_two_edge_connected_model(q, r) -> PicgModel:
    """I(B2; R2, R3, R4) with weights q, r and s = 1 - q - r."""
    q = _probability_param(q, "q")
    r = _probability_param(r, "r")
    s = 1 - q - r
    if s <= 0:
        raise BadParams(f"q + r must be below 1, got {float(q + r)}")
    return PicgModel(
        name="two_edge_connected",
        basis=_single_basis("B2"),
        rules=[
            Rule("R2", RuleKind.ADD_EDGE, SelectionKernel.UNIFORM_PAIR, q),
            Rule("R3", RuleKind.SUBDIVIDE_EDGE, SelectionKernel.UNIFORM_EDGE, r),
            Rule("R4", RuleKind.ATTACH_TRIANGLE, SelectionKernel.UNIFORM_VERTEX, s),
        ],
    )


PRESET_ARITY: Dict[str, Tuple[int, int]] = {
    "pa": (0, 1),
    "connected": (1, 1),
    "simple_connected": (1, 1),
    "two_vertex_connected": (1, 1),
    "two_edge_connected": (2, 2),
}


def preset(name: str, params: Sequence = ()) -> PicgModel:
    """Named preset model; raises BadParams for unknown names or bad parameters."""
    if name not in PRESET_ARITY:
        raise BadParams(f"unknown preset {name!r} (choose from {', '.join(PRESET_ARITY)})")
    low, high = PRESET_ARITY[name]
    if not low <= len(params) <= high:
        raise BadParams(f"preset {name} takes {low}..{high} parameters, got {len(params)}")

    if name == "pa":
        if not params:
            return create_pa_model()
        try:
            m_pa = int(str(params[0]))
        except ValueError:
            raise BadParams(f"m_pa must be a positive integer, got {params[0]!r}") from None
        return create_pa_model(m_pa)
    if name == "connected":
        return create_connected_model(params[0])
    if name == "simple_connected":
        return create_simple_connected_model(params[0])
    if name == "two_vertex_connected":
        return create_two_vertex_connected_model(params[0])
    return create_two_edge_connected_model(params[0], params[1])


def preset_kind(model: PicgModel) -> Optional[Tuple[str, List[Fraction]]]:
    """(preset name, parameters) when the model has a preset's structure, else None."""
    if len(model.basis) != 1:
        return None
    graph = model.basis[0].graph
    signature = sorted((rule.kind.value, rule.kernel.value) for rule in model.rules)
    weights = {rule.kind: rule.prob for rule in model.rules}

    if graph == basis_graph("B1"):
        if signature == [("add_edge", "uniform_pair"), ("add_pendant", "uniform_vertex")]:
            return "connected", [weights[RuleKind.ADD_PENDANT]]
        if signature == [("add_edge", "uniform_nonadjacent_pair"), ("add_pendant", "uniform_vertex")]:
            return "simple_connected", [weights[RuleKind.ADD_PENDANT]]
    if graph == basis_graph("B2"):
        if signature == [("add_edge", "uniform_pair"), ("subdivide_edge", "uniform_edge")]:
            return "two_vertex_connected", [weights[RuleKind.ADD_EDGE]]
        if signature == [("add_edge", "uniform_pair"), ("attach_triangle", "uniform_vertex"),
                         ("subdivide_edge", "uniform_edge")]:
            return "two_edge_connected", [weights[RuleKind.ADD_EDGE], weights[RuleKind.SUBDIVIDE_EDGE]]
    if graph.n == 2 and graph.m >= 1 and all(edge == (0, 1) for edge in graph.edges):
        if signature == [("pa_attach", "degree_proportional_vertex")]:
            return "pa", [Fraction(graph.m)]
    return None


def resolve_model(reference: str) -> PicgModel:
    """A model file path, or `preset:name[:p1[:p2]]`."""
    if reference.startswith("preset:"):
        parts = reference.split(":")
        return preset(parts[1], parts[2:])
    return parse_model_file(reference)


def preset_path(name: str) -> Path:
    return DATA_DIR / f"{name}{MODEL_SUFFIX}"

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""Problem files.

A problem file is line oriented; `#` starts a comment. Top-level lines are
`key = value` with the keys `kind` (symbol, pde, rule or pfaff), `builtin`
and `cap`. Sections follow:

    [dims]        base = x, y        fibre = u         order = 2
                  n = 2              m = 1             tensor = covector
                  coordinates = x, y, y1
    [equations]   one linear expression in jet coordinates per line, such
                  as `u_20 + u_02`; `lhs = rhs` is read as `lhs - rhs`
    [generators]  one 1-form per line, such as `dy - y1*dx`
    [lift]        `fibre, base, beta = poly`, e.g. `y, x, 1 = -y`
    [point]       `name = rational`, one coordinate per line

Jet coordinates are named `u` for order 0 and `u_20` for ∂²u/∂x², one digit
per base variable. `Problem.render` writes a canonical copy of the file
that parses back to an equal `Problem`.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from forge.algebra.exactlin import format_rational, to_rational
from forge.algebra.flags import PfaffianSystem, contact_system, darboux_model
from forge.algebra.jetcalc import JetPoint, JetSpec
from forge.algebra.kuranishi import LinearPDESystem, equation_order, parse_equation
from forge.algebra.medolaghi import (
    BUILTIN_RULES,
    TENSOR_TYPES,
    ProlongationRule,
    builtin_rule,
    zero_rule,
)
from forge.algebra.polyalg import parse_poly, poly_ring
from forge.algebra.spencer import SymbolSpace
from forge.main.support import DimensionMismatch, ProblemParseError

logger = logging.getLogger(__name__)

KINDS = ("symbol", "pde", "rule", "pfaff")
TOP_LEVEL_KEYS = ("kind", "builtin", "cap")
DIMS_KEYS = ("base", "fibre", "order", "n", "m", "coordinates", "tensor")
LIST_SECTIONS = ("equations", "generators", "lift")
SECTIONS = ("dims",) + LIST_SECTIONS + ("point",)
PFAFF_BUILTINS = ("darboux", "contact")

SECTION_RE = re.compile(r"^\[(?P<name>[a-z]+)\]$")
KEY_VALUE_RE = re.compile(r"^(?P<key>[^=]+?)\s*=\s*(?P<value>.+)$")


def _names(value: str) -> tuple[str, ...]:
    return tuple(name.strip() for name in value.split(",") if name.strip())


def _integer(value: str, what: str, line: Optional[int] = None) -> int:
    try:
        return int(value)
    except ValueError:
        raise ProblemParseError(f"{what} must be an integer, not {value!r}", line=line)


@dataclass
class Problem:
    """A parsed problem file."""

    kind: str
    builtin: Optional[str] = None
    cap: Optional[int] = None
    dims: dict[str, str] = field(default_factory=dict)
    equations: list[str] = field(default_factory=list)
    generators: list[str] = field(default_factory=list)
    lift: list[str] = field(default_factory=list)
    point: dict[str, str] = field(default_factory=dict)
    lines: dict[tuple[str, object], int] = field(
        default_factory=dict, compare=False, repr=False
    )

    def line_of(self, section: str, index) -> Optional[int]:
        return self.lines.get((section, index))

    def require(self, *keys: str):
        missing = [key for key in keys if key not in self.dims]
        if missing:
            raise ProblemParseError(
                f"a {self.kind} problem needs {', '.join(missing)} in [dims]"
            )

    def dim(self, key: str, default: Optional[int] = None) -> int:
        if key not in self.dims:
            if default is None:
                self.require(key)
            return default
        return _integer(self.dims[key], key, self.line_of("dims", key))

    def render(self) -> str:
        """The canonical text of this problem."""
        out = [f"kind = {self.kind}"]
        if self.builtin is not None:
            out.append(f"builtin = {self.builtin}")
        if self.cap is not None:
            out.append(f"cap = {self.cap}")
        if self.dims:
            out.append("")
            out.append("[dims]")
            out.extend(
                f"{key} = {self.dims[key]}" for key in DIMS_KEYS if key in self.dims
            )
        for section in LIST_SECTIONS:
            items = getattr(self, section)
            if items:
                out.append("")
                out.append(f"[{section}]")
                out.extend(items)
        if self.point:
            out.append("")
            out.append("[point]")
            out.extend(f"{name} = {value}" for name, value in self.point.items())
        return "\n".join(out) + "\n"

    # Builders for the analysis objects.

    def symbol_space(self) -> SymbolSpace:
        """g_k cut out of S^k V* (x) W by top-order equations."""
        self.require("base", "fibre", "order")
        system = self._system(self.dim("order"))
        k = system.order
        for index, equation in enumerate(system.equations):
            if equation_order(equation) != k or any(
                sum(alpha) != k for _, _, alpha in equation
            ):
                raise ProblemParseError(
                    f"symbol equations must involve only order-{k} coordinates",
                    line=self.line_of("equations", index),
                )
        return system.symbol(k)

    def pde_system(self) -> LinearPDESystem:
        self.require("base", "fibre")
        order = self.dim("order") if "order" in self.dims else None
        return self._system(order)

    def _system(self, order: Optional[int]) -> LinearPDESystem:
        base, fibre = _names(self.dims["base"]), _names(self.dims["fibre"])
        spec = JetSpec(base, fibre, order or 0)
        equations = []
        for index, text in enumerate(self.equations):
            spec = _spec_for(spec, text)
            try:
                equations.append(parse_equation(_as_expression(text), spec))
            except ProblemParseError as exc:
                raise ProblemParseError(
                    exc.detail, line=self.line_of("equations", index)
                )
        return LinearPDESystem.build(base, fibre, equations, order=order)

    def rule(self, seed: int = 0) -> ProlongationRule:
        if self.builtin == "zero":
            return zero_rule(self.dim("n"), self.dim("m", 1), self.dim("order", 1))
        if self.builtin is not None:
            return builtin_rule(self.builtin, self.dim("n"), seed=seed)
        self.require("base", "fibre", "order")
        base, fibre = _names(self.dims["base"]), _names(self.dims["fibre"])
        ring = poly_ring(base + fibre)
        coefficients = {}
        for index, text in enumerate(self.lift):
            line = self.line_of("lift", index)
            key, poly_text = _split_key_value(text, line)
            parts = _names(key)
            if len(parts) != 3:
                raise ProblemParseError(
                    f"lift entries read `fibre, base, beta = poly`, not {text!r}",
                    line=line,
                )
            fibre_name, base_name, beta_text = parts
            if fibre_name not in fibre or base_name not in base:
                raise ProblemParseError(
                    f"unknown fibre or base variable in {text!r}", line=line
                )
            if not beta_text.isdigit() or len(beta_text) != len(base):
                raise ProblemParseError(
                    f"beta must be {len(base)} digits, not {beta_text!r}", line=line
                )
            label = (
                fibre.index(fibre_name),
                base.index(base_name),
                tuple(int(digit) for digit in beta_text),
            )
            try:
                poly = parse_poly(poly_text, ring)
            except ProblemParseError as exc:
                raise ProblemParseError(exc.detail, line=line)
            coefficients[label] = coefficients.get(label, ring.zero) + poly
        tensor = self.dims.get("tensor")
        if tensor is not None and tensor not in TENSOR_TYPES:
            raise ProblemParseError(
                f"tensor must be one of {', '.join(TENSOR_TYPES)}, not {tensor!r}",
                line=self.line_of("dims", "tensor"),
            )
        return ProlongationRule(
            "custom",
            base,
            fibre,
            self.dim("order"),
            coefficients,
            tensor_type=tensor,
            seed=seed,
        )

    def pfaffian_system(self) -> PfaffianSystem:
        if self.builtin == "darboux":
            return darboux_model()
        if self.builtin == "contact":
            return contact_system(self.dim("order"))
        self.require("coordinates")
        names = _names(self.dims["coordinates"])
        forms = []
        for index, text in enumerate(self.generators):
            try:
                forms.append(PfaffianSystem.parse(names, [text]).generators[0])
            except ProblemParseError as exc:
                raise ProblemParseError(
                    exc.detail, line=self.line_of("generators", index)
                )
        return PfaffianSystem(poly_ring(names), tuple(forms), name="pfaff")

    def jet_point(self, template: JetSpec) -> Optional[JetPoint]:
        """The [point] section as a jet over `template`'s variables."""
        if not self.point:
            return None
        order = 0
        while len(template.with_order(order).names) < len(self.point):
            order += 1
        spec = template.with_order(order)
        if len(spec.names) != len(self.point):
            raise DimensionMismatch(
                f"{len(self.point)} point values do not form a jet over "
                f"{template.base}/{template.fibre}"
            )
        return JetPoint.from_mapping(spec, self.point)

    def ambient_point(self, names: tuple[str, ...]) -> Optional[tuple]:
        if not self.point:
            return None
        if set(self.point) != set(names):
            raise DimensionMismatch(
                f"the point assigns {sorted(self.point)}, expected {list(names)}"
            )
        return tuple(to_rational(self.point[name]) for name in names)


def _as_expression(text: str) -> str:
    if "=" in text:
        lhs, rhs = text.split("=", 1)
        return f"({lhs}) - ({rhs})"
    return text


def _spec_for(spec: JetSpec, text: str) -> JetSpec:
    """Grow `spec` until it names every jet coordinate mentioned in `text`."""
    highest = spec.order
    for fibre in spec.fibre:
        for match in re.finditer(rf"\b{re.escape(fibre)}_(\d+)\b", text):
            digits = match.group(1)
            if len(digits) == spec.n:
                highest = max(highest, sum(int(d) for d in digits))
    return spec.with_order(highest)


def _split_key_value(text: str, line: Optional[int]) -> tuple[str, str]:
    match = KEY_VALUE_RE.match(text)
    if match is None:
        raise ProblemParseError(f"expected `key = value`, not {text!r}", line=line)
    return match.group("key").strip(), match.group("value").strip()


def parse_problem(text: str) -> Problem:
    """Parse the text of a problem file."""
    header: dict[str, tuple[str, int]] = {}
    problem = Problem(kind="")
    section = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        heading = SECTION_RE.match(line)
        if heading is not None:
            section = heading.group("name")
            if section not in SECTIONS:
                raise ProblemParseError(f"unknown section [{section}]", line=number)
            continue
        if section in LIST_SECTIONS:
            items = getattr(problem, section)
            problem.lines[(section, len(items))] = number
            items.append(" ".join(line.split()))
            continue
        key, value = _split_key_value(line, number)
        if section is None:
            if key not in TOP_LEVEL_KEYS:
                raise ProblemParseError(f"unknown key {key!r}", line=number)
            if key in header:
                raise ProblemParseError(f"{key!r} given twice", line=number)
            header[key] = (value, number)
        elif section == "dims":
            if key not in DIMS_KEYS:
                raise ProblemParseError(f"unknown [dims] key {key!r}", line=number)
            if key in problem.dims:
                raise ProblemParseError(f"{key!r} given twice", line=number)
            if key in ("base", "fibre", "coordinates"):
                value = ", ".join(_names(value))
            problem.dims[key] = value
            problem.lines[("dims", key)] = number
        else:
            if key in problem.point:
                raise ProblemParseError(f"{key!r} given twice", line=number)
            try:
                problem.point[key] = format_rational(to_rational(value))
            except ProblemParseError as exc:
                raise ProblemParseError(exc.detail, line=number)
            problem.lines[("point", key)] = number

    if "kind" not in header:
        raise ProblemParseError("the problem does not declare its kind")
    kind, number = header["kind"]
    if kind not in KINDS:
        raise ProblemParseError(
            f"kind must be one of {', '.join(KINDS)}, not {kind!r}", line=number
        )
    problem.kind = kind
    if "cap" in header:
        value, number = header["cap"]
        problem.cap = _integer(value, "cap", number)
    if "builtin" in header:
        value, number = header["builtin"]
        allowed = {
            "rule": tuple(BUILTIN_RULES) + ("zero",),
            "pfaff": PFAFF_BUILTINS,
        }.get(kind, ())
        if value not in allowed:
            raise ProblemParseError(
                f"no built-in {kind} named {value!r}", line=number
            )
        problem.builtin = value
    logger.debug(
        "problem parsed",
        extra={"kind": problem.kind, "builtin": problem.builtin},
    )
    return problem


def load_problem(path: str | Path) -> Problem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProblemParseError(f"cannot read {path}: {exc.strerror}")
    return parse_problem(text)

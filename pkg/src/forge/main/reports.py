# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""Report assembly and rendering.

A report is a plain dict: `kind`, `input` (the canonical problem text),
`provenance` and `results`. Rationals are written as `p/q` strings so the
JSON form is exact and byte-stable.
"""

from __future__ import annotations

import json
from typing import Iterable

from forge.algebra.exactlin import format_rational
from forge.algebra.flags import DerivedFlag, FlagSample, GenericityScan
from forge.algebra.kuranishi import CompletionStep, KuranishiReport
from forge.algebra.medolaghi import BridgeReport, IsotropyProjection, MVBlocks
from forge.main.problems import Problem

TOOL = "forge"


def tool_version() -> str:
    try:
        from forge.version import version
    except ImportError:
        return "unknown"
    return version


def new_report(problem: Problem, cap: int, seed: int, results: dict) -> dict:
    return {
        "kind": problem.kind,
        "input": problem.render(),
        "provenance": {
            "tool": TOOL,
            "version": tool_version(),
            "cap": cap,
            "seed": seed,
        },
        "results": results,
    }


def rationals(values: Iterable) -> list[str]:
    return [format_rational(value) for value in values]


def step_row(step: CompletionStep) -> dict:
    return {
        "order": step.order,
        "dim_solutions": step.dim_solutions,
        "dim_next": step.dim_next,
        "dim_symbol": step.dim_symbol,
        "dim_projection": step.dim_projection,
        "surjective": step.surjective,
        "acyclic": step.acyclic,
        "rank_identity": step.rank_identity_holds,
        "new_equations": len(step.new_equations),
    }


def completion_results(report: KuranishiReport) -> dict:
    system = report.system
    return {
        "verdict": report.verdict.value,
        "stabilization_order": report.stabilization_order,
        "stable_dim": report.stable_dim,
        "new_equations_order": report.new_equations_order,
        "h_integrability": report.h_integrability,
        "system": {
            "order": system.order,
            "equations": system.render(),
        },
        "events": [
            {
                "checked_order": event.checked_order,
                "lowest_order": event.lowest_order,
                "equations": [system.render_equation(e) for e in event.equations],
            }
            for event in report.events
        ],
        "steps": [step_row(step) for step in report.steps],
    }


def blocks_results(blocks: MVBlocks) -> dict:
    return {
        "shape": list(blocks.full.shape),
        "ranks": blocks.ranks,
        "top_rows": len(blocks.top_rows),
        "bottom_rows": len(blocks.bottom_rows),
        "low_columns": len(blocks.low_columns),
        "high_columns": len(blocks.high_columns),
    }


def projection_results(projection: IsotropyProjection) -> dict:
    return {
        "dim_upper": projection.dim_upper,
        "dim_projection": projection.dim_projection,
        "dim_lower": projection.dim_lower,
        "surjective": projection.surjective,
    }


def bridge_results(bridge: BridgeReport) -> dict:
    return {
        "window": list(bridge.window),
        "offsets": list(bridge.offsets),
        "observed_offsets": list(bridge.observed_offsets),
        "rows": [
            {
                "order": row.order,
                "degree": row.degree,
                "tangent_vanishes": row.tangent_vanishes,
                "symbol_vanishes": {
                    str(offset): value for offset, value in row.symbol_vanishes.items()
                },
            }
            for row in bridge.rows
        ],
    }


def flag_results(flag: DerivedFlag) -> dict:
    return {"dims": list(flag.dims), "is_flag": flag.is_flag}


def sample_results(sample: FlagSample) -> dict:
    if sample.error is not None:
        return {"point": rationals(sample.point), "error": sample.error}
    return {
        "point": rationals(sample.point),
        "dims": list(sample.dims),
        "is_flag": sample.is_flag,
    }


def scan_results(scan: GenericityScan) -> dict:
    return {
        "agree": scan.agree,
        "samples": [sample_results(sample) for sample in scan.samples],
    }


def render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2)


def _scalar(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, list):
        return "[" + ", ".join(_scalar(item) for item in value) + "]"
    if isinstance(value, dict):
        return ", ".join(f"{key}={_scalar(item)}" for key, item in value.items())
    return str(value)


def _table(rows: list[dict], indent: str) -> list[str]:
    columns = list(dict.fromkeys(column for row in rows for column in row))
    cells = [[_scalar(row.get(column)) for column in columns] for row in rows]
    widths = [
        max(len(column), *(len(line[i]) for line in cells))
        for i, column in enumerate(columns)
    ]
    return [
        indent + "  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip()
        for line in [columns] + cells
    ]


def _section(results: dict, indent: str = "") -> list[str]:
    out = []
    for key, value in results.items():
        if isinstance(value, dict) and any(
            isinstance(item, (dict, list)) for item in value.values()
        ):
            out.append(f"{indent}{key}:")
            out.extend(_section(value, indent + "  "))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            out.append(f"{indent}{key}:")
            out.extend(_table(value, indent + "  "))
        elif isinstance(value, list) and value and isinstance(value[0], str):
            out.append(f"{indent}{key}:")
            out.extend(f"{indent}  {item}" for item in value)
        else:
            out.append(f"{indent}{key}: {_scalar(value)}")
    return out


def render_text(report: dict) -> str:
    """Plain-text rendering: the input, then results as nested lists and tables."""
    provenance = report["provenance"]
    out = [
        f"{provenance['tool']} {report['kind']} report "
        f"(version {provenance['version']}, cap {provenance['cap']}, "
        f"seed {provenance['seed']})",
        "",
        "input:",
    ]
    out.extend(f"  {line}" for line in report["input"].splitlines())
    out.append("")
    out.extend(_section(report["results"]))
    return "\n".join(out) + "\n"

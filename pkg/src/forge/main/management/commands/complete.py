from __future__ import annotations

import logging

from forge.algebra.kuranishi import complete
from forge.main.management.commands import AnalysisCommand
from forge.main.reports import completion_results

logger = logging.getLogger(__name__)


class Command(AnalysisCommand):
    help = "Prolong and project a linear system until it is formally integrable."
    kind = "pde"

    def analyse(self, problem, cap, seed, point, options):
        system = problem.pde_system()
        report = complete(system, cap)
        logger.info(
            "completion finished",
            extra={"verdict": report.verdict.value, "events": len(report.events)},
        )
        results = completion_results(report)
        results["dims"] = {"n": system.n, "m": system.m, "order": system.order}
        return results

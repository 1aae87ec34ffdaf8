from __future__ import annotations

import logging

from django.conf import settings

from forge.algebra.flags import genericity_scan, random_points, sample_flag
from forge.main.management.commands import AnalysisCommand
from forge.main.reports import sample_results, scan_results
from forge.main.support import InvalidProblem

logger = logging.getLogger(__name__)


class Command(AnalysisCommand):
    help = "Derived flag of a Pfaffian system at a point and at random points."
    kind = "pfaff"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--samples",
            type=int,
            default=None,
            help="Random points for the genericity scan, 0 to skip "
            "(default: FORGE_GENERIC_SAMPLES)",
        )

    def analyse(self, problem, cap, seed, point, options):
        system = problem.pfaffian_system()
        samples = options["samples"]
        if samples is None:
            samples = settings.FORGE_GENERIC_SAMPLES
        if samples < 0:
            raise InvalidProblem(f"--samples must not be negative, not {samples}")
        if point is None:
            point = problem.ambient_point(system.variables)
        if point is None and not samples:
            raise InvalidProblem("nothing to evaluate: give a point or --samples")

        results = {
            "variables": list(system.variables),
            "generators": system.render(),
        }
        verdict = None
        if point is not None:
            sample = sample_flag(system, point)
            results["point"] = sample_results(sample)
            verdict = sample.is_flag
        if samples:
            scan = genericity_scan(
                system, random_points(samples, len(system.variables), seed)
            )
            results["genericity"] = scan_results(scan)
            if verdict is None and scan.agree:
                verdict = scan.samples[0].is_flag
        results["is_flag"] = verdict
        return results

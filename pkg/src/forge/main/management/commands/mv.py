from __future__ import annotations

import logging
import math

from django.conf import settings

from forge.algebra.jetcalc import JetPoint
from forge.algebra.medolaghi import (
    degree_shift_bridge,
    homogeneity_test,
    isotropy_dim,
    isotropy_projection_oracle,
    mv_blocks,
    mv_test,
    orbit_tangent_dim,
)
from forge.main.management.commands import AnalysisCommand
from forge.main.reports import (
    blocks_results,
    bridge_results,
    projection_results,
)
from forge.main.support import InvalidProblem, OracleMismatch

logger = logging.getLogger(__name__)


class Command(AnalysisCommand):
    help = "Medolaghi-Vessiot rank test, isotropy and orbit data at a jet."
    kind = "rule"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--bridge",
            action="store_true",
            help="Compare tangent-kernel and symbol cohomology across degrees",
        )

    def analyse(self, problem, cap, seed, point, options):
        rule = problem.rule(seed=seed)
        template = rule.jet_spec(0)
        if point is not None:
            jet = JetPoint.from_flat(template, point)
        else:
            jet = problem.jet_point(template)
        if jet is None:
            raise InvalidProblem("mv needs a jet: give [point] or --point")

        blocks = mv_blocks(rule, jet)
        verdict = mv_test(rule, jet)
        projection = isotropy_projection_oracle(rule, jet)
        if verdict != projection.surjective:
            logger.error(
                "rank test disagrees with the isotropy projection",
                extra={
                    "rule": rule.name,
                    "rank_test": verdict,
                    **projection_results(projection),
                },
            )
            raise OracleMismatch(
                f"rank test says {verdict} but the isotropy projection is "
                f"{'' if projection.surjective else 'not '}surjective"
            )

        k = jet.order - 1
        lower = jet.truncate(k)
        orbit_dim = orbit_tangent_dim(rule, jet)
        upper_isotropy = isotropy_dim(rule, jet)
        results = {
            "rule": {
                "name": rule.name,
                "order": rule.order,
                "base": list(rule.base),
                "fibre": list(rule.fibre),
                "tensor": rule.tensor_type,
                "lift": rule.render_coefficients(),
            },
            "jet": {"order": jet.order, "values": jet.as_dict()},
            "blocks": blocks_results(blocks),
            "theta": verdict,
            "oracle": projection_results(projection),
            "isotropy": {
                "upper": upper_isotropy,
                "lower": isotropy_dim(rule, lower),
            },
            "orbit_tangent_dim": orbit_dim,
            "exact_sequence": orbit_dim + upper_isotropy
            == rule.n * math.comb(rule.n + rule.order + jet.order, rule.n),
            "homogeneous": homogeneity_test(
                rule, jet.taylor_section(), jet.base, k
            ),
        }
        if options["bridge"]:
            bridge = degree_shift_bridge(
                rule, jet, offsets=settings.FORGE_BRIDGE_OFFSETS
            )
            results["bridge"] = bridge_results(bridge)
        return results

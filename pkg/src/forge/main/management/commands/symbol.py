from __future__ import annotations

import logging

from django.conf import settings

from forge.algebra.spencer import (
    DeltaComplex,
    acyclicity_onset,
    cartan_characters,
    cohomology_table,
    finite_type_order,
    involutivity_onset,
    prolong_symbol_via_delta,
)
from forge.main.management.commands import AnalysisCommand
from forge.main.support import InvalidProblem, OracleMismatch

logger = logging.getLogger(__name__)


class Command(AnalysisCommand):
    help = "Spencer cohomology, Cartan characters and onsets of a symbol."
    kind = "symbol"

    def analyse(self, problem, cap, seed, point, options):
        g = problem.symbol_space()
        if cap < g.k:
            raise InvalidProblem(f"cap {cap} is below the symbol order {g.k}")
        draws = settings.FORGE_CHARACTER_DRAWS
        family = DeltaComplex.from_seed(g)
        orders = range(g.k, cap + 1)

        prolongation = family.symbol(g.k + 1)
        if prolong_symbol_via_delta(g).space != prolongation.space:
            logger.error(
                "prolongation disagrees with its δ characterization",
                extra={"order": g.k, "dim": prolongation.dim},
            )
            raise OracleMismatch("the two prolongation computations disagree")

        characters = cartan_characters(g, seed=seed, draws=draws)
        table = cohomology_table(family, orders, range(g.n + 1))
        return {
            "dims": {
                "n": g.n,
                "m": g.m,
                "order": g.k,
                "dim": g.dim,
                "ambient_dim": g.ambient_dim,
            },
            "prolongations": [
                {"order": k, "dim": family.symbol(k).dim} for k in orders
            ],
            "cohomology": {
                str(k): {str(q): value for q, value in row.items()}
                for k, row in table.items()
            },
            "characters": characters.as_list(),
            "prolongation_dim": prolongation.dim,
            "involutive": prolongation.dim == characters.weighted_sum,
            "eta_2": acyclicity_onset(family, 2, cap),
            "eta_infinity": involutivity_onset(family, cap, seed=seed, draws=draws),
            "finite_type_order": finite_type_order(family, cap),
        }

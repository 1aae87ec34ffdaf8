from __future__ import annotations

import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from forge.algebra.exactlin import Rational, to_rational
from forge.main.problems import Problem, load_problem
from forge.main.reports import new_report, render_json, render_text
from forge.main.support import ForgeException, InvalidProblem, ProblemParseError

logger = logging.getLogger(__name__)


def parse_point(text: str) -> tuple[Rational, ...]:
    """Comma-separated rationals, e.g. `0,1,-1/2`."""
    values = [value.strip() for value in text.split(",")]
    if not all(values):
        raise ProblemParseError(f"--point expects comma-separated rationals: {text!r}")
    return tuple(to_rational(value) for value in values)


class AnalysisCommand(BaseCommand):
    """Base for commands that read one problem file and print one report.

    Subclasses set `kind` and implement `analyse`, which returns the
    `results` block of the report. Errors raised by the analysis become a
    `CommandError` carrying the error's exit code.
    """

    kind: str = ""

    def add_arguments(self, parser):
        parser.add_argument("file", help="Problem file to analyse")
        parser.add_argument(
            "--json",
            action="store_true",
            help="Write the report as JSON instead of text",
        )
        parser.add_argument(
            "--cap",
            type=int,
            default=None,
            help="Highest order to examine (default: the file's cap, then "
            "FORGE_DEFAULT_CAP)",
        )
        parser.add_argument(
            "--seed",
            type=int,
            default=None,
            help="Seed for random flags and sample points (default: "
            "FORGE_DEFAULT_SEED)",
        )
        parser.add_argument(
            "--point",
            default=None,
            help="Comma-separated rational coordinates, overriding [point]",
        )

    def handle(self, *args, **options):
        try:
            report = self.start(**options)
        except ForgeException as exc:
            logger.warning(
                "analysis failed",
                extra={
                    "command": self.kind,
                    "file": options["file"],
                    **exc.json_detail,
                },
            )
            raise CommandError(f"{exc.title}: {exc.detail}", returncode=exc.exit_code)
        if options["json"]:
            self.stdout.write(render_json(report))
        else:
            self.stdout.write(render_text(report), ending="")

    def start(self, **options) -> dict:
        """Load the problem, run the analysis and assemble the report."""
        problem = load_problem(options["file"])
        if problem.kind != self.kind:
            raise InvalidProblem(
                f"{options['file']} describes a {problem.kind} problem, "
                f"not a {self.kind} problem"
            )
        cap = options["cap"]
        if cap is None:
            cap = problem.cap if problem.cap is not None else settings.FORGE_DEFAULT_CAP
        if cap < 0:
            raise InvalidProblem(f"cap must not be negative, not {cap}")
        seed = options["seed"]
        if seed is None:
            seed = settings.FORGE_DEFAULT_SEED
        point = parse_point(options["point"]) if options["point"] else None
        logger.info(
            "analysis started",
            extra={"command": self.kind, "file": options["file"], "cap": cap},
        )
        results = self.analyse(problem, cap, seed, point, options)
        return new_report(problem, cap, seed, results)

    def analyse(
        self,
        problem: Problem,
        cap: int,
        seed: int,
        point: tuple[Rational, ...] | None,
        options: dict,
    ) -> dict:
        raise NotImplementedError()

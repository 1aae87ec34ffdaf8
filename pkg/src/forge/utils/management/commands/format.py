import subprocess

from django.conf import settings
from django.core.management.base import BaseCommand


class Command(BaseCommand):
    help = "Run ruff and black over forge's packages"

    def add_arguments(self, parser):
        parser.add_argument(
            "--check",
            action="store_true",
            help="Report problems without rewriting files",
        )

    def handle(self, *args, **options):
        paths = tuple(settings.LINT_PATHS)
        ruff = ("ruff", "check") if options["check"] else ("ruff", "check", "--fix")
        for lint_path in paths:
            subprocess.call(ruff + (lint_path,))

        black = ("black", "--check") if options["check"] else ("black",)
        subprocess.call(black + paths)

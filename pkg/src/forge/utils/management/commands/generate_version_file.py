from django.conf import settings
from django.core.management.base import BaseCommand
from setuptools_scm import get_version

ROOT_DIR = settings.BASE_DIR.parent.parent


class Command(BaseCommand):
    help = "Write forge/version.py from the source control metadata."

    def handle(self, *args, **options):
        version = get_version(
            root=str(ROOT_DIR),
            write_to="src/forge/version.py",
            fallback_version="0.1.0",
        )
        self.stdout.write(f"forge {version}")

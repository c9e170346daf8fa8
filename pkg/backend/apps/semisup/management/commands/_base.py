from django.core.management.base import BaseCommand, CommandError

from apps.common.correlation import run_correlation
from apps.common.errors import SemiSupError


class SemiSupCommand(BaseCommand):
    """
    Base for the semisup commands.

    Subclasses implement run(**options). Domain errors leave the process with
    the exit code of their message code: 2 configuration, 3 data, 4 invariant.
    """

    def handle(self, *args, **options):
        try:
            with run_correlation():
                return self.run(**options)
        except SemiSupError as err:
            raise CommandError(str(err), returncode=err.exit_code) from err

    def run(self, **options):
        raise NotImplementedError

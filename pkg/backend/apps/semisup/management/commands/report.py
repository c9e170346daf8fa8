from apps.semisup.services import build_report, format_report

from ._base import SemiSupCommand


class Command(SemiSupCommand):
    help = "Print the final-epoch diagnostics of a run directory"

    def add_arguments(self, parser):
        parser.add_argument("run_dir")

    def run(self, **options):
        self.stdout.write(format_report(build_report(options["run_dir"])), ending="")

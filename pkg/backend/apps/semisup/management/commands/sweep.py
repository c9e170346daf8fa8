from django.conf import settings

from apps.common.errors import parse_positive_int
from apps.semisup.services import run_sweep

from ._base import SemiSupCommand


class Command(SemiSupCommand):
    help = "Run every (axes x seeds) cell of a grid file and aggregate over seeds"

    def add_arguments(self, parser):
        parser.add_argument("grid", help="Grid INI file; comma lists are axes, 'seeds' lists training seeds")
        parser.add_argument("--out", help="Sweep directory (default: <output root>/sweeps/<grid name>)")
        parser.add_argument("--jobs", default=None, help="Local worker processes")

    def run(self, **options):
        jobs = options["jobs"]
        jobs = parse_positive_int(jobs, "jobs") if jobs is not None else settings.SEMISUP_SWEEP_JOBS
        result = run_sweep(options["grid"], options["out"], jobs=jobs)
        self.stdout.write(result.aggregate.to_string(index=False))
        self.stdout.write(self.style.SUCCESS(
            f"{len(result.runs)} runs, {len(result.aggregate)} aggregate rows -> {result.aggregate_path}"
        ))

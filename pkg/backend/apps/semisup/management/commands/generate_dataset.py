from apps.semisup import constants, data_synth
from apps.semisup.services import generate_dataset, output_root

from ._base import SemiSupCommand


class Command(SemiSupCommand):
    help = "Generate a synthetic imbalanced dataset and write it as CSV"

    def add_arguments(self, parser):
        parser.add_argument("--spec", help="Dataset spec INI file (default: the shipped 8-class benchmark)")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--labeled-fraction", type=float, default=constants.DEFAULT_LABELED_FRACTION)
        parser.add_argument("--out", help="Output CSV path")
        parser.add_argument("--print-spec", action="store_true", help="Print the spec and exit")

    def run(self, **options):
        spec = data_synth.load_spec(options["spec"]) if options["spec"] else data_synth.default_spec()
        if options["print_spec"]:
            self.stdout.write(data_synth.dump_spec(spec), ending="")
            return
        out = options["out"] or output_root() / f"dataset-seed{options['seed']}.csv"
        path, population, splits = generate_dataset(spec, options["seed"], options["labeled_fraction"], out)
        self.stdout.write(self.style.SUCCESS(
            f"Wrote {population.labels.shape[0]} rows to {path} "
            f"({len(splits.labeled)} labeled, {len(splits.unlabeled)} unlabeled, {len(splits.test)} test)"
        ))

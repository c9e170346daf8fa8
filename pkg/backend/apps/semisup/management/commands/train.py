from apps.common.errors import ConfigurationError
from apps.common.errors.constants import ERROR_INVALID_ARGUMENT
from apps.semisup import constants
from apps.semisup.config import apply_overrides, dump_trainer_config, load_trainer_config
from apps.semisup.services import run_training

from ._base import SemiSupCommand


OVERRIDES = (
    # (flag, config key, argparse type)
    ("--method", "method", str),
    ("--seed", "seed", int),
    ("--tau", "tau", float),
    ("--mapping", "mapping", str),
    ("--epochs", "epochs", int),
    ("--resample-period", "resample_period", int),
    ("--resample-labeled", "resample_labeled", str),
    ("--resample-unlabeled", "resample_unlabeled", str),
    ("--batch-size", "batch_size", int),
    ("--mu", "mu", int),
    ("--hidden", "hidden", int),
    ("--lambda-u", "lambda_u", float),
)


class Command(SemiSupCommand):
    help = "Train one method variant on a dataset CSV"

    def add_arguments(self, parser):
        parser.add_argument("--config", help="Trainer config INI file")
        parser.add_argument("--dataset", help="Dataset CSV written by generate_dataset")
        parser.add_argument("--out", help="Run directory (default: <output root>/<method>-seed<seed>)")
        for flag, key, kind in OVERRIDES:
            parser.add_argument(flag, dest=key, type=kind, default=None)
        parser.add_argument("--stop-after", type=int, default=None,
                            help="Stop once this many epochs are complete, leaving a checkpoint")
        parser.add_argument("--resume", help="Checkpoint to continue from")
        parser.add_argument("--print-config", action="store_true",
                            help="Print every config key with its effective value and exit")

    def run(self, **options):
        config = apply_overrides(
            load_trainer_config(options["config"]),
            {key: options[key] for _, key, _ in OVERRIDES},
        )
        if options["print_config"]:
            self.stdout.write(dump_trainer_config(config), ending="")
            return
        if not options["dataset"]:
            raise ConfigurationError(ERROR_INVALID_ARGUMENT, "--dataset is required")

        result = run_training(
            config,
            options["dataset"],
            options["out"],
            stop_after=options["stop_after"],
            resume=options["resume"],
        )
        if not result.finished:
            self.stdout.write(
                f"Stopped after epoch {result.manifest.epochs_completed}; "
                f"resume with --resume {result.run_dir / constants.CHECKPOINT_FILENAME}"
            )
            return
        summary = result.summary
        self.stdout.write(self.style.SUCCESS(
            f"{summary['method']} seed={summary['seed']}: overall_acc={summary['overall_acc']:.4f} "
            f"mean_acc={summary['mean_acc']:.4f} -> {result.run_dir}"
        ))

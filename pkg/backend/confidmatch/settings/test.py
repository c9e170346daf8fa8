from .base import *


SEMISUP_OUTPUT_ROOT = base_dir_join("runs", "test")

# Directional benchmark runs take minutes; opt in with SEMISUP_RUN_ACCEPTANCE=True.
SEMISUP_RUN_ACCEPTANCE = config("SEMISUP_RUN_ACCEPTANCE", default=False, cast=bool)
TEST_RUNNER = "apps.common.testutils.runner.SemiSupTestRunner"

LOGGING["handlers"]["console"]["level"] = "WARNING"

# Celery
CELERY_BROKER_URL = ""
CELERY_TASK_ALWAYS_EAGER = True
CELERY_TASK_EAGER_PROPAGATES = True

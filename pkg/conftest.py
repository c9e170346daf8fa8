import os
import sys
from pathlib import Path

import django


# Mirror `backend/manage.py test`: import from backend/ with the test settings.
sys.path.insert(0, str(Path(__file__).resolve().parent / "backend"))
os.environ["DJANGO_SETTINGS_MODULE"] = "confidmatch.settings.test"
django.setup()

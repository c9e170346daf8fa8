from django.conf import settings
from django.test.runner import DiscoverRunner


class SemiSupTestRunner(DiscoverRunner):
    """Excludes the `acceptance` tag unless SEMISUP_RUN_ACCEPTANCE is set."""

    def __init__(self, *args, exclude_tags=None, **kwargs):
        exclude_tags = set(exclude_tags or ())
        if not getattr(settings, "SEMISUP_RUN_ACCEPTANCE", False):
            exclude_tags.add("acceptance")
        super().__init__(*args, exclude_tags=exclude_tags, **kwargs)

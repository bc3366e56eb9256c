from typing import Hashable

from data.models import BoundReport


class Cache:
    """In-memory cache for evaluated bound reports."""

    def __init__(self):
        self._bound_reports: dict[Hashable, dict] = {}

    def get_bound_report(self, key: Hashable) -> BoundReport | None:
        """Get a cached bound report if available."""
        if cached := self._bound_reports.get(key):
            # Hand out a fresh object so callers never share mutable state
            return BoundReport(**cached)
        return None

    def set_bound_report(self, key: Hashable, report: BoundReport):
        """Store a bound report as a plain dict."""
        self._bound_reports[key] = report.model_dump()

    def clear(self):
        self._bound_reports.clear()

    def __len__(self) -> int:
        return len(self._bound_reports)


# Global cache instance
_cache = Cache()


def get_cache() -> Cache:
    """Get the global cache instance."""
    return _cache

##############################################################################
#
# Name: metadata.py
#
# Function:
#       Distribution metadata lookups (project URLs, package name)
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

from functools import lru_cache
from importlib import metadata

DISTRIBUTION_NAME = "class-unlearning-lab"


@lru_cache(maxsize=1)
def get_project_urls() -> dict[str, str]:
    """Return the ``Project-URL`` entries of the installed distribution.

    Returns:
        Mapping of URL label to URL. Empty when the package is not installed
        (running from a source checkout).
    """
    try:
        meta = metadata.metadata(DISTRIBUTION_NAME)
    except metadata.PackageNotFoundError:
        return {}

    urls: dict[str, str] = {}
    for entry in meta.get_all("Project-URL") or []:
        label, sep, url = entry.partition(", ")
        if sep:
            urls[label] = url
    return urls


def get_homepage_url() -> str:
    """Return the project homepage URL, or an empty string."""
    return get_project_urls().get("Homepage", "")


def get_issues_url() -> str:
    """Return the issue tracker URL, or an empty string."""
    return get_project_urls().get("Issues", "")

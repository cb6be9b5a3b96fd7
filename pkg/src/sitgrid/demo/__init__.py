"""Bundled AGV warehouse demo dataset.

Four binary axes (door, obstacle, human, other AGV), a synthetic
observation log whose relative frequencies reproduce the published
transition figures for the all-clear situation, and a non-normative
requirements file. The four door-and-obstacle combinations (YYNN, YYNY,
YYYN, YYYY) never occur in the log, so the covered grid has 12 of the 16
situations.
"""

from __future__ import annotations

from importlib import resources


def _path(name: str):
    return resources.files(__package__).joinpath(name)


def axes_path():
    return _path("axes.json")


def log_path():
    return _path("warehouse.csv")


def requirements_path():
    return _path("requirements.json")

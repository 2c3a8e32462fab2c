from __future__ import annotations

import pathlib

import pytest

from gridforge import assets

# Bundled level strings, frozen for exact comparisons.
SOKOBAN_LEVEL_1 = "\n".join(
    [
        "wwwwwww",
        "w..hA.w",
        "w.whw.w",
        "w...b.w",
        "whbb.ww",
        "w..wwww",
        "wwwwwww",
    ]
)

SOKOBAN_LEVEL_2 = "\n".join(
    [
        "wwwwwwwww",
        "ww.h....w",
        "ww...bA.w",
        "w....w..w",
        "wwwbw...w",
        "www...w.w",
        "wwwh....w",
        "wwwwwwwww",
    ]
)


def asset_path(name: str) -> str:
    return str(pathlib.Path(assets.__file__).parent / f"{name}.gdy")


@pytest.fixture(scope="session")
def sokoban():
    return assets.load("sokoban")


@pytest.fixture(scope="session")
def escape_room():
    return assets.load("escape_room")

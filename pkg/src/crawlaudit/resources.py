"""Access to data files shipped with the package."""

from __future__ import annotations

from importlib import resources


def data_text(*parts: str) -> str:
    """Return the text of a file under crawlaudit/data/."""
    node = resources.files("crawlaudit").joinpath("data")
    for part in parts:
        node = node.joinpath(part)
    return node.read_text(encoding="utf-8")


def data_lines(*parts: str) -> list[str]:
    """Non-empty, non-comment lines of a shipped data file."""
    out = []
    for line in data_text(*parts).splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out

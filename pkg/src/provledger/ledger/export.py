"""Chain files: JSON Lines, one block per line, hashes hex-encoded."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from ..hashing import canonical_json
from .chain import Block


def dumps_chain(blocks: Iterable[Block]) -> str:
    return "".join(canonical_json(b.to_dict()).decode("ascii") + "\n" for b in blocks)


def loads_chain(text: str) -> list[Block]:
    blocks = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            blocks.append(Block.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"chain file line {lineno}: {exc}") from exc
    return blocks


def export_chain(blocks: Iterable[Block], path: str | Path) -> None:
    Path(path).write_text(dumps_chain(blocks), encoding="ascii")


def import_chain(path: str | Path) -> list[Block]:
    return loads_chain(Path(path).read_text(encoding="ascii"))

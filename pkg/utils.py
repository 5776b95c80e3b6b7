"""Environment settings, hashing and the bounded worker pool."""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Iterable, TypeVar

from exceptions import InvalidInputError

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "STICKYDISCS_THREADS"


def ensure_thread_count() -> int:
    raw = os.getenv(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        count = int(raw)
    except ValueError as exc:
        raise InvalidInputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if count < 1:
        raise InvalidInputError(f"{THREADS_ENV} must be positive, got {count}")
    return count


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Apply `fn` to every item, in order, on at most STICKYDISCS_THREADS threads."""
    items = list(items)
    workers = min(ensure_thread_count(), max(len(items), 1))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def canonical_json(document: Any) -> str:
    return json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def config_hash(document: Any) -> str:
    return hashlib.sha256(canonical_json(document).encode("utf-8")).hexdigest()


def library_versions() -> dict[str, str]:
    import networkx
    import numpy
    import pandas
    import scipy
    import shapely

    return {
        "networkx": networkx.__version__,
        "numpy": numpy.__version__,
        "pandas": pandas.__version__,
        "scipy": scipy.__version__,
        "shapely": shapely.__version__,
    }


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as handle:
            for block in iter(lambda: handle.read(1 << 16), b""):
                digest.update(block)
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    return digest.hexdigest()

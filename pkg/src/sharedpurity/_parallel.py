"""Order-preserving map over worker processes."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def pmap(func, items, jobs: int = 1, chunksize: int | None = None) -> list:
    items = list(items)
    if jobs is None or jobs <= 1 or len(items) < 2:
        return [func(x) for x in items]
    if chunksize is None:
        chunksize = max(1, len(items) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(func, items, chunksize=chunksize))

"""Small shared helpers: stable number formatting, atomic writes, worker pools."""

from __future__ import annotations

import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

THREADS_ENV = "STELLAR_THREADS"


def fmt17(x: float) -> str:
    """Format a float with 17 significant digits (round-trips doubles exactly)."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def dumps_stable(obj, indent: int = 0) -> str:
    """Serialize to JSON with fixed float formatting and dict insertion order.

    `json.dumps` leaves float formatting to `repr`; output files must be
    byte-stable under a fixed config, so numbers are pinned to 17 significant
    digits here instead.
    """
    pad = " " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt17(obj)
    if isinstance(obj, complex):
        return f"[{fmt17(obj.real)}, {fmt17(obj.imag)}]"
    if isinstance(obj, str):
        out = obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        return f'"{out}"'
    if isinstance(obj, dict):
        items = [f'{pad}  "{k}": {dumps_stable(v, indent + 2).lstrip()}' for k, v in obj.items()]
        if not items:
            return "{}"
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        parts = [dumps_stable(v, indent + 2) for v in obj]
        if all("\n" not in p for p in parts) and sum(len(p) for p in parts) < 80:
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(pad + "  " + p for p in parts) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def complex_pair(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def parse_complex(value) -> complex:
    """Accept [re, im] pairs or bare numbers from JSON input."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex value must be a [re, im] pair, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(float(value), 0.0)


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file and rename, so failures never leave partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=".part")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit argument, else STELLAR_THREADS, else 1."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return 1


def ordered_map(fn: Callable, items: Sequence, threads: int | None = None) -> list:
    """Apply `fn` to items, possibly in parallel, returning results in input order.

    Each item is processed independently; the gather is by index, so the result
    is identical for any worker count.
    """
    workers = resolve_threads(threads)
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))

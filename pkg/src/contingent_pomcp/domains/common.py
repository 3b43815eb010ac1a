"""Shared helpers for the benchmark generators."""
from __future__ import annotations


class UnsupportedSize(ValueError):
    pass


def check_size(family: str, size: int, lo: int, hi: int) -> None:
    if not (lo <= size <= hi):
        raise UnsupportedSize(f"{family} size {size} outside supported range {lo}..{hi}")


def cell(x: int, y: int) -> str:
    return f"c{x}-{y}"


def fmt_prob(p: float) -> str:
    return repr(float(p))


def geometric(n: int, ratio: float) -> list[float]:
    w = [ratio ** i for i in range(n)]
    total = sum(w)
    out = [v / total for v in w]
    # push rounding error into the largest weight so the sum is exact enough
    out[0] += 1.0 - sum(out)
    return out


def atom(*parts: str) -> str:
    return "(" + " ".join(parts) + ")"


def conj(items) -> str:
    items = list(items)
    if len(items) == 1:
        return items[0]
    return "(and " + " ".join(items) + ")"


def probabilistic(options) -> str:
    """options: list of (probability, formula text)."""
    return "(probabilistic " + " ".join(f"{fmt_prob(p)} {f}" for p, f in options) + ")"

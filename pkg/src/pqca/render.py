"""Text snapshots of superpositions."""
from __future__ import annotations

from dataclasses import dataclass

from .lattice import Superposition, format_grid, support_bounds


@dataclass(frozen=True)
class RenderFrame:
    time: int
    term: int
    amplitude: complex
    grid: str

    def __str__(self):
        a = self.amplitude
        return f"t={self.time} term={self.term} amp={a.real:.4f}{a.imag:+.4f}j\n{self.grid}"


def window(states) -> tuple[int, int, int, int]:
    """Smallest box holding the support of every term of every state."""
    if isinstance(states, Superposition):
        states = [states]
    boxes = [b for s in states for b in (support_bounds(c) for c, _ in s.items()) if b is not None]
    if not boxes:
        return 0, 0, 0, 0
    return (min(b[0] for b in boxes), max(b[1] for b in boxes),
            min(b[2] for b in boxes), max(b[3] for b in boxes))


def render(s: Superposition, mode: str = "dominant", time: int = 0, term: int | None = None,
           box=None) -> list[RenderFrame]:
    """``dominant``: the largest-amplitude term; ``terms``: every term in order.

    ``term`` picks a single term by its index in canonical order.  All
    frames share one window so they line up.
    """
    box = box or window(s)
    items = s.items()
    if not items:
        return []
    if term is not None:
        if not 0 <= term < len(items):
            raise IndexError(f"term {term} out of range (state has {len(items)} terms)")
        chosen = [term]
    elif mode == "dominant":
        # ties go to the first term in canonical order
        best = max(range(len(items)), key=lambda i: (abs(items[i][1]), -i))
        chosen = [best]
    elif mode == "terms":
        chosen = list(range(len(items)))
    else:
        raise ValueError(f"unknown render mode {mode!r}")
    return [RenderFrame(time, i, items[i][1], format_grid(items[i][0], box)) for i in chosen]

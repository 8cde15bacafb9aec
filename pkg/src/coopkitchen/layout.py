"""Kitchen layout parsing, validation, and ASCII rendering.

A layout is a rectangular grid over the cell alphabet::

    E / blank  empty floor (the only walkable cells)
    X          counter
    O          onion dispenser
    P          pot
    D          dish dispenser
    S          serving location

plus two player start markers: an arrow giving the initial orientation
followed by the player index, e.g. ``^0`` or the literal arrows ``<I>0``.
Layout files are UTF-8 text with optional ``#``-prefixed comment lines.

Three interchangeable grid notations are accepted:

* stride form — the expanded visual format: each column occupies 8
  characters (cell content left-justified, 7 spaces between single-char
  columns); blank slots are empty cells.  This is what :func:`render_layout`
  emits, so rendered output parses back.
* token form — cells separated by single spaces, empties written ``E``.
* compact form — no whitespace, one character per cell (arrow markers
  consume the following digit).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, NamedTuple

EMPTY = "empty"
COUNTER = "counter"
ONION_DISPENSER = "onion_dispenser"
DISH_DISPENSER = "dish_dispenser"
POT = "pot"
SERVING = "serving"

CELL_KINDS = (EMPTY, COUNTER, ONION_DISPENSER, DISH_DISPENSER, POT, SERVING)

_SYMBOL_TO_KIND = {
    "E": EMPTY,
    "X": COUNTER,
    "O": ONION_DISPENSER,
    "P": POT,
    "D": DISH_DISPENSER,
    "S": SERVING,
}
_KIND_TO_SYMBOL = {
    EMPTY: "E",
    COUNTER: "X",
    ONION_DISPENSER: "O",
    POT: "P",
    DISH_DISPENSER: "D",
    SERVING: "S",
}

ARROW_TO_FACING = {
    "↑": "N", "↓": "S", "←": "W", "→": "E",
    "^": "N", "v": "S", "<": "W", ">": "E",
}
FACING_TO_ARROW = {"N": "↑", "S": "↓", "W": "←", "E": "→"}

STRIDE = 8  # canonical expanded format: cell content + padding to 8 chars


class Position(NamedTuple):
    """Grid coordinate, column first: rendered in language as ``(x, y)``."""

    x: int
    y: int


class PlayerStart(NamedTuple):
    pos: Position
    facing: str


class LayoutError(ValueError):
    """Base class for layout parse/validation failures."""


class NonRectangularError(LayoutError):
    pass


class UnknownSymbolError(LayoutError):
    def __init__(self, char: str, row: int, col: int):
        super().__init__(f"unknown symbol {char!r} at row {row}, col {col}")
        self.char, self.row, self.col = char, row, col


class MissingPlayerError(LayoutError):
    def __init__(self, index: int):
        super().__init__(f"missing start marker for player {index}")
        self.index = index


class DuplicatePlayerError(LayoutError):
    def __init__(self, index: int):
        super().__init__(f"duplicate start marker for player {index}")
        self.index = index


class UnreachableFeatureError(LayoutError):
    def __init__(self, kind: str):
        super().__init__(f"no {kind} is reachable from either player start")
        self.kind = kind


@dataclass(frozen=True)
class GridLayout:
    """Immutable kitchen map. Safe to share across threads."""

    name: str
    width: int
    height: int
    cells: tuple[str, ...]  # row-major cell kinds
    starts: tuple[PlayerStart, ...]
    onion_dispensers: tuple[Position, ...] = field(default=())
    dish_dispensers: tuple[Position, ...] = field(default=())
    pots: tuple[Position, ...] = field(default=())
    serving_locs: tuple[Position, ...] = field(default=())
    counters: tuple[Position, ...] = field(default=())

    @classmethod
    def from_cells(
        cls,
        name: str,
        width: int,
        height: int,
        cells: Iterable[str],
        starts: Iterable[PlayerStart] = (),
    ) -> "GridLayout":
        cells = tuple(cells)
        if len(cells) != width * height:
            raise LayoutError(f"expected {width * height} cells, got {len(cells)}")
        by_kind: dict[str, list[Position]] = {k: [] for k in CELL_KINDS}
        for i, kind in enumerate(cells):
            by_kind[kind].append(Position(i % width, i // width))
        return cls(
            name=name,
            width=width,
            height=height,
            cells=cells,
            starts=tuple(starts),
            onion_dispensers=tuple(by_kind[ONION_DISPENSER]),
            dish_dispensers=tuple(by_kind[DISH_DISPENSER]),
            pots=tuple(by_kind[POT]),
            serving_locs=tuple(by_kind[SERVING]),
            counters=tuple(by_kind[COUNTER]),
        )

    def in_bounds(self, pos: Position) -> bool:
        return 0 <= pos.x < self.width and 0 <= pos.y < self.height

    def cell_at(self, pos: Position) -> str:
        if not self.in_bounds(pos):
            raise LayoutError(f"position {pos} outside {self.width}x{self.height} grid")
        return self.cells[pos.y * self.width + pos.x]

    def is_walkable(self, pos: Position) -> bool:
        return self.in_bounds(pos) and self.cell_at(pos) == EMPTY

    def walkable_neighbors(self, pos: Position) -> tuple[Position, ...]:
        out = []
        for dx, dy in ((0, -1), (0, 1), (-1, 0), (1, 0)):
            n = Position(pos.x + dx, pos.y + dy)
            if self.is_walkable(n):
                out.append(n)
        return tuple(out)

    def features(self, kind: str) -> tuple[Position, ...]:
        return {
            ONION_DISPENSER: self.onion_dispensers,
            DISH_DISPENSER: self.dish_dispensers,
            POT: self.pots,
            SERVING: self.serving_locs,
            COUNTER: self.counters,
        }[kind]


@lru_cache(maxsize=256)
def reachable_cells(layout: GridLayout, start: Position) -> frozenset[Position]:
    """Flood fill over walkable cells from ``start`` (inclusive)."""
    if not layout.is_walkable(start):
        return frozenset()
    seen = {start}
    frontier = [start]
    while frontier:
        pos = frontier.pop()
        for n in layout.walkable_neighbors(pos):
            if n not in seen:
                seen.add(n)
                frontier.append(n)
    return frozenset(seen)


def reachable_union(layout: GridLayout) -> frozenset[Position]:
    cells: frozenset[Position] = frozenset()
    for start in layout.starts:
        cells |= reachable_cells(layout, start.pos)
    return cells


def feature_reachable(layout: GridLayout, pos: Position, region: frozenset[Position]) -> bool:
    """A feature cell counts as reachable when some walkable neighbor is in region."""
    return any(n in region for n in layout.walkable_neighbors(pos))


# ---------------------------------------------------------------------------
# Parsing


def _strip_comments(text: str) -> list[str]:
    lines = []
    for line in text.splitlines():
        if line.lstrip().startswith("#"):
            continue
        lines.append(line.rstrip())
    while lines and not lines[0].strip():
        lines.pop(0)
    while lines and not lines[-1].strip():
        lines.pop()
    return [l for l in lines if l.strip()]


def _parse_token(token: str, row: int, col: int) -> tuple[str, tuple[int, str] | None]:
    """One cell token -> (cell kind, optional (player index, facing))."""
    if token == "":
        return EMPTY, None
    first = token[0]
    if first in ARROW_TO_FACING:
        if len(token) < 2 or not token[1].isdigit():
            raise UnknownSymbolError(token, row, col)
        # trailing held-object tags (o, d, {ooo) are display-only; ignore them
        return EMPTY, (int(token[1]), ARROW_TO_FACING[first])
    if first in _SYMBOL_TO_KIND:
        # pot/counter content tags ("P{oo", "Xo") are display-only
        return _SYMBOL_TO_KIND[first], None
    raise UnknownSymbolError(first, row, col)


def _tokenize(lines: list[str]) -> list[list[str]]:
    stride_mode = any("  " in line for line in lines)
    token_mode = any(" " in line for line in lines)
    rows: list[list[str]] = []
    if stride_mode:
        for line in lines:
            n = (len(line) + STRIDE - 1) // STRIDE
            rows.append([line[i * STRIDE:(i + 1) * STRIDE].strip() for i in range(n)])
    elif token_mode:
        for line in lines:
            rows.append(line.split())
    else:
        for line in lines:
            row: list[str] = []
            i = 0
            while i < len(line):
                ch = line[i]
                if ch in ARROW_TO_FACING and i + 1 < len(line) and line[i + 1].isdigit():
                    row.append(ch + line[i + 1])
                    i += 2
                else:
                    row.append(ch)
                    i += 1
            rows.append(row)
    return rows


def parse_layout(text: str, name: str = "layout") -> GridLayout:
    """Parse and validate a layout source block.

    Raises :class:`NonRectangularError`, :class:`UnknownSymbolError`,
    :class:`MissingPlayerError`, :class:`DuplicatePlayerError`, or
    :class:`UnreachableFeatureError`.
    """
    lines = _strip_comments(text)
    if not lines:
        raise LayoutError("empty layout source")
    rows = _tokenize(lines)
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise NonRectangularError(
            f"rows have unequal widths: {sorted({len(r) for r in rows})}"
        )
    height = len(rows)

    cells: list[str] = []
    markers: dict[int, PlayerStart] = {}
    for y, row in enumerate(rows):
        for x, token in enumerate(row):
            kind, marker = _parse_token(token, y, x)
            cells.append(kind)
            if marker is not None:
                index, facing = marker
                if index in markers:
                    raise DuplicatePlayerError(index)
                markers[index] = PlayerStart(Position(x, y), facing)
    for index in (0, 1):
        if index not in markers:
            raise MissingPlayerError(index)

    layout = GridLayout.from_cells(
        name, width, height, cells, starts=(markers[0], markers[1])
    )
    validate_layout(layout)
    return layout


def validate_layout(layout: GridLayout) -> None:
    """Check the structural invariants every shipped layout must satisfy."""
    for y in range(layout.height):
        for x in range(layout.width):
            on_border = x in (0, layout.width - 1) or y in (0, layout.height - 1)
            if on_border and layout.cells[y * layout.width + x] == EMPTY:
                raise LayoutError(f"border cell ({x}, {y}) is empty")
    if len(layout.starts) != 2:
        raise LayoutError(f"expected 2 starts, got {len(layout.starts)}")
    a, b = layout.starts
    if a.pos == b.pos:
        raise LayoutError("player starts coincide")
    for start in layout.starts:
        if not layout.is_walkable(start.pos):
            raise LayoutError(f"start {start.pos} is not an empty cell")
    region = reachable_union(layout)
    for kind in (POT, ONION_DISPENSER, DISH_DISPENSER, SERVING):
        positions = layout.features(kind)
        if not any(feature_reachable(layout, p, region) for p in positions):
            raise UnreachableFeatureError(kind)


# ---------------------------------------------------------------------------
# Rendering

_HELD_TAGS = {"onion": "o", "dish": "d", "soup": "{øøø"}


def render_layout(layout: GridLayout, state=None) -> str:
    """Expanded ASCII form: one line per row, columns at an 8-char stride.

    With ``state`` (a :class:`coopkitchen.engine.GameState`) players are shown
    as arrow+index with a held-object tag, pots show their onion fill, and
    counters show placed objects.  ``parse_layout`` recovers the same static
    grid from the output.
    """
    tokens = [[_static_token(layout, Position(x, y)) for x in range(layout.width)]
              for y in range(layout.height)]
    if state is not None:
        for pot in state.pots:
            if pot.onions > 0:
                tokens[pot.pos.y][pot.pos.x] = "P{" + "ø" * pot.onions
        for pos, obj in state.counters:
            tokens[pos.y][pos.x] = "X" + _HELD_TAGS[obj]
        for idx, player in enumerate(state.players):
            tag = _HELD_TAGS.get(player.held, "")
            tokens[player.pos.y][player.pos.x] = (
                FACING_TO_ARROW[player.facing] + str(idx) + tag
            )
    lines = []
    for row in tokens:
        lines.append("".join(tok.ljust(STRIDE) for tok in row).rstrip())
    return "\n".join(lines)


def _static_token(layout: GridLayout, pos: Position) -> str:
    kind = layout.cell_at(pos)
    return "" if kind == EMPTY else _KIND_TO_SYMBOL[kind]


# ---------------------------------------------------------------------------
# Shipped layouts


def list_layouts() -> list[str]:
    root = resources.files("coopkitchen") / "layouts"
    return sorted(p.name[: -len(".layout")] for p in root.iterdir()
                  if p.name.endswith(".layout"))


def load_layout(name: str) -> GridLayout:
    path = resources.files("coopkitchen") / "layouts" / f"{name}.layout"
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise LayoutError(f"unknown layout {name!r}; available: {list_layouts()}")
    return parse_layout(text, name=name)

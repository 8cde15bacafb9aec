"""State-to-language alignment and knowledge-library / prompt assembly.

Scene text comes in two dialects: the canonical positional form ("Player 0
holds one onion. ... Pot (2, 0) is empty") which is unambiguous on multi-pot
layouts, and an angle-bracket form ("<Player 0> ... <Pot 0> is empty") kept
for demo compatibility. Prompt sections live in external template files under
``prompts/`` so they can be restyled without touching code.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .engine import DISH, GameState, NOTHING, ONION, SOUP
from .layout import GridLayout

_HELD_PHRASE = {
    NOTHING: "nothing",
    ONION: "one onion",
    DISH: "one dish",
    SOUP: "one dish with soup",
}


class ConfigError(ValueError):
    pass


def describe_layout(layout: GridLayout) -> str:
    """One sentence naming every feature, ordered by class then by (y, x)."""
    phrases = []
    for label, positions in (
        ("onion dispenser", layout.onion_dispensers),
        ("dish dispenser", layout.dish_dispensers),
        ("pot", layout.pots),
        ("serving loc", layout.serving_locs),
    ):
        for pos in sorted(positions, key=lambda p: (p.y, p.x)):
            phrases.append(f"{label} at ({pos.x}, {pos.y})")
    return "Above is the layout of the kitchen: " + ", ".join(phrases) + "."


def describe_state(
    state: GameState,
    dialect: str = "positional",
    include_positions: bool = False,
) -> str:
    """Canonical scene sentence for the current task state."""
    if dialect not in ("positional", "angle"):
        raise ConfigError(f"unknown scene dialect {dialect!r}")
    pots = sorted(state.pots, key=lambda p: (p.pos.y, p.pos.x))
    counters = sorted(state.counters, key=lambda c: (c[0].y, c[0].x))

    clauses = []
    for idx, pot in enumerate(pots):
        name = f"<Pot {idx}>" if dialect == "angle" else f"Pot ({pot.pos.x}, {pot.pos.y})"
        if pot.ready:
            clauses.append(f"{name} has a ready soup")
        elif pot.cook_ticks_remaining is not None:
            clauses.append(f"{name} is cooking, {pot.cook_ticks_remaining} timesteps left")
        elif pot.onions == 0:
            clauses.append(f"{name} is empty")
        else:
            unit = "onion" if pot.onions == 1 else "onions"
            clauses.append(f"{name} has {pot.onions} {unit}")
    for pos, obj in counters:
        clauses.append(f"Counter ({pos.x}, {pos.y}) has {_HELD_PHRASE[obj]}")
    kitchen = "; ".join(clauses) + "." if clauses else "nothing to report."

    if dialect == "angle":
        players = "".join(
            f"<Player {i}> holds {_HELD_PHRASE[p.held]}."
            for i, p in enumerate(state.players)
        )
        return f"{players} Kitchen states: {kitchen}"

    sentences = [
        f"Player {i} holds {_HELD_PHRASE[p.held]}."
        for i, p in enumerate(state.players)
    ]
    if include_positions:
        sentences += [
            f"Player {i} is at ({p.pos.x}, {p.pos.y}) facing {p.facing}."
            for i, p in enumerate(state.players)
        ]
    return "State: " + " ".join(sentences) + " Kitchen states: " + kitchen


# ---------------------------------------------------------------------------
# Knowledge library


@dataclass(frozen=True)
class DemoScene:
    tag: str
    scene: str
    analysis: str
    intention: str
    plan: str

    def render(self, me: int = 0, teammate: int = 1) -> str:
        return (
            f"Scene {self.tag}: {self.scene}\n\n"
            f"Analysis: {self.analysis}\n"
            f"Intention for Player {teammate}: {self.intention}\n"
            f"Plan for Player {me}: {self.plan}"
        )


@dataclass(frozen=True)
class KnowledgeLibrary:
    task: str
    rules: str
    demos: tuple[DemoScene, ...] = ()
    me: int = 0
    teammate: int = 1

    def render(self) -> str:
        parts = [self.task, self.rules]
        if self.demos:
            blocks = "\n###\n".join(d.render(self.me, self.teammate) for d in self.demos)
            parts.append("Examples:\n###\n" + blocks + "\n###")
        return "\n\n".join(parts)


def _prompt_text(name: str) -> str:
    return (resources.files("coopkitchen") / "prompts" / name).read_text(encoding="utf-8")


_DEMO_SPLIT_RE = re.compile(r"^###\s*$", re.MULTILINE)
_DEMO_FIELD_RE = re.compile(
    r"Scene\s+(?P<tag>\w+):\s*(?P<scene>.*?)\n\s*\n"
    r"Analysis:\s*(?P<analysis>.*?)\n"
    r"Intention for Player \d+:\s*(?P<intention>.*?)\n"
    r"Plan for Player \d+:\s*(?P<plan>.*?)\s*$",
    re.DOTALL,
)


def load_default_demos() -> tuple[DemoScene, ...]:
    text = _prompt_text("demos.txt")
    demos = []
    for block in _DEMO_SPLIT_RE.split(text):
        block = block.strip()
        if not block or block.lower().startswith("examples"):
            continue
        m = _DEMO_FIELD_RE.match(block)
        if not m:
            raise ConfigError(f"malformed demo block: {block[:60]!r}...")
        demos.append(DemoScene(**m.groupdict()))
    return tuple(demos)


RULE_STYLES = ("pseudocode", "text")


def build_knowledge_library(
    layout: GridLayout,
    rule_style: str = "pseudocode",
    include_demos: bool = True,
    demos: tuple[DemoScene, ...] | None = None,
    me: int = 0,
    teammate: int = 1,
) -> KnowledgeLibrary:
    if rule_style not in RULE_STYLES:
        raise ConfigError(f"unknown rule style {rule_style!r}; pick from {RULE_STYLES}")
    task = _prompt_text("task.txt").format(
        me=me, teammate=teammate, layout_line=describe_layout(layout)
    ).strip()
    rules = _prompt_text(f"rules_{rule_style}.txt").strip()
    if demos is None:
        demos = load_default_demos() if include_demos else ()
    return KnowledgeLibrary(task=task, rules=rules, demos=demos, me=me, teammate=teammate)


# ---------------------------------------------------------------------------
# Prompt assembly


@dataclass(frozen=True)
class PromptBundle:
    """Assembled prompt, always in knowledge -> context -> scene -> extra order."""

    system: str
    context: tuple[str, ...] = ()
    scene: str = ""
    extra: str | None = None

    def user_text(self) -> str:
        parts = list(self.context)
        parts.append(self.scene)
        if self.extra:
            parts.append(self.extra)
        return "\n\n".join(p for p in parts if p)

    def full_text(self) -> str:
        return self.system + "\n\n" + self.user_text()

    def messages(self) -> list[dict]:
        return [
            {"role": "system", "content": self.system},
            {"role": "user", "content": self.user_text()},
        ]


def assemble_prompt(
    kl: KnowledgeLibrary,
    retrieved: tuple[str, ...] | list[str],
    scene: str,
    feedback: str | None = None,
) -> PromptBundle:
    return PromptBundle(
        system=kl.render(),
        context=tuple(retrieved),
        scene=scene,
        extra=feedback,
    )

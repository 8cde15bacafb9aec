"""Planner backends and chain-of-thought response parsing.

Three backends share one interface (``query(bundle) -> completion text``):

* ``RemoteBackend`` — OpenAI-compatible chat completions over HTTPS with
  bounded retries; credentials come from an environment variable.
* ``ScriptedBackend`` — a deterministic stand-in that reads the scene text
  (and only the text) and answers in the response format with a greedy
  rule-based plan, so the whole downstream pipeline runs offline.
* ``FixtureBackend`` — replays recorded completions in order, optionally
  checking request hashes; the basis for hermetic replay tests.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .engine import DISH, NOTHING, ONION, SOUP
from .lang import PromptBundle
from .skills import (
    DELIVER,
    FILL_DISH,
    PICKUP_DISH,
    PICKUP_ONION,
    PLACE_ON_COUNTER,
    PUT_ONION,
    Skill,
    SkillFailure,
    UNKNOWN_SKILL,
    parse_skill,
    render_skill,
    wait,
)


class BackendError(Exception):
    """Planner transport failure surfaced to the orchestrator."""


class BackendTimeout(BackendError):
    pass


class BackendTransportError(BackendError):
    pass


class BackendRateLimited(BackendError):
    pass


@dataclass
class BackendConfig:
    kind: str = "scripted"  # scripted | remote | fixture
    model: str = "gpt-3.5-turbo"
    endpoint: str = "https://api.openai.com/v1"
    temperature: float = 0.0
    top_p: float = 1.0
    max_tokens: int = 256
    timeout: float = 30.0
    max_retries: int = 2
    seed: int = 0
    api_key_env: str = "OPENAI_API_KEY"


def request_hash(bundle: PromptBundle) -> str:
    return hashlib.sha256(bundle.full_text().encode()).hexdigest()


# ---------------------------------------------------------------------------
# Response parsing


@dataclass(frozen=True)
class PlannerResponse:
    analysis: str
    intention: Skill | SkillFailure
    plan: Skill | SkillFailure
    raw: str
    intention_player: int | None = None
    plan_player: int | None = None
    missing: tuple[str, ...] = ()

    def render(self) -> str:
        return (
            f"Analysis: {self.analysis}\n"
            f"Intention for Player {self.intention_player}: {_render_field(self.intention)}\n"
            f"Plan for Player {self.plan_player}: {_render_field(self.plan)}"
        )


def _render_field(value: Skill | SkillFailure) -> str:
    return render_skill(value) if isinstance(value, Skill) else value.message


_ANALYSIS_RE = re.compile(
    r"analysis\s*:\s*(.*?)(?=\n\s*[-*•]?\s*(?:intention|plan)\s+for|\Z)",
    re.IGNORECASE | re.DOTALL,
)
_INTENTION_RE = re.compile(
    r"intention\s+for\s+<?\s*player\s*(\d+)\s*>?\s*:\s*(.+)", re.IGNORECASE
)
_PLAN_RE = re.compile(
    r"plan\s+for\s+<?\s*player\s*(\d+)\s*>?\s*:\s*(.+)", re.IGNORECASE
)
_SKILL_TOKEN_RE = re.compile(r"[A-Za-z_]+\s*\([^()]*\)")


def _missing_section(name: str) -> SkillFailure:
    return SkillFailure(UNKNOWN_SKILL, f"the response is missing its {name} section.")


def _extract_skill(payload: str) -> Skill | SkillFailure:
    m = _SKILL_TOKEN_RE.search(payload)
    return parse_skill(m.group(0) if m else payload)


def parse_response(text: str) -> PlannerResponse:
    """Locate the three labeled sections, tolerating bullets, case changes,
    and the angle-bracket player label variant."""
    missing: list[str] = []
    a = _ANALYSIS_RE.search(text)
    analysis = a.group(1).strip() if a else ""
    if not a:
        missing.append("Analysis")
    i = _INTENTION_RE.search(text)
    if i:
        intention = _extract_skill(i.group(2).strip())
        intention_player: int | None = int(i.group(1))
    else:
        intention = _missing_section("Intention")
        intention_player = None
        missing.append("Intention")
    p = _PLAN_RE.search(text)
    if p:
        plan = _extract_skill(p.group(2).strip())
        plan_player: int | None = int(p.group(1))
    else:
        plan = _missing_section("Plan")
        plan_player = None
        missing.append("Plan")
    return PlannerResponse(
        analysis=analysis,
        intention=intention,
        plan=plan,
        raw=text,
        intention_player=intention_player,
        plan_player=plan_player,
        missing=tuple(missing),
    )


# ---------------------------------------------------------------------------
# Scene-text facts (what the scripted backend can "see")


@dataclass
class SceneFacts:
    held: dict[int, str] = field(default_factory=dict)
    pots: list[tuple[str, int]] = field(default_factory=list)  # (kind, n)
    counter_objects: list[str] = field(default_factory=list)

    def any_pot_cooking_or_ready(self) -> bool:
        return any(kind in ("cooking", "ready") for kind, _ in self.pots)

    def any_pot_not_full(self) -> bool:
        return any(kind == "empty" or (kind == "onions" and n < 3)
                   for kind, n in self.pots)


_HELD_RE = re.compile(
    r"<?\s*Player\s*(\d)\s*>?\s*holds\s+(nothing|one onion|one dish with soup|one dish)",
    re.IGNORECASE,
)
_POT_RE = re.compile(
    r"<?\s*Pot\s*(?:\((\d+),\s*(\d+)\)|(\d+))\s*>?\s*"
    r"(is empty|has (\d+) onions?|is cooking, (\d+) timesteps left|has a ready soup)",
    re.IGNORECASE,
)
_COUNTER_RE = re.compile(
    r"Counter \(\d+, \d+\) has (one onion|one dish with soup|one dish)", re.IGNORECASE
)
_HELD_KIND = {
    "nothing": NOTHING,
    "one onion": ONION,
    "one dish": DISH,
    "one dish with soup": SOUP,
}


def parse_scene(scene: str) -> SceneFacts:
    facts = SceneFacts()
    for m in _HELD_RE.finditer(scene):
        facts.held[int(m.group(1))] = _HELD_KIND[m.group(2).lower()]
    for m in _POT_RE.finditer(scene):
        desc = m.group(4).lower()
        if desc == "is empty":
            facts.pots.append(("empty", 0))
        elif desc.startswith("has") and "onion" in desc:
            facts.pots.append(("onions", int(m.group(5))))
        elif desc.startswith("is cooking"):
            facts.pots.append(("cooking", int(m.group(6))))
        else:
            facts.pots.append(("ready", 3))
    for m in _COUNTER_RE.finditer(scene):
        facts.counter_objects.append(_HELD_KIND[m.group(1).lower()])
    return facts


# ---------------------------------------------------------------------------
# Greedy rule (the scripted planner's decision procedure)


def greedy_candidates(held: str, facts: SceneFacts, allow_place: bool) -> list[Skill]:
    """Priority order: deliver, fill, put onion, pickup dish, pickup onion,
    then (after negative feedback only) place on counter, then wait."""
    out: list[Skill] = []
    if held == SOUP:
        out.append(DELIVER)
    if held == DISH and facts.any_pot_cooking_or_ready():
        out.append(FILL_DISH)
    if held == ONION and facts.any_pot_not_full():
        out.append(PUT_ONION)
    if held == NOTHING and facts.any_pot_cooking_or_ready():
        out.append(PICKUP_DISH)
    if held == NOTHING:
        out.append(PICKUP_ONION)
    if allow_place and held in (ONION, DISH):
        out.append(PLACE_ON_COUNTER)
    out.append(wait(1))
    return out


_REFUSED_RE = re.compile(
    r"(?:cannot|shouldn't|could not execute|failed)\s+(?:do\s+)?([a-z_]+\([^()]*\))",
    re.IGNORECASE,
)


def refused_skills(feedback: str | None) -> set[str]:
    if not feedback:
        return set()
    return {m.group(1).lower().replace(" ", "") for m in _REFUSED_RE.finditer(feedback)}


_ANALYSIS_VERB = {
    "pickup(onion)": "pick up an onion in order to cook",
    "pickup(dish)": "pick up a dish for the soup",
    "put_onion_in_pot()": "put the onion in the pot",
    "fill_dish_with_soup()": "fill the dish with soup",
    "deliver_soup()": "deliver the soup",
    "place_obj_on_counter()": "place the held object on a counter for the teammate",
}


class ScriptedBackend:
    """Deterministic text-to-text planner: parses the scene sentences back out
    of the prompt and answers with the greedy rule in the response format."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def query(self, bundle: PromptBundle) -> str:
        me = _controlled_player(bundle.system)
        teammate = 1 - me
        facts = parse_scene(bundle.scene)
        avoid = refused_skills(bundle.extra)
        plan = _first_allowed(
            greedy_candidates(facts.held.get(me, NOTHING), facts,
                              allow_place=bool(avoid)),
            avoid,
        )
        intention = greedy_candidates(
            facts.held.get(teammate, NOTHING), facts, allow_place=False
        )[0]
        analysis = self._analysis(me, teammate, facts, plan, intention)
        return (
            f"Analysis: {analysis}\n"
            f"Intention for Player {teammate}: {render_skill(intention)}\n"
            f"Plan for Player {me}: {render_skill(plan)}"
        )

    @staticmethod
    def _analysis(me: int, teammate: int, facts: SceneFacts,
                  plan: Skill, intention: Skill) -> str:
        pot_bits = []
        for kind, n in facts.pots:
            pot_bits.append({
                "empty": "a pot is empty",
                "onions": f"a pot has {n} onion" + ("s" if n != 1 else ""),
                "cooking": f"a pot is cooking, {n} timesteps left",
                "ready": "a pot has a ready soup",
            }[kind])
        pots = "; ".join(pot_bits) or "no pots in sight"
        mine = _ANALYSIS_VERB.get(render_skill(plan), "wait for now")
        theirs = _ANALYSIS_VERB.get(render_skill(intention), "wait for now")
        return (
            f"In the kitchen, {pots}. "
            f"Player {me} should {mine}. "
            f"Player {teammate} will probably {theirs}."
        )


def _controlled_player(system_text: str) -> int:
    m = re.search(r"control\s+<?\s*Player\s*(\d)\s*>?", system_text, re.IGNORECASE)
    return int(m.group(1)) if m else 0


def _first_allowed(candidates: list[Skill], avoid: set[str]) -> Skill:
    for skill in candidates:
        if render_skill(skill).lower().replace(" ", "") not in avoid:
            return skill
    return wait(1)


# ---------------------------------------------------------------------------
# Remote backend


class RemoteBackend:
    """Chat-completions client with bounded retries on transport errors."""

    def __init__(self, config: BackendConfig,
                 transport: httpx.BaseTransport | None = None):
        self.config = config
        headers = {}
        api_key = os.environ.get(config.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(
            base_url=config.endpoint,
            timeout=config.timeout,
            headers=headers,
            transport=transport,
        )

    def query(self, bundle: PromptBundle) -> str:
        payload = {
            "model": self.config.model,
            "messages": bundle.messages(),
            "temperature": self.config.temperature,
            "top_p": self.config.top_p,
            "max_tokens": self.config.max_tokens,
        }
        last_error: BackendError = BackendTransportError("no attempts made")
        for _ in range(self.config.max_retries + 1):
            try:
                resp = self._client.post("/chat/completions", json=payload)
            except httpx.TimeoutException as exc:
                last_error = BackendTimeout(str(exc))
                continue
            except httpx.TransportError as exc:
                last_error = BackendTransportError(str(exc))
                continue
            if resp.status_code == 429:
                last_error = BackendRateLimited("rate limited")
                continue
            if resp.status_code >= 500:
                last_error = BackendTransportError(f"server error {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise BackendTransportError(f"unexpected status {resp.status_code}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, ValueError) as exc:
                raise BackendTransportError(f"malformed completion body: {exc}")
        raise last_error


# ---------------------------------------------------------------------------
# Fixture backend (hermetic replay)


class FixtureBackend:
    """Plays back an ordered list of {request_hash, response} entries."""

    def __init__(self, entries, check_hashes: bool = False):
        self._entries = deque(
            e if isinstance(e, dict) else {"response": e} for e in entries
        )
        self.check_hashes = check_hashes

    def query(self, bundle: PromptBundle) -> str:
        if not self._entries:
            raise BackendError("fixture exhausted: more queries than recorded")
        entry = self._entries.popleft()
        expected = entry.get("request_hash")
        if self.check_hashes and expected and expected != request_hash(bundle):
            raise BackendError("fixture mismatch: prompt diverged from recording")
        return entry["response"]

    @staticmethod
    def load(path: str | Path) -> "FixtureBackend":
        return FixtureBackend(json.loads(Path(path).read_text(encoding="utf-8")))

    @staticmethod
    def dump(entries, path: str | Path) -> None:
        Path(path).write_text(json.dumps(list(entries), indent=2), encoding="utf-8")


def make_backend(config: BackendConfig, *,
                 transport: httpx.BaseTransport | None = None,
                 fixture_entries=None):
    if config.kind == "scripted":
        return ScriptedBackend(seed=config.seed)
    if config.kind == "remote":
        return RemoteBackend(config, transport=transport)
    if config.kind == "fixture":
        return FixtureBackend(fixture_entries or [])
    raise ValueError(f"unknown backend kind {config.kind!r}")

"""Agent policies and the episode loop.

Every policy maps (game state, its own seat) to one action per tick through
the same interface. The language-planner agent implements the full reasoning
loop: align state to language, retrieve recent memory, query the planner,
validate the plan and replan on failures, correct the stored teammate belief,
then ground the committed skill through the controller. The planner is only
queried at skill boundaries, never while a skill is running.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import belief as belief_mod
from .belief import PredictionAccuracy, infer_teammate_skill, reconcile
from .controller import (
    ControllerConfig,
    FAILED,
    SkillExecution,
    next_action,
    observe_step,
    select_target,
    start_execution,
)
from .engine import (
    ACTIONS,
    DISH,
    EV_DELIVERED,
    Event,
    GameState,
    NOTHING,
    ONION,
    STAY,
    TraceHasher,
    event_to_dict,
    initial_state,
    state_snapshot,
    step,
)
from .lang import assemble_prompt, build_knowledge_library, describe_state
from .layout import GridLayout, load_layout
from .memory import (
    DEFAULT_CAPACITY,
    DEFAULT_RECENT_K,
    RecentK,
    TrajectoryBuffer,
    TrajectoryEntry,
)
from .planner import (
    BackendConfig,
    BackendError,
    FixtureBackend,
    PlannerResponse,
    make_backend,
    parse_response,
    request_hash,
)
from .skills import (
    DELIVER,
    FILL_DISH,
    PICKUP_DISH,
    PICKUP_ONION,
    PLACE_ON_COUNTER,
    PUT_ONION,
    Skill,
    SkillFailure,
    explain_failure,
    render_skill,
    validate,
    wait,
)


def _derive_seed(seed: int, player: int, salt: int) -> int:
    return (seed * 1_000_003 + player * 7_919 + salt) & 0xFFFFFFFF


# ---------------------------------------------------------------------------
# Policy specs (the CLI grammar)


class PolicySpecError(ValueError):
    pass


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    options: tuple[tuple[str, str], ...] = ()

    def option(self, key: str, default: str | None = None) -> str | None:
        for k, v in self.options:
            if k == key:
                return v
        return default

    def render(self) -> str:
        if not self.options:
            return self.kind
        if self.kind == "random":
            return f"random:{self.option('seed')}"
        return self.kind + ":" + ":".join(f"{k}={v}" for k, v in self.options)


_SPEC_KINDS = ("proagent", "greedy", "stay", "random")


def parse_policy_spec(text: str) -> PolicySpec:
    """Grammar: proagent[:backend=remote|scripted][:correction=replace|annotate],
    greedy, stay, random:seed."""
    parts = [p.strip() for p in text.strip().split(":")]
    kind = parts[0].lower()
    if kind not in _SPEC_KINDS:
        raise PolicySpecError(f"unknown policy {kind!r}; pick from {_SPEC_KINDS}")
    options: list[tuple[str, str]] = []
    for part in parts[1:]:
        if not part:
            continue
        if "=" in part:
            k, v = part.split("=", 1)
            options.append((k.strip().lower(), v.strip().lower()))
        elif kind == "random":
            options.append(("seed", part))
        else:
            raise PolicySpecError(f"malformed policy option {part!r} in {text!r}")
    spec = PolicySpec(kind, tuple(options))
    if kind == "proagent":
        backend = spec.option("backend", "scripted")
        if backend not in ("scripted", "remote", "fixture"):
            raise PolicySpecError(f"unknown backend {backend!r}")
        correction = spec.option("correction", "replace")
        if correction not in ("replace", "annotate"):
            raise PolicySpecError(f"unknown correction mode {correction!r}")
    if kind == "random":
        seed = spec.option("seed")
        if seed is not None and not seed.lstrip("-").isdigit():
            raise PolicySpecError(f"random seed must be an integer, got {seed!r}")
    return spec


# ---------------------------------------------------------------------------
# Simple policies


class StayPolicy:
    kind = "stay"

    def __init__(self, *_args, **_kwargs):
        pass

    def act(self, state: GameState) -> str:
        return STAY

    def observe(self, prev_state, actions, state, events) -> None:
        pass

    def summary(self) -> dict:
        return {"kind": self.kind}


class RandomWalkPolicy:
    kind = "random"

    def __init__(self, seed: int):
        self._rng = random.Random(seed)

    def act(self, state: GameState) -> str:
        return self._rng.choice(ACTIONS)

    def observe(self, prev_state, actions, state, events) -> None:
        pass

    def summary(self) -> dict:
        return {"kind": self.kind}


class TranscriptPolicy:
    """Replays a recorded per-tick action sequence (e.g. a human seat)."""

    kind = "transcript"

    def __init__(self, actions: list[str]):
        self._actions = list(actions)

    def act(self, state: GameState) -> str:
        if state.tick < len(self._actions):
            return self._actions[state.tick]
        return STAY

    def observe(self, prev_state, actions, state, events) -> None:
        pass

    def summary(self) -> dict:
        return {"kind": self.kind}


class GreedySkillPolicy:
    """Rule-based skill agent: the spec'd greedy priority order, guarded by
    target reachability, with a shared-counter hand-off fallback for split
    layouts. The offline control partner for evaluation."""

    kind = "greedy"

    def __init__(self, layout: GridLayout, player: int, seed: int,
                 wait_mode: str = "stay"):
        self.player = player
        self.config = ControllerConfig(
            wait_mode=wait_mode,
            rng=random.Random(_derive_seed(seed, player, 11)),
        )
        self.execution: SkillExecution | None = None
        self.committed: list[tuple[int, str]] = []

    def act(self, state: GameState) -> str:
        if self.execution is None or not self.execution.in_progress:
            skill = self._choose(state)
            self.execution = start_execution(state, self.player, skill)
            self.committed.append((state.tick, render_skill(skill)))
        action, self.execution = next_action(
            self.execution, state, self.player, self.config
        )
        return action

    def observe(self, prev_state, actions, state, events) -> None:
        if self.execution is not None and self.execution.in_progress:
            self.execution = observe_step(
                self.execution, prev_state, state, events, self.player
            )

    def _choose(self, state: GameState) -> Skill:
        held = state.players[self.player].held
        order = [DELIVER, FILL_DISH, PUT_ONION, PICKUP_DISH, PICKUP_ONION]
        for skill in order:
            if validate(state, self.player, skill) is not None:
                continue
            if select_target(state, self.player, skill) is None:
                continue
            return skill
        # Held item's primary use is unreachable: pass it over a counter.
        primary = {ONION: PUT_ONION, DISH: FILL_DISH}.get(held)
        if primary is not None and validate(state, self.player, primary) is None \
                and select_target(state, self.player, PLACE_ON_COUNTER) is not None:
            return PLACE_ON_COUNTER
        return wait(1)

    def summary(self) -> dict:
        return {"kind": self.kind, "commits": len(self.committed)}


# ---------------------------------------------------------------------------
# The language-planner agent


@dataclass
class AgentConfig:
    backend: BackendConfig = field(default_factory=BackendConfig)
    correction_mode: str = belief_mod.REPLACEMENT
    memory_capacity: int = DEFAULT_CAPACITY
    recent_k: int = DEFAULT_RECENT_K
    max_replans: int = 3
    double_check: bool | None = None  # None: on for remote backends only
    rule_style: str = "pseudocode"
    include_demos: bool = True
    dialect: str = "positional"
    wait_mode: str = "stay"

    def double_check_enabled(self) -> bool:
        if self.double_check is None:
            return self.backend.kind == "remote"
        return self.double_check


class SkillPlannerPolicy:
    """Full reasoning loop around a planner backend (CLI policy ``proagent``)."""

    kind = "proagent"

    def __init__(self, layout: GridLayout, player: int, seed: int,
                 config: AgentConfig | None = None, backend=None):
        self.player = player
        self.teammate = 1 - player
        self.config = config or AgentConfig()
        self.backend = backend if backend is not None else make_backend(self.config.backend)
        self.kl = build_knowledge_library(
            layout,
            rule_style=self.config.rule_style,
            include_demos=self.config.include_demos,
            me=player,
            teammate=self.teammate,
        )
        self.buffer = TrajectoryBuffer(
            self.config.memory_capacity, me=player, teammate=self.teammate
        )
        self.retrieval = RecentK(self.config.recent_k)
        self.controller_config = ControllerConfig(
            wait_mode=self.config.wait_mode,
            rng=random.Random(_derive_seed(seed, player, 13)),
        )
        self.execution: SkillExecution | None = None
        self.accuracy = PredictionAccuracy()
        self.events_since_commit: list[Event] = []
        self.pending_feedback: str | None = None
        self.awaiting_reconcile = False
        self.planner_calls = 0
        self.replan_rounds = 0
        self.planner_faults = 0
        self.double_check_calls = 0
        self.commits: list[dict] = []

    # -- public surface for the server's reasoning panel
    def latest_reasoning(self) -> dict | None:
        if not self.commits:
            return None
        last = self.commits[-1]
        return {
            "analysis": last["analysis"],
            "belief": last["belief"],
            "plan": last["skill"],
            "completion": last["exchanges"][-1]["completion"] if last["exchanges"] else "",
        }

    def needs_plan(self) -> bool:
        return self.execution is None or not self.execution.in_progress

    def plan_now(self, state: GameState) -> None:
        """The planning step act() runs at a skill boundary; split out so a
        server can move it off the tick path for slow backends."""
        if self.execution is not None and self.execution.status == FAILED:
            self.pending_feedback = (
                f"I could not execute {render_skill(self.execution.skill)}: "
                f"{(self.execution.failure_reason or 'failed').replace('_', ' ')}."
            )
        self._plan_and_commit(state)

    def act(self, state: GameState) -> str:
        if self.needs_plan():
            self.plan_now(state)
        action, self.execution = next_action(
            self.execution, state, self.player, self.controller_config
        )
        return action

    def observe(self, prev_state, actions, state, events) -> None:
        self.events_since_commit.extend(events)
        if self.execution is not None and self.execution.in_progress:
            self.execution = observe_step(
                self.execution, prev_state, state, events, self.player
            )

    def _plan_and_commit(self, state: GameState) -> None:
        self._reconcile_pending()
        scene = describe_state(state, dialect=self.config.dialect)
        retrieved = self.buffer.retrieve(self.retrieval)
        feedback: list[str] = []
        if self.pending_feedback:
            feedback.append(self.pending_feedback)
            self.pending_feedback = None

        committed: Skill | None = None
        last_response: PlannerResponse | None = None
        exchanges: list[dict] = []
        fault: str | None = None
        replans = 0
        for attempt in range(self.config.max_replans + 1):
            bundle = assemble_prompt(
                self.kl, retrieved, scene, feedback="\n".join(feedback) or None
            )
            self.planner_calls += 1
            if attempt > 0:
                self.replan_rounds += 1
                replans += 1
            try:
                completion = self.backend.query(bundle)
            except BackendError as exc:
                fault = f"{type(exc).__name__}: {exc}"
                break
            exchanges.append({
                "prompt_hash": request_hash(bundle),
                "prompt": bundle.full_text(),
                "completion": completion,
            })
            response = parse_response(completion)
            last_response = response
            plan = response.plan
            failure = plan if isinstance(plan, SkillFailure) else validate(
                state, self.player, plan
            )
            if failure is None:
                committed = plan
                if attempt > 0 and self.config.double_check_enabled():
                    committed = self._double_check(
                        state, retrieved, scene, feedback, committed, exchanges
                    )
                break
            feedback.append(explain_failure(
                plan if isinstance(plan, Skill) else None, failure
            ))
        if committed is None:
            committed = wait(1)
            self.planner_faults += 1
            if fault is None:
                fault = "max_replans_exhausted"

        intention: Skill | SkillFailure
        if last_response is not None:
            intention = last_response.intention
        else:
            intention = SkillFailure("unknown_skill", "no planner response")
        entry = TrajectoryEntry(
            tick=state.tick,
            scene=scene,
            analysis=last_response.analysis if last_response else "",
            belief=intention,
            own_skill=committed,
        )
        self.buffer.append(entry)
        self.awaiting_reconcile = True
        self.execution = start_execution(state, self.player, committed)
        self.commits.append({
            "tick": state.tick,
            "scene": scene,
            "analysis": entry.analysis,
            "belief": entry.rendered_belief(),
            "skill": render_skill(committed),
            "replans": replans,
            "fault": fault,
            "exchanges": exchanges,
            "correction": None,
        })

    def _double_check(self, state, retrieved, scene, feedback, committed,
                      exchanges) -> Skill:
        prompt = "\n".join(feedback + [
            f"Double-check: confirm that {render_skill(committed)} passes every "
            "precondition in the current scene, then restate your response."
        ])
        bundle = assemble_prompt(self.kl, retrieved, scene, feedback=prompt)
        self.planner_calls += 1
        self.double_check_calls += 1
        try:
            completion = self.backend.query(bundle)
        except BackendError:
            return committed
        exchanges.append({
            "prompt_hash": request_hash(bundle),
            "prompt": bundle.full_text(),
            "completion": completion,
        })
        response = parse_response(completion)
        plan = response.plan
        if isinstance(plan, Skill) and validate(state, self.player, plan) is None:
            return plan
        return committed

    def _reconcile_pending(self) -> None:
        if not self.awaiting_reconcile:
            return
        entry = self.buffer.last()
        if entry is None:
            self.awaiting_reconcile = False
            return
        observed = infer_teammate_skill(self.events_since_commit, self.teammate)
        self.accuracy.record(entry.belief, observed)
        updated = reconcile(entry, observed, self.config.correction_mode)
        if updated is not entry:
            self.buffer.replace_last(updated)
            if self.commits:
                self.commits[-1]["correction"] = {
                    "kind": updated.correction.kind,
                    "observed": render_skill(updated.correction.observed),
                    "note": updated.correction.note,
                }
        self.events_since_commit = []
        self.awaiting_reconcile = False

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "planner_calls": self.planner_calls,
            "replan_rounds": self.replan_rounds,
            "planner_faults": self.planner_faults,
            "double_check_calls": self.double_check_calls,
            "prediction_accuracy": self.accuracy.as_dict(),
            "commits": self.commits,
        }


# ---------------------------------------------------------------------------
# Policy construction


def build_policy(spec: PolicySpec | str, layout: GridLayout, player: int,
                 seed: int, backend_override=None):
    if isinstance(spec, str):
        spec = parse_policy_spec(spec)
    if spec.kind == "stay":
        return StayPolicy()
    if spec.kind == "random":
        opt = spec.option("seed")
        rng_seed = int(opt) if opt is not None else _derive_seed(seed, player, 17)
        return RandomWalkPolicy(rng_seed)
    if spec.kind == "greedy":
        return GreedySkillPolicy(layout, player, seed)
    if spec.kind == "proagent":
        correction = {
            "replace": belief_mod.REPLACEMENT, "annotate": belief_mod.ANNOTATION
        }[spec.option("correction", "replace")]
        config = AgentConfig(
            backend=BackendConfig(kind=spec.option("backend", "scripted"),
                                  seed=_derive_seed(seed, player, 19)),
            correction_mode=correction,
        )
        return SkillPlannerPolicy(layout, player, seed, config,
                                  backend=backend_override)
    raise PolicySpecError(f"unknown policy kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# Episodes


@dataclass
class EpisodeResult:
    layout: str
    policies: tuple[str, str]
    seed: int
    horizon: int
    total_reward: int
    deliveries: int
    trace_hash: str
    trace: list[dict]
    agents: list[dict]
    policy_faults: int = 0

    def to_json(self) -> dict:
        return {
            "layout": self.layout,
            "policies": list(self.policies),
            "seed": self.seed,
            "horizon": self.horizon,
            "totals": {"reward": self.total_reward, "deliveries": self.deliveries},
            "trace_hash": self.trace_hash,
            "policy_faults": self.policy_faults,
            "agents": self.agents,
            "trace": self.trace,
        }

    @staticmethod
    def from_json(data: dict) -> "EpisodeResult":
        return EpisodeResult(
            layout=data["layout"],
            policies=tuple(data["policies"]),
            seed=data["seed"],
            horizon=data["horizon"],
            total_reward=data["totals"]["reward"],
            deliveries=data["totals"]["deliveries"],
            trace_hash=data["trace_hash"],
            trace=data["trace"],
            agents=data["agents"],
            policy_faults=data.get("policy_faults", 0),
        )


def run_episode(layout: GridLayout | str, specs, seed: int, horizon: int,
                *, backend_overrides: dict[int, object] | None = None,
                policy_overrides: dict[int, object] | None = None,
                record_states: bool = True) -> EpisodeResult:
    """Step the engine ``horizon`` times with both policies' actions.

    Deterministic given (layout, specs, seed) when no remote backend is
    involved. Policy exceptions degrade that player's action to STAY.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if isinstance(layout, str):
        layout = load_layout(layout)
    overrides = backend_overrides or {}
    policy_overrides = policy_overrides or {}
    spec_names: list[str] = []
    policies = []
    for i in range(2):
        if i in policy_overrides:
            policies.append(policy_overrides[i])
            spec_names.append(specs[i] if isinstance(specs[i], str) else specs[i].render())
        else:
            spec = specs[i] if isinstance(specs[i], PolicySpec) else parse_policy_spec(specs[i])
            policies.append(build_policy(spec, layout, i, seed,
                                         backend_override=overrides.get(i)))
            spec_names.append(spec.render())

    state = initial_state(layout)
    hasher = TraceHasher()
    hasher.update_state(state)
    trace: list[dict] = []
    deliveries = 0
    policy_faults = 0
    for _ in range(horizon):
        actions: list[str] = []
        for policy in policies:
            try:
                action = policy.act(state)
            except Exception:
                action = STAY
                policy_faults += 1
            if action not in ACTIONS:
                action = STAY
                policy_faults += 1
            actions.append(action)
        next_state, reward, events = step(state, actions[0], actions[1])
        for policy in policies:
            policy.observe(state, tuple(actions), next_state, events)
        deliveries += sum(1 for ev in events if ev.kind == EV_DELIVERED)
        hasher.update_step((actions[0], actions[1]), reward)
        hasher.update_state(next_state)
        record = {
            "tick": state.tick,
            "actions": list(actions),
            "reward": reward,
            "events": [event_to_dict(ev) for ev in events],
        }
        if record_states:
            record["state"] = state_snapshot(next_state)
        trace.append(record)
        state = next_state

    return EpisodeResult(
        layout=layout.name,
        policies=(spec_names[0], spec_names[1]),
        seed=seed,
        horizon=horizon,
        total_reward=state.score,
        deliveries=deliveries,
        trace_hash=hasher.hexdigest(),
        trace=trace,
        agents=[p.summary() for p in policies],
        policy_faults=policy_faults,
    )


# ---------------------------------------------------------------------------
# Hermetic replay


def fixture_entries_from_log(log: dict, player: int) -> list[dict]:
    entries: list[dict] = []
    agent = log["agents"][player]
    for commit in agent.get("commits", []):
        for exchange in commit.get("exchanges", []):
            entries.append({
                "request_hash": exchange["prompt_hash"],
                "response": exchange["completion"],
            })
    return entries


def replay_episode(log: dict) -> EpisodeResult:
    """Re-run an episode from its log, feeding recorded completions back in
    through a fixture backend; human seats replay their recorded action
    transcript. The trace hash must come out identical."""
    backend_overrides: dict[int, object] = {}
    policy_overrides: dict[int, object] = {}
    for i, spec_str in enumerate(log["policies"]):
        if spec_str in ("human", "transcript"):
            actions = [record["actions"][i] for record in log["trace"]]
            policy_overrides[i] = TranscriptPolicy(actions)
            continue
        spec = parse_policy_spec(spec_str)
        if spec.kind == "proagent":
            backend_overrides[i] = FixtureBackend(fixture_entries_from_log(log, i))
    return run_episode(
        log["layout"], log["policies"], log["seed"], log["horizon"],
        backend_overrides=backend_overrides,
        policy_overrides=policy_overrides,
    )

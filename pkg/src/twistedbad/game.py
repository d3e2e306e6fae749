"""Schmidt's (alpha, beta)-game on Euclidean balls and a push-away strategy.

White's strategy targets sets of the form ``{x : inf_r ||w_r . x|| > 0}`` for
lacunary families of integer vectors ``w_r``.  Once the ball is small enough
that only one hyperplane ``w . x = p`` can meet it (``rho |w| <= 1/4``), White
displaces the centre by half the radius along ``+-w/|w|``, away from the
nearest such hyperplane.  Two pushes separate the ball from every hyperplane
of ``w`` by a fixed fraction of the activation scale, and nesting preserves
that separation for the rest of the game.  Nothing here is a proof that the
strategy wins; the tests exercise it against several adversaries.

All geometry is exact: centres and radii are rationals, distances to
hyperplanes live in Q(sqrt |w|^2).
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .core import IntVector
from .errors import IllegalMove
from .lacunary import lacunarity_audit
from .scalar import Scalar, as_fraction, fmt_decimal

Point = tuple  # tuple[Fraction, ...]

STOP_RADIUS = Fraction(1, 2 ** 60)
DIRECTION_BITS = 64


@dataclass(frozen=True)
class Ball:
    center: Point
    radius: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(as_fraction(c) for c in self.center))
        r = as_fraction(self.radius)
        if r <= 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "radius", r)

    @property
    def n(self) -> int:
        return len(self.center)

    def contains(self, other: "Ball") -> bool:
        """Exact ``other ⊆ self``: ``|c' - c|^2 <= (rho - rho')^2`` with ``rho' <= rho``."""
        if other.radius > self.radius:
            return False
        d2 = sum((a - b) ** 2 for a, b in zip(self.center, other.center))
        return d2 <= (self.radius - other.radius) ** 2

    def to_json(self):
        return {"center": [str(c) for c in self.center], "radius": str(self.radius)}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(Fraction(c) for c in obj["center"]), Fraction(obj["radius"]))


def legal_move(prev: Ball, nxt: Ball, ratio) -> bool:
    """True iff ``nxt`` has radius exactly ``ratio * prev.radius`` and lies in ``prev``."""
    return nxt.radius == as_fraction(ratio) * prev.radius and prev.contains(nxt)


def _dot(w: Sequence[int], x: Point) -> Fraction:
    return sum((wi * xi for wi, xi in zip(w, x)), Fraction(0))


def _reach(w: IntVector, rho: Fraction) -> Scalar:
    """``rho * |w|_e``: half-width of the slab ``{w . x : x in B}``."""
    return Scalar.sqrt(w.norm_sq, rho)


def ball_margin(w: IntVector, ball: Ball) -> Scalar:
    """Exact ``min_{x in ball} ||w . x||``."""
    c = _dot(w, ball.center)
    reach = _reach(w, ball.radius)
    lo, hi = c - reach, c + reach
    f = lo.floor()
    if lo == f or hi >= f + 1:
        return Scalar(0)
    return min(lo - f, (f + 1) - hi)


def unit_direction(w: IntVector, bits: int = DIRECTION_BITS) -> tuple[Fraction, ...]:
    """Dyadic approximation of ``w/|w|`` rounded toward zero, so its norm is <= 1."""
    N = w.norm_sq
    if N == 0:
        raise ValueError("zero target")
    scale = 1 << bits
    out = []
    for wi in w:
        mag = math.isqrt((wi * wi << (2 * bits)) // N)
        out.append(Fraction(mag if wi >= 0 else -mag, scale))
    return tuple(out)


def nearest_hyperplane(w: IntVector, center: Point) -> tuple[int, int]:
    """``(p*, s)``: nearest integer to ``w . c`` (ties to the lower one) and push sign."""
    c = _dot(w, center)
    f = math.floor(c)
    p = f if c - f <= Fraction(1, 2) else f + 1
    s = 1 if c >= p else -1
    return p, s


@dataclass(frozen=True)
class StrategyParams:
    c_act: Fraction = Fraction(1, 4)
    c_res: Fraction | None = None  # defaults to beta / 8

    def __post_init__(self):
        if not 0 < self.c_act < Fraction(1, 2):
            raise ValueError("activation constant must lie in (0, 1/2)")

    def resolution(self, beta: Fraction) -> Fraction:
        return self.c_res if self.c_res is not None else beta / 8


@dataclass
class GameConfig:
    classes: list[list[IntVector]]
    beta: Fraction
    alpha: Fraction = Fraction(1, 2)
    initial: Ball | None = None
    max_rounds: int = 60
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.alpha = as_fraction(self.alpha)
        self.beta = as_fraction(self.beta)
        if not (0 < self.alpha < 1 and 0 < self.beta < 1):
            raise ValueError("alpha and beta must lie in (0, 1)")
        self.classes = [[IntVector(w) for w in cls] for cls in self.classes]
        dims = {len(w) for cls in self.classes for w in cls}
        if len(dims) > 1:
            raise ValueError("targets of mixed dimension")
        n = dims.pop() if dims else (self.initial.n if self.initial else 1)
        for cls in self.classes:
            if any(w.is_zero() for w in cls):
                raise ValueError("zero target vector")
            if any(a.norm_sq > b.norm_sq for a, b in zip(cls, cls[1:])):
                raise ValueError("targets must be sorted by ascending norm")
            rep = lacunarity_audit(cls, 2)
            if not rep.passed:
                raise ValueError(f"target class is not 2-lacunary (pair {rep.violation})")
        if self.initial is None:
            self.initial = Ball(tuple(Fraction(1, 2) for _ in range(n)), Fraction(1, 2))
        if self.initial.n != n:
            raise ValueError("initial ball has the wrong dimension")
        if any(c - self.initial.radius < 0 or c + self.initial.radius > 1 for c in self.initial.center):
            raise ValueError("initial ball must lie in the arena [0, 1]^n")

    @property
    def n(self) -> int:
        return self.initial.n

    @property
    def targets(self) -> list[IntVector]:
        return [w for cls in self.classes for w in cls]

    def to_json(self):
        return {"alpha": str(self.alpha), "beta": str(self.beta),
                "classes": [[list(w) for w in cls] for cls in self.classes],
                "initial": self.initial.to_json(), "max_rounds": self.max_rounds,
                "meta": self.meta}

    @classmethod
    def from_json(cls, obj):
        return cls([[IntVector(w) for w in c] for c in obj["classes"]], Fraction(obj["beta"]),
                   Fraction(obj["alpha"]), Ball.from_json(obj["initial"]),
                   int(obj.get("max_rounds", 60)), dict(obj.get("meta", {})))


@dataclass
class WhiteState:
    """Progress of the push-away strategy through the flattened target list."""

    index: int = 0
    activation_radius: dict = field(default_factory=dict)
    pushes: dict = field(default_factory=dict)
    resolved: dict = field(default_factory=dict)  # target index -> certified margin

    def active_target(self, targets):
        return targets[self.index] if self.index < len(targets) else None


@dataclass(frozen=True)
class Move:
    player: str
    ball: Ball
    round: int
    annotation: dict

    def to_json(self):
        out = {"type": "move", "round": self.round, "player": self.player}
        out.update(self.ball.to_json())
        out["annotation"] = self.annotation
        return out


def _half_ball(ball: Ball, alpha: Fraction) -> Ball:
    return Ball(ball.center, alpha * ball.radius)


def white_push_away(current: Ball, config: GameConfig, params: StrategyParams,
                    state: WhiteState) -> tuple[Ball, dict]:
    """White's move: a waiting move, or a half-radius push along ``+-w``."""
    if config.alpha != Fraction(1, 2):
        raise ValueError("push-away is defined for alpha = 1/2")
    targets = config.targets
    rho = current.radius
    c_res = params.resolution(config.beta)
    while True:
        idx = state.index
        w = state.active_target(targets)
        if w is None:
            return _half_ball(current, config.alpha), {"action": "wait", "reason": "all resolved"}
        # activation: rho |w| <= c_act, squared to stay rational
        if rho * rho * w.norm_sq > params.c_act ** 2:
            return _half_ball(current, config.alpha), {"action": "wait", "target": idx}
        rho_act = state.activation_radius.setdefault(idx, rho)
        threshold = _reach(w, rho_act) * c_res
        mu = ball_margin(w, current)
        if state.pushes.get(idx, 0) and mu > threshold:
            state.resolved[idx] = mu
            state.index += 1
            continue
        p, s = nearest_hyperplane(w, current.center)
        e = unit_direction(w)
        step = rho / 2
        center = tuple(c + step * s * ei for c, ei in zip(current.center, e))
        ball = Ball(center, config.alpha * rho)
        state.pushes[idx] = state.pushes.get(idx, 0) + 1
        mu_new = ball_margin(w, ball)
        note = {"action": "push", "target": idx, "hyperplane": p, "sign": s,
                "margin_before": fmt_decimal(mu.enclosure(64)[0], 12),
                "margin_after": fmt_decimal(mu_new.enclosure(64)[0], 12)}
        if mu_new > threshold:
            state.resolved[idx] = mu_new
            state.index += 1
            note["resolved"] = True
        return ball, note


def black_center(current: Ball, config: GameConfig, state: WhiteState | None = None,
                 rng=None) -> Ball:
    return Ball(current.center, config.beta * current.radius)


def black_hug(current: Ball, config: GameConfig, state: WhiteState | None = None,
              rng=None) -> Ball:
    """Move the centre as far as allowed toward the nearest hyperplane of the
    first unresolved target."""
    index = state.index if state is not None else 0
    targets = config.targets
    if index >= len(targets):
        return black_center(current, config)
    w = targets[index]
    p, s = nearest_hyperplane(w, current.center)
    if _dot(w, current.center) == p:
        return black_center(current, config)
    e = unit_direction(w)
    step = (1 - config.beta) * current.radius
    center = tuple(c - step * s * ei for c, ei in zip(current.center, e))
    return Ball(center, config.beta * current.radius)


def black_random(current: Ball, config: GameConfig, state: WhiteState | None = None,
                 rng=0) -> Ball:
    """Uniform-ish legal ball; ``rng`` is a seed or a ``random.Random``."""
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    scale = 1 << 16
    n = current.n
    while True:
        v = [Fraction(rng.randint(-scale, scale), scale) for _ in range(n)]
        if sum(x * x for x in v) <= 1:
            break
    step = (1 - config.beta) * current.radius
    center = tuple(c + step * x for c, x in zip(current.center, v))
    return Ball(center, config.beta * current.radius)


BLACK_STRATEGIES: dict[str, Callable] = {
    "center": black_center,
    "hug": black_hug,
    "random": black_random,
}


@dataclass
class Transcript:
    config: GameConfig
    moves: list[Move]
    state: WhiteState
    black: str = ""
    seed: int | None = None

    @property
    def final_ball(self) -> Ball:
        return self.moves[-1].ball

    def rounds_played(self) -> int:
        return self.moves[-1].round

    def target_margins(self) -> list[Scalar]:
        """Certified ``min_{x in final ball} ||w . x||`` per target."""
        ball = self.final_ball
        return [ball_margin(w, ball) for w in self.config.targets]

    def min_margin(self) -> tuple[Scalar | None, int | None]:
        ms = self.target_margins()
        if not ms:
            return None, None
        i = min(range(len(ms)), key=lambda j: ms[j])
        return ms[i], i

    def certified_epsilon(self) -> Fraction:
        """Rational lower bound for the minimal target margin (0 if none)."""
        mu, _ = self.min_margin()
        if mu is None:
            return Fraction(0)
        return max(Fraction(0), mu.enclosure(128)[0])

    def header(self) -> dict:
        return {"type": "config", "config": self.config.to_json(), "black": self.black,
                "seed": self.seed}

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header(), sort_keys=True)]
        lines += [json.dumps(m.to_json(), sort_keys=True) for m in self.moves]
        return "\n".join(lines) + "\n"

    def verdict(self) -> dict:
        mu, idx = self.min_margin()
        center, radius = final_point(self)
        out = {"legal": True, "rounds": self.rounds_played(), "black": self.black,
               "seed": self.seed, "targets": len(self.config.targets),
               "resolved": len(self.state.resolved),
               "final_center": [str(c) for c in center], "radius_bound": str(radius)}
        if mu is not None and self.rounds_played() > 0:
            out["min_margin"] = mu.to_json()
            out["min_margin_lo"] = fmt_decimal(mu.enclosure(96)[0], 15)
            out["min_margin_index"] = idx
            out["epsilon"] = str(self.certified_epsilon())
            out["positive"] = mu.sign() > 0
        return out


def play(config: GameConfig, white=white_push_away, black=black_center,
         rounds: int | None = None, seed: int = 0, params: StrategyParams = StrategyParams(),
         check: bool = False, black_name: str = "") -> Transcript:
    """Run the game; Black opens with ``config.initial``.

    Stops after ``rounds`` full rounds, or earlier once every target is
    resolved and the radius is below 2**-60.  With ``check`` every resolved
    certificate is re-verified on every later ball.
    """
    if rounds is None:
        rounds = config.max_rounds
    if isinstance(black, str):
        black_name = black_name or black
        black = BLACK_STRATEGIES[black]
    rng = random.Random(seed)
    state = WhiteState()
    current = config.initial
    moves = [Move("black", current, 0, {"action": "open"})]
    ntargets = len(config.targets)
    for rnd in range(1, rounds + 1):
        ball, note = white(current, config, params, state)
        if not legal_move(current, ball, config.alpha):
            raise IllegalMove("white", rnd, "ratio or containment violated")
        moves.append(Move("white", ball, rnd, note))
        current = ball
        ball = black(current, config, state, rng)
        if not legal_move(current, ball, config.beta):
            raise IllegalMove("black", rnd, "ratio or containment violated")
        moves.append(Move("black", ball, rnd, {}))
        current = ball
        if check:
            for idx, mu in state.resolved.items():
                if ball_margin(config.targets[idx], current) < mu:
                    raise AssertionError(f"certificate for target {idx} broken in round {rnd}")
        if state.index >= ntargets and current.radius < STOP_RADIUS:
            break
    return Transcript(config, moves, state, black_name, seed)


def final_point(transcript: Transcript) -> tuple[Point, Fraction]:
    """Centre of the last ball and the radius bounding every later point."""
    ball = transcript.final_ball
    return ball.center, ball.radius


def margin(point: Point, targets: Iterable[Sequence[int]], r_max: int | None = None):
    """Exact ``||w_r . x||`` per target and the minimiser ``(r, value)``."""
    point = tuple(as_fraction(c) for c in point)
    out = []
    for r, w in enumerate(targets):
        if r_max is not None and r > r_max:
            break
        c = _dot(w, point)
        f = math.floor(c)
        out.append((r, min(c - f, f + 1 - c)))
    best = min(out, key=lambda p: (p[1], p[0])) if out else None
    return out, best


@dataclass
class ReplayResult:
    legal: bool
    moves: int
    error: str | None = None
    config: GameConfig | None = None
    final: Ball | None = None


def replay(lines: Iterable[str]) -> ReplayResult:
    """Re-validate a JSON-lines transcript move by move."""
    config = None
    prev = None
    count = 0
    expected = "black"
    last_round = 0
    for raw in lines:
        raw = raw.strip()
        if not raw:
            continue
        obj = json.loads(raw)
        if obj.get("type") == "config":
            config = GameConfig.from_json(obj["config"])
            continue
        if config is None:
            return ReplayResult(False, count, "missing config header")
        ball = Ball.from_json(obj)
        player = obj["player"]
        if prev is None:
            if player != "black" or ball != config.initial:
                return ReplayResult(False, count, "opening move must be Black's initial ball", config)
            prev, expected = ball, "white"
            count += 1
            continue
        if player != expected:
            return ReplayResult(False, count, f"expected {expected} at move {count}", config, prev)
        ratio = config.alpha if player == "white" else config.beta
        if not legal_move(prev, ball, ratio):
            return ReplayResult(False, count, f"illegal {player} move at index {count}", config, prev)
        if player == "white":
            if obj.get("round") != last_round + 1:
                return ReplayResult(False, count, "round numbering broken", config, prev)
            last_round += 1
        prev = ball
        expected = "black" if player == "white" else "white"
        count += 1
    if prev is None:
        return ReplayResult(False, count, "empty transcript", config)
    return ReplayResult(True, count, None, config, prev)


def load_transcript(lines: Iterable[str]) -> Transcript:
    """Rebuild a Transcript (without strategy state) from JSON lines."""
    config = None
    moves = []
    black, seed = "", None
    for raw in lines:
        raw = raw.strip()
        if not raw:
            continue
        obj = json.loads(raw)
        if obj.get("type") == "config":
            config = GameConfig.from_json(obj["config"])
            black, seed = obj.get("black", ""), obj.get("seed")
            continue
        moves.append(Move(obj["player"], Ball.from_json(obj), obj.get("round", 0),
                          obj.get("annotation", {})))
    if config is None or not moves:
        raise ValueError("transcript lacks a config header or moves")
    return Transcript(config, moves, WhiteState(), black, seed)

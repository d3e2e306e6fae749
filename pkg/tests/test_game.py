import json
import random
from fractions import Fraction as F

import pytest

from twistedbad.core import FormsMatrix, IntVector, WeightVector
from twistedbad.errors import IllegalMove
from twistedbad.game import (
    Ball,
    GameConfig,
    StrategyParams,
    WhiteState,
    ball_margin,
    black_center,
    black_hug,
    black_random,
    final_point,
    legal_move,
    margin,
    nearest_hyperplane,
    play,
    replay,
    white_push_away,
)
from twistedbad.lacunary import compute_stride, partition_sequence
from twistedbad.minkowski import generate_sequence
from twistedbad.scalar import Scalar

PHI = (Scalar(1) + Scalar.sqrt(5)) / 2
K1 = WeightVector.uniform(1, 1)


@pytest.fixture(scope="module")
def golden_config():
    seq = generate_sequence(FormsMatrix([[PHI]]), K1, F(25, 66), 12)
    t = compute_stride(seq.R, 1, K1, 1, seq.gamma)
    return GameConfig(partition_sequence(seq.u_vectors, t).classes, F(1, 2))


def test_legal_move_examples():
    assert legal_move(Ball((0, 0), 1), Ball((0, 0), F(1, 2)), F(1, 2))
    assert not legal_move(Ball((0, 0), 1), Ball((F(3, 5), 0), F(1, 2)), F(1, 2))
    assert not legal_move(Ball((0,), 1), Ball((0,), F(49, 100)), F(1, 2))
    # internally tangent is still contained
    assert legal_move(Ball((0,), 1), Ball((F(1, 2),), F(1, 2)), F(1, 2))


def test_push_away_tie_example():
    cfg = GameConfig([[IntVector([1])]], F(1, 2), initial=Ball((F(1, 2),), F(1, 2)))
    state = WhiteState()
    ball, note = white_push_away(Ball((F(1, 2),), F(1, 8)), cfg, StrategyParams(), state)
    assert ball == Ball((F(9, 16),), F(1, 16))
    assert state.resolved[0] == F(3, 8)
    assert nearest_hyperplane(IntVector([1]), (F(1, 2),)) == (0, 1)


def test_push_away_waits_when_inactive():
    cfg = GameConfig([[IntVector([1])]], F(1, 2))
    ball, _ = white_push_away(Ball((F(1, 2),), F(1, 2)), cfg, StrategyParams(), WhiteState())
    assert ball == Ball((F(1, 2),), F(1, 4))


def test_push_away_margin_never_decreases():
    rng = random.Random(9)
    w = IntVector([3])
    cfg = GameConfig([[w]], F(1, 2))
    for _ in range(200):
        c = F(rng.randint(0, 10 ** 6), 10 ** 6)
        rho = F(1, rng.randint(13, 400))
        cur = Ball((c,), rho)
        p, _ = nearest_hyperplane(w, cur.center)
        before = abs(3 * c - p) - rho * 3
        nxt, _ = white_push_away(cur, cfg, StrategyParams(), WhiteState())
        after = abs(3 * nxt.center[0] - p) - nxt.radius * 3
        assert after >= before


def test_black_examples():
    cfg = GameConfig([[IntVector([1])]], F(1, 2))
    assert black_center(Ball((0,), 1), cfg) == Ball((0,), F(1, 2))
    assert black_hug(Ball((F(9, 16),), F(1, 16)), cfg, WhiteState()) == Ball((F(19, 32),), F(1, 32))
    a = black_random(Ball((F(1, 2),), F(1, 4)), cfg, None, 42)
    b = black_random(Ball((F(1, 2),), F(1, 4)), cfg, None, 42)
    assert a == b
    assert legal_move(Ball((F(1, 2),), F(1, 4)), a, F(1, 2))


def test_play_zero_rounds_and_radii(golden_config):
    tr = play(golden_config, rounds=0)
    assert len(tr.moves) == 1
    assert "min_margin" not in tr.verdict()
    tr = play(golden_config, rounds=7)
    assert tr.final_ball.radius == F(1, 4) ** 7 * golden_config.initial.radius
    center, radius = final_point(tr)
    assert radius == tr.final_ball.radius and center == tr.final_ball.center


@pytest.mark.parametrize("black", ["center", "hug", "random"])
def test_positive_margins_and_certificates(golden_config, black):
    tr = play(golden_config, black=black, rounds=60, seed=5, check=True)
    mu, _ = tr.min_margin()
    assert mu.sign() > 0
    assert tr.certified_epsilon() > 0
    # the exact margin at the centre can only exceed the ball certificate
    _, best = margin(tr.final_ball.center, golden_config.targets)
    assert best[1] >= tr.certified_epsilon()


def test_rule_conformance_fuzz():
    rng = random.Random(2)
    cls = [[IntVector([1, 0]), IntVector([2, 3]), IntVector([7, 9])]]
    cfg = GameConfig(cls, F(1, 3), initial=Ball((F(1, 2), F(1, 2)), F(1, 4)))
    for seed in range(20):
        tr = play(cfg, black="random", rounds=25, seed=seed, check=True)
        for a, b in zip(tr.moves, tr.moves[1:]):
            ratio = cfg.alpha if b.player == "white" else cfg.beta
            assert legal_move(a.ball, b.ball, ratio)


def test_illegal_strategy_is_caught(golden_config):
    def cheat(current, config, state, rng):
        return Ball(current.center, current.radius)

    with pytest.raises(IllegalMove):
        play(golden_config, black=cheat, rounds=3)


def test_determinism(golden_config):
    a = play(golden_config, black="random", rounds=60, seed=11).to_jsonl()
    b = play(golden_config, black="random", rounds=60, seed=11).to_jsonl()
    assert a == b


def test_replay_detects_tampering(golden_config):
    lines = play(golden_config, black="hug", rounds=10, seed=7).to_jsonl().splitlines()
    assert replay(lines).legal
    obj = json.loads(lines[5])
    obj["radius"] = "1/3"
    bad = lines[:5] + [json.dumps(obj)] + lines[6:]
    res = replay(bad)
    assert not res.legal and res.moves == 4


def test_margin_examples():
    vals, best = margin((0,), [[1], [2]])
    assert [v for _, v in vals] == [0, 0]
    vals, best = margin((F(1, 2),), [[3]])
    assert best == (0, F(1, 2))


def test_ball_margin_exact():
    assert ball_margin(IntVector([1]), Ball((F(9, 16),), F(1, 16))) == F(3, 8)
    assert ball_margin(IntVector([1]), Ball((F(1, 2),), F(1, 2))) == 0


def test_config_validation():
    with pytest.raises(ValueError):
        GameConfig([[IntVector([3]), IntVector([5])]], F(1, 2))
    with pytest.raises(ValueError):
        GameConfig([[IntVector([1])]], F(1, 2), initial=Ball((F(1, 2),), 1))


def test_interleaving_classes_all_positive():
    cls = [[IntVector([1]), IntVector([3]), IntVector([8])], [IntVector([2]), IntVector([5]), IntVector([13])]]
    cfg = GameConfig(cls, F(1, 2))
    tr = play(cfg, black="hug", rounds=60, seed=1, check=True)
    assert all(m.sign() > 0 for m in tr.target_margins())

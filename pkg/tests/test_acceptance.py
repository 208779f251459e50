"""Acceptance suite: every shipped guarantee, one test per criterion.

Each test prints a PASS line with its measured values once its assertions
hold (run with ``pytest -v -s`` to see them live). The desk-scale model for
criteria 6-8 is trained once per session; the whole module is sized for
commodity hardware.
"""
import math
import random
import time

import numpy as np
import pytest

from gradcheck import finite_difference_grads, max_relative_error
from goalrec import (
    Checkpoint,
    ModelConfig,
    accuracy,
    build_blocksworld_vocabulary,
    evaluate_instances,
    forward,
    generate_instances,
    generate_plan,
    generate_training_pairs,
    group_metrics,
    load_checkpoint,
    normalized_recognizability,
    random_goal,
    random_state,
    recognizability,
    recognize,
    run_bucket_study,
    save_checkpoint,
    select_goal,
    score_goal,
    simulate_plan,
    train,
)
from goalrec.blocksworld import on
from goalrec.domain import is_goal_satisfied
from goalrec.nn import backward_trace, forward_trace_with_cache, trace_loss
from goalrec.model import init_params


def report(criterion: str, detail: str):
    print(f"\nACCEPTANCE {criterion}: PASS ({detail})", flush=True)


# ---------------------------------------------------------------------------
# desk-scale artifacts shared by criteria 6, 7 and 8 (trained once)

DESK_CONFIG = ModelConfig(rng_seed=7)  # desk-scale defaults
PAIRS_SEED = 101
TEST_SEED = 202
BUCKET_SEED = 303


@pytest.fixture(scope="module")
def desk_vocab():
    return build_blocksworld_vocabulary(7)


@pytest.fixture(scope="module")
def desk_model(desk_vocab):
    pairs = generate_training_pairs(desk_vocab, 5000, rng_seed=PAIRS_SEED)
    params, train_report = train(pairs, DESK_CONFIG, desk_vocab)
    return params, train_report


@pytest.fixture(scope="module")
def desk_test_instances(desk_vocab):
    # 80 goal-set groups x 3 base problems x 3 observability levels = 720
    return generate_instances(
        desk_vocab, n_groups=80, per_group=3, observabilities=(0.3, 0.5, 0.7),
        goal_size=(2, 4), goal_set_size=(5, 10), overlap="random",
        hidden_mode="uniform", rng_seed=TEST_SEED,
    )


@pytest.fixture(scope="module")
def bucket_instances_30(desk_vocab):
    # anchored goal sets with swept fluent overlap populate every difficulty
    # class; larger goals make the overlap grid fine enough
    return generate_instances(
        desk_vocab, n_groups=150, per_group=2, observabilities=(0.3,),
        goal_size=(4, 5), goal_set_size=(5, 10), overlap="sweep",
        hidden_mode="anchor", rng_seed=BUCKET_SEED,
    )


class TestCriterion1Recognizability:
    def test_worked_examples_exact(self):
        high = [frozenset("abc"), frozenset("aef"), frozenset("ghi")]
        low = [frozenset("abc"), frozenset({"a", "b", "x"}), frozenset({"a", "b", "y"})]
        r_high = recognizability(high[0], high)
        z_high = normalized_recognizability(high[0], high)
        r_low = recognizability(low[0], low)
        z_low = normalized_recognizability(low[0], low)
        assert abs(r_high - 2.5) < 1e-12
        assert abs(z_high - 0.75) < 1e-12
        assert abs(r_low - 5.0 / 3.0) < 1e-12
        assert abs(z_low - 1.0 / 3.0) < 1e-12
        report("1 recognizability reproduction",
               f"R={r_high}, R_Z={z_high}; R={r_low:.12f}, R_Z={z_low:.12f}")


class TestCriterion2VocabularyCounts:
    def test_22_block_counts(self):
        vocab = build_blocksworld_vocabulary(22)
        assert vocab.n_fluents == 506
        assert vocab.n_actions == 968
        report("2 vocabulary counts", f"fluents={vocab.n_fluents}, actions={vocab.n_actions}")


class TestCriterion3ScoreSelection:
    def test_injected_predictions(self):
        vocab = build_blocksworld_vocabulary(22)
        goal_1 = frozenset({on("B03", "B02"), on("B06", "B03")})
        goal_2 = frozenset({on("B07", "B08"), on("B08", "B06")})
        preds = np.zeros(vocab.n_fluents)
        preds[vocab.fluent_position(on("B03", "B02"))] = 1.000
        preds[vocab.fluent_position(on("B06", "B03"))] = 0.017
        preds[vocab.fluent_position(on("B07", "B08"))] = 0.000
        preds[vocab.fluent_position(on("B08", "B06"))] = 0.003
        s1 = score_goal(goal_1, preds, vocab)
        s2 = score_goal(goal_2, preds, vocab)
        result = select_goal([goal_1, goal_2], preds, vocab)
        assert abs(s1 - 1.017) < 1e-12
        assert abs(s2 - 0.003) < 1e-12
        assert result.selected_index == 0
        report("3 score/selection reproduction",
               f"score(G1)={s1}, score(G2)={s2}, selected=G1")


class TestCriterion4GradientCorrectness:
    def test_twenty_random_micro_models(self):
        started = time.perf_counter()
        rng = np.random.default_rng(424242)
        worst = 0.0
        for _ in range(20):
            n_actions = int(rng.integers(2, 7))
            n_fluents = int(rng.integers(2, 6))
            params = init_params_micro(rng, n_actions, n_fluents)
            length = int(rng.integers(1, 5))
            indices = rng.integers(1, n_actions + 1, size=length)
            targets = (rng.random(n_fluents) < 0.5).astype(float)
            _, cache = forward_trace_with_cache(indices, params)
            analytic = backward_trace(cache, targets, params)
            numeric = finite_difference_grads(
                lambda: trace_loss(indices, targets, params), params.tensors()
            )
            worst = max(worst, max_relative_error(analytic, numeric))
        elapsed = time.perf_counter() - started
        assert worst < 1e-4
        assert elapsed < 60.0
        report("4 gradient correctness",
               f"20 configurations, worst relative error {worst:.2e} in {elapsed:.1f}s")


def init_params_micro(rng, n_actions, n_fluents):
    from goalrec.nn import ModelParams

    return ModelParams.create(
        n_actions=n_actions,
        n_fluents=n_fluents,
        embedding_dim=int(rng.integers(1, 4)),
        hidden_size=int(rng.integers(1, 5)),
        rng=rng,
    )


class TestCriterion5PaddingNeutrality:
    def test_padding_changes_nothing(self):
        rng = np.random.default_rng(5150)
        checked = 0
        for _ in range(25):
            n_actions = int(rng.integers(2, 9))
            params = init_params_micro(rng, n_actions, int(rng.integers(2, 7)))
            length = int(rng.integers(1, 7))
            indices = rng.integers(1, n_actions + 1, size=length)
            base = forward(indices, params)
            for extra in range(1, 9):
                padded = np.concatenate([indices, np.zeros(extra, dtype=np.int64)])
                padded_preds = forward(padded, params)
                assert np.array_equal(padded_preds, base)
                checked += 1
        report("5 padding neutrality", f"{checked} padded traces, max deviation 0.0")


class TestCriterion6DeskScaleLearning:
    def test_trained_accuracy_and_trend(self, desk_vocab, desk_model, desk_test_instances):
        params, train_report = desk_model
        assert len(desk_test_instances) >= 600
        assert all(5 <= len(i.goal_set) <= 10 for i in desk_test_instances)
        records = evaluate_instances(desk_test_instances, params, desk_vocab)
        table = group_metrics(records)
        acc30 = table.row_for(0.3).accuracy
        acc50 = table.row_for(0.5).accuracy
        acc70 = table.row_for(0.7).accuracy
        chance = float(np.mean([100.0 / len(i.goal_set) for i in desk_test_instances]))
        assert acc70 >= 60.0
        assert acc70 >= 4.0 * chance
        assert acc70 >= acc50
        assert acc50 >= acc30 - 2.0
        report("6 desk-scale learning",
               f"acc30={acc30:.1f}, acc50={acc50:.1f}, acc70={acc70:.1f}, "
               f"chance={chance:.1f}, train={train_report.wall_seconds:.0f}s")


class TestCriterion7DifficultyTrend:
    def test_hard_pool_below_easy_pool(self, desk_vocab, desk_model, bucket_instances_30):
        params, _ = desk_model
        rows = run_bucket_study(bucket_instances_30, params, desk_vocab)
        low = [row for row in rows if row.bucket <= 3]
        high = [row for row in rows if row.bucket >= 7]
        low_count = sum(row.count for row in low)
        high_count = sum(row.count for row in high)
        assert low_count >= 100
        assert high_count >= 100
        low_acc = sum(row.accuracy * row.count for row in low) / low_count
        high_acc = sum(row.accuracy * row.count for row in high) / high_count
        assert high_acc > low_acc
        report("7 difficulty trend",
               f"C1-C3 acc={low_acc:.1f} (n={low_count}), "
               f"C7-C9 acc={high_acc:.1f} (n={high_count}) at 30% observability")


class TestCriterion8Latency:
    def test_mean_recognition_latency(self, desk_vocab, desk_model,
                                      desk_test_instances, bucket_instances_30):
        params, _ = desk_model
        pool = [*desk_test_instances, *bucket_instances_30]
        assert len(pool) >= 1000
        latencies = [recognize(inst, params, desk_vocab).latency for inst in pool]
        mean_ms = 1000.0 * float(np.mean(latencies))
        assert mean_ms < 100.0
        report("8 latency", f"mean {mean_ms:.2f} ms over {len(pool)} instances")


class TestCriterion9DeterminismPersistence:
    def test_training_bitwise_and_checkpoint_round_trip(self, tmp_path, desk_vocab):
        pairs = generate_training_pairs(desk_vocab, 300, rng_seed=77)
        config = ModelConfig(embedding_dim=16, hidden_size=24, batch_size=32,
                             epochs=4, rng_seed=9)
        params_a, report_a = train(pairs, config, desk_vocab)
        params_b, report_b = train(pairs, config, desk_vocab)
        for name, tensor in params_a.tensors().items():
            assert np.array_equal(tensor, params_b.tensors()[name]), name
        assert report_a.history == report_b.history

        path = tmp_path / "model.ckpt"
        save_checkpoint(path, Checkpoint(config, desk_vocab.checksum, params_a,
                                         report_a.history))
        loaded = load_checkpoint(path, vocabulary=desk_vocab)
        rng = np.random.default_rng(123)
        for _ in range(100):
            indices = rng.integers(1, desk_vocab.n_actions + 1,
                                   size=int(rng.integers(1, 12)))
            assert np.array_equal(forward(indices, params_a),
                                  forward(indices, loaded.params))
        report("9 determinism and persistence",
               "two runs bitwise-identical; 100 reloaded forwards bitwise-identical")


class TestCriterion10PlanValidity:
    def test_ten_thousand_plans(self):
        rng = random.Random(1009)
        started = time.perf_counter()
        total_actions = 0
        for k in range(10_000):
            n = rng.randint(2, 9)
            init = random_state(n, rng.getrandbits(32))
            goal = random_goal(n, rng.randint(1, min(4, n)), rng.getrandbits(32))
            plan = generate_plan(init, goal, rng.getrandbits(32))
            final = simulate_plan(init, plan)  # raises on any inapplicable step
            assert is_goal_satisfied(final, goal)
            total_actions += len(plan)
        elapsed = time.perf_counter() - started
        report("10 plan validity",
               f"10000/10000 plans valid ({total_actions} actions simulated, "
               f"{elapsed:.0f}s)")

import numpy as np
import pytest
from sklearn.base import clone

from goalrec.blocksworld import build_blocksworld_vocabulary
from goalrec.dataset import generate_instances, generate_training_pairs
from goalrec.errors import EmptyInputError, InvalidConfigError
from goalrec.estimator import GoalRecognizer


@pytest.fixture(scope="module")
def vocab():
    return build_blocksworld_vocabulary(5)


@pytest.fixture(scope="module")
def training_data(vocab):
    pairs = generate_training_pairs(vocab, 60, goal_size=(1, 3), rng_seed=41)
    X = [list(pair.trace.labels) for pair in pairs]
    y = [pair.hidden_goal for pair in pairs]
    return X, y


@pytest.fixture(scope="module")
def fitted(vocab, training_data):
    X, y = training_data
    est = GoalRecognizer(
        vocabulary=vocab, embedding_dim=10, hidden_size=12, batch_size=16,
        epochs=3, random_state=2,
    )
    return est.fit(X, y)


class TestSklearnProtocol:
    def test_get_set_params_round_trip(self, vocab):
        est = GoalRecognizer(vocabulary=vocab, hidden_size=48)
        params = est.get_params()
        assert params["hidden_size"] == 48
        est.set_params(hidden_size=24)
        assert est.hidden_size == 24

    def test_clone_preserves_hyperparameters(self, vocab):
        est = GoalRecognizer(vocabulary=vocab, epochs=5, learning_rate=0.01)
        cloned = clone(est)
        assert cloned.epochs == 5
        assert cloned.learning_rate == 0.01
        # clone deep-copies arbitrary params; the vocabulary must survive intact
        assert cloned.vocabulary == vocab

    def test_unfitted_predict_raises(self, vocab):
        from sklearn.exceptions import NotFittedError

        est = GoalRecognizer(vocabulary=vocab)
        with pytest.raises(NotFittedError):
            est.predict_proba([["(Pick-Up B1)"]])


class TestFitPredict:
    def test_fit_sets_attributes(self, fitted):
        assert hasattr(fitted, "params_")
        assert fitted.report_.epochs_run == 3
        assert fitted.vocabulary_.n_fluents == 30

    def test_predict_proba_shape(self, fitted, training_data):
        X, _ = training_data
        probs = fitted.predict_proba(X[:7])
        assert probs.shape == (7, 30)
        assert np.all((probs > 0) & (probs < 1))

    def test_predict_selects_candidate_indices(self, fitted, vocab):
        instances = generate_instances(
            vocab, n_groups=4, per_group=1, observabilities=(0.5,),
            goal_size=(1, 3), goal_set_size=(3, 4), rng_seed=42,
        )
        X = [list(inst.trace.labels) for inst in instances]
        candidates = [list(inst.goal_set) for inst in instances]
        chosen = fitted.predict(X, candidates)
        assert chosen.shape == (len(instances),)
        for k, inst in enumerate(instances):
            assert 0 <= chosen[k] < len(inst.goal_set)
        scores = fitted.score_candidates(X, candidates)
        for k in range(len(instances)):
            assert chosen[k] == int(np.argmax(scores[k]))

    def test_score_is_mean_accuracy(self, fitted, vocab):
        instances = generate_instances(
            vocab, n_groups=5, per_group=1, observabilities=(0.7,),
            goal_size=(1, 3), goal_set_size=(3, 4), rng_seed=43,
        )
        X = [list(inst.trace.labels) for inst in instances]
        candidates = [list(inst.goal_set) for inst in instances]
        truth = [inst.hidden_goal_index for inst in instances]
        value = fitted.score(X, truth, candidates)
        manual = np.mean(fitted.predict(X, candidates) == np.array(truth))
        assert value == manual

    def test_n_blocks_shorthand(self, training_data):
        X, y = training_data
        est = GoalRecognizer(
            n_blocks=5, embedding_dim=8, hidden_size=10, batch_size=16,
            epochs=1, random_state=0,
        )
        est.fit(X, y)
        assert est.vocabulary_.domain_id == "blocksworld-5"

    def test_missing_vocabulary_rejected(self, training_data):
        X, y = training_data
        with pytest.raises(InvalidConfigError):
            GoalRecognizer(epochs=1).fit(X, y)

    def test_input_validation(self, fitted, vocab, training_data):
        X, y = training_data
        with pytest.raises(EmptyInputError):
            fitted.predict_proba([])
        with pytest.raises(EmptyInputError):
            fitted.predict_proba([[]])
        with pytest.raises(TypeError):
            fitted.predict_proba([[1, 2, 3]])
        with pytest.raises(ValueError):
            GoalRecognizer(vocabulary=vocab, epochs=1).fit(X, y[:-1])

    def test_fit_is_deterministic(self, vocab, training_data):
        X, y = training_data
        kwargs = dict(
            vocabulary=vocab, embedding_dim=8, hidden_size=10, batch_size=16,
            epochs=2, random_state=11,
        )
        a = GoalRecognizer(**kwargs).fit(X, y)
        b = GoalRecognizer(**kwargs).fit(X, y)
        xs = [X[0], X[1]]
        assert np.array_equal(a.predict_proba(xs), b.predict_proba(xs))


class TestPersistence:
    def test_save_and_reload_round_trip(self, tmp_path, fitted, vocab, training_data):
        X, _ = training_data
        path = tmp_path / "est.ckpt"
        fitted.save(path)
        loaded = GoalRecognizer.from_checkpoint(path, vocabulary=vocab)
        assert np.array_equal(loaded.predict_proba(X[:5]), fitted.predict_proba(X[:5]))
        assert loaded.report_.history == fitted.report_.history

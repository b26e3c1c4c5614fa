import numpy as np
import pytest

from synthtab.errors import EmptyInputError, ShapeError
from synthtab.labels import FrameLabelMatrix
from synthtab.metrics import MetricReport, aggregate, tab_f1


def naive_counts(pred, truth):
    tp = fp = fn = 0
    for t in range(pred.shape[0]):
        for s in range(pred.shape[1]):
            for f in range(pred.shape[2]):
                p, g = bool(pred[t, s, f]), bool(truth[t, s, f])
                tp += p and g
                fp += p and not g
                fn += g and not p
    return tp, fp, fn


def naive_scores(tp, fp, fn):
    if tp + fp + fn == 0:
        return 1.0, 1.0, 1.0
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return p, r, (2 * p * r / (p + r) if p + r else 0.0)


def random_labels(rng, frames, density):
    a = np.zeros((frames, 6, 20), dtype=bool)
    on = rng.random((frames, 6)) < density
    frets = rng.integers(0, 20, (frames, 6))
    t, s = np.nonzero(on)
    a[t, s, frets[t, s]] = True
    return a


def hand_case():
    # 4 frames: truth has 5 active bins, prediction 4 of which 3 hit
    truth = np.zeros((4, 6, 20), dtype=bool)
    pred = np.zeros((4, 6, 20), dtype=bool)
    for t, s, f in [(0, 0, 3), (1, 0, 3), (2, 1, 5), (3, 2, 0), (3, 5, 7)]:
        truth[t, s, f] = True
    for t, s, f in [(0, 0, 3), (1, 0, 3), (2, 1, 5), (3, 2, 1)]:
        pred[t, s, f] = True
    return pred, truth


def test_hand_case():
    r = tab_f1(*hand_case())
    assert (r.tp, r.fp, r.fn) == (3, 1, 2)
    assert r.precision == 0.75 and r.recall == 0.6
    assert abs(r.f1 - 0.6667) <= 1e-4
    assert r.f1 == pytest.approx(2 * 0.75 * 0.6 / 1.35, abs=1e-12)


def test_identity_and_all_zero():
    rng = np.random.default_rng(0)
    truth = random_labels(rng, 10, 0.5)
    assert tab_f1(truth, truth).f1 == 1.0
    r = tab_f1(np.zeros_like(truth), truth)
    assert (r.recall, r.f1) == (0.0, 0.0)
    empty = np.zeros_like(truth)
    r = tab_f1(empty, empty)
    assert (r.precision, r.recall, r.f1) == (1.0, 1.0, 1.0)


def test_matches_naive_oracle():
    rng = np.random.default_rng(1)
    for _ in range(300):
        frames = int(rng.integers(1, 65))
        pred = random_labels(rng, frames, rng.random())
        truth = random_labels(rng, frames, rng.random())
        r = tab_f1(pred, truth)
        counts = naive_counts(pred, truth)
        assert (r.tp, r.fp, r.fn) == counts
        assert (r.precision, r.recall, r.f1) == naive_scores(*counts)
        for s, sub in enumerate(r.per_string):
            assert (sub.tp, sub.fp, sub.fn) == naive_counts(pred[:, s:s + 1], truth[:, s:s + 1])


def test_symmetry_and_bounds():
    rng = np.random.default_rng(2)
    for _ in range(100):
        a, b = random_labels(rng, 20, 0.4), random_labels(rng, 20, 0.4)
        ab, ba = tab_f1(a, b), tab_f1(b, a)
        assert (ab.precision, ab.recall) == (ba.recall, ba.precision)
        assert ab.f1 == pytest.approx(ba.f1)
        for v in (ab.precision, ab.recall, ab.f1):
            assert 0.0 <= v <= 1.0
        if ab.precision > 0 and ab.recall > 0:
            assert min(ab.precision, ab.recall) - 1e-12 <= ab.f1 <= max(ab.precision, ab.recall) + 1e-12


def test_shape_errors():
    with pytest.raises(ShapeError):
        tab_f1(np.zeros((3, 6, 20)), np.zeros((4, 6, 20)))
    a = FrameLabelMatrix(np.zeros((3, 6, 20)), 0.01)
    b = FrameLabelMatrix(np.zeros((3, 6, 20)), 0.02)
    with pytest.raises(ShapeError):
        tab_f1(a, b)


def test_aggregate_examples():
    single = MetricReport.from_counts(3, 1, 2)
    assert aggregate([single], "micro") == single
    assert aggregate([single], "macro") == single
    micro = aggregate([MetricReport.from_counts(1, 0, 0), MetricReport.from_counts(0, 1, 1)], "micro")
    assert (micro.precision, micro.recall, micro.f1) == (0.5, 0.5, 0.5)
    macro = aggregate([MetricReport.from_counts(1, 0, 0), MetricReport.from_counts(0, 1, 1)], "macro")
    assert macro.f1 == 0.5
    with pytest.raises(EmptyInputError):
        aggregate([])
    with pytest.raises(ValueError):
        aggregate([single], "weighted")


def test_micro_aggregate_equals_concatenation():
    rng = np.random.default_rng(3)
    preds = [random_labels(rng, int(rng.integers(5, 30)), 0.3) for _ in range(6)]
    truths = [random_labels(rng, len(p), 0.3) for p in preds]
    agg = aggregate([tab_f1(p, t) for p, t in zip(preds, truths)], "micro")
    whole = tab_f1(np.concatenate(preds), np.concatenate(truths))
    assert agg == whole

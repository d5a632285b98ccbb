# tests/test_metrics.py
import math

import numpy as np
import pytest

from sphereview.core.exceptions import UsageError
from sphereview.models.enums import Subset, ThresholdPolicy
from sphereview.ops.metrics import (
    aggregate_reports,
    attribute_curves,
    e_measure,
    evaluate_dataset,
    evaluate_pair,
    evaluate_subsets,
    f_beta,
    gaussian_window,
    mae,
    max_f,
    s_measure,
    weighted_f,
)
from sphereview.schemas.grids import SaliencyMap, SaliencyMask

BETA2 = 0.3
EPS = np.spacing(1)


def random_instances(n, seed=5, quantized=True):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        h = int(rng.integers(8, 17))
        w = int(rng.integers(8, 33))
        g = rng.random((h, w)) < rng.uniform(0.15, 0.6)
        g[h // 2, w // 2] = True
        g[0, 0] = False
        if quantized:
            s = rng.integers(0, 256, (h, w)) / 255.0
        else:
            s = np.clip(0.6 * g + rng.normal(0.2, 0.25, (h, w)), 0.0, 1.0)
        yield s, g


def fg_constant_instance(rng, h=8, w=16, level=0.7):
    """Blob ground truth away from the top/bottom rows; prediction constant on the foreground."""
    g = np.zeros((h, w), dtype=bool)
    g[3:5, 2:6] = True
    g[4, w - 2 :] = True
    s = np.where(g, level, rng.uniform(0.0, 0.6, (h, w)))
    return s, g


def fg_constant_instances(n, seed=31):
    """
    Random blob and speckle masks, some crossing the seam, with a prediction
    that is constant on the foreground. Every nearest-foreground pixel then
    carries the same error, so distance ties cannot change the score.
    """
    rng = np.random.default_rng(seed)
    for _ in range(n):
        h = int(rng.integers(6, 11))
        w = int(rng.integers(8, 21))
        g = rng.random((h, w)) < rng.uniform(0.0, 0.08)
        for _ in range(int(rng.integers(1, 4))):
            r0, c0 = int(rng.integers(0, h)), int(rng.integers(0, w))
            cols = np.arange(c0, c0 + int(rng.integers(1, 6))) % w
            g[r0 : r0 + int(rng.integers(1, 4))][:, cols] = True
        if g.all():
            g[0, 0] = False
        level = rng.uniform(0.05, 1.0)
        s = np.where(g, level, rng.uniform(0.0, 1.0, (h, w)))
        yield s, g


# --- Oracles ---


def looped_max_f(s, g):
    return max(f_beta(s, g, ThresholdPolicy.FIXED, threshold=k / 255.0) for k in range(256))


def brute_force_wfm(s, g, wrap):
    """Pixel loops over the weighted F-measure definition; nearest foreground by exhaustive search."""
    h, w = g.shape
    fg_rows, fg_cols = np.nonzero(g)
    E = np.abs(s - g)
    Et = E.copy()
    dist = np.zeros((h, w))
    for r in range(h):
        for c in range(w):
            if g[r, c]:
                continue
            dc = np.abs(c - fg_cols)
            if wrap:
                dc = np.minimum(dc, w - dc)
            d = np.hypot(r - fg_rows, dc)
            k = int(np.argmin(d))
            dist[r, c] = d[k]
            Et[r, c] = E[fg_rows[k], fg_cols[k]]
    K = gaussian_window(7, 5.0)
    EA = np.zeros((h, w))
    for r in range(h):
        for c in range(w):
            total = 0.0
            for i in range(-3, 4):
                for j in range(-3, 4):
                    rr, cc = r + i, c + j
                    if not 0 <= rr < h:
                        continue
                    if wrap:
                        cc %= w
                    elif not 0 <= cc < w:
                        continue
                    total += K[i + 3, j + 3] * Et[rr, cc]
            EA[r, c] = total
    MIN_E_EA = np.where(g & (EA < E), EA, E)
    B = np.where(g, 1.0, 2.0 - np.exp(math.log(0.5) / 5.0 * dist))
    Ew = MIN_E_EA * B
    TPw = np.sum(g) - np.sum(Ew[g])
    FPw = np.sum(Ew[~g])
    R = 1 - np.mean(Ew[g])
    P = TPw / (TPw + FPw + EPS)
    return (1 + BETA2) * R * P / (R + BETA2 * P + EPS)


def reference_sm(pred, gt, alpha=0.5):
    """Literal S-measure reference (object + region terms with eps guards)."""

    def s_object(p, m):
        x = np.mean(p[m])
        sigma_x = np.std(p[m], ddof=1)
        return 2 * x / (x ** 2 + 1 + sigma_x + EPS)

    def obj(p, m):
        u = np.mean(m)
        return u * s_object(p * m, m) + (1 - u) * s_object((1 - p) * ~m, ~m)

    def ssim(p, m):
        h, w = p.shape
        N = h * w
        x, y = np.mean(p), np.mean(m)
        sx = np.sum((p - x) ** 2) / (N - 1)
        sy = np.sum((m - y) ** 2) / (N - 1)
        sxy = np.sum((p - x) * (m - y)) / (N - 1)
        a = 4 * x * y * sxy
        b = (x ** 2 + y ** 2) * (sx + sy)
        if a != 0:
            return a / (b + EPS)
        return 1.0 if b == 0 else 0.0

    def region(p, m):
        h, w = m.shape
        y, x = np.argwhere(m).mean(axis=0).round()
        x, y = int(x) + 1, int(y) + 1
        area = h * w
        w1 = x * y / area
        w2 = y * (w - x) / area
        w3 = (h - y) * x / area
        w4 = 1 - w1 - w2 - w3
        mf = m.astype(np.float64)
        return (
            w1 * ssim(p[:y, :x], mf[:y, :x])
            + w2 * ssim(p[:y, x:], mf[:y, x:])
            + w3 * ssim(p[y:, :x], mf[y:, :x])
            + w4 * ssim(p[y:, x:], mf[y:, x:])
        )

    return max(0.0, alpha * obj(pred, gt) + (1 - alpha) * region(pred, gt))


def reference_em(s, g):
    """E-measure from the four (prediction, truth) part counts."""
    thr = min(2 * s.mean(), 1)
    predicted = (s >= thr) & (s > 0)
    n = g.size
    fg_fg = np.count_nonzero(predicted & g)
    fg_bg = np.count_nonzero(predicted & ~g)
    bg_fg = np.count_nonzero(~predicted & g)
    bg_bg = n - fg_fg - fg_bg - bg_fg
    mean_pred = (fg_fg + fg_bg) / n
    mean_gt = np.count_nonzero(g) / n
    total = 0.0
    for count, ps, gs in (
        (fg_fg, 1 - mean_pred, 1 - mean_gt),
        (fg_bg, 1 - mean_pred, -mean_gt),
        (bg_fg, -mean_pred, 1 - mean_gt),
        (bg_bg, -mean_pred, -mean_gt),
    ):
        align = 2 * ps * gs / (ps ** 2 + gs ** 2)
        total += count * (align + 1) ** 2 / 4
    return total / n


# --- MAE ---


def test_mae_cases(rng):
    g = np.zeros((4, 8), dtype=bool)
    g[:, :4] = True
    assert mae(g.astype(float), g) == 0.0
    assert mae(1.0 - g, g) == 1.0
    s = rng.random((4, 4))
    gt = rng.random((4, 4)) < 0.5
    expected = sum(abs(s[i, j] - gt[i, j]) for i in range(4) for j in range(4)) / 16
    assert mae(s, gt) == pytest.approx(expected, abs=1e-15)
    assert mae(1.0 - s, ~gt) == pytest.approx(mae(s, gt), abs=1e-15)


def test_shape_mismatch_is_usage_error():
    with pytest.raises(UsageError):
        mae(np.zeros((4, 4)), np.zeros((4, 8)))


# --- F-measures ---

CRAFTED_S = np.array(
    [
        [0.9, 0.8, 0.6, 0.0],
        [0.7, 0.1, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.5],
    ]
)
CRAFTED_G = np.zeros((4, 4), dtype=bool)
CRAFTED_G[:2, :2] = True


def test_f_beta_hand_computed():
    # threshold 2 * 0.225 = 0.45: five predicted pixels, three of them true
    expected = 1.3 * (3 / 5) * (3 / 4) / (0.3 * (3 / 5) + 3 / 4)
    assert f_beta(CRAFTED_S, CRAFTED_G) == pytest.approx(expected, abs=1e-12)
    fixed = f_beta(CRAFTED_S, CRAFTED_G, ThresholdPolicy.FIXED, threshold=0.65)
    assert fixed == pytest.approx(1.3 * 0.75 / (0.3 + 0.75), abs=1e-12)


def test_f_beta_trivial_cases():
    g = CRAFTED_G
    assert f_beta(g.astype(float), g) == 1.0
    assert f_beta(np.zeros((4, 4)), g) == 0.0
    assert f_beta(CRAFTED_S, np.zeros((4, 4))) is None
    assert max_f(CRAFTED_S, np.zeros((4, 4))) is None
    assert weighted_f(CRAFTED_S, np.zeros((4, 4))) is None


def test_f_beta_invariant_under_halving():
    # 2 * mean stays below the cap of 1 for both maps
    for s, g in random_instances(20, seed=9, quantized=False):
        assert f_beta(0.25 * s, g) == f_beta(0.5 * s, g)


def test_max_f_equals_fixed_threshold_loop():
    for s, g in random_instances(200):
        assert max_f(s, g) == looped_max_f(s, g)


def test_max_f_ignores_zero_pixels_at_threshold_zero():
    g = np.zeros((8, 16), dtype=bool)
    g[2:5, 3:9] = True
    s = np.zeros(g.shape)
    assert max_f(s, g) == 0.0
    assert looped_max_f(s, g) == 0.0
    # only the positive pixels count as predicted, even at t = 0
    s[2, 3:9] = 1.0 / 255.0
    assert max_f(s, g) == looped_max_f(s, g)
    assert max_f(s, g) == pytest.approx(1.3 * (1 / 3) / (0.3 + 1 / 3), abs=1e-12)


def test_max_f_on_mostly_zero_maps():
    rng = np.random.default_rng(44)
    for s, g in random_instances(50, seed=45):
        sparse = np.where(rng.random(s.shape) < 0.8, 0.0, s)
        assert max_f(sparse, g) == looped_max_f(sparse, g)


def test_max_f_dominates_f_beta():
    for s, g in random_instances(200, seed=13):
        assert max_f(s, g) >= f_beta(s, g)
        assert max_f(s, g) >= f_beta(s, g, ThresholdPolicy.FIXED, threshold=128 / 255)


def test_max_f_perfect():
    assert max_f(CRAFTED_G.astype(float), CRAFTED_G) == 1.0


# --- Weighted F-measure ---


def test_weighted_f_trivial_cases():
    g = np.zeros((16, 32), dtype=bool)
    g[6:10, 10:20] = True
    assert weighted_f(g.astype(float), g) == pytest.approx(1.0, abs=1e-12)
    assert weighted_f(np.zeros(g.shape), g) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("wrap", [True, False])
def test_weighted_f_matches_brute_force(rng, wrap):
    for level in (0.7, 0.95, 0.3):
        s, g = fg_constant_instance(rng, level=level)
        assert weighted_f(s, g, wrap=wrap) == pytest.approx(brute_force_wfm(s, g, wrap), abs=1e-9)


@pytest.mark.parametrize("wrap", [True, False])
def test_weighted_f_matches_brute_force_on_random_masks(wrap):
    for s, g in fg_constant_instances(200):
        assert weighted_f(s, g, wrap=wrap) == pytest.approx(brute_force_wfm(s, g, wrap), abs=1e-9)


def test_weighted_f_wrap_differs_from_planar_across_seam(rng):
    s, g = fg_constant_instance(rng)
    assert weighted_f(s, g, wrap=True) != pytest.approx(weighted_f(s, g, wrap=False), abs=1e-6)


def test_gaussian_window_is_normalized():
    k = gaussian_window(7, 5.0)
    assert k.shape == (7, 7)
    assert k.sum() == pytest.approx(1.0, abs=1e-15)
    assert k[3, 3] == k.max()


# --- S-measure ---


def test_s_measure_perfect_and_degenerate():
    g = CRAFTED_G
    assert s_measure(g.astype(float), g) == pytest.approx(1.0, abs=1e-12)
    s = np.full((4, 4), 0.25)
    assert s_measure(s, np.zeros((4, 4))) == pytest.approx(0.75)
    assert s_measure(s, np.ones((4, 4))) == pytest.approx(0.25)


def test_s_measure_uniform_prediction_matches_reference():
    g = np.zeros((8, 8), dtype=bool)
    g[2:6, 1:5] = True
    s = np.full((8, 8), 0.5)
    assert s_measure(s, g) == pytest.approx(reference_sm(s, g), abs=1e-9)


def test_s_measure_matches_reference():
    for s, g in random_instances(200, seed=21, quantized=False):
        assert s_measure(s, g) == pytest.approx(reference_sm(s, g), abs=1e-9)


# --- E-measure ---


def test_e_measure_cases():
    g = np.zeros((4, 8), dtype=bool)
    g[:, :4] = True
    assert e_measure(g.astype(float), g) == 1.0
    assert e_measure(1.0 - g, g) == pytest.approx(0.0, abs=1e-15)
    assert e_measure(np.zeros(g.shape), g) == pytest.approx(0.25)
    # constant ground truth: fraction of pixels predicted with the same label
    s = np.zeros((4, 8))
    s[0, :2] = 1.0
    assert e_measure(s, np.zeros((4, 8))) == pytest.approx(30 / 32)
    assert e_measure(s, np.ones((4, 8))) == pytest.approx(2 / 32)


def test_e_measure_matches_part_counts():
    for s, g in random_instances(200, seed=17, quantized=False):
        assert e_measure(s, g) == pytest.approx(reference_em(s, g), abs=1e-9)


# --- Planar cross-check against py_sod_metrics ---


def library_instances(n, seed=61):
    """8-bit maps spanning the full 0..255 range, so the library's min-max rescaling is a no-op."""
    for s, g in random_instances(n, seed=seed):
        s = s.copy()
        s[0, 0] = 0.0
        s[g.shape[0] // 2, g.shape[1] // 2] = 1.0
        yield s, g


def library_scores(s, g):
    psm = pytest.importorskip("py_sod_metrics")
    pred = np.rint(s * 255.0).astype(np.uint8)
    gt = g.astype(np.uint8) * 255
    sm, em, wfm = psm.Smeasure(), psm.Emeasure(), psm.WeightedFmeasure()
    for metric in (sm, em, wfm):
        metric.step(pred=pred, gt=gt)
    return sm.get_results()["sm"], em.get_results()["em"]["adp"], wfm.get_results()["wfm"]


def test_planar_metrics_agree_with_py_sod_metrics():
    for s, g in library_instances(50):
        sm, em, wfm = library_scores(s, g)
        assert s_measure(s, g) == pytest.approx(sm, abs=1e-9)
        # the library averages the enhanced alignment over N - 1 pixels
        assert e_measure(s, g) * g.size / (g.size - 1) == pytest.approx(em, abs=1e-9)
        # its WeightedFmeasure defaults to beta = 1
        assert weighted_f(s, g, wrap=False, beta2=1.0) == pytest.approx(wfm, abs=1e-9)


# --- Shift invariance ---


def test_metrics_invariant_under_circular_shift(rng):
    for s, g in random_instances(20, seed=3, quantized=False):
        for shift in (1, 5):
            s2, g2 = np.roll(s, shift, axis=1), np.roll(g, shift, axis=1)
            assert mae(s2, g2) == pytest.approx(mae(s, g), abs=1e-15)
            assert f_beta(s2, g2) == f_beta(s, g)
            assert max_f(s2, g2) == max_f(s, g)
            assert e_measure(s2, g2) == pytest.approx(e_measure(s, g), abs=1e-12)
    s, g = fg_constant_instance(rng)
    for shift in (3, 9):
        shifted = weighted_f(np.roll(s, shift, axis=1), np.roll(g, shift, axis=1))
        assert shifted == pytest.approx(weighted_f(s, g), abs=1e-12)


# --- Reports ---


def test_evaluate_pair_perfect_prediction():
    g = np.zeros((16, 32), dtype=bool)
    g[5:9, 3:12] = True
    report = evaluate_pair(SaliencyMap(data=g.astype(float)), SaliencyMask(data=g), path="x")
    assert report.mae == 0.0
    for name in ("f_beta", "w_f_beta", "max_f", "s_measure", "e_measure"):
        assert getattr(report, name) == pytest.approx(1.0, abs=1e-12)


def test_evaluate_pair_empty_ground_truth():
    report = evaluate_pair(np.full((4, 8), 0.2), np.zeros((4, 8)))
    assert report.has_empty_ground_truth
    assert report.w_f_beta is None and report.max_f is None
    assert report.s_measure == pytest.approx(0.8)


def test_dataset_means():
    pairs = list(random_instances(4, seed=8, quantized=False))
    reports, summary = evaluate_dataset(pairs)
    assert summary.n_images == 4
    assert summary.mae == pytest.approx(np.mean([r.mae for r in reports]))
    single, single_summary = evaluate_dataset(pairs[:1])
    assert single_summary.s_measure == single[0].s_measure
    twice = aggregate_reports([single[0], single[0]])
    assert twice.f_beta == pytest.approx(single[0].f_beta)

    _, threaded = evaluate_dataset(pairs, jobs=3)
    assert threaded == summary


def test_dataset_excludes_empty_ground_truth():
    g = np.zeros((4, 8), dtype=bool)
    g[1:3, 2:5] = True
    s = np.where(g, 0.9, 0.1)
    reports, summary = evaluate_dataset([(s, g), (s, np.zeros((4, 8)))])
    assert summary.n_excluded == 1
    assert summary.f_beta == reports[0].f_beta
    assert summary.mae == pytest.approx((reports[0].mae + reports[1].mae) / 2)


def test_evaluate_subsets():
    pairs = list(random_instances(6, seed=2, quantized=False))
    reports, _ = evaluate_dataset(pairs)
    flags = [True, False, True, False, False, False]
    subsets = evaluate_subsets(reports, flags)
    assert subsets[Subset.EDGE_DISC].n_images == 2
    assert subsets[Subset.CONTINUOUS].n_images == 4
    assert subsets[Subset.EDGE_DISC].mae == pytest.approx((reports[0].mae + reports[2].mae) / 2)
    with pytest.raises(UsageError):
        evaluate_subsets(reports, flags[:2])


# --- Attribute curves ---


def test_attribute_curve_ramp_window_three():
    samples = [(5.0, 5.0), (1.0, 1.0), (3.0, 3.0), (2.0, 2.0), (4.0, 4.0)]
    curve = attribute_curves(samples, window=3)
    assert list(curve.columns) == ["rank", "attr", "score_smoothed"]
    assert curve["rank"].tolist() == [1, 2, 3, 4, 5]
    assert curve["attr"].tolist() == [1.0, 2.0, 3.0, 4.0, 5.0]
    np.testing.assert_allclose(curve["score_smoothed"], [1.5, 2.0, 3.0, 4.0, 4.5])


def test_attribute_curve_trivial_windows():
    samples = [(float(a), 0.37) for a in range(30)]
    np.testing.assert_allclose(attribute_curves(samples, window=7)["score_smoothed"], 0.37)
    ramp = [(float(a), float(a) ** 2) for a in range(10, 0, -1)]
    identity = attribute_curves(ramp, window=1)
    np.testing.assert_allclose(identity["score_smoothed"], [float(a) ** 2 for a in range(1, 11)])


def test_attribute_curve_sort_is_stable():
    curve = attribute_curves([(1.0, 0.1), (0.0, 0.5), (1.0, 0.9)], window=1)
    assert curve["score_smoothed"].tolist() == pytest.approx([0.5, 0.1, 0.9])
    assert attribute_curves([], window=3).empty

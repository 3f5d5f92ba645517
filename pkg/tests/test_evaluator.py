import math
import random

import numpy as np
import pytest

from plftk import BBox, Detection, EvalConfig, GroundTruthAnn, IntegrityError
from plftk import ap_interpolated, evaluate, iou, match_image
from plftk.evaluator import (
    _iou_matrix,
    render_result_table,
    result_to_json_dict,
)

from bruteforce import evaluate_reference
from helpers import (
    assert_results_match,
    make_manifest,
    random_box,
    random_eval_fixture,
    to_reference_records,
)


def shifted_copy(box: BBox, target_iou: float) -> BBox:
    """Copy of box shifted right so that IoU with the original is target_iou."""
    dx = box.width * (1 - target_iou) / (1 + target_iou)
    return BBox(box.x_min + dx, box.y_min, box.width, box.height)


class TestMatchImage:
    def test_single_detection_is_tp(self):
        gt = [GroundTruthAnn(1, 1, BBox(0, 0, 100, 100), 1)]
        dets = [Detection(1, shifted_copy(gt[0].bbox, 0.6), 0.9, 1)]
        out = match_image(dets, gt, iou_thresh=0.5)
        assert out.detections[0].matched and not out.detections[0].ignored
        assert out.ground_truths[0].matched

    def test_greedy_by_score_blocks_better_iou(self):
        gt = [GroundTruthAnn(1, 1, BBox(0, 0, 100, 100), 1)]
        d_high = Detection(1, shifted_copy(gt[0].bbox, 0.6), 0.9, 1)
        d_low = Detection(1, shifted_copy(gt[0].bbox, 0.9), 0.8, 1)
        out = match_image([d_high, d_low], gt, iou_thresh=0.5)
        first, second = out.detections  # processed in score order
        assert first.score == 0.9 and first.matched
        assert second.score == 0.8 and not second.matched and not second.ignored

    def test_area_ignored_gt_absorbs_detection(self):
        gt = [GroundTruthAnn(1, 1, BBox(0, 0, 20, 20), 1)]  # area 400, below medium
        dets = [Detection(1, shifted_copy(gt[0].bbox, 0.9), 0.8, 1)]
        out = match_image(dets, gt, iou_thresh=0.5, area_range=(1024.0, 9216.0))
        assert out.ground_truths[0].ignored
        assert out.detections[0].matched and out.detections[0].ignored

    def test_unmatched_out_of_range_detection_ignored(self):
        gt = [GroundTruthAnn(1, 1, BBox(500, 400, 50, 50), 1)]
        dets = [Detection(1, BBox(0, 0, 20, 20), 0.8, 1)]  # small, matches nothing
        out = match_image(dets, gt, iou_thresh=0.5, area_range=(1024.0, 9216.0))
        assert not out.detections[0].matched and out.detections[0].ignored

    def test_max_dets_truncation(self):
        gt = [GroundTruthAnn(1, 1, BBox(0, 0, 100, 100), 1)]
        dets = [Detection(1, BBox(0, 0, 100, 100), s, 1) for s in (0.9, 0.8, 0.7)]
        out = match_image(dets, gt, iou_thresh=0.5, max_dets=2)
        assert len(out.detections) == 2
        assert [d.score for d in out.detections] == [0.9, 0.8]

    def test_each_gt_matched_at_most_once(self):
        rng = random.Random(21)
        gts = [GroundTruthAnn(i, 1, random_box(rng), 1) for i in range(6)]
        dets = [Detection(1, random_box(rng), rng.random(), 1) for _ in range(12)]
        out = match_image(dets, gts, iou_thresh=0.3)
        matched_dets = sum(1 for d in out.detections if d.matched)
        matched_gts = sum(1 for g in out.ground_truths if g.matched)
        assert matched_dets == matched_gts


class TestApInterpolated:
    def test_perfect_detector(self):
        curve = [(0.5, 1.0), (1.0, 1.0)]
        assert ap_interpolated(curve) == 1.0

    def test_zero_tp(self):
        curve = [(0.0, 0.0), (0.0, 0.0)]
        assert ap_interpolated(curve) == 0.0

    def test_empty_curve(self):
        assert ap_interpolated([]) == 0.0

    def test_hand_envelope_case(self):
        # 2 GT: TP(.9), TP(.8), FP(.7) -> precision 1.0 through recall 1.0
        curve = [(0.5, 1.0), (1.0, 1.0), (1.0, 2 / 3)]
        assert ap_interpolated(curve) == 1.0

    def test_precision_at_zero_recall_is_envelope_max(self):
        # FP then TP: first point (0, 0), then (1.0, 0.5)
        curve = [(0.0, 0.0), (1.0, 0.5)]
        assert ap_interpolated(curve) == pytest.approx(0.5)

    def test_respects_recall_grid_size(self):
        curve = [(0.5, 1.0)]
        # recall grid {0, 0.5, 1.0}: contributions 1, 1, 0
        assert ap_interpolated(curve, recall_points=3) == pytest.approx(2 / 3)


class TestEvalConfig:
    def test_defaults(self):
        cfg = EvalConfig()
        assert len(cfg.iou_thresholds) == 10
        assert cfg.iou_thresholds[0] == 0.50 and cfg.iou_thresholds[-1] == 0.95
        assert cfg.recall_points == 101
        assert cfg.max_dets == 100

    @pytest.mark.parametrize("kwargs", [
        {"iou_thresholds": ()},
        {"iou_thresholds": (0.5, 0.5)},
        {"iou_thresholds": (0.0, 0.5)},
        {"iou_thresholds": (0.5, 1.1)},
        {"recall_points": 1},
        {"max_dets": 0},
        {"area_ranges": {"medium": (1024.0, 9216.0)}},
    ])
    def test_rejects_bad_config(self, kwargs):
        with pytest.raises(ValueError):
            EvalConfig(**kwargs)


class TestEvaluate:
    def test_perfect_copy_is_all_hundred(self):
        rng = random.Random(30)
        manifest = make_manifest(n_images=3)
        gts = [GroundTruthAnn(i + 1, rng.randint(1, 3), random_box(rng), 1) for i in range(10)]
        dets = [Detection(g.image_id, g.bbox, 1.0, g.category_id) for g in gts]
        result = evaluate(dets, gts, manifest)
        assert result.map == 100.0
        for _, v in result.per_threshold:
            assert v == 100.0
        for v in (result.ap50, result.ap75):
            assert v == 100.0
        for v in (result.ap_medium, result.ap_large):
            assert v is None or v == 100.0

    def test_all_disjoint_is_zero(self):
        manifest = make_manifest(n_images=1, width=2000, height=2000)
        gts = [
            GroundTruthAnn(1, 1, BBox(0, 0, 50, 50), 1),  # medium
            GroundTruthAnn(2, 1, BBox(0, 200, 150, 150), 1),  # large
        ]
        dets = [Detection(1, BBox(1000, 1000, 60, 60), 0.9, 1)]
        result = evaluate(dets, gts, manifest)
        assert result.map == 0.0
        assert result.ap50 == 0.0
        assert result.ap_medium == 0.0
        assert result.ap_large == 0.0

    def test_empty_ground_truth_flagged_absent(self):
        manifest = make_manifest(n_images=2)
        dets = [Detection(1, BBox(0, 0, 10, 10), 0.5, 1)]
        result = evaluate(dets, [], manifest)
        assert result.empty_ground_truth
        assert result.map is None and result.ap50 is None
        assert all(v is None for _, v in result.per_threshold)
        assert result.counts.num_dets == 1 and result.counts.num_gt == 0

    def test_unknown_image_rejected(self):
        manifest = make_manifest(n_images=1)
        with pytest.raises(IntegrityError):
            evaluate([Detection(5, BBox(0, 0, 10, 10), 0.5, 1)], [], manifest)

    def test_multi_category_average(self):
        manifest = make_manifest(n_images=1, categories=((1, "pig"), (2, "other")))
        gts = [
            GroundTruthAnn(1, 1, BBox(0, 0, 100, 100), 1),
            GroundTruthAnn(2, 1, BBox(200, 200, 100, 100), 2),
        ]
        dets = [
            Detection(1, BBox(0, 0, 100, 100), 0.9, 1),  # perfect for cat 1
            Detection(1, BBox(400, 400, 100, 100), 0.9, 2),  # miss for cat 2
        ]
        result = evaluate(dets, gts, manifest)
        assert result.map == pytest.approx(50.0, abs=1e-9)

    def test_matches_oracle_on_random_fixtures(self):
        for seed in range(25):
            rng = random.Random(40_000 + seed)
            manifest, gts, dets = random_eval_fixture(rng)
            result = evaluate(dets, gts, manifest)
            ref_gts, ref_dets = to_reference_records(gts, dets)
            ref = evaluate_reference(manifest.image_ids, ref_gts, ref_dets)
            assert_results_match(result, ref)

    def test_ap_monotone_in_iou_threshold(self):
        for seed in range(15):
            rng = random.Random(50_000 + seed)
            manifest, gts, dets = random_eval_fixture(rng)
            if not gts:
                continue
            result = evaluate(dets, gts, manifest)
            values = [v for _, v in result.per_threshold]
            for lo, hi in zip(values, values[1:]):
                assert hi <= lo + 1e-9

    def test_score_scale_invariance(self):
        rng = random.Random(60_001)
        manifest, gts, dets = random_eval_fixture(rng)
        squared = [Detection(d.image_id, d.bbox, d.score**2, d.category_id) for d in dets]
        base = evaluate(dets, gts, manifest)
        scaled = evaluate(squared, gts, manifest)
        assert base == scaled

    def test_duplicate_detection_never_raises_ap(self):
        for seed in range(10):
            rng = random.Random(70_000 + seed)
            manifest, gts, dets = random_eval_fixture(rng)
            if not dets or not gts:
                continue
            victim = rng.choice(dets)
            dup = Detection(victim.image_id, victim.bbox, victim.score * 0.9, victim.category_id)
            base = evaluate(dets, gts, manifest)
            bumped = evaluate(dets + [dup], gts, manifest)
            for (t, a), (_, b) in zip(base.per_threshold, bumped.per_threshold):
                if a is not None:
                    assert b <= a + 1e-12, f"duplicate raised AP at {t}"

    def test_pooling_matches_manual_match_outcomes(self):
        # The evaluator must pool match outcomes globally before building
        # the curve, not average per-image APs.
        rng = random.Random(80_123)
        manifest, gts, dets = random_eval_fixture(rng, max_images=8, two_cats_prob=0.0)
        if not gts:
            pytest.skip("degenerate draw")
        scores, flags = [], []
        npig = 0
        for image_id in sorted(manifest.image_ids):
            img_dets = [d for d in dets if d.image_id == image_id]
            img_gts = [g for g in gts if g.image_id == image_id]
            out = match_image(img_dets, img_gts, iou_thresh=0.5)
            for dm in out.detections:
                scores.append(dm.score)
                flags.append(dm.matched and not dm.ignored)
            npig += sum(1 for gm in out.ground_truths if not gm.ignored)
        order = np.argsort(-np.array(scores), kind="stable")
        tp = fp = 0
        curve = []
        for i in order:
            if flags[i]:
                tp += 1
            else:
                fp += 1
            curve.append((tp / npig, tp / (tp + fp)))
        pooled_ap = ap_interpolated(curve) * 100.0
        result = evaluate(dets, gts, manifest)
        assert result.ap50 == pytest.approx(pooled_ap, abs=1e-12)

    def test_absent_medium_versus_single_medium_gt(self):
        manifest = make_manifest(n_images=1)
        large_gt = GroundTruthAnn(1, 1, BBox(0, 0, 150, 150), 1)
        only_large = evaluate(
            [Detection(1, large_gt.bbox, 0.9, 1)], [large_gt], manifest
        )
        assert only_large.ap_medium is None
        assert only_large.ap_large == 100.0
        medium_gt = GroundTruthAnn(2, 1, BBox(300, 300, 50, 50), 1)
        with_medium = evaluate(
            [Detection(1, large_gt.bbox, 0.9, 1), Detection(1, medium_gt.bbox, 0.8, 1)],
            [large_gt, medium_gt],
            manifest,
        )
        assert with_medium.ap_medium == 100.0

    def test_custom_area_range_reported(self):
        manifest = make_manifest(n_images=1)
        gts = [GroundTruthAnn(1, 1, BBox(0, 0, 20, 20), 1)]
        cfg = EvalConfig(area_ranges={"all": (0.0, math.inf), "small": (0.0, 1024.0)})
        result = evaluate([Detection(1, gts[0].bbox, 0.9, 1)], gts, manifest, cfg)
        assert result.ap_by_area["small"] == 100.0
        assert result.ap_medium is None

    def test_deterministic(self):
        rng = random.Random(90_001)
        manifest, gts, dets = random_eval_fixture(rng)
        assert evaluate(dets, gts, manifest) == evaluate(dets, gts, manifest)


class TestIouMatrix:
    def test_matches_scalar_iou(self):
        rng = random.Random(91)
        a = [random_box(rng) for _ in range(7)]
        b = [random_box(rng) for _ in range(5)]
        arr_a = np.array([[x.x_min, x.y_min, x.width, x.height] for x in a])
        arr_b = np.array([[x.x_min, x.y_min, x.width, x.height] for x in b])
        matrix = _iou_matrix(arr_a, arr_b)
        for i, box_a in enumerate(a):
            for j, box_b in enumerate(b):
                assert matrix[i, j] == iou(box_a, box_b)


class TestRendering:
    def test_table_shape_and_dash(self):
        manifest = make_manifest(n_images=1)
        gts = [GroundTruthAnn(1, 1, BBox(0, 0, 150, 150), 1)]
        result = evaluate([Detection(1, gts[0].bbox, 0.9, 1)], gts, manifest)
        text = render_result_table(result)
        lines = text.splitlines()
        assert lines[0].split() == ["mAP", "AP50", "AP75", "AP_M", "AP_L"]
        assert lines[1].split() == ["100.0", "100.0", "100.0", "-", "100.0"]

    def test_json_dict_round_trips_through_json(self):
        import json

        rng = random.Random(92)
        manifest, gts, dets = random_eval_fixture(rng)
        result = evaluate(dets, gts, manifest)
        doc = result_to_json_dict(result)
        text = json.dumps(doc, indent=2, sort_keys=True)
        assert json.dumps(json.loads(text), indent=2, sort_keys=True) == text

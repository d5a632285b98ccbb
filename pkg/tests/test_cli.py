# tests/test_cli.py
import filecmp

import numpy as np
import pytest
from click.testing import CliRunner
from PIL import Image

from sphereview import __version__
from sphereview.cli.deps import output_namer
from sphereview.core.exceptions import ConfigurationError, InputFileError
from sphereview.io.feature_grid import read_feature_grid, save_gating_params, write_feature_grid
from sphereview.io.reports import read_csv
from sphereview.main import cli
from sphereview.models.enums import Interpolation
from sphereview.schemas.fusion import GatingParams
from sphereview.schemas.grids import FeatureGrid
from sphereview.schemas.job import JobConfig
from sphereview.schemas.metrics import SUMMARY_CSV_COLUMNS
from sphereview.schemas.stats import STATS_CSV_COLUMNS

STATS_FILES = [
    "stats.csv",
    "distortion_hist.csv",
    "distortion_cumulative.csv",
    "hfov_hist.csv",
    "hfov_cumulative.csv",
    "vfov_hist.csv",
    "vfov_cumulative.csv",
    "edge_discontinuity.csv",
]
EVAL_FILES = ["eval.csv", "summary.csv", "curve_fg_ratio.csv", "curve_max_hfov_deg.csv", "curve_distortion.csv"]


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, [str(a) for a in args], catch_exceptions=False)


def read_png(path):
    with Image.open(path) as img:
        return np.asarray(img)


def test_version(runner):
    result = invoke(runner, "--version")
    assert result.exit_code == 0
    assert __version__ in result.output


# --- stats ---


def test_stats_outputs_are_reproducible(runner, fixture_set, tmp_path):
    for out in ("run1", "run2"):
        result = invoke(runner, "stats", fixture_set / "gt", "-o", tmp_path / out)
        assert result.exit_code == 0, result.output
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "run1", tmp_path / "run2", STATS_FILES, shallow=False)
    assert match == STATS_FILES, (mismatch, errors)

    table = read_csv(tmp_path / "run1" / "stats.csv", required=STATS_CSV_COLUMNS)
    assert len(table) == 10
    # masks 3, 4, 6 and 9 touch both the left and right border
    assert (tmp_path / "run1" / "edge_discontinuity.csv").read_text() == "edge_disc,percent\n1,40\n0,60\n"


def test_stats_on_empty_directory(runner, tmp_path):
    (tmp_path / "empty").mkdir()
    result = invoke(runner, "stats", tmp_path / "empty", "-o", tmp_path / "out")
    assert result.exit_code == 0, result.output
    assert (tmp_path / "out" / "stats.csv").read_text() == ",".join(STATS_CSV_COLUMNS) + "\n"


def test_stats_resize(runner, fixture_set, tmp_path):
    result = invoke(runner, "stats", fixture_set / "gt", "-o", tmp_path / "out", "--resize", "128x64")
    assert result.exit_code == 0, result.output
    result = invoke(runner, "stats", fixture_set / "gt", "-o", tmp_path / "bad", "--resize", "100x100")
    assert result.exit_code == 3


def test_stats_missing_input(runner, tmp_path):
    result = invoke(runner, "stats", tmp_path / "nowhere" / "*.png", "-o", tmp_path / "out")
    assert result.exit_code == 5


# --- eval ---


def run_eval(runner, fixture_set, out, *extra):
    return invoke(
        runner, "eval", "--pred", fixture_set / "pred", "--gt", fixture_set / "gt", "-o", out, *extra
    )


def test_eval_with_attributes_is_reproducible(runner, fixture_set, tmp_path):
    assert invoke(runner, "stats", fixture_set / "gt", "-o", tmp_path / "stats").exit_code == 0
    attrs = tmp_path / "stats" / "stats.csv"
    for out in ("run1", "run2"):
        result = run_eval(runner, fixture_set, tmp_path / out, "--attrs", attrs, "--window", 3)
        assert result.exit_code == 0, result.output
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "run1", tmp_path / "run2", EVAL_FILES, shallow=False)
    assert match == EVAL_FILES, (mismatch, errors)

    per_image = read_csv(tmp_path / "run1" / "eval.csv")
    assert per_image["path"].tolist() == [f"img{k:02d}" for k in range(10)]
    assert per_image["w_f_beta"].isna().tolist() == [k == 8 for k in range(10)]

    summary_text = (tmp_path / "run1" / "summary.csv").read_text()
    assert summary_text.startswith("# sphereview metrics: ")
    summary = read_csv(tmp_path / "run1" / "summary.csv", required=SUMMARY_CSV_COLUMNS)
    assert summary["subset"].tolist() == ["all", "edge_disc", "continuous"]
    assert summary["n_images"].tolist() == [10, 4, 6]
    assert summary["n_excluded"].tolist() == [1, 0, 1]

    curve = read_csv(tmp_path / "run1" / "curve_fg_ratio.csv")
    assert curve["rank"].tolist() == list(range(1, 10))
    assert curve["attr"].is_monotonic_increasing


def test_eval_curve_metric_and_planar(runner, fixture_set, tmp_path):
    assert invoke(runner, "stats", fixture_set / "gt", "-o", tmp_path / "stats").exit_code == 0
    result = run_eval(
        runner, fixture_set, tmp_path / "out", "--attrs", tmp_path / "stats" / "stats.csv",
        "--curve-metric", "mae", "--planar-distances",
    )
    assert result.exit_code == 0, result.output
    assert "distances=planar" in (tmp_path / "out" / "summary.csv").read_text()
    assert len(read_csv(tmp_path / "out" / "curve_distortion.csv")) == 9


def test_eval_without_attributes(runner, fixture_set, tmp_path):
    result = run_eval(runner, fixture_set, tmp_path / "out")
    assert result.exit_code == 0, result.output
    summary = read_csv(tmp_path / "out" / "summary.csv")
    assert summary["subset"].tolist() == ["all"]
    assert not (tmp_path / "out" / "curve_fg_ratio.csv").exists()


def test_eval_missing_pair(runner, fixture_set, tmp_path):
    (fixture_set / "pred" / "img03.png").unlink()
    result = run_eval(runner, fixture_set, tmp_path / "strict")
    assert result.exit_code == 5
    assert len(read_csv(tmp_path / "strict" / "eval.csv")) == 9

    result = run_eval(runner, fixture_set, tmp_path / "lenient", "--keep-going")
    assert result.exit_code == 0, result.output
    assert "img03" not in read_csv(tmp_path / "lenient" / "eval.csv")["path"].tolist()


def test_eval_rejects_non_erp_size(runner, fixture_set, tmp_path):
    assert run_eval(runner, fixture_set, tmp_path / "out", "--size", "64x64").exit_code == 3


# --- transform ---


@pytest.mark.parametrize(
    "steps",
    [
        ["--rotate-h", "150"],
        ["--rotate-v", "30"],
        ["--zoom", "1.5", "--center", "0,1,0"],
        ["--rotate-h", "30", "--then", "--zoom", "0.8"],
    ],
)
def test_transform_writes_erp_png(runner, erp_png, tmp_path, steps):
    result = invoke(runner, "transform", *steps, erp_png, "-o", tmp_path / "out")
    assert result.exit_code == 0, result.output
    out = read_png(tmp_path / "out" / "scene.png")
    assert out.shape == (32, 64, 3)
    assert out.dtype == np.uint8


def test_transform_composed_inverse_is_identity(runner, erp_png, tmp_path):
    result = invoke(runner, "transform", "--rotate-h", "30", "--rotate-h", "-30", erp_png, "-o", tmp_path / "out")
    assert result.exit_code == 0, result.output
    np.testing.assert_array_equal(read_png(tmp_path / "out" / "scene.png"), read_png(erp_png))


def test_transform_whole_column_shift(runner, erp_png, tmp_path):
    # 45 deg on a 64-column panorama is exactly 8 columns
    result = invoke(runner, "transform", "--rotate-h=45", "--no-compose", erp_png, "-o", tmp_path / "out")
    assert result.exit_code == 0, result.output
    np.testing.assert_array_equal(read_png(tmp_path / "out" / "scene.png"), np.roll(read_png(erp_png), 8, axis=1))


@pytest.mark.parametrize(
    "steps,code",
    [
        ([], 2),
        (["--center", "0,1,0", "--rotate-h", "10"], 2),
        (["--rotate-h", "abc"], 2),
        (["--zoom", "-1"], 4),
        (["--zoom", "1.2", "--center", "0,0,0"], 4),
    ],
)
def test_transform_rejects_bad_steps(runner, erp_png, tmp_path, steps, code):
    assert invoke(runner, "transform", *steps, erp_png, "-o", tmp_path / "out").exit_code == code


def test_transform_keep_going(runner, erp_png, tmp_path):
    broken = erp_png.parent / "broken.png"
    broken.write_text("not a png")
    args = ["transform", "--rotate-h", "90", erp_png.parent, "-o", tmp_path / "out"]
    assert invoke(runner, *args).exit_code == 5
    assert (tmp_path / "out" / "scene.png").exists()
    assert invoke(runner, *args, "--keep-going").exit_code == 0


@pytest.fixture
def same_stem_inputs(erp_png, tmp_path):
    """scene.png twice in different directories, plus other.png."""
    twin_dir = tmp_path / "twin"
    twin_dir.mkdir()
    twin = twin_dir / "scene.png"
    twin.write_bytes(erp_png.read_bytes())
    other = twin_dir / "other.png"
    other.write_bytes(erp_png.read_bytes())
    return [erp_png, twin, other]


def test_transform_same_stem_inputs_are_item_errors(runner, same_stem_inputs, tmp_path):
    args = ["transform", "--rotate-h", "90", *same_stem_inputs, "-o", tmp_path / "out"]
    assert invoke(runner, *args).exit_code == 5
    assert (tmp_path / "out" / "other.png").exists()
    assert not (tmp_path / "out" / "scene.png").exists()
    assert invoke(runner, *args, "--keep-going").exit_code == 0
    assert not (tmp_path / "out" / "scene.png").exists()


# --- viewport ---


def test_viewport_self_test(runner):
    assert invoke(runner, "viewport", "--self-test", "--lon", "37", "--lat", "-12").exit_code == 0
    assert invoke(runner, "viewport", "--self-test", "--fovh", "180").exit_code == 4


def test_viewport_extraction(runner, erp_png, tmp_path):
    result = invoke(
        runner, "viewport", erp_png, "--lon", "90", "--fovh", "100", "--fovv", "60", "--size", "40x24",
        "-o", tmp_path / "views",
    )
    assert result.exit_code == 0, result.output
    assert read_png(tmp_path / "views" / "scene.png").shape == (24, 40, 3)


def test_viewport_requires_output_dir(runner, erp_png):
    assert invoke(runner, "viewport", erp_png).exit_code == 2


def test_viewport_same_stem_inputs_are_item_errors(runner, same_stem_inputs, tmp_path):
    args = ["viewport", *same_stem_inputs, "--size", "16x16", "-o", tmp_path / "views"]
    assert invoke(runner, *args).exit_code == 5
    assert sorted(p.name for p in (tmp_path / "views").iterdir()) == ["other.png"]


# --- savt ---


@pytest.fixture
def grid_file(tmp_path, rng):
    path = tmp_path / "grids" / "feat.svfg"
    write_feature_grid(path, FeatureGrid(data=rng.normal(size=(8, 16, 4))))
    return path


@pytest.mark.parametrize("branches,blocks", [(None, 4), ("h", 2), ("v,zoom", 3)])
def test_savt_channel_count(runner, grid_file, tmp_path, branches, blocks):
    extra = [] if branches is None else ["--branches", branches]
    result = invoke(runner, "savt", grid_file, "-o", tmp_path / "out", *extra)
    assert result.exit_code == 0, result.output
    fused = read_feature_grid(tmp_path / "out" / "feat.svfg")
    assert fused.data.shape == (8, 16, 4 * blocks)
    np.testing.assert_allclose(fused.data[:, :, :4], read_feature_grid(grid_file).data)


def test_savt_with_config_and_gate(runner, grid_file, tmp_path):
    save_gating_params(tmp_path / "gate.npz", GatingParams.constant(4, 2, logit=0.0, reduction=2))
    config = tmp_path / "savt.yaml"
    config.write_text("branches:\n  - kind: vertical\n    angles_deg: [45]\ngating:\n  params_path: gate.npz\n")
    result = invoke(runner, "savt", grid_file, "-o", tmp_path / "out", "--config", config, "--interp", "nearest")
    assert result.exit_code == 0, result.output
    fused = read_feature_grid(tmp_path / "out" / "feat.svfg")
    np.testing.assert_allclose(fused.data[:, :, :4], 0.5 * read_feature_grid(grid_file).data, atol=1e-6)


def test_savt_errors(runner, grid_file, tmp_path):
    assert invoke(runner, "savt", grid_file, "-o", tmp_path / "out", "--branches", "x").exit_code == 2
    save_gating_params(tmp_path / "gate.npz", GatingParams.constant(4, 2))
    result = invoke(runner, "savt", grid_file, "-o", tmp_path / "out", "--gating", tmp_path / "gate.npz")
    assert result.exit_code == 2


# --- job validation ---


def test_job_config_checks_inputs_and_output(tmp_path):
    with pytest.raises(InputFileError):
        JobConfig(subcommand="stats", inputs=[tmp_path / "absent.png"], out_dir=tmp_path / "out")
    blocker = tmp_path / "file"
    blocker.write_text("x")
    job = JobConfig(subcommand="stats", out_dir=blocker / "out", interpolation="nearest")
    assert job.interpolation is Interpolation.NEAREST
    with pytest.raises(ConfigurationError):
        job.prepare_out_dir()


def test_output_dir_is_created_before_work(runner, tmp_path):
    (tmp_path / "empty").mkdir()
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert invoke(runner, "stats", tmp_path / "empty", "-o", blocker / "out").exit_code == 3


def test_output_namer_refuses_shared_stems(tmp_path):
    inputs = [tmp_path / "a" / "x.png", tmp_path / "b" / "x.jpg", tmp_path / "a" / "y.png"]
    target = output_namer(inputs, tmp_path / "out", ".png")
    assert target(inputs[2]) == tmp_path / "out" / "y.png"
    for path in inputs[:2]:
        with pytest.raises(InputFileError):
            target(path)

import pytest

from lwblend_postproc import cli
from lwblend_postproc.plots import (plot_alpha_stats, plot_convergence,
                                    plot_field2d, plot_profile)


def _assert_image(path):
    assert path.exists()
    data = path.read_bytes()
    assert len(data) > 1000
    assert data[:8] == b"\x89PNG\r\n\x1a\n"


def test_profile_basic(fixtures, tmp_path):
    out = plot_profile(fixtures["snap1d"], "rho", tmp_path / "profile.png")
    _assert_image(out)


def test_profile_with_reference_and_zoom(fixtures, tmp_path):
    out = plot_profile(fixtures["snap1d"], "pressure", tmp_path / "zoom.png",
                       reference_path=fixtures["ref1d"], zoom=(0.2, 0.6))
    _assert_image(out)


def test_profile_rejects_2d_input(fixtures, tmp_path):
    with pytest.raises(ValueError):
        plot_profile(fixtures["snap2d"], "rho", tmp_path / "x.png")


def test_field2d_linear_with_contours(fixtures, tmp_path):
    out = plot_field2d(fixtures["snap2d"], "rho", tmp_path / "field.png",
                       contours=5)
    _assert_image(out)


def test_field2d_uniform_field(fixtures, tmp_path):
    out = plot_field2d(fixtures["snap2d_uniform"], "rho",
                       tmp_path / "uniform.png", scale="log")
    _assert_image(out)


def test_field2d_log_floors_zero_with_warning(fixtures, tmp_path):
    with pytest.warns(UserWarning, match="floored"):
        out = plot_field2d(fixtures["snap2d_zero"], "rho",
                           tmp_path / "log.png", scale="log")
    _assert_image(out)


def test_field2d_alpha_map(fixtures, tmp_path):
    out = plot_field2d(fixtures["snap2d"], "alpha", tmp_path / "alpha.png")
    _assert_image(out)


def test_field2d_crop(fixtures, tmp_path):
    out = plot_field2d(fixtures["snap2d"], "rho", tmp_path / "crop.png",
                       crop=((0.0, 0.5), (0.0, 0.5)))
    _assert_image(out)


def test_convergence_plot(fixtures, tmp_path):
    out = plot_convergence(fixtures["table"], tmp_path / "conv.png")
    _assert_image(out)


def test_alpha_stats_plot(fixtures, tmp_path):
    out = plot_alpha_stats(fixtures["manifest"], tmp_path / "stats.png")
    _assert_image(out)


class TestCLI:
    def test_profile_command(self, fixtures, tmp_path, capsys):
        code = cli.profile_main([str(fixtures["snap1d"]), "--variable", "rho",
                                 "--zoom", "0.1,0.5",
                                 "--out", str(tmp_path / "p.png")])
        assert code == 0
        _assert_image(tmp_path / "p.png")

    def test_field_command(self, fixtures, tmp_path):
        code = cli.field2d_main([str(fixtures["snap2d"]), "--variable", "rho",
                                 "--scale", "log", "--contours", "4",
                                 "--crop", "0,1,0,1",
                                 "--out", str(tmp_path / "f.png")])
        assert code == 0
        _assert_image(tmp_path / "f.png")

    def test_convergence_command(self, fixtures, tmp_path):
        code = cli.convergence_main([str(fixtures["table"]),
                                     "--out", str(tmp_path / "c.png")])
        assert code == 0
        _assert_image(tmp_path / "c.png")

    def test_alpha_command(self, fixtures, tmp_path):
        code = cli.alpha_stats_main([str(fixtures["manifest"]),
                                     "--out", str(tmp_path / "a.png")])
        assert code == 0
        _assert_image(tmp_path / "a.png")


def test_acceptance_criterion_11(fixtures, tmp_path):
    """Secondary acceptance: every figure type regenerates from fixture
    files without error, image files are non-empty, inputs schema-validated."""
    from lwblend_postproc import read_snapshot

    for key in ("snap1d", "snap2d", "snap2d_uniform"):
        read_snapshot(fixtures[key])  # schema validation
    images = [
        plot_profile(fixtures["snap1d"], "rho", tmp_path / "a1.png",
                     reference_path=fixtures["ref1d"], zoom=(0.3, 0.7)),
        plot_field2d(fixtures["snap2d"], "rho", tmp_path / "a2.png",
                     scale="log", contours=3),
        plot_field2d(fixtures["snap2d"], "alpha", tmp_path / "a3.png"),
        plot_convergence(fixtures["table"], tmp_path / "a4.png"),
        plot_alpha_stats(fixtures["manifest"], tmp_path / "a5.png"),
    ]
    for img in images:
        _assert_image(img)
    print("\nACCEPTANCE 11: PASS — profile/field/alpha-stat/convergence "
          "figures regenerated from fixture files")

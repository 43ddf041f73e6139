from pathlib import Path

import numpy as np
import pytest

from plotkit.cli import main
from plotkit.figures import (
    cumulative_weights,
    loss_series,
    plane_vertices,
    plot_cumulative_distribution,
    plot_loss_curves,
    plot_simplex_trajectory,
    trajectory_markers,
    trajectory_points,
)
from plotkit.traces import load_bundle, load_final_probs

FIXTURES = Path(__file__).parent / "fixtures"


class TestTraceLoading:
    def test_bundle_has_all_seeds(self):
        bundle = load_bundle(FIXTURES / "loss_run")
        assert [t.seed for t in bundle.traces] == [1, 2]
        assert bundle.metadata["target.n"] == "2"

    def test_empty_directory_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            load_bundle(tmp_path)

    def test_header_mismatch_rejected(self, tmp_path):
        (tmp_path / "x_seed1.csv").write_text("iteration,loss\n1,0.5\n")
        (tmp_path / "x_seed2.csv").write_text("iteration,cost\n1,0.5\n")
        with pytest.raises(ValueError):
            load_bundle(tmp_path)

    def test_final_probs(self):
        specs = load_final_probs(FIXTURES / "final_run")
        assert specs[0] == {"II": 0.7, "XY": 0.3}


class TestLossFigure:
    def test_renders_without_error(self, tmp_path):
        bundle = load_bundle(FIXTURES / "loss_run")
        out = tmp_path / "loss.png"
        plot_loss_curves(bundle, out)
        assert out.exists() and out.stat().st_size > 0

    def test_per_qubit_normalization_divides_by_exactly_n(self):
        bundle = load_bundle(FIXTURES / "loss_run")
        _, raw = loss_series(bundle, "none")
        _, per_qubit = loss_series(bundle, "qubits")
        for a, b in zip(raw, per_qubit):
            assert np.allclose(a / 2.0, b)

    def test_rerender_overwrites_same_file(self, tmp_path):
        bundle = load_bundle(FIXTURES / "loss_run")
        out = tmp_path / "loss.png"
        plot_loss_curves(bundle, out)
        plot_loss_curves(bundle, out)
        assert out.exists()

    def test_missing_loss_column_is_named_error(self, tmp_path):
        (tmp_path / "x_seed1.csv").write_text("iteration,value\n1,0.5\n")
        bundle = load_bundle(tmp_path)
        with pytest.raises(ValueError, match="loss"):
            plot_loss_curves(bundle, tmp_path / "x.png")


class TestSimplexFigure:
    def test_renders_without_error(self, tmp_path):
        bundle = load_bundle(FIXTURES / "simplex_run", "pauli_seed*.csv")
        out = tmp_path / "simplex.png"
        plot_simplex_trajectory(bundle, out, plane_sum=0.4)
        assert out.exists() and out.stat().st_size > 0

    def test_plane_position_from_sidecar(self, tmp_path):
        bundle = load_bundle(FIXTURES / "simplex_run", "pauli_seed*.csv")
        # p_identity = 0.6 in the sidecar -> plane at 0.4
        out = tmp_path / "simplex.png"
        plot_simplex_trajectory(bundle, out)
        assert out.exists()

    def test_plane_vertices_sum_to_plane_value(self):
        verts = plane_vertices(0.4)
        assert np.allclose(verts.sum(axis=1), 0.4)

    def test_markers_are_middle_and_last_rows(self):
        bundle = load_bundle(FIXTURES / "simplex_run", "pauli_seed*.csv")
        path = trajectory_points(bundle)[0]
        start, mid, final = trajectory_markers(path)
        assert np.allclose(start, [0.2, 0.2, 0.2])
        assert np.allclose(mid, [0.1, 0.25, 0.1])  # row index 5 // 2 = 2
        assert np.allclose(final, [0.05, 0.3, 0.05])

    def test_single_row_trace_markers_coincide(self, tmp_path):
        (tmp_path / "pauli_seed1.csv").write_text(
            "iteration,loss,p_I,p_X,p_Y,p_Z\n1,0.0,0.6,0.05,0.3,0.05\n"
        )
        bundle = load_bundle(tmp_path, "pauli_seed*.csv")
        start, mid, final = trajectory_markers(trajectory_points(bundle)[0])
        assert np.allclose(start, mid) and np.allclose(mid, final)

    def test_missing_columns_rejected(self):
        bundle = load_bundle(FIXTURES / "loss_run")
        with pytest.raises(ValueError, match="p_X"):
            trajectory_points(bundle)


class TestCumulativeFigure:
    def test_renders_without_error(self, tmp_path):
        specs = load_final_probs(FIXTURES / "final_run")
        out = tmp_path / "cumulative.png"
        plot_cumulative_distribution(specs, out)
        assert out.exists() and out.stat().st_size > 0

    def test_two_weight_endpoints(self):
        cum = cumulative_weights({"II": 0.7, "XY": 0.3})
        assert np.allclose(cum, [0.7, 1.0])

    def test_uniform_four_vector(self):
        cum = cumulative_weights({"I": 0.25, "X": 0.25, "Y": 0.25, "Z": 0.25})
        assert np.allclose(cum, [0.25, 0.5, 0.75, 1.0])

    def test_curves_monotone_and_end_at_one(self):
        for spec in load_final_probs(FIXTURES / "final_run"):
            cum = cumulative_weights(spec)
            assert np.all(np.diff(cum) >= -1e-12)
            assert cum[-1] == pytest.approx(1.0)


class TestCli:
    def test_all_three_figure_kinds_from_fixtures(self, tmp_path):
        jobs = [
            ("loss", FIXTURES / "loss_run", {}),
            ("simplex", FIXTURES / "simplex_run", {}),
            ("cumulative", FIXTURES / "final_run", {}),
        ]
        for kind, src, _ in jobs:
            out = tmp_path / f"{kind}.png"
            assert main([kind, "--in", str(src), "--out", str(out)]) == 0
            assert out.exists() and out.stat().st_size > 0

    def test_loss_normalization_flag(self, tmp_path):
        out = tmp_path / "loss.png"
        rc = main(
            ["loss", "--in", str(FIXTURES / "loss_run"), "--out", str(out),
             "--normalization", "qubits"]
        )
        assert rc == 0 and out.exists()

    def test_plane_flag(self, tmp_path):
        out = tmp_path / "simplex.png"
        rc = main(
            ["simplex", "--in", str(FIXTURES / "simplex_run"), "--out", str(out),
             "--plane", "0.4"]
        )
        assert rc == 0 and out.exists()

    def test_missing_inputs_exit_nonzero(self, tmp_path, capsys):
        rc = main(["loss", "--in", str(tmp_path), "--out", str(tmp_path / "x.png")])
        assert rc == 1
        assert "plotkit error" in capsys.readouterr().err


class TestSecondaryAcceptance:
    def test_golden_fixture_acceptance(self, tmp_path):
        # all three figure kinds render; plane position and cumulative
        # endpoints match the fixture values exactly
        bundle = load_bundle(FIXTURES / "simplex_run", "pauli_seed*.csv")
        plane_from_sidecar = 1.0 - float(bundle.metadata["plane.p_identity"])
        assert plane_from_sidecar == 0.4
        assert np.allclose(plane_vertices(plane_from_sidecar).sum(axis=1), 0.4)
        for spec in load_final_probs(FIXTURES / "final_run"):
            assert np.allclose(cumulative_weights(spec), [0.7, 1.0])
        for kind, src in (
            ("loss", FIXTURES / "loss_run"),
            ("simplex", FIXTURES / "simplex_run"),
            ("cumulative", FIXTURES / "final_run"),
        ):
            out = tmp_path / f"{kind}.png"
            assert main([kind, "--in", str(src), "--out", str(out)]) == 0
            assert out.stat().st_size > 0
        print("ACCEPTANCE plotkit golden fixtures: PASS")

"""End-to-end: render the primary suite's real CSV outputs, unmodified.

The primary package is driven through its command-line interface only;
this package touches nothing but the CSV files it leaves behind.
"""

import shutil
import subprocess
import sys

import pytest

from vsaplots import PlotJob, render

HAVE_PRIMARY = shutil.which("phasorvsa") is not None


@pytest.fixture(scope="module")
def spatial_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("spatial")
    subprocess.run(
        ["phasorvsa", "spatial", "--out", str(out), "--dim", "200"],
        check=True, capture_output=True,
    )
    return out


@pytest.fixture(scope="module")
def stopwatch_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("stopwatch")
    subprocess.run(
        ["phasorvsa", "stopwatch", "--out", str(out)],
        check=True, capture_output=True,
    )
    return out


@pytest.mark.skipif(not HAVE_PRIMARY, reason="phasorvsa CLI not installed")
class TestAgainstPrimaryOutputs:
    def test_bars_from_stopwatch_reports(self, stopwatch_out, tmp_path):
        reports = sorted(stopwatch_out.glob("stopwatch_*.csv"))
        assert len(reports) == 6
        for report in reports:
            fig_path = tmp_path / (report.stem + ".svg")
            fig = render(PlotJob(report, "bars", fig_path))
            assert fig_path.exists() and fig_path.stat().st_size > 0
            assert len(fig.axes[0].patches) == 5  # one bar per vocabulary entry

    def test_sweep_with_reference_lines(self, spatial_out, tmp_path):
        sweep_csv = spatial_out / "ssp_sweeps.csv"
        fig_path = tmp_path / "sweep.svg"
        fig = render(PlotJob(sweep_csv, "sweep", fig_path,
                             annotations=[1.85, -0.65]))
        assert fig_path.exists()
        ax = fig.axes[0]
        curves = [ln for ln in ax.lines if ln.get_linestyle() == "-"]
        assert len(curves) == 2  # q1 and q2
        dotted = sorted(ln.get_xdata()[0] for ln in ax.lines
                        if ln.get_linestyle() == ":")
        assert dotted == [-0.65, 1.85]
        # the curves actually peak near the annotated locations
        for ln, x0 in zip(curves, (1.85, -0.65)):
            xs, ys = ln.get_xdata(), ln.get_ydata()
            peak_x = xs[max(range(len(ys)), key=lambda i: ys[i])]
            assert abs(peak_x - x0) <= 0.05

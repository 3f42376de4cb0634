import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from plot_sweep import ColumnError, PlotSpec, aggregate, dump_series, main, read_rows

HEADER = ("experiment,method,grid_value,run,secrecy_mc,secrecy_mc_stderr,"
          "secrecy_model,R,wall_time_s,seed,error")


def write_csv(path, rows):
    path.write_text(HEADER + "\n" + "\n".join(rows) + "\n", encoding="utf-8")


def headline_csv(path):
    """CSV with the shape of the security-headline sweep: two methods, one
    Rician grid point, ten runs each."""
    rows = []
    for run in range(10):
        rows.append(f"rician_sweep,sco,30.0,{run},"
                    f"{1.0 + 0.05 * run!r},0.01,0.9,2.0,1.5,{run},")
        rows.append(f"rician_sweep,direct,30.0,{run},"
                    f"{0.001 * run!r},0.0005,4.0,4.0,0.7,{run},")
    write_csv(path, rows)


def spec_for(path, out, **kw):
    base = dict(csv_path=str(path), x_column="grid_value",
                y_column="secrecy_mc", group_column="method",
                output_path=str(out))
    base.update(kw)
    return PlotSpec(**base)


class TestAggregate:
    def test_two_methods_three_points(self, tmp_path):
        rows = []
        for m, base in (("sco", 1.0), ("direct", 0.1)):
            for gv in (10.0, 20.0, 30.0):
                for run in range(2):
                    rows.append(f"rician_sweep,{m},{gv},{run},"
                                f"{base + 0.01 * run},0.01,0.5,1.0,1.0,7,")
        path = tmp_path / "s.csv"
        write_csv(path, rows)
        spec = spec_for(path, tmp_path / "plot")
        series = aggregate(spec, read_rows(spec))
        assert sorted(series) == ["direct", "sco"]
        for pts in series.values():
            assert len(pts) == 3
            assert [p[0] for p in pts] == [10.0, 20.0, 30.0]
        assert series["sco"][0][1] == pytest.approx(1.005)

    def test_error_rows_skipped(self, tmp_path):
        rows = ["rician_sweep,sco,10.0,0,1.0,0.01,0.5,1.0,1.0,7,",
                "rician_sweep,sco,10.0,1,,,,,,7,RuntimeError: boom"]
        path = tmp_path / "s.csv"
        write_csv(path, rows)
        spec = spec_for(path, tmp_path / "plot")
        series = aggregate(spec, read_rows(spec))
        assert len(series["sco"]) == 1
        assert series["sco"][0][1] == 1.0

    def test_single_run_uses_row_stderr(self, tmp_path):
        rows = ["rician_sweep,sco,10.0,0,1.0,0.25,0.5,1.0,1.0,7,"]
        path = tmp_path / "s.csv"
        write_csv(path, rows)
        spec = spec_for(path, tmp_path / "plot",
                        y_error_column="secrecy_mc_stderr")
        series = aggregate(spec, read_rows(spec))
        assert series["sco"][0][2] == 0.25


class TestRenderSweep:
    def test_headline_two_line_chart(self, tmp_path):
        path = tmp_path / "headline.csv"
        headline_csv(path)
        out = tmp_path / "headline_plot"
        rc = main(["--csv", str(path), "--out", str(out),
                   "--yerr", "secrecy_mc_stderr"])
        assert rc == 0
        assert (tmp_path / "headline_plot.png").exists()
        assert (tmp_path / "headline_plot.svg").exists()
        spec = spec_for(path, out, y_error_column="secrecy_mc_stderr")
        series = aggregate(spec, read_rows(spec))
        assert len(series) == 2  # one line per method
        assert all(len(pts) == 1 for pts in series.values())

    def test_single_row(self, tmp_path):
        path = tmp_path / "one.csv"
        write_csv(path, ["rician_sweep,sco,10.0,0,1.0,0.01,0.5,1.0,1.0,7,"])
        rc = main(["--csv", str(path), "--out", str(tmp_path / "one")])
        assert rc == 0
        assert (tmp_path / "one.png").exists()

    def test_missing_column_fails_loudly(self, tmp_path, capsys):
        path = tmp_path / "h.csv"
        headline_csv(path)
        rc = main(["--csv", str(path), "--y", "secrecy_typo",
                   "--out", str(tmp_path / "x")])
        assert rc != 0
        err = capsys.readouterr().err
        assert "secrecy_typo" in err

    def test_missing_column_exception_names_column(self, tmp_path):
        path = tmp_path / "h.csv"
        headline_csv(path)
        spec = spec_for(path, tmp_path / "x", x_column="nope")
        with pytest.raises(ColumnError, match="nope"):
            read_rows(spec)


class TestDeterminism:
    def test_dump_identical(self, tmp_path, capsys):
        path = tmp_path / "h.csv"
        headline_csv(path)
        argv = ["--csv", str(path), "--dump"]
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        second = capsys.readouterr().out
        assert first == second
        assert "sco" in first and "direct" in first

    def test_svg_bytes_identical(self, tmp_path):
        path = tmp_path / "h.csv"
        headline_csv(path)
        out1 = tmp_path / "p1"
        out2 = tmp_path / "p2"
        for out in (out1, out2):
            assert main(["--csv", str(path), "--out", str(out)]) == 0
        svg1 = (tmp_path / "p1.svg").read_bytes()
        svg2 = (tmp_path / "p2.svg").read_bytes()
        assert svg1 == svg2

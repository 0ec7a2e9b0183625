import json
from pathlib import Path

import pytest

from d2dplots.cli import main
from d2dplots.render import MissingColumnError, PlotSpec, RenderError, render

FIXTURES = Path(__file__).parent / "fixtures"


def _write_csv(path: Path, header: str, rows):
    path.write_text(header + "\n" + "\n".join(",".join(map(str, r)) for r in rows) + "\n")


class TestRender:
    def test_scaling_smoke(self, tmp_path):
        out = tmp_path / "scaling.png"
        meta = render(
            PlotSpec(str(FIXTURES / "scaling_fixture.csv"), "scaling", str(out))
        )
        assert out.exists() and out.stat().st_size > 0
        assert meta["slope"] == pytest.approx(1.0, abs=0.1)

    def test_r_profile_smoke(self, tmp_path):
        out = tmp_path / "profile.png"
        meta = render(
            PlotSpec(str(FIXTURES / "r_profile_fixture.csv"), "r-profile", str(out))
        )
        assert out.exists() and out.stat().st_size > 0
        assert meta["r_star"] > 0

    def test_goodness_smoke(self, tmp_path):
        csv = tmp_path / "g.csv"
        _write_csv(
            csv,
            "k,empirical,lower,upper",
            [(1, 0.0, 0.0, 0.1), (2, 0.3, 0.2, 0.6), (3, 0.5, 0.3, 0.8)],
        )
        out = tmp_path / "g.png"
        render(PlotSpec(str(csv), "goodness-bounds", str(out)))
        assert out.exists() and out.stat().st_size > 0

    def test_synthetic_identity_slope(self, tmp_path):
        csv = tmp_path / "identity.csv"
        _write_csv(csv, "n,L_greedy_mean", [(x, x) for x in (10, 100, 1000, 10000)])
        meta = render(PlotSpec(str(csv), "scaling", str(tmp_path / "i.png")))
        assert meta["slope"] == pytest.approx(1.00, abs=0.01)

    def test_empty_csv_errors(self, tmp_path):
        csv = tmp_path / "empty.csv"
        csv.write_text("n,L_greedy_mean\n")
        with pytest.raises(RenderError):
            render(PlotSpec(str(csv), "scaling", str(tmp_path / "e.png")))

    def test_missing_column_named(self, tmp_path):
        csv = tmp_path / "m.csv"
        _write_csv(csv, "n,other", [(1, 2), (3, 4)])
        with pytest.raises(MissingColumnError) as err:
            render(PlotSpec(str(csv), "scaling", str(tmp_path / "m.png")))
        assert err.value.column == "L_greedy_mean"

    def test_byte_stable_rerun(self, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        spec = PlotSpec(str(FIXTURES / "scaling_fixture.csv"), "scaling", str(a))
        render(spec)
        render(PlotSpec(spec.csv_path, spec.kind, str(b)))
        assert a.read_bytes() == b.read_bytes()


class TestCli:
    def test_default_output_next_to_csv(self, tmp_path, capsys):
        csv = tmp_path / "rows.csv"
        csv.write_bytes((FIXTURES / "scaling_fixture.csv").read_bytes())
        code = main(["--csv", str(csv), "--kind", "scaling"])
        out = capsys.readouterr().out
        assert code == 0
        assert (tmp_path / "rows.scaling.png").exists()
        assert json.loads(out)["kind"] == "scaling"

    def test_missing_column_exit_2(self, tmp_path, capsys):
        csv = tmp_path / "bad.csv"
        _write_csv(csv, "n,other", [(1, 2), (3, 4)])
        code = main(["--csv", str(csv), "--kind", "scaling", "--out", str(tmp_path / "x.png")])
        err = capsys.readouterr().err
        assert code == 2
        assert "L_greedy_mean" in err

    def test_unknown_kind_exit_2(self, tmp_path):
        assert main(["--csv", "x.csv", "--kind", "pie"]) == 2

import json
from pathlib import Path

import numpy as np
import pytest

from regcap import cli
from regcap import signals as sig

GOLDEN = Path(__file__).parent / "golden_benchmark.csv"


def _signals_csv(path, hours=4, seed=11, samples=300):
    trajs = sig.synthesize_trajectories(hours, seed=seed, samples_per_hour=samples)
    with open(path, "w", encoding="utf-8") as fh:
        sig.write_signals_csv(trajs, fh)
    return path


class TestConfig:
    def test_comments_and_values(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("# a comment\n eps = 0.3  # trailing\n\nbins=7\n"
                     "strategy = robust\n")
        cfg = cli.load_config(p)
        assert cfg == {"eps": 0.3, "bins": 7, "strategy": "robust"}

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("zap = 1\n")
        with pytest.raises(ValueError, match="unknown key"):
            cli.load_config(p)

    def test_bad_value(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("bins = many\n")
        with pytest.raises(ValueError, match="bad value"):
            cli.load_config(p)

    def test_flag_overrides_config(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("eps = 0.3\nseed = 9\n")
        sigs = _signals_csv(tmp_path / "s.csv")
        out = tmp_path / "stats.json"
        rc = cli.main(["stats", "--signals", str(sigs), "--config", str(p),
                       "--bins", "5", "--samples-per-hour", "300",
                       "--out", str(out)])
        assert rc == 0
        assert json.loads(out.read_text())  # parses


class TestExitCodes:
    def test_missing_file(self, capsys):
        rc = cli.main(["stats", "--signals", "/nonexistent.csv"])
        assert rc == cli.EXIT_MISSING_FILE
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "FileNotFoundError"

    def test_validation_failure(self, tmp_path, capsys):
        sigs = _signals_csv(tmp_path / "s.csv")
        rc = cli.main(["stats", "--signals", str(sigs),
                       "--samples-per-hour", "300", "--eps", "0.9"])
        assert rc == cli.EXIT_VALIDATION

    def test_malformed_signals(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("hour_id,step,signal\nh0,1,zap\n")
        rc = cli.main(["aggregate", "--signals", str(p),
                       "--samples-per-hour", "300"])
        assert rc == cli.EXIT_VALIDATION


class TestAggregate:
    def test_zero_hour_minutes(self, tmp_path, capsys):
        p = tmp_path / "s.csv"
        rows = [f"h0,{d},0" for d in range(1, 301)]
        p.write_text("hour_id,step,signal\n" + "\n".join(rows) + "\n")
        rc = cli.main(["aggregate", "--signals", str(p),
                       "--samples-per-hour", "300"])
        assert rc == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0] == "hour_id,s_up,s_dn,dt_up_min,dt_dn_min,mileage,s_mean"
        fields = out[1].split(",")
        assert fields[0] == "h0"
        assert float(fields[3]) == 60.0  # ties count as regulation-up time
        assert float(fields[4]) == 0.0

    def test_weighted_mean_consistency(self, tmp_path, capsys):
        sigs = _signals_csv(tmp_path / "s.csv")
        rc = cli.main(["aggregate", "--signals", str(sigs),
                       "--samples-per-hour", "300"])
        assert rc == 0
        for line in capsys.readouterr().out.strip().splitlines()[1:]:
            _, s_up, s_dn, up_min, dn_min, _, s_mean = line.split(",")
            got = (float(up_min) * float(s_up) + float(dn_min) * float(s_dn)) / 60.0
            assert abs(got - float(s_mean)) < 1e-7


class TestOfferPipeline:
    def test_da_ha_simulate(self, tmp_path):
        da = tmp_path / "da.json"
        rc = cli.main(["offer-da", "--seed", "4", "--out", str(da)])
        assert rc == 0
        da_doc = json.loads(da.read_text())
        assert len(da_doc["p_gr_da"]) == 6
        assert all(r >= -1e-9 for r in da_doc["r_da"])

        ha = tmp_path / "ha.json"
        rc = cli.main(["offer-ha", "--da", str(da), "--hour", "0",
                       "--seed", "4", "--out", str(ha)])
        assert rc == 0
        ha_doc = json.loads(ha.read_text())
        assert ha_doc["r"] >= 0.0
        assert ha_doc["strategy"] == "proposed"

        offers = tmp_path / "offers.jsonl"
        offers.write_text(json.dumps({"hour": 0, "r": ha_doc["r"],
                                      "p_gr_ha": ha_doc["p_gr_ha"],
                                      "strategy": "proposed"}) + "\n")
        realized = tmp_path / "real.csv"
        _signals_csv(realized, hours=1, seed=99, samples=900)
        ledger = tmp_path / "ledger.csv"
        rc = cli.main(["simulate", "--offers", str(offers),
                       "--signals", str(realized), "--da", str(da),
                       "--seed", "4", "--out", str(ledger)])
        assert rc == 0
        lines = ledger.read_text().strip().splitlines()
        assert lines[0].startswith("hour,strategy,r_offer")
        fields = lines[1].split(",")
        assert fields[0] == "0" and fields[1] == "proposed"
        score = float(fields[5])
        assert 0.0 <= score <= 1.0

    def test_offer_ha_bad_hour(self, tmp_path):
        da = tmp_path / "da.json"
        assert cli.main(["offer-da", "--seed", "4", "--out", str(da)]) == 0
        rc = cli.main(["offer-ha", "--da", str(da), "--hour", "99",
                       "--seed", "4"])
        assert rc == cli.EXIT_VALIDATION


class TestBenchmark:
    def test_matches_golden_and_deterministic(self, tmp_path):
        out1 = tmp_path / "b1.csv"
        out2 = tmp_path / "b2.csv"
        summ = tmp_path / "summary.json"
        rc = cli.main(["benchmark", "--days", "1", "--seed", "0",
                       "--out", str(out1), "--summary", str(summ)])
        assert rc == 0
        rc = cli.main(["benchmark", "--days", "1", "--seed", "0",
                       "--out", str(out2)])
        assert rc == 0
        assert out1.read_bytes() == out2.read_bytes()
        assert out1.read_bytes() == GOLDEN.read_bytes()
        summary = json.loads(summ.read_text())
        assert set(summary) == {"proposed", "robust", "determ", "ignore_eff"}
        for rec in summary.values():
            assert 0.0 <= rec["mean_score"] <= 1.0


class TestReport:
    SERIES = [
        (0.5, 0.91, 0.4, 30.0, 22.0),
        (0.725, 0.95, 0.2, 26.0, 21.0),
        (0.95, 0.99, 0.05, 20.0, 18.0),
    ]

    def _ledger(self, path):
        lines = [cli.REPORT_HEADER]
        lines += [",".join(f"{v:.9g}" for v in row) for row in self.SERIES]
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_replot_from_ledger(self, tmp_path, capsys):
        ledger = self._ledger(tmp_path / "series.csv")
        rc = cli.main(["report", "--ledger", str(ledger),
                       "--outdir", str(tmp_path)])
        assert rc == 0
        printed = capsys.readouterr().out.strip().splitlines()
        assert len(printed) == 3
        for name in ("report_series.csv", "score_vs_confidence.png",
                     "revenue_vs_confidence.png"):
            f = tmp_path / name
            assert f.exists() and f.stat().st_size > 0
        back = cli._read_series(tmp_path / "report_series.csv")
        np.testing.assert_allclose(np.array(back), np.array(self.SERIES),
                                   rtol=1e-7)

    def test_bad_header(self, tmp_path):
        bad = tmp_path / "series.csv"
        bad.write_text("confidence,score\n0.5,0.9\n")
        rc = cli.main(["report", "--ledger", str(bad),
                       "--outdir", str(tmp_path)])
        assert rc == cli.EXIT_VALIDATION

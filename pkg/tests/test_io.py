import json
import math

import numpy as np
import pytest

from screenlab import io
from screenlab.dgp import DiscreteDgpConfig, generate_discrete
from screenlab.errors import SchemaError
from screenlab.estimators import estimate
from screenlab.montecarlo import REP_COLUMNS, Scenario, run_scenario
from screenlab.screening import apply_screen


@pytest.fixture
def sample():
    return generate_discrete(DiscreteDgpConfig(n=500, eps1=0.1, eps2=0.1), seed=3)


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestDatasetRoundTrip:
    def test_bitwise(self, sample, tmp_path):
        p = tmp_path / "s.csv"
        io.write_dataset(sample, p)
        back = io.read_dataset(p)
        assert back.y.tobytes() == sample.y.tobytes()
        assert np.array_equal(back.z, sample.z) and np.array_equal(back.d, sample.d)
        assert np.array_equal(back.stated_complier, sample.stated_complier)
        assert np.array_equal(back.true_type, sample.true_type)
        for m in ("no_screen", "oracle_complier", "stated_complier"):
            assert estimate(apply_screen(back, m)) == estimate(apply_screen(sample, m))

    def test_column_order(self, sample, tmp_path):
        p = tmp_path / "s.csv"
        io.write_dataset(sample, p)
        assert p.read_text().splitlines()[0] == "z,d,y,stated_complier,true_type"
        assert p.read_text().endswith("\n")

    def test_optional_columns(self, sample, tmp_path):
        p = tmp_path / "s.csv"
        io.write_dataset(sample.without_stated_types().replace(true_type=None), p)
        back = io.read_dataset(p)
        assert p.read_text().splitlines()[0] == "z,d,y"
        assert back.stated_complier is None and back.true_type is None

    def test_header_any_order(self, tmp_path):
        s = io.read_dataset(write(tmp_path, "y,true_type,d,z\n1.5,c,1,1\n0.5,n,0,0\n"))
        assert s.y.tolist() == [1.5, 0.5] and s.z.tolist() == [1, 0]


class TestSchemaErrors:
    @pytest.mark.parametrize(
        "text, row, column",
        [
            ("z,d,y\n1,1,0.5\n0,2,1.0\n", 3, "d"),
            ("z,d,y\n1,1,abc\n", 2, "y"),
            ("z,d,y\n1,1,nan\n", 2, "y"),
            ("z,d,y,true_type\n1,1,0.5,x\n", 2, "true_type"),
            ("z,d,y,stated_complier\n1,1,0.5,yes\n", 2, "stated_complier"),
        ],
    )
    def test_bad_field(self, tmp_path, text, row, column):
        with pytest.raises(SchemaError) as info:
            io.read_dataset(write(tmp_path, text))
        assert info.value.row == row and info.value.column == column
        assert f"row {row}" in str(info.value) and repr(column) in str(info.value)

    @pytest.mark.parametrize(
        "text, fragment",
        [
            ("", "header"),
            ("z,d\n1,1\n", "missing required column 'y'"),
            ("z,d,y,w\n1,1,1,1\n", "unknown column 'w'"),
            ("z,d,y,y\n1,1,1,1\n", "duplicate"),
            ("z,d,y\n", "no data rows"),
            ("z,d,y\n1,1\n", "expected 3 fields"),
        ],
    )
    def test_bad_structure(self, tmp_path, text, fragment):
        with pytest.raises(SchemaError, match=fragment):
            io.read_dataset(write(tmp_path, text))

    def test_non_binary_treatment_not_written(self, tmp_path):
        from screenlab.dgp import GaussianDgpConfig, generate_gaussian

        with pytest.raises(SchemaError):
            io.write_dataset(generate_gaussian(GaussianDgpConfig(), 1.0, 0), tmp_path / "g.csv")


class TestRepTable:
    @pytest.fixture
    def table(self):
        cfg = DiscreteDgpConfig(n=60, eps2=1.0, eps1=0.0)
        return run_scenario(Scenario(dgp=cfg, mechanisms=("no_screen", "stated_complier"), n_reps=3))

    def test_csv(self, table, tmp_path):
        p = tmp_path / "reps.csv"
        io.write_rep_table_csv(table, p)
        lines = p.read_text().splitlines()
        assert lines[0] == ",".join(REP_COLUMNS)
        rows = io.read_rep_table_csv(p)
        assert len(rows) == 6
        assert rows[0]["discarded"] == "0" and rows[1]["discarded"] == "1"
        assert rows[1]["beta_hat"] == "nan" and rows[1]["reason"] == "empty_screen"
        assert float(rows[0]["beta_hat"]) == table.rows[0].beta_hat

    def test_json(self, table, tmp_path):
        p = tmp_path / "reps.json"
        io.write_rep_table_json(table, p)
        doc = json.loads(p.read_text())
        assert doc["schema_version"] == io.SCHEMA_VERSION
        assert doc["columns"] == list(REP_COLUMNS)
        assert doc["rows"][1]["beta_hat"] is None


class TestJson:
    def test_schema_version_and_nan(self):
        text = io.dump_json({"a": math.nan, "b": np.float64(1.5), "c": (np.int64(2),)})
        doc = json.loads(text)
        assert doc == {"schema_version": io.SCHEMA_VERSION, "a": None, "b": 1.5, "c": [2]}

    def test_dataclass(self, sample):
        doc = json.loads(io.dump_json({"e": estimate(apply_screen(sample, "no_screen"))}))
        assert set(doc["e"]) >= {"beta_hat", "se", "sign_screen_pass"}

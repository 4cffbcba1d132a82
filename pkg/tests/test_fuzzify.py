import math

import pytest

from oracle import FORMULAS, TABLE1, VARIABLES
from softrisk.config import DatasetConfig, dumps
from softrisk.errors import ConfigurationError, DuplicateIdError, InvalidGridError, InvalidInputError
from softrisk.fuzzify import (
    LinguisticVariable,
    PatientRecord,
    Term,
    TriangularMF,
    default_dengue_config,
    fuzzify_table,
    mf_eval,
    term_memberships,
)

CHILD = TriangularMF.triangle(2, 9, 16)
YOUNG = TriangularMF.triangle(15, 30, 45)
BP_LOW = TriangularMF.triangle(120, 127, 134)


def _var(config, name):
    return next(v for v in config if v.name == name)


@pytest.mark.parametrize(
    "mf, x, expected",
    [
        (CHILD, 6, 4 / 7),
        (CHILD, 9, 1.0),
        (YOUNG, 14, 0.0),
        (BP_LOW, 125, 5 / 7),
        (CHILD, 2, 0.0),
        (CHILD, 16, 0.0),
        (CHILD, 1.999, 0.0),
        (CHILD, 12.5, 0.5),
    ],
)
def test_mf_eval_points(mf, x, expected):
    assert mf_eval(mf, x) == pytest.approx(expected, abs=1e-15)


def test_child_six_rounds_to_published_value():
    assert round(mf_eval(CHILD, 6), 2) == 0.57


@pytest.mark.parametrize("x", [math.nan, math.inf, -math.inf])
def test_mf_eval_rejects_non_finite(x):
    with pytest.raises(InvalidInputError):
        mf_eval(CHILD, x)


def test_breakpoints_agree_between_pieces():
    # Both closed pieces must give the same value at the shared apex.
    for mf in (CHILD, YOUNG, BP_LOW):
        apex = mf.apex_lo
        rising = (apex - mf.left) / (mf.apex_lo - mf.left)
        falling = (mf.right - apex) / (mf.right - mf.apex_hi)
        assert rising == falling == mf_eval(mf, apex) == 1.0


def test_trapezoid_plateau():
    mf = TriangularMF(0, 2, 4, 10)
    assert mf_eval(mf, 1) == 0.5
    assert mf_eval(mf, 3) == 1.0
    assert mf_eval(mf, 7) == 0.5
    assert not mf.is_triangle


def test_vertical_edge_is_one_at_the_edge():
    mf = TriangularMF(5, 5, 5, 10)
    assert mf_eval(mf, 5) == 1.0
    assert mf_eval(mf, 4.999) == 0.0


@pytest.mark.parametrize("points", [(3, 2, 2, 4), (0, 1, 0.5, 2), (0, 1, 1, -1), (0, math.nan, 1, 2)])
def test_bad_breakpoints(points):
    with pytest.raises(ConfigurationError):
        TriangularMF(*points)


def test_term_memberships_sgot():
    sgot = _var(default_dengue_config(), "sgot")
    got = term_memberships(sgot, 46)
    assert list(got) == ["low", "medium", "high"]
    assert got["low"] == 0.0
    assert got["medium"] == pytest.approx(0.5)
    assert got["high"] == pytest.approx(0.2)


def test_term_memberships_beyond_every_range():
    age = _var(default_dengue_config(), "age")
    assert term_memberships(age, 100) == {"child": 0.0, "young": 0.0, "old": 0.0}


def test_term_memberships_tlc():
    tlc = _var(default_dengue_config(), "tlc")
    got = term_memberships(tlc, 3650)
    assert got["low"] == pytest.approx(0.6)
    assert got["medium"] == 0.0 and got["high"] == 0.0


def test_single_record_sgot_low():
    rec = PatientRecord("v16", dict(zip(VARIABLES, TABLE1["v16"])))
    table = fuzzify_table([rec], default_dengue_config())
    assert table.membership("v16", "sgot", "low") == pytest.approx(13 / 15)
    assert table.membership("v16", "sgot", "medium") == 0.0


def test_empty_variable_list_gives_universe_only(records):
    table = fuzzify_table(records, [])
    assert table.universe == tuple(r.id for r in records)
    assert len(table.entries) == 0


def test_missing_value_names_record_and_variable(config):
    rec = PatientRecord("x1", {"age": 30, "tlc": 5000, "sgot": 40, "bp": 120})
    with pytest.raises(ConfigurationError, match=r"x1.*platelets"):
        fuzzify_table([rec], config.variables)


def test_duplicate_ids_rejected(config):
    rec = PatientRecord("x1", dict(zip(VARIABLES, TABLE1["v1"])))
    with pytest.raises(DuplicateIdError):
        fuzzify_table([rec, rec], config.variables)


def test_non_finite_record_value():
    with pytest.raises(InvalidInputError):
        PatientRecord("x", {"age": math.inf})


def test_table_matches_exact_formulas(records, config):
    table = fuzzify_table(records, config.variables)
    assert table.universe == tuple(f"v{i}" for i in range(1, 31))
    assert len(table.entries) == 30 * 15
    for (pid, var, term), value in table.entries.items():
        exact = FORMULAS[(var, term)](TABLE1[pid][VARIABLES.index(var)])
        assert value == pytest.approx(float(exact), abs=1e-12), (pid, var, term)
        assert 0.0 <= value <= 1.0


def test_fuzzify_is_pure(records, config):
    a = fuzzify_table(records, config.variables)
    b = fuzzify_table(records, config.variables)
    assert a == b


def test_out_of_support_flagged(config):
    rec = PatientRecord("old-timer", {"age": 95, "tlc": 5000, "sgot": 40, "platelets": 200000, "bp": 130})
    table = fuzzify_table([rec], config.variables)
    assert table.out_of_support() == [("old-timer", "age")]


def test_default_config_breakpoints():
    cfg = {v.name: v for v in default_dengue_config()}
    assert [v for v in cfg] == ["age", "tlc", "sgot", "platelets", "bp"]
    medium = cfg["sgot"].term("medium").mf
    assert medium.apex_lo - medium.left == 7
    assert medium.right - medium.apex_hi == 8
    low_pc = cfg["platelets"].term("low").mf
    assert low_pc.apex_lo - low_pc.left == 76500
    assert low_pc.right - low_pc.apex_hi == 70000
    assert all(t.mf.is_triangle for v in cfg.values() for t in v.terms)


def test_default_config_grids():
    cfg = {v.name: v for v in default_dengue_config()}
    assert cfg["age"].term("child").levels == (0.25, 0.5, 0.75, 1.0)
    assert cfg["tlc"].term("low").levels == (0.2, 0.4, 0.6, 0.8, 1.0)
    assert cfg["sgot"].term("medium").levels == (0.25, 0.5, 0.75, 1.0)
    assert cfg["platelets"].term("low").levels == (0.2, 0.55, 0.7, 0.85, 1.0)
    assert cfg["bp"].term("low").levels == (0.25, 0.5, 0.75, 1.0)
    # levels used by the published example rules
    assert 0.2 in cfg["sgot"].term("high").levels
    assert 0.6 in cfg["age"].term("old").levels
    assert 0.6 in cfg["age"].term("young").levels


def test_config_round_trip(config):
    text = dumps(config.to_dict())
    again = DatasetConfig.from_dict(__import__("json").loads(text))
    assert again == config
    assert dumps(again.to_dict()) == text


@pytest.mark.parametrize("grid", [(0.0, 0.5), (0.5, 0.5), (0.6, 0.4), (0.5, 1.2), (math.nan,)])
def test_invalid_grid(grid):
    with pytest.raises(InvalidGridError):
        Term("t", CHILD, grid)


def test_duplicate_term_names():
    with pytest.raises(ConfigurationError):
        LinguisticVariable("v", "", (Term("a", CHILD, (1.0,)), Term("a", YOUNG, (1.0,))))

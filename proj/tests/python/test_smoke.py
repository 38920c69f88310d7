import pytest

import fif

AXES = [[0.0, 0.5, 1.0]]


def test_desk_values():
    r = fif.construct(AXES, "x1^2", 0.4, base="x1", tol=1e-10, refinement=64)
    assert r([0.25]) == pytest.approx(-0.0375, abs=1e-8)
    assert r([0.75]) == pytest.approx(0.4625, abs=1e-8)
    assert r.node_residual() <= 1e-10
    assert r.diagnostics.iterations >= 1


def test_interpolation_and_bounds():
    r = fif.construct(AXES, "x1^2", 0.4)
    b = r.bounds()
    assert b["passed"]
    assert b["seed_distance"] <= b["absolute_bound"] + 1e-9


def test_grid_and_data_seed():
    g = fif.Grid(AXES)
    assert g.dimension == 1
    assert g.node_count == 3
    r = fif.construct(AXES, [0.0, 1.0, 0.0], 0.3)
    assert r([0.5]) == pytest.approx(1.0, abs=1e-9)


def test_expression_parsing():
    e = fif.Expression.parse("x1^2 + sin(x2)")
    assert e([2.0, 0.0]) == pytest.approx(4.0)
    assert e.variable_count == 2
    with pytest.raises(fif.FifError):
        fif.Expression.parse("x1 + * 2")


def test_invalid_inputs_raise():
    with pytest.raises(fif.FifError):
        fif.construct([[0.0, 1.0]], "x1", 0.4)  # an axis needs at least 3 knots
    with pytest.raises(fif.FifError):
        fif.construct(AXES, "x1", 1.2)  # scaling bound must stay below 1
    with pytest.raises(fif.FifError):
        fif.construct(AXES, "x1", "0.4*x1")  # expression scaling needs a bound


def test_study_decay():
    rows = fif.study(AXES, "x1^2", [0.5, 0.25, 0.125], base="x1")
    errors = [row["error"] for row in rows]
    assert errors == sorted(errors, reverse=True)
    for row in rows:
        assert row["error"] <= row["bound"] + 1e-9


def test_operator_roundtrip():
    out = fif.invert_roundtrip(AXES, "x1^2", 0.2, operator="corner", tol=1e-10)
    assert out["recovery_error"] <= 2e-8
    assert out["certified_bilipschitz"]
    assert out["forward_residual"] <= 1e-8


def test_apply_operator_identity():
    r = fif.apply_operator(AXES, "x1^2", 0.4, operator="identity", refinement=32)
    assert r.node_residual() <= 1e-10
    values = r.fractal.values
    seed = r.seed_lattice.values
    assert abs(values - seed).max() <= 1e-9


def test_attractor_consistency():
    out = fif.attractor(AXES, "x1^2", 0.3, depth=4, refinement=32)
    assert len(out["values"]) == 3 * 2**4
    r = fif.construct(AXES, "x1^2", 0.3, refinement=32)
    worst = max(
        abs(v - r([x])) for x, v in zip(out["coordinates"], out["values"])
    )
    assert worst <= 1e-2


def test_expression_alpha():
    r = fif.construct(AXES, "x1^2", "0.3*cos(2*x1)", alpha_bound=0.3, refinement=32)
    assert r.node_residual() <= 1e-9
    assert r.alpha_bound == pytest.approx(0.3)


def test_2d_construction():
    axes = [[0.0, 0.5, 1.0], [0.0, 0.5, 1.0]]
    r = fif.construct(axes, "x1*x2 + sin(x1)", 0.4, refinement=16)
    assert r.node_residual() <= 1e-9
    assert r.bounds()["passed"]

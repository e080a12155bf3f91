import json
import math

import numpy as np
import pytest

from morreylorentz import ExponentPair, StepFunction, VariableExponent
from morreylorentz.errors import ConfigError, HypothesisError, PreconditionError
from morreylorentz.experiments import (
    BOUNDED,
    DIVERGENT,
    INCONCLUSIVE,
    FunctionFamily,
    Verdict,
    _ratio,
    calderon_constant,
    cz_boundedness,
    hardy_boundedness,
    maximal_boundedness,
    run_harness,
    sandwich_experiment,
    sublinear_boundedness,
    verify_hypotheses,
)
from morreylorentz.operators import OmegaKernel
from morreylorentz.signal import LineStep


def const_pair(p, q, lam):
    return ExponentPair(VariableExponent.constant(p), VariableExponent.constant(q), lam)


# -- families ---------------------------------------------------------------------


@pytest.mark.parametrize("gen", ["characteristic-intervals", "random-steps", "power-profiles", "dyadic-combs"])
def test_family_deterministic(gen):
    a = FunctionFamily(gen, 6, 3).members()
    b = FunctionFamily(gen, 6, 3).members()
    assert all(x == y for x, y in zip(a, b))
    grids_a = FunctionFamily(gen, 3, 3).grids()
    grids_b = FunctionFamily(gen, 3, 3).grids()
    assert all(np.array_equal(x.values, y.values) for x, y in zip(grids_a, grids_b))


def test_family_seed_changes_members():
    a = FunctionFamily("random-steps", 4, 1).members()
    b = FunctionFamily("random-steps", 4, 2).members()
    assert any(x != y for x, y in zip(a, b))


def test_family_errors():
    with pytest.raises(PreconditionError):
        FunctionFamily(count=0)
    with pytest.raises(ConfigError):
        FunctionFamily("wavelets", 3)
    with pytest.raises(ConfigError):
        FunctionFamily(scale_range=(2.0, 1.0))


def test_family_extension_preserves_shapes():
    fam = FunctionFamily("random-steps", 3, 5)
    base = fam.members()
    shell = fam.shell(1).members()
    for f, g in zip(base, shell[:3]):
        np.testing.assert_allclose(g.breakpoints, f.breakpoints / 16.0, rtol=1e-14)
        np.testing.assert_array_equal(g.values, f.values)
    assert len(fam.extended(2).members()) == 5 * 3
    assert len(fam.grown().members()) == 6


# -- hypotheses -------------------------------------------------------------------


def _by_name(vs):
    return {v.name: v for v in vs}


def test_verify_hypotheses_examples():
    assert all(v.passed for v in verify_hypotheses(const_pair(2, 2, 0.0), theorem="T3.1"))
    ok = _by_name(verify_hypotheses(const_pair(2, 2, 0.9), theorem="T3.2"))
    assert ok["lambda p_plus < min(q(0), q(inf))"].passed
    assert ok["lambda p_plus < min(q(0), q(inf))"].margin == pytest.approx(0.2)
    bad = _by_name(verify_hypotheses(const_pair(3, 2, 0.9), theorem="T3.2"))
    assert not bad["lambda p_plus < min(q(0), q(inf))"].passed
    with pytest.raises(ConfigError):
        verify_hypotheses(const_pair(2, 2, 0.0), theorem="T9.9")


def test_verify_hypotheses_records_both_readings():
    names = [v.name for v in verify_hypotheses(const_pair(2, 2, 0.25), theorem="T3.3")]
    assert "lambda p_plus < q*(t) for all t" in names


# -- harness mechanics ------------------------------------------------------------


def test_ratio_zero_over_zero_is_excluded():
    assert _ratio(0.0, 0.0) is None
    assert _ratio(1.0, 0.0) == math.inf

    def member(f, r):
        return {"X": None if f.is_zero() else 1.0}

    fam = FunctionFamily("random-steps", 3, 0)
    rep = run_harness("T3.1", [], fam, FunctionFamily.members, member, ("X",))
    assert rep.sup_ratio == 1.0


def _fake(values):
    """Harness driven by a prescribed ratio per dilation."""
    def member(f, r):
        return {"X": values(f.support_end)}
    return member


def test_harness_verdicts():
    fam = FunctionFamily("characteristic-intervals", 3, 0, (1.0, 2.0))
    flat = run_harness("T3.1", [], fam, FunctionFamily.members, _fake(lambda s: 2.0), ("X",))
    assert flat.verdict == BOUNDED and flat.drift == 0.0
    blow = run_harness("T3.1", [], fam, FunctionFamily.members, _fake(lambda s: s ** -0.5), ("X",))
    assert blow.verdict == DIVERGENT
    assert all(g >= 1.5 for g in blow.components["X"].growth)
    gated = run_harness("T3.1", [Verdict("h", False, -1.0)], fam, FunctionFamily.members,
                        _fake(lambda s: 2.0), ("X",))
    assert gated.verdict == INCONCLUSIVE and gated.exploratory


def test_report_serialization():
    fam = FunctionFamily("characteristic-intervals", 2, 0)
    rep = run_harness("T3.1", [Verdict("h", True, 1.0)], fam, FunctionFamily.members,
                      _fake(lambda s: 1.5), ("X",), config={"run": {"seed": "0"}})
    d = json.loads(rep.to_json())
    assert {"theorem", "hypotheses", "components", "supRatio", "refinementDrift", "verdict",
            "exploratory", "config"} <= set(d)
    assert d["supRatio"] == max(d["components"]["X"]["ratios"])
    assert rep.to_csv().splitlines()[0] == "component,index,scale,ratio"


# -- experiments (small families) -------------------------------------------------


def test_hardy_bounded_fixture_small():
    rep = hardy_boundedness(0.1, VariableExponent.constant(2.0), 0.3,
                            FunctionFamily("dyadic-combs", 4, 0))
    assert rep.verdict == BOUNDED
    assert rep.drift < 0.05
    assert all(r >= 0 for c in rep.components.values() for r in c.ratios if r is not None)


def test_hardy_gate_raises():
    beta = 0.3 / 2 + 0.5 + 0.2
    with pytest.raises(HypothesisError):
        hardy_boundedness(beta, VariableExponent.constant(2.0), 0.3,
                          FunctionFamily("random-steps", 2, 0), gate=True)


def test_maximal_lambda_zero_collapse():
    fam = FunctionFamily("random-steps", 3, 4)
    pair = const_pair(2.0, 3.0, 0.0)
    a = maximal_boundedness(pair, fam)
    b = maximal_boundedness(pair, fam, norm="lorentz")
    np.testing.assert_allclose(a.components["M"].ratios, b.components["M"].ratios, rtol=1e-9)


def test_maximal_ratio_at_least_one_for_chi():
    fam = FunctionFamily("characteristic-intervals", 2, 0)
    rep = maximal_boundedness(const_pair(2.0, 2.0, 0.0), fam)
    assert rep.verdict == BOUNDED
    assert min(rep.components["M"].ratios) >= 1.0


def test_cz_proof_structure():
    fam = FunctionFamily("random-steps", 3, 1)
    rep = cz_boundedness(const_pair(2.0, 2.0, 0.25), fam)
    C = rep.measured["calderonConstant"]
    c = rep.components
    for h, i1, i2 in zip(c["hilbert"].ratios, c["I1"].ratios, c["I2"].ratios):
        assert h <= (i1 + i2) * C * 1.05
    assert rep.verdict == BOUNDED


def test_calderon_constant_chi_finite():
    C = calderon_constant(LineStep.characteristic(0.0, 1.0))
    assert 0 < C < 1


def test_sublinear_identity_sup():
    rep = sublinear_boundedness("identity-sup", const_pair(2.0, 2.0, 0.25),
                                FunctionFamily("random-steps", 3, 0))
    assert rep.verdict == BOUNDED
    assert rep.measured["dominationConstant"] <= 1.0 + 1e-9


def test_sublinear_refuses_mean_nonzero_omega():
    with pytest.raises(PreconditionError):
        sublinear_boundedness("marcinkiewicz", const_pair(2.0, 2.0, 0.0),
                              FunctionFamily("characteristic-intervals", 1, 0),
                              omega=OmegaKernel("constant", (1.0,)))
    with pytest.raises(ConfigError):
        sublinear_boundedness("carleson", const_pair(2.0, 2.0, 0.0), FunctionFamily(count=1))


def test_sandwich_single_vs_multi_scale():
    multi = sandwich_experiment(FunctionFamily("random-steps", 4, 0))
    single = sandwich_experiment(FunctionFamily("random-steps", 4, 0, (1.0, 1.0)))
    assert multi.c_est > 0 and math.isfinite(multi.C_est)
    assert single.c_est == pytest.approx(multi.c_est, rel=0.1)
    assert single.C_est == pytest.approx(multi.C_est, rel=0.1)

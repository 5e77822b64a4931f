import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conduct.datagen import DgpConfig, derive_seed, generate_dataset
from conduct.diagnostics import (
    ChiVector,
    design_collinearity,
    diagnostic_report,
    exogenous_independent,
    paired_design_sweep,
    supply_design,
    zeta_coefficients,
    zeta_matrix,
    zeta_rank,
)
from conduct.model import BASELINE_PARAMS, StructuralParams

# solved by hand from the zeta_3, zeta_4 and zeta_1 rows with alpha3 = 0,
# then checked against zeta_6, zeta_7 and zeta_8
PS_NULL_VECTOR = np.array([1.0, 5 / 3, 2 / 3, 2 / 3, -6.0])
NO_SHIFTER = BASELINE_PARAMS.replace(alpha3=0.0)


def noiseless(shifter, seed, T=100, sigma=0.0):
    cfg = DgpConfig(BASELINE_PARAMS.replace(sigma=sigma), T, 1, seed, shifter)
    return generate_dataset(cfg, 0)


def test_zero_chi():
    assert not np.any(zeta_coefficients(BASELINE_PARAMS, ChiVector()))


def test_unit_chi1():
    z = zeta_coefficients(BASELINE_PARAMS, ChiVector(chi1=1.0))
    np.testing.assert_array_equal(z, [9, 1, -1, -1, 0, 0, 0, 0])


def test_hand_null_vector_without_shifter():
    z = zeta_coefficients(NO_SHIFTER, ChiVector.from_array(PS_NULL_VECTOR))
    assert np.max(np.abs(z)) < 1e-12


def test_shifter_rows():
    m = zeta_matrix(StructuralParams(alpha3=2.5))
    np.testing.assert_array_equal(m[1], [2.5, 0, 0, 0, 0])
    np.testing.assert_array_equal(m[4], [0, 2.5, 0, 0, 0])


finite = st.floats(-10, 10)


@settings(max_examples=200)
@given(
    st.builds(
        StructuralParams,
        alpha0=finite, alpha1=finite, alpha2=finite, alpha3=finite,
        gamma0=finite, gamma1=finite, gamma2=finite, gamma3=finite,
        theta=st.floats(0, 1),
    ),
    st.lists(finite, min_size=5, max_size=5),
)
def test_matrix_agrees_with_formulas(params, chi):
    direct = zeta_coefficients(params, ChiVector.from_array(chi))
    np.testing.assert_allclose(zeta_matrix(params) @ np.array(chi), direct, atol=1e-9)


def test_rank_with_shifter():
    system = zeta_rank(BASELINE_PARAMS)
    assert system.rank == 5
    assert system.null_space_basis == ()
    assert system.null_vector is None


def test_rank_without_shifter():
    system = zeta_rank(NO_SHIFTER)
    assert system.rank == 4
    assert len(system.null_space_basis) == 1
    np.testing.assert_allclose(system.null_vector, PS_NULL_VECTOR, rtol=1e-9)


def test_rank_without_rotation():
    # alpha2 = 0 alone keeps rank 5: rows 6-8 still pin chi3..chi5 through the
    # slope (1+theta)*alpha1 + gamma1, which is the (nonzero) equilibrium denominator
    assert zeta_rank(BASELINE_PARAMS.replace(alpha2=0.0)).rank == 5
    # rank drops only when that slope vanishes too
    degenerate = BASELINE_PARAMS.replace(alpha2=0.0, theta=0.0, alpha1=-1.0, gamma1=1.0)
    assert zeta_rank(degenerate).rank <= 4


def test_rank_dichotomy_over_random_parameters():
    rng = np.random.default_rng(20)
    full = dropped = 0
    for _ in range(1000):
        mags = rng.uniform(0.2, 5.0, size=8) * rng.choice([-1, 1], size=8)
        params = StructuralParams(*mags, theta=float(rng.uniform(0, 1)))
        full += zeta_rank(params).rank == 5
        dropped += zeta_rank(params.replace(alpha3=0.0)).rank <= 4
    assert full == 1000
    assert dropped == 1000


def test_design_rank_without_shifter():
    ds = noiseless(False, 3)
    diag = design_collinearity(ds)
    assert diag["numerical_rank"] == 4
    assert diag["condition_number"] > 1e10
    x = supply_design(ds)
    residual = x @ PS_NULL_VECTOR
    assert np.max(np.abs(residual)) < 1e-10 * np.max(np.linalg.norm(x, axis=0))


def test_design_rank_with_shifter():
    for i in range(100):
        diag = design_collinearity(noiseless(True, derive_seed(4, i)))
        assert diag["numerical_rank"] == 5
        assert diag["smallest_singular_value"] > 1e-6


@pytest.mark.parametrize("sigma, min_share", [(0.5, 0.9), (2.0, 0.5)])
def test_noisy_design_is_worse_conditioned_without_shifter(sigma, min_share):
    worse = []
    for i in range(200):
        seed = derive_seed(6, i)
        with_y = design_collinearity(noiseless(True, seed, sigma=sigma))
        without = design_collinearity(noiseless(False, seed, sigma=sigma))
        assert without["numerical_rank"] == 5
        worse.append(without["condition_number"] > with_y["condition_number"])
    assert np.mean(worse) > min_share


@pytest.mark.parametrize("exponent", [-6, 6])
@pytest.mark.parametrize("column", ["zq", "q", "w", "r", "const"])
def test_column_scale_invariance(column, exponent):
    for shifter, rank in ((True, 5), (False, 4)):
        ds = noiseless(shifter, 12)
        data = {c: ds[c] for c in ("zq", "q", "w", "r", "const")}
        data[column] = data[column] * 10.0**exponent
        assert design_collinearity(data)["numerical_rank"] == rank


def test_null_vector_realized_in_every_no_shifter_dataset():
    for i in range(25):
        x = supply_design(noiseless(False, derive_seed(5, i), T=50))
        assert np.max(np.abs(x @ PS_NULL_VECTOR)) < 1e-9 * np.max(np.linalg.norm(x, axis=0))


def test_report():
    ds = noiseless(True, 1)
    report = diagnostic_report(BASELINE_PARAMS, ds)
    assert report["rank"] == 5 and report["null_vector"] is None
    assert report["assumptions_satisfied"] == {
        "alpha2_nonzero": True,
        "alpha3_nonzero": True,
        "linear_independence_of_exogenous": True,
    }
    report = diagnostic_report(NO_SHIFTER)
    assert report["rank"] == 4
    assert report["condition_number"] is None or report["condition_number"] > 1e10
    np.testing.assert_allclose(report["null_vector"], PS_NULL_VECTOR, rtol=1e-9)
    assert report["assumptions_satisfied"]["linear_independence_of_exogenous"] is None


def test_exogenous_independence_fails_for_constant_shifter():
    ds = noiseless(True, 2)
    data = {c: ds[c] for c in ("zr", "w", "r")}
    data["y"] = np.full(len(ds), 3.0)
    assert not exogenous_independent(data)
    assert exogenous_independent(ds)


def test_paired_sweep():
    out = paired_design_sweep(BASELINE_PARAMS, seeds=10, sample_size=50)
    zero, noisy = out["sigmas"]
    assert zero["rank_counts"] == {"with_shifter": {"5": 10}, "without_shifter": {"4": 10}}
    assert noisy["rank_counts"]["without_shifter"] == {"5": 10}

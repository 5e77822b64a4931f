from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from conduct.datagen import (
    CSV_COLUMNS,
    Dataset,
    DgpConfig,
    derive_seed,
    draw_exogenous,
    generate_dataset,
)
from conduct.model import BASELINE_PARAMS, demand_price, supply_price

# E[Q] for the baseline design at sigma = 0: 6 * E[1 / (2.5 + 1.5 Z)], Z ~ N(10, 1),
# by adaptive quadrature (scipy.integrate.quad over [-2, 22], abs err < 1e-15)
MEAN_Q_NOISELESS = 0.3454337649633047


def config(sigma=1.0, T=50, S=3, seed=2024, shifter=True):
    return DgpConfig(BASELINE_PARAMS.replace(sigma=sigma), T, S, seed, shifter)


def test_zero_sigma_means_zero_errors():
    d = draw_exogenous(np.random.default_rng(1), 0.0)
    assert d.eps_d == 0.0 and d.eps_c == 0.0
    many = draw_exogenous(np.random.default_rng(1), 0.0, size=20)
    assert not np.any(many.eps_d) and not np.any(many.eps_c)


def test_rotation_instrument_moments():
    d = draw_exogenous(np.random.default_rng(7), 1.0, size=100_000)
    assert abs(d.zr.mean() - 10) < 0.02
    assert abs(d.zr.std(ddof=1) - 1) < 0.02


def test_auxiliary_instrument_correlation():
    d = draw_exogenous(np.random.default_rng(8), 1.0, size=100_000)
    assert abs(np.corrcoef(d.h, d.w)[0, 1] - 1 / np.sqrt(2)) < 0.01
    assert abs(np.corrcoef(d.k, d.r)[0, 1] - 1 / np.sqrt(2)) < 0.01


def test_error_scale_is_standard_deviation():
    d = draw_exogenous(np.random.default_rng(9), 2.0, size=100_000)
    assert abs(d.eps_d.std() - 2.0) < 0.04
    assert abs(d.eps_c.std() - 2.0) < 0.04
    assert abs(np.corrcoef(d.eps_d, d.eps_c)[0, 1]) < 0.02


def test_block_draw_matches_sequential_draws():
    cfg = config(sigma=0.7, T=12)
    ds = generate_dataset(cfg, 1)
    rng = np.random.default_rng(ds.seed_used)
    for i in range(len(ds)):
        one = draw_exogenous(rng, 0.7)
        for name in ("y", "zr", "w", "r", "h", "k", "eps_d", "eps_c"):
            assert getattr(one, name) == ds[name][i]


def test_deterministic():
    a = generate_dataset(config(), 2)
    b = generate_dataset(config(), 2)
    assert a.seed_used == b.seed_used
    for c in CSV_COLUMNS:
        assert np.array_equal(a[c], b[c])


def test_replications_use_distinct_seeds():
    cfg = config(S=50)
    seeds = {generate_dataset(cfg, i).seed_used for i in range(50)}
    assert len(seeds) == 50
    assert derive_seed(1, 0) != derive_seed(0, 1)


def test_parallel_invariance():
    cfg = config(S=8)
    serial = [generate_dataset(cfg, i) for i in range(8)]
    with ThreadPoolExecutor(4) as pool:
        parallel = list(pool.map(lambda i: generate_dataset(cfg, i), reversed(range(8))))[::-1]
    for a, b in zip(serial, parallel):
        assert np.array_equal(a["p"], b["p"]) and np.array_equal(a["q"], b["q"])


def test_noiseless_data_satisfy_both_equations():
    ds = generate_dataset(config(sigma=0.0, T=50), 0)
    d = ds.draw
    assert np.max(np.abs(demand_price(BASELINE_PARAMS, ds["q"], d) - ds["p"])) < 1e-12
    assert np.max(np.abs(supply_price(BASELINE_PARAMS, ds["q"], d) - ds["p"])) < 1e-12


@pytest.mark.parametrize("sigma", [0.0, 0.5, 2.0])
def test_every_observation_clears(sigma):
    ds = generate_dataset(config(sigma=sigma, T=200, shifter=False), 0)
    params = ds.params
    for obs in ds.observations[:25]:
        assert abs(demand_price(params, obs.q, obs.draw) - supply_price(params, obs.q, obs.draw)) < 1e-9


def test_mean_quantity_matches_quadrature():
    ds = generate_dataset(config(sigma=0.0, T=1000, S=1, seed=99), 0)
    assert abs(ds["q"].mean() - MEAN_Q_NOISELESS) < 0.05


def test_shifter_off_removes_y_from_equilibrium():
    ds = generate_dataset(config(sigma=0.0, T=200, shifter=False), 0)
    assert ds.params.alpha3 == 0.0
    # Q times the equilibrium denominator is affine in (1, W, R, Y) with Y weight alpha3
    p = ds.params
    den = (1 + p.theta) * (p.alpha1 + p.alpha2 * ds["zr"]) + p.gamma1
    x = np.column_stack([np.ones(len(ds)), ds["w"], ds["r"], ds["y"]])
    coef, *_ = np.linalg.lstsq(x, ds["q"] * den, rcond=None)
    assert abs(coef[3]) < 1e-12
    # the same stream with the shifter on differs only through alpha3 * Y
    on = generate_dataset(config(sigma=0.0, T=200, shifter=True), 0)
    assert np.array_equal(on["y"], ds["y"]) and np.array_equal(on["zr"], ds["zr"])
    assert np.allclose(on["q"] * den - ds["q"] * den, ds["y"], atol=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        DgpConfig(BASELINE_PARAMS, sample_size=9)
    with pytest.raises(ValueError):
        DgpConfig(BASELINE_PARAMS, sample_size=50, replications=0)
    with pytest.raises(ValueError):
        DgpConfig(BASELINE_PARAMS, sample_size=50, master_seed=-1)
    with pytest.raises(IndexError):
        generate_dataset(config(S=2), 2)


def test_csv_round_trip(tmp_path):
    ds = generate_dataset(config(T=15), 0)
    path = tmp_path / "data.csv"
    ds.to_csv(path)
    assert path.read_text().splitlines()[0] == "y,zr,w,r,h,k,eps_d,eps_c,q,p"
    back = Dataset.from_csv(path)
    for c in CSV_COLUMNS:
        assert np.array_equal(back[c], ds[c])


def test_interaction_column():
    ds = generate_dataset(config(T=10), 0)
    assert np.array_equal(ds["zq"], ds["zr"] * ds["q"])

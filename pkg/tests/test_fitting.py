import numpy as np
import pytest

from biphoton import DegenerateDataError, FitParams, ParameterError
from biphoton.fitting import fit_pattern, is_modulated, model_shape, predict, synthesize

Q = np.linspace(-3, 3, 241)


def roundtrip(regime, detection, truth, free, init, q=Q, n_slits=20, noise=0.0, seed=0):
    y = synthesize(regime, detection, truth, q, n_slits, noise=noise, seed=seed)
    return fit_pattern((q, y), regime, detection, free, init, n_slits=n_slits)


def test_model_is_normalised_at_zero():
    p = FitParams(s=0.3, w=0.6)
    for regime, det in (("uniform", "one-photon"), ("delta", "two-photon-diagonal"),
                        ("gaussian", "one-photon"), ("gaussian", "two-photon-diagonal")):
        assert model_shape(regime, det, p, np.array([0.0]), n_slits=5)[0] == pytest.approx(1.0)


def test_offset_shifts_model():
    p = FitParams(s=0.3)
    shifted = FitParams(s=0.3, q_offset=0.1)
    q = np.linspace(-1, 1, 21)
    np.testing.assert_allclose(model_shape("uniform", "one-photon", shifted, q),
                               model_shape("uniform", "one-photon", p, q + 0.1), rtol=1e-12)


@pytest.mark.parametrize("regime, detection, truth, free", [
    ("uniform", "one-photon", FitParams(1.7, 0.05, 1.0, 1 / 3.5), ("scale", "background", "s")),
    ("uniform", "two-photon-diagonal", FitParams(0.9, 0.0, 1.0, 0.4), ("scale", "s")),
    ("delta", "two-photon-diagonal", FitParams(2.0, 0.1, 1.0, 0.5), ("scale", "background", "s")),
    ("uniform", "one-photon", FitParams(1.0, 0.0, 1.0, 0.3, q_offset=0.02), ("scale", "s", "q_offset")),
])
def test_noiseless_roundtrip(regime, detection, truth, free):
    result = roundtrip(regime, detection, truth, free, FitParams(s=0.45))
    assert result.converged
    for name in free:
        want, got = getattr(truth, name), getattr(result.params, name)
        assert got == pytest.approx(want, rel=1e-2, abs=1e-6), name


@pytest.mark.parametrize("detection", ["one-photon", "two-photon-diagonal"])
def test_gaussian_width_roundtrip(detection):
    truth = FitParams(1.0, 0.0, 1.0, 0.5, w=0.8)
    q = np.linspace(-2, 2, 81)
    result = roundtrip("gaussian", detection, truth, ("scale", "w"), FitParams(s=0.5, w=1.2),
                       q=q, n_slits=4)
    assert result.converged
    assert result.params.w == pytest.approx(0.8, rel=1e-2)


def test_objective_never_increases():
    result = roundtrip("uniform", "one-photon", FitParams(s=0.3), ("scale", "background", "s"),
                       FitParams(s=0.45), noise=0.01, seed=1)
    hist = np.array(result.objective_history)
    assert hist.size > 1
    assert np.all(np.diff(hist) <= 0)


def test_reordering_does_not_matter():
    y = synthesize("uniform", "one-photon", FitParams(s=0.3), Q, noise=0.01, seed=4)
    perm = np.random.default_rng(0).permutation(Q.size)
    free = ("scale", "background", "s")
    a = fit_pattern((Q, y), "uniform", "one-photon", free, FitParams(s=0.45))
    b = fit_pattern((Q[perm], y[perm]), "uniform", "one-photon", free, FitParams(s=0.45))
    assert a.params == b.params


def test_fixed_scale_matches_free_scale_on_normalised_data():
    y = synthesize("uniform", "one-photon", FitParams(s=1 / 3.5), Q, noise=0.01, seed=2)
    y = y / y.max()
    both = fit_pattern((Q, y), "uniform", "one-photon", ("scale", "background", "s"), FitParams(s=0.45))
    bg_only = fit_pattern((Q, y), "uniform", "one-photon", ("background", "s"), FitParams(s=0.45))
    assert bg_only.ratio == pytest.approx(both.ratio, rel=1e-3)


def test_multistart_escapes_wrong_ratio():
    result = roundtrip("uniform", "one-photon", FitParams(s=1 / 3.5), ("scale", "background", "s"),
                       FitParams(s=0.5))
    assert result.ratio == pytest.approx(3.5, rel=0.05)


def test_standard_errors_track_noise():
    truth = FitParams(s=0.3)
    free = ("scale", "background", "s")
    quiet = roundtrip("uniform", "one-photon", truth, free, FitParams(s=0.45), noise=0.002, seed=3)
    loud = roundtrip("uniform", "one-photon", truth, free, FitParams(s=0.45), noise=0.02, seed=3)
    assert set(loud.stderr) == set(free)
    assert loud.stderr["s"] == pytest.approx(10 * quiet.stderr["s"], rel=0.3)


def test_iteration_cap_reports_best_so_far():
    y = synthesize("uniform", "one-photon", FitParams(s=0.3), Q, noise=0.01, seed=5)
    result = fit_pattern((Q, y), "uniform", "one-photon", ("scale", "background", "s"),
                         FitParams(s=0.45), max_iter=3)
    assert not result.converged
    assert result.residual_rms > 0


def test_constant_data_is_degenerate():
    with pytest.raises(DegenerateDataError):
        fit_pattern((Q, np.ones(Q.size)), "uniform", "one-photon", ("scale", "s"), FitParams())


def test_constant_data_fine_for_flat_model():
    result = fit_pattern((Q, np.full(Q.size, 2.0)), "delta", "one-photon", ("scale", "s"), FitParams())
    assert result.params.scale == pytest.approx(2.0)


def test_point_count_guard():
    q = np.linspace(-1, 1, 5)
    with pytest.raises(ParameterError):
        fit_pattern((q, np.cos(q)), "uniform", "one-photon", ("scale", "background", "s"), FitParams())


@pytest.mark.parametrize("kwargs, field", [
    (dict(regime="lorentz"), "regime"),
    (dict(detection="three-photon"), "detection"),
    (dict(free=("scale", "colour")), "free"),
    (dict(regime="gaussian"), "w"),
])
def test_argument_validation(kwargs, field):
    args = dict(data=(Q, np.cos(Q) + 2), regime="uniform", detection="one-photon",
                free=("scale", "s"), init=FitParams())
    args.update(kwargs)
    with pytest.raises(ParameterError) as info:
        fit_pattern(**args)
    assert info.value.field == field


@pytest.mark.parametrize("kwargs", [dict(scale=0), dict(background=-1), dict(s=2.0), dict(w=0.0)])
def test_param_invariants(kwargs):
    with pytest.raises(ParameterError):
        FitParams(**kwargs)


def test_noise_is_seeded():
    p = FitParams(s=0.3)
    a = synthesize("uniform", "one-photon", p, Q, noise=0.01, seed=9)
    b = synthesize("uniform", "one-photon", p, Q, noise=0.01, seed=9)
    c = synthesize("uniform", "one-photon", p, Q, noise=0.01, seed=10)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    np.testing.assert_array_equal(synthesize("uniform", "one-photon", p, Q), predict("uniform", "one-photon", p, Q))


def test_modulation_flag():
    assert not is_modulated("delta", "one-photon")
    assert is_modulated("gaussian", "one-photon")

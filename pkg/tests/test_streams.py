import numpy as np

from data.models import StreamRole
from engine.streams import derive_seed, generator, make_stream, open_uniforms, standard_normals


def test_same_address_gives_same_draws():
    a = standard_normals(generator(make_stream(42, 3, StreamRole.V)), 50)
    b = standard_normals(generator(make_stream(42, 3, StreamRole.V)), 50)
    assert np.array_equal(a, b)


def test_roles_and_trials_are_independent_streams():
    v = standard_normals(generator(make_stream(42, 3, StreamRole.V)), 50)
    w = standard_normals(generator(make_stream(42, 3, StreamRole.W)), 50)
    other = standard_normals(generator(make_stream(42, 4, StreamRole.V)), 50)
    assert not np.array_equal(v, w)
    assert not np.array_equal(v, other)


def test_draws_do_not_depend_on_block_sizes():
    whole = standard_normals(generator(make_stream(7, 0, StreamRole.V)), 100)
    gen = generator(make_stream(7, 0, StreamRole.V))
    pieces = np.concatenate([standard_normals(gen, 40), standard_normals(gen, 60)])
    assert np.array_equal(whole, pieces)


def test_open_uniforms_stay_inside_the_unit_interval():
    u = open_uniforms(generator(make_stream(1, 0, StreamRole.BRIDGE_X)), 100_000)
    assert u.min() > 0.0
    assert u.max() < 1.0


def test_standard_normals_moments():
    z = standard_normals(generator(make_stream(2024, 0, StreamRole.V)), 100_000)
    assert np.all(np.isfinite(z))
    assert abs(z.mean()) < 0.02
    assert abs(z.std() - 1.0) < 0.02


def test_derive_seed():
    assert derive_seed(5, 0) == derive_seed(5, 0)
    assert derive_seed(5, 0) != derive_seed(5, 1)
    assert 0 <= derive_seed(5, 2) < 2**64

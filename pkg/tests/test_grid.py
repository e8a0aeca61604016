import numpy as np
import pytest

from greedylab.errors import InputError, SizeError
from greedylab.grid import GridSpec, grid_from_config, parse_magnitudes


def test_universe_size_and_order():
    g = GridSpec(2, (0.0, 1.0, 2.0))
    U = g.universe
    assert len(U) == 25
    assert np.all(np.diff(U.keys) > 0)
    assert U.values[0].tolist() == [0.0, 0.0]
    assert U.values[-1].tolist() == [-2.0, -2.0]


def test_moduli_are_exact_for_complex_signs():
    g = GridSpec.default(2, "complex", roots=8)
    U = g.universe
    nz = U.moduli > 0
    assert set(np.unique(U.moduli[nz])) <= set(g.magnitudes[1:])
    assert np.allclose(np.abs(U.values), U.moduli)


def test_lookup_round_trip():
    U = GridSpec(3, (0.0, 0.5, 1.0)).universe
    rows = np.array([0, 17, len(U) - 1])
    assert U.lookup(U.codes[rows]).tolist() == rows.tolist()


def test_support_cap_without_augmentation():
    g = GridSpec(3, (0.0, 1.0), max_support=1, indicator_augmented=False)
    assert not g.indicator_closed
    assert len(g.universe) == 1 + 3 * 2
    closed = GridSpec(3, (0.0, 1.0), max_support=1)
    assert closed.indicator_closed and len(closed.universe) == 27


def test_leading_chunks_partition():
    U = GridSpec(3, (0.0, 1.0)).universe
    rows = np.concatenate(U.leading_chunks())
    assert sorted(rows.tolist()) == list(range(len(U)))


def test_validation():
    with pytest.raises(InputError):
        GridSpec(2, (0.5, 1.0))
    with pytest.raises(InputError):
        GridSpec(2, (0.0, 1.0, 1.0))
    with pytest.raises(InputError):
        GridSpec(2, (0.0, 1.0), signs=(1.0, 0.5))
    with pytest.raises(SizeError):
        GridSpec(12, (0.0, 0.25, 0.5, 1.0, 2.0)).universe


def test_parse_magnitudes_rejects_non_dyadic():
    assert parse_magnitudes([0, 0.25, "0.5", 2]) == (0.0, 0.25, 0.5, 2.0)
    with pytest.raises(InputError):
        parse_magnitudes([0, 0.1])


def test_grid_from_config():
    g = grid_from_config({"magnitudes": [0, 1]}, 2, "real")
    assert g.signs == (1.0, -1.0)
    c = grid_from_config({"signs": {"roots": 4}}, 2, "complex")
    assert c.signs == (1.0, 1j, -1.0, -1j)
    with pytest.raises(InputError):
        grid_from_config({"signs": {"roots": 4}}, 2, "real")


def test_hash_stable_and_sensitive():
    a, b = GridSpec(3), GridSpec(3)
    assert a.hash == b.hash
    assert GridSpec(3, max_support=2).hash != a.hash
    assert a.scaled(2).magnitudes == (0.0, 0.5, 1.0, 2.0, 4.0)

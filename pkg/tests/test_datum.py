import json

import numpy as np
import pytest

from blgrowth import subspace as sp
from blgrowth.datum import (BLDatum, PerturbationSpec, datum_from_dict, load_problem,
                            operator_norm, perturb, validate)
from blgrowth.errors import InvalidInputError

from conftest import random_projection_datum


def test_validate_examples(lw):
    assert validate(lw).ok
    bad = BLDatum(2, ([[0.0, 0.0]],), (1.0,))
    report = validate(bad)
    assert not report.ok and "not surjective" in report.failures[0]
    report = validate(lw.with_p((1.5, 1.0)))
    assert not report.ok and "out of [0,1]" in report.failures[0]


def test_validate_kernel_consistency():
    d = BLDatum(2, ([[1.0, 0.0]],), (1.0,), kernels=(sp.Subspace.coordinate(2, [0]),))
    assert any("annihilated" in f for f in validate(d).failures)


def test_kernels_derived_for_projections(lw, reviewer):
    assert lw.kernels is not None
    assert sp.grassmann_distance(lw.kernels[0], sp.Subspace.coordinate(2, [1])) < 1e-12
    assert reviewer.kernels[2].dim == 0
    general = BLDatum(2, ([[2.0, 1.0]],), (0.5,))
    assert general.kernels is None


def test_operator_norm_examples():
    assert operator_norm([[1.0, 0.0]]) == pytest.approx(1.0)
    assert operator_norm(np.zeros((2, 2))) == 0
    assert operator_norm([[2.0, 0.0], [0.0, 1.0]]) == pytest.approx(2.0)


def test_perturb_nu_zero_is_identity(reviewer):
    out = perturb(reviewer, PerturbationSpec(0.0, 3, 1), 0)
    for K, K0 in zip(out.kernels, reviewer.kernels):
        assert np.allclose(sp.projection_matrix(K), sp.projection_matrix(K0), atol=1e-10)


def test_perturb_lw_unit_norm(lw):
    out = perturb(lw, PerturbationSpec(0.05, 3, 1), 0)
    for A, K, K0 in zip(out.maps, out.kernels, lw.kernels):
        s = np.linalg.svd(A, compute_uv=False)  # direct SVD oracle
        assert len(s) == 1 and s[0] == pytest.approx(1.0, abs=1e-10)
        assert sp.grassmann_distance(K, K0) == pytest.approx(0.05, abs=1e-6)
        assert sp.grassmann_distance(K, K0) <= 0.05


@pytest.mark.parametrize("nu", [1e-3, 0.05, 0.3, 0.9])
def test_perturb_distance_bound(nu):
    rng = np.random.default_rng(5)
    for trial in range(10):
        d = random_projection_datum(rng)
        spec = PerturbationSpec(nu, trial, 3)
        for i in range(3):
            out = perturb(d, spec, i)
            assert validate(out).ok
            for A, K, K0 in zip(out.maps, out.kernels, d.kernels):
                assert sp.grassmann_distance(K, K0) <= nu
                if A.shape[0]:
                    assert operator_norm(A) == pytest.approx(1.0, abs=1e-10)


def test_perturb_deterministic(lw):
    spec = PerturbationSpec(0.1, 9, 4)
    a = perturb(lw, spec, 2)
    b = perturb(lw, spec, 2)
    assert all(x.tobytes() == y.tobytes() for x, y in zip(a.maps, b.maps))
    c = perturb(lw, spec, 3)
    assert not np.allclose(a.maps[0], c.maps[0])


def test_perturb_errors():
    general = BLDatum(2, ([[2.0, 1.0]],), (0.5,))
    with pytest.raises(InvalidInputError):
        perturb(general, PerturbationSpec(0.1), 0)
    with pytest.raises(InvalidInputError):
        PerturbationSpec(-1.0)
    with pytest.raises(InvalidInputError):
        PerturbationSpec(0.1, samples=0)


def test_problem_document_roundtrip(tmp_path):
    doc = {"n": 2, "p": [0.5, 0.5], "kernels": [[[0, 1]], [[1, 0]]]}
    d = datum_from_dict(doc)
    assert d.dims == (1, 1)
    assert np.allclose(np.abs(d.maps[0]), [[1, 0]])
    doc2 = {"n": 2, "p": [1], "maps": [[1, 0]]}
    assert datum_from_dict(doc2).dims == (1,)
    path = tmp_path / "bad.json"
    path.write_text('{"n": 2,\n "p": [1,]\n}')
    with pytest.raises(InvalidInputError, match="line 2"):
        load_problem(path)


@pytest.mark.parametrize("doc, field", [
    ({"p": [1], "maps": [[1, 0]]}, "'n'"),
    ({"n": 2, "maps": [[1, 0]]}, "'p'"),
    ({"n": 2, "p": [1]}, "maps/kernels"),
    ({"n": 2, "p": [1], "maps": [[1, 0, 0]]}, "maps\\[0\\]"),
    ({"n": "two", "p": [1], "maps": [[1, 0]]}, "'n'"),
])
def test_problem_document_errors(doc, field):
    with pytest.raises(InvalidInputError, match=field):
        datum_from_dict(doc)

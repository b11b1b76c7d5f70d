import json

import numpy as np
import pytest

from qfdiv.errors import HermiticityError
from qfdiv.matrix_io import MatrixFormatError, load_matrix, matrix_from_dict, matrix_to_dict, save_matrix


def test_round_trip(tmp_path):
    A = np.array([[2.0, 1 - 1j], [1 + 1j, 3.0]])
    save_matrix(tmp_path / "a.json", A)
    assert np.array_equal(load_matrix(tmp_path / "a.json"), A)


def test_real_matrix_omits_imaginary_part():
    d = matrix_to_dict(np.eye(2))
    assert d == {"dim": 2, "re": [[1.0, 0.0], [0.0, 1.0]]}
    assert np.array_equal(matrix_from_dict(d), np.eye(2))


def test_hermiticity_tolerance():
    ok = {"dim": 2, "re": [[1, 0.5], [0.5 + 5e-11, 1]]}
    B = matrix_from_dict(ok)
    assert np.array_equal(B, B.conj().T)
    with pytest.raises(HermiticityError):
        matrix_from_dict({"dim": 2, "re": [[1, 0.5], [0.5 + 1e-9, 1]]})
    with pytest.raises(HermiticityError):
        matrix_from_dict({"dim": 2, "re": [[1, 0], [0, 1]], "im": [[0, 1], [1, 0]]})


@pytest.mark.parametrize("obj", [
    [],
    {"re": [[1]]},
    {"dim": 0, "re": []},
    {"dim": True, "re": [[1]]},
    {"dim": 2, "re": [[1, 0]]},
    {"dim": 1, "re": [["x"]]},
    {"dim": 1, "re": [[1]], "im": [[1, 2]]},
])
def test_malformed(obj):
    with pytest.raises(MatrixFormatError):
        matrix_from_dict(obj)


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{dim: 2")
    with pytest.raises(MatrixFormatError):
        load_matrix(p)
    p.write_text(json.dumps({"dim": 1, "re": [[float("nan")]]}))
    with pytest.raises(MatrixFormatError):
        load_matrix(p)

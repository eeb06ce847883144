import json
import tempfile

import pytest

from bcwitt.core_arith import IntPolynomial
from bcwitt.errors import MathInputError, VerificationError
from bcwitt.field_data import bundled_sidecars, field_from_data, load_field, read_sidecar

CUBIC = {
    "polynomial": "x^3+x^2-2*x-1",
    "integral_basis": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
    "units": {
        "torsion": {"element": ["-1", "0", "0"], "order": 2},
        "fundamental": [["0", "1", "0"], ["1", "1", "0"]],
    },
    "class_number": 1,
}


def _write(data, suffix=".json", encoding="utf-8"):
    with tempfile.NamedTemporaryFile("w", suffix=suffix, encoding=encoding, delete=False) as f:
        json.dump(data, f, ensure_ascii=False)
        return f.name


def test_sidecar_roundtrip():
    K = load_field("x^3+x^2-2*x-1", _write(CUBIC))
    assert K.discriminant == 49
    assert len(K.units.fundamental) == 2


def test_utf16_sidecar():
    # PowerShell の既定 (UTF-16) で保存されたファイルも読める
    data = read_sidecar(_write(CUBIC, encoding="utf-16"))
    assert data["class_number"] == 1


def test_bundled_sidecar_is_registered():
    assert IntPolynomial.parse("x^3+x^2-2*x-1") in bundled_sidecars()


def test_mismatched_polynomial():
    with pytest.raises(MathInputError):
        field_from_data(CUBIC, IntPolynomial.parse("x^3-2"))


def test_bad_unit_rejected():
    bad = json.loads(json.dumps(CUBIC))
    bad["units"]["fundamental"] = [["2", "0", "0"], ["1", "1", "0"]]
    with pytest.raises((MathInputError, VerificationError)):
        field_from_data(bad)


def test_wrong_coordinate_count():
    bad = json.loads(json.dumps(CUBIC))
    bad["integral_basis"] = [["1", "0"]]
    with pytest.raises(MathInputError):
        field_from_data(bad)


def test_missing_sidecar_for_cubic():
    with pytest.raises(MathInputError):
        load_field("x^3-2")


def test_yaml_sidecar():
    yaml = pytest.importorskip("yaml")
    with tempfile.NamedTemporaryFile("w", suffix=".yaml", encoding="utf-8", delete=False) as f:
        yaml.safe_dump(CUBIC, f)
        path = f.name
    assert load_field("x^3+x^2-2*x-1", path).class_number == 1

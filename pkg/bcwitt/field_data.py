"""次数 3 以上の体のための JSON / YAML サイドカー読み込み。

フォーマット例 (JSON):

{
  "polynomial": "x^3+x^2-2x-1",
  "integral_basis": [["1","0","0"], ["0","1","0"], ["0","0","1"]],
  "units": {
    "torsion": {"element": ["-1","0","0"], "order": 2},
    "fundamental": [["0","1","0"], ["1","1","0"]]
  },
  "class_number": 1
}

座標はすべて冪基底 1, θ, θ^2, ... に関する有理数 ("p/q" 文字列または整数)。
YAML でも同じ構造が使える (PyYAML が必要)。
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple
import json
import logging

from .core_arith import IntPolynomial
from .errors import MathInputError
from .number_field import NumberField, UnitData, field_from_string, make_field

try:
    import yaml  # type: ignore
except Exception:  # pragma: no cover
    yaml = None  # YAML未インストール時はJSONのみ

logger = logging.getLogger(__name__)

BUNDLED_DIR = Path(__file__).with_name("fields")
ENCODINGS = ("utf-8", "utf-8-sig", "utf-16", "utf-16-le", "utf-16-be", "cp932")


def _read_text(p: Path) -> str:
    raw = p.read_bytes()
    for enc in ENCODINGS:
        try:
            return raw.decode(enc).lstrip("\ufeff")
        except UnicodeDecodeError:
            continue
    raise MathInputError(f"unable to decode {p} with tried encodings")


def read_sidecar(path: str | Path) -> Dict[str, Any]:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(str(p))
    text = _read_text(p)
    if p.suffix.lower() in {".yaml", ".yml"}:
        if yaml is None:
            raise MathInputError("PyYAMLがインストールされていないためYAMLは読み込めません。'pip install PyYAML' を実行してください")
        data = yaml.safe_load(text)
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise MathInputError(f"{p}: invalid JSON: {e}") from e
    if not isinstance(data, dict):
        raise MathInputError(f"{p}: field data must be a mapping")
    return data


def _vector(raw: Any, n: int, what: str) -> Tuple[Fraction, ...]:
    if not isinstance(raw, (list, tuple)) or len(raw) != n:
        raise MathInputError(f"{what}: expected {n} coordinates")
    try:
        return tuple(Fraction(str(c)) for c in raw)
    except (ValueError, ZeroDivisionError) as e:
        raise MathInputError(f"{what}: {e}") from e


def field_from_data(data: Dict[str, Any], poly: Optional[IntPolynomial] = None) -> NumberField:
    if poly is None:
        if "polynomial" not in data:
            raise MathInputError("field data needs a 'polynomial' entry")
        poly = IntPolynomial.parse(str(data["polynomial"]))
    elif "polynomial" in data and IntPolynomial.parse(str(data["polynomial"])) != poly:
        raise MathInputError(f"sidecar polynomial {data['polynomial']} does not match {poly}")
    n = poly.degree
    basis: Optional[List[Tuple[Fraction, ...]]] = None
    if "integral_basis" in data:
        basis = [_vector(row, n, "integral_basis") for row in data["integral_basis"]]
    units = None
    raw_units = data.get("units")
    if raw_units is not None:
        tors = raw_units.get("torsion") or {}
        units = UnitData(
            torsion=_vector(tors.get("element"), n, "units.torsion"),
            torsion_order=int(tors.get("order", 0)),
            fundamental=tuple(_vector(u, n, "units.fundamental") for u in raw_units.get("fundamental", [])),
        )
    class_num = data.get("class_number")
    return make_field(poly, basis, units, None if class_num is None else int(class_num))


def bundled_sidecars() -> Dict[IntPolynomial, Path]:
    out: Dict[IntPolynomial, Path] = {}
    if BUNDLED_DIR.is_dir():
        for p in sorted(BUNDLED_DIR.glob("*.json")):
            try:
                out[IntPolynomial.parse(str(read_sidecar(p)["polynomial"]))] = p
            except (MathInputError, KeyError) as e:
                logger.warning("skipping bundled field file %s: %s", p.name, e)
    return out


@lru_cache(maxsize=32)
def load_field(poly_text: str, sidecar_path: Optional[str] = None) -> NumberField:
    """多項式から体を作る。次数 3 以上はサイドカー (無指定なら同梱データ) を使う。

    同じ引数には同じ NumberField を返す (イデアルのキャッシュは体の同一性に依存する)。
    """
    poly = IntPolynomial.parse(poly_text)
    if sidecar_path is not None:
        return field_from_data(read_sidecar(sidecar_path), poly)
    if poly.degree <= 2:
        return field_from_string(poly_text)
    bundled = bundled_sidecars().get(poly)
    if bundled is None:
        raise MathInputError(f"degree {poly.degree} field {poly} needs a sidecar file with integral basis and units")
    logger.info("using bundled field data %s", bundled.name)
    return field_from_data(read_sidecar(bundled), poly)


__all__ = ["read_sidecar", "field_from_data", "bundled_sidecars", "load_field", "BUNDLED_DIR"]

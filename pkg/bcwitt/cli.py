from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

try:
    import tomllib  # Python 3.11+
except Exception:  # pragma: no cover
    tomllib = None  # type: ignore

from . import __version__
from .cyclotomic import CyclotomicElement, cyclotomic_frobenius_check
from .dr_monoid import CONSTRUCTIONS, build_dr, dr_project, idempotents
from .endomotive import crossed_ops, ggc_check_Q, verify_relations, zeta_coefficients
from .errors import InconclusiveSearchError, MathInputError, VerificationError
from .field_data import load_field, read_sidecar
from .ideal_arith import divisors_of, enumerate_ideals, factor_ideal, parse_ideal, set_debug_checks
from .number_field import NumberField, narrow_class_number
from .ray_class import ray_class_group
from .verify import parse_suite, run_suite
from .witt import (
    dwork_member,
    ghost,
    ghost_vector,
    periodic_rank,
    ring_from_name,
    unghost,
    witt_vector,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MATH = 1
EXIT_VERIFY = 2
EXIT_USAGE = 3

FORMATS = ("json", "csv", "pretty")


class _Parser(argparse.ArgumentParser):
    """使い方の誤りは終了コード 3 (argparse 既定の 2 は検証失敗に使う)。"""

    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunConfig:
    field: Optional[str] = None
    sidecar: Optional[str] = None
    modulus: Optional[str] = None
    construction: str = "a"
    norm_bound: int = 10
    bound: int = 20
    output_format: str = "json"
    output: Optional[str] = None
    seed: int = 0
    jobs: int = 1
    strict: bool = True
    debug_checks: bool = False


# 設定ファイルのキー → (属性名, 型)
CONFIG_KEYS = {
    "field": ("field", str),
    "sidecar": ("sidecar", str),
    "modulus": ("modulus", str),
    "construction": ("construction", str),
    "normBound": ("norm_bound", int),
    "bound": ("bound", int),
    "format": ("output_format", str),
    "seed": ("seed", int),
    "jobs": ("jobs", int),
    "strict": ("strict", bool),
    "debugChecks": ("debug_checks", bool),
}


def _common(p: argparse.ArgumentParser, field: bool = True, modulus: bool = False) -> None:
    if field:
        p.add_argument("--field", help='体の定義多項式 (変数 x)。例: "x^2+1"')
        p.add_argument("--sidecar", help="次数 3 以上の体の整基底・単数を記した JSON/YAML")
    if modulus:
        p.add_argument("--modulus", help='法イデアルの生成元 (変数 t, カンマ区切り)。例: "2, 1+t"')
    p.add_argument("--output", help="結果をファイルに書き出す")
    p.add_argument("--format", dest="output_format", choices=FORMATS, default=None, help="出力形式 (既定: json)")
    p.add_argument("--config", help="設定ファイル(TOML: pyproject.toml など)の [tool.bcwitt] を読み込み、既定値を上書き")
    p.add_argument("-v", "--verbose", action="count", default=0, help="ログを stderr に出す (-vv でデバッグ)")
    p.add_argument("--debug-checks", dest="debug_checks", action="store_true", default=None, help="イデアル演算の内部検証を有効化")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bcwitt", description="数体の Deligne-Ribet モノイド・Witt ベクトル・有限レベルのエンドモチーフを厳密計算します")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    # field
    fp = sub.add_parser("field", help="数体")
    fsub = fp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    x = fsub.add_parser("new", help="体を作り不変量を表示")
    x.add_argument("--poly", required=True, help="定義多項式 (monic, 既約)")
    x.add_argument("--sidecar")
    _common(x, field=False)
    for name, hlp in (("norm", "元のノルムとトレース"), ("positive", "総正かどうかと符号")):
        x = fsub.add_parser(name, help=hlp)
        x.add_argument("--element", required=True, help='元 (変数 t)。例: "1+t"')
        _common(x)

    # ideal
    ip = sub.add_parser("ideal", help="イデアル")
    isub = ip.add_subparsers(dest="action", required=True, parser_class=_Parser)
    x = isub.add_parser("factor", help="素イデアル分解")
    x.add_argument("--ideal", required=True, help="生成元 (カンマ区切り)")
    _common(x)
    x = isub.add_parser("enumerate", help="ノルム ≤ bound の整イデアル")
    x.add_argument("--bound", type=int, default=None)
    _common(x)
    x = isub.add_parser("divisors", help="法の整因子")
    _common(x, modulus=True)

    # rayclass
    x = sub.add_parser("rayclass", help="(狭義) 射線類群")
    x.add_argument("--strict", action=argparse.BooleanOptionalAction, default=None, help="総正の生成元を要求 (既定: 有効)")
    _common(x, modulus=True)

    # dr
    dp = sub.add_parser("dr", help="Deligne-Ribet モノイド")
    dsub = dp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name, hlp in (("table", "元と乗積表"), ("idempotents", "冪等元")):
        x = dsub.add_parser(name, help=hlp)
        x.add_argument("--construction", choices=CONSTRUCTIONS, default=None)
        x.add_argument("--norm-bound", dest="dr_norm_bound", type=int, default=None, help="構成 A の初期ノルム上限")
        _common(x, modulus=True)
    x = dsub.add_parser("project", help="射影 DR_{f'} → DR_f (--modulus が f')")
    x.add_argument("--target", required=True, help="f の生成元 (f | f')")
    x.add_argument("--construction", choices=CONSTRUCTIONS, default=None)
    _common(x, modulus=True)

    # witt
    wp = sub.add_parser("witt", help="Witt ベクトル")
    wsub = wp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name, hlp in (("ghost", "座標 → ghost 成分"), ("unghost", "ghost 成分 → 座標"), ("member", "ghost 像の判定 (Dwork)")):
        x = wsub.add_parser(name, help=hlp)
        x.add_argument("--vector", required=True, help='JSON 文字列またはファイル。{"S":[1,2], "x"|"w":{"1":"3"}, "ring":"ZZ"}')
        x.add_argument("--ring", default=None, help="ZZ | QQ | Z[zeta_m] (JSON 側の指定より優先)")
        _common(x, field=False)
    x = wsub.add_parser("frobcheck", help="ℤ[ζ_m] 上の σ_p(x) ≡ x^p mod p")
    x.add_argument("--level", type=int, required=True)
    x.add_argument("--prime", type=int, required=True)
    x.add_argument("--trials", type=int, default=20)
    x.add_argument("--seed", type=int, default=None)
    _common(x, field=False)
    x = wsub.add_parser("periodic-rank", help="Σ_{d|f} |Cl^+_d| と |DR_f| の照合")
    x.add_argument("--construction", choices=CONSTRUCTIONS, default=None)
    _common(x, modulus=True)

    # endo
    ep = sub.add_parser("endo", help="有限レベルのエンドモチーフ")
    esub = ep.add_subparsers(dest="action", required=True, parser_class=_Parser)
    x = esub.add_parser("verify", help="交差積の関係式を検証")
    x.add_argument("--norm-bound", dest="norm_bound", type=int, default=None, help="作用素を作るイデアルのノルム上限 (既定: 10)")
    _common(x, modulus=True)
    x = esub.add_parser("zeta", help="Dedekind ゼータ係数")
    x.add_argument("--bound", type=int, default=None)
    x.add_argument("--euler-check", action="store_true")
    _common(x)
    x = esub.add_parser("ggc", help="K=ℚ の円分レベルでの同変全単射")
    x.add_argument("--level", type=int, required=True)
    _common(x, field=False)

    # verify
    x = sub.add_parser("verify", help="受け入れ基準 1〜10 を実行")
    x.add_argument("--suite", default="all", help="all または 1,3,5-7")
    x.add_argument("--seed", type=int, default=None)
    x.add_argument("--jobs", type=int, default=None, help="並列実行のワーカー数")
    x.add_argument("--reduced", action="store_true", help="小さいパラメータで実行 (テスト用)")
    _common(x, field=False)
    return p


# ---------------------------------------------------------------------------
# 設定
# ---------------------------------------------------------------------------

def load_config(path: str) -> Dict[str, Any]:
    cfg_path = Path(path)
    if not cfg_path.is_file():
        print(f"[warn] config file not found: {cfg_path}", file=sys.stderr)
        return {}
    if tomllib is None or cfg_path.suffix.lower() != ".toml":
        print(f"[warn] config {cfg_path} ignored (TOML only)", file=sys.stderr)
        return {}
    try:
        with cfg_path.open("rb") as f:
            cfg = tomllib.load(f)
    except Exception as e:
        print(f"[warn] failed to load config {cfg_path}: {e}", file=sys.stderr)
        return {}
    tool = cfg.get("tool", {}) if isinstance(cfg, dict) else {}
    section = tool.get("bcwitt", {}) if isinstance(tool, dict) else {}
    return section if isinstance(section, dict) else {}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """CLI 引数 > 設定ファイル > 既定値。"""
    rc = RunConfig()
    if getattr(args, "config", None):
        for key, value in load_config(args.config).items():
            if key not in CONFIG_KEYS:
                print(f"[warn] unknown config key: {key}", file=sys.stderr)
                continue
            attr, typ = CONFIG_KEYS[key]
            try:
                setattr(rc, attr, typ(value))
            except (TypeError, ValueError):
                print(f"[warn] bad value for {key}: {value!r}", file=sys.stderr)
    overrides = {
        "field": getattr(args, "field", None) or getattr(args, "poly", None),
        "sidecar": getattr(args, "sidecar", None),
        "modulus": getattr(args, "modulus", None),
        "construction": getattr(args, "construction", None),
        "norm_bound": getattr(args, "norm_bound", None),
        "bound": getattr(args, "bound", None),
        "output_format": getattr(args, "output_format", None),
        "output": getattr(args, "output", None),
        "seed": getattr(args, "seed", None),
        "jobs": getattr(args, "jobs", None),
        "strict": getattr(args, "strict", None),
        "debug_checks": getattr(args, "debug_checks", None),
    }
    for attr, value in overrides.items():
        if value is not None:
            setattr(rc, attr, value)
    if rc.output_format not in FORMATS:
        print(f"[warn] unknown format {rc.output_format!r}; using json", file=sys.stderr)
        rc.output_format = "json"
    if rc.construction not in CONSTRUCTIONS:
        raise MathInputError(f"unknown construction {rc.construction!r}")
    return rc


# ---------------------------------------------------------------------------
# 出力
# ---------------------------------------------------------------------------

def stringify(obj: Any) -> Any:
    """数はすべて 10 進文字列に (bool はそのまま)。"""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (int, Fraction)):
        return str(obj)
    if isinstance(obj, CyclotomicElement):
        return [str(c) for c in obj.coeffs]
    if isinstance(obj, dict):
        return {str(k): stringify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [stringify(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return stringify(obj.to_dict())
    return str(obj)


def render_json(command: str, result: Any) -> str:
    payload = {"version": __version__, "command": command, "result": stringify(result)}
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def render_csv(command: str, result: Dict) -> Optional[str]:
    """表になる出力だけ (dr table, endo zeta)。"""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if "table" in result:
        w.writerow([""] + list(range(len(result["table"]))))
        for i, row in enumerate(result["table"]):
            w.writerow([i] + list(row))
    elif "coefficients" in result:
        w.writerow(["n", "a(n)"])
        for n, a in enumerate(result["coefficients"], start=1):
            w.writerow([n, a])
    else:
        return None
    return buf.getvalue()


def render_pretty(command: str, result: Any, indent: int = 0) -> str:
    pad = "  " * indent
    lines: List[str] = []
    if isinstance(result, dict):
        for k in sorted(result, key=str):
            v = result[k]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(render_pretty(command, v, indent + 1).rstrip("\n"))
            else:
                lines.append(f"{pad}{k}: {stringify(v) if not isinstance(v, str) else v}")
    elif isinstance(result, list):
        for v in result:
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}-")
                lines.append(render_pretty(command, v, indent + 1).rstrip("\n"))
            else:
                lines.append(f"{pad}- {v}")
    else:
        lines.append(f"{pad}{result}")
    return "\n".join(lines) + "\n"


def emit(rc: RunConfig, command: str, result: Any) -> None:
    data = stringify(result)
    if rc.output_format == "csv":
        text = render_csv(command, data) if isinstance(data, dict) else None
        if text is None:
            print(f"[warn] '{command}' has no tabular form; writing json", file=sys.stderr)
            text = render_json(command, result)
    elif rc.output_format == "pretty":
        text = f"# {command} (bcwitt {__version__})\n" + render_pretty(command, result)
    else:
        text = render_json(command, result)
    if rc.output:
        Path(rc.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# サブコマンド
# ---------------------------------------------------------------------------

def _field(rc: RunConfig) -> NumberField:
    if not rc.field:
        raise MathInputError("--field is required")
    return load_field(rc.field, rc.sidecar)


def _modulus(rc: RunConfig, field: NumberField):
    if not rc.modulus:
        raise MathInputError("--modulus is required")
    return parse_ideal(field, rc.modulus)


def cmd_field(args, rc: RunConfig):
    K = _field(rc)
    if args.action == "new":
        out = {
            "name": K.name,
            "polynomial": str(K.poly),
            "degree": K.degree,
            "signature": list(K.signature),
            "discriminant": K.discriminant,
            "integral_basis": [[str(c) for c in row] for row in K.basis],
            "units": {
                "torsion": str(K.units.torsion),
                "torsion_order": K.units.torsion_order,
                "fundamental": [str(u) for u in K.units.fundamental],
            },
            "class_number": K.class_number,
            "narrow_class_number": narrow_class_number(K),
        }
        return out
    x = K.parse_element(args.element)
    if args.action == "norm":
        return {"element": str(x), "norm": x.norm(), "trace": x.trace()}
    return {"element": str(x), "signs": list(x.sign_vector()), "totally_positive": x.is_totally_positive()}


def cmd_ideal(args, rc: RunConfig):
    K = _field(rc)
    if args.action == "factor":
        a = parse_ideal(K, args.ideal)
        return {"ideal": a, "factors": [{"prime": P, "exponent": e} for P, e in factor_ideal(a)]}
    if args.action == "enumerate":
        ideals = enumerate_ideals(K, rc.bound)
        return {"bound": rc.bound, "count": len(ideals), "ideals": list(ideals)}
    f = _modulus(rc, K)
    return {"modulus": f, "divisors": divisors_of(f)}


def cmd_rayclass(args, rc: RunConfig):
    K = _field(rc)
    return ray_class_group(_modulus(rc, K), strict=rc.strict)


def cmd_dr(args, rc: RunConfig):
    K = _field(rc)
    f = _modulus(rc, K)
    D = build_dr(f, rc.construction, getattr(args, "dr_norm_bound", None))
    if args.action == "table":
        return D
    if args.action == "idempotents":
        return {"modulus": f, "idempotents": idempotents(D), "labels": [D.elements[i].label for i in idempotents(D)]}
    target = build_dr(parse_ideal(K, args.target), rc.construction)
    return dr_project(D, target)


def _read_vector(source: str) -> Dict[str, Any]:
    text = source.strip()
    if text.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise MathInputError(f"invalid vector JSON: {e}") from e
        if not isinstance(data, dict):
            raise MathInputError("vector JSON must be an object")
        return data
    return read_sidecar(text)


def _components(data: Dict[str, Any], key: str) -> Dict[int, Any]:
    raw = data.get(key)
    if not isinstance(raw, dict):
        raise MathInputError(f"vector JSON needs a '{key}' object")
    return {int(n): v for n, v in raw.items()}


def cmd_witt(args, rc: RunConfig):
    if args.action == "frobcheck":
        rng = random.Random(rc.seed)
        ok = cyclotomic_frobenius_check(args.level, args.prime, args.trials, rng)
        return {"level": args.level, "prime": args.prime, "trials": args.trials, "passed": ok}
    if args.action == "periodic-rank":
        K = _field(rc)
        return periodic_rank(_modulus(rc, K), rc.construction)
    data = _read_vector(args.vector)
    ring = ring_from_name(args.ring or str(data.get("ring", "ZZ")))
    S = data.get("S")
    if not isinstance(S, list):
        raise MathInputError("vector JSON needs a truncation set 'S'")
    if args.action == "ghost":
        return ghost(witt_vector(S, _components(data, "x"), ring))
    w = ghost_vector(S, _components(data, "w"), ring)
    if args.action == "unghost":
        return unghost(w)
    return {"member": dwork_member(w), "S": list(w.S.elements), "ring": ring.name}


def cmd_endo(args, rc: RunConfig):
    if args.action == "ggc":
        return ggc_check_Q(args.level)
    K = _field(rc)
    if args.action == "zeta":
        return zeta_coefficients(K, rc.bound, euler_check=args.euler_check)
    D = build_dr(_modulus(rc, K), rc.construction)
    checks = verify_relations(crossed_ops(D, norm_bound=rc.norm_bound))
    return {
        "modulus": D.modulus,
        "size": D.size,
        "checked": len(checks),
        "passed": all(c.passed for c in checks),
        "relations": checks,
    }


def cmd_verify(args, rc: RunConfig):
    try:
        criteria = parse_suite(args.suite)
    except ValueError as e:
        raise _UsageError(str(e)) from e
    results = run_suite(criteria, seed=rc.seed, jobs=rc.jobs, reduced=args.reduced)
    if rc.output_format == "pretty":
        for r in results:
            print(f"criterion {r.criterion} ({r.name}): {'ok' if r.passed else 'FAILED'} [{r.seconds:.2f}s]", file=sys.stderr)
    return {
        "seed": rc.seed,
        "suite": [str(k) for k in criteria],
        "passed": all(r.passed for r in results),
        "results": results,
    }


class _UsageError(Exception):
    pass


COMMANDS: Dict[str, Callable] = {
    "field": cmd_field,
    "ideal": cmd_ideal,
    "rayclass": cmd_rayclass,
    "dr": cmd_dr,
    "witt": cmd_witt,
    "endo": cmd_endo,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.INFO, stream=sys.stderr)
    command = " ".join(x for x in (args.command, getattr(args, "action", None)) if x)
    try:
        rc = resolve_config(args)
        if rc.debug_checks:
            set_debug_checks(True)
        result = COMMANDS[args.command](args, rc)
        emit(rc, command, result)
    except _UsageError as e:
        print(f"bcwitt: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except VerificationError as e:
        print(f"[error] verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFY
    except (MathInputError, InconclusiveSearchError, FileNotFoundError) as e:
        print(f"[error] {e}", file=sys.stderr)
        return EXIT_MATH
    if args.command == "verify" and not result["passed"]:
        return EXIT_VERIFY
    if command == "endo verify" and not result["passed"]:
        return EXIT_VERIFY
    if command == "witt frobcheck" and not result["passed"]:
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

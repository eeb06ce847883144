"""bcwitt
数体 K の Deligne-Ribet モノイドと Witt ベクトルの厳密計算ライブラリ。

主な提供機能:
- 数体・分数イデアル (HNF) と素イデアル分解
- (狭義) 射線類群と Artin 表
- DR_f モノイドの 3 通りの構成と射影
- ℤ / ℚ / ℤ[ζ_m] 上の big Witt ベクトル (ghost, Frobenius, Verschiebung, Dwork 判定, 周期性)
- 有限レベルのエンドモチーフ (スペクトル, 交差積の関係式, ゼータ係数)
- CLI インターフェースと受け入れ基準ランナー
"""

__version__ = "0.1.0"

from .number_field import field_from_string, make_field
from .ideal_arith import parse_ideal, principal
from .dr_monoid import build_dr
from .witt import ghost, unghost, witt_vector

__all__ = [
    "field_from_string",
    "make_field",
    "parse_ideal",
    "principal",
    "build_dr",
    "ghost",
    "unghost",
    "witt_vector",
    "__version__",
]

"""例外クラス。

CLI はこの階層で終了コードを決める:
- MathInputError / InconclusiveSearchError -> 1
- VerificationError -> 2
"""
from __future__ import annotations


class BCWittError(Exception):
    """bcwitt 全体の基底例外。"""


class MathInputError(BCWittError, ValueError):
    """数学的に不正な入力 (可約多項式, 零イデアルなど)。"""


class InfiniteGroupError(MathInputError):
    def __init__(self, free_rank: int):
        super().__init__(f"quotient is infinite: free rank {free_rank}")
        self.free_rank = free_rank


class InconclusiveSearchError(BCWittError):
    """探索の完全性を保証できなかった (次数3以上で生成元が見つからない場合など)。"""


class VerificationError(BCWittError, RuntimeError):
    """内部の相互検証に失敗した。入力ではなく実装のバグを示す。"""


__all__ = [
    "BCWittError",
    "MathInputError",
    "InfiniteGroupError",
    "InconclusiveSearchError",
    "VerificationError",
]

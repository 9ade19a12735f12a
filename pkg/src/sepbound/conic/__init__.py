from .model import ConicProgram, MatExpr, ScalarExpr, Solution, hermitian_real_embedding
from .lowering import LoweredProgram, PsdBlock
from .backends import BACKENDS, solve_lowered
from .dump import dump_program, load_program

__all__ = [
    "ConicProgram", "MatExpr", "ScalarExpr", "Solution",
    "hermitian_real_embedding", "LoweredProgram", "PsdBlock",
    "BACKENDS", "solve_lowered", "dump_program", "load_program",
]

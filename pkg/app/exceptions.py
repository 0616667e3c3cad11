"""Jerarquía de errores del dominio.

Cada error conoce su código de salida para la CLI (1 = cómputo, 2 = entrada)
y el estatus HTTP con el que lo reportan los routers.
"""
from fastapi import status


class AppError(Exception):
    exit_code: int = 1
    http_status: int = status.HTTP_500_INTERNAL_SERVER_ERROR

    def __init__(self, message: str, diagnostics: list[str] | None = None):
        super().__init__(message)
        self.message = message
        self.diagnostics = list(diagnostics or [])


# ==================== Errores de entrada ====================
class InputError(AppError):
    exit_code = 2
    http_status = status.HTTP_400_BAD_REQUEST


class InvalidInputError(InputError, ValueError):
    pass


class InvalidParameterError(InputError, ValueError):
    http_status = status.HTTP_422_UNPROCESSABLE_ENTITY


class FormatError(InputError):
    pass


class EmptyChainError(InputError):
    pass


class UnderdeterminedError(InputError):
    http_status = status.HTTP_422_UNPROCESSABLE_ENTITY


# ==================== Errores de cómputo ====================
class ComputationError(AppError):
    exit_code = 1


class SingularMatrixError(ComputationError):
    pass


class NegativeVarianceError(ComputationError):
    pass


class NoSolutionError(ComputationError):
    http_status = status.HTTP_422_UNPROCESSABLE_ENTITY


class DataIOError(ComputationError):
    pass

import logging

from fastapi import APIRouter, HTTPException

from app.exceptions import AppError
from app.models import CalibrationResult
from app.schemas import CalibrationRequest
from app.services.calibration import calibrate

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/calibration", tags=["Calibración"])


@router.post("/", response_model=CalibrationResult)
def calibrate_model(request: CalibrationRequest):
    """
    Calibración por mínimos cuadrados sobre el 70% de las opciones

    Retorna parámetros, pérdida final, RMSE de entrenamiento y prueba
    y el error de cada cotización
    """
    try:
        return calibrate(request.quotes, request.model, request.config)
    except AppError as exc:
        logger.warning("Calibración rechazada: %s", exc.message)
        raise HTTPException(status_code=exc.http_status, detail=exc.message)

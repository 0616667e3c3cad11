from fastapi import APIRouter, HTTPException

from app.exceptions import AppError
from app.schemas import VarianceRequest, VarianceResponse
from app.services.model_catalog import build_params
from app.services.pricing import model_variance

router = APIRouter(prefix="/variance", tags=["Varianza"])


@router.post("/", response_model=VarianceResponse)
def compute_variance(request: VarianceRequest):
    """
    Varianza del log-precio en cada instante pedido

    - analytical: fórmula cerrada del modelo
    - numerical: exponencial de la matriz por bloques
    """
    try:
        params = build_params(request.model, request.params)
        variances = model_variance(
            params, request.times, request.method, request.initial_covariance
        )
    except AppError as exc:
        raise HTTPException(status_code=exc.http_status, detail=exc.message)

    return VarianceResponse(
        model=request.model,
        method=request.method,
        times=request.times,
        variances=[float(v) for v in variances],
    )

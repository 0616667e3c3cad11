import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.config import settings
from app.logging_config import configure_logging
from app.routers import (
    calibration_router,
    pricing_router,
    variance_router,
)

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Eventos del ciclo de vida: inicio y cierre"""
    # Inicio
    configure_logging()
    logger.info("%s v%s iniciado", settings.app_name, settings.app_version)
    yield
    # Cierre
    logger.info("Aplicación detenida")


# Crear aplicación FastAPI
app = FastAPI(
    title=settings.app_name,
    version=settings.app_version,
    description="API de varianza de Lyapunov, precios de Black y calibración de modelos de energía",
    lifespan=lifespan
)

# Middleware CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],  # En producción, especificar orígenes permitidos
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


# Endpoint raíz
@app.get("/")
async def root():
    return {
        "message": "Lyapunov Energy Pricer API",
        "version": settings.app_version,
        "status": "online"
    }


@app.get("/health")
async def health_check():
    return {"status": "healthy"}


# Incluir routers
app.include_router(variance_router.router)
app.include_router(pricing_router.router)
app.include_router(calibration_router.router)


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(
        "app.main:app",
        host="0.0.0.0",
        port=8000,
        reload=settings.debug
    )

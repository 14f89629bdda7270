"""
Health check endpoint.
"""
from fastapi import APIRouter

from partitioner.core.config import settings
from partitioner.models.schemas import HealthResponse

router = APIRouter(tags=["health"])


@router.get("/health", response_model=HealthResponse)
async def health_check() -> HealthResponse:
    """
    Verify the service is up.

    Returns:
        HealthResponse: Service status and version information
    """
    return HealthResponse(status="ok", version=settings.VERSION)

"""
Recent solver, sweep and simulation events.
"""
import logging
from datetime import datetime
from typing import Any, Dict, Optional

from fastapi import APIRouter, Query

from partitioner.services.log_service import log_service

logger = logging.getLogger(__name__)
router = APIRouter(tags=["logs"])


@router.get("/logs/history")
async def get_logs_history(
    count: int = Query(100, ge=1),
    action: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Recent events, optionally only those with a given action
    (milp_solved, pareto_sweep, simulation, ...).
    """
    logs = log_service.events(action)[-count:] if action else log_service.get_recent_logs(count)
    return {
        "success": True,
        "logs": logs,
        "count": len(logs),
        "stats": log_service.get_stats(),
        "timestamp": datetime.now().isoformat(),
    }


@router.delete("/logs/history")
async def clear_logs_history() -> Dict[str, Any]:
    logger.info("Clearing log history")
    log_service.clear()
    return {"success": True, "timestamp": datetime.now().isoformat()}

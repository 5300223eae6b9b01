"""
State Manager for knitgrid
Tracks pipeline phases, their results, errors and warnings for one session
"""

import json
from datetime import datetime
from typing import Any, Dict, Optional

from utils.debug_utils import debug_log

# Type definition for pipeline state
KnitState = Dict[str, Any]

PHASES = ("compile", "evaluate", "path", "contract")


def create_initial_state(command: str, source: str = "", config: Optional[Dict[str, Any]] = None) -> KnitState:
    """Create initial pipeline state"""
    return {
        "command": command,
        "source": source,
        "config": config or {},
        "current_phase": "initialized",
        "session_logs": [],
        "errors": [],
        "warnings": [],

        # Phase results
        "compile_report": None,
        "knit_result": None,
    }


def log_phase_execution(state: KnitState, phase: str, result: Dict[str, Any]) -> KnitState:
    """Log a phase result to the session logs"""
    log_entry = {
        "timestamp": datetime.now().isoformat(),
        "phase": phase,
        "success": result.get("success", False),
        "elapsed_ms": result.get("elapsed_ms", 0.0),
    }

    if not result.get("success"):
        log_entry["error"] = result.get("error", "Unknown error")
        state["errors"] = state.get("errors", []) + [f"{phase}: {result.get('error', 'Unknown error')}"]

    state["session_logs"] = state.get("session_logs", []) + [log_entry]
    state["current_phase"] = phase
    debug_log(f"phase {phase}: success={log_entry['success']} elapsed={log_entry['elapsed_ms']:.1f}ms")
    return state


def phase_times(state: KnitState) -> Dict[str, float]:
    """Latest elapsed time per phase (ms), zero for phases that did not run"""
    times = {phase: 0.0 for phase in PHASES}
    for entry in state.get("session_logs", []):
        if entry.get("phase") in times and entry.get("success"):
            times[entry["phase"]] = float(entry.get("elapsed_ms", 0.0))
    return times


def add_warning(state: KnitState, warning_message: str) -> KnitState:
    """Add warning message to state"""
    state["warnings"] = state.get("warnings", []) + [warning_message]
    return state


def add_error(state: KnitState, error_message: str) -> KnitState:
    """Add error message to state"""
    state["errors"] = state.get("errors", []) + [error_message]
    return state


def get_run_summary(state: KnitState) -> Dict[str, Any]:
    """Get summary of the session for display"""
    return {
        "command": state.get("command", "unknown"),
        "current_phase": state.get("current_phase", "unknown"),
        "phases_run": [entry["phase"] for entry in state.get("session_logs", [])],
        "total_errors": len(state.get("errors", [])),
        "total_warnings": len(state.get("warnings", [])),
        "has_result": state.get("knit_result") is not None,
    }


def export_state_to_json(state: KnitState, output_path: str) -> bool:
    """Export current state to JSON file for debugging/analysis"""
    try:
        export_data = {
            "metadata": {
                "export_timestamp": datetime.now().isoformat(),
                "command": state.get("command"),
                "source": state.get("source"),
                "current_phase": state.get("current_phase", "unknown"),
            },
            "config": state.get("config", {}),
            "results": {
                "compile_report": state.get("compile_report"),
                "knit_result": state.get("knit_result"),
            },
            "session_info": {
                "session_logs": state.get("session_logs", []),
                "errors": state.get("errors", []),
                "warnings": state.get("warnings", []),
            },
        }

        with open(output_path, "w", encoding="utf-8") as f:
            json.dump(export_data, f, ensure_ascii=False, indent=2)

        return True
    except (OSError, TypeError) as e:
        debug_log(f"Error exporting state to JSON: {e}")
        return False

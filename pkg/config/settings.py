"""
Environment configuration for knitgrid

Values are read after load_dotenv() has populated the environment.
"""

import os

from pydantic import BaseModel, Field

DEFAULT_QUBIT_CAP = 20


def _default_threads() -> int:
    return max(1, min(8, os.cpu_count() or 1))


class KnitGridSettings(BaseModel):
    """Process-wide settings"""
    threads: int = Field(default_factory=_default_threads, ge=1, description="Worker cap for parallel fan-out")
    qubit_cap: int = Field(default=DEFAULT_QUBIT_CAP, ge=1, description="Largest circuit the simulator accepts")
    debug_mode: bool = Field(default=False, description="Print [DEBUG] lines to stderr")
    language: str = Field(default="en", description="Message catalogue locale")
    output_dir: str = Field(default="./output", description="Default directory for written artifacts")

    @classmethod
    def from_env(cls) -> "KnitGridSettings":
        values = {
            "debug_mode": os.getenv("DEBUG_MODE", "false").lower() == "true",
            "language": os.getenv("LANGUAGE", "en"),
            "output_dir": os.getenv("OUTPUT_DIR", "./output"),
        }
        threads = os.getenv("KNITGRID_THREADS")
        if threads:
            values["threads"] = int(threads)
        cap = os.getenv("KNITGRID_QUBIT_CAP")
        if cap:
            values["qubit_cap"] = int(cap)
        return cls(**values)

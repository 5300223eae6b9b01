"""
Report Writing Utility
CSV tables via pandas, JSON documents via pydantic
"""

import os
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import BaseModel

PARETO_COLUMNS = ["trial_id", "pp_cost", "est_error", "num_leaves", "num_cuts", "leaf_qubits", "compression",
                  "next_leaf", "method", "num_parts", "imbalance", "partition_seed"]
BENCH_COLUMNS = ["family", "n", "cuts", "pp_cost_ours", "pp_cost_naive", "est_error", "compile_ms"]


class ReportWriter:
    """Tabular and document output"""

    def __init__(self, output_dir: str = "./output"):
        self.output_dir = output_dir

    def resolve(self, file_name: str) -> str:
        os.makedirs(self.output_dir, exist_ok=True)
        return os.path.join(self.output_dir, file_name)

    @staticmethod
    def pareto_frame(rows: List[Dict[str, Any]], knee_trial: Optional[int] = None) -> pd.DataFrame:
        """One row per front candidate, ordered by cost"""
        df = pd.DataFrame(rows, columns=PARETO_COLUMNS)
        df["knee"] = df["trial_id"] == knee_trial if knee_trial is not None else False
        return df

    @staticmethod
    def bench_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
        extra = [c for row in rows for c in row if c not in BENCH_COLUMNS]
        columns = BENCH_COLUMNS + list(dict.fromkeys(extra))
        return pd.DataFrame(rows, columns=columns)

    def write_csv(self, df: pd.DataFrame, file_name: str) -> str:
        path = self.resolve(file_name)
        df.to_csv(path, index=False, lineterminator="\n")
        return path

    def write_model(self, model: BaseModel, file_name: str) -> str:
        path = self.resolve(file_name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(model.model_dump_json(indent=2))
        return path

    def write_text(self, text: str, file_name: str) -> str:
        path = self.resolve(file_name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path


def frame_to_csv(df: pd.DataFrame) -> str:
    return df.to_csv(index=False, lineterminator="\n")

"""Model-runtime adapters for the plftk toolkit.

Three file-driven scripts: a zero-shot teacher annotator, a student
trainer, and a student inference runner, all emitting exactly the core
toolkit's JSON/JSONL/label formats.
"""

from .common import AdapterError, PredictedBox, RuntimeUnavailableError
from .teacher import TeacherConfig
from .train import TrainConfig

__all__ = [
    "AdapterError",
    "PredictedBox",
    "RuntimeUnavailableError",
    "TeacherConfig",
    "TrainConfig",
]

from .store import AttemptRecord, Exercise, ServiceStore, load_config

__all__ = ["AttemptRecord", "Exercise", "ServiceStore", "load_config"]

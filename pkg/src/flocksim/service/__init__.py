from .app import EngineRuntime, create_app, serve

__all__ = ["EngineRuntime", "create_app", "serve"]

from .app import ServiceSettings, app_from_env, create_app

__all__ = ["ServiceSettings", "app_from_env", "create_app"]

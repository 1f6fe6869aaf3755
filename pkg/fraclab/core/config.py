from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """
    Process configuration loaded from environment variables.
    See .env.example for the recognised keys.

    Only logging and output locations live here. Numerical parameters come
    from the JSON run configuration so that a run never depends on the
    environment it was launched from.
    """

    # Application
    APP_NAME: str = "fraclab"
    DEBUG: bool = False

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"

    # Artifacts
    OUT_DIR: str = "out"

    # Seed used by `fraclab selftest` when --seed is not given
    SELFTEST_SEED: int = 20240601

    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "ignore"


# Singleton instance
settings = Settings()

"""Runtime budgets and defaults, read from ``OG6_*`` environment variables."""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Budgets for the brute-force searches and CLI defaults."""

    # Enumeration bounds (worst case of the classification: rank 5, det 4^5)
    max_rank: int = 5
    max_det: int = 1024

    # Certified order cap for isometries of the indefinite host
    order_cap: int = 120

    # Brute-force budgets
    fqf_budget: int = 10000
    group_budget: int = 50000
    search_node_budget: int = 2_000_000

    # Coordinate box for explicit embeddings into 3U + 2[-2]
    embedding_box: int = 2

    # CLI
    jobs: int = 1
    log_level: str = "WARNING"

    model_config = SettingsConfigDict(
        env_prefix="OG6_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


settings = Settings()

import os

DATABASE_URL = os.getenv("DATABASE_URL", "sqlite:///./glhs.db")

# Réglages de processus ; la graine d'expérience se lit à part (priorité config < env < flag).
GLHS_WORKERS = int(os.getenv("GLHS_WORKERS", "1"))
GLHS_BATCH_SIZE = int(os.getenv("GLHS_BATCH_SIZE", "4096"))
GLHS_LOG_LEVEL = os.getenv("GLHS_LOG_LEVEL", "WARNING").upper()


def env_seed() -> int | None:
    """GLHS_SEED, relu à chaque appel."""
    raw = os.getenv("GLHS_SEED")
    if raw is None or raw.strip() == "":
        return None
    return int(raw)

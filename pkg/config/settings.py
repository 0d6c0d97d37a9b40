import os
from pathlib import Path
from dotenv import load_dotenv

ROOT_DIR = Path(__file__).parent.parent
SCHEDULES_DIR = ROOT_DIR / "data" / "schedules"

load_dotenv(ROOT_DIR / ".env")

class Settings:
    APP_ENV: str = os.getenv("APP_ENV", "development")
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    LOG_FILE: Path = Path(os.getenv("LOG_FILE", "logs/orbit.log"))
    SCHEDULE_PATH: str = os.getenv("SCHEDULE_PATH", str(SCHEDULES_DIR / "fixture.json"))
    PRECISION_BITS: int = int(os.getenv("PRECISION_BITS", "200"))
    SEED: int = int(os.getenv("SEED", "20240101"))
    OUT_DIR: Path = Path(os.getenv("OUT_DIR", "./out"))
    BASIS_CACHE_SIZE: int = int(os.getenv("BASIS_CACHE_SIZE", "200000"))
    MAX_POWER_STEPS: int = int(os.getenv("MAX_POWER_STEPS", "100000"))
    LAD_MAX_FAMILY: int = int(os.getenv("LAD_MAX_FAMILY", "20000"))
    VERSION: str = "1.0.0"
    APP_NAME: str = "Orbit Section Verifier"

    @classmethod
    def validate(cls) -> list:
        warnings = []
        if cls.PRECISION_BITS < 64:
            warnings.append(f"PRECISION_BITS={cls.PRECISION_BITS} is below the 64-bit floor; 64 will be used.")
        elif cls.PRECISION_BITS < 200:
            warnings.append(f"PRECISION_BITS={cls.PRECISION_BITS} is below the default 200; certificates get looser.")
        if not cls.resolve_schedule(cls.SCHEDULE_PATH).exists():
            warnings.append(f"Default schedule not found: {cls.SCHEDULE_PATH}")
        return warnings

    @classmethod
    def precision(cls, requested: int | None = None) -> int:
        return max(64, requested if requested is not None else cls.PRECISION_BITS)

    @staticmethod
    def resolve_schedule(name_or_path: str) -> Path:
        """Bare names like ``fixture`` resolve to the shipped descriptors."""
        path = Path(name_or_path)
        if path.suffix or path.exists():
            return path
        return SCHEDULES_DIR / f"{name_or_path}.json"

settings = Settings()

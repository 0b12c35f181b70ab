import os
import sys
from dotenv import load_dotenv

load_dotenv()

_ASSETS_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "assets")


def _clip_from_env(value):
    if value.strip().lower() in ("", "none", "off", "0"):
        return None
    return float(value)


class Config:
    # --- Attribute data ---
    CATALOG_PATH = os.getenv("ZPH_CATALOG_PATH", os.path.join(_ASSETS_DIR, "catalog.tsv"))
    BASE_TABLE_PATH = os.getenv("ZPH_BASE_TABLE_PATH", os.path.join(_ASSETS_DIR, "base_table.tsv"))

    # --- Encoder shape ---
    # Desk scale is 2 layers x 32 cells; the full-size recipe is 5 x 320.
    INPUT_DIM = int(os.getenv("ZPH_INPUT_DIM", "40"))
    ENCODER_LAYERS = int(os.getenv("ZPH_ENCODER_LAYERS", "2"))
    ENCODER_CELLS = int(os.getenv("ZPH_ENCODER_CELLS", "32"))

    # --- Training ---
    LEARNING_RATE = float(os.getenv("ZPH_LEARNING_RATE", "0.005"))
    REG_LAMBDA = float(os.getenv("ZPH_REG_LAMBDA", "1e-4"))
    BATCH_SIZE = int(os.getenv("ZPH_BATCH_SIZE", "4"))
    MAX_STEPS = int(os.getenv("ZPH_MAX_STEPS", "2000"))
    GRAD_CLIP_NORM = _clip_from_env(os.getenv("ZPH_GRAD_CLIP_NORM", "5.0"))
    SEED = int(os.getenv("ZPH_SEED", "0"))
    VALIDATION_FRACTION = float(os.getenv("ZPH_VALIDATION_FRACTION", "0.05"))
    LOG_EVERY = int(os.getenv("ZPH_LOG_EVERY", "100"))

    @classmethod
    def validate(cls):
        errors = []

        for name in ("CATALOG_PATH", "BASE_TABLE_PATH"):
            path = getattr(cls, name)
            if not os.path.isfile(path):
                errors.append(f"{name} points to a missing file: {path}")
        for name in ("INPUT_DIM", "ENCODER_LAYERS", "ENCODER_CELLS", "BATCH_SIZE", "LOG_EVERY"):
            if getattr(cls, name) <= 0:
                errors.append(f"ZPH_{name} must be positive")
        if cls.LEARNING_RATE < 0:
            errors.append("ZPH_LEARNING_RATE must not be negative")
        if cls.REG_LAMBDA < 0:
            errors.append("ZPH_REG_LAMBDA must not be negative")
        if cls.MAX_STEPS < 0:
            errors.append("ZPH_MAX_STEPS must not be negative")
        if cls.GRAD_CLIP_NORM is not None and cls.GRAD_CLIP_NORM <= 0:
            errors.append("ZPH_GRAD_CLIP_NORM must be positive (or 'none')")
        if not 0 <= cls.VALIDATION_FRACTION < 1:
            errors.append("ZPH_VALIDATION_FRACTION must be in [0, 1)")

        if errors:
            for e in errors:
                print(f"[Config Error] {e}", file=sys.stderr)
            return False
        return True

# src/utils/settings.py
import os

from dotenv import load_dotenv

load_dotenv()

# Worker processes for ensemble runs (--threads overrides)
THREADS = int(os.getenv("RBN_THREADS") or 1)
# Largest N the exhaustive oracle accepts (2^N states)
ORACLE_LIMIT = int(os.getenv("RBN_ORACLE_LIMIT") or 20)
OUT_DIR = os.getenv("RBN_OUT_DIR") or "out"
LOG_LEVEL = (os.getenv("RBN_LOG_LEVEL") or "INFO").upper()

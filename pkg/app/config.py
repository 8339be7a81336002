import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# Property runs
PROPERTY_SEED = int(os.getenv("PROPERTY_SEED", "2020"))
PROPERTY_SAMPLES = int(os.getenv("PROPERTY_SAMPLES", "1000"))
PROPERTY_BUDGET = int(os.getenv("PROPERTY_BUDGET", "8"))

DEFAULT_ALGEBRA_MIX = tuple(
    idx.strip() for idx in os.getenv("DEFAULT_ALGEBRA_MIX", "lin,gra,sha").split(",") if idx.strip()
)
GRADED_SAMPLE_BOUND = int(os.getenv("GRADED_SAMPLE_BOUND", "32"))

REDUCE_STEP_LIMIT = int(os.getenv("REDUCE_STEP_LIMIT", "1000"))

API_CORS_ORIGINS = [
    origin.strip() for origin in os.getenv("API_CORS_ORIGINS", "*").split(",") if origin.strip()
]

import os
import sys

from hypothesis import HealthCheck, settings

# make `import oracles` work regardless of how pytest was invoked
sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

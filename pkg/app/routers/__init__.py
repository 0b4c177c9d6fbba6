from .simulate import router as simulate_router
from .latency import router as latency_router
from .profile import router as profile_router

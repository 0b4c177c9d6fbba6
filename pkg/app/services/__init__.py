from . import problem_service
from . import matrix_io
from . import oracle_service
from . import serial_service
from . import parallel_service
from . import latency_service
from . import profiler_service

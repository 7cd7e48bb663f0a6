# Ratunif Services v1.0.0
# Saturation-based unification for rational first-order and higher-order pattern terms

from .config import *
from .errors import *
from .term_service import *
from .surface_service import *
from .flatten_service import *
from .expansion_service import *
from .saturation_service import *
from .mgu_service import *
from .oracle_service import *
from .contract_service import *
from .settings_service import *
from .pipeline_service import *
from .render_service import *
from .cli_service import *

from .bernoulli import bernoulli_predict, bernoulli_update, lmb_predict, lmb_update
from .extract import extract_states
from .gmphd import phd_predict, phd_update
from .models import BirthModel, MotionModel, SensorModel

__all__ = [
    "BirthModel",
    "MotionModel",
    "SensorModel",
    "bernoulli_predict",
    "bernoulli_update",
    "extract_states",
    "lmb_predict",
    "lmb_update",
    "phd_predict",
    "phd_update",
]

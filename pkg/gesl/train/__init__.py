from gesl.train.record import RunRecord
from gesl.train.lr_scheduler import StepSizeLR, schedule_factor

"""Detection and isolation of intermittent over-creep with the WMA-VMD index."""
from .analysis import (ConditionReport, IsolabilityTable, WindowChoice, check_conditions,
                       isolability_table, select_window, select_windows)
from .baseline import BaselineAlarm, BaselineThresholds, baseline_criteria
from .detect import (AlarmEvent, ChannelModel, Decision, DetectionResult, Detector,
                     DetectorModel, Kind, detect_step, detect_trace, train, train_model,
                     wma_series)
from .errors import (CompatibilityError, ConfigError, DegenerateTraceError, IllConditionedWarning,
                     IngestionError, InputDomainError, InsufficientDataError, SpecError,
                     WmaVmdError)
from .frames import Mode, Trace, VelocityFrame
from .owv import OwvDiagnostics, WeightVector, positivity_report, qp_oracle, solve_owv
from .sim import (FaultEvent, InjectionSpec, Labels, NoiseSpec, ProfileSpec, Segment, generate,
                  inject, inter_station_profile)
from .stats import (AutocovSequence, ToeplitzGamma, build_gamma, estimate_autocov,
                    wma_variance)
from .virtual import InertialParams, InertialReference, virtual_wheelset
from .vmd import check_min_inequalities, check_vmd_properties, vmd, vmd_negated

__version__ = "0.1.0"

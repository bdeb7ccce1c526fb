import numpy as np
import pytest

from wmavmd import (FaultEvent, InjectionSpec, Mode, NoiseSpec, ProfileSpec, check_conditions,
                    generate, inject, isolability_table, select_window, select_windows, train_model)
from wmavmd.analysis import check_window_range
from wmavmd.errors import ConfigError


def test_select_window_examples():
    assert select_window([1.6, 1.1, 0.98], 1.0).window == 3
    assert select_window([1.6, 1.1, 0.98], 1.7).window == 1
    miss = select_window({1: 1.6, 2: 1.1, 3: 0.98}, 0.5)
    assert not miss.found and miss.gap == pytest.approx(0.48)
    # strict inequality: equal to the threshold is not enough
    assert select_window([1.6, 1.0], 1.0).window is None
    with pytest.raises(ConfigError):
        select_window([1.0], 0.0)


def test_table_shape_and_trend(model_w13):
    table = isolability_table(model_w13)
    assert len(table.rows) == 4 * 2 * 3
    assert table.channels == [0, 1, 2, 3] and table.signs == [1, -1]
    for c in range(4):
        for s in (1, -1):
            assert table.is_non_increasing(c, s)
    text = table.format()
    assert text.splitlines()[0].startswith("Slip (km/h) | i=1")
    assert "Slide (km/h)" in text and "*" not in text


def test_constant_training_thresholds_zero():
    prof = ProfileSpec([(Mode.TRACTION, 150, 60), (Mode.BRAKING, 150, 0)], 0.1)
    m = train_model(generate(prof, NoiseSpec(sigma=0.0)), [1, 2, 3])
    assert all(r.threshold == 0 for r in isolability_table(m).rows)


def test_window_range_required(training_trace, model_w13):
    assert check_window_range(model_w13) == [1, 2, 3]
    with pytest.raises(ConfigError):
        check_window_range(train_model(training_trace, [3]))
    with pytest.raises(ConfigError):
        check_window_range(train_model(training_trace, [1, 3]))


def test_select_windows_per_channel(model_w13):
    table = isolability_table(model_w13)
    big = max(r.threshold for r in table.rows) + 0.1
    assert all(ch.window == 1 for ch in select_windows(model_w13, big).values())
    f = [big, 0.01, big, big]
    out = select_windows(model_w13, f)
    assert out[(1, 1)].window is None and out[(0, 1)].window == 1


def test_condition_predictions(training_trace, model_w13):
    tr = training_trace.slice(0, 6000)
    thr = model_w13.entry(0, 1, 3).threshold
    common = FaultEvent((0, 1, 2, 3), "slip", 400, 6, 1.0)
    single = FaultEvent((0,), "slip", 1000, 6, 1.2 * thr)
    small = FaultEvent((2,), "slip", 1200, 6, 0.2)
    _, labels = inject(tr, InjectionSpec([common, single, small]))
    rep = check_conditions(model_w13, tr, labels.offsets, 3)
    # common-mode: the fault direction is all-ones in every window sample
    assert not rep.necessary_detectability[402:406].any()
    assert rep.prediction(404, 0) == "undetectable"
    assert rep.fault_index[1002:1006, 0] == pytest.approx(1.2 * thr)
    assert rep.sufficient_isolability[1002:1006, 0].all()
    assert rep.prediction(1004, 0) == "isolated"
    # other channels see a zero index: necessary isolability fails there
    assert rep.prediction(1004, 1) == "not-isolable"
    assert rep.prediction(1204, 2) == "indeterminate"
    assert not rep.conditional.any()
    assert rep.prediction(0, 0) == "no-decision"

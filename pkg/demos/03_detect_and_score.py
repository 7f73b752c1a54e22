"""
Demo 3: score the attacked run and compute the challenge metrics.

Per-timestep anomaly score = mean squared reconstruction error, smoothed
with a trailing 7-hour moving average. The alarm threshold is the 95th
percentile of the smoothed training scores; anything strictly above it is
flagged.
"""

from pathlib import Path

from tdcae import (
    DetectionConfig,
    apply_scaler,
    detect,
    evaluate_flags,
    fit_threshold,
    load_csv,
    load_model,
)
from tdcae.metrics import format_table, intervals_from_labels
from tdcae.svgplot import line_plot

OUT = Path(__file__).parent / "output"
model, scaler, _ = load_model(OUT / "model.json")
train_scaled = apply_scaler(scaler, load_csv(OUT / "train.csv"))
test_frame = load_csv(OUT / "test.csv")
test_scaled = apply_scaler(scaler, test_frame)

"""
## Threshold and detection
"""

config = DetectionConfig(window=7, percentile=95.0)
threshold = fit_threshold(model, train_scaled, config)
result = detect(model, test_scaled, threshold, config)
print(f"threshold {threshold:.6f}; flagged {int(result.flags.sum())} hours")

shaded = [(iv.start, iv.end) for iv in intervals_from_labels(test_frame.labels)]
line_plot(
    OUT / "detection.svg",
    [("smoothed error", result.smoothed_scores)],
    title="reconstruction error with attack windows shaded",
    threshold=threshold,
    shaded=shaded,
    y_label="mse",
)

"""
## Challenge metrics

S_TTD rewards catching each attack early (1.0 = every attack flagged the
hour it starts), S_CLF is the mean of true-positive and true-negative
rates, and the ranking score S averages the two.
"""

report = evaluate_flags(result.flags, test_frame.labels)
print(format_table({"synthetic": report}))
print(f"\nwrote {OUT / 'detection.svg'}")

"""Command-line entry point.

Exit codes: 0 success, 1 unexpected failure, 2 usage error, 3 input
format error, 4 record shorter than the two-minute minimum, 5 invalid
pipeline state, 6 filesystem error.
"""

from __future__ import annotations

import sys
from concurrent.futures import ThreadPoolExecutor

import click

from .exceptions import InputFormatError, MinimumDurationError, StateError
from .model import (
    BeatClass,
    CorrectionParams,
    DetectorParams,
    IrregularityParams,
    PipelineParams,
)
from .pipeline import PipelineConfig, run_pipeline

EXIT_FORMAT = 3
EXIT_DURATION = 4
EXIT_STATE = 5
EXIT_IO = 6


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--input", "inputs", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Input record; repeat for batch runs.")
@click.option("--format", "fmt", default="auto",
              type=click.Choice(["auto", "txt", "edf", "bdf", "wfdb", "rri_only", "session"],
                                case_sensitive=False),
              help="Input format (default: detect).")
@click.option("--sample-rate", type=float, default=None,
              help="Sample rate override for text input (Hz).")
@click.option("--qrs-threshold", type=float, default=DetectorParams.qrs_threshold,
              show_default=True, help="Detector threshold scale.")
@click.option("--post-threshold", type=float, default=DetectorParams.post_threshold,
              show_default=True, help="Post-filter threshold (0 disables).")
@click.option("--amplify", type=float, default=DetectorParams.amplifier,
              show_default=True, help="Signal amplification constant.")
@click.option("--invert", is_flag=True, help="Invert the signal polarity.")
@click.option("--rri-upper", type=float, default=IrregularityParams.rri_upper_frac,
              show_default=True, help="Upper regional RRI bound (fraction).")
@click.option("--rri-lower", type=float, default=IrregularityParams.rri_lower_frac,
              show_default=True, help="Lower regional RRI bound (fraction).")
@click.option("--grad-inc", type=float, default=IrregularityParams.grad_inc_frac,
              show_default=True, help="Gradual-increase threshold (one-beat window).")
@click.option("--grad-dec", type=float, default=IrregularityParams.grad_dec_frac,
              show_default=True, help="Gradual-decrease threshold (one-beat window).")
@click.option("--noise-window-ms", type=float, default=200.0, show_default=True,
              help="Half-window for the noise profile (ms).")
@click.option("--loops", type=int, default=CorrectionParams.loops, show_default=True,
              help="Correction loop count.")
@click.option("--pwave/--no-pwave", "pwave", default=CorrectionParams.analyze_pwaves,
              show_default=True, help="Analyze P-waves during classification.")
@click.option("--pwave-sensitivity", type=float,
              default=CorrectionParams.pwave_sensitivity, show_default=True,
              help="P-wave detector sensitivity multiplier.")
@click.option("--test-duration", type=float, default=None,
              help="Analyze only a test span of this many seconds.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for random test-region placement.")
@click.option("--reuse-region", is_flag=True,
              help="Replay the test span saved in the previous session file.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=".",
              show_default=True, help="Output directory.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None,
              help="Write the validation report to this path.")
@click.option("--reference", "reference_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="Reference annotations to score against.")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker threads for batch runs.")
def main(
    inputs, fmt, sample_rate, qrs_threshold, post_threshold, amplify, invert,
    rri_upper, rri_lower, grad_inc, grad_dec, noise_window_ms, loops, pwave,
    pwave_sensitivity, test_duration, seed, reuse_region, out_dir, report_path,
    reference_path, jobs,
):
    """Detect heartbeats in single-lead ECG, correct irregular RR
    intervals, and write .rtimes/.bi/session outputs."""
    params = PipelineParams(
        detector=DetectorParams(
            qrs_threshold=qrs_threshold,
            post_threshold=post_threshold,
            amplifier=amplify,
            invert=invert,
        ),
        irregularity=IrregularityParams(
            rri_upper_frac=rri_upper,
            rri_lower_frac=rri_lower,
            grad_inc_frac=grad_inc,
            grad_dec_frac=grad_dec,
        ),
        correction=CorrectionParams(
            loops=loops,
            analyze_pwaves=pwave,
            pwave_sensitivity=pwave_sensitivity,
        ),
        noise_window_ms=noise_window_ms,
    )
    configs = [
        PipelineConfig(
            input_path=path,
            format=fmt.lower(),
            sample_rate_override=sample_rate,
            params=params,
            test_duration=test_duration,
            seed=seed,
            reuse_region=reuse_region,
            out_dir=out_dir,
            report_path=report_path,
            reference_path=reference_path,
        )
        for path in inputs
    ]
    try:
        if jobs > 1 and len(configs) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(run_pipeline, configs))
        else:
            results = [run_pipeline(c) for c in configs]
    except InputFormatError as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(EXIT_FORMAT)
    except MinimumDurationError as exc:
        click.echo(f"duration error: {exc}", err=True)
        sys.exit(EXIT_DURATION)
    except StateError as exc:
        click.echo(f"state error: {exc}", err=True)
        sys.exit(EXIT_STATE)
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        sys.exit(EXIT_IO)

    for config, result in zip(configs, results):
        session = result.session
        counts = {}
        for beat in session.beats:
            counts[beat.klass] = counts.get(beat.klass, 0) + 1
        click.echo(f"record: {config.input_path}")
        click.echo(f"  beats total     {len(session.beats)}")
        for klass in BeatClass:
            if counts.get(klass):
                click.echo(f"  {klass.value.lower():<15} {counts[klass]}")
        click.echo(f"  regions         {len(session.regions)}")
        click.echo(
            f"  valid pre/post  {result.valid_prop_pre:.4f}/{result.valid_prop_post:.4f}"
        )
        click.echo(f"  epochs pre/post {result.epochs_pre}/{result.epochs_post}")
        click.echo(f"  wrote {result.rtimes_path}, {result.bi_path}, {result.session_path}")
        if result.report is not None:
            click.echo("  validation:")
            for line in result.report.as_text().strip().splitlines():
                click.echo(f"    {line}")


if __name__ == "__main__":
    main()

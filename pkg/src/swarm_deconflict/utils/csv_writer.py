"""Machine-readable run outputs: delay ledger CSV, metrics JSON, histogram and campaign summaries."""

import csv
import json
import logging
import os
from typing import Any, Dict, List, Mapping, Sequence

import pandas as pd

from ..models.core import MetricsReport
from ..simnet.delay import DelayLedger, LedgerRecord


logger = logging.getLogger(__name__)

LEDGER_FILE = "ledger.csv"
METRICS_FILE = "metrics.json"
HISTOGRAM_FILE = "delay_histogram.dat"


def _ensure_parent(path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


class CSVWriter:
    """Writes and reads the per-run and per-campaign tables"""

    LEDGER_HEADERS = ['sender', 'receiver', 't_pub', 't_recv', 'delta', 'seq', 'kind']

    RUN_HEADERS = [
        'seed',
        'delay_introduced',
        'delay_check',
        'variant',
        'status',
        'collision_free',
        'deadlock',
        'monitor_violations',
        'audit_clean',
        'rejections',
        'delay_check_aborts',
        'commits',
        'rejections_per_commit',
        'mean_travel_time',
        'mean_travel_distance',
        'mean_num_stops',
        'mean_stop_time',
        'mean_jerk_integral',
        'max_delay',
        'max_commit_gap',
    ]

    SUMMARY_HEADERS = [
        'delay_introduced',
        'delay_check',
        'variant',
        'runs',
        'failed_runs',
        'collision_free_rate',
        'deadlock_rate',
        'mean_rejections_per_commit',
        'mean_travel_time',
        'mean_travel_distance',
        'mean_num_stops',
        'mean_stop_time',
        'mean_jerk_integral',
        'max_delay',
    ]

    def write_ledger(self, ledger: DelayLedger, output_path: str) -> str:
        """One row per delivered message leg, in delivery order"""
        _ensure_parent(output_path)
        with open(output_path, 'w', newline='', encoding='utf-8') as csvfile:
            writer = csv.DictWriter(csvfile, fieldnames=self.LEDGER_HEADERS)
            writer.writeheader()
            for rec in ledger.records:
                writer.writerow({
                    'sender': rec.sender,
                    'receiver': rec.receiver,
                    't_pub': repr(rec.t_pub),
                    't_recv': repr(rec.t_recv),
                    'delta': repr(rec.delta),
                    'seq': rec.seq,
                    'kind': rec.kind,
                })
        logger.info(f"Wrote {len(ledger)} ledger rows to {output_path}")
        return output_path

    def read_ledger(self, input_path: str, bucket: float = 0.01) -> DelayLedger:
        ledger = DelayLedger(bucket)
        with open(input_path, 'r', newline='', encoding='utf-8') as csvfile:
            reader = csv.DictReader(csvfile)
            missing = set(self.LEDGER_HEADERS) - set(reader.fieldnames or [])
            if missing:
                raise ValueError(f"{input_path}: missing ledger columns {sorted(missing)}")
            for row in reader:
                ledger.record(LedgerRecord(
                    sender=row['sender'],
                    receiver=row['receiver'],
                    seq=int(row['seq']),
                    kind=row['kind'],
                    t_pub=float(row['t_pub']),
                    t_recv=float(row['t_recv']),
                ))
        return ledger

    def write_metrics(self, report: MetricsReport, output_path: str) -> str:
        _ensure_parent(output_path)
        with open(output_path, 'w', encoding='utf-8') as f:
            json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        return output_path

    def read_metrics(self, input_path: str) -> MetricsReport:
        with open(input_path, 'r', encoding='utf-8') as f:
            return MetricsReport.from_dict(json.load(f))

    def write_histogram(self, histogram: Mapping[str, int], output_path: str, bucket: float = 0.01) -> str:
        """gnuplot-friendly two-column delay histogram"""
        _ensure_parent(output_path)
        with open(output_path, 'w', encoding='utf-8') as f:
            f.write("# bucket_start_ms bucket_end_ms count\n")
            width = int(round(bucket * 1000))
            for start, count in sorted(histogram.items(), key=lambda item: int(item[0])):
                f.write(f"{start} {int(start) + width} {count}\n")
        return output_path

    def write_runs(self, rows: Sequence[Dict[str, Any]], output_path: str) -> str:
        """Per-run campaign rows; header only for an empty campaign"""
        _ensure_parent(output_path)
        frame = pd.DataFrame(list(rows), columns=self.RUN_HEADERS)
        frame.to_csv(output_path, index=False)
        logger.info(f"Wrote {len(frame)} run rows to {output_path}")
        return output_path

    def write_summary(self, summary: pd.DataFrame, output_path: str) -> str:
        _ensure_parent(output_path)
        summary.reindex(columns=self.SUMMARY_HEADERS).to_csv(output_path, index=False)
        logger.info(f"Wrote {len(summary)} summary rows to {output_path}")
        return output_path

    def read_table(self, input_path: str) -> pd.DataFrame:
        return pd.read_csv(input_path)


def summarize_runs(rows: Sequence[Dict[str, Any]]) -> pd.DataFrame:
    """Per (delay_introduced, variant) cell rates and means; failed runs count as not collision-free"""
    if not rows:
        return pd.DataFrame(columns=CSVWriter.SUMMARY_HEADERS)

    frame = pd.DataFrame(list(rows), columns=CSVWriter.RUN_HEADERS)
    frame['failed'] = frame['status'].astype(str).str.startswith('failed')
    frame['collision_free'] = frame['collision_free'].fillna(False).astype(bool)
    frame['deadlock'] = frame['deadlock'].fillna(False).astype(bool)

    cells: List[Dict[str, Any]] = []
    for (delay, variant), group in frame.groupby(['delay_introduced', 'variant'], sort=True):
        ok = group[~group['failed']]
        cells.append({
            'delay_introduced': delay,
            'delay_check': group['delay_check'].iloc[0],
            'variant': variant,
            'runs': len(group),
            'failed_runs': int(group['failed'].sum()),
            'collision_free_rate': float((group['collision_free'] & ~group['failed']).mean()),
            'deadlock_rate': float(group['deadlock'].mean()),
            'mean_rejections_per_commit': float(ok['rejections_per_commit'].mean()) if len(ok) else float('nan'),
            'mean_travel_time': float(ok['mean_travel_time'].mean()) if len(ok) else float('nan'),
            'mean_travel_distance': float(ok['mean_travel_distance'].mean()) if len(ok) else float('nan'),
            'mean_num_stops': float(ok['mean_num_stops'].mean()) if len(ok) else float('nan'),
            'mean_stop_time': float(ok['mean_stop_time'].mean()) if len(ok) else float('nan'),
            'mean_jerk_integral': float(ok['mean_jerk_integral'].mean()) if len(ok) else float('nan'),
            'max_delay': float(ok['max_delay'].max()) if len(ok) else float('nan'),
        })
    return pd.DataFrame(cells, columns=CSVWriter.SUMMARY_HEADERS)

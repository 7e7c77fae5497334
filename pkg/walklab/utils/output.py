"""CSV and JSON writers for command output."""

import csv
from collections.abc import Iterable, Sequence
from fractions import Fraction
from typing import IO, Any

from pydantic import BaseModel

from walklab.models.chain import Trajectory
from walklab.models.limits import ScanRow

TRAJECTORY_HEADER = ("step", "z1", "twice_area")
TABLE_VARIANTS = ("u", "star")
SCAN_HEADER = (
    "K", "h", "sigma2_num", "sigma2_den", "sigma2_float", "K_times_sigma2", "u_K", "rule",
)


def format_float(value: float | Fraction | None) -> str:
    """12 significant digits; empty for a missing value."""
    if value is None:
        return ""
    return f"{float(value):.12g}"


def fraction_columns(value: Fraction) -> list[str]:
    """Numerator and denominator in full decimal."""
    return [str(value.numerator), str(value.denominator)]


def write_csv(stream: IO[str], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """RFC 4180 CSV: CRLF line endings, minimal quoting."""
    writer = csv.writer(stream, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)


def trajectory_rows(trajectory: Trajectory) -> list[list[int]]:
    return [[s.step, s.z1, s.twice_area] for s in trajectory.samples]


def scan_rows(rows: Iterable[ScanRow], rule: str) -> list[list[str]]:
    return [
        [
            str(row.K),
            str(row.h),
            *fraction_columns(row.sigma2),
            format_float(row.sigma2),
            format_float(row.K_times_sigma2),
            format_float(row.u_K),
            rule,
        ]
        for row in rows
    ]


def table_header(variants: Sequence[str] = TABLE_VARIANTS) -> list[str]:
    """Comparison columns; u_K and the sigma^2_{K,*} pair only when selected."""
    header = ["K", "sigma2_num", "sigma2_den", "sigma2_float", "two_over_K", "two_over_K_plus_2"]
    if "u" in variants:
        header.append("u_K")
    if "star" in variants:
        header.extend(("sigma2_star_num", "sigma2_star_den"))
    header.append("flagged")
    return header


def table_row(
    K: int,
    sigma2: Fraction,
    u_K: Fraction,
    sigma2_star: Fraction,
    variants: Sequence[str] = TABLE_VARIANTS,
) -> list[str]:
    """One comparison row; flagged when sigma^2_{K,0} <= 2/(K+2)."""
    lower = Fraction(2, K + 2)
    row = [
        str(K),
        *fraction_columns(sigma2),
        format_float(sigma2),
        format_float(Fraction(2, K)),
        format_float(lower),
    ]
    if "u" in variants:
        row.append(format_float(u_K))
    if "star" in variants:
        row.extend(fraction_columns(sigma2_star))
    row.append(str(int(sigma2 <= lower)))
    return row


def write_json(stream: IO[str], report: BaseModel) -> None:
    stream.write(report.model_dump_json(indent=2))
    stream.write("\n")

#!/usr/bin/env python3
# console.py
"""
Console output for people watching a run
Emoji-tagged banners and status lines; library code logs through loguru instead
"""

from typing import Any, Dict, Iterable


def print_header(title: str):
    """Print formatted header"""
    print("\n" + "=" * 100)
    print(f"🌊 [DAMPED WAVE LAB] {title}")
    print("=" * 100)


def print_success(message: str):
    """Print success message"""
    print(f"✅ [SUCCESS] {message}")


def print_error(message: str):
    """Print error message"""
    print(f"❌ [ERROR] {message}")


def print_info(message: str):
    """Print info message"""
    print(f"ℹ️  [INFO] {message}")


def print_warning(message: str):
    """Print warning message"""
    print(f"⚠️  [WARNING] {message}")


def print_checks(checks: Iterable[Dict[str, Any]]):
    """One line per claim check of a report"""
    for item in checks:
        if item["passed"]:
            print_success(f"{item['name']}")
        else:
            detail = ", ".join(f"{key}={value}" for key, value in item["detail"].items())
            print_error(f"{item['name']} failed ({detail})" if detail else f"{item['name']} failed")


def print_report_summary(report: Dict[str, Any]):
    """Header, checks and notes of a finished experiment"""
    print_header(f"{report['kind'].upper()} - {report['name']}")
    print_checks(report["checks"])
    for note in report["notes"]:
        print_warning(note)
    if not report["checks"]:
        print_info("no claim checks apply to this configuration")
    verdict = "all claim checks passed" if report["passed"] else "some claim checks failed"
    (print_success if report["passed"] else print_error)(verdict)

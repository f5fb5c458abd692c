"""Shared verdict registry for the acceptance tests (printed by the
terminal-summary hook in conftest so the lines survive output capture)."""

lines = []


def record(line):
    lines.append(line)

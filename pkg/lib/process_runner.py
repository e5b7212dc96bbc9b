"""Runs external commands for toolkit and metric adapters."""

import logging
import os
import subprocess
from dataclasses import dataclass
from pathlib import Path

logger = logging.getLogger("ProcessRunner")

LOG_TAIL_LINES = 20


@dataclass(frozen=True)
class CommandResult:
    exit_code: int
    stdout: str
    stderr: str

    def tail(self, lines: int = LOG_TAIL_LINES) -> str:
        combined = (self.stdout + ("\n" if self.stdout and self.stderr else "") + self.stderr).rstrip("\n")
        return "\n".join(combined.split("\n")[-lines:])


def execute_command(
    argv: list[str],
    cwd: str | Path | None = None,
    env: dict[str, str] | None = None,
    timeout: float | None = None,
    log_path: str | Path | None = None,
) -> CommandResult:
    """
    Executes argv without a shell and captures both streams.
    When log_path is given, stdout and stderr are written there.
    """
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    logger.debug(f"exec: {argv}")
    try:
        proc = subprocess.run(
            argv,
            cwd=str(cwd) if cwd is not None else None,
            env=full_env,
            capture_output=True,
            text=True,
            encoding="utf-8",
            errors="replace",
            timeout=timeout,
        )
        result = CommandResult(proc.returncode, proc.stdout or "", proc.stderr or "")
    except FileNotFoundError:
        result = CommandResult(127, "", f"command not found: {argv[0]}")
    except subprocess.TimeoutExpired as e:
        out = e.stdout.decode("utf-8", "replace") if isinstance(e.stdout, bytes) else (e.stdout or "")
        result = CommandResult(124, out, f"command timed out after {timeout} seconds")

    if log_path is not None:
        log_path = Path(log_path)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        with open(log_path, "w", encoding="utf-8") as f:
            f.write(f"$ {' '.join(argv)}\n")
            f.write(f"# exit code {result.exit_code}\n")
            f.write("## stdout\n" + result.stdout)
            f.write("\n## stderr\n" + result.stderr)
    return result

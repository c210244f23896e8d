import subprocess
import sys
import time
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

MAIN_FILE = ROOT / "main.py"


def run_process(cmd):
    return subprocess.Popen(
        cmd,
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        universal_newlines=True,
        bufsize=1
    )


def stream_output(process, name):
    for line in process.stdout:
        print(f"[{name}] {line}", end="")


def serve():
    print("Launching FastAPI backend (main.py) on http://localhost:8000 ...")
    proc = run_process([sys.executable, str(MAIN_FILE)])
    try:
        stream_output(proc, "api")
        while proc.poll() is None:
            time.sleep(0.5)
        print("FastAPI backend stopped!")
        return proc.returncode or 0
    except KeyboardInterrupt:
        print("\nShutting down ...")
        proc.terminate()
        return 0


if __name__ == "__main__":
    # `python run.py serve` starts the API, anything else goes to the CLI.
    if sys.argv[1:2] == ["serve"]:
        sys.exit(serve())
    from src.cli import run_command

    sys.exit(run_command(sys.argv[1:]))

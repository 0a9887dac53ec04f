import sys

from . import run_cli

rc, out, err = run_cli(sys.argv[1:])
sys.stdout.write(out)
sys.stderr.write(err)
sys.exit(rc)

"""
User-facing copy for the command-line interface.
"""

# --- Parser ---

PROG_DESCRIPTION = "Low-rank covariance, pilot decontamination and subspace filtering experiments for massive MIMO."

RUN_HELP = "run the experiment described by a config file"
LIST_HELP = "list experiments with their required and default keys"
SELFTEST_HELP = "run the built-in property checks"

CONFIG_ARG_HELP = "path to a flat 'key = value' experiment config"
OUT_HELP = "CSV output path (default: $RESULTS_DIR/<experiment>-seed<seed>.csv)"
SEED_HELP = "override the seed from the config file"
THREADS_HELP = "worker threads (default: $SIM_THREADS or 1)"
DUMP_HELP = "also write raw artifacts (geometries, eigenvalue spectra, channel draws) into this directory"

# --- Run ---

RUN_DONE = "Wrote {rows} rows to {path}"
CONFIG_ERROR = "Config error: {error}"
RUNTIME_ERROR = "Run failed: {error}"
UNEXPECTED_ERROR = "Unexpected error: {error} (details in the log file)"

# --- List ---

LIST_ENTRY = "{name}\n    {description}\n    required: {required}\n    defaults: {defaults}"
NO_REQUIRED = "(none)"

# --- Selftest ---

SELFTEST_PASS = "PASS  {name}"
SELFTEST_FAIL = "FAIL  {name}: {error}"
SELFTEST_SUMMARY = "{passed}/{total} checks passed"

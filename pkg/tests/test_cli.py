import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

from ViewingEEG import __version__
from ViewingEEG.cli import main


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


def help_text(argv):
    out = io.StringIO()
    with redirect_stdout(out), redirect_stderr(io.StringIO()):
        try:
            main(argv)
        except SystemExit:
            pass
    return " ".join(out.getvalue().split())


class TestCli(unittest.TestCase):

    def test_version(self):
        out = io.StringIO()
        with redirect_stdout(out):
            with self.assertRaises(SystemExit) as ctx:
                main(["--version"])
        self.assertEqual(ctx.exception.code, 0)
        self.assertIn(__version__, out.getvalue())

    def test_help_shows_defaults(self):
        text = help_text(["classify", "--help"])
        self.assertIn("Default is 10.", text)
        self.assertIn("Default is ranked-prefix.", text)
        self.assertIn("Default is 512.", text)
        self.assertIn("Default is 2.0.", help_text(["bandselect", "--help"]))

    def test_missing_subcommand(self):
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                main([])
        self.assertEqual(ctx.exception.code, 2)

    def test_unknown_preset(self):
        with tempfile.TemporaryDirectory() as tmp:
            code, _, err = run(["synth", "--preset", "nonexistent", "-o", tmp])
        self.assertEqual(code, 2)
        self.assertIn("stage3-paper-like", err)
        self.assertTrue(err.startswith("Error:"))

    def test_missing_input(self):
        code, _, err = run(["classify", "/nonexistent/cohort.json"])
        self.assertEqual(code, 3)
        self.assertIn("/nonexistent/cohort.json", err)
        code, _, _ = run(["bandselect"])
        self.assertEqual(code, 2)
        code, _, err = run(["ingest-check", "/nonexistent/data"])
        self.assertEqual(code, 3)

    def test_report_on_empty_directory(self):
        with tempfile.TemporaryDirectory() as tmp:
            code, _, err = run(["report", tmp])
        self.assertEqual(code, 3)
        self.assertIn("No band-selection or classification results", err)

    def test_synth_check_bandselect_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            data, results = os.path.join(tmp, "data"), os.path.join(tmp, "results")
            code, out, _ = run(["synth", "--preset", "null", "--trials", "1", "--seed", "3", "-o", data])
            self.assertEqual(code, 0)
            self.assertIn("1 participant(s)", out)

            code, out, _ = run(["ingest-check", data])
            self.assertEqual(code, 0)
            reports = json.loads(out)
            self.assertEqual(len(reports), 2)
            self.assertTrue(all(r["ok"] for r in reports.values()))

            code, out, _ = run(["bandselect", data, "-o", results, "--stages", "III", "--decimation", "8"])
            self.assertEqual(code, 0)
            self.assertIn("Stage III", out)
            self.assertTrue(os.path.isfile(os.path.join(results, "bandselect", "stage_III", "report.json")))

            code, _, _ = run(["report", results])
            self.assertEqual(code, 0)
            self.assertTrue(os.path.isfile(os.path.join(results, "report", "summary.txt")))

    def test_config_file_and_overrides(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = os.path.join(tmp, "config.json")
            with open(config, "w", encoding="utf-8") as f:
                json.dump({"threshold": -1.0}, f)
            code, _, err = run(["--config", config, "bandselect", tmp])
            self.assertEqual(code, 2)
            with open(config, "w", encoding="utf-8") as f:
                json.dump({"no_such_key": 1}, f)
            code, _, err = run(["--config", config, "bandselect", tmp])
            self.assertEqual(code, 2)
            self.assertIn("no_such_key", err)


if __name__ == '__main__':
    unittest.main()

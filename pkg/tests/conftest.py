import os

# argparse wraps help to the terminal width; pin it so help-text tests do not
# depend on the width of whatever terminal runs pytest.
os.environ["COLUMNS"] = "200"

# This file makes the 'algebra' directory a Python package.
# Services import directly from the modules (exactpoly, cremona, expr_parser);
# nothing is re-exported here.
